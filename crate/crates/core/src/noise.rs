//! Character-level noise injection and removal.
//!
//! The core operation inserts noise scalars after every Unicode scalar of
//! the input ("after each visible character" includes whitespace and
//! newlines; iteration is by scalar, not grapheme cluster). Insertion is
//! driven by a seeded [`SplitMix64`] stream: for each input scalar the
//! stream first yields the insertion count, then one alphabet index per
//! inserted scalar. A [`NoiseSpec`] therefore fully determines the output.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;
use crate::unicode::{is_default_ignorable, is_variation_selector, vs_scalar, VS_TOTAL};

/// ASCII symbol preset with 8 members.
pub const ASCII8: &[char] = &['!', '#', '$', '%', '&', '*', '+', '-'];

/// ASCII punctuation-and-symbol preset with 27 members.
pub const ASCII27: &[char] = &[
    '!', '#', '$', '%', '&', '(', ')', '*', '+', '-', '/', ':', ';', '<', '=', '>', '@', '[',
    '\\', ']', '^', '_', '`', '{', '|', '}', '~',
];

/// The set of scalars an injector samples from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseAlphabet {
    /// First `set_size` variation selectors in canonical order.
    VariationSelectors { set_size: u16 },
    /// A single fixed scalar (for example the visible 'A' variant).
    FixedChar { char: char },
    /// An explicit ordered, duplicate-free scalar list.
    CharSet { chars: Vec<char> },
}

impl NoiseAlphabet {
    pub fn variation_selectors(set_size: u16) -> Self {
        NoiseAlphabet::VariationSelectors { set_size }
    }

    pub fn fixed(c: char) -> Self {
        NoiseAlphabet::FixedChar { char: c }
    }

    pub fn ascii8() -> Self {
        NoiseAlphabet::CharSet {
            chars: ASCII8.to_vec(),
        }
    }

    pub fn ascii27() -> Self {
        NoiseAlphabet::CharSet {
            chars: ASCII27.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        match self {
            NoiseAlphabet::VariationSelectors { set_size } => {
                if *set_size == 0 || *set_size > VS_TOTAL {
                    return Err(NoiseError::InvalidSetSize(*set_size));
                }
            }
            NoiseAlphabet::FixedChar { .. } => {}
            NoiseAlphabet::CharSet { chars } => {
                if chars.is_empty() {
                    return Err(NoiseError::EmptyAlphabet);
                }
                let mut seen = std::collections::HashSet::new();
                for &c in chars {
                    if !seen.insert(c) {
                        return Err(NoiseError::DuplicateAlphabetChar(c));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match self {
            NoiseAlphabet::VariationSelectors { set_size } => *set_size as usize,
            NoiseAlphabet::FixedChar { .. } => 1,
            NoiseAlphabet::CharSet { chars } => chars.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Scalar at alphabet index `k`.
    pub fn scalar_at(&self, k: usize) -> char {
        match self {
            NoiseAlphabet::VariationSelectors { .. } => vs_scalar(k as u16),
            NoiseAlphabet::FixedChar { char } => *char,
            NoiseAlphabet::CharSet { chars } => chars[k],
        }
    }

    pub fn contains(&self, c: char) -> bool {
        match self {
            NoiseAlphabet::VariationSelectors { set_size } => {
                crate::unicode::vs_index(c).is_some_and(|k| k < *set_size)
            }
            NoiseAlphabet::FixedChar { char } => c == *char,
            NoiseAlphabet::CharSet { chars } => chars.contains(&c),
        }
    }
}

/// Inclusive range for the per-scalar insertion count. A fixed count `i`
/// is written `[i, i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountPolicy {
    pub lo: u32,
    pub hi: u32,
}

impl CountPolicy {
    pub fn fixed(count: u32) -> Self {
        CountPolicy {
            lo: count,
            hi: count,
        }
    }

    pub fn range(lo: u32, hi: u32) -> Result<Self, NoiseError> {
        if lo > hi {
            return Err(NoiseError::InvalidCountRange { lo, hi });
        }
        Ok(CountPolicy { lo, hi })
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if self.lo > self.hi {
            return Err(NoiseError::InvalidCountRange {
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }
}

/// Complete description of one perturbation configuration. Output is a
/// pure function of `(text, spec)` with no hidden state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub alphabet: NoiseAlphabet,
    pub count: CountPolicy,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(alphabet: NoiseAlphabet, count: CountPolicy, seed: u64) -> Self {
        NoiseSpec {
            alphabet,
            count,
            seed,
        }
    }

    /// Same spec with a different seed; used by per-problem seed policies.
    pub fn with_seed(&self, seed: u64) -> Self {
        NoiseSpec {
            alphabet: self.alphabet.clone(),
            count: self.count,
            seed,
        }
    }

    /// Expected output/input scalar ratio: `1 + (lo + hi) / 2`.
    pub fn expected_inflation(&self) -> f64 {
        expected_inflation(self)
    }
}

/// Expected output/input scalar ratio for a spec.
pub fn expected_inflation(spec: &NoiseSpec) -> f64 {
    1.0 + f64::from(spec.count.lo + spec.count.hi) / 2.0
}

/// What was inserted after one original scalar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionEntry {
    /// Scalar index into the original text.
    pub index: usize,
    /// Noise scalars emitted immediately after that original scalar.
    pub inserted: Vec<char>,
}

/// Per-scalar record of every insertion. Interleaving the original text
/// with the logged insertions reproduces the perturbed text exactly.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InjectionLog {
    pub entries: Vec<InjectionEntry>,
}

impl InjectionLog {
    /// Identity log for unperturbed text (zero insertions everywhere).
    pub fn identity(text: &str) -> Self {
        InjectionLog {
            entries: text
                .chars()
                .enumerate()
                .map(|(index, _)| InjectionEntry {
                    index,
                    inserted: Vec::new(),
                })
                .collect(),
        }
    }

    /// Total number of inserted scalars.
    pub fn inserted_count(&self) -> usize {
        self.entries.iter().map(|e| e.inserted.len()).sum()
    }

    /// Rebuild the perturbed text from the original plus this log.
    pub fn replay(&self, original: &str) -> Result<String, NoiseError> {
        let scalars: Vec<char> = original.chars().collect();
        if self.entries.len() != scalars.len() {
            return Err(NoiseError::LogLengthMismatch {
                log: self.entries.len(),
                text: scalars.len(),
            });
        }
        let mut out = String::with_capacity(original.len() * 2);
        for (i, entry) in self.entries.iter().enumerate() {
            if entry.index != i {
                return Err(NoiseError::LogIndexMismatch {
                    expected: i,
                    found: entry.index,
                });
            }
            out.push(scalars[i]);
            out.extend(entry.inserted.iter());
        }
        Ok(out)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NoiseError {
    #[error("input already contains noise-like scalar {scalar:?} at scalar index {index}")]
    InputContainsNoise { index: usize, scalar: char },
    #[error("noise alphabet is empty")]
    EmptyAlphabet,
    #[error("variation selector set size {0} outside 1..=256")]
    InvalidSetSize(u16),
    #[error("duplicate alphabet scalar {0:?}")]
    DuplicateAlphabetChar(char),
    #[error("count range lower bound {lo} exceeds upper bound {hi}")]
    InvalidCountRange { lo: u32, hi: u32 },
    #[error("injection log has {log} entries but text has {text} scalars")]
    LogLengthMismatch { log: usize, text: usize },
    #[error("injection log entry out of order: expected index {expected}, found {found}")]
    LogIndexMismatch { expected: usize, found: usize },
}

/// A perturbed text together with its insertion log.
#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub perturbed: String,
    pub log: InjectionLog,
}

/// Insert noise after every scalar of `text` as described by `spec`.
///
/// Rejects input that already contains variation selectors or other
/// default-ignorable scalars: mixing pre-existing invisible characters
/// with injected ones would make the output unstrippable.
pub fn inject(text: &str, spec: &NoiseSpec) -> Result<Injection, NoiseError> {
    spec.alphabet.validate()?;
    spec.count.validate()?;

    for (index, scalar) in text.chars().enumerate() {
        if is_default_ignorable(scalar) {
            return Err(NoiseError::InputContainsNoise { index, scalar });
        }
    }

    let alpha_len = spec.alphabet.len() as u64;
    let mut rng = SplitMix64::new(spec.seed);
    let mut perturbed = String::with_capacity(text.len() * (1 + spec.count.hi as usize));
    let mut entries = Vec::with_capacity(text.chars().count());

    for (index, scalar) in text.chars().enumerate() {
        perturbed.push(scalar);
        let count = rng.uniform(u64::from(spec.count.lo), u64::from(spec.count.hi)) as usize;
        let mut inserted = Vec::with_capacity(count);
        for _ in 0..count {
            let k = rng.uniform(0, alpha_len - 1) as usize;
            let noise = spec.alphabet.scalar_at(k);
            perturbed.push(noise);
            inserted.push(noise);
        }
        entries.push(InjectionEntry { index, inserted });
    }

    Ok(Injection {
        perturbed,
        log: InjectionLog { entries },
    })
}

/// Remove every scalar in the canonical variation selector ranges.
/// Idempotent; a no-op on text that carries none.
pub fn strip(text: &str) -> String {
    text.chars().filter(|&c| !is_variation_selector(c)).collect()
}

/// Remove exactly the scalars belonging to `alphabet`. This is the inverse
/// of [`inject`] for visible alphabets, provided the original text
/// contained no alphabet members of its own.
pub fn strip_with(text: &str, alphabet: &NoiseAlphabet) -> String {
    text.chars().filter(|&c| !alphabet.contains(c)).collect()
}

/// Inject a batch of `(text, spec)` pairs, in order. Runs data-parallel
/// when the `parallel` feature is enabled.
pub fn inject_batch(pairs: &[(String, NoiseSpec)]) -> Result<Vec<Injection>, NoiseError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        pairs
            .par_iter()
            .map(|(text, spec)| inject(text, spec))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        inject_batch_seq(pairs)
    }
}

/// Sequential variant of [`inject_batch`]; always available so benchmarks
/// can compare the two in one build.
pub fn inject_batch_seq(pairs: &[(String, NoiseSpec)]) -> Result<Vec<Injection>, NoiseError> {
    pairs
        .iter()
        .map(|(text, spec)| inject(text, spec))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs_spec(set_size: u16, lo: u32, hi: u32, seed: u64) -> NoiseSpec {
        NoiseSpec::new(
            NoiseAlphabet::variation_selectors(set_size),
            CountPolicy { lo, hi },
            seed,
        )
    }

    #[test]
    fn set_size_one_forces_vs1_everywhere() {
        // Any seed: the single-member alphabet leaves no choice.
        for seed in [0, 1, 42, u64::MAX] {
            let inj = inject("the", &vs_spec(1, 1, 1, seed)).unwrap();
            assert_eq!(inj.perturbed, "t\u{FE00}h\u{FE00}e\u{FE00}");
        }
    }

    #[test]
    fn empty_input_yields_empty_output() {
        let inj = inject("", &vs_spec(256, 1, 3, 9)).unwrap();
        assert_eq!(inj.perturbed, "");
        assert!(inj.log.entries.is_empty());
    }

    #[test]
    fn fixed_char_alphabet() {
        let spec = NoiseSpec::new(NoiseAlphabet::fixed('A'), CountPolicy::fixed(1), 3);
        let inj = inject("Hi", &spec).unwrap();
        assert_eq!(inj.perturbed, "HAiA");
    }

    #[test]
    fn seed42_structural_example() {
        // Expected scalars frozen from an independent SplitMix64
        // implementation of the documented draw order.
        let inj = inject("ab", &vs_spec(256, 2, 2, 42)).unwrap();
        let got: Vec<char> = inj.perturbed.chars().collect();
        assert_eq!(
            got,
            vec!['a', '\u{FE03}', '\u{E0142}', 'b', '\u{E01E2}', '\u{FE06}']
        );
    }

    #[test]
    fn rejects_input_with_variation_selectors() {
        let err = inject("a\u{FE00}b", &vs_spec(256, 1, 1, 0)).unwrap_err();
        assert_eq!(
            err,
            NoiseError::InputContainsNoise {
                index: 1,
                scalar: '\u{FE00}'
            }
        );
    }

    #[test]
    fn rejects_default_ignorable_input() {
        // Zero-width joiner is not in the VS ranges but still invisible.
        let err = inject("a\u{200D}b", &vs_spec(256, 1, 1, 0)).unwrap_err();
        assert!(matches!(err, NoiseError::InputContainsNoise { index: 1, .. }));
    }

    #[test]
    fn rejects_empty_charset() {
        let spec = NoiseSpec::new(
            NoiseAlphabet::CharSet { chars: vec![] },
            CountPolicy::fixed(1),
            0,
        );
        assert_eq!(inject("x", &spec).unwrap_err(), NoiseError::EmptyAlphabet);
    }

    #[test]
    fn rejects_bad_set_size() {
        for set_size in [0u16, 257] {
            let err = inject("x", &vs_spec(set_size, 1, 1, 0)).unwrap_err();
            assert_eq!(err, NoiseError::InvalidSetSize(set_size));
        }
    }

    #[test]
    fn strip_removes_vs_only() {
        assert_eq!(strip("t\u{FE00}h\u{FE0F}e"), "the");
        assert_eq!(strip("plain"), "plain");
        assert_eq!(strip("x\u{E0100}y\u{E01EF}"), "xy");
        // Non-VS ignorables are out of scope for the default strip.
        assert_eq!(strip("a\u{200B}b"), "a\u{200B}b");
    }

    #[test]
    fn strip_with_removes_alphabet_members() {
        let a = NoiseAlphabet::fixed('A');
        assert_eq!(strip_with("HAiA", &a), "Hi");
        let s = NoiseAlphabet::ascii8();
        assert_eq!(strip_with("x!y#z", &s), "xyz");
    }

    #[test]
    fn round_trip_vs() {
        let text = "All must answer, even on Sundays.\nLine 2 with 中文 and 🙂.";
        for (set_size, lo, hi) in [(1, 1, 1), (16, 0, 3), (256, 2, 2)] {
            let inj = inject(text, &vs_spec(set_size, lo, hi, 1234)).unwrap();
            assert_eq!(strip(&inj.perturbed), text);
        }
    }

    #[test]
    fn scalar_count_law() {
        let text = "count me";
        let inj = inject(text, &vs_spec(256, 0, 3, 77)).unwrap();
        let expected = text.chars().count() + inj.log.inserted_count();
        assert_eq!(inj.perturbed.chars().count(), expected);

        // Fixed count i multiplies the scalar count by (1 + i).
        let inj = inject(text, &vs_spec(256, 3, 3, 77)).unwrap();
        assert_eq!(inj.perturbed.chars().count(), text.chars().count() * 4);
    }

    #[test]
    fn log_replay_reproduces_perturbed() {
        let text = "replay this";
        let inj = inject(text, &vs_spec(64, 0, 2, 5)).unwrap();
        assert_eq!(inj.log.replay(text).unwrap(), inj.perturbed);
    }

    #[test]
    fn alphabet_closure_for_subset() {
        let inj = inject("subset check", &vs_spec(8, 1, 3, 21)).unwrap();
        for entry in &inj.log.entries {
            for &c in &entry.inserted {
                let k = crate::unicode::vs_index(c).unwrap();
                assert!(k < 8, "inserted VS index {k} outside set");
            }
        }
    }

    #[test]
    fn expected_inflation_values() {
        let mk = |lo, hi| NoiseSpec::new(NoiseAlphabet::variation_selectors(256), CountPolicy { lo, hi }, 0);
        assert_eq!(expected_inflation(&mk(1, 1)), 2.0);
        assert_eq!(expected_inflation(&mk(3, 3)), 4.0);
        assert_eq!(expected_inflation(&mk(0, 2)), 2.0);
        assert_eq!(expected_inflation(&mk(0, 1)), 1.5);
    }

    #[test]
    fn ascii_presets_have_documented_sizes() {
        assert_eq!(ASCII8.len(), 8);
        assert_eq!(ASCII27.len(), 27);
        NoiseAlphabet::ascii8().validate().unwrap();
        NoiseAlphabet::ascii27().validate().unwrap();
    }

    #[test]
    fn batch_matches_single_calls() {
        let pairs: Vec<(String, NoiseSpec)> = (0..20)
            .map(|i| (format!("text number {i}"), vs_spec(16, 0, 3, i)))
            .collect();
        let batch = inject_batch(&pairs).unwrap();
        let seq = inject_batch_seq(&pairs).unwrap();
        assert_eq!(batch, seq);
        for ((text, spec), inj) in pairs.iter().zip(&batch) {
            assert_eq!(inject(text, spec).unwrap(), *inj);
        }
    }
}
