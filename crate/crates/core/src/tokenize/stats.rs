//! Token-level fragmentation metrics for perturbed text.
//!
//! Every byte of the perturbed text is attributed to either the original
//! (signal) or an insertion (noise) using the injection log, and each BPE
//! token is classified by the provenance of its bytes. A token spanning
//! both sides is "mixed" — the mechanism behind the visible-noise merge
//! anomaly, where inserted letters fuse with adjacent signal characters.

use serde::{Deserialize, Serialize};

use crate::noise::InjectionLog;

use super::{bpe_token_spans, BpeVocab, TokenizeError};

/// Fragmentation metrics for one (original, perturbed, vocabulary) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenStats {
    pub token_count: usize,
    /// token_count / scalar_count(original); 0 for empty originals.
    pub tokens_per_signal_scalar: f64,
    pub pure_noise_tokens: usize,
    pub pure_signal_tokens: usize,
    pub mixed_tokens: usize,
    /// True iff some multi-scalar signal word ended up with every token
    /// holding at most one of its scalars.
    pub signal_fragmented: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Provenance {
    Signal { scalar: usize },
    Noise,
}

/// Classify the tokens of `bpe_encode(perturbed)` by byte provenance.
pub fn frag_stats(
    original: &str,
    perturbed: &str,
    log: &InjectionLog,
    vocab: &BpeVocab,
) -> Result<TokenStats, TokenizeError> {
    match log.replay(original) {
        Ok(replayed) if replayed == perturbed => {}
        _ => return Err(TokenizeError::LogMismatch),
    }

    // Per-byte provenance of the perturbed text, tagging signal bytes with
    // their original scalar index.
    let mut provenance = Vec::with_capacity(perturbed.len());
    for (entry, scalar) in log.entries.iter().zip(original.chars()) {
        for _ in 0..scalar.len_utf8() {
            provenance.push(Provenance::Signal {
                scalar: entry.index,
            });
        }
        for ins in &entry.inserted {
            for _ in 0..ins.len_utf8() {
                provenance.push(Provenance::Noise);
            }
        }
    }
    debug_assert_eq!(provenance.len(), perturbed.len());

    let spans = bpe_token_spans(perturbed, vocab);
    let token_count = spans.len();
    let mut pure_signal = 0usize;
    let mut pure_noise = 0usize;
    let mut mixed = 0usize;
    // For each signal scalar, how many distinct scalars of the original
    // share its token (via word handling below).
    let mut scalar_token: Vec<Option<usize>> = vec![None; log.entries.len()];
    let mut token_scalar_count: Vec<usize> = vec![0; token_count];

    for (tok_idx, &(a, b)) in spans.iter().enumerate() {
        let mut has_signal = false;
        let mut has_noise = false;
        let mut last_scalar = usize::MAX;
        for &p in &provenance[a..b] {
            match p {
                Provenance::Signal { scalar } => {
                    has_signal = true;
                    if scalar != last_scalar {
                        last_scalar = scalar;
                        scalar_token[scalar] = Some(tok_idx);
                        token_scalar_count[tok_idx] += 1;
                    }
                }
                Provenance::Noise => has_noise = true,
            }
        }
        match (has_signal, has_noise) {
            (true, true) => mixed += 1,
            (true, false) => pure_signal += 1,
            (false, true) => pure_noise += 1,
            (false, false) => {} // unreachable: tokens are non-empty
        }
    }

    let original_scalars: Vec<char> = original.chars().collect();
    let signal_fragmented = any_word_fragmented(&original_scalars, &scalar_token, &token_scalar_count);

    let scalar_count = original_scalars.len();
    let tokens_per_signal_scalar = if scalar_count == 0 {
        0.0
    } else {
        token_count as f64 / scalar_count as f64
    };

    Ok(TokenStats {
        token_count,
        tokens_per_signal_scalar,
        pure_noise_tokens: pure_noise,
        pure_signal_tokens: pure_signal,
        mixed_tokens: mixed,
        signal_fragmented,
    })
}

/// A word (maximal alphanumeric run) of two or more scalars counts as
/// fragmented when no token holds two of its scalars together.
fn any_word_fragmented(
    scalars: &[char],
    scalar_token: &[Option<usize>],
    token_scalar_count: &[usize],
) -> bool {
    let mut i = 0;
    while i < scalars.len() {
        if !scalars[i].is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        while i < scalars.len() && scalars[i].is_alphanumeric() {
            i += 1;
        }
        let len = i - start;
        if len < 2 {
            continue;
        }
        // Distinct tokens touched by this word; if the word occupies `len`
        // distinct tokens, every token held exactly one of its scalars.
        let mut distinct = 0usize;
        let mut prev = usize::MAX;
        let mut multi_in_one = false;
        for s in start..i {
            if let Some(tok) = scalar_token[s] {
                if tok != prev {
                    distinct += 1;
                    prev = tok;
                } else {
                    multi_in_one = true;
                }
                // Token shared with scalars outside this word still counts
                // as holding >= 2 signal scalars.
                if token_scalar_count[tok] >= 2 {
                    multi_in_one = true;
                }
            }
        }
        if distinct == len && !multi_in_one {
            return true;
        }
    }
    false
}

/// Batch form of [`frag_stats`]; data-parallel when `parallel` is enabled.
pub fn frag_stats_batch(
    items: &[(String, String, InjectionLog)],
    vocab: &BpeVocab,
) -> Result<Vec<TokenStats>, TokenizeError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items
            .par_iter()
            .map(|(orig, pert, log)| frag_stats(orig, pert, log, vocab))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items
            .iter()
            .map(|(orig, pert, log)| frag_stats(orig, pert, log, vocab))
            .collect()
    }
}
