//! Byte-level BPE vocabulary: token table plus ranked merge list.
//!
//! On-disk shape is two plain files in one directory:
//! `tokens.txt` with one byte-escaped token per line (id = line number,
//! 0-based) and `merges.txt` with one `left right` pair per line (rank =
//! line number). Bytes outside printable ASCII, plus space and backslash,
//! are escaped as `\xNN`, so a single space always separates a merge pair.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file} line {line}: bad byte escape {text:?}")]
    BadEscape {
        file: &'static str,
        line: usize,
        text: String,
    },
    #[error("merges.txt line {line}: expected two space-separated tokens")]
    BadMergeLine { line: usize },
    #[error("merges.txt line {line}: pair side {token:?} is not in the token table")]
    UnknownMergeSide { line: usize, token: String },
    #[error("merges.txt line {line}: merged token {token:?} is not in the token table")]
    MergeProductMissing { line: usize, token: String },
    #[error("duplicate token {token:?} at tokens.txt lines {first} and {second}")]
    DuplicateToken {
        token: String,
        first: usize,
        second: usize,
    },
    #[error("vocabulary is missing single-byte token 0x{byte:02x}; byte-level closure requires all 256")]
    MissingByteToken { byte: u8 },
}

/// Immutable byte-level BPE vocabulary. Shareable across threads.
#[derive(Debug, Clone)]
pub struct BpeVocab {
    tokens: Vec<Vec<u8>>,
    token_to_id: HashMap<Vec<u8>, u32>,
    merges: Vec<(Vec<u8>, Vec<u8>)>,
    merge_rank: HashMap<(Vec<u8>, Vec<u8>), u32>,
}

impl BpeVocab {
    /// Build from raw parts, enforcing byte-level closure (all 256
    /// single-byte tokens present) and that every merge product exists.
    pub fn new(tokens: Vec<Vec<u8>>, merges: Vec<(Vec<u8>, Vec<u8>)>) -> Result<Self, VocabError> {
        let mut token_to_id = HashMap::with_capacity(tokens.len());
        for (id, tok) in tokens.iter().enumerate() {
            if let Some(&first) = token_to_id.get(tok) {
                return Err(VocabError::DuplicateToken {
                    token: escape_bytes(tok),
                    first: first as usize + 1,
                    second: id + 1,
                });
            }
            token_to_id.insert(tok.clone(), id as u32);
        }
        for b in 0..=255u8 {
            if !token_to_id.contains_key([b].as_slice()) {
                return Err(VocabError::MissingByteToken { byte: b });
            }
        }
        let mut merge_rank = HashMap::with_capacity(merges.len());
        for (rank, (left, right)) in merges.iter().enumerate() {
            for side in [left, right] {
                if !token_to_id.contains_key(side.as_slice()) {
                    return Err(VocabError::UnknownMergeSide {
                        line: rank + 1,
                        token: escape_bytes(side),
                    });
                }
            }
            let product: Vec<u8> = left.iter().chain(right.iter()).copied().collect();
            if !token_to_id.contains_key(product.as_slice()) {
                return Err(VocabError::MergeProductMissing {
                    line: rank + 1,
                    token: escape_bytes(&product),
                });
            }
            merge_rank.insert((left.clone(), right.clone()), rank as u32);
        }
        Ok(BpeVocab {
            tokens,
            token_to_id,
            merges,
            merge_rank,
        })
    }

    /// Load `tokens.txt` and `merges.txt` from `dir`.
    pub fn load(dir: &Path) -> Result<Self, VocabError> {
        let read = |name: &'static str| -> Result<String, VocabError> {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| VocabError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        let tokens = read("tokens.txt")?
            .lines()
            .enumerate()
            .map(|(i, line)| {
                unescape_bytes(line).ok_or(VocabError::BadEscape {
                    file: "tokens.txt",
                    line: i + 1,
                    text: line.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let merges = read("merges.txt")?
            .lines()
            .enumerate()
            .map(|(i, line)| {
                let mut parts = line.split(' ');
                let (Some(l), Some(r), None) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(VocabError::BadMergeLine { line: i + 1 });
                };
                let left = unescape_bytes(l).ok_or(VocabError::BadEscape {
                    file: "merges.txt",
                    line: i + 1,
                    text: l.to_string(),
                })?;
                let right = unescape_bytes(r).ok_or(VocabError::BadEscape {
                    file: "merges.txt",
                    line: i + 1,
                    text: r.to_string(),
                })?;
                Ok((left, right))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(tokens, merges)
    }

    /// Write `tokens.txt` and `merges.txt` into `dir`.
    pub fn save(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut tokens = String::new();
        for tok in &self.tokens {
            tokens.push_str(&escape_bytes(tok));
            tokens.push('\n');
        }
        std::fs::write(dir.join("tokens.txt"), tokens)?;
        let mut merges = String::new();
        for (l, r) in &self.merges {
            merges.push_str(&escape_bytes(l));
            merges.push(' ');
            merges.push_str(&escape_bytes(r));
            merges.push('\n');
        }
        std::fs::write(dir.join("merges.txt"), merges)
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn id_of(&self, token: &[u8]) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token_bytes(&self, id: u32) -> Option<&[u8]> {
        self.tokens.get(id as usize).map(Vec::as_slice)
    }

    pub(crate) fn rank_of(&self, left: &[u8], right: &[u8]) -> Option<u32> {
        self.merge_rank
            .get(&(left.to_vec(), right.to_vec()))
            .copied()
    }

    pub(crate) fn merge_at(&self, rank: u32) -> Option<&(Vec<u8>, Vec<u8>)> {
        self.merges.get(rank as usize)
    }

    /// Concatenate the byte contents of `ids`.
    pub fn decode_bytes(&self, ids: &[u32]) -> Option<Vec<u8>> {
        let mut out = Vec::new();
        for &id in ids {
            out.extend_from_slice(self.token_bytes(id)?);
        }
        Some(out)
    }
}

/// Escape a token for the one-token-per-line file format.
pub fn escape_bytes(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &b in bytes {
        if (0x21..=0x7E).contains(&b) && b != b'\\' {
            out.push(b as char);
        } else {
            let _ = write!(out, "\\x{b:02x}");
        }
    }
    out
}

/// Inverse of [`escape_bytes`]. Returns `None` on malformed escapes.
pub fn unescape_bytes(text: &str) -> Option<Vec<u8>> {
    let mut out = Vec::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if chars.next() != Some('x') {
                return None;
            }
            let hi = chars.next()?.to_digit(16)?;
            let lo = chars.next()?.to_digit(16)?;
            out.push((hi * 16 + lo) as u8);
        } else if (0x21..0x7F).contains(&(c as u32)) {
            out.push(c as u8);
        } else {
            return None;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn byte_tokens() -> Vec<Vec<u8>> {
        (0..=255u8).map(|b| vec![b]).collect()
    }

    #[test]
    fn escape_round_trip() {
        for bytes in [
            b"plain".to_vec(),
            b" spaced out ".to_vec(),
            vec![0x00, 0xff, b'\\', b'x'],
            "\u{FE00}".as_bytes().to_vec(),
        ] {
            let escaped = escape_bytes(&bytes);
            assert!(!escaped.contains(' '), "{escaped:?}");
            assert_eq!(unescape_bytes(&escaped).unwrap(), bytes);
        }
    }

    #[test]
    fn unescape_rejects_malformed() {
        for bad in ["\\", "\\x", "\\xg1", "\\x1", "has space", "\\y00"] {
            assert!(unescape_bytes(bad).is_none(), "{bad:?}");
        }
    }

    #[test]
    fn rejects_missing_byte_token() {
        let mut tokens = byte_tokens();
        tokens.remove(0x41);
        let err = BpeVocab::new(tokens, vec![]).unwrap_err();
        assert!(matches!(err, VocabError::MissingByteToken { byte: 0x41 }));
    }

    #[test]
    fn rejects_merge_without_product() {
        let tokens = byte_tokens();
        let merges = vec![(b"t".to_vec(), b"h".to_vec())];
        let err = BpeVocab::new(tokens, merges).unwrap_err();
        assert!(matches!(err, VocabError::MergeProductMissing { line: 1, .. }));
    }

    #[test]
    fn save_load_round_trip() {
        let mut tokens = byte_tokens();
        tokens.push(b"th".to_vec());
        let merges = vec![(b"t".to_vec(), b"h".to_vec())];
        let vocab = BpeVocab::new(tokens, merges).unwrap();

        let dir = tempfile::tempdir().unwrap();
        vocab.save(dir.path()).unwrap();
        let loaded = BpeVocab::load(dir.path()).unwrap();
        assert_eq!(loaded.token_count(), vocab.token_count());
        assert_eq!(loaded.id_of(b"th"), vocab.id_of(b"th"));
        assert_eq!(loaded.rank_of(b"t", b"h"), Some(0));
    }
}
