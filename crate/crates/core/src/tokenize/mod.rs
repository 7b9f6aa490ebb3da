//! BPE encoding and noise-fragmentation analysis.
//!
//! Encoding runs greedy lowest-rank merging directly over the raw UTF-8
//! byte stream; there is no pre-tokenization split, so fragmentation
//! effects are attributable to the vocabulary alone. Byte-level closure
//! of the vocabulary makes encoding total.

mod stats;
mod vocab;

pub use stats::{frag_stats, frag_stats_batch, TokenStats};
pub use vocab::{escape_bytes, unescape_bytes, BpeVocab, VocabError};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TokenizeError {
    #[error("scalar {scalar:?} at scalar index {index} has no single-token encoding")]
    UnencodableScalar { index: usize, scalar: char },
    #[error("injection log does not reproduce the perturbed text")]
    LogMismatch,
}

/// Encode `text` with greedy lowest-rank BPE over its UTF-8 bytes.
///
/// Starts from one token per byte and repeatedly applies the present
/// merge with the smallest rank to all of its occurrences, left to right,
/// until no listed merge applies. Decoding the result reproduces the
/// input bytes exactly.
pub fn bpe_encode(text: &str, vocab: &BpeVocab) -> Vec<u32> {
    let bytes = text.as_bytes();
    bpe_token_spans(text, vocab)
        .iter()
        .map(|&(a, b)| {
            vocab
                .id_of(&bytes[a..b])
                .expect("merge products are vocabulary members")
        })
        .collect()
}

/// Byte spans of the tokens [`bpe_encode`] produces. Each token is a
/// contiguous slice of the input, so spans carry full position data for
/// fragmentation analysis.
pub(crate) fn bpe_token_spans(text: &str, vocab: &BpeVocab) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut spans: Vec<(usize, usize)> =
        bytes.iter().enumerate().map(|(i, _)| (i, i + 1)).collect();
    loop {
        let mut best: Option<u32> = None;
        for i in 0..spans.len().saturating_sub(1) {
            let left = &bytes[spans[i].0..spans[i].1];
            let right = &bytes[spans[i + 1].0..spans[i + 1].1];
            if let Some(rank) = vocab.rank_of(left, right) {
                if best.is_none_or(|r| rank < r) {
                    best = Some(rank);
                }
            }
        }
        let Some(rank) = best else { break };
        let (left, right) = vocab.merge_at(rank).expect("rank came from this vocabulary");
        let mut out = Vec::with_capacity(spans.len());
        let mut i = 0;
        while i < spans.len() {
            if i + 1 < spans.len()
                && bytes[spans[i].0..spans[i].1] == left[..]
                && bytes[spans[i + 1].0..spans[i + 1].1] == right[..]
            {
                out.push((spans[i].0, spans[i + 1].1));
                i += 2;
            } else {
                out.push(spans[i]);
                i += 1;
            }
        }
        spans = out;
    }
    spans
}

/// One token id per Unicode scalar, regardless of merges.
///
/// Errors with the index of the first scalar whose UTF-8 encoding is not
/// a vocabulary token of its own.
pub fn char_token_sequence(text: &str, vocab: &BpeVocab) -> Result<Vec<u32>, TokenizeError> {
    let mut ids = Vec::with_capacity(text.len());
    let mut buf = [0u8; 4];
    for (index, scalar) in text.chars().enumerate() {
        let bytes = scalar.encode_utf8(&mut buf).as_bytes();
        match vocab.id_of(bytes) {
            Some(id) => ids.push(id),
            None => return Err(TokenizeError::UnencodableScalar { index, scalar }),
        }
    }
    Ok(ids)
}

/// Encode a batch of texts, preserving order. Data-parallel when the
/// `parallel` feature is enabled.
pub fn bpe_encode_batch(texts: &[String], vocab: &BpeVocab) -> Vec<Vec<u32>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        texts.par_iter().map(|t| bpe_encode(t, vocab)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        bpe_encode_batch_seq(texts, vocab)
    }
}

/// Sequential variant of [`bpe_encode_batch`].
pub fn bpe_encode_batch_seq(texts: &[String], vocab: &BpeVocab) -> Vec<Vec<u32>> {
    texts.iter().map(|t| bpe_encode(t, vocab)).collect()
}
