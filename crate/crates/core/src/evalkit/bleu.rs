use std::collections::HashMap;

use crate::num::Scalar;

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and the candidate n-gram total for one order.
pub fn clipped_matches<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let matched = cand.iter().map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0))).sum();
    let total = candidate.len().saturating_sub(n - 1);
    (matched, total)
}

/// Add-one smoothed n-gram precision: `(matches + 1) / (candidate n-grams + 1)`.
pub fn smoothed_precision<T: Scalar, S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> T {
    let (m, total) = clipped_matches(candidate, reference, n);
    T::from_count(m + 1) / T::from_count(total + 1)
}

pub fn brevity_penalty<T: Scalar>(cand_len: usize, ref_len: usize) -> T {
    if cand_len == 0 {
        T::zero()
    } else if cand_len >= ref_len {
        T::one()
    } else {
        (T::one() - T::from_count(ref_len) / T::from_count(cand_len)).exp()
    }
}

/// Sentence BLEU over pre-tokenized input with uniform weights `1/max_n`.
pub fn bleu_tokens<T: Scalar, S: AsRef<str>>(candidate: &[S], reference: &[S], max_n: usize) -> T {
    if candidate.is_empty() || max_n == 0 {
        return T::zero();
    }
    let w = T::one() / T::from_count(max_n);
    let log_sum: T = (1..=max_n).map(|n| w * smoothed_precision::<T, S>(candidate, reference, n).ln()).sum();
    brevity_penalty::<T>(candidate.len(), reference.len()) * log_sum.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn clipping() {
        // "the the the" vs "the cat": unigram matches clip at 1
        assert_eq!(clipped_matches(&toks("the the the"), &toks("the cat"), 1), (1, 3));
        assert_eq!(clipped_matches(&toks("a b"), &toks("a b"), 3), (0, 0));
    }

    #[test]
    fn single_word_zero_overlap() {
        let b: f64 = bleu_tokens(&toks("x"), &toks("y"), 4);
        assert!((b - 0.5f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn brevity() {
        assert_eq!(brevity_penalty::<f64>(0, 3), 0.0);
        assert_eq!(brevity_penalty::<f64>(3, 3), 1.0);
        assert!((brevity_penalty::<f64>(2, 4) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn generic_over_f32() {
        let b: f32 = bleu_tokens(&toks("a b c"), &toks("a b c"), 4);
        assert!((b - 1.0).abs() < 1e-6);
    }
}
