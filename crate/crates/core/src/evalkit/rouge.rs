use crate::num::Scalar;

/// Length of the longest common subsequence, two-row dynamic programme.
pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F-measure; `beta` weights recall.
pub fn rouge_l_tokens<T: Scalar, S: AsRef<str>>(candidate: &[S], reference: &[S], beta: T) -> T {
    if candidate.is_empty() || reference.is_empty() {
        return T::zero();
    }
    let lcs = lcs_len(candidate, reference);
    if lcs == 0 {
        return T::zero();
    }
    let recall = T::from_count(lcs) / T::from_count(reference.len());
    let precision = T::from_count(lcs) / T::from_count(candidate.len());
    let b2 = beta * beta;
    (T::one() + b2) * recall * precision / (recall + b2 * precision)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcs_basic() {
        assert_eq!(lcs_len(&["a", "b", "c"], &["a", "x", "c"]), 2);
        assert_eq!(lcs_len(&["a", "b", "c", "b", "d", "a", "b"], &["b", "d", "c", "a", "b", "a"]), 4);
        assert_eq!(lcs_len::<&str>(&[], &["a"]), 0);
    }

    #[test]
    fn equal_p_and_r_ignores_beta() {
        for beta in [0.5, 1.0, 1.2, 3.0] {
            let f: f64 = rouge_l_tokens(&["a", "b", "c"], &["a", "x", "c"], beta);
            assert!((f - 2.0 / 3.0).abs() < 1e-12);
        }
    }
}
