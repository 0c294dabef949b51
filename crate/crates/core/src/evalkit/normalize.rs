use crate::num::Scalar;

use super::{MetricParams, MetricScores};

/// Empirical cumulative distribution of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf<T> {
    sorted: Vec<T>,
}

impl<T: Scalar> Ecdf<T> {
    /// NaN samples are dropped.
    pub fn fit(sample: impl IntoIterator<Item = T>) -> Self {
        let mut sorted: Vec<T> = sample.into_iter().filter(|v| !v.is_nan()).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN filtered"));
        Ecdf { sorted }
    }

    /// Fraction of the sample `<= x`; zero for an empty sample.
    pub fn cdf(&self, x: T) -> T {
        if self.sorted.is_empty() {
            return T::zero();
        }
        let below = self.sorted.partition_point(|v| *v <= x);
        T::from_count(below) / T::from_count(self.sorted.len())
    }
}

/// Probability-integral-transform of each structural metric against a
/// reference sample, then the plain mean.
#[derive(Debug, Clone, PartialEq)]
pub struct StrucNormalizer<T> {
    bleu: Ecdf<T>,
    rouge_l: Ecdf<T>,
    meteor: Ecdf<T>,
}

impl<T: Scalar> StrucNormalizer<T> {
    pub fn fit<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>, params: &MetricParams<T>) -> Self {
        let scores: Vec<MetricScores<T>> = pairs.into_iter().map(|(c, r)| MetricScores::compute(c, r, params)).collect();
        StrucNormalizer {
            bleu: Ecdf::fit(scores.iter().map(|s| s.bleu)),
            rouge_l: Ecdf::fit(scores.iter().map(|s| s.rouge_l)),
            meteor: Ecdf::fit(scores.iter().map(|s| s.meteor)),
        }
    }

    pub fn struc(&self, candidate: &str, reference: &str, params: &MetricParams<T>) -> T {
        let s = MetricScores::compute(candidate, reference, params);
        (self.bleu.cdf(s.bleu) + self.rouge_l.cdf(s.rouge_l) + self.meteor.cdf(s.meteor)) / T::lit(3.0)
    }
}
