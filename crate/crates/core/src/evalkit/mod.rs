//! Sentence-similarity metrics and score labels for summary evaluation.
//!
//! BLEU uses add-one smoothed n-gram precision with the usual brevity
//! penalty, ROUGE-L is the recall-weighted LCS F-measure, and METEOR aligns
//! unigrams by exact match (further [`MatchStage`]s can be plugged in).
//! [`struc`] averages the three, and [`score_label`] mixes it with the
//! positive/negative indicator:
//!
//! ```text
//! positive: p + (1 - p) * struc
//! negative:     (1 - p) * struc
//! ```

mod bleu;
mod meteor;
mod normalize;
mod probe;
mod rouge;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fcg::FunctionId;
use crate::num::Scalar;

pub use bleu::{bleu_tokens, brevity_penalty, clipped_matches, smoothed_precision};
pub use meteor::{align, meteor_tokens, Alignment, ExactMatch, MatchStage, SynonymTable};
pub use normalize::{Ecdf, StrucNormalizer};
pub use probe::{bleu_bias_probe, BiasGrid, ProbeCell};
pub use rouge::{lcs_len, rouge_l_tokens};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("invalid metric parameter: {0}")]
    InvalidParams(String),
    #[error("no transcript entry has a reference summary")]
    EmptyIntersection,
}

/// Whether a sentence pair shares meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "pos")]
    Positive,
    #[serde(rename = "neg")]
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "T: Scalar")]
pub struct MetricParams<T> {
    pub bleu_max_n: usize,
    pub rouge_beta: T,
    pub meteor_beta: T,
    pub meteor_gamma: T,
    pub meteor_theta: T,
    /// Weight of the semantic indicator in the score label.
    pub p_semantic: T,
    /// Tokens dropped before scoring. Empty by default.
    pub stopwords: BTreeSet<String>,
}

impl<T: Scalar> Default for MetricParams<T> {
    fn default() -> Self {
        MetricParams {
            bleu_max_n: 4,
            rouge_beta: T::lit(1.2),
            meteor_beta: T::lit(3.0),
            meteor_gamma: T::lit(0.5),
            meteor_theta: T::lit(3.0),
            p_semantic: T::lit(0.2),
            stopwords: BTreeSet::new(),
        }
    }
}

impl<T: Scalar> MetricParams<T> {
    pub fn validate(&self) -> Result<(), MetricError> {
        let bad = |what: &str| Err(MetricError::InvalidParams(what.to_owned()));
        if self.bleu_max_n == 0 {
            return bad("bleu_max_n must be at least 1");
        }
        for (name, v) in [
            ("rouge_beta", self.rouge_beta),
            ("meteor_beta", self.meteor_beta),
            ("meteor_gamma", self.meteor_gamma),
            ("meteor_theta", self.meteor_theta),
        ] {
            if !v.is_finite() || v <= T::zero() {
                return bad(&format!("{name} must be a positive finite number"));
            }
        }
        if self.meteor_gamma > T::one() {
            return bad("meteor_gamma must not exceed 1");
        }
        if !(self.p_semantic > T::zero() && self.p_semantic < T::one()) {
            return bad("p_semantic must lie strictly between 0 and 1");
        }
        Ok(())
    }

    /// Uniform n-gram weight `1 / bleu_max_n`.
    pub fn bleu_weight(&self) -> T {
        T::one() / T::from_count(self.bleu_max_n)
    }

    pub fn tokenize(&self, sentence: &str) -> Vec<String> {
        let mut toks = sentence_tokens(sentence);
        if !self.stopwords.is_empty() {
            toks.retain(|t| !self.stopwords.contains(t));
        }
        toks
    }
}

/// Lowercases and splits on whitespace; every other non-word character
/// becomes its own token.
pub fn sentence_tokens(sentence: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in sentence.chars() {
        if c.is_alphanumeric() || c == '_' {
            word.extend(c.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            out.push(c.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

pub fn bleu<T: Scalar>(candidate: &str, reference: &str, params: &MetricParams<T>) -> T {
    bleu_tokens(&params.tokenize(candidate), &params.tokenize(reference), params.bleu_max_n)
}

pub fn rouge_l<T: Scalar>(candidate: &str, reference: &str, params: &MetricParams<T>) -> T {
    rouge_l_tokens(&params.tokenize(candidate), &params.tokenize(reference), params.rouge_beta)
}

pub fn meteor<T: Scalar>(candidate: &str, reference: &str, params: &MetricParams<T>) -> T {
    meteor_with(candidate, reference, params, &[&ExactMatch])
}

/// METEOR with caller-supplied matching stages.
pub fn meteor_with<T: Scalar>(
    candidate: &str,
    reference: &str,
    params: &MetricParams<T>,
    stages: &[&dyn MatchStage],
) -> T {
    meteor_tokens(
        &params.tokenize(candidate),
        &params.tokenize(reference),
        params.meteor_beta,
        params.meteor_gamma,
        params.meteor_theta,
        stages,
    )
}

/// The three structural metrics for one pair, tokenized once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricScores<T> {
    pub bleu: T,
    pub rouge_l: T,
    pub meteor: T,
}

impl<T: Scalar> MetricScores<T> {
    pub fn compute(candidate: &str, reference: &str, params: &MetricParams<T>) -> Self {
        let c = params.tokenize(candidate);
        let r = params.tokenize(reference);
        MetricScores {
            bleu: bleu_tokens(&c, &r, params.bleu_max_n),
            rouge_l: rouge_l_tokens(&c, &r, params.rouge_beta),
            meteor: meteor_tokens(&c, &r, params.meteor_beta, params.meteor_gamma, params.meteor_theta, &[&ExactMatch]),
        }
    }

    pub fn struc(&self) -> T {
        (self.bleu + self.rouge_l + self.meteor) / T::lit(3.0)
    }
}

/// Arithmetic mean of BLEU, ROUGE-L and METEOR.
pub fn struc<T: Scalar>(candidate: &str, reference: &str, params: &MetricParams<T>) -> T {
    MetricScores::compute(candidate, reference, params).struc()
}

/// Score label from a precomputed structural similarity.
pub fn label_from_struc<T: Scalar>(s_f: T, polarity: Polarity, p: T) -> T {
    let structural = (T::one() - p) * s_f;
    match polarity {
        Polarity::Positive => p + structural,
        Polarity::Negative => structural,
    }
}

pub fn score_label<T: Scalar>(generated: &str, reference: &str, polarity: Polarity, params: &MetricParams<T>) -> T {
    label_from_struc(struc(generated, reference, params), polarity, params.p_semantic)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MetricReport<T> {
    pub bleu: T,
    pub rouge_l: T,
    pub meteor: T,
    pub struc: T,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub score_label: Option<T>,
}

impl<T: Scalar> MetricReport<T> {
    pub fn compute(candidate: &str, reference: &str, polarity: Option<Polarity>, params: &MetricParams<T>) -> Self {
        let s = MetricScores::compute(candidate, reference, params);
        let struc = s.struc();
        MetricReport {
            bleu: s.bleu,
            rouge_l: s.rouge_l,
            meteor: s.meteor,
            struc,
            score_label: polarity.map(|pol| label_from_struc(struc, pol, params.p_semantic)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MetricSummary<T> {
    pub bleu: T,
    pub rouge_l: T,
    pub meteor: T,
    pub struc: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FunctionScore<T> {
    pub id: FunctionId,
    #[serde(flatten)]
    pub report: MetricReport<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CorpusReport<T> {
    pub per_function: Vec<FunctionScore<T>>,
    pub mean: MetricSummary<T>,
    /// Population variance.
    pub variance: MetricSummary<T>,
    pub avg_summary_words: T,
    /// Summarized ids with no reference.
    pub unmatched: Vec<FunctionId>,
}

fn mean_and_variance<T: Scalar>(values: &[T]) -> (T, T) {
    let n = T::from_count(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    (mean, var)
}

/// Scores generated summaries against references, in input order.
pub fn evaluate_run<'a, T: Scalar>(
    summaries: impl IntoIterator<Item = (&'a FunctionId, &'a str)>,
    references: &BTreeMap<FunctionId, String>,
    params: &MetricParams<T>,
) -> Result<CorpusReport<T>, MetricError> {
    params.validate()?;
    let mut per_function = Vec::new();
    let mut unmatched = Vec::new();
    let mut words = 0usize;
    for (id, summary) in summaries {
        match references.get(id) {
            Some(reference) => {
                words += summary.split_whitespace().count();
                per_function.push(FunctionScore { id: id.clone(), report: MetricReport::compute(summary, reference, None, params) });
            }
            None => unmatched.push(id.clone()),
        }
    }
    if per_function.is_empty() {
        return Err(MetricError::EmptyIntersection);
    }

    let column = |f: fn(&MetricReport<T>) -> T| -> Vec<T> { per_function.iter().map(|s| f(&s.report)).collect() };
    let (bleu_m, bleu_v) = mean_and_variance(&column(|r| r.bleu));
    let (rouge_m, rouge_v) = mean_and_variance(&column(|r| r.rouge_l));
    let (meteor_m, meteor_v) = mean_and_variance(&column(|r| r.meteor));
    let (struc_m, struc_v) = mean_and_variance(&column(|r| r.struc));
    let avg_summary_words = T::from_count(words) / T::from_count(per_function.len());

    Ok(CorpusReport {
        per_function,
        mean: MetricSummary { bleu: bleu_m, rouge_l: rouge_m, meteor: meteor_m, struc: struc_m },
        variance: MetricSummary { bleu: bleu_v, rouge_l: rouge_v, meteor: meteor_v, struc: struc_v },
        avg_summary_words,
        unmatched,
    })
}
