use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evalkit::{self, MetricParams, Polarity};
use crate::num::Scalar;

use super::FunctionRecord;

/// Generated/reference sentence pair with its score label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EvasPair<T> {
    #[serde(rename = "s_g")]
    pub generated: String,
    #[serde(rename = "s_r")]
    pub reference: String,
    pub score: T,
    pub polarity: Polarity,
}

/// Positive:negative ratio, e.g. `1:1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub positive: u32,
    pub negative: u32,
}

impl Default for Ratio {
    fn default() -> Self {
        Ratio { positive: 1, negative: 1 }
    }
}

impl FromStr for Ratio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, n) = s.split_once(':').ok_or_else(|| format!("ratio `{s}` must look like P:N"))?;
        let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("bad ratio `{s}`: {e}"));
        let r = Ratio { positive: parse(p)?, negative: parse(n)? };
        if r.positive == 0 {
            return Err(format!("ratio `{s}` needs a positive share"));
        }
        Ok(r)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.positive, self.negative)
    }
}

impl Ratio {
    /// Splits `total` pairs by the ratio, rounding the positive share up.
    pub fn split(&self, total: usize) -> (usize, usize) {
        let (p, n) = (self.positive as usize, self.negative as usize);
        let pos = (total * p).div_ceil(p + n);
        (pos, total - pos)
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvasConfig {
    pub ratio: Ratio,
    /// Total pairs; defaults to one positive per summary plus the matching
    /// number of negatives.
    pub total: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvasError {
    #[error("need at least 2 records with summaries, found {0}")]
    TooFewSummaries(usize),
}

/// Meaning-preserving rewrites used to make positive pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    DropArticle,
    TogglePrefix,
    RotateClauses,
}

const PREFIXES: [&str; 2] = ["This function ", "The code "];

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

// Leaves acronyms like "API" alone.
fn decapitalize(s: &str) -> String {
    let mut c = s.chars();
    match (c.next(), c.next()) {
        (Some(_), Some(g)) if g.is_uppercase() => s.to_owned(),
        (Some(f), _) => f.to_lowercase().chain(s[f.len_utf8()..].chars()).collect(),
        _ => String::new(),
    }
}

impl Perturbation {
    pub const ALL: [Perturbation; 3] = [Perturbation::DropArticle, Perturbation::TogglePrefix, Perturbation::RotateClauses];

    /// Applies the rewrite; `None` when it does not apply to `sentence`.
    pub fn apply(self, sentence: &str, rng: &mut impl Rng) -> Option<String> {
        match self {
            Perturbation::DropArticle => {
                let words: Vec<&str> = sentence.split(' ').collect();
                let articles: Vec<usize> = (0..words.len())
                    .filter(|&i| matches!(words[i].to_ascii_lowercase().as_str(), "a" | "an" | "the"))
                    .filter(|&i| i + 1 < words.len())
                    .collect();
                let &drop = articles.get(rng.random_range(0..articles.len().max(1)))?;
                let mut out: Vec<String> = words.iter().map(|w| w.to_string()).collect();
                out.remove(drop);
                if drop == 0 {
                    out[0] = capitalize(&out[0]);
                }
                Some(out.join(" "))
            }
            Perturbation::TogglePrefix => {
                for p in PREFIXES {
                    if sentence.len() > p.len() && sentence[..p.len()].eq_ignore_ascii_case(p) {
                        return Some(capitalize(&sentence[p.len()..]));
                    }
                }
                if sentence.is_empty() {
                    return None;
                }
                let p = PREFIXES[rng.random_range(0..PREFIXES.len())];
                Some(format!("{p}{}", decapitalize(sentence)))
            }
            Perturbation::RotateClauses => {
                let (body, stop) = match sentence.strip_suffix('.') {
                    Some(b) => (b, "."),
                    None => (sentence, ""),
                };
                let mut clauses: Vec<String> = body.split(", ").map(str::to_owned).collect();
                if clauses.len() < 2 || clauses.iter().any(|c| c.is_empty()) {
                    return None;
                }
                clauses[0] = decapitalize(&clauses[0]);
                clauses.rotate_left(1);
                clauses[0] = capitalize(&clauses[0]);
                Some(format!("{}{stop}", clauses.join(", ")))
            }
        }
    }
}

/// Applies the first applicable rewrite in a seeded order. Returns the
/// sentence unchanged when none applies.
pub fn perturb(sentence: &str, rng: &mut impl Rng) -> String {
    let mut order = Perturbation::ALL;
    order.shuffle(rng);
    order
        .iter()
        .find_map(|p| p.apply(sentence, rng).filter(|s| s != sentence))
        .unwrap_or_else(|| sentence.to_owned())
}

/// Builds labeled sentence pairs from record summaries.
///
/// Positives pair a perturbed summary with its original; negatives pair the
/// summaries of two different records. Positives come first in the output.
pub fn build_evas_pairs<T: Scalar>(
    records: &[FunctionRecord],
    config: &EvasConfig,
    params: &MetricParams<T>,
) -> Result<Vec<EvasPair<T>>, EvasError> {
    let summaries: Vec<&str> = records.iter().filter_map(|r| r.summary.as_deref()).collect();
    let n = summaries.len();
    if n < 2 {
        return Err(EvasError::TooFewSummaries(n));
    }
    let ratio = config.ratio;
    let total = config
        .total
        .unwrap_or_else(|| n * (ratio.positive + ratio.negative) as usize / ratio.positive as usize);
    let (n_pos, n_neg) = ratio.split(total);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let label = |g: &str, r: &str, pol| evalkit::score_label(g, r, pol, params);
    let mut out = Vec::with_capacity(total);
    for k in 0..n_pos {
        let original = summaries[order[k % n]];
        let generated = perturb(original, &mut rng);
        let score = label(&generated, original, Polarity::Positive);
        out.push(EvasPair { generated, reference: original.to_owned(), score, polarity: Polarity::Positive });
    }
    for _ in 0..n_neg {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let (g, r) = (summaries[i], summaries[j]);
        out.push(EvasPair {
            generated: g.to_owned(),
            reference: r.to_owned(),
            score: label(g, r, Polarity::Negative),
            polarity: Polarity::Negative,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    fn records(n: usize) -> Vec<FunctionRecord> {
        (0..n)
            .map(|i| {
                FunctionRecord::new(format!("f{i}"), format!("f{i}"), "x")
                    .with_summary(format!("The code opens file number {i}, then writes a log entry."))
            })
            .collect()
    }

    #[test]
    fn ratio_parse_and_split() {
        let r: Ratio = "1:1".parse().unwrap();
        assert_eq!(r.split(200), (100, 100));
        assert_eq!(r.split(7), (4, 3));
        let r: Ratio = "2:1".parse().unwrap();
        assert_eq!(r.split(4), (3, 1));
        assert!("0:1".parse::<Ratio>().is_err());
        assert!("11".parse::<Ratio>().is_err());
        assert_eq!(r.to_string(), "2:1");
    }

    #[test]
    fn perturbations() {
        let s = "The code opens a socket, then sends data.";
        assert_eq!(Perturbation::TogglePrefix.apply(s, &mut rng()).unwrap(), "Opens a socket, then sends data.");
        let added = Perturbation::TogglePrefix.apply("Opens a socket.", &mut rng()).unwrap();
        assert!(added == "This function opens a socket." || added == "The code opens a socket.");
        assert_eq!(
            Perturbation::RotateClauses.apply(s, &mut rng()).unwrap(),
            "Then sends data, the code opens a socket."
        );
        assert_eq!(Perturbation::RotateClauses.apply("No clauses here.", &mut rng()), None);
        let dropped = Perturbation::DropArticle.apply("Opens a socket.", &mut rng()).unwrap();
        assert_eq!(dropped, "Opens socket.");
        assert_eq!(Perturbation::DropArticle.apply("The API", &mut rng()).unwrap(), "API");
        assert_eq!(Perturbation::DropArticle.apply("Sends data.", &mut rng()), None);
    }

    #[test]
    fn perturb_falls_back_to_identity() {
        assert_eq!(perturb("", &mut rng()), "");
    }

    #[test]
    fn one_to_one_over_100() {
        let params = MetricParams::<f64>::default();
        let pairs = build_evas_pairs(&records(100), &EvasConfig { seed: 9, ..Default::default() }, &params).unwrap();
        let pos = pairs.iter().filter(|p| p.polarity == Polarity::Positive).count();
        assert_eq!(pos, 100);
        assert_eq!(pairs.len() - pos, 100);
        for p in &pairs {
            match p.polarity {
                Polarity::Positive => assert!(p.score >= 0.2 && p.score <= 1.0),
                Polarity::Negative => {
                    assert!(p.score >= 0.0 && p.score <= 0.8);
                    assert_ne!(p.generated, p.reference);
                }
            }
        }
    }

    #[test]
    fn positive_scores_follow_label() {
        let recs = vec![
            FunctionRecord::new("a", "a", "x").with_summary("x"),
            FunctionRecord::new("b", "b", "x").with_summary("y"),
        ];
        let params = MetricParams::<f64>::default();
        let cfg = EvasConfig { total: Some(2), ..Default::default() };
        let pairs = build_evas_pairs(&recs, &cfg, &params).unwrap();
        // a one-word summary can only gain a prefix
        assert!(pairs[0].generated.ends_with(&pairs[0].reference));
        assert_ne!(pairs[0].generated, pairs[0].reference);
        let expected = evalkit::score_label(&pairs[0].generated, &pairs[0].reference, Polarity::Positive, &params);
        assert_eq!(pairs[0].score, expected);
        // identical sentences have s_f = 1 structurally only in the limit; the label itself maps 1 to 1
        assert_eq!(evalkit::label_from_struc(1.0, Polarity::Positive, 0.2), 1.0);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let params = MetricParams::<f64>::default();
        let recs = records(20);
        let a = build_evas_pairs(&recs, &EvasConfig { seed: 5, ..Default::default() }, &params).unwrap();
        let b = build_evas_pairs(&recs, &EvasConfig { seed: 5, ..Default::default() }, &params).unwrap();
        let c = build_evas_pairs(&recs, &EvasConfig { seed: 6, ..Default::default() }, &params).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn too_few_summaries() {
        let params = MetricParams::<f64>::default();
        let err = build_evas_pairs(&records(1), &EvasConfig::default(), &params).unwrap_err();
        assert_eq!(err, EvasError::TooFewSummaries(1));
    }

    #[test]
    fn json_line_shape() {
        let p = EvasPair { generated: "a".into(), reference: "b".into(), score: 0.5f64, polarity: Polarity::Negative };
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"s_g":"a","s_r":"b","score":0.5,"polarity":"neg"}"#);
    }
}
