use std::collections::BTreeMap;

use crate::num::Scalar;

/// One matching stage of the unigram aligner.
///
/// Two words match in a stage when they map to the same key. Later stages
/// only see words left unaligned by earlier ones.
pub trait MatchStage {
    fn key(&self, word: &str) -> Option<String>;
}

/// Exact surface-form matching.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMatch;

impl MatchStage for ExactMatch {
    fn key(&self, word: &str) -> Option<String> {
        Some(word.to_owned())
    }
}

/// Synonym groups loaded from a table; words in the same group match.
#[derive(Debug, Clone, Default)]
pub struct SynonymTable {
    group_of: BTreeMap<String, usize>,
}

impl SynonymTable {
    /// Each line is one group of whitespace-separated synonyms.
    pub fn parse(text: &str) -> Self {
        let mut group_of = BTreeMap::new();
        for (g, line) in text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).enumerate() {
            for w in line.split_whitespace() {
                group_of.entry(w.to_lowercase()).or_insert(g);
            }
        }
        SynonymTable { group_of }
    }
}

impl MatchStage for SynonymTable {
    fn key(&self, word: &str) -> Option<String> {
        self.group_of.get(word).map(|g| format!("#syn{g}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    /// (candidate index, reference index), ascending by candidate index.
    pub pairs: Vec<(usize, usize)>,
}

impl Alignment {
    pub fn matches(&self) -> usize {
        self.pairs.len()
    }

    /// Runs of pairs contiguous on both sides.
    pub fn chunks(&self) -> usize {
        if self.pairs.is_empty() {
            return 0;
        }
        1 + self.pairs.windows(2).filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1)).count()
    }
}

/// Aligns unigrams stage by stage.
///
/// Within a stage the longest run of matching, still-unaligned tokens is
/// fixed first (earliest candidate position, then earliest reference
/// position on ties) until no matching pair is left. This reaches the
/// maximum number of matches per stage and keeps long contiguous runs
/// together, which is how chunks are kept low.
pub fn align<S: AsRef<str>>(candidate: &[S], reference: &[S], stages: &[&dyn MatchStage]) -> Alignment {
    let (n, m) = (candidate.len(), reference.len());
    let mut cand_used = vec![false; n];
    let mut ref_used = vec![false; m];
    let mut pairs = Vec::new();
    let mut dp = vec![0usize; (n + 1) * (m + 1)];

    for stage in stages {
        let ck: Vec<Option<String>> = candidate.iter().map(|w| stage.key(w.as_ref())).collect();
        let rk: Vec<Option<String>> = reference.iter().map(|w| stage.key(w.as_ref())).collect();
        loop {
            // longest common run over unaligned positions; dp[i][j] ends at (i-1, j-1)
            let mut best = (0usize, 0usize, 0usize);
            for i in 1..=n {
                for j in 1..=m {
                    let hit = !cand_used[i - 1]
                        && !ref_used[j - 1]
                        && ck[i - 1].is_some()
                        && ck[i - 1] == rk[j - 1];
                    let v = if hit { dp[(i - 1) * (m + 1) + (j - 1)] + 1 } else { 0 };
                    dp[i * (m + 1) + j] = v;
                    if v > 0 {
                        let (si, sj) = (i - v, j - v);
                        let better = v > best.0 || (v == best.0 && (si, sj) < (best.1, best.2));
                        if better {
                            best = (v, si, sj);
                        }
                    }
                }
            }
            let (len, si, sj) = best;
            if len == 0 {
                break;
            }
            for k in 0..len {
                cand_used[si + k] = true;
                ref_used[sj + k] = true;
                pairs.push((si + k, sj + k));
            }
        }
    }
    pairs.sort_unstable();
    Alignment { pairs }
}

/// METEOR with the harmonic mean weighted by `beta` (denominator `R + beta^2 P`)
/// and fragmentation penalty `gamma * (chunks / matches)^theta`.
pub fn meteor_tokens<T: Scalar, S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    beta: T,
    gamma: T,
    theta: T,
    stages: &[&dyn MatchStage],
) -> T {
    if candidate.is_empty() || reference.is_empty() {
        return T::zero();
    }
    let alignment = align(candidate, reference, stages);
    let m = alignment.matches();
    if m == 0 {
        return T::zero();
    }
    let mf = T::from_count(m);
    let precision = mf / T::from_count(candidate.len());
    let recall = mf / T::from_count(reference.len());
    let b2 = beta * beta;
    let f_mean = (T::one() + b2) * precision * recall / (recall + b2 * precision);
    let penalty = gamma * (T::from_count(alignment.chunks()) / mf).powf(theta);
    f_mean * (T::one() - penalty)
}
