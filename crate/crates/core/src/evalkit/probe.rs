use std::fmt::Write as _;

use crate::num::Scalar;

use super::bleu::bleu_tokens;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeCell<T> {
    pub cand_len: usize,
    pub ref_len: usize,
    pub bleu: T,
}

/// BLEU over zero-overlap sentence pairs for every length pair in `[1, max_len]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasGrid<T> {
    max_len: usize,
    // row-major by candidate length
    cells: Vec<ProbeCell<T>>,
}

impl<T: Scalar> BiasGrid<T> {
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn cells(&self) -> &[ProbeCell<T>] {
        &self.cells
    }

    /// Score at (candidate length, reference length), both 1-based.
    pub fn get(&self, cand_len: usize, ref_len: usize) -> Option<T> {
        if cand_len == 0 || ref_len == 0 || cand_len > self.max_len || ref_len > self.max_len {
            return None;
        }
        Some(self.cells[(cand_len - 1) * self.max_len + (ref_len - 1)].bleu)
    }

    /// Matrix CSV: header row of reference lengths, one row per candidate length.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cand_len\\ref_len");
        for r in 1..=self.max_len {
            write!(out, ",{r}").unwrap();
        }
        out.push('\n');
        for row in self.cells.chunks(self.max_len) {
            write!(out, "{}", row[0].cand_len).unwrap();
            for cell in row {
                write!(out, ",{:.12}", cell.bleu.to_f64_lossy()).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Builds the zero-overlap grid with `max_n`-gram BLEU. Candidate words are
/// `c1 c2 ...`, reference words `r1 r2 ...`, so no unigram is shared.
pub fn bleu_bias_probe<T: Scalar>(max_len: usize, max_n: usize) -> BiasGrid<T> {
    let cand_vocab: Vec<String> = (1..=max_len).map(|i| format!("c{i}")).collect();
    let ref_vocab: Vec<String> = (1..=max_len).map(|i| format!("r{i}")).collect();
    let mut cells = Vec::with_capacity(max_len * max_len);
    for c in 1..=max_len {
        for r in 1..=max_len {
            let bleu = bleu_tokens(&cand_vocab[..c], &ref_vocab[..r], max_n);
            cells.push(ProbeCell { cand_len: c, ref_len: r, bleu });
        }
    }
    BiasGrid { max_len, cells }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shape() {
        let g = bleu_bias_probe::<f64>(3, 4);
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "cand_len\\ref_len,1,2,3");
        assert!(lines[1].starts_with("1,0.840896415"));
        assert!(lines.iter().all(|l| l.split(',').count() == 4));
    }

    #[test]
    fn lookup_bounds() {
        let g = bleu_bias_probe::<f64>(2, 4);
        assert!(g.get(0, 1).is_none());
        assert!(g.get(3, 1).is_none());
        assert_eq!(g.get(2, 1), Some(g.cells()[2].bleu));
    }
}
