use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use pseudosum_core::evalkit::{self, bleu_bias_probe, Polarity};
use pseudosum_core::{FunctionId, MetricParams, MetricReport};

#[test]
fn rouge_lcs_by_hand() {
    let p = MetricParams::default();
    assert_abs_diff_eq!(evalkit::rouge_l("a b c", "a x c", &p), 2.0 / 3.0, epsilon = 1e-12);
    assert_eq!(evalkit::rouge_l("a b", "c d", &p), 0.0);
}

#[test]
fn meteor_word_order() {
    let p = MetricParams::default();
    // m = 2, chunks = 2, P = R = 1 so F_mean = 1, penalty = gamma
    assert_abs_diff_eq!(evalkit::meteor("b a", "a b", &p), 0.5, epsilon = 1e-12);
    // identical k words: 1 - gamma / k^theta
    assert_abs_diff_eq!(evalkit::meteor("w x y z", "w x y z", &p), 1.0 - 0.5 / 64.0, epsilon = 1e-12);
}

#[test]
fn bleu_single_token_mismatch() {
    let p = MetricParams::default();
    assert_abs_diff_eq!(evalkit::bleu("a", "b", &p), 0.5f64.powf(0.25), epsilon = 1e-12);
    let grid = bleu_bias_probe::<f64>(30, 4);
    assert_eq!(grid.get(1, 1), Some(0.5f64.powf(0.25)));
}

#[test]
fn disjoint_ten_words_struc_small() {
    let p = MetricParams::default();
    let a = "a b c d e f g h i j";
    let b = "k l m n o p q r s t";
    let s = evalkit::struc(a, b, &p);
    assert!(s > 0.0 && s < 0.2, "{s}");
}

#[test]
fn report_struc_is_exact_mean() {
    let p = MetricParams::default();
    let r = MetricReport::compute("opens the config file", "reads the config file", Some(Polarity::Negative), &p);
    assert_eq!(r.struc, (r.bleu + r.rouge_l + r.meteor) / 3.0);
    assert_abs_diff_eq!(r.score_label.unwrap(), 0.8 * r.struc, epsilon = 1e-15);
}

#[test]
fn corpus_mean_and_variance() {
    let p = MetricParams::default();
    let a = FunctionId::from("a");
    let b = FunctionId::from("b");
    let refs: BTreeMap<FunctionId, String> = [(a.clone(), "x y".to_string()), (b.clone(), "p q".to_string())].into();
    let report = evalkit::evaluate_run([(&a, "x y"), (&b, "z w")], &refs, &p).unwrap();
    assert_eq!(report.mean.rouge_l, 0.5);
    assert_eq!(report.variance.rouge_l, 0.25);
    assert_eq!(report.avg_summary_words, 2.0);
}
