use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use xrisk_core::binoculars::{binoculars_score, detector_score, TokenSequenceScores};
use xrisk_core::corpus::{duplicate_line_fraction, quality_report, MixcasePlanner, QualityConfig};
use xrisk_core::dxo::{
    kl_dro_aggregate, objective_gradient, objective_value, train, DxoConfig, FeatureDataset, FeatureSample, Objective,
    Scorer, TrainMode,
};
use xrisk_core::thresholds::{confusion_at, threshold_at_max_fpr, threshold_at_min_precision};
use xrisk_core::xrisk::{auc, partial_auc, two_way_partial_auc};
use xrisk_core::{evaluate, Error, Label, ScoreSet, XRiskParams};

/// Floor on the denominator of the gradient relative error. Central
/// differences of an objective of size ~10 carry ~1e-10 of rounding noise, so
/// exactly-zero components (e.g. the bias of a pairwise objective) need it.
const REL_ERR_FLOOR: f64 = 1e-5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------- independent oracles ----------

fn pairwise(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &n in neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    100.0 * wins / (pos.len() * neg.len()) as f64
}

fn take_count(fraction: f64, n: usize) -> usize {
    (1..=n).find(|&k| k as f64 >= fraction * n as f64 - 1e-9).unwrap_or(n)
}

fn hardest(mut xs: Vec<(String, f64)>, k: usize, highest: bool) -> Vec<f64> {
    xs.sort_by(|a, b| {
        let by_score = if highest { b.1.partial_cmp(&a.1) } else { a.1.partial_cmp(&b.1) };
        by_score.unwrap().then(a.0.cmp(&b.0))
    });
    xs.into_iter().take(k).map(|x| x.1).collect()
}

fn oracle_pauc(set: &ScoreSet, beta: f64) -> f64 {
    let neg = hardest(set.negatives().to_vec(), take_count(beta, set.n_neg()), true);
    pairwise(&set.positive_scores(), &neg)
}

fn oracle_tpauc(set: &ScoreSet, alpha: f64, beta: f64) -> f64 {
    let neg = hardest(set.negatives().to_vec(), take_count(beta, set.n_neg()), true);
    let pos = hardest(set.positives().to_vec(), take_count(1.0 - alpha, set.n_pos()), false);
    pairwise(&pos, &neg)
}

fn random_set(rng: &mut ChaCha8Rng, ties: bool) -> ScoreSet {
    let draw = |n: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n)
            .map(|_| {
                let x: f64 = rng.gen();
                if ties {
                    (x * 8.0).floor() / 8.0
                } else {
                    x
                }
            })
            .collect()
    };
    let (np, nn) = (rng.gen_range(1..=50), rng.gen_range(1..=50));
    let pos = draw(np, rng);
    let neg = draw(nn, rng);
    ScoreSet::from_scores(&pos, &neg).unwrap()
}

fn paper_params() -> [XRiskParams; 3] {
    [
        XRiskParams::new(0.5, 0.05).unwrap(),
        XRiskParams::new(0.4, 0.3).unwrap(),
        XRiskParams::new(0.8, 0.05).unwrap(),
    ]
}

// ---------- criteria ----------

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let set = random_set(&mut rng, i % 2 == 1);
        worst = worst.max((auc(&set) - pairwise(&set.positive_scores(), &set.negative_scores())).abs());
        for p in paper_params() {
            worst = worst.max((partial_auc(&set, p.beta()).unwrap() - oracle_pauc(&set, p.beta())).abs());
            worst = worst.max((two_way_partial_auc(&set, &p) - oracle_tpauc(&set, p.alpha(), p.beta())).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-9 && secs < 10.0, format!("max |diff| {worst:.1e}, {secs:.2}s for 1000 sets"))
}

fn ordering_invariant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut violations = 0;
    for i in 0..1000 {
        let set = random_set(&mut rng, i % 2 == 1);
        for p in paper_params() {
            let r = evaluate(&set, &p);
            if !(r.tpauc <= r.pauc && r.pauc <= r.auc) {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations over 1000 sets x 3 parameterizations"))
}

fn rank_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let transforms: [fn(f64) -> f64; 3] = [|x| 2.0 * x + 1.0, |x| x * x * x, f64::exp];
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let set = random_set(&mut rng, i % 2 == 1);
        let p = XRiskParams::standard();
        let base = evaluate(&set, &p);
        for f in transforms {
            let r = evaluate(&set.map_scores(f).unwrap(), &p);
            for (a, b) in [(r.tpauc, base.tpauc), (r.pauc, base.pauc), (r.auc, base.auc), (r.ap, base.ap)] {
                worst = worst.max((a - b).abs());
            }
        }
    }
    outcome(worst <= 1e-9, format!("max |diff| {worst:.1e} over 100 sets x 3 transforms"))
}

fn reduction_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let full = XRiskParams::new(0.0, 1.0).unwrap();
    let mut mismatches = 0;
    for i in 0..100 {
        let set = random_set(&mut rng, i % 2 == 1);
        let a = auc(&set);
        if partial_auc(&set, 1.0).unwrap() != a || two_way_partial_auc(&set, &full) != a {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} inexact reductions over 100 sets"))
}

fn random_features(rng: &mut ChaCha8Rng, dim: usize) -> FeatureDataset {
    let (np, nn) = (rng.gen_range(2..=6), rng.gen_range(3..=10));
    let mut samples = Vec::new();
    for i in 0..np + nn {
        let f: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let label = if i < np { Label::Positive } else { Label::Negative };
        samples.push(FeatureSample::new(format!("s{i}"), f, label));
    }
    FeatureDataset::new(samples).unwrap()
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for instance in 0..120 {
        let dim = 3;
        let data = random_features(&mut rng, dim);
        let scorer = if instance < 100 {
            let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            Scorer::linear(w, rng.gen_range(-0.5..0.5)).unwrap()
        } else {
            Scorer::mlp1(dim, 4, rng.gen())
        };
        for objective in [Objective::PaucKl, Objective::TpaucKl] {
            let cfg = DxoConfig {
                objective,
                lambda: rng.gen_range(0.3..3.0),
                lambda_prime: rng.gen_range(0.3..3.0),
                ..Default::default()
            };
            let grad = objective_gradient(&scorer, &data, &cfg).unwrap();
            for (k, &g) in grad.iter().enumerate() {
                let (mut up, mut dn) = (scorer.clone(), scorer.clone());
                up.params_mut()[k] += 1e-5;
                dn.params_mut()[k] -= 1e-5;
                let fd = (objective_value(&up, &data, &cfg).unwrap() - objective_value(&dn, &data, &cfg).unwrap()) / 2e-5;
                let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(REL_ERR_FLOOR);
                worst = worst.max(rel);
                checked += 1;
            }
        }
    }
    outcome(
        worst <= 1e-4,
        format!("max relative error {worst:.2e} over {checked} components (100 linear + 20 mlp1, both objectives)"),
    )
}

fn dro_limits() -> Outcome {
    let hi = kl_dro_aggregate(&[1.0, 2.0], 1e6);
    let lo = kl_dro_aggregate(&[1.0, 2.0], 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut out_of_bounds = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=30);
        let losses: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let lambda = 10f64.powf(rng.gen_range(-6.0..6.0));
        let v = kl_dro_aggregate(&losses, lambda);
        let mean = losses.iter().sum::<f64>() / n as f64;
        let max = losses.iter().copied().fold(f64::MIN, f64::max);
        if !(v >= mean && v <= max) {
            out_of_bounds += 1;
        }
    }
    outcome(
        (hi - 1.5).abs() <= 1e-3 && (lo - 2.0).abs() <= 1e-3 && out_of_bounds == 0,
        format!("λ=1e6 → {hi:.6}, λ=1e-6 → {lo:.6}, {out_of_bounds}/1000 outside [mean, max]"),
    )
}

fn gaussian_task(seed: u64, n_pos: usize, n_neg: usize) -> FeatureDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.25).unwrap();
    let mut samples = Vec::with_capacity(n_pos + n_neg);
    for i in 0..n_pos {
        let f = vec![1.0 + noise.sample(&mut rng), 1.0 + noise.sample(&mut rng)];
        samples.push(FeatureSample::new(format!("p{i}"), f, Label::Positive));
    }
    for i in 0..n_neg {
        let f = vec![noise.sample(&mut rng), noise.sample(&mut rng)];
        samples.push(FeatureSample::new(format!("n{i}"), f, Label::Negative));
    }
    FeatureDataset::new(samples).unwrap()
}

fn training_convergence() -> Outcome {
    let start = Instant::now();
    let train_set = gaussian_task(70, 100, 1000);
    let held_out = gaussian_task(71, 100, 1000);
    let cfg = DxoConfig {
        objective: Objective::TpaucKl,
        learning_rate: 0.5,
        epochs: 500,
        seed: 7,
        ..Default::default()
    };
    let run = || train(&train_set, &cfg, TrainMode::FullBatch, Scorer::zero_linear(2), None).unwrap();
    let (a, b) = (run(), run());
    let secs = start.elapsed().as_secs_f64();
    let identical = serde_json::to_string(&a).unwrap() == serde_json::to_string(&b).unwrap();
    let tpauc = evaluate(&held_out.score_set(&a.scorer).unwrap(), &XRiskParams::standard()).tpauc;
    outcome(
        tpauc >= 90.0 && secs < 60.0 && identical,
        format!("held-out tpAUC(50%,5%) {tpauc:.2}, {secs:.2}s for two runs, bit-identical: {identical}"),
    )
}

fn binoculars_identities() -> Outcome {
    let uniform = vec![0.25; 4];
    let one_hot = |k: usize| (0..4).map(|i| if i == k { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
    let uu = TokenSequenceScores::new(4, vec![1, 3], vec![uniform.clone(); 2], vec![uniform.clone(); 2]).unwrap();
    let hu = TokenSequenceScores::new(4, vec![2, 0], vec![one_hot(2), one_hot(0)], vec![uniform.clone(); 2]).unwrap();
    let mixed = TokenSequenceScores::new(2, vec![0], vec![vec![0.5, 0.5]], vec![vec![0.25, 0.75]]).unwrap();
    let (b_uu, b_hu, b_mixed) =
        (binoculars_score(&uu).unwrap(), binoculars_score(&hu).unwrap(), binoculars_score(&mixed).unwrap());

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dist = |rng: &mut ChaCha8Rng, v: usize| {
        let w: Vec<f64> = (0..v).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect::<Vec<f64>>()
    };
    let mut pairs = Vec::new();
    for _ in 0..100 {
        let (v, len) = (rng.gen_range(2..8), rng.gen_range(1..12));
        let tokens = (0..len).map(|_| rng.gen_range(0..v)).collect();
        let obs = (0..len).map(|_| dist(&mut rng, v)).collect();
        let perf = (0..len).map(|_| dist(&mut rng, v)).collect();
        let seq = TokenSequenceScores::new(v, tokens, obs, perf).unwrap();
        pairs.push((binoculars_score(&seq).unwrap(), detector_score(&seq).unwrap()));
    }
    let mut reversed = true;
    for (i, a) in pairs.iter().enumerate() {
        for b in &pairs[i + 1..] {
            if a.0 < b.0 && a.1 <= b.1 || a.0 > b.0 && a.1 >= b.1 {
                reversed = false;
            }
        }
    }
    outcome(
        b_uu == 1.0 && b_hu == 0.0 && (b_mixed - 0.8281).abs() <= 1e-4 && reversed,
        format!("uniform {b_uu}, one-hot {b_hu}, mixed {b_mixed:.6}, ordering reversed on 100 sequences: {reversed}"),
    )
}

fn count(set: &ScoreSet, t: f64) -> (usize, usize) {
    (
        set.positive_scores().iter().filter(|&&s| s >= t).count(),
        set.negative_scores().iter().filter(|&&s| s >= t).count(),
    )
}

fn threshold_contracts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut disagreements = 0;
    let mut fpr_violations = 0;
    for i in 0..500 {
        let set = random_set(&mut rng, i % 2 == 1);
        let mut cands: Vec<f64> = set.positive_scores().into_iter().chain(set.negative_scores()).collect();
        cands.sort_by(|a, b| b.partial_cmp(a).unwrap());
        cands.dedup();
        let nn = set.n_neg();

        let beta = rng.gen_range(0.01..0.99);
        let mut best = (f64::INFINITY, 0, 0);
        for &t in &cands {
            let (tp, fp) = count(&set, t);
            if fp as f64 <= beta * nn as f64 && (tp, fp) > (best.1, best.2) {
                best = (t, tp, fp);
            }
        }
        let chosen = threshold_at_max_fpr(&set, beta).unwrap();
        if chosen.threshold != best.0 {
            disagreements += 1;
        }
        if count(&set, chosen.threshold).1 as f64 / nn as f64 > beta {
            fpr_violations += 1;
        }

        let target = rng.gen_range(0.05..=1.0);
        let mut best: Option<(f64, usize)> = None;
        for &t in &cands {
            let (tp, fp) = count(&set, t);
            if tp as f64 >= target * (tp + fp) as f64 && best.is_none_or(|b| tp > b.1) {
                best = Some((t, tp));
            }
        }
        match (threshold_at_min_precision(&set, target), best) {
            (Ok(c), Some((t, _))) if c.threshold == t => {}
            (Err(Error::UnattainablePrecision { .. }), None) => {}
            _ => disagreements += 1,
        }
    }
    let f1_set = ScoreSet::from_scores(&[[0.9; 9].as_slice(), &[0.1]].concat(), &[[0.9].as_slice(), &[0.1; 9]].concat())
        .unwrap();
    let m = confusion_at(&f1_set, 0.5);
    let f1_ok = (m.tp, m.fn_, m.fp, m.tn) == (9, 1, 1, 9) && m.macro_f1 == 90.0;
    outcome(
        disagreements == 0 && fpr_violations == 0 && f1_ok,
        format!(
            "{disagreements} scan disagreements, {fpr_violations} FPR > β over 500 sets, macro-F1 {}",
            m.macro_f1
        ),
    )
}

fn corpus_suite() -> Outcome {
    let dup = duplicate_line_fraction("a\na\na\na");
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/clean_200.txt");
    let clean = std::fs::read_to_string(fixture).unwrap();
    let words = clean.split_whitespace().count();
    let report = quality_report(&clean, &QualityConfig::default());

    let planner = MixcasePlanner::new(&[10, 20, 30, 40, 50]).unwrap();
    let mut support = BTreeSet::new();
    let mut broken = 0;
    for plan in planner.plans(10).take(10_000) {
        if plan.h != plan.t / 3 || plan.h + plan.n != plan.t || !(20..=40).contains(&plan.t) {
            broken += 1;
        }
        support.insert(plan.t);
    }
    let support_ok = support == BTreeSet::from([20, 30, 40]);
    outcome(
        dup == 0.75 && words == 200 && report.pass && broken == 0 && support_ok,
        format!(
            "dup lines {dup}, {words}-word fixture passes: {}, {broken} broken plans, support {support:?}",
            report.pass
        ),
    )
}

fn cli_determinism() -> Outcome {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let golden = std::fs::read(fixtures.join("evaluate_golden.jsonl")).unwrap();
    let input = fixtures.join("scores.jsonl");
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            let out = Command::new(env!("CARGO_BIN_EXE_xrisk"))
                .args(["evaluate", "--group-by", "domain", "--input"])
                .arg(&input)
                .output()
                .unwrap();
            assert!(out.status.success());
            out.stdout
        })
        .collect();
    let ok = runs.iter().all(|r| *r == golden);
    outcome(ok, format!("two runs byte-identical to the {}-byte golden file: {ok}", golden.len()))
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("metric oracle", metric_oracle),
        ("ordering tpAUC <= pAUC <= AUC", ordering_invariant),
        ("rank invariance", rank_invariance),
        ("reduction identities", reduction_identities),
        ("gradient check", gradient_check),
        ("DRO limits and bounds", dro_limits),
        ("training convergence", training_convergence),
        ("binoculars identities", binoculars_identities),
        ("threshold contracts", threshold_contracts),
        ("corpus suite", corpus_suite),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("{} {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
