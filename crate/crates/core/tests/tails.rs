use num::{BigRational, Signed, ToPrimitive};
use proptest::prelude::*;

use thrifty_shadows::ensemble::EnsembleSpec;
use thrifty_shadows::shadow::{thrifty_values, Observable, PreparedState, RunConfig};
use thrifty_shadows::tableau::StabilizerTableau;
use thrifty_shadows::tails::{
    bernstein_tail, clifford_moment, limiting_moment, mgf_bound_haar, optimal_reuse, tail_experiment, CostModel,
    TailOptions,
};

#[test]
fn haar_mgf_bound_dominates_monte_carlo() {
    let n = 4;
    let s = StabilizerTableau::zero_state(n).unwrap();
    let state = PreparedState::Stabilizer(s.clone());
    let obs = Observable::StabilizerProjector(s);
    let cfg = RunConfig { total: 100_000, reuse: 1, batches: 1, seed: 41 };
    let values = thrifty_values(&EnsembleSpec::haar(n), &state, &obs, &cfg).unwrap();
    let o_hs = (1.0f64 - 1.0 / 16.0).sqrt();
    for t in [0.3, -0.3, 0.1] {
        let e: Vec<f64> = values.iter().map(|x| (t * x).exp()).collect();
        let m = e.iter().sum::<f64>() / e.len() as f64;
        let var = e.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (e.len() as f64 - 1.0);
        let bound = mgf_bound_haar(t, 1.0 - 1.0 / 16.0, o_hs).unwrap();
        assert!(bound >= m - 3.0 * (var / e.len() as f64).sqrt(), "t={t}: {bound} < {m}");
    }
}

#[test]
fn haar_exceedances_respect_bernstein() {
    let n = 4;
    let o_hs = (1.0f64 - 1.0 / 16.0).sqrt();
    let opts = TailOptions {
        budget: 1000,
        batches: 10,
        replications: 10,
        extra_thresholds: vec![12.0 * o_hs + 0.01, 13.0, 14.0],
    };
    let summary = tail_experiment(&EnsembleSpec::haar(n), 50_000, 6, &opts).unwrap();
    assert_eq!(summary.exceedance.len(), 6);
    for e in &summary.exceedance {
        assert!(e.frequency <= e.bernstein_bound, "{e:?}");
        assert_eq!(e.bernstein_bound, bernstein_tail(e.threshold, 1, o_hs));
    }
}

#[test]
fn moments_converge_monotonically_to_the_limit() {
    for m in 2..=8 {
        let lim = BigRational::from_integer(limiting_moment(m));
        let mut last = None;
        for n in 4..=20 {
            let gap = (clifford_moment(n, m) - &lim).abs();
            if let Some(prev) = last {
                assert!(gap < prev, "m={m} n={n}");
            }
            last = Some(gap);
        }
        let rel = (last.unwrap() / &lim).to_f64().unwrap();
        assert!(rel < 1e-3, "m={m}: {rel}");
    }
}

#[test]
fn clifford_fourth_moment_at_eight_qubits() {
    let opts = TailOptions { budget: 10_000, batches: 40, replications: 5, extra_thresholds: vec![] };
    let summary = tail_experiment(&EnsembleSpec::clifford(8), 200_000, 17, &opts).unwrap();
    for m in &summary.moments {
        let exact = m.exact.unwrap();
        assert!((m.value - exact).abs() <= 3.0 * m.std_error, "m={}: {} vs {exact}", m.m, m.value);
    }
}

/// Median-of-means against the plain mean at n=10, budget 10^4, K=40.
/// This is expected to fail: with finite fourth moment the plain mean has
/// the smaller squared error in most replications.
#[test]
#[ignore = "known failure: median-of-means does not beat the plain mean at this budget"]
fn median_of_means_beats_plain_mean_at_ten_qubits() {
    let opts = TailOptions { budget: 10_000, batches: 40, replications: 100, extra_thresholds: vec![] };
    let summary = tail_experiment(&EnsembleSpec::clifford(10), 1_000_000, 4, &opts).unwrap();
    let mse = summary.mse.unwrap();
    assert!(mse.median_of_means_wins >= 0.9, "{mse:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scan_finds_the_first_minimiser(
        alpha in 1.0f64..500.0,
        vstar in 0.0f64..3.0,
        extra in 0.0f64..5.0,
        cap in 1usize..400,
    ) {
        let v1 = vstar + extra;
        let model = CostModel { alpha, budget: 1e5, k: 3, batches: 1, max_reuse: cap };
        let choice = optimal_reuse(&model, v1, vstar).unwrap();
        let f = |r: usize| {
            let r = r as f64;
            (alpha + r - 1.0) * (v1 / r + (r - 1.0) / r * vstar)
        };
        let best = (1..=cap).map(f).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(choice.objective, best);
        prop_assert!((1..choice.reuse).all(|r| f(r) > best));
    }
}
