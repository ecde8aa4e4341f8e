//! Exact Clifford moments, tail bounds, empirical tail experiments and the
//! circuit-reuse cost model.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::ensemble::{CircuitSource, EnsembleKind, EnsembleSpec};
use crate::moments::variance::traces;
use crate::par;
use crate::shadow::{median_of_means, thrifty_values, Observable, PreparedState, RunConfig};
use crate::stats::PowerSums;
use crate::tableau::StabilizerTableau;
use crate::{Error, Result};

fn binomial(m: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(m - i) / BigInt::from(i + 1))
}

fn sign(m: usize, k: usize) -> BigInt {
    if (m - k).is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// `E(X^m)` for a random Clifford shadow of `rho = |S><S|`,
/// `O = |S><S| - I/2^n`, exactly.
pub fn clifford_moment(n: usize, m: usize) -> BigRational {
    let d = BigInt::one() << n;
    let mut sum = BigRational::zero();
    let mut prod = BigRational::one();
    for k in 0..=m {
        if k > 0 {
            let l = k - 1;
            prod *= BigRational::new((BigInt::one() << l) + 1, (BigInt::one() << l) + &d);
        }
        let weight = BigRational::new(binomial(m, k) * sign(m, k), num::pow(d.clone(), m - k));
        sum += weight * &prod;
    }
    sum * BigRational::from_integer(num::pow(&d + 1, m))
}

/// `lim_n E(X^m) = sum_k C(m,k) (-1)^{m-k} prod_{l<k} (2^l + 1)`.
pub fn limiting_moment(m: usize) -> BigInt {
    let mut prod = BigInt::one();
    let mut sum = BigInt::zero();
    for k in 0..=m {
        if k > 0 {
            prod *= (BigInt::one() << (k - 1)) + 1;
        }
        sum += binomial(m, k) * sign(m, k) * &prod;
    }
    sum
}

/// The limit obtained by rounding the finite-`n` moment at very large `n`.
pub fn limiting_moment_from_finite_n(m: usize) -> BigInt {
    clifford_moment(128 + 8 * m, m).round().to_integer()
}

/// Moments `m = 0..=max_m` at fixed `n` (`None` for the limit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentTable {
    pub n: Option<usize>,
    pub moments: BTreeMap<usize, BigRational>,
}

impl MomentTable {
    pub fn finite(n: usize, max_m: usize) -> Self {
        Self { n: Some(n), moments: (0..=max_m).map(|m| (m, clifford_moment(n, m))).collect() }
    }

    pub fn limit(max_m: usize) -> Self {
        Self { n: None, moments: (0..=max_m).map(|m| (m, BigRational::from_integer(limiting_moment(m)))).collect() }
    }
}

/// Moment-generating-function bound for Haar shadows,
/// `1 + t tr(O rho) + t^2 o^2 (3 - 2|t| o) / (1 - |t| o)^2`.
pub fn mgf_bound_haar(t: f64, tr_orho: f64, o_hs: f64) -> Result<f64> {
    let a = t.abs() * o_hs;
    if a.is_nan() || a >= 1.0 {
        return Err(Error::InvalidArgument(format!("|t| = {} must be below 1/o_hs", t.abs())));
    }
    Ok(1.0 + t * tr_orho + t * t * o_hs * o_hs * (3.0 - 2.0 * a) / ((1.0 - a) * (1.0 - a)))
}

/// Bernstein tail bound for the mean of `N` Haar shadows; non-positive
/// `eps` gives the trivial value 2.
pub fn bernstein_tail(eps: f64, samples: usize, o_hs: f64) -> f64 {
    if eps <= 0.0 {
        return 2.0;
    }
    let n = samples as f64;
    if eps <= 12.0 * o_hs {
        2.0 * (-n * eps * eps / (48.0 * o_hs * o_hs)).exp()
    } else {
        2.0 * (-n * eps / (4.0 * o_hs)).exp()
    }
}

/// Options of [`tail_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    /// Sample budget of each estimator in the MSE comparison.
    pub budget: usize,
    /// Median-of-means batch count.
    pub batches: usize,
    /// Maximum number of replications (limited by `samples / budget`).
    pub replications: usize,
    /// Deviation thresholds in addition to `2, 2^{n/2}, 2^n / 4`.
    #[serde(default)]
    pub extra_thresholds: Vec<f64>,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { budget: 10_000, batches: 40, replications: 100, extra_thresholds: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub m: usize,
    pub value: f64,
    pub std_error: f64,
    pub exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    pub threshold: f64,
    /// Fraction of samples with `|X - tr(O rho)| >= threshold`.
    pub frequency: f64,
    /// Single-sample Bernstein bound at this threshold.
    pub bernstein_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseComparison {
    pub budget: usize,
    #[serde(rename = "K")]
    pub batches: usize,
    pub replications: usize,
    pub plain_mse: f64,
    pub median_of_means_mse: f64,
    /// Fraction of replications in which median-of-means had the smaller
    /// squared error.
    pub median_of_means_wins: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSummary {
    pub ensemble: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub truth: f64,
    pub mean: f64,
    pub variance: f64,
    pub median_of_means: f64,
    pub moments: Vec<MomentEstimate>,
    pub exceedance: Vec<Exceedance>,
    pub mse: Option<MseComparison>,
}

/// Tail experiment for the stabilizer pair `rho = |0><0|`, `O = |0><0| - I/2^n`.
pub fn tail_experiment(spec: &EnsembleSpec, samples: usize, seed: u64, opts: &TailOptions) -> Result<TailSummary> {
    spec.validate()?;
    let s = StabilizerTableau::zero_state(spec.n)?;
    let state = PreparedState::Stabilizer(s.clone());
    let obs = Observable::StabilizerProjector(s);
    let exact = (spec.kind == EnsembleKind::Clifford)
        .then(|| (1..=4).map(|m| clifford_moment(spec.n, m).to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>());
    let mut summary = tail_experiment_with(spec, &state, &obs, samples, seed, opts, exact.as_deref())?;
    summary.ensemble = spec.kind.name().to_string();
    Ok(summary)
}

/// Tail experiment for an arbitrary source, state and observable; `exact`
/// optionally supplies `E(X^m)` for `m = 1..=4`.
pub fn tail_experiment_with(
    source: &impl CircuitSource,
    state: &PreparedState,
    obs: &Observable,
    samples: usize,
    seed: u64,
    opts: &TailOptions,
    exact: Option<&[f64]>,
) -> Result<TailSummary> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let n = source.qubits();
    let tr = traces(obs, state)?;
    let truth = tr.tr_rho_o;
    let o_hs = tr.tr_o2.sqrt();
    let cfg = RunConfig { total: samples, reuse: 1, batches: 1, seed };
    let values = thrifty_values(source, state, obs, &cfg)?;
    let parts = par::map_chunks(values.len(), 8192, |r| values[r].iter().copied().collect::<PowerSums>());
    let mut acc = PowerSums::new();
    for p in &parts {
        acc.merge(p);
    }
    let moments = (1..=4)
        .map(|m| MomentEstimate {
            m,
            value: acc.raw_moment(m),
            std_error: acc.raw_moment_std_error(m),
            exact: exact.and_then(|e| e.get(m - 1).copied()),
        })
        .collect();
    let d = (n as f64).exp2();
    let mut thresholds = vec![2.0, (n as f64 / 2.0).exp2(), d / 4.0];
    thresholds.extend(opts.extra_thresholds.iter().copied());
    let exceedance = thresholds
        .into_iter()
        .map(|eps| Exceedance {
            threshold: eps,
            frequency: values.iter().filter(|&&x| (x - truth).abs() >= eps).count() as f64 / samples as f64,
            bernstein_bound: bernstein_tail(eps, 1, o_hs),
        })
        .collect();
    let mean = acc.raw_moment(1);
    let variance = (acc.raw_moment(2) - mean * mean) * samples as f64 / (samples as f64 - 1.0);
    let mom_batches = if samples.is_multiple_of(opts.batches.max(1)) { opts.batches } else { 1 };
    Ok(TailSummary {
        ensemble: "custom".into(),
        n,
        samples,
        seed,
        truth,
        mean,
        variance,
        median_of_means: median_of_means(&values, mom_batches)?,
        moments,
        exceedance,
        mse: mse_comparison(&values, truth, opts)?,
    })
}

/// Plain mean versus median-of-means on disjoint blocks of `budget` samples.
pub fn mse_comparison(values: &[f64], truth: f64, opts: &TailOptions) -> Result<Option<MseComparison>> {
    if opts.budget == 0 || opts.batches == 0 || !opts.budget.is_multiple_of(opts.batches) {
        return Err(Error::BatchSplit { len: opts.budget, batches: opts.batches });
    }
    let reps = opts.replications.min(values.len() / opts.budget);
    if reps == 0 {
        return Ok(None);
    }
    let (mut plain, mut mom, mut wins) = (0.0, 0.0, 0usize);
    for block in values.chunks_exact(opts.budget).take(reps) {
        let p = (block.iter().sum::<f64>() / block.len() as f64 - truth).powi(2);
        let m = (median_of_means(block, opts.batches)? - truth).powi(2);
        plain += p;
        mom += m;
        if m < p {
            wins += 1;
        }
    }
    let r = reps as f64;
    Ok(Some(MseComparison {
        budget: opts.budget,
        batches: opts.batches,
        replications: reps,
        plain_mse: plain / r,
        median_of_means_mse: mom / r,
        median_of_means_wins: wins as f64 / r,
    }))
}

/// Cost model: a new circuit costs `alpha`, each further shot costs 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub alpha: f64,
    pub budget: f64,
    /// T count entering the printed heuristic.
    pub k: usize,
    #[serde(rename = "K")]
    pub batches: usize,
    /// Largest admissible reuse, `N / K`.
    pub max_reuse: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReuseChoice {
    /// Minimiser of the scanned objective.
    pub reuse: usize,
    /// `(alpha + R - 1) V_R`, proportional to the estimator variance at fixed cost.
    pub objective: f64,
    /// Number of circuits the budget affords at this `R`.
    pub circuits: f64,
    /// Stationary point `sqrt((alpha - 1)(v1 - vstar) / vstar)` of the continuous relaxation.
    pub continuous_optimum: Option<f64>,
    /// `sqrt((1 - alpha) |v1 - 30 (3/4)^k| / (30 (3/4)^k))`, as printed; `None` when not real.
    pub printed_heuristic: Option<f64>,
}

/// Exact scan of `R in 1..=max_reuse` minimising `(alpha + R - 1)(v1/R + (R-1)/R vstar)`;
/// ties go to the smaller `R`.
pub fn optimal_reuse(model: &CostModel, v1: f64, vstar: f64) -> Result<ReuseChoice> {
    if model.alpha.is_nan() || model.alpha < 1.0 || model.budget.is_nan() || model.budget <= 0.0 {
        return Err(Error::InvalidArgument("need alpha >= 1 and a positive budget".into()));
    }
    if vstar.is_nan() || v1.is_nan() || vstar < 0.0 || v1 < vstar {
        return Err(Error::InvalidArgument("need v1 >= vstar >= 0".into()));
    }
    if model.max_reuse == 0 {
        return Err(Error::InvalidArgument("empty range of admissible R".into()));
    }
    let objective = |r: usize| {
        let rf = r as f64;
        (model.alpha + rf - 1.0) * (v1 / rf + (rf - 1.0) / rf * vstar)
    };
    let mut best = 1;
    let mut best_val = objective(1);
    for r in 2..=model.max_reuse {
        let v = objective(r);
        if v < best_val {
            best = r;
            best_val = v;
        }
    }
    let tail = 30.0 * 0.75f64.powi(model.k as i32);
    let printed = ((1.0 - model.alpha) * (v1 - tail).abs() / tail).sqrt();
    Ok(ReuseChoice {
        reuse: best,
        objective: best_val,
        circuits: model.budget / (model.alpha + best as f64 - 1.0),
        continuous_optimum: (vstar > 0.0).then(|| ((model.alpha - 1.0) * (v1 - vstar) / vstar).sqrt()),
        printed_heuristic: printed.is_finite().then_some(printed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordElement;
    use crate::ensemble::{FixedCircuit, SampledCircuit};
    use crate::moments::{stabilizer_pair_traces, variance_3design_exact};

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn low_moments() {
        for n in 1..=8 {
            assert_eq!(clifford_moment(n, 0), BigRational::one());
            let inv = BigRational::new(BigInt::one(), BigInt::one() << n);
            assert_eq!(clifford_moment(n, 1), BigRational::one() - &inv);
            let (a, b, c) = stabilizer_pair_traces(n);
            let v = variance_3design_exact(n, &a, &b, &c);
            assert_eq!(clifford_moment(n, 2), v + &c * &c);
        }
        assert_eq!(clifford_moment(2, 2), q(25, 16));
    }

    #[test]
    fn limits() {
        let expected = [1, 1, 3, 17, 179, 3489, 127_459, 8_873_137, 1_195_313_043i64];
        for (m, &e) in expected.iter().enumerate() {
            assert_eq!(limiting_moment(m), BigInt::from(e));
            assert_eq!(limiting_moment_from_finite_n(m), BigInt::from(e));
        }
    }

    #[test]
    fn mgf_and_bernstein_reference() {
        assert_eq!(mgf_bound_haar(0.0, 0.4, 1.0).unwrap(), 1.0);
        assert!((mgf_bound_haar(0.5, 0.0, 1.0).unwrap() - 3.0).abs() < 1e-12);
        assert!(mgf_bound_haar(1.0, 0.0, 1.0).is_err());
        let o = 0.7;
        let n = 5;
        let left = bernstein_tail(12.0 * o, n, o);
        assert!((left - 2.0 * (-3.0 * n as f64).exp()).abs() < 1e-20);
        assert_eq!(bernstein_tail(0.0, 10, 1.0), 2.0);
        assert!((bernstein_tail(1.0, 100, 1.0) - 2.0 * (-100.0f64 / 48.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn optimal_reuse_reference() {
        let model = |alpha| CostModel { alpha, budget: 1e6, k: 0, batches: 10, max_reuse: 1000 };
        assert_eq!(optimal_reuse(&model(1.0), 3.0, 0.1).unwrap().reuse, 1);
        assert_eq!(optimal_reuse(&model(5.0), 3.0, 0.0).unwrap().reuse, 1000);
        let c = optimal_reuse(&model(100.0), 3.0, 0.1).unwrap();
        let cont = c.continuous_optimum.unwrap();
        assert!((cont - 53.58).abs() < 0.01);
        assert!((c.reuse as f64 - cont).abs() <= 1.0);
        assert!(c.printed_heuristic.is_none());
        assert!(optimal_reuse(&CostModel { max_reuse: 0, ..model(2.0) }, 1.0, 0.5).is_err());
        assert!(optimal_reuse(&model(2.0), 0.5, 1.0).is_err());
    }

    #[test]
    fn degenerate_source_has_no_spread() {
        let n = 3;
        let s = StabilizerTableau::zero_state(n).unwrap();
        let source = FixedCircuit(SampledCircuit::Clifford(CliffordElement::identity(n)));
        let state = PreparedState::Stabilizer(s.clone());
        let obs = Observable::StabilizerProjector(s);
        let opts = TailOptions { budget: 100, batches: 10, replications: 5, extra_thresholds: vec![] };
        let sum = tail_experiment_with(&source, &state, &obs, 1000, 1, &opts, None).unwrap();
        assert_eq!(sum.variance, 0.0);
        assert_eq!(sum.mean, sum.median_of_means);
    }
}
