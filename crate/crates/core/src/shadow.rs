//! Shadow data acquisition and estimation.
//!
//! A single shot measures `U rho U^dag` in the computational basis and
//! returns `X = (2^n + 1) <x|U O U^dag|x> - tr O`. Thrifty acquisition draws
//! `N / R` circuits and measures each one `R` times.

use std::io::{BufRead, Write};

use num::{BigInt, BigRational};
use serde::{Deserialize, Serialize};

use crate::dense::{format_bitstring, parse_bitstring, CumulativeTable, DenseOperator, C64};
use crate::ensemble::{CircuitSource, SampledCircuit};
use crate::error::check_qubits;
use crate::par;
use crate::pauli::PauliString;
use crate::rng::{substream, Purpose, StreamRng};
use crate::stats::CentralMoments;
use crate::tableau::{AffineSupport, StabilizerTableau};
use crate::{Error, Result, MAX_DENSE_QUBITS};

/// Input state of the experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum PreparedState {
    Stabilizer(StabilizerTableau),
    Pure(Vec<C64>),
    Mixed(DenseOperator),
}

impl PreparedState {
    pub fn qubits(&self) -> usize {
        match self {
            PreparedState::Stabilizer(t) => t.qubits(),
            PreparedState::Pure(v) => v.len().trailing_zeros() as usize,
            PreparedState::Mixed(m) => m.qubits(),
        }
    }

    pub fn density(&self) -> Result<DenseOperator> {
        match self {
            PreparedState::Stabilizer(t) => DenseOperator::projector(&t.to_state_vector()?),
            PreparedState::Pure(v) => DenseOperator::projector(v),
            PreparedState::Mixed(m) => Ok(m.clone()),
        }
    }
}

/// Observable to estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// `|S><S| - I / 2^n`.
    StabilizerProjector(StabilizerTableau),
    /// A Hermitian Pauli string.
    Pauli(PauliString),
    Dense(DenseOperator),
}

impl Observable {
    pub fn qubits(&self) -> usize {
        match self {
            Observable::StabilizerProjector(t) => t.qubits(),
            Observable::Pauli(p) => p.qubits(),
            Observable::Dense(m) => m.qubits(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            Observable::StabilizerProjector(_) => 0.0,
            Observable::Pauli(p) => p.trace().re,
            Observable::Dense(m) => m.trace().re,
        }
    }

    pub fn dense(&self) -> Result<DenseOperator> {
        match self {
            Observable::StabilizerProjector(t) => {
                let n = t.qubits();
                let proj = DenseOperator::projector(&t.to_state_vector()?)?;
                let shift = DenseOperator::identity(n).scale(C64::new(-(-(n as f64)).exp2(), 0.0));
                proj.add(&shift)
            }
            Observable::Pauli(p) => p.to_dense(),
            Observable::Dense(m) => Ok(m.clone()),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Observable::Pauli(p) if !p.is_hermitian() => {
                Err(Error::InvalidArgument(format!("observable {p} is not Hermitian")))
            }
            Observable::Dense(m) if m.hermiticity_deviation() > 1e-10 => {
                Err(Error::InvalidArgument("observable is not Hermitian".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Whether to use stabilizer shortcuts when they apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalPath {
    #[default]
    Auto,
    Dense,
}

/// Computational-basis outcome distribution of `U rho U^dag`.
#[derive(Debug, Clone)]
pub enum OutcomeSampler {
    Stabilizer { state: StabilizerTableau, support: AffineSupport },
    Table { probs: Vec<f64>, table: CumulativeTable },
}

impl OutcomeSampler {
    pub fn new(circuit: &SampledCircuit, state: &PreparedState, path: EvalPath) -> Result<Self> {
        check_dims(circuit.qubits(), state.qubits())?;
        if path == EvalPath::Auto {
            if let (Some(c), PreparedState::Stabilizer(s)) = (circuit.as_clifford(), state) {
                let state = c.apply_to_tableau(s);
                let support = state.support();
                return Ok(Self::Stabilizer { state, support });
            }
        }
        check_qubits("dense evaluation", circuit.qubits(), MAX_DENSE_QUBITS)?;
        let probs: Vec<f64> = match state {
            PreparedState::Stabilizer(s) => {
                circuit.apply_to_vector(&s.to_state_vector()?)?.iter().map(|a| a.norm_sqr()).collect()
            }
            PreparedState::Pure(v) => circuit.apply_to_vector(v)?.iter().map(|a| a.norm_sqr()).collect(),
            PreparedState::Mixed(rho) => {
                let u = circuit.to_dense()?;
                let out = u.matmul(rho)?.matmul(&u.adjoint())?;
                crate::dense::born_probabilities(&out)?
            }
        };
        let table = CumulativeTable::new(&probs);
        Ok(Self::Table { probs, table })
    }

    pub fn sample(&self, rng: &mut StreamRng) -> u64 {
        match self {
            OutcomeSampler::Stabilizer { support, .. } => support.sample(rng),
            OutcomeSampler::Table { table, .. } => table.sample(rng),
        }
    }

    pub fn probability(&self, x: u64) -> f64 {
        match self {
            OutcomeSampler::Stabilizer { support, .. } => {
                if support.contains(x) {
                    (-(support.dim() as f64)).exp2()
                } else {
                    0.0
                }
            }
            OutcomeSampler::Table { probs, .. } => probs[x as usize],
        }
    }
}

/// The single-shot value `x -> X(x)` for a fixed circuit and observable.
#[derive(Debug, Clone)]
pub enum ShotValues {
    /// Projector observable on a Clifford circuit: support of `C|S_O>`.
    Projector {
        n: usize,
        support: AffineSupport,
    },
    /// Pauli observable on a Clifford circuit: the image `C P C^dag`.
    Pauli {
        n: usize,
        image: PauliString,
        trace: f64,
    },
    Table(Vec<f64>),
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

impl ShotValues {
    pub fn new(circuit: &SampledCircuit, obs: &Observable, path: EvalPath) -> Result<Self> {
        obs.validate()?;
        let n = circuit.qubits();
        check_dims(n, obs.qubits())?;
        if path == EvalPath::Auto {
            if let Some(c) = circuit.as_clifford() {
                match obs {
                    Observable::StabilizerProjector(t) => {
                        let support = c.apply_to_tableau(t).support();
                        return Ok(Self::Projector { n, support });
                    }
                    Observable::Pauli(p) => return Ok(Self::Pauli { n, image: c.conjugate(p), trace: obs.trace() }),
                    Observable::Dense(_) => {}
                }
            }
        }
        check_qubits("dense evaluation", n, MAX_DENSE_QUBITS)?;
        let scale = (n as f64).exp2() + 1.0;
        let tr = obs.trace();
        let values = match obs {
            Observable::StabilizerProjector(t) => {
                let phi = circuit.apply_to_vector(&t.to_state_vector()?)?;
                let shift = (-(n as f64)).exp2();
                phi.iter().map(|a| scale * (a.norm_sqr() - shift)).collect()
            }
            _ => {
                let u = circuit.to_dense()?;
                let m = u.matmul(&obs.dense()?)?;
                (0..u.dim())
                    .map(|x| {
                        let diag: C64 = (0..u.dim()).map(|b| m.get(x, b) * u.get(x, b).conj()).sum();
                        scale * diag.re - tr
                    })
                    .collect()
            }
        };
        Ok(Self::Table(values))
    }

    pub fn value(&self, x: u64) -> f64 {
        match self {
            ShotValues::Projector { n, support } => {
                let scale = (*n as f64).exp2() + 1.0;
                let p = if support.contains(x) { (-(support.dim() as f64)).exp2() } else { 0.0 };
                scale * (p - (-(*n as f64)).exp2())
            }
            ShotValues::Pauli { n, image, trace } => {
                let scale = (*n as f64).exp2() + 1.0;
                if image.x_bits() != 0 {
                    return -trace;
                }
                let (c, _) = image.apply_basis(x);
                scale * c.re - trace
            }
            ShotValues::Table(v) => v[x as usize],
        }
    }
}

/// Outcome distribution and single-shot values for one circuit.
#[derive(Debug, Clone)]
pub struct ShotModel {
    pub sampler: OutcomeSampler,
    pub values: ShotValues,
}

impl ShotModel {
    pub fn new(circuit: &SampledCircuit, state: &PreparedState, obs: &Observable, path: EvalPath) -> Result<Self> {
        Ok(Self { sampler: OutcomeSampler::new(circuit, state, path)?, values: ShotValues::new(circuit, obs, path)? })
    }

    pub fn sample(&self, rng: &mut StreamRng) -> (u64, f64) {
        let x = self.sampler.sample(rng);
        (x, self.values.value(x))
    }

    /// Mean of `R` shots.
    pub fn thrifty_value(&self, reuse: usize, rng: &mut StreamRng) -> f64 {
        let total: f64 = (0..reuse).map(|_| self.sample(rng).1).sum();
        total / reuse as f64
    }

    /// `E[X | U] = sum_x p(x|U) X(x)`.
    pub fn conditional_mean(&self) -> Result<f64> {
        match (&self.sampler, &self.values) {
            (OutcomeSampler::Stabilizer { support: a, .. }, ShotValues::Projector { n, support: b }) => {
                let scale = (*n as f64).exp2() + 1.0;
                let overlap = match a.intersection_dim(b) {
                    Some(i) => (i as f64 - a.dim() as f64 - b.dim() as f64).exp2(),
                    None => 0.0,
                };
                Ok(scale * (overlap - (-(*n as f64)).exp2()))
            }
            (OutcomeSampler::Stabilizer { state, .. }, ShotValues::Pauli { n, image, trace }) => {
                let scale = (*n as f64).exp2() + 1.0;
                if image.x_bits() != 0 {
                    return Ok(-trace);
                }
                // diagonal image: i^p Z^z with p even
                let zpart = PauliString::hermitian(*n, 0, image.z_bits(), image.phase() == 2);
                Ok(scale * state.expectation(&zpart) as f64 - trace)
            }
            (sampler, values) => {
                let n = match values {
                    ShotValues::Projector { n, .. } | ShotValues::Pauli { n, .. } => *n,
                    ShotValues::Table(v) => v.len().trailing_zeros() as usize,
                };
                check_qubits("dense conditional mean", n, MAX_DENSE_QUBITS)?;
                Ok((0..1u64 << n)
                    .map(|x| {
                        let p = sampler.probability(x);
                        if p == 0.0 {
                            0.0
                        } else {
                            p * values.value(x)
                        }
                    })
                    .sum())
            }
        }
    }
}

/// Single-shot estimator value, using stabilizer shortcuts when possible.
pub fn single_shot(obs: &Observable, circuit: &SampledCircuit, x: u64) -> Result<f64> {
    Ok(ShotValues::new(circuit, obs, EvalPath::Auto)?.value(x))
}

/// Single-shot value computed from dense matrices only.
pub fn single_shot_dense(obs: &Observable, circuit: &SampledCircuit, x: u64) -> Result<f64> {
    Ok(ShotValues::new(circuit, obs, EvalPath::Dense)?.value(x))
}

/// Exact single-shot value for a projector or Pauli observable on a
/// Clifford circuit.
pub fn single_shot_exact(obs: &Observable, circuit: &SampledCircuit, x: u64) -> Result<BigRational> {
    let c = circuit.as_clifford().ok_or_else(|| Error::Unsupported("exact values need a Clifford circuit".into()))?;
    let n = c.qubits();
    let scale = BigRational::from_integer((BigInt::from(1) << n) + 1);
    let inv_d = BigRational::new(BigInt::from(1), BigInt::from(1) << n);
    match ShotValues::new(circuit, obs, EvalPath::Auto)? {
        ShotValues::Projector { support, .. } => {
            let p = if support.contains(x) {
                BigRational::new(BigInt::from(1), BigInt::from(1) << support.dim())
            } else {
                BigRational::from_integer(BigInt::from(0))
            };
            Ok(scale * (p - inv_d))
        }
        ShotValues::Pauli { image, trace, .. } => {
            let tr = BigRational::from_integer(BigInt::from(trace as i64));
            if image.x_bits() != 0 {
                return Ok(-tr);
            }
            let (c, _) = image.apply_basis(x);
            Ok(scale * BigRational::from_integer(BigInt::from(c.re as i64)) - tr)
        }
        ShotValues::Table(_) => Err(Error::Unsupported("exact values need a projector or Pauli observable".into())),
    }
}

/// Budget split: `N` shots, `R` shots per circuit, `K` median-of-means batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub total: usize,
    #[serde(rename = "R")]
    pub reuse: usize,
    #[serde(rename = "K")]
    pub batches: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total == 0 || self.reuse == 0 || self.batches == 0 {
            return Err(Error::InvalidConfig("N, R and K must be positive".into()));
        }
        let block = self.reuse.checked_mul(self.batches);
        if block.is_none_or(|b| !self.total.is_multiple_of(b)) {
            return Err(Error::Divisibility { total: self.total, reuse: self.reuse, batches: self.batches });
        }
        Ok(())
    }

    pub fn circuits(&self) -> usize {
        self.total / self.reuse
    }
}

/// One sampled circuit and the outcomes recorded with it.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowRecord {
    pub circuit: SampledCircuit,
    pub outcomes: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    circuit: String,
    outcomes: Vec<String>,
}

/// Draw circuits and measurement outcomes.
pub fn acquire(source: &impl CircuitSource, state: &PreparedState, cfg: &RunConfig) -> Result<Vec<ShadowRecord>> {
    cfg.validate()?;
    check_dims(source.qubits(), state.qubits())?;
    par::map_range(cfg.circuits(), |t| {
        let mut rng = substream(cfg.seed, Purpose::Acquire, t as u64);
        let circuit = source.sample(&mut rng)?;
        let sampler = OutcomeSampler::new(&circuit, state, EvalPath::Auto)?;
        let outcomes = (0..cfg.reuse).map(|_| sampler.sample(&mut rng)).collect();
        Ok(ShadowRecord { circuit, outcomes })
    })
    .into_iter()
    .collect()
}

/// Per-circuit averages `X_R` of the single-shot values.
pub fn record_values(records: &[ShadowRecord], obs: &Observable) -> Result<Vec<f64>> {
    par::map_range(records.len(), |i| {
        let r = &records[i];
        let values = ShotValues::new(&r.circuit, obs, EvalPath::Auto)?;
        let sum: f64 = r.outcomes.iter().map(|&x| values.value(x)).sum();
        Ok(sum / r.outcomes.len() as f64)
    })
    .into_iter()
    .collect()
}

/// Median of `K` consecutive batch means; the lower median for even `K`.
pub fn median_of_means(values: &[f64], batches: usize) -> Result<f64> {
    if batches == 0 || values.is_empty() || !values.len().is_multiple_of(batches) {
        return Err(Error::BatchSplit { len: values.len(), batches });
    }
    let size = values.len() / batches;
    let mut means: Vec<f64> = values.chunks(size).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    means.sort_by(f64::total_cmp);
    Ok(means[(batches - 1) / 2])
}

/// Result of a thrifty shadow estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    #[serde(rename = "K")]
    pub batches: usize,
    #[serde(rename = "R")]
    pub reuse: usize,
    #[serde(rename = "N")]
    pub total: usize,
    pub seed: u64,
}

/// `X_R` for each of the `N / R` circuits, consuming randomness exactly as
/// [`acquire`] does.
pub fn thrifty_values(
    source: &impl CircuitSource,
    state: &PreparedState,
    obs: &Observable,
    cfg: &RunConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_dims(source.qubits(), state.qubits())?;
    par::map_range(cfg.circuits(), |t| {
        let mut rng = substream(cfg.seed, Purpose::Acquire, t as u64);
        let circuit = source.sample(&mut rng)?;
        let model = ShotModel::new(&circuit, state, obs, EvalPath::Auto)?;
        Ok(model.thrifty_value(cfg.reuse, &mut rng))
    })
    .into_iter()
    .collect()
}

/// Median-of-means thrifty shadow estimate of `tr(O rho)`.
pub fn estimate(
    source: &impl CircuitSource,
    state: &PreparedState,
    obs: &Observable,
    cfg: &RunConfig,
) -> Result<Estimate> {
    let values = thrifty_values(source, state, obs, cfg)?;
    Ok(Estimate {
        estimate: median_of_means(&values, cfg.batches)?,
        batches: cfg.batches,
        reuse: cfg.reuse,
        total: cfg.total,
        seed: cfg.seed,
    })
}

/// A variance estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub value: f64,
    pub std_error: f64,
    pub mean: f64,
    pub samples: usize,
}

impl From<CentralMoments> for VarianceEstimate {
    fn from(m: CentralMoments) -> Self {
        Self { value: m.variance(), std_error: m.variance_std_error(), mean: m.mean(), samples: m.count() as usize }
    }
}

fn accumulate(values: &[f64]) -> CentralMoments {
    let parts = par::map_chunks(values.len(), 8192, |r| values[r].iter().copied().collect::<CentralMoments>());
    let mut acc = CentralMoments::new();
    for p in &parts {
        acc.merge(p);
    }
    acc
}

/// Conditional means `E[X | U]` for `circuits` independent circuits.
pub fn conditional_means(
    source: &impl CircuitSource,
    state: &PreparedState,
    obs: &Observable,
    circuits: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_dims(source.qubits(), state.qubits())?;
    par::map_range(circuits, |i| conditional_mean_at(source, state, obs, seed, i)).into_iter().collect()
}

/// Same as [`conditional_means`] but always on the calling thread.
pub fn conditional_means_sequential(
    source: &impl CircuitSource,
    state: &PreparedState,
    obs: &Observable,
    circuits: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_dims(source.qubits(), state.qubits())?;
    par::map_range_sequential(circuits, |i| conditional_mean_at(source, state, obs, seed, i)).into_iter().collect()
}

fn conditional_mean_at(
    source: &impl CircuitSource,
    state: &PreparedState,
    obs: &Observable,
    seed: u64,
    i: usize,
) -> Result<f64> {
    let mut rng = substream(seed, Purpose::ConditionalMean, i as u64);
    let circuit = source.sample(&mut rng)?;
    ShotModel::new(&circuit, state, obs, EvalPath::Auto)?.conditional_mean()
}

/// `V_* = Var_U(E[X | U])` from exact conditional means.
pub fn estimate_vstar(
    source: &impl CircuitSource,
    state: &PreparedState,
    obs: &Observable,
    circuits: usize,
    seed: u64,
) -> Result<VarianceEstimate> {
    if circuits < 4 {
        return Err(Error::InvalidArgument("need at least four circuits".into()));
    }
    Ok(accumulate(&conditional_means(source, state, obs, circuits, seed)?).into())
}

/// Empirical `V_R = Var(X_R)` from `circuits` circuits with `R` shots each.
pub fn estimate_thrifty_variance(
    source: &impl CircuitSource,
    state: &PreparedState,
    obs: &Observable,
    circuits: usize,
    reuse: usize,
    seed: u64,
) -> Result<VarianceEstimate> {
    let cfg = RunConfig { total: circuits * reuse, reuse, batches: 1, seed };
    if circuits < 4 {
        return Err(Error::InvalidArgument("need at least four circuits".into()));
    }
    Ok(accumulate(&thrifty_values(source, state, obs, &cfg)?).into())
}

/// Write records as JSON lines `{"circuit": hex, "outcomes": [bits, ...]}`.
pub fn write_records(mut w: impl Write, records: &[ShadowRecord]) -> Result<()> {
    for r in records {
        let n = r.circuit.qubits();
        let line = RecordLine {
            circuit: r.circuit.descriptor(),
            outcomes: r.outcomes.iter().map(|&x| format_bitstring(x, n)).collect(),
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records(r: impl BufRead) -> Result<Vec<ShadowRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: RecordLine = serde_json::from_str(&line)?;
        let circuit = SampledCircuit::from_descriptor(&parsed.circuit)?;
        let n = circuit.qubits();
        let outcomes = parsed
            .outcomes
            .iter()
            .map(|s| {
                if s.len() != n {
                    return Err(Error::InvalidArgument(format!("outcome {s:?} has wrong length")));
                }
                parse_bitstring(s)
            })
            .collect::<Result<_>>()?;
        out.push(ShadowRecord { circuit, outcomes });
    }
    Ok(out)
}
