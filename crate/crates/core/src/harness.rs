//! Experiment configs, the experiment registry and CSV/JSON emission.

use std::io::{Read, Write};

use num::{BigRational, ToPrimitive};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::ensemble::{EnsembleKind, EnsembleSpec};
use crate::moments::traces;
use crate::moments::{
    gram_matrix, thrifty_variance_predict, variance_3design_from_traces, vstar_bound, vstar_stabilizer_pair,
    weingarten_matrix, Group, TCountConstants,
};
use crate::pauli::PauliString;
use crate::rng::{substream, Purpose};
use crate::shadow::{
    estimate_thrifty_variance, estimate_vstar, median_of_means, thrifty_values, Estimate, Observable, PreparedState,
    RunConfig,
};
use crate::tableau::StabilizerTableau;
use crate::tails::{
    clifford_moment, limiting_moment, optimal_reuse, tail_experiment, CostModel, ReuseChoice, TailOptions, TailSummary,
};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A versioned, seeded experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub seed: u64,
    #[serde(flatten)]
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    Estimate(EstimateParams),
    VarianceScan(VarianceScanParams),
    HomeopathicScan(HomeopathicScanParams),
    MomentTable(MomentTableParams),
    TailExperiment(TailParams),
    Weingarten(WeingartenParams),
    OptimalReuse(OptimalReuseParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Estimate(_) => "estimate",
            Experiment::VarianceScan(_) => "variance-scan",
            Experiment::HomeopathicScan(_) => "homeopathic-scan",
            Experiment::MomentTable(_) => "moment-table",
            Experiment::TailExperiment(_) => "tail-experiment",
            Experiment::Weingarten(_) => "weingarten",
            Experiment::OptimalReuse(_) => "optimal-reuse",
        }
    }
}

/// Shadow estimate of `tr(O rho)` for `rho = |0^n>`. The observable is
/// `|0^n><0^n| - I/2^n` unless a Pauli string is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateParams {
    pub ensemble: EnsembleSpec,
    #[serde(rename = "N")]
    pub total: usize,
    #[serde(rename = "R")]
    pub reuse: usize,
    #[serde(rename = "K")]
    pub batches: usize,
    #[serde(default)]
    pub pauli: Option<String>,
}

/// `V_R` for each `R` with `N` shots, against `V / R + (R-1)/R V_*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceScanParams {
    pub ensemble: EnsembleSpec,
    #[serde(rename = "N")]
    pub total: usize,
    #[serde(rename = "R")]
    pub reuse: Vec<usize>,
    #[serde(rename = "K", default = "one")]
    pub batches: usize,
    /// Circuits used for the exact-conditional-mean `V_*` estimate.
    pub vstar_circuits: usize,
}

/// `V_*` of the homeopathic ensemble for each T count `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomeopathicScanParams {
    pub n: usize,
    pub k: Vec<usize>,
    pub circuits: usize,
    #[serde(default)]
    pub constants: TCountConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentTableParams {
    pub n: Vec<usize>,
    pub max_m: usize,
    #[serde(default)]
    pub limit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailParams {
    pub ensemble: EnsembleSpec,
    pub samples: usize,
    #[serde(default)]
    pub options: TailOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    Gram,
    Weingarten,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeingartenParams {
    pub t: usize,
    pub n: usize,
    pub group: Group,
    #[serde(default = "both")]
    pub matrix: MatrixKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimalReuseParams {
    pub alpha: f64,
    pub budget: f64,
    pub k: usize,
    #[serde(rename = "K")]
    pub batches: usize,
    pub max_reuse: usize,
    pub v1: f64,
    pub vstar: f64,
}

fn one() -> usize {
    1
}

fn both() -> MatrixKind {
    MatrixKind::Both
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn positive(what: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(invalid(format!("{what} must be positive")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every parameter, including all divisibility constraints.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid(format!("unsupported schema version {}", self.schema)));
        }
        match &self.experiment {
            Experiment::Estimate(p) => {
                p.ensemble.validate()?;
                run_config(p.total, p.reuse, p.batches, self.seed).validate()?;
                if let Some(s) = &p.pauli {
                    let pauli: PauliString = s.parse()?;
                    if pauli.qubits() != p.ensemble.n {
                        return Err(Error::DimensionMismatch { expected: p.ensemble.n, found: pauli.qubits() });
                    }
                    if !pauli.is_hermitian() {
                        return Err(invalid("the Pauli observable must be Hermitian"));
                    }
                }
            }
            Experiment::VarianceScan(p) => {
                p.ensemble.validate()?;
                if p.reuse.is_empty() {
                    return Err(invalid("R list is empty"));
                }
                for &r in &p.reuse {
                    run_config(p.total, r, p.batches, self.seed).validate()?;
                    if p.total / r < 4 {
                        return Err(invalid(format!("R = {r} leaves fewer than four circuits")));
                    }
                }
                if p.vstar_circuits < 4 {
                    return Err(invalid("vstar_circuits must be at least 4"));
                }
            }
            Experiment::HomeopathicScan(p) => {
                for &k in &p.k {
                    EnsembleSpec::homeopathic(p.n, k).validate()?;
                }
                if p.k.is_empty() {
                    return Err(invalid("k list is empty"));
                }
                if p.circuits < 4 {
                    return Err(invalid("circuits must be at least 4"));
                }
            }
            Experiment::MomentTable(p) => {
                if p.n.iter().any(|&n| n == 0 || n > 4096) {
                    return Err(invalid("moment-table n must lie in 1..=4096"));
                }
                if p.max_m > 64 {
                    return Err(invalid("max_m must be at most 64"));
                }
            }
            Experiment::TailExperiment(p) => {
                p.ensemble.validate()?;
                if p.samples < 2 {
                    return Err(invalid("need at least two samples"));
                }
                positive("budget", p.options.budget)?;
                positive("batches", p.options.batches)?;
                if p.options.budget % p.options.batches != 0 {
                    return Err(Error::BatchSplit { len: p.options.budget, batches: p.options.batches });
                }
            }
            Experiment::Weingarten(p) => {
                if p.t == 0 || p.t > 4 {
                    return Err(invalid("t must lie in 1..=4"));
                }
                if p.n == 0 || p.n > 32 {
                    return Err(invalid("n must lie in 1..=32"));
                }
            }
            Experiment::OptimalReuse(p) => {
                positive("K", p.batches)?;
                positive("max_reuse", p.max_reuse)?;
                if p.alpha.is_nan() || p.alpha < 1.0 || p.budget.is_nan() || p.budget <= 0.0 {
                    return Err(invalid("need alpha >= 1 and a positive budget"));
                }
                if p.vstar.is_nan() || p.v1.is_nan() || p.vstar < 0.0 || p.v1 < p.vstar {
                    return Err(invalid("need v1 >= vstar >= 0"));
                }
            }
        }
        Ok(())
    }
}

fn run_config(total: usize, reuse: usize, batches: usize, seed: u64) -> RunConfig {
    RunConfig { total, reuse, batches, seed }
}

/// Independent per-task seed.
fn derive_seed(seed: u64, index: u64) -> u64 {
    substream(seed, Purpose::Misc, index).next_u64()
}

/// One empirical quantity paired with its prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub ensemble: String,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "R")]
    pub reuse: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    pub quantity: String,
    pub estimate: f64,
    pub std_error: f64,
    pub theory: Option<f64>,
    pub theory_std_error: Option<f64>,
    pub theory_source: String,
    /// `approx` for predictions, `upper_bound` for bounds.
    pub relation: String,
}

impl ResultRow {
    /// `|estimate - theory|` in combined standard errors, or the excess over
    /// a bound in standard errors of the estimate.
    pub fn deviation_sigmas(&self) -> Option<f64> {
        let theory = self.theory?;
        let se = self.std_error.hypot(self.theory_std_error.unwrap_or(0.0));
        let gap = if self.relation == "upper_bound" {
            (self.estimate - theory).max(0.0)
        } else {
            (self.estimate - theory).abs()
        };
        Some(if gap == 0.0 { 0.0 } else { gap / se })
    }
}

/// Exact moment, `n = None` for the large-`n` limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: String,
    pub m: usize,
    pub numerator: String,
    pub denominator: String,
    pub float_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntryRow {
    pub matrix: String,
    pub group: String,
    pub t: usize,
    pub n: usize,
    pub row: usize,
    pub col: usize,
    pub row_label: String,
    pub col_label: String,
    pub numerator: String,
    pub denominator: String,
    pub float_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    #[serde(flatten)]
    pub estimate: Estimate,
    pub mean: f64,
    pub std_error: f64,
    pub truth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseSummary {
    pub model: CostModel,
    pub v1: f64,
    pub vstar: f64,
    #[serde(flatten)]
    pub choice: ReuseChoice,
}

/// Output of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    Rows(Vec<ResultRow>),
    Moments(Vec<MomentRow>),
    Matrix(Vec<MatrixEntryRow>),
    Estimate(EstimateSummary),
    Tail(TailSummary),
    Reuse(ReuseSummary),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

impl ExperimentOutput {
    /// Tabular outputs default to CSV, summaries to JSON.
    pub fn default_format(&self) -> Format {
        match self {
            ExperimentOutput::Rows(_) | ExperimentOutput::Moments(_) | ExperimentOutput::Matrix(_) => Format::Csv,
            _ => Format::Json,
        }
    }
}

fn stabilizer_pair(n: usize) -> Result<(PreparedState, Observable)> {
    let s = StabilizerTableau::zero_state(n)?;
    Ok((PreparedState::Stabilizer(s.clone()), Observable::StabilizerProjector(s)))
}

/// Runs a validated experiment; deterministic in the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let seed = cfg.seed;
    match &cfg.experiment {
        Experiment::Estimate(p) => run_estimate(p, seed).map(ExperimentOutput::Estimate),
        Experiment::VarianceScan(p) => run_variance_scan(p, seed).map(ExperimentOutput::Rows),
        Experiment::HomeopathicScan(p) => run_homeopathic_scan(p, seed).map(ExperimentOutput::Rows),
        Experiment::MomentTable(p) => Ok(ExperimentOutput::Moments(moment_rows(p))),
        Experiment::TailExperiment(p) => {
            tail_experiment(&p.ensemble, p.samples, seed, &p.options).map(ExperimentOutput::Tail)
        }
        Experiment::Weingarten(p) => matrix_rows(p).map(ExperimentOutput::Matrix),
        Experiment::OptimalReuse(p) => {
            let model =
                CostModel { alpha: p.alpha, budget: p.budget, k: p.k, batches: p.batches, max_reuse: p.max_reuse };
            let choice = optimal_reuse(&model, p.v1, p.vstar)?;
            Ok(ExperimentOutput::Reuse(ReuseSummary { model, v1: p.v1, vstar: p.vstar, choice }))
        }
    }
}

fn run_estimate(p: &EstimateParams, seed: u64) -> Result<EstimateSummary> {
    let n = p.ensemble.n;
    let (state, projector) = stabilizer_pair(n)?;
    let obs = match &p.pauli {
        Some(s) => Observable::Pauli(s.parse()?),
        None => projector,
    };
    let cfg = run_config(p.total, p.reuse, p.batches, seed);
    let values = thrifty_values(&p.ensemble, &state, &obs, &cfg)?;
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
    Ok(EstimateSummary {
        estimate: Estimate {
            estimate: median_of_means(&values, p.batches)?,
            batches: p.batches,
            reuse: p.reuse,
            total: p.total,
            seed,
        },
        mean,
        std_error: (var / count).sqrt(),
        truth: traces(&obs, &state)?.tr_rho_o,
    })
}

fn exact_vstar(kind: EnsembleKind, n: usize) -> Result<Option<(f64, &'static str)>> {
    Ok(match kind {
        EnsembleKind::Clifford => Some((to_f64(&vstar_stabilizer_pair(n, Group::Clifford)?), "Vstar_clifford_exact")),
        EnsembleKind::Haar => Some((to_f64(&vstar_stabilizer_pair(n, Group::Unitary)?), "Vstar_haar_exact")),
        EnsembleKind::Homeopathic => None,
    })
}

fn run_variance_scan(p: &VarianceScanParams, seed: u64) -> Result<Vec<ResultRow>> {
    let spec = &p.ensemble;
    let n = spec.n;
    let (state, obs) = stabilizer_pair(n)?;
    let v1 = variance_3design_from_traces(n, &traces(&obs, &state)?);
    let vstar = estimate_vstar(spec, &state, &obs, p.vstar_circuits, derive_seed(seed, 0))?;
    let row = |quantity: &str, reuse: usize, samples: usize| ResultRow {
        experiment: "variance-scan".into(),
        ensemble: spec.kind.name().into(),
        n,
        k: spec.k,
        reuse,
        samples,
        quantity: quantity.into(),
        estimate: f64::NAN,
        std_error: f64::NAN,
        theory: None,
        theory_std_error: None,
        theory_source: String::new(),
        relation: "approx".into(),
    };
    let mut rows = Vec::new();
    let (theory, source) = match exact_vstar(spec.kind, n)? {
        Some((v, s)) => (Some(v), s.to_string()),
        None => (None, String::new()),
    };
    rows.push(ResultRow {
        estimate: vstar.value,
        std_error: vstar.std_error,
        theory,
        theory_source: source,
        ..row("V_star", 0, p.vstar_circuits)
    });
    for (i, &r) in p.reuse.iter().enumerate() {
        let est = estimate_thrifty_variance(spec, &state, &obs, p.total / r, r, derive_seed(seed, 1 + i as u64))?;
        let w = (r as f64 - 1.0) / r as f64;
        rows.push(ResultRow {
            estimate: est.value,
            std_error: est.std_error,
            theory: Some(thrifty_variance_predict(v1, vstar.value, r)?),
            theory_std_error: Some(w * vstar.std_error),
            theory_source: "var_thrift".into(),
            ..row("V_R", r, p.total)
        });
    }
    Ok(rows)
}

fn run_homeopathic_scan(p: &HomeopathicScanParams, seed: u64) -> Result<Vec<ResultRow>> {
    let (state, obs) = stabilizer_pair(p.n)?;
    let tr_o2 = traces(&obs, &state)?.tr_o2;
    p.k.iter()
        .enumerate()
        .map(|(i, &k)| {
            let spec = EnsembleSpec::homeopathic(p.n, k);
            let est = estimate_vstar(&spec, &state, &obs, p.circuits, derive_seed(seed, i as u64))?;
            Ok(ResultRow {
                experiment: "homeopathic-scan".into(),
                ensemble: spec.kind.name().into(),
                n: p.n,
                k,
                reuse: 0,
                samples: p.circuits,
                quantity: "V_star".into(),
                estimate: est.value,
                std_error: est.std_error,
                theory: Some(vstar_bound(tr_o2, k, p.n, &p.constants)),
                theory_std_error: None,
                theory_source: "tcount_bound".into(),
                relation: "upper_bound".into(),
            })
        })
        .collect()
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn moment_rows(p: &MomentTableParams) -> Vec<MomentRow> {
    let mut rows = Vec::new();
    for &n in &p.n {
        for m in 0..=p.max_m {
            let v = clifford_moment(n, m);
            rows.push(MomentRow {
                n: n.to_string(),
                m,
                numerator: v.numer().to_string(),
                denominator: v.denom().to_string(),
                float_value: to_f64(&v),
            });
        }
    }
    if p.limit {
        for m in 0..=p.max_m {
            let v = limiting_moment(m);
            rows.push(MomentRow {
                n: "inf".into(),
                m,
                numerator: v.to_string(),
                denominator: "1".into(),
                float_value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    rows
}

fn matrix_rows(p: &WeingartenParams) -> Result<Vec<MatrixEntryRow>> {
    let mut mats = Vec::new();
    if matches!(p.matrix, MatrixKind::Gram | MatrixKind::Both) {
        mats.push(("gram", gram_matrix(p.t, p.n, p.group)?));
    }
    if matches!(p.matrix, MatrixKind::Weingarten | MatrixKind::Both) {
        mats.push(("weingarten", weingarten_matrix(p.t, p.n, p.group)?));
    }
    let mut rows = Vec::new();
    for (name, m) in mats {
        let size = m.matrix.size();
        for i in 0..size {
            for j in 0..size {
                let v = m.matrix.get(i, j);
                rows.push(MatrixEntryRow {
                    matrix: name.into(),
                    group: p.group.name().into(),
                    t: p.t,
                    n: p.n,
                    row: i,
                    col: j,
                    row_label: m.labels[i].to_string(),
                    col_label: m.labels[j].to_string(),
                    numerator: v.numer().to_string(),
                    denominator: v.denom().to_string(),
                    float_value: to_f64(v),
                });
            }
        }
    }
    Ok(rows)
}

/// Floats with 17 significant digits; non-finite values as `NaN`, `inf`, `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// Fixed-column CSV encoding.
pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

impl CsvRow for ResultRow {
    const HEADER: &'static [&'static str] = &[
        "experiment",
        "ensemble",
        "n",
        "k",
        "R",
        "N",
        "quantity",
        "estimate",
        "std_error",
        "theory",
        "theory_std_error",
        "theory_source",
        "relation",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.ensemble.clone(),
            self.n.to_string(),
            self.k.to_string(),
            self.reuse.to_string(),
            self.samples.to_string(),
            self.quantity.clone(),
            format_float(self.estimate),
            format_float(self.std_error),
            opt_float(self.theory),
            opt_float(self.theory_std_error),
            self.theory_source.clone(),
            self.relation.clone(),
        ]
    }
}

impl CsvRow for MomentRow {
    const HEADER: &'static [&'static str] = &["n", "m", "numerator", "denominator", "float_value"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.clone(),
            self.m.to_string(),
            self.numerator.clone(),
            self.denominator.clone(),
            format_float(self.float_value),
        ]
    }
}

impl CsvRow for MatrixEntryRow {
    const HEADER: &'static [&'static str] = &[
        "matrix",
        "group",
        "t",
        "n",
        "row",
        "col",
        "row_label",
        "col_label",
        "numerator",
        "denominator",
        "float_value",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.matrix.clone(),
            self.group.clone(),
            self.t.to_string(),
            self.n.to_string(),
            self.row.to_string(),
            self.col.to_string(),
            self.row_label.clone(),
            self.col_label.clone(),
            self.numerator.clone(),
            self.denominator.clone(),
            format_float(self.float_value),
        ]
    }
}

/// Writes rows as CSV; an empty slice gives just the header.
pub fn write_csv<T: CsvRow>(w: impl Write, rows: &[T]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(T::HEADER)?;
    for r in rows {
        out.write_record(r.fields())?;
    }
    out.flush()?;
    Ok(())
}

/// Parses rows written by [`write_csv`].
pub fn read_csv<T: CsvRow + for<'de> Deserialize<'de>>(r: impl Read) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader.headers()?.clone();
    if header.iter().ne(T::HEADER.iter().copied()) {
        return Err(Error::InvalidArgument(format!("unexpected CSV header {header:?}")));
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

fn write_json<T: Serialize>(mut w: impl Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Serialises an experiment output. Summaries are JSON only.
pub fn emit(output: &ExperimentOutput, format: Format, w: impl Write) -> Result<()> {
    match (output, format) {
        (ExperimentOutput::Rows(r), Format::Csv) => write_csv(w, r),
        (ExperimentOutput::Moments(r), Format::Csv) => write_csv(w, r),
        (ExperimentOutput::Matrix(r), Format::Csv) => write_csv(w, r),
        (ExperimentOutput::Rows(r), Format::Json) => write_json(w, r),
        (ExperimentOutput::Moments(r), Format::Json) => write_json(w, r),
        (ExperimentOutput::Matrix(r), Format::Json) => write_json(w, r),
        (ExperimentOutput::Estimate(s), Format::Json) => write_json(w, s),
        (ExperimentOutput::Tail(s), Format::Json) => write_json(w, s),
        (ExperimentOutput::Reuse(s), Format::Json) => write_json(w, s),
        (_, Format::Csv) => Err(Error::Unsupported("this experiment emits a JSON summary only".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(estimate: f64, theory: Option<f64>) -> ResultRow {
        ResultRow {
            experiment: "variance-scan".into(),
            ensemble: "clifford".into(),
            n: 3,
            k: 0,
            reuse: 2,
            samples: 100,
            quantity: "V_R".into(),
            estimate,
            std_error: 0.1,
            theory,
            theory_std_error: None,
            theory_source: "var_thrift".into(),
            relation: "approx".into(),
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_csv::<ResultRow>(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", ResultRow::HEADER.join(",")));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row(0.1 + 0.2, Some(1.0 / 3.0)), row(-1e-300, None), row(f64::NAN, Some(2.0))];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let back: Vec<ResultRow> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back[..2], rows[..2]);
        assert!(back[2].estimate.is_nan());
        let m = moment_rows(&MomentTableParams { n: vec![2], max_m: 3, limit: true });
        let mut buf = Vec::new();
        write_csv(&mut buf, &m).unwrap();
        assert_eq!(read_csv::<MomentRow>(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn config_parsing_and_validation() {
        let text = r#"{"schema":1,"seed":7,"experiment":"variance-scan",
            "ensemble":{"kind":"clifford","n":3},"N":96,"R":[1,2,8],"vstar_circuits":50}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.experiment.name(), "variance-scan");
        let bad = text.replace("[1,2,8]", "[1,5]");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Divisibility { .. })));
        assert!(ExperimentConfig::from_json(&text.replace("\"schema\":1", "\"schema\":2")).is_err());
        let typo = text.replace("vstar_circuits", "vstar_circuit");
        assert!(ExperimentConfig::from_json(&typo).is_err());
    }

    #[test]
    fn moment_table_rows() {
        let rows = moment_rows(&MomentTableParams { n: vec![2], max_m: 2, limit: true });
        assert_eq!(rows[2].numerator, "25");
        assert_eq!(rows[2].denominator, "16");
        assert_eq!(rows.last().unwrap().n, "inf");
        assert_eq!(rows.last().unwrap().numerator, "3");
    }

    #[test]
    fn deviation_in_sigmas() {
        assert_eq!(row(1.0, Some(1.2)).deviation_sigmas().map(|s| (s * 10.0).round()), Some(20.0));
        let mut b = row(1.0, Some(1.2));
        b.relation = "upper_bound".into();
        assert_eq!(b.deviation_sigmas(), Some(0.0));
        assert_eq!(row(1.0, None).deviation_sigmas(), None);
    }
}
