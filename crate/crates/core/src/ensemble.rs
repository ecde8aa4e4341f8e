//! Random circuit ensembles, circuit descriptors and frame operators.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordElement;
use crate::dense::{basis_vector, DenseOperator, C64};
use crate::error::check_qubits;
use crate::par;
use crate::pauli::PauliString;
use crate::rng::{substream, Purpose, StreamRng};
use crate::{Error, Result, MAX_DENSE_QUBITS, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Clifford,
    Haar,
    Homeopathic,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Clifford => "clifford",
            EnsembleKind::Haar => "haar",
            EnsembleKind::Homeopathic => "homeopathic",
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clifford" => Ok(Self::Clifford),
            "haar" => Ok(Self::Haar),
            "homeopathic" => Ok(Self::Homeopathic),
            other => Err(Error::InvalidArgument(format!("unknown ensemble {other:?}"))),
        }
    }
}

/// Ensemble of `n`-qubit circuits. `k` is the number of T gates and is
/// only meaningful for the homeopathic ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    #[serde(default)]
    pub k: usize,
}

impl EnsembleSpec {
    pub fn clifford(n: usize) -> Self {
        Self { kind: EnsembleKind::Clifford, n, k: 0 }
    }

    pub fn haar(n: usize) -> Self {
        Self { kind: EnsembleKind::Haar, n, k: 0 }
    }

    pub fn homeopathic(n: usize, k: usize) -> Self {
        Self { kind: EnsembleKind::Homeopathic, n, k }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("ensemble needs at least one qubit".into()));
        }
        match self.kind {
            EnsembleKind::Clifford => check_qubits("Clifford ensemble", self.n, MAX_QUBITS),
            EnsembleKind::Haar => check_qubits("Haar ensemble", self.n, MAX_DENSE_QUBITS),
            EnsembleKind::Homeopathic => check_qubits("homeopathic ensemble", self.n, MAX_DENSE_QUBITS),
        }
    }
}

/// One step of a circuit program.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment<'a> {
    Clifford(&'a CliffordElement),
    /// T gate on qubit 0.
    T,
    Dense(&'a DenseOperator),
}

/// A circuit drawn from an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub enum SampledCircuit {
    Clifford(CliffordElement),
    Haar(DenseOperator),
    /// `C_k T C_{k-1} ... T C_0`, with the T gates on qubit 0.
    Homeopathic(Vec<CliffordElement>),
}

/// Apply a T gate to qubit 0 of a state vector.
pub fn apply_t_qubit0(psi: &mut [C64]) {
    let w = C64::from_polar(1.0, FRAC_PI_4);
    for (x, a) in psi.iter_mut().enumerate() {
        if x & 1 == 1 {
            *a *= w;
        }
    }
}

impl SampledCircuit {
    pub fn qubits(&self) -> usize {
        match self {
            SampledCircuit::Clifford(c) => c.qubits(),
            SampledCircuit::Haar(u) => u.qubits(),
            SampledCircuit::Homeopathic(cs) => cs[0].qubits(),
        }
    }

    pub fn kind(&self) -> EnsembleKind {
        match self {
            SampledCircuit::Clifford(_) => EnsembleKind::Clifford,
            SampledCircuit::Haar(_) => EnsembleKind::Haar,
            SampledCircuit::Homeopathic(_) => EnsembleKind::Homeopathic,
        }
    }

    pub fn t_count(&self) -> usize {
        match self {
            SampledCircuit::Homeopathic(cs) => cs.len() - 1,
            _ => 0,
        }
    }

    pub fn as_clifford(&self) -> Option<&CliffordElement> {
        match self {
            SampledCircuit::Clifford(c) => Some(c),
            _ => None,
        }
    }

    /// Gates in application order.
    pub fn program(&self) -> Vec<Segment<'_>> {
        match self {
            SampledCircuit::Clifford(c) => vec![Segment::Clifford(c)],
            SampledCircuit::Haar(u) => vec![Segment::Dense(u)],
            SampledCircuit::Homeopathic(cs) => {
                let mut out = vec![Segment::Clifford(&cs[0])];
                for c in &cs[1..] {
                    out.push(Segment::T);
                    out.push(Segment::Clifford(c));
                }
                out
            }
        }
    }

    pub fn apply_to_vector(&self, psi: &[C64]) -> Result<Vec<C64>> {
        let mut state = psi.to_vec();
        for seg in self.program() {
            match seg {
                Segment::Clifford(c) => state = c.apply_to_vector(&state)?,
                Segment::Dense(u) => state = u.apply(&state)?,
                Segment::T => apply_t_qubit0(&mut state),
            }
        }
        Ok(state)
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        match self {
            SampledCircuit::Clifford(c) => c.to_dense(),
            SampledCircuit::Haar(u) => Ok(u.clone()),
            SampledCircuit::Homeopathic(_) => {
                let n = self.qubits();
                check_qubits("dense circuit", n, MAX_DENSE_QUBITS)?;
                let d = 1usize << n;
                let mut m = DMatrix::zeros(d, d);
                for x in 0..d {
                    let col = self.apply_to_vector(&basis_vector(n, x as u64)?)?;
                    m.set_column(x, &nalgebra::DVector::from_vec(col));
                }
                DenseOperator::new(m)
            }
        }
    }

    /// Hex descriptor; see [`Self::from_descriptor`] for the layout.
    pub fn descriptor(&self) -> String {
        let mut w = BitWriter::default();
        let n = self.qubits();
        match self {
            SampledCircuit::Clifford(c) => {
                w.bytes(&[0, n as u8]);
                write_clifford(&mut w, c);
            }
            SampledCircuit::Haar(u) => {
                w.bytes(&[1, n as u8]);
                for z in u.matrix().iter() {
                    w.bytes(&z.re.to_le_bytes());
                    w.bytes(&z.im.to_le_bytes());
                }
            }
            SampledCircuit::Homeopathic(cs) => {
                w.bytes(&[2, n as u8]);
                w.bytes(&((cs.len() - 1) as u32).to_le_bytes());
                for c in cs {
                    write_clifford(&mut w, c);
                }
            }
        }
        hex::encode(w.finish())
    }

    /// Parse a descriptor.
    ///
    /// Layout: kind byte (0 Clifford, 1 Haar, 2 homeopathic), qubit count
    /// byte, then the body. A Clifford block is its `2n x 2n` symplectic
    /// matrix row-major (each row: `x` bits then `z` bits) followed by `2n`
    /// sign bits, packed LSB-first and padded to a byte. A Haar body is the
    /// unitary column-major as little-endian `f64` pairs. A homeopathic body
    /// is the T count as `u32` followed by `k + 1` Clifford blocks.
    pub fn from_descriptor(s: &str) -> Result<Self> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::Descriptor(e.to_string()))?;
        let mut r = BitReader::new(&bytes);
        let kind = r.byte()?;
        let n = r.byte()? as usize;
        if n == 0 {
            return Err(Error::Descriptor("zero qubits".into()));
        }
        let circuit = match kind {
            0 => {
                check_qubits("Clifford descriptor", n, MAX_QUBITS)?;
                SampledCircuit::Clifford(read_clifford(&mut r, n)?)
            }
            1 => {
                check_qubits("Haar descriptor", n, MAX_DENSE_QUBITS)?;
                let d = 1usize << n;
                let mut entries = Vec::with_capacity(d * d);
                for _ in 0..d * d {
                    let re = f64::from_le_bytes(r.array()?);
                    let im = f64::from_le_bytes(r.array()?);
                    entries.push(C64::new(re, im));
                }
                SampledCircuit::Haar(DenseOperator::new(DMatrix::from_vec(d, d, entries))?)
            }
            2 => {
                check_qubits("homeopathic descriptor", n, MAX_DENSE_QUBITS)?;
                let k = u32::from_le_bytes(r.array()?) as usize;
                let blocks = (0..=k).map(|_| read_clifford(&mut r, n)).collect::<Result<Vec<_>>>()?;
                SampledCircuit::Homeopathic(blocks)
            }
            other => return Err(Error::Descriptor(format!("unknown circuit kind {other}"))),
        };
        if !r.at_end() {
            return Err(Error::Descriptor("trailing bytes".into()));
        }
        Ok(circuit)
    }
}

fn write_clifford(w: &mut BitWriter, c: &CliffordElement) {
    let n = c.qubits();
    for (x, z) in c.symplectic() {
        for q in 0..n {
            w.bit((x >> q) & 1 == 1);
        }
        for q in 0..n {
            w.bit((z >> q) & 1 == 1);
        }
    }
    for s in c.signs() {
        w.bit(s);
    }
    w.align();
}

fn read_clifford(r: &mut BitReader<'_>, n: usize) -> Result<CliffordElement> {
    let mut rows = Vec::with_capacity(2 * n);
    for _ in 0..2 * n {
        let mut x = 0u64;
        let mut z = 0u64;
        for q in 0..n {
            x |= (r.bit()? as u64) << q;
        }
        for q in 0..n {
            z |= (r.bit()? as u64) << q;
        }
        rows.push((x, z));
    }
    let signs = (0..2 * n).map(|_| r.bit()).collect::<Result<Vec<_>>>()?;
    r.align();
    CliffordElement::from_symplectic(n, &rows, &signs).map_err(|e| Error::Descriptor(e.to_string()))
}

#[derive(Default)]
struct BitWriter {
    out: Vec<u8>,
    used: u8,
}

impl BitWriter {
    fn bit(&mut self, b: bool) {
        if self.used == 0 {
            self.out.push(0);
        }
        if b {
            *self.out.last_mut().expect("pushed above") |= 1 << self.used;
        }
        self.used = (self.used + 1) % 8;
    }

    fn align(&mut self) {
        self.used = 0;
    }

    fn bytes(&mut self, b: &[u8]) {
        self.align();
        self.out.extend_from_slice(b);
    }

    fn finish(self) -> Vec<u8> {
        self.out
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    bit: u8,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0, bit: 0 }
    }

    fn truncated() -> Error {
        Error::Descriptor("truncated descriptor".into())
    }

    fn align(&mut self) {
        if self.bit != 0 {
            self.bit = 0;
            self.pos += 1;
        }
    }

    fn bit(&mut self) -> Result<bool> {
        let byte = *self.data.get(self.pos).ok_or_else(Self::truncated)?;
        let b = (byte >> self.bit) & 1 == 1;
        self.bit += 1;
        if self.bit == 8 {
            self.bit = 0;
            self.pos += 1;
        }
        Ok(b)
    }

    fn byte(&mut self) -> Result<u8> {
        self.align();
        let b = *self.data.get(self.pos).ok_or_else(Self::truncated)?;
        self.pos += 1;
        Ok(b)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        self.align();
        let slice = self.data.get(self.pos..self.pos + N).ok_or_else(Self::truncated)?;
        self.pos += N;
        Ok(slice.try_into().expect("length checked"))
    }

    fn at_end(&self) -> bool {
        self.pos == self.data.len() && self.bit == 0
    }
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DenseOperator> {
    check_qubits("Haar unitary", n, MAX_DENSE_QUBITS)?;
    let d = 1usize << n;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    DenseOperator::new(q)
}

/// Anything that produces random circuits of a fixed width.
pub trait CircuitSource: Sync {
    fn qubits(&self) -> usize;
    fn sample(&self, rng: &mut StreamRng) -> Result<SampledCircuit>;
}

impl CircuitSource for EnsembleSpec {
    fn qubits(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut StreamRng) -> Result<SampledCircuit> {
        sample_circuit(self, rng)
    }
}

/// A source that always returns the same circuit.
#[derive(Debug, Clone)]
pub struct FixedCircuit(pub SampledCircuit);

impl CircuitSource for FixedCircuit {
    fn qubits(&self) -> usize {
        self.0.qubits()
    }

    fn sample(&self, _rng: &mut StreamRng) -> Result<SampledCircuit> {
        Ok(self.0.clone())
    }
}

pub fn sample_circuit<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<SampledCircuit> {
    spec.validate()?;
    Ok(match spec.kind {
        EnsembleKind::Clifford => SampledCircuit::Clifford(CliffordElement::random(spec.n, rng)?),
        EnsembleKind::Haar => SampledCircuit::Haar(haar_unitary(spec.n, rng)?),
        EnsembleKind::Homeopathic => SampledCircuit::Homeopathic(
            (0..=spec.k).map(|_| CliffordElement::random(spec.n, rng)).collect::<Result<_>>()?,
        ),
    })
}

/// `F^{-1}(X) = (2^n + 1) X - tr(X) I`.
pub fn inverse_frame_apply(x: &DenseOperator) -> DenseOperator {
    let d = x.dim() as f64;
    let tr = x.trace();
    let scaled = x.scale(C64::new(d + 1.0, 0.0));
    let id = DenseOperator::identity(x.qubits()).scale(tr);
    scaled.add(&id.scale(C64::new(-1.0, 0.0))).expect("same dimension")
}

/// Frame operator of any unitary 2-design: `(|I>><<I| + 1) / (2^n + 1)`
/// in the Liouville representation.
pub fn frame_operator_two_design(n: usize) -> Result<DMatrix<C64>> {
    check_qubits("frame operator", n, 5)?;
    let d = 1usize << n;
    let dd = d * d;
    let mut f = DMatrix::identity(dd, dd);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + i, j * d + j)] += C64::new(1.0, 0.0);
        }
    }
    Ok(f / C64::new(d as f64 + 1.0, 0.0))
}

/// `sum_x |U^dag x>><<U^dag x|` for a single unitary.
fn frame_term(u: &DenseOperator) -> DMatrix<C64> {
    let d = u.dim();
    let mut acc = DMatrix::zeros(d * d, d * d);
    for x in 0..d {
        // w = U^dag |x>, vec(w w^dag) = conj(w) (x) w
        let w: Vec<C64> = (0..d).map(|j| u.get(x, j).conj()).collect();
        let v: Vec<C64> = (0..d * d).map(|idx| w[idx / d].conj() * w[idx % d]).collect();
        for (a, va) in v.iter().enumerate() {
            for (b, vb) in v.iter().enumerate() {
                acc[(a, b)] += va * vb.conj();
            }
        }
    }
    acc
}

/// Exact frame operator of the Clifford group by enumeration (`n <= 2`).
pub fn frame_operator_clifford_exact(n: usize) -> Result<DMatrix<C64>> {
    let all = CliffordElement::enumerate(n)?;
    let d = 1usize << n;
    let mut acc = DMatrix::zeros(d * d, d * d);
    for c in &all {
        acc += frame_term(&c.to_dense()?);
    }
    Ok(acc / C64::new(all.len() as f64, 0.0))
}

/// Monte-Carlo frame operator with entrywise standard errors.
#[derive(Debug, Clone)]
pub struct FrameEstimate {
    pub mean: DMatrix<C64>,
    /// Standard errors of the real and imaginary parts, combined in quadrature.
    pub std_error: DMatrix<f64>,
    pub samples: usize,
}

pub fn frame_operator_empirical(source: &impl CircuitSource, samples: usize, seed: u64) -> Result<FrameEstimate> {
    let n = source.qubits();
    check_qubits("frame operator", n, 5)?;
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let dd = 1usize << (2 * n);
    let chunks = par::map_chunks(samples, 4096, |range| -> Result<(DMatrix<C64>, DMatrix<f64>)> {
        let mut sum = DMatrix::zeros(dd, dd);
        let mut sq = DMatrix::zeros(dd, dd);
        for i in range {
            let mut rng = substream(seed, Purpose::FrameOperator, i as u64);
            let term = frame_term(&source.sample(&mut rng)?.to_dense()?);
            sq += term.map(|z| z.norm_sqr());
            sum += term;
        }
        Ok((sum, sq))
    });
    let mut sum = DMatrix::zeros(dd, dd);
    let mut sq = DMatrix::zeros(dd, dd);
    for c in chunks {
        let (s, q) = c?;
        sum += s;
        sq += q;
    }
    let m = samples as f64;
    let mean = sum / C64::new(m, 0.0);
    let std_error = DMatrix::from_fn(dd, dd, |i, j| {
        let var = (sq[(i, j)] / m - mean[(i, j)].norm_sqr()).max(0.0) * m / (m - 1.0);
        (var / m).sqrt()
    });
    Ok(FrameEstimate { mean, std_error, samples })
}

/// `E[U (x) conj(U)]` estimated from `samples` draws.
pub fn first_moment_empirical(source: &impl CircuitSource, samples: usize, seed: u64) -> Result<DMatrix<C64>> {
    let n = source.qubits();
    check_qubits("first moment", n, 5)?;
    let dd = 1usize << (2 * n);
    let parts = par::map_chunks(samples, 4096, |range| -> Result<DMatrix<C64>> {
        let mut acc = DMatrix::zeros(dd, dd);
        for i in range {
            let mut rng = substream(seed, Purpose::Misc, i as u64);
            let u = source.sample(&mut rng)?.to_dense()?;
            acc += u.matrix().kronecker(&u.matrix().map(|z| z.conj()));
        }
        Ok(acc)
    });
    let mut acc = DMatrix::zeros(dd, dd);
    for p in parts {
        acc += p?;
    }
    Ok(acc / C64::new(samples as f64, 0.0))
}

/// Pauli-basis check of the shadow channel: `F^{-1}` inverts the 2-design
/// frame operator on the Pauli string `p`.
pub fn frame_inverse_residual(p: &PauliString) -> Result<f64> {
    let n = p.qubits();
    let f = frame_operator_two_design(n)?;
    let op = p.to_dense()?;
    let image = crate::dense::devectorize(&(f * crate::dense::vectorize(&op)))?;
    Ok(inverse_frame_apply(&image).max_abs_diff(&op))
}
