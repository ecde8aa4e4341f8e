//! Dense complex matrices for small systems.
//!
//! Basis convention: bit `q` of a basis index is the state of qubit `q`.
//! When several copies of an `n`-qubit register are stacked, copy `c`
//! occupies bits `c*n .. (c+1)*n`. Vectorisation is column-major.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::check_qubits;
use crate::{Error, Result, MAX_DENSE_QUBITS};

pub type C64 = Complex64;

/// Largest total qubit count of a dense tensor power.
pub const MAX_TENSOR_QUBITS: usize = 12;

/// Tolerance used by unitarity and state validity checks.
pub const CHECK_TOL: f64 = 1e-10;

/// A `2^n x 2^n` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n: usize,
    mat: DMatrix<C64>,
}

fn qubits_of_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

impl DenseOperator {
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        let n = qubits_of_dim(mat.nrows())?;
        Ok(Self { n, mat })
    }

    pub fn identity(n: usize) -> Self {
        let d = 1usize << n;
        Self { n, mat: DMatrix::identity(d, d) }
    }

    pub fn zeros(n: usize) -> Self {
        let d = 1usize << n;
        Self { n, mat: DMatrix::zeros(d, d) }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        let d = 1usize << n;
        Self { n, mat: DMatrix::from_fn(d, d, f) }
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        let n = qubits_of_dim(diag.len())?;
        Ok(Self { n, mat: DMatrix::from_diagonal(&DVector::from_column_slice(diag)) })
    }

    /// Outer product `|v><v|`.
    pub fn projector(v: &[C64]) -> Result<Self> {
        let n = qubits_of_dim(v.len())?;
        let col = DVector::from_column_slice(v);
        Ok(Self { n, mat: &col * col.adjoint() })
    }

    /// Tensor product of single-qubit matrices; `ops[q]` acts on qubit `q`.
    pub fn from_qubit_ops(ops: &[DMatrix<C64>]) -> Result<Self> {
        let mut acc = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for op in ops.iter().rev() {
            if op.shape() != (2, 2) {
                return Err(Error::DimensionMismatch { expected: 2, found: op.nrows() });
            }
            acc = acc.kronecker(op);
        }
        Self::new(acc)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self { n: self.n, mat: self.mat.adjoint() }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.mat.diagonal().iter().copied().collect()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self { n: self.n, mat: &self.mat * &other.mat })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self { n: self.n, mat: &self.mat + &other.mat })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, mat: &self.mat * s }
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        let out = &self.mat * DVector::from_column_slice(v);
        Ok(out.iter().copied().collect())
    }

    /// `self (x) other` with `self` on the high-order qubits.
    pub fn kron(&self, other: &Self) -> Self {
        Self { n: self.n + other.n, mat: self.mat.kronecker(&other.mat) }
    }

    /// Largest entry of `|U^dag U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.mat.adjoint() * &self.mat;
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        dev
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).camax()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.mat - &other.mat).camax()
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// Single-qubit Pauli matrix for `'I'`, `'X'`, `'Y'` or `'Z'`.
pub fn pauli_matrix(label: char) -> Result<DMatrix<C64>> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let m = match label {
        'I' => [l, o, o, l],
        'X' => [o, l, l, o],
        'Y' => [o, i, -i, o],
        'Z' => [l, o, o, -l],
        other => return Err(Error::PauliParse(format!("unknown Pauli {other:?}"))),
    };
    Ok(DMatrix::from_column_slice(2, 2, &m))
}

/// Hilbert-Schmidt inner product `tr(A^dag B)`.
pub fn hs_inner(a: &DenseOperator, b: &DenseOperator) -> Result<C64> {
    a.same_dim(b)?;
    Ok(a.mat.iter().zip(b.mat.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// `U X U^dag`, rejecting non-unitary `U`.
pub fn conjugation_apply(u: &DenseOperator, x: &DenseOperator) -> Result<DenseOperator> {
    u.same_dim(x)?;
    let deviation = u.unitarity_deviation();
    if deviation > CHECK_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(DenseOperator { n: u.n, mat: &u.mat * &x.mat * u.mat.adjoint() })
}

/// Tensor product of copies; `ops[c]` acts on copy `c` (bits `c*n..`).
pub fn kron_copies(ops: &[&DenseOperator]) -> Result<DenseOperator> {
    let total: usize = ops.iter().map(|o| o.n).sum();
    check_qubits("dense tensor product", total, MAX_TENSOR_QUBITS)?;
    let mut acc = DenseOperator { n: 0, mat: DMatrix::from_element(1, 1, C64::new(1.0, 0.0)) };
    for op in ops.iter().rev() {
        acc = acc.kron(op);
    }
    Ok(acc)
}

/// `X^{(x) t}` subject to the dense size budget.
pub fn tensor_power(x: &DenseOperator, t: usize) -> Result<DenseOperator> {
    check_qubits("dense tensor power", x.n * t, MAX_TENSOR_QUBITS)?;
    let copies = vec![x; t];
    kron_copies(&copies)
}

/// Column-major vectorisation `|X>>`.
pub fn vectorize(x: &DenseOperator) -> DVector<C64> {
    DVector::from_column_slice(x.mat.as_slice())
}

pub fn devectorize(v: &DVector<C64>) -> Result<DenseOperator> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::InvalidArgument(format!("vector of length {} is not a vectorised square matrix", v.len())));
    }
    DenseOperator::new(DMatrix::from_column_slice(d, d, v.as_slice()))
}

/// Liouville representation `conj(U) (x) U`, so that
/// `vec(U X U^dag) = liouville(U) vec(X)`.
pub fn liouville(u: &DenseOperator) -> DMatrix<C64> {
    u.mat.map(|z| z.conj()).kronecker(&u.mat)
}

/// Born-rule probabilities of a density matrix in the computational basis.
pub fn born_probabilities(rho: &DenseOperator) -> Result<Vec<f64>> {
    let herm = rho.hermiticity_deviation();
    if herm > 1e-8 {
        return Err(Error::InvalidState(format!("not Hermitian ({herm:e})")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::InvalidState(format!("trace {tr} != 1")));
    }
    let probs: Vec<f64> = rho.diagonal().iter().map(|z| z.re).collect();
    if let Some(p) = probs.iter().find(|&&p| p < -1e-12) {
        return Err(Error::InvalidState(format!("negative probability {p}")));
    }
    Ok(probs.into_iter().map(|p| p.max(0.0)).collect())
}

/// Draw a computational-basis outcome from a density matrix.
pub fn born_sample<R: Rng + ?Sized>(rho: &DenseOperator, rng: &mut R) -> Result<u64> {
    let probs = born_probabilities(rho)?;
    Ok(CumulativeTable::new(&probs).sample(rng))
}

/// Inverse-CDF sampler over a finite distribution.
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    cumulative: Vec<f64>,
}

impl CumulativeTable {
    pub fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cumulative }
    }

    /// One uniform draw per sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cumulative.last().expect("empty distribution");
        let u: f64 = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        let idx = idx.min(self.cumulative.len() - 1);
        // skip zero-probability tail entries that rounding may select
        let mut i = idx;
        while i > 0 && self.cumulative[i] == self.cumulative[i - 1] {
            i -= 1;
        }
        i as u64
    }
}

/// Computational basis vector `|x>` on `n` qubits.
pub fn basis_vector(n: usize, x: u64) -> Result<Vec<C64>> {
    check_qubits("dense state vector", n, MAX_DENSE_QUBITS)?;
    let mut v = vec![C64::new(0.0, 0.0); 1 << n];
    v[x as usize] = C64::new(1.0, 0.0);
    Ok(v)
}

/// `n`-bit outcome printed with qubit 0 first.
pub fn format_bitstring(x: u64, n: usize) -> String {
    (0..n).map(|q| if (x >> q) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bitstring(s: &str) -> Result<u64> {
    if s.len() > 64 {
        return Err(Error::InvalidArgument(format!("bitstring too long: {s}")));
    }
    s.chars().enumerate().try_fold(0u64, |acc, (q, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | (1 << q)),
        _ => Err(Error::InvalidArgument(format!("bad bitstring {s:?}"))),
    })
}
