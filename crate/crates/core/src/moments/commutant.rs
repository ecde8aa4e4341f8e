//! Commutant operators on `t` copies of an `n`-qubit register.
//!
//! Copy `c` occupies bits `c*n .. (c+1)*n` of a basis index, matching
//! [`crate::dense::kron_copies`].

use std::collections::HashMap;

use nalgebra::DMatrix;

use super::perm::Permutation;
use super::subspace::{CommutantLabel, SubspaceT};
use crate::dense::{DenseOperator, C64, MAX_TENSOR_QUBITS};
use crate::error::check_qubits;
use crate::pauli::PauliString;
use crate::{Error, Result};

/// Column-sparse operator on `2^qubits` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    qubits: usize,
    cols: Vec<Vec<(u32, C64)>>,
}

impl SparseOperator {
    fn from_map(qubits: usize, map: HashMap<(u32, u32), C64>) -> Self {
        let mut cols = vec![Vec::new(); 1 << qubits];
        for ((r, c), v) in map {
            if v.norm() > 1e-14 {
                cols[c as usize].push((r, v));
            }
        }
        for col in cols.iter_mut() {
            col.sort_by_key(|e| e.0);
        }
        Self { qubits, cols }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.cols[col].iter().find(|e| e.0 as usize == row).map_or(C64::new(0.0, 0.0), |e| e.1)
    }

    pub fn trace(&self) -> C64 {
        (0..self.cols.len()).map(|c| self.get(c, c)).sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut map: HashMap<(u32, u32), C64> = HashMap::new();
        for (c, col) in other.cols.iter().enumerate() {
            for &(k, v) in col {
                for &(r, w) in &self.cols[k as usize] {
                    *map.entry((r, c as u32)).or_default() += w * v;
                }
            }
        }
        Self::from_map(self.qubits, map)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            qubits: self.qubits,
            cols: self.cols.iter().map(|col| col.iter().map(|&(r, v)| (r, v * s)).collect()).collect(),
        }
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut map: HashMap<(u32, u32), C64> = HashMap::new();
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                *map.entry((r, c as u32)).or_default() += v;
            }
        }
        for (c, col) in other.cols.iter().enumerate() {
            for &(r, v) in col {
                *map.entry((r, c as u32)).or_default() -= v;
            }
        }
        map.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        check_qubits("dense commutant operator", self.qubits, MAX_TENSOR_QUBITS)?;
        let d = 1usize << self.qubits;
        let mut m = DMatrix::zeros(d, d);
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                m[(r as usize, c)] = v;
            }
        }
        DenseOperator::new(m)
    }
}

fn check_budget(t: usize, n: usize) -> Result<()> {
    check_qubits("commutant operator", t * n, MAX_TENSOR_QUBITS)
}

/// Scatter a per-qubit `t`-bit string into the copy-major layout.
fn spread(bits: u16, q: usize, n: usize, t: usize) -> u32 {
    (0..t).fold(0u32, |acc, c| acc | ((((bits >> c) & 1) as u32) << (c * n + q)))
}

/// Visit every `(X, Y)` with `(x_q, y_q) in T` for each qubit `q`.
fn for_each_pair(t_sub: &SubspaceT, n: usize, mut visit: impl FnMut(u32, u32)) {
    let t = t_sub.t();
    let mask = (1u16 << t) - 1;
    let elems = t_sub.elements();
    let mut idx = vec![0usize; n];
    loop {
        let (mut x, mut y) = (0u32, 0u32);
        for (q, &i) in idx.iter().enumerate() {
            let v = elems[i];
            x |= spread(v & mask, q, n, t);
            y |= spread(v >> t, q, n, t);
        }
        visit(x, y);
        let mut q = 0;
        loop {
            if q == n {
                return;
            }
            idx[q] += 1;
            if idx[q] < elems.len() {
                break;
            }
            idx[q] = 0;
            q += 1;
        }
    }
}

/// `R_T = r_T^{(x) n}` from the subspace.
pub fn r_t_sparse(t_sub: &SubspaceT, n: usize) -> Result<SparseOperator> {
    check_budget(t_sub.t(), n)?;
    let qubits = t_sub.t() * n;
    let mut cols = vec![Vec::new(); 1 << qubits];
    for_each_pair(t_sub, n, |x, y| cols[y as usize].push((x, C64::new(1.0, 0.0))));
    for col in cols.iter_mut() {
        col.sort_by_key(|e| e.0);
    }
    Ok(SparseOperator { qubits, cols })
}

/// Copy permutation `R_pi`.
pub fn r_pi_sparse(pi: &Permutation, n: usize) -> Result<SparseOperator> {
    let t = pi.degree();
    check_budget(t, n)?;
    let copy_mask = (1u32 << n) - 1;
    let cols = (0..1u32 << (t * n))
        .map(|y| {
            let x = (0..t).fold(0u32, |acc, c| acc | (((y >> (c * n)) & copy_mask) << (pi.image(c) * n)));
            vec![(x, C64::new(1.0, 0.0))]
        })
        .collect();
    Ok(SparseOperator { qubits: t * n, cols })
}

/// `Π_4 = 2^-n sum_P P^{(x)4}` summed over Hermitian Pauli strings.
pub fn pi4_sparse(n: usize) -> Result<SparseOperator> {
    check_budget(4, n)?;
    let norm = (-(n as f64)).exp2();
    let mut map: HashMap<(u32, u32), C64> = HashMap::new();
    for xz in 0..(1u64 << (2 * n)) {
        let p = PauliString::hermitian(n, xz & ((1 << n) - 1), xz >> n, false);
        for y in 0..1u32 << (4 * n) {
            let mut coeff = C64::new(norm, 0.0);
            let mut x = 0u32;
            for c in 0..4 {
                let (v, img) = p.apply_basis(((y >> (c * n)) & ((1 << n) - 1)) as u64);
                coeff *= v;
                x |= (img as u32) << (c * n);
            }
            *map.entry((x, y)).or_default() += coeff;
        }
    }
    Ok(SparseOperator::from_map(4 * n, map))
}

pub fn r_pi_matrix(pi: &Permutation, n: usize) -> Result<DenseOperator> {
    r_pi_sparse(pi, n)?.to_dense()
}

pub fn r_t_matrix(t_sub: &SubspaceT, n: usize) -> Result<DenseOperator> {
    r_t_sparse(t_sub, n)?.to_dense()
}

pub fn pi4_matrix(n: usize) -> Result<DenseOperator> {
    pi4_sparse(n)?.to_dense()
}

/// Commutant element built from the group decomposition: `R_pi` or `R_pi Π_4`.
pub fn label_operator_product(label: &CommutantLabel, n: usize) -> Result<SparseOperator> {
    match label {
        CommutantLabel::Perm(p) => r_pi_sparse(p, n),
        CommutantLabel::PermPi4(p) => Ok(r_pi_sparse(p, n)?.mul(&pi4_sparse(n)?)),
    }
}

/// `<<R_T | A_1 (x) ... (x) A_t>> = sum over T^n of prod_c A_c[x_c, y_c]`.
pub fn rt_inner_product(t_sub: &SubspaceT, factors: &[&DenseOperator]) -> Result<C64> {
    let t = t_sub.t();
    if factors.len() != t {
        return Err(Error::DimensionMismatch { expected: t, found: factors.len() });
    }
    let n = factors[0].qubits();
    if factors.iter().any(|f| f.qubits() != n) {
        return Err(Error::InvalidArgument("factors differ in size".into()));
    }
    check_budget(t, n)?;
    let copy_mask = (1u32 << n) - 1;
    let mut total = C64::new(0.0, 0.0);
    for_each_pair(t_sub, n, |x, y| {
        let mut prod = C64::new(1.0, 0.0);
        for (c, f) in factors.iter().enumerate() {
            let r = ((x >> (c * n)) & copy_mask) as usize;
            let s = ((y >> (c * n)) & copy_mask) as usize;
            prod *= f.get(r, s);
        }
        total += prod;
    });
    Ok(total)
}

/// `<<R_T | T^{(x)t} R_T' T^{dag (x)t}>>` from dense matrices built by the
/// product route, with the T gate on qubit 0 of every copy.
pub fn tgate_sandwich_dense(a: &CommutantLabel, b: &CommutantLabel, n: usize) -> Result<C64> {
    let ra = label_operator_product(a, n)?;
    let rb = label_operator_product(b, n)?;
    let t = a.t();
    let phase = |idx: u32| {
        let ones = (0..t).filter(|c| (idx >> (c * n)) & 1 == 1).count();
        C64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * ones as f64)
    };
    let mut total = C64::new(0.0, 0.0);
    for y in 0..1usize << (t * n) {
        for &(x, v) in &rb.cols[y] {
            let u = ra.get(x as usize, y);
            total += u.conj() * phase(x) * v * phase(y as u32).conj();
        }
    }
    Ok(total)
}
