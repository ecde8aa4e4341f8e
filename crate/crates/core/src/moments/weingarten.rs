//! Exact Gram and Weingarten matrices and state averages.

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::perm::{Permutation, MAX_T};
use super::subspace::CommutantLabel;
use crate::dense::C64;
use crate::tableau::StabilizerTableau;
use crate::{Error, Result};

/// Group whose `t`-th moment is described.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Group {
    Unitary,
    Clifford,
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unitary" | "haar" => Ok(Self::Unitary),
            "clifford" => Ok(Self::Clifford),
            other => Err(Error::InvalidArgument(format!("unknown group {other:?}"))),
        }
    }
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::Unitary => "unitary",
            Group::Clifford => "clifford",
        }
    }

    /// Commutant basis labels of the `t`-th tensor power action.
    pub fn labels(self, t: usize) -> Result<Vec<CommutantLabel>> {
        match self {
            Group::Unitary => {
                check_t(t)?;
                Ok(Permutation::all(t).into_iter().map(CommutantLabel::Perm).collect())
            }
            Group::Clifford => CommutantLabel::all(t),
        }
    }
}

fn check_t(t: usize) -> Result<()> {
    if t == 0 || t > MAX_T {
        return Err(Error::InvalidArgument(format!("t = {t} outside 1..=4")));
    }
    Ok(())
}

/// Dense square matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    size: usize,
    data: Vec<BigRational>,
}

impl ExactMatrix {
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut data = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                data.push(f(i, j));
            }
        }
        Self { size, data }
    }

    pub fn identity(size: usize) -> Self {
        Self::from_fn(size, |i, j| if i == j { BigRational::one() } else { BigRational::zero() })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.size + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_fn(self.size, |i, j| {
            (0..self.size).fold(BigRational::zero(), |acc, k| acc + self.get(i, k) * other.get(k, j))
        })
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self { size: self.size, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { size: self.size, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn max_abs(&self) -> BigRational {
        self.data.iter().map(|v| v.abs()).max().unwrap_or_else(BigRational::zero)
    }

    pub fn row_sum(&self, i: usize) -> BigRational {
        (0..self.size).fold(BigRational::zero(), |acc, j| acc + self.get(i, j))
    }

    /// Gauss-Jordan inverse; `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.size;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r * n + col].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[col * n + col].clone();
            for j in 0..n {
                a[col * n + j] = &a[col * n + j] / &p;
                inv[col * n + j] = &inv[col * n + j] / &p;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let f = a[r * n + col].clone();
                for j in 0..n {
                    let da = &f * &a[col * n + j];
                    let di = &f * &inv[col * n + j];
                    a[r * n + j] -= da;
                    inv[r * n + j] -= di;
                }
            }
        }
        Some(Self { size: n, data: inv })
    }
}

pub(crate) fn pow2(e: usize) -> BigRational {
    BigRational::from_integer(BigInt::one() << e)
}

/// Gram or Weingarten matrix with its row/column labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledMatrix {
    pub t: usize,
    pub n: usize,
    pub group: Group,
    pub labels: Vec<CommutantLabel>,
    pub matrix: ExactMatrix,
}

/// `G_{T,T'} = <<R_T|R_T'>>`: `2^{c(pi^-1 pi') n}` for the unitary group and
/// `2^{dim(T ∩ T') n}` for the Clifford group.
pub fn gram_matrix(t: usize, n: usize, group: Group) -> Result<LabelledMatrix> {
    let labels = group.labels(t)?;
    let matrix = match group {
        Group::Unitary => {
            let perms: Vec<&Permutation> = labels
                .iter()
                .map(|l| match l {
                    CommutantLabel::Perm(p) => p,
                    CommutantLabel::PermPi4(_) => unreachable!("unitary labels are permutations"),
                })
                .collect();
            ExactMatrix::from_fn(labels.len(), |i, j| pow2(perms[i].inverse().compose(perms[j]).cycle_count() * n))
        }
        Group::Clifford => {
            let subs: Vec<_> = labels.iter().map(|l| l.subspace()).collect();
            ExactMatrix::from_fn(labels.len(), |i, j| pow2(subs[i].intersection_dim(&subs[j]) * n))
        }
    };
    Ok(LabelledMatrix { t, n, group, labels, matrix })
}

/// Exact inverse of the Gram matrix. It exists for `n >= t - 1`; smaller
/// `n` fails with [`Error::Singular`] whenever the basis is dependent.
pub fn weingarten_matrix(t: usize, n: usize, group: Group) -> Result<LabelledMatrix> {
    let gram = gram_matrix(t, n, group)?;
    let matrix = gram.matrix.inverse().ok_or(Error::Singular { t, n })?;
    Ok(LabelledMatrix { matrix, ..gram })
}

/// Input state of a state average.
#[derive(Debug, Clone)]
pub enum StateInput {
    Pure(Vec<C64>),
    Stabilizer(StabilizerTableau),
}

/// `E[psi^{(x)t}] = coefficient * sum over labels of |R_T>>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateAverage {
    pub t: usize,
    pub n: usize,
    pub group: Group,
    pub labels: Vec<CommutantLabel>,
    pub coefficient: BigRational,
}

/// Uniform coefficient of the `t`-th moment of a random state: `prod 1/(2^n + l)`
/// for Haar, `1/(2^n prod_{l<t-1} (2^n + 2^l))` for Clifford orbits of
/// stabilizer states.
pub fn state_average(t: usize, n: usize, group: Group, input: &StateInput) -> Result<StateAverage> {
    let labels = group.labels(t)?;
    let d = BigInt::one() << n;
    let denom = match group {
        Group::Unitary => (0..t).fold(BigInt::one(), |acc, l| acc * (&d + BigInt::from(l))),
        Group::Clifford => {
            if !matches!(input, StateInput::Stabilizer(_)) {
                return Err(Error::NonStabilizerInput);
            }
            (0..t - 1).fold(d.clone(), |acc, l| acc * (&d + (BigInt::one() << l)))
        }
    };
    let qubits = match input {
        StateInput::Pure(v) => v.len().trailing_zeros() as usize,
        StateInput::Stabilizer(s) => s.qubits(),
    };
    if qubits != n {
        return Err(Error::DimensionMismatch { expected: n, found: qubits });
    }
    Ok(StateAverage { t, n, group, labels, coefficient: BigRational::new(BigInt::one(), denom) })
}
