//! Bit-packed Pauli operators `i^phase X^x Z^z`.

use std::fmt;

use num_complex::Complex64;

use crate::dense::{DenseOperator, C64};
use crate::error::check_qubits;
use crate::{Error, Result, MAX_DENSE_QUBITS, MAX_QUBITS};

/// The operator `i^phase * prod_q X_q^{x_q} Z_q^{z_q}` on `n` qubits.
///
/// Bit `q` of `x` and `z` refers to qubit `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn new(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        check_qubits("Pauli string", n, MAX_QUBITS)?;
        if (x | z) & !mask(n) != 0 {
            return Err(Error::InvalidArgument(format!("Pauli bits exceed {n} qubits")));
        }
        Ok(Self { n, x, z, phase: phase & 3 })
    }

    pub(crate) fn from_parts(n: usize, x: u64, z: u64, phase: u8) -> Self {
        debug_assert!((x | z) & !mask(n) == 0);
        Self { n, x, z, phase: phase & 3 }
    }

    /// Hermitian Pauli `(-1)^sign X^x Z^z` with the `i` factors of any `Y`s absorbed.
    pub fn hermitian(n: usize, x: u64, z: u64, sign: bool) -> Self {
        let base = ((x & z).count_ones() & 3) as u8;
        Self::from_parts(n, x, z, base + if sign { 2 } else { 0 })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(n, 0, 0, 0)
    }

    pub fn single(n: usize, qubit: usize, label: char) -> Result<Self> {
        if qubit >= n {
            return Err(Error::InvalidArgument(format!("qubit {qubit} out of range for {n} qubits")));
        }
        let b = 1u64 << qubit;
        let (x, z) = match label {
            'I' => (0, 0),
            'X' => (b, 0),
            'Y' => (b, b),
            'Z' => (0, b),
            other => return Err(Error::PauliParse(format!("unknown Pauli {other:?}"))),
        };
        Ok(Self::hermitian(n, x, z, false))
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase as u32 + (self.x & self.z).count_ones()).is_multiple_of(2)
    }

    /// For a Hermitian string, whether it equals minus the canonical
    /// Hermitian Pauli with the same letters.
    pub fn sign(&self) -> bool {
        let base = (self.x & self.z).count_ones() as u8 & 3;
        (self.phase + 4 - base) & 3 == 2
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let swap = 2 * (self.z & other.x).count_ones() as u8;
        Self::from_parts(self.n, self.x ^ other.x, self.z ^ other.z, (self.phase + other.phase + (swap & 3)) & 3)
    }

    pub fn neg(&self) -> Self {
        Self::from_parts(self.n, self.x, self.z, self.phase + 2)
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    /// `P|b> = coefficient * |b xor x>`.
    pub fn apply_basis(&self, b: u64) -> (C64, u64) {
        let minus = (self.z & b).count_ones() % 2 == 1;
        let mut k = self.phase;
        if minus {
            k += 2;
        }
        (phase_power(k), b ^ self.x)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (b, amp) in v.iter().enumerate() {
            let (c, target) = self.apply_basis(b as u64);
            out[target as usize] = c * amp;
        }
        out
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        check_qubits("dense Pauli", self.n, MAX_DENSE_QUBITS)?;
        let mut op = DenseOperator::zeros(self.n).into_matrix();
        for b in 0..(1u64 << self.n) {
            let (c, target) = self.apply_basis(b);
            op[(target as usize, b as usize)] = c;
        }
        DenseOperator::new(op)
    }

    /// Trace: `2^n i^phase` for the identity string, zero otherwise.
    pub fn trace(&self) -> C64 {
        if self.is_identity_up_to_phase() {
            phase_power(self.phase) * (self.n as f64).exp2()
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Letters with qubit 0 first, e.g. `XIZ`.
    pub fn letters(&self) -> String {
        (0..self.n)
            .map(|q| match ((self.x >> q) & 1, (self.z >> q) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                _ => 'Z',
            })
            .collect()
    }
}

pub(crate) fn phase_power(k: u8) -> C64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;

    /// Parses an optional sign (`+`, `-`, `+i`, `-i`) followed by letters.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (extra, body) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        if body.is_empty() {
            return Err(Error::PauliParse("empty Pauli string".into()));
        }
        let n = body.chars().count();
        check_qubits("Pauli string", n, MAX_QUBITS)?;
        let mut p = Self::identity(n);
        for (q, c) in body.chars().enumerate() {
            p = p.mul(&Self::single(n, q, c)?);
        }
        Ok(Self::from_parts(n, p.x, p.z, p.phase + extra))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = (self.x & self.z).count_ones() as u8 & 3;
        let prefix = ["+", "+i", "-", "-i"][((self.phase + 4 - base) & 3) as usize];
        write!(f, "{prefix}{}", self.letters())
    }
}
