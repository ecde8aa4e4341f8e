//! Stabilizer states as generator/destabilizer tableaux.

use num::{BigInt, BigRational, One, Zero};
use rand::Rng;

use crate::dense::C64;
use crate::error::check_qubits;
use crate::pauli::PauliString;
use crate::{Error, Result, MAX_DENSE_QUBITS, MAX_QUBITS};

/// A probability of the form `0` or `2^-k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DyadicProb {
    Zero,
    InvPow2(u32),
}

impl DyadicProb {
    pub fn to_f64(self) -> f64 {
        match self {
            DyadicProb::Zero => 0.0,
            DyadicProb::InvPow2(k) => (-(k as f64)).exp2(),
        }
    }

    pub fn to_rational(self) -> BigRational {
        match self {
            DyadicProb::Zero => BigRational::zero(),
            DyadicProb::InvPow2(k) => BigRational::new(BigInt::one(), BigInt::one() << k),
        }
    }
}

/// Affine subspace `offset + span(basis)` of `F_2^n`.
///
/// The basis is in reduced echelon form: `basis[i]` has bit `pivots[i]`
/// set and no other basis vector has that bit; the offset has no pivot bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSupport {
    n: usize,
    offset: u64,
    basis: Vec<u64>,
    pivots: Vec<u32>,
}

impl AffineSupport {
    pub fn dim(&self) -> u32 {
        self.basis.len() as u32
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    fn reduce(&self, mut y: u64) -> u64 {
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if (y >> p) & 1 == 1 {
                y ^= b;
            }
        }
        y
    }

    pub fn contains(&self, x: u64) -> bool {
        self.reduce(x ^ self.offset) == 0
    }

    /// Uniform point; one random bit per basis vector, in pivot order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut x = self.offset;
        for b in &self.basis {
            if rng.random::<bool>() {
                x ^= b;
            }
        }
        x
    }

    /// `log2 |self ∩ other|`, or `None` when the intersection is empty.
    pub fn intersection_dim(&self, other: &AffineSupport) -> Option<u32> {
        let mut span = XorBasis::default();
        for &b in self.basis.iter().chain(other.basis.iter()) {
            span.insert(b);
        }
        if span.reduce(self.offset ^ other.offset) != 0 {
            return None;
        }
        Some(self.dim() + other.dim() - span.rank())
    }
}

/// Linear span over `F_2^64`, indexed by leading bit.
#[derive(Debug, Clone)]
struct XorBasis {
    rows: [u64; 64],
    rank: u32,
}

impl Default for XorBasis {
    fn default() -> Self {
        Self { rows: [0; 64], rank: 0 }
    }
}

impl XorBasis {
    fn reduce(&self, mut v: u64) -> u64 {
        while v != 0 {
            let top = 63 - v.leading_zeros() as usize;
            if self.rows[top] == 0 {
                break;
            }
            v ^= self.rows[top];
        }
        v
    }

    fn insert(&mut self, v: u64) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        self.rows[63 - v.leading_zeros() as usize] = v;
        self.rank += 1;
        true
    }

    fn rank(&self) -> u32 {
        self.rank
    }
}

/// Stabilizer state on `n` qubits: `n` Hermitian commuting generators with
/// signs, and matching destabilizers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    stabilizers: Vec<PauliString>,
    destabilizers: Vec<PauliString>,
}

impl StabilizerTableau {
    /// `|0...0>`.
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    /// Computational basis state `|x>`.
    pub fn basis_state(n: usize, x: u64) -> Result<Self> {
        check_qubits("stabilizer tableau", n, MAX_QUBITS)?;
        let stabilizers = (0..n).map(|q| PauliString::hermitian(n, 0, 1 << q, (x >> q) & 1 == 1)).collect();
        let destabilizers = (0..n).map(|q| PauliString::hermitian(n, 1 << q, 0, false)).collect();
        Ok(Self { n, stabilizers, destabilizers })
    }

    /// Build from explicit rows, checking the tableau commutation pattern.
    pub fn from_rows(stabilizers: Vec<PauliString>, destabilizers: Vec<PauliString>) -> Result<Self> {
        let n = stabilizers.len();
        if destabilizers.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: destabilizers.len() });
        }
        let t = Self { n, stabilizers, destabilizers };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("invalid tableau: {m}")));
        for (i, s) in self.stabilizers.iter().enumerate() {
            if s.qubits() != self.n || !s.is_hermitian() {
                return bad("stabilizer not Hermitian");
            }
            for (j, t) in self.stabilizers.iter().enumerate() {
                if !s.commutes_with(t) {
                    return bad("stabilizers do not commute");
                }
                let d = &self.destabilizers[j];
                if s.commutes_with(d) == (i == j) {
                    return bad("destabilizer pattern");
                }
                if !self.destabilizers[i].commutes_with(d) {
                    return bad("destabilizers do not commute");
                }
            }
        }
        Ok(())
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.destabilizers
    }

    /// Tableau of `C|S>` given a map `P -> C P C^dag`.
    pub fn map_rows(&self, f: impl Fn(&PauliString) -> PauliString) -> Self {
        Self {
            n: self.n,
            stabilizers: self.stabilizers.iter().map(&f).collect(),
            destabilizers: self.destabilizers.iter().map(&f).collect(),
        }
    }

    /// Computational-basis support of the state.
    pub fn support(&self) -> AffineSupport {
        let n = self.n;
        let mut rows = self.stabilizers.clone();
        let mut rank = 0;
        let mut pivots = Vec::new();
        for q in 0..n {
            let Some(r) = (rank..n).find(|&r| (rows[r].x_bits() >> q) & 1 == 1) else {
                continue;
            };
            rows.swap(rank, r);
            for i in 0..n {
                if i != rank && (rows[i].x_bits() >> q) & 1 == 1 {
                    rows[i] = rows[i].mul(&rows[rank]);
                }
            }
            pivots.push(q as u32);
            rank += 1;
        }
        let basis: Vec<u64> = rows[..rank].iter().map(|r| r.x_bits()).collect();

        // Z-only rows give the linear constraints z.x = sign.
        let mut cons: Vec<(u64, bool)> = rows[rank..].iter().map(|r| (r.z_bits(), r.phase() == 2)).collect();
        let mut offset = 0u64;
        let mut used = 0;
        let mut zpiv = Vec::new();
        for q in 0..n {
            let Some(r) = (used..cons.len()).find(|&r| (cons[r].0 >> q) & 1 == 1) else {
                continue;
            };
            cons.swap(used, r);
            for i in 0..cons.len() {
                if i != used && (cons[i].0 >> q) & 1 == 1 {
                    cons[i].0 ^= cons[used].0;
                    cons[i].1 ^= cons[used].1;
                }
            }
            zpiv.push(q);
            used += 1;
        }
        for (i, &q) in zpiv.iter().enumerate() {
            if cons[i].1 {
                offset |= 1 << q;
            }
        }
        let mut support = AffineSupport { n, offset: 0, basis, pivots };
        support.offset = support.reduce(offset);
        support
    }

    /// Computational-basis measurement of every qubit.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.support().sample(rng)
    }

    pub fn probability(&self, x: u64) -> DyadicProb {
        let s = self.support();
        if s.contains(x) {
            DyadicProb::InvPow2(s.dim())
        } else {
            DyadicProb::Zero
        }
    }

    /// `<S|P|S>` for a Hermitian Pauli `P`: one of `-1`, `0`, `1`.
    pub fn expectation(&self, p: &PauliString) -> i8 {
        if self.stabilizers.iter().any(|s| !s.commutes_with(p)) {
            return 0;
        }
        let mut prod = PauliString::identity(self.n);
        for (s, d) in self.stabilizers.iter().zip(&self.destabilizers) {
            if !d.commutes_with(p) {
                prod = prod.mul(s);
            }
        }
        debug_assert_eq!((prod.x_bits(), prod.z_bits()), (p.x_bits(), p.z_bits()));
        if prod.phase() == p.phase() {
            1
        } else {
            -1
        }
    }

    /// Normalised state vector, phase fixed so the amplitude at the support
    /// offset is real and positive.
    pub fn to_state_vector(&self) -> Result<Vec<C64>> {
        check_qubits("dense stabilizer state", self.n, MAX_DENSE_QUBITS)?;
        let x0 = self.support().offset();
        let mut psi = vec![C64::new(0.0, 0.0); 1 << self.n];
        psi[x0 as usize] = C64::new(1.0, 0.0);
        for g in &self.stabilizers {
            let gpsi = g.apply(&psi);
            for (a, b) in psi.iter_mut().zip(gpsi) {
                *a = (*a + b) * 0.5;
            }
        }
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in psi.iter_mut() {
            *a /= norm;
        }
        Ok(psi)
    }
}

fn as_vec(p: &PauliString) -> u128 {
    p.x_bits() as u128 | ((p.z_bits() as u128) << 64)
}

/// `|<a|b>|^2`, exactly.
pub fn overlap_sq(a: &StabilizerTableau, b: &StabilizerTableau) -> Result<DyadicProb> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { expected: a.n, found: b.n });
    }
    let n = a.n;
    let rows: Vec<&PauliString> = a.stabilizers.iter().chain(b.stabilizers.iter()).collect();
    let mut pivots: Vec<(u32, u128, u128)> = Vec::new();
    let mut common = 0u32;
    for (i, r) in rows.iter().enumerate() {
        let mut v = as_vec(r);
        let mut comb: u128 = 1 << i;
        for &(bit, pv, pc) in &pivots {
            if (v >> bit) & 1 == 1 {
                v ^= pv;
                comb ^= pc;
            }
        }
        if v != 0 {
            pivots.push((v.trailing_zeros(), v, comb));
            continue;
        }
        // comb selects a product of `a` generators equal (up to sign) to a
        // product of `b` generators
        common += 1;
        let mut pa = PauliString::identity(n);
        let mut pb = PauliString::identity(n);
        for (j, row) in rows.iter().enumerate() {
            if (comb >> j) & 1 == 1 {
                if j < n {
                    pa = pa.mul(row);
                } else {
                    pb = pb.mul(row);
                }
            }
        }
        if pa.phase() != pb.phase() {
            return Ok(DyadicProb::Zero);
        }
    }
    Ok(DyadicProb::InvPow2(n as u32 - common))
}
