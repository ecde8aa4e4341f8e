//! Clifford group elements stored as Pauli images, with uniform sampling
//! via symplectic transvections (Koenig and Smolin).
//!
//! Symplectic vectors use interleaved coordinates: bit `2q` is the `X`
//! part of qubit `q` and bit `2q + 1` its `Z` part.

use rand::Rng;

use crate::dense::{DenseOperator, C64};
use crate::error::check_qubits;
use crate::pauli::PauliString;
use crate::tableau::StabilizerTableau;
use crate::{Error, Result, MAX_DENSE_QUBITS, MAX_QUBITS};

/// Clifford unitary modulo global phase, as the images `C X_q C^dag`
/// (rows `0..n`) and `C Z_q C^dag` (rows `n..2n`).
///
/// The images are Hermitian, so equality of two elements is equality of
/// the unitaries up to a global phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CliffordElement {
    n: usize,
    images: Vec<PauliString>,
}

const EVEN: u128 = 0x5555_5555_5555_5555_5555_5555_5555_5555;

fn inner(v: u128, w: u128) -> bool {
    let a = (v & EVEN) & ((w >> 1) & EVEN);
    let b = (w & EVEN) & ((v >> 1) & EVEN);
    (a.count_ones() + b.count_ones()) % 2 == 1
}

fn transvection(k: u128, v: u128) -> u128 {
    if inner(k, v) {
        v ^ k
    } else {
        v
    }
}

fn pair(v: u128, i: usize) -> (u8, u8) {
    (((v >> (2 * i)) & 1) as u8, ((v >> (2 * i + 1)) & 1) as u8)
}

/// Vectors `h1, h2` with `y = Z_h2 Z_h1 x`, where `Z_h` is the transvection by `h`.
fn find_transvection(x: u128, y: u128, pairs: usize) -> (u128, u128) {
    if x == y {
        return (0, 0);
    }
    if inner(x, y) {
        return (x ^ y, 0);
    }
    for i in 0..pairs {
        let (x0, x1) = pair(x, i);
        let (y0, y1) = pair(y, i);
        if (x0 | x1) != 0 && (y0 | y1) != 0 {
            let mut z0 = x0 ^ y0;
            let mut z1 = x1 ^ y1;
            if z0 == 0 && z1 == 0 {
                z1 = 1;
                if x0 != x1 {
                    z0 = 1;
                }
            }
            let z = ((z0 as u128) << (2 * i)) | ((z1 as u128) << (2 * i + 1));
            return (x ^ z, y ^ z);
        }
    }
    let mut z: u128 = 0;
    for i in 0..pairs {
        let (x0, x1) = pair(x, i);
        let (y0, y1) = pair(y, i);
        if (x0 | x1) != 0 && (y0 | y1) == 0 {
            let (z0, z1) = if x0 == x1 { (0, 1) } else { (x1, x0) };
            z |= ((z0 as u128) << (2 * i)) | ((z1 as u128) << (2 * i + 1));
            break;
        }
    }
    for i in 0..pairs {
        let (x0, x1) = pair(x, i);
        let (y0, y1) = pair(y, i);
        if (x0 | x1) == 0 && (y0 | y1) != 0 {
            let (z0, z1) = if y0 == y1 { (0, 1) } else { (y1, y0) };
            z |= ((z0 as u128) << (2 * i)) | ((z1 as u128) << (2 * i + 1));
            break;
        }
    }
    (x ^ z, y ^ z)
}

/// Per-level choice in the recursive construction: `k` in `1..2^{2m}` and
/// `2m - 1` further bits, where `m` is the number of qubits at that level.
trait LevelDigits {
    fn next(&mut self, m: usize) -> (u128, u128);
}

struct IndexDigits(u128);

impl LevelDigits for IndexDigits {
    fn next(&mut self, m: usize) -> (u128, u128) {
        let nn = 2 * m;
        let s = (1u128 << nn) - 1;
        let k = self.0 % s + 1;
        self.0 /= s;
        let bits = self.0 & ((1u128 << (nn - 1)) - 1);
        self.0 >>= nn - 1;
        (k, bits)
    }
}

struct RngDigits<'a, R: Rng + ?Sized>(&'a mut R);

impl<R: Rng + ?Sized> LevelDigits for RngDigits<'_, R> {
    fn next(&mut self, m: usize) -> (u128, u128) {
        let nn = 2 * m;
        let k = self.0.random_range(1..(1u128 << nn));
        let bits = self.0.random::<u128>() & ((1u128 << (nn - 1)) - 1);
        (k, bits)
    }
}

/// Rows of a symplectic matrix on `m` qubits, in interleaved coordinates.
fn symplectic_rows(m: usize, digits: &mut impl LevelDigits) -> Vec<u128> {
    let nn = 2 * m;
    let (k, bits) = digits.next(m);
    let mut f1 = k;
    let e1: u128 = 1;
    let (t0, t1) = find_transvection(e1, f1, m);
    // e' = e1 with coordinates 2.. taken from bits[1..]
    let mut eprime = e1;
    for j in 2..nn {
        eprime |= ((bits >> (j - 1)) & 1) << j;
    }
    let h0 = transvection(t1, transvection(t0, eprime));
    if bits & 1 == 1 {
        f1 = 0;
    }
    let mut g: Vec<u128> = vec![0b01, 0b10];
    if m > 1 {
        g.extend(symplectic_rows(m - 1, digits).into_iter().map(|r| r << 2));
    }
    for row in g.iter_mut() {
        let mut v = transvection(t0, *row);
        v = transvection(t1, v);
        v = transvection(h0, v);
        v = transvection(f1, v);
        *row = v;
    }
    g
}

fn split_interleaved(v: u128, n: usize) -> (u64, u64) {
    let (mut x, mut z) = (0u64, 0u64);
    for q in 0..n {
        x |= (((v >> (2 * q)) & 1) as u64) << q;
        z |= (((v >> (2 * q + 1)) & 1) as u64) << q;
    }
    (x, z)
}

/// `|Sp(2n, F_2)|`, if it fits in a `u128`.
pub fn symplectic_group_order(n: usize) -> Option<u128> {
    (1..=n).try_fold(1u128, |acc, j| {
        let j = j as u32;
        let a = 1u128.checked_shl(2 * j - 1)?;
        let b = 1u128.checked_shl(2 * j)? - 1;
        acc.checked_mul(a)?.checked_mul(b)
    })
}

/// Order of the Clifford group modulo phases, `|Sp(2n)| * 4^n`.
pub fn clifford_group_order(n: usize) -> Option<u128> {
    symplectic_group_order(n)?.checked_mul(1u128.checked_shl(2 * n as u32)?)
}

impl CliffordElement {
    pub fn identity(n: usize) -> Self {
        let images = (0..n)
            .map(|q| PauliString::hermitian(n, 1 << q, 0, false))
            .chain((0..n).map(|q| PauliString::hermitian(n, 0, 1 << q, false)))
            .collect();
        Self { n, images }
    }

    /// Build from Hermitian images of `X_q` (first `n`) and `Z_q` (last `n`),
    /// checking the commutation relations.
    pub fn from_images(images: Vec<PauliString>) -> Result<Self> {
        if !images.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument("odd number of images".into()));
        }
        let n = images.len() / 2;
        for (a, p) in images.iter().enumerate() {
            if p.qubits() != n || !p.is_hermitian() {
                return Err(Error::InvalidArgument(format!("image {a} is not a Hermitian {n}-qubit Pauli")));
            }
            for (b, q) in images.iter().enumerate() {
                let should_anticommute = a % n == b % n && a != b;
                if p.commutes_with(q) == should_anticommute {
                    return Err(Error::InvalidArgument("images violate the commutation relations".into()));
                }
            }
        }
        Ok(Self { n, images })
    }

    /// Build from symplectic rows `(x, z)` and sign bits.
    pub fn from_symplectic(n: usize, rows: &[(u64, u64)], signs: &[bool]) -> Result<Self> {
        if rows.len() != 2 * n || signs.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: rows.len().min(signs.len()) });
        }
        let images = rows
            .iter()
            .zip(signs)
            .map(|(&(x, z), &s)| PauliString::new(n, x, z, 0).map(|_| PauliString::hermitian(n, x, z, s)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(images)
    }

    fn from_interleaved(n: usize, rows: &[u128], signs: u128) -> Self {
        // rows come in (X_0, Z_0, X_1, Z_1, ...) order
        let mut images = vec![PauliString::identity(n); 2 * n];
        for q in 0..n {
            for (slot, r) in [(q, 2 * q), (n + q, 2 * q + 1)] {
                let (x, z) = split_interleaved(rows[r], n);
                images[slot] = PauliString::hermitian(n, x, z, (signs >> slot) & 1 == 1);
            }
        }
        Self { n, images }
    }

    /// Uniformly random element.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_qubits("Clifford sampling", n, MAX_QUBITS)?;
        if n == 0 {
            return Ok(Self::identity(0));
        }
        let rows = symplectic_rows(n, &mut RngDigits(rng));
        let signs = rng.random::<u128>() & ((1u128 << (2 * n)) - 1);
        Ok(Self::from_interleaved(n, &rows, signs))
    }

    /// Element number `index` of a fixed enumeration of the group.
    pub fn from_index(n: usize, index: u128) -> Result<Self> {
        let order = clifford_group_order(n)
            .ok_or_else(|| Error::InvalidArgument(format!("group on {n} qubits is too large to index")))?;
        if index >= order || n == 0 {
            return Err(Error::InvalidArgument(format!("index {index} out of range")));
        }
        let phases = 1u128 << (2 * n);
        let rows = symplectic_rows(n, &mut IndexDigits(index / phases));
        Ok(Self::from_interleaved(n, &rows, index % phases))
    }

    /// All elements, for `n <= 2`.
    pub fn enumerate(n: usize) -> Result<Vec<Self>> {
        check_qubits("Clifford enumeration", n, 2)?;
        let order = clifford_group_order(n).expect("small group");
        (0..order).map(|i| Self::from_index(n, i)).collect()
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn images(&self) -> &[PauliString] {
        &self.images
    }

    pub fn x_image(&self, q: usize) -> &PauliString {
        &self.images[q]
    }

    pub fn z_image(&self, q: usize) -> &PauliString {
        &self.images[self.n + q]
    }

    /// Symplectic rows `(x, z)`, one per image.
    pub fn symplectic(&self) -> Vec<(u64, u64)> {
        self.images.iter().map(|p| (p.x_bits(), p.z_bits())).collect()
    }

    pub fn signs(&self) -> Vec<bool> {
        self.images.iter().map(|p| p.sign()).collect()
    }

    /// `C P C^dag`.
    pub fn conjugate(&self, p: &PauliString) -> PauliString {
        let mut out = PauliString::from_parts(self.n, 0, 0, p.phase());
        for q in 0..self.n {
            if (p.x_bits() >> q) & 1 == 1 {
                out = out.mul(&self.images[q]);
            }
        }
        for q in 0..self.n {
            if (p.z_bits() >> q) & 1 == 1 {
                out = out.mul(&self.images[self.n + q]);
            }
        }
        out
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self { n: self.n, images: other.images.iter().map(|p| self.conjugate(p)).collect() }
    }

    pub fn inverse(&self) -> Self {
        let n = self.n;
        let dot = |a: &PauliString, b: &PauliString| !a.commutes_with(b);
        let images = (0..2 * n)
            .map(|r| {
                let target = if r < n {
                    PauliString::hermitian(n, 1 << r, 0, false)
                } else {
                    PauliString::hermitian(n, 0, 1 << (r - n), false)
                };
                // coefficient of image X_q is <target, image Z_q>, and vice versa
                let mut x = 0u64;
                let mut z = 0u64;
                for q in 0..n {
                    if dot(&target, &self.images[n + q]) {
                        x |= 1 << q;
                    }
                    if dot(&target, &self.images[q]) {
                        z |= 1 << q;
                    }
                }
                let guess = PauliString::hermitian(n, x, z, false);
                if self.conjugate(&guess) == target {
                    guess
                } else {
                    guess.neg()
                }
            })
            .collect();
        Self { n, images }
    }

    /// Tableau of `C|S>`.
    pub fn apply_to_tableau(&self, state: &StabilizerTableau) -> StabilizerTableau {
        state.map_rows(|p| self.conjugate(p))
    }

    /// Tableau of `C|0...0>`.
    pub fn output_state(&self) -> StabilizerTableau {
        self.apply_to_tableau(&StabilizerTableau::zero_state(self.n).expect("qubit count already checked"))
    }

    /// Visit `(x, C|x>)` for every basis index in Gray-code order.
    fn for_each_column(&self, mut visit: impl FnMut(u64, &[C64])) -> Result<()> {
        check_qubits("dense Clifford", self.n, MAX_DENSE_QUBITS)?;
        let mut col = self.output_state().to_state_vector()?;
        let mut x = 0u64;
        visit(x, &col);
        for i in 1u64..(1 << self.n) {
            let q = i.trailing_zeros() as usize;
            col = self.images[q].apply(&col);
            x ^= 1 << q;
            visit(x, &col);
        }
        Ok(())
    }

    /// Dense unitary; its global phase is a fixed function of the element.
    pub fn to_dense(&self) -> Result<DenseOperator> {
        let mut u = DenseOperator::zeros(self.n).into_matrix();
        self.for_each_column(|x, col| {
            for (r, a) in col.iter().enumerate() {
                u[(r, x as usize)] = *a;
            }
        })?;
        DenseOperator::new(u)
    }

    /// `C psi`, consistent with [`Self::to_dense`].
    pub fn apply_to_vector(&self, psi: &[C64]) -> Result<Vec<C64>> {
        if psi.len() != 1 << self.n {
            return Err(Error::DimensionMismatch { expected: 1 << self.n, found: psi.len() });
        }
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        self.for_each_column(|x, col| {
            let c = psi[x as usize];
            if c != C64::new(0.0, 0.0) {
                for (o, a) in out.iter_mut().zip(col) {
                    *o += c * a;
                }
            }
        })?;
        Ok(out)
    }

    pub fn hadamard(n: usize, q: usize) -> Self {
        let mut c = Self::identity(n);
        c.images.swap(q, n + q);
        c
    }

    pub fn phase_gate(n: usize, q: usize) -> Self {
        let mut c = Self::identity(n);
        c.images[q] = PauliString::hermitian(n, 1 << q, 1 << q, false);
        c
    }

    pub fn cnot(n: usize, control: usize, target: usize) -> Self {
        let mut c = Self::identity(n);
        let (bc, bt) = (1u64 << control, 1u64 << target);
        c.images[control] = PauliString::hermitian(n, bc | bt, 0, false);
        c.images[n + target] = PauliString::hermitian(n, 0, bc | bt, false);
        c
    }
}
