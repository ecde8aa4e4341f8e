//! Subspaces `T` of `F_2^{2t}` labelling the commutant of the Clifford
//! tensor-power action.
//!
//! A vector `(x, y)` is packed into a `u16` with `x` in bits `0..t` and `y`
//! in bits `t..2t`.

use std::collections::BTreeSet;
use std::fmt;

use super::perm::{Permutation, MAX_T};
use crate::{Error, Result};

/// A linear subspace of `F_2^{2t}`, stored by its sorted element list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubspaceT {
    t: usize,
    elements: Vec<u16>,
}

fn all_ones(t: usize) -> u16 {
    (1u16 << (2 * t)) - 1
}

/// `|x| - |y| mod 4`.
fn q_form(v: u16, t: usize) -> u32 {
    let x = (v & ((1 << t) - 1)).count_ones();
    let y = (v >> t).count_ones();
    (x + 4 - y) % 4
}

impl SubspaceT {
    pub fn span(t: usize, generators: &[u16]) -> Result<Self> {
        if t == 0 || t > MAX_T {
            return Err(Error::InvalidArgument(format!("t = {t} outside 1..=4")));
        }
        let mut elems: BTreeSet<u16> = BTreeSet::from([0]);
        for &g in generators {
            if g >> (2 * t) != 0 {
                return Err(Error::InvalidArgument(format!("vector {g:#b} too long")));
            }
            if !elems.contains(&g) {
                let shifted: Vec<u16> = elems.iter().map(|e| e ^ g).collect();
                elems.extend(shifted);
            }
        }
        Ok(Self { t, elements: elems.into_iter().collect() })
    }

    /// `T_pi = {(pi . y, y)}`.
    pub fn permutation(pi: &Permutation) -> Self {
        let t = pi.degree();
        let gens: Vec<u16> = (0..t).map(|i| pi.act(1 << i) | (1 << (t + i))).collect();
        Self::span(t, &gens).expect("valid degree")
    }

    /// `T_4 = {(y + a 1111, y) : |y| even, a in F_2}`, so that
    /// `R_{T_4} = 2^-n sum_P P^{(x)4}`.
    pub fn t4() -> Self {
        let mut gens = vec![0b1111];
        for y in [0b0011u16, 0b0110, 0b1100] {
            gens.push(y | (y << 4));
        }
        Self::span(4, &gens).expect("t = 4")
    }

    /// `{(pi . x, y) : (x, y) in self}`, the label of `R_pi R_T`.
    pub fn left_multiply(&self, pi: &Permutation) -> Self {
        let t = self.t;
        let mask = (1u16 << t) - 1;
        let mut elements: Vec<u16> = self.elements.iter().map(|&v| pi.act(v & mask) | (v & !mask)).collect();
        elements.sort_unstable();
        Self { t, elements }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn elements(&self) -> &[u16] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.len().trailing_zeros() as usize
    }

    pub fn contains(&self, v: u16) -> bool {
        self.elements.binary_search(&v).is_ok()
    }

    pub fn contains_pair(&self, x: u16, y: u16) -> bool {
        self.contains(x | (y << self.t))
    }

    /// `|self ∩ other|`, i.e. the single-copy overlap `<<r_T|r_T'>>`.
    pub fn intersection_size(&self, other: &Self) -> usize {
        self.elements.iter().filter(|&&v| other.contains(v)).count()
    }

    pub fn intersection_dim(&self, other: &Self) -> usize {
        self.intersection_size(other).trailing_zeros() as usize
    }

    /// Row-reduced basis (pivot = highest set bit, descending).
    pub fn basis(&self) -> Vec<u16> {
        let mut rows: Vec<u16> = Vec::new();
        for &v in &self.elements {
            let mut r = v;
            for &b in &rows {
                let top = 15 - b.leading_zeros();
                if (r >> top) & 1 == 1 {
                    r ^= b;
                }
            }
            if r != 0 {
                let top = 15 - r.leading_zeros();
                for b in rows.iter_mut() {
                    if (*b >> top) & 1 == 1 {
                        *b ^= r;
                    }
                }
                rows.push(r);
                rows.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        rows
    }

    /// Whether `T` belongs to `Σ_{t,t}`: dimension `t`, contains the
    /// all-ones vector and `|x| = |y| mod 4` on every element.
    pub fn is_defining(&self) -> bool {
        self.dim() == self.t && self.contains(all_ones(self.t)) && self.elements.iter().all(|&v| q_form(v, self.t) == 0)
    }
}

/// All of `Σ_{t,t}` by direct search, sorted canonically.
pub fn sigma_tt_enumerate(t: usize) -> Result<Vec<SubspaceT>> {
    if t == 0 || t > MAX_T {
        return Err(Error::InvalidArgument(format!("Σ_(t,t) only for 1 <= t <= 4, got {t}")));
    }
    let candidates: Vec<u16> = (1..(1u16 << (2 * t))).filter(|&v| q_form(v, t) == 0).collect();
    let mut level: BTreeSet<SubspaceT> = BTreeSet::from([SubspaceT::span(t, &[all_ones(t)])?]);
    for _ in 1..t {
        let mut next = BTreeSet::new();
        for s in &level {
            for &c in &candidates {
                if s.contains(c) {
                    continue;
                }
                let mut gens = s.basis();
                gens.push(c);
                let bigger = SubspaceT::span(t, &gens)?;
                if bigger.elements.iter().all(|&v| q_form(v, t) == 0) {
                    next.insert(bigger);
                }
            }
        }
        level = next;
    }
    Ok(level.into_iter().collect())
}

/// Label of a commutant basis element: `R_pi`, or `R_pi Π_4` with `pi` in `S_3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CommutantLabel {
    Perm(Permutation),
    PermPi4(Permutation),
}

impl CommutantLabel {
    /// `S_t`, followed for `t = 4` by the six `pi Π_4`, `pi in S_3`.
    pub fn all(t: usize) -> Result<Vec<Self>> {
        if t == 0 || t > MAX_T {
            return Err(Error::InvalidArgument(format!("t = {t} outside 1..=4")));
        }
        let mut out: Vec<Self> = Permutation::all(t).into_iter().map(Self::Perm).collect();
        if t == 4 {
            out.extend(Self::pi4_family());
        }
        Ok(out)
    }

    /// The six labels `pi Π_4`, `pi in S_3` acting on copies 1..3.
    pub fn pi4_family() -> Vec<Self> {
        Permutation::all(3)
            .into_iter()
            .map(|p| {
                let mut im: Vec<u8> = (0..3).map(|i| p.image(i) as u8).collect();
                im.push(3);
                Self::PermPi4(Permutation::new(im).expect("extension of S_3"))
            })
            .collect()
    }

    pub fn t(&self) -> usize {
        match self {
            CommutantLabel::Perm(p) => p.degree(),
            CommutantLabel::PermPi4(_) => 4,
        }
    }

    pub fn subspace(&self) -> SubspaceT {
        match self {
            CommutantLabel::Perm(p) => SubspaceT::permutation(p),
            CommutantLabel::PermPi4(p) => SubspaceT::t4().left_multiply(p),
        }
    }

    pub fn parse(s: &str, t: usize) -> Result<Self> {
        match s.strip_suffix("T4") {
            Some(p) if t == 4 => {
                let p = Permutation::parse(if p.is_empty() { "e" } else { p }, 4)?;
                if p.image(3) != 3 {
                    return Err(Error::InvalidLabel(format!("{s}: permutation must fix copy 4")));
                }
                Ok(Self::PermPi4(p))
            }
            Some(_) => Err(Error::InvalidLabel(format!("{s} requires t = 4"))),
            None => Ok(Self::Perm(Permutation::parse(s, t)?)),
        }
    }
}

impl fmt::Display for CommutantLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommutantLabel::Perm(p) => write!(f, "{p}"),
            CommutantLabel::PermPi4(p) if *p == Permutation::identity(4) => write!(f, "T4"),
            CommutantLabel::PermPi4(p) => write!(f, "{p}T4"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        let counts: Vec<usize> = (1..=4).map(|t| sigma_tt_enumerate(t).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 6, 30]);
    }

    #[test]
    fn enumeration_matches_labels() {
        for t in 1..=4 {
            let found: BTreeSet<SubspaceT> = sigma_tt_enumerate(t).unwrap().into_iter().collect();
            let labelled: BTreeSet<SubspaceT> = CommutantLabel::all(t).unwrap().iter().map(|l| l.subspace()).collect();
            assert_eq!(found, labelled);
            assert!(found.iter().all(|s| s.is_defining()));
        }
    }

    #[test]
    fn permutation_subspace_intersections_count_cycles() {
        for p in Permutation::all(4) {
            for q in Permutation::all(4) {
                let inter = SubspaceT::permutation(&p).intersection_dim(&SubspaceT::permutation(&q));
                assert_eq!(inter, p.inverse().compose(&q).cycle_count());
            }
        }
    }

    #[test]
    fn labels_round_trip() {
        for l in CommutantLabel::all(4).unwrap() {
            assert_eq!(CommutantLabel::parse(&l.to_string(), 4).unwrap(), l);
        }
        assert!(CommutantLabel::parse("(14)T4", 4).is_err());
    }
}
