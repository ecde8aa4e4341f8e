use std::fmt;

use crate::{Error, Result};

/// Largest number of tensor copies handled by the commutant engine.
pub const MAX_T: usize = 4;

/// Permutation of `{0, .., t-1}`; displayed 1-based in cycle notation.
///
/// Acts on `t`-bit strings by `(pi . x)_{pi(i)} = x_i`, so that the copy
/// permutation operators satisfy `R_pi R_sigma = R_{pi o sigma}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    pub fn new(images: Vec<u8>) -> Result<Self> {
        let t = images.len();
        let mut seen = vec![false; t];
        for &i in &images {
            let i = i as usize;
            if i >= t || seen[i] {
                return Err(Error::InvalidLabel(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(t: usize) -> Self {
        Self { images: (0..t as u8).collect() }
    }

    /// All of `S_t` in lexicographic order of image arrays.
    pub fn all(t: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur: Vec<u8> = (0..t as u8).collect();
        loop {
            out.push(Self { images: cur.clone() });
            // next lexicographic permutation
            let Some(i) = (0..t.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
                break;
            };
            let j = (i + 1..t).rev().find(|&j| cur[j] > cur[i]).expect("exists");
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    /// `(self o other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { images: other.images.iter().map(|&i| self.images[i as usize]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u8; self.images.len()];
        for (i, &p) in self.images.iter().enumerate() {
            inv[p as usize] = i as u8;
        }
        Self { images: inv }
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let t = self.degree();
        let mut seen = vec![false; t];
        let mut out = Vec::new();
        for s in 0..t {
            if seen[s] {
                continue;
            }
            let mut cyc = vec![s];
            seen[s] = true;
            let mut j = self.image(s);
            while j != s {
                seen[j] = true;
                cyc.push(j);
                j = self.image(j);
            }
            out.push(cyc);
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// Action on a `t`-bit string.
    pub fn act(&self, x: u16) -> u16 {
        let mut out = 0;
        for (i, &p) in self.images.iter().enumerate() {
            out |= ((x >> i) & 1) << p;
        }
        out
    }

    /// Parse cycle notation such as `e`, `(13)` or `(12)(34)` for degree `t`.
    pub fn parse(s: &str, t: usize) -> Result<Self> {
        let s = s.trim();
        let mut images: Vec<u8> = (0..t as u8).collect();
        if s == "e" {
            return Ok(Self { images });
        }
        let bad = || Error::InvalidLabel(format!("cannot parse permutation {s:?}"));
        let mut rest = s;
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(bad)?;
            let end = body.find(')').ok_or_else(bad)?;
            let elems: Vec<usize> = body[..end]
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).filter(|&d| d >= 1 && d <= t).ok_or_else(bad))
                .collect::<Result<_>>()?;
            for w in 0..elems.len() {
                images[elems[w] - 1] = (elems[(w + 1) % elems.len()] - 1) as u8;
            }
            rest = &body[end + 1..];
        }
        Self::new(images)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cycles.is_empty() {
            return write!(f, "e");
        }
        for c in cycles {
            write!(f, "(")?;
            for i in c {
                write!(f, "{}", i + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}
