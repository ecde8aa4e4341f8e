use rand::Rng;
use rand_distr::StandardNormal;
use thrifty_shadows::dense::{DenseOperator, C64};

/// Random Hermitian traceless operator with a random overall scale.
pub fn random_traceless<R: Rng>(n: usize, rng: &mut R) -> DenseOperator {
    let d = 1usize << n;
    let g: Vec<C64> = (0..d * d).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let h = DenseOperator::from_fn(n, |i, j| (g[i * d + j] + g[j * d + i].conj()) * 0.5);
    let shift = h.trace() / d as f64;
    let scale: f64 = rng.random_range(0.1..3.0);
    DenseOperator::from_fn(n, |i, j| {
        let v = h.get(i, j) - if i == j { shift } else { C64::new(0.0, 0.0) };
        v * scale
    })
}

/// Random density matrix of random rank.
pub fn random_density<R: Rng>(n: usize, rng: &mut R) -> DenseOperator {
    let d = 1usize << n;
    let rank = rng.random_range(1..=d);
    let g: Vec<C64> = (0..d * rank).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let m = DenseOperator::from_fn(n, |i, j| (0..rank).map(|k| g[i * rank + k] * g[j * rank + k].conj()).sum());
    let tr = m.trace();
    m.scale(C64::new(1.0, 0.0) / tr)
}
