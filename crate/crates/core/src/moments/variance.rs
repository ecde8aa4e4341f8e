//! Closed-form variance predictions and fourth-moment identities.

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use super::commutant::rt_inner_product;
use super::perm::Permutation;
use super::subspace::CommutantLabel;
use super::weingarten::{state_average, Group, StateInput};
use crate::dense::{hs_inner, DenseOperator};
use crate::shadow::{Observable, PreparedState};
use crate::tableau::{overlap_sq, StabilizerTableau};
use crate::{Error, Result};

/// `tr(O^2)`, `tr(rho O^2)` and `tr(rho O)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Traces {
    pub tr_o2: f64,
    pub tr_rho_o2: f64,
    pub tr_rho_o: f64,
}

/// Traces for an observable and state, in closed form for stabilizer
/// projectors and Pauli strings on stabilizer states, densely otherwise.
pub fn traces(obs: &Observable, state: &PreparedState) -> Result<Traces> {
    let n = obs.qubits();
    if state.qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: state.qubits() });
    }
    let d = (n as f64).exp2();
    match (obs, state) {
        (Observable::StabilizerProjector(s), PreparedState::Stabilizer(phi)) => {
            let ov = overlap_sq(s, phi)?.to_f64();
            Ok(Traces { tr_o2: 1.0 - 1.0 / d, tr_rho_o2: ov * (1.0 - 2.0 / d) + 1.0 / (d * d), tr_rho_o: ov - 1.0 / d })
        }
        (Observable::Pauli(p), PreparedState::Stabilizer(phi)) => Ok(Traces {
            tr_o2: d,
            tr_rho_o2: 1.0,
            tr_rho_o: if p.is_identity_up_to_phase() { p.trace().re / d } else { phi.expectation(p) as f64 },
        }),
        _ => {
            let o = obs.dense()?;
            let rho = state.density()?;
            let o2 = o.matmul(&o)?;
            Ok(Traces {
                tr_o2: o2.trace().re,
                tr_rho_o2: rho.matmul(&o2)?.trace().re,
                tr_rho_o: rho.matmul(&o)?.trace().re,
            })
        }
    }
}

/// Single-shot variance of any 3-design shadow ensemble:
/// `(2^n+1)/(2^n+2) (tr O^2 + 2 tr(rho O^2)) - tr(rho O)^2`.
pub fn variance_3design_from_traces(n: usize, t: &Traces) -> f64 {
    let d = (n as f64).exp2();
    (d + 1.0) / (d + 2.0) * (t.tr_o2 + 2.0 * t.tr_rho_o2) - t.tr_rho_o * t.tr_rho_o
}

/// Same formula for dense `O` and `rho`; `O` must be traceless.
pub fn variance_3design(o: &DenseOperator, rho: &DenseOperator) -> Result<f64> {
    let tr = o.trace();
    if tr.norm() > 1e-9 * (1.0 + hs_inner(o, o)?.re.sqrt()) {
        return Err(Error::NotTraceless { trace: tr.norm() });
    }
    let o2 = o.matmul(o)?;
    let t =
        Traces { tr_o2: o2.trace().re, tr_rho_o2: rho.matmul(&o2)?.trace().re, tr_rho_o: rho.matmul(o)?.trace().re };
    Ok(variance_3design_from_traces(o.qubits(), &t))
}

/// Exact version of [`variance_3design_from_traces`].
pub fn variance_3design_exact(
    n: usize,
    tr_o2: &BigRational,
    tr_rho_o2: &BigRational,
    tr_rho_o: &BigRational,
) -> BigRational {
    let d = BigRational::from_integer(BigInt::one() << n);
    let one = BigRational::one();
    let two = &one + &one;
    (&d + &one) / (&d + &two) * (tr_o2 + &two * tr_rho_o2) - tr_rho_o * tr_rho_o
}

/// Exact traces for `rho = |S><S|`, `O = |S><S| - I/2^n`.
pub fn stabilizer_pair_traces(n: usize) -> (BigRational, BigRational, BigRational) {
    let inv_d = BigRational::new(BigInt::one(), BigInt::one() << n);
    let a = BigRational::one() - inv_d;
    (a.clone(), &a * &a, a)
}

/// `V_R = V / R + (R - 1)/R V_*`.
pub fn thrifty_variance_predict(v1: f64, vstar: f64, reuse: usize) -> Result<f64> {
    if reuse == 0 {
        return Err(Error::InvalidArgument("R must be at least 1".into()));
    }
    let r = reuse as f64;
    Ok(v1 / r + (r - 1.0) / r * vstar)
}

/// Explicit constants for the `O(2^-n)` terms in the T-count bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TCountConstants {
    /// Coefficient `c` of the `c 2^-n tr(O^2)` term.
    pub first: f64,
    /// Multiplier `s` in `(1 + s 2^-n)` and `(3/4 + s 2^-n)`.
    pub slack: f64,
}

impl Default for TCountConstants {
    fn default() -> Self {
        Self { first: 32.0, slack: 2.0 }
    }
}

/// Upper bound on `V_R - V/R` for circuits with `k` T gates.
pub fn tcount_bound(tr_o2: f64, reuse: usize, k: usize, n: usize, c: &TCountConstants) -> f64 {
    let r = reuse.max(1) as f64;
    (r - 1.0) / r * vstar_bound(tr_o2, k, n, c)
}

/// The `R -> infinity` form of [`tcount_bound`], bounding `V_*`.
pub fn vstar_bound(tr_o2: f64, k: usize, n: usize, c: &TCountConstants) -> f64 {
    let e = (-(n as f64)).exp2();
    c.first * e * tr_o2 + 30.0 * tr_o2 * (1.0 + c.slack * e) * (0.75 + c.slack * e).powi(k as i32)
}

/// `<<R_T| T^{(x)4} |R_T'>> = (|T ∩ T'| - 4) |T ∩ T'|^{n-1}` for `T, T'` in
/// the `Π_4` family.
pub fn tgate_sandwich(a: &CommutantLabel, b: &CommutantLabel, n: usize) -> Result<BigRational> {
    for l in [a, b] {
        if !matches!(l, CommutantLabel::PermPi4(_)) {
            return Err(Error::InvalidLabel(format!("{l} is not of the form pi T4")));
        }
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let s = BigInt::from(a.subspace().intersection_size(&b.subspace()));
    let v = (&s - BigInt::from(4)) * num::pow(s, n - 1);
    Ok(BigRational::from_integer(v))
}

/// `<<x x xhat xhat | R_T>>` from the case split: 1 for
/// `e, (12), (34), (12)(34), T4, (12)T4`, otherwise `[x = xhat]`.
pub fn basis_overlap_rt(x: u64, xhat: u64, label: &CommutantLabel) -> Result<BigRational> {
    if label.t() != 4 {
        return Err(Error::InvalidLabel(format!("{label} is not a t = 4 label")));
    }
    let always = ["e", "(12)", "(34)", "(12)(34)"];
    let one = match label {
        CommutantLabel::Perm(p) => always.iter().any(|s| Permutation::parse(s, 4).is_ok_and(|q| q == *p)),
        CommutantLabel::PermPi4(p) => *p == Permutation::identity(4) || p.to_string() == "(12)",
    };
    Ok(if one || x == xhat { BigRational::one() } else { BigRational::zero() })
}

/// Same overlap evaluated from subspace membership, qubit by qubit.
pub fn basis_overlap_rt_direct(x: u64, xhat: u64, label: &CommutantLabel, n: usize) -> Result<BigRational> {
    let t_sub = label.subspace();
    let inside = (0..n).all(|q| {
        let (a, b) = (((x >> q) & 1) as u16, ((xhat >> q) & 1) as u16);
        let v = a | (a << 1) | (b << 2) | (b << 3);
        t_sub.contains_pair(v, v)
    });
    Ok(if inside { BigRational::one() } else { BigRational::zero() })
}

/// `<<R_T | (O (x) rho)^{(x)2}>>`.
pub fn fourth_moment_overlap(label: &CommutantLabel, o: &DenseOperator, rho: &DenseOperator) -> Result<f64> {
    Ok(rt_inner_product(&label.subspace(), &[o, rho, o, rho])?.re)
}

/// Exact `V_* = Var_U(E[X | U])` for `rho = |S><S|`, `O = |S><S| - I/2^n`
/// under a random unitary or Clifford, from the fourth-moment state average:
/// `E[X | U] = (2^n + 1)(sum_x p_x^2 - 2^-n)` with `p_x = |<x|U|S>|^2`.
pub fn vstar_stabilizer_pair(n: usize, group: Group) -> Result<BigRational> {
    let s = StabilizerTableau::zero_state(n)?;
    let avg = state_average(4, n, group, &StateInput::Stabilizer(s))?;
    let d = BigInt::one() << n;
    let mut diag = BigRational::zero();
    let mut off = BigRational::zero();
    for label in &avg.labels {
        diag += basis_overlap_rt(0, 0, label)?;
        off += basis_overlap_rt(0, 1, label)?;
    }
    let dq = BigRational::from_integer(d.clone());
    let second = &avg.coefficient * (&dq * diag + &dq * (&dq - BigRational::one()) * off);
    let first = BigRational::new(BigInt::from(2), &d + 1);
    let scale = BigRational::from_integer(num::pow(&d + 1, 2));
    Ok(scale * (second - &first * &first))
}

#[cfg(test)]
mod tests {
    #[test]
    fn vstar_pair_closed_forms() {
        for n in 1..=8 {
            let d = BigRational::from_integer(BigInt::one() << n);
            let one = BigRational::one();
            let (a, b, c) = stabilizer_pair_traces(n);
            let v1 = variance_3design_exact(n, &a, &b, &c);
            assert_eq!(vstar_stabilizer_pair(n, Group::Clifford).unwrap(), v1);
            let k = |v: i64| BigRational::from_integer(BigInt::from(v));
            let dirichlet =
                (k(4) * &d + k(20)) / ((&d + &one) * (&d + k(2)) * (&d + k(3))) - k(4) / ((&d + &one) * (&d + &one));
            let haar = dirichlet * (&d + &one) * (&d + &one);
            assert_eq!(vstar_stabilizer_pair(n, Group::Unitary).unwrap(), haar);
        }
    }

    use super::*;
    use crate::dense::C64;
    use crate::pauli::PauliString;
    use crate::tableau::StabilizerTableau;

    #[test]
    fn pair_variance_is_one_at_two_qubits() {
        let (a, b, c) = stabilizer_pair_traces(2);
        assert_eq!(variance_3design_exact(2, &a, &b, &c), BigRational::one());
    }

    #[test]
    fn z_observable_variance() {
        for n in 1..=4 {
            let z = PauliString::single(n, 0, 'Z').unwrap().to_dense().unwrap();
            let rho = DenseOperator::projector(&crate::dense::basis_vector(n, 0).unwrap()).unwrap();
            let v = variance_3design(&z, &rho).unwrap();
            assert!((v - (n as f64).exp2()).abs() < 1e-9);
            let state = PreparedState::Stabilizer(StabilizerTableau::zero_state(n).unwrap());
            let t = traces(&Observable::Pauli(PauliString::single(n, 0, 'Z').unwrap()), &state).unwrap();
            assert!((variance_3design_from_traces(n, &t) - v).abs() < 1e-9);
        }
        let id = DenseOperator::identity(1);
        assert!(matches!(variance_3design(&id, &id), Err(Error::NotTraceless { .. })));
        let zero = DenseOperator::zeros(2);
        let rho = DenseOperator::identity(2).scale(C64::new(0.25, 0.0));
        assert_eq!(variance_3design(&zero, &rho).unwrap(), 0.0);
    }

    #[test]
    fn thrifty_prediction_reference() {
        assert_eq!(thrifty_variance_predict(2.5, 0.3, 1).unwrap(), 2.5);
        assert_eq!(thrifty_variance_predict(2.0, 2.0, 17).unwrap(), 2.0);
        assert_eq!(thrifty_variance_predict(3.0, 0.0, 3).unwrap(), 1.0);
        assert!(thrifty_variance_predict(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn tcount_bound_reference() {
        let c = TCountConstants::default();
        assert_eq!(tcount_bound(1.0, 1, 3, 6, &c), 0.0);
        let far = tcount_bound(0.9, 4, 400, 6, &c);
        assert!((far - 0.75 * 32.0 / 64.0 * 0.9).abs() < 1e-12);
        let big_n = tcount_bound(1.0, 2, 5, 60, &c);
        assert!((big_n - 0.5 * 30.0 * 0.75f64.powi(5)).abs() < 1e-9);
    }

    #[test]
    fn tgate_sandwich_diagonal() {
        let t4 = CommutantLabel::parse("T4", 4).unwrap();
        for n in 1..=4 {
            let expected = BigRational::from_integer(BigInt::from(12) * num::pow(BigInt::from(16), n - 1));
            assert_eq!(tgate_sandwich(&t4, &t4, n).unwrap(), expected);
        }
        let e = CommutantLabel::parse("e", 4).unwrap();
        assert!(tgate_sandwich(&e, &t4, 1).is_err());
    }

    #[test]
    fn basis_overlap_cases() {
        let l = |s: &str| CommutantLabel::parse(s, 4).unwrap();
        assert_eq!(basis_overlap_rt(1, 2, &l("e")).unwrap(), BigRational::one());
        assert_eq!(basis_overlap_rt(1, 2, &l("(13)")).unwrap(), BigRational::zero());
        assert_eq!(basis_overlap_rt(3, 3, &l("(13)")).unwrap(), BigRational::one());
    }
}
