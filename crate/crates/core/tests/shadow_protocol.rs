use num::{BigRational, ToPrimitive, Zero};
use rand::Rng;

use thrifty_shadows::clifford::CliffordElement;
use thrifty_shadows::dense::DenseOperator;
use thrifty_shadows::ensemble::{sample_circuit, CircuitSource, EnsembleSpec, FixedCircuit, SampledCircuit};
use thrifty_shadows::moments::{thrifty_variance_predict, traces, variance_3design_from_traces};
use thrifty_shadows::rng::{substream, Purpose};
use thrifty_shadows::shadow::{
    acquire, estimate, estimate_thrifty_variance, estimate_vstar, read_records, single_shot, single_shot_dense,
    single_shot_exact, thrifty_values, write_records, Observable, PreparedState, RunConfig,
};
use thrifty_shadows::stats::CentralMoments;
use thrifty_shadows::tableau::StabilizerTableau;
use thrifty_shadows::Error;

fn pair(n: usize) -> (PreparedState, Observable) {
    let s = StabilizerTableau::zero_state(n).unwrap();
    (PreparedState::Stabilizer(s.clone()), Observable::StabilizerProjector(s))
}

#[test]
fn acquisition_shape() {
    let (state, _) = pair(3);
    let cfg = RunConfig { total: 24, reuse: 4, batches: 2, seed: 3 };
    let records = acquire(&EnsembleSpec::clifford(3), &state, &cfg).unwrap();
    assert_eq!(records.len(), 6);
    assert!(records.iter().all(|r| r.outcomes.len() == 4 && r.outcomes.iter().all(|&x| x < 8)));
    let bad = RunConfig { total: 24, reuse: 5, batches: 2, seed: 3 };
    assert!(matches!(acquire(&EnsembleSpec::clifford(3), &state, &bad), Err(Error::Divisibility { .. })));
}

#[test]
fn identity_circuit_yields_zero_outcomes() {
    let (state, _) = pair(4);
    let source = FixedCircuit(SampledCircuit::Clifford(CliffordElement::identity(4)));
    let cfg = RunConfig { total: 60, reuse: 5, batches: 3, seed: 1 };
    let records = acquire(&source, &state, &cfg).unwrap();
    assert!(records.iter().flat_map(|r| &r.outcomes).all(|&x| x == 0));
}

#[test]
fn record_files_are_deterministic() {
    let (state, _) = pair(3);
    let cfg = RunConfig { total: 200, reuse: 2, batches: 4, seed: 77 };
    let dump = |spec: &EnsembleSpec| {
        let mut buf = Vec::new();
        write_records(&mut buf, &acquire(spec, &state, &cfg).unwrap()).unwrap();
        buf
    };
    for spec in [EnsembleSpec::clifford(3), EnsembleSpec::haar(3), EnsembleSpec::homeopathic(3, 2)] {
        let a = dump(&spec);
        assert_eq!(a, dump(&spec));
        let back = read_records(a.as_slice()).unwrap();
        let mut again = Vec::new();
        write_records(&mut again, &back).unwrap();
        assert_eq!(a, again);
    }
}

#[test]
fn zero_observable_gives_zero() {
    let zero = Observable::Dense(DenseOperator::zeros(3));
    let mut rng = substream(5, Purpose::Misc, 0);
    for spec in [EnsembleSpec::clifford(3), EnsembleSpec::haar(3)] {
        let c = sample_circuit(&spec, &mut rng).unwrap();
        for x in 0..8 {
            assert_eq!(single_shot(&zero, &c, x).unwrap(), 0.0);
        }
    }
    let (state, _) = pair(3);
    let cfg = RunConfig { total: 40, reuse: 2, batches: 2, seed: 0 };
    assert_eq!(estimate(&EnsembleSpec::haar(3), &state, &zero, &cfg).unwrap().estimate, 0.0);
}

#[test]
fn exhaustive_two_qubit_mean_is_exact() {
    let s = StabilizerTableau::zero_state(2).unwrap();
    let bell = CliffordElement::cnot(2, 0, 1).compose(&CliffordElement::hadamard(2, 0)).apply_to_tableau(&s);
    for obs in [Observable::Pauli("+XX".parse().unwrap()), Observable::Pauli("-ZY".parse().unwrap())] {
        let truth = traces(&obs, &PreparedState::Stabilizer(bell.clone())).unwrap().tr_rho_o;
        let mut mean = BigRational::zero();
        let all = CliffordElement::enumerate(2).unwrap();
        for c in &all {
            let out = c.apply_to_tableau(&bell);
            let circuit = SampledCircuit::Clifford(c.clone());
            for x in 0..4 {
                mean += out.probability(x).to_rational() * single_shot_exact(&obs, &circuit, x).unwrap();
            }
        }
        mean /= BigRational::from_integer(all.len().into());
        assert_eq!(mean.to_f64().unwrap(), truth);
    }
}

#[test]
fn monte_carlo_means_are_unbiased() {
    for spec in [EnsembleSpec::haar(3), EnsembleSpec::homeopathic(3, 3), EnsembleSpec::clifford(3)] {
        let (state, obs) = pair(3);
        let cfg = RunConfig { total: 20_000, reuse: 1, batches: 1, seed: 11 };
        let values = thrifty_values(&spec, &state, &obs, &cfg).unwrap();
        let acc: CentralMoments = values.iter().copied().collect();
        let truth = traces(&obs, &state).unwrap().tr_rho_o;
        assert!((acc.mean() - truth).abs() <= 3.0 * acc.mean_std_error(), "{:?}", spec.kind);
    }
}

#[test]
fn fast_path_is_exact_and_dense_path_agrees() {
    let mut rng = substream(21, Purpose::Misc, 0);
    for case in 0..1000 {
        let n = 1 + case % 4;
        let s = CliffordElement::random(n, &mut rng).unwrap().output_state();
        let obs = if case % 2 == 0 {
            Observable::StabilizerProjector(s)
        } else {
            let bits = (1u64 << n) - 1;
            let p = thrifty_shadows::pauli::PauliString::hermitian(
                n,
                rng.random::<u64>() & bits,
                rng.random::<u64>() & bits,
                rng.random(),
            );
            Observable::Pauli(p)
        };
        let c = sample_circuit(&EnsembleSpec::clifford(n), &mut rng).unwrap();
        let x = rng.random_range(0..1u64 << n);
        let exact = single_shot_exact(&obs, &c, x).unwrap().to_f64().unwrap();
        assert_eq!(single_shot(&obs, &c, x).unwrap(), exact);
        assert!((single_shot_dense(&obs, &c, x).unwrap() - exact).abs() < 1e-10);
    }
}

#[test]
fn two_qubit_estimate_within_three_sigma() {
    let (state, obs) = pair(2);
    let cfg = RunConfig { total: 100_000, reuse: 1, batches: 1, seed: 2024 };
    let e = estimate(&EnsembleSpec::clifford(2), &state, &obs, &cfg).unwrap();
    assert!((e.estimate - 0.75).abs() <= 3.0 * (1.0f64 / 1e5).sqrt());
}

#[test]
fn full_reuse_variance_approaches_vstar() {
    let (state, obs) = pair(3);
    let spec = EnsembleSpec::haar(3);
    let vstar = estimate_vstar(&spec, &state, &obs, 4000, 1).unwrap();
    let vr = estimate_thrifty_variance(&spec, &state, &obs, 4000, 256, 2).unwrap();
    let v1 = variance_3design_from_traces(3, &traces(&obs, &state).unwrap());
    let predicted = thrifty_variance_predict(v1, vstar.value, 256).unwrap();
    assert!((vr.value - predicted).abs() <= 3.0 * vr.std_error.hypot(vstar.std_error));
}

#[test]
fn thrifty_variance_identity() {
    for n in [3, 6] {
        let (state, obs) = pair(n);
        let v1 = variance_3design_from_traces(n, &traces(&obs, &state).unwrap());
        for spec in [EnsembleSpec::clifford(n), EnsembleSpec::haar(n)] {
            let circuits = if n == 6 && spec.kind.name() == "haar" { 2000 } else { 8000 };
            let vstar = estimate_vstar(&spec, &state, &obs, circuits, 100 + n as u64).unwrap();
            for (i, r) in [1usize, 2, 4, 16].into_iter().enumerate() {
                let vr = estimate_thrifty_variance(&spec, &state, &obs, circuits, r, 200 + i as u64).unwrap();
                let w = (r as f64 - 1.0) / r as f64;
                let predicted = thrifty_variance_predict(v1, vstar.value, r).unwrap();
                let sigma = vr.std_error.hypot(w * vstar.std_error);
                assert!(
                    (vr.value - predicted).abs() <= 3.0 * sigma,
                    "n={n} {:?} R={r}: {} vs {predicted} (sigma {sigma})",
                    spec.kind,
                    vr.value
                );
                assert!(vr.value <= v1 + 3.0 * vr.std_error);
            }
        }
    }
}

#[test]
fn fixed_circuit_has_no_vstar() {
    let (state, obs) = pair(3);
    let mut rng = substream(8, Purpose::Misc, 0);
    let source = FixedCircuit(sample_circuit(&EnsembleSpec::haar(3), &mut rng).unwrap());
    assert_eq!(source.qubits(), 3);
    let v = estimate_vstar(&source, &state, &obs, 100, 4).unwrap();
    assert!(v.value.abs() < 1e-24);
}
