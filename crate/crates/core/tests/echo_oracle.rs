mod common;

use common::*;
use qcsync::hamiltonian::{
    build_published_echo_sequence, design_refocusing_sequence, sequence_unitary, sign_table,
    verify_echo, IdealClockSpec, MoleculeSpec, Residual, TemporalConvention,
};
use qcsync::qsim::{compose, DenseUnitary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec(m: &RandomMolecule) -> MoleculeSpec {
    MoleculeSpec::new(m.omega.clone(), m.j.clone()).unwrap()
}

fn ideal_for(m: &RandomMolecule, standard: usize) -> (IdealClockSpec, Vec<f64>) {
    let mut omega = m.omega.clone();
    omega[standard] = 0.0;
    (IdealClockSpec::new(standard, omega.clone()).unwrap(), omega)
}

#[test]
fn sequence_unitary_matches_kronecker_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let n = rng.random_range(1..=4);
        let m = random_molecule(&mut rng, n);
        let seq = random_sequence(&mut rng, n);
        let u = sequence_unitary(&seq, &spec(&m)).unwrap();
        let oracle = oracle_sequence(&seq, &m.omega, &m.j);
        assert!(max_dist(u.matrix(), &oracle) < 1e-10);
    }
}

#[test]
fn sign_table_predictions_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..25 {
        let n = rng.random_range(2..=5);
        let m = random_molecule(&mut rng, n);
        let seq = random_sequence(&mut rng, n);
        let predicted = sign_table(&seq)
            .unwrap()
            .predicted_unitary(&spec(&m))
            .unwrap();
        let oracle = oracle_sequence(&seq, &m.omega, &m.j);
        // Exact, including the overall sign of the residual pulses.
        assert!(max_dist(predicted.matrix(), &oracle) < 1e-10);
    }
}

#[test]
fn designed_sequences_match_dense_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=5 {
        for _ in 0..10 {
            let m = random_molecule(&mut rng, n);
            let standard = rng.random_range(0..n);
            let (ideal, ideal_omega) = ideal_for(&m, standard);
            for &delta in &[0.0, 1e-4, 1e-3, 2.7e-3, 5e-3] {
                let seq = design_refocusing_sequence(n, standard, delta).unwrap();
                let oracle_seq = oracle_sequence(&seq, &m.omega, &m.j);
                let target = expm_neg_i(&ideal_hamiltonian(&ideal_omega, standard), delta);
                assert!(fidelity(&oracle_seq, &target) >= 1.0 - 1e-10);
                let report = verify_echo(&seq, &spec(&m), &ideal, delta).unwrap();
                assert!(
                    report.fidelity >= 1.0 - 1e-10,
                    "n={n} Δ={delta}: {}",
                    report.fidelity
                );
                assert!(report.residuals.is_empty(), "{:?}", report.residuals);
            }
        }
    }
}

#[test]
fn two_qubit_design_is_exact() {
    let seq = design_refocusing_sequence(2, 0, 1e-3).unwrap();
    let table = sign_table(&seq).unwrap();
    assert_eq!(table.per_qubit_sums[0], 0);
    assert_eq!(table.per_qubit_sums[1], -(table.segment_count as i64) / 2);
    assert_eq!(table.per_pair_sums[0][1], 0);
    let m = MoleculeSpec::from_upper_triangle(vec![700.0, 1900.0], &[33.0]).unwrap();
    let ideal = IdealClockSpec::new(0, vec![0.0, 1900.0]).unwrap();
    assert!((verify_echo(&seq, &m, &ideal, 1e-3).unwrap().fidelity - 1.0).abs() < 1e-12);
}

#[test]
fn designed_sequence_leaves_standard_clock_alone() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = random_molecule(&mut rng, 4);
    let seq = design_refocusing_sequence(4, 0, 1.3e-3).unwrap();
    let u = oracle_sequence(&seq, &m.omega, &m.j);
    // Diagonal, and flipping the standard bit never changes the phase.
    for r in 0..16 {
        for col in 0..16 {
            if r != col {
                assert!(u[(r, col)].norm() < 1e-12);
            }
        }
    }
    for b in 0..8 {
        let ratio = u[(b, b)] / u[(b | 8, b | 8)];
        assert!((ratio - num_complex::Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }
}

#[test]
fn published_sequence_fidelity_is_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = random_molecule(&mut rng, 4);
    let (ideal, _) = ideal_for(&m, 0);
    for conv in [
        TemporalConvention::RightToLeft,
        TemporalConvention::LeftToRight,
    ] {
        let seq = build_published_echo_sequence(1e-3, conv).unwrap();
        let report = verify_echo(&seq, &spec(&m), &ideal, 1e-3).unwrap();
        assert!((0.0..=1.0).contains(&report.fidelity));
        let table = report.sign_table.unwrap();
        assert_eq!(&table.per_qubit_sums[1..], &[-4, -4, -4]);
        assert!(report
            .residuals
            .iter()
            .any(|r| matches!(r, Residual::StandardQubitPhase { qubit: 0, .. })));
    }
}

#[test]
fn published_sequence_is_exact_without_couplings_and_standard_shift() {
    // With J = 0 and ω₁ = 0 only the clock sums matter, and those are −4.
    let omega = vec![0.0, 1300.0, -800.0, 450.0];
    let m = MoleculeSpec::uncoupled(omega.clone()).unwrap();
    let ideal = IdealClockSpec::new(0, omega).unwrap();
    for conv in [
        TemporalConvention::RightToLeft,
        TemporalConvention::LeftToRight,
    ] {
        let seq = build_published_echo_sequence(2e-3, conv).unwrap();
        assert!(verify_echo(&seq, &m, &ideal, 2e-3).unwrap().fidelity > 1.0 - 1e-12);
    }
}

#[test]
fn fidelity_is_continuous_as_delta_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m = random_molecule(&mut rng, 4);
    let (ideal, _) = ideal_for(&m, 0);
    for conv in [
        TemporalConvention::RightToLeft,
        TemporalConvention::LeftToRight,
    ] {
        let at = |d: f64| {
            verify_echo(
                &build_published_echo_sequence(d, conv).unwrap(),
                &spec(&m),
                &ideal,
                d,
            )
            .unwrap()
            .fidelity
        };
        assert!((at(0.0) - 1.0).abs() < 1e-12);
        assert!((at(1e-10) - at(0.0)).abs() < 1e-9);
    }
    let designed = design_refocusing_sequence(4, 0, 0.0).unwrap();
    assert!(
        (verify_echo(&designed, &spec(&m), &ideal, 0.0)
            .unwrap()
            .fidelity
            - 1.0)
            .abs()
            < 1e-12
    );
}

#[test]
fn squared_pulse_is_minus_identity() {
    for q in 0..3 {
        let r = DenseUnitary::ry_pi(3, q).unwrap();
        let oracle = embed(3, q, &ry_pi());
        assert!(max_dist(r.matrix(), &oracle) < 1e-15);
        let sq = compose(&[r.clone(), r]).unwrap();
        assert!(max_dist(sq.matrix(), &(-eye(8))) < 1e-15);
    }
}
