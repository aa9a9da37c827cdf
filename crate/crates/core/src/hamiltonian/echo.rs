//! Pulse/delay sequences, their exact unitaries, and toggling-frame sign
//! bookkeeping.
//!
//! A π pulse about y conjugates `σ_z` into `−σ_z`, so between pulses every
//! `σ_z^j` carries a sign `s_j = ±1`. With equal delays `T`, a sequence
//! factors as
//!
//! ```text
//! U = Q_final · exp(−i·T·H_eff)
//! H_eff = −Σ_j (ω_j/2)·S_j·z_j + Σ_{j<k} (π/2)·J_jk·P_jk·z_j z_k
//! ```
//!
//! with `S_j = Σ_segments s_j`, `P_jk = Σ_segments s_j s_k` and `Q_final`
//! the product of all pulses.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::error::{param, Error, Result};
use crate::qsim::{
    unitary_fidelity_up_to_global_phase, z_value, DenseUnitary, StateVector, MAX_DENSE_QUBITS,
};

use super::{ideal_energies, internal_energies, IdealClockSpec, MoleculeSpec};

/// One step of an echo sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum EchoEvent {
    /// Simultaneous `R_y(π)` on each listed qubit.
    Pulse(Vec<usize>),
    /// Free evolution under the molecule Hamiltonian, in seconds.
    Delay(f64),
}

/// Events in temporal order (first element happens first).
#[derive(Debug, Clone, PartialEq)]
pub struct EchoSequence {
    num_qubits: usize,
    events: Vec<EchoEvent>,
}

impl EchoSequence {
    pub fn new(num_qubits: usize, events: Vec<EchoEvent>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(param("echo sequence needs at least one qubit"));
        }
        for event in &events {
            match event {
                EchoEvent::Pulse(qubits) => {
                    if let Some(&q) = qubits.iter().find(|&&q| q >= num_qubits) {
                        return Err(param(format!(
                            "pulse on qubit {q} of a {num_qubits}-qubit register"
                        )));
                    }
                    let mut sorted = qubits.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    if sorted.len() != qubits.len() {
                        return Err(param("pulse group lists a qubit twice"));
                    }
                }
                EchoEvent::Delay(t) => {
                    if !t.is_finite() || *t < 0.0 {
                        return Err(param(format!(
                            "delay must be a finite non-negative duration, got {t}"
                        )));
                    }
                }
            }
        }
        Ok(Self { num_qubits, events })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn events(&self) -> &[EchoEvent] {
        &self.events
    }

    pub fn pulse_groups(&self) -> impl Iterator<Item = &[usize]> {
        self.events.iter().filter_map(|e| match e {
            EchoEvent::Pulse(q) => Some(q.as_slice()),
            EchoEvent::Delay(_) => None,
        })
    }

    pub fn delays(&self) -> impl Iterator<Item = f64> + '_ {
        self.events.iter().filter_map(|e| match e {
            EchoEvent::Delay(t) => Some(*t),
            EchoEvent::Pulse(_) => None,
        })
    }

    /// Sum of all delay durations.
    pub fn total_delay(&self) -> f64 {
        self.delays().sum()
    }

    /// Number of π pulses each qubit receives.
    pub fn pulse_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_qubits];
        for group in self.pulse_groups() {
            for &q in group {
                counts[q] += 1;
            }
        }
        counts
    }
}

/// How a written operator product maps to time order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemporalConvention {
    /// Rightmost factor acts first (operator composition).
    RightToLeft,
    /// Leftmost factor acts first (pulse-diagram reading).
    LeftToRight,
}

impl TemporalConvention {
    pub fn label(&self) -> &'static str {
        match self {
            Self::RightToLeft => "right_to_left",
            Self::LeftToRight => "left_to_right",
        }
    }
}

/// Written factors of the four-qubit refocusing product, left to right, with
/// 1-based qubit labels; `None` stands for a `Δ/4` free evolution.
const PUBLISHED_FACTORS: [Option<&[usize]>; 17] = [
    Some(&[2, 4]),
    None,
    Some(&[3]),
    None,
    Some(&[4]),
    None,
    Some(&[2, 4]),
    None,
    Some(&[1]),
    None,
    Some(&[2, 4]),
    None,
    Some(&[4]),
    None,
    Some(&[3, 1]),
    None,
    Some(&[2, 4]),
];

/// Transcribes the published four-qubit echo product: nine pulse groups and
/// eight delays of `delta/4` (total free evolution `2·delta`).
pub fn build_published_echo_sequence(
    delta: f64,
    convention: TemporalConvention,
) -> Result<EchoSequence> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(param(format!(
            "delta must be finite and non-negative, got {delta}"
        )));
    }
    let mut events: Vec<EchoEvent> = PUBLISHED_FACTORS
        .iter()
        .map(|f| match f {
            Some(qubits) => EchoEvent::Pulse(qubits.iter().map(|q| q - 1).collect()),
            None => EchoEvent::Delay(delta / 4.0),
        })
        .collect();
    if convention == TemporalConvention::RightToLeft {
        events.reverse();
    }
    EchoSequence::new(4, events)
}

fn check_molecule(seq: &EchoSequence, molecule: &MoleculeSpec) -> Result<()> {
    if molecule.num_qubits() != seq.num_qubits() {
        return Err(Error::Dimension {
            expected: seq.num_qubits(),
            actual: molecule.num_qubits(),
        });
    }
    Ok(())
}

/// Runs `state` through the sequence under the internal Hamiltonian.
pub fn evolve_state(
    seq: &EchoSequence,
    molecule: &MoleculeSpec,
    state: StateVector,
) -> Result<StateVector> {
    check_molecule(seq, molecule)?;
    let energies = internal_energies(molecule);
    evolve_with_energies(seq, &energies, state)
}

fn evolve_with_energies(
    seq: &EchoSequence,
    energies: &[f64],
    state: StateVector,
) -> Result<StateVector> {
    seq.events.iter().try_fold(state, |s, event| match event {
        EchoEvent::Pulse(qubits) => qubits.iter().try_fold(s, |s, &q| s.apply_ry_pi(q)),
        EchoEvent::Delay(t) => s.apply_diagonal_evolution(energies, *t),
    })
}

/// Dense unitary of the whole sequence (`n ≤ 8`).
pub fn sequence_unitary(seq: &EchoSequence, molecule: &MoleculeSpec) -> Result<DenseUnitary> {
    check_molecule(seq, molecule)?;
    if seq.num_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::Resource(format!(
            "{} qubits exceed the dense limit of {MAX_DENSE_QUBITS}",
            seq.num_qubits()
        )));
    }
    let energies = internal_energies(molecule);
    DenseUnitary::from_state_map(seq.num_qubits(), |s| {
        evolve_with_energies(seq, &energies, s)
    })
}

/// Toggling-frame sign sums of an equal-delay sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignTable {
    pub per_qubit_sums: Vec<i64>,
    /// Symmetric; the diagonal holds `segment_count`.
    pub per_pair_sums: Vec<Vec<i64>>,
    pub segment_count: usize,
    /// Number of π pulses per qubit; odd counts leave a residual rotation.
    pub pulse_counts: Vec<usize>,
    segment_duration_bits: u64,
}

impl SignTable {
    /// Common delay duration in seconds (0 when there are no delays).
    pub fn segment_duration(&self) -> f64 {
        f64::from_bits(self.segment_duration_bits)
    }

    /// Diagonal of `H_eff` (rad/s) for `molecule`.
    pub fn effective_energies(&self, molecule: &MoleculeSpec) -> Result<Vec<f64>> {
        let n = self.per_qubit_sums.len();
        if molecule.num_qubits() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: molecule.num_qubits(),
            });
        }
        let omega = molecule.omega();
        let j = molecule.j_coupling();
        Ok((0..1usize << n)
            .map(|b| {
                let z: Vec<f64> = (0..n).map(|q| z_value(n, b, q)).collect();
                let mut e = 0.0;
                for a in 0..n {
                    e -= 0.5 * omega[a] * self.per_qubit_sums[a] as f64 * z[a];
                    for c in a + 1..n {
                        e += FRAC_PI_2 * j[a][c] * self.per_pair_sums[a][c] as f64 * z[a] * z[c];
                    }
                }
                e
            })
            .collect())
    }

    /// `Q_final · exp(−i·T·H_eff)` including the exact overall sign of the
    /// residual pulse product.
    pub fn predicted_unitary(&self, molecule: &MoleculeSpec) -> Result<DenseUnitary> {
        let n = self.per_qubit_sums.len();
        let energies = self.effective_energies(molecule)?;
        let effective = DenseUnitary::diagonal_evolution(n, &energies, self.segment_duration())?;
        // R_y(π)^c depends only on c mod 4.
        let residual = DenseUnitary::from_state_map(n, |s| {
            let mut s = s;
            for (q, &c) in self.pulse_counts.iter().enumerate() {
                for _ in 0..c % 4 {
                    s = s.apply_ry_pi(q)?;
                }
            }
            Ok(s)
        })?;
        residual.mul(&effective)
    }
}

/// Toggling-frame bookkeeping. Requires all delays to have the same duration.
pub fn sign_table(seq: &EchoSequence) -> Result<SignTable> {
    let n = seq.num_qubits();
    let mut durations = seq.delays();
    let segment_duration = durations.next().unwrap_or(0.0);
    let scale = segment_duration.abs().max(f64::MIN_POSITIVE);
    if let Some(t) = durations.find(|t| (t - segment_duration).abs() > 1e-12 * scale) {
        return Err(Error::UnsupportedStructure(format!(
            "unequal delays {segment_duration} s and {t} s"
        )));
    }
    let mut signs = vec![1i64; n];
    let mut per_qubit_sums = vec![0i64; n];
    let mut per_pair_sums = vec![vec![0i64; n]; n];
    let mut segment_count = 0;
    for event in seq.events() {
        match event {
            EchoEvent::Pulse(qubits) => qubits.iter().for_each(|&q| signs[q] = -signs[q]),
            EchoEvent::Delay(_) => {
                segment_count += 1;
                for a in 0..n {
                    per_qubit_sums[a] += signs[a];
                    for b in 0..n {
                        per_pair_sums[a][b] += signs[a] * signs[b];
                    }
                }
            }
        }
    }
    Ok(SignTable {
        per_qubit_sums,
        per_pair_sums,
        segment_count,
        pulse_counts: seq.pulse_counts(),
        segment_duration_bits: segment_duration.to_bits(),
    })
}

/// A term of the sign table that keeps the sequence from matching the ideal
/// clock evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum Residual {
    /// Uncancelled `σ_z` on the standard clock.
    StandardQubitPhase { qubit: usize, sum: i64 },
    /// Effective clock evolution time differs from the requested offset.
    ClockTimeMismatch {
        qubit: usize,
        effective_s: f64,
        target_s: f64,
    },
    /// Uncancelled ZZ coupling.
    PairCoupling { a: usize, b: usize, sum: i64 },
    /// Odd number of π pulses leaves a bit flip.
    ResidualPulse { qubit: usize, count: usize },
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::StandardQubitPhase { qubit, sum } => write!(f, "standard_z(q{qubit}:{sum})"),
            Self::ClockTimeMismatch {
                qubit,
                effective_s,
                target_s,
            } => write!(f, "clock_time(q{qubit}:{effective_s}/{target_s})"),
            Self::PairCoupling { a, b, sum } => write!(f, "zz(q{a}q{b}:{sum})"),
            Self::ResidualPulse { qubit, count } => write!(f, "odd_pulses(q{qubit}:{count})"),
        }
    }
}

/// Fidelity of a sequence against `e^{−iH_ideal·Δ}` with its sign bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoReport {
    pub fidelity: f64,
    /// `None` when the sequence has unequal delays.
    pub sign_table: Option<SignTable>,
    pub residuals: Vec<Residual>,
}

pub fn verify_echo(
    seq: &EchoSequence,
    molecule: &MoleculeSpec,
    ideal: &IdealClockSpec,
    delta: f64,
) -> Result<EchoReport> {
    if ideal.num_qubits() != seq.num_qubits() {
        return Err(Error::Dimension {
            expected: seq.num_qubits(),
            actual: ideal.num_qubits(),
        });
    }
    let actual = sequence_unitary(seq, molecule)?;
    let target =
        DenseUnitary::diagonal_evolution(ideal.num_qubits(), &ideal_energies(ideal), delta)?;
    let fidelity = unitary_fidelity_up_to_global_phase(&actual, &target)?;

    let table = match sign_table(seq) {
        Ok(t) => Some(t),
        Err(Error::UnsupportedStructure(_)) => None,
        Err(e) => return Err(e),
    };
    let residuals = table
        .as_ref()
        .map(|t| residuals(t, ideal, delta))
        .unwrap_or_default();
    Ok(EchoReport {
        fidelity,
        sign_table: table,
        residuals,
    })
}

fn residuals(table: &SignTable, ideal: &IdealClockSpec, delta: f64) -> Vec<Residual> {
    let n = table.per_qubit_sums.len();
    let std = ideal.standard_index();
    let seg = table.segment_duration();
    let mut out = Vec::new();
    for q in 0..n {
        let sum = table.per_qubit_sums[q];
        if q == std {
            if sum != 0 {
                out.push(Residual::StandardQubitPhase { qubit: q, sum });
            }
        } else {
            // Internal −ω/2 times −S·T gives the ideal +ω/2 for S·T = −Δ.
            let effective_s = -(sum as f64) * seg;
            if (effective_s - delta).abs()
                > 1e-12 * delta.abs().max(seg.abs()).max(f64::MIN_POSITIVE)
            {
                out.push(Residual::ClockTimeMismatch {
                    qubit: q,
                    effective_s,
                    target_s: delta,
                });
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            let sum = table.per_pair_sums[a][b];
            if sum != 0 {
                out.push(Residual::PairCoupling { a, b, sum });
            }
        }
    }
    for (qubit, &count) in table.pulse_counts.iter().enumerate() {
        if count % 2 == 1 {
            out.push(Residual::ResidualPulse { qubit, count });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_sequence_shape() {
        for conv in [
            TemporalConvention::RightToLeft,
            TemporalConvention::LeftToRight,
        ] {
            let seq = build_published_echo_sequence(1e-3, conv).unwrap();
            assert_eq!(seq.pulse_groups().count(), 9);
            assert_eq!(seq.delays().count(), 8);
            assert!((seq.total_delay() - 2e-3).abs() < 1e-18);
            // Pulses and delays alternate, starting and ending with a pulse.
            for (i, e) in seq.events().iter().enumerate() {
                assert_eq!(matches!(e, EchoEvent::Pulse(_)), i % 2 == 0);
            }
        }
        let rtl = build_published_echo_sequence(1e-3, TemporalConvention::RightToLeft).unwrap();
        assert_eq!(rtl.events()[0], EchoEvent::Pulse(vec![1, 3]));
        assert_eq!(rtl.events()[2], EchoEvent::Pulse(vec![2, 0]));
        assert!(build_published_echo_sequence(-1.0, TemporalConvention::RightToLeft).is_err());
    }

    #[test]
    fn published_sequence_sign_sums() {
        let t = sign_table(
            &build_published_echo_sequence(1e-3, TemporalConvention::RightToLeft).unwrap(),
        )
        .unwrap();
        assert_eq!(t.segment_count, 8);
        assert_eq!(&t.per_qubit_sums[1..], &[-4, -4, -4]);
        assert_ne!(t.per_qubit_sums[0], 0);
        assert_eq!(t.pulse_counts, vec![2, 4, 2, 6]);
    }

    #[test]
    fn sign_table_examples() {
        let plain = EchoSequence::new(2, vec![EchoEvent::Delay(1.0); 3]).unwrap();
        let t = sign_table(&plain).unwrap();
        assert_eq!(t.per_qubit_sums, vec![3, 3]);
        assert_eq!(t.per_pair_sums[0][1], 3);

        let echo = EchoSequence::new(
            1,
            vec![
                EchoEvent::Delay(0.5),
                EchoEvent::Pulse(vec![0]),
                EchoEvent::Delay(0.5),
            ],
        )
        .unwrap();
        assert_eq!(sign_table(&echo).unwrap().per_qubit_sums, vec![0]);

        let unequal =
            EchoSequence::new(1, vec![EchoEvent::Delay(0.5), EchoEvent::Delay(0.25)]).unwrap();
        assert!(matches!(
            sign_table(&unequal),
            Err(Error::UnsupportedStructure(_))
        ));
    }

    #[test]
    fn sequence_unitary_basics() {
        let m = MoleculeSpec::from_upper_triangle(vec![3.0, -7.0], &[12.0]).unwrap();
        let empty = EchoSequence::new(2, vec![]).unwrap();
        let u = sequence_unitary(&empty, &m).unwrap();
        assert_eq!(
            u.max_entry_distance(&DenseUnitary::identity(2).unwrap())
                .unwrap(),
            0.0
        );

        let delay = EchoSequence::new(2, vec![EchoEvent::Delay(0.01)]).unwrap();
        let u = sequence_unitary(&delay, &m).unwrap();
        let expected = DenseUnitary::diagonal_evolution(2, &internal_energies(&m), 0.01).unwrap();
        assert!(u.max_entry_distance(&expected).unwrap() < 1e-15);

        let wrong = MoleculeSpec::uncoupled(vec![0.0; 3]).unwrap();
        assert!(sequence_unitary(&empty, &wrong).is_err());
    }

    #[test]
    fn invalid_sequences_rejected() {
        assert!(EchoSequence::new(2, vec![EchoEvent::Pulse(vec![2])]).is_err());
        assert!(EchoSequence::new(2, vec![EchoEvent::Pulse(vec![1, 1])]).is_err());
        assert!(EchoSequence::new(2, vec![EchoEvent::Delay(-1.0)]).is_err());
    }

    #[test]
    fn uncoupled_no_pulse_sequence_matches_ideal() {
        // Internal −ω/2 with ω → −ω reproduces the ideal +ω/2.
        let ideal = IdealClockSpec::new(0, vec![0.0, 900.0, 1500.0]).unwrap();
        let molecule = MoleculeSpec::uncoupled(vec![0.0, -900.0, -1500.0]).unwrap();
        let delta = 2.3e-3;
        let seq = EchoSequence::new(3, vec![EchoEvent::Delay(delta)]).unwrap();
        let report = verify_echo(&seq, &molecule, &ideal, delta).unwrap();
        assert!((report.fidelity - 1.0).abs() < 1e-12);
    }
}
