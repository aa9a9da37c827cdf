//! Measure–broadcast–measure protocol on a shared entangled register.
//!
//! The standard clock measures its qubit in the dual basis at global `t = 0`
//! and announces the outcome. Every other party `j` measures at its own local
//! `t = 0`, which lags the standard clock by `Δ_j`, so its qubit has evolved
//! under `(ω_j/2)·σ_z` for `Δ_j` seconds first. Both broadcast branches are
//! kept and reported as conditional probabilities.

use rand_distr::{Binomial, Distribution};

use crate::error::{param, Error, Result};
use crate::qsim::{qubit_bit, StateVector};
use crate::rng::rng_from_seed;
use crate::states::{DualBasis, DualOutcome, EntangledStateKind};

/// Branch probabilities below this are treated as absent.
pub const ZERO_BRANCH_TOL: f64 = 1e-14;

/// One clock holder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartyConfig {
    pub index: usize,
    /// Angular frequency, rad/s.
    pub omega: f64,
    /// Lag of this party's local `t = 0` behind the standard clock, seconds.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    state_kind: EntangledStateKind,
    parties: Vec<PartyConfig>,
    standard_index: usize,
}

impl ProtocolConfig {
    /// Validates one party per qubit, finite non-negative frequencies, and a
    /// standard party with `ω = 0`, `Δ = 0`.
    pub fn new(
        state_kind: EntangledStateKind,
        standard_index: usize,
        mut parties: Vec<PartyConfig>,
    ) -> Result<Self> {
        state_kind.validate()?;
        let n = state_kind.num_qubits();
        parties.sort_by_key(|p| p.index);
        if parties.len() != n || parties.iter().enumerate().any(|(i, p)| p.index != i) {
            return Err(param(format!(
                "{state_kind} needs exactly one party for each of its {n} qubits"
            )));
        }
        if standard_index >= n {
            return Err(param(format!(
                "standard index {standard_index} out of range for {n} qubits"
            )));
        }
        for p in &parties {
            if !p.omega.is_finite() || p.omega < 0.0 || !p.delta.is_finite() {
                return Err(param(format!(
                    "party {}: frequency must be finite and ≥ 0, offset finite",
                    p.index
                )));
            }
        }
        let std = parties[standard_index];
        if std.omega != 0.0 || std.delta != 0.0 {
            return Err(param(
                "the standard party must have zero frequency and zero offset",
            ));
        }
        Ok(Self {
            state_kind,
            parties,
            standard_index,
        })
    }

    /// Standard clock on qubit 0 and the clocks on qubits `1..` with the given
    /// frequencies (missing entries are idle, `ω = 0`) and a shared offset.
    pub fn with_clocks(
        state_kind: EntangledStateKind,
        clock_omegas: &[f64],
        delta: f64,
    ) -> Result<Self> {
        let n = state_kind.num_qubits();
        if clock_omegas.len() >= n {
            return Err(param(format!(
                "{state_kind} has only {} non-standard qubits",
                n - 1
            )));
        }
        let parties = (0..n)
            .map(|index| {
                if index == 0 {
                    PartyConfig {
                        index,
                        omega: 0.0,
                        delta: 0.0,
                    }
                } else {
                    PartyConfig {
                        index,
                        omega: clock_omegas.get(index - 1).copied().unwrap_or(0.0),
                        delta,
                    }
                }
            })
            .collect();
        Self::new(state_kind, 0, parties)
    }

    pub fn state_kind(&self) -> EntangledStateKind {
        self.state_kind
    }

    pub fn standard_index(&self) -> usize {
        self.standard_index
    }

    pub fn parties(&self) -> &[PartyConfig] {
        &self.parties
    }

    /// Copy with every non-standard offset set to `delta`.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let parties = self
            .parties
            .iter()
            .map(|p| PartyConfig {
                delta: if p.index == self.standard_index {
                    0.0
                } else {
                    delta
                },
                ..*p
            })
            .collect();
        Self::new(self.state_kind, self.standard_index, parties)
    }
}

/// Result of measuring one qubit in the dual basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMeasurement {
    pub p_pos: f64,
    pub p_neg: f64,
    /// Post-measurement state; `None` when the branch has zero probability.
    pub collapsed_pos: Option<StateVector>,
    pub collapsed_neg: Option<StateVector>,
}

fn project(state: &StateVector, qubit: usize, outcome: DualOutcome) -> (f64, Option<StateVector>) {
    let n = state.num_qubits();
    let [c0, c1] = DualBasis::amplitudes(outcome);
    let mask = 1usize << (n - 1 - qubit);
    let amps = state.amplitudes();
    let mut out = vec![num_complex::Complex64::new(0.0, 0.0); amps.len()];
    let mut prob = 0.0;
    for low in (0..amps.len()).filter(|b| b & mask == 0) {
        let reduced = c0.conj() * amps[low] + c1.conj() * amps[low | mask];
        prob += reduced.norm_sqr();
        out[low] = c0 * reduced;
        out[low | mask] = c1 * reduced;
    }
    if prob < ZERO_BRANCH_TOL {
        return (prob, None);
    }
    (prob, StateVector::normalized(n, out))
}

/// Projective dual-basis measurement of `qubit`.
pub fn measure_dual_basis(state: &StateVector, qubit: usize) -> Result<DualMeasurement> {
    if qubit >= state.num_qubits() {
        return Err(param(format!("qubit {qubit} out of range")));
    }
    let (p_pos, collapsed_pos) = project(state, qubit, DualOutcome::Pos);
    let (p_neg, collapsed_neg) = project(state, qubit, DualOutcome::Neg);
    Ok(DualMeasurement {
        p_pos,
        p_neg,
        collapsed_pos,
        collapsed_neg,
    })
}

/// Marginal probability that `qubit` reads `|pos⟩`.
pub fn dual_marginal_pos(state: &StateVector, qubit: usize) -> Result<f64> {
    if qubit >= state.num_qubits() {
        return Err(param(format!("qubit {qubit} out of range")));
    }
    let n = state.num_qubits();
    let amps = state.amplitudes();
    Ok((0..amps.len())
        .filter(|&b| qubit_bit(n, b, qubit) == 0)
        .map(|b| (amps[b] + amps[b | (1 << (n - 1 - qubit))]).norm_sqr() / 2.0)
        .sum())
}

/// Conditional outcome probabilities of one non-standard party.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartyOutcome {
    pub index: usize,
    pub omega: f64,
    pub delta: f64,
    /// `P(pos on party | standard pos)`; `None` if that branch is impossible.
    pub p_pos_given_pos: Option<f64>,
    pub p_pos_given_neg: Option<f64>,
}

impl PartyOutcome {
    pub fn p_neg_given_pos(&self) -> Option<f64> {
        self.p_pos_given_pos.map(|p| 1.0 - p)
    }

    pub fn p_neg_given_neg(&self) -> Option<f64> {
        self.p_pos_given_neg.map(|p| 1.0 - p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalOutcomeTable {
    pub state_kind: EntangledStateKind,
    pub standard_index: usize,
    pub p_standard_pos: f64,
    /// Non-standard parties in qubit order.
    pub parties: Vec<PartyOutcome>,
}

impl ConditionalOutcomeTable {
    pub fn party(&self, index: usize) -> Option<&PartyOutcome> {
        self.parties.iter().find(|p| p.index == index)
    }
}

fn evolve_clocks(state: StateVector, config: &ProtocolConfig) -> Result<StateVector> {
    config
        .parties
        .iter()
        .filter(|p| p.index != config.standard_index)
        .try_fold(state, |s, p| {
            s.apply_phase_rotation(p.index, p.omega * p.delta)
        })
}

/// Exact conditional statistics of one protocol run.
pub fn run_protocol_exact(config: &ProtocolConfig) -> Result<ConditionalOutcomeTable> {
    let register = config.state_kind.prepare()?;
    let measurement = measure_dual_basis(&register, config.standard_index)?;
    let branch = |collapsed: Option<StateVector>| -> Result<Option<StateVector>> {
        collapsed.map(|s| evolve_clocks(s, config)).transpose()
    };
    let after_pos = branch(measurement.collapsed_pos)?;
    let after_neg = branch(measurement.collapsed_neg)?;
    let marginal = |s: &Option<StateVector>, q: usize| -> Result<Option<f64>> {
        s.as_ref().map(|s| dual_marginal_pos(s, q)).transpose()
    };
    let parties = config
        .parties
        .iter()
        .filter(|p| p.index != config.standard_index)
        .map(|p| {
            Ok(PartyOutcome {
                index: p.index,
                omega: p.omega,
                delta: p.delta,
                p_pos_given_pos: marginal(&after_pos, p.index)?,
                p_pos_given_neg: marginal(&after_neg, p.index)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalOutcomeTable {
        state_kind: config.state_kind,
        standard_index: config.standard_index,
        p_standard_pos: measurement.p_pos,
        parties,
    })
}

/// Cosine amplitude `A₀` of `P(pos | standard pos) = 1/2 + A₀·cos(ωΔ)`.
pub fn cosine_amplitude(kind: EntangledStateKind) -> Result<f64> {
    kind.validate()?;
    Ok(match kind {
        EntangledStateKind::Bell => 0.5,
        EntangledStateKind::W { n } => 1.0 / n as f64,
        EntangledStateKind::Dicke { n, k } => (k * (n - k)) as f64 / (n * (n - 1)) as f64,
    })
}

/// Closed-form `P(pos | standard pos)`.
pub fn analytic_probability(kind: EntangledStateKind, omega: f64, delta: f64) -> Result<f64> {
    Ok(0.5 + cosine_amplitude(kind)? * (omega * delta).cos())
}

/// Outcome counts of one party, split by the broadcast standard outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartyCounts {
    pub index: usize,
    pub pos_given_pos: u64,
    pub neg_given_pos: u64,
    pub pos_given_neg: u64,
    pub neg_given_neg: u64,
}

impl PartyCounts {
    /// Empirical `P(pos | standard pos)`; `None` if no shot landed in that class.
    pub fn empirical_pos_given_pos(&self) -> Option<f64> {
        let class = self.pos_given_pos + self.neg_given_pos;
        (class > 0).then(|| self.pos_given_pos as f64 / class as f64)
    }

    pub fn empirical_pos_given_neg(&self) -> Option<f64> {
        let class = self.pos_given_neg + self.neg_given_neg;
        (class > 0).then(|| self.pos_given_neg as f64 / class as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    pub shots: u64,
    pub seed: u64,
    pub standard_pos: u64,
    pub standard_neg: u64,
    pub parties: Vec<PartyCounts>,
}

fn binomial(rng: &mut rand_chacha::ChaCha8Rng, trials: u64, p: f64) -> Result<u64> {
    let dist = Binomial::new(trials, p.clamp(0.0, 1.0)).map_err(|e| param(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Finite-shot counts: the standard outcome of each shot, then each party's
/// outcome from its conditional probability. Drawn class-wise as binomials
/// from a ChaCha8 stream seeded with `seed`.
pub fn sample_shots(table: &ConditionalOutcomeTable, shots: u64, seed: u64) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(param("shots must be ≥ 1"));
    }
    let mut rng = rng_from_seed(seed);
    let standard_pos = binomial(&mut rng, shots, table.p_standard_pos)?;
    let standard_neg = shots - standard_pos;
    let mut parties = Vec::with_capacity(table.parties.len());
    for p in &table.parties {
        let pos_given_pos = binomial(&mut rng, standard_pos, p.p_pos_given_pos.unwrap_or(0.0))?;
        let pos_given_neg = binomial(&mut rng, standard_neg, p.p_pos_given_neg.unwrap_or(0.0))?;
        parties.push(PartyCounts {
            index: p.index,
            pos_given_pos,
            neg_given_pos: standard_pos - pos_given_pos,
            pos_given_neg,
            neg_given_neg: standard_neg - pos_given_neg,
        });
    }
    Ok(ShotRecord {
        shots,
        seed,
        standard_pos,
        standard_neg,
        parties,
    })
}

/// One exact table per offset, in input order.
pub fn sweep(template: &ProtocolConfig, deltas: &[f64]) -> Result<Vec<ConditionalOutcomeTable>> {
    if deltas.is_empty() {
        return Err(Error::Parameter("sweep needs at least one offset".into()));
    }
    deltas
        .iter()
        .map(|&d| run_protocol_exact(&template.with_delta(d)?))
        .collect()
}
