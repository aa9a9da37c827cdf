//! Offset estimation from outcome frequencies.
//!
//! `P(pos | standard pos) = 1/2 + A₀·cos(ωΔ)` is inverted on its principal
//! branch, `Δ̂ = arccos((p − 1/2)/A₀)/ω ∈ [0, π/ω]`. A cosine cannot tell `Δ`
//! from `2π/ω − Δ` (or from `−Δ`), so offsets outside `[0, π/ω]` fold back
//! into that interval.
//!
//! Shot-noise accuracy follows the delta method,
//! `σ_Δ ≈ √(p(1−p)/N) / (A₀·ω·|sin ωΔ|)`, which diverges at `ωΔ ∈ {0, π}`.

use num_rational::Ratio;

use crate::error::{param, Result};
use crate::protocol::{cosine_amplitude, run_protocol_exact, sample_shots, ProtocolConfig};
use crate::rng::derive_seed;
use crate::states::EntangledStateKind;

/// `|sin ωΔ|` below this flags the estimate as singular.
pub const SINGULAR_SIN_TOL: f64 = 1e-6;

/// Cosine amplitude of a Dicke register, exact and as a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeFigure {
    pub n: usize,
    pub k: usize,
    pub exact: Ratio<u64>,
    pub a0: f64,
}

/// `A₀(n, k) = k(n−k) / (n(n−1))`.
pub fn amplitude(n: usize, k: usize) -> Result<AmplitudeFigure> {
    if n < 2 || k == 0 || k >= n {
        return Err(param(format!(
            "amplitude needs n ≥ 2 and 1 ≤ k ≤ n−1, got n={n}, k={k}"
        )));
    }
    let exact = Ratio::new((k * (n - k)) as u64, (n * (n - 1)) as u64);
    let a0 = *exact.numer() as f64 / *exact.denom() as f64;
    Ok(AmplitudeFigure { n, k, exact, a0 })
}

/// Excitation number that maximizes `A₀(n, ·)`: `⌊n/2⌋`.
pub fn k_opt(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(param(format!("k_opt needs n ≥ 2, got {n}")));
    }
    Ok(n / 2)
}

/// `(p − 1/2)/A₀`, the cosine implied by an observed probability (unclamped).
pub fn implied_cosine(p: f64, a0: f64) -> f64 {
    (p - 0.5) / a0
}

/// Principal-branch offset estimate in seconds; out-of-range cosines from
/// statistical overshoot are clamped to `±1`.
pub fn invert_probability(p: f64, a0: f64, omega: f64) -> Result<f64> {
    if a0 <= 0.0 || !a0.is_finite() {
        return Err(param(format!("amplitude must be positive, got {a0}")));
    }
    if omega <= 0.0 || !omega.is_finite() {
        return Err(param(format!(
            "angular frequency must be positive, got {omega}"
        )));
    }
    if !p.is_finite() {
        return Err(param(format!("probability must be finite, got {p}")));
    }
    Ok(implied_cosine(p, a0).clamp(-1.0, 1.0).acos() / omega)
}

/// Conditions that make a Monte Carlo estimate unreliable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EstimateFlags {
    /// `|sin ωΔ|` is ~0; the estimator variance diverges.
    pub singular: bool,
    /// `ωΔ ∉ [0, π]`; estimates fold back onto the principal branch.
    pub off_branch: bool,
    /// Fewer than two usable trials; the standard deviation is reported as 0.
    pub degenerate: bool,
    /// Some trial had no shot conditioned on standard `pos`; it was skipped.
    pub empty_class: bool,
}

impl EstimateFlags {
    pub fn any(&self) -> bool {
        self.singular || self.off_branch || self.degenerate || self.empty_class
    }

    /// Space-separated flag names, empty when no flag is set.
    pub fn describe(&self) -> String {
        [
            (self.singular, "singular"),
            (self.off_branch, "off_branch"),
            (self.degenerate, "degenerate"),
            (self.empty_class, "empty_class"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, name)| *name)
        .collect::<Vec<_>>()
        .join(" ")
    }
}

/// Monte Carlo accuracy of one protocol at one `(ω, Δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub kind: EntangledStateKind,
    pub omega: f64,
    pub delta_true: f64,
    pub shots: u64,
    pub trials: u64,
    pub seed: u64,
    pub p_exact: f64,
    pub mean_p_empirical: f64,
    pub mean_delta_hat: f64,
    pub mean_abs_error: f64,
    /// Sample standard deviation of `Δ̂` (divisor `trials − 1`), seconds.
    pub std_s: f64,
    pub flags: EstimateFlags,
}

/// Sample mean and standard deviation with the `len − 1` divisor.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Standard deviation of `Δ̂` over `trials` independent shot records.
///
/// The standard clock sits on qubit 0 and the estimated clock on qubit 1;
/// only shots conditioned on the standard outcome `pos` are used. Trial `i`
/// draws from the stream `derive_seed(seed, i, 0)`, so cells that share a
/// seed also share their random numbers.
pub fn monte_carlo_std(
    kind: EntangledStateKind,
    omega: f64,
    delta_true: f64,
    shots: u64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    monte_carlo_cell(kind, omega, delta_true, shots, trials, seed, 0)
}

fn monte_carlo_cell(
    kind: EntangledStateKind,
    omega: f64,
    delta_true: f64,
    shots: u64,
    trials: u64,
    seed: u64,
    delta_index: u64,
) -> Result<McEstimate> {
    if shots == 0 || trials == 0 {
        return Err(param("shots and trials must be ≥ 1"));
    }
    if omega <= 0.0 || !omega.is_finite() || !delta_true.is_finite() {
        return Err(param(
            "need a positive finite frequency and a finite offset",
        ));
    }
    let a0 = cosine_amplitude(kind)?;
    let table = run_protocol_exact(&ProtocolConfig::with_clocks(kind, &[omega], delta_true)?)?;
    let p_exact = table.parties[0]
        .p_pos_given_pos
        .ok_or_else(|| param("standard pos branch has zero probability"))?;

    let phase = omega * delta_true;
    let mut flags = EstimateFlags {
        singular: phase.sin().abs() < SINGULAR_SIN_TOL,
        off_branch: !(0.0..=std::f64::consts::PI).contains(&phase),
        ..EstimateFlags::default()
    };

    let mut p_values = Vec::with_capacity(trials as usize);
    let mut estimates = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let record = sample_shots(&table, shots, derive_seed(seed, trial, delta_index))?;
        match record.parties[0].empirical_pos_given_pos() {
            Some(p) => {
                p_values.push(p);
                estimates.push(invert_probability(p, a0, omega)?);
            }
            None => flags.empty_class = true,
        }
    }
    flags.degenerate = estimates.len() < 2;
    let (mean_p, _) = mean_std(&p_values);
    let (mean_delta_hat, std_s) = mean_std(&estimates);
    let mean_abs_error = if estimates.is_empty() {
        f64::NAN
    } else {
        estimates
            .iter()
            .map(|e| (e - delta_true).abs())
            .sum::<f64>()
            / estimates.len() as f64
    };
    Ok(McEstimate {
        kind,
        omega,
        delta_true,
        shots,
        trials,
        seed,
        p_exact,
        mean_p_empirical: mean_p,
        mean_delta_hat,
        mean_abs_error,
        std_s,
        flags,
    })
}

/// Grid of Monte Carlo standard deviations, one row per kind and one column
/// per frequency, each cell at `Δ = phase/ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    pub kinds: Vec<EntangledStateKind>,
    pub omegas: Vec<f64>,
    pub phase: f64,
    pub shots: u64,
    pub trials: u64,
    pub seed: u64,
    /// `cells[row][col]` for `kinds[row]`, `omegas[col]`.
    pub cells: Vec<Vec<McEstimate>>,
}

impl EstimationReport {
    /// Standard deviations in microseconds, row-major.
    pub fn std_us(&self) -> Vec<Vec<f64>> {
        self.cells
            .iter()
            .map(|row| row.iter().map(|c| c.std_s * 1e6).collect())
            .collect()
    }
}

pub fn comparison_table(
    omegas: &[f64],
    kinds: &[EntangledStateKind],
    phase: f64,
    shots: u64,
    trials: u64,
    seed: u64,
) -> Result<EstimationReport> {
    if omegas.is_empty() || kinds.is_empty() {
        return Err(param(
            "comparison table needs at least one frequency and one kind",
        ));
    }
    if !phase.is_finite() {
        return Err(param("phase ωΔ must be finite"));
    }
    let cells = kinds
        .iter()
        .map(|&kind| {
            omegas
                .iter()
                .map(|&omega| monte_carlo_cell(kind, omega, phase / omega, shots, trials, seed, 0))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimationReport {
        kinds: kinds.to_vec(),
        omegas: omegas.to_vec(),
        phase,
        shots,
        trials,
        seed,
        cells,
    })
}
