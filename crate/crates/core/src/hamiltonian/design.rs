//! Refocusing schedules that realize the ideal clock Hamiltonian exactly.
//!
//! Segment sign rows are built from a Sylvester–Hadamard basis of length
//! `L = 4^t ≥ max(n − 1, 4)` twisted by the bent function `d(x) = (−1)^{x₀x₁ + x₂x₃ + …}`.
//! Every twisted row `d ∘ h_a` has sum `±√L`, and the rows stay mutually
//! orthogonal, so after fixing signs each clock row sums to `−√L`. Rows are
//! repeated twice (`2L` segments) while the standard clock takes
//! `(+1…+1, −1…−1)`, which is orthogonal to every repeated row.
//!
//! Resulting sign table, `m = 2L` segments of length `Δ/(2√L)`:
//! standard sum 0, clock sums `−2√L` (equal to `−m/2` for `n ≤ 5`), all
//! pair sums 0, and every qubit receives an even number of pulses.

use crate::error::{param, Result};

use super::echo::{EchoEvent, EchoSequence};

/// Largest register supported by [`design_refocusing_sequence`].
pub const MAX_DESIGN_QUBITS: usize = 32;

/// Per-qubit segment signs of a refocusing schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefocusingRows {
    /// `rows[q][s]` is the sign of `σ_z^q` during segment `s`.
    pub rows: Vec<Vec<i8>>,
    /// `√L`; every clock row sums to `−2·sqrt_len`.
    pub sqrt_len: usize,
}

impl RefocusingRows {
    pub fn segment_count(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Magnitude of the (negative) per-qubit sum of every clock row.
    pub fn clock_sum(&self) -> usize {
        2 * self.sqrt_len
    }
}

fn parity(x: usize) -> i8 {
    if x.count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Bent function on `2t` bits, pairing adjacent bits.
fn bent_sign(x: usize, t: usize) -> i8 {
    let quad = (0..t)
        .map(|i| (x >> (2 * i)) & (x >> (2 * i + 1)) & 1)
        .sum::<usize>();
    if quad % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign rows for an `n`-qubit register with standard clock `standard_index`.
pub fn refocusing_sign_rows(n: usize, standard_index: usize) -> Result<RefocusingRows> {
    if !(2..=MAX_DESIGN_QUBITS).contains(&n) {
        return Err(param(format!(
            "refocusing design needs 2 ≤ n ≤ {MAX_DESIGN_QUBITS}, got {n}"
        )));
    }
    if standard_index >= n {
        return Err(param(format!(
            "standard index {standard_index} out of range for {n} qubits"
        )));
    }
    let clocks = n - 1;
    // L ≥ 4 keeps the clock sums at −m/2 for every n ≤ 5.
    let mut t = 1;
    while 1usize << (2 * t) < clocks {
        t += 1;
    }
    let len = 1usize << (2 * t);
    let sqrt_len = 1usize << t;

    let twisted =
        |a: usize| -> Vec<i8> { (0..len).map(|x| bent_sign(x, t) * parity(a & x)).collect() };

    let mut rows = Vec::with_capacity(n);
    let mut next_row = 0;
    for q in 0..n {
        if q == standard_index {
            rows.push((0..2 * len).map(|s| if s < len { 1 } else { -1 }).collect());
            continue;
        }
        let mut half = twisted(next_row);
        next_row += 1;
        let sum: i64 = half.iter().map(|&s| i64::from(s)).sum();
        if sum > 0 {
            half.iter_mut().for_each(|s| *s = -*s);
        }
        let mut row = half.clone();
        row.extend_from_slice(&half);
        rows.push(row);
    }
    Ok(RefocusingRows { rows, sqrt_len })
}

/// Pulse/delay schedule whose unitary equals `e^{−iH_ideal·delta}` up to a
/// global phase for any molecule whose clock shifts match the ideal ones.
pub fn design_refocusing_sequence(
    n: usize,
    standard_index: usize,
    delta: f64,
) -> Result<EchoSequence> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(param(format!(
            "delta must be finite and non-negative, got {delta}"
        )));
    }
    let plan = refocusing_sign_rows(n, standard_index)?;
    let segments = plan.segment_count();
    let segment_duration = delta / plan.clock_sum() as f64;

    let mut events = Vec::with_capacity(2 * segments + 1);
    let mut current = vec![1i8; n];
    for s in 0..segments {
        let flips: Vec<usize> = (0..n).filter(|&q| plan.rows[q][s] != current[q]).collect();
        if !flips.is_empty() {
            events.push(EchoEvent::Pulse(flips));
        }
        for (c, row) in current.iter_mut().zip(&plan.rows) {
            *c = row[s];
        }
        events.push(EchoEvent::Delay(segment_duration));
    }
    let restore: Vec<usize> = (0..n).filter(|&q| current[q] < 0).collect();
    if !restore.is_empty() {
        events.push(EchoEvent::Pulse(restore));
    }
    EchoSequence::new(n, events)
}
