//! Entangled clock registers: Bell, W and Dicke states, built by direct
//! amplitude assignment, plus the dual measurement basis.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::qsim::StateVector;

/// Largest register the state constructors accept.
pub const MAX_STATE_QUBITS: usize = 24;

/// Initial entangled state of a protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EntangledStateKind {
    /// `(|00⟩ + |11⟩)/√2`.
    Bell,
    /// Uniform superposition of the weight-1 strings.
    W { n: usize },
    /// Uniform superposition of the weight-`k` strings.
    Dicke { n: usize, k: usize },
}

impl EntangledStateKind {
    pub fn num_qubits(&self) -> usize {
        match *self {
            Self::Bell => 2,
            Self::W { n } | Self::Dicke { n, .. } => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Bell => Ok(()),
            Self::W { n } => {
                if !(2..=MAX_STATE_QUBITS).contains(&n) {
                    return Err(param(format!(
                        "W state needs 2 ≤ n ≤ {MAX_STATE_QUBITS}, got {n}"
                    )));
                }
                Ok(())
            }
            Self::Dicke { n, k } => {
                if !(2..=MAX_STATE_QUBITS).contains(&n) {
                    return Err(param(format!(
                        "Dicke state needs 2 ≤ n ≤ {MAX_STATE_QUBITS}, got {n}"
                    )));
                }
                if k == 0 || k >= n {
                    return Err(param(format!(
                        "Dicke state needs 1 ≤ k ≤ n−1, got n={n}, k={k}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Prepares the register for this kind.
    pub fn prepare(&self) -> Result<StateVector> {
        match *self {
            Self::Bell => Ok(prepare_bell()),
            Self::W { n } => prepare_w(n),
            Self::Dicke { n, k } => prepare_dicke(n, k),
        }
    }

    /// Short label used in reports, e.g. `W(4)` or `Dicke(4,2)`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for EntangledStateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Bell => write!(f, "Bell"),
            Self::W { n } => write!(f, "W({n})"),
            Self::Dicke { n, k } => write!(f, "Dicke({n},{k})"),
        }
    }
}

/// Outcome of a dual-basis measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DualOutcome {
    Pos,
    Neg,
}

/// The dual basis `|pos⟩ = (|0⟩+|1⟩)/√2`, `|neg⟩ = (|0⟩−|1⟩)/√2`.
pub struct DualBasis;

impl DualBasis {
    /// Single-qubit amplitudes `(⟨0|v⟩, ⟨1|v⟩)` of the basis vector.
    pub fn amplitudes(outcome: DualOutcome) -> [Complex64; 2] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match outcome {
            DualOutcome::Pos => [h, h],
            DualOutcome::Neg => [h, -h],
        }
    }

    pub fn state(outcome: DualOutcome) -> StateVector {
        StateVector::new(1, Self::amplitudes(outcome).to_vec())
            .expect("dual basis vector is normalized")
    }
}

/// Binomial coefficient `C(n, k)`; exact for the register sizes used here.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

/// All basis indices of an `n`-qubit register with exactly `k` ones, in
/// increasing order.
pub fn hamming_weight_states(n: usize, k: usize) -> Vec<usize> {
    if k > n || n >= usize::BITS as usize {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::with_capacity(binomial(n, k) as usize);
    // Gosper's hack walks same-popcount integers in increasing order.
    let mut x: usize = (1 << k) - 1;
    let limit = 1usize << n;
    while x < limit {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

fn uniform_superposition(n: usize, support: &[usize]) -> Result<StateVector> {
    let amp = Complex64::new(1.0 / (support.len() as f64).sqrt(), 0.0);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
    for &b in support {
        amplitudes[b] = amp;
    }
    StateVector::new(n, amplitudes)
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn prepare_bell() -> StateVector {
    uniform_superposition(2, &[0b00, 0b11]).expect("Bell state is normalized")
}

/// `n`-qubit W state.
pub fn prepare_w(n: usize) -> Result<StateVector> {
    EntangledStateKind::W { n }.validate()?;
    uniform_superposition(n, &hamming_weight_states(n, 1))
}

/// `n`-qubit Dicke state with `k` excitations; amplitude `1/√C(n,k)`.
pub fn prepare_dicke(n: usize, k: usize) -> Result<StateVector> {
    EntangledStateKind::Dicke { n, k }.validate()?;
    uniform_superposition(n, &hamming_weight_states(n, k))
}
