//! Diagonal clock Hamiltonians and the spin-echo machinery that reduces the
//! weakly coupled NMR Hamiltonian to the ideal clock Hamiltonian.
//!
//! Internal (lab) Hamiltonian, with `z_j = ±1` the `σ_z` eigenvalue of qubit `j`:
//!
//! ```text
//! H = −Σ_j (ω_j/2) z_j + Σ_{j<k} (π/2) J_jk z_j z_k        ω in rad/s, J in Hz
//! ```
//!
//! Ideal clock Hamiltonian, standard clock excluded:
//!
//! ```text
//! H_ideal = +Σ_{j≠std} (ω_j/2) z_j
//! ```

mod design;
mod echo;

pub use design::{
    design_refocusing_sequence, refocusing_sign_rows, RefocusingRows, MAX_DESIGN_QUBITS,
};
pub use echo::{
    build_published_echo_sequence, evolve_state, sequence_unitary, sign_table, verify_echo,
    EchoEvent, EchoReport, EchoSequence, Residual, SignTable, TemporalConvention,
};

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::qsim::z_value;

/// Chemical shifts (rad/s) and symmetric scalar couplings (Hz) of a register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeSpec {
    omega: Vec<f64>,
    j_coupling: Vec<Vec<f64>>,
}

impl MoleculeSpec {
    /// Validates symmetry and zero diagonal of `j_coupling`.
    pub fn new(omega: Vec<f64>, j_coupling: Vec<Vec<f64>>) -> Result<Self> {
        let n = omega.len();
        if n == 0 {
            return Err(param("molecule needs at least one qubit"));
        }
        if j_coupling.len() != n || j_coupling.iter().any(|row| row.len() != n) {
            return Err(param(format!("J-coupling matrix must be {n}x{n}")));
        }
        if omega
            .iter()
            .chain(j_coupling.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(param("molecule parameters must be finite"));
        }
        #[allow(clippy::needless_range_loop)]
        for a in 0..n {
            if j_coupling[a][a] != 0.0 {
                return Err(param(format!("J[{a}][{a}] must be zero")));
            }
            for b in a + 1..n {
                if j_coupling[a][b] != j_coupling[b][a] {
                    return Err(param(format!("J[{a}][{b}] != J[{b}][{a}]")));
                }
            }
        }
        Ok(Self { omega, j_coupling })
    }

    /// Builds the couplings from the row-major upper triangle
    /// `[J01, J02, …, J0(n-1), J12, …]`.
    pub fn from_upper_triangle(omega: Vec<f64>, upper: &[f64]) -> Result<Self> {
        let n = omega.len();
        let expected = n * n.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(param(format!(
                "expected {expected} upper-triangular couplings for {n} qubits, got {}",
                upper.len()
            )));
        }
        let mut j = vec![vec![0.0; n]; n];
        let mut values = upper.iter();
        #[allow(clippy::needless_range_loop)]
        for a in 0..n {
            for b in a + 1..n {
                let v = *values.next().expect("length checked");
                j[a][b] = v;
                j[b][a] = v;
            }
        }
        Self::new(omega, j)
    }

    /// Uncoupled register with the given shifts.
    pub fn uncoupled(omega: Vec<f64>) -> Result<Self> {
        let n = omega.len();
        Self::new(omega, vec![vec![0.0; n]; n])
    }

    pub fn num_qubits(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn j_coupling(&self) -> &[Vec<f64>] {
        &self.j_coupling
    }
}

/// Ideal clock Hamiltonian parameters; the standard clock has zero frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealClockSpec {
    standard_index: usize,
    omega: Vec<f64>,
}

impl IdealClockSpec {
    pub fn new(standard_index: usize, omega: Vec<f64>) -> Result<Self> {
        if standard_index >= omega.len() {
            return Err(param(format!(
                "standard index {standard_index} out of range for {} qubits",
                omega.len()
            )));
        }
        if omega[standard_index] != 0.0 {
            return Err(param("the standard clock must have zero frequency"));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(param("clock frequencies must be finite"));
        }
        Ok(Self {
            standard_index,
            omega,
        })
    }

    /// Ideal spec that keeps the molecule's non-standard shifts.
    pub fn from_molecule(molecule: &MoleculeSpec, standard_index: usize) -> Result<Self> {
        let mut omega = molecule.omega().to_vec();
        if standard_index >= omega.len() {
            return Err(param(format!(
                "standard index {standard_index} out of range"
            )));
        }
        omega[standard_index] = 0.0;
        Self::new(standard_index, omega)
    }

    pub fn num_qubits(&self) -> usize {
        self.omega.len()
    }

    pub fn standard_index(&self) -> usize {
        self.standard_index
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }
}

fn check_index(n: usize, basis_index: usize) -> Result<()> {
    if n >= usize::BITS as usize || basis_index >= 1usize << n {
        return Err(param(format!(
            "basis index {basis_index} out of range for {n} qubits"
        )));
    }
    Ok(())
}

/// Eigenvalue (rad/s) of the internal Hamiltonian on `basis_index`.
pub fn internal_energy(spec: &MoleculeSpec, basis_index: usize) -> Result<f64> {
    let n = spec.num_qubits();
    check_index(n, basis_index)?;
    Ok(internal_energy_unchecked(spec, basis_index))
}

fn internal_energy_unchecked(spec: &MoleculeSpec, b: usize) -> f64 {
    let n = spec.num_qubits();
    let z: Vec<f64> = (0..n).map(|q| z_value(n, b, q)).collect();
    let mut energy = 0.0;
    for j in 0..n {
        energy -= 0.5 * spec.omega[j] * z[j];
        for k in j + 1..n {
            energy += FRAC_PI_2 * spec.j_coupling[j][k] * z[j] * z[k];
        }
    }
    energy
}

/// Internal Hamiltonian diagonal over all basis states.
pub fn internal_energies(spec: &MoleculeSpec) -> Vec<f64> {
    (0..1usize << spec.num_qubits())
        .map(|b| internal_energy_unchecked(spec, b))
        .collect()
}

/// Eigenvalue (rad/s) of the ideal clock Hamiltonian on `basis_index`.
pub fn ideal_energy(spec: &IdealClockSpec, basis_index: usize) -> Result<f64> {
    let n = spec.num_qubits();
    check_index(n, basis_index)?;
    Ok(ideal_energy_unchecked(spec, basis_index))
}

fn ideal_energy_unchecked(spec: &IdealClockSpec, b: usize) -> f64 {
    let n = spec.num_qubits();
    (0..n)
        .filter(|&j| j != spec.standard_index)
        .map(|j| 0.5 * spec.omega[j] * z_value(n, b, j))
        .sum()
}

/// Ideal Hamiltonian diagonal over all basis states.
pub fn ideal_energies(spec: &IdealClockSpec) -> Vec<f64> {
    (0..1usize << spec.num_qubits())
        .map(|b| ideal_energy_unchecked(spec, b))
        .collect()
}
