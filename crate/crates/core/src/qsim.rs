//! Exact pure-state primitives: amplitude storage, π rotations about y,
//! diagonal phase evolutions and small dense unitaries used as oracles.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{param, Error, Result};

/// Tolerance on `Σ|a|² = 1` accepted by the state constructors.
pub const STATE_TOL: f64 = 1e-12;
/// Tolerance on `U†U = I` (max-entry norm) accepted by [`DenseUnitary`].
pub const UNITARY_TOL: f64 = 1e-10;
/// Largest register for which dense matrices are built.
pub const MAX_DENSE_QUBITS: usize = 8;

/// Value (0 or 1) of `qubit` inside basis index `index`. Qubit 0 is the most
/// significant bit.
#[inline]
pub fn qubit_bit(num_qubits: usize, index: usize, qubit: usize) -> usize {
    (index >> (num_qubits - 1 - qubit)) & 1
}

/// `σ_z` eigenvalue of `qubit` in basis state `index`: +1 for bit 0, −1 for bit 1.
#[inline]
pub fn z_value(num_qubits: usize, index: usize, qubit: usize) -> f64 {
    if qubit_bit(num_qubits, index, qubit) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Normalized amplitude vector over the `2ⁿ` computational basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, checking length and normalization.
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(param("a register needs at least one qubit"));
        }
        if num_qubits >= usize::BITS as usize {
            return Err(Error::Resource(format!("{num_qubits} qubits")));
        }
        let dim = 1usize << num_qubits;
        if amplitudes.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(param(format!("amplitudes have squared norm {norm}")));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits >= usize::BITS as usize {
            return Err(param(format!("unsupported qubit count {num_qubits}")));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(param(format!("basis index {index} out of range for {dim}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Renormalizes an unnormalized vector. Returns `None` for a zero vector.
    pub(crate) fn normalized(num_qubits: usize, mut amplitudes: Vec<Complex64>) -> Option<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm <= f64::MIN_POSITIVE {
            return None;
        }
        let scale = 1.0 / norm.sqrt();
        amplitudes.iter_mut().for_each(|a| *a *= scale);
        Some(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_dim(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest amplitude-wise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(param(format!(
                "qubit {qubit} out of range for a {}-qubit register",
                self.num_qubits
            )));
        }
        Ok(())
    }

    /// Applies `exp(−iπY/2) = [[0, −1], [1, 0]]` to `qubit`.
    pub fn apply_ry_pi(mut self, qubit: usize) -> Result<Self> {
        self.check_qubit(qubit)?;
        let mask = 1usize << (self.num_qubits - 1 - qubit);
        for low in 0..self.amplitudes.len() {
            if low & mask != 0 {
                continue;
            }
            let high = low | mask;
            let a0 = self.amplitudes[low];
            let a1 = self.amplitudes[high];
            self.amplitudes[low] = -a1;
            self.amplitudes[high] = a0;
        }
        Ok(self)
    }

    /// Evolves `qubit` under `H = (angle/2)·σ_z` for unit time: the `|0⟩`
    /// component picks up `e^{−i·angle/2}` and `|1⟩` picks up `e^{+i·angle/2}`.
    ///
    /// Routed through [`apply_diagonal_evolution`](Self::apply_diagonal_evolution)
    /// so both paths agree bit for bit.
    pub fn apply_phase_rotation(self, qubit: usize, angle: f64) -> Result<Self> {
        self.check_qubit(qubit)?;
        if !angle.is_finite() {
            return Err(param(format!("non-finite rotation angle {angle}")));
        }
        let n = self.num_qubits;
        let energies: Vec<f64> = (0..self.dim())
            .map(|b| 0.5 * angle * z_value(n, b, qubit))
            .collect();
        self.apply_diagonal_evolution(&energies, 1.0)
    }

    /// Multiplies the amplitude of basis state `b` by `e^{−i·energies[b]·t}`.
    pub fn apply_diagonal_evolution(mut self, energies: &[f64], t: f64) -> Result<Self> {
        if energies.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: energies.len(),
            });
        }
        if !t.is_finite() || energies.iter().any(|e| !e.is_finite()) {
            return Err(param("non-finite energy or time"));
        }
        for (amp, &energy) in self.amplitudes.iter_mut().zip(energies) {
            *amp *= Complex64::from_polar(1.0, -energy * t);
        }
        Ok(self)
    }
}

/// Dense `d × d` unitary, `d = 2ⁿ` with `n ≤` [`MAX_DENSE_QUBITS`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary {
    num_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl DenseUnitary {
    /// Wraps a matrix after checking shape and `U†U = I` within [`UNITARY_TOL`].
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(param(format!(
                "matrix is {}x{}, not square",
                dim,
                matrix.ncols()
            )));
        }
        if !dim.is_power_of_two() || dim < 2 {
            return Err(param(format!("dimension {dim} is not a power of two ≥ 2")));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        if num_qubits > MAX_DENSE_QUBITS {
            return Err(Error::Resource(format!(
                "dense unitary on {num_qubits} qubits exceeds {MAX_DENSE_QUBITS}"
            )));
        }
        let unitary = Self { num_qubits, matrix };
        let defect = unitary.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(param(format!("matrix is not unitary (defect {defect:e})")));
        }
        Ok(unitary)
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        Self::check_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        Ok(Self {
            num_qubits,
            matrix: DMatrix::identity(dim, dim),
        })
    }

    /// `diag(e^{−i·E_b·t})`.
    pub fn diagonal_evolution(num_qubits: usize, energies: &[f64], t: f64) -> Result<Self> {
        Self::check_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        if energies.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: energies.len(),
            });
        }
        let diag: Vec<Complex64> = energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t))
            .collect();
        Ok(Self {
            num_qubits,
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
        })
    }

    /// Builds the matrix of a linear state map column by column.
    pub fn from_state_map<F>(num_qubits: usize, map: F) -> Result<Self>
    where
        F: Fn(StateVector) -> Result<StateVector>,
    {
        Self::check_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut matrix = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let image = map(StateVector::basis(num_qubits, col)?)?;
            if image.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    actual: image.dim(),
                });
            }
            for (row, amp) in image.amplitudes().iter().enumerate() {
                matrix[(row, col)] = *amp;
            }
        }
        Ok(Self { num_qubits, matrix })
    }

    /// `R_y(π)` on `qubit` of an `num_qubits` register.
    pub fn ry_pi(num_qubits: usize, qubit: usize) -> Result<Self> {
        Self::from_state_map(num_qubits, |s| s.apply_ry_pi(qubit))
    }

    fn check_size(num_qubits: usize) -> Result<()> {
        if num_qubits == 0 {
            return Err(param("a register needs at least one qubit"));
        }
        if num_qubits > MAX_DENSE_QUBITS {
            return Err(Error::Resource(format!(
                "dense unitary on {num_qubits} qubits exceeds {MAX_DENSE_QUBITS}"
            )));
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            matrix: self.matrix.adjoint(),
        }
    }

    /// Max-entry deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.dimension();
        let product = self.matrix.adjoint() * &self.matrix;
        let identity = DMatrix::<Complex64>::identity(dim, dim);
        (product - identity)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Max-entry distance to `other` (no phase freedom).
    pub fn max_entry_distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok((&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dimension() != other.dimension() {
            return Err(Error::Dimension {
                expected: self.dimension(),
                actual: other.dimension(),
            });
        }
        Ok(())
    }

    /// Operator product `self · other` (`other` acts first).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            num_qubits: self.num_qubits,
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// Applies the unitary to a state.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dimension() {
            return Err(Error::Dimension {
                expected: self.dimension(),
                actual: state.dim(),
            });
        }
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        let out = &self.matrix * v;
        StateVector::new(self.num_qubits, out.iter().copied().collect())
    }
}

/// Right-to-left operator product of `sequence`: the last listed unitary acts
/// first in time.
pub fn compose(sequence: &[DenseUnitary]) -> Result<DenseUnitary> {
    let (first, rest) = sequence
        .split_first()
        .ok_or_else(|| param("cannot compose an empty sequence"))?;
    rest.iter().try_fold(first.clone(), |acc, u| acc.mul(u))
}

/// `|tr(U†V)| / d`, which equals 1 exactly when `U = e^{iφ}V`.
pub fn unitary_fidelity_up_to_global_phase(u: &DenseUnitary, v: &DenseUnitary) -> Result<f64> {
    u.check_dim(v)?;
    let overlap: Complex64 = u
        .matrix
        .iter()
        .zip(v.matrix.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok((overlap.norm() / u.dimension() as f64).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus() -> StateVector {
        StateVector::new(1, vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap()
    }

    #[test]
    fn ry_pi_on_poles() {
        let one = StateVector::basis(1, 0).unwrap().apply_ry_pi(0).unwrap();
        assert_eq!(one.amplitudes(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        let minus_zero = StateVector::basis(1, 1).unwrap().apply_ry_pi(0).unwrap();
        assert_eq!(minus_zero.amplitudes(), &[c(-1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn ry_pi_twice_is_minus_identity() {
        // Explicit 2x2 product: [[0,-1],[1,0]]^2 = [[-1,0],[0,-1]].
        let m = [[0.0, -1.0], [1.0, 0.0]];
        let mut sq = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                sq[i][j] = (0..2).map(|k| m[i][k] * m[k][j]).sum();
            }
        }
        assert_eq!(sq, [[-1.0, 0.0], [0.0, -1.0]]);

        let amps = [c(0.1, 0.2), c(-0.3, 0.4), c(0.5, -0.1), c(0.2, 0.3)];
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let s = StateVector::new(2, amps.iter().map(|a| a / norm).collect()).unwrap();
        for q in 0..2 {
            let twice = s.clone().apply_ry_pi(q).unwrap().apply_ry_pi(q).unwrap();
            for (a, b) in twice.amplitudes().iter().zip(s.amplitudes()) {
                assert_eq!(*a, -b);
            }
        }
    }

    #[test]
    fn ry_pi_rejects_bad_index() {
        assert!(matches!(
            StateVector::basis(2, 0).unwrap().apply_ry_pi(2),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn phase_rotation_by_pi() {
        let s = plus().apply_phase_rotation(0, PI).unwrap();
        let expected = [c(0.0, -FRAC_1_SQRT_2), c(0.0, FRAC_1_SQRT_2)];
        for (a, b) in s.amplitudes().iter().zip(expected) {
            assert!((a - b).norm() < 1e-15);
        }
        assert_eq!(plus().apply_phase_rotation(0, 0.0).unwrap(), plus());
        assert!(plus().apply_phase_rotation(0, f64::NAN).is_err());
    }

    #[test]
    fn phase_then_project_on_pos() {
        for &theta in &[0.0, 0.3, 1.0, PI / 2.0, 2.5, PI, 4.0] {
            let s = plus().apply_phase_rotation(0, theta).unwrap();
            let p = s.inner(&plus()).unwrap().norm_sqr();
            assert!((p - (1.0 + theta.cos()) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_evolution_cases() {
        let s = plus();
        assert_eq!(
            s.clone()
                .apply_diagonal_evolution(&[3.0, -2.0], 0.0)
                .unwrap(),
            s
        );

        let g = s
            .clone()
            .apply_diagonal_evolution(&[1.7, 1.7], 0.9)
            .unwrap();
        let phase = Complex64::from_polar(1.0, -1.7 * 0.9);
        for (a, b) in g.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a - b * phase).norm() < 1e-15);
        }

        let omega = 2.0 * PI * 250.0;
        let delta = 3.1e-4;
        let energies = [omega / 2.0, -omega / 2.0];
        let e = s.apply_diagonal_evolution(&energies, delta).unwrap();
        let p = e.inner(&plus()).unwrap().norm_sqr();
        assert!((p - (1.0 + (omega * delta).cos()) / 2.0).abs() < 1e-14);

        assert!(matches!(
            plus().apply_diagonal_evolution(&[0.0; 3], 1.0),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let u = DenseUnitary::ry_pi(2, 1).unwrap();
        assert!((unitary_fidelity_up_to_global_phase(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        let neg = DenseUnitary::from_matrix(-u.matrix().clone()).unwrap();
        assert!((unitary_fidelity_up_to_global_phase(&u, &neg).unwrap() - 1.0).abs() < 1e-15);

        let id = DenseUnitary::identity(1).unwrap();
        let z = DenseUnitary::diagonal_evolution(1, &[PI / 2.0, -PI / 2.0], 1.0).unwrap();
        assert!(unitary_fidelity_up_to_global_phase(&id, &z).unwrap() < 1e-15);

        assert!(matches!(
            unitary_fidelity_up_to_global_phase(&id, &u),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn compose_examples() {
        let u = DenseUnitary::diagonal_evolution(2, &[0.1, 0.7, -1.3, 2.2], 1.0)
            .unwrap()
            .mul(&DenseUnitary::ry_pi(2, 0).unwrap())
            .unwrap();
        assert_eq!(compose(std::slice::from_ref(&u)).unwrap(), u);
        let id = compose(&[u.clone(), u.adjoint()]).unwrap();
        assert!(
            id.max_entry_distance(&DenseUnitary::identity(2).unwrap())
                .unwrap()
                < 1e-12
        );

        let r = DenseUnitary::ry_pi(3, 2).unwrap();
        let sq = compose(&[r.clone(), r]).unwrap();
        let minus_id =
            DenseUnitary::from_matrix(-DenseUnitary::identity(3).unwrap().matrix().clone())
                .unwrap();
        assert_eq!(sq.max_entry_distance(&minus_id).unwrap(), 0.0);
        assert!(compose(&[]).is_err());
        assert!(compose(&[
            DenseUnitary::identity(1).unwrap(),
            DenseUnitary::identity(2).unwrap()
        ])
        .is_err());
    }

    #[test]
    fn compose_order_is_right_to_left() {
        // Last listed acts first: compose([A, B]) |ψ⟩ = A(B|ψ⟩).
        let a = DenseUnitary::ry_pi(1, 0).unwrap();
        let b = DenseUnitary::diagonal_evolution(1, &[0.4, -0.4], 1.0).unwrap();
        let ab = compose(&[a.clone(), b.clone()]).unwrap();
        let psi = plus();
        let direct = a.apply(&b.apply(&psi).unwrap()).unwrap();
        assert!(ab.apply(&psi).unwrap().max_abs_diff(&direct).unwrap() < 1e-15);
    }

    #[test]
    fn rejects_non_unitary_and_oversized() {
        let m = DMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(DenseUnitary::from_matrix(m).is_err());
        assert!(matches!(DenseUnitary::identity(9), Err(Error::Resource(_))));
        assert!(StateVector::new(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(matches!(
            StateVector::new(2, vec![c(1.0, 0.0), c(0.0, 0.0)]),
            Err(Error::Dimension { .. })
        ));
    }
}
