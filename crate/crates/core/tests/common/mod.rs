//! Independent dense oracle: operators assembled from Kronecker products of
//! 2×2 matrices and exponentiated with a scaling-and-squaring Taylor series.
#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qcsync::hamiltonian::{EchoEvent, EchoSequence};
use rand::Rng;

pub type Mat = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn eye(d: usize) -> Mat {
    Mat::identity(d, d)
}

pub fn pauli_z() -> Mat {
    Mat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

/// exp(−iπY/2).
pub fn ry_pi() -> Mat {
    Mat::from_row_slice(2, 2, &[c(0.0), c(-1.0), c(1.0), c(0.0)])
}

/// `op` on `qubit` of an `n`-qubit register; qubit 0 is the leftmost factor.
pub fn embed(n: usize, qubit: usize, op: &Mat) -> Mat {
    (0..n).fold(Mat::identity(1, 1), |acc, q| {
        let factor = if q == qubit { op.clone() } else { eye(2) };
        acc.kronecker(&factor)
    })
}

/// Dense internal Hamiltonian −Σ(ω/2)Z + Σ(π/2)J ZZ.
pub fn internal_hamiltonian(omega: &[f64], j: &[Vec<f64>]) -> Mat {
    let n = omega.len();
    let d = 1 << n;
    let mut h = Mat::zeros(d, d);
    for a in 0..n {
        h += embed(n, a, &pauli_z()) * c(-0.5 * omega[a]);
        for b in a + 1..n {
            h += embed(n, a, &pauli_z())
                * embed(n, b, &pauli_z())
                * c(std::f64::consts::FRAC_PI_2 * j[a][b]);
        }
    }
    h
}

/// Dense ideal Hamiltonian +Σ_{j≠std}(ω/2)Z.
pub fn ideal_hamiltonian(omega: &[f64], standard: usize) -> Mat {
    let n = omega.len();
    let d = 1 << n;
    let mut h = Mat::zeros(d, d);
    for a in (0..n).filter(|&a| a != standard) {
        h += embed(n, a, &pauli_z()) * c(0.5 * omega[a]);
    }
    h
}

/// exp(−iHt) by scaling and squaring with a 30-term Taylor series.
pub fn expm_neg_i(h: &Mat, t: f64) -> Mat {
    let a = h * Complex64::new(0.0, -t);
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 && squarings < 60 {
        squarings += 1;
    }
    let scaled = &a / Complex64::new(2f64.powi(squarings), 0.0);
    let d = h.nrows();
    let mut term = eye(d);
    let mut sum = eye(d);
    for k in 1..30 {
        term = &term * &scaled / c(k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Oracle unitary of an echo sequence (first event acts first).
pub fn oracle_sequence(seq: &EchoSequence, omega: &[f64], j: &[Vec<f64>]) -> Mat {
    let n = seq.num_qubits();
    let h = internal_hamiltonian(omega, j);
    let mut u = eye(1 << n);
    let mut cache: Vec<(f64, Mat)> = Vec::new();
    for event in seq.events() {
        let step = match event {
            EchoEvent::Pulse(qubits) => qubits
                .iter()
                .fold(eye(1 << n), |acc, &q| embed(n, q, &ry_pi()) * acc),
            EchoEvent::Delay(t) => match cache.iter().find(|(d, _)| d == t) {
                Some((_, e)) => e.clone(),
                None => {
                    let e = expm_neg_i(&h, *t);
                    cache.push((*t, e.clone()));
                    e
                }
            },
        };
        u = step * u;
    }
    u
}

pub fn max_dist(a: &Mat, b: &Mat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn fidelity(a: &Mat, b: &Mat) -> f64 {
    (a.adjoint() * b).trace().norm() / a.nrows() as f64
}

pub struct RandomMolecule {
    pub omega: Vec<f64>,
    pub j: Vec<Vec<f64>>,
}

/// Shifts up to ±2 kHz and couplings up to ±80 Hz.
pub fn random_molecule<R: Rng>(rng: &mut R, n: usize) -> RandomMolecule {
    let omega = (0..n)
        .map(|_| 2.0 * std::f64::consts::PI * rng.random_range(-2000.0..2000.0))
        .collect();
    let mut j = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let v = rng.random_range(-80.0..80.0);
            j[a][b] = v;
            j[b][a] = v;
        }
    }
    RandomMolecule { omega, j }
}

/// Equal-delay sequence with random pulse groups between segments.
pub fn random_sequence<R: Rng>(rng: &mut R, n: usize) -> EchoSequence {
    let segments = rng.random_range(1..=10);
    let t = rng.random_range(0.0..2e-3);
    let mut events = Vec::new();
    for _ in 0..=segments {
        let group: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if !group.is_empty() {
            events.push(EchoEvent::Pulse(group));
        }
        events.push(EchoEvent::Delay(t));
    }
    events.pop();
    EchoSequence::new(n, events).unwrap()
}
