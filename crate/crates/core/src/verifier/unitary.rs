use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gate::Gate;

/// Largest register simulated densely unless the caller raises the cap.
pub const DEFAULT_QUBIT_CAP: u32 = 12;

/// Dense `2^q × 2^q` matrix, row-major. Qubit 0 is the most significant
/// bit of a basis index, so a gate on qubit `i` embeds as
/// `I^{⊗i} ⊗ U ⊗ I^{⊗(q-i-1)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    num_qubits: u32,
    dim: usize,
    data: Vec<Complex64>,
}

impl Unitary {
    pub fn identity(num_qubits: u32) -> Self {
        let dim = 1usize << num_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { num_qubits, dim, data }
    }

    pub fn from_rows(num_qubits: u32, data: Vec<Complex64>) -> Self {
        let dim = 1usize << num_qubits;
        assert_eq!(data.len(), dim * dim, "matrix size does not match qubit count");
        Self { num_qubits, dim, data }
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    fn mask(&self, qubit: u32) -> usize {
        1usize << (self.num_qubits - 1 - qubit)
    }

    fn rows_mut(&mut self, a: usize, b: usize) -> (&mut [Complex64], &mut [Complex64]) {
        debug_assert!(a < b);
        let dim = self.dim;
        let (lo, hi) = self.data.split_at_mut(b * dim);
        (&mut lo[a * dim..(a + 1) * dim], &mut hi[..dim])
    }

    /// Left-multiply by the embedded gate matrix.
    pub fn apply(&mut self, gate: &Gate) {
        match *gate {
            Gate::H(q) => {
                let m = self.mask(q);
                for r in (0..self.dim).filter(|r| r & m == 0) {
                    let (r0, r1) = self.rows_mut(r, r | m);
                    for (a, b) in r0.iter_mut().zip(r1.iter_mut()) {
                        let (x, y) = (*a, *b);
                        *a = (x + y) * FRAC_1_SQRT_2;
                        *b = (x - y) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::X(q) => {
                let m = self.mask(q);
                for r in (0..self.dim).filter(|r| r & m == 0) {
                    let (r0, r1) = self.rows_mut(r, r | m);
                    r0.swap_with_slice(r1);
                }
            }
            Gate::Cnot { control, target } => {
                let (c, t) = (self.mask(control), self.mask(target));
                for r in (0..self.dim).filter(|r| r & c != 0 && r & t == 0) {
                    let (r0, r1) = self.rows_mut(r, r | t);
                    r0.swap_with_slice(r1);
                }
            }
            Gate::Rz { qubit, angle } => {
                let m = self.mask(qubit);
                let lo = Complex64::from_polar(1.0, -angle / 2.0);
                let hi = Complex64::from_polar(1.0, angle / 2.0);
                let dim = self.dim;
                for (r, row) in self.data.chunks_mut(dim).enumerate() {
                    let phase = if r & m == 0 { lo } else { hi };
                    row.iter_mut().for_each(|z| *z *= phase);
                }
            }
        }
    }

    /// max |(U U†)_{ij} − δ_ij|
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.get(i, k) * self.get(j, k).conj();
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - expected).norm());
            }
        }
        worst
    }

    /// Max-norm distance to `other` after removing the best global phase,
    /// estimated from the largest-magnitude entry of `other`.
    pub fn phase_distance(&self, other: &Unitary) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let (k, pivot) = other
            .data
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .expect("non-empty matrix");
        let ratio = self.data[k] / pivot;
        let phase = if ratio.norm() > 0.0 {
            ratio / ratio.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - phase * b).norm())
            .fold(0.0, f64::max)
    }
}

/// The matrix of a gate sequence: the product of gate matrices with the
/// first gate applied first.
pub fn circuit_unitary(num_qubits: u32, gates: &[Gate]) -> Result<Unitary> {
    circuit_unitary_capped(num_qubits, gates, DEFAULT_QUBIT_CAP)
}

pub fn circuit_unitary_capped(num_qubits: u32, gates: &[Gate], cap: u32) -> Result<Unitary> {
    if num_qubits > cap {
        return Err(Error::QubitCapExceeded { num_qubits, cap });
    }
    let mut u = Unitary::identity(num_qubits);
    for g in gates {
        g.validate(num_qubits)?;
        u.apply(g);
    }
    Ok(u)
}
