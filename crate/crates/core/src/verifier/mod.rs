//! Independent checks on optimizer output: local optimality by exhaustive
//! window scan, and semantic equivalence by dense simulation.

mod unitary;

use rayon::prelude::*;
use serde::Serialize;

pub use unitary::{circuit_unitary, circuit_unitary_capped, Unitary, DEFAULT_QUBIT_CAP};

use crate::error::Result;
use crate::gate::Gate;
use crate::oracle::{is_improvement, Oracle};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Equivalence {
    pub equivalent: bool,
    /// Max-norm deviation after factoring out global phase.
    pub deviation: f64,
}

/// Equal up to global phase within `tol`.
pub fn check_equivalence(num_qubits: u32, a: &[Gate], b: &[Gate], tol: f64) -> Result<Equivalence> {
    check_equivalence_capped(num_qubits, a, b, tol, DEFAULT_QUBIT_CAP)
}

pub fn check_equivalence_capped(num_qubits: u32, a: &[Gate], b: &[Gate], tol: f64, cap: u32) -> Result<Equivalence> {
    let ua = circuit_unitary_capped(num_qubits, a, cap)?;
    let ub = circuit_unitary_capped(num_qubits, b, cap)?;
    let deviation = ua.phase_distance(&ub);
    Ok(Equivalence {
        equivalent: deviation <= tol,
        deviation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub start_rank: usize,
    pub len: usize,
    pub reduced_to: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub locally_optimal: bool,
    pub violations: Vec<Violation>,
    pub windows_checked: usize,
    pub oracle_errors: usize,
    pub equivalence: Option<Equivalence>,
}

/// Call the oracle on the window `[s, min(s + Ω, n))` for every start rank
/// `s`, which covers every contiguous run of at most Ω gates, and record any
/// window it shrinks.
pub fn check_local_optimality<O: Oracle + ?Sized>(
    oracle: &O,
    num_qubits: u32,
    gates: &[Gate],
    omega: usize,
) -> VerifyReport {
    let n = gates.len();
    let omega = omega.max(1);
    let outcomes: Vec<Option<std::result::Result<Violation, ()>>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let window = &gates[s..(s + omega).min(n)];
            match oracle.optimize_segment(num_qubits, window) {
                Ok(out) if is_improvement(oracle, window, &out) => Some(Ok(Violation {
                    start_rank: s,
                    len: window.len(),
                    reduced_to: out.len(),
                })),
                Ok(_) => None,
                Err(_) => Some(Err(())),
            }
        })
        .collect();
    let mut report = VerifyReport {
        windows_checked: n,
        ..Default::default()
    };
    for o in outcomes.into_iter().flatten() {
        match o {
            Ok(v) => report.violations.push(v),
            Err(()) => report.oracle_errors += 1,
        }
    }
    report.locally_optimal = report.violations.is_empty();
    report
}

/// Local-optimality scan of `optimized`, plus an equivalence check against
/// `original` when the register fits under `qubit_cap`.
pub fn verify<O: Oracle + ?Sized>(
    oracle: &O,
    num_qubits: u32,
    original: &[Gate],
    optimized: &[Gate],
    omega: usize,
    qubit_cap: u32,
    tol: f64,
) -> Result<VerifyReport> {
    let mut report = check_local_optimality(oracle, num_qubits, optimized, omega);
    if num_qubits <= qubit_cap {
        report.equivalence = Some(check_equivalence_capped(num_qubits, original, optimized, tol, qubit_cap)?);
    }
    Ok(report)
}
