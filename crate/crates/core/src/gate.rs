//! The gate alphabet shared by every module: H, X, CNOT and RZ.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A single gate over the {H, X, CNOT, RZ} basis.
///
/// RZ angles are kept in canonical form, reduced into `[0, 2π)`. Build RZ
/// gates through [`Gate::rz`] so the reduction is never skipped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(u32),
    X(u32),
    Cnot { control: u32, target: u32 },
    Rz { qubit: u32, angle: f64 },
}

/// Discriminant of a [`Gate`] without its operands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Cnot,
    Rz,
}

/// Reduce an angle into `[0, 2π)`.
pub fn canonical_angle(angle: f64) -> f64 {
    let reduced = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if reduced >= TAU || reduced == 0.0 {
        0.0
    } else {
        reduced
    }
}

impl Gate {
    pub fn rz(qubit: u32, angle: f64) -> Self {
        Gate::Rz {
            qubit,
            angle: canonical_angle(angle),
        }
    }

    pub fn cnot(control: u32, target: u32) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::X(_) => GateKind::X,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Rz { .. } => GateKind::Rz,
        }
    }

    /// Operand qubits; the second entry is only present for CNOT (the target).
    pub fn qubits(&self) -> (u32, Option<u32>) {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Rz { qubit: q, .. } => (q, None),
            Gate::Cnot { control, target } => (control, Some(target)),
        }
    }

    pub fn acts_on(&self, qubit: u32) -> bool {
        let (a, b) = self.qubits();
        a == qubit || b == Some(qubit)
    }

    /// True when the two gates share no qubit.
    pub fn is_disjoint(&self, other: &Gate) -> bool {
        let (a, b) = other.qubits();
        !self.acts_on(a) && b.is_none_or(|b| !self.acts_on(b))
    }

    pub fn max_qubit(&self) -> u32 {
        let (a, b) = self.qubits();
        b.map_or(a, |b| a.max(b))
    }

    /// Check operand range and distinctness against a register width.
    pub fn validate(&self, num_qubits: u32) -> Result<(), crate::Error> {
        let (a, b) = self.qubits();
        if b == Some(a) {
            return Err(crate::Error::RepeatedOperand { gate: *self });
        }
        if self.max_qubit() >= num_qubits {
            return Err(crate::Error::QubitOutOfRange {
                qubit: self.max_qubit(),
                num_qubits,
            });
        }
        if let Gate::Rz { angle, .. } = self {
            if !angle.is_finite() {
                return Err(crate::Error::NonFiniteAngle);
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H@{q}"),
            Gate::X(q) => write!(f, "X@{q}"),
            Gate::Cnot { control, target } => write!(f, "CNOT@({control},{target})"),
            Gate::Rz { qubit, angle } => write!(f, "RZ({angle})@{qubit}"),
        }
    }
}
