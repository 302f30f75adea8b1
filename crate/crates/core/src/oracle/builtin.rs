use std::f64::consts::TAU;

use super::Oracle;
use crate::error::Result;
use crate::gate::Gate;

/// RZ rotations within this distance of a multiple of 2π are dropped.
pub const RZ_ZERO_TOLERANCE: f64 = 1e-12;

/// Deterministic rewrite-rule optimizer over {H, X, CNOT, RZ}.
///
/// Two gates interact when every gate between them commutes with them:
/// gates on disjoint qubits, X on a CNOT target, and RZ on a CNOT control
/// commute. Interacting H·H, X·X and equal CNOT pairs cancel; interacting
/// RZ pairs on one qubit fuse, and near-zero rotations vanish. Rules are
/// applied until nothing fires, so the output is a fixpoint.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuiltinOracle;

impl Oracle for BuiltinOracle {
    fn optimize_segment(&self, num_qubits: u32, segment: &[Gate]) -> Result<Vec<Gate>> {
        builtin_optimize(num_qubits, segment)
    }

    fn name(&self) -> &str {
        "builtin"
    }
}

pub fn builtin_optimize(num_qubits: u32, segment: &[Gate]) -> Result<Vec<Gate>> {
    for g in segment {
        g.validate(num_qubits)?;
    }
    let mut current = segment.to_vec();
    loop {
        let (next, changed) = rewrite_pass(&current);
        if !changed {
            return Ok(current);
        }
        current = next;
    }
}

fn is_zero_rotation(angle: f64) -> bool {
    angle <= RZ_ZERO_TOLERANCE || TAU - angle <= RZ_ZERO_TOLERANCE
}

/// Commutation facts the rules may move a gate across.
fn commutes(a: &Gate, b: &Gate) -> bool {
    if a.is_disjoint(b) {
        return true;
    }
    match (*a, *b) {
        (Gate::X(q), Gate::Cnot { target, .. }) | (Gate::Cnot { target, .. }, Gate::X(q)) => q == target,
        (Gate::Rz { qubit, .. }, Gate::Cnot { control, .. })
        | (Gate::Cnot { control, .. }, Gate::Rz { qubit, .. }) => qubit == control,
        _ => false,
    }
}

enum Merge {
    Cancel,
    Fuse(Gate),
}

fn merge(earlier: &Gate, later: &Gate) -> Option<Merge> {
    match (*earlier, *later) {
        (Gate::H(a), Gate::H(b)) | (Gate::X(a), Gate::X(b)) if a == b => Some(Merge::Cancel),
        (Gate::Cnot { .. }, Gate::Cnot { .. }) if earlier == later => Some(Merge::Cancel),
        (Gate::Rz { qubit: a, angle: x }, Gate::Rz { qubit: b, angle: y }) if a == b => {
            let fused = Gate::rz(a, x + y);
            match fused {
                Gate::Rz { angle, .. } if is_zero_rotation(angle) => Some(Merge::Cancel),
                _ => Some(Merge::Fuse(fused)),
            }
        }
        _ => None,
    }
}

/// One left-to-right pass. Each incoming gate walks back over the gates it
/// commutes with, looking for a partner to cancel or fuse with; fused RZs
/// stay at the partner's position.
fn rewrite_pass(gates: &[Gate]) -> (Vec<Gate>, bool) {
    let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
    let mut changed = false;
    for g in gates {
        if let Gate::Rz { angle, .. } = g {
            if is_zero_rotation(*angle) {
                changed = true;
                continue;
            }
        }
        let mut placed = false;
        for k in (0..out.len()).rev() {
            if let Some(m) = merge(&out[k], g) {
                match m {
                    Merge::Cancel => {
                        out.remove(k);
                    }
                    Merge::Fuse(fused) => out[k] = fused,
                }
                changed = true;
                placed = true;
                break;
            }
            if !commutes(&out[k], g) {
                break;
            }
        }
        if !placed {
            out.push(*g);
        }
    }
    (out, changed)
}
