//! Seeded synthetic circuits for tests and scaling studies.
//!
//! Gates are drawn uniformly from {H, X, CNOT, RZ} with RZ angles on the
//! π/4 grid (occasionally arbitrary). With probability `planted_density`
//! a step instead plants a gate, a few fillers on other qubits, and a
//! partner that cancels or fuses with it, so the builtin oracle has work.

use std::f64::consts::{FRAC_PI_4, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gate::Gate;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub num_qubits: u32,
    pub num_gates: usize,
    pub planted_density: f64,
    pub seed: u64,
}

impl GeneratorParams {
    pub fn new(num_qubits: u32, num_gates: usize, planted_density: f64, seed: u64) -> Self {
        Self {
            num_qubits,
            num_gates,
            planted_density,
            seed,
        }
    }

    pub fn generate(&self) -> Vec<Gate> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        random_gates(&mut rng, self.num_qubits, self.num_gates, self.planted_density)
    }
}

fn random_angle<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.9) {
        f64::from(rng.gen_range(1..8u32)) * FRAC_PI_4
    } else {
        rng.gen_range(0.0..TAU)
    }
}

pub fn random_gate<R: Rng>(rng: &mut R, num_qubits: u32) -> Gate {
    let kinds = if num_qubits >= 2 { 4 } else { 3 };
    let q = rng.gen_range(0..num_qubits);
    match rng.gen_range(0..kinds) {
        0 => Gate::H(q),
        1 => Gate::X(q),
        2 => Gate::rz(q, random_angle(rng)),
        _ => {
            let mut t = rng.gen_range(0..num_qubits - 1);
            if t >= q {
                t += 1;
            }
            Gate::cnot(q, t)
        }
    }
}

fn partner<R: Rng>(rng: &mut R, g: &Gate) -> Gate {
    match *g {
        Gate::Rz { qubit, angle } => {
            if rng.gen_bool(0.5) {
                Gate::rz(qubit, -angle)
            } else {
                Gate::rz(qubit, random_angle(rng))
            }
        }
        other => other,
    }
}

/// Exactly `len` gates over `num_qubits` qubits.
pub fn random_gates<R: Rng>(rng: &mut R, num_qubits: u32, len: usize, planted_density: f64) -> Vec<Gate> {
    assert!(num_qubits >= 1, "need at least one qubit");
    let density = planted_density.clamp(0.0, 1.0);
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let g = random_gate(rng, num_qubits);
        out.push(g);
        if out.len() + 2 > len || !rng.gen_bool(density) {
            continue;
        }
        let fillers = rng.gen_range(0..=3usize).min(len - out.len() - 1);
        for _ in 0..fillers {
            // Fillers avoid the planted gate's qubits when the register allows.
            let f = (0..8)
                .map(|_| random_gate(rng, num_qubits))
                .find(|f| f.is_disjoint(&g));
            match f {
                Some(f) => out.push(f),
                None => break,
            }
        }
        out.push(partner(rng, &g));
    }
    out
}
