//! Shared fixtures for the criterion benches.

use popqc_core::synth::{self, GeneratorParams};
use popqc_core::{Circuit, Gate, Slot};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const QUBITS: u32 = 8;
pub const DENSITY: f64 = 0.3;

pub fn synthetic(n: usize, seed: u64) -> Vec<Gate> {
    GeneratorParams::new(QUBITS, n, DENSITY, seed).generate()
}

pub fn circuit(n: usize) -> Circuit {
    Circuit::create(&synthetic(n, 1), QUBITS).expect("generated gates are valid")
}

/// Sorted, deduplicated slot updates: a mix of tombstones and fresh gates.
pub fn update_batch(capacity: usize, size: usize, seed: u64) -> Vec<(usize, Slot)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..size).map(|_| rng.gen_range(0..capacity)).collect();
    idx.sort_unstable();
    idx.dedup();
    idx.into_iter()
        .map(|i| {
            let slot = if rng.gen_bool(0.5) {
                Slot::Tombstone
            } else {
                Slot::Gate(synth::random_gate(&mut rng, QUBITS))
            };
            (i, slot)
        })
        .collect()
}

/// `count` random positions in `[0, bound)`.
pub fn queries(bound: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0..bound)).collect()
}
