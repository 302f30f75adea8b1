//! Segment optimizers ("oracles") consumed by the round engine.

mod builtin;
mod external;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use builtin::{builtin_optimize, BuiltinOracle, RZ_ZERO_TOLERANCE};
pub use external::{external_optimize, ExternalOracle, ExternalOracleConfig, Transport};

use crate::error::Result;
use crate::gate::Gate;
use crate::synth;

/// A black-box optimizer for short gate sequences.
///
/// Implementations must be callable from many threads at once and must
/// return a sequence equivalent to their input on `num_qubits` qubits.
pub trait Oracle: Send + Sync {
    fn optimize_segment(&self, num_qubits: u32, segment: &[Gate]) -> Result<Vec<Gate>>;

    /// Figure of merit compared between a segment and its replacement.
    fn cost(&self, gates: &[Gate]) -> usize {
        gates.len()
    }

    fn name(&self) -> &str {
        "oracle"
    }
}

impl<T: Oracle + ?Sized> Oracle for &T {
    fn optimize_segment(&self, num_qubits: u32, segment: &[Gate]) -> Result<Vec<Gate>> {
        (**self).optimize_segment(num_qubits, segment)
    }

    fn cost(&self, gates: &[Gate]) -> usize {
        (**self).cost(gates)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

impl<T: Oracle + ?Sized> Oracle for Box<T> {
    fn optimize_segment(&self, num_qubits: u32, segment: &[Gate]) -> Result<Vec<Gate>> {
        (**self).optimize_segment(num_qubits, segment)
    }

    fn cost(&self, gates: &[Gate]) -> usize {
        (**self).cost(gates)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

/// Returns its input unchanged. Trivially well-behaved.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityOracle;

impl Oracle for IdentityOracle {
    fn optimize_segment(&self, _num_qubits: u32, segment: &[Gate]) -> Result<Vec<Gate>> {
        Ok(segment.to_vec())
    }

    fn name(&self) -> &str {
        "identity"
    }
}

/// True when `replacement` may stand in for `original`: strictly cheaper and
/// no longer, so it fits in the original slots.
pub fn is_improvement<O: Oracle + ?Sized>(oracle: &O, original: &[Gate], replacement: &[Gate]) -> bool {
    replacement.len() <= original.len() && oracle.cost(replacement) < oracle.cost(original)
}

/// A sub-window of an oracle output that the oracle could still shrink.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub input: Vec<Gate>,
    pub output: Vec<Gate>,
    /// Half-open range into `output`.
    pub window: (usize, usize),
    pub reduced_len: usize,
}

#[derive(Clone, Debug, Default)]
pub struct WellBehavedReport {
    pub trials: usize,
    pub windows_checked: usize,
    pub oracle_errors: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl WellBehavedReport {
    pub fn is_well_behaved(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Shape of the random segments used by [`is_well_behaved_sample`].
#[derive(Clone, Copy, Debug)]
pub struct SampleParams {
    pub num_qubits: u32,
    pub max_len: usize,
    pub planted_density: f64,
}

impl Default for SampleParams {
    fn default() -> Self {
        Self {
            num_qubits: 6,
            max_len: 48,
            planted_density: 0.3,
        }
    }
}

/// Optimize random segments once, then ask the oracle to shrink every
/// contiguous window of each output. Any success is a counterexample to
/// well-behavedness.
pub fn is_well_behaved_sample<O: Oracle + ?Sized>(
    oracle: &O,
    trials: usize,
    seed: u64,
    params: SampleParams,
) -> WellBehavedReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = WellBehavedReport {
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let len = rng.gen_range(1..=params.max_len.max(1));
        let input = synth::random_gates(&mut rng, params.num_qubits, len, params.planted_density);
        let Ok(output) = oracle.optimize_segment(params.num_qubits, &input) else {
            report.oracle_errors += 1;
            continue;
        };
        for start in 0..output.len() {
            for end in start + 1..=output.len() {
                let window = &output[start..end];
                report.windows_checked += 1;
                match oracle.optimize_segment(params.num_qubits, window) {
                    Ok(again) if is_improvement(oracle, window, &again) => {
                        report.counterexamples.push(Counterexample {
                            input: input.clone(),
                            output: output.clone(),
                            window: (start, end),
                            reduced_len: again.len(),
                        });
                    }
                    Ok(_) => {}
                    Err(_) => report.oracle_errors += 1,
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cancels the first adjacent H pair, but only for even-length inputs.
    struct EvenOnly;

    impl Oracle for EvenOnly {
        fn optimize_segment(&self, _: u32, segment: &[Gate]) -> Result<Vec<Gate>> {
            let mut out = segment.to_vec();
            if segment.len() % 2 == 0 {
                if let Some(k) = out.windows(2).position(|w| w[0] == w[1] && matches!(w[0], Gate::H(_))) {
                    out.drain(k..k + 2);
                }
            }
            Ok(out)
        }
    }

    #[test]
    fn identity_is_well_behaved() {
        let report = is_well_behaved_sample(&IdentityOracle, 50, 1, SampleParams::default());
        assert!(report.is_well_behaved());
        assert!(report.windows_checked > 0);
    }

    #[test]
    fn even_only_mock_is_caught() {
        let params = SampleParams {
            num_qubits: 1,
            max_len: 9,
            planted_density: 0.0,
        };
        let report = is_well_behaved_sample(&EvenOnly, 200, 3, params);
        assert!(!report.is_well_behaved());
        let c = &report.counterexamples[0];
        assert!(c.reduced_len < c.window.1 - c.window.0);
    }

    #[test]
    fn improvement_requires_strictly_lower_cost() {
        let seg = [Gate::H(0), Gate::H(0)];
        assert!(is_improvement(&IdentityOracle, &seg, &[]));
        assert!(!is_improvement(&IdentityOracle, &seg, &seg));
        assert!(!is_improvement(&IdentityOracle, &seg[..1], &seg));
    }
}
