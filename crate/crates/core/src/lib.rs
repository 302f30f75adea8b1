//! Parallel local optimization of quantum circuits.
//!
//! A circuit is split into overlapping windows of at most 2Ω gates that a
//! pluggable [`Oracle`] optimizes independently. Fingers track where windows
//! may still shrink, and rounds repeat until none remain, at which point no
//! window of Ω gates can be reduced by the oracle.
//!
//! ```
//! use popqc_core::{popqc, BuiltinOracle, Gate, OptimizerConfig};
//!
//! let gates = [Gate::H(0), Gate::X(2), Gate::cnot(1, 2), Gate::X(2), Gate::H(1)];
//! let result = popqc(&BuiltinOracle, &gates, 3, OptimizerConfig::with_omega(2)).unwrap();
//! assert_eq!(result.gates.len(), 3);
//! ```

pub mod circuit;
pub mod error;
pub mod gate;
pub mod optimizer;
pub mod oracle;
pub mod qasm;
pub mod synth;
pub mod verifier;

pub use circuit::{Circuit, Segment, Slot};
pub use error::{Error, Result};
pub use gate::{Gate, GateKind};
pub use optimizer::{
    optimize_segments, popqc, select_fingers, merge_dedup, Engine, FingerSet, OptimizeResult, OptimizerConfig,
    OracleErrorPolicy, RoundStats, DEFAULT_OMEGA,
};
pub use oracle::{BuiltinOracle, ExternalOracle, ExternalOracleConfig, IdentityOracle, Oracle, Transport};
pub use qasm::{parse_qasm, serialize_qasm, ParsedProgram};
pub use verifier::{check_equivalence, check_local_optimality, circuit_unitary, VerifyReport};
