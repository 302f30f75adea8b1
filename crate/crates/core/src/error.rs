use std::path::PathBuf;
use std::time::Duration;

use crate::gate::Gate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: u32, num_qubits: u32 },

    #[error("gate {gate} uses the same qubit twice")]
    RepeatedOperand { gate: Gate },

    #[error("rotation angle is not finite")]
    NonFiniteAngle,

    #[error("cannot build a circuit from an empty gate list")]
    EmptyCircuit,

    #[error("slot index {index} out of range (slot count {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("rank {rank} out of range (gate count {len})")]
    RankOutOfRange { rank: usize, len: usize },

    #[error("slot index {index} appears more than once in one substitution batch")]
    DuplicateIndex { index: usize },

    #[error("{num_qubits} qubits exceeds the dense-simulation cap of {cap}")]
    QubitCapExceeded { num_qubits: u32, cap: u32 },

    #[error("segment size must be at least 1")]
    InvalidOmega,

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error(transparent)]
    Qasm(#[from] crate::qasm::ParseError),

    #[error("oracle process failed to start: {0}")]
    OracleSpawn(#[source] std::io::Error),

    #[error("oracle I/O failed: {0}")]
    OracleIo(#[source] std::io::Error),

    #[error("oracle exited with status {code:?}: {stderr}")]
    OracleExit { code: Option<i32>, stderr: String },

    #[error("oracle did not answer within {0:?}")]
    OracleTimeout(Duration),

    #[error("oracle reply is not valid QASM: {0}")]
    OracleReply(#[source] crate::qasm::ParseError),

    #[error("oracle reply declares {got} qubits, request declared {expected}")]
    OracleWidth { expected: u32, got: u32 },

    #[error("oracle reply file {0} is missing")]
    OracleMissingReply(PathBuf),
}
