use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Duration;

use popqc_core::{parse_qasm, BuiltinOracle, Error, ExternalOracle, ExternalOracleConfig, Oracle, ParsedProgram, Transport};

use crate::args::{OracleArgs, TransportArg};

/// Documented exit statuses.
pub mod exit {
    pub const INPUT: u8 = 1;
    pub const ORACLE: u8 = 2;
    pub const NOT_CONVERGED: u8 = 3;
    pub const NOT_EQUIVALENT: u8 = 4;
    pub const NOT_LOCALLY_OPTIMAL: u8 = 5;
    pub const USAGE: u8 = 64;
    pub const IO: u8 = 74;
    pub const AUDIT: u8 = 70;
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Qasm(_) => exit::INPUT,
            Error::OracleSpawn(_)
            | Error::OracleIo(_)
            | Error::OracleExit { .. }
            | Error::OracleTimeout(_)
            | Error::OracleReply(_)
            | Error::OracleWidth { .. }
            | Error::OracleMissingReply(_) => exit::ORACLE,
            Error::InvalidOmega | Error::InvalidConfig(_) | Error::QubitCapExceeded { .. } => exit::USAGE,
            _ => exit::INPUT,
        };
        Self::new(code, e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

pub fn read_program(path: &Path) -> CliResult<ParsedProgram> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(exit::INPUT, format!("{}: {e}", path.display())))?;
    parse_qasm(&text).map_err(|e| Failure::new(exit::INPUT, format!("{}: {e}", path.display())))
}

/// Write to `path`, or stdout when absent.
pub fn write_output(path: Option<&Path>, contents: &str) -> CliResult {
    let result = match path {
        Some(p) => fs::write(p, contents).map_err(|e| (p.display().to_string(), e)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| ("stdout".to_string(), e))
        }
    };
    result.map_err(|(what, e)| Failure::new(exit::IO, format!("{what}: {e}")))
}

pub fn io_failure(path: &Path, e: impl fmt::Display) -> Failure {
    Failure::new(exit::IO, format!("{}: {e}", path.display()))
}

pub fn build_oracle(args: &OracleArgs, threads: usize) -> CliResult<Box<dyn Oracle>> {
    if args.oracle == "builtin" {
        return Ok(Box::new(BuiltinOracle));
    }
    let Some(command) = args.oracle.strip_prefix("exec:") else {
        return Err(Failure::new(
            exit::USAGE,
            format!("unknown oracle {:?}; expected builtin or exec:CMD", args.oracle),
        ));
    };
    let words = shlex::split(command)
        .filter(|w| !w.is_empty())
        .ok_or_else(|| Failure::new(exit::USAGE, format!("cannot split oracle command {command:?}")))?;
    if !(args.timeout.is_finite() && args.timeout > 0.0) {
        return Err(Failure::new(exit::USAGE, "--timeout must be a positive number of seconds"));
    }
    let transport = match args.transport {
        TransportArg::Stdio => Transport::StdinStdout,
        TransportArg::Files => Transport::TempFiles,
    };
    let config = ExternalOracleConfig::new(words)
        .timeout(Duration::from_secs_f64(args.timeout))
        .transport(transport)
        .max_concurrent(args.max_concurrent.unwrap_or(threads));
    Ok(Box::new(ExternalOracle::new(config)))
}

pub fn resolve_threads(threads: Option<usize>) -> CliResult<usize> {
    match threads {
        Some(0) => Err(Failure::new(exit::USAGE, "--threads must be at least 1")),
        Some(t) => Ok(t),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}
