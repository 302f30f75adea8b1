//! Drives an external optimizer process over QASM.
//!
//! Each call serializes the segment as a full-width program (original qubit
//! indices, `qreg q[num_qubits]`), runs the command once, and parses the
//! program it answers with. With [`Transport::StdinStdout`] the request goes
//! to stdin and the reply is read from stdout. With [`Transport::TempFiles`]
//! the request and reply paths are substituted for `{input}` and `{output}`
//! in the command, or appended as the last two arguments when the command
//! names neither placeholder.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use wait_timeout::ChildExt;

use super::Oracle;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::qasm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Transport {
    #[default]
    StdinStdout,
    TempFiles,
}

#[derive(Clone, Debug)]
pub struct ExternalOracleConfig {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    pub working_dir: Option<PathBuf>,
    pub timeout: Duration,
    pub transport: Transport,
    /// Upper bound on simultaneously running oracle processes.
    pub max_concurrent: usize,
}

impl ExternalOracleConfig {
    pub fn new<I, S>(command: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            command: command.into_iter().map(Into::into).collect(),
            working_dir: None,
            timeout: Duration::from_secs(60),
            transport: Transport::StdinStdout,
            max_concurrent: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    /// Split a command line on whitespace. No shell quoting is interpreted.
    pub fn from_command_line(line: &str) -> Self {
        Self::new(line.split_whitespace())
    }

    pub fn timeout(mut self, timeout: Duration) -> Self {
        assert!(!timeout.is_zero(), "oracle timeout must be positive");
        self.timeout = timeout;
        self
    }

    pub fn transport(mut self, transport: Transport) -> Self {
        self.transport = transport;
        self
    }

    pub fn working_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.working_dir = Some(dir.into());
        self
    }

    pub fn max_concurrent(mut self, n: usize) -> Self {
        self.max_concurrent = n.max(1);
        self
    }
}

/// Counting semaphore bounding live subprocesses.
#[derive(Debug)]
struct Permits {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Permits {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> PermitGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug)]
pub struct ExternalOracle {
    config: ExternalOracleConfig,
    permits: Permits,
    name: String,
}

impl ExternalOracle {
    pub fn new(config: ExternalOracleConfig) -> Self {
        let name = format!("exec:{}", config.command.join(" "));
        let permits = Permits::new(config.max_concurrent);
        Self { config, permits, name }
    }

    pub fn config(&self) -> &ExternalOracleConfig {
        &self.config
    }
}

impl Oracle for ExternalOracle {
    fn optimize_segment(&self, num_qubits: u32, segment: &[Gate]) -> Result<Vec<Gate>> {
        let _permit = self.permits.acquire();
        external_optimize(&self.config, num_qubits, segment)
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// Run the configured process once on `segment`.
pub fn external_optimize(config: &ExternalOracleConfig, num_qubits: u32, segment: &[Gate]) -> Result<Vec<Gate>> {
    let Some((program, args)) = config.command.split_first() else {
        return Err(Error::OracleSpawn(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "empty oracle command",
        )));
    };
    let request = qasm::serialize_gates(num_qubits, segment);
    let reply = match config.transport {
        Transport::StdinStdout => {
            let mut cmd = Command::new(program);
            cmd.args(args);
            run_piped(config, cmd, request)?
        }
        Transport::TempFiles => {
            let dir = tempfile::tempdir().map_err(Error::OracleIo)?;
            let input = dir.path().join("request.qasm");
            let output = dir.path().join("reply.qasm");
            std::fs::write(&input, request).map_err(Error::OracleIo)?;
            let (input_s, output_s) = (input.to_string_lossy(), output.to_string_lossy());
            let mut substituted = false;
            let mut argv: Vec<String> = args
                .iter()
                .map(|a| {
                    if a.contains("{input}") || a.contains("{output}") {
                        substituted = true;
                    }
                    a.replace("{input}", &input_s).replace("{output}", &output_s)
                })
                .collect();
            if !substituted {
                argv.push(input_s.into_owned());
                argv.push(output_s.into_owned());
            }
            let mut cmd = Command::new(program);
            cmd.args(&argv);
            run_piped(config, cmd, String::new())?;
            match std::fs::read_to_string(&output) {
                Ok(text) => text,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::OracleMissingReply(output)),
                Err(e) => return Err(Error::OracleIo(e)),
            }
        }
    };
    let program = qasm::parse_qasm(&reply).map_err(Error::OracleReply)?;
    if program.num_qubits > num_qubits {
        return Err(Error::OracleWidth {
            expected: num_qubits,
            got: program.num_qubits,
        });
    }
    Ok(program.gates)
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> thread::JoinHandle<std::io::Result<String>> {
    thread::spawn(move || {
        let mut buf = String::new();
        if let Some(mut p) = pipe {
            p.read_to_string(&mut buf)?;
        }
        Ok(buf)
    })
}

/// Spawn, feed stdin, collect stdout/stderr, and enforce the timeout.
fn run_piped(config: &ExternalOracleConfig, mut cmd: Command, input: String) -> Result<String> {
    if let Some(dir) = &config.working_dir {
        cmd.current_dir(dir);
    }
    cmd.stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child: Child = cmd.spawn().map_err(Error::OracleSpawn)?;

    let mut stdin = child.stdin.take();
    let writer = thread::spawn(move || -> std::io::Result<()> {
        if let Some(s) = stdin.as_mut() {
            // A process that exits without reading its input is not an error here.
            match s.write_all(input.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e),
                _ => {}
            }
        }
        Ok(())
    });
    let out = drain(child.stdout.take());
    let err = drain(child.stderr.take());

    let status = match child.wait_timeout(config.timeout).map_err(Error::OracleIo)? {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            let _ = writer.join();
            return Err(Error::OracleTimeout(config.timeout));
        }
    };
    writer
        .join()
        .expect("stdin writer panicked")
        .map_err(Error::OracleIo)?;
    let stdout = out.join().expect("stdout reader panicked").map_err(Error::OracleIo)?;
    let stderr = err.join().expect("stderr reader panicked").unwrap_or_default();
    if !status.success() {
        return Err(Error::OracleExit {
            code: status.code(),
            stderr,
        });
    }
    Ok(stdout)
}
