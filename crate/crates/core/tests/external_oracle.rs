//! The subprocess protocol, exercised with small scripted oracles.

use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use popqc_core::oracle::external_optimize;
use popqc_core::{
    popqc, Error, ExternalOracle, ExternalOracleConfig, Gate, Oracle, OptimizerConfig, OracleErrorPolicy, Transport,
};

fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

/// Deletes adjacent identical `h` lines, once per pair.
const DROP_HH: &str = r#"#!/usr/bin/env python3
import sys
src = sys.argv[1] if len(sys.argv) > 2 else None
text = open(src).read() if src else sys.stdin.read()
out = []
for line in text.splitlines():
    if line.startswith("h ") and out and out[-1] == line:
        out.pop()
    else:
        out.append(line)
reply = "\n".join(out) + "\n"
if src:
    open(sys.argv[2], "w").write(reply)
else:
    sys.stdout.write(reply)
"#;

fn config(cmd: &Path) -> ExternalOracleConfig {
    ExternalOracleConfig::new([cmd.to_string_lossy().into_owned()]).timeout(Duration::from_secs(20))
}

#[test]
fn cat_is_identity() {
    let cfg = ExternalOracleConfig::new(["cat"]);
    let seg = [Gate::H(0), Gate::cnot(0, 2), Gate::rz(1, 0.1)];
    assert_eq!(external_optimize(&cfg, 3, &seg).unwrap(), seg.to_vec());
}

#[test]
fn scripted_hh_deletion_both_transports() {
    let dir = tempfile::tempdir().unwrap();
    let mock = script(dir.path(), "drop_hh.py", DROP_HH);
    let seg = [Gate::H(0), Gate::H(0), Gate::X(1)];
    let out = external_optimize(&config(&mock), 2, &seg).unwrap();
    assert_eq!(out, vec![Gate::X(1)]);

    let files = config(&mock).transport(Transport::TempFiles);
    assert_eq!(external_optimize(&files, 2, &seg).unwrap(), vec![Gate::X(1)]);

    let explicit = ExternalOracleConfig::new([
        mock.to_string_lossy().into_owned(),
        "{input}".into(),
        "{output}".into(),
    ])
    .transport(Transport::TempFiles);
    assert_eq!(external_optimize(&explicit, 2, &seg).unwrap(), vec![Gate::X(1)]);
}

#[test]
fn timeout_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let slow = script(dir.path(), "slow.sh", "#!/bin/sh\nsleep 5\ncat\n");
    let cfg = config(&slow).timeout(Duration::from_millis(200));
    let started = std::time::Instant::now();
    let err = external_optimize(&cfg, 1, &[Gate::H(0)]).unwrap_err();
    assert!(matches!(err, Error::OracleTimeout(_)), "{err}");
    assert!(started.elapsed() < Duration::from_secs(4));
}

#[test]
fn timeouts_keep_the_original_segment() {
    let dir = tempfile::tempdir().unwrap();
    let slow = script(dir.path(), "slow.sh", "#!/bin/sh\nsleep 5\ncat\n");
    let oracle = ExternalOracle::new(config(&slow).timeout(Duration::from_millis(100)));
    let gates = [Gate::H(0), Gate::H(0), Gate::X(1)];
    let result = popqc(&oracle, &gates, 2, OptimizerConfig::with_omega(4)).unwrap();
    assert_eq!(result.gates, gates.to_vec());
    assert!(result.converged);
    assert_eq!(result.oracle_failures, result.oracle_calls);
}

#[test]
fn failure_modes() {
    let dir = tempfile::tempdir().unwrap();
    let seg = [Gate::H(0)];

    let fail = script(dir.path(), "fail.sh", "#!/bin/sh\necho boom >&2\nexit 3\n");
    match external_optimize(&config(&fail), 1, &seg).unwrap_err() {
        Error::OracleExit { code, stderr } => {
            assert_eq!(code, Some(3));
            assert!(stderr.contains("boom"));
        }
        e => panic!("unexpected {e}"),
    }

    let junk = script(dir.path(), "junk.sh", "#!/bin/sh\necho 'qreg q[1]; u3(1,2,3) q[0];'\n");
    assert!(matches!(
        external_optimize(&config(&junk), 1, &seg).unwrap_err(),
        Error::OracleReply(_)
    ));

    let wide = script(dir.path(), "wide.sh", "#!/bin/sh\necho 'qreg q[4]; h q[3];'\n");
    assert!(matches!(
        external_optimize(&config(&wide), 2, &seg).unwrap_err(),
        Error::OracleWidth { expected: 2, got: 4 }
    ));

    let silent = script(dir.path(), "silent.sh", "#!/bin/sh\nexit 0\n");
    let files = config(&silent).transport(Transport::TempFiles);
    assert!(matches!(
        external_optimize(&files, 1, &seg).unwrap_err(),
        Error::OracleMissingReply(_)
    ));

    let missing = ExternalOracleConfig::new(["/nonexistent/oracle"]);
    assert!(matches!(external_optimize(&missing, 1, &seg).unwrap_err(), Error::OracleSpawn(_)));
}

#[test]
fn hard_failures_abort_unless_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let fail = script(dir.path(), "fail.sh", "#!/bin/sh\nexit 1\n");
    let oracle = ExternalOracle::new(config(&fail));
    let gates = [Gate::H(0), Gate::H(0)];
    assert!(popqc(&oracle, &gates, 1, OptimizerConfig::with_omega(2)).is_err());

    let mut cfg = OptimizerConfig::with_omega(2);
    cfg.on_oracle_error = OracleErrorPolicy::Skip;
    let result = popqc(&oracle, &gates, 1, cfg).unwrap();
    assert_eq!(result.gates, gates.to_vec());
    assert!(result.oracle_failures > 0);
}

#[test]
fn drives_a_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let mock = script(dir.path(), "drop_hh.py", DROP_HH);
    let oracle = ExternalOracle::new(config(&mock).max_concurrent(2));
    assert!(oracle.name().starts_with("exec:"));
    let mut gates = Vec::new();
    for i in 0..40u32 {
        gates.extend([Gate::X(i % 3), Gate::H(3), Gate::H(3)]);
    }
    let result = popqc(&oracle, &gates, 4, OptimizerConfig::with_omega(8)).unwrap();
    assert_eq!(result.gates.len(), 40);
    assert!(result.gates.iter().all(|g| matches!(g, Gate::X(_))));
}
