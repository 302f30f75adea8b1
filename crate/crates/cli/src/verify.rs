use popqc_core::verifier::verify;
use serde::Serialize;

use crate::args::VerifyArgs;
use crate::common::{build_oracle, exit, io_failure, read_program, resolve_threads, write_output, CliResult, Failure};

#[derive(Serialize)]
struct Report<'a> {
    original: &'a str,
    optimized: &'a str,
    num_qubits: u32,
    original_gates: usize,
    optimized_gates: usize,
    omega: usize,
    oracle: &'a str,
    #[serde(flatten)]
    report: popqc_core::VerifyReport,
    /// Set when the register is wider than the unitary check allows.
    equivalence_skipped: bool,
}

pub fn run(args: VerifyArgs) -> CliResult {
    if args.run.omega == 0 {
        return Err(Failure::new(exit::USAGE, "--omega must be at least 1"));
    }
    let original = read_program(&args.original)?;
    let optimized = read_program(&args.optimized)?;
    let threads = resolve_threads(args.run.threads)?;
    let oracle = build_oracle(&args.run.oracle, threads)?;
    let num_qubits = original.num_qubits.max(optimized.num_qubits);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
    let report = pool.install(|| {
        verify(
            &*oracle,
            num_qubits,
            &original.gates,
            &optimized.gates,
            args.run.omega,
            args.qubit_cap,
            args.tol,
        )
    })?;
    if report.oracle_errors > 0 {
        return Err(Failure::new(
            exit::ORACLE,
            format!("oracle failed on {} of {} windows", report.oracle_errors, report.windows_checked),
        ));
    }

    let equivalent = report.equivalence.as_ref().is_none_or(|e| e.equivalent);
    let locally_optimal = report.locally_optimal;
    let (original_path, optimized_path) = (args.original.display().to_string(), args.optimized.display().to_string());
    let out = Report {
        original: &original_path,
        optimized: &optimized_path,
        num_qubits,
        original_gates: original.gates.len(),
        optimized_gates: optimized.gates.len(),
        omega: args.run.omega,
        oracle: oracle.name(),
        equivalence_skipped: report.equivalence.is_none(),
        report,
    };
    let mut json = serde_json::to_string_pretty(&out).expect("report serializes");
    json.push('\n');
    match &args.report {
        Some(p) => std::fs::write(p, json).map_err(|e| io_failure(p, e))?,
        None => write_output(None, &json)?,
    }

    if !equivalent {
        return Err(Failure::new(exit::NOT_EQUIVALENT, "circuits are not equivalent"));
    }
    if !locally_optimal {
        return Err(Failure::new(
            exit::NOT_LOCALLY_OPTIMAL,
            format!("{} windows can still be reduced", out.report.violations.len()),
        ));
    }
    Ok(())
}
