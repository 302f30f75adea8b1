use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use popqc_core::{popqc, Gate, OptimizerConfig};
use serde::Serialize;

use crate::args::BenchArgs;
use crate::common::{build_oracle, exit, io_failure, read_program, CliResult, Failure};
use crate::generate::params;

#[derive(Serialize, Default)]
struct Row {
    benchmark: String,
    n: usize,
    omega: usize,
    threads: usize,
    seconds: Option<f64>,
    rounds: Option<usize>,
    oracle_calls: Option<usize>,
    calls_per_gate: Option<f64>,
    gates_after: Option<usize>,
    reduction_pct: Option<f64>,
    oracle_time_pct: Option<f64>,
    /// Time at the first thread count divided by time at this one.
    speedup: Option<f64>,
    error: Option<String>,
}

enum Source {
    Synthetic(usize),
    File(PathBuf),
}

fn sources(args: &BenchArgs) -> CliResult<Vec<Source>> {
    let Some(dir) = &args.dir else {
        return Ok(args.sizes.iter().map(|&n| Source::Synthetic(n)).collect());
    };
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::new(exit::INPUT, format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::new(exit::INPUT, format!("no .qasm files in {}", dir.display())));
    }
    Ok(files.into_iter().map(Source::File).collect())
}

fn load(source: &Source, args: &BenchArgs) -> CliResult<(String, u32, Vec<Gate>)> {
    match source {
        Source::Synthetic(n) => {
            let p = params(&args.synth, *n)?;
            let name = format!("synth-q{}-d{}-s{}", p.num_qubits, args.synth.density, args.synth.seed);
            Ok((name, p.num_qubits, p.generate()))
        }
        Source::File(path) => {
            let program = read_program(path)?;
            let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into());
            Ok((name, program.num_qubits, program.gates))
        }
    }
}

pub fn run(args: BenchArgs) -> CliResult {
    if args.thread_counts.contains(&0) {
        return Err(Failure::new(exit::USAGE, "thread counts must be at least 1"));
    }
    if args.omega == 0 {
        return Err(Failure::new(exit::USAGE, "--omega must be at least 1"));
    }
    let max_threads = args.thread_counts.iter().copied().max().unwrap_or(1);
    let oracle = build_oracle(&args.oracle, max_threads)?;
    let sink: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| io_failure(p, e))?),
        None => Box::new(io::stdout()),
    };
    let mut csv = csv::Writer::from_writer(sink);
    let out_name = args.output.clone().unwrap_or_else(|| PathBuf::from("stdout"));
    let mut failures = 0;

    for source in sources(&args)? {
        let (name, num_qubits, gates) = match load(&source, &args) {
            Ok(loaded) => loaded,
            Err(e) => {
                log::error!("{e}");
                failures += 1;
                let benchmark = match &source {
                    Source::File(p) => p.display().to_string(),
                    Source::Synthetic(n) => format!("synth-{n}"),
                };
                let row = Row {
                    benchmark,
                    omega: args.omega,
                    error: Some(e.message),
                    ..Row::default()
                };
                csv.serialize(&row).and_then(|_| Ok(csv.flush()?)).map_err(|e| io_failure(&out_name, e))?;
                continue;
            }
        };
        let mut baseline = None;
        for &threads in &args.thread_counts {
            let config = OptimizerConfig {
                threads: Some(threads),
                ..OptimizerConfig::with_omega(args.omega)
            };
            let mut row = Row {
                benchmark: name.clone(),
                n: gates.len(),
                omega: args.omega,
                threads,
                ..Row::default()
            };
            let started = Instant::now();
            match popqc(&*oracle, &gates, num_qubits, config) {
                Ok(r) => {
                    let secs = started.elapsed().as_secs_f64();
                    let base = *baseline.get_or_insert(secs);
                    row.seconds = Some(secs);
                    row.rounds = Some(r.round_count);
                    row.oracle_calls = Some(r.oracle_calls);
                    row.calls_per_gate = Some(r.oracle_calls as f64 / gates.len().max(1) as f64);
                    row.gates_after = Some(r.gates.len());
                    row.reduction_pct = Some(if gates.is_empty() { 0.0 } else { r.reduction_pct() });
                    row.oracle_time_pct = Some(100.0 * r.oracle_time_fraction());
                    row.speedup = Some(base / secs);
                    log::info!("{name} n={} threads={threads}: {secs:.3}s, {} rounds", gates.len(), r.round_count);
                }
                Err(e) => {
                    log::error!("{name} threads={threads}: {e}");
                    failures += 1;
                    row.error = Some(e.to_string());
                }
            }
            csv.serialize(&row).and_then(|_| Ok(csv.flush()?)).map_err(|e| io_failure(&out_name, e))?;
        }
    }
    if failures > 0 {
        log::warn!("{failures} benchmark rows failed");
    }
    Ok(())
}
