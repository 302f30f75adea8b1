use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use popqc_core::optimizer::STATS_SCHEMA_VERSION;
use popqc_core::qasm::serialize_gates;
use popqc_core::{Engine, OptimizeResult, OptimizerConfig, OracleErrorPolicy, RoundStats};
use serde::Serialize;

use crate::args::{ErrorPolicyArg, OptimizeArgs, StatsFormat};
use crate::common::{build_oracle, exit, io_failure, read_program, resolve_threads, write_output, CliResult, Failure};

#[derive(Serialize)]
struct RoundRow {
    kind: &'static str,
    schema_version: u32,
    round: usize,
    fingers_total: usize,
    fingers_selected: usize,
    oracle_calls: usize,
    improved_calls: usize,
    oracle_failures: usize,
    gates_removed: usize,
    gates_after: usize,
    potential_before: usize,
    potential_after: usize,
    min_selected_gap: Option<usize>,
    wall_secs: f64,
    oracle_secs: f64,
    /// Gates removed so far, as a share of the input.
    reduction_pct: f64,
    /// Oracle time so far, as a share of elapsed thread time.
    oracle_time_pct: f64,
}

#[derive(Serialize)]
struct SummaryRow {
    kind: &'static str,
    schema_version: u32,
    omega: usize,
    threads: usize,
    initial_gates: usize,
    final_gates: usize,
    rounds: usize,
    oracle_calls: usize,
    oracle_call_bound: usize,
    oracle_failures: usize,
    converged: bool,
    wall_secs: f64,
    reduction_pct: f64,
    oracle_time_pct: f64,
}

enum StatsSink {
    Csv(Box<csv::Writer<File>>),
    Jsonl(BufWriter<File>),
}

impl StatsSink {
    fn open(path: &Path, format: StatsFormat) -> CliResult<Self> {
        let file = File::create(path).map_err(|e| io_failure(path, e))?;
        Ok(match format {
            StatsFormat::Csv => Self::Csv(Box::new(csv::Writer::from_writer(file))),
            StatsFormat::Jsonl => Self::Jsonl(BufWriter::new(file)),
        })
    }

    fn round(&mut self, row: &RoundRow) -> std::io::Result<()> {
        match self {
            Self::Csv(w) => {
                w.serialize(row)?;
                w.flush()
            }
            Self::Jsonl(w) => {
                serde_json::to_writer(&mut *w, row)?;
                w.write_all(b"\n")?;
                w.flush()
            }
        }
    }

    /// CSV keeps one row shape, so the summary only goes to JSON lines.
    fn finish(mut self, summary: &SummaryRow) -> std::io::Result<()> {
        if let Self::Jsonl(w) = &mut self {
            serde_json::to_writer(&mut *w, summary)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        Ok(())
    }
}

struct Progress {
    initial: usize,
    threads: usize,
    wall: f64,
}

impl Progress {
    fn row(&mut self, s: &RoundStats) -> RoundRow {
        self.wall += s.wall_secs;
        RoundRow {
            kind: "round",
            schema_version: STATS_SCHEMA_VERSION,
            round: s.round,
            fingers_total: s.fingers_total,
            fingers_selected: s.fingers_selected,
            oracle_calls: s.oracle_calls,
            improved_calls: s.improved_calls,
            oracle_failures: s.oracle_failures,
            gates_removed: s.gates_removed,
            gates_after: s.gates_after,
            potential_before: s.potential_before,
            potential_after: s.potential_after,
            min_selected_gap: s.min_selected_gap,
            wall_secs: s.wall_secs,
            oracle_secs: s.oracle_secs,
            reduction_pct: pct(self.initial - s.gates_after, self.initial),
            oracle_time_pct: time_pct(s.cumulative_oracle_secs, self.wall, self.threads),
        }
    }
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn time_pct(oracle: f64, wall: f64, threads: usize) -> f64 {
    if wall <= 0.0 {
        0.0
    } else {
        (100.0 * oracle / (wall * threads as f64)).min(100.0)
    }
}

fn summary(r: &OptimizeResult) -> SummaryRow {
    SummaryRow {
        kind: "summary",
        schema_version: STATS_SCHEMA_VERSION,
        omega: r.omega,
        threads: r.threads,
        initial_gates: r.initial_gates,
        final_gates: r.gates.len(),
        rounds: r.round_count,
        oracle_calls: r.oracle_calls,
        oracle_call_bound: r.oracle_call_bound(),
        oracle_failures: r.oracle_failures,
        converged: r.converged,
        wall_secs: r.wall_secs,
        reduction_pct: r.reduction_pct(),
        oracle_time_pct: 100.0 * r.oracle_time_fraction(),
    }
}

pub fn run(args: OptimizeArgs) -> CliResult {
    let program = read_program(&args.input)?;
    if program.gates.is_empty() {
        write_output(args.output.as_deref(), &serialize_gates(program.num_qubits, &[]))?;
        return Ok(());
    }
    let threads = resolve_threads(args.run.threads)?;
    let oracle = build_oracle(&args.run.oracle, threads)?;
    let config = OptimizerConfig {
        omega: args.run.omega,
        max_rounds: args.max_rounds,
        threads: Some(threads),
        collect_stats: false,
        check_invariants: args.audit,
        check_tracking: false,
        on_oracle_error: match args.on_oracle_error {
            ErrorPolicyArg::Abort => OracleErrorPolicy::Abort,
            ErrorPolicyArg::Skip => OracleErrorPolicy::Skip,
        },
    };
    let mut engine = Engine::new(&*oracle, &program.gates, program.num_qubits, config)?;
    let mut sink = args.stats.as_deref().map(|p| StatsSink::open(p, args.format)).transpose()?;
    let mut progress = Progress {
        initial: program.gates.len(),
        threads,
        wall: 0.0,
    };
    let stats_path = args.stats.as_deref().unwrap_or(Path::new("stats"));
    while !engine.is_done() && args.max_rounds.is_none_or(|m| engine.round_count() < m) {
        let Some(stats) = engine.step()? else { break };
        log::debug!(
            "round {}: {} of {} fingers, {} gates left",
            stats.round,
            stats.fingers_selected,
            stats.fingers_total,
            stats.gates_after
        );
        if let Some(sink) = &mut sink {
            sink.round(&progress.row(&stats)).map_err(|e| io_failure(stats_path, e))?;
        }
    }
    let result = engine.finish();
    let summary = summary(&result);
    if let Some(sink) = sink {
        sink.finish(&summary).map_err(|e| io_failure(stats_path, e))?;
    }
    write_output(args.output.as_deref(), &serialize_gates(result.num_qubits, &result.gates))?;
    eprintln!(
        "{} -> {} gates ({:.2}% removed), {} rounds, {} oracle calls, oracle time {:.1}%",
        summary.initial_gates,
        summary.final_gates,
        summary.reduction_pct,
        summary.rounds,
        summary.oracle_calls,
        summary.oracle_time_pct
    );
    for msg in &result.audit_failures {
        log::error!("audit: {msg}");
    }
    if !result.audit_failures.is_empty() {
        return Err(Failure::new(
            exit::AUDIT,
            format!("{} invariant audits failed", result.audit_failures.len()),
        ));
    }
    if !result.converged {
        return Err(Failure::new(
            exit::NOT_CONVERGED,
            format!("stopped after {} rounds with fingers left", summary.rounds),
        ));
    }
    Ok(())
}
