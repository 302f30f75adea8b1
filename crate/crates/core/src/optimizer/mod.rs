//! The round engine.
//!
//! Each round selects non-interfering fingers, optimizes the 2Ω window
//! around every selected finger in parallel against a read-only circuit,
//! then applies all accepted replacements in one batch and merges the new
//! boundary fingers into the remaining ones.

mod fingers;
mod stats;

use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use fingers::{merge_dedup, select_fingers, FingerSet};
pub use stats::{oracle_call_bound, OptimizeResult, RoundStats, STATS_SCHEMA_VERSION};

use crate::circuit::{Circuit, Slot};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::oracle::{is_improvement, Oracle};

pub const DEFAULT_OMEGA: usize = 200;

/// What to do when an oracle call fails for a reason other than a timeout.
/// Timeouts always count as "no improvement".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OracleErrorPolicy {
    #[default]
    Abort,
    /// Keep the original segment and drop the finger.
    Skip,
}

#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    pub omega: usize,
    pub max_rounds: Option<usize>,
    /// Size of a dedicated thread pool; `None` uses the global pool.
    pub threads: Option<usize>,
    pub collect_stats: bool,
    /// Per-round structural checks (selection, potential, tree audit).
    pub check_invariants: bool,
    /// Also scan every Ω-window after each round for reducible windows that
    /// hold no finger. Costs one oracle call per window.
    pub check_tracking: bool,
    pub on_oracle_error: OracleErrorPolicy,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            omega: DEFAULT_OMEGA,
            max_rounds: None,
            threads: None,
            collect_stats: true,
            check_invariants: false,
            check_tracking: false,
            on_oracle_error: OracleErrorPolicy::Abort,
        }
    }
}

impl OptimizerConfig {
    pub fn with_omega(omega: usize) -> Self {
        Self {
            omega,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega == 0 {
            return Err(Error::InvalidOmega);
        }
        if self.max_rounds == Some(0) {
            return Err(Error::InvalidConfig("max_rounds must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("thread count must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of one call to [`optimize_segments`].
#[derive(Clone, Debug, Default)]
pub struct SegmentRound {
    pub fingers: FingerSet,
    pub selected: FingerSet,
    /// Ranks of the selected fingers before the update.
    pub selected_ranks: Vec<usize>,
    pub oracle_calls: usize,
    pub improved_calls: usize,
    pub oracle_failures: usize,
    pub gates_removed: usize,
    pub oracle_time: Duration,
    /// Calls after which |fingers| + 2·|gates| would not have dropped by at
    /// least one, counted before deduplication.
    pub potential_violations: usize,
}

struct Staged {
    updates: Vec<(usize, Slot)>,
    new_fingers: [usize; 2],
    removed: usize,
    elapsed: Duration,
    outcome: CallOutcome,
}

enum CallOutcome {
    Unchanged,
    Improved,
    Failed(Error),
}

fn stage_one<O: Oracle + ?Sized>(circuit: &Circuit, finger: usize, oracle: &O, omega: usize) -> Staged {
    let rank = circuit.before(finger).expect("finger within slot range");
    let segment = circuit.extract_segment(rank, omega);
    let start = Instant::now();
    let reply = oracle.optimize_segment(circuit.num_qubits(), &segment.gates);
    let elapsed = start.elapsed();
    let mut staged = Staged {
        updates: Vec::new(),
        new_fingers: [0, 0],
        removed: 0,
        elapsed,
        outcome: CallOutcome::Unchanged,
    };
    let optimized = match reply {
        Ok(g) => g,
        Err(e) => {
            staged.outcome = CallOutcome::Failed(e);
            return staged;
        }
    };
    if !is_improvement(oracle, &segment.gates, &optimized) {
        return staged;
    }
    if let Some(bad) = optimized.iter().find_map(|g| g.validate(circuit.num_qubits()).err()) {
        staged.outcome = CallOutcome::Failed(bad);
        return staged;
    }
    // Optimized gates fill the window's slots from the left; the rest become
    // tombstones.
    staged.updates = segment
        .slots
        .iter()
        .enumerate()
        .map(|(k, &slot)| (slot, optimized.get(k).map_or(Slot::Tombstone, |&g| Slot::Gate(g))))
        .collect();
    let n = circuit.len();
    let right_rank = (rank + omega).min(n - 1);
    staged.new_fingers = [
        segment.slots[0],
        circuit.index_of(right_rank).expect("rank clamped into range"),
    ];
    staged.removed = segment.len() - optimized.len();
    staged.outcome = CallOutcome::Improved;
    staged
}

/// One round: select, optimize in parallel, apply, merge.
///
/// Oracle failures other than timeouts are returned as errors, leaving the
/// circuit untouched for this round.
pub fn optimize_segments<O: Oracle + ?Sized>(
    circuit: &mut Circuit,
    fingers: &FingerSet,
    oracle: &O,
    omega: usize,
) -> Result<SegmentRound> {
    run_round(circuit, fingers, oracle, omega, OracleErrorPolicy::Abort)
}

fn run_round<O: Oracle + ?Sized>(
    circuit: &mut Circuit,
    fingers: &FingerSet,
    oracle: &O,
    omega: usize,
    policy: OracleErrorPolicy,
) -> Result<SegmentRound> {
    let (selected, remaining) = select_fingers(fingers, circuit, omega);
    let selected_ranks: Vec<usize> = selected
        .as_slice()
        .par_iter()
        .map(|&f| circuit.before(f).expect("finger within slot range"))
        .collect();

    let read_only: &Circuit = circuit;
    let staged: Vec<Staged> = selected
        .as_slice()
        .par_iter()
        .map(|&f| stage_one(read_only, f, oracle, omega))
        .collect();

    let mut round = SegmentRound {
        oracle_calls: staged.len(),
        ..Default::default()
    };
    let mut updates = Vec::new();
    let mut new_fingers: Vec<usize> = Vec::new();
    for s in staged {
        round.oracle_time += s.elapsed;
        match s.outcome {
            CallOutcome::Unchanged => {}
            CallOutcome::Failed(e) => {
                round.oracle_failures += 1;
                match (&e, policy) {
                    (Error::OracleTimeout(_), _) | (_, OracleErrorPolicy::Skip) => {
                        log::warn!("oracle call failed, keeping segment: {e}");
                    }
                    (_, OracleErrorPolicy::Abort) => return Err(e),
                }
            }
            CallOutcome::Improved => {
                round.improved_calls += 1;
                round.gates_removed += s.removed;
                let [left, right] = s.new_fingers;
                let added = if left == right { 1 } else { 2 };
                // ΔL = added - 1 - 2·removed must be at most -1
                if added > 2 * s.removed {
                    round.potential_violations += 1;
                }
                updates.extend(s.updates);
                for f in [left, right] {
                    if new_fingers.last().is_none_or(|&last| last < f) {
                        new_fingers.push(f);
                    } else {
                        debug_assert_eq!(new_fingers.last(), Some(&f), "new fingers out of order");
                    }
                }
            }
        }
    }
    circuit.substitute(&updates)?;
    let merged = merge_dedup(remaining.as_slice(), &new_fingers);
    round.fingers = FingerSet::from_sorted(rehome(circuit, &merged));
    round.selected = selected;
    round.selected_ranks = selected_ranks;
    Ok(round)
}

/// Move each finger onto the live gate holding its rank, or the last gate when
/// it sits past the end. Fingers left on tombstones would otherwise pile up on
/// one rank and starve selection.
fn rehome(circuit: &Circuit, fingers: &[usize]) -> Vec<usize> {
    let n = circuit.len();
    if n == 0 {
        return Vec::new();
    }
    let mut moved: Vec<usize> = fingers
        .par_iter()
        .map(|&f| {
            let rank = circuit.before(f).expect("finger within slot range").min(n - 1);
            circuit.index_of(rank).expect("rank clamped into range")
        })
        .collect();
    moved.dedup();
    moved
}

/// Stepwise driver around [`optimize_segments`], exposing the circuit and
/// fingers between rounds.
pub struct Engine<'o, O: Oracle + ?Sized> {
    oracle: &'o O,
    circuit: Circuit,
    fingers: FingerSet,
    config: OptimizerConfig,
    pool: Option<rayon::ThreadPool>,
    initial_gates: usize,
    rounds: Vec<RoundStats>,
    round_count: usize,
    oracle_calls: usize,
    oracle_failures: usize,
    oracle_time: Duration,
    wall: Duration,
    audit_failures: Vec<String>,
}

impl<'o, O: Oracle + ?Sized> Engine<'o, O> {
    pub fn new(oracle: &'o O, gates: &[Gate], num_qubits: u32, config: OptimizerConfig) -> Result<Self> {
        config.validate()?;
        let pool = config.threads.map(|t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .expect("thread pool construction")
        });
        let circuit = match &pool {
            Some(p) => p.install(|| Circuit::create(gates, num_qubits))?,
            None => Circuit::create(gates, num_qubits)?,
        };
        let fingers = FingerSet::initial(gates.len(), config.omega);
        Ok(Self {
            oracle,
            circuit,
            fingers,
            config,
            pool,
            initial_gates: gates.len(),
            rounds: Vec::new(),
            round_count: 0,
            oracle_calls: 0,
            oracle_failures: 0,
            oracle_time: Duration::ZERO,
            wall: Duration::ZERO,
            audit_failures: Vec::new(),
        })
    }

    /// Replace the finger set, e.g. to start from a hand-picked cover.
    pub fn with_fingers(mut self, fingers: FingerSet) -> Self {
        assert!(
            fingers.iter().all(|&f| f < self.circuit.capacity()),
            "finger outside the slot array"
        );
        self.fingers = fingers;
        self
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn fingers(&self) -> &FingerSet {
        &self.fingers
    }

    pub fn rounds(&self) -> &[RoundStats] {
        &self.rounds
    }

    /// Rounds run so far, whether or not stats are collected.
    pub fn round_count(&self) -> usize {
        self.round_count
    }

    pub fn is_done(&self) -> bool {
        self.fingers.is_empty()
    }

    pub fn threads(&self) -> usize {
        self.pool
            .as_ref()
            .map_or_else(rayon::current_num_threads, |p| p.current_num_threads())
    }

    fn potential(&self) -> usize {
        self.fingers.len() + 2 * self.circuit.len()
    }

    /// Run one round. Returns `None` once no fingers remain.
    pub fn step(&mut self) -> Result<Option<RoundStats>> {
        if self.fingers.is_empty() {
            return Ok(None);
        }
        let started = Instant::now();
        let potential_before = self.potential();
        let fingers_total = self.fingers.len();
        let omega = self.config.omega;
        let (oracle, policy) = (self.oracle, self.config.on_oracle_error);
        let (circuit, fingers) = (&mut self.circuit, &self.fingers);
        let round = match &self.pool {
            Some(p) => p.install(|| run_round(circuit, fingers, oracle, omega, policy))?,
            None => run_round(circuit, fingers, oracle, omega, policy)?,
        };
        self.round_count += 1;
        self.fingers = round.fingers.clone();
        self.oracle_calls += round.oracle_calls;
        self.oracle_failures += round.oracle_failures;
        self.oracle_time += round.oracle_time;

        let min_selected_gap = round.selected_ranks.windows(2).map(|w| w[1] - w[0]).min();
        if self.config.check_invariants {
            self.audit_round(&round, fingers_total, potential_before, min_selected_gap);
        }
        if self.config.check_tracking {
            self.audit_tracking();
        }
        let wall = started.elapsed();
        self.wall += wall;
        let stats = RoundStats {
            round: self.round_count,
            fingers_total,
            fingers_selected: round.selected.len(),
            oracle_calls: round.oracle_calls,
            improved_calls: round.improved_calls,
            oracle_failures: round.oracle_failures,
            gates_removed: round.gates_removed,
            gates_after: self.circuit.len(),
            potential_before,
            potential_after: self.potential(),
            min_selected_gap,
            wall_secs: wall.as_secs_f64(),
            oracle_secs: round.oracle_time.as_secs_f64(),
            cumulative_oracle_secs: self.oracle_time.as_secs_f64(),
        };
        if self.config.collect_stats {
            self.rounds.push(stats.clone());
        }
        Ok(Some(stats))
    }

    fn audit_round(
        &mut self,
        round: &SegmentRound,
        fingers_total: usize,
        potential_before: usize,
        min_gap: Option<usize>,
    ) {
        let r = self.round_count;
        let omega = self.config.omega;
        let mut fail = |msg: String| self.audit_failures.push(format!("round {r}: {msg}"));
        if round.selected.len() * 4 * omega < fingers_total {
            fail(format!(
                "selected {} of {} fingers, below 1/(4Ω)",
                round.selected.len(),
                fingers_total
            ));
        }
        if round.selected.is_empty() && fingers_total > 0 {
            fail("no finger selected".into());
        }
        if let Some(gap) = min_gap {
            if gap < 2 * omega {
                fail(format!("selected fingers only {gap} ranks apart"));
            }
        }
        if round.potential_violations > 0 {
            fail(format!("{} oracle calls did not lower the potential", round.potential_violations));
        }
        let after = self.fingers.len() + 2 * self.circuit.len();
        if after + round.oracle_calls > potential_before {
            fail(format!(
                "potential went {potential_before} -> {after} over {} calls",
                round.oracle_calls
            ));
        }
        if self.fingers.iter().any(|&f| f >= self.circuit.capacity()) {
            fail("finger outside slot array".into());
        }
        if !self.circuit.audit() {
            fail("index tree weights inconsistent".into());
        }
        let bound = oracle_call_bound(self.initial_gates, omega);
        if self.oracle_calls > bound {
            fail(format!("{} oracle calls exceed bound {bound}", self.oracle_calls));
        }
    }

    /// Every reducible Ω-window must hold a finger; when fewer than Ω gates
    /// remain, a reducible circuit must have some finger.
    fn audit_tracking(&mut self) {
        let omega = self.config.omega;
        let n = self.circuit.len();
        if n == 0 {
            return;
        }
        let gates = self.circuit.gates();
        let nq = self.circuit.num_qubits();
        let oracle = self.oracle;
        let circuit = &self.circuit;
        let fingers = &self.fingers;
        let check = || -> Vec<usize> {
            if n < omega {
                let reducible = oracle
                    .optimize_segment(nq, &gates)
                    .is_ok_and(|o| is_improvement(oracle, &gates, &o));
                return if reducible && fingers.is_empty() { vec![0] } else { vec![] };
            }
            (0..=n - omega)
                .into_par_iter()
                .filter(|&s| {
                    let window = &gates[s..s + omega];
                    let reducible = oracle
                        .optimize_segment(nq, window)
                        .is_ok_and(|o| is_improvement(oracle, window, &o));
                    reducible && {
                        let first = circuit.index_of(s).expect("rank in range");
                        let last = circuit.index_of(s + omega - 1).expect("rank in range");
                        !fingers.any_in(first, last)
                    }
                })
                .collect()
        };
        let missed = match &self.pool {
            Some(p) => p.install(check),
            None => check(),
        };
        if let Some(&s) = missed.first() {
            self.audit_failures.push(format!(
                "round {}: {} reducible windows without a finger (first at rank {s})",
                self.round_count,
                missed.len()
            ));
        }
    }

    /// Run rounds until no fingers remain or the round cap is hit.
    pub fn run(mut self) -> Result<OptimizeResult> {
        while !self.is_done() && self.config.max_rounds.is_none_or(|m| self.round_count < m) {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> OptimizeResult {
        let threads = self.threads();
        OptimizeResult {
            gates: self.circuit.gates(),
            num_qubits: self.circuit.num_qubits(),
            omega: self.config.omega,
            initial_gates: self.initial_gates,
            rounds: self.rounds,
            round_count: self.round_count,
            oracle_calls: self.oracle_calls,
            oracle_failures: self.oracle_failures,
            converged: self.fingers.is_empty(),
            threads,
            wall_secs: self.wall.as_secs_f64(),
            oracle_secs: self.oracle_time.as_secs_f64(),
            audit_failures: self.audit_failures,
        }
    }
}

/// Optimize `gates` until every Ω-window is oracle-optimal.
pub fn popqc<O: Oracle + ?Sized>(
    oracle: &O,
    gates: &[Gate],
    num_qubits: u32,
    config: OptimizerConfig,
) -> Result<OptimizeResult> {
    Engine::new(oracle, gates, num_qubits, config)?.run()
}
