use serde::{Deserialize, Serialize};

use crate::gate::Gate;

/// Version tag carried by every serialized stats record.
pub const STATS_SCHEMA_VERSION: u32 = 1;

/// Metrics for one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub round: usize,
    pub fingers_total: usize,
    pub fingers_selected: usize,
    pub oracle_calls: usize,
    pub improved_calls: usize,
    pub oracle_failures: usize,
    pub gates_removed: usize,
    pub gates_after: usize,
    /// |fingers| + 2·|gates| at the start of the round.
    pub potential_before: usize,
    pub potential_after: usize,
    /// Smallest rank distance between consecutive selected fingers.
    pub min_selected_gap: Option<usize>,
    pub wall_secs: f64,
    /// Oracle time summed over all calls of this round.
    pub oracle_secs: f64,
    pub cumulative_oracle_secs: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub gates: Vec<Gate>,
    pub num_qubits: u32,
    pub omega: usize,
    pub initial_gates: usize,
    /// Per-round stats; empty unless `collect_stats` is set.
    pub rounds: Vec<RoundStats>,
    pub round_count: usize,
    pub oracle_calls: usize,
    pub oracle_failures: usize,
    /// False when the round cap stopped the run with fingers left.
    pub converged: bool,
    pub threads: usize,
    pub wall_secs: f64,
    pub oracle_secs: f64,
    /// Invariant checks that failed. Always empty unless checking is on.
    pub audit_failures: Vec<String>,
}

impl OptimizeResult {
    pub fn gates_removed(&self) -> usize {
        self.initial_gates - self.gates.len()
    }

    pub fn reduction_pct(&self) -> f64 {
        100.0 * self.gates_removed() as f64 / self.initial_gates as f64
    }

    /// Share of available thread time spent inside the oracle.
    pub fn oracle_time_fraction(&self) -> f64 {
        if self.wall_secs <= 0.0 {
            return 0.0;
        }
        (self.oracle_secs / (self.wall_secs * self.threads as f64)).min(1.0)
    }

    /// Upper bound on oracle calls from the initial potential ⌈n/Ω⌉ + 2n.
    pub fn oracle_call_bound(&self) -> usize {
        oracle_call_bound(self.initial_gates, self.omega)
    }
}

pub fn oracle_call_bound(n: usize, omega: usize) -> usize {
    n.div_ceil(omega) + 2 * n
}
