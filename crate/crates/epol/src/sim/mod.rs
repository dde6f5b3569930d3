//! Deterministic discrete-event execution of full polls.
//!
//! The engine schedules every SHARE and DATA delivery with a seeded random
//! delay, injects crashes and message loss, lets coalition members misbehave,
//! and collects per-run observables. Identical inputs and seed give
//! bit-identical [`TrialMetrics`].

mod engine;
mod montecarlo;
mod oracle;
mod seeds;

pub use engine::{
    assign_votes, draw_roles_and_votes, run_poll, run_poll_prepared, run_poll_prepared_traced,
    run_poll_traced, TraceEvent,
};
pub use montecarlo::{bernoulli_three_sigma, mc_mean_ci, monte_carlo, Aggregate};
pub use oracle::{
    bruteforce_disclosure, sample_disclosure_model, sample_failure_model,
    worst_case_impact_certificate, worst_case_impact_search, DisclosureRates, DisclosureStrategy,
    WorstCaseSetup,
};
pub use seeds::{stream_rng, trial_seed};

/// Draw a sorted coalition of `size` distinct nodes out of `n`, seeded.
pub fn sample_coalition(n: usize, size: usize, seed: u64) -> Vec<NodeId> {
    use rand::seq::SliceRandom;
    let mut rng = stream_rng(seed, "coalition", 0);
    let mut ids: Vec<NodeId> = (0..n).collect();
    ids.shuffle(&mut rng);
    let mut picked = ids[..size.min(n)].to_vec();
    picked.sort_unstable();
    picked
}

use crate::graph::NodeId;
use crate::protocol::NodeCounters;

/// Protocol parameters of one poll.
#[derive(Debug, Clone)]
pub struct PollConfig {
    pub k: usize,
    pub m: usize,
    /// Population fractions per share count; `gamma[i]` chooses `2i+1`.
    pub gamma: Vec<f64>,
    /// Fraction of nodes voting +1 (rounded to a count).
    pub alpha: f64,
    /// Decide a source's value as soon as more than m/2 candidates agree.
    pub early_decide: bool,
    /// Refuse to run adversarial polls on graphs that fail the preceding-
    /// dishonest-neighbor safety check.
    pub require_pg3: bool,
}

impl PollConfig {
    pub fn new(k: usize, m: usize, gamma: Vec<f64>, alpha: f64) -> Self {
        PollConfig {
            k,
            m,
            gamma,
            alpha,
            early_decide: true,
            require_pg3: false,
        }
    }
}

/// When a crashed node dies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrashTiming {
    /// Uniformly within the sharing window or the broadcast window, with
    /// equal probability; exercises both mid-share and post-collection
    /// crashes.
    #[default]
    UniformWindow,
    /// Dead from the start (the analytical model of the failure recursion).
    AtStart,
}

/// Crash and message-loss injection plan.
#[derive(Debug, Clone, Default)]
pub struct FaultPlan {
    /// Per-node crash probability; crashed nodes never recover.
    pub crash_prob: f64,
    /// Per-message loss probability.
    pub loss_prob: f64,
    /// Whether coalition members are immune to crashes.
    pub exempt_dishonest: bool,
    pub crash_timing: CrashTiming,
    /// Nodes that crash regardless of `crash_prob` (for targeted drills).
    pub forced_crashes: Vec<NodeId>,
}

impl FaultPlan {
    pub fn none() -> Self {
        FaultPlan::default()
    }

    pub fn new(crash_prob: f64, loss_prob: f64) -> Self {
        FaultPlan {
            crash_prob,
            loss_prob,
            ..FaultPlan::default()
        }
    }
}

/// Reveal counts for one disclosure rule in one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DisclosureTally {
    pub revealed: u64,
    pub correct: u64,
    pub certain: u64,
}

/// Everything observable about one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    /// Ground-truth votes (after coalition vote policy).
    pub votes: Vec<i64>,
    /// Sum of all votes; what every node should output.
    pub truth: i64,
    /// Final result per node; `None` while any source is undecided.
    pub results: Vec<Option<i64>>,
    /// c_n: each node's collected share sum.
    pub collected: Vec<i64>,
    /// `h_n[s]`: the value node n decided for source s.
    pub decided_values: Vec<Vec<Option<i64>>>,
    /// Collected data plus decided values, holes counted as zero.
    pub partial_results: Vec<i64>,
    /// Sources each node never decided.
    pub missing: Vec<Vec<NodeId>>,
    /// |result - truth| per node with a complete result.
    pub impacts: Vec<Option<u64>>,
    /// Largest impact over honest nodes with complete results.
    pub max_impact_honest: u64,
    /// Whether every live node finished with a complete result.
    pub terminated: bool,
    pub counters: Vec<NodeCounters>,
    /// Peak storage cells per node (roles + neighbors + ids + candidates +
    /// decided values).
    pub storage_peak: Vec<u64>,
    pub certain_tally: DisclosureTally,
    pub greedy_tally: DisclosureTally,
    pub nongreedy_tally: DisclosureTally,
    pub combined_tally: DisclosureTally,
    pub detections: u64,
    /// (node, source) pairs whose candidate multiset had no majority.
    pub decision_failures: Vec<(NodeId, NodeId)>,
    pub crashed: Vec<NodeId>,
    pub messages_lost: u64,
    pub messages_to_crashed: u64,
    /// Arrival order of coalition share observations (diagnostic).
    pub observed_shares: u64,
}

impl TrialMetrics {
    /// Impact of the run measured only on honest nodes whose undecided
    /// sources (if any) are all crashed nodes, scoring holes as zero.
    /// Returns None if no node qualifies.
    pub fn impact_excluding_crashed(&self, dishonest: &[bool]) -> Option<u64> {
        let crashed = {
            let mut flags = vec![false; self.votes.len()];
            for &c in &self.crashed {
                flags[c] = true;
            }
            flags
        };
        let mut worst: Option<u64> = None;
        for node in 0..self.votes.len() {
            if dishonest.get(node).copied().unwrap_or(false) || crashed[node] {
                continue;
            }
            if !self.missing[node].iter().all(|&s| crashed[s]) {
                continue;
            }
            let impact = (self.partial_results[node] - self.truth).unsigned_abs();
            worst = Some(worst.map_or(impact, |w| w.max(impact)));
        }
        worst
    }
}
