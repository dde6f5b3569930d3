//! Independent oracles: exhaustive enumeration of the idealized disclosure
//! model, Monte Carlo samplers for the disclosure and fault models, and the
//! worst-case impact construction.
//!
//! The idealized disclosure model behind the closed forms: a voter picks
//! `2i+1` distinct consumers uniformly from a population of `N` slots of
//! which `D` are coalition-held, shares are assigned by uniform permutation,
//! and observed shares arrive in uniform random order.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::engine::run_poll_prepared;
use super::seeds::stream_rng;
use super::{FaultPlan, PollConfig, TrialMetrics};
use crate::adversary::{
    disclose_certain, disclose_combined, disclose_greedy, disclose_nongreedy, AdversaryModel,
    NodeTruth, ObservationLog, OvershareCount, TrueVotePolicy,
};
use crate::analysis::{binomial, Probability};
use crate::graph::{check_m_broadcasting, BroadcastCertificate, RoleAssignment, SocialGraph};
use crate::protocol::Vote;
use crate::{Error, Result};

/// Which disclosure rule the brute-force enumeration scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisclosureStrategy {
    /// Conclusive identification; `knows_share_count` decides whether `i+1`
    /// identical copies suffice or `k+1` are needed.
    Certain { knows_share_count: bool },
    /// Verdict on the first value reaching `rho+1` observed copies.
    Greedy { rho: usize },
    /// Majority of all observed shares.
    NonGreedy,
    /// Certainty first, greedy second, majority last.
    Combined { rho: usize },
}

/// Exact probability that the strategy reveals a node's vote *correctly*,
/// by enumerating every consumer subset, share permutation and (when order
/// matters) arrival order of the observed shares.
///
/// Feasibility limits: `n <= 12`, `d <= 4`, `k <= 2`.
pub fn bruteforce_disclosure(
    n: usize,
    d: usize,
    k: usize,
    gamma: &[BigRational],
    strategy: DisclosureStrategy,
) -> Result<Probability> {
    if n > 12 || d > 4 || k > 2 {
        return Err(Error::EnumerationLimits(format!(
            "need n <= 12, d <= 4, k <= 2; got n={n}, d={d}, k={k}"
        )));
    }
    if gamma.len() != k + 1 {
        return Err(Error::InvalidParameter(format!(
            "gamma has {} entries, expected {}",
            gamma.len(),
            k + 1
        )));
    }
    if d > n {
        return Err(Error::InvalidParameter(
            "coalition exceeds population".into(),
        ));
    }
    let mut total = BigRational::zero();
    for (i, weight) in gamma.iter().enumerate() {
        if weight.is_zero() {
            continue;
        }
        if 2 * i + 1 > n {
            return Err(Error::InvalidParameter(format!(
                "class {i} needs {} consumers out of {n}",
                2 * i + 1
            )));
        }
        total += weight * class_probability(n, d, k, i, strategy);
    }
    Probability::new(total)
}

/// Correct-reveal probability for the class sending `2i+1` shares.
fn class_probability(
    n: usize,
    d: usize,
    k: usize,
    i: usize,
    strategy: DisclosureStrategy,
) -> BigRational {
    let count = 2 * i + 1;
    let subsets = enumerate_subsets(n, count);
    let assignments = enumerate_subsets(count, i + 1); // which slots carry the vote
    let subset_weight = BigRational::new(BigInt::one(), binomial(n, count));
    let assign_weight = BigRational::new(BigInt::one(), binomial(count, i + 1));
    let mut total = BigRational::zero();
    for subset in &subsets {
        for assignment in &assignments {
            let mut vote_observed = 0usize;
            let mut opp_observed = 0usize;
            for (slot, &consumer) in subset.iter().enumerate() {
                if consumer < d {
                    if assignment.contains(&slot) {
                        vote_observed += 1;
                    } else {
                        opp_observed += 1;
                    }
                }
            }
            let p_correct = correct_probability(strategy, k, i, vote_observed, opp_observed);
            total += &subset_weight * &assign_weight * p_correct;
        }
    }
    total
}

/// Probability the strategy issues a verdict equal to the vote, given the
/// coalition observed `x` copies of the vote and `y` of its opposite
/// (averaging over the uniformly random arrival order where it matters).
fn correct_probability(
    strategy: DisclosureStrategy,
    k: usize,
    i: usize,
    x: usize,
    y: usize,
) -> BigRational {
    match strategy {
        DisclosureStrategy::Certain { knows_share_count } => {
            let threshold = if knows_share_count { i + 1 } else { k + 1 };
            indicator(x >= threshold)
        }
        DisclosureStrategy::Greedy { rho } => race_win_probability(x, y, rho),
        DisclosureStrategy::NonGreedy => indicator(x > y),
        DisclosureStrategy::Combined { rho } => {
            if x >= k + 1 {
                return BigRational::one();
            }
            // no certainty available: greedy's verdict stands wherever the
            // race triggers; otherwise fall back to the majority
            let fired = race_fired_probability(x, y, rho);
            let win = race_win_probability(x, y, rho);
            let majority = indicator(x > y);
            win + (BigRational::one() - fired) * majority
        }
    }
}

fn indicator(cond: bool) -> BigRational {
    if cond {
        BigRational::one()
    } else {
        BigRational::zero()
    }
}

/// P[the vote reaches rho+1 observed copies before its opposite does], over
/// uniformly random arrival orders of x vote copies and y opposite copies.
fn race_win_probability(x: usize, y: usize, rho: usize) -> BigRational {
    if x < rho + 1 {
        return BigRational::zero();
    }
    if y < rho + 1 {
        return BigRational::one();
    }
    let total = binomial(x + y, x);
    let mut wins = BigInt::zero();
    // arrangements as bitmasks: bit set = a vote copy at that position
    for mask in 0u32..(1 << (x + y)) {
        if mask.count_ones() as usize != x {
            continue;
        }
        let (mut seen_v, mut seen_o) = (0usize, 0usize);
        for pos in 0..(x + y) {
            if mask >> pos & 1 == 1 {
                seen_v += 1;
                if seen_v == rho + 1 {
                    wins += 1;
                    break;
                }
            } else {
                seen_o += 1;
                if seen_o == rho + 1 {
                    break;
                }
            }
        }
    }
    BigRational::new(wins, total)
}

/// P[either value reaches rho+1 observed copies].
fn race_fired_probability(x: usize, y: usize, rho: usize) -> BigRational {
    indicator(x >= rho + 1 || y >= rho + 1)
}

/// All `size`-subsets of `0..n`, each sorted ascending.
fn enumerate_subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn recurse(
        n: usize,
        size: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for v in start..n {
            if n - v < size - current.len() {
                break;
            }
            current.push(v);
            recurse(n, size, v + 1, current, out);
            current.pop();
        }
    }
    recurse(n, size, 0, &mut current, &mut out);
    out
}

/// Empirical disclosure rates from sampling the idealized model.
#[derive(Debug, Clone, Copy, Default)]
pub struct DisclosureRates {
    pub trials: u64,
    /// Honest targets scored per trial.
    pub targets: u64,
    pub certain_correct: f64,
    pub greedy_correct: f64,
    pub nongreedy_correct: f64,
    pub combined_correct: f64,
    /// Largest per-trial certain-reveal count seen.
    pub max_certain_in_a_trial: u64,
    /// Trials whose certain-reveal count exceeded 2D.
    pub reveal_budget_violations: u64,
}

/// Sample the idealized disclosure model: per trial, `n - d` honest voters
/// each pick `2i+1` consumers uniformly from `n` slots (`d` coalition-held),
/// with votes split exactly in half so honest votes are never unanimous.
#[allow(clippy::too_many_arguments)]
pub fn sample_disclosure_model(
    n: usize,
    d: usize,
    k: usize,
    gamma: &[f64],
    rho: usize,
    knows_share_count: bool,
    trials: u64,
    seed: u64,
) -> Result<DisclosureRates> {
    if gamma.len() != k + 1 {
        return Err(Error::InvalidParameter("gamma length must be k+1".into()));
    }
    if d > n {
        return Err(Error::InvalidParameter(
            "coalition exceeds population".into(),
        ));
    }
    let targets = n - d;
    let mut rates = DisclosureRates {
        trials,
        targets: targets as u64,
        ..DisclosureRates::default()
    };
    let mut certain_hits = 0u64;
    let mut greedy_hits = 0u64;
    let mut nongreedy_hits = 0u64;
    let mut combined_hits = 0u64;
    for trial in 0..trials {
        let mut rng = stream_rng(seed, "disclosure-model", trial);
        let mut log = ObservationLog::default();
        let mut truths = Vec::with_capacity(targets);
        let mut arrival = 0u64;
        for target in 0..targets {
            let vote = if target % 2 == 0 {
                Vote::Plus
            } else {
                Vote::Minus
            };
            let i = sample_index(gamma, &mut rng);
            truths.push(NodeTruth {
                node: target,
                vote,
                share_index: i,
            });
            // 2i+1 distinct consumer slots out of n
            let consumers = sample_distinct(n, 2 * i + 1, &mut rng);
            let mut shares = vec![vote.value(); i + 1];
            shares.extend(std::iter::repeat(-vote.value()).take(i));
            shares.shuffle(&mut rng);
            let mut observed: Vec<i64> = consumers
                .iter()
                .zip(&shares)
                .filter(|&(&c, _)| c < d)
                .map(|(_, &s)| s)
                .collect();
            observed.shuffle(&mut rng);
            for s in observed {
                log.record(target, s, arrival);
                arrival += 1;
            }
        }
        let certain = disclose_certain(&log, &truths, k, knows_share_count);
        let greedy = disclose_greedy(&log, &truths, rho);
        let nongreedy = disclose_nongreedy(&log, &truths);
        let combined = disclose_combined(&log, &truths, k, rho);
        certain_hits += certain.correct() as u64;
        greedy_hits += greedy.correct() as u64;
        nongreedy_hits += nongreedy.correct() as u64;
        combined_hits += combined.correct() as u64;
        let certain_count = certain.certain() as u64;
        rates.max_certain_in_a_trial = rates.max_certain_in_a_trial.max(certain_count);
        if certain_count > 2 * d as u64 {
            rates.reveal_budget_violations += 1;
        }
    }
    let scale = (trials * targets as u64) as f64;
    rates.certain_correct = certain_hits as f64 / scale;
    rates.greedy_correct = greedy_hits as f64 / scale;
    rates.nongreedy_correct = nongreedy_hits as f64 / scale;
    rates.combined_correct = combined_hits as f64 / scale;
    Ok(rates)
}

fn sample_index(gamma: &[f64], rng: &mut ChaCha12Rng) -> usize {
    let x: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &g) in gamma.iter().enumerate() {
        acc += g;
        if x < acc {
            return i;
        }
    }
    gamma.len() - 1
}

fn sample_distinct(n: usize, count: usize, rng: &mut ChaCha12Rng) -> Vec<usize> {
    debug_assert!(count <= n);
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let v = rng.gen_range(0..n);
        if !picked.contains(&v) {
            picked.push(v);
        }
    }
    picked
}

/// Monte Carlo of the crash/loss fault model itself: every appearance of an
/// upstream failure event is an independent copy, exactly the independence
/// the analytical recursion assumes. Returns the empirical fail-to-decide
/// frequency per node.
pub fn sample_failure_model(
    graph: &SocialGraph,
    ordering: &crate::graph::SourceOrdering,
    r: f64,
    l: f64,
    source_producers: usize,
    trials: u64,
    seed: u64,
) -> Vec<f64> {
    let n = graph.node_count();
    let mut fails = vec![0u64; n];
    for trial in 0..trials {
        let mut rng = stream_rng(seed, "failure-model", trial);
        for node in 0..n {
            if sample_fail_decide(graph, ordering, r, l, source_producers, node, &mut rng) {
                fails[node] += 1;
            }
        }
    }
    fails
        .into_iter()
        .map(|f| f as f64 / trials as f64)
        .collect()
}

fn sample_fail_decide(
    graph: &SocialGraph,
    ordering: &crate::graph::SourceOrdering,
    r: f64,
    l: f64,
    source_producers: usize,
    node: usize,
    rng: &mut ChaCha12Rng,
) -> bool {
    let s = ordering.source();
    if node == s {
        // any producer share missing: producer crashed or message lost
        let q = r + (1.0 - r) * l;
        return (0..source_producers).any(|_| rng.gen::<f64>() < q);
    }
    if graph.has_edge(s, node) {
        return sample_fail_forward(graph, ordering, r, l, source_producers, s, rng);
    }
    let mut successes = 0usize;
    for &u in ordering.preceding(node) {
        if !sample_fail_forward(graph, ordering, r, l, source_producers, u, rng) {
            successes += 1;
        }
    }
    successes < ordering.m()
}

fn sample_fail_forward(
    graph: &SocialGraph,
    ordering: &crate::graph::SourceOrdering,
    r: f64,
    l: f64,
    source_producers: usize,
    node: usize,
    rng: &mut ChaCha12Rng,
) -> bool {
    if rng.gen::<f64>() < r {
        return true;
    }
    if sample_fail_decide(graph, ordering, r, l, source_producers, node, rng) {
        return true;
    }
    rng.gen::<f64>() < l
}

/// A crafted instance on which the coalition achieves the maximum impact
/// exactly.
#[derive(Debug, Clone)]
pub struct WorstCaseSetup {
    pub graph: SocialGraph,
    pub cert: BroadcastCertificate,
    pub roles: RoleAssignment,
    pub votes: Vec<Vote>,
    pub adversary: AdversaryModel,
    pub config: PollConfig,
    pub expected_impact: u64,
}

impl WorstCaseSetup {
    /// Run the instance; every honest node's impact equals the bound.
    pub fn run(&self, seed: u64) -> Result<TrialMetrics> {
        run_poll_prepared(
            &self.graph,
            &self.cert,
            &self.roles,
            &self.votes,
            &self.config,
            &self.adversary,
            &FaultPlan::none(),
            seed,
        )
    }
}

/// Build a clique instance where `d` coalition members each achieve the full
/// per-node worst case: every member has `2k+1` honest producers that each
/// vote +1 with a single share (so its inversion flips `2k+1` real +1s), and
/// it overshares `2k+1` copies of -1 while its own true vote is +1.
pub fn worst_case_impact_certificate(k: usize, d: usize) -> Result<WorstCaseSetup> {
    if d == 0 {
        return Err(Error::InvalidParameter(
            "need at least one dishonest node".into(),
        ));
    }
    let helpers_per = 2 * k + 1;
    let (n, coalition, consumers) = if k == 0 {
        // one big consumer cycle: helper_j = 2j feeds x_j = 2j+1
        let n = 2 * d + 2;
        let coalition: Vec<usize> = (0..d).map(|j| 2 * j + 1).collect();
        let consumers = (0..n).map(|v| vec![(v + 1) % n]).collect::<Vec<_>>();
        (n, coalition, consumers)
    } else {
        let fillers = d * helpers_per;
        let n = d + d * helpers_per + fillers;
        let helper_base = d;
        let filler_base = d + d * helpers_per;
        let mut consumers = vec![Vec::new(); n];
        for x in 0..d {
            // coalition member x: 2k+1 consumers among its dedicated fillers
            consumers[x] = (0..helpers_per)
                .map(|t| filler_base + x * helpers_per + t)
                .collect();
            for t in 0..helpers_per {
                consumers[helper_base + x * helpers_per + t] = vec![x];
            }
        }
        for f in 0..fillers {
            consumers[filler_base + f] = vec![filler_base + (f + 1) % fillers];
        }
        (n, (0..d).collect(), consumers)
    };
    let mut graph = SocialGraph::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            graph.add_edge(u, v)?;
        }
    }
    let cert = match check_m_broadcasting(&graph, 1) {
        crate::graph::BroadcastCheck::Ok(cert) => cert,
        _ => unreachable!("cliques certify m = 1"),
    };
    let roles = RoleAssignment::from_consumers(&graph, k, consumers)?;
    let votes = vec![Vote::Plus; n];
    let mut adversary = AdversaryModel::worst_case(coalition);
    adversary.overshare_count = OvershareCount::Full;
    adversary.true_vote = TrueVotePolicy::AlwaysPlus;
    let mut config = PollConfig::new(k, 1, unit_gamma(k), 1.0);
    config.early_decide = false;
    Ok(WorstCaseSetup {
        graph,
        cert,
        roles,
        votes,
        adversary,
        config,
        expected_impact: (6 * k as u64 + 4) * d as u64,
    })
}

fn unit_gamma(k: usize) -> Vec<f64> {
    let mut g = vec![0.0; k + 1];
    g[k] = 1.0;
    g
}

/// Randomized search for the worst coalition impact on a given graph: random
/// coalition placements, role assignments and seeds; returns the largest
/// impact observed on an honest node.
pub fn worst_case_impact_search(
    graph: &SocialGraph,
    cert: &BroadcastCertificate,
    k: usize,
    d: usize,
    attempts: u64,
    seed: u64,
) -> Result<u64> {
    let n = graph.node_count();
    if d >= n {
        return Err(Error::InvalidParameter(
            "coalition must leave honest nodes".into(),
        ));
    }
    let mut worst = 0u64;
    for attempt in 0..attempts {
        let mut rng = stream_rng(seed, "impact-search", attempt);
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut rng);
        let coalition: Vec<usize> = {
            let mut c = ids[..d].to_vec();
            c.sort_unstable();
            c
        };
        let mut adversary = AdversaryModel::worst_case(coalition);
        adversary.true_vote = TrueVotePolicy::AlwaysPlus;
        adversary.corrupt_forward = false;
        let config = PollConfig::new(k, cert.m(), unit_gamma(k), 1.0);
        let trial_seed: u64 = rng.gen();
        match super::engine::run_poll(
            graph,
            cert,
            &config,
            &adversary,
            &FaultPlan::none(),
            trial_seed,
        ) {
            Ok(metrics) => worst = worst.max(metrics.max_impact_honest),
            Err(Error::InvalidGraph(_)) | Err(Error::AssignmentInfeasible { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}
