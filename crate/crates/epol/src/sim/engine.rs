//! The event loop: seeded delays, crash/loss injection, coalition behavior.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::seeds::stream_rng;
use super::{DisclosureTally, FaultPlan, PollConfig, TrialMetrics};
use crate::adversary::{
    apply_corrupt_forward, apply_invert, apply_share_misbehavior, disclose_certain,
    disclose_combined, disclose_greedy, disclose_nongreedy, AdversaryModel, NodeTruth,
    ObservationLog, OvershareCount, TrueVotePolicy,
};
use crate::graph::{
    assign_roles_constrained, check_pg3, BroadcastCertificate, NodeId, RoleAssignment, SocialGraph,
};
use crate::protocol::{generate_shares, DataOutcome, NodeState, Vote};
use crate::sim::CrashTiming;
use crate::{Error, Result};

/// One simulated time unit in engine ticks.
const TICK: u64 = 1_000;
/// Share sends are staggered across this window.
const SHARE_WINDOW: u64 = 10 * TICK;
/// Message delays are uniform in [TICK, 10*TICK].
const MAX_DELAY: u64 = 10 * TICK;

#[derive(Debug, Clone, PartialEq, Eq)]
enum EventKind {
    Crash {
        node: NodeId,
    },
    SendShare {
        sender: NodeId,
        receiver: NodeId,
        payload: i64,
    },
    BroadcastOwn {
        node: NodeId,
    },
    Deliver {
        sender: NodeId,
        receiver: NodeId,
        source: NodeId,
        value: i64,
        share: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Event {
    time: u64,
    seq: u64,
    kind: EventKind,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// One line of the optional message trace.
#[derive(Debug, Clone)]
pub struct TraceEvent {
    pub time: u64,
    pub kind: &'static str,
    pub sender: NodeId,
    pub receiver: NodeId,
    pub source: Option<NodeId>,
    pub value: i64,
}

/// Draw ground-truth votes: an exact `round(alpha * N)` count of +1 votes
/// assigned by seeded shuffle, then coalition overrides per policy.
pub fn assign_votes(
    n: usize,
    alpha: f64,
    dishonest: &[bool],
    policy: TrueVotePolicy,
    rng: &mut ChaCha12Rng,
) -> Vec<Vote> {
    let plus = (alpha * n as f64).round() as usize;
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let mut votes = vec![Vote::Minus; n];
    for &id in ids.iter().take(plus) {
        votes[id] = Vote::Plus;
    }
    for node in 0..n {
        if dishonest.get(node).copied().unwrap_or(false) {
            match policy {
                TrueVotePolicy::AlwaysPlus => votes[node] = Vote::Plus,
                TrueVotePolicy::AlwaysMinus => votes[node] = Vote::Minus,
                TrueVotePolicy::FollowAlpha => {}
            }
        }
    }
    votes
}

/// Run one poll end to end, drawing roles and votes from the seed.
pub fn run_poll(
    graph: &SocialGraph,
    cert: &BroadcastCertificate,
    config: &PollConfig,
    adversary: &AdversaryModel,
    faults: &FaultPlan,
    seed: u64,
) -> Result<TrialMetrics> {
    let (roles, votes) = draw_roles_and_votes(graph, config, adversary, seed)?;
    run_poll_prepared(graph, cert, &roles, &votes, config, adversary, faults, seed)
}

/// Draw the role assignment and ground-truth votes for one trial, honoring
/// the coalition's assignment-time constraints (forced 2k+1 share counts for
/// full oversharing, no coalition-internal consumer links).
pub fn draw_roles_and_votes(
    graph: &SocialGraph,
    config: &PollConfig,
    adversary: &AdversaryModel,
    seed: u64,
) -> Result<(RoleAssignment, Vec<Vote>)> {
    let n = graph.node_count();
    if !graph.satisfies_degree_floor(config.k) {
        return Err(Error::InvalidGraph(format!(
            "min degree {} below 2k+1 = {}",
            graph.min_degree(),
            2 * config.k + 1
        )));
    }
    let dishonest = adversary.membership(n);
    let forced: Vec<Option<usize>> =
        if adversary.overshare && adversary.overshare_count == OvershareCount::Full {
            dishonest
                .iter()
                .map(|&d| if d { Some(config.k) } else { None })
                .collect()
        } else {
            Vec::new()
        };
    let avoid: Vec<bool> = if adversary.avoid_dishonest_producers && adversary.size() > 0 {
        dishonest.clone()
    } else {
        Vec::new()
    };
    let mut roles_rng = stream_rng(seed, "roles", 0);
    let roles = assign_roles_constrained(
        graph,
        config.k,
        &config.gamma,
        &forced,
        &avoid,
        &mut roles_rng,
    )?;
    let mut votes_rng = stream_rng(seed, "votes", 0);
    let votes = assign_votes(
        n,
        config.alpha,
        &dishonest,
        adversary.true_vote,
        &mut votes_rng,
    );
    Ok((roles, votes))
}

/// Run one poll with an explicit role assignment and vote vector.
#[allow(clippy::too_many_arguments)]
pub fn run_poll_prepared(
    graph: &SocialGraph,
    cert: &BroadcastCertificate,
    roles: &RoleAssignment,
    votes: &[Vote],
    config: &PollConfig,
    adversary: &AdversaryModel,
    faults: &FaultPlan,
    seed: u64,
) -> Result<TrialMetrics> {
    let mut engine = Engine::new(graph, cert, roles, votes, config, adversary, faults, seed)?;
    engine.run();
    Ok(engine.finish())
}

/// [`run_poll_prepared`] with a message trace.
#[allow(clippy::too_many_arguments)]
pub fn run_poll_prepared_traced(
    graph: &SocialGraph,
    cert: &BroadcastCertificate,
    roles: &RoleAssignment,
    votes: &[Vote],
    config: &PollConfig,
    adversary: &AdversaryModel,
    faults: &FaultPlan,
    seed: u64,
) -> Result<(TrialMetrics, Vec<TraceEvent>)> {
    let mut engine = Engine::new(graph, cert, roles, votes, config, adversary, faults, seed)?;
    engine.trace = Some(Vec::new());
    engine.run();
    let trace = engine.trace.take().unwrap_or_default();
    Ok((engine.finish(), trace))
}

/// [`run_poll`], additionally returning every message send as a trace line.
pub fn run_poll_traced(
    graph: &SocialGraph,
    cert: &BroadcastCertificate,
    config: &PollConfig,
    adversary: &AdversaryModel,
    faults: &FaultPlan,
    seed: u64,
) -> Result<(TrialMetrics, Vec<TraceEvent>)> {
    let (roles, votes) = draw_roles_and_votes(graph, config, adversary, seed)?;
    let mut engine = Engine::new(graph, cert, &roles, &votes, config, adversary, faults, seed)?;
    engine.trace = Some(Vec::new());
    engine.run();
    let trace = engine.trace.take().unwrap_or_default();
    Ok((engine.finish(), trace))
}

struct Engine<'a> {
    graph: &'a SocialGraph,
    cert: &'a BroadcastCertificate,
    roles: &'a RoleAssignment,
    config: &'a PollConfig,
    adversary: &'a AdversaryModel,
    dishonest: Vec<bool>,
    votes: Vec<Vote>,
    nodes: Vec<NodeState>,
    crashed_at: Vec<Option<u64>>,
    broadcast_done: Vec<bool>,
    queue: BinaryHeap<Reverse<Event>>,
    seq: u64,
    delay_rng: ChaCha12Rng,
    loss_rng: ChaCha12Rng,
    loss: f64,
    observations: ObservationLog,
    arrivals: u64,
    messages_lost: u64,
    messages_to_crashed: u64,
    pub trace: Option<Vec<TraceEvent>>,
}

impl<'a> Engine<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        graph: &'a SocialGraph,
        cert: &'a BroadcastCertificate,
        roles: &'a RoleAssignment,
        votes: &'a [Vote],
        config: &'a PollConfig,
        adversary: &'a AdversaryModel,
        faults: &'a FaultPlan,
        seed: u64,
    ) -> Result<Self> {
        let n = graph.node_count();
        if cert.m() != config.m {
            return Err(Error::InvalidParameter(format!(
                "certificate is for m = {}, config says {}",
                cert.m(),
                config.m
            )));
        }
        if roles.node_count() != n || votes.len() != n {
            return Err(Error::InvalidParameter(
                "roles/votes sized differently than graph".into(),
            ));
        }
        let dishonest = adversary.membership(n);
        if config.require_pg3
            && adversary.size() > 0
            && !check_pg3(graph, config.m, &adversary.coalition, cert.orderings())
        {
            return Err(Error::InvalidGraph(
                "coalition violates the preceding-dishonest-neighbor limit".into(),
            ));
        }

        let mut nodes = Vec::with_capacity(n);
        for id in 0..n {
            nodes.push(NodeState::new(
                id,
                n,
                votes[id],
                roles.share_index(id),
                roles.producers(id).len(),
            ));
        }

        let mut engine = Engine {
            graph,
            cert,
            roles,
            config,
            adversary,
            dishonest,
            votes: votes.to_vec(),
            nodes,
            crashed_at: vec![None; n],
            broadcast_done: vec![false; n],
            queue: BinaryHeap::new(),
            seq: 0,
            delay_rng: stream_rng(seed, "delays", 0),
            loss_rng: stream_rng(seed, "loss", 0),
            loss: faults.loss_prob,
            observations: ObservationLog::default(),
            arrivals: 0,
            messages_lost: 0,
            messages_to_crashed: 0,
            trace: None,
        };
        engine.schedule_crashes(faults, seed);
        engine.schedule_sharing(seed)?;
        Ok(engine)
    }

    fn schedule_crashes(&mut self, faults: &FaultPlan, seed: u64) {
        let mut rng = stream_rng(seed, "faults", 0);
        let n = self.graph.node_count();
        let horizon_broadcast = {
            let depth = self.graph.diameter().unwrap_or(n) as u64 + 1;
            2 * SHARE_WINDOW + depth * (MAX_DELAY + TICK)
        };
        for node in 0..n {
            let forced = faults.forced_crashes.contains(&node);
            let immune = faults.exempt_dishonest && self.dishonest[node];
            let random = !immune && rng.gen::<f64>() < faults.crash_prob;
            if !(forced || random) {
                continue;
            }
            let time = match faults.crash_timing {
                CrashTiming::AtStart => 0,
                CrashTiming::UniformWindow => {
                    if rng.gen::<bool>() {
                        rng.gen_range(0..2 * SHARE_WINDOW)
                    } else {
                        rng.gen_range(2 * SHARE_WINDOW..horizon_broadcast)
                    }
                }
            };
            self.push(time, EventKind::Crash { node });
        }
    }

    fn schedule_sharing(&mut self, seed: u64) -> Result<()> {
        let mut share_rng = stream_rng(seed, "shares", 0);
        for node in 0..self.graph.node_count() {
            let consumers = self.roles.consumers(node);
            let shares = if self.dishonest[node] && self.adversary.overshare {
                apply_share_misbehavior(consumers.len())
            } else {
                generate_shares(
                    self.votes[node],
                    self.roles.share_index(node),
                    self.config.k,
                    &mut share_rng,
                )?
            };
            debug_assert_eq!(shares.len(), consumers.len());
            for (j, &consumer) in consumers.iter().enumerate() {
                let at = self.delay_rng.gen_range(0..SHARE_WINDOW);
                self.push(
                    at,
                    EventKind::SendShare {
                        sender: node,
                        receiver: consumer,
                        payload: shares.as_slice()[j],
                    },
                );
            }
            if self.roles.producers(node).is_empty() {
                // nothing to wait for; broadcast once the send window closes
                self.push(SHARE_WINDOW, EventKind::BroadcastOwn { node });
            }
        }
        Ok(())
    }

    fn push(&mut self, time: u64, kind: EventKind) {
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Reverse(Event { time, seq, kind }));
    }

    fn alive(&self, node: NodeId, at: u64) -> bool {
        match self.crashed_at[node] {
            Some(t) => at < t,
            None => true,
        }
    }

    fn send(
        &mut self,
        now: u64,
        sender: NodeId,
        receiver: NodeId,
        source: NodeId,
        value: i64,
        share: bool,
    ) {
        if self.loss_rng.gen::<f64>() < self.loss {
            self.messages_lost += 1;
            return;
        }
        let delay = self.delay_rng.gen_range(TICK..=MAX_DELAY);
        self.push(
            now + delay,
            EventKind::Deliver {
                sender,
                receiver,
                source,
                value,
                share,
            },
        );
    }

    fn run(&mut self) {
        while let Some(Reverse(event)) = self.queue.pop() {
            let now = event.time;
            match event.kind {
                EventKind::Crash { node } => {
                    if self.crashed_at[node].is_none() {
                        self.crashed_at[node] = Some(now);
                    }
                }
                EventKind::SendShare {
                    sender,
                    receiver,
                    payload,
                } => {
                    if !self.alive(sender, now) {
                        continue; // died before this share went out
                    }
                    self.nodes[sender].counters.shares_sent += 1;
                    self.trace_push(now, "SHARE", sender, receiver, None, payload);
                    self.send(now, sender, receiver, sender, payload, true);
                }
                EventKind::BroadcastOwn { node } => self.broadcast_own(now, node),
                EventKind::Deliver {
                    sender,
                    receiver,
                    source,
                    value,
                    share,
                } => {
                    if !self.alive(receiver, now) {
                        self.messages_to_crashed += 1;
                        continue;
                    }
                    if share {
                        self.deliver_share(now, sender, receiver, value);
                    } else {
                        self.deliver_data(now, sender, receiver, source, value);
                    }
                }
            }
        }
    }

    fn deliver_share(&mut self, now: u64, sender: NodeId, receiver: NodeId, payload: i64) {
        if self.dishonest[receiver] && !self.dishonest[sender] {
            self.arrivals += 1;
            self.observations.record(sender, payload, self.arrivals);
        }
        let payload = if self.dishonest[receiver] && self.adversary.invert {
            apply_invert(payload)
        } else {
            payload
        };
        let accepted =
            self.nodes[receiver].on_share(sender, payload, self.roles.producers(receiver));
        if accepted && self.nodes[receiver].sharing_complete() && !self.broadcast_done[receiver] {
            self.broadcast_own(now, receiver);
        }
    }

    fn broadcast_own(&mut self, now: u64, node: NodeId) {
        if self.broadcast_done[node]
            || !self.alive(node, now)
            || !self.nodes[node].sharing_complete()
        {
            return;
        }
        self.broadcast_done[node] = true;
        let value = self.nodes[node].collected();
        for idx in 0..self.graph.neighbors(node).len() {
            let neighbor = self.graph.neighbors(node)[idx];
            self.nodes[node].counters.data_broadcast_sent += 1;
            self.trace_push(now, "DATA", node, neighbor, Some(node), value);
            self.send(now, node, neighbor, node, value, false);
        }
    }

    fn deliver_data(
        &mut self,
        now: u64,
        sender: NodeId,
        receiver: NodeId,
        source: NodeId,
        value: i64,
    ) {
        let ordering = self.cert.for_source(source);
        let outcome = self.nodes[receiver].on_data(
            self.graph,
            ordering,
            sender,
            source,
            value,
            self.config.k,
            self.config.early_decide,
        );
        if let DataOutcome::DecidedAndForward(decided) = outcome {
            let relayed = if self.dishonest[receiver] && self.adversary.corrupt_forward {
                apply_corrupt_forward(self.config.k, self.adversary.out_of_range)
            } else {
                decided
            };
            // skip successors that neighbor the source: they only accept the
            // direct message, so a relayed copy is dead weight
            let targets: Vec<NodeId> = ordering
                .succeeding(self.graph, receiver)
                .filter(|&u| !self.graph.has_edge(source, u))
                .collect();
            for u in targets {
                self.nodes[receiver].counters.forwards_sent += 1;
                self.trace_push(now, "DATA", receiver, u, Some(source), relayed);
                self.send(now, receiver, u, source, relayed, false);
            }
        }
    }

    fn trace_push(
        &mut self,
        time: u64,
        kind: &'static str,
        sender: NodeId,
        receiver: NodeId,
        source: Option<NodeId>,
        value: i64,
    ) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEvent {
                time,
                kind,
                sender,
                receiver,
                source,
                value,
            });
        }
    }

    fn finish(self) -> TrialMetrics {
        let n = self.graph.node_count();
        let truth: i64 = self.votes.iter().map(|v| v.value()).sum();
        let mut results = Vec::with_capacity(n);
        let mut collected = Vec::with_capacity(n);
        let mut decided_values = Vec::with_capacity(n);
        let mut partial_results = Vec::with_capacity(n);
        let mut missing = Vec::with_capacity(n);
        let mut impacts = Vec::with_capacity(n);
        let mut storage_peak = Vec::with_capacity(n);
        let mut decision_failures = Vec::new();
        let mut detections = 0;
        let mut max_impact_honest = 0u64;
        for (id, node) in self.nodes.iter().enumerate() {
            let result = node.aggregate().ok();
            let partial = node.partial_aggregate();
            let miss = node.missing_sources();
            let impact = result.map(|r| (r - truth).unsigned_abs());
            if let Some(i) = impact {
                if !self.dishonest[id] {
                    max_impact_honest = max_impact_honest.max(i);
                }
            }
            detections += node.counters.detections;
            for s in 0..n {
                if node.decision_failed(s) {
                    decision_failures.push((id, s));
                }
            }
            let roles_cells =
                (self.roles.consumers(id).len() + self.roles.producers(id).len()) as u64;
            storage_peak.push(
                roles_cells
                    + self.graph.degree(id) as u64
                    + n as u64
                    + node.counters.candidate_cells_peak
                    + (n as u64 - 1),
            );
            collected.push(node.collected());
            decided_values.push((0..n).map(|s| node.decided_value(s)).collect());
            results.push(result);
            partial_results.push(partial);
            missing.push(miss);
            impacts.push(impact);
        }
        let crashed: Vec<NodeId> = (0..n).filter(|&v| self.crashed_at[v].is_some()).collect();
        let terminated = (0..n).all(|v| self.crashed_at[v].is_some() || results[v].is_some());

        let truths: Vec<NodeTruth> = (0..n)
            .filter(|&v| !self.dishonest[v])
            .map(|v| NodeTruth {
                node: v,
                vote: self.votes[v],
                share_index: self.roles.share_index(v),
            })
            .collect();
        let k = self.config.k;
        let tally = |r: &crate::adversary::DisclosureResult| DisclosureTally {
            revealed: r.revealed() as u64,
            correct: r.correct() as u64,
            certain: r.certain() as u64,
        };
        let certain = disclose_certain(
            &self.observations,
            &truths,
            k,
            self.adversary.knows_share_count,
        );
        let greedy = disclose_greedy(&self.observations, &truths, self.adversary.rho);
        let nongreedy = disclose_nongreedy(&self.observations, &truths);
        let combined = disclose_combined(&self.observations, &truths, k, self.adversary.rho);

        TrialMetrics {
            votes: self.votes.iter().map(|v| v.value()).collect(),
            truth,
            results,
            collected,
            decided_values,
            partial_results,
            missing,
            impacts,
            max_impact_honest,
            terminated,
            counters: self.nodes.iter().map(|s| s.counters).collect(),
            storage_peak,
            certain_tally: tally(&certain),
            greedy_tally: tally(&greedy),
            nongreedy_tally: tally(&nongreedy),
            combined_tally: tally(&combined),
            detections,
            decision_failures,
            crashed,
            messages_lost: self.messages_lost,
            messages_to_crashed: self.messages_to_crashed,
            observed_shares: self.observations.len() as u64,
        }
    }
}
