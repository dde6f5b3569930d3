//! Dishonest-coalition behavior and vote-disclosure rules.
//!
//! Coalition members stay *undetectable*: they never emit anything an honest
//! node could flag (unless the out-of-range probe is explicitly enabled).
//! Their levers are: oversharing (emitting identical -1 shares), inverting
//! received +1 shares before summing, and rewriting forwarded collected data
//! within the legal range. For privacy they pool every share delivered to a
//! coalition consumer and try to reconstruct votes from it.

use crate::graph::NodeId;
use crate::protocol::{ShareVector, Vote};

/// How a coalition member's recorded "true" vote is chosen. The impact
/// analysis measures distortion against these ground-truth votes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrueVotePolicy {
    /// Worst case for accuracy: a +1 voter flipping everything to -1.
    #[default]
    AlwaysPlus,
    /// The disclosure chapters' convention.
    AlwaysMinus,
    /// Drawn from the same alpha split as honest nodes.
    FollowAlpha,
}

/// How many identical shares an oversharing node emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OvershareCount {
    /// Always the maximum 2k+1 (worst case for a single run).
    #[default]
    Full,
    /// Draw i from gamma like honest nodes (the average-impact setting).
    GammaDrawn,
}

/// Coalition membership plus misbehavior and disclosure configuration.
#[derive(Debug, Clone)]
pub struct AdversaryModel {
    /// Sorted ids of dishonest nodes.
    pub coalition: Vec<NodeId>,
    /// Send identical -1 shares instead of an honest share vector.
    pub overshare: bool,
    pub overshare_count: OvershareCount,
    /// Flip received +1 shares to -1 before summing.
    pub invert: bool,
    /// Rewrite forwarded collected data (stays within range).
    pub corrupt_forward: bool,
    /// Emit an out-of-range value instead, to exercise detection.
    pub out_of_range: bool,
    /// Greedy disclosure trigger: verdict after rho+1 identical shares.
    pub rho: usize,
    /// Whether certain disclosure may assume the per-node share count is
    /// known to the coalition.
    pub knows_share_count: bool,
    pub true_vote: TrueVotePolicy,
    /// Keep coalition members out of each other's consumer sets so no
    /// inversion is wasted on shares that are already -1.
    pub avoid_dishonest_producers: bool,
}

impl AdversaryModel {
    /// No adversary at all.
    pub fn honest() -> Self {
        AdversaryModel {
            coalition: Vec::new(),
            overshare: false,
            overshare_count: OvershareCount::Full,
            invert: false,
            corrupt_forward: false,
            out_of_range: false,
            rho: 0,
            knows_share_count: true,
            true_vote: TrueVotePolicy::AlwaysPlus,
            avoid_dishonest_producers: true,
        }
    }

    /// The default worst case: overshare at 2k+1, invert, corrupt forwards
    /// in range, no detectable behavior.
    pub fn worst_case(coalition: Vec<NodeId>) -> Self {
        AdversaryModel {
            coalition,
            overshare: true,
            invert: true,
            corrupt_forward: true,
            ..AdversaryModel::honest()
        }
    }

    pub fn size(&self) -> usize {
        self.coalition.len()
    }

    pub fn membership(&self, n: usize) -> Vec<bool> {
        let mut flags = vec![false; n];
        for &d in &self.coalition {
            flags[d] = true;
        }
        flags
    }
}

/// Oversharing: `count` identical shares of -1. With k = 0 this is a single
/// -1 share, indistinguishable from an honest -1 vote.
pub fn apply_share_misbehavior(count: usize) -> ShareVector {
    ShareVector::from_raw(vec![-1; count])
}

/// Invert incoming +1 shares; -1 passes through.
pub fn apply_invert(payload: i64) -> i64 {
    if payload == 1 {
        -1
    } else {
        payload
    }
}

/// Corrupt a forwarded value: the in-range worst case is the range floor
/// `-(2k+1)`; the out-of-range probe emits `2k+2`, which every honest
/// receiver detects.
pub fn apply_corrupt_forward(k: usize, out_of_range: bool) -> i64 {
    if out_of_range {
        2 * k as i64 + 2
    } else {
        -(2 * k as i64 + 1)
    }
}

/// One share as the coalition saw it: which honest node sent it, its value,
/// and the global arrival index (for online rules).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShareObservation {
    pub producer: NodeId,
    pub value: i64,
    pub arrival: u64,
}

/// Everything the coalition observed during the sharing phase: shares whose
/// consumer is a coalition member, from honest producers only.
#[derive(Debug, Clone, Default)]
pub struct ObservationLog {
    observations: Vec<ShareObservation>,
}

impl ObservationLog {
    pub fn record(&mut self, producer: NodeId, value: i64, arrival: u64) {
        self.observations.push(ShareObservation {
            producer,
            value,
            arrival,
        });
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Observed shares of `producer`, in arrival order.
    pub fn shares_of(&self, producer: NodeId) -> Vec<ShareObservation> {
        let mut v: Vec<ShareObservation> = self
            .observations
            .iter()
            .copied()
            .filter(|o| o.producer == producer)
            .collect();
        v.sort_by_key(|o| o.arrival);
        v
    }

    /// Producers with at least one observed share, sorted.
    pub fn observed_producers(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.observations.iter().map(|o| o.producer).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Ground truth the scorer (not the adversary) knows about one honest node.
#[derive(Debug, Clone, Copy)]
pub struct NodeTruth {
    pub node: NodeId,
    pub vote: Vote,
    pub share_index: usize,
}

/// One node's verdict under some disclosure rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub node: NodeId,
    pub value: i64,
    pub correct: bool,
    pub certain: bool,
}

/// Verdicts for every honest node the rule could say anything about.
#[derive(Debug, Clone, Default)]
pub struct DisclosureResult {
    pub verdicts: Vec<Verdict>,
}

impl DisclosureResult {
    pub fn revealed(&self) -> usize {
        self.verdicts.len()
    }

    pub fn correct(&self) -> usize {
        self.verdicts.iter().filter(|v| v.correct).count()
    }

    pub fn certain(&self) -> usize {
        self.verdicts.iter().filter(|v| v.certain).count()
    }

    pub fn verdict_for(&self, node: NodeId) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.node == node)
    }
}

/// Certain disclosure. Knowing a node sent `2i+1` shares, observing `i+1`
/// identical values pins the vote (only the vote has multiplicity `i+1`).
/// Without that knowledge, only `k+1` identical copies are structurally
/// conclusive, since no minority value can exceed multiplicity `k`.
pub fn disclose_certain(
    log: &ObservationLog,
    truths: &[NodeTruth],
    k: usize,
    knows_share_count: bool,
) -> DisclosureResult {
    let mut result = DisclosureResult::default();
    for t in truths {
        let shares = log.shares_of(t.node);
        let threshold = if knows_share_count {
            t.share_index + 1
        } else {
            k + 1
        };
        let verdict = [1i64, -1]
            .into_iter()
            .find(|&v| shares.iter().filter(|o| o.value == v).count() >= threshold);
        if let Some(value) = verdict {
            result.verdicts.push(Verdict {
                node: t.node,
                value,
                correct: value == t.vote.value(),
                certain: true,
            });
        }
    }
    result
}

/// Greedy disclosure: the first value to reach `rho+1` observed copies is
/// frozen as the verdict.
pub fn disclose_greedy(log: &ObservationLog, truths: &[NodeTruth], rho: usize) -> DisclosureResult {
    let mut result = DisclosureResult::default();
    for t in truths {
        let mut plus = 0usize;
        let mut minus = 0usize;
        let mut verdict = None;
        for obs in log.shares_of(t.node) {
            if obs.value == 1 {
                plus += 1;
                if plus >= rho + 1 {
                    verdict = Some(1);
                    break;
                }
            } else {
                minus += 1;
                if minus >= rho + 1 {
                    verdict = Some(-1);
                    break;
                }
            }
        }
        if let Some(value) = verdict {
            result.verdicts.push(Verdict {
                node: t.node,
                value,
                correct: value == t.vote.value(),
                certain: false,
            });
        }
    }
    result
}

/// Non-greedy disclosure: after all shares are delivered, take the majority
/// of what was observed; ties and empty observations yield no verdict.
pub fn disclose_nongreedy(log: &ObservationLog, truths: &[NodeTruth]) -> DisclosureResult {
    let mut result = DisclosureResult::default();
    for t in truths {
        let shares = log.shares_of(t.node);
        let plus = shares.iter().filter(|o| o.value == 1).count();
        let minus = shares.len() - plus;
        let value = if plus > minus {
            Some(1)
        } else if minus > plus {
            Some(-1)
        } else {
            None
        };
        if let Some(value) = value {
            result.verdicts.push(Verdict {
                node: t.node,
                value,
                correct: value == t.vote.value(),
                certain: false,
            });
        }
    }
    result
}

/// Combined rule: certainty first, greedy next, non-greedy last. The certain
/// pathway runs without share-count knowledge (the coalition cannot ask the
/// victim for `i`), so it triggers on `k+1` identical copies.
pub fn disclose_combined(
    log: &ObservationLog,
    truths: &[NodeTruth],
    k: usize,
    rho: usize,
) -> DisclosureResult {
    let certain = disclose_certain(log, truths, k, false);
    let greedy = disclose_greedy(log, truths, rho);
    let nongreedy = disclose_nongreedy(log, truths);
    let mut result = DisclosureResult::default();
    for t in truths {
        let pick = certain
            .verdict_for(t.node)
            .or_else(|| greedy.verdict_for(t.node))
            .or_else(|| nongreedy.verdict_for(t.node));
        if let Some(&v) = pick {
            result.verdicts.push(v);
        }
    }
    result
}

/// The revealed-votes budget: with non-unanimous honest votes, certain
/// reveals cannot exceed `2D`.
pub fn count_revealed_bound(certain: &DisclosureResult, d: usize) -> bool {
    certain.certain() <= 2 * d
}
