//! The per-node polling state machine.
//!
//! Each node walks through three phases. *Sharing*: emit `2i+1` shares of the
//! vote (i+1 copies of it, i of its opposite, randomly ordered) to the chosen
//! consumers and sum the shares received from producers into the collected
//! data `c_n`. *Broadcasting*: send `c_n` to every neighbor; relay other
//! sources' collected data along the per-source ordering, deciding each value
//! either directly from the source or by majority over `m` forwarded copies.
//! *Aggregating*: the poll outcome is `c_n` plus the decided value of every
//! other source.
//!
//! Nodes here are pure state machines: the simulation engine owns delivery
//! order, randomness and fault injection, and calls into [`NodeState`].

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{NodeId, SocialGraph, SourceOrdering};
use crate::{Error, Result};

/// A vote for one of the two options.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vote {
    Plus,
    Minus,
}

impl Vote {
    pub fn value(self) -> i64 {
        match self {
            Vote::Plus => 1,
            Vote::Minus => -1,
        }
    }

    pub fn opposite(self) -> Vote {
        match self {
            Vote::Plus => Vote::Minus,
            Vote::Minus => Vote::Plus,
        }
    }
}

/// The shares a node emits, in send order.
///
/// Invariant: odd length `2i+1`, multiset = `{vote × (i+1), -vote × i}`, so
/// the shares sum back to the vote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareVector {
    shares: Vec<i64>,
}

impl ShareVector {
    pub fn as_slice(&self) -> &[i64] {
        &self.shares
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    pub fn sum(&self) -> i64 {
        self.shares.iter().sum()
    }

    /// Build from raw values; used by misbehavior injection, which is the
    /// one caller allowed to break the honest multiset invariant.
    pub fn from_raw(shares: Vec<i64>) -> Self {
        ShareVector { shares }
    }
}

/// Generate the honest share vector for `vote` with index `i <= k`:
/// `i+1` copies of the vote and `i` of its opposite, uniformly permuted.
pub fn generate_shares<R: Rng>(vote: Vote, i: usize, k: usize, rng: &mut R) -> Result<ShareVector> {
    if i > k {
        return Err(Error::InvalidParameter(format!(
            "share index {i} exceeds k = {k}"
        )));
    }
    let mut shares = Vec::with_capacity(2 * i + 1);
    shares.extend(std::iter::repeat(vote.value()).take(i + 1));
    shares.extend(std::iter::repeat(vote.opposite().value()).take(i));
    shares.shuffle(rng);
    Ok(ShareVector { shares })
}

/// Messages exchanged by the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageKind {
    /// One share of a vote.
    Share { payload: i64 },
    /// Collected data of `source`, possibly relayed.
    Data { source: NodeId, value: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    pub sender: NodeId,
    pub receiver: NodeId,
    pub kind: MessageKind,
}

/// Majority decision over a multiset of candidate values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Value(i64),
    /// No strictly most-represented value; recorded as a decision failure.
    Undecidable,
}

/// Return the strictly most represented value, or `Undecidable` on a tie.
pub fn decide(values: &[i64]) -> Result<Decision> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "decide() on an empty multiset".into(),
        ));
    }
    let mut counts: Vec<(i64, usize)> = Vec::new();
    for &v in values {
        match counts.iter_mut().find(|(val, _)| *val == v) {
            Some((_, c)) => *c += 1,
            None => counts.push((v, 1)),
        }
    }
    counts.sort_by_key(|&(v, c)| (std::cmp::Reverse(c), v));
    let (best, best_count) = counts[0];
    let tied = counts.iter().filter(|&&(_, c)| c == best_count).count() > 1;
    Ok(if tied {
        Decision::Undecidable
    } else {
        Decision::Value(best)
    })
}

/// The value that already holds a `> m/2` majority among `values`, if any.
pub fn early_majority(values: &[i64], m: usize) -> Option<i64> {
    let threshold = m / 2 + 1; // ceil((m+1)/2)
    let mut seen: Vec<(i64, usize)> = Vec::new();
    for &v in values {
        match seen.iter_mut().find(|(val, _)| *val == v) {
            Some((_, c)) => *c += 1,
            None => seen.push((v, 1)),
        }
    }
    seen.into_iter()
        .find(|&(_, c)| c >= threshold)
        .map(|(v, _)| v)
}

/// Why an incoming message was ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// SHARE from a non-producer, or with a payload outside {-1, +1}.
    BadShare,
    /// Second SHARE from the same producer.
    DuplicateShare,
    /// DATA from a sender not preceding us in the source's ordering.
    NotPreceding,
    /// DATA for a source whose value we already decided (or already heard
    /// from this sender).
    DuplicateData,
    /// Forwarded copy about a source we neighbor; only the direct message
    /// counts for those.
    SourceNeighborCopy,
    /// DATA value outside [-(2k+1), 2k+1]; the sender is flagged dishonest.
    OutOfRange,
}

/// Outcome of feeding a DATA message to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataOutcome {
    /// Value stored in `h_n[source]`; relay it to succeeding neighbors.
    DecidedAndForward(i64),
    /// Candidate stored; not enough evidence to decide yet.
    Stored,
    /// Candidate stored and the multiset filled up with no majority.
    DecisionFailure,
    Dropped(DropReason),
}

/// Per-node message and storage accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeCounters {
    pub shares_sent: u64,
    pub shares_accepted: u64,
    pub share_drops: u64,
    pub data_broadcast_sent: u64,
    pub forwards_sent: u64,
    pub data_drops_not_preceding: u64,
    pub data_drops_duplicate: u64,
    pub data_drops_source_neighbor: u64,
    pub detections: u64,
    pub decision_failures: u64,
    /// Peak number of undecided candidate values held at once.
    pub candidate_cells_peak: u64,
}

impl NodeCounters {
    pub fn messages_sent(&self) -> u64 {
        self.shares_sent + self.data_broadcast_sent + self.forwards_sent
    }
}

/// One participant's protocol state.
#[derive(Debug, Clone)]
pub struct NodeState {
    id: NodeId,
    vote: Vote,
    share_index: usize,
    expected_producers: usize,
    collected: i64,
    accepted: usize,
    /// C_n[s]: candidate values per source (only for non-neighbors).
    possible: Vec<Vec<i64>>,
    /// h_n[s]: decided collected data per source.
    decided: Vec<Option<i64>>,
    /// Sources whose candidate multiset filled with no majority.
    failed: Vec<bool>,
    /// First-SHARE guard per producer and (sender, source) de-dup for DATA.
    share_seen: Vec<bool>,
    data_seen: BitGrid,
    live_candidates: u64,
    pub counters: NodeCounters,
}

impl NodeState {
    pub fn new(
        id: NodeId,
        n: usize,
        vote: Vote,
        share_index: usize,
        expected_producers: usize,
    ) -> Self {
        NodeState {
            id,
            vote,
            share_index,
            expected_producers,
            collected: 0,
            accepted: 0,
            possible: vec![Vec::new(); n],
            decided: vec![None; n],
            failed: vec![false; n],
            share_seen: vec![false; n],
            data_seen: BitGrid::new(n),
            live_candidates: 0,
            counters: NodeCounters::default(),
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn vote(&self) -> Vote {
        self.vote
    }

    pub fn share_index(&self) -> usize {
        self.share_index
    }

    /// c_n: the sum of accepted producer shares.
    pub fn collected(&self) -> i64 {
        self.collected
    }

    /// Shares accepted so far; sharing completes at `expected_producers`.
    pub fn accepted_shares(&self) -> usize {
        self.accepted
    }

    pub fn sharing_complete(&self) -> bool {
        self.accepted == self.expected_producers
    }

    pub fn decided_value(&self, source: NodeId) -> Option<i64> {
        self.decided[source]
    }

    pub fn decision_failed(&self, source: NodeId) -> bool {
        self.failed[source]
    }

    pub fn candidates(&self, source: NodeId) -> &[i64] {
        &self.possible[source]
    }

    /// Accept or drop one SHARE. Accepts only the first share from each
    /// producer, and only payloads in {-1, +1}.
    pub fn on_share(&mut self, from: NodeId, payload: i64, producers: &[NodeId]) -> bool {
        let valid = (payload == 1 || payload == -1)
            && producers.contains(&from)
            && !self.share_seen[from]
            && !self.sharing_complete();
        if !valid {
            self.counters.share_drops += 1;
            return false;
        }
        self.share_seen[from] = true;
        self.collected += payload;
        self.accepted += 1;
        self.counters.shares_accepted += 1;
        true
    }

    /// Feed one DATA message. `early_threshold` enables deciding as soon as
    /// more than half of the expected `m` candidates agree.
    pub fn on_data(
        &mut self,
        graph: &SocialGraph,
        ordering: &SourceOrdering,
        from: NodeId,
        source: NodeId,
        value: i64,
        k: usize,
        early_decide: bool,
    ) -> DataOutcome {
        let n = self.id;
        if ordering.rank(from) >= ordering.rank(n) || source == n {
            self.counters.data_drops_not_preceding += 1;
            return DataOutcome::Dropped(DropReason::NotPreceding);
        }
        let cap = (2 * k + 1) as i64;
        if value < -cap || value > cap {
            self.counters.detections += 1;
            return DataOutcome::Dropped(DropReason::OutOfRange);
        }
        if from == source {
            if self.decided[source].is_some() {
                self.counters.data_drops_duplicate += 1;
                return DataOutcome::Dropped(DropReason::DuplicateData);
            }
            self.decided[source] = Some(value);
            return DataOutcome::DecidedAndForward(value);
        }
        if graph.has_edge(source, n) {
            // only the direct message counts when we neighbor the source
            self.counters.data_drops_source_neighbor += 1;
            return DataOutcome::Dropped(DropReason::SourceNeighborCopy);
        }
        if self.decided[source].is_some() || self.failed[source] || self.data_seen.get(from, source)
        {
            self.counters.data_drops_duplicate += 1;
            return DataOutcome::Dropped(DropReason::DuplicateData);
        }
        self.data_seen.set(from, source);
        self.possible[source].push(value);
        self.live_candidates += 1;
        self.counters.candidate_cells_peak =
            self.counters.candidate_cells_peak.max(self.live_candidates);

        let m = ordering.m();
        let filled = self.possible[source].len() == m;
        let early = if early_decide && !filled {
            early_majority(&self.possible[source], m)
        } else {
            None
        };
        let decision = if filled {
            Some(decide(&self.possible[source]).expect("non-empty candidate set"))
        } else {
            early.map(Decision::Value)
        };
        match decision {
            Some(Decision::Value(v)) => {
                self.decided[source] = Some(v);
                self.live_candidates -= self.possible[source].len() as u64;
                self.possible[source] = Vec::new();
                DataOutcome::DecidedAndForward(v)
            }
            Some(Decision::Undecidable) => {
                self.failed[source] = true;
                self.counters.decision_failures += 1;
                self.live_candidates -= self.possible[source].len() as u64;
                self.possible[source] = Vec::new();
                DataOutcome::DecisionFailure
            }
            None => DataOutcome::Stored,
        }
    }

    /// Final outcome: `c_n + sum of h_n[s]`. Errors while any source other
    /// than the node itself is undecided.
    pub fn aggregate(&self) -> Result<i64> {
        let missing = self.missing_sources().len();
        if missing > 0 || !self.sharing_complete() {
            return Err(Error::NotReady {
                node: self.id,
                missing: missing.max(1),
            });
        }
        Ok(self.partial_aggregate())
    }

    /// Sum of the collected data and every decided value, ignoring holes.
    pub fn partial_aggregate(&self) -> i64 {
        self.collected
            + self
                .decided
                .iter()
                .enumerate()
                .filter(|&(s, _)| s != self.id)
                .filter_map(|(_, v)| *v)
                .sum::<i64>()
    }

    /// Sources (other than the node itself) with no decided value.
    pub fn missing_sources(&self) -> Vec<NodeId> {
        self.decided
            .iter()
            .enumerate()
            .filter(|&(s, v)| s != self.id && v.is_none())
            .map(|(s, _)| s)
            .collect()
    }
}

/// Dense (sender, source) bit matrix.
#[derive(Debug, Clone)]
struct BitGrid {
    n: usize,
    bits: Vec<u64>,
}

impl BitGrid {
    fn new(n: usize) -> Self {
        BitGrid {
            n,
            bits: vec![0; (n * n + 63) / 64],
        }
    }

    fn get(&self, a: usize, b: usize) -> bool {
        let idx = a * self.n + b;
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    fn set(&mut self, a: usize, b: usize) {
        let idx = a * self.n + b;
        self.bits[idx / 64] |= 1 << (idx % 64);
    }
}
