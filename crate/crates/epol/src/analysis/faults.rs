//! Crash and message-loss analysis: the probability that each node fails to
//! decide a given source's collected data.
//!
//! With crash probability `r` and per-message loss probability `l`, a share
//! fails to arrive with probability `q = r + (1-r) l`. The source fails to
//! assemble its collected sum if any producer share is missing; a node at
//! distance one fails when the source's broadcast does not reach it; every
//! other node fails when fewer than `m` of its preceding neighbors deliver a
//! forward. Failure-to-forward composes as
//! `e = r + (1-r) [z + (1-z) l]` on top of failure-to-decide `z`.
//!
//! Each preceding neighbor's forward is treated as an independent event (the
//! model draws an independent copy of the upstream process per edge), which
//! makes the recursion exact for the process it defines and evaluable in
//! one pass over the rank order.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::combinatorics::binomial;
use crate::graph::{SocialGraph, SourceOrdering};
use crate::{Error, Result};

/// Per-node failure probabilities for one source.
#[derive(Debug, Clone)]
pub struct FailureProfile {
    source: usize,
    /// `z[n]`: probability node n never decides the source's collected data.
    pub fail_decide: Vec<BigRational>,
    /// `e[n]`: probability node n fails to forward it to a given successor.
    pub fail_forward: Vec<BigRational>,
    /// q = r + (1-r) l.
    pub share_failure: BigRational,
}

impl FailureProfile {
    pub fn source(&self) -> usize {
        self.source
    }
}

/// `q = r + (1-r) l`, the probability a single share never arrives.
pub fn send_failure_probability(r: &BigRational, l: &BigRational) -> BigRational {
    r + (BigRational::one() - r) * l
}

/// Evaluate the failure recursion for one source along its rank order.
///
/// `source_producers` is `|R_s|`, the number of shares the source waits for;
/// pass the actual assignment value, or `2k+1` for the worst case.
pub fn fail_probabilities(
    graph: &SocialGraph,
    ordering: &SourceOrdering,
    r: &BigRational,
    l: &BigRational,
    source_producers: usize,
) -> Result<FailureProfile> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    if r < &zero || r > &one || l < &zero || l > &one {
        return Err(Error::InvalidParameter("r and l must lie in [0,1]".into()));
    }
    let n = graph.node_count();
    let s = ordering.source();
    let m = ordering.m();
    let q = send_failure_probability(r, l);

    let mut fail_decide = vec![BigRational::zero(); n];
    let mut fail_forward = vec![BigRational::zero(); n];

    // z_s: some producer share missing. Written as the tail sum
    // sum_{j < |R_s|} C(|R_s|, j) (1-q)^j q^(|R_s|-j), which telescopes to
    // 1 - (1-q)^(|R_s|).
    let ok = &one - &q;
    let mut z_s = BigRational::zero();
    for j in 0..source_producers {
        z_s += BigRational::from(binomial(source_producers, j))
            * pow(&ok, j)
            * pow(&q, source_producers - j);
    }
    fail_decide[s] = z_s;
    fail_forward[s] = compose_forward(r, l, &fail_decide[s]);

    for &node in ordering.order().iter().skip(1) {
        let z = if graph.has_edge(s, node) {
            // only the direct broadcast counts for a source neighbor
            fail_forward[s].clone()
        } else {
            let preceding_e: Vec<&BigRational> = ordering
                .preceding(node)
                .iter()
                .map(|&u| &fail_forward[u])
                .collect();
            poisson_binomial_tail(&preceding_e, m)
        };
        fail_forward[node] = compose_forward(r, l, &z);
        fail_decide[node] = z;
    }

    Ok(FailureProfile {
        source: s,
        fail_decide,
        fail_forward,
        share_failure: q,
    })
}

/// The headline failure number: the largest z among nodes at maximal
/// distance from the source.
pub fn failure_headline(graph: &SocialGraph, profile: &FailureProfile) -> Result<BigRational> {
    let dist = graph.bfs_distances(profile.source());
    let far = dist
        .iter()
        .map(|d| d.ok_or_else(|| Error::InvalidGraph("disconnected graph".into())))
        .collect::<Result<Vec<_>>>()?;
    let max_d = *far.iter().max().unwrap_or(&0);
    Ok(far
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == max_d)
        .map(|(node, _)| profile.fail_decide[node].clone())
        .max()
        .unwrap_or_else(BigRational::zero))
}

fn compose_forward(r: &BigRational, l: &BigRational, z: &BigRational) -> BigRational {
    let one = BigRational::one();
    r + (&one - r) * (z + (&one - z) * l)
}

/// P[#successes <= threshold - 1] where trial `u` succeeds with probability
/// `1 - failures[u]`. Dynamic program over the success-count distribution.
fn poisson_binomial_tail(failures: &[&BigRational], threshold: usize) -> BigRational {
    let mut dist = vec![BigRational::one()];
    for &e in failures {
        let success = BigRational::one() - e;
        let mut next = vec![BigRational::zero(); dist.len() + 1];
        for (cnt, p) in dist.iter().enumerate() {
            next[cnt] += p * e;
            next[cnt + 1] += p * &success;
        }
        // counting past the threshold is pointless; cap the vector
        if next.len() > threshold + 1 {
            next.truncate(threshold + 1);
        }
        dist = next;
    }
    dist.into_iter().take(threshold).sum()
}

fn pow(base: &BigRational, exp: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}
