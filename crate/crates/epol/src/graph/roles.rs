//! Consumer/producer role assignment.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{NodeId, SocialGraph};
use crate::{Error, Result};

/// Whole-assignment redraws attempted before giving up on the producer cap.
pub const ASSIGNMENT_RETRY_BUDGET: usize = 1000;

/// Who each node sends its shares to (consumers, in send order) and receives
/// them from (producers), plus the share-count index `i_n`.
///
/// Invariants: `consumers[n].len() == 2 * share_index[n] + 1`, consumers are
/// neighbors of `n`, `producers[n].len() <= 2k+1`, and membership is mutual:
/// `u ∈ consumers[n] ⇔ n ∈ producers[u]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleAssignment {
    consumers: Vec<Vec<NodeId>>,
    producers: Vec<Vec<NodeId>>,
    share_index: Vec<usize>,
}

impl RoleAssignment {
    /// Build from explicit consumer lists, deriving producers by inversion.
    /// Validates odd sizes, neighbor membership and the `2k+1` producer cap.
    pub fn from_consumers(
        graph: &SocialGraph,
        k: usize,
        consumers: Vec<Vec<NodeId>>,
    ) -> Result<Self> {
        let n = graph.node_count();
        if consumers.len() != n {
            return Err(Error::InvalidParameter(format!(
                "consumer lists for {} nodes, graph has {n}",
                consumers.len()
            )));
        }
        let mut share_index = vec![0usize; n];
        let mut producers = vec![Vec::new(); n];
        for (node, list) in consumers.iter().enumerate() {
            if list.is_empty() || list.len() % 2 == 0 || list.len() > 2 * k + 1 {
                return Err(Error::InvalidParameter(format!(
                    "node {node} has {} consumers; expected an odd count in 1..=2k+1",
                    list.len()
                )));
            }
            share_index[node] = (list.len() - 1) / 2;
            let mut seen = list.to_vec();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != list.len() {
                return Err(Error::InvalidParameter(format!(
                    "node {node} lists a consumer twice"
                )));
            }
            for &c in list {
                if !graph.has_edge(node, c) {
                    return Err(Error::InvalidParameter(format!(
                        "node {node} chose non-neighbor {c} as consumer"
                    )));
                }
                producers[c].push(node);
            }
        }
        for (node, prod) in producers.iter_mut().enumerate() {
            prod.sort_unstable();
            if prod.len() > 2 * k + 1 {
                return Err(Error::InvalidParameter(format!(
                    "node {node} has {} producers, cap is {}",
                    prod.len(),
                    2 * k + 1
                )));
            }
        }
        Ok(RoleAssignment {
            consumers,
            producers,
            share_index,
        })
    }

    /// i_n: node `n` sends `2 * i_n + 1` shares.
    pub fn share_index(&self, n: NodeId) -> usize {
        self.share_index[n]
    }

    /// S_n in the order shares are sent.
    pub fn consumers(&self, n: NodeId) -> &[NodeId] {
        &self.consumers[n]
    }

    /// R_n, sorted.
    pub fn producers(&self, n: NodeId) -> &[NodeId] {
        &self.producers[n]
    }

    pub fn node_count(&self) -> usize {
        self.consumers.len()
    }
}

/// Draw a role assignment: each node picks `i` from `gamma` and then a
/// uniform `2i+1`-subset of its neighbors as consumers. The whole assignment
/// is redrawn until every producer set fits under the `2k+1` cap.
///
/// `gamma[i]` is the population fraction choosing `2i+1` shares; it must have
/// `k+1` entries summing to 1.
pub fn assign_roles<R: Rng>(
    graph: &SocialGraph,
    k: usize,
    gamma: &[f64],
    rng: &mut R,
) -> Result<RoleAssignment> {
    assign_roles_constrained(graph, k, gamma, &[], &[], rng)
}

/// [`assign_roles`] with two extra constraints used by adversarial runs:
/// `forced_index[n] = Some(i)` pins node n's share count, and nodes flagged
/// in `mutual_avoid` never pick consumers that are also flagged (a
/// coordinated coalition does not waste inversions on its own -1 shares).
/// Empty slices mean no constraint.
pub fn assign_roles_constrained<R: Rng>(
    graph: &SocialGraph,
    k: usize,
    gamma: &[f64],
    forced_index: &[Option<usize>],
    mutual_avoid: &[bool],
    rng: &mut R,
) -> Result<RoleAssignment> {
    validate_gamma(k, gamma)?;
    if !graph.satisfies_degree_floor(k) {
        return Err(Error::InvalidGraph(format!(
            "min degree {} below 2k+1 = {}",
            graph.min_degree(),
            2 * k + 1
        )));
    }
    let n = graph.node_count();
    let cap = 2 * k + 1;
    for _ in 0..ASSIGNMENT_RETRY_BUDGET {
        let mut consumers: Vec<Vec<NodeId>> = Vec::with_capacity(n);
        let mut load = vec![0usize; n];
        let mut ok = true;
        for node in 0..n {
            let i = forced_index
                .get(node)
                .copied()
                .flatten()
                .unwrap_or_else(|| sample_gamma(gamma, rng));
            if i > k {
                return Err(Error::InvalidParameter(format!(
                    "forced share index {i} exceeds k = {k}"
                )));
            }
            let avoid_peers = mutual_avoid.get(node).copied().unwrap_or(false);
            let mut picks: Vec<NodeId> = graph
                .neighbors(node)
                .iter()
                .copied()
                .filter(|&u| !(avoid_peers && mutual_avoid.get(u).copied().unwrap_or(false)))
                .collect();
            if picks.len() < 2 * i + 1 {
                return Err(Error::InvalidGraph(format!(
                    "node {node} has only {} eligible neighbors for {} consumers",
                    picks.len(),
                    2 * i + 1
                )));
            }
            picks.shuffle(rng);
            picks.truncate(2 * i + 1);
            for &c in &picks {
                load[c] += 1;
                if load[c] > cap {
                    ok = false;
                }
            }
            consumers.push(picks);
        }
        if ok {
            return RoleAssignment::from_consumers(graph, k, consumers);
        }
    }
    Err(Error::AssignmentInfeasible {
        retries: ASSIGNMENT_RETRY_BUDGET,
        cap,
    })
}

fn validate_gamma(k: usize, gamma: &[f64]) -> Result<()> {
    if gamma.len() != k + 1 {
        return Err(Error::InvalidParameter(format!(
            "gamma has {} entries, expected k+1 = {}",
            gamma.len(),
            k + 1
        )));
    }
    if gamma.iter().any(|&g| !(0.0..=1.0).contains(&g)) {
        return Err(Error::InvalidParameter(
            "gamma entries must lie in [0,1]".into(),
        ));
    }
    let total: f64 = gamma.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "gamma sums to {total}, expected 1"
        )));
    }
    Ok(())
}

fn sample_gamma<R: Rng>(gamma: &[f64], rng: &mut R) -> usize {
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

/// The closed-form roles of the circle family: node `n` sends to
/// `{n-1, n+1, n+2, ..., n+2k}` and receives from `{n+1, n-1, ..., n-2k}`,
/// so consumer and producer sets overlap and both have size exactly `2k+1`.
pub fn circle_roles(n: usize, k: usize) -> Result<RoleAssignment> {
    if n <= 2 * k + 1 {
        return Err(Error::InvalidParameter(format!(
            "circle roles need N > 2k+1, got N={n}, k={k}"
        )));
    }
    let graph = super::generate_circle(n, k)?;
    let consumers: Vec<Vec<NodeId>> = (0..n)
        .map(|node| {
            let mut s = vec![(node + n - 1) % n];
            s.extend((1..=2 * k).map(|t| (node + t) % n));
            s
        })
        .collect();
    RoleAssignment::from_consumers(&graph, k, consumers)
}
