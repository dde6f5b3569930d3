//! Generators for the graph families known to satisfy the m-broadcasting
//! property, plus the edge-insertion construction that retrofits it onto an
//! arbitrary graph.

use super::ordering::{check_m_broadcasting, SourceOrdering};
use super::{NodeId, SocialGraph};
use crate::{Error, Result};

/// Layered network: nodes split into layers, adjacent layers completely
/// bipartitely connected, no intra-layer edges. Any layer sizing with every
/// layer at least `m` certifies `m` via distance ordering.
pub fn generate_layered(layer_sizes: &[usize], m: usize) -> Result<SocialGraph> {
    if layer_sizes.is_empty() {
        return Err(Error::InvalidParameter("need at least one layer".into()));
    }
    if let Some(small) = layer_sizes.iter().find(|&&s| s < m) {
        return Err(Error::InvalidParameter(format!(
            "layer of size {small} is below m = {m}"
        )));
    }
    let n: usize = layer_sizes.iter().sum();
    let mut g = SocialGraph::new(n);
    let mut starts = Vec::with_capacity(layer_sizes.len() + 1);
    let mut acc = 0;
    for &s in layer_sizes {
        starts.push(acc);
        acc += s;
    }
    starts.push(acc);
    for layer in 1..layer_sizes.len() {
        for u in starts[layer - 1]..starts[layer] {
            for v in starts[layer]..starts[layer + 1] {
                g.add_edge(u, v)?;
            }
        }
    }
    if !g.is_connected() {
        return Err(Error::InvalidGraph(
            "single layer with more than one node is disconnected".into(),
        ));
    }
    Ok(g)
}

/// Backbone network: a clique of `backbone_size` nodes; outer node `j` (ids
/// after the backbone) attaches to `outer_attachments[j]` backbone nodes,
/// chosen round-robin starting at `j mod backbone_size`.
pub fn generate_backbone(
    backbone_size: usize,
    outer_attachments: &[usize],
    m: usize,
) -> Result<SocialGraph> {
    if backbone_size < m.max(1) {
        return Err(Error::InvalidParameter(format!(
            "backbone of {backbone_size} nodes cannot certify m = {m}"
        )));
    }
    if let Some(small) = outer_attachments.iter().find(|&&a| a < m) {
        return Err(Error::InvalidParameter(format!(
            "outer node with {small} attachments is below m = {m}"
        )));
    }
    if outer_attachments.iter().any(|&a| a > backbone_size) {
        return Err(Error::InvalidParameter(
            "more attachments requested than backbone nodes".into(),
        ));
    }
    let n = backbone_size + outer_attachments.len();
    let mut g = SocialGraph::new(n);
    for u in 0..backbone_size {
        for v in (u + 1)..backbone_size {
            g.add_edge(u, v)?;
        }
    }
    for (j, &attach) in outer_attachments.iter().enumerate() {
        let outer = backbone_size + j;
        for t in 0..attach {
            g.add_edge(outer, (j + t) % backbone_size)?;
        }
    }
    Ok(g)
}

/// One-dimensional geometric network: nodes on a line, an edge whenever two
/// positions are closer than `threshold`. Every node must end with at least
/// `m` neighbors.
pub fn generate_geometric_1d(positions: &[f64], threshold: f64, m: usize) -> Result<SocialGraph> {
    if positions.is_empty() {
        return Err(Error::InvalidParameter("no positions given".into()));
    }
    if !(threshold > 0.0) || positions.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter(
            "positions must be finite and threshold positive".into(),
        ));
    }
    let n = positions.len();
    let mut g = SocialGraph::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if (positions[u] - positions[v]).abs() < threshold {
                g.add_edge(u, v)?;
            }
        }
    }
    if n > 1 {
        if let Some(low) = (0..n).find(|&v| g.degree(v) < m) {
            return Err(Error::InvalidParameter(format!(
                "node {low} has {} connections, below m = {m}",
                g.degree(low)
            )));
        }
    }
    if !g.is_connected() {
        return Err(Error::InvalidGraph(
            "geometric graph is disconnected".into(),
        ));
    }
    Ok(g)
}

/// Cluster-ring network: `sqrt(N)` clique groups arranged in a ring, each
/// node linked to `2k+1` nodes of the next group (and therefore serving as a
/// link target for `2k+1` nodes of the previous one).
pub fn generate_cluster_ring(n: usize, k: usize) -> Result<SocialGraph> {
    let r = (n as f64).sqrt().round() as usize;
    if r * r != n {
        return Err(Error::InvalidParameter(format!(
            "N = {n} is not a perfect square"
        )));
    }
    if r < 2 * k + 1 {
        return Err(Error::InvalidParameter(format!(
            "group size {r} below 2k+1 = {}",
            2 * k + 1
        )));
    }
    if r < 2 {
        return Err(Error::InvalidParameter("need at least two groups".into()));
    }
    let mut g = SocialGraph::new(n);
    let id = |group: usize, slot: usize| (group % r) * r + (slot % r);
    for group in 0..r {
        for a in 0..r {
            for b in (a + 1)..r {
                g.add_edge(id(group, a), id(group, b))?;
            }
        }
        for slot in 0..r {
            for t in 0..(2 * k + 1) {
                let u = id(group, slot);
                let v = id(group + 1, slot + t);
                if !g.has_edge(u, v) {
                    g.add_edge(u, v)?;
                }
            }
        }
    }
    Ok(g)
}

/// Circle network: the circulant graph where node `n` sends shares to
/// `{n-1, n+1, n+2, ..., n+2k}` (2k+1 consumers) and receives from their
/// mirror image, making consumer and producer sets overlap.
pub fn generate_circle(n: usize, k: usize) -> Result<SocialGraph> {
    if n <= 2 * k + 1 {
        return Err(Error::InvalidParameter(format!(
            "circle needs N > 2k+1, got N={n}, k={k}"
        )));
    }
    let mut g = SocialGraph::new(n);
    let max_offset = (2 * k).max(1);
    for node in 0..n {
        for t in 1..=max_offset {
            let v = (node + t) % n;
            if !g.has_edge(node, v) {
                g.add_edge(node, v)?;
            }
        }
    }
    Ok(g)
}

/// Retrofit the m-broadcasting property onto `graph` along a chosen order:
/// the order's first node acts as source, the next `m` nodes gain an edge to
/// it if missing, and every later node gains edges from the earliest ordered
/// nodes until it has at least `m` earlier neighbors.
///
/// Idempotent: a graph already certifying `m` along `order` gains no edges.
/// The result is guaranteed to certify `m` for that source ordering (other
/// sources may still fail).
pub fn make_m_broadcasting(
    graph: &SocialGraph,
    m: usize,
    order: &[NodeId],
) -> Result<(SocialGraph, SourceOrdering)> {
    let n = graph.node_count();
    if m == 0 || m > n.saturating_sub(1) {
        return Err(Error::InvalidParameter(format!(
            "m = {m} out of range for {n} nodes"
        )));
    }
    if order.len() != n {
        return Err(Error::InvalidParameter(
            "order must list every node once".into(),
        ));
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::InvalidParameter("order is not a permutation".into()));
    }

    let mut g = graph.clone();
    let source = order[0];
    for &node in order.iter().skip(1).take(m) {
        if !g.has_edge(source, node) {
            g.add_edge(source, node)?;
        }
    }
    for pos in (m + 1)..n {
        let node = order[pos];
        if g.has_edge(source, node) {
            continue;
        }
        let earlier = &order[..pos];
        let mut count = earlier.iter().filter(|&&u| g.has_edge(u, node)).count();
        for &u in earlier {
            if count >= m {
                break;
            }
            if !g.has_edge(u, node) {
                g.add_edge(u, node)?;
                count += 1;
            }
        }
    }
    let ordering = SourceOrdering::from_order(&g, m, order.to_vec())?;
    Ok((g, ordering))
}

/// The m each generated family certifies by construction, used as the
/// default when running polls on freshly generated graphs.
pub fn default_m_for_circle(n: usize, k: usize) -> usize {
    if k == 0 {
        1
    } else if n <= 3 * k {
        // heavy wraparound: fall back to whatever the checker accepts
        (1..=2 * k + 1)
            .rev()
            .find(|&m| check_m_broadcasting(&generate_circle(n, k).unwrap(), m).is_ok())
            .unwrap_or(1)
    } else {
        2 * k
    }
}
