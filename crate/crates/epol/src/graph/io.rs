//! Text formats for graphs and ordering caches.
//!
//! Graph file: first line `N M`, then `M` lines `u v` with `0 <= u < v < N`,
//! ASCII decimal, newline-terminated. Ordering cache: one line per source,
//! `s: r0 r1 ... r(N-1)` listing node ids in rank order.

use super::ordering::{BroadcastCertificate, SourceOrdering};
use super::SocialGraph;
use crate::{Error, Result};

/// Render a graph in the edge-list format.
pub fn render_graph(graph: &SocialGraph) -> String {
    let mut out = format!("{} {}\n", graph.node_count(), graph.edge_count());
    for (u, v) in graph.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Parse the edge-list format.
pub fn parse_graph(text: &str) -> Result<SocialGraph> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty graph file".into()))?;
    let mut head = header.split_whitespace();
    let n: usize = parse_field(head.next(), "node count")?;
    let m: usize = parse_field(head.next(), "edge count")?;
    let mut g = SocialGraph::new(n);
    let mut seen = 0usize;
    for line in lines {
        let mut fields = line.split_whitespace();
        let u: usize = parse_field(fields.next(), "edge endpoint")?;
        let v: usize = parse_field(fields.next(), "edge endpoint")?;
        if fields.next().is_some() {
            return Err(Error::Parse(format!(
                "trailing tokens on edge line {line:?}"
            )));
        }
        if u >= v {
            return Err(Error::Parse(format!("edge {u} {v} must satisfy u < v")));
        }
        g.add_edge(u, v).map_err(|e| Error::Parse(e.to_string()))?;
        seen += 1;
    }
    if seen != m {
        return Err(Error::Parse(format!(
            "header promises {m} edges, found {seen}"
        )));
    }
    Ok(g)
}

fn parse_field(token: Option<&str>, what: &str) -> Result<usize> {
    token
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
}

/// Render witness orderings, one line per source.
pub fn render_orderings(cert: &BroadcastCertificate) -> String {
    let mut out = String::new();
    for ord in cert.orderings() {
        out.push_str(&format!("{}:", ord.source()));
        for &node in ord.order() {
            out.push_str(&format!(" {node}"));
        }
        out.push('\n');
    }
    out
}

/// Parse an ordering cache back into a certificate for `graph`, re-validating
/// every line against `m`.
pub fn parse_orderings(graph: &SocialGraph, m: usize, text: &str) -> Result<BroadcastCertificate> {
    let mut orderings: Vec<Option<SourceOrdering>> = vec![None; graph.node_count()];
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (src, rest) = line
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("ordering line without ':': {line:?}")))?;
        let source: usize = src
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad source id: {e}")))?;
        let order = rest
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad rank entry: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if order.first() != Some(&source) {
            return Err(Error::Parse(format!(
                "ordering for {source} does not start with it"
            )));
        }
        let ord = SourceOrdering::from_order(graph, m, order)?;
        if source >= orderings.len() {
            return Err(Error::Parse(format!("source {source} out of range")));
        }
        orderings[source] = Some(ord);
    }
    let orderings = orderings
        .into_iter()
        .enumerate()
        .map(|(s, o)| o.ok_or_else(|| Error::Parse(format!("no ordering for source {s}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(BroadcastCertificate::new(m, orderings))
}

#[cfg(test)]
mod tests {
    use super::super::ordering::check_m_broadcasting;
    use super::super::tests::example_graph;
    use super::*;

    #[test]
    fn graph_round_trip() {
        let g = example_graph();
        let text = render_graph(&g);
        assert!(text.starts_with("8 14\n"));
        let parsed = parse_graph(&text).unwrap();
        assert_eq!(parsed.edges(), g.edges());
    }

    #[test]
    fn rejects_malformed_graph_files() {
        assert!(parse_graph("").is_err());
        assert!(parse_graph("2 1\n1 0\n").is_err()); // u >= v
        assert!(parse_graph("2 2\n0 1\n").is_err()); // edge count mismatch
    }

    #[test]
    fn ordering_round_trip() {
        let g = example_graph();
        let cert = check_m_broadcasting(&g, 2).expect_ok();
        let text = render_orderings(&cert);
        let parsed = parse_orderings(&g, 2, &text).unwrap();
        for s in 0..g.node_count() {
            assert_eq!(parsed.for_source(s).order(), cert.for_source(s).order());
        }
    }
}
