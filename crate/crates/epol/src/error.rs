use thiserror::Error;

/// Errors surfaced by graph construction, role assignment, analysis and the
/// simulation engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation was called with parameters outside its
    /// documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The graph does not meet a structural precondition (connectivity,
    /// degree floor, symmetry).
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// No ordering certifying the broadcast property exists for the given
    /// source; carries the first node that could not be placed.
    #[error(
        "no m-broadcasting ordering for source {source_node}: node {blocked} cannot be certified"
    )]
    CertificationFailure { source_node: usize, blocked: usize },

    /// Randomized role assignment exhausted its retry budget without
    /// satisfying the producer cap.
    #[error("role assignment infeasible after {retries} redraws (producer cap 2k+1 = {cap})")]
    AssignmentInfeasible { retries: usize, cap: usize },

    /// An aggregate was requested before every per-source decision was made.
    #[error("node {node} has not decided {missing} source(s); result not ready")]
    NotReady { node: usize, missing: usize },

    /// Brute-force enumeration was asked for an instance above its size cap.
    #[error("enumeration limits exceeded: {0}")]
    EnumerationLimits(String),

    /// Malformed graph, ordering or config file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
