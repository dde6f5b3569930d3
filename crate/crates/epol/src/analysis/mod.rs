//! Exact evaluation of every closed-form quantity the protocol's analysis
//! produces: disclosure probabilities and their bounds, impact on the poll
//! outcome, tolerance to dishonest nodes, complexity budgets, and the
//! crash/message-loss recursion.
//!
//! Everything combinatorial is computed in arbitrary-precision rationals so
//! bound-versus-exact comparisons are never confounded by rounding.

mod combinatorics;
mod faults;
mod impact;
mod privacy;

pub use combinatorics::{binomial, rational_from_decimal, render_decimal, Probability};
pub use faults::{fail_probabilities, failure_headline, send_failure_probability, FailureProfile};
pub use impact::{
    avg_impact, biased_result_all2k1, biased_result_range, complexity_bounds, crash_impact_bound,
    max_impact, tolerance, wrong_decision_bound, ComplexityBounds,
};
pub use privacy::{
    p_ce_bound, p_ce_exact, p_ce_total, p_com, p_gr_bound, p_gr_exact, p_un_bound, p_un_exact,
};

use num_rational::BigRational;

use crate::{Error, Result};

/// Parameter bundle for a full analysis sweep: everything the closed forms
/// need, independent of any concrete graph.
#[derive(Debug, Clone)]
pub struct PollParameters {
    /// Population size.
    pub n: usize,
    /// Coalition size.
    pub d: usize,
    /// Privacy parameter; share counts live in `{1, 3, ..., 2k+1}`.
    pub k: usize,
    /// Broadcast redundancy.
    pub m: usize,
    /// Network diameter.
    pub diameter: usize,
    /// `gamma[i]` = fraction of nodes sending `2i+1` shares; sums to 1.
    pub gamma: Vec<BigRational>,
    /// Fraction of nodes voting +1.
    pub alpha: BigRational,
    /// Greedy disclosure trigger: verdict after `rho+1` identical shares.
    pub rho: usize,
    /// Crash probability.
    pub r: BigRational,
    /// Per-message loss probability.
    pub l: BigRational,
}

impl PollParameters {
    /// Validate the structural invariants: gamma has `k+1` entries summing
    /// to one, probabilities lie in `[0,1]`, `rho <= k`, `d <= n`.
    pub fn validate(&self) -> Result<()> {
        use num_traits::{One, Zero};
        if self.gamma.len() != self.k + 1 {
            return Err(Error::InvalidParameter(format!(
                "gamma has {} entries, expected {}",
                self.gamma.len(),
                self.k + 1
            )));
        }
        let one = BigRational::one();
        let zero = BigRational::zero();
        if self.gamma.iter().sum::<BigRational>() != one {
            return Err(Error::InvalidParameter("gamma must sum to 1".into()));
        }
        if self.gamma.iter().any(|g| g < &zero || g > &one) {
            return Err(Error::InvalidParameter(
                "gamma entries must lie in [0,1]".into(),
            ));
        }
        for (name, v) in [("alpha", &self.alpha), ("r", &self.r), ("l", &self.l)] {
            if v < &zero || v > &one {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0,1]")));
            }
        }
        if self.rho > self.k {
            return Err(Error::InvalidParameter(format!(
                "rho = {} exceeds k = {}",
                self.rho, self.k
            )));
        }
        if self.d > self.n {
            return Err(Error::InvalidParameter(format!(
                "coalition of {} in a population of {}",
                self.d, self.n
            )));
        }
        Ok(())
    }
}
