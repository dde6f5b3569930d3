//! Accuracy impact, tolerance and complexity budgets.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Worst-case impact of a coalition of `d` nodes: `(6k+4) * d`.
///
/// Per node: oversharing costs up to `2k+2` (a +1 voter emitting `2k+1`
/// shares of -1) and inverting costs up to `4k+2` (flipping `2k+1` received
/// +1 shares). In-range corruption of forwarded data is repaired by majority
/// and contributes nothing.
pub fn max_impact(k: usize, d: usize) -> u64 {
    (6 * k as u64 + 4) * d as u64
}

/// Average coalition impact `I_avg * D` where
/// `I_avg = [sum_i gamma_i (2i+1)] * [1 + 2 sum_i gamma_i (i+alpha)/(2i+1)] + 1`.
pub fn avg_impact(
    k: usize,
    gamma: &[BigRational],
    alpha: &BigRational,
    d: usize,
) -> Result<BigRational> {
    if gamma.len() != k + 1 {
        return Err(Error::InvalidParameter(format!(
            "gamma has {} entries, expected {}",
            gamma.len(),
            k + 1
        )));
    }
    let mut shares_sent = BigRational::zero();
    let mut plus_share_rate = BigRational::zero();
    for (i, g) in gamma.iter().enumerate() {
        let odd = BigRational::from(BigInt::from(2 * i as i64 + 1));
        shares_sent += g * &odd;
        plus_share_rate += g * (BigRational::from(BigInt::from(i as i64)) + alpha) / odd;
    }
    let two = BigRational::from(BigInt::from(2));
    let i_avg = shares_sent * (BigRational::one() + two * plus_share_rate) + BigRational::one();
    Ok(i_avg * BigRational::from(BigInt::from(d as i64)))
}

/// Range the expected biased outcome must fall in:
/// `[(2 alpha - 1) N - (6k+4) D, (2 alpha - 1) N]`.
pub fn biased_result_range(
    n: usize,
    d: usize,
    k: usize,
    alpha: &BigRational,
) -> (BigRational, BigRational) {
    let expected = expected_outcome(n, alpha);
    let worst = BigRational::from(BigInt::from(max_impact(k, d)));
    (&expected - worst, expected)
}

/// Expected biased outcome when every node sends `2k+1` shares:
/// `(2 alpha - 1) N - (4k + 2 alpha + 2) D`.
pub fn biased_result_all2k1(n: usize, d: usize, k: usize, alpha: &BigRational) -> BigRational {
    let two = BigRational::from(BigInt::from(2));
    let i_avg = BigRational::from(BigInt::from(4 * k as i64 + 2)) + &two * alpha;
    expected_outcome(n, alpha) - i_avg * BigRational::from(BigInt::from(d as i64))
}

fn expected_outcome(n: usize, alpha: &BigRational) -> BigRational {
    let two = BigRational::from(BigInt::from(2));
    (two * alpha - BigRational::one()) * BigRational::from(BigInt::from(n as i64))
}

/// Maximum coalition size the protocol tolerates: `floor((m-1) * diameter / 2)`.
pub fn tolerance(m: usize, diameter: usize) -> usize {
    (m.saturating_sub(1)) * diameter / 2
}

/// Hoeffding-style bound on the probability that any node decides a wrong
/// value for some source: `N * exp(-2/(N-1) * ((m/2) * diameter - D)^2)`.
/// Requires `D < (m/2) * diameter` and `N >= 2`.
pub fn wrong_decision_bound(n: usize, m: usize, diameter: usize, d: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("bound needs N >= 2".into()));
    }
    let margin = (m as f64 / 2.0) * diameter as f64 - d as f64;
    if margin <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bound needs D < (m/2) * diameter, got D = {d}"
        )));
    }
    Ok(n as f64 * (-2.0 / (n as f64 - 1.0) * margin * margin).exp())
}

/// Worst-case per-node storage and message budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityBounds {
    /// `2(2k+1) + d_n + N + m(N-1) + (N-1)`: roles, neighbor list, id space,
    /// candidate values per source, decided values.
    pub spatial: u64,
    /// `(2k+1) + d_n + (N-1)(d_n - m)`: shares, own broadcast, forwards.
    pub message: u64,
}

/// Evaluate both budgets for a node of degree `d_n`.
pub fn complexity_bounds(k: usize, m: usize, n: usize, d_n: usize) -> Result<ComplexityBounds> {
    if m > d_n {
        return Err(Error::InvalidParameter(format!(
            "m = {m} exceeds node degree {d_n}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty system".into()));
    }
    let k = k as u64;
    let m64 = m as u64;
    let n64 = n as u64;
    let deg = d_n as u64;
    Ok(ComplexityBounds {
        spatial: 2 * (2 * k + 1) + deg + n64 + m64 * (n64 - 1) + (n64 - 1),
        message: (2 * k + 1) + deg + (n64 - 1) * (deg - m64),
    })
}

/// Worst-case effect of a single crash on the outcome: `3k + 2`
/// (`k+1` from dying mid-share, `2k+1` from a lost collected sum).
pub fn crash_impact_bound(k: usize) -> u64 {
    3 * k as u64 + 2
}
