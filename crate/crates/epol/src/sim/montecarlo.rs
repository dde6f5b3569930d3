//! Trial aggregation helpers.

use super::seeds::stream_rng;
use rand::Rng;

/// Mean, variance and a z-style confidence half-width over samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    /// 3 standard errors of the mean; the tolerance every
    /// simulation-versus-theory comparison uses.
    pub three_sigma: f64,
}

/// Aggregate a sample set.
pub fn mc_mean_ci(samples: &[f64]) -> Aggregate {
    let count = samples.len();
    if count == 0 {
        return Aggregate {
            count,
            mean: f64::NAN,
            variance: f64::NAN,
            three_sigma: f64::NAN,
        };
    }
    let mean = samples.iter().sum::<f64>() / count as f64;
    let variance = if count > 1 {
        samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count as f64 - 1.0)
    } else {
        0.0
    };
    Aggregate {
        count,
        mean,
        variance,
        three_sigma: 3.0 * (variance / count as f64).sqrt(),
    }
}

/// Run `trials` independent evaluations of `f`, where trial `t` receives the
/// derived seed for `(master, "trial", t)`, and aggregate the samples.
pub fn monte_carlo<F: FnMut(u64, u64) -> f64>(master: u64, trials: u64, mut f: F) -> Aggregate {
    let samples: Vec<f64> = (0..trials)
        .map(|t| {
            let trial_seed: u64 = stream_rng(master, "trial", t).gen();
            f(t, trial_seed)
        })
        .collect();
    mc_mean_ci(&samples)
}

/// Three-sigma band for a Bernoulli estimate: `3 * sqrt(p(1-p)/T)`.
pub fn bernoulli_three_sigma(p: f64, trials: u64) -> f64 {
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trial_equals_the_sample() {
        let agg = monte_carlo(1, 1, |_, _| 4.25);
        assert_eq!(agg.count, 1);
        assert_eq!(agg.mean, 4.25);
        assert_eq!(agg.variance, 0.0);
    }

    #[test]
    fn aggregates_are_sane() {
        let agg = mc_mean_ci(&[1.0, 2.0, 3.0]);
        assert!((agg.mean - 2.0).abs() < 1e-12);
        assert!((agg.variance - 1.0).abs() < 1e-12);
    }
}
