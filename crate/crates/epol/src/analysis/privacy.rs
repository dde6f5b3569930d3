//! Closed-form disclosure probabilities and their upper bounds.
//!
//! Three disclosure rules are analyzed: *certain* (the coalition holds
//! `i+1` identical shares from a node, proving the vote), *greedy* (verdict
//! on the first `rho+1` identical shares) and *non-greedy* (majority of all
//! observed shares). `gamma[i]` weights the population by share count.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::combinatorics::{binomial, Probability};
use crate::{Error, Result};

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

fn check_population(n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "population must be positive".into(),
        ));
    }
    if d > n {
        return Err(Error::InvalidParameter(format!(
            "coalition {d} larger than population {n}"
        )));
    }
    Ok(())
}

fn check_gamma(k: usize, gamma: &[BigRational]) -> Result<()> {
    if gamma.len() != k + 1 {
        return Err(Error::InvalidParameter(format!(
            "gamma has {} entries, expected k+1 = {}",
            gamma.len(),
            k + 1
        )));
    }
    if gamma
        .iter()
        .any(|g| g < &BigRational::zero() || g > &BigRational::one())
    {
        return Err(Error::InvalidParameter(
            "gamma entries must lie in [0,1]".into(),
        ));
    }
    if gamma.iter().sum::<BigRational>() != BigRational::one() {
        return Err(Error::InvalidParameter("gamma must sum to 1".into()));
    }
    Ok(())
}

/// Certain disclosure for the class sending `2i+1` shares:
/// `gamma_i * C(D, i+1) / C(N, i+1)`.
pub fn p_ce_exact(n: usize, d: usize, i: usize, gamma_i: &BigRational) -> Result<Probability> {
    check_population(n, d)?;
    if i + 1 > n {
        return Err(Error::InvalidParameter(format!(
            "i+1 = {} exceeds N = {n}",
            i + 1
        )));
    }
    let value = gamma_i * ratio(binomial(d, i + 1), binomial(n, i + 1));
    Probability::new(value)
}

/// Bound for certain disclosure: `gamma_i * (D/N)^(i+1)`.
pub fn p_ce_bound(n: usize, d: usize, i: usize, gamma_i: &BigRational) -> Result<Probability> {
    check_population(n, d)?;
    let a = ratio(BigInt::from(d), BigInt::from(n));
    Probability::new(gamma_i * pow(&a, i + 1))
}

/// Population-level certain disclosure rate: the class values summed over
/// the whole `gamma` profile.
pub fn p_ce_total(n: usize, d: usize, k: usize, gamma: &[BigRational]) -> Result<Probability> {
    check_gamma(k, gamma)?;
    let mut total = BigRational::zero();
    for (i, g) in gamma.iter().enumerate() {
        total += p_ce_exact(n, d, i, g)?.into_rational();
    }
    Probability::new(total)
}

/// Greedy disclosure with trigger `rho+1`:
/// `sum_{i=rho}^{k} gamma_i * C(D, rho+1) * sum_{j=0}^{rho} C(D-rho-1, j) / C(N, j+rho+1)`.
pub fn p_gr_exact(
    n: usize,
    d: usize,
    rho: usize,
    k: usize,
    gamma: &[BigRational],
) -> Result<Probability> {
    check_population(n, d)?;
    check_gamma(k, gamma)?;
    if rho > k {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho} exceeds k = {k}"
        )));
    }
    if d < rho + 1 {
        return Probability::new(BigRational::zero());
    }
    let mut per_class = BigRational::zero();
    for j in 0..=rho {
        per_class += ratio(binomial(d - rho - 1, j), binomial(n, j + rho + 1));
    }
    per_class *= BigRational::from(binomial(d, rho + 1));
    let weight: BigRational = gamma[rho..].iter().sum();
    Probability::new(weight * per_class)
}

/// Bound for greedy disclosure:
/// `sum_{i=rho}^{k} gamma_i * (N+1)/(N-D+rho+2) * (D/(N-D+rho+1))^(rho+1)`,
/// capped at 1.
pub fn p_gr_bound(
    n: usize,
    d: usize,
    rho: usize,
    k: usize,
    gamma: &[BigRational],
) -> Result<Probability> {
    check_population(n, d)?;
    check_gamma(k, gamma)?;
    if rho > k {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho} exceeds k = {k}"
        )));
    }
    let weight: BigRational = gamma[rho..].iter().sum();
    let front = ratio(BigInt::from(n + 1), BigInt::from(n - d + rho + 2));
    let base = ratio(BigInt::from(d), BigInt::from(n - d + rho + 1));
    let value = weight * front * pow(&base, rho + 1);
    Probability::new(value.min(BigRational::one()))
}

/// Non-greedy disclosure:
/// `sum_i gamma_i * sum_{j=1}^{i+1} sum_{t=0}^{j-1} C(D,j) C(D-j,t) / C(N, j+t)`.
pub fn p_un_exact(n: usize, d: usize, k: usize, gamma: &[BigRational]) -> Result<Probability> {
    check_population(n, d)?;
    check_gamma(k, gamma)?;
    let mut total = BigRational::zero();
    for (i, g) in gamma.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let mut class = BigRational::zero();
        for j in 1..=(i + 1) {
            if j > d {
                break;
            }
            for t in 0..j {
                class += ratio(binomial(d, j) * binomial(d - j, t), binomial(n, j + t));
            }
        }
        total += g * class;
    }
    Probability::new(total)
}

/// Bound for non-greedy disclosure with `a = D/N`:
/// `(a / (1 - 2a)) * [1 - sum_i gamma_i (2a)^(2i+1)]`, capped at 1.
/// Undefined for `a >= 1/2` (the exact value is still computable).
pub fn p_un_bound(n: usize, d: usize, k: usize, gamma: &[BigRational]) -> Result<Probability> {
    check_population(n, d)?;
    check_gamma(k, gamma)?;
    let a = ratio(BigInt::from(d), BigInt::from(n));
    let half = ratio(BigInt::from(1), BigInt::from(2));
    if a >= half {
        return Err(Error::InvalidParameter(format!(
            "non-greedy bound requires D/N < 1/2, got {d}/{n}"
        )));
    }
    let two_a = &a + &a;
    let mut tail = BigRational::one();
    for (i, g) in gamma.iter().enumerate() {
        tail -= g * pow(&two_a, 2 * i + 1);
    }
    let value = &a / (BigRational::one() - &two_a) * tail;
    Probability::new(value.min(BigRational::one()))
}

/// Combined disclosure rate: certainty is preferred, then greedy, then
/// non-greedy, which at the population level evaluates to the max of the
/// three rates.
pub fn p_com(
    n: usize,
    d: usize,
    rho: usize,
    k: usize,
    gamma: &[BigRational],
) -> Result<Probability> {
    let ce = p_ce_total(n, d, k, gamma)?;
    let gr = p_gr_exact(n, d, rho, k, gamma)?;
    let un = p_un_exact(n, d, k, gamma)?;
    Ok(ce.max(gr).max(un))
}

fn pow(base: &BigRational, exp: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::rational_from_decimal;

    fn rat(s: &str) -> BigRational {
        rational_from_decimal(s).unwrap()
    }

    #[test]
    fn certain_small_case_is_one_fifteenth() {
        // N=10, D=3, i=1, gamma_i=1: C(3,2)/C(10,2) = 3/45 = 1/15
        let p = p_ce_exact(10, 3, 1, &BigRational::one()).unwrap();
        assert_eq!(p.as_rational(), &BigRational::new(1.into(), 15.into()));
    }

    #[test]
    fn certain_bound_at_reference_parameters() {
        // N=100, D=20, i=3: (1/5)^4 = 0.0016
        let p = p_ce_bound(100, 20, 3, &BigRational::one()).unwrap();
        assert_eq!(p.as_rational(), &rat("0.0016"));
    }

    #[test]
    fn empty_coalition_discloses_nothing() {
        let gamma = [rat("0.5"), rat("0.5")];
        assert!(p_ce_total(100, 0, 1, &gamma)
            .unwrap()
            .as_rational()
            .is_zero());
        assert!(p_gr_exact(100, 0, 0, 1, &gamma)
            .unwrap()
            .as_rational()
            .is_zero());
        assert!(p_un_exact(100, 0, 1, &gamma)
            .unwrap()
            .as_rational()
            .is_zero());
    }

    #[test]
    fn greedy_collapses_to_d_over_n() {
        // rho = k = 0: C(D,1)*C(D-1,0)/C(N,1) = D/N
        for (n, d) in [(10, 3), (100, 20), (8, 2)] {
            let p = p_gr_exact(n, d, 0, 0, &[BigRational::one()]).unwrap();
            assert_eq!(p.as_rational(), &ratio(d.into(), n.into()));
        }
    }

    #[test]
    fn non_greedy_collapses_to_d_over_n() {
        for (n, d) in [(8, 2), (100, 10)] {
            let p = p_un_exact(n, d, 0, &[BigRational::one()]).unwrap();
            assert_eq!(p.as_rational(), &ratio(d.into(), n.into()));
        }
    }

    #[test]
    fn combined_is_max_and_k0_collapses() {
        let gamma = [BigRational::one()];
        let p = p_com(10, 3, 0, 0, &gamma).unwrap();
        assert_eq!(p.as_rational(), &ratio(3.into(), 10.into()));
        // componentwise max dominates each strategy
        let gamma = [rat("0.3"), rat("0.7")];
        let com = p_com(60, 9, 0, 1, &gamma).unwrap();
        assert!(com >= p_ce_total(60, 9, 1, &gamma).unwrap());
        assert!(com >= p_gr_exact(60, 9, 0, 1, &gamma).unwrap());
        assert!(com >= p_un_exact(60, 9, 1, &gamma).unwrap());
    }

    #[test]
    fn bounds_dominate_exact_values() {
        let gammas = [
            vec![BigRational::one(), BigRational::zero()],
            vec![rat("0.5"), rat("0.5")],
            vec![BigRational::zero(), BigRational::one()],
        ];
        for gamma in &gammas {
            for d in [0, 1, 5, 10, 20, 40] {
                for i in 0..=1 {
                    assert!(
                        p_ce_bound(100, d, i, &gamma[i]).unwrap()
                            >= p_ce_exact(100, d, i, &gamma[i]).unwrap()
                    );
                }
                for rho in 0..=1 {
                    assert!(
                        p_gr_bound(100, d, rho, 1, gamma).unwrap()
                            >= p_gr_exact(100, d, rho, 1, gamma).unwrap()
                    );
                }
                assert!(
                    p_un_bound(100, d, 1, gamma).unwrap() >= p_un_exact(100, d, 1, gamma).unwrap()
                );
            }
        }
    }

    #[test]
    fn exact_values_nondecreasing_in_coalition_size() {
        let gamma = vec![rat("0.4"), rat("0.6")];
        let mut prev_ce = BigRational::zero();
        let mut prev_gr = BigRational::zero();
        let mut prev_un = BigRational::zero();
        for d in 0..=30 {
            let ce = p_ce_total(100, d, 1, &gamma).unwrap().into_rational();
            let gr = p_gr_exact(100, d, 0, 1, &gamma).unwrap().into_rational();
            let un = p_un_exact(100, d, 1, &gamma).unwrap().into_rational();
            assert!(ce >= prev_ce && gr >= prev_gr && un >= prev_un, "D = {d}");
            prev_ce = ce;
            prev_gr = gr;
            prev_un = un;
        }
    }

    #[test]
    fn non_greedy_bound_needs_small_coalitions() {
        let gamma = [BigRational::one()];
        assert!(p_un_bound(10, 5, 0, &gamma).is_err());
        assert!(p_un_bound(10, 4, 0, &gamma).is_ok());
    }
}
