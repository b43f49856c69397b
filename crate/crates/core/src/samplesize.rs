//! Sample-size arithmetic for the classical and scaled scenario approaches.
//!
//! The classical bound prescribes `N(eps, beta) = ceil((2/eps)(ln(1/beta) + n))`
//! samples for a convex program with `n` free decision variables. The scaled
//! variant evaluates the same bound at the inflated violation level
//! `eps^(s^-alpha)`, which is what makes the scaling factor `s >= 1` pay off:
//! as `eps -> 0` the scaled requirement grows only like `eps^(-s^-alpha)`.
//!
//! The ceiling is applied exactly once, to the full product, in natural
//! logarithms. With this convention `classical_size(0.001, 0.05, 1) = 7992`.

use crate::error::{Error, Result};

/// User-facing knobs of a scenario run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub epsilon: f64,
    pub beta: f64,
    pub n_dims: usize,
    pub scale: f64,
    pub alpha: f64,
}

impl ScenarioConfig {
    pub fn new(epsilon: f64, beta: f64, n_dims: usize, scale: f64, alpha: f64) -> Result<Self> {
        check_unit_open(epsilon, "epsilon")?;
        check_unit_open(beta, "beta")?;
        if n_dims < 1 {
            return Err(Error::invalid("n_dims must be at least 1"));
        }
        if !(scale >= 1.0) || !scale.is_finite() {
            return Err(Error::invalid(format!("scale must be >= 1, got {scale}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
        }
        Ok(ScenarioConfig {
            epsilon,
            beta,
            n_dims,
            scale,
            alpha,
        })
    }

    pub fn classical_size(&self) -> u64 {
        classical_size(self.epsilon, self.beta, self.n_dims).expect("validated at construction")
    }

    pub fn scaled_size(&self) -> u64 {
        scaled_size(self.epsilon, self.beta, self.n_dims, self.scale, self.alpha)
            .expect("validated at construction")
    }
}

fn check_unit_open(v: f64, name: &str) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::invalid(format!(
            "{name} must lie strictly inside (0,1), got {v}"
        )));
    }
    Ok(())
}

/// Classical scenario bound `ceil((2/eps)(ln(1/beta) + n))`.
///
/// `n_dims = 0` is accepted so the pure bound can be probed in isolation.
pub fn classical_size(epsilon: f64, beta: f64, n_dims: usize) -> Result<u64> {
    check_unit_open(epsilon, "epsilon")?;
    check_unit_open(beta, "beta")?;
    let t = (2.0 / epsilon) * ((1.0 / beta).ln() + n_dims as f64);
    if !t.is_finite() || t > u64::MAX as f64 {
        return Err(Error::invalid(format!(
            "sample size overflows for epsilon={epsilon}, beta={beta}"
        )));
    }
    Ok(t.ceil() as u64)
}

/// Effective violation level `eps^(s^-alpha)` targeted by the scaled bound.
pub fn effective_epsilon(epsilon: f64, scale: f64, alpha: f64) -> Result<f64> {
    check_unit_open(epsilon, "epsilon")?;
    if !(scale >= 1.0) || !scale.is_finite() {
        return Err(Error::invalid(format!("scale must be >= 1, got {scale}")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
    }
    Ok(epsilon.powf(scale.powf(-alpha)))
}

/// Scaled scenario bound: the classical bound evaluated at `eps^(s^-alpha)`.
///
/// Reduces exactly to [`classical_size`] when `scale == 1`.
pub fn scaled_size(epsilon: f64, beta: f64, n_dims: usize, scale: f64, alpha: f64) -> Result<u64> {
    let eff = effective_epsilon(epsilon, scale, alpha)?;
    classical_size(eff, beta, n_dims)
}

/// Log-ratio `ln N(eps^(s^-alpha), beta) / ln N(eps, beta)`.
///
/// Tends to `1/s^alpha` as `eps -> 0`; equals 1 exactly at `s = 1`.
pub fn reduction_exponent(
    epsilon: f64,
    beta: f64,
    scale: f64,
    alpha: f64,
    n_dims: usize,
) -> Result<f64> {
    let num = scaled_size(epsilon, beta, n_dims, scale, alpha)?;
    let den = classical_size(epsilon, beta, n_dims)?;
    if den < 2 || num < 2 {
        return Err(Error::invalid(
            "reduction exponent needs both sample sizes >= 2; decrease epsilon".to_string(),
        ));
    }
    if num == den {
        return Ok(1.0);
    }
    Ok((num as f64).ln() / (den as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use astro_float::{BigFloat, Consts, RoundingMode};
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn classical_matches_published_examples() {
        assert_eq!(classical_size(0.001, 0.05, 1).unwrap(), 7992);
        assert_eq!(classical_size(0.001, 0.05, 2).unwrap(), 9992);
        // n = 0 with beta = 1/e forces ceil(4 * 1) = 4
        assert_eq!(classical_size(0.5, (-1.0f64).exp(), 0).unwrap(), 4);
    }

    #[test]
    fn scaled_matches_published_examples() {
        let n = scaled_size(0.001, 0.05, 1, 1.2, 2.0).unwrap();
        assert!((968..=970).contains(&n), "got {n}");
        assert_eq!(scaled_size(0.001, 0.05, 1, 1.0, 2.0).unwrap(), 7992);
        assert_eq!(scaled_size(0.001, 0.05, 2, 1.2, 2.0).unwrap(), 1211);
    }

    #[test]
    fn scaled_equals_classical_at_unit_scale() {
        for &(e, b, n) in &[(0.01, 0.05, 3usize), (0.2, 0.4, 1), (1e-5, 0.01, 7)] {
            assert_eq!(
                scaled_size(e, b, n, 1.0, 2.0).unwrap(),
                classical_size(e, b, n).unwrap()
            );
        }
    }

    #[test]
    fn reduction_exponent_examples() {
        // unit scale is exactly 1 regardless of the rest
        assert_eq!(reduction_exponent(0.01, 0.05, 1.0, 2.0, 1).unwrap(), 1.0);

        // eps = 1e-8, s = 1.2, alpha = 2: close to 1/1.44
        let r = reduction_exponent(1e-8, 0.05, 1.2, 2.0, 1).unwrap();
        assert!((r - 1.0 / 1.44).abs() < 0.05, "r = {r}");

        // eps = 1e-4, s = 2, alpha = 1: direct evaluation of the defining ratio
        let num = scaled_size(1e-4, 0.05, 1, 2.0, 1.0).unwrap() as f64;
        let den = classical_size(1e-4, 0.05, 1).unwrap() as f64;
        let expected = num.ln() / den.ln();
        let r = reduction_exponent(1e-4, 0.05, 2.0, 1.0, 1).unwrap();
        assert!((r - expected).abs() < 1e-12);
        // finite-eps value sits above the 1/s^alpha limit and within 0.1 of it
        assert!(r > 0.5 && (r - 0.5).abs() < 0.1, "r = {r}");
    }

    #[test]
    fn reduction_exponent_approaches_limit_from_above() {
        let mut prev = f64::INFINITY;
        for &e in &[1e-4, 1e-6, 1e-8, 1e-10, 1e-12] {
            let r = reduction_exponent(e, 0.05, 1.2, 2.0, 1).unwrap();
            assert!(r >= 1.0 / 1.44 - 1e-12);
            assert!(r <= prev + 1e-12, "not decreasing at eps={e}");
            prev = r;
        }
    }

    #[test]
    fn monotone_on_grid() {
        let epss = [0.5, 0.1, 0.05, 0.01, 0.001];
        let betas = [0.5, 0.2, 0.05, 0.01];
        let ns = [1usize, 2, 5, 10];
        for w in epss.windows(2) {
            for &b in &betas {
                for &n in &ns {
                    assert!(
                        classical_size(w[1], b, n).unwrap() >= classical_size(w[0], b, n).unwrap()
                    );
                }
            }
        }
        for w in betas.windows(2) {
            for &e in &epss {
                for &n in &ns {
                    assert!(
                        classical_size(e, w[1], n).unwrap() >= classical_size(e, w[0], n).unwrap()
                    );
                }
            }
        }
        for w in ns.windows(2) {
            for &e in &epss {
                for &b in &betas {
                    assert!(
                        classical_size(e, b, w[1]).unwrap() >= classical_size(e, b, w[0]).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn scaled_never_exceeds_classical() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let e = 10f64.powf(rng.gen_range(-8.0..-0.31));
            let b = rng.gen_range(0.001..0.5);
            let n = rng.gen_range(1..10usize);
            let s = rng.gen_range(1.0..3.0);
            let a = rng.gen_range(0.2..4.0);
            assert!(scaled_size(e, b, n, s, a).unwrap() <= classical_size(e, b, n).unwrap());
        }
    }

    /// 200-bit reference evaluation of ceil((2/eps)(ln(1/beta)+n)).
    fn reference_size(epsilon: f64, beta: f64, n_dims: usize, prec: usize) -> (u64, f64) {
        let rm = RoundingMode::ToEven;
        let mut cc = Consts::new().unwrap();
        let e = BigFloat::from_f64(epsilon, prec);
        let b = BigFloat::from_f64(beta, prec);
        let two = BigFloat::from_f64(2.0, prec);
        let n = BigFloat::from_f64(n_dims as f64, prec);
        let ln_inv_beta = b.reciprocal(prec, rm).ln(prec, rm, &mut cc);
        let t = two.div(&e, prec, rm).mul(&ln_inv_beta.add(&n, prec, rm), prec, rm);
        // distance from t to the nearest integer, for boundary detection
        let floor = t.floor();
        let frac = t.sub(&floor, prec, rm);
        let frac_f64: f64 = frac.to_string().parse().unwrap_or(0.5);
        let ceiled = if frac.is_zero() { floor } else { floor.add(&BigFloat::from_f64(1.0, prec), prec, rm) };
        let v: f64 = ceiled.to_string().parse().unwrap();
        let dist_to_int = frac_f64.min(1.0 - frac_f64);
        (v as u64, dist_to_int)
    }

    #[test]
    fn exactness_against_high_precision_reference() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let e = 10f64.powf(rng.gen_range(-6.0..-0.5));
            let b = rng.gen_range(0.001..0.9);
            let n = rng.gen_range(0..12usize);
            let got = classical_size(e, b, n).unwrap();
            let (want, dist) = reference_size(e, b, n, 192);
            if got != want {
                assert!(
                    got.abs_diff(want) <= 1 && dist < 1e-9,
                    "eps={e} beta={b} n={n}: got {got}, reference {want}, dist {dist}"
                );
            }
        }
    }

    #[test]
    fn domain_violations_are_rejected() {
        assert!(classical_size(0.0, 0.05, 1).is_err());
        assert!(classical_size(1.0, 0.05, 1).is_err());
        assert!(classical_size(0.1, 0.0, 1).is_err());
        assert!(classical_size(0.1, 1.0, 1).is_err());
        assert!(scaled_size(0.1, 0.05, 1, 0.9, 2.0).is_err());
        assert!(scaled_size(0.1, 0.05, 1, 1.5, 0.0).is_err());
        assert!(ScenarioConfig::new(0.1, 0.05, 0, 1.0, 2.0).is_err());
    }
}
