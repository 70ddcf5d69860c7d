//! Excess-risk evaluation and rate measurement.
//!
//! Excess risk of a classifier `h` is `E[ max_y eta_y(X) - eta_{h(X)}(X) ]`.
//! The built-in families integrate it exactly for cellwise-constant
//! classifiers; a Monte-Carlo estimator covers everything else. Empirical
//! rate exponents come from ordinary least squares of `ln risk` on `ln n`.

use crate::dist::Dist;
use crate::learner::CandidateLabelMap;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskMethod {
    Exact,
    MonteCarlo,
}

/// A point estimate of excess risk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub value: f64,
    pub method: RiskMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_points: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
}

/// Unbiased Monte-Carlo estimate of the excess risk of the classifier
/// `x -> min L_{cell(x)}` over `m` fresh draws of `X`.
pub fn excess_risk_mc(
    classifier: &CandidateLabelMap,
    dist: &dyn Dist,
    m: u64,
    seed: u64,
) -> Result<RiskEstimate> {
    if m == 0 {
        return Err(Error::domain("monte-carlo evaluation needs m >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dist.dim();
    let l = dist.label_count();
    let mut x = vec![0.0; d];
    let mut eta = vec![0.0; l];
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..m {
        dist.sample_x_into(&mut rng, &mut x);
        dist.eta_into(&x, &mut eta);
        let top = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let h = classifier.classify(&x)?;
        let gap = top - eta[h as usize - 1];
        let delta = gap - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (gap - mean);
    }
    let se = if m > 1 {
        (m2 / (m as f64 - 1.0) / m as f64).sqrt()
    } else {
        0.0
    };
    Ok(RiskEstimate {
        value: mean,
        method: RiskMethod::MonteCarlo,
        mc_points: Some(m),
        standard_error: Some(se),
    })
}

/// Exact excess risk via the family's closed-form integration. Errors when
/// the distribution does not expose one.
pub fn excess_risk_exact(
    classifier: &CandidateLabelMap,
    dist: &dyn Dist,
) -> Result<RiskEstimate> {
    match dist.exact_excess_risk(classifier) {
        Some(value) => Ok(RiskEstimate {
            value,
            method: RiskMethod::Exact,
            mc_points: None,
            standard_error: None,
        }),
        None => Err(Error::UnsupportedSpec(format!(
            "distribution `{}` has no exact risk integration",
            dist.id()
        ))),
    }
}

/// The four theoretical rate exponents for parameters `(alpha, beta, beta', d)`:
/// risk decays as `n^(-exponent)` in each regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    /// Passive minimax under strong density — and the active floor there.
    pub passive_strong_density: f64,
    /// Active rate under a sharp margin (unique Bayes), strong density.
    pub active_sharp: f64,
    /// Active rate for general marginals.
    pub active_general: f64,
    /// Passive minimax for general marginals.
    pub passive_general: f64,
}

pub fn theoretical_exponents(alpha: f64, beta: f64, beta_prime: f64, d: usize) -> Result<Exponents> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain("alpha must lie in (0,1]"));
    }
    if beta < 0.0 || beta_prime < 0.0 || d == 0 {
        return Err(Error::domain("beta, beta' must be nonnegative and d >= 1"));
    }
    if alpha * beta_prime > d as f64 {
        return Err(Error::domain(format!(
            "alpha*beta' = {} exceeds d = {d}",
            alpha * beta_prime
        )));
    }
    let d = d as f64;
    Ok(Exponents {
        passive_strong_density: alpha * (beta + 1.0) / (2.0 * alpha + d),
        active_sharp: alpha * (beta_prime + 1.0) / (2.0 * alpha + d - alpha * beta_prime),
        active_general: alpha * (beta + 1.0) / (2.0 * alpha + d),
        passive_general: alpha * (beta + 1.0) / (2.0 * alpha + d + alpha * beta),
    })
}

/// Least-squares fit of `ln risk` against `ln n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateFit {
    /// Fitted slope; the empirical exponent is its negation.
    pub slope: f64,
    pub intercept: f64,
    pub residual_se: f64,
    /// The `(n, risk)` points actually used.
    pub points: Vec<(f64, f64)>,
    /// Points excluded because their risk was exactly zero (or below).
    pub dropped_zero_risk: usize,
}

/// Fits `ln(risk) = intercept + slope * ln(n)` by ordinary least squares.
/// Zero-risk points are dropped (and counted); at least 3 usable points with
/// distinct `n` are required.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let mut usable: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    let mut dropped = 0usize;
    for &(n, risk) in points {
        if !(n > 0.0) || !n.is_finite() || !risk.is_finite() {
            return Err(Error::domain(format!("invalid point ({n}, {risk})")));
        }
        if risk > 0.0 {
            usable.push((n, risk));
        } else {
            dropped += 1;
        }
    }
    if usable.len() < 3 {
        return Err(Error::domain(format!(
            "need at least 3 positive-risk points, have {}",
            usable.len()
        )));
    }
    {
        let mut ns: Vec<f64> = usable.iter().map(|p| p.0).collect();
        ns.sort_by(f64::total_cmp);
        if ns.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("budgets must be distinct for a rate fit"));
        }
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let residual_se = if usable.len() > 2 {
        (ssr / (k - 2.0)).sqrt()
    } else {
        0.0
    };
    Ok(RateFit {
        slope,
        intercept,
        residual_se,
        points: usable,
        dropped_zero_risk: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{LowerBoundDist, LowerBoundParams, PiecewiseConst1d, UniformConst};
    use crate::dist::lowerbound::ZSigmaAssignment;
    use crate::labels::LabelSet;

    #[test]
    fn mc_risk_of_bayes_is_zero_and_constant_gap_exact() {
        let d = UniformConst::new(1, vec![0.3, 0.7], "c".into()).unwrap();
        // Bayes: label 2 everywhere
        let bayes = CandidateLabelMap::constant(2, 1, LabelSet::singleton(2), 2);
        let est = excess_risk_mc(&bayes, &d, 2000, 1).unwrap();
        assert_eq!(est.value, 0.0);
        // h = 1 everywhere: integrand is the constant 0.4, so se = 0
        let h1 = CandidateLabelMap::constant(2, 1, LabelSet::singleton(1), 2);
        let est = excess_risk_mc(&h1, &d, 2000, 1).unwrap();
        assert!((est.value - 0.4).abs() < 1e-15);
        assert_eq!(est.standard_error.unwrap(), 0.0);
    }

    #[test]
    fn mc_matches_exact_within_three_se() {
        let d = PiecewiseConst1d::new(
            vec![0.0, 0.3, 1.0],
            vec![vec![0.8, 0.2], vec![0.2, 0.8]],
            vec![1.0, 1.0],
            "two-region".into(),
        )
        .unwrap();
        let map = CandidateLabelMap::constant(3, 1, LabelSet::singleton(1), 2);
        let exact = excess_risk_exact(&map, &d).unwrap().value;
        let mut within = 0;
        let trials = 500;
        for seed in 0..trials {
            let est = excess_risk_mc(&map, &d, 4000, seed).unwrap();
            let se = est.standard_error.unwrap();
            if (est.value - exact).abs() <= 3.0 * se {
                within += 1;
            }
        }
        // 3 sigma: ~99.7% coverage; demand at least 99%
        assert!(within as f64 >= 0.99 * trials as f64, "within {within}/{trials}");
    }

    #[test]
    fn exact_risk_unsupported_spec_errors() {
        struct Opaque;
        impl Dist for Opaque {
            fn dim(&self) -> usize {
                1
            }
            fn label_count(&self) -> usize {
                2
            }
            fn eta_into(&self, _x: &[f64], out: &mut [f64]) {
                out[0] = 0.5;
                out[1] = 0.5;
            }
            fn sample_x_into(&self, rng: &mut dyn rand::RngCore, out: &mut [f64]) {
                use rand::Rng;
                out[0] = rng.random();
            }
            fn id(&self) -> &str {
                "opaque"
            }
        }
        let map = CandidateLabelMap::full(1, 1, 2);
        assert!(matches!(
            excess_risk_exact(&map, &Opaque),
            Err(Error::UnsupportedSpec(_))
        ));
    }

    #[test]
    fn exact_risk_zero_iff_bayes_on_positive_mass() {
        let params = LowerBoundParams::from_level(2, 1.0, 1.0, 1.0, 1).unwrap();
        let zs = ZSigmaAssignment {
            level: 2,
            dim: 1,
            z: vec![true, false, true, false],
            sigma: vec![-1, 1, 1, -1],
        };
        let d = LowerBoundDist::new(params, zs, "lb".into());
        // cheater matching sigma on z=1 cells has exactly zero risk
        let sets = vec![
            LabelSet::singleton(2),
            LabelSet::singleton(1),
            LabelSet::singleton(1),
            LabelSet::singleton(1),
        ];
        let cheater = CandidateLabelMap::new(2, 1, 2, sets);
        assert_eq!(excess_risk_exact(&cheater, &d).unwrap().value, 0.0);
        // flipping one z=1 cell makes it strictly positive
        let sets = vec![
            LabelSet::singleton(1),
            LabelSet::singleton(1),
            LabelSet::singleton(1),
            LabelSet::singleton(1),
        ];
        let off = CandidateLabelMap::new(2, 1, 2, sets);
        assert!(excess_risk_exact(&off, &d).unwrap().value > 0.0);
    }

    #[test]
    fn exponent_examples() {
        let e = theoretical_exponents(1.0, 1.0, 1.0, 1).unwrap();
        assert!((e.passive_strong_density - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.active_sharp - 1.0).abs() < 1e-15);
        assert!((e.active_general - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.passive_general - 0.5).abs() < 1e-15);
        assert!(theoretical_exponents(1.0, 1.0, 3.0, 1).is_err());
    }

    #[test]
    fn fit_rate_examples() {
        // exact power law risk = 5 n^{-1/2}
        let pts: Vec<(f64, f64)> = (4..10)
            .map(|e| {
                let n = (1u64 << e) as f64;
                (n, 5.0 * n.powf(-0.5))
            })
            .collect();
        let fit = fit_rate(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.residual_se < 1e-12);
        assert!((fit.intercept - 5.0f64.ln()).abs() < 1e-12);

        // constant risk: slope 0
        let pts: Vec<(f64, f64)> = (4..10).map(|e| ((1u64 << e) as f64, 0.25)).collect();
        let fit = fit_rate(&pts).unwrap();
        assert!(fit.slope.abs() < 1e-12);

        // zero risks are dropped and counted
        let pts = vec![(16.0, 0.0), (32.0, 0.1), (64.0, 0.05), (128.0, 0.02)];
        let fit = fit_rate(&pts).unwrap();
        assert_eq!(fit.dropped_zero_risk, 1);
        assert_eq!(fit.points.len(), 3);

        assert!(fit_rate(&[(16.0, 0.1), (32.0, 0.2)]).is_err());
        assert!(fit_rate(&[(16.0, 0.1), (16.0, 0.2), (32.0, 0.1)]).is_err());
    }

    #[test]
    fn fit_rate_noise_robustness() {
        // multiplicative noise exp(N(0, 0.01)) moves the slope by little on
        // average over a 6-point dyadic grid
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let normal = Normal::new(0.0, 0.1).unwrap();
        let mut total = 0.0;
        let seeds = 200;
        for seed in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<(f64, f64)> = (5..11)
                .map(|e| {
                    let n = (1u64 << e) as f64;
                    let noise: f64 = normal.sample(&mut rng);
                    (n, 5.0 * n.powf(-0.5) * noise.exp())
                })
                .collect();
            let fit = fit_rate(&pts).unwrap();
            total += (fit.slope + 0.5).abs();
        }
        let mean_dev = total / seeds as f64;
        assert!(mean_dev <= 0.05, "mean slope deviation {mean_dev}");
    }

    #[test]
    fn fit_rate_scale_equivariance() {
        let pts = vec![(16.0, 0.4), (32.0, 0.3), (64.0, 0.1), (128.0, 0.09)];
        let fit = fit_rate(&pts).unwrap();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(n, r)| (n, 7.0 * r)).collect();
        let fit2 = fit_rate(&scaled).unwrap();
        assert!((fit.slope - fit2.slope).abs() < 1e-12);
        assert!((fit2.intercept - fit.intercept - 7.0f64.ln()).abs() < 1e-12);
    }
}
