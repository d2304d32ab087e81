//! Parametric income distributions on `(0, ∞)`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

/// Parameter order for each family is given in its doc comment. Every
/// parameter is positive except the lognormal location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    /// `(μ, σ)` of `ln x`.
    Lognormal,
    /// `(a, b)`: shape and scale, `F = 1 / (1 + (x/b)^−a)`.
    LogLogistic,
    /// `(α, σ)`: Lomax, `1 − F = (1 + x/σ)^−α`.
    Pareto2,
    /// `(p, θ)`: shape and scale.
    Gamma,
    /// `(a, β, p)`: `F = P(p, (x/β)^a)` with `P` the regularized lower
    /// incomplete gamma function.
    GeneralizedGamma,
    /// `(k, λ)`: shape and scale.
    Weibull,
    /// `(a, b, p)`: `F = (1 + (x/b)^−a)^−p`.
    Dagum,
    /// `(a, b, q)`: `1 − F = (1 + (x/b)^a)^−q`.
    SinghMaddala,
}

/// Summary of the data used to seed the optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartSummary {
    pub mean: f64,
    pub median: f64,
    /// Coefficient of variation.
    pub cv: f64,
    pub log_mean: f64,
    pub log_sd: f64,
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Lognormal,
        Family::LogLogistic,
        Family::Pareto2,
        Family::Gamma,
        Family::GeneralizedGamma,
        Family::Weibull,
        Family::Dagum,
        Family::SinghMaddala,
    ];

    pub fn k(self) -> usize {
        match self {
            Family::GeneralizedGamma | Family::Dagum | Family::SinghMaddala => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Lognormal => "lognormal",
            Family::LogLogistic => "loglogistic",
            Family::Pareto2 => "pareto2",
            Family::Gamma => "gamma",
            Family::GeneralizedGamma => "gengamma",
            Family::Weibull => "weibull",
            Family::Dagum => "dagum",
            Family::SinghMaddala => "singh-maddala",
        }
    }

    pub fn in_domain(self, theta: &[f64]) -> bool {
        theta.len() == self.k()
            && theta.iter().all(|t| t.is_finite())
            && theta
                .iter()
                .enumerate()
                .all(|(i, &t)| (self == Family::Lognormal && i == 0) || t > 0.0)
    }

    /// `(F(x), 1 − F(x))`, each computed without cancellation where it is small.
    pub fn cdf_sf(self, x: f64, theta: &[f64]) -> (f64, f64) {
        if x <= 0.0 {
            return (0.0, 1.0);
        }
        if x == f64::INFINITY {
            return (1.0, 0.0);
        }
        match self {
            Family::Lognormal => {
                let z = (x.ln() - theta[0]) / (theta[1] * SQRT_2);
                (0.5 * erfc(-z), 0.5 * erfc(z))
            }
            Family::LogLogistic => {
                let t = theta[0] * (x / theta[1]).ln();
                ((-softplus(-t)).exp(), (-softplus(t)).exp())
            }
            Family::Pareto2 => {
                let e = -theta[0] * (x / theta[1]).ln_1p();
                (-e.exp_m1(), e.exp())
            }
            Family::Gamma => incomplete_gamma(theta[0], x / theta[1]),
            Family::GeneralizedGamma => incomplete_gamma(theta[2], (x / theta[1]).powf(theta[0])),
            Family::Weibull => {
                let e = -(x / theta[1]).powf(theta[0]);
                (-e.exp_m1(), e.exp())
            }
            Family::Dagum => {
                let t = theta[0] * (x / theta[1]).ln();
                let e = -theta[2] * softplus(-t);
                (e.exp(), -e.exp_m1())
            }
            Family::SinghMaddala => {
                let t = theta[0] * (x / theta[1]).ln();
                let e = -theta[2] * softplus(t);
                (-e.exp_m1(), e.exp())
            }
        }
    }

    pub fn cdf(self, x: f64, theta: &[f64]) -> f64 {
        self.cdf_sf(x, theta).0
    }

    pub fn sf(self, x: f64, theta: &[f64]) -> f64 {
        self.cdf_sf(x, theta).1
    }

    pub fn ln_pdf(self, x: f64, theta: &[f64]) -> f64 {
        if !(x > 0.0) || !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        let lx = x.ln();
        match self {
            Family::Lognormal => {
                let z = (lx - theta[0]) / theta[1];
                -0.5 * z * z - lx - theta[1].ln() - 0.5 * (2.0 * PI).ln()
            }
            Family::LogLogistic => {
                let (a, b) = (theta[0], theta[1]);
                let t = a * (lx - b.ln());
                a.ln() - lx + t - 2.0 * softplus(t)
            }
            Family::Pareto2 => {
                let (alpha, s) = (theta[0], theta[1]);
                alpha.ln() - s.ln() - (alpha + 1.0) * (x / s).ln_1p()
            }
            Family::Gamma => {
                let (p, th) = (theta[0], theta[1]);
                (p - 1.0) * lx - x / th - ln_gamma(p) - p * th.ln()
            }
            Family::GeneralizedGamma => {
                let (a, beta, p) = (theta[0], theta[1], theta[2]);
                let t = a * (lx - beta.ln());
                a.ln() - lx + p * t - t.exp() - ln_gamma(p)
            }
            Family::Weibull => {
                let (k, lambda) = (theta[0], theta[1]);
                let t = k * (lx - lambda.ln());
                k.ln() - lx + t - t.exp()
            }
            Family::Dagum => {
                let (a, b, p) = (theta[0], theta[1], theta[2]);
                let t = a * (lx - b.ln());
                (a * p).ln() - lx + p * t - (p + 1.0) * softplus(t)
            }
            Family::SinghMaddala => {
                let (a, b, q) = (theta[0], theta[1], theta[2]);
                let t = a * (lx - b.ln());
                (a * q).ln() - lx + t - (q + 1.0) * softplus(t)
            }
        }
    }

    pub fn pdf(self, x: f64, theta: &[f64]) -> f64 {
        self.ln_pdf(x, theta).exp()
    }

    /// Whether `E[X^order]` is finite at `theta`.
    pub fn moment_exists(self, order: u32, theta: &[f64]) -> bool {
        let r = order as f64;
        match self {
            Family::LogLogistic | Family::Dagum => r < theta[0],
            Family::Pareto2 => r < theta[0],
            Family::SinghMaddala => r < theta[0] * theta[2],
            _ => true,
        }
    }

    /// Maps natural parameters to the unconstrained optimizer space: logs of
    /// the positive parameters, except for the generalized gamma, which uses
    /// the location-scale-shape form `(μ, ln σ, ln Q)` with `Q = 1/√p`,
    /// `σ = Q/a` and `μ = ln β + ln(p)/a`. That form stays well conditioned
    /// along the ridge toward the lognormal limit `Q → 0`.
    pub fn to_free(self, theta: &[f64]) -> Vec<f64> {
        match self {
            Family::Lognormal => vec![theta[0], theta[1].ln()],
            Family::GeneralizedGamma => {
                let (a, beta, p) = (theta[0], theta[1], theta[2]);
                let q = 1.0 / p.sqrt();
                vec![beta.ln() + p.ln() / a, (q / a).ln(), q.ln()]
            }
            _ => theta.iter().map(|t| t.ln()).collect(),
        }
    }

    pub fn from_free(self, phi: &[f64]) -> Vec<f64> {
        match self {
            Family::Lognormal => vec![phi[0], phi[1].exp()],
            Family::GeneralizedGamma => {
                let (mu, sigma, q) = (phi[0], phi[1].exp(), phi[2].exp());
                let p = 1.0 / (q * q);
                let a = q / sigma;
                vec![a, (mu - p.ln() / a).exp(), p]
            }
            _ => phi.iter().map(|t| t.exp()).collect(),
        }
    }

    /// Moment-style starting point from a data summary.
    pub fn base_start(self, s: &StartSummary) -> Vec<f64> {
        let log_sd = s.log_sd.max(1e-3);
        // Logistic in ln x with matching spread.
        let logistic_shape = PI / (3f64.sqrt() * log_sd);
        let cv2 = (s.cv * s.cv).max(1e-6);
        match self {
            Family::Lognormal => vec![s.log_mean, log_sd],
            Family::LogLogistic => vec![logistic_shape, s.median],
            Family::Pareto2 => {
                let alpha = if cv2 > 1.0 { (2.0 * cv2 / (cv2 - 1.0)).min(50.0) } else { 10.0 };
                vec![alpha, s.mean * (alpha - 1.0)]
            }
            Family::Gamma => vec![1.0 / cv2, s.mean * cv2],
            Family::GeneralizedGamma => vec![1.0, s.mean * cv2, 1.0 / cv2],
            Family::Weibull => {
                // Gumbel spread of ln x for a Weibull variate.
                let k = PI / (6f64.sqrt() * log_sd);
                vec![k, (s.log_mean + EULER_GAMMA / k).exp()]
            }
            Family::Dagum | Family::SinghMaddala => vec![logistic_shape, s.median, 1.0],
        }
    }

    /// Five deterministic starts around [`Family::base_start`], spread in the
    /// free parameter space.
    pub fn starts(self, s: &StartSummary) -> Vec<Vec<f64>> {
        let base = self.to_free(&self.base_start(s));
        let k = base.len();
        let patterns: [&dyn Fn(usize) -> f64; 5] = [
            &|_| 0.0,
            &|i| if i == 0 { 0.5 } else { 0.0 },
            &|i| if i == 0 { -0.5 } else { 0.0 },
            &|i| if i == k - 1 { 0.7 } else { 0.0 },
            &|i| if i % 2 == 0 { 0.3 } else { -0.3 },
        ];
        patterns
            .iter()
            .map(|p| {
                let phi: Vec<f64> = base.iter().enumerate().map(|(i, v)| v + p(i)).collect();
                self.from_free(&phi)
            })
            .collect()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        match key.as_str() {
            "lognormal" | "log-normal" => Ok(Family::Lognormal),
            "loglogistic" | "log-logistic" | "fisk" => Ok(Family::LogLogistic),
            "pareto2" | "pareto-2" | "lomax" => Ok(Family::Pareto2),
            "gamma" => Ok(Family::Gamma),
            "gengamma" | "generalized-gamma" | "ggamma" => Ok(Family::GeneralizedGamma),
            "weibull" => Ok(Family::Weibull),
            "dagum" => Ok(Family::Dagum),
            "singh-maddala" | "singhmaddala" | "burr" => Ok(Family::SinghMaddala),
            other => Err(format!("unknown family `{other}`")),
        }
    }
}

/// `ln(1 + eᵗ)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t + (-t).exp()
    } else if t < -30.0 {
        t.exp()
    } else {
        t.exp().ln_1p()
    }
}

/// `(P(p, z), Q(p, z))`.
fn incomplete_gamma(p: f64, z: f64) -> (f64, f64) {
    if !(z > 0.0) {
        return (0.0, 1.0);
    }
    if z == f64::INFINITY {
        return (1.0, 0.0);
    }
    if z < p {
        let lower = gamma_lr(p, z);
        (lower, 1.0 - lower)
    } else {
        let upper = gamma_ur(p, z);
        (1.0 - upper, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::quadrature::adaptive_simpson;
    use approx::assert_relative_eq;

    fn sample_theta(f: Family) -> Vec<f64> {
        match f {
            Family::Lognormal => vec![10.8, 0.7],
            Family::LogLogistic => vec![3.0, 50_000.0],
            Family::Pareto2 => vec![3.5, 120_000.0],
            Family::Gamma => vec![2.2, 25_000.0],
            Family::GeneralizedGamma => vec![1.4, 40_000.0, 1.3],
            Family::Weibull => vec![1.6, 60_000.0],
            Family::Dagum => vec![3.2, 55_000.0, 0.8],
            Family::SinghMaddala => vec![2.1, 70_000.0, 1.7],
        }
    }

    #[test]
    fn cdf_is_integral_of_pdf() {
        for f in Family::ALL {
            let theta = sample_theta(f);
            for x in [5_000.0f64, 40_000.0, 150_000.0] {
                // Integrate in ln x from far below; the Lomax density is positive at 0.
                let g = |t: f64| f.pdf(t.exp(), &theta) * t.exp();
                let area = adaptive_simpson(&g, (1e-12f64).ln(), x.ln(), 1e-13);
                assert!((area / f.cdf(x, &theta) - 1.0).abs() < 1e-8, "{f} {x} {area} {}", f.cdf(x, &theta));
                let (c, s) = f.cdf_sf(x, &theta);
                assert_relative_eq!(c + s, 1.0, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn far_tail_keeps_precision() {
        for f in Family::ALL {
            let theta = sample_theta(f);
            let s = f.sf(1e9, &theta);
            assert!((0.0..1e-3).contains(&s), "{f} {s}");
            assert!(f.cdf(1e-9, &theta) < 1e-3);
        }
        let th = [10.0, 1.0];
        assert!(Family::Lognormal.sf(1e9, &th) > 0.0);
    }

    #[test]
    fn free_space_round_trip() {
        for f in Family::ALL {
            let theta = sample_theta(f);
            let back = f.from_free(&f.to_free(&theta));
            for (a, b) in theta.iter().zip(&back) {
                assert_relative_eq!(a, b, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn moment_conditions() {
        assert!(!Family::Pareto2.moment_exists(1, &[0.9, 1.0]));
        assert!(Family::Pareto2.moment_exists(1, &[1.1, 1.0]));
        assert!(Family::Lognormal.moment_exists(2, &[0.0, 3.0]));
        assert!(!Family::Dagum.moment_exists(2, &[1.95, 1.0, 3.0]));
        assert!(Family::SinghMaddala.moment_exists(2, &[1.5, 1.0, 1.5]));
        assert!(!Family::SinghMaddala.moment_exists(2, &[1.5, 1.0, 1.3]));
    }

    #[test]
    fn dagum_second_moment_diverges_below_shape_two() {
        // Each hundredfold step of the truncation point adds more to the
        // second moment than the last when the shape is below two, and
        // progressively less when it is above.
        let truncated = |a: f64, upper: f64| {
            let theta = [a, 1.0, 1.0];
            let g = |t: f64| {
                let x = t.exp();
                x * x * Family::Dagum.pdf(x, &theta) * x
            };
            adaptive_simpson(&g, (1e-6f64).ln(), upper.ln(), 1e-10)
        };
        let below = [1e4, 1e6, 1e8].map(|u| truncated(1.95, u));
        assert!(below[2] - below[1] > below[1] - below[0]);
        let above = [1e4, 1e6, 1e8].map(|u| truncated(2.5, u));
        assert!(above[2] - above[1] < 0.2 * (above[1] - above[0]));
        assert!(!Family::Dagum.moment_exists(2, &[1.95, 1.0, 1.0]));
        assert!(Family::Dagum.moment_exists(2, &[2.5, 1.0, 1.0]));
    }

    #[test]
    fn names_parse_back() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("beta2".parse::<Family>().is_err());
    }

    #[test]
    fn starts_are_in_domain() {
        let s = StartSummary {
            mean: 60_000.0,
            median: 45_000.0,
            cv: 0.9,
            log_mean: 10.6,
            log_sd: 0.85,
        };
        for f in Family::ALL {
            let starts = f.starts(&s);
            assert_eq!(starts.len(), 5);
            assert!(starts.iter().all(|t| f.in_domain(t)), "{f}");
        }
    }
}
