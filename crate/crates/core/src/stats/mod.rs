//! Income statistics from fitted distributions and weighted point masses.
//!
//! Continuous distributions expose themselves through [`FittedDistribution`].
//! Piecewise-polynomial fits (step and spline densities) report their knots via
//! [`FittedDistribution::breakpoints`]; the engine then integrates each piece
//! with a rule that is exact for the polynomial integrands (mean, second
//! moment, `F(1−F)`), and with closed forms or adaptive Simpson for the
//! logarithmic ones. Smooth distributions are integrated in `ln x` with
//! adaptive Simpson between far quantiles.

pub mod quadrature;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::midpoint::WeightedPointMass;
use quadrature::{adaptive_simpson, composite_simpson, gauss_legendre_10};

/// Incomes below this floor are raised to it inside logarithms.
pub const DEFAULT_LOG_FLOOR: f64 = 1.0;

/// Probability left outside the integration range of smooth distributions, per side.
const SMOOTH_TAIL_MASS: f64 = 1e-15;

/// Relative accuracy asked of each smooth integral.
const SMOOTH_REL_TOL: f64 = 1e-11;

/// Continuous income distribution.
pub trait FittedDistribution {
    fn cdf(&self, x: f64) -> f64;
    fn pdf(&self, x: f64) -> f64;

    /// `1 − cdf(x)`; override when it can be computed without cancellation.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// `(start, end)` of the support; `end` may be `+∞`.
    fn support(&self) -> (f64, f64);

    /// Knots between which the density is a polynomial of degree ≤ 2. Only
    /// meaningful for finite support; empty means "smooth".
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `true` when the density is constant between consecutive breakpoints.
    fn piecewise_constant(&self) -> bool {
        false
    }

    fn moment_exists(&self, _order: u32) -> bool {
        true
    }
}

impl<D: FittedDistribution + ?Sized> FittedDistribution for &D {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn pdf(&self, x: f64) -> f64 {
        (**self).pdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        (**self).sf(x)
    }
    fn support(&self) -> (f64, f64) {
        (**self).support()
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn piecewise_constant(&self) -> bool {
        (**self).piecewise_constant()
    }
    fn moment_exists(&self, order: u32) -> bool {
        (**self).moment_exists(order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Statistic {
    Mean,
    Median,
    Sd,
    Gini,
    Theil,
    Mld,
    Cv,
    /// Quantile at the given probability.
    Quantile(f64),
}

impl Statistic {
    pub const STANDARD: [Statistic; 7] = [
        Statistic::Mean,
        Statistic::Median,
        Statistic::Sd,
        Statistic::Gini,
        Statistic::Theil,
        Statistic::Mld,
        Statistic::Cv,
    ];
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Mean => f.write_str("mean"),
            Statistic::Median => f.write_str("median"),
            Statistic::Sd => f.write_str("sd"),
            Statistic::Gini => f.write_str("gini"),
            Statistic::Theil => f.write_str("theil"),
            Statistic::Mld => f.write_str("mld"),
            Statistic::Cv => f.write_str("cv"),
            Statistic::Quantile(p) => write!(f, "p{}", p * 100.0),
        }
    }
}

impl FromStr for Statistic {
    type Err = String;

    /// Accepts `mean`, `median`, `sd`, `gini`, `theil`, `mld`, `cv` and
    /// percentiles `pNN` (for example `p10`, `p99.5`).
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "mean" => Statistic::Mean,
            "median" => Statistic::Median,
            "sd" => Statistic::Sd,
            "gini" => Statistic::Gini,
            "theil" => Statistic::Theil,
            "mld" => Statistic::Mld,
            "cv" => Statistic::Cv,
            other => {
                let pct = other
                    .strip_prefix('p')
                    .and_then(|rest| rest.parse::<f64>().ok())
                    .filter(|p| *p > 0.0 && *p < 100.0)
                    .ok_or_else(|| format!("unknown statistic `{other}`"))?;
                Statistic::Quantile(pct / 100.0)
            }
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StatisticsSet {
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub sd: Option<f64>,
    pub gini: Option<f64>,
    pub theil: Option<f64>,
    pub mld: Option<f64>,
    pub cv: Option<f64>,
    /// `(probability, income)` pairs in request order.
    pub quantiles: Vec<(f64, f64)>,
}

impl StatisticsSet {
    pub fn get(&self, statistic: Statistic) -> Option<f64> {
        match statistic {
            Statistic::Mean => self.mean,
            Statistic::Median => self.median,
            Statistic::Sd => self.sd,
            Statistic::Gini => self.gini,
            Statistic::Theil => self.theil,
            Statistic::Mld => self.mld,
            Statistic::Cv => self.cv,
            Statistic::Quantile(p) => self.quantiles.iter().find(|(q, _)| *q == p).map(|&(_, v)| v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsOptions {
    /// Floor applied inside logarithms; `None` evaluates the logs exactly.
    pub log_floor: Option<f64>,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            log_floor: Some(DEFAULT_LOG_FLOOR),
        }
    }
}

impl StatsOptions {
    fn ln(&self, x: f64) -> f64 {
        match self.log_floor {
            Some(eps) => x.max(eps).ln(),
            None => x.ln(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Need {
    Mean,
    SecondMoment,
    Gini,
    Theil,
    Mld,
}

fn needs(which: &[Statistic]) -> impl Fn(Need) -> bool + '_ {
    move |n| {
        which.iter().any(|s| match (n, s) {
            (Need::Mean, Statistic::Quantile(_) | Statistic::Median) => false,
            (Need::Mean, _) => true,
            (Need::SecondMoment, Statistic::Sd | Statistic::Cv) => true,
            (Need::Gini, Statistic::Gini) => true,
            (Need::Theil, Statistic::Theil) => true,
            (Need::Mld, Statistic::Mld) => true,
            _ => false,
        })
    }
}

/// Statistics of a continuous distribution by numerical integration, with the
/// default log floor.
pub fn integrate_statistics<D: FittedDistribution + ?Sized>(dist: &D, which: &[Statistic]) -> Result<StatisticsSet> {
    integrate_statistics_with(dist, which, &StatsOptions::default())
}

pub fn integrate_statistics_with<D: FittedDistribution + ?Sized>(
    dist: &D,
    which: &[Statistic],
    options: &StatsOptions,
) -> Result<StatisticsSet> {
    let need = needs(which);
    let mut out = StatisticsSet::default();
    let integrator = Integrator::new(dist);

    if need(Need::Mean) && !dist.moment_exists(1) {
        return Err(Error::UndefinedMoment { order: 1 });
    }
    if need(Need::SecondMoment) && !dist.moment_exists(2) {
        return Err(Error::UndefinedMoment { order: 2 });
    }

    let mean = if need(Need::Mean) {
        Some(integrator.expect_polynomial(|x| x))
    } else {
        None
    };
    out.mean = mean;
    if let Some(mu) = mean {
        if need(Need::SecondMoment) {
            let m2 = integrator.expect_polynomial(|x| x * x);
            let sd = (m2 - mu * mu).max(0.0).sqrt();
            out.sd = Some(sd);
            out.cv = Some(sd / mu);
        }
        if need(Need::Gini) {
            out.gini = Some(integrator.cdf_functional(|f, s| f * s) / mu);
        }
        if need(Need::Theil) {
            let a = integrator.expect_x_log(options);
            out.theil = Some(a / mu - options.ln(mu));
        }
        if need(Need::Mld) {
            let b = integrator.expect_log(options);
            out.mld = Some(options.ln(mu) - b);
        }
    }
    for s in which {
        match s {
            Statistic::Median => out.median = Some(quantile(dist, 0.5)),
            Statistic::Quantile(p) if !out.quantiles.iter().any(|(q, _)| q == p) => {
                out.quantiles.push((*p, quantile(dist, *p)));
            }
            _ => {}
        }
    }
    Ok(out)
}

struct Integrator<'a, D: ?Sized> {
    dist: &'a D,
    /// Piece boundaries for piecewise fits, or the integration window in
    /// `ln x` for smooth ones.
    pieces: Vec<f64>,
    smooth: bool,
}

impl<'a, D: FittedDistribution + ?Sized> Integrator<'a, D> {
    fn new(dist: &'a D) -> Self {
        let knots = dist.breakpoints();
        if knots.len() >= 2 {
            return Integrator {
                dist,
                pieces: knots,
                smooth: false,
            };
        }
        let (start, end) = dist.support();
        let lo = if start > 0.0 && dist.cdf(start) <= SMOOTH_TAIL_MASS {
            start
        } else {
            quantile(dist, SMOOTH_TAIL_MASS).max(f64::MIN_POSITIVE)
        };
        let hi = if end.is_finite() {
            end
        } else {
            upper_tail_quantile(dist, SMOOTH_TAIL_MASS)
        };
        // A handful of sub-windows in ln x keeps adaptive Simpson from
        // mistaking a narrow peak for a flat function.
        let (tl, th) = (lo.ln(), hi.ln());
        let n = 64;
        let pieces = (0..=n).map(|i| tl + (th - tl) * i as f64 / n as f64).collect();
        Integrator {
            dist,
            pieces,
            smooth: true,
        }
    }

    fn smooth_integral<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let integrand = |t: f64| {
            let x = t.exp();
            g(x) * x
        };
        let coarse: f64 = self
            .pieces
            .windows(2)
            .map(|w| composite_simpson(&integrand, w[0], w[1], 8).abs())
            .sum();
        let tol = SMOOTH_REL_TOL * coarse.max(1e-300) / self.pieces.len() as f64;
        self.pieces
            .windows(2)
            .map(|w| adaptive_simpson(&integrand, w[0], w[1], tol))
            .sum()
    }

    /// `∫ g(x) f(x) dx` for polynomial `g`.
    fn expect_polynomial<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        if self.smooth {
            return self.smooth_integral(|x| g(x) * self.dist.pdf(x));
        }
        self.pieces
            .windows(2)
            .map(|w| gauss_legendre_10(|x| g(x) * self.dist.pdf(x), w[0], w[1]))
            .sum()
    }

    /// `∫ h(F(x), 1−F(x)) dx` over the support.
    fn cdf_functional<H: Fn(f64, f64) -> f64>(&self, h: H) -> f64 {
        if self.smooth {
            return self.smooth_integral(|x| h(self.dist.cdf(x), self.dist.sf(x)));
        }
        self.pieces
            .windows(2)
            .map(|w| {
                gauss_legendre_10(
                    |x| {
                        let f = self.dist.cdf(x);
                        h(f, 1.0 - f)
                    },
                    w[0],
                    w[1],
                )
            })
            .sum()
    }

    fn expect_logish<G, C>(&self, g: G, closed: C, options: &StatsOptions) -> f64
    where
        G: Fn(f64) -> f64,
        C: Fn(f64, f64) -> f64,
    {
        if self.smooth {
            return self.smooth_integral(|x| g(x) * self.dist.pdf(x));
        }
        let floor = options.log_floor.unwrap_or(0.0);
        let mut total = 0.0;
        for w in self.pieces.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            if self.dist.piecewise_constant() {
                let h = self.dist.pdf(0.5 * (a + b));
                if h != 0.0 {
                    total += h * closed(a, b);
                }
                continue;
            }
            // The floor introduces a kink; keep it on a panel edge.
            let mut cuts = vec![a];
            if floor > a && floor < b {
                cuts.push(floor);
            }
            cuts.push(b);
            for c in cuts.windows(2) {
                let f = |x: f64| g(x) * self.dist.pdf(x);
                let scale = gauss_legendre_10(|x| f(x).abs(), c[0], c[1]);
                total += adaptive_simpson(&f, c[0], c[1], 1e-13 * scale.max(1e-300));
            }
        }
        total
    }

    /// `∫ x ln(x) f(x) dx` with the log floor applied.
    fn expect_x_log(&self, options: &StatsOptions) -> f64 {
        let floor = options.log_floor;
        self.expect_logish(
            |x| x * options.ln(x),
            |a, b| closed_x_log(a, b, floor),
            options,
        )
    }

    /// `∫ ln(x) f(x) dx` with the log floor applied.
    fn expect_log(&self, options: &StatsOptions) -> f64 {
        let floor = options.log_floor;
        self.expect_logish(|x| options.ln(x), |a, b| closed_log(a, b, floor), options)
    }
}

fn x_log_antiderivative(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        0.5 * x * x * x.ln() - 0.25 * x * x
    }
}

fn log_antiderivative(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln() - x
    }
}

/// `∫_a^b x ln(max(x, floor)) dx`.
fn closed_x_log(a: f64, b: f64, floor: Option<f64>) -> f64 {
    let eps = floor.unwrap_or(0.0);
    let split = eps.clamp(a, b);
    let below = if split > a { 0.5 * (split * split - a * a) * eps.ln() } else { 0.0 };
    below + x_log_antiderivative(b) - x_log_antiderivative(split)
}

/// `∫_a^b ln(max(x, floor)) dx`.
fn closed_log(a: f64, b: f64, floor: Option<f64>) -> f64 {
    let eps = floor.unwrap_or(0.0);
    let split = eps.clamp(a, b);
    let below = if split > a { (split - a) * eps.ln() } else { 0.0 };
    below + log_antiderivative(b) - log_antiderivative(split)
}

/// Smallest `x` with `cdf(x) ≥ p`, by bisection to `1e-10` of the income scale.
pub fn quantile<D: FittedDistribution + ?Sized>(dist: &D, p: f64) -> f64 {
    let (start, end) = dist.support();
    if p <= 0.0 {
        return start;
    }
    if p > 0.5 {
        return upper_tail_quantile(dist, 1.0 - p);
    }
    let mut lo = start;
    let mut hi = if end.is_finite() { end } else { grow_until(dist, start, |x| dist.cdf(x) >= p) };
    bisect_threshold(&mut lo, &mut hi, |x| dist.cdf(x) >= p);
    hi
}

/// Smallest `x` with `sf(x) ≤ q`.
pub fn upper_tail_quantile<D: FittedDistribution + ?Sized>(dist: &D, q: f64) -> f64 {
    let (start, end) = dist.support();
    let mut lo = start;
    let mut hi = if end.is_finite() { end } else { grow_until(dist, start, |x| dist.sf(x) <= q) };
    bisect_threshold(&mut lo, &mut hi, |x| dist.sf(x) <= q);
    hi
}

fn grow_until<D: FittedDistribution + ?Sized, P: Fn(f64) -> bool>(_dist: &D, start: f64, pred: P) -> f64 {
    let mut hi = if start > 0.0 { 2.0 * start } else { 1.0 };
    for _ in 0..2000 {
        if pred(hi) {
            return hi;
        }
        hi *= 2.0;
    }
    hi
}

/// Shrinks `[lo, hi]` onto the boundary of the monotone predicate `pred`
/// (false at `lo`, true at `hi`).
fn bisect_threshold<P: Fn(f64) -> bool>(lo: &mut f64, hi: &mut f64, pred: P) {
    for _ in 0..400 {
        let scale = hi.abs().max(lo.abs());
        if *hi - *lo <= 1e-10 * scale.max(1e-300) * 1e-2 {
            break;
        }
        let mid = 0.5 * (*lo + *hi);
        if mid <= *lo || mid >= *hi {
            break;
        }
        if pred(mid) {
            *hi = mid;
        } else {
            *lo = mid;
        }
    }
}

/// Weighted sample statistics with the default log floor.
pub fn weighted_statistics(points: &WeightedPointMass, which: &[Statistic]) -> Result<StatisticsSet> {
    weighted_statistics_with(points, which, &StatsOptions::default())
}

/// Population-form weighted statistics. The Gini is
/// `Σᵢ Σⱼ wᵢ wⱼ |vᵢ − vⱼ| / (2 W² μ)`, evaluated in `O(n log n)` on sorted values.
pub fn weighted_statistics_with(
    points: &WeightedPointMass,
    which: &[Statistic],
    options: &StatsOptions,
) -> Result<StatisticsSet> {
    let mut pairs: Vec<(f64, f64)> = points
        .values
        .iter()
        .copied()
        .zip(points.weights.iter().copied())
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if !(total > 0.0) {
        return Err(Error::Precondition("weights sum to zero".into()));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let need = needs(which);
    let mut out = StatisticsSet::default();

    let mean = pairs.iter().map(|(v, w)| v * w).sum::<f64>() / total;
    if need(Need::Mean) {
        out.mean = Some(mean);
    }
    if need(Need::SecondMoment) {
        let var = pairs.iter().map(|(v, w)| w * (v - mean).powi(2)).sum::<f64>() / total;
        out.sd = Some(var.sqrt());
        out.cv = Some(var.sqrt() / mean);
    }
    if need(Need::Gini) {
        // Σᵢⱼ wᵢwⱼ|vᵢ−vⱼ| = 2 Σᵢ wᵢ vᵢ (W_before − W_after)
        let mut before = 0.0;
        let mut acc = 0.0;
        for &(v, w) in &pairs {
            let after = total - before - w;
            acc += w * v * (before - after);
            before += w;
        }
        out.gini = Some(acc / (total * total * mean));
    }
    if need(Need::Theil) || need(Need::Mld) {
        if options.log_floor.is_none() && pairs.iter().any(|&(v, _)| v <= 0.0) {
            return Err(Error::UndefinedMoment { order: 0 });
        }
        let ln_mu = options.ln(mean);
        if need(Need::Theil) {
            let a = pairs.iter().map(|&(v, w)| w * v * options.ln(v)).sum::<f64>() / total;
            out.theil = Some(a / mean - ln_mu);
        }
        if need(Need::Mld) {
            let b = pairs.iter().map(|&(v, w)| w * options.ln(v)).sum::<f64>() / total;
            out.mld = Some(ln_mu - b);
        }
    }
    let weighted_quantile = |p: f64| {
        let target = p * total;
        let mut cum = 0.0;
        for &(v, w) in &pairs {
            cum += w;
            if cum >= target * (1.0 - 1e-15) {
                return v;
            }
        }
        pairs.last().map_or(f64::NAN, |p| p.0)
    };
    for s in which {
        match s {
            Statistic::Median => out.median = Some(weighted_quantile(0.5)),
            Statistic::Quantile(p) if !out.quantiles.iter().any(|(q, _)| q == p) => {
                out.quantiles.push((*p, weighted_quantile(*p)));
            }
            _ => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Exponential(f64);
    impl FittedDistribution for Exponential {
        fn cdf(&self, x: f64) -> f64 {
            -(-self.0 * x.max(0.0)).exp_m1()
        }
        fn sf(&self, x: f64) -> f64 {
            (-self.0 * x.max(0.0)).exp()
        }
        fn pdf(&self, x: f64) -> f64 {
            if x < 0.0 { 0.0 } else { self.0 * (-self.0 * x).exp() }
        }
        fn support(&self) -> (f64, f64) {
            (0.0, f64::INFINITY)
        }
    }

    #[test]
    fn exponential_gini_is_half() {
        for rate in [1e-4, 1.0, 7.5] {
            let s = integrate_statistics(&Exponential(rate), &[Statistic::Gini, Statistic::Median]).unwrap();
            assert_relative_eq!(s.gini.unwrap(), 0.5, epsilon = 1e-8);
            assert_relative_eq!(s.median.unwrap(), 2f64.ln() / rate, max_relative = 1e-9);
            assert_relative_eq!(s.mean.unwrap(), 1.0 / rate, max_relative = 1e-9);
        }
    }

    #[test]
    fn parse_statistics() {
        assert_eq!("gini".parse::<Statistic>().unwrap(), Statistic::Gini);
        assert_eq!("p10".parse::<Statistic>().unwrap(), Statistic::Quantile(0.1));
        assert_eq!("P99.5".parse::<Statistic>().unwrap(), Statistic::Quantile(0.995));
        assert!("p100".parse::<Statistic>().is_err());
        assert!("bogus".parse::<Statistic>().is_err());
        assert_eq!(Statistic::Quantile(0.9).to_string(), "p90");
    }

    #[test]
    fn weighted_single_point() {
        let pm = WeightedPointMass::new(vec![5.0], vec![3.0]);
        let s = weighted_statistics(&pm, &Statistic::STANDARD).unwrap();
        assert_eq!(s.gini, Some(0.0));
        assert_eq!(s.sd, Some(0.0));
        assert_eq!(s.median, Some(5.0));
    }

    #[test]
    fn weighted_two_points() {
        let pm = WeightedPointMass::new(vec![0.0, 1.0], vec![1.0, 1.0]);
        let s = weighted_statistics(&pm, &[Statistic::Gini]).unwrap();
        assert_relative_eq!(s.gini.unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn weighted_gini_matches_pairwise_oracle() {
        let values = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let weights = [0.5, 2.0, 1.0, 3.0, 0.25, 1.0, 4.0, 0.0];
        let (mut num, mut w, mut mw) = (0.0, 0.0, 0.0);
        for i in 0..values.len() {
            w += weights[i];
            mw += weights[i] * values[i];
            for j in 0..values.len() {
                num += weights[i] * weights[j] * f64::abs(values[i] - values[j]);
            }
        }
        let oracle = num / (2.0 * w * w * (mw / w));
        let pm = WeightedPointMass::new(values.to_vec(), weights.to_vec());
        let s = weighted_statistics(&pm, &[Statistic::Gini]).unwrap();
        assert_relative_eq!(s.gini.unwrap(), oracle, max_relative = 1e-13);
    }

    #[test]
    fn weighted_median_is_smallest_half_point() {
        let pm = WeightedPointMass::new(vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 2.0]);
        let s = weighted_statistics(&pm, &[Statistic::Median, Statistic::Quantile(0.9)]).unwrap();
        assert_eq!(s.median, Some(2.0));
        assert_eq!(s.get(Statistic::Quantile(0.9)), Some(3.0));
    }

    #[test]
    fn weighted_logs_need_floor_for_zero_values() {
        let pm = WeightedPointMass::new(vec![0.0, 10.0], vec![1.0, 1.0]);
        let none = StatsOptions { log_floor: None };
        assert!(weighted_statistics_with(&pm, &[Statistic::Theil], &none).is_err());
        let s = weighted_statistics(&pm, &[Statistic::Theil, Statistic::Mld]).unwrap();
        // mean 5: theil = ½(0·ln0/5... floored at 1: 0 + 2·ln2)/... computed directly
        let theil = 0.5 * ((0.0 / 5.0) * (1f64.ln() - 5f64.ln()) + 2.0 * (10f64.ln() - 5f64.ln()));
        assert_relative_eq!(s.theil.unwrap(), theil, max_relative = 1e-12);
        let mld = 0.5 * ((5f64.ln() - 1f64.ln()) + (5f64.ln() - 10f64.ln()));
        assert_relative_eq!(s.mld.unwrap(), mld, max_relative = 1e-12);
    }

    #[test]
    fn closed_log_forms_match_quadrature() {
        for (a, b, floor) in [(0.0, 3.0, Some(1.0)), (2.0, 9.0, Some(1.0)), (0.0, 0.5, Some(1.0)), (0.5, 4.0, None)] {
            let ln = |x: f64| match floor {
                Some(e) => f64::max(x, e).ln(),
                None => x.ln(),
            };
            let q1 = adaptive_simpson(&|x: f64| x * ln(x), a, b, 1e-13);
            assert!((closed_x_log(a, b, floor) - q1).abs() < 1e-9);
            if a > 0.0 || floor.is_some() {
                let q2 = adaptive_simpson(&|x: f64| ln(x), a, b, 1e-13);
                assert!((closed_log(a, b, floor) - q2).abs() < 1e-9);
            }
        }
    }
}
