//! Seeded synthetic income tables with exact reference statistics.
//!
//! Samples are drawn with ChaCha8 (the ChaCha stream cipher reduced to eight
//! rounds, as in `rand_chacha::ChaCha8Rng`) seeded through
//! `SeedableRng::seed_from_u64`, so a `SyntheticSpec` reproduces the same table on every
//! platform. Reference statistics are those of the raw sample, computed with
//! the weighted-sample formulas at unit weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Pareto};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::midpoint::WeightedPointMass;
use crate::model::{Bin, BinnedDataset};
use crate::stats::{weighted_statistics, Statistic, StatisticsSet};

/// Name of the generator behind every synthetic draw.
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64)";

/// Household income brackets of the US American Community Survey tables.
pub const ACS_EDGES: [f64; 16] = [
    0.0, 10_000.0, 15_000.0, 20_000.0, 25_000.0, 30_000.0, 35_000.0, 40_000.0, 45_000.0, 50_000.0, 60_000.0,
    75_000.0, 100_000.0, 125_000.0, 150_000.0, 200_000.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Generator {
    Lognormal { mu: f64, sigma: f64 },
    /// Classical Pareto with minimum `scale`.
    Pareto { alpha: f64, scale: f64 },
    Dagum { a: f64, b: f64, p: f64 },
    Constant { value: f64 },
}

impl Generator {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Generator::Lognormal { mu, sigma } => mu.is_finite() && sigma > 0.0 && sigma.is_finite(),
            Generator::Pareto { alpha, scale } => alpha > 0.0 && scale > 0.0,
            Generator::Dagum { a, b, p } => a > 0.0 && b > 0.0 && p > 0.0,
            Generator::Constant { value } => value > 0.0 && value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid generator {self:?}")))
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        match *self {
            Generator::Lognormal { mu, sigma } => {
                let d = LogNormal::new(mu, sigma).expect("validated");
                d.sample_iter(rng).take(n).collect()
            }
            Generator::Pareto { alpha, scale } => {
                let d = Pareto::new(scale, alpha).expect("validated");
                d.sample_iter(rng).take(n).collect()
            }
            Generator::Dagum { a, b, p } => (0..n)
                .map(|_| {
                    // Inverse CDF; u is in (0, 1).
                    let u: f64 = 1.0 - rng.random::<f64>();
                    b * (u.powf(-1.0 / p) - 1.0).powf(-1.0 / a)
                })
                .collect(),
            Generator::Constant { value } => vec![value; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Binning {
    /// Lower bounds; the last bin is open. Values below the first bound fall
    /// in the first bin.
    OpenTop(Vec<f64>),
    /// Full edges `e_0 < … < e_B`; every value must lie in `[e_0, e_B)`.
    Bounded(Vec<f64>),
    /// `count` bins of equal width from 0 to just above the sample maximum.
    EqualWidth { count: usize },
    /// Lower bounds at the sample's `k/count` quantiles (the first at 0), with
    /// an open top bin. Tied quantiles merge.
    Quantiles { count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub id: String,
    pub generator: Generator,
    pub sample_size: usize,
    pub binning: Binning,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Synthetic {
    /// Binned table with the sample mean as its known mean and the sample
    /// Gini as its reference Gini.
    pub dataset: BinnedDataset,
    pub reference: StatisticsSet,
}

/// Draws, summarizes and bins one sample.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Synthetic> {
    spec.generator.validate()?;
    if spec.sample_size == 0 {
        return Err(Error::Precondition("sample size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sample = spec.generator.draw(&mut rng, spec.sample_size);
    sample.sort_by(f64::total_cmp);
    let reference = sample_statistics(&sample)?;
    let bins = bin_sorted(&sample, &spec.binning)?;
    let mut dataset = BinnedDataset::new(spec.id.clone(), bins);
    dataset.known_mean = reference.mean;
    dataset.reference_gini = reference.gini;
    Ok(Synthetic { dataset, reference })
}

/// Exact statistics of a sample, every value weighted 1.
pub fn sample_statistics(sample: &[f64]) -> Result<StatisticsSet> {
    let points = WeightedPointMass::new(sample.to_vec(), vec![1.0; sample.len()]);
    weighted_statistics(&points, &Statistic::STANDARD)
}

fn bin_sorted(sample: &[f64], binning: &Binning) -> Result<Vec<Bin>> {
    let max = *sample.last().expect("non-empty");
    let (lowers, top) = match binning {
        Binning::OpenTop(edges) => (edges.clone(), None),
        Binning::Bounded(edges) => {
            let (&top, lowers) = edges
                .split_last()
                .ok_or_else(|| Error::Precondition("bounded binning needs edges".into()))?;
            if sample[0] < lowers[0] || max >= top {
                return Err(Error::Precondition("sample falls outside the bounded edges".into()));
            }
            (lowers.to_vec(), Some(top))
        }
        Binning::EqualWidth { count } => {
            if *count == 0 {
                return Err(Error::Precondition("need at least one bin".into()));
            }
            let top = max * (1.0 + 1e-12) + f64::MIN_POSITIVE;
            let w = top / *count as f64;
            ((0..*count).map(|i| i as f64 * w).collect(), Some(top))
        }
        Binning::Quantiles { count } => {
            if *count == 0 {
                return Err(Error::Precondition("need at least one bin".into()));
            }
            let n = sample.len();
            let mut lowers = vec![0.0];
            for k in 1..*count {
                let q = sample[k * n / count];
                if q > *lowers.last().expect("non-empty") {
                    lowers.push(q);
                }
            }
            (lowers, None)
        }
    };
    if lowers.is_empty() || lowers.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("bin edges must increase".into()));
    }
    let mut counts = vec![0.0; lowers.len()];
    let mut b = 0;
    for &x in sample {
        while b + 1 < lowers.len() && x >= lowers[b + 1] {
            b += 1;
        }
        counts[b] += 1.0;
    }
    let bins = lowers
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let upper = lowers.get(i + 1).copied().or(top);
            Bin::new(l, upper, counts[i])
        })
        .collect();
    Ok(bins)
}

/// A collection of county-like tables on the ACS brackets.
///
/// Each county draws its own generator (lognormal or Dagum, with parameters
/// spread around US household incomes) and a household sample of a few hundred
/// to a few tens of thousands. County `i` uses seed `seed + i`.
pub fn county_collection(count: usize, seed: u64) -> Result<Vec<Synthetic>> {
    let mut meta = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    (0..count)
        .map(|i| {
            let generator = if meta.random::<f64>() < 0.5 {
                Generator::Lognormal {
                    mu: meta.random_range(10.4..11.3),
                    sigma: meta.random_range(0.6..1.0),
                }
            } else {
                Generator::Dagum {
                    a: meta.random_range(2.6..4.5),
                    b: meta.random_range(40_000.0..90_000.0),
                    p: meta.random_range(0.4..1.0),
                }
            };
            let sample_size = (meta.random_range(6.0f64..10.0)).exp().round() as usize;
            generate_synthetic(&SyntheticSpec {
                id: format!("county-{i:04}"),
                generator,
                sample_size,
                binning: Binning::OpenTop(ACS_EDGES.to_vec()),
                seed: seed.wrapping_add(i as u64),
            })
        })
        .collect()
}
