//! Success-rate estimation from event counts, Poisson bootstrap error bars
//! and the Azuma–Hoeffding p-value.
//!
//! Settings are addressed as `(x1, x2, y)` with `y ∈ {1, 2}`; the winning
//! outcome for setting `y` is `x_y`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::protocol::{require_setting, CorrelationTable};

/// Below this mean the Poisson sampler uses inversion.
const INVERSION_LIMIT: f64 = 30.0;

/// Tolerance on the normalization of a settings prior.
const PRIOR_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountRecord {
    pub x1: usize,
    pub x2: usize,
    /// Measurement setting, 1 or 2.
    pub y: u8,
    pub b: usize,
    pub count: u64,
}

impl CountRecord {
    pub fn is_win(&self) -> bool {
        self.b == if self.y == 1 { self.x1 } else { self.x2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentDataset {
    n: usize,
    /// `prior[(x1 * n + x2) * 2 + (y - 1)]`.
    prior: Vec<f64>,
    records: Vec<CountRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_dev: f64,
    /// Monte-Carlo samples behind `std_dev`; 0 for a point estimate.
    pub sample_count: usize,
}

/// Per-setting tallies, indexed like the prior.
struct Tally {
    wins: Vec<u64>,
    totals: Vec<u64>,
}

fn setting_index(n: usize, x1: usize, x2: usize, y: u8) -> usize {
    (x1 * n + x2) * 2 + (y as usize - 1)
}

fn setting_of(n: usize, index: usize) -> (usize, usize, u8) {
    let x = index / 2;
    (x / n, x % n, (index % 2) as u8 + 1)
}

impl ExperimentDataset {
    /// Dataset with the uniform settings prior `1 / 2n²`.
    pub fn new(n: usize, records: Vec<CountRecord>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "n must be at least 2, got {n}"
            )));
        }
        let prior = vec![1.0 / (2 * n * n) as f64; 2 * n * n];
        let ds = Self { n, prior, records };
        ds.validate()?;
        Ok(ds)
    }

    pub fn with_prior(mut self, prior: Vec<f64>) -> Result<Self> {
        if prior.len() != 2 * self.n * self.n {
            return Err(Error::DimensionMismatch(format!(
                "prior has {} entries, expected {}",
                prior.len(),
                2 * self.n * self.n
            )));
        }
        if prior.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument(
                "prior entries must be nonnegative".into(),
            ));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > PRIOR_TOL {
            return Err(Error::InvalidArgument(format!(
                "prior sums to {total}, expected 1"
            )));
        }
        self.prior = prior;
        self.validate()?;
        Ok(self)
    }

    /// Builds raw counts from per-setting win probabilities.
    ///
    /// `p_win[(x1 * n + x2) * 2 + (y - 1)]` is turned into `round(p · total)`
    /// wins; the remaining events are booked on outcome `x_y + 1 mod n`.
    pub fn from_win_probabilities(n: usize, p_win: &[f64], total: u64) -> Result<Self> {
        if p_win.len() != 2 * n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} win probabilities for n={n}",
                p_win.len()
            )));
        }
        let mut records = Vec::with_capacity(4 * n * n);
        for (i, &p) in p_win.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "win probability {p} outside [0, 1]"
                )));
            }
            let (x1, x2, y) = setting_of(n, i);
            let target = if y == 1 { x1 } else { x2 };
            let wins = (p * total as f64).round() as u64;
            records.push(CountRecord {
                x1,
                x2,
                y,
                b: target,
                count: wins,
            });
            records.push(CountRecord {
                x1,
                x2,
                y,
                b: (target + 1) % n,
                count: total - wins,
            });
        }
        Self::new(n, records)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for r in &self.records {
            require_setting(r.y)?;
            if r.x1 >= n || r.x2 >= n || r.b >= n {
                return Err(Error::InvalidArgument(format!(
                    "record (x1={}, x2={}, y={}, b={}) out of range for n={n}",
                    r.x1, r.x2, r.y, r.b
                )));
            }
        }
        let tally = self.tally();
        for (i, (&t, &p)) in tally.totals.iter().zip(&self.prior).enumerate() {
            let present = self
                .records
                .iter()
                .any(|r| setting_index(n, r.x1, r.x2, r.y) == i);
            let (x1, x2, y) = setting_of(n, i);
            if present && t == 0 {
                return Err(Error::InvalidArgument(format!(
                    "setting (x1={x1}, x2={x2}, y={y}) has no events"
                )));
            }
            if t > 0 && p == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "setting (x1={x1}, x2={x2}, y={y}) has events but zero prior"
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn records(&self) -> &[CountRecord] {
        &self.records
    }

    pub fn total_events(&self) -> u64 {
        self.records.iter().map(|r| r.count).sum()
    }

    /// Same dataset with every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        let records = self
            .records
            .iter()
            .map(|r| CountRecord {
                count: r.count * factor,
                ..*r
            })
            .collect();
        Self {
            n: self.n,
            prior: self.prior.clone(),
            records,
        }
    }

    fn tally(&self) -> Tally {
        self.tally_with(|r| r.count)
    }

    fn tally_with(&self, mut count: impl FnMut(&CountRecord) -> u64) -> Tally {
        let settings = 2 * self.n * self.n;
        let mut wins = vec![0; settings];
        let mut totals = vec![0; settings];
        for r in &self.records {
            let i = setting_index(self.n, r.x1, r.x2, r.y);
            let c = count(r);
            totals[i] += c;
            if r.is_win() {
                wins[i] += c;
            }
        }
        Tally { wins, totals }
    }

    /// Observed `p̂(b = x_y | x, y)` for every setting, indexed like the prior.
    pub fn win_frequencies(&self) -> Result<Vec<f64>> {
        let tally = self.tally();
        tally
            .totals
            .iter()
            .zip(&tally.wins)
            .enumerate()
            .map(|(i, (&t, &w))| {
                if t == 0 {
                    let (x1, x2, y) = setting_of(self.n, i);
                    Err(Error::MissingSetting { x1, x2, y })
                } else {
                    Ok(w as f64 / t as f64)
                }
            })
            .collect()
    }
}

/// Average of the per-setting win frequencies over all `2n²` settings.
pub fn estimate_success(ds: &ExperimentDataset) -> Result<Estimate> {
    let freqs = ds.win_frequencies()?;
    Ok(Estimate {
        value: freqs.iter().sum::<f64>() / freqs.len() as f64,
        std_dev: 0.0,
        sample_count: 0,
    })
}

/// Round-by-round estimator with importance weights `1 / (2n² p(x,y))`.
///
/// Each recorded event is one round. Under the uniform prior with equal
/// totals per setting this coincides with [`estimate_success`].
pub fn importance_weighted_estimate(ds: &ExperimentDataset) -> Result<f64> {
    let rounds = ds.total_events();
    if rounds == 0 {
        return Err(Error::InvalidArgument("dataset has no events".into()));
    }
    let settings = (2 * ds.n * ds.n) as f64;
    let tally = ds.tally();
    let weighted: f64 = tally
        .wins
        .iter()
        .zip(&ds.prior)
        .filter(|(&w, _)| w > 0)
        .map(|(&w, &p)| w as f64 / (settings * p))
        .sum();
    Ok(weighted / rounds as f64)
}

/// Poisson variate: inversion for small means, rounded normal otherwise.
fn poisson(rng: &mut impl Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf && p > 0.0 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        k
    } else {
        let z: f64 = rng.sample(StandardNormal);
        (mean + mean.sqrt() * z).round().max(0.0) as u64
    }
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Bootstrap error bar from resampling every count as `Poisson(count)`.
///
/// A setting whose resampled total is zero keeps its observed frequency.
pub fn poisson_bootstrap(ds: &ExperimentDataset, samples: usize, seed: u64) -> Result<Estimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least 2 samples".into(),
        ));
    }
    let observed = ds.win_frequencies()?;
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = sample_rng(seed, s);
            let tally = ds.tally_with(|r| poisson(&mut rng, r.count as f64));
            let sum: f64 = tally
                .wins
                .iter()
                .zip(&tally.totals)
                .zip(&observed)
                .map(|((&w, &t), &f)| if t == 0 { f } else { w as f64 / t as f64 })
                .sum();
            sum / observed.len() as f64
        })
        .collect();
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    Ok(Estimate {
        value: mean,
        std_dev: var.sqrt(),
        sample_count: samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PValue {
    pub p: f64,
    pub log10_p: f64,
}

/// Azuma–Hoeffding bound `exp(−2Nμ²/Δ²)` with `μ = s_hat − bound`.
///
/// No violation (`μ ≤ 0`) or no data gives `p = 1`.
pub fn azuma_pvalue(s_hat: f64, bound: f64, n_rounds: u64, delta: f64) -> Result<PValue> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Δ must lie in (0, 1], got {delta}"
        )));
    }
    if !s_hat.is_finite() || !bound.is_finite() {
        return Err(Error::InvalidArgument(
            "success rate and bound must be finite".into(),
        ));
    }
    let mu = s_hat - bound;
    if mu <= 0.0 || n_rounds == 0 {
        return Ok(PValue {
            p: 1.0,
            log10_p: 0.0,
        });
    }
    let ln_p = -2.0 * n_rounds as f64 * mu * mu / (delta * delta);
    Ok(PValue {
        p: ln_p.exp(),
        log10_p: ln_p / std::f64::consts::LN_10,
    })
}

/// Draws Poisson counts for every outcome of a stochastic-task correlation
/// table, `counts_per_setting` events expected per setting.
pub fn simulate_counts(
    table: &CorrelationTable,
    counts_per_setting: u64,
    seed: u64,
) -> Result<ExperimentDataset> {
    let n = table.n();
    if table.settings() != 2 || table.outcomes() != n {
        return Err(Error::DimensionMismatch(
            "expected a two-setting table with n outcomes".into(),
        ));
    }
    let mut rng = sample_rng(seed, 0);
    let mut records = Vec::with_capacity(2 * n * n * n);
    for x1 in 0..n {
        for x2 in 0..n {
            for y in 0..2 {
                for b in 0..n {
                    let mean = counts_per_setting as f64 * table.get(x1, x2, y, b).max(0.0);
                    records.push(CountRecord {
                        x1,
                        x2,
                        y: y as u8 + 1,
                        b,
                        count: poisson(&mut rng, mean),
                    });
                }
            }
        }
    }
    ExperimentDataset::new(n, records)
}
