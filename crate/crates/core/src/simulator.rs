//! Monte-Carlo check of the per-request cost model.
//!
//! Station positions do not influence any cost, so the Poisson process only
//! enters through the station count. Each simulated request arrives at a
//! uniformly chosen station and asks for a Zipf-distributed rank.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::cost::{self, AccountingMode, CostParams, Instance};
use crate::error::{Error, Result};
use crate::layout::{CacheLayout, LayoutParams};
use crate::popularity::Catalog;

/// |z| above this marks a validation row as failed.
pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Service disk radius in meters.
    pub radius: f64,
    /// Stations per square meter.
    pub density: f64,
    /// Overrides the Poisson draw when set.
    pub fixed_bs_count: Option<usize>,
    pub requests_per_trial: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            radius: 100.0,
            density: 2e-4,
            fixed_bs_count: None,
            requests_per_trial: 1_000_000,
            trials: 20,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::invalid("radius", "must be finite and positive"));
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(Error::invalid("density", "must be finite and positive"));
        }
        if self.fixed_bs_count == Some(0) {
            return Err(Error::invalid("fixed_bs_count", "must be at least 1"));
        }
        if self.requests_per_trial == 0 {
            return Err(Error::invalid("requests_per_trial", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        Ok(())
    }

    /// Mean of the untruncated Poisson station count, `density * pi * radius^2`.
    pub fn mean_bs_count(&self) -> f64 {
        self.density * std::f64::consts::PI * self.radius * self.radius
    }
}

/// Mean of a Poisson(`mean`) variable conditioned on being positive.
pub fn zero_truncated_mean(mean: f64) -> f64 {
    mean / (1.0 - (-mean).exp())
}

/// Independent stream seed for trial `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Station count for one trial: `fixed_bs_count` if set, otherwise a
/// Poisson draw redrawn until positive.
pub fn sample_bs_count<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<usize> {
    if let Some(n) = cfg.fixed_bs_count {
        return Ok(n);
    }
    let poisson = Poisson::new(cfg.mean_bs_count())
        .map_err(|e| Error::invalid("density", format!("bad Poisson mean: {e}")))?;
    loop {
        let n = poisson.sample(rng) as usize;
        if n >= 1 {
            return Ok(n);
        }
    }
}

/// Uniform positions of `n` stations in the service disk, for reporting.
pub fn sample_bs_positions<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| {
            let rho = radius * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            (rho * theta.cos(), rho * theta.sin())
        })
        .collect()
}

/// Aggregate outcome of one simulated request stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub n_bs: usize,
    pub redundant_count: usize,
    pub requests: usize,
    pub empirical_cost_per_request: f64,
    pub local_hit_fraction: f64,
    pub empirical_ran_fraction: f64,
    pub empirical_backhaul_fraction: f64,
    pub analytic_cost_per_request: f64,
    /// Standard error of the mean per-request cost.
    pub std_error: f64,
}

impl TrialResult {
    /// Deviation of the empirical mean from the analytic value in standard errors.
    pub fn z_score(&self) -> f64 {
        z_score(
            self.empirical_cost_per_request,
            self.analytic_cost_per_request,
            self.std_error,
        )
    }
}

fn z_score(empirical: f64, analytic: f64, std_error: f64) -> f64 {
    let diff = empirical - analytic;
    if std_error > 0.0 {
        diff / std_error
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// Simulates `requests` requests against the layout `params`.
pub fn run_trial<R: Rng + ?Sized>(
    params: &LayoutParams,
    catalog: &Catalog,
    cost: &CostParams,
    requests: usize,
    rng: &mut R,
) -> Result<TrialResult> {
    if cost.mode() != AccountingMode::PerRequest {
        return Err(Error::UnsupportedMode);
    }
    if requests == 0 {
        return Err(Error::invalid("requests", "must be at least 1"));
    }
    params.check_fits(catalog)?;
    let analytic = cost::total_cost(params, catalog, cost)?;

    let layout = CacheLayout::build(*params);
    let owners = layout.owner_table();
    let n = params.bs_count();

    let (mut local, mut ran, mut backhaul) = (0usize, 0usize, 0usize);
    for _ in 0..requests {
        let bs = rng.random_range(1..=n);
        let rank = catalog.sample_rank_unchecked(rng.random::<f64>());
        match owners.get(rank) {
            None => backhaul += 1,
            Some(None) => local += 1,
            Some(Some(owner)) if *owner == bs => local += 1,
            Some(Some(_)) => ran += 1,
        }
    }

    let total = requests as f64;
    let (alpha, beta) = (cost.alpha(), cost.beta());
    let sum = ran as f64 * alpha + backhaul as f64 * beta;
    let sum_sq = ran as f64 * alpha * alpha + backhaul as f64 * beta * beta;
    let mean = sum / total;
    let std_error = if requests > 1 {
        let var = ((sum_sq - total * mean * mean) / (total - 1.0)).max(0.0);
        (var / total).sqrt()
    } else {
        0.0
    };

    Ok(TrialResult {
        n_bs: n,
        redundant_count: params.redundant_count(),
        requests,
        empirical_cost_per_request: mean,
        local_hit_fraction: local as f64 / total,
        empirical_ran_fraction: ran as f64 / total,
        empirical_backhaul_fraction: backhaul as f64 / total,
        analytic_cost_per_request: analytic,
        std_error,
    })
}

/// Runs `cfg.trials` independent trials at a fixed redundant count, drawing
/// the station count per trial. Results are in trial order.
pub fn run_trials(
    cfg: &SimConfig,
    cache_size: usize,
    redundant_count: usize,
    catalog: &Catalog,
    cost: &CostParams,
) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    (0..cfg.trials as u64)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, t));
            let n = sample_bs_count(cfg, &mut rng)?;
            let params = LayoutParams::new(n, cache_size, redundant_count)?;
            run_trial(&params, catalog, cost, cfg.requests_per_trial, &mut rng)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Pass,
    Fail,
    Infeasible,
}

/// One redundant count of a validation grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub redundant_count: usize,
    pub status: RowStatus,
    pub trial: Option<TrialResult>,
}

impl ValidationRow {
    pub fn z_score(&self) -> Option<f64> {
        self.trial.as_ref().map(TrialResult::z_score)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    /// True when no evaluated row exceeds the z threshold.
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.status != RowStatus::Fail)
    }
}

/// Simulates every redundant count in `grid` on `instance` (whose station
/// count is used as-is) and compares each against the analytic cost.
pub fn validate_model(
    cfg: &SimConfig,
    instance: &Instance,
    grid: &[usize],
) -> Result<ValidationReport> {
    cfg.validate()?;
    let rows = grid
        .iter()
        .enumerate()
        .map(|(idx, &r)| {
            let params = instance.layout(r)?;
            if params.check_fits(&instance.catalog).is_err() {
                return Ok(ValidationRow {
                    redundant_count: r,
                    status: RowStatus::Infeasible,
                    trial: None,
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, idx as u64));
            let trial = run_trial(
                &params,
                &instance.catalog,
                &instance.cost,
                cfg.requests_per_trial,
                &mut rng,
            )?;
            let status = if trial.z_score().abs() <= Z_THRESHOLD {
                RowStatus::Pass
            } else {
                RowStatus::Fail
            };
            Ok(ValidationRow {
                redundant_count: r,
                status,
                trial: Some(trial),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ValidationReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn per_request() -> CostParams {
        CostParams::new(1.0, 4.0, AccountingMode::PerRequest).unwrap()
    }

    fn tiny() -> Instance {
        Instance::new(2, 2, Catalog::new(8, 0.0).unwrap(), per_request()).unwrap()
    }

    #[test]
    fn fixed_count_overrides_poisson() {
        let cfg = SimConfig {
            fixed_bs_count: Some(6),
            ..SimConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_bs_count(&cfg, &mut rng).unwrap(), 6);
    }

    #[test]
    fn default_mean_count() {
        let mean = SimConfig::default().mean_bs_count();
        assert!((mean - std::f64::consts::TAU).abs() < 1e-12);
    }

    #[test]
    fn large_mean_poisson() {
        // mean 100: truncation is negligible
        let cfg = SimConfig {
            radius: (100.0 / (2e-4 * std::f64::consts::PI)).sqrt(),
            ..SimConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 100_000;
        let sum: usize = (0..draws)
            .map(|_| sample_bs_count(&cfg, &mut rng).unwrap())
            .sum();
        let mean = sum as f64 / draws as f64;
        assert!((mean - 100.0).abs() / 100.0 < 0.01, "mean {mean}");
    }

    #[test]
    fn fully_redundant_trial_has_no_ran_traffic() {
        let params = LayoutParams::new(2, 2, 2).unwrap();
        let cat = Catalog::new(8, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let trial = run_trial(&params, &cat, &per_request(), 10_000, &mut rng).unwrap();
        assert_eq!(trial.empirical_ran_fraction, 0.0);
    }

    #[test]
    fn fractions_partition_requests() {
        let params = LayoutParams::new(3, 4, 1).unwrap();
        let cat = Catalog::new(40, 0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = run_trial(&params, &cat, &per_request(), 12_345, &mut rng).unwrap();
        let sum = t.local_hit_fraction + t.empirical_ran_fraction + t.empirical_backhaul_fraction;
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn paper_literal_is_not_simulated() {
        let params = LayoutParams::new(2, 2, 0).unwrap();
        let cat = Catalog::new(8, 0.0).unwrap();
        let cost = per_request().with_mode(AccountingMode::PaperLiteral);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            run_trial(&params, &cat, &cost, 10, &mut rng),
            Err(Error::UnsupportedMode)
        );
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = SimConfig {
            requests_per_trial: 5_000,
            trials: 4,
            seed: 77,
            ..SimConfig::default()
        };
        let cat = Catalog::new(500, 0.8).unwrap();
        let a = run_trials(&cfg, 20, 3, &cat, &per_request()).unwrap();
        let b = run_trials(&cfg, 20, 3, &cat, &per_request()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|t| t.n_bs >= 1));
    }

    #[test]
    fn empty_grid_gives_empty_report() {
        let report = validate_model(&SimConfig::default(), &tiny(), &[]).unwrap();
        assert!(report.rows.is_empty());
        assert!(report.all_pass());
    }

    #[test]
    fn infeasible_rows_are_flagged() {
        let inst = Instance::new(2, 3, Catalog::new(5, 0.8).unwrap(), per_request()).unwrap();
        let cfg = SimConfig {
            requests_per_trial: 20_000,
            ..SimConfig::default()
        };
        let report = validate_model(&cfg, &inst, &[0, 1, 3]).unwrap();
        assert_eq!(report.rows[0].status, RowStatus::Infeasible);
        assert!(report.rows[0].trial.is_none());
        assert!(report.rows[1].trial.is_some());
        assert!(report.rows[2].trial.is_some());
    }

    #[test]
    fn positions_lie_in_disk() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = sample_bs_positions(100, 100.0, &mut rng);
        assert_eq!(pts.len(), 100);
        assert!(pts.iter().all(|(x, y)| x * x + y * y <= 100.0 * 100.0));
    }

    #[test]
    fn z_score_handles_zero_error() {
        assert_eq!(z_score(1.0, 1.0, 0.0), 0.0);
        assert_eq!(z_score(2.0, 1.0, 0.0), f64::INFINITY);
    }
}
