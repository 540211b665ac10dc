//! Redundancy-ratio search.
//!
//! The decision variable is the redundancy ratio `eta = R / M`. It is relaxed
//! to the continuous box `[0, 1]` with `R = floor(eta * M)`, which the particle
//! swarm searches. Since only `M + 1` distinct values of `R` exist, exhaustive
//! enumeration gives the exact optimum and serves as the reference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{self, Instance};
use crate::error::{Error, Result};

/// Swarm parameters. [`PsoConfig::default`] is the literal configuration;
/// [`PsoConfig::practical`] trades fidelity for a swarm that actually moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub max_iters: usize,
    pub cognitive: f64,
    pub social: f64,
    pub v_max: f64,
    /// Initial velocities are uniform in `[-v_init_half_range, v_init_half_range]`.
    pub v_init_half_range: f64,
    /// Inertia at iteration `t` is `inertia_base + inertia_slope * t / max_iters`.
    pub inertia_base: f64,
    pub inertia_slope: f64,
    /// Stop once the global best has not improved for this many iterations.
    pub stall_window: usize,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig::literal()
    }
}

impl PsoConfig {
    pub fn literal() -> Self {
        PsoConfig {
            swarm_size: 200,
            max_iters: 100,
            cognitive: 0.1,
            social: 10.0,
            v_max: 0.0001,
            v_init_half_range: 0.01,
            inertia_base: 0.9,
            inertia_slope: 0.5,
            stall_window: 20,
            seed: 0,
        }
    }

    pub fn practical() -> Self {
        PsoConfig {
            v_max: 0.1,
            cognitive: 2.0,
            social: 2.0,
            inertia_slope: -0.5,
            ..PsoConfig::literal()
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        PsoConfig { seed, ..self }
    }

    pub fn inertia(&self, iteration: usize) -> f64 {
        self.inertia_base + self.inertia_slope * iteration as f64 / self.max_iters as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::invalid("swarm_size", "must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be at least 1"));
        }
        if self.stall_window == 0 {
            return Err(Error::invalid("stall_window", "must be at least 1"));
        }
        if !(self.v_max.is_finite() && self.v_max > 0.0) {
            return Err(Error::invalid("v_max", "must be finite and positive"));
        }
        if !(self.v_init_half_range.is_finite() && self.v_init_half_range > 0.0) {
            return Err(Error::invalid(
                "v_init_half_range",
                "must be finite and positive",
            ));
        }
        for (field, v) in [
            ("cognitive", self.cognitive),
            ("social", self.social),
            ("inertia_base", self.inertia_base),
            ("inertia_slope", self.inertia_slope),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(field, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Outcome of a search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimResult {
    pub eta_opt: f64,
    pub r_opt: usize,
    pub cost_opt: f64,
    pub iterations_run: usize,
    pub evaluations: usize,
    /// Global best cost after each iteration (PSO only).
    pub trace: Option<Vec<f64>>,
}

/// `R = floor(eta * M)`, clamped to `M`.
pub fn redundant_count_for(eta: f64, cache_size: usize) -> usize {
    ((eta * cache_size as f64).floor() as usize).min(cache_size)
}

/// Smallest ratio that maps back to `redundant_count` under the floor rule.
pub fn eta_for(redundant_count: usize, cache_size: usize) -> f64 {
    let mut eta = redundant_count as f64 / cache_size as f64;
    while redundant_count_for(eta, cache_size) < redundant_count {
        eta = eta.next_up();
    }
    eta
}

/// Total cost at redundancy ratio `eta`.
pub fn objective(eta: f64, instance: &Instance) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid(
            "eta",
            format!("must lie in [0, 1], got {eta}"),
        ));
    }
    instance.total_cost(redundant_count_for(eta, instance.cache_size))
}

/// Exact optimum by evaluating every feasible `R`; ties go to the smaller `R`.
pub fn exhaustive_oracle(instance: &Instance) -> Result<OptimResult> {
    let curve = cost::cost_curve(instance);
    let evaluations = curve.iter().filter(|p| p.is_feasible()).count();
    let (r_opt, best) = cost::curve_argmin(&curve).ok_or(Error::InfeasibleLayout {
        distinct: instance.cache_size,
        file_count: instance.catalog.file_count(),
    })?;
    Ok(OptimResult {
        eta_opt: eta_for(r_opt, instance.cache_size),
        r_opt,
        cost_opt: best.total,
        iterations_run: 1,
        evaluations,
        trace: None,
    })
}

/// Particle positions and velocities after the last update, for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

/// Adapted PSO over `eta in [0, 1]`.
pub fn pso_optimize(instance: &Instance, cfg: &PsoConfig) -> Result<OptimResult> {
    pso_optimize_observed(instance, cfg, |_, _| {})
}

/// As [`pso_optimize`], calling `observe(iteration, state)` after each
/// velocity and position update.
pub fn pso_optimize_observed<F>(
    instance: &Instance,
    cfg: &PsoConfig,
    mut observe: F,
) -> Result<OptimResult>
where
    F: FnMut(usize, &SwarmState),
{
    cfg.validate()?;
    // R = M is the layout with the fewest distinct files.
    instance
        .layout(instance.cache_size)?
        .check_fits(&instance.catalog)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = cfg.swarm_size;

    let mut state = SwarmState {
        positions: Vec::with_capacity(m),
        velocities: Vec::with_capacity(m),
    };
    for _ in 0..m {
        state.positions.push(rng.random::<f64>());
        state
            .velocities
            .push(rng.random::<f64>() * 2.0 * cfg.v_init_half_range - cfg.v_init_half_range);
    }

    let mut personal_cost = vec![f64::INFINITY; m];
    let mut personal_best = vec![0.0; m];
    let mut global_cost = f64::INFINITY;
    let mut global_best = 0.0;

    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut evaluations = 0;
    let mut stall = 0;
    let mut t = 0;

    loop {
        t += 1;

        for i in 0..m {
            let c = objective(state.positions[i], instance).unwrap_or(f64::INFINITY);
            evaluations += 1;
            if c < personal_cost[i] {
                personal_cost[i] = c;
                personal_best[i] = state.positions[i];
            }
        }

        let (leader, &leader_cost) = personal_cost
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("swarm is non-empty");
        if global_cost > leader_cost {
            global_cost = leader_cost;
            global_best = personal_best[leader];
            stall = 0;
        } else {
            stall += 1;
        }
        trace.push(global_cost);

        let w = cfg.inertia(t);
        let particles = state.positions.iter_mut().zip(&mut state.velocities);
        for ((eta, vel), &best) in particles.zip(&personal_best) {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let v = w * *vel
                + cfg.cognitive * u1 * (best - *eta)
                + cfg.social * u2 * (global_best - *eta);
            *vel = v.clamp(-cfg.v_max, cfg.v_max);
            *eta = (*eta + *vel).clamp(0.0, 1.0);
        }
        observe(t, &state);

        if t >= cfg.max_iters || stall >= cfg.stall_window {
            break;
        }
    }

    if !global_cost.is_finite() {
        return Err(Error::InfeasibleLayout {
            distinct: instance.layout(0)?.distinct_count(),
            file_count: instance.catalog.file_count(),
        });
    }

    Ok(OptimResult {
        eta_opt: global_best,
        r_opt: redundant_count_for(global_best, instance.cache_size),
        cost_opt: global_cost,
        iterations_run: t,
        evaluations,
        trace: Some(trace),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{AccountingMode, CostParams};
    use crate::popularity::Catalog;

    fn tiny() -> Instance {
        Instance::new(
            2,
            2,
            Catalog::new(8, 0.0).unwrap(),
            CostParams::new(1.0, 4.0, AccountingMode::PerRequest).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn floor_mapping() {
        assert_eq!(redundant_count_for(0.0, 50), 0);
        assert_eq!(redundant_count_for(1.0, 50), 50);
        assert_eq!(redundant_count_for(0.5, 2), 1);
        assert_eq!(redundant_count_for(0.999, 2), 1);
        for m in 1..=200 {
            for r in 0..=m {
                assert_eq!(redundant_count_for(eta_for(r, m), m), r, "r={r} m={m}");
            }
        }
    }

    #[test]
    fn objective_at_boundaries() {
        let inst = tiny();
        assert_eq!(objective(0.0, &inst).unwrap(), 2.25);
        assert_eq!(objective(0.5, &inst).unwrap(), 2.625);
        assert_eq!(objective(1.0, &inst).unwrap(), 3.0);
        assert!(objective(-0.01, &inst).is_err());
        assert!(objective(1.01, &inst).is_err());
        assert!(objective(f64::NAN, &inst).is_err());
    }

    #[test]
    fn oracle_on_tiny_instance() {
        let res = exhaustive_oracle(&tiny()).unwrap();
        assert_eq!(res.r_opt, 0);
        assert_eq!(res.cost_opt, 2.25);
        assert_eq!(res.eta_opt, 0.0);
        assert_eq!(res.evaluations, 3);
    }

    #[test]
    fn single_station_oracle_picks_smallest_r() {
        let inst = Instance::new(
            1,
            10,
            Catalog::new(100, 0.8).unwrap(),
            CostParams::new(1.0, 4.0, AccountingMode::PerRequest).unwrap(),
        )
        .unwrap();
        assert_eq!(exhaustive_oracle(&inst).unwrap().r_opt, 0);
    }

    #[test]
    fn degenerate_swarm_returns_initial_objective() {
        let inst = tiny();
        let cfg = PsoConfig {
            swarm_size: 1,
            max_iters: 1,
            ..PsoConfig::literal().with_seed(3)
        };
        let res = pso_optimize(&inst, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eta0: f64 = rng.random();
        assert_eq!(res.eta_opt, eta0);
        assert_eq!(res.cost_opt, objective(eta0, &inst).unwrap());
        assert_eq!(res.iterations_run, 1);
        assert_eq!(res.evaluations, 1);
    }

    #[test]
    fn config_validation() {
        assert!(PsoConfig {
            swarm_size: 0,
            ..PsoConfig::literal()
        }
        .validate()
        .is_err());
        assert!(PsoConfig {
            v_max: 0.0,
            ..PsoConfig::literal()
        }
        .validate()
        .is_err());
        assert!(PsoConfig {
            social: f64::NAN,
            ..PsoConfig::literal()
        }
        .validate()
        .is_err());
        assert!(PsoConfig::practical().validate().is_ok());
    }

    #[test]
    fn literal_inertia_schedule() {
        let cfg = PsoConfig::literal();
        assert_eq!(cfg.inertia(0), 0.9);
        assert!((cfg.inertia(100) - 1.4).abs() < 1e-15);
        assert!((PsoConfig::practical().inertia(100) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn infeasible_instance_is_rejected() {
        let inst = Instance::new(
            2,
            10,
            Catalog::new(5, 0.8).unwrap(),
            CostParams::new(1.0, 4.0, AccountingMode::PerRequest).unwrap(),
        )
        .unwrap();
        assert!(exhaustive_oracle(&inst).is_err());
        assert!(pso_optimize(&inst, &PsoConfig::literal()).is_err());
    }
}
