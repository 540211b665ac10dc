//! Transmission-cost accounting for a cache layout.
//!
//! A request for a file cached at the serving station is free. A request for
//! a file held by another station costs `alpha` (inter-station RAN transfer).
//! A request for a file cached nowhere costs `alpha * mu_br` (backhaul).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{self, LayoutParams};
use crate::popularity::Catalog;

/// How the RAN component is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccountingMode {
    /// `alpha * N * sum_j f_j`: the double sum over serving station `i` and
    /// holding station `j`, self-hits included.
    PaperLiteral,
    /// `alpha * (N-1)/N * sum_j f_j`: expected cost of one request arriving
    /// at a uniformly chosen station, self-hits free.
    #[default]
    PerRequest,
}

impl AccountingMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AccountingMode::PaperLiteral => "paper-literal",
            AccountingMode::PerRequest => "per-request",
        }
    }
}

impl fmt::Display for AccountingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AccountingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "paper-literal" => Ok(AccountingMode::PaperLiteral),
            "per-request" => Ok(AccountingMode::PerRequest),
            _ => Err(Error::invalid(
                "mode",
                format!("expected `per-request` or `paper-literal`, got `{s}`"),
            )),
        }
    }
}

/// Unit RAN cost `alpha`, backhaul-to-RAN ratio `mu_br` (so the unit
/// backhaul cost is `alpha * mu_br`) and the accounting mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    alpha: f64,
    mu_br: f64,
    mode: AccountingMode,
}

impl CostParams {
    pub fn new(alpha: f64, mu_br: f64, mode: AccountingMode) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::invalid(
                "alpha",
                format!("must be finite and non-negative, got {alpha}"),
            ));
        }
        if !mu_br.is_finite() || mu_br < 1.0 {
            return Err(Error::invalid(
                "mu_br",
                format!("must be finite and at least 1, got {mu_br}"),
            ));
        }
        Ok(CostParams { alpha, mu_br, mode })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu_br(&self) -> f64 {
        self.mu_br
    }

    /// Unit backhaul cost.
    pub fn beta(&self) -> f64 {
        self.alpha * self.mu_br
    }

    pub fn mode(&self) -> AccountingMode {
        self.mode
    }

    pub fn with_mode(self, mode: AccountingMode) -> Self {
        CostParams { mode, ..self }
    }
}

/// RAN, backhaul and total cost of one layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub ran: f64,
    pub backhaul: f64,
    pub total: f64,
}

pub fn ran_cost(params: &LayoutParams, catalog: &Catalog, cost: &CostParams) -> Result<f64> {
    let spec = layout::total_specific_mass(params, catalog)?;
    let n = params.bs_count() as f64;
    Ok(match cost.mode {
        AccountingMode::PaperLiteral => cost.alpha * n * spec,
        AccountingMode::PerRequest => cost.alpha * ((n - 1.0) / n) * spec,
    })
}

pub fn backhaul_cost(params: &LayoutParams, catalog: &Catalog, cost: &CostParams) -> Result<f64> {
    Ok(cost.beta() * layout::backhaul_mass(params, catalog)?)
}

pub fn evaluate(
    params: &LayoutParams,
    catalog: &Catalog,
    cost: &CostParams,
) -> Result<CostBreakdown> {
    let ran = ran_cost(params, catalog, cost)?;
    let backhaul = backhaul_cost(params, catalog, cost)?;
    Ok(CostBreakdown {
        ran,
        backhaul,
        total: ran + backhaul,
    })
}

pub fn total_cost(params: &LayoutParams, catalog: &Catalog, cost: &CostParams) -> Result<f64> {
    evaluate(params, catalog, cost).map(|c| c.total)
}

/// A problem instance: everything but the redundant count.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub bs_count: usize,
    pub cache_size: usize,
    pub catalog: Catalog,
    pub cost: CostParams,
}

impl Instance {
    pub fn new(
        bs_count: usize,
        cache_size: usize,
        catalog: Catalog,
        cost: CostParams,
    ) -> Result<Self> {
        LayoutParams::new(bs_count, cache_size, 0)?;
        Ok(Instance {
            bs_count,
            cache_size,
            catalog,
            cost,
        })
    }

    pub fn layout(&self, redundant_count: usize) -> Result<LayoutParams> {
        LayoutParams::new(self.bs_count, self.cache_size, redundant_count)
    }

    /// Costs at redundant count `r`.
    pub fn evaluate(&self, redundant_count: usize) -> Result<CostBreakdown> {
        evaluate(&self.layout(redundant_count)?, &self.catalog, &self.cost)
    }

    pub fn total_cost(&self, redundant_count: usize) -> Result<f64> {
        self.evaluate(redundant_count).map(|c| c.total)
    }

    pub fn with_cost(&self, cost: CostParams) -> Self {
        Instance {
            cost,
            ..self.clone()
        }
    }
}

/// One point of a cost curve; `costs` is `None` when the layout needs more
/// distinct files than the catalog holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub redundant_count: usize,
    pub costs: Option<CostBreakdown>,
}

impl CurvePoint {
    pub fn is_feasible(&self) -> bool {
        self.costs.is_some()
    }
}

/// Costs for every `R = 0..=M`, infeasible points flagged.
pub fn cost_curve(instance: &Instance) -> Vec<CurvePoint> {
    (0..=instance.cache_size)
        .map(|r| CurvePoint {
            redundant_count: r,
            costs: instance.evaluate(r).ok(),
        })
        .collect()
}

/// Feasible point of minimum total cost; ties go to the smaller `R`.
pub fn curve_argmin(curve: &[CurvePoint]) -> Option<(usize, CostBreakdown)> {
    let mut best: Option<(usize, CostBreakdown)> = None;
    for p in curve {
        if let Some(c) = p.costs {
            if best.is_none_or(|(_, b)| c.total < b.total) {
                best = Some((p.redundant_count, c));
            }
        }
    }
    best
}
