//! Parameter sweeps over the redundancy tradeoff and their CSV/JSON output.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{AccountingMode, CostParams, Instance};
use crate::error::{Error, Result};
use crate::optimizer::{self, OptimResult, PsoConfig};
use crate::popularity::Catalog;
use crate::simulator::{self, SimConfig};

/// Stable CSV column order.
pub const CSV_COLUMNS: [&str; 11] = [
    "axis",
    "eta_opt",
    "r_opt",
    "cost_opt",
    "cost_eta0",
    "cost_eta1",
    "reduction_vs_eta0_pct",
    "reduction_vs_eta1_pct",
    "mode",
    "optimizer",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    #[serde(alias = "mu-br")]
    MuBr,
    S,
    M,
    R,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::MuBr => "mu_br",
            SweepAxis::S => "s",
            SweepAxis::M => "m",
            SweepAxis::R => "r",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "mu_br" => Ok(SweepAxis::MuBr),
            "s" => Ok(SweepAxis::S),
            "m" => Ok(SweepAxis::M),
            "r" => Ok(SweepAxis::R),
            _ => Err(Error::invalid(
                "axis",
                format!("expected one of mu_br, s, m, r; got `{s}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    #[default]
    Oracle,
    PsoLiteral,
    PsoPractical,
    /// No search: the row reports the cost at the swept `R` itself.
    Fixed,
}

impl OptimizerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptimizerKind::Oracle => "oracle",
            OptimizerKind::PsoLiteral => "pso-literal",
            OptimizerKind::PsoPractical => "pso-practical",
            OptimizerKind::Fixed => "fixed",
        }
    }

    /// Solves `instance` with this optimizer; `Fixed` is not a solver.
    pub fn solve(&self, instance: &Instance, seed: u64) -> Result<OptimResult> {
        match self {
            OptimizerKind::Oracle => optimizer::exhaustive_oracle(instance),
            OptimizerKind::PsoLiteral => {
                optimizer::pso_optimize(instance, &PsoConfig::literal().with_seed(seed))
            }
            OptimizerKind::PsoPractical => {
                optimizer::pso_optimize(instance, &PsoConfig::practical().with_seed(seed))
            }
            OptimizerKind::Fixed => Err(Error::invalid(
                "optimizer",
                "`fixed` only applies to an `r` sweep",
            )),
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "oracle" => Ok(OptimizerKind::Oracle),
            "pso-literal" => Ok(OptimizerKind::PsoLiteral),
            "pso-practical" => Ok(OptimizerKind::PsoPractical),
            "fixed" => Ok(OptimizerKind::Fixed),
            _ => Err(Error::invalid(
                "optimizer",
                format!("expected oracle, pso-literal, pso-practical or fixed; got `{s}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid(
                "format",
                format!("expected csv or json, got `{s}`"),
            )),
        }
    }
}

/// A sweep description. Deserializes from a flat JSON object; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "defaults::bs_count")]
    pub bs_count: usize,
    /// Draw the station count per point from the Poisson process instead.
    #[serde(default)]
    pub ppp: bool,
    #[serde(default = "defaults::radius")]
    pub radius: f64,
    #[serde(default = "defaults::density")]
    pub density: f64,
    #[serde(default = "defaults::cache_size")]
    pub cache_size: usize,
    #[serde(default = "defaults::file_count")]
    pub file_count: usize,
    #[serde(default = "defaults::exponent")]
    pub exponent: f64,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::mu_br")]
    pub mu_br: f64,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default)]
    pub mode: AccountingMode,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    pub fn bs_count() -> usize {
        6
    }
    pub fn radius() -> f64 {
        100.0
    }
    pub fn density() -> f64 {
        2e-4
    }
    pub fn cache_size() -> usize {
        50
    }
    pub fn file_count() -> usize {
        500
    }
    pub fn exponent() -> f64 {
        0.8
    }
    pub fn alpha() -> f64 {
        1.0
    }
    pub fn mu_br() -> f64 {
        4.0
    }
}

impl ExperimentSpec {
    /// Default instance swept along `axis`.
    pub fn new(axis: SweepAxis, values: Vec<f64>) -> Self {
        ExperimentSpec {
            bs_count: defaults::bs_count(),
            ppp: false,
            radius: defaults::radius(),
            density: defaults::density(),
            cache_size: defaults::cache_size(),
            file_count: defaults::file_count(),
            exponent: defaults::exponent(),
            alpha: defaults::alpha(),
            mu_br: defaults::mu_br(),
            axis,
            values,
            mode: AccountingMode::default(),
            optimizer: OptimizerKind::default(),
            output: None,
            format: OutputFormat::default(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "must not be empty"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("non-finite value {v}")));
        }
        if matches!(self.axis, SweepAxis::M | SweepAxis::R) {
            if let Some(v) = self.values.iter().find(|v| v.fract() != 0.0 || **v < 0.0) {
                return Err(Error::invalid(
                    "values",
                    format!(
                        "{} axis needs non-negative integers, got {v}",
                        self.axis.as_str()
                    ),
                ));
            }
        }
        if (self.optimizer == OptimizerKind::Fixed) != (self.axis == SweepAxis::R) {
            return Err(Error::invalid(
                "optimizer",
                "an `r` sweep requires `fixed`, and `fixed` requires an `r` sweep",
            ));
        }
        if self.ppp {
            self.sim_config().validate()?;
        } else if self.bs_count == 0 {
            return Err(Error::invalid("bs_count", "must be at least 1"));
        }
        Catalog::new(self.file_count, self.exponent)?;
        CostParams::new(self.alpha, self.mu_br, self.mode)?;
        Ok(())
    }

    fn sim_config(&self) -> SimConfig {
        SimConfig {
            radius: self.radius,
            density: self.density,
            seed: self.seed,
            ..SimConfig::default()
        }
    }
}

/// One sweep point. Optional fields are empty when the point is infeasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: f64,
    pub eta_opt: Option<f64>,
    pub r_opt: Option<usize>,
    pub cost_opt: Option<f64>,
    pub cost_eta0: Option<f64>,
    pub cost_eta1: Option<f64>,
    pub reduction_vs_eta0_pct: Option<f64>,
    pub reduction_vs_eta1_pct: Option<f64>,
    pub mode: AccountingMode,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

/// Instance actually evaluated at a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointMeta {
    pub bs_count: usize,
    pub cache_size: usize,
    pub file_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub points: Vec<PointMeta>,
    /// Adjustments made to the requested instance, e.g. catalog scaling.
    pub notes: Vec<String>,
}

/// `1 - cost / baseline` as a percentage; zero when both costs vanish.
pub fn reduction_pct(cost: f64, baseline: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        100.0 * (1.0 - cost / baseline)
    }
}

/// Runs every point of `spec`, ordered by ascending axis value.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut values = spec.values.clone();
    values.sort_by(f64::total_cmp);

    let mut bs_counts = Vec::with_capacity(values.len());
    for idx in 0..values.len() {
        bs_counts.push(if spec.ppp {
            let mut rng = ChaCha8Rng::seed_from_u64(simulator::derive_seed(spec.seed, idx as u64));
            simulator::sample_bs_count(&spec.sim_config(), &mut rng)?
        } else {
            spec.bs_count
        });
    }

    let mut notes = Vec::new();
    let mut file_count = spec.file_count;
    if spec.axis == SweepAxis::M {
        let needed = values
            .iter()
            .zip(&bs_counts)
            .map(|(m, n)| *m as usize * n)
            .max()
            .unwrap_or(0);
        if needed > file_count {
            file_count = spec.file_count * needed.div_ceil(spec.file_count);
            notes.push(format!(
                "file_count scaled from {} to {} so every cache size fits (max M*N = {})",
                spec.file_count, file_count, needed
            ));
        }
    }

    let mut rows = Vec::with_capacity(values.len());
    let mut points = Vec::with_capacity(values.len());
    for (&value, &bs_count) in values.iter().zip(&bs_counts) {
        let (mut cache_size, mut exponent, mut mu_br) =
            (spec.cache_size, spec.exponent, spec.mu_br);
        match spec.axis {
            SweepAxis::MuBr => mu_br = value,
            SweepAxis::S => exponent = value,
            SweepAxis::M => cache_size = value as usize,
            SweepAxis::R => {}
        }
        let instance = Instance::new(
            bs_count,
            cache_size,
            Catalog::new(file_count, exponent)?,
            CostParams::new(spec.alpha, mu_br, spec.mode)?,
        )?;
        points.push(PointMeta {
            bs_count,
            cache_size,
            file_count,
        });
        rows.push(sweep_point(spec, value, &instance)?);
    }

    Ok(SweepResult {
        rows,
        points,
        notes,
    })
}

fn sweep_point(spec: &ExperimentSpec, value: f64, instance: &Instance) -> Result<SweepRow> {
    let m = instance.cache_size;
    let cost_eta0 = instance.total_cost(0).ok();
    let cost_eta1 = instance.total_cost(m).ok();

    let solved = match spec.axis {
        SweepAxis::R => {
            let r = value as usize;
            if r > m {
                return Err(Error::invalid(
                    "values",
                    format!("R = {r} exceeds cache size {m}"),
                ));
            }
            instance
                .total_cost(r)
                .ok()
                .map(|c| (optimizer::eta_for(r, m), r, c))
        }
        _ => match spec.optimizer.solve(instance, spec.seed) {
            Ok(res) => Some((res.eta_opt, res.r_opt, res.cost_opt)),
            Err(Error::InfeasibleLayout { .. }) => None,
            Err(e) => return Err(e),
        },
    };

    let (eta_opt, r_opt, cost_opt) = match solved {
        Some((e, r, c)) => (Some(e), Some(r), Some(c)),
        None => (None, None, None),
    };
    let reduction = |base: Option<f64>| Some(reduction_pct(cost_opt?, base?));

    Ok(SweepRow {
        axis: value,
        eta_opt,
        r_opt,
        cost_opt,
        cost_eta0,
        cost_eta1,
        reduction_vs_eta0_pct: reduction(cost_eta0),
        reduction_vs_eta1_pct: reduction(cost_eta1),
        mode: spec.mode,
        optimizer: spec.optimizer,
        seed: spec.seed,
    })
}

/// Decimal rendering with 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            "0.00000000000".to_string()
        } else {
            x.to_string()
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding may carry into a new leading digit (9.99...95 -> 10.0...).
    let digits = s.chars().filter(char::is_ascii_digit).count();
    let leading_zeros = if magnitude < 0 {
        (-magnitude) as usize
    } else {
        0
    };
    if digits - leading_zeros > 12 && decimals > 0 {
        let decimals = decimals - 1;
        format!("{x:.decimals$}")
    } else {
        s
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(format_sig12).unwrap_or_default()
}

/// CSV document: header plus one LF-terminated line per row.
pub fn emit_csv(rows: &[SweepRow]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let fields = [
            format_sig12(r.axis),
            fmt_opt(r.eta_opt),
            r.r_opt.map(|v| v.to_string()).unwrap_or_default(),
            fmt_opt(r.cost_opt),
            fmt_opt(r.cost_eta0),
            fmt_opt(r.cost_eta1),
            fmt_opt(r.reduction_vs_eta0_pct),
            fmt_opt(r.reduction_vs_eta1_pct),
            r.mode.to_string(),
            r.optimizer.to_string(),
            r.seed.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Parses a document produced by [`emit_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid("csv", "missing header"))?;
    if header != CSV_COLUMNS.join(",") {
        return Err(Error::invalid(
            "csv",
            format!("unexpected header `{header}`"),
        ));
    }

    fn num<T: FromStr>(field: &str, name: &'static str) -> Result<Option<T>> {
        if field.is_empty() {
            return Ok(None);
        }
        field
            .parse()
            .map(Some)
            .map_err(|_| Error::invalid(name, format!("cannot parse `{field}`")))
    }

    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != CSV_COLUMNS.len() {
                return Err(Error::invalid(
                    "csv",
                    format!("expected {} fields, got {}", CSV_COLUMNS.len(), f.len()),
                ));
            }
            Ok(SweepRow {
                axis: num(f[0], "axis")?.ok_or_else(|| Error::invalid("axis", "missing"))?,
                eta_opt: num(f[1], "eta_opt")?,
                r_opt: num(f[2], "r_opt")?,
                cost_opt: num(f[3], "cost_opt")?,
                cost_eta0: num(f[4], "cost_eta0")?,
                cost_eta1: num(f[5], "cost_eta1")?,
                reduction_vs_eta0_pct: num(f[6], "reduction_vs_eta0_pct")?,
                reduction_vs_eta1_pct: num(f[7], "reduction_vs_eta1_pct")?,
                mode: f[8].parse()?,
                optimizer: f[9].parse()?,
                seed: num(f[10], "seed")?.ok_or_else(|| Error::invalid("seed", "missing"))?,
            })
        })
        .collect()
}

/// JSON array of row objects with the CSV column names.
pub fn emit_json(rows: &[SweepRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

pub fn emit(rows: &[SweepRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => emit_csv(rows),
        OutputFormat::Json => emit_json(rows),
    }
}
