//! End-to-end runs: reference optimization on the full data, aggregated
//! design with extreme-day selection, full-horizon operation of the
//! resulting design, grid-limit sweeps and cluster-count comparisons.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::KMeansConfig;
use crate::extremes::{
    iterate_feasibility, iterate_slack, simple_seed, Aggregation, ExtremeDay, ExtremeError, ExtremePeriod,
    LoopSetup, ModificationMode, SelectionLimits, SelectionResult,
};
use crate::lp::LpBackend;
use crate::resys::{
    operate_full, optimize_design, CostBreakdown, DesignOutcome, DesignVariables, GridLimit, ModelError,
    RepresentativeSet, Slack, TechnologyParams,
};
use crate::timeseries::Dataset;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("reference problem is infeasible at c_lim = {0} kW")]
    ReferenceInfeasible(f64),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Extreme(#[from] ExtremeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Clusters only.
    None,
    /// Clusters plus the statistical extremes.
    Simple,
    /// Feasibility-based iterative selection.
    Feasibility,
    /// Slack-based iterative selection.
    Slack,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Method::None),
            "simple" => Ok(Method::Simple),
            "feasibility" => Ok(Method::Feasibility),
            "slack" => Ok(Method::Slack),
            _ => Err(format!("unknown method `{s}` (none, simple, feasibility, slack)")),
        }
    }
}

/// Grid connection, relative to the dataset's unconstrained peak draw or
/// in kW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpec {
    Fraction(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub k: usize,
    pub n_init: usize,
    pub seed: u64,
    pub method: Method,
    pub modification: ModificationMode,
    pub grid: GridSpec,
    pub virtual_days: bool,
    /// Also solve the reference problem at the run's grid limit.
    pub compare_reference: bool,
    pub technology: TechnologyParams,
    pub limits: SelectionLimits,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k: 5,
            n_init: 10_000,
            seed: 0,
            method: Method::Feasibility,
            modification: ModificationMode::FeasibilitySteps,
            grid: GridSpec::Fraction(1.0),
            virtual_days: false,
            compare_reference: true,
            technology: TechnologyParams::default(),
            limits: SelectionLimits::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self, n_days: usize) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::InvalidConfig(m));
        if self.k == 0 || self.k > n_days {
            return bad(format!("k = {} must lie in 1..={n_days}", self.k));
        }
        if self.n_init == 0 {
            return bad("n_init must be at least 1".into());
        }
        match self.grid {
            GridSpec::Fraction(f) | GridSpec::Absolute(f) if !(f >= 0.0) => {
                return bad(format!("grid limit {f} must be nonnegative"));
            }
            _ => {}
        }
        self.technology.validate()?;
        Ok(())
    }

    pub fn kmeans(&self) -> KMeansConfig {
        KMeansConfig::new(self.k, self.seed).with_n_init(self.n_init)
    }

    fn selection_limits(&self) -> SelectionLimits {
        SelectionLimits {
            virtual_days: self.virtual_days,
            ..self.limits.clone()
        }
    }
}

/// Design and operations optimized on the full data.
pub fn run_reference(
    data: &Dataset,
    params: &TechnologyParams,
    grid: GridLimit,
    backend: &dyn LpBackend,
) -> Result<DesignOutcome, PipelineError> {
    optimize_design(&RepresentativeSet::full(data), params, grid, Slack::Off, backend)?
        .ok_or(PipelineError::ReferenceInfeasible(grid.c_lim))
}

/// The unconstrained reference and the grid limit it defines as 100 %:
/// its largest hourly purchase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScale {
    pub unconstrained: DesignOutcome,
    pub c_lim_full: f64,
}

impl GridScale {
    pub fn compute(data: &Dataset, params: &TechnologyParams, backend: &dyn LpBackend) -> Result<Self, PipelineError> {
        let unconstrained = run_reference(data, params, GridLimit::unlimited(), backend)?;
        Ok(Self {
            c_lim_full: unconstrained.max_grid_draw,
            unconstrained,
        })
    }

    pub fn limit(&self, fraction: f64) -> GridLimit {
        GridLimit::new(fraction * self.c_lim_full)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub modification: ModificationMode,
    pub k: usize,
    pub virtual_days: bool,
    pub grid_fraction: Option<f64>,
    /// Grid limit in kW.
    pub c_lim: f64,
    /// Grid limit that counts as 100 %, kW.
    pub c_lim_full: Option<f64>,
    pub dv_ref: Option<DesignVariables>,
    pub f_ref: Option<f64>,
    pub dv_repr: DesignVariables,
    /// Objective of the design problem on the representative periods.
    pub f_clustered: f64,
    /// Capital cost of the representative design plus its operating cost
    /// over every day; present only if every day is feasible.
    pub f_operations: Option<f64>,
    /// `f_ref / f_operations`.
    pub accuracy: Option<f64>,
    pub feasible_full_year: bool,
    pub infeasible_days: Vec<usize>,
    /// Largest hourly slack when the design is operated with slack.
    pub max_slack: f64,
    pub n_extremes: usize,
    pub extreme_days: Vec<ExtremeDay>,
    pub costs: Option<CostBreakdown>,
    /// Relative deviation of each design variable from the reference, %.
    pub dv_deviation_pct: Option<[Option<f64>; 5]>,
    pub selection: Option<SelectionResult>,
}

impl RunReport {
    /// Sweep-table cost: the design-problem objective.
    pub fn total_cost(&self) -> f64 {
        self.f_clustered
    }

    pub fn to_json(&self) -> Result<String, PipelineError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Design table: variable, representative value, reference value,
    /// deviation in percent.
    pub fn design_csv(&self) -> String {
        let mut out = String::from("variable,repr,reference,deviation_pct\n");
        let repr = self.dv_repr.as_array();
        for (i, name) in DesignVariables::NAMES.iter().enumerate() {
            let reference = self.dv_ref.map(|d| d.as_array()[i]);
            let dev = self.dv_deviation_pct.and_then(|d| d[i]);
            let _ = writeln!(out, "{name},{},{},{}", repr[i], opt(reference), opt(dev));
        }
        out
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn deviation(repr: &DesignVariables, reference: &DesignVariables) -> [Option<f64>; 5] {
    let r = repr.as_array();
    let f = reference.as_array();
    std::array::from_fn(|i| (f[i] != 0.0).then(|| 100.0 * (r[i] - f[i]) / f[i]))
}

/// Grid limit of a run, computing the 100 % scale if needed.
pub fn resolve_grid(
    data: &Dataset,
    config: &RunConfig,
    scale: Option<&GridScale>,
    backend: &dyn LpBackend,
) -> Result<(GridLimit, Option<GridScale>), PipelineError> {
    match config.grid {
        GridSpec::Absolute(kw) => Ok((GridLimit::new(kw), scale.cloned())),
        GridSpec::Fraction(f) => {
            let scale = match scale {
                Some(s) => s.clone(),
                None => GridScale::compute(data, &config.technology, backend)?,
            };
            Ok((scale.limit(f), Some(scale)))
        }
    }
}

/// Extreme days chosen by the configured method, with the selection log
/// for the iterative methods.
pub fn select_extremes(
    agg: &Aggregation<'_>,
    config: &RunConfig,
    grid: GridLimit,
    backend: &dyn LpBackend,
) -> Result<(Vec<ExtremePeriod>, Option<SelectionResult>), PipelineError> {
    let limits = config.selection_limits();
    let setup = LoopSetup {
        params: &config.technology,
        grid,
        mode: config.modification,
        limits: &limits,
        backend,
    };
    Ok(match config.method {
        Method::None => (Vec::new(), None),
        Method::Simple => (simple_seed(agg.data, config.virtual_days)?, None),
        Method::Feasibility => {
            let sel = iterate_feasibility(agg, &setup)?;
            (sel.extreme_periods(), Some(sel))
        }
        Method::Slack => {
            let sel = iterate_slack(agg, &setup)?;
            (sel.extreme_periods(), Some(sel))
        }
    })
}

/// Cluster, select extreme days, design on the representatives and operate
/// the design over the full data.
pub fn run_aggregated(
    data: &Dataset,
    config: &RunConfig,
    scale: Option<&GridScale>,
    backend: &dyn LpBackend,
) -> Result<RunReport, PipelineError> {
    config.validate(data.n_days())?;
    let (grid, scale) = resolve_grid(data, config, scale, backend)?;
    let agg = Aggregation::new(data, config.kmeans())?;
    let (extremes, selection) = select_extremes(&agg, config, grid, backend)?;
    let repr = agg.representatives(config.modification, &extremes)?;
    let design = optimize_design(&repr, &config.technology, grid, Slack::Off, backend)?
        .ok_or(ExtremeError::DesignInfeasible)?;
    evaluate(data, config, grid, scale.as_ref(), design, extremes, selection, backend)
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    data: &Dataset,
    config: &RunConfig,
    grid: GridLimit,
    scale: Option<&GridScale>,
    design: DesignOutcome,
    extremes: Vec<ExtremePeriod>,
    selection: Option<SelectionResult>,
    backend: &dyn LpBackend,
) -> Result<RunReport, PipelineError> {
    let params = &config.technology;
    let dv = design.design;
    let strict = operate_full(&dv, data, params, grid, Slack::Off, backend)?;
    let slack = operate_full(&dv, data, params, grid, Slack::On, backend)?;
    let f_operations = strict.operating_cost().map(|opex| params.capital_cost(&dv) + opex);

    let reference = if config.compare_reference {
        Some(run_reference(data, params, grid, backend)?)
    } else {
        None
    };
    let f_ref = reference.as_ref().map(|r| r.objective);
    Ok(RunReport {
        method: config.method,
        modification: config.modification,
        k: config.k,
        virtual_days: config.virtual_days,
        grid_fraction: match config.grid {
            GridSpec::Fraction(f) => Some(f),
            GridSpec::Absolute(_) => None,
        },
        c_lim: grid.c_lim,
        c_lim_full: scale.map(|s| s.c_lim_full),
        dv_ref: reference.as_ref().map(|r| r.design),
        f_ref,
        dv_repr: dv,
        f_clustered: design.objective,
        f_operations,
        accuracy: match (f_ref, f_operations) {
            (Some(r), Some(o)) if o > 0.0 => Some(r / o),
            (Some(r), Some(o)) if r == o => Some(1.0),
            _ => None,
        },
        feasible_full_year: strict.feasible(),
        infeasible_days: strict.infeasible_days(),
        max_slack: slack.max_slack(),
        n_extremes: extremes.len(),
        extreme_days: extremes.into_iter().map(|e| e.day).collect(),
        costs: design.costs,
        dv_deviation_pct: reference.as_ref().map(|r| deviation(&dv, &r.design)),
        selection,
    })
}

/// One sweep point; `report` is `None` if the run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub c_lim: f64,
    pub status: String,
    pub report: Option<RunReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub c_lim_full: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.report.is_some())
    }

    /// Columns: fraction, total_cost, capex_share, opex_share, X, feasible,
    /// status.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,total_cost,capex_share,opex_share,X,feasible,status\n");
        for row in &self.rows {
            match &row.report {
                Some(r) => {
                    let (capex, opex) = r.costs.map_or((None, None), |c| (Some(c.capex_share), Some(c.opex_share)));
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        row.fraction,
                        r.total_cost(),
                        opt(capex),
                        opt(opex),
                        r.n_extremes,
                        r.feasible_full_year,
                        row.status
                    );
                }
                None => {
                    let _ = writeln!(out, "{},,,,,,{}", row.fraction, csv_field(&row.status));
                }
            }
        }
        out
    }

    /// Whether total cost never rises as the grid limit grows.
    pub fn cost_monotone(&self) -> bool {
        let mut pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter_map(|r| r.report.as_ref().map(|rep| (r.fraction, rep.total_cost())))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-9)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Run `base` at each grid fraction. The 100 % scale is solved once; the
/// points run in parallel and are reported in input order.
pub fn sweep_grid_limits(
    data: &Dataset,
    base: &RunConfig,
    fractions: &[f64],
    backend: &dyn LpBackend,
) -> Result<SweepResult, PipelineError> {
    if fractions.is_empty() {
        return Err(PipelineError::InvalidConfig("sweep needs at least one fraction".into()));
    }
    base.validate(data.n_days())?;
    let scale = GridScale::compute(data, &base.technology, backend)?;
    let rows = fractions
        .par_iter()
        .map(|&fraction| {
            let config = RunConfig {
                grid: GridSpec::Fraction(fraction),
                ..base.clone()
            };
            let c_lim = fraction * scale.c_lim_full;
            match run_aggregated(data, &config, Some(&scale), backend) {
                Ok(report) => SweepRow {
                    fraction,
                    c_lim,
                    status: "ok".into(),
                    report: Some(report),
                },
                Err(e) => SweepRow {
                    fraction,
                    c_lim,
                    status: e.to_string(),
                    report: None,
                },
            }
        })
        .collect();
    Ok(SweepResult {
        c_lim_full: scale.c_lim_full,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCountEntry {
    pub k: usize,
    pub with_extremes: RunReport,
    pub without_extremes: RunReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCountComparison {
    pub c_lim: f64,
    pub f_ref: f64,
    pub dv_ref: DesignVariables,
    pub entries: Vec<ClusterCountEntry>,
}

/// For each `k`, run with the configured method and with clusters only.
pub fn compare_cluster_counts(
    data: &Dataset,
    base: &RunConfig,
    ks: &[usize],
    backend: &dyn LpBackend,
) -> Result<ClusterCountComparison, PipelineError> {
    if ks.is_empty() {
        return Err(PipelineError::InvalidConfig("comparison needs at least one k".into()));
    }
    base.validate(data.n_days())?;
    let (grid, scale) = resolve_grid(data, base, None, backend)?;
    let reference = run_reference(data, &base.technology, grid, backend)?;
    let quiet = RunConfig {
        compare_reference: false,
        grid: GridSpec::Absolute(grid.c_lim),
        ..base.clone()
    };
    let entries = ks
        .iter()
        .map(|&k| {
            let with = RunConfig { k, ..quiet.clone() };
            let without = RunConfig {
                method: Method::None,
                ..with.clone()
            };
            let mut a = run_aggregated(data, &with, scale.as_ref(), backend)?;
            let mut b = run_aggregated(data, &without, scale.as_ref(), backend)?;
            for r in [&mut a, &mut b] {
                r.grid_fraction = match base.grid {
                    GridSpec::Fraction(f) => Some(f),
                    GridSpec::Absolute(_) => None,
                };
                r.c_lim_full = scale.as_ref().map(|s| s.c_lim_full);
                attach_reference(r, &reference);
            }
            Ok(ClusterCountEntry {
                k,
                with_extremes: a,
                without_extremes: b,
            })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    Ok(ClusterCountComparison {
        c_lim: grid.c_lim,
        f_ref: reference.objective,
        dv_ref: reference.design,
        entries,
    })
}

fn attach_reference(report: &mut RunReport, reference: &DesignOutcome) {
    report.f_ref = Some(reference.objective);
    report.dv_ref = Some(reference.design);
    report.dv_deviation_pct = Some(deviation(&report.dv_repr, &reference.design));
    report.accuracy = report.f_operations.and_then(|o| {
        if o > 0.0 {
            Some(reference.objective / o)
        } else {
            None
        }
    });
}

/// Write `report.json` and `report.csv` into `dir`.
pub fn write_run_outputs(report: &RunReport, dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), report.to_json()?)?;
    std::fs::write(dir.join("report.csv"), report.design_csv())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_parsing() {
        assert_eq!("slack".parse::<Method>(), Ok(Method::Slack));
        assert!("other".parse::<Method>().is_err());
    }

    #[test]
    fn deviation_skips_zero_reference() {
        let a = DesignVariables::from_array([2.0, 1.0, 0.0, 0.0, 3.0]);
        let b = DesignVariables::from_array([1.0, 0.0, 0.0, 0.0, 4.0]);
        let d = deviation(&a, &b);
        assert_eq!(d[0], Some(100.0));
        assert_eq!(d[1], None);
        assert_eq!(d[4], Some(-25.0));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("ok"), "ok");
    }
}
