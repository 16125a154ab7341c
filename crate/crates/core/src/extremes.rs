//! Extreme-day identification, iterative selection loops and the two ways
//! of adding extreme days to a clustered representation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{kmeans_points, ClusterError, ClusterResult, KMeansConfig};
use crate::lp::LpBackend;
use crate::resys::{
    operate_full, optimize_design, DesignVariables, GridLimit, ModelError, PeriodKind, RepresentativeSet, Slack,
    TechnologyParams, WeightedPeriod,
};
use crate::timeseries::{
    attribute_extremum, denormalize_period, z_normalize, Dataset, Direction, NormalizationParams, Period,
    Statistic, TimeSeriesError, EL_DEMAND, EL_PRICE, HEAT_DEMAND, SOLAR_CF, T_AMBIENT,
};

#[derive(Debug, Error)]
pub enum ExtremeError {
    #[error("attribute `{0}` is required for extreme-day selection")]
    MissingAttribute(String),
    #[error("attribute `{0}` appears in more than one extreme specification")]
    DuplicateAttributeSpec(String),
    #[error("every day with unmet demand is already selected; selection cannot progress")]
    NoProgress,
    #[error("more than {0} extreme days would be needed")]
    MaxExtremesExceeded(usize),
    #[error("{extremes} extreme days leave fewer than k = {k} of {n_days} days to cluster")]
    TooManyExtremes { extremes: usize, k: usize, n_days: usize },
    #[error("design problem on the representative periods is infeasible")]
    DesignInfeasible,
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    TimeSeries(#[from] TimeSeriesError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremeSpec {
    pub attribute: String,
    pub statistic: Statistic,
    pub direction: Direction,
}

impl ExtremeSpec {
    pub fn new(attribute: &str, statistic: Statistic, direction: Direction) -> Self {
        Self {
            attribute: attribute.to_string(),
            statistic,
            direction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremeSource {
    Statistical,
    Feasibility,
    SlackHeat,
    SlackEl,
    Virtual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeDay {
    /// Day of the source data; `None` for a virtual day.
    pub day_index: Option<usize>,
    pub source: ExtremeSource,
    pub iteration: usize,
}

/// An extreme day together with its profile in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremePeriod {
    pub day: ExtremeDay,
    pub period: Period,
}

impl ExtremePeriod {
    pub fn actual(data: &Dataset, day: usize, source: ExtremeSource, iteration: usize) -> Self {
        Self {
            day: ExtremeDay {
                day_index: Some(day),
                source,
                iteration,
            },
            period: data.day(day),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModificationMode {
    /// Extreme days constrain the design with zero objective weight.
    FeasibilitySteps,
    /// Extreme days leave the clustering and enter with weight one.
    Append,
}

fn require(data: &Dataset, name: &str) -> Result<(), ExtremeError> {
    data.attribute_index(name)
        .map(|_| ())
        .ok_or_else(|| ExtremeError::MissingAttribute(name.to_string()))
}

/// Statistical extreme days: peak electricity demand, peak heat demand and
/// lowest daily solar yield, without duplicates.
pub fn select_simple(data: &Dataset) -> Result<Vec<ExtremeDay>, ExtremeError> {
    let specs = [
        (EL_DEMAND, Statistic::Absolute, Direction::Max),
        (HEAT_DEMAND, Statistic::Absolute, Direction::Max),
        (SOLAR_CF, Statistic::Integral, Direction::Min),
    ];
    let mut out: Vec<ExtremeDay> = Vec::new();
    for (name, stat, dir) in specs {
        require(data, name)?;
        let day = attribute_extremum(data, name, stat, dir)?;
        if !out.iter().any(|e| e.day_index == Some(day)) {
            out.push(ExtremeDay {
                day_index: Some(day),
                source: ExtremeSource::Statistical,
                iteration: 0,
            });
        }
    }
    Ok(out)
}

/// Default extreme per attribute for virtual days.
fn default_spec(name: &str) -> (Statistic, Direction) {
    match name {
        SOLAR_CF => (Statistic::Integral, Direction::Min),
        EL_PRICE => (Statistic::Integral, Direction::Max),
        _ => (Statistic::Absolute, Direction::Max),
    }
}

/// Artificial day whose row for each attribute is copied from that
/// attribute's extreme day. Attributes without a spec use a default:
/// demands at their peak day, solar at its weakest day, prices at the
/// most expensive day, and temperature from the heat-demand day.
pub fn make_virtual_day(data: &Dataset, specs: &[ExtremeSpec]) -> Result<Period, ExtremeError> {
    for (i, s) in specs.iter().enumerate() {
        require(data, &s.attribute)?;
        if specs[..i].iter().any(|o| o.attribute == s.attribute) {
            return Err(ExtremeError::DuplicateAttributeSpec(s.attribute.clone()));
        }
    }
    let day_for = |name: &str| -> Result<usize, ExtremeError> {
        let (stat, dir) = specs
            .iter()
            .find(|s| s.attribute == name)
            .map_or_else(|| default_spec(name), |s| (s.statistic, s.direction));
        Ok(attribute_extremum(data, name, stat, dir)?)
    };
    let names = data.attribute_names();
    let mut values = Vec::with_capacity(names.len());
    for (a, name) in names.iter().enumerate() {
        let covered = specs.iter().any(|s| &s.attribute == name);
        let day = if name == T_AMBIENT && !covered && data.attribute_index(HEAT_DEMAND).is_some() {
            day_for(HEAT_DEMAND)?
        } else {
            day_for(name)?
        };
        values.push(data.day_row(a, day).to_vec());
    }
    Ok(Period {
        day_index: None,
        values,
    })
}

/// Virtual extreme day built from the statistical extremes.
pub fn simple_virtual_day(data: &Dataset) -> Result<ExtremePeriod, ExtremeError> {
    for name in [EL_DEMAND, HEAT_DEMAND, SOLAR_CF] {
        require(data, name)?;
    }
    Ok(ExtremePeriod {
        day: ExtremeDay {
            day_index: None,
            source: ExtremeSource::Virtual,
            iteration: 0,
        },
        period: make_virtual_day(data, &[])?,
    })
}

fn kind_of(e: &ExtremePeriod) -> PeriodKind {
    if e.day.day_index.is_some() {
        PeriodKind::Day
    } else {
        PeriodKind::Virtual
    }
}

fn centroid_periods(
    clusters: &ClusterResult,
    names: &[String],
    hours: usize,
    norm: &NormalizationParams,
) -> Result<Vec<WeightedPeriod>, ExtremeError> {
    clusters
        .centroids
        .iter()
        .zip(&clusters.counts)
        .map(|(c, &n)| {
            let period = denormalize_period(&Period::from_flat(None, c, hours), names, norm)?;
            Ok(WeightedPeriod {
                period,
                weight: n as f64,
                kind: PeriodKind::Centroid,
            })
        })
        .collect()
}

/// Centroids weighted by their day counts plus every extreme day with
/// weight zero.
pub fn modify_feasibility_steps(
    clusters: &ClusterResult,
    norm: &NormalizationParams,
    data: &Dataset,
    extremes: &[ExtremePeriod],
) -> Result<RepresentativeSet, ExtremeError> {
    let names = data.attribute_names();
    let mut periods = centroid_periods(clusters, &names, data.hours_per_day(), norm)?;
    periods.extend(extremes.iter().map(|e| WeightedPeriod {
        period: e.period.clone(),
        weight: 0.0,
        kind: kind_of(e),
    }));
    Ok(RepresentativeSet {
        attributes: names,
        periods,
    })
}

/// Re-cluster the days that are not extreme days and append each actual
/// extreme day with weight one. `normalized` must be the full dataset
/// normalized with `norm`, so the remaining days keep the full-data scale.
/// Virtual days are not days of the data and enter with weight zero.
pub fn modify_append(
    data: &Dataset,
    normalized: &Dataset,
    norm: &NormalizationParams,
    kmeans: &KMeansConfig,
    extremes: &[ExtremePeriod],
) -> Result<(RepresentativeSet, ClusterResult), ExtremeError> {
    let excluded: Vec<usize> = extremes.iter().filter_map(|e| e.day.day_index).collect();
    let remaining: Vec<usize> = (0..data.n_days()).filter(|d| !excluded.contains(d)).collect();
    if remaining.len() < kmeans.k {
        return Err(ExtremeError::TooManyExtremes {
            extremes: excluded.len(),
            k: kmeans.k,
            n_days: data.n_days(),
        });
    }
    let points: Vec<Vec<f64>> = remaining.iter().map(|&d| normalized.day(d).flatten()).collect();
    let clusters = kmeans_points(&points, kmeans)?;
    let names = data.attribute_names();
    let mut periods = centroid_periods(&clusters, &names, data.hours_per_day(), norm)?;
    periods.extend(extremes.iter().map(|e| WeightedPeriod {
        period: e.period.clone(),
        weight: if e.day.day_index.is_some() { 1.0 } else { 0.0 },
        kind: kind_of(e),
    }));
    Ok((
        RepresentativeSet {
            attributes: names,
            periods,
        },
        clusters,
    ))
}

/// Normalized data and its clustering, the starting point of every
/// aggregated run.
#[derive(Debug, Clone)]
pub struct Aggregation<'a> {
    pub data: &'a Dataset,
    pub normalized: Dataset,
    pub norm: NormalizationParams,
    pub kmeans: KMeansConfig,
    pub clusters: ClusterResult,
}

impl<'a> Aggregation<'a> {
    pub fn new(data: &'a Dataset, kmeans: KMeansConfig) -> Result<Self, ExtremeError> {
        let (normalized, norm) = z_normalize(data);
        let clusters = kmeans_points(
            &normalized.periods().iter().map(Period::flatten).collect::<Vec<_>>(),
            &kmeans,
        )?;
        Ok(Self {
            data,
            normalized,
            norm,
            kmeans,
            clusters,
        })
    }

    pub fn representatives(
        &self,
        mode: ModificationMode,
        extremes: &[ExtremePeriod],
    ) -> Result<RepresentativeSet, ExtremeError> {
        match mode {
            ModificationMode::FeasibilitySteps => {
                modify_feasibility_steps(&self.clusters, &self.norm, self.data, extremes)
            }
            ModificationMode::Append => {
                if extremes.iter().all(|e| e.day.day_index.is_none()) {
                    return modify_feasibility_steps(&self.clusters, &self.norm, self.data, extremes);
                }
                modify_append(self.data, &self.normalized, &self.norm, &self.kmeans, extremes).map(|r| r.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionLimits {
    pub max_extremes: usize,
    /// Largest hourly slack, kWh, that still counts as fully supplied.
    pub slack_tol: f64,
    /// Start the slack-based loop from the statistical extremes.
    pub seed_simple_in_slack: bool,
    /// Replace the statistical seed by one virtual day built from it.
    pub virtual_days: bool,
}

impl Default for SelectionLimits {
    fn default() -> Self {
        Self {
            max_extremes: 30,
            slack_tol: 1e-6,
            seed_simple_in_slack: false,
            virtual_days: false,
        }
    }
}

/// One pass of a selection loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Extreme days in the representation (`None` marks a virtual day).
    pub extreme_days: Vec<Option<usize>>,
    pub objective: f64,
    pub design: DesignVariables,
    /// Whether every day can be operated without slack.
    pub operations_feasible: bool,
    pub infeasible_days: Vec<usize>,
    /// Largest hourly slack of the slack-based evaluation, if run.
    pub max_slack: Option<f64>,
    /// Day added after this pass.
    pub added: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub extreme_days: Vec<ExtremeDay>,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    #[serde(skip)]
    pub periods: Vec<Period>,
}

impl SelectionResult {
    pub fn extreme_periods(&self) -> Vec<ExtremePeriod> {
        self.extreme_days
            .iter()
            .zip(&self.periods)
            .map(|(day, period)| ExtremePeriod {
                day: day.clone(),
                period: period.clone(),
            })
            .collect()
    }

    pub fn last(&self) -> &IterationRecord {
        self.iterations.last().expect("at least one iteration")
    }
}

/// Everything the selection loops need besides the clustering.
#[derive(Clone, Copy)]
pub struct LoopSetup<'s> {
    pub params: &'s TechnologyParams,
    pub grid: GridLimit,
    pub mode: ModificationMode,
    pub limits: &'s SelectionLimits,
    pub backend: &'s dyn LpBackend,
}

/// Statistical seed, or one virtual day spliced from it.
pub fn simple_seed(data: &Dataset, virtual_days: bool) -> Result<Vec<ExtremePeriod>, ExtremeError> {
    if virtual_days {
        return Ok(vec![simple_virtual_day(data)?]);
    }
    Ok(select_simple(data)?
        .into_iter()
        .map(|e| ExtremePeriod {
            period: data.day(e.day_index.expect("actual day")),
            day: e,
        })
        .collect())
}

fn design_for(
    agg: &Aggregation<'_>,
    setup: &LoopSetup<'_>,
    extremes: &[ExtremePeriod],
) -> Result<(DesignVariables, f64), ExtremeError> {
    let repr = agg.representatives(setup.mode, extremes)?;
    let outcome =
        optimize_design(&repr, setup.params, setup.grid, Slack::Off, setup.backend)?.ok_or(ExtremeError::DesignInfeasible)?;
    Ok((outcome.design, outcome.objective))
}

fn finish(extremes: Vec<ExtremePeriod>, iterations: Vec<IterationRecord>) -> SelectionResult {
    let (extreme_days, periods) = extremes.into_iter().map(|e| (e.day, e.period)).unzip();
    SelectionResult {
        extreme_days,
        iterations,
        converged: true,
        periods,
    }
}

fn day_set(extremes: &[ExtremePeriod]) -> Vec<Option<usize>> {
    extremes.iter().map(|e| e.day.day_index).collect()
}

/// Feasibility-based loop: seed with the statistical extremes, then add
/// the lowest-index day on which the current design cannot be operated
/// until every day is feasible.
pub fn iterate_feasibility(agg: &Aggregation<'_>, setup: &LoopSetup<'_>) -> Result<SelectionResult, ExtremeError> {
    let mut extremes = simple_seed(agg.data, setup.limits.virtual_days)?;
    let mut log = Vec::new();
    for iteration in 0.. {
        let (design, objective) = design_for(agg, setup, &extremes)?;
        let ops = operate_full(&design, agg.data, setup.params, setup.grid, Slack::Off, setup.backend)?;
        let infeasible = ops.infeasible_days();
        let mut record = IterationRecord {
            iteration,
            extreme_days: day_set(&extremes),
            objective,
            design,
            operations_feasible: infeasible.is_empty(),
            infeasible_days: infeasible.clone(),
            max_slack: None,
            added: None,
        };
        if infeasible.is_empty() {
            log.push(record);
            return Ok(finish(extremes, log));
        }
        let selected = day_set(&extremes);
        let day = *infeasible
            .iter()
            .find(|d| !selected.contains(&Some(**d)))
            .ok_or(ExtremeError::NoProgress)?;
        if extremes.len() >= setup.limits.max_extremes {
            return Err(ExtremeError::MaxExtremesExceeded(setup.limits.max_extremes));
        }
        record.added = Some(day);
        log.push(record);
        extremes.push(ExtremePeriod::actual(agg.data, day, ExtremeSource::Feasibility, iteration + 1));
    }
    unreachable!()
}

/// Days with slack above `tol`, largest first, ties to the lower day.
fn slack_ranking(values: impl Iterator<Item = (usize, f64)>, tol: f64) -> Vec<usize> {
    let mut v: Vec<(usize, f64)> = values.filter(|(_, s)| *s > tol).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(d, _)| d).collect()
}

/// Slack-based loop: operate the design with slack variables and add the
/// day holding the largest heat slack (electricity slack once heat is
/// covered) until no slack above the tolerance remains.
pub fn iterate_slack(agg: &Aggregation<'_>, setup: &LoopSetup<'_>) -> Result<SelectionResult, ExtremeError> {
    let limits = setup.limits;
    let mut extremes = if limits.seed_simple_in_slack {
        simple_seed(agg.data, limits.virtual_days)?
    } else {
        Vec::new()
    };
    let mut log = Vec::new();
    for iteration in 0.. {
        let (design, objective) = design_for(agg, setup, &extremes)?;
        let ops = operate_full(&design, agg.data, setup.params, setup.grid, Slack::On, setup.backend)?;
        let max_slack = ops.max_slack();
        let mut record = IterationRecord {
            iteration,
            extreme_days: day_set(&extremes),
            objective,
            design,
            operations_feasible: max_slack <= limits.slack_tol,
            infeasible_days: ops
                .days
                .iter()
                .filter(|d| d.max_slack_heat.max(d.max_slack_el) > limits.slack_tol)
                .map(|d| d.day)
                .collect(),
            max_slack: Some(max_slack),
            added: None,
        };
        if max_slack <= limits.slack_tol {
            log.push(record);
            return Ok(finish(extremes, log));
        }
        let selected = day_set(&extremes);
        let heat = slack_ranking(ops.days.iter().map(|d| (d.day, d.max_slack_heat)), limits.slack_tol);
        let el = slack_ranking(ops.days.iter().map(|d| (d.day, d.max_slack_el)), limits.slack_tol);
        let pick = |ranked: &[usize]| ranked.iter().copied().find(|d| !selected.contains(&Some(*d)));
        let (day, source) = match (pick(&heat), pick(&el)) {
            (Some(d), _) => (d, ExtremeSource::SlackHeat),
            (None, Some(d)) => (d, ExtremeSource::SlackEl),
            (None, None) => return Err(ExtremeError::NoProgress),
        };
        if extremes.len() >= limits.max_extremes {
            return Err(ExtremeError::MaxExtremesExceeded(limits.max_extremes));
        }
        record.added = Some(day);
        log.push(record);
        extremes.push(ExtremePeriod::actual(agg.data, day, source, iteration + 1));
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{AttributeProfile, STANDARD_ATTRIBUTES};

    fn dataset(rows: [Vec<f64>; 5], hours: usize) -> Dataset {
        let attrs = STANDARD_ATTRIBUTES
            .iter()
            .zip(rows)
            .map(|(n, v)| AttributeProfile::new(*n, v))
            .collect();
        Dataset::new(attrs, hours).unwrap()
    }

    /// Four days of two hours: el peak on day 1, heat peak on day 2, solar
    /// minimum on day 3, temperature minimum on day 0.
    fn four_days() -> Dataset {
        dataset(
            [
                vec![1.0, 1.0, 1.0, 5.0, 1.0, 1.0, 1.0, 1.0],
                vec![2.0, 2.0, 2.0, 2.0, 9.0, 2.0, 2.0, 2.0],
                vec![-3.0, -3.0, 0.0, 0.0, 1.0, 1.0, 2.0, 2.0],
                vec![0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.1, 0.1],
                vec![0.2, 0.2, 0.3, 0.3, 0.2, 0.2, 0.2, 0.2],
            ],
            2,
        )
    }

    #[test]
    fn simple_extremes_and_dedup() {
        let days: Vec<_> = select_simple(&four_days())
            .unwrap()
            .iter()
            .map(|e| e.day_index.unwrap())
            .collect();
        assert_eq!(days, vec![1, 2, 3]);

        let constant = dataset([vec![1.0; 4], vec![1.0; 4], vec![5.0; 4], vec![0.5; 4], vec![0.3; 4]], 2);
        let days = select_simple(&constant).unwrap();
        assert_eq!(days.len(), 1);
        assert_eq!(days[0].day_index, Some(0));
    }

    #[test]
    fn simple_requires_attributes() {
        let d = Dataset::new(vec![AttributeProfile::new(EL_DEMAND, vec![1.0; 2])], 1).unwrap();
        assert!(matches!(select_simple(&d), Err(ExtremeError::MissingAttribute(_))));
    }

    #[test]
    fn virtual_day_splices_rows() {
        let d = four_days();
        let v = make_virtual_day(&d, &[]).unwrap();
        assert_eq!(v.day_index, None);
        assert_eq!(v.values[0], d.day_row(0, 1));
        assert_eq!(v.values[1], d.day_row(1, 2));
        // Temperature follows the heat day.
        assert_eq!(v.values[2], d.day_row(2, 2));
        assert_eq!(v.values[3], d.day_row(3, 3));
        assert_eq!(v.values[4], d.day_row(4, 1));

        let spec = ExtremeSpec::new(T_AMBIENT, Statistic::Absolute, Direction::Min);
        let v = make_virtual_day(&d, &[spec.clone()]).unwrap();
        assert_eq!(v.values[2], d.day_row(2, 0));
        assert!(matches!(
            make_virtual_day(&d, &[spec.clone(), spec]),
            Err(ExtremeError::DuplicateAttributeSpec(_))
        ));
    }

    #[test]
    fn slack_ranking_order() {
        let r = slack_ranking([(0, 0.5), (1, 2.0), (2, 0.0), (3, 2.0)].into_iter(), 1e-6);
        assert_eq!(r, vec![1, 3, 0]);
    }
}
