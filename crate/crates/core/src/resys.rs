//! Residential energy supply system: heat pump, electric heater, PV, battery
//! and a capped grid connection, as a design-and-operations LP over any set
//! of weighted daily periods.
//!
//! Hourly steps are one hour long, so kW and kWh/h are interchangeable.
//! Storage is intra-day only: each period's state of charge is cyclic, which
//! makes periods independent once the design is fixed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LinearProgram, LpBackend, LpError, LpSolution, LpStatus, Sense, VarId};
use crate::timeseries::{Dataset, Period, EL_DEMAND, EL_PRICE, HEAT_DEMAND, SOLAR_CF, T_AMBIENT};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("representative set has no period with positive weight")]
    EmptyRepresentativeSet,
    #[error("ambient temperature {ambient} degC is not below the supply temperature {supply} degC")]
    SupplyTempExceeded { ambient: f64, supply: f64 },
    #[error("input data lacks attribute `{0}`")]
    MissingAttribute(String),
    #[error("period weight {0} is negative")]
    NegativeWeight(f64),
    #[error("solution does not belong to an optimal design problem")]
    NotADesignProblem,
    #[error("total cost is zero; cost shares are undefined")]
    ZeroTotalCost,
    #[error("invalid technology parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Specific investment cost per design variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapexPrices {
    /// EUR/kW thermal.
    pub hp: f64,
    /// EUR/kW thermal.
    pub eh: f64,
    /// EUR/kW peak.
    pub pv: f64,
    /// EUR/kW.
    pub bat_power: f64,
    /// EUR/kWh.
    pub bat_energy: f64,
}

impl Default for CapexPrices {
    fn default() -> Self {
        Self {
            hp: 900.0,
            eh: 50.0,
            pv: 900.0,
            bat_power: 150.0,
            bat_energy: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TechnologyParams {
    pub capex: CapexPrices,
    pub amortization_years: f64,
    /// Annual interest rate used by the annuity factor.
    pub interest_rate: f64,
    pub eta_eh: f64,
    pub eta_ch: f64,
    pub eta_dis: f64,
    /// Heat pump supply temperature, degC.
    pub cop_supply_temp: f64,
    /// Fraction of the Carnot COP the heat pump achieves.
    pub cop_quality: f64,
    pub cop_max: f64,
    /// Price of unserved energy (value of lost load), EUR/kWh.
    pub c_slack: f64,
    /// Optional caps on the design variables; infinite by default.
    pub max_design: DesignVariables,
}

impl Default for TechnologyParams {
    fn default() -> Self {
        Self {
            capex: CapexPrices::default(),
            amortization_years: 5.0,
            interest_rate: 0.0,
            eta_eh: 1.0,
            eta_ch: 0.95,
            eta_dis: 0.95,
            cop_supply_temp: 45.0,
            cop_quality: 0.4,
            cop_max: 6.0,
            c_slack: 10.0,
            max_design: DesignVariables::splat(f64::INFINITY),
        }
    }
}

impl TechnologyParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let c = &self.capex;
        if [c.hp, c.eh, c.pv, c.bat_power, c.bat_energy].iter().any(|v| !(*v >= 0.0)) {
            return Err(ModelError::InvalidParams("capex prices must be nonnegative".into()));
        }
        for (name, eta) in [("eta_eh", self.eta_eh), ("eta_ch", self.eta_ch), ("eta_dis", self.eta_dis)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(ModelError::InvalidParams(format!("{name} must lie in (0, 1]")));
            }
        }
        if !(self.amortization_years > 0.0) || !(self.interest_rate >= 0.0) {
            return Err(ModelError::InvalidParams("amortization needs years > 0 and rate >= 0".into()));
        }
        if !(self.cop_quality > 0.0) || !(self.cop_max >= 1.0) || !(self.c_slack >= 0.0) {
            return Err(ModelError::InvalidParams("cop_quality > 0, cop_max >= 1, c_slack >= 0".into()));
        }
        if self.max_design.as_array().iter().any(|v| !(*v >= 0.0)) {
            return Err(ModelError::InvalidParams("design caps must be nonnegative".into()));
        }
        Ok(())
    }

    /// Annuity present value factor: `r / (1 - (1 + r)^-n)`, or `1 / n`
    /// without interest.
    pub fn apvf(&self) -> f64 {
        let n = self.amortization_years;
        let r = self.interest_rate;
        if r == 0.0 {
            1.0 / n
        } else {
            r / (1.0 - (1.0 + r).powf(-n))
        }
    }

    /// Annualized cost per unit of each design variable, in
    /// [`DesignVariables`] field order.
    pub fn annualized_capex(&self) -> DesignVariables {
        let a = self.apvf();
        let c = &self.capex;
        DesignVariables {
            p_hp: a * c.hp,
            p_eh: a * c.eh,
            p_pv: a * c.pv,
            p_bat: a * c.bat_power,
            e_bat: a * c.bat_energy,
        }
    }

    pub fn capital_cost(&self, dv: &DesignVariables) -> f64 {
        let unit = self.annualized_capex().as_array();
        dv.as_array().iter().zip(unit).map(|(x, c)| x * c).sum()
    }
}

/// Hourly heat pump COP from ambient temperature: the Carnot COP at the
/// supply temperature scaled by `cop_quality`, clipped to `[1, cop_max]`.
pub fn cop_profile(t_ambient: &[f64], params: &TechnologyParams) -> Result<Vec<f64>, ModelError> {
    let supply = params.cop_supply_temp;
    t_ambient
        .iter()
        .map(|&t| {
            if t >= supply {
                return Err(ModelError::SupplyTempExceeded { ambient: t, supply });
            }
            let carnot = (supply + 273.15) / (supply - t);
            Ok((params.cop_quality * carnot).min(params.cop_max).max(1.0))
        })
        .collect()
}

/// Maximum hourly grid purchase, kW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridLimit {
    pub c_lim: f64,
}

impl GridLimit {
    pub fn new(c_lim: f64) -> Self {
        assert!(c_lim >= 0.0, "grid limit must be nonnegative");
        Self { c_lim }
    }

    pub fn unlimited() -> Self {
        Self { c_lim: f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignVariables {
    /// Heat pump, kW thermal.
    pub p_hp: f64,
    /// Electric heater, kW thermal.
    pub p_eh: f64,
    /// Photovoltaics, kW peak.
    pub p_pv: f64,
    /// Battery power, kW.
    pub p_bat: f64,
    /// Battery energy, kWh.
    pub e_bat: f64,
}

impl DesignVariables {
    pub const NAMES: [&'static str; 5] = ["p_hp", "p_eh", "p_pv", "p_bat", "e_bat"];

    pub fn splat(v: f64) -> Self {
        Self::from_array([v; 5])
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.p_hp, self.p_eh, self.p_pv, self.p_bat, self.e_bat]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            p_hp: a[0],
            p_eh: a[1],
            p_pv: a[2],
            p_bat: a[3],
            e_bat: a[4],
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodKind {
    /// Cluster centroid.
    Centroid,
    /// Actual day of the source data.
    Day,
    /// Artificial day spliced from several days.
    Virtual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPeriod {
    pub period: Period,
    /// Number of days this period stands for in the objective.
    pub weight: f64,
    pub kind: PeriodKind,
}

/// Weighted periods in original units, the input of the design problem.
/// Zero-weight periods constrain the design without entering the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeSet {
    pub attributes: Vec<String>,
    pub periods: Vec<WeightedPeriod>,
}

impl RepresentativeSet {
    /// Every day of `data` with weight one.
    pub fn full(data: &Dataset) -> Self {
        Self {
            attributes: data.attribute_names(),
            periods: data
                .periods()
                .into_iter()
                .map(|period| WeightedPeriod {
                    period,
                    weight: 1.0,
                    kind: PeriodKind::Day,
                })
                .collect(),
        }
    }

    pub fn single_day(data: &Dataset, day: usize) -> Self {
        Self {
            attributes: data.attribute_names(),
            periods: vec![WeightedPeriod {
                period: data.day(day),
                weight: 1.0,
                kind: PeriodKind::Day,
            }],
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.periods.iter().map(|p| p.weight).sum()
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// Weight-averaged hourly mean of every attribute.
    pub fn weighted_means(&self) -> Vec<f64> {
        let total = self.total_weight();
        (0..self.attributes.len())
            .map(|a| {
                self.periods
                    .iter()
                    .map(|p| {
                        let row = &p.period.values[a];
                        p.weight * row.iter().sum::<f64>() / row.len() as f64
                    })
                    .sum::<f64>()
                    / total
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if let Some(p) = self.periods.iter().find(|p| !(p.weight >= 0.0)) {
            return Err(ModelError::NegativeWeight(p.weight));
        }
        if !self.periods.iter().any(|p| p.weight > 0.0) {
            return Err(ModelError::EmptyRepresentativeSet);
        }
        Ok(())
    }
}

/// Whether demand balances carry slack (virtual supply) variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slack {
    On,
    Off,
}

/// Per-period, per-hour input coefficients.
struct PeriodInputs {
    el: Vec<f64>,
    heat: Vec<f64>,
    cf: Vec<f64>,
    price: Vec<f64>,
    cop: Vec<f64>,
}

fn period_inputs(
    attributes: &[String],
    period: &Period,
    params: &TechnologyParams,
) -> Result<PeriodInputs, ModelError> {
    let row = |name: &str| -> Result<Vec<f64>, ModelError> {
        attributes
            .iter()
            .position(|a| a == name)
            .map(|i| period.values[i].clone())
            .ok_or_else(|| ModelError::MissingAttribute(name.to_string()))
    };
    Ok(PeriodInputs {
        el: row(EL_DEMAND)?,
        heat: row(HEAT_DEMAND)?,
        cf: row(SOLAR_CF)?,
        price: row(EL_PRICE)?,
        cop: cop_profile(&row(T_AMBIENT)?, params)?,
    })
}

/// Variable and row indices of one period's operation.
#[derive(Debug, Clone)]
pub struct PeriodLayout {
    pub weight: f64,
    pub e_buy: Vec<VarId>,
    pub pv_gen: Vec<VarId>,
    pub e_in: Vec<VarId>,
    pub e_out: Vec<VarId>,
    /// State of charge at the start of each hour.
    pub stor: Vec<VarId>,
    pub e_eh: Vec<VarId>,
    pub e_hp: Vec<VarId>,
    pub slack_el: Option<Vec<VarId>>,
    pub slack_heat: Option<Vec<VarId>>,
    pub price: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ResysLayout {
    /// Design variables in [`DesignVariables`] order, present for design
    /// problems only.
    pub design: Option<[VarId; 5]>,
    pub periods: Vec<PeriodLayout>,
}

/// An assembled LP together with the index map needed to read solutions.
#[derive(Debug, Clone)]
pub struct ResysProblem {
    pub lp: LinearProgram,
    pub layout: ResysLayout,
    /// Annualized capital cost of a fixed design (zero for design problems,
    /// where it is part of the objective).
    pub fixed_capex: f64,
}

enum DesignMode<'a> {
    Free,
    Fixed(&'a DesignVariables),
}

fn build(
    attributes: &[String],
    periods: &[(&Period, f64)],
    params: &TechnologyParams,
    grid: GridLimit,
    slack: Slack,
    design: DesignMode<'_>,
) -> Result<ResysProblem, ModelError> {
    params.validate()?;
    let mut lp = LinearProgram::new();
    let unit = params.annualized_capex().as_array();
    let design_vars = match design {
        DesignMode::Free => {
            let caps = params.max_design.as_array();
            let ids: Vec<VarId> = DesignVariables::NAMES
                .iter()
                .zip(caps)
                .zip(unit)
                .map(|((name, cap), c)| {
                    let v = lp.add_variable(*name, 0.0, cap);
                    lp.add_objective(v, c);
                    v
                })
                .collect();
            Some([ids[0], ids[1], ids[2], ids[3], ids[4]])
        }
        DesignMode::Fixed(_) => None,
    };
    let fixed = match design {
        DesignMode::Fixed(dv) => Some(dv),
        DesignMode::Free => None,
    };

    let mut layouts = Vec::with_capacity(periods.len());
    for (j, &(period, weight)) in periods.iter().enumerate() {
        let inp = period_inputs(attributes, period, params)?;
        let hours = period.hours();
        let mut pl = PeriodLayout {
            weight,
            e_buy: Vec::with_capacity(hours),
            pv_gen: Vec::with_capacity(hours),
            e_in: Vec::with_capacity(hours),
            e_out: Vec::with_capacity(hours),
            stor: Vec::with_capacity(hours),
            e_eh: Vec::with_capacity(hours),
            e_hp: Vec::with_capacity(hours),
            slack_el: (slack == Slack::On).then(Vec::new),
            slack_heat: (slack == Slack::On).then(Vec::new),
            price: inp.price.clone(),
        };
        let inf = f64::INFINITY;
        for t in 0..hours {
            let (pv_ub, bat_ub, stor_ub, eh_ub, hp_ub) = match fixed {
                Some(dv) => (
                    dv.p_pv * inp.cf[t],
                    dv.p_bat,
                    dv.e_bat,
                    dv.p_eh / params.eta_eh,
                    dv.p_hp / inp.cop[t],
                ),
                None => (if inp.cf[t] > 0.0 { inf } else { 0.0 }, inf, inf, inf, inf),
            };
            let e_buy = lp.add_variable(format!("e_buy[{j},{t}]"), 0.0, grid.c_lim);
            let pv_gen = lp.add_variable(format!("pv_gen[{j},{t}]"), 0.0, pv_ub);
            let e_in = lp.add_variable(format!("e_in[{j},{t}]"), 0.0, bat_ub);
            let e_out = lp.add_variable(format!("e_out[{j},{t}]"), 0.0, bat_ub);
            let stor = lp.add_variable(format!("stor[{j},{t}]"), 0.0, stor_ub);
            let e_eh = lp.add_variable(format!("e_eh_el[{j},{t}]"), 0.0, eh_ub);
            let e_hp = lp.add_variable(format!("e_hp_el[{j},{t}]"), 0.0, hp_ub);
            lp.add_objective(e_buy, weight * inp.price[t]);
            pl.e_buy.push(e_buy);
            pl.pv_gen.push(pv_gen);
            pl.e_in.push(e_in);
            pl.e_out.push(e_out);
            pl.stor.push(stor);
            pl.e_eh.push(e_eh);
            pl.e_hp.push(e_hp);
            if slack == Slack::On {
                let se = lp.add_variable(format!("e_slack_el[{j},{t}]"), 0.0, inf);
                let sh = lp.add_variable(format!("q_slack_heat[{j},{t}]"), 0.0, inf);
                lp.add_objective(se, weight * params.c_slack);
                lp.add_objective(sh, weight * params.c_slack);
                pl.slack_el.as_mut().unwrap().push(se);
                pl.slack_heat.as_mut().unwrap().push(sh);
            }
        }
        for t in 0..hours {
            // Electricity balance.
            let mut el = vec![
                (pl.e_buy[t], 1.0),
                (pl.pv_gen[t], 1.0),
                (pl.e_out[t], 1.0),
                (pl.e_in[t], -1.0),
                (pl.e_eh[t], -1.0),
                (pl.e_hp[t], -1.0),
            ];
            if let Some(s) = &pl.slack_el {
                el.push((s[t], 1.0));
            }
            lp.add_constraint(el, Sense::Eq, inp.el[t]);
            // Heat balance, overproduction allowed.
            let mut heat = vec![(pl.e_hp[t], inp.cop[t]), (pl.e_eh[t], params.eta_eh)];
            if let Some(s) = &pl.slack_heat {
                heat.push((s[t], 1.0));
            }
            lp.add_constraint(heat, Sense::Ge, inp.heat[t]);
            // Cyclic intra-day storage.
            let next = pl.stor[(t + 1) % hours];
            if hours == 1 {
                lp.add_constraint(
                    vec![(pl.e_in[t], -params.eta_ch), (pl.e_out[t], 1.0 / params.eta_dis)],
                    Sense::Eq,
                    0.0,
                );
            } else {
                lp.add_constraint(
                    vec![
                        (next, 1.0),
                        (pl.stor[t], -1.0),
                        (pl.e_in[t], -params.eta_ch),
                        (pl.e_out[t], 1.0 / params.eta_dis),
                    ],
                    Sense::Eq,
                    0.0,
                );
            }
            if let Some([p_hp, p_eh, p_pv, p_bat, e_bat]) = design_vars {
                if inp.cf[t] > 0.0 {
                    lp.add_constraint(vec![(pl.pv_gen[t], 1.0), (p_pv, -inp.cf[t])], Sense::Le, 0.0);
                }
                lp.add_constraint(vec![(pl.e_hp[t], inp.cop[t]), (p_hp, -1.0)], Sense::Le, 0.0);
                lp.add_constraint(vec![(pl.e_eh[t], params.eta_eh), (p_eh, -1.0)], Sense::Le, 0.0);
                lp.add_constraint(vec![(pl.stor[t], 1.0), (e_bat, -1.0)], Sense::Le, 0.0);
                lp.add_constraint(vec![(pl.e_in[t], 1.0), (p_bat, -1.0)], Sense::Le, 0.0);
                lp.add_constraint(vec![(pl.e_out[t], 1.0), (p_bat, -1.0)], Sense::Le, 0.0);
            }
        }
        layouts.push(pl);
    }

    Ok(ResysProblem {
        lp,
        layout: ResysLayout {
            design: design_vars,
            periods: layouts,
        },
        fixed_capex: fixed.map_or(0.0, |dv| params.capital_cost(dv)),
    })
}

/// Joint design and operations problem over weighted periods.
pub fn build_design_problem(
    repr: &RepresentativeSet,
    params: &TechnologyParams,
    grid: GridLimit,
    slack: Slack,
) -> Result<ResysProblem, ModelError> {
    repr.validate()?;
    let periods: Vec<(&Period, f64)> = repr.periods.iter().map(|p| (&p.period, p.weight)).collect();
    build(&repr.attributes, &periods, params, grid, slack, DesignMode::Free)
}

/// Operations-only problem for a fixed design, every period weighted one.
pub fn build_operations_problem(
    dv: &DesignVariables,
    attributes: &[String],
    periods: &[Period],
    params: &TechnologyParams,
    grid: GridLimit,
    slack: Slack,
) -> Result<ResysProblem, ModelError> {
    if dv.as_array().iter().any(|v| !(*v >= 0.0)) {
        return Err(ModelError::InvalidParams("design variables must be nonnegative".into()));
    }
    let periods: Vec<(&Period, f64)> = periods.iter().map(|p| (p, 1.0)).collect();
    build(attributes, &periods, params, grid, slack, DesignMode::Fixed(dv))
}

/// Read the five sizing decisions from a solved design problem.
pub fn extract_design(lp: &LinearProgram, solution: &LpSolution) -> Result<DesignVariables, ModelError> {
    if solution.status != LpStatus::Optimal || solution.primal.len() != lp.num_variables() {
        return Err(ModelError::NotADesignProblem);
    }
    let mut out = [0.0; 5];
    for (k, name) in DesignVariables::NAMES.iter().enumerate() {
        let id = lp.variable_index(name).ok_or(ModelError::NotADesignProblem)?;
        out[k] = solution.value(id);
    }
    Ok(DesignVariables::from_array(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub total: f64,
    pub capex: f64,
    /// Weighted purchase cost plus any slack penalty.
    pub opex: f64,
    pub slack_cost: f64,
    pub capex_share: f64,
    pub opex_share: f64,
}

impl ResysProblem {
    pub fn extract_design(&self, solution: &LpSolution) -> Result<DesignVariables, ModelError> {
        if self.layout.design.is_none() {
            return Err(ModelError::NotADesignProblem);
        }
        extract_design(&self.lp, solution)
    }

    /// Split an optimal design-problem objective into capital and
    /// operating parts.
    pub fn cost_breakdown(
        &self,
        solution: &LpSolution,
        params: &TechnologyParams,
    ) -> Result<CostBreakdown, ModelError> {
        let dv = self.extract_design(solution)?;
        let capex = params.capital_cost(&dv);
        let (purchase, slack_cost) = self.operating_cost(solution, params);
        let opex = purchase + slack_cost;
        let total = capex + opex;
        if total <= 0.0 {
            return Err(ModelError::ZeroTotalCost);
        }
        Ok(CostBreakdown {
            total,
            capex,
            opex,
            slack_cost,
            capex_share: capex / total,
            opex_share: opex / total,
        })
    }

    /// Weighted (purchase cost, slack penalty) of a solution.
    pub fn operating_cost(&self, solution: &LpSolution, params: &TechnologyParams) -> (f64, f64) {
        let mut purchase = 0.0;
        let mut slack = 0.0;
        for p in &self.layout.periods {
            for (t, &v) in p.e_buy.iter().enumerate() {
                purchase += p.weight * p.price[t] * solution.value(v);
            }
            for ids in [&p.slack_el, &p.slack_heat].into_iter().flatten() {
                slack += p.weight * params.c_slack * ids.iter().map(|&v| solution.value(v)).sum::<f64>();
            }
        }
        (purchase, slack)
    }

    /// Largest hourly grid purchase in a solution.
    pub fn max_grid_draw(&self, solution: &LpSolution) -> f64 {
        self.layout
            .periods
            .iter()
            .flat_map(|p| p.e_buy.iter().map(|&v| solution.value(v)))
            .fold(0.0, f64::max)
    }
}

/// Solved design problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignOutcome {
    pub design: DesignVariables,
    pub objective: f64,
    /// `None` when the total cost is zero and shares are undefined.
    pub costs: Option<CostBreakdown>,
    pub max_grid_draw: f64,
}

/// Build and solve the design problem. An infeasible or unbounded problem
/// is reported as `Ok(None)`.
pub fn optimize_design(
    repr: &RepresentativeSet,
    params: &TechnologyParams,
    grid: GridLimit,
    slack: Slack,
    backend: &dyn LpBackend,
) -> Result<Option<DesignOutcome>, ModelError> {
    let problem = build_design_problem(repr, params, grid, slack)?;
    let sol = backend.solve(&problem.lp)?;
    if !sol.is_optimal() {
        return Ok(None);
    }
    let costs = match problem.cost_breakdown(&sol, params) {
        Ok(c) => Some(c),
        Err(ModelError::ZeroTotalCost) => None,
        Err(e) => return Err(e),
    };
    Ok(Some(DesignOutcome {
        design: problem.extract_design(&sol)?,
        objective: sol.objective,
        costs,
        max_grid_draw: problem.max_grid_draw(&sol),
    }))
}

/// Outcome of operating a fixed design on one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayOperation {
    pub day: usize,
    pub status: LpStatus,
    /// Operating cost including slack penalty; `None` unless optimal.
    pub cost: Option<f64>,
    /// Largest hourly heat slack and the hour it occurs.
    pub max_slack_heat: f64,
    pub max_slack_heat_hour: usize,
    pub max_slack_el: f64,
    pub max_slack_el_hour: usize,
    pub max_grid_draw: f64,
}

/// Fixed-design operation over many days, solved day by day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationsOutcome {
    pub days: Vec<DayOperation>,
}

impl OperationsOutcome {
    pub fn feasible(&self) -> bool {
        self.days.iter().all(|d| d.status == LpStatus::Optimal)
    }

    /// Days whose operation is infeasible, ascending.
    pub fn infeasible_days(&self) -> Vec<usize> {
        self.days
            .iter()
            .filter(|d| d.status != LpStatus::Optimal)
            .map(|d| d.day)
            .collect()
    }

    /// Summed operating cost, present only when every day is feasible.
    pub fn operating_cost(&self) -> Option<f64> {
        self.days.iter().map(|d| d.cost).sum()
    }

    pub fn max_slack_heat(&self) -> f64 {
        self.days.iter().map(|d| d.max_slack_heat).fold(0.0, f64::max)
    }

    pub fn max_slack_el(&self) -> f64 {
        self.days.iter().map(|d| d.max_slack_el).fold(0.0, f64::max)
    }

    pub fn max_slack(&self) -> f64 {
        self.max_slack_heat().max(self.max_slack_el())
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> (f64, usize) {
    values
        .enumerate()
        .fold((0.0, 0), |(bv, bi), (i, v)| if v > bv { (v, i) } else { (bv, bi) })
}

/// Operate a fixed design on each listed day independently. With cyclic
/// intra-day storage this is exactly the full-horizon operations problem
/// split into its independent blocks. Days are solved in parallel and
/// returned in input order.
pub fn operate_days(
    dv: &DesignVariables,
    data: &Dataset,
    days: &[usize],
    params: &TechnologyParams,
    grid: GridLimit,
    slack: Slack,
    backend: &dyn LpBackend,
) -> Result<OperationsOutcome, ModelError> {
    let names = data.attribute_names();
    let days = days
        .par_iter()
        .map(|&day| {
            let problem = build_operations_problem(dv, &names, &[data.day(day)], params, grid, slack)?;
            let sol = backend.solve(&problem.lp)?;
            let mut out = DayOperation {
                day,
                status: sol.status,
                cost: None,
                max_slack_heat: 0.0,
                max_slack_heat_hour: 0,
                max_slack_el: 0.0,
                max_slack_el_hour: 0,
                max_grid_draw: 0.0,
            };
            if sol.is_optimal() {
                let p = &problem.layout.periods[0];
                out.cost = Some(sol.objective);
                if let Some(ids) = &p.slack_heat {
                    (out.max_slack_heat, out.max_slack_heat_hour) = argmax(ids.iter().map(|&v| sol.value(v)));
                }
                if let Some(ids) = &p.slack_el {
                    (out.max_slack_el, out.max_slack_el_hour) = argmax(ids.iter().map(|&v| sol.value(v)));
                }
                out.max_grid_draw = problem.max_grid_draw(&sol);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    Ok(OperationsOutcome { days })
}

/// Operate a fixed design over every day of `data`.
pub fn operate_full(
    dv: &DesignVariables,
    data: &Dataset,
    params: &TechnologyParams,
    grid: GridLimit,
    slack: Slack,
    backend: &dyn LpBackend,
) -> Result<OperationsOutcome, ModelError> {
    let days: Vec<usize> = (0..data.n_days()).collect();
    operate_days(dv, data, &days, params, grid, slack, backend)
}
