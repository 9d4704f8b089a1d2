//! Domain types for both cost models plus the shared financial factors.
//!
//! Everything here is a plain value: problems are built once, validated, and
//! then shared read-only by the solvers and the Monte Carlo workers.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::DomainError;

/// Cost, capacity and demand data for one plant in one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodParams {
    /// Operational (net present worth) cost per kWh produced.
    #[serde(rename = "operating_cost_per_kwh")]
    pub npw: f64,
    /// Transfer cost per kWh produced.
    #[serde(rename = "transfer_cost_per_kwh")]
    pub transfer: f64,
    /// Cost per kWh of surplus.
    #[serde(rename = "excess_cost_per_kwh")]
    pub excess: f64,
    #[serde(rename = "capacity_min_kw")]
    pub cap_min: f64,
    #[serde(rename = "capacity_max_kw")]
    pub cap_max: f64,
    /// Nominal demand served by this plant in this period.
    #[serde(rename = "demand_kw")]
    pub demand: f64,
}

impl PeriodParams {
    /// Production cost slope, operating plus transfer.
    pub fn unit_cost(&self) -> f64 {
        self.npw + self.transfer
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    pub id: String,
    #[serde(rename = "setup_cost")]
    pub setup_cost: f64,
    pub periods: Vec<PeriodParams>,
}

/// How the capacity and surplus constraints treat unselected plants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Constraints exactly as printed: `cap_min <= Y*Z <= cap_max` and
    /// `K = Y*Z - D` for every plant, selected or not.
    Literal,
    /// Selection-gated constraints: `Y*cap_min <= Z <= Y*cap_max` and
    /// `K = Y*(Z - D)`.
    Rectified,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Literal => f.write_str("literal"),
            Mode::Rectified => f.write_str("rectified"),
        }
    }
}

/// A complete plant-selection instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanProblem {
    pub plants: Vec<PlantSpec>,
    #[serde(rename = "horizon_periods")]
    pub horizon: usize,
    /// Number of plants that must be built.
    #[serde(rename = "required_plant_count")]
    pub required_count: usize,
    #[serde(rename = "discount_rate_per_period")]
    pub discount_rate: f64,
    pub mode: Mode,
    /// When false, a selected plant must cover its demand (`K >= 0`).
    pub allow_shortage: bool,
}

impl PlanProblem {
    pub fn plant_count(&self) -> usize {
        self.plants.len()
    }

    /// Copy of the problem with every demand replaced, `demand[j][t]`.
    pub fn with_demand(&self, demand: &[Vec<f64>]) -> PlanProblem {
        let mut out = self.clone();
        for (plant, row) in out.plants.iter_mut().zip(demand) {
            for (period, d) in plant.periods.iter_mut().zip(row) {
                period.demand = *d;
            }
        }
        out
    }

    /// Nominal demand matrix, plant-major.
    pub fn demand_matrix(&self) -> Vec<Vec<f64>> {
        self.plants
            .iter()
            .map(|p| p.periods.iter().map(|q| q.demand).collect())
            .collect()
    }
}

/// Selection, dispatch and cost of a solved (or candidate) plan.
///
/// Matrices are plant-major: `production[j][t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSolution {
    pub selected: Vec<bool>,
    pub production: Vec<Vec<f64>>,
    pub surplus: Vec<Vec<f64>>,
    pub objective: f64,
    /// Setup plus discounted period costs attributed to each plant.
    pub per_plant_cost: Vec<f64>,
    /// Discounted cost of each plant-period (production and surplus terms).
    pub period_cost: Vec<Vec<f64>>,
}

impl PlanSolution {
    pub fn selected_count(&self) -> usize {
        self.selected.iter().filter(|&&y| y).count()
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        self.selected
            .iter()
            .enumerate()
            .filter_map(|(j, &y)| y.then_some(j))
            .collect()
    }
}

/// Rooftop photovoltaic model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvParams {
    /// Per-period interest rate.
    #[serde(rename = "interest_rate_per_period")]
    pub interest: f64,
    #[serde(rename = "lifetime_periods")]
    pub lifetime: u32,
    #[serde(rename = "operating_cost_per_period")]
    pub op_cost: f64,
    #[serde(rename = "panel_price")]
    pub panel_price: f64,
    #[serde(rename = "consumption_w_per_year")]
    pub consumption: f64,
    #[serde(rename = "panel_capacity_w")]
    pub panel_capacity: f64,
}

impl PvParams {
    /// Every rule the parameters break; empty when valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let fields = [
            ("interest_rate_per_period", self.interest),
            ("operating_cost_per_period", self.op_cost),
            ("panel_price", self.panel_price),
            ("consumption_w_per_year", self.consumption),
            ("panel_capacity_w", self.panel_capacity),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                out.push(Violation::new(
                    Rule::PvPositive,
                    None,
                    None,
                    format!("{name} must be finite and > 0, got {value}"),
                ));
            }
        }
        if self.lifetime == 0 {
            out.push(Violation::new(
                Rule::PvPositive,
                None,
                None,
                "lifetime_periods must be >= 1".to_string(),
            ));
        }
        out
    }
}

/// Which invariant a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `0 <= cap_min <= cap_max`, and the capacity constraint of a solution.
    CapacityBounds,
    /// Surplus must equal production minus demand.
    SurplusBalance,
    /// Exactly `required_count` plants selected.
    PlantCount,
    /// Sign and domain restrictions on variables.
    VariableDomain,
    /// Costs and demand must be non-negative and finite.
    NonNegative,
    /// Every plant has `horizon` periods.
    Horizon,
    DiscountRate,
    PvPositive,
    /// Monte Carlo demand intervals and replication count.
    DemandInterval,
}

impl Rule {
    pub fn describe(&self) -> &'static str {
        match self {
            Rule::CapacityBounds => "capacity bounds",
            Rule::SurplusBalance => "surplus balance",
            Rule::PlantCount => "plant count",
            Rule::VariableDomain => "variable domain",
            Rule::NonNegative => "non-negative parameters",
            Rule::Horizon => "period count",
            Rule::DiscountRate => "discount rate",
            Rule::PvPositive => "positive PV parameters",
            Rule::DemandInterval => "demand interval",
        }
    }
}

/// One broken rule, located by plant and period where that applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub plant: Option<usize>,
    pub period: Option<usize>,
    pub detail: String,
}

impl Violation {
    pub fn new(rule: Rule, plant: Option<usize>, period: Option<usize>, detail: String) -> Self {
        Self {
            rule,
            plant,
            period,
            detail,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rule.describe())?;
        if let Some(j) = self.plant {
            write!(f, " plant {}", j + 1)?;
        }
        if let Some(t) = self.period {
            write!(f, " period {}", t + 1)?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// `(1 + rate)^-t`.
pub fn discount_factor(rate: f64, t: u32) -> Result<f64, DomainError> {
    if !(rate > -1.0) {
        return Err(DomainError::DiscountRate(rate));
    }
    Ok((1.0 + rate).powi(-(t as i32)))
}

/// The annuity-like factor `(1 - (1+I)^-T) / (I (I+1))` shared by the
/// rooftop model and the linkage formulas.
pub fn annuity_factor(params: &PvParams) -> Result<f64, DomainError> {
    let i = params.interest;
    if !(i > 0.0) {
        return Err(DomainError::InterestRate(i));
    }
    // 1 - (1+I)^-T via expm1/ln_1p keeps precision for small I*T.
    let one_minus = -(-(params.lifetime as f64) * i.ln_1p()).exp_m1();
    Ok(one_minus / (i * (1.0 + i)))
}

/// Checks every invariant of a plant-selection instance.
///
/// Never fails; malformed data shows up as violations.
pub fn validate_problem(problem: &PlanProblem) -> Vec<Violation> {
    let mut out = Vec::new();
    let m = problem.plants.len();

    if problem.horizon == 0 {
        out.push(Violation::new(
            Rule::Horizon,
            None,
            None,
            "horizon must be >= 1".into(),
        ));
    }
    if problem.required_count > m {
        out.push(Violation::new(
            Rule::PlantCount,
            None,
            None,
            format!(
                "required plant count {} exceeds the {} candidate plants",
                problem.required_count, m
            ),
        ));
    }
    if !(problem.discount_rate > -1.0 && problem.discount_rate.is_finite()) {
        out.push(Violation::new(
            Rule::DiscountRate,
            None,
            None,
            format!("discount rate must be finite and > -1, got {}", problem.discount_rate),
        ));
    }

    for (j, plant) in problem.plants.iter().enumerate() {
        if !(plant.setup_cost >= 0.0 && plant.setup_cost.is_finite()) {
            out.push(Violation::new(
                Rule::NonNegative,
                Some(j),
                None,
                format!("setup cost must be finite and >= 0, got {}", plant.setup_cost),
            ));
        }
        if plant.periods.len() != problem.horizon {
            out.push(Violation::new(
                Rule::Horizon,
                Some(j),
                None,
                format!(
                    "plant '{}' has {} periods, horizon is {}",
                    plant.id,
                    plant.periods.len(),
                    problem.horizon
                ),
            ));
        }
        for (t, p) in plant.periods.iter().enumerate() {
            let named = [
                ("operating cost", p.npw),
                ("transfer cost", p.transfer),
                ("excess cost", p.excess),
                ("demand", p.demand),
            ];
            for (name, v) in named {
                if !(v >= 0.0 && v.is_finite()) {
                    out.push(Violation::new(
                        Rule::NonNegative,
                        Some(j),
                        Some(t),
                        format!("{name} must be finite and >= 0, got {v}"),
                    ));
                }
            }
            let caps_finite = p.cap_min.is_finite() && p.cap_max.is_finite();
            if !(caps_finite && 0.0 <= p.cap_min && p.cap_min <= p.cap_max) {
                out.push(Violation::new(
                    Rule::CapacityBounds,
                    Some(j),
                    Some(t),
                    format!(
                        "need 0 <= cap_min <= cap_max, got cap_min={} cap_max={}",
                        p.cap_min, p.cap_max
                    ),
                ));
            }
        }
    }
    out
}
