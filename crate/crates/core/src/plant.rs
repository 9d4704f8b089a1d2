//! Exact solver for the discounted plant-selection model.
//!
//! Given the selection vector, the objective splits into one term per plant,
//! and each plant-period term is affine in production with a non-negative
//! slope. The optimal production is therefore the lower end of the feasible
//! interval, and the only coupling left is the plant count, which is settled
//! by ranking plants on their selection cost.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::model::{
    discount_factor, validate_problem, Mode, PlanProblem, PlanSolution, PlantSpec, Rule,
    Violation,
};

/// Optimal production of one plant-period and what it costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispatchResult {
    pub production: f64,
    pub surplus: f64,
    /// Discounted production and surplus cost; `+inf` when infeasible.
    pub period_cost: f64,
    pub feasible: bool,
}

impl DispatchResult {
    fn infeasible() -> Self {
        Self {
            production: 0.0,
            surplus: 0.0,
            period_cost: f64::INFINITY,
            feasible: false,
        }
    }
}

/// Cost of building and running one plant over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantCost {
    pub plant: usize,
    pub id: String,
    /// Setup plus discounted period costs; `+inf` iff infeasible.
    pub total: f64,
    pub feasible: bool,
    pub dispatch: Vec<DispatchResult>,
}

fn period_discount(rate: f64, t: usize) -> f64 {
    // Callers validated the rate; periods are 1-based in the discounting.
    discount_factor(rate, t as u32 + 1).unwrap_or(f64::NAN)
}

/// Cheapest production for plant `plant` in period `t` (0-based), assuming
/// the plant is built.
pub fn inner_optimal_dispatch(
    plant: &PlantSpec,
    t: usize,
    discount_rate: f64,
    mode: Mode,
    allow_shortage: bool,
) -> DispatchResult {
    let p = &plant.periods[t];
    let production = match mode {
        Mode::Rectified if !allow_shortage => {
            let z = p.cap_min.max(p.demand);
            if z > p.cap_max {
                return DispatchResult::infeasible();
            }
            z
        }
        Mode::Rectified | Mode::Literal => p.cap_min,
    };
    let surplus = production - p.demand;
    let disc = period_discount(discount_rate, t);
    DispatchResult {
        production,
        surplus,
        period_cost: (p.unit_cost() * production + p.excess * surplus) * disc,
        feasible: true,
    }
}

/// Setup cost plus the discounted optimal dispatch of every period.
pub fn plant_total_cost(plant: &PlantSpec, problem: &PlanProblem) -> PlantCost {
    let dispatch: Vec<DispatchResult> = (0..plant.periods.len())
        .map(|t| {
            inner_optimal_dispatch(
                plant,
                t,
                problem.discount_rate,
                problem.mode,
                problem.allow_shortage,
            )
        })
        .collect();
    let feasible = dispatch.iter().all(|d| d.feasible);
    let total = if feasible {
        plant.setup_cost + dispatch.iter().map(|d| d.period_cost).sum::<f64>()
    } else {
        f64::INFINITY
    };
    let plant_index = problem
        .plants
        .iter()
        .position(|p| std::ptr::eq(p, plant))
        .unwrap_or(usize::MAX);
    PlantCost {
        plant: plant_index,
        id: plant.id.clone(),
        total,
        feasible,
        dispatch,
    }
}

/// Contribution of a plant that is not built, or `None` if leaving it out
/// breaks the capacity constraint (literal mode with a positive minimum).
fn idle_dispatch(plant: &PlantSpec, problem: &PlanProblem) -> Option<Vec<DispatchResult>> {
    match problem.mode {
        Mode::Rectified => Some(
            plant
                .periods
                .iter()
                .map(|_| DispatchResult {
                    production: 0.0,
                    surplus: 0.0,
                    period_cost: 0.0,
                    feasible: true,
                })
                .collect(),
        ),
        Mode::Literal => plant
            .periods
            .iter()
            .enumerate()
            .map(|(t, p)| {
                (p.cap_min <= 0.0 && 0.0 <= p.cap_max).then(|| DispatchResult {
                    production: 0.0,
                    surplus: -p.demand,
                    period_cost: -p.excess * p.demand * period_discount(problem.discount_rate, t),
                    feasible: true,
                })
            })
            .collect(),
    }
}

/// Minimizes the discounted plan cost exactly.
///
/// Ties between equally priced plants go to the lower index.
pub fn solve_plan(problem: &PlanProblem) -> Result<PlanSolution, SolveError> {
    let violations = validate_problem(problem);
    if !violations.is_empty() {
        return Err(SolveError::Invalid(violations));
    }

    // Collected by index, so the worker count never changes the result.
    let options: Vec<(PlantCost, Option<Vec<DispatchResult>>)> = problem
        .plants
        .par_iter()
        .enumerate()
        .map(|(j, plant)| {
            let mut cost = plant_total_cost(plant, problem);
            cost.plant = j;
            (cost, idle_dispatch(plant, problem))
        })
        .collect();

    let idle_total = |idle: &Option<Vec<DispatchResult>>| -> f64 {
        idle.as_ref()
            .map(|d| d.iter().map(|x| x.period_cost).sum())
            .unwrap_or(f64::INFINITY)
    };

    let required = problem.required_count;
    let mut forced = Vec::new();
    let mut blocking = Vec::new();
    let mut candidates = Vec::new();
    for (j, (cost, idle)) in options.iter().enumerate() {
        match (cost.feasible, idle.is_some()) {
            (true, true) => candidates.push((cost.total - idle_total(idle), j)),
            (true, false) => forced.push(j),
            (false, true) => blocking.push(j),
            (false, false) => {
                return Err(SolveError::Infeasible {
                    required,
                    available: 0,
                    blocking: vec![j],
                })
            }
        }
    }
    let usable = forced.len() + candidates.len();
    if forced.len() > required || usable < required {
        if forced.len() > required {
            blocking = forced.clone();
        }
        return Err(SolveError::Infeasible {
            required,
            available: usable,
            blocking,
        });
    }

    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut selected = vec![false; problem.plants.len()];
    for &j in &forced {
        selected[j] = true;
    }
    for &(_, j) in candidates.iter().take(required - forced.len()) {
        selected[j] = true;
    }

    let mut production = Vec::with_capacity(options.len());
    let mut surplus = Vec::with_capacity(options.len());
    let mut period_cost = Vec::with_capacity(options.len());
    let mut per_plant_cost = Vec::with_capacity(options.len());
    for (j, (cost, idle)) in options.iter().enumerate() {
        let (dispatch, total) = if selected[j] {
            (&cost.dispatch, cost.total)
        } else {
            let idle = idle.as_ref().expect("unselected plants have an idle option");
            (idle, idle_total(&Some(idle.clone())))
        };
        production.push(dispatch.iter().map(|d| d.production).collect());
        surplus.push(dispatch.iter().map(|d| d.surplus).collect());
        period_cost.push(dispatch.iter().map(|d| d.period_cost).collect());
        per_plant_cost.push(total);
    }

    let mut solution = PlanSolution {
        selected,
        production,
        surplus,
        objective: 0.0,
        per_plant_cost,
        period_cost,
    };
    solution.objective = evaluate_objective(problem, &solution);
    Ok(solution)
}

/// Objective of an arbitrary solution: setup, discounted production, and
/// discounted surplus terms.
pub fn evaluate_objective(problem: &PlanProblem, solution: &PlanSolution) -> f64 {
    let mut setup = 0.0;
    let mut running = 0.0;
    let mut excess = 0.0;
    for (j, plant) in problem.plants.iter().enumerate() {
        let y = if solution.selected[j] { 1.0 } else { 0.0 };
        setup += plant.setup_cost * y;
        for (t, p) in plant.periods.iter().enumerate() {
            let disc = period_discount(problem.discount_rate, t);
            running += p.unit_cost() * y * solution.production[j][t] * disc;
            excess += p.excess * solution.surplus[j][t] * disc;
        }
    }
    setup + running + excess
}

/// Lists every constraint instance the solution breaks, with its residual.
pub fn check_feasibility(problem: &PlanProblem, solution: &PlanSolution) -> Vec<Violation> {
    let mut out = Vec::new();
    let count = solution.selected_count();
    if count != problem.required_count {
        out.push(Violation::new(
            Rule::PlantCount,
            None,
            None,
            format!(
                "{count} plants selected, {} required (residual {})",
                problem.required_count,
                count as i64 - problem.required_count as i64
            ),
        ));
    }
    for (j, plant) in problem.plants.iter().enumerate() {
        let selected = solution.selected[j];
        let y = if selected { 1.0 } else { 0.0 };
        for (t, p) in plant.periods.iter().enumerate() {
            let z = solution.production[j][t];
            let k = solution.surplus[j][t];
            let tol = 1e-9 * (1.0 + p.cap_max.abs().max(p.demand.abs()).max(z.abs()));

            let (lo, hi, gated) = match problem.mode {
                Mode::Rectified => (p.cap_min * y, p.cap_max * y, z),
                Mode::Literal => (p.cap_min, p.cap_max, y * z),
            };
            if gated < lo - tol || gated > hi + tol {
                let residual = if gated < lo { gated - lo } else { gated - hi };
                out.push(Violation::new(
                    Rule::CapacityBounds,
                    Some(j),
                    Some(t),
                    format!("production {gated} outside [{lo}, {hi}] (residual {residual})"),
                ));
            }

            let expected = match problem.mode {
                Mode::Rectified => y * (z - p.demand),
                Mode::Literal => y * z - p.demand,
            };
            let residual = k - expected;
            if residual.abs() > tol {
                out.push(Violation::new(
                    Rule::SurplusBalance,
                    Some(j),
                    Some(t),
                    format!("surplus {k} differs from {expected} (residual {residual})"),
                ));
            }

            if z < -tol || !z.is_finite() {
                out.push(Violation::new(
                    Rule::VariableDomain,
                    Some(j),
                    Some(t),
                    format!("production must be >= 0, got {z}"),
                ));
            }
            if problem.mode == Mode::Rectified && !problem.allow_shortage && selected && k < -tol {
                out.push(Violation::new(
                    Rule::VariableDomain,
                    Some(j),
                    Some(t),
                    format!("shortage not allowed, surplus {k} (residual {k})"),
                ));
            }
        }
    }
    out
}

/// Largest plant count [`enumerate_oracle`] accepts.
pub const ORACLE_MAX_PLANTS: usize = 12;
/// Smallest grid resolution [`enumerate_oracle`] accepts.
pub const ORACLE_MIN_GRID: usize = 100;

/// Upper bound on how far the oracle's grid search can land above the true
/// optimum: one grid step of the steepest cost slope in every plant-period.
pub fn grid_error_bound(problem: &PlanProblem, grid_steps: usize) -> f64 {
    let steps = grid_steps.max(2) as f64 - 1.0;
    problem
        .plants
        .iter()
        .flat_map(|plant| plant.periods.iter().enumerate())
        .map(|(t, p)| {
            let step = (p.cap_max - p.cap_min).max(0.0) / steps;
            (p.unit_cost() + p.excess) * step * period_discount(problem.discount_rate, t)
        })
        .sum()
}

/// Brute-force reference solver.
///
/// Enumerates every selection with the required count and, for each plant
/// and period, scans a uniform production grid (plus the interval endpoints
/// and the demand point) instead of using the analytic dispatch rule.
pub fn enumerate_oracle(problem: &PlanProblem, grid_steps: usize) -> Result<PlanSolution, SolveError> {
    let m = problem.plants.len();
    if m > ORACLE_MAX_PLANTS {
        return Err(SolveError::TooLarge {
            plants: m,
            limit: ORACLE_MAX_PLANTS,
        });
    }
    if grid_steps < ORACLE_MIN_GRID {
        return Err(SolveError::GridTooCoarse {
            got: grid_steps,
            min: ORACLE_MIN_GRID,
        });
    }
    let violations = validate_problem(problem);
    if !violations.is_empty() {
        return Err(SolveError::Invalid(violations));
    }

    // best (z, k) per plant-period for both Y values
    let scan = |j: usize, built: bool| -> Option<Vec<(f64, f64)>> {
        let plant = &problem.plants[j];
        plant
            .periods
            .iter()
            .enumerate()
            .map(|(t, p)| {
                let disc = period_discount(problem.discount_rate, t);
                if !built {
                    return match problem.mode {
                        Mode::Rectified => Some((0.0, 0.0)),
                        Mode::Literal => {
                            (p.cap_min <= 0.0 && p.cap_max >= 0.0).then_some((0.0, -p.demand))
                        }
                    };
                }
                let mut points: Vec<f64> = (0..grid_steps)
                    .map(|s| p.cap_min + (p.cap_max - p.cap_min) * s as f64 / (grid_steps - 1) as f64)
                    .collect();
                points.extend([p.cap_min, p.cap_max]);
                if p.cap_min <= p.demand && p.demand <= p.cap_max {
                    points.push(p.demand);
                }
                let shortage_ok = problem.mode == Mode::Literal || problem.allow_shortage;
                points
                    .into_iter()
                    .map(|z| (z, z - p.demand))
                    .filter(|&(_, k)| shortage_ok || k >= 0.0)
                    .map(|(z, k)| ((p.npw + p.transfer) * z * disc + p.excess * k * disc, z, k))
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, z, k)| (z, k))
            })
            .collect()
    };
    let built: Vec<Option<Vec<(f64, f64)>>> = (0..m).map(|j| scan(j, true)).collect();
    let idle: Vec<Option<Vec<(f64, f64)>>> = (0..m).map(|j| scan(j, false)).collect();

    let mut best: Option<(f64, u32)> = None;
    for mask in 0u32..(1u32 << m) {
        if mask.count_ones() as usize != problem.required_count {
            continue;
        }
        let mut total = 0.0;
        let mut ok = true;
        for j in 0..m {
            let y = mask >> j & 1 == 1;
            let Some(dispatch) = (if y { &built[j] } else { &idle[j] }) else {
                ok = false;
                break;
            };
            let plant = &problem.plants[j];
            if y {
                total += plant.setup_cost;
            }
            for (t, &(z, k)) in dispatch.iter().enumerate() {
                let p = &plant.periods[t];
                let disc = (1.0 + problem.discount_rate).powf(-(t as f64 + 1.0));
                let yz = if y { z } else { 0.0 };
                total += (p.npw + p.transfer) * yz * disc + p.excess * k * disc;
            }
        }
        if ok && best.is_none_or(|(b, _)| total < b) {
            best = Some((total, mask));
        }
    }

    let Some((objective, mask)) = best else {
        let blocking = (0..m)
            .filter(|&j| built[j].is_none() || idle[j].is_none())
            .collect();
        let usable = (0..m).filter(|&j| built[j].is_some()).count();
        return Err(SolveError::Infeasible {
            required: problem.required_count,
            available: usable,
            blocking,
        });
    };

    let selected: Vec<bool> = (0..m).map(|j| mask >> j & 1 == 1).collect();
    let pick = |j: usize| {
        if selected[j] {
            built[j].as_ref().unwrap()
        } else {
            idle[j].as_ref().unwrap()
        }
    };
    let production: Vec<Vec<f64>> = (0..m).map(|j| pick(j).iter().map(|x| x.0).collect()).collect();
    let surplus: Vec<Vec<f64>> = (0..m).map(|j| pick(j).iter().map(|x| x.1).collect()).collect();
    let period_cost: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let y = if selected[j] { 1.0 } else { 0.0 };
            problem.plants[j]
                .periods
                .iter()
                .enumerate()
                .map(|(t, p)| {
                    let disc = period_discount(problem.discount_rate, t);
                    (p.unit_cost() * y * production[j][t] + p.excess * surplus[j][t]) * disc
                })
                .collect()
        })
        .collect();
    let per_plant_cost = (0..m)
        .map(|j| {
            let setup = if selected[j] { problem.plants[j].setup_cost } else { 0.0 };
            setup + period_cost[j].iter().sum::<f64>()
        })
        .collect();
    Ok(PlanSolution {
        selected,
        production,
        surplus,
        objective,
        per_plant_cost,
        period_cost,
    })
}
