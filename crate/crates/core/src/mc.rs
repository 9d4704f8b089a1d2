//! Monte Carlo study of demand uncertainty.
//!
//! Each replication draws a demand matrix cell by cell from uniform
//! intervals and re-solves the plan. Every cell has its own ChaCha stream
//! position derived from `(seed, replication, plant, period)`, so a draw never
//! depends on which worker ran it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{validate_problem, PlanProblem, PlanSolution, Rule, Violation};
use crate::plant::solve_plan;
use crate::pv::PvResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub base: PlanProblem,
    /// Lower demand bounds, plant-major.
    pub demand_low: Vec<Vec<f64>>,
    pub demand_high: Vec<Vec<f64>>,
    pub replications: usize,
    pub seed: u64,
}

impl McConfig {
    /// Intervals `nominal * (1 +/- spread)`, floored at zero.
    pub fn with_spread(base: PlanProblem, spread: f64, replications: usize, seed: u64) -> Self {
        let nominal = base.demand_matrix();
        let scale = |f: f64| -> Vec<Vec<f64>> {
            nominal
                .iter()
                .map(|row| row.iter().map(|d| (d * f).max(0.0)).collect())
                .collect()
        };
        Self {
            demand_low: scale(1.0 - spread),
            demand_high: scale(1.0 + spread),
            base,
            replications,
            seed,
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = validate_problem(&self.base);
        if self.replications == 0 {
            out.push(Violation::new(
                Rule::DemandInterval,
                None,
                None,
                "replications must be >= 1".into(),
            ));
        }
        let m = self.base.plants.len();
        if self.demand_low.len() != m || self.demand_high.len() != m {
            out.push(Violation::new(
                Rule::DemandInterval,
                None,
                None,
                format!(
                    "demand bounds need {m} rows, got {} low and {} high",
                    self.demand_low.len(),
                    self.demand_high.len()
                ),
            ));
            return out;
        }
        for j in 0..m {
            let (lo, hi) = (&self.demand_low[j], &self.demand_high[j]);
            if lo.len() != self.base.horizon || hi.len() != self.base.horizon {
                out.push(Violation::new(
                    Rule::DemandInterval,
                    Some(j),
                    None,
                    format!("demand bounds need {} periods", self.base.horizon),
                ));
                continue;
            }
            for t in 0..self.base.horizon {
                if !(lo[t] >= 0.0 && lo[t] <= hi[t] && hi[t].is_finite()) {
                    out.push(Violation::new(
                        Rule::DemandInterval,
                        Some(j),
                        Some(t),
                        format!("need 0 <= low <= high, got low={} high={}", lo[t], hi[t]),
                    ));
                }
            }
        }
        out
    }
}

fn cell_rng(seed: u64, replication: usize, cell: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    // one 16-word block per cell
    rng.set_word_pos(cell as u128 * 16);
    rng
}

/// Demand matrix for one replication.
pub fn sample_demand(config: &McConfig, replication_index: usize) -> Vec<Vec<f64>> {
    let horizon = config.base.horizon;
    config
        .demand_low
        .iter()
        .zip(&config.demand_high)
        .enumerate()
        .map(|(j, (lo, hi))| {
            (0..horizon)
                .map(|t| {
                    let u: f64 = cell_rng(config.seed, replication_index, j * horizon + t).random();
                    lo[t] + (hi[t] - lo[t]) * u
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ReplicationOutcome {
    Feasible {
        objective: f64,
        selected: Vec<bool>,
        waste_rate: f64,
    },
    Infeasible {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub index: usize,
    pub outcome: ReplicationOutcome,
}

pub fn run_replication(config: &McConfig, replication_index: usize) -> ReplicationRecord {
    let demand = sample_demand(config, replication_index);
    let problem = config.base.with_demand(&demand);
    let outcome = match solve_plan(&problem) {
        Ok(solution) => ReplicationOutcome::Feasible {
            objective: solution.objective,
            waste_rate: waste_rate(&solution),
            selected: solution.selected,
        },
        Err(e) => ReplicationOutcome::Infeasible {
            reason: e.to_string(),
        },
    };
    ReplicationRecord {
        index: replication_index,
        outcome,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostStats {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator; 0 for one replication).
    pub stddev: f64,
    pub p5: f64,
    pub p50: f64,
    pub p95: f64,
    /// Half-width of the normal 95% confidence interval of the mean.
    pub ci95_half_width: f64,
}

/// Aggregate over feasible replications. Statistical fields are `None` when
/// no replication was feasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub replications_run: usize,
    pub infeasible_count: usize,
    pub all_infeasible: bool,
    pub cost: Option<CostStats>,
    pub waste_rate_mean: Option<f64>,
    pub selection_frequency: Option<Vec<f64>>,
}

/// Shifted mean: exact when every value is identical.
fn mean(values: &[f64]) -> f64 {
    let x0 = values[0];
    x0 + values.iter().map(|x| x - x0).sum::<f64>() / values.len() as f64
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn cost_stats(costs: &[f64]) -> CostStats {
    let n = costs.len();
    let mean = mean(costs);
    let stddev = if n > 1 {
        (costs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = costs.to_vec();
    sorted.sort_by(f64::total_cmp);
    CostStats {
        mean,
        stddev,
        p5: quantile(&sorted, 0.05),
        p50: quantile(&sorted, 0.50),
        p95: quantile(&sorted, 0.95),
        ci95_half_width: 1.96 * stddev / (n as f64).sqrt(),
    }
}

/// Builds the report from records already ordered by replication index.
pub fn summarize(plant_count: usize, records: &[ReplicationRecord]) -> McReport {
    let mut costs = Vec::new();
    let mut wastes = Vec::new();
    let mut counts = vec![0usize; plant_count];
    for record in records {
        if let ReplicationOutcome::Feasible {
            objective,
            selected,
            waste_rate,
        } = &record.outcome
        {
            costs.push(*objective);
            wastes.push(*waste_rate);
            for (c, &y) in counts.iter_mut().zip(selected) {
                *c += y as usize;
            }
        }
    }
    let feasible = costs.len();
    let (cost, waste_rate_mean, selection_frequency) = if feasible == 0 {
        (None, None, None)
    } else {
        (
            Some(cost_stats(&costs)),
            Some(mean(&wastes)),
            Some(counts.iter().map(|&c| c as f64 / feasible as f64).collect()),
        )
    };
    McReport {
        replications_run: records.len(),
        infeasible_count: records.len() - feasible,
        all_infeasible: feasible == 0,
        cost,
        waste_rate_mean,
        selection_frequency,
    }
}

/// Runs every replication on the global rayon pool.
pub fn run_simulation(config: &McConfig) -> McReport {
    let records: Vec<ReplicationRecord> = (0..config.replications)
        .into_par_iter()
        .map(|r| run_replication(config, r))
        .collect();
    summarize(config.base.plants.len(), &records)
}

/// Same as [`run_simulation`] on a dedicated pool of `workers` threads.
pub fn run_simulation_with_workers(config: &McConfig, workers: usize) -> Result<McReport, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(|| run_simulation(config)))
}

/// Positive surplus over production, across selected plant-periods.
pub fn waste_rate(solution: &PlanSolution) -> f64 {
    let mut waste = 0.0;
    let mut produced = 0.0;
    for j in solution.selected_indices() {
        for (z, k) in solution.production[j].iter().zip(&solution.surplus[j]) {
            waste += k.max(0.0);
            produced += z;
        }
    }
    if produced == 0.0 {
        0.0
    } else {
        waste / produced
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cheaper {
    Plant,
    Rooftop,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub plan_cost: f64,
    pub pv_cost_magnitude: f64,
    pub cheaper: Cheaper,
    pub waste_rate: f64,
}

/// Puts the plan objective next to the rooftop optimum's cost magnitude.
pub fn compare_models(plan: &PlanSolution, pv: &PvResult) -> ComparisonReport {
    compare_costs(plan.objective, pv.f_star.abs(), waste_rate(plan))
}

pub fn compare_costs(plan_cost: f64, pv_cost_magnitude: f64, waste_rate: f64) -> ComparisonReport {
    let cheaper = match plan_cost.total_cmp(&pv_cost_magnitude) {
        std::cmp::Ordering::Less => Cheaper::Plant,
        std::cmp::Ordering::Greater => Cheaper::Rooftop,
        std::cmp::Ordering::Equal => Cheaper::Tie,
    };
    ComparisonReport {
        plan_cost,
        pv_cost_magnitude,
        cheaper,
        waste_rate,
    }
}
