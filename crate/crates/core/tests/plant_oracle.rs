mod common;

use common::{naive_objective, random_problem, rel_diff, rng};
use proptest::prelude::*;
use rand::Rng;
use solarplan_core::plant::grid_error_bound;
use solarplan_core::{
    check_feasibility, enumerate_oracle, evaluate_objective, plant_total_cost, resolve_scenario,
    solve_plan, Mode, PlanProblem, PlanSolution, SolveError,
};

const GRID: usize = 1000;

/// Ok(true) when both agree on a feasible optimum, Ok(false) when both
/// report infeasibility.
fn agree(problem: &PlanProblem) -> Result<bool, String> {
    let solved = solve_plan(problem);
    let oracle = enumerate_oracle(problem, GRID);
    match (&solved, &oracle) {
        (Err(SolveError::Infeasible { .. }), Err(SolveError::Infeasible { .. })) => Ok(false),
        (Ok(s), Ok(o)) => {
            let tol = grid_error_bound(problem, GRID).max(1e-6 * s.objective.abs().max(o.objective.abs()));
            if (s.objective - o.objective).abs() > tol.max(1e-9) {
                return Err(format!("objective {} vs oracle {} (tol {tol})", s.objective, o.objective));
            }
            if s.objective > o.objective + 1e-9 * o.objective.abs().max(1.0) {
                return Err(format!("oracle beat solver: {} < {}", o.objective, s.objective));
            }
            Ok(true)
        }
        _ => Err(format!("feasibility differs: {solved:?} vs {oracle:?}")),
    }
}

#[test]
fn oracle_equivalence_rectified_and_literal() {
    let mut r = rng(7);
    let mut feasible = 0;
    for case in 0..240 {
        let mode = if case % 3 == 2 { Mode::Literal } else { Mode::Rectified };
        let p = random_problem(&mut r, mode, case % 4 == 1);
        feasible += agree(&p).unwrap_or_else(|e| panic!("case {case}: {e}\n{p:?}")) as usize;
    }
    assert!(feasible >= 60, "only {feasible} feasible cases");
}

#[test]
fn separability_in_rectified_mode() {
    let mut r = rng(11);
    let mut checked = 0;
    for _ in 0..200 {
        let p = random_problem(&mut r, Mode::Rectified, false);
        let Ok(s) = solve_plan(&p) else { continue };
        let sum: f64 = s
            .selected_indices()
            .into_iter()
            .map(|j| plant_total_cost(&p.plants[j], &p).total)
            .sum();
        assert!((s.objective - sum).abs() <= 1e-9 * s.objective.abs().max(1.0));
        checked += 1;
    }
    assert!(checked > 20, "{checked}");
}

#[test]
fn solutions_pass_feasibility_check() {
    let mut r = rng(13);
    for case in 0..300 {
        let mode = if case % 2 == 0 { Mode::Literal } else { Mode::Rectified };
        let p = random_problem(&mut r, mode, case % 3 == 0);
        if let Ok(s) = solve_plan(&p) {
            let v = check_feasibility(&p, &s);
            assert!(v.is_empty(), "case {case}: {v:?}");
            assert!(rel_diff(s.objective, naive_objective(&p, &s)) <= 1e-9);
        }
    }
}

#[test]
fn evaluator_matches_naive_loop_on_random_solutions() {
    let mut r = rng(17);
    for _ in 0..200 {
        let p = random_problem(&mut r, Mode::Rectified, true);
        let m = p.plants.len();
        let s = PlanSolution {
            selected: (0..m).map(|_| r.random_bool(0.5)).collect(),
            production: (0..m).map(|_| (0..p.horizon).map(|_| r.random_range(0.0..1e4)).collect()).collect(),
            surplus: (0..m).map(|_| (0..p.horizon).map(|_| r.random_range(-1e4..1e4)).collect()).collect(),
            objective: 0.0,
            per_plant_cost: vec![0.0; m],
            period_cost: vec![vec![0.0; p.horizon]; m],
        };
        let a = evaluate_objective(&p, &s);
        let b = naive_objective(&p, &s);
        let scale = a.abs().max(b.abs()).max(1.0);
        assert!((a - b).abs() <= 1e-12 * scale * 10.0, "{a} vs {b}");
    }
}

#[test]
fn table1_single_plant_cross_check() {
    let mut p = resolve_scenario("table1_low_demand").unwrap().problem;
    p.plants.truncate(1);
    p.required_count = 1;
    let cost = plant_total_cost(&p.plants[0], &p);
    // j1: Z = D in both periods, K = 0
    let hand = 5e9 + (3.5e4 + 3.4e4) * 4e3 + (4.5e4 + 4e4) * 4.2e3;
    assert!(rel_diff(cost.total, hand) < 1e-15);
    let s = solve_plan(&p).unwrap();
    assert!(rel_diff(evaluate_objective(&p, &s), cost.total) < 1e-15);
}

#[test]
fn shipped_tables_solve_and_match_oracle() {
    for name in ["table1_low_demand", "table2_medium_demand", "table3_high_demand"] {
        let p = resolve_scenario(name).unwrap().problem;
        let s = solve_plan(&p).unwrap();
        assert_eq!(s.selected_count(), 3);
        agree(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

fn scale_problem(p: &PlanProblem, lambda: f64) -> PlanProblem {
    let mut q = p.clone();
    for plant in &mut q.plants {
        plant.setup_cost *= lambda;
        for per in &mut plant.periods {
            per.npw *= lambda;
            per.transfer *= lambda;
            per.excess *= lambda;
        }
    }
    q
}

/// Smallest relative gap between selected and unselected selection costs.
fn selection_margin(p: &PlanProblem, s: &PlanSolution) -> f64 {
    let totals: Vec<f64> = p.plants.iter().map(|pl| plant_total_cost(pl, p).total).collect();
    let worst_in = s.selected_indices().iter().map(|&j| totals[j]).fold(f64::MIN, f64::max);
    let best_out = (0..p.plants.len())
        .filter(|&j| !s.selected[j])
        .map(|j| totals[j])
        .fold(f64::INFINITY, f64::min);
    if best_out.is_infinite() {
        return f64::INFINITY;
    }
    (best_out - worst_in) / best_out.abs().max(worst_in.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scaling_preserves_argmin(seed in any::<u64>(), lambda in 0.01f64..100.0) {
        let p = random_problem(&mut rng(seed), Mode::Rectified, false);
        let Ok(s) = solve_plan(&p) else { return Ok(()) };
        let scaled = solve_plan(&scale_problem(&p, lambda)).unwrap();
        prop_assert!(rel_diff(scaled.objective, lambda * s.objective) <= 1e-9
            || (scaled.objective - lambda * s.objective).abs() <= 1e-9);
        if selection_margin(&p, &s) > 1e-6 {
            prop_assert_eq!(scaled.selected, s.selected);
        }
    }

    #[test]
    fn raising_excess_cost_never_lowers_optimum(seed in any::<u64>(), bump in 0.0f64..1e5) {
        let mut r = rng(seed);
        let p = random_problem(&mut r, Mode::Rectified, false);
        let Ok(s) = solve_plan(&p) else { return Ok(()) };
        let mut q = p.clone();
        let j = r.random_range(0..q.plants.len());
        let t = r.random_range(0..q.horizon);
        q.plants[j].periods[t].excess += bump;
        let s2 = solve_plan(&q).unwrap();
        prop_assert!(s2.objective >= s.objective - 1e-9 * s.objective.abs().max(1.0));
    }
}
