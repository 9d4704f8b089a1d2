//! Capacity planning for solar generation.
//!
//! Two cost models live here: a discounted plant-selection problem solved
//! exactly (with a brute-force reference solver for checking), and a rooftop
//! photovoltaic cost parabola with a closed-form optimum. [`linkage`] connects
//! them through a matching panel count, and [`mc`] re-solves the plant model
//! under uniformly uncertain demand.

pub mod error;
pub mod io;
pub mod linkage;
pub mod mc;
pub mod model;
pub mod plant;
pub mod pv;

pub use error::{DomainError, LinkError, SolveError};
pub use io::{
    export_report, load_report, load_scenario, render_report, resolve_scenario, ReportBundle,
    ReportFormat, ScenarioError, ScenarioFile, SolutionTable,
};
pub use linkage::{breakeven_output, link_models, output_given_panels, panel_count_match, LinkResult};
pub use mc::{
    compare_models, run_replication, run_simulation, run_simulation_with_workers, sample_demand,
    waste_rate, Cheaper, ComparisonReport, McConfig, McReport,
};
pub use model::{
    annuity_factor, discount_factor, validate_problem, Mode, PeriodParams, PlanProblem,
    PlanSolution, PlantSpec, PvParams, Rule, Violation,
};
pub use plant::{
    check_feasibility, enumerate_oracle, evaluate_objective, inner_optimal_dispatch,
    plant_total_cost, solve_plan, DispatchResult, PlantCost,
};
pub use pv::{panels_needed, pv_cost, pv_optimal_output, pv_stationary_residual, PvResult};
