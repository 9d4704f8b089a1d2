use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solarplan_core::io::{ScenarioError, SCHEMA_VERSION};
use solarplan_core::plant::grid_error_bound;
use solarplan_core::{
    compare_models, enumerate_oracle, link_models, pv_optimal_output, render_report,
    resolve_scenario, run_simulation_with_workers, solve_plan, McConfig, Mode, PeriodParams,
    PlanProblem, PlanSolution, PlantSpec, ReportBundle, ReportFormat, ScenarioFile, SolutionTable,
    SolveError,
};

/// Overrides where relative `--out` paths are written.
const OUT_DIR_VAR: &str = "SOLARPLAN_OUT_DIR";

#[derive(Parser)]
#[command(name = "solarplan", version, about = "Solar plant selection and rooftop PV cost models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// text, csv or json
    #[arg(long, default_value = "text")]
    format: String,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the plant-selection model.
    Solve {
        /// Scenario file, or the name of a shipped scenario.
        scenario: String,
        #[command(flatten)]
        output: Output,
    },
    /// Cross-check the solver against exhaustive enumeration.
    Oracle {
        /// Scenario to check; omit when using --random.
        scenario: Option<String>,
        /// Generate a small random scenario from this seed instead.
        #[arg(long, conflicts_with = "scenario")]
        random: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        grid_steps: usize,
    },
    /// Closed-form optimum of the rooftop PV model.
    Pv {
        scenario: String,
        #[command(flatten)]
        output: Output,
    },
    /// Breakeven output of the plan and the matching rooftop panel count.
    Link {
        scenario: String,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo study of uncertain demand.
    Simulate {
        scenario: String,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Demand intervals nominal*(1 +/- spread); overrides the scenario's own intervals.
        #[arg(long)]
        spread: Option<f64>,
        /// Worker threads (0 = one per core). Results do not depend on it.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Plan cost next to the rooftop optimum's cost magnitude.
    Compare {
        scenario: String,
        #[command(flatten)]
        output: Output,
    },
    /// Check a scenario's schema and invariants.
    Validate { scenario: String },
}

enum Failure {
    /// Bad input files, unwritable output, failed checks.
    Input(String),
    /// The model has no solution.
    Infeasible(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Infeasible(_) => 3,
        }
    }
}

fn load(arg: &str) -> Result<ScenarioFile, Failure> {
    resolve_scenario(arg).map_err(|e| match e {
        ScenarioError::Invalid(v) => {
            let lines: Vec<String> = v.iter().map(|x| format!("  {x}")).collect();
            Failure::Input(format!("invariant: {} violation(s) in {arg}\n{}", v.len(), lines.join("\n")))
        }
        other => Failure::Input(format!("{}: {other}", other.category())),
    })
}

fn solve(problem: &PlanProblem) -> Result<PlanSolution, Failure> {
    solve_plan(problem).map_err(|e| match e {
        SolveError::Infeasible { .. } => Failure::Infeasible(e.to_string()),
        other => Failure::Input(other.to_string()),
    })
}

fn emit(bundle: &ReportBundle, output: &Output) -> Result<(), Failure> {
    let format: ReportFormat = output.format.parse().map_err(|e| Failure::Input(format!("{e}")))?;
    let text = render_report(bundle, format).map_err(|e| Failure::Input(e.to_string()))?;
    match &output.out {
        None => print!("{text}"),
        Some(path) => {
            let path = match std::env::var_os(OUT_DIR_VAR) {
                Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
                _ => path.clone(),
            };
            std::fs::write(&path, text)
                .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn plan_bundle(name: &str, scenario: &ScenarioFile, solution: &PlanSolution) -> ReportBundle {
    ReportBundle {
        scenario: Some(name.to_string()),
        solution: Some(SolutionTable::from_solution(&scenario.problem, solution)),
        objective: Some(solution.objective),
        ..Default::default()
    }
}

fn require_pv(scenario: &ScenarioFile, name: &str) -> Result<solarplan_core::PvParams, Failure> {
    scenario
        .pv
        .ok_or_else(|| Failure::Input(format!("scenario {name} has no `pv` section")))
}

/// Small random instance whose demands fit inside capacity.
fn random_scenario(seed: u64) -> ScenarioFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(2..=6);
    let horizon = rng.random_range(1..=3);
    let plants = (0..m)
        .map(|j| PlantSpec {
            id: format!("r{}", j + 1),
            setup_cost: rng.random_range(0.0..1e5),
            periods: (0..horizon)
                .map(|_| {
                    let cap_min = rng.random_range(0.0..5e3);
                    let cap_max = cap_min + rng.random_range(0.0..5e3);
                    PeriodParams {
                        npw: rng.random_range(0.0..1e2),
                        transfer: rng.random_range(0.0..1e2),
                        excess: rng.random_range(0.0..1e2),
                        cap_min,
                        cap_max,
                        demand: rng.random_range(0.0..cap_max.max(1.0)),
                    }
                })
                .collect(),
        })
        .collect();
    ScenarioFile {
        schema_version: SCHEMA_VERSION.to_string(),
        metadata: solarplan_core::io::Metadata {
            name: format!("random-{seed}"),
            notes: String::new(),
            reported: None,
        },
        problem: PlanProblem {
            plants,
            horizon,
            required_count: rng.random_range(1..=m),
            discount_rate: rng.random_range(0.0..0.2),
            mode: Mode::Rectified,
            allow_shortage: false,
        },
        pv: None,
        mc: None,
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { scenario, output } => {
            let s = load(&scenario)?;
            let solution = solve(&s.problem)?;
            emit(&plan_bundle(&scenario, &s, &solution), &output)
        }
        Command::Oracle {
            scenario,
            random,
            grid_steps,
        } => {
            let (label, s) = match (scenario, random) {
                (Some(name), _) => {
                    let s = load(&name)?;
                    (name, s)
                }
                (None, Some(seed)) => (format!("random-{seed}"), random_scenario(seed)),
                (None, None) => return Err(Failure::Input("give a scenario or --random SEED".into())),
            };
            let solved = solve_plan(&s.problem);
            let oracle = enumerate_oracle(&s.problem, grid_steps);
            println!("scenario: {label}");
            match (solved, oracle) {
                (Ok(a), Ok(b)) => {
                    let tol = grid_error_bound(&s.problem, grid_steps)
                        .max(1e-6 * a.objective.abs().max(b.objective.abs()));
                    let agree = (a.objective - b.objective).abs() <= tol;
                    println!(
                        "{} solver={} oracle={} tolerance={}",
                        if agree { "AGREE" } else { "DISAGREE" },
                        a.objective,
                        b.objective,
                        tol
                    );
                    if !agree {
                        return Err(Failure::Input("solver and oracle disagree".into()));
                    }
                }
                (Err(SolveError::Infeasible { .. }), Err(SolveError::Infeasible { .. })) => {
                    println!("AGREE solver=infeasible oracle=infeasible");
                }
                (a, b) => {
                    println!("DISAGREE solver={a:?} oracle={b:?}");
                    return Err(Failure::Input("solver and oracle disagree".into()));
                }
            }
            Ok(())
        }
        Command::Pv { scenario, output } => {
            let s = load(&scenario)?;
            let pv = require_pv(&s, &scenario)?;
            let bundle = ReportBundle {
                scenario: Some(scenario),
                pv: Some(pv_optimal_output(&pv)),
                ..Default::default()
            };
            emit(&bundle, &output)
        }
        Command::Link { scenario, output } => {
            let s = load(&scenario)?;
            let pv = require_pv(&s, &scenario)?;
            let solution = solve(&s.problem)?;
            let link = link_models(&s.problem, &solution, &pv)
                .map_err(|e| Failure::Infeasible(format!("linkage: {e}")))?;
            let mut bundle = plan_bundle(&scenario, &s, &solution);
            bundle.pv = Some(pv_optimal_output(&pv));
            bundle.link = Some(link);
            emit(&bundle, &output)
        }
        Command::Simulate {
            scenario,
            replications,
            seed,
            spread,
            workers,
            output,
        } => {
            let s = load(&scenario)?;
            let mut config = match (spread, s.mc_config()) {
                (Some(spread), _) => McConfig::with_spread(s.problem.clone(), spread, 1000, 0),
                (None, Some(cfg)) => cfg,
                (None, None) => McConfig::with_spread(s.problem.clone(), 0.0, 1000, 0),
            };
            if let Some(r) = replications {
                config.replications = r;
            }
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let bad = config.violations();
            if !bad.is_empty() {
                return Err(Failure::Input(format!("invalid simulation: {}", bad[0])));
            }
            let report = run_simulation_with_workers(&config, workers)
                .map_err(|e| Failure::Input(format!("thread pool: {e}")))?;
            if report.all_infeasible {
                return Err(Failure::Infeasible(format!(
                    "all {} replications infeasible",
                    report.replications_run
                )));
            }
            let bundle = ReportBundle {
                scenario: Some(scenario),
                mc: Some(report),
                ..Default::default()
            };
            emit(&bundle, &output)
        }
        Command::Compare { scenario, output } => {
            let s = load(&scenario)?;
            let pv = require_pv(&s, &scenario)?;
            let solution = solve(&s.problem)?;
            let optimum = pv_optimal_output(&pv);
            let mut bundle = plan_bundle(&scenario, &s, &solution);
            bundle.comparison = Some(compare_models(&solution, &optimum));
            bundle.pv = Some(optimum);
            emit(&bundle, &output)
        }
        Command::Validate { scenario } => {
            load(&scenario)?;
            println!("{scenario}: valid");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(msg) | Failure::Infeasible(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
