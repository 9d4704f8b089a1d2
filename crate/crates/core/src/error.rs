use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("discount rate must be > -1, got {0}")]
    DiscountRate(f64),
    #[error("interest rate must be > 0, got {0}")]
    InterestRate(f64),
    #[error("panel capacity must be > 0, got {0}")]
    PanelCapacity(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("problem is invalid: {} violation(s), first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
    /// Fewer feasible plants than the required count. `blocking` lists plants
    /// that cannot be selected (and, in literal mode, plants that cannot be
    /// left out).
    #[error("infeasible: need {required} plants, {available} usable; blocking plants {blocking:?}")]
    Infeasible {
        required: usize,
        available: usize,
        blocking: Vec<usize>,
    },
    #[error("enumeration refused: {plants} plants exceeds the limit of {limit}")]
    TooLarge { plants: usize, limit: usize },
    #[error("grid_steps must be >= {min}, got {got}")]
    GridTooCoarse { got: usize, min: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("denominator sum of operating cost over selected plants is zero")]
    ZeroOperatingCost,
    #[error("no real solution: discriminant {0} < 0")]
    NegativeDiscriminant(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate match: target output {z_target} gives no finite panel count")]
    Degenerate { z_target: f64 },
    #[error("no positive panel count reproduces target output {z_target} (closed form gave {n})")]
    NoPositiveSolution { z_target: f64, n: f64 },
    #[error("extraneous root: N={n} reproduces {got} instead of {z_target}")]
    Extraneous { n: f64, got: f64, z_target: f64 },
}
