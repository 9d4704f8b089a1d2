//! Bridge between the plant-selection plan and the rooftop model.
//!
//! A solved plan yields a breakeven output `z_i`; the rooftop model gives
//! per-panel output as a function of panel count `N` for a target cost. The
//! matching panel count is the `N` at which both agree.

use serde::{Deserialize, Serialize};

use crate::error::LinkError;
use crate::model::{discount_factor, PlanProblem, PlanSolution, PvParams};
use crate::pv::pv_optimal_output;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub z_breakeven: f64,
    pub n_star: f64,
    pub n_star_ceil: u64,
    /// `|output_given_panels(n_star) - z_breakeven|`.
    pub residual: f64,
}

/// Breakeven output of a solved plan.
///
/// The surplus integral runs from 0 to each selected plant-period's surplus,
/// so it contributes `H*K^2/2`, discounted by period. Operating costs in the
/// denominator are summed over selected plants and periods without
/// discounting.
pub fn breakeven_output(problem: &PlanProblem, solution: &PlanSolution) -> Result<f64, LinkError> {
    let mut surplus_term = 0.0;
    let mut setup = 0.0;
    let mut operating = 0.0;
    for (j, plant) in problem.plants.iter().enumerate() {
        if !solution.selected[j] {
            continue;
        }
        setup += plant.setup_cost;
        for (t, p) in plant.periods.iter().enumerate() {
            let k = solution.surplus[j][t];
            let disc = discount_factor(problem.discount_rate, t as u32 + 1)
                .map_err(|e| LinkError::InvalidArgument(e.to_string()))?;
            surplus_term += p.excess * k * k / 2.0 * disc;
            operating += p.npw;
        }
    }
    if operating == 0.0 {
        return Err(LinkError::ZeroOperatingCost);
    }
    Ok((-surplus_term - setup) / operating)
}

/// Per-panel output that makes `n` panels cost `f_target`: the non-negative
/// root of `(n*q*beta/2) Z^2 + n*c*q Z - f_target = 0` when `f_target >= 0`.
pub fn output_given_panels(n: f64, c: f64, q: f64, f_target: f64, beta: f64) -> Result<f64, LinkError> {
    if !(n > 0.0) {
        return Err(LinkError::InvalidArgument(format!("panel count must be > 0, got {n}")));
    }
    if !(q > 0.0) {
        return Err(LinkError::InvalidArgument(format!("operating cost must be > 0, got {q}")));
    }
    if !(beta > 0.0) {
        return Err(LinkError::InvalidArgument(format!("annuity factor must be > 0, got {beta}")));
    }
    let linear = n * c * q;
    let disc = linear * linear + 2.0 * f_target * n * q * beta;
    if disc < 0.0 {
        return Err(LinkError::NegativeDiscriminant(disc));
    }
    let root = disc.sqrt();
    if linear >= 0.0 && linear + root > 0.0 {
        // Rationalized form; no cancellation between -linear and root.
        Ok(2.0 * f_target / (linear + root))
    } else {
        Ok((-linear + root) / (n * q * beta))
    }
}

/// Panel count at which [`output_given_panels`] equals `z_target`.
///
/// Isolating the radical and squaring gives
/// `N = 2 f beta / (q ((beta z + c)^2 - c^2)) = 2 f / (q z (beta z + 2c))`;
/// the result is then checked by substituting back.
pub fn panel_count_match(z_target: f64, c: f64, q: f64, f_target: f64, beta: f64) -> Result<LinkResult, LinkError> {
    let denom = q * z_target * (beta * z_target + 2.0 * c);
    if denom == 0.0 {
        return Err(LinkError::Degenerate { z_target });
    }
    let n = 2.0 * f_target / denom;
    if !(n > 0.0 && n.is_finite()) {
        return Err(LinkError::NoPositiveSolution { z_target, n });
    }
    let got = output_given_panels(n, c, q, f_target, beta)?;
    let residual = (got - z_target).abs();
    if residual > 1e-9 * z_target.abs().max(1.0) {
        return Err(LinkError::Extraneous { n, got, z_target });
    }
    Ok(LinkResult {
        z_breakeven: z_target,
        n_star: n,
        n_star_ceil: n.ceil() as u64,
        residual,
    })
}

/// Full pipeline: breakeven output of the plan, then the panel count whose
/// rooftop output matches it, using the rooftop optimum's cost magnitude as
/// the target.
pub fn link_models(problem: &PlanProblem, solution: &PlanSolution, pv: &PvParams) -> Result<LinkResult, LinkError> {
    let z = breakeven_output(problem, solution)?;
    let opt = pv_optimal_output(pv);
    panel_count_match(z, pv.panel_price, pv.op_cost, opt.f_star.abs(), opt.beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Mode, PeriodParams, PlantSpec};

    fn one_plant(setup: f64, npw: f64, excess: f64) -> (PlanProblem, PlanSolution) {
        let problem = PlanProblem {
            plants: vec![PlantSpec {
                id: "a".into(),
                setup_cost: setup,
                periods: vec![PeriodParams {
                    npw,
                    transfer: 0.0,
                    excess,
                    cap_min: 0.0,
                    cap_max: 10.0,
                    demand: 3.0,
                }],
            }],
            horizon: 1,
            required_count: 1,
            discount_rate: 0.0,
            mode: Mode::Rectified,
            allow_shortage: false,
        };
        let solution = PlanSolution {
            selected: vec![true],
            production: vec![vec![5.0]],
            surplus: vec![vec![2.0]],
            objective: 0.0,
            per_plant_cost: vec![0.0],
            period_cost: vec![vec![0.0]],
        };
        (problem, solution)
    }

    #[test]
    fn breakeven_zero_without_setup_or_excess() {
        let (p, s) = one_plant(0.0, 1.0, 0.0);
        assert_eq!(breakeven_output(&p, &s).unwrap(), 0.0);
    }

    #[test]
    fn breakeven_hand_value() {
        let (p, s) = one_plant(2.0, 1.0, 0.0);
        assert_eq!(breakeven_output(&p, &s).unwrap(), -2.0);
        // H=3, K=2: integral 6, so (-6 - 2)/1
        let (p, s) = one_plant(2.0, 1.0, 3.0);
        assert_eq!(breakeven_output(&p, &s).unwrap(), -8.0);
    }

    #[test]
    fn breakeven_zero_operating_cost() {
        let (p, s) = one_plant(2.0, 0.0, 0.0);
        assert_eq!(breakeven_output(&p, &s), Err(LinkError::ZeroOperatingCost));
    }

    #[test]
    fn output_zero_target() {
        assert_eq!(output_given_panels(3.0, 2.0, 1.5, 0.0, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn output_hand_quadratic() {
        let z = output_given_panels(1.0, 1.0, 1.0, 4.0, 2.0).unwrap();
        assert!((z - (17f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn output_negative_discriminant() {
        assert!(matches!(
            output_given_panels(1.0, 1.0, 1.0, -10.0, 2.0),
            Err(LinkError::NegativeDiscriminant(_))
        ));
        assert!(output_given_panels(0.0, 1.0, 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn match_degenerate_for_zero_target() {
        let z = output_given_panels(5.0, 1.0, 1.0, 0.0, 2.0).unwrap();
        assert!(matches!(
            panel_count_match(z, 1.0, 1.0, 0.0, 2.0),
            Err(LinkError::Degenerate { .. })
        ));
    }

    #[test]
    fn match_round_trip_hand() {
        let z = (17f64.sqrt() - 1.0) / 2.0;
        let r = panel_count_match(z, 1.0, 1.0, 4.0, 2.0).unwrap();
        assert!((r.n_star - 1.0).abs() < 1e-12);
        assert_eq!(r.n_star_ceil, 1);
        assert!(r.residual <= 1e-9);
    }

    #[test]
    fn match_negative_target_has_no_positive_count() {
        assert!(matches!(
            panel_count_match(-2.0, 1.0, 1.0, 4.0, 0.1),
            Err(LinkError::NoPositiveSolution { .. })
        ));
    }

    #[test]
    fn match_rejects_extraneous_root() {
        // beta*z + c < 0 passes the squared equation but not the original.
        let r = panel_count_match(-30.0, 1.0, 1.0, 4.0, 0.1);
        assert!(matches!(r, Err(LinkError::Extraneous { .. })), "{r:?}");
    }
}
