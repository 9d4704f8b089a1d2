//! Rooftop photovoltaic cost model.
//!
//! The cost is a parabola in per-panel output `z`:
//!
//! ```text
//! F(z) = A*C*Q*z/B + A*Q*z^2/(2B) * beta
//! ```
//!
//! with `beta` the annuity factor. It is convex, and its minimum sits at the
//! negative point `z = -C/beta`. Reported outputs keep the signed stationary
//! point and its magnitude apart.

use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::model::{annuity_factor, PvParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvResult {
    /// Magnitude of the stationary point, the customary reported output.
    pub z_star: f64,
    /// Signed minimizer of the cost parabola; always negative.
    pub z_stationary: f64,
    /// Cost at the stationary point; always negative.
    pub f_star: f64,
    pub beta: f64,
    /// Consumption over panel capacity.
    pub panels: f64,
    pub panels_ceil: u64,
}

impl PvResult {
    pub fn f_star_magnitude(&self) -> f64 {
        self.f_star.abs()
    }
}

fn beta(params: &PvParams) -> f64 {
    // PvParams validation guarantees a positive interest rate.
    annuity_factor(params).expect("valid PvParams have positive interest")
}

pub fn pv_cost(params: &PvParams, z: f64) -> f64 {
    let PvParams {
        op_cost: q,
        panel_price: c,
        consumption: a,
        panel_capacity: b,
        ..
    } = *params;
    a * c * q * z / b + a * q * z * z / (2.0 * b) * beta(params)
}

/// Analytic derivative of [`pv_cost`] with respect to `z`.
pub fn pv_stationary_residual(params: &PvParams, z: f64) -> f64 {
    let PvParams {
        op_cost: q,
        panel_price: c,
        consumption: a,
        panel_capacity: b,
        ..
    } = *params;
    a * c * q / b + a * q * z / b * beta(params)
}

/// Closed-form minimizer and minimum of [`pv_cost`].
pub fn pv_optimal_output(params: &PvParams) -> PvResult {
    let beta = beta(params);
    let PvParams {
        interest: i,
        lifetime,
        op_cost: q,
        panel_price: c,
        consumption: a,
        panel_capacity: b,
    } = *params;
    let one_minus = -(-(lifetime as f64) * i.ln_1p()).exp_m1();
    let z_stationary = -c * i * (i + 1.0) / one_minus;
    let f_star = -(a * c * c * q * i * (i + 1.0)) / (2.0 * b * one_minus);
    let (panels, panels_ceil) = panels_needed(a, b).expect("valid PvParams have positive capacity");
    PvResult {
        z_star: z_stationary.abs(),
        z_stationary,
        f_star,
        beta,
        panels,
        panels_ceil,
    }
}

/// Panels needed to cover `consumption`, as a real count and as a whole
/// purchase count.
pub fn panels_needed(consumption: f64, panel_capacity: f64) -> Result<(f64, u64), DomainError> {
    if !(panel_capacity > 0.0) {
        return Err(DomainError::PanelCapacity(panel_capacity));
    }
    let n = consumption / panel_capacity;
    Ok((n, n.ceil().max(0.0) as u64))
}
