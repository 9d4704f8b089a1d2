//! Reference computations used only by tests. None of these call into the
//! code paths they check.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solarplan_core::{Mode, PeriodParams, PlanProblem, PlanSolution, PlantSpec, PvParams};

/// `(num/den)^t` for a rational base, rounded to f64 from an exact big
/// integer ratio.
pub fn exact_rational_power(num: u64, den: u64, t: u32) -> f64 {
    let n = BigUint::from(num).pow(t);
    let d = BigUint::from(den).pow(t);
    // scale so the quotient carries ~128 significant bits
    let shift = (d.bits() as i64 - n.bits() as i64 + 128).max(0) as u32;
    let q = (n << shift) / d;
    let bits = q.bits();
    let top = if bits > 64 { &q >> (bits - 64) } else { q.clone() };
    let mantissa = top.to_u64().unwrap() as f64;
    let exp = bits.saturating_sub(64) as i32 - shift as i32;
    mantissa * 2f64.powi(exp)
}

/// `sum_{t=1..T} (1+I)^-t / (1+I)`, one term at a time.
pub fn annuity_by_terms(interest: f64, lifetime: u32) -> f64 {
    let mut total = 0.0;
    let mut term = 1.0;
    for _ in 0..lifetime {
        term /= 1.0 + interest;
        total += term;
    }
    total / (1.0 + interest)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Rooftop cost built as linear term plus the integral of the discounted
/// per-period marginal cost, summed period by period and integrated by
/// quadrature from 0 to `z`.
pub fn pv_cost_by_summation(p: &PvParams, z: f64) -> f64 {
    let (a, b, c, q) = (p.consumption, p.panel_capacity, p.panel_price, p.op_cost);
    let mut weights = 0.0;
    let mut disc = 1.0;
    for _ in 0..p.lifetime {
        disc /= 1.0 + p.interest;
        weights += disc / (1.0 + p.interest);
    }
    let integrand = |w: f64| a * q * w / b * weights;
    a * c * q * z / b + simpson(integrand, 0.0, z, 64)
}

/// Double-double value `hi + lo`, enough precision that the cost parabola's
/// rounding noise stops limiting where a search can place its minimum.
#[derive(Clone, Copy, Debug)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    pub fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        Self::two_sum(s.hi, lo)
    }

    pub fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let err = self.hi.mul_add(o.hi, -p);
        let lo = err + self.hi * o.lo + self.lo * o.hi;
        Self::two_sum(p, lo)
    }

    pub fn lt(self, o: Self) -> bool {
        self.hi < o.hi || (self.hi == o.hi && self.lo < o.lo)
    }
}

/// Rooftop cost `A*C*Q*z/B + A*Q*z^2/(2B) * beta` in double-double, with
/// `beta` from the term-by-term sum.
pub fn pv_cost_extended(p: &PvParams, z: f64) -> DoubleDouble {
    let beta = annuity_by_terms(p.interest, p.lifetime);
    let linear = p.consumption * p.panel_price * p.op_cost / p.panel_capacity;
    let quad = p.consumption * p.op_cost / (2.0 * p.panel_capacity) * beta;
    let z = DoubleDouble::from(z);
    DoubleDouble::from(linear)
        .mul(z)
        .add(DoubleDouble::from(quad).mul(z).mul(z))
}

/// Golden-section search over an exactly comparable objective.
pub fn golden_section_by<T: Copy>(f: impl Fn(f64) -> T, less: impl Fn(T, T) -> bool, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= rel_tol * (a.abs() + b.abs()) * 0.5 {
            break;
        }
        if less(fc, fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Golden-section search for the minimum of a unimodal function on [a, b].
pub fn golden_section(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    golden_section_by(f, |x: f64, y: f64| x < y, a, b, rel_tol)
}

/// Root of a monotone function by bisection in log space on [lo, hi].
pub fn log_bisection(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let fa = f(lo);
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        let fm = f(m.exp());
        if fm == 0.0 {
            return m.exp();
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    (0.5 * (a + b)).exp()
}

/// Plain triple-loop objective.
pub fn naive_objective(problem: &PlanProblem, s: &PlanSolution) -> f64 {
    let mut total = 0.0;
    for j in 0..problem.plants.len() {
        let y = s.selected[j] as i32 as f64;
        total += problem.plants[j].setup_cost * y;
        for t in 0..problem.horizon {
            let p = &problem.plants[j].periods[t];
            let mut disc = 1.0;
            for _ in 0..=t {
                disc /= 1.0 + problem.discount_rate;
            }
            total += (p.npw + p.transfer) * y * s.production[j][t] * disc;
            total += p.excess * s.surplus[j][t] * disc;
        }
    }
    total
}

pub fn naive_waste_rate(s: &PlanSolution) -> f64 {
    let mut waste = 0.0;
    let mut made = 0.0;
    for j in 0..s.selected.len() {
        if !s.selected[j] {
            continue;
        }
        for t in 0..s.production[j].len() {
            if s.surplus[j][t] > 0.0 {
                waste += s.surplus[j][t];
            }
            made += s.production[j][t];
        }
    }
    if made == 0.0 {
        0.0
    } else {
        waste / made
    }
}

/// Random instance with costs in [0, 1e5] and capacities/demands in [0, 1e4].
pub fn random_problem(rng: &mut ChaCha8Rng, mode: Mode, allow_shortage: bool) -> PlanProblem {
    let m = rng.random_range(1..=8);
    let horizon = rng.random_range(1..=3);
    let plants = (0..m)
        .map(|j| PlantSpec {
            id: format!("p{j}"),
            setup_cost: rng.random_range(0.0..1e5),
            periods: (0..horizon)
                .map(|_| {
                    let x: f64 = rng.random_range(0.0..1e4);
                    let y: f64 = rng.random_range(0.0..1e4);
                    // a zero minimum now and then keeps literal-mode idling possible
                    let cap_min = if rng.random_bool(0.3) { 0.0 } else { x.min(y) };
                    PeriodParams {
                        npw: rng.random_range(0.0..1e5),
                        transfer: rng.random_range(0.0..1e5),
                        excess: rng.random_range(0.0..1e5),
                        cap_min,
                        cap_max: x.max(y),
                        demand: rng.random_range(0.0..1e4),
                    }
                })
                .collect(),
        })
        .collect();
    PlanProblem {
        plants,
        horizon,
        required_count: rng.random_range(0..=m),
        discount_rate: rng.random_range(0.0..0.3),
        mode,
        allow_shortage,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shipped rooftop alternatives: (name, params).
pub fn table4() -> Vec<(&'static str, PvParams)> {
    let row = |i, t, q, c, a, b| PvParams {
        interest: i,
        lifetime: t,
        op_cost: q,
        panel_price: c,
        consumption: a,
        panel_capacity: b,
    };
    vec![
        ("korea", row(0.25, 60, 80.0, 410.0, 456_250.0, 250.0)),
        ("china", row(0.12, 12, 10.0, 170.0, 32_850.0, 90.0)),
        ("taiwan", row(0.18, 48, 50.0, 250.0, 423_400.0, 290.0)),
        ("usa", row(0.10, 36, 90.0, 390.0, 279_225.0, 255.0)),
        ("japan", row(0.13, 24, 50.0, 433.0, 175_200.0, 240.0)),
    ]
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
