//! Real branches of the Lambert W function.
//!
//! `W(z)` solves `w * exp(w) = z`. The principal branch covers
//! `z >= -1/e` with `w >= -1`; the `-1` branch covers `-1/e <= z < 0` with
//! `w <= -1`. Both are seeded from a branch-point series or an asymptotic
//! expansion and refined with Halley's method.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Principal,
    #[default]
    MinusOne,
}

/// -1/e split into a head and a tail so that `z + 1/e` keeps full precision.
const INV_E_HI: f64 = 0.36787944117144233;
const INV_E_LO: f64 = -1.2428753672788363e-17;

/// Slack allowed below -1/e before a point is rejected.
const BRANCH_POINT_SLACK: f64 = 1e-15;
const MAX_ITER: usize = 50;

/// Below this branch-point distance the series alone is accurate to
/// rounding.
const SERIES_ONLY: f64 = 1e-3;

// Coefficients of W = -1 + p - p^2/3 + 11/72 p^3 - ... in p = sqrt(2(ez + 1)).
const BRANCH_SERIES: [f64; 9] = [
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680863.0 / 43545600.0,
    -1963.0 / 204120.0,
];

fn branch_series(p: f64) -> f64 {
    BRANCH_SERIES.iter().rev().fold(0.0, |acc, &c| acc * p + c)
}

/// `e*z + 1`, accurate near the branch point.
fn branch_distance(z: f64) -> f64 {
    E * ((z + INV_E_HI) + INV_E_LO)
}

fn initial_guess(branch: Branch, z: f64, p: f64) -> f64 {
    match branch {
        Branch::Principal => {
            if p < 0.5 {
                branch_series(p)
            } else if z.abs() < 0.25 {
                z * (1.0 - z * (1.0 - 1.5 * z))
            } else if z < 3.0 {
                // Winitzki's global approximation.
                let l = (1.0 + z).ln();
                l * (1.0 - (1.0 + l).ln() / (2.0 + l))
            } else {
                let l1 = z.ln();
                let l2 = l1.ln();
                l1 - l2 + l2 / l1
            }
        }
        Branch::MinusOne => {
            if p < 0.8 {
                branch_series(-p)
            } else {
                let l1 = (-z).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            }
        }
    }
}

/// Evaluates `W_branch(z)`.
pub fn lambert_w(branch: Branch, z: f64) -> Result<f64> {
    let domain = Err(Error::DomainError { z, branch });
    if z.is_nan() {
        return domain;
    }
    let d = branch_distance(z);
    if d < -BRANCH_POINT_SLACK * E {
        return domain;
    }
    if d <= 0.0 {
        return Ok(-1.0);
    }
    match branch {
        Branch::Principal => {
            if z == 0.0 {
                return Ok(0.0);
            }
            if z == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
        }
        Branch::MinusOne => {
            if z >= 0.0 {
                return domain;
            }
        }
    }
    let p = (2.0 * d).sqrt();
    if p < SERIES_ONLY {
        return Ok(match branch {
            Branch::Principal => branch_series(p),
            Branch::MinusOne => branch_series(-p),
        });
    }
    let mut w = initial_guess(branch, z, p);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let slope = ew * wp1;
        let step = f / (slope - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        // Rounding in f limits the attainable step to about eps*|z|/|f'|.
        let floor = 4.0 * f64::EPSILON * z.abs() / slope.abs();
        if step.abs() <= 1e-15 * (1.0 + w.abs()) + floor {
            return Ok(clamp_to_branch(branch, w));
        }
    }
    Err(Error::NoConvergence(z))
}

fn clamp_to_branch(branch: Branch, w: f64) -> f64 {
    match branch {
        Branch::Principal => w.max(-1.0),
        Branch::MinusOne => w.min(-1.0),
    }
}

/// `dW/dz = W / (z (1 + W))`, with the `z -> 0` limit of 1 on the principal
/// branch.
pub fn lambert_w_derivative(branch: Branch, z: f64) -> Result<f64> {
    if !z.is_nan() && branch_distance(z) <= 0.0 && branch_distance(z) >= -BRANCH_POINT_SLACK * E {
        return Err(Error::BranchPointSingularity);
    }
    let w = lambert_w(branch, z)?;
    if w == -1.0 {
        return Err(Error::BranchPointSingularity);
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    Ok(w / (z * (1.0 + w)))
}

/// `W_branch(-exp(-s))` for `s >= 1`, returned as `u = -W > 0`.
///
/// Equivalent to solving `u - ln(u) = s`, with `u >= 1` on the `-1` branch
/// and `0 < u <= 1` on the principal branch. Working with `s` directly keeps
/// full precision when `-exp(-s)` would underflow.
pub fn neg_w_of_neg_exp(branch: Branch, s: f64) -> Result<f64> {
    let q = s - 1.0;
    if s.is_nan() || q < -BRANCH_POINT_SLACK {
        return Err(Error::DomainError {
            z: -(-s).exp(),
            branch,
        });
    }
    if q <= 0.0 {
        return Ok(1.0);
    }
    // p = sqrt(2(ez + 1)) with z = -exp(-s).
    let p = (-2.0 * (-q).exp_m1()).sqrt();
    match branch {
        Branch::MinusOne => {
            let mut u = if p < 0.8 {
                -branch_series(-p)
            } else {
                s + s.ln()
            };
            if p < SERIES_ONLY {
                return Ok(u);
            }
            for _ in 0..MAX_ITER {
                let g = u - u.ln() - s;
                let g1 = 1.0 - 1.0 / u;
                let g2 = 1.0 / (u * u);
                let step = g / (g1 - g * g2 / (2.0 * g1));
                u -= step;
                let floor = 4.0 * f64::EPSILON * s / g1.abs();
                if step.abs() <= 1e-15 * u + floor {
                    return Ok(u.max(1.0));
                }
            }
            Err(Error::NoConvergence(-(-s).exp()))
        }
        Branch::Principal => {
            // Iterate on v = ln(u): exp(v) - v - s = 0.
            let mut v = if p < 0.5 {
                (-branch_series(p)).ln()
            } else {
                -s + (-s).exp()
            };
            if p < SERIES_ONLY {
                return Ok(v.exp());
            }
            for _ in 0..MAX_ITER {
                let ev = v.exp();
                let h = ev - v - s;
                let h1 = ev - 1.0;
                let step = h / (h1 - h * ev / (2.0 * h1));
                v -= step;
                let floor = 4.0 * f64::EPSILON * s / h1.abs();
                if step.abs() <= 1e-15 + floor {
                    return Ok(v.exp().min(1.0));
                }
            }
            Err(Error::NoConvergence(-(-s).exp()))
        }
    }
}
