//! Lattice points under `rΓ(s)`.
//!
//! `N(r,s)` counts positive-integer points `(j,k)` with `k ≤ r·s·f(j·s/r)`,
//! boundary included. `𝒩(r,s)` also counts points on the axes, origin
//! included.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::curves::{Curve, CurveKind};
use crate::error::{ensure_positive, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrant {
    /// Open first quadrant, `j, k ≥ 1`: `N(r,s)`.
    Positive,
    /// Closed first quadrant, `j, k ≥ 0`: `𝒩(r,s)`.
    Nonnegative,
}

#[derive(Debug, Clone, Copy)]
pub struct CountQuery<'a> {
    pub curve: &'a Curve,
    pub r: f64,
    pub s: f64,
    pub mode: Quadrant,
}

impl<'a> CountQuery<'a> {
    pub fn new(curve: &'a Curve, r: f64, s: f64, mode: Quadrant) -> Result<Self> {
        ensure_positive("r", r)?;
        ensure_positive("s", s)?;
        Ok(CountQuery { curve, r, s, mode })
    }

    pub fn count(&self) -> u64 {
        count_unchecked(self.curve, self.r, self.s, self.mode)
    }
}

/// Relative width of the band around an integer inside which a computed
/// height is treated as landing exactly on it.
pub const SNAP_TOLERANCE: f64 = 1e-9;

/// `⌊v⌋`, except that values within `SNAP_TOLERANCE·(1+|v|)` of an integer
/// are taken to be that integer. Boundary points count as inside, and a
/// naive floor undercounts exact hits that round down.
#[inline]
pub fn snap_floor(v: f64) -> i64 {
    let n = v.round();
    if (v - n).abs() <= SNAP_TOLERANCE * (1.0 + v.abs()) {
        n as i64
    } else {
        v.floor() as i64
    }
}

/// `N(r,s)` or `𝒩(r,s)` depending on `mode`.
pub fn count(curve: &Curve, r: f64, s: f64, mode: Quadrant) -> Result<u64> {
    Ok(CountQuery::new(curve, r, s, mode)?.count())
}

pub(crate) fn count_unchecked(curve: &Curve, r: f64, s: f64, mode: Quadrant) -> u64 {
    let cols = snap_floor(r * curve.x_intercept() / s).max(0) as u64;
    let rows = snap_floor(r * s * curve.y_intercept()).max(0) as u64;
    let positive = match curve.kind() {
        CurveKind::Square => cols * rows,
        _ if cols <= rows => (1..=cols)
            .map(|j| snap_floor(r * s * curve.f(j as f64 * s / r)).max(0) as u64)
            .sum(),
        _ => (1..=rows)
            .map(|k| snap_floor(r / s * curve.g(k as f64 / (r * s))).max(0) as u64)
            .sum(),
    };
    match mode {
        Quadrant::Positive => positive,
        Quadrant::Nonnegative => positive + cols + rows + 1,
    }
}

/// `N(r,1)` for the diamond, `⌊r⌋⌊r−1⌋/2`, in integer arithmetic.
pub fn count_p1_balanced(r: f64) -> u64 {
    let n = r.floor();
    if n < 2.0 {
        return 0;
    }
    let n = n as u64;
    n * (n - 1) / 2
}

/// `N(√2(m+½), √2)` for the diamond, which is exactly `m²`.
pub fn count_p1_sqrt2(m: u64) -> u64 {
    m * m
}

/// `ρ = 𝒩(r,s) − N(r,s) − r(L/s + sM)`, which always lies in `[−1, 1]`.
pub fn relation_residual(curve: &Curve, r: f64, s: f64) -> Result<f64> {
    let closed = count(curve, r, s, Quadrant::Nonnegative)? as f64;
    let open = count(curve, r, s, Quadrant::Positive)? as f64;
    Ok(closed - open - r * (curve.x_intercept() / s + s * curve.y_intercept()))
}

/// Curves for which membership reduces to polynomial inequalities in `r²`
/// and `s²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactShape {
    /// `js + k/s ≤ r`  ⇔  `(j s² + k)² ≤ r² s²`.
    Diamond,
    /// `(js)² + (k/s)² ≤ r²`  ⇔  `j² s⁴ + k² ≤ r² s²`.
    Circle,
    /// `js ≤ r` and `k/s ≤ r`.
    Square,
}

/// Exact count when `r²` and `s²` are rational, as for `s = √2`.
pub fn count_exact(
    shape: ExactShape,
    r_squared: &BigRational,
    s_squared: &BigRational,
    mode: Quadrant,
) -> u64 {
    assert!(
        r_squared > &BigRational::zero() && s_squared > &BigRational::zero(),
        "r² and s² must be positive"
    );
    let rs2 = r_squared * s_squared;
    let inside = |j: u64, k: u64| -> bool {
        let j = BigRational::from_integer(BigInt::from(j));
        let k = BigRational::from_integer(BigInt::from(k));
        match shape {
            ExactShape::Diamond => {
                let lhs = &j * s_squared + &k;
                &lhs * &lhs <= rs2
            }
            ExactShape::Circle => &j * &j * s_squared * s_squared + &k * &k <= rs2,
            ExactShape::Square => &j * &j * s_squared <= *r_squared && &k * &k <= rs2,
        }
    };
    let r = r_squared.to_f64().unwrap_or(f64::MAX).sqrt();
    let s = s_squared.to_f64().unwrap_or(f64::MAX).sqrt();
    let curve = match shape {
        ExactShape::Diamond => Curve::diamond(),
        ExactShape::Circle => Curve::pcircle(2.0).expect("valid exponent"),
        ExactShape::Square => Curve::square(),
    };
    let first = match mode {
        Quadrant::Positive => 1,
        Quadrant::Nonnegative => 0,
    };
    let mut total = 0;
    let mut j = first;
    while inside(j, 0) {
        // Float estimate, then exact correction in both directions.
        let mut k = (r * s * curve.f(j as f64 * s / r)).floor().max(0.0) as u64;
        while inside(j, k + 1) {
            k += 1;
        }
        while k > 0 && !inside(j, k) {
            k -= 1;
        }
        total += k + 1 - first;
        j += 1;
    }
    total
}
