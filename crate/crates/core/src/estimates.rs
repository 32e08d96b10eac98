//! Explicit counting bounds, evaluated numerically.
//!
//! Every bound is reported as a claim `lhs ≤ rhs` in a [`BoundReport`].
//! Curve-dependent constants (areas, curvature integrals, maxima) are
//! computed once per curve by [`CurveBounds`], [`SmoothBound`] and
//! [`GeneralBound`]; the free functions are one-shot conveniences.

use serde::{Deserialize, Serialize};

use crate::counting::{count_unchecked, Quadrant};
use crate::curves::{quadrant_area, Curve};
use crate::error::{ensure_positive, Error, Result};
use crate::quadrature::{integrate, maximize_on_interval};

/// `ψ(x) = x − ⌊x⌋ − ½`.
pub fn sawtooth(x: f64) -> f64 {
    x - x.floor() - 0.5
}

/// `Ψ(t) = ∫₀ᵗ ψ`, which is 1-periodic with values in `[−1/8, 0]`.
pub fn sawtooth_antiderivative(t: f64) -> f64 {
    let u = t - t.floor();
    0.5 * u * (u - 1.0)
}

/// `Σ_{a<n≤b} ψ(h(n))`.
pub fn sawtooth_sum(h: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let first = a.floor() as i64 + 1;
    let last = b.floor() as i64;
    (first..=last).map(|n| sawtooth(h(n as f64))).sum()
}

/// Samples on `[a, b]` used to check that a second derivative keeps one
/// sign and is monotone.
const HYPOTHESIS_SAMPLES: usize = 100;

/// Grid size for maxima of `|h''|^{−1/2}`.
const MAX_GRID: usize = 10_000;

/// Left cut-off for curvature integrals near an intercept. The part over
/// `[0, η]` is replaced by the Hölder bound `η^{2/3}|f'(η)|^{1/3}`.
const ETA: f64 = 1e-8;

fn check_second_derivative(h2: impl Fn(f64) -> f64, a: f64, b: f64, what: &str) -> Result<()> {
    let samples: Vec<(f64, f64)> = (0..HYPOTHESIS_SAMPLES)
        .map(|i| {
            let t = a + (b - a) * i as f64 / (HYPOTHESIS_SAMPLES - 1) as f64;
            (t, h2(t))
        })
        .collect();
    let sign = samples[0].1.signum();
    for &(t, v) in &samples {
        if !v.is_finite() || v == 0.0 || v.signum() != sign {
            return Err(Error::Precondition {
                reason: format!("{what} must be nonzero with one sign"),
                witness: t,
            });
        }
    }
    let slack = |x: f64, y: f64| 1e-9 * (x.abs() + y.abs());
    let rising = samples
        .windows(2)
        .all(|w| w[1].1 >= w[0].1 - slack(w[0].1, w[1].1));
    let falling = samples
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + slack(w[0].1, w[1].1));
    if rising || falling {
        return Ok(());
    }
    let witness = samples
        .windows(3)
        .find(|w| (w[1].1 - w[0].1) * (w[2].1 - w[1].1) < 0.0)
        .map_or(a, |w| w[1].0);
    Err(Error::Precondition {
        reason: format!("{what} must be monotone"),
        witness,
    })
}

/// `6∫ₐᵇ|h''|^{1/3} + 175·max_{[a,b]}|h''|^{−1/2} + 1`, the van der Corput
/// bound on `|Σ_{a<n≤b} ψ(h(n))|` for `h''` monotone and nonzero.
pub fn vdc_bound(h2: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::InvalidParameter(format!(
            "need a ≤ b, got [{a}, {b}]"
        )));
    }
    check_second_derivative(&h2, a, b, "h''")?;
    let integral = integrate(|t| h2(t).abs().cbrt(), a, b, 1e-10, 1e-13)?.value;
    let (_, peak) = maximize_on_interval(|t| h2(t).abs().powf(-0.5), a, b, MAX_GRID);
    Ok(6.0 * integral + 175.0 * peak + 1.0)
}

/// `s + 1/s ≤ 2 + t` forces `|s − 1| ≤ 3√t`; this returns
/// the bound `3√t`.
pub fn balanced_deviation_bound(t: f64) -> Result<f64> {
    if t > 0.0 && t < 1.0 {
        Ok(3.0 * t.sqrt())
    } else {
        Err(Error::InvalidParameter(format!(
            "t must lie in (0, 1), got {t}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub curve: String,
    pub r: f64,
    pub s: f64,
    /// Further evaluated quantities, such as `δ(r)`.
    pub aux: Vec<(String, f64)>,
}

/// One evaluated inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub inputs: BoundInputs,
}

impl BoundReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, inputs: BoundInputs) -> BoundReport {
        let slack = rhs - lhs;
        BoundReport {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            holds: slack >= -1e-9 * (1.0 + rhs.abs()),
            inputs,
        }
    }
}

fn inputs(curve: &Curve, r: f64, s: f64) -> BoundInputs {
    BoundInputs {
        curve: curve.name(),
        r,
        s,
        aux: Vec::new(),
    }
}

/// `r²Area − r(L/s + sM)/2`, the two-term approximation to `N(r, s)`.
fn two_term(area: f64, curve: &Curve, r: f64, s: f64) -> f64 {
    r * r * area - 0.5 * r * (curve.x_intercept() / s + s * curve.y_intercept())
}

/// The elementary bounds, sharing one area evaluation.
#[derive(Debug, Clone)]
pub struct CurveBounds {
    curve: Curve,
    area: f64,
}

impl CurveBounds {
    pub fn new(curve: &Curve) -> Result<CurveBounds> {
        Ok(CurveBounds {
            curve: curve.clone(),
            area: quadrant_area(curve)?,
        })
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// `C = M − f(L/2)`.
    pub fn upper_constant(&self) -> f64 {
        self.curve.y_intercept() - self.curve.f(0.5 * self.curve.x_intercept())
    }

    /// `𝒞 = M − f(L/4)`.
    pub fn lower_constant(&self) -> f64 {
        self.curve.y_intercept() - self.curve.f(0.25 * self.curve.x_intercept())
    }

    /// `r²Area − r(L/s + sM) − 1 ≤ N(r, s)`.
    pub fn rough_lower(&self, r: f64, s: f64) -> Result<BoundReport> {
        ensure_positive("r", r)?;
        ensure_positive("s", s)?;
        let c = &self.curve;
        let lhs = r * r * self.area - r * (c.x_intercept() / s + s * c.y_intercept()) - 1.0;
        let n = count_unchecked(c, r, s, Quadrant::Positive) as f64;
        Ok(BoundReport::new(
            "rough_lower_bound",
            lhs,
            n,
            inputs(c, r, s),
        ))
    }

    /// `N(r, s) ≤ r²Area − ½Crs`, for `r ≥ s/L`.
    pub fn two_term_upper(&self, r: f64, s: f64) -> Result<BoundReport> {
        ensure_positive("r", r)?;
        ensure_positive("s", s)?;
        let c = &self.curve;
        if r < s / c.x_intercept() {
            return Err(Error::Precondition {
                reason: format!("the upper bound needs r ≥ s/L = {}", s / c.x_intercept()),
                witness: r,
            });
        }
        let n = count_unchecked(c, r, s, Quadrant::Positive) as f64;
        let rhs = r * r * self.area - 0.5 * self.upper_constant() * r * s;
        let mut io = inputs(c, r, s);
        io.aux.push(("C".into(), self.upper_constant()));
        Ok(BoundReport::new("two_term_upper_bound", n, rhs, io))
    }

    /// `r²Area + ½𝒞rs ≤ 𝒩(r, s)`.
    pub fn neumann_lower(&self, r: f64, s: f64) -> Result<BoundReport> {
        ensure_positive("r", r)?;
        ensure_positive("s", s)?;
        let c = &self.curve;
        let lhs = r * r * self.area + 0.5 * self.lower_constant() * r * s;
        let n = count_unchecked(c, r, s, Quadrant::Nonnegative) as f64;
        let mut io = inputs(c, r, s);
        io.aux.push(("C".into(), self.lower_constant()));
        Ok(BoundReport::new("neumann_lower_bound", lhs, n, io))
    }
}

pub fn rough_lower_bound(curve: &Curve, r: f64, s: f64) -> Result<BoundReport> {
    CurveBounds::new(curve)?.rough_lower(r, s)
}

pub fn two_term_upper_bound(curve: &Curve, r: f64, s: f64) -> Result<BoundReport> {
    CurveBounds::new(curve)?.two_term_upper(r, s)
}

pub fn neumann_lower_bound(curve: &Curve, r: f64, s: f64) -> Result<BoundReport> {
    CurveBounds::new(curve)?.neumann_lower(r, s)
}

/// One side of the curve, seen as a graph over its own axis.
struct Side<'a> {
    curve: &'a Curve,
    inverse: bool,
}

impl Side<'_> {
    fn d1(&self, t: f64) -> Result<f64> {
        if self.inverse {
            self.curve.dg(t)
        } else {
            self.curve.df(t)
        }
    }

    fn d2(&self, t: f64) -> Result<f64> {
        if self.inverse {
            self.curve.d2g(t)
        } else {
            self.curve.d2f(t)
        }
    }

    fn d2_or_nan(&self, t: f64) -> f64 {
        self.d2(t).unwrap_or(f64::NAN)
    }

    fn split(&self) -> f64 {
        let (a, b) = self.curve.corner();
        if self.inverse {
            b
        } else {
            a
        }
    }

    fn partition(&self) -> &[f64] {
        if self.inverse {
            self.curve.partition_g()
        } else {
            self.curve.partition_f()
        }
    }

    fn label(&self) -> &'static str {
        if self.inverse {
            "g''"
        } else {
            "f''"
        }
    }

    /// `∫₀^end |h''|^{1/3}`, with the piece over `[0, η]` bounded above.
    fn curvature_integral(&self, end: f64) -> Result<f64> {
        let eta = ETA * end;
        let mut total = 0.0;
        let mut cuts: Vec<f64> = self
            .partition()
            .iter()
            .copied()
            .filter(|&x| x > eta && x < end)
            .collect();
        cuts.insert(0, eta);
        cuts.push(end);
        for w in cuts.windows(2) {
            total += integrate(|t| self.d2_or_nan(t).abs().cbrt(), w[0], w[1], 1e-10, 1e-13)?.value;
        }
        Ok(total + eta.powf(2.0 / 3.0) * self.d1(eta)?.abs().cbrt())
    }

    /// `max |h''|^{−1/2}` over `[η, end]`.
    fn flatness(&self, end: f64) -> f64 {
        maximize_on_interval(
            |t| self.d2_or_nan(t).abs().powf(-0.5),
            ETA * end,
            end,
            MAX_GRID,
        )
        .1
    }
}

/// Constants of the remainder bound for curves whose second derivatives are
/// negative, bounded away from zero and monotone on `[0, α]` and `[0, β]`.
#[derive(Debug, Clone)]
pub struct SmoothBound {
    bounds: CurveBounds,
    curvature: [f64; 2],
    flatness: [f64; 2],
    slope_at_corner: [f64; 2],
}

impl SmoothBound {
    pub fn new(curve: &Curve) -> Result<SmoothBound> {
        let bounds = CurveBounds::new(curve)?;
        let mut curvature = [0.0; 2];
        let mut flatness = [0.0; 2];
        let mut slope_at_corner = [0.0; 2];
        for (i, inverse) in [false, true].into_iter().enumerate() {
            let side = Side { curve, inverse };
            let end = side.split();
            // The second derivative must tend to a finite nonzero limit at the
            // intercept; a vanishing or blowing-up f'' drifts between scales.
            let near = side.d2(1e-12 * end)?;
            let less_near = side.d2(1e-6 * end)?;
            let ratio = near / less_near;
            if !(0.5..=2.0).contains(&ratio) {
                return Err(Error::Precondition {
                    reason: format!("{} must have a finite nonzero limit at 0", side.label()),
                    witness: 1e-12 * end,
                });
            }
            check_second_derivative(|t| side.d2_or_nan(t), ETA * end, end, side.label())?;
            if side.d2(end)? >= 0.0 {
                return Err(Error::Precondition {
                    reason: format!("{} must be negative", side.label()),
                    witness: end,
                });
            }
            curvature[i] = side.curvature_integral(end)?;
            flatness[i] = side.flatness(end);
            slope_at_corner[i] = side.d1(end)?.abs();
        }
        Ok(SmoothBound {
            bounds,
            curvature,
            flatness,
            slope_at_corner,
        })
    }

    pub fn report(&self, r: f64, s: f64) -> Result<BoundReport> {
        ensure_positive("r", r)?;
        ensure_positive("s", s)?;
        let c = &self.bounds.curve;
        let n = count_unchecked(c, r, s, Quadrant::Positive) as f64;
        let lhs = (n - two_term(self.bounds.area, c, r, s)).abs();
        let rhs = 6.0 * r.powf(2.0 / 3.0) * (self.curvature[0] + self.curvature[1])
            + 175.0 * r.sqrt() * (s.powf(-1.5) * self.flatness[0] + s.powf(1.5) * self.flatness[1])
            + 0.25 * (s * s * self.slope_at_corner[0] + self.slope_at_corner[1] / (s * s))
            + 3.0;
        Ok(BoundReport::new(
            "remainder_bound_smooth",
            lhs,
            rhs,
            inputs(c, r, s),
        ))
    }

    /// The `r^{2/3}` coefficient, `6(∫|f''|^{1/3} + ∫|g''|^{1/3})`.
    pub fn leading_coefficient(&self) -> f64 {
        6.0 * (self.curvature[0] + self.curvature[1])
    }
}

pub fn remainder_bound_smooth(curve: &Curve, r: f64, s: f64) -> Result<BoundReport> {
    SmoothBound::new(curve)?.report(r, s)
}

/// `c·r^{−k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn at(&self, r: f64) -> f64 {
        self.coeff * r.powf(-self.exponent)
    }
}

/// Cut-offs `δ(r)`, `ε(r)` and decay exponents for the general bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralCurveParams {
    pub delta: PowerLaw,
    pub epsilon: PowerLaw,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl GeneralCurveParams {
    /// `δ(r) = ε(r) = r^{−1/p}` with every exponent `1/(2p)`.
    pub fn pcircle(p: f64) -> GeneralCurveParams {
        let law = PowerLaw {
            coeff: 1.0,
            exponent: 1.0 / p,
        };
        let a = 1.0 / (2.0 * p);
        GeneralCurveParams {
            delta: law,
            epsilon: law,
            a1: a,
            a2: a,
            b1: a,
            b2: a,
        }
    }

    /// `e = min{1/6, a₁, a₂, b₁, b₂}`.
    pub fn e(&self) -> f64 {
        [1.0 / 6.0, self.a1, self.a2, self.b1, self.b2]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Constants of the remainder bound for piecewise smooth curves.
#[derive(Debug, Clone)]
pub struct GeneralBound {
    bounds: CurveBounds,
    params: GeneralCurveParams,
    curvature: [f64; 2],
    /// `Σ |h''(αᵢ)|^{−1/2}` over partition points.
    partition_flatness: [f64; 2],
    /// `Σ |h'(αᵢ)|`.
    partition_slope: [f64; 2],
    pieces: [usize; 2],
}

impl GeneralBound {
    pub fn new(curve: &Curve, params: GeneralCurveParams) -> Result<GeneralBound> {
        let bounds = CurveBounds::new(curve)?;
        let mut curvature = [0.0; 2];
        let mut partition_flatness = [0.0; 2];
        let mut partition_slope = [0.0; 2];
        let mut pieces = [0; 2];
        for (i, inverse) in [false, true].into_iter().enumerate() {
            let side = Side { curve, inverse };
            let points = side.partition();
            for w in points.windows(2) {
                let width = w[1] - w[0];
                let lo = if w[0] == 0.0 {
                    ETA * w[1]
                } else {
                    w[0] + 1e-9 * width
                };
                check_second_derivative(|t| side.d2_or_nan(t), lo, w[1], side.label())?;
            }
            for &x in &points[1..] {
                partition_flatness[i] += side.d2(x)?.abs().powf(-0.5);
                partition_slope[i] += side.d1(x)?.abs();
            }
            pieces[i] = points.len() - 1;
            curvature[i] = side.curvature_integral(side.split())?;
        }
        Ok(GeneralBound {
            bounds,
            params,
            curvature,
            partition_flatness,
            partition_slope,
            pieces,
        })
    }

    pub fn params(&self) -> &GeneralCurveParams {
        &self.params
    }

    pub fn report(&self, r: f64, s: f64) -> Result<BoundReport> {
        ensure_positive("r", r)?;
        ensure_positive("s", s)?;
        let c = &self.bounds.curve;
        let (alpha, beta) = c.corner();
        let delta = self.params.delta.at(r);
        let epsilon = self.params.epsilon.at(r);
        if !(delta > 0.0 && delta < alpha) {
            return Err(Error::Precondition {
                reason: format!("δ(r) must lie in (0, α = {alpha})"),
                witness: delta,
            });
        }
        if !(epsilon > 0.0 && epsilon < beta) {
            return Err(Error::Precondition {
                reason: format!("ε(r) must lie in (0, β = {beta})"),
                witness: epsilon,
            });
        }
        let n = count_unchecked(c, r, s, Quadrant::Positive) as f64;
        let lhs = (n - two_term(self.bounds.area, c, r, s)).abs();
        let (down, up) = (s.powf(-1.5), s.powf(1.5));
        let rhs = 6.0 * r.powf(2.0 / 3.0) * (self.curvature[0] + self.curvature[1])
            + 175.0
                * r.sqrt()
                * (down * c.d2f(delta)?.abs().powf(-0.5) + up * c.d2g(epsilon)?.abs().powf(-0.5))
            + 350.0
                * r.sqrt()
                * (down * self.partition_flatness[0] + up * self.partition_flatness[1])
            + 0.25 * (s * s * self.partition_slope[0] + self.partition_slope[1] / (s * s))
            + 0.5 * r * (delta / s + s * epsilon)
            + (self.pieces[0] + self.pieces[1] + 1) as f64;
        let mut io = inputs(c, r, s);
        io.aux.push(("delta".into(), delta));
        io.aux.push(("epsilon".into(), epsilon));
        Ok(BoundReport::new("remainder_bound_general", lhs, rhs, io))
    }
}

pub fn remainder_bound_general(
    curve: &Curve,
    r: f64,
    s: f64,
    params: GeneralCurveParams,
) -> Result<BoundReport> {
    GeneralBound::new(curve, params)?.report(r, s)
}
