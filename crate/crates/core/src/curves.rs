//! Concave, strictly decreasing curves in the first quadrant.
//!
//! A [`Curve`] is the graph `y = f(x)` on `[0, L]` with `f(0) = M` and
//! `f(L) = 0`, together with its inverse `x = g(y)` on `[0, M]`. Estimates
//! split the curve at a point `(α, β)` on it (the *corner*), and need
//! partitions `0 = α₀ < … < α_l = α` and `0 = β₀ < … < β_ℓ = β` on whose
//! pieces the second derivatives are monotone.
//!
//! Value evaluators (`f`, `g`) are total: arguments are clamped to the
//! domain. Derivative evaluators are only defined on the open interval and
//! return [`Error::Domain`] at or beyond the endpoints, where they may blow
//! up.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::quadrature;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    /// `p = 1`: the segment `x + y = 1`.
    Diamond,
    /// `|x|^p + |y|^p = 1` with `1 < p < ∞`.
    PCircle(f64),
    /// `p = ∞`: the boundary of the unit square, `f ≡ 1` on `[0, 1]`.
    Square,
    /// A user curve given by sampled values and derivatives.
    Sampled(SampledCurve),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    kind: CurveKind,
    x_intercept: f64,
    y_intercept: f64,
    corner: (f64, f64),
    partition_f: Vec<f64>,
    partition_g: Vec<f64>,
}

impl Curve {
    /// The `p`-circle `|x|^p + |y|^p = 1` for `1 < p < ∞`, or the square for
    /// `p = ∞`. The diamond `p = 1` has its own constructor, [`Curve::diamond`].
    pub fn pcircle(p: f64) -> Result<Curve> {
        if p == f64::INFINITY {
            return Ok(Curve::square());
        }
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "p-circle exponent must lie in (1, ∞]; got {p}"
            )));
        }
        let a = 2f64.powf(-1.0 / p);
        let mut partition = vec![0.0];
        if let Some(x) = pcircle_inflection_of_curvature(p, a)? {
            partition.push(x);
        }
        partition.push(a);
        Ok(Curve {
            kind: CurveKind::PCircle(p),
            x_intercept: 1.0,
            y_intercept: 1.0,
            corner: (a, a),
            partition_g: partition.clone(),
            partition_f: partition,
        })
    }

    pub fn diamond() -> Curve {
        Curve {
            kind: CurveKind::Diamond,
            x_intercept: 1.0,
            y_intercept: 1.0,
            corner: (0.5, 0.5),
            partition_f: vec![0.0, 0.5],
            partition_g: vec![0.0, 0.5],
        }
    }

    pub fn square() -> Curve {
        Curve {
            kind: CurveKind::Square,
            x_intercept: 1.0,
            y_intercept: 1.0,
            corner: (1.0, 1.0),
            partition_f: vec![0.0, 1.0],
            partition_g: vec![0.0, 1.0],
        }
    }

    /// Any member of the Lamé family, `1 ≤ p ≤ ∞`.
    pub fn lame(p: f64) -> Result<Curve> {
        if p == 1.0 {
            Ok(Curve::diamond())
        } else {
            Curve::pcircle(p)
        }
    }

    pub fn from_spec(spec: &CurveSpec) -> Result<Curve> {
        match spec {
            CurveSpec::Pcircle { p } => Curve::lame(p.value()?),
            CurveSpec::Custom(table) => Curve::from_samples(table),
        }
    }

    pub fn from_json(text: &str) -> Result<Curve> {
        let spec: CurveSpec = serde_json::from_str(text)?;
        Curve::from_spec(&spec)
    }

    pub fn from_samples(spec: &SampledSpec) -> Result<Curve> {
        let table = SampledCurve::new(spec)?;
        let l = *table.x.last().expect("validated non-empty");
        let m = table.value[0];
        let corner = match spec.corner {
            Some((a, b)) => (a, b),
            None => {
                // Where the ray towards (L, M) meets the curve.
                let (mut lo, mut hi) = (0.0, l);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if table.value_at(mid) * l > mid * m {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let a = 0.5 * (lo + hi);
                (a, table.value_at(a))
            }
        };
        let partition_f = spec
            .partition_f
            .clone()
            .unwrap_or_else(|| vec![0.0, corner.0]);
        let partition_g = spec
            .partition_g
            .clone()
            .unwrap_or_else(|| vec![0.0, corner.1]);
        let curve = Curve {
            kind: CurveKind::Sampled(table),
            x_intercept: l,
            y_intercept: m,
            corner,
            partition_f,
            partition_g,
        };
        curve.validate_partitions()?;
        curve.check_shape(400)?;
        Ok(curve)
    }

    fn validate_partitions(&self) -> Result<()> {
        for (name, part, end) in [
            ("partition_f", &self.partition_f, self.corner.0),
            ("partition_g", &self.partition_g, self.corner.1),
        ] {
            let ok = part.len() >= 2
                && part[0] == 0.0
                && part.windows(2).all(|w| w[0] < w[1])
                && (part[part.len() - 1] - end).abs() <= 1e-9 * (1.0 + end.abs());
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "{name} must increase strictly from 0 to the corner coordinate {end}; got {part:?}"
                )));
            }
        }
        let (a, b) = self.corner;
        if !(a > 0.0 && a < self.x_intercept && b > 0.0 && b < self.y_intercept) {
            return Err(Error::InvalidParameter(format!(
                "corner ({a}, {b}) must lie strictly inside the quadrant under the curve's intercepts"
            )));
        }
        if (self.f(a) - b).abs() > 1e-9 * (1.0 + b) {
            return Err(Error::InvalidParameter(format!(
                "corner ({a}, {b}) is not on the curve: f({a}) = {}",
                self.f(a)
            )));
        }
        Ok(())
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    /// The Lamé exponent, when the curve belongs to that family.
    pub fn exponent(&self) -> Option<f64> {
        match self.kind {
            CurveKind::Diamond => Some(1.0),
            CurveKind::PCircle(p) => Some(p),
            CurveKind::Square => Some(f64::INFINITY),
            CurveKind::Sampled(_) => None,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            CurveKind::Diamond => "pcircle(p=1)".into(),
            CurveKind::PCircle(p) => format!("pcircle(p={p})"),
            CurveKind::Square => "pcircle(p=inf)".into(),
            CurveKind::Sampled(t) => format!("custom({} samples)", t.x.len()),
        }
    }

    /// `L`, where `f(L) = 0`.
    pub fn x_intercept(&self) -> f64 {
        self.x_intercept
    }

    /// `M = f(0)`.
    pub fn y_intercept(&self) -> f64 {
        self.y_intercept
    }

    /// The split point `(α, β)`.
    pub fn corner(&self) -> (f64, f64) {
        self.corner
    }

    pub fn partition_f(&self) -> &[f64] {
        &self.partition_f
    }

    pub fn partition_g(&self) -> &[f64] {
        &self.partition_g
    }

    /// `f(x)`, clamped: `M` for `x ≤ 0` and `0` for `x ≥ L` (the square keeps
    /// its top edge up to and including `x = 1`).
    pub fn f(&self, x: f64) -> f64 {
        match &self.kind {
            CurveKind::Diamond => (1.0 - x).clamp(0.0, 1.0),
            CurveKind::PCircle(p) => {
                if x <= 0.0 {
                    1.0
                } else if x >= 1.0 {
                    0.0
                } else {
                    (1.0 - x.powf(*p)).powf(1.0 / p)
                }
            }
            CurveKind::Square => {
                if x <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            CurveKind::Sampled(t) => t.value_at(x),
        }
    }

    pub fn df(&self, x: f64) -> Result<f64> {
        self.interior("f'", x, self.x_intercept)?;
        Ok(match &self.kind {
            CurveKind::Diamond => -1.0,
            CurveKind::PCircle(p) => pcircle_d1(*p, x),
            CurveKind::Square => 0.0,
            CurveKind::Sampled(t) => t.slope_at(x),
        })
    }

    pub fn d2f(&self, x: f64) -> Result<f64> {
        self.interior("f''", x, self.x_intercept)?;
        Ok(match &self.kind {
            CurveKind::Diamond | CurveKind::Square => 0.0,
            CurveKind::PCircle(p) => pcircle_d2(*p, x),
            CurveKind::Sampled(t) => t.curvature_at(x),
        })
    }

    /// `g(y)`, the inverse of `f`, clamped like [`Curve::f`].
    pub fn g(&self, y: f64) -> f64 {
        match &self.kind {
            CurveKind::Sampled(t) => t.inverse_at(y),
            _ => self.f(y),
        }
    }

    pub fn dg(&self, y: f64) -> Result<f64> {
        match &self.kind {
            CurveKind::Sampled(t) => {
                self.interior("g'", y, self.y_intercept)?;
                Ok(1.0 / t.slope_at(t.inverse_at(y)))
            }
            _ => self.df(y).map_err(|e| rename(e, "g'")),
        }
    }

    pub fn d2g(&self, y: f64) -> Result<f64> {
        match &self.kind {
            CurveKind::Sampled(t) => {
                self.interior("g''", y, self.y_intercept)?;
                let x = t.inverse_at(y);
                let d1 = t.slope_at(x);
                Ok(-t.curvature_at(x) / (d1 * d1 * d1))
            }
            _ => self.d2f(y).map_err(|e| rename(e, "g''")),
        }
    }

    fn interior(&self, what: &'static str, at: f64, end: f64) -> Result<()> {
        if at > 0.0 && at < end {
            Ok(())
        } else {
            Err(Error::Domain { what, at, end })
        }
    }

    /// Checks strict decrease, midpoint concavity, `g ∘ f ≈ id` and
    /// `f(α) = β` on `samples` evenly spaced points.
    pub fn check_shape(&self, samples: usize) -> Result<()> {
        let l = self.x_intercept;
        let xs: Vec<f64> = (0..=samples)
            .map(|i| l * i as f64 / samples as f64)
            .collect();
        for w in xs.windows(2) {
            let (f0, f1) = (self.f(w[0]), self.f(w[1]));
            if f0 <= f1 {
                return Err(Error::Precondition {
                    reason: "curve is not strictly decreasing".into(),
                    witness: w[1],
                });
            }
            let mid = self.f(0.5 * (w[0] + w[1]));
            if mid < 0.5 * (f0 + f1) - 1e-12 {
                return Err(Error::Precondition {
                    reason: "curve is not concave".into(),
                    witness: 0.5 * (w[0] + w[1]),
                });
            }
        }
        for &x in &xs {
            let back = self.g(self.f(x));
            if (back - x).abs() > 1e-7 * (1.0 + l) {
                return Err(Error::Precondition {
                    reason: format!("g does not invert f (g(f(x)) = {back})"),
                    witness: x,
                });
            }
        }
        let (a, b) = self.corner;
        if (self.f(a) - b).abs() > 1e-9 * (1.0 + b) {
            return Err(Error::Precondition {
                reason: "corner is not on the curve".into(),
                witness: a,
            });
        }
        Ok(())
    }
}

fn rename(err: Error, what: &'static str) -> Error {
    match err {
        Error::Domain { at, end, .. } => Error::Domain { what, at, end },
        other => other,
    }
}

fn pcircle_d1(p: f64, x: f64) -> f64 {
    -x.powf(p - 1.0) * (1.0 - x.powf(p)).powf(-1.0 + 1.0 / p)
}

fn pcircle_d2(p: f64, x: f64) -> f64 {
    -(p - 1.0) * x.powf(p - 2.0) * (1.0 - x.powf(p)).powf(-2.0 + 1.0 / p)
}

fn pcircle_d3(p: f64, x: f64) -> f64 {
    let xp = x.powf(p);
    -(p - 1.0) * x.powf(p - 3.0) * (1.0 - xp).powf(-3.0 + 1.0 / p) * ((1.0 + p) * xp + p - 2.0)
}

/// The sign change of `f'''` inside `(0, α)`, if any. There is at most one.
fn pcircle_inflection_of_curvature(p: f64, alpha: f64) -> Result<Option<f64>> {
    let mut lo = alpha * 1e-9;
    let mut hi = alpha;
    let s_lo = pcircle_d3(p, lo).signum();
    if s_lo == pcircle_d3(p, hi).signum() {
        return Ok(None);
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            return Ok(Some(0.5 * (lo + hi)));
        }
        let mid = 0.5 * (lo + hi);
        if pcircle_d3(p, mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Bisection {
        iterations: 200,
        lo,
        hi,
    })
}

/// `Area(Γ)`, the area between the curve and the axes.
///
/// Exact for `p ∈ {1, 2, ∞}`; otherwise adaptive quadrature of `∫₀^L f` to
/// relative tolerance `1e-10`.
pub fn quadrant_area(curve: &Curve) -> Result<f64> {
    match curve.kind() {
        CurveKind::Diamond => Ok(0.5),
        CurveKind::Square => Ok(1.0),
        CurveKind::PCircle(p) if *p == 2.0 => Ok(std::f64::consts::FRAC_PI_4),
        _ => {
            let q = quadrature::integrate(|x| curve.f(x), 0.0, curve.x_intercept(), 1e-10, 0.0)?;
            Ok(q.value)
        }
    }
}

/// Sampled description of a custom curve: values and first and second
/// derivatives of `f` at increasing abscissae from `0` to `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSpec {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub d2f: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_f: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_g: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner: Option<(f64, f64)>,
}

/// JSON curve description: `{"kind":"pcircle","p":2.0}` (`p` may be `1` or
/// the string `"inf"`) or `{"kind":"custom", …}` with a [`SampledSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CurveSpec {
    Pcircle { p: Exponent },
    Custom(SampledSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Number(f64),
    Text(String),
}

impl Exponent {
    pub fn value(&self) -> Result<f64> {
        match self {
            Exponent::Number(p) => Ok(*p),
            Exponent::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                other => other
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("unrecognised exponent {t:?}"))),
            },
        }
    }
}

/// Piecewise cubic Hermite interpolant of `f` and `f'`, with `f''` linearly
/// interpolated from its own samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    x: Vec<f64>,
    value: Vec<f64>,
    slope: Vec<f64>,
    curvature: Vec<f64>,
}

impl SampledCurve {
    fn new(spec: &SampledSpec) -> Result<Self> {
        let n = spec.x.len();
        if n < 2 || spec.f.len() != n || spec.df.len() != n || spec.d2f.len() != n {
            return Err(Error::InvalidParameter(
                "custom curve needs at least two samples and equal-length x, f, df, d2f".into(),
            ));
        }
        if spec.x[0] != 0.0 || !spec.x.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "x samples must increase strictly from 0".into(),
            ));
        }
        if spec.f[n - 1] != 0.0 {
            return Err(Error::InvalidParameter(
                "the last sample must be the x-intercept (f = 0)".into(),
            ));
        }
        ensure_positive("f(0)", spec.f[0])?;
        if !spec.f.windows(2).all(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter(
                "f samples must decrease strictly".into(),
            ));
        }
        Ok(SampledCurve {
            x: spec.x.clone(),
            value: spec.f.clone(),
            slope: spec.df.clone(),
            curvature: spec.d2f.clone(),
        })
    }

    fn locate(&self, x: f64) -> (usize, f64, f64) {
        let i = self
            .x
            .partition_point(|&xi| xi <= x)
            .clamp(1, self.x.len() - 1)
            - 1;
        let h = self.x[i + 1] - self.x[i];
        (i, h, ((x - self.x[i]) / h).clamp(0.0, 1.0))
    }

    fn value_at(&self, x: f64) -> f64 {
        let l = self.x[self.x.len() - 1];
        if x <= 0.0 {
            return self.value[0];
        }
        if x >= l {
            return 0.0;
        }
        let (i, h, t) = self.locate(x);
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * self.value[i]
            + (t3 - 2.0 * t2 + t) * h * self.slope[i]
            + (-2.0 * t3 + 3.0 * t2) * self.value[i + 1]
            + (t3 - t2) * h * self.slope[i + 1];
        v.max(0.0)
    }

    fn slope_at(&self, x: f64) -> f64 {
        let (i, h, t) = self.locate(x);
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) / h * self.value[i]
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slope[i]
            + (-6.0 * t2 + 6.0 * t) / h * self.value[i + 1]
            + (3.0 * t2 - 2.0 * t) * self.slope[i + 1]
    }

    fn curvature_at(&self, x: f64) -> f64 {
        let (i, _, t) = self.locate(x);
        (1.0 - t) * self.curvature[i] + t * self.curvature[i + 1]
    }

    fn inverse_at(&self, y: f64) -> f64 {
        let l = self.x[self.x.len() - 1];
        if y <= 0.0 {
            return l;
        }
        if y >= self.value[0] {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, l);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.value_at(mid) > y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * l {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}
