//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.
//!
//! The rule never evaluates the integrand at interval endpoints, so
//! integrable endpoint singularities are tolerated as long as bisection can
//! isolate them within the subdivision budget.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` until the summed error estimate drops below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    if b < a {
        let q = integrate(f, b, a, rel_tol, abs_tol)?;
        return Ok(Quadrature {
            value: -q.value,
            error: q.error,
        });
    }
    let mut segments = vec![kronrod(&f, a, b)];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature {
                estimate: value,
                error,
            });
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature { value, error });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if segments.len() + 2 > MAX_SEGMENTS || mid <= seg.a || mid >= seg.b {
            segments.push(seg);
            return Err(Error::Quadrature {
                estimate: value,
                error,
            });
        }
        segments.push(kronrod(&f, seg.a, mid));
        segments.push(kronrod(&f, mid, seg.b));
    }
}

/// Maximises `f` over `[a, b]` on a uniform grid of `grid` points, then
/// refines around the best grid point by golden-section search.
pub fn maximize_on_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, grid: usize) -> (f64, f64) {
    let grid = grid.max(2);
    let step = (b - a) / (grid - 1) as f64;
    let mut best = (a, f(a));
    for i in 1..grid {
        let x = if i == grid - 1 {
            b
        } else {
            a + step * i as f64
        };
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let mut lo = (best.0 - step).max(a);
    let mut hi = (best.0 + step).min(b);
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if hi - lo <= 1e-14 * (1.0 + best.0.abs()) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}
