//! Rectangle eigenvalues as lattice counts.
//!
//! The Dirichlet levels `(js)² + (k/s)²`, `j, k ≥ 1`, satisfy
//! `#{m : λ_m(s) ≤ E} = N(√E, s)` for the quarter disk; the Neumann levels
//! allow `j, k ≥ 0` and are counted by `𝒩`. The oscillator levels
//! `s(j − ½) + (k − ½)/s` are counted by the shifted sweep.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::sweep::{Interval, Sweep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    DirichletMin,
    NeumannMax,
    OscillatorMin,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::DirichletMin => "dirichlet_min",
            Problem::NeumannMax => "neumann_max",
            Problem::OscillatorMin => "oscillator_min",
        }
    }

    /// Two-term prediction for the optimised eigenvalue, when one is known.
    pub fn asymptotic(self, n: u64) -> Option<f64> {
        let n = n as f64;
        let c = 4.0 / std::f64::consts::PI;
        match self {
            Problem::DirichletMin => Some(c * n + c.powf(1.5) * n.sqrt()),
            Problem::NeumannMax => Some(c * n - c.powf(1.5) * n.sqrt()),
            Problem::OscillatorMin => None,
        }
    }
}

impl std::str::FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Problem> {
        match s {
            "dirichlet" | "dirichlet_min" => Ok(Problem::DirichletMin),
            "neumann" | "neumann_max" => Ok(Problem::NeumannMax),
            "oscillator" | "oscillator_min" => Ok(Problem::OscillatorMin),
            _ => Err(Error::InvalidParameter(format!(
                "unknown eigenvalue problem {s:?}"
            ))),
        }
    }
}

/// An eigenvalue optimised over the stretch factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub n: u64,
    pub value: f64,
    /// Optimal stretch factors, disjoint and increasing.
    pub s_set: Vec<Interval>,
    pub problem: Problem,
    /// Every `s` is optimal (only `μ₁ ≡ 0`).
    pub degenerate: bool,
}

impl EigenResult {
    pub fn sup_s(&self) -> Option<f64> {
        self.s_set.last().map(|i| i.hi)
    }

    /// `(value − prediction) / n^{1/3}`.
    pub fn scaled_residual(&self) -> Option<f64> {
        self.problem
            .asymptotic(self.n)
            .map(|a| (self.value - a) / (self.n as f64).cbrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Spectrum {
    Dirichlet,
    Neumann,
    Oscillator,
}

impl Spectrum {
    fn first(self) -> u64 {
        match self {
            Spectrum::Neumann => 0,
            _ => 1,
        }
    }

    fn level(self, j: u64, k: u64, t: f64) -> f64 {
        match self {
            Spectrum::Dirichlet | Spectrum::Neumann => {
                let a = j as f64 * t;
                let b = k as f64 / t;
                a * a + b * b
            }
            Spectrum::Oscillator => (j as f64 - 0.5) * t + (k as f64 - 0.5) / t,
        }
    }

    /// Largest `k` in column `j` whose level is at most `e`.
    fn top(self, j: u64, e: f64, t: f64) -> Option<u64> {
        let k0 = self.first();
        if self.level(j, k0, t) > e {
            return None;
        }
        let guess = match self {
            Spectrum::Dirichlet | Spectrum::Neumann => {
                let a = j as f64 * t;
                t * (e - a * a).max(0.0).sqrt()
            }
            Spectrum::Oscillator => t * (e - (j as f64 - 0.5) * t) + 0.5,
        };
        let mut k = (guess.floor().max(k0 as f64) as u64).max(k0);
        while k > k0 && self.level(j, k, t) > e {
            k -= 1;
        }
        while self.level(j, k + 1, t) <= e {
            k += 1;
        }
        Some(k)
    }

    /// `#{levels ≤ e}` with multiplicity.
    fn count(self, e: f64, t: f64) -> u64 {
        let first = self.first();
        let mut total = 0;
        let mut j = first;
        while let Some(k) = self.top(j, e, t) {
            total += k - first + 1;
            j += 1;
        }
        total
    }

    fn nth(self, n: u64, s: f64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "eigenvalue index starts at 1".into(),
            ));
        }
        ensure_positive("s", s)?;
        // The spectrum is invariant under s ↦ 1/s; t ≥ 1 keeps columns few.
        let t = if s >= 1.0 { s } else { 1.0 / s };
        let (mut lo, mut count_lo) = (-1.0, 0);
        let mut hi = 1.0;
        let mut count_hi = self.count(hi, t);
        while count_hi < n {
            lo = hi;
            count_lo = count_hi;
            hi *= 2.0;
            count_hi = self.count(hi, t);
        }
        while count_hi - count_lo > 64 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let c = self.count(mid, t);
            if c >= n {
                hi = mid;
                count_hi = c;
            } else {
                lo = mid;
                count_lo = c;
            }
        }
        let first = self.first();
        let mut band = Vec::with_capacity((count_hi - count_lo) as usize);
        let mut j = first;
        while let Some(k_hi) = self.top(j, hi, t) {
            let k_lo = self.top(j, lo, t).map_or(first, |k| k + 1);
            band.extend((k_lo..=k_hi).map(|k| self.level(j, k, t)));
            j += 1;
        }
        band.sort_unstable_by(f64::total_cmp);
        Ok(band[(n - count_lo - 1) as usize])
    }
}

/// `λ_n(s)`: the `n`-th smallest `(js)² + (k/s)²`, `j, k ≥ 1`, with multiplicity.
pub fn dirichlet_eigenvalue(n: u64, s: f64) -> Result<f64> {
    Spectrum::Dirichlet.nth(n, s)
}

/// `μ_n(s)`: as above with `j, k ≥ 0`, so `μ₁ = 0`.
pub fn neumann_eigenvalue(n: u64, s: f64) -> Result<f64> {
    Spectrum::Neumann.nth(n, s)
}

/// `ω_n(s)`: the `n`-th smallest `s(j − ½) + (k − ½)/s`, `j, k ≥ 1`.
pub fn oscillator_eigenvalue(n: u64, s: f64) -> Result<f64> {
    Spectrum::Oscillator.nth(n, s)
}

/// Number of levels at most `e`.
pub fn dirichlet_count(e: f64, s: f64) -> Result<u64> {
    ensure_positive("s", s)?;
    Ok(Spectrum::Dirichlet.count(e, if s >= 1.0 { s } else { 1.0 / s }))
}

const MAX_BISECTIONS: usize = 200;

/// Optimal sets are read off at a radius this far (relatively) past the
/// critical one. At the critical radius itself the windows are a few ulps
/// wide, below the sweep's tie tolerance; the margin turns them into an
/// outer approximation of width about `1e-10`.
pub const SET_MARGIN: f64 = 1e-10;

/// Shrinks `[lo, hi]` with `!ok(lo)` and `ok(hi)` to adjacent floats, up to
/// a relative width of a few ulps.
fn bisect(mut lo: f64, mut hi: f64, mut ok: impl FnMut(f64) -> Result<bool>) -> Result<(f64, f64)> {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok((lo, hi));
        }
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::Bisection {
        iterations: MAX_BISECTIONS,
        lo,
        hi,
    })
}

/// Moves `x` by factors of `1 ± step` until `ok(x)` equals `want`.
fn push_until(
    mut x: f64,
    step: f64,
    want: bool,
    mut ok: impl FnMut(f64) -> Result<bool>,
) -> Result<f64> {
    for _ in 0..MAX_BISECTIONS {
        if ok(x)? == want {
            return Ok(x);
        }
        x *= if want { 1.0 + step } else { 1.0 - step };
    }
    Err(Error::Bisection {
        iterations: MAX_BISECTIONS,
        lo: x,
        hi: x,
    })
}

fn ensure_index(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter(
            "eigenvalue index starts at 1".into(),
        ))
    } else {
        Ok(())
    }
}

/// `min_s λ_n(s)`. With `r_n = inf{r : max_s N(r, s) ≥ n}` the minimum is
/// `r_n²`, attained exactly where `N(r_n, s) ≥ n`.
pub fn minimize_dirichlet(n: u64) -> Result<EigenResult> {
    ensure_index(n)?;
    let sweep = Sweep::lame(2.0)?;
    let reaches = |r: f64| Ok(sweep.maximize(r)?.extremal_count >= n);
    // N(r, s) < πr²/4 for every s.
    let lo = push_until(
        (4.0 * n as f64 / std::f64::consts::PI).sqrt(),
        1e-9,
        false,
        reaches,
    )?;
    let hi = push_until(
        dirichlet_eigenvalue(n, 1.0)?.sqrt() * (1.0 + 1e-12),
        1e-12,
        true,
        reaches,
    )?;
    let (_, hi) = bisect(lo, hi, reaches)?;
    Ok(EigenResult {
        n,
        value: hi * hi,
        s_set: sweep.superlevel(hi * (1.0 + SET_MARGIN), n)?,
        problem: Problem::DirichletMin,
        degenerate: false,
    })
}

/// `max_s μ_n(s)`. With `R = inf{r : min_s 𝒩(r, s) ≥ n}` the maximum is
/// `R²`, attained where `𝒩(r, s) < n` for all `r < R`.
pub fn maximize_neumann(n: u64) -> Result<EigenResult> {
    ensure_index(n)?;
    if n == 1 {
        return Ok(EigenResult {
            n,
            value: 0.0,
            s_set: vec![Interval::open(0.0, f64::INFINITY)],
            problem: Problem::NeumannMax,
            degenerate: true,
        });
    }
    let sweep = Sweep::lame(2.0)?;
    let covers = |r: f64| Ok(sweep.minimize_nonneg(r)?.extremal_count >= n);
    // 𝒩(r, s) ≥ πr²/4 for every s.
    let hi = push_until(
        (4.0 * n as f64 / std::f64::consts::PI).sqrt(),
        1e-9,
        true,
        covers,
    )?;
    let lo = push_until(
        neumann_eigenvalue(n, 1.0)?.sqrt() * (1.0 - 1e-8),
        1e-8,
        false,
        covers,
    )?;
    let (lo, hi) = bisect(lo, hi, covers)?;
    Ok(EigenResult {
        n,
        value: hi * hi,
        s_set: sweep.sublevel_nonneg(lo * (1.0 - SET_MARGIN), n)?,
        problem: Problem::NeumannMax,
        degenerate: false,
    })
}

/// `min_s ω_n(s)`, by the same duality on the shifted lattice.
pub fn minimize_oscillator(n: u64) -> Result<EigenResult> {
    ensure_index(n)?;
    let sweep = Sweep::oscillator();
    let reaches = |e: f64| Ok(sweep.maximize(e)?.extremal_count >= n);
    // Every level is at least 1.
    let lo = 0.5;
    let hi = push_until(
        oscillator_eigenvalue(n, 1.0)? * (1.0 + 1e-12),
        1e-12,
        true,
        reaches,
    )?;
    let (_, hi) = bisect(lo, hi, reaches)?;
    Ok(EigenResult {
        n,
        value: hi,
        s_set: sweep.superlevel(hi * (1.0 + SET_MARGIN), n)?,
        problem: Problem::OscillatorMin,
        degenerate: false,
    })
}

pub fn optimize(problem: Problem, n: u64) -> Result<EigenResult> {
    match problem {
        Problem::DirichletMin => minimize_dirichlet(n),
        Problem::NeumannMax => maximize_neumann(n),
        Problem::OscillatorMin => minimize_oscillator(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{count, Quadrant};
    use crate::curves::Curve;
    use proptest::prelude::*;

    fn brute_levels(spec: Spectrum, s: f64, size: u64) -> Vec<f64> {
        let first = spec.first();
        let mut v = Vec::new();
        for j in first..first + size {
            for k in first..first + size {
                v.push(match spec {
                    Spectrum::Oscillator => s * (j as f64 - 0.5) + (k as f64 - 0.5) / s,
                    _ => (j as f64 * s).powi(2) + (k as f64 / s).powi(2),
                });
            }
        }
        v.sort_by(f64::total_cmp);
        v
    }

    /// Extremum of the n-th level over s, taken over branch extrema and
    /// pairwise branch crossings. Returns the value and every candidate s
    /// attaining it.
    fn crossing_oracle(spec: Spectrum, n: usize, maximize: bool, cap: f64) -> (f64, Vec<f64>) {
        let first = spec.first();
        let coords = |i: u64| match spec {
            Spectrum::Oscillator => i as f64 - 0.5,
            _ => i as f64,
        };
        let branch = |a: f64, b: f64, s: f64| match spec {
            Spectrum::Oscillator => a * s + b / s,
            _ => (a * s).powi(2) + (b / s).powi(2),
        };
        let limit = 80u64;
        let mut branches = Vec::new();
        for j in first..limit {
            for k in first..limit {
                let (a, b) = (coords(j), coords(k));
                let floor = match spec {
                    Spectrum::Oscillator => 2.0 * (a * b).sqrt(),
                    _ => 2.0 * a * b,
                };
                if floor <= cap {
                    branches.push((a, b));
                }
            }
        }
        let mut candidates = Vec::new();
        for &(a, b) in &branches {
            if a > 0.0 && b > 0.0 {
                candidates.push(match spec {
                    Spectrum::Oscillator => (b / a).sqrt(),
                    _ => (b / a).sqrt(),
                });
            }
        }
        for (i, &(a1, b1)) in branches.iter().enumerate() {
            for &(a2, b2) in &branches[i + 1..] {
                let ratio = match spec {
                    Spectrum::Oscillator => (b2 - b1) / (a1 - a2),
                    _ => (b2 * b2 - b1 * b1) / (a1 * a1 - a2 * a2),
                };
                if !(ratio > 0.0 && ratio.is_finite()) {
                    continue;
                }
                let s = match spec {
                    Spectrum::Oscillator => ratio.sqrt(),
                    _ => ratio.sqrt().sqrt(),
                };
                if branch(a1, b1, s) <= cap {
                    candidates.push(s);
                }
            }
        }
        let values: Vec<(f64, f64)> = candidates
            .iter()
            .map(|&s| (s, spec.nth(n as u64, s).unwrap()))
            .collect();
        let best = values.iter().map(|v| v.1).fold(
            if maximize {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            },
            |a, b| if maximize { a.max(b) } else { a.min(b) },
        );
        let argbest = values
            .iter()
            .filter(|v| (v.1 - best).abs() <= 1e-10 * best.max(1.0))
            .map(|v| v.0)
            .collect();
        (best, argbest)
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(dirichlet_eigenvalue(1, 1.0).unwrap(), 2.0);
        assert_eq!(dirichlet_eigenvalue(3, 1.0).unwrap(), 5.0);
        assert_eq!(dirichlet_eigenvalue(4, 1.0).unwrap(), 8.0);
        for s in [0.3, 0.9, 1.7, 4.0] {
            let v = dirichlet_eigenvalue(1, s).unwrap();
            assert!((v - (s * s + 1.0 / (s * s))).abs() < 1e-12);
            assert!(v >= 2.0);
            assert_eq!(neumann_eigenvalue(1, s).unwrap(), 0.0);
            let m2 = neumann_eigenvalue(2, s).unwrap();
            assert!((m2 - (s * s).min(1.0 / (s * s))).abs() < 1e-12);
        }
        assert_eq!(neumann_eigenvalue(2, 1.0).unwrap(), 1.0);
        assert_eq!(oscillator_eigenvalue(1, 1.0).unwrap(), 1.0);
        assert_eq!(oscillator_eigenvalue(2, 1.0).unwrap(), 2.0);
        assert_eq!(oscillator_eigenvalue(3, 1.0).unwrap(), 2.0);
        assert_eq!(oscillator_eigenvalue(4, 1.0).unwrap(), 3.0);
        assert!(dirichlet_eigenvalue(0, 1.0).is_err());
        assert!(dirichlet_eigenvalue(1, 0.0).is_err());
    }

    #[test]
    fn large_index_is_cheap() {
        let v = dirichlet_eigenvalue(100_000, 1.0).unwrap();
        let c = 4.0 / std::f64::consts::PI;
        assert!((v - c * 1e5).abs() < 3.0 * c.powf(1.5) * 1e5f64.sqrt());
    }

    #[test]
    fn minimize_examples() {
        let one = minimize_dirichlet(1).unwrap();
        assert!((one.value - 2.0).abs() < 1e-12);
        assert!(one.s_set.iter().any(|i| i.contains_within(1.0, 1e-12)));
        let three = minimize_dirichlet(3).unwrap();
        assert!(three.value <= 5.0);
        let n1 = maximize_neumann(1).unwrap();
        assert!(n1.degenerate && n1.value == 0.0 && n1.s_set[0].contains(1e-300));
        let n2 = maximize_neumann(2).unwrap();
        assert!((n2.value - 1.0).abs() < 1e-12, "{n2:?}");
        assert!(n2.s_set.iter().any(|i| i.contains_within(1.0, 1e-12)));
        let o1 = minimize_oscillator(1).unwrap();
        assert!((o1.value - 1.0).abs() < 1e-12);
        assert!(minimize_dirichlet(0).is_err());
    }

    #[test]
    fn dirichlet_matches_crossing_oracle() {
        let mut previous = 0.0;
        for n in 1..=60 {
            let res = minimize_dirichlet(n).unwrap();
            let cap = dirichlet_eigenvalue(n, 1.0).unwrap();
            let (best, args) = crossing_oracle(Spectrum::Dirichlet, n as usize, false, cap);
            assert!(
                (res.value - best).abs() <= 1e-8 * best,
                "n={n}: {} vs {best}",
                res.value
            );
            assert!(res.value <= cap * (1.0 + 1e-12) && res.value >= 2.0 - 1e-12);
            assert!(res.value >= previous - 1e-9);
            previous = res.value;
            for s in args {
                assert!(
                    res.s_set.iter().any(|i| i.contains_within(s, 1e-12)),
                    "n={n} s={s} {:?}",
                    res.s_set
                );
            }
        }
    }

    #[test]
    fn neumann_matches_crossing_oracle() {
        for n in 2..=30 {
            let res = maximize_neumann(n).unwrap();
            let cap = 4.0 * n as f64 / std::f64::consts::PI + 1.0;
            let (best, args) = crossing_oracle(Spectrum::Neumann, n as usize, true, cap);
            assert!(
                (res.value - best).abs() <= 1e-8 * best,
                "n={n}: {} vs {best}",
                res.value
            );
            for s in args {
                assert!(
                    res.s_set.iter().any(|i| i.contains_within(s, 1e-12)),
                    "n={n} s={s} {:?}",
                    res.s_set
                );
            }
        }
    }

    #[test]
    fn oscillator_matches_crossing_oracle() {
        for n in 1..=50 {
            let res = minimize_oscillator(n).unwrap();
            let cap = oscillator_eigenvalue(n, 1.0).unwrap();
            let (best, _) = crossing_oracle(Spectrum::Oscillator, n as usize, false, cap);
            assert!(
                (res.value - best).abs() <= 1e-8 * best,
                "n={n}: {} vs {best}",
                res.value
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn nth_matches_enumeration(s in 0.4f64..2.5, n in 1u64..300) {
            for spec in [Spectrum::Dirichlet, Spectrum::Neumann, Spectrum::Oscillator] {
                let brute = brute_levels(spec, s, 60);
                let got = spec.nth(n, s).unwrap();
                prop_assert!((got - brute[(n - 1) as usize]).abs() <= 1e-12 * got.max(1.0));
            }
        }

        #[test]
        fn duality_with_counting(s in 0.2f64..5.0, n in 1u64..400) {
            let circle = Curve::pcircle(2.0).unwrap();
            let e = dirichlet_eigenvalue(n, s).unwrap() + 1e-9;
            let by_levels = dirichlet_count(e, s).unwrap();
            prop_assert!(n <= by_levels);
            prop_assert_eq!(by_levels, count(&circle, e.sqrt(), s, Quadrant::Positive).unwrap());
            let m = neumann_eigenvalue(n, s).unwrap() + 1e-9;
            let closed = Spectrum::Neumann.count(m, s.max(1.0 / s));
            prop_assert_eq!(closed, count(&circle, m.sqrt(), s, Quadrant::Nonnegative).unwrap());
        }

        #[test]
        fn reciprocal_symmetry(s in 0.05f64..20.0, n in 1u64..2000) {
            // 1/(1/s) need not round back to s, so allow a few ulps.
            for spec in [Spectrum::Dirichlet, Spectrum::Neumann, Spectrum::Oscillator] {
                let (a, b) = (spec.nth(n, s).unwrap(), spec.nth(n, 1.0 / s).unwrap());
                prop_assert!((a - b).abs() <= 1e-13 * a.max(1.0), "{} {}", a, b);
            }
        }
    }
}
