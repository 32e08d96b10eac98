//! Batch drivers: radius scans, the cluster construction, randomised bound
//! audits and eigenvalue tables. All are deterministic in their inputs and
//! return rows in input order whatever the execution mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::counting::{count, Quadrant};
use crate::curves::Curve;
use crate::error::{Error, Result};
use crate::estimates::{BoundReport, CurveBounds, GeneralBound, GeneralCurveParams, SmoothBound};
use crate::parallel::{map_ordered, Execution};
use crate::spectral::{optimize, EigenResult, Problem};
use crate::sweep::{StretchResult, Sweep};

/// Radii `(start + i)·step` for `i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RGrid {
    pub start: u64,
    pub count: usize,
    pub step: f64,
}

/// `√3/10`, irrational so that radii avoid arithmetic coincidences.
pub fn default_step() -> f64 {
    3f64.sqrt() / 10.0
}

impl Default for RGrid {
    /// Multiples 1..=2330 of `√3/10`, reaching `r ≈ 403.6` (`log r ≈ 6`).
    fn default() -> RGrid {
        RGrid {
            start: 1,
            count: 2330,
            step: default_step(),
        }
    }
}

impl RGrid {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter("the radius grid is empty".into()));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid step must be positive, got {}",
                self.step
            )));
        }
        if self.start == 0 {
            return Err(Error::InvalidParameter(
                "grid must start at a positive multiple".into(),
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count as u64)
            .map(|i| (self.start + i) as f64 * self.step)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Maximise `N(r, s)`.
    Max,
    /// Minimise `𝒩(r, s)`.
    Min,
}

/// Optimal stretch factors at every radius of `radii`.
pub fn scan(
    p: f64,
    radii: &[f64],
    objective: Objective,
    execution: Execution,
) -> Result<Vec<StretchResult>> {
    let sweep = Sweep::lame(p)?;
    map_ordered(radii, execution, |&r| match objective {
        Objective::Max => sweep.maximize(r),
        Objective::Min => sweep.minimize_nonneg(r),
    })
    .into_iter()
    .collect()
}

/// Counts at each stretch factor, in the order given.
pub fn counterexample(
    curve: &Curve,
    r: f64,
    stretches: &[f64],
    mode: Quadrant,
) -> Result<Vec<(f64, u64)>> {
    stretches
        .iter()
        .map(|&s| Ok((s, count(curve, r, s, mode)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub m: u64,
    /// `√2(m + ½)`.
    pub r: f64,
    pub count_sqrt2: u64,
    pub count_one: u64,
    /// `(N(r, √2) − N(r, 1)) / r`.
    pub ratio: f64,
}

/// The radii `r = √2(m + ½)`, `m ≤ max_m`, lying within `¼` below an
/// integer, where the stretch `√2` beats the balanced diamond by about `r/2`.
pub fn cluster(max_m: u64) -> Result<Vec<ClusterRow>> {
    let diamond = Curve::diamond();
    let root2 = std::f64::consts::SQRT_2;
    let mut rows = Vec::new();
    for m in 1..=max_m {
        let r = root2 * (m as f64 + 0.5);
        if r - r.floor() <= 0.75 {
            continue;
        }
        let count_sqrt2 = count(&diamond, r, root2, Quadrant::Positive)?;
        let count_one = count(&diamond, r, 1.0, Quadrant::Positive)?;
        let ratio = (count_sqrt2 as f64 - count_one as f64) / r;
        rows.push(ClusterRow {
            m,
            r,
            count_sqrt2,
            count_one,
            ratio,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub seed: u64,
    pub draws: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub s_min: f64,
    pub s_max: f64,
}

impl Default for AuditConfig {
    fn default() -> AuditConfig {
        AuditConfig {
            seed: 42,
            draws: 1000,
            r_min: 1.0,
            r_max: 300.0,
            s_min: 0.25,
            s_max: 4.0,
        }
    }
}

/// Exponents drawn by the audit. The general remainder bound applies to the
/// curved members only, the smooth one to the circle only.
pub const AUDIT_EXPONENTS: [f64; 6] = [1.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditDraw {
    pub p: f64,
    pub r: f64,
    pub s: f64,
}

pub fn audit_draws(config: &AuditConfig) -> Vec<AuditDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let log_uniform =
        |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.gen_range(lo.ln()..=hi.ln())).exp();
    (0..config.draws)
        .map(|_| {
            let p = AUDIT_EXPONENTS[rng.gen_range(0..AUDIT_EXPONENTS.len())];
            let r = log_uniform(&mut rng, config.r_min, config.r_max);
            let s = log_uniform(&mut rng, config.s_min, config.s_max);
            AuditDraw { p, r, s }
        })
        .collect()
}

struct AuditTables {
    bounds: Vec<CurveBounds>,
    general: Vec<Option<GeneralBound>>,
    smooth: SmoothBound,
}

/// Every applicable bound at every draw. Draws outside a bound's
/// preconditions are skipped for that bound only.
pub fn audit(config: &AuditConfig, execution: Execution) -> Result<Vec<BoundReport>> {
    if config.draws == 0 {
        return Err(Error::InvalidParameter(
            "audit needs at least one draw".into(),
        ));
    }
    if !(config.r_min > 0.0
        && config.r_min <= config.r_max
        && config.s_min > 0.0
        && config.s_min <= config.s_max)
    {
        return Err(Error::InvalidParameter(
            "audit ranges must be positive and ordered".into(),
        ));
    }
    let curves: Vec<Curve> = AUDIT_EXPONENTS
        .iter()
        .map(|&p| Curve::lame(p))
        .collect::<Result<_>>()?;
    let tables = AuditTables {
        bounds: curves.iter().map(CurveBounds::new).collect::<Result<_>>()?,
        general: AUDIT_EXPONENTS
            .iter()
            .zip(&curves)
            .map(|(&p, c)| {
                if p > 1.0 && p.is_finite() {
                    GeneralBound::new(c, GeneralCurveParams::pcircle(p)).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<_>>()?,
        smooth: SmoothBound::new(&Curve::pcircle(2.0)?)?,
    };
    let draws = audit_draws(config);
    let per_draw = map_ordered(&draws, execution, |d| audit_one(&tables, d));
    let mut reports = Vec::new();
    for rows in per_draw {
        reports.extend(rows?);
    }
    Ok(reports)
}

fn audit_one(tables: &AuditTables, d: &AuditDraw) -> Result<Vec<BoundReport>> {
    let index = AUDIT_EXPONENTS
        .iter()
        .position(|&p| p == d.p)
        .expect("draws come from the table");
    let bounds = &tables.bounds[index];
    let mut out = vec![
        bounds.rough_lower(d.r, d.s)?,
        bounds.neumann_lower(d.r, d.s)?,
    ];
    let mut keep = |res: Result<BoundReport>| match res {
        Ok(rep) => {
            out.push(rep);
            Ok(())
        }
        Err(Error::Precondition { .. }) => Ok(()),
        Err(e) => Err(e),
    };
    keep(bounds.two_term_upper(d.r, d.s))?;
    if let Some(general) = &tables.general[index] {
        keep(general.report(d.r, d.s))?;
    }
    if d.p == 2.0 {
        keep(tables.smooth.report(d.r, d.s))?;
    }
    Ok(out)
}

/// Optimised eigenvalues for each index.
pub fn eigen_scan(
    problem: Problem,
    indices: &[u64],
    execution: Execution,
) -> Result<Vec<EigenResult>> {
    map_ordered(indices, execution, |&n| optimize(problem, n))
        .into_iter()
        .collect()
}

/// Greedy representatives of `values` at least `separation` apart.
pub fn distinct_heights(values: &[f64], separation: f64) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for v in sorted {
        if out.last().is_none_or(|&last| v - last >= separation) {
            out.push(v);
        }
    }
    out
}

/// `max |sup_s − 1|` over results with `lo ≤ r ≤ hi`.
pub fn max_deviation(results: &[StretchResult], lo: f64, hi: f64) -> f64 {
    results
        .iter()
        .filter(|res| res.r >= lo && res.r <= hi)
        .filter_map(|res| res.sup_s)
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max)
}
