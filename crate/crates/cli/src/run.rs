use latstretch::estimates::BoundReport;
use latstretch::experiments::{self, AuditConfig, Objective};
use latstretch::parallel::Execution;
use latstretch::spectral::{EigenResult, Problem};
use latstretch::Quadrant;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{intervals_json, num, opt, Table};
use crate::CliError;

/// Smallest `(N(r,√2) − N(r,1))/r` tolerated for the cluster construction
/// once `m ≥ 10`.
pub const CLUSTER_RATIO_FLOOR: f64 = 0.4;

pub struct Summary {
    pub rows: usize,
    /// Rows breaking an invariant the experiment checks.
    pub violations: usize,
}

pub fn run(config: &ExperimentConfig) -> Result<Summary, CliError> {
    let execution = Execution::from_jobs(config.parallelism);
    let out = config.output_path.as_deref();
    let tag = config.experiment.tag();
    match config.experiment {
        Experiment::Figure2 | Experiment::Figure5 | Experiment::Scan => {
            if config.curve.is_some() {
                return Err(CliError::Usage(
                    "scans support the p-circle family only".into(),
                ));
            }
            let p = config.exponent()?;
            let radii = config.radii()?;
            let objective = config.objective.unwrap_or(Objective::Max);
            let results =
                experiments::scan(p, &radii, objective, execution).map_err(CliError::usage)?;
            let mut table = Table::create(
                out,
                tag,
                &[
                    "r",
                    "log_r",
                    "extremal_count",
                    "sup_s",
                    "inf_s",
                    "every_s",
                    "intervals",
                ],
            )?;
            for res in &results {
                table.row([
                    num(res.r),
                    num(res.r.ln()),
                    res.extremal_count.to_string(),
                    opt(res.sup_s),
                    opt(res.inf_s()),
                    res.every_s.to_string(),
                    intervals_json(&res.intervals),
                ])?;
            }
            table.finish()?;
            Ok(Summary {
                rows: results.len(),
                violations: 0,
            })
        }
        Experiment::Counterexample => {
            let curve = config.curve()?;
            let radii = config.r.clone().unwrap_or_default();
            let stretches = config.s.clone().unwrap_or_default();
            if radii.is_empty() || stretches.is_empty() {
                return Err(CliError::Usage(
                    "counterexample needs --r and at least one --s".into(),
                ));
            }
            let mode = config.quadrant.unwrap_or(Quadrant::Positive);
            let mut table = Table::create(out, tag, &["r", "s", "count", "difference_from_first"])?;
            let mut rows = 0;
            for &r in &radii {
                let counts = experiments::counterexample(&curve, r, &stretches, mode)
                    .map_err(CliError::usage)?;
                let first = counts[0].1 as i64;
                for (s, c) in counts {
                    table.row([
                        num(r),
                        num(s),
                        c.to_string(),
                        (c as i64 - first).to_string(),
                    ])?;
                    rows += 1;
                }
            }
            table.finish()?;
            Ok(Summary {
                rows,
                violations: 0,
            })
        }
        Experiment::Cluster => {
            let rows = experiments::cluster(config.max_m).map_err(CliError::usage)?;
            let mut table = Table::create(
                out,
                tag,
                &["m", "r", "frac_r", "count_sqrt2", "count_one", "ratio"],
            )?;
            let mut violations = 0;
            for row in &rows {
                if row.m >= 10 && row.ratio < CLUSTER_RATIO_FLOOR {
                    violations += 1;
                }
                table.row([
                    row.m.to_string(),
                    num(row.r),
                    num(row.r - row.r.floor()),
                    row.count_sqrt2.to_string(),
                    row.count_one.to_string(),
                    num(row.ratio),
                ])?;
            }
            table.finish()?;
            Ok(Summary {
                rows: rows.len(),
                violations,
            })
        }
        Experiment::Audit => {
            let audit = AuditConfig {
                seed: config.seed,
                draws: config.draws,
                ..AuditConfig::default()
            };
            let reports = experiments::audit(&audit, execution).map_err(CliError::usage)?;
            let mut table = Table::create(
                out,
                tag,
                &[
                    "bound", "curve", "r", "s", "lhs", "rhs", "slack", "holds", "aux",
                ],
            )?;
            for rep in &reports {
                table.row(audit_row(rep))?;
            }
            table.finish()?;
            Ok(Summary {
                rows: reports.len(),
                violations: reports.iter().filter(|r| !r.holds).count(),
            })
        }
        Experiment::EigenAsymptotics => {
            let problem = config.problem.unwrap_or(Problem::DirichletMin);
            eigen_table(config, problem, execution)
        }
        Experiment::Oscillator => eigen_table(config, Problem::OscillatorMin, execution),
    }
}

fn audit_row(rep: &BoundReport) -> [String; 9] {
    let aux: Vec<String> = rep
        .inputs
        .aux
        .iter()
        .map(|(k, v)| format!(r#""{k}":{}"#, num(*v)))
        .collect();
    [
        rep.name.clone(),
        rep.inputs.curve.clone(),
        num(rep.inputs.r),
        num(rep.inputs.s),
        num(rep.lhs),
        num(rep.rhs),
        num(rep.slack),
        rep.holds.to_string(),
        format!("{{{}}}", aux.join(",")),
    ]
}

fn eigen_table(
    config: &ExperimentConfig,
    problem: Problem,
    execution: Execution,
) -> Result<Summary, CliError> {
    let indices = config.indices()?;
    let results = experiments::eigen_scan(problem, &indices, execution).map_err(CliError::usage)?;
    let mut table = Table::create(
        config.output_path.as_deref(),
        config.experiment.tag(),
        &[
            "n",
            "problem",
            "value",
            "inf_s",
            "sup_s",
            "residual_vs_asymptotic",
            "scaled_residual",
            "degenerate",
            "s_set",
        ],
    )?;
    for res in &results {
        table.row(eigen_row(res))?;
    }
    table.finish()?;
    Ok(Summary {
        rows: results.len(),
        violations: 0,
    })
}

fn eigen_row(res: &EigenResult) -> [String; 9] {
    let residual = res.problem.asymptotic(res.n).map(|a| res.value - a);
    [
        res.n.to_string(),
        res.problem.as_str().to_string(),
        num(res.value),
        opt(res.s_set.first().map(|i| i.lo)),
        opt(res.sup_s()),
        opt(residual),
        opt(res.scaled_residual()),
        res.degenerate.to_string(),
        intervals_json(&res.s_set),
    ]
}
