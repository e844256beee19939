//! Convergence-rate studies and edge-cell traces.

use crate::bridge::{compare_to_limit, limit_continuous, limit_discrete, ContinuousLimitOptions, LimitSample};
use crate::dist::{EmpiricalDistribution, Law};
use crate::error::{LabError, Result};
use crate::mallows::{cell_power_integral, distance, step_cell_power_integral, CellMethod};
use crate::stats::{loglog_slope, mean, sorted_quantile, Summary};

use super::config::StudyConfig;
use super::parallel_map;
use super::report::{LimitBlock, Provenance, SizeRow, StudyReport, TailTrace, TailTraceRow};
use super::rng::{derive_stream, COMPONENT_CONDITION1, COMPONENT_DISTANCES, COMPONENT_LIMIT};

/// Limit draws generated per stream.
const LIMIT_BLOCK: usize = 250;

/// `n∫₀^{1/n}(F̂ₙ⁻¹ − F⁻¹)² dp` and `n∫_{1−1/n}^1(F̂ₙ⁻¹ − F⁻¹)² dp`.
///
/// `None` for models without a finite second moment.
pub fn edge_cell_integrals(sample: &EmpiricalDistribution, law: &Law) -> Option<(f64, f64)> {
    law.require_moment(2.0).ok()?;
    let nf = sample.len() as f64;
    let w = 1.0 / nf;
    let (lo, hi) = (sample.min(), sample.max());
    let (a, b) = match law {
        Law::Continuous(m) => (
            cell_power_integral(m, lo, 0.0, w, 2.0, CellMethod::Auto).0.value,
            cell_power_integral(m, hi, 1.0 - w, 1.0, 2.0, CellMethod::Auto).0.value,
        ),
        _ => {
            let s = law.as_step()?;
            (step_cell_power_integral(&s, lo, 0.0, w, 2.0), step_cell_power_integral(&s, hi, 1.0 - w, 1.0, 2.0))
        }
    };
    Some((nf * a, nf * b))
}

/// One replication: `d_r(F̂ₙ, F)` and, when asked, the edge-cell integrals.
fn replicate(law: &Law, r: f64, n: usize, path: [u64; 3], seed: u64, tails: bool) -> Result<(f64, Option<(f64, f64)>)> {
    let mut rng = derive_stream(seed, &path);
    let sample = law.sample(n, &mut rng)?;
    let d = distance(&Law::Empirical(sample.clone()), law, r)?.value;
    Ok((d, if tails { edge_cell_integrals(&sample, law) } else { None }))
}

/// `reps` independent draws of `d_r(F̂ₙ, F)`; replication `k` uses the
/// stream at `(distances, n_index, k)`.
pub fn distance_replications(
    law: &Law,
    r: f64,
    n: usize,
    n_index: usize,
    reps: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<f64>> {
    law.require_moment(r)?;
    let out = parallel_map(threads, reps, |k| {
        replicate(law, r, n, [COMPONENT_DISTANCES, n_index as u64, k as u64], seed, false).map(|x| x.0)
    })?;
    out.into_iter().collect()
}

/// `reps` limit-law draws for `law` in blocks of independent streams.
pub fn limit_draws(
    law: &Law,
    r: f64,
    opts: &ContinuousLimitOptions,
    reps: usize,
    seed: u64,
    threads: usize,
) -> Result<LimitSample> {
    let blocks = reps.div_ceil(LIMIT_BLOCK);
    let parts = parallel_map(threads, blocks, |b| {
        let count = LIMIT_BLOCK.min(reps - b * LIMIT_BLOCK);
        let mut rng = derive_stream(seed, &[COMPONENT_LIMIT, b as u64]);
        match law {
            Law::Continuous(m) => limit_continuous(m, r, opts, count, &mut rng),
            Law::Step(s) => limit_discrete(s, r, count, &mut rng),
            Law::Empirical(_) => Err(LabError::refused("no limit law is defined for an empirical model")),
        }
    })?;
    let mut parts = parts.into_iter();
    let mut out = parts.next().ok_or_else(|| LabError::domain("at least one limit draw is required"))??;
    for p in parts {
        out.draws.extend(p?.draws);
    }
    Ok(out)
}

fn trace_row(n: usize, tails: &[(f64, f64)]) -> TailTraceRow {
    let mut low: Vec<f64> = tails.iter().map(|t| t.0).collect();
    let mut high: Vec<f64> = tails.iter().map(|t| t.1).collect();
    low.sort_unstable_by(f64::total_cmp);
    high.sort_unstable_by(f64::total_cmp);
    TailTraceRow {
        n,
        low_median: sorted_quantile(&low, 0.5),
        low_q90: sorted_quantile(&low, 0.9),
        high_median: sorted_quantile(&high, 0.5),
        high_q90: sorted_quantile(&high, 0.9),
    }
}

/// Rate study over the configured sample sizes.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let law = cfg.law()?;
    let r = cfg.r;
    law.require_moment(r)?;
    let alpha = cfg.effective_alpha(&law);
    let with_tails = law.require_moment(2.0).is_ok();
    let mut diagnostics = Vec::new();
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    let mut trace = Vec::new();
    let mut last_normalized = Vec::new();
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let reps = parallel_map(cfg.threads, cfg.reps, |k| {
            replicate(&law, r, n, [COMPONENT_DISTANCES, i as u64, k as u64], cfg.seed, with_tails)
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let d: Vec<f64> = reps.iter().map(|x| x.0).collect();
        let scale = (n as f64).powf(alpha);
        let z: Vec<f64> = d.iter().map(|v| v * scale).collect();
        let zr: Vec<f64> = z.iter().map(|v| v.powf(r)).collect();
        if with_tails {
            let tails: Vec<(f64, f64)> = reps.iter().filter_map(|x| x.1).collect();
            trace.push(trace_row(n, &tails));
        }
        rows.push(SizeRow {
            n,
            distance: Summary::of(&d),
            normalized: Summary::of(&z),
            normalized_pow_r_mean: mean(&zr),
        });
        last_normalized = z;
    }
    let fit = |values: Vec<f64>, what: &str, diagnostics: &mut Vec<String>| {
        if values.iter().all(|&v| v > 0.0 && v.is_finite()) {
            Some(loglog_slope(&cfg.n_grid, &values))
        } else {
            diagnostics.push(format!("{what} slope skipped: a value is not positive"));
            None
        }
    };
    let slope = fit(rows.iter().map(|x| x.distance.mean).collect(), "mean", &mut diagnostics);
    let median_slope = fit(rows.iter().map(|x| x.distance.median()).collect(), "median", &mut diagnostics);
    let default_alpha = StudyConfig { alpha: None, ..cfg.clone() }.effective_alpha(&law);
    let limit = if alpha != default_alpha {
        diagnostics.push(format!(
            "limit comparison skipped: alpha {alpha} differs from the limit normalisation {default_alpha}"
        ));
        None
    } else {
        let opts = ContinuousLimitOptions { grid_size: cfg.grid_size, monotone_tails: false };
        match limit_draws(&law, r, &opts, cfg.limit_reps, cfg.seed, cfg.threads) {
            Ok(sample) => {
                let comparison = compare_to_limit(&last_normalized, &sample)?;
                Some(LimitBlock {
                    kind: sample.kind,
                    n: *cfg.n_grid.last().expect("validated grid"),
                    draws: sample.draws.len(),
                    comparison,
                    limit: Summary::of(&sample.draws),
                    bias_note: sample.bias_note,
                })
            }
            Err(e) => {
                diagnostics.push(format!("limit comparison skipped: {e}"));
                None
            }
        }
    };
    if !with_tails {
        diagnostics.push("edge-cell trace skipped: second moment is not finite".into());
    }
    Ok(StudyReport {
        provenance: Provenance {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            model: law.to_string(),
            r,
            alpha,
        },
        rows,
        slope,
        median_slope,
        limit,
        tail_trace: with_tails.then(|| TailTrace::from_rows(trace)),
        diagnostics,
    })
}

/// Edge-cell integrals over `n_grid` from their own streams.
pub fn run_condition1_check(law: &Law, n_grid: &[usize], reps: usize, seed: u64, threads: usize) -> Result<TailTrace> {
    law.require_moment(2.0)?;
    let mut rows = Vec::with_capacity(n_grid.len());
    for (i, &n) in n_grid.iter().enumerate() {
        let tails = parallel_map(threads, reps, |k| -> Result<(f64, f64)> {
            let mut rng = derive_stream(seed, &[COMPONENT_CONDITION1, i as u64, k as u64]);
            let sample = law.sample(n, &mut rng)?;
            edge_cell_integrals(&sample, law).ok_or_else(|| LabError::divergent("second moment"))
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        rows.push(trace_row(n, &tails));
    }
    Ok(TailTrace::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{parse_model, DistributionModel, StepDistribution};

    fn cfg(model: &str, r: f64, grid: &[usize], reps: usize) -> StudyConfig {
        StudyConfig {
            model: model.into(),
            r,
            n_grid: grid.to_vec(),
            reps,
            limit_reps: 1000,
            grid_size: 513,
            ..StudyConfig::default()
        }
    }

    #[test]
    fn uniform_study_shape() {
        let c = cfg("uniform()", 2.0, &[64, 256, 1024], 200);
        let rep = run_convergence_study(&c).unwrap();
        assert_eq!(rep.rows.len(), 3);
        let s = rep.slope.unwrap().slope;
        assert!((s + 0.5).abs() < 0.1, "{s}");
        assert!(rep.limit.is_some());
        assert!(rep.tail_trace.is_some());
        assert_eq!(rep.provenance.config_hash, c.hash());
    }

    #[test]
    fn normal_study_skips_limit_with_diagnostic() {
        let rep = run_convergence_study(&cfg("normal()", 2.0, &[32, 64, 128], 100)).unwrap();
        assert!(rep.limit.is_none());
        assert!(rep.diagnostics.iter().any(|d| d.contains("limit comparison skipped")));
    }

    #[test]
    fn divergent_moment_is_refused() {
        let err = run_convergence_study(&cfg("pareto(shape=2.5)", 3.0, &[32, 64, 128], 100)).unwrap_err();
        assert!(err.is_numeric_refusal());
    }

    #[test]
    fn thread_count_does_not_change_draws() {
        let law = parse_model("exponential()").unwrap();
        let a = distance_replications(&law, 2.0, 50, 0, 64, 5, 1).unwrap();
        let b = distance_replications(&law, 2.0, 50, 0, 64, 5, 4).unwrap();
        assert_eq!(a, b);
        let opts = ContinuousLimitOptions::default();
        let la = limit_draws(&parse_model("bernoulli()").unwrap(), 2.0, &opts, 600, 5, 1).unwrap();
        let lb = limit_draws(&parse_model("bernoulli()").unwrap(), 2.0, &opts, 600, 5, 3).unwrap();
        assert_eq!(la, lb);
        assert_eq!(la.draws.len(), 600);
    }

    #[test]
    fn point_mass_edge_cells_vanish() {
        let law = Law::Step(StepDistribution::point_mass(2.0).unwrap());
        let t = run_condition1_check(&law, &[10, 20, 40], 20, 1, 1).unwrap();
        assert!(t.rows.iter().all(|r| r.low_median == 0.0 && r.high_q90 == 0.0));
    }

    #[test]
    fn uniform_edge_cells_shrink() {
        let law = Law::Continuous(DistributionModel::standard_uniform());
        let t = run_condition1_check(&law, &[64, 512, 4096], 300, 3, 0).unwrap();
        assert!(t.low_decreasing && t.high_decreasing, "{t:?}");
    }
}
