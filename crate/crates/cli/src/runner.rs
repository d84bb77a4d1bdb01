//! Scenario execution.

use std::collections::BTreeMap;
use std::time::Instant;

use bigjump_core::asymptotics::{
    exact_jump_count, fixed_t_equivalence_ratio, levy_tail, renewal_finite, ruin_approx, rw_max_finite, stopped_tail,
};
use bigjump_core::montecarlo::{
    calibrate_band_width, compare_report, conditional_big_jump_prob, estimate_exceedance_grid,
    estimate_stopped_exceedance, ComparisonReport, GridPoint,
};
use bigjump_core::simulate::{expected_jump_count, MeanEstimate};
use bigjump_core::tailmath::{convolution_diagnostic, light_long_diagnostic, sstar_diagnostic, DiagnosticRow, Verdict};
use bigjump_core::{AsymptoticEstimate, BigJumpParams, Error, HeavyDistribution, MCEstimate, ProcessSpec, Statistic};

use crate::config::{ExperimentConfig, Scenario};
use crate::error::{CliError, Result};
use crate::report::{Cell, ExperimentReport, Table, VerdictLine};

pub const COMPARISON_COLUMNS: [&str; 10] = [
    "x",
    "t",
    "formula_id",
    "asym_value",
    "p_hat",
    "stderr",
    "ratio",
    "ratio_ci_lo",
    "ratio_ci_hi",
    "flags",
];

/// Seed offsets for auxiliary simulations, so that they never share
/// substreams with the main Monte Carlo run.
const ENT_SEED_OFFSET: u64 = 1;
const PILOT_SEED_OFFSET: u64 = 2;

struct Outcome {
    table: Table,
    verdicts: Vec<VerdictLine>,
    resolved: BTreeMap<String, f64>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let out = match config.scenario {
        Scenario::Tails => tails(config)?,
        Scenario::Rw | Scenario::Renewal | Scenario::Levy => fixed_horizon(config)?,
        Scenario::Stopped => stopped(config)?,
        Scenario::Bigjump => bigjump(config)?,
        Scenario::Ruin => ruin(config)?,
        Scenario::Willekens => willekens(config)?,
    };
    Ok(ExperimentReport {
        config: config.clone(),
        resolved: out.resolved,
        table: out.table,
        verdicts: out.verdicts,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
    })
}

fn process(config: &ExperimentConfig) -> Result<ProcessSpec> {
    config
        .process
        .as_ref()
        .ok_or_else(|| CliError::Schema("missing process block".into()))?
        .build()
}

fn comparison_table(rep: &ComparisonReport) -> Table {
    let mut table = Table::new(&COMPARISON_COLUMNS);
    for r in &rep.rows {
        table.push(vec![
            r.x.into(),
            r.t.into(),
            r.formula_id.as_str().into(),
            r.asym_value.into(),
            r.p_hat.into(),
            r.stderr.into(),
            r.ratio.into(),
            r.ratio_ci_lo.into(),
            r.ratio_ci_hi.into(),
            r.flags.as_str().into(),
        ]);
    }
    table
}

fn comparison_verdict(name: &str, rep: &ComparisonReport) -> VerdictLine {
    VerdictLine {
        name: name.to_string(),
        verdict: rep.verdict,
        detail: format!(
            "{}/{} eligible rows inside band [{}, {}]",
            rep.n_pass, rep.n_eligible, rep.band.0, rep.band.1
        ),
    }
}

fn jump_count(spec: &ProcessSpec, t: f64, config: &ExperimentConfig) -> Result<MeanEstimate> {
    match exact_jump_count(spec, t) {
        Ok(m) => Ok(m),
        Err(Error::InvalidArgument(_)) => Ok(expected_jump_count(
            spec,
            t,
            config.ent_paths,
            config.seed.wrapping_add(ENT_SEED_OFFSET),
        )?),
        Err(e) => Err(e.into()),
    }
}

fn fixed_horizon(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = process(config)?;
    let ts = config.t_values();
    let xs = &config.x_grid;
    let mut asym = Vec::new();
    let mut points = Vec::new();
    for &t in &ts {
        let ent = match config.scenario {
            Scenario::Renewal => Some(jump_count(&spec, t, config)?),
            _ => None,
        };
        for &x in xs {
            let est: AsymptoticEstimate = match config.scenario {
                Scenario::Rw => {
                    let y = spec.jump_law();
                    rw_max_finite(&y.positive_part(), y.mean(), t as u64, x)?
                }
                Scenario::Renewal => renewal_finite(&spec, t, x, ent.as_ref().expect("renewal"))?,
                _ => levy_tail(&spec, t, x)?,
            };
            asym.push(est);
            points.push(GridPoint { x, t });
        }
    }
    let grid = estimate_exceedance_grid(&spec, &ts, xs, config.n_paths, config.seed)?;
    let mc: Vec<MCEstimate> = (0..ts.len())
        .flat_map(|ti| (0..xs.len()).map(move |xi| (ti, xi)))
        .map(|(ti, xi)| grid.estimate(ti, xi, Statistic::Max))
        .collect();
    let th = &config.thresholds;
    let rep = compare_report(&points, &asym, &mc, th.band, th.required_fraction)?;
    let mut resolved = BTreeMap::new();
    resolved.insert("a".into(), spec.a());
    resolved.insert("lambda".into(), spec.lambda());
    Ok(Outcome {
        table: comparison_table(&rep),
        verdicts: vec![comparison_verdict(config.scenario.name(), &rep)],
        resolved,
    })
}

fn diagnostic_rows(table: &mut Table, name: &str, rows: &[DiagnosticRow]) -> VerdictLine {
    for r in rows {
        table.push(vec![
            name.into(),
            r.x.into(),
            r.ratio.into(),
            r.error_bound.into(),
            r.verdict.as_str().into(),
        ]);
    }
    let ok = rows.iter().all(|r| r.verdict == Verdict::Pass);
    VerdictLine {
        name: name.to_string(),
        verdict: (!rows.is_empty()).then_some(Verdict::from_bool(ok)),
        detail: format!("{} of {} rows agree with the claimed class", rows.iter().filter(|r| r.verdict == Verdict::Pass).count(), rows.len()),
    }
}

fn tails(config: &ExperimentConfig) -> Result<Outcome> {
    let law = config.law.as_ref().expect("validated").build()?;
    let th = config.thresholds.diagnostics();
    let mut table = Table::new(&["diagnostic", "x", "ratio", "error_bound", "verdict"]);
    let mut verdicts = Vec::new();
    let conv = convolution_diagnostic(&law, &config.x_grid, &th)?;
    verdicts.push(diagnostic_rows(&mut table, "convolution", &conv));
    if law.has_finite_mean() {
        let sstar = sstar_diagnostic(&law, &config.x_grid, &th)?;
        verdicts.push(diagnostic_rows(&mut table, "sstar", &sstar));
    }
    if let Some(light) = &config.light {
        let ll = light_long_diagnostic(&light.build()?, &law, &config.x_grid, &th)?;
        verdicts.push(diagnostic_rows(&mut table, "light_long", &ll));
    }
    let mut resolved = BTreeMap::new();
    resolved.insert("subexponential".into(), th.subexponential);
    resolved.insert("strong_subexponential".into(), th.strong_subexponential);
    resolved.insert("light_long".into(), th.light_long);
    Ok(Outcome {
        table,
        verdicts,
        resolved,
    })
}

/// Tail kernel `λ·B̄` and drift per unit time, the Lévy-process reading
/// of a compound renewal or jump-diffusion spec.
fn unit_time_kernel(spec: &ProcessSpec) -> Result<bigjump_core::TailKernel> {
    Ok(bigjump_core::TailKernel::scaled(spec.jump_law().positive_part(), spec.lambda())?)
}

fn stopped(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = process(config)?;
    let tau: HeavyDistribution = config.tau.as_ref().expect("validated").build()?;
    let kernel = unit_time_kernel(&spec)?;
    let a = spec.drift_rate();
    let xs = &config.x_grid;
    let mut asym = Vec::new();
    for &x in xs {
        asym.push(stopped_tail(&kernel, a, &tau, x, config.stopped_mode)?);
    }
    let mc = estimate_stopped_exceedance(&spec, &tau, xs, config.n_paths, config.seed)?;
    let mc: Vec<MCEstimate> = mc.into_iter().map(|(max, _)| max).collect();
    // the t column carries Eτ
    let e_tau = tau.mean();
    let points: Vec<GridPoint> = xs.iter().map(|&x| GridPoint { x, t: e_tau }).collect();
    let th = &config.thresholds;
    let rep = compare_report(&points, &asym, &mc, th.band, th.required_fraction)?;
    let mut resolved = BTreeMap::new();
    resolved.insert("a".into(), a);
    resolved.insert("Etau".into(), e_tau);
    Ok(Outcome {
        table: comparison_table(&rep),
        verdicts: vec![comparison_verdict("stopped", &rep)],
        resolved,
    })
}

fn bigjump(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = process(config)?;
    let d = spec.drift_rate();
    let bj = &config.bigjump;
    let epsilon = bj.epsilon.unwrap_or(0.1 * d.abs());
    let coverage = bj.coverage.unwrap_or(0.95);
    let pilot = bj.pilot_paths.unwrap_or(config.n_paths.min(20_000));
    let th = &config.thresholds;
    let mut table = Table::new(&[
        "x",
        "t",
        "epsilon",
        "A",
        "conditioning_hits",
        "estimate",
        "stderr",
        "bound",
        "target",
        "verdict",
    ]);
    let mut resolved = BTreeMap::new();
    resolved.insert("epsilon".into(), epsilon);
    resolved.insert("coverage".into(), coverage);
    resolved.insert("pilot_paths".into(), pilot as f64);
    let (mut judged, mut passed) = (0, 0);
    for &t in &config.t_values() {
        let a_band = match bj.a_band {
            Some(a) => a,
            None => calibrate_band_width(&spec, t, epsilon, coverage, pilot, config.seed.wrapping_add(PILOT_SEED_OFFSET))?,
        };
        resolved.insert(format!("A(t={t})"), a_band);
        let params = BigJumpParams::new(epsilon, a_band, d, spec.lambda())?;
        let target = params.bound() - th.big_jump_slack;
        for &x in &config.x_grid {
            let (hits, p, se) = match conditional_big_jump_prob(&spec, t, x, &params, config.n_paths, config.seed) {
                Ok(e) => (e.conditioning_hits, e.estimate.p_hat, e.estimate.stderr),
                Err(Error::InsufficientHits(_)) => (0, f64::NAN, f64::NAN),
                Err(e) => return Err(e.into()),
            };
            let verdict = if hits < th.min_conditioning_hits {
                "insufficient"
            } else {
                judged += 1;
                passed += usize::from(p >= target);
                if p >= target {
                    "pass"
                } else {
                    "fail"
                }
            };
            table.push(vec![
                x.into(),
                t.into(),
                epsilon.into(),
                a_band.into(),
                hits.into(),
                p.into(),
                se.into(),
                params.bound().into(),
                target.into(),
                verdict.into(),
            ]);
        }
    }
    Ok(Outcome {
        table,
        verdicts: vec![VerdictLine {
            name: "bigjump".into(),
            verdict: (judged > 0).then_some(Verdict::from_bool(passed == judged)),
            detail: format!(
                "{passed}/{judged} rows with >= {} conditioning hits reach bound − {}",
                th.min_conditioning_hits, th.big_jump_slack
            ),
        }],
        resolved,
    })
}

fn ruin(config: &ExperimentConfig) -> Result<Outcome> {
    let rc = config.ruin.as_ref().expect("validated");
    let claims = rc.claims.build()?;
    let interarrival = match &rc.interarrival {
        Some(d) => d.build()?,
        None => HeavyDistribution::exponential(1.0)?,
    };
    let c = rc.premium;
    let us = &config.x_grid;
    let ts = config.t_values();
    // fails early, with the condition named, when c ≤ bλ
    ruin_approx(&claims, c, &interarrival, us[0], f64::INFINITY, None)?;
    let spec = ProcessSpec::compound_renewal(claims.clone(), interarrival.clone(), -c)?;
    let abs_a = -spec.a();
    let u_max = us[us.len() - 1];
    let proxy = rc.proxy_horizon.unwrap_or(10.0 * u_max.max(1.0) / abs_a);
    let mut horizons: Vec<f64> = ts.iter().map(|&t| if t.is_infinite() { proxy } else { t }).collect();
    horizons.sort_by(f64::total_cmp);
    horizons.dedup();
    let grid = estimate_exceedance_grid(&spec, &horizons, us, config.n_paths, config.seed)?;
    let (mut points, mut asym, mut mc) = (Vec::new(), Vec::new(), Vec::new());
    for &t in &ts {
        let sim_t = if t.is_infinite() { proxy } else { t };
        let ti = horizons.iter().position(|&h| h == sim_t).expect("horizon listed");
        let ent = if t.is_infinite() { None } else { Some(jump_count(&spec, t, config)?) };
        for (ui, &u) in us.iter().enumerate() {
            asym.push(ruin_approx(&claims, c, &interarrival, u, t, ent.as_ref())?);
            points.push(GridPoint { x: u, t });
            mc.push(grid.estimate(ti, ui, Statistic::Max));
        }
    }
    let th = &config.thresholds;
    let rep = compare_report(&points, &asym, &mc, th.band, th.required_fraction)?;
    let mut resolved = BTreeMap::new();
    resolved.insert("abs_a".into(), abs_a);
    resolved.insert("lambda".into(), spec.lambda());
    resolved.insert("proxy_horizon".into(), proxy);
    Ok(Outcome {
        table: comparison_table(&rep),
        verdicts: vec![comparison_verdict("ruin", &rep)],
        resolved,
    })
}

fn willekens(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = process(config)?;
    let ts = config.t_values();
    let xs = &config.x_grid;
    let grid = estimate_exceedance_grid(&spec, &ts, xs, config.n_paths, config.seed)?;
    let min_hits = config.thresholds.min_ratio_hits;
    let mut table = Table::new(&[
        "x",
        "t",
        "p_max",
        "p_terminal",
        "terminal_hits",
        "ratio",
        "stderr",
        "ratio_ci_lo",
        "ratio_ci_hi",
        "pre_asymptotic",
    ]);
    let mut verdicts = Vec::new();
    for (ti, &t) in ts.iter().enumerate() {
        let mut eligible = Vec::new();
        for (xi, &x) in xs.iter().enumerate() {
            let m = grid.estimate(ti, xi, Statistic::Max);
            let term = grid.estimate(ti, xi, Statistic::Terminal);
            let (r, se, lo, hi, pre) = match fixed_t_equivalence_ratio(&m, &term, true) {
                Ok(r) => {
                    if term.hits >= min_hits {
                        eligible.push(r);
                    }
                    (r.ratio, r.stderr, r.ci95.0, r.ci95.1, if r.pre_asymptotic { "yes" } else { "no" })
                }
                Err(Error::InsufficientHits(_)) => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, "no"),
                Err(e) => return Err(e.into()),
            };
            table.push(vec![
                x.into(),
                t.into(),
                m.p_hat.into(),
                term.p_hat.into(),
                term.hits.into(),
                r.into(),
                se.into(),
                lo.into(),
                hi.into(),
                Cell::text(pre),
            ]);
        }
        let top = &eligible[eligible.len().saturating_sub(2)..];
        let ok = top.iter().all(|r| r.ci95.0 <= 1.0 && 1.0 <= r.ci95.1);
        verdicts.push(VerdictLine {
            name: format!("willekens(t={t})"),
            verdict: (top.len() == 2).then_some(Verdict::from_bool(ok)),
            detail: format!("CI contains 1 at the two largest x with >= {min_hits} terminal hits"),
        });
    }
    let mut resolved = BTreeMap::new();
    resolved.insert("min_ratio_hits".into(), min_hits as f64);
    Ok(Outcome {
        table,
        verdicts,
        resolved,
    })
}
