//! Crude Monte Carlo exceedance estimates, single-big-jump detection and
//! formula-vs-simulation comparison.
//!
//! Path `i` of experiment `seed` always uses substream `(seed, i)`, and all
//! aggregation is by integer counters, so results are bit-identical for a
//! given `(seed, n_paths)` whatever the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::AsymptoticEstimate;
use crate::dist::HeavyDistribution;
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::simulate::{self, PathResult, ProcessSpec, Segment};
use crate::tailmath::Verdict;

/// Estimates with fewer hits than this carry a warning.
pub const MIN_RELIABLE_HITS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    /// Running maximum `M_t`.
    Max,
    /// Terminal value `X_t`.
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub n_paths: u64,
    pub seed: u64,
    pub hits: u64,
    /// Fewer than [`MIN_RELIABLE_HITS`] hits.
    pub low_hits: bool,
}

impl MCEstimate {
    pub fn from_counts(hits: u64, n_paths: u64, seed: u64) -> MCEstimate {
        let n = n_paths.max(1) as f64;
        let p = hits as f64 / n;
        let stderr = (p * (1.0 - p) / n).sqrt();
        MCEstimate {
            p_hat: p,
            stderr,
            ci95: ((p - 1.96 * stderr).max(0.0), (p + 1.96 * stderr).min(1.0)),
            n_paths,
            seed,
            hits,
            low_hits: hits < MIN_RELIABLE_HITS,
        }
    }
}

/// Counts of `M_t > x` and `X_t > x` over a `(t, x)` grid from one set of
/// paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceGrid {
    pub t_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub n_paths: u64,
    pub seed: u64,
    max_hits: Vec<u64>,
    terminal_hits: Vec<u64>,
}

impl ExceedanceGrid {
    pub fn estimate(&self, ti: usize, xi: usize, statistic: Statistic) -> MCEstimate {
        let k = ti * self.x_grid.len() + xi;
        let hits = match statistic {
            Statistic::Max => self.max_hits[k],
            Statistic::Terminal => self.terminal_hits[k],
        };
        MCEstimate::from_counts(hits, self.n_paths, self.seed)
    }
}

fn check_paths(n_paths: u64) -> Result<()> {
    if n_paths == 0 {
        Err(Error::InvalidArgument("n_paths must be >= 1".into()))
    } else {
        Ok(())
    }
}

fn count_into(counts: &mut [u64], x_grid: &[f64], value: f64, offset: usize) {
    for (j, &x) in x_grid.iter().enumerate() {
        if value > x {
            counts[offset + j] += 1;
        }
    }
}

/// Exceedance counts over all `(t, x)` pairs, each path simulated once
/// with every horizon as a checkpoint. `t_grid` must be nondecreasing.
pub fn estimate_exceedance_grid(
    spec: &ProcessSpec,
    t_grid: &[f64],
    x_grid: &[f64],
    n_paths: u64,
    seed: u64,
) -> Result<ExceedanceGrid> {
    check_paths(n_paths)?;
    if t_grid.is_empty() || x_grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    // Validates the horizons once up front.
    simulate::simulate_checkpoints(spec, t_grid, &mut RandomStream::for_path(seed, 0))?;
    let (nt, nx) = (t_grid.len(), x_grid.len());
    let counts = (0..n_paths)
        .into_par_iter()
        .fold(
            || vec![0u64; 2 * nt * nx],
            |mut acc, i| {
                let mut rng = RandomStream::for_path(seed, i);
                let cps = simulate::simulate_checkpoints(spec, t_grid, &mut rng).expect("horizons validated");
                for (ti, cp) in cps.iter().enumerate() {
                    count_into(&mut acc, x_grid, cp.max, ti * nx);
                    count_into(&mut acc, x_grid, cp.terminal, nt * nx + ti * nx);
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; 2 * nt * nx],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(u, v)| *u += v);
                a
            },
        );
    let (max_hits, terminal_hits) = counts.split_at(nt * nx);
    Ok(ExceedanceGrid {
        t_grid: t_grid.to_vec(),
        x_grid: x_grid.to_vec(),
        n_paths,
        seed,
        max_hits: max_hits.to_vec(),
        terminal_hits: terminal_hits.to_vec(),
    })
}

/// Crude Monte Carlo estimate of `P(M_t > x)` or `P(X_t > x)`.
pub fn estimate_exceedance(
    spec: &ProcessSpec,
    t: f64,
    x: f64,
    n_paths: u64,
    seed: u64,
    statistic: Statistic,
) -> Result<MCEstimate> {
    Ok(estimate_exceedance_grid(spec, &[t], &[x], n_paths, seed)?.estimate(0, 0, statistic))
}

/// `(P(M_τ > x), P(X_τ > x))` per `x` for an independent random horizon `τ`.
pub fn estimate_stopped_exceedance(
    spec: &ProcessSpec,
    tau_law: &HeavyDistribution,
    x_grid: &[f64],
    n_paths: u64,
    seed: u64,
) -> Result<Vec<(MCEstimate, MCEstimate)>> {
    check_paths(n_paths)?;
    simulate::stopped_sample(spec, tau_law, &mut RandomStream::for_path(seed, 0))?;
    let nx = x_grid.len();
    let counts = (0..n_paths)
        .into_par_iter()
        .fold(
            || vec![0u64; 2 * nx],
            |mut acc, i| {
                let mut rng = RandomStream::for_path(seed, i);
                let (xt, mt) = simulate::stopped_sample(spec, tau_law, &mut rng).expect("validated");
                count_into(&mut acc, x_grid, mt, 0);
                count_into(&mut acc, x_grid, xt, nx);
                acc
            },
        )
        .reduce(
            || vec![0u64; 2 * nx],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(u, v)| *u += v);
                a
            },
        );
    Ok((0..nx)
        .map(|j| {
            (
                MCEstimate::from_counts(counts[j], n_paths, seed),
                MCEstimate::from_counts(counts[nx + j], n_paths, seed),
            )
        })
        .collect())
}

/// Parameters of the events
/// `D_k = {|X_s − d·s| ≤ εs + A for all s < T_k, Y_k > x + |d|·T_k}`,
/// where `d` is the drift per unit time (`aλ` for renewal processes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigJumpParams {
    pub epsilon: f64,
    #[serde(rename = "A")]
    pub a_band: f64,
    pub drift_rate: f64,
    pub lambda: f64,
}

impl BigJumpParams {
    pub fn new(epsilon: f64, a_band: f64, drift_rate: f64, lambda: f64) -> Result<Self> {
        if !(epsilon > 0.0 && a_band > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon and A must be positive, got {epsilon} and {a_band}"
            )));
        }
        if !(lambda > 0.0 && drift_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need lambda > 0 and finite drift rate, got {lambda} and {drift_rate}"
            )));
        }
        Ok(BigJumpParams {
            epsilon,
            a_band,
            drift_rate,
            lambda,
        })
    }

    /// Default `ε = 0.1·|d|` for the process, with a given `A`.
    pub fn for_spec(spec: &ProcessSpec, a_band: f64) -> Result<Self> {
        let d = spec.drift_rate();
        Self::new(0.1 * d.abs(), a_band, d, spec.lambda())
    }

    /// Lower bound `|a|/(|a| + 2ε/λ)` on the conditional probability.
    pub fn bound(&self) -> f64 {
        let a = self.drift_rate.abs() / self.lambda;
        a / (a + 2.0 * self.epsilon / self.lambda)
    }

    fn upper(&self, s: f64) -> f64 {
        (self.drift_rate + self.epsilon) * s + self.a_band
    }

    fn lower(&self, s: f64) -> f64 {
        (self.drift_rate - self.epsilon) * s - self.a_band
    }

    /// Band check on one segment: endpoints on both sides, and the segment
    /// maximum against the smaller endpoint value of the upper boundary.
    fn segment_in_band(&self, seg: &Segment) -> bool {
        let ends = [(seg.t0, seg.x0), (seg.t1, seg.x1)];
        let ends_ok = ends.iter().all(|&(s, x)| x <= self.upper(s) && x >= self.lower(s));
        ends_ok && (!seg.brownian || seg.max <= self.upper(seg.t0).min(self.upper(seg.t1)))
    }
}

/// Whether some `D_k` occurs on a recorded path, and the first such `k`
/// (1-based).
pub fn detect_big_jump(path: &PathResult, x: f64, params: &BigJumpParams) -> (bool, Option<usize>) {
    let mut seg = path.segments.iter().peekable();
    for (k, jump) in path.jumps.iter().enumerate() {
        while let Some(s) = seg.next_if(|s| s.t0 < jump.time) {
            if !params.segment_in_band(s) {
                return (false, None);
            }
        }
        if jump.big && jump.size > x + params.drift_rate.abs() * jump.time {
            return (true, Some(k + 1));
        }
    }
    (false, None)
}

/// Smallest `A` for which the band holds on the whole recorded path.
fn required_band(path: &PathResult, drift_rate: f64, epsilon: f64) -> f64 {
    path.segments
        .iter()
        .map(|seg| {
            let dev = |s: f64, x: f64| (x - drift_rate * s).abs() - epsilon * s;
            let mut need = dev(seg.t0, seg.x0).max(dev(seg.t1, seg.x1));
            if seg.brownian {
                let up = |s: f64| seg.max - (drift_rate + epsilon) * s;
                need = need.max(up(seg.t0)).max(up(seg.t1));
            }
            need
        })
        .fold(0.0, f64::max)
}

/// `A` such that the band `|X_s − d·s| ≤ εs + A` holds on all of `[0, t]`
/// for a fraction `coverage` of pilot paths.
pub fn calibrate_band_width(
    spec: &ProcessSpec,
    t: f64,
    epsilon: f64,
    coverage: f64,
    n_paths: u64,
    seed: u64,
) -> Result<f64> {
    check_paths(n_paths)?;
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::InvalidArgument(format!("coverage must be in (0, 1), got {coverage}")));
    }
    let d = spec.drift_rate();
    let mut needs = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::for_path(seed, i);
            simulate::simulate_path(spec, t, &mut rng, true).map(|p| required_band(&p, d, epsilon))
        })
        .collect::<Result<Vec<f64>>>()?;
    needs.sort_by(f64::total_cmp);
    let idx = ((coverage * n_paths as f64).ceil() as usize).clamp(1, needs.len()) - 1;
    Ok(needs[idx].max(f64::EPSILON))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigJumpEstimate {
    /// Proportion of `∪ D_k` among paths with `M_t > x`.
    pub estimate: MCEstimate,
    pub conditioning_hits: u64,
    pub bound: f64,
    pub params: BigJumpParams,
}

/// `P(∪_k D_k | M_t > x)` by crude Monte Carlo.
///
/// Paths are first simulated without recording; those with `M_t > x` are
/// re-simulated from the same substream with jump records.
pub fn conditional_big_jump_prob(
    spec: &ProcessSpec,
    t: f64,
    x: f64,
    params: &BigJumpParams,
    n_paths: u64,
    seed: u64,
) -> Result<BigJumpEstimate> {
    check_paths(n_paths)?;
    if spec.a() >= 0.0 {
        return Err(Error::precondition("negative drift", format!("a = {} must be negative", spec.a())));
    }
    simulate::simulate_checkpoints(spec, &[t], &mut RandomStream::for_path(seed, 0))?;
    let (cond, hits) = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let cp = simulate::simulate_checkpoints(spec, &[t], &mut RandomStream::for_path(seed, i)).expect("validated")[0];
            if cp.max <= x {
                return (0u64, 0u64);
            }
            let path = simulate::simulate_path(spec, t, &mut RandomStream::for_path(seed, i), true).expect("validated");
            debug_assert_eq!(path.max, cp.max);
            (1, u64::from(detect_big_jump(&path, x, params).0))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if cond == 0 {
        return Err(Error::InsufficientHits(format!(
            "no path of {n_paths} reached M_t > {x} at t = {t}"
        )));
    }
    Ok(BigJumpEstimate {
        estimate: MCEstimate::from_counts(hits, cond, seed),
        conditioning_hits: cond,
        bound: params.bound(),
        params: *params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub t: f64,
    pub formula_id: String,
    pub asym_value: f64,
    pub p_hat: f64,
    pub stderr: f64,
    pub ratio: f64,
    pub ratio_ci_lo: f64,
    pub ratio_ci_hi: f64,
    pub flags: String,
    /// Whether the row counts toward the verdict.
    pub eligible: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub band: (f64, f64),
    pub n_eligible: usize,
    pub n_pass: usize,
    /// `None` when no row is eligible.
    pub verdict: Option<Verdict>,
}

/// Ratio `p̂/asym` per point, with the Monte Carlo interval divided by the
/// formula value. A row passes when its ratio interval meets `band`.
/// Rows whose formula is flagged, whose estimate has fewer than
/// [`MIN_RELIABLE_HITS`] hits, or whose formula value is zero are excluded.
/// The verdict passes when at least `required_fraction` of eligible rows
/// pass.
pub fn compare_report(
    points: &[GridPoint],
    asym: &[AsymptoticEstimate],
    mc: &[MCEstimate],
    band: (f64, f64),
    required_fraction: f64,
) -> Result<ComparisonReport> {
    if points.len() != asym.len() || points.len() != mc.len() {
        return Err(Error::MisalignedGrids(format!(
            "{} points, {} formula values, {} estimates",
            points.len(),
            asym.len(),
            mc.len()
        )));
    }
    let mut rows = Vec::with_capacity(points.len());
    for (i, ((p, a), m)) in points.iter().zip(asym).zip(mc).enumerate() {
        let echoed = a.inputs.get("x").or_else(|| a.inputs.get("u"));
        if echoed.is_some_and(|&x| x != p.x) {
            return Err(Error::MisalignedGrids(format!(
                "row {i}: point x = {} but formula evaluated at {}",
                p.x,
                echoed.unwrap()
            )));
        }
        let mut flags = a.flags.label();
        if m.low_hits {
            if !flags.is_empty() {
                flags.push('|');
            }
            flags.push_str("low_hits");
        }
        let (ratio, lo, hi) = if a.value > 0.0 {
            (m.p_hat / a.value, m.ci95.0 / a.value, m.ci95.1 / a.value)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        let eligible = !a.flags.any() && !m.low_hits && a.value > 0.0;
        rows.push(ComparisonRow {
            x: p.x,
            t: p.t,
            formula_id: a.formula.as_str().to_string(),
            asym_value: a.value,
            p_hat: m.p_hat,
            stderr: m.stderr,
            ratio,
            ratio_ci_lo: lo,
            ratio_ci_hi: hi,
            flags,
            eligible,
            pass: eligible && hi >= band.0 && lo <= band.1,
        });
    }
    let n_eligible = rows.iter().filter(|r| r.eligible).count();
    let n_pass = rows.iter().filter(|r| r.pass).count();
    let verdict = (n_eligible > 0).then(|| Verdict::from_bool(n_pass as f64 >= required_fraction * n_eligible as f64));
    Ok(ComparisonReport {
        rows,
        band,
        n_eligible,
        n_pass,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::JumpRecord;

    fn det(v: f64) -> HeavyDistribution {
        HeavyDistribution::deterministic(v).unwrap()
    }

    #[test]
    fn estimate_invariants() {
        let e = MCEstimate::from_counts(30, 1000, 5);
        assert_eq!(e.p_hat, 0.03);
        assert!((e.stderr - (0.03f64 * 0.97 / 1000.0).sqrt()).abs() < 1e-18);
        assert!(!e.low_hits);
        let z = MCEstimate::from_counts(0, 10, 5);
        assert_eq!(z.ci95, (0.0, 0.0));
        assert!(z.low_hits);
    }

    #[test]
    fn nonpositive_spec_never_exceeds() {
        let spec = ProcessSpec::compound_poisson(det(-1.0), 1.0, -0.5).unwrap();
        let e = estimate_exceedance(&spec, 10.0, 0.5, 1000, 1, Statistic::Max).unwrap();
        assert_eq!(e.hits, 0);
    }

    fn linear_path(drift: f64, jumps: &[(f64, f64)], horizon: f64) -> PathResult {
        let (mut now, mut x) = (0.0, 0.0);
        let mut segments = Vec::new();
        let mut records = Vec::new();
        for &(time, size) in jumps {
            let end = x + drift * (time - now);
            segments.push(Segment {
                t0: now,
                t1: time,
                x0: x,
                x1: end,
                max: f64::max(x, end),
                brownian: false,
            });
            records.push(JumpRecord { time, size, big: true });
            x = end + size;
            now = time;
        }
        let end = x + drift * (horizon - now);
        segments.push(Segment {
            t0: now,
            t1: horizon,
            x0: x,
            x1: end,
            max: f64::max(x, end),
            brownian: false,
        });
        PathResult {
            horizon,
            max: segments.iter().map(|s| s.max).fold(0.0, f64::max),
            terminal: end,
            n_jumps: jumps.len() as u64,
            jumps: records,
            segments,
        }
    }

    #[test]
    fn detect_examples() {
        let params = BigJumpParams::new(0.1, 1.0, -1.0, 1.0).unwrap();
        let x = 10.0;
        let single = linear_path(-1.0, &[(2.0, x + 2.0 + 1.0)], 5.0);
        assert_eq!(detect_big_jump(&single, x, &params), (true, Some(1)));
        let small = linear_path(-1.0, &[(2.0, 3.0)], 5.0);
        assert_eq!(detect_big_jump(&small, x, &params), (false, None));
        // early excursion below the band, then a big jump
        let excursion = linear_path(-1.0, &[(1.0, -5.0), (3.0, x + 3.0 + 1.0)], 5.0);
        assert_eq!(detect_big_jump(&excursion, x, &params), (false, None));
        let wide = BigJumpParams { a_band: 10.0, ..params };
        assert_eq!(detect_big_jump(&excursion, x, &wide), (true, Some(2)));
    }

    #[test]
    fn bound_value() {
        let p = BigJumpParams::new(0.1, 50.0, -1.0, 1.0).unwrap();
        assert!((p.bound() - 1.0 / 1.2).abs() < 1e-15);
        let huge = BigJumpParams::new(1e12, 50.0, -1.0, 1.0).unwrap();
        assert!(huge.bound() < 1e-11);
    }

    #[test]
    fn compare_report_examples() {
        use crate::asymptotics::{rw_max_global, EstimateFlags};
        let b = HeavyDistribution::pareto(2.0, 1.0).unwrap();
        let points = [GridPoint { x: 10.0, t: 1.0 }, GridPoint { x: 20.0, t: 1.0 }];
        let asym: Vec<_> = points.iter().map(|p| rw_max_global(&b, -1.0, p.x).unwrap()).collect();
        let mc: Vec<_> = asym
            .iter()
            .map(|a| MCEstimate::from_counts((a.value * 1e6).round() as u64, 1_000_000, 0))
            .collect();
        let rep = compare_report(&points, &asym, &mc, (0.75, 1.25), 1.0).unwrap();
        assert!(rep.rows.iter().all(|r| (r.ratio - 1.0).abs() < 1e-12));
        assert_eq!(rep.verdict, Some(Verdict::Pass));

        let mut flagged = asym.clone();
        flagged[0].flags = EstimateFlags {
            pre_asymptotic: true,
            ..Default::default()
        };
        let rep = compare_report(&points, &flagged, &mc, (0.75, 1.25), 1.0).unwrap();
        assert_eq!(rep.n_eligible, 1);

        for a in flagged.iter_mut() {
            a.flags.out_of_scope = true;
        }
        let rep = compare_report(&points, &flagged, &mc, (0.75, 1.25), 1.0).unwrap();
        assert_eq!(rep.verdict, None);

        assert!(matches!(
            compare_report(&points[..1], &asym, &mc, (0.75, 1.25), 1.0),
            Err(Error::MisalignedGrids(_))
        ));
    }
}
