//! Path simulation with exact running maxima.
//!
//! Renewal paths are piecewise linear, so their maximum is attained at
//! time 0, just before or just after a jump, or at the horizon. Between the
//! jumps of a jump-diffusion the Brownian endpoint is drawn exactly and the
//! segment maximum is drawn from the Brownian-bridge maximum law given both
//! endpoints. No time grid is involved anywhere.
//!
//! A single pass can report several horizons (checkpoints) of the same
//! path. A jump landing exactly on a horizon is counted at that horizon.

use serde::{Deserialize, Serialize};

use crate::dist::{Family, HeavyDistribution};
use crate::error::{Error, Result};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    RandomWalk,
    CompoundRenewal,
    JumpDiffusion,
}

/// Truncated small-jump component of a jump-diffusion: a finite set of jump
/// sizes in `(ε, 1]` with their rates, compensated to a martingale, plus
/// a Gaussian term standing in for the jumps below `ε`.
///
/// This replaces an infinite-activity small-jump martingale by a
/// finite-activity one with the same variance; the law of the path is
/// changed only through jumps below `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallJumps {
    /// `(size, rate)` pairs; `0 < |size| ≤ 1`, `rate > 0`.
    pub atoms: Vec<(f64, f64)>,
    /// `∫_{|x|<ε} x² Π(dx)`, added to the Brownian variance.
    pub residual_variance: f64,
}

impl SmallJumps {
    fn total_rate(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    fn compensator(&self) -> f64 {
        self.atoms.iter().map(|a| a.0 * a.1).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProcessSpec {
    /// `S_n = Y_1 + … + Y_n`.
    RandomWalk { jump_law: HeavyDistribution },
    /// `X_t = Σ_{i ≤ N_t} Y_i + c·t` with renewal counting process `N_t`.
    CompoundRenewal {
        jump_law: HeavyDistribution,
        interarrival_law: HeavyDistribution,
        drift: f64,
    },
    /// `X_t = drift·t + σ W_t + Σ_{i ≤ N_t} Y_i` with `N_t` Poisson(λ).
    JumpDiffusion {
        jump_law: HeavyDistribution,
        intensity: f64,
        sigma: f64,
        drift: f64,
        small_jumps: Option<SmallJumps>,
    },
}

impl ProcessSpec {
    pub fn random_walk(jump_law: HeavyDistribution) -> Result<Self> {
        jump_law.require_finite_mean("random walk")?;
        Ok(ProcessSpec::RandomWalk { jump_law })
    }

    pub fn compound_renewal(jump_law: HeavyDistribution, interarrival_law: HeavyDistribution, drift: f64) -> Result<Self> {
        jump_law.require_finite_mean("compound renewal process")?;
        let m = interarrival_law.require_finite_mean("interarrival law")?;
        if interarrival_law.lower_support() < 0.0 || !(m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "interarrival law must live on the positive half-line, got {interarrival_law}"
            )));
        }
        if !drift.is_finite() {
            return Err(Error::InvalidArgument(format!("drift must be finite, got {drift}")));
        }
        Ok(ProcessSpec::CompoundRenewal {
            jump_law,
            interarrival_law,
            drift,
        })
    }

    /// Compound Poisson process with rate `lambda` and linear drift `c`.
    pub fn compound_poisson(jump_law: HeavyDistribution, lambda: f64, drift: f64) -> Result<Self> {
        Self::compound_renewal(jump_law, HeavyDistribution::exponential(lambda)?, drift)
    }

    /// Brownian motion plus compound Poisson jumps. `intensity = 0` gives a
    /// Brownian motion with drift.
    pub fn jump_diffusion(jump_law: HeavyDistribution, intensity: f64, sigma: f64, drift: f64) -> Result<Self> {
        jump_law.require_finite_mean("jump-diffusion")?;
        if !(intensity.is_finite() && intensity >= 0.0) {
            return Err(Error::InvalidArgument(format!("intensity must be >= 0, got {intensity}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be >= 0, got {sigma}")));
        }
        if !drift.is_finite() {
            return Err(Error::InvalidArgument(format!("drift must be finite, got {drift}")));
        }
        Ok(ProcessSpec::JumpDiffusion {
            jump_law,
            intensity,
            sigma,
            drift,
            small_jumps: None,
        })
    }

    /// Adds a truncated small-jump component to a jump-diffusion.
    pub fn with_small_jumps(self, small: SmallJumps) -> Result<Self> {
        for &(size, rate) in &small.atoms {
            if !(size != 0.0 && size.abs() <= 1.0 && rate > 0.0 && rate.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "small jump ({size}, rate {rate}) must have 0 < |size| <= 1 and positive rate"
                )));
            }
        }
        if !(small.residual_variance >= 0.0 && small.residual_variance.is_finite()) {
            return Err(Error::InvalidArgument("residual variance must be >= 0".into()));
        }
        match self {
            ProcessSpec::JumpDiffusion {
                jump_law,
                intensity,
                sigma,
                drift,
                ..
            } => Ok(ProcessSpec::JumpDiffusion {
                jump_law,
                intensity,
                sigma,
                drift,
                small_jumps: if small.atoms.is_empty() && small.residual_variance == 0.0 {
                    None
                } else {
                    Some(small)
                },
            }),
            _ => Err(Error::InvalidArgument("small jumps apply to jump-diffusions only".into())),
        }
    }

    pub fn kind(&self) -> ProcessKind {
        match self {
            ProcessSpec::RandomWalk { .. } => ProcessKind::RandomWalk,
            ProcessSpec::CompoundRenewal { .. } => ProcessKind::CompoundRenewal,
            ProcessSpec::JumpDiffusion { .. } => ProcessKind::JumpDiffusion,
        }
    }

    pub fn jump_law(&self) -> &HeavyDistribution {
        match self {
            ProcessSpec::RandomWalk { jump_law }
            | ProcessSpec::CompoundRenewal { jump_law, .. }
            | ProcessSpec::JumpDiffusion { jump_law, .. } => jump_law,
        }
    }

    /// Rate of the (big) jumps: `1/Eτ` for renewal processes, the Poisson
    /// intensity for jump-diffusions, one per step for random walks.
    pub fn lambda(&self) -> f64 {
        match self {
            ProcessSpec::RandomWalk { .. } => 1.0,
            ProcessSpec::CompoundRenewal { interarrival_law, .. } => 1.0 / interarrival_law.mean(),
            ProcessSpec::JumpDiffusion { intensity, .. } => *intensity,
        }
    }

    /// Linear drift per unit time (`c`, or the Brownian drift).
    pub fn linear_drift(&self) -> f64 {
        match self {
            ProcessSpec::RandomWalk { .. } => 0.0,
            ProcessSpec::CompoundRenewal { drift, .. } | ProcessSpec::JumpDiffusion { drift, .. } => *drift,
        }
    }

    /// The drift `a` of the tail asymptotics: `b` for random walks,
    /// `c/λ + b` per jump for renewal processes, `E X_1` for jump-diffusions.
    pub fn a(&self) -> f64 {
        let b = self.jump_law().mean();
        match self {
            ProcessSpec::RandomWalk { .. } => b,
            ProcessSpec::CompoundRenewal { drift, .. } => drift / self.lambda() + b,
            ProcessSpec::JumpDiffusion { intensity, drift, .. } => drift + intensity * b,
        }
    }

    /// Mean increment per unit time (per step for random walks).
    pub fn drift_rate(&self) -> f64 {
        match self {
            ProcessSpec::RandomWalk { .. } | ProcessSpec::JumpDiffusion { .. } => self.a(),
            ProcessSpec::CompoundRenewal { .. } => self.a() * self.lambda(),
        }
    }
}

/// One jump of a recorded path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub time: f64,
    pub size: f64,
    /// False for jumps of the truncated small-jump component.
    pub big: bool,
}

/// A jump-free stretch `[t0, t1)` of a recorded path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    /// Left limit at `t1`.
    pub x1: f64,
    /// Maximum over the segment; `max(x0, x1)` for linear segments.
    pub max: f64,
    pub brownian: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub horizon: f64,
    pub max: f64,
    pub terminal: f64,
    pub n_jumps: u64,
    /// Filled only when the path was simulated with recording on.
    pub jumps: Vec<JumpRecord>,
    pub segments: Vec<Segment>,
}

/// Path summary at one horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub max: f64,
    pub terminal: f64,
    pub n_jumps: u64,
}

#[derive(Debug, Default)]
struct Recorder {
    jumps: Vec<JumpRecord>,
    segments: Vec<Segment>,
}

/// `(M_n, S_n)` for the random walk with `n` steps; `M_0 = 0`.
pub fn rw_max(jump_law: &HeavyDistribution, n: u64, rng: &mut RandomStream) -> (f64, f64) {
    let family = jump_law.family();
    let (mut s, mut m) = (0.0f64, 0.0f64);
    for _ in 0..n {
        s += family.sample(rng);
        m = m.max(s);
    }
    (m, s)
}

/// Random-walk summaries at nondecreasing step counts, from one path.
pub fn rw_checkpoints(jump_law: &HeavyDistribution, steps: &[u64], rng: &mut RandomStream) -> Vec<Checkpoint> {
    let family = jump_law.family();
    let (mut s, mut m, mut k) = (0.0f64, 0.0f64, 0u64);
    steps
        .iter()
        .map(|&n| {
            while k < n {
                s += family.sample(rng);
                m = m.max(s);
                k += 1;
            }
            Checkpoint {
                max: m,
                terminal: s,
                n_jumps: k,
            }
        })
        .collect()
}

/// Maximum of a Brownian segment of length `h` from `start` to `endpoint`.
///
/// Given both endpoints the maximum has `P(max > m) = exp(−2(m−s)(m−e)/(σ²h))`
/// for `m ≥ max(s, e)`; it is drawn by inversion. `sigma = 0` returns
/// `max(start, endpoint)` without consuming randomness.
pub fn brownian_segment_max(start: f64, _drift: f64, sigma: f64, h: f64, endpoint: f64, rng: &mut RandomStream) -> f64 {
    if sigma == 0.0 || h <= 0.0 {
        return start.max(endpoint);
    }
    bridge_max(start, endpoint, sigma * sigma * h, rng.uniform_open0())
}

/// Bridge maximum for a given uniform `u ∈ (0, 1]`.
#[inline]
pub fn bridge_max(start: f64, endpoint: f64, variance: f64, u: f64) -> f64 {
    let d = endpoint - start;
    let m = 0.5 * (start + endpoint + (d * d - 2.0 * variance * u.ln()).sqrt());
    m.max(start).max(endpoint)
}

/// Precomputed per-path constants of a continuous-time process.
struct Engine<'a> {
    jump: &'a Family,
    /// Interarrival law, `None` when no jumps ever occur.
    clock: Option<Clock<'a>>,
    drift: f64,
    sigma: f64,
    big_rate: f64,
    small: Option<&'a SmallJumps>,
}

enum Clock<'a> {
    Renewal(&'a Family),
    Poisson(f64),
}

impl<'a> Engine<'a> {
    fn new(spec: &'a ProcessSpec) -> Result<Self> {
        match spec {
            ProcessSpec::RandomWalk { .. } => Err(Error::InvalidArgument(
                "random walks are simulated by rw_max / rw_checkpoints".into(),
            )),
            ProcessSpec::CompoundRenewal {
                jump_law,
                interarrival_law,
                drift,
            } => Ok(Engine {
                jump: jump_law.family(),
                clock: Some(Clock::Renewal(interarrival_law.family())),
                drift: *drift,
                sigma: 0.0,
                big_rate: 1.0,
                small: None,
            }),
            ProcessSpec::JumpDiffusion {
                jump_law,
                intensity,
                sigma,
                drift,
                small_jumps,
            } => {
                let small_rate = small_jumps.as_ref().map_or(0.0, SmallJumps::total_rate);
                let total = intensity + small_rate;
                let variance = sigma * sigma + small_jumps.as_ref().map_or(0.0, |s| s.residual_variance);
                Ok(Engine {
                    jump: jump_law.family(),
                    clock: if total > 0.0 { Some(Clock::Poisson(total)) } else { None },
                    drift: drift - small_jumps.as_ref().map_or(0.0, SmallJumps::compensator),
                    sigma: variance.sqrt(),
                    big_rate: *intensity,
                    small: small_jumps.as_ref(),
                })
            }
        }
    }

    #[inline]
    fn next_gap(&self, rng: &mut RandomStream) -> f64 {
        match self.clock {
            None => f64::INFINITY,
            // Same draw as Family::Exponential, so that σ = 0 reproduces a
            // compound Poisson path exactly.
            Some(Clock::Poisson(rate)) => -rng.uniform_open0().ln() / rate,
            Some(Clock::Renewal(f)) => f.sample(rng),
        }
    }

    /// Draws the next jump; `(size, big)`.
    #[inline]
    fn next_jump(&self, rng: &mut RandomStream) -> (f64, bool) {
        match self.small {
            None => (self.jump.sample(rng), true),
            Some(small) => {
                let total = self.big_rate + small.total_rate();
                let mut u = rng.uniform() * total;
                if u < self.big_rate {
                    return (self.jump.sample(rng), true);
                }
                u -= self.big_rate;
                for &(size, rate) in &small.atoms {
                    if u < rate {
                        return (size, false);
                    }
                    u -= rate;
                }
                (small.atoms.last().map_or(0.0, |a| a.0), false)
            }
        }
    }

    /// Advances the continuous part over `h`; returns `(end, segment max)`.
    #[inline]
    fn advance(&self, x: f64, h: f64, rng: &mut RandomStream) -> (f64, f64) {
        if self.sigma == 0.0 {
            let end = x + self.drift * h;
            return (end, x.max(end));
        }
        let sd = self.sigma * h.sqrt();
        let end = x + self.drift * h + sd * rng.standard_normal();
        (end, bridge_max(x, end, sd * sd, rng.uniform_open0()))
    }

    /// Simulates one path to the last horizon, reporting each horizon.
    fn run(&self, horizons: &[f64], rng: &mut RandomStream, mut rec: Option<&mut Recorder>) -> Vec<Checkpoint> {
        let mut out = Vec::with_capacity(horizons.len());
        let (mut now, mut x, mut m, mut n) = (0.0f64, 0.0f64, 0.0f64, 0u64);
        let mut next = horizons.iter().copied().peekable();
        while next.peek().is_some() {
            let jump_at = now + self.next_gap(rng);
            while let Some(&h) = next.peek() {
                if h >= jump_at {
                    break;
                }
                let (end, seg_max) = self.advance(x, h - now, rng);
                if let Some(r) = rec.as_deref_mut() {
                    r.segments.push(Segment {
                        t0: now,
                        t1: h,
                        x0: x,
                        x1: end,
                        max: seg_max,
                        brownian: self.sigma > 0.0,
                    });
                }
                m = m.max(seg_max);
                now = h;
                x = end;
                out.push(Checkpoint {
                    max: m,
                    terminal: x,
                    n_jumps: n,
                });
                next.next();
            }
            if next.peek().is_none() {
                break;
            }
            let (end, seg_max) = self.advance(x, jump_at - now, rng);
            let (y, big) = self.next_jump(rng);
            if let Some(r) = rec.as_deref_mut() {
                r.segments.push(Segment {
                    t0: now,
                    t1: jump_at,
                    x0: x,
                    x1: end,
                    max: seg_max,
                    brownian: self.sigma > 0.0,
                });
                r.jumps.push(JumpRecord {
                    time: jump_at,
                    size: y,
                    big,
                });
            }
            x = end + y;
            m = m.max(seg_max).max(x);
            n += 1;
            now = jump_at;
        }
        out
    }
}

fn check_horizons(horizons: &[f64]) -> Result<()> {
    if horizons.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
        return Err(Error::InvalidArgument(format!("horizons must be finite and >= 0, got {horizons:?}")));
    }
    if horizons.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(format!("horizons must be nondecreasing, got {horizons:?}")));
    }
    Ok(())
}

/// Summaries of one path at each of the nondecreasing `horizons`.
///
/// Random walks read the horizons as step counts (rounded down).
pub fn simulate_checkpoints(spec: &ProcessSpec, horizons: &[f64], rng: &mut RandomStream) -> Result<Vec<Checkpoint>> {
    check_horizons(horizons)?;
    if let ProcessSpec::RandomWalk { jump_law } = spec {
        let steps: Vec<u64> = horizons.iter().map(|h| h.floor() as u64).collect();
        return Ok(rw_checkpoints(jump_law, &steps, rng));
    }
    Ok(Engine::new(spec)?.run(horizons, rng, None))
}

/// Simulates one path to horizon `t`; `record` keeps jumps and segments.
pub fn simulate_path(spec: &ProcessSpec, t: f64, rng: &mut RandomStream, record: bool) -> Result<PathResult> {
    check_horizons(&[t])?;
    if let ProcessSpec::RandomWalk { jump_law } = spec {
        let family = jump_law.family();
        let (mut s, mut m) = (0.0f64, 0.0f64);
        let mut rec = Recorder::default();
        let n = t.floor() as u64;
        for k in 1..=n {
            let y = family.sample(rng);
            if record {
                let time = k as f64;
                rec.segments.push(Segment {
                    t0: time - 1.0,
                    t1: time,
                    x0: s,
                    x1: s,
                    max: s,
                    brownian: false,
                });
                rec.jumps.push(JumpRecord { time, size: y, big: true });
            }
            s += y;
            m = m.max(s);
        }
        return Ok(PathResult {
            horizon: t,
            max: m,
            terminal: s,
            n_jumps: n,
            jumps: rec.jumps,
            segments: rec.segments,
        });
    }
    let engine = Engine::new(spec)?;
    let mut rec = Recorder::default();
    let cp = engine.run(&[t], rng, if record { Some(&mut rec) } else { None })[0];
    Ok(PathResult {
        horizon: t,
        max: cp.max,
        terminal: cp.terminal,
        n_jumps: cp.n_jumps,
        jumps: rec.jumps,
        segments: rec.segments,
    })
}

/// One compound renewal path on `[0, t]`, with jump records.
pub fn renewal_path_max(spec: &ProcessSpec, t: f64, rng: &mut RandomStream) -> Result<PathResult> {
    match spec {
        ProcessSpec::CompoundRenewal { .. } => simulate_path(spec, t, rng, true),
        _ => Err(Error::InvalidArgument("renewal_path_max needs a compound renewal spec".into())),
    }
}

/// One jump-diffusion path on `[0, t]`, with jump records.
pub fn levy_path_max(spec: &ProcessSpec, t: f64, rng: &mut RandomStream) -> Result<PathResult> {
    match spec {
        ProcessSpec::JumpDiffusion { .. } => simulate_path(spec, t, rng, true),
        _ => Err(Error::InvalidArgument("levy_path_max needs a jump-diffusion spec".into())),
    }
}

/// `(X_τ, M_τ)` with `τ` drawn from `tau_law` first, then the path.
pub fn stopped_sample(spec: &ProcessSpec, tau_law: &HeavyDistribution, rng: &mut RandomStream) -> Result<(f64, f64)> {
    if tau_law.lower_support() < 0.0 {
        return Err(Error::InvalidArgument(format!("stopping time law must be nonnegative, got {tau_law}")));
    }
    let tau = tau_law.sample(rng);
    let cp = simulate_checkpoints(spec, &[tau], rng)?[0];
    Ok((cp.terminal, cp.max))
}

/// `E N_t`, exact when a formula exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    /// Zero for exact values.
    pub stderr: f64,
    /// Zero for exact values.
    pub n_paths: u64,
    pub exact: bool,
}

impl MeanEstimate {
    fn exact(mean: f64) -> Self {
        MeanEstimate {
            mean,
            stderr: 0.0,
            n_paths: 0,
            exact: true,
        }
    }
}

/// Expected number of jumps in `[0, t]`.
///
/// Exact for Poisson clocks (`λt`), deterministic interarrivals
/// (`⌊t/d⌋`) and random walks (`⌊t⌋`); otherwise a Monte Carlo average
/// over `n_paths` paths of experiment `seed`.
pub fn expected_jump_count(spec: &ProcessSpec, t: f64, n_paths: u64, seed: u64) -> Result<MeanEstimate> {
    check_horizons(&[t])?;
    match spec {
        ProcessSpec::RandomWalk { .. } => Ok(MeanEstimate::exact(t.floor())),
        ProcessSpec::JumpDiffusion { intensity, .. } => Ok(MeanEstimate::exact(intensity * t)),
        ProcessSpec::CompoundRenewal { interarrival_law, .. } => match *interarrival_law.family() {
            Family::Exponential { rate } => Ok(MeanEstimate::exact(rate * t)),
            Family::Deterministic { value } => Ok(MeanEstimate::exact((t / value).floor())),
            _ => {
                if n_paths < 2 {
                    return Err(Error::InvalidArgument("need at least 2 paths to estimate E N_t".into()));
                }
                let clock = interarrival_law.family();
                let (sum, sum_sq) = (0..n_paths)
                    .map(|i| {
                        let mut rng = RandomStream::for_path(seed, i);
                        let (mut now, mut k) = (0.0f64, 0u64);
                        loop {
                            now += clock.sample(&mut rng);
                            if now > t {
                                break;
                            }
                            k += 1;
                        }
                        k as f64
                    })
                    .fold((0.0, 0.0), |(s, q), k| (s + k, q + k * k));
                let n = n_paths as f64;
                let mean = sum / n;
                let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
                Ok(MeanEstimate {
                    mean,
                    stderr: (var / n).sqrt(),
                    n_paths,
                    exact: false,
                })
            }
        },
    }
}
