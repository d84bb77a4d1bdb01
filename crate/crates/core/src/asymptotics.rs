//! Tail asymptotics of running maxima and ruin probabilities.
//!
//! Every formula has the shape `(1/|a|)·∫_x^{x+L} F̄(v) dv` for some tail
//! kernel `F̄`, drift `a < 0` and window `L` (possibly infinite), or is a
//! mixture of such windows over a random horizon. Window integrals are
//! capped at 1, the cap of the integrated tail distribution; when
//! `∫_x^∞ F̄ ≥ 1` the point is flagged pre-asymptotic.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::{Family, HeavyDistribution};
use crate::error::{Error, Result};
use crate::montecarlo::MCEstimate;
use crate::quad::Quadrature;
use crate::simulate::{MeanEstimate, ProcessSpec};
use crate::tailmath;

const MIXTURE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FormulaId {
    RwGlobal,
    RwFinite,
    RenewalFinite,
    RenewalInfty,
    LevyFinite,
    LevyInfty,
    StoppedGeneral,
    StoppedMean,
    RuinFinite,
    RuinInfty,
    FixedTEquiv,
}

impl FormulaId {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulaId::RwGlobal => "RW_GLOBAL",
            FormulaId::RwFinite => "RW_FINITE",
            FormulaId::RenewalFinite => "RENEWAL_FINITE",
            FormulaId::RenewalInfty => "RENEWAL_INFTY",
            FormulaId::LevyFinite => "LEVY_FINITE",
            FormulaId::LevyInfty => "LEVY_INFTY",
            FormulaId::StoppedGeneral => "STOPPED_GENERAL",
            FormulaId::StoppedMean => "STOPPED_MEAN",
            FormulaId::RuinFinite => "RUIN_FINITE",
            FormulaId::RuinInfty => "RUIN_INFTY",
            FormulaId::FixedTEquiv => "FIXED_T_EQUIV",
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateFlags {
    /// The integrated tail is capped at `x`: below the asymptotic regime.
    pub pre_asymptotic: bool,
    /// A hypothesis of the underlying theorem is not met.
    pub out_of_scope: bool,
    /// Empty horizon (`n = 0`, `t = 0`).
    pub degenerate: bool,
}

impl EstimateFlags {
    pub fn any(&self) -> bool {
        self.pre_asymptotic || self.out_of_scope || self.degenerate
    }

    /// `|`-separated names of the raised flags, empty if none.
    pub fn label(&self) -> String {
        let mut names = Vec::new();
        if self.pre_asymptotic {
            names.push("pre_asymptotic");
        }
        if self.out_of_scope {
            names.push("out_of_scope");
        }
        if self.degenerate {
            names.push("degenerate");
        }
        names.join("|")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEstimate {
    pub formula: FormulaId,
    pub value: f64,
    /// Echo of the inputs the value was computed from.
    pub inputs: BTreeMap<String, f64>,
    /// Absolute error bound from quadrature (and from `E N_t` when that
    /// was estimated by simulation).
    pub quadrature_error: f64,
    pub flags: EstimateFlags,
    pub notes: Vec<String>,
}

impl AsymptoticEstimate {
    fn new(formula: FormulaId, inputs: &[(&str, f64)]) -> Self {
        AsymptoticEstimate {
            formula,
            value: 0.0,
            inputs: inputs.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            quadrature_error: 0.0,
            flags: EstimateFlags::default(),
            notes: Vec::new(),
        }
    }
}

/// A tail function `F̄(v) = scale · P(Z > v)`.
///
/// With `scale = 1` this is an ordinary tail; with `scale = λ` and `Z` the
/// big-jump law it is the Lévy tail `Π(v, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailKernel {
    pub law: HeavyDistribution,
    pub scale: f64,
}

impl TailKernel {
    pub fn new(law: HeavyDistribution) -> Self {
        TailKernel { law, scale: 1.0 }
    }

    pub fn scaled(law: HeavyDistribution, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::InvalidArgument(format!("kernel scale must be >= 0, got {scale}")));
        }
        Ok(TailKernel { law, scale })
    }

    pub fn tail(&self, v: f64) -> f64 {
        self.scale * self.law.tail(v)
    }

    /// `∫_x^{x+len} F̄`.
    pub fn window(&self, x: f64, len: f64) -> Result<Quadrature> {
        if self.scale == 0.0 {
            return Ok(Quadrature::ZERO);
        }
        Ok(tailmath::tail_integral(&self.law, x, len)?.scale(self.scale))
    }
}

fn negative_drift(a: f64, what: &str) -> Result<f64> {
    if a < 0.0 {
        Ok(-a)
    } else {
        Err(Error::precondition("negative drift", format!("{what} = {a} must be negative")))
    }
}

/// Fills `est` with `min(1, ∫_x^{x+len} F̄)/|a|` and the cap flag.
fn fill_window(est: &mut AsymptoticEstimate, kernel: &TailKernel, abs_a: f64, x: f64, len: f64) -> Result<()> {
    let total = kernel.window(x, f64::INFINITY)?;
    let w = if len.is_infinite() { total } else { kernel.window(x, len)? };
    if total.value >= 1.0 {
        est.flags.pre_asymptotic = true;
        est.notes.push("integrated tail capped at 1".into());
    }
    est.value = w.value.min(1.0) / abs_a;
    est.quadrature_error += w.error / abs_a;
    Ok(())
}

/// `P(M_∞ > x) ≈ F̄_I(x)/|b|` for a random walk with `EY = b < 0`; `b_law`
/// is the law of `Y⁺`.
pub fn rw_max_global(b_law: &HeavyDistribution, b: f64, x: f64) -> Result<AsymptoticEstimate> {
    let abs_b = negative_drift(b, "mean jump b")?;
    b_law.require_finite_mean("random-walk maximum asymptotics")?;
    let mut est = AsymptoticEstimate::new(FormulaId::RwGlobal, &[("b", b), ("x", x)]);
    fill_window(&mut est, &TailKernel::new(b_law.clone()), abs_b, x, f64::INFINITY)?;
    Ok(est)
}

/// `P(M_n > x) ≈ (1/|b|)∫_x^{x+n|b|} B̄`.
pub fn rw_max_finite(b_law: &HeavyDistribution, b: f64, n: u64, x: f64) -> Result<AsymptoticEstimate> {
    let abs_b = negative_drift(b, "mean jump b")?;
    b_law.require_finite_mean("random-walk maximum asymptotics")?;
    let mut est = AsymptoticEstimate::new(FormulaId::RwFinite, &[("b", b), ("n", n as f64), ("x", x)]);
    if n == 0 {
        est.flags.degenerate = true;
        return Ok(est);
    }
    fill_window(&mut est, &TailKernel::new(b_law.clone()), abs_b, x, n as f64 * abs_b)?;
    Ok(est)
}

/// Geometric grid `x, 2x, …, 16x` used to probe `o(·)` conditions near `x`.
fn probe_grid(x: f64) -> Vec<f64> {
    let base = x.max(1.0);
    (0..5).map(|k| base * f64::from(1u32 << k)).collect()
}

fn renewal_parts(spec: &ProcessSpec) -> Result<(&HeavyDistribution, &HeavyDistribution, f64)> {
    match spec {
        ProcessSpec::CompoundRenewal {
            jump_law,
            interarrival_law,
            drift,
        } => Ok((jump_law, interarrival_law, *drift)),
        _ => Err(Error::InvalidArgument("formula needs a compound renewal spec".into())),
    }
}

/// `P(M_t > x) ≈ (1/|a|)∫_x^{x+|a|E N_t} B̄` for a compound renewal process
/// with per-jump drift `a = c/λ + b < 0`, where `B` is the law of `Y⁺`.
///
/// With `c > 0` the interarrival tail must satisfy `P(cτ > x) = o(B̄(x))`;
/// this is probed on `x, 2x, …, 16x` and a failure is an error. The standard
/// error of a simulated `E N_t` is propagated through `B̄(x)·stderr`.
pub fn renewal_finite(spec: &ProcessSpec, t: f64, x: f64, ent: &MeanEstimate) -> Result<AsymptoticEstimate> {
    let (jump_law, tau, c) = renewal_parts(spec)?;
    let a = spec.a();
    let abs_a = negative_drift(a, "per-jump drift a = c/λ + b")?;
    let b_law = jump_law.positive_part();
    let mut est = AsymptoticEstimate::new(
        FormulaId::RenewalFinite,
        &[
            ("a", a),
            ("c", c),
            ("lambda", spec.lambda()),
            ("t", t),
            ("x", x),
            ("ENt", ent.mean),
        ],
    );
    if c > 0.0 {
        let report = tailmath::check_small_tau_condition(tau, c, &b_law, &probe_grid(x))?;
        if !report.pass {
            return Err(Error::precondition(
                "interarrival tail condition",
                format!("P(cτ > x)/B̄(x) does not vanish: {:?}", report.rows),
            ));
        }
    }
    if !b_law.classes().strong_subexponential {
        est.flags.out_of_scope = true;
        est.notes.push(format!("{b_law} is not claimed strong subexponential"));
    }
    if t == 0.0 || ent.mean == 0.0 {
        est.flags.degenerate = t == 0.0;
        return Ok(est);
    }
    fill_window(&mut est, &TailKernel::new(b_law.clone()), abs_a, x, abs_a * ent.mean)?;
    est.quadrature_error += b_law.tail(x) * ent.stderr;
    Ok(est)
}

/// `P(M_∞ > x) ≈ (1/|a|)∫_x^∞ P(cτ + Y⁺ > v) dv` for `c ≥ 0`.
///
/// Uses `∫_x^∞ P(cτ + Y⁺ > v) dv = E[G(x − cτ)]` with `G(z) = ∫_z^∞ B̄`,
/// and `G(z) = EY⁺ − z` for `z ≤ 0`, so the expectation over `τ` splits
/// into a finite quadrature and a closed-form remainder.
pub fn renewal_infty_with_tau(spec: &ProcessSpec, x: f64) -> Result<AsymptoticEstimate> {
    let (jump_law, tau, c) = renewal_parts(spec)?;
    let a = spec.a();
    let abs_a = negative_drift(a, "per-jump drift a = c/λ + b")?;
    if c < 0.0 {
        return Err(Error::InvalidArgument(format!("linear drift c must be >= 0, got {c}")));
    }
    let b_law = jump_law.positive_part();
    let mut est = AsymptoticEstimate::new(
        FormulaId::RenewalInfty,
        &[("a", a), ("c", c), ("lambda", spec.lambda()), ("x", x)],
    );
    if !b_law.classes().subexponential {
        est.flags.out_of_scope = true;
        est.notes.push(format!("{b_law} is not claimed subexponential"));
    }
    let kernel = TailKernel::new(b_law.clone());
    if c == 0.0 {
        fill_window(&mut est, &kernel, abs_a, x, f64::INFINITY)?;
        return Ok(est);
    }
    let b_mean = b_law.require_finite_mean("integrated tail")?;
    let g = |z: f64| -> Result<Quadrature> {
        if z <= 0.0 {
            Ok(Quadrature {
                value: b_mean - z,
                error: 0.0,
            })
        } else {
            tailmath::tail_integral(&b_law, z, f64::INFINITY)
        }
    };
    let total = if x <= 0.0 {
        // cτ + Y⁺ ≥ 0 > x: the whole mean plus the stretch below zero.
        Quadrature {
            value: c * tau.mean() + b_mean - x,
            error: 0.0,
        }
    } else {
        let s_star = x / c;
        let failure = RefCell::new(None);
        let below = tau.expect_below(
            |s| match g(x - c * s) {
                Ok(q) => q.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            s_star,
            MIXTURE_REL_TOL,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        // E[cτ − x + EY⁺; τ > s*]
        let tau_below = tau.expect_below(|s| s, s_star, MIXTURE_REL_TOL)?;
        let above_mass = tau.tail(s_star);
        let above = c * (tau.mean() - tau_below.value) + (b_mean - x) * above_mass;
        Quadrature {
            value: below.value + above.max(0.0),
            error: below.error + c * tau_below.error,
        }
    };
    if total.value >= 1.0 {
        est.flags.pre_asymptotic = true;
        est.notes.push("integrated tail capped at 1".into());
    }
    est.value = total.value.min(1.0) / abs_a;
    est.quadrature_error = total.error / abs_a;
    Ok(est)
}

/// `P(M_t > x) ≈ (1/|a|)∫_x^{x+t|a|} F̄` for a jump-diffusion with
/// `a = E X_1 < 0` and `F̄ = λ·B̄` (the Lévy tail of the big jumps standing
/// in for the tail of `X_1`). `t = ∞` gives the integrated form.
pub fn levy_tail(spec: &ProcessSpec, t: f64, x: f64) -> Result<AsymptoticEstimate> {
    let ProcessSpec::JumpDiffusion { jump_law, intensity, .. } = spec else {
        return Err(Error::InvalidArgument("levy_tail needs a jump-diffusion spec".into()));
    };
    let formula = if t.is_infinite() {
        FormulaId::LevyInfty
    } else {
        FormulaId::LevyFinite
    };
    let a = spec.a();
    let mut est = AsymptoticEstimate::new(formula, &[("a", a), ("lambda", *intensity), ("t", t), ("x", x)]);
    est.inputs.insert("levy_tail_for_x1_tail".into(), 1.0);
    let abs_a = negative_drift(a, "E X_1")?;
    if *intensity == 0.0 {
        est.flags.out_of_scope = true;
        est.notes.push("no big jumps: the tail is not heavy".into());
        return Ok(est);
    }
    let b_law = jump_law.positive_part();
    let claimed = if t.is_infinite() {
        b_law.classes().subexponential
    } else {
        b_law.classes().strong_subexponential
    };
    if !claimed {
        est.flags.out_of_scope = true;
        est.notes.push(format!("{b_law} does not carry the required class claim"));
    }
    if t == 0.0 {
        est.flags.degenerate = true;
        return Ok(est);
    }
    let kernel = TailKernel::scaled(b_law, *intensity)?;
    fill_window(&mut est, &kernel, abs_a, x, t * abs_a)?;
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoppedMode {
    /// `(1/|a|)·E∫_x^{x+τ|a|} F̄`.
    General,
    /// `Eτ·F̄(x)`.
    Mean,
}

/// Tail of the maximum at an independent random time `τ`.
///
/// In `Mean` mode with `a ≥ 0` the condition `P(cτ > x) = o(F̄(x))` is
/// probed with `c = a + 1` on `x, 2x, …, 16x`.
pub fn stopped_tail(
    kernel: &TailKernel,
    a: f64,
    tau_law: &HeavyDistribution,
    x: f64,
    mode: StoppedMode,
) -> Result<AsymptoticEstimate> {
    if tau_law.lower_support() < 0.0 {
        return Err(Error::InvalidArgument(format!("τ must be nonnegative, got {tau_law}")));
    }
    match mode {
        StoppedMode::General => {
            let abs_a = negative_drift(a, "E X_1")?;
            let mut est = AsymptoticEstimate::new(FormulaId::StoppedGeneral, &[("a", a), ("x", x)]);
            let total = kernel.window(x, f64::INFINITY)?;
            let failure = RefCell::new(None);
            let mix = tau_law.expect_below(
                |s| {
                    let len = if s.is_infinite() { s } else { s * abs_a };
                    match kernel.window(x, len) {
                        Ok(q) => q.value,
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    }
                },
                f64::INFINITY,
                MIXTURE_REL_TOL,
            )?;
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            if total.value >= 1.0 {
                est.flags.pre_asymptotic = true;
                est.notes.push("integrated tail capped at 1".into());
            }
            est.value = mix.value.min(1.0) / abs_a;
            est.quadrature_error = (mix.error + total.error) / abs_a;
            Ok(est)
        }
        StoppedMode::Mean => {
            let e_tau = tau_law.require_finite_mean("stopped-maximum asymptotics")?;
            let mut est =
                AsymptoticEstimate::new(FormulaId::StoppedMean, &[("a", a), ("x", x), ("Etau", e_tau)]);
            if a >= 0.0 {
                let c = a + 1.0;
                let grid = probe_grid(x);
                let ratios: Vec<(f64, f64)> = grid
                    .iter()
                    .map(|&v| {
                        let f = kernel.tail(v);
                        let p = tau_law.tail(v / c);
                        (v, if p == 0.0 { 0.0 } else { p / f })
                    })
                    .collect();
                let report = tailmath::SmallTauReport {
                    pass: tailmath::vanishing_trend(&ratios),
                    rows: ratios,
                };
                if !report.pass {
                    return Err(Error::precondition(
                        "stopping time tail condition",
                        format!("P(cτ > x)/F̄(x) with c = {c} does not vanish: {:?}", report.rows),
                    ));
                }
            }
            est.value = e_tau * kernel.tail(x);
            Ok(est)
        }
    }
}

/// Ruin probability in the renewal risk model with premium rate `c`,
/// claims `claim_law` and interarrival law `interarrival_law`:
/// `(λ/(c − bλ))·∫_u^{u+(c/λ − b)E N_t} B̄` (integral to `∞` for `t = ∞`).
///
/// `ent` supplies `E N_t` for finite `t`; when `None` it must be exactly
/// computable (Poisson or deterministic interarrivals).
pub fn ruin_approx(
    claim_law: &HeavyDistribution,
    c: f64,
    interarrival_law: &HeavyDistribution,
    u: f64,
    t: f64,
    ent: Option<&MeanEstimate>,
) -> Result<AsymptoticEstimate> {
    if claim_law.lower_support() < 0.0 {
        return Err(Error::InvalidArgument(format!("claims must be nonnegative, got {claim_law}")));
    }
    let b = claim_law.require_finite_mean("ruin asymptotics")?;
    let lambda = 1.0 / interarrival_law.require_finite_mean("ruin asymptotics")?;
    if !(c > b * lambda) {
        return Err(Error::precondition(
            "net-profit condition",
            format!("premium rate c = {c} must exceed b·λ = {}", b * lambda),
        ));
    }
    let abs_a = c / lambda - b;
    let formula = if t.is_infinite() {
        FormulaId::RuinInfty
    } else {
        FormulaId::RuinFinite
    };
    let mut est = AsymptoticEstimate::new(formula, &[("c", c), ("lambda", lambda), ("b", b), ("u", u), ("t", t)]);
    if !claim_law.classes().strong_subexponential {
        est.flags.out_of_scope = true;
        est.notes.push(format!("{claim_law} is not claimed strong subexponential"));
    }
    let kernel = TailKernel::new(claim_law.clone());
    if t.is_infinite() {
        fill_window(&mut est, &kernel, abs_a, u, f64::INFINITY)?;
        return Ok(est);
    }
    if t == 0.0 {
        est.flags.degenerate = true;
        return Ok(est);
    }
    let owned;
    let ent = match ent {
        Some(e) => e,
        None => {
            let spec = ProcessSpec::compound_renewal(claim_law.clone(), interarrival_law.clone(), -c)?;
            owned = exact_jump_count(&spec, t)?;
            &owned
        }
    };
    est.inputs.insert("ENt".into(), ent.mean);
    fill_window(&mut est, &kernel, abs_a, u, abs_a * ent.mean)?;
    est.quadrature_error += claim_law.tail(u) * ent.stderr;
    Ok(est)
}

/// `E N_t` when it has a closed form.
pub fn exact_jump_count(spec: &ProcessSpec, t: f64) -> Result<MeanEstimate> {
    if let ProcessSpec::CompoundRenewal { interarrival_law, .. } = spec {
        if !matches!(
            interarrival_law.family(),
            Family::Exponential { .. } | Family::Deterministic { .. }
        ) {
            return Err(Error::InvalidArgument(format!(
                "E N_t for {interarrival_law} interarrivals has no closed form; supply an estimate"
            )));
        }
    }
    crate::simulate::expected_jump_count(spec, t, 0, 0)
}

/// Ratio `P(M_t > x)/P(X_t > x)` with a delta-method interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    /// `P(M_t > x) > 0.1`: too far from the tail regime.
    pub pre_asymptotic: bool,
}

/// Willekens-type diagnostic from Monte Carlo estimates of `P(M_t > x)` and
/// `P(X_t > x)`. With `same_paths` the events are nested and
/// `Var ≈ R²/n·(1/p_X − 1/p_M)`; otherwise the two estimates are treated
/// as independent.
pub fn fixed_t_equivalence_ratio(max: &MCEstimate, terminal: &MCEstimate, same_paths: bool) -> Result<RatioEstimate> {
    if terminal.hits == 0 {
        return Err(Error::InsufficientHits("P(X_t > x) estimate is zero".into()));
    }
    let (pm, px) = (max.p_hat, terminal.p_hat);
    let r = pm / px;
    let var = if same_paths {
        if max.n_paths != terminal.n_paths {
            return Err(Error::InvalidArgument("same-path estimates must share the path count".into()));
        }
        let inv_m = if pm > 0.0 { 1.0 / pm } else { 0.0 };
        (r * r / max.n_paths as f64 * (1.0 / px - inv_m)).max(0.0)
    } else {
        let rel_m = if pm > 0.0 { max.stderr / pm } else { 0.0 };
        let rel_x = terminal.stderr / px;
        r * r * (rel_m * rel_m + rel_x * rel_x)
    };
    let se = var.sqrt();
    Ok(RatioEstimate {
        ratio: r,
        stderr: se,
        ci95: ((r - 1.96 * se).max(0.0), r + 1.96 * se),
        pre_asymptotic: pm > 0.1,
    })
}
