//! Numerical functionals of tails: windowed tail integrals and convolution
//! diagnostics for the classes L, S and S*.
//!
//! Convolution tails are computed exactly up to quadrature error as
//!
//! ```text
//! P(G + B > x) = E[B̄(x − G); G ≤ x − b0] + Ḡ(x − b0),
//! ```
//!
//! where `b0` is the lower end of the support of `B`. The expectation runs
//! over a finite range, so no truncation of the `G` tail is involved and
//! the reported error bound is the quadrature error alone.

use serde::{Deserialize, Serialize};

use crate::dist::{Family, HeavyDistribution, TAIL_REL_TOL};
use crate::error::{Error, Result};
use crate::quad::{self, Quadrature};

const CONVOLUTION_REL_TOL: f64 = 1e-10;
const SSTAR_REL_TOL: f64 = 1e-8;

/// `∫_x^{x+len} F̄(v) dv`; `len` may be `+∞`.
///
/// Closed forms are used for Pareto, exponential, Weibull with shape 1 and
/// point masses (and their shifts and positive parts); other laws go
/// through adaptive quadrature at relative tolerance `1e-8`.
pub fn tail_integral(d: &HeavyDistribution, x: f64, len: f64) -> Result<Quadrature> {
    if len.is_nan() || len < 0.0 || x.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "tail integral needs len >= 0, got x = {x}, len = {len}"
        )));
    }
    if len == 0.0 {
        return Ok(Quadrature::ZERO);
    }
    let upper = x + len;
    if upper.is_infinite() && !d.has_finite_mean() {
        return Err(Error::InfiniteIntegral(format!(
            "∫_{x}^∞ of the tail of {d} diverges (infinite mean)"
        )));
    }
    if let Some(value) = d.family().tail_integral_closed(x, upper) {
        if value.is_infinite() {
            return Err(Error::InfiniteIntegral(format!("∫ tail of {d} from {x} diverges")));
        }
        return Ok(Quadrature { value, error: 0.0 });
    }

    // Below the support the tail is identically one.
    let lo = d.lower_support();
    let flat = if x < lo { upper.min(lo) - x } else { 0.0 };
    let start = x.max(lo);
    if upper <= start {
        return Ok(Quadrature {
            value: flat,
            error: 0.0,
        });
    }
    let family = d.family();
    let q = if upper.is_infinite() {
        quad::integrate_to_infinity(|v| family.tail(v), start, start.abs().max(1.0), TAIL_REL_TOL)?
    } else {
        quad::adaptive_simpson(|v| family.tail(v), start, upper, TAIL_REL_TOL)?
    };
    Ok(Quadrature {
        value: flat + q.value,
        error: q.error,
    })
}

/// `P(G + B > x)` for independent `G` and `B`.
pub fn convolution_tail(g: &HeavyDistribution, b: &HeavyDistribution, x: f64) -> Result<Quadrature> {
    let b0 = b.lower_support();
    let cut = x - b0;
    let family = b.family();
    let inner = g.expect_below(|y| family.tail(x - y), cut, CONVOLUTION_REL_TOL)?;
    Ok(Quadrature {
        value: inner.value + g.tail(cut),
        error: inner.error,
    })
}

/// A diagnostic ratio at one point with its numerical error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRatio {
    pub x: f64,
    pub ratio: f64,
    pub error_bound: f64,
}

fn ratio_of(x: f64, numerator: Quadrature, denominator: f64) -> Result<TailRatio> {
    if denominator <= 0.0 {
        return Err(Error::UndefinedRatio { x });
    }
    Ok(TailRatio {
        x,
        ratio: numerator.value / denominator,
        error_bound: numerator.error / denominator,
    })
}

/// `P(X1 + X2 > x) / P(X1 > x)`; tends to 2 for subexponential laws.
pub fn convolution_tail_ratio(d: &HeavyDistribution, x: f64) -> Result<TailRatio> {
    let tail = d.tail(x);
    if tail <= 0.0 {
        return Err(Error::UndefinedRatio { x });
    }
    ratio_of(x, convolution_tail(d, d, x)?, tail)
}

/// `∫_0^x F̄(x−y)F̄(y)dy / (2 F̄(x) ∫_0^∞ F̄(y)dy)`; tends to 1 on S*.
pub fn sstar_ratio(d: &HeavyDistribution, x: f64) -> Result<TailRatio> {
    d.require_finite_mean("strong subexponential ratio")?;
    let tail = d.tail(x);
    if tail <= 0.0 {
        return Err(Error::UndefinedRatio { x });
    }
    let family = d.family();
    let mut numerator = Quadrature::ZERO;
    if x > 0.0 {
        // Split at the kinks of y ↦ F̄(y) and y ↦ F̄(x − y).
        let lo = d.lower_support();
        let mut cuts = vec![0.0, x];
        for c in [lo, x - lo] {
            if c > 0.0 && c < x {
                cuts.push(c);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            numerator = numerator
                + quad::adaptive_simpson(|y| family.tail(x - y) * family.tail(y), w[0], w[1], SSTAR_REL_TOL)?;
        }
    }
    let integral = tail_integral(d, 0.0, f64::INFINITY)?;
    let denominator = 2.0 * tail * integral.value;
    let mut r = ratio_of(x, numerator, denominator)?;
    r.error_bound += r.ratio * integral.error / integral.value.max(f64::MIN_POSITIVE);
    Ok(r)
}

/// `P(G + B > x) / P(B > x)` for light-tailed `G`; tends to 1 when `B` is
/// long-tailed.
pub fn light_long_convolution_ratio(g: &HeavyDistribution, b: &HeavyDistribution, x: f64) -> Result<TailRatio> {
    let tail = b.tail(x);
    if tail <= 0.0 {
        return Err(Error::UndefinedRatio { x });
    }
    if let Family::Deterministic { value } = *g.family() {
        return Ok(TailRatio {
            x,
            ratio: b.tail(x - value) / tail,
            error_bound: 0.0,
        });
    }
    ratio_of(x, convolution_tail(g, b, x)?, tail)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallTauReport {
    /// `(x, P(cτ > x) / B̄(x))` per grid point.
    pub rows: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Probes `P(cτ > x) = o(B̄(x))` on a grid.
///
/// The check passes when every ratio is zero, or when the largest ratio is
/// not at the last grid point and the ratios are nonincreasing from their
/// maximum onward.
pub fn check_small_tau_condition(
    tau: &HeavyDistribution,
    c: f64,
    jump: &HeavyDistribution,
    x_grid: &[f64],
) -> Result<SmallTauReport> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("drift c must be positive, got {c}")));
    }
    if x_grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let rows: Vec<(f64, f64)> = x_grid
        .iter()
        .map(|&x| {
            let num = tau.tail(x / c);
            let den = jump.tail(x);
            let ratio = if num == 0.0 {
                0.0
            } else if den == 0.0 {
                f64::INFINITY
            } else {
                num / den
            };
            (x, ratio)
        })
        .collect();
    let pass = vanishing_trend(&rows);
    Ok(SmallTauReport { rows, pass })
}

/// Verdict of the `o(·)` probe on `(x, ratio)` rows: all zero, or the
/// maximum is not at the last point and the ratios do not increase after it.
pub(crate) fn vanishing_trend(rows: &[(f64, f64)]) -> bool {
    let ratios: Vec<f64> = rows.iter().map(|r| r.1).collect();
    if ratios.iter().all(|&r| r == 0.0) {
        return true;
    }
    let (peak, _) = ratios
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc });
    peak + 1 < ratios.len() && ratios[peak..].windows(2).all(|w| w[1] <= w[0])
}

/// Tolerances for diagnostic verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticThresholds {
    /// Allowed `|ratio − 2|` for the S check.
    pub subexponential: f64,
    /// Allowed `|ratio − 1|` for the S* check.
    pub strong_subexponential: f64,
    /// Allowed `|ratio − 1|` for the light ⊗ long check.
    pub light_long: f64,
}

impl Default for DiagnosticThresholds {
    fn default() -> Self {
        DiagnosticThresholds {
            subexponential: 0.1,
            strong_subexponential: 0.1,
            light_long: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub x: f64,
    pub ratio: f64,
    pub error_bound: f64,
    pub verdict: Verdict,
}

/// Convolution ratios on a grid. A row passes when it agrees with the
/// claimed class: near 2 for subexponential laws, away from 2 otherwise.
pub fn convolution_diagnostic(
    d: &HeavyDistribution,
    grid: &[f64],
    thresholds: &DiagnosticThresholds,
) -> Result<Vec<DiagnosticRow>> {
    let claimed = d.classes().subexponential;
    grid.iter()
        .map(|&x| {
            let r = convolution_tail_ratio(d, x)?;
            let near = (r.ratio - 2.0).abs() < thresholds.subexponential;
            Ok(DiagnosticRow {
                x,
                ratio: r.ratio,
                error_bound: r.error_bound,
                verdict: Verdict::from_bool(near == claimed),
            })
        })
        .collect()
}

/// S* ratios on an increasing grid. A row passes when `|ratio − 1|` is
/// within tolerance (for S* claims) and does not grow from the previous
/// row beyond the numerical error bounds.
pub fn sstar_diagnostic(
    d: &HeavyDistribution,
    grid: &[f64],
    thresholds: &DiagnosticThresholds,
) -> Result<Vec<DiagnosticRow>> {
    let claimed = d.classes().strong_subexponential;
    let ratios = grid
        .iter()
        .map(|&x| sstar_ratio(d, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(ratios
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let near = (r.ratio - 1.0).abs() < thresholds.strong_subexponential;
            let trending = i == 0 || {
                let prev = &ratios[i - 1];
                (r.ratio - 1.0).abs() <= (prev.ratio - 1.0).abs() + r.error_bound + prev.error_bound
            };
            DiagnosticRow {
                x: r.x,
                ratio: r.ratio,
                error_bound: r.error_bound,
                verdict: Verdict::from_bool(if claimed { near && trending } else { !near }),
            }
        })
        .collect())
}

/// Light ⊗ long ratios on a grid; a row passes when `|ratio − 1|` is within
/// tolerance.
pub fn light_long_diagnostic(
    g: &HeavyDistribution,
    b: &HeavyDistribution,
    grid: &[f64],
    thresholds: &DiagnosticThresholds,
) -> Result<Vec<DiagnosticRow>> {
    grid.iter()
        .map(|&x| {
            let r = light_long_convolution_ratio(g, b, x)?;
            Ok(DiagnosticRow {
                x,
                ratio: r.ratio,
                error_bound: r.error_bound,
                verdict: Verdict::from_bool((r.ratio - 1.0).abs() < thresholds.light_long),
            })
        })
        .collect()
}
