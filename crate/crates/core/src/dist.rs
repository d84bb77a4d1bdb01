//! Parametric laws with exact tails.
//!
//! | family        | tail `P(X > x)`                 | mean                  |
//! |---------------|---------------------------------|-----------------------|
//! | Pareto(α, xm) | `(x/xm)^-α` for `x ≥ xm`        | `α·xm/(α−1)`, α > 1   |
//! | Weibull(k, s) | `exp(-(x/s)^k)`                 | `s·Γ(1+1/k)`          |
//! | Lognormal(μ,σ)| `Φ̄((ln x − μ)/σ)`               | `exp(μ+σ²/2)`         |
//! | Exponential(r)| `exp(-r·x)`                     | `1/r`                 |
//! | Deterministic | `1{x < v}`                      | `v`                   |
//!
//! Shifted laws (`Z − shift`) give jump laws with negative mean; the
//! positive part `max(Y, 0)` is what the tail asymptotics are stated in.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{self, Quadrature};
use crate::rng::RandomStream;
use crate::tailmath;

/// Relative tolerance for tail integrals without a closed form.
pub const TAIL_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Pareto,
    Weibull,
    Lognormal,
    Exponential,
    Deterministic,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Pareto => "pareto",
            FamilyKind::Weibull => "weibull",
            FamilyKind::Lognormal => "lognormal",
            FamilyKind::Exponential => "exponential",
            FamilyKind::Deterministic => "deterministic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Pareto { alpha: f64, xm: f64 },
    Weibull { shape: f64, scale: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    /// Law of `Z − shift`.
    Shifted { base: Box<Family>, shift: f64 },
    /// Law of `max(Z, 0)`.
    PositivePart { base: Box<Family> },
}

/// Tail classes a family is documented to belong to. These are claims,
/// probed numerically by [`crate::tailmath`], never certified.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailClasses {
    pub long_tailed: bool,
    pub subexponential: bool,
    pub strong_subexponential: bool,
    pub light_tailed: bool,
}

impl TailClasses {
    const LIGHT: TailClasses = TailClasses {
        long_tailed: false,
        subexponential: false,
        strong_subexponential: false,
        light_tailed: true,
    };

    fn heavy(strong: bool) -> TailClasses {
        TailClasses {
            long_tailed: true,
            subexponential: true,
            strong_subexponential: strong,
            light_tailed: false,
        }
    }
}

fn normal_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// `z` with `P(N(0,1) > z) = v`.
fn normal_inverse_tail(v: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * v)
}

impl Family {
    pub fn tail(&self, x: f64) -> f64 {
        match *self {
            Family::Pareto { alpha, xm } => {
                if x <= xm {
                    1.0
                } else {
                    (x / xm).powf(-alpha)
                }
            }
            Family::Weibull { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-(x / scale).powf(shape)).exp()
                }
            }
            Family::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    normal_tail((x.ln() - mu) / sigma)
                }
            }
            Family::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Family::Deterministic { value } => {
                if x < value {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Shifted { ref base, shift } => base.tail(x + shift),
            Family::PositivePart { ref base } => {
                if x < 0.0 {
                    1.0
                } else {
                    base.tail(x)
                }
            }
        }
    }

    /// Density of the absolutely continuous part.
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Family::Pareto { alpha, xm } => {
                if x < xm {
                    0.0
                } else {
                    alpha / xm * (x / xm).powf(-alpha - 1.0)
                }
            }
            Family::Weibull { shape, scale } => {
                if x < 0.0 {
                    0.0
                } else {
                    let z = x / scale;
                    shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
                }
            }
            Family::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    (-0.5 * z * z).exp() / (x * sigma * (2.0 * std::f64::consts::PI).sqrt())
                }
            }
            Family::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Family::Deterministic { .. } => 0.0,
            Family::Shifted { ref base, shift } => base.density(x + shift),
            Family::PositivePart { ref base } => {
                if x <= 0.0 {
                    0.0
                } else {
                    base.density(x)
                }
            }
        }
    }

    /// Point masses `(location, mass)`. Only degenerate laws and positive
    /// parts have any, and then only at the lower end of the support.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match *self {
            Family::Deterministic { value } => vec![(value, 1.0)],
            Family::Shifted { ref base, shift } => base
                .atoms()
                .into_iter()
                .map(|(loc, mass)| (loc - shift, mass))
                .collect(),
            Family::PositivePart { ref base } => {
                let mut out: Vec<(f64, f64)> =
                    base.atoms().into_iter().filter(|&(loc, _)| loc > 0.0).collect();
                let at_zero = 1.0 - base.tail(0.0);
                if at_zero > 0.0 {
                    out.insert(0, (0.0, at_zero));
                }
                out
            }
            _ => Vec::new(),
        }
    }

    pub fn continuous_mass(&self) -> f64 {
        let atomic: f64 = self.atoms().iter().map(|&(_, m)| m).sum();
        (1.0 - atomic).max(0.0)
    }

    pub fn lower_support(&self) -> f64 {
        match *self {
            Family::Pareto { xm, .. } => xm,
            Family::Weibull { .. } | Family::Lognormal { .. } | Family::Exponential { .. } => 0.0,
            Family::Deterministic { value } => value,
            Family::Shifted { ref base, shift } => base.lower_support() - shift,
            Family::PositivePart { ref base } => base.lower_support().max(0.0),
        }
    }

    /// Point `y` of the continuous part with `P(X > y) = v`, for
    /// `0 < v ≤ continuous_mass()`. `v = 0` maps to `+∞`.
    pub fn inverse_tail(&self, v: f64) -> f64 {
        if v >= self.continuous_mass() {
            return self.lower_support();
        }
        if v <= 0.0 {
            return f64::INFINITY;
        }
        match *self {
            Family::Pareto { alpha, xm } => xm * v.powf(-1.0 / alpha),
            Family::Weibull { shape, scale } => scale * (-v.ln()).powf(1.0 / shape),
            Family::Lognormal { mu, sigma } => (mu + sigma * normal_inverse_tail(v)).exp(),
            Family::Exponential { rate } => -v.ln() / rate,
            Family::Deterministic { value } => value,
            Family::Shifted { ref base, shift } => base.inverse_tail(v) - shift,
            Family::PositivePart { ref base } => base.inverse_tail(v).max(0.0),
        }
    }

    /// Quantile function `F^{-1}(u)` for `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Family::Pareto { alpha, xm } => xm * (1.0 - u).powf(-1.0 / alpha),
            Family::Weibull { shape, scale } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Family::Lognormal { mu, sigma } => (mu - sigma * normal_inverse_tail(u)).exp(),
            Family::Exponential { rate } => -(-u).ln_1p() / rate,
            Family::Deterministic { value } => value,
            Family::Shifted { ref base, shift } => base.quantile(u) - shift,
            Family::PositivePart { ref base } => base.quantile(u).max(0.0),
        }
    }

    #[inline]
    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        match *self {
            Family::Pareto { alpha, xm } => xm * rng.uniform_open0().powf(-1.0 / alpha),
            Family::Exponential { rate } => -rng.uniform_open0().ln() / rate,
            Family::Lognormal { mu, sigma } => (mu + sigma * rng.standard_normal()).exp(),
            Family::Deterministic { value } => value,
            Family::Shifted { ref base, shift } => base.sample(rng) - shift,
            Family::PositivePart { ref base } => base.sample(rng).max(0.0),
            Family::Weibull { .. } => self.quantile(rng.uniform()),
        }
    }

    fn analytic_mean(&self) -> f64 {
        match *self {
            Family::Pareto { alpha, xm } => {
                if alpha > 1.0 {
                    alpha * xm / (alpha - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            Family::Weibull { shape, scale } => scale * gamma(1.0 + 1.0 / shape),
            Family::Lognormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Family::Exponential { rate } => 1.0 / rate,
            Family::Deterministic { value } => value,
            Family::Shifted { ref base, shift } => base.analytic_mean() - shift,
            Family::PositivePart { ref base } => {
                if base.lower_support() >= 0.0 {
                    base.analytic_mean()
                } else {
                    // E[Z⁺] = ∫_0^∞ P(Z > v) dv
                    let b = HeavyDistribution::from_family_unchecked((**base).clone());
                    tailmath::tail_integral(&b, 0.0, f64::INFINITY)
                        .map(|q| q.value)
                        .unwrap_or(f64::INFINITY)
                }
            }
        }
    }

    /// `∫_a^b P(X > v) dv` in closed form, when the family has one.
    pub fn tail_integral_closed(&self, a: f64, b: f64) -> Option<f64> {
        debug_assert!(b >= a);
        // ∫ over [a, b] ∩ (−∞, lo) where the tail is 1
        let flat = |lo: f64| if a < lo { b.min(lo) - a } else { 0.0 };
        match *self {
            Family::Pareto { alpha, xm } => {
                let lo = a.max(xm);
                let upper = if b > lo {
                    if alpha == 1.0 {
                        xm * (b / lo).ln()
                    } else {
                        let at = |v: f64| {
                            if v.is_infinite() {
                                if alpha > 1.0 {
                                    0.0
                                } else {
                                    f64::INFINITY
                                }
                            } else {
                                (v / xm).powf(1.0 - alpha)
                            }
                        };
                        xm / (alpha - 1.0) * (at(lo) - at(b))
                    }
                } else {
                    0.0
                };
                Some(flat(xm) + upper)
            }
            Family::Exponential { rate } => Some(exponential_window(rate, a, b) + flat(0.0)),
            Family::Weibull { shape, scale } if shape == 1.0 => {
                Some(exponential_window(1.0 / scale, a, b) + flat(0.0))
            }
            Family::Deterministic { value } => Some(flat(value).max(0.0)),
            Family::Shifted { ref base, shift } => base.tail_integral_closed(a + shift, b + shift),
            Family::PositivePart { ref base } => {
                let lo = a.max(0.0);
                let upper = if b > lo {
                    base.tail_integral_closed(lo, b)?
                } else {
                    0.0
                };
                Some(flat(0.0) + upper)
            }
            Family::Weibull { .. } | Family::Lognormal { .. } => None,
        }
    }

    fn classes(&self) -> TailClasses {
        match *self {
            Family::Pareto { alpha, .. } => TailClasses::heavy(alpha > 1.0),
            Family::Weibull { shape, .. } => {
                if shape < 1.0 {
                    TailClasses::heavy(true)
                } else {
                    TailClasses::LIGHT
                }
            }
            Family::Lognormal { .. } => TailClasses::heavy(true),
            Family::Exponential { .. } | Family::Deterministic { .. } => TailClasses::LIGHT,
            Family::Shifted { ref base, .. } | Family::PositivePart { ref base } => base.classes(),
        }
    }
}

fn exponential_window(rate: f64, a: f64, b: f64) -> f64 {
    let lo = a.max(0.0);
    if b <= lo {
        return 0.0;
    }
    ((-rate * lo).exp() - (-rate * b).exp()) / rate
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Pareto { alpha, xm } => write!(f, "pareto(alpha={alpha}, xm={xm})"),
            Family::Weibull { shape, scale } => write!(f, "weibull(shape={shape}, scale={scale})"),
            Family::Lognormal { mu, sigma } => write!(f, "lognormal(mu={mu}, sigma={sigma})"),
            Family::Exponential { rate } => write!(f, "exponential(rate={rate})"),
            Family::Deterministic { value } => write!(f, "deterministic({value})"),
            Family::Shifted { base, shift } => write!(f, "{base} - {shift}"),
            Family::PositivePart { base } => write!(f, "({base})+"),
        }
    }
}

/// An immutable law with cached mean and claimed tail classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavyDistribution {
    family: Family,
    classes: TailClasses,
    mean: f64,
}

/// Builds a distribution from a family tag and its parameter list.
///
/// Parameter order: Pareto `[alpha, xm]`, Weibull `[shape, scale]`,
/// Lognormal `[mu, sigma]`, Exponential `[rate]`, Deterministic `[value]`.
/// Infinite-mean laws are constructed; operations that need a finite mean
/// reject them.
pub fn make_distribution(kind: FamilyKind, params: &[f64]) -> Result<HeavyDistribution> {
    let expected = match kind {
        FamilyKind::Exponential | FamilyKind::Deterministic => 1,
        _ => 2,
    };
    if params.len() != expected {
        return Err(Error::invalid(
            kind.name(),
            format!("expected {expected} parameter(s), got {}", params.len()),
        ));
    }
    match kind {
        FamilyKind::Pareto => HeavyDistribution::pareto(params[0], params[1]),
        FamilyKind::Weibull => HeavyDistribution::weibull(params[0], params[1]),
        FamilyKind::Lognormal => HeavyDistribution::lognormal(params[0], params[1]),
        FamilyKind::Exponential => HeavyDistribution::exponential(params[0]),
        FamilyKind::Deterministic => HeavyDistribution::deterministic(params[0]),
    }
}

fn positive_finite(family: &'static str, name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(family, format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(family: &'static str, name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(family, format!("{name} must be finite, got {v}")))
    }
}

impl HeavyDistribution {
    fn from_family_unchecked(family: Family) -> Self {
        let classes = family.classes();
        let mean = family.analytic_mean();
        HeavyDistribution { family, classes, mean }
    }

    pub fn pareto(alpha: f64, xm: f64) -> Result<Self> {
        positive_finite("pareto", "alpha", alpha)?;
        positive_finite("pareto", "xm", xm)?;
        Ok(Self::from_family_unchecked(Family::Pareto { alpha, xm }))
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        positive_finite("weibull", "shape", shape)?;
        positive_finite("weibull", "scale", scale)?;
        Ok(Self::from_family_unchecked(Family::Weibull { shape, scale }))
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        finite("lognormal", "mu", mu)?;
        positive_finite("lognormal", "sigma", sigma)?;
        Ok(Self::from_family_unchecked(Family::Lognormal { mu, sigma }))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        positive_finite("exponential", "rate", rate)?;
        Ok(Self::from_family_unchecked(Family::Exponential { rate }))
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        finite("deterministic", "value", value)?;
        Ok(Self::from_family_unchecked(Family::Deterministic { value }))
    }

    /// Law of `Z − shift` where `Z` has this law.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        finite("shifted", "shift", shift)?;
        if shift == 0.0 {
            return Ok(self.clone());
        }
        let family = match &self.family {
            Family::Shifted { base, shift: s } => Family::Shifted {
                base: base.clone(),
                shift: s + shift,
            },
            other => Family::Shifted {
                base: Box::new(other.clone()),
                shift,
            },
        };
        Ok(Self::from_family_unchecked(family))
    }

    /// Law of `max(Z, 0)`.
    pub fn positive_part(&self) -> Self {
        match &self.family {
            Family::PositivePart { .. } => self.clone(),
            f if f.lower_support() >= 0.0 => self.clone(),
            f => Self::from_family_unchecked(Family::PositivePart {
                base: Box::new(f.clone()),
            }),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn classes(&self) -> TailClasses {
        self.classes
    }

    /// Analytic mean, `+∞` when it diverges.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn has_finite_mean(&self) -> bool {
        self.mean.is_finite()
    }

    pub(crate) fn require_finite_mean(&self, operation: &'static str) -> Result<f64> {
        if self.mean.is_finite() {
            Ok(self.mean)
        } else {
            Err(Error::InfiniteMean { operation })
        }
    }

    #[inline]
    pub fn tail(&self, x: f64) -> f64 {
        self.family.tail(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.family.tail(x)
    }

    /// Density of the absolutely continuous part; `None` for point masses.
    pub fn density(&self, x: f64) -> Option<f64> {
        if self.family.continuous_mass() == 0.0 {
            None
        } else {
            Some(self.family.density(x))
        }
    }

    pub fn lower_support(&self) -> f64 {
        self.family.lower_support()
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.family.quantile(u)
    }

    /// Inverse-transform draw for a given uniform `u ∈ [0, 1)`.
    pub fn sample_from_uniform(&self, u: f64) -> f64 {
        self.family.quantile(u)
    }

    #[inline]
    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        self.family.sample(rng)
    }

    /// `F̄_I(x) = min(1, ∫_x^∞ F̄(v) dv)`.
    pub fn integrated_tail(&self, x: f64) -> Result<f64> {
        let q = tailmath::tail_integral(self, x, f64::INFINITY)?;
        Ok(q.value.min(1.0))
    }

    /// `E[h(X); X ≤ y_max]`, integrating over the tail level `v = P(X > y)`
    /// so that density singularities and heavy tails stay bounded.
    /// `h` must be finite on the support below `y_max` (and at `+∞` when
    /// `y_max` is infinite).
    pub fn expect_below<H: Fn(f64) -> f64>(&self, h: H, y_max: f64, rel_tol: f64) -> Result<Quadrature> {
        let mut total = Quadrature::ZERO;
        for (loc, mass) in self.family.atoms() {
            if loc <= y_max {
                total.value += mass * h(loc);
            }
        }
        let cm = self.family.continuous_mass();
        if cm > 0.0 {
            let v_lo = if y_max.is_infinite() {
                0.0
            } else {
                self.family.tail(y_max).min(cm)
            };
            if v_lo < cm {
                let family = &self.family;
                let q = quad::adaptive_simpson(|v| h(family.inverse_tail(v)), v_lo, cm, rel_tol)?;
                total = total + q;
            }
        }
        Ok(total)
    }
}

impl fmt::Display for HeavyDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.family.fmt(f)
    }
}

/// The integrated tail law `F_I` of a finite-mean distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedTail {
    base: HeavyDistribution,
}

impl IntegratedTail {
    pub fn new(base: HeavyDistribution) -> Result<Self> {
        base.require_finite_mean("integrated tail")?;
        Ok(IntegratedTail { base })
    }

    pub fn base(&self) -> &HeavyDistribution {
        &self.base
    }

    pub fn tail(&self, x: f64) -> Result<f64> {
        self.base.integrated_tail(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn pareto_basics() {
        let d = HeavyDistribution::pareto(2.0, 1.0).unwrap();
        assert_eq!(d.mean(), 2.0);
        assert!(close(d.tail(10.0), 0.01, 1e-15));
        assert_eq!(d.tail(0.5), 1.0);
        assert!(d.classes().strong_subexponential);
    }

    #[test]
    fn exponential_is_light() {
        let d = make_distribution(FamilyKind::Exponential, &[1.0]).unwrap();
        assert_eq!(
            d.classes(),
            TailClasses {
                light_tailed: true,
                ..TailClasses::default()
            }
        );
    }

    #[test]
    fn infinite_mean_is_flagged_not_rejected() {
        let d = make_distribution(FamilyKind::Pareto, &[0.5, 1.0]).unwrap();
        assert!(d.mean().is_infinite());
        assert!(!d.classes().strong_subexponential);
        assert!(matches!(d.integrated_tail(0.0), Err(Error::InfiniteIntegral(_)) | Err(Error::InfiniteMean { .. })));
        assert!(HeavyDistribution::pareto(1.0, 1.0).unwrap().mean().is_infinite());
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(
            make_distribution(FamilyKind::Pareto, &[0.0, 1.0]),
            Err(Error::InvalidParameter { family: "pareto", .. })
        ));
        assert!(make_distribution(FamilyKind::Pareto, &[-1.0, 1.0]).is_err());
        assert!(make_distribution(FamilyKind::Weibull, &[0.5]).is_err());
        assert!(make_distribution(FamilyKind::Lognormal, &[0.0, 0.0]).is_err());
        assert!(make_distribution(FamilyKind::Exponential, &[f64::NAN]).is_err());
    }

    #[test]
    fn means() {
        let w = HeavyDistribution::weibull(0.5, 1.0).unwrap();
        assert!(close(w.mean(), 2.0, 1e-12));
        assert_eq!(HeavyDistribution::exponential(2.0).unwrap().mean(), 0.5);
        let ln = HeavyDistribution::lognormal(0.0, 1.0).unwrap();
        assert!(close(ln.mean(), 0.5f64.exp(), 1e-14));
        let y = HeavyDistribution::pareto(2.0, 1.0).unwrap().shifted(3.0).unwrap();
        assert_eq!(y.mean(), -1.0);
    }

    #[test]
    fn lognormal_median() {
        let d = HeavyDistribution::lognormal(0.0, 1.0).unwrap();
        assert!(close(d.tail(1.0), 0.5, 1e-14));
    }

    #[test]
    fn deterministic_sampling() {
        let d = HeavyDistribution::deterministic(3.0).unwrap();
        let mut rng = RandomStream::new(1);
        assert!((0..100).all(|_| d.sample(&mut rng) == 3.0));
    }

    #[test]
    fn pareto_inverse_transform() {
        let d = HeavyDistribution::pareto(2.0, 1.0).unwrap();
        let x = d.sample_from_uniform(0.25);
        assert!(close(x, 0.75f64.powf(-0.5), 1e-15));
        // tail at the draw equals 1 − u
        assert!(close(d.tail(x), 0.75, 1e-14));
    }

    #[test]
    fn quantile_inverts_tail() {
        let laws = [
            HeavyDistribution::pareto(1.5, 2.0).unwrap(),
            HeavyDistribution::weibull(0.5, 3.0).unwrap(),
            HeavyDistribution::lognormal(0.3, 1.2).unwrap(),
            HeavyDistribution::exponential(0.7).unwrap(),
            HeavyDistribution::pareto(1.5, 1.0).unwrap().shifted(4.0).unwrap(),
        ];
        for d in &laws {
            for &u in &[0.01, 0.3, 0.5, 0.9, 0.999] {
                let x = d.quantile(u);
                assert!(close(d.cdf(x), u, 1e-9), "{d}: u={u} x={x} cdf={}", d.cdf(x));
                assert!(close(d.family().inverse_tail(1.0 - u), x, 1e-9), "{d}");
            }
        }
    }

    #[test]
    fn shifted_tail_and_positive_part() {
        let y = HeavyDistribution::pareto(2.0, 1.0).unwrap().shifted(3.0).unwrap();
        assert!(close(y.tail(10.0), 13f64.powi(-2), 1e-14));
        assert_eq!(y.tail(-2.5), 1.0);
        let b = y.positive_part();
        assert!(close(b.tail(10.0), 13f64.powi(-2), 1e-14));
        assert_eq!(b.tail(-0.1), 1.0);
        assert!(close(b.tail(0.0), 1.0 / 9.0, 1e-14));
        assert_eq!(b.lower_support(), 0.0);
        let atoms = b.family().atoms();
        assert_eq!(atoms.len(), 1);
        assert!(close(atoms[0].1, 8.0 / 9.0, 1e-14));
        // E[Y⁺] = ∫_0^∞ (v+3)^{-2} dv = 1/3
        assert!(close(b.mean(), 1.0 / 3.0, 1e-12));
    }

    #[test]
    fn positive_part_of_nonnegative_law_is_itself() {
        let d = HeavyDistribution::pareto(2.0, 1.0).unwrap();
        assert_eq!(d.positive_part(), d);
    }

    #[test]
    fn integrated_tail_examples() {
        let d = HeavyDistribution::pareto(2.0, 1.0).unwrap();
        assert!(close(d.integrated_tail(10.0).unwrap(), 0.1, 1e-14));
        assert_eq!(d.integrated_tail(0.5).unwrap(), 1.0);
        let e = HeavyDistribution::exponential(1.0).unwrap();
        assert!(close(e.integrated_tail(5.0).unwrap(), (-5f64).exp(), 1e-14));
        let it = IntegratedTail::new(d).unwrap();
        assert!(close(it.tail(20.0).unwrap(), 0.05, 1e-14));
        assert!(IntegratedTail::new(HeavyDistribution::pareto(1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn expect_below_matches_moments() {
        let d = HeavyDistribution::exponential(2.0).unwrap();
        let m = d.expect_below(|y| y, f64::INFINITY, 1e-10);
        // h(∞) = ∞ is not allowed; truncate instead
        assert!(m.is_err());
        let m = d.expect_below(|y| y, 5.0, 1e-10).unwrap();
        // E[X; X ≤ 5] = 1/2 − (5 + 1/2) e^{-10}
        let exact = 0.5 - 5.5 * (-10f64).exp();
        assert!(close(m.value, exact, 1e-9));
        let p = HeavyDistribution::pareto(2.0, 1.0).unwrap().shifted(3.0).unwrap().positive_part();
        let q = p.expect_below(|_| 1.0, f64::INFINITY, 1e-10).unwrap();
        assert!(close(q.value, 1.0, 1e-10));
    }
}
