//! Adaptive Simpson quadrature.
//!
//! Finite intervals use globally adaptive bisection: the panel with the
//! largest Richardson error estimate is split until the summed error falls
//! below `rel_tol * |value|` (with an absolute floor of [`ABS_FLOOR`]).
//! Semi-infinite intervals are covered by panels of doubling width; the
//! sum is closed with a geometric remainder estimated from the last two
//! panels, which is exact in the limit for power-law integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Absolute error floor, keeps underflowing integrands from looping.
pub const ABS_FLOOR: f64 = 1e-300;

const INITIAL_PANELS: usize = 8;
const MAX_PANELS: usize = 400_000;
const MAX_DOUBLINGS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
}

impl Quadrature {
    pub const ZERO: Quadrature = Quadrature {
        value: 0.0,
        error: 0.0,
    };

    pub fn scale(self, factor: f64) -> Quadrature {
        Quadrature {
            value: self.value * factor,
            error: self.error * factor.abs(),
        }
    }
}

impl std::ops::Add for Quadrature {
    type Output = Quadrature;

    fn add(self, rhs: Quadrature) -> Quadrature {
        Quadrature {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fq1: f64,
    fm: f64,
    fq3: f64,
    fb: f64,
    value: f64,
    error: f64,
}

impl Panel {
    fn new(a: f64, b: f64, fa: f64, fq1: f64, fm: f64, fq3: f64, fb: f64) -> Panel {
        let h = b - a;
        let coarse = h / 6.0 * (fa + 4.0 * fm + fb);
        let fine = h / 12.0 * (fa + 4.0 * fq1 + 2.0 * fm + 4.0 * fq3 + fb);
        let diff = (fine - coarse) / 15.0;
        Panel {
            a,
            b,
            fa,
            fq1,
            fm,
            fq3,
            fb,
            value: fine + diff,
            error: diff.abs(),
        }
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Quadrature(format!("integrand is {y} at {x}")))
    }
}

/// Integrates `f` over `[a, b]` (finite bounds) to relative tolerance `rel_tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("bounds must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature::ZERO);
    }
    if b < a {
        return adaptive_simpson(f, b, a, rel_tol).map(|q| q.scale(-1.0));
    }

    let mut heap = BinaryHeap::with_capacity(64);
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut left = eval(&f, a)?;
    for i in 0..INITIAL_PANELS {
        let pa = a + width * i as f64;
        let pb = if i + 1 == INITIAL_PANELS { b } else { pa + width };
        let pm = 0.5 * (pa + pb);
        let right = eval(&f, pb)?;
        let panel = Panel::new(
            pa,
            pb,
            left,
            eval(&f, 0.5 * (pa + pm))?,
            eval(&f, pm)?,
            eval(&f, 0.5 * (pm + pb))?,
            right,
        );
        heap.push(panel);
        left = right;
    }

    let mut value: f64 = heap.iter().map(|p| p.value).sum();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        if error <= (rel_tol * value.abs()).max(ABS_FLOOR) {
            break;
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {MAX_PANELS} panels (value {value}, error {error})"
            )));
        }
        let p = heap.pop().expect("heap is never empty");
        // Panels narrower than the floating-point spacing cannot be refined.
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            heap.push(Panel { error: 0.0, ..p });
            error -= p.error;
            continue;
        }
        let left = Panel::new(
            p.a,
            mid,
            p.fa,
            eval(&f, 0.5 * (p.a + 0.5 * (p.a + mid)))?,
            p.fq1,
            eval(&f, 0.5 * (0.5 * (p.a + mid) + mid))?,
            p.fm,
        );
        let right = Panel::new(
            mid,
            p.b,
            p.fm,
            eval(&f, 0.5 * (mid + 0.5 * (mid + p.b)))?,
            p.fq3,
            eval(&f, 0.5 * (0.5 * (mid + p.b) + p.b))?,
            p.fb,
        );
        value += left.value + right.value - p.value;
        error += left.error + right.error - p.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed accumulated cancellation in the running totals.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Quadrature { value, error })
}

/// Integrates an eventually nonincreasing, nonnegative `f` over `[a, ∞)`.
///
/// `scale` sets the width of the first panel.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, rel_tol: f64) -> Result<Quadrature> {
    if !a.is_finite() {
        return Err(Error::Quadrature(format!("lower bound must be finite, got {a}")));
    }
    let mut lo = a;
    let mut width = if scale > 0.0 { scale } else { 1.0 };
    let mut total = Quadrature::ZERO;
    let mut previous: Option<f64> = None;
    for _ in 0..MAX_DOUBLINGS {
        let hi = lo + width;
        if !hi.is_finite() {
            break;
        }
        let panel = adaptive_simpson(&f, lo, hi, rel_tol)?;
        total = total + panel;
        if let Some(prev) = previous {
            if panel.value <= 0.0 && prev <= 0.0 {
                return Ok(total);
            }
            if prev > 0.0 {
                let ratio = panel.value / prev;
                if ratio < 1.0 {
                    let remainder = panel.value * ratio / (1.0 - ratio);
                    if remainder <= (rel_tol * total.value.abs()).max(ABS_FLOOR) {
                        return Ok(Quadrature {
                            value: total.value + remainder,
                            error: total.error + remainder,
                        });
                    }
                }
            }
        }
        previous = Some(panel.value);
        lo = hi;
        width *= 2.0;
    }
    Err(Error::InfiniteIntegral(format!(
        "integral over [{a}, inf) did not settle (partial value {})",
        total.value
    )))
}
