//! Adaptive Gauss-Kronrod (7/15) quadrature in `f64`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    /// Integral of `|f|`; tolerances are relative to this.
    pub magnitude: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    magnitude: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Returns (value, integral of |f|, error estimate) on one segment.
fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    let mut abs = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (lo, hi) = (f(c - dx), f(c + dx));
        kron += WGK[j] * (lo + hi);
        abs += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    (kron * h, abs * h.abs(), ((kron - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]`, bisecting the worst segment until the
/// error estimate drops below `max(abs_tol, rel_tol * int |f|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_segments: usize) -> Integral {
    let (value, magnitude, error) = kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, magnitude, error });
    let mut total = value;
    let mut total_abs = magnitude;
    let mut total_err = error;
    let mut evaluations = 15;
    loop {
        if total_err <= abs_tol.max(rel_tol * total_abs) {
            break;
        }
        if heap.len() >= max_segments {
            break;
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, m1, e1) = kronrod(&f, worst.a, mid);
        let (v2, m2, e2) = kronrod(&f, mid, worst.b);
        evaluations += 30;
        heap.push(Segment { a: worst.a, b: mid, value: v1, magnitude: m1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, magnitude: m2, error: e2 });
        // Re-sum rather than update incrementally to avoid drift.
        total = heap.iter().map(|s| s.value).sum();
        total_abs = heap.iter().map(|s| s.magnitude).sum();
        total_err = heap.iter().map(|s| s.error).sum();
    }
    let converged = total.is_finite() && total_err <= abs_tol.max(rel_tol * total_abs);
    Integral { value: total, abs_error: total_err, magnitude: total_abs, evaluations, converged }
}

/// Integrates over `[a, inf)` in panels of doubling width.
///
/// Stops after two consecutive panels contribute less than a small
/// fraction of the running `int |f|`, or once `t` exceeds `t_max`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, t_max: f64, rel_tol: f64) -> Integral {
    let mut total = 0.0;
    let mut total_abs = 0.0;
    let mut err = 0.0;
    let mut evaluations = 0;
    let mut converged = true;
    let mut lo = a;
    let mut width = 1.0;
    let mut quiet = 0;
    while lo < t_max {
        let hi = (lo + width).min(t_max);
        let panel = integrate(&f, lo, hi, 1e-300, 0.1 * rel_tol, 2000);
        evaluations += panel.evaluations;
        total += panel.value;
        total_abs += panel.magnitude;
        err += panel.abs_error;
        converged &= panel.converged || panel.abs_error <= 0.1 * rel_tol * total_abs;
        if total_abs != 0.0 && panel.magnitude <= 1e-3 * rel_tol * total_abs {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    converged &= total.is_finite() && err <= rel_tol * total_abs.max(f64::MIN_POSITIVE);
    Integral {
        value: total,
        abs_error: err,
        magnitude: total_abs,
        evaluations,
        converged: converged || (total == 0.0 && err == 0.0),
    }
}
