//! Globally adaptive 15-point Gauss–Kronrod quadrature for 1-D integrals.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for [`integrate_complex`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Initial uniform split of `[a, b]`; raise it for strongly oscillatory integrands.
    pub initial_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_intervals: 20_000,
            initial_intervals: 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).norm();
    (value, error)
}

/// Integrates a complex-valued `f` over `[a, b]`.
///
/// Splits the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_complex<F>(f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<AdaptiveResult>
where
    F: Fn(f64) -> Complex64,
{
    if a == b {
        return Ok(AdaptiveResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            intervals: 0,
        });
    }
    let n0 = opts.initial_intervals.max(1);
    let mut heap = BinaryHeap::with_capacity(n0 * 2);
    let h = (b - a) / n0 as f64;
    for i in 0..n0 {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == n0 { b } else { lo + h };
        let (value, error) = kronrod(&f, lo, hi);
        heap.push(Segment { a: lo, b: hi, value, error });
    }
    loop {
        let (total, err) = heap.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), s| {
            (v + s.value, e + s.error)
        });
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::NoConvergence(format!(
                "non-finite integrand on [{a:e}, {b:e}]"
            )));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
            return Ok(AdaptiveResult {
                value: total,
                error: err,
                intervals: heap.len(),
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::NoConvergence(format!(
                "{} intervals on [{a:e}, {b:e}], error estimate {err:e} vs |I| = {:e}",
                heap.len(),
                total.norm()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in f64
            return Ok(AdaptiveResult {
                value: total,
                error: err,
                intervals: heap.len() + 1,
            });
        }
        let (v1, e1) = kronrod(&f, worst.a, mid);
        let (v2, e2) = kronrod(&f, mid, worst.b);
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

/// Real-valued convenience wrapper around [`integrate_complex`].
pub fn integrate_real<F>(f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, opts)?;
    Ok((r.value.re, r.error))
}
