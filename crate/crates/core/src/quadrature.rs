//! Adaptive quadrature.
//!
//! Two rules are provided: an adaptive Simpson rule for scalar integrands and a
//! globally adaptive Gauss–Kronrod (7/15) rule that works on vector-valued
//! integrands, which the covariance code uses to integrate whole matrices.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("integration bounds must be finite, got [{a}, {b}]")]
    NonFiniteBounds { a: f64, b: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },
    #[error("subdivision limit {limit} reached (error estimate {estimate:e})")]
    SubdivisionLimit { limit: usize, estimate: f64 },
}

/// Adaptive Simpson rule with an absolute error target.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveSimpson {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for AdaptiveSimpson {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_subdivisions: 1_000_000,
        }
    }
}

struct SimpsonPanel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
}

impl AdaptiveSimpson {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64, QuadratureError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(QuadratureError::NonFiniteBounds { a, b });
        }
        if a == b {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let eval = |x: f64| {
            let y = f(x);
            if y.is_finite() {
                Ok(y)
            } else {
                Err(QuadratureError::NonFiniteIntegrand { x })
            }
        };
        let fa = eval(lo)?;
        let fb = eval(hi)?;
        let m = 0.5 * (lo + hi);
        let fm = eval(m)?;
        let mut stack = vec![SimpsonPanel {
            a: lo,
            b: hi,
            fa,
            fm,
            fb,
            whole: simpson(lo, hi, fa, fm, fb),
            tol: self.abs_tol,
        }];
        let mut total = 0.0;
        let mut comp = 0.0;
        let mut subdivisions = 0usize;
        while let Some(p) = stack.pop() {
            let m = 0.5 * (p.a + p.b);
            let lm = 0.5 * (p.a + m);
            let rm = 0.5 * (m + p.b);
            let flm = eval(lm)?;
            let frm = eval(rm)?;
            let left = simpson(p.a, m, p.fa, flm, p.fm);
            let right = simpson(m, p.b, p.fm, frm, p.fb);
            let delta = left + right - p.whole;
            let tiny = (p.b - p.a) <= 64.0 * f64::EPSILON * p.a.abs().max(p.b.abs()).max(1.0);
            if delta.abs() <= 15.0 * p.tol || tiny {
                neumaier_add(&mut total, &mut comp, left + right + delta / 15.0);
                continue;
            }
            subdivisions += 1;
            if subdivisions > self.max_subdivisions {
                return Err(QuadratureError::SubdivisionLimit {
                    limit: self.max_subdivisions,
                    estimate: delta.abs(),
                });
            }
            let tol = 0.5 * p.tol;
            stack.push(SimpsonPanel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, tol });
            stack.push(SimpsonPanel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol });
        }
        Ok(sign * (total + comp))
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Compensated accumulation step.
pub fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Compensated sum of a sequence.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for v in values {
        neumaier_add(&mut s, &mut c, v);
    }
    s + c
}

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
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Globally adaptive Gauss–Kronrod 7/15 rule.
#[derive(Debug, Clone, Copy)]
pub struct GaussKronrod {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for GaussKronrod {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_subdivisions: 20_000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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

impl GaussKronrod {
    /// Integrates a scalar function.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<f64, QuadratureError> {
        let v = self.integrate_vec(1, |x, out| out[0] = f(x), a, b)?;
        Ok(v[0])
    }

    /// Integrates a vector-valued function of dimension `dim`; `f(x, out)` fills `out`.
    ///
    /// The stopping rule compares the summed Kronrod-minus-Gauss difference (max norm)
    /// against `max(abs_tol, rel_tol * |I|_max)`.
    pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(
        &self,
        dim: usize,
        mut f: F,
        a: f64,
        b: f64,
    ) -> Result<Vec<f64>, QuadratureError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(QuadratureError::NonFiniteBounds { a, b });
        }
        if a == b || dim == 0 {
            return Ok(vec![0.0; dim]);
        }
        let mut scratch = vec![0.0; dim];
        let first = self.panel(&mut f, a, b, &mut scratch)?;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        let mut subdivisions = 0usize;
        loop {
            let (total, error) = totals(&heap, dim);
            let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if error <= self.abs_tol.max(self.rel_tol * scale) {
                return Ok(total);
            }
            if subdivisions >= self.max_subdivisions {
                return Err(QuadratureError::SubdivisionLimit {
                    limit: self.max_subdivisions,
                    estimate: error,
                });
            }
            let worst = heap.pop().expect("heap holds at least one panel");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval can no longer be split in floating point
                heap.push(Panel { error: 0.0, ..worst });
                continue;
            }
            heap.push(self.panel(&mut f, worst.a, mid, &mut scratch)?);
            heap.push(self.panel(&mut f, mid, worst.b, &mut scratch)?);
            subdivisions += 1;
        }
    }

    fn panel<F: FnMut(f64, &mut [f64])>(
        &self,
        f: &mut F,
        a: f64,
        b: f64,
        scratch: &mut [f64],
    ) -> Result<Panel, QuadratureError> {
        let dim = scratch.len();
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut kron = vec![0.0; dim];
        let mut gauss = vec![0.0; dim];
        let mut add = |x: f64, wk: f64, wg: f64, scratch: &mut [f64]| -> Result<(), QuadratureError> {
            f(x, scratch);
            for (i, v) in scratch.iter().enumerate() {
                if !v.is_finite() {
                    return Err(QuadratureError::NonFiniteIntegrand { x });
                }
                kron[i] += wk * v;
                gauss[i] += wg * v;
            }
            Ok(())
        };
        add(c, WGK[7], WG[3], scratch)?;
        for j in 0..7 {
            let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
            let dx = h * XGK[j];
            add(c - dx, WGK[j], wg, scratch)?;
            add(c + dx, WGK[j], wg, scratch)?;
        }
        let mut error = 0.0f64;
        for i in 0..dim {
            kron[i] *= h;
            gauss[i] *= h;
            error = error.max((kron[i] - gauss[i]).abs());
        }
        Ok(Panel { a, b, value: kron, error })
    }
}

fn totals(heap: &BinaryHeap<Panel>, dim: usize) -> (Vec<f64>, f64) {
    let mut sum = vec![0.0; dim];
    let mut comp = vec![0.0; dim];
    let mut error = 0.0;
    for p in heap.iter() {
        for i in 0..dim {
            neumaier_add(&mut sum[i], &mut comp[i], p.value[i]);
        }
        error += p.error;
    }
    for i in 0..dim {
        sum[i] += comp[i];
    }
    (sum, error)
}
