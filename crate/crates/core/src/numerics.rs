//! Floating-point building blocks shared by the kernels and the lattice code.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated accumulator for complex values (real and imaginary parts kept separately).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().value()
}

/// Error-free product: `a * b == hi + lo` exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    (hi, lo)
}

/// Fractional part in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly negative can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `k * t mod 1` with the product formed exactly before reduction.
///
/// `k` must be exactly representable (|k| <= 2^53).
#[inline]
pub fn frac_mul(k: i64, t: f64) -> f64 {
    let (hi, lo) = two_prod(k as f64, t);
    frac(frac(hi) + lo)
}

/// `e^{2 pi i phase}` with the phase first folded into `[-1/2, 1/2)`.
#[inline]
pub fn unit(phase: f64) -> Complex64 {
    let mut p = phase - phase.round();
    if p == 0.5 {
        p = -0.5;
    }
    let (s, c) = (2.0 * PI * p).sin_cos();
    Complex64::new(c, s)
}

/// `sin(pi * k * u)` computed from `k * u / 2 mod 1`, so large `k` loses no accuracy.
#[inline]
pub fn sin_pi_mul(k: i64, u: f64) -> f64 {
    let r = frac_mul(k, 0.5 * u);
    let r = if r >= 0.5 { r - 1.0 } else { r };
    (2.0 * PI * r).sin()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Legendre polynomials `P_0(x) .. P_deg(x)` written into `out`.
pub fn legendre_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

/// Spherical Bessel functions `j_0(x) .. j_{len-1}(x)` for `x >= 0`.
///
/// Power series for small arguments, Miller's downward recurrence while the
/// order exceeds the argument, upward recurrence otherwise.
pub fn spherical_bessel(x: f64, out: &mut [f64]) {
    let len = out.len();
    if len == 0 {
        return;
    }
    if x < 1.0 {
        let mut lead = 1.0; // x^l / (2l+1)!!
        let q = -0.5 * x * x;
        for (l, slot) in out.iter_mut().enumerate() {
            let mut term = 1.0;
            let mut s = 1.0;
            for k in 1..30 {
                term *= q / (k as f64 * (2 * l + 2 * k + 1) as f64);
                s += term;
                if term.abs() < 1e-17 * s.abs() {
                    break;
                }
            }
            *slot = lead * s;
            lead *= x / (2 * l + 3) as f64;
        }
        return;
    }
    let top = len - 1;
    if x > top as f64 + 1.0 {
        let (s, c) = x.sin_cos();
        out[0] = s / x;
        if len > 1 {
            out[1] = s / (x * x) - c / x;
        }
        for l in 1..top {
            out[l + 1] = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
        }
        return;
    }
    let start = top + 20 + x.ceil() as usize;
    let mut above = 0.0;
    let mut cur = 1e-300;
    for l in (1..=start).rev() {
        let below = (2 * l + 1) as f64 / x * cur - above;
        above = cur;
        cur = below;
        if l - 1 <= top {
            out[l - 1] = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            above *= 1e-250;
            for v in out.iter_mut().skip(l.saturating_sub(1)) {
                *v *= 1e-250;
            }
        }
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let factor = if j0.abs() >= j1.abs() { j0 / out[0] } else { j1 / out[1.min(top)] };
    for v in out.iter_mut() {
        *v *= factor;
    }
}
