//! Weights whose kernel is pinched between two multiples of `(1 + N||t||)^{-theta}`.
//!
//! `Phi(N, n)` is proportional to `F^(n) G^(n)` where `F(t) = (1 + N||t||)^{-theta}`
//! and `G` is the `j`-th power of the normalized Fejer kernel.

use crate::error::{param, Error, Result};
use crate::numerics::{frac_mul, gauss_legendre, legendre_all, spherical_bessel, unit, CompensatedSum};

/// Legendre degree used on each panel.
const PANEL_DEGREE: usize = 22;
const MAX_DEPTH: u32 = 48;

struct Panel {
    center: f64,
    half: f64,
    coeffs: Vec<f64>,
}

/// Piecewise Legendre model of a smooth function on an interval, used to
/// integrate it against `cos(2 pi n t)` for any `n` at fixed cost (Filon's idea).
pub(crate) struct FilonIntegrator {
    panels: Vec<Panel>,
}

impl FilonIntegrator {
    pub(crate) fn build(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Self> {
        let (nodes, weights) = gauss_legendre(PANEL_DEGREE + 2);
        let mut poly = vec![0.0; PANEL_DEGREE + 1];
        let mut panels = Vec::new();
        let mut stack = vec![(a, b, 0u32)];
        while let Some((lo, hi, depth)) = stack.pop() {
            let center = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let mut coeffs = vec![0.0; PANEL_DEGREE + 1];
            for (&s, &w) in nodes.iter().zip(&weights) {
                let fx = f(center + half * s);
                legendre_all(s, &mut poly);
                for (c, p) in coeffs.iter_mut().zip(&poly) {
                    *c += w * fx * p;
                }
            }
            for (l, c) in coeffs.iter_mut().enumerate() {
                *c *= (2 * l + 1) as f64 / 2.0;
            }
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::Numeric {
                    n: 0,
                    reason: format!("integrand not finite on [{lo}, {hi}]"),
                });
            }
            let tail = coeffs[PANEL_DEGREE].abs() + coeffs[PANEL_DEGREE - 1].abs();
            if tail <= tol {
                panels.push(Panel { center, half, coeffs });
            } else if depth >= MAX_DEPTH {
                return Err(Error::Numeric {
                    n: 0,
                    reason: format!("quadrature did not reach tolerance {tol:e} near t = {center}"),
                });
            } else {
                stack.push((center, hi, depth + 1));
                stack.push((lo, center, depth + 1));
            }
        }
        panels.sort_by(|p, q| p.center.total_cmp(&q.center));
        Ok(Self { panels })
    }

    /// `integral of f(t) cos(2 pi n t)` over the interval.
    pub(crate) fn cos_moment(&self, n: i64) -> f64 {
        let mut jl = vec![0.0; PANEL_DEGREE + 1];
        let mut total = CompensatedSum::new();
        for panel in &self.panels {
            let kappa = 2.0 * std::f64::consts::PI * (n as f64).abs() * panel.half;
            spherical_bessel(kappa, &mut jl);
            // sum a_l * 2 i^l j_l(kappa)
            let (mut re, mut im) = (0.0, 0.0);
            for (l, (&a, &j)) in panel.coeffs.iter().zip(&jl).enumerate() {
                let v = 2.0 * a * j;
                match l % 4 {
                    0 => re += v,
                    1 => im += v,
                    2 => re -= v,
                    _ => im -= v,
                }
            }
            let phase = unit(frac_mul(n, panel.center));
            total.add(panel.half * (phase.re * re - phase.im * im));
        }
        total.value()
    }

    #[cfg(test)]
    pub(crate) fn panel_count(&self) -> usize {
        self.panels.len()
    }
}

/// Fourier coefficients `F^(0), .., F^(max_n)` of `(1 + N||t||)^{-theta}`.
pub(crate) fn decay_profile_coefficients(theta: f64, n: u64, max_n: i64, tol: f64) -> Result<Vec<f64>> {
    let scale = n as f64;
    let quad = FilonIntegrator::build(|t| (1.0 + scale * t).powf(-theta), 0.0, 0.5, tol)?;
    (0..=max_n)
        .map(|k| {
            let v = 2.0 * quad.cos_moment(k);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Numeric {
                    n: k,
                    reason: "non-finite Fourier coefficient".into(),
                })
            }
        })
        .collect()
}

fn binomial_i128(n: i128, k: i128) -> Option<i128> {
    if k < 0 || k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Coefficients of `(1 + z + .. + z^{N-1})^{2j}`, i.e. the `j`-fold self-convolution
/// of the sequence `N - |k|`, via inclusion-exclusion in exact integer arithmetic.
fn fejer_power_exact(n: u64, j: u32) -> Option<Vec<f64>> {
    let big_n = n as i128;
    let two_j = 2 * j as i128;
    let len = (two_j * (big_n - 1) + 1) as usize;
    let mut out = Vec::with_capacity(len);
    let signs: Vec<i128> = (0..=two_j).map(|r| binomial_i128(two_j, r)).collect::<Option<_>>()?;
    for s in 0..len as i128 {
        let mut acc: i128 = 0;
        let mut r = 0;
        while r <= two_j && big_n * r <= s {
            let term = signs[r as usize].checked_mul(binomial_i128(s - big_n * r + two_j - 1, two_j - 1)?)?;
            acc = if r % 2 == 0 { acc.checked_add(term)? } else { acc.checked_sub(term)? };
            r += 1;
        }
        out.push(acc as f64);
    }
    Some(out)
}

/// Same coefficients by repeated direct convolution in floating point.
fn fejer_power_direct(n: u64, j: u32) -> Vec<f64> {
    let base: Vec<f64> = (-(n as i64 - 1)..=(n as i64 - 1)).map(|k| (n as i64 - k.abs()) as f64).collect();
    let mut acc = vec![1.0];
    for _ in 0..j {
        let mut next = vec![0.0; acc.len() + base.len() - 1];
        for (i, &a) in acc.iter().enumerate() {
            for (k, &b) in base.iter().enumerate() {
                next[i + k] += a * b;
            }
        }
        acc = next;
    }
    acc
}

/// `G^(n)` for `n = -(N-1)j ..= (N-1)j`, including the `N^{1-2j}` scaling.
pub(crate) fn fejer_power_coefficients(n: u64, j: u32) -> Vec<f64> {
    let raw = fejer_power_exact(n, j).unwrap_or_else(|| fejer_power_direct(n, j));
    let scale = (n as f64).powi(1 - 2 * j as i32);
    raw.into_iter().map(|c| c * scale).collect()
}

/// Unnormalized weights on `|n| <= (N-1)j`, lowest index first.
pub(crate) fn raw_weights(theta: f64, j: u32, n: u64, quad_tol: f64) -> Result<Vec<f64>> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(param(format!("two_sided theta must be positive, got {theta}")));
    }
    if j == 0 {
        return Err(param("two_sided j must be at least 1"));
    }
    if ((2 * j - 1) as f64) < theta {
        return Err(param(format!("two_sided requires 2j - 1 >= theta (j = {j}, theta = {theta})")));
    }
    if !(quad_tol > 0.0 && quad_tol.is_finite()) {
        return Err(param(format!("quad_tol must be positive, got {quad_tol}")));
    }
    let deg = (n as i64 - 1) * j as i64;
    let f_hat = decay_profile_coefficients(theta, n, deg, quad_tol)?;
    let g_hat = fejer_power_coefficients(n, j);
    Ok((-deg..=deg)
        .map(|k| f_hat[k.unsigned_abs() as usize] * g_hat[(k + deg) as usize])
        .collect())
}
