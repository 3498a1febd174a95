//! Enumeration of integer frequency vectors.

use crate::error::{Error, Result};

/// Default cap on the number of lattice points a single enumeration may visit.
pub const ENUMERATION_BUDGET: f64 = 1e8;

pub(crate) fn check_budget(points: f64) -> Result<()> {
    if points > ENUMERATION_BUDGET {
        return Err(Error::Budget {
            needed: points,
            limit: ENUMERATION_BUDGET,
        });
    }
    Ok(())
}

/// Visits every `m` in `[-b, b]^d` in lexicographic order.
pub fn for_each_in_box(d: usize, b: i64, mut f: impl FnMut(&[i64])) {
    let mut m = vec![-b; d];
    if d == 0 {
        return;
    }
    loop {
        f(&m);
        let mut i = d;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if m[i] < b {
                m[i] += 1;
                break;
            }
            m[i] = -b;
        }
    }
}

/// True when the first nonzero coordinate of `m` is positive.
#[inline]
pub fn is_representative(m: &[i64]) -> bool {
    m.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

#[inline]
pub fn norm_sq(m: &[i64]) -> f64 {
    m.iter().map(|&c| (c as f64) * (c as f64)).sum()
}

#[inline]
pub fn norm_inf(m: &[i64]) -> i64 {
    m.iter().map(|c| c.abs()).max().unwrap_or(0)
}

/// Representatives `m` (one per `±` pair) with `0 < |m| < r`, or `<= r` when `inclusive`.
pub fn ball_representatives(d: usize, r: f64, inclusive: bool) -> Result<Vec<Vec<i64>>> {
    if d == 0 {
        return Err(crate::error::param("dimension must be at least 1"));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(crate::error::param(format!("radius must be positive, got {r}")));
    }
    let b = r.floor() as i64;
    check_budget((2.0 * b as f64 + 1.0).powi(d as i32) / 2.0)?;
    let r2 = r * r;
    let mut out = Vec::new();
    for_each_in_box(d, b, |m| {
        if !is_representative(m) {
            return;
        }
        let n2 = norm_sq(m);
        if n2 < r2 || (inclusive && n2 == r2) {
            out.push(m.to_vec());
        }
    });
    Ok(out)
}
