//! Nearest-integer distances, test directions and the lattice counting machinery.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::lattice::{ball_representatives, check_budget, for_each_in_box, is_representative, norm_inf};
use crate::numerics::{frac, frac_mul, CompensatedSum};

/// Largest admissible `|m|_inf` for accurate `m . alpha mod 1`.
pub const FREQUENCY_CAP: i64 = 1 << 30;

/// Distances below this are indistinguishable from zero after `frac_dot`.
const SINGULAR_DIST: f64 = 1.0 / (1u64 << 44) as f64;

/// `||t||`, the distance to the nearest integer.
#[inline]
pub fn nearest_int_dist(t: f64) -> f64 {
    (t - t.round()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Golden,
    AlgebraicField,
    RandomSample,
    LiouvilleLike,
    User,
}

/// Claimed Diophantine type: `||m . alpha|| >= h |m|^{-sigma}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiophantineType {
    pub h: Option<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector {
    pub components: Vec<f64>,
    pub metadata: Option<DiophantineType>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl AlphaVector {
    /// Reduces components mod 1 and checks they land in `(0, 1)`.
    pub fn new(components: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if components.is_empty() {
            return Err(param("alpha needs at least one component"));
        }
        let mut reduced = Vec::with_capacity(components.len());
        for c in components {
            if !c.is_finite() {
                return Err(param(format!("alpha component {c} is not finite")));
            }
            let r = frac(c);
            if r == 0.0 {
                return Err(param(format!("alpha component {c} is an integer")));
            }
            reduced.push(r);
        }
        Ok(Self {
            components: reduced,
            metadata: None,
            provenance,
            seed: None,
        })
    }

    pub fn with_metadata(mut self, h: Option<f64>, sigma: f64) -> Result<Self> {
        if let Some(h) = h {
            if !(h > 0.0) {
                return Err(param(format!("H must be positive, got {h}")));
            }
        }
        if sigma < self.dim() as f64 {
            return Err(param(format!("sigma = {sigma} is below the dimension {}", self.dim())));
        }
        if matches!(self.provenance, Provenance::Golden | Provenance::AlgebraicField) && sigma != self.dim() as f64 {
            return Err(param("golden and algebraic directions have sigma = d"));
        }
        self.metadata = Some(DiophantineType { h, sigma });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

/// How to build a test direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaSpec {
    Golden,
    AlgebraicField { d: usize },
    RandomSample {
        d: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    LiouvilleLike { sigma: f64 },
    User { components: Vec<f64> },
}

impl AlphaSpec {
    pub fn needs_seed(&self) -> bool {
        matches!(self, AlphaSpec::RandomSample { .. })
    }
}

/// Empirical Diophantine constant used for the golden ratio.
pub const GOLDEN_H: f64 = 0.38;

pub fn golden() -> AlphaVector {
    AlphaVector::new(vec![(5f64.sqrt() - 1.0) / 2.0], Provenance::Golden)
        .and_then(|a| a.with_metadata(Some(GOLDEN_H), 1.0))
        .expect("golden ratio is a valid direction")
}

/// Sum of `2^{-ceil(sigma^k)}` for `k = 1..`, i.e. the dyadic exponents that matter in double precision.
pub fn liouville_exponents(sigma: f64) -> Result<Vec<i32>> {
    if !(sigma > 1.0 && sigma.is_finite()) {
        return Err(param(format!("liouville_like needs sigma > 1, got {sigma}")));
    }
    let mut exps: Vec<i32> = Vec::new();
    for k in 1..=40 {
        let e = sigma.powi(k).ceil();
        if e > 1100.0 {
            break;
        }
        let e = e as i32;
        if exps.last() != Some(&e) {
            exps.push(e);
        }
    }
    Ok(exps)
}

/// Build `alpha` from a spec. `seed` overrides the seed stored in the spec.
pub fn make_alpha(spec: &AlphaSpec, seed: Option<u64>) -> Result<AlphaVector> {
    match spec {
        AlphaSpec::Golden => Ok(golden()),
        AlphaSpec::AlgebraicField { d } => {
            if *d == 0 {
                return Err(param("algebraic_field needs d >= 1"));
            }
            let comps = (1..=*d).map(|i| 2f64.powf(i as f64 / (*d as f64 + 1.0))).collect();
            AlphaVector::new(comps, Provenance::AlgebraicField)?.with_metadata(None, *d as f64)
        }
        AlphaSpec::RandomSample { d, seed: own } => {
            if *d == 0 {
                return Err(param("random_sample needs d >= 1"));
            }
            let seed = seed.or(*own).ok_or_else(|| param("random_sample needs a seed"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let comps = (0..*d)
                .map(|_| loop {
                    let v: f64 = rng.random();
                    if v > 0.0 {
                        break v;
                    }
                })
                .collect();
            let mut a = AlphaVector::new(comps, Provenance::RandomSample)?;
            a.seed = Some(seed);
            Ok(a)
        }
        AlphaSpec::LiouvilleLike { sigma } => {
            let acc: CompensatedSum = liouville_exponents(*sigma)?.into_iter().map(|e| 2f64.powi(-e)).collect();
            AlphaVector::new(vec![acc.value()], Provenance::LiouvilleLike)
        }
        AlphaSpec::User { components } => AlphaVector::new(components.clone(), Provenance::User),
    }
}

fn check_cap(m: &[i64]) -> Result<()> {
    if norm_inf(m) > FREQUENCY_CAP {
        return Err(Error::Range { m: m.to_vec() });
    }
    Ok(())
}

/// `m . alpha mod 1` on raw slices; callers guarantee the cap.
#[inline]
pub fn frac_dot_slice(m: &[i64], alpha: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (&k, &a) in m.iter().zip(alpha) {
        if k != 0 {
            acc.add(frac_mul(k, a));
        }
    }
    frac(acc.value())
}

/// `m . alpha mod 1` in `[0, 1)`.
pub fn frac_dot(m: &[i64], alpha: &AlphaVector) -> Result<f64> {
    if m.len() != alpha.dim() {
        return Err(param(format!("frequency has dimension {}, alpha has {}", m.len(), alpha.dim())));
    }
    check_cap(m)?;
    Ok(frac_dot_slice(m, &alpha.components))
}

/// `||m . alpha||`.
pub fn dist(m: &[i64], alpha: &AlphaVector) -> Result<f64> {
    frac_dot(m, alpha).map(nearest_int_dist)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRecord {
    pub m: Vec<i64>,
    pub dist: f64,
}

/// Minimizer of `||m . alpha||` over `0 < |m|_inf <= big_m`, one representative per `±` pair.
pub fn dirichlet_search(alpha: &AlphaVector, big_m: u64) -> Result<ResonanceRecord> {
    if big_m == 0 {
        return Err(param("dirichlet_search needs M >= 1"));
    }
    let d = alpha.dim();
    let b = big_m as i64;
    check_cap(&[b])?;
    check_budget((big_m as f64).powi(d as i32))?;
    let mut best: Option<ResonanceRecord> = None;
    if d == 1 {
        for k in 1..=b {
            let v = nearest_int_dist(frac_mul(k, alpha.components[0]));
            if best.as_ref().is_none_or(|r| v < r.dist) {
                best = Some(ResonanceRecord { m: vec![k], dist: v });
            }
        }
    } else {
        for_each_in_box(d, b, |m| {
            if !is_representative(m) {
                return;
            }
            let v = nearest_int_dist(frac_dot_slice(m, &alpha.components));
            if best.as_ref().is_none_or(|r| v < r.dist) {
                best = Some(ResonanceRecord { m: m.to_vec(), dist: v });
            }
        });
    }
    let best = best.expect("search box is nonempty");
    let bound = (big_m as f64).powi(-(d as i32));
    if best.dist > bound * (1.0 + 1e-12) {
        return Err(Error::Numeric {
            n: big_m as i64,
            reason: format!("Dirichlet bound violated: {} > {bound}", best.dist),
        });
    }
    Ok(best)
}

fn ball_distances(alpha: &AlphaVector, r: f64) -> Result<Vec<(Vec<i64>, f64)>> {
    let d = alpha.dim();
    check_budget((2.0 * r).powi(d as i32))?;
    if r <= 1.0 {
        return Ok(Vec::new());
    }
    let reps = ball_representatives(d, r, false)?;
    Ok(reps
        .into_par_iter()
        .map(|m| {
            let v = nearest_int_dist(frac_dot_slice(&m, &alpha.components));
            (m, v)
        })
        .collect())
}

/// `sum over 0 < |m| < R of ||m . alpha||^{-theta}` (both signs of `m`).
pub fn inverse_dist_sum(alpha: &AlphaVector, r: f64, theta: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(param(format!("R must be positive, got {r}")));
    }
    let pts = ball_distances(alpha, r)?;
    if let Some((m, v)) = pts.iter().find(|(_, v)| *v < SINGULAR_DIST) {
        return Err(Error::Singular(format!("||m . alpha|| = {v:e} at m = {m:?}")));
    }
    let total: CompensatedSum = pts.iter().map(|(_, v)| v.powf(-theta)).collect();
    Ok(2.0 * total.value())
}

/// `sum_{n=1}^{ceil((2R)^d)} (n H / (2R)^sigma)^{-theta}`.
pub fn l2_majorant(d: usize, sigma: f64, h: f64, theta: f64, r: f64) -> Result<f64> {
    if d == 0 || !(h > 0.0) || sigma < d as f64 || !(theta > 0.0) || !(r >= 1.0) {
        return Err(param(format!(
            "l2_majorant needs d >= 1, H > 0, sigma >= d, theta > 0, R >= 1 (got d={d}, sigma={sigma}, H={h}, theta={theta}, R={r})"
        )));
    }
    let count = (2.0 * r).powi(d as i32).ceil();
    check_budget(count)?;
    let unit = h / (2.0 * r).powf(sigma);
    let total: CompensatedSum = (1..=count as u64).map(|n| (n as f64 * unit).powf(-theta)).collect();
    Ok(total.value())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OccupancyViolation {
    /// A distance fell below the first interval.
    BelowGap { m: Vec<i64>, dist: f64 },
    /// Two representatives share the interval with index `n`.
    Collision { p: Vec<i64>, q: Vec<i64>, n: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyResult {
    pub ok: bool,
    pub violation: Option<OccupancyViolation>,
}

/// Checks that the values `||m . alpha||`, `0 < |m| < R`, avoid `[0, w)` and fall into distinct
/// intervals `[n w, (n+1) w)`, where `w = H / (2R)^sigma`.
pub fn interval_occupancy_check(alpha: &AlphaVector, r: f64, h: f64, sigma: f64) -> Result<OccupancyResult> {
    if !(h > 0.0) || !(sigma > 0.0) || !(r > 0.0) {
        return Err(param("interval_occupancy_check needs positive R, H and sigma"));
    }
    let mut pts = ball_distances(alpha, r)?;
    let width = h / (2.0 * r).powf(sigma);
    pts.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    if let Some((m, v)) = pts.first() {
        if *v < width {
            return Ok(OccupancyResult {
                ok: false,
                violation: Some(OccupancyViolation::BelowGap { m: m.clone(), dist: *v }),
            });
        }
    }
    let top = 2f64.powf(sigma - 1.0) * r.powf(sigma) / h;
    for pair in pts.windows(2) {
        let (n0, n1) = ((pair[0].1 / width).floor(), (pair[1].1 / width).floor());
        if n0 == n1 && n0 > 0.0 && n0 < top {
            return Ok(OccupancyResult {
                ok: false,
                violation: Some(OccupancyViolation::Collision {
                    p: pair[0].0.clone(),
                    q: pair[1].0.clone(),
                    n: n0 as u64,
                }),
            });
        }
    }
    Ok(OccupancyResult { ok: true, violation: None })
}

/// `min over 0 < |m| <= R of |m|^sigma ||m . alpha||` and its minimizer.
pub fn estimate_diophantine_constant(alpha: &AlphaVector, sigma: f64, r: f64) -> Result<(f64, Vec<i64>)> {
    let reps = ball_representatives(alpha.dim(), r, true)?;
    reps.into_par_iter()
        .map(|m| {
            let v = nearest_int_dist(frac_dot_slice(&m, &alpha.components));
            let n = crate::lattice::norm_sq(&m).sqrt();
            (n.powf(sigma) * v, m)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .ok_or_else(|| param("no lattice points in the ball"))
}

/// Resonances of a liouville-like direction: `m = 2^{e_k}` for the dyadic exponents of its partial sums.
pub fn liouville_resonances(alpha: &AlphaVector, sigma: f64) -> Result<Vec<ResonanceRecord>> {
    if alpha.dim() != 1 {
        return Err(param("liouville resonances are one-dimensional"));
    }
    let mut out = Vec::new();
    for e in liouville_exponents(sigma)? {
        if e > 30 {
            break;
        }
        let m = 1i64 << e;
        out.push(ResonanceRecord {
            m: vec![m],
            dist: dist(&[m], alpha)?,
        });
    }
    Ok(out)
}

/// CSV with columns `m_1..m_d,dist`.
pub fn resonance_table_csv(records: &[ResonanceRecord]) -> String {
    let d = records.first().map_or(1, |r| r.m.len());
    let mut out = (1..=d).map(|i| format!("m_{i}")).collect::<Vec<_>>().join(",");
    out.push_str(",dist\n");
    for r in records {
        for c in &r.m {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{:.16e}", r.dist);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user(c: &[f64]) -> AlphaVector {
        AlphaVector::new(c.to_vec(), Provenance::User).unwrap()
    }

    #[test]
    fn nearest_int_dist_examples() {
        assert_eq!(nearest_int_dist(0.25), 0.25);
        assert!((nearest_int_dist(3.9) - 0.1).abs() < 1e-15);
        assert_eq!(nearest_int_dist(0.5), 0.5);
        assert_eq!(nearest_int_dist(-0.25), 0.25);
    }

    #[test]
    fn frac_dot_examples() {
        let g = golden();
        assert_eq!(frac_dot(&[0], &g).unwrap(), 0.0);
        assert!((frac_dot(&[5], &g).unwrap() - 0.09016994374947451).abs() < 1e-15);
        let a = user(&[0.4142135624, 0.7320508076]);
        assert!((frac_dot(&[-1, 2], &a).unwrap() - 0.0498880528).abs() < 1e-10);
        assert!(matches!(frac_dot(&[1 << 31], &g), Err(Error::Range { .. })));
        assert!(frac_dot(&[1, 1], &g).is_err());
    }

    #[test]
    fn make_alpha_examples() {
        assert_eq!(make_alpha(&AlphaSpec::Golden, None).unwrap().components, vec![0.6180339887498949]);
        let a = make_alpha(&AlphaSpec::AlgebraicField { d: 2 }, None).unwrap();
        assert!((a.components[0] - 0.2599210498948732).abs() < 1e-15);
        assert!((a.components[1] - 0.5874010519681994).abs() < 1e-15);
        let spec = AlphaSpec::RandomSample { d: 3, seed: None };
        assert!(make_alpha(&spec, None).is_err());
        let r1 = make_alpha(&spec, Some(7)).unwrap();
        let r2 = make_alpha(&spec, Some(7)).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.seed, Some(7));
        assert_ne!(r1.components, make_alpha(&spec, Some(8)).unwrap().components);
        assert!(make_alpha(&AlphaSpec::LiouvilleLike { sigma: 1.0 }, None).is_err());
        assert!(make_alpha(&AlphaSpec::User { components: vec![2.0] }, None).is_err());
    }

    #[test]
    fn liouville_direction_has_deep_resonances() {
        let a = make_alpha(&AlphaSpec::LiouvilleLike { sigma: 2.5 }, None).unwrap();
        // 2^-3 + 2^-7 + 2^-16 + 2^-40 + ...
        assert!((a.components[0] - (0.125 + 1.0 / 128.0 + 2f64.powi(-16) + 2f64.powi(-40))).abs() < 1e-15);
        let res = liouville_resonances(&a, 2.5).unwrap();
        assert_eq!(res.iter().map(|r| r.m[0]).collect::<Vec<_>>(), vec![8, 128, 65536]);
        assert!(res[2].dist < 1e-6);
    }

    #[test]
    fn dirichlet_examples() {
        let r = dirichlet_search(&golden(), 3).unwrap();
        assert_eq!(r.m, vec![3]);
        assert!((r.dist - 0.1458980337503155).abs() < 1e-12);
        let r = dirichlet_search(&user(&[0.4142135624, 0.7320508076]), 2).unwrap();
        assert_eq!(r.m, vec![1, -2]);
        assert!((r.dist - 0.0498880528).abs() < 1e-9);
    }

    #[test]
    fn shell_sum_examples() {
        let g = golden();
        let v = inverse_dist_sum(&g, 4.0, 1.0).unwrap();
        let expect = 2.0 * (1.0 / 0.3819660112501051 + 1.0 / 0.2360679774997898 + 1.0 / 0.1458980337503155);
        assert!((v - expect).abs() < 1e-11);
        assert!((v - 27.416).abs() < 1e-3);
        let v = inverse_dist_sum(&g, 1.5, 2.0).unwrap();
        assert!((v - 2.0 / 0.3819660112501051f64.powi(2)).abs() < 1e-11);
        assert_eq!(inverse_dist_sum(&g, 1.0, 2.0).unwrap(), 0.0);
        let rational = user(&[0.5]);
        assert!(matches!(inverse_dist_sum(&rational, 3.0, 1.0), Err(Error::Singular(_))));
    }

    #[test]
    fn majorant_examples() {
        let v = l2_majorant(1, 1.0, 0.38, 2.0, 2.0).unwrap();
        let expect = (4.0f64 / 0.38).powi(2) * (1.0 + 0.25 + 1.0 / 9.0 + 1.0 / 16.0);
        assert!((v - expect).abs() < 1e-10);
        assert!((v - 157.74).abs() < 0.01);
        assert!((l2_majorant(1, 1.0, 1.0, 1.0, 1.0).unwrap() - 3.0).abs() < 1e-15);
        assert!(l2_majorant(2, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn occupancy_examples() {
        let g = golden();
        assert!(interval_occupancy_check(&g, 5.0, 0.38, 1.0).unwrap().ok);
        // H far too large: the first distance lands below the gap
        let res = interval_occupancy_check(&g, 5.0, 20.0, 1.0).unwrap();
        assert!(!res.ok);
        assert!(matches!(res.violation, Some(OccupancyViolation::BelowGap { .. })));
    }

    #[test]
    fn diophantine_constant_of_golden_ratio() {
        let (h, m) = estimate_diophantine_constant(&golden(), 1.0, 100.0).unwrap();
        assert_eq!(m, vec![1]);
        assert!((h - 0.3819660112501051).abs() < 1e-12);
    }

    #[test]
    fn resonance_csv_layout() {
        let csv = resonance_table_csv(&[ResonanceRecord { m: vec![1, -2], dist: 0.05 }]);
        assert_eq!(csv, "m_1,m_2,dist\n1,-2,5.0000000000000003e-2\n");
    }
}
