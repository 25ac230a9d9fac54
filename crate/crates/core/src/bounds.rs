//! Evaluatable inequalities for lattice sums, the counting function and
//! optimal boxes.
//!
//! Each check is oriented as `lhs <= rhs` and returned as a [`BoundReport`]
//! carrying the slack `rhs - lhs`. A report passes when the slack is above
//! `-1e-9 * max(1, |rhs|)`; anything between that and zero is floating-point
//! noise on a tight inequality, anything below is a real violation.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::cuboid::Cuboid;
use crate::lattice::{self, Axis, RemainderExponents};
use crate::spectrum::{self, SpectrumError, PI2};

/// Relative slack tolerance for [`BoundReport::pass`].
pub const REPORT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("invalid lemma parameters y={y}, a={a}, n={n}")]
    InvalidQuery { y: f64, a: f64, n: u32 },
    #[error("the concavity bound only holds for n in {{1, 2}}, got n={0}")]
    ExponentOutOfRange(u32),
    #[error("a3 = {0} is outside [1, 400], where the quadratic minorant is valid")]
    SideOutOfRange(f64),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Parameters of the one-dimensional lattice sum
/// `sum_{i=1}^{floor(sqrt(y)/a)} (y - a² i²)^{n/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub y: f64,
    pub a: f64,
    pub n: u32,
}

impl BoundQuery {
    pub fn new(y: f64, a: f64, n: u32) -> Result<Self, BoundError> {
        if !(y.is_finite() && y >= 0.0 && a.is_finite() && a > 0.0 && n >= 1) {
            return Err(BoundError::InvalidQuery { y, a, n });
        }
        Ok(Self { y, a, n })
    }
}

impl fmt::Display for BoundQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y={};a={};n={}", self.y, self.a, self.n)
    }
}

/// One evaluated inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl BoundReport {
    pub fn new(name: &str, inputs: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.to_owned(),
            inputs: inputs.into(),
            lhs,
            rhs,
            slack,
            pass: slack >= -tolerance(rhs),
        }
    }

    /// Passed only because of the float tolerance.
    pub fn is_float_artifact(&self) -> bool {
        self.pass && self.slack < 0.0
    }
}

fn tolerance(rhs: f64) -> f64 {
    REPORT_TOL * rhs.abs().max(1.0)
}

/// `Gamma(m / 2)` for integer `m >= 1`, from `Gamma(j) = (j-1)!` and
/// `Gamma(j + 1/2) = (2j)! sqrt(pi) / (4^j j!)`.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m >= 1, "Gamma(m/2) needs m >= 1");
    if m.is_multiple_of(2) {
        (1..m / 2).map(f64::from).product()
    } else {
        let j = (m - 1) / 2;
        // (2j)! / (4^j j!) = prod_{i=1}^{j} (2i - 1) / 2
        (1..=j).map(|i| (2 * i - 1) as f64 / 2.0).product::<f64>() * PI.sqrt()
    }
}

/// `(sqrt(pi)/2) Gamma((n+2)/2) / Gamma((n+3)/2) = int_0^1 (1 - t²)^{n/2} dt`.
pub fn beta_integral(n: u32) -> f64 {
    PI.sqrt() / 2.0 * gamma_half(n + 2) / gamma_half(n + 3)
}

fn half_power(x: f64, n: u32) -> f64 {
    let x = x.max(0.0);
    if n.is_multiple_of(2) {
        x.powi((n / 2) as i32)
    } else {
        x.sqrt() * x.powi((n / 2) as i32)
    }
}

/// The finite sum `sum_{i=1}^{floor(sqrt(y)/a)} (y - a² i²)^{n/2}`.
pub fn lemma_sum(q: &BoundQuery) -> f64 {
    let top = (q.y.sqrt() / q.a).floor() as u64;
    let a2 = q.a * q.a;
    (1..=top).map(|i| half_power(q.y - a2 * (i * i) as f64, q.n)).sum()
}

/// Concavity bound on [`lemma_sum`], valid for `n in {1, 2}`:
/// integral term, minus half the endpoint value, plus the worst-case
/// fractional-part correction `(2an)^{n/2} / (n+2)^{(n+2)/2} y^{n/4}`.
pub fn lemma31_rhs(q: &BoundQuery) -> Result<f64, BoundError> {
    if !(1..=2).contains(&q.n) {
        return Err(BoundError::ExponentOutOfRange(q.n));
    }
    let n = f64::from(q.n);
    let correction = (2.0 * q.a * n).powf(n / 2.0) / (n + 2.0).powf((n + 2.0) / 2.0);
    Ok(lemma32_rhs(q) - 0.5 * q.y.powf(n / 2.0) + correction * q.y.powf(n / 4.0))
}

/// Integral bound on [`lemma_sum`], valid for every `n >= 1`:
/// `(sqrt(pi)/(2a)) Gamma((n+2)/2)/Gamma((n+3)/2) y^{(n+1)/2}`.
pub fn lemma32_rhs(q: &BoundQuery) -> f64 {
    beta_integral(q.n) / q.a * q.y.powf((f64::from(q.n) + 1.0) / 2.0)
}

pub fn lemma31_report(q: &BoundQuery) -> Result<BoundReport, BoundError> {
    Ok(BoundReport::new("lemma31", q.to_string(), lemma_sum(q), lemma31_rhs(q)?))
}

pub fn lemma32_report(q: &BoundQuery) -> BoundReport {
    BoundReport::new("lemma32", q.to_string(), lemma_sum(q), lemma32_rhs(q))
}

/// Upper bound `lambda^{3/2}/(6 pi²) - lambda/(8 pi a1) + lambda^{1/2}/(16 a1²)`
/// on the counting function of any unit-volume box.
pub fn lemma41_rhs(cuboid: &Cuboid, lambda: f64) -> f64 {
    let a1 = cuboid.a1();
    lambda.powf(1.5) / (6.0 * PI2) - lambda / (8.0 * PI * a1) + lambda.sqrt() / (16.0 * a1 * a1)
}

pub fn lemma41_report(cuboid: &Cuboid, lambda: f64) -> Result<BoundReport, BoundError> {
    let n = spectrum::count_upto(cuboid, lambda)?;
    Ok(BoundReport::new(
        "lemma41",
        format!("{};lambda={lambda}", sides_repr(cuboid)),
        n as f64,
        lemma41_rhs(cuboid, lambda),
    ))
}

pub(crate) fn sides_repr(c: &Cuboid) -> String {
    let [a1, a2, a3] = c.sides();
    format!("a1={a1};a2={a2};a3={a3}")
}

/// `nu_k^{3/2} <= 6 pi² k + 3 pi nu_k (1/2 + sqrt 3)` for the k-th unit-cube
/// eigenvalue `nu_k`.
pub fn cube_eigenvalue_bound(k: u64, nu_k: f64) -> BoundReport {
    BoundReport::new(
        "cube_eigenvalue",
        format!("k={k};nu={nu_k}"),
        nu_k.powf(1.5),
        6.0 * PI2 * k as f64 + 3.0 * PI * nu_k * (0.5 + 3f64.sqrt()),
    )
}

/// Uniform lower bound `1 / (8 (1/2 + sqrt 3))` on the shortest side of an
/// optimal box.
pub fn a1_lower_bound() -> f64 {
    1.0 / (8.0 * (0.5 + 3f64.sqrt()))
}

/// Upper bound `1/a1_min²` on the longest optimal side, rounded up to 319.
pub const A3_UPPER_BOUND: f64 = 319.0;

/// `(6 pi² k)^{2/3}`, the lower bound on `lambda_k` of any unit-volume box.
pub fn polya_lower_bound(k: u64) -> f64 {
    (6.0 * PI2 * k as f64).powf(2.0 / 3.0)
}

pub fn polya_report(cuboid: &Cuboid, k: u64, lambda_k: f64) -> BoundReport {
    BoundReport::new(
        "polya",
        format!("{};k={k}", sides_repr(cuboid)),
        polya_lower_bound(k),
        lambda_k,
    )
}

/// Lower bound `(pi/6) (sqrt(nu)/pi - sqrt 3)_+^3` on the number of positive
/// lattice points in the ball of radius `sqrt(nu)/pi`.
pub fn gauss_octant_lower(nu: f64) -> f64 {
    let r = (nu.sqrt() / PI - 3f64.sqrt()).max(0.0);
    PI / 6.0 * r.powi(3)
}

/// `1 + 3/2 d + 3/160 d² <= (1 + d)^{3/2}`; true for `0 <= d <= 399`.
pub fn three_halves_minorant(delta: f64) -> BoundReport {
    BoundReport::new(
        "three_halves_minorant",
        format!("delta={delta}"),
        1.0 + 1.5 * delta + 3.0 / 160.0 * delta * delta,
        (1.0 + delta).powf(1.5),
    )
}

/// Checks `2 sqrt(a3) + 1/a3 <= 3 + budget` (arithmetic-geometric mean on the
/// two shorter sides), where `budget = 1/a1 + 1/a2 + 1/a3 - 3`, together
/// with the quadratic minorant of `(1 + delta)^{3/2}` at `delta = a3 - 1`.
pub fn delta_from_am_gm(a3_star: f64, budget: f64) -> Result<BoundReport, BoundError> {
    if !(1.0 - 1e-9..=400.0).contains(&a3_star) {
        return Err(BoundError::SideOutOfRange(a3_star));
    }
    let delta = (a3_star - 1.0).max(0.0);
    let minorant = three_halves_minorant(delta);
    let mut report = BoundReport::new(
        "am_gm_delta",
        format!("a3={a3_star};budget={budget};minorant_slack={}", minorant.slack),
        2.0 * a3_star.sqrt() + 1.0 / a3_star,
        3.0 + budget,
    );
    report.pass &= minorant.pass;
    Ok(report)
}

/// [`delta_from_am_gm`] evaluated on an optimal box.
pub fn am_gm_report(cuboid: &Cuboid) -> Result<BoundReport, BoundError> {
    let budget: f64 = cuboid.sides().iter().map(|a| 1.0 / a).sum::<f64>() - 3.0;
    delta_from_am_gm(cuboid.a3(), budget)
}

/// The unit-cube chain at rank `k`: `k <= N(nu_k)`,
/// `N(nu_k) <= k + Theta_k - 1`, the octant lower bound on `N(nu_k)`, and the
/// resulting eigenvalue inequality.
pub fn cube_chain_reports(k: u64) -> Result<Vec<BoundReport>, BoundError> {
    let cube = Cuboid::unit_cube();
    let point = spectrum::kth_eigenvalue(&cube, k)?;
    let nu = point.value;
    let m = point.scaled().round() as u64;
    let n_nu = spectrum::count_upto(&cube, nu)?;
    let theta = arith::cube_multiplicity(m);
    let inputs = format!("k={k};m={m}");
    Ok(vec![
        BoundReport::new("cube_rank_lower", inputs.clone(), k as f64, n_nu as f64),
        BoundReport::new(
            "cube_multiplicity_upper",
            format!("{inputs};theta={theta}"),
            n_nu as f64,
            (k + theta - 1) as f64,
        ),
        BoundReport::new("gauss_octant", inputs, gauss_octant_lower(nu), n_nu as f64),
        cube_eigenvalue_bound(k, nu),
    ])
}

/// `Theta(m) <= #{positive pairs in the disc of radius sqrt(m)} <= pi m / 4`.
pub fn multiplicity_projection_reports(m: u64) -> [BoundReport; 2] {
    let theta = arith::cube_multiplicity(m) as f64;
    let quadrant = arith::quadrant_count_sq(m) as f64;
    [
        BoundReport::new("multiplicity_projection", format!("m={m}"), theta, quadrant),
        BoundReport::new("quadrant_area", format!("m={m}"), quadrant, PI * m as f64 / 4.0),
    ]
}

/// Identity `T = 8N + 4 sum T+ + 2 sum f + 1` as a report. Passes only if
/// all three exact identities of the bundle hold.
pub fn identity_report(cuboid: &Cuboid, lambda: f64) -> Result<BoundReport, BoundError> {
    let b = lattice::count_bundle(cuboid, lambda)?;
    let rhs = 8 * b.n + 4 * b.tp_x.iter().sum::<u64>() + 2 * b.f.iter().sum::<u64>() + 1;
    let mut report = BoundReport::new(
        "identity",
        format!("{};lambda={lambda}", sides_repr(cuboid)),
        b.t as f64,
        rhs as f64,
    );
    report.pass = b.all_identities_hold();
    Ok(report)
}

/// Largest observed `|remainder| / lambda^{exponent/2}` for the full and
/// plane counts; descriptive estimates of the unnamed remainder constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderEstimate {
    pub exponents: RemainderExponents,
    /// Estimate for the full-ellipsoid constant (exponent `beta`).
    pub c_full: f64,
    /// Estimate for the plane-section constant (exponent `theta`).
    pub d_plane: f64,
    pub samples: usize,
}

pub fn estimate_remainder_constants(
    pairs: &[(Cuboid, f64)],
    exponents: RemainderExponents,
) -> Result<RemainderEstimate, BoundError> {
    let mut c_full: f64 = 0.0;
    let mut d_plane: f64 = 0.0;
    let mut samples = 0;
    for (cuboid, lambda) in pairs {
        let lambda = *lambda;
        if lambda < 1.0 {
            continue;
        }
        let full = lattice::count_full(cuboid, lambda)? as f64;
        let weyl = 4.0 / (3.0 * PI2) * lambda.powf(1.5);
        c_full = c_full.max((full - weyl).abs() / lambda.powf(exponents.beta / 2.0));
        let sides = cuboid.sides();
        for (axis, (p, q)) in Axis::ALL.into_iter().zip([(1, 2), (0, 2), (0, 1)]) {
            let plane = lattice::count_plane(cuboid, lambda, axis)? as f64;
            let area = sides[p] * sides[q] * lambda / PI;
            d_plane = d_plane.max((plane - area).abs() / lambda.powf(exponents.theta / 2.0));
        }
        samples += 1;
    }
    Ok(RemainderEstimate {
        exponents,
        c_full,
        d_plane,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(y: f64, a: f64, n: u32) -> BoundQuery {
        BoundQuery::new(y, a, n).unwrap()
    }

    #[test]
    fn gamma_closed_forms() {
        assert_eq!(gamma_half(2), 1.0);
        assert_eq!(gamma_half(4), 1.0);
        assert_eq!(gamma_half(8), 6.0);
        assert_relative_eq!(gamma_half(1), PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_half(3), PI.sqrt() / 2.0, max_relative = 1e-15);
        assert_relative_eq!(gamma_half(5), 3.0 * PI.sqrt() / 4.0, max_relative = 1e-15);
        // n = 2: Gamma(2)/Gamma(5/2) = 4/(3 sqrt pi); n = 1: Gamma(3/2)/Gamma(2) = sqrt(pi)/2
        assert_relative_eq!(gamma_half(4) / gamma_half(5), 4.0 / (3.0 * PI.sqrt()), max_relative = 1e-15);
        assert_relative_eq!(gamma_half(3) / gamma_half(4), PI.sqrt() / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn beta_integral_matches_quadrature() {
        for n in 1..=6 {
            let steps = 200_000;
            let h = 1.0 / steps as f64;
            // midpoint rule on int_0^1 (1 - t²)^{n/2} dt
            let quad: f64 = (0..steps)
                .map(|i| {
                    let t = (i as f64 + 0.5) * h;
                    (1.0 - t * t).powf(n as f64 / 2.0) * h
                })
                .sum();
            assert_relative_eq!(beta_integral(n), quad, max_relative = 1e-6);
        }
    }

    #[test]
    fn lemma_sum_examples() {
        assert_eq!(lemma_sum(&q(1.0, 1.0, 2)), 0.0);
        assert_eq!(lemma_sum(&q(4.0, 1.0, 2)), 3.0);
        assert_relative_eq!(lemma_sum(&q(10.0, 1.0, 1)), 3.0 + 6f64.sqrt() + 1.0, max_relative = 1e-15);
        assert_eq!(lemma_sum(&q(0.5, 1.0, 1)), 0.0);
    }

    #[test]
    fn lemma31_examples() {
        assert_relative_eq!(lemma31_rhs(&q(1.0, 1.0, 2)).unwrap(), 5.0 / 12.0, max_relative = 1e-14);
        let expect = PI / 4.0 - 0.5 + 2f64.sqrt() / 3f64.powf(1.5);
        assert_relative_eq!(lemma31_rhs(&q(1.0, 1.0, 1)).unwrap(), expect, max_relative = 1e-14);
        assert!((expect - 0.5576).abs() < 1e-4);
        assert_eq!(lemma31_rhs(&q(0.0, 3.0, 1)).unwrap(), 0.0);
        assert_eq!(lemma31_rhs(&q(0.0, 3.0, 2)).unwrap(), 0.0);
        assert_eq!(lemma31_rhs(&q(1.0, 1.0, 3)), Err(BoundError::ExponentOutOfRange(3)));
        assert!(lemma31_report(&q(1.0, 1.0, 2)).unwrap().pass);
    }

    #[test]
    fn lemma32_examples() {
        assert_relative_eq!(lemma32_rhs(&q(1.0, 1.0, 2)), 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(lemma32_rhs(&q(1.0, 1.0, 1)), PI / 4.0, max_relative = 1e-14);
        assert_relative_eq!(lemma32_rhs(&q(9.0, 1.0, 3)), 3.0 * PI / 16.0 * 81.0, max_relative = 1e-14);
        assert!((lemma32_rhs(&q(9.0, 1.0, 3)) - 47.71).abs() < 5e-3);
    }

    #[test]
    fn invalid_queries() {
        assert!(BoundQuery::new(-1.0, 1.0, 1).is_err());
        assert!(BoundQuery::new(1.0, 0.0, 1).is_err());
        assert!(BoundQuery::new(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn lemma41_examples() {
        let cube = Cuboid::unit_cube();
        let rhs = lemma41_rhs(&cube, 3.0 * PI2);
        let expect = 3f64.powf(1.5) * PI / 6.0 - 3.0 * PI / 8.0 + 3f64.sqrt() * PI / 16.0;
        assert_relative_eq!(rhs, expect, max_relative = 1e-14);
        assert!((rhs - 1.883).abs() < 1e-3);
        assert!(lemma41_report(&cube, 3.0 * PI2).unwrap().pass);
        assert_eq!(lemma41_rhs(&Cuboid::new(0.3, 0.6).unwrap(), 0.0), 0.0);
        let c = Cuboid::new(0.5, 1.0).unwrap();
        let r = lemma41_report(&c, 5.25 * PI2).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!(r.rhs >= 1.0 && r.pass);
    }

    #[test]
    fn cube_eigenvalue_examples() {
        let r = cube_eigenvalue_bound(1, 3.0 * PI2);
        assert!((r.lhs - 161.11).abs() < 0.01);
        assert!((r.rhs - (59.22 + 622.87)).abs() < 0.01);
        assert!(r.pass);
        assert!(cube_eigenvalue_bound(4, 6.0 * PI2).pass);
        let nu = spectrum::kth_eigenvalue(&Cuboid::unit_cube(), 1000).unwrap().value;
        assert!(cube_eigenvalue_bound(1000, nu).pass);
    }

    #[test]
    fn a1_floor_constants() {
        let a = a1_lower_bound();
        assert_eq!(a, 1.0 / (8.0 * (0.5 + 3f64.sqrt())));
        assert!((a - 0.056_002_309).abs() < 1e-9);
        let sq = 64.0 * (0.5 + 3f64.sqrt()).powi(2);
        assert!(sq <= A3_UPPER_BOUND);
        assert!(1.0 / (a * a) <= A3_UPPER_BOUND + 1e-9);
    }

    #[test]
    fn polya_examples() {
        let p1 = polya_lower_bound(1);
        assert!((p1 - 15.1927).abs() < 1e-4);
        assert_relative_eq!(polya_lower_bound(8), 4.0 * p1, max_relative = 1e-14);
        assert_relative_eq!(polya_lower_bound(1000), 100.0 * p1, max_relative = 1e-14);
    }

    #[test]
    fn am_gm_examples() {
        let r = delta_from_am_gm(1.0, 0.0).unwrap();
        assert_eq!((r.lhs, r.rhs, r.slack), (3.0, 3.0, 0.0));
        assert!(r.pass);
        let m = three_halves_minorant(399.0);
        assert_relative_eq!(m.rhs, 8000.0, max_relative = 1e-14);
        assert_relative_eq!(m.lhs, 1.0 + 598.5 + 3.0 / 160.0 * 399.0 * 399.0, max_relative = 1e-14);
        assert!(m.pass);
        let m = three_halves_minorant(0.01);
        assert!(m.pass && m.slack > 0.0);
        assert!(matches!(delta_from_am_gm(401.0, 10.0), Err(BoundError::SideOutOfRange(_))));
        assert!(delta_from_am_gm(0.5, 0.0).is_err());
        let c = Cuboid::new(0.8, 0.9).unwrap();
        assert!(am_gm_report(&c).unwrap().pass);
    }

    #[test]
    fn cube_chain_small_k() {
        for k in 1..=50 {
            for r in cube_chain_reports(k).unwrap() {
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn projection_bound_small_m() {
        for m in 1..2000 {
            for r in multiplicity_projection_reports(m) {
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn report_tolerance() {
        let r = BoundReport::new("t", "", 1.0 + 0.5e-9, 1.0);
        assert!(r.pass && r.is_float_artifact());
        let r = BoundReport::new("t", "", 1.0 + 2e-9, 1.0);
        assert!(!r.pass);
        let r = BoundReport::new("t", "", 1e6 * (1.0 + 0.5e-9), 1e6);
        assert!(r.pass);
    }

    #[test]
    fn remainder_estimates_are_finite() {
        let pairs: Vec<(Cuboid, f64)> =
            vec![(Cuboid::unit_cube(), 500.0), (Cuboid::new(0.5, 1.1).unwrap(), 900.0)];
        let est = estimate_remainder_constants(&pairs, RemainderExponents::default()).unwrap();
        assert_eq!(est.samples, 2);
        assert!(est.c_full.is_finite() && est.c_full > 0.0);
        assert!(est.d_plane.is_finite() && est.d_plane > 0.0);
    }
}
