//! Full-lattice and plane-section counts for the ellipsoid
//! `x1²/a1² + x2²/a2² + x3²/a3² <= lambda/pi²`, and the exact sign-symmetry
//! bookkeeping that ties them to the eigenvalue counting function.
//!
//! All counters share the inclusive threshold of [`crate::spectrum::count_upto`]
//! and evaluate the quadratic form in the same order, so the integer
//! identities below hold exactly rather than approximately. The unit cube is
//! routed through the integer kernels in [`crate::arith`].

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::cuboid::Cuboid;
use crate::spectrum::{self, column_height, inflated_threshold, SpectrumError};

/// Coordinate axis `1`, `2` or `3` (sides sorted ascending).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    /// The two remaining axes, ascending.
    fn complement(self) -> [usize; 2] {
        match self {
            Axis::X1 => [1, 2],
            Axis::X2 => [0, 2],
            Axis::X3 => [0, 1],
        }
    }
}

impl TryFrom<u8> for Axis {
    type Error = u8;

    fn try_from(v: u8) -> Result<Self, u8> {
        match v {
            1 => Ok(Axis::X1),
            2 => Ok(Axis::X2),
            3 => Ok(Axis::X3),
            other => Err(other),
        }
    }
}

/// Best known remainder exponents for the sphere (`beta`) and circle
/// (`theta`) lattice problems. Reported alongside empirical remainders only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderExponents {
    pub beta: f64,
    pub theta: f64,
}

impl Default for RemainderExponents {
    fn default() -> Self {
        Self {
            beta: 63.0 / 43.0,
            theta: 131.0 / 208.0,
        }
    }
}

impl RemainderExponents {
    /// Theoretical decay exponent `-(2 - beta)/6` of the longest optimal side
    /// excess.
    pub fn side_decay_exponent(&self) -> f64 {
        -(2.0 - self.beta) / 6.0
    }
}

/// Every counting quantity at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountBundle {
    pub lambda: f64,
    /// Positive lattice points (eigenvalues `<= lambda`).
    pub n: u64,
    /// All of `Z³` in the ellipsoid.
    pub t: u64,
    /// `Z²` in the plane sections orthogonal to each axis.
    pub t_x: [u64; 3],
    /// Strictly positive quadrant of each plane section.
    pub tp_x: [u64; 3],
    /// `floor(a_i sqrt(lambda) / pi)`: positive points on each axis.
    pub f: [u64; 3],
}

impl CountBundle {
    /// `T = 8N + 4 sum T+ + 2 sum f + 1`.
    pub fn full_identity_holds(&self) -> bool {
        let rhs = 8 * self.n as u128
            + 4 * self.tp_x.iter().map(|&v| v as u128).sum::<u128>()
            + 2 * self.f.iter().map(|&v| v as u128).sum::<u128>()
            + 1;
        self.t as u128 == rhs
    }

    /// `T_x1 = 4 T+_x1 + 2 f2 + 2 f3 + 1` and its cyclic analogues.
    pub fn plane_identities_hold(&self) -> bool {
        Axis::ALL.iter().all(|&axis| {
            let [p, q] = axis.complement();
            let i = axis.index();
            self.t_x[i] as u128
                == 4 * self.tp_x[i] as u128 + 2 * (self.f[p] + self.f[q]) as u128 + 1
        })
    }

    /// `8N` as predicted by the plane decomposition,
    /// `T - sum T_x + 2 sum f + 2`, in exact integer arithmetic.
    pub fn eight_n_from_planes(&self) -> i128 {
        self.t as i128 - self.t_x.iter().map(|&v| v as i128).sum::<i128>()
            + 2 * self.f.iter().map(|&v| v as i128).sum::<i128>()
            + 2
    }

    /// `N = T/8 - sum T_x/8 + sum f/4 + 1/4`, checked over the common
    /// denominator 8.
    pub fn decomposition_holds(&self) -> bool {
        self.eight_n_from_planes() == 8 * self.n as i128
    }

    pub fn all_identities_hold(&self) -> bool {
        self.full_identity_holds() && self.plane_identities_hold() && self.decomposition_holds()
    }
}

fn check_lambda(lambda: f64) -> Result<f64, SpectrumError> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(inflated_threshold(lambda))
    } else {
        Err(SpectrumError::InvalidLambda(lambda))
    }
}

/// `Z³` points with `w1 x1² + w2 x2² + w3 x3² <= t`, walked over
/// nonnegative `(x1, x2)` with sign weights.
fn full_count_float(w: [f64; 3], t: f64) -> u64 {
    let mut total = 0u64;
    let mut x1 = 0u64;
    loop {
        let b1 = w[0] * (x1 * x1) as f64;
        if b1 > t {
            break;
        }
        let mut plane = 0u64;
        let mut x2 = 0u64;
        loop {
            let base = b1 + w[1] * (x2 * x2) as f64;
            if base > t {
                break;
            }
            let column = 2 * column_height(base, w[2], t) + 1;
            plane += if x2 == 0 { column } else { 2 * column };
            x2 += 1;
        }
        total += if x1 == 0 { plane } else { 2 * plane };
        x1 += 1;
    }
    total
}

/// `Z²` points with `wa xa² + wb xb² <= t` for `wa >= wb`; the outer loop
/// runs along the shorter semi-axis. Returns `(all, strictly positive)`.
fn plane_count_float(wa: f64, wb: f64, t: f64) -> (u64, u64) {
    let mut all = 0u64;
    let mut positive = 0u64;
    let mut x = 0u64;
    loop {
        let base = wa * (x * x) as f64;
        if base > t {
            break;
        }
        let h = column_height(base, wb, t);
        if x == 0 {
            all += 2 * h + 1;
        } else {
            all += 2 * (2 * h + 1);
            positive += h;
        }
        x += 1;
    }
    (all, positive)
}

/// `T(lambda)`: integer lattice points of `Z³` inside or on the ellipsoid.
pub fn count_full(cuboid: &Cuboid, lambda: f64) -> Result<u64, SpectrumError> {
    let t = check_lambda(lambda)?;
    if cuboid.is_unit_cube() {
        return Ok(arith::sphere_count_sq(t.floor() as u64));
    }
    Ok(full_count_float(cuboid.inverse_squares(), t))
}

fn plane_counts(cuboid: &Cuboid, t: f64, axis: Axis) -> (u64, u64) {
    if cuboid.is_unit_cube() {
        let m = t.floor() as u64;
        return (arith::circle_count_sq(m), arith::quadrant_count_sq(m));
    }
    let w = cuboid.inverse_squares();
    let [p, q] = axis.complement();
    plane_count_float(w[p], w[q], t)
}

/// `T_{x_axis}(lambda)`: points of `Z²` in the plane section through the
/// origin orthogonal to `axis`.
pub fn count_plane(cuboid: &Cuboid, lambda: f64, axis: Axis) -> Result<u64, SpectrumError> {
    let t = check_lambda(lambda)?;
    Ok(plane_counts(cuboid, t, axis).0)
}

/// `T+_{x_axis}(lambda)`: the strictly positive quadrant of that section.
pub fn count_plane_positive(cuboid: &Cuboid, lambda: f64, axis: Axis) -> Result<u64, SpectrumError> {
    let t = check_lambda(lambda)?;
    Ok(plane_counts(cuboid, t, axis).1)
}

/// Positive lattice points on one axis, i.e. `floor(a_i sqrt(lambda)/pi)`
/// under the inclusive boundary convention.
pub fn axis_count(cuboid: &Cuboid, lambda: f64, axis: Axis) -> Result<u64, SpectrumError> {
    let t = check_lambda(lambda)?;
    Ok(axis_count_at(cuboid, t, axis))
}

fn axis_count_at(cuboid: &Cuboid, t: f64, axis: Axis) -> u64 {
    if cuboid.is_unit_cube() {
        return (t.floor() as u64).isqrt();
    }
    column_height(0.0, cuboid.inverse_squares()[axis.index()], t)
}

/// All counting quantities at `lambda`. `n` comes from the spectral counter;
/// the remaining fields are computed independently of it.
pub fn count_bundle(cuboid: &Cuboid, lambda: f64) -> Result<CountBundle, SpectrumError> {
    let t = check_lambda(lambda)?;
    let n = spectrum::count_upto(cuboid, lambda)?;
    let full = count_full(cuboid, lambda)?;
    let mut t_x = [0; 3];
    let mut tp_x = [0; 3];
    let mut f = [0; 3];
    for axis in Axis::ALL {
        let i = axis.index();
        (t_x[i], tp_x[i]) = plane_counts(cuboid, t, axis);
        f[i] = axis_count_at(cuboid, t, axis);
    }
    Ok(CountBundle {
        lambda,
        n,
        t: full,
        t_x,
        tp_x,
        f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::PI2;

    fn brute_full(c: &Cuboid, lambda: f64) -> u64 {
        let t = inflated_threshold(lambda);
        let w = c.inverse_squares();
        let r = (t / w[2]).sqrt() as i64 + 1;
        let mut n = 0;
        for x in -r..=r {
            for y in -r..=r {
                for z in -r..=r {
                    let s = (w[0] * (x * x) as f64 + w[1] * (y * y) as f64) + w[2] * (z * z) as f64;
                    if s <= t {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    #[test]
    fn full_examples() {
        let cube = Cuboid::unit_cube();
        assert_eq!(count_full(&cube, PI2).unwrap(), 7);
        assert_eq!(count_full(&cube, 3.0 * PI2).unwrap(), 27);
        assert_eq!(count_full(&Cuboid::new(0.4, 0.9).unwrap(), 0.0).unwrap(), 1);
        assert!(count_full(&cube, -0.5).is_err());
    }

    #[test]
    fn full_float_path_matches_brute_force() {
        for (a1, a2, lambda) in [(0.5, 1.0, 200.0), (0.3, 1.3, 777.0), (0.9, 1.01, 1500.0)] {
            let c = Cuboid::new(a1, a2).unwrap();
            assert_eq!(count_full(&c, lambda).unwrap(), brute_full(&c, lambda));
        }
        // float kernel on cube weights against the integer kernel
        for m in 0..200u64 {
            let t = m as f64 * (1.0 + crate::spectrum::BOUNDARY_TOL);
            assert_eq!(full_count_float([1.0; 3], t), arith::sphere_count_sq(m));
            assert_eq!(plane_count_float(1.0, 1.0, t).0, arith::circle_count_sq(m));
        }
    }

    #[test]
    fn plane_examples() {
        let cube = Cuboid::unit_cube();
        assert_eq!(count_plane(&cube, PI2, Axis::X1).unwrap(), 5);
        assert_eq!(count_plane(&cube, 2.0 * PI2, Axis::X3).unwrap(), 9);
        let c = Cuboid::new(0.45, 0.8).unwrap();
        for axis in Axis::ALL {
            assert_eq!(count_plane(&c, 0.0, axis).unwrap(), 1);
        }
        assert_eq!(Axis::try_from(2), Ok(Axis::X2));
        assert_eq!(Axis::try_from(4), Err(4));
    }

    #[test]
    fn bundle_examples() {
        let cube = Cuboid::unit_cube();
        let b = count_bundle(&cube, 3.0 * PI2).unwrap();
        assert_eq!((b.n, b.t, b.t_x, b.tp_x, b.f), (1, 27, [9; 3], [1; 3], [1; 3]));
        assert!(b.all_identities_hold());

        let b = count_bundle(&Cuboid::new(0.37, 1.4).unwrap(), 0.0).unwrap();
        assert_eq!((b.n, b.t, b.t_x, b.tp_x, b.f), (0, 1, [1; 3], [0; 3], [0; 3]));
        assert!(b.all_identities_hold());

        let c = Cuboid::new(0.5, 1.0).unwrap();
        let lambda = spectrum::kth_eigenvalue(&c, 1).unwrap().value;
        let b = count_bundle(&c, lambda).unwrap();
        assert_eq!(b.n, 1);
        assert_eq!(b.t, brute_full(&c, lambda));
        assert!(b.all_identities_hold());
    }

    #[test]
    fn broken_bundle_is_detected() {
        let mut b = count_bundle(&Cuboid::new(0.6, 0.9).unwrap(), 500.0).unwrap();
        assert!(b.all_identities_hold());
        b.n += 1;
        assert!(!b.full_identity_holds());
        assert!(!b.decomposition_holds());
        assert!(b.plane_identities_hold());
    }

    #[test]
    fn remainder_exponent_defaults() {
        let r = RemainderExponents::default();
        assert_eq!(r.beta, 63.0 / 43.0);
        assert!((r.side_decay_exponent() + 23.0 / 258.0).abs() < 1e-15);
    }
}
