//! Dirichlet eigenvalues of unit-volume boxes.
//!
//! The eigenvalues of `(0,a1) x (0,a2) x (0,a3)` are `pi² * sum_j i_j²/a_j²`
//! over positive integer triples, so the counting function `N(lambda)` is a
//! count of positive lattice points in a closed ellipsoid. Everything below
//! works in the scaled variable `s = lambda / pi²`.
//!
//! The counter walks `(i1, i2)` slices over the two shortest sides and takes
//! one square root per slice along the longest side, so a count costs about
//! `r1 * r2` operations where `r_j` are the ellipsoid semi-axes. The k-th
//! eigenvalue is found by narrowing a threshold bracket with counts until only
//! a small shell of candidates remains, then selecting inside the shell.
//!
//! The exact unit cube bypasses floating point entirely: its scaled
//! eigenvalues are the integers `i1² + i2² + i3²`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cuboid::Cuboid;

/// Relative tolerance under which a lattice point on the ellipsoid boundary
/// is counted as inside.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Relative gap under which two eigenvalues are reported as one degenerate
/// spectral point.
pub const DEGENERACY_TOL: f64 = 1e-9;

pub(crate) const PI2: f64 = PI * PI;

/// Slices above which a single count is split across the thread pool.
const PARALLEL_SLICES: f64 = 60_000.0;

/// Target number of candidates left in the final selection shell.
const SHELL_TARGET: u64 = 48;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("lattice index {0} must be a positive integer")]
    NonPositiveIndex(i64),
    #[error("threshold {0} must be finite and nonnegative")]
    InvalidLambda(f64),
    #[error("eigenvalue rank must be at least 1")]
    ZeroRank,
    #[error("search ceiling {ceiling:.6e} would need about {estimate:.3e} lattice points (cap {cap})")]
    ResourceCap { ceiling: f64, estimate: f64, cap: u64 },
}

/// Work limits for eigenvalue searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumLimits {
    /// Upper bound on the Weyl estimate of lattice points under the search
    /// ceiling.
    pub max_points: u64,
}

impl Default for SpectrumLimits {
    fn default() -> Self {
        Self { max_points: 1 << 30 }
    }
}

/// An eigenvalue together with every multi-index attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub value: f64,
    pub indices: Vec<[u64; 3]>,
    pub multiplicity: usize,
}

impl SpectralPoint {
    fn new(value: f64, mut indices: Vec<[u64; 3]>) -> Self {
        indices.sort_unstable();
        let multiplicity = indices.len();
        Self {
            value,
            indices,
            multiplicity,
        }
    }

    /// `value / pi²`; an exact integer for the unit cube.
    pub fn scaled(&self) -> f64 {
        self.value / PI2
    }
}

/// Scaled eigenvalue `w1 i1² + w2 i2² + w3 i3²`, always associated the same
/// way so that every code path agrees bit-for-bit.
#[inline]
pub(crate) fn scaled_value(w: &[f64; 3], i: [u64; 3]) -> f64 {
    (w[0] * sq(i[0]) + w[1] * sq(i[1])) + w[2] * sq(i[2])
}

#[inline]
fn sq(i: u64) -> f64 {
    (i * i) as f64
}

/// Largest `m >= 0` with `base + w * m² <= t`.
#[inline]
pub(crate) fn column_height(base: f64, w: f64, t: f64) -> u64 {
    let rem = t - base;
    if rem < w {
        return if base + w <= t { 1 } else { 0 };
    }
    let mut m = (rem / w).sqrt() as u64;
    while base + w * sq(m + 1) <= t {
        m += 1;
    }
    while m > 0 && base + w * sq(m) > t {
        m -= 1;
    }
    m
}

/// Positive-lattice counter for `w1 i1² + w2 i2² + w3 i3² <= t` with
/// `w1 >= w2 >= w3`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OctantCounter {
    w: [f64; 3],
}

impl OctantCounter {
    pub(crate) fn new(w: [f64; 3]) -> Self {
        Self { w }
    }

    fn slice(&self, i1: u64, t: f64) -> u64 {
        let [w1, w2, w3] = self.w;
        let b1 = w1 * sq(i1);
        let mut total = 0;
        let mut i2 = 1;
        loop {
            let base = b1 + w2 * sq(i2);
            if base + w3 > t {
                break;
            }
            total += column_height(base, w3, t);
            i2 += 1;
        }
        total
    }

    fn outer_extent(&self, t: f64) -> u64 {
        let [w1, w2, w3] = self.w;
        let mut n = ((t / w1).max(0.0)).sqrt() as u64 + 1;
        while n > 0 && (w1 * sq(n) + w2) + w3 > t {
            n -= 1;
        }
        n
    }

    /// Number of positive triples with scaled value `<= t`.
    pub(crate) fn count(&self, t: f64) -> u64 {
        let n1 = self.outer_extent(t);
        if n1 == 0 {
            return 0;
        }
        let slices = t / (self.w[0] * self.w[1]).sqrt();
        if slices > PARALLEL_SLICES {
            (1..=n1).into_par_iter().map(|i1| self.slice(i1, t)).sum()
        } else {
            (1..=n1).map(|i1| self.slice(i1, t)).sum()
        }
    }

    /// Calls `f(index, value)` for every triple with `lo < value <= hi`.
    pub(crate) fn for_each_in_shell(&self, lo: f64, hi: f64, mut f: impl FnMut([u64; 3], f64)) {
        let [w1, w2, w3] = self.w;
        let n1 = self.outer_extent(hi);
        for i1 in 1..=n1 {
            let b1 = w1 * sq(i1);
            let mut i2 = 1;
            loop {
                let base = b1 + w2 * sq(i2);
                if base + w3 > hi {
                    break;
                }
                let top = column_height(base, w3, hi);
                let bottom = column_height(base, w3, lo);
                for i3 in bottom + 1..=top {
                    f([i1, i2, i3], base + w3 * sq(i3));
                }
                i2 += 1;
            }
        }
    }

    /// Scaled value of the k-th smallest positive triple.
    pub(crate) fn kth(&self, k: u64, limits: &SpectrumLimits) -> Result<f64, SpectrumError> {
        let kf = k as f64;
        let weyl = (6.0 * PI2 * kf).powf(2.0 / 3.0) / PI2;
        let volume_factor = 1.0 / (self.w[0] * self.w[1] * self.w[2]).sqrt();
        let estimate = |t: f64| PI / 6.0 * t.powf(1.5) * volume_factor;

        let mut hi = (3.0 * kf * kf).min(4.0 * weyl);
        let mut c_hi = loop {
            let est = estimate(hi);
            if est > limits.max_points as f64 {
                return Err(SpectrumError::ResourceCap {
                    ceiling: hi * PI2,
                    estimate: est,
                    cap: limits.max_points,
                });
            }
            let c = self.count(hi);
            if c >= k {
                break c;
            }
            hi *= 2.0;
        };
        let (mut lo, mut c_lo) = {
            let t = weyl * (1.0 - 1e-9);
            let c = self.count(t);
            if c < k && t < hi {
                (t, c)
            } else {
                (0.0, 0)
            }
        };

        // Regula falsi on count ~ t^{3/2}, falling back to bisection when a
        // step fails to halve the bracket.
        let mut bisect = false;
        while c_hi - c_lo > SHELL_TARGET {
            let width = hi - lo;
            let mid = if bisect {
                lo + 0.5 * width
            } else {
                let (x0, x1) = (lo.powf(1.5), hi.powf(1.5));
                let frac = ((k - c_lo) as f64 - 0.5) / (c_hi - c_lo) as f64;
                let guess = (x0 + frac * (x1 - x0)).powf(2.0 / 3.0);
                guess.clamp(lo + 0.02 * width, hi - 0.02 * width)
            };
            if !(mid > lo && mid < hi) {
                break;
            }
            let c = self.count(mid);
            if c >= k {
                bisect = hi - mid < 0.5 * width && !bisect;
                hi = mid;
                c_hi = c;
            } else {
                bisect = mid - lo < 0.5 * width && !bisect;
                lo = mid;
                c_lo = c;
            }
            if hi - lo <= hi * 1e-15 {
                break;
            }
        }

        let mut shell = Vec::with_capacity((c_hi - c_lo) as usize);
        self.for_each_in_shell(lo, hi, |_, s| shell.push(s));
        debug_assert_eq!(shell.len() as u64, c_hi - c_lo);
        let rank = (k - c_lo - 1) as usize;
        let (_, kth, _) = shell.select_nth_unstable_by(rank, f64::total_cmp);
        Ok(*kth)
    }

    /// All triples whose scaled value is within the degeneracy tolerance of `s`.
    pub(crate) fn cluster(&self, s: f64) -> Vec<[u64; 3]> {
        let lo = s * (1.0 - 2.0 * DEGENERACY_TOL);
        let hi = s * (1.0 + DEGENERACY_TOL);
        let mut out = Vec::new();
        self.for_each_in_shell(lo, hi, |idx, v| {
            if (v - s).abs() <= DEGENERACY_TOL * s {
                out.push(idx);
            }
        });
        out
    }
}

/// Exact counters for the unit cube, in terms of the integer `m = lambda/pi²`.
pub(crate) mod cube {
    /// `#{i in N³ : i1² + i2² + i3² <= m}`.
    pub(crate) fn count(m: u64) -> u64 {
        let mut total = 0;
        let mut i1 = 1u64;
        while i1 * i1 + 2 <= m {
            let mut i2 = 1u64;
            while i1 * i1 + i2 * i2 < m {
                total += (m - i1 * i1 - i2 * i2).isqrt();
                i2 += 1;
            }
            i1 += 1;
        }
        total
    }

    /// Smallest `m` with `count(m) >= k`, or `None` once the doubling
    /// ceiling passes `max_m`.
    pub(crate) fn kth(k: u64, max_m: u64) -> Option<u64> {
        // count(m) <= pi/6 m^{3/2}, so m_k >= (6k/pi)^{2/3}
        let floor = (6.0 * k as f64 / std::f64::consts::PI).powf(2.0 / 3.0) as u64;
        if floor > max_m {
            return None;
        }
        let mut lo = floor.saturating_sub(1).max(2);
        if count(lo) >= k {
            lo = 2;
        }
        let mut hi = (2 * lo).max(3);
        while count(hi) < k {
            lo = hi;
            hi *= 2;
            if hi > max_m {
                return None;
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if count(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }

    pub(crate) fn triples_on(m: u64) -> Vec<[u64; 3]> {
        let mut out = Vec::new();
        let mut i1 = 1u64;
        while i1 * i1 + 2 <= m {
            let mut i2 = 1u64;
            while i1 * i1 + i2 * i2 < m {
                let tail = m - i1 * i1 - i2 * i2;
                let i3 = tail.isqrt();
                if i3 * i3 == tail {
                    out.push([i1, i2, i3]);
                }
                i2 += 1;
            }
            i1 += 1;
        }
        out
    }

    pub(crate) fn triples_upto(m: u64) -> Vec<[u64; 3]> {
        let mut out = Vec::new();
        let mut i1 = 1u64;
        while i1 * i1 + 2 <= m {
            let mut i2 = 1u64;
            while i1 * i1 + i2 * i2 < m {
                let top = (m - i1 * i1 - i2 * i2).isqrt();
                out.extend((1..=top).map(|i3| [i1, i2, i3]));
                i2 += 1;
            }
            i1 += 1;
        }
        out
    }

    pub(crate) fn norm(t: [u64; 3]) -> u64 {
        t.iter().map(|i| i * i).sum()
    }
}

fn check_lambda(lambda: f64) -> Result<(), SpectrumError> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(SpectrumError::InvalidLambda(lambda))
    }
}

/// Scaled counting threshold `lambda/pi² * (1 + BOUNDARY_TOL)`.
pub(crate) fn inflated_threshold(lambda: f64) -> f64 {
    lambda / PI2 * (1.0 + BOUNDARY_TOL)
}

/// `pi² (i1²/a1² + i2²/a2² + i3²/a3²)`.
pub fn eigenvalue_of_index(cuboid: &Cuboid, i1: i64, i2: i64, i3: i64) -> Result<f64, SpectrumError> {
    let mut idx = [0u64; 3];
    for (slot, i) in idx.iter_mut().zip([i1, i2, i3]) {
        if i < 1 {
            return Err(SpectrumError::NonPositiveIndex(i));
        }
        *slot = i as u64;
    }
    Ok(PI2 * scaled_value(&cuboid.inverse_squares(), idx))
}

/// `N(lambda)`: the number of eigenvalues `<= lambda`, counted with
/// multiplicity, with boundary points included up to [`BOUNDARY_TOL`].
pub fn count_upto(cuboid: &Cuboid, lambda: f64) -> Result<u64, SpectrumError> {
    check_lambda(lambda)?;
    let t = inflated_threshold(lambda);
    if cuboid.is_unit_cube() {
        return Ok(cube::count(t.floor() as u64));
    }
    Ok(OctantCounter::new(cuboid.inverse_squares()).count(t))
}

/// The k-th eigenvalue (1-based) with all multi-indices attaining it.
pub fn kth_eigenvalue(cuboid: &Cuboid, k: u64) -> Result<SpectralPoint, SpectrumError> {
    kth_eigenvalue_with_limits(cuboid, k, &SpectrumLimits::default())
}

pub fn kth_eigenvalue_with_limits(
    cuboid: &Cuboid,
    k: u64,
    limits: &SpectrumLimits,
) -> Result<SpectralPoint, SpectrumError> {
    if k == 0 {
        return Err(SpectrumError::ZeroRank);
    }
    if cuboid.is_unit_cube() {
        let m = cube_kth(k, limits)?;
        return Ok(SpectralPoint::new(PI2 * m as f64, cube::triples_on(m)));
    }
    let counter = OctantCounter::new(cuboid.inverse_squares());
    let s = counter.kth(k, limits)?;
    Ok(SpectralPoint::new(PI2 * s, counter.cluster(s)))
}

/// The k-th eigenvalue only, skipping the multi-index collection.
pub fn kth_eigenvalue_value(cuboid: &Cuboid, k: u64) -> Result<f64, SpectrumError> {
    if k == 0 {
        return Err(SpectrumError::ZeroRank);
    }
    let limits = SpectrumLimits::default();
    if cuboid.is_unit_cube() {
        return Ok(PI2 * cube_kth(k, &limits)? as f64);
    }
    Ok(PI2 * OctantCounter::new(cuboid.inverse_squares()).kth(k, &limits)?)
}

fn cube_kth(k: u64, limits: &SpectrumLimits) -> Result<u64, SpectrumError> {
    // scaled ceiling whose octant ball holds about max_points lattice points
    let max_m = (6.0 * limits.max_points as f64 / PI).powf(2.0 / 3.0);
    cube::kth(k, max_m as u64).ok_or(SpectrumError::ResourceCap {
        ceiling: max_m * PI2,
        estimate: k as f64,
        cap: limits.max_points,
    })
}

/// `lambda_1, ..., lambda_k` in order, each with its degenerate multi-index
/// set. Entry `j - 1` describes `lambda_j`.
pub fn lowest_eigenvalues(cuboid: &Cuboid, k: u64) -> Result<Vec<SpectralPoint>, SpectrumError> {
    if k == 0 {
        return Err(SpectrumError::ZeroRank);
    }
    let w = cuboid.inverse_squares();
    let mut listed: Vec<(f64, [u64; 3])> = if cuboid.is_unit_cube() {
        let m = cube_kth(k, &SpectrumLimits::default())?;
        cube::triples_upto(m)
            .into_iter()
            .map(|t| (cube::norm(t) as f64, t))
            .collect()
    } else {
        let counter = OctantCounter::new(w);
        let s = counter.kth(k, &SpectrumLimits::default())?;
        let mut all = Vec::new();
        counter.for_each_in_shell(-1.0, s * (1.0 + DEGENERACY_TOL), |idx, v| all.push((v, idx)));
        all
    };
    listed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut out = Vec::with_capacity(k as usize);
    let (mut start, mut end) = (0usize, 0usize);
    for j in 0..k as usize {
        let s = listed[j].0;
        while (s - listed[start].0) > DEGENERACY_TOL * s {
            start += 1;
        }
        end = end.max(j);
        while end + 1 < listed.len() && listed[end + 1].0 - s <= DEGENERACY_TOL * s {
            end += 1;
        }
        let indices = listed[start..=end].iter().map(|p| p.1).collect();
        out.push(SpectralPoint::new(PI2 * s, indices));
    }
    Ok(out)
}

/// `3 pi² k²`, the k-th eigenvalue bound for the unit cube obtained from the
/// modes `(1, 1, j)`.
pub fn cube_upper_bound(k: u64) -> f64 {
    3.0 * PI2 * (k as f64).powi(2)
}
