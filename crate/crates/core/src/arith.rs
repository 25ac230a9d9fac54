//! Integer kernels: representation numbers, divisor counts and exact
//! circle/sphere lattice counts.
//!
//! Everything here is pure integer arithmetic. Radii given as reals are
//! snapped to an integer squared radius with the same inclusive boundary
//! tolerance that the spectral counters use.

use crate::spectrum::BOUNDARY_TOL;

/// Largest integer `m` with `m <= r²`, treating values within the relative
/// boundary tolerance as attained.
pub fn squared_radius_floor(r: f64) -> u64 {
    assert!(r >= 0.0 && r.is_finite(), "radius must be finite and nonnegative");
    (r * r * (1.0 + BOUNDARY_TOL)).floor() as u64
}

/// `#{(x, y) in Z² : x² + y² <= m}`.
pub fn circle_count_sq(m: u64) -> u64 {
    let r = m.isqrt();
    let inner: u64 = (1..=r).map(|x| 2 * (m - x * x).isqrt() + 1).sum();
    (2 * r + 1) + 2 * inner
}

/// Lattice points of `Z²` in the closed disc of radius `r`.
pub fn gauss_circle_count(r: f64) -> u64 {
    circle_count_sq(squared_radius_floor(r))
}

/// `#{(x, y, z) in Z³ : x² + y² + z² <= m}`, one integer square root per
/// `(x, y)` column.
pub fn sphere_count_sq(m: u64) -> u64 {
    let r = m.isqrt();
    let mut total = 0u64;
    for x in 0..=r {
        let rx = m - x * x;
        let ry = rx.isqrt();
        let mut plane = 0u64;
        for y in 0..=ry {
            let col = 2 * (rx - y * y).isqrt() + 1;
            plane += if y == 0 { col } else { 2 * col };
        }
        total += if x == 0 { plane } else { 2 * plane };
    }
    total
}

/// Lattice points of `Z³` in the closed ball of radius `r`.
pub fn gauss_sphere_count(r: f64) -> u64 {
    sphere_count_sq(squared_radius_floor(r))
}

/// Prime factorisation by trial division, ascending `(p, e)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Value of the character `(-1/d)` summed over the odd divisors of a number
/// with the given factorisation. The sum is multiplicative, so each odd prime
/// power contributes `sum_{j<=e} chi(p)^j`.
fn odd_divisor_character_sum(factors: &[(u64, u32)]) -> u64 {
    let mut acc = 1u64;
    for &(p, e) in factors {
        match p % 4 {
            1 => acc *= u64::from(e) + 1,
            3 if e % 2 == 1 => return 0,
            _ => {}
        }
    }
    acc
}

/// Number of `(x1, x2) in Z²` with `x1² + x2² = n`; `r2(0) = 1`.
///
/// Computed as `4 * sum_{d | n, d odd} (-1/d)`.
pub fn r2(n: u64) -> u64 {
    if n == 0 {
        return 1;
    }
    4 * odd_divisor_character_sum(&factorize(n))
}

/// Number of positive divisors of `n >= 1`, by trial division up to `sqrt(n)`.
pub fn divisor_count(n: u64) -> u64 {
    assert!(n >= 1, "divisor_count is defined for n >= 1");
    let r = n.isqrt();
    let mut count = 0;
    for d in 1..=r {
        if n.is_multiple_of(d) {
            count += if d * d == n { 1 } else { 2 };
        }
    }
    count
}

/// Number of `(x1, x2, x3) in Z³` with squared norm `d`, as
/// `sum_{|z| <= sqrt(d)} r2(d - z²)` with `r2(0) = 1`.
pub fn r3(d: u64) -> u64 {
    let r = d.isqrt();
    r2(d) + 2 * (1..=r).map(|z| r2(d - z * z)).sum::<u64>()
}

/// Number of strictly positive triples with `i1² + i2² + i3² = m`.
pub fn cube_multiplicity(m: u64) -> u64 {
    let mut count = 0;
    let mut i1 = 1u64;
    while i1 * i1 + 2 <= m {
        let rest = m - i1 * i1;
        let mut i2 = 1u64;
        while i2 * i2 < rest {
            let tail = rest - i2 * i2;
            let i3 = tail.isqrt();
            if i3 * i3 == tail {
                count += 1;
            }
            i2 += 1;
        }
        i1 += 1;
    }
    count
}

/// Number of strictly positive pairs with `i1² + i2² <= m` (first-quadrant
/// disc count excluding the axes).
pub fn quadrant_count_sq(m: u64) -> u64 {
    (1..=m.isqrt()).map(|x| (m - x * x).isqrt()).sum()
}

/// Smallest-prime-factor table for batch factorisation of `0..=limit`.
#[derive(Debug, Clone)]
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: u32) -> Self {
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                if p > si || (p as usize) * i > n {
                    break;
                }
                spf[p as usize * i] = p;
            }
        }
        Self { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn smallest_prime_factor(&self, n: u64) -> Option<u64> {
        (n >= 2).then(|| u64::from(self.spf[n as usize]))
    }

    pub fn factorize(&self, n: u64) -> Vec<(u64, u32)> {
        assert!(n <= self.limit(), "{n} exceeds sieve limit {}", self.limit());
        let mut out: Vec<(u64, u32)> = Vec::new();
        let mut n = n as usize;
        while n >= 2 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        out
    }

    pub fn r2(&self, n: u64) -> u64 {
        if n == 0 {
            return 1;
        }
        4 * odd_divisor_character_sum(&self.factorize(n))
    }

    pub fn divisor_count(&self, n: u64) -> u64 {
        assert!(n >= 1);
        self.factorize(n).iter().map(|&(_, e)| u64::from(e) + 1).product()
    }

    /// `r2` over the whole table, index `n` holding `r2(n)`.
    pub fn r2_table(&self) -> Vec<u64> {
        (0..=self.limit()).map(|n| self.r2(n)).collect()
    }
}
