//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the library's counting or search code.

#![allow(dead_code)]

use std::f64::consts::PI;

pub const PI2: f64 = PI * PI;

/// Lower end of the admissible shortest side, `1/(8(1/2 + sqrt 3))`.
pub fn a1_floor() -> f64 {
    1.0 / (8.0 * (0.5 + 3f64.sqrt()))
}

pub fn sides(a1: f64, a2: f64) -> [f64; 3] {
    [a1, a2, 1.0 / (a1 * a2)]
}

/// The `kmax` smallest values of `sum_j i_j² / a_j²` over positive triples,
/// ascending; any positive sides. The cut-off comes from the `kmax`-th
/// smallest value in a block with about `3 a_j / g` indices per axis (`g` the
/// geometric mean of the sides), which holds at least 27 triples.
pub fn lowest_scaled(s: [f64; 3], kmax: usize) -> Vec<f64> {
    assert!((1..=27).contains(&kmax));
    let w = s.map(|a| 1.0 / (a * a));
    let g = (s[0] * s[1] * s[2]).cbrt();
    let n = s.map(|a| (3.0 * a / g).ceil().max(1.0) as u32);
    let mut block = Vec::with_capacity((n[0] * n[1] * n[2]) as usize);
    for i in 1..=n[0] {
        for j in 1..=n[1] {
            for l in 1..=n[2] {
                block.push(value(&w, i, j, l));
            }
        }
    }
    block.select_nth_unstable_by(kmax - 1, f64::total_cmp);
    let cut = block[kmax - 1];

    // keep the kmax smallest seen so far, sorted
    let mut best: Vec<f64> = Vec::with_capacity(kmax + 1);
    let mut i = 1;
    while value(&w, i, 1, 1) <= cut {
        let mut j = 1;
        while value(&w, i, j, 1) <= cut {
            let mut l = 1;
            loop {
                let x = value(&w, i, j, l);
                if x > cut {
                    break;
                }
                if best.len() < kmax || x < best[kmax - 1] {
                    let at = best.partition_point(|&b| b <= x);
                    best.insert(at, x);
                    best.truncate(kmax);
                }
                l += 1;
            }
            j += 1;
        }
        i += 1;
    }
    best
}

fn value(w: &[f64; 3], i: u32, j: u32, l: u32) -> f64 {
    w[0] * f64::from(i * i) + w[1] * f64::from(j * j) + w[2] * f64::from(l * l)
}

/// Positive lattice points and all lattice points of `Z³` in the ellipsoid
/// `sum x_j²/a_j² <= lambda/pi²`, one column per `(x1, x2)` scanned upwards.
pub fn brute_counts(s: [f64; 3], lambda: f64) -> (u64, u64) {
    let t = lambda / PI2 * (1.0 + 1e-10);
    let w = s.map(|a| 1.0 / (a * a));
    let mut positive = 0u64;
    let mut all = 0u64;
    let mut x1 = 0u64;
    while w[0] * (x1 * x1) as f64 <= t {
        let mut x2 = 0u64;
        while w[0] * (x1 * x1) as f64 + w[1] * (x2 * x2) as f64 <= t {
            let base = w[0] * (x1 * x1) as f64 + w[1] * (x2 * x2) as f64;
            let mut h = 0u64;
            while base + w[2] * ((h + 1) * (h + 1)) as f64 <= t {
                h += 1;
            }
            let mult = (if x1 == 0 { 1 } else { 2 }) * (if x2 == 0 { 1 } else { 2 });
            all += mult * (2 * h + 1);
            if x1 > 0 && x2 > 0 {
                positive += h;
            }
            x2 += 1;
        }
        x1 += 1;
    }
    (positive, all)
}

/// Unit-cube spectrum: `(m, multiplicity)` for every `m <= m_max` attained
/// by a positive triple, ascending.
pub fn cube_levels(m_max: u64) -> Vec<(u64, u64)> {
    let mut mult = vec![0u64; m_max as usize + 1];
    let r = (m_max as f64).sqrt() as u64 + 1;
    for i in 1..=r {
        for j in 1..=r {
            for l in 1..=r {
                let m = i * i + j * j + l * l;
                if m <= m_max {
                    mult[m as usize] += 1;
                }
            }
        }
    }
    mult.iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(m, &c)| (m as u64, c))
        .collect()
}

/// Maps the unit square onto the admissible `(a1, a2)` region, with `u = 1`
/// landing exactly on the cube.
pub fn square_to_sides(u: f64, v: f64) -> (f64, f64) {
    let lo = a1_floor();
    let a1 = if u >= 1.0 { 1.0 } else { lo + u * (1.0 - lo) };
    (a1, a1 + v * (1.0 / a1.sqrt() - a1))
}
