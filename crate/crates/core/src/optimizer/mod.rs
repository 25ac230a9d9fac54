//! Minimisation of `lambda_k` over unit-volume boxes.
//!
//! The search runs on the unit square `(u, v)`, mapped onto the fundamental
//! domain by
//!
//! ```text
//! a1 = a1_lo + u (1 - a1_lo)            a1 in [a1_lo, 1]
//! a2 = a1 + v (a1^{-1/2} - a1)          a2 in [a1, a1^{-1/2}]
//! ```
//!
//! so every grid node is admissible, and `u = 1` is exactly the unit cube.
//! A coarse grid picks basins, each basin is refined by simplex descent, and
//! the best refined point wins.

mod simplex;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::a1_lower_bound;
use crate::cuboid::{Cuboid, GeometryError};
use crate::lattice::RemainderExponents;
use crate::spectrum::{self, SpectrumError};

use simplex::{SimplexOutcome, SimplexSettings};

/// Relative window in which two `lambda` values count as the same optimum.
pub const TIE_TOL: f64 = 1e-8;
/// Side distance above which two tied optima are different boxes.
pub const DISTINCT_SIDE_TOL: f64 = 1e-4;
/// Records with `delta` at or below this are dropped from [`rate_fit`].
pub const RATE_FIT_FLOOR: f64 = 1e-6;

/// Number of extra simplex runs restarted from the incumbent of a basin.
const RESTARTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("k must be at least 1")]
    ZeroRank,
    #[error("(a1, a2) = ({a1}, {a2}) is outside the search box")]
    OutOfBox { a1: f64, a2: f64 },
    #[error("empty k set")]
    EmptySweep,
    #[error("rate fit needs at least 10 records spanning two decades of k, got {records} spanning {decades:.2}")]
    InsufficientSpan { records: usize, decades: f64 },
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// The admissible `(a1, a2)` region; `a3 = 1/(a1 a2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub a1_lo: f64,
    pub a1_hi: f64,
}

impl Default for SearchBox {
    fn default() -> Self {
        Self {
            a1_lo: a1_lower_bound(),
            a1_hi: 1.0,
        }
    }
}

impl SearchBox {
    /// `[a1, a1^{-1/2}]`, the range of `a2` that keeps `a1 <= a2 <= a3`.
    pub fn a2_range(&self, a1: f64) -> (f64, f64) {
        (a1, 1.0 / a1.sqrt())
    }

    pub fn contains(&self, a1: f64, a2: f64) -> bool {
        const SLOP: f64 = 1e-12;
        if !(a1.is_finite() && a2.is_finite()) {
            return false;
        }
        if a1 < self.a1_lo - SLOP || a1 > self.a1_hi + SLOP {
            return false;
        }
        let (lo, hi) = self.a2_range(a1);
        a2 >= lo - SLOP && a2 <= hi * (1.0 + SLOP)
    }

    /// Maps `(u, v) in [0, 1]²` onto `(a1, a2)`.
    pub fn map(&self, u: f64, v: f64) -> (f64, f64) {
        let a1 = if u >= 1.0 {
            self.a1_hi
        } else {
            self.a1_lo + u * (self.a1_hi - self.a1_lo)
        };
        let (lo, hi) = self.a2_range(a1);
        (a1, lo + v * (hi - lo))
    }

    pub fn cuboid(&self, u: f64, v: f64) -> Result<Cuboid, GeometryError> {
        let (a1, a2) = self.map(u, v);
        Cuboid::new(a1, a2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Grid nodes per axis of the coarse scan.
    pub grid: usize,
    /// Number of grid basins refined by simplex descent.
    pub basins: usize,
    /// Iteration cap of one simplex run.
    pub max_iter: usize,
    /// Simplex stops once its vertices agree to this in `a1` and `a2`.
    pub side_tol: f64,
    pub search_box: SearchBox,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid: 64,
            basins: 8,
            max_iter: 500,
            side_tol: 1e-9,
            search_box: SearchBox::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        if self.grid < 2 {
            return Err(OptimizeError::InvalidConfig("grid needs at least 2 nodes per axis".into()));
        }
        if self.basins == 0 {
            return Err(OptimizeError::InvalidConfig("at least one basin is required".into()));
        }
        if !(self.side_tol.is_finite() && self.side_tol > 0.0) {
            return Err(OptimizeError::InvalidConfig(format!("side_tol {}", self.side_tol)));
        }
        let b = self.search_box;
        if !(b.a1_lo > 0.0 && b.a1_lo < b.a1_hi && b.a1_hi <= 1.0) {
            return Err(OptimizeError::InvalidConfig(format!(
                "a1 range [{}, {}]",
                b.a1_lo, b.a1_hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizeStatus {
    Converged,
    /// The winning simplex run hit its iteration cap; the record holds the
    /// best point seen.
    NotConverged,
}

impl OptimizeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptimizeStatus::Converged => "converged",
            OptimizeStatus::NotConverged => "not_converged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalRecord {
    pub k: u64,
    pub cuboid: Cuboid,
    pub lambda_star: f64,
    /// `a3 - 1`.
    pub delta: f64,
    pub evaluations: u64,
    /// Basins whose refined value ties the optimum.
    pub restarts_agreeing: u32,
    /// False when a tied basin ends on a visibly different box.
    pub unique_within_tol: bool,
    pub status: OptimizeStatus,
}

/// `lambda_k` of the box with sides `a1`, `a2`, `1/(a1 a2)`, restricted to
/// the default search box.
pub fn objective(k: u64, a1: f64, a2: f64) -> Result<f64, OptimizeError> {
    if k == 0 {
        return Err(OptimizeError::ZeroRank);
    }
    if !SearchBox::default().contains(a1, a2) {
        return Err(OptimizeError::OutOfBox { a1, a2 });
    }
    Ok(spectrum::kth_eigenvalue_value(&Cuboid::new(a1, a2)?, k)?)
}

struct Evaluator {
    k: u64,
    search_box: SearchBox,
}

impl Evaluator {
    fn at(&self, p: [f64; 2]) -> Result<f64, OptimizeError> {
        let cuboid = self.search_box.cuboid(p[0], p[1])?;
        Ok(spectrum::kth_eigenvalue_value(&cuboid, self.k)?)
    }

    fn sides(&self, p: [f64; 2]) -> [f64; 2] {
        let (a1, a2) = self.search_box.map(p[0], p[1]);
        [a1, a2]
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    point: [f64; 2],
    sides: [f64; 2],
    value: f64,
}

/// Lower value first, then the lexicographically larger `(a1, a2)`.
fn rank(a: &Node, b: &Node) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then_with(|| b.sides[0].total_cmp(&a.sides[0]))
        .then_with(|| b.sides[1].total_cmp(&a.sides[1]))
}

fn grid_scan(eval: &Evaluator, g: usize) -> Result<Vec<Vec<Node>>, OptimizeError> {
    let coord = |i: usize| i as f64 / (g - 1) as f64;
    (0..g)
        .into_par_iter()
        .map(|i| {
            (0..g)
                .map(|j| {
                    let point = [coord(i), coord(j)];
                    Ok(Node {
                        point,
                        sides: eval.sides(point),
                        value: eval.at(point)?,
                    })
                })
                .collect()
        })
        .collect()
}

fn pick_basins(grid: &[Vec<Node>], count: usize) -> Vec<Node> {
    let g = grid.len();
    let mut minima = Vec::new();
    let mut rest = Vec::new();
    for i in 0..g {
        for j in 0..g {
            let here = grid[i][j];
            let is_min = (i.saturating_sub(1)..(i + 2).min(g)).all(|a| {
                (j.saturating_sub(1)..(j + 2).min(g)).all(|b| grid[a][b].value >= here.value)
            });
            if is_min {
                minima.push(here);
            } else {
                rest.push(here);
            }
        }
    }
    minima.sort_by(rank);
    rest.sort_by(rank);
    let mut picked: Vec<Node> = Vec::with_capacity(count);
    // the u = 1 edge maps every v to the cube, so skip repeated boxes
    for node in minima.into_iter().chain(rest) {
        if picked.len() == count {
            break;
        }
        if !picked.iter().any(|p| p.sides == node.sides) {
            picked.push(node);
        }
    }
    picked
}

struct Refined {
    best: Node,
    evaluations: usize,
    converged: bool,
}

fn refine(eval: &Evaluator, start: Node, step: f64, config: &OptimizerConfig) -> Refined {
    let settings = SimplexSettings {
        max_iter: config.max_iter,
        tol: config.side_tol,
    };
    let sides_spread = |pts: &[[f64; 2]; 3]| simplex::max_spread(&pts.map(|p| eval.sides(p)));
    // evaluation failures (resource caps far from the optimum) rank last
    let f = |p: [f64; 2]| eval.at(p).unwrap_or(f64::INFINITY);

    let mut best = start;
    let mut evaluations = 0;
    let mut converged = false;
    let mut step = step;
    for _ in 0..=RESTARTS {
        let out: SimplexOutcome = simplex::minimize(f, sides_spread, best.point, step, &settings);
        evaluations += out.evaluations;
        let candidate = Node {
            point: out.point,
            sides: eval.sides(out.point),
            value: out.value,
        };
        let improved = rank(&candidate, &best) == Ordering::Less;
        if improved {
            best = candidate;
        }
        converged = out.converged;
        if !improved && converged {
            break;
        }
        step /= 4.0;
    }
    Refined {
        best,
        evaluations,
        converged,
    }
}

/// Best box for `lambda_k`: coarse grid, then simplex refinement of the best
/// basins. Deterministic for a fixed configuration.
pub fn optimize_k(k: u64, config: &OptimizerConfig) -> Result<OptimalRecord, OptimizeError> {
    if k == 0 {
        return Err(OptimizeError::ZeroRank);
    }
    config.validate()?;
    let eval = Evaluator {
        k,
        search_box: config.search_box,
    };
    let grid = grid_scan(&eval, config.grid)?;
    let basins = pick_basins(&grid, config.basins);
    let step = 1.0 / (config.grid - 1) as f64;
    let refined: Vec<Refined> = basins
        .par_iter()
        .map(|&b| refine(&eval, b, step, config))
        .collect();

    let winner = refined
        .iter()
        .min_by(|a, b| rank(&a.best, &b.best))
        .expect("at least one basin");
    let lambda_star = winner.best.value;
    let tied: Vec<&Refined> = refined
        .iter()
        .filter(|r| (r.best.value - lambda_star).abs() <= TIE_TOL * lambda_star)
        .collect();
    // among tied optima prefer the box closest to the cube
    let chosen = tied
        .iter()
        .max_by(|a, b| {
            a.best.sides[0]
                .total_cmp(&b.best.sides[0])
                .then_with(|| a.best.sides[1].total_cmp(&b.best.sides[1]))
        })
        .expect("winner is tied with itself");
    let unique = tied.iter().all(|r| {
        r.best
            .sides
            .iter()
            .zip(chosen.best.sides)
            .all(|(x, y)| (x - y).abs() <= DISTINCT_SIDE_TOL)
    });

    let cuboid = config.search_box.cuboid(chosen.best.point[0], chosen.best.point[1])?;
    let evaluations = grid.len() * grid.len() + refined.iter().map(|r| r.evaluations).sum::<usize>();
    Ok(OptimalRecord {
        k,
        cuboid,
        lambda_star: chosen.best.value,
        delta: cuboid.a3() - 1.0,
        evaluations: evaluations as u64,
        restarts_agreeing: tied.len() as u32,
        unique_within_tol: unique,
        status: if chosen.converged {
            OptimizeStatus::Converged
        } else {
            OptimizeStatus::NotConverged
        },
    })
}

/// One sweep result; failures are kept per `k` instead of aborting the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub k: u64,
    pub outcome: Result<OptimalRecord, OptimizeError>,
}

/// [`optimize_k`] for every `k`, in input order.
pub fn sweep(ks: &[u64], config: &OptimizerConfig) -> Result<Vec<SweepEntry>, OptimizeError> {
    if ks.is_empty() {
        return Err(OptimizeError::EmptySweep);
    }
    config.validate()?;
    Ok(ks
        .par_iter()
        .map(|&k| {
            let outcome = optimize_k(k, config);
            match &outcome {
                Ok(r) => log::info!("k={k}: lambda* {:.12} delta {:.6}", r.lambda_star, r.delta),
                Err(e) => log::warn!("k={k}: {e}"),
            }
            SweepEntry { k, outcome }
        })
        .collect())
}

/// `2^0, 2^1, ...` restricted to `[k_min, k_max]`.
pub fn dyadic_range(k_min: u64, k_max: u64) -> Vec<u64> {
    (0..64)
        .map(|e| 1u64 << e)
        .skip_while(|&k| k < k_min)
        .take_while(|&k| k <= k_max)
        .collect()
}

/// Least-squares fit of `ln delta` against `ln k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    /// `-(2 - beta)/6` for the default sphere exponent.
    pub theoretical: f64,
}

/// Fits `delta_k ~ C k^exponent` over records with `delta_k > 1e-6`.
/// Descriptive only.
pub fn rate_fit(records: &[OptimalRecord]) -> Result<RateFit, OptimizeError> {
    let decades = |ks: &mut dyn Iterator<Item = u64>| {
        let (lo, hi) = ks.fold((u64::MAX, 0), |(lo, hi), k| (lo.min(k), hi.max(k)));
        if hi == 0 {
            0.0
        } else {
            (hi as f64 / lo as f64).log10()
        }
    };
    let span = decades(&mut records.iter().map(|r| r.k));
    if records.len() < 10 || span < 2.0 {
        return Err(OptimizeError::InsufficientSpan {
            records: records.len(),
            decades: span,
        });
    }
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.delta > RATE_FIT_FLOOR)
        .map(|r| ((r.k as f64).ln(), r.delta.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if pts.len() < 2 || sxx <= 0.0 {
        return Err(OptimizeError::InsufficientSpan {
            records: pts.len(),
            decades: 0.0,
        });
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let exponent = sxy / sxx;
    Ok(RateFit {
        exponent,
        intercept: my - exponent * mx,
        r_squared: if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 },
        points: pts.len(),
        theoretical: RemainderExponents::default().side_decay_exponent(),
    })
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    })
}

/// Median `delta` over records with `k_lo <= k <= k_hi`.
pub fn median_delta(records: &[OptimalRecord], k_lo: u64, k_hi: u64) -> Option<f64> {
    median(
        records
            .iter()
            .filter(|r| (k_lo..=k_hi).contains(&r.k))
            .map(|r| r.delta)
            .collect(),
    )
}

/// Medians of `delta` over sliding windows of `window` consecutive records,
/// sorted by `k`. Entry `(k_first, k_last, median)`.
pub fn windowed_medians(records: &[OptimalRecord], window: usize) -> Vec<(u64, u64, f64)> {
    let mut sorted: Vec<&OptimalRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.k);
    if window == 0 || sorted.len() < window {
        return Vec::new();
    }
    sorted
        .windows(window)
        .map(|w| {
            let m = median(w.iter().map(|r| r.delta).collect()).expect("nonempty window");
            (w[0].k, w[window - 1].k, m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const PI2: f64 = PI * PI;

    fn synthetic(k: u64, delta: f64) -> OptimalRecord {
        OptimalRecord {
            k,
            cuboid: Cuboid::unit_cube(),
            lambda_star: 0.0,
            delta,
            evaluations: 0,
            restarts_agreeing: 1,
            unique_within_tol: true,
            status: OptimizeStatus::Converged,
        }
    }

    #[test]
    fn search_box_mapping() {
        let b = SearchBox::default();
        assert_eq!(b.map(1.0, 0.0), (1.0, 1.0));
        assert_eq!(b.map(1.0, 0.7), (1.0, 1.0));
        assert!(b.cuboid(1.0, 0.3).unwrap().is_unit_cube());
        let (a1, a2) = b.map(0.0, 1.0);
        assert_eq!(a1, b.a1_lo);
        assert!((a2 - 1.0 / a1.sqrt()).abs() < 1e-15);
        for &(u, v) in &[(0.0, 0.0), (0.3, 0.9), (0.99, 0.01), (0.0, 1.0)] {
            let (a1, a2) = b.map(u, v);
            assert!(b.contains(a1, a2));
            let c = b.cuboid(u, v).unwrap();
            assert!(c.a3() <= 319.0 + 1e-9);
        }
        assert!(!b.contains(0.01, 1.0));
        assert!(!b.contains(0.5, 0.4));
        assert!(!b.contains(0.5, 1.5));
    }

    #[test]
    fn objective_examples() {
        assert!((objective(1, 1.0, 1.0).unwrap() - 3.0 * PI2).abs() < 1e-12);
        assert!((objective(1, 0.5, 1.0).unwrap() - 5.25 * PI2).abs() < 1e-9);
        assert!((objective(2, 1.0, 1.0).unwrap() - 6.0 * PI2).abs() < 1e-12);
        assert!(matches!(objective(1, 0.01, 1.0), Err(OptimizeError::OutOfBox { .. })));
        assert!(matches!(objective(0, 1.0, 1.0), Err(OptimizeError::ZeroRank)));
    }

    #[test]
    fn k1_is_the_cube() {
        let r = optimize_k(1, &OptimizerConfig::default()).unwrap();
        assert!((r.lambda_star - 3.0 * PI2).abs() <= 1e-6 * 3.0 * PI2);
        for s in r.cuboid.sides() {
            assert!((s - 1.0).abs() < 1e-6, "{:?}", r.cuboid);
        }
        assert_eq!(r.status, OptimizeStatus::Converged);
    }

    #[test]
    fn k2_sandwich() {
        let r = optimize_k(2, &OptimizerConfig::default()).unwrap();
        assert!(r.lambda_star <= 6.0 * PI2 * (1.0 + 1e-12));
        assert!(r.lambda_star >= (12.0 * PI2).powf(2.0 / 3.0));
        assert!(r.delta >= -1e-9);
    }

    #[test]
    fn sweep_keeps_order_and_rejects_empty() {
        let config = OptimizerConfig {
            grid: 16,
            ..OptimizerConfig::default()
        };
        let out = sweep(&[3, 1, 2], &config).unwrap();
        assert_eq!(out.iter().map(|e| e.k).collect::<Vec<_>>(), vec![3, 1, 2]);
        assert!(out.iter().all(|e| e.outcome.is_ok()));
        assert_eq!(sweep(&[], &config), Err(OptimizeError::EmptySweep));
        let bad = sweep(&[0, 1], &config).unwrap();
        assert_eq!(bad[0].outcome, Err(OptimizeError::ZeroRank));
        assert!(bad[1].outcome.is_ok());
    }

    #[test]
    fn dyadic_points() {
        assert_eq!(dyadic_range(1, 16), vec![1, 2, 4, 8, 16]);
        assert_eq!(dyadic_range(3, 20), vec![4, 8, 16]);
        assert!(dyadic_range(5, 7).is_empty());
    }

    #[test]
    fn rate_fit_synthetic_power_law() {
        let recs: Vec<_> = (0..15).map(|e| 1u64 << e).map(|k| synthetic(k, 0.7 * (k as f64).powf(-0.1))).collect();
        let fit = rate_fit(&recs).unwrap();
        assert!((fit.exponent + 0.1).abs() < 1e-6, "{fit:?}");
        assert!((fit.theoretical + 23.0 / 258.0).abs() < 1e-15);
    }

    #[test]
    fn rate_fit_constant_and_span_errors() {
        let recs: Vec<_> = (0..12).map(|e| synthetic(1 << e, 0.25)).collect();
        assert_eq!(rate_fit(&recs).unwrap().exponent, 0.0);
        let short: Vec<_> = (1..=20).map(|k| synthetic(k, 0.25)).collect();
        assert!(matches!(rate_fit(&short), Err(OptimizeError::InsufficientSpan { .. })));
        assert!(matches!(rate_fit(&recs[..5]), Err(OptimizeError::InsufficientSpan { .. })));
    }

    #[test]
    fn medians() {
        let recs: Vec<_> = [(1, 0.5), (2, 0.1), (4, 0.3), (8, 0.2)].map(|(k, d)| synthetic(k, d)).to_vec();
        assert_eq!(median_delta(&recs, 1, 4), Some(0.3));
        assert_eq!(median_delta(&recs, 1, 8), Some(0.25));
        assert_eq!(median_delta(&recs, 100, 200), None);
        assert_eq!(windowed_medians(&recs, 3), vec![(1, 4, 0.3), (2, 8, 0.2)]);
    }
}
