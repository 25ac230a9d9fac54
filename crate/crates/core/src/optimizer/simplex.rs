//! Derivative-free simplex descent on the unit square.
//!
//! Reflection, contraction and shrink only. There is no expansion step: the
//! starting simplex is already the size of a grid cell, and the objective is
//! only piecewise smooth, so long extrapolated steps mostly land on the
//! wrong eigenvalue branch.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SimplexOutcome {
    pub point: [f64; 2],
    pub value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct SimplexSettings {
    pub max_iter: usize,
    /// Stop once every vertex lies within this distance of the others,
    /// measured by `size`.
    pub tol: f64,
}

fn clamp(p: [f64; 2]) -> [f64; 2] {
    p.map(|x| x.clamp(0.0, 1.0))
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    clamp([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
}

/// Minimises `f` starting from the triangle `start, start + step e1,
/// start + step e2` (steps flipped inwards at the boundary). `size` maps the
/// three vertices to the quantity compared against `settings.tol`.
pub(crate) fn minimize<F, S>(
    mut f: F,
    size: S,
    start: [f64; 2],
    step: f64,
    settings: &SimplexSettings,
) -> SimplexOutcome
where
    F: FnMut([f64; 2]) -> f64,
    S: Fn(&[[f64; 2]; 3]) -> f64,
{
    let start = clamp(start);
    let offset = |x: f64| if x + step <= 1.0 { x + step } else { x - step };
    let mut pts = [
        start,
        [offset(start[0]), start[1]],
        [start[0], offset(start[1])],
    ];
    let mut vals = pts.map(&mut f);
    let mut evaluations = 3;
    let mut iterations = 0;
    let mut converged = false;

    loop {
        sort(&mut pts, &mut vals);
        if size(&pts) <= settings.tol {
            converged = true;
            break;
        }
        if iterations >= settings.max_iter {
            break;
        }
        iterations += 1;

        let centroid = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let reflected = lerp(pts[2], centroid, 2.0);
        let fr = f(reflected);
        evaluations += 1;
        if fr < vals[1] {
            pts[2] = reflected;
            vals[2] = fr;
            continue;
        }
        // contract towards the better of the worst vertex and its reflection
        let (towards, f_towards) = if fr < vals[2] { (reflected, fr) } else { (pts[2], vals[2]) };
        let contracted = lerp(centroid, towards, 0.5);
        let fc = f(contracted);
        evaluations += 1;
        if fc < f_towards {
            pts[2] = contracted;
            vals[2] = fc;
            continue;
        }
        for i in 1..3 {
            pts[i] = lerp(pts[0], pts[i], 0.5);
            vals[i] = f(pts[i]);
            evaluations += 1;
        }
    }

    SimplexOutcome {
        point: pts[0],
        value: vals[0],
        evaluations,
        iterations,
        converged,
    }
}

/// Orders vertices by value; ties go to the lexicographically larger point
/// so that runs are reproducible.
fn sort(pts: &mut [[f64; 2]; 3], vals: &mut [f64; 3]) {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| {
        vals[i]
            .total_cmp(&vals[j])
            .then_with(|| pts[j][0].total_cmp(&pts[i][0]))
            .then_with(|| pts[j][1].total_cmp(&pts[i][1]))
    });
    *pts = order.map(|i| pts[i]);
    *vals = order.map(|i| vals[i]);
}

pub(crate) fn max_spread(pts: &[[f64; 2]; 3]) -> f64 {
    let mut spread: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            spread = spread
                .max((pts[i][0] - pts[j][0]).abs())
                .max((pts[i][1] - pts[j][1]).abs());
        }
    }
    spread
}
