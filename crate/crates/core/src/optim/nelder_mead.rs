//! Nelder-Mead simplex with boundary clamping.
//!
//! Standard coefficients: reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5. Every candidate vertex is clamped into the box before
//! evaluation, so no probe ever leaves the feasible region.

use super::{clamp_to_bounds, CountedObjective, Stop};

const ALPHA: f64 = 1.0; // reflection
const CHI: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

/// Returns Ok(converged); budget/abort surfaces as Err(Stop).
pub(crate) fn run(
    obj: &mut CountedObjective,
    x0: &[f64],
    bounds: &[(f64, f64)],
    ftol: f64,
) -> Result<bool, Stop> {
    let dim = x0.len();
    let window = 2 * dim;

    // Initial simplex: x0 plus one vertex per coordinate, displaced by 10%
    // of the box width (reflected inward at the upper bound).
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    verts.push(x0.to_vec());
    for i in 0..dim {
        let (lo, hi) = bounds[i];
        let span = hi - lo;
        let step = if span > 0.0 { 0.1 * span } else { 0.1 };
        let mut v = x0.to_vec();
        v[i] = if v[i] + step <= hi { v[i] + step } else { v[i] - step };
        clamp_to_bounds(&mut v, bounds);
        verts.push(v);
    }
    let mut fvals: Vec<f64> = Vec::with_capacity(dim + 1);
    for v in &verts {
        fvals.push(obj.eval(v)?);
    }

    let mut best_history: Vec<f64> = Vec::new();
    loop {
        // Order vertices by objective value.
        let mut idx: Vec<usize> = (0..=dim).collect();
        idx.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap());
        let reorder = |src: &[Vec<f64>], idx: &[usize]| -> Vec<Vec<f64>> {
            idx.iter().map(|&i| src[i].clone()).collect()
        };
        verts = reorder(&verts, &idx);
        fvals = idx.iter().map(|&i| fvals[i]).collect();

        best_history.push(fvals[0]);
        let k = best_history.len();
        if k > window {
            let cur = best_history[k - 1];
            let old = best_history[k - 1 - window];
            if (old - cur).abs() < ftol * (1.0 + cur.abs()) {
                return Ok(true);
            }
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for v in verts.iter().take(dim) {
            for (c, &vi) in centroid.iter_mut().zip(v) {
                *c += vi;
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let worst = fvals[dim];
        let second_worst = fvals[dim - 1];
        let point = |coef: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&verts[dim])
                .map(|(&c, &w)| c + coef * (c - w))
                .collect();
            clamp_to_bounds(&mut p, bounds);
            p
        };

        let xr = point(ALPHA);
        let fr = obj.eval(&xr)?;
        if fr < fvals[0] {
            let xe = point(ALPHA * CHI);
            let fe = obj.eval(&xe)?;
            if fe < fr {
                verts[dim] = xe;
                fvals[dim] = fe;
            } else {
                verts[dim] = xr;
                fvals[dim] = fr;
            }
        } else if fr < second_worst {
            verts[dim] = xr;
            fvals[dim] = fr;
        } else {
            let (xc, fc) = if fr < worst {
                // Outside contraction.
                let xc = point(ALPHA * RHO);
                let fc = obj.eval(&xc)?;
                (xc, fc)
            } else {
                // Inside contraction.
                let xc = point(-RHO);
                let fc = obj.eval(&xc)?;
                (xc, fc)
            };
            if fc < worst.min(fr) {
                verts[dim] = xc;
                fvals[dim] = fc;
            } else {
                // Shrink toward the best vertex.
                for i in 1..=dim {
                    let mut v: Vec<f64> = verts[0]
                        .iter()
                        .zip(&verts[i])
                        .map(|(&b, &vi)| b + SIGMA * (vi - b))
                        .collect();
                    clamp_to_bounds(&mut v, bounds);
                    fvals[i] = obj.eval(&v)?;
                    verts[i] = v;
                }
            }
        }
    }
}
