//! Box-constrained limited-memory quasi-Newton minimizer.
//!
//! L-BFGS two-loop recursion over the free variables, projected gradients at
//! active bounds, a projected backtracking (Armijo) line search, and
//! forward-difference gradients. Every gradient probe stays inside the box
//! (the step flips to backward difference at an upper bound) and counts as
//! one objective evaluation.

use super::{clamp_to_bounds, CountedObjective, Stop};
use crate::optim::OptimizerConfig;

const MEMORY: usize = 10;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const BOUND_EPS: f64 = 1e-12;
const PG_TOL: f64 = 1e-10;

/// Forward-difference gradient with relative step; counted per component.
pub(crate) fn fd_gradient(
    obj: &mut CountedObjective,
    x: &[f64],
    fx: f64,
    bounds: &[(f64, f64)],
    fd_step: f64,
) -> Result<Vec<f64>, Stop> {
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let h = fd_step * (1.0 + x[i].abs());
        let (lo, hi) = bounds[i];
        let mut xp = x.to_vec();
        if x[i] + h <= hi {
            xp[i] = x[i] + h;
            g[i] = (obj.eval(&xp)? - fx) / h;
        } else {
            xp[i] = (x[i] - h).max(lo);
            let hb = x[i] - xp[i];
            g[i] = if hb > 0.0 { (fx - obj.eval(&xp)?) / hb } else { 0.0 };
        }
    }
    Ok(g)
}

/// Zeroes gradient components that push out of the box at active bounds.
fn project_gradient(g: &[f64], x: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    g.iter()
        .zip(x.iter().zip(bounds))
        .map(|(&gi, (&xi, &(lo, hi)))| {
            let at_lo = xi - lo <= BOUND_EPS * (1.0 + lo.abs());
            let at_hi = hi - xi <= BOUND_EPS * (1.0 + hi.abs());
            if (at_lo && gi > 0.0) || (at_hi && gi < 0.0) {
                0.0
            } else {
                gi
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L-BFGS two-loop recursion: approximates -H * g from stored (s, y) pairs.
fn two_loop(g: &[f64], s_hist: &[Vec<f64>], y_hist: &[Vec<f64>]) -> Vec<f64> {
    let mut q = g.to_vec();
    let k = s_hist.len();
    let mut alphas = vec![0.0; k];
    let mut rhos = vec![0.0; k];
    for i in (0..k).rev() {
        rhos[i] = 1.0 / dot(&y_hist[i], &s_hist[i]);
        alphas[i] = rhos[i] * dot(&s_hist[i], &q);
        for (qj, yj) in q.iter_mut().zip(&y_hist[i]) {
            *qj -= alphas[i] * yj;
        }
    }
    if k > 0 {
        let last = k - 1;
        let scale = dot(&s_hist[last], &y_hist[last]) / dot(&y_hist[last], &y_hist[last]);
        for qj in q.iter_mut() {
            *qj *= scale;
        }
    }
    for i in 0..k {
        let beta = rhos[i] * dot(&y_hist[i], &q);
        for (qj, sj) in q.iter_mut().zip(&s_hist[i]) {
            *qj += (alphas[i] - beta) * sj;
        }
    }
    for qj in q.iter_mut() {
        *qj = -*qj;
    }
    q
}

pub(crate) fn run(
    obj: &mut CountedObjective,
    x0: &[f64],
    bounds: &[(f64, f64)],
    cfg: &OptimizerConfig,
) -> Result<bool, Stop> {
    let mut x = x0.to_vec();
    let mut fx = obj.eval(&x)?;
    let mut g = fd_gradient(obj, &x, fx, bounds, cfg.fd_step)?;
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();

    loop {
        let pg = project_gradient(&g, &x, bounds);
        let pg_norm = pg.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if pg_norm < PG_TOL {
            return Ok(true);
        }

        // Direction from the memory over free variables; fall back to
        // steepest descent if it is not a descent direction.
        let mut d = two_loop(&pg, &s_hist, &y_hist);
        for (di, pgi) in d.iter_mut().zip(&pg) {
            if *pgi == 0.0 {
                *di = 0.0;
            }
        }
        if dot(&d, &pg) >= 0.0 {
            d = pg.iter().map(|&v| -v).collect();
        }

        // Projected backtracking line search.
        let mut t = 1.0;
        let mut accepted: Option<(Vec<f64>, f64)> = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut xt: Vec<f64> = x.iter().zip(&d).map(|(&xi, &di)| xi + t * di).collect();
            clamp_to_bounds(&mut xt, bounds);
            let step: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
            if step.iter().all(|&si| si == 0.0) {
                break;
            }
            let ft = obj.eval(&xt)?;
            if ft <= fx + ARMIJO_C1 * dot(&g, &step) {
                accepted = Some((xt, ft));
                break;
            }
            t *= 0.5;
        }
        let (x_new, f_new) = match accepted {
            Some(pair) => pair,
            // No decrease found along the projected path: stationary.
            None => return Ok(true),
        };

        let g_new = fd_gradient(obj, &x_new, f_new, bounds, cfg.fd_step)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            s_hist.push(s);
            y_hist.push(y);
            if s_hist.len() > MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
            }
        }

        let f_prev = fx;
        x = x_new;
        fx = f_new;
        g = g_new;

        if (f_prev - fx).abs() < cfg.ftol * (1.0 + fx.abs()) {
            return Ok(true);
        }
    }
}
