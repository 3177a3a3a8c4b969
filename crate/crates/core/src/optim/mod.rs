//! Bounded classical optimizers with exact objective-evaluation counting,
//! plus the random-initialization multistart driver (the naive QAOA loop).

mod nelder_mead;
mod quasi_newton;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CutTable;
use crate::sim::{expectation, ParameterVector, BETA_MAX, GAMMA_MAX};

/// Which minimizer backs `minimize`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    NelderMead,
    QuasiNewton,
}

impl OptimizerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptimizerKind::NelderMead => "nelder-mead",
            OptimizerKind::QuasiNewton => "quasi-newton",
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nelder-mead" => Ok(OptimizerKind::NelderMead),
            "quasi-newton" => Ok(OptimizerKind::QuasiNewton),
            other => Err(Error::Domain(format!("unknown optimizer kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    /// Functional tolerance for the convergence window.
    pub ftol: f64,
    /// Evaluation budget; exhausting it returns best-so-far, not an error.
    pub max_evals: usize,
    /// Relative forward-difference step (quasi-Newton only).
    pub fd_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::QuasiNewton,
            ftol: 1e-6,
            max_evals: 10_000,
            fd_step: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind) -> Self {
        OptimizerConfig {
            kind,
            ..Default::default()
        }
    }
}

/// Outcome of one bounded minimization.
#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Result of one QAOA instance optimization (maximization of F).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub params: ParameterVector,
    pub value: f64,
    /// Every objective evaluation, including finite-difference probes.
    pub fc: usize,
    pub ar: f64,
    pub converged: bool,
}

/// Why the counted objective stopped the algorithm early.
pub(crate) enum Stop {
    Budget,
    NonFinite,
}

/// Wraps the raw objective with exact call counting, budget enforcement,
/// finiteness checks, and best-so-far tracking.
pub(crate) struct CountedObjective<'a> {
    f: &'a mut dyn FnMut(&[f64]) -> f64,
    max_evals: usize,
    pub evals: usize,
    pub best_x: Vec<f64>,
    pub best_f: f64,
}

impl<'a> CountedObjective<'a> {
    fn new(f: &'a mut dyn FnMut(&[f64]) -> f64, max_evals: usize) -> Self {
        CountedObjective {
            f,
            max_evals,
            evals: 0,
            best_x: Vec::new(),
            best_f: f64::INFINITY,
        }
    }

    pub fn eval(&mut self, x: &[f64]) -> std::result::Result<f64, Stop> {
        if self.evals >= self.max_evals {
            return Err(Stop::Budget);
        }
        self.evals += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Stop::NonFinite);
        }
        if v < self.best_f {
            self.best_f = v;
            self.best_x = x.to_vec();
        }
        Ok(v)
    }
}

pub(crate) fn clamp_to_bounds(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(lo, hi);
    }
}

/// Minimizes `objective` over the box `bounds` starting from `x0`.
///
/// `evals` counts every objective call made, including finite-difference
/// probes. A non-finite objective value aborts with an error; exhausting
/// `max_evals` returns the best point seen with `converged = false`.
pub fn minimize<F>(
    mut objective: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    cfg: &OptimizerConfig,
) -> Result<MinimizeOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    if x0.is_empty() || x0.len() != bounds.len() {
        return Err(Error::Domain(format!(
            "x0 has {} components, bounds {}",
            x0.len(),
            bounds.len()
        )));
    }
    for (i, (&xi, &(lo, hi))) in x0.iter().zip(bounds).enumerate() {
        if !(lo <= hi) {
            return Err(Error::Domain(format!("bounds[{i}] empty: [{lo}, {hi}]")));
        }
        if xi < lo || xi > hi {
            return Err(Error::Domain(format!(
                "x0[{i}] = {xi} outside [{lo}, {hi}]"
            )));
        }
    }
    let mut counted = CountedObjective::new(&mut objective, cfg.max_evals);
    let status = match cfg.kind {
        OptimizerKind::NelderMead => nelder_mead::run(&mut counted, x0, bounds, cfg.ftol),
        OptimizerKind::QuasiNewton => quasi_newton::run(&mut counted, x0, bounds, cfg),
    };
    match status {
        Ok(converged) => Ok(MinimizeOutcome {
            x: counted.best_x,
            f: counted.best_f,
            evals: counted.evals,
            converged,
        }),
        Err(Stop::Budget) => Ok(MinimizeOutcome {
            x: counted.best_x,
            f: counted.best_f,
            evals: counted.evals,
            converged: false,
        }),
        Err(Stop::NonFinite) => Err(Error::OptimizerAbort(
            "objective returned a non-finite value".into(),
        )),
    }
}

/// Uniform random parameters: gamma_i on [0, 2pi], beta_i on [0, pi].
pub fn random_params<R: Rng>(p: usize, rng: &mut R) -> ParameterVector {
    let gamma = (0..p).map(|_| rng.gen::<f64>() * GAMMA_MAX).collect();
    let beta = (0..p).map(|_| rng.gen::<f64>() * BETA_MAX).collect();
    ParameterVector { gamma, beta }
}

/// Box bounds for the flat [gamma.., beta..] layout at depth p.
pub fn param_bounds(p: usize) -> Vec<(f64, f64)> {
    let mut b = vec![(0.0, GAMMA_MAX); p];
    b.extend(vec![(0.0, BETA_MAX); p]);
    b
}

/// Maximizes the QAOA expectation from one starting point by minimizing -F.
pub fn solve_instance(
    table: &CutTable,
    p: usize,
    init: &ParameterVector,
    cfg: &OptimizerConfig,
) -> Result<SolveResult> {
    if init.depth() != p {
        return Err(Error::Domain(format!(
            "init depth {} != requested depth {p}",
            init.depth()
        )));
    }
    let bounds = param_bounds(p);
    let objective = |x: &[f64]| {
        let pv = ParameterVector::from_flat(x).expect("flat layout is always 2p");
        -expectation(table, &pv).expect("table and params are consistent")
    };
    let out = minimize(objective, &init.to_flat(), &bounds, cfg)?;
    let params = ParameterVector::from_flat(&out.x)?;
    let value = -out.f;
    Ok(SolveResult {
        params,
        value,
        fc: out.evals,
        ar: value / table.max_cut as f64,
        converged: out.converged,
    })
}

/// Runs `restarts` independent random initializations; the best result is
/// the highest value, ties broken by lowest fc then lowest restart index.
pub fn multistart_solve<R: Rng>(
    table: &CutTable,
    p: usize,
    restarts: usize,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<(SolveResult, Vec<SolveResult>)> {
    if restarts < 1 {
        return Err(Error::Domain("restarts must be at least 1".into()));
    }
    let mut all = Vec::with_capacity(restarts);
    for _ in 0..restarts {
        let init = random_params(p, rng);
        all.push(solve_instance(table, p, &init, cfg)?);
    }
    let best = all
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.value
                .partial_cmp(&b.value)
                .unwrap()
                .then(b.fc.cmp(&a.fc))
                .then(ib.cmp(ia))
        })
        .map(|(_, r)| r.clone())
        .expect("restarts >= 1");
    Ok((best, all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cut_table, Graph};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn both_kinds() -> [OptimizerConfig; 2] {
        [
            OptimizerConfig::new(OptimizerKind::NelderMead),
            OptimizerConfig::new(OptimizerKind::QuasiNewton),
        ]
    }

    #[test]
    fn convex_quadratic_converges() {
        for cfg in both_kinds() {
            let out = minimize(
                |x| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2),
                &[0.0, 0.0],
                &[(-5.0, 5.0), (-5.0, 5.0)],
                &cfg,
            )
            .unwrap();
            assert!(out.converged, "{:?}", cfg.kind);
            assert_abs_diff_eq!(out.x[0], 1.0, epsilon = 1e-3);
            assert_abs_diff_eq!(out.x[1], -2.0, epsilon = 1e-3);
            assert!(out.f < 1e-6, "{:?}: f={}", cfg.kind, out.f);
        }
    }

    #[test]
    fn linear_objective_pins_lower_bound() {
        for cfg in both_kinds() {
            let out = minimize(|x| x[0], &[1.0], &[(0.0, PI)], &cfg).unwrap();
            assert_abs_diff_eq!(out.x[0], 0.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn k2_reaches_closed_form_maximum_from_random_starts() {
        let table = cut_table(&Graph::new("k2", 2, &[(0, 1)]).unwrap()).unwrap();
        for cfg in both_kinds() {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let (best, _) = multistart_solve(&table, 1, 20, &cfg, &mut rng).unwrap();
            assert!(
                (best.value - 1.0).abs() < 1e-4,
                "{:?}: value={}",
                cfg.kind,
                best.value
            );
        }
    }

    #[test]
    fn fc_counting_matches_external_wrapper() {
        for cfg in both_kinds() {
            let mut external = 0usize;
            let out = minimize(
                |x| {
                    external += 1;
                    (x[0] - 0.3).powi(2) + 0.5 * (x[1] - 0.7).powi(4)
                },
                &[0.0, 0.0],
                &[(-2.0, 2.0), (-2.0, 2.0)],
                &cfg,
            )
            .unwrap();
            assert_eq!(out.evals, external, "{:?}", cfg.kind);
        }
    }

    #[test]
    fn probes_stay_in_bounds() {
        for cfg in both_kinds() {
            let bounds = [(0.0, 1.0), (-1.0, 0.5)];
            minimize(
                |x| {
                    for (xi, &(lo, hi)) in x.iter().zip(&bounds) {
                        assert!(*xi >= lo - 1e-15 && *xi <= hi + 1e-15, "probe {xi} outside");
                    }
                    (x[0] - 0.9).powi(2) + (x[1] - 0.4).powi(2)
                },
                &[0.5, 0.0],
                &bounds,
                &cfg,
            )
            .unwrap();
        }
    }

    #[test]
    fn budget_exhaustion_is_not_an_error() {
        for kind in [OptimizerKind::NelderMead, OptimizerKind::QuasiNewton] {
            let cfg = OptimizerConfig {
                kind,
                max_evals: 7,
                ..Default::default()
            };
            let out = minimize(
                |x| (x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2),
                &[-2.0, -2.0],
                &[(-3.0, 3.0), (-3.0, 3.0)],
                &cfg,
            )
            .unwrap();
            assert!(!out.converged);
            assert!(out.evals <= 7);
        }
    }

    #[test]
    fn non_finite_objective_aborts() {
        for cfg in both_kinds() {
            let r = minimize(|x| (1.0 / x[0]).ln(), &[-0.5], &[(-1.0, 1.0)], &cfg);
            assert!(matches!(r, Err(Error::OptimizerAbort(_))));
        }
    }

    #[test]
    fn out_of_bounds_start_rejected() {
        let cfg = OptimizerConfig::default();
        assert!(minimize(|x| x[0], &[2.0], &[(0.0, 1.0)], &cfg).is_err());
    }

    #[test]
    fn fd_gradient_matches_central_difference() {
        // Forward-difference gradient used internally vs a central-difference
        // reference on a smooth function.
        let f = |x: &[f64]| (x[0].sin() * x[1].cos()) + 0.5 * x[0] * x[0];
        let x = [0.4, -0.3];
        let cfg = OptimizerConfig::default();
        let mut raw = |x: &[f64]| f(x);
        let mut counted = CountedObjective::new(&mut raw, 1000);
        let fx = counted.eval(&x).map_err(|_| ()).unwrap();
        let bounds = [(-2.0, 2.0), (-2.0, 2.0)];
        let g = quasi_newton::fd_gradient(&mut counted, &x, fx, &bounds, cfg.fd_step)
            .map_err(|_| ())
            .unwrap();
        for i in 0..2 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let central = (f(&xp) - f(&xm)) / (2.0 * h);
            assert!(
                (g[i] - central).abs() / central.abs().max(1.0) < 1e-4,
                "component {i}: fd={} central={central}",
                g[i]
            );
        }
    }

    #[test]
    fn random_params_shape_bounds_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pv = random_params(3, &mut rng);
        assert_eq!(pv.depth(), 3);
        assert!(pv.in_bounds());

        let a = random_params(2, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_params(2, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mean: f64 =
            (0..10_000).map(|_| random_params(1, &mut rng).beta[0]).sum::<f64>() / 10_000.0;
        let sigma = PI / 12f64.sqrt() / 100.0;
        assert!((mean - PI / 2.0).abs() < 3.0 * sigma, "mean={mean}");
    }

    #[test]
    fn solve_instance_consistency() {
        let table = cut_table(&Graph::new("k2", 2, &[(0, 1)]).unwrap()).unwrap();
        let cfg = OptimizerConfig::new(OptimizerKind::NelderMead);
        let init = ParameterVector::new(vec![PI / 2.0], vec![PI / 8.0]).unwrap();
        let res = solve_instance(&table, 1, &init, &cfg).unwrap();
        assert!((res.value - 1.0).abs() < 1e-6);
        assert_abs_diff_eq!(
            res.value,
            expectation(&table, &res.params).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn multistart_selection_contract() {
        let table = cut_table(
            &Graph::new("c4", 4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap(),
        )
        .unwrap();
        let cfg = OptimizerConfig::new(OptimizerKind::QuasiNewton);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (best, all) = multistart_solve(&table, 1, 20, &cfg, &mut rng).unwrap();
        let max = all.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best.value, max);
        assert!((best.value - 3.0).abs() < 1e-3, "value={}", best.value);
        assert!((best.ar - 0.75).abs() < 1e-3);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (single, all1) = multistart_solve(&table, 1, 1, &cfg, &mut rng).unwrap();
        assert_eq!(all1.len(), 1);
        assert_eq!(single.value, all1[0].value);
    }
}
