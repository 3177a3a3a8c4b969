//! Gaussian-process regression with an isotropic squared-exponential kernel.
//!
//! Inputs and targets are standardized with training-split statistics, so
//! the hyperparameter grids are scale-free. Hyperparameters (lengthscale,
//! signal variance, noise variance) are chosen by closed-form leave-one-out
//! MSE over a coarse grid refined by coordinate descent; the whole procedure
//! is deterministic.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::Standardizer;
use crate::error::{Error, Result};

const JITTER: f64 = 1e-10;
const MAX_JITTER: f64 = 1e-6;

/// Hyperparameter search settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GprConfig {
    pub length_scales: Vec<f64>,
    pub signal_vars: Vec<f64>,
    pub noise_vars: Vec<f64>,
    /// Coordinate-descent refinement passes after the grid search.
    pub refine_passes: usize,
}

impl Default for GprConfig {
    fn default() -> Self {
        GprConfig {
            length_scales: vec![0.1, 0.3, 1.0, 3.0, 10.0],
            signal_vars: vec![0.01, 0.1, 1.0, 10.0],
            // In standardized target units. The floor keeps the kernel
            // matrix well conditioned when inputs repeat (the depth feature
            // is discrete); the upper entries let the fit write off rare
            // outlier optima as noise instead of bending the posterior mean
            // through them.
            noise_vars: vec![1e-4, 1e-2, 1e-1, 1.0],
            refine_passes: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GprModel {
    pub standardizer: Standardizer,
    /// Feature mask chosen during fitting; `inputs` keeps only these
    /// columns, in their original order.
    pub active: Vec<bool>,
    /// Standardized, masked training inputs, m rows x |active| features.
    pub inputs: Vec<Vec<f64>>,
    /// Prior mean: the training-target mean.
    pub y_mean: f64,
    /// Training-target standard deviation; 1 for constant targets.
    pub y_scale: f64,
    pub length_scale: f64,
    pub signal_var: f64,
    pub noise_var: f64,
    /// Precomputed (K + noise I)^-1 applied to the standardized targets.
    pub alpha: Vec<f64>,
    /// Lower Cholesky factor of (K + noise I); rebuilt after load.
    #[serde(skip)]
    factor: Option<Cholesky<f64, Dyn>>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn kernel_matrix(inputs: &[Vec<f64>], ell: f64, sf2: f64, sn2: f64) -> DMatrix<f64> {
    let m = inputs.len();
    let mut k = DMatrix::zeros(m, m);
    let inv = 1.0 / (2.0 * ell * ell);
    for i in 0..m {
        for j in i..m {
            let v = sf2 * (-sq_dist(&inputs[i], &inputs[j]) * inv).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += sn2;
    }
    k
}

/// Cholesky with escalating jitter; None if the matrix stays indefinite.
fn factorize(inputs: &[Vec<f64>], ell: f64, sf2: f64, sn2: f64) -> Option<Cholesky<f64, Dyn>> {
    let mut jitter = JITTER;
    loop {
        let mut k = kernel_matrix(inputs, ell, sf2, sn2);
        for i in 0..inputs.len() {
            k[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(k) {
            return Some(chol);
        }
        jitter *= 10.0;
        if jitter > MAX_JITTER {
            return None;
        }
    }
}

/// Closed-form leave-one-group-out mean squared error. For a left-out index
/// set I the residual vector is (K^-1_II)^-1 (K^-1 y)_I, the block
/// generalization of the classic single-point identity alpha_i / (K^-1)_ii
/// (Rasmussen & Williams eq. 5.10-5.12). Groups must partition 0..m.
///
/// Rows sharing one source graph appear at several depths with identical
/// base features; scoring by single-row LOO would let an interpolator copy
/// a sibling row and look spuriously good, so cross-validation holds out
/// whole groups.
fn loo_group_mse(
    inputs: &[Vec<f64>],
    yc: &DVector<f64>,
    groups: &[Vec<usize>],
    ell: f64,
    sf2: f64,
    sn2: f64,
) -> Option<f64> {
    let chol = factorize(inputs, ell, sf2, sn2)?;
    let alpha = chol.solve(yc);
    let kinv = chol.inverse();
    let mut sum = 0.0;
    for idx in groups {
        let q = idx.len();
        let mut block = DMatrix::zeros(q, q);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                block[(a, b)] = kinv[(i, j)];
            }
        }
        let a_i = DVector::from_iterator(q, idx.iter().map(|&i| alpha[i]));
        let resid = Cholesky::new(block)?.solve(&a_i);
        sum += resid.norm_squared();
    }
    Some(sum / inputs.len() as f64)
}

fn project(rows: &[Vec<f64>], mask: &[bool]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .zip(mask)
                .filter_map(|(&v, &keep)| keep.then_some(v))
                .collect()
        })
        .collect()
}

/// Grid search plus coordinate-descent refinement of (lengthscale, signal
/// variance, noise variance) on one feature projection; returns the best
/// LOO MSE found with its hyperparameters.
fn search_hyperparams(
    inputs: &[Vec<f64>],
    yc: &DVector<f64>,
    groups: &[Vec<usize>],
    cfg: &GprConfig,
) -> Option<(f64, f64, f64, f64)> {
    let mut best: Option<(f64, f64, f64, f64)> = None; // (loo, ell, sf2, sn2)
    for &ell in &cfg.length_scales {
        for &sf2 in &cfg.signal_vars {
            for &sn2 in &cfg.noise_vars {
                if let Some(loo) = loo_group_mse(inputs, yc, groups, ell, sf2, sn2) {
                    if best.map_or(true, |(b, ..)| loo < b) {
                        best = Some((loo, ell, sf2, sn2));
                    }
                }
            }
        }
    }
    let (mut loo, mut ell, mut sf2, mut sn2) = best?;
    let noise_floor = cfg.noise_vars.iter().copied().fold(f64::INFINITY, f64::min);
    let factors = [0.6, 0.8, 1.25, 5.0 / 3.0];
    for _ in 0..cfg.refine_passes {
        for coord in 0..3 {
            for &f in &factors {
                let (e, s, n) = match coord {
                    0 => (ell * f, sf2, sn2),
                    1 => (ell, sf2 * f, sn2),
                    _ => (ell, sf2, (sn2 * f).max(noise_floor)),
                };
                if let Some(cand) = loo_group_mse(inputs, yc, groups, e, s, n) {
                    if cand < loo {
                        loo = cand;
                        ell = e;
                        sf2 = s;
                        sn2 = n;
                    }
                }
            }
        }
    }
    Some((loo, ell, sf2, sn2))
}

/// Fits the GPR by minimizing closed-form leave-one-out MSE over the
/// hyperparameter grid (refined by coordinate descent) and over nested
/// feature masks: the constant prior, each single feature, then all
/// features. A more complex mask is adopted only when it improves LOO MSE
/// by at least 20%, which keeps the model from latching onto feature noise
/// that does not generalize.
/// `groups` labels each row with its source entity (here: the graph);
/// cross-validation during hyperparameter and feature-mask selection leaves
/// out one whole group at a time. Pass distinct labels for independent rows.
pub fn fit_gpr(x: &[Vec<f64>], y: &[f64], groups: &[usize], cfg: &GprConfig) -> Result<GprModel> {
    if x.len() < 2 {
        return Err(Error::Training("GPR needs at least 2 samples".into()));
    }
    if groups.len() != x.len() {
        return Err(Error::Training(format!(
            "{} group labels for {} rows",
            groups.len(),
            x.len()
        )));
    }
    let d = x[0].len();
    let standardizer = Standardizer::fit(x);
    let full: Vec<Vec<f64>> = x.iter().map(|r| standardizer.apply(r)).collect();
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let y_var = y.iter().map(|&v| (v - y_mean).powi(2)).sum::<f64>() / y.len() as f64;
    let y_scale = if y_var > 1e-24 { y_var.sqrt() } else { 1.0 };
    let yc = DVector::from_iterator(y.len(), y.iter().map(|&v| (v - y_mean) / y_scale));
    const MARGIN: f64 = 0.8;

    let mut by_label: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &g) in groups.iter().enumerate() {
        by_label.entry(g).or_default().push(i);
    }
    let group_idx: Vec<Vec<usize>> = by_label.into_values().collect();
    if group_idx.len() < 2 {
        return Err(Error::Training("GPR needs at least 2 groups".into()));
    }

    // The constant prior: leaving out group g it predicts the mean of the
    // remaining samples.
    let m = x.len() as f64;
    let mut mask = vec![false; d];
    let mut loo = group_idx
        .iter()
        .map(|idx| {
            let sum_g: f64 = idx.iter().map(|&i| yc[i]).sum();
            let rest_mean = -sum_g / (m - idx.len() as f64);
            idx.iter().map(|&i| (yc[i] - rest_mean).powi(2)).sum::<f64>()
        })
        .sum::<f64>()
        / m;
    let (mut ell, mut sf2, mut sn2) = (1.0, 0.0, 1.0);

    let mut single: Option<(f64, usize, f64, f64, f64)> = None;
    for j in 0..d {
        let mut cand = vec![false; d];
        cand[j] = true;
        if let Some((l, e, s, n)) =
            search_hyperparams(&project(&full, &cand), &yc, &group_idx, cfg)
        {
            if single.map_or(true, |(b, ..)| l < b) {
                single = Some((l, j, e, s, n));
            }
        }
    }
    if let Some((l, j, e, s, n)) = single {
        if l < MARGIN * loo {
            mask[j] = true;
            loo = l;
            ell = e;
            sf2 = s;
            sn2 = n;
        }
    }
    if d > 1 {
        if let Some((l, e, s, n)) = search_hyperparams(&full, &yc, &group_idx, cfg) {
            if l < MARGIN * loo {
                mask = vec![true; d];
                ell = e;
                sf2 = s;
                sn2 = n;
            }
        }
    }

    let inputs = project(&full, &mask);
    let chol = factorize(&inputs, ell, sf2, sn2)
        .ok_or_else(|| Error::Training("final factorization failed".into()))?;
    let alpha = chol.solve(&yc);
    Ok(GprModel {
        standardizer,
        active: mask,
        inputs,
        y_mean,
        y_scale,
        length_scale: ell,
        signal_var: sf2,
        noise_var: sn2,
        alpha: alpha.as_slice().to_vec(),
        factor: Some(chol),
    })
}

impl GprModel {
    /// Recomputes the Cholesky factor from the stored hyperparameters and
    /// inputs (after deserialization).
    pub fn rebuild(&mut self) -> Result<()> {
        self.factor = Some(
            factorize(&self.inputs, self.length_scale, self.signal_var, self.noise_var)
                .ok_or_else(|| Error::Training("stored kernel matrix indefinite".into()))?,
        );
        Ok(())
    }

    /// Posterior mean and predictive variance (latent plus noise) at `x`.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.standardizer.mean.len() {
            return Err(Error::Domain(format!(
                "expected {} features, got {}",
                self.standardizer.mean.len(),
                x.len()
            )));
        }
        let xs: Vec<f64> = self
            .standardizer
            .apply(x)
            .into_iter()
            .zip(&self.active)
            .filter_map(|(v, &keep)| keep.then_some(v))
            .collect();
        let inv = 1.0 / (2.0 * self.length_scale * self.length_scale);
        let kstar = DVector::from_iterator(
            self.inputs.len(),
            self.inputs
                .iter()
                .map(|xi| self.signal_var * (-sq_dist(xi, &xs) * inv).exp()),
        );
        let mean = self.y_mean
            + self.y_scale
                * kstar
                    .iter()
                    .zip(&self.alpha)
                    .map(|(k, a)| k * a)
                    .sum::<f64>();
        let factor = self
            .factor
            .as_ref()
            .ok_or_else(|| Error::Training("model not rebuilt after load".into()))?;
        let v = factor.l_dirty().solve_lower_triangular(&kstar).ok_or_else(|| {
            Error::Training("triangular solve failed in predictive variance".into())
        })?;
        let var = (self.signal_var - v.norm_squared() + self.noise_var).max(0.0)
            * self.y_scale
            * self.y_scale;
        Ok((mean, var))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn solo(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    fn noise_free_cfg() -> GprConfig {
        GprConfig {
            noise_vars: vec![JITTER],
            ..Default::default()
        }
    }

    #[test]
    fn constant_data_predicts_constant() {
        let m = fit_gpr(&[vec![0.0], vec![1.0]], &[5.0, 5.0], &solo(2), &GprConfig::default()).unwrap();
        let (mean, _) = m.predict(&[0.5]).unwrap();
        assert_abs_diff_eq!(mean, 5.0, epsilon = 1e-6);
    }

    #[test]
    fn interpolates_training_targets_with_jitter_noise() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.5]).collect();
        let y: Vec<f64> = x.iter().map(|r| (r[0] * 1.3).cos()).collect();
        let m = fit_gpr(&x, &y, &solo(x.len()), &noise_free_cfg()).unwrap();
        for (xi, &yi) in x.iter().zip(&y) {
            let (mean, var) = m.predict(xi).unwrap();
            assert_abs_diff_eq!(mean, yi, epsilon = 1e-5);
            assert!(var <= m.noise_var * m.y_scale * m.y_scale + 1e-8, "var={var}");
        }
    }

    #[test]
    fn recovers_sine() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![2.0 * PI * i as f64 / 19.0])
            .collect();
        let y: Vec<f64> = x.iter().map(|r| r[0].sin()).collect();
        let m = fit_gpr(&x, &y, &solo(x.len()), &GprConfig::default()).unwrap();
        let (mean, _) = m.predict(&[PI / 2.0]).unwrap();
        assert!((mean - 1.0).abs() < 0.05, "mean={mean}");
    }

    #[test]
    fn far_query_reverts_to_prior() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.1]).collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 + (r[0] * 3.0).sin()).collect();
        let m = fit_gpr(&x, &y, &solo(x.len()), &GprConfig::default()).unwrap();
        // Hundreds of lengthscales away in standardized space.
        let (mean, var) = m.predict(&[1e6]).unwrap();
        assert!((mean - m.y_mean).abs() < 1e-8);
        let prior_var = (m.signal_var + m.noise_var) * m.y_scale * m.y_scale;
        assert!((var - prior_var).abs() / prior_var < 0.01, "var={var}");
    }

    #[test]
    fn variance_nonnegative_and_symmetric_for_symmetric_data() {
        let m = fit_gpr(&[vec![-1.0], vec![1.0]], &[3.0, 3.0], &solo(2), &GprConfig::default()).unwrap();
        let (_, v1) = m.predict(&[-0.7]).unwrap();
        let (_, v2) = m.predict(&[0.7]).unwrap();
        assert!(v1 >= 0.0 && v2 >= 0.0);
        assert_abs_diff_eq!(v1, v2, epsilon = 1e-10);
    }

    #[test]
    fn mean_invariant_under_row_permutation() {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 * 0.4, (i % 3) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] * 0.2 - r[1]).collect();
        let m1 = fit_gpr(&x, &y, &solo(x.len()), &GprConfig::default()).unwrap();
        let mut xr = x.clone();
        let mut yr = y.clone();
        xr.reverse();
        yr.reverse();
        let m2 = fit_gpr(&xr, &yr, &solo(xr.len()), &GprConfig::default()).unwrap();
        for q in [[0.3, 1.0], [2.2, 0.0], [4.4, 2.0]] {
            let (a, _) = m1.predict(&q).unwrap();
            let (b, _) = m2.predict(&q).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = fit_gpr(&[vec![0.0], vec![1.0]], &[1.0, 2.0], &solo(2), &GprConfig::default()).unwrap();
        assert!(m.predict(&[0.0, 1.0]).is_err());
    }
}
