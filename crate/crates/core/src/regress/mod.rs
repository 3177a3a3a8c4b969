//! Supervised regression models used to learn optimal-parameter
//! correlations: Gaussian-process regression, linear least squares, and a
//! CART-style regression tree, plus training metrics.

pub mod gpr;
pub mod tree;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gpr::{GprConfig, GprModel};
pub use tree::{TreeConfig, TreeModel};

/// Per-column affine map to zero mean and unit variance, fitted on the
/// training split only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let m = x.len() as f64;
        let d = x[0].len();
        let mut mean = vec![0.0; d];
        for row in x {
            for (mj, &v) in mean.iter_mut().zip(row) {
                *mj += v;
            }
        }
        for mj in mean.iter_mut() {
            *mj /= m;
        }
        let mut std = vec![0.0; d];
        for row in x {
            for j in 0..d {
                std[j] += (row[j] - mean[j]).powi(2);
            }
        }
        for sj in std.iter_mut() {
            *sj = (*sj / m).sqrt();
            if *sj < 1e-12 {
                *sj = 1.0; // constant column: leave it centered
            }
        }
        Standardizer { mean, std }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }
}

/// Ordinary least squares with intercept. Rank-deficient systems are solved
/// through the SVD pseudo-inverse and flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub rank_deficient: bool,
}

pub fn fit_linear(x: &[Vec<f64>], y: &[f64]) -> Result<LinearModel> {
    let m = x.len();
    let d = x[0].len();
    if m < d + 1 {
        return Err(Error::Training(format!(
            "linear fit needs at least {} samples, got {m}",
            d + 1
        )));
    }
    let mut a = DMatrix::zeros(m, d + 1);
    for (i, row) in x.iter().enumerate() {
        a[(i, 0)] = 1.0;
        for (j, &v) in row.iter().enumerate() {
            a[(i, j + 1)] = v;
        }
    }
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let tol = 1e-10 * svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let sol = svd
        .solve(&b, tol)
        .map_err(|e| Error::Training(format!("SVD solve failed: {e}")))?;
    Ok(LinearModel {
        coefficients: sol.as_slice()[1..].to_vec(),
        intercept: sol[0],
        rank_deficient: rank < d + 1,
    })
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.coefficients.len() {
            return Err(Error::Domain(format!(
                "expected {} features, got {}",
                self.coefficients.len(),
                x.len()
            )));
        }
        Ok(self.intercept + x.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>())
    }
}

/// One trained regression model of any supported kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Model {
    Gpr(GprModel),
    Linear(LinearModel),
    Tree(TreeModel),
}

/// Model flavor selector for training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Gpr,
    Linear,
    Tree,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gpr" => Ok(ModelKind::Gpr),
            "linear" => Ok(ModelKind::Linear),
            "tree" => Ok(ModelKind::Tree),
            other => Err(Error::Domain(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Training settings shared by all model kinds.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FitConfig {
    pub gpr: GprConfig,
    pub tree: TreeConfig,
}

/// `groups` labels each row with its source entity for cross-validated
/// model selection (only the GPR uses it; see [`gpr::fit_gpr`]).
pub fn fit_model(
    kind: ModelKind,
    x: &[Vec<f64>],
    y: &[f64],
    groups: &[usize],
    cfg: &FitConfig,
) -> Result<Model> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Training(format!(
            "inconsistent training data: {} rows, {} targets",
            x.len(),
            y.len()
        )));
    }
    match kind {
        ModelKind::Gpr => Ok(Model::Gpr(gpr::fit_gpr(x, y, groups, &cfg.gpr)?)),
        ModelKind::Linear => Ok(Model::Linear(fit_linear(x, y)?)),
        ModelKind::Tree => Ok(Model::Tree(tree::fit_tree(x, y, &cfg.tree)?)),
    }
}

impl Model {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Gpr(m) => m.predict(x).map(|(mean, _)| mean),
            Model::Linear(m) => m.predict(x),
            Model::Tree(m) => m.predict(x),
        }
    }

    /// Restores transient state (the GPR factorization) after deserialization.
    pub fn rebuild(&mut self) -> Result<()> {
        if let Model::Gpr(m) = self {
            m.rebuild()?;
        }
        Ok(())
    }
}

/// Error statistics of a prediction vector against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    /// None when the actuals have zero variance (R^2 undefined).
    pub r2: Option<f64>,
    /// None when R^2 is undefined or m <= d + 1.
    pub r2_adj: Option<f64>,
}

pub fn regression_metrics(predicted: &[f64], actual: &[f64], d: usize) -> Result<ModelMetrics> {
    let m = predicted.len();
    if m < 2 || actual.len() != m {
        return Err(Error::Domain(format!(
            "metrics need >= 2 aligned samples, got {m}/{}",
            actual.len()
        )));
    }
    let mf = m as f64;
    let sse: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).powi(2))
        .sum();
    let mae: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).abs())
        .sum::<f64>()
        / mf;
    let mse = sse / mf;
    let mean = actual.iter().sum::<f64>() / mf;
    let sst: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    let r2 = if sst > 0.0 { Some(1.0 - sse / sst) } else { None };
    let r2_adj = match r2 {
        Some(r2) if m > d + 1 => Some(1.0 - (1.0 - r2) * (mf - 1.0) / (mf - d as f64 - 1.0)),
        _ => None,
    };
    Ok(ModelMetrics {
        mse,
        rmse: mse.sqrt(),
        mae,
        r2,
        r2_adj,
    })
}

/// Sample Pearson correlation; zero variance in either series is an error.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let m = x.len();
    if m < 2 || y.len() != m {
        return Err(Error::Domain(format!(
            "pearson needs >= 2 aligned samples, got {m}/{}",
            y.len()
        )));
    }
    let mf = m as f64;
    let mx = x.iter().sum::<f64>() / mf;
    let my = y.iter().sum::<f64>() / mf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx).powi(2);
        syy += (yi - my).powi(2);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateVariance(
            "pearson undefined for a constant series".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
