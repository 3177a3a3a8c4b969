//! The two-level (warm-start) solver, the hierarchical prediction variant,
//! the naive-vs-warm-start benchmark harness, and prediction-error reports.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{derive_seed, DatasetRow, ParamKind, PredictorBank};
use crate::error::{Error, Result};
use crate::graph::{cut_table, CutTable, Graph};
use crate::optim::{
    multistart_solve, random_params, solve_instance, OptimizerConfig, OptimizerKind, SolveResult,
};
use crate::sim::{ParameterVector, BETA_MAX, GAMMA_MAX};

/// Queries the bank for all 2*p_t stage parameters from the three two-level
/// features, clipping each output into its domain.
pub fn predict_init(
    bank: &PredictorBank,
    gamma1: f64,
    beta1: f64,
    p_t: usize,
) -> Result<ParameterVector> {
    if bank.intermediate_depth.is_some() {
        return Err(Error::Domain(
            "bank is hierarchical; use hierarchical_predict".into(),
        ));
    }
    predict_with_features(bank, &[gamma1, beta1], p_t)
}

/// Hierarchical variant: features are the p=1 optimum, the full optimum at
/// the intermediate depth m, and the target depth.
pub fn hierarchical_predict(
    bank: &PredictorBank,
    p1_opt: (f64, f64),
    pm_opt: &ParameterVector,
    p_t: usize,
) -> Result<ParameterVector> {
    let m = bank.intermediate_depth.ok_or_else(|| {
        Error::Domain("bank is not hierarchical; use predict_init".into())
    })?;
    if pm_opt.depth() != m {
        return Err(Error::Domain(format!(
            "intermediate optimum has depth {}, bank expects {m}",
            pm_opt.depth()
        )));
    }
    if m >= p_t {
        return Err(Error::Domain(format!(
            "intermediate depth {m} must be below target depth {p_t}"
        )));
    }
    let mut feats = vec![p1_opt.0, p1_opt.1];
    feats.extend_from_slice(&pm_opt.gamma);
    feats.extend_from_slice(&pm_opt.beta);
    predict_with_features(bank, &feats, p_t)
}

fn predict_with_features(
    bank: &PredictorBank,
    base: &[f64],
    p_t: usize,
) -> Result<ParameterVector> {
    if p_t < 2 || p_t > bank.p_max {
        return Err(Error::Domain(format!(
            "target depth {p_t} outside bank range 2..={}",
            bank.p_max
        )));
    }
    if base.len() + 1 != bank.feature_len() {
        return Err(Error::Domain(format!(
            "feature layout mismatch: got {} features, bank expects {}",
            base.len() + 1,
            bank.feature_len()
        )));
    }
    // The bank is only trustworthy inside its training feature box. Mild
    // overshoot (a test graph slightly past the training range) is clamped;
    // a level-1 run that converged to a secondary basin sits far outside,
    // where the regressors extrapolate wildly, so it falls back to the
    // training centroid, i.e. a typical-graph warm start.
    let far = base
        .iter()
        .zip(bank.feature_lo.iter().zip(&bank.feature_hi))
        .any(|(&v, (&lo, &hi))| {
            let margin = 0.05 * (hi - lo);
            v < lo - margin || v > hi + margin
        });
    let mut feats: Vec<f64> = if far {
        bank.feature_center.clone()
    } else {
        base.iter()
            .zip(bank.feature_lo.iter().zip(&bank.feature_hi))
            .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
            .collect()
    };
    feats.push(p_t as f64);
    let mut gamma = Vec::with_capacity(p_t);
    let mut beta = Vec::with_capacity(p_t);
    // Targets are trained on near-zero periodic representatives; wrapping
    // (rather than clamping) maps a prediction to the equivalent circuit
    // point inside the optimizer box.
    for i in 1..=p_t {
        gamma.push(
            bank.model(i, ParamKind::Gamma)?
                .model
                .predict(&feats)?
                .rem_euclid(GAMMA_MAX),
        );
        beta.push(
            bank.model(i, ParamKind::Beta)?
                .model
                .predict(&feats)?
                .rem_euclid(BETA_MAX / 2.0),
        );
    }
    ParameterVector::new(gamma, beta)
}

/// Outcome of one two-level (QCML) solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoLevelResult {
    pub stage1: SolveResult,
    pub predicted_init: ParameterVector,
    pub stage2: SolveResult,
    pub total_fc: usize,
    pub ar: f64,
}

/// Two-level flow: optimize at p=1 from one random initialization, predict
/// the p_t parameters from the canonicalized p=1 optimum, then optimize at
/// p_t from the prediction. Total function calls are the exact sum of the
/// two stages.
pub fn two_level_solve<R: Rng>(
    table: &CutTable,
    p_t: usize,
    bank: &PredictorBank,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<TwoLevelResult> {
    let init = random_params(1, rng);
    let stage1 = solve_instance(table, 1, &init, cfg)?;
    two_level_stage2(table, p_t, bank, cfg, stage1)
}

fn two_level_stage2(
    table: &CutTable,
    p_t: usize,
    bank: &PredictorBank,
    cfg: &OptimizerConfig,
    stage1: SolveResult,
) -> Result<TwoLevelResult> {
    let canon = stage1.params.canonicalize();
    let predicted_init = predict_init(bank, canon.gamma[0], canon.beta[0], p_t)?;
    let stage2 = solve_instance(table, p_t, &predicted_init, cfg)?;
    Ok(TwoLevelResult {
        total_fc: stage1.fc + stage2.fc,
        ar: stage2.ar,
        stage1,
        predicted_init,
        stage2,
    })
}

/// Benchmark harness settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub optimizers: Vec<OptimizerKind>,
    pub depths: Vec<usize>,
    /// Random restarts of the naive baseline.
    pub restarts: usize,
    pub ftol: f64,
    pub max_evals: usize,
    pub seed: u64,
    /// When set, additionally logs a two-level variant whose stage 1 uses
    /// this many random restarts instead of one.
    pub stage1_variant_restarts: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            optimizers: vec![OptimizerKind::NelderMead, OptimizerKind::QuasiNewton],
            depths: vec![2, 3, 4, 5],
            restarts: 20,
            ftol: 1e-6,
            max_evals: 10_000,
            seed: 0,
            stage1_variant_restarts: None,
        }
    }
}

/// Raw per-graph benchmark record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRecord {
    pub graph_id: String,
    pub optimizer: OptimizerKind,
    pub p: usize,
    /// Function calls of every naive restart.
    pub naive_fcs: Vec<usize>,
    pub naive_best_ar: f64,
    pub ml_stage1_fc: usize,
    pub ml_stage2_fc: usize,
    pub ml_ar: f64,
    /// Mean relative prediction error vs the canonicalized naive optimum,
    /// normalized by domain width.
    pub pred_rel_err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant_total_fc: Option<usize>,
}

/// One (optimizer, depth) cell of the benchmark table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchCell {
    pub optimizer: OptimizerKind,
    pub p: usize,
    pub naive_fc_mean: f64,
    pub naive_fc_std: f64,
    pub naive_ar_mean: f64,
    pub naive_ar_std: f64,
    pub ml_fc_mean: f64,
    pub ml_fc_std: f64,
    pub ml_ar_mean: f64,
    pub ml_ar_std: f64,
    /// 100 * (1 - ml_fc_mean / naive_fc_mean).
    pub fc_reduction_pct: f64,
    pub mean_pred_rel_err: f64,
    pub graphs: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant_fc_mean: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub cells: Vec<BenchCell>,
    pub records: Vec<BenchRecord>,
    /// Evaluation graphs that were in the bank's training split.
    pub train_overlap: Vec<String>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Mean relative parameter error, normalized per family by domain width
/// (2pi for gamma, pi for beta).
pub fn relative_param_error(predicted: &ParameterVector, actual: &ParameterVector) -> f64 {
    // Distance on the circle: gamma is 2*pi-periodic and beta is
    // pi/2-periodic for the cost expectation, so equivalent circuit points
    // score zero.
    fn circ(d: f64, period: f64) -> f64 {
        let r = d.rem_euclid(period);
        r.min(period - r)
    }
    let p = predicted.depth();
    let mut total = 0.0;
    for i in 0..p {
        total += circ(predicted.gamma[i] - actual.gamma[i], GAMMA_MAX) / GAMMA_MAX;
        total += circ(predicted.beta[i] - actual.beta[i], BETA_MAX / 2.0) / BETA_MAX;
    }
    total / (2 * p) as f64
}

/// Runs the naive multistart baseline and the two-level flow over every
/// (optimizer, depth, graph) combination. Fixed seeds make the report
/// deterministic and independent of execution order.
pub fn run_benchmark(
    graphs: &[Graph],
    bank: &PredictorBank,
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    if graphs.is_empty() {
        return Err(Error::Domain("no evaluation graphs".into()));
    }
    let train_set: HashSet<&str> = bank.train_graphs.iter().map(|s| s.as_str()).collect();
    let train_overlap: Vec<String> = graphs
        .iter()
        .filter(|g| train_set.contains(g.id.as_str()))
        .map(|g| g.id.clone())
        .collect();

    let mut cells = Vec::new();
    let mut records = Vec::new();
    for &kind in &cfg.optimizers {
        let ocfg = OptimizerConfig {
            kind,
            ftol: cfg.ftol,
            max_evals: cfg.max_evals,
            fd_step: OptimizerConfig::default().fd_step,
        };
        for &p in &cfg.depths {
            let per_graph: Vec<Result<BenchRecord>> = graphs
                .par_iter()
                .map(|g| -> Result<BenchRecord> {
                    let table = cut_table(g)?;
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &g.id, p, 1 + kind as u64 * 16));
                    let (naive_best, naive_all) =
                        multistart_solve(&table, p, cfg.restarts, &ocfg, &mut rng)?;

                    let mut rng =
                        ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &g.id, p, 2 + kind as u64 * 16));
                    let ml = two_level_solve(&table, p, bank, &ocfg, &mut rng)?;

                    let variant_total_fc = match cfg.stage1_variant_restarts {
                        Some(r) => {
                            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                                cfg.seed,
                                &g.id,
                                p,
                                3 + kind as u64 * 16,
                            ));
                            let (s1, all1) = multistart_solve(&table, 1, r, &ocfg, &mut rng)?;
                            let s1_total: usize = all1.iter().map(|s| s.fc).sum();
                            let v = two_level_stage2(&table, p, bank, &ocfg, s1)?;
                            Some(s1_total + v.stage2.fc)
                        }
                        None => None,
                    };

                    let pred_rel_err = relative_param_error(
                        &ml.predicted_init,
                        &naive_best.params.canonicalize(),
                    );
                    Ok(BenchRecord {
                        graph_id: g.id.clone(),
                        optimizer: kind,
                        p,
                        naive_fcs: naive_all.iter().map(|s| s.fc).collect(),
                        naive_best_ar: naive_best.ar,
                        ml_stage1_fc: ml.stage1.fc,
                        ml_stage2_fc: ml.stage2.fc,
                        ml_ar: ml.ar,
                        pred_rel_err,
                        variant_total_fc,
                    })
                })
                .collect();

            let mut ok_records = Vec::new();
            let mut failures = 0usize;
            for r in per_graph {
                match r {
                    Ok(rec) => ok_records.push(rec),
                    Err(Error::OptimizerAbort(_)) => failures += 1,
                    Err(e) => return Err(e),
                }
            }
            if ok_records.is_empty() {
                return Err(Error::Domain(format!(
                    "every instance failed at ({}, p={p})",
                    kind.as_str()
                )));
            }

            let naive_fcs: Vec<f64> = ok_records
                .iter()
                .flat_map(|r| r.naive_fcs.iter().map(|&f| f as f64))
                .collect();
            let naive_ars: Vec<f64> = ok_records.iter().map(|r| r.naive_best_ar).collect();
            let ml_fcs: Vec<f64> = ok_records
                .iter()
                .map(|r| (r.ml_stage1_fc + r.ml_stage2_fc) as f64)
                .collect();
            let ml_ars: Vec<f64> = ok_records.iter().map(|r| r.ml_ar).collect();
            let errs: Vec<f64> = ok_records.iter().map(|r| r.pred_rel_err).collect();

            let (naive_fc_mean, naive_fc_std) = mean_std(&naive_fcs);
            let (naive_ar_mean, naive_ar_std) = mean_std(&naive_ars);
            let (ml_fc_mean, ml_fc_std) = mean_std(&ml_fcs);
            let (ml_ar_mean, ml_ar_std) = mean_std(&ml_ars);
            let variant_fc_mean = cfg.stage1_variant_restarts.map(|_| {
                let v: Vec<f64> = ok_records
                    .iter()
                    .filter_map(|r| r.variant_total_fc.map(|f| f as f64))
                    .collect();
                mean_std(&v).0
            });
            cells.push(BenchCell {
                optimizer: kind,
                p,
                naive_fc_mean,
                naive_fc_std,
                naive_ar_mean,
                naive_ar_std,
                ml_fc_mean,
                ml_fc_std,
                ml_ar_mean,
                ml_ar_std,
                fc_reduction_pct: 100.0 * (1.0 - ml_fc_mean / naive_fc_mean),
                mean_pred_rel_err: mean_std(&errs).0,
                graphs: ok_records.len(),
                failures,
                variant_fc_mean,
            });
            records.extend(ok_records);
        }
    }
    Ok(BenchReport {
        cells,
        records,
        train_overlap,
    })
}

/// Writes the normative report CSV.
pub fn write_report_csv(path: &Path, report: &BenchReport) -> Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "optimizer,p,naive_fc_mean,naive_fc_std,naive_ar_mean,naive_ar_std,\
         ml_fc_mean,ml_fc_std,ml_ar_mean,ml_ar_std,fc_reduction_pct"
    )?;
    for c in &report.cells {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.optimizer.as_str(),
            c.p,
            c.naive_fc_mean,
            c.naive_fc_std,
            c.naive_ar_mean,
            c.naive_ar_std,
            c.ml_fc_mean,
            c.ml_fc_std,
            c.ml_ar_mean,
            c.ml_ar_std,
            c.fc_reduction_pct
        )?;
    }
    Ok(())
}

/// Per-depth relative prediction errors against stored optima.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionErrorSummary {
    pub p: usize,
    pub mean_rel_err: f64,
    pub p50_rel_err: f64,
    pub p90_rel_err: f64,
    /// 2p parameters are predicted at this depth.
    pub params_per_graph: usize,
    pub graphs: usize,
}

/// Compares bank predictions with the stored optima of the given rows at
/// every depth the bank covers. Relative error is normalized by domain
/// width (2pi for gamma, pi for beta).
pub fn prediction_error_report(
    bank: &PredictorBank,
    rows: &[DatasetRow],
) -> Result<Vec<PredictionErrorSummary>> {
    let feats: HashMap<&str, (f64, f64)> = rows
        .iter()
        .filter(|r| r.p == 1 && r.converged && !r.failed)
        .map(|r| (r.graph_id.as_str(), (r.gamma_opt[0], r.beta_opt[0])))
        .collect();
    let mut out = Vec::new();
    for p in 2..=bank.p_max {
        let mut per_graph_errs = Vec::new();
        for r in rows.iter().filter(|r| r.p == p && r.converged && !r.failed) {
            let Some(&(g1, b1)) = feats.get(r.graph_id.as_str()) else {
                continue;
            };
            let predicted = predict_init(bank, g1, b1, p)?;
            let actual = ParameterVector::new(r.gamma_opt.clone(), r.beta_opt.clone())?;
            per_graph_errs.push(relative_param_error(&predicted, &actual));
        }
        if per_graph_errs.is_empty() {
            continue;
        }
        let mut sorted = per_graph_errs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pct = |q: f64| sorted[((q * (sorted.len() - 1) as f64).round() as usize).min(sorted.len() - 1)];
        out.push(PredictionErrorSummary {
            p,
            mean_rel_err: mean_std(&per_graph_errs).0,
            p50_rel_err: pct(0.5),
            p90_rel_err: pct(0.9),
            params_per_graph: 2 * p,
            graphs: per_graph_errs.len(),
        });
    }
    Ok(out)
}
