//! Optimal-parameter dataset generation, persistence, train/test split,
//! correlation and trend reports, and predictor-bank training.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{cut_table, Graph};
use crate::optim::{multistart_solve, OptimizerConfig, OptimizerKind};
use crate::regress::{fit_model, pearson, regression_metrics, FitConfig, Model, ModelKind, ModelMetrics};

/// One multistart optimum for a (graph, depth) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub graph_id: String,
    pub p: usize,
    pub gamma_opt: Vec<f64>,
    pub beta_opt: Vec<f64>,
    pub value: f64,
    pub max_cut: u32,
    pub ar: f64,
    /// Function calls of the winning restart.
    pub fc: usize,
    pub restarts: usize,
    pub optimizer: OptimizerKind,
    #[serde(default = "default_true")]
    pub converged: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub failed: bool,
}

fn default_true() -> bool {
    true
}

/// Stable 64-bit seed derived from the master seed and task coordinates, so
/// the persisted dataset is identical regardless of execution order.
pub fn derive_seed(master: u64, graph_id: &str, p: usize, purpose: u64) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325 ^ master;
    for &b in graph_id.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^= p as u64;
    h = h.wrapping_mul(0x100000001b3);
    h ^= purpose;
    h.wrapping_mul(0x100000001b3)
}

/// Optimizes every missing (graph, depth) pair with `restarts` random
/// initializations; rows already in `existing` are reused untouched. Stored
/// optima are canonicalized (`ParameterVector::canonicalize`) so winners from
/// different symmetry branches are comparable. The result is ordered by
/// (graph position, depth).
pub fn build_dataset(
    graphs: &[Graph],
    depths: &[usize],
    restarts: usize,
    cfg: &OptimizerConfig,
    seed: u64,
    existing: &HashMap<(String, usize), DatasetRow>,
) -> Result<Vec<DatasetRow>> {
    if graphs.is_empty() {
        return Err(Error::Domain("no graphs given".into()));
    }
    if restarts < 1 {
        return Err(Error::Domain("restarts must be at least 1".into()));
    }
    let mut tasks = Vec::new();
    for g in graphs {
        for &p in depths {
            if !existing.contains_key(&(g.id.clone(), p)) {
                tasks.push((g, p));
            }
        }
    }
    let new_rows: Vec<DatasetRow> = tasks
        .par_iter()
        .map(|&(g, p)| -> Result<DatasetRow> {
            let table = cut_table(g)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &g.id, p, 0));
            match multistart_solve(&table, p, restarts, cfg, &mut rng) {
                Ok((best, _)) => Ok(DatasetRow {
                    graph_id: g.id.clone(),
                    p,
                    gamma_opt: best.params.canonicalize().gamma,
                    beta_opt: best.params.canonicalize().beta,
                    value: best.value,
                    max_cut: table.max_cut,
                    ar: best.ar,
                    fc: best.fc,
                    restarts,
                    optimizer: cfg.kind,
                    converged: best.converged,
                    failed: false,
                }),
                Err(Error::OptimizerAbort(_)) => Ok(DatasetRow {
                    graph_id: g.id.clone(),
                    p,
                    gamma_opt: vec![0.0; p],
                    beta_opt: vec![0.0; p],
                    value: 0.0,
                    max_cut: table.max_cut,
                    ar: 0.0,
                    fc: 0,
                    restarts,
                    optimizer: cfg.kind,
                    converged: false,
                    failed: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut by_key: HashMap<(String, usize), DatasetRow> = existing.clone();
    for r in new_rows {
        by_key.insert((r.graph_id.clone(), r.p), r);
    }
    // Keep rows from earlier runs at depths outside this call.
    let mut all_depths: Vec<usize> = by_key.keys().map(|&(_, p)| p).collect();
    all_depths.sort_unstable();
    all_depths.dedup();
    let mut out = Vec::new();
    for g in graphs {
        for &p in &all_depths {
            if let Some(r) = by_key.get(&(g.id.clone(), p)) {
                out.push(r.clone());
            }
        }
    }
    Ok(out)
}

/// Total parameter count of a row set: sum of 2p over rows.
pub fn parameter_count(rows: &[DatasetRow]) -> usize {
    rows.iter().map(|r| 2 * r.p).sum()
}

pub fn write_rows(path: &Path, rows: &[DatasetRow]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in rows {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<DatasetRow>> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut rows = Vec::new();
    for line in f.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line)?);
    }
    Ok(rows)
}

pub fn rows_by_key(rows: &[DatasetRow]) -> HashMap<(String, usize), DatasetRow> {
    rows.iter()
        .map(|r| ((r.graph_id.clone(), r.p), r.clone()))
        .collect()
}

pub fn write_graphs(path: &Path, graphs: &[Graph]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for g in graphs {
        serde_json::to_writer(&mut f, g)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

/// Reads JSON Lines graphs, re-canonicalizing unordered edge lists.
pub fn read_graphs(path: &Path) -> Result<Vec<Graph>> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut graphs = Vec::new();
    for line in f.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: Graph = serde_json::from_str(&line)?;
        graphs.push(Graph::new(raw.id, raw.n, &raw.edges)?);
    }
    Ok(graphs)
}

/// Flat CSV export with one column per gamma_1..gamma_6, beta_1..beta_6
/// (empty beyond the row's depth).
pub fn export_csv(path: &Path, rows: &[DatasetRow]) -> Result<()> {
    const P_MAX: usize = 6;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header = String::from("graph_id,p");
    for i in 1..=P_MAX {
        header.push_str(&format!(",gamma_{i}"));
    }
    for i in 1..=P_MAX {
        header.push_str(&format!(",beta_{i}"));
    }
    header.push_str(",value,max_cut,ar,fc\n");
    f.write_all(header.as_bytes())?;
    for r in rows {
        let mut line = format!("{},{}", r.graph_id, r.p);
        for i in 0..P_MAX {
            line.push(',');
            if let Some(v) = r.gamma_opt.get(i) {
                line.push_str(&v.to_string());
            }
        }
        for i in 0..P_MAX {
            line.push(',');
            if let Some(v) = r.beta_opt.get(i) {
                line.push_str(&v.to_string());
            }
        }
        line.push_str(&format!(",{},{},{},{}\n", r.value, r.max_cut, r.ar, r.fc));
        f.write_all(line.as_bytes())?;
    }
    f.flush()?;
    Ok(())
}

/// Train/test membership, split by graph id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub train_frac: f64,
    pub seed: u64,
}

/// Splits the graphs behind `rows` into train/test sets; all depths of a
/// graph stay on one side. Deterministic for a fixed seed.
pub fn split_dataset(rows: &[DatasetRow], train_frac: f64, seed: u64) -> Result<SplitSpec> {
    if !(0.0..=1.0).contains(&train_frac) {
        return Err(Error::Domain(format!("train fraction {train_frac} not in [0,1]")));
    }
    let mut ids: Vec<String> = Vec::new();
    let mut seen = HashSet::new();
    for r in rows {
        if seen.insert(r.graph_id.clone()) {
            ids.push(r.graph_id.clone());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let n_train = (train_frac * ids.len() as f64).floor() as usize;
    if n_train == 0 {
        return Err(Error::Domain(format!(
            "train split empty: {} graphs at fraction {train_frac}",
            ids.len()
        )));
    }
    let (train, test) = ids.split_at(n_train);
    Ok(SplitSpec {
        train: train.to_vec(),
        test: test.to_vec(),
        train_frac,
        seed,
    })
}

/// Gamma or beta parameter family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Gamma,
    Beta,
}

impl ParamKind {
    pub fn label(&self, stage: usize) -> String {
        match self {
            ParamKind::Gamma => format!("gamma_{stage}"),
            ParamKind::Beta => format!("beta_{stage}"),
        }
    }
}

/// Pearson R of a stage-i response against each of the three predictors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub stage: usize,
    pub kind: ParamKind,
    /// R against gamma_1OPT(p=1); None when degenerate.
    pub r_gamma1: Option<f64>,
    /// R against beta_1OPT(p=1).
    pub r_beta1: Option<f64>,
    /// R against the circuit depth p.
    pub r_p: Option<f64>,
    pub samples: usize,
}

/// Within-optimum successive-difference statistics at one depth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendSummary {
    pub p: usize,
    pub mean_gamma_step: f64,
    pub mean_beta_step: f64,
    /// Fraction of instances whose mean gamma step is positive.
    pub frac_gamma_increasing: f64,
    /// Fraction of instances whose mean beta step is negative.
    pub frac_beta_decreasing: f64,
    pub instances: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// R between gamma_1OPT(p=1) and beta_1OPT(p=1) across graphs.
    pub r_gamma1_beta1: Option<f64>,
    pub entries: Vec<CorrelationEntry>,
    pub trends: Vec<TrendSummary>,
}

/// p=1 features per graph, from converged p=1 rows.
fn depth1_features(rows: &[DatasetRow]) -> HashMap<String, (f64, f64)> {
    rows.iter()
        .filter(|r| r.p == 1 && r.converged && !r.failed)
        .map(|r| (r.graph_id.clone(), (r.gamma_opt[0], r.beta_opt[0])))
        .collect()
}

/// Correlations between the two-level predictors (gamma_1OPT(p=1),
/// beta_1OPT(p=1), p) and each stage-i response, with stage-i responses
/// pooled across all rows of depth >= max(i, 1), plus per-depth trend
/// summaries of within-optimum successive differences.
pub fn correlation_report(rows: &[DatasetRow]) -> Result<CorrelationReport> {
    let usable: Vec<&DatasetRow> = rows.iter().filter(|r| r.converged && !r.failed).collect();
    let depths: HashSet<usize> = usable.iter().map(|r| r.p).collect();
    let graphs: HashSet<&str> = usable.iter().map(|r| r.graph_id.as_str()).collect();
    if depths.len() < 2 || graphs.len() < 3 {
        return Err(Error::Domain(format!(
            "correlation report needs >= 2 depths and >= 3 graphs (got {}/{})",
            depths.len(),
            graphs.len()
        )));
    }
    let feats = depth1_features(rows);
    let p_max = depths.iter().copied().max().unwrap();

    let r_gamma1_beta1 = {
        let mut ids: Vec<&String> = feats.keys().collect();
        ids.sort();
        let g1: Vec<f64> = ids.iter().map(|id| feats[*id].0).collect();
        let b1: Vec<f64> = ids.iter().map(|id| feats[*id].1).collect();
        pearson(&g1, &b1).ok()
    };

    let mut entries = Vec::new();
    for stage in 1..=p_max {
        for kind in [ParamKind::Gamma, ParamKind::Beta] {
            let mut xg = Vec::new();
            let mut xb = Vec::new();
            let mut xp = Vec::new();
            let mut y = Vec::new();
            for r in &usable {
                if r.p < stage {
                    continue;
                }
                let Some(&(g1, b1)) = feats.get(&r.graph_id) else {
                    continue;
                };
                let v = match kind {
                    ParamKind::Gamma => r.gamma_opt[stage - 1],
                    ParamKind::Beta => r.beta_opt[stage - 1],
                };
                xg.push(g1);
                xb.push(b1);
                xp.push(r.p as f64);
                y.push(v);
            }
            entries.push(CorrelationEntry {
                stage,
                kind,
                r_gamma1: pearson(&xg, &y).ok(),
                r_beta1: pearson(&xb, &y).ok(),
                r_p: pearson(&xp, &y).ok(),
                samples: y.len(),
            });
        }
    }

    let mut trends = Vec::new();
    for p in 2..=p_max {
        let mut gamma_steps = Vec::new();
        let mut beta_steps = Vec::new();
        for r in usable.iter().filter(|r| r.p == p) {
            let gstep: f64 = r
                .gamma_opt
                .windows(2)
                .map(|w| w[1] - w[0])
                .sum::<f64>()
                / (p - 1) as f64;
            let bstep: f64 =
                r.beta_opt.windows(2).map(|w| w[1] - w[0]).sum::<f64>() / (p - 1) as f64;
            gamma_steps.push(gstep);
            beta_steps.push(bstep);
        }
        if gamma_steps.is_empty() {
            continue;
        }
        let n = gamma_steps.len() as f64;
        trends.push(TrendSummary {
            p,
            mean_gamma_step: gamma_steps.iter().sum::<f64>() / n,
            mean_beta_step: beta_steps.iter().sum::<f64>() / n,
            frac_gamma_increasing: gamma_steps.iter().filter(|&&s| s > 0.0).count() as f64 / n,
            frac_beta_decreasing: beta_steps.iter().filter(|&&s| s < 0.0).count() as f64 / n,
            instances: gamma_steps.len(),
        });
    }

    Ok(CorrelationReport {
        r_gamma1_beta1,
        entries,
        trends,
    })
}

/// One trained model of the bank plus its training metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BankModel {
    pub stage: usize,
    pub kind: ParamKind,
    pub model: Model,
    pub metrics: ModelMetrics,
    pub training_rows: usize,
}

/// Per-(stage, parameter-kind) regression models mapping the p=1 optimum
/// (plus optional intermediate-depth optimum) and the target depth to
/// warm-start parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictorBank {
    pub p_max: usize,
    pub model_kind: ModelKind,
    /// Hierarchical variant: intermediate depth m whose optimum extends the
    /// feature vector to (gamma1, beta1, gamma_1..m(p=m), beta_1..m(p=m), p_t).
    pub intermediate_depth: Option<usize>,
    /// Graph ids the bank was trained on, for disjointness checks.
    pub train_graphs: Vec<String>,
    /// Per-feature training range (excluding the trailing p_t column). The
    /// models are only valid inside it: a level-1 run that lands in a
    /// secondary basin yields features far outside, where kernel regression
    /// extrapolates wildly; queries are clamped to this box.
    pub feature_lo: Vec<f64>,
    pub feature_hi: Vec<f64>,
    /// Mean training feature vector: the fallback query when a level-1 run
    /// lands so far outside the box that clamping would still extrapolate.
    pub feature_center: Vec<f64>,
    pub models: BTreeMap<String, BankModel>,
}

impl PredictorBank {
    pub fn feature_len(&self) -> usize {
        match self.intermediate_depth {
            Some(m) => 3 + 2 * m,
            None => 3,
        }
    }

    pub fn model(&self, stage: usize, kind: ParamKind) -> Result<&BankModel> {
        self.models
            .get(&kind.label(stage))
            .ok_or_else(|| Error::Domain(format!("bank has no model for {}", kind.label(stage))))
    }

    pub fn rebuild(&mut self) -> Result<()> {
        for m in self.models.values_mut() {
            m.model.rebuild()?;
        }
        Ok(())
    }
}

pub fn save_bank(path: &Path, bank: &PredictorBank) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, bank)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn load_bank(path: &Path) -> Result<PredictorBank> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut bank: PredictorBank = serde_json::from_reader(f)?;
    bank.rebuild()?;
    Ok(bank)
}

/// Periodic representative of `value` nearest zero.
pub fn wrap_target(value: f64, period: f64) -> f64 {
    let v = value.rem_euclid(period);
    if v > period / 2.0 {
        v - period
    } else {
        v
    }
}

/// Rewrites each target as the periodic representative nearest the circular
/// mean of the whole set. Gamma has period 2pi and beta period pi/2 (exact
/// circuit symmetries), so the rare optima sitting just across the domain
/// boundary from the bulk become nearby values instead of far outliers that
/// would wreck the regression fits, while a bulk that straddles the boundary
/// stays contiguous.
pub fn align_targets(values: &[f64], period: f64) -> Vec<f64> {
    let center = circular_center(values, period);
    values
        .iter()
        .map(|&v| center + wrap_target(v - center, period))
        .collect()
}

/// Circular mean of `values` on a circle of circumference `period`.
pub fn circular_center(values: &[f64], period: f64) -> f64 {
    let scale = std::f64::consts::TAU / period;
    let (s, c) = values
        .iter()
        .fold((0.0, 0.0), |(s, c), &v| (s + (v * scale).sin(), c + (v * scale).cos()));
    f64::atan2(s, c) / scale
}

/// Feature rows per train graph: the base (gamma1, beta1) pair plus, for a
/// hierarchical bank, the intermediate-depth optimum.
fn graph_features(
    rows: &[DatasetRow],
    train_ids: &HashSet<&str>,
    intermediate_depth: Option<usize>,
) -> HashMap<String, Vec<f64>> {
    let by_key: HashMap<(&str, usize), &DatasetRow> = rows
        .iter()
        .filter(|r| r.converged && !r.failed)
        .map(|r| ((r.graph_id.as_str(), r.p), r))
        .collect();
    let mut out = HashMap::new();
    for r in rows.iter().filter(|r| r.p == 1 && r.converged && !r.failed) {
        if !train_ids.contains(r.graph_id.as_str()) {
            continue;
        }
        let mut feats = vec![r.gamma_opt[0], r.beta_opt[0]];
        if let Some(m) = intermediate_depth {
            let Some(mid) = by_key.get(&(r.graph_id.as_str(), m)) else {
                continue; // missing intermediate row: graph excluded
            };
            feats.extend_from_slice(&mid.gamma_opt);
            feats.extend_from_slice(&mid.beta_opt);
        }
        out.insert(r.graph_id.clone(), feats);
    }
    out
}

fn train_bank_impl(
    rows: &[DatasetRow],
    train_ids: &[String],
    model_kind: ModelKind,
    cfg: &FitConfig,
    intermediate_depth: Option<usize>,
) -> Result<PredictorBank> {
    let id_set: HashSet<&str> = train_ids.iter().map(|s| s.as_str()).collect();
    let feats = graph_features(rows, &id_set, intermediate_depth);
    if feats.is_empty() {
        return Err(Error::Training(
            "no train graph has a usable p=1 row".into(),
        ));
    }
    let p_max = rows
        .iter()
        .filter(|r| r.converged && !r.failed)
        .map(|r| r.p)
        .max()
        .unwrap_or(1);
    let min_depth = intermediate_depth.map_or(2, |m| m + 1);

    let jobs: Vec<(usize, ParamKind)> = (1..=p_max)
        .flat_map(|i| [(i, ParamKind::Gamma), (i, ParamKind::Beta)])
        .collect();
    let trained: Vec<(String, BankModel)> = jobs
        .par_iter()
        .map(|&(stage, kind)| -> Result<(String, BankModel)> {
            let mut x: Vec<Vec<f64>> = Vec::new();
            let mut y: Vec<f64> = Vec::new();
            let mut groups: Vec<usize> = Vec::new();
            let mut group_of: HashMap<&str, usize> = HashMap::new();
            for r in rows.iter().filter(|r| r.converged && !r.failed) {
                if r.p < stage.max(min_depth) || !id_set.contains(r.graph_id.as_str()) {
                    continue;
                }
                let Some(base) = feats.get(&r.graph_id) else {
                    continue;
                };
                let mut row = base.clone();
                row.push(r.p as f64);
                let next = group_of.len();
                groups.push(*group_of.entry(r.graph_id.as_str()).or_insert(next));
                x.push(row);
                y.push(match kind {
                    ParamKind::Gamma => r.gamma_opt[stage - 1],
                    ParamKind::Beta => r.beta_opt[stage - 1],
                });
            }
            let period = match kind {
                ParamKind::Gamma => crate::sim::GAMMA_MAX,
                ParamKind::Beta => crate::sim::BETA_MAX / 2.0,
            };
            let y = align_targets(&y, period);
            if x.len() < 2 {
                return Err(Error::Training(format!(
                    "only {} training rows for {}",
                    x.len(),
                    kind.label(stage)
                )));
            }
            let model = fit_model(model_kind, &x, &y, &groups, cfg)?;
            let predicted: Vec<f64> = x
                .iter()
                .map(|r| model.predict(r))
                .collect::<Result<_>>()?;
            let metrics = regression_metrics(&predicted, &y, x[0].len())?;
            Ok((
                kind.label(stage),
                BankModel {
                    stage,
                    kind,
                    model,
                    metrics,
                    training_rows: x.len(),
                },
            ))
        })
        .collect::<Result<_>>()?;

    // Robust per-feature trust region: median +- 8 MAD. A plain min/max box
    // would be inflated by the few graphs whose own global optimum sits in a
    // secondary branch, and then fail to flag wrong-branch level-1 features.
    let n_base = feats.values().next().map_or(0, |f| f.len());
    let mut feature_lo = vec![0.0; n_base];
    let mut feature_hi = vec![0.0; n_base];
    let mut feature_center = vec![0.0; n_base];
    let median = |v: &mut Vec<f64>| -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if v.len() % 2 == 1 {
            v[v.len() / 2]
        } else {
            0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
        }
    };
    for j in 0..n_base {
        let mut col: Vec<f64> = feats.values().map(|f| f[j]).collect();
        let med = median(&mut col);
        let mut dev: Vec<f64> = col.iter().map(|v| (v - med).abs()).collect();
        let mut mad = median(&mut dev);
        if mad <= 0.0 {
            mad = col.last().unwrap() - col.first().unwrap();
        }
        feature_center[j] = med;
        feature_lo[j] = med - 8.0 * mad;
        feature_hi[j] = med + 8.0 * mad;
    }

    Ok(PredictorBank {
        p_max,
        model_kind,
        intermediate_depth,
        train_graphs: train_ids.to_vec(),
        feature_lo,
        feature_hi,
        feature_center,
        models: trained.into_iter().collect(),
    })
}

/// Trains the two-level bank: one model per (stage, parameter kind) with
/// features (gamma_1OPT(p=1), beta_1OPT(p=1), p).
pub fn train_predictor_bank(
    rows: &[DatasetRow],
    train_ids: &[String],
    model_kind: ModelKind,
    cfg: &FitConfig,
) -> Result<PredictorBank> {
    train_bank_impl(rows, train_ids, model_kind, cfg, None)
}

/// Trains the hierarchical variant whose features also carry the full
/// optimum at intermediate depth m.
pub fn train_hierarchical_bank(
    rows: &[DatasetRow],
    train_ids: &[String],
    intermediate_depth: usize,
    model_kind: ModelKind,
    cfg: &FitConfig,
) -> Result<PredictorBank> {
    if intermediate_depth < 2 {
        return Err(Error::Domain(
            "hierarchical intermediate depth must be >= 2".into(),
        ));
    }
    train_bank_impl(rows, train_ids, model_kind, cfg, Some(intermediate_depth))
}
