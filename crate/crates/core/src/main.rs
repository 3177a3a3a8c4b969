//! Command-line interface for the QAOA warm-start toolkit.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qaoa_warmstart::bench::{
    prediction_error_report, run_benchmark, two_level_solve, write_report_csv, BenchConfig,
};
use qaoa_warmstart::dataset::{
    build_dataset, correlation_report, export_csv, load_bank, read_graphs, read_rows,
    rows_by_key, save_bank, split_dataset, train_hierarchical_bank, train_predictor_bank,
    write_graphs, write_rows, SplitSpec,
};
use qaoa_warmstart::error::{Error, Result};
use qaoa_warmstart::graph::generate_graphs;
use qaoa_warmstart::optim::OptimizerConfig;
use qaoa_warmstart::regress::{FitConfig, ModelKind};

#[derive(Parser)]
#[command(name = "qaoa-warmstart", version, about = "Two-level ML warm starts for QAOA MaxCut")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate Erdos-Renyi problem graphs (JSON Lines).
    GenGraphs {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 330)]
        count: usize,
        #[arg(long, default_value_t = 0.5)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Optimize every (graph, depth) pair and store the optima.
    BuildDataset {
        #[arg(long)]
        graphs: PathBuf,
        /// Depths, e.g. "1..6" or "1,2,4".
        #[arg(long, default_value = "1..6")]
        depths: String,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value = "quasi-newton")]
        optimizer: String,
        #[arg(long, default_value_t = 1e-6)]
        ftol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Optional flat CSV export of the rows.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Correlation and trend report over a rows file.
    Analyze {
        #[arg(long)]
        rows: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split graphs into train/test sets (by graph id).
    Split {
        #[arg(long)]
        rows: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        train_frac: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the predictor bank on the training split.
    Train {
        #[arg(long)]
        rows: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long, default_value = "gpr")]
        model: String,
        /// Train the hierarchical variant with this intermediate depth.
        #[arg(long)]
        intermediate_depth: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Naive-vs-two-level benchmark over the test split.
    Bench {
        #[arg(long)]
        rows: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        bank: PathBuf,
        /// Graphs file (edge lists are needed to re-run the optimizers).
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long, default_value = "2..5")]
        depths: String,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value = "nelder-mead,quasi-newton")]
        optimizers: String,
        #[arg(long, default_value_t = 1e-6)]
        ftol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Log the multistart-stage-1 two-level variant with this many restarts.
        #[arg(long)]
        stage1_variant_restarts: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Directory for per-figure CSVs and raw per-graph records.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// One-off two-level solve of a single graph.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        bank: PathBuf,
        #[arg(long, default_value = "quasi-newton")]
        optimizer: String,
        #[arg(long, default_value_t = 1e-6)]
        ftol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Parses "a..b" (inclusive) or a comma list of depths.
fn parse_depths(s: &str) -> Result<Vec<usize>> {
    let parse_one = |t: &str| -> Result<usize> {
        t.trim()
            .parse::<usize>()
            .map_err(|_| Error::Domain(format!("invalid depth '{t}'")))
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse_one(a)?, parse_one(b)?);
        if a < 1 || b < a {
            return Err(Error::Domain(format!("invalid depth range '{s}'")));
        }
        return Ok((a..=b).collect());
    }
    let depths: Vec<usize> = s.split(',').map(parse_one).collect::<Result<_>>()?;
    if depths.is_empty() || depths.iter().any(|&d| d < 1) {
        return Err(Error::Domain(format!("invalid depths '{s}'")));
    }
    Ok(depths)
}

fn load_split(path: &Path) -> Result<SplitSpec> {
    let f = std::fs::File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}

fn opt_config(optimizer: &str, ftol: f64) -> Result<OptimizerConfig> {
    Ok(OptimizerConfig {
        kind: optimizer.parse()?,
        ftol,
        ..Default::default()
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenGraphs {
            n,
            count,
            edge_prob,
            seed,
            out,
        } => {
            let graphs = generate_graphs(n, count, edge_prob, seed)?;
            write_graphs(&out, &graphs)?;
            println!("wrote {} graphs to {}", graphs.len(), out.display());
        }
        Command::BuildDataset {
            graphs,
            depths,
            restarts,
            optimizer,
            ftol,
            seed,
            out,
            csv,
        } => {
            let graphs = read_graphs(&graphs)?;
            let depths = parse_depths(&depths)?;
            let cfg = opt_config(&optimizer, ftol)?;
            let existing = if out.exists() {
                rows_by_key(&read_rows(&out)?)
            } else {
                Default::default()
            };
            let prior = existing.len();
            let rows = build_dataset(&graphs, &depths, restarts, &cfg, seed, &existing)?;
            write_rows(&out, &rows)?;
            if let Some(csv) = csv {
                export_csv(&csv, &rows)?;
            }
            println!(
                "dataset complete: {} rows ({} new), {} parameters",
                rows.len(),
                rows.len() - prior,
                qaoa_warmstart::dataset::parameter_count(&rows)
            );
        }
        Command::Analyze { rows, out } => {
            let rows = read_rows(&rows)?;
            let rep = correlation_report(&rows)?;
            let mut f = std::io::BufWriter::new(std::fs::File::create(&out)?);
            writeln!(
                f,
                "record,stage,kind,r_gamma1,r_beta1,r_p,mean_gamma_step,mean_beta_step,\
                 frac_gamma_increasing,frac_beta_decreasing,samples"
            )?;
            writeln!(
                f,
                "gamma1_beta1,,,{},,,,,,,",
                fmt_opt(rep.r_gamma1_beta1)
            )?;
            for e in &rep.entries {
                writeln!(
                    f,
                    "correlation,{},{:?},{},{},{},,,,,{}",
                    e.stage,
                    e.kind,
                    fmt_opt(e.r_gamma1),
                    fmt_opt(e.r_beta1),
                    fmt_opt(e.r_p),
                    e.samples
                )?;
            }
            for t in &rep.trends {
                writeln!(
                    f,
                    "trend,{},,,,,{},{},{},{},{}",
                    t.p,
                    t.mean_gamma_step,
                    t.mean_beta_step,
                    t.frac_gamma_increasing,
                    t.frac_beta_decreasing,
                    t.instances
                )?;
            }
            println!("wrote correlation report to {}", out.display());
        }
        Command::Split {
            rows,
            train_frac,
            seed,
            out,
        } => {
            let rows = read_rows(&rows)?;
            let split = split_dataset(&rows, train_frac, seed)?;
            let mut f = std::io::BufWriter::new(std::fs::File::create(&out)?);
            serde_json::to_writer_pretty(&mut f, &split)?;
            f.write_all(b"\n")?;
            println!(
                "split: {} train / {} test graphs",
                split.train.len(),
                split.test.len()
            );
        }
        Command::Train {
            rows,
            split,
            model,
            intermediate_depth,
            out,
        } => {
            let rows = read_rows(&rows)?;
            let split = load_split(&split)?;
            let kind: ModelKind = model.parse()?;
            let cfg = FitConfig::default();
            let bank = match intermediate_depth {
                Some(m) => train_hierarchical_bank(&rows, &split.train, m, kind, &cfg)?,
                None => train_predictor_bank(&rows, &split.train, kind, &cfg)?,
            };
            save_bank(&out, &bank)?;
            println!(
                "trained {} models on {} graphs; wrote {}",
                bank.models.len(),
                bank.train_graphs.len(),
                out.display()
            );
        }
        Command::Bench {
            rows,
            split,
            bank,
            graphs,
            depths,
            restarts,
            optimizers,
            ftol,
            seed,
            stage1_variant_restarts,
            out,
            plot_data,
        } => {
            let rows = read_rows(&rows)?;
            let split = load_split(&split)?;
            let bank = load_bank(&bank)?;
            let graphs = read_graphs(&graphs)?;
            let test_ids: HashSet<&str> = split.test.iter().map(|s| s.as_str()).collect();
            let test_graphs: Vec<_> = graphs
                .into_iter()
                .filter(|g| test_ids.contains(g.id.as_str()))
                .collect();
            let cfg = BenchConfig {
                optimizers: optimizers
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<_>>()?,
                depths: parse_depths(&depths)?,
                restarts,
                ftol,
                max_evals: OptimizerConfig::default().max_evals,
                seed,
                stage1_variant_restarts,
            };
            let report = run_benchmark(&test_graphs, &bank, &cfg)?;
            if !report.train_overlap.is_empty() {
                eprintln!(
                    "warning: {} evaluation graphs overlap the training split",
                    report.train_overlap.len()
                );
            }
            write_report_csv(&out, &report)?;
            if let Some(dir) = plot_data {
                write_plot_data(&dir, &rows, &bank, &report)?;
            }
            for c in &report.cells {
                println!(
                    "{:>12} p={}: naive FC {:.1}±{:.1}, two-level FC {:.1}±{:.1}, reduction {:.1}%",
                    c.optimizer.as_str(),
                    c.p,
                    c.naive_fc_mean,
                    c.naive_fc_std,
                    c.ml_fc_mean,
                    c.ml_fc_std,
                    c.fc_reduction_pct
                );
            }
            println!("wrote report to {}", out.display());
        }
        Command::Solve {
            graph,
            p,
            bank,
            optimizer,
            ftol,
            seed,
        } => {
            let graphs = read_graphs(&graph)?;
            let g = graphs
                .first()
                .ok_or_else(|| Error::Domain("graph file is empty".into()))?;
            let bank = load_bank(&bank)?;
            let cfg = opt_config(&optimizer, ftol)?;
            let table = qaoa_warmstart::graph::cut_table(g)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let res = two_level_solve(&table, p, &bank, &cfg, &mut rng)?;
            println!("graph {} (n={}, {} edges)", g.id, g.n, g.edges.len());
            println!(
                "stage 1 (p=1): gamma={:.6} beta={:.6} F={:.6} fc={}",
                res.stage1.params.gamma[0],
                res.stage1.params.beta[0],
                res.stage1.value,
                res.stage1.fc
            );
            println!("predicted init: gamma={:?} beta={:?}", res.predicted_init.gamma, res.predicted_init.beta);
            println!(
                "stage 2 (p={p}): gamma={:?} beta={:?}",
                res.stage2.params.gamma, res.stage2.params.beta
            );
            println!(
                "F={:.6} max_cut={} AR={:.4} total FC={}",
                res.stage2.value, table.max_cut, res.ar, res.total_fc
            );
        }
    }
    Ok(())
}

/// Per-figure CSVs: within-optimum stage trends, cross-depth parameter
/// trends, predictor correlations, prediction errors, and the run-time
/// comparison table, plus the raw per-graph benchmark records.
fn write_plot_data(
    dir: &Path,
    rows: &[qaoa_warmstart::dataset::DatasetRow],
    bank: &qaoa_warmstart::dataset::PredictorBank,
    report: &qaoa_warmstart::bench::BenchReport,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("stage_params.csv"))?);
    writeln!(f, "graph_id,p,stage,gamma,beta")?;
    for r in rows.iter().filter(|r| r.converged && !r.failed) {
        for i in 0..r.p {
            writeln!(
                f,
                "{},{},{},{},{}",
                r.graph_id,
                r.p,
                i + 1,
                r.gamma_opt[i],
                r.beta_opt[i]
            )?;
        }
    }

    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("depth_params.csv"))?);
    writeln!(f, "graph_id,stage,p,gamma,beta")?;
    for r in rows.iter().filter(|r| r.converged && !r.failed) {
        for i in 0..r.p {
            writeln!(
                f,
                "{},{},{},{},{}",
                r.graph_id,
                i + 1,
                r.p,
                r.gamma_opt[i],
                r.beta_opt[i]
            )?;
        }
    }

    let rep = correlation_report(rows)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("correlations.csv"))?);
    writeln!(f, "stage,kind,r_gamma1,r_beta1,r_p,samples")?;
    for e in &rep.entries {
        writeln!(
            f,
            "{},{:?},{},{},{},{}",
            e.stage,
            e.kind,
            fmt_opt(e.r_gamma1),
            fmt_opt(e.r_beta1),
            fmt_opt(e.r_p),
            e.samples
        )?;
    }

    let errs = prediction_error_report(bank, rows)?;
    let mut f =
        std::io::BufWriter::new(std::fs::File::create(dir.join("prediction_errors.csv"))?);
    writeln!(f, "p,mean_rel_err,p50_rel_err,p90_rel_err,params_per_graph,graphs")?;
    for e in &errs {
        writeln!(
            f,
            "{},{},{},{},{},{}",
            e.p, e.mean_rel_err, e.p50_rel_err, e.p90_rel_err, e.params_per_graph, e.graphs
        )?;
    }

    write_report_csv(&dir.join("runtime_comparison.csv"), report)?;

    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("records.jsonl"))?);
    for r in &report.records {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap "errors" include --help/--version output.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Domain(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
