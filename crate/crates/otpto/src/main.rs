//! Command-line front end: staged subcommands over a shared artifact
//! directory, plus end-to-end pipeline, ablation, and robustness runs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use otpto::core::{read_orders_csv, validate_and_index, write_orders_csv, write_plans_csv, IndexedHistory, OrderLine};
use otpto::datagen::write_params_json;
use otpto::features::{build_feature_matrix, pm0_forecast, write_features_csv, write_schema_json, FeatureMatrix};
use otpto::labeling::{generate_optimal_labels, read_labels_csv, smooth_labels, write_labels_csv, LabelSet};
use otpto::mlcore::gbdt::{load_model, save_model};
use otpto::om1::{ObjectiveMode, SolverConfig};
use otpto::om2::AlgoType;
use otpto::pipeline::{
    evaluate_plans, load_config, load_dataset, plans_from_predictions, render_ablation_csv,
    render_ablation_markdown, render_report_csv, render_report_markdown, render_robustness_csv,
    render_robustness_markdown, run_ablation, run_pipeline, run_robustness, split_days,
    AblationGroup, DatasetSource, PipelineConfig, PipelineError,
};
use otpto::predict::{predict_models, train_models_with, write_predictions_csv};

#[derive(Parser)]
#[command(name = "otpto", version, about = "Joint product selection and inventory planning")]
struct Cli {
    /// Pipeline configuration JSON; omit for the built-in synthetic profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the generator and model seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for artifacts and reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, ValueEnum)]
enum AlgoArg {
    Otpto,
    Pto,
}

impl From<AlgoArg> for AlgoType {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Otpto => AlgoType::Otpto,
            AlgoArg::Pto => AlgoType::Pto,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the configured order stream to the artifact directory.
    Gen,
    /// Validate the order stream and print a summary.
    Index,
    /// Solve per-day optima over the train window and write labels.
    Label,
    /// Build train and test feature matrices from the labels.
    Features,
    /// Train the selection (PM1) and quantity (PM2) models.
    Train,
    /// Predict the test horizon and post-process into stock plans.
    Plan {
        #[arg(long, value_enum)]
        algo: AlgoArg,
    },
    /// Score existing plan files against realized orders and per-day OPT.
    Eval,
    /// Run every stage end to end and write all artifacts.
    Pipeline,
    /// Re-run the pipeline with individual strategies disabled.
    Ablation {
        /// Comma-separated groups among A1..A6.
        #[arg(long, value_delimiter = ',', default_value = "A1,A2,A3,A4,A5,A6")]
        groups: Vec<String>,
    },
    /// Sweep synthetic profiles and report mean gaps to OPT.
    Robustness {
        #[arg(long, default_value_t = 6)]
        profiles: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Prefers a previously written orders.csv so staged runs share one dataset.
fn load_history(cli: &Cli, cfg: &PipelineConfig) -> Result<(Vec<OrderLine>, IndexedHistory), PipelineError> {
    let staged = cli.out.join("orders.csv");
    let lines = if staged.exists() {
        read_orders_csv(&staged)?
    } else {
        load_dataset(cfg)?
    };
    let history = validate_and_index(&lines)?;
    Ok((lines, history))
}

fn load_labels(cli: &Cli) -> Result<LabelSet, PipelineError> {
    let path = cli.out.join("labels.csv");
    if !path.exists() {
        return Err(PipelineError::InvalidSplit(format!(
            "{} not found; run `label` first",
            path.display()
        )));
    }
    Ok(read_labels_csv(&path)?)
}

/// Builds the train and test matrices exactly as the pipeline does.
fn build_matrices(
    cfg: &PipelineConfig,
    history: &IndexedHistory,
    labels: &LabelSet,
) -> Result<(FeatureMatrix, FeatureMatrix), PipelineError> {
    let (train_days, test_days) = split_days(history, cfg)?;
    let train_start = train_days[0];
    let train_end = *train_days.last().unwrap();
    let warmup = cfg.feature_warmup_days.min(train_days.len() - 1);
    let train = build_feature_matrix(history, labels, &cfg.features, train_start, train_end, &train_days[warmup..])?;
    let test = build_feature_matrix(history, labels, &cfg.features, train_start, train_end, &test_days)?;
    Ok((train, test))
}

fn run(cli: &Cli) -> Result<ExitCode, PipelineError> {
    let cfg = load_config(cli.config.as_deref(), cli.seed)?;
    std::fs::create_dir_all(&cli.out)?;
    match &cli.cmd {
        Cmd::Gen => {
            let lines = load_dataset(&cfg)?;
            validate_and_index(&lines)?;
            write_orders_csv(cli.out.join("orders.csv"), &lines)?;
            if let DatasetSource::Generate(params) = &cfg.dataset {
                write_params_json(cli.out.join("gen_params.json"), params)?;
            }
            println!("wrote {} order lines to {}", lines.len(), cli.out.join("orders.csv").display());
        }
        Cmd::Index => {
            let (lines, history) = load_history(cli, &cfg)?;
            let orders: usize = history.days().iter().map(|d| d.order_count()).sum();
            let span = match (history.first_date(), history.last_date()) {
                (Some(a), Some(b)) => format!("{a} .. {b}"),
                _ => "empty".to_string(),
            };
            println!(
                "{} lines, {} orders, {} SKUs over {} days ({span})",
                lines.len(),
                orders,
                history.num_skus(),
                history.days().len()
            );
        }
        Cmd::Label => {
            let (_, history) = load_history(cli, &cfg)?;
            let (train_days, _) = split_days(&history, &cfg)?;
            let mut solver = SolverConfig::new(ObjectiveMode::RatePlusGmv);
            solver.node_limit = cfg.label_node_limit;
            let raw = generate_optimal_labels(&history, &cfg.warehouse, &solver, Some(&train_days))?;
            let labels = if cfg.smoothing_enabled {
                smooth_labels(&raw, &history, &cfg.smoothing, cfg.features.seed)?
            } else {
                raw
            };
            write_labels_csv(cli.out.join("labels.csv"), &labels)?;
            println!(
                "labeled {} train days ({} rows), {} hit the node budget",
                train_days.len(),
                labels.rows.len(),
                labels.flagged_days.len()
            );
            if !labels.flagged_days.is_empty() {
                return Ok(ExitCode::from(3));
            }
        }
        Cmd::Features => {
            let (_, history) = load_history(cli, &cfg)?;
            let labels = load_labels(cli)?;
            let (train, test) = build_matrices(&cfg, &history, &labels)?;
            write_features_csv(cli.out.join("features_train.csv"), &train)?;
            write_features_csv(cli.out.join("features_test.csv"), &test)?;
            write_schema_json(cli.out.join("feature_schema.json"), &train)?;
            println!("{} train rows, {} test rows, {} columns", train.rows.len(), test.rows.len(), train.columns.len());
        }
        Cmd::Train => {
            let (_, history) = load_history(cli, &cfg)?;
            let labels = load_labels(cli)?;
            let (train, _) = build_matrices(&cfg, &history, &labels)?;
            let (pm1, pm2, metrics) =
                train_models_with(&train, &labels, &cfg.pm1, &cfg.pm2, cfg.pm2_keep_zero_rows)?;
            save_model(cli.out.join("pm1.json"), &pm1)?;
            save_model(cli.out.join("pm2.json"), &pm2)?;
            println!(
                "PM1: {} rows, validation AUC {:?}; PM2: {} rows, validation RMSE {:?}",
                metrics.pm1_rows, metrics.pm1_auc, metrics.pm2_rows, metrics.pm2_rmse
            );
        }
        Cmd::Plan { algo } => {
            let (_, history) = load_history(cli, &cfg)?;
            let labels = load_labels(cli)?;
            let (_, test) = build_matrices(&cfg, &history, &labels)?;
            let (train_days, test_days) = split_days(&history, &cfg)?;
            let pm1 = load_model(cli.out.join("pm1.json"))?;
            let pm2 = load_model(cli.out.join("pm2.json"))?;
            let pm0 = pm0_forecast(&history, &test_days, cfg.features.pm0_window, train_days.last().copied());
            let predictions = predict_models(&pm1, &pm2, &test, &pm0)?;
            write_predictions_csv(cli.out.join("predictions.csv"), &predictions)?;
            let algo = AlgoType::from(*algo);
            let plans = plans_from_predictions(&predictions, &cfg, algo);
            for plan in &plans {
                plan.check_feasible(&cfg.warehouse)?;
            }
            write_plans_csv(cli.out.join(format!("plans_{algo}.csv")), &plans)?;
            println!("wrote {} {algo} plans", plans.len());
        }
        Cmd::Eval => {
            let (_, history) = load_history(cli, &cfg)?;
            let otpto_plans = otpto::core::read_plans_csv(cli.out.join("plans_otpto.csv"))?;
            let pto_plans = otpto::core::read_plans_csv(cli.out.join("plans_pto.csv"))?;
            let report = evaluate_plans(&history, &otpto_plans, &pto_plans, &cfg.warehouse, cfg.opt_node_limit)?;
            std::fs::write(cli.out.join("report.csv"), render_report_csv(&report))?;
            std::fs::write(cli.out.join("report.md"), render_report_markdown(&report))?;
            println!(
                "avg OTPTO {:.4}, PTO {:.4}, OPT {:.4}, diff {:+.4}",
                report.avg_otpto, report.avg_pto, report.avg_opt, report.avg_diff
            );
            if report.hit_solver_limits() {
                return Ok(ExitCode::from(3));
            }
        }
        Cmd::Pipeline => {
            let (report, _) = run_pipeline(&cfg, Some(&cli.out))?;
            println!(
                "avg OTPTO {:.4}, PTO {:.4}, OPT {:.4}, diff {:+.4} over {} test days",
                report.avg_otpto,
                report.avg_pto,
                report.avg_opt,
                report.avg_diff,
                report.days.len()
            );
            if report.hit_solver_limits() {
                println!(
                    "solver budgets hit on {} label days and {} OPT days; OPT column is an upper bound there",
                    report.flagged_label_days, report.opt_bound_days
                );
                return Ok(ExitCode::from(3));
            }
        }
        Cmd::Ablation { groups } => {
            let groups: Vec<AblationGroup> = groups
                .iter()
                .map(|g| AblationGroup::parse(g))
                .collect::<Result<_, _>>()?;
            let report = run_ablation(&cfg, &groups)?;
            std::fs::write(cli.out.join("ablation.csv"), render_ablation_csv(&report))?;
            std::fs::write(cli.out.join("ablation.md"), render_ablation_markdown(&report))?;
            for c in &report.columns {
                println!("{}: avg {:.4} (baseline - group = {:+.4})", c.group, c.avg, c.diff_vs_baseline);
            }
            if report.baseline.hit_solver_limits() {
                return Ok(ExitCode::from(3));
            }
        }
        Cmd::Robustness { profiles } => {
            let report = run_robustness(&cfg, *profiles)?;
            std::fs::write(cli.out.join("robustness.csv"), render_robustness_csv(&report))?;
            std::fs::write(cli.out.join("robustness.md"), render_robustness_markdown(&report))?;
            for r in &report.rows {
                println!(
                    "profile {} (seed {}): OTPTO gap {:.4}, PTO gap {:.4}",
                    r.profile, r.seed, r.otpto_gap, r.pto_gap
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
