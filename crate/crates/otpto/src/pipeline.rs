//! End-to-end orchestration: data → labels → features → models → plans →
//! evaluation against the per-day exact optimum, plus ablation and
//! multi-profile robustness sweeps.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{
    read_orders_csv, simulate_day, validate_and_index, write_orders_csv, write_plans_csv,
    CoreError, IndexedHistory, StockPlan, WarehouseConfig,
};
use crate::datagen::{generate_synthetic, write_params_json, GenError, GenParams};
use crate::features::{
    build_feature_matrix, pm0_forecast, write_features_csv, write_schema_json, FeatureConfig,
    FeatureError,
};
use crate::labeling::{
    generate_optimal_labels, smooth_labels, write_labels_csv, LabelError, LabelSet,
    SmoothingConfig,
};
use crate::mlcore::gbdt::save_model;
use crate::mlcore::{GbdtParams, MlError};
use crate::om1::{solve_exact, ObjectiveMode, SolveError, SolveStatus, SolverConfig};
use crate::om2::{postprocess_plan, AlgoType, PostprocessConfig};
use crate::predict::{
    predict_models, train_models_with, write_predictions_csv, PredictError, PredictionBundle,
    TrainMetrics,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("dataset stage: {0}")]
    Gen(#[from] GenError),
    #[error("index stage: {0}")]
    Core(#[from] CoreError),
    #[error("label stage: {0}")]
    Label(#[from] LabelError),
    #[error("feature stage: {0}")]
    Feature(#[from] FeatureError),
    #[error("train stage: {0}")]
    Predict(#[from] PredictError),
    #[error("evaluate stage: {0}")]
    Solve(#[from] SolveError),
    #[error("train/test split: {0}")]
    InvalidSplit(String),
    #[error("unknown ablation group {0:?}")]
    UnknownGroup(String),
    #[error("model io: {0}")]
    Ml(#[from] MlError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config error: {0}")]
    Serde(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    /// Orders CSV on disk.
    Path(PathBuf),
    /// Generate synthetically.
    Generate(GenParams),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub dataset: DatasetSource,
    pub warehouse: WarehouseConfig,
    pub smoothing: SmoothingConfig,
    pub features: FeatureConfig,
    pub pm1: GbdtParams,
    pub pm2: GbdtParams,
    /// Node budget per OM1 label solve; days hitting it are flagged and use
    /// the incumbent. Node budgets (not wall-clock limits) keep runs
    /// deterministic.
    pub label_node_limit: Option<u64>,
    /// Node budget per test-day OPT solve; unproven days report the bound.
    pub opt_node_limit: Option<u64>,
    /// First training day (default: first day in the data).
    pub train_start: Option<NaiveDate>,
    /// Last training day (default: leaves the final `horizon_days` for test).
    pub train_end: Option<NaiveDate>,
    /// Training rows begin this many days into the train window so their
    /// trailing aggregates have context; labels are still generated for the
    /// whole window.
    pub feature_warmup_days: usize,
    /// A1 ablation: keep x_star = 0 rows in PM2 training.
    pub pm2_keep_zero_rows: bool,
    /// A2 ablation is `smoothing_enabled = false` (PM1 target = y_star).
    pub smoothing_enabled: bool,
    /// PTO branch literal (listing) sort order.
    pub pto_literal_sort: bool,
    /// Seeds for multi-seed sweeps (robustness); single runs use the
    /// dataset's own seed.
    pub seeds: Vec<u64>,
}

impl PipelineConfig {
    /// Desk-scale synthetic benchmark configuration.
    pub fn default_synthetic(seed: u64) -> Self {
        PipelineConfig {
            dataset: DatasetSource::Generate(GenParams {
                seed,
                ..GenParams::default()
            }),
            warehouse: WarehouseConfig {
                k_max_skus: 40,
                n_max_units: 900,
                b_min_units: 5,
                horizon_days: 7,
            },
            smoothing: SmoothingConfig::default(),
            features: FeatureConfig::default(),
            pm1: GbdtParams::pm1(),
            pm2: GbdtParams::pm2(),
            label_node_limit: Some(200_000),
            opt_node_limit: Some(400_000),
            train_start: None,
            train_end: None,
            feature_warmup_days: 14,
            pm2_keep_zero_rows: false,
            smoothing_enabled: true,
            pto_literal_sort: false,
            seeds: vec![1, 2, 3, 4, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayResult {
    pub date: NaiveDate,
    pub order_count: usize,
    pub otpto_rate: f64,
    pub pto_rate: f64,
    pub opt_rate: f64,
    /// True when the OPT solve hit its node budget; opt_rate is then a valid
    /// upper bound rather than an attained rate.
    pub opt_is_bound: bool,
    /// OTPTO − PTO.
    pub diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub date: NaiveDate,
    pub algo: AlgoType,
    pub sku_count: usize,
    pub total_units: f64,
    pub min_qty: f64,
    pub max_qty: f64,
    pub mean_qty: f64,
    pub median_qty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub days: Vec<DayResult>,
    pub avg_otpto: f64,
    pub avg_pto: f64,
    pub avg_opt: f64,
    pub avg_diff: f64,
    /// Order-count-weighted counterparts of the unweighted averages.
    pub weighted_otpto: f64,
    pub weighted_pto: f64,
    pub plan_summaries: Vec<PlanSummary>,
    pub pm1_auc: Option<f64>,
    pub pm2_rmse: Option<f64>,
    pub flagged_label_days: usize,
    pub opt_bound_days: usize,
}

impl PipelineReport {
    pub fn hit_solver_limits(&self) -> bool {
        self.flagged_label_days > 0 || self.opt_bound_days > 0
    }

    /// Mean relative gap to OPT, per algorithm.
    pub fn gap_to_opt(&self, algo: AlgoType) -> f64 {
        let gaps: Vec<f64> = self
            .days
            .iter()
            .map(|d| {
                let rate = match algo {
                    AlgoType::Otpto => d.otpto_rate,
                    AlgoType::Pto => d.pto_rate,
                };
                if d.opt_rate > 0.0 {
                    1.0 - rate / d.opt_rate
                } else {
                    0.0
                }
            })
            .collect();
        gaps.iter().sum::<f64>() / gaps.len().max(1) as f64
    }
}

fn plan_summary(date: NaiveDate, algo: AlgoType, plan: &StockPlan) -> PlanSummary {
    let mut q: Vec<f64> = plan.entries.values().copied().collect();
    q.sort_by(f64::total_cmp);
    let n = q.len();
    let (min_qty, max_qty, mean_qty, median_qty) = if n == 0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let median = if n % 2 == 1 {
            q[n / 2]
        } else {
            (q[n / 2 - 1] + q[n / 2]) / 2.0
        };
        (q[0], q[n - 1], q.iter().sum::<f64>() / n as f64, median)
    };
    PlanSummary {
        date,
        algo,
        sku_count: n,
        total_units: plan.total_units(),
        min_qty,
        max_qty,
        mean_qty,
        median_qty,
    }
}

/// Intermediate artifacts of a pipeline run, exposed for persistence and for
/// the stage-wise CLI.
pub struct PipelineArtifacts {
    pub history: IndexedHistory,
    pub labels: LabelSet,
    pub predictions: PredictionBundle,
    pub otpto_plans: Vec<StockPlan>,
    pub pto_plans: Vec<StockPlan>,
    pub train_days: Vec<NaiveDate>,
    pub test_days: Vec<NaiveDate>,
    pub metrics: TrainMetrics,
}

pub fn load_dataset(cfg: &PipelineConfig) -> Result<Vec<crate::core::OrderLine>, PipelineError> {
    Ok(match &cfg.dataset {
        DatasetSource::Path(p) => read_orders_csv(p)?,
        DatasetSource::Generate(params) => generate_synthetic(params)?,
    })
}

/// Splits the history's days into a train window and the test horizon.
pub fn split_days(
    history: &IndexedHistory,
    cfg: &PipelineConfig,
) -> Result<(Vec<NaiveDate>, Vec<NaiveDate>), PipelineError> {
    let all: Vec<NaiveDate> = history.days().iter().map(|d| d.date).collect();
    let horizon = cfg.warehouse.horizon_days as usize;
    if all.len() < horizon + 2 {
        return Err(PipelineError::InvalidSplit(format!(
            "{} days of data cannot host a {horizon}-day test horizon",
            all.len()
        )));
    }
    let train_end = cfg.train_end.unwrap_or(all[all.len() - horizon - 1]);
    let train_start = cfg.train_start.unwrap_or(all[0]);
    let train: Vec<NaiveDate> = all
        .iter()
        .copied()
        .filter(|&d| d >= train_start && d <= train_end)
        .collect();
    let test: Vec<NaiveDate> = all
        .iter()
        .copied()
        .filter(|&d| d > train_end)
        .take(horizon)
        .collect();
    if train.is_empty() {
        return Err(PipelineError::InvalidSplit("empty train window".into()));
    }
    if test.len() != horizon {
        return Err(PipelineError::InvalidSplit(format!(
            "only {} test days after {train_end}, need {horizon}",
            test.len()
        )));
    }
    Ok((train, test))
}

/// Runs the full pipeline and evaluates both algorithms against per-day OPT.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    out_dir: Option<&Path>,
) -> Result<(PipelineReport, PipelineArtifacts), PipelineError> {
    let lines = load_dataset(cfg)?;
    let history = validate_and_index(&lines)?;
    let (train_days, test_days) = split_days(&history, cfg)?;
    let train_start = train_days[0];
    let train_end = *train_days.last().unwrap();

    // historical optima and smoothing
    let mut label_solver = SolverConfig::new(ObjectiveMode::RatePlusGmv);
    label_solver.node_limit = cfg.label_node_limit;
    let raw_labels = generate_optimal_labels(&history, &cfg.warehouse, &label_solver, Some(&train_days))?;
    let labels = if cfg.smoothing_enabled {
        smooth_labels(&raw_labels, &history, &cfg.smoothing, cfg.features.seed)?
    } else {
        raw_labels.clone()
    };

    // features and models; skip warmup days whose trailing stats are empty
    let warmup = cfg.feature_warmup_days.min(train_days.len() - 1);
    let model_days = &train_days[warmup..];
    let train_matrix = build_feature_matrix(
        &history,
        &labels,
        &cfg.features,
        train_start,
        train_end,
        model_days,
    )?;
    let test_matrix = build_feature_matrix(
        &history,
        &labels,
        &cfg.features,
        train_start,
        train_end,
        &test_days,
    )?;
    let (pm1, pm2, metrics) = train_models_with(
        &train_matrix,
        &labels,
        &cfg.pm1,
        &cfg.pm2,
        cfg.pm2_keep_zero_rows,
    )?;
    let pm0 = pm0_forecast(
        &history,
        &test_days,
        cfg.features.pm0_window,
        Some(train_end),
    );
    let predictions = predict_models(&pm1, &pm2, &test_matrix, &pm0)?;

    // plans and evaluation, fanned out per test day, collected in date order
    let mut opt_solver = SolverConfig::new(ObjectiveMode::RateOnly);
    opt_solver.node_limit = cfg.opt_node_limit;
    let per_day: Vec<Result<(DayResult, StockPlan, StockPlan), PipelineError>> = test_days
        .par_iter()
        .map(|&date| {
            let rows = predictions.day_rows(date);
            let otpto_cfg = PostprocessConfig {
                algo_type: AlgoType::Otpto,
                warehouse: cfg.warehouse.clone(),
                pto_literal_sort: cfg.pto_literal_sort,
            };
            let pto_cfg = PostprocessConfig {
                algo_type: AlgoType::Pto,
                ..otpto_cfg.clone()
            };
            let (otpto_plan, _) = postprocess_plan(date, &rows, &otpto_cfg);
            let (pto_plan, _) = postprocess_plan(date, &rows, &pto_cfg);
            otpto_plan.check_feasible(&cfg.warehouse)?;
            pto_plan.check_feasible(&cfg.warehouse)?;
            let day = history
                .day(date)
                .ok_or(SolveError::UnknownDay(date))?;
            let otpto_sim = simulate_day(&history, day, &otpto_plan)?;
            let pto_sim = simulate_day(&history, day, &pto_plan)?;
            let opt = solve_exact(&history, date, &cfg.warehouse, &opt_solver)?;
            let opt_is_bound = opt.status != SolveStatus::ProvenOptimal;
            let opt_rate = if opt_is_bound {
                opt.upper_bound
            } else {
                opt.objective_rate
            };
            Ok((
                DayResult {
                    date,
                    order_count: day.order_count(),
                    otpto_rate: otpto_sim.rate,
                    pto_rate: pto_sim.rate,
                    opt_rate,
                    opt_is_bound,
                    diff: otpto_sim.rate - pto_sim.rate,
                },
                otpto_plan,
                pto_plan,
            ))
        })
        .collect();

    let mut days = Vec::new();
    let mut otpto_plans = Vec::new();
    let mut pto_plans = Vec::new();
    let mut plan_summaries = Vec::new();
    for item in per_day {
        let (day, otpto_plan, pto_plan) = item?;
        plan_summaries.push(plan_summary(day.date, AlgoType::Otpto, &otpto_plan));
        plan_summaries.push(plan_summary(day.date, AlgoType::Pto, &pto_plan));
        otpto_plans.push(otpto_plan);
        pto_plans.push(pto_plan);
        days.push(day);
    }

    let n = days.len() as f64;
    let total_orders: f64 = days.iter().map(|d| d.order_count as f64).sum();
    let weighted = |f: fn(&DayResult) -> f64| {
        days.iter()
            .map(|d| f(d) * d.order_count as f64)
            .sum::<f64>()
            / total_orders.max(1.0)
    };
    let report = PipelineReport {
        avg_otpto: days.iter().map(|d| d.otpto_rate).sum::<f64>() / n,
        avg_pto: days.iter().map(|d| d.pto_rate).sum::<f64>() / n,
        avg_opt: days.iter().map(|d| d.opt_rate).sum::<f64>() / n,
        avg_diff: days.iter().map(|d| d.diff).sum::<f64>() / n,
        weighted_otpto: weighted(|d| d.otpto_rate),
        weighted_pto: weighted(|d| d.pto_rate),
        plan_summaries,
        pm1_auc: metrics.pm1_auc,
        pm2_rmse: metrics.pm2_rmse,
        flagged_label_days: labels.flagged_days.len(),
        opt_bound_days: days.iter().filter(|d| d.opt_is_bound).count(),
        days,
    };

    let artifacts = PipelineArtifacts {
        history,
        labels,
        predictions,
        otpto_plans,
        pto_plans,
        train_days,
        test_days,
        metrics,
    };

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        if let DatasetSource::Generate(params) = &cfg.dataset {
            write_orders_csv(dir.join("orders.csv"), &lines)?;
            write_params_json(dir.join("gen_params.json"), params)?;
        }
        write_labels_csv(dir.join("labels.csv"), &artifacts.labels)?;
        write_features_csv(dir.join("features_train.csv"), &train_matrix)?;
        write_features_csv(dir.join("features_test.csv"), &test_matrix)?;
        write_schema_json(dir.join("feature_schema.json"), &train_matrix)?;
        save_model(dir.join("pm1.json"), &pm1)?;
        save_model(dir.join("pm2.json"), &pm2)?;
        write_predictions_csv(dir.join("predictions.csv"), &artifacts.predictions)?;
        write_plans_csv(dir.join("plans_otpto.csv"), &artifacts.otpto_plans)?;
        write_plans_csv(dir.join("plans_pto.csv"), &artifacts.pto_plans)?;
        std::fs::write(dir.join("report.csv"), render_report_csv(&report))?;
        std::fs::write(dir.join("report.md"), render_report_markdown(&report))?;
    }

    Ok((report, artifacts))
}

/// Scores already-built OTPTO/PTO plan files against realized orders and the
/// per-day exact optimum. Model metrics are absent since no training happens.
pub fn evaluate_plans(
    history: &IndexedHistory,
    otpto_plans: &[StockPlan],
    pto_plans: &[StockPlan],
    warehouse: &WarehouseConfig,
    opt_node_limit: Option<u64>,
) -> Result<PipelineReport, PipelineError> {
    if otpto_plans.len() != pto_plans.len()
        || otpto_plans
            .iter()
            .zip(pto_plans)
            .any(|(a, b)| a.day != b.day)
    {
        return Err(PipelineError::InvalidSplit(
            "plan files cover different days".into(),
        ));
    }
    let mut opt_solver = SolverConfig::new(ObjectiveMode::RateOnly);
    opt_solver.node_limit = opt_node_limit;
    let per_day: Vec<Result<(DayResult, PlanSummary, PlanSummary), PipelineError>> = otpto_plans
        .par_iter()
        .zip(pto_plans)
        .map(|(otpto_plan, pto_plan)| {
            let date = otpto_plan.day;
            otpto_plan.check_feasible(warehouse)?;
            pto_plan.check_feasible(warehouse)?;
            let day = history.day(date).ok_or(SolveError::UnknownDay(date))?;
            let otpto_sim = simulate_day(history, day, otpto_plan)?;
            let pto_sim = simulate_day(history, day, pto_plan)?;
            let opt = solve_exact(history, date, warehouse, &opt_solver)?;
            let opt_is_bound = opt.status != SolveStatus::ProvenOptimal;
            let opt_rate = if opt_is_bound {
                opt.upper_bound
            } else {
                opt.objective_rate
            };
            Ok((
                DayResult {
                    date,
                    order_count: day.order_count(),
                    otpto_rate: otpto_sim.rate,
                    pto_rate: pto_sim.rate,
                    opt_rate,
                    opt_is_bound,
                    diff: otpto_sim.rate - pto_sim.rate,
                },
                plan_summary(date, AlgoType::Otpto, otpto_plan),
                plan_summary(date, AlgoType::Pto, pto_plan),
            ))
        })
        .collect();

    let mut days = Vec::new();
    let mut plan_summaries = Vec::new();
    for item in per_day {
        let (day, s1, s2) = item?;
        plan_summaries.push(s1);
        plan_summaries.push(s2);
        days.push(day);
    }
    let n = days.len().max(1) as f64;
    let total_orders: f64 = days.iter().map(|d| d.order_count as f64).sum();
    let weighted = |f: fn(&DayResult) -> f64| {
        days.iter()
            .map(|d| f(d) * d.order_count as f64)
            .sum::<f64>()
            / total_orders.max(1.0)
    };
    Ok(PipelineReport {
        avg_otpto: days.iter().map(|d| d.otpto_rate).sum::<f64>() / n,
        avg_pto: days.iter().map(|d| d.pto_rate).sum::<f64>() / n,
        avg_opt: days.iter().map(|d| d.opt_rate).sum::<f64>() / n,
        avg_diff: days.iter().map(|d| d.diff).sum::<f64>() / n,
        weighted_otpto: weighted(|d| d.otpto_rate),
        weighted_pto: weighted(|d| d.pto_rate),
        plan_summaries,
        pm1_auc: None,
        pm2_rmse: None,
        flagged_label_days: 0,
        opt_bound_days: days.iter().filter(|d| d.opt_is_bound).count(),
        days,
    })
}

fn pct(x: f64) -> String {
    format!("{:.2}%", x * 100.0)
}

/// Table-shaped CSV: Date / Ord qtty / OTPTO / PTO / OPT / Diff.
pub fn render_report_csv(report: &PipelineReport) -> String {
    let mut out = String::from("date,ord_qtty,otpto,pto,opt,diff,opt_is_bound\n");
    for d in &report.days {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{}\n",
            d.date.format("%Y-%m-%d"),
            d.order_count,
            d.otpto_rate,
            d.pto_rate,
            d.opt_rate,
            d.diff,
            d.opt_is_bound as u8
        ));
    }
    out.push_str(&format!(
        "average,,{:.6},{:.6},{:.6},{:.6},\n",
        report.avg_otpto, report.avg_pto, report.avg_opt, report.avg_diff
    ));
    out
}

pub fn render_report_markdown(report: &PipelineReport) -> String {
    let mut out = String::new();
    out.push_str("| Date | Ord qtty | OTPTO | PTO | OPT | Diff |\n");
    out.push_str("| --- | --- | --- | --- | --- | --- |\n");
    for d in &report.days {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {}{} | {} |\n",
            d.date.format("%Y-%m-%d"),
            d.order_count,
            pct(d.otpto_rate),
            pct(d.pto_rate),
            pct(d.opt_rate),
            if d.opt_is_bound { " (bound)" } else { "" },
            pct(d.diff)
        ));
    }
    out.push_str(&format!(
        "| Average | {} | {} | {} | {} | {} |\n\n",
        report.days.iter().map(|d| d.order_count).sum::<usize>(),
        pct(report.avg_otpto),
        pct(report.avg_pto),
        pct(report.avg_opt),
        pct(report.avg_diff)
    ));
    out.push_str(&format!(
        "Order-weighted: OTPTO {} | PTO {}\n\n",
        pct(report.weighted_otpto),
        pct(report.weighted_pto)
    ));
    out.push_str("| Date | Algo | SKUs | Units | Min | Max | Mean | Median |\n");
    out.push_str("| --- | --- | --- | --- | --- | --- | --- | --- |\n");
    for s in &report.plan_summaries {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {:.2} | {:.1} |\n",
            s.date.format("%Y-%m-%d"),
            s.algo,
            s.sku_count,
            s.total_units,
            s.min_qty,
            s.max_qty,
            s.mean_qty,
            s.median_qty
        ));
    }
    if let Some(auc) = report.pm1_auc {
        out.push_str(&format!("\nPM1 validation AUC: {auc:.4}\n"));
    }
    if let Some(rmse) = report.pm2_rmse {
        out.push_str(&format!("PM2 validation RMSE: {rmse:.4}\n"));
    }
    if report.flagged_label_days > 0 || report.opt_bound_days > 0 {
        out.push_str(&format!(
            "\nSolver budgets hit: {} label days, {} OPT days (bounds reported).\n",
            report.flagged_label_days, report.opt_bound_days
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AblationGroup {
    /// PM2 keeps x_star = 0 rows.
    A1,
    /// PM1 target is raw y_star (no smoothing).
    A2,
    /// Drop decision-making features.
    A3,
    /// Drop sales-prediction features.
    A4,
    /// Drop clustering features.
    A5,
    /// Drop SKU-order cross features.
    A6,
}

impl AblationGroup {
    pub fn parse(s: &str) -> Result<Self, PipelineError> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A1" => Ok(AblationGroup::A1),
            "A2" => Ok(AblationGroup::A2),
            "A3" => Ok(AblationGroup::A3),
            "A4" => Ok(AblationGroup::A4),
            "A5" => Ok(AblationGroup::A5),
            "A6" => Ok(AblationGroup::A6),
            other => Err(PipelineError::UnknownGroup(other.to_string())),
        }
    }

    pub fn apply(self, cfg: &mut PipelineConfig) {
        match self {
            AblationGroup::A1 => cfg.pm2_keep_zero_rows = true,
            AblationGroup::A2 => cfg.smoothing_enabled = false,
            AblationGroup::A3 => cfg.features.decision = false,
            AblationGroup::A4 => cfg.features.sales_pred = false,
            AblationGroup::A5 => cfg.features.clustering = false,
            AblationGroup::A6 => cfg.features.cross = false,
        }
    }
}

impl std::fmt::Display for AblationGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationColumn {
    pub group: String,
    pub day_rates: Vec<f64>,
    pub avg: f64,
    /// Baseline OTPTO average minus this group's average.
    pub diff_vs_baseline: f64,
    pub pm2_rmse: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationReport {
    pub baseline: PipelineReport,
    pub columns: Vec<AblationColumn>,
}

/// Re-runs the pipeline once per requested group with exactly that strategy
/// disabled, reporting OTPTO rates per day against the full baseline.
pub fn run_ablation(
    cfg: &PipelineConfig,
    groups: &[AblationGroup],
) -> Result<AblationReport, PipelineError> {
    let (baseline, _) = run_pipeline(cfg, None)?;
    let mut columns = Vec::new();
    for &group in groups {
        let mut gcfg = cfg.clone();
        group.apply(&mut gcfg);
        let (report, _) = run_pipeline(&gcfg, None)?;
        columns.push(AblationColumn {
            group: group.to_string(),
            day_rates: report.days.iter().map(|d| d.otpto_rate).collect(),
            avg: report.avg_otpto,
            diff_vs_baseline: baseline.avg_otpto - report.avg_otpto,
            pm2_rmse: report.pm2_rmse,
        });
    }
    Ok(AblationReport { baseline, columns })
}

pub fn render_ablation_csv(report: &AblationReport) -> String {
    let mut out = String::from("date,otpto");
    for c in &report.columns {
        out.push_str(&format!(",{}", c.group.to_lowercase()));
    }
    out.push('\n');
    for (i, d) in report.baseline.days.iter().enumerate() {
        out.push_str(&format!("{},{:.6}", d.date.format("%Y-%m-%d"), d.otpto_rate));
        for c in &report.columns {
            out.push_str(&format!(",{:.6}", c.day_rates[i]));
        }
        out.push('\n');
    }
    out.push_str(&format!("average,{:.6}", report.baseline.avg_otpto));
    for c in &report.columns {
        out.push_str(&format!(",{:.6}", c.avg));
    }
    out.push('\n');
    out.push_str("diff,0.000000");
    for c in &report.columns {
        out.push_str(&format!(",{:.6}", c.diff_vs_baseline));
    }
    out.push('\n');
    out
}

pub fn render_ablation_markdown(report: &AblationReport) -> String {
    let mut out = String::from("| Date | OTPTO |");
    for c in &report.columns {
        out.push_str(&format!(" {} |", c.group));
    }
    out.push_str("\n| --- | --- |");
    for _ in &report.columns {
        out.push_str(" --- |");
    }
    out.push('\n');
    for (i, d) in report.baseline.days.iter().enumerate() {
        out.push_str(&format!(
            "| {} | {} |",
            d.date.format("%Y-%m-%d"),
            pct(d.otpto_rate)
        ));
        for c in &report.columns {
            out.push_str(&format!(" {} |", pct(c.day_rates[i])));
        }
        out.push('\n');
    }
    out.push_str(&format!("| Average | {} |", pct(report.baseline.avg_otpto)));
    for c in &report.columns {
        out.push_str(&format!(" {} |", pct(c.avg)));
    }
    out.push('\n');
    out.push_str("| Diff | — |");
    for c in &report.columns {
        out.push_str(&format!(" {} |", pct(c.diff_vs_baseline)));
    }
    out.push('\n');
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub profile: usize,
    pub seed: u64,
    pub otpto_gap: f64,
    pub pto_gap: f64,
    pub avg_otpto: f64,
    pub avg_pto: f64,
    pub avg_opt: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub rows: Vec<RobustnessRow>,
}

/// Emulates a multi-warehouse sweep with one synthetic profile per seed,
/// reporting each profile's mean relative gap to OPT.
pub fn run_robustness(
    cfg: &PipelineConfig,
    profiles: usize,
) -> Result<RobustnessReport, PipelineError> {
    let mut rows = Vec::new();
    for profile in 0..profiles {
        let seed = cfg
            .seeds
            .get(profile)
            .copied()
            .unwrap_or(profile as u64 + 1);
        let mut pcfg = cfg.clone();
        if let DatasetSource::Generate(params) = &mut pcfg.dataset {
            params.seed = seed;
        }
        let (report, _) = run_pipeline(&pcfg, None)?;
        rows.push(RobustnessRow {
            profile,
            seed,
            otpto_gap: report.gap_to_opt(AlgoType::Otpto),
            pto_gap: report.gap_to_opt(AlgoType::Pto),
            avg_otpto: report.avg_otpto,
            avg_pto: report.avg_pto,
            avg_opt: report.avg_opt,
        });
    }
    Ok(RobustnessReport { rows })
}

pub fn render_robustness_csv(report: &RobustnessReport) -> String {
    let mut out = String::from("profile,seed,otpto_gap,pto_gap,avg_otpto,avg_pto,avg_opt\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.profile, r.seed, r.otpto_gap, r.pto_gap, r.avg_otpto, r.avg_pto, r.avg_opt
        ));
    }
    out
}

pub fn render_robustness_markdown(report: &RobustnessReport) -> String {
    let mut out = String::from("| Profile | Seed | OTPTO gap | PTO gap | OTPTO | PTO | OPT |\n");
    out.push_str("| --- | --- | --- | --- | --- | --- | --- |\n");
    for r in &report.rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} |\n",
            r.profile,
            r.seed,
            pct(r.otpto_gap),
            pct(r.pto_gap),
            pct(r.avg_otpto),
            pct(r.avg_pto),
            pct(r.avg_opt)
        ));
    }
    out
}

/// Loads a PipelineConfig from JSON, falling back to the synthetic default.
pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match path {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => PipelineConfig::default_synthetic(42),
    };
    if let Some(seed) = seed {
        if let DatasetSource::Generate(params) = &mut cfg.dataset {
            params.seed = seed;
        }
        cfg.features.seed = seed;
        cfg.pm1.seed = seed;
        cfg.pm2.seed = seed;
    }
    Ok(cfg)
}

/// Groups prediction rows per day and builds plans for one algorithm.
pub fn plans_from_predictions(
    predictions: &PredictionBundle,
    cfg: &PipelineConfig,
    algo: AlgoType,
) -> Vec<StockPlan> {
    let mut by_day: BTreeMap<NaiveDate, Vec<&crate::predict::PredRow>> = BTreeMap::new();
    for row in &predictions.rows {
        by_day.entry(row.day).or_default().push(row);
    }
    by_day
        .into_iter()
        .map(|(day, rows)| {
            let pp = PostprocessConfig {
                algo_type: algo,
                warehouse: cfg.warehouse.clone(),
                pto_literal_sort: cfg.pto_literal_sort,
            };
            postprocess_plan(day, &rows, &pp).0
        })
        .collect()
}
