//! Historical-optimal labels from the exact solver (GMV-augmented objective)
//! plus cross-sectional and time-series label smoothing.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{format_quantity, CoreError, IndexedHistory, SkuId};
use crate::mlcore::{kmeans, min_max_normalize, MlError};
use crate::om1::{solve_exact, ObjectiveMode, SolveError, SolveStatus, SolverConfig};
use crate::core::WarehouseConfig;

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("label generation requires the rate_plus_gmv objective")]
    WrongObjective,
    #[error("solver failed on {date}: {source}")]
    Solve {
        date: NaiveDate,
        source: SolveError,
    },
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelRow {
    pub x_star: f64,
    pub y_star: bool,
    pub y_cs: bool,
    pub y_ts: bool,
    pub y_final: bool,
}

/// Per (day, SKU) historical-optimal labels plus smoothing results.
#[derive(Debug, Clone, Default)]
pub struct LabelSet {
    pub rows: BTreeMap<(NaiveDate, String), LabelRow>,
    /// Days where the solver hit a limit; their labels come from the
    /// incumbent.
    pub flagged_days: Vec<NaiveDate>,
}

impl LabelSet {
    pub fn get(&self, day: NaiveDate, sku: &str) -> Option<&LabelRow> {
        self.rows.get(&(day, sku.to_string()))
    }

    pub fn days(&self) -> Vec<NaiveDate> {
        let mut days: Vec<NaiveDate> = self.rows.keys().map(|(d, _)| *d).collect();
        days.dedup();
        days
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmoothingConfig {
    /// Daily cluster count for cross-sectional smoothing.
    pub lambda: usize,
    /// Cross-sectional promotion threshold (strict >).
    pub mu: f64,
    /// Time-series promotion threshold (strict >).
    pub gamma: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            lambda: 80,
            mu: 0.8,
            gamma: 0.8,
        }
    }
}

/// Solves every day in `days` (all history days when None) with the
/// GMV-augmented objective and records x*, y* for each SKU sold that day.
pub fn generate_optimal_labels(
    history: &IndexedHistory,
    config: &WarehouseConfig,
    solver: &SolverConfig,
    days: Option<&[NaiveDate]>,
) -> Result<LabelSet, LabelError> {
    if solver.objective_mode != ObjectiveMode::RatePlusGmv {
        return Err(LabelError::WrongObjective);
    }
    let all_days: Vec<NaiveDate> = match days {
        Some(ds) => ds.to_vec(),
        None => history.days().iter().map(|d| d.date).collect(),
    };
    let outcomes: Vec<Result<(NaiveDate, crate::om1::SolveOutcome), LabelError>> = all_days
        .par_iter()
        .map(|&date| {
            solve_exact(history, date, config, solver)
                .map(|o| (date, o))
                .map_err(|source| LabelError::Solve { date, source })
        })
        .collect();

    let mut set = LabelSet::default();
    for outcome in outcomes {
        let (date, out) = outcome?;
        if out.status == SolveStatus::IncumbentWithBound {
            set.flagged_days.push(date);
        }
        let day = history.day(date).expect("solved day exists");
        for &sku in day.sku_totals.keys() {
            let name = history.sku_name(sku).to_string();
            let x_star = out.plan.entries.get(&name).copied().unwrap_or(0.0);
            let y_star = x_star > 0.0;
            set.rows.insert(
                (date, name),
                LabelRow {
                    x_star,
                    y_star,
                    y_cs: y_star,
                    y_ts: y_star,
                    y_final: y_star,
                },
            );
        }
    }
    Ok(set)
}

/// The five per-(day, SKU) clustering features used by cross-sectional
/// smoothing: sale quantity, covering-order count, SKU GMV, mean total sale
/// quantity of covering orders, mean distinct-SKU count of covering orders.
pub fn smoothing_features(history: &IndexedHistory, date: NaiveDate) -> Vec<(SkuId, Vec<f64>)> {
    let day = match history.day(date) {
        Some(d) => d,
        None => return Vec::new(),
    };
    let mut per_sku: BTreeMap<SkuId, (f64, f64, f64, f64, f64)> = BTreeMap::new();
    for order in &day.orders {
        let order_qtty = order.total_quantity() as f64;
        let order_skus = order.sku_count() as f64;
        for line in &order.lines {
            let e = per_sku.entry(line.sku).or_insert((0.0, 0.0, 0.0, 0.0, 0.0));
            e.0 += line.quantity as f64;
            e.1 += 1.0;
            e.2 += line.quantity as f64 * line.unit_price_cents as f64 / 100.0;
            e.3 += order_qtty;
            e.4 += order_skus;
        }
    }
    per_sku
        .into_iter()
        .map(|(sku, (qtty, cnt, gmv, sum_oq, sum_os))| {
            (sku, vec![qtty, cnt, gmv, sum_oq / cnt, sum_os / cnt])
        })
        .collect()
}

/// Fills y_cs, y_ts and y_final. Smoothing only ever promotes labels to 1;
/// x_star is never altered.
pub fn smooth_labels(
    labels: &LabelSet,
    history: &IndexedHistory,
    cfg: &SmoothingConfig,
    seed: u64,
) -> Result<LabelSet, LabelError> {
    let mut out = labels.clone();

    // 3.1 cross-sectional smoothing, per day
    for (day_idx, day) in history.days().iter().enumerate() {
        let feats = smoothing_features(history, day.date);
        let keyed: Vec<(String, Vec<f64>)> = feats
            .into_iter()
            .map(|(sku, f)| (history.sku_name(sku).to_string(), f))
            .collect();
        let keyed: Vec<(String, Vec<f64>)> = keyed
            .into_iter()
            .filter(|(name, _)| labels.rows.contains_key(&(day.date, name.clone())))
            .collect();
        if keyed.is_empty() {
            continue;
        }
        let matrix: Vec<Vec<f64>> = keyed.iter().map(|(_, f)| f.clone()).collect();
        let normalized = min_max_normalize(&matrix)?;
        let k = cfg.lambda.max(1).min(normalized.len());
        let clustering = kmeans(&normalized, k, seed.wrapping_add(day_idx as u64), 100, 1e-9)?;

        let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &a) in clustering.assignments.iter().enumerate() {
            clusters.entry(a).or_default().push(i);
        }
        for members in clusters.values() {
            let ncs = members.len() as f64;
            let stocked = members
                .iter()
                .filter(|&&i| labels.rows[&(day.date, keyed[i].0.clone())].y_star)
                .count() as f64;
            let promote = stocked / ncs > cfg.mu;
            for &i in members {
                let key = (day.date, keyed[i].0.clone());
                let row = out.rows.get_mut(&key).unwrap();
                row.y_cs = if promote { true } else { row.y_star };
            }
        }
    }

    // 3.2 time-series smoothing, per SKU over its active days
    let mut per_sku_days: BTreeMap<String, Vec<NaiveDate>> = BTreeMap::new();
    for (day, sku) in labels.rows.keys() {
        per_sku_days.entry(sku.clone()).or_default().push(*day);
    }
    for (sku, days) in &per_sku_days {
        let nts = days.len() as f64;
        let stocked = days
            .iter()
            .filter(|&&d| labels.rows[&(d, sku.clone())].y_star)
            .count() as f64;
        let promote = stocked / nts > cfg.gamma;
        for &d in days {
            let row = out.rows.get_mut(&(d, sku.clone())).unwrap();
            row.y_ts = if promote { true } else { row.y_star };
        }
    }

    // 3.3 merge
    for row in out.rows.values_mut() {
        row.y_final = row.y_star || (row.y_cs && row.y_ts);
    }
    Ok(out)
}

/// Writes the labels CSV (`date,sku_id,x_star,y_star,y_cs,y_ts,y_final`).
pub fn write_labels_csv<P: AsRef<Path>>(path: P, labels: &LabelSet) -> Result<(), LabelError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["date", "sku_id", "x_star", "y_star", "y_cs", "y_ts", "y_final"])?;
    for ((day, sku), row) in &labels.rows {
        writer.write_record([
            day.format("%Y-%m-%d").to_string(),
            sku.clone(),
            format_quantity(row.x_star),
            (row.y_star as u8).to_string(),
            (row.y_cs as u8).to_string(),
            (row.y_ts as u8).to_string(),
            (row.y_final as u8).to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_labels_csv<P: AsRef<Path>>(path: P) -> Result<LabelSet, LabelError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut set = LabelSet::default();
    for record in reader.records() {
        let record = record?;
        let day = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            LabelError::Core(CoreError::Parse {
                row: 0,
                msg: format!("bad date {:?}: {e}", &record[0]),
            })
        })?;
        let parse_f = |s: &str| s.trim().parse::<f64>().unwrap_or(0.0);
        set.rows.insert(
            (day, record[1].to_string()),
            LabelRow {
                x_star: parse_f(&record[2]),
                y_star: &record[3] == "1",
                y_cs: &record[4] == "1",
                y_ts: &record[5] == "1",
                y_final: &record[6] == "1",
            },
        );
    }
    Ok(set)
}
