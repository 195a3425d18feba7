//! Feature matrix construction for PM1/PM2: decision-making, sales
//! prediction (PM0 baseline), clustering and SKU-order cross feature
//! families, plus always-on common sales features.
//!
//! Every aggregate for a row keyed (day, sku) is computed from days strictly
//! before the target day and never past the train-window end, so rows are
//! leakage-free and reproducible from a training-time snapshot.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{simulate_day, CoreError, IndexedHistory, SkuId, StockPlan};
use crate::labeling::LabelSet;
use crate::mlcore::{kmeans, min_max_normalize, nearest_centroid, MlError};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("empty train window: {start}..={end}")]
    EmptyTrainWindow { start: NaiveDate, end: NaiveDate },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Cluster count for the clustering feature family.
    pub rho: usize,
    pub decision: bool,
    pub sales_pred: bool,
    pub clustering: bool,
    pub cross: bool,
    /// Trailing window (days) for PM0 residual statistics.
    pub pm0_window: usize,
    pub seed: u64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            rho: 4,
            decision: true,
            sales_pred: true,
            clustering: true,
            cross: true,
            pm0_window: 28,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    pub family: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub day: NaiveDate,
    pub sku: String,
    /// Last day of data this row was allowed to see.
    pub cutoff: NaiveDate,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<ColumnDef>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Pm0Value {
    pub q_hat: f64,
    pub residual_mean: f64,
    pub residual_std: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Pm0Output {
    pub values: BTreeMap<(NaiveDate, String), Pm0Value>,
}

impl Pm0Output {
    pub fn get(&self, day: NaiveDate, sku: &str) -> Pm0Value {
        self.values
            .get(&(day, sku.to_string()))
            .copied()
            .unwrap_or_default()
    }
}

/// Seasonal-naive plus EWMA baseline forecaster standing in for a production
/// sales model. All lookups respect a data cutoff.
pub struct Pm0Forecaster<'a> {
    history: &'a IndexedHistory,
    /// Per SKU: date -> units sold.
    sales: Vec<BTreeMap<NaiveDate, f64>>,
    start: Option<NaiveDate>,
}

impl<'a> Pm0Forecaster<'a> {
    pub fn new(history: &'a IndexedHistory) -> Self {
        let mut sales: Vec<BTreeMap<NaiveDate, f64>> = vec![BTreeMap::new(); history.num_skus()];
        for day in history.days() {
            for (&sku, &qty) in &day.sku_totals {
                sales[sku as usize].insert(day.date, qty as f64);
            }
        }
        Pm0Forecaster {
            history,
            sales,
            start: history.first_date(),
        }
    }

    fn sale(&self, sku: SkuId, date: NaiveDate) -> f64 {
        self.sales[sku as usize].get(&date).copied().unwrap_or(0.0)
    }

    fn global_mean(&self, sku: SkuId, end: NaiveDate) -> f64 {
        let start = match self.start {
            Some(s) if s <= end => s,
            _ => return 0.0,
        };
        let days = (end - start).num_days() + 1;
        let total: f64 = self.sales[sku as usize].range(start..=end).map(|(_, v)| v).sum();
        total / days as f64
    }

    /// Forecast for `target` using sales data up to `cutoff` only.
    pub fn q_hat(&self, sku: SkuId, target: NaiveDate, cutoff: NaiveDate) -> f64 {
        let start = match self.start {
            Some(s) => s,
            None => return 0.0,
        };
        let end = cutoff.min(target - Duration::days(1));
        if end < start {
            return 0.0;
        }
        if (end - start).num_days() + 1 < 7 {
            return self.global_mean(sku, end);
        }

        // same-weekday mean over the trailing 4 weeks
        let mut wk_sum = 0.0;
        let mut wk_n = 0;
        for back in 1..=4 {
            let d = target - Duration::days(7 * back);
            if d >= start && d <= end {
                wk_sum += self.sale(sku, d);
                wk_n += 1;
            }
        }

        // 7-day EWMA with a 3-day half-life
        let mut ew_sum = 0.0;
        let mut ew_w = 0.0;
        for lag in 1..=7i64 {
            let d = target - Duration::days(lag);
            if d >= start && d <= end {
                let w = 0.5f64.powf((lag - 1) as f64 / 3.0);
                ew_sum += w * self.sale(sku, d);
                ew_w += w;
            }
        }

        match (wk_n > 0, ew_w > 0.0) {
            (true, true) => 0.5 * wk_sum / wk_n as f64 + 0.5 * ew_sum / ew_w,
            (true, false) => wk_sum / wk_n as f64,
            (false, true) => ew_sum / ew_w,
            (false, false) => self.global_mean(sku, end),
        }
    }

    /// Mean and standard deviation of one-step-ahead backtest residuals over
    /// the trailing `window` days ending at `cutoff`.
    pub fn residual_stats(&self, sku: SkuId, cutoff: NaiveDate, window: usize) -> (f64, f64) {
        let start = match self.start {
            Some(s) => s,
            None => return (0.0, 0.0),
        };
        // one-step-ahead forecasts need at least one prior day
        let lo = (cutoff - Duration::days(window as i64 - 1)).max(start + Duration::days(1));
        if lo > cutoff {
            return (0.0, 0.0);
        }
        let mut residuals = Vec::new();
        let mut d = lo;
        while d <= cutoff {
            residuals.push(self.sale(sku, d) - self.q_hat(sku, d, d - Duration::days(1)));
            d += Duration::days(1);
        }
        let n = residuals.len() as f64;
        let mean = residuals.iter().sum::<f64>() / n;
        let var = residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    pub fn value(&self, sku: SkuId, target: NaiveDate, cutoff: NaiveDate, window: usize) -> Pm0Value {
        let end = cutoff.min(target - Duration::days(1));
        let (residual_mean, residual_std) = self.residual_stats(sku, end, window);
        Pm0Value {
            q_hat: self.q_hat(sku, target, cutoff),
            residual_mean,
            residual_std,
        }
    }

    pub fn history(&self) -> &IndexedHistory {
        self.history
    }
}

/// PM0 forecasts and residual statistics for every known SKU on each target
/// day, using all data strictly before the target day (capped at `cutoff`
/// when given).
pub fn pm0_forecast(
    history: &IndexedHistory,
    target_days: &[NaiveDate],
    window: usize,
    cutoff: Option<NaiveDate>,
) -> Pm0Output {
    let fc = Pm0Forecaster::new(history);
    let mut out = Pm0Output::default();
    for &day in target_days {
        let cut = cutoff.unwrap_or(day - Duration::days(1));
        for sku in 0..history.num_skus() as SkuId {
            out.values.insert(
                (day, history.sku_name(sku).to_string()),
                fc.value(sku, day, cut, window),
            );
        }
    }
    out
}

/// Per-(day, SKU) accumulators the feature builder aggregates over.
#[derive(Debug, Clone, Copy, Default)]
struct DayStat {
    sale_qtty: f64,
    price_sum: f64,
    line_cnt: f64,
    /// Number of orders covering the SKU.
    order_cnt: f64,
    /// Sum over covering orders of the order's total quantity.
    sum_order_qtty: f64,
    /// Sum over covering orders of the order's distinct-SKU count.
    sum_order_skus: f64,
    /// Sum over covering orders of the order's GMV (currency units).
    sum_order_gmv: f64,
    has_label: bool,
    x_star: f64,
    y_star: bool,
    /// Orders fulfilled under the day's optimal plan that cover the SKU.
    fulfilled_cnt: f64,
    fulfilled_gmv: f64,
}

struct SkuSeries {
    /// Chronological (date, stats) for days the SKU was sold.
    days: Vec<(NaiveDate, DayStat)>,
}

struct ClusterFit {
    /// SKU id -> cluster assignment from the fit.
    assignments: HashMap<SkuId, usize>,
    centroids: Vec<Vec<f64>>,
    mins: Vec<f64>,
    ranges: Vec<f64>,
}

impl ClusterFit {
    fn assign(&self, sku: SkuId) -> usize {
        if let Some(&a) = self.assignments.get(&sku) {
            return a;
        }
        if self.centroids.is_empty() {
            return 0;
        }
        // unseen SKU: zero stocking proportion, zero average inventory
        let point: Vec<f64> = self
            .mins
            .iter()
            .zip(&self.ranges)
            .map(|(&m, &r)| if r > 0.0 { (0.0 - m) / r } else { 0.0 })
            .collect();
        nearest_centroid(&point, &self.centroids)
    }
}

/// Everything precomputed once per (history, labels) pair.
struct Builder<'a> {
    cfg: &'a FeatureConfig,
    series: Vec<SkuSeries>,
    pm0: Pm0Forecaster<'a>,
    cluster_fits: HashMap<NaiveDate, ClusterFit>,
    train_start: NaiveDate,
}

impl<'a> Builder<'a> {
    fn new(
        history: &'a IndexedHistory,
        labels: &LabelSet,
        cfg: &'a FeatureConfig,
        train_start: NaiveDate,
    ) -> Result<Self, FeatureError> {
        let mut series: Vec<SkuSeries> = (0..history.num_skus())
            .map(|_| SkuSeries { days: Vec::new() })
            .collect();
        for day in history.days() {
            let mut stats: BTreeMap<SkuId, DayStat> = BTreeMap::new();
            for order in &day.orders {
                let oq = order.total_quantity() as f64;
                let os = order.sku_count() as f64;
                let og = order.gmv_cents as f64 / 100.0;
                for line in &order.lines {
                    let s = stats.entry(line.sku).or_default();
                    s.sale_qtty += line.quantity as f64;
                    s.price_sum += line.unit_price_cents as f64 / 100.0;
                    s.line_cnt += 1.0;
                    s.order_cnt += 1.0;
                    s.sum_order_qtty += oq;
                    s.sum_order_skus += os;
                    s.sum_order_gmv += og;
                }
            }
            // labels and the optimal plan they imply
            let mut plan = StockPlan::empty(day.date);
            let mut labeled = false;
            for (&sku, stat) in stats.iter_mut() {
                if let Some(l) = labels.get(day.date, history.sku_name(sku)) {
                    labeled = true;
                    stat.has_label = true;
                    stat.x_star = l.x_star;
                    stat.y_star = l.y_star;
                    if l.x_star > 0.0 {
                        plan.entries
                            .insert(history.sku_name(sku).to_string(), l.x_star);
                    }
                }
            }
            if labeled {
                let report = simulate_day(history, day, &plan)?;
                for (order, outcome) in day.orders.iter().zip(&report.outcomes) {
                    if !outcome.fulfilled {
                        continue;
                    }
                    for line in &order.lines {
                        let s = stats.get_mut(&line.sku).unwrap();
                        s.fulfilled_cnt += 1.0;
                        s.fulfilled_gmv += order.gmv_cents as f64 / 100.0;
                    }
                }
            }
            for (sku, stat) in stats {
                series[sku as usize].days.push((day.date, stat));
            }
        }
        Ok(Builder {
            cfg,
            series,
            pm0: Pm0Forecaster::new(history),
            cluster_fits: HashMap::new(),
            train_start,
        })
    }

    /// K-Means over [stocking-day proportion, average daily optimal
    /// inventory] for every SKU with labeled days in [train_start, cutoff].
    fn cluster_fit(&mut self, cutoff: NaiveDate) -> Result<&ClusterFit, FeatureError> {
        if !self.cluster_fits.contains_key(&cutoff) {
            let mut skus = Vec::new();
            let mut attrs = Vec::new();
            for (sku, series) in self.series.iter().enumerate() {
                let mut active = 0.0;
                let mut stocked = 0.0;
                let mut x_sum = 0.0;
                for &(d, s) in &series.days {
                    if d < self.train_start || d > cutoff || !s.has_label {
                        continue;
                    }
                    active += 1.0;
                    stocked += s.y_star as u8 as f64;
                    x_sum += s.x_star;
                }
                if active > 0.0 {
                    skus.push(sku as SkuId);
                    attrs.push(vec![stocked / active, x_sum / active]);
                }
            }
            let fit = if attrs.is_empty() {
                ClusterFit {
                    assignments: HashMap::new(),
                    centroids: Vec::new(),
                    mins: vec![0.0; 2],
                    ranges: vec![0.0; 2],
                }
            } else {
                let mut mins = vec![f64::INFINITY; 2];
                let mut maxs = vec![f64::NEG_INFINITY; 2];
                for a in &attrs {
                    for c in 0..2 {
                        mins[c] = mins[c].min(a[c]);
                        maxs[c] = maxs[c].max(a[c]);
                    }
                }
                let normalized = min_max_normalize(&attrs)?;
                let k = self.cfg.rho.max(1).min(normalized.len());
                let result = kmeans(&normalized, k, self.cfg.seed, 100, 1e-9)?;
                ClusterFit {
                    assignments: skus
                        .iter()
                        .copied()
                        .zip(result.assignments.iter().copied())
                        .collect(),
                    centroids: result.centroids,
                    mins: mins.clone(),
                    ranges: mins.iter().zip(&maxs).map(|(&m, &x)| x - m).collect(),
                }
            };
            self.cluster_fits.insert(cutoff, fit);
        }
        Ok(&self.cluster_fits[&cutoff])
    }

    fn row_values(&mut self, day: NaiveDate, sku: SkuId, cutoff: NaiveDate) -> Result<Vec<f64>, FeatureError> {
        let mut v = Vec::new();
        let start = self.train_start;
        let series = &self.series[sku as usize];

        // common: trailing sales windows, price, activity, day of week
        for window in [7i64, 28] {
            let lo = (cutoff - Duration::days(window - 1)).max(start);
            let mut days = 0.0;
            let mut sum = 0.0;
            let mut sq = 0.0;
            if lo <= cutoff {
                days = (cutoff - lo).num_days() as f64 + 1.0;
                for &(d, s) in &series.days {
                    if d >= lo && d <= cutoff {
                        sum += s.sale_qtty;
                        sq += s.sale_qtty * s.sale_qtty;
                    }
                }
            }
            if days > 0.0 {
                let mean = sum / days;
                v.push(mean);
                v.push((sq / days - mean * mean).max(0.0).sqrt());
            } else {
                v.push(0.0);
                v.push(0.0);
            }
        }
        let usable = |d: NaiveDate| d >= start && d <= cutoff;
        let mut price_sum = 0.0;
        let mut line_cnt = 0.0;
        let mut active_days = 0.0;
        for &(d, s) in &series.days {
            if usable(d) {
                price_sum += s.price_sum;
                line_cnt += s.line_cnt;
                active_days += 1.0;
            }
        }
        v.push(if line_cnt > 0.0 { price_sum / line_cnt } else { 0.0 });
        v.push(active_days);
        let dow = day.weekday().num_days_from_monday();
        for i in 0..7 {
            v.push(if i == dow { 1.0 } else { 0.0 });
        }

        if self.cfg.decision {
            let mut active = 0.0;
            let mut stocked = 0.0;
            let mut x_sum = 0.0;
            let mut x_max = 0.0f64;
            let mut f_cnt = 0.0;
            let mut f_gmv = 0.0;
            for &(d, s) in &series.days {
                if !usable(d) || !s.has_label {
                    continue;
                }
                active += 1.0;
                x_sum += s.x_star;
                x_max = x_max.max(s.x_star);
                if s.y_star {
                    stocked += 1.0;
                    f_cnt += s.fulfilled_cnt;
                    f_gmv += s.fulfilled_gmv;
                }
            }
            v.push(if active > 0.0 { x_sum / active } else { 0.0 });
            v.push(x_max);
            v.push(stocked);
            v.push(if active > 0.0 { stocked / active } else { 0.0 });
            v.push(if stocked > 0.0 { f_cnt / stocked } else { 0.0 });
            v.push(if stocked > 0.0 { f_gmv / stocked } else { 0.0 });
        }

        if self.cfg.sales_pred {
            let p = self.pm0.value(sku, day, cutoff, self.cfg.pm0_window);
            v.push(p.q_hat);
            v.push(p.residual_mean);
            v.push(p.residual_std);
        }

        if self.cfg.clustering {
            let rho = self.cfg.rho;
            let assigned = {
                let fit = self.cluster_fit(cutoff)?;
                fit.assign(sku)
            };
            for i in 0..rho {
                v.push(if i == assigned { 1.0 } else { 0.0 });
            }
        }

        if self.cfg.cross {
            let series = &self.series[sku as usize];
            let mut cnt = 0.0;
            let mut oq = 0.0;
            let mut os = 0.0;
            let mut og = 0.0;
            for &(d, s) in &series.days {
                if usable(d) {
                    cnt += s.order_cnt;
                    oq += s.sum_order_qtty;
                    os += s.sum_order_skus;
                    og += s.sum_order_gmv;
                }
            }
            if cnt > 0.0 {
                v.push(oq / cnt);
                v.push(os / cnt);
                v.push(og / cnt);
            } else {
                v.extend([0.0, 0.0, 0.0]);
            }
            v.push(cnt);
        }

        Ok(v)
    }
}

fn schema(cfg: &FeatureConfig) -> Vec<ColumnDef> {
    let mut cols = Vec::new();
    let mut push = |name: &str, family: &str| {
        cols.push(ColumnDef {
            name: name.to_string(),
            family: family.to_string(),
        })
    };
    for w in [7, 28] {
        push(&format!("sales_mean_{w}d"), "common");
        push(&format!("sales_std_{w}d"), "common");
    }
    push("price_mean", "common");
    push("active_days", "common");
    for i in 0..7 {
        push(&format!("dow_{i}"), "common");
    }
    if cfg.decision {
        for name in [
            "x_star_mean",
            "x_star_max",
            "stocked_days",
            "stocked_prop",
            "fulfilled_orders_mean",
            "fulfilled_gmv_mean",
        ] {
            push(name, "decision");
        }
    }
    if cfg.sales_pred {
        for name in ["q_hat", "resid_mean", "resid_std"] {
            push(name, "sales_pred");
        }
    }
    if cfg.clustering {
        for i in 0..cfg.rho {
            push(&format!("cluster_{i}"), "clustering");
        }
    }
    if cfg.cross {
        for name in [
            "cov_order_qtty_mean",
            "cov_order_sku_mean",
            "cov_order_gmv_mean",
            "cov_order_cnt",
        ] {
            push(name, "cross");
        }
    }
    cols
}

/// Builds feature rows for `target_days`.
///
/// Target days inside the train window get one row per SKU sold (and hence
/// labeled) that day, with a data cutoff of the previous day. Target days
/// after `train_end` get one row per SKU active anywhere in the train window,
/// with a data cutoff of `train_end` (the training-time snapshot).
pub fn build_feature_matrix(
    history: &IndexedHistory,
    labels: &LabelSet,
    cfg: &FeatureConfig,
    train_start: NaiveDate,
    train_end: NaiveDate,
    target_days: &[NaiveDate],
) -> Result<FeatureMatrix, FeatureError> {
    if train_end < train_start {
        return Err(FeatureError::EmptyTrainWindow {
            start: train_start,
            end: train_end,
        });
    }
    let mut builder = Builder::new(history, labels, cfg, train_start)?;
    let mut rows = Vec::new();
    for &day in target_days {
        let cutoff = (day - Duration::days(1)).min(train_end);
        let skus: Vec<SkuId> = if day <= train_end {
            history
                .day(day)
                .map(|d| d.sku_totals.keys().copied().collect())
                .unwrap_or_default()
        } else {
            let mut in_window: Vec<SkuId> = (0..history.num_skus() as SkuId)
                .filter(|&s| {
                    builder.series[s as usize]
                        .days
                        .iter()
                        .any(|&(d, _)| d >= train_start && d <= train_end)
                })
                .collect();
            in_window.sort_unstable();
            in_window
        };
        for sku in skus {
            let values = builder.row_values(day, sku, cutoff)?;
            rows.push(FeatureRow {
                day,
                sku: history.sku_name(sku).to_string(),
                cutoff,
                values,
            });
        }
    }
    Ok(FeatureMatrix {
        columns: schema(cfg),
        rows,
    })
}

#[derive(Serialize, Deserialize)]
struct SchemaManifest {
    version: u32,
    columns: Vec<ColumnDef>,
    notes: BTreeMap<String, String>,
}

pub fn write_schema_json<P: AsRef<Path>>(path: P, matrix: &FeatureMatrix) -> Result<(), FeatureError> {
    let mut notes = BTreeMap::new();
    notes.insert(
        "common".to_string(),
        "stand-in for catalog/promotion attributes unavailable in synthetic data".to_string(),
    );
    let manifest = SchemaManifest {
        version: 1,
        columns: matrix.columns.clone(),
        notes,
    };
    std::fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn write_features_csv<P: AsRef<Path>>(path: P, matrix: &FeatureMatrix) -> Result<(), FeatureError> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["date".to_string(), "sku_id".to_string(), "cutoff".to_string()];
    header.extend(matrix.columns.iter().map(|c| c.name.clone()));
    writer.write_record(&header)?;
    for row in &matrix.rows {
        let mut record = vec![
            row.day.format("%Y-%m-%d").to_string(),
            row.sku.clone(),
            row.cutoff.format("%Y-%m-%d").to_string(),
        ];
        record.extend(row.values.iter().map(|v| format!("{v}")));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::test_util::date;
    use crate::core::{validate_and_index, OrderLine};
    use crate::labeling::{LabelRow, LabelSet};

    fn daily_history(sales: &[(&str, &str, u32)]) -> IndexedHistory {
        // one single-line order per (day, sku)
        let lines: Vec<OrderLine> = sales
            .iter()
            .enumerate()
            .map(|(i, (d, sku, q))| OrderLine {
                day: date(d),
                order_id: format!("o{i}"),
                sku_id: sku.to_string(),
                quantity: *q,
                unit_price_cents: 250,
            })
            .collect();
        validate_and_index(&lines).unwrap()
    }

    fn label(
        set: &mut LabelSet,
        d: &str,
        sku: &str,
        x_star: f64,
    ) {
        let y = x_star > 0.0;
        set.rows.insert(
            (date(d), sku.to_string()),
            LabelRow {
                x_star,
                y_star: y,
                y_cs: y,
                y_ts: y,
                y_final: y,
            },
        );
    }

    #[test]
    fn pm0_constant_sales_forecast_exactly() {
        let sales: Vec<(String, u32)> = (1..=28)
            .map(|d| (format!("2023-06-{d:02}"), 5u32))
            .collect();
        let rows: Vec<(&str, &str, u32)> =
            sales.iter().map(|(d, q)| (d.as_str(), "A", *q)).collect();
        let h = daily_history(&rows);
        let out = pm0_forecast(&h, &[date("2023-06-29")], 14, None);
        let v = out.get(date("2023-06-29"), "A");
        assert!((v.q_hat - 5.0).abs() < 1e-9);
        assert!(v.residual_std.abs() < 1e-9);
    }

    #[test]
    fn pm0_weekly_pattern_tracks_mondays() {
        // 2023-06-05 is a Monday; 10 on Mondays, 2 otherwise, 5 weeks
        let mut rows = Vec::new();
        for i in 0..35 {
            let d = date("2023-06-05") + Duration::days(i);
            rows.push((d, if i % 7 == 0 { 10 } else { 2 }));
        }
        let strs: Vec<(String, u32)> = rows
            .iter()
            .map(|(d, q)| (d.format("%Y-%m-%d").to_string(), *q))
            .collect();
        let refs: Vec<(&str, &str, u32)> = strs.iter().map(|(d, q)| (d.as_str(), "A", *q)).collect();
        let h = daily_history(&refs);
        let monday = date("2023-06-05") + Duration::days(35);
        let out = pm0_forecast(&h, &[monday], 14, None);
        let q = out.get(monday, "A").q_hat;
        // exact: 0.5*10 + 0.5*EWMA(2,2,...,2,10 at lag 7)
        let mut ew_sum = 0.0;
        let mut ew_w = 0.0;
        for lag in 1..=7i64 {
            let w = 0.5f64.powf((lag - 1) as f64 / 3.0);
            ew_sum += w * if lag == 7 { 10.0 } else { 2.0 };
            ew_w += w;
        }
        let expect = 0.5 * 10.0 + 0.5 * ew_sum / ew_w;
        assert!((q - expect).abs() < 1e-9);
        assert!((q - 10.0).abs() <= 4.6);
    }

    #[test]
    fn pm0_unseen_sku_is_all_zero() {
        let h = daily_history(&[("2023-06-01", "A", 3)]);
        // "B" never appears; the output map simply has no entry for it
        let out = pm0_forecast(&h, &[date("2023-06-02")], 14, None);
        assert_eq!(out.get(date("2023-06-02"), "B"), Pm0Value::default());
    }

    #[test]
    fn pm0_short_history_falls_back_to_global_mean() {
        let h = daily_history(&[
            ("2023-06-01", "A", 4),
            ("2023-06-02", "A", 8),
        ]);
        let out = pm0_forecast(&h, &[date("2023-06-03")], 14, None);
        assert!((out.get(date("2023-06-03"), "A").q_hat - 6.0).abs() < 1e-9);
    }

    fn six_day_setup() -> (IndexedHistory, LabelSet) {
        let mut rows = Vec::new();
        for d in 1..=6 {
            rows.push((format!("2023-06-{d:02}"), d as u32));
        }
        let refs: Vec<(&str, &str, u32)> = rows.iter().map(|(d, q)| (d.as_str(), "A", *q)).collect();
        let h = daily_history(&refs);
        let mut labels = LabelSet::default();
        for d in 1..=6 {
            // stocked on even days only
            let x = if d % 2 == 0 { d as f64 } else { 0.0 };
            label(&mut labels, &format!("2023-06-{d:02}"), "A", x);
        }
        (h, labels)
    }

    #[test]
    fn stocked_proportion_counts_half() {
        let (h, labels) = six_day_setup();
        let m = build_feature_matrix(
            &h,
            &labels,
            &FeatureConfig::default(),
            date("2023-06-01"),
            date("2023-06-06"),
            &[date("2023-06-07")],
        )
        .unwrap();
        let col = m
            .column_names()
            .iter()
            .position(|&c| c == "stocked_prop")
            .unwrap();
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.rows[0].values[col], 0.5);
        let stocked = m.column_names().iter().position(|&c| c == "stocked_days").unwrap();
        assert_eq!(m.rows[0].values[stocked], 3.0);
    }

    #[test]
    fn disabled_families_leave_only_common_columns() {
        let cfg = FeatureConfig {
            decision: false,
            sales_pred: false,
            clustering: false,
            cross: false,
            ..FeatureConfig::default()
        };
        let (h, labels) = six_day_setup();
        let m = build_feature_matrix(
            &h,
            &labels,
            &cfg,
            date("2023-06-01"),
            date("2023-06-06"),
            &[date("2023-06-07")],
        )
        .unwrap();
        assert!(m.columns.iter().all(|c| c.family == "common"));
    }

    #[test]
    fn clustering_one_hot_has_rho_columns_summing_to_one() {
        let (h, labels) = six_day_setup();
        let m = build_feature_matrix(
            &h,
            &labels,
            &FeatureConfig::default(),
            date("2023-06-01"),
            date("2023-06-06"),
            &[date("2023-06-04"), date("2023-06-07")],
        )
        .unwrap();
        let cluster_cols: Vec<usize> = m
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.family == "clustering")
            .map(|(i, _)| i)
            .collect();
        assert_eq!(cluster_cols.len(), 4);
        for row in &m.rows {
            let s: f64 = cluster_cols.iter().map(|&i| row.values[i]).sum();
            assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn rows_are_leakage_free() {
        // recomputing a mid-window row after truncating the data at its
        // target day yields identical values
        let (h, labels) = six_day_setup();
        let cfg = FeatureConfig::default();
        let full = build_feature_matrix(
            &h,
            &labels,
            &cfg,
            date("2023-06-01"),
            date("2023-06-06"),
            &[date("2023-06-04")],
        )
        .unwrap();

        // truncated world: drop all data and labels from 06-04 onward
        let mut rows = Vec::new();
        for d in 1..=3 {
            rows.push((format!("2023-06-{d:02}"), d as u32));
        }
        let refs: Vec<(&str, &str, u32)> = rows.iter().map(|(d, q)| (d.as_str(), "A", *q)).collect();
        let h2 = daily_history(&refs);
        let mut labels2 = LabelSet::default();
        for d in 1..=3 {
            let x = if d % 2 == 0 { d as f64 } else { 0.0 };
            label(&mut labels2, &format!("2023-06-{d:02}"), "A", x);
        }
        let truncated = build_feature_matrix(
            &h2,
            &labels2,
            &cfg,
            date("2023-06-01"),
            date("2023-06-03"),
            &[date("2023-06-04")],
        )
        .unwrap();
        assert_eq!(full.rows[0].values, truncated.rows[0].values);
    }

    #[test]
    fn schema_is_deterministic_and_csv_round_trips_bytes() {
        let (h, labels) = six_day_setup();
        let cfg = FeatureConfig::default();
        let build = || {
            build_feature_matrix(
                &h,
                &labels,
                &cfg,
                date("2023-06-01"),
                date("2023-06-06"),
                &[date("2023-06-05"), date("2023-06-07")],
            )
            .unwrap()
        };
        let a = build();
        let b = build();
        assert_eq!(a, b);
        let dir = tempfile::tempdir().unwrap();
        let pa = dir.path().join("a.csv");
        let pb = dir.path().join("b.csv");
        write_features_csv(&pa, &a).unwrap();
        write_features_csv(&pb, &b).unwrap();
        assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
    }

    #[test]
    fn single_line_order_sku_has_unit_cross_feature() {
        // "B" appears only in single-line orders; "A" shares orders with "C"
        let mut lines = Vec::new();
        for d in 1..=5 {
            let day = date(&format!("2023-06-{d:02}"));
            lines.push(OrderLine {
                day,
                order_id: format!("solo{d}"),
                sku_id: "B".into(),
                quantity: 2,
                unit_price_cents: 100,
            });
            for sku in ["A", "C"] {
                lines.push(OrderLine {
                    day,
                    order_id: format!("duo{d}"),
                    sku_id: sku.into(),
                    quantity: 1,
                    unit_price_cents: 100,
                });
            }
        }
        let h = validate_and_index(&lines).unwrap();
        let mut labels = LabelSet::default();
        for d in 1..=5 {
            for sku in ["A", "B", "C"] {
                label(&mut labels, &format!("2023-06-{d:02}"), sku, 2.0);
            }
        }
        let m = build_feature_matrix(
            &h,
            &labels,
            &FeatureConfig::default(),
            date("2023-06-01"),
            date("2023-06-05"),
            &[date("2023-06-06")],
        )
        .unwrap();
        let col = m
            .column_names()
            .iter()
            .position(|&c| c == "cov_order_sku_mean")
            .unwrap();
        let row_b = m.rows.iter().find(|r| r.sku == "B").unwrap();
        assert_eq!(row_b.values[col], 1.0);
        let row_a = m.rows.iter().find(|r| r.sku == "A").unwrap();
        assert_eq!(row_a.values[col], 2.0);
    }

    #[test]
    fn test_rows_cover_all_train_window_skus() {
        let (h, labels) = six_day_setup();
        // add a second SKU active only on day 2
        let mut lines = Vec::new();
        for d in 1..=6 {
            lines.push(OrderLine {
                day: date(&format!("2023-06-{d:02}")),
                order_id: format!("o{d}"),
                sku_id: "A".into(),
                quantity: d as u32,
                unit_price_cents: 250,
            });
        }
        lines.push(OrderLine {
            day: date("2023-06-02"),
            order_id: "z".into(),
            sku_id: "Z".into(),
            quantity: 1,
            unit_price_cents: 100,
        });
        let h2 = validate_and_index(&lines).unwrap();
        let _ = h;
        let m = build_feature_matrix(
            &h2,
            &labels,
            &FeatureConfig::default(),
            date("2023-06-01"),
            date("2023-06-06"),
            &[date("2023-06-08")],
        )
        .unwrap();
        let skus: Vec<&str> = m.rows.iter().map(|r| r.sku.as_str()).collect();
        assert_eq!(skus, vec!["A", "Z"]);
        // snapshot cutoff is the train-window end for post-window days
        assert!(m.rows.iter().all(|r| r.cutoff == date("2023-06-06")));
    }
}
