//! Domain types, dataset validation/indexing, and the order-replay
//! fulfillment simulator shared by every other module.
//!
//! The evaluation semantics live here: an order line for SKU `i` is supplied
//! when the stocked quantity is at least the cumulative demand of `i` up to
//! and including that order, and an order is fully fulfilled when every one
//! of its lines is supplied.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Interned SKU identifier, an index into [`IndexedHistory::sku_names`].
pub type SkuId = u32;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}: {msg}")]
    Parse { row: usize, msg: String },
    #[error("row {row}: duplicate line for (day {day}, order {order_id}, sku {sku_id})")]
    DuplicateLine {
        row: usize,
        day: NaiveDate,
        order_id: String,
        sku_id: String,
    },
    #[error("row {row}: quantity must be >= 1")]
    NonPositiveQuantity { row: usize },
    #[error("row {row}: unit_price must be >= 0")]
    NegativePrice { row: usize },
    #[error("no orders on day {0}; fulfillment rate is undefined")]
    EmptyDay(NaiveDate),
    #[error("no day {0} in the indexed history")]
    UnknownDay(NaiveDate),
    #[error("plan is for day {plan} but orders are for day {orders}")]
    PlanDayMismatch { plan: NaiveDate, orders: NaiveDate },
    #[error("cannot average an empty list of reports")]
    EmptyReports,
    #[error("plan violates {0}")]
    InfeasiblePlan(String),
}

/// One raw order line as read from the orders CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderLine {
    pub day: NaiveDate,
    pub order_id: String,
    pub sku_id: String,
    pub quantity: u32,
    /// Unit price in hundredths of a currency unit.
    pub unit_price_cents: i64,
}

/// One line of an indexed order.
#[derive(Debug, Clone)]
pub struct Line {
    pub sku: SkuId,
    pub quantity: u32,
    pub unit_price_cents: i64,
    /// Cumulative quantity of this SKU over orders 1..=o of the day (c_{oi}).
    pub cumulative: u32,
}

/// An order after indexing: distinct SKU lines plus derived statistics.
#[derive(Debug, Clone)]
pub struct Order {
    pub id: String,
    pub lines: Vec<Line>,
    /// Sum of quantity * unit_price over the order's lines, in cents.
    pub gmv_cents: i64,
}

impl Order {
    /// Number of distinct SKUs in the order (s_o).
    pub fn sku_count(&self) -> usize {
        self.lines.len()
    }

    /// Total sale units across the order's lines.
    pub fn total_quantity(&self) -> u32 {
        self.lines.iter().map(|l| l.quantity).sum()
    }
}

/// All orders of one day, sorted by arrival, plus per-SKU daily totals.
#[derive(Debug, Clone)]
pub struct DayData {
    pub date: NaiveDate,
    pub orders: Vec<Order>,
    /// Total daily sales per SKU (d_i), only SKUs sold this day.
    pub sku_totals: BTreeMap<SkuId, u32>,
}

impl DayData {
    pub fn order_count(&self) -> usize {
        self.orders.len()
    }

    /// Total GMV of the day in cents.
    pub fn total_gmv_cents(&self) -> i64 {
        self.orders.iter().map(|o| o.gmv_cents).sum()
    }
}

/// The validated, indexed order history.
#[derive(Debug, Clone)]
pub struct IndexedHistory {
    days: Vec<DayData>,
    sku_names: Vec<String>,
    sku_index: HashMap<String, SkuId>,
}

impl IndexedHistory {
    pub fn days(&self) -> &[DayData] {
        &self.days
    }

    pub fn day(&self, date: NaiveDate) -> Option<&DayData> {
        self.days
            .binary_search_by_key(&date, |d| d.date)
            .ok()
            .map(|i| &self.days[i])
    }

    pub fn sku_name(&self, sku: SkuId) -> &str {
        &self.sku_names[sku as usize]
    }

    pub fn sku_names(&self) -> &[String] {
        &self.sku_names
    }

    pub fn sku_id(&self, name: &str) -> Option<SkuId> {
        self.sku_index.get(name).copied()
    }

    pub fn num_skus(&self) -> usize {
        self.sku_names.len()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.days.first().map(|d| d.date)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.days.last().map(|d| d.date)
    }
}

/// Capacity constraints of one warehouse and the evaluation horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarehouseConfig {
    /// Maximum number of distinct SKU types stocked per day.
    pub k_max_skus: u32,
    /// Maximum total units stocked per day.
    pub n_max_units: u32,
    /// Minimum units for every stocked SKU.
    pub b_min_units: u32,
    /// Evaluation horizon in days.
    pub horizon_days: u32,
}

/// Per-day stocking decision: SKU name -> quantity. Entries encode y_i = 1;
/// SKUs absent from the map are not stocked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockPlan {
    pub day: NaiveDate,
    pub entries: BTreeMap<String, f64>,
}

impl StockPlan {
    pub fn empty(day: NaiveDate) -> Self {
        StockPlan {
            day,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a plan and verifies the K/N/B constraints.
    pub fn feasible(
        day: NaiveDate,
        entries: BTreeMap<String, f64>,
        cfg: &WarehouseConfig,
    ) -> Result<Self, CoreError> {
        let plan = StockPlan { day, entries };
        plan.check_feasible(cfg)?;
        Ok(plan)
    }

    pub fn check_feasible(&self, cfg: &WarehouseConfig) -> Result<(), CoreError> {
        if self.entries.len() > cfg.k_max_skus as usize {
            return Err(CoreError::InfeasiblePlan(format!(
                "K: {} SKUs stocked, limit {}",
                self.entries.len(),
                cfg.k_max_skus
            )));
        }
        let total: f64 = self.entries.values().sum();
        if total > cfg.n_max_units as f64 + 1e-9 {
            return Err(CoreError::InfeasiblePlan(format!(
                "N: {total} units stocked, limit {}",
                cfg.n_max_units
            )));
        }
        for (sku, &qty) in &self.entries {
            if qty < cfg.b_min_units as f64 - 1e-9 {
                return Err(CoreError::InfeasiblePlan(format!(
                    "B: SKU {sku} stocked at {qty}, minimum {}",
                    cfg.b_min_units
                )));
            }
        }
        Ok(())
    }

    pub fn total_units(&self) -> f64 {
        self.entries.values().sum()
    }
}

/// Per-order outcome of a day replay.
#[derive(Debug, Clone)]
pub struct OrderOutcome {
    pub order_id: String,
    /// z_{oi} per line, in the order's line order.
    pub line_supplied: Vec<bool>,
    /// p_o.
    pub fulfilled: bool,
}

/// Result of replaying one day's orders against a stock plan.
#[derive(Debug, Clone)]
pub struct FulfillmentReport {
    pub day: NaiveDate,
    pub outcomes: Vec<OrderOutcome>,
    pub fulfilled_count: usize,
    pub order_count: usize,
    /// r_t = fulfilled_count / order_count.
    pub rate: f64,
    /// GMV of fully fulfilled orders, in cents.
    pub fulfilled_gmv_cents: i64,
    /// GMV-weighted fulfillment rate, reported alongside the unweighted rate.
    pub gmv_weighted_rate: f64,
}

/// Validates raw order lines and builds the indexed history.
///
/// Orders within a day arrive in input row order; orders whose first lines
/// tie on row position are ordered by order_id. Duplicate
/// (day, order_id, sku_id) lines and non-positive quantities are rejected
/// with the offending row number.
pub fn validate_and_index(lines: &[OrderLine]) -> Result<IndexedHistory, CoreError> {
    let mut sku_names: Vec<String> = Vec::new();
    let mut sku_index: HashMap<String, SkuId> = HashMap::new();

    // day -> order_id -> (first row, sku -> (row, qty, price))
    struct RawOrder {
        first_row: usize,
        lines: Vec<(usize, SkuId, u32, i64)>,
    }
    let mut by_day: BTreeMap<NaiveDate, BTreeMap<String, RawOrder>> = BTreeMap::new();

    for (row0, line) in lines.iter().enumerate() {
        let row = row0 + 1;
        if line.quantity == 0 {
            return Err(CoreError::NonPositiveQuantity { row });
        }
        if line.unit_price_cents < 0 {
            return Err(CoreError::NegativePrice { row });
        }
        let sku = *sku_index.entry(line.sku_id.clone()).or_insert_with(|| {
            sku_names.push(line.sku_id.clone());
            (sku_names.len() - 1) as SkuId
        });
        let orders = by_day.entry(line.day).or_default();
        let raw = orders.entry(line.order_id.clone()).or_insert(RawOrder {
            first_row: row,
            lines: Vec::new(),
        });
        if raw.lines.iter().any(|&(_, s, _, _)| s == sku) {
            return Err(CoreError::DuplicateLine {
                row,
                day: line.day,
                order_id: line.order_id.clone(),
                sku_id: line.sku_id.clone(),
            });
        }
        raw.lines.push((row, sku, line.quantity, line.unit_price_cents));
    }

    let mut days = Vec::with_capacity(by_day.len());
    for (date, orders) in by_day {
        let mut arrival: Vec<(usize, String, RawOrder)> = orders
            .into_iter()
            .map(|(id, raw)| (raw.first_row, id, raw))
            .collect();
        arrival.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

        let mut cumulative: HashMap<SkuId, u32> = HashMap::new();
        let mut sku_totals: BTreeMap<SkuId, u32> = BTreeMap::new();
        let mut day_orders = Vec::with_capacity(arrival.len());
        for (_, id, raw) in arrival {
            let mut order_lines = Vec::with_capacity(raw.lines.len());
            let mut gmv_cents: i64 = 0;
            // keep the order's own line order as given in the input
            let mut lines = raw.lines;
            lines.sort_by_key(|&(row, _, _, _)| row);
            for (_, sku, qty, price) in lines {
                let c = cumulative.entry(sku).or_insert(0);
                *c += qty;
                *sku_totals.entry(sku).or_insert(0) += qty;
                gmv_cents += qty as i64 * price;
                order_lines.push(Line {
                    sku,
                    quantity: qty,
                    unit_price_cents: price,
                    cumulative: *c,
                });
            }
            day_orders.push(Order {
                id,
                lines: order_lines,
                gmv_cents,
            });
        }
        days.push(DayData {
            date,
            orders: day_orders,
            sku_totals,
        });
    }

    Ok(IndexedHistory {
        days,
        sku_names,
        sku_index,
    })
}

/// Replays one day's orders against a stock plan.
///
/// A line is supplied when the planned quantity covers the line's cumulative
/// demand (closed inequality: x_i >= c_{oi}); an order is fulfilled when all
/// of its lines are supplied. Pure and read-only.
pub fn simulate_day(
    history: &IndexedHistory,
    day: &DayData,
    plan: &StockPlan,
) -> Result<FulfillmentReport, CoreError> {
    if plan.day != day.date {
        return Err(CoreError::PlanDayMismatch {
            plan: plan.day,
            orders: day.date,
        });
    }
    if day.orders.is_empty() {
        return Err(CoreError::EmptyDay(day.date));
    }

    // Resolve plan quantities onto interned ids once.
    let mut stocked: HashMap<SkuId, f64> = HashMap::new();
    for (name, &qty) in &plan.entries {
        if let Some(id) = history.sku_id(name) {
            stocked.insert(id, qty);
        }
    }

    let mut outcomes = Vec::with_capacity(day.orders.len());
    let mut fulfilled_count = 0usize;
    let mut fulfilled_gmv_cents = 0i64;
    for order in &day.orders {
        let line_supplied: Vec<bool> = order
            .lines
            .iter()
            .map(|l| stocked.get(&l.sku).copied().unwrap_or(0.0) >= l.cumulative as f64)
            .collect();
        let fulfilled = line_supplied.iter().all(|&z| z);
        if fulfilled {
            fulfilled_count += 1;
            fulfilled_gmv_cents += order.gmv_cents;
        }
        outcomes.push(OrderOutcome {
            order_id: order.id.clone(),
            line_supplied,
            fulfilled,
        });
    }

    let order_count = day.orders.len();
    let total_gmv = day.total_gmv_cents();
    Ok(FulfillmentReport {
        day: day.date,
        outcomes,
        fulfilled_count,
        order_count,
        rate: fulfilled_count as f64 / order_count as f64,
        fulfilled_gmv_cents,
        gmv_weighted_rate: if total_gmv > 0 {
            fulfilled_gmv_cents as f64 / total_gmv as f64
        } else {
            0.0
        },
    })
}

/// Unweighted arithmetic mean of daily fulfillment rates.
pub fn average_rate(reports: &[FulfillmentReport]) -> Result<f64, CoreError> {
    if reports.is_empty() {
        return Err(CoreError::EmptyReports);
    }
    Ok(reports.iter().map(|r| r.rate).sum::<f64>() / reports.len() as f64)
}

/// Parses a decimal price with at most 2 fractional digits into cents.
pub fn parse_price_cents(s: &str) -> Option<i64> {
    let s = s.trim();
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if frac_part.len() > 2 || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let int_val: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    let mut frac_val: i64 = 0;
    if !frac_part.is_empty() {
        frac_val = frac_part.parse().ok()?;
        if frac_part.len() == 1 {
            frac_val *= 10;
        }
    }
    if int_val < 0 {
        return None;
    }
    Some(int_val * 100 + frac_val)
}

/// Formats cents back to a 2-digit decimal string.
pub fn format_price_cents(cents: i64) -> String {
    format!("{}.{:02}", cents / 100, (cents % 100).abs())
}

/// Reads order lines from the orders CSV
/// (`date,order_id,sku_id,quantity,unit_price`).
pub fn read_orders_csv<P: AsRef<Path>>(path: P) -> Result<Vec<OrderLine>, CoreError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut lines = Vec::new();
    for (row0, record) in reader.records().enumerate() {
        let row = row0 + 2; // 1-based, after the header
        let record = record?;
        if record.len() != 5 {
            return Err(CoreError::Parse {
                row,
                msg: format!("expected 5 fields, got {}", record.len()),
            });
        }
        let day = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            CoreError::Parse {
                row,
                msg: format!("bad date {:?}: {e}", &record[0]),
            }
        })?;
        let quantity: u32 = record[3].trim().parse().map_err(|_| CoreError::Parse {
            row,
            msg: format!("bad quantity {:?}", &record[3]),
        })?;
        let unit_price_cents = parse_price_cents(&record[4]).ok_or_else(|| CoreError::Parse {
            row,
            msg: format!("bad unit_price {:?}", &record[4]),
        })?;
        lines.push(OrderLine {
            day,
            order_id: record[1].to_string(),
            sku_id: record[2].to_string(),
            quantity,
            unit_price_cents,
        });
    }
    Ok(lines)
}

/// Writes order lines in the orders CSV format.
pub fn write_orders_csv<P: AsRef<Path>>(path: P, lines: &[OrderLine]) -> Result<(), CoreError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["date", "order_id", "sku_id", "quantity", "unit_price"])?;
    for line in lines {
        writer.write_record([
            line.day.format("%Y-%m-%d").to_string(),
            line.order_id.clone(),
            line.sku_id.clone(),
            line.quantity.to_string(),
            format_price_cents(line.unit_price_cents),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads stock plans from the plan CSV (`date,sku_id,quantity`), one plan per
/// date.
pub fn read_plans_csv<P: AsRef<Path>>(path: P) -> Result<Vec<StockPlan>, CoreError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut by_day: BTreeMap<NaiveDate, BTreeMap<String, f64>> = BTreeMap::new();
    for (row0, record) in reader.records().enumerate() {
        let row = row0 + 2;
        let record = record?;
        let day = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            CoreError::Parse {
                row,
                msg: format!("bad date {:?}: {e}", &record[0]),
            }
        })?;
        let qty: f64 = record[2].trim().parse().map_err(|_| CoreError::Parse {
            row,
            msg: format!("bad quantity {:?}", &record[2]),
        })?;
        by_day.entry(day).or_default().insert(record[1].to_string(), qty);
    }
    Ok(by_day
        .into_iter()
        .map(|(day, entries)| StockPlan { day, entries })
        .collect())
}

/// Writes stock plans in the plan CSV format.
pub fn write_plans_csv<P: AsRef<Path>>(path: P, plans: &[StockPlan]) -> Result<(), CoreError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["date", "sku_id", "quantity"])?;
    for plan in plans {
        for (sku, qty) in &plan.entries {
            writer.write_record([
                plan.day.format("%Y-%m-%d").to_string(),
                sku.clone(),
                format_quantity(*qty),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Renders a plan quantity without a trailing ".0" when integral.
pub fn format_quantity(qty: f64) -> String {
    if (qty - qty.round()).abs() < 1e-9 {
        format!("{}", qty.round() as i64)
    } else {
        let mut s = String::new();
        let _ = write!(s, "{qty}");
        s
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;

    pub fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    /// Shorthand: (order_id, [(sku, qty, price_cents)]) on a single day.
    pub fn one_day(
        day: &str,
        orders: &[(&str, &[(&str, u32, i64)])],
    ) -> IndexedHistory {
        let mut lines = Vec::new();
        for (oid, ls) in orders {
            for (sku, qty, price) in ls.iter() {
                lines.push(OrderLine {
                    day: date(day),
                    order_id: oid.to_string(),
                    sku_id: sku.to_string(),
                    quantity: *qty,
                    unit_price_cents: *price,
                });
            }
        }
        validate_and_index(&lines).unwrap()
    }

    pub fn plan(day: &str, entries: &[(&str, f64)]) -> StockPlan {
        StockPlan {
            day: date(day),
            entries: entries
                .iter()
                .map(|(s, q)| (s.to_string(), *q))
                .collect(),
        }
    }
}
