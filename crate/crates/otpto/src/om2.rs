//! Post-processing of model predictions into a feasible daily stock plan
//! (greedy scaling search with an OTPTO and a PTO selection branch).

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::core::{StockPlan, WarehouseConfig};
use crate::predict::PredRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgoType {
    Otpto,
    Pto,
}

impl std::fmt::Display for AlgoType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlgoType::Otpto => write!(f, "otpto"),
            AlgoType::Pto => write!(f, "pto"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PostprocessConfig {
    pub algo_type: AlgoType,
    pub warehouse: WarehouseConfig,
    /// Sort the PTO branch by y_hat as in the published listing instead of by
    /// predicted sales.
    pub pto_literal_sort: bool,
}

impl PostprocessConfig {
    pub fn new(algo_type: AlgoType, warehouse: WarehouseConfig) -> Self {
        PostprocessConfig {
            algo_type,
            warehouse,
            pto_literal_sort: false,
        }
    }
}

/// Diagnostics from one post-processing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostprocessLog {
    pub alpha: f64,
    pub admitted: usize,
    pub selected: usize,
}

fn round_half_away(x: f64) -> f64 {
    // f64::round rounds half away from zero already; spelled out for clarity
    x.round()
}

/// Turns a day's predictions into a plan satisfying the K/N/B constraints.
///
/// OTPTO: rank by y_hat, keep the top K, process in descending x_hat order
/// with provisional quantity max(B, min(x_hat, q_hat)). PTO: rank and process
/// by q_hat with provisional quantity max(B, q_hat). Both then scale by
/// alpha = N / sum(qtty), round, clamp back up to B, and admit greedily until
/// the next SKU would exceed N.
pub fn postprocess_plan(
    day: NaiveDate,
    rows: &[&PredRow],
    cfg: &PostprocessConfig,
) -> (StockPlan, PostprocessLog) {
    let wh = &cfg.warehouse;
    let mut plan = StockPlan::empty(day);
    let mut log = PostprocessLog {
        alpha: 0.0,
        admitted: 0,
        selected: 0,
    };
    if rows.is_empty() || wh.n_max_units < wh.b_min_units || wh.k_max_skus == 0 {
        return (plan, log);
    }

    let k = wh.k_max_skus as usize;
    let b = wh.b_min_units as f64;
    let n = wh.n_max_units as f64;

    let mut selected: Vec<&PredRow> = rows.to_vec();
    match cfg.algo_type {
        AlgoType::Otpto => {
            selected.sort_by(|a, b| b.y_hat.total_cmp(&a.y_hat).then(a.sku.cmp(&b.sku)));
            selected.truncate(k);
            selected.sort_by(|a, b| b.x_hat.total_cmp(&a.x_hat).then(a.sku.cmp(&b.sku)));
        }
        AlgoType::Pto => {
            if cfg.pto_literal_sort {
                selected.sort_by(|a, b| b.y_hat.total_cmp(&a.y_hat).then(a.sku.cmp(&b.sku)));
            } else {
                selected.sort_by(|a, b| b.q_hat.total_cmp(&a.q_hat).then(a.sku.cmp(&b.sku)));
            }
            selected.truncate(k);
        }
    }
    log.selected = selected.len();

    let provisional: Vec<f64> = selected
        .iter()
        .map(|r| match cfg.algo_type {
            AlgoType::Otpto => r.x_hat.min(r.q_hat).max(b),
            AlgoType::Pto => r.q_hat.max(b),
        })
        .collect();
    let total: f64 = provisional.iter().sum();
    let alpha = if total > 0.0 { n / total } else { 0.0 };
    log.alpha = alpha;

    let mut cumulative = 0.0;
    for (row, &qtty) in selected.iter().zip(&provisional) {
        let scaled = round_half_away(qtty * alpha).max(b);
        if cumulative + scaled > n {
            break;
        }
        cumulative += scaled;
        plan.entries.insert(row.sku.clone(), scaled);
        log.admitted += 1;
    }
    (plan, log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::test_util::date;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn wh(k: u32, n: u32, b: u32) -> WarehouseConfig {
        WarehouseConfig {
            k_max_skus: k,
            n_max_units: n,
            b_min_units: b,
            horizon_days: 1,
        }
    }

    fn row(sku: &str, y: f64, x: f64, q: f64) -> PredRow {
        PredRow {
            day: date("2023-07-01"),
            sku: sku.into(),
            y_hat: y,
            x_hat: x,
            q_hat: q,
        }
    }

    #[test]
    fn doubling_scale_spreads_slack() {
        // provisional [20, 20] with N=80 -> alpha 2 -> [40, 40]
        let rows = vec![row("A", 0.9, 20.0, 25.0), row("B", 0.8, 22.0, 20.0)];
        let refs: Vec<&PredRow> = rows.iter().collect();
        let cfg = PostprocessConfig::new(AlgoType::Otpto, wh(2, 80, 10));
        let (plan, log) = postprocess_plan(date("2023-07-01"), &refs, &cfg);
        assert_eq!(log.alpha, 2.0);
        assert_eq!(plan.entries["A"], 40.0);
        assert_eq!(plan.entries["B"], 40.0);
        assert_eq!(plan.total_units(), 80.0);
    }

    #[test]
    fn greedy_break_stops_at_first_violation() {
        // provisional [100, 12], B=10, N=55: alpha = 55/112, scaled = [49, 6
        // -> clamp 10]; 49 admitted, 49 + 10 > 55 -> break
        let rows = vec![row("A", 0.9, 100.0, 150.0), row("B", 0.8, 12.0, 14.0)];
        let refs: Vec<&PredRow> = rows.iter().collect();
        let cfg = PostprocessConfig::new(AlgoType::Otpto, wh(2, 55, 10));
        let (plan, log) = postprocess_plan(date("2023-07-01"), &refs, &cfg);
        assert_eq!(plan.entries.len(), 1);
        assert_eq!(plan.entries["A"], 49.0);
        assert_eq!(log.admitted, 1);
        assert!((log.alpha - 55.0 / 112.0).abs() < 1e-12);
    }

    #[test]
    fn otpto_selects_by_y_hat_then_processes_by_x_hat() {
        // K=2: SKUs with y_hat .9/.8 selected; the x_hat=40 one comes first
        let rows = vec![
            row("s1", 0.9, 15.0, 100.0),
            row("s2", 0.8, 40.0, 100.0),
            row("s3", 0.7, 99.0, 100.0),
        ];
        let refs: Vec<&PredRow> = rows.iter().collect();
        let cfg = PostprocessConfig::new(AlgoType::Otpto, wh(2, 41, 1));
        let (plan, _) = postprocess_plan(date("2023-07-01"), &refs, &cfg);
        // alpha = 41/55; scaled: s2 -> round(29.8) = 30, s1 -> round(11.2) = 11
        assert!(!plan.entries.contains_key("s3"));
        assert_eq!(plan.entries["s2"], 30.0);
        assert_eq!(plan.entries["s1"], 11.0);
    }

    #[test]
    fn pto_ignores_pm_outputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let base: Vec<PredRow> = (0..20)
            .map(|i| row(&format!("s{i:02}"), rng.gen(), rng.gen::<f64>() * 30.0, rng.gen::<f64>() * 25.0))
            .collect();
        let mut perturbed = base.clone();
        for r in &mut perturbed {
            r.y_hat = rng.gen();
            r.x_hat = rng.gen::<f64>() * 100.0;
        }
        let cfg = PostprocessConfig::new(AlgoType::Pto, wh(8, 120, 5));
        let a = postprocess_plan(date("2023-07-01"), &base.iter().collect::<Vec<_>>(), &cfg);
        let b = postprocess_plan(date("2023-07-01"), &perturbed.iter().collect::<Vec<_>>(), &cfg);
        assert_eq!(a.0, b.0);
    }

    #[test]
    fn pto_literal_sort_uses_y_hat() {
        let rows = vec![row("a", 0.9, 5.0, 1.0), row("b", 0.1, 5.0, 50.0)];
        let refs: Vec<&PredRow> = rows.iter().collect();
        let mut cfg = PostprocessConfig::new(AlgoType::Pto, wh(1, 20, 5));
        let (plan_default, _) = postprocess_plan(date("2023-07-01"), &refs, &cfg);
        assert!(plan_default.entries.contains_key("b"));
        cfg.pto_literal_sort = true;
        let (plan_literal, _) = postprocess_plan(date("2023-07-01"), &refs, &cfg);
        assert!(plan_literal.entries.contains_key("a"));
    }

    #[test]
    fn output_always_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..300 {
            let n_rows = rng.gen_range(0..40);
            let rows: Vec<PredRow> = (0..n_rows)
                .map(|i| {
                    row(
                        &format!("s{i:02}"),
                        rng.gen(),
                        rng.gen::<f64>() * 60.0,
                        rng.gen::<f64>() * 60.0,
                    )
                })
                .collect();
            let wh = wh(
                rng.gen_range(1..12),
                rng.gen_range(0..200),
                rng.gen_range(1..15),
            );
            for algo in [AlgoType::Otpto, AlgoType::Pto] {
                let cfg = PostprocessConfig::new(algo, wh.clone());
                let (plan, log) =
                    postprocess_plan(date("2023-07-01"), &rows.iter().collect::<Vec<_>>(), &cfg);
                plan.check_feasible(&wh)
                    .unwrap_or_else(|e| panic!("trial {trial} {algo}: {e}"));
                assert_eq!(plan.entries.len(), log.admitted);
            }
        }
    }

    #[test]
    fn degenerate_inputs_give_empty_plans() {
        let rows = vec![row("a", 0.5, 5.0, 5.0)];
        let refs: Vec<&PredRow> = rows.iter().collect();
        let (p1, _) = postprocess_plan(
            date("2023-07-01"),
            &[],
            &PostprocessConfig::new(AlgoType::Otpto, wh(2, 50, 5)),
        );
        assert!(p1.entries.is_empty());
        let (p2, _) = postprocess_plan(
            date("2023-07-01"),
            &refs,
            &PostprocessConfig::new(AlgoType::Otpto, wh(2, 3, 5)),
        );
        assert!(p2.entries.is_empty());
    }

    #[test]
    fn unit_alpha_preserves_provisional_quantities() {
        // provisional quantities already sum to N
        let rows = vec![row("a", 0.9, 12.0, 20.0), row("b", 0.8, 8.0, 8.0)];
        let refs: Vec<&PredRow> = rows.iter().collect();
        let cfg = PostprocessConfig::new(AlgoType::Otpto, wh(2, 20, 2));
        let (plan, log) = postprocess_plan(date("2023-07-01"), &refs, &cfg);
        assert_eq!(log.alpha, 1.0);
        assert_eq!(plan.entries["a"], 12.0);
        assert_eq!(plan.entries["b"], 8.0);
    }
}
