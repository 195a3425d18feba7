//! Seeded generators for small random instances, shared by unit tests and
//! the acceptance suite.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::core::{validate_and_index, IndexedHistory, OrderLine, StockPlan};

const DAY: &str = "2023-06-01";

fn day() -> NaiveDate {
    NaiveDate::parse_from_str(DAY, "%Y-%m-%d").unwrap()
}

/// One random day with at most 6 SKUs and at most 12 orders, all on
/// 2023-06-01.
pub fn random_small_day(seed: u64) -> IndexedHistory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_skus = rng.gen_range(1..=6usize);
    let n_orders = rng.gen_range(1..=12usize);
    let prices: Vec<i64> = (0..n_skus).map(|_| rng.gen_range(50..=3000)).collect();
    let mut lines = Vec::new();
    for o in 0..n_orders {
        let basket = rng.gen_range(1..=3usize.min(n_skus));
        let mut chosen: Vec<usize> = Vec::new();
        while chosen.len() < basket {
            let s = rng.gen_range(0..n_skus);
            if !chosen.contains(&s) {
                chosen.push(s);
            }
        }
        for s in chosen {
            lines.push(OrderLine {
                day: day(),
                order_id: format!("o{o:02}"),
                sku_id: format!("S{s}"),
                quantity: rng.gen_range(1..=4),
                unit_price_cents: prices[s],
            });
        }
    }
    validate_and_index(&lines).unwrap()
}

/// A random plan whose every stocked quantity is at least `b` (feasible with
/// respect to the B constraint; K and N are left to the caller's config).
pub fn random_feasible_plan(
    history: &IndexedHistory,
    date: NaiveDate,
    b: u32,
    seed: u64,
) -> StockPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let day = history.day(date).expect("day exists");
    let mut entries = BTreeMap::new();
    for (&sku, &total) in &day.sku_totals {
        if rng.gen_bool(0.6) {
            let qty = rng.gen_range(b..=total.max(b) + 3);
            entries.insert(history.sku_name(sku).to_string(), qty as f64);
        }
    }
    StockPlan { day: date, entries }
}
