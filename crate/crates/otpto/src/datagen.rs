//! Seedable synthetic order-stream generator: Zipf SKU popularity, weekly
//! seasonality, Poisson order volume, shifted-Poisson baskets, fixed
//! log-normal per-SKU prices.

use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::OrderLine;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("n_days must be >= 1")]
    NoDays,
    #[error("n_skus must be >= 2")]
    TooFewSkus,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenParams {
    pub n_skus: usize,
    pub n_days: usize,
    pub start_date: NaiveDate,
    pub orders_per_day_mean: f64,
    /// Mean of the shifted Poisson basket size (minimum 1 line).
    pub basket_size_mean: f64,
    /// Zipf popularity exponent.
    pub zipf_s: f64,
    pub price_log_mean: f64,
    pub price_log_sd: f64,
    /// Demand multiplier per weekday, Monday first.
    pub weekday_multipliers: [f64; 7],
    pub seed: u64,
}

impl Default for GenParams {
    /// Desk-scale profile: 200 SKUs over 97 days (90 train + 7 test) at
    /// roughly 120 orders/day.
    fn default() -> Self {
        GenParams {
            n_skus: 200,
            n_days: 97,
            start_date: NaiveDate::from_ymd_opt(2023, 3, 6).unwrap(),
            orders_per_day_mean: 120.0,
            basket_size_mean: 2.2,
            zipf_s: 1.2,
            price_log_mean: 2.4,
            price_log_sd: 0.7,
            weekday_multipliers: [1.0, 0.95, 0.9, 0.95, 1.05, 1.25, 1.2],
            seed: 42,
        }
    }
}

fn poisson_draw(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive lambda").sample(rng) as u64
}

/// Cumulative Zipf weights over ranks 1..=n with exponent s.
fn zipf_cumulative(n: usize, s: f64) -> Vec<f64> {
    let mut cum = Vec::with_capacity(n);
    let mut total = 0.0;
    for rank in 1..=n {
        total += (rank as f64).powf(-s);
        cum.push(total);
    }
    cum
}

fn sample_zipf(rng: &mut ChaCha8Rng, cum: &[f64]) -> usize {
    let target = rng.gen::<f64>() * cum[cum.len() - 1];
    cum.partition_point(|&c| c <= target).min(cum.len() - 1)
}

/// Generates a deterministic synthetic order stream.
pub fn generate_synthetic(params: &GenParams) -> Result<Vec<OrderLine>, GenError> {
    if params.n_days == 0 {
        return Err(GenError::NoDays);
    }
    if params.n_skus < 2 {
        return Err(GenError::TooFewSkus);
    }
    if params.orders_per_day_mean <= 0.0 {
        return Err(GenError::NonPositive("orders_per_day_mean"));
    }
    if params.basket_size_mean < 1.0 {
        return Err(GenError::NonPositive("basket_size_mean - 1"));
    }
    if params.zipf_s <= 0.0 {
        return Err(GenError::NonPositive("zipf_s"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // fixed per-SKU prices, in cents
    let price_dist = LogNormal::new(params.price_log_mean, params.price_log_sd)
        .map_err(|_| GenError::NonPositive("price_log_sd"))?;
    let width = (params.n_skus - 1).to_string().len();
    let skus: Vec<(String, i64)> = (0..params.n_skus)
        .map(|i| {
            let price = (price_dist.sample(&mut rng) * 100.0).round().max(1.0) as i64;
            (format!("S{i:0width$}"), price)
        })
        .collect();

    let cum = zipf_cumulative(params.n_skus, params.zipf_s);
    let mut lines = Vec::new();
    for di in 0..params.n_days {
        let day = params.start_date + Duration::days(di as i64);
        let mult = params.weekday_multipliers[day.weekday().num_days_from_monday() as usize];
        let n_orders = poisson_draw(&mut rng, params.orders_per_day_mean * mult);
        for oi in 0..n_orders {
            let order_id = format!("d{di:03}-o{oi:05}");
            let basket = 1 + poisson_draw(&mut rng, params.basket_size_mean - 1.0) as usize;
            let basket = basket.min(params.n_skus);
            let mut chosen: Vec<usize> = Vec::with_capacity(basket);
            while chosen.len() < basket {
                let s = sample_zipf(&mut rng, &cum);
                if !chosen.contains(&s) {
                    chosen.push(s);
                }
            }
            for s in chosen {
                let qty = 1 + poisson_draw(&mut rng, 0.5) as u32;
                lines.push(OrderLine {
                    day,
                    order_id: order_id.clone(),
                    sku_id: skus[s].0.clone(),
                    quantity: qty,
                    unit_price_cents: skus[s].1,
                });
            }
        }
    }
    Ok(lines)
}

/// Writes the GenParams provenance sidecar next to a generated dataset.
pub fn write_params_json<P: AsRef<Path>>(path: P, params: &GenParams) -> Result<(), GenError> {
    std::fs::write(path, serde_json::to_string_pretty(params)?)?;
    Ok(())
}
