//! PM1 (selection classifier) and PM2 (quantity regressor) training and
//! inference on the labeled feature matrix.

use std::collections::BTreeSet;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::CoreError;
use crate::features::{FeatureMatrix, Pm0Output};
use crate::labeling::LabelSet;
use crate::mlcore::{predict_gbdt, train_gbdt, GbdtModel, GbdtParams, MlError};

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("no label for row ({day}, {sku})")]
    MissingLabel { day: NaiveDate, sku: String },
    #[error("PM2 training set is empty: no rows with x_star > 0")]
    EmptyPm2,
    #[error("PM1 labels are single-class")]
    SingleClassPm1,
    #[error("feature matrix has no rows")]
    EmptyMatrix,
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainMetrics {
    /// Validation AUC at PM1's best iteration, when measurable.
    pub pm1_auc: Option<f64>,
    /// Validation RMSE at PM2's best iteration, when measurable.
    pub pm2_rmse: Option<f64>,
    pub pm1_rows: usize,
    pub pm2_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredRow {
    pub day: NaiveDate,
    pub sku: String,
    /// Selection probability from PM1.
    pub y_hat: f64,
    /// Inventory quantity from PM2, clamped to be non-negative.
    pub x_hat: f64,
    /// PM0 sales forecast.
    pub q_hat: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionBundle {
    pub rows: Vec<PredRow>,
}

impl PredictionBundle {
    pub fn day_rows(&self, day: NaiveDate) -> Vec<&PredRow> {
        self.rows.iter().filter(|r| r.day == day).collect()
    }
}

/// Splits the matrix's distinct days into a leading training slice and a
/// trailing validation slice holding the final 20% of days (at least one of
/// each when two or more days exist).
fn validation_days(matrix: &FeatureMatrix) -> BTreeSet<NaiveDate> {
    let days: BTreeSet<NaiveDate> = matrix.rows.iter().map(|r| r.day).collect();
    let days: Vec<NaiveDate> = days.into_iter().collect();
    if days.len() < 2 {
        return BTreeSet::new();
    }
    let n_valid = ((days.len() as f64 * 0.2).ceil() as usize).clamp(1, days.len() - 1);
    days[days.len() - n_valid..].iter().copied().collect()
}

/// Trains PM1 on every labeled row (target y_final) and PM2 on the rows with
/// x_star > 0 (target x_star, raw scale).
pub fn train_models(
    matrix: &FeatureMatrix,
    labels: &LabelSet,
    pm1_params: &GbdtParams,
    pm2_params: &GbdtParams,
) -> Result<(GbdtModel, GbdtModel, TrainMetrics), PredictError> {
    train_models_with(matrix, labels, pm1_params, pm2_params, false)
}

/// As `train_models`, optionally keeping x_star = 0 rows in the PM2 training
/// set (the A1 ablation).
pub fn train_models_with(
    matrix: &FeatureMatrix,
    labels: &LabelSet,
    pm1_params: &GbdtParams,
    pm2_params: &GbdtParams,
    pm2_keep_zero_rows: bool,
) -> Result<(GbdtModel, GbdtModel, TrainMetrics), PredictError> {
    if matrix.rows.is_empty() {
        return Err(PredictError::EmptyMatrix);
    }
    let valid_days = validation_days(matrix);

    let mut pm1_train: (Vec<Vec<f64>>, Vec<f64>) = Default::default();
    let mut pm1_valid: (Vec<Vec<f64>>, Vec<f64>) = Default::default();
    let mut pm2_train: (Vec<Vec<f64>>, Vec<f64>) = Default::default();
    let mut pm2_valid: (Vec<Vec<f64>>, Vec<f64>) = Default::default();
    for row in &matrix.rows {
        let label = labels
            .get(row.day, &row.sku)
            .ok_or_else(|| PredictError::MissingLabel {
                day: row.day,
                sku: row.sku.clone(),
            })?;
        let is_valid = valid_days.contains(&row.day);
        let (x1, y1) = if is_valid { &mut pm1_valid } else { &mut pm1_train };
        x1.push(row.values.clone());
        y1.push(label.y_final as u8 as f64);
        if label.x_star > 0.0 || pm2_keep_zero_rows {
            let (x2, y2) = if is_valid { &mut pm2_valid } else { &mut pm2_train };
            x2.push(row.values.clone());
            y2.push(label.x_star);
        }
    }

    let single_class = |ys: &[f64]| ys.iter().all(|&y| y == ys[0]);
    if pm1_train.1.is_empty() || single_class(&pm1_train.1) {
        return Err(PredictError::SingleClassPm1);
    }
    if pm2_train.0.is_empty() {
        return Err(PredictError::EmptyPm2);
    }

    let pm1 = train_gbdt(&pm1_train.0, &pm1_train.1, &pm1_valid.0, &pm1_valid.1, pm1_params)?;
    let pm2 = train_gbdt(&pm2_train.0, &pm2_train.1, &pm2_valid.0, &pm2_valid.1, pm2_params)?;
    let metrics = TrainMetrics {
        pm1_auc: pm1.valid_metric,
        pm2_rmse: pm2.valid_metric,
        pm1_rows: pm1_train.1.len() + pm1_valid.1.len(),
        pm2_rows: pm2_train.1.len() + pm2_valid.1.len(),
    };
    Ok((pm1, pm2, metrics))
}

/// Scores target-day rows with both models and attaches PM0 forecasts.
pub fn predict_models(
    pm1: &GbdtModel,
    pm2: &GbdtModel,
    matrix: &FeatureMatrix,
    pm0: &Pm0Output,
) -> Result<PredictionBundle, PredictError> {
    let xs: Vec<Vec<f64>> = matrix.rows.iter().map(|r| r.values.clone()).collect();
    if xs.is_empty() {
        return Ok(PredictionBundle::default());
    }
    let y_hat = predict_gbdt(pm1, &xs)?;
    let x_hat = predict_gbdt(pm2, &xs)?;
    let rows = matrix
        .rows
        .iter()
        .zip(y_hat)
        .zip(x_hat)
        .map(|((row, y), x)| PredRow {
            day: row.day,
            sku: row.sku.clone(),
            y_hat: y,
            x_hat: x.max(0.0),
            q_hat: pm0.get(row.day, &row.sku).q_hat,
        })
        .collect();
    Ok(PredictionBundle { rows })
}

/// Writes predictions (`date,sku_id,y_hat,x_hat,q_hat`).
pub fn write_predictions_csv<P: AsRef<Path>>(
    path: P,
    bundle: &PredictionBundle,
) -> Result<(), PredictError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["date", "sku_id", "y_hat", "x_hat", "q_hat"])?;
    for row in &bundle.rows {
        writer.write_record([
            row.day.format("%Y-%m-%d").to_string(),
            row.sku.clone(),
            format!("{}", row.y_hat),
            format!("{}", row.x_hat),
            format!("{}", row.q_hat),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_predictions_csv<P: AsRef<Path>>(path: P) -> Result<PredictionBundle, PredictError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let day = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            PredictError::Core(CoreError::Parse {
                row: 0,
                msg: format!("bad date {:?}: {e}", &record[0]),
            })
        })?;
        let f = |s: &str| s.trim().parse::<f64>().unwrap_or(0.0);
        rows.push(PredRow {
            day,
            sku: record[1].to_string(),
            y_hat: f(&record[2]),
            x_hat: f(&record[3]),
            q_hat: f(&record[4]),
        });
    }
    Ok(PredictionBundle { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::test_util::date;
    use crate::features::{ColumnDef, FeatureRow};
    use crate::labeling::LabelRow;
    use chrono::Duration;

    fn matrix_and_labels(n_days: usize) -> (FeatureMatrix, LabelSet) {
        // x_star is a noiseless function of two features; y_final follows a
        // threshold on the first feature
        let mut matrix = FeatureMatrix {
            columns: vec![
                ColumnDef { name: "f0".into(), family: "common".into() },
                ColumnDef { name: "f1".into(), family: "common".into() },
            ],
            rows: Vec::new(),
        };
        let mut labels = LabelSet::default();
        for di in 0..n_days {
            let day = date("2023-06-01") + Duration::days(di as i64);
            for s in 0..12u32 {
                let f0 = (s as f64 + di as f64 * 0.3) % 6.0;
                let f1 = (s as f64 * 1.7 + di as f64) % 4.0;
                let x_star = if f0 >= 3.0 { 2.0 * f0 + f1 } else { 0.0 };
                let y = x_star > 0.0;
                matrix.rows.push(FeatureRow {
                    day,
                    sku: format!("S{s:02}"),
                    cutoff: day - Duration::days(1),
                    values: vec![f0, f1],
                });
                labels.rows.insert(
                    (day, format!("S{s:02}")),
                    LabelRow { x_star, y_star: y, y_cs: y, y_ts: y, y_final: y },
                );
            }
        }
        (matrix, labels)
    }

    #[test]
    fn pm2_excludes_zero_inventory_rows() {
        let (matrix, labels) = matrix_and_labels(10);
        let zero_rows = matrix
            .rows
            .iter()
            .filter(|r| labels.get(r.day, &r.sku).unwrap().x_star == 0.0)
            .count();
        let (_, _, metrics) =
            train_models(&matrix, &labels, &GbdtParams::pm1(), &GbdtParams::pm2()).unwrap();
        assert_eq!(metrics.pm1_rows, matrix.rows.len());
        assert_eq!(metrics.pm2_rows, matrix.rows.len() - zero_rows);
        assert!(zero_rows > 0);
    }

    #[test]
    fn noiseless_function_is_learned_tightly() {
        let (matrix, labels) = matrix_and_labels(30);
        let (pm1, pm2, metrics) =
            train_models(&matrix, &labels, &GbdtParams::pm1(), &GbdtParams::pm2()).unwrap();
        // target standard deviation of the PM2 labels
        let ys: Vec<f64> = matrix
            .rows
            .iter()
            .filter_map(|r| {
                let x = labels.get(r.day, &r.sku).unwrap().x_star;
                (x > 0.0).then_some(x)
            })
            .collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let sd = (ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / ys.len() as f64).sqrt();
        let rmse = metrics.pm2_rmse.expect("validation slice present");
        assert!(rmse <= 0.05 * sd, "rmse {rmse} vs sd {sd}");
        assert!(metrics.pm1_auc.expect("both classes in validation") > 0.99);
        let _ = (pm1, pm2);
    }

    #[test]
    fn single_class_pm1_errors() {
        let (matrix, mut labels) = matrix_and_labels(4);
        for row in labels.rows.values_mut() {
            row.y_final = true;
        }
        assert!(matches!(
            train_models(&matrix, &labels, &GbdtParams::pm1(), &GbdtParams::pm2()),
            Err(PredictError::SingleClassPm1)
        ));
    }

    #[test]
    fn empty_pm2_errors() {
        let (matrix, mut labels) = matrix_and_labels(4);
        let mut flip = true;
        for row in labels.rows.values_mut() {
            row.x_star = 0.0;
            // keep PM1 two-class
            row.y_final = flip;
            flip = !flip;
        }
        assert!(matches!(
            train_models(&matrix, &labels, &GbdtParams::pm1(), &GbdtParams::pm2()),
            Err(PredictError::EmptyPm2)
        ));
    }

    #[test]
    fn adding_zero_rows_leaves_pm2_unchanged() {
        let (matrix, labels) = matrix_and_labels(10);
        let (_, pm2_a, _) =
            train_models(&matrix, &labels, &GbdtParams::pm1(), &GbdtParams::pm2()).unwrap();

        // graft extra x_star = 0 rows onto an existing day
        let mut matrix_b = matrix.clone();
        let mut labels_b = labels.clone();
        for s in 12..20u32 {
            let day = date("2023-06-03");
            matrix_b.rows.push(FeatureRow {
                day,
                sku: format!("S{s:02}"),
                cutoff: day - Duration::days(1),
                values: vec![0.5, 0.5],
            });
            labels_b.rows.insert(
                (day, format!("S{s:02}")),
                LabelRow { x_star: 0.0, y_star: false, y_cs: false, y_ts: false, y_final: false },
            );
        }
        let (_, pm2_b, _) =
            train_models(&matrix_b, &labels_b, &GbdtParams::pm1(), &GbdtParams::pm2()).unwrap();
        assert_eq!(
            serde_json::to_string(&pm2_a).unwrap(),
            serde_json::to_string(&pm2_b).unwrap()
        );
    }

    #[test]
    fn predictions_are_bounded_and_deterministic() {
        let (matrix, labels) = matrix_and_labels(15);
        let (pm1, pm2, _) =
            train_models(&matrix, &labels, &GbdtParams::pm1(), &GbdtParams::pm2()).unwrap();
        let pm0 = Pm0Output::default();
        let a = predict_models(&pm1, &pm2, &matrix, &pm0).unwrap();
        let b = predict_models(&pm1, &pm2, &matrix, &pm0).unwrap();
        assert_eq!(a, b);
        for row in &a.rows {
            assert!(row.y_hat > 0.0 && row.y_hat < 1.0);
            assert!(row.x_hat >= 0.0);
        }
    }

    #[test]
    fn prediction_ranks_track_ground_truth() {
        let (matrix, labels) = matrix_and_labels(30);
        let (pm1, pm2, _) =
            train_models(&matrix, &labels, &GbdtParams::pm1(), &GbdtParams::pm2()).unwrap();
        let bundle = predict_models(&pm1, &pm2, &matrix, &Pm0Output::default()).unwrap();
        // Kendall tau between y_hat and true selection across one day's rows
        let day = date("2023-06-20");
        let rows = bundle.day_rows(day);
        let mut concordant = 0.0;
        let mut discordant = 0.0;
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                if i == j {
                    continue;
                }
                let yi = labels.get(day, &rows[i].sku).unwrap().y_final as u8 as f64;
                let yj = labels.get(day, &rows[j].sku).unwrap().y_final as u8 as f64;
                if yi == yj {
                    continue;
                }
                let d = (rows[i].y_hat - rows[j].y_hat) * (yi - yj);
                if d > 0.0 {
                    concordant += 1.0;
                } else if d < 0.0 {
                    discordant += 1.0;
                }
            }
        }
        let tau = (concordant - discordant) / (concordant + discordant);
        assert!(tau >= 0.8, "tau {tau}");
        let _ = pm2;
    }

    #[test]
    fn predictions_csv_round_trip() {
        let (matrix, labels) = matrix_and_labels(10);
        let (pm1, pm2, _) =
            train_models(&matrix, &labels, &GbdtParams::pm1(), &GbdtParams::pm2()).unwrap();
        let bundle = predict_models(&pm1, &pm2, &matrix, &Pm0Output::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pred.csv");
        write_predictions_csv(&path, &bundle).unwrap();
        let loaded = read_predictions_csv(&path).unwrap();
        assert_eq!(loaded.rows.len(), bundle.rows.len());
        for (a, b) in loaded.rows.iter().zip(&bundle.rows) {
            assert_eq!(a.sku, b.sku);
            assert!((a.y_hat - b.y_hat).abs() < 1e-12);
        }
    }
}
