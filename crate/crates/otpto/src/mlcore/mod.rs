//! Self-contained numerical learning kernels: K-Means with min-max
//! normalization, a gradient-boosted regression-tree learner, and evaluation
//! metrics.

pub mod gbdt;
pub mod kmeans;
pub mod metrics;

use thiserror::Error;

pub use gbdt::{predict_gbdt, train_gbdt, GbdtModel, GbdtParams, Objective};
pub use kmeans::{kmeans, nearest_centroid, KMeansResult};
pub use metrics::{auc, eval_metric, rmse, Metric};

#[derive(Debug, Error)]
pub enum MlError {
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("input is empty")]
    EmptyInput,
    #[error("k must be >= 1")]
    ZeroClusters,
    #[error("ragged matrix: row {row} has {got} columns, expected {expected}")]
    RaggedMatrix { row: usize, expected: usize, got: usize },
    #[error("feature count mismatch: model expects {expected}, rows have {got}")]
    FeatureMismatch { expected: usize, got: usize },
    #[error("labels and scores have different lengths ({labels} vs {scores})")]
    LengthMismatch { labels: usize, scores: usize },
    #[error("AUC requires both classes to be present")]
    SingleClass,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("model io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("unsupported model file version {0}")]
    BadVersion(u32),
}

fn check_matrix(points: &[Vec<f64>]) -> Result<usize, MlError> {
    if points.is_empty() {
        return Err(MlError::EmptyInput);
    }
    let cols = points[0].len();
    for (row, p) in points.iter().enumerate() {
        if p.len() != cols {
            return Err(MlError::RaggedMatrix {
                row,
                expected: cols,
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(MlError::NonFinite);
        }
    }
    Ok(cols)
}

/// Per-column min-max scaling to [0,1]; constant columns map to 0.0.
pub fn min_max_normalize(points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, MlError> {
    let cols = check_matrix(points)?;
    let mut mins = vec![f64::INFINITY; cols];
    let mut maxs = vec![f64::NEG_INFINITY; cols];
    for p in points {
        for (c, &v) in p.iter().enumerate() {
            mins[c] = mins[c].min(v);
            maxs[c] = maxs[c].max(v);
        }
    }
    Ok(points
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(c, &v)| {
                    let range = maxs[c] - mins[c];
                    if range > 0.0 {
                        (v - mins[c]) / range
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_max_basic_column() {
        let m = vec![vec![2.0], vec![4.0], vec![6.0]];
        let n = min_max_normalize(&m).unwrap();
        assert_eq!(n, vec![vec![0.0], vec![0.5], vec![1.0]]);
    }

    #[test]
    fn min_max_constant_column_maps_to_zero() {
        let m = vec![vec![5.0], vec![5.0], vec![5.0]];
        let n = min_max_normalize(&m).unwrap();
        assert_eq!(n, vec![vec![0.0], vec![0.0], vec![0.0]]);
    }

    #[test]
    fn min_max_preserves_order_and_range() {
        let mut state = 99u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) as f64 / (1u64 << 31) as f64) * 20.0 - 10.0
        };
        let m: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| next()).collect()).collect();
        let n = min_max_normalize(&m).unwrap();
        for c in 0..3 {
            for i in 0..m.len() {
                assert!((0.0..=1.0).contains(&n[i][c]));
                for j in 0..m.len() {
                    assert_eq!(m[i][c] < m[j][c], n[i][c] < n[j][c]);
                }
            }
        }
    }

    #[test]
    fn min_max_idempotent_on_normalized_data() {
        let m = vec![vec![0.0, 1.0], vec![1.0, 0.25], vec![0.5, 0.0]];
        let n = min_max_normalize(&m).unwrap();
        assert_eq!(n, m);
    }

    #[test]
    fn min_max_rejects_non_finite() {
        let m = vec![vec![1.0], vec![f64::NAN]];
        assert!(matches!(min_max_normalize(&m), Err(MlError::NonFinite)));
    }
}
