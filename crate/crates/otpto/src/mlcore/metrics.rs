//! Evaluation metrics: AUC by rank statistic (ties get average ranks) and
//! RMSE.

use serde::{Deserialize, Serialize};

use super::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Auc,
    Rmse,
}

/// Area under the ROC curve via the Mann-Whitney rank statistic. Tied scores
/// receive average ranks. Labels must contain both classes.
pub fn auc(labels: &[f64], scores: &[f64]) -> Result<f64, MlError> {
    if labels.len() != scores.len() {
        return Err(MlError::LengthMismatch {
            labels: labels.len(),
            scores: scores.len(),
        });
    }
    if labels.is_empty() {
        return Err(MlError::EmptyInput);
    }
    let n_pos = labels.iter().filter(|&&y| y > 0.5).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MlError::SingleClass);
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        // average 1-based rank over the tie group [i, j]
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            if labels[k] > 0.5 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Root mean squared error.
pub fn rmse(labels: &[f64], scores: &[f64]) -> Result<f64, MlError> {
    if labels.len() != scores.len() {
        return Err(MlError::LengthMismatch {
            labels: labels.len(),
            scores: scores.len(),
        });
    }
    if labels.is_empty() {
        return Err(MlError::EmptyInput);
    }
    let mse = labels
        .iter()
        .zip(scores)
        .map(|(y, s)| (y - s) * (y - s))
        .sum::<f64>()
        / labels.len() as f64;
    Ok(mse.sqrt())
}

pub fn eval_metric(kind: Metric, labels: &[f64], scores: &[f64]) -> Result<f64, MlError> {
    match kind {
        Metric::Auc => auc(labels, scores),
        Metric::Rmse => rmse(labels, scores),
    }
}

/// O(n^2) pairwise AUC oracle: (#concordant + 0.5 * #tied) / #pairs.
/// Test support.
pub fn auc_pair_oracle(labels: &[f64], scores: &[f64]) -> Result<f64, MlError> {
    let mut pairs = 0.0;
    let mut score = 0.0;
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            if labels[i] > 0.5 && labels[j] <= 0.5 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    score += 1.0;
                } else if scores[i] == scores[j] {
                    score += 0.5;
                }
            }
        }
    }
    if pairs == 0.0 {
        return Err(MlError::SingleClass);
    }
    Ok(score / pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_ranking_has_auc_one() {
        let labels = [0.0, 0.0, 1.0, 1.0];
        let scores = [0.1, 0.2, 0.8, 0.9];
        assert_eq!(auc(&labels, &scores).unwrap(), 1.0);
    }

    #[test]
    fn rmse_zero_when_scores_equal_labels() {
        let y = [1.0, 2.0, 3.5];
        assert_eq!(rmse(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn auc_single_class_errors() {
        assert!(matches!(
            auc(&[1.0, 1.0], &[0.5, 0.6]),
            Err(MlError::SingleClass)
        ));
    }

    #[test]
    fn auc_matches_pair_oracle_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let labels: Vec<f64> = (0..50).map(|_| if rng.gen_bool(0.4) { 1.0 } else { 0.0 }).collect();
            if labels.iter().all(|&y| y == labels[0]) {
                continue;
            }
            // coarse scores force plenty of ties
            let scores: Vec<f64> = (0..50).map(|_| (rng.gen_range(0..8) as f64) / 8.0).collect();
            let fast = auc(&labels, &scores).unwrap();
            let slow = auc_pair_oracle(&labels, &scores).unwrap();
            assert!((fast - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let labels = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let scores = [0.2, 0.9, 0.1, 0.5, 0.5, 0.4];
        let transformed: Vec<f64> = scores.iter().map(|s| (3.0_f64 * s).exp()).collect();
        assert!(
            (auc(&labels, &scores).unwrap() - auc(&labels, &transformed).unwrap()).abs() < 1e-12
        );
    }
}
