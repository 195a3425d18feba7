//! Lloyd's algorithm with distance-weighted (k-means++ style) seeding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_matrix, MlError};

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid (ties resolved to the lowest index).
pub fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Lloyd iterations from seeded distance-weighted initialization.
///
/// The effective cluster count is min(k, number of distinct rows). Empty
/// clusters are reseeded to the point farthest from its current centroid.
/// Stops when the maximum centroid shift drops below `tol` or after
/// `max_iter` iterations.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<KMeansResult, MlError> {
    check_matrix(points)?;
    if k == 0 {
        return Err(MlError::ZeroClusters);
    }
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for p in points {
        if !distinct.iter().any(|d| *d == p) {
            distinct.push(p);
        }
    }
    let k = k.min(distinct.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // distance-weighted seeding
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..points.len())].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            // all points coincide with current centroids; cannot happen while
            // centroids.len() < distinct rows, but guard anyway
            break;
        };
        centroids.push(points[next].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, centroids.last().unwrap()));
        }
    }
    let k = centroids.len();

    let mut assignments = vec![0usize; points.len()];
    for _ in 0..max_iter {
        // assignment step
        for (i, p) in points.iter().enumerate() {
            assignments[i] = nearest_centroid(p, &centroids);
        }

        // update step
        let cols = points[0].len();
        let mut sums = vec![vec![0.0; cols]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[assignments[i]] += 1;
            for (c, &v) in p.iter().enumerate() {
                sums[assignments[i]][c] += v;
            }
        }
        let mut new_centroids = centroids.clone();
        for c in 0..k {
            if counts[c] > 0 {
                for col in 0..cols {
                    new_centroids[c][col] = sums[c][col] / counts[c] as f64;
                }
            } else {
                // reseed to the farthest point from its assigned centroid
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        sq_dist(&points[a], &centroids[assignments[a]])
                            .total_cmp(&sq_dist(&points[b], &centroids[assignments[b]]))
                    })
                    .unwrap();
                new_centroids[c] = points[far].clone();
            }
        }
        let shift = centroids
            .iter()
            .zip(&new_centroids)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0f64, f64::max);
        centroids = new_centroids;
        if shift < tol {
            break;
        }
    }
    // final assignment against the converged centroids
    let mut inertia = 0.0;
    for (i, p) in points.iter().enumerate() {
        let a = nearest_centroid(p, &centroids);
        assignments[i] = a;
        inertia += sq_dist(p, &centroids[a]);
    }

    Ok(KMeansResult {
        assignments,
        centroids,
        inertia,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn k_one_gives_column_means() {
        let pts = vec![vec![0.0, 2.0], vec![2.0, 4.0], vec![4.0, 6.0]];
        let r = kmeans(&pts, 1, 0, 100, 1e-9).unwrap();
        assert_eq!(r.centroids.len(), 1);
        assert!((r.centroids[0][0] - 2.0).abs() < 1e-12);
        assert!((r.centroids[0][1] - 4.0).abs() < 1e-12);
        assert!(r.assignments.iter().all(|&a| a == 0));
    }

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0], vec![5.0]];
        let r = kmeans(&pts, 4, 1, 100, 1e-9).unwrap();
        assert!(r.inertia < 1e-18);
        let mut seen = r.assignments.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn effective_k_capped_by_distinct_rows() {
        let pts = vec![vec![1.0], vec![1.0], vec![2.0]];
        let r = kmeans(&pts, 5, 2, 100, 1e-9).unwrap();
        assert_eq!(r.centroids.len(), 2);
    }

    #[test]
    fn k_zero_and_non_finite_error() {
        assert!(kmeans(&[vec![1.0]], 0, 0, 10, 1e-9).is_err());
        assert!(kmeans(&[vec![f64::INFINITY]], 1, 0, 10, 1e-9).is_err());
    }

    #[test]
    fn separated_blobs_are_partitioned_and_beat_every_other_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut pts = Vec::new();
        for _ in 0..6 {
            pts.push(vec![rng.gen::<f64>() * 0.1, rng.gen::<f64>() * 0.1]);
        }
        for _ in 0..6 {
            pts.push(vec![10.0 + rng.gen::<f64>() * 0.1, 10.0 + rng.gen::<f64>() * 0.1]);
        }
        let r = kmeans(&pts, 2, 7, 200, 1e-12).unwrap();
        let first = r.assignments[0];
        assert!(r.assignments[..6].iter().all(|&a| a == first));
        assert!(r.assignments[6..].iter().all(|&a| a != first));

        // exhaustive 2-partition oracle for n = 12
        let n = pts.len();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << n) - 1 {
            let mut inertia = 0.0;
            for side in 0..2 {
                let members: Vec<usize> = (0..n)
                    .filter(|&i| ((mask >> i) & 1) as usize == side)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let mut mean = vec![0.0; 2];
                for &i in &members {
                    mean[0] += pts[i][0];
                    mean[1] += pts[i][1];
                }
                mean[0] /= members.len() as f64;
                mean[1] /= members.len() as f64;
                for &i in &members {
                    inertia += sq_dist(&pts[i], &mean);
                }
            }
            best = best.min(inertia);
        }
        assert!(r.inertia <= best + 1e-9);
    }

    #[test]
    fn inertia_non_increasing_across_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let mut prev = f64::INFINITY;
        for iters in 1..8 {
            let r = kmeans(&pts, 4, 3, iters, 0.0).unwrap();
            assert!(r.inertia <= prev + 1e-9, "iter {iters}");
            prev = r.inertia;
        }
    }
}
