//! Seeded Lloyd's k-means with k-means++ initialization, used to fit the
//! per-stage residual codebooks.

use ndarray::{Array1, Array2, Axis};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MAX_ITERS: usize = 40;
const RESTARTS: u64 = 3;

/// Fit `k` centroids to the rows of `points`: best of several seeded
/// k-means++ / Lloyd runs by weighted total distortion, deterministic given
/// the seed. Row `i` contributes `weights[i]` to both the centroid
/// updates and the distortion objective. Quiet frames can be up-weighted so
/// codebooks minimize relative rather than absolute error.
pub fn kmeans_weighted(points: &Array2<f64>, weights: &[f64], k: usize, seed: u64) -> Array2<f64> {
    assert_eq!(weights.len(), points.nrows());
    let mut best: Option<(f64, Array2<f64>)> = None;
    for r in 0..RESTARTS {
        let c = kmeans_once(
            points,
            weights,
            k,
            seed.wrapping_add(r.wrapping_mul(0x9e37_79b9)),
        );
        let codes = assign_codes(points, &c);
        let distortion: f64 = codes
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let diff = &points.row(i) - &c.row(a);
                weights[i] * diff.dot(&diff)
            })
            .sum();
        if best.as_ref().is_none_or(|(d, _)| distortion < *d) {
            best = Some((distortion, c));
        }
    }
    best.expect("at least one restart").1
}

fn kmeans_once(points: &Array2<f64>, weights: &[f64], k: usize, seed: u64) -> Array2<f64> {
    let n = points.nrows();
    let d = points.ncols();
    assert!(n > 0 && k >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centroids = init_plus_plus(points, weights, k, &mut rng);
    let mut assignment = vec![usize::MAX; n];

    for _ in 0..MAX_ITERS {
        let changed = assign(points, &centroids, &mut assignment);
        // Recompute centroids as weighted means.
        let mut sums = Array2::<f64>::zeros((k, d));
        let mut counts = vec![0.0f64; k];
        for (i, &a) in assignment.iter().enumerate() {
            counts[a] += weights[i];
            let mut target = sums.row_mut(a);
            target.scaled_add(weights[i], &points.row(i));
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0.0 {
                let mut row = centroids.row_mut(c);
                row.assign(&(&sums.row(c) / count));
            }
            // Empty cluster: leave the centroid in place.
        }
        if !changed {
            break;
        }
    }
    centroids
}

/// Nearest-centroid index for every row, ties broken by lowest index.
pub fn assign_codes(points: &Array2<f64>, centroids: &Array2<f64>) -> Vec<usize> {
    let mut assignment = vec![usize::MAX; points.nrows()];
    assign(points, centroids, &mut assignment);
    assignment
}

fn assign(points: &Array2<f64>, centroids: &Array2<f64>, assignment: &mut [usize]) -> bool {
    // dist^2 = |x|^2 - 2 x.c + |c|^2; the |x|^2 term is constant per row.
    let dots = points.dot(&centroids.t()); // n x k
    let cnorm: Array1<f64> = centroids.axis_iter(Axis(0)).map(|c| c.dot(&c)).collect();
    let mut changed = false;
    for (i, row) in dots.axis_iter(Axis(0)).enumerate() {
        let mut best = 0usize;
        let mut best_score = f64::INFINITY;
        for c in 0..centroids.nrows() {
            let score = cnorm[c] - 2.0 * row[c];
            if score < best_score - 1e-12 {
                best_score = score;
                best = c;
            }
        }
        if assignment[i] != best {
            assignment[i] = best;
            changed = true;
        }
    }
    changed
}

fn init_plus_plus(
    points: &Array2<f64>,
    weights: &[f64],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Array2<f64> {
    let n = points.nrows();
    let d = points.ncols();
    let mut centroids = Array2::zeros((k, d));
    let first = rng_usize(rng, n);
    centroids.row_mut(0).assign(&points.row(first));

    let mut min_d2: Vec<f64> = (0..n)
        .map(|i| {
            let diff = &points.row(i) - &centroids.row(0);
            diff.dot(&diff)
        })
        .collect();

    for c in 1..k {
        let total: f64 = min_d2.iter().zip(weights).map(|(&d2, &w)| w * d2).sum();
        let pick = if total <= 1e-18 {
            // All points coincide with chosen centroids (e.g. a silence
            // corpus); any index works.
            rng_usize(rng, n)
        } else {
            WeightedIndex::new(
                min_d2
                    .iter()
                    .zip(weights)
                    .map(|(&d2, &w)| (w * d2).max(0.0)),
            )
            .map(|w| w.sample(rng))
            .unwrap_or_else(|_| rng_usize(rng, n))
        };
        centroids.row_mut(c).assign(&points.row(pick));
        for (i, slot) in min_d2.iter_mut().enumerate() {
            let diff = &points.row(i) - &centroids.row(c);
            let d2 = diff.dot(&diff);
            if d2 < *slot {
                *slot = d2;
            }
        }
    }
    centroids
}

fn rng_usize(rng: &mut ChaCha8Rng, n: usize) -> usize {
    use rand::Rng;
    rng.gen_range(0..n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn kmeans(points: &Array2<f64>, k: usize, seed: u64) -> Array2<f64> {
        kmeans_weighted(points, &vec![1.0; points.nrows()], k, seed)
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let points = Array2::from_shape_fn((200, 8), |_| rng.gen_range(-1.0..1.0));
        let a = kmeans(&points, 16, 42);
        let b = kmeans(&points, 16, 42);
        assert_eq!(a, b);
    }

    #[test]
    fn recovers_separated_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut pts = Vec::new();
        for c in 0..4 {
            for _ in 0..50 {
                let base = c as f64 * 10.0;
                pts.push([
                    base + rng.gen_range(-0.1..0.1),
                    base + rng.gen_range(-0.1..0.1),
                ]);
            }
        }
        let points = Array2::from_shape_fn((200, 2), |(i, j)| pts[i][j]);
        let centroids = kmeans(&points, 4, 0);
        let codes = assign_codes(&points, &centroids);
        // All points in a true cluster share an assigned code.
        for c in 0..4 {
            let first = codes[c * 50];
            assert!(codes[c * 50..(c + 1) * 50].iter().all(|&x| x == first));
        }
    }

    #[test]
    fn zero_data_yields_zero_centroids() {
        let points = Array2::zeros((50, 4));
        let centroids = kmeans(&points, 8, 0);
        assert!(centroids.iter().all(|&v| v == 0.0));
    }
}
