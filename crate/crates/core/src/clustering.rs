//! Multi-start k-means over flattened daily periods.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeseries::Period;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("cannot form {k} clusters from {n} periods")]
    TooFewPeriods { k: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid k-means configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KMeansConfig {
    pub k: usize,
    /// Number of independent restarts; the lowest-SSD result wins.
    pub n_init: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Convergence threshold on the largest centroid coordinate shift.
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            n_init: 10_000,
            seed,
            max_iter: 300,
            tol: 1e-8,
        }
    }

    pub fn with_n_init(mut self, n_init: usize) -> Self {
        self.n_init = n_init;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Members per cluster.
    pub counts: Vec<usize>,
    /// Members per cluster over the number of clustered points.
    pub weights: Vec<f64>,
    pub ssd: f64,
}

impl ClusterResult {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }
}

/// One Lloyd run with its SSD recorded after every assignment step.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub result: ClusterResult,
    pub ssd_trace: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_dims(points: &[Vec<f64>], dim: usize) -> Result<(), ClusterError> {
    match points.iter().find(|p| p.len() != dim) {
        Some(p) => Err(ClusterError::DimensionMismatch {
            expected: dim,
            found: p.len(),
        }),
        None => Ok(()),
    }
}

/// Nearest centroid by squared Euclidean distance, ties to the lowest index.
pub fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Result<Vec<usize>, ClusterError> {
    let dim = centroids.first().map_or(0, Vec::len);
    check_dims(centroids, dim)?;
    check_dims(points, dim)?;
    Ok(points.iter().map(|p| nearest(p, centroids)).collect())
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn means(points: &[Vec<f64>], assignments: &[usize], k: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    // Running means are exact when all members coincide.
    let mut means = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        let n = counts[a] as f64;
        means[a].iter_mut().zip(p).for_each(|(m, x)| *m += (x - *m) / n);
    }
    (means, counts)
}

/// Centroid `j` becomes the mean of its members. An empty cluster is
/// re-seeded with the point farthest from its current centroid; several
/// empty clusters take successively farther-ranked distinct points.
pub fn update_centroids(
    points: &[Vec<f64>],
    assignments: &[usize],
    k: usize,
    previous: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let dim = points.first().map_or(0, Vec::len);
    let (mut centroids, counts) = means(points, assignments, k, dim);
    let empty: Vec<usize> = (0..k).filter(|&j| counts[j] == 0).collect();
    if !empty.is_empty() {
        let mut dist: Vec<f64> = points
            .iter()
            .zip(assignments)
            .map(|(p, &a)| sq_dist(p, &previous[a]))
            .collect();
        for j in empty {
            let far = argmax(&dist);
            centroids[j] = points[far].clone();
            dist[far] = f64::NEG_INFINITY;
        }
    }
    centroids
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Σ over points of the squared distance to the assigned centroid.
pub fn compute_ssd(points: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

/// Lloyd iterations from given initial centroids.
pub fn lloyd(points: &[Vec<f64>], init: Vec<Vec<f64>>, max_iter: usize, tol: f64) -> LloydRun {
    let k = init.len();
    let dim = points[0].len();
    let mut centroids = init;
    let mut assignments = assign(points, &centroids).expect("dimensions checked by caller");
    let mut trace = vec![compute_ssd(points, &centroids, &assignments)];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let next = update_centroids(points, &assignments, k, &centroids);
        let shift = centroids
            .iter()
            .zip(&next)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        centroids = next;
        assignments = assign(points, &centroids).expect("dimensions checked by caller");
        trace.push(compute_ssd(points, &centroids, &assignments));
        if shift < tol {
            break;
        }
    }

    // Final centroids are exact member means with no empty cluster.
    let (mut centroids, mut counts) = means(points, &assignments, k, dim);
    while let Some(j) = counts.iter().position(|&n| n == 0) {
        let dist: Vec<f64> = points
            .iter()
            .zip(&assignments)
            .map(|(p, &a)| if counts[a] > 1 { sq_dist(p, &centroids[a]) } else { f64::NEG_INFINITY })
            .collect();
        let far = argmax(&dist);
        assignments[far] = j;
        (centroids, counts) = means(points, &assignments, k, dim);
    }
    let ssd = compute_ssd(points, &centroids, &assignments);
    let n = points.len() as f64;
    LloydRun {
        result: ClusterResult {
            weights: counts.iter().map(|&c| c as f64 / n).collect(),
            centroids,
            assignments,
            counts,
            ssd,
        },
        ssd_trace: trace,
        iterations,
    }
}

fn validate(n: usize, config: &KMeansConfig) -> Result<(), ClusterError> {
    if config.k == 0 || config.n_init == 0 {
        return Err(ClusterError::InvalidConfig("k and n_init must be at least 1".into()));
    }
    if config.k > n {
        return Err(ClusterError::TooFewPeriods { k: config.k, n });
    }
    Ok(())
}

/// Forgy initialization for restart `r`: `k` distinct points drawn with a
/// generator on stream `r` of the configured seed.
pub fn forgy_init(points: &[Vec<f64>], k: usize, seed: u64, r: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    sample(&mut rng, points.len(), k).into_iter().map(|i| points[i].clone()).collect()
}

/// One restart, as run inside [`kmeans_points`].
pub fn single_restart(points: &[Vec<f64>], config: &KMeansConfig, r: usize) -> LloydRun {
    lloyd(points, forgy_init(points, config.k, config.seed, r), config.max_iter, config.tol)
}

/// Best-of-`n_init` k-means on raw vectors. Restarts run in parallel; the
/// lowest SSD wins, ties going to the lowest restart index, so the result
/// does not depend on scheduling.
pub fn kmeans_points(points: &[Vec<f64>], config: &KMeansConfig) -> Result<ClusterResult, ClusterError> {
    validate(points.len(), config)?;
    check_dims(points, points[0].len())?;
    let best = (0..config.n_init)
        .into_par_iter()
        .map(|r| (r, single_restart(points, config, r).result))
        .reduce_with(|a, b| {
            if b.1.ssd < a.1.ssd || (b.1.ssd == a.1.ssd && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("n_init >= 1");
    Ok(best.1)
}

/// k-means over periods, each flattened attribute-major to one vector.
pub fn kmeans_multistart(periods: &[Period], config: &KMeansConfig) -> Result<ClusterResult, ClusterError> {
    let points: Vec<Vec<f64>> = periods.iter().map(Period::flatten).collect();
    kmeans_points(&points, config)
}
