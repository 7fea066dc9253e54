//! Delete-d jackknife resampling: bias-corrected estimates and standard
//! errors from leave-one-fold-out replicates.
//!
//! Points are partitioned into `groups` folds (sizes differing by at most
//! one) by a seeded shuffle. The bias-corrected estimate is
//! `g·t_all − (g−1)·mean(t_(−j))` and the standard error is
//! `sqrt((g−1)/g · Σ_j (t_(−j) − t̄)²)`. For a linear statistic and equal
//! fold sizes the correction is exact.

use rand::seq::SliceRandom;

use crate::parallel;
use crate::rng::seeded_rng;

use super::entropy::{kl_estimate_subset, validate_entropy_input, PointSet};
use super::{CurationError, EntropyEstimate, EntropyMethod};

/// Default number of jackknife sub-samples.
pub const DEFAULT_GROUPS: usize = 300;

/// Above this point count the squared-distance matrix is no longer cached
/// for jackknife entropy (quadratic memory), and each fold recomputes
/// distances instead. Both paths produce identical values.
const MATRIX_CACHE_LIMIT: usize = 2048;

/// A jackknife run: the bias-corrected estimate, its standard error, the
/// plug-in estimate on all points, and the per-fold replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Jackknife {
    pub estimate: f64,
    pub standard_error: f64,
    pub full: f64,
    pub fold_estimates: Vec<f64>,
}

/// Partitions `0..n` into `groups` near-equal folds by seeded shuffle.
pub fn jackknife_folds(
    n: usize,
    groups: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, CurationError> {
    if groups < 2 || groups > n {
        return Err(CurationError::GroupsOutOfRange { groups, n });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut seeded_rng(seed));
    let base = n / groups;
    let remainder = n % groups;
    let mut folds = Vec::with_capacity(groups);
    let mut offset = 0;
    for j in 0..groups {
        let size = base + usize::from(j < remainder);
        folds.push(indices[offset..offset + size].to_vec());
        offset += size;
    }
    Ok(folds)
}

/// Runs the jackknife for an arbitrary statistic over point indices.
///
/// The statistic receives retained indices in ascending order, both for the
/// full set and for every leave-one-fold-out replicate.
pub fn jackknife<F>(
    n: usize,
    groups: usize,
    seed: u64,
    statistic: F,
) -> Result<Jackknife, CurationError>
where
    F: Fn(&[usize]) -> f64 + Sync + Send,
{
    let folds = jackknife_folds(n, groups, seed)?;
    let all: Vec<usize> = (0..n).collect();
    let full = statistic(&all);

    let fold_estimates = parallel::map_slice(&folds, |fold| {
        let mut out = vec![true; n];
        for &i in fold {
            out[i] = false;
        }
        let retained: Vec<usize> = (0..n).filter(|&i| out[i]).collect();
        statistic(&retained)
    });

    let g = groups as f64;
    let mean = fold_estimates.iter().sum::<f64>() / g;
    let estimate = g * full - (g - 1.0) * mean;
    let variance = fold_estimates
        .iter()
        .map(|t| (t - mean) * (t - mean))
        .sum::<f64>()
        * (g - 1.0)
        / g;
    Ok(Jackknife {
        estimate,
        standard_error: variance.sqrt(),
        full,
        fold_estimates,
    })
}

/// Jackknifed Kozachenko–Leonenko entropy: the KL estimator evaluated on
/// every leave-one-fold-out subset, bias-corrected, with standard error.
pub fn jackknife_entropy(
    points: &[Vec<f64>],
    k: usize,
    groups: usize,
    seed: u64,
) -> Result<EntropyEstimate, CurationError> {
    let set = PointSet::from_vecs(points)?;
    let n = set.n;
    if groups < 2 || groups > n {
        return Err(CurationError::GroupsOutOfRange { groups, n });
    }
    // every retained subset must still satisfy the estimator precondition
    let max_fold = n / groups + usize::from(n % groups > 0);
    validate_entropy_input(n - max_fold, k)?;

    let sq_matrix = if n <= MATRIX_CACHE_LIMIT {
        let rows = parallel::map_indexed(n, |i| {
            let a = set.row(i);
            (0..n)
                .map(|j| super::entropy::sq_dist(a, set.row(j)))
                .collect::<Vec<f64>>()
        });
        Some(rows.concat())
    } else {
        None
    };

    let result = jackknife(n, groups, seed, |retained| {
        kl_estimate_subset(&set, k, retained, sq_matrix.as_deref())
    })?;

    Ok(EntropyEstimate {
        value: result.estimate,
        standard_error: Some(result.standard_error),
        k,
        n,
        method: EntropyMethod::Jackknife,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curation::knn_entropy;
    use crate::rng::seeded_rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn folds_partition_the_indices() {
        let folds = jackknife_folds(103, 10, 5).unwrap();
        assert_eq!(folds.len(), 10);
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes.first(), Some(&10));
        assert_eq!(sizes.last(), Some(&11));
        let mut all: Vec<usize> = folds.into_iter().flatten().collect();
        all.sort_unstable();
        assert_eq!(all, (0..103).collect::<Vec<_>>());
    }

    #[test]
    fn folds_are_seed_deterministic() {
        assert_eq!(
            jackknife_folds(50, 7, 3).unwrap(),
            jackknife_folds(50, 7, 3).unwrap()
        );
        assert_ne!(
            jackknife_folds(50, 7, 3).unwrap(),
            jackknife_folds(50, 7, 4).unwrap()
        );
    }

    #[test]
    fn linear_statistic_is_reproduced_exactly() {
        // sample mean as the plugged statistic; 600 points over 300 folds
        // gives equal fold sizes, where the correction is exact.
        let mut rng = seeded_rng(21);
        let values: Vec<f64> = (0..600).map(|_| rng.random::<f64>() * 10.0).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let jk = jackknife(values.len(), 300, 17, |retained| {
            retained.iter().map(|&i| values[i]).sum::<f64>() / retained.len() as f64
        })
        .unwrap();
        assert!(
            (jk.estimate - mean).abs() < 1e-12,
            "{} vs {mean}",
            jk.estimate
        );
    }

    #[test]
    fn delete_one_corrects_the_biased_variance_exactly() {
        // the delete-1 jackknife of the divide-by-N variance is the
        // divide-by-(N−1) variance
        let mut rng = seeded_rng(2);
        let values: Vec<f64> = (0..100)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let biased = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let unbiased = biased * n / (n - 1.0);
        let jk = jackknife(values.len(), values.len(), 5, |retained| {
            let m = retained.len() as f64;
            let mu = retained.iter().map(|&i| values[i]).sum::<f64>() / m;
            retained
                .iter()
                .map(|&i| (values[i] - mu) * (values[i] - mu))
                .sum::<f64>()
                / m
        })
        .unwrap();
        assert!((jk.estimate - unbiased).abs() < 1e-12);
        assert!((jk.full - biased).abs() < 1e-15);
    }

    #[test]
    fn groups_out_of_range_is_rejected() {
        let points: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        assert!(matches!(
            jackknife_entropy(&points, 3, 1, 0),
            Err(CurationError::GroupsOutOfRange { .. })
        ));
        assert!(matches!(
            jackknife_entropy(&points, 3, 11, 0),
            Err(CurationError::GroupsOutOfRange { .. })
        ));
    }

    #[test]
    fn jackknife_entropy_tracks_the_plain_estimate() {
        let mut rng = seeded_rng(33);
        let points: Vec<Vec<f64>> = (0..400)
            .map(|_| vec![rng.sample::<f64, _>(StandardNormal)])
            .collect();
        let plain = knn_entropy(&points, 3).unwrap();
        let jk = jackknife_entropy(&points, 3, 100, 9).unwrap();
        assert_eq!(jk.method, EntropyMethod::Jackknife);
        let se = jk.standard_error.unwrap();
        assert!(se >= 0.0);
        assert!(
            (jk.value - plain.value).abs() < 0.2,
            "jackknife {} vs plain {}",
            jk.value,
            plain.value
        );
    }

    #[test]
    fn matrix_and_recompute_paths_agree() {
        // exercise kl_estimate_subset both with and without the cache
        let mut rng = seeded_rng(8);
        let points: Vec<Vec<f64>> = (0..60)
            .map(|_| {
                (0..2)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        let set = PointSet::from_vecs(&points).unwrap();
        let matrix: Vec<f64> = (0..set.n)
            .flat_map(|i| {
                (0..set.n)
                    .map(|j| super::super::entropy::sq_dist(set.row(i), set.row(j)))
                    .collect::<Vec<_>>()
            })
            .collect();
        let retained: Vec<usize> = (0..set.n).filter(|i| i % 3 != 0).collect();
        let with = kl_estimate_subset(&set, 3, &retained, Some(&matrix));
        let without = kl_estimate_subset(&set, 3, &retained, None);
        assert_eq!(with.to_bits(), without.to_bits());
    }
}
