//! Kozachenko–Leonenko k-nearest-neighbor differential entropy, in nats.
//!
//! `H = ψ(n) − ψ(k) + ln c_d + (d/n)·Σ ln ε_i`, where `ε_i` is twice the
//! Euclidean distance from point `i` to its k-th nearest neighbor and
//! `c_d = V_d / 2^d` is the unit-ball volume rescaled to that diameter
//! convention (Kraskov et al.'s normalization; with it the estimator is
//! calibrated, e.g. ½·ln(2πe) for a standard normal). Zero distances (tied
//! points) are nudged to the smallest positive double before the log, so
//! duplicated points drive the estimate toward −∞ instead of producing NaN.

use serde::Serialize;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::parallel;

use super::CurationError;

/// Default neighbor count, matching the usual k-NN entropy toolkit default.
pub const DEFAULT_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMethod {
    Plain,
    Jackknife,
}

/// An entropy estimate in nats. `standard_error` is populated by the
/// jackknife estimator only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub standard_error: Option<f64>,
    pub k: usize,
    pub n: usize,
    pub method: EntropyMethod,
}

/// Row-major point set with precomputed shape, shared by the entropy paths.
pub(super) struct PointSet {
    pub data: Vec<f64>,
    pub n: usize,
    pub d: usize,
}

impl PointSet {
    pub fn from_vecs(points: &[Vec<f64>]) -> Result<Self, CurationError> {
        let n = points.len();
        if n == 0 {
            return Err(CurationError::TooFewPoints { min: 1, got: 0 });
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(CurationError::DimensionMismatch);
        }
        let mut data = Vec::with_capacity(n * d);
        for p in points {
            for &v in p {
                if !v.is_finite() {
                    return Err(CurationError::NonFinite);
                }
                data.push(v);
            }
        }
        Ok(Self { data, n, d })
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

#[inline]
pub(super) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let diff = x - y;
        acc += diff * diff;
    }
    acc
}

/// k-th smallest entry of `dists` (1-indexed k), consuming the buffer.
#[inline]
fn kth_smallest(dists: &mut [f64], k: usize) -> f64 {
    let (_, kth, _) = dists.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

/// `ln(V_d / 2^d)`: the Euclidean unit-ball volume under the ε = 2·distance
/// convention.
fn ln_ball_constant(d: usize) -> f64 {
    let half_d = d as f64 / 2.0;
    half_d * std::f64::consts::PI.ln() - ln_gamma(half_d + 1.0) - d as f64 * std::f64::consts::LN_2
}

fn ln_epsilon(sq_radius: f64) -> f64 {
    let eps = 2.0 * sq_radius.sqrt();
    let eps = if eps > 0.0 { eps } else { f64::from_bits(1) };
    eps.ln()
}

/// KL estimate over the points whose indices are in `retained` (ascending).
/// When `sq_matrix` is provided it holds the full n×n squared-distance matrix
/// and distances are looked up instead of recomputed.
pub(super) fn kl_estimate_subset(
    points: &PointSet,
    k: usize,
    retained: &[usize],
    sq_matrix: Option<&[f64]>,
) -> f64 {
    let m = retained.len();
    let d = points.d;
    let ln_eps_sum: f64 = retained
        .iter()
        .map(|&i| {
            let mut dists = Vec::with_capacity(m - 1);
            match sq_matrix {
                Some(matrix) => {
                    let row = &matrix[i * points.n..(i + 1) * points.n];
                    dists.extend(retained.iter().filter(|&&j| j != i).map(|&j| row[j]));
                }
                None => {
                    let a = points.row(i);
                    dists.extend(
                        retained
                            .iter()
                            .filter(|&&j| j != i)
                            .map(|&j| sq_dist(a, points.row(j))),
                    );
                }
            }
            ln_epsilon(kth_smallest(&mut dists, k))
        })
        .sum();
    digamma(m as f64) - digamma(k as f64) + ln_ball_constant(d) + (d as f64) * ln_eps_sum / m as f64
}

pub(super) fn validate_entropy_input(n: usize, k: usize) -> Result<(), CurationError> {
    if k == 0 {
        return Err(CurationError::InvalidK);
    }
    if n < k + 1 {
        return Err(CurationError::TooFewPoints { min: k + 1, got: n });
    }
    Ok(())
}

/// Plain Kozachenko–Leonenko estimate over all points.
pub fn knn_entropy(points: &[Vec<f64>], k: usize) -> Result<EntropyEstimate, CurationError> {
    let set = PointSet::from_vecs(points)?;
    validate_entropy_input(set.n, k)?;
    let n = set.n;
    let d = set.d;

    let ln_eps = parallel::map_indexed(n, |i| {
        let a = set.row(i);
        let mut dists = Vec::with_capacity(n - 1);
        for j in 0..n {
            if j != i {
                dists.push(sq_dist(a, set.row(j)));
            }
        }
        ln_epsilon(kth_smallest(&mut dists, k))
    });
    let value = digamma(n as f64) - digamma(k as f64)
        + ln_ball_constant(d)
        + (d as f64) * ln_eps.iter().sum::<f64>() / n as f64;

    Ok(EntropyEstimate {
        value,
        standard_error: None,
        k,
        n,
        method: EntropyMethod::Plain,
    })
}
