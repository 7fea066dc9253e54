//! Paired t-test and Holm step-down adjustment.

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub mean_diff: f64,
}

/// Two-sided paired t-test on equal-length samples.
///
/// Zero-variance differences are decided directly: p = 0 when the mean
/// difference is nonzero (t reported as ±inf) and p = 1 when it is zero.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::UnequalSampleLength {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(MetricsError::TooFewSamples {
            min: 2,
            got: a.len(),
        });
    }
    let n = a.len() as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
    let df = n - 1.0;
    if var == 0.0 {
        return Ok(if mean == 0.0 {
            PairedTTest {
                t: 0.0,
                df,
                p: 1.0,
                mean_diff: mean,
            }
        } else {
            PairedTTest {
                t: f64::INFINITY.copysign(mean),
                df,
                p: 0.0,
                mean_diff: mean,
            }
        });
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(PairedTTest {
        t,
        df,
        p: p.clamp(0.0, 1.0),
        mean_diff: mean,
    })
}

/// Holm step-down adjustment, returned in the input order.
///
/// Sorted ascending, `adjusted_(i) = max_{j ≤ i} min(1, (m − j + 1)·p_(j))`.
pub fn holm_adjust(pvalues: &[f64]) -> Result<Vec<f64>, MetricsError> {
    for &p in pvalues {
        if !(0.0..=1.0).contains(&p) {
            return Err(MetricsError::PValueOutOfRange(p));
        }
    }
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| pvalues[i].total_cmp(&pvalues[j]).then(i.cmp(&j)));
    let mut adjusted = vec![0.0; m];
    let mut running_max: f64 = 0.0;
    for (rank, &idx) in order.iter().enumerate() {
        let stepped = ((m - rank) as f64 * pvalues[idx]).min(1.0);
        running_max = running_max.max(stepped);
        adjusted[idx] = running_max;
    }
    Ok(adjusted)
}
