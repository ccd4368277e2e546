//! Rank-based tests and correlation primitives.
//!
//! The rank-sum test switches from exact enumeration to a tie-corrected
//! normal approximation once the pooled sample exceeds
//! [`EXACT_RANK_SUM_MAX`] or contains ties. The signed-rank test enumerates
//! sign assignments up to [`EXACT_SIGNED_RANK_MAX`] non-zero differences.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub const EXACT_RANK_SUM_MAX: usize = 16;
pub const EXACT_SIGNED_RANK_MAX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSumResult {
    /// U statistic of the first sample.
    pub u_statistic: f64,
    pub p_value: f64,
    pub method: TestMethod,
    pub n1: usize,
    pub n2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedRankResult {
    /// Sum of ranks of the positive differences.
    pub w_plus: f64,
    pub p_value: f64,
    pub method: TestMethod,
    /// Number of non-zero differences.
    pub n: usize,
}

/// Midranks (1-based) of `values` and the tie term Σ(t³ − t) over tie groups.
pub fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

fn two_sided_normal_p(deviation: f64, sd: f64) -> f64 {
    if !(sd > 0.0) {
        return 1.0;
    }
    // continuity correction
    let z = (deviation.abs() - 0.5).max(0.0) / sd;
    erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

fn check_nonempty(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Stats("rank-sum test needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Stats("rank-sum test input contains non-finite values".into()));
    }
    Ok(())
}

/// Rank sum of the first sample, the tie term, and U of the first sample.
fn rank_sum_parts(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_term) = midranks(&pooled);
    let r1: f64 = ranks[..a.len()].iter().sum();
    let n1 = a.len() as f64;
    (r1 - n1 * (n1 + 1.0) / 2.0, tie_term)
}

/// Two-sided Mann-Whitney U test. Exact when the pooled sample is small and
/// tie-free, otherwise normal approximation.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<RankSumResult> {
    check_nonempty(a, b)?;
    let (_, tie_term) = rank_sum_parts(a, b);
    if a.len() + b.len() <= EXACT_RANK_SUM_MAX && tie_term == 0.0 {
        mann_whitney_u_exact(a, b)
    } else {
        mann_whitney_u_approx(a, b)
    }
}

/// Exact null distribution of U by counting rank subsets. Ties are rejected.
pub fn mann_whitney_u_exact(a: &[f64], b: &[f64]) -> Result<RankSumResult> {
    check_nonempty(a, b)?;
    let (u, tie_term) = rank_sum_parts(a, b);
    if tie_term != 0.0 {
        return Err(Error::Stats("exact rank-sum test requires tie-free samples".into()));
    }
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    if n > 60 {
        return Err(Error::Stats(format!(
            "exact rank-sum enumeration is limited to 60 observations, got {n}"
        )));
    }
    // counts[k][s]: subsets of size k from the ranks seen so far with U-contribution s,
    // where a subset {r_1 < .. < r_k} contributes Σ r_i − k(k+1)/2.
    let max_u = n1 * n2;
    let mut counts = vec![vec![0f64; max_u + 1]; n1 + 1];
    counts[0][0] = 1.0;
    for rank in 1..=n {
        for k in (1..=n1.min(rank)).rev() {
            // choosing `rank` as the k-th smallest adds rank − k to U
            let shift = rank - k;
            if shift > n2 {
                continue;
            }
            for s in (shift..=max_u).rev() {
                let prev = counts[k - 1][s - shift];
                if prev != 0.0 {
                    counts[k][s] += prev;
                }
            }
        }
    }
    let dist = &counts[n1];
    let total: f64 = dist.iter().sum();
    let u_int = u.round() as usize;
    let lower: f64 = dist[..=u_int].iter().sum();
    let upper: f64 = dist[u_int..].iter().sum();
    let p = (2.0 * lower.min(upper) / total).min(1.0);
    Ok(RankSumResult {
        u_statistic: u,
        p_value: p,
        method: TestMethod::Exact,
        n1,
        n2,
    })
}

/// Normal approximation with tie and continuity corrections.
pub fn mann_whitney_u_approx(a: &[f64], b: &[f64]) -> Result<RankSumResult> {
    check_nonempty(a, b)?;
    let (u, tie_term) = rank_sum_parts(a, b);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let mean = n1 * n2 / 2.0;
    let var = if n > 1.0 {
        n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))
    } else {
        0.0
    };
    Ok(RankSumResult {
        u_statistic: u,
        p_value: two_sided_normal_p(u - mean, var.max(0.0).sqrt()),
        method: TestMethod::NormalApprox,
        n1: a.len(),
        n2: b.len(),
    })
}

/// Two-sided Wilcoxon signed-rank test on paired differences. Zero
/// differences are dropped before ranking.
pub fn wilcoxon_signed_rank(diffs: &[f64]) -> Result<SignedRankResult> {
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::Stats("signed-rank input contains non-finite values".into()));
    }
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::Stats("signed-rank test needs at least one non-zero difference".into()));
    }
    let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let (ranks, tie_term) = midranks(&abs);
    let w_plus: f64 = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let n = nonzero.len();
    if n <= EXACT_SIGNED_RANK_MAX {
        // every sign assignment is equally likely under the null
        let eps = 1e-9;
        let (mut le, mut ge) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if w <= w_plus + eps {
                le += 1;
            }
            if w >= w_plus - eps {
                ge += 1;
            }
        }
        let total = (1u64 << n) as f64;
        let p = (2.0 * le.min(ge) as f64 / total).min(1.0);
        return Ok(SignedRankResult {
            w_plus,
            p_value: p,
            method: TestMethod::Exact,
            n,
        });
    }
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    Ok(SignedRankResult {
        w_plus,
        p_value: two_sided_normal_p(w_plus - mean, var.max(0.0).sqrt()),
        method: TestMethod::NormalApprox,
        n,
    })
}

/// Sample Pearson correlation. Constant inputs are an error.
pub fn pearson_corr(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Stats("correlation needs at least two observations".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Stats("correlation undefined for a constant input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation against a 0/1 encoding of `labels`.
pub fn point_biserial(x: &[f64], labels: &[bool]) -> Result<f64> {
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
    pearson_corr(x, &y)
}

/// Symmetric matrix of pairwise rank-sum p-values between named groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl PValueMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// CSV with group names on both axes, two decimals.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("group");
        for name in &self.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.values) {
            out.push_str(name);
            for v in row {
                out.push_str(&format!(",{v:.2}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv_string().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

pub fn ranksum_matrix(groups: &[(String, Vec<f64>)]) -> Result<PValueMatrix> {
    if groups.is_empty() {
        return Err(Error::Stats("rank-sum matrix needs at least one group".into()));
    }
    let k = groups.len();
    let mut values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let p = mann_whitney_u(&groups[i].1, &groups[j].1)?.p_value;
            values[i][j] = p;
            values[j][i] = p;
        }
    }
    Ok(PValueMatrix {
        names: groups.iter().map(|(n, _)| n.clone()).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Counts, over every split of the pooled values into groups of the
    /// original sizes, how many give a U at least as extreme as observed.
    fn brute_force_exact_p(a: &[f64], b: &[f64]) -> f64 {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let n = pooled.len();
        let n1 = a.len();
        let u_of = |mask: u32| -> f64 {
            let mut u = 0.0;
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    for j in 0..n {
                        if mask >> j & 1 == 0 && pooled[i] > pooled[j] {
                            u += 1.0;
                        }
                    }
                }
            }
            u
        };
        let observed = u_of((1u32 << n1) - 1);
        let (mut le, mut ge, mut total) = (0u32, 0u32, 0u32);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != n1 {
                continue;
            }
            total += 1;
            let u = u_of(mask);
            if u <= observed {
                le += 1;
            }
            if u >= observed {
                ge += 1;
            }
        }
        (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
    }

    #[test]
    fn exact_rank_sum_known_value() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u_statistic, 0.0);
        assert_eq!(r.method, TestMethod::Exact);
        assert!((r.p_value - 0.1).abs() < 1e-15);
        assert!((brute_force_exact_p(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn identical_samples_give_unit_p() {
        let a = [0.3, 1.2, 5.0, 2.2, 0.3, 9.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert!((r.p_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_matches_brute_force_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n1 = rng.random_range(1..6);
            let n2 = rng.random_range(1..6);
            let a: Vec<f64> = (0..n1).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..n2).map(|_| rng.random::<f64>() + 0.2).collect();
            let r = mann_whitney_u_exact(&a, &b).unwrap();
            assert_eq!(r.p_value, brute_force_exact_p(&a, &b));
        }
    }

    #[test]
    fn exact_rejects_ties() {
        assert!(mann_whitney_u_exact(&[1.0, 2.0], &[2.0, 3.0]).is_err());
        // the dispatcher falls back to the approximation instead
        let r = mann_whitney_u(&[1.0, 2.0], &[2.0, 3.0]).unwrap();
        assert_eq!(r.method, TestMethod::NormalApprox);
    }

    #[test]
    fn empty_sample_is_error() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
        assert!(mann_whitney_u(&[1.0], &[]).is_err());
    }

    #[test]
    fn u_statistics_are_complementary() {
        let a = [1.0, 3.0, 3.0, 7.0, 2.5];
        let b = [3.0, 0.5, 8.0];
        let ab = mann_whitney_u(&a, &b).unwrap();
        let ba = mann_whitney_u(&b, &a).unwrap();
        assert!((ab.u_statistic + ba.u_statistic - 15.0).abs() < 1e-12);
        assert!((ab.p_value - ba.p_value).abs() < 1e-12);
    }

    #[test]
    fn signed_rank_all_positive() {
        let r = wilcoxon_signed_rank(&[0.5, 1.0, 1.5, 2.0, 2.5, 3.0]).unwrap();
        assert_eq!(r.method, TestMethod::Exact);
        assert!((r.p_value - 2.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn signed_rank_symmetric_pairs() {
        let r = wilcoxon_signed_rank(&[2.0, -2.0, 1.0, -1.0, 3.0, -3.0]).unwrap();
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signed_rank_zero_diffs() {
        assert!(wilcoxon_signed_rank(&[0.0, 0.0]).is_err());
        // zeros are dropped
        let with_zero = wilcoxon_signed_rank(&[0.0, 1.0, 2.0, -0.5]).unwrap();
        let without = wilcoxon_signed_rank(&[1.0, 2.0, -0.5]).unwrap();
        assert_eq!(with_zero, without);
    }

    #[test]
    fn signed_rank_normal_path_matches_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let diffs: Vec<f64> = (0..50).map(|_| rng.random::<f64>() - 0.3).collect();
        let r = wilcoxon_signed_rank(&diffs).unwrap();
        assert_eq!(r.method, TestMethod::NormalApprox);

        // independent recomputation: rank |d| by counting, no ties in continuous draws
        let n = diffs.len() as f64;
        let mut w = 0.0;
        for d in &diffs {
            if *d > 0.0 {
                let rank = 1.0 + diffs.iter().filter(|e| e.abs() < d.abs()).count() as f64;
                w += rank;
            }
        }
        let mean = n * (n + 1.0) / 4.0;
        let sd = (n * (n + 1.0) * (2.0 * n + 1.0) / 24.0).sqrt();
        let z = ((w - mean).abs() - 0.5) / sd;
        let p = 2.0 * (1.0 - statrs::distribution::ContinuousCDF::cdf(
            &statrs::distribution::Normal::new(0.0, 1.0).unwrap(),
            z,
        ));
        assert!((r.w_plus - w).abs() < 1e-9);
        assert!((r.p_value - p).abs() < 1e-6);
    }

    #[test]
    fn pearson_basic_cases() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((pearson_corr(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_corr(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson_corr(&x, &[1.0; 10]).is_err());
        assert!(pearson_corr(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn pearson_matches_direct_formula() {
        let x = [1.2, 3.4, 0.5, 7.7, 2.0, 9.1, 4.4, 6.0, 5.5, 0.1];
        let y = [2.0, 1.0, 0.7, 8.0, 3.3, 7.5, 4.0, 6.6, 4.1, 1.9];
        // textbook single-pass form
        let n = 10.0;
        let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|a| a * a).sum();
        let r = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
        assert!((pearson_corr(&x, &y).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn ranksum_matrix_shape_and_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let groups: Vec<(String, Vec<f64>)> = (0..3)
            .map(|g| {
                let v = (0..25).map(|_| rng.random::<f64>() + g as f64 * 0.2).collect();
                (format!("g{g}"), v)
            })
            .collect();
        let m = ranksum_matrix(&groups).unwrap();
        for i in 0..3 {
            assert_eq!(m.get(i, i), 1.0);
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(j, i));
                if i != j {
                    let p = mann_whitney_u(&groups[i].1, &groups[j].1).unwrap().p_value;
                    assert!((m.get(i, j) - p).abs() < 1e-15);
                }
            }
        }
        let csv = m.to_csv_string();
        assert!(csv.starts_with("group,g0,g1,g2\n"));
        assert!(csv.contains("g0,1.00,"));
    }

    #[test]
    fn ranksum_matrix_duplicate_group() {
        let v = vec![0.2, 0.9, 0.4, 0.4, 1.5];
        let m = ranksum_matrix(&[("a".into(), v.clone()), ("b".into(), v)]).unwrap();
        assert!((m.get(0, 1) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn midranks_handle_ties() {
        let (r, t) = midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(t, 6.0);
    }
}
