//! Correlations, permutation tests and paired t-tests.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::special::student_t_two_sided;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// Two-sided, from the t transform with n − 2 degrees of freedom.
    pub p: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Keeps p-values in (0, 1].
fn clamp_p(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, found: n });
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y"));
    }
    let r = (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        student_t_two_sided(r * libm::sqrt(df / (1.0 - r * r)), df)
    };
    Ok(Correlation { r, p: clamp_p(p) })
}

/// Fractional ranks (1-based); ties get the mean of the ranks they span.
pub fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    pearson(&mid_ranks(x), &mid_ranks(y))
}

/// Exact enumeration is used when the number of relabelings is at most this.
pub const EXACT_LIMIT: u64 = 20_000_000;
pub const DEFAULT_TRIALS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationMode {
    /// Exact when feasible, otherwise Monte Carlo.
    Auto { trials: usize, seed: u64 },
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

impl Default for PermutationMode {
    fn default() -> Self {
        PermutationMode::Auto {
            trials: DEFAULT_TRIALS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationOutcome {
    pub p: f64,
    pub exact: bool,
    /// Number of equally likely relabelings (exact) or `trials + 1`.
    pub denominator: f64,
    pub observed_difference: f64,
}

impl PermutationOutcome {
    /// Smallest p-value the test can report.
    pub fn resolution(&self) -> f64 {
        1.0 / self.denominator
    }

    pub fn at_resolution(&self) -> bool {
        self.p <= self.resolution() * (1.0 + 1e-12)
    }
}

/// `C(n, k)` as a float, saturating at infinity.
pub fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// One-tailed test that `group_a` has the larger mean.
///
/// The p-value is the fraction of relabelings whose `mean(a) − mean(b)` is at
/// least the observed one. Monte Carlo counts the identity relabeling in both
/// numerator and denominator: `(hits + 1) / (trials + 1)`.
pub fn permutation_test_one_tailed(
    group_a: &[f64],
    group_b: &[f64],
    mode: PermutationMode,
) -> Result<PermutationOutcome> {
    if group_a.is_empty() || group_b.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let na = group_a.len();
    let nb = group_b.len();
    let observed = mean(group_a) - mean(group_b);
    let pooled: Vec<f64> = group_a.iter().chain(group_b).copied().collect();
    let relabelings = binomial((na + nb) as u64, na as u64);
    // mean(a) - mean(b) is increasing in sum(a) for a fixed pooled total.
    let observed_sum: f64 = group_a.iter().sum();
    let tol = 1e-12 * (1.0 + pooled.iter().map(|v| v.abs()).sum::<f64>());
    let threshold = observed_sum - tol;

    let use_exact = match mode {
        PermutationMode::Exact => true,
        PermutationMode::Auto { .. } => relabelings <= EXACT_LIMIT as f64,
        PermutationMode::MonteCarlo { .. } => false,
    };

    if use_exact {
        let hits = count_subsets_at_least(&pooled, na, threshold);
        return Ok(PermutationOutcome {
            p: clamp_p(hits as f64 / relabelings),
            exact: true,
            denominator: relabelings,
            observed_difference: observed,
        });
    }

    let (trials, seed) = match mode {
        PermutationMode::Auto { trials, seed } | PermutationMode::MonteCarlo { trials, seed } => {
            (trials, seed)
        }
        PermutationMode::Exact => unreachable!(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = pooled;
    let mut hits = 0usize;
    for _ in 0..trials {
        let (head, _) = shuffled.partial_shuffle(&mut rng, na);
        let s: f64 = head.iter().sum();
        if s >= threshold {
            hits += 1;
        }
    }
    let denominator = (trials + 1) as f64;
    Ok(PermutationOutcome {
        p: clamp_p((hits + 1) as f64 / denominator),
        exact: false,
        denominator,
        observed_difference: observed,
    })
}

/// Number of `k`-subsets of `values` whose sum is at least `threshold`.
fn count_subsets_at_least(values: &[f64], k: usize, threshold: f64) -> u64 {
    // Sorting descending lets a branch stop early once even the largest
    // remaining picks cannot reach the threshold.
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let n = v.len();
    // best[i][m]: largest sum of m values from v[i..] = prefix of v[i..].
    let mut suffix_prefix = vec![vec![0.0; k + 1]; n + 1];
    for i in (0..n).rev() {
        for m in 1..=k.min(n - i) {
            suffix_prefix[i][m] = v[i] + suffix_prefix[i + 1][m - 1];
        }
    }

    fn rec(v: &[f64], best: &[Vec<f64>], i: usize, left: usize, acc: f64, thr: f64) -> u64 {
        if left == 0 {
            return u64::from(acc >= thr);
        }
        let n = v.len();
        if n - i < left {
            return 0;
        }
        if acc + best[i][left] < thr {
            return 0;
        }
        rec(v, best, i + 1, left - 1, acc + v[i], thr) + rec(v, best, i + 1, left, acc, thr)
    }
    rec(&v, &suffix_prefix, 0, k, 0.0, threshold)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    /// Mean of `after − before` over its standard error.
    pub t: f64,
    /// Two-sided, n − 1 degrees of freedom.
    pub p: f64,
    pub df: usize,
    pub mean_difference: f64,
}

impl PairedTTest {
    pub fn significant_at_05(&self) -> bool {
        self.p < 0.05
    }

    pub fn significant_at_01(&self) -> bool {
        self.p < 0.01
    }
}

pub fn paired_t_test(before: &[f64], after: &[f64]) -> Result<PairedTTest> {
    if before.len() != after.len() {
        return Err(Error::LengthMismatch(before.len(), after.len()));
    }
    let n = before.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: n });
    }
    let d: Vec<f64> = after.iter().zip(before).map(|(a, b)| a - b).collect();
    let md = mean(&d);
    let var = d.iter().map(|x| (x - md) * (x - md)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance("paired differences"));
    }
    let t = md / libm::sqrt(var / n as f64);
    let df = n - 1;
    Ok(PairedTTest {
        t,
        p: clamp_p(student_t_two_sided(t, df as f64)),
        df,
        mean_difference: md,
    })
}
