//! Distributional laws of the frozen states: renewal gap laws, pair
//! correlations and their sum rules, box-count variance, particle
//! displacement, and the exact combinatorial backbone (Catalan and
//! Fuss-Catalan numbers, displacement counts).
//!
//! Monte Carlo estimators work on bit-packed final words; every exact law
//! they are compared against lives either here (integer combinatorics) or
//! in [`series`] (formal power series).

pub mod series;

use crate::dynamics::{jump_sites, step, Rule};
use crate::fixation::{landmarks, LandmarkChain, LandmarkKind, Regime};
use crate::lattice::{height_profile, rotl_bits, Config, Topology};
use crate::scalar::Scalar;
use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("sample set mixes lengths or supports")]
    MixedSamples,
    #[error("need at least {needed} windows, got {got}")]
    TooFewWindows { needed: usize, got: usize },
    #[error("gap law defined for the low and high regimes only")]
    WrongRegime,
    #[error("displacement tracking needs a low density ring")]
    NotLowDensity,
    #[error("evolution did not fix within {0} steps")]
    NotFixed(u64),
    #[error("all-zero input")]
    AllZero,
    #[error("too few landmarks in sample")]
    TooFewLandmarks,
}

// ---------------------------------------------------------------------------
// histograms

/// Integer-keyed counts with an associative, order-independent merge.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    counts: BTreeMap<i64, u64>,
    total: u64,
    pub provenance: Vec<String>,
}

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, value: i64) {
        *self.counts.entry(value).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn record_n(&mut self, value: i64, count: u64) {
        if count > 0 {
            *self.counts.entry(value).or_insert(0) += count;
            self.total += count;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (&k, &v) in &other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self.total += other.total;
        self.provenance.extend(other.provenance.iter().cloned());
    }

    pub fn count(&self, value: i64) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn frequency(&self, value: i64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(value) as f64 / self.total as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn mean(&self) -> f64 {
        if self.total == 0 {
            return f64::NAN;
        }
        self.iter().map(|(k, v)| k as f64 * v as f64).sum::<f64>() / self.total as f64
    }

    /// Total variation distance between the two normalized histograms.
    pub fn total_variation(&self, other: &Histogram) -> f64 {
        let keys: std::collections::BTreeSet<i64> = self
            .counts
            .keys()
            .chain(other.counts.keys())
            .copied()
            .collect();
        0.5 * keys
            .into_iter()
            .map(|k| (self.frequency(k) - other.frequency(k)).abs())
            .sum::<f64>()
    }
}

// ---------------------------------------------------------------------------
// exact combinatorics

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k.min(n));
    let mut out = BigUint::from(1u32);
    for i in 0..k {
        out = out * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    out
}

/// `c_n = binom(2n, n) / (n+1)`: Dyck path counts.
pub fn catalan(n: usize) -> BigUint {
    binomial(2 * n as u64, n as u64) / BigUint::from(n as u64 + 1)
}

/// `d_n = binom(3n, n) / (2n+1)`: counts of down-right paths to `(3n, -n)`
/// staying above the slope `-1/3` line.
pub fn fuss_catalan(n: usize) -> BigUint {
    binomial(3 * n as u64, n as u64) / BigUint::from(2 * n as u64 + 1)
}

pub use series::catalan_upto;

pub fn fuss_catalan_upto(n: usize) -> Vec<BigUint> {
    (0..=n).map(fuss_catalan).collect()
}

// ---------------------------------------------------------------------------
// renewal gap laws

/// Analytic gap probability: low regime `P(gap = 2n+1)`, high regime
/// `P(gap = 3n+1)`.
pub fn gap_law_pmf<T: Scalar>(regime: Regime, rho: &T, n: usize) -> Result<T, StatsError> {
    let one_minus = T::one() - rho.clone();
    match regime {
        Regime::Low => {
            // c_n rho^n (1-rho)^{n+1}
            let mut w = T::from_biguint(&catalan(n)) * one_minus.clone();
            for _ in 0..n {
                w = w * rho.clone() * one_minus.clone();
            }
            Ok(w)
        }
        Regime::High => {
            // d_n rho^{2n+1} (1-rho)^n
            let mut w = T::from_biguint(&fuss_catalan(n)) * rho.clone();
            for _ in 0..n {
                w = w * rho.clone() * rho.clone() * one_minus.clone();
            }
            Ok(w)
        }
        Regime::Intermediate => Err(StatsError::WrongRegime),
    }
}

/// Gap index `n` for an observed gap, if it has the regime's shape.
pub fn gap_index(regime: Regime, gap: i64) -> Option<usize> {
    match regime {
        Regime::Low if gap >= 1 && gap % 2 == 1 => Some((gap as usize - 1) / 2),
        Regime::High if gap >= 1 && gap % 3 == 1 => Some((gap as usize - 1) / 3),
        _ => None,
    }
}

/// Cyclic landmark gaps of a ring chain (single-kind chains).
pub fn ring_chain_gaps(chain: &LandmarkChain, len: usize) -> Vec<i64> {
    let kind = match chain.regime {
        Regime::Low => LandmarkKind::P,
        _ => LandmarkKind::Q,
    };
    let sites = chain.sites(kind);
    let mut gaps = Vec::with_capacity(sites.len());
    for i in 0..sites.len() {
        let next = if i + 1 < sites.len() {
            sites[i + 1]
        } else {
            sites[0] + len as i64
        };
        gaps.push(next - sites[i]);
    }
    gaps
}

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub n: usize,
    pub gap: i64,
    pub empirical: f64,
    pub analytic: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapLawReport {
    pub histogram: Histogram,
    pub rows: Vec<GapRow>,
    pub max_abs_dev: f64,
    pub lag1_corr: f64,
    /// Standard error of the lag-1 correlation under independence.
    pub lag1_sigma: f64,
    pub gap_pairs: u64,
}

/// Compare empirical landmark gaps against the analytic renewal law.
///
/// `per_sample_gaps` holds one gap sequence per independent sample so the
/// lag-1 diagnostic never straddles samples.
pub fn empirical_gap_law(
    per_sample_gaps: &[Vec<i64>],
    regime: Regime,
    rho: f64,
    n_max: usize,
) -> Result<GapLawReport, StatsError> {
    if matches!(regime, Regime::Intermediate) {
        return Err(StatsError::WrongRegime);
    }
    let mut histogram = Histogram::new();
    let mut lag_pairs = 0u64;
    let mut sum_xy = 0.0;
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut sum_x2 = 0.0;
    let mut sum_y2 = 0.0;
    for gaps in per_sample_gaps {
        for &g in gaps {
            histogram.record(g);
        }
        for w in gaps.windows(2) {
            let (x, y) = (w[0] as f64, w[1] as f64);
            sum_xy += x * y;
            sum_x += x;
            sum_y += y;
            sum_x2 += x * x;
            sum_y2 += y * y;
            lag_pairs += 1;
        }
    }
    if histogram.total() == 0 {
        return Err(StatsError::TooFewLandmarks);
    }
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut max_abs_dev: f64 = 0.0;
    for n in 0..=n_max {
        let gap = match regime {
            Regime::Low => 2 * n as i64 + 1,
            _ => 3 * n as i64 + 1,
        };
        let empirical = histogram.frequency(gap);
        let analytic = gap_law_pmf::<f64>(regime, &rho, n)?;
        max_abs_dev = max_abs_dev.max((empirical - analytic).abs());
        rows.push(GapRow {
            n,
            gap,
            empirical,
            analytic,
        });
    }
    let (lag1_corr, lag1_sigma) = if lag_pairs >= 2 {
        let n = lag_pairs as f64;
        let cov = sum_xy / n - (sum_x / n) * (sum_y / n);
        let vx = sum_x2 / n - (sum_x / n) * (sum_x / n);
        let vy = sum_y2 / n - (sum_y / n) * (sum_y / n);
        let corr = if vx > 0.0 && vy > 0.0 {
            cov / (vx * vy).sqrt()
        } else {
            0.0
        };
        (corr, 1.0 / n.sqrt())
    } else {
        (0.0, f64::INFINITY)
    };
    Ok(GapLawReport {
        histogram,
        rows,
        max_abs_dev,
        lag1_corr,
        lag1_sigma,
        gap_pairs: lag_pairs,
    })
}

// ---------------------------------------------------------------------------
// pair correlations

#[derive(Debug, Clone, Serialize)]
pub struct PairCorrelation {
    /// `g[k-1]` estimates `<eta(0) eta(k)>` for `k = 1..=kmax`.
    pub g: Vec<f64>,
    pub site_samples: u64,
    pub rho_hat: f64,
}

impl PairCorrelation {
    pub fn g_at(&self, k: usize) -> f64 {
        self.g[k - 1]
    }

    /// `g(k) - rho^2` using the supplied density.
    pub fn truncated(&self, rho: f64) -> Vec<f64> {
        self.g.iter().map(|v| v - rho * rho).collect()
    }
}

/// Translation-averaged two-point function over same-shape ring words.
pub fn pair_correlation(words: &[Config], kmax: usize) -> Result<PairCorrelation, StatsError> {
    let first = words.first().ok_or(StatsError::MixedSamples)?;
    let len = first.len();
    let support = crate::lattice::classify_support(first);
    if words
        .iter()
        .any(|w| !w.is_ring() || w.len() != len || crate::lattice::classify_support(w) != support)
    {
        return Err(StatsError::MixedSamples);
    }
    let mut acc = vec![0u64; kmax];
    let mut ones = 0u64;
    for w in words {
        ones += w.ones() as u64;
        let bits = w.words();
        for (k, slot) in acc.iter_mut().enumerate() {
            let rot = rotl_bits(bits, len, k + 1);
            let c: u64 = bits
                .iter()
                .zip(rot.iter())
                .map(|(a, b)| (a & b).count_ones() as u64)
                .sum();
            *slot += c;
        }
    }
    let site_samples = (len * words.len()) as u64;
    Ok(PairCorrelation {
        g: acc
            .iter()
            .map(|&c| c as f64 / site_samples as f64)
            .collect(),
        site_samples,
        rho_hat: ones as f64 / site_samples as f64,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SumRuleRow {
    pub block: usize,
    pub sum: f64,
    pub target: f64,
    pub residual: f64,
}

/// Group consecutive `g` values in blocks of `group` and compare each
/// block sum against `group * rho^2`.
pub fn sum_rule(g: &[f64], rho: f64, group: usize) -> Vec<SumRuleRow> {
    let target = group as f64 * rho * rho;
    g.chunks_exact(group)
        .enumerate()
        .map(|(block, chunk)| {
            let sum: f64 = chunk.iter().sum();
            SumRuleRow {
                block,
                sum,
                target,
                residual: sum - target,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    pub alpha: f64,
    pub c: f64,
    pub points_used: usize,
}

/// Least-squares exponential envelope `|gT(k)| ~ C alpha^k`.
pub fn decay_fit(g_truncated: &[f64]) -> Result<DecayFit, StatsError> {
    let pts: Vec<(f64, f64)> = g_truncated
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > 0.0)
        .map(|(i, v)| ((i + 1) as f64, v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(StatsError::AllZero);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok(DecayFit {
        alpha: slope.exp(),
        c: intercept.exp(),
        points_used: pts.len(),
    })
}

// ---------------------------------------------------------------------------
// box-count variance

#[derive(Debug, Clone, Serialize)]
pub struct VarianceRatio {
    pub ratio: f64,
    pub windows: usize,
    pub window_len: usize,
}

/// `Var(window particle count) / window length` over disjoint windows.
pub fn variance_ratio(words: &[Config], window_len: usize) -> Result<VarianceRatio, StatsError> {
    let mut sums = Vec::new();
    for w in words {
        let per = w.len() / window_len;
        for i in 0..per {
            sums.push(w.count_range(i * window_len, window_len) as f64);
        }
    }
    if sums.len() < 100 {
        return Err(StatsError::TooFewWindows {
            needed: 100,
            got: sums.len(),
        });
    }
    let n = sums.len() as f64;
    let mean = sums.iter().sum::<f64>() / n;
    let var = sums.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    Ok(VarianceRatio {
        ratio: var / window_len as f64,
        windows: sums.len(),
        window_len,
    })
}

// ---------------------------------------------------------------------------
// displacement

/// Geometric displacement law `P(D = d) = (1-2rho)/(1-rho) (rho/(1-rho))^d`.
pub fn displacement_law(rho: f64, d: usize) -> f64 {
    (1.0 - 2.0 * rho) / (1.0 - rho) * (rho / (1.0 - rho)).powi(d as i32)
}

#[derive(Debug, Clone, Serialize)]
pub struct DisplacementRun {
    pub histogram: Histogram,
    pub particles: u64,
    pub fixation_time: u64,
}

/// Follow every labeled particle of a low density ring to fixation and
/// histogram the distances moved.
///
/// Positions are tracked in coordinates unrolled at a landmark site, which
/// no particle ever crosses, so labels never wrap.
pub fn track_displacements(config: &Config, max_t: u64) -> Result<DisplacementRun, StatsError> {
    if !config.is_ring() || !Regime::Low.density_in_range(config.ones(), config.len()) {
        return Err(StatsError::NotLowDensity);
    }
    let l = config.len() as i64;
    let chain = landmarks(config, Regime::Low).map_err(|_| StatsError::NotLowDensity)?;
    let seam = chain.points[0].site;
    let unroll = |site: i64| (site - seam).rem_euclid(l);
    let mut positions: Vec<i64> = (0..config.len())
        .filter(|&i| config.get(i))
        .map(|i| unroll(i as i64))
        .collect();
    positions.sort_unstable();
    let initial = positions.clone();
    let mut cur = config.clone();
    let mut t = 0u64;
    loop {
        let jumps = jump_sites(&cur);
        if jumps.is_empty() {
            break;
        }
        if t >= max_t {
            return Err(StatsError::NotFixed(max_t));
        }
        for j in jumps {
            let u = unroll(j as i64);
            let idx = positions.binary_search(&u).expect("jump from occupied site");
            positions[idx] += 1;
        }
        // moves are +1 onto empty sites, so order is preserved
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        cur = step(&cur, Rule::Ftasep).expect("word rule");
        t += 1;
    }
    let mut histogram = Histogram::new();
    for (a, b) in initial.iter().zip(positions.iter()) {
        histogram.record(b - a);
    }
    Ok(DisplacementRun {
        histogram,
        particles: initial.len() as u64,
        fixation_time: t,
    })
}

/// Exact table of displacement counts: `delta[d][n]` counts the particles
/// in all length-`2n` Dyck words that move exactly `d` during fixation.
///
/// Built from the first-return decomposition
/// `delta(n,d) = sum_m [ c_{n-m} delta(m-1, d-1) + c_{m-1} delta(n-m, d) ]`
/// seeded by `delta(n,-1) = c_n`.
pub fn delta_table(n_max: usize, d_max: usize) -> Vec<Vec<BigUint>> {
    let c = catalan_upto(n_max);
    let mut prev: Vec<BigUint> = c.clone(); // row for d-1 = -1
    let mut out = Vec::with_capacity(d_max + 1);
    for _d in 0..=d_max {
        let mut row = vec![BigUint::zero(); n_max + 1];
        for n in 1..=n_max {
            let mut acc = BigUint::zero();
            for m in 1..=n {
                acc += &c[n - m] * &prev[m - 1];
                acc += &c[m - 1] * &row[n - m];
            }
            row[n] = acc;
        }
        out.push(row.clone());
        prev = row;
    }
    out
}

fn int_series_mul(a: &[BigUint], b: &[BigUint], order: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); order + 1];
    for i in 0..=order {
        if a.get(i).map(|v| v.is_zero()).unwrap_or(true) {
            continue;
        }
        for j in 0..=order - i {
            if let Some(bv) = b.get(j) {
                out[i + j] += &a[i] * bv;
            }
        }
    }
    out
}

/// Coefficients of `G(u) (G(u) - 1)^{d+1}` where `G` is the Catalan
/// generating function; equals the displacement counts `delta(n, d)`.
pub fn displacement_series(n_max: usize, d: usize) -> Vec<BigUint> {
    let g = catalan_upto(n_max);
    let mut g_minus_one = g.clone();
    g_minus_one[0] = BigUint::zero();
    let mut acc = g.clone();
    for _ in 0..=d {
        acc = int_series_mul(&acc, &g_minus_one, n_max);
    }
    acc
}

// ---------------------------------------------------------------------------
// landmark membership under the origin-insertion map

/// Insert a site with value `x` immediately right of the origin of a line
/// word whose window contains sites 0 and 1.
pub fn insert_after_origin(config: &Config, x: bool) -> Config {
    let base = config.first_site();
    debug_assert!(base <= 0);
    let split = (1 - base) as usize; // storage index of site 1
    let mut sites: Vec<bool> = config.iter_bits().collect();
    sites.insert(split, x);
    Config::from_bits(sites, Topology::Line { base })
}

/// Window-relative membership of `site` in the low density landmark set.
pub fn in_p_window(config: &Config, site: i64) -> bool {
    let profile = height_profile(config).expect("anchored line");
    (profile.start()..site).all(|i| profile.h(i) < profile.h(site))
}

/// The insertion equivalence behind the odd/even landmark balance:
/// `2n` is a landmark of `eta` iff `2n+1` is one of both insertions.
pub fn insertion_landmark_equiv(config: &Config, n: i64) -> bool {
    let lhs = in_p_window(config, 2 * n);
    let rhs = in_p_window(&insert_after_origin(config, false), 2 * n + 1)
        && in_p_window(&insert_after_origin(config, true), 2 * n + 1);
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixation::final_state;
    use crate::lattice::sample_bernoulli;
    use crate::Exact;

    fn rat(n: i64, d: i64) -> Exact {
        <Exact as Scalar>::from_ratio(n, d)
    }

    // -- exact combinatorics ------------------------------------------------

    /// Count Dyck words directly: length-2n +-1 paths from 0 to 0 staying
    /// at or below the start.
    fn dyck_count(n: usize) -> u64 {
        fn walk(steps_left: usize, height: i64) -> u64 {
            if height > 0 {
                return 0;
            }
            if steps_left == 0 {
                return u64::from(height == 0);
            }
            // prune: cannot return to zero
            if height + (steps_left as i64) < 0 {
                return 0;
            }
            walk(steps_left - 1, height + 1) + walk(steps_left - 1, height - 1)
        }
        walk(2 * n, 0)
    }

    /// Count paths to `(3n, -n)` staying weakly above the slope -1/3 line.
    fn raney_count(n: usize) -> u64 {
        fn walk(i: usize, h: i64, len: usize, target: i64) -> u64 {
            if 3 * h < -(i as i64) {
                return 0;
            }
            if i == len {
                return u64::from(h == target);
            }
            walk(i + 1, h + 1, len, target) + walk(i + 1, h - 1, len, target)
        }
        walk(0, 0, 3 * n, -(n as i64))
    }

    #[test]
    fn catalan_against_enumeration() {
        for n in 0..=6 {
            assert_eq!(catalan(n), BigUint::from(dyck_count(n)), "n={n}");
        }
        assert_eq!(catalan(3), BigUint::from(5u32));
    }

    #[test]
    fn fuss_catalan_against_enumeration() {
        for n in 0..=5 {
            assert_eq!(fuss_catalan(n), BigUint::from(raney_count(n)), "n={n}");
        }
        assert_eq!(fuss_catalan(0), BigUint::from(1u32));
        assert_eq!(fuss_catalan(2), BigUint::from(3u32));
    }

    #[test]
    fn big_values_do_not_overflow() {
        // past the 64-bit range
        assert!(catalan(40) > BigUint::from(u64::MAX));
        assert!(fuss_catalan(30) > BigUint::from(u64::MAX));
    }

    // -- gap laws -------------------------------------------------------------

    #[test]
    fn gap_pmf_values() {
        // low n=0: 1-rho
        assert_eq!(gap_law_pmf(Regime::Low, &rat(3, 10), 0).unwrap(), rat(7, 10));
        // low rho=0.3 n=2: 2 * 0.09 * 0.343
        let v: f64 = gap_law_pmf(Regime::Low, &0.3, 2).unwrap();
        assert!((v - 0.06174).abs() < 1e-12);
        // high n=0: rho
        assert_eq!(gap_law_pmf(Regime::High, &rat(4, 5), 0).unwrap(), rat(4, 5));
        assert!(gap_law_pmf(Regime::Intermediate, &0.6, 0).is_err());
    }

    #[test]
    fn gap_pmf_normalizes() {
        for (regime, rho) in [(Regime::Low, 0.3), (Regime::High, 0.8)] {
            let total: f64 = (0..4000)
                .map(|n| gap_law_pmf(regime, &rho, n).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "total {total}");
        }
    }

    #[test]
    fn empirical_gap_law_matches() {
        let mut samples = Vec::new();
        for seed in 0..40 {
            let cfg = sample_bernoulli(0.3, 20_000, seed, Topology::Ring).unwrap();
            let chain = landmarks(&cfg, Regime::Low).unwrap();
            samples.push(ring_chain_gaps(&chain, cfg.len()));
        }
        let report = empirical_gap_law(&samples, Regime::Low, 0.3, 10).unwrap();
        assert!(report.max_abs_dev < 5e-3, "dev {}", report.max_abs_dev);
        assert!(
            report.lag1_corr.abs() < 3.0 * report.lag1_sigma,
            "lag1 {} sigma {}",
            report.lag1_corr,
            report.lag1_sigma
        );
    }

    // -- pair correlation -------------------------------------------------------

    #[test]
    fn pair_correlation_sum_rules_small() {
        let mut finals = Vec::new();
        for seed in 100..160 {
            let cfg = sample_bernoulli(0.3, 10_000, seed, Topology::Ring).unwrap();
            finals.push(final_state(&cfg, Regime::Low).unwrap());
        }
        let pc = pair_correlation(&finals, 12).unwrap();
        // g(1) = 0 exactly: no adjacent particles in the frozen word
        assert_eq!(pc.g_at(1), 0.0);
        for row in sum_rule(&pc.g, 0.3, 2).iter().take(5) {
            assert!(row.residual.abs() < 4e-3, "residual {}", row.residual);
        }
    }

    #[test]
    fn mixed_samples_rejected() {
        let a = sample_bernoulli(0.3, 1000, 1, Topology::Ring).unwrap();
        let b = sample_bernoulli(0.3, 2000, 2, Topology::Ring).unwrap();
        assert_eq!(
            pair_correlation(&[a, b], 4).unwrap_err(),
            StatsError::MixedSamples
        );
    }

    #[test]
    fn decay_fit_recovers_planted_rate() {
        let gt: Vec<f64> = (1..60).map(|k| 2.0 * 0.8f64.powi(k)).collect();
        let fit = decay_fit(&gt).unwrap();
        assert!((fit.alpha - 0.8).abs() < 1e-9);
        assert!((fit.c - 2.0).abs() < 1e-9);
    }

    // -- variance ----------------------------------------------------------------

    #[test]
    fn variance_of_bernoulli_word() {
        let words: Vec<Config> = (0..20)
            .map(|s| sample_bernoulli(0.3, 100_000, s, Topology::Ring).unwrap())
            .collect();
        let vr = variance_ratio(&words, 1000).unwrap();
        assert!((vr.ratio - 0.21).abs() < 0.02, "ratio {}", vr.ratio);
    }

    #[test]
    fn too_few_windows_flagged() {
        let w = sample_bernoulli(0.3, 1000, 0, Topology::Ring).unwrap();
        assert!(matches!(
            variance_ratio(&[w], 100),
            Err(StatsError::TooFewWindows { .. })
        ));
    }

    // -- displacement ----------------------------------------------------------

    #[test]
    fn displacement_dp_matches_series() {
        let table = delta_table(30, 10);
        for (d, row) in table.iter().enumerate() {
            let series = displacement_series(30, d);
            assert_eq!(row[..], series[..], "d={d}");
        }
    }

    #[test]
    fn displacement_base_cases() {
        let table = delta_table(8, 3);
        for row in &table {
            assert!(row[0].is_zero());
        }
        // single particle between landmarks never moves
        assert_eq!(table[0][1], BigUint::from(1u32));
    }

    #[test]
    fn displacement_law_normalizes_and_means() {
        let total: f64 = (0..200).map(|d| displacement_law(0.3, d)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mean: f64 = (0..200).map(|d| d as f64 * displacement_law(0.3, d)).sum();
        assert!((mean - 0.75).abs() < 1e-10);
        assert!((displacement_law(0.3, 0) - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn tracked_displacements_match_law() {
        let mut hist = Histogram::new();
        for seed in 0..60 {
            let cfg = sample_bernoulli(0.3, 2000, seed + 7000, Topology::Ring).unwrap();
            if !Regime::Low.density_in_range(cfg.ones(), cfg.len()) {
                continue;
            }
            let run = track_displacements(&cfg, 100_000).unwrap();
            hist.merge(&run.histogram);
        }
        assert!(hist.total() > 30_000);
        for d in 0..=6 {
            let emp = hist.frequency(d);
            let ana = displacement_law(0.3, d as usize);
            assert!((emp - ana).abs() < 8e-3, "d={d} emp {emp} ana {ana}");
        }
        assert!((hist.mean() - 0.75).abs() < 0.02, "mean {}", hist.mean());
    }

    // -- insertion map -----------------------------------------------------------

    #[test]
    fn insertion_equiv_exhaustive_small_windows() {
        // all words on sites -4..=7 with the origin a window landmark
        let w1 = 4usize; // sites -4..=-1 plus site 0
        let w2 = 7usize;
        let len = w1 + 1 + w2;
        let mut conditioned = 0u64;
        for bits in 0u32..(1 << len) {
            let sites: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
            let cfg = Config::from_bits(sites, Topology::Line { base: -(w1 as i64) });
            if !in_p_window(&cfg, 0) {
                continue;
            }
            conditioned += 1;
            for n in 1..=3 {
                assert!(insertion_landmark_equiv(&cfg, n), "bits={bits:b} n={n}");
            }
        }
        assert!(conditioned > 1000);
    }

    #[test]
    fn histogram_merge_is_order_independent() {
        let mut a = Histogram::new();
        a.record(1);
        a.record(2);
        let mut b = Histogram::new();
        b.record_n(2, 5);
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab.counts, ba.counts);
        assert_eq!(ab.total(), 7);
        assert!((ab.total_variation(&ba) - 0.0).abs() < 1e-15);
    }
}
