//! Configurations, height profiles, densities and phase-support
//! classification.
//!
//! Words are bit-packed, 64 sites per machine word, so the parallel update
//! in [`crate::dynamics`] runs branch-free over whole blocks.  A ring of
//! size `L` stores exactly `L` sites; a line window carries the site index
//! of its first site (`base`) so quantities quoted in absolute coordinates
//! stay legible.

use crate::Rng;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BITS: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("density {0} outside [0,1]")]
    InvalidDensity(f64),
    #[error("ring length must be >= 3, got {0}")]
    RingTooShort(usize),
    #[error("empty configuration")]
    Empty,
    #[error("line window [{lo},{hi}] does not contain the anchor site 0")]
    AnchorOutsideWindow { lo: i64, hi: i64 },
    #[error("malformed serialized configuration: {0}")]
    Parse(String),
}

/// Where a word lives: a ring of its own length, or a line window whose
/// first stored site has absolute index `base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Ring,
    Line { base: i64 },
}

/// A finite 0/1 word with an explicit topology.
#[derive(Clone, PartialEq, Eq)]
pub struct Config {
    bits: Vec<u64>,
    len: usize,
    topology: Topology,
}

impl std::fmt::Debug for Config {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Config({:?}, ", self.topology)?;
        let shown = self.len.min(96);
        for i in 0..shown {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        if shown < self.len {
            write!(f, "... len {}", self.len)?;
        }
        write!(f, ")")
    }
}

fn words_for(len: usize) -> usize {
    len.div_ceil(BITS)
}

/// Mask selecting the valid bits of the top storage word.
fn tail_mask(len: usize) -> u64 {
    let r = len % BITS;
    if r == 0 {
        u64::MAX
    } else {
        (1u64 << r) - 1
    }
}

impl Config {
    pub fn zeros(len: usize, topology: Topology) -> Self {
        assert!(len > 0, "empty configuration");
        Config {
            bits: vec![0; words_for(len)],
            len,
            topology,
        }
    }

    pub fn from_bits(sites: impl IntoIterator<Item = bool>, topology: Topology) -> Self {
        let mut bits = Vec::new();
        let mut len = 0usize;
        for (i, b) in sites.into_iter().enumerate() {
            if i % BITS == 0 {
                bits.push(0u64);
            }
            if b {
                *bits.last_mut().unwrap() |= 1u64 << (i % BITS);
            }
            len = i + 1;
        }
        assert!(len > 0, "empty configuration");
        Config {
            bits,
            len,
            topology,
        }
    }

    /// Parse a word of '0'/'1' characters.
    pub fn from_word(s: &str, topology: Topology) -> Result<Self, LatticeError> {
        if s.is_empty() {
            return Err(LatticeError::Empty);
        }
        let mut sites = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => sites.push(false),
                '1' => sites.push(true),
                _ => return Err(LatticeError::Parse(format!("bad site character {c:?}"))),
            }
        }
        Ok(Self::from_bits(sites, topology))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_ring(&self) -> bool {
        matches!(self.topology, Topology::Ring)
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.bits
    }

    pub(crate) fn from_words(bits: Vec<u64>, len: usize, topology: Topology) -> Self {
        debug_assert_eq!(bits.len(), words_for(len));
        debug_assert_eq!(*bits.last().unwrap() & !tail_mask(len), 0);
        Config {
            bits,
            len,
            topology,
        }
    }

    /// Site by storage index `0..len`.
    pub fn get(&self, idx: usize) -> bool {
        debug_assert!(idx < self.len);
        (self.bits[idx / BITS] >> (idx % BITS)) & 1 == 1
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        debug_assert!(idx < self.len);
        let mask = 1u64 << (idx % BITS);
        if value {
            self.bits[idx / BITS] |= mask;
        } else {
            self.bits[idx / BITS] &= !mask;
        }
    }

    /// Site by absolute index: modular on a ring, `base`-relative on a line.
    ///
    /// Panics if a line index falls outside the window.
    pub fn site(&self, k: i64) -> bool {
        match self.topology {
            Topology::Ring => self.get(k.rem_euclid(self.len as i64) as usize),
            Topology::Line { base } => {
                let idx = k - base;
                assert!(
                    idx >= 0 && (idx as usize) < self.len,
                    "site {k} outside line window"
                );
                self.get(idx as usize)
            }
        }
    }

    /// Absolute index of the first stored site.
    pub fn first_site(&self) -> i64 {
        match self.topology {
            Topology::Ring => 0,
            Topology::Line { base } => base,
        }
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn density(&self) -> f64 {
        self.ones() as f64 / self.len as f64
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_word_string(&self) -> String {
        self.iter_bits().map(|b| if b { '1' } else { '0' }).collect()
    }

    /// `w` such that `w[i] = self[(i+k) mod len]`; rings only.
    pub fn rotate_left(&self, k: usize) -> Config {
        assert!(self.is_ring(), "rotation is a ring operation");
        let k = k % self.len;
        let hi = shr_bits(&self.bits, self.len, k);
        let lo = shl_bits(&self.bits, self.len, self.len - k);
        let bits = if k == 0 {
            self.bits.clone()
        } else {
            or_bits(&hi, &lo)
        };
        Config::from_words(bits, self.len, Topology::Ring)
    }

    pub fn rotate_right(&self, k: usize) -> Config {
        let k = k % self.len;
        if k == 0 {
            self.clone()
        } else {
            self.rotate_left(self.len - k)
        }
    }

    /// The ring repeated `periods` times as a line window whose middle
    /// period covers sites `0..L`.
    ///
    /// `periods` must be odd and >= 3; the window is
    /// `[-qL, (periods-q)L)` with `q = (periods-1)/2`.
    pub fn lift(&self, periods: usize) -> Config {
        assert!(self.is_ring(), "only rings are lifted");
        assert!(periods >= 3 && periods % 2 == 1, "periods must be odd >= 3");
        let l = self.len;
        let q = (periods - 1) / 2;
        let mut sites = Vec::with_capacity(l * periods);
        for _ in 0..periods {
            sites.extend(self.iter_bits());
        }
        Config::from_bits(
            sites,
            Topology::Line {
                base: -((q * l) as i64),
            },
        )
    }

    /// Occupied sites among `start..start+len` (no wrap).
    pub fn count_range(&self, start: usize, len: usize) -> usize {
        assert!(start + len <= self.len);
        let mut count = 0usize;
        let (mut i, end) = (start, start + len);
        while i < end {
            let w = i / BITS;
            let lo = i % BITS;
            let take = (BITS - lo).min(end - i);
            let mask = if take == BITS {
                u64::MAX
            } else {
                ((1u64 << take) - 1) << lo
            };
            count += (self.bits[w] & mask).count_ones() as usize;
            i += take;
        }
        count
    }

    /// Number of cyclically adjacent occupied pairs (ring) or in-window
    /// adjacent pairs (line).
    pub fn adjacent_pair_count(&self) -> usize {
        let mut count = 0usize;
        match self.topology {
            Topology::Ring => {
                let shifted = rotl_bits(&self.bits, self.len, 1);
                for (w, s) in self.bits.iter().zip(shifted.iter()) {
                    count += (w & s).count_ones() as usize;
                }
            }
            Topology::Line { .. } => {
                let shifted = shr_bits(&self.bits, self.len, 1);
                let mut masked: Vec<u64> = self
                    .bits
                    .iter()
                    .zip(shifted.iter())
                    .map(|(w, s)| w & s)
                    .collect();
                // the last site has no in-window right neighbor
                let last = self.len - 1;
                masked[last / BITS] &= !(1u64 << (last % BITS));
                count += masked.iter().map(|w| w.count_ones() as usize).sum::<usize>();
            }
        }
        count
    }
}

// ---------------------------------------------------------------------------
// packed-bit helpers shared with the dynamics kernels

/// Logical shift toward lower site indices: `out[i] = src[i+k]`, zero fill.
pub(crate) fn shr_bits(src: &[u64], len: usize, k: usize) -> Vec<u64> {
    let n = src.len();
    let mut out = vec![0u64; n];
    if k >= len {
        return out;
    }
    let wk = k / BITS;
    let rk = k % BITS;
    for j in 0..n {
        let lo = src.get(j + wk).copied().unwrap_or(0);
        let hi = src.get(j + wk + 1).copied().unwrap_or(0);
        out[j] = if rk == 0 {
            lo
        } else {
            (lo >> rk) | (hi << (BITS - rk))
        };
    }
    out[n - 1] &= tail_mask(len);
    out
}

/// Logical shift toward higher site indices: `out[i] = src[i-k]`, zero fill.
pub(crate) fn shl_bits(src: &[u64], len: usize, k: usize) -> Vec<u64> {
    let n = src.len();
    let mut out = vec![0u64; n];
    if k >= len {
        return out;
    }
    let wk = k / BITS;
    let rk = k % BITS;
    for j in (0..n).rev() {
        let lo = if j >= wk { src[j - wk] } else { 0 };
        let hi = if j >= wk + 1 { src[j - wk - 1] } else { 0 };
        out[j] = if rk == 0 {
            lo
        } else {
            (lo << rk) | (hi >> (BITS - rk))
        };
    }
    out[n - 1] &= tail_mask(len);
    out
}

pub(crate) fn or_bits(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b.iter()).map(|(x, y)| x | y).collect()
}

/// Cyclic shift on a `len`-bit ring: `out[i] = src[(i+k) mod len]`.
pub(crate) fn rotl_bits(src: &[u64], len: usize, k: usize) -> Vec<u64> {
    let k = k % len;
    if k == 0 {
        return src.to_vec();
    }
    or_bits(&shr_bits(src, len, k), &shl_bits(src, len, len - k))
}

pub(crate) fn rotr_bits(src: &[u64], len: usize, k: usize) -> Vec<u64> {
    rotl_bits(src, len, (len - k % len) % len)
}

pub(crate) fn mask_tail(bits: &mut [u64], len: usize) {
    let n = bits.len();
    bits[n - 1] &= tail_mask(len);
}

// ---------------------------------------------------------------------------
// stacks

/// A finite word of nonnegative stack heights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackConfig {
    pub stacks: Vec<u32>,
    pub topology: Topology,
}

impl StackConfig {
    pub fn new(stacks: Vec<u32>, topology: Topology) -> Self {
        assert!(!stacks.is_empty(), "empty stack word");
        StackConfig { stacks, topology }
    }

    pub fn len(&self) -> usize {
        self.stacks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_ring(&self) -> bool {
        matches!(self.topology, Topology::Ring)
    }

    pub fn particles(&self) -> u64 {
        self.stacks.iter().map(|&v| v as u64).sum()
    }

    pub fn zero_count(&self) -> usize {
        self.stacks.iter().filter(|&&v| v == 0).count()
    }

    pub fn mean(&self) -> f64 {
        self.particles() as f64 / self.len() as f64
    }
}

// ---------------------------------------------------------------------------
// height profiles

/// Integer height profile: rises by one across a hole, falls by one across a
/// particle, anchored so that `h(0) = 0` at construction time.
///
/// For a line window over sites `b..b+n` the profile stores `h(k)` for
/// `k` in `[b-1, b+n-1]`.  For a ring of size `L` it stores one unrolled
/// period `h(0..=L)`; the periodic extension `h(k+L) = h(k) + drift` is
/// exact, with `drift = L - 2*(particle count)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightProfile {
    start: i64,
    h: Vec<i64>,
    period: Option<usize>,
}

impl HeightProfile {
    pub(crate) fn from_raw(start: i64, h: Vec<i64>, period: Option<usize>) -> Self {
        if let Some(l) = period {
            debug_assert_eq!(start, 0);
            debug_assert_eq!(h.len(), l + 1);
        }
        HeightProfile { start, h, period }
    }

    /// First index carrying a height value.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last index carrying a height value.
    pub fn end(&self) -> i64 {
        self.start + self.h.len() as i64 - 1
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    /// Per-period height drift of a ring profile.
    pub fn drift(&self) -> Option<i64> {
        self.period.map(|l| self.h[l] - self.h[0])
    }

    /// `h(k)`, using the periodic extension on rings.
    pub fn h(&self, k: i64) -> i64 {
        match self.period {
            None => {
                let idx = k - self.start;
                assert!(
                    idx >= 0 && (idx as usize) < self.h.len(),
                    "height index {k} outside window"
                );
                self.h[idx as usize]
            }
            Some(l) => {
                let l = l as i64;
                let q = k.div_euclid(l);
                let r = k.rem_euclid(l);
                self.h[r as usize] + q * (self.h[l as usize] - self.h[0])
            }
        }
    }

    /// `3 h*(k) = 3 h(k) + k`, carried exactly as an integer.
    pub fn star3(&self, k: i64) -> i64 {
        3 * self.h(k) + k
    }

    /// Site value `eta(k)` recovered from the increments.
    pub fn eta(&self, k: i64) -> bool {
        self.h(k) - self.h(k - 1) == -1
    }

    /// Indices over which `eta` is defined.
    pub fn eta_range(&self) -> std::ops::RangeInclusive<i64> {
        match self.period {
            None => (self.start + 1)..=self.end(),
            Some(l) => 1..=(l as i64),
        }
    }

    /// The three congruences every profile reachable by the dynamics
    /// satisfies: `k + h(k)` even, `3h*(k)` even, `2k + 3h*(k) ≡ 0 mod 6`.
    pub fn congruences_hold(&self) -> bool {
        let lo = self.start;
        let hi = self.end();
        (lo..=hi).all(|k| {
            let h = self.h(k);
            let s3 = 3 * h + k;
            (k + h).rem_euclid(2) == 0 && s3.rem_euclid(2) == 0 && (2 * k + s3).rem_euclid(6) == 0
        })
    }

    pub(crate) fn values_mut(&mut self) -> &mut [i64] {
        &mut self.h
    }

    pub(crate) fn values(&self) -> &[i64] {
        &self.h
    }

    /// CSV rows `k,h,star3`, one per stored index.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "k,h,star3")?;
        for k in self.start..=self.end() {
            writeln!(w, "{},{},{}", k, self.h(k), self.star3(k))?;
        }
        Ok(())
    }
}

/// Height profile of a configuration, anchored at `h(0) = 0`.
///
/// Line windows must contain site 0; rings are unrolled from their site 0.
pub fn height_profile(config: &Config) -> Result<HeightProfile, LatticeError> {
    match config.topology {
        Topology::Line { base } => {
            let lo = base - 1;
            let hi = base + config.len as i64 - 1;
            if !(lo <= 0 && 0 <= hi) {
                return Err(LatticeError::AnchorOutsideWindow { lo, hi });
            }
            let mut h = vec![0i64; config.len + 1];
            // first pass relative to the window edge, then re-anchor at 0
            for i in 0..config.len {
                let step = if config.get(i) { -1 } else { 1 };
                h[i + 1] = h[i] + step;
            }
            let anchor = h[(0 - lo) as usize];
            for v in &mut h {
                *v -= anchor;
            }
            Ok(HeightProfile::from_raw(lo, h, None))
        }
        Topology::Ring => {
            let l = config.len;
            let mut h = vec![0i64; l + 1];
            for k in 1..=l {
                let step = if config.get(k % l) { -1 } else { 1 };
                // eta(k) for k=1..L reads sites 1..L-1 and wraps to site 0
                h[k] = h[k - 1] + step;
            }
            Ok(HeightProfile::from_raw(0, h, Some(l)))
        }
    }
}

/// Rebuild the word from a profile's increments.
pub fn reconstruct(profile: &HeightProfile) -> Config {
    match profile.period {
        None => {
            let base = profile.start + 1;
            let sites = profile.eta_range().map(|k| profile.eta(k));
            Config::from_bits(sites, Topology::Line { base })
        }
        Some(l) => {
            // eta(k) for k=1..L maps to ring sites 1..L-1, 0
            let mut cfg = Config::zeros(l, Topology::Ring);
            for k in 1..=l as i64 {
                cfg.set((k % l as i64) as usize, profile.eta(k));
            }
            cfg
        }
    }
}

// ---------------------------------------------------------------------------
// support classification

/// Phase supports: words avoiding 11 (low), avoiding 00 and 111
/// (intermediate), avoiding 00 and 0?0 (high), their intersections, or none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    Low,
    Intermediate,
    High,
    BoundaryHalf,
    BoundaryTwoThirds,
    None,
}

fn has_pattern(config: &Config, pattern: &[Option<bool>]) -> bool {
    let n = config.len;
    let span = pattern.len();
    let positions: Box<dyn Iterator<Item = usize>> = match config.topology {
        Topology::Ring => Box::new(0..n),
        Topology::Line { .. } => {
            if n < span {
                return false;
            }
            Box::new(0..=(n - span))
        }
    };
    'outer: for i in positions {
        for (d, want) in pattern.iter().enumerate() {
            if let Some(v) = want {
                let idx = match config.topology {
                    Topology::Ring => (i + d) % n,
                    Topology::Line { .. } => i + d,
                };
                if config.get(idx) != *v {
                    continue 'outer;
                }
            }
        }
        return true;
    }
    false
}

pub fn in_low_support(config: &Config) -> bool {
    !has_pattern(config, &[Some(true), Some(true)])
}

pub fn in_intermediate_support(config: &Config) -> bool {
    !has_pattern(config, &[Some(false), Some(false)])
        && !has_pattern(config, &[Some(true), Some(true), Some(true)])
}

pub fn in_high_support(config: &Config) -> bool {
    !has_pattern(config, &[Some(false), Some(false)])
        && !has_pattern(config, &[Some(false), None, Some(false)])
}

/// Which of the three stationary supports the word lies in, with explicit
/// labels for the two boundary intersections.
pub fn classify_support(config: &Config) -> Support {
    let l = in_low_support(config);
    let i = in_intermediate_support(config);
    let h = in_high_support(config);
    match (l, i, h) {
        (true, true, _) => Support::BoundaryHalf,
        (_, true, true) => Support::BoundaryTwoThirds,
        (true, false, false) => Support::Low,
        (false, true, false) => Support::Intermediate,
        (false, false, true) => Support::High,
        _ => Support::None,
    }
}

// ---------------------------------------------------------------------------
// sampling

/// Bernoulli word: each site independently occupied with probability `rho`.
pub fn sample_bernoulli(
    rho: f64,
    length: usize,
    seed: u64,
    topology: Topology,
) -> Result<Config, LatticeError> {
    if !(0.0..=1.0).contains(&rho) || rho.is_nan() {
        return Err(LatticeError::InvalidDensity(rho));
    }
    if length == 0 {
        return Err(LatticeError::Empty);
    }
    if matches!(topology, Topology::Ring) && length < 3 {
        return Err(LatticeError::RingTooShort(length));
    }
    let mut rng = crate::rng_from_seed(seed);
    let mut bits = vec![0u64; words_for(length)];
    for i in 0..length {
        if rng.random::<f64>() < rho {
            bits[i / BITS] |= 1u64 << (i % BITS);
        }
    }
    Ok(Config::from_words(bits, length, topology))
}

/// Draw one geometric stack height: `P(k) = (1-rho) rho^k`.
pub(crate) fn geometric(rho: f64, rng: &mut Rng) -> u32 {
    let mut k = 0u32;
    while rng.random::<f64>() < rho {
        k += 1;
    }
    k
}

// ---------------------------------------------------------------------------
// serialization: one-line JSON header + payload line

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigHeader {
    pub kind: String,
    pub topology: Topology,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

/// `{header}\n{0/1 word}\n`
pub fn config_to_string(config: &Config, seed: Option<u64>, rho: Option<f64>) -> String {
    let header = ConfigHeader {
        kind: "config".into(),
        topology: config.topology,
        seed,
        rho,
    };
    format!(
        "{}\n{}\n",
        serde_json::to_string(&header).expect("header serializes"),
        config.to_word_string()
    )
}

pub fn config_from_str(s: &str) -> Result<(Config, ConfigHeader), LatticeError> {
    let mut lines = s.lines();
    let header_line = lines.next().ok_or(LatticeError::Empty)?;
    let header: ConfigHeader = serde_json::from_str(header_line)
        .map_err(|e| LatticeError::Parse(format!("bad header: {e}")))?;
    let word = lines.next().ok_or(LatticeError::Empty)?;
    let config = Config::from_word(word, header.topology)?;
    Ok((config, header))
}

/// `{header}\n{comma separated stacks}\n`
pub fn stacks_to_string(stacks: &StackConfig, seed: Option<u64>, rho: Option<f64>) -> String {
    let header = ConfigHeader {
        kind: "stacks".into(),
        topology: stacks.topology,
        seed,
        rho,
    };
    let body: Vec<String> = stacks.stacks.iter().map(|v| v.to_string()).collect();
    format!(
        "{}\n{}\n",
        serde_json::to_string(&header).expect("header serializes"),
        body.join(",")
    )
}

pub fn stacks_from_str(s: &str) -> Result<(StackConfig, ConfigHeader), LatticeError> {
    let mut lines = s.lines();
    let header_line = lines.next().ok_or(LatticeError::Empty)?;
    let header: ConfigHeader = serde_json::from_str(header_line)
        .map_err(|e| LatticeError::Parse(format!("bad header: {e}")))?;
    let body = lines.next().ok_or(LatticeError::Empty)?;
    let stacks: Result<Vec<u32>, _> = body.split(',').map(|t| t.trim().parse::<u32>()).collect();
    let stacks = stacks.map_err(|e| LatticeError::Parse(format!("bad stack value: {e}")))?;
    if stacks.is_empty() {
        return Err(LatticeError::Empty);
    }
    Ok((StackConfig::new(stacks, header.topology), header))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(word: &str) -> Config {
        Config::from_word(word, Topology::Ring).unwrap()
    }

    fn line(word: &str, base: i64) -> Config {
        Config::from_word(word, Topology::Line { base }).unwrap()
    }

    #[test]
    fn bernoulli_degenerate() {
        let zeros = sample_bernoulli(0.0, 100, 7, Topology::Ring).unwrap();
        assert_eq!(zeros.ones(), 0);
        let ones = sample_bernoulli(1.0, 100, 7, Topology::Ring).unwrap();
        assert_eq!(ones.ones(), 100);
    }

    #[test]
    fn bernoulli_rejects_bad_density() {
        assert!(sample_bernoulli(-0.1, 10, 0, Topology::Ring).is_err());
        assert!(sample_bernoulli(1.1, 10, 0, Topology::Ring).is_err());
    }

    #[test]
    fn bernoulli_deterministic_and_unbiased() {
        let a = sample_bernoulli(0.3, 1_000_000, 42, Topology::Ring).unwrap();
        let b = sample_bernoulli(0.3, 1_000_000, 42, Topology::Ring).unwrap();
        assert_eq!(a, b);
        // 3 sigma for Binomial(1e6, 0.3) is ~0.0014; the stated bound is 0.002
        assert!((a.density() - 0.3).abs() < 0.002, "density {}", a.density());
    }

    #[test]
    fn profile_of_sample_string() {
        // eta<0,6> = 0 1 1 0 1 0 1
        let cfg = line("0110101", 0);
        let p = height_profile(&cfg).unwrap();
        let got: Vec<i64> = (0..=6).map(|k| p.h(k)).collect();
        assert_eq!(got, vec![0, -1, -2, -1, -2, -1, -2]);
    }

    #[test]
    fn profile_extremes() {
        let zeros = line("000000", 1);
        let p = height_profile(&zeros).unwrap();
        for k in 1..=6 {
            assert_eq!(p.h(k), k);
        }
        let ones = line("111111", 1);
        let p = height_profile(&ones).unwrap();
        for k in 1..=6 {
            assert_eq!(p.h(k), -k);
        }
    }

    #[test]
    fn profile_roundtrip_line_and_ring() {
        let cfg = sample_bernoulli(0.4, 257, 5, Topology::Line { base: -100 }).unwrap();
        let p = height_profile(&cfg).unwrap();
        assert_eq!(reconstruct(&p), cfg);

        let cfg = sample_bernoulli(0.7, 129, 6, Topology::Ring).unwrap();
        let p = height_profile(&cfg).unwrap();
        assert_eq!(reconstruct(&p), cfg);
    }

    #[test]
    fn ring_profile_drift_is_exact() {
        let cfg = sample_bernoulli(0.3, 500, 11, Topology::Ring).unwrap();
        let p = height_profile(&cfg).unwrap();
        let drift = p.drift().unwrap();
        assert_eq!(drift, 500 - 2 * cfg.ones() as i64);
        assert_eq!(p.h(777), p.h(777 - 500) + drift);
    }

    #[test]
    fn congruences_hold_for_fresh_profiles() {
        for seed in 0..5 {
            let cfg = sample_bernoulli(0.6, 301, seed, Topology::Ring).unwrap();
            let p = height_profile(&cfg).unwrap();
            assert!(p.congruences_hold());
        }
    }

    #[test]
    fn classify_boundaries() {
        assert_eq!(classify_support(&ring("010101")), Support::BoundaryHalf);
        assert_eq!(classify_support(&ring("011011011")), Support::BoundaryTwoThirds);
        assert_eq!(classify_support(&ring("0100100")), Support::Low);
        assert_eq!(classify_support(&ring("01011")), Support::Intermediate);
        assert_eq!(classify_support(&ring("011101111")), Support::High);
        // contains both 0 0 and 1 1 1
        assert_eq!(classify_support(&ring("0011100")), Support::None);
    }

    #[test]
    fn classify_high_distance_two_rule() {
        // 0 1 0 has empty sites at distance two
        assert_eq!(classify_support(&ring("010110110")), Support::None);
    }

    #[test]
    fn rotation_and_lift() {
        let cfg = ring("0110100");
        assert_eq!(cfg.rotate_left(2).to_word_string(), "1010001");
        assert_eq!(cfg.rotate_right(2).rotate_left(2), cfg);
        let lifted = cfg.lift(3);
        assert_eq!(lifted.len(), 21);
        assert_eq!(lifted.first_site(), -7);
        assert!(lifted.site(0) == cfg.get(0) && lifted.site(-7) == cfg.get(0));
    }

    #[test]
    fn adjacent_pairs() {
        assert_eq!(ring("110110").adjacent_pair_count(), 2);
        assert_eq!(ring("110011").adjacent_pair_count(), 3); // wraps
        assert_eq!(line("110011", 0).adjacent_pair_count(), 2);
    }

    #[test]
    fn config_serialization_roundtrip() {
        let cfg = sample_bernoulli(0.5, 97, 3, Topology::Line { base: -4 }).unwrap();
        let s = config_to_string(&cfg, Some(3), Some(0.5));
        let (back, header) = config_from_str(&s).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(header.seed, Some(3));
    }

    #[test]
    fn stack_serialization_roundtrip() {
        let st = StackConfig::new(vec![2, 0, 1, 5], Topology::Ring);
        let s = stacks_to_string(&st, None, None);
        let (back, _) = stacks_from_str(&s).unwrap();
        assert_eq!(back, st);
    }

    #[test]
    fn shifts_cross_word_boundaries() {
        let cfg = sample_bernoulli(0.5, 200, 9, Topology::Ring).unwrap();
        for k in [0usize, 1, 2, 63, 64, 65, 130, 199] {
            let rot = cfg.rotate_left(k);
            for i in 0..200 {
                assert_eq!(rot.get(i), cfg.get((i + k) % 200), "k={k} i={i}");
            }
        }
    }
}
