//! Landmark sets and closed-form final configurations for the three
//! density regimes.
//!
//! Low density: `P` holds the sites whose height is a strict running
//! maximum over everything to the left; `P` never moves and the limit word
//! fills each gap with `(10)^n 0`.  High density: `Q` holds the strict
//! running minima of the starred height (stored as the integer `3h*`);
//! gaps fill with `(011)^n 1`.  Intermediate density: `P` and `Q` are the
//! interleaved right-records of `h` and `3h*`; the landmarks drift left by
//! 0/2 and 0/3 sites per step and the limit positions follow in closed
//! form from the initial profile.
//!
//! Ring words are handled through the exact periodic extension of their
//! profile: one full period of context on the relevant side reproduces the
//! infinite-lattice suprema exactly whenever the density lies strictly
//! inside the regime's interval, because the per-period drift then has a
//! definite sign.  Landmarks are reported for the principal period
//! `0..L`.  Line windows get window-relative landmarks: exact for the
//! word-as-world reading, used by the small enumerative oracles.

use crate::dynamics::{evolve_to_fixation, step_profile, DynamicsError, Fixation, Rule, Trace};
use crate::lattice::{height_profile, Config, HeightProfile, Topology};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FixationError {
    #[error("density {rho} outside the open {regime:?} interval")]
    RegimeMismatch { regime: Regime, rho: f64 },
    #[error("ring topology required for {0}")]
    RingRequired(&'static str),
    #[error("no landmarks found (window too small)")]
    EmptyChain,
    #[error("evolution did not fix within {0} steps")]
    NotFixed(u64),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Low,
    Intermediate,
    High,
}

impl Regime {
    pub fn rule(&self) -> Rule {
        match self {
            Regime::Low => Rule::Low,
            Regime::Intermediate => Rule::Intermediate,
            Regime::High => Rule::High,
        }
    }

    pub fn parse(s: &str) -> Option<Regime> {
        match s {
            "low" => Some(Regime::Low),
            "intermediate" => Some(Regime::Intermediate),
            "high" => Some(Regime::High),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Low => "low",
            Regime::Intermediate => "intermediate",
            Regime::High => "high",
        }
    }

    /// Exact open-interval density check on counts.
    pub fn density_in_range(&self, ones: usize, len: usize) -> bool {
        let (n, l) = (ones as i64, len as i64);
        match self {
            Regime::Low => 0 < n && 2 * n < l,
            Regime::Intermediate => l < 2 * n && 3 * n < 2 * l,
            Regime::High => 2 * l < 3 * n && n < l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LandmarkKind {
    P,
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Landmark {
    pub site: i64,
    pub h: i64,
    pub star3: i64,
    pub kind: LandmarkKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandmarkChain {
    pub regime: Regime,
    pub points: Vec<Landmark>,
}

impl LandmarkChain {
    pub fn sites(&self, kind: LandmarkKind) -> Vec<i64> {
        self.points
            .iter()
            .filter(|p| p.kind == kind)
            .map(|p| p.site)
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "kind,site,h,star3")?;
        for p in &self.points {
            let k = match p.kind {
                LandmarkKind::P => "p",
                LandmarkKind::Q => "q",
            };
            writeln!(w, "{},{},{},{}", k, p.site, p.h, p.star3)?;
        }
        Ok(())
    }

    /// Regime-specific structural invariants of a well-formed chain.
    pub fn invariants_hold(&self) -> bool {
        let pts = &self.points;
        if pts.is_empty() {
            return false;
        }
        if !pts.windows(2).all(|w| w[0].site < w[1].site) {
            return false;
        }
        match self.regime {
            Regime::Low => {
                pts.iter().all(|p| p.kind == LandmarkKind::P)
                    && pts.windows(2).all(|w| w[1].h == w[0].h + 1)
            }
            Regime::High => {
                pts.iter().all(|p| p.kind == LandmarkKind::Q)
                    && pts.windows(2).all(|w| w[1].star3 == w[0].star3 - 2)
            }
            Regime::Intermediate => pts.windows(2).all(|w| w[0].kind != w[1].kind),
        }
    }
}

fn landmark(profile: &HeightProfile, site: i64, kind: LandmarkKind) -> Landmark {
    Landmark {
        site,
        h: profile.h(site),
        star3: profile.star3(site),
        kind,
    }
}

fn density_of_profile(profile: &HeightProfile) -> (usize, usize) {
    let mut ones = 0usize;
    let mut len = 0usize;
    for k in profile.eta_range() {
        ones += usize::from(profile.eta(k));
        len += 1;
    }
    (ones, len)
}

fn check_density(profile: &HeightProfile, regime: Regime) -> Result<(), FixationError> {
    let (ones, len) = density_of_profile(profile);
    if regime.density_in_range(ones, len) {
        Ok(())
    } else {
        Err(FixationError::RegimeMismatch {
            regime,
            rho: ones as f64 / len as f64,
        })
    }
}

/// Strict left-records of `f` over `lo..=hi`: sites where `f` exceeds
/// (`want_max`) or undercuts everything before, scanning from `scan_lo`.
fn left_records(
    f: impl Fn(i64) -> i64,
    scan_lo: i64,
    lo: i64,
    hi: i64,
    want_max: bool,
) -> Vec<i64> {
    let mut best: Option<i64> = None;
    let mut out = Vec::new();
    for k in scan_lo..=hi {
        let v = f(k);
        let is_record = match best {
            None => true,
            Some(b) => {
                if want_max {
                    v > b
                } else {
                    v < b
                }
            }
        };
        if is_record {
            best = Some(v);
            if k >= lo {
                out.push(k);
            }
        }
    }
    out
}

/// Strict right-records of `f` over `lo..=hi`, scanning down from
/// `scan_hi`.
fn right_records(
    f: impl Fn(i64) -> i64,
    scan_hi: i64,
    lo: i64,
    hi: i64,
    want_max: bool,
) -> Vec<i64> {
    let mut best: Option<i64> = None;
    let mut out = Vec::new();
    for k in (lo..=scan_hi).rev() {
        let v = f(k);
        let is_record = match best {
            None => true,
            Some(b) => {
                if want_max {
                    v > b
                } else {
                    v < b
                }
            }
        };
        if is_record {
            best = Some(v);
            if k <= hi {
                out.push(k);
            }
        }
    }
    out.reverse();
    out
}

/// Interleave the right-record sets into the alternating landmark chain:
/// `P` keeps each `a` preceded by some `b` since the previous `a`, `Q` the
/// matching least `b` past each `p`.
fn pair_chain(profile: &HeightProfile, a: &[i64], b: &[i64], lo: i64, hi: i64) -> Vec<Landmark> {
    let p: Vec<i64> = a
        .windows(2)
        .filter(|w| b.iter().any(|&x| w[0] < x && x < w[1]))
        .map(|w| w[1])
        .collect();
    let q: Vec<i64> = b
        .windows(2)
        .filter(|w| a.iter().any(|&x| w[0] < x && x < w[1]))
        .map(|w| w[1])
        .collect();
    let mut chain = Vec::new();
    for win in p.windows(2) {
        let (pk, pn) = (win[0], win[1]);
        if pk < lo || pk > hi {
            continue;
        }
        chain.push(landmark(profile, pk, LandmarkKind::P));
        if let Some(&qk) = q.iter().find(|&&x| pk < x && x < pn) {
            debug_assert_eq!(
                Some(qk),
                b.iter().copied().find(|&x| pk < x && x < pn),
                "chain Q point must be the least B point past P"
            );
            chain.push(landmark(profile, qk, LandmarkKind::Q));
        }
    }
    chain
}

/// Landmark chain of a profile.
///
/// Ring profiles return the landmarks of the principal period `0..L`
/// (the last `Q` partner may spill past `L-1` in the intermediate chain).
/// Line profiles are scanned window-relative.
pub fn landmarks_of_profile(
    profile: &HeightProfile,
    regime: Regime,
) -> Result<LandmarkChain, FixationError> {
    check_density(profile, regime)?;
    let h = |k: i64| profile.h(k);
    let s3 = |k: i64| profile.star3(k);
    let points = match (profile.period(), regime) {
        (Some(l), Regime::Low) => {
            let l = l as i64;
            left_records(h, -l - 1, 0, l - 1, true)
                .into_iter()
                .map(|k| landmark(profile, k, LandmarkKind::P))
                .collect()
        }
        (Some(l), Regime::High) => {
            let l = l as i64;
            left_records(s3, -l - 1, 0, l - 1, false)
                .into_iter()
                .map(|k| landmark(profile, k, LandmarkKind::Q))
                .collect()
        }
        (Some(l), Regime::Intermediate) => {
            let l = l as i64;
            // collect records one period below and above the principal one
            // so every in-period point has its predecessor and successor
            let a = right_records(h, 3 * l, -l - 1, 2 * l, true);
            let b = right_records(s3, 3 * l, -l - 1, 2 * l, false);
            pair_chain(profile, &a, &b, 0, l - 1)
        }
        (None, Regime::Low) => {
            let (lo, hi) = (profile.start(), profile.end());
            left_records(h, lo, lo + 1, hi, true)
                .into_iter()
                .map(|k| landmark(profile, k, LandmarkKind::P))
                .collect()
        }
        (None, Regime::High) => {
            let (lo, hi) = (profile.start(), profile.end());
            left_records(s3, lo, lo + 1, hi, false)
                .into_iter()
                .map(|k| landmark(profile, k, LandmarkKind::Q))
                .collect()
        }
        (None, Regime::Intermediate) => {
            let (lo, hi) = (profile.start(), profile.end());
            let a = right_records(h, hi, lo, hi, true);
            let b = right_records(s3, hi, lo, hi, false);
            pair_chain(profile, &a, &b, lo, hi)
        }
    };
    let chain = LandmarkChain { regime, points };
    if chain.points.is_empty() {
        return Err(FixationError::EmptyChain);
    }
    debug_assert!(chain.invariants_hold());
    Ok(chain)
}

/// Landmark chain of a configuration (see [`landmarks_of_profile`]).
pub fn landmarks(config: &Config, regime: Regime) -> Result<LandmarkChain, FixationError> {
    let profile = height_profile(config).expect("anchored profile");
    landmarks_of_profile(&profile, regime)
}

// ---------------------------------------------------------------------------
// closed-form final states

/// The frozen (co-moving for intermediate/high) configuration a ring
/// reaches, computed from the initial landmarks without simulating.
pub fn final_state(config: &Config, regime: Regime) -> Result<Config, FixationError> {
    if !config.is_ring() {
        return Err(FixationError::RingRequired("final_state"));
    }
    let l = config.len() as i64;
    let profile = height_profile(config).expect("ring profile");
    let chain = landmarks_of_profile(&profile, regime)?;
    let mut out = Config::zeros(config.len(), Topology::Ring);
    let set = |out: &mut Config, k: i64, v: bool| {
        out.set(k.rem_euclid(l) as usize, v);
    };
    match regime {
        Regime::Low => {
            let ps = chain.sites(LandmarkKind::P);
            for (i, &p) in ps.iter().enumerate() {
                let pnext = if i + 1 < ps.len() { ps[i + 1] } else { ps[0] + l };
                let gap = pnext - p;
                debug_assert!(gap % 2 == 1);
                for rel in 1..=gap {
                    set(&mut out, p + rel, rel % 2 == 1 && rel < gap);
                }
            }
        }
        Regime::High => {
            let qs = chain.sites(LandmarkKind::Q);
            for (i, &q) in qs.iter().enumerate() {
                let qnext = if i + 1 < qs.len() { qs[i + 1] } else { qs[0] + l };
                let gap = qnext - q;
                debug_assert!(gap % 3 == 1);
                for rel in 1..=gap {
                    set(&mut out, q + rel, rel == gap || rel % 3 != 1);
                }
            }
        }
        Regime::Intermediate => {
            let ps = chain.sites(LandmarkKind::P);
            let qs = chain.sites(LandmarkKind::Q);
            debug_assert_eq!(ps.len(), qs.len());
            let count = ps.len();
            let p0 = |k: usize| {
                // wrap one period up at k = count
                if k < count {
                    ps[k]
                } else {
                    ps[k - count] + l
                }
            };
            let hp = |k: usize| profile.h(p0(k));
            let hq = |k: usize| profile.h(qs[k]);
            let s3p = |k: usize| profile.star3(p0(k));
            let s3q = |k: usize| profile.star3(qs[k]);
            // limit positions from the initial profile
            let p_inf: Vec<i64> = (0..count)
                .map(|k| qs[k] - 3 * (hp(k) - hq(k)) + 4)
                .collect();
            let q_inf: Vec<i64> = (0..count)
                .map(|k| p0(k + 1) - (s3p(k + 1) - s3q(k)) + 3)
                .collect();
            let mut covered = 0i64;
            for k in 0..count {
                let q_prev = if k == 0 {
                    q_inf[count - 1] - l
                } else {
                    q_inf[k - 1]
                };
                let two_n = p_inf[k] - q_prev - 1;
                let three_m = q_inf[k] - p_inf[k] + 1;
                debug_assert!(two_n >= 2 && two_n % 2 == 0, "bad (01) run length");
                debug_assert!(three_m >= 3 && three_m % 3 == 0, "bad (011) run length");
                covered += two_n + three_m;
                // (01)^n 0 over q_prev+1 ..= p_inf[k]
                for rel in 1..=(two_n + 1) {
                    set(&mut out, q_prev + rel, rel % 2 == 0);
                }
                // 1 1 0 1 1 ... 0 1 1 over p_inf[k]+1 ..= q_inf[k]
                for rel in 1..three_m {
                    set(&mut out, p_inf[k] + rel, rel % 3 != 0);
                }
            }
            debug_assert_eq!(covered, l, "final segments must tile the ring");
        }
    }
    debug_assert_eq!(out.ones(), config.ones());
    Ok(out)
}

/// Closed form versus simulation; returns whether they agree, the
/// simulated fixed word and the fixation time.
pub fn final_state_vs_simulation(
    config: &Config,
    regime: Regime,
    max_t: u64,
) -> Result<(bool, Config, u64), FixationError> {
    let closed = final_state(config, regime)?;
    let (sim, fx) = evolve_to_fixation(config, regime.rule(), max_t)?;
    match fx {
        Fixation::Fixed { t } => Ok((closed == sim, sim, t)),
        Fixation::NotFixed { max_t } => Err(FixationError::NotFixed(max_t)),
    }
}

// ---------------------------------------------------------------------------
// landmark motion

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MotionReport {
    pub steps: usize,
    pub landmarks_checked: usize,
    pub violations: Vec<String>,
}

impl MotionReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn norm_point(site: i64, value: i64, l: i64, drift: i64) -> (i64, i64) {
    // reduce a lifted landmark into the principal period, carrying its
    // profile value across by the per-period drift
    let q = site.div_euclid(l);
    (site - q * l, value - q * drift)
}

/// Check every step of a ring trace against the landmark motion rules.
///
/// Low: `P` and the heights on it never change, and `h` is pointwise
/// nondecreasing.  High: `Q` and `3h*` on it never change, and `3h*` is
/// pointwise nonincreasing.  Intermediate: each `p` stays or moves two
/// sites left exactly when the three sites after it read `1 1 1`, each `q`
/// stays or moves three sites left exactly when the two sites after it
/// read `0 0`; the profile values ride along unchanged.
pub fn verify_landmark_motion(
    trace: &Trace,
    regime: Regime,
) -> Result<MotionReport, FixationError> {
    let first = &trace.frames[0];
    if !first.is_ring() {
        return Err(FixationError::RingRequired("verify_landmark_motion"));
    }
    if trace.rule != regime.rule() {
        return Err(FixationError::RegimeMismatch {
            regime,
            rho: first.density(),
        });
    }
    let l = first.len() as i64;
    let mut report = MotionReport::default();
    let mut profile = height_profile(first).expect("ring profile");
    let mut chain = landmarks_of_profile(&profile, regime)?;
    for (t, pair) in trace.frames.windows(2).enumerate() {
        let (cur, next) = (&pair[0], &pair[1]);
        let next_profile = step_profile(&profile, regime.rule())?;
        if crate::lattice::reconstruct(&next_profile) != *next {
            report
                .violations
                .push(format!("t={t}: profile step disagrees with word step"));
            break;
        }
        let next_chain = landmarks_of_profile(&next_profile, regime)?;
        report.steps += 1;
        report.landmarks_checked += chain.points.len();
        match regime {
            Regime::Low => {
                let same = chain.points.len() == next_chain.points.len()
                    && chain
                        .points
                        .iter()
                        .zip(next_chain.points.iter())
                        .all(|(a, b)| a.site == b.site && a.h == b.h);
                if !same {
                    report
                        .violations
                        .push(format!("t={t}: P set or heights moved"));
                }
                for k in 0..l {
                    if next_profile.h(k) < profile.h(k) {
                        report.violations.push(format!("t={t}: h decreased at {k}"));
                        break;
                    }
                }
            }
            Regime::High => {
                let same = chain.points.len() == next_chain.points.len()
                    && chain
                        .points
                        .iter()
                        .zip(next_chain.points.iter())
                        .all(|(a, b)| a.site == b.site && a.star3 == b.star3);
                if !same {
                    report.violations.push(format!("t={t}: Q set or 3h* moved"));
                }
                for k in 0..l {
                    if next_profile.star3(k) > profile.star3(k) {
                        report
                            .violations
                            .push(format!("t={t}: 3h* increased at {k}"));
                        break;
                    }
                }
            }
            Regime::Intermediate => {
                let drift = profile.drift().unwrap();
                let s3_drift = 3 * drift + l;
                let word = |k: i64| cur.get(k.rem_euclid(l) as usize);
                let mut predicted_p = Vec::new();
                let mut predicted_q = Vec::new();
                for pt in &chain.points {
                    match pt.kind {
                        LandmarkKind::P => {
                            let moves =
                                word(pt.site + 1) && word(pt.site + 2) && word(pt.site + 3);
                            let stays =
                                word(pt.site + 1) && word(pt.site + 2) && !word(pt.site + 3);
                            if !moves && !stays {
                                report.violations.push(format!(
                                    "t={t}: p at {} sees neither 1 1 0 nor 1 1 1",
                                    pt.site
                                ));
                            }
                            let site = if moves { pt.site - 2 } else { pt.site };
                            predicted_p.push(norm_point(site, pt.h, l, drift));
                        }
                        LandmarkKind::Q => {
                            if word(pt.site + 1) {
                                report.violations.push(format!(
                                    "t={t}: q at {} not followed by a hole",
                                    pt.site
                                ));
                            }
                            let site = if !word(pt.site + 2) { pt.site - 3 } else { pt.site };
                            predicted_q.push(norm_point(site, pt.star3, l, s3_drift));
                        }
                    }
                }
                let mut got_p: Vec<(i64, i64)> = next_chain
                    .points
                    .iter()
                    .filter(|p| p.kind == LandmarkKind::P)
                    .map(|p| (p.site, p.h))
                    .collect();
                let mut got_q: Vec<(i64, i64)> = next_chain
                    .points
                    .iter()
                    .filter(|p| p.kind == LandmarkKind::Q)
                    .map(|p| norm_point(p.site, p.star3, l, s3_drift))
                    .collect();
                predicted_p.sort_unstable();
                predicted_q.sort_unstable();
                got_p.sort_unstable();
                got_q.sort_unstable();
                if predicted_p != got_p {
                    report.violations.push(format!(
                        "t={t}: P motion mismatch {predicted_p:?} vs {got_p:?}"
                    ));
                }
                if predicted_q != got_q {
                    report.violations.push(format!(
                        "t={t}: Q motion mismatch {predicted_q:?} vs {got_q:?}"
                    ));
                }
            }
        }
        if !report.violations.is_empty() {
            break;
        }
        profile = next_profile;
        chain = next_chain;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// intermediate-chain consequences

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MidReport {
    pub pairs_checked: usize,
    pub violations: Vec<String>,
}

impl MidReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the four local consequences of the intermediate chain on a ring:
/// `3h*(p+2) = 3h*(p) - 4`, `h(q+1) = h(q) + 1`, `3h*(q) <= 3h*(p+2)`,
/// and `h(p_next) >= h(q) + 1`.
pub fn verify_midlemmas(config: &Config) -> Result<MidReport, FixationError> {
    if !config.is_ring() {
        return Err(FixationError::RingRequired("verify_midlemmas"));
    }
    let l = config.len() as i64;
    let profile = height_profile(config).expect("ring profile");
    let chain = landmarks_of_profile(&profile, Regime::Intermediate)?;
    let ps = chain.sites(LandmarkKind::P);
    let qs = chain.sites(LandmarkKind::Q);
    let mut report = MidReport::default();
    for k in 0..ps.len() {
        report.pairs_checked += 1;
        let p = ps[k];
        let q = qs[k];
        let p_next = if k + 1 < ps.len() { ps[k + 1] } else { ps[0] + l };
        if profile.star3(p + 2) != profile.star3(p) - 4 {
            report.violations.push(format!("3h* drop after p at {p}"));
        }
        if profile.h(q + 1) != profile.h(q) + 1 {
            report.violations.push(format!("h rise after q at {q}"));
        }
        if profile.star3(q) > profile.star3(p + 2) {
            report
                .violations
                .push(format!("3h*(q) above 3h*(p+2) at {q}"));
        }
        if profile.h(p_next) < profile.h(q) + 1 {
            report
                .violations
                .push(format!("h(p_next) below h(q)+1 at {q}"));
        }
    }
    Ok(report)
}

/// Whether the modified TASEP and the facilitated rule freeze a low
/// density ring into the same word.
pub fn modified_tasep_equivalence(config: &Config, max_t: u64) -> Result<bool, FixationError> {
    if !config.is_ring() {
        return Err(FixationError::RingRequired("modified_tasep_equivalence"));
    }
    if !Regime::Low.density_in_range(config.ones(), config.len()) {
        return Err(FixationError::RegimeMismatch {
            regime: Regime::Low,
            rho: config.density(),
        });
    }
    let (fac, fx1) = evolve_to_fixation(config, Rule::Low, max_t)?;
    let mut cur = config.clone();
    let mut fixed_mod = None;
    for _ in 0..=max_t {
        let next = crate::dynamics::step(&cur, Rule::ModifiedTasep)?;
        if next == cur {
            fixed_mod = Some(cur);
            break;
        }
        cur = next;
    }
    match (fx1, fixed_mod) {
        (Fixation::Fixed { .. }, Some(word)) => Ok(word == fac),
        _ => Err(FixationError::NotFixed(max_t)),
    }
}

/// Fraction of ring sites in `P` (low) or `Q` (high).
pub fn landmark_density(config: &Config, regime: Regime) -> Result<f64, FixationError> {
    let chain = landmarks(config, regime)?;
    Ok(chain.points.len() as f64 / config.len() as f64)
}
