//! One-step evolution rules and evolution-to-fixation drivers.
//!
//! All rules are fully parallel: every jump decision reads the time-`t`
//! word only.  Word updates run branch-free on 64-site blocks.
//!
//! Line windows use closed ends: nothing enters from outside (the sites
//! left of the window read as empty) and the last site never jumps out
//! (the site right of the window reads as occupied).  Analyses on lines
//! should restrict to the safe interior, sites further than `t` from the
//! edges after `t` steps.

use crate::lattice::{
    self, mask_tail, rotl_bits, rotr_bits, shl_bits, shr_bits, Config, HeightProfile, StackConfig,
    Topology,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("rule {0:?} does not apply to this state kind")]
    WrongStateKind(Rule),
    #[error("rule {0:?} requires a ring")]
    RingRequired(Rule),
    #[error("max_t must be positive")]
    BadMaxT,
    #[error("rule {0:?} is not a fixation rule")]
    NotFixationRule(Rule),
    #[error("trace is empty or malformed: {0}")]
    BadTrace(String),
}

/// The word-level update rules.
///
/// `Low` is the plain facilitated rule; `Intermediate` composes it with a
/// left shift by two sites and `High` with a right shift by one, so that
/// words in the matching support are fixed points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    Ftasep,
    Low,
    Intermediate,
    High,
    Tasm,
    ModifiedTasep,
}

impl Rule {
    pub fn parse(s: &str) -> Option<Rule> {
        match s {
            "ftasep" => Some(Rule::Ftasep),
            "low" => Some(Rule::Low),
            "intermediate" => Some(Rule::Intermediate),
            "high" => Some(Rule::High),
            "tasm" => Some(Rule::Tasm),
            "modified-tasep" | "modified_tasep" => Some(Rule::ModifiedTasep),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Rule::Ftasep => "ftasep",
            Rule::Low => "low",
            Rule::Intermediate => "intermediate",
            Rule::High => "high",
            Rule::Tasm => "tasm",
            Rule::ModifiedTasep => "modified-tasep",
        }
    }
}

/// One parallel facilitated step: a particle at `j` moves to `j+1` iff
/// `j-1` is occupied and `j+1` empty.
fn step_ftasep(config: &Config) -> Config {
    let w = config.words();
    let len = config.len();
    let (l1, l2, r1) = match config.topology() {
        Topology::Ring => (
            rotr_bits(w, len, 1),
            rotr_bits(w, len, 2),
            rotl_bits(w, len, 1),
        ),
        Topology::Line { .. } => {
            let mut r1 = shr_bits(w, len, 1);
            // closed right end: the site past the window reads occupied
            let last = len - 1;
            r1[last / lattice::BITS] |= 1u64 << (last % lattice::BITS);
            (shl_bits(w, len, 1), shl_bits(w, len, 2), r1)
        }
    };
    let mut out = Vec::with_capacity(w.len());
    for i in 0..w.len() {
        let jump_out = w[i] & l1[i] & !r1[i];
        let jump_in = !w[i] & l1[i] & l2[i];
        out.push((w[i] & !jump_out) | jump_in);
    }
    mask_tail(&mut out, len);
    Config::from_words(out, len, config.topology())
}

/// Modified TASEP step: in every maximal particle block the left-most
/// particle stays and the rest move one site right.  Rings only.
fn step_modified_tasep(config: &Config) -> Config {
    let w = config.words();
    let len = config.len();
    let l1 = rotr_bits(w, len, 1);
    let l2 = rotr_bits(w, len, 2);
    let mut out = Vec::with_capacity(w.len());
    for i in 0..w.len() {
        // a particle moves iff its left neighbor is occupied
        out.push((w[i] & !l1[i]) | (l1[i] & l2[i]));
    }
    mask_tail(&mut out, len);
    Config::from_words(out, len, config.topology())
}

/// Apply a word rule.  `Tasm` is rejected here; see [`step_tasm`].
pub fn step(config: &Config, rule: Rule) -> Result<Config, DynamicsError> {
    match rule {
        Rule::Ftasep | Rule::Low => Ok(step_ftasep(config)),
        Rule::Intermediate => {
            if !config.is_ring() {
                return Err(DynamicsError::RingRequired(rule));
            }
            Ok(step_ftasep(config).rotate_left(2))
        }
        Rule::High => {
            if !config.is_ring() {
                return Err(DynamicsError::RingRequired(rule));
            }
            Ok(step_ftasep(config).rotate_right(1))
        }
        Rule::ModifiedTasep => {
            if !config.is_ring() {
                return Err(DynamicsError::RingRequired(rule));
            }
            Ok(step_modified_tasep(config))
        }
        Rule::Tasm => Err(DynamicsError::WrongStateKind(rule)),
    }
}

/// One stack-model step: every stack with at least two particles sends one
/// particle to its right neighbor, simultaneously.
///
/// On a line the first stack receives nothing and the last never sends.
pub fn step_tasm(stacks: &StackConfig) -> StackConfig {
    let n = stacks.len();
    let v = &stacks.stacks;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = v[k];
        let sends = v[k] >= 2 && !(matches!(stacks.topology, Topology::Line { .. }) && k == n - 1);
        if sends {
            x -= 1;
        }
        let left = if k == 0 {
            match stacks.topology {
                Topology::Ring => Some(v[n - 1]),
                Topology::Line { .. } => None,
            }
        } else {
            Some(v[k - 1])
        };
        if let Some(lv) = left {
            if lv >= 2 {
                x += 1;
            }
        }
        out.push(x);
    }
    StackConfig::new(out, stacks.topology)
}

/// Sites whose particle jumps in the next facilitated step.
pub fn jump_sites(config: &Config) -> Vec<usize> {
    let w = config.words();
    let len = config.len();
    let (l1, r1) = match config.topology() {
        Topology::Ring => (rotr_bits(w, len, 1), rotl_bits(w, len, 1)),
        Topology::Line { .. } => {
            let mut r1 = shr_bits(w, len, 1);
            let last = len - 1;
            r1[last / lattice::BITS] |= 1u64 << (last % lattice::BITS);
            (shl_bits(w, len, 1), r1)
        }
    };
    let mut sites = Vec::new();
    for i in 0..w.len() {
        let mut jumps = w[i] & l1[i] & !r1[i];
        while jumps != 0 {
            let b = jumps.trailing_zeros() as usize;
            sites.push(i * lattice::BITS + b);
            jumps &= jumps - 1;
        }
    }
    sites
}

// ---------------------------------------------------------------------------
// profile evolution

/// One step on height profiles, with the shift conventions that make each
/// rule's stationary words literally stationary.
///
/// `Ftasep`/`Low` work on lines and rings; `Intermediate` and `High` on
/// ring profiles only.  The additive constant is carried, not re-anchored,
/// so profile values stay comparable across time.
pub fn step_profile(profile: &HeightProfile, rule: Rule) -> Result<HeightProfile, DynamicsError> {
    match rule {
        Rule::Ftasep | Rule::Low => Ok(step_profile_base(profile)),
        Rule::Intermediate => {
            let l = profile
                .period()
                .ok_or(DynamicsError::RingRequired(rule))? as i64;
            let stepped = step_profile_base(profile);
            let h: Vec<i64> = (0..=l).map(|k| stepped.h(k + 2)).collect();
            Ok(HeightProfile::from_raw(0, h, Some(l as usize)))
        }
        Rule::High => {
            let l = profile
                .period()
                .ok_or(DynamicsError::RingRequired(rule))? as i64;
            let stepped = step_profile_base(profile);
            let h: Vec<i64> = (0..=l).map(|k| stepped.h(k - 1) - 1).collect();
            Ok(HeightProfile::from_raw(0, h, Some(l as usize)))
        }
        Rule::Tasm | Rule::ModifiedTasep => Err(DynamicsError::WrongStateKind(rule)),
    }
}

/// `h(k) += 2` exactly at jump sites: where `eta(k-1)=eta(k)=1, eta(k+1)=0`.
fn step_profile_base(profile: &HeightProfile) -> HeightProfile {
    let start = profile.start();
    let end = profile.end();
    let mut out = profile.clone();
    match profile.period() {
        Some(l) => {
            let l = l as i64;
            let vals = out.values_mut();
            for k in 0..l {
                if profile.eta(k - 1) && profile.eta(k) && !profile.eta(k + 1) {
                    vals[k as usize] += 2;
                }
            }
            let d = profile.h(l) - profile.h(0);
            vals[l as usize] = vals[0] + d;
        }
        None => {
            let vals = out.values_mut();
            // the window edges follow the closed-end word convention:
            // eta(start) reads as 0, eta(end+1) as 1, so neither edge bumps
            for k in (start + 2)..end {
                if profile.eta(k - 1) && profile.eta(k) && !profile.eta(k + 1) {
                    vals[(k - start) as usize] += 2;
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// fixation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fixation {
    Fixed { t: u64 },
    NotFixed { max_t: u64 },
}

impl Fixation {
    pub fn fixed_time(&self) -> Option<u64> {
        match self {
            Fixation::Fixed { t } => Some(*t),
            Fixation::NotFixed { .. } => None,
        }
    }
}

/// Default step cap used by fixation drivers: empirically fixation occurs
/// in O(L) steps away from the boundary densities.
pub fn default_max_t(len: usize) -> u64 {
    10 * len as u64
}

/// Iterate `rule` until the word stops changing, returning the first `t`
/// with `step(eta_t) = eta_t` and the fixed word, or the state at `max_t`.
pub fn evolve_to_fixation(
    config: &Config,
    rule: Rule,
    max_t: u64,
) -> Result<(Config, Fixation), DynamicsError> {
    if !matches!(rule, Rule::Low | Rule::Intermediate | Rule::High) {
        return Err(DynamicsError::NotFixationRule(rule));
    }
    if max_t == 0 {
        return Err(DynamicsError::BadMaxT);
    }
    let mut cur = config.clone();
    for t in 0..=max_t {
        let next = step(&cur, rule)?;
        if next == cur {
            return Ok((cur, Fixation::Fixed { t }));
        }
        cur = next;
    }
    Ok((cur, Fixation::NotFixed { max_t }))
}

// ---------------------------------------------------------------------------
// traces

/// A run of configurations under one rule; frame `i` is time `t0 + i` and
/// consecutive frames are related by exactly one rule application.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rule: Rule,
    pub t0: u64,
    pub frames: Vec<Config>,
}

impl Trace {
    /// Record `steps` applications of `rule`, keeping every frame.
    pub fn record(config: &Config, rule: Rule, steps: u64) -> Result<Trace, DynamicsError> {
        let mut frames = Vec::with_capacity(steps as usize + 1);
        frames.push(config.clone());
        for _ in 0..steps {
            let next = step(frames.last().unwrap(), rule)?;
            frames.push(next);
        }
        Ok(Trace {
            rule,
            t0: 0,
            frames,
        })
    }

    /// Record until fixation (or `max_t`), keeping every frame.
    pub fn record_to_fixation(
        config: &Config,
        rule: Rule,
        max_t: u64,
    ) -> Result<(Trace, Fixation), DynamicsError> {
        if max_t == 0 {
            return Err(DynamicsError::BadMaxT);
        }
        let mut frames = vec![config.clone()];
        for t in 0..=max_t {
            let next = step(frames.last().unwrap(), rule)?;
            if next == *frames.last().unwrap() {
                return Ok((
                    Trace {
                        rule,
                        t0: 0,
                        frames,
                    },
                    Fixation::Fixed { t },
                ));
            }
            frames.push(next);
        }
        Ok((
            Trace {
                rule,
                t0: 0,
                frames,
            },
            Fixation::NotFixed { max_t },
        ))
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceHeader {
    kind: String,
    rule: Rule,
    t0: u64,
    topology: Topology,
    len: usize,
    frames: usize,
}

/// Text export: JSON header line, then one 0/1 word per frame.
pub fn trace_to_text(trace: &Trace) -> String {
    let first = &trace.frames[0];
    let header = TraceHeader {
        kind: "trace".into(),
        rule: trace.rule,
        t0: trace.t0,
        topology: first.topology(),
        len: first.len(),
        frames: trace.frames.len(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for f in &trace.frames {
        out.push_str(&f.to_word_string());
        out.push('\n');
    }
    out
}

pub fn trace_from_text(s: &str) -> Result<Trace, DynamicsError> {
    let mut lines = s.lines();
    let header: TraceHeader = serde_json::from_str(
        lines
            .next()
            .ok_or_else(|| DynamicsError::BadTrace("missing header".into()))?,
    )
    .map_err(|e| DynamicsError::BadTrace(format!("bad header: {e}")))?;
    let mut frames = Vec::with_capacity(header.frames);
    for line in lines.take(header.frames) {
        let cfg = Config::from_word(line, header.topology)
            .map_err(|e| DynamicsError::BadTrace(format!("bad frame: {e}")))?;
        if cfg.len() != header.len {
            return Err(DynamicsError::BadTrace("frame length mismatch".into()));
        }
        frames.push(cfg);
    }
    if frames.len() != header.frames {
        return Err(DynamicsError::BadTrace("frame count mismatch".into()));
    }
    Ok(Trace {
        rule: header.rule,
        t0: header.t0,
        frames,
    })
}

/// Compact binary export: magic `FTRC`, format version byte, JSON header
/// block, then frames packed 8 sites per byte (LSB first).
pub const TRACE_MAGIC: &[u8; 4] = b"FTRC";
pub const TRACE_VERSION: u8 = 1;

pub fn trace_to_binary(trace: &Trace) -> Vec<u8> {
    let first = &trace.frames[0];
    let header = TraceHeader {
        kind: "trace".into(),
        rule: trace.rule,
        t0: trace.t0,
        topology: first.topology(),
        len: first.len(),
        frames: trace.frames.len(),
    };
    let header_json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::new();
    out.extend_from_slice(TRACE_MAGIC);
    out.push(TRACE_VERSION);
    out.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_json);
    let frame_bytes = first.len().div_ceil(8);
    for f in &trace.frames {
        let mut bytes = vec![0u8; frame_bytes];
        for (i, b) in f.iter_bits().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        out.extend_from_slice(&bytes);
    }
    out
}

pub fn trace_from_binary(data: &[u8]) -> Result<Trace, DynamicsError> {
    let bad = |m: &str| DynamicsError::BadTrace(m.into());
    if data.len() < 9 || &data[0..4] != TRACE_MAGIC {
        return Err(bad("missing magic"));
    }
    if data[4] != TRACE_VERSION {
        return Err(bad("unsupported version"));
    }
    let hlen = u32::from_le_bytes(data[5..9].try_into().unwrap()) as usize;
    if data.len() < 9 + hlen {
        return Err(bad("truncated header"));
    }
    let header: TraceHeader = serde_json::from_slice(&data[9..9 + hlen])
        .map_err(|e| DynamicsError::BadTrace(format!("bad header: {e}")))?;
    let frame_bytes = header.len.div_ceil(8);
    let body = &data[9 + hlen..];
    if body.len() != frame_bytes * header.frames {
        return Err(bad("truncated frames"));
    }
    let mut frames = Vec::with_capacity(header.frames);
    for chunk in body.chunks_exact(frame_bytes) {
        let sites = (0..header.len).map(|i| (chunk[i / 8] >> (i % 8)) & 1 == 1);
        frames.push(Config::from_bits(sites, header.topology));
    }
    Ok(Trace {
        rule: header.rule,
        t0: header.t0,
        frames,
    })
}

// ---------------------------------------------------------------------------
// per-step invariants

/// Stack value transitions allowed in one step: from `v >= 3` only down or
/// stay, `2 <-> 1`, `0 -> 1`; an increase requires the left neighbor to
/// have held at least 2 and a decrease that it held at most 1.
pub fn stack_transition_allowed(before: u32, after: u32, left_before: u32) -> bool {
    let delta = after as i64 - before as i64;
    match delta {
        0 => {
            if before >= 2 {
                left_before >= 2
            } else {
                left_before <= 1
            }
        }
        1 => before <= 1 && left_before >= 2,
        -1 => before >= 2 && left_before <= 1,
        _ => false,
    }
}

/// Check one stack step against the transition diagram; rings wrap.
pub fn check_stack_step(before: &StackConfig, after: &StackConfig) -> bool {
    let n = before.len();
    if after.len() != n || before.topology != after.topology {
        return false;
    }
    (0..n).all(|k| {
        let left = if k == 0 {
            match before.topology {
                Topology::Ring => before.stacks[n - 1],
                Topology::Line { .. } => 0,
            }
        } else {
            before.stacks[k - 1]
        };
        // the final line stack never sends; its "stay" at >=2 is legal
        if matches!(before.topology, Topology::Line { .. })
            && k == n - 1
            && after.stacks[k] >= before.stacks[k]
        {
            let gained = after.stacks[k] - before.stacks[k];
            return gained == u32::from(left >= 2);
        }
        stack_transition_allowed(before.stacks[k], after.stacks[k], left)
    })
}
