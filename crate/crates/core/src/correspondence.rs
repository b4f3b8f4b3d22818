//! Substitution maps between the stack picture and the particle picture,
//! the identity tying the two dynamics together, and geometric stack
//! sampling.
//!
//! `phi` rewrites each stack of height `v` as the string `1^v 0`.  On a
//! line the image starts with one conventional empty site; on a ring that
//! empty site is the seam at index 0, which is the trailing hole of the
//! *last* stack's block.

use crate::dynamics::{step, step_tasm, Rule};
use crate::lattice::{geometric, Config, StackConfig, Topology};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CorrespondenceError {
    #[error("word does not start with an empty site")]
    MissingSeamHole,
    #[error("line word does not end a stack block (trailing 1s)")]
    DanglingBlock,
    #[error("stack density {0} must lie in [0,1)")]
    InvalidStackDensity(f64),
    #[error("ring topology required")]
    RingRequired,
}

/// Shift exponent of the key identity: 0 for stacks of height 0 or 1, 1
/// for height at least 2 (exactly the stacks that send a particle).
pub fn gamma(v: u32) -> u32 {
    u32::from(v >= 2)
}

/// Stack word -> particle word.
///
/// Line: `0 1^{v_1} 0 1^{v_2} 0 ... 1^{v_m} 0`, length `sum + m + 1`,
/// based at site 0 so the blocks sit at the conventional positions.
/// Ring: the same string with the final hole identified with index 0,
/// length `sum + m`.
pub fn phi(stacks: &StackConfig) -> Config {
    let total: usize = stacks.stacks.iter().map(|&v| v as usize).sum();
    match stacks.topology {
        Topology::Line { .. } => {
            let mut sites = Vec::with_capacity(total + stacks.len() + 1);
            sites.push(false);
            for &v in &stacks.stacks {
                sites.extend(std::iter::repeat_n(true, v as usize));
                sites.push(false);
            }
            Config::from_bits(sites, Topology::Line { base: 0 })
        }
        Topology::Ring => {
            let mut sites = Vec::with_capacity(total + stacks.len());
            for &v in &stacks.stacks {
                sites.push(false);
                sites.extend(std::iter::repeat_n(true, v as usize));
            }
            Config::from_bits(sites, Topology::Ring)
        }
    }
}

/// Particle word -> stack word; inverse of [`phi`] on words whose site 0
/// is empty (and, on a line, whose last site is empty).
pub fn psi(config: &Config) -> Result<StackConfig, CorrespondenceError> {
    if config.get(0) {
        return Err(CorrespondenceError::MissingSeamHole);
    }
    match config.topology() {
        Topology::Line { .. } => {
            if config.get(config.len() - 1) {
                return Err(CorrespondenceError::DanglingBlock);
            }
            let mut stacks = Vec::new();
            let mut run = 0u32;
            for i in 1..config.len() {
                if config.get(i) {
                    run += 1;
                } else {
                    stacks.push(run);
                    run = 0;
                }
            }
            Ok(StackConfig::new(stacks, config.topology()))
        }
        Topology::Ring => {
            let mut stacks = Vec::new();
            let mut run = 0u32;
            for i in 1..config.len() {
                if config.get(i) {
                    run += 1;
                } else {
                    stacks.push(run);
                    run = 0;
                }
            }
            stacks.push(run); // the run wrapping back to the seam hole
            Ok(StackConfig::new(stacks, Topology::Ring))
        }
    }
}

/// Verify `U phi(n) = tau^{-gamma(n0)} phi(U_hat n)` on a ring, where `n0`
/// is the stack whose block ends at the seam (the last stored stack).
pub fn check_key_identity(stacks: &StackConfig) -> Result<bool, CorrespondenceError> {
    if !stacks.is_ring() {
        return Err(CorrespondenceError::RingRequired);
    }
    let lhs = step(&phi(stacks), Rule::Ftasep).expect("word rule on word");
    let shift = gamma(*stacks.stacks.last().unwrap());
    let rhs = phi(&step_tasm(stacks)).rotate_left(shift as usize);
    Ok(lhs == rhs)
}

/// I.i.d. stacks with `P(v = k) = (1-rho) rho^k`; mean `rho/(1-rho)`.
///
/// `phi` of the output has particle density `rho` in expectation.
pub fn sample_geometric_stacks(
    rho: f64,
    length: usize,
    seed: u64,
    topology: Topology,
) -> Result<StackConfig, CorrespondenceError> {
    if !(0.0..1.0).contains(&rho) || rho.is_nan() {
        return Err(CorrespondenceError::InvalidStackDensity(rho));
    }
    assert!(length > 0);
    let mut rng = crate::rng_from_seed(seed);
    let stacks = (0..length).map(|_| geometric(rho, &mut rng)).collect();
    Ok(StackConfig::new(stacks, topology))
}

/// Translation-invariant particle sample at density `rho`: geometric
/// stacks pushed through `phi` and rotated by a uniformly random seam.
///
/// On a ring the uniform rotation realizes exactly the size-biased
/// translation mixture that makes the pushed-forward stack measure
/// translation invariant.
pub fn sample_phi_rotated(
    rho: f64,
    stack_count: usize,
    seed: u64,
) -> Result<Config, CorrespondenceError> {
    use rand::Rng as _;
    let stacks = sample_geometric_stacks(rho, stack_count, seed, Topology::Ring)?;
    let word = phi(&stacks);
    let mut rng = crate::rng_from_seed(seed ^ 0x9e37_79b9_7f4a_7c15);
    let shift = rng.random_range(0..word.len());
    Ok(word.rotate_left(shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn phi_line_example() {
        let st = StackConfig::new(vec![2, 0, 1], Topology::Line { base: 1 });
        assert_eq!(phi(&st).to_word_string(), "0110010");
    }

    #[test]
    fn phi_of_zero_stacks() {
        let st = StackConfig::new(vec![0; 5], Topology::Line { base: 1 });
        assert_eq!(phi(&st).to_word_string(), "000000");
        let st = StackConfig::new(vec![0; 5], Topology::Ring);
        assert_eq!(phi(&st).to_word_string(), "00000");
    }

    #[test]
    fn psi_rejects_bad_words() {
        let w = Config::from_word("10", Topology::Ring).unwrap();
        assert_eq!(psi(&w), Err(CorrespondenceError::MissingSeamHole));
        let w = Config::from_word("011", Topology::Line { base: 0 }).unwrap();
        assert_eq!(psi(&w), Err(CorrespondenceError::DanglingBlock));
    }

    #[test]
    fn key_identity_no_shift_when_last_stack_small() {
        // last stack 0 or 1 leaves the seam hole in place
        let st = StackConfig::new(vec![3, 2, 0], Topology::Ring);
        assert_eq!(gamma(0), 0);
        assert!(check_key_identity(&st).unwrap());
    }

    #[test]
    fn key_identity_shift_when_last_stack_sends() {
        let st = StackConfig::new(vec![1, 0, 3], Topology::Ring);
        assert_eq!(gamma(3), 1);
        assert!(check_key_identity(&st).unwrap());
    }

    #[test]
    fn fixed_point_stack_words() {
        // all values <= 1 and all values >= 2 are fixed
        let low = StackConfig::new(vec![1, 0, 1, 1, 0], Topology::Ring);
        assert_eq!(step_tasm(&low), low);
        let high = StackConfig::new(vec![2, 5, 3, 2], Topology::Ring);
        assert_eq!(step_tasm(&high), high);
        // values in {1,2} rotate one site right per step
        let mid = StackConfig::new(vec![1, 2, 2, 1, 2], Topology::Ring);
        let next = step_tasm(&mid);
        let rotated: Vec<u32> = (0..mid.len())
            .map(|k| mid.stacks[(k + mid.len() - 1) % mid.len()])
            .collect();
        assert_eq!(next.stacks, rotated);
    }

    #[test]
    fn geometric_mean_matches() {
        let st = sample_geometric_stacks(0.5, 1_000_000, 11, Topology::Ring).unwrap();
        // mean rho/(1-rho) = 1, variance rho/(1-rho)^2 = 2: 3 sigma ~ 0.0042
        assert!((st.mean() - 1.0).abs() < 0.005, "mean {}", st.mean());
    }

    #[test]
    fn phi_density_relation() {
        let st = sample_geometric_stacks(0.6, 500_000, 12, Topology::Ring).unwrap();
        let w = phi(&st);
        assert!((w.density() - 0.6).abs() < 0.003, "density {}", w.density());
        // exact count identity: ones/(ones+stacks)
        assert_eq!(w.ones() as u64, st.particles());
        assert_eq!(w.len(), st.particles() as usize + st.len());
    }

    #[test]
    fn rotated_sample_density() {
        let w = sample_phi_rotated(0.6, 200_000, 5).unwrap();
        assert!((w.density() - 0.6).abs() < 0.005);
    }

    #[test]
    fn geometric_rejects_one() {
        assert!(sample_geometric_stacks(1.0, 10, 0, Topology::Ring).is_err());
    }

    proptest! {
        #[test]
        fn psi_phi_roundtrip(seed in 0u64..2000) {
            let st = sample_geometric_stacks(0.55, 40, seed, Topology::Ring).unwrap();
            prop_assert_eq!(psi(&phi(&st)).unwrap(), st);
            let stl = sample_geometric_stacks(0.55, 40, seed, Topology::Line { base: 1 }).unwrap();
            prop_assert_eq!(psi(&phi(&stl)).unwrap().stacks, stl.stacks);
        }

        #[test]
        fn key_identity_random(seed in 0u64..2000) {
            let st = sample_geometric_stacks(0.5, 30, seed, Topology::Ring).unwrap();
            prop_assert!(check_key_identity(&st).unwrap());
        }
    }
}
