//! Monte Carlo estimate of `P[M >= m]` by direct pulse simulation.
//!
//! This path never touches hit windows or interval sets: it draws `t_f`
//! and, for every pilot, locates the nearest pulse by direct arithmetic on the
//! pulse train. It is the independent oracle for the
//! exact engine.
//!
//! Sampling is split into fixed-size blocks. Block `b` uses a ChaCha8 stream
//! seeded from the 64-bit seed with stream id `b`, so the result does not
//! depend on thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::check_m;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Samples per independent RNG stream.
pub const MC_BLOCK: u64 = 1 << 16;

/// Identifier recorded next to Monte Carlo output.
pub const MC_ALGORITHM: &str = "chacha8(seed_from_u64,stream=block)/block=65536";

/// Derives an independent 64-bit seed for sub-run `index` (SplitMix64).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub successes: u64,
}

impl McEstimate {
    fn from_counts(successes: u64, n_samples: u64) -> Self {
        let est = successes as f64 / n_samples as f64;
        Self {
            estimate: est,
            stderr: (est * (1.0 - est) / n_samples as f64).sqrt(),
            n_samples,
            successes,
        }
    }
}

/// Distinct pilots overlapped by the pulse train whose first pulse arrives at
/// `t_f`. `scratch` must have length `n_p`.
///
/// For each path and pilot, only the first pulse starting no earlier than
/// `pilot_start - t_pulse` can be the earliest overlapping one, so it is the
/// only pulse tested.
pub fn pilots_hit(scn: &Scenario, t_f: f64, scratch: &mut [bool]) -> u32 {
    scratch.fill(false);
    let (t_ofdm, t_pil, t_pulse, t_rep) = (scn.t_ofdm(), scn.t_pil(), scn.t_pulse(), scn.t_rep());
    let t_csi = scn.t_csi();
    for delay in scn.path_delays() {
        let first = t_f + delay;
        for (l, hit) in scratch.iter_mut().enumerate() {
            if *hit {
                continue;
            }
            let pil_lo = l as f64 * t_pil;
            let j = ((pil_lo - t_pulse - first) / t_rep).ceil().max(0.0);
            let start = first + j * t_rep;
            *hit = start <= pil_lo + t_ofdm && start <= t_csi;
        }
    }
    scratch.iter().filter(|&&h| h).count() as u32
}

/// `hist[k]` = number of draws hitting exactly `k` distinct pilots.
pub fn hit_histogram(scn: &Scenario, n_samples: u64, seed: u64) -> Result<Vec<u64>> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
    }
    let n_p = scn.n_p() as usize;
    let blocks = n_samples.div_ceil(MC_BLOCK);
    let hist = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let len = MC_BLOCK.min(n_samples - b * MC_BLOCK);
            let mut scratch = vec![false; n_p];
            let mut hist = vec![0u64; n_p + 1];
            for _ in 0..len {
                let t_f = rng.random::<f64>() * scn.t_rep();
                hist[pilots_hit(scn, t_f, &mut scratch) as usize] += 1;
            }
            hist
        })
        .reduce(
            || vec![0u64; n_p + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(hist)
}

/// Estimates `P[M >= m]` for every `m = 1..=n_p` from one set of draws.
pub fn estimates_from_histogram(hist: &[u64]) -> Vec<McEstimate> {
    let n: u64 = hist.iter().sum();
    (1..hist.len())
        .map(|m| McEstimate::from_counts(hist[m..].iter().sum(), n))
        .collect()
}

pub fn prob_monte_carlo(scn: &Scenario, m: u32, n_samples: u64, seed: u64) -> Result<McEstimate> {
    check_m(scn, m)?;
    let hist = hit_histogram(scn, n_samples, seed)?;
    Ok(estimates_from_histogram(&hist)[m as usize - 1])
}
