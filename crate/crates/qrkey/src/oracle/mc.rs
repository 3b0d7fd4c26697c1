//! Monte Carlo simulation of the repeater's waiting time, in units of the
//! fundamental time T0.
//!
//! Two strategies are simulated. `WaitForAll` mirrors the structure behind
//! the analytic recursion: the two child links of a node are (re)built in
//! parallel, the node waits for the slower one, and a failed swap re-draws
//! the affected subtree while the rest of the chain holds its memories.
//! `ImmediateSwap` is an event-driven timeline in which segments attempt
//! every slot, any two adjacent links merge as soon as both exist (smallest
//! combined span first, ties leftmost) and the cells under a failed merge
//! restart on the next slot.
//!
//! Trials are partitioned into fixed-size chunks with one counter-based RNG
//! stream per chunk, so estimates are reproducible bit for bit for a given
//! (seed, trials) and chunk results merge associatively.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Largest nesting level the event-driven simulation accepts.
const MAX_MC_NESTING: u32 = 16;

/// Trials per RNG stream.
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapStrategy {
    WaitForAll,
    ImmediateSwap,
}

/// Sample estimate of the mean number of attempts until one end-to-end pair.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean_attempts: f64,
    pub std_error: f64,
    pub trials: u64,
    pub strategy: SwapStrategy,
    pub seed: u64,
}

/// Attempts until first success of a Bernoulli(p) sequence (inverse CDF).
fn geometric(rng: &mut ChaCha12Rng, p: f64) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    let u: f64 = rng.random();
    ((-u).ln_1p() / (-p).ln_1p()).floor() + 1.0
}

fn wait_for_all(rng: &mut ChaCha12Rng, p0: f64, p_es: &[f64], level: usize) -> f64 {
    if level == 0 {
        return geometric(rng, p0);
    }
    let mut total = 0.0;
    loop {
        let left = wait_for_all(rng, p0, p_es, level - 1);
        let right = wait_for_all(rng, p0, p_es, level - 1);
        total += left.max(right);
        if rng.random::<f64>() < p_es[level - 1] {
            return total;
        }
    }
}

fn immediate_swap(rng: &mut ChaCha12Rng, p0: f64, p_es: &[f64], n: u32) -> f64 {
    let cells = 1usize << n;
    let mut links: Vec<(usize, usize)> = Vec::new(); // (start, len), kept sorted
    let mut covered = vec![false; cells];
    let mut slots = 0.0;
    loop {
        slots += 1.0;
        for (cell, used) in covered.iter_mut().enumerate() {
            if !*used && rng.random::<f64>() < p0 {
                links.push((cell, 1));
                *used = true;
            }
        }
        links.sort_unstable();
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in 0..links.len().saturating_sub(1) {
                let (s1, l1) = links[i];
                let (s2, l2) = links[i + 1];
                if s1 + l1 == s2 {
                    let span = l1 + l2;
                    if best.is_none_or(|(_, b)| span < b) {
                        best = Some((i, span));
                    }
                }
            }
            let Some((i, span)) = best else { break };
            let start = links[i].0;
            let level = (usize::BITS - (span - 1).leading_zeros()) as usize; // ceil(log2)
            let p_swap = p_es[(level - 1).min(p_es.len() - 1)];
            links.remove(i + 1);
            links.remove(i);
            if rng.random::<f64>() < p_swap {
                links.insert(i, (start, span));
            } else {
                covered[start..start + span].fill(false);
            }
        }
        if links.iter().any(|&(_, len)| len == cells) {
            return slots;
        }
    }
}

/// Estimates the mean number of attempts (in units of T0) to distribute one
/// end-to-end pair across 2^n segments with per-attempt success `p0` and
/// per-level swap probabilities `p_es`.
pub fn mc_repeater(
    p0: f64,
    p_es: &[f64],
    n: u32,
    trials: u64,
    seed: u64,
    strategy: SwapStrategy,
) -> Result<McEstimate> {
    if !(p0 > 0.0 && p0 <= 1.0) {
        return Err(Error::domain("p0", p0, "(0, 1]"));
    }
    if n > MAX_MC_NESTING {
        return Err(Error::domain("n", n as f64, "[0, 16]"));
    }
    if p_es.len() != n as usize {
        return Err(Error::domain("p_es.len", p_es.len() as f64, "exactly n entries"));
    }
    for &p in p_es {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::domain("p_es", p, "(0, 1]"));
        }
    }
    if trials == 0 {
        return Err(Error::domain("trials", 0.0, "[1, inf)"));
    }

    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let chunks = trials.div_ceil(CHUNK);
    for chunk in 0..chunks {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(chunk + 1);
        let in_chunk = CHUNK.min(trials - chunk * CHUNK);
        let mut chunk_sum = 0.0f64;
        let mut chunk_sq = 0.0f64;
        for _ in 0..in_chunk {
            let attempts = match strategy {
                SwapStrategy::WaitForAll => wait_for_all(&mut rng, p0, p_es, n as usize),
                SwapStrategy::ImmediateSwap => immediate_swap(&mut rng, p0, p_es, n),
            };
            chunk_sum += attempts;
            chunk_sq += attempts * attempts;
        }
        sum += chunk_sum;
        sum_sq += chunk_sq;
    }

    let tf = trials as f64;
    let mean = sum / tf;
    let std_error = if trials > 1 {
        let var = ((sum_sq - sum * sum / tf) / (tf - 1.0)).max(0.0);
        (var / tf).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        mean_attempts: mean,
        std_error,
        trials,
        strategy,
        seed,
    })
}
