//! Shared plumbing for the acceptance checks.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use repcount_core::density::{slab_estimate, slab_hits, DensityEstimate, Tally};
use repcount_core::{ExpandedSystem, Result};

/// Outcome of one criterion.
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome { pass, detail: detail.into() }
    }
}

/// Runs `f`, turning a panic into a failure, and prints the verdict line.
pub fn run(number: usize, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Outcome::new(false, format!("panicked: {msg}"))
    });
    println!(
        "criterion {number:>2}: {}  {}  [{:.1} s]",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.detail,
        start.elapsed().as_secs_f64()
    );
    outcome.pass
}

/// Slab estimate over `shards` fixed substreams, run on scoped threads.
pub fn sharded_slab(
    sys: &ExpandedSystem,
    psi_norm: &[f64],
    eps: f64,
    samples: u64,
    seed: u64,
    shards: u64,
) -> Result<DensityEstimate> {
    let per = samples / shards;
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
    let mut tally = Tally::default();
    for chunk in (0..shards).collect::<Vec<_>>().chunks(threads as usize) {
        let parts: Vec<Result<Tally>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&shard| scope.spawn(move || slab_hits(sys, psi_norm, eps, per, seed, shard)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("slab shard panicked")).collect()
        });
        for p in parts {
            tally = tally.merge(p?);
        }
    }
    Ok(slab_estimate(sys, eps, tally))
}

/// `|a − b|` in units of the combined standard error.
pub fn sigma_distance(a: &DensityEstimate, b: &DensityEstimate) -> f64 {
    (a.value - b.value).abs() / (a.stderr * a.stderr + b.stderr * b.stderr).sqrt()
}
