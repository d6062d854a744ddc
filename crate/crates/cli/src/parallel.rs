//! Monte-Carlo runs split across threads.
//!
//! Run `r` always draws from the stream keyed by `(seed, r)`, and the
//! per-node counts are integers, so the result does not depend on the number
//! of threads.

use dmpest_core::mc::{activation_counts, McReport, Model};
use dmpest_core::{DirectedGraph, Horizon, InitialCondition};
use rayon::prelude::*;

/// Contiguous run-index chunks, one per thread.
fn chunks(runs: u64, threads: usize) -> Vec<std::ops::Range<u64>> {
    let threads = (threads.max(1) as u64).min(runs.max(1));
    let base = runs / threads;
    let extra = runs % threads;
    let mut start = 0;
    (0..threads)
        .map(|k| {
            let len = base + u64::from(k < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

pub fn mc_marginals(
    graph: &DirectedGraph,
    model: Model<'_>,
    p0: &InitialCondition,
    horizon: Horizon,
    runs: u64,
    seed: u64,
    threads: usize,
) -> McReport {
    let counts = if threads <= 1 {
        activation_counts(graph, model, p0, horizon, 0..runs, seed)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        let parts: Vec<Vec<u64>> = pool.install(|| {
            chunks(runs, threads)
                .into_par_iter()
                .map(|r| activation_counts(graph, model, p0, horizon, r, seed))
                .collect()
        });
        let mut total = vec![0u64; graph.node_count()];
        for part in parts {
            for (t, c) in total.iter_mut().zip(part) {
                *t += c;
            }
        }
        total
    };
    McReport::from_counts(&counts, runs, seed, horizon)
}
