//! Seeded random streams.
//!
//! Every consumer of randomness gets its own ChaCha stream derived from a
//! 64-bit master seed and a stream id (for experiments, the trial index), so
//! results do not depend on how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How trial loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Sequential,
    /// Run on a dedicated pool with this many worker threads.
    Threads(usize),
}

/// Evaluates `task(i, rng_i)` for `i in 0..count`, each with its own stream,
/// and returns the results in index order.
pub fn map_streams<T, F>(seed: u64, count: u64, parallelism: Parallelism, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut StreamRng) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let run = |i: u64| {
        let mut rng = stream_rng(seed, i);
        task(i, &mut rng)
    };
    match parallelism {
        Parallelism::Sequential | Parallelism::Threads(0 | 1) => (0..count).map(run).collect(),
        Parallelism::Threads(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("failed to build thread pool");
            pool.install(|| (0..count).into_par_iter().map(run).collect())
        }
    }
}
