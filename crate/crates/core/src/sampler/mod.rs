//! Monte Carlo engines for Brownian exit problems.
//!
//! Exit positions come from walk-on-spheres ([`wos_exit_position`]), exit
//! times from an Euler scheme with a Brownian-bridge crossing test
//! ([`euler_exit`]). Batches are split into fixed-size chunks, chunk `k`
//! drawing from stream `k` of the seed, so results do not depend on how many
//! threads run them.

mod euler;
mod wos;

pub use euler::euler_exit;
pub use wos::{wos_exit_position, MAX_WOS_RADIUS};

use rand::RngCore;
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point};

/// Paths per chunk; one random stream per chunk.
pub const CHUNK: usize = 1024;

pub const DEFAULT_SHELL_EPS: f64 = 1e-6;
pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;
pub const DEFAULT_MAX_TIME: f64 = 50.0;

/// Seeded PCG64 generator (128-bit LCG, XSL-RR output) on a numbered stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    inner: Pcg64,
}

impl RandomStream {
    pub const ALGORITHM: &'static str = "pcg64";

    pub fn new(seed: u64, stream: u64) -> Self {
        // the seed fills the state, the stream selects the LCG increment
        let state = (u128::from(splitmix(seed)) << 64) | u128::from(splitmix(seed ^ 0x5851_f42d_4c95_7f2d));
        let inner = Pcg64::new(state, u128::from(stream));
        RandomStream { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One simulated exit. `time` is NaN when the engine does not track time
/// (walk-on-spheres).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitSample {
    pub position: Point,
    pub time: f64,
    pub steps: u64,
    /// Path was still inside when the time budget ran out.
    pub censored: bool,
}

impl ExitSample {
    pub fn has_time(&self) -> bool {
        !self.time.is_nan()
    }
}

/// Survivor counts `#{tau > t}` on an ascending time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub times: Vec<f64>,
    pub survivors: Vec<u64>,
    pub n_total: u64,
}

impl SurvivalCurve {
    pub fn fraction(&self, i: usize) -> f64 {
        self.survivors[i] as f64 / self.n_total as f64
    }
}

/// Which engine produces a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Wos,
    Euler,
}

fn chunk_ranges(n: usize) -> Vec<(u64, usize)> {
    (0..n.div_ceil(CHUNK))
        .map(|k| (k as u64, CHUNK.min(n - k * CHUNK)))
        .collect()
}

/// `n` walk-on-spheres exits. Fails on the first walk (in batch order) that
/// exceeds `max_steps`.
pub fn wos_batch(
    spec: &DomainSpec,
    start: Point,
    shell_eps: f64,
    max_steps: u64,
    n: usize,
    seed: u64,
) -> Result<Vec<ExitSample>> {
    let chunks: Vec<Result<Vec<ExitSample>>> = chunk_ranges(n)
        .into_par_iter()
        .map(|(k, len)| {
            let mut rng = RandomStream::new(seed, k);
            (0..len)
                .map(|_| wos_exit_position(spec, start, shell_eps, max_steps, &mut rng))
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// `n` Euler exits. Censored paths are kept, flagged by `censored`.
pub fn euler_batch(
    spec: &DomainSpec,
    start: Point,
    dt: f64,
    max_time: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<ExitSample>> {
    let chunks: Vec<Result<Vec<ExitSample>>> = chunk_ranges(n)
        .into_par_iter()
        .map(|(k, len)| {
            let mut rng = RandomStream::new(seed, k);
            (0..len)
                .map(|_| match euler_exit(spec, start, dt, max_time, &mut rng) {
                    Ok(s) => Ok(s),
                    Err(Error::TimeBudgetExceeded { sample }) => Ok(sample),
                    Err(e) => Err(e),
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Runs `n` Euler paths with `max_time = max(grid)` and counts survivors at
/// each grid time. Censored paths survive every grid time.
pub fn survival_curve(
    spec: &DomainSpec,
    start: Point,
    dt: f64,
    grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<SurvivalCurve> {
    if n == 0 {
        return Err(Error::Precondition("survival curve needs n >= 1".into()));
    }
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition("survival grid must be strictly ascending".into()));
    }
    let max_time = *grid.last().unwrap();
    let counts: Vec<Result<Vec<u64>>> = chunk_ranges(n)
        .into_par_iter()
        .map(|(k, len)| {
            let mut rng = RandomStream::new(seed, k);
            let mut counts = vec![0u64; grid.len()];
            for _ in 0..len {
                let tau = match euler_exit(spec, start, dt, max_time, &mut rng) {
                    Ok(s) => s.time,
                    Err(Error::TimeBudgetExceeded { .. }) => f64::INFINITY,
                    Err(e) => return Err(e),
                };
                // grid is ascending: survivors are a prefix
                let alive = grid.partition_point(|&t| t < tau);
                for c in &mut counts[..alive] {
                    *c += 1;
                }
            }
            Ok(counts)
        })
        .collect();
    let mut survivors = vec![0u64; grid.len()];
    for c in counts {
        for (s, v) in survivors.iter_mut().zip(c?) {
            *s += v;
        }
    }
    Ok(SurvivalCurve {
        times: grid.to_vec(),
        survivors,
        n_total: n as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_reproduce() {
        let a: Vec<u64> = {
            let mut r = RandomStream::new(42, 3);
            (0..10).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RandomStream::new(42, 3);
            (0..10).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = RandomStream::new(42, 4);
            (0..10).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mut r = RandomStream::new(1, 0);
        let u: f64 = r.gen();
        assert!((0.0..1.0).contains(&u));
    }

    #[test]
    fn chunking_covers_batch() {
        let ch = chunk_ranges(2 * CHUNK + 5);
        assert_eq!(ch.len(), 3);
        assert_eq!(ch.iter().map(|c| c.1).sum::<usize>(), 2 * CHUNK + 5);
        assert!(chunk_ranges(0).is_empty());
    }

    #[test]
    fn batches_independent_of_thread_count() {
        let spec = DomainSpec::Disk { center: Point::ORIGIN, r: 1.0 };
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    (
                        wos_batch(&spec, Point::ORIGIN, 1e-6, 10_000, 3000, 5).unwrap(),
                        euler_batch(&spec, Point::ORIGIN, 1e-3, 5.0, 2100, 5).unwrap(),
                    )
                })
        };
        let bits = |v: &[ExitSample]| -> Vec<[u64; 4]> {
            v.iter()
                .map(|s| {
                    [s.position.x.to_bits(), s.position.y.to_bits(), s.time.to_bits(), s.steps]
                })
                .collect()
        };
        let (a, b) = (run(1), run(3));
        assert_eq!(bits(&a.0), bits(&b.0));
        assert_eq!(bits(&a.1), bits(&b.1));
    }

    #[test]
    fn survival_starts_full() {
        let spec = DomainSpec::StripRe { a: -1.0, b: 1.0 };
        let c = survival_curve(&spec, Point::ORIGIN, 1e-3, &[0.0, 0.5, 1.0, 2.0], 2000, 1).unwrap();
        assert_eq!(c.survivors[0], 2000);
        assert!(c.survivors.windows(2).all(|w| w[0] >= w[1]));
        assert!(survival_curve(&spec, Point::ORIGIN, 1e-3, &[1.0, 0.5], 10, 1).is_err());
        assert!(survival_curve(&spec, Point::ORIGIN, 1e-3, &[1.0], 0, 1).is_err());
    }

    #[test]
    fn censored_paths_survive() {
        let spec = DomainSpec::HalfPlane;
        let c = survival_curve(&spec, Point::new(0.0, 50.0), 1e-2, &[0.0, 0.5, 1.0], 200, 2).unwrap();
        assert_eq!(c.survivors, vec![200, 200, 200]);
    }
}
