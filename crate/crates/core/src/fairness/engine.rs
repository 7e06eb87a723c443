use rand_chacha::ChaCha8Rng;
use rand::Rng;
use rayon::prelude::*;

use super::GainEstimate;
use crate::error::{Error, Result};
use crate::sampler::{stream_id, RngStream};

/// Runs per chunk; each chunk owns its own random streams.
pub const CHUNK_RUNS: u64 = 1024;
/// Cap on retained per-run values; larger runs keep a uniform subsample.
pub const MAX_RETAINED: usize = 1_000_000;

const MAIN_LANE: u8 = 0;
const AUX_LANE: u8 = 1;
const RESERVOIR_LANE: u8 = 255;

/// How many runs to do, from which seed, on how many threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub n_runs: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Keep per-run values in the estimate.
    pub retain: bool,
}

impl RunConfig {
    pub fn new(n_runs: u64, seed: u64) -> Self {
        Self {
            n_runs,
            seed,
            threads: None,
            retain: false,
        }
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn retain_samples(mut self, retain: bool) -> Self {
        self.retain = retain;
        self
    }

    fn chunks(&self) -> Result<u32> {
        if self.n_runs == 0 {
            return Err(Error::invalid("n_runs must be at least 1"));
        }
        u32::try_from(self.n_runs.div_ceil(CHUNK_RUNS))
            .map_err(|_| Error::invalid(format!("n_runs = {} is too large", self.n_runs)))
    }

    fn chunk_len(&self, chunk: u32) -> u64 {
        let start = chunk as u64 * CHUNK_RUNS;
        CHUNK_RUNS.min(self.n_runs - start)
    }

    fn install<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            Some(t) if t > 0 => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::invalid(format!("cannot start {t} threads: {e}")))?;
                Ok(pool.install(job))
            }
            _ => Ok(job()),
        }
    }

    fn rngs(&self, point: u32, chunk: u32) -> (ChaCha8Rng, ChaCha8Rng) {
        (
            RngStream::new(self.seed, stream_id(point, chunk, MAIN_LANE)).rng(),
            RngStream::new(self.seed, stream_id(point, chunk, AUX_LANE)).rng(),
        )
    }
}

/// Count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    fn variance(&self) -> f64 {
        if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        }
    }
}

/// Uniform subsample of a stream of values (Algorithm R).
struct Reservoir {
    kept: Vec<f64>,
    seen: u64,
    rng: ChaCha8Rng,
}

impl Reservoir {
    fn new(seed: u64, point: u32) -> Self {
        Self {
            kept: Vec::new(),
            seen: 0,
            rng: RngStream::new(seed, stream_id(point, 0, RESERVOIR_LANE)).rng(),
        }
    }

    fn extend(&mut self, values: &[f64]) {
        for &x in values {
            self.seen += 1;
            if self.kept.len() < MAX_RETAINED {
                self.kept.push(x);
            } else {
                let j = self.rng.random_range(0..self.seen);
                if (j as usize) < MAX_RETAINED {
                    self.kept[j as usize] = x;
                }
            }
        }
    }
}

/// Mean of `run` over `config.n_runs` runs. `run` gets the main and the
/// auxiliary generator of its chunk.
pub(crate) fn monte_carlo<F>(config: &RunConfig, point: u32, run: F) -> Result<GainEstimate>
where
    F: Fn(&mut ChaCha8Rng, &mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let chunks = config.chunks()?;
    let batch = 256u32;
    config.install(|| {
        let mut total = Moments::default();
        let mut reservoir = config.retain.then(|| Reservoir::new(config.seed, point));
        let mut start = 0;
        while start < chunks {
            let end = chunks.min(start + batch);
            let results: Vec<Result<(Moments, Vec<f64>)>> = (start..end)
                .into_par_iter()
                .map(|chunk| {
                    let (mut main, mut aux) = config.rngs(point, chunk);
                    let mut m = Moments::default();
                    let mut kept = Vec::new();
                    for _ in 0..config.chunk_len(chunk) {
                        let x = run(&mut main, &mut aux)?;
                        m.push(x);
                        if config.retain {
                            kept.push(x);
                        }
                    }
                    Ok((m, kept))
                })
                .collect();
            for r in results {
                let (m, kept) = r?;
                total.merge(&m);
                if let Some(res) = reservoir.as_mut() {
                    res.extend(&kept);
                }
            }
            start = end;
        }
        Ok(GainEstimate::from_moments(
            total.n,
            total.mean,
            total.variance(),
            reservoir.map(|r| r.kept),
        ))
    })?
}

/// Per-coordinate means of a sparse vector-valued run. `run` appends
/// `(coordinate, value)` pairs; missing coordinates count as zero.
pub(crate) fn monte_carlo_vector<F>(
    config: &RunConfig,
    point: u32,
    len: usize,
    run: F,
) -> Result<Vec<GainEstimate>>
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<(usize, f64)>) -> Result<()> + Sync,
{
    let chunks = config.chunks()?;
    let batch = 32u32;
    config.install(|| {
        let mut totals = vec![Moments::default(); len];
        let mut start = 0;
        while start < chunks {
            let end = chunks.min(start + batch);
            let results: Vec<Result<Vec<Moments>>> = (start..end)
                .into_par_iter()
                .map(|chunk| {
                    let (mut main, _) = config.rngs(point, chunk);
                    let n = config.chunk_len(chunk);
                    let mut s1 = vec![0.0; len];
                    let mut s2 = vec![0.0; len];
                    let mut buf = Vec::new();
                    for _ in 0..n {
                        buf.clear();
                        run(&mut main, &mut buf)?;
                        for &(i, x) in &buf {
                            s1[i] += x;
                            s2[i] += x * x;
                        }
                    }
                    Ok(s1
                        .iter()
                        .zip(&s2)
                        .map(|(&a, &b)| {
                            let mean = a / n as f64;
                            Moments {
                                n,
                                mean,
                                m2: (b - a * mean).max(0.0),
                            }
                        })
                        .collect())
                })
                .collect();
            for r in results {
                for (t, m) in totals.iter_mut().zip(r?) {
                    t.merge(&m);
                }
            }
            start = end;
        }
        Ok(totals
            .iter()
            .map(|m| GainEstimate::from_moments(m.n, m.mean, m.variance(), None))
            .collect())
    })?
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_merge_matches_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.n, whole.n);
        assert!((a.mean - whole.mean).abs() < 1e-12);
        assert!((a.variance() - whole.variance()).abs() < 1e-9);
    }

    #[test]
    fn zero_runs_rejected() {
        assert!(monte_carlo(&RunConfig::new(0, 1), 0, |_, _| Ok(0.0)).is_err());
    }

    #[test]
    fn partial_last_chunk() {
        let cfg = RunConfig::new(CHUNK_RUNS + 5, 1);
        let e = monte_carlo(&cfg, 0, |_, _| Ok(1.0)).unwrap();
        assert_eq!(e.n_runs, CHUNK_RUNS + 5);
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn reservoir_is_capped() {
        let mut r = Reservoir::new(1, 0);
        let values = vec![0.5; MAX_RETAINED + 10];
        r.extend(&values);
        assert_eq!(r.kept.len(), MAX_RETAINED);
        assert_eq!(r.seen, MAX_RETAINED as u64 + 10);
    }
}
