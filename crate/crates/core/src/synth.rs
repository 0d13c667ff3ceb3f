//! Seeded synthetic datasets.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::series::{Dataset, MultivariateSeries};

/// Shape of a synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pattern {
    /// Gaussian random walk with the given step standard deviation.
    RandomWalk { step: f64 },
    /// Independent standard normal values.
    Noise,
    /// Each dimension dwells on one of `levels` fixed values and jumps
    /// between them with probability `switch` per step; small jitter on top.
    Clustered {
        levels: usize,
        switch: f64,
        jitter: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub name: String,
    pub count: usize,
    pub len: usize,
    pub dims: usize,
    pub pattern: Pattern,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(name: impl Into<String>, count: usize, len: usize, dims: usize, pattern: Pattern, seed: u64) -> Self {
        Self {
            name: name.into(),
            count,
            len,
            dims,
            pattern,
            seed,
        }
    }

    pub fn generate<T: Scalar>(&self) -> Result<Dataset<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let series = (0..self.count)
            .map(|_| {
                let v = series_values(&mut rng, self.len, self.dims, self.pattern);
                MultivariateSeries::from_flat(v.into_iter().map(T::lit).collect(), self.dims)
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(self.name.clone(), series)
    }
}

fn series_values(rng: &mut ChaCha8Rng, len: usize, dims: usize, pattern: Pattern) -> Vec<f64> {
    let std = Normal::new(0.0, 1.0).expect("valid normal");
    let mut out = Vec::with_capacity(len * dims);
    match pattern {
        Pattern::RandomWalk { step } => {
            let mut cur: Vec<f64> = (0..dims).map(|_| std.sample(rng)).collect();
            for _ in 0..len {
                out.extend_from_slice(&cur);
                for x in cur.iter_mut() {
                    *x += step * std.sample(rng);
                }
            }
        }
        Pattern::Noise => out.extend((0..len * dims).map(|_| std.sample(rng))),
        Pattern::Clustered { levels, switch, jitter } => {
            let levels = levels.max(1);
            let value = |k: usize| k as f64 / (levels.max(2) - 1) as f64 * 2.0 - 1.0;
            let mut state: Vec<usize> = (0..dims).map(|_| rng.gen_range(0..levels)).collect();
            for _ in 0..len {
                for s in state.iter_mut() {
                    if rng.gen_bool(switch) {
                        *s = rng.gen_range(0..levels);
                    }
                }
                out.extend(state.iter().map(|&s| value(s) + jitter * std.sample(rng)));
            }
        }
    }
    out
}
