//! Seeded Latin hypercube designs over a box of independent uniform inputs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::microstructure::Interval;

/// Name of the generator used for every design; recorded in sidecar files.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignOfExperiments {
    /// Rows are runs, columns are inputs, in physical units.
    pub samples: Vec<Vec<f64>>,
    pub bounds: Vec<Interval>,
    pub seed: u64,
}

impl DesignOfExperiments {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }
}

/// Jittered Latin hypercube: per column, one uniform draw inside each of the
/// `n` equal strata, with independent random permutations across columns.
pub fn lhs(n: usize, bounds: &[Interval], seed: u64) -> Result<DesignOfExperiments> {
    if n == 0 {
        return Err(Error::InvalidArgument("LHS needs at least one sample".into()));
    }
    for (dim, b) in bounds.iter().enumerate() {
        if !(b.min < b.max) || !b.min.is_finite() || !b.max.is_finite() {
            return Err(Error::DegenerateInterval {
                dim,
                min: b.min,
                max: b.max,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![vec![0.0; bounds.len()]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for (col, b) in bounds.iter().enumerate() {
        strata.shuffle(&mut rng);
        for (row, &stratum) in strata.iter().enumerate() {
            let u = (stratum as f64 + rng.random::<f64>()) / n as f64;
            // Guard against rounding past the upper edge.
            samples[row][col] = (b.min + u * b.width()).min(b.max);
        }
    }
    Ok(DesignOfExperiments {
        samples,
        bounds: bounds.to_vec(),
        seed,
    })
}
