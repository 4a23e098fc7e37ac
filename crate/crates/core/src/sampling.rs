//! Seeded random sampling.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_square, chol_or_eigh_factor};
use crate::scalar::Real;

/// Seed for a ChaCha8 stream; equal seeds give bit-identical draws on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent child seed for sub-stream `stream` (splitmix64 mixing).
    pub fn derive(self, stream: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

pub fn standard_normal_matrix<T: Real>(
    rows: usize,
    cols: usize,
    rng: &mut ChaCha8Rng,
) -> Array2<T> {
    Array2::from_shape_simple_fn((rows, cols), || {
        let z: f64 = StandardNormal.sample(rng);
        T::of(z)
    })
}

pub fn standard_normal_vector<T: Real>(len: usize, rng: &mut ChaCha8Rng) -> Array1<T> {
    Array1::from_shape_simple_fn(len, || {
        let z: f64 = StandardNormal.sample(rng);
        T::of(z)
    })
}

/// `n` i.i.d. rows from `N(mean, cov)`, drawn as `mean + z L` with `LᵀL = cov`.
pub fn mvn_sample<T: Real>(
    mean: ArrayView1<T>,
    cov: ArrayView2<T>,
    n: usize,
    seed: RngSeed,
) -> Result<Array2<T>> {
    let p = check_square(cov, "covariance")?;
    if mean.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "mean has length {}, covariance is {p}x{p}",
            mean.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample size must be positive".into(),
        ));
    }
    let l = chol_or_eigh_factor(cov)?;
    let mut rng = seed.rng();
    let z: Array2<T> = standard_normal_matrix(n, p, &mut rng);
    let mut x = z.dot(&l);
    for mut row in x.rows_mut() {
        row += &mean;
    }
    Ok(x)
}
