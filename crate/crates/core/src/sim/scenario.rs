use std::fmt;

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, symmetric_eigen};
use crate::sampling::{mvn_sample, standard_normal_vector, RngSeed};

/// Coefficients of the FIG1 design; the remaining entries are zero.
pub const FIG1_BETA: [f64; 5] = [3.0, 1.0, 5.0, 4.0, 9.0];

const BLOCK: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioId {
    /// Block-diagonal covariance, 5×5 blocks with entries `0.8^|j−j'|`.
    EX1,
    /// Global AR(1) covariance `0.8^|j−j'|`.
    EX2,
    /// Block-diagonal tridiagonal precision (diagonal 1, off-diagonal 0.5).
    EX3,
    /// Random sparse precision `F + δI` with condition number `p`, unit diagonal.
    EX4,
    /// `p = 20`, EX3 precision and fixed coefficients [`FIG1_BETA`].
    FIG1,
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub beta_value: f64,
    pub noise_sd: f64,
    pub seed: RngSeed,
}

impl ScenarioSpec {
    /// Desk-scale defaults: `p = 60`, `q = 10`, coefficients 1.5, unit noise.
    pub fn desk(id: ScenarioId, n: usize, seed: RngSeed) -> Self {
        let (p, q) = if id == ScenarioId::FIG1 {
            (20, 5)
        } else {
            (60, 10)
        };
        Self {
            id,
            n,
            p,
            q,
            beta_value: 1.5,
            noise_sd: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.p == 0 {
            return bad("p must be positive".into());
        }
        if self.q > self.p {
            return bad(format!("q = {} exceeds p = {}", self.q, self.p));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return bad(format!(
                "noise_sd must be nonnegative, got {}",
                self.noise_sd
            ));
        }
        if !self.beta_value.is_finite() {
            return bad("beta_value must be finite".into());
        }
        match self.id {
            ScenarioId::EX1 | ScenarioId::EX3 if !self.p.is_multiple_of(BLOCK) => bad(format!(
                "{} needs p divisible by {BLOCK}, got {}",
                self.id, self.p
            )),
            ScenarioId::EX4 if self.p < 2 => bad("EX4 needs p ≥ 2".into()),
            ScenarioId::FIG1 if self.p != 20 => bad(format!("FIG1 has p = 20, got {}", self.p)),
            _ => Ok(()),
        }
    }
}

/// Population covariance and, where the design is given through it, precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMatrices {
    pub sigma: Array2<f64>,
    pub theta: Option<Array2<f64>>,
}

fn tridiagonal_blocks(p: usize) -> Array2<f64> {
    let mut theta = Array2::<f64>::eye(p);
    for j in 0..p - 1 {
        if (j + 1) % BLOCK != 0 {
            theta[[j, j + 1]] = 0.5;
            theta[[j + 1, j]] = 0.5;
        }
    }
    theta
}

fn ex4_precision(p: usize, seed: RngSeed) -> Result<Array2<f64>> {
    let mut rng = seed.rng();
    let mut f = Array2::<f64>::zeros((p, p));
    for j in 0..p {
        for k in j + 1..p {
            if rng.random::<f64>() < 0.02 {
                f[[j, k]] = 0.5;
                f[[k, j]] = 0.5;
            }
        }
    }
    let (vals, _) = symmetric_eigen(f.view())?;
    let (lo, hi) = (vals[0], vals[p - 1]);
    // (hi + δ)/(lo + δ) = p; diag(F) = 0 so unit-diagonal scaling divides by δ
    // and leaves the condition number unchanged
    let pf = p as f64;
    let delta = if hi - lo > 0.0 {
        (hi - pf * lo) / (pf - 1.0)
    } else {
        1.0
    };
    let mut theta = f;
    for j in 0..p {
        theta[[j, j]] += delta;
    }
    theta /= delta;
    Ok(theta)
}

pub fn scenario_covariance(spec: &ScenarioSpec) -> Result<ScenarioMatrices> {
    spec.validate()?;
    let p = spec.p;
    let ar = |j: usize, k: usize| 0.8f64.powi(j.abs_diff(k) as i32);
    match spec.id {
        ScenarioId::EX1 => {
            let sigma = Array2::from_shape_fn((p, p), |(j, k)| {
                if j / BLOCK == k / BLOCK {
                    ar(j, k)
                } else {
                    0.0
                }
            });
            Ok(ScenarioMatrices { sigma, theta: None })
        }
        ScenarioId::EX2 => Ok(ScenarioMatrices {
            sigma: Array2::from_shape_fn((p, p), |(j, k)| ar(j, k)),
            theta: None,
        }),
        ScenarioId::EX3 | ScenarioId::FIG1 => {
            let theta = tridiagonal_blocks(p);
            Ok(ScenarioMatrices {
                sigma: spd_inverse(theta.view())?,
                theta: Some(theta),
            })
        }
        ScenarioId::EX4 => {
            let theta = ex4_precision(p, spec.seed.derive(0xE4))?;
            Ok(ScenarioMatrices {
                sigma: spd_inverse(theta.view())?,
                theta: Some(theta),
            })
        }
    }
}

pub fn true_beta(spec: &ScenarioSpec) -> Array1<f64> {
    let mut beta = Array1::zeros(spec.p);
    if spec.id == ScenarioId::FIG1 {
        for (j, b) in FIG1_BETA.iter().enumerate() {
            beta[j] = *b;
        }
    } else {
        beta.slice_mut(ndarray::s![..spec.q]).fill(spec.beta_value);
    }
    beta
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub y: Array1<f64>,
    pub x: Array2<f64>,
    pub beta: Array1<f64>,
}

fn draw(
    sigma: &Array2<f64>,
    beta: &Array1<f64>,
    n: usize,
    noise_sd: f64,
    seed: RngSeed,
) -> Result<(Array1<f64>, Array2<f64>)> {
    let p = beta.len();
    let x = mvn_sample(Array1::zeros(p).view(), sigma.view(), n, seed.derive(1))?;
    let eps: Array1<f64> = standard_normal_vector(n, &mut seed.derive(2).rng());
    let y = x.dot(beta) + eps * noise_sd;
    Ok((y, x))
}

/// `X` rows i.i.d. `N(0, Σ)`, `y = Xβ + ε` with `ε ~ N(0, noise_sd²)`.
pub fn generate_dataset(spec: &ScenarioSpec) -> Result<Dataset> {
    let mats = scenario_covariance(spec)?;
    let beta = true_beta(spec);
    let (y, x) = draw(&mats.sigma, &beta, spec.n, spec.noise_sd, spec.seed)?;
    Ok(Dataset { y, x, beta })
}

/// Independent draw from the same design, for out-of-sample error.
pub fn generate_test_set(spec: &ScenarioSpec, n_test: usize, seed: RngSeed) -> Result<Dataset> {
    let mats = scenario_covariance(spec)?;
    let beta = true_beta(spec);
    let (y, x) = draw(&mats.sigma, &beta, n_test, spec.noise_sd, seed)?;
    Ok(Dataset { y, x, beta })
}
