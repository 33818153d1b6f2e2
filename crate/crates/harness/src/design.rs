//! Random designs and responses.
//!
//! Every replicate owns a ChaCha8 stream: `ChaCha8Rng::seed_from_u64(seed)` followed by
//! `set_stream(replicate)`. Draw order within a replicate is the design (column by
//! column, row index fastest) and then the `n` noise values, all standard normal via
//! `rand_distr::StandardNormal`.

use lar_core::{DesignMatrix, ResponseVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignModel {
    /// First `p` columns of the `n × n` identity; no randomness is consumed.
    Identity,
    /// i.i.d. `N(0, 1)` entries, columns left unnormalized.
    IidGaussian,
    /// i.i.d. Gaussian columns scaled to unit norm, i.e. uniform on the sphere.
    SphereColumns,
}

pub fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

pub fn normals(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    StandardNormal.sample_iter(rng).take(len).collect()
}

pub fn draw_design(model: DesignModel, n: usize, p: usize, rng: &mut ChaCha8Rng) -> Result<DesignMatrix> {
    let design = match model {
        DesignModel::Identity => DesignMatrix::identity(n, p)?,
        DesignModel::IidGaussian => DesignMatrix::from_col_major(n, p, normals(n * p, rng))?,
        DesignModel::SphereColumns => {
            let mut data = normals(n * p, rng);
            for col in data.chunks_mut(n) {
                let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
                col.iter_mut().for_each(|x| *x /= norm);
            }
            DesignMatrix::from_col_major(n, p, data)?
        }
    };
    Ok(design)
}

/// `Y = X β + σ ε`.
pub fn draw_response(design: &DesignMatrix, beta: &[f64], sigma: f64, rng: &mut ChaCha8Rng) -> Result<ResponseVector> {
    let mean = design.mul_vec(beta)?;
    let noise = normals(design.nrows(), rng);
    let y = mean.iter().zip(&noise).map(|(m, e)| m + sigma * e).collect();
    Ok(ResponseVector::new(y)?)
}
