//! Test-time additive Gaussian perturbation of raw products.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::products::RadarProduct;
use crate::{par, streams, Error, Result};

pub const DEFAULT_SIGMAS: [f64; 4] = [0.0, 0.10, 0.25, 0.50];

const NOISE_KEY: u64 = 0x6e6f_6973;

/// Population standard deviation over every pixel of `products`.
pub fn pixel_std<'a>(products: impl IntoIterator<Item = &'a RadarProduct> + Clone) -> f64 {
    let (mut sum, mut count) = (0.0f64, 0usize);
    for p in products.clone() {
        sum += p.values.iter().map(|&v| f64::from(v)).sum::<f64>();
        count += p.values.len();
    }
    if count == 0 {
        return 0.0;
    }
    let mean = sum / count as f64;
    let ss: f64 = products
        .into_iter()
        .map(|p| p.values.iter().map(|&v| (f64::from(v) - mean).powi(2)).sum::<f64>())
        .sum();
    (ss / count as f64).sqrt()
}

fn check(s_train: f64, sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("sigma must be non-negative, got {sigma}")));
    }
    if !(s_train >= 0.0) || !s_train.is_finite() {
        return Err(Error::InvalidArgument(format!("s_train must be non-negative, got {s_train}")));
    }
    Ok(())
}

/// Adds N(0, (sigma * s_train)^2) to every pixel of one product. The stream is
/// keyed by `(seed, sigma, sample_id)`; values are not clipped.
pub fn perturb(product: &RadarProduct, sample_id: usize, s_train: f64, sigma: f64, seed: u64) -> Result<RadarProduct> {
    check(s_train, sigma)?;
    let mut out = product.clone();
    if sigma == 0.0 {
        return Ok(out);
    }
    let std = sigma * s_train;
    let mut rng = streams::stream(seed, &[NOISE_KEY, sigma.to_bits(), sample_id as u64]);
    for v in out.values.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = (f64::from(*v) + std * z) as f32;
    }
    Ok(out)
}

/// Perturbs each product with its own sample id.
pub fn inject_noise(
    products: &[RadarProduct],
    sample_ids: &[usize],
    s_train: f64,
    sigma: f64,
    seed: u64,
) -> Result<Vec<RadarProduct>> {
    if products.len() != sample_ids.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} sample ids", products.len()),
            got: format!("{}", sample_ids.len()),
        });
    }
    check(s_train, sigma)?;
    let out = par::map_range(products.len(), |i| perturb(&products[i], sample_ids[i], s_train, sigma, seed));
    par::collect_results(out)
}
