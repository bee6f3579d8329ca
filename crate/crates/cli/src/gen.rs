//! Seeded random network generation for fixtures and experiments.

use anyhow::{bail, Result};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relucert::network::{Layer, Network};

/// A reproducible random network; `widths[0]` is the input dimension and
/// each later entry adds one affine layer. Weights and biases are uniform
/// in [-1, 1].
pub fn generate(seed: u64, widths: &[usize]) -> Result<Network> {
    if widths.len() < 2 {
        bail!("need at least an input and an output width");
    }
    if widths.iter().any(|w| *w == 0) {
        bail!("layer widths must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers: Vec<Layer> = widths
        .windows(2)
        .map(|w| {
            let (cols, rows) = (w[0], w[1]);
            let weights = Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0));
            let bias = Array1::from_shape_fn(rows, |_| rng.gen_range(-1.0..1.0));
            Layer::new(weights, bias).expect("generated layer is well-formed")
        })
        .collect();
    Ok(Network::new(layers)?)
}
