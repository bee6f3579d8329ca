//! ReLU feedforward networks: representation, evaluation, and the JSON file
//! format used by fixtures and the command line.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One fully-connected layer: `x -> W x + b`, with `W` stored row-major
/// (one row per output neuron).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(Error::DimensionMismatch {
                context: "layer bias",
                expected: weights.nrows(),
                got: bias.len(),
            });
        }
        if weights.iter().chain(bias.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("layer parameters"));
        }
        Ok(Layer { weights, bias })
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Affine map of this layer applied to `v`.
    pub fn affine(&self, v: &Array1<f64>) -> Array1<f64> {
        self.weights.dot(v) + &self.bias
    }
}

/// An L-layer ReLU feedforward network. ReLU is applied between consecutive
/// affine layers and never after the last one, so the output of layer L is
/// the logit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
}

impl Network {
    /// Builds a network, checking that consecutive layer shapes chain.
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        for w in layers.windows(2) {
            if w[1].in_dim() != w[0].out_dim() {
                return Err(Error::DimensionMismatch {
                    context: "layer chaining",
                    expected: w[0].out_dim(),
                    got: w[1].in_dim(),
                });
            }
        }
        Ok(Network { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Layer `i` with the 1-based indexing used throughout the crate.
    pub fn layer(&self, i: usize) -> &Layer {
        &self.layers[i - 1]
    }

    /// Number of affine layers L.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.depth() - 1].out_dim()
    }

    /// Width of layer `i` (1-based); layer 0 is the input.
    pub fn width(&self, i: usize) -> usize {
        if i == 0 {
            self.input_dim()
        } else {
            self.layers[i - 1].out_dim()
        }
    }

    /// Evaluates the network on `x`, returning the logits.
    pub fn forward(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "forward input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut v = self.layers[0].affine(x);
        for layer in &self.layers[1..] {
            v.mapv_inplace(|t| t.max(0.0));
            v = layer.affine(&v);
        }
        Ok(v)
    }

    /// All pre-activations `x^(1), ..., x^(L)` produced while evaluating on `x`.
    pub fn pre_activations(&self, x: &Array1<f64>) -> Result<Vec<Array1<f64>>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "forward input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut pre = Vec::with_capacity(self.depth());
        let mut v = self.layers[0].affine(x);
        pre.push(v.clone());
        for layer in &self.layers[1..] {
            v.mapv_inplace(|t| t.max(0.0));
            v = layer.affine(&v);
            pre.push(v.clone());
        }
        Ok(pre)
    }

    /// The predicted class: index of the largest logit, ties broken toward
    /// the smallest index.
    pub fn predicted_class(&self, x: &Array1<f64>) -> Result<usize> {
        let logits = self.forward(x)?;
        Ok(argmax_first(&logits))
    }

    /// One margin objective per class other than the predicted one.
    ///
    /// Positivity of `c . f(x*) + c0` for every returned objective over the
    /// whole uncertainty set certifies robustness at `x`.
    pub fn margin_objectives(&self, x: &Array1<f64>) -> Result<Vec<MarginObjective>> {
        let n_out = self.output_dim();
        if n_out < 2 {
            return Err(Error::NothingToCertify);
        }
        let predicted = self.predicted_class(x)?;
        Ok((0..n_out)
            .filter(|k| *k != predicted)
            .map(|k| MarginObjective::between(n_out, predicted, k))
            .collect())
    }

    /// Reads a network from the JSON fixture format.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)?;
        file.try_into()
    }

    /// Writes the network in the JSON fixture format.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = NetworkFile::from(self);
        serde_json::to_string_pretty(&file).expect("network serialization cannot fail")
    }
}

/// Smallest index attaining the maximum.
pub(crate) fn argmax_first(v: &Array1<f64>) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// A linear certification objective `c . x^(L) + c0`, built as the margin
/// between the predicted class and a competing target class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginObjective {
    pub c: Vec<f64>,
    pub c0: f64,
    pub target_class: usize,
}

impl MarginObjective {
    /// The margin `e_predicted - e_target` with zero offset.
    pub fn between(n_out: usize, predicted: usize, target: usize) -> Self {
        let mut c = vec![0.0; n_out];
        c[predicted] = 1.0;
        c[target] = -1.0;
        MarginObjective {
            c,
            c0: 0.0,
            target_class: target,
        }
    }

    pub fn row(&self) -> Array1<f64> {
        Array1::from_vec(self.c.clone())
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl TryFrom<NetworkFile> for Network {
    type Error = Error;

    fn try_from(file: NetworkFile) -> Result<Self> {
        let mut layers = Vec::with_capacity(file.layers.len());
        for lf in file.layers {
            let rows = lf.weights.len();
            let cols = lf.weights.first().map_or(0, Vec::len);
            if lf.weights.iter().any(|r| r.len() != cols) {
                return Err(Error::DimensionMismatch {
                    context: "ragged weight rows",
                    expected: cols,
                    got: lf.weights.iter().map(Vec::len).find(|l| *l != cols).unwrap_or(0),
                });
            }
            let flat: Vec<f64> = lf.weights.into_iter().flatten().collect();
            let weights = Array2::from_shape_vec((rows, cols), flat)
                .map_err(|_| Error::NonFinite("weight matrix shape"))?;
            layers.push(Layer::new(weights, Array1::from_vec(lf.bias))?);
        }
        Network::new(layers)
    }
}

impl From<&Network> for NetworkFile {
    fn from(net: &Network) -> Self {
        NetworkFile {
            layers: net
                .layers
                .iter()
                .map(|l| LayerFile {
                    weights: l.weights.rows().into_iter().map(|r| r.to_vec()).collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        }
    }
}
