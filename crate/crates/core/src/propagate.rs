//! Greedy pre-activation bound computation: interval bound propagation and
//! linear-relaxation backsubstitution.
//!
//! Two independent routes compute relaxation-based bounds. The generic route
//! ([`backsubstitute`] + [`concretize`]) substitutes one enveloping linear
//! function per ReLU layer, choosing the lower or upper envelope by the sign
//! of the accumulated coefficient at every step. The closed-form route
//! ([`same_slope_bounds`]) is specific to equal lower/upper slopes and
//! accumulates the slope products and offsets explicitly; the two agree to
//! round-off and cross-check each other.

use ndarray::{Array1, Array2};

use crate::network::Network;
use crate::numerics::{
    centered_support, neg_part, pos_part, support_value, LayerBounds, UncertaintySet,
};
use crate::{Error, Result};

/// Slope selection for the lower ReLU envelope of unstable neurons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelaxationMode {
    /// Lower slope equals the upper slope `u/(u-l)`.
    SameSlope,
    /// Lower slope picked from {0, 1} by the smaller relaxation area:
    /// 1 iff `u >= |l|`.
    Adaptive,
    /// A caller-supplied lower slope in [0, 1] for every unstable neuron.
    Fixed(f64),
}

/// Stability status of one neuron, derived from its pre-activation interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeuronStatus {
    /// `u <= 0`: the ReLU is identically zero.
    StableNegative,
    /// `l >= 0` (and `u > 0`): the ReLU is the identity.
    StablePositive,
    /// `l < 0 < u`: both branches are reachable.
    Unstable,
}

/// Elementwise linear envelopes of one ReLU layer over `[l, u]`:
/// `lower_slope * x + lower_offset <= max(x, 0) <= upper_slope * x + upper_offset`.
#[derive(Debug, Clone)]
pub struct ReluRelaxation {
    pub lower_slope: Array1<f64>,
    pub upper_slope: Array1<f64>,
    pub lower_offset: Array1<f64>,
    pub upper_offset: Array1<f64>,
    pub status: Vec<NeuronStatus>,
}

impl ReluRelaxation {
    pub fn len(&self) -> usize {
        self.status.len()
    }

    pub fn is_empty(&self) -> bool {
        self.status.is_empty()
    }

    /// Indices of unstable neurons.
    pub fn unstable(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| self.status[j] == NeuronStatus::Unstable)
            .collect()
    }
}

/// Classifies a neuron from its interval. Degenerate intervals (`l == u`)
/// are stable; zero counts as stable-negative so no slope ever divides by
/// `u - l = 0`.
pub fn neuron_status(l: f64, u: f64) -> NeuronStatus {
    if u <= 0.0 {
        NeuronStatus::StableNegative
    } else if l >= 0.0 {
        NeuronStatus::StablePositive
    } else {
        NeuronStatus::Unstable
    }
}

/// Builds the per-neuron linear ReLU envelopes for one layer.
///
/// Stable neurons get exact slopes (0 or 1, zero offsets). Unstable neurons
/// get the chord `u/(u-l)` with offset `-ul/(u-l)` above, and a slope chosen
/// by `mode` with zero offset below.
pub fn relu_relaxation(lower: &Array1<f64>, upper: &Array1<f64>, mode: RelaxationMode) -> ReluRelaxation {
    let n = lower.len();
    debug_assert_eq!(n, upper.len());
    let mut rel = ReluRelaxation {
        lower_slope: Array1::zeros(n),
        upper_slope: Array1::zeros(n),
        lower_offset: Array1::zeros(n),
        upper_offset: Array1::zeros(n),
        status: Vec::with_capacity(n),
    };
    for j in 0..n {
        let (l, u) = (lower[j], upper[j]);
        debug_assert!(l <= u, "inverted interval at neuron {j}: [{l}, {u}]");
        let status = neuron_status(l, u);
        rel.status.push(status);
        match status {
            NeuronStatus::StableNegative => {}
            NeuronStatus::StablePositive => {
                rel.lower_slope[j] = 1.0;
                rel.upper_slope[j] = 1.0;
            }
            NeuronStatus::Unstable => {
                let chord = u / (u - l);
                rel.upper_slope[j] = chord;
                rel.upper_offset[j] = -u * l / (u - l);
                rel.lower_slope[j] = match mode {
                    RelaxationMode::SameSlope => chord,
                    RelaxationMode::Adaptive => {
                        if u >= -l {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    RelaxationMode::Fixed(alpha) => alpha.clamp(0.0, 1.0),
                };
            }
        }
    }
    rel
}

/// Linear under/over-estimators of some rows `C x^(i)` in terms of the input:
/// `lower_lin x^(0) + lower_off <= C x^(i) <= upper_lin x^(0) + upper_off`.
#[derive(Debug, Clone)]
pub struct AffineBounds {
    pub lower_lin: Array2<f64>,
    pub lower_off: Array1<f64>,
    pub upper_lin: Array2<f64>,
    pub upper_off: Array1<f64>,
    /// Layer whose pre-activations the rows refer to.
    pub layer: usize,
}

/// Interval bound propagation: worst-case per-row perturbations pushed layer
/// by layer. Linear in depth, loosest of the bound routes.
pub fn ibp_bounds(net: &Network, set: &UncertaintySet) -> Result<LayerBounds> {
    set.validate()?;
    if set.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "uncertainty set",
            expected: net.input_dim(),
            got: set.dim(),
        });
    }
    let mut bounds = LayerBounds::new();
    let first = net.layer(1);
    let mut lo = Array1::zeros(first.out_dim());
    let mut hi = Array1::zeros(first.out_dim());
    for (j, row) in first.weights.rows().into_iter().enumerate() {
        let r = row.as_slice().expect("row-major layout");
        hi[j] = support_value(set, r) + first.bias[j];
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        lo[j] = -support_value(set, &neg) + first.bias[j];
    }
    bounds.push(lo, hi);

    for i in 2..=net.depth() {
        let layer = net.layer(i);
        let (prev_lo, prev_hi) = bounds.layer(i - 1);
        let act_lo = prev_lo.mapv(|x| x.max(0.0));
        let act_hi = prev_hi.mapv(|x| x.max(0.0));
        let wp = pos_part(&layer.weights);
        let wn = neg_part(&layer.weights);
        let lo = wp.dot(&act_lo) + wn.dot(&act_hi) + &layer.bias;
        let hi = wn.dot(&act_lo) + wp.dot(&act_hi) + &layer.bias;
        bounds.push(lo, hi);
    }
    Ok(bounds)
}

/// Backsubstitutes the rows `C x^(layer)` down to the input, replacing each
/// crossed ReLU with its linear envelopes.
///
/// `relaxations[i]` must hold the envelope of layer `i+1` for all layers
/// `1..layer-1`; entries beyond that are ignored.
pub fn backsubstitute(
    net: &Network,
    relaxations: &[ReluRelaxation],
    layer: usize,
    objective_rows: &Array2<f64>,
) -> Result<AffineBounds> {
    debug_assert!(layer >= 1 && layer <= net.depth());
    if objective_rows.ncols() != net.width(layer) {
        return Err(Error::DimensionMismatch {
            context: "objective rows",
            expected: net.width(layer),
            got: objective_rows.ncols(),
        });
    }
    let m = objective_rows.nrows();
    let mut lower_lin = objective_rows.clone();
    let mut upper_lin = objective_rows.clone();
    let mut lower_off = Array1::<f64>::zeros(m);
    let mut upper_off = Array1::<f64>::zeros(m);

    for i in (1..=layer).rev() {
        // Fold the affine layer: rows now act on sigma(x^(i-1)).
        let w = &net.layer(i).weights;
        let b = &net.layer(i).bias;
        lower_off = lower_off + lower_lin.dot(b);
        upper_off = upper_off + upper_lin.dot(b);
        lower_lin = lower_lin.dot(w);
        upper_lin = upper_lin.dot(w);
        if i == 1 {
            break; // sigma(x^(0)) is the identity.
        }
        // Substitute the ReLU at layer i-1 by sign-dependent envelopes.
        let rel = relaxations
            .get(i - 2)
            .ok_or(Error::MissingRelaxation(i - 1))?;
        if rel.len() != net.width(i - 1) {
            return Err(Error::MissingRelaxation(i - 1));
        }
        let lp = pos_part(&lower_lin);
        let ln = neg_part(&lower_lin);
        let up = pos_part(&upper_lin);
        let un = neg_part(&upper_lin);
        lower_off = lower_off + lp.dot(&rel.lower_offset) + ln.dot(&rel.upper_offset);
        upper_off = upper_off + un.dot(&rel.lower_offset) + up.dot(&rel.upper_offset);
        lower_lin = &lp * &rel.lower_slope + &ln * &rel.upper_slope;
        upper_lin = &un * &rel.lower_slope + &up * &rel.upper_slope;
    }

    Ok(AffineBounds {
        lower_lin,
        lower_off,
        upper_lin,
        upper_off,
        layer,
    })
}

/// Turns affine input bounds into intervals via the support function of the
/// uncertainty set (the Hölder bound for lp-balls).
pub fn concretize(ab: &AffineBounds, set: &UncertaintySet) -> (Array1<f64>, Array1<f64>) {
    let m = ab.lower_off.len();
    let mut lo = Array1::zeros(m);
    let mut hi = Array1::zeros(m);
    for r in 0..m {
        let lrow = ab.lower_lin.row(r);
        let neg: Vec<f64> = lrow.iter().map(|x| -x).collect();
        lo[r] = -support_value(set, &neg) + ab.lower_off[r];
        let urow = ab.upper_lin.row(r);
        hi[r] = support_value(set, urow.as_slice().expect("row-major layout")) + ab.upper_off[r];
    }
    (lo, hi)
}

/// Relaxation-based bounds for all layers via the generic backsubstitution
/// route: for each layer, derive the envelope of every earlier layer from
/// its already-computed bounds, backsubstitute to the input, concretize.
/// Quadratic in depth.
pub fn linear_bounds(net: &Network, set: &UncertaintySet, mode: RelaxationMode) -> Result<LayerBounds> {
    Ok(linear_bounds_with_relaxations(net, set, mode)?.0)
}

/// As [`linear_bounds`], also returning the per-layer envelopes derived
/// along the way (for layers `1..L-1`).
pub fn linear_bounds_with_relaxations(
    net: &Network,
    set: &UncertaintySet,
    mode: RelaxationMode,
) -> Result<(LayerBounds, Vec<ReluRelaxation>)> {
    set.validate()?;
    if set.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "uncertainty set",
            expected: net.input_dim(),
            got: set.dim(),
        });
    }
    let mut bounds = LayerBounds::new();
    let mut relaxations: Vec<ReluRelaxation> = Vec::new();
    for i in 1..=net.depth() {
        let eye = Array2::eye(net.width(i));
        let ab = backsubstitute(net, &relaxations, i, &eye)?;
        let (lo, hi) = concretize(&ab, set);
        if i < net.depth() {
            relaxations.push(relu_relaxation(&lo, &hi, mode));
        }
        bounds.push(lo, hi);
    }
    Ok((bounds, relaxations))
}

/// Same-slope relaxation bounds in closed form: the slope products and the
/// sign-selected offset terms are accumulated explicitly per layer, without
/// going through the generic envelope substitution.
pub fn same_slope_bounds(net: &Network, set: &UncertaintySet) -> Result<LayerBounds> {
    set.validate()?;
    if set.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "uncertainty set",
            expected: net.input_dim(),
            got: set.dim(),
        });
    }
    let center = Array1::from_vec(set.center().to_vec());
    let mut bounds = LayerBounds::new();

    // lambda[j-1] is the accumulated coefficient of x^(0) (j = 1) or of the
    // layer-j upper offsets (j >= 2); phi tracks the center trajectory.
    let mut lambda: Vec<Array2<f64>> = vec![net.layer(1).weights.clone()];
    let mut phi: Array1<f64> = net.layer(1).weights.dot(&center) + &net.layer(1).bias;
    let mut upper_offsets: Vec<Array1<f64>> = Vec::new();

    let radius = |mat: &Array2<f64>| -> Array1<f64> {
        Array1::from_iter(mat.rows().into_iter().map(|row| {
            centered_support(set, row.as_slice().expect("row-major layout"))
        }))
    };

    let spread = radius(&lambda[0]);
    bounds.push(&phi - &spread, &phi + &spread);

    for i in 2..=net.depth() {
        let (lo_prev, hi_prev) = bounds.layer(i - 1);
        let rel = relu_relaxation(lo_prev, hi_prev, RelaxationMode::SameSlope);
        upper_offsets.push(rel.upper_offset.clone());

        let w = &net.layer(i).weights;
        let w_sigma = w * &rel.upper_slope; // diagonal slope matrix folded in
        for lam in lambda.iter_mut() {
            *lam = w_sigma.dot(lam);
        }
        lambda.push(w.clone());
        phi = w_sigma.dot(&phi) + &net.layer(i).bias;

        let spread = radius(&lambda[0]);
        let mut lo = &phi - &spread;
        let mut hi = &phi + &spread;
        for j in 2..=i {
            let lam = &lambda[j - 1];
            let beta = &upper_offsets[j - 2];
            lo = lo + neg_part(lam).dot(beta);
            hi = hi + pos_part(lam).dot(beta);
        }
        bounds.push(lo, hi);
    }
    Ok(bounds)
}
