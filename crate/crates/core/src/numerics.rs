//! Shared numeric primitives: matrix sign-splitting, row-wise norms, Hölder
//! conjugates, and exact support functions of the supported uncertainty sets.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Norm order for perturbation balls and row-wise matrix norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormOrder {
    One,
    Two,
    Inf,
}

impl NormOrder {
    fn vec_norm(self, v: &[f64]) -> f64 {
        match self {
            NormOrder::One => v.iter().map(|x| x.abs()).sum(),
            NormOrder::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormOrder::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

impl std::fmt::Display for NormOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormOrder::One => write!(f, "1"),
            NormOrder::Two => write!(f, "2"),
            NormOrder::Inf => write!(f, "inf"),
        }
    }
}

/// Entrywise `max(A, 0)`.
pub fn pos_part(a: &Array2<f64>) -> Array2<f64> {
    a.mapv(|x| x.max(0.0))
}

/// Entrywise `min(A, 0)`.
pub fn neg_part(a: &Array2<f64>) -> Array2<f64> {
    a.mapv(|x| x.min(0.0))
}

/// Vector of per-row q-norms of `a`.
pub fn row_norm(a: &Array2<f64>, q: NormOrder) -> Array1<f64> {
    Array1::from_iter(
        a.rows()
            .into_iter()
            .map(|r| q.vec_norm(r.as_slice().expect("row-major layout"))),
    )
}

/// The conjugate exponent `p*` with `1/p + 1/p* = 1`.
pub fn holder_conjugate(p: NormOrder) -> NormOrder {
    match p {
        NormOrder::One => NormOrder::Inf,
        NormOrder::Two => NormOrder::Two,
        NormOrder::Inf => NormOrder::One,
    }
}

/// Input neighborhood over which robustness is certified: an lp-ball around a
/// center point, or a per-coordinate (possibly asymmetric) box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UncertaintySet {
    Ball {
        center: Vec<f64>,
        radius: f64,
        p: NormOrder,
    },
    Box {
        center: Vec<f64>,
        eps_lo: Vec<f64>,
        eps_hi: Vec<f64>,
    },
}

impl UncertaintySet {
    pub fn linf_ball(center: Vec<f64>, radius: f64) -> Self {
        UncertaintySet::Ball {
            center,
            radius,
            p: NormOrder::Inf,
        }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            UncertaintySet::Ball { center, .. } => center,
            UncertaintySet::Box { center, .. } => center,
        }
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.center().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("uncertainty-set center"));
        }
        match self {
            UncertaintySet::Ball { radius, .. } => {
                if !radius.is_finite() || *radius < 0.0 {
                    return Err(Error::NonFinite("ball radius"));
                }
            }
            UncertaintySet::Box {
                center,
                eps_lo,
                eps_hi,
            } => {
                if eps_lo.len() != center.len() || eps_hi.len() != center.len() {
                    return Err(Error::DimensionMismatch {
                        context: "box margins",
                        expected: center.len(),
                        got: eps_lo.len().min(eps_hi.len()),
                    });
                }
                if eps_lo
                    .iter()
                    .chain(eps_hi.iter())
                    .any(|e| !e.is_finite() || *e < 0.0)
                {
                    return Err(Error::NonFinite("box margins"));
                }
            }
        }
        Ok(())
    }

    /// Per-coordinate lower corner, where the set is a box (l-inf ball or box).
    /// Returns `None` for l1/l2 balls, which are not axis-aligned boxes.
    pub fn as_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            UncertaintySet::Ball {
                center,
                radius,
                p: NormOrder::Inf,
            } => Some((
                center.iter().map(|x| x - radius).collect(),
                center.iter().map(|x| x + radius).collect(),
            )),
            UncertaintySet::Box {
                center,
                eps_lo,
                eps_hi,
            } => Some((
                center.iter().zip(eps_lo).map(|(x, e)| x - e).collect(),
                center.iter().zip(eps_hi).map(|(x, e)| x + e).collect(),
            )),
            _ => None,
        }
    }

    /// Shrinks the set to its center (used to express clean-point queries).
    pub fn is_degenerate(&self) -> bool {
        match self {
            UncertaintySet::Ball { radius, .. } => *radius == 0.0,
            UncertaintySet::Box { eps_lo, eps_hi, .. } => {
                eps_lo.iter().all(|e| *e == 0.0) && eps_hi.iter().all(|e| *e == 0.0)
            }
        }
    }
}

/// Exact maximum of `a . xi` over `xi` in the set.
///
/// For a ball this is `a.x + eps * ||a||_{p*}`; for a box the per-coordinate
/// worst case is picked by the sign of each entry of `a`.
pub fn support_value(set: &UncertaintySet, a: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), set.dim());
    let at_center: f64 = set.center().iter().zip(a).map(|(x, c)| x * c).sum();
    at_center + centered_support(set, a)
}

/// Support function of the set translated to the origin.
pub fn centered_support(set: &UncertaintySet, a: &[f64]) -> f64 {
    match set {
        UncertaintySet::Ball { radius, p, .. } => radius * holder_conjugate(*p).vec_norm(a),
        UncertaintySet::Box {
            eps_lo, eps_hi, ..
        } => a
            .iter()
            .zip(eps_lo.iter().zip(eps_hi))
            .map(|(c, (lo, hi))| c.max(0.0) * hi - c.min(0.0) * lo)
            .sum(),
    }
}

/// Per-layer pre-activation intervals, indexed from layer 1 upward.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerBounds {
    pub lower: Vec<Array1<f64>>,
    pub upper: Vec<Array1<f64>>,
}

impl LayerBounds {
    pub fn new() -> Self {
        LayerBounds {
            lower: Vec::new(),
            upper: Vec::new(),
        }
    }

    pub fn push(&mut self, lower: Array1<f64>, upper: Array1<f64>) {
        debug_assert_eq!(lower.len(), upper.len());
        self.lower.push(lower);
        self.upper.push(upper);
    }

    /// Number of stored layers.
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// Bounds of layer `i` (1-based, matching the layer indexing of the net).
    pub fn layer(&self, i: usize) -> (&Array1<f64>, &Array1<f64>) {
        (&self.lower[i - 1], &self.upper[i - 1])
    }

    /// True when `l <= u` holds everywhere and all entries are finite.
    pub fn is_consistent(&self) -> bool {
        self.lower.iter().zip(&self.upper).all(|(l, u)| {
            l.iter()
                .zip(u)
                .all(|(a, b)| a.is_finite() && b.is_finite() && a <= b)
        })
    }

    /// Per-coordinate intersection with `other`, tightening self in place.
    ///
    /// Callers must know the two bound sources are both sound, otherwise the
    /// intersection may turn empty; this is checked and reported.
    pub fn intersect_layer(&mut self, i: usize, lower: &Array1<f64>, upper: &Array1<f64>) {
        let (l, u) = (&mut self.lower[i - 1], &mut self.upper[i - 1]);
        ndarray::Zip::from(l).and(lower).for_each(|a, b| *a = a.max(*b));
        ndarray::Zip::from(u).and(upper).for_each(|a, b| *a = a.min(*b));
    }
}

impl Default for LayerBounds {
    fn default() -> Self {
        Self::new()
    }
}
