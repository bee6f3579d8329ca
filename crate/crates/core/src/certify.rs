//! End-to-end certification pipelines: greedy bound propagation, exact
//! solutions of the triangle-relaxed LP, multi-neuron refinement, and the
//! complete branch-and-bound verifier.
//!
//! All methods report one margin per competing class; a positive margin for
//! every competitor certifies robustness. Every margin is a sound lower
//! bound of the true worst-case margin, so "certified" is trustworthy for
//! every method, while only the exact verifier can also falsify.

use std::time::Instant;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::krelu::KReluSet;
use crate::lp::{solve_lp, LinearProgram, LpOutcome};
use crate::network::{MarginObjective, Network};
use crate::numerics::{LayerBounds, UncertaintySet};
use crate::propagate::{
    backsubstitute, concretize, ibp_bounds, linear_bounds_with_relaxations, neuron_status,
    NeuronStatus, RelaxationMode, ReluRelaxation,
};
use crate::{Error, Result};

/// Hidden-neuron cap for the recursive per-neuron LP bound computation.
pub const RECURSIVE_LP_CAP: usize = 64;
/// Default unstable-neuron budget of the exact verifier.
pub const DEFAULT_EXACT_BUDGET: usize = 16;

/// Greedy bound-propagation flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GreedyMethod {
    /// Interval bound propagation.
    Ibp,
    /// Same-slope linear relaxation.
    FastLin,
    /// Adaptive-slope linear relaxation.
    Crown,
}

impl GreedyMethod {
    pub fn relaxation_mode(self) -> RelaxationMode {
        match self {
            GreedyMethod::Ibp | GreedyMethod::FastLin => RelaxationMode::SameSlope,
            GreedyMethod::Crown => RelaxationMode::Adaptive,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            GreedyMethod::Ibp => "ibp",
            GreedyMethod::FastLin => "fastlin",
            GreedyMethod::Crown => "crown",
        }
    }
}

/// Where the pre-activation bounds of the LP certification step come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    /// Greedy propagator bounds (step (a) approximated).
    Greedy(GreedyMethod),
    /// Per-neuron bounds from recursive LP solves (step (a) exact for the
    /// triangle relaxation); quadratic blow-up, capped.
    LpRecursive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Unknown,
    Falsified,
}

/// Margin of one competing class: a sound lower bound on
/// `f_predicted - f_target` over the uncertainty set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectiveMargin {
    pub target_class: usize,
    pub margin: f64,
}

/// Outcome of one certification run.
#[derive(Debug, Clone)]
pub struct CertificationResult {
    pub method: String,
    pub predicted_class: usize,
    pub margins: Vec<ObjectiveMargin>,
    pub verdict: Verdict,
    pub counterexample: Option<Vec<f64>>,
    pub wall_time: std::time::Duration,
}

impl CertificationResult {
    pub fn worst_margin(&self) -> f64 {
        self.margins
            .iter()
            .map(|m| m.margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn margin_for(&self, target: usize) -> Option<f64> {
        self.margins
            .iter()
            .find(|m| m.target_class == target)
            .map(|m| m.margin)
    }

    fn assemble(
        method: &str,
        predicted: usize,
        margins: Vec<ObjectiveMargin>,
        counterexample: Option<Vec<f64>>,
        started: Instant,
    ) -> CertificationResult {
        let verdict = if counterexample.is_some() {
            Verdict::Falsified
        } else if margins.iter().all(|m| m.margin > 0.0) {
            Verdict::Certified
        } else {
            Verdict::Unknown
        };
        CertificationResult {
            method: method.to_string(),
            predicted_class: predicted,
            margins,
            verdict,
            counterexample,
            wall_time: started.elapsed(),
        }
    }
}

fn check_centered(x: &Array1<f64>, set: &UncertaintySet) -> Result<()> {
    if x.len() != set.dim()
        || x.iter()
            .zip(set.center())
            .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::SetNotCentered);
    }
    Ok(())
}

/// Certification by greedy bound propagation alone.
///
/// IBP margins come from interval arithmetic on the logit bounds; the linear
/// relaxation methods backsubstitute each margin row through the envelopes,
/// which preserves cancellations between the two logits.
pub fn certify_greedy(
    net: &Network,
    x: &Array1<f64>,
    set: &UncertaintySet,
    method: GreedyMethod,
) -> Result<CertificationResult> {
    let started = Instant::now();
    check_centered(x, set)?;
    let objectives = net.margin_objectives(x)?;
    let predicted = net.predicted_class(x)?;

    let margins = match method {
        GreedyMethod::Ibp => {
            let bounds = ibp_bounds(net, set)?;
            let (lo, hi) = bounds.layer(net.depth());
            objectives
                .iter()
                .map(|obj| {
                    let margin: f64 = obj
                        .c
                        .iter()
                        .enumerate()
                        .map(|(j, c)| if *c >= 0.0 { c * lo[j] } else { c * hi[j] })
                        .sum::<f64>()
                        + obj.c0;
                    ObjectiveMargin {
                        target_class: obj.target_class,
                        margin,
                    }
                })
                .collect()
        }
        GreedyMethod::FastLin | GreedyMethod::Crown => {
            let (_, relaxations) =
                linear_bounds_with_relaxations(net, set, method.relaxation_mode())?;
            let mut rows = Array2::zeros((objectives.len(), net.output_dim()));
            for (r, obj) in objectives.iter().enumerate() {
                for (j, c) in obj.c.iter().enumerate() {
                    rows[(r, j)] = *c;
                }
            }
            let ab = backsubstitute(net, &relaxations, net.depth(), &rows)?;
            let (lo, _) = concretize(&ab, set);
            objectives
                .iter()
                .zip(&lo)
                .map(|(obj, m)| ObjectiveMargin {
                    target_class: obj.target_class,
                    margin: m + obj.c0,
                })
                .collect()
        }
    };

    Ok(CertificationResult::assemble(
        method.tag(),
        predicted,
        margins,
        None,
        started,
    ))
}

/// Variable layout of the relaxed certification LP truncated at `upto`:
/// `x^(0) | x^(1) z^(1) | ... | x^(upto-1) z^(upto-1) | x^(upto)`.
struct LpLayout {
    x_off: Vec<usize>,
    z_off: Vec<usize>,
    num_vars: usize,
}

impl LpLayout {
    fn new(net: &Network, upto: usize) -> LpLayout {
        let mut x_off = vec![0usize; upto + 1];
        let mut z_off = vec![0usize; upto];
        let mut off = net.input_dim();
        for i in 1..=upto {
            x_off[i] = off;
            off += net.width(i);
            if i < upto {
                z_off[i] = off;
                off += net.width(i);
            }
        }
        LpLayout {
            x_off,
            z_off,
            num_vars: off,
        }
    }
}

/// Builds the triangle-relaxed certification LP truncated at layer `upto`
/// with objective `c . x^(upto) + c0` (the `c0` is added after solving).
fn relaxed_lp_upto(
    net: &Network,
    set: &UncertaintySet,
    bounds: &LayerBounds,
    upto: usize,
    c: &[f64],
) -> Result<(LinearProgram, LpLayout)> {
    let (in_lo, in_hi) = set.as_box().ok_or_else(|| match set {
        UncertaintySet::Ball {
            p: crate::numerics::NormOrder::One,
            ..
        } => Error::InputSetNotPolyhedral("1"),
        _ => Error::InputSetNotPolyhedral("2"),
    })?;
    debug_assert!(bounds.len() >= upto.saturating_sub(1));
    let layout = LpLayout::new(net, upto);
    let mut lp = LinearProgram::new(layout.num_vars);

    for j in 0..net.input_dim() {
        lp.set_bounds(j, in_lo[j], in_hi[j]);
    }

    for i in 1..=upto {
        let layer = net.layer(i);
        let z_prev = if i == 1 { 0 } else { layout.z_off[i - 1] };
        for r in 0..layer.out_dim() {
            let mut row = vec![0.0; layout.num_vars];
            row[layout.x_off[i] + r] = 1.0;
            for (jcol, w) in layer.weights.row(r).iter().enumerate() {
                row[z_prev + jcol] -= w;
            }
            lp.add_eq(row, layer.bias[r]);
        }
        if i == upto {
            break;
        }
        let (lo, hi) = bounds.layer(i);
        for j in 0..layer.out_dim() {
            let (l, u) = (lo[j], hi[j]);
            let xv = layout.x_off[i] + j;
            let zv = layout.z_off[i] + j;
            lp.set_bounds(xv, l, u);
            match neuron_status(l, u) {
                NeuronStatus::StableNegative => lp.set_bounds(zv, 0.0, 0.0),
                NeuronStatus::StablePositive => {
                    lp.set_bounds(zv, l.max(0.0), u.max(0.0));
                    let mut eq = vec![0.0; layout.num_vars];
                    eq[zv] = 1.0;
                    eq[xv] = -1.0;
                    lp.add_eq(eq, 0.0);
                }
                NeuronStatus::Unstable => {
                    lp.set_bounds(zv, 0.0, u);
                    // z >= x
                    let mut ge = vec![0.0; layout.num_vars];
                    ge[xv] = 1.0;
                    ge[zv] = -1.0;
                    lp.add_le(ge, 0.0);
                    // z <= u/(u-l) (x - l)
                    let chord = u / (u - l);
                    let mut le = vec![0.0; layout.num_vars];
                    le[zv] = 1.0;
                    le[xv] = -chord;
                    lp.add_le(le, -chord * l);
                }
            }
        }
    }

    let mut objective = vec![0.0; layout.num_vars];
    for (j, cj) in c.iter().enumerate() {
        objective[layout.x_off[upto] + j] = *cj;
    }
    lp.set_objective(&objective);
    Ok((lp, layout))
}

/// Builds the full relaxed certification LP (Eq. 5 geometry) for one margin
/// objective, given sound pre-activation bounds for the hidden layers.
pub fn build_relaxed_lp(
    net: &Network,
    set: &UncertaintySet,
    bounds: &LayerBounds,
    objective: &MarginObjective,
) -> Result<LinearProgram> {
    Ok(relaxed_lp_upto(net, set, bounds, net.depth(), &objective.c)?.0)
}

/// Appends a joint-relaxation hull's rows to an LP built by
/// [`relaxed_lp_upto`], scattering each group's `(x_J, z_J)` coordinates to
/// the layer's variables. The hull layer must be below `upto`.
fn append_hull_rows(lp: &mut LinearProgram, layout: &LpLayout, kset: &KReluSet) {
    let n = lp.num_vars();
    for (group, hull) in &kset.hulls {
        let k = group.size();
        for (row, rhs) in hull.a.rows().into_iter().zip(&hull.b) {
            let mut scattered = vec![0.0; n];
            for (c, j) in group.indices.iter().enumerate() {
                scattered[layout.x_off[kset.layer] + *j] = row[c];
                scattered[layout.z_off[kset.layer] + *j] = row[k + c];
            }
            lp.add_le(scattered, *rhs);
        }
    }
}

/// Per-layer interval bounds from the LP path: hidden layers from the chosen
/// bound source, the output layer from one LP pair per logit.
pub fn lp_layer_bounds(
    net: &Network,
    set: &UncertaintySet,
    bound_source: BoundSource,
) -> Result<LayerBounds> {
    let mut bounds = match bound_source {
        BoundSource::Greedy(m) => {
            let mut b = match m {
                GreedyMethod::Ibp => ibp_bounds(net, set)?,
                _ => crate::propagate::linear_bounds(net, set, m.relaxation_mode())?,
            };
            // Keep hidden layers only; the output layer is recomputed by LP.
            b.lower.truncate(net.depth() - 1);
            b.upper.truncate(net.depth() - 1);
            b
        }
        BoundSource::LpRecursive => lp_bounds_recursive(net, set)?,
    };
    let n_out = net.output_dim();
    let mut lo = Array1::zeros(n_out);
    let mut hi = Array1::zeros(n_out);
    for j in 0..n_out {
        let mut c = vec![0.0; n_out];
        c[j] = 1.0;
        let (lp, _) = relaxed_lp_upto(net, set, &bounds, net.depth(), &c)?;
        lo[j] = expect_optimal(&lp, "output bound")?;
        for v in c.iter_mut() {
            *v = -*v;
        }
        let (lp, _) = relaxed_lp_upto(net, set, &bounds, net.depth(), &c)?;
        hi[j] = -expect_optimal(&lp, "output bound")?;
    }
    bounds.push(lo, hi);
    Ok(bounds)
}

/// Refined per-layer bounds from the multi-neuron pipeline, including the
/// output layer (computed over the last hidden layer's joint relaxation).
pub fn krelu_layer_bounds(
    net: &Network,
    set: &UncertaintySet,
    k: usize,
    mode: RelaxationMode,
) -> Result<LayerBounds> {
    set.validate()?;
    if set.as_box().is_none() {
        return Err(Error::InputSetNotPolyhedral("non-box ball"));
    }
    let depth = net.depth();
    if depth == 1 {
        return lp_layer_bounds(net, set, BoundSource::Greedy(GreedyMethod::Crown));
    }
    let (mut bounds, kset) = krelu_hidden_bounds(net, set, k, mode)?;
    let kset = kset.expect("depth >= 2 always builds a joint relaxation");
    let n_out = net.output_dim();
    let mut lo = Array1::zeros(n_out);
    let mut hi = Array1::zeros(n_out);
    for j in 0..n_out {
        let mut c = vec![0.0; n_out];
        c[j] = 1.0;
        let (mut lp, layout) = relaxed_lp_upto(net, set, &bounds, depth, &c)?;
        append_hull_rows(&mut lp, &layout, &kset);
        lo[j] = expect_optimal(&lp, "output bound")?;
        for v in lp.objective.iter_mut() {
            *v = -*v;
        }
        hi[j] = -expect_optimal(&lp, "output bound")?;
    }
    bounds.push(lo, hi);
    Ok(bounds)
}

fn lp_bounds_recursive(net: &Network, set: &UncertaintySet) -> Result<LayerBounds> {
    let hidden: usize = (1..net.depth()).map(|i| net.width(i)).sum();
    if hidden > RECURSIVE_LP_CAP {
        return Err(Error::RecursiveLpCap {
            neurons: hidden,
            cap: RECURSIVE_LP_CAP,
        });
    }
    let mut bounds = LayerBounds::new();
    for i in 1..net.depth() {
        let n = net.width(i);
        let mut lo = Array1::zeros(n);
        let mut hi = Array1::zeros(n);
        for j in 0..n {
            let mut c = vec![0.0; n];
            c[j] = 1.0;
            let (lp_min, _) = relaxed_lp_upto(net, set, &bounds, i, &c)?;
            lo[j] = expect_optimal(&lp_min, "recursive bound")?;
            for v in c.iter_mut() {
                *v = -*v;
            }
            let (lp_max, _) = relaxed_lp_upto(net, set, &bounds, i, &c)?;
            hi[j] = -expect_optimal(&lp_max, "recursive bound")?;
        }
        bounds.push(lo, hi);
    }
    Ok(bounds)
}

fn expect_optimal(lp: &LinearProgram, what: &'static str) -> Result<f64> {
    match solve_lp(lp)? {
        LpOutcome::Optimal(sol) => Ok(sol.value),
        LpOutcome::Infeasible => Err(Error::InconsistentRefinement("infeasible")),
        LpOutcome::Unbounded => Err(Error::MalformedLp(format!("{what} LP is unbounded"))),
    }
}

/// Two-step LP-relaxed certification: sound pre-activation bounds (greedy or
/// recursive-LP), then one exact triangle-relaxation LP per margin objective.
pub fn certify_lp(
    net: &Network,
    x: &Array1<f64>,
    set: &UncertaintySet,
    bound_source: BoundSource,
) -> Result<CertificationResult> {
    let started = Instant::now();
    check_centered(x, set)?;
    let objectives = net.margin_objectives(x)?;
    let predicted = net.predicted_class(x)?;

    let (tag, bounds) = match bound_source {
        BoundSource::Greedy(m) => {
            let b = match m {
                GreedyMethod::Ibp => ibp_bounds(net, set)?,
                _ => crate::propagate::linear_bounds(net, set, m.relaxation_mode())?,
            };
            ("lp", b)
        }
        BoundSource::LpRecursive => ("lp-recursive", lp_bounds_recursive(net, set)?),
    };

    let mut margins = Vec::with_capacity(objectives.len());
    for obj in &objectives {
        let lp = build_relaxed_lp(net, set, &bounds, obj)?;
        let value = expect_optimal(&lp, "margin")?;
        margins.push(ObjectiveMargin {
            target_class: obj.target_class,
            margin: value + obj.c0,
        });
    }
    Ok(CertificationResult::assemble(
        tag, predicted, margins, None, started,
    ))
}

/// Multi-neuron certification: per hidden layer, build the joint k-ReLU
/// relaxation from the running (refined) bounds, refine the next layer's
/// bounds by LP through it, and finally take the margins over the full
/// relaxed program cut by the last hidden layer's joint relaxation.
///
/// Refinement and margin LPs carry the whole relaxed prefix of the network
/// (input set, affine equalities, triangles), so every hull row only ever
/// tightens them; gains of earlier layers propagate through the refined
/// intervals and the relational bounds.
pub fn certify_krelu(
    net: &Network,
    x: &Array1<f64>,
    set: &UncertaintySet,
    k: usize,
    mode: RelaxationMode,
) -> Result<CertificationResult> {
    let started = Instant::now();
    check_centered(x, set)?;
    if set.as_box().is_none() {
        return Err(Error::InputSetNotPolyhedral("non-box ball"));
    }
    let objectives = net.margin_objectives(x)?;
    let predicted = net.predicted_class(x)?;
    let depth = net.depth();

    if depth == 1 {
        // No hidden layer: the margin LP is exact affine optimization.
        let empty = LayerBounds::new();
        let mut margins = Vec::new();
        for obj in &objectives {
            let (lp, _) = relaxed_lp_upto(net, set, &empty, 1, &obj.c)?;
            margins.push(ObjectiveMargin {
                target_class: obj.target_class,
                margin: expect_optimal(&lp, "margin")? + obj.c0,
            });
        }
        return Ok(CertificationResult::assemble(
            "krelu", predicted, margins, None, started,
        ));
    }

    // Margin LPs: the full relaxed program over the refined bounds, cut by
    // the last hidden layer's joint-relaxation hulls.
    let (bounds, last_kset) = krelu_hidden_bounds(net, set, k, mode)?;
    let kset = last_kset.expect("depth >= 2 always builds a joint relaxation");
    let mut margins = Vec::with_capacity(objectives.len());
    for obj in &objectives {
        let (mut lp, layout) = relaxed_lp_upto(net, set, &bounds, depth, &obj.c)?;
        append_hull_rows(&mut lp, &layout, &kset);
        let margin = expect_optimal(&lp, "margin")? + obj.c0;
        margins.push(ObjectiveMargin {
            target_class: obj.target_class,
            margin,
        });
    }
    Ok(CertificationResult::assemble(
        "krelu", predicted, margins, None, started,
    ))
}

/// The refined-bound loop of the multi-neuron pipeline: per hidden layer,
/// build the joint relaxation from the bounds so far, then refine the next
/// hidden layer's greedy baseline by LPs through it. Returns the refined
/// hidden-layer bounds and the last layer's joint relaxation.
fn krelu_hidden_bounds(
    net: &Network,
    set: &UncertaintySet,
    k: usize,
    mode: RelaxationMode,
) -> Result<(LayerBounds, Option<KReluSet>)> {
    let depth = net.depth();
    let mut bounds = LayerBounds::new();
    let mut relaxations: Vec<ReluRelaxation> = Vec::new();
    let eye1 = Array2::eye(net.width(1));
    let ab1 = backsubstitute(net, &relaxations, 1, &eye1)?;
    let (l1, u1) = concretize(&ab1, set);
    bounds.push(l1, u1);

    let mut last_kset: Option<KReluSet> = None;
    for layer in 1..depth {
        let (lo, hi) = bounds.layer(layer);
        let kset = KReluSet::build(net, set, layer, lo, hi, &relaxations, k, mode)?;
        relaxations.push(kset.relaxation.clone());
        if layer + 1 < depth {
            // Greedy baseline for the next layer from the refined envelopes,
            // then per-neuron LP refinement through the joint relaxation.
            let eye = Array2::eye(net.width(layer + 1));
            let ab = backsubstitute(net, &relaxations, layer + 1, &eye)?;
            let (mut lo_next, mut hi_next) = concretize(&ab, set);
            if !kset.hulls.is_empty() {
                let n_next = net.width(layer + 1);
                for j in 0..n_next {
                    let mut c = vec![0.0; n_next];
                    c[j] = 1.0;
                    let (mut lp, layout) = relaxed_lp_upto(net, set, &bounds, layer + 1, &c)?;
                    append_hull_rows(&mut lp, &layout, &kset);
                    lo_next[j] = lo_next[j].max(expect_optimal(&lp, "refinement")?);
                    for v in lp.objective.iter_mut() {
                        *v = -*v;
                    }
                    hi_next[j] = hi_next[j].min(-expect_optimal(&lp, "refinement")?);
                }
            }
            bounds.push(lo_next, hi_next);
        }
        last_kset = Some(kset);
    }
    Ok((bounds, last_kset))
}

/// Result of one exact minimization: a bound that equals the true minimum
/// whenever no positive subtree was pruned, and the best witness found.
#[derive(Debug, Clone)]
pub struct ExactMinimum {
    pub bound: f64,
    /// Input point attaining `bound` at some fully-fixed leaf, if any
    /// explored leaf attained the incumbent.
    pub witness: Option<Vec<f64>>,
}

/// Exact minimization of `c . x^(L) + c0` over the uncertainty set by
/// depth-first branching over the ReLU states of unstable neurons.
///
/// Every node solves the triangle-relaxed LP with the branch constraints
/// accumulated so far; a subtree is pruned when its bound is positive (it
/// cannot affect certification) or cannot beat the incumbent. Leaves have
/// every unstable neuron fixed, making the LP exact on the branch.
pub fn exact_minimize(
    net: &Network,
    set: &UncertaintySet,
    c: &[f64],
    c0: f64,
    budget: usize,
) -> Result<ExactMinimum> {
    // Intersect every greedy bound route: the branch LPs then dominate any
    // single-route relaxation, which keeps the method ladder ordered even
    // when a positive subtree is pruned by its LP bound alone.
    let mut bounds = crate::propagate::linear_bounds(net, set, RelaxationMode::Adaptive)?;
    let same_slope = crate::propagate::linear_bounds(net, set, RelaxationMode::SameSlope)?;
    let interval = ibp_bounds(net, set)?;
    for i in 1..=net.depth() {
        let (l, u) = same_slope.layer(i);
        bounds.intersect_layer(i, l, u);
        let (l, u) = interval.layer(i);
        bounds.intersect_layer(i, l, u);
    }
    debug_assert!(bounds.is_consistent());
    // Most-unstable-first branching order.
    let mut unstable: Vec<(usize, usize, f64)> = Vec::new();
    for i in 1..net.depth() {
        let (lo, hi) = bounds.layer(i);
        for j in 0..lo.len() {
            if neuron_status(lo[j], hi[j]) == NeuronStatus::Unstable {
                unstable.push((i, j, (lo[j] * hi[j]).abs()));
            }
        }
    }
    unstable.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    if unstable.len() > budget {
        return Err(Error::BudgetExceeded {
            unstable: unstable.len(),
            budget,
        });
    }

    let center = Array1::from_vec(set.center().to_vec());
    let clean_pre = net.pre_activations(&center)?;
    let (mut lp, layout) = relaxed_lp_upto(net, set, &bounds, net.depth(), c)?;

    struct Search<'a> {
        net: &'a Network,
        layout: &'a LpLayout,
        unstable: &'a [(usize, usize, f64)],
        clean_pre: &'a [Array1<f64>],
        c0: f64,
        incumbent: f64,
        witness: Option<Vec<f64>>,
    }

    impl Search<'_> {
        fn dfs(&mut self, lp: &mut LinearProgram, depth: usize) -> Result<f64> {
            let sol = match solve_lp(lp)? {
                LpOutcome::Optimal(sol) => sol,
                LpOutcome::Infeasible => return Ok(f64::INFINITY),
                LpOutcome::Unbounded => {
                    return Err(Error::MalformedLp("branch LP is unbounded".into()))
                }
            };
            let value = sol.value + self.c0;
            if value > 0.0 {
                // Positive subtree: cannot affect certification.
                return Ok(value);
            }
            if value >= self.incumbent - 1e-12 {
                return Ok(value);
            }
            if depth == self.unstable.len() {
                self.incumbent = value;
                self.witness = Some(sol.point[..self.net.input_dim()].to_vec());
                return Ok(value);
            }
            let (layer, neuron, _) = self.unstable[depth];
            let positive_first = self.clean_pre[layer - 1][neuron] >= 0.0;
            let mut best = f64::INFINITY;
            for positive in [positive_first, !positive_first] {
                self.push_branch(lp, layer, neuron, positive);
                let v = self.dfs(lp, depth + 1)?;
                Self::pop_branch(lp);
                best = best.min(v);
            }
            Ok(best)
        }

        fn push_branch(&self, lp: &mut LinearProgram, layer: usize, neuron: usize, positive: bool) {
            let xv = self.layout.x_off[layer] + neuron;
            let zv = self.layout.z_off[layer] + neuron;
            let n = lp.num_vars();
            let mut sign_row = vec![0.0; n];
            let mut eq_row = vec![0.0; n];
            if positive {
                sign_row[xv] = -1.0; // x >= 0
                eq_row[zv] = 1.0; // z = x
                eq_row[xv] = -1.0;
            } else {
                sign_row[xv] = 1.0; // x <= 0
                eq_row[zv] = 1.0; // z = 0
            }
            lp.add_le(sign_row, 0.0);
            lp.add_eq(eq_row, 0.0);
        }

        fn pop_branch(lp: &mut LinearProgram) {
            lp.a_ineq.pop();
            lp.b_ineq.pop();
            lp.a_eq.pop();
            lp.b_eq.pop();
        }
    }

    let mut search = Search {
        net,
        layout: &layout,
        unstable: &unstable,
        clean_pre: &clean_pre,
        c0,
        incumbent: f64::INFINITY,
        witness: None,
    };
    let bound = search.dfs(&mut lp, 0)?;
    let witness = if search.incumbent <= bound + 1e-12 {
        search.witness
    } else {
        None
    };
    Ok(ExactMinimum { bound, witness })
}

/// Complete verification by branch-and-bound over ReLU states. Certifies,
/// falsifies with a forward-verified counterexample, or reports unknown
/// when a non-positive margin has no verifiable witness.
pub fn exact_certify(
    net: &Network,
    x: &Array1<f64>,
    set: &UncertaintySet,
    budget: usize,
) -> Result<CertificationResult> {
    let started = Instant::now();
    check_centered(x, set)?;
    let objectives = net.margin_objectives(x)?;
    let predicted = net.predicted_class(x)?;

    let mut margins = Vec::with_capacity(objectives.len());
    let mut counterexample: Option<Vec<f64>> = None;
    for obj in &objectives {
        let exact = exact_minimize(net, set, &obj.c, obj.c0, budget)?;
        margins.push(ObjectiveMargin {
            target_class: obj.target_class,
            margin: exact.bound,
        });
        if exact.bound <= 0.0 && counterexample.is_none() {
            if let Some(point) = exact.witness {
                if let Some(valid) = validate_counterexample(net, set, predicted, point) {
                    counterexample = Some(valid);
                }
            }
        }
    }
    Ok(CertificationResult::assemble(
        "exact",
        predicted,
        margins,
        counterexample,
        started,
    ))
}

/// Projects the candidate into the input set exactly and keeps it only if
/// the prediction actually changes.
fn validate_counterexample(
    net: &Network,
    set: &UncertaintySet,
    predicted: usize,
    mut point: Vec<f64>,
) -> Option<Vec<f64>> {
    if let Some((lo, hi)) = set.as_box() {
        for (v, (l, u)) in point.iter_mut().zip(lo.iter().zip(&hi)) {
            *v = v.clamp(*l, *u);
        }
    }
    let x = Array1::from_vec(point);
    match net.predicted_class(&x) {
        Ok(class) if class != predicted => Some(x.to_vec()),
        _ => None,
    }
}
