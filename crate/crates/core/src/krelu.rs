//! Multi-neuron (k-ReLU) refinement: relational constraints over groups of
//! neurons, convex hulls of the groups' ReLU branch polytopes, and LP-refined
//! bounds for the next layer.
//!
//! For a group J of k unstable neurons, the pre-activation polytope P over
//! `x_J` (octahedral relational constraints, or any polytope) is intersected
//! with each of the `2^k` ReLU branch polytopes in the joint `(x_J, z_J)`
//! space; the convex hull of the union is the group's joint relaxation and
//! replaces the k independent triangles.

use ndarray::{Array1, Array2};

use crate::lp::{solve_lp, LinearProgram, LpOutcome};
use crate::network::Network;
use crate::numerics::UncertaintySet;
use crate::polytope::{h_to_v, hull_of_union, HPolytope, VPolytope};
use crate::propagate::{backsubstitute, concretize, NeuronStatus, ReluRelaxation};
use crate::{Error, Result};

/// A set of neuron indices within one layer, jointly relaxed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuronGroup {
    pub layer: usize,
    pub indices: Vec<usize>,
}

impl NeuronGroup {
    pub fn size(&self) -> usize {
        self.indices.len()
    }
}

/// Sound upper bounds `sum_j a_j x_j <= c(a)` over a group's pre-activations,
/// one per coefficient tuple.
#[derive(Debug, Clone)]
pub struct RelationalConstraints {
    pub group: NeuronGroup,
    pub coefficients: Vec<Vec<f64>>,
    pub bounds: Vec<f64>,
}

/// One ReLU branch configuration: `signs[j]` fixes neuron `j` of the group
/// to its positive (`true`) or negative (`false`) branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchConfig {
    pub signs: Vec<bool>,
}

impl BranchConfig {
    /// All `2^k` configurations in binary counting order.
    pub fn enumerate(k: usize) -> impl Iterator<Item = BranchConfig> {
        (0..1usize << k).map(move |mask| BranchConfig {
            signs: (0..k).map(|j| mask & (1 << j) != 0).collect(),
        })
    }
}

/// The joint relaxation of one hidden layer: per-group hulls in `(x_J, z_J)`
/// coordinates plus the baseline interval/triangle constraints.
#[derive(Debug, Clone)]
pub struct KReluSet {
    pub layer: usize,
    pub hulls: Vec<(NeuronGroup, HPolytope)>,
    pub lower: Array1<f64>,
    pub upper: Array1<f64>,
    pub relaxation: ReluRelaxation,
}

/// All coefficient tuples in `{-1, 0, 1}^k` except the zero tuple, in
/// lexicographic order; `3^k - 1` tuples of which `2k` are interval tuples.
pub fn octahedral_coefficients(k: usize) -> Result<Vec<Vec<f64>>> {
    if k == 0 || k > 4 {
        return Err(Error::GroupSizeCap(k));
    }
    let mut out = Vec::with_capacity(3usize.pow(k as u32) - 1);
    let mut tuple = vec![-1.0f64; k];
    loop {
        if tuple.iter().any(|x| *x != 0.0) {
            out.push(tuple.clone());
        }
        // Lexicographic increment over the digits (-1, 0, 1).
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if tuple[pos] < 1.0 {
                tuple[pos] += 1.0;
                for t in tuple.iter_mut().skip(pos + 1) {
                    *t = -1.0;
                }
                break;
            }
            if pos == 0 {
                return Ok(out);
            }
        }
    }
}

/// True for tuples with exactly one nonzero entry of magnitude one.
pub fn is_interval_tuple(a: &[f64]) -> bool {
    a.iter().filter(|x| **x != 0.0).count() == 1 && a.iter().all(|x| x.abs() == 1.0 || *x == 0.0)
}

/// Sound upper bounds on `sum_j a_j x^(layer)_j` for each tuple, by
/// backsubstituting the stacked objective rows through the given envelopes
/// and concretizing over the input set.
pub fn relational_bounds_with(
    net: &Network,
    set: &UncertaintySet,
    group: &NeuronGroup,
    coefficients: &[Vec<f64>],
    relaxations: &[ReluRelaxation],
) -> Result<RelationalConstraints> {
    let width = net.width(group.layer);
    let mut rows = Array2::zeros((coefficients.len(), width));
    for (r, tuple) in coefficients.iter().enumerate() {
        debug_assert_eq!(tuple.len(), group.size());
        for (a, j) in tuple.iter().zip(&group.indices) {
            rows[(r, *j)] = *a;
        }
    }
    let ab = backsubstitute(net, relaxations, group.layer, &rows)?;
    let (_, upper) = concretize(&ab, set);
    Ok(RelationalConstraints {
        group: group.clone(),
        coefficients: coefficients.to_vec(),
        bounds: upper.to_vec(),
    })
}

/// As [`relational_bounds_with`], deriving the envelopes from scratch with
/// the given relaxation mode.
pub fn relational_bounds(
    net: &Network,
    set: &UncertaintySet,
    group: &NeuronGroup,
    coefficients: &[Vec<f64>],
    mode: crate::propagate::RelaxationMode,
) -> Result<RelationalConstraints> {
    let (_, relaxations) = crate::propagate::linear_bounds_with_relaxations(net, set, mode)?;
    relational_bounds_with(net, set, group, coefficients, &relaxations)
}

/// Groups the unstable neurons of a layer by descending triangle-relaxation
/// area `|l * u| / 2`, chunked into consecutive groups of `k` (the last group
/// may be smaller). Stable neurons are exact and stay ungrouped.
pub fn partition_neurons(
    layer: usize,
    lower: &Array1<f64>,
    upper: &Array1<f64>,
    k: usize,
) -> Vec<NeuronGroup> {
    debug_assert!(k >= 1);
    let mut unstable: Vec<(usize, f64)> = (0..lower.len())
        .filter(|&j| lower[j] < 0.0 && upper[j] > 0.0)
        .map(|j| (j, (lower[j] * upper[j]).abs() / 2.0))
        .collect();
    // Descending area; equal areas ordered by neuron index.
    unstable.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    unstable
        .chunks(k)
        .map(|chunk| NeuronGroup {
            layer,
            indices: chunk.iter().map(|(j, _)| *j).collect(),
        })
        .collect()
}

/// Convex hull of the `2^k` ReLU branch patches of an arbitrary bounded
/// pre-activation polytope `pre` over `x_J`, in the joint `(x_J, z_J)` space.
///
/// Each branch config `s` contributes `pre` intersected with
/// `{s_j x_j >= 0, z_j = (1+s_j)/2 * x_j}`; empty branches are dropped.
pub fn joint_relu_hull(pre: &HPolytope) -> Result<HPolytope> {
    let k = pre.dim();
    if k == 0 || k > 4 {
        return Err(Error::GroupSizeCap(k));
    }
    let dim = 2 * k;
    let mut patches: Vec<VPolytope> = Vec::with_capacity(1 << k);
    for config in BranchConfig::enumerate(k) {
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for (row, rhs) in pre.a.rows().into_iter().zip(&pre.b) {
            let mut lifted = vec![0.0; dim];
            lifted[..k].copy_from_slice(row.as_slice().expect("row-major layout"));
            rows.push((lifted, *rhs));
        }
        for (j, positive) in config.signs.iter().enumerate() {
            let s = if *positive { 1.0 } else { -1.0 };
            let mut sign_row = vec![0.0; dim];
            sign_row[j] = -s; // s_j x_j >= 0
            rows.push((sign_row, 0.0));
            // z_j = (1+s)/2 * x_j as an inequality pair.
            let slope = (1.0 + s) / 2.0;
            let mut eq = vec![0.0; dim];
            eq[k + j] = 1.0;
            eq[j] = -slope;
            rows.push((eq.clone(), 0.0));
            let neg: Vec<f64> = eq.iter().map(|x| -x).collect();
            rows.push((neg, 0.0));
        }
        let patch = h_to_v(&HPolytope::from_rows(dim, &rows))?;
        if !patch.is_empty() {
            patches.push(patch);
        }
    }
    if patches.is_empty() {
        return Ok(HPolytope::empty(dim));
    }
    hull_of_union(&patches)
}

/// The group's joint hull from its relational constraints.
pub fn group_hull(group: &NeuronGroup, rel: &RelationalConstraints) -> Result<HPolytope> {
    let k = group.size();
    let rows: Vec<(Vec<f64>, f64)> = rel
        .coefficients
        .iter()
        .zip(&rel.bounds)
        .map(|(a, c)| (a.clone(), *c))
        .collect();
    joint_relu_hull(&HPolytope::from_rows(k, &rows))
}

impl KReluSet {
    /// Assembles the joint relaxation of `layer` from its interval bounds:
    /// partition the unstable neurons, bound the octahedral constraints of
    /// each group through the given envelopes, hull each group's branches.
    pub fn build(
        net: &Network,
        set: &UncertaintySet,
        layer: usize,
        lower: &Array1<f64>,
        upper: &Array1<f64>,
        relaxations: &[ReluRelaxation],
        k: usize,
        mode: crate::propagate::RelaxationMode,
    ) -> Result<KReluSet> {
        if k == 0 || k > 4 {
            return Err(Error::GroupSizeCap(k));
        }
        let groups = partition_neurons(layer, lower, upper, k);
        let mut hulls = Vec::with_capacity(groups.len());
        for group in groups {
            let coeffs = octahedral_coefficients(group.size())?;
            let rel = relational_bounds_with(net, set, &group, &coeffs, relaxations)?;
            let hull = group_hull(&group, &rel)?;
            hulls.push((group, hull));
        }
        Ok(KReluSet {
            layer,
            hulls,
            lower: lower.clone(),
            upper: upper.clone(),
            relaxation: crate::propagate::relu_relaxation(lower, upper, mode),
        })
    }

    /// Width of the underlying layer.
    pub fn width(&self) -> usize {
        self.lower.len()
    }
}

/// Sets up the LP over `(x, z)` at the set's layer: interval bounds, exact
/// stable equalities, triangle constraints for unstable neurons, and every
/// group hull's rows.
fn kset_lp(kset: &KReluSet) -> LinearProgram {
    let n = kset.width();
    let mut lp = LinearProgram::new(2 * n);
    for j in 0..n {
        let (l, u) = (kset.lower[j], kset.upper[j]);
        lp.set_bounds(j, l, u);
        match kset.relaxation.status[j] {
            NeuronStatus::StableNegative => lp.set_bounds(n + j, 0.0, 0.0),
            NeuronStatus::StablePositive => {
                lp.set_bounds(n + j, l.max(0.0), u.max(0.0));
                let mut eq = vec![0.0; 2 * n];
                eq[n + j] = 1.0;
                eq[j] = -1.0;
                lp.add_eq(eq, 0.0);
            }
            NeuronStatus::Unstable => {
                lp.set_bounds(n + j, 0.0, u);
                // z >= x
                let mut ge = vec![0.0; 2 * n];
                ge[j] = 1.0;
                ge[n + j] = -1.0;
                lp.add_le(ge, 0.0);
                // z <= chord * (x - l)
                let chord = kset.relaxation.upper_slope[j];
                let mut le = vec![0.0; 2 * n];
                le[n + j] = 1.0;
                le[j] = -chord;
                lp.add_le(le, -chord * l);
            }
        }
    }
    for (group, hull) in &kset.hulls {
        let k = group.size();
        for (row, rhs) in hull.a.rows().into_iter().zip(&hull.b) {
            let mut scattered = vec![0.0; 2 * n];
            for (c, j) in group.indices.iter().enumerate() {
                scattered[*j] = row[c];
                scattered[n + *j] = row[k + c];
            }
            lp.add_le(scattered, *rhs);
        }
    }
    lp
}

/// Minimum or maximum of `coef_on_z . z + offset` over the joint relaxation.
pub fn extremize_over_kset(
    kset: &KReluSet,
    coef_on_z: &[f64],
    offset: f64,
    minimize: bool,
) -> Result<f64> {
    let n = kset.width();
    debug_assert_eq!(coef_on_z.len(), n);
    let mut lp = kset_lp(kset);
    let mut c = vec![0.0; 2 * n];
    for j in 0..n {
        c[n + j] = if minimize { coef_on_z[j] } else { -coef_on_z[j] };
    }
    lp.set_objective(&c);
    match solve_lp(&lp)? {
        LpOutcome::Optimal(sol) => Ok(if minimize {
            sol.value + offset
        } else {
            -sol.value + offset
        }),
        LpOutcome::Infeasible => Err(Error::InconsistentRefinement("infeasible")),
        LpOutcome::Unbounded => Err(Error::InconsistentRefinement("unbounded")),
    }
}

/// Refined pre-activation bounds for layer `kset.layer + 1`: each neuron's
/// affine row is minimized and maximized over the joint relaxation, then
/// clamped against the supplied baseline interval.
pub fn refine_bounds(
    net: &Network,
    kset: &KReluSet,
    baseline_lower: &Array1<f64>,
    baseline_upper: &Array1<f64>,
) -> Result<(Array1<f64>, Array1<f64>)> {
    let next = kset.layer + 1;
    debug_assert!(next <= net.depth());
    let layer = net.layer(next);
    let m = layer.out_dim();
    let mut lo = Array1::zeros(m);
    let mut hi = Array1::zeros(m);
    for j in 0..m {
        let row = layer.weights.row(j);
        let coef = row.as_slice().expect("row-major layout");
        lo[j] = extremize_over_kset(kset, coef, layer.bias[j], true)?;
        hi[j] = extremize_over_kset(kset, coef, layer.bias[j], false)?;
        lo[j] = lo[j].max(baseline_lower[j]);
        hi[j] = hi[j].min(baseline_upper[j]);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagate::RelaxationMode;
    use crate::testutil::{example_net, seeded_rng};
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn octahedral_counts() {
        for k in 1..=3usize {
            let a = octahedral_coefficients(k).unwrap();
            assert_eq!(a.len(), 3usize.pow(k as u32) - 1);
            let interval = a.iter().filter(|t| is_interval_tuple(t)).count();
            assert_eq!(interval, 2 * k);
        }
        assert_eq!(
            octahedral_coefficients(1).unwrap(),
            vec![vec![-1.0], vec![1.0]]
        );
        assert_eq!(octahedral_coefficients(2).unwrap().len(), 8);
        assert!(octahedral_coefficients(0).is_err());
        assert!(octahedral_coefficients(5).is_err());
    }

    #[test]
    fn octahedral_order_is_lexicographic() {
        let a = octahedral_coefficients(2).unwrap();
        assert_eq!(a[0], vec![-1.0, -1.0]);
        assert_eq!(a[1], vec![-1.0, 0.0]);
        assert_eq!(a[2], vec![-1.0, 1.0]);
        assert_eq!(a[3], vec![0.0, -1.0]);
        // (0, 0) skipped
        assert_eq!(a[4], vec![0.0, 1.0]);
        assert_eq!(a[7], vec![1.0, 1.0]);
    }

    #[test]
    fn relational_bounds_on_the_example_net() {
        let net = example_net();
        let set = UncertaintySet::linf_ball(vec![0.0, 0.0], 1.0);
        let group = NeuronGroup {
            layer: 1,
            indices: vec![0, 1],
        };
        let coeffs = vec![vec![1.0, 1.0], vec![1.0, 0.0], vec![1.0, -1.0]];
        let rel =
            relational_bounds(&net, &set, &group, &coeffs, RelaxationMode::SameSlope).unwrap();
        // (1,1) W1 = (2, 0) -> support 2; (1,0) W1 = (1,-1) -> 2; (1,-1) W1 = (0,-2) -> 2.
        assert!((rel.bounds[0] - 2.0).abs() < 1e-12);
        assert!((rel.bounds[1] - 2.0).abs() < 1e-12);
        assert!((rel.bounds[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn relational_bounds_at_zero_radius_hit_the_clean_point() {
        let net = example_net();
        let set = UncertaintySet::linf_ball(vec![0.3, -0.2], 0.0);
        let group = NeuronGroup {
            layer: 1,
            indices: vec![0, 1],
        };
        let coeffs = octahedral_coefficients(2).unwrap();
        let rel =
            relational_bounds(&net, &set, &group, &coeffs, RelaxationMode::Adaptive).unwrap();
        let pre = net.pre_activations(&array![0.3, -0.2]).unwrap();
        for (a, c) in rel.coefficients.iter().zip(&rel.bounds) {
            let exact = a[0] * pre[0][0] + a[1] * pre[0][1];
            assert!((c - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_sorts_by_triangle_area() {
        let lower = array![-1.0, -2.0, -1.0, -3.0];
        let upper = array![1.0, 2.0, 3.0, 1.0];
        // Areas: 0.5, 2, 1.5, 1.5 -> order 1, 2, 3, 0 (zero-based).
        let groups = partition_neurons(1, &lower, &upper, 2);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].indices, vec![1, 2]);
        assert_eq!(groups[1].indices, vec![3, 0]);
    }

    #[test]
    fn partition_skips_stable_neurons() {
        let lower = array![0.5, -1.0, -2.0];
        let upper = array![2.0, -0.5, 1.0];
        let groups = partition_neurons(1, &lower, &upper, 2);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].indices, vec![2]);

        let all_stable = partition_neurons(1, &array![0.1, -3.0], &array![0.2, -1.0], 2);
        assert!(all_stable.is_empty());
    }

    #[test]
    fn partition_remainder_group_is_smaller() {
        let lower = array![-1.0, -1.0, -1.0];
        let upper = array![1.0, 2.0, 3.0];
        let groups = partition_neurons(1, &lower, &upper, 2);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].size(), 2);
        assert_eq!(groups[1].size(), 1);
    }

    #[test]
    fn single_neuron_hull_is_the_triangle() {
        // P = [-1, 1]; the joint hull must equal the triangle relaxation
        // z >= 0, z >= x, z <= (x + 1) / 2.
        let pre = HPolytope::from_rows(1, &[(vec![1.0], 1.0), (vec![-1.0], 1.0)]);
        let hull = joint_relu_hull(&pre).unwrap();
        let triangle = HPolytope::from_rows(
            2,
            &[
                (vec![0.0, -1.0], 0.0),
                (vec![1.0, -1.0], 0.0),
                (vec![-0.5, 1.0], 0.5),
            ],
        );
        let mut rng = seeded_rng(17);
        for _ in 0..5000 {
            let pt = [rng.gen_range(-1.5..1.5), rng.gen_range(-0.5..1.5)];
            assert_eq!(
                hull.contains(&pt, 1e-7),
                triangle.contains(&pt, 1e-7),
                "{pt:?}"
            );
        }
    }

    #[test]
    fn stable_positive_hull_is_the_identity_segment() {
        let pre = HPolytope::from_rows(1, &[(vec![1.0], 1.0), (vec![-1.0], -0.5)]);
        let hull = joint_relu_hull(&pre).unwrap();
        for (x, z, inside) in [
            (0.5, 0.5, true),
            (0.75, 0.75, true),
            (1.0, 1.0, true),
            (0.75, 0.8, false),
            (0.75, 0.7, false),
            (0.4, 0.4, false),
        ] {
            assert_eq!(hull.contains(&[x, z], 1e-6), inside, "({x}, {z})");
        }
    }

    #[test]
    fn octahedral_hull_of_the_example_net_caps_the_sum_at_two() {
        // P = {|x1| <= 2, |x2| <= 2, |x1 + x2| <= 2, |x1 - x2| <= 2}
        let rows = vec![
            (vec![1.0, 0.0], 2.0),
            (vec![-1.0, 0.0], 2.0),
            (vec![0.0, 1.0], 2.0),
            (vec![0.0, -1.0], 2.0),
            (vec![1.0, 1.0], 2.0),
            (vec![-1.0, -1.0], 2.0),
            (vec![1.0, -1.0], 2.0),
            (vec![-1.0, 1.0], 2.0),
        ];
        let pre = HPolytope::from_rows(2, &rows);
        let hull = joint_relu_hull(&pre).unwrap();
        // max z1 + z2 over the hull, via LP on the hull rows alone.
        let mut lp = LinearProgram::new(4);
        lp.set_objective(&[0.0, 0.0, -1.0, -1.0]);
        for (row, rhs) in hull.a.rows().into_iter().zip(&hull.b) {
            lp.add_le(row.to_vec(), *rhs);
        }
        let max = -solve_lp(&lp).unwrap().value();
        assert!((max - 2.0).abs() < 1e-6, "max z1+z2 = {max}");
    }

    #[test]
    fn refine_bounds_on_the_example_net() {
        let net = example_net();
        let set = UncertaintySet::linf_ball(vec![0.0, 0.0], 1.0);
        let (bounds, relaxations) =
            crate::propagate::linear_bounds_with_relaxations(&net, &set, RelaxationMode::SameSlope)
                .unwrap();
        let (l1, u1) = bounds.layer(1);
        let kset = KReluSet::build(
            &net,
            &set,
            1,
            l1,
            u1,
            &relaxations[..0],
            2,
            RelaxationMode::SameSlope,
        )
        .unwrap();
        let (bl, bu) = bounds.layer(2);
        let (lo, hi) = refine_bounds(&net, &kset, bl, bu).unwrap();
        assert!((hi[0] - 2.0).abs() < 1e-6, "refined upper = {}", hi[0]);
        assert!(lo[0].abs() < 1e-6, "refined lower = {}", lo[0]);
    }

    #[test]
    fn k1_refinement_matches_triangle_lp() {
        let mut rng = seeded_rng(31);
        for _ in 0..10 {
            let net = crate::testutil::random_net(&mut rng, 2, 4);
            let center: Vec<f64> = (0..net.input_dim())
                .map(|_| rng.gen_range(-0.5..0.5))
                .collect();
            let set = UncertaintySet::linf_ball(center, 0.5);
            let (bounds, relaxations) = crate::propagate::linear_bounds_with_relaxations(
                &net,
                &set,
                RelaxationMode::Adaptive,
            )
            .unwrap();
            let (l1, u1) = bounds.layer(1);
            let wide_lo = Array1::from_elem(net.width(2), f64::NEG_INFINITY);
            let wide_hi = Array1::from_elem(net.width(2), f64::INFINITY);
            let k1 = KReluSet::build(
                &net,
                &set,
                1,
                l1,
                u1,
                &relaxations[..0],
                1,
                RelaxationMode::Adaptive,
            )
            .unwrap();
            let (lo1, hi1) = refine_bounds(&net, &k1, &wide_lo, &wide_hi).unwrap();
            // With k = 1 the hull equals the triangle, so refinement equals
            // the plain triangle LP over the same baseline set.
            let plain = KReluSet {
                layer: 1,
                hulls: Vec::new(),
                lower: l1.clone(),
                upper: u1.clone(),
                relaxation: crate::propagate::relu_relaxation(l1, u1, RelaxationMode::Adaptive),
            };
            let (lo_t, hi_t) = refine_bounds(&net, &plain, &wide_lo, &wide_hi).unwrap();
            for j in 0..lo1.len() {
                assert!((lo1[j] - lo_t[j]).abs() < 1e-6);
                assert!((hi1[j] - hi_t[j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn sampled_joint_activations_satisfy_every_hull() {
        let mut rng = seeded_rng(47);
        for _ in 0..5 {
            let net = crate::testutil::random_net(&mut rng, 2, 5);
            let center: Vec<f64> = (0..net.input_dim())
                .map(|_| rng.gen_range(-0.5..0.5))
                .collect();
            let set = UncertaintySet::linf_ball(center.clone(), 0.4);
            let (bounds, relaxations) = crate::propagate::linear_bounds_with_relaxations(
                &net,
                &set,
                RelaxationMode::Adaptive,
            )
            .unwrap();
            let (l1, u1) = bounds.layer(1);
            let kset = KReluSet::build(
                &net,
                &set,
                1,
                l1,
                u1,
                &relaxations[..0],
                2,
                RelaxationMode::Adaptive,
            )
            .unwrap();
            for _ in 0..1000 {
                let x = Array1::from_vec(crate::testutil::sample_in_set(&set, &mut rng));
                let pre = net.pre_activations(&x).unwrap();
                for (group, hull) in &kset.hulls {
                    let mut point = Vec::with_capacity(2 * group.size());
                    for j in &group.indices {
                        point.push(pre[0][*j]);
                    }
                    for j in &group.indices {
                        point.push(pre[0][*j].max(0.0));
                    }
                    assert!(hull.contains(&point, 1e-7), "point {point:?} left its hull");
                }
            }
        }
    }

    #[test]
    fn single_full_group_matches_branch_enumeration_on_tiny_net() {
        // Exact projection P of the layer-1 pre-activation set, exact joint
        // hull, and exact next-layer bounds from explicit branch enumeration.
        let mut rng = seeded_rng(53);
        for _ in 0..5 {
            let net = crate::testutil::random_net(&mut rng, 2, 3);
            let n1 = net.width(1);
            if n1 > 3 {
                continue;
            }
            let center: Vec<f64> = (0..net.input_dim())
                .map(|_| rng.gen_range(-0.3..0.3))
                .collect();
            let eps = 0.6;
            let set = UncertaintySet::linf_ball(center.clone(), eps);
            // Exact P: affine image of the input box.
            let (lo_in, hi_in) = set.as_box().unwrap();
            let corners = crate::testutil::box_corners(&lo_in, &hi_in);
            let images: Vec<Array1<f64>> = corners
                .iter()
                .map(|c| net.layer(1).affine(&Array1::from_vec(c.clone())))
                .collect();
            let p_exact = crate::polytope::v_to_h(&VPolytope {
                vertices: images,
                rays: vec![],
            })
            .unwrap();
            let hull = joint_relu_hull(&p_exact).unwrap();
            let group = NeuronGroup {
                layer: 1,
                indices: (0..n1).collect(),
            };
            let bounds = crate::propagate::linear_bounds(&net, &set, RelaxationMode::Adaptive)
                .unwrap();
            let (l1, u1) = bounds.layer(1);
            let kset = KReluSet {
                layer: 1,
                hulls: vec![(group, hull)],
                lower: l1.clone(),
                upper: u1.clone(),
                relaxation: crate::propagate::relu_relaxation(l1, u1, RelaxationMode::Adaptive),
            };
            let wide_lo = Array1::from_elem(net.width(2), f64::NEG_INFINITY);
            let wide_hi = Array1::from_elem(net.width(2), f64::INFINITY);
            let (lo, hi) = refine_bounds(&net, &kset, &wide_lo, &wide_hi).unwrap();
            // Oracle: exact bounds of layer 2 via vertices of the exact
            // joint hull (the optimum of a linear function over a polytope
            // sits at a vertex).
            let verts = h_to_v(&kset.hulls[0].1).unwrap().vertices;
            for j in 0..net.width(2) {
                let row = net.layer(2).weights.row(j);
                let b = net.layer(2).bias[j];
                let vals: Vec<f64> = verts
                    .iter()
                    .map(|v| {
                        (0..n1).map(|c| row[c] * v[n1 + c]).sum::<f64>() + b
                    })
                    .collect();
                let exact_lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let exact_hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert!((lo[j] - exact_lo).abs() < 1e-6, "lo {} vs {}", lo[j], exact_lo);
                assert!((hi[j] - exact_hi).abs() < 1e-6, "hi {} vs {}", hi[j], exact_hi);
            }
        }
    }
}
