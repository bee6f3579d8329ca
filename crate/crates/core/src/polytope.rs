//! Convex-polytope kernel: H-representation / V-representation conversion by
//! the double description method, convex hulls of unions, and intersections.
//!
//! Both conversion directions run the same cone enumeration: `h_to_v`
//! homogenizes `{Ax <= b}` into a cone and reads vertices and rays off the
//! cone's extreme rays; `v_to_h` enumerates the polar cone of the generator
//! cone, whose extreme rays are the facets. Arithmetic is floating point
//! with an absolute adjacency tolerance; generators are kept at unit
//! infinity-norm so the tolerance stays meaningful.

use ndarray::{Array1, Array2};

use crate::lp::{LinearProgram, LpOutcome};
use crate::{Error, Result};

/// Adjacency / tightness tolerance of the double description method.
const DD_TOL: f64 = 1e-8;
/// Homogenization component below which a generator counts as a direction.
const RAY_T_TOL: f64 = 1e-7;
/// Hard cap on the dimension handled by the kernel.
pub const DIMENSION_CAP: usize = 10;
/// Hard cap on the number of generators a conversion may produce.
pub const GENERATOR_CAP: usize = 100_000;

/// `{x : A x <= b}`. Equalities are stored as paired inequalities.
#[derive(Debug, Clone)]
pub struct HPolytope {
    pub a: Array2<f64>,
    pub b: Array1<f64>,
}

impl HPolytope {
    pub fn new(a: Array2<f64>, b: Array1<f64>) -> Self {
        debug_assert_eq!(a.nrows(), b.len());
        HPolytope { a, b }
    }

    pub fn from_rows(dim: usize, rows: &[(Vec<f64>, f64)]) -> Self {
        let mut a = Array2::zeros((rows.len(), dim));
        let mut b = Array1::zeros(rows.len());
        for (i, (coef, rhs)) in rows.iter().enumerate() {
            debug_assert_eq!(coef.len(), dim);
            for (j, v) in coef.iter().enumerate() {
                a[(i, j)] = *v;
            }
            b[i] = *rhs;
        }
        HPolytope { a, b }
    }

    /// The canonical empty polytope `0 . x <= -1`.
    pub fn empty(dim: usize) -> Self {
        HPolytope {
            a: Array2::zeros((1, dim)),
            b: Array1::from_elem(1, -1.0),
        }
    }

    /// An axis-aligned box.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Self {
        let d = lo.len();
        let mut rows = Vec::with_capacity(2 * d);
        for j in 0..d {
            let mut up = vec![0.0; d];
            up[j] = 1.0;
            rows.push((up, hi[j]));
            let mut dn = vec![0.0; d];
            dn[j] = -1.0;
            rows.push((dn, -lo[j]));
        }
        Self::from_rows(d, &rows)
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        debug_assert_eq!(x.len(), self.dim());
        self.a
            .rows()
            .into_iter()
            .zip(&self.b)
            .all(|(row, rhs)| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() <= rhs + tol)
    }

    /// Appends the rows of `other` in place (no pruning).
    pub fn stack(&mut self, other: &HPolytope) {
        debug_assert_eq!(self.dim(), other.dim());
        let mut a = Array2::zeros((self.num_rows() + other.num_rows(), self.dim()));
        let mut b = Array1::zeros(a.nrows());
        for (i, (row, rhs)) in self.a.rows().into_iter().zip(&self.b).enumerate() {
            a.row_mut(i).assign(&row);
            b[i] = *rhs;
        }
        for (i, (row, rhs)) in other.a.rows().into_iter().zip(&other.b).enumerate() {
            a.row_mut(self.num_rows() + i).assign(&row);
            b[self.num_rows() + i] = *rhs;
        }
        self.a = a;
        self.b = b;
    }
}

/// Vertices plus recession directions; the set is `conv(vertices) + cone(rays)`.
#[derive(Debug, Clone, Default)]
pub struct VPolytope {
    pub vertices: Vec<Array1<f64>>,
    pub rays: Vec<Array1<f64>>,
}

impl VPolytope {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vertices
            .first()
            .or(self.rays.first())
            .map_or(0, |v| v.len())
    }
}

/// Fixed-width bitset over processed constraint indices.
#[derive(Clone, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(bits: usize) -> Self {
        BitSet {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    fn is_subset_of(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }
}

struct Ray {
    dir: Vec<f64>,
    tight: BitSet,
}

/// Generators of the cone `{y : M y <= 0}` as a lineality basis plus extreme
/// rays, via incremental double description.
struct ConeGenerators {
    lineality: Vec<Vec<f64>>,
    rays: Vec<Vec<f64>>,
}

fn normalize_inf(v: &mut [f64]) {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m > 0.0 {
        for x in v.iter_mut() {
            *x /= m;
        }
    }
}

fn cone_dd(rows: &[Vec<f64>], dim: usize) -> Result<ConeGenerators> {
    let total = rows.len();
    let mut lineality: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    // Numerical tightness of a direction against the first `upto` rows.
    let tight_set = |dir: &[f64], upto: usize| -> BitSet {
        let mut bs = BitSet::new(total);
        for (i, row) in rows.iter().enumerate().take(upto) {
            let s: f64 = row.iter().zip(dir).map(|(a, b)| a * b).sum();
            if s.abs() <= DD_TOL {
                bs.set(i);
            }
        }
        bs
    };

    for (k, raw_row) in rows.iter().enumerate() {
        let mut row = raw_row.clone();
        normalize_inf(&mut row);
        if row.iter().all(|x| x.abs() < 1e-14) {
            // Trivial 0 <= 0 row: tight everywhere.
            for r in rays.iter_mut() {
                r.tight.set(k);
            }
            continue;
        }
        let dot = |v: &[f64]| -> f64 { row.iter().zip(v).map(|(a, b)| a * b).sum() };

        // Reduce the lineality space first if it meets the hyperplane.
        let pivot = lineality
            .iter()
            .enumerate()
            .map(|(i, l)| (i, dot(l)))
            .filter(|(_, s)| s.abs() > DD_TOL)
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
        if let Some((idx, s0)) = pivot {
            let l0 = lineality.swap_remove(idx);
            for l in lineality.iter_mut() {
                let s = dot(l);
                for (a, b) in l.iter_mut().zip(&l0) {
                    *a -= s / s0 * b;
                }
                normalize_inf(l);
            }
            for r in rays.iter_mut() {
                let s = dot(&r.dir);
                for (a, b) in r.dir.iter_mut().zip(&l0) {
                    *a -= s / s0 * b;
                }
                normalize_inf(&mut r.dir);
                r.tight = tight_set(&r.dir, k + 1);
            }
            let mut fresh: Vec<f64> = l0.iter().map(|x| -x * s0.signum()).collect();
            normalize_inf(&mut fresh);
            let tight = tight_set(&fresh, k + 1);
            rays.push(Ray { dir: fresh, tight });
            continue;
        }

        // Lineality is inside the hyperplane; split the rays.
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (i, r) in rays.iter().enumerate() {
            let s = dot(&r.dir);
            if s > DD_TOL {
                plus.push((i, s));
            } else if s < -DD_TOL {
                minus.push((i, s));
            }
        }
        if plus.is_empty() {
            for r in rays.iter_mut() {
                if dot(&r.dir).abs() <= DD_TOL {
                    r.tight.set(k);
                }
            }
            continue;
        }
        let mut new_rays: Vec<Ray> = Vec::new();
        for (pi, ps) in &plus {
            for (mi, ms) in &minus {
                let common = rays[*pi].tight.and(&rays[*mi].tight);
                let adjacent = !rays.iter().enumerate().any(|(oi, o)| {
                    oi != *pi && oi != *mi && common.is_subset_of(&o.tight)
                });
                if !adjacent {
                    continue;
                }
                let mut dir: Vec<f64> = rays[*pi]
                    .dir
                    .iter()
                    .zip(&rays[*mi].dir)
                    .map(|(p, m)| ps * m - ms * p)
                    .collect();
                normalize_inf(&mut dir);
                if dir.iter().all(|x| x.abs() < 1e-12) {
                    continue;
                }
                let tight = tight_set(&dir, k + 1);
                new_rays.push(Ray { dir, tight });
            }
        }
        let keep: Vec<usize> = (0..rays.len())
            .filter(|i| !plus.iter().any(|(pi, _)| pi == i))
            .collect();
        let mut next: Vec<Ray> = Vec::with_capacity(keep.len() + new_rays.len());
        for i in keep {
            let mut r = Ray {
                dir: std::mem::take(&mut rays[i].dir),
                tight: rays[i].tight.clone(),
            };
            if dot(&r.dir).abs() <= DD_TOL {
                r.tight.set(k);
            }
            next.push(r);
        }
        next.append(&mut new_rays);
        rays = next;
        if rays.len() > GENERATOR_CAP {
            return Err(Error::GeneratorCap(GENERATOR_CAP));
        }
    }

    Ok(ConeGenerators {
        lineality,
        rays: rays.into_iter().map(|r| r.dir).collect(),
    })
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > DIMENSION_CAP {
        return Err(Error::DimensionCap {
            dim: d,
            cap: DIMENSION_CAP,
        });
    }
    Ok(())
}

/// Enumerates the vertices and extreme rays of `{x : Ax <= b}`.
///
/// An empty result (no vertices) means the polytope is empty.
pub fn h_to_v(p: &HPolytope) -> Result<VPolytope> {
    check_dim(p.dim())?;
    let d = p.dim();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(p.num_rows() + 1);
    for (row, rhs) in p.a.rows().into_iter().zip(&p.b) {
        let mut h: Vec<f64> = row.to_vec();
        h.push(-rhs);
        rows.push(h);
    }
    // t >= 0 for the homogenizing coordinate.
    let mut t_row = vec![0.0; d + 1];
    t_row[d] = -1.0;
    rows.push(t_row);

    let gens = cone_dd(&rows, d + 1)?;

    let mut vertices: Vec<Array1<f64>> = Vec::new();
    let mut rays: Vec<Array1<f64>> = Vec::new();
    let push_ray = |dir: &[f64], rays: &mut Vec<Array1<f64>>| {
        let mut v = dir.to_vec();
        normalize_inf(&mut v);
        if v.iter().all(|x| x.abs() < 1e-12) {
            return;
        }
        let cand = Array1::from_vec(v);
        if !rays
            .iter()
            .any(|r| r.iter().zip(&cand).all(|(a, b)| (a - b).abs() <= DD_TOL))
        {
            rays.push(cand);
        }
    };
    for g in &gens.rays {
        let t = g[d];
        if t > RAY_T_TOL {
            let v = Array1::from_iter(g[..d].iter().map(|x| x / t));
            if !vertices
                .iter()
                .any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() <= 1e-8))
            {
                vertices.push(v);
            }
        } else {
            push_ray(&g[..d], &mut rays);
        }
    }
    // Leftover lineality: lines of the polyhedron, emitted as ray pairs.
    for l in &gens.lineality {
        push_ray(&l[..d], &mut rays);
        let neg: Vec<f64> = l[..d].iter().map(|x| -x).collect();
        push_ray(&neg, &mut rays);
    }

    if vertices.is_empty() {
        return Ok(VPolytope::default());
    }
    Ok(VPolytope { vertices, rays })
}

/// Computes an irredundant H-representation of `conv(vertices) + cone(rays)`
/// by enumerating the polar cone of the homogenized generators.
pub fn v_to_h(v: &VPolytope) -> Result<HPolytope> {
    let d = v.dim();
    check_dim(d)?;
    debug_assert!(!v.vertices.is_empty(), "v_to_h needs at least one vertex");
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(v.vertices.len() + v.rays.len());
    for vert in &v.vertices {
        let mut g: Vec<f64> = vert.to_vec();
        g.push(1.0);
        rows.push(g);
    }
    for ray in &v.rays {
        let mut g: Vec<f64> = ray.to_vec();
        g.push(0.0);
        rows.push(g);
    }

    let gens = cone_dd(&rows, d + 1)?;

    // Every generator (a, a0) of the polar cone is a valid inequality
    // a.x <= -a0; lineality directions contribute both signs.
    let mut facets: Vec<(Vec<f64>, f64)> = Vec::new();
    let push_facet = |w: &[f64], facets: &mut Vec<(Vec<f64>, f64)>| {
        let coef = &w[..d];
        let scale = coef.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale < 1e-12 {
            return; // trivial 0 <= c row
        }
        let a: Vec<f64> = coef.iter().map(|x| x / scale).collect();
        let b = -w[d] / scale;
        if !facets.iter().any(|(fa, fb)| {
            (fb - b).abs() <= DD_TOL && fa.iter().zip(&a).all(|(x, y)| (x - y).abs() <= DD_TOL)
        }) {
            facets.push((a, b));
        }
    };
    for w in &gens.rays {
        push_facet(w, &mut facets);
    }
    for l in &gens.lineality {
        push_facet(l, &mut facets);
        let neg: Vec<f64> = l.iter().map(|x| -x).collect();
        push_facet(&neg, &mut facets);
    }

    let p = HPolytope::from_rows(d, &facets);
    prune_redundant(&p)
}

/// H-representation of the convex hull of a union of V-polytopes. Empty
/// parts are skipped; if every part is empty the canonical empty polytope
/// is returned.
pub fn hull_of_union(parts: &[VPolytope]) -> Result<HPolytope> {
    let mut all = VPolytope::default();
    for p in parts {
        if p.is_empty() {
            continue;
        }
        all.vertices.extend(p.vertices.iter().cloned());
        all.rays.extend(p.rays.iter().cloned());
    }
    if all.vertices.is_empty() {
        let dim = parts.first().map_or(1, VPolytope::dim).max(1);
        return Ok(HPolytope::empty(dim));
    }
    v_to_h(&all)
}

/// Intersection by constraint concatenation, followed by redundancy pruning.
pub fn intersect(p: &HPolytope, q: &HPolytope) -> Result<HPolytope> {
    debug_assert_eq!(p.dim(), q.dim());
    let mut stacked = p.clone();
    stacked.stack(q);
    prune_redundant(&stacked)
}

/// Drops rows implied by the remaining ones; one LP per inequality. An
/// infeasible system collapses to the canonical empty polytope.
pub fn prune_redundant(p: &HPolytope) -> Result<HPolytope> {
    let d = p.dim();
    let mut rows: Vec<(Vec<f64>, f64)> = p
        .a
        .rows()
        .into_iter()
        .zip(&p.b)
        .map(|(r, rhs)| (r.to_vec(), *rhs))
        .collect();

    // Bail out early when the system is infeasible.
    let mut feas = LinearProgram::new(d);
    for (coef, rhs) in &rows {
        feas.add_le(coef.clone(), *rhs);
    }
    match crate::lp::solve_lp(&feas)? {
        LpOutcome::Infeasible => return Ok(HPolytope::empty(d)),
        _ => {}
    }

    let mut i = 0;
    while i < rows.len() {
        if rows.len() == 1 {
            break;
        }
        let mut lp = LinearProgram::new(d);
        let c: Vec<f64> = rows[i].0.iter().map(|x| -x).collect();
        lp.set_objective(&c);
        for (j, (coef, rhs)) in rows.iter().enumerate() {
            if j != i {
                lp.add_le(coef.clone(), *rhs);
            }
        }
        let redundant = match crate::lp::solve_lp(&lp)? {
            LpOutcome::Optimal(sol) => -sol.value <= rows[i].1 + FEAS_PRUNE_TOL,
            LpOutcome::Unbounded => false,
            LpOutcome::Infeasible => unreachable!("feasibility was checked above"),
        };
        if redundant {
            rows.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(HPolytope::from_rows(d, &rows))
}

const FEAS_PRUNE_TOL: f64 = 1e-7;
