//! Layered SVG rendering of the relaxation geometry of a two-neuron layer.
//!
//! Pre- and post-activation pairs share the same axes, so the affine image
//! of the input set, its exact ReLU image, the same-slope band, the triangle
//! relaxation, and the joint two-neuron hull can be compared at a glance.
//! The post-activation regions are projected onto the `z` coordinates.

use anyhow::{bail, Context, Result};
use ndarray::Array1;
use relucert::polytope::{h_to_v, v_to_h, HPolytope, VPolytope};
use relucert::propagate::{relu_relaxation, NeuronStatus, RelaxationMode, ReluRelaxation};
use relucert::{joint_relu_hull, Network, UncertaintySet};

const VIEW: f64 = 600.0;
const MARGIN_FRACTION: f64 = 0.05;
/// Boundary samples per polygon edge for the exact ReLU image.
const EDGE_SAMPLES: usize = 32;

struct Group {
    id: &'static str,
    color: &'static str,
    points: Vec<[f64; 2]>,
}

/// Renders the five-region comparison for the first (two-neuron) layer.
pub fn render_layer_one(net: &Network, set: &UncertaintySet) -> Result<String> {
    if net.width(1) != 2 {
        bail!(
            "visualization needs a first layer with exactly 2 neurons, got {}",
            net.width(1)
        );
    }
    let (lo, hi) = set
        .as_box()
        .context("visualization needs an l-inf ball or box input set")?;
    if lo.len() > 16 {
        bail!("input dimension {} too large to enumerate corners", lo.len());
    }

    // Affine image of the input box, as an ordered polygon.
    let images: Vec<[f64; 2]> = (0..1usize << lo.len())
        .map(|mask| {
            let corner: Vec<f64> = (0..lo.len())
                .map(|j| if mask & (1 << j) != 0 { hi[j] } else { lo[j] })
                .collect();
            let y = net.layer(1).affine(&Array1::from_vec(corner));
            [y[0], y[1]]
        })
        .collect();
    let input_poly = convex_hull_2d(&images);

    // Exact interval bounds of the two neurons over the polygon.
    let fold = |d: usize, init: f64, f: fn(f64, f64) -> f64| {
        images.iter().map(|p| p[d]).fold(init, f)
    };
    let l1 = Array1::from_vec(vec![
        fold(0, f64::INFINITY, f64::min),
        fold(1, f64::INFINITY, f64::min),
    ]);
    let u1 = Array1::from_vec(vec![
        fold(0, f64::NEG_INFINITY, f64::max),
        fold(1, f64::NEG_INFINITY, f64::max),
    ]);

    let pre_h = polygon_h(&input_poly)?;
    let rel = relu_relaxation(&l1, &u1, RelaxationMode::SameSlope);
    let band = project_z(&relaxation_region(&pre_h, &rel, true))?;
    let triangle = project_z(&relaxation_region(&pre_h, &rel, false))?;
    let krelu = project_z(&joint_relu_hull(&pre_h)?)?;

    let groups = vec![
        Group {
            id: "snr-band",
            color: "#9467bd",
            points: band,
        },
        Group {
            id: "snr-opt",
            color: "#ff7f0e",
            points: triangle,
        },
        Group {
            id: "input-set",
            color: "#1f77b4",
            points: input_poly.clone(),
        },
        Group {
            id: "krelu-hull",
            color: "#2ca02c",
            points: krelu,
        },
        Group {
            id: "relu-image",
            color: "#d62728",
            points: relu_image_boundary(&input_poly),
        },
    ];
    Ok(render(&groups))
}

/// The region `{(x, z) : x in pre, envelope constraints}` in 4 dimensions;
/// `band` selects the same-slope band, otherwise the triangle.
fn relaxation_region(pre_h: &HPolytope, rel: &ReluRelaxation, band: bool) -> HPolytope {
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (row, rhs) in pre_h.a.rows().into_iter().zip(&pre_h.b) {
        rows.push((vec![row[0], row[1], 0.0, 0.0], *rhs));
    }
    for j in 0..2 {
        let (zc, xc) = (2 + j, j);
        match rel.status[j] {
            NeuronStatus::StableNegative => {
                let mut eq = vec![0.0; 4];
                eq[zc] = 1.0;
                rows.push((eq.clone(), 0.0));
                rows.push((eq.iter().map(|v| -v).collect(), 0.0));
            }
            NeuronStatus::StablePositive => {
                let mut eq = vec![0.0; 4];
                eq[zc] = 1.0;
                eq[xc] = -1.0;
                rows.push((eq.clone(), 0.0));
                rows.push((eq.iter().map(|v| -v).collect(), 0.0));
            }
            NeuronStatus::Unstable => {
                let chord = rel.upper_slope[j];
                let beta = rel.upper_offset[j];
                // z <= chord x + beta
                let mut up = vec![0.0; 4];
                up[zc] = 1.0;
                up[xc] = -chord;
                rows.push((up, beta));
                if band {
                    // z >= chord x
                    let mut dn = vec![0.0; 4];
                    dn[zc] = -1.0;
                    dn[xc] = chord;
                    rows.push((dn, 0.0));
                } else {
                    // z >= 0 and z >= x
                    let mut nz = vec![0.0; 4];
                    nz[zc] = -1.0;
                    rows.push((nz, 0.0));
                    let mut gx = vec![0.0; 4];
                    gx[xc] = 1.0;
                    gx[zc] = -1.0;
                    rows.push((gx, 0.0));
                }
            }
        }
    }
    HPolytope::from_rows(4, &rows)
}

/// Projects a 4-D `(x, z)` polytope onto its `z` coordinates as an ordered
/// polygon (the projection of a polytope is the hull of projected vertices).
fn project_z(region: &HPolytope) -> Result<Vec<[f64; 2]>> {
    let v = h_to_v(region)?;
    let pts: Vec<[f64; 2]> = v.vertices.iter().map(|p| [p[2], p[3]]).collect();
    Ok(convex_hull_2d(&pts))
}

fn polygon_h(poly: &[[f64; 2]]) -> Result<HPolytope> {
    let v = VPolytope {
        vertices: poly
            .iter()
            .map(|p| Array1::from_vec(vec![p[0], p[1]]))
            .collect(),
        rays: vec![],
    };
    Ok(v_to_h(&v)?)
}

/// Ordered convex hull by monotone chain; degenerate inputs collapse to the
/// distinct points (a single point or a segment).
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 1e-12 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 1e-12 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 2 {
        // fully collinear; keep the extremes
        return vec![pts[0], pts[pts.len() - 1]];
    }
    lower
}

/// The boundary cycle of the polygon mapped elementwise through the ReLU;
/// a closed (possibly non-convex) curve bounding the exact image.
fn relu_image_boundary(poly: &[[f64; 2]]) -> Vec<[f64; 2]> {
    if poly.len() <= 1 {
        return poly.iter().map(|p| [p[0].max(0.0), p[1].max(0.0)]).collect();
    }
    let mut out = Vec::with_capacity(poly.len() * EDGE_SAMPLES);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        for s in 0..EDGE_SAMPLES {
            let t = s as f64 / EDGE_SAMPLES as f64;
            let x = a[0] + t * (b[0] - a[0]);
            let y = a[1] + t * (b[1] - a[1]);
            out.push([x.max(0.0), y.max(0.0)]);
        }
    }
    out.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    out
}

fn render(groups: &[Group]) -> String {
    // Common data-to-viewport transform over every drawn point.
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for g in groups {
        for p in &g.points {
            for d in 0..2 {
                min[d] = min[d].min(p[d]);
                max[d] = max[d].max(p[d]);
            }
        }
    }
    let span = (max[0] - min[0]).max(max[1] - min[1]).max(1e-9);
    let margin = VIEW * MARGIN_FRACTION;
    let scale = (VIEW - 2.0 * margin) / span;
    let center = [(min[0] + max[0]) / 2.0, (min[1] + max[1]) / 2.0];
    let tx = |p: &[f64; 2]| -> [f64; 2] {
        [
            VIEW / 2.0 + (p[0] - center[0]) * scale,
            VIEW / 2.0 - (p[1] - center[1]) * scale,
        ]
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {VIEW} {VIEW}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // Axes through the data origin when it is in frame.
    let origin = tx(&[0.0, 0.0]);
    if (0.0..=VIEW).contains(&origin[0]) {
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"0\" x2=\"{:.2}\" y2=\"{VIEW}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
            origin[0], origin[0]
        ));
    }
    if (0.0..=VIEW).contains(&origin[1]) {
        svg.push_str(&format!(
            "<line x1=\"0\" y1=\"{:.2}\" x2=\"{VIEW}\" y2=\"{:.2}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
            origin[1], origin[1]
        ));
    }
    for g in groups {
        svg.push_str(&format!(
            "<g id=\"{}\" fill=\"{}\" fill-opacity=\"0.3\" stroke=\"{}\" stroke-width=\"1.5\">\n",
            g.id, g.color, g.color
        ));
        let spread = g
            .points
            .iter()
            .map(|p| (p[0] - g.points[0][0]).abs().max((p[1] - g.points[0][1]).abs()))
            .fold(0.0f64, f64::max);
        if g.points.is_empty() {
            // nothing to draw
        } else if spread < 1e-9 {
            let p = tx(&g.points[0]);
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\"/>\n",
                p[0], p[1]
            ));
        } else {
            let pts: Vec<String> = g
                .points
                .iter()
                .map(|p| {
                    let q = tx(p);
                    format!("{:.2},{:.2}", q[0], q[1])
                })
                .collect();
            svg.push_str(&format!("<polygon points=\"{}\"/>\n", pts.join(" ")));
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    svg
}
