//! Shape functions, quadrature rules and element facets.
//!
//! Node numbering follows the common convention: corners first, then
//! mid-edge nodes (tri6: 01, 12, 20; tet10: 01, 12, 02, 03, 13, 23;
//! line3: ends, then middle).

use std::collections::HashMap;

use nalgebra::Matrix3;

use crate::error::{FeError, Result};
use crate::mesh::{ElementType, Mesh};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadPoint {
    pub xi: [f64; 3],
    pub weight: f64,
}

fn gauss_1d(n: usize) -> Vec<(f64, f64)> {
    match n {
        1 => vec![(0.0, 2.0)],
        2 => {
            let a = 1.0 / 3f64.sqrt();
            vec![(-a, 1.0), (a, 1.0)]
        }
        3 => {
            let a = (0.6f64).sqrt();
            vec![(-a, 5.0 / 9.0), (0.0, 8.0 / 9.0), (a, 5.0 / 9.0)]
        }
        _ => unreachable!("only 1- to 3-point Gauss rules are used"),
    }
}

/// Quadrature rule of an element type. Quadratic simplices use the
/// 3-point (tri6) and 4-point (tet10) rules.
pub fn quadrature(kind: ElementType) -> Vec<QuadPoint> {
    let qp = |xi: [f64; 3], weight: f64| QuadPoint { xi, weight };
    match kind {
        ElementType::Line2 => gauss_1d(2).into_iter().map(|(x, w)| qp([x, 0.0, 0.0], w)).collect(),
        ElementType::Line3 => gauss_1d(3).into_iter().map(|(x, w)| qp([x, 0.0, 0.0], w)).collect(),
        ElementType::Tri3 => vec![qp([1.0 / 3.0, 1.0 / 3.0, 0.0], 0.5)],
        ElementType::Tri6 => vec![
            qp([1.0 / 6.0, 1.0 / 6.0, 0.0], 1.0 / 6.0),
            qp([2.0 / 3.0, 1.0 / 6.0, 0.0], 1.0 / 6.0),
            qp([1.0 / 6.0, 2.0 / 3.0, 0.0], 1.0 / 6.0),
        ],
        ElementType::Quad4 => {
            let g = gauss_1d(2);
            let mut out = Vec::new();
            for &(y, wy) in &g {
                for &(x, wx) in &g {
                    out.push(qp([x, y, 0.0], wx * wy));
                }
            }
            out
        }
        ElementType::Tet4 => vec![qp([0.25; 3], 1.0 / 6.0)],
        ElementType::Tet10 => {
            let a = 0.585_410_196_624_968_5;
            let b = 0.138_196_601_125_010_5;
            vec![
                qp([b, b, b], 1.0 / 24.0),
                qp([a, b, b], 1.0 / 24.0),
                qp([b, a, b], 1.0 / 24.0),
                qp([b, b, a], 1.0 / 24.0),
            ]
        }
        ElementType::Hex8 => {
            let g = gauss_1d(2);
            let mut out = Vec::new();
            for &(z, wz) in &g {
                for &(y, wy) in &g {
                    for &(x, wx) in &g {
                        out.push(qp([x, y, z], wx * wy * wz));
                    }
                }
            }
            out
        }
    }
}

const TET10_EDGES: [(usize, usize); 6] = [(0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)];

/// Shape function values and parametric derivatives `dN_a/dξ_j`.
pub fn shape(kind: ElementType, xi: [f64; 3]) -> (Vec<f64>, Vec<[f64; 3]>) {
    let [r, s, t] = xi;
    match kind {
        ElementType::Line2 => (
            vec![0.5 * (1.0 - r), 0.5 * (1.0 + r)],
            vec![[-0.5, 0.0, 0.0], [0.5, 0.0, 0.0]],
        ),
        ElementType::Line3 => (
            vec![0.5 * r * (r - 1.0), 0.5 * r * (r + 1.0), 1.0 - r * r],
            vec![[r - 0.5, 0.0, 0.0], [r + 0.5, 0.0, 0.0], [-2.0 * r, 0.0, 0.0]],
        ),
        ElementType::Tri3 => (
            vec![1.0 - r - s, r, s],
            vec![[-1.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        ),
        ElementType::Tri6 => {
            let l = [1.0 - r - s, r, s];
            let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
            let mut n = Vec::with_capacity(6);
            let mut dn = Vec::with_capacity(6);
            for a in 0..3 {
                n.push(l[a] * (2.0 * l[a] - 1.0));
                let f = 4.0 * l[a] - 1.0;
                dn.push([f * dl[a][0], f * dl[a][1], 0.0]);
            }
            for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                n.push(4.0 * l[a] * l[b]);
                dn.push([
                    4.0 * (dl[a][0] * l[b] + l[a] * dl[b][0]),
                    4.0 * (dl[a][1] * l[b] + l[a] * dl[b][1]),
                    0.0,
                ]);
            }
            (n, dn)
        }
        ElementType::Quad4 => {
            let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
            let n = corners
                .iter()
                .map(|&(a, b)| 0.25 * (1.0 + a * r) * (1.0 + b * s))
                .collect();
            let dn = corners
                .iter()
                .map(|&(a, b)| [0.25 * a * (1.0 + b * s), 0.25 * b * (1.0 + a * r), 0.0])
                .collect();
            (n, dn)
        }
        ElementType::Tet4 => (
            vec![1.0 - r - s - t, r, s, t],
            vec![
                [-1.0, -1.0, -1.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
        ),
        ElementType::Tet10 => {
            let l = [1.0 - r - s - t, r, s, t];
            let dl = [
                [-1.0, -1.0, -1.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ];
            let mut n = Vec::with_capacity(10);
            let mut dn = Vec::with_capacity(10);
            for a in 0..4 {
                n.push(l[a] * (2.0 * l[a] - 1.0));
                let f = 4.0 * l[a] - 1.0;
                dn.push(dl[a].map(|d| f * d));
            }
            for (a, b) in TET10_EDGES {
                n.push(4.0 * l[a] * l[b]);
                dn.push(std::array::from_fn(|j| 4.0 * (dl[a][j] * l[b] + l[a] * dl[b][j])));
            }
            (n, dn)
        }
        ElementType::Hex8 => {
            let corners = [
                (-1.0, -1.0, -1.0),
                (1.0, -1.0, -1.0),
                (1.0, 1.0, -1.0),
                (-1.0, 1.0, -1.0),
                (-1.0, -1.0, 1.0),
                (1.0, -1.0, 1.0),
                (1.0, 1.0, 1.0),
                (-1.0, 1.0, 1.0),
            ];
            let n = corners
                .iter()
                .map(|&(a, b, c)| 0.125 * (1.0 + a * r) * (1.0 + b * s) * (1.0 + c * t))
                .collect();
            let dn = corners
                .iter()
                .map(|&(a, b, c)| {
                    [
                        0.125 * a * (1.0 + b * s) * (1.0 + c * t),
                        0.125 * b * (1.0 + a * r) * (1.0 + c * t),
                        0.125 * c * (1.0 + a * r) * (1.0 + b * s),
                    ]
                })
                .collect();
            (n, dn)
        }
    }
}

/// Parametric coordinates of the nodes.
pub fn node_coords(kind: ElementType) -> Vec<[f64; 3]> {
    match kind {
        ElementType::Line2 => vec![[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
        ElementType::Line3 => vec![[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]],
        ElementType::Tri3 => vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        ElementType::Tri6 => vec![
            [0.0; 3],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.5, 0.0, 0.0],
            [0.5, 0.5, 0.0],
            [0.0, 0.5, 0.0],
        ],
        ElementType::Quad4 => vec![
            [-1.0, -1.0, 0.0],
            [1.0, -1.0, 0.0],
            [1.0, 1.0, 0.0],
            [-1.0, 1.0, 0.0],
        ],
        ElementType::Tet4 => vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        ElementType::Tet10 => {
            let mut v = node_coords(ElementType::Tet4);
            for (a, b) in TET10_EDGES {
                let (pa, pb) = (v[a], v[b]);
                v.push(std::array::from_fn(|j| 0.5 * (pa[j] + pb[j])));
            }
            v
        }
        ElementType::Hex8 => vec![
            [-1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0],
            [1.0, 1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
            [1.0, -1.0, 1.0],
            [1.0, 1.0, 1.0],
            [-1.0, 1.0, 1.0],
        ],
    }
}

/// Boundary facets as local node lists, with the facet element type.
pub fn facets(kind: ElementType) -> (Option<ElementType>, &'static [&'static [usize]]) {
    match kind {
        ElementType::Line2 | ElementType::Line3 => (None, &[]),
        ElementType::Tri3 => (Some(ElementType::Line2), &[&[0, 1], &[1, 2], &[2, 0]]),
        ElementType::Tri6 => (
            Some(ElementType::Line3),
            &[&[0, 1, 3], &[1, 2, 4], &[2, 0, 5]],
        ),
        ElementType::Quad4 => (
            Some(ElementType::Line2),
            &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]],
        ),
        ElementType::Tet4 => (
            Some(ElementType::Tri3),
            &[&[0, 1, 2], &[0, 1, 3], &[1, 2, 3], &[0, 2, 3]],
        ),
        ElementType::Tet10 => (
            Some(ElementType::Tri6),
            &[
                &[0, 1, 2, 4, 5, 6],
                &[0, 1, 3, 4, 8, 7],
                &[1, 2, 3, 5, 9, 8],
                &[0, 2, 3, 6, 9, 7],
            ],
        ),
        ElementType::Hex8 => (
            Some(ElementType::Quad4),
            &[
                &[0, 1, 2, 3],
                &[4, 5, 6, 7],
                &[0, 1, 5, 4],
                &[1, 2, 6, 5],
                &[2, 3, 7, 6],
                &[3, 0, 4, 7],
            ],
        ),
    }
}

/// Shape data at one quadrature point in physical coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PointGeometry {
    pub n: Vec<f64>,
    /// `dN_a/dX_i`; components beyond the mesh dimension are zero.
    pub dndx: Vec<[f64; 3]>,
    /// Quadrature weight times Jacobian determinant.
    pub dv: f64,
    pub x: [f64; 3],
}

/// Geometry at every quadrature point of element `e`, rejecting
/// non-positive Jacobians.
pub fn element_geometry(mesh: &Mesh, e: usize) -> Result<Vec<PointGeometry>> {
    let kind = mesh.elements()[e].kind;
    let coords = mesh.element_coords(e);
    let dim = kind.dim();
    quadrature(kind)
        .iter()
        .enumerate()
        .map(|(p, q)| {
            let (n, dn) = shape(kind, q.xi);
            // unused parametric directions are padded with identity
            let mut jac = Matrix3::identity();
            for i in 0..dim {
                for j in 0..dim {
                    jac[(i, j)] = (0..n.len()).map(|a| coords[a][i] * dn[a][j]).sum();
                }
            }
            let det = jac.determinant();
            if !(det > 0.0) {
                return Err(FeError::Jacobian {
                    element: e,
                    point: p,
                    det,
                });
            }
            let inv = jac.try_inverse().ok_or(FeError::Jacobian {
                element: e,
                point: p,
                det,
            })?;
            let dndx = dn
                .iter()
                .map(|d| {
                    let mut g = [0.0; 3];
                    for (i, gi) in g.iter_mut().enumerate().take(dim) {
                        *gi = (0..dim).map(|j| d[j] * inv[(j, i)]).sum();
                    }
                    g
                })
                .collect();
            let x = std::array::from_fn(|i| (0..n.len()).map(|a| n[a] * coords[a][i]).sum());
            Ok(PointGeometry {
                n,
                dndx,
                dv: q.weight * det,
                x,
            })
        })
        .collect()
}

/// Shape values and measure weights (`w · |dA|`) over a facet embedded in
/// physical space. Line facets of planar meshes carry unit thickness.
pub fn facet_points(kind: ElementType, coords: &[[f64; 3]]) -> Vec<(Vec<f64>, f64)> {
    let rule = match kind {
        ElementType::Line2 | ElementType::Line3 => quadrature(kind),
        ElementType::Tri3 | ElementType::Tri6 => quadrature(ElementType::Tri6),
        ElementType::Quad4 => quadrature(ElementType::Quad4),
        _ => unreachable!("facets are lines or surfaces"),
    };
    rule.iter()
        .map(|q| {
            let (n, dn) = shape(kind, q.xi);
            let tangent = |j: usize| -> [f64; 3] {
                std::array::from_fn(|i| (0..n.len()).map(|a| coords[a][i] * dn[a][j]).sum())
            };
            let measure = if kind.dim() == 1 {
                let t = tangent(0);
                (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt()
            } else {
                let (a, b) = (tangent(0), tangent(1));
                let c = [
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ];
                (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
            };
            (n, q.weight * measure)
        })
        .collect()
}

/// A boundary facet: its type and global node list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub kind: ElementType,
    pub nodes: Vec<usize>,
}

/// Boundary facets (shared by exactly one element) whose nodes all belong to
/// `set`, in element order.
pub fn boundary_facets(mesh: &Mesh, set: &[usize]) -> Vec<Facet> {
    let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut all = Vec::new();
    for el in mesh.elements() {
        let (fkind, local) = facets(el.kind);
        let Some(fkind) = fkind else { continue };
        for f in local {
            let nodes: Vec<usize> = f.iter().map(|&a| el.nodes[a]).collect();
            let mut key = nodes.clone();
            key.sort_unstable();
            *count.entry(key.clone()).or_default() += 1;
            all.push((key, Facet { kind: fkind, nodes }));
        }
    }
    let mut member = vec![false; mesh.nodes().len()];
    for &i in set {
        member[i] = true;
    }
    all.into_iter()
        .filter(|(key, f)| count[key] == 1 && f.nodes.iter().all(|&i| member[i]))
        .map(|(_, f)| f)
        .collect()
}
