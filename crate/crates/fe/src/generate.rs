//! Structured mesh generators for the bundled cases and tests.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{FeError, Result};
use crate::mesh::{Element, ElementType, Mesh};

/// Mesh generator description as it appears in case files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    Rectangle {
        size: [f64; 2],
        divisions: [usize; 2],
        element: ElementType,
    },
    /// Quarter of a plate with a central hole: the hole is centred at the
    /// origin and the plate spans `[0, size[0]] × [0, size[1]]`.
    PlateWithHole {
        size: [f64; 2],
        radius: f64,
        /// Divisions along the hole (even) and across the ligament.
        divisions: [usize; 2],
        #[serde(default = "default_grading")]
        grading: f64,
        element: ElementType,
    },
    Block {
        size: [f64; 3],
        divisions: [usize; 3],
        element: ElementType,
    },
    Bar {
        length: f64,
        divisions: usize,
        element: ElementType,
    },
}

fn default_grading() -> f64 {
    1.5
}

impl Generator {
    pub fn build(&self) -> Result<Mesh> {
        match *self {
            Generator::Rectangle {
                size,
                divisions,
                element,
            } => rectangle(size, divisions, element),
            Generator::PlateWithHole {
                size,
                radius,
                divisions,
                grading,
                element,
            } => plate_with_hole(size, radius, divisions, grading, element),
            Generator::Block {
                size,
                divisions,
                element,
            } => block(size, divisions, element),
            Generator::Bar {
                length,
                divisions,
                element,
            } => bar(length, divisions, element),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(FeError::Mesh(format!("{name} must be positive, got {v}")))
    }
}

fn nonzero(name: &str, n: usize) -> Result<()> {
    if n == 0 {
        Err(FeError::Mesh(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

/// Maps a structured `nu × nv` cell grid on the unit square through `map`.
/// Boundary node sets are named by `names` = [u = 0, u = 1, v = 0, v = 1].
fn structured_2d(
    nu: usize,
    nv: usize,
    kind: ElementType,
    names: [&str; 4],
    map: impl Fn(f64, f64) -> [f64; 2],
) -> Result<Mesh> {
    let order = match kind {
        ElementType::Tri6 => 2,
        ElementType::Tri3 | ElementType::Quad4 => 1,
        _ => return Err(FeError::Mesh(format!("{} is not a planar element", kind.name()))),
    };
    let (gu, gv) = (order * nu + 1, order * nv + 1);
    let id = |i: usize, j: usize| j * gu + i;
    let mut nodes = Vec::with_capacity(gu * gv);
    for j in 0..gv {
        for i in 0..gu {
            let [x, y] = map(i as f64 / (gu - 1) as f64, j as f64 / (gv - 1) as f64);
            nodes.push([x, y, 0.0]);
        }
    }
    let signed_area = |c: &[usize]| {
        let (a, b, d) = (nodes[c[0]], nodes[c[1]], nodes[c[c.len() - 1]]);
        (b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0])
    };
    let mut elements = Vec::new();
    for b in 0..nv {
        for a in 0..nu {
            let p = |di: usize, dj: usize| id(order * a + di, order * b + dj);
            let mut cells: Vec<Vec<usize>> = match kind {
                ElementType::Quad4 => vec![vec![p(0, 0), p(1, 0), p(1, 1), p(0, 1)]],
                ElementType::Tri3 => vec![
                    vec![p(0, 0), p(1, 0), p(1, 1)],
                    vec![p(0, 0), p(1, 1), p(0, 1)],
                ],
                _ => vec![
                    vec![p(0, 0), p(2, 0), p(2, 2), p(1, 0), p(2, 1), p(1, 1)],
                    vec![p(0, 0), p(2, 2), p(0, 2), p(1, 1), p(1, 2), p(0, 1)],
                ],
            };
            for c in &mut cells {
                let corners: Vec<usize> = match kind {
                    ElementType::Quad4 => c.clone(),
                    _ => c[..3].to_vec(),
                };
                if signed_area(&corners) < 0.0 {
                    *c = match kind {
                        ElementType::Quad4 => vec![c[0], c[3], c[2], c[1]],
                        ElementType::Tri3 => vec![c[0], c[2], c[1]],
                        _ => vec![c[0], c[2], c[1], c[5], c[4], c[3]],
                    };
                }
            }
            elements.extend(cells.into_iter().map(|nodes| Element {
                kind,
                nodes,
                tag: 1,
            }));
        }
    }
    let mut sets = BTreeMap::new();
    sets.insert(names[0].to_string(), (0..gv).map(|j| id(0, j)).collect());
    sets.insert(names[1].to_string(), (0..gv).map(|j| id(gu - 1, j)).collect());
    sets.insert(names[2].to_string(), (0..gu).map(|i| id(i, 0)).collect());
    sets.insert(names[3].to_string(), (0..gu).map(|i| id(i, gv - 1)).collect());
    sets.insert("all".to_string(), (0..nodes.len()).collect());
    Mesh::new(2, nodes, elements, sets)
}

/// `[0, lx] × [0, ly]` with sets `left`, `right`, `bottom`, `top`, `origin`
/// and `all`. Triangles split each cell along its rising diagonal.
pub fn rectangle(size: [f64; 2], divisions: [usize; 2], kind: ElementType) -> Result<Mesh> {
    positive("rectangle width", size[0])?;
    positive("rectangle height", size[1])?;
    nonzero("divisions", divisions[0].min(divisions[1]))?;
    let mut mesh = structured_2d(
        divisions[0],
        divisions[1],
        kind,
        ["left", "right", "bottom", "top"],
        |u, v| [u * size[0], v * size[1]],
    )?;
    mesh.insert_set("origin", vec![0])?;
    Ok(mesh)
}

/// Quarter plate with a hole of `radius` at the origin, spanning
/// `[0, w] × [0, h]`. The hole is split at the angle pointing to the far
/// corner so that one half of the hole maps to the right edge and the other
/// half to the top edge. Radial spacing follows `v^grading`.
///
/// Sets: `hole`, `bottom` (y = 0), `left` (x = 0), `right`, `top`, `all`.
pub fn plate_with_hole(
    size: [f64; 2],
    radius: f64,
    divisions: [usize; 2],
    grading: f64,
    kind: ElementType,
) -> Result<Mesh> {
    let [w, h] = size;
    positive("plate width", w)?;
    positive("plate height", h)?;
    positive("hole radius", radius)?;
    positive("grading", grading)?;
    if radius >= w.min(h) {
        return Err(FeError::Mesh("hole radius must be below both plate extents".into()));
    }
    let [na, nr] = divisions;
    if na < 2 || na % 2 != 0 {
        return Err(FeError::Mesh("hole divisions must be even and at least 2".into()));
    }
    nonzero("radial divisions", nr)?;
    let corner = h.atan2(w);
    let map = |u: f64, v: f64| {
        let (theta, outer) = if u <= 0.5 {
            (2.0 * u * corner, [w, 2.0 * u * h])
        } else {
            let s = 2.0 * u - 1.0;
            (corner + s * (FRAC_PI_2 - corner), [w * (1.0 - s), h])
        };
        let inner = [radius * theta.cos(), radius * theta.sin()];
        let g = v.powf(grading);
        [
            (1.0 - g) * inner[0] + g * outer[0],
            (1.0 - g) * inner[1] + g * outer[1],
        ]
    };
    let mut mesh = structured_2d(na, nr, kind, ["bottom", "left", "hole", "outer"], map)?;
    let tol = 1e-9 * w.max(h);
    let right = mesh.nodes_where(|x| (x[0] - w).abs() <= tol);
    let top = mesh.nodes_where(|x| (x[1] - h).abs() <= tol);
    mesh.insert_set("right", right)?;
    mesh.insert_set("top", top)?;
    // exact symmetry lines despite rounding in the mapping
    let mut nodes = mesh.nodes().to_vec();
    for &i in mesh.set("bottom")? {
        nodes[i][1] = 0.0;
    }
    for &i in mesh.set("left")? {
        nodes[i][0] = 0.0;
    }
    Mesh::new(2, nodes, mesh.elements().to_vec(), mesh.sets().clone())
}

const HEX_TETS_EVEN: [[usize; 4]; 5] = [[0, 1, 3, 4], [1, 2, 3, 6], [1, 4, 5, 6], [3, 4, 6, 7], [1, 3, 4, 6]];
const HEX_TETS_ODD: [[usize; 4]; 5] = [[0, 1, 2, 5], [0, 2, 3, 7], [0, 4, 5, 7], [2, 5, 6, 7], [0, 2, 5, 7]];

/// `[0, lx] × [0, ly] × [0, lz]` in hex8, or tetrahedra from the five-tet
/// split with alternating parity (conforming across cells). Sets `xmin`,
/// `xmax`, `ymin`, `ymax`, `zmin`, `zmax` and `all`.
pub fn block(size: [f64; 3], divisions: [usize; 3], kind: ElementType) -> Result<Mesh> {
    for (name, v) in ["lx", "ly", "lz"].iter().zip(size) {
        positive(name, v)?;
    }
    let [nx, ny, nz] = divisions;
    nonzero("divisions", nx.min(ny).min(nz))?;
    let id = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut nodes = Vec::new();
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([
                    size[0] * i as f64 / nx as f64,
                    size[1] * j as f64 / ny as f64,
                    size[2] * k as f64 / nz as f64,
                ]);
            }
        }
    }
    let linear = match kind {
        ElementType::Hex8 => ElementType::Hex8,
        ElementType::Tet4 | ElementType::Tet10 => ElementType::Tet4,
        _ => return Err(FeError::Mesh(format!("{} is not a solid element", kind.name()))),
    };
    let mut elements = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let v = [
                    id(i, j, k),
                    id(i + 1, j, k),
                    id(i + 1, j + 1, k),
                    id(i, j + 1, k),
                    id(i, j, k + 1),
                    id(i + 1, j, k + 1),
                    id(i + 1, j + 1, k + 1),
                    id(i, j + 1, k + 1),
                ];
                if linear == ElementType::Hex8 {
                    elements.push(Element {
                        kind: linear,
                        nodes: v.to_vec(),
                        tag: 1,
                    });
                    continue;
                }
                let split = if (i + j + k) % 2 == 0 {
                    &HEX_TETS_EVEN
                } else {
                    &HEX_TETS_ODD
                };
                for t in split {
                    let mut tet: Vec<usize> = t.iter().map(|&a| v[a]).collect();
                    if tet_volume(&nodes, &tet) < 0.0 {
                        tet.swap(1, 2);
                    }
                    elements.push(Element {
                        kind: linear,
                        nodes: tet,
                        tag: 1,
                    });
                }
            }
        }
    }
    let mut sets = BTreeMap::new();
    for (axis, (lo, hi)) in [("xmin", "xmax"), ("ymin", "ymax"), ("zmin", "zmax")]
        .into_iter()
        .enumerate()
    {
        let tol = 1e-12 * size[axis];
        let pick = |target: f64| -> Vec<usize> {
            (0..nodes.len())
                .filter(|&n| (nodes[n][axis] - target).abs() <= tol)
                .collect()
        };
        sets.insert(lo.to_string(), pick(0.0));
        sets.insert(hi.to_string(), pick(size[axis]));
    }
    sets.insert("all".to_string(), (0..nodes.len()).collect());
    let mesh = Mesh::new(3, nodes, elements, sets)?;
    if kind == ElementType::Tet10 {
        upgrade_to_quadratic(&mesh)
    } else {
        Ok(mesh)
    }
}

fn tet_volume(nodes: &[[f64; 3]], t: &[usize]) -> f64 {
    let d = |a: usize| -> [f64; 3] { std::array::from_fn(|i| nodes[t[a]][i] - nodes[t[0]][i]) };
    let (a, b, c) = (d(1), d(2), d(3));
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// `[0, length]` in a 1D mesh with sets `left` and `right`.
pub fn bar(length: f64, divisions: usize, kind: ElementType) -> Result<Mesh> {
    positive("bar length", length)?;
    nonzero("divisions", divisions)?;
    let nodes: Vec<[f64; 3]> = (0..=divisions)
        .map(|i| [length * i as f64 / divisions as f64, 0.0, 0.0])
        .collect();
    let elements = (0..divisions)
        .map(|i| Element {
            kind: ElementType::Line2,
            nodes: vec![i, i + 1],
            tag: 1,
        })
        .collect();
    let mut sets = BTreeMap::new();
    sets.insert("left".to_string(), vec![0]);
    sets.insert("right".to_string(), vec![divisions]);
    sets.insert("all".to_string(), (0..=divisions).collect());
    let mesh = Mesh::new(1, nodes, elements, sets)?;
    match kind {
        ElementType::Line2 => Ok(mesh),
        ElementType::Line3 => upgrade_to_quadratic(&mesh),
        _ => Err(FeError::Mesh(format!("{} is not a line element", kind.name()))),
    }
}

/// Adds straight-edge midpoint nodes: line2 → line3, tri3 → tri6,
/// tet4 → tet10. A new node joins every set containing both edge ends.
pub fn upgrade_to_quadratic(mesh: &Mesh) -> Result<Mesh> {
    let mut nodes = mesh.nodes().to_vec();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut order = Vec::new();
    let mut elements = Vec::with_capacity(mesh.elements().len());
    for el in mesh.elements() {
        let (kind, edges): (ElementType, &[(usize, usize)]) = match el.kind {
            ElementType::Line2 => (ElementType::Line3, &[(0, 1)]),
            ElementType::Tri3 => (ElementType::Tri6, &[(0, 1), (1, 2), (2, 0)]),
            ElementType::Tet4 => (
                ElementType::Tet10,
                &[(0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)],
            ),
            other => {
                return Err(FeError::Mesh(format!("cannot upgrade {}", other.name())));
            }
        };
        let mut conn = el.nodes.clone();
        for &(a, b) in edges {
            let (p, q) = (el.nodes[a], el.nodes[b]);
            let key = (p.min(q), p.max(q));
            let m = *mid.entry(key).or_insert_with(|| {
                nodes.push(std::array::from_fn(|i| 0.5 * (nodes[p][i] + nodes[q][i])));
                order.push(key);
                nodes.len() - 1
            });
            conn.push(m);
        }
        elements.push(Element {
            kind,
            nodes: conn,
            tag: el.tag,
        });
    }
    let mut sets = mesh.sets().clone();
    for ids in sets.values_mut() {
        let mut member = vec![false; nodes.len()];
        for &i in ids.iter() {
            member[i] = true;
        }
        for (k, &(p, q)) in order.iter().enumerate() {
            if member[p] && member[q] {
                ids.push(mesh.nodes().len() + k);
            }
        }
    }
    Mesh::new(mesh.dim(), nodes, elements, sets)
}
