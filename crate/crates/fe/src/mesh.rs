//! Meshes and their plain-text file format.
//!
//! ```text
//! # comments start with '#'
//! dim 2
//! nodes 4
//! 0.0 0.0
//! 1.0 0.0
//! 1.0 1.0
//! 0.0 1.0
//! elements quad4 1
//! 1  0 1 2 3
//! set left 2
//! 0 3
//! ```
//!
//! `nodes N` is followed by `N` coordinate lines of `dim` numbers.
//! `elements TYPE N` is followed by `N` lines `tag n0 n1 …`; several element
//! blocks may appear. `set NAME N` is followed by `N` node indices spread over
//! any number of lines. Node indices are zero-based.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::element::element_geometry;
use crate::error::{FeError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementType {
    Line2,
    Line3,
    Tri3,
    Tri6,
    Quad4,
    Tet4,
    Tet10,
    Hex8,
}

impl ElementType {
    pub const ALL: [ElementType; 8] = [
        ElementType::Line2,
        ElementType::Line3,
        ElementType::Tri3,
        ElementType::Tri6,
        ElementType::Quad4,
        ElementType::Tet4,
        ElementType::Tet10,
        ElementType::Hex8,
    ];

    pub fn node_count(self) -> usize {
        match self {
            ElementType::Line2 => 2,
            ElementType::Line3 => 3,
            ElementType::Tri3 => 3,
            ElementType::Tri6 => 6,
            ElementType::Quad4 => 4,
            ElementType::Tet4 => 4,
            ElementType::Tet10 => 10,
            ElementType::Hex8 => 8,
        }
    }

    /// Parametric dimension.
    pub fn dim(self) -> usize {
        match self {
            ElementType::Line2 | ElementType::Line3 => 1,
            ElementType::Tri3 | ElementType::Tri6 | ElementType::Quad4 => 2,
            ElementType::Tet4 | ElementType::Tet10 | ElementType::Hex8 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementType::Line2 => "line2",
            ElementType::Line3 => "line3",
            ElementType::Tri3 => "tri3",
            ElementType::Tri6 => "tri6",
            ElementType::Quad4 => "quad4",
            ElementType::Tet4 => "tet4",
            ElementType::Tet10 => "tet10",
            ElementType::Hex8 => "hex8",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub kind: ElementType,
    pub nodes: Vec<usize>,
    /// Domain tag used for material assignment.
    pub tag: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    dim: usize,
    nodes: Vec<[f64; 3]>,
    elements: Vec<Element>,
    sets: BTreeMap<String, Vec<usize>>,
}

impl Mesh {
    /// Builds a mesh after checking connectivity, set indices and the
    /// Jacobian at every quadrature point.
    pub fn new(
        dim: usize,
        nodes: Vec<[f64; 3]>,
        elements: Vec<Element>,
        sets: BTreeMap<String, Vec<usize>>,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(FeError::Mesh(format!("dimension {dim} not in 1..=3")));
        }
        if elements.is_empty() {
            return Err(FeError::Mesh("no elements".into()));
        }
        let n = nodes.len();
        if nodes.iter().any(|x| x.iter().any(|c| !c.is_finite())) {
            return Err(FeError::Mesh("non-finite node coordinate".into()));
        }
        for (e, el) in elements.iter().enumerate() {
            if el.kind.dim() != dim {
                return Err(FeError::Mesh(format!(
                    "element {e} is {} in a {dim}D mesh",
                    el.kind.name()
                )));
            }
            if el.nodes.len() != el.kind.node_count() {
                return Err(FeError::Mesh(format!(
                    "element {e} ({}) has {} nodes",
                    el.kind.name(),
                    el.nodes.len()
                )));
            }
            if let Some(&bad) = el.nodes.iter().find(|&&i| i >= n) {
                return Err(FeError::Mesh(format!("element {e} references node {bad} of {n}")));
            }
        }
        for (name, ids) in &sets {
            if let Some(&bad) = ids.iter().find(|&&i| i >= n) {
                return Err(FeError::Mesh(format!("set `{name}` references node {bad} of {n}")));
            }
        }
        let mesh = Self {
            dim,
            nodes,
            elements,
            sets,
        };
        for e in 0..mesh.elements.len() {
            element_geometry(&mesh, e)?;
        }
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn sets(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.sets
    }

    pub fn set(&self, name: &str) -> Result<&[usize]> {
        self.sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| FeError::Case(format!("unknown node set `{name}`")))
    }

    pub fn element_coords(&self, e: usize) -> Vec<[f64; 3]> {
        self.elements[e].nodes.iter().map(|&i| self.nodes[i]).collect()
    }

    /// Distinct domain tags in ascending order.
    pub fn tags(&self) -> Vec<u32> {
        let mut t: Vec<u32> = self.elements.iter().map(|e| e.tag).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    pub fn set_tag(&mut self, e: usize, tag: u32) {
        self.elements[e].tag = tag;
    }

    pub fn insert_set(&mut self, name: &str, nodes: Vec<usize>) -> Result<()> {
        if let Some(&bad) = nodes.iter().find(|&&i| i >= self.nodes.len()) {
            return Err(FeError::Mesh(format!("set `{name}` references node {bad}")));
        }
        self.sets.insert(name.to_string(), nodes);
        Ok(())
    }

    /// Indices of the nodes whose coordinates satisfy `pred`.
    pub fn nodes_where(&self, mut pred: impl FnMut(&[f64; 3]) -> bool) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| pred(&self.nodes[i])).collect()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|(line, msg)| FeError::MeshFile {
            path: path.to_path_buf(),
            line,
            msg,
        })
    }

    /// Parses the text format; errors carry the 1-based line number.
    pub fn parse(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .peekable();
        let mut dim = None;
        let mut nodes = Vec::new();
        let mut elements = Vec::new();
        let mut sets = BTreeMap::new();
        let mut last_line = 0;

        fn num<T: std::str::FromStr>(tok: &str, line: usize) -> std::result::Result<T, (usize, String)> {
            tok.parse().map_err(|_| (line, format!("cannot parse `{tok}`")))
        }

        while let Some((line, l)) = lines.next() {
            last_line = line;
            let toks: Vec<&str> = l.split_whitespace().collect();
            match toks.as_slice() {
                ["dim", d] => dim = Some(num::<usize>(d, line)?),
                ["nodes", n] => {
                    let d = dim.ok_or((line, "`dim` must precede `nodes`".to_string()))?;
                    for _ in 0..num::<usize>(n, line)? {
                        let (ln, l) = lines.next().ok_or((line, "missing node lines".to_string()))?;
                        let vals: Vec<&str> = l.split_whitespace().collect();
                        if vals.len() != d {
                            return Err((ln, format!("expected {d} coordinates")));
                        }
                        let mut x = [0.0; 3];
                        for (k, v) in vals.iter().enumerate() {
                            x[k] = num(v, ln)?;
                        }
                        nodes.push(x);
                    }
                }
                ["elements", kind, n] => {
                    let kind = ElementType::parse(kind)
                        .ok_or((line, format!("unknown element type `{kind}`")))?;
                    for _ in 0..num::<usize>(n, line)? {
                        let (ln, l) = lines.next().ok_or((line, "missing element lines".to_string()))?;
                        let vals: Vec<&str> = l.split_whitespace().collect();
                        if vals.len() != kind.node_count() + 1 {
                            return Err((ln, format!("expected tag and {} nodes", kind.node_count())));
                        }
                        let tag = num(vals[0], ln)?;
                        let ids = vals[1..].iter().map(|v| num(v, ln)).collect::<std::result::Result<_, _>>()?;
                        elements.push(Element { kind, nodes: ids, tag });
                    }
                }
                ["set", name, n] => {
                    let n: usize = num(n, line)?;
                    let mut ids = Vec::with_capacity(n);
                    while ids.len() < n {
                        let (ln, l) = lines.next().ok_or((line, "missing set entries".to_string()))?;
                        for v in l.split_whitespace() {
                            ids.push(num(v, ln)?);
                        }
                    }
                    if ids.len() != n {
                        return Err((line, format!("set `{name}` has {} entries, declared {n}", ids.len())));
                    }
                    sets.insert(name.to_string(), ids);
                }
                _ => return Err((line, format!("unexpected line `{l}`"))),
            }
        }
        let dim = dim.ok_or((last_line, "missing `dim`".to_string()))?;
        Self::new(dim, nodes, elements, sets).map_err(|e| (last_line, e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "dim {}", self.dim).unwrap();
        writeln!(out, "nodes {}", self.nodes.len()).unwrap();
        for x in &self.nodes {
            let coords: Vec<String> = x[..self.dim].iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", coords.join(" ")).unwrap();
        }
        let mut start = 0;
        while start < self.elements.len() {
            let kind = self.elements[start].kind;
            let end = self.elements[start..]
                .iter()
                .position(|e| e.kind != kind)
                .map_or(self.elements.len(), |p| start + p);
            writeln!(out, "elements {} {}", kind.name(), end - start).unwrap();
            for el in &self.elements[start..end] {
                let ids: Vec<String> = el.nodes.iter().map(ToString::to_string).collect();
                writeln!(out, "{} {}", el.tag, ids.join(" ")).unwrap();
            }
            start = end;
        }
        for (name, ids) in &self.sets {
            writeln!(out, "set {name} {}", ids.len()).unwrap();
            for chunk in ids.chunks(16) {
                let ids: Vec<String> = chunk.iter().map(ToString::to_string).collect();
                writeln!(out, "{}", ids.join(" ")).unwrap();
            }
        }
        out
    }
}
