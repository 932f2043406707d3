//! Prescribed displacements and applied loads with ramp schedules.

use std::collections::BTreeMap;

use constikit::polar::rotation;
use serde::{Deserialize, Serialize};

use crate::element::{boundary_facets, facet_points};
use crate::error::{FeError, Result};
use crate::mesh::Mesh;

/// Time profile of a boundary condition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ramp {
    /// Scales with `t / t_end`.
    #[default]
    Linear,
    /// Full value from the first increment on.
    Constant,
}

impl Ramp {
    pub fn factor(self, t: f64, t_end: f64) -> f64 {
        match self {
            Ramp::Linear => t / t_end,
            Ramp::Constant => 1.0,
        }
    }
}

/// Rigid rotation of a node set about an axis through `center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSpec {
    pub axis: [f64; 3],
    pub center: [f64; 3],
    pub angle_deg: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Target {
    Value(f64),
    /// Component `comp` of the displacement taking the node to its rotated
    /// position; the rotation angle ramps.
    Rotation { rot: usize, comp: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Constraint {
    target: Target,
    ramp: Ramp,
}

/// An applied force distribution at full magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct Load {
    pub base: Vec<f64>,
    pub ramp: Ramp,
}

/// All constraints and loads of a case, resolved to global DOFs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Loading {
    ndim: usize,
    constraints: BTreeMap<usize, Constraint>,
    rotations: Vec<RotationSpec>,
    loads: Vec<Load>,
}

impl Loading {
    pub fn new(ndim: usize) -> Self {
        Self {
            ndim,
            ..Self::default()
        }
    }

    fn insert(&mut self, dof: usize, c: Constraint) -> Result<()> {
        match self.constraints.get(&dof) {
            Some(old) if *old != c => Err(FeError::Case(format!(
                "conflicting constraints on node {} component {}",
                dof / self.ndim,
                dof % self.ndim
            ))),
            _ => {
                self.constraints.insert(dof, c);
                Ok(())
            }
        }
    }

    /// Prescribes component `comp` of every node in `nodes`.
    pub fn fix(&mut self, nodes: &[usize], comp: usize, value: f64, ramp: Ramp) -> Result<()> {
        if comp >= self.ndim {
            return Err(FeError::Case(format!("component {comp} in a {}D model", self.ndim)));
        }
        for &n in nodes {
            self.insert(
                n * self.ndim + comp,
                Constraint {
                    target: Target::Value(value),
                    ramp,
                },
            )?;
        }
        Ok(())
    }

    /// Prescribes every component of `nodes` to follow a rigid rotation.
    pub fn rotate(&mut self, nodes: &[usize], spec: RotationSpec, ramp: Ramp) -> Result<()> {
        if self.ndim != 3 {
            return Err(FeError::Case("rotation boundary conditions need a 3D model".into()));
        }
        let norm = spec.axis.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(FeError::Case("rotation axis must be nonzero".into()));
        }
        self.rotations.push(spec);
        let rot = self.rotations.len() - 1;
        for &n in nodes {
            for comp in 0..3 {
                self.insert(
                    n * 3 + comp,
                    Constraint {
                        target: Target::Rotation { rot, comp },
                        ramp,
                    },
                )?;
            }
        }
        Ok(())
    }

    pub fn add_load(&mut self, load: Load) {
        self.loads.push(load);
    }

    /// Uniform traction (force per reference area, or per length on planar
    /// meshes) over the boundary facets lying in `nodes`.
    pub fn traction(mesh: &Mesh, nodes: &[usize], value: &[f64]) -> Result<Vec<f64>> {
        let d = mesh.dim();
        if value.len() != d {
            return Err(FeError::Case(format!("traction needs {d} components")));
        }
        let facets = boundary_facets(mesh, nodes);
        if facets.is_empty() {
            return Err(FeError::Case("traction set contains no boundary facet".into()));
        }
        let mut f = vec![0.0; mesh.nodes().len() * d];
        for facet in facets {
            let coords: Vec<[f64; 3]> = facet.nodes.iter().map(|&i| mesh.nodes()[i]).collect();
            for (n, w) in facet_points(facet.kind, &coords) {
                for (a, &node) in facet.nodes.iter().enumerate() {
                    for i in 0..d {
                        f[node * d + i] += n[a] * value[i] * w;
                    }
                }
            }
        }
        Ok(f)
    }

    /// The same force vector on every node of `nodes`.
    pub fn nodal_force(mesh: &Mesh, nodes: &[usize], value: &[f64]) -> Result<Vec<f64>> {
        let d = mesh.dim();
        if value.len() != d {
            return Err(FeError::Case(format!("nodal force needs {d} components")));
        }
        let mut f = vec![0.0; mesh.nodes().len() * d];
        for &n in nodes {
            for i in 0..d {
                f[n * d + i] += value[i];
            }
        }
        Ok(f)
    }

    /// Constrained DOFs in ascending order.
    pub fn constrained_dofs(&self) -> Vec<usize> {
        self.constraints.keys().copied().collect()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constraints.contains_key(&dof)
    }

    /// `(dof, value)` of every constraint at time `t`.
    pub fn prescribed(&self, mesh: &Mesh, t: f64, t_end: f64) -> Vec<(usize, f64)> {
        self.constraints
            .iter()
            .map(|(&dof, c)| {
                let s = c.ramp.factor(t, t_end);
                let v = match c.target {
                    Target::Value(v) => s * v,
                    Target::Rotation { rot, comp } => {
                        let spec = &self.rotations[rot];
                        let q = rotation(spec.axis, s * spec.angle_deg.to_radians());
                        let x = mesh.nodes()[dof / 3];
                        let rel = nalgebra::Vector3::new(
                            x[0] - spec.center[0],
                            x[1] - spec.center[1],
                            x[2] - spec.center[2],
                        );
                        let moved = q * rel;
                        moved[comp] - rel[comp]
                    }
                };
                (dof, v)
            })
            .collect()
    }

    /// External force vector at time `t`.
    pub fn external_force(&self, ndof: usize, t: f64, t_end: f64) -> Vec<f64> {
        let mut f = vec![0.0; ndof];
        for load in &self.loads {
            let s = load.ramp.factor(t, t_end);
            for (fi, b) in f.iter_mut().zip(&load.base) {
                *fi += s * b;
            }
        }
        f
    }
}
