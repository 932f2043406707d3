//! Discretized solid: mesh, material per element, integration-point state
//! and element assembly around [`constikit::bridge::eval`].

use std::sync::Arc;

use constikit::bridge::eval;
use constikit::tensor::pair_index;
use constikit::{HostRequest, HostStrain, Kinematics, Material, Matrix6, Regime, StateLayout, Tensor2};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use constikit::materials::J2_NSTATV;

use crate::element::{element_geometry, node_coords, quadrature, PointGeometry};
use crate::error::{FeError, Result};
use crate::mesh::{ElementType, Mesh};

/// Kinematic idealization of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    PlaneStress,
    PlaneStrain,
    Solid,
}

/// Committed data of one integration point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointState {
    /// Bridge state vector.
    pub state: Vec<f64>,
    /// Deformation gradient at the end of the last converged increment.
    pub f: Tensor2,
}

/// In-plane rows of the host-order strain vector (xx, yy, xy).
const PLANAR_ROWS: [usize; 3] = [0, 1, 5];
/// Slot of ε_zz inside the small-strain bridge state.
const STATE_EZZ: usize = 9;
const PLANE_STRESS_MAX_ITER: usize = 25;
const PLANE_STRESS_TOL: f64 = 1e-8;
/// User-state slot of the accumulated slip of `crystal-fcc`, after F^p and
/// the twelve critical stresses.
const CRYSTAL_GAMMA_ACC: usize = 21;

/// Element residual contribution, tangent and trial states.
#[derive(Clone, Debug)]
pub struct ElementResponse {
    /// Global DOF of each local row.
    pub dofs: Vec<usize>,
    pub f_int: Vec<f64>,
    pub k: DMatrix<f64>,
    pub states: Vec<PointState>,
}

pub struct Model {
    mesh: Mesh,
    analysis: Analysis,
    regime: Regime,
    materials: Vec<Arc<dyn Material>>,
    geometry: Vec<Vec<PointGeometry>>,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("analysis", &self.analysis)
            .field("regime", &self.regime)
            .field("elements", &self.mesh.elements().len())
            .finish_non_exhaustive()
    }
}

impl Model {
    /// `materials[e]` is the model of element `e`.
    pub fn new(mesh: Mesh, analysis: Analysis, materials: Vec<Arc<dyn Material>>) -> Result<Self> {
        match (mesh.dim(), analysis) {
            (2, Analysis::PlaneStress | Analysis::PlaneStrain) | (3, Analysis::Solid) => {}
            (d, a) => {
                return Err(FeError::Case(format!("{a:?} analysis on a {d}D mesh")));
            }
        }
        if materials.len() != mesh.elements().len() {
            return Err(FeError::Case(format!(
                "{} materials for {} elements",
                materials.len(),
                mesh.elements().len()
            )));
        }
        let regime = materials[0].regime();
        if let Some(m) = materials.iter().find(|m| m.regime() != regime) {
            return Err(FeError::Case(format!(
                "material `{}` is {} but `{}` is {regime}",
                m.name(),
                m.regime(),
                materials[0].name()
            )));
        }
        if regime == Regime::FiniteStrain && analysis == Analysis::PlaneStress {
            return Err(FeError::Case("plane stress is only available at small strain".into()));
        }
        let geometry = (0..mesh.elements().len())
            .map(|e| element_geometry(&mesh, e))
            .collect::<Result<_>>()?;
        Ok(Self {
            mesh,
            analysis,
            regime,
            materials,
            geometry,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn analysis(&self) -> Analysis {
        self.analysis
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn material(&self, e: usize) -> &dyn Material {
        self.materials[e].as_ref()
    }

    pub fn geometry(&self, e: usize) -> &[PointGeometry] {
        &self.geometry[e]
    }

    /// Displacement components per node.
    pub fn ndim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn ndof(&self) -> usize {
        self.mesh.nodes().len() * self.ndim()
    }

    pub fn element_dofs(&self, e: usize) -> Vec<usize> {
        let d = self.ndim();
        self.mesh.elements()[e]
            .nodes
            .iter()
            .flat_map(|&n| (0..d).map(move |i| n * d + i))
            .collect()
    }

    /// Fresh states for every integration point.
    pub fn initial_states(&self) -> Result<Vec<Vec<PointState>>> {
        (0..self.mesh.elements().len())
            .map(|e| {
                let m = self.material(e);
                let s = StateLayout::for_material(m).initial(&m.initial_state())?;
                Ok(vec![
                    PointState {
                        state: s,
                        f: Tensor2::identity(),
                    };
                    self.geometry[e].len()
                ])
            })
            .collect()
    }

    /// Displacement gradient `∂u_i/∂X_j` at a point.
    pub fn displacement_gradient(&self, g: &PointGeometry, ue: &[f64]) -> Tensor2 {
        let d = self.ndim();
        let mut h = Tensor2::zeros();
        for (a, dn) in g.dndx.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    h[(i, j)] += ue[a * d + i] * dn[j];
                }
            }
        }
        h
    }

    /// Internal force, tangent and trial states of element `e` at the
    /// global displacement `u`.
    pub fn element_response(
        &self,
        e: usize,
        u: &[f64],
        committed: &[PointState],
        dt: f64,
    ) -> Result<ElementResponse> {
        let dofs = self.element_dofs(e);
        let ue: Vec<f64> = dofs.iter().map(|&i| u[i]).collect();
        let n = dofs.len();
        let mut f_int = vec![0.0; n];
        let mut k = DMatrix::zeros(n, n);
        let mut states = Vec::with_capacity(committed.len());
        for (p, (g, old)) in self.geometry[e].iter().zip(committed).enumerate() {
            let h = self.displacement_gradient(g, &ue);
            let wrap = |source| FeError::Material {
                element: e,
                point: p,
                source,
            };
            let new = match self.regime {
                Regime::SmallStrain => self.small_strain_point(e, g, &h, old, dt, &mut f_int, &mut k),
                Regime::FiniteStrain => self.finite_strain_point(e, g, &h, old, dt, &mut f_int, &mut k),
            }
            .map_err(wrap)?;
            states.push(new);
        }
        Ok(ElementResponse {
            dofs,
            f_int,
            k,
            states,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn small_strain_point(
        &self,
        e: usize,
        g: &PointGeometry,
        h: &Tensor2,
        old: &PointState,
        dt: f64,
        f_int: &mut [f64],
        k: &mut DMatrix<f64>,
    ) -> constikit::Result<PointState> {
        let m = self.material(e);
        let eps = (h + h.transpose()) * 0.5;
        let mut strain = [
            eps[(0, 0)],
            eps[(1, 1)],
            eps[(2, 2)],
            eps[(1, 2)],
            eps[(0, 2)],
            eps[(0, 1)],
        ];
        let run = |strain: [f64; 6]| {
            eval(
                &HostRequest {
                    kinematics: Kinematics::SmallStrain {
                        strain_total: HostStrain::new(strain),
                    },
                    par: m.props().to_vec(),
                    delta: dt,
                    state_in: old.state.clone(),
                },
                m,
            )
        };
        let (res, d): (_, Matrix6) = if self.analysis == Analysis::PlaneStress {
            strain[2] = old.state[STATE_EZZ];
            let mut converged = None;
            for _ in 0..PLANE_STRESS_MAX_ITER {
                let res = run(strain)?;
                let d = *res.small_tangent().expect("small-strain response");
                let s = res.s.components();
                let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
                if s[2].abs() <= PLANE_STRESS_TOL * norm {
                    converged = Some((res, d));
                    break;
                }
                strain[2] -= s[2] / d[(2, 2)];
            }
            let (res, d) = converged.ok_or_else(|| constikit::Error::Material {
                material: m.name().to_string(),
                reason: "plane-stress condensation did not converge".into(),
            })?;
            let mut dc = d;
            for a in PLANAR_ROWS {
                for b in PLANAR_ROWS {
                    dc[(a, b)] = d[(a, b)] - d[(a, 2)] * d[(2, b)] / d[(2, 2)];
                }
            }
            (res, dc)
        } else {
            let res = run(strain)?;
            let d = *res.small_tangent().expect("small-strain response");
            (res, d)
        };

        let rows: &[usize] = if self.ndim() == 2 {
            &PLANAR_ROWS
        } else {
            &[0, 1, 2, 3, 4, 5]
        };
        let b = b_matrix(&g.dndx, self.ndim(), rows);
        let s = res.s.components();
        let nd = b.ncols();
        for c in 0..nd {
            f_int[c] += rows.iter().enumerate().map(|(r, &row)| b[(r, c)] * s[row]).sum::<f64>() * g.dv;
        }
        let dr = DMatrix::from_fn(rows.len(), rows.len(), |i, j| d[(rows[i], rows[j])]);
        *k += b.transpose() * dr * &b * g.dv;
        Ok(PointState {
            state: res.state_out,
            f: Tensor2::identity() + h,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn finite_strain_point(
        &self,
        e: usize,
        g: &PointGeometry,
        h: &Tensor2,
        old: &PointState,
        dt: f64,
        f_int: &mut [f64],
        k: &mut DMatrix<f64>,
    ) -> constikit::Result<PointState> {
        let m = self.material(e);
        let f = Tensor2::identity() + h;
        let res = eval(
            &HostRequest {
                kinematics: Kinematics::FiniteStrain {
                    f_old: old.f,
                    f_new: f,
                },
                par: m.props().to_vec(),
                delta: dt,
                state_in: old.state.clone(),
            },
            m,
        )?;
        let s = res.s.to_tensor();
        let dsdf = res.finite_tangent().expect("finite-strain response");
        let p = f * s;
        let d = self.ndim();
        let nn = g.dndx.len();
        for a in 0..nn {
            for i in 0..d {
                f_int[a * d + i] += (0..d).map(|jj| p[(i, jj)] * g.dndx[a][jj]).sum::<f64>() * g.dv;
            }
        }
        // A_iJkL = δ_ik S_LJ + F_iM K_MJkL
        let mut fk = [[0.0; 9]; 9];
        for i in 0..3 {
            for jj in 0..3 {
                for kl in 0..9 {
                    fk[pair_index(i, jj)][kl] = (0..3).map(|mm| f[(i, mm)] * dsdf[(pair_index(mm, jj), kl)]).sum();
                }
            }
        }
        let a_mod = |i: usize, jj: usize, kk: usize, ll: usize| {
            let geo = if i == kk { s[(ll, jj)] } else { 0.0 };
            geo + fk[pair_index(i, jj)][pair_index(kk, ll)]
        };
        // G[a][i][k][L] = Σ_J dN_a/dX_J A_iJkL
        let mut gmat = vec![0.0; nn * d * d * d];
        let gi = |a: usize, i: usize, kk: usize, ll: usize| ((a * d + i) * d + kk) * d + ll;
        for a in 0..nn {
            for i in 0..d {
                for kk in 0..d {
                    for ll in 0..d {
                        gmat[gi(a, i, kk, ll)] = (0..d).map(|jj| g.dndx[a][jj] * a_mod(i, jj, kk, ll)).sum();
                    }
                }
            }
        }
        for a in 0..nn {
            for i in 0..d {
                for b in 0..nn {
                    for kk in 0..d {
                        let v: f64 = (0..d).map(|ll| gmat[gi(a, i, kk, ll)] * g.dndx[b][ll]).sum();
                        k[(a * d + i, b * d + kk)] += v * g.dv;
                    }
                }
            }
        }
        Ok(PointState {
            state: res.state_out,
            f,
        })
    }

    /// Evaluates every element (in parallel) and returns the responses in
    /// element order together with the global internal force vector.
    pub fn assemble(
        &self,
        u: &[f64],
        committed: &[Vec<PointState>],
        dt: f64,
    ) -> Result<(Vec<f64>, Vec<ElementResponse>)> {
        let responses: Vec<ElementResponse> = (0..self.mesh.elements().len())
            .into_par_iter()
            .map(|e| self.element_response(e, u, &committed[e], dt))
            .collect::<Result<_>>()?;
        let mut f_int = vec![0.0; self.ndof()];
        for r in &responses {
            for (a, &dof) in r.dofs.iter().enumerate() {
                f_int[dof] += r.f_int[a];
            }
        }
        Ok((f_int, responses))
    }

    /// Accumulated plastic strain measure of a committed state: equivalent
    /// plastic strain for J2, summed slip magnitude for crystals, zero for
    /// elastic and plugin models.
    pub fn plastic_strain(&self, e: usize, state: &PointState) -> f64 {
        let m = self.material(e);
        let header = StateLayout::for_material(m).header_len();
        let slot = match m.name() {
            "j2-plasticity" => J2_NSTATV - 1,
            "crystal-fcc" => CRYSTAL_GAMMA_ACC,
            _ => return 0.0,
        };
        state.state[header + slot]
    }

    /// Reference-volume average of the stored Cauchy stress.
    pub fn average_cauchy(&self, states: &[Vec<PointState>]) -> [f64; 6] {
        let mut sum = [0.0; 6];
        let mut vol = 0.0;
        for (e, pts) in states.iter().enumerate() {
            for (g, st) in self.geometry[e].iter().zip(pts) {
                let s = Self::cauchy(st);
                for i in 0..6 {
                    sum[i] += g.dv * s[i];
                }
                vol += g.dv;
            }
        }
        sum.map(|v| v / vol)
    }

    /// Reference-volume average of the displacement gradient.
    pub fn average_gradient(&self, u: &[f64]) -> Tensor2 {
        let mut sum = Tensor2::zeros();
        let mut vol = 0.0;
        for e in 0..self.mesh.elements().len() {
            let ue: Vec<f64> = self.element_dofs(e).iter().map(|&i| u[i]).collect();
            for g in &self.geometry[e] {
                sum += self.displacement_gradient(g, &ue) * g.dv;
                vol += g.dv;
            }
        }
        sum / vol
    }

    /// Cauchy stress (UMAT slot order) stored in a committed state.
    pub fn cauchy(state: &PointState) -> [f64; 6] {
        let mut s = [0.0; 6];
        s.copy_from_slice(&state.state[1..7]);
        s
    }
}

/// Strain–displacement matrix with host-order rows and engineering shear.
pub fn b_matrix(dndx: &[[f64; 3]], d: usize, rows: &[usize]) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(rows.len(), dndx.len() * d);
    for (a, g) in dndx.iter().enumerate() {
        let full = [
            [g[0], 0.0, 0.0],
            [0.0, g[1], 0.0],
            [0.0, 0.0, g[2]],
            [0.0, g[2], g[1]],
            [g[2], 0.0, g[0]],
            [g[1], g[0], 0.0],
        ];
        for (r, &row) in rows.iter().enumerate() {
            for i in 0..d {
                b[(r, a * d + i)] = full[row][i];
            }
        }
    }
    b
}

/// Volume-weighted average of element means of per-point scalars onto nodes.
pub fn nodal_average(model: &Model, values: &[Vec<f64>]) -> Vec<f64> {
    let n = model.mesh().nodes().len();
    let mut sum = vec![0.0; n];
    let mut weight = vec![0.0; n];
    for (e, el) in model.mesh().elements().iter().enumerate() {
        let geo = model.geometry(e);
        let vol: f64 = geo.iter().map(|g| g.dv).sum();
        let mean: f64 = geo.iter().zip(&values[e]).map(|(g, v)| g.dv * v).sum::<f64>() / vol;
        for &node in &el.nodes {
            sum[node] += vol * mean;
            weight[node] += vol;
        }
    }
    sum.iter().zip(&weight).map(|(s, w)| if *w > 0.0 { s / w } else { 0.0 }).collect()
}

fn recovery_basis(kind: ElementType, xi: [f64; 3]) -> Vec<f64> {
    let [r, s, t] = xi;
    match kind {
        ElementType::Tri6 => vec![1.0, r, s],
        ElementType::Quad4 => vec![1.0, r, s, r * s],
        ElementType::Tet10 => vec![1.0, r, s, t],
        ElementType::Hex8 => vec![1.0, r, s, t, r * s, s * t, r * t, r * s * t],
        ElementType::Line2 => vec![1.0, r],
        ElementType::Line3 => vec![1.0, r, r * r],
        ElementType::Tri3 | ElementType::Tet4 => vec![1.0],
    }
}

/// Extrapolates per-point scalars of every element to its nodes with a
/// polynomial fitted through the quadrature points, then averages the
/// element contributions at shared nodes.
pub fn nodal_extrapolate(model: &Model, values: &[Vec<f64>]) -> Vec<f64> {
    let n = model.mesh().nodes().len();
    let mut sum = vec![0.0; n];
    let mut count = vec![0.0; n];
    for (e, el) in model.mesh().elements().iter().enumerate() {
        let rule = quadrature(el.kind);
        let basis: Vec<Vec<f64>> = rule.iter().map(|q| recovery_basis(el.kind, q.xi)).collect();
        let nb = basis[0].len();
        let p = DMatrix::from_fn(rule.len(), nb, |i, j| basis[i][j]);
        let v = nalgebra::DVector::from_column_slice(&values[e]);
        let coef = (p.transpose() * &p)
            .lu()
            .solve(&(p.transpose() * v))
            .expect("recovery basis is unisolvent on the quadrature points");
        for (a, xi) in node_coords(el.kind).into_iter().enumerate() {
            let b = recovery_basis(el.kind, xi);
            let val: f64 = (0..nb).map(|j| b[j] * coef[j]).sum();
            sum[el.nodes[a]] += val;
            count[el.nodes[a]] += 1.0;
        }
    }
    sum.iter().zip(&count).map(|(s, c)| if *c > 0.0 { s / c } else { 0.0 }).collect()
}
