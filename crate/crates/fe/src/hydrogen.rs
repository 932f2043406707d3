//! Lattice hydrogen transport with Oriani trapping at dislocations and
//! hydrostatic-stress drift, staggered with the mechanical solution.
//!
//! The unknown is the nodal lattice concentration `C_L`. A time step solves
//!
//! ```text
//! M (C_L + C_T(C_L, N_T))' + ∇·(−D_L ∇C_L + D_L V_H/(RT) C_L ∇σ_h) = 0
//! ```
//!
//! with backward Euler and a lumped storage matrix. The trapped inventory is
//! differenced exactly, which splits into an implicit capacity part and the
//! trap-growth source `θ/(1+θ)·ΔN_T` evaluated with the previous `C_L`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::element::{element_geometry, PointGeometry};
use crate::error::{FeError, Result};
use crate::linalg::{BandLu, CsrMatrix, LinearSolver};
use crate::mesh::Mesh;

pub const GAS_CONSTANT: f64 = 8.314;
pub const AVOGADRO: f64 = 6.022_140_76e23;

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportParams {
    /// Lattice diffusivity, m²/s.
    pub d_l: f64,
    /// Lattice site density, mol/m³.
    pub n_l: f64,
    /// Partial molar volume of hydrogen, m³/mol.
    pub v_h: f64,
    /// Trap binding energy, J/mol.
    pub w_b: f64,
    /// Temperature, K.
    pub temperature: f64,
    /// Boundary and initial lattice concentration, mol/m³.
    pub c0: f64,
}

impl Default for TransportParams {
    fn default() -> Self {
        Self::reference_defaults()
    }
}

impl TransportParams {
    /// Iron-like values: D_L 1.27e-8 m²/s, N_L 8.469 mol/m³, V_H 2e-6 m³/mol,
    /// W_B 60 kJ/mol, 300 K, C0 0.00346 mol/m³.
    pub fn reference_defaults() -> Self {
        Self {
            d_l: 1.27e-8,
            n_l: 8.469,
            v_h: 2e-6,
            w_b: 60e3,
            temperature: 300.0,
            c0: 0.00346,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.d_l, self.n_l, self.v_h, self.w_b, self.temperature, self.c0];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(FeError::Case(format!("transport parameters must be positive: {self:?}")))
        }
    }

    /// Equilibrium constant `exp(W_B / RT)`.
    pub fn equilibrium_constant(&self) -> f64 {
        (self.w_b / (GAS_CONSTANT * self.temperature)).exp()
    }

    /// Drift coefficient `V_H / RT`, 1/Pa.
    pub fn drift(&self) -> f64 {
        self.v_h / (GAS_CONSTANT * self.temperature)
    }

    /// Trap occupancy ratio `θ = C_L/N_L · exp(W_B/RT)`.
    pub fn theta(&self, c_l: f64) -> f64 {
        c_l / self.n_l * self.equilibrium_constant()
    }
}

/// Dislocation trap density in mol/m³ for an accumulated plastic strain:
/// `10^(23.26 − 2.33 exp(−5.5 ε_p))` sites/m³ over Avogadro's number.
pub fn trap_density(eps_p: f64) -> f64 {
    let exponent = 23.26 - 2.33 * (-5.5 * eps_p.max(0.0)).exp();
    10f64.powf(exponent) / AVOGADRO
}

/// Trapped concentration in equilibrium with the lattice.
pub fn oriani_trapped(c_l: f64, n_t: f64, p: &TransportParams) -> f64 {
    let theta = p.theta(c_l);
    n_t * theta / (1.0 + theta)
}

/// `∂C_T/∂C_L` at fixed trap density.
pub fn capacity(c_l: f64, n_t: f64, p: &TransportParams) -> f64 {
    let theta = p.theta(c_l);
    n_t * (p.equilibrium_constant() / p.n_l) / (1.0 + theta).powi(2)
}

/// Nodal transport fields.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportState {
    pub c_l: Vec<f64>,
    pub c_t: Vec<f64>,
    pub n_t: Vec<f64>,
    /// Hydrostatic stress the state was computed with, Pa.
    pub sigma_h: Vec<f64>,
    /// Accumulated plastic strain the trap density follows.
    pub eps_p: Vec<f64>,
}

impl TransportState {
    /// Uniform lattice concentration `c`, unstressed and undeformed.
    pub fn uniform(nodes: usize, c: f64, p: &TransportParams) -> Self {
        let n_t = trap_density(0.0);
        Self {
            c_l: vec![c; nodes],
            c_t: vec![oriani_trapped(c, n_t, p); nodes],
            n_t: vec![n_t; nodes],
            sigma_h: vec![0.0; nodes],
            eps_p: vec![0.0; nodes],
        }
    }
}

/// Discretized transport problem on a mesh.
#[derive(Debug)]
pub struct Transport {
    params: TransportParams,
    elements: Vec<Vec<usize>>,
    geometry: Vec<Vec<PointGeometry>>,
    lumped: Vec<f64>,
    fixed: Vec<bool>,
    equation: Vec<Option<usize>>,
    pattern: CsrMatrix,
}

impl Transport {
    /// `fixed` holds the nodes kept at `C0`; every other boundary is
    /// impermeable.
    pub fn new(mesh: &Mesh, params: TransportParams, fixed: &[usize]) -> Result<Self> {
        params.validate()?;
        let n = mesh.nodes().len();
        let elements: Vec<Vec<usize>> = mesh.elements().iter().map(|e| e.nodes.clone()).collect();
        let geometry = (0..elements.len())
            .map(|e| element_geometry(mesh, e))
            .collect::<Result<Vec<_>>>()?;
        let mut lumped = vec![0.0; n];
        for (nodes, pts) in elements.iter().zip(&geometry) {
            // HRZ lumping: the consistent diagonal scaled to the element
            // volume, positive for quadratic elements too
            let volume: f64 = pts.iter().map(|g| g.dv).sum();
            let diag: Vec<f64> = (0..nodes.len())
                .map(|a| pts.iter().map(|g| g.n[a] * g.n[a] * g.dv).sum())
                .collect();
            let total: f64 = diag.iter().sum();
            for (a, &node) in nodes.iter().enumerate() {
                lumped[node] += volume * diag[a] / total;
            }
        }
        let mut is_fixed = vec![false; n];
        for &f in fixed {
            if f >= n {
                return Err(FeError::Case(format!("fixed-concentration node {f} outside the mesh")));
            }
            is_fixed[f] = true;
        }
        let mut equation = vec![None; n];
        let mut count = 0;
        for (i, eq) in equation.iter_mut().enumerate() {
            if !is_fixed[i] {
                *eq = Some(count);
                count += 1;
            }
        }
        let mut rows = vec![BTreeSet::new(); count];
        for nodes in &elements {
            let eqs: Vec<usize> = nodes.iter().filter_map(|&a| equation[a]).collect();
            for &i in &eqs {
                rows[i].extend(eqs.iter().copied());
            }
        }
        Ok(Self {
            params,
            elements,
            geometry,
            lumped,
            fixed: is_fixed,
            equation,
            pattern: CsrMatrix::from_pattern(&rows),
        })
    }

    pub fn params(&self) -> &TransportParams {
        &self.params
    }

    /// Lumped nodal volumes.
    pub fn lumped(&self) -> &[f64] {
        &self.lumped
    }

    /// Total hydrogen `∫(C_L + C_T) dV` with the lumped measure.
    pub fn inventory(&self, s: &TransportState) -> f64 {
        self.lumped.iter().enumerate().map(|(i, m)| m * (s.c_l[i] + s.c_t[i])).sum()
    }

    /// Advances `state` by `dt` under the given nodal hydrostatic stress and
    /// plastic strain at the end of the step.
    pub fn step(
        &self,
        state: &TransportState,
        sigma_h: &[f64],
        eps_p: &[f64],
        dt: f64,
    ) -> Result<TransportState> {
        let n = self.lumped.len();
        if !(dt > 0.0) {
            return Err(FeError::Case(format!("transport step needs dt > 0, got {dt}")));
        }
        if sigma_h.len() != n || eps_p.len() != n || state.c_l.len() != n {
            return Err(FeError::Case("transport field sizes differ from the mesh".into()));
        }
        let p = &self.params;
        let n_t: Vec<f64> = eps_p.iter().map(|&e| trap_density(e)).collect();
        let stiffness = self.operator(sigma_h);
        let mut c: Vec<f64> = (0..n)
            .map(|i| if self.fixed[i] { p.c0 } else { state.c_l[i] })
            .collect();
        // trap-growth source with the previous lattice concentration
        let growth: Vec<f64> = (0..n)
            .map(|i| {
                let theta = p.theta(state.c_l[i]);
                theta / (1.0 + theta) * (n_t[i] - state.n_t[i])
            })
            .collect();
        let mut k = self.pattern.clone();
        let mut converged = false;
        for _ in 0..NEWTON_MAX {
            let mut r = vec![0.0; self.pattern.n()];
            k.clear();
            for i in 0..n {
                let Some(eq) = self.equation[i] else { continue };
                let m = self.lumped[i] / dt;
                let trapped_new = oriani_trapped(c[i], n_t[i], p);
                let trapped_old = oriani_trapped(state.c_l[i], n_t[i], p);
                r[eq] += m * (c[i] - state.c_l[i] + trapped_new - trapped_old + growth[i]);
                k.add(eq, eq, m * (1.0 + capacity(c[i], n_t[i], p)));
            }
            for (e, ke) in stiffness.iter().enumerate() {
                let nodes = &self.elements[e];
                for (a, &na) in nodes.iter().enumerate() {
                    let Some(i) = self.equation[na] else { continue };
                    for (b, &nb) in nodes.iter().enumerate() {
                        let v = ke[a * nodes.len() + b];
                        r[i] += v * c[nb];
                        if let Some(j) = self.equation[nb] {
                            k.add(i, j, v);
                        }
                    }
                }
            }
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let delta = BandLu.solve(&k, &rhs)?;
            let mut change: f64 = 0.0;
            for i in 0..n {
                if let Some(eq) = self.equation[i] {
                    c[i] += delta[eq];
                    change = change.max(delta[eq].abs());
                }
            }
            let scale = c.iter().fold(p.c0, |m, v| m.max(v.abs()));
            if change <= NEWTON_TOL * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(FeError::NotConverged {
                time: dt,
                cuts: 0,
                reason: "transport Newton iteration stalled".into(),
            });
        }
        if let Some(i) = c.iter().position(|v| !(*v >= 0.0)) {
            return Err(FeError::Case(format!(
                "negative lattice concentration {} at node {i}; reduce the time step",
                c[i]
            )));
        }
        let c_t = c.iter().zip(&n_t).map(|(&cl, &nt)| oriani_trapped(cl, nt, p)).collect();
        Ok(TransportState {
            c_l: c,
            c_t,
            n_t,
            sigma_h: sigma_h.to_vec(),
            eps_p: eps_p.to_vec(),
        })
    }

    /// Element diffusion-drift matrices, row-major `K_ab`.
    fn operator(&self, sigma_h: &[f64]) -> Vec<Vec<f64>> {
        let p = &self.params;
        let drift = p.d_l * p.drift();
        self.elements
            .iter()
            .zip(&self.geometry)
            .map(|(nodes, pts)| {
                let m = nodes.len();
                let mut ke = vec![0.0; m * m];
                for g in pts {
                    let mut grad_s = [0.0; 3];
                    for (b, &nb) in nodes.iter().enumerate() {
                        for j in 0..3 {
                            grad_s[j] += g.dndx[b][j] * sigma_h[nb];
                        }
                    }
                    for a in 0..m {
                        let ga = g.dndx[a];
                        let drift_a = drift * (0..3).map(|j| ga[j] * grad_s[j]).sum::<f64>();
                        for b in 0..m {
                            let diff = p.d_l * (0..3).map(|j| ga[j] * g.dndx[b][j]).sum::<f64>();
                            ke[a * m + b] += (diff - drift_a * g.n[b]) * g.dv;
                        }
                    }
                }
                ke
            })
            .collect()
    }
}

/// Outcome of one staggered step.
#[derive(Clone, Debug, PartialEq)]
pub struct StaggeredStep {
    pub state: TransportState,
    /// Transport solves performed.
    pub passes: usize,
    /// Relative `C_L` change of the last pass.
    pub change: f64,
}

/// Alternates the mechanical fields and the transport step until the
/// lattice concentration of two successive passes differs by less than
/// `tol` relative to its maximum.
///
/// `fields` returns nodal `(σ_h, ε_p)` at the end of the step given the
/// current transport estimate.
pub fn staggered_step(
    transport: &Transport,
    previous: &TransportState,
    dt: f64,
    tol: f64,
    max_passes: usize,
    mut fields: impl FnMut(&TransportState) -> Result<(Vec<f64>, Vec<f64>)>,
) -> Result<StaggeredStep> {
    let mut guess = previous.clone();
    let mut change = f64::INFINITY;
    for pass in 1..=max_passes {
        let (sigma_h, eps_p) = fields(&guess)?;
        let next = transport.step(previous, &sigma_h, &eps_p, dt)?;
        let scale = next.c_l.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        change = next
            .c_l
            .iter()
            .zip(&guess.c_l)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale.max(f64::MIN_POSITIVE);
        guess = next;
        if change < tol {
            return Ok(StaggeredStep {
                state: guess,
                passes: pass,
                change,
            });
        }
    }
    Err(FeError::NotConverged {
        time: dt,
        cuts: 0,
        reason: format!("staggered coupling: C_L change {change:e} after {max_passes} passes"),
    })
}

/// Sample Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}
