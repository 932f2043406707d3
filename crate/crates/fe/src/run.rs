//! Case execution: the Newton solve plus per-increment post-processing and
//! the staggered hydrogen transport when the case asks for it.

use crate::case::Case;
use crate::error::{FeError, Result};
use crate::hydrogen::{staggered_step, Transport, TransportState};
use crate::model::{nodal_average, nodal_extrapolate, Model, PointState};
use crate::solver::{IncrementView, SolveOutput, Solver};

/// Nodal fields at the end of a converged increment.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFrame {
    pub time: f64,
    /// Displacement, `ndim` components per node.
    pub u: Vec<f64>,
    /// Cauchy stress per node in UMAT slot order, extrapolated from the
    /// integration points.
    pub stress: Vec<[f64; 6]>,
    /// Accumulated plastic strain per node.
    pub eps_p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportFrame {
    pub time: f64,
    pub passes: usize,
    pub state: TransportState,
}

/// One `(time, abscissa, ordinate)` sample of a response curve.
pub type CurvePoint = [f64; 3];

#[derive(Debug)]
pub struct RunResults {
    pub title: String,
    pub output: SolveOutput,
    /// Mean displacement of the set against the summed internal force.
    pub force_displacement: Vec<CurvePoint>,
    /// Average strain against average Cauchy stress.
    pub stress_strain: Vec<CurvePoint>,
    pub fields: Vec<FieldFrame>,
    pub transport: Vec<TransportFrame>,
    /// Support reactions per converged increment as `(time, [(dof, force)])`.
    pub reactions: Vec<(f64, Vec<(usize, f64)>)>,
}

impl RunResults {
    pub fn completed(&self) -> bool {
        self.output.completed()
    }
}

/// Nodal hydrostatic stress from the committed states.
pub fn hydrostatic_nodal(model: &Model, states: &[Vec<PointState>]) -> Vec<f64> {
    let values: Vec<Vec<f64>> = states
        .iter()
        .map(|pts| {
            pts.iter()
                .map(|p| {
                    let s = Model::cauchy(p);
                    (s[0] + s[1] + s[2]) / 3.0
                })
                .collect()
        })
        .collect();
    nodal_extrapolate(model, &values)
}

/// Nodal accumulated plastic strain from the committed states.
pub fn plastic_nodal(model: &Model, states: &[Vec<PointState>]) -> Vec<f64> {
    let values: Vec<Vec<f64>> = states
        .iter()
        .enumerate()
        .map(|(e, pts)| pts.iter().map(|p| model.plastic_strain(e, p)).collect())
        .collect();
    nodal_average(model, &values)
}

/// Nodal Cauchy stress from the committed states.
pub fn stress_nodal(model: &Model, states: &[Vec<PointState>]) -> Vec<[f64; 6]> {
    let mut out = vec![[0.0; 6]; model.mesh().nodes().len()];
    for c in 0..6 {
        let values: Vec<Vec<f64>> = states
            .iter()
            .map(|pts| pts.iter().map(|p| Model::cauchy(p)[c]).collect())
            .collect();
        for (n, v) in nodal_extrapolate(model, &values).into_iter().enumerate() {
            out[n][c] = v;
        }
    }
    out
}

pub fn run_case(case: &Case) -> Result<RunResults> {
    let model = &case.model;
    let solver = Solver::new(model, &case.loading, case.settings)?.with_linear_solver(case.linear_solver());
    let d = model.ndim();
    let transport = match &case.transport {
        Some(t) => Some((Transport::new(model.mesh(), t.params, &t.fixed_nodes)?, t)),
        None => None,
    };
    let mut h_state = transport.as_ref().map(|(tr, t)| {
        let mut s = TransportState::uniform(model.mesh().nodes().len(), t.params.c0, tr.params());
        for &n in &t.fixed_nodes {
            s.c_l[n] = t.params.c0;
        }
        s
    });
    let fd_nodes = match &case.output.force_displacement {
        Some(spec) => Some((model.mesh().set(&spec.set)?.to_vec(), spec.component.index())),
        None => None,
    };
    let mut force_displacement = Vec::new();
    let mut stress_strain = Vec::new();
    let mut fields = Vec::new();
    let mut frames = Vec::new();
    let mut failure: Option<FeError> = None;
    let mut observer = |v: &IncrementView<'_>| {
        if let Some((nodes, c)) = &fd_nodes {
            let disp = nodes.iter().map(|&n| v.u[n * d + c]).sum::<f64>() / nodes.len() as f64;
            let force: f64 = nodes.iter().map(|&n| v.f_int[n * d + c]).sum();
            force_displacement.push([v.time, disp, force]);
        }
        if let Some(spec) = &case.output.stress_strain {
            let h = model.average_gradient(v.u);
            let (i, j) = spec.component.indices();
            let strain = 0.5 * (h[(i, j)] + h[(j, i)]);
            let stress = model.average_cauchy(v.states)[spec.component.umat_slot()];
            stress_strain.push([v.time, strain, stress]);
        }
        if case.output.fields {
            fields.push(FieldFrame {
                time: v.time,
                u: v.u.to_vec(),
                stress: stress_nodal(model, v.states),
                eps_p: plastic_nodal(model, v.states),
            });
        }
        if let (Some((tr, t)), Some(prev)) = (&transport, h_state.as_mut()) {
            if failure.is_some() {
                return;
            }
            // mechanics does not depend on the hydrogen content, so every
            // pass sees the same converged fields
            let sigma_h = hydrostatic_nodal(model, v.states);
            let eps_p = plastic_nodal(model, v.states);
            let step = staggered_step(tr, prev, v.dt, t.coupling_tolerance, t.max_passes, |_| {
                Ok((sigma_h.clone(), eps_p.clone()))
            });
            match step {
                Ok(s) => {
                    *prev = s.state.clone();
                    frames.push(TransportFrame {
                        time: v.time,
                        passes: s.passes,
                        state: s.state,
                    });
                }
                Err(e) => failure = Some(e),
            }
        }
    };
    let output = solver.solve_observed(&case.schedule, &mut observer)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let reactions = output
        .increments
        .iter()
        .map(|inc| (inc.time, inc.reactions(&case.loading)))
        .collect();
    Ok(RunResults {
        title: case.title.clone(),
        output,
        reactions,
        force_displacement,
        stress_strain,
        fields,
        transport: frames,
    })
}
