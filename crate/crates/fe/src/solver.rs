//! Incremental Newton solution with both convergence measures recorded at
//! every iteration, and increment bisection on failure.
//!
//! Record 0 of an increment is evaluated at the last converged state, with
//! the prescribed-displacement increment entering the right-hand side
//! through the tangent. Each later record follows one Newton update. Both
//! measures are computed at every record: the residual ratio from the
//! current out-of-balance forces and the weighted error from the correction
//! the current tangent predicts. An increment converges at the first record
//! (after record 0) whose active measure is below the tolerance, so a linear
//! problem converges in exactly one iteration.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bc::Loading;
use crate::error::{FeError, Result};
use crate::linalg::{BandLu, CsrMatrix, LinearSolver};
use crate::model::{Model, PointState};
use crate::norms::{
    norm_abaqus_style, norm_comsol_style, spatial_force_average, ForceHistory, ABAQUS_DEFAULT_TOL,
    COMSOL_DEFAULT_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// Largest residual force over the time-averaged force magnitude.
    Abaqus,
    /// Weighted RMS of the Newton correction.
    Comsol,
}

impl NormKind {
    pub fn default_tolerance(self) -> f64 {
        match self {
            NormKind::Abaqus => ABAQUS_DEFAULT_TOL,
            NormKind::Comsol => COMSOL_DEFAULT_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub norm: NormKind,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_cuts: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self::with_norm(NormKind::Abaqus)
    }
}

impl SolverSettings {
    pub fn with_norm(norm: NormKind) -> Self {
        Self {
            norm,
            tolerance: norm.default_tolerance(),
            max_iterations: 25,
            max_cuts: 4,
        }
    }
}

/// Measures of one increment attempt.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementTrace {
    /// Index of the scheduled increment this attempt belongs to.
    pub increment: usize,
    /// Number of bisections applied to reach this attempt.
    pub cut: usize,
    pub time: f64,
    pub dt: f64,
    pub abaqus: Vec<f64>,
    pub comsol: Vec<f64>,
    pub converged: bool,
    pub failure: Option<String>,
    /// Seconds spent on the attempt.
    pub wall_time: f64,
}

impl IncrementTrace {
    /// Newton iterations performed (records after the predictor).
    pub fn iterations(&self) -> usize {
        self.abaqus.len().saturating_sub(1)
    }

    pub fn active(&self, norm: NormKind) -> &[f64] {
        match norm {
            NormKind::Abaqus => &self.abaqus,
            NormKind::Comsol => &self.comsol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverTrace {
    pub norm: NormKind,
    pub tolerance: f64,
    pub attempts: Vec<IncrementTrace>,
}

impl SolverTrace {
    pub fn converged(&self) -> impl Iterator<Item = &IncrementTrace> {
        self.attempts.iter().filter(|a| a.converged)
    }
}

/// Converged state handed to observers after each increment.
pub struct IncrementView<'a> {
    /// Position in the sequence of converged increments.
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub u: &'a [f64],
    pub f_int: &'a [f64],
    pub f_ext: &'a [f64],
    pub states: &'a [Vec<PointState>],
}

/// Converged displacement and forces at the end of an increment.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementResult {
    pub time: f64,
    pub u: Vec<f64>,
    pub f_int: Vec<f64>,
    pub f_ext: Vec<f64>,
}

impl IncrementResult {
    /// Support reactions: out-of-balance force at constrained DOFs.
    pub fn reactions(&self, loading: &Loading) -> Vec<(usize, f64)> {
        loading
            .constrained_dofs()
            .into_iter()
            .map(|d| (d, self.f_int[d] - self.f_ext[d]))
            .collect()
    }
}

#[derive(Debug)]
pub struct SolveOutput {
    pub increments: Vec<IncrementResult>,
    pub trace: SolverTrace,
    pub states: Vec<Vec<PointState>>,
    /// Set when an increment failed after all cutbacks.
    pub failure: Option<FeError>,
}

impl SolveOutput {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn final_u(&self) -> &[f64] {
        self.increments.last().map_or(&[], |r| r.u.as_slice())
    }
}

struct Attempt {
    u: Vec<f64>,
    f_int: Vec<f64>,
    states: Vec<Vec<PointState>>,
}

/// Newton driver for one model and loading.
pub struct Solver<'a> {
    model: &'a Model,
    loading: &'a Loading,
    settings: SolverSettings,
    linear: Box<dyn LinearSolver>,
    /// Free-equation number of each global DOF (`None` if constrained).
    equation: Vec<Option<usize>>,
    free: Vec<usize>,
    pattern: CsrMatrix,
}

impl<'a> Solver<'a> {
    pub fn new(model: &'a Model, loading: &'a Loading, settings: SolverSettings) -> Result<Self> {
        if !(settings.tolerance > 0.0) {
            return Err(FeError::Case(format!(
                "tolerance must be positive, got {}",
                settings.tolerance
            )));
        }
        let ndof = model.ndof();
        let mut equation = vec![None; ndof];
        let mut free = Vec::new();
        for (d, eq) in equation.iter_mut().enumerate() {
            if !loading.is_constrained(d) {
                *eq = Some(free.len());
                free.push(d);
            }
        }
        if loading.constrained_dofs().iter().any(|&d| d >= ndof) {
            return Err(FeError::Case("constraint outside the model".into()));
        }
        let mut rows = vec![BTreeSet::new(); free.len()];
        for e in 0..model.mesh().elements().len() {
            let eqs: Vec<usize> = model.element_dofs(e).iter().filter_map(|&d| equation[d]).collect();
            for &i in &eqs {
                rows[i].extend(eqs.iter().copied());
            }
        }
        Ok(Self {
            model,
            loading,
            settings,
            linear: Box::new(BandLu),
            equation,
            free,
            pattern: CsrMatrix::from_pattern(&rows),
        })
    }

    pub fn with_linear_solver(mut self, linear: Box<dyn LinearSolver>) -> Self {
        self.linear = linear;
        self
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    /// Runs the schedule of time increments `dts`.
    pub fn solve(&self, dts: &[f64]) -> Result<SolveOutput> {
        self.solve_observed(dts, &mut |_| {})
    }

    /// As [`solve`](Self::solve), calling `observer` after each converged
    /// increment.
    pub fn solve_observed(
        &self,
        dts: &[f64],
        observer: &mut dyn FnMut(&IncrementView<'_>),
    ) -> Result<SolveOutput> {
        if dts.is_empty() || dts.iter().any(|d| !(*d > 0.0)) {
            return Err(FeError::Case("time increments must be positive and non-empty".into()));
        }
        let t_end: f64 = dts.iter().sum();
        let mut states = self.model.initial_states()?;
        let mut u = vec![0.0; self.model.ndof()];
        let mut history = ForceHistory::new();
        let mut trace = SolverTrace {
            norm: self.settings.norm,
            tolerance: self.settings.tolerance,
            attempts: Vec::new(),
        };
        let mut increments = Vec::new();
        let mut t = 0.0;
        let mut t_goal = 0.0;
        for (index, &dt_target) in dts.iter().enumerate() {
            t_goal += dt_target;
            let mut dt = dt_target;
            let mut cut = 0;
            while t_goal - t > 1e-12 * t_end {
                dt = dt.min(t_goal - t);
                let started = Instant::now();
                let mut rec = IncrementTrace {
                    increment: index,
                    cut,
                    time: t + dt,
                    dt,
                    abaqus: Vec::new(),
                    comsol: Vec::new(),
                    converged: false,
                    failure: None,
                    wall_time: 0.0,
                };
                let outcome = self.attempt(&u, &states, t, dt, t_end, &history, &mut rec);
                rec.wall_time = started.elapsed().as_secs_f64();
                match outcome {
                    Ok((att, f_ext)) => {
                        rec.converged = true;
                        trace.attempts.push(rec);
                        history.push(current_force_average(&att.f_int, &f_ext));
                        t = if t_goal - (t + dt) <= 1e-12 * t_end { t_goal } else { t + dt };
                        u = att.u;
                        states = att.states;
                        observer(&IncrementView {
                            step: increments.len(),
                            time: t,
                            dt,
                            u: &u,
                            f_int: &att.f_int,
                            f_ext: &f_ext,
                            states: &states,
                        });
                        increments.push(IncrementResult {
                            time: t,
                            u: u.clone(),
                            f_int: att.f_int,
                            f_ext,
                        });
                    }
                    Err(err) => {
                        rec.failure = Some(err.to_string());
                        trace.attempts.push(rec);
                        if cut == self.settings.max_cuts {
                            return Ok(SolveOutput {
                                increments,
                                trace,
                                states,
                                failure: Some(FeError::NotConverged {
                                    time: t + dt,
                                    cuts: cut,
                                    reason: err.to_string(),
                                }),
                            });
                        }
                        cut += 1;
                        dt *= 0.5;
                    }
                }
            }
        }
        Ok(SolveOutput {
            increments,
            trace,
            states,
            failure: None,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn attempt(
        &self,
        u_n: &[f64],
        states_n: &[Vec<PointState>],
        t_n: f64,
        dt: f64,
        t_end: f64,
        history: &ForceHistory,
        rec: &mut IncrementTrace,
    ) -> Result<(Attempt, Vec<f64>)> {
        let mesh = self.model.mesh();
        let t1 = t_n + dt;
        let f_ext = self.loading.external_force(self.model.ndof(), t1, t_end);
        let prescribed = self.loading.prescribed(mesh, t1, t_end);
        let mut du_p = vec![0.0; self.model.ndof()];
        let mut lifted = false;
        for &(d, v) in &prescribed {
            du_p[d] = v - u_n[d];
            lifted |= du_p[d] != 0.0;
        }
        let mut u = u_n.to_vec();
        let mut k = self.pattern.clone();
        for it in 0..=self.settings.max_iterations {
            let (f_int, responses) = self.model.assemble(&u, states_n, dt)?;
            let mut r: Vec<f64> = self.free.iter().map(|&d| f_int[d] - f_ext[d]).collect();
            k.clear();
            for resp in &responses {
                for (a, &da) in resp.dofs.iter().enumerate() {
                    let Some(i) = self.equation[da] else { continue };
                    for (b, &db) in resp.dofs.iter().enumerate() {
                        match self.equation[db] {
                            Some(j) => k.add(i, j, resp.k[(a, b)]),
                            None if it == 0 && lifted => r[i] += resp.k[(a, b)] * du_p[db],
                            None => {}
                        }
                    }
                }
            }
            let q = history.q_tilde_guarded(Some(current_force_average(&f_int, &f_ext)));
            let abaqus = norm_abaqus_style(&r, q);
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let delta = self.linear.solve(&k, &rhs)?;
            let u_free: Vec<f64> = self.free.iter().map(|&d| u[d]).collect();
            let comsol = norm_comsol_style(&delta, &u_free);
            rec.abaqus.push(abaqus);
            rec.comsol.push(comsol);
            let active = match self.settings.norm {
                NormKind::Abaqus => abaqus,
                NormKind::Comsol => comsol,
            };
            if !abaqus.is_finite() || delta.iter().any(|v| !v.is_finite()) {
                return Err(FeError::Case("non-finite residual or correction".into()));
            }
            let trial_is_target = it > 0 || !lifted;
            if trial_is_target && active < self.settings.tolerance {
                let states = responses.into_iter().map(|r| r.states).collect();
                return Ok((Attempt { u, f_int, states }, f_ext));
            }
            if it == self.settings.max_iterations {
                break;
            }
            for (eq, &d) in self.free.iter().enumerate() {
                u[d] += delta[eq];
            }
            if it == 0 {
                for &(d, v) in &prescribed {
                    u[d] = v;
                }
            }
        }
        Err(FeError::Case(format!(
            "no convergence in {} iterations",
            self.settings.max_iterations
        )))
    }
}

/// Spatial force average of the internal forces, or of the applied loads
/// when the body is still unloaded.
fn current_force_average(f_int: &[f64], f_ext: &[f64]) -> f64 {
    let a = spatial_force_average(f_int);
    if a > 0.0 {
        a
    } else {
        spatial_force_average(f_ext)
    }
}

/// Uniform schedule of `n` increments over unit pseudo-time.
pub fn uniform_schedule(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}
