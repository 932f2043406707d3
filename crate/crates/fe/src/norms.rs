//! Newton convergence measures in the two styles used by the commercial
//! codes: a force-residual ratio and a weighted error norm.

/// Default tolerance of the residual-ratio criterion.
pub const ABAQUS_DEFAULT_TOL: f64 = 5e-3;
/// Default tolerance of the weighted-error criterion.
pub const COMSOL_DEFAULT_TOL: f64 = 1e-3;

/// Scale applied to the first nonzero force average when the running
/// average is zero.
const FALLBACK_SCALE: f64 = 1e-8;

/// `r_max / q̃` with `r_max = ‖r‖∞`.
///
/// `q̃ = 0` means there is no force scale yet; the criterion then becomes
/// absolute and returns `r_max`.
pub fn norm_abaqus_style(residual: &[f64], q_tilde: f64) -> f64 {
    let r_max = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if q_tilde > 0.0 {
        r_max / q_tilde
    } else {
        r_max
    }
}

/// `sqrt(1/N Σ (|E_i| / W_i)²)` with `W_i = max(|U_i|, S)` and `S` the mean
/// of `|U_i|`. A zero weight with a nonzero error gives `+∞`.
pub fn norm_comsol_style(error: &[f64], solution: &[f64]) -> f64 {
    assert_eq!(error.len(), solution.len(), "error and solution lengths differ");
    let n = error.len();
    if n == 0 {
        return 0.0;
    }
    let s = solution.iter().map(|u| u.abs()).sum::<f64>() / n as f64;
    let mut sum = 0.0;
    for (e, u) in error.iter().zip(solution) {
        if *e == 0.0 {
            continue;
        }
        let w = u.abs().max(s);
        if w == 0.0 {
            return f64::INFINITY;
        }
        sum += (e / w).powi(2);
    }
    (sum / n as f64).sqrt()
}

/// Mean magnitude of the nonzero entries of a force vector.
pub fn spatial_force_average(f: &[f64]) -> f64 {
    let (sum, count) = f
        .iter()
        .filter(|v| **v != 0.0)
        .fold((0.0, 0usize), |(s, c), v| (s + v.abs(), c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Time-averaged force magnitude `q̃` over converged increments.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ForceHistory {
    averages: Vec<f64>,
    reference: Option<f64>,
}

impl ForceHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the spatial average of a converged increment.
    pub fn push(&mut self, average: f64) {
        if self.reference.is_none() && average > 0.0 {
            self.reference = Some(average);
        }
        self.averages.push(average);
    }

    pub fn len(&self) -> usize {
        self.averages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.averages.is_empty()
    }

    /// Mean over the history, plus `current` when given.
    pub fn q_tilde(&self, current: Option<f64>) -> f64 {
        let n = self.averages.len() + usize::from(current.is_some());
        if n == 0 {
            return 0.0;
        }
        (self.averages.iter().sum::<f64>() + current.unwrap_or(0.0)) / n as f64
    }

    /// `q̃`, floored at a small multiple of the first nonzero average seen
    /// (including `current`) so that a zero running mean does not switch
    /// the criterion to absolute units once a force scale is known.
    pub fn q_tilde_guarded(&self, current: Option<f64>) -> f64 {
        let q = self.q_tilde(current);
        let reference = self
            .reference
            .or(current.filter(|c| *c > 0.0))
            .unwrap_or(0.0);
        q.max(FALLBACK_SCALE * reference)
    }
}
