//! Finite-difference verification of the tangent a material hands back
//! through the bridge.

use constikit::bridge::eval;
use constikit::tensor::pair_index;
use constikit::{HostRequest, HostStrain, Kinematics, Material, Matrix6, Matrix9, Regime, StateLayout, Tensor2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Sample {
    pub index: usize,
    /// Deformation gradient (row-major) or host-order strain.
    pub input: Vec<f64>,
    /// Relative Frobenius error of the returned tangent.
    pub error: f64,
}

pub struct Settings {
    pub samples: usize,
    pub seed: u64,
    /// Factor applied to the returned tangent before comparison.
    pub scale: f64,
}

fn fresh(m: &dyn Material) -> constikit::Result<Vec<f64>> {
    StateLayout::for_material(m).initial(&m.initial_state())
}

/// Amplitude of the random loading: large for elastic models, inside a few
/// yield strains for models with internal state.
fn amplitude(m: &dyn Material) -> f64 {
    match (m.regime(), m.nstatv_user()) {
        (Regime::FiniteStrain, 0) => 0.3,
        (Regime::SmallStrain, 0) => 1e-3,
        _ => 5e-3,
    }
}

pub fn run(m: &dyn Material, settings: &Settings) -> constikit::Result<Vec<Sample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let amp = amplitude(m);
    (0..settings.samples)
        .map(|index| match m.regime() {
            Regime::FiniteStrain => finite_sample(m, &mut rng, amp, settings.scale, index),
            Regime::SmallStrain => small_sample(m, &mut rng, amp, settings.scale, index),
        })
        .collect()
}

fn finite_request(m: &dyn Material, f: Tensor2, state: &[f64]) -> HostRequest {
    HostRequest {
        kinematics: Kinematics::FiniteStrain {
            f_old: Tensor2::identity(),
            f_new: f,
        },
        par: m.props().to_vec(),
        delta: 1.0,
        state_in: state.to_vec(),
    }
}

fn finite_sample(m: &dyn Material, rng: &mut ChaCha8Rng, amp: f64, scale: f64, index: usize) -> constikit::Result<Sample> {
    let f = loop {
        let f = Tensor2::identity() + Tensor2::from_fn(|_, _| rng.random_range(-amp..amp));
        if f.determinant() > 0.3 {
            break f;
        }
    };
    let state = fresh(m)?;
    let res = eval(&finite_request(m, f, &state), m)?;
    let k = res.finite_tangent().expect("finite regime") * scale;
    let h = 1e-6;
    let mut fd = Matrix9::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let (mut fp, mut fm) = (f, f);
            fp[(a, b)] += h;
            fm[(a, b)] -= h;
            let sp = eval(&finite_request(m, fp, &state), m)?.s.to_tensor();
            let sm = eval(&finite_request(m, fm, &state), m)?.s.to_tensor();
            let d = (sp - sm) / (2.0 * h);
            for i in 0..3 {
                for j in 0..3 {
                    fd[(pair_index(i, j), pair_index(a, b))] = d[(i, j)];
                }
            }
        }
    }
    Ok(Sample {
        index,
        input: f.transpose().as_slice().to_vec(),
        error: (k - fd).norm() / fd.norm(),
    })
}

fn small_request(m: &dyn Material, strain: [f64; 6], state: &[f64]) -> HostRequest {
    HostRequest {
        kinematics: Kinematics::SmallStrain {
            strain_total: HostStrain::new(strain),
        },
        par: m.props().to_vec(),
        delta: 1.0,
        state_in: state.to_vec(),
    }
}

fn small_sample(m: &dyn Material, rng: &mut ChaCha8Rng, amp: f64, scale: f64, index: usize) -> constikit::Result<Sample> {
    let strain: [f64; 6] = std::array::from_fn(|_| rng.random_range(-amp..amp));
    let state = fresh(m)?;
    let res = eval(&small_request(m, strain, &state), m)?;
    let k = match res.tangent {
        constikit::HostTangent::Small(k) => k * scale,
        constikit::HostTangent::Finite(_) => unreachable!("small regime"),
    };
    // columns are per engineering shear, the host strain stores half of it
    let h = 1e-6;
    let mut fd = Matrix6::zeros();
    for c in 0..6 {
        let step = if c < 3 { h } else { 0.5 * h };
        let (mut ep, mut em) = (strain, strain);
        ep[c] += step;
        em[c] -= step;
        let sp = eval(&small_request(m, ep, &state), m)?.s;
        let sm = eval(&small_request(m, em, &state), m)?.s;
        for r in 0..6 {
            fd[(r, c)] = (sp.components()[r] - sm.components()[r]) / (2.0 * h);
        }
    }
    Ok(Sample {
        index,
        input: strain.to_vec(),
        error: (k - fd).norm() / fd.norm(),
    })
}
