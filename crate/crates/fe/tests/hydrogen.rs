use constikit_fe::generate::{bar, rectangle};
use constikit_fe::hydrogen::{
    capacity, oriani_trapped, staggered_step, trap_density, Transport, TransportParams, TransportState,
};
use constikit_fe::mesh::ElementType;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> TransportParams {
    TransportParams::reference_defaults()
}

#[test]
fn trap_density_endpoints() {
    assert!((trap_density(0.0) / 1.413e-3 - 1.0).abs() < 1e-3);
    assert!((trap_density(50.0) / 0.3022 - 1.0).abs() < 1e-3);
    let mut prev = 0.0;
    for k in 0..100 {
        let n = trap_density(k as f64 * 0.02);
        assert!(n > prev);
        prev = n;
    }
}

#[test]
fn occupancy_at_reference_parameters() {
    let p = params();
    // exp(60000 / (8.314 · 300)) evaluated independently
    let k = (60000.0f64 / 2494.2).exp();
    let theta = 0.00346 / 8.469 * k;
    assert!((p.theta(0.00346) / 1.144e7 - 1.0).abs() < 1e-3, "{}", p.theta(0.00346));
    assert!((p.theta(0.00346) / theta - 1.0).abs() < 1e-12);
    let n_t = trap_density(0.0);
    let c_t = oriani_trapped(0.00346, n_t, &p);
    let deficit = 1.0 - c_t / n_t;
    assert!((deficit / 8.74e-8 - 1.0).abs() < 1e-2, "{deficit:e}");
    assert_eq!(oriani_trapped(0.0, n_t, &p), 0.0);
}

#[test]
fn capacity_matches_finite_differences() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        // spans unsaturated through deeply saturated traps
        let c_l = 10f64.powf(rng.random_range(-12.0..-2.0));
        let n_t = trap_density(rng.random_range(0.0..1.0));
        let h = 1e-5 * c_l;
        let fd = if p.theta(c_l) < 1e3 {
            (oriani_trapped(c_l + h, n_t, &p) - oriani_trapped(c_l - h, n_t, &p)) / (2.0 * h)
        } else {
            // empty sites N_T/(1+θ) avoid the cancellation in C_T ≈ N_T
            let empty = |c: f64| n_t / (1.0 + c / p.n_l * p.equilibrium_constant());
            (empty(c_l - h) - empty(c_l + h)) / (2.0 * h)
        };
        let c = capacity(c_l, n_t, &p);
        assert!((c - fd).abs() <= 1e-6 * c.abs(), "C_L {c_l:e}: {c:e} vs {fd:e}");
    }
    let n_t = trap_density(0.0);
    let zero = capacity(0.0, n_t, &p);
    assert!((zero - n_t * p.equilibrium_constant() / p.n_l).abs() <= 1e-12 * zero);
}

proptest! {
    #[test]
    fn trapped_concentration_is_bounded(log_c in -20.0f64..3.0, eps in 0.0f64..5.0) {
        let p = params();
        let n_t = trap_density(eps);
        let c_t = oriani_trapped(10f64.powf(log_c), n_t, &p);
        prop_assert!(c_t >= 0.0 && c_t <= n_t);
    }
}

fn steady_bar(nodes: usize, peak: f64) -> (Vec<f64>, TransportState) {
    let mesh = bar(1e-3, nodes - 1, ElementType::Line2).unwrap();
    let p = params();
    let tr = Transport::new(&mesh, p, &[]).unwrap();
    let sigma: Vec<f64> = mesh.nodes().iter().map(|x| peak * x[0] / 1e-3).collect();
    let mut s = TransportState::uniform(nodes, p.c0, &p);
    for _ in 0..20 {
        s = tr.step(&s, &sigma, &vec![0.0; nodes], 1e3).unwrap();
    }
    (sigma, s)
}

#[test]
fn steady_state_follows_the_drift_equilibrium() {
    let p = params();
    let (sigma, s) = steady_bar(200, 500e6);
    let ratio = s.c_l[199] / s.c_l[0];
    assert!((ratio / (p.drift() * 500e6).exp() - 1.0).abs() < 1e-3, "{ratio}");
    assert!((ratio - 1.493).abs() < 1e-3);
    for (c, sh) in s.c_l.iter().zip(&sigma) {
        let exact = s.c_l[0] * (p.drift() * sh).exp();
        assert!((c / exact - 1.0).abs() < 0.01);
    }
    assert!(s.c_t.iter().zip(&s.n_t).all(|(c, n)| *c >= 0.0 && c <= n));
}

#[test]
fn planar_inventory_is_conserved_with_frozen_traps() {
    let mesh = rectangle([2e-3, 1e-3], [12, 6], ElementType::Tri6).unwrap();
    let p = params();
    let tr = Transport::new(&mesh, p, &[]).unwrap();
    let n = mesh.nodes().len();
    let sigma: Vec<f64> = mesh
        .nodes()
        .iter()
        .map(|x| 400e6 * (x[0] / 2e-3) * (1.0 + x[1] / 1e-3))
        .collect();
    let eps = vec![0.0; n];
    let mut s = TransportState::uniform(n, p.c0, &p);
    let start = tr.inventory(&s);
    for _ in 0..30 {
        s = tr.step(&s, &sigma, &eps, 20.0).unwrap();
    }
    assert!((tr.inventory(&s) / start - 1.0).abs() < 1e-4);
}

#[test]
fn time_discretisation_is_first_order() {
    let mesh = bar(1e-3, 40, ElementType::Line2).unwrap();
    let p = params();
    let tr = Transport::new(&mesh, p, &[0]).unwrap();
    let n = mesh.nodes().len();
    let sigma: Vec<f64> = mesh.nodes().iter().map(|x| 500e6 * x[0] / 1e-3).collect();
    let eps = vec![0.0; n];
    let mut start = TransportState::uniform(n, p.c0, &p);
    start.c_l = vec![0.1 * p.c0; n];
    start.c_l[0] = p.c0;
    let run = |steps: usize| {
        let mut s = start.clone();
        for _ in 0..steps {
            s = tr.step(&s, &sigma, &eps, 2.0 / steps as f64).unwrap();
        }
        s.c_l
    };
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let (c1, c2, c4) = (run(4), run(8), run(16));
    let order = (diff(&c1, &c2) / diff(&c2, &c4)).log2();
    assert!(order >= 0.9, "{order}");
}

#[test]
fn unloaded_strip_relaxes_to_the_boundary_concentration() {
    let mesh = rectangle([1e-3, 0.5e-3], [8, 4], ElementType::Quad4).unwrap();
    let p = params();
    let left = mesh.set("left").unwrap().to_vec();
    let tr = Transport::new(&mesh, p, &left).unwrap();
    let n = mesh.nodes().len();
    let mut s = TransportState::uniform(n, 0.0, &p);
    for &i in &left {
        s.c_l[i] = p.c0;
    }
    let zero = vec![0.0; n];
    for _ in 0..40 {
        s = staggered_step(&tr, &s, 100.0, 1e-4, 10, |_| Ok((zero.clone(), zero.clone())))
            .unwrap()
            .state;
    }
    assert!(s.c_l.iter().all(|c| (c / p.c0 - 1.0).abs() < 1e-6));
}

#[test]
fn stress_free_coupling_matches_the_uncoupled_step() {
    let mesh = bar(1e-3, 30, ElementType::Line3).unwrap();
    let p = params();
    let tr = Transport::new(&mesh, p, &[0]).unwrap();
    let n = mesh.nodes().len();
    let zero = vec![0.0; n];
    let mut s = TransportState::uniform(n, 0.5 * p.c0, &p);
    s.c_l[0] = p.c0;
    let coupled = staggered_step(&tr, &s, 5.0, 1e-4, 10, |_| Ok((zero.clone(), zero.clone()))).unwrap();
    let plain = tr.step(&s, &zero, &zero, 5.0).unwrap();
    assert_eq!(coupled.state, plain);
    assert!(coupled.passes <= 2);
}
