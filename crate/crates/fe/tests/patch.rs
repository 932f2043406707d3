use std::collections::BTreeMap;
use std::sync::Arc;

use constikit::materials::{builtin, ElasticConstants};
use constikit::Material;
use constikit_fe::bc::{Loading, Ramp};
use constikit_fe::generate::{block, rectangle};
use constikit_fe::mesh::{Element, ElementType, Mesh};
use constikit_fe::model::{Analysis, Model};
use constikit_fe::solver::{Solver, SolverSettings};
use nalgebra::{Matrix3, Vector3};

const E: f64 = 2e5;
const NU: f64 = 0.25;

fn elastic() -> Arc<dyn Material> {
    Arc::from(builtin("linear-elastic", &[E, NU]).unwrap())
}

fn affine() -> Matrix3<f64> {
    Matrix3::new(1.0e-3, 2.0e-4, -3.0e-4, -1.0e-4, 5.0e-4, 2.5e-4, 4.0e-4, -2.0e-4, -6.0e-4)
}

/// Moves interior nodes by a smooth, deterministic offset.
fn distort(mesh: &Mesh, size: f64) -> Mesh {
    let d = mesh.dim();
    let on_boundary = |x: &[f64; 3]| (0..d).any(|i| x[i].abs() < 1e-12 || (x[i] - 1.0).abs() < 1e-12);
    let nodes: Vec<[f64; 3]> = mesh
        .nodes()
        .iter()
        .map(|x| {
            if on_boundary(x) {
                *x
            } else {
                let mut y = *x;
                for i in 0..d {
                    y[i] += size * (3.1 * x[0] + 1.7 * x[1] + 2.3 * x[2] + i as f64).sin();
                }
                y
            }
        })
        .collect();
    Mesh::new(d, nodes, mesh.elements().to_vec(), mesh.sets().clone()).unwrap()
}

fn patch_test(mesh: Mesh) {
    let d = mesh.dim();
    let kind = mesh.elements()[0].kind;
    let analysis = if d == 2 { Analysis::PlaneStrain } else { Analysis::Solid };
    let a = affine();
    let boundary = mesh.nodes_where(|x| (0..d).any(|i| x[i].abs() < 1e-12 || (x[i] - 1.0).abs() < 1e-12));
    let mut loading = Loading::new(d);
    for &n in &boundary {
        let x = mesh.nodes()[n];
        let u = a * Vector3::new(x[0], x[1], x[2]);
        for c in 0..d {
            loading.fix(&[n], c, u[c], Ramp::Linear).unwrap();
        }
    }
    let n = mesh.elements().len();
    let model = Model::new(mesh, analysis, vec![elastic(); n]).unwrap();
    let out = Solver::new(&model, &loading, SolverSettings::default())
        .unwrap()
        .solve(&[1.0])
        .unwrap();
    assert!(out.completed());
    let u = out.final_u();
    for (k, x) in model.mesh().nodes().iter().enumerate() {
        let exact = a * Vector3::new(x[0], x[1], x[2]);
        for c in 0..d {
            assert!(
                (u[k * d + c] - exact[c]).abs() < 1e-10 * 1e-3,
                "{kind:?} node {k} comp {c}: {} vs {}",
                u[k * d + c],
                exact[c]
            );
        }
    }
    // interior residual
    let r = &out.increments[0];
    let scale = r.f_int.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for dof in 0..model.ndof() {
        if !loading.is_constrained(dof) {
            assert!(r.f_int[dof].abs() <= 1e-10 * scale, "{kind:?} dof {dof}");
        }
    }
    // constant stress at every point
    let first = Model::cauchy(&out.states[0][0]);
    for pts in &out.states {
        for p in pts {
            let s = Model::cauchy(p);
            for i in 0..6 {
                assert!((s[i] - first[i]).abs() <= 1e-8 * first.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            }
        }
    }
}

#[test]
fn planar_patch_tests() {
    for kind in [ElementType::Tri3, ElementType::Tri6, ElementType::Quad4] {
        patch_test(distort(&rectangle([1.0, 1.0], [3, 3], kind).unwrap(), 0.04));
    }
}

#[test]
fn solid_patch_tests() {
    for kind in [ElementType::Tet4, ElementType::Tet10, ElementType::Hex8] {
        patch_test(distort(&block([1.0; 3], [2, 2, 2], kind).unwrap(), 0.03));
    }
}

#[test]
fn tetrahedron_split_around_an_interior_node() {
    let nodes = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.2, 0.25, 0.22],
    ];
    let tets = [[0, 1, 2, 4], [0, 3, 1, 4], [0, 2, 3, 4], [1, 3, 2, 4]];
    let elements: Vec<Element> = tets
        .iter()
        .map(|t| Element {
            kind: ElementType::Tet4,
            nodes: t.to_vec(),
            tag: 1,
        })
        .collect();
    let mesh = Mesh::new(3, nodes, elements, BTreeMap::new()).unwrap();
    let a = affine();
    let mut loading = Loading::new(3);
    for n in 0..4 {
        let x = mesh.nodes()[n];
        let u = a * Vector3::new(x[0], x[1], x[2]);
        for c in 0..3 {
            loading.fix(&[n], c, u[c], Ramp::Linear).unwrap();
        }
    }
    let model = Model::new(mesh, Analysis::Solid, vec![elastic(); 4]).unwrap();
    let out = Solver::new(&model, &loading, SolverSettings::default())
        .unwrap()
        .solve(&[1.0])
        .unwrap();
    let x = model.mesh().nodes()[4];
    let exact = a * Vector3::new(x[0], x[1], x[2]);
    for c in 0..3 {
        assert!((out.final_u()[12 + c] - exact[c]).abs() < 1e-15);
    }
}

#[test]
fn single_tet4_force_matches_hand_assembly() {
    let nodes = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let el = Element {
        kind: ElementType::Tet4,
        nodes: vec![0, 1, 2, 3],
        tag: 1,
    };
    let mesh = Mesh::new(3, nodes.clone(), vec![el], BTreeMap::new()).unwrap();
    let model = Model::new(mesh, Analysis::Solid, vec![elastic()]).unwrap();
    let a = affine();
    let mut u = vec![0.0; 12];
    for (k, x) in nodes.iter().enumerate() {
        let v = a * Vector3::new(x[0], x[1], x[2]);
        u[3 * k..3 * k + 3].copy_from_slice(v.as_slice());
    }
    let states = model.initial_states().unwrap();
    let resp = model.element_response(0, &u, &states[0], 1.0).unwrap();
    // σ = λ tr(ε) I + 2μ ε, f_a = V σ ∇N_a with V = 1/6
    let eps = (a + a.transpose()) * 0.5;
    let ElasticConstants::Isotropic { e, nu } = ElasticConstants::isotropic(E, NU).unwrap() else {
        unreachable!()
    };
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let sigma = Matrix3::identity() * (lambda * eps.trace()) + eps * (2.0 * mu);
    let grads = [
        Vector3::new(-1.0, -1.0, -1.0),
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.0, 1.0, 0.0),
        Vector3::new(0.0, 0.0, 1.0),
    ];
    for (k, g) in grads.iter().enumerate() {
        let f = sigma * g / 6.0;
        for c in 0..3 {
            let got = resp.f_int[3 * k + c];
            assert!((got - f[c]).abs() <= 1e-12 * sigma.amax(), "node {k} comp {c}: {got} vs {}", f[c]);
        }
    }
}

#[test]
fn zero_displacement_residual_is_minus_external_force() {
    let mesh = rectangle([1.0, 1.0], [2, 2], ElementType::Quad4).unwrap();
    let f = Loading::traction(&mesh, mesh.set("right").unwrap(), &[3.0, 0.0]).unwrap();
    let model = Model::new(mesh, Analysis::PlaneStress, vec![elastic(); 4]).unwrap();
    let states = model.initial_states().unwrap();
    let (f_int, _) = model.assemble(&vec![0.0; model.ndof()], &states, 1.0).unwrap();
    for (fi, fe) in f_int.iter().zip(&f) {
        assert_eq!(fi - fe, -fe);
    }
}
