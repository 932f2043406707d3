//! Case files: a TOML description of mesh, materials, boundary conditions,
//! stepping, solver settings, outputs and optional hydrogen transport.
//!
//! ```toml
//! analysis = "plane-stress"          # plane-stress | plane-strain | solid
//!
//! [mesh.generate]                    # or `file = "part.mesh"`, or `inline = "..."`
//! kind = "rectangle"
//! size = [1.0, 1.0]
//! divisions = [2, 2]
//! element = "quad4"
//!
//! [[mesh.region]]                    # retag elements whose centroid lies in a box
//! tag = 2
//! min = [0.5, 0.0, 0.0]
//! max = [1.0, 1.0, 0.0]
//!
//! [[material]]
//! tags = [1, 2]                      # default: every element; generated meshes use tag 1
//! model = "linear-elastic"           # built-in name, or `plugin = "path"`
//! props = [70e9, 0.2]
//! # random_orientation = 7           # crystal models: one random grain per element
//!
//! [[dirichlet]]
//! set = "left"
//! component = "x"                    # x | y | z
//! value = 0.0
//! # rotation = { axis = [0, 0, 1], center = [0.5, 0.5, 1], angle_deg = 60 }
//!
//! [[traction]]
//! set = "right"
//! value = [1e6, 0.0]
//! ramp = "linear"                    # linear | constant
//!
//! [stepping]
//! increments = 10                    # or `dt = [...]`
//! time = 1.0
//!
//! [solver]
//! norm = "abaqus"                    # abaqus | comsol
//! tolerance = 5e-3
//!
//! [output]
//! force_displacement = { set = "right", component = "x" }
//! stress_strain = { component = "xx" }
//! ```
//!
//! Paths are relative to the case file. Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use constikit::materials::{builtin, builtin_info};
use constikit::plugin::load_plugin;
use constikit::Material;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::bc::{Load, Loading, Ramp, RotationSpec};
use crate::error::{FeError, Result};
use crate::generate::Generator;
use crate::hydrogen::TransportParams;
use crate::linalg::{BandLu, DenseLu, LinearSolver};
use crate::mesh::Mesh;
use crate::model::{Analysis, Model};
use crate::solver::{NormKind, SolverSettings};

/// Props slots holding the Bunge angles of crystal models.
const ORIENTATION_SLOTS: std::ops::Range<usize> = 9..12;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    #[serde(default)]
    pub title: Option<String>,
    pub analysis: Analysis,
    pub mesh: MeshSpec,
    #[serde(rename = "material")]
    pub materials: Vec<MaterialSpec>,
    #[serde(default)]
    pub dirichlet: Vec<DirichletSpec>,
    #[serde(default)]
    pub traction: Vec<LoadSpec>,
    #[serde(default)]
    pub nodal_force: Vec<LoadSpec>,
    pub stepping: Stepping,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub transport: Option<TransportSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub generate: Option<Generator>,
    #[serde(default)]
    pub inline: Option<String>,
    #[serde(default)]
    pub region: Vec<RegionSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub tag: u32,
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    #[serde(default)]
    pub tags: Option<Vec<u32>>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub plugin: Option<PathBuf>,
    pub props: Vec<f64>,
    #[serde(default)]
    pub random_orientation: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    X,
    Y,
    Z,
}

impl Component {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletSpec {
    pub set: String,
    #[serde(default)]
    pub component: Option<Component>,
    #[serde(default)]
    pub value: f64,
    #[serde(default)]
    pub rotation: Option<RotationSpec>,
    #[serde(default)]
    pub ramp: Ramp,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSpec {
    pub set: String,
    pub value: Vec<f64>,
    #[serde(default)]
    pub ramp: Ramp,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stepping {
    #[serde(default)]
    pub increments: Option<usize>,
    #[serde(default)]
    pub time: Option<f64>,
    #[serde(default)]
    pub dt: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearKind {
    #[default]
    BandLu,
    DenseLu,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub norm: Option<NormKind>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub max_cuts: Option<usize>,
    #[serde(default)]
    pub linear: LinearKind,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceDisplacementSpec {
    pub set: String,
    pub component: Component,
}

/// Stress and strain component names in UMAT slot order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorComponent {
    Xx,
    Yy,
    Zz,
    Xy,
    Xz,
    Yz,
}

impl TensorComponent {
    /// Slot in UMAT order `(xx, yy, zz, xy, xz, yz)`.
    pub fn umat_slot(self) -> usize {
        self as usize
    }

    pub fn indices(self) -> (usize, usize) {
        match self {
            TensorComponent::Xx => (0, 0),
            TensorComponent::Yy => (1, 1),
            TensorComponent::Zz => (2, 2),
            TensorComponent::Xy => (0, 1),
            TensorComponent::Xz => (0, 2),
            TensorComponent::Yz => (1, 2),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressStrainSpec {
    pub component: TensorComponent,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub force_displacement: Option<ForceDisplacementSpec>,
    #[serde(default)]
    pub stress_strain: Option<StressStrainSpec>,
    #[serde(default = "yes")]
    pub fields: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            force_displacement: None,
            stress_strain: None,
            fields: true,
        }
    }
}

fn default_coupling_tol() -> f64 {
    1e-4
}

fn default_passes() -> usize {
    10
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSpec {
    #[serde(default)]
    pub d_l: Option<f64>,
    #[serde(default)]
    pub n_l: Option<f64>,
    #[serde(default)]
    pub v_h: Option<f64>,
    #[serde(default)]
    pub w_b: Option<f64>,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub c0: Option<f64>,
    /// Node set held at `c0`.
    #[serde(default)]
    pub fixed_set: Option<String>,
    #[serde(default = "default_coupling_tol")]
    pub coupling_tolerance: f64,
    #[serde(default = "default_passes")]
    pub max_passes: usize,
}

impl TransportSpec {
    /// Parameters with unset entries taken from the iron defaults.
    pub fn params(&self) -> TransportParams {
        let d = TransportParams::reference_defaults();
        TransportParams {
            d_l: self.d_l.unwrap_or(d.d_l),
            n_l: self.n_l.unwrap_or(d.n_l),
            v_h: self.v_h.unwrap_or(d.v_h),
            w_b: self.w_b.unwrap_or(d.w_b),
            temperature: self.temperature.unwrap_or(d.temperature),
            c0: self.c0.unwrap_or(d.c0),
        }
    }
}

/// Resolved hydrogen coupling settings.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportSetup {
    pub params: TransportParams,
    pub fixed_nodes: Vec<usize>,
    pub coupling_tolerance: f64,
    pub max_passes: usize,
}

/// A case ready to run.
pub struct Case {
    pub title: String,
    pub model: Model,
    pub loading: Loading,
    /// Time increments.
    pub schedule: Vec<f64>,
    pub settings: SolverSettings,
    pub linear: LinearKind,
    pub output: OutputSpec,
    pub transport: Option<TransportSetup>,
}

impl std::fmt::Debug for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Case")
            .field("title", &self.title)
            .field("model", &self.model)
            .field("increments", &self.schedule.len())
            .field("settings", &self.settings)
            .finish_non_exhaustive()
    }
}

impl Case {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, path)
    }

    /// Parses case text; `base` anchors relative paths and `origin` names the
    /// source in diagnostics.
    pub fn parse(text: &str, base: &Path, origin: &Path) -> Result<Self> {
        let file: CaseFile = toml::from_str(text).map_err(|e| FeError::CaseParse {
            path: origin.to_path_buf(),
            msg: e.to_string(),
        })?;
        let title = file.title.clone().unwrap_or_else(|| {
            origin
                .file_stem()
                .map_or("case".into(), |s| s.to_string_lossy().into_owned())
        });
        Self::build(file, base, title)
    }

    pub fn build(file: CaseFile, base: &Path, title: String) -> Result<Self> {
        let mesh = build_mesh(&file.mesh, base)?;
        let materials = assign_materials(&mesh, &file.materials, base)?;
        let loading = build_loading(&mesh, &file)?;
        let schedule = build_schedule(&file.stepping)?;
        let mut settings = SolverSettings::with_norm(file.solver.norm.unwrap_or(NormKind::Abaqus));
        if let Some(t) = file.solver.tolerance {
            settings.tolerance = t;
        }
        if let Some(m) = file.solver.max_iterations {
            settings.max_iterations = m;
        }
        if let Some(c) = file.solver.max_cuts {
            settings.max_cuts = c;
        }
        if let Some(fd) = &file.output.force_displacement {
            mesh.set(&fd.set).map_err(|_| unknown_set("output.force_displacement.set", &fd.set))?;
            check_component("output.force_displacement.component", fd.component, mesh.dim())?;
        }
        let transport = match &file.transport {
            None => None,
            Some(t) => {
                let params = t.params();
                params.validate()?;
                let fixed_nodes = match &t.fixed_set {
                    Some(s) => mesh
                        .set(s)
                        .map_err(|_| unknown_set("transport.fixed_set", s))?
                        .to_vec(),
                    None => Vec::new(),
                };
                if !(t.coupling_tolerance > 0.0) || t.max_passes == 0 {
                    return Err(FeError::Case(
                        "transport.coupling_tolerance and transport.max_passes must be positive"
                            .into(),
                    ));
                }
                Some(TransportSetup {
                    params,
                    fixed_nodes,
                    coupling_tolerance: t.coupling_tolerance,
                    max_passes: t.max_passes,
                })
            }
        };
        let model = Model::new(mesh, file.analysis, materials)?;
        Ok(Self {
            title,
            model,
            loading,
            schedule,
            settings,
            linear: file.solver.linear,
            output: file.output,
            transport,
        })
    }

    pub fn linear_solver(&self) -> Box<dyn LinearSolver> {
        match self.linear {
            LinearKind::BandLu => Box::new(BandLu),
            LinearKind::DenseLu => Box::new(DenseLu),
        }
    }
}

fn unknown_set(key: &str, name: &str) -> FeError {
    FeError::Case(format!("{key}: no node set named `{name}`"))
}

fn check_component(key: &str, c: Component, dim: usize) -> Result<()> {
    if c.index() < dim {
        Ok(())
    } else {
        Err(FeError::Case(format!("{key}: component {c:?} in a {dim}D mesh")))
    }
}

fn build_mesh(spec: &MeshSpec, base: &Path) -> Result<Mesh> {
    let mut mesh = match (&spec.file, &spec.generate, &spec.inline) {
        (Some(f), None, None) => Mesh::read(&base.join(f))?,
        (None, Some(g), None) => g.build()?,
        (None, None, Some(text)) => Mesh::parse(text)
            .map_err(|(line, msg)| FeError::Case(format!("mesh.inline line {line}: {msg}")))?,
        _ => {
            return Err(FeError::Case(
                "mesh: give exactly one of `file`, `generate` or `inline`".into(),
            ))
        }
    };
    for r in &spec.region {
        for e in 0..mesh.elements().len() {
            let coords = mesh.element_coords(e);
            let n = coords.len() as f64;
            let c: Vec<f64> = (0..3).map(|i| coords.iter().map(|x| x[i]).sum::<f64>() / n).collect();
            if (0..3).all(|i| c[i] >= r.min[i] && c[i] <= r.max[i]) {
                mesh.set_tag(e, r.tag);
            }
        }
    }
    Ok(mesh)
}

/// Uniformly random orientation as Bunge angles in degrees.
pub fn random_euler_deg(rng: &mut impl Rng) -> [f64; 3] {
    [
        rng.random_range(0.0..360.0),
        rng.random_range(-1.0f64..=1.0).acos().to_degrees(),
        rng.random_range(0.0..360.0),
    ]
}

fn instantiate(spec: &MaterialSpec, props: Vec<f64>, base: &Path) -> Result<Arc<dyn Material>> {
    match (&spec.model, &spec.plugin) {
        (Some(name), None) => {
            if builtin_info(name).is_none() {
                return Err(FeError::Case(format!("material.model: unknown built-in `{name}`")));
            }
            Ok(Arc::from(builtin(name, &props)?))
        }
        (None, Some(p)) => {
            let local = base.join(p);
            let path = if local.is_file() { local } else { p.clone() };
            Ok(Arc::new(load_plugin(&path, None, props)?))
        }
        _ => Err(FeError::Case(
            "material: give exactly one of `model` or `plugin`".into(),
        )),
    }
}

fn assign_materials(
    mesh: &Mesh,
    specs: &[MaterialSpec],
    base: &Path,
) -> Result<Vec<Arc<dyn Material>>> {
    if specs.is_empty() {
        return Err(FeError::Case("no [[material]] given".into()));
    }
    let mut assigned: Vec<Option<Arc<dyn Material>>> = vec![None; mesh.elements().len()];
    for (k, spec) in specs.iter().enumerate() {
        let targets: Vec<usize> = (0..mesh.elements().len())
            .filter(|&e| {
                spec.tags
                    .as_ref()
                    .is_none_or(|t| t.contains(&mesh.elements()[e].tag))
            })
            .collect();
        if targets.is_empty() {
            return Err(FeError::Case(format!("material #{}: tags match no element", k + 1)));
        }
        if let Some(&e) = targets.iter().find(|&&e| assigned[e].is_some()) {
            return Err(FeError::Case(format!(
                "material #{}: element {e} already has a material",
                k + 1
            )));
        }
        match spec.random_orientation {
            None => {
                let m = instantiate(spec, spec.props.clone(), base)?;
                for e in targets {
                    assigned[e] = Some(m.clone());
                }
            }
            Some(seed) => {
                if spec.props.len() < ORIENTATION_SLOTS.end {
                    return Err(FeError::Case(format!(
                        "material #{}: random_orientation needs Bunge angles in props[9..12]",
                        k + 1
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for e in targets {
                    let mut props = spec.props.clone();
                    props[ORIENTATION_SLOTS].copy_from_slice(&random_euler_deg(&mut rng));
                    assigned[e] = Some(instantiate(spec, props, base)?);
                }
            }
        }
    }
    assigned
        .into_iter()
        .enumerate()
        .map(|(e, m)| {
            m.ok_or_else(|| {
                FeError::Case(format!(
                    "element {e} (tag {}) has no material",
                    mesh.elements()[e].tag
                ))
            })
        })
        .collect()
}

fn build_loading(mesh: &Mesh, file: &CaseFile) -> Result<Loading> {
    let d = mesh.dim();
    let mut loading = Loading::new(d);
    for (k, bc) in file.dirichlet.iter().enumerate() {
        let key = format!("dirichlet #{}", k + 1);
        let nodes = mesh.set(&bc.set).map_err(|_| unknown_set(&format!("{key}.set"), &bc.set))?;
        match (&bc.rotation, bc.component) {
            (Some(rot), None) => loading
                .rotate(nodes, rot.clone(), bc.ramp)
                .map_err(|e| FeError::Case(format!("{key}.rotation: {e}")))?,
            (None, Some(c)) => {
                check_component(&format!("{key}.component"), c, d)?;
                loading.fix(nodes, c.index(), bc.value, bc.ramp)?
            }
            _ => {
                return Err(FeError::Case(format!(
                    "{key}: give exactly one of `component` or `rotation`"
                )))
            }
        }
    }
    for (k, t) in file.traction.iter().enumerate() {
        let nodes = mesh
            .set(&t.set)
            .map_err(|_| unknown_set(&format!("traction #{}.set", k + 1), &t.set))?;
        let base = Loading::traction(mesh, nodes, &t.value)
            .map_err(|e| FeError::Case(format!("traction #{}: {e}", k + 1)))?;
        loading.add_load(Load { base, ramp: t.ramp });
    }
    for (k, f) in file.nodal_force.iter().enumerate() {
        let nodes = mesh
            .set(&f.set)
            .map_err(|_| unknown_set(&format!("nodal_force #{}.set", k + 1), &f.set))?;
        let base = Loading::nodal_force(mesh, nodes, &f.value)
            .map_err(|e| FeError::Case(format!("nodal_force #{}: {e}", k + 1)))?;
        loading.add_load(Load { base, ramp: f.ramp });
    }
    Ok(loading)
}

fn build_schedule(s: &Stepping) -> Result<Vec<f64>> {
    let dts = match (s.increments, &s.dt) {
        (Some(n), None) if n > 0 => vec![s.time.unwrap_or(1.0) / n as f64; n],
        (None, Some(dt)) if s.time.is_none() => dt.clone(),
        _ => {
            return Err(FeError::Case(
                "stepping: give `increments` (with optional `time`) or `dt`".into(),
            ))
        }
    };
    if dts.is_empty() || dts.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(FeError::Case("stepping: increments must be positive".into()));
    }
    Ok(dts)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
analysis = "plane-strain"

[mesh.generate]
kind = "rectangle"
size = [1.0, 1.0]
divisions = [2, 2]
element = "quad4"

[[material]]
model = "linear-elastic"
props = [1e6, 0.3]

[[dirichlet]]
set = "left"
component = "x"

[[dirichlet]]
set = "origin"
component = "y"

[[traction]]
set = "right"
value = [1e3, 0.0]

[stepping]
increments = 2
"#;

    fn parse(text: &str) -> Result<Case> {
        Case::parse(text, Path::new("."), Path::new("test.toml"))
    }

    #[test]
    fn minimal_case_builds() {
        let c = parse(SMALL).unwrap();
        assert_eq!(c.schedule, vec![0.5, 0.5]);
        assert_eq!(c.settings.norm, NormKind::Abaqus);
        assert_eq!(c.settings.tolerance, 5e-3);
        assert_eq!(c.model.mesh().elements().len(), 4);
        assert_eq!(c.title, "test");
    }

    #[test]
    fn unknown_key_is_named_with_position() {
        let bad = SMALL.replace("increments = 2", "increments = 2\nincrement_size = 3");
        let msg = parse(&bad).unwrap_err().to_string();
        assert!(msg.contains("increment_size"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn unknown_set_is_named() {
        let bad = SMALL.replace("set = \"right\"", "set = \"rigth\"");
        let msg = parse(&bad).unwrap_err().to_string();
        assert!(msg.contains("traction #1.set") && msg.contains("rigth"), "{msg}");
    }

    #[test]
    fn regions_and_random_orientations_assign_per_element() {
        let text = r#"
analysis = "solid"
[mesh.generate]
kind = "block"
size = [1.0, 1.0, 1.0]
divisions = [2, 1, 1]
element = "hex8"
[[mesh.region]]
tag = 2
min = [0.5, 0.0, 0.0]
max = [1.0, 1.0, 1.0]
[[material]]
tags = [1]
model = "linear-elastic"
props = [1e6, 0.3]
[[material]]
tags = [2]
model = "crystal-fcc"
props = [168.4e9, 121.4e9, 75.4e9, 0.001, 10, 541.4e6, 109.5e6, 60.8e6, 1, 0, 0, 0]
random_orientation = 3
[stepping]
dt = [1.0]
"#;
        // mixed regimes are rejected once materials are known
        let mixed = parse(text);
        assert!(mixed.is_err(), "{:?}", mixed.map(|c| c.model.mesh().tags()));
        let ok = text.replace("model = \"linear-elastic\"\nprops = [1e6, 0.3]", "model = \"crystal-fcc\"\nprops = [168.4e9, 121.4e9, 75.4e9, 0.001, 10, 541.4e6, 109.5e6, 60.8e6, 1, 0, 0, 0]");
        let c = parse(&ok).unwrap();
        assert_eq!(c.model.material(0).props()[9], 0.0);
        assert!(c.model.material(1).props()[9] != 0.0);
    }

    #[test]
    fn random_angles_are_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let [a, b, c] = random_euler_deg(&mut rng);
            assert!((0.0..360.0).contains(&a) && (0.0..=180.0).contains(&b) && (0.0..360.0).contains(&c));
        }
    }
}
