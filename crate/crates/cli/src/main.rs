//! `constikit` command-line front end.
//!
//! Exit codes: 0 success, 1 bad arguments or unreadable case, 2 tangent
//! check violation, 3 solver failure.

mod check;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use constikit::materials::{builtin, builtin_info, builtin_list, CrystalParams};
use constikit::plugin::{load_plugin, PluginMetadata, PLUGIN_PATH_VAR};
use constikit::{Material, MaterialInfo, Regime};
use constikit_fe::case::Case;
use constikit_fe::error::FeError;
use constikit_fe::hydrogen::correlation;
use constikit_fe::output::write_results;
use constikit_fe::run::{run_case, RunResults};

const PARSE: u8 = 1;
const TANGENT: u8 = 2;
const SOLVER: u8 = 3;

const HYDROGEN_CASE: &str = include_str!("../../../cases/hydrogen_strip.toml");
const HYDROGEN_LOAD: &str = "value = 1.6e-5";

#[derive(Parser)]
#[command(name = "constikit", version, about = "Constitutive-model bridge, FE driver and hydrogen demo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare a material's bridged tangent with finite differences.
    TangentCheck {
        /// Built-in material name.
        #[arg(long, conflicts_with = "plugin", required_unless_present = "plugin")]
        material: Option<String>,
        /// Plugin library; bare names are searched in $CONSTIKIT_PLUGIN_PATH.
        #[arg(long)]
        plugin: Option<PathBuf>,
        /// Comma-separated property vector; built-ins have defaults.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        props: Option<Vec<f64>>,
        /// Required regime; rejected when the material uses the other one.
        #[arg(long, value_parser = parse_regime)]
        regime: Option<Regime>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Largest accepted relative Frobenius error.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Directory for `tangent-check.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true, default_value_t = 1.0)]
        scale_tangent: f64,
    },
    /// Solve a case file and write its results.
    Run {
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inspect materials.
    Material {
        #[command(subcommand)]
        action: MaterialAction,
    },
    /// Bundled demonstrations.
    Demo {
        #[command(subcommand)]
        demo: Demo,
    },
}

#[derive(Subcommand)]
enum MaterialAction {
    /// List the built-in materials.
    List,
    /// Show the interface of a built-in material or a plugin.
    Info {
        #[arg(conflicts_with = "plugin", required_unless_present = "plugin")]
        name: Option<String>,
        #[arg(long)]
        plugin: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// Strained strip with hydrogen drifting toward tension.
    Hydrogen {
        #[arg(long)]
        out: PathBuf,
        /// Run without mechanical load (pure diffusion).
        #[arg(long)]
        zero_load: bool,
    },
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    match s {
        "small" | "small-strain" => Ok(Regime::SmallStrain),
        "finite" | "finite-strain" => Ok(Regime::FiniteStrain),
        _ => Err(format!("unknown regime `{s}` (small | finite)")),
    }
}

fn default_props(name: &str) -> Option<Vec<f64>> {
    Some(match name {
        "linear-elastic" => vec![70e9, 0.2],
        "j2-plasticity" => vec![70e9, 0.2, 243e6, 2171e6],
        "saint-venant-kirchhoff" | "neo-hookean" => vec![1e6, 0.3],
        "crystal-fcc" => CrystalParams::reference_defaults().to_props(),
        _ => return None,
    })
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

impl From<FeError> for Failure {
    fn from(e: FeError) -> Self {
        let code = match e {
            FeError::NotConverged { .. } | FeError::Singular(_) | FeError::Material { .. } | FeError::Jacobian { .. } => {
                SOLVER
            }
            _ => PARSE,
        };
        fail(code, e.to_string())
    }
}

fn load_material(name: Option<&str>, plugin: Option<&Path>, props: Option<Vec<f64>>) -> Result<Box<dyn Material>, Failure> {
    match (name, plugin) {
        (Some(n), _) => {
            let props = props
                .or_else(|| default_props(n))
                .ok_or_else(|| fail(PARSE, format!("unknown material `{n}`; see `constikit material list`")))?;
            builtin(n, &props).map_err(|e| fail(PARSE, e.to_string()))
        }
        (None, Some(p)) => {
            let props = props.ok_or_else(|| fail(PARSE, "--props is required with --plugin"))?;
            Ok(Box::new(load_plugin(p, None, props).map_err(|e| fail(PARSE, e.to_string()))?))
        }
        (None, None) => Err(fail(PARSE, "give --material or --plugin")),
    }
}

#[allow(clippy::too_many_arguments)]
fn tangent_check(
    material: Option<String>,
    plugin: Option<PathBuf>,
    props: Option<Vec<f64>>,
    regime: Option<Regime>,
    settings: check::Settings,
    tol: f64,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let m = load_material(material.as_deref(), plugin.as_deref(), props)?;
    if let Some(r) = regime {
        if r != m.regime() {
            return Err(fail(PARSE, format!("{} is a {} model, not {r}", m.name(), m.regime())));
        }
    }
    let samples = check::run(m.as_ref(), &settings).map_err(|e| fail(TANGENT, e.to_string()))?;
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir).map_err(|e| fail(PARSE, e.to_string()))?;
        write_samples(&dir.join("tangent-check.csv"), &samples).map_err(|e| fail(PARSE, e.to_string()))?;
    }
    let worst = samples
        .iter()
        .max_by(|a, b| a.error.total_cmp(&b.error))
        .ok_or_else(|| fail(PARSE, "--samples must be positive"))?;
    let bad = samples.iter().filter(|s| !(s.error <= tol)).count();
    println!(
        "{} ({}): {} samples, max relative error {:.3e}, tolerance {tol:e}",
        m.name(),
        m.regime(),
        samples.len(),
        worst.error
    );
    if bad > 0 {
        return Err(fail(
            TANGENT,
            format!(
                "{bad} samples exceed the tolerance; worst is sample {} with input {:?}",
                worst.index, worst.input
            ),
        ));
    }
    Ok(())
}

fn write_samples(path: &Path, samples: &[check::Sample]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sample", "error", "input"])?;
    for s in samples {
        let input: Vec<String> = s.input.iter().map(|v| v.to_string()).collect();
        w.write_record([s.index.to_string(), s.error.to_string(), input.join(" ")])?;
    }
    w.flush()?;
    Ok(())
}

fn finish(case: &Case, results: &RunResults, out: &Path) -> Result<(), Failure> {
    let files = write_results(out, case.model.mesh(), results)?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    match &results.output.failure {
        Some(e) => Err(fail(SOLVER, e.to_string())),
        None => Ok(()),
    }
}

fn run(case_path: &Path, out: &Path) -> Result<(), Failure> {
    let case = Case::load(case_path)?;
    let results = run_case(&case)?;
    let trace = &results.output.trace;
    let its = trace.converged().map(|a| a.iterations()).max().unwrap_or(0);
    println!(
        "{}: {} increments, at most {its} iterations",
        case.title,
        trace.converged().count()
    );
    finish(&case, &results, out)
}

fn demo_hydrogen(out: &Path, zero_load: bool) -> Result<(), Failure> {
    let text = if zero_load {
        assert!(HYDROGEN_CASE.contains(HYDROGEN_LOAD), "bundled load line moved");
        HYDROGEN_CASE.replace(HYDROGEN_LOAD, "value = 0.0")
    } else {
        HYDROGEN_CASE.to_string()
    };
    let case = Case::parse(&text, Path::new("."), Path::new("hydrogen_strip.toml"))?;
    let results = run_case(&case)?;
    if let Some(last) = results.transport.last() {
        let s = &last.state;
        let lo = s.c_l.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = s.c_l.iter().copied().fold(0.0, f64::max);
        println!("C_L range {lo:.6e} .. {hi:.6e} mol/m3 after {} steps", results.transport.len());
        if !zero_load {
            println!("corr(C_L, sigma_h) = {:.5}", correlation(&s.c_l, &s.sigma_h));
        }
    }
    finish(&case, &results, out)
}

fn print_info(info: &MaterialInfo, props: Option<&[f64]>) {
    println!("name        {}", info.name);
    println!("regime      {}", info.regime);
    println!("nprops      {}", info.nprops);
    println!("nstatv      {}", info.nstatv_user);
    if let Some(p) = props {
        println!("defaults    {p:?}");
    }
}

fn material(action: MaterialAction) -> Result<(), Failure> {
    match action {
        MaterialAction::List => {
            for m in builtin_list() {
                println!("{:<24} {:<13} nprops {:<3} nstatv {}", m.name, m.regime.to_string(), m.nprops, m.nstatv_user);
            }
            Ok(())
        }
        MaterialAction::Info { name: Some(n), .. } => {
            let info = builtin_info(&n).ok_or_else(|| fail(PARSE, format!("unknown material `{n}`")))?;
            print_info(&info, default_props(&n).as_deref());
            Ok(())
        }
        MaterialAction::Info { plugin: Some(p), .. } => {
            let path = constikit::plugin::resolve_plugin_path(&p).map_err(|e| fail(PARSE, e.to_string()))?;
            let meta = PluginMetadata::read(&constikit::plugin::sidecar_path(&path))
                .map_err(|e| fail(PARSE, format!("{e} (searched {PLUGIN_PATH_VAR} too)")))?;
            println!("path        {}", path.display());
            print_info(&meta.info(), None);
            Ok(())
        }
        MaterialAction::Info { .. } => Err(fail(PARSE, "give a material name or --plugin")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { PARSE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::TangentCheck {
            material,
            plugin,
            props,
            regime,
            samples,
            seed,
            tol,
            out,
            scale_tangent,
        } => tangent_check(
            material,
            plugin,
            props,
            regime,
            check::Settings {
                samples,
                seed,
                scale: scale_tangent,
            },
            tol,
            out,
        ),
        Command::Run { case, out } => run(&case, &out),
        Command::Material { action } => material(action),
        Command::Demo {
            demo: Demo::Hydrogen { out, zero_load },
        } => demo_hydrogen(&out, zero_load),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
