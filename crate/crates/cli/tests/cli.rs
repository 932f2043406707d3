use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn constikit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_constikit"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn cases() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases")
}

fn case(name: &str) -> String {
    cases().join(format!("{name}.toml")).to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value printed after "max relative error".
fn max_error(o: &Output) -> f64 {
    let text = stdout(o);
    let tail = text.split("max relative error ").nth(1).unwrap();
    tail.split(',').next().unwrap().trim().parse().unwrap()
}

#[test]
fn tangent_check_accepts_builtin_models() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = constikit(
        &["tangent-check", "--material", "neo-hookean", "--samples", "20", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(max_error(&o) <= 1e-4);
    let csv = std::fs::read_to_string(out.join("tangent-check.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);

    let o = constikit(&["tangent-check", "--material", "linear-elastic", "--regime", "small"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(max_error(&o) <= 1e-12);
}

#[test]
fn tangent_check_flags_a_scaled_tangent() {
    let dir = tempfile::tempdir().unwrap();
    let o = constikit(
        &["tangent-check", "--material", "neo-hookean", "--scale-tangent", "1.01"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("worst is sample"));
}

#[test]
fn tangent_check_rejects_a_regime_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let o = constikit(&["tangent-check", "--material", "neo-hookean", "--regime", "small"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_writes_only_into_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = constikit(&["run", "--case", &case("plate_with_hole"), "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries, vec![std::ffi::OsString::from("res")]);
    for f in ["trace.csv", "reactions.csv", "force-displacement.csv", "fields.txt"] {
        assert!(dir.path().join("res").join(f).is_file(), "{f}");
    }
}

#[test]
fn single_crystal_curve_has_twenty_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = constikit(&["run", "--case", &case("single_crystal"), "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("res/stress-strain.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn malformed_case_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(case("single_crystal")).unwrap().replace("increments = 20", "incremnts = 20");
    std::fs::write(dir.path().join("bad.toml"), text).unwrap();
    let o = constikit(&["run", "--case", "bad.toml", "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("incremnts"), "{}", stderr(&o));
}

#[test]
fn failed_increment_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(case("single_crystal"))
        .unwrap()
        .replace("value = 0.05", "value = 0.5")
        + "\n[solver]\nmax_iterations = 1\nmax_cuts = 0\ntolerance = 1e-12\n";
    std::fs::write(dir.path().join("hard.toml"), text).unwrap();
    let o = constikit(&["run", "--case", "hard.toml", "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(dir.path().join("res/trace.csv").is_file());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = constikit(&["run", "--case", &case("polycrystal"), "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["trace.csv", "reactions.csv", "stress-strain.csv", "force-displacement.csv", "fields.txt"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f}");
    }
}

fn lattice_column(path: &Path) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let col = r.headers().unwrap().iter().position(|h| h == "c_l").unwrap();
    r.records().map(|rec| rec.unwrap()[col].parse().unwrap()).collect()
}

#[test]
fn hydrogen_demo_and_its_unloaded_variant() {
    let dir = tempfile::tempdir().unwrap();
    let o = constikit(&["demo", "hydrogen", "--out", "h"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let corr: f64 = stdout(&o)
        .split("corr(C_L, sigma_h) = ")
        .nth(1)
        .and_then(|t| t.lines().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(corr > 0.9);
    let loaded = lattice_column(&dir.path().join("h/hydrogen.csv"));
    assert!(loaded.iter().any(|c| *c > 0.00346 * 1.01));

    let o = constikit(&["demo", "hydrogen", "--out", "h0", "--zero-load"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    // unstressed strip that starts at the boundary value stays there
    let plain = lattice_column(&dir.path().join("h0/hydrogen.csv"));
    assert!(plain.iter().all(|c| (c / 0.00346 - 1.0).abs() < 1e-12));
}

#[test]
fn material_listing_and_plugin_info() {
    let dir = tempfile::tempdir().unwrap();
    let o = constikit(&["material", "list"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    for name in ["linear-elastic", "j2-plasticity", "saint-venant-kirchhoff", "neo-hookean", "crystal-fcc"] {
        assert!(stdout(&o).contains(name));
    }
    let o = constikit(&["material", "info", "crystal-fcc"], dir.path());
    assert!(stdout(&o).contains("nstatv      34"));
    let o = constikit(&["material", "info", "no-such-model"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let libdir = dir.path().join("plugins");
    std::fs::create_dir(&libdir).unwrap();
    let lib = libdir.join(libloading_name("linear_elastic"));
    let source = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/linear_elastic.c");
    let status = Command::new("cc")
        .args(["-shared", "-fPIC", "-O2", "-o"])
        .arg(&lib)
        .arg(source)
        .status()
        .expect("a C compiler is available as `cc`");
    assert!(status.success());
    std::fs::write(
        lib.with_extension("toml"),
        "name = \"linear-elastic\"\nnprops = 2\nnstatv_user = 0\nregime = \"small-strain\"\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_constikit"))
        .args(["tangent-check", "--plugin", "linear_elastic", "--props", "70e9,0.2"])
        .env("CONSTIKIT_PLUGIN_PATH", &libdir)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_constikit"))
        .args(["material", "info", "--plugin", "linear_elastic"])
        .env("CONSTIKIT_PLUGIN_PATH", &libdir)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(stdout(&o).contains("small-strain"), "{}", stderr(&o));
}

fn libloading_name(stem: &str) -> String {
    format!("{}{stem}{}", std::env::consts::DLL_PREFIX, std::env::consts::DLL_SUFFIX)
}
