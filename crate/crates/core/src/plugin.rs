//! Material models loaded from shared libraries.
//!
//! A plugin exports one C-ABI function, `umat_entry`, taking every argument
//! by pointer in this order:
//!
//! | # | argument | type | direction |
//! |---|----------|------|-----------|
//! | 1 | `stress[6]` | `f64` | in/out |
//! | 2 | `statev[nstatv]` | `f64` | in/out |
//! | 3 | `ddsdde[36]` column-major | `f64` | out |
//! | 4 | `stran[6]` | `f64` | in |
//! | 5 | `dstran[6]` | `f64` | in |
//! | 6 | `time[2]` (step time, total time) | `f64` | in |
//! | 7 | `dtime` | `f64` | in |
//! | 8 | `props[nprops]` | `f64` | in |
//! | 9 | `nprops` | `i32` | in |
//! | 10 | `nstatv` | `i32` | in |
//! | 11 | `dfgrd0[9]` column-major | `f64` | in |
//! | 12 | `dfgrd1[9]` column-major | `f64` | in |
//! | 13 | `drot[9]` column-major | `f64` | in |
//! | 14 | `ntens` (always 6) | `i32` | in |
//! | 15 | `status` (0 = ok) | `i32` | out |
//!
//! Vectors use UMAT slot order with engineering shear strains; all
//! quantities are SI. Plugins must be reentrant: the host may call them from
//! several threads at once with disjoint arrays.
//!
//! Each library comes with a metadata sidecar, `<library stem>.toml`:
//!
//! ```toml
//! name = "my-model"
//! nprops = 2
//! nstatv_user = 0
//! regime = "finite-strain"
//! ```

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use libloading::Library;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material_api::{Material, MaterialInfo, Regime, UmatCall, UmatResult};
use crate::tensor::Tensor2;
use crate::voigt::{from_column_major, UmatStress};

pub const ENTRY_SYMBOL: &str = "umat_entry";
pub const PLUGIN_PATH_VAR: &str = "CONSTIKIT_PLUGIN_PATH";

type UmatEntry = unsafe extern "C" fn(
    stress: *mut f64,
    statev: *mut f64,
    ddsdde: *mut f64,
    stran: *const f64,
    dstran: *const f64,
    time: *const f64,
    dtime: *const f64,
    props: *const f64,
    nprops: *const i32,
    nstatv: *const i32,
    dfgrd0: *const f64,
    dfgrd1: *const f64,
    drot: *const f64,
    ntens: *const i32,
    status: *mut i32,
);

/// Contents of a plugin sidecar file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PluginMetadata {
    pub name: String,
    pub nprops: usize,
    pub nstatv_user: usize,
    pub regime: Regime,
}

impl PluginMetadata {
    pub fn parse(text: &str) -> Result<Self> {
        let meta: Self = toml::from_str(text).map_err(|e| Error::Metadata(e.to_string()))?;
        if meta.name.is_empty() {
            return Err(Error::Metadata("empty plugin name".into()));
        }
        if meta.nprops > i32::MAX as usize || meta.nstatv_user > i32::MAX as usize {
            return Err(Error::Metadata("array sizes exceed the 32-bit range".into()));
        }
        Ok(meta)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Metadata(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("metadata serializes")
    }

    pub fn info(&self) -> MaterialInfo {
        MaterialInfo {
            name: self.name.clone(),
            nprops: self.nprops,
            nstatv_user: self.nstatv_user,
            regime: self.regime,
        }
    }
}

/// Sidecar location for a library: same directory and stem, `.toml` extension.
pub fn sidecar_path(library: &Path) -> PathBuf {
    library.with_extension("toml")
}

/// Resolves a plugin reference. Existing paths are used as given; otherwise
/// each directory of `CONSTIKIT_PLUGIN_PATH` is searched for the name itself
/// and for the platform library file name built from it (`lib<name>.so` on
/// Linux).
pub fn resolve_plugin_path(reference: &Path) -> Result<PathBuf> {
    if reference.is_file() {
        return Ok(reference.to_path_buf());
    }
    let search = std::env::var_os(PLUGIN_PATH_VAR).unwrap_or_default();
    let mut candidates: Vec<OsString> = vec![reference.as_os_str().to_owned()];
    if let Some(name) = reference.to_str() {
        candidates.push(libloading::library_filename(name));
    }
    for dir in std::env::split_paths(&search) {
        for c in &candidates {
            let p = dir.join(c);
            if p.is_file() {
                return Ok(p);
            }
        }
    }
    Err(Error::PluginLoad {
        path: reference.to_path_buf(),
        reason: format!("file not found (also searched {PLUGIN_PATH_VAR})"),
    })
}

/// A loaded plugin library bound to a property vector.
///
/// Every handle owns its own library reference, so a handle created after a
/// plugin file was replaced runs the new code.
pub struct PluginHandle {
    path: PathBuf,
    meta: PluginMetadata,
    props: Vec<f64>,
    entry: UmatEntry,
    // Keeps `entry` valid; dropped last.
    _library: Library,
}

impl std::fmt::Debug for PluginHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PluginHandle")
            .field("path", &self.path)
            .field("meta", &self.meta)
            .finish_non_exhaustive()
    }
}

/// Loads the library at `path`. Metadata comes from the sidecar; when
/// `expected` is given it must agree with the sidecar, or stands in for it
/// if there is none.
pub fn load_plugin(
    path: &Path,
    expected: Option<&PluginMetadata>,
    props: Vec<f64>,
) -> Result<PluginHandle> {
    let path = resolve_plugin_path(path)?;
    let sidecar = sidecar_path(&path);
    let meta = match (sidecar.is_file(), expected) {
        (true, Some(exp)) => {
            let found = PluginMetadata::read(&sidecar)?;
            if &found != exp {
                return Err(Error::ContractViolation(format!(
                    "plugin metadata {found:?} does not match the expected {exp:?}"
                )));
            }
            found
        }
        (true, None) => PluginMetadata::read(&sidecar)?,
        (false, Some(exp)) => exp.clone(),
        (false, None) => {
            return Err(Error::Metadata(format!(
                "no sidecar {} and no metadata supplied",
                sidecar.display()
            )))
        }
    };
    if props.len() != meta.nprops {
        return Err(Error::ContractViolation(format!(
            "plugin `{}` declares {} properties, got {}",
            meta.name,
            meta.nprops,
            props.len()
        )));
    }
    // SAFETY: loading runs the library's initializers; plugins are trusted
    // code by contract.
    let library = unsafe { Library::new(&path) }.map_err(|e| Error::PluginLoad {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    // SAFETY: the symbol is declared with the documented signature; the
    // function pointer is only used while `library` is alive.
    let entry = unsafe {
        let sym: libloading::Symbol<UmatEntry> =
            library
                .get(ENTRY_SYMBOL.as_bytes())
                .map_err(|_| Error::PluginSymbol {
                    path: path.clone(),
                    symbol: ENTRY_SYMBOL.to_string(),
                })?;
        *sym
    };
    Ok(PluginHandle {
        path,
        meta,
        props,
        entry,
        _library: library,
    })
}

fn column_major(t: &Tensor2) -> [f64; 9] {
    let mut out = [0.0; 9];
    out.copy_from_slice(t.as_slice());
    out
}

impl PluginHandle {
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn metadata(&self) -> &PluginMetadata {
        &self.meta
    }

    /// Marshals one call across the binary boundary.
    pub fn call(&self, call: &UmatCall) -> Result<UmatResult> {
        if call.props.len() != self.meta.nprops {
            return Err(Error::ContractViolation(format!(
                "plugin `{}` expects {} properties, got {}",
                self.meta.name,
                self.meta.nprops,
                call.props.len()
            )));
        }
        if call.statev_in.len() != self.meta.nstatv_user {
            return Err(Error::ContractViolation(format!(
                "plugin `{}` expects {} state slots, got {}",
                self.meta.name,
                self.meta.nstatv_user,
                call.statev_in.len()
            )));
        }
        let mut stress = *call.stress_in.components();
        let mut statev = call.statev_in.clone();
        let mut ddsdde = [0.0f64; 36];
        let stran = *call.stran.components();
        let dstran = *call.dstran.components();
        let time = [call.time, call.time];
        let nprops = self.meta.nprops as i32;
        let nstatv = self.meta.nstatv_user as i32;
        let dfgrd0 = column_major(&call.dfgrd0);
        let dfgrd1 = column_major(&call.dfgrd1);
        let drot = column_major(&call.drot);
        let ntens = 6i32;
        let mut status = 0i32;
        // SAFETY: every pointer refers to a live local buffer of the length
        // stated in the calling convention.
        unsafe {
            (self.entry)(
                stress.as_mut_ptr(),
                statev.as_mut_ptr(),
                ddsdde.as_mut_ptr(),
                stran.as_ptr(),
                dstran.as_ptr(),
                time.as_ptr(),
                &call.dtime,
                call.props.as_ptr(),
                &nprops,
                &nstatv,
                dfgrd0.as_ptr(),
                dfgrd1.as_ptr(),
                drot.as_ptr(),
                &ntens,
                &mut status,
            );
        }
        if status != 0 {
            return Err(Error::material(
                &self.meta.name,
                format!("plugin returned status {status}"),
            ));
        }
        let res = UmatResult {
            stress_out: UmatStress::new(stress),
            statev_out: statev,
            ddsdde: from_column_major(&ddsdde),
        };
        if !res.is_finite() {
            return Err(Error::material(&self.meta.name, "plugin returned non-finite values"));
        }
        Ok(res)
    }
}

impl Material for PluginHandle {
    fn name(&self) -> &str {
        &self.meta.name
    }
    fn regime(&self) -> Regime {
        self.meta.regime
    }
    fn nstatv_user(&self) -> usize {
        self.meta.nstatv_user
    }
    fn props(&self) -> &[f64] {
        &self.props
    }
    fn evaluate(&self, call: &UmatCall) -> Result<UmatResult> {
        self.call(call)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_round_trip() {
        let m = PluginMetadata {
            name: "x".into(),
            nprops: 2,
            nstatv_user: 3,
            regime: Regime::FiniteStrain,
        };
        assert_eq!(PluginMetadata::parse(&m.to_toml()).unwrap(), m);
        assert!(m.to_toml().contains("regime = \"finite-strain\""));
    }

    #[test]
    fn metadata_rejects_unknown_keys() {
        let text = "name = \"x\"\nnprops = 2\nnstatv_user = 0\nregime = \"small-strain\"\ncolour = 1\n";
        assert!(matches!(PluginMetadata::parse(text), Err(Error::Metadata(_))));
    }

    #[test]
    fn missing_library_names_the_path() {
        let err = load_plugin(Path::new("/nonexistent/libfoo.so"), None, vec![]).unwrap_err();
        assert!(matches!(err, Error::PluginLoad { .. }));
        assert!(err.to_string().contains("/nonexistent/libfoo.so"));
    }
}
