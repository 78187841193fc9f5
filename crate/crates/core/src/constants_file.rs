//! Constants-file parsing. The file is TOML with units noted in comments;
//! it carries the level schemes, the intensity convention scale, and the
//! experiment-calibrated pulse parameters used as defaults by the benchmark
//! and budget machinery.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::atom::{consts, AtomError, Branch, LevelScheme};
use crate::halfint::HalfInt;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantsFile {
    pub conventions: Conventions,
    #[serde(flatten)]
    pub schemes: BTreeMap<String, SchemeSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Conventions {
    /// Dimensionless scale applied to power/waist intensities when
    /// reproducing the reference detuning tables.
    pub table_intensity_scale: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeSpec {
    /// Twice the ground-state F.
    pub f_ground: i32,
    /// Natural linewidth divided by 2 pi, Hz.
    pub gamma_hz: f64,
    pub wavelength_m: f64,
    pub mu_i_nuclear_magnetons: f64,
    /// Excited branches as [twice F', offset from the reference branch in Hz].
    pub branches: Vec<(i32, f64)>,
    pub calibration: Option<Calibration>,
}

/// Experiment-calibrated pulse parameters for a scheme.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Calibration {
    /// Covariant-rotation DLS spacing of the X-gate beam, Hz.
    pub x_rabi_hz: f64,
    /// Qubit splitting under the parallel-geometry beam plus bias field, Hz.
    pub z_splitting_hz: f64,
    /// Duration of the half-pi cat pulse, s.
    pub cat_pulse_s: f64,
    /// X-gate beam detuning, Hz.
    pub x_detuning_hz: f64,
    /// Cat-pulse beam detuning, Hz.
    pub cat_detuning_hz: f64,
}

impl ConstantsFile {
    pub fn from_toml_str(text: &str) -> Result<Self, AtomError> {
        toml::from_str(text).map_err(|e| AtomError::Constants(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, AtomError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AtomError::Constants(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn scheme(&self, name: &str) -> Result<LevelScheme, AtomError> {
        let spec = self
            .schemes
            .get(name)
            .ok_or_else(|| AtomError::Constants(format!("no scheme named {name}")))?;
        Ok(spec.to_level_scheme(name))
    }

    pub fn calibration(&self, name: &str) -> Result<Calibration, AtomError> {
        let spec = self
            .schemes
            .get(name)
            .ok_or_else(|| AtomError::Constants(format!("no scheme named {name}")))?;
        spec.calibration
            .clone()
            .ok_or_else(|| AtomError::Constants(format!("scheme {name} has no calibration block")))
    }
}

impl SchemeSpec {
    pub fn to_level_scheme(&self, name: &str) -> LevelScheme {
        LevelScheme {
            name: name.to_string(),
            f_ground: HalfInt::from_twice(self.f_ground),
            branches: self
                .branches
                .iter()
                .map(|&(tf, off)| Branch {
                    f_prime: HalfInt::from_twice(tf),
                    hfs_offset_hz: off,
                })
                .collect(),
            gamma: 2.0 * std::f64::consts::PI * self.gamma_hz,
            omega0: 2.0 * std::f64::consts::PI * consts::SPEED_OF_LIGHT / self.wavelength_m,
            mu_i_nuclear_magnetons: self.mu_i_nuclear_magnetons,
        }
    }
}

/// Path of the constants file shipped at the workspace root.
pub fn workspace_constants_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../constants.toml")
}

/// Workspace constants file; convenience for tests and defaults.
pub fn workspace_constants() -> ConstantsFile {
    ConstantsFile::load(&workspace_constants_path()).expect("workspace constants.toml")
}

/// The 173 scheme from the workspace constants file (test convenience).
pub fn test_scheme_yb173() -> LevelScheme {
    workspace_constants().scheme("yb173").expect("yb173 scheme")
}

/// The 171 scheme from the workspace constants file (test convenience).
pub fn test_scheme_yb171() -> LevelScheme {
    workspace_constants().scheme("yb171").expect("yb171 scheme")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workspace_file_parses() {
        let cf = workspace_constants();
        let s = cf.scheme("yb173").unwrap();
        assert_eq!(s.f_ground.twice(), 5);
        assert_eq!(s.branches.len(), 3);
        assert!(cf.scheme("yb171").is_ok());
        assert!(cf.scheme("missing").is_err());
        assert!((cf.conventions.table_intensity_scale * 2.0 * std::f64::consts::PI - 1.0).abs() < 1e-12);
        let cal = cf.calibration("yb173").unwrap();
        assert!(cal.x_rabi_hz > 0.0);
    }

    #[test]
    fn g_factor_scale() {
        // g_F mu_B B / h at 1 mT is a few kHz for these nuclear moments
        let s = test_scheme_yb173();
        let slope_hz = s.zeeman_slope(1e-3) / (2.0 * std::f64::consts::PI);
        assert!(slope_hz > 1e3 && slope_hz < 5e3, "{slope_hz}");
    }
}
