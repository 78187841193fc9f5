//! Monte-Carlo error budget: per-source noise injection feeding simulated
//! CRB and DRB runs, producing per-source error entries and quadrature
//! totals.

use serde::{Deserialize, Serialize};

use crate::benchmark::{
    clifford_fidelity, extract_bias, simulate_rb, BenchError, BiasResult, CgLevel, NoiseModel,
    RbProtocol, RbRun,
};
use crate::constants_file::Calibration;
use crate::atom::LevelScheme;
use crate::pulse::{Hardware, NoiseToggles, ZMode};

/// The error sources of the budget.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseSource {
    IntensityFluct,
    PolarizationFluct,
    FrequencyFluct,
    Orthogonality,
    Zeeman,
    Dephasing,
    Scattering,
}

impl NoiseSource {
    pub fn all() -> [NoiseSource; 7] {
        [
            NoiseSource::IntensityFluct,
            NoiseSource::PolarizationFluct,
            NoiseSource::FrequencyFluct,
            NoiseSource::Orthogonality,
            NoiseSource::Zeeman,
            NoiseSource::Dephasing,
            NoiseSource::Scattering,
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            NoiseSource::IntensityFluct => "intensity_fluct",
            NoiseSource::PolarizationFluct => "polarization_fluct",
            NoiseSource::FrequencyFluct => "frequency_fluct",
            NoiseSource::Orthogonality => "orthogonality",
            NoiseSource::Zeeman => "zeeman",
            NoiseSource::Dephasing => "dephasing",
            NoiseSource::Scattering => "scattering",
        }
    }
}

/// Reference noise magnitudes: 2 degrees of beam-field misalignment,
/// 251 ms dephasing coefficient, and the per-beam sigmas embedded in
/// `pulse::reference_beam_noise`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BudgetParams {
    pub orthogonality_rad: f64,
    pub dephasing_coefficient_s: f64,
    pub b_crb_tesla: f64,
    pub b_drb_tesla: f64,
}

impl Default for BudgetParams {
    fn default() -> Self {
        BudgetParams {
            orthogonality_rad: 2.0 * std::f64::consts::PI / 180.0,
            dephasing_coefficient_s: 0.251,
            b_crb_tesla: 1.01e-3,
            b_drb_tesla: 1.35e-3,
        }
    }
}

/// Toggle exactly one source on (None means all off; used for baselines).
pub fn toggles_for(source: Option<NoiseSource>, params: &BudgetParams) -> NoiseToggles {
    let mut t = NoiseToggles::none();
    match source {
        None => {}
        Some(NoiseSource::IntensityFluct) => t.intensity = true,
        Some(NoiseSource::PolarizationFluct) => t.polarization = true,
        Some(NoiseSource::FrequencyFluct) => t.frequency = true,
        Some(NoiseSource::Orthogonality) => t.orthogonality = Some(params.orthogonality_rad),
        Some(NoiseSource::Zeeman) => t.zeeman = true,
        Some(NoiseSource::Dephasing) => t.dephasing = Some(params.dephasing_coefficient_s),
        Some(NoiseSource::Scattering) => t.scattering = true,
    }
    t
}

/// Toggle the full reference noise model (every source at once).
pub fn toggles_all(params: &BudgetParams) -> NoiseToggles {
    NoiseToggles {
        intensity: true,
        polarization: true,
        frequency: true,
        orthogonality: Some(params.orthogonality_rad),
        zeeman: true,
        dephasing: Some(params.dephasing_coefficient_s),
        scattering: true,
    }
}

/// Hardware for a protocol geometry with the given toggles.
pub fn hardware_for(
    scheme: &LevelScheme,
    cal: &Calibration,
    protocol: RbProtocol,
    params: &BudgetParams,
    toggles: NoiseToggles,
) -> Hardware {
    let (z_mode, b) = match protocol {
        RbProtocol::Crb => (ZMode::LaserParallel, params.b_crb_tesla),
        _ => (ZMode::FreePrecession, params.b_drb_tesla),
    };
    let mut hw = Hardware::calibrated(scheme, cal, z_mode, b);
    hw.toggles = toggles;
    hw
}

/// One row of the budget: Clifford error from CRB plus the DRB-extracted
/// dephasing and non-dephasing probabilities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BudgetEntry {
    pub source: NoiseSource,
    pub clifford_error: f64,
    pub clifford_error_sigma: f64,
    pub p_nd: f64,
    pub p_d: f64,
    pub p_nd_sigma: f64,
    pub p_d_sigma: f64,
}

/// Statistics settings for the budget runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BudgetStats {
    pub crb_depths: Vec<usize>,
    pub drb_depths: Vec<usize>,
    pub n_circuits: usize,
    pub seed: u64,
}

impl BudgetStats {
    /// Full-run statistics.
    pub fn full(seed: u64) -> Self {
        BudgetStats {
            crb_depths: vec![1, 2, 4, 7, 10, 14],
            drb_depths: vec![1, 4, 8, 14, 20],
            n_circuits: 60,
            seed,
        }
    }

    /// Reduced smoke-test statistics.
    pub fn smoke(seed: u64) -> Self {
        BudgetStats {
            crb_depths: vec![1, 4, 8],
            drb_depths: vec![1, 6, 12],
            n_circuits: 16,
            seed,
        }
    }
}

/// Simulate the CRB side of one source; returns (error, sigma).
pub fn crb_error_for(
    scheme: &LevelScheme,
    cal: &Calibration,
    source: Option<NoiseSource>,
    params: &BudgetParams,
    stats: &BudgetStats,
) -> Result<(f64, f64), BenchError> {
    let hw = hardware_for(
        scheme,
        cal,
        RbProtocol::Crb,
        params,
        toggles_for(source, params),
    );
    let run = RbRun {
        protocol: RbProtocol::Crb,
        depths: stats.crb_depths.clone(),
        n_circuits: stats.n_circuits,
        seed: stats.seed,
        cg_level: CgLevel::Level2,
        noise: NoiseModel::Physical(Box::new(hw)),
        noise_floor: None,
    };
    let res = simulate_rb(&run)?;
    match res.fit {
        Some(f) => {
            let err = 1.0 - clifford_fidelity(f.p.clamp(1e-9, 1.0));
            Ok((err, f.p_sigma / 2.0))
        }
        // survivals carried no decay: error consistent with zero
        None => Ok((0.0, 1e-6)),
    }
}

/// Simulate the two DRB bases for one source and extract the bias numbers.
pub fn drb_bias_for(
    scheme: &LevelScheme,
    cal: &Calibration,
    source: Option<NoiseSource>,
    params: &BudgetParams,
    stats: &BudgetStats,
) -> Result<(BiasResult, f64, f64), BenchError> {
    let decay = |protocol: RbProtocol, seed_tag: u64| -> Result<(f64, f64), BenchError> {
        let hw = hardware_for(scheme, cal, protocol, params, toggles_for(source, params));
        let run = RbRun {
            protocol,
            depths: stats.drb_depths.clone(),
            n_circuits: stats.n_circuits,
            seed: stats.seed.wrapping_add(seed_tag),
            cg_level: CgLevel::Level2,
            noise: NoiseModel::Physical(Box::new(hw)),
            noise_floor: None,
        };
        let res = simulate_rb(&run)?;
        match res.fit {
            Some(f) => Ok((f.p.clamp(1e-9, 1.0), f.p_sigma)),
            None => Ok((1.0, 1e-6)),
        }
    };
    let (l1, s1) = decay(RbProtocol::DrbZ, 101)?;
    let (l2, s2) = decay(RbProtocol::DrbX, 202)?;
    let p_nd_sigma = s1 / 2.0;
    let p_d_sigma = ((s1 / 4.0).powi(2) + (s2 / 2.0).powi(2)).sqrt();
    let bias = extract_bias(l1, l2, 1, 2.0 * p_nd_sigma);
    Ok((bias, p_nd_sigma, p_d_sigma))
}

/// Full budget row for one source.
pub fn simulate_budget(
    scheme: &LevelScheme,
    cal: &Calibration,
    source: NoiseSource,
    params: &BudgetParams,
    stats: &BudgetStats,
) -> Result<BudgetEntry, BenchError> {
    let (clifford_error, clifford_error_sigma) =
        crb_error_for(scheme, cal, Some(source), params, stats)?;
    let (bias, p_nd_sigma, p_d_sigma) = drb_bias_for(scheme, cal, Some(source), params, stats)?;
    Ok(BudgetEntry {
        source,
        clifford_error,
        clifford_error_sigma,
        p_nd: bias.p_nd.max(0.0),
        p_d: bias.p_d.max(0.0),
        p_nd_sigma,
        p_d_sigma,
    })
}

/// Quadrature totals over entries: (clifford, p_nd, p_d).
pub fn total_quadrature(entries: &[BudgetEntry]) -> (f64, f64, f64) {
    assert!(!entries.is_empty());
    let q = |f: &dyn Fn(&BudgetEntry) -> f64| -> f64 {
        entries.iter().map(|e| f(e).powi(2)).sum::<f64>().sqrt()
    };
    (
        q(&|e| e.clifford_error),
        q(&|e| e.p_nd),
        q(&|e| e.p_d),
    )
}
