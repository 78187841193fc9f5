//! Physical pulse backend: calibrated beam configurations, per-circuit noise
//! sampling, and pulse propagators (unitary or Lindblad superoperator) for
//! the cat, X, and z-rotation primitives used by the benchmarking and
//! error-budget machinery.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::atom::{
    dls_vector, lightshift_operator_coherent, lightshift_spectrum, LaserParams, LevelScheme,
    Polarization,
};
use crate::constants_file::Calibration;
use crate::dynamics::{
    dephasing_collapse, rotated_hamiltonian_operator, scattering_collapse, CollapseSet,
    FieldConfig, FieldGeometry,
};
use crate::gatedesign::{check_cat_condition, check_x_condition, gate_time};
use crate::linalg::{expm_hermitian_propagator, kron, CMat, C_I};

/// A primitive pulse of the gate set.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Pulse {
    /// Half-pi cat-generation pulse (the (I + iX)/sqrt(2) logical action).
    CatHalfPi,
    /// Covariant pi rotation (logical X).
    XPi,
    /// z-axis rotation by the given logical angle, radians.
    Rz(f64),
    /// Inverse cat pulse, used to close the x-basis sequences.
    CatHalfPiInverse,
}

impl Pulse {
    /// Logical 2x2 action on the code space, global phase irrelevant.
    pub fn logical(&self) -> CMat {
        use crate::linalg::{cr, C_ZERO};
        let s = cr(1.0 / 2.0f64.sqrt());
        match self {
            // the negative-DLS cat beam realizes (I - iX)/sqrt(2); its
            // inverse is the same beam at triple duration
            Pulse::CatHalfPi => CMat::from_row_slice(2, 2, &[s, -C_I * s, -C_I * s, s]),
            Pulse::CatHalfPiInverse => CMat::from_row_slice(2, 2, &[s, C_I * s, C_I * s, s]),
            Pulse::XPi => CMat::from_row_slice(2, 2, &[C_ZERO, cr(1.0), cr(1.0), C_ZERO]),
            Pulse::Rz(theta) => CMat::from_diagonal(&crate::linalg::CVec::from_vec(vec![
                cr(1.0),
                (C_I * *theta).exp(),
            ])),
        }
    }

    fn cache_key(&self) -> (u8, u64) {
        match self {
            Pulse::CatHalfPi => (0, 0),
            Pulse::XPi => (1, 0),
            Pulse::Rz(t) => (2, t.to_bits()),
            Pulse::CatHalfPiInverse => (3, 0),
        }
    }
}

/// How z rotations are realized.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZMode {
    /// Parallel-geometry laser pulse (field along the z beam).
    LaserParallel,
    /// Timed free precession under the bias field alone.
    FreePrecession,
}

/// Per-beam shot-to-shot noise magnitudes.
#[derive(Copy, Clone, Debug, Default, Serialize, Deserialize)]
pub struct BeamNoise {
    /// Fractional pulse-area standard deviation.
    pub sigma_area: f64,
    /// Azimuth standard deviation, radians.
    pub sigma_phi: f64,
    /// Ellipticity standard deviation, radians.
    pub sigma_chi: f64,
    /// Frequency standard deviation, Hz.
    pub sigma_freq_hz: f64,
}

/// Which noise mechanisms are active in the pulse simulation.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct NoiseToggles {
    pub intensity: bool,
    pub polarization: bool,
    pub frequency: bool,
    /// Beam-to-field misalignment, radians away from orthogonal (applied to
    /// the beams the geometry marks as tilted).
    pub orthogonality: Option<f64>,
    /// Include the Zeeman term of the bias field during Raman pulses.
    pub zeeman: bool,
    /// Dephasing collapse with this T2 coefficient (seconds).
    pub dephasing: Option<f64>,
    pub scattering: bool,
}

impl NoiseToggles {
    pub fn none() -> Self {
        NoiseToggles::default()
    }

    pub fn needs_collapse(&self) -> bool {
        self.dephasing.is_some() || self.scattering
    }

    pub fn is_stochastic(&self) -> bool {
        self.intensity || self.polarization || self.frequency
    }
}

/// Calibrated hardware description for one benchmarking geometry.
#[derive(Clone, Debug)]
pub struct Hardware {
    pub scheme: LevelScheme,
    /// X / z-rotation beam (nominal sigma+).
    pub x_beam: LaserParams,
    /// Cat-generation beam (nominal sigma+).
    pub cat_beam: LaserParams,
    /// Parallel-geometry beam intensity for laser z pulses.
    pub z_beam_intensity: f64,
    pub z_mode: ZMode,
    pub b_tesla: f64,
    /// Nominal pulse durations, seconds.
    pub t_x: f64,
    pub t_cat: f64,
    /// Qubit splitting driving z rotations, rad/s.
    pub omega_z: f64,
    pub x_noise: BeamNoise,
    pub cat_noise: BeamNoise,
    pub toggles: NoiseToggles,
}

/// Published shot-to-shot noise magnitudes for the two beams.
pub fn reference_beam_noise() -> (BeamNoise, BeamNoise) {
    let deg = std::f64::consts::PI / 180.0;
    let x = BeamNoise {
        sigma_area: 0.002,
        sigma_phi: 3.1 * deg,
        sigma_chi: 0.13 * deg,
        sigma_freq_hz: 1e6,
    };
    let cat = BeamNoise {
        sigma_area: 0.0056,
        sigma_phi: 0.8 * deg,
        sigma_chi: 0.02 * deg,
        sigma_freq_hz: 1e6,
    };
    (x, cat)
}

impl Hardware {
    /// Calibrate beams against the experiment-anchored targets: the X beam
    /// to the covariant DLS spacing, the cat beam to the half-pi pulse
    /// duration, and (for laser z pulses) the parallel beam to the qubit
    /// splitting at the given field.
    pub fn calibrated(
        scheme: &LevelScheme,
        cal: &Calibration,
        z_mode: ZMode,
        b_tesla: f64,
    ) -> Self {
        let probe = 1e4; // W/m^2; spectra are linear in intensity
        let pol = Polarization::sigma_plus();

        let x_probe = LaserParams::new(probe, cal.x_detuning_hz, pol);
        let sx = lightshift_spectrum(&x_probe, scheme).expect("probe spectrum");
        let dls = dls_vector(&sx);
        let mean_dls: f64 =
            dls.delta.iter().map(|d| d.abs()).sum::<f64>() / dls.delta.len() as f64;
        let x_intensity = probe * 2.0 * std::f64::consts::PI * cal.x_rabi_hz / mean_dls;
        let x_beam = LaserParams::new(x_intensity, cal.x_detuning_hz, pol);
        let t_x = {
            let spec = lightshift_spectrum(&x_beam, scheme).expect("x spectrum");
            let d = dls_vector(&spec);
            let cond = check_x_condition(&d, 0.05, 60).expect("X condition at the X detuning");
            gate_time(&cond).expect("gate time")
        };

        let cat_probe = LaserParams::new(probe, cal.cat_detuning_hz, pol);
        let sc = lightshift_spectrum(&cat_probe, scheme).expect("probe spectrum");
        let dc = dls_vector(&sc);
        let cond = check_cat_condition(&dc, 0.05, 60).expect("cat condition at the cat detuning");
        let t_probe = gate_time(&cond).expect("gate time");
        let cat_intensity = probe * t_probe / cal.cat_pulse_s;
        let cat_beam = LaserParams::new(cat_intensity, cal.cat_detuning_hz, pol);
        let t_cat = cal.cat_pulse_s;

        let zeeman_split = scheme.zeeman_slope(b_tesla) * scheme.f_ground.twice() as f64;
        let (omega_z, z_beam_intensity) = match z_mode {
            ZMode::FreePrecession => (zeeman_split, 0.0),
            ZMode::LaserParallel => {
                // align the total splitting with the sign of the lightshift
                // slope, which dominates the Zeeman part
                let z_probe = LaserParams::new(probe, cal.x_detuning_hz, pol);
                let sz = lightshift_spectrum(&z_probe, scheme).expect("probe spectrum");
                let probe_split = sz.delta[sz.dim() - 1] - sz.delta[0];
                let target = probe_split.signum() * 2.0 * std::f64::consts::PI * cal.z_splitting_hz;
                let light_part = target - zeeman_split;
                (target, probe * (light_part / probe_split))
            }
        };

        let (x_noise, cat_noise) = reference_beam_noise();
        Hardware {
            scheme: scheme.clone(),
            x_beam,
            cat_beam,
            z_beam_intensity,
            z_mode,
            b_tesla,
            t_x,
            t_cat,
            omega_z,
            x_noise,
            cat_noise,
            toggles: NoiseToggles::none(),
        }
    }

    pub fn dim(&self) -> usize {
        self.scheme.ground_dim()
    }
}

/// One shot-to-shot noise draw (quasi-static over a circuit).
#[derive(Copy, Clone, Debug, Default)]
pub struct NoiseSample {
    pub x_area: f64,
    pub cat_area: f64,
    pub x_phi: f64,
    pub x_chi: f64,
    pub cat_phi: f64,
    pub cat_chi: f64,
    pub x_freq_hz: f64,
    pub cat_freq_hz: f64,
}

/// Draw one perturbed configuration; only the mechanisms enabled in the
/// toggles deviate from nominal.
pub fn sample_noise(hw: &Hardware, rng: &mut ChaCha8Rng) -> NoiseSample {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut draw = |sigma: f64| -> f64 {
        // always consume the stream so toggles do not shift later draws
        let g: f64 = normal.sample(rng);
        g * sigma
    };
    let t = &hw.toggles;
    let pol = Polarization::sigma_plus();
    NoiseSample {
        x_area: 1.0 + if t.intensity { draw(hw.x_noise.sigma_area) } else { draw(0.0) },
        cat_area: 1.0 + if t.intensity { draw(hw.cat_noise.sigma_area) } else { draw(0.0) },
        x_phi: pol.phi + if t.polarization { draw(hw.x_noise.sigma_phi) } else { draw(0.0) },
        x_chi: pol.chi + if t.polarization { draw(hw.x_noise.sigma_chi) } else { draw(0.0) },
        cat_phi: pol.phi + if t.polarization { draw(hw.cat_noise.sigma_phi) } else { draw(0.0) },
        cat_chi: pol.chi + if t.polarization { draw(hw.cat_noise.sigma_chi) } else { draw(0.0) },
        x_freq_hz: if t.frequency { draw(hw.x_noise.sigma_freq_hz) } else { draw(0.0) },
        cat_freq_hz: if t.frequency { draw(hw.cat_noise.sigma_freq_hz) } else { draw(0.0) },
    }
}

fn clamp_pol(phi: f64, chi: f64) -> Polarization {
    let phi = phi.rem_euclid(std::f64::consts::PI);
    let chi = chi.clamp(
        -std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2,
    );
    Polarization::new(phi, chi)
}

/// A pulse propagator: a unitary on the manifold or a vectorized-density
/// superoperator when collapse channels are active.
#[derive(Clone, Debug)]
pub enum Propagator {
    Unitary(CMat),
    Super(CMat),
}

impl Propagator {
    pub fn is_super(&self) -> bool {
        matches!(self, Propagator::Super(_))
    }

    /// Promote a unitary to its superoperator form.
    pub fn to_super(&self) -> CMat {
        match self {
            Propagator::Super(s) => s.clone(),
            Propagator::Unitary(u) => kron(&u.conjugate(), u),
        }
    }
}

/// Builds pulse propagators for a given hardware + noise draw, caching by
/// pulse kind.
pub struct PulseFactory<'a> {
    pub hw: &'a Hardware,
    pub sample: NoiseSample,
    cache: HashMap<(u8, u64), Propagator>,
}

impl<'a> PulseFactory<'a> {
    pub fn new(hw: &'a Hardware, sample: NoiseSample) -> Self {
        PulseFactory {
            hw,
            sample,
            cache: HashMap::new(),
        }
    }

    pub fn nominal(hw: &'a Hardware) -> Self {
        let pol = Polarization::sigma_plus();
        PulseFactory::new(
            hw,
            NoiseSample {
                x_area: 1.0,
                cat_area: 1.0,
                x_phi: pol.phi,
                x_chi: pol.chi,
                cat_phi: pol.phi,
                cat_chi: pol.chi,
                x_freq_hz: 0.0,
                cat_freq_hz: 0.0,
            },
        )
    }

    pub fn propagator(&mut self, pulse: Pulse) -> Propagator {
        let key = pulse.cache_key();
        if let Some(p) = self.cache.get(&key) {
            return p.clone();
        }
        let p = self.build(pulse);
        self.cache.insert(key, p.clone());
        p
    }

    fn beta_for(&self, nominal_orthogonal: bool) -> f64 {
        let tilt = self.hw.toggles.orthogonality.unwrap_or(0.0);
        if nominal_orthogonal {
            std::f64::consts::FRAC_PI_2 - tilt
        } else {
            0.0
        }
    }

    fn raman_propagator(&self, laser: &LaserParams, t: f64, beta: f64) -> Propagator {
        let hw = self.hw;
        let h_beam = lightshift_operator_coherent(laser, &hw.scheme).expect("pulse operator");
        let field = FieldConfig {
            b_tesla: if hw.toggles.zeeman { hw.b_tesla } else { 0.0 },
            geometry: FieldGeometry::OrthogonalToBeam,
        };
        let h = rotated_hamiltonian_operator(&h_beam, &hw.scheme, field, beta);
        self.finish(h, laser, t)
    }

    fn finish(&self, h: CMat, laser: &LaserParams, t: f64) -> Propagator {
        let hw = self.hw;
        let mut collapses = CollapseSet::empty();
        if hw.toggles.scattering && laser.intensity > 0.0 {
            collapses.extend(scattering_collapse(laser, &hw.scheme).expect("collapse"));
        }
        if let Some(coeff) = hw.toggles.dephasing {
            collapses.extend(dephasing_collapse(coeff, hw.scheme.f_ground).expect("dephasing"));
        }
        if collapses.is_empty() {
            Propagator::Unitary(expm_hermitian_propagator(&h, t))
        } else {
            let lind = crate::dynamics::Lindblad::new(h, collapses);
            Propagator::Super(lind.propagator(t))
        }
    }

    fn build(&self, pulse: Pulse) -> Propagator {
        let hw = self.hw;
        let s = &self.sample;
        match pulse {
            Pulse::XPi => {
                let mut laser = hw.x_beam.clone();
                laser.intensity *= s.x_area;
                laser.detuning_hz += s.x_freq_hz;
                laser.polarization = clamp_pol(s.x_phi, s.x_chi);
                self.raman_propagator(&laser, hw.t_x, self.beta_for(true))
            }
            Pulse::CatHalfPi | Pulse::CatHalfPiInverse => {
                let mut laser = hw.cat_beam.clone();
                laser.intensity *= s.cat_area;
                laser.detuning_hz += s.cat_freq_hz;
                laser.polarization = clamp_pol(s.cat_phi, s.cat_chi);
                let t = match pulse {
                    // the inverse is the 3/2-period pulse of the same beam
                    Pulse::CatHalfPiInverse => 3.0 * hw.t_cat,
                    _ => hw.t_cat,
                };
                self.raman_propagator(&laser, t, self.beta_for(true))
            }
            Pulse::Rz(theta) => {
                // phases run as e^{-i E t}: a positive splitting advances the
                // logical phase negatively
                let tau = 2.0 * std::f64::consts::PI;
                let t = if hw.omega_z > 0.0 {
                    (-theta).rem_euclid(tau) / hw.omega_z
                } else {
                    theta.rem_euclid(tau) / -hw.omega_z
                };
                match hw.z_mode {
                    ZMode::FreePrecession => {
                        let field = FieldConfig {
                            b_tesla: hw.b_tesla,
                            geometry: FieldGeometry::ParallelToBeam,
                        };
                        let zero = CMat::zeros(hw.dim(), hw.dim());
                        let h = rotated_hamiltonian_operator(&zero, &hw.scheme, field, 0.0);
                        // no laser: dephasing still applies, scattering not
                        let dark = LaserParams::new(0.0, hw.x_beam.detuning_hz, hw.x_beam.polarization);
                        self.finish(h, &dark, t)
                    }
                    ZMode::LaserParallel => {
                        let mut laser = hw.x_beam.clone();
                        laser.intensity = hw.z_beam_intensity * s.x_area;
                        laser.detuning_hz += s.x_freq_hz;
                        laser.polarization = clamp_pol(s.x_phi, s.x_chi);
                        let h_beam = lightshift_operator_coherent(&laser, &hw.scheme)
                            .expect("z operator");
                        let field = FieldConfig {
                            b_tesla: hw.b_tesla,
                            geometry: FieldGeometry::ParallelToBeam,
                        };
                        let h = rotated_hamiltonian_operator(&h_beam, &hw.scheme, field, 0.0);
                        self.finish(h, &laser, t)
                    }
                }
            }
        }
    }
}

/// Convenience draw of a uniform random stream value in [0, 1).
pub fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants_file::{workspace_constants, test_scheme_yb173};
    use crate::linalg::{cr, unitarity_defect, CVec};

    fn hardware_crb() -> Hardware {
        let cf = workspace_constants();
        Hardware::calibrated(
            &test_scheme_yb173(),
            &cf.calibration("yb173").unwrap(),
            ZMode::LaserParallel,
            1.01e-3,
        )
    }

    #[test]
    fn calibration_targets_hit() {
        let hw = hardware_crb();
        // X pulse time ~ 11.6 us at 43 kHz DLS spacing
        assert!((hw.t_x - 11.63e-6).abs() < 0.1e-6, "{}", hw.t_x);
        assert!((hw.t_cat - 85.1e-6).abs() < 1e-12);
        assert!((hw.omega_z.abs() / (2.0 * std::f64::consts::PI) - 90.5e3).abs() < 1.0);
    }

    #[test]
    fn nominal_pulses_act_as_logical_gates() {
        let hw = hardware_crb();
        let mut factory = PulseFactory::nominal(&hw);
        // cat pulse takes |0>_sc to (|0> + i |1>)/sqrt(2) up to global phase
        let cat = match factory.propagator(Pulse::CatHalfPi) {
            Propagator::Unitary(u) => u,
            _ => panic!("expected unitary"),
        };
        assert!(unitarity_defect(&cat) < 1e-10);
        let mut psi = CVec::zeros(6);
        psi[0] = cr(1.0);
        let out = &cat * psi;
        let p0 = out[0].norm_sqr();
        let p5 = out[5].norm_sqr();
        assert!((p0 - 0.5).abs() < 0.01 && (p5 - 0.5).abs() < 0.01, "{p0} {p5}");
        let rel = (out[5] / out[0]).arg();
        assert!((rel + std::f64::consts::FRAC_PI_2).abs() < 0.05, "{rel}");
        // z pulse dephases |0> and |1> by pi/2 without moving population
        let rz = match factory.propagator(Pulse::Rz(std::f64::consts::FRAC_PI_2)) {
            Propagator::Unitary(u) => u,
            _ => panic!("expected unitary"),
        };
        for k in 1..6 {
            assert!(rz[(k, 0)].norm() < 1e-12);
        }
        let logical_phase = (rz[(5, 5)] / rz[(0, 0)]).arg();
        assert!(
            (logical_phase - std::f64::consts::FRAC_PI_2).abs() < 1e-6,
            "{logical_phase}"
        );
    }

    #[test]
    fn x_pulse_transfers_population_drb_geometry() {
        let cf = workspace_constants();
        let hw = Hardware::calibrated(
            &test_scheme_yb173(),
            &cf.calibration("yb173").unwrap(),
            ZMode::FreePrecession,
            1.35e-3,
        );
        let mut factory = PulseFactory::nominal(&hw);
        let x = match factory.propagator(Pulse::XPi) {
            Propagator::Unitary(u) => u,
            _ => panic!("expected unitary"),
        };
        let mut psi = CVec::zeros(6);
        psi[0] = cr(1.0);
        let out = &x * psi;
        assert!(out[5].norm_sqr() > 0.999, "{}", out[5].norm_sqr());
        // free-precession z rotation
        assert!((hw.omega_z.abs() / (2.0 * std::f64::consts::PI) - 13.9e3).abs() < 100.0);
    }

    #[test]
    fn noise_sampling_statistics() {
        let hw = {
            let mut hw = hardware_crb();
            hw.toggles.intensity = true;
            hw
        };
        let fam = crate::rng::StreamFamily::new(5);
        let n = 10_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for i in 0..n {
            let s = sample_noise(&hw, &mut fam.stream(i));
            sum += s.cat_area - 1.0;
            sum2 += (s.cat_area - 1.0).powi(2);
        }
        let mean = sum / n as f64;
        let sd = (sum2 / n as f64 - mean * mean).sqrt();
        assert!((sd / 0.0056 - 1.0).abs() < 0.05, "{sd}");
        assert!(mean.abs() < 3.0 * 0.0056 / (n as f64).sqrt());
    }

    #[test]
    fn collapse_pulses_are_superoperators() {
        let mut hw = hardware_crb();
        hw.toggles.scattering = true;
        let mut factory = PulseFactory::nominal(&hw);
        assert!(factory.propagator(Pulse::CatHalfPi).is_super());
    }
}
