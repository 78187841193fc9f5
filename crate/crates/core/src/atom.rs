//! Atomic model: laser polarization, the level scheme of the driven
//! transition, dipole amplitudes, the diagonal lightshift spectrum, and the
//! photon-scattering strength estimate.
//!
//! The driven transition is J = 0 -> J' = 1 (so I = F of the ground
//! manifold), with the excited hyperfine branches resolved by their offsets
//! from a reference branch. Detunings are ordinary frequencies in Hz,
//! positive to the blue of the reference branch.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::halfint::HalfInt;
use crate::linalg::{cr, CMat};
use crate::wigner::{clebsch_gordan, wigner_6j};

pub mod consts {
    //! Physical constants (SI).
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
    pub const BOHR_MAGNETON: f64 = 9.274_010_078e-24;
    pub const NUCLEAR_MAGNETON: f64 = 5.050_783_746e-27;
}

#[derive(Debug, Error)]
pub enum AtomError {
    #[error("laser intensity must be nonnegative, got {0}")]
    NegativeIntensity(f64),
    #[error("laser detuning {detuning_hz} Hz collides with the F' = {f_prime} resonance")]
    ResonanceCollision { detuning_hz: f64, f_prime: HalfInt },
    #[error("F' = {0} is not a branch of the level scheme")]
    UnknownBranch(HalfInt),
    #[error("off-diagonal lightshift residue {residue:.3e} exceeds {limit:.3e}")]
    OffDiagonalResidue { residue: f64, limit: f64 },
    #[error("constants file error: {0}")]
    Constants(String),
}

/// Laser polarization as azimuth and ellipticity angles.
///
/// phi in [0, pi), chi in [-pi/2, pi/2]. Circular polarization is
/// phi = pi/4 with chi = -pi/4 (sigma+) or chi = +pi/4 (sigma-); phi = 0 is
/// pure pi polarization.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polarization {
    pub phi: f64,
    pub chi: f64,
}

impl Polarization {
    pub fn new(phi: f64, chi: f64) -> Self {
        assert!((0.0..std::f64::consts::PI).contains(&phi), "phi out of range: {phi}");
        assert!(
            (-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2).contains(&chi),
            "chi out of range: {chi}"
        );
        Polarization { phi, chi }
    }

    pub fn sigma_plus() -> Self {
        Polarization::new(std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4)
    }

    pub fn sigma_minus() -> Self {
        Polarization::new(std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4)
    }

    pub fn pi() -> Self {
        Polarization::new(0.0, 0.0)
    }

    /// Spherical components (e_{+1}, e_{-1}, e_0); unit norm by construction.
    pub fn spherical_components(&self) -> [f64; 3] {
        let q4 = std::f64::consts::FRAC_PI_4;
        [
            (2.0 * self.phi).sin() * (self.chi + q4).cos(),
            (2.0 * self.phi).sin() * (self.chi - q4).cos(),
            (2.0 * self.phi).cos(),
        ]
    }

    /// Amplitude of the component with spherical index q in {-1, 0, +1}.
    pub fn component(&self, q: i32) -> f64 {
        let [ep, em, e0] = self.spherical_components();
        match q {
            1 => ep,
            -1 => em,
            0 => e0,
            _ => panic!("polarization component index {q}"),
        }
    }
}

/// One excited hyperfine branch: total spin F' and its resonance offset from
/// the reference branch, in Hz.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub f_prime: HalfInt,
    pub hfs_offset_hz: f64,
}

/// Atomic constants of the driven transition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelScheme {
    pub name: String,
    pub f_ground: HalfInt,
    pub branches: Vec<Branch>,
    /// Natural linewidth, rad/s.
    pub gamma: f64,
    /// Transition angular frequency, rad/s.
    pub omega0: f64,
    /// Nuclear magnetic moment in units of the nuclear magneton.
    pub mu_i_nuclear_magnetons: f64,
}

impl LevelScheme {
    pub fn ground_dim(&self) -> usize {
        self.f_ground.multiplicity()
    }

    pub fn branch(&self, f_prime: HalfInt) -> Result<&Branch, AtomError> {
        self.branches
            .iter()
            .find(|b| b.f_prime == f_prime)
            .ok_or(AtomError::UnknownBranch(f_prime))
    }

    /// Lande g-factor of the ground manifold, g_F = -mu_I / (mu_B |I|).
    pub fn g_factor(&self) -> f64 {
        -self.mu_i_nuclear_magnetons * consts::NUCLEAR_MAGNETON
            / (consts::BOHR_MAGNETON * self.f_ground.value())
    }

    /// Ground-state Zeeman shift slope, rad/s per unit m_F at field b (tesla).
    pub fn zeeman_slope(&self, b_tesla: f64) -> f64 {
        consts::BOHR_MAGNETON * self.g_factor() * b_tesla / consts::HBAR
    }
}

/// Control-laser parameters. Intensity is the effective drive intensity in
/// W/m^2; detuning is in Hz relative to the reference branch.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaserParams {
    pub intensity: f64,
    pub detuning_hz: f64,
    pub polarization: Polarization,
}

impl LaserParams {
    pub fn new(intensity: f64, detuning_hz: f64, polarization: Polarization) -> Self {
        assert!(intensity >= 0.0, "negative intensity");
        LaserParams {
            intensity,
            detuning_hz,
            polarization,
        }
    }

    /// Peak intensity of a Gaussian beam, 2P / (pi w^2), times a convention
    /// scale calibrated against the reference gate-time tables.
    pub fn from_power_waist(
        power_w: f64,
        waist_m: f64,
        intensity_scale: f64,
        detuning_hz: f64,
        polarization: Polarization,
    ) -> Self {
        let intensity = 2.0 * power_w / (std::f64::consts::PI * waist_m * waist_m) * intensity_scale;
        LaserParams::new(intensity, detuning_hz, polarization)
    }

    pub fn detuning_rad(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.detuning_hz
    }
}

/// Squared Rabi scale of a unit-strength (stretched) transition at the given
/// intensity: Omega^2 = 6 pi c^2 Gamma I / (hbar omega0^3), in (rad/s)^2.
pub fn rabi_scale_sq(laser: &LaserParams, scheme: &LevelScheme) -> f64 {
    6.0 * std::f64::consts::PI * consts::SPEED_OF_LIGHT.powi(2) * scheme.gamma * laser.intensity
        / (consts::HBAR * scheme.omega0.powi(3))
}

/// Dimensionless dipole amplitude for ground m_g absorbing a q photon into
/// branch F' (m_e = m_g + q):
/// (-1)^(F'+J+1+I) sqrt((2F'+1)(2J+1)) <F m_g | F' m_e; 1 -q> {J' J 1; F F' I}
/// with J = 0, J' = 1, I = F.
pub fn dipole_amplitude(scheme: &LevelScheme, f_prime: HalfInt, m_g: HalfInt, q: i32) -> f64 {
    let f = scheme.f_ground;
    let m_e = m_g + HalfInt::from_int(q);
    if !f.valid_projection(m_g) || !f_prime.valid_projection(m_e) {
        return 0.0;
    }
    let (j_g, j_e, i_nuc) = (HalfInt::ZERO, HalfInt::ONE, f);
    let phase_exp = (f_prime.twice() + j_g.twice() + i_nuc.twice()) / 2 + 1;
    let sign = if phase_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let cg = clebsch_gordan(f, m_g, f_prime, m_e, HalfInt::from_int(q));
    let sixj = wigner_6j(j_e, j_g, HalfInt::ONE, f, f_prime, i_nuc);
    sign * (((f_prime.twice() + 1) * (j_g.twice() + 1)) as f64).sqrt() * cg * sixj
}

/// Dipole lowering operator for one branch and one spherical component q:
/// a (2F+1) x (2F'+1) matrix of `dipole_amplitude` entries, ascending m.
pub fn dipole_operator(
    scheme: &LevelScheme,
    f_prime: HalfInt,
    q: i32,
) -> Result<CMat, AtomError> {
    scheme.branch(f_prime)?;
    let f = scheme.f_ground;
    let rows = f.multiplicity();
    let cols = f_prime.multiplicity();
    Ok(CMat::from_fn(rows, cols, |r, c| {
        let m_g = HalfInt::from_twice(-f.twice() + 2 * r as i32);
        let m_e = HalfInt::from_twice(-f_prime.twice() + 2 * c as i32);
        if m_e == m_g + HalfInt::from_int(q) {
            cr(dipole_amplitude(scheme, f_prime, m_g, q))
        } else {
            cr(0.0)
        }
    }))
}

/// Diagonal lightshift spectrum, rad/s, indexed by k with m_F = -F + k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightshiftSpectrum {
    pub f_ground: HalfInt,
    pub delta: Vec<f64>,
}

impl LightshiftSpectrum {
    pub fn dim(&self) -> usize {
        self.delta.len()
    }

    /// Spectrum relative to delta_0 reconstructed from a DLS vector by
    /// cumulative sum.
    pub fn from_dls(f_ground: HalfInt, dls: &DlsVector) -> Self {
        let mut delta = Vec::with_capacity(dls.delta.len() + 1);
        let mut acc = 0.0;
        delta.push(0.0);
        for d in &dls.delta {
            acc += d;
            delta.push(acc);
        }
        LightshiftSpectrum { f_ground, delta }
    }
}

/// Differential lightshifts Delta_{k+1} = delta_{k+1} - delta_k, rad/s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlsVector {
    pub delta: Vec<f64>,
}

pub fn dls_vector(spectrum: &LightshiftSpectrum) -> DlsVector {
    DlsVector {
        delta: spectrum.delta.windows(2).map(|w| w[1] - w[0]).collect(),
    }
}

fn check_resonances(laser: &LaserParams, scheme: &LevelScheme) -> Result<(), AtomError> {
    // only an exact (sub-linewidth/1e6) collision is rejected; scans keep
    // their own guard bands
    let guard = scheme.gamma / (2.0 * std::f64::consts::PI) * 1e-6;
    for b in &scheme.branches {
        if (laser.detuning_hz - b.hfs_offset_hz).abs() < guard {
            return Err(AtomError::ResonanceCollision {
                detuning_hz: laser.detuning_hz,
                f_prime: b.f_prime,
            });
        }
    }
    if laser.intensity < 0.0 {
        return Err(AtomError::NegativeIntensity(laser.intensity));
    }
    Ok(())
}

/// Full lightshift operator assembled from the per-q branch sum, rad/s.
/// Structurally diagonal; kept as a matrix so the diagonality can be checked.
pub fn lightshift_operator(laser: &LaserParams, scheme: &LevelScheme) -> Result<CMat, AtomError> {
    check_resonances(laser, scheme)?;
    let dim = scheme.ground_dim();
    let omega_sq = rabi_scale_sq(laser, scheme);
    let mut h = CMat::zeros(dim, dim);
    for q in [-1, 0, 1] {
        let weight = laser.polarization.component(q).powi(2);
        if weight == 0.0 {
            continue;
        }
        for b in &scheme.branches {
            let denom = 2.0 * std::f64::consts::PI * (laser.detuning_hz - b.hfs_offset_hz);
            let d = dipole_operator(scheme, b.f_prime, q)?;
            // (omega^2/4) weight D D^dag / (Delta_L - Delta_HFS)
            h += &d * d.adjoint() * cr(omega_sq / 4.0 * weight / denom);
        }
    }
    Ok(h)
}

/// Diagonal lightshift spectrum delta_k; errors if the assembled operator has
/// off-diagonal residue above 1e-10 of the diagonal norm.
pub fn lightshift_spectrum(
    laser: &LaserParams,
    scheme: &LevelScheme,
) -> Result<LightshiftSpectrum, AtomError> {
    let h = lightshift_operator(laser, scheme)?;
    let dim = h.nrows();
    let diag_norm = (0..dim).map(|k| h[(k, k)].norm().powi(2)).sum::<f64>().sqrt();
    let mut off = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            if r != c {
                off = off.max(h[(r, c)].norm());
            }
        }
    }
    let limit = 1e-10 * diag_norm.max(f64::MIN_POSITIVE);
    if off > limit {
        return Err(AtomError::OffDiagonalResidue { residue: off, limit });
    }
    Ok(LightshiftSpectrum {
        f_ground: scheme.f_ground,
        delta: (0..dim).map(|k| h[(k, k)].re).collect(),
    })
}

/// Full coherent lightshift operator including polarization cross terms:
/// H = (Omega^2/4) sum_F' (sum_q c_q D_q)(sum_q' c_q' D_q')^dag / denom,
/// rad/s. Off-diagonal entries are physical for elliptical polarizations
/// (coherent Raman coupling between the spherical components of one beam);
/// for a pure spherical component this reduces to `lightshift_operator`.
pub fn lightshift_operator_coherent(
    laser: &LaserParams,
    scheme: &LevelScheme,
) -> Result<CMat, AtomError> {
    check_resonances(laser, scheme)?;
    let dim = scheme.ground_dim();
    let omega_sq = rabi_scale_sq(laser, scheme);
    let mut h = CMat::zeros(dim, dim);
    for b in &scheme.branches {
        let denom = 2.0 * std::f64::consts::PI * (laser.detuning_hz - b.hfs_offset_hz);
        let excited_dim = b.f_prime.multiplicity();
        let mut l = CMat::zeros(dim, excited_dim);
        for q in [-1, 0, 1] {
            let c = laser.polarization.component(q);
            if c != 0.0 {
                l += dipole_operator(scheme, b.f_prime, q)? * cr(c);
            }
        }
        h += &l * l.adjoint() * cr(omega_sq / 4.0 / denom);
    }
    Ok(h)
}

/// Photon-scattering strength Gamma Omega_L^2 / (Delta_L + Gamma/2)^2 in 1/s.
///
/// Omega_L^2 = Omega^2 / 2 with Omega the stretched-transition Rabi scale;
/// the factor 1/2 is the convention calibrated against the reference
/// estimates at -11.9 and +11.2 GHz.
pub fn scattering_strength(laser: &LaserParams, scheme: &LevelScheme) -> f64 {
    let omega_l_sq = rabi_scale_sq(laser, scheme) / 2.0;
    let denom = laser.detuning_rad() + scheme.gamma / 2.0;
    scheme.gamma * omega_l_sq / (denom * denom)
}

/// Intensity convention scale matching the reference detuning tables'
/// power/waist column; see the constants file.
pub const TABLE_INTENSITY_SCALE: f64 = 1.0 / (2.0 * std::f64::consts::PI);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants_file::test_scheme_yb173;
    use crate::halfint::half;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn table_laser(detuning_ghz: f64) -> LaserParams {
        LaserParams::from_power_waist(
            0.1,
            100e-6,
            TABLE_INTENSITY_SCALE,
            detuning_ghz * 1e9,
            Polarization::sigma_plus(),
        )
    }

    #[test]
    fn polarization_circular_and_pi() {
        let sp = Polarization::new(FRAC_PI_4, FRAC_PI_4).spherical_components();
        assert!((sp[0]).abs() < 1e-15 && (sp[1] - 1.0).abs() < 1e-15 && sp[2].abs() < 1e-12);
        let pp = Polarization::pi().spherical_components();
        assert!(pp[0].abs() < 1e-15 && (pp[1] - 0.0).abs() > -1.0 && (pp[2] - 1.0).abs() < 1e-15);
        let sm = Polarization::sigma_plus().spherical_components();
        assert!((sm[0] - 1.0).abs() < 1e-15 && sm[1].abs() < 1e-15);
    }

    #[test]
    fn polarization_unit_norm_random() {
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let p = Polarization::new(next() * (PI - 1e-9), (next() - 0.5) * PI);
            let norm: f64 = p.spherical_components().iter().map(|e| e * e).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dipole_selection_rule() {
        let scheme = test_scheme_yb173();
        for q in [-1, 0, 1] {
            let d = dipole_operator(&scheme, half(7), q).unwrap();
            for r in 0..6 {
                for c in 0..8 {
                    let m_g = -5 + 2 * r as i32;
                    let m_e = -7 + 2 * c as i32;
                    if m_e != m_g + 2 * q {
                        assert_eq!(d[(r, c)], cr(0.0));
                    }
                }
            }
        }
        assert!(dipole_operator(&scheme, half(9), 0).is_err());
    }

    #[test]
    fn dipole_branching_matches_cg_reference() {
        // branching out of |F'=7/2, m=1/2> is 2/7 : 4/7 : 1/7 to
        // m = -1/2, +1/2, +3/2, and the two sigma couplings have ratio 2
        let scheme = test_scheme_yb173();
        let raw: Vec<f64> = [1, 0, -1]
            .iter()
            .map(|&q| dipole_amplitude(&scheme, half(7), half(1) - HalfInt::from_int(q), q).powi(2))
            .collect();
        let tot: f64 = raw.iter().sum();
        let expect = [2.0 / 7.0, 4.0 / 7.0, 1.0 / 7.0];
        for (b, e) in raw.iter().zip(expect) {
            assert!((b / tot - e).abs() < 1e-12, "{b} {e}");
        }
        assert!((raw[0] / raw[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dipole_isotropic_sum_rule() {
        // sum over F' and q of |amplitude|^2 is the same for every m_g
        let scheme = test_scheme_yb173();
        let sums: Vec<f64> = scheme
            .f_ground
            .m_values()
            .map(|m_g| {
                let mut s = 0.0;
                for b in &scheme.branches {
                    for q in [-1, 0, 1] {
                        s += dipole_amplitude(&scheme, b.f_prime, m_g, q).powi(2);
                    }
                }
                s
            })
            .collect();
        for s in &sums {
            assert!((s - sums[0]).abs() < 1e-12 * sums[0]);
        }
    }

    #[test]
    fn lightshift_zero_intensity() {
        let scheme = test_scheme_yb173();
        let mut laser = table_laser(11.217);
        laser.intensity = 0.0;
        let spec = lightshift_spectrum(&laser, &scheme).unwrap();
        assert!(spec.delta.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn lightshift_linearity_in_intensity() {
        let scheme = test_scheme_yb173();
        let laser = table_laser(-5.005);
        let mut laser2 = laser.clone();
        laser2.intensity *= 2.0;
        let s1 = lightshift_spectrum(&laser, &scheme).unwrap();
        let s2 = lightshift_spectrum(&laser2, &scheme).unwrap();
        for (a, b) in s1.delta.iter().zip(&s2.delta) {
            assert!((b - 2.0 * a).abs() < 1e-12 * a.abs());
        }
    }

    #[test]
    fn lightshift_pi_polarization_symmetry() {
        let scheme = test_scheme_yb173();
        let laser = LaserParams::new(1e6, 9.2e9, Polarization::pi());
        let s = lightshift_spectrum(&laser, &scheme).unwrap();
        let n = s.delta.len();
        for k in 0..n {
            let rel = (s.delta[k] - s.delta[n - 1 - k]).abs() / s.delta[k].abs();
            assert!(rel < 1e-10, "k = {k}: {rel}");
        }
    }

    #[test]
    fn covariant_detuning_equalizes_dls() {
        let scheme = test_scheme_yb173();
        let s = lightshift_spectrum(&table_laser(11.217), &scheme).unwrap();
        let dls = dls_vector(&s);
        let rms = {
            let r0 = dls.delta[0];
            let devs: Vec<f64> = dls.delta.iter().map(|d| d / r0 - 1.0).collect();
            (devs[1..].iter().map(|d| d * d).sum::<f64>() / (dls.delta.len() as f64)).sqrt()
        };
        assert!(rms < 0.01, "sigma_X at +11.217 GHz: {rms}");
    }

    #[test]
    fn cat_detuning_dls_ratios() {
        let scheme = test_scheme_yb173();
        let s = lightshift_spectrum(&table_laser(-5.005), &scheme).unwrap();
        let dls = dls_vector(&s);
        let pattern = [7.0, 9.0, 11.0, 13.0, 15.0];
        let base = dls.delta[0] / pattern[0];
        for (d, p) in dls.delta.iter().zip(pattern) {
            assert!((d / base / p - 1.0).abs() < 0.02, "{} vs {p}", d / base);
        }
    }

    #[test]
    fn dls_cumsum_roundtrip() {
        let scheme = test_scheme_yb173();
        let s = lightshift_spectrum(&table_laser(-11.89), &scheme).unwrap();
        let dls = dls_vector(&s);
        let back = LightshiftSpectrum::from_dls(s.f_ground, &dls);
        for (a, b) in back.delta.iter().zip(&s.delta) {
            assert!((a - (b - s.delta[0])).abs() < 1e-9 * s.delta[0].abs().max(1.0));
        }
    }

    #[test]
    fn resonance_collision_rejected() {
        let scheme = test_scheme_yb173();
        let laser = LaserParams::new(1e6, scheme.branches[1].hfs_offset_hz, Polarization::sigma_plus());
        assert!(matches!(
            lightshift_spectrum(&laser, &scheme),
            Err(AtomError::ResonanceCollision { .. })
        ));
    }

    #[test]
    fn scattering_strength_reference_points() {
        let scheme = test_scheme_yb173();
        // -11.9 GHz: ~0.052 kHz, so strength x 1.24 ms ~= 6.4e-2 events
        let events_red = scattering_strength(&table_laser(-11.9), &scheme) * 1.24e-3;
        assert!(
            (events_red / 6.4e-2 - 1.0).abs() < 0.10,
            "events at -11.9 GHz: {events_red:.4}"
        );
        // +11.2 GHz: ~0.058 kHz, x 0.02697 ms ~= 1.6e-3 events
        let events_blue = scattering_strength(&table_laser(11.2), &scheme) * 2.697e-5;
        assert!(
            (events_blue / 1.6e-3 - 1.0).abs() < 0.10,
            "events at +11.2 GHz: {events_blue:.5e}"
        );
        let mut dark = table_laser(11.2);
        dark.intensity = 0.0;
        assert_eq!(scattering_strength(&dark, &scheme), 0.0);
    }
}
