//! Dark-state-limited selective optical pumping: the four-level Lindblad
//! model, steady-state ratios, iterated pumping with intercycle
//! decoherence, and the six-level initialization sequence.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atom::{dipole_amplitude, LevelScheme};
use crate::dynamics::{CollapseSet, DensityMatrix, DynamicsError, Lindblad};
use crate::halfint::HalfInt;
use crate::linalg::{cr, CMat};

#[derive(Debug, Error)]
pub enum PumpError {
    #[error("both Rabi couplings are zero")]
    NoCoupling,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Four-level pumping parameters; rates in units of the total decay rate.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct FourLevelParams {
    pub detuning: f64,
    pub omega_a: f64,
    pub omega_c: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_c: f64,
}

impl FourLevelParams {
    /// The reference parameter set characterized by the transition's
    /// branching ratios: {0, sqrt(2/7), sqrt(1/7), 2/7, 4/7, 1/7}.
    pub fn reference() -> Self {
        FourLevelParams {
            detuning: 0.0,
            omega_a: (2.0f64 / 7.0).sqrt(),
            omega_c: (1.0f64 / 7.0).sqrt(),
            gamma_a: 2.0 / 7.0,
            gamma_b: 4.0 / 7.0,
            gamma_c: 1.0 / 7.0,
        }
    }

    pub fn omega_eff(&self) -> f64 {
        (self.omega_a * self.omega_a + self.omega_c * self.omega_c).sqrt()
    }
}

/// Dark superposition of |a> and |c> that does not couple to the pump:
/// (Omega_c |a> - Omega_a |c>) / Omega_eff.
pub fn dark_state(omega_a: f64, omega_c: f64) -> Result<[f64; 2], PumpError> {
    let norm = (omega_a * omega_a + omega_c * omega_c).sqrt();
    if norm == 0.0 {
        return Err(PumpError::NoCoupling);
    }
    Ok([omega_c / norm, -omega_a / norm])
}

/// Steady-state population ratio P_a / P_c = Omega_c^2 / Omega_a^2.
pub fn steady_state_ratio(omega_a: f64, omega_c: f64) -> f64 {
    assert!(omega_a != 0.0, "ratio undefined at Omega_a = 0");
    (omega_c / omega_a).powi(2)
}

/// Basis order of the four-level model: |a>, |b>, |c>, |e>.
fn four_level_lindblad(p: &FourLevelParams) -> Lindblad {
    let mut h = CMat::zeros(4, 4);
    h[(3, 3)] = cr(p.detuning);
    h[(3, 0)] = cr(p.omega_a);
    h[(0, 3)] = cr(p.omega_a);
    h[(3, 2)] = cr(p.omega_c);
    h[(2, 3)] = cr(p.omega_c);
    let mut collapses = CollapseSet::empty();
    for (idx, g) in [(0, p.gamma_a), (1, p.gamma_b), (2, p.gamma_c)] {
        let mut c = CMat::zeros(4, 4);
        c[(idx, 3)] = cr(g.sqrt());
        collapses.operators.push(c);
    }
    Lindblad::new(h, collapses)
}

/// Lindblad evolution of the four-level model for time t (in 1/Gamma-units
/// when the params are the dimensionless reference set).
pub fn four_level_evolve(
    params: &FourLevelParams,
    rho0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix, PumpError> {
    Ok(four_level_lindblad(params).evolve_expm(rho0, t)?)
}

/// Zero the coherences of a density matrix (intercycle decoherence); a
/// partial factor in [0, 1] scales off-diagonals instead, 0 meaning full
/// decoherence.
pub fn decohere(rho: &DensityMatrix, retain: f64) -> DensityMatrix {
    let n = rho.dim();
    let mut m = rho.matrix().clone();
    for r in 0..n {
        for c in 0..n {
            if r != c {
                m[(r, c)] *= cr(retain);
            }
        }
    }
    DensityMatrix::new(m).expect("decohered state stays valid")
}

/// Iterated pumping: evolve to pump completion, decohere, repeat. Returns
/// the target (|b>) population after each cycle; the trace is monotone
/// non-decreasing.
pub fn iterate_pumping(
    params: &FourLevelParams,
    cycles: usize,
    rho0: &DensityMatrix,
    pump_time: f64,
    retain_coherence: f64,
) -> Result<Vec<f64>, PumpError> {
    assert!(cycles >= 1);
    let lind = four_level_lindblad(params);
    let prop = lind.propagator(pump_time);
    let mut rho = rho0.clone();
    let mut out = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        let v = &prop * crate::linalg::vectorize(rho.matrix());
        rho = decohere(
            &DensityMatrix::new_relaxed(crate::linalg::unvectorize(&v, 4))?,
            retain_coherence,
        );
        out.push(rho.populations()[1]);
    }
    Ok(out)
}

/// Default pump duration: 25 / min(gamma), empirically deep in the
/// steady-state regime for the four-level model.
pub fn default_pump_time(params: &FourLevelParams) -> f64 {
    25.0 / params
        .gamma_a
        .min(params.gamma_b)
        .min(params.gamma_c)
        .max(1e-12)
}

/// One step of the six-level sequence: the target excited sublevel and how
/// many pump iterations it receives.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct PumpStep {
    pub target_m_fprime: HalfInt,
    pub iterations: usize,
}

/// Parameters of the six-level selective-pumping simulation. Times are in
/// 1/Gamma units; the Rabi scale is relative to Gamma.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SequenceParams {
    /// Per-pulse duration, 1/Gamma units.
    pub pulse_time: f64,
    /// sigma-coupling Rabi scale in Gamma units, multiplying the
    /// branching-ratio amplitudes.
    pub rabi_scale: f64,
    /// Bias field (tesla) setting the ground Zeeman splitting that makes the
    /// dark states quasi-dark.
    pub b_tesla: f64,
    /// Ground Zeeman shift per unit m_F per tesla, in units of Gamma
    /// (ordinary-frequency shift over linewidth).
    pub zeeman_per_tesla_gamma: f64,
    /// Off-diagonal retention between iterations (0 = full decoherence).
    pub retain_coherence: f64,
}

impl SequenceParams {
    /// Defaults calibrated so the reference sequence reproduces the
    /// published simulation (0.964 in the target state): resonant pulses of
    /// duration 65/Gamma at Omega_eff = Gamma, 4.6 mT, 9.5 kHz/mT ground
    /// Zeeman slope.
    pub fn reference() -> Self {
        SequenceParams {
            pulse_time: 65.0,
            rabi_scale: 1.0,
            b_tesla: 4.6e-3,
            zeeman_per_tesla_gamma: 9.5e6 / 182e3,
            retain_coherence: 0.0,
        }
    }
}

/// The published initialization sequence: excitations +3/2, +1/2, -1/2,
/// -3/2, -5/2 with 30, 5, 5, 15, 1 iterations.
pub fn reference_sequence() -> Vec<PumpStep> {
    [(3, 30), (1, 5), (-1, 5), (-3, 15), (-5, 1)]
        .into_iter()
        .map(|(tm, iterations)| PumpStep {
            target_m_fprime: HalfInt::from_twice(tm),
            iterations,
        })
        .collect()
}

/// Build the one-step generator for a target excited sublevel: the six
/// ground states plus that excited state, sigma+/- couplings weighted by
/// branching amplitudes, decay back to the three connected grounds, and the
/// ground Zeeman ladder.
fn step_lindblad(scheme: &LevelScheme, params: &SequenceParams, m_fprime: HalfInt) -> Lindblad {
    let f = scheme.f_ground;
    let dim = f.multiplicity() + 1;
    let e = dim - 1;
    let f_prime = scheme.branches[0].f_prime;
    // raw line strengths to the three connected grounds
    let mut raw = Vec::new();
    for q in [-1i32, 0, 1] {
        let m_g = m_fprime - HalfInt::from_int(q);
        if f.valid_projection(m_g) {
            raw.push((q, m_g, dipole_amplitude(scheme, f_prime, m_g, q).powi(2)));
        }
    }
    let total: f64 = raw.iter().map(|(_, _, a)| a).sum();
    let zeeman = params.zeeman_per_tesla_gamma * params.b_tesla * 2.0 * std::f64::consts::PI;
    let mut h = CMat::zeros(dim, dim);
    for (k, m) in f.m_values().enumerate() {
        h[(k, k)] = cr(zeeman * m.value());
    }
    // pulse resonant with the target transition frame: excited level carries
    // the target's ground Zeeman energy
    h[(e, e)] = cr(zeeman * m_fprime.value());
    let mut collapses = CollapseSet::empty();
    for &(q, m_g, amp2) in &raw {
        let k = ((m_g.twice() + f.twice()) / 2) as usize;
        let branching = amp2 / total;
        if q != 0 {
            let omega = params.rabi_scale * branching.sqrt();
            h[(e, k)] += cr(omega);
            h[(k, e)] += cr(omega);
        }
        let mut c = CMat::zeros(dim, dim);
        c[(k, e)] = cr(branching.sqrt());
        collapses.operators.push(c);
    }
    Lindblad::new(h, collapses)
}

/// Run the six-level sequence from an initial ground distribution; returns
/// final ground populations (ascending m).
pub fn six_level_sequence(
    scheme: &LevelScheme,
    params: &SequenceParams,
    steps: &[PumpStep],
    initial_ground: &[f64],
) -> Result<Vec<f64>, PumpError> {
    let f = scheme.f_ground;
    let gdim = f.multiplicity();
    assert_eq!(initial_ground.len(), gdim);
    let dim = gdim + 1;
    let mut rho = CMat::zeros(dim, dim);
    for (k, &p) in initial_ground.iter().enumerate() {
        rho[(k, k)] = cr(p);
    }
    let mut state = DensityMatrix::new_relaxed(rho)?;
    for step in steps {
        let lind = step_lindblad(scheme, params, step.target_m_fprime);
        let prop = lind.propagator(params.pulse_time);
        for _ in 0..step.iterations {
            let v = &prop * crate::linalg::vectorize(state.matrix());
            state = decohere(
                &DensityMatrix::new_relaxed(crate::linalg::unvectorize(&v, dim))?,
                params.retain_coherence,
            );
        }
    }
    Ok(state.populations()[..gdim].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants_file::test_scheme_yb173;
    use crate::linalg::CVec;

    #[test]
    fn dark_state_values() {
        let d = dark_state(1.0, 1.0).unwrap();
        assert!((d[0] - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
        assert!((d[1] + 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
        // reference params: amplitudes (sqrt(1/3), -sqrt(2/3))
        let p = FourLevelParams::reference();
        let d = dark_state(p.omega_a, p.omega_c).unwrap();
        assert!((d[0] - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((d[1] + (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(dark_state(0.0, 0.0).is_err());
    }

    #[test]
    fn dark_state_decouples() {
        // evolution from |D> keeps the excited state empty
        let p = FourLevelParams::reference();
        let d = dark_state(p.omega_a, p.omega_c).unwrap();
        let mut v = CVec::zeros(4);
        v[0] = cr(d[0]);
        v[2] = cr(d[1]);
        let rho0 = DensityMatrix::pure(&v);
        for steps in 1..=5 {
            let rho = four_level_evolve(&p, &rho0, 3.0 * steps as f64).unwrap();
            assert!(rho.populations()[3] < 1e-10);
            // populations of a and c unchanged
            assert!((rho.populations()[0] - d[0] * d[0]).abs() < 1e-8);
        }
    }

    #[test]
    fn steady_ratio_matches_formula() {
        let p = FourLevelParams::reference();
        assert!((steady_state_ratio(p.omega_a, p.omega_c) - 0.5).abs() < 1e-12);
        assert_eq!(steady_state_ratio(1.0, 0.0), 0.0);
        // long-time evolution reproduces the ratio within 1e-3
        let rho0 = DensityMatrix::new_relaxed({
            let mut m = CMat::zeros(4, 4);
            for k in 0..3 {
                m[(k, k)] = cr(1.0 / 3.0);
            }
            m
        })
        .unwrap();
        let rho = four_level_evolve(&p, &rho0, 600.0).unwrap();
        let pops = rho.populations();
        assert!(
            (pops[0] / pops[2] - 0.5).abs() < 1e-3,
            "P_a/P_c = {}",
            pops[0] / pops[2]
        );
    }

    #[test]
    fn coherent_oscillation_at_omega_eff() {
        // gamma = 0, Delta = 0: population oscillates between b-absent
        // levels at Omega_eff
        let p = FourLevelParams {
            detuning: 0.0,
            omega_a: (2.0f64 / 7.0).sqrt(),
            omega_c: (1.0f64 / 7.0).sqrt(),
            gamma_a: 0.0,
            gamma_b: 0.0,
            gamma_c: 0.0,
        };
        let mut v = CVec::zeros(4);
        v[3] = cr(1.0);
        let rho0 = DensityMatrix::pure(&v);
        // half Rabi period of the effective two-level (|e>, bright) system
        let t_half = std::f64::consts::PI / (2.0 * p.omega_eff());
        let rho = four_level_evolve(&p, &rho0, t_half).unwrap();
        assert!(rho.populations()[3] < 1e-9, "{:?}", rho.populations());
        let rho_full = four_level_evolve(&p, &rho0, 2.0 * t_half).unwrap();
        assert!((rho_full.populations()[3] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn iterated_pumping_monotone() {
        let p = FourLevelParams::reference();
        let rho0 = DensityMatrix::new_relaxed({
            let mut m = CMat::zeros(4, 4);
            for k in 0..3 {
                m[(k, k)] = cr(1.0 / 3.0);
            }
            m
        })
        .unwrap();
        let trace = iterate_pumping(&p, 8, &rho0, default_pump_time(&p), 0.0).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{trace:?}");
        }
        assert!(trace[0] > 0.5 && trace[0] < 0.75, "first cycle {}", trace[0]);
        assert!(trace[7] > 0.95);
        // a pure |b> start stays put
        let mut v = CVec::zeros(4);
        v[1] = cr(1.0);
        let stay = iterate_pumping(&p, 3, &DensityMatrix::pure(&v), default_pump_time(&p), 0.0)
            .unwrap();
        assert!(stay.iter().all(|&b| b > 0.999));
    }

    #[test]
    fn six_level_reference_sequence() {
        let scheme = test_scheme_yb173();
        let params = SequenceParams::reference();
        let uniform = vec![1.0 / 6.0; 6];
        let pops = six_level_sequence(&scheme, &params, &reference_sequence(), &uniform).unwrap();
        assert!(
            (pops[0] - 0.964).abs() < 0.02,
            "target population {}",
            pops[0]
        );
        // a single sweep leaves qualitatively ~0.8
        let sweep: Vec<PumpStep> = reference_sequence()
            .into_iter()
            .map(|s| PumpStep {
                iterations: 1,
                ..s
            })
            .collect();
        let pops1 = six_level_sequence(&scheme, &params, &sweep, &uniform).unwrap();
        assert!(pops1[0] > 0.7 && pops1[0] < 0.92, "single sweep {}", pops1[0]);
        // zero iterations: unchanged
        let none: Vec<PumpStep> = reference_sequence()
            .into_iter()
            .map(|s| PumpStep {
                iterations: 0,
                ..s
            })
            .collect();
        let pops0 = six_level_sequence(&scheme, &params, &none, &uniform).unwrap();
        for p in pops0 {
            assert!((p - 1.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn six_level_retains_initialized_state() {
        let scheme = test_scheme_yb173();
        let params = SequenceParams::reference();
        let mut init = vec![0.0; 6];
        init[0] = 1.0;
        // the final step couples only m = -3/2, not the stretched state
        let last: Vec<PumpStep> = reference_sequence().into_iter().skip(4).collect();
        let pops = six_level_sequence(&scheme, &params, &last, &init).unwrap();
        assert!(pops[0] >= 0.999, "{}", pops[0]);
    }
}
