//! Time evolution: the closed-form single-beam Raman unitary, Lindblad
//! propagation with photon-scattering, dephasing, and Zeeman terms, and the
//! fidelity and magnetization observables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atom::{dipole_operator, rabi_scale_sq, AtomError, LaserParams, LevelScheme, LightshiftSpectrum};
#[cfg(test)]
use crate::atom::consts;
use crate::halfint::HalfInt;
use crate::linalg::{
    cr, expm, kron, max_abs_diff, sqrtm_psd, unvectorize, vectorize, CMat, CVec, C_I,
};
use crate::wigner::small_d_matrix;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("density matrix invalid: {0}")]
    InvalidState(String),
    #[error("integration step underflow at t = {reached} of {target}")]
    StepUnderflow { reached: f64, target: f64 },
    #[error(transparent)]
    Atom(#[from] AtomError),
}

/// A (2F+1)-dimensional density matrix. Hermitian, unit trace, positive
/// semidefinite within tolerances checked at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self, DynamicsError> {
        let herm = max_abs_diff(&mat, &mat.adjoint());
        if herm > 1e-12 {
            return Err(DynamicsError::InvalidState(format!(
                "hermiticity defect {herm:.3e}"
            )));
        }
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(DynamicsError::InvalidState(format!("trace {trace}")));
        }
        let (vals, _) = crate::linalg::eigh(&mat);
        if vals.iter().any(|&v| v < -1e-10) {
            return Err(DynamicsError::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                vals[0]
            )));
        }
        Ok(DensityMatrix { mat })
    }

    /// Relaxed construction for evolution outputs and model assembly:
    /// symmetrizes roundoff and renormalizes small trace drift, still
    /// rejecting structural invalidity.
    pub fn new_relaxed(mut mat: CMat) -> Result<Self, DynamicsError> {
        mat = (&mat + mat.adjoint()) * cr(0.5);
        let trace = mat.trace().re;
        if (trace - 1.0).abs() > 1e-6 {
            return Err(DynamicsError::InvalidState(format!(
                "trace drifted to {trace}"
            )));
        }
        mat /= cr(trace);
        Ok(DensityMatrix { mat })
    }

    pub fn pure(state: &CVec) -> Self {
        let norm = state.norm();
        let psi = state / cr(norm);
        DensityMatrix {
            mat: &psi * psi.adjoint(),
        }
    }

    /// Pure basis state |m_F = -F + k>.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut v = CVec::zeros(dim);
        v[k] = cr(1.0);
        DensityMatrix::pure(&v)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            mat: CMat::identity(dim, dim) * cr(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.mat[(k, k)].re).collect()
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

/// Collapse operators, each in units of sqrt(1/s).
#[derive(Clone, Debug, Default)]
pub struct CollapseSet {
    pub operators: Vec<CMat>,
}

impl CollapseSet {
    pub fn empty() -> Self {
        CollapseSet { operators: vec![] }
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn extend(&mut self, other: CollapseSet) {
        self.operators.extend(other.operators);
    }

    /// Total jump rate sum_n Tr[C_n^dag C_n rho], 1/s.
    pub fn total_rate(&self, rho: &DensityMatrix) -> f64 {
        self.operators
            .iter()
            .map(|c| (c.adjoint() * c * rho.matrix()).trace().re)
            .sum()
    }
}

/// Magnetic-field configuration for the rotated-frame Hamiltonian.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FieldGeometry {
    /// Bias field orthogonal to the beam: lightshift frame is rotated by
    /// beta = pi/2 against the Zeeman axis.
    OrthogonalToBeam,
    /// Bias field along the beam: lightshift and Zeeman terms commute.
    ParallelToBeam,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub b_tesla: f64,
    pub geometry: FieldGeometry,
}

impl FieldConfig {
    pub fn off() -> Self {
        FieldConfig {
            b_tesla: 0.0,
            geometry: FieldGeometry::OrthogonalToBeam,
        }
    }
}

/// Closed-form single-beam Raman unitary
/// d(beta) exp(-i t diag(delta)) d(beta)^dag.
pub fn raman_unitary(spectrum: &LightshiftSpectrum, beta: f64, t: f64) -> CMat {
    assert!(t >= 0.0, "negative evolution time");
    let d = small_d_matrix(spectrum.f_ground, beta);
    let dim = spectrum.dim();
    let phases = CMat::from_diagonal(&CVec::from_iterator(
        dim,
        spectrum.delta.iter().map(|&dk| (-C_I * dk * t).exp()),
    ));
    &d * phases * d.adjoint()
}

/// Rotated-frame Hamiltonian in rad/s. For the orthogonal geometry this is
/// d(beta) H_LS d(beta)^dag plus the diagonal Zeeman term; for the parallel
/// geometry both terms are diagonal. `beta` is pi/2 in the paper geometry
/// but kept explicit so misalignment can be modeled.
pub fn rotated_hamiltonian(
    spectrum: &LightshiftSpectrum,
    scheme: &LevelScheme,
    field: FieldConfig,
    beta: f64,
) -> CMat {
    let dim = spectrum.dim();
    let h_ls = CMat::from_diagonal(&CVec::from_iterator(
        dim,
        spectrum.delta.iter().map(|&dk| cr(dk)),
    ));
    rotated_hamiltonian_operator(&h_ls, scheme, field, beta)
}

/// Same frame assembly for a full (possibly non-diagonal) beam-frame
/// lightshift operator.
pub fn rotated_hamiltonian_operator(
    h_beam: &CMat,
    scheme: &LevelScheme,
    field: FieldConfig,
    beta: f64,
) -> CMat {
    let dim = h_beam.nrows();
    let zeeman_slope = scheme.zeeman_slope(field.b_tesla);
    let f = scheme.f_ground;
    let zeeman = CMat::from_diagonal(&CVec::from_iterator(
        dim,
        (0..dim).map(|k| cr(zeeman_slope * (-f.value() + k as f64))),
    ));
    match field.geometry {
        FieldGeometry::OrthogonalToBeam => {
            let d = small_d_matrix(f, beta);
            &d * h_beam * d.adjoint() + zeeman
        }
        FieldGeometry::ParallelToBeam => h_beam + zeeman,
    }
}

/// Photon-scattering collapse operators C_q (q = -1, 0, +1): emission into
/// polarization q after absorption from the laser polarization, summed over
/// excited branches with complex denominators Delta_L - Delta_HFS + i Gamma/2.
///
/// Operators are in sqrt(1/s); the overall prefactor sqrt(Gamma) Omega (with
/// Omega the stretched-transition Rabi scale) is the convention calibrated
/// against the reference detuning-table infidelities.
pub fn scattering_collapse(
    laser: &LaserParams,
    scheme: &LevelScheme,
) -> Result<CollapseSet, DynamicsError> {
    let dim = scheme.ground_dim();
    let omega = rabi_scale_sq(laser, scheme).sqrt();
    // absorption operator: sum over q' of c_q' D_{F'}^{(q')}, per branch
    let mut ops = Vec::new();
    for q in [-1, 0, 1] {
        let mut c_q = CMat::zeros(dim, dim);
        for b in &scheme.branches {
            let denom = Complex64::new(
                2.0 * std::f64::consts::PI * (laser.detuning_hz - b.hfs_offset_hz),
                scheme.gamma / 2.0,
            );
            let emit = dipole_operator(scheme, b.f_prime, q)?;
            let excited_dim = b.f_prime.multiplicity();
            let mut absorb = CMat::zeros(dim, excited_dim);
            for qp in [-1, 0, 1] {
                let w = laser.polarization.component(qp);
                if w != 0.0 {
                    absorb += dipole_operator(scheme, b.f_prime, qp)? * cr(w);
                }
            }
            c_q += &emit * absorb.adjoint() * (cr(1.0) / denom);
        }
        ops.push(c_q * cr(scheme.gamma.sqrt() * omega));
    }
    Ok(CollapseSet { operators: ops })
}

use num_complex::Complex64;

/// Single dephasing collapse operator built from per-pair coherence times
/// T2_k = coefficient / (F - k):
/// C = sum_k sqrt(1/(2 T2_k)) (|-F+k><-F+k| - |F-k><F-k|).
///
/// The 1/2 inside the square root makes the pair-k Ramsey contrast decay as
/// exp(-t / T2_k), matching the fit convention the coefficient comes from.
pub fn dephasing_collapse(t2_coefficient: f64, f: HalfInt) -> Result<CollapseSet, DynamicsError> {
    if !(t2_coefficient > 0.0) {
        return Err(DynamicsError::InvalidState(format!(
            "dephasing coefficient must be positive, got {t2_coefficient}"
        )));
    }
    let dim = f.multiplicity();
    let pairs = dim / 2;
    let mut c = CMat::zeros(dim, dim);
    for k in 0..pairs {
        let rate = (f.value() - k as f64) / t2_coefficient; // 1 / T2_k
        let amp = cr((rate / 2.0).sqrt());
        c[(k, k)] += amp;
        c[(dim - 1 - k, dim - 1 - k)] -= amp;
    }
    Ok(CollapseSet { operators: vec![c] })
}

/// Lindblad generator and propagation for a fixed Hamiltonian and collapse
/// set. H in rad/s, times in seconds.
pub struct Lindblad {
    pub hamiltonian: CMat,
    pub collapses: CollapseSet,
}

impl Lindblad {
    pub fn new(hamiltonian: CMat, collapses: CollapseSet) -> Self {
        Lindblad {
            hamiltonian,
            collapses,
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// Dense superoperator L with d rho/dt = L vec(rho).
    pub fn liouvillian(&self) -> CMat {
        let n = self.dim();
        let id = CMat::identity(n, n);
        let h = &self.hamiltonian;
        let mut l = kron(&id, h) * (-C_I) + kron(&h.transpose(), &id) * C_I;
        for c in &self.collapses.operators {
            let cdc = c.adjoint() * c;
            l += kron(&c.conjugate(), c)
                - kron(&id, &cdc) * cr(0.5)
                - kron(&cdc.transpose(), &id) * cr(0.5);
        }
        l
    }

    /// Propagator exp(L t) acting on vectorized density matrices.
    pub fn propagator(&self, t: f64) -> CMat {
        expm(&(self.liouvillian() * cr(t)))
    }

    /// Evolve by dense superoperator exponentiation.
    pub fn evolve_expm(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix, DynamicsError> {
        let v = self.propagator(t) * vectorize(rho0.matrix());
        DensityMatrix::new_relaxed(unvectorize(&v, self.dim()))
    }

    /// Evolve by adaptive Dormand-Prince RK45 on the vectorized generator.
    pub fn evolve_adaptive(
        &self,
        rho0: &DensityMatrix,
        t: f64,
        tol: f64,
    ) -> Result<DensityMatrix, DynamicsError> {
        assert!(tol > 0.0);
        if t == 0.0 {
            return Ok(rho0.clone());
        }
        let l = self.liouvillian();
        let mut y = vectorize(rho0.matrix());
        let mut time = 0.0f64;
        // initial step: resolve the fastest scale in L
        let lnorm = crate::linalg::one_norm(&l).max(1e-30);
        let mut h = (0.1 / lnorm).min(t);
        let f = |y: &CVec| -> CVec { &l * y };
        while time < t {
            h = h.min(t - time);
            if h < t * 1e-15 {
                return Err(DynamicsError::StepUnderflow {
                    reached: time,
                    target: t,
                });
            }
            let k1 = f(&y);
            let k2 = f(&(&y + &k1 * cr(h / 5.0)));
            let k3 = f(&(&y + &k1 * cr(3.0 * h / 40.0) + &k2 * cr(9.0 * h / 40.0)));
            let k4 = f(&(&y
                + &k1 * cr(44.0 * h / 45.0)
                + &k2 * cr(-56.0 * h / 15.0)
                + &k3 * cr(32.0 * h / 9.0)));
            let k5 = f(&(&y
                + &k1 * cr(19372.0 * h / 6561.0)
                + &k2 * cr(-25360.0 * h / 2187.0)
                + &k3 * cr(64448.0 * h / 6561.0)
                + &k4 * cr(-212.0 * h / 729.0)));
            let k6 = f(&(&y
                + &k1 * cr(9017.0 * h / 3168.0)
                + &k2 * cr(-355.0 * h / 33.0)
                + &k3 * cr(46732.0 * h / 5247.0)
                + &k4 * cr(49.0 * h / 176.0)
                + &k5 * cr(-5103.0 * h / 18656.0)));
            let y5 = &y
                + &k1 * cr(35.0 * h / 384.0)
                + &k3 * cr(500.0 * h / 1113.0)
                + &k4 * cr(125.0 * h / 192.0)
                + &k5 * cr(-2187.0 * h / 6784.0)
                + &k6 * cr(11.0 * h / 84.0);
            let k7 = f(&y5);
            let y4 = &y
                + &k1 * cr(5179.0 * h / 57600.0)
                + &k3 * cr(7571.0 * h / 16695.0)
                + &k4 * cr(393.0 * h / 640.0)
                + &k5 * cr(-92097.0 * h / 339200.0)
                + &k6 * cr(187.0 * h / 2100.0)
                + &k7 * cr(h / 40.0);
            let err = (&y5 - &y4).norm() / (1.0 + y5.norm());
            if err <= tol {
                time += h;
                y = y5;
            }
            let safety = 0.9 * (tol / err.max(1e-300)).powf(0.2);
            h *= safety.clamp(0.2, 5.0);
        }
        DensityMatrix::new_relaxed(unvectorize(&y, self.dim()))
    }
}

/// Uhlmann fidelity |Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))|^2.
pub fn state_fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64, DynamicsError> {
    if rho1.dim() != rho2.dim() {
        return Err(DynamicsError::InvalidState("dimension mismatch".into()));
    }
    let s1 = sqrtm_psd(rho1.matrix());
    let inner = &s1 * rho2.matrix() * &s1;
    let root = sqrtm_psd(&((&inner + inner.adjoint()) * cr(0.5)));
    let f = root.trace().norm_sqr();
    Ok(f.clamp(0.0, 1.0 + 1e-9).min(1.0))
}

/// Fidelity against a pure target, <psi| rho |psi>.
pub fn fidelity_to_pure(rho: &DensityMatrix, psi: &CVec) -> f64 {
    (psi.adjoint() * rho.matrix() * psi)[(0, 0)].re.clamp(0.0, 1.0)
}

/// Magnetization <m_F> = sum_k m_k rho_kk.
pub fn magnetization(rho: &DensityMatrix, f: HalfInt) -> f64 {
    rho.populations()
        .iter()
        .enumerate()
        .map(|(k, p)| (-f.value() + k as f64) * p)
        .sum()
}
