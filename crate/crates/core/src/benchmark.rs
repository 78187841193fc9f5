//! Gate groups and randomized benchmarking: the 24-element Clifford group
//! and 22-element dihedral gate list with pulse decompositions, CRB and
//! noise-bias DRB circuit sampling, simulation under pluggable noise
//! (logical channels or full pulse physics), coarse-grained measurement,
//! decay fitting, and noise-bias extraction.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitting::{fit_decay, DecayFit, FitError};
use crate::linalg::{cr, phase_distance, unvectorize, vectorize, CMat, CVec, C_I, C_ONE, C_ZERO};
use crate::pulse::{sample_noise, Hardware, Propagator, Pulse, PulseFactory};
use crate::rng::StreamFamily;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("group inverse not found (composition left the group?)")]
    InverseNotFound,
    #[error("fit failed: {0}")]
    Fit(#[from] FitError),
}

/// A logical gate: its 2x2 action (up to global phase) and its realization
/// as a time-ordered sequence of primitive pulses.
#[derive(Clone, Debug)]
pub struct LogicalGate {
    pub label: String,
    pub matrix: CMat,
    /// Time-ordered pulses; the reverse-order product of their logical
    /// actions equals `matrix` up to global phase.
    pub pulses: Vec<Pulse>,
}

impl LogicalGate {
    fn new(label: &str, matrix: CMat, pulses: Vec<Pulse>) -> Self {
        LogicalGate {
            label: label.to_string(),
            matrix,
            pulses,
        }
    }

    /// Product of the pulse logical actions in operator (reverse-time) order.
    pub fn pulse_product(&self) -> CMat {
        let mut m = CMat::identity(2, 2);
        for p in &self.pulses {
            m = p.logical() * m;
        }
        m
    }
}

fn rz(theta: f64) -> CMat {
    CMat::from_diagonal(&CVec::from_vec(vec![C_ONE, (C_I * theta).exp()]))
}

fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO])
}

/// The single-qubit Clifford group (24 elements modulo phase) generated by
/// the half-pi cat rotation and Rz(pi/2), with shortest-word pulse
/// decompositions found by breadth-first search.
pub fn clifford_group() -> Vec<LogicalGate> {
    let cat = Pulse::CatHalfPi.logical();
    let rz2 = rz(std::f64::consts::FRAC_PI_2);
    let gens = [
        (cat, Pulse::CatHalfPi, "C"),
        (rz2, Pulse::Rz(std::f64::consts::FRAC_PI_2), "S"),
    ];
    let mut group: Vec<LogicalGate> = vec![LogicalGate::new("I", CMat::identity(2, 2), vec![])];
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &idx in &frontier {
            for (gm, gp, gl) in &gens {
                let m = gm * &group[idx].matrix;
                if group.iter().all(|g| phase_distance(&g.matrix, &m) > 1e-9) {
                    let mut pulses = group[idx].pulses.clone();
                    pulses.push(*gp);
                    let label = if group[idx].label == "I" {
                        gl.to_string()
                    } else {
                        format!("{}{}", group[idx].label, gl)
                    };
                    group.push(LogicalGate::new(&label, m, pulses));
                    next.push(group.len() - 1);
                }
            }
        }
        frontier = next;
    }
    assert_eq!(group.len(), 24, "Clifford group order");
    // relax words toward fewer cat pulses (the expensive primitive), then
    // fewer pulses overall, until no improvement remains
    let cost = |pulses: &[Pulse]| -> (usize, usize) {
        let cats = pulses
            .iter()
            .filter(|p| matches!(p, Pulse::CatHalfPi))
            .count();
        (cats, pulses.len())
    };
    let mut improved = true;
    while improved {
        improved = false;
        for idx in 0..group.len() {
            for (gm, gp, gl) in &gens {
                let m = gm * &group[idx].matrix;
                let target = group
                    .iter()
                    .position(|g| phase_distance(&g.matrix, &m) < 1e-9)
                    .expect("closed group");
                let mut pulses = group[idx].pulses.clone();
                pulses.push(*gp);
                if cost(&pulses) < cost(&group[target].pulses) {
                    group[target].pulses = pulses;
                    group[target].label = format!("{}{}", group[idx].label, gl);
                    improved = true;
                }
            }
        }
    }
    group
}

/// The 22 dihedral gates with their published pulse decompositions into
/// X(pi) and Z(theta); `pulses` is time-ordered.
pub fn dihedral_group() -> Vec<LogicalGate> {
    use std::f64::consts::PI;
    let q = PI / 4.0;
    let zx = |theta: f64| pauli_x() * rz(theta); // X Z(theta): Z first in time
    let xz = |theta: f64| rz(theta) * pauli_x(); // Z(theta) X: X first in time
    let mut g = Vec::with_capacity(22);
    g.push(LogicalGate::new("I", CMat::identity(2, 2), vec![]));
    g.push(LogicalGate::new("X", pauli_x(), vec![Pulse::XPi]));
    g.push(LogicalGate::new(
        "Y",
        zx(4.0 * q),
        vec![Pulse::Rz(PI), Pulse::XPi],
    ));
    g.push(LogicalGate::new("Z", rz(PI), vec![Pulse::Rz(PI)]));
    for (label, steps) in [("T", 1), ("S", 2), ("TS", 3), ("Tdg", 7), ("Sdg", 6), ("TdgSdg", 5)] {
        let theta = steps as f64 * q;
        g.push(LogicalGate::new(label, rz(theta), vec![Pulse::Rz(theta)]));
    }
    for (label, steps) in [
        ("XT", 1),
        ("XS", 2),
        ("XTS", 3),
        ("XTdg", 7),
        ("XSdg", 6),
        ("XTdgSdg", 5),
    ] {
        let theta = steps as f64 * q;
        g.push(LogicalGate::new(
            label,
            zx(theta),
            vec![Pulse::Rz(theta), Pulse::XPi],
        ));
    }
    for (label, steps) in [
        ("TX", 1),
        ("SX", 2),
        ("TSX", 3),
        ("TdgX", 7),
        ("SdgX", 6),
        ("TdgSdgX", 5),
    ] {
        let theta = steps as f64 * q;
        g.push(LogicalGate::new(
            label,
            xz(theta),
            vec![Pulse::XPi, Pulse::Rz(theta)],
        ));
    }
    assert_eq!(g.len(), 22);
    g
}

/// Mean pulse count per gate of a list, identity counting zero.
pub fn mean_pulses(gates: &[LogicalGate]) -> f64 {
    gates.iter().map(|g| g.pulses.len()).sum::<usize>() as f64 / gates.len() as f64
}

/// The four Paulis as logical gates with pulse words.
pub fn pauli_gates() -> Vec<LogicalGate> {
    vec![
        LogicalGate::new("I", CMat::identity(2, 2), vec![]),
        LogicalGate::new("X", pauli_x(), vec![Pulse::XPi]),
        LogicalGate::new(
            "Y",
            pauli_x() * rz(std::f64::consts::PI),
            vec![Pulse::Rz(std::f64::consts::PI), Pulse::XPi],
        ),
        LogicalGate::new("Z", rz(std::f64::consts::PI), vec![Pulse::Rz(std::f64::consts::PI)]),
    ]
}

/// Index of the group element inverting `composed` (modulo phase).
pub fn find_inverse(group: &[LogicalGate], composed: &CMat) -> Result<usize, BenchError> {
    let target = composed.adjoint();
    group
        .iter()
        .position(|g| phase_distance(&g.matrix, &target) < 1e-9)
        .ok_or(BenchError::InverseNotFound)
}

/// Coarse-grained measurement level: which low-m sublevels count as
/// survival.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CgLevel {
    Level0,
    Level1,
    Level2,
}

impl CgLevel {
    pub fn support(&self) -> usize {
        match self {
            CgLevel::Level0 => 1,
            CgLevel::Level1 => 2,
            CgLevel::Level2 => 3,
        }
    }

    /// Diagonal 0/1 projector on the accepted sublevels, ascending-m basis.
    pub fn projector(&self, dim: usize) -> CMat {
        let mut p = CMat::zeros(dim, dim);
        for k in 0..self.support().min(dim) {
            p[(k, k)] = cr(1.0);
        }
        p
    }

    /// Survival of the maximally mixed state, the default noise floor.
    pub fn mixed_floor(&self, dim: usize) -> f64 {
        self.support().min(dim) as f64 / dim as f64
    }
}

/// RB protocol variants.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RbProtocol {
    Crb,
    DrbZ,
    DrbX,
}

impl RbProtocol {
    /// Exponent offset of the decay model: gates beyond the m random draws.
    pub fn depth_offset(&self) -> f64 {
        match self {
            RbProtocol::Crb => 0.0,
            RbProtocol::DrbZ => 2.0,
            RbProtocol::DrbX => 4.0,
        }
    }
}

/// Noise models for RB simulation.
#[derive(Clone, Debug)]
pub enum NoiseModel {
    Noiseless,
    /// rho -> (1-p) rho + p I/2 after every gate.
    Depolarizing { p: f64 },
    /// Pauli channel after every gate.
    Pauli { px: f64, py: f64, pz: f64 },
    /// Full pulse simulation on the spin manifold.
    Physical(Box<Hardware>),
}

/// One sampled benchmarking circuit as logical bookkeeping: gate indices
/// into the group list, plus the inverse index.
#[derive(Clone, Debug)]
pub struct Circuit {
    pub pauli_idx: Option<usize>,
    pub gate_indices: Vec<usize>,
    pub inverse_idx: usize,
}

/// Sample a CRB circuit: m uniform Clifford draws plus the group inverse of
/// their composition.
pub fn sample_crb_circuit(
    group: &[LogicalGate],
    m: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Circuit, BenchError> {
    let mut composed = CMat::identity(2, 2);
    let mut gate_indices = Vec::with_capacity(m);
    for _ in 0..m {
        let idx = rng.gen_range(0..group.len());
        gate_indices.push(idx);
        composed = &group[idx].matrix * composed;
    }
    let inverse_idx = find_inverse(group, &composed)?;
    Ok(Circuit {
        pauli_idx: None,
        gate_indices,
        inverse_idx,
    })
}

/// Sample a DRB circuit: a random Pauli, m dihedral draws, and the dihedral
/// inverse of the whole composition.
pub fn sample_drb_circuit(
    dihedral: &[LogicalGate],
    paulis: &[LogicalGate],
    m: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Circuit, BenchError> {
    let p_idx = rng.gen_range(0..paulis.len());
    let mut composed = paulis[p_idx].matrix.clone();
    let mut gate_indices = Vec::with_capacity(m);
    for _ in 0..m {
        let idx = rng.gen_range(0..dihedral.len());
        gate_indices.push(idx);
        composed = &dihedral[idx].matrix * composed;
    }
    let inverse_idx = find_inverse(dihedral, &composed)?;
    Ok(Circuit {
        pauli_idx: Some(p_idx),
        gate_indices,
        inverse_idx,
    })
}

/// RB run configuration.
#[derive(Clone, Debug)]
pub struct RbRun {
    pub protocol: RbProtocol,
    pub depths: Vec<usize>,
    pub n_circuits: usize,
    pub seed: u64,
    pub cg_level: CgLevel,
    pub noise: NoiseModel,
    /// Fixed noise floor b; defaults to 1/2 (logical) or the maximally
    /// mixed CG population (physical).
    pub noise_floor: Option<f64>,
}

/// Decay-fit output of one RB run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RbResult {
    pub protocol: RbProtocol,
    pub depths: Vec<usize>,
    pub effective_depths: Vec<f64>,
    pub survivals: Vec<f64>,
    pub errors: Vec<f64>,
    pub n_circuits: usize,
    pub b_fixed: f64,
    pub fit: Option<DecayFit>,
    pub fit_error: Option<String>,
}

impl RbResult {
    pub fn decay(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.p)
    }
}

/// Average Clifford fidelity from the decay parameter, (1 + p)/2.
pub fn clifford_fidelity(p: f64) -> f64 {
    assert!(p > 0.0 && p <= 1.0, "decay parameter out of range: {p}");
    (1.0 + p) / 2.0
}

/// Bias estimate: finite ratio or a lower bound when the non-dephasing
/// probability is consistent with zero.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub enum EtaEstimate {
    Finite(f64),
    LowerBound(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BiasResult {
    pub lambda1: f64,
    pub lambda2: f64,
    pub p_d: f64,
    pub p_nd: f64,
    pub eta: EtaEstimate,
}

/// Dephasing / non-dephasing error probabilities from the two DRB decays:
/// p_D = ((2^N-1)/4^N)(1 + (2^N-1) l1 - 2^N l2),
/// p_ND = ((2^N-1)/2^N)(1 - l1). When p_ND <= p_nd_floor the bias is
/// reported as a lower bound against the floor.
pub fn extract_bias(lambda1: f64, lambda2: f64, n_qubits: u32, p_nd_floor: f64) -> BiasResult {
    assert!(lambda1 > 0.0 && lambda1 <= 1.0 + 1e-12);
    assert!(lambda2 > 0.0 && lambda2 <= 1.0 + 1e-12);
    let two_n = (1u64 << n_qubits) as f64;
    let four_n = two_n * two_n;
    let p_d = (two_n - 1.0) / four_n * (1.0 + (two_n - 1.0) * lambda1 - two_n * lambda2);
    let p_nd = (two_n - 1.0) / two_n * (1.0 - lambda1);
    let eta = if p_nd > p_nd_floor.max(0.0) {
        EtaEstimate::Finite(p_d / p_nd)
    } else {
        EtaEstimate::LowerBound(p_d / p_nd_floor.max(1e-12))
    };
    BiasResult {
        lambda1,
        lambda2,
        p_d,
        p_nd,
        eta,
    }
}

enum LogicalState {
    Pure(CVec),
    Mixed(CMat),
}

fn apply_channel(state: LogicalState, noise: &NoiseModel, rng_free: ()) -> LogicalState {
    let _ = rng_free;
    match noise {
        NoiseModel::Noiseless | NoiseModel::Physical(_) => state,
        NoiseModel::Depolarizing { p } => {
            let rho = match state {
                LogicalState::Pure(v) => &v * v.adjoint(),
                LogicalState::Mixed(m) => m,
            };
            let id = CMat::identity(2, 2);
            LogicalState::Mixed(&rho * cr(1.0 - p) + id * cr(p / 2.0))
        }
        NoiseModel::Pauli { px, py, pz } => {
            let rho = match state {
                LogicalState::Pure(v) => &v * v.adjoint(),
                LogicalState::Mixed(m) => m,
            };
            let x = pauli_x();
            let y = CMat::from_row_slice(2, 2, &[C_ZERO, -C_I, C_I, C_ZERO]);
            let z = CMat::from_diagonal(&CVec::from_vec(vec![C_ONE, -C_ONE]));
            let keep = 1.0 - px - py - pz;
            LogicalState::Mixed(
                &rho * cr(keep)
                    + &x * &rho * &x * cr(*px)
                    + &y * &rho * &y * cr(*py)
                    + &z * &rho * &z * cr(*pz),
            )
        }
    }
}

/// Simulate one logical-mode circuit; returns the survival probability.
fn run_logical_circuit(
    protocol: RbProtocol,
    group: &[LogicalGate],
    paulis: &[LogicalGate],
    circuit: &Circuit,
    noise: &NoiseModel,
) -> f64 {
    let mut psi0 = CVec::zeros(2);
    psi0[0] = cr(1.0);
    let mut state = LogicalState::Pure(psi0.clone());
    let apply_gate = |state: LogicalState, m: &CMat| -> LogicalState {
        let out = match state {
            LogicalState::Pure(v) => LogicalState::Pure(m * v),
            LogicalState::Mixed(rho) => LogicalState::Mixed(m * rho * m.adjoint()),
        };
        apply_channel(out, noise, ())
    };
    let wrap = matches!(protocol, RbProtocol::DrbX);
    if wrap {
        state = apply_gate(state, &Pulse::CatHalfPi.logical());
    }
    if let Some(p) = circuit.pauli_idx {
        state = apply_gate(state, &paulis[p].matrix);
    }
    for &g in &circuit.gate_indices {
        state = apply_gate(state, &group[g].matrix);
    }
    state = apply_gate(state, &group[circuit.inverse_idx].matrix);
    if wrap {
        state = apply_gate(state, &Pulse::CatHalfPiInverse.logical());
    }
    match state {
        LogicalState::Pure(v) => (psi0.adjoint() * &v)[(0, 0)].norm_sqr(),
        LogicalState::Mixed(rho) => (psi0.adjoint() * &rho * &psi0)[(0, 0)].re,
    }
}

/// Simulate one physical-mode circuit on the spin manifold.
fn run_physical_circuit(
    protocol: RbProtocol,
    group: &[LogicalGate],
    paulis: &[LogicalGate],
    circuit: &Circuit,
    hw: &Hardware,
    cg: CgLevel,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> f64 {
    let sample = sample_noise(hw, rng);
    let mut factory = PulseFactory::new(hw, sample);
    let dim = hw.dim();
    // assemble the full time-ordered pulse list
    let mut pulses: Vec<Pulse> = Vec::new();
    if matches!(protocol, RbProtocol::DrbX) {
        pulses.push(Pulse::CatHalfPi);
    }
    if let Some(p) = circuit.pauli_idx {
        pulses.extend(paulis[p].pulses.iter().copied());
    }
    for &g in &circuit.gate_indices {
        pulses.extend(group[g].pulses.iter().copied());
    }
    pulses.extend(group[circuit.inverse_idx].pulses.iter().copied());
    if matches!(protocol, RbProtocol::DrbX) {
        pulses.push(Pulse::CatHalfPiInverse);
    }
    let any_super = hw.toggles.needs_collapse();
    if !any_super {
        let mut psi = CVec::zeros(dim);
        psi[0] = cr(1.0);
        for p in pulses {
            match factory.propagator(p) {
                Propagator::Unitary(u) => psi = u * psi,
                Propagator::Super(_) => unreachable!("no collapse channels requested"),
            }
        }
        (0..cg.support().min(dim)).map(|k| psi[k].norm_sqr()).sum()
    } else {
        let mut rho = CMat::zeros(dim, dim);
        rho[(0, 0)] = cr(1.0);
        let mut v = vectorize(&rho);
        for p in pulses {
            v = factory.propagator(p).to_super() * v;
        }
        let rho = unvectorize(&v, dim);
        (0..cg.support().min(dim)).map(|k| rho[(k, k)].re).sum()
    }
}

/// Run a full RB experiment: sampled circuits at each depth, survival
/// statistics, and the decay fit with the fixed noise floor.
pub fn simulate_rb(run: &RbRun) -> Result<RbResult, BenchError> {
    assert!(!run.depths.is_empty() && run.n_circuits >= 1);
    let (group, paulis) = match run.protocol {
        RbProtocol::Crb => (clifford_group(), pauli_gates()),
        RbProtocol::DrbZ | RbProtocol::DrbX => (dihedral_group(), pauli_gates()),
    };
    let dim = match &run.noise {
        NoiseModel::Physical(hw) => hw.dim(),
        _ => 2,
    };
    let b_fixed = run.noise_floor.unwrap_or(match &run.noise {
        NoiseModel::Physical(_) => run.cg_level.mixed_floor(dim),
        _ => 0.5,
    });
    let fam = StreamFamily::new(run.seed);
    let mut survivals = Vec::with_capacity(run.depths.len());
    let mut errors = Vec::with_capacity(run.depths.len());
    for (d_idx, &m) in run.depths.iter().enumerate() {
        let per_circuit: Result<Vec<f64>, BenchError> = (0..run.n_circuits)
            .into_par_iter()
            .map(|c_idx| {
                let stream = (d_idx * run.n_circuits + c_idx) as u64;
                let mut rng = fam.stream(stream);
                let circuit = match run.protocol {
                    RbProtocol::Crb => sample_crb_circuit(&group, m, &mut rng)?,
                    _ => sample_drb_circuit(&group, &paulis, m, &mut rng)?,
                };
                let s = match &run.noise {
                    NoiseModel::Physical(hw) => run_physical_circuit(
                        run.protocol,
                        &group,
                        &paulis,
                        &circuit,
                        hw,
                        run.cg_level,
                        &mut rng,
                    ),
                    other => run_logical_circuit(run.protocol, &group, &paulis, &circuit, other),
                };
                Ok(s)
            })
            .collect();
        let per_circuit = per_circuit?;
        let n = per_circuit.len() as f64;
        let mean = per_circuit.iter().sum::<f64>() / n;
        let var = per_circuit.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n.max(2.0);
        survivals.push(mean);
        errors.push((var / n).sqrt().max(1e-4));
    }
    let effective_depths: Vec<f64> = run
        .depths
        .iter()
        .map(|&m| m as f64 + run.protocol.depth_offset())
        .collect();
    let fit = fit_decay(&effective_depths, &survivals, &errors, b_fixed);
    let (fit, fit_error) = match fit {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(RbResult {
        protocol: run.protocol,
        depths: run.depths.clone(),
        effective_depths,
        survivals,
        errors,
        n_circuits: run.n_circuits,
        b_fixed,
        fit,
        fit_error,
    })
}

/// Analytic twirled decays of a Pauli channel under the dihedral group:
/// lambda1 = 1 - 2(px + py), lambda2 = 1 - (px + py) - 2 pz.
pub fn pauli_channel_drb_decays(px: f64, py: f64, pz: f64) -> (f64, f64) {
    (1.0 - 2.0 * (px + py), 1.0 - (px + py) - 2.0 * pz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn clifford_group_is_closed_order_24() {
        let g = clifford_group();
        assert_eq!(g.len(), 24);
        for a in &g {
            // pulse word reproduces the matrix
            assert!(phase_distance(&a.pulse_product(), &a.matrix) < 1e-10, "{}", a.label);
            for b in &g {
                let prod = &a.matrix * &b.matrix;
                assert!(
                    g.iter().any(|c| phase_distance(&c.matrix, &prod) < 1e-9),
                    "{} * {} left the group",
                    a.label,
                    b.label
                );
            }
        }
        // identity has an empty pulse list
        assert!(g[0].pulses.is_empty());
        // every element has an inverse in the set
        for a in &g {
            assert!(find_inverse(&g, &a.matrix).is_ok());
        }
    }

    #[test]
    fn dihedral_list_matches_published_matrices() {
        let g = dihedral_group();
        assert_eq!(g.len(), 22);
        for a in &g {
            assert!(
                phase_distance(&a.pulse_product(), &a.matrix) < 1e-10,
                "{} decomposition",
                a.label
            );
        }
        // gate 11 XT = [[0, e^{i pi/4}], [1, 0]]
        let xt = &g[10];
        assert_eq!(xt.label, "XT");
        let expect = CMat::from_row_slice(
            2,
            2,
            &[
                C_ZERO,
                (C_I * std::f64::consts::FRAC_PI_4).exp(),
                C_ONE,
                C_ZERO,
            ],
        );
        assert!(phase_distance(&xt.matrix, &expect) < 1e-12);
        // closure over products and existence of inverses
        for a in &g {
            for b in &g {
                let prod = &a.matrix * &b.matrix;
                assert!(g.iter().any(|c| phase_distance(&c.matrix, &prod) < 1e-9));
            }
            assert!(find_inverse(&g, &a.matrix).is_ok());
        }
        // mean pulses per gate from the published decompositions: 34/22
        let mp = mean_pulses(&g);
        assert!((mp - 34.0 / 22.0).abs() < 1e-12, "{mp}");
    }

    #[test]
    fn cg_projectors() {
        let p0 = CgLevel::Level0.projector(6);
        let p2 = CgLevel::Level2.projector(6);
        assert_eq!(p0[(0, 0)], cr(1.0));
        assert_eq!(p0[(1, 1)], cr(0.0));
        assert_eq!(p2[(2, 2)], cr(1.0));
        assert_eq!(p2[(3, 3)], cr(0.0));
        assert!((CgLevel::Level2.mixed_floor(6) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn crb_circuit_inverse_returns_home() {
        let g = clifford_group();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for m in [0, 1, 5, 20] {
            let c = sample_crb_circuit(&g, m, &mut rng).unwrap();
            let mut composed = CMat::identity(2, 2);
            for &i in &c.gate_indices {
                composed = &g[i].matrix * composed;
            }
            composed = &g[c.inverse_idx].matrix * composed;
            assert!(phase_distance(&composed, &CMat::identity(2, 2)) < 1e-9);
            if m == 0 {
                assert_eq!(c.inverse_idx, 0); // identity
            }
        }
    }

    #[test]
    fn drb_circuit_inverse_undoes_pauli_too() {
        let g = dihedral_group();
        let p = pauli_gates();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for m in [0, 1, 4, 16] {
            let c = sample_drb_circuit(&g, &p, m, &mut rng).unwrap();
            let mut composed = p[c.pauli_idx.unwrap()].matrix.clone();
            for &i in &c.gate_indices {
                composed = &g[i].matrix * composed;
            }
            composed = &g[c.inverse_idx].matrix * composed;
            assert!(phase_distance(&composed, &CMat::identity(2, 2)) < 1e-9);
        }
    }

    #[test]
    fn clifford_sampling_uniformity() {
        // chi^2 over 24 bins with 10^4 draws
        let g = clifford_group();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let mut counts = vec![0usize; g.len()];
        for _ in 0..n {
            let c = sample_crb_circuit(&g, 1, &mut rng).unwrap();
            counts[c.gate_indices[0]] += 1;
        }
        let expect = n as f64 / g.len() as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        // dof = 23; p > 0.01 needs chi2 < 41.6
        assert!(chi2 < 41.6, "chi2 = {chi2}");
    }

    #[test]
    fn noiseless_rb_survival_is_one() {
        let run = RbRun {
            protocol: RbProtocol::Crb,
            depths: vec![1, 4, 16],
            n_circuits: 8,
            seed: 1,
            cg_level: CgLevel::Level2,
            noise: NoiseModel::Noiseless,
            noise_floor: None,
        };
        let res = simulate_rb(&run).unwrap();
        for s in &res.survivals {
            assert!((s - 1.0).abs() < 1e-10);
        }
        // constant survivals flag the decay as unidentifiable
        assert!(res.fit.is_none(), "{:?}", res.fit);
    }

    #[test]
    fn depolarizing_decay_matches_analytic() {
        let p = 0.06;
        let run = RbRun {
            protocol: RbProtocol::Crb,
            depths: vec![1, 3, 6, 10, 16, 24],
            n_circuits: 150,
            seed: 42,
            cg_level: CgLevel::Level2,
            noise: NoiseModel::Depolarizing { p },
            noise_floor: None,
        };
        let res = simulate_rb(&run).unwrap();
        let fit = res.fit.unwrap();
        let expect = 1.0 - p;
        assert!(
            (fit.p - expect).abs() < 2.0 * fit.p_sigma.max(2e-4),
            "fitted {} vs {}",
            fit.p,
            expect
        );
    }

    #[test]
    fn drb_pure_z_channel_bias() {
        let q = 0.02;
        let mk = |protocol| RbRun {
            protocol,
            depths: vec![1, 4, 8, 14, 22],
            n_circuits: 120,
            seed: 9,
            cg_level: CgLevel::Level2,
            noise: NoiseModel::Pauli {
                px: 0.0,
                py: 0.0,
                pz: q,
            },
            noise_floor: None,
        };
        let z = simulate_rb(&mk(RbProtocol::DrbZ)).unwrap();
        // z-basis survival never decays under pure Z noise
        for s in &z.survivals {
            assert!((s - 1.0).abs() < 1e-10);
        }
        let x = simulate_rb(&mk(RbProtocol::DrbX)).unwrap();
        let fit = x.fit.unwrap();
        let (l1, l2) = pauli_channel_drb_decays(0.0, 0.0, q);
        assert_eq!(l1, 1.0);
        assert!((fit.p - l2).abs() < 2.0 * fit.p_sigma.max(5e-4), "{} vs {l2}", fit.p);
        let bias = extract_bias(1.0, fit.p, 1, 1e-6);
        assert!((bias.p_d - q).abs() < 2e-3, "{}", bias.p_d);
        assert!(bias.p_nd.abs() < 1e-9);
        assert!(matches!(bias.eta, EtaEstimate::LowerBound(_)));
    }

    #[test]
    fn drb_pure_x_channel_bias() {
        let q = 0.02;
        let mk = |protocol| RbRun {
            protocol,
            depths: vec![1, 4, 8, 14, 22],
            n_circuits: 150,
            seed: 17,
            cg_level: CgLevel::Level2,
            noise: NoiseModel::Pauli {
                px: q,
                py: 0.0,
                pz: 0.0,
            },
            noise_floor: None,
        };
        let z = simulate_rb(&mk(RbProtocol::DrbZ)).unwrap();
        let x = simulate_rb(&mk(RbProtocol::DrbX)).unwrap();
        let fz = z.fit.unwrap();
        let fx = x.fit.unwrap();
        let (l1, l2) = pauli_channel_drb_decays(q, 0.0, 0.0);
        assert!((fz.p - l1).abs() < 2.0 * fz.p_sigma.max(5e-4), "{} vs {l1}", fz.p);
        assert!((fx.p - l2).abs() < 2.0 * fx.p_sigma.max(2e-3), "{} vs {l2}", fx.p);
        let bias = extract_bias(fz.p, fx.p, 1, 1e-6);
        // pure bit-flip noise: p_ND = q, p_D = 0 within statistics
        assert!((bias.p_nd - q).abs() < 3e-3, "{}", bias.p_nd);
        assert!(bias.p_d.abs() < 3e-3, "{}", bias.p_d);
    }

    #[test]
    fn extract_bias_formulas() {
        let b = extract_bias(1.0, 1.0, 1, 0.0);
        assert_eq!(b.p_d, 0.0);
        assert_eq!(b.p_nd, 0.0);
        let b = extract_bias(1.0, 0.99, 1, 0.0);
        assert!((b.p_d - 0.005).abs() < 1e-12);
        assert!(b.p_nd.abs() < 1e-12);
        // reference values: p_nd = 3.7e-4, p_d = 6.7e-3 give eta ~ 18
        let lambda1: f64 = 1.0 - 2.0 * 3.7e-4;
        let lambda2 = (1.0 + lambda1 - 4.0 * 6.7e-3) / 2.0;
        let b = extract_bias(lambda1, lambda2, 1, 1e-9);
        match b.eta {
            EtaEstimate::Finite(eta) => assert!((eta - 18.1).abs() < 0.2, "{eta}"),
            _ => panic!("expected finite eta"),
        }
    }

    #[test]
    fn seed_determinism_and_order_invariance() {
        let run = RbRun {
            protocol: RbProtocol::DrbZ,
            depths: vec![2, 6, 12],
            n_circuits: 24,
            seed: 3,
            cg_level: CgLevel::Level2,
            noise: NoiseModel::Pauli {
                px: 0.01,
                py: 0.005,
                pz: 0.03,
            },
            noise_floor: None,
        };
        let a = simulate_rb(&run).unwrap();
        let b = simulate_rb(&run).unwrap();
        assert_eq!(a.survivals, b.survivals);
        assert_eq!(a.errors, b.errors);
    }

    #[test]
    fn clifford_fidelity_formula() {
        assert_eq!(clifford_fidelity(1.0), 1.0);
        assert!((clifford_fidelity(0.9) - 0.95).abs() < 1e-15);
    }
}
