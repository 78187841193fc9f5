//! Analytic DLS conditions for the X and cat gates, integer-ratio search,
//! deviation metrics, gate times, fundamental frequencies, gate infidelity,
//! and the detuning scanner.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atom::{
    dls_vector, lightshift_spectrum, AtomError, DlsVector, LaserParams, LevelScheme,
    LightshiftSpectrum,
};
use crate::dynamics::{
    fidelity_to_pure, raman_unitary, scattering_collapse, DensityMatrix, DynamicsError, Lindblad,
};
use crate::linalg::{cr, unvectorize, vectorize, CMat, CVec, C_I};
use crate::wigner::small_d_matrix;

#[derive(Debug, Error)]
pub enum GateDesignError {
    #[error("DLS vector has zero leading component")]
    ZeroLeadingDls,
    #[error(transparent)]
    Atom(#[from] AtomError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Which gate the DLS engineering targets.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateTarget {
    /// Full spin flip R_x(pi): odd-integer DLS ratios (2n+1).
    XPi,
    /// Cat-generation R_x^cat(pi/2): alternating (4n +/- 1) ratios.
    CatHalfPi,
}

/// Sign of the leading entry's pattern for the cat condition: Plus means
/// Delta_1 matches 4 n_1 + 1, alternating down the vector.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CatSign {
    Plus,
    Minus,
}

/// A matched integer-ratio condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlsCondition {
    pub target: GateTarget,
    pub n: Vec<i32>,
    pub sign: Option<CatSign>,
    /// Common scale s with Delta_k = pattern_k * s, rad/s; positive.
    pub scale: f64,
    /// Max relative deviation |Delta_k / (pattern_k s) - 1| over k.
    pub deviation: f64,
}

impl DlsCondition {
    /// Pattern integers (2n+1) or (4n +/- 1), signed.
    pub fn pattern(&self) -> Vec<i32> {
        match self.target {
            GateTarget::XPi => self.n.iter().map(|&n| 2 * n + 1).collect(),
            GateTarget::CatHalfPi => {
                let lead = match self.sign.expect("cat condition has a sign") {
                    CatSign::Plus => 1,
                    CatSign::Minus => -1,
                };
                self.n
                    .iter()
                    .enumerate()
                    .map(|(k, &n)| 4 * n + lead * if k % 2 == 0 { 1 } else { -1 })
                    .collect()
            }
        }
    }
}

fn match_pattern(
    dls: &DlsVector,
    pattern_for: impl Fn(usize, i32) -> i32,
    n_max: i32,
    tol: f64,
) -> Option<(Vec<i32>, f64, f64)> {
    // For each candidate n_1, fix the scale from Delta_1 and test whether
    // every later component sits on its own pattern integer. Candidates are
    // ranked by sum |n|, then lexicographically.
    let d1 = dls.delta[0];
    if d1 == 0.0 {
        return None;
    }
    let mut best: Option<(Vec<i32>, f64, f64, i64)> = None;
    'outer: for n1 in -n_max..=n_max {
        let p1 = pattern_for(0, n1);
        if p1 == 0 {
            continue;
        }
        let scale = d1 / p1 as f64;
        if scale <= 0.0 {
            continue; // pattern entries carry the sign of the measured DLS
        }
        if (d1 / scale / p1 as f64 - 1.0).abs() > tol {
            continue;
        }
        let mut ns = vec![n1];
        let mut dev_max = 0.0f64;
        for (k, &dk) in dls.delta.iter().enumerate().skip(1) {
            let ratio = dk / scale;
            // invert the affine pattern p = 4n + c (or 2n + 1) by rounding,
            // then test the neighbors
            let step = (pattern_for(k, 1) - pattern_for(k, 0)) as f64;
            let base = pattern_for(k, 0) as f64;
            let center = ((ratio - base) / step).round() as i32;
            let mut found: Option<(i32, f64)> = None;
            for cand in [center - 1, center, center + 1] {
                if cand.abs() > n_max {
                    continue;
                }
                let p = pattern_for(k, cand) as f64;
                if p == 0.0 || ratio / p <= 0.0 {
                    continue;
                }
                let dev = (ratio / p - 1.0).abs();
                if dev <= tol && found.map_or(true, |(_, d)| dev < d) {
                    found = Some((cand, dev));
                }
            }
            match found {
                Some((n, dev)) => {
                    ns.push(n);
                    dev_max = dev_max.max(dev);
                }
                None => continue 'outer,
            }
        }
        let cost: i64 = ns.iter().map(|&n| n.abs() as i64).sum();
        let better = match &best {
            None => true,
            Some((bn, _, _, bc)) => cost < *bc || (cost == *bc && ns < *bn),
        };
        if better {
            best = Some((ns, scale, dev_max, cost));
        }
    }
    best.map(|(n, s, d, _)| (n, s, d))
}

/// Smallest odd-integer vector (2n_k + 1) proportional to the DLS vector
/// within relative deviation `tol`, or None.
pub fn check_x_condition(dls: &DlsVector, tol: f64, n_max: i32) -> Option<DlsCondition> {
    assert!(n_max >= 0 && tol > 0.0);
    match_pattern(dls, |_, n| 2 * n + 1, n_max, tol).map(|(n, scale, deviation)| DlsCondition {
        target: GateTarget::XPi,
        n,
        sign: None,
        scale,
        deviation,
    })
}

/// Alternating (4n +/- 1) match for the cat gate, trying both sign patterns;
/// ties broken by sum |n|.
pub fn check_cat_condition(dls: &DlsVector, tol: f64, n_max: i32) -> Option<DlsCondition> {
    assert!(n_max >= 0 && tol > 0.0);
    let mut best: Option<DlsCondition> = None;
    for sign in [CatSign::Plus, CatSign::Minus] {
        let lead = if sign == CatSign::Plus { 1 } else { -1 };
        if let Some((n, scale, deviation)) = match_pattern(
            dls,
            |k, n| 4 * n + lead * if k % 2 == 0 { 1 } else { -1 },
            n_max,
            tol,
        ) {
            let cand = DlsCondition {
                target: GateTarget::CatHalfPi,
                n,
                sign: Some(sign),
                scale,
                deviation,
            };
            let better = match &best {
                None => true,
                Some(b) => {
                    let ca: i64 = cand.n.iter().map(|&x| x.abs() as i64).sum();
                    let cb: i64 = b.n.iter().map(|&x| x.abs() as i64).sum();
                    ca < cb
                }
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best
}

/// Closed-form gate time: X at (2n_1+1) pi / Delta_1, cat at
/// (4n_1 +/- 1) pi / (2 Delta_1); always positive.
pub fn gate_time(cond: &DlsCondition) -> Result<f64, GateDesignError> {
    if cond.scale == 0.0 {
        return Err(GateDesignError::ZeroLeadingDls);
    }
    let t = match cond.target {
        GateTarget::XPi => std::f64::consts::PI / cond.scale,
        GateTarget::CatHalfPi => std::f64::consts::PI / (2.0 * cond.scale),
    };
    Ok(t)
}

/// Fundamental frequencies f_k = |Delta_k / (2 pi (4 n_k +/- 1))|, Hz.
pub fn fundamental_frequencies(dls: &DlsVector, cond: &DlsCondition) -> Vec<f64> {
    assert_eq!(cond.target, GateTarget::CatHalfPi);
    dls.delta
        .iter()
        .zip(cond.pattern())
        .map(|(&d, p)| (d / (2.0 * std::f64::consts::PI * p as f64)).abs())
        .collect()
}

/// RMS deviation of the DLS ratios from the matched X pattern:
/// sqrt( (1/2F) sum_{k>=2} (Delta_k/(Delta_1/(2n_1+1)) - (2n_k+1))^2 ).
pub fn sigma_x(dls: &DlsVector, cond: &DlsCondition) -> f64 {
    assert_eq!(cond.target, GateTarget::XPi);
    sigma_rms(dls, &cond.pattern())
}

/// Same RMS deviation against the matched cat pattern.
pub fn sigma_h(dls: &DlsVector, cond: &DlsCondition) -> f64 {
    assert_eq!(cond.target, GateTarget::CatHalfPi);
    sigma_rms(dls, &cond.pattern())
}

fn sigma_rms(dls: &DlsVector, pattern: &[i32]) -> f64 {
    let two_f = dls.delta.len() as f64;
    let base = dls.delta[0] / pattern[0] as f64;
    let ss: f64 = dls
        .delta
        .iter()
        .zip(pattern)
        .skip(1)
        .map(|(&d, &p)| (d / base - p as f64).powi(2))
        .sum();
    (ss / two_f).sqrt()
}

/// Ideal target state U_target |0>_sc (cat sign Plus is the (I - iX)/sqrt(2)
/// gate, taking |0>_sc to (|0> - i|1>)/sqrt(2)).
pub fn target_state(dim: usize, target: GateTarget, sign: CatSign) -> CVec {
    let mut v = CVec::zeros(dim);
    match target {
        GateTarget::XPi => v[dim - 1] = cr(1.0),
        GateTarget::CatHalfPi => {
            let s = 1.0 / 2.0f64.sqrt();
            v[0] = cr(s);
            v[dim - 1] = match sign {
                CatSign::Plus => -C_I * s,
                CatSign::Minus => C_I * s,
            };
        }
    }
    v
}

/// Ideal gate matrix on the full manifold.
pub fn target_gate(dim: usize, target: GateTarget, sign: CatSign) -> CMat {
    let mut g = CMat::zeros(dim, dim);
    match target {
        GateTarget::XPi => {
            for k in 0..dim {
                g[(dim - 1 - k, k)] = cr(1.0);
            }
        }
        GateTarget::CatHalfPi => {
            let s = cr(1.0 / 2.0f64.sqrt());
            let ix = match sign {
                CatSign::Plus => -C_I,
                CatSign::Minus => C_I,
            };
            for k in 0..dim {
                g[(k, k)] += s;
                g[(dim - 1 - k, k)] += ix * s;
            }
        }
    }
    g
}

/// Noise setting for gate-infidelity evaluation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseSetting {
    Unitary,
    Scattering,
}

fn scan_lindblad(
    spectrum: &LightshiftSpectrum,
    laser: &LaserParams,
    scheme: &LevelScheme,
) -> Result<Lindblad, GateDesignError> {
    let d = small_d_matrix(spectrum.f_ground, std::f64::consts::FRAC_PI_2);
    let dim = spectrum.dim();
    let diag = CMat::from_diagonal(&CVec::from_iterator(
        dim,
        spectrum.delta.iter().map(|&x| cr(x)),
    ));
    let h = &d * diag * d.adjoint();
    Ok(Lindblad::new(h, scattering_collapse(laser, scheme)?))
}

/// Infidelity 1 - <psi_t| rho(t) |psi_t> of the Raman evolution from |0>_sc
/// against the ideal target state, at a fixed time. For the cat target both
/// sign variants are tried and the better one reported.
pub fn gate_infidelity(
    target: GateTarget,
    laser: &LaserParams,
    scheme: &LevelScheme,
    t: f64,
    noise: NoiseSetting,
) -> Result<f64, GateDesignError> {
    let spectrum = lightshift_spectrum(laser, scheme)?;
    let dim = spectrum.dim();
    let signs: &[CatSign] = match target {
        GateTarget::XPi => &[CatSign::Plus],
        GateTarget::CatHalfPi => &[CatSign::Plus, CatSign::Minus],
    };
    let mut best = f64::INFINITY;
    match noise {
        NoiseSetting::Unitary => {
            let u = raman_unitary(&spectrum, std::f64::consts::FRAC_PI_2, t);
            let mut psi0 = CVec::zeros(dim);
            psi0[0] = cr(1.0);
            let out = u * psi0;
            for &s in signs {
                let psi_t = target_state(dim, target, s);
                best = best.min(1.0 - (psi_t.adjoint() * &out)[(0, 0)].norm_sqr());
            }
        }
        NoiseSetting::Scattering => {
            let lind = scan_lindblad(&spectrum, laser, scheme)?;
            let rho = lind.evolve_expm(&DensityMatrix::basis_state(dim, 0), t)?;
            for &s in signs {
                let psi_t = target_state(dim, target, s);
                best = best.min(1.0 - fidelity_to_pure(&rho, &psi_t));
            }
        }
    }
    Ok(best.max(0.0))
}

/// One detuning sample of a scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanRow {
    pub detuning_hz: f64,
    pub infidelity: f64,
    pub gate_time_s: f64,
    /// Pattern integers when a condition matched.
    pub ratio: Option<Vec<i32>>,
    /// RMS ratio deviation when a condition matched.
    pub sigma: Option<f64>,
}

/// A flagged minimum of the scan with its sub-threshold interval.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanMinimum {
    pub detuning_hz: f64,
    pub infidelity: f64,
    pub gate_time_s: f64,
    pub ratio: Option<Vec<i32>>,
    pub range_lo_hz: f64,
    pub range_hi_hz: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub minima: Vec<ScanMinimum>,
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub target: GateTarget,
    pub range_hz: (f64, f64),
    pub step_hz: f64,
    /// Laser template; the detuning field is overwritten per sample.
    pub laser: LaserParams,
    pub noise: NoiseSetting,
    pub ratio_tol: f64,
    pub n_max: i32,
    /// Detunings closer than this to any branch resonance are skipped.
    pub guard_hz: f64,
    /// Infidelity threshold defining reported intervals.
    pub threshold: f64,
}

impl ScanConfig {
    pub fn new(target: GateTarget, range_hz: (f64, f64), step_hz: f64, laser: LaserParams) -> Self {
        ScanConfig {
            target,
            range_hz,
            step_hz,
            laser,
            noise: NoiseSetting::Scattering,
            ratio_tol: 0.02,
            n_max: 40,
            guard_hz: 20e6,
            threshold: 1e-3,
        }
    }
}

/// Scan the detuning range, optimizing the pulse time per detuning, and
/// report rows plus local minima of the infidelity. Rows are evaluated in
/// parallel; output is detuning-ascending and schedule-independent.
pub fn scan_detuning(cfg: &ScanConfig, scheme: &LevelScheme) -> Result<ScanResult, GateDesignError> {
    let (lo, hi) = cfg.range_hz;
    let mut detunings = Vec::new();
    if hi > lo && cfg.step_hz > 0.0 {
        let n = ((hi - lo) / cfg.step_hz).round() as usize;
        for k in 0..=n {
            let det = lo + k as f64 * cfg.step_hz;
            if scheme
                .branches
                .iter()
                .all(|b| (det - b.hfs_offset_hz).abs() > cfg.guard_hz)
            {
                detunings.push(det);
            }
        }
    }
    let rows: Result<Vec<ScanRow>, GateDesignError> = detunings
        .par_iter()
        .map(|&det| scan_one(cfg, scheme, det))
        .collect();
    let rows = rows?;
    let minima = find_minima(&rows, cfg.threshold);
    Ok(ScanResult { rows, minima })
}

fn scan_one(
    cfg: &ScanConfig,
    scheme: &LevelScheme,
    detuning_hz: f64,
) -> Result<ScanRow, GateDesignError> {
    let mut laser = cfg.laser.clone();
    laser.detuning_hz = detuning_hz;
    let spectrum = lightshift_spectrum(&laser, scheme)?;
    let dls = dls_vector(&spectrum);
    let cond = match cfg.target {
        GateTarget::XPi => check_x_condition(&dls, cfg.ratio_tol, cfg.n_max),
        GateTarget::CatHalfPi => check_cat_condition(&dls, cfg.ratio_tol, cfg.n_max),
    };
    let dim = spectrum.dim();
    let lind = match cfg.noise {
        NoiseSetting::Scattering => Some(scan_lindblad(&spectrum, &laser, scheme)?),
        NoiseSetting::Unitary => None,
    };
    let signs: Vec<CatSign> = match (cfg.target, cond.as_ref().and_then(|c| c.sign)) {
        (GateTarget::XPi, _) => vec![CatSign::Plus],
        (GateTarget::CatHalfPi, Some(s)) => vec![s],
        (GateTarget::CatHalfPi, None) => vec![CatSign::Plus, CatSign::Minus],
    };
    let targets: Vec<CVec> = signs
        .iter()
        .map(|&s| target_state(dim, cfg.target, s))
        .collect();
    let rho0 = DensityMatrix::basis_state(dim, 0);
    let infid_of_rho = |rho: &CMat| -> f64 {
        targets
            .iter()
            .map(|psi| 1.0 - (psi.adjoint() * rho * psi)[(0, 0)].re)
            .fold(f64::INFINITY, f64::min)
    };
    let infid_at = |t: f64| -> f64 {
        match &lind {
            Some(l) => {
                let v = l.propagator(t) * vectorize(rho0.matrix());
                infid_of_rho(&unvectorize(&v, dim))
            }
            None => {
                let u = raman_unitary(&spectrum, std::f64::consts::FRAC_PI_2, t);
                let mut psi0 = CVec::zeros(dim);
                psi0[0] = cr(1.0);
                let out = u * psi0;
                targets
                    .iter()
                    .map(|psi| 1.0 - (psi.adjoint() * &out)[(0, 0)].norm_sqr())
                    .fold(f64::INFINITY, f64::min)
            }
        }
    };

    let max_dls = dls.delta.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let (t_opt, infid) = match &cond {
        Some(c) => {
            let t0 = gate_time(c)?;
            // refine within half an oscillation of the fastest DLS
            let w = (std::f64::consts::PI / (2.0 * max_dls.max(1e-9))).min(t0 * 0.01);
            golden_min(&infid_at, (t0 - w).max(0.0), t0 + w)
        }
        None => {
            // coarse grid over (0, 30 / min |Delta|], then refine the best
            let min_dls = dls.delta.iter().fold(f64::INFINITY, |a, &b| a.min(b.abs()));
            let t_max = 30.0 / min_dls.max(1e-9);
            let n_grid = ((4.0 * t_max * max_dls / std::f64::consts::PI) as usize).clamp(200, 4000);
            let mut best = (t_max / n_grid as f64, f64::INFINITY);
            match &lind {
                Some(l) => {
                    let step = l.propagator(t_max / n_grid as f64);
                    let mut v = vectorize(rho0.matrix());
                    for k in 1..=n_grid {
                        v = &step * &v;
                        let inf = infid_of_rho(&unvectorize(&v, dim));
                        if inf < best.1 {
                            best = (t_max * k as f64 / n_grid as f64, inf);
                        }
                    }
                }
                None => {
                    for k in 1..=n_grid {
                        let t = t_max * k as f64 / n_grid as f64;
                        let inf = infid_at(t);
                        if inf < best.1 {
                            best = (t, inf);
                        }
                    }
                }
            }
            let half = t_max / n_grid as f64;
            golden_min(&infid_at, (best.0 - half).max(0.0), best.0 + half)
        }
    };
    Ok(ScanRow {
        detuning_hz,
        infidelity: infid.max(0.0),
        gate_time_s: t_opt,
        ratio: cond.as_ref().map(|c| c.pattern()),
        sigma: cond.as_ref().map(|c| match cfg.target {
            GateTarget::XPi => sigma_x(&dls, c),
            GateTarget::CatHalfPi => sigma_h(&dls, c),
        }),
    })
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - gr * (hi - lo);
    let mut x2 = lo + gr * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..40 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn find_minima(rows: &[ScanRow], threshold: f64) -> Vec<ScanMinimum> {
    // contiguous sub-threshold intervals, each contributing its best row;
    // gaps (guard bands) split intervals
    let mut minima = Vec::new();
    let mut run: Vec<&ScanRow> = Vec::new();
    let mut typical_step = f64::INFINITY;
    for w in rows.windows(2) {
        typical_step = typical_step.min(w[1].detuning_hz - w[0].detuning_hz);
    }
    let flush = |run: &mut Vec<&ScanRow>, minima: &mut Vec<ScanMinimum>| {
        if let Some(best) = run
            .iter()
            .min_by(|a, b| a.infidelity.partial_cmp(&b.infidelity).unwrap())
        {
            minima.push(ScanMinimum {
                detuning_hz: best.detuning_hz,
                infidelity: best.infidelity,
                gate_time_s: best.gate_time_s,
                ratio: best.ratio.clone(),
                range_lo_hz: run.first().unwrap().detuning_hz,
                range_hi_hz: run.last().unwrap().detuning_hz,
            });
        }
        run.clear();
    };
    let mut last_det = f64::NEG_INFINITY;
    for row in rows {
        let contiguous = row.detuning_hz - last_det < 2.5 * typical_step;
        if row.infidelity < threshold {
            if !run.is_empty() && !contiguous {
                flush(&mut run, &mut minima);
            }
            run.push(row);
        } else {
            flush(&mut run, &mut minima);
        }
        last_det = row.detuning_hz;
    }
    flush(&mut run, &mut minima);
    minima
}

/// Synthetic spectrum whose DLS vector follows a pattern exactly; scale in
/// rad/s, delta_0 = 0.
pub fn synthetic_spectrum(
    f_ground: crate::halfint::HalfInt,
    pattern: &[i32],
    scale: f64,
) -> LightshiftSpectrum {
    let dls = DlsVector {
        delta: pattern.iter().map(|&p| p as f64 * scale).collect(),
    };
    LightshiftSpectrum::from_dls(f_ground, &dls)
}

/// Unitary-mode distance (modulo global phase) of a synthetic exact-pattern
/// spectrum from its target gate at the closed-form time; the sufficiency
/// checks sweep this over n patterns.
pub fn synthetic_gate_error(target: GateTarget, sign: CatSign, n: &[i32], scale: f64) -> f64 {
    let f = crate::halfint::HalfInt::from_twice(n.len() as i32);
    let cond = DlsCondition {
        target,
        n: n.to_vec(),
        sign: match target {
            GateTarget::XPi => None,
            GateTarget::CatHalfPi => Some(sign),
        },
        scale,
        deviation: 0.0,
    };
    let spectrum = synthetic_spectrum(f, &cond.pattern(), scale);
    let t = gate_time(&cond).expect("positive scale");
    let u = raman_unitary(&spectrum, std::f64::consts::FRAC_PI_2, t);
    let dim = spectrum.dim();
    let g = target_gate(dim, target, sign);
    crate::linalg::phase_distance(&u, &g)
}
