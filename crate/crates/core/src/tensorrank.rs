//! Spherical tensor operators, rank decomposition, the rank-preserving gate
//! criterion, the logical action of covariant rotations, and the
//! superposition-gate fidelity surface.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::halfint::HalfInt;
use crate::linalg::{cr, hs_inner, unitarity_defect, CMat};
use crate::wigner::{clebsch_gordan_general, rotation_matrix, RotationAngles};

#[derive(Debug, Error)]
pub enum RankError {
    #[error("rank k = {k} or component q = {q} out of range for F = {f}")]
    OutOfRange { f: HalfInt, k: i32, q: i32 },
    #[error("operator is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
}

/// A spherical tensor operator T^(k)_q on the spin-F manifold, normalized to
/// unit Hilbert-Schmidt norm.
#[derive(Clone, Debug)]
pub struct SphericalTensor {
    pub k: i32,
    pub q: i32,
    pub matrix: CMat,
}

/// T^(k)_q with matrix elements proportional to <F m; k q | F m'>, unit
/// Hilbert-Schmidt norm.
pub fn spherical_tensor(f: HalfInt, k: i32, q: i32) -> Result<SphericalTensor, RankError> {
    if k < 0 || k > f.twice() || q.abs() > k {
        return Err(RankError::OutOfRange { f, k, q });
    }
    let dim = f.multiplicity();
    let mut m = CMat::zeros(dim, dim);
    for (r, mp) in f.m_values().enumerate() {
        for (c, mm) in f.m_values().enumerate() {
            let cg =
                clebsch_gordan_general(f, mm, HalfInt::from_int(k), HalfInt::from_int(q), f, mp);
            m[(r, c)] = cr(cg);
        }
    }
    let norm = hs_inner(&m, &m).re.sqrt();
    Ok(SphericalTensor {
        k,
        q,
        matrix: m / cr(norm),
    })
}

/// Symmetric/antisymmetric combinations for q >= 1:
/// S = (T_q + (-1)^k T_-q)/sqrt(2), A = (T_q - (-1)^k T_-q)/sqrt(2).
/// For q = 0 only S_0 = T_0 is defined.
pub fn symmetric_antisymmetric(f: HalfInt, k: i32, q: i32) -> Result<(CMat, CMat), RankError> {
    assert!(q >= 1, "use spherical_tensor for q = 0");
    let tp = spherical_tensor(f, k, q)?.matrix;
    let tm = spherical_tensor(f, k, -q)?.matrix;
    let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
    let s = (&tp + &tm * cr(sgn)) * cr(1.0 / 2.0f64.sqrt());
    let a = (&tp - &tm * cr(sgn)) * cr(1.0 / 2.0f64.sqrt());
    Ok((s, a))
}

/// All unit-norm tensors for F, ordered by (k, q).
pub fn tensor_basis(f: HalfInt) -> Vec<SphericalTensor> {
    let mut out = Vec::new();
    for k in 0..=f.twice() {
        for q in -k..=k {
            out.push(spherical_tensor(f, k, q).expect("in-range"));
        }
    }
    out
}

/// Hilbert-Schmidt projections of an operator onto the tensor basis.
pub fn rank_decompose(op: &CMat, f: HalfInt) -> Vec<(i32, i32, Complex64)> {
    tensor_basis(f)
        .iter()
        .map(|t| (t.k, t.q, hs_inner(&t.matrix, op)))
        .collect()
}

pub fn reconstruct(coeffs: &[(i32, i32, Complex64)], f: HalfInt) -> CMat {
    let dim = f.multiplicity();
    let mut out = CMat::zeros(dim, dim);
    for &(k, q, c) in coeffs {
        out += spherical_tensor(f, k, q).expect("in-range").matrix * c;
    }
    out
}

/// The correctable-error set: span of S^(k)_q, A^(k)_q for 0 <= k <= K,
/// K = floor((2F-1)/2) being the maximum number of correctable hoppings.
#[derive(Clone, Debug)]
pub struct CorrectableErrorSet {
    pub f: HalfInt,
    pub k_max: i32,
    pub basis: Vec<CMat>,
}

impl CorrectableErrorSet {
    pub fn new(f: HalfInt) -> Self {
        Self::with_k(f, (f.twice() - 1) / 2)
    }

    pub fn with_k(f: HalfInt, k_max: i32) -> Self {
        let mut basis = Vec::new();
        for k in 0..=k_max {
            basis.push(spherical_tensor(f, k, 0).expect("in-range").matrix);
            for q in 1..=k {
                let (s, a) = symmetric_antisymmetric(f, k, q).expect("in-range");
                basis.push(s);
                basis.push(a);
            }
        }
        CorrectableErrorSet { f, k_max, basis }
    }
}

/// Outcome of the rank-preserving check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankPreserving {
    pub preserving: bool,
    /// Largest Hilbert-Schmidt weight fraction leaking to ranks above K.
    pub max_leakage: f64,
}

/// True iff conjugation by U keeps every correctable-error basis element
/// within ranks <= K; leakage is the weight fraction outside.
pub fn is_rank_preserving(
    u: &CMat,
    f: HalfInt,
    k_max: i32,
    tol: f64,
) -> Result<RankPreserving, RankError> {
    let defect = unitarity_defect(u);
    if defect > 1e-10 {
        return Err(RankError::NotUnitary(defect));
    }
    let errors = CorrectableErrorSet::with_k(f, k_max);
    let mut max_leakage = 0.0f64;
    for e in &errors.basis {
        let conj = u * e * u.adjoint();
        let total: f64 = hs_inner(&conj, &conj).re;
        let leaked: f64 = rank_decompose(&conj, f)
            .iter()
            .filter(|(k, _, _)| *k > k_max)
            .map(|(_, _, c)| c.norm_sqr())
            .sum();
        max_leakage = max_leakage.max(leaked / total);
    }
    Ok(RankPreserving {
        preserving: max_leakage <= tol,
        max_leakage,
    })
}

/// Logical 2x2 action of a covariant rotation on the code space
/// {|-F>, |+F>}: present only when the rotated stretched states stay inside
/// the code space (amplitude outside <= 1e-10). For F > 1/2 that happens
/// only at beta = 0 or pi (mod 2 pi).
pub fn logical_action_of_rotation(f: HalfInt, angles: RotationAngles) -> Option<CMat> {
    let u = rotation_matrix(f, angles);
    let dim = f.multiplicity();
    for col in [0, dim - 1] {
        for row in 1..dim - 1 {
            if u[(row, col)].norm() > 1e-10 {
                return None;
            }
        }
    }
    Some(CMat::from_row_slice(
        2,
        2,
        &[
            u[(0, 0)],
            u[(0, dim - 1)],
            u[(dim - 1, 0)],
            u[(dim - 1, dim - 1)],
        ],
    ))
}

/// Fidelity between the cat state and a rotated stretched state:
/// (1/2) |cos^{2F}(beta/2) + e^{-2iF alpha} (-1)^{2F} sin^{2F}(beta/2)|^2.
pub fn hadamard_fidelity(f: HalfInt, alpha: f64, beta: f64) -> f64 {
    let two_f = f.twice();
    let c = (beta / 2.0).cos().powi(two_f);
    let s = (beta / 2.0).sin().powi(two_f);
    let sign = if two_f % 2 == 0 { 1.0 } else { -1.0 };
    let z = cr(c) + (-Complex64::i() * (two_f as f64) * alpha).exp() * cr(sign * s);
    0.5 * z.norm_sqr()
}

/// Max of the fidelity surface over an n x n (alpha, beta) grid covering
/// [0, 2 pi) half-open, so the symmetry points land on grid nodes.
pub fn hadamard_surface_max(f: HalfInt, n: usize) -> f64 {
    let mut best = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let alpha = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let beta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            best = best.max(hadamard_fidelity(f, alpha, beta));
        }
    }
    best
}

/// Cat-generation gate on the full manifold, the canonical rank-breaking
/// example.
pub fn cat_gate_matrix(f: HalfInt) -> CMat {
    crate::gatedesign::target_gate(
        f.multiplicity(),
        crate::gatedesign::GateTarget::CatHalfPi,
        crate::gatedesign::CatSign::Minus,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfint::half;
    use crate::linalg::max_abs_diff;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn rank_zero_is_identity() {
        let t = spherical_tensor(half(5), 0, 0).unwrap();
        let expect = CMat::identity(6, 6) * cr(1.0 / 6.0f64.sqrt());
        assert!(max_abs_diff(&t.matrix, &expect) < 1e-14);
        assert!(spherical_tensor(half(5), 6, 0).is_err());
        assert!(spherical_tensor(half(5), 2, 3).is_err());
    }

    #[test]
    fn rank_one_zero_is_jz() {
        let t = spherical_tensor(half(5), 1, 0).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                if r != c {
                    assert!(t.matrix[(r, c)].norm() < 1e-14);
                }
            }
        }
        let d0 = t.matrix[(0, 0)].re;
        for k in 0..6 {
            let expect = d0 * (-2.5 + k as f64) / -2.5;
            assert!((t.matrix[(k, k)].re - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn hilbert_schmidt_orthonormality() {
        let basis = tensor_basis(half(5));
        assert_eq!(basis.len(), 36);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let ip = hs_inner(&a.matrix, &b.matrix);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (ip - cr(expect)).norm() < 1e-12,
                    "({},{}) vs ({},{}): {ip}",
                    a.k,
                    a.q,
                    b.k,
                    b.q
                );
            }
        }
    }

    #[test]
    fn symmetric_antisymmetric_norms_and_span() {
        for (k, q) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
            let (s, a) = symmetric_antisymmetric(half(5), k, q).unwrap();
            assert!((hs_inner(&s, &s).re - 1.0).abs() < 1e-12);
            assert!((hs_inner(&a, &a).re - 1.0).abs() < 1e-12);
            assert!(hs_inner(&s, &a).norm() < 1e-12);
            let tp = spherical_tensor(half(5), k, q).unwrap().matrix;
            let sgn = cr(if k % 2 == 0 { 1.0 } else { -1.0 });
            let back = (&s + &a) * cr(1.0 / 2.0f64.sqrt());
            assert!(max_abs_diff(&back, &tp) < 1e-12);
            let tm = spherical_tensor(half(5), k, -q).unwrap().matrix;
            let back_m = (&s - &a) * (cr(1.0 / 2.0f64.sqrt()) * sgn);
            assert!(max_abs_diff(&back_m, &tm) < 1e-12);
        }
    }

    #[test]
    fn decompose_reconstruct_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m = CMat::from_fn(6, 6, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let coeffs = rank_decompose(&m, half(5));
        let back = reconstruct(&coeffs, half(5));
        assert!(max_abs_diff(&back, &m) < 1e-12);
        let id_coeffs = rank_decompose(&CMat::identity(6, 6), half(5));
        for (k, _, c) in id_coeffs {
            if k > 0 {
                assert!(c.norm() < 1e-13);
            }
        }
    }

    #[test]
    fn tensor_covariance_under_rotation() {
        // U T^k_q U^dag = sum_q' T^k_q' D^k_q'q
        let f = half(5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let ang = RotationAngles::new(
                rng.gen::<f64>() * 2.0 * PI,
                rng.gen::<f64>() * PI,
                rng.gen::<f64>() * 2.0 * PI,
            );
            let u = rotation_matrix(f, ang);
            for k in 0..=5 {
                for q in -k..=k {
                    let t = spherical_tensor(f, k, q).unwrap().matrix;
                    let lhs = &u * t * u.adjoint();
                    let mut rhs = CMat::zeros(6, 6);
                    for qp in -k..=k {
                        let d = crate::wigner::wigner_d_matrix(
                            HalfInt::from_int(k),
                            HalfInt::from_int(qp),
                            HalfInt::from_int(q),
                            ang,
                        );
                        rhs += spherical_tensor(f, k, qp).unwrap().matrix * d;
                    }
                    assert!(
                        max_abs_diff(&lhs, &rhs) < 1e-10,
                        "k {k} q {q}: {}",
                        max_abs_diff(&lhs, &rhs)
                    );
                }
            }
        }
    }

    #[test]
    fn rotations_preserve_rank_cat_gate_does_not() {
        let f = half(5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let ang = RotationAngles::new(
                rng.gen::<f64>() * 2.0 * PI,
                rng.gen::<f64>() * PI,
                rng.gen::<f64>() * 2.0 * PI,
            );
            let u = rotation_matrix(f, ang);
            let res = is_rank_preserving(&u, f, 2, 1e-12).unwrap();
            assert!(res.preserving, "leakage {}", res.max_leakage);
        }
        let cat = cat_gate_matrix(f);
        let res = is_rank_preserving(&cat, f, 2, 1e-12).unwrap();
        assert!(!res.preserving && res.max_leakage > 0.1, "{}", res.max_leakage);
        let id = CMat::identity(6, 6);
        assert!(is_rank_preserving(&id, f, 2, 1e-12).unwrap().preserving);
        assert!(is_rank_preserving(&(id * cr(2.0)), f, 2, 1e-12).is_err());
    }

    #[test]
    fn logical_action_beta_classification() {
        let f = half(5);
        // beta = 0: z rotation
        let rz = logical_action_of_rotation(f, RotationAngles::new(0.7, 0.0, 0.3)).unwrap();
        assert!(rz[(0, 1)].norm() < 1e-12 && rz[(1, 0)].norm() < 1e-12);
        assert!((rz[(0, 0)].norm() - 1.0).abs() < 1e-12);
        // beta = pi: bit flip with a phase
        let rx = logical_action_of_rotation(f, RotationAngles::new(0.2, PI, 1.1)).unwrap();
        assert!(rx[(0, 0)].norm() < 1e-12 && rx[(1, 1)].norm() < 1e-12);
        assert!((rx[(0, 1)].norm() - 1.0).abs() < 1e-12);
        // generic beta: absent for F > 1/2 (amplitude lands on m' = -3/2)
        assert!(logical_action_of_rotation(f, RotationAngles::new(0.0, PI / 2.0, 0.0)).is_none());
        // F = 1/2: every rotation is logical
        assert!(logical_action_of_rotation(half(1), RotationAngles::new(0.4, 1.2, 2.2)).is_some());
    }

    #[test]
    fn logical_action_present_iff_beta_near_0_or_pi() {
        let f = half(5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let beta = rng.gen::<f64>() * 2.0 * PI;
            let present =
                logical_action_of_rotation(f, RotationAngles::new(0.3, beta, 0.9)).is_some();
            let expected = beta.min((beta - PI).abs()).min((beta - 2.0 * PI).abs()) < 1e-6;
            assert_eq!(present, expected, "beta = {beta}");
        }
    }

    #[test]
    fn hadamard_fidelity_values() {
        // F = 1/2 attains 1 (beta = pi/2, alpha = pi)
        assert!((hadamard_fidelity(half(1), PI, PI / 2.0) - 1.0).abs() < 1e-12);
        // F = 5/2: one half at beta in {0, pi}; zero at beta = pi/2, alpha = 0
        assert!((hadamard_fidelity(half(5), 0.7, 0.0) - 0.5).abs() < 1e-12);
        assert!(hadamard_fidelity(half(5), 0.0, PI / 2.0) < 1e-12);
        assert!((hadamard_surface_max(half(1), 200) - 1.0).abs() < 1e-9);
        for tf in [2, 3, 4, 5] {
            let m = hadamard_surface_max(half(tf), 200);
            assert!(m <= 0.5 + 1e-9, "F = {}/2: {m}", tf);
        }
    }
}
