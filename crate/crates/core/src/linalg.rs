//! Dense complex linear algebra helpers shared across the crate: matrix
//! exponential, Hermitian eigendecomposition, Kronecker products, and
//! vectorization for superoperators. Everything here targets small matrices
//! (dimension at most a few tens).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

pub fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Maximum column sum of absolute values (the induced 1-norm).
pub fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|c| a.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest elementwise modulus of (a - b).
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling-and-squaring with a Pade(13) approximant
/// (Higham 2005). Robust for general complex matrices.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    const THETA_13: f64 = 5.371920351148152;
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a_scaled = a * cr(1.0 / (2.0f64).powi(s as i32));
    let mut result = pade13(&a_scaled);
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

fn pade13(a: &CMat) -> CMat {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let id = CMat::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (&a6 * cr(B[13]) + &a4 * cr(B[11]) + &a2 * cr(B[9]))
        + &a6 * cr(B[7])
        + &a4 * cr(B[5])
        + &a2 * cr(B[3])
        + &id * cr(B[1]);
    let u = a * u_inner;
    let v = &a6 * (&a6 * cr(B[12]) + &a4 * cr(B[10]) + &a2 * cr(B[8]))
        + &a6 * cr(B[6])
        + &a4 * cr(B[4])
        + &a2 * cr(B[2])
        + &id * cr(B[0]);
    let denom = &v - &u;
    let numer = &v + &u;
    denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is singular")
}

/// Eigendecomposition of a Hermitian matrix; returns (eigenvalues ascending,
/// unitary matrix of eigenvectors as columns).
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let es = a.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..es.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| es.eigenvalues[i].partial_cmp(&es.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| es.eigenvalues[i]).collect();
    let n = a.nrows();
    let mut vecs = CMat::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        vecs.set_column(c, &es.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// exp(-i H t) for Hermitian H via eigendecomposition.
pub fn expm_hermitian_propagator(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let n = h.nrows();
    let phases = CMat::from_diagonal(&CVec::from_iterator(
        n,
        vals.iter().map(|&e| (-C_I * e * t).exp()),
    ));
    &vecs * phases * vecs.adjoint()
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Small negative eigenvalues from roundoff are clamped to zero.
pub fn sqrtm_psd(a: &CMat) -> CMat {
    let (vals, vecs) = eigh(a);
    let n = a.nrows();
    let roots = CMat::from_diagonal(&CVec::from_iterator(
        n,
        vals.iter().map(|&e| cr(e.max(0.0).sqrt())),
    ));
    &vecs * roots * vecs.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Column-stacking vectorization: vec(rho)[i + n*j] = rho[(i, j)].
pub fn vectorize(rho: &CMat) -> CVec {
    let n = rho.nrows();
    CVec::from_iterator(n * n, (0..n * n).map(|k| rho[(k % n, k / n)]))
}

pub fn unvectorize(v: &CVec, n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| v[i + n * j])
}

/// Deviation of U from unitarity, max |(U U^dag - I)_{ij}|.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u * u.adjoint()), &CMat::identity(n, n))
}

/// Hilbert-Schmidt inner product <a, b> = Tr(a^dag b).
pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Trace distance of U from V modulo global phase, 1 - |Tr(U^dag V)| / n.
pub fn phase_distance(u: &CMat, v: &CMat) -> f64 {
    let n = u.nrows() as f64;
    1.0 - (hs_inner(u, v).norm() / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMat::zeros(4, 4);
        assert!(max_abs_diff(&expm(&z), &CMat::identity(4, 4)) < 1e-15);
    }

    #[test]
    fn expm_matches_scalar_phase() {
        // exp(i phi I) = e^{i phi} I, large phase exercises scaling
        let phi = 200.0 * PI / 3.0;
        let a = CMat::identity(3, 3) * (C_I * phi);
        let e = expm(&a);
        let expect = (C_I * phi).exp();
        for k in 0..3 {
            assert!((e[(k, k)] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn expm_pauli_rotation() {
        // exp(-i theta/2 sigma_x) closed form
        let theta = 1.9;
        let sx = CMat::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO]);
        let e = expm(&(sx * (-C_I * (theta / 2.0))));
        let c = cr((theta / 2.0).cos());
        let s = -C_I * (theta / 2.0).sin();
        let expect = CMat::from_row_slice(2, 2, &[c, s, s, c]);
        assert!(max_abs_diff(&e, &expect) < 1e-14);
    }

    #[test]
    fn hermitian_propagator_agrees_with_expm() {
        let h = CMat::from_fn(5, 5, |i, j| {
            let z = Complex64::new((i * j) as f64 * 0.3 - i as f64, (i as f64 - j as f64) * 0.7);
            if i == j {
                cr(i as f64)
            } else {
                z
            }
        });
        let h = (&h + h.adjoint()) * cr(0.5);
        let t = 0.37;
        let via_eig = expm_hermitian_propagator(&h, t);
        let via_pade = expm(&(&h * (-C_I * t)));
        assert!(max_abs_diff(&via_eig, &via_pade) < 1e-12);
        assert!(unitarity_defect(&via_eig) < 1e-13);
    }

    #[test]
    fn sqrtm_roundtrip() {
        let a = CMat::from_fn(4, 4, |i, j| Complex64::new(0.3 * (i + j) as f64, (i as f64 - j as f64) * 0.2));
        let psd = &a * a.adjoint() + CMat::identity(4, 4) * cr(0.1);
        let r = sqrtm_psd(&psd);
        assert!(max_abs_diff(&(&r * &r), &psd) < 1e-12);
    }

    #[test]
    fn vectorize_roundtrip() {
        let a = CMat::from_fn(3, 3, |i, j| Complex64::new(i as f64, j as f64));
        assert_eq!(unvectorize(&vectorize(&a), 3), a);
    }
}
