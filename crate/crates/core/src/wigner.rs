//! Angular-momentum algebra: Wigner 3j and 6j symbols, Clebsch-Gordan
//! coefficients, and Wigner rotation matrices for half-integer spins.
//!
//! Conventions are Condon-Shortley throughout. Basis ordering for assembled
//! matrices is ascending m (index k corresponds to m = -j + k); this ordering
//! is used everywhere in the crate.

use num_complex::Complex64;

use crate::halfint::HalfInt;
use crate::linalg::CMat;

/// Factorials 0!..=40! as f64, computed exactly in integer arithmetic where
/// they fit in u128 (up to 33!) and by f64 multiplication beyond. Covers all
/// sums for j <= 9/2 with a wide margin.
const FACT_LEN: usize = 41;

fn factorials() -> &'static [f64; FACT_LEN] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; FACT_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0f64; FACT_LEN];
        let mut exact: u128 = 1;
        t[0] = 1.0;
        for n in 1..FACT_LEN {
            if n <= 33 {
                exact *= n as u128;
                t[n] = exact as f64;
            } else {
                t[n] = t[n - 1] * n as f64;
            }
        }
        t
    })
}

#[inline]
fn fact(n: i32) -> f64 {
    factorials()[n as usize]
}

/// (-1)^n for an exponent given as twice its value; panics on half-integer
/// exponents, which never arise from valid quantum numbers.
#[inline]
fn phase_twice(twice: i32) -> f64 {
    assert!(twice % 2 == 0, "phase exponent {twice}/2 is not an integer");
    if (twice / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn triangle_ok(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> bool {
    let (a, b, c) = (j1.twice(), j2.twice(), j3.twice());
    a + b >= c && b + c >= a && c + a >= b && (a + b + c) % 2 == 0
}

/// sqrt of the triangle coefficient Delta(j1 j2 j3).
fn triangle_coeff(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> f64 {
    let (a, b, c) = (j1.twice(), j2.twice(), j3.twice());
    (fact((a + b - c) / 2) * fact((a - b + c) / 2) * fact((-a + b + c) / 2)
        / fact((a + b + c) / 2 + 1))
    .sqrt()
}

fn check_spin(j: HalfInt, name: &str) {
    assert!(!j.is_negative(), "negative angular momentum {name} = {j}");
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3).
///
/// Selection-rule violations (triangle rule, m1+m2+m3 != 0, |m| > j) return
/// zero; negative j or mismatched j/m parity are invalid input.
pub fn wigner_3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> f64 {
    check_spin(j1, "j1");
    check_spin(j2, "j2");
    check_spin(j3, "j3");
    for (j, m, n) in [(j1, m1, "1"), (j2, m2, "2"), (j3, m3, "3")] {
        assert!(
            (j.twice() - m.twice()) % 2 == 0,
            "m{n} = {m} has wrong parity for j{n} = {j}"
        );
        if m.twice().abs() > j.twice() {
            return 0.0;
        }
    }
    if m1.twice() + m2.twice() + m3.twice() != 0 || !triangle_ok(j1, j2, j3) {
        return 0.0;
    }

    // Racah sum; all arguments below are exact integers by the parity checks.
    let a1 = (j1.twice() + j2.twice() - j3.twice()) / 2;
    let a2 = (j1.twice() - m1.twice()) / 2;
    let a3 = (j2.twice() + m2.twice()) / 2;
    let b1 = (j2.twice() - j3.twice() - m1.twice()) / 2;
    let b2 = (j1.twice() - j3.twice() + m2.twice()) / 2;
    let kmin = 0.max(b1).max(b2);
    let kmax = a1.min(a2).min(a3);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let term = fact(k)
            * fact(a1 - k)
            * fact(a2 - k)
            * fact(a3 - k)
            * fact(k - b1)
            * fact(k - b2);
        sum += if k % 2 == 0 { 1.0 } else { -1.0 } / term;
    }
    let norm = triangle_coeff(j1, j2, j3)
        * (fact((j1.twice() + m1.twice()) / 2)
            * fact((j1.twice() - m1.twice()) / 2)
            * fact((j2.twice() + m2.twice()) / 2)
            * fact((j2.twice() - m2.twice()) / 2)
            * fact((j3.twice() + m3.twice()) / 2)
            * fact((j3.twice() - m3.twice()) / 2))
        .sqrt();
    phase_twice(j1.twice() - j2.twice() - m3.twice()) * norm * sum
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}.
///
/// Any triad violating the triangle rule gives zero; negative j is invalid.
pub fn wigner_6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> f64 {
    for (j, n) in [(j1, "j1"), (j2, "j2"), (j3, "j3"), (j4, "j4"), (j5, "j5"), (j6, "j6")] {
        check_spin(j, n);
    }
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    if triads.iter().any(|&(a, b, c)| !triangle_ok(a, b, c)) {
        return 0.0;
    }
    let t1 = (j1.twice() + j2.twice() + j3.twice()) / 2;
    let t2 = (j1.twice() + j5.twice() + j6.twice()) / 2;
    let t3 = (j4.twice() + j2.twice() + j6.twice()) / 2;
    let t4 = (j4.twice() + j5.twice() + j3.twice()) / 2;
    let q1 = (j1.twice() + j2.twice() + j4.twice() + j5.twice()) / 2;
    let q2 = (j2.twice() + j3.twice() + j5.twice() + j6.twice()) / 2;
    let q3 = (j3.twice() + j1.twice() + j6.twice() + j4.twice()) / 2;
    let tmin = t1.max(t2).max(t3).max(t4);
    let tmax = q1.min(q2).min(q3);
    let mut sum = 0.0;
    for t in tmin..=tmax {
        let term = fact(t + 1)
            / (fact(t - t1)
                * fact(t - t2)
                * fact(t - t3)
                * fact(t - t4)
                * fact(q1 - t)
                * fact(q2 - t)
                * fact(q3 - t));
        sum += if t % 2 == 0 { term } else { -term };
    }
    triads
        .iter()
        .map(|&(a, b, c)| triangle_coeff(a, b, c))
        .product::<f64>()
        * sum
}

/// Clebsch-Gordan coefficient <F m_g | F' m_e; 1 -q> via the 3j relation
/// (-1)^(F'-1+m_g) sqrt(2F+1) (F' 1 F; m_e -q -m_g).
pub fn clebsch_gordan(
    f: HalfInt,
    m_g: HalfInt,
    f_prime: HalfInt,
    m_e: HalfInt,
    q: HalfInt,
) -> f64 {
    let one = HalfInt::ONE;
    if !f.valid_projection(m_g) || !f_prime.valid_projection(m_e) || q.twice().abs() > 2 {
        return 0.0;
    }
    phase_twice(f_prime.twice() - 2 + m_g.twice())
        * ((f.twice() + 1) as f64).sqrt()
        * wigner_3j(f_prime, one, f, m_e, -q, -m_g)
}

/// General Clebsch-Gordan coefficient <j1 m1; j2 m2 | j3 m3> from the 3j
/// symbol, Condon-Shortley phases.
pub fn clebsch_gordan_general(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j3: HalfInt,
    m3: HalfInt,
) -> f64 {
    if m1.twice() + m2.twice() != m3.twice() {
        return 0.0;
    }
    phase_twice(-j1.twice() + j2.twice() - m3.twice())
        * ((j3.twice() + 1) as f64).sqrt()
        * wigner_3j(j1, j2, j3, m1, m2, -m3)
}

/// Wigner small-d matrix element d^(k)_{m'm}(beta), evaluated from the
/// factorial sum; the sum runs over all j keeping every factorial argument
/// nonnegative.
pub fn wigner_small_d(k: HalfInt, m_prime: HalfInt, m: HalfInt, beta: f64) -> f64 {
    check_spin(k, "k");
    assert!(
        k.valid_projection(m) && k.valid_projection(m_prime),
        "projections {m_prime}, {m} invalid for k = {k}"
    );
    let kp_m = (k.twice() + m.twice()) / 2;
    let km_m = (k.twice() - m.twice()) / 2;
    let kp_mp = (k.twice() + m_prime.twice()) / 2;
    let km_mp = (k.twice() - m_prime.twice()) / 2;
    let norm = (fact(kp_m) * fact(km_m) * fact(kp_mp) * fact(km_mp)).sqrt();
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let dm = (m_prime.twice() - m.twice()) / 2; // m' - m, an integer
    let jmin = 0.max(-dm);
    let jmax = kp_m.min(km_mp);
    let mut sum = 0.0;
    for j in jmin..=jmax {
        let denom = fact(kp_m - j) * fact(j) * fact(km_mp - j) * fact(j + dm);
        let sign = if (j + dm).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let cexp = k.twice() - 2 * j - dm;
        let sexp = 2 * j + dm;
        sum += sign * c.powi(cexp) * s.powi(sexp) / denom;
    }
    norm * sum
}

/// Wigner D-matrix element D^(k)_{q'q}(alpha, beta, gamma)
/// = exp(-i(q' alpha + q gamma)) d^(k)_{q'q}(beta).
pub fn wigner_d_matrix(
    k: HalfInt,
    q_prime: HalfInt,
    q: HalfInt,
    angles: RotationAngles,
) -> Complex64 {
    let phase = -Complex64::i()
        * (q_prime.value() * angles.alpha + q.value() * angles.gamma);
    phase.exp() * wigner_small_d(k, q_prime, q, angles.beta)
}

/// Euler angles (alpha, beta, gamma) of a rotation, z-y-z convention.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RotationAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl RotationAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        assert!(
            alpha.is_finite() && beta.is_finite() && gamma.is_finite(),
            "rotation angles must be finite"
        );
        RotationAngles { alpha, beta, gamma }
    }

    pub fn beta_only(beta: f64) -> Self {
        RotationAngles::new(0.0, beta, 0.0)
    }
}

/// Full (2F+1)-dimensional small-d rotation matrix, ascending-m ordering.
pub fn small_d_matrix(f: HalfInt, beta: f64) -> CMat {
    let dim = f.multiplicity();
    CMat::from_fn(dim, dim, |r, c| {
        let mp = HalfInt::from_twice(-f.twice() + 2 * r as i32);
        let m = HalfInt::from_twice(-f.twice() + 2 * c as i32);
        Complex64::new(wigner_small_d(f, mp, m, beta), 0.0)
    })
}

/// Full (2F+1)-dimensional rotation matrix D^(F)(alpha, beta, gamma),
/// ascending-m ordering.
pub fn rotation_matrix(f: HalfInt, angles: RotationAngles) -> CMat {
    let dim = f.multiplicity();
    CMat::from_fn(dim, dim, |r, c| {
        let mp = HalfInt::from_twice(-f.twice() + 2 * r as i32);
        let m = HalfInt::from_twice(-f.twice() + 2 * c as i32);
        wigner_d_matrix(f, mp, m, angles)
    })
}
