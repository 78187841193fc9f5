//! Curve fitting used by the benchmarking pipeline: weighted least squares
//! for the RB decay A p^m + b with fixed floor b, and sinusoid fits for the
//! magnetization shape checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("decay parameter unidentifiable: {0}")]
    Degenerate(String),
}

/// Result of a decay fit A p^m + b with fixed b.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub p: f64,
    pub b_fixed: f64,
    /// 1-sigma uncertainties from the parameter covariance.
    pub amplitude_sigma: f64,
    pub p_sigma: f64,
    pub residual_chi2: f64,
}

/// Weighted least squares of survivals against A p^m + b, b fixed.
///
/// For fixed p, A is linear; p is found by golden-section search on the
/// weighted residual. Uncertainties come from (J^T W J)^-1 at the optimum.
pub fn fit_decay(
    depths: &[f64],
    survivals: &[f64],
    errors: &[f64],
    b_fixed: f64,
) -> Result<DecayFit, FitError> {
    let n = depths.len();
    if n < 3 || survivals.len() != n || errors.len() != n {
        return Err(FitError::TooFewPoints { need: 3, got: n });
    }
    let weights: Vec<f64> = errors.iter().map(|&e| 1.0 / e.max(1e-6).powi(2)).collect();
    let y: Vec<f64> = survivals.iter().map(|&s| s - b_fixed).collect();

    let amp_for = |p: f64| -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let basis = p.powf(depths[i]);
            num += weights[i] * y[i] * basis;
            den += weights[i] * basis * basis;
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    };
    let chi2_for = |p: f64| -> f64 {
        let a = amp_for(p);
        (0..n)
            .map(|i| {
                let r = y[i] - a * p.powf(depths[i]);
                weights[i] * r * r
            })
            .sum()
    };

    // golden-section over p in (0, 1]; coarse bracket first
    let mut best_p = 1e-6;
    let mut best_chi = f64::INFINITY;
    let grid = 400;
    for k in 0..=grid {
        let p = 1e-6 + (1.0 - 1e-6) * k as f64 / grid as f64;
        let c = chi2_for(p);
        if c < best_chi {
            best_chi = c;
            best_p = p;
        }
    }
    let mut lo = (best_p - 2.0 / grid as f64).max(1e-9);
    let mut hi = (best_p + 2.0 / grid as f64).min(1.0);
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = hi - gr * (hi - lo);
        let x2 = lo + gr * (hi - lo);
        if chi2_for(x1) < chi2_for(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let p = 0.5 * (lo + hi);
    let a = amp_for(p);

    if a.abs() < 1e-9 {
        return Err(FitError::Degenerate(
            "fitted amplitude is zero; survivals carry no depth dependence".into(),
        ));
    }
    let spread = {
        let mean = survivals.iter().sum::<f64>() / n as f64;
        survivals.iter().map(|s| (s - mean).powi(2)).sum::<f64>()
    };
    if spread < 1e-18 {
        return Err(FitError::Degenerate("constant survivals".into()));
    }

    // covariance from the 2 x 2 normal matrix in (A, p)
    let mut jtj = [[0.0f64; 2]; 2];
    for i in 0..n {
        let m = depths[i];
        let da = p.powf(m);
        let dp = if m == 0.0 { 0.0 } else { a * m * p.powf(m - 1.0) };
        jtj[0][0] += weights[i] * da * da;
        jtj[0][1] += weights[i] * da * dp;
        jtj[1][0] += weights[i] * da * dp;
        jtj[1][1] += weights[i] * dp * dp;
    }
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    let (sa, sp) = if det.abs() < 1e-30 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        ((jtj[1][1] / det).max(0.0).sqrt(), (jtj[0][0] / det).max(0.0).sqrt())
    };
    Ok(DecayFit {
        amplitude: a,
        p,
        b_fixed,
        amplitude_sigma: sa,
        p_sigma: sp,
        residual_chi2: chi2_for(p),
    })
}

/// Least-squares fit of a single sinusoid a cos(w t) + b sin(w t) + c over a
/// frequency grid; returns (frequency rad/s, rms residual, amplitude).
pub fn single_tone_fit(times: &[f64], values: &[f64], omega_lo: f64, omega_hi: f64) -> (f64, f64, f64) {
    assert!(times.len() == values.len() && times.len() > 4);
    let eval = |w: f64| -> (f64, f64) {
        // linear LS for (a, b, c)
        let n = times.len();
        let mut m = [[0.0f64; 3]; 3];
        let mut rhs = [0.0f64; 3];
        for i in 0..n {
            let basis = [(w * times[i]).cos(), (w * times[i]).sin(), 1.0];
            for r in 0..3 {
                for c in 0..3 {
                    m[r][c] += basis[r] * basis[c];
                }
                rhs[r] += basis[r] * values[i];
            }
        }
        let sol = solve3(m, rhs);
        let mut ss = 0.0;
        for i in 0..n {
            let fit = sol[0] * (w * times[i]).cos() + sol[1] * (w * times[i]).sin() + sol[2];
            ss += (values[i] - fit).powi(2);
        }
        let amp = (sol[0] * sol[0] + sol[1] * sol[1]).sqrt();
        ((ss / n as f64).sqrt(), amp)
    };
    let grid = 2000;
    let mut best = (omega_lo, f64::INFINITY, 0.0);
    for k in 0..=grid {
        let w = omega_lo + (omega_hi - omega_lo) * k as f64 / grid as f64;
        let (r, amp) = eval(w);
        if r < best.1 {
            best = (w, r, amp);
        }
    }
    // golden refinement
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let step = (omega_hi - omega_lo) / grid as f64;
    let (mut lo, mut hi) = (best.0 - 2.0 * step, best.0 + 2.0 * step);
    for _ in 0..60 {
        let x1 = hi - gr * (hi - lo);
        let x2 = lo + gr * (hi - lo);
        if eval(x1).0 < eval(x2).0 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let w = 0.5 * (lo + hi);
    let (r, amp) = eval(w);
    (w, r, amp)
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        let d = m[col][col];
        if d.abs() < 1e-300 {
            continue;
        }
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / d;
                for c in 0..3 {
                    m[r][c] -= f * m[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    [b[0] / m[0][0], b[1] / m[1][1], b[2] / m[2][2]]
}

/// Periodogram peak positions: local maxima of the squared projection onto
/// e^{-i w t} over a uniform frequency grid.
pub fn spectral_peaks(times: &[f64], values: &[f64], omega_lo: f64, omega_hi: f64, grid: usize, n_peaks: usize) -> Vec<f64> {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let power: Vec<f64> = (0..=grid)
        .map(|k| {
            let w = omega_lo + (omega_hi - omega_lo) * k as f64 / grid as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in times.iter().zip(values) {
                re += (v - mean) * (w * t).cos();
                im += (v - mean) * (w * t).sin();
            }
            re * re + im * im
        })
        .collect();
    let mut peaks: Vec<(f64, f64)> = (1..grid)
        .filter(|&k| power[k] > power[k - 1] && power[k] > power[k + 1])
        .map(|k| {
            let w = omega_lo + (omega_hi - omega_lo) * k as f64 / grid as f64;
            (power[k], w)
        })
        .collect();
    peaks.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut out: Vec<f64> = peaks.into_iter().take(n_peaks).map(|(_, w)| w).collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}
