//! Temporary probe for per-source budget rows (deleted before release).
use spincat_core::benchmark::RbProtocol;
use spincat_core::budget::*;
use spincat_core::constants_file::workspace_constants;

#[test]
#[ignore]
fn probe_rows() {
    let cf = workspace_constants();
    let scheme = cf.scheme("yb173").unwrap();
    let cal = cf.calibration("yb173").unwrap();
    let params = BudgetParams::default();
    let stats = BudgetStats {
        crb_depths: vec![1, 2, 4, 7, 10],
        drb_depths: vec![1, 4, 8, 14, 20],
        n_circuits: 40,
        seed: 23,
    };
    let reference = [
        (NoiseSource::IntensityFluct, 7.6e-3, 5.5e-8, 8.1e-6),
        (NoiseSource::PolarizationFluct, 5.6e-2, 1.8e-3, 4.8e-3),
        (NoiseSource::FrequencyFluct, 7.1e-5, 5.1e-8, 2.1e-6),
        (NoiseSource::Orthogonality, 3.4e-3, 6.8e-4, 2.0e-3),
        (NoiseSource::Zeeman, 5.0e-3, 3.1e-4, 1.2e-3),
        (NoiseSource::Dephasing, 5.8e-4, 3.1e-7, 7.5e-4),
        (NoiseSource::Scattering, 7.8e-4, 7.7e-8, 3.4e-5),
    ];
    for (src, c_ref, nd_ref, d_ref) in reference {
        let (c, cs) = crb_error_for(&scheme, &cal, Some(src), &params, &stats).unwrap();
        let (bias, _, _) = drb_bias_for(&scheme, &cal, Some(src), &params, &stats).unwrap();
        eprintln!(
            "{:<20} clifford {c:.3e}+-{cs:.1e} (ref {c_ref:.1e}, x{:.2})  p_nd {:.2e} (ref {nd_ref:.1e})  p_d {:.2e} (ref {d_ref:.1e})",
            src.label(), (c / c_ref).max(c_ref / c), bias.p_nd, bias.p_d
        );
    }
}
