use dirac_backaction_core::soc::*;
use dirac_backaction_core::spectral::HermitianEigen;
use proptest::prelude::*;

const M_RB: f64 = 1.44e-25;
const K_R: f64 = 8e6;
const CHI: f64 = 2.0 * std::f64::consts::PI * 500.0;

fn rb(eps: f64) -> SocParams {
    SocParams::new(K_R, CHI, sigma_slope_for_epsilon(K_R, CHI, M_RB, eps), M_RB).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn epsilon_identity_holds_everywhere(
        log_kr in 5.0f64..8.0,
        log_chi in 1.0f64..5.0,
        log_m in -27.0f64..-23.0,
        eps in 0.0f64..10.0,
    ) {
        let (kr, chi, m) = (10f64.powf(log_kr), 10f64.powf(log_chi), 10f64.powf(log_m));
        let p = SocParams::new(kr, chi, sigma_slope_for_epsilon(kr, chi, m, eps), m).unwrap();
        let e = map_parameters(&p).unwrap();
        prop_assert!((e.epsilon_from_energies() - e.epsilon_eff).abs() <= 4.0 * f64::EPSILON * e.epsilon_eff.max(1e-300));
        prop_assert!((e.compton_identity() - 1.0).abs() < 4.0 * f64::EPSILON);
        prop_assert!((e.epsilon_eff - eps).abs() <= 1e-14 * eps.max(1.0));
    }
}

#[test]
fn kinetic_free_grid_is_the_mapped_oscillator() {
    let p = rb(0.1);
    let e = map_parameters(&p).unwrap();
    let grid = SocGrid::centered(&e, 12.0, 256).unwrap();
    let h = build_soc_hamiltonian_grid(&p, &grid, KineticTerm::Suppressed).unwrap();
    let offset = HBAR * K_R * K_R / (2.0 * M_RB * CHI);
    let d = build_mapped_do_grid(&e, &grid).shift(offset);
    assert!(h.max_abs_diff(&d) < 1e-12);
}

#[test]
fn spectrum_comparison_at_tenth() {
    let p = rb(0.1);
    let grid = SocGrid::centered(&map_parameters(&p).unwrap(), 12.0, 256).unwrap();
    let r = compare_soc_vs_do(&p, &grid, 10).unwrap();
    assert!(r.max_rel_error_no_kinetic() < 1e-6, "{}", r.max_rel_error_no_kinetic());
    assert!(r.kinetic_shift_monotone());
    assert!(r.valid());
    assert!(r.aliasing_weight < ALIASING_TOL);
    assert!(r.rows.iter().all(|row| row.kinetic_shift > 0.0));
}

#[test]
fn grid_refinement_converges() {
    let p = rb(0.1);
    let e = map_parameters(&p).unwrap();
    let coarse = compare_soc_vs_do(&p, &SocGrid::centered(&e, 12.0, 256).unwrap(), 10).unwrap();
    let fine = compare_soc_vs_do(&p, &SocGrid::centered(&e, 12.0, 512).unwrap(), 10).unwrap();
    for (a, b) in coarse.rows.iter().zip(&fine.rows) {
        assert!((a.soc_no_kinetic - b.soc_no_kinetic).abs() < 1e-8 * b.soc_no_kinetic);
        assert!((a.soc_kinetic - b.soc_kinetic).abs() < 1e-8 * b.soc_kinetic);
    }
}

#[test]
fn free_particle_is_a_gapped_dirac_cone() {
    let p = SocParams::new(K_R, CHI, 0.0, M_RB).unwrap();
    let lambda = HBAR * K_R / (M_RB * CHI);
    let grid = SocGrid::new(-128.0 * lambda, 128.0 * lambda, 256).unwrap();
    let h = build_soc_hamiltonian_grid(&p, &grid, KineticTerm::Suppressed).unwrap();
    let offset = HBAR * K_R * K_R / (2.0 * M_RB * CHI);
    let values = HermitianEigen::values_only(&h).unwrap();
    let mut upper: Vec<f64> = values.iter().map(|v| v - offset).filter(|&v| v > 0.0).collect();
    upper.sort_by(f64::total_cmp);
    let want = free_dispersion(&p, &grid);
    assert_eq!(upper.len(), want.len());
    for (a, b) in upper.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!((upper[0] - 1.0).abs() < 1e-12, "gap is 2ħχ");
}

#[test]
fn rubidium_lands_in_the_condensate_row() {
    let e = map_parameters(&rb(1.0)).unwrap();
    let row = PLATFORM_SCALES.iter().find(|r| r.platform == "soc-condensate").unwrap();
    let decade = |v: f64, s: &str| (v.log10() - s.parse::<f64>().unwrap().log10()).abs() <= 1.0;
    assert!(decade(e.c_eff, row.velocity_of_light));
    assert!(decade(e.compton_eff, row.compton_wavelength));
    assert!(decade(e.zb_freq / (2.0 * std::f64::consts::PI), row.zb_frequency));
}

#[test]
fn detuning_and_coarse_grids_are_refused() {
    let p = rb(0.1).with_detuning(10.0).unwrap();
    assert!(map_parameters(&p).is_err());
    let e = map_parameters(&rb(0.1)).unwrap();
    let l = e.oscillator_length();
    assert!(SocGrid::new(-l, l, 128).is_err());
    let wide = SocGrid::new(-400.0 * l, 400.0 * l, 256).unwrap();
    assert!(compare_soc_vs_do(&rb(0.1), &wide, 4).is_err());
}
