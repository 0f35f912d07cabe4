use std::f64::consts::{FRAC_1_SQRT_2, PI};

use approx::assert_abs_diff_eq;
use num_complex::Complex64;

use photon_bottleneck::circuit::{builtin_circuit, simulate, BuiltinKind};
use photon_bottleneck::entanglement::{
    four_photon_fraction_closed_form, four_photon_fraction_first_order, four_photon_witness_epsilon, ghz_fraction,
    ghz_state, mixture_fraction, redistribute, witness_passes, PureEnsemble,
};
use photon_bottleneck::fock::{circular_ket, photon};
use photon_bottleneck::mismatch::{error_hv_distribution, matched_factor, mismatch_output, MismatchScenario};
use photon_bottleneck::polarization::{circular_distribution, rotation_symmetry_defect, stokes_expectations};
use photon_bottleneck::postselect::bottleneck_output;
use photon_bottleneck::{FockState, ModeId, ProductPhotonState};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn mixture_fraction_follows_closed_form() {
    for k in 0..=10 {
        let eps = k as f64 / 10.0;
        let f = mixture_fraction(&MismatchScenario::four_photon(eps).unwrap()).unwrap();
        assert_abs_diff_eq!(f, four_photon_fraction_closed_form(eps), epsilon = 1e-10);
        assert_eq!(witness_passes(f), eps <= four_photon_witness_epsilon(), "ε = {eps}");
    }
    // second-order gap: closed form − first order ≈ −(5/36)ε²
    let eps = 1e-3;
    let gap = four_photon_fraction_closed_form(eps) - four_photon_fraction_first_order(eps);
    assert_abs_diff_eq!(gap / (eps * eps), -5.0 / 36.0, epsilon = 1e-3);
}

#[test]
fn witness_boundary_is_six_sevenths() {
    let eps = four_photon_witness_epsilon();
    let f = mixture_fraction(&MismatchScenario::four_photon(eps).unwrap()).unwrap();
    assert_abs_diff_eq!(f, 0.5, epsilon = 1e-12);
}

#[test]
fn error_statistics_do_not_depend_on_the_mismatched_photon() {
    let reference = circular_distribution(&mismatch_output(&MismatchScenario::four_photon(1.0).unwrap()).unwrap()).unwrap();
    for port in 0..4 {
        for k in 0..8 {
            let sc = MismatchScenario::new(4, port, 1.0).unwrap().with_angle(PI * k as f64 / 8.0);
            let s = mismatch_output(&sc).unwrap();
            assert_abs_diff_eq!(s.norm_sq(), 1.0 / 128.0, epsilon = 1e-12);
            let d = circular_distribution(&s).unwrap();
            assert!(d.max_difference(&reference) <= 1e-10, "port {port}, angle {k}π/8");
        }
    }
}

#[test]
fn error_state_factorizes_into_bunched_triple_and_lone_photon() {
    for port in 0..4 {
        let sc = MismatchScenario::new(4, port, 1.0).unwrap();
        let theta = PI * port as f64 / 4.0;
        let lone_amp = 0.5 * FRAC_1_SQRT_2;
        let lone = ProductPhotonState::new(
            vec![photon([
                (ModeId::r(4), c(lone_amp, 0.0)),
                (ModeId::l(4), Complex64::from_polar(lone_amp, -2.0 * theta)),
            ])],
            c(1.0, 0.0),
        )
        .unwrap()
        .expand();
        let expected = matched_factor(&sc).unwrap().tensor(&lone).unwrap();
        let got = mismatch_output(&sc).unwrap();
        for (occ, _) in expected.terms().chain(got.terms()) {
            assert_abs_diff_eq!((got.amplitude(occ) - expected.amplitude(occ)).norm(), 0.0, epsilon = 1e-14);
        }
    }
}

#[test]
fn error_state_linear_statistics_and_stokes() {
    let sc = MismatchScenario::four_photon(1.0).unwrap();
    let hv = error_hv_distribution(&sc).unwrap();
    assert_abs_diff_eq!(hv.get(-2), 0.75, epsilon = 1e-12);
    assert_abs_diff_eq!(hv.get(2), 0.25, epsilon = 1e-12);
    let (s, _) = mismatch_output(&sc).unwrap().normalize().unwrap();
    let stokes = stokes_expectations(&s).unwrap();
    assert_abs_diff_eq!(stokes.s1, -1.0, epsilon = 1e-12);
}

#[test]
fn stokes_of_cat_and_bunched_ket() {
    let (cat, _) = bottleneck_output(4).unwrap().0.normalize().unwrap();
    let s = stokes_expectations(&cat).unwrap();
    for v in [s.s1, s.s2, s.s3] {
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }
    let all_r = stokes_expectations(&circular_ket(0, 4, 0)).unwrap();
    assert_abs_diff_eq!(all_r.s3, 4.0, epsilon = 1e-12);
    assert_abs_diff_eq!(all_r.s1, 0.0, epsilon = 1e-12);
}

#[test]
fn error_state_gives_three_eighths_ghz_fraction() {
    let err = mismatch_output(&MismatchScenario::four_photon(1.0).unwrap()).unwrap();
    let spread = redistribute(&err, 4).unwrap();
    assert_abs_diff_eq!(spread.norm_sq(), 3.0 / 32.0 / 128.0, epsilon = 1e-15);
    let f = ghz_fraction(&PureEnsemble::single(spread), 4).unwrap();
    assert_abs_diff_eq!(f, 3.0 / 8.0, epsilon = 1e-12);
}

#[test]
fn ghz_circuit_matches_pipeline() {
    let sim = simulate(&builtin_circuit(BuiltinKind::Ghz, 4).unwrap()).unwrap();
    assert_abs_diff_eq!(sim.probability, 3.0 / 256.0 * 3.0 / 32.0, epsilon = 1e-15);
    let channels = sim.state.relabel(|m| ModeId::new(if m.spatial == 0 { 0 } else { m.spatial - 3 }, m.pol));
    assert!(channels.same_ray(&ghz_state(4).unwrap(), 1e-10));
    let (cat, _) = bottleneck_output(4).unwrap();
    assert!(redistribute(&cat, 4).unwrap().same_ray(&channels, 1e-10));
}

#[test]
fn redistributed_cat_is_ghz_for_small_n() {
    for n in 2..=5 {
        let (cat, _) = bottleneck_output(n).unwrap();
        let spread = redistribute(&cat, n).unwrap();
        let f = ghz_fraction(&PureEnsemble::single(spread), n).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn cat_states_have_n_fold_symmetry() {
    for n in 2..=6u32 {
        let (cat, _) = bottleneck_output(n as usize).unwrap();
        assert!(rotation_symmetry_defect(&cat, n) < 1e-12, "n = {n}");
        assert_abs_diff_eq!(rotation_symmetry_defect(&cat, 1), 0.0, epsilon = 1e-12);
    }
    // breaking the superposition with a small admixture is visible
    let (cat, _) = bottleneck_output(4).unwrap().0.normalize().unwrap();
    let broken: FockState = cat.add(&circular_ket(0, 3, 1).scaled(c(0.3, 0.0))).unwrap();
    assert!(rotation_symmetry_defect(&broken, 4) > 0.01);
}
