use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;
use wireshift::emitters::{
    analytic_approximations, dicke_levels, fit_plasmon_lorentzian, fit_two_lorentzian, EmitterPair,
    RateShiftEngine, SweepOptions, TwoLorentzian, WireSystem,
};
use wireshift::{DrudeModel, RateShiftResult, WireGeometry};

const OMEGA_A: f64 = 2.0 * PI;
const RHO: f64 = 0.015;
const DZS: [f64; 3] = [0.0, 0.02, 0.25];

fn system(a: f64) -> WireSystem {
    WireSystem {
        geometry: WireGeometry::new(a, DrudeModel::default_for(OMEGA_A)).unwrap(),
        pair: EmitterPair::radial(RHO, 0.0),
    }
}

fn default_rows() -> &'static [RateShiftResult] {
    static ROWS: OnceLock<Vec<RateShiftResult>> = OnceLock::new();
    ROWS.get_or_init(|| {
        RateShiftEngine::new(system(0.01), SweepOptions::new(1e-4)).unwrap().evaluate(&DZS).unwrap()
    })
}

fn sampled(m: &TwoLorentzian) -> Vec<(f64, f64)> {
    let (lo, hi, n) = (OMEGA_A, 4.0 * m.center, 1601);
    (0..n)
        .map(|i| {
            let k = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            (k, m.eval(k))
        })
        .collect()
}

#[test]
fn synthetic_spectrum_round_trip() {
    let m = TwoLorentzian { amplitude: 3.0, width: 0.2, center: 1.5 * OMEGA_A };
    let fit = fit_two_lorentzian(&sampled(&m), OMEGA_A).unwrap();
    assert!((fit.amplitude_a / 3.0 - 1.0).abs() < 1e-6);
    assert!((fit.width_gamma / 0.2 - 1.0).abs() < 1e-6);
    assert!((fit.center_kz_pl / m.center - 1.0).abs() < 1e-6);
    assert!(fit.fit_residual < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn synthetic_fits_recover_parameters(a in 0.1..10.0f64, g in 0.05..2.0f64, c in 1.3..8.0f64) {
        let m = TwoLorentzian { amplitude: a, width: g, center: c * OMEGA_A };
        let fit = fit_two_lorentzian(&sampled(&m), OMEGA_A).unwrap();
        prop_assert!((fit.amplitude_a / a - 1.0).abs() < 1e-6);
        prop_assert!((fit.width_gamma / g - 1.0).abs() < 1e-6);
        prop_assert!((fit.center_kz_pl / m.center - 1.0).abs() < 1e-6);
    }
}

#[test]
fn flat_spectrum_is_not_a_plasmon() {
    let s = system(1e-6);
    assert!(fit_plasmon_lorentzian(&s.geometry, RHO, OMEGA_A).is_err());
}

#[test]
fn coincident_emitters_share_one_rate() {
    let r = &default_rows()[0];
    assert_eq!(r.gamma12, r.gamma11);
    assert_eq!(r.gamma22, r.gamma11);
    assert!((r.shift12_total / r.shift11_total - 1.0).abs() < 1e-3, "{r:?}");
}

#[test]
fn shifts_split_into_resonant_and_integral_parts() {
    for r in default_rows() {
        assert!(r.rates_converged && r.shifts_converged);
        assert_eq!(r.shift12_total, r.shift12_resonant + r.shift12_integral);
        assert_eq!(r.shift11_total, r.shift11_resonant + r.shift11_integral);
        assert!(r.is_positive_semidefinite(), "dz = {}", r.dz);
    }
}

#[test]
fn plasmon_estimate_of_the_purcell_rate() {
    let g11 = default_rows()[0].gamma11;
    assert!((g11 / 745.6291 - 1.0).abs() < 1e-3, "{g11}");
    let fit = fit_plasmon_lorentzian(&system(0.01).geometry, RHO, OMEGA_A).unwrap();
    let appr = analytic_approximations(&fit, 0.0).unwrap();
    assert!((appr.gamma11_appr / g11 - 1.0).abs() < 0.25, "{} vs {g11}", appr.gamma11_appr);
}

#[test]
fn dicke_rates_sum_to_twice_the_single_rate() {
    for r in default_rows() {
        let d = dicke_levels(r);
        assert!((d.symmetric.decay + d.antisymmetric.decay - 2.0 * r.gamma11).abs() < 1e-12 * r.gamma11);
        assert_eq!(d.symmetric.shift, -d.antisymmetric.shift);
    }
}

/// Two radial dipoles in vacuum, normal to their separation `x/k`.
fn free_pair(x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    1.5 * (s / x + c / (x * x) - s / (x * x * x))
}

#[test]
fn thin_wire_recovers_free_space_pair() {
    let rows = RateShiftEngine::new(system(1e-6), SweepOptions::new(1e-4)).unwrap().evaluate(&[0.25]).unwrap();
    let r = &rows[0];
    let exact = free_pair(OMEGA_A * 0.25);
    assert!((r.gamma11 - 1.0).abs() < 1e-5, "{}", r.gamma11);
    assert!((r.gamma12 / r.gamma11 - exact).abs() < 1e-5, "{} vs {exact}", r.gamma12 / r.gamma11);
}
