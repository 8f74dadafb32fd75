use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use wireshift::emitters::{fit_two_lorentzian, TwoLorentzian};
use wireshift::gwire::{plasmon_pole, wire_spectral_green};
use wireshift::spectral::{KzTable, PoleHint, TableOptions};
use wireshift::specfun::bessel_jh;
use wireshift::SpectralPoint;
use wireshift_bench::{default_wire, synthetic_spectrum, OMEGA_A, RHO};

fn bessel(c: &mut Criterion) {
    let mut g = c.benchmark_group("bessel_jh");
    for (name, z) in [("small", Complex64::new(0.3, 0.1)), ("medium", Complex64::new(8.0, 2.0)), ("large", Complex64::new(40.0, 30.0))] {
        g.bench_function(name, |b| b.iter(|| bessel_jh(black_box(5), black_box(z)).unwrap()));
    }
    g.finish();
}

fn spectral_green(c: &mut Criterion) {
    let wire = default_wire();
    let mut g = c.benchmark_group("wire_spectral_green");
    for (name, s, kz) in [
        ("real_propagating", SpectralPoint::Real(OMEGA_A), 3.0),
        ("real_plasmon", SpectralPoint::Real(OMEGA_A), 30.9),
        ("imaginary", SpectralPoint::Imaginary(OMEGA_A), 30.9),
        ("near_field", SpectralPoint::Real(OMEGA_A), 600.0),
    ] {
        g.bench_function(name, |b| b.iter(|| wire_spectral_green(&wire, RHO, RHO, 0.0, s, black_box(kz)).unwrap()));
    }
    g.finish();
}

fn kz_table(c: &mut Criterion) {
    let wire = default_wire();
    let pole = plasmon_pole(&wire, OMEGA_A).unwrap().map(|(center, width)| PoleHint { center, width });
    let opts = TableOptions {
        pole,
        singular_points: vec![OMEGA_A],
        decay_length: 2.0 * (RHO - wire.radius),
        ..TableOptions::new(1e-6)
    };
    let f = |kz: f64| Ok(vec![wire_spectral_green(&wire, RHO, RHO, 0.0, SpectralPoint::Real(OMEGA_A), kz)?.tensor.0[0][0]]);
    let mut g = c.benchmark_group("kz_table");
    g.sample_size(10);
    g.bench_function("rr_real_axis", |b| b.iter(|| KzTable::build(f, 1, &opts).unwrap()));
    g.finish();
}

fn lorentzian_fit(c: &mut Criterion) {
    let samples = synthetic_spectrum(&TwoLorentzian { amplitude: 3.0, width: 0.2, center: 1.5 * OMEGA_A }, 1601);
    c.bench_function("fit_two_lorentzian", |b| b.iter(|| fit_two_lorentzian(black_box(&samples), OMEGA_A).unwrap()));
}

criterion_group!(benches, bessel, spectral_green, kz_table, lorentzian_fit);
criterion_main!(benches);
