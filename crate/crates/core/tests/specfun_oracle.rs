use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use wireshift::specfun::bessel_jh;

fn fixture() -> Vec<(i32, Complex64, Complex64, Complex64)> {
    include_str!("fixtures/bessel_oracle.txt")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
            (
                v[0] as i32,
                Complex64::new(v[1], v[2]),
                Complex64::new(v[3], v[4]),
                Complex64::new(v[5], v[6]),
            )
        })
        .collect()
}

#[test]
fn matches_high_precision_reference() {
    let rows = fixture();
    assert_eq!(rows.len(), 200);
    let mut worst = 0.0f64;
    for (n, z, j, h) in rows {
        let v = bessel_jh(n, z).unwrap();
        let ej = (v.j - j).norm() / j.norm();
        let eh = (v.h1 - h).norm() / h.norm();
        worst = worst.max(ej).max(eh);
        assert!(ej < 1e-9, "J_{n}({z}): rel err {ej:e}");
        assert!(eh < 1e-9, "H_{n}({z}): rel err {eh:e}");
    }
    eprintln!("worst relative error vs reference: {worst:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]
    #[test]
    fn wronskian_holds_in_upper_half_plane(n in 0i32..=20, log_r in -2.0f64..50f64.log10(), phase in 0.0f64..PI) {
        let z = Complex64::from_polar(10f64.powf(log_r), phase);
        let v = bessel_jh(n, z).unwrap();
        let w = v.j * v.h1prime - v.jprime * v.h1;
        let expect = Complex64::new(0.0, 2.0) / (PI * z);
        // relative to the size of the individual products, which is what limits cancellation
        let scale = expect.norm().max((v.j * v.h1prime).norm() * 1e-6);
        prop_assert!((w - expect).norm() < 1e-10 * scale, "n={} z={} err={:e}", n, z, (w - expect).norm() / expect.norm());
    }
}
