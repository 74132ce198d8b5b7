use fracgrad_core::fields::{Grid, ScalarField};
use fracgrad_core::norms::{lorentz_p1_auto, lp_norm, Distribution};
use fracgrad_core::potentials::riesz_fft;
use proptest::prelude::*;

fn field(lo: f64, ext: f64, vals: &[f64]) -> ScalarField {
    let g = Grid::new(&[lo, lo], &[ext, ext], &[8, 8]).unwrap();
    ScalarField::new(g, vals.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // ||u||_p <= ||u||_(p,1) for every sampled field.
    #[test]
    fn lebesgue_below_lorentz(vals in prop::collection::vec(-3.0f64..3.0, 64), p in 1.1f64..4.0) {
        let u = field(0.0, 1.0, &vals);
        let d = Distribution::from_field(&u);
        let a = lp_norm(&d, p).unwrap();
        let b = lorentz_p1_auto(&d, p).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-9), "{a} > {b}");
    }

    // Stretching the grid by lambda scales I_alpha f by lambda^alpha.
    #[test]
    fn potential_scales_with_grid(vals in prop::collection::vec(0.0f64..1.0, 64), lambda in 0.25f64..4.0, a in 0.2f64..1.5) {
        let f = field(0.0, 1.0, &vals);
        let g = field(0.0, lambda, &vals);
        let pf = riesz_fft(&f, a).unwrap();
        let pg = riesz_fft(&g, a).unwrap();
        let k = lambda.powf(a);
        for (x, y) in pf.values().iter().zip(pg.values()) {
            prop_assert!((k * x - y).abs() <= 1e-9 * y.abs().max(1e-12));
        }
    }

    // Nonnegative data give a nonnegative potential; linearity in f.
    #[test]
    fn potential_positive_and_linear(vals in prop::collection::vec(0.0f64..1.0, 64), c in -3.0f64..3.0) {
        let f = field(-1.0, 2.0, &vals);
        let pf = riesz_fft(&f, 0.7).unwrap();
        prop_assert!(pf.values().iter().all(|v| *v >= -1e-12));
        let scaled: Vec<f64> = vals.iter().map(|v| c * v).collect();
        let ps = riesz_fft(&field(-1.0, 2.0, &scaled), 0.7).unwrap();
        for (x, y) in pf.values().iter().zip(ps.values()) {
            prop_assert!((c * x - y).abs() <= 1e-9 * (1.0 + y.abs()));
        }
    }
}
