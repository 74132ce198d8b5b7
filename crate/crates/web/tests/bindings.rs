use fracgrad_web::{counterexample_profile, plane_superlevel, riesz_heatmap};

#[test]
fn heatmap_is_symmetric_and_positive() {
    let n = 32;
    let v = riesz_heatmap(n, 0.5).unwrap();
    assert_eq!(v.len(), n * n);
    assert!(v.iter().all(|x| *x > 0.0));
    for i in 0..n {
        for j in 0..n {
            let a = v[i * n + j];
            let b = v[(n - 1 - i) * n + j];
            assert!((a - b).abs() <= 1e-10 * a, "{a} {b}");
        }
    }
}

#[test]
fn profile_slope_near_two_at_center() {
    let p = counterexample_profile(0.5, 6.0, 20).unwrap();
    assert_eq!(p.s().len(), 20);
    assert!((p.slope() - 2.0).abs() < 0.02, "{}", p.slope());
    assert!(p.residual() < 0.02);
}

#[test]
fn superlevel_fraction_shrinks_with_t() {
    let lo = plane_superlevel(1.0, 1e-4, 50).unwrap();
    let hi = plane_superlevel(50.0, 1e-4, 50).unwrap();
    assert_eq!(lo.len(), 51);
    assert!(lo[50] >= hi[50]);
    assert_eq!(hi[50], 0.0);
}
