mod common;

use ccf::{
    antiderivative, convolution_power, convolve, convolve_direct, cosine_convolve, derivative, dual_convolve,
    laplace_transform, second_antiderivative, Complex64, Error, Grid, GridFunction, Kernel, QuadratureRule,
    TestFunction,
};
use common::{re, simpson};
use proptest::prelude::*;

fn ones(grid: Grid) -> GridFunction {
    GridFunction::from_real_fn(grid, |_| 1.0)
}

/// Indicator of `[0, 1]` with its support recorded.
fn unit_box(grid: Grid) -> GridFunction {
    let i1 = grid.index_of(1.0).unwrap();
    GridFunction::from_real_fn(grid, |t| if t <= 1.0 + 1e-12 { 1.0 } else { 0.0 })
        .with_support(0, i1)
        .unwrap()
}

#[test]
fn constant_self_convolution_is_the_ramp() {
    let g = Grid::new(3.0, 300).unwrap();
    let r = convolve(&ones(g), &ones(g), QuadratureRule::Trapezoid).unwrap();
    assert!((r.value_at(1.5).unwrap() - 1.5).norm() < 1e-13);
    let sq = convolution_power(&ones(g), 2).unwrap();
    assert!(g.nodes().enumerate().all(|(i, t)| (sq.value(i) - t).norm() < 1e-12));
}

#[test]
fn zero_annihilates() {
    let g = Grid::new(2.0, 200).unwrap();
    let f = GridFunction::from_real_fn(g, |t| t.cos());
    let z = GridFunction::zeros(g);
    assert_eq!(convolve(&f, &z, QuadratureRule::Trapezoid).unwrap().max_abs(), 0.0);
    assert_eq!(cosine_convolve(&z, &f).unwrap().max_abs(), 0.0);
    assert_eq!(antiderivative(&z).unwrap().max_abs(), 0.0);
}

#[test]
fn half_powers_compose_to_the_ramp() {
    let g = Grid::new(2.0, 256).unwrap();
    let half = Kernel::Jalpha(0.5).sample(&g).unwrap();
    let one = convolve(&half, &half, QuadratureRule::auto(&half, &half)).unwrap();
    assert!((one.value_at(1.0).unwrap() - 1.0).norm() < 1e-10);
    let four = convolution_power(&half, 4).unwrap();
    assert!((four.value_at(1.0).unwrap() - 1.0).norm() < 1e-10);
    assert_eq!(convolution_power(&half, 1).unwrap().values(), half.values());
}

#[test]
fn dual_product_examples() {
    let g = Grid::new(20.0, 20000).unwrap();
    let e = GridFunction::from_real_fn(g, |t| (-t).exp());
    let d = dual_convolve(&e, &e).unwrap();
    assert!((d.value(0) - 0.5).norm() < 1e-6);

    let g = Grid::new(2.0, 200).unwrap();
    let b = unit_box(g);
    let d = dual_convolve(&b, &b).unwrap();
    assert!((d.value_at(0.25).unwrap() - 0.75).norm() < 1e-13);
    assert_eq!(d.value_at(1.5).unwrap(), re(0.0));
    let c = cosine_convolve(&b, &b).unwrap();
    assert!((c.value_at(1.0).unwrap() - 0.5).norm() < 1e-13);
}

#[test]
fn cosine_product_at_zero_is_the_l2_pairing() {
    let f = |t: f64| (3.0 * t).cos() + (-t).exp();
    let g = Grid::new(2.0, 1024).unwrap();
    let s = GridFunction::from_real_fn(g, f);
    let c = cosine_convolve(&s, &s).unwrap();
    let l2 = simpson(|t| re(f(t) * f(t)), 0.0, 2.0, 4000);
    assert!((c.value(0) - l2).norm() < 1e-5, "{} vs {l2}", c.value(0));
}

#[test]
fn antiderivatives_of_the_constant() {
    let g = Grid::new(2.0, 64).unwrap();
    let a = antiderivative(&ones(g)).unwrap();
    assert!(g.nodes().enumerate().all(|(i, t)| (a.value(i) - t).norm() < 1e-14));
    let b = second_antiderivative(&ones(g)).unwrap();
    assert!((b.value(64) - 2.0).norm() < 1e-14);
}

#[test]
fn central_differences_on_a_quadratic() {
    let g = Grid::new(2.0, 40).unwrap();
    let q = GridFunction::from_real_fn(g, |t| t * t);
    let d1 = derivative(&q, 1).unwrap();
    assert!((d1.value_at(1.0).unwrap() - 2.0).norm() < 1e-12);
    let d2 = derivative(&q, 2).unwrap();
    assert!((1..40).all(|i| (d2.value(i) - 2.0).norm() < 1e-9));
    let d0 = derivative(&GridFunction::from_real_fn(g, |_| 3.0), 1).unwrap();
    assert!(d0.max_abs() < 1e-12);
}

#[test]
fn truncated_laplace_transform() {
    let g = Grid::new(2.0, 100).unwrap();
    let f = GridFunction::from_real_fn(g, |t| t);
    assert!((laplace_transform(&f, re(0.0)).unwrap() - 2.0).norm() < 1e-12);

    let g = Grid::new(40.0, 40000).unwrap();
    let l = laplace_transform(&ones(g), re(1.0)).unwrap();
    assert!((l - 1.0).norm() < 1e-6);

    let g = Grid::new(4.0, 800).unwrap();
    let phi = TestFunction::new(0.2, 0.9, 6).unwrap().sample(&g, 0).unwrap();
    let psi = TestFunction::new(0.5, 1.6, 6).unwrap().sample(&g, 0).unwrap();
    let conv = convolve(&phi, &psi, QuadratureRule::Trapezoid).unwrap();
    let lam = Complex64::new(1.0, 0.5);
    let lhs = laplace_transform(&conv, lam).unwrap();
    let rhs = laplace_transform(&phi, lam).unwrap() * laplace_transform(&psi, lam).unwrap();
    assert!((lhs - rhs).norm() < 1e-5, "{lhs} vs {rhs}");
}

#[test]
fn misuse_is_reported() {
    let a = ones(Grid::new(1.0, 10).unwrap());
    let b = ones(Grid::new(2.0, 10).unwrap());
    assert!(matches!(convolve(&a, &b, QuadratureRule::Trapezoid), Err(Error::Shape(_))));
    assert!(matches!(dual_convolve(&a, &b), Err(Error::Shape(_))));
    assert!(matches!(convolve(&a, &a, QuadratureRule::ProductIntegration), Err(Error::Usage(_))));
    assert!(matches!(Grid::new(1.0, 1), Err(Error::InvalidGrid(_))));
}

fn smooth(grid: Grid, c: [f64; 4]) -> GridFunction {
    GridFunction::from_fn(grid, move |t| {
        Complex64::new(c[0] * (c[1] * t).cos(), c[2] * (-c[3] * t).exp())
    })
}

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    [-2.0..2.0f64, 0.0..6.0f64, -2.0..2.0f64, 0.0..3.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_commutes(cf in coeffs(), cg in coeffs(), m in 16usize..400) {
        let g = Grid::new(2.0, m).unwrap();
        let (f, h) = (smooth(g, cf), smooth(g, cg));
        let fg = convolve(&f, &h, QuadratureRule::Trapezoid).unwrap();
        let gf = convolve(&h, &f, QuadratureRule::Trapezoid).unwrap();
        let scale = 1.0 + f.max_abs() * h.max_abs();
        prop_assert!(fg.max_abs_diff(&gf) <= 1e-10 * scale);
    }

    #[test]
    fn fft_path_matches_direct_sum(cf in coeffs(), cg in coeffs(), m in 128usize..600, alpha in 0.2..1.8f64) {
        let g = Grid::new(2.0, m).unwrap();
        let (f, h) = (smooth(g, cf), smooth(g, cg));
        let fast = convolve(&f, &h, QuadratureRule::Trapezoid).unwrap();
        let slow = convolve_direct(&f, &h, QuadratureRule::Trapezoid).unwrap();
        prop_assert!(fast.max_abs_diff(&slow) <= 1e-12 * (f.max_abs() * h.max_abs() * 2.0).max(1e-300));

        let k = Kernel::Jalpha(alpha).sample(&g).unwrap();
        let fast = convolve(&k, &h, QuadratureRule::ProductIntegration).unwrap();
        let slow = convolve_direct(&k, &h, QuadratureRule::ProductIntegration).unwrap();
        prop_assert!(fast.max_abs_diff(&slow) <= 1e-11 * (1.0 + h.max_abs()));
    }

    #[test]
    fn convolution_is_linear(cf in coeffs(), cg in coeffs(), ch in coeffs(), x in -3.0..3.0f64, m in 16usize..300) {
        let g = Grid::new(2.0, m).unwrap();
        let (f, u, v) = (smooth(g, cf), smooth(g, cg), smooth(g, ch));
        let comb = u.add_scaled(&v, re(x)).unwrap();
        let lhs = convolve(&f, &comb, QuadratureRule::Trapezoid).unwrap();
        let rhs = convolve(&f, &u, QuadratureRule::Trapezoid).unwrap()
            .add_scaled(&convolve(&f, &v, QuadratureRule::Trapezoid).unwrap(), re(x)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11 * (1.0 + lhs.max_abs()));
    }

    #[test]
    fn cosine_product_is_symmetric(cf in coeffs(), cg in coeffs(), m in 16usize..300) {
        let g = Grid::new(2.0, m).unwrap();
        let (f, h) = (smooth(g, cf), smooth(g, cg));
        let a = cosine_convolve(&f, &h).unwrap();
        let b = cosine_convolve(&h, &f).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-10 * (1.0 + a.max_abs()));
    }

    #[test]
    fn support_starts_add(lo_f in 0usize..40, lo_g in 0usize..40, m in 100usize..200) {
        let g = Grid::new(2.0, m).unwrap();
        let f = GridFunction::from_real_fn(g, |t| 1.0 + t).restricted(lo_f, m);
        let h = GridFunction::from_real_fn(g, |t| (2.0 * t).cos()).restricted(lo_g, m);
        let r = convolve(&f, &h, QuadratureRule::Trapezoid).unwrap();
        prop_assert!((0..lo_f + lo_g).all(|i| r.value(i).norm() == 0.0));
    }
}
