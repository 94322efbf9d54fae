mod common;

use ccf::{
    convolve, j_alpha, laplace_transform, stable_density, subordinate, Complex64, Error, Grid, GridFunction, Kernel,
    QuadratureRule,
};
use common::{frozen, re};
use proptest::prelude::*;

#[test]
fn fractional_kernel_samples() {
    let g = Grid::new(2.0, 50).unwrap();
    let one = Kernel::Jalpha(1.0).sample(&g).unwrap();
    assert!(one.values()[1..].iter().all(|v| (v - 1.0).norm() < 1e-15));
    let two = Kernel::Jalpha(2.0).sample(&g).unwrap();
    assert!(g.nodes().enumerate().all(|(i, t)| (two.value(i) - t).norm() < 1e-14));
}

#[test]
fn stable_densities_match_frozen_values() {
    let cases = [
        (0.5, 0.25, frozen::HALF_STABLE_AT_QUARTER),
        (0.3, 1.0, frozen::STABLE_0_3_AT_1),
        (0.3, 0.5, frozen::STABLE_0_3_AT_HALF),
        (0.7, 2.0, frozen::STABLE_0_7_AT_2),
    ];
    for (d, t, want) in cases {
        let got = stable_density(d, t);
        assert!(((got - want) / want).abs() < 1e-11, "K_{d}({t}) = {got}, want {want}");
    }
}

#[test]
fn closed_form_transforms() {
    let one = re(1.0);
    for d in [0.3, 0.5, 0.7] {
        let v = Kernel::kdelta(d).unwrap().laplace(one).unwrap();
        assert!((v - (-1.0f64).exp()).norm() < 1e-15);
    }
    assert!((Kernel::Jalpha(2.0).laplace(re(2.0)).unwrap() - 0.25).norm() < 1e-15);
    assert!((Kernel::CharInterval.laplace(re(1e-9)).unwrap() - 1.0).norm() < 1e-8);
    assert!((Kernel::CharInterval.laplace(re(2.0)).unwrap() - 0.43233235838169365).norm() < 1e-15);
}

#[test]
fn sampled_transforms_converge() {
    // truncation at T = 40 costs at most e^{-40}
    for d in [0.5, 0.7] {
        let g = Grid::new(40.0, 16000).unwrap();
        let k = Kernel::kdelta(d).unwrap();
        for lam in [re(1.0), re(2.0), Complex64::new(1.0, 1.0)] {
            let got = laplace_transform(&k.sample(&g).unwrap(), lam).unwrap();
            let want = k.laplace(lam).unwrap();
            assert!((got - want).norm() < 1e-9, "δ={d} λ={lam}: {got} vs {want}");
        }
    }
}

#[test]
fn subordinating_the_constant_gives_the_half_power() {
    let g = Grid::new(2.0, 32).unwrap();
    let s = subordinate(&Kernel::Jalpha(1.0), &g).unwrap();
    for i in 1..=32 {
        let want = j_alpha(0.5, g.node(i));
        assert!(((s.value(i).re - want) / want).abs() < 1e-12);
    }
    let sub = Kernel::subordinated(Kernel::Jalpha(1.0));
    assert!((sub.laplace(re(1.0)).unwrap() - 1.0).norm() < 1e-15);
    let fine = Grid::new(40.0, 40000).unwrap();
    let numeric = laplace_transform(&sub.sample(&fine).unwrap(), re(1.0)).unwrap();
    assert!((numeric - 1.0).norm() < 1e-6, "{numeric}");
}

#[test]
fn subordinating_zero_gives_zero() {
    let g = Grid::new(4.0, 40).unwrap();
    let zero = Kernel::Sampled(GridFunction::zeros(g).with_support(0, 0).unwrap());
    let s = subordinate(&zero, &Grid::new(1.0, 10).unwrap()).unwrap();
    assert_eq!(s.max_abs(), 0.0);
}

#[test]
fn stable_densities_are_positive() {
    let g = Grid::new(10.0, 2000).unwrap();
    for d in [0.3, 0.5, 0.7] {
        let s = Kernel::kdelta(d).unwrap().sample(&g).unwrap();
        // K_0.7 ~ exp(−0.13 t^{−7/3}) underflows below t ≈ 0.025
        for (i, t) in g.nodes().enumerate().skip(1) {
            let v = s.value(i).re;
            assert!(if t >= 0.05 { v > 0.0 } else { v >= 0.0 }, "δ = {d}, t = {t}: {v}");
        }
    }
}

#[test]
fn fractional_kernels_form_a_semigroup() {
    let g = Grid::new(2.0, 256).unwrap();
    for (a, b) in [(0.5, 0.5), (0.3, 0.7), (1.0, 1.0)] {
        let (ka, kb) = (Kernel::Jalpha(a).sample(&g).unwrap(), Kernel::Jalpha(b).sample(&g).unwrap());
        let prod = convolve(&ka, &kb, QuadratureRule::auto(&ka, &kb)).unwrap();
        let want = Kernel::Jalpha(a + b).sample(&g).unwrap();
        assert!(prod.max_abs_diff(&want) < 1e-10, "({a}, {b}): {}", prod.max_abs_diff(&want));
    }
}

#[test]
fn every_kernel_charges_a_neighbourhood_of_zero() {
    let kernels = [
        Kernel::Jalpha(0.5),
        Kernel::Jalpha(2.5),
        Kernel::CharInterval,
        Kernel::kdelta(0.3).unwrap(),
        Kernel::kdelta(0.7).unwrap(),
        Kernel::subordinated(Kernel::Jalpha(1.0)),
    ];
    for k in &kernels {
        for eps in [0.05, 0.1, 0.5] {
            let g = Grid::new(eps, 20).unwrap();
            let mass: f64 = k.sample(&g).unwrap().values().iter().map(|v| v.norm()).sum();
            assert!(mass > 0.0, "{k} on [0, {eps}]");
        }
    }
}

#[test]
fn kernel_specs() {
    for spec in ["jalpha:0.5", "chi01", "kdelta:0.3", "subord:jalpha:1"] {
        assert_eq!(spec.parse::<Kernel>().unwrap().to_string(), spec);
    }
    assert!(matches!("kdelta:1.5".parse::<Kernel>(), Err(Error::Parameter(_))));
    assert!(matches!("gauss:1".parse::<Kernel>(), Err(Error::Parse(_))));
    assert!(matches!("jalpha:-1".parse::<Kernel>(), Err(Error::Parameter(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn half_stable_density_matches_its_closed_form(t in 0.05..5.0f64) {
        let want = (-1.0 / (4.0 * t)).exp() / (2.0 * std::f64::consts::PI.sqrt() * t.powf(1.5));
        prop_assert!(((stable_density(0.5, t) - want) / want).abs() < 1e-10);
    }
}
