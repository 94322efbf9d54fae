mod common;

use ccf::{
    base_cosine, convolve_family, duhamel_residuals, extend_full, fractional_extend, iterate_doubling, j_alpha,
    BranchTerm, DiagonalGenerator, Error, ExtendOptions, Grid, Kernel, PropagatorTable,
};
use common::{frozen, re, slope, smoothed_cosh};

fn base(spec: &str, cells: usize) -> PropagatorTable {
    base_cosine(&spec.parse::<DiagonalGenerator>().unwrap(), &Grid::new(1.0, cells).unwrap())
}

#[test]
fn one_step_reaches_the_ramp_family() {
    let run = extend_full(&base("1", 128), &Kernel::Jalpha(1.0), 1, ExtendOptions::default()).unwrap();
    let t = &run.tables[1];
    assert_eq!(t.grid().intervals(), 256);
    assert!((t.entry(192, 0) - frozen::RAMP_COSH_AT_1_5).norm() < 5e-5);
    assert!(run.seams[0] < 1e-12);
}

#[test]
fn no_steps_returns_the_smoothed_base() {
    let b = base("1,2i", 64);
    let run = extend_full(&b, &Kernel::CharInterval, 0, ExtendOptions::default()).unwrap();
    assert_eq!(run.tables.len(), 1);
    let direct = convolve_family(&b, &Kernel::CharInterval).unwrap();
    for m in 0..2 {
        assert_eq!(run.tables[0].column(m).unwrap().values(), direct.column(m).unwrap().values());
    }
}

#[test]
fn two_steps_converge_at_second_order() {
    let cells = [32, 64, 128];
    let errs: Vec<f64> = cells
        .iter()
        .map(|&j| {
            let run = extend_full(&base("1", j), &Kernel::Jalpha(1.0), 2, ExtendOptions::default()).unwrap();
            let t = run.last();
            (0..=3 * j)
                .map(|i| {
                    let x = t.grid().node(i);
                    (t.entry(i, 0) - (x.sinh() - x)).norm()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let p = slope(&cells.map(|j| 1.0 / j as f64), &errs);
    assert!((1.7..=2.3).contains(&p), "order {p}, {errs:?}");
    let run = extend_full(&base("1", 128), &Kernel::Jalpha(1.0), 2, ExtendOptions::default()).unwrap();
    assert!((run.last().entry(256, 0) - frozen::CUBIC_COSH_AT_2).norm() < 1e-4);
}

#[test]
fn extended_tables_satisfy_their_duhamel_identity() {
    for j in [64, 128] {
        let run = fractional_extend(&base("0,1,2i,1+1i", j), 0.5, 3, ExtendOptions::default()).unwrap();
        let t = run.last();
        let worst = (0..4)
            .map(|m| duhamel_residuals(t, m).unwrap().into_iter().fold(0.0, f64::max))
            .fold(0.0, f64::max);
        assert!(worst < 2e-2 * (64.0 / j as f64).powi(2), "cells {j}: {worst}");
    }
}

#[test]
fn unit_exponent_matches_the_generic_path() {
    let b = base("1,2i", 64);
    let frac = fractional_extend(&b, 1.0, 2, ExtendOptions::default()).unwrap();
    let full = extend_full(&b, &Kernel::Jalpha(1.0), 2, ExtendOptions::default()).unwrap();
    for m in 0..2 {
        let d = frac.last().column(m).unwrap().max_abs_diff(full.last().column(m).unwrap());
        assert!(d < 1e-4, "{d}");
    }
}

#[test]
fn half_exponent_without_spectrum_gives_fractional_integrals() {
    let run = fractional_extend(&base("0", 64), 0.5, 3, ExtendOptions::default()).unwrap();
    for (n, t) in run.tables.iter().enumerate() {
        let beta = 0.5 * (n + 1) as f64 + 1.0;
        let worst = (0..=t.grid().intervals())
            .map(|i| (t.entry(i, 0) - j_alpha(beta, t.grid().node(i))).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "n = {n}: {worst}");
    }
}

#[test]
fn half_exponent_one_step_against_the_series() {
    let run = fractional_extend(&base("1", 128), 0.5, 1, ExtendOptions::default()).unwrap();
    let want = smoothed_cosh(1.0, re(1.0), 1.5);
    assert!((want - 1.5f64.sinh()).norm() < 1e-14);
    assert!((run.last().entry(192, 0) - want).norm() < 1e-4);
}

#[test]
fn doubling_agrees_with_one_shot() {
    let b = base("1,2i", 64);
    let once = fractional_extend(&b, 1.0, 3, ExtendOptions::default()).unwrap();
    let doubled = iterate_doubling(&b, &Kernel::Jalpha(1.0), 2).unwrap();
    assert_eq!(doubled.grid().intervals(), 256);
    for m in 0..2 {
        let d = once.tables[3].column(m).unwrap().max_abs_diff(doubled.column(m).unwrap());
        assert!(d < 1e-3, "{d}");
    }
}

#[test]
fn dropping_a_branch_term_breaks_the_table() {
    let b = base("1", 64);
    let good = extend_full(&b, &Kernel::Jalpha(1.0), 1, ExtendOptions::default()).unwrap();
    let opts = ExtendOptions { skip_term: Some(BranchTerm::ReflectedHistory) };
    let bad = extend_full(&b, &Kernel::Jalpha(1.0), 1, opts).unwrap();
    let gap = bad.last().column(0).unwrap().max_abs_diff(good.last().column(0).unwrap());
    assert!(gap > 1e-2, "{gap}");
    assert!(BranchTerm::from_position(6).is_err());
}

#[test]
fn extension_starts_from_the_bare_family() {
    let smoothed = convolve_family(&base("1", 32), &Kernel::Jalpha(1.0)).unwrap();
    assert!(matches!(
        extend_full(&smoothed, &Kernel::Jalpha(1.0), 1, ExtendOptions::default()),
        Err(Error::Usage(_))
    ));
}
