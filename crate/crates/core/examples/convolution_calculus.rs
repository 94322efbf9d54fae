//! Products on the half line and the identities linking them.
//!
//! Run with `cargo run --example convolution_calculus`.

use ccf::{convolve, cosine_convolve, dual_convolve, Grid, GridFunction, Kernel, QuadratureRule, Result};

fn main() -> Result<()> {
    let grid = Grid::new(2.0, 512)?;
    let f = GridFunction::from_real_fn(grid, |t| (-t).exp());
    let g = GridFunction::from_real_fn(grid, |t| t.cos());

    let star = convolve(&f, &g, QuadratureRule::Trapezoid)?;
    let dual = dual_convolve(&f, &g)?;
    let cos = cosine_convolve(&f, &g)?;

    // e^{-s} ∗ cos s = (sin t + cos t − e^{-t}) / 2
    let exact = |t: f64| 0.5 * (t.sin() + t.cos() - (-t).exp());
    let i = grid.index_of(1.0).expect("1 is a node");
    println!("(f ∗ g)(1)   = {:.10}  exact {:.10}", star.value(i).re, exact(1.0));
    println!("(f ∘ g)(1)   = {:.10}", dual.value(i).re);
    println!("(f ∗_c g)(1) = {:.10}", cos.value(i).re);

    // j_½ ∗ j_½ = j_1 needs product integration for the t^{-1/2} singularity.
    let half = Kernel::Jalpha(0.5).sample(&grid)?;
    let one = convolve(&half, &half, QuadratureRule::auto(&half, &half))?;
    let plain = convolve(&half.without_power(), &half.without_power(), QuadratureRule::Trapezoid)?;
    println!("j½ ∗ j½ at t=1: product integration {:.3e} off, plain trapezoid {:.3e} off",
        (one.value(i).re - 1.0).abs(),
        (plain.value(i).re - 1.0).abs());
    Ok(())
}
