//! The analytic kernels: values, Laplace transforms and subordination.

use ccf::{laplace_transform, stable_density, subordinate, Complex64, Grid, Kernel, Result};

fn main() -> Result<()> {
    for k in ["jalpha:0.5", "jalpha:2", "chi01", "kdelta:0.5"] {
        let k: Kernel = k.parse()?;
        println!("{:<12} k(1) = {:.8}  k̂(2) = {:.8}", k.to_string(), k.eval(1.0)?.re, k.laplace(Complex64::new(2.0, 0.0))?.re);
    }

    // K_½(t) = e^{-1/4t} / (2√π t^{3/2})
    let t: f64 = 0.25;
    let closed = (-1.0 / (4.0 * t)).exp() / (2.0 * std::f64::consts::PI.sqrt() * t.powf(1.5));
    println!("K_½(0.25) series/integral {:.12}  closed form {:.12}", stable_density(0.5, t), closed);

    // transform of a sampled density against e^{-λ^δ}
    let grid = Grid::new(40.0, 16000)?;
    for delta in [0.3, 0.5, 0.7] {
        let s = Kernel::kdelta(delta)?.sample(&grid)?;
        let lam = Complex64::new(1.0, 1.0);
        let err = (laplace_transform(&s, lam)? - (-lam.powf(delta)).exp()).norm();
        println!("δ = {delta}: |K̂_δ(1+i) − e^(−(1+i)^δ)| = {err:.2e}");
    }

    // subordinating the constant kernel gives j_½
    let g = Grid::new(2.0, 8)?;
    let sub = subordinate(&Kernel::Jalpha(1.0), &g)?;
    for i in [2, 4, 8] {
        println!("t = {:.2}: subordinated {:.12}  j_½ {:.12}", g.node(i), sub.value(i).re, ccf::j_alpha(0.5, g.node(i)));
    }
    Ok(())
}
