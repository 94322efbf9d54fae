//! The map `f ↦ ∫ W f · C` from bumps to diagonal operators is multiplicative.

use ccf::{CalculusContext, Complex64, DiagonalGenerator, Kernel, Result, TestFunction};

fn main() -> Result<()> {
    let generator: DiagonalGenerator = "0,1,2i".parse()?;
    let phi = TestFunction::new(0.2, 0.8, 8)?;
    let psi = TestFunction::new(0.5, 1.5, 8)?;
    for steps in [32, 64, 128] {
        let ctx = CalculusContext::new(&Kernel::Jalpha(1.0), &generator, 1.0, steps, 4)?;
        println!(
            "{steps:>4} cells/τ: multiplicativity {:.2e}  generator {:.2e}  linearity {:.1e}",
            ctx.multiplicativity_residual(&phi, &psi)?,
            ctx.generator_residual(&phi)?,
            ctx.linearity_residual(&phi, &psi, Complex64::new(2.0, 0.0), Complex64::new(0.0, -1.0))?,
        );
    }
    let ctx = CalculusContext::new(&Kernel::Jalpha(1.0), &generator, 1.0, 64, 4)?;
    for (m, v) in ctx.calculus_apply(&phi)?.iter().enumerate() {
        println!("mode {m}: {v:.6}");
    }
    Ok(())
}
