//! Convoluted cosine families `k ∗ cosh(a·)` and their Duhamel defect.

use ccf::{base_cosine, convolve_family, duhamel_residuals, DiagonalGenerator, Grid, Kernel, Result};

fn main() -> Result<()> {
    let generator: DiagonalGenerator = "0,1,2i,1+1i".parse()?;
    for k in [Kernel::Jalpha(1.0), Kernel::Jalpha(0.5), Kernel::CharInterval] {
        print!("{:<12}", k.to_string());
        for m in [128, 256, 512] {
            let base = base_cosine(&generator, &Grid::new(2.0, m)?);
            let family = convolve_family(&base, &k)?;
            let worst = (0..generator.dimension())
                .map(|mode| duhamel_residuals(&family, mode).map(|r| r.into_iter().fold(0.0, f64::max)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            print!("  M={m}: {worst:.2e}");
        }
        println!();
    }
    Ok(())
}
