//! Prolong `k ∗ cosh(a·)` from `[0, ν]` to `[0, (n+1)ν]` and compare with the
//! direct family `k^{∗(n+1)} ∗ cosh(a·)`.

use ccf::harness::propagator_oracle;
use ccf::{base_cosine, fractional_extend, DiagonalGenerator, ExtendOptions, Grid, Kernel, Result};

fn main() -> Result<()> {
    let generator: DiagonalGenerator = "1,2i".parse()?;
    let alpha = 0.5;
    let base = base_cosine(&generator, &Grid::new(1.0, 128)?);
    let run = fractional_extend(&base, alpha, 3, ExtendOptions::default())?;
    for (n, table) in run.tables.iter().enumerate() {
        let mut err: f64 = 0.0;
        for (mode, a) in generator.spectrum().iter().enumerate() {
            for i in 0..=table.grid().intervals() {
                let t = table.grid().node(i);
                let exact = propagator_oracle(&Kernel::Jalpha(alpha), n + 1, *a, t)?;
                err = err.max((table.entry(i, mode) - exact).norm());
            }
        }
        let seam = if n == 0 { 0.0 } else { run.seams[n - 1] };
        println!("[0, {}ν]: max error {err:.2e}, seam {seam:.1e}", n + 1);
    }
    Ok(())
}
