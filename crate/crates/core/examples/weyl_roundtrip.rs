//! Weyl-type operators invert `T′_k` on bumps.

use ccf::{roundtrip_check, Grid, Kernel, Result, TestFunction, WeylOperator};

fn main() -> Result<()> {
    let f = TestFunction::new(0.3, 1.2, 8)?;
    println!("bump {f}");
    for k in [Kernel::Jalpha(0.5), Kernel::Jalpha(1.0), Kernel::Jalpha(1.5), Kernel::CharInterval] {
        let w = WeylOperator::new(k.clone())?;
        let errs: Vec<String> = [200, 400, 800]
            .iter()
            .map(|&m| Ok(format!("{:.2e}", roundtrip_check(&w, &f, &Grid::new(2.0, m)?)?)))
            .collect::<Result<_>>()?;
        println!("{:<12} ‖T′(W f) − f‖ at M = 200, 400, 800: {}", k.to_string(), errs.join(", "));
    }
    Ok(())
}
