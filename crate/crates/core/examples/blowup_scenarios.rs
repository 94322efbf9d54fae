//! Closed-form growth thresholds, evaluated in log space.

use ccf::harness::{run_l2_blowup, run_mult_exp, threshold_profile};
use ccf::Result;

fn main() -> Result<()> {
    for t in [0.8, 1.0, 1.2] {
        let p = threshold_profile(1.0, 30, t)?;
        println!("t = {t}: ln|entry| at m = 10, 20, 30: {:.3} {:.3} {:.3}", p[9], p[19], p[29]);
    }
    let (report, _) = run_l2_blowup(1.0, 30, &[0.8, 1.2])?;
    println!("{report}");

    let (report, sups) = run_mult_exp(25.0, &[0.25, 0.5, 1.0, 1.2], 25001)?;
    for (t, s) in sups {
        println!("t = {t}: sup ln|multiplier| = {s:.4}");
    }
    println!("{report}");
    Ok(())
}
