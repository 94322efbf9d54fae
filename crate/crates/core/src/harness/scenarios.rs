//! Blow-up scenarios evaluated from closed forms in log space.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagator::DiagonalGenerator;

use super::report::{Environment, Record, Report};

/// `ln|sinh w|`, stable for large `|Re w|`.
pub fn ln_abs_sinh(w: Complex64) -> f64 {
    let w = if w.re < 0.0 { -w } else { w };
    if w.re > 20.0 {
        w.re - LN_2 + (Complex64::new(1.0, 0.0) - (-2.0 * w).exp()).norm().ln()
    } else {
        w.sinh().norm().ln()
    }
}

/// `ln|sinh(a t)/a|`; `−∞` at `t = 0`.
pub fn ln_sine_entry(a: Complex64, t: f64) -> f64 {
    if t == 0.0 {
        return f64::NEG_INFINITY;
    }
    if a.norm() == 0.0 {
        return t.ln();
    }
    ln_abs_sinh(a * t) - a.norm().ln()
}

/// `ln|C₁(t) e_m|` for `m = 1..=modes` with `a_m = m/T + i((e^m/m)² − (m/T)²)^{1/2}`.
pub fn threshold_profile(t_end: f64, modes: usize, t: f64) -> Result<Vec<f64>> {
    let gen = DiagonalGenerator::threshold_sequence(t_end, modes)?;
    Ok(gen.spectrum().iter().map(|&a| ln_sine_entry(a, t)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    pub t: f64,
    pub mode: usize,
    pub log_magnitude: f64,
}

pub const MAX_THRESHOLD_MODES: usize = 40;
const MONOTONE_FROM: usize = 10;

fn check_times(times: &[f64]) -> Result<()> {
    match times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        Some(t) => Err(Error::Parameter(format!("times must be positive, got {t}"))),
        None if times.is_empty() => Err(Error::Parameter("no times given".into())),
        None => Ok(()),
    }
}

/// Log-magnitude profiles of the `α = 1` threshold example, with the sharp
/// threshold at `t = T`: eventually decreasing in `m` before it, increasing after.
pub fn run_l2_blowup(t_end: f64, modes: usize, times: &[f64]) -> Result<(Report, Vec<ProfileRow>)> {
    if modes > MAX_THRESHOLD_MODES {
        return Err(Error::Parameter(format!("at most {MAX_THRESHOLD_MODES} modes, got {modes}")));
    }
    if modes <= MONOTONE_FROM {
        return Err(Error::Parameter(format!("need more than {MONOTONE_FROM} modes to see the trend")));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Parameter(format!("T must be positive, got {t_end}")));
    }
    check_times(times)?;
    let env = Environment {
        grid: format!("modes=1..{modes}"),
        t_end,
        kernel: "jalpha:1".into(),
        generator: format!("l2:{t_end},{modes}"),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    let mut report = Report::new("l2-blowup", env);
    let mut rows = Vec::new();
    for &t in times {
        let profile = threshold_profile(t_end, modes, t)?;
        rows.extend(profile.iter().enumerate().map(|(i, &v)| ProfileRow { t, mode: i + 1, log_magnitude: v }));
        let tail = &profile[MONOTONE_FROM - 1..];
        let rising = tail.windows(2).filter(|w| w[1] > w[0]).count() as f64;
        let falling = tail.windows(2).filter(|w| w[1] < w[0]).count() as f64;
        let ratio = t / t_end;
        if ratio < 1.0 {
            report.push(Record::at_most(
                &format!("t={t}: rising steps for m >= {MONOTONE_FROM}"),
                "ln|sinh(a_m t)/a_m| ≈ ln(m/2) + m(t/T − 1) decreases for t < T",
                None,
                rising,
                0.0,
            ));
        } else if ratio > 1.0 {
            report.push(Record::at_most(
                &format!("t={t}: falling steps for m >= {MONOTONE_FROM}"),
                "ln|sinh(a_m t)/a_m| ≈ ln(m/2) + m(t/T − 1) increases for t > T",
                None,
                falling,
                0.0,
            ));
        }
        let m = modes as f64;
        let asymptote = (m / 2.0).ln() + m * (ratio - 1.0);
        report.push(Record::at_most(
            &format!("t={t}: |ln entry − asymptote| at m={modes}"),
            "ln|sinh(a_m t)/a_m| = ln(m/2) + m(t/T − 1) + O(e^{−2mt/T})",
            None,
            (profile[modes - 1] - asymptote).abs(),
            1e-9,
        ));
    }
    Ok((report, rows))
}

/// `ln|sinh(z t)/z|` for `z = x + i e^x`.
pub fn ln_multiplier(x: f64, t: f64) -> f64 {
    let z = Complex64::new(x, x.exp());
    ln_sine_entry(z, t)
}

pub const MAX_MULTIPLIER_X: f64 = 30.0;

/// Sup over `x ∈ [0, X]` of `ln|sinh(z t)/z|`, `z = x + i e^x`: at most 0
/// for `t ≤ 1`, and growing in `x` for `t > 1`.
pub fn run_mult_exp(x_max: f64, times: &[f64], samples: usize) -> Result<(Report, Vec<(f64, f64)>)> {
    if !(x_max > 0.0 && x_max <= MAX_MULTIPLIER_X) {
        return Err(Error::Parameter(format!("X must lie in (0, {MAX_MULTIPLIER_X}], got {x_max}")));
    }
    if samples < 2 {
        return Err(Error::Parameter("need at least 2 samples".into()));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.is_empty() {
        return Err(Error::Parameter(format!("times must be non-negative, got {times:?}")));
    }
    let env = Environment {
        grid: format!("x in [0,{x_max}], {samples} samples"),
        t_end: x_max,
        kernel: "jalpha:1".into(),
        generator: "x + i e^x".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    let mut report = Report::new("mult-exp", env);
    let mut sups = Vec::new();
    for &t in times {
        let sup = (0..samples)
            .map(|k| ln_multiplier(x_max * k as f64 / (samples - 1) as f64, t))
            .fold(f64::NEG_INFINITY, f64::max);
        sups.push((t, sup));
        if t <= 1.0 {
            report.push(Record::at_most(
                &format!("t={t}: sup ln|C(t)|"),
                "sup_{t∈[0,1]} ‖C₁(t)‖ ≤ 1",
                None,
                if sup.is_finite() { sup } else { f64::MIN },
                (1e-9f64).ln_1p(),
            ));
        } else {
            let (far, near) = (ln_multiplier(x_max, t), ln_multiplier(0.4 * x_max, t));
            report.push(Record::at_least(
                &format!("t={t}: ln|C(t)| at x={x_max} minus at x={}", 0.4 * x_max),
                "ln|sinh(zt)/z| ≈ x(t − 1) − ln 2 grows for t > 1",
                None,
                far - near,
                0.0,
            ));
        }
    }
    Ok((report, sups))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sinh_matches_direct() {
        for w in [Complex64::new(0.3, 2.0), Complex64::new(-5.0, 1.0), Complex64::new(25.0, 1e6)] {
            let direct = w.sinh().norm().ln();
            assert!((ln_abs_sinh(w) - direct).abs() < 1e-9 * direct.abs().max(1.0), "{w}");
        }
        assert!(ln_abs_sinh(Complex64::new(800.0, 0.0)).is_finite());
    }

    #[test]
    fn threshold_value_at_m30() {
        let p = threshold_profile(1.0, 30, 0.8).unwrap();
        assert!((p[29] - (15f64.ln() - 6.0)).abs() < 1e-9);
        let p = threshold_profile(1.0, 30, 1.0).unwrap();
        assert!((p[29] - 15f64.ln()).abs() < 1e-9);
        assert!(p[0].is_finite());
    }

    #[test]
    fn bad_arguments() {
        assert!(run_l2_blowup(1.0, 41, &[0.8]).is_err());
        assert!(run_l2_blowup(1.0, 30, &[0.0]).is_err());
        assert!(run_mult_exp(31.0, &[1.0], 10).is_err());
    }

    #[test]
    fn multiplier_vanishes_at_zero_time() {
        let (report, sups) = run_mult_exp(25.0, &[0.0], 100).unwrap();
        assert!(report.passed());
        assert_eq!(sups[0].1, f64::NEG_INFINITY);
    }
}
