//! Independent oracles and frozen reference values for the integration tests.
#![allow(dead_code)]

use ccf::Complex64;
use statrs::function::gamma::gamma;

/// `(j_β ∗ cosh(a·))(t) = Σ_k a^{2k} t^{2k+β} / Γ(2k+β+1)`, summed by term ratio.
pub fn smoothed_cosh(beta: f64, a: Complex64, t: f64) -> Complex64 {
    let mut term = Complex64::new(t.powf(beta) / gamma(beta + 1.0), 0.0);
    let mut sum = term;
    let x = a * a * t * t;
    for k in 1..400 {
        let kf = k as f64;
        term *= x / ((2.0 * kf + beta - 1.0) * (2.0 * kf + beta));
        sum += term;
        if term.norm() <= 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    sum
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> Complex64, lo: f64, hi: f64, n: usize) -> Complex64 {
    let n = n + n % 2;
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += f(lo + i as f64 * h) * w;
    }
    s * (h / 3.0)
}

/// Least-squares slope of `ln e` against `ln h`.
pub fn slope(steps: &[f64], errors: &[f64]) -> f64 {
    let n = steps.len() as f64;
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Reference values computed once with 40-digit arithmetic and frozen.
pub mod frozen {
    pub const COSH_1: f64 = 1.5430806348152437;
    pub const SINH_1: f64 = 1.1752011936438014;
    /// `cosh(1.5) − 1`
    pub const RAMP_COSH_AT_1_5: f64 = 1.3524096152432472;
    /// `(j_3 ∗ cosh)(2) = sinh 2 − 2`
    pub const CUBIC_COSH_AT_2: f64 = 1.6268604078470186;
    /// `K_½(0.25) = 8e^{−1}/(2√π)`
    pub const HALF_STABLE_AT_QUARTER: f64 = 0.8302149948411894;
    pub const STABLE_0_3_AT_1: f64 = 0.11715700256591615;
    pub const STABLE_0_3_AT_HALF: f64 = 0.24064578302542872;
    pub const STABLE_0_7_AT_2: f64 = 0.10768834487433713;
    /// `(j_½ ∗ cosh(2i·))(1.5)`
    pub const HALF_COSH_2I_AT_1_5: f64 = -0.45497292014332932;
    /// `(j_1 ∗ cosh((1+i)·))(2)`
    pub const SINE_1PI_AT_2: (f64, f64) = (0.9558241878966989, 2.4651306732203144);
    /// `(χ_(0,1)∗χ_(0,1) ∗ cosh)(2.5)`
    pub const TENT_COSH_AT_2_5: f64 = 2.5550962143835723;
    /// `(χ_(0,1) ∗ cosh(2i·))(1.5)`
    pub const BOX_COSH_2I_AT_1_5: f64 = -0.35017548837401464;
    /// `ln|sinh(a_m t)/a_m|` for the threshold sequence with `T = 1`.
    pub const THRESHOLD_M30_T0_8: f64 = -3.2919497988977886;
    pub const THRESHOLD_M10_T1_2: f64 = 3.6094379124543977;
    pub const THRESHOLD_M30_T1_2: f64 = 8.7080502011022087;
    pub const THRESHOLD_M1_T0_8: f64 = -0.76546900126323744;
    /// `ln|sinh(z t)/z|`, `z = x + i e^x`.
    pub const MULT_X25_T1_2: f64 = 4.3068528194400536;
    pub const MULT_X10_T1_2: f64 = 1.3068527164200633;
    pub const MULT_X3_7_T1: f64 = -0.69774541064420381;
    pub const MULT_X0_5_T0_25: f64 = -1.4120783925435899;
}
