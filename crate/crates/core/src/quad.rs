//! Numerical primitives: gamma-weighted power kernels, product-integration
//! moments, double-exponential quadrature and FFT Toeplitz products.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rustfft::FftPlanner;

pub(crate) fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `t^(α−1)/Γ(α)` for `t > 0`; the limit at `t = 0` (infinite for `α < 1`).
pub fn j_alpha(alpha: f64, t: f64) -> f64 {
    if t > 0.0 {
        ((alpha - 1.0) * t.ln() - ln_gamma(alpha)).exp()
    } else if alpha < 1.0 {
        f64::INFINITY
    } else if alpha == 1.0 {
        1.0
    } else {
        0.0
    }
}

/// Product-integration weights for `j_α` against a piecewise-linear
/// interpolant. For a cell whose near node sits at distance `d` (in steps)
/// from the singular point, `near[d]` and `far[d]` are the weights of the
/// near and far node values.
#[derive(Clone, Debug)]
pub(crate) struct PowerMoments {
    pub near: Vec<f64>,
    pub far: Vec<f64>,
}

impl PowerMoments {
    pub fn new(alpha: f64, h: f64, cells: usize) -> Self {
        let scale = (alpha * h.ln() - ln_gamma(alpha)).exp();
        let (near, far) = (0..cells)
            .map(|d| {
                let (a, b) = unit_moments(alpha, d as f64);
                (a * scale, b * scale)
            })
            .unzip();
        PowerMoments { near, far }
    }
}

/// `∫₀¹ (d+x)^(α−1) (1−x) dx` and `∫₀¹ (d+x)^(α−1) x dx`.
fn unit_moments(alpha: f64, d: f64) -> (f64, f64) {
    let gamma = alpha - 1.0;
    if d < 8.0 {
        let m0 = ((d + 1.0).powf(alpha) - d.powf(alpha)) / alpha;
        let m1 = ((d + 1.0).powf(alpha + 1.0) - d.powf(alpha + 1.0)) / (alpha + 1.0) - d * m0;
        (m0 - m1, m1)
    } else {
        // (d+x)^γ = d^γ Σ C(γ,k) (x/d)^k, |x/d| ≤ 1/8.
        let (mut near, mut far) = (0.0, 0.0);
        let mut c = 1.0;
        let mut dk = 1.0;
        for k in 0..28 {
            let kf = k as f64;
            near += c * dk / ((kf + 1.0) * (kf + 2.0));
            far += c * dk / (kf + 2.0);
            c *= (gamma - kf) / (kf + 1.0);
            dk /= d;
        }
        let dg = d.powf(gamma);
        (near * dg, far * dg)
    }
}

/// Tanh-sinh quadrature on `[a, b]`. The integrand receives the point and its
/// distances to both endpoints, computed without cancellation so that
/// endpoint singularities can be evaluated accurately.
pub(crate) fn tanh_sinh<F>(f: F, a: f64, b: f64, rel_tol: f64) -> f64
where
    F: Fn(f64, f64, f64) -> f64,
{
    if b <= a {
        return 0.0;
    }
    let c = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.abs().sinh();
        let e = (-2.0 * u).exp();
        let w = FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if w == 0.0 {
            return 0.0;
        }
        let small = c * 2.0 * e / (1.0 + e);
        let large = c * 2.0 / (1.0 + e);
        let (dl, dr) = if t < 0.0 { (small, large) } else { (large, small) };
        if dl <= 0.0 || dr <= 0.0 {
            return 0.0;
        }
        let x = if dl < dr { a + dl } else { b - dr };
        let v = f(x, dl, dr) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    const T_MAX: f64 = 6.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = c * h * sum;
    for _level in 0..9 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = c * h * sum;
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= rel_tol * next.abs() || diff <= 1e-300 {
            break;
        }
    }
    estimate
}

/// Nodes and weights of the 8-point Gauss-Legendre rule on `[-1, 1]`.
pub(crate) const GAUSS_LEGENDRE_8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_48),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_48),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

pub(crate) fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (c, m) = (0.5 * (b - a), 0.5 * (a + b));
    GAUSS_LEGENDRE_8.iter().map(|&(x, w)| w * f(m + c * x)).sum::<f64>() * c
}

/// Full linear convolution of two sequences, by FFT for long inputs.
pub(crate) fn linear_convolution(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    if x.is_empty() || y.is_empty() {
        return Vec::new();
    }
    let len = x.len() + y.len() - 1;
    if x.len().min(y.len()) < 64 {
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (i, &a) in x.iter().enumerate() {
            for (j, &b) in y.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        return out;
    }
    let n = len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut a = x.to_vec();
    a.resize(n, Complex64::new(0.0, 0.0));
    let mut b = y.to_vec();
    b.resize(n, Complex64::new(0.0, 0.0));
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (p, q) in a.iter_mut().zip(&b) {
        *p *= q / n as f64;
    }
    inv.process(&mut a);
    a.truncate(len);
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_direct_integration() {
        for &alpha in &[0.3, 0.5, 0.75, 1.5] {
            let (near, far) = unit_moments(alpha, 0.0);
            assert!((near - 1.0 / (alpha * (alpha + 1.0))).abs() < 1e-14);
            assert!((far - 1.0 / (alpha + 1.0)).abs() < 1e-14);
            for &d in &[1.0, 7.0, 8.0, 30.0] {
                let (near, far) = unit_moments(alpha, d);
                let n = 200_000;
                let (mut a, mut b) = (0.0, 0.0);
                for k in 0..n {
                    let x = (k as f64 + 0.5) / n as f64;
                    let p = (d + x).powf(alpha - 1.0) / n as f64;
                    a += p * (1.0 - x);
                    b += p * x;
                }
                assert!((near - a).abs() < 1e-9, "alpha {alpha} d {d}: {near} vs {a}");
                assert!((far - b).abs() < 1e-9, "alpha {alpha} d {d}: {far} vs {b}");
            }
        }
    }

    #[test]
    fn moment_branches_join_smoothly() {
        for &alpha in &[0.2, 0.5, 0.9, 1.7] {
            let lo = unit_moments(alpha, 8.0 - 1e-12);
            let hi = unit_moments(alpha, 8.0);
            assert!((lo.0 - hi.0).abs() < 1e-12 && (lo.1 - hi.1).abs() < 1e-12);
        }
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let v = tanh_sinh(|_, dl, _| dl.powf(-0.5), 0.0, 1.0, 1e-14);
        assert!((v - 2.0).abs() < 1e-12, "{v}");
        let beta = tanh_sinh(|_, dl, dr| dl.powf(-0.5) * dr.powf(-0.5), 0.0, 1.0, 1e-14);
        assert!((beta - std::f64::consts::PI).abs() < 1e-11, "{beta}");
    }

    #[test]
    fn fft_convolution_matches_direct() {
        let x: Vec<Complex64> = (0..300).map(|i| Complex64::new((i as f64).sin(), 0.3)).collect();
        let y: Vec<Complex64> = (0..200).map(|i| Complex64::new(1.0 / (1.0 + i as f64), -0.1)).collect();
        let fast = linear_convolution(&x, &y);
        let mut slow = vec![Complex64::new(0.0, 0.0); 499];
        for i in 0..300 {
            for j in 0..200 {
                slow[i + j] += x[i] * y[j];
            }
        }
        let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn j_alpha_values() {
        assert!((j_alpha(1.0, 3.0) - 1.0).abs() < 1e-15);
        assert!((j_alpha(2.0, 3.0) - 3.0).abs() < 1e-14);
        assert!((j_alpha(0.5, 1.0) - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!(j_alpha(0.5, 0.0).is_infinite());
    }
}
