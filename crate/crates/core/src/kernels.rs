//! Analytic kernels: fractional integrals `j_α`, the indicator of `(0,1)`,
//! one-sided stable densities `K_δ`, Weierstrass-subordinated kernels and
//! sampled kernels read from disk.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::gridfn::{laplace_transform, GridFunction, PowerTerm};
use crate::quad::{gauss_legendre, j_alpha, ln_gamma, tanh_sinh};

/// Gaussian cut-off for subordination: `e^{−u²} < 1e−16` beyond `u = U_MAX`.
const U_MAX: f64 = 6.069_640_058_734_954;

#[derive(Clone, Debug)]
pub enum Kernel {
    /// `j_α(t) = t^{α−1}/Γ(α)`.
    Jalpha(f64),
    /// Indicator of `(0, 1)`.
    CharInterval,
    /// One-sided stable density with Laplace transform `e^{−λ^δ}`.
    Kdelta(f64),
    /// Weierstrass transform of the inner kernel.
    Subordinated(Box<Kernel>),
    Sampled(GridFunction),
}

impl Kernel {
    pub fn jalpha(alpha: f64) -> Result<Kernel> {
        let k = Kernel::Jalpha(alpha);
        k.validate()?;
        Ok(k)
    }

    pub fn kdelta(delta: f64) -> Result<Kernel> {
        let k = Kernel::Kdelta(delta);
        k.validate()?;
        Ok(k)
    }

    pub fn subordinated(base: Kernel) -> Kernel {
        Kernel::Subordinated(Box::new(base))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::Jalpha(a) if !(a.is_finite() && *a > 0.0) => {
                Err(Error::Parameter(format!("j_α needs α > 0, got {a}")))
            }
            Kernel::Kdelta(d) if !(*d > 0.0 && *d < 1.0) => {
                Err(Error::Parameter(format!("K_δ needs 0 < δ < 1, got {d}")))
            }
            Kernel::Subordinated(b) => b.validate(),
            _ => Ok(()),
        }
    }

    /// Behaviour `c·j_e(t)` as `t → 0⁺`, when it is a nonzero power.
    pub fn leading(&self) -> Option<(f64, Complex64)> {
        let one = Complex64::new(1.0, 0.0);
        match self {
            Kernel::Jalpha(a) => Some((*a, one)),
            Kernel::CharInterval => Some((1.0, one)),
            Kernel::Kdelta(_) => None,
            Kernel::Subordinated(b) => b.leading().map(|(e, c)| (e / 2.0, c)),
            Kernel::Sampled(g) => match g.power() {
                Some(p) => Some((p.exponent, p.scale)),
                None if g.value(0) != Complex64::new(0.0, 0.0) => Some((1.0, g.value(0))),
                None => None,
            },
        }
    }

    /// Exponent `α < 1` of an integrable singularity at the origin.
    pub fn singular_exponent(&self) -> Option<f64> {
        self.leading().map(|(e, _)| e).filter(|&e| e < 1.0)
    }

    /// Analytic `k^{∗n}` when the family is closed under convolution.
    pub fn analytic_power(&self, n: usize) -> Option<Kernel> {
        match self {
            Kernel::Jalpha(a) if n >= 1 => Some(Kernel::Jalpha(a * n as f64)),
            _ if n == 1 => Some(self.clone()),
            _ => None,
        }
    }

    /// Value at `t > 0` (right limit at jumps).
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        match self {
            Kernel::Sampled(g) => g
                .value_at(t)
                .ok_or_else(|| Error::Support(format!("sampled kernel not defined at t = {t}"))),
            Kernel::Subordinated(b) => subordinate_at(b, t),
            _ => Ok(Complex64::new(self.eval_real(t), 0.0)),
        }
    }

    fn eval_real(&self, t: f64) -> f64 {
        match self {
            Kernel::Jalpha(a) => j_alpha(*a, t),
            Kernel::CharInterval => {
                if (0.0..1.0).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel::Kdelta(d) => stable_density(*d, t),
            Kernel::Subordinated(b) => subordinate_at(b, t).map(|v| v.re).unwrap_or(f64::NAN),
            Kernel::Sampled(g) => g.value_at(t).map(|v| v.re).unwrap_or(f64::NAN),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Kernel::CharInterval => vec![1.0],
            _ => Vec::new(),
        }
    }

    /// Samples on `grid`. Singular kernels store the remainder limit at `t = 0`
    /// and carry a power annotation.
    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        self.validate()?;
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Kernel::Jalpha(a) => {
                let f = GridFunction::from_real_fn(*grid, |t| if t > 0.0 { j_alpha(*a, t) } else { 0.0 });
                f.with_power(PowerTerm::new(*a, Complex64::new(1.0, 0.0)))
            }
            Kernel::CharInterval => {
                let h = grid.step();
                let m = grid.intervals();
                match grid.index_of(1.0) {
                    Some(i1) => {
                        let f = GridFunction::from_real_fn(*grid, |t| if t < 1.0 - 0.5 * h { 1.0 } else { 0.0 });
                        f.with_jump(i1, Complex64::new(1.0, 0.0))?.with_support(0, i1)
                    }
                    None if grid.t_end() < 1.0 => Ok(GridFunction::from_real_fn(*grid, |_| 1.0)),
                    None => {
                        let last = ((1.0 / h).floor() as usize).min(m);
                        let f = GridFunction::from_real_fn(*grid, |t| if t < 1.0 { 1.0 } else { 0.0 });
                        f.with_support(0, (last + 1).min(m))
                    }
                }
            }
            Kernel::Kdelta(d) => {
                let values: Vec<Complex64> = (0..grid.len())
                    .into_par_iter()
                    .map(|i| Complex64::new(stable_density(*d, grid.node(i)), 0.0))
                    .collect();
                GridFunction::from_values(*grid, values)
            }
            Kernel::Subordinated(b) => subordinate(b, grid),
            Kernel::Sampled(g) => {
                if g.grid().same_as(grid) {
                    Ok(g.clone())
                } else if g.grid().same_step(grid) {
                    g.zero_padded(grid.intervals())
                } else {
                    let end = g.grid().t_end();
                    let vanishes = g.support().is_some_and(|(_, hi)| hi < g.grid().intervals());
                    let values = grid
                        .nodes()
                        .map(|t| match g.value_at(t) {
                            Some(v) => Ok(v),
                            None if vanishes && t > end => Ok(zero),
                            None => Err(Error::Support(format!(
                                "sampled kernel ends at {end}, needed at {t}"
                            ))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let mut f = GridFunction::from_values(*grid, values)?;
                    if let Some(p) = g.power() {
                        f = f.with_power(p)?;
                    }
                    Ok(f)
                }
            }
        }
    }

    /// Laplace transform `∫₀^∞ e^{−λt} k(t) dt`.
    pub fn laplace(&self, lambda: Complex64) -> Result<Complex64> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::Parameter(format!("non-finite Laplace argument {lambda}")));
        }
        match self {
            Kernel::Jalpha(a) => {
                if lambda.re <= 0.0 && a.fract() != 0.0 {
                    return Err(Error::Parameter(format!("λ^(−{a}) needs Re λ > 0, got {lambda}")));
                }
                if lambda.norm() == 0.0 {
                    return Err(Error::Parameter("λ = 0 is a pole".into()));
                }
                Ok((-*a * lambda.ln()).exp())
            }
            Kernel::CharInterval => {
                if lambda.norm() < 1e-4 {
                    Ok(1.0 - lambda / 2.0 + lambda * lambda / 6.0 - lambda * lambda * lambda / 24.0)
                } else {
                    Ok((1.0 - (-lambda).exp()) / lambda)
                }
            }
            Kernel::Kdelta(d) => {
                if lambda.re < 0.0 {
                    return Err(Error::Parameter(format!("K̂_δ needs Re λ ≥ 0, got {lambda}")));
                }
                Ok((-lambda.powf(*d)).exp())
            }
            Kernel::Subordinated(b) => b.laplace(lambda.sqrt()),
            Kernel::Sampled(g) => laplace_transform(g, lambda),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Jalpha(a) => write!(f, "jalpha:{a}"),
            Kernel::CharInterval => write!(f, "chi01"),
            Kernel::Kdelta(d) => write!(f, "kdelta:{d}"),
            Kernel::Subordinated(b) => write!(f, "subord:{b}"),
            Kernel::Sampled(g) => write!(f, "sampled[T={},M={}]", g.grid().t_end(), g.grid().intervals()),
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    /// `jalpha:<α>`, `chi01`, `kdelta:<δ>`, `subord:<spec>` or `file:<path.csv>`.
    fn from_str(spec: &str) -> Result<Kernel> {
        let spec = spec.trim();
        let num = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse(format!("kernel parameter {s:?}: {e}")))
        };
        let k = if let Some(rest) = spec.strip_prefix("jalpha:") {
            Kernel::Jalpha(num(rest)?)
        } else if spec == "chi01" {
            Kernel::CharInterval
        } else if let Some(rest) = spec.strip_prefix("kdelta:") {
            Kernel::Kdelta(num(rest)?)
        } else if let Some(rest) = spec.strip_prefix("subord:") {
            Kernel::Subordinated(Box::new(rest.parse()?))
        } else if let Some(rest) = spec.strip_prefix("file:") {
            Kernel::Sampled(GridFunction::read_csv(Path::new(rest))?)
        } else {
            return Err(Error::Parse(format!("unknown kernel spec {spec:?}")));
        };
        k.validate()?;
        Ok(k)
    }
}

/// Density of the one-sided stable law with `∫ e^{−λt} K_δ(t) dt = e^{−λ^δ}`.
///
/// The alternating series in `t^{−kδ−1}` is used while its largest term stays
/// within a factor 100 of the sum; closer to the origin, where that series cancels
/// catastrophically, the density comes from Zolotarev's integral
/// representation over `φ ∈ (0, π)`.
pub fn stable_density(delta: f64, t: f64) -> f64 {
    if !(t > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return 0.0;
    }
    match stable_series(delta, t) {
        Some(v) => v,
        None => stable_zolotarev(delta, t),
    }
}

fn stable_series(delta: f64, t: f64) -> Option<f64> {
    let ln_x = -delta * t.ln();
    let mut sum = 0.0;
    let mut max_term: f64 = 0.0;
    let mut prev_bound = f64::INFINITY;
    for k in 1..2000 {
        let kf = k as f64;
        let ln_bound = ln_gamma(kf * delta + 1.0) - ln_gamma(kf + 1.0) + kf * ln_x;
        let bound = ln_bound.exp();
        if !bound.is_finite() {
            return None;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * bound * (PI * kf * delta).sin();
        sum += term;
        max_term = max_term.max(bound);
        if bound < prev_bound && bound <= 1e-17 * sum.abs() {
            if max_term > 1e2 * sum.abs() {
                return None;
            }
            return Some(sum / (PI * t));
        }
        prev_bound = bound;
    }
    None
}

fn stable_zolotarev(delta: f64, t: f64) -> f64 {
    let q = 1.0 - delta;
    let p = delta / q;
    let x = t.powf(-p);
    let ratio = |c: f64, phi: f64, sin_phi: f64| {
        if phi < 1e-7 {
            c * (1.0 - (c * c - 1.0) * phi * phi / 6.0)
        } else {
            (c * phi).sin() / sin_phi
        }
    };
    let integrand = |phi: f64, _dl: f64, dr: f64| {
        let sin_phi = if phi < 1.5 { phi.sin() } else { dr.sin() };
        let a = ratio(delta, phi, sin_phi).powf(p) * ratio(q, phi, sin_phi);
        if !(a > 0.0) {
            return 0.0;
        }
        (a.ln() - x * a).exp()
    };
    // The integrand peaks at φ = 0 with value A(0)·e^{−x·A(0)}; below the
    // underflow threshold the density is zero to double precision.
    let a0 = delta.powf(p) * q;
    if x * a0 > 745.0 {
        return 0.0;
    }
    let integral = tanh_sinh(integrand, 0.0, PI, 1e-14);
    p / PI * t.powf(-1.0 / q) * integral
}

/// `k̃(t) = ∫₀^∞ s e^{−s²/4t} k(s) ds / (2√π t^{3/2})` at a single `t > 0`,
/// written as `(2/√(πt)) ∫₀^{u*} u e^{−u²} k(2√t u) du`.
pub fn subordinate_at(base: &Kernel, t: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::Parameter(format!("subordination needs t > 0, got {t}")));
    }
    let rt = t.sqrt();
    let pref = 2.0 / (PI * t).sqrt();
    if let Kernel::Sampled(g) = base {
        let s_max = 2.0 * rt * U_MAX;
        let grid = g.grid();
        let vanishes = g.support().is_some_and(|(_, hi)| hi < grid.intervals());
        if s_max > grid.t_end() && !vanishes {
            return Err(Error::Support(format!(
                "subordination at t = {t} needs the kernel up to {s_max}, sampled to {}",
                grid.t_end()
            )));
        }
        let h = grid.step();
        let end = (s_max.min(grid.t_end()) / h).ceil() as usize;
        let gauss = |s: f64| s * (-s * s / (4.0 * t)).exp() / (2.0 * PI.sqrt() * t * rt);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..end.min(grid.intervals()) {
            let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
            let re = gauss_legendre(|s| gauss(s) * g.value_at(s).map_or(0.0, |v| v.re), a, b);
            let im = gauss_legendre(|s| gauss(s) * g.value_at(s).map_or(0.0, |v| v.im), a, b);
            acc += Complex64::new(re, im);
        }
        return Ok(acc);
    }
    let mut cuts: Vec<f64> = base
        .breakpoints()
        .into_iter()
        .map(|s| s / (2.0 * rt))
        .filter(|&u| u > 0.0 && u < U_MAX)
        .collect();
    cuts.insert(0, 0.0);
    cuts.push(U_MAX);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let f = |u: f64, dl: f64, _dr: f64| {
            let u = if a == 0.0 { dl } else { u };
            u * (-u * u).exp() * base.eval_real(2.0 * rt * u)
        };
        total += tanh_sinh(f, a, b, 1e-14);
    }
    Ok(Complex64::new(pref * total, 0.0))
}

/// Samples of the subordinated kernel on `grid`, annotated with the power
/// behaviour inherited from the base kernel.
pub fn subordinate(base: &Kernel, grid: &Grid) -> Result<GridFunction> {
    base.validate()?;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| if i == 0 { Ok(Complex64::new(0.0, 0.0)) } else { subordinate_at(base, grid.node(i)) })
        .collect::<Result<Vec<_>>>()?;
    let f = GridFunction::from_values(*grid, values)?;
    match base.leading() {
        Some((e, c)) => f.with_power(PowerTerm::new(e / 2.0, c)),
        None => Ok(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_half(t: f64) -> f64 {
        t.powf(-1.5) * (-1.0 / (4.0 * t)).exp() / (2.0 * PI.sqrt())
    }

    #[test]
    fn half_stable_density_matches_closed_form() {
        assert!((stable_density(0.5, 0.25) - 0.830_214_994_841_189_5).abs() < 1e-13);
        for k in 0..=200 {
            let t = 0.01 + k as f64 * 0.05;
            let v = stable_density(0.5, t);
            let e = closed_half(t);
            assert!(((v - e) / e).abs() < 1e-11, "t = {t}: {v} vs {e}");
        }
    }

    #[test]
    fn both_density_branches_agree() {
        for &d in &[0.3, 0.5, 0.7] {
            for &t in &[0.3, 0.6, 1.0, 2.0] {
                if let Some(s) = stable_series(d, t) {
                    let z = stable_zolotarev(d, t);
                    assert!(((s - z) / z).abs() < 1e-10, "δ = {d}, t = {t}: {s} vs {z}");
                }
            }
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for spec in ["jalpha:0.5", "chi01", "kdelta:0.3", "subord:chi01", "subord:subord:jalpha:2"] {
            let k: Kernel = spec.parse().unwrap();
            assert_eq!(k.to_string(), spec);
        }
        assert!("jalpha:-1".parse::<Kernel>().is_err());
        assert!("kdelta:1".parse::<Kernel>().is_err());
        assert!("gauss".parse::<Kernel>().is_err());
    }

    #[test]
    fn closed_form_transforms() {
        let one = Complex64::new(1.0, 0.0);
        assert!((Kernel::Kdelta(0.4).laplace(one).unwrap() - (-1.0f64).exp()).norm() < 1e-15);
        assert!((Kernel::Jalpha(2.0).laplace(2.0 * one).unwrap() - 0.25).norm() < 1e-15);
        assert!((Kernel::CharInterval.laplace(1e-9 * one).unwrap() - 1.0).norm() < 1e-8);
        assert!(Kernel::Jalpha(0.5).laplace(Complex64::new(-1.0, 0.0)).is_err());
    }

    #[test]
    fn sampled_integer_powers() {
        let g = Grid::new(2.0, 20).unwrap();
        let chi = Kernel::Jalpha(1.0).sample(&g).unwrap();
        assert!(chi.values().iter().all(|v| (v - 1.0).norm() < 1e-15));
        let lin = Kernel::Jalpha(2.0).sample(&g).unwrap();
        assert!((lin.value(10) - 1.0).norm() < 1e-14);
        let half = Kernel::Jalpha(0.5).sample(&g).unwrap();
        assert_eq!(half.value(0), Complex64::new(0.0, 0.0));
        assert_eq!(half.power().unwrap().exponent, 0.5);
    }

    #[test]
    fn subordinated_constant_is_half_integral() {
        let g = Grid::new(2.0, 40).unwrap();
        let s = subordinate(&Kernel::Jalpha(1.0), &g).unwrap();
        for i in 1..=40 {
            let e = j_alpha(0.5, g.node(i));
            assert!(((s.value(i).re - e) / e).abs() < 1e-12, "{i}");
        }
        let s = subordinate(&Kernel::CharInterval, &g).unwrap();
        for i in 1..=40 {
            let t = g.node(i);
            let e = (1.0 - (-1.0 / (4.0 * t)).exp()) / (PI * t).sqrt();
            assert!((s.value(i).re - e).abs() < 1e-12, "{i}");
        }
    }
}
