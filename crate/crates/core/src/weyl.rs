//! Co-convolution `T′_k f = k∘f`, its Weyl-type right inverse `W_k` for the
//! kernels where one is known in closed form, and polynomial bump test
//! functions with exact derivatives.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::gridfn::{convolve, derivative, dual_convolve, GridFunction, QuadratureRule};
use crate::kernels::Kernel;

/// `c·(t−a)^p (b−t)^p` on `[a, b]`, zero elsewhere, restricted to `t ≥ 0`.
///
/// `c` makes the full bump on `[a, b]` integrate to one. With `a < 0` the
/// restriction does not vanish at the origin, which is how boundary terms in
/// the product rules get exercised.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunction {
    a: f64,
    b: f64,
    p: u32,
    c: f64,
}

impl TestFunction {
    pub fn new(a: f64, b: f64, p: u32) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b && b > 0.0) {
            return Err(Error::Parameter(format!("bump needs a < b and b > 0, got [{a}, {b}]")));
        }
        if p < 4 {
            return Err(Error::Parameter(format!("bump degree must be at least 4, got {p}")));
        }
        // ∫(t−a)^p(b−t)^p = (b−a)^{2p+1} (p!)² / (2p+1)!
        let pf = p as f64;
        let ln_mass = (2.0 * pf + 1.0) * (b - a).ln() + 2.0 * crate::quad::ln_gamma(pf + 1.0)
            - crate::quad::ln_gamma(2.0 * pf + 2.0);
        Ok(TestFunction { a, b, p, c: (-ln_mass).exp() })
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.c *= s;
        self
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.b
    }

    pub fn degree(&self) -> u32 {
        self.p
    }

    /// Exact `f^{(n)}(t)`; the bump is `C^{p−1}`.
    pub fn derivative_at(&self, n: u32, t: f64) -> f64 {
        if !(t > self.a && t < self.b) {
            return 0.0;
        }
        let p = self.p;
        let falling = |k: u32| -> f64 { ((p - k + 1)..=p).map(|x| x as f64).product() };
        let mut sum = 0.0;
        let mut binom = 1.0;
        for k in 0..=n {
            let m = n - k;
            if k <= p && m <= p {
                let left = falling(k) * (t - self.a).powi((p - k) as i32);
                let right = falling(m) * (self.b - t).powi((p - m) as i32);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sum += binom * left * sign * right;
            }
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        self.c * sum
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.derivative_at(0, t)
    }

    /// Node range outside which all samples vanish.
    pub fn support_nodes(&self, grid: &Grid) -> Result<(usize, usize)> {
        if self.b > grid.t_end() * (1.0 + 1e-12) {
            return Err(Error::Support(format!(
                "bump ends at {} beyond the grid end {}",
                self.b,
                grid.t_end()
            )));
        }
        let h = grid.step();
        let lo = (self.a.max(0.0) / h).floor() as usize;
        let hi = ((self.b / h).ceil() as usize).min(grid.intervals());
        Ok((lo, hi))
    }

    pub fn sample(&self, grid: &Grid, order: u32) -> Result<GridFunction> {
        let (lo, hi) = self.support_nodes(grid)?;
        GridFunction::from_real_fn(*grid, |t| self.derivative_at(order, t)).with_support(lo, hi)
    }

    /// Samples of `f, f′, …, f^{(order)}`.
    pub fn jet(&self, grid: &Grid, order: u32) -> Result<Jet> {
        if order >= self.p {
            return Err(Error::Parameter(format!(
                "derivative {order} of a degree-{} bump is not continuous",
                self.p
            )));
        }
        let derivs = (0..=order).map(|k| self.sample(grid, k)).collect::<Result<Vec<_>>>()?;
        Ok(Jet { derivs })
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bump:{},{},{}", self.a, self.b, self.p)
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    /// `bump:<a>,<b>,<p>` or `<a>,<b>,<p>`.
    fn from_str(spec: &str) -> Result<Self> {
        let body = spec.trim().strip_prefix("bump:").unwrap_or(spec.trim());
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("bump spec {spec:?} needs a,b,p")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
        let p = parts[2].parse::<u32>().map_err(|e| Error::Parse(format!("{:?}: {e}", parts[2])))?;
        TestFunction::new(num(parts[0])?, num(parts[1])?, p)
    }
}

/// A function together with the samples of its first derivatives.
#[derive(Clone, Debug)]
pub struct Jet {
    derivs: Vec<GridFunction>,
}

impl Jet {
    pub fn new(derivs: Vec<GridFunction>) -> Result<Self> {
        let first = derivs.first().ok_or_else(|| Error::Usage("empty jet".into()))?;
        for d in &derivs[1..] {
            first.grid().check_same(d.grid(), "jet")?;
        }
        Ok(Jet { derivs })
    }

    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn grid(&self) -> &Grid {
        self.derivs[0].grid()
    }

    pub fn function(&self) -> &GridFunction {
        &self.derivs[0]
    }

    pub fn derivative(&self, k: usize) -> Result<&GridFunction> {
        self.derivs
            .get(k)
            .ok_or_else(|| Error::Usage(format!("jet of order {} has no derivative {k}", self.order())))
    }

    /// The jet of `f^{(k)}`.
    pub fn shifted(&self, k: usize) -> Result<Jet> {
        if k > self.order() {
            return Err(Error::Usage(format!("cannot shift a jet of order {} by {k}", self.order())));
        }
        Ok(Jet { derivs: self.derivs[k..].to_vec() })
    }

    pub fn add_scaled(&self, other: &Jet, c: Complex64) -> Result<Jet> {
        let n = self.derivs.len().min(other.derivs.len());
        let derivs = (0..n)
            .map(|k| self.derivs[k].add_scaled(&other.derivs[k], c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Jet { derivs })
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        Jet { derivs: self.derivs.iter().map(|d| d.scale(c)).collect() }
    }

    /// Jet of `φ ∗_c ψ`, using `(φ∗ψ)^{(m)} = φ^{(m)}∗ψ + Σ_{j<m} φ^{(j)}(0) ψ^{(m−1−j)}`
    /// and `(φ∘ψ)^{(m)} = φ∘ψ^{(m)}`.
    pub fn cosine_convolve(phi: &Jet, psi: &Jet) -> Result<Jet> {
        let order = phi.order().min(psi.order());
        let half = Complex64::new(0.5, 0.0);
        let mut derivs = Vec::with_capacity(order + 1);
        for m in 0..=order {
            let (pm, qm) = (&phi.derivs[m], &psi.derivs[m]);
            let mut star = convolve(pm, &psi.derivs[0], QuadratureRule::auto(pm, &psi.derivs[0]))?;
            for j in 0..m {
                star = star.add_scaled(&psi.derivs[m - 1 - j], phi.derivs[j].value(0))?;
            }
            let fg = dual_convolve(&phi.derivs[0], qm)?;
            let gf = dual_convolve(&psi.derivs[0], pm)?;
            derivs.push(star.add(&fg)?.add(&gf)?.scale(half));
        }
        Ok(Jet { derivs })
    }
}

/// `T′_k f = k∘f`.
pub fn t_prime(k: &Kernel, f: &GridFunction) -> Result<GridFunction> {
    dual_convolve(&k.sample(f.grid())?, f)
}

/// Right inverse of `T′_k` for `k = j_α` or `k = χ_(0,1)`.
#[derive(Clone, Debug)]
pub struct WeylOperator {
    kernel: Kernel,
}

impl WeylOperator {
    pub fn new(kernel: Kernel) -> Result<Self> {
        kernel.validate()?;
        match kernel {
            Kernel::Jalpha(_) | Kernel::CharInterval => Ok(WeylOperator { kernel }),
            other => Err(Error::UnsupportedKernel(format!("no closed-form inverse for {other}"))),
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Number of derivatives the operator consumes.
    pub fn order(&self) -> usize {
        match self.kernel {
            Kernel::Jalpha(a) => a.ceil() as usize,
            _ => 1,
        }
    }

    /// `W_k f` from exact derivative samples.
    pub fn apply_jet(&self, jet: &Jet) -> Result<GridFunction> {
        let m = self.order();
        let dm = jet.derivative(m)?;
        let sign = Complex64::new(if m % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        let end = jet.function().support_end();
        match self.kernel {
            Kernel::Jalpha(a) if (m as f64 - a).abs() < 1e-12 => Ok(dm.scale(sign)),
            Kernel::Jalpha(a) => {
                let co = Kernel::Jalpha(m as f64 - a).sample(jet.grid())?;
                Ok(dual_convolve(&co, dm)?.scale(sign).restricted(0, end))
            }
            _ => shifted_sum(dm, jet.grid()).map(|g| g.restricted(0, end)),
        }
    }

    pub fn apply_test(&self, f: &TestFunction, grid: &Grid) -> Result<GridFunction> {
        self.apply_jet(&f.jet(grid, self.order() as u32)?)
    }

    /// `W_k f` from samples only, with finite-difference derivatives.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let m = self.order();
        let sign = Complex64::new(if m % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        let end = f.support_end();
        let differentiate = |mut g: GridFunction, n: usize| -> Result<GridFunction> {
            let mut left = n;
            while left > 0 {
                let step = left.min(2);
                g = derivative(&g, step as u8)?;
                left -= step;
            }
            Ok(g)
        };
        let out = match self.kernel {
            Kernel::Jalpha(a) if (m as f64 - a).abs() < 1e-12 => differentiate(f.clone(), m)?.scale(sign),
            Kernel::Jalpha(a) => {
                let co = Kernel::Jalpha(m as f64 - a).sample(f.grid())?;
                differentiate(dual_convolve(&co, f)?.without_power(), m)?.scale(sign)
            }
            _ => shifted_sum(&derivative(f, 1)?, f.grid())?,
        };
        Ok(out.restricted(0, end))
    }
}

/// `−Σ_{n≥0} g(t + n)` on the grid; exact once `t + n` leaves the grid.
fn shifted_sum(g: &GridFunction, grid: &Grid) -> Result<GridFunction> {
    let s = grid
        .steps_in(1.0)
        .filter(|&s| s > 0)
        .ok_or_else(|| Error::Usage("the χ_(0,1) inverse needs 1 to be a grid multiple".into()))?;
    let m = grid.intervals();
    let values = (0..=m)
        .map(|i| -(i..=m).step_by(s).map(|j| g.value(j)).sum::<Complex64>())
        .collect();
    GridFunction::from_values(*grid, values)
}

/// `‖T′_k(W_k f) − f‖_∞` for a bump.
pub fn roundtrip_check(w: &WeylOperator, f: &TestFunction, grid: &Grid) -> Result<f64> {
    let wf = w.apply_test(f, grid)?;
    let back = t_prime(w.kernel(), &wf)?;
    Ok(back.max_abs_diff(&f.sample(grid, 0)?))
}
