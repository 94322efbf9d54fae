//! Functional calculus `𝒞_k(f) = ∫₀^{nτ} W_{k^{∗n}} f(t) C_{k^{∗n}}(t) dt` for
//! `k = j_α`, built on the extended families `C_{j_{nα}}` on `[0, nτ]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extend::{fractional_extend, ExtendOptions};
use crate::grid::Grid;
use crate::gridfn::{integrate_product, Anchored};
use crate::kernels::Kernel;
use crate::propagator::{base_cosine, DiagonalGenerator, PropagatorTable};
use crate::weyl::{Jet, TestFunction, WeylOperator};

/// Cached families `C_{j_{nα}}` on `[0, nτ]` for `n = 1..=n_max`.
#[derive(Clone, Debug)]
pub struct CalculusContext {
    alpha: f64,
    generator: DiagonalGenerator,
    tau: f64,
    steps: usize,
    tables: Vec<PropagatorTable>,
}

impl CalculusContext {
    /// `steps` cells per `τ`; the local family on `[0, τ]` is extended `n_max − 1` times.
    pub fn new(kernel: &Kernel, generator: &DiagonalGenerator, tau: f64, steps: usize, n_max: usize) -> Result<Self> {
        let alpha = match kernel {
            Kernel::Jalpha(a) => *a,
            other => {
                return Err(Error::UnsupportedKernel(format!(
                    "the calculus needs closed-form inverses for every power; {other} has none"
                )))
            }
        };
        kernel.validate()?;
        if n_max == 0 {
            return Err(Error::Parameter("n_max must be at least 1".into()));
        }
        let base = base_cosine(generator, &Grid::new(tau, steps)?);
        if base.is_log_scale() {
            return Err(Error::LogScale("calculus tables need linear entries".into()));
        }
        let run = fractional_extend(&base, alpha, n_max - 1, ExtendOptions::default())?;
        Ok(CalculusContext { alpha, generator: generator.clone(), tau, steps, tables: run.tables })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn generator(&self) -> &DiagonalGenerator {
        &self.generator
    }

    pub fn n_max(&self) -> usize {
        self.tables.len()
    }

    /// `C_{j_{nα}}` on `[0, nτ]`.
    pub fn table(&self, n: usize) -> Result<&PropagatorTable> {
        n.checked_sub(1)
            .and_then(|k| self.tables.get(k))
            .ok_or_else(|| Error::Support(format!("power {n} outside 1..={}", self.n_max())))
    }

    /// Grid of `[0, nτ]` at the context's resolution.
    pub fn grid_for(&self, n: usize) -> Result<Grid> {
        Ok(*self.table(n)?.grid())
    }

    /// Smallest `n` with `end ≤ nτ`.
    pub fn smallest_power(&self, end: f64) -> Result<usize> {
        let n = ((end / self.tau) - 1e-9).ceil().max(1.0) as usize;
        if n > self.n_max() {
            return Err(Error::Support(format!(
                "support end {end} needs n = {n}, tables only reach n = {}",
                self.n_max()
            )));
        }
        Ok(n)
    }

    fn jet_order(&self, n: usize) -> u32 {
        (n as f64 * self.alpha - 1e-12).ceil() as u32
    }

    /// `𝒞(f)` per mode, with the smallest admissible power.
    pub fn calculus_apply(&self, f: &TestFunction) -> Result<Vec<Complex64>> {
        self.apply_with_power(f, self.smallest_power(f.end())?)
    }

    pub fn apply_with_power(&self, f: &TestFunction, n: usize) -> Result<Vec<Complex64>> {
        let grid = self.grid_for(n)?;
        self.apply_jet(&f.jet(&grid, self.jet_order(n))?, n)
    }

    /// `𝒞(f)` from a jet on `[0, nτ]` carrying at least `⌈nα⌉` derivatives.
    pub fn apply_jet(&self, jet: &Jet, n: usize) -> Result<Vec<Complex64>> {
        let table = self.table(n)?;
        jet.grid().check_same(table.grid(), "calculus jet")?;
        let w = WeylOperator::new(Kernel::Jalpha(n as f64 * self.alpha))?;
        let wf = w.apply_jet(jet)?;
        let end = table.grid().intervals();
        table
            .columns()?
            .iter()
            .map(|col| integrate_product(Anchored::new(&wf, 0), Anchored::new(col, 0), 0, end))
            .collect()
    }

    /// `max_m |𝒞(φ∗_cψ)_m − 𝒞(φ)_m 𝒞(ψ)_m|`.
    pub fn multiplicativity_residual(&self, phi: &TestFunction, psi: &TestFunction) -> Result<f64> {
        let n = self.smallest_power(phi.end() + psi.end())?;
        let grid = self.grid_for(n)?;
        let order = self.jet_order(n);
        let product = Jet::cosine_convolve(&phi.jet(&grid, order)?, &psi.jet(&grid, order)?)?;
        let lhs = self.apply_jet(&product, n)?;
        let (a, b) = (self.calculus_apply(phi)?, self.calculus_apply(psi)?);
        Ok(max_diff(lhs.iter().copied(), a.iter().zip(&b).map(|(x, y)| x * y)))
    }

    /// `max_m |a_m² 𝒞(f)_m − 𝒞(f″)_m − f′(0)|`, with `f′(0)` from the closed form.
    pub fn generator_residual(&self, f: &TestFunction) -> Result<f64> {
        let n = self.smallest_power(f.end())?;
        let grid = self.grid_for(n)?;
        let jet = f.jet(&grid, self.jet_order(n) + 2)?;
        let cf = self.apply_jet(&jet, n)?;
        let cf2 = self.apply_jet(&jet.shifted(2)?, n)?;
        let slope = f.derivative_at(1, 0.0);
        Ok(self
            .generator
            .spectrum()
            .iter()
            .zip(cf.iter().zip(&cf2))
            .map(|(a, (x, y))| (a * a * x - y - slope).norm())
            .fold(0.0, f64::max))
    }

    /// `max_m |𝒞_{k∗l}(f)_m − 𝒞_k(f)_m|` for `l = j_β`.
    pub fn kernel_smoothing_invariance(&self, l: &Kernel, f: &TestFunction) -> Result<f64> {
        let beta = match l {
            Kernel::Jalpha(b) => *b,
            other => return Err(Error::UnsupportedKernel(format!("smoothing kernel {other} is not j_β"))),
        };
        let smoothed = CalculusContext::new(
            &Kernel::Jalpha(self.alpha + beta),
            &self.generator,
            self.tau,
            self.steps,
            self.n_max(),
        )?;
        let (a, b) = (smoothed.calculus_apply(f)?, self.calculus_apply(f)?);
        Ok(max_diff(a.into_iter(), b.into_iter()))
    }

    /// Change of `𝒞(f)` when one more power is used than necessary.
    pub fn well_definedness_gap(&self, f: &TestFunction) -> Result<f64> {
        let n = self.smallest_power(f.end())?;
        let (a, b) = (self.apply_with_power(f, n)?, self.apply_with_power(f, n + 1)?);
        Ok(max_diff(a.into_iter(), b.into_iter()))
    }

    /// `max_m |𝒞(x f + y g)_m − x 𝒞(f)_m − y 𝒞(g)_m|`.
    pub fn linearity_residual(&self, f: &TestFunction, g: &TestFunction, x: Complex64, y: Complex64) -> Result<f64> {
        let n = self.smallest_power(f.end().max(g.end()))?;
        let grid = self.grid_for(n)?;
        let order = self.jet_order(n);
        let (jf, jg) = (f.jet(&grid, order)?, g.jet(&grid, order)?);
        let combo = jf.scale(x).add_scaled(&jg, y)?;
        let lhs = self.apply_jet(&combo, n)?;
        let (cf, cg) = (self.apply_jet(&jf, n)?, self.apply_jet(&jg, n)?);
        Ok(max_diff(lhs.into_iter(), cf.iter().zip(&cg).map(|(a, b)| x * a + y * b)))
    }

    /// For each mode, the first test function whose image exceeds `threshold` there.
    pub fn nondegeneracy_witnesses(&self, tests: &[TestFunction], threshold: f64) -> Result<Vec<Option<usize>>> {
        let images = tests.iter().map(|t| self.calculus_apply(t)).collect::<Result<Vec<_>>>()?;
        Ok((0..self.generator.dimension())
            .map(|m| images.iter().position(|img| img[m].norm() > threshold))
            .collect())
    }
}

fn max_diff(a: impl Iterator<Item = Complex64>, b: impl Iterator<Item = Complex64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_generator_integrates() {
        let gen: DiagonalGenerator = "0,0".parse().unwrap();
        let ctx = CalculusContext::new(&Kernel::Jalpha(1.0), &gen, 1.0, 64, 3).unwrap();
        let f = TestFunction::new(0.2, 1.7, 6).unwrap();
        for v in ctx.calculus_apply(&f).unwrap() {
            assert!((v - 1.0).norm() < 1e-4, "{v}");
        }
        assert_eq!(ctx.smallest_power(1.7).unwrap(), 2);
        assert!(ctx.smallest_power(3.5).is_err());
    }

    #[test]
    fn zero_test_function_maps_to_zero() {
        let gen: DiagonalGenerator = "1,2i".parse().unwrap();
        let ctx = CalculusContext::new(&Kernel::Jalpha(0.5), &gen, 1.0, 64, 2).unwrap();
        let f = TestFunction::new(0.2, 0.8, 6).unwrap().scaled(0.0);
        assert!(ctx.calculus_apply(&f).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn rejects_kernels_without_inverse_powers() {
        let gen: DiagonalGenerator = "1".parse().unwrap();
        assert!(matches!(
            CalculusContext::new(&Kernel::CharInterval, &gen, 1.0, 16, 2),
            Err(Error::UnsupportedKernel(_))
        ));
    }
}
