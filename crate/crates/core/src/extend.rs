//! Sharp extension of a local convoluted cosine family.
//!
//! From `C_k` on `[0, ν]` and `C_{k^{∗n}}` on `[0, nν]` the step builds
//! `C_{k^{∗(n+1)}}` on `[0, (n+1)ν]`: on `[0, nν]` as `k ∗ C_{k^{∗n}}`, and on
//! `[nν, (n+1)ν]` from the five-term formula
//!
//! ```text
//!   2 C_{k^{∗n}}(nν) C_k(t−nν)
//! + ∫₀^{nν} k(t−r) C_{k^{∗n}}(r) dr
//! + ∫₀^{t−nν} k^{∗n}(t−r) C_k(r) dr
//! − ∫_{2nν−t}^{nν} k(r+t−2nν) C_{k^{∗n}}(r) dr
//! − ∫₀^{t−nν} k^{∗n}(r−t+2nν) C_k(r) dr
//! ```
//!
//! which only reads the local family on `[0, ν]`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::gridfn::{convolve, integrate_product, Anchored, GridFunction, QuadratureRule};
use crate::kernels::Kernel;
use crate::propagator::{convolve_family, PropagatorTable};

/// The five terms of the far branch, in formula order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchTerm {
    /// `2 C_{k^{∗n}}(nν) C_k(t−nν)`.
    Junction,
    /// `∫₀^{nν} k(t−r) C_{k^{∗n}}(r) dr`.
    KernelHistory,
    /// `∫₀^{t−nν} k^{∗n}(t−r) C_k(r) dr`.
    PowerLocal,
    /// `∫_{2nν−t}^{nν} k(r+t−2nν) C_{k^{∗n}}(r) dr`.
    ReflectedHistory,
    /// `∫₀^{t−nν} k^{∗n}(r−t+2nν) C_k(r) dr`.
    ReflectedLocal,
}

impl BranchTerm {
    /// Term by its 1-based position in the formula.
    pub fn from_position(k: usize) -> Result<Self> {
        Ok(match k {
            1 => BranchTerm::Junction,
            2 => BranchTerm::KernelHistory,
            3 => BranchTerm::PowerLocal,
            4 => BranchTerm::ReflectedHistory,
            5 => BranchTerm::ReflectedLocal,
            _ => return Err(Error::Parameter(format!("branch term {k} not in 1..=5"))),
        })
    }
}

/// Options for deliberately broken runs used as negative controls.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExtendOptions {
    pub skip_term: Option<BranchTerm>,
}

#[derive(Clone, Debug)]
pub struct ExtensionInput<'a> {
    /// `C_k` on `[0, ν]`.
    pub base: &'a PropagatorTable,
    /// `C_{k^{∗n}}` on `[0, nν]`.
    pub prev: &'a PropagatorTable,
    /// `k` sampled on `[0, (n+1)ν]`.
    pub kernel: &'a GridFunction,
    /// `k^{∗n}` sampled on `[0, (n+1)ν]`.
    pub kernel_power: &'a GridFunction,
    pub nu: f64,
    pub n: usize,
    /// Label for `k^{∗(n+1)}`; sampled from the inputs when absent.
    pub output_kernel: Option<Kernel>,
}

#[derive(Clone, Debug)]
pub struct ExtensionOutput {
    /// `C_{k^{∗(n+1)}}` on `[0, (n+1)ν]`.
    pub table: PropagatorTable,
    /// Largest `|branch₁(nν) − branch₂(nν)|` over modes.
    pub seam_mismatch: f64,
}

pub fn extend_step(input: &ExtensionInput<'_>, opts: ExtendOptions) -> Result<ExtensionOutput> {
    let ExtensionInput { base, prev, kernel, kernel_power, nu, n, .. } = *input;
    if n == 0 {
        return Err(Error::Parameter("extension step needs n ≥ 1".into()));
    }
    if base.generator() != prev.generator() {
        return Err(Error::Shape("base and previous tables have different generators".into()));
    }
    let g = base.grid();
    for (what, other) in [("prev", prev.grid()), ("kernel", kernel.grid()), ("kernel power", kernel_power.grid())] {
        g.check_step(other, what)?;
    }
    let j = g
        .steps_in(nu)
        .filter(|&j| j >= 1)
        .ok_or_else(|| Error::Parameter(format!("ν = {nu} is not a multiple of the step {}", g.step())))?;
    let nj = n * j;
    let total = nj + j;
    if g.intervals() < j {
        return Err(Error::Support(format!("base covers {} cells, needs {j}", g.intervals())));
    }
    if prev.grid().intervals() < nj {
        return Err(Error::Support(format!("previous table covers {} cells, needs {nj}", prev.grid().intervals())));
    }
    if kernel.grid().intervals() < total || kernel_power.grid().intervals() < total {
        return Err(Error::Support(format!("kernels must cover {total} cells")));
    }
    let out_grid = Grid::with_step(g.step(), total)?;
    let near_kernel = kernel.truncated(nj)?;
    let skip = |t: BranchTerm| opts.skip_term == Some(t);

    let results = (0..base.dimension())
        .into_par_iter()
        .map(|m| -> Result<(GridFunction, f64)> {
            let local = base.column(m)?;
            let history = prev.column(m)?.truncated(nj)?;
            let near = convolve(&near_kernel, &history, QuadratureRule::auto(&near_kernel, &history))?;
            let junction = history.value(nj);
            let far = (nj..=total)
                .into_par_iter()
                .map(|i| -> Result<Complex64> {
                    let q = i - nj;
                    let (ii, nji) = (i as isize, nj as isize);
                    let mut v = Complex64::new(0.0, 0.0);
                    if !skip(BranchTerm::Junction) {
                        v += 2.0 * junction * local.value(q);
                    }
                    if !skip(BranchTerm::KernelHistory) {
                        v += integrate_product(Anchored::new(kernel, ii), Anchored::new(&history, 0), 0, nj)?;
                    }
                    if !skip(BranchTerm::PowerLocal) {
                        v += integrate_product(Anchored::new(kernel_power, ii), Anchored::new(local, 0), 0, q)?;
                    }
                    if !skip(BranchTerm::ReflectedHistory) {
                        let lo = 2 * nj - i;
                        v -= integrate_product(
                            Anchored::new(kernel, lo as isize),
                            Anchored::new(&history, 0),
                            lo,
                            nj,
                        )?;
                    }
                    if !skip(BranchTerm::ReflectedLocal) {
                        v -= integrate_product(
                            Anchored::new(kernel_power, ii - 2 * nji),
                            Anchored::new(local, 0),
                            0,
                            q,
                        )?;
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?;
            let seam = (near.value(nj) - far[0]).norm();
            let mut values = near.values().to_vec();
            values.extend_from_slice(&far[1..]);
            let mut col = GridFunction::from_values(out_grid, values)?;
            if let Some(p) = near.power() {
                col = col.with_power(p)?;
            }
            Ok((col, seam))
        })
        .collect::<Result<Vec<_>>>()?;

    let seam_mismatch = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let columns = results.into_iter().map(|r| r.0).collect();
    let label = match &input.output_kernel {
        Some(k) => k.clone(),
        None => {
            let (a, b) = (kernel.truncated(total)?, kernel_power.truncated(total)?);
            Kernel::Sampled(convolve(&a, &b, QuadratureRule::auto(&a, &b))?)
        }
    };
    let table = PropagatorTable::from_columns(base.generator().clone(), Some(label), columns)?;
    Ok(ExtensionOutput { table, seam_mismatch })
}

/// All intermediate families of an iterated extension.
#[derive(Clone, Debug)]
pub struct ExtensionRun {
    /// `tables[n]` is `C_{k^{∗(n+1)}}` on `[0, (n+1)ν]`.
    pub tables: Vec<PropagatorTable>,
    /// `seams[n−1]` is the junction mismatch of step `n`.
    pub seams: Vec<f64>,
}

impl ExtensionRun {
    pub fn last(&self) -> &PropagatorTable {
        self.tables.last().expect("an extension run holds at least one table")
    }
}

fn check_base(base: &PropagatorTable) -> Result<()> {
    if base.kernel().is_some() {
        return Err(Error::Usage("extension starts from the cosine family itself".into()));
    }
    Ok(())
}

fn extend_with_powers(
    base: &PropagatorTable,
    k: &Kernel,
    n_max: usize,
    analytic_powers: Option<&dyn Fn(&Grid, usize) -> Result<GridFunction>>,
    opts: ExtendOptions,
) -> Result<ExtensionRun> {
    check_base(base)?;
    let nu = base.grid().t_end();
    let j = base.grid().intervals();
    let local = convolve_family(base, k)?;
    let mut run = ExtensionRun { tables: vec![local.clone()], seams: Vec::new() };
    if n_max == 0 {
        return Ok(run);
    }
    let big = base.grid().resized((n_max + 1) * j)?;
    let ks = k.sample(&big)?;
    let mut power = ks.clone();
    for n in 1..=n_max {
        if n > 1 {
            power = match analytic_powers {
                Some(f) => f(&big, n)?,
                None => convolve(&ks, &power, QuadratureRule::auto(&ks, &power))?,
            };
        }
        let prev = run.tables.last().expect("seeded with the local family").clone();
        let output_kernel = k.analytic_power(n + 1);
        let input = ExtensionInput {
            base: &local,
            prev: &prev,
            kernel: &ks,
            kernel_power: &power,
            nu,
            n,
            output_kernel,
        };
        let out = extend_step(&input, opts)?;
        run.tables.push(out.table);
        run.seams.push(out.seam_mismatch);
    }
    Ok(run)
}

/// Iterated extension with numerically convolved kernel powers.
pub fn extend_full(base: &PropagatorTable, k: &Kernel, n_max: usize, opts: ExtendOptions) -> Result<ExtensionRun> {
    extend_with_powers(base, k, n_max, None, opts)
}

/// Iterated extension for `k = j_α`, using the analytic powers `j_{nα}`.
pub fn fractional_extend(base: &PropagatorTable, alpha: f64, n_max: usize, opts: ExtendOptions) -> Result<ExtensionRun> {
    let k = Kernel::jalpha(alpha)?;
    let powers = |g: &Grid, n: usize| Kernel::Jalpha(alpha * n as f64).sample(g);
    extend_with_powers(base, &k, n_max, Some(&powers), opts)
}

/// Repeats the `n = 1` step `m` times, doubling both the interval and the
/// kernel power each time; returns `C_{k^{∗2^m}}` on `[0, 2^m ν]`.
pub fn iterate_doubling(base: &PropagatorTable, k: &Kernel, m: usize) -> Result<PropagatorTable> {
    check_base(base)?;
    let j = base.grid().intervals();
    let big = base.grid().resized((1 << m) * j)?;
    let mut kernel = k.sample(&big)?;
    let mut current = convolve_family(base, k)?;
    for step in 0..m {
        let cur_j = (1 << step) * j;
        let window = kernel.truncated(2 * cur_j)?;
        let label = k.analytic_power(1 << (step + 1));
        let input = ExtensionInput {
            base: &current,
            prev: &current,
            kernel: &window,
            kernel_power: &window,
            nu: current.grid().t_end(),
            n: 1,
            output_kernel: label,
        };
        current = extend_step(&input, ExtendOptions::default())?.table;
        if step + 1 < m {
            kernel = convolve(&kernel, &kernel, QuadratureRule::auto(&kernel, &kernel))?;
        }
    }
    Ok(current)
}
