//! Convoluted cosine families `C_k(t) = (k ∗ cosh(a_m ·))(t)` for diagonal
//! generators `A = diag(a_m²)` and the defect of their Duhamel identity
//! `A ∫₀^t (t−s) C_k(s) ds = C_k(t) − (χ∗k)(t)`.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::gridfn::{antiderivative, convolve, second_antiderivative, GridFunction, QuadratureRule};
use crate::kernels::Kernel;

/// Entries beyond `e^{LOG_SCALE_THRESHOLD}` are stored as complex logarithms.
pub const LOG_SCALE_THRESHOLD: f64 = 500.0;

/// Spectral parameters `a_m` of `A = diag(a_m²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalGenerator {
    spectrum: Vec<Complex64>,
}

impl DiagonalGenerator {
    pub fn new(spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.is_empty() {
            return Err(Error::Parameter("generator needs at least one mode".into()));
        }
        if let Some(a) = spectrum.iter().find(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::Parameter(format!("non-finite spectral value {a}")));
        }
        Ok(DiagonalGenerator { spectrum })
    }

    /// `a_m = m/T + i·√((e^m/m)² − (m/T)²)`, `m = 1..=modes`, so that
    /// `|a_m| = e^m/m` while `Re a_m = m/T`.
    pub fn threshold_sequence(t_end: f64, modes: usize) -> Result<Self> {
        if !(t_end > 0.0) || modes == 0 {
            return Err(Error::Parameter(format!("need T > 0 and modes ≥ 1, got {t_end}, {modes}")));
        }
        let spectrum = (1..=modes)
            .map(|m| {
                let mf = m as f64;
                let re = mf / t_end;
                let r2 = Complex64::new((mf.exp() / mf).powi(2) - re * re, 0.0);
                Complex64::new(re, 0.0) + Complex64::i() * r2.sqrt()
            })
            .collect();
        DiagonalGenerator::new(spectrum)
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn dimension(&self) -> usize {
        self.spectrum.len()
    }

    /// Largest `|a_m|·T`, which decides between linear and log storage.
    pub fn growth(&self, t_end: f64) -> f64 {
        self.spectrum.iter().map(|a| a.norm() * t_end).fold(0.0, f64::max)
    }
}

impl fmt::Display for DiagonalGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.spectrum.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for DiagonalGenerator {
    type Err = Error;

    /// Comma-separated complex numbers (`0,1,2i,1+1i`) or `l2:<T>,<modes>`.
    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("l2:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(Error::Parse(format!("l2 generator spec {spec:?} needs T,modes")));
            }
            let t = parts[0].parse::<f64>().map_err(|e| Error::Parse(format!("{:?}: {e}", parts[0])))?;
            let n = parts[1].parse::<usize>().map_err(|e| Error::Parse(format!("{:?}: {e}", parts[1])))?;
            return DiagonalGenerator::threshold_sequence(t, n);
        }
        let spectrum = spec
            .split(',')
            .map(|s| parse_complex(s.trim()))
            .collect::<Result<Vec<_>>>()?;
        DiagonalGenerator::new(spectrum)
    }
}

pub(crate) fn parse_complex(s: &str) -> Result<Complex64> {
    let t = s.replace(' ', "");
    let t = match t.as_str() {
        "i" | "+i" => "1i".to_string(),
        "-i" => "-1i".to_string(),
        _ => t.replace("+i", "+1i").replace("-i", "-1i"),
    };
    Complex64::from_str(&t).map_err(|_| Error::Parse(format!("not a complex number: {s:?}")))
}

#[derive(Clone, Debug)]
enum Entries {
    Linear(Vec<GridFunction>),
    /// Complex logarithms of the entries, one vector per mode.
    Log(Vec<Vec<Complex64>>),
}

/// Values `E[i][m] = C(t_i) e_m` of a diagonal cosine-type family.
#[derive(Clone, Debug)]
pub struct PropagatorTable {
    generator: DiagonalGenerator,
    kernel: Option<Kernel>,
    grid: Grid,
    entries: Entries,
}

/// `ln cosh w`, accurate for large `|Re w|`.
fn ln_cosh(w: Complex64) -> Complex64 {
    let w = if w.re < 0.0 { -w } else { w };
    w + (1.0 + (-2.0 * w).exp()).ln() - std::f64::consts::LN_2
}

/// The cosine family `cosh(a_m t)` itself (no smoothing kernel).
pub fn base_cosine(generator: &DiagonalGenerator, grid: &Grid) -> PropagatorTable {
    let entries = if generator.growth(grid.t_end()) > LOG_SCALE_THRESHOLD {
        Entries::Log(
            generator
                .spectrum
                .iter()
                .map(|&a| grid.nodes().map(|t| ln_cosh(a * t)).collect())
                .collect(),
        )
    } else {
        Entries::Linear(
            generator
                .spectrum
                .iter()
                .map(|&a| GridFunction::from_fn(*grid, |t| (a * t).cosh()))
                .collect(),
        )
    };
    PropagatorTable { generator: generator.clone(), kernel: None, grid: *grid, entries }
}

impl PropagatorTable {
    /// Table from per-mode columns in linear scale.
    pub fn from_columns(
        generator: DiagonalGenerator,
        kernel: Option<Kernel>,
        columns: Vec<GridFunction>,
    ) -> Result<Self> {
        if columns.len() != generator.dimension() {
            return Err(Error::Shape(format!(
                "{} columns for {} modes",
                columns.len(),
                generator.dimension()
            )));
        }
        let grid = *columns[0].grid();
        for c in &columns[1..] {
            grid.check_same(c.grid(), "propagator columns")?;
        }
        Ok(PropagatorTable { generator, kernel, grid, entries: Entries::Linear(columns) })
    }

    pub fn generator(&self) -> &DiagonalGenerator {
        &self.generator
    }

    /// Smoothing kernel `k` of `C_k`; `None` for the cosine family itself.
    pub fn kernel(&self) -> Option<&Kernel> {
        self.kernel.as_ref()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_log_scale(&self) -> bool {
        matches!(self.entries, Entries::Log(_))
    }

    pub fn dimension(&self) -> usize {
        self.generator.dimension()
    }

    pub fn column(&self, mode: usize) -> Result<&GridFunction> {
        match &self.entries {
            Entries::Linear(c) => c
                .get(mode)
                .ok_or_else(|| Error::Shape(format!("mode {mode} of {}", c.len()))),
            Entries::Log(_) => Err(Error::LogScale("columns are only available in linear scale".into())),
        }
    }

    pub fn columns(&self) -> Result<&[GridFunction]> {
        match &self.entries {
            Entries::Linear(c) => Ok(c),
            Entries::Log(_) => Err(Error::LogScale("columns are only available in linear scale".into())),
        }
    }

    /// Entry at node `i`, mode `mode` (may overflow for log-scale tables).
    pub fn entry(&self, i: usize, mode: usize) -> Complex64 {
        match &self.entries {
            Entries::Linear(c) => c[mode].value(i),
            Entries::Log(l) => l[mode][i].exp(),
        }
    }

    /// Complex logarithm of the entry.
    pub fn log_entry(&self, i: usize, mode: usize) -> Complex64 {
        match &self.entries {
            Entries::Linear(c) => c[mode].value(i).ln(),
            Entries::Log(l) => l[mode][i],
        }
    }

    /// Restriction to the first `intervals` cells.
    pub fn truncated(&self, intervals: usize) -> Result<PropagatorTable> {
        let columns = self.columns()?.iter().map(|c| c.truncated(intervals)).collect::<Result<Vec<_>>>()?;
        PropagatorTable::from_columns(self.generator.clone(), self.kernel.clone(), columns)
    }

    /// CSV with columns `t,m,re,im`, or `t,m,logmag,phase` in log scale.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        if self.is_log_scale() {
            s.push_str("t,m,logmag,phase\n");
        } else {
            s.push_str("t,m,re,im\n");
        }
        for i in 0..self.grid.len() {
            let t = self.grid.node(i);
            for m in 0..self.dimension() {
                let (x, y) = match &self.entries {
                    Entries::Linear(c) => (c[m].value(i).re, c[m].value(i).im),
                    Entries::Log(l) => (l[m][i].re, l[m][i].im),
                };
                let _ = writeln!(s, "{t:.17e},{},{x:.17e},{y:.17e}", m + 1);
            }
        }
        s
    }
}

/// `k ∗ k'` as a kernel, staying analytic for fractional integrals.
pub fn compose_kernels(first: Option<&Kernel>, k: &Kernel, grid: &Grid) -> Result<Kernel> {
    match (first, k) {
        (None, _) => Ok(k.clone()),
        (Some(Kernel::Jalpha(a)), Kernel::Jalpha(b)) => Ok(Kernel::Jalpha(a + b)),
        (Some(k0), _) => {
            let (a, b) = (k0.sample(grid)?, k.sample(grid)?);
            Ok(Kernel::Sampled(convolve(&a, &b, QuadratureRule::auto(&a, &b))?))
        }
    }
}

/// `k ∗ C` entrywise.
pub fn convolve_family(base: &PropagatorTable, k: &Kernel) -> Result<PropagatorTable> {
    let columns = base.columns()?;
    let ks = k.sample(&base.grid)?;
    let out = columns
        .par_iter()
        .map(|c| convolve(&ks, c, QuadratureRule::auto(&ks, c)))
        .collect::<Result<Vec<_>>>()?;
    let kernel = compose_kernels(base.kernel.as_ref(), k, &base.grid)?;
    PropagatorTable::from_columns(base.generator.clone(), Some(kernel), out)
}

/// `(χ∗k)(t_i)` for the table's kernel, or the constant 1 for the cosine family.
fn kernel_antiderivative(table: &PropagatorTable) -> Result<GridFunction> {
    match &table.kernel {
        None => Ok(GridFunction::from_real_fn(table.grid, |_| 1.0)),
        Some(k) => antiderivative(&k.sample(&table.grid)?),
    }
}

/// `|a_m² (I∗E_m)(t_i) − E_m(t_i) + (χ∗k)(t_i)|` at every node.
pub fn duhamel_residuals(table: &PropagatorTable, mode: usize) -> Result<Vec<f64>> {
    if table.is_log_scale() {
        return Err(Error::LogScale("Duhamel residual needs linear entries".into()));
    }
    let col = table.column(mode)?;
    let a = table.generator.spectrum[mode];
    let ie = second_antiderivative(col)?;
    let chik = kernel_antiderivative(table)?;
    Ok((0..table.grid.len())
        .map(|i| (a * a * ie.value(i) - col.value(i) + chik.value(i)).norm())
        .collect())
}

pub fn duhamel_residual(table: &PropagatorTable, mode: usize, i: usize) -> Result<f64> {
    if i > table.grid.intervals() {
        return Err(Error::Shape(format!("node {i} beyond M = {}", table.grid.intervals())));
    }
    Ok(duhamel_residuals(table, mode)?[i])
}

/// `max_m |E[i][m]|`, the norm of the diagonal operator at `t_i`.
pub fn family_norm(table: &PropagatorTable, i: usize) -> f64 {
    family_log_norm(table, i).exp()
}

/// `max_m ln|E[i][m]|`.
pub fn family_log_norm(table: &PropagatorTable, i: usize) -> f64 {
    (0..table.dimension())
        .map(|m| match &table.entries {
            Entries::Linear(c) => c[m].value(i).norm().ln(),
            Entries::Log(l) => l[m][i].re,
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
