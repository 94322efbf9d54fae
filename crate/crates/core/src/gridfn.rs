//! Complex functions sampled on a uniform grid and their convolution calculus.
//!
//! A [`GridFunction`] may carry a [`PowerTerm`] annotation `c·j_α(t)` with
//! `0 < α < 2`, `α ≠ 1`. Samples at `t_i > 0` hold the full function value;
//! the node at `t = 0` holds the limit of the remainder `f − c·j_α`. Integrals
//! against annotated factors use exact moments of the power term and the
//! trapezoid rule on the remainder, which keeps second order at the singular
//! endpoint.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quad::{j_alpha, linear_convolution, tanh_sinh, PowerMoments};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Leading singular behaviour `scale·j_exponent(t)` near `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerTerm {
    pub exponent: f64,
    pub scale: Complex64,
}

impl PowerTerm {
    pub fn new(exponent: f64, scale: Complex64) -> Self {
        PowerTerm { exponent, scale }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.scale * j_alpha(self.exponent, t)
    }
}

#[derive(Clone, Debug)]
struct Annotation {
    term: PowerTerm,
    regular: Vec<Complex64>,
    moments: Arc<PowerMoments>,
}

/// Uniformly sampled complex function on `[0, T]`.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
    /// Left limits at nodes where the function jumps; `values` are right limits.
    jumps: Vec<(usize, Complex64)>,
    support: Option<(usize, usize)>,
    power: Option<Annotation>,
}

impl GridFunction {
    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values, jumps: Vec::new(), support: None, power: None })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        GridFunction::from_values(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().map(f).collect();
        GridFunction { grid, values, jumps: Vec::new(), support: None, power: None }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        GridFunction::from_fn(grid, |t| Complex64::new(f(t), 0.0))
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction::from_fn(grid, |_| ZERO).with_support_unchecked(Some((0, 0)))
    }

    /// Attach a support hint; every sample outside `[lo, hi]` must be zero.
    pub fn with_support(mut self, lo: usize, hi: usize) -> Result<Self> {
        if lo > hi || hi > self.grid.intervals() {
            return Err(Error::Shape(format!("support [{lo}, {hi}] outside grid")));
        }
        if self.power.is_some() && lo > 0 {
            return Err(Error::Usage("annotated functions are supported from 0".into()));
        }
        let outside = self
            .values
            .iter()
            .enumerate()
            .any(|(i, v)| (i < lo || i > hi) && *v != ZERO)
            || self.jumps.iter().any(|&(i, v)| (i <= lo || i > hi) && v != ZERO);
        if outside {
            return Err(Error::Shape(format!("nonzero samples outside support [{lo}, {hi}]")));
        }
        self.support = Some((lo, hi));
        Ok(self)
    }

    /// Zero every sample outside `[lo, hi]` and record the support.
    pub fn restricted(mut self, lo: usize, hi: usize) -> Self {
        let hi = hi.min(self.grid.intervals());
        for (i, v) in self.values.iter_mut().enumerate() {
            if i < lo || i > hi {
                *v = ZERO;
            }
        }
        self.jumps.retain(|&(i, _)| i > lo && i <= hi);
        if self.power.is_none() || lo == 0 {
            self.support = Some((lo, hi));
        }
        self.refresh();
        self
    }

    fn with_support_unchecked(mut self, support: Option<(usize, usize)>) -> Self {
        self.support = support;
        self
    }

    /// Record the left limit at node `i`, making the function jump there.
    pub fn with_jump(mut self, i: usize, left: Complex64) -> Result<Self> {
        if i == 0 || i > self.grid.intervals() {
            return Err(Error::Shape(format!("jump node {i} outside (0, M]")));
        }
        self.jumps.retain(|&(j, _)| j != i);
        self.jumps.push((i, left));
        self.jumps.sort_by_key(|&(j, _)| j);
        self.refresh();
        Ok(self)
    }

    /// Declare the leading singular term. Exponent 1 folds into the node at
    /// zero and exponents of 2 or more are smooth enough to drop.
    pub fn with_power(mut self, term: PowerTerm) -> Result<Self> {
        if !(term.exponent.is_finite() && term.exponent > 0.0) {
            return Err(Error::Parameter(format!("power exponent {} must be positive", term.exponent)));
        }
        if term.scale == ZERO || term.exponent >= 2.0 {
            self.power = None;
        } else if (term.exponent - 1.0).abs() < 1e-12 {
            self.values[0] += term.scale;
            self.power = None;
        } else {
            if let Some((0, hi)) = self.support {
                if hi < self.grid.intervals() {
                    return Err(Error::Usage("power term on a truncated support".into()));
                }
            }
            self.support = None;
            let moments =
                Arc::new(PowerMoments::new(term.exponent, self.grid.step(), self.grid.intervals()));
            self.power = Some(Annotation { term, regular: Vec::new(), moments });
        }
        self.refresh();
        Ok(self)
    }

    fn refresh(&mut self) {
        if let Some(ann) = self.power.as_mut() {
            let h = self.grid.step();
            ann.regular = self
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| if i == 0 { v } else { v - ann.term.eval(i as f64 * h) })
                .collect();
        }
    }

    /// Same samples, annotation removed: the node at zero keeps its stored value.
    pub fn without_power(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.clone(),
            jumps: self.jumps.clone(),
            support: self.support,
            power: None,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn jumps(&self) -> &[(usize, Complex64)] {
        &self.jumps
    }

    pub fn support(&self) -> Option<(usize, usize)> {
        self.support
    }

    /// Last index that can be nonzero.
    pub fn support_end(&self) -> usize {
        self.support.map_or(self.grid.intervals(), |(_, hi)| hi)
    }

    pub fn power(&self) -> Option<PowerTerm> {
        self.power.as_ref().map(|a| a.term)
    }

    pub fn value(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    pub fn left_value(&self, i: usize) -> Complex64 {
        self.jumps
            .binary_search_by_key(&i, |&(j, _)| j)
            .map_or(self.values[i], |k| self.jumps[k].1)
    }

    fn regular_right(&self, i: usize) -> Complex64 {
        match &self.power {
            Some(a) => a.regular[i],
            None => self.values[i],
        }
    }

    fn regular_left(&self, i: usize) -> Complex64 {
        if self.jumps.is_empty() {
            return self.regular_right(i);
        }
        let v = self.left_value(i);
        match &self.power {
            Some(a) if i > 0 => v - a.term.eval(i as f64 * self.grid.step()),
            _ => v,
        }
    }

    /// Linear interpolation of the remainder plus the exact power term.
    pub fn value_at(&self, t: f64) -> Option<Complex64> {
        let h = self.grid.step();
        let x = t / h;
        if !(x >= -1e-9 && x <= self.grid.intervals() as f64 + 1e-9) {
            return None;
        }
        let x = x.clamp(0.0, self.grid.intervals() as f64);
        let i = (x.floor() as usize).min(self.grid.intervals() - 1);
        let w = x - i as f64;
        let r = self.regular_right(i) * (1.0 - w) + self.regular_left(i + 1) * w;
        Some(match &self.power {
            Some(a) if t > 0.0 => r + a.term.eval(t),
            _ => r,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        let mut out = GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            jumps: self.jumps.iter().map(|&(i, v)| (i, v * c)).collect(),
            support: self.support,
            power: None,
        };
        if let Some(a) = &self.power {
            out = out
                .with_power(PowerTerm::new(a.term.exponent, a.term.scale * c))
                .expect("scaled power term stays valid");
        }
        out
    }

    pub fn map_values(&self, f: impl Fn(Complex64) -> Complex64) -> Result<GridFunction> {
        if self.power.is_some() {
            return Err(Error::Usage("cannot map an annotated function pointwise".into()));
        }
        let mut out = GridFunction::from_values(self.grid, self.values.iter().map(|&v| f(v)).collect())?;
        out.jumps = self.jumps.iter().map(|&(i, v)| (i, f(v))).collect();
        Ok(out)
    }

    /// Pointwise `self + c·other`.
    pub fn add_scaled(&self, other: &GridFunction, c: Complex64) -> Result<GridFunction> {
        self.grid.check_same(&other.grid, "add")?;
        let b = other.scale(c);
        let (pa, pb) = (self.power(), b.power());
        let term = match (pa, pb) {
            (None, None) => None,
            (Some(p), None) | (None, Some(p)) => Some(p),
            (Some(p), Some(q)) if (p.exponent - q.exponent).abs() < 1e-12 => {
                Some(PowerTerm::new(p.exponent, p.scale + q.scale))
            }
            (Some(p), Some(q)) => {
                // Only the stronger singularity can stay annotated; the other
                // must be bounded at zero so that its samples are exact.
                let (keep, drop) = if p.exponent < q.exponent { (p, q) } else { (q, p) };
                if drop.exponent < 1.0 {
                    return Err(Error::Usage(format!(
                        "cannot represent a sum of singularities t^{} and t^{}",
                        p.exponent - 1.0,
                        q.exponent - 1.0
                    )));
                }
                Some(keep)
            }
        };
        // A dropped annotation with exponent in (1,2) vanishes at the origin,
        // so its node-0 value is already the plain sample.
        let values: Vec<Complex64> = self.values.iter().zip(&b.values).map(|(x, y)| x + y).collect();
        let mut jumps: Vec<(usize, Complex64)> = Vec::new();
        let mut nodes: Vec<usize> =
            self.jumps.iter().chain(&b.jumps).map(|&(i, _)| i).collect();
        nodes.sort_unstable();
        nodes.dedup();
        for i in nodes {
            jumps.push((i, self.left_value(i) + b.left_value(i)));
        }
        let support = match (self.support, b.support) {
            (Some((a0, a1)), Some((b0, b1))) => Some((a0.min(b0), a1.max(b1))),
            _ => None,
        };
        let mut out = GridFunction { grid: self.grid, values, jumps, support, power: None };
        if let Some(t) = term {
            out = out.with_power(t)?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.add_scaled(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    /// Restriction to the first `intervals` cells, same step.
    pub fn truncated(&self, intervals: usize) -> Result<GridFunction> {
        if intervals > self.grid.intervals() {
            return Err(Error::Shape(format!(
                "cannot truncate {} cells to {intervals}",
                self.grid.intervals()
            )));
        }
        let grid = self.grid.resized(intervals)?;
        let mut out = GridFunction {
            grid,
            values: self.values[..=intervals].to_vec(),
            jumps: self.jumps.iter().copied().filter(|&(i, _)| i <= intervals).collect(),
            support: self.support.map(|(lo, hi)| (lo.min(intervals), hi.min(intervals))),
            power: None,
        };
        if let Some(p) = self.power() {
            out = out.with_power(p)?;
        }
        Ok(out)
    }

    /// Extension by zero to `intervals` cells; the function must already vanish at its end.
    pub fn zero_padded(&self, intervals: usize) -> Result<GridFunction> {
        if intervals < self.grid.intervals() {
            return self.truncated(intervals);
        }
        let end = self.support_end();
        if self.power.is_some() || end == self.grid.intervals() && self.values[end] != ZERO {
            return Err(Error::Support("function does not vanish at the end of its grid".into()));
        }
        let grid = self.grid.resized(intervals)?;
        let mut values = self.values.clone();
        values.resize(grid.len(), ZERO);
        Ok(GridFunction {
            grid,
            values,
            jumps: self.jumps.clone(),
            support: Some(self.support.unwrap_or((0, end))),
            power: None,
        })
    }

    /// Serialize as CSV with a `# T=.. M=..` line and columns `t,re,im`.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# T={} M={}", self.grid.t_end(), self.grid.intervals());
        s.push_str("t,re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{:.17e},{:.17e},{:.17e}", self.grid.node(i), v.re, v.im);
        }
        s
    }

    pub fn from_csv_str(text: &str) -> Result<GridFunction> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty grid-function CSV".into()))?;
        let (t_end, m) = parse_grid_header(header)?;
        let grid = Grid::new(t_end, m)?;
        let body: String = lines.collect::<Vec<_>>().join("\n");
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
        let mut values = Vec::with_capacity(grid.len());
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 3 {
                return Err(Error::Parse(format!("expected 3 columns, got {}", rec.len())));
            }
            let num = |k: usize| -> Result<f64> {
                rec[k].parse::<f64>().map_err(|e| Error::Parse(format!("{:?}: {e}", &rec[k])))
            };
            values.push(Complex64::new(num(1)?, num(2)?));
        }
        GridFunction::from_values(grid, values)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<GridFunction> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        GridFunction::from_csv_str(&text)
    }
}

fn parse_grid_header(line: &str) -> Result<(f64, usize)> {
    let line = line.trim();
    let rest = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("missing '# T=.. M=..' header, got {line:?}")))?;
    let (mut t, mut m) = (None, None);
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("T=") {
            t = v.parse::<f64>().ok();
        } else if let Some(v) = tok.strip_prefix("M=") {
            m = v.parse::<usize>().ok();
        }
    }
    match (t, m) {
        (Some(t), Some(m)) => Ok((t, m)),
        _ => Err(Error::Parse(format!("bad grid header {line:?}"))),
    }
}

/// Quadrature for products with a possibly singular factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Plain trapezoid on the samples, annotations ignored.
    Trapezoid,
    /// Exact moments for annotated power terms, trapezoid on the remainder.
    ProductIntegration,
}

impl QuadratureRule {
    /// Product integration when either factor is annotated.
    pub fn auto(f: &GridFunction, g: &GridFunction) -> Self {
        if f.power.is_some() || g.power.is_some() {
            QuadratureRule::ProductIntegration
        } else {
            QuadratureRule::Trapezoid
        }
    }

    /// Expected convergence exponent on smooth data.
    pub fn order(&self) -> f64 {
        2.0
    }
}

/// A factor `f(|s − anchor|)` of an integrand, with `anchor` a node index
/// that may lie outside the grid of the integration variable.
#[derive(Clone, Copy, Debug)]
pub struct Anchored<'a> {
    pub f: &'a GridFunction,
    pub anchor: isize,
}

impl<'a> Anchored<'a> {
    pub fn new(f: &'a GridFunction, anchor: isize) -> Self {
        Anchored { f, anchor }
    }

    /// Remainder values at the two nodes of cell `[j, j+1]`, one-sided
    /// toward the cell.
    fn cell_values(&self, j: usize) -> (Complex64, Complex64) {
        let j = j as isize;
        if self.anchor <= j {
            let d = (j - self.anchor) as usize;
            (self.f.regular_right(d), self.f.regular_left(d + 1))
        } else {
            let d = (self.anchor - j - 1) as usize;
            (self.f.regular_left(d + 1), self.f.regular_right(d))
        }
    }

    fn cell_weights(&self, m: &PowerMoments, j: usize) -> (f64, f64) {
        let j = j as isize;
        if self.anchor <= j {
            let d = (j - self.anchor) as usize;
            (m.near[d], m.far[d])
        } else {
            let d = (self.anchor - j - 1) as usize;
            (m.far[d], m.near[d])
        }
    }

    fn check(&self, lo: usize, hi: usize) -> Result<()> {
        let (l, h) = (lo as isize, hi as isize);
        if self.anchor > l && self.anchor < h {
            return Err(Error::Usage(format!(
                "anchor {} inside integration range [{lo}, {hi}]",
                self.anchor
            )));
        }
        let reach = (self.anchor - l).abs().max((self.anchor - h).abs()) as usize;
        if reach > self.f.grid.intervals() {
            return Err(Error::Support(format!(
                "factor needed at distance {reach} cells, sampled only to {}",
                self.f.grid.intervals()
            )));
        }
        Ok(())
    }

    /// Distance to the anchor in time units, from the DE endpoint distances.
    fn distance(&self, h: f64, lo: usize, hi: usize, dl: f64, dr: f64) -> f64 {
        if self.anchor <= lo as isize {
            (lo as isize - self.anchor) as f64 * h + dl
        } else {
            (self.anchor - hi as isize) as f64 * h + dr
        }
    }
}

/// `∫_{t_lo}^{t_hi} a.f(|s − t_a|)·b.f(|s − t_b|) ds` on the common step grid.
///
/// Remainder×remainder uses the trapezoid rule; a power term against the
/// other factor's remainder uses exact moments of the piecewise-linear
/// interpolant; power×power is integrated in closed form when both anchors
/// coincide and by tanh-sinh quadrature otherwise.
pub fn integrate_product(a: Anchored<'_>, b: Anchored<'_>, lo: usize, hi: usize) -> Result<Complex64> {
    a.f.grid.check_step(&b.f.grid, "integrate_product")?;
    if hi <= lo {
        return Ok(ZERO);
    }
    a.check(lo, hi)?;
    b.check(lo, hi)?;
    let h = a.f.grid.step();
    let (mut trap, mut pi_a, mut pi_b) = (ZERO, ZERO, ZERO);
    for j in lo..hi {
        let (a0, a1) = a.cell_values(j);
        let (b0, b1) = b.cell_values(j);
        trap += a0 * b0 + a1 * b1;
        if let Some(ann) = &a.f.power {
            let (w0, w1) = a.cell_weights(&ann.moments, j);
            pi_a += b0 * w0 + b1 * w1;
        }
        if let Some(ann) = &b.f.power {
            let (w0, w1) = b.cell_weights(&ann.moments, j);
            pi_b += a0 * w0 + a1 * w1;
        }
    }
    let mut total = trap * (0.5 * h);
    if let Some(ann) = &a.f.power {
        total += pi_a * ann.term.scale;
    }
    if let Some(ann) = &b.f.power {
        total += pi_b * ann.term.scale;
    }
    if let (Some(pa), Some(pb)) = (a.f.power(), b.f.power()) {
        total += pa.scale * pb.scale * power_pair(a, pa.exponent, b, pb.exponent, lo, hi, h)?;
    }
    Ok(total)
}

fn power_pair(
    a: Anchored<'_>,
    alpha: f64,
    b: Anchored<'_>,
    beta: f64,
    lo: usize,
    hi: usize,
    h: f64,
) -> Result<f64> {
    if a.anchor == b.anchor {
        let e = alpha + beta - 1.0;
        if e <= 0.0 {
            return Err(Error::Usage(format!(
                "product of j_{alpha} and j_{beta} from a common point is not integrable"
            )));
        }
        let d0 = (a.anchor - lo as isize).abs().min((a.anchor - hi as isize).abs()) as f64 * h;
        let d1 = d0 + (hi - lo) as f64 * h;
        let norm = (crate::quad::ln_gamma(alpha) + crate::quad::ln_gamma(beta)).exp();
        return Ok((d1.powf(e) - d0.powf(e)) / (e * norm));
    }
    let f = |_x: f64, dl: f64, dr: f64| {
        j_alpha(alpha, a.distance(h, lo, hi, dl, dr)) * j_alpha(beta, b.distance(h, lo, hi, dl, dr))
    };
    Ok(tanh_sinh(f, lo as f64 * h, hi as f64 * h, 1e-13))
}

fn check_rule(f: &GridFunction, g: &GridFunction, rule: QuadratureRule) -> Result<()> {
    f.grid.check_same(&g.grid, "convolve")?;
    if rule == QuadratureRule::ProductIntegration && f.power.is_none() && g.power.is_none() {
        return Err(Error::Usage("product integration needs a singular factor".into()));
    }
    Ok(())
}

fn plain_if_trapezoid(f: &GridFunction, rule: QuadratureRule) -> std::borrow::Cow<'_, GridFunction> {
    match rule {
        QuadratureRule::Trapezoid if f.power.is_some() => std::borrow::Cow::Owned(f.without_power()),
        _ => std::borrow::Cow::Borrowed(f),
    }
}

fn convolution_shape(f: &GridFunction, g: &GridFunction) -> (Option<(usize, usize)>, Option<PowerTerm>) {
    let m = f.grid.intervals();
    let support = match (f.support, g.support) {
        (Some((a0, a1)), Some((b0, b1))) => Some(((a0 + b0).min(m), (a1 + b1).min(m))),
        _ => None,
    };
    let leading = match (f.power(), g.power()) {
        (Some(p), Some(q)) => Some(PowerTerm::new(p.exponent + q.exponent, p.scale * q.scale)),
        (Some(p), None) => Some(PowerTerm::new(p.exponent + 1.0, p.scale * g.values[0])),
        (None, Some(q)) => Some(PowerTerm::new(q.exponent + 1.0, q.scale * f.values[0])),
        (None, None) => None,
    };
    (support, leading)
}

fn finish(
    grid: Grid,
    mut values: Vec<Complex64>,
    support: Option<(usize, usize)>,
    leading: Option<PowerTerm>,
) -> Result<GridFunction> {
    values[0] = ZERO;
    let mut out = GridFunction::from_values(grid, values)?;
    if let Some(p) = leading {
        out = out.with_power(p)?;
    }
    if out.power.is_none() {
        if let Some((lo, hi)) = support {
            out = out.restricted(lo, hi);
        }
    }
    Ok(out)
}

/// `(f∗g)(t_i) = ∫₀^{t_i} f(t_i − s) g(s) ds`.
///
/// Grids with at least 128 cells use FFT Toeplitz products for everything
/// except the power×power term.
pub fn convolve(f: &GridFunction, g: &GridFunction, rule: QuadratureRule) -> Result<GridFunction> {
    check_rule(f, g, rule)?;
    if f.grid.intervals() < 128 {
        return convolve_direct(f, g, rule);
    }
    let (f, g) = (plain_if_trapezoid(f, rule), plain_if_trapezoid(g, rule));
    let (f, g) = (f.as_ref(), g.as_ref());
    let m = f.grid.intervals();
    let h = f.grid.step();
    let n = m + 1;
    let fr: Vec<Complex64> = (0..n).map(|i| f.regular_right(i)).collect();
    let fl: Vec<Complex64> = (0..n).map(|i| f.regular_left(i)).collect();
    let gr: Vec<Complex64> = (0..n).map(|i| g.regular_right(i)).collect();
    let gl_shift: Vec<Complex64> = (1..n).map(|i| g.regular_left(i)).collect();
    let fl_gr = linear_convolution(&fl, &gr);
    let fr_gl = linear_convolution(&fr, &gl_shift);
    let mut out = vec![ZERO; n];
    for i in 1..n {
        out[i] = (fl_gr[i] - fl[0] * gr[i] + fr_gl[i - 1]) * (0.5 * h);
    }
    let real = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
    if let Some(ann) = &f.power {
        let b_gr = linear_convolution(&real(&ann.moments.far), &gr);
        let a_gl = linear_convolution(&real(&ann.moments.near), &gl_shift);
        for i in 1..n {
            out[i] += (b_gr[i - 1] + a_gl[i - 1]) * ann.term.scale;
        }
    }
    if let Some(ann) = &g.power {
        let a_fl = linear_convolution(&real(&ann.moments.near), &fl);
        let b_fr = linear_convolution(&real(&ann.moments.far), &fr);
        for i in 1..n {
            let mut v = a_fl[i] + b_fr[i - 1];
            if i < ann.moments.near.len() {
                v -= fl[0] * ann.moments.near[i];
            }
            out[i] += v * ann.term.scale;
        }
    }
    if let (Some(p), Some(q)) = (f.power(), g.power()) {
        let pair: Vec<Result<f64>> = (1..n)
            .into_par_iter()
            .map(|i| {
                power_pair(Anchored::new(f, i as isize), p.exponent, Anchored::new(g, 0), q.exponent, 0, i, h)
            })
            .collect();
        for (i, v) in (1..n).zip(pair) {
            out[i] += p.scale * q.scale * v?;
        }
    }
    let (support, leading) = convolution_shape(f, g);
    finish(f.grid, out, support, leading)
}

/// Node-by-node `O(M²)` evaluation of [`convolve`].
pub fn convolve_direct(f: &GridFunction, g: &GridFunction, rule: QuadratureRule) -> Result<GridFunction> {
    check_rule(f, g, rule)?;
    let (f, g) = (plain_if_trapezoid(f, rule), plain_if_trapezoid(g, rule));
    let (f, g) = (f.as_ref(), g.as_ref());
    let values = (0..f.grid.len())
        .into_par_iter()
        .map(|i| integrate_product(Anchored::new(f, i as isize), Anchored::new(g, 0), 0, i))
        .collect::<Result<Vec<_>>>()?;
    let (support, leading) = convolution_shape(f, g);
    finish(f.grid, values, support, leading)
}

/// `(f∘g)(t_i) = ∫_{t_i}^{end} f(s − t_i) g(s) ds`, with `end` the end of the
/// support of `g` or of the grid.
pub fn dual_convolve(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    f.grid.check_same(&g.grid, "dual_convolve")?;
    let m = f.grid.intervals();
    let end = g.support_end();
    let values = (0..=m)
        .into_par_iter()
        .map(|i| {
            if i >= end {
                Ok(ZERO)
            } else {
                integrate_product(Anchored::new(f, i as isize), Anchored::new(g, 0), i, end)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = GridFunction::from_values(f.grid, values)?;
    let hi = match f.support {
        Some((lo_f, _)) => end.saturating_sub(lo_f),
        None => end,
    };
    let lo = match (f.support, g.support) {
        (Some((_, hi_f)), Some((lo_g, _))) => lo_g.saturating_sub(hi_f),
        _ => 0,
    };
    out = out.restricted(lo, hi);
    Ok(out)
}

/// `f ∗_c g = ½(f∗g + f∘g + g∘f)`.
pub fn cosine_convolve(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let star = convolve(f, g, QuadratureRule::auto(f, g))?;
    let fg = dual_convolve(f, g)?;
    let gf = dual_convolve(g, f)?;
    star.add(&fg)?.add(&gf).map(|s| s.scale(Complex64::new(0.5, 0.0)))
}

/// `k^{∗n}` by repeated convolution.
pub fn convolution_power(k: &GridFunction, n: usize) -> Result<GridFunction> {
    if n == 0 {
        return Err(Error::Parameter("convolution power n must be at least 1".into()));
    }
    let mut acc = k.clone();
    for _ in 1..n {
        acc = convolve(k, &acc, QuadratureRule::auto(k, &acc))?;
    }
    Ok(acc)
}

fn cumulative_trapezoid(f: &GridFunction, weight: impl Fn(f64) -> f64) -> Vec<Complex64> {
    let h = f.grid.step();
    let mut acc = ZERO;
    let mut out = Vec::with_capacity(f.grid.len());
    out.push(ZERO);
    for i in 0..f.grid.intervals() {
        let t0 = i as f64 * h;
        acc += (f.regular_right(i) * weight(t0) + f.regular_left(i + 1) * weight(t0 + h)) * (0.5 * h);
        out.push(acc);
    }
    out
}

/// `(χ∗f)(t) = ∫₀^t f`.
pub fn antiderivative(f: &GridFunction) -> Result<GridFunction> {
    let mut values = cumulative_trapezoid(f, |_| 1.0);
    let h = f.grid.step();
    let leading = f.power().map(|p| PowerTerm::new(p.exponent + 1.0, p.scale));
    if let Some(p) = leading {
        for (i, v) in values.iter_mut().enumerate().skip(1) {
            *v += p.eval(i as f64 * h);
        }
    }
    let mut out = GridFunction::from_values(f.grid, values)?;
    if let Some(p) = leading {
        out = out.with_power(p)?;
    }
    Ok(out)
}

/// `(I∗f)(t) = ∫₀^t (t − s) f(s) ds`.
pub fn second_antiderivative(f: &GridFunction) -> Result<GridFunction> {
    let h = f.grid.step();
    let first = cumulative_trapezoid(f, |_| 1.0);
    let moment = cumulative_trapezoid(f, |s| s);
    let p = f.power();
    let values = (0..f.grid.len())
        .map(|i| {
            let t = i as f64 * h;
            let mut v = first[i] * t - moment[i];
            if let Some(p) = p {
                if i > 0 {
                    v += p.scale * j_alpha(p.exponent + 2.0, t);
                }
            }
            v
        })
        .collect();
    GridFunction::from_values(f.grid, values)
}

/// Central differences inside, one-sided second-order stencils at the ends.
pub fn derivative(f: &GridFunction, order: u8) -> Result<GridFunction> {
    if f.power.is_some() {
        return Err(Error::Usage("cannot difference a function singular at 0".into()));
    }
    let v = &f.values;
    let m = f.grid.intervals();
    let h = f.grid.step();
    let values = match order {
        1 => (0..=m)
            .map(|i| {
                if i == 0 {
                    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
                } else if i == m {
                    (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * h)
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * h)
                }
            })
            .collect(),
        2 => {
            if m < 3 {
                return Err(Error::InvalidGrid("second derivative needs M >= 3".into()));
            }
            let h2 = h * h;
            (0..=m)
                .map(|i| {
                    if i == 0 {
                        (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
                    } else if i == m {
                        (2.0 * v[m] - 5.0 * v[m - 1] + 4.0 * v[m - 2] - v[m - 3]) / h2
                    } else {
                        (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2
                    }
                })
                .collect()
        }
        _ => return Err(Error::Parameter(format!("derivative order {order} not in {{1, 2}}"))),
    };
    GridFunction::from_values(f.grid, values)
}

/// `∫₀^T e^{−λt} f(t) dt`.
pub fn laplace_transform(f: &GridFunction, lambda: Complex64) -> Result<Complex64> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::Parameter(format!("non-finite Laplace argument {lambda}")));
    }
    let h = f.grid.step();
    let e = |i: usize| (-lambda * (i as f64 * h)).exp();
    let mut trap = ZERO;
    let mut pi = ZERO;
    for j in 0..f.support_end().min(f.grid.intervals()) {
        let (e0, e1) = (e(j), e(j + 1));
        trap += f.regular_right(j) * e0 + f.regular_left(j + 1) * e1;
        if let Some(ann) = &f.power {
            pi += e0 * ann.moments.near[j] + e1 * ann.moments.far[j];
        }
    }
    let mut total = trap * (0.5 * h);
    if let Some(ann) = &f.power {
        total += pi * ann.term.scale;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn jalpha(grid: Grid, alpha: f64) -> GridFunction {
        let mut f = GridFunction::from_real_fn(grid, |t| if t > 0.0 { j_alpha(alpha, t) } else { 0.0 });
        if alpha == 1.0 {
            f.values[0] = c(1.0);
            f
        } else {
            f.with_power(PowerTerm::new(alpha, c(1.0))).unwrap()
        }
    }

    #[test]
    fn chi_star_chi_is_identity_map() {
        let g = Grid::new(2.0, 200).unwrap();
        let chi = GridFunction::from_real_fn(g, |_| 1.0);
        let i = convolve(&chi, &chi, QuadratureRule::Trapezoid).unwrap();
        assert!((i.value(150) - c(1.5)).norm() < 1e-13);
    }

    #[test]
    fn annihilator() {
        let g = Grid::new(1.0, 300).unwrap();
        let f = GridFunction::from_real_fn(g, |t| t.sin());
        let z = GridFunction::zeros(g);
        assert_eq!(convolve(&f, &z, QuadratureRule::Trapezoid).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn half_integrals_compose_to_one() {
        let g = Grid::new(1.0, 256).unwrap();
        let j = jalpha(g, 0.5);
        let r = convolve(&j, &j, QuadratureRule::ProductIntegration).unwrap();
        assert!(r.power().is_none());
        for i in [1, 64, 256] {
            assert!((r.value(i) - c(1.0)).norm() < 1e-11, "{i}: {}", r.value(i));
        }
        assert!((r.value(0) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn fft_and_direct_agree() {
        let g = Grid::new(3.0, 300).unwrap();
        let f = GridFunction::from_fn(g, |t| Complex64::new(t.cos(), t * 0.3));
        let k = jalpha(g, 0.3);
        for (a, b) in [(&f, &f), (&k, &f), (&f, &k), (&k, &k)] {
            let rule = QuadratureRule::auto(a, b);
            let fast = convolve(a, b, rule).unwrap();
            let slow = convolve_direct(a, b, rule).unwrap();
            let scale = a.max_abs() * b.max_abs() * 3.0;
            assert!(fast.max_abs_diff(&slow) <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn product_integration_requires_singular_factor() {
        let g = Grid::new(1.0, 10).unwrap();
        let f = GridFunction::from_real_fn(g, |t| t);
        assert!(matches!(convolve(&f, &f, QuadratureRule::ProductIntegration), Err(Error::Usage(_))));
        let other = GridFunction::from_real_fn(Grid::new(1.0, 12).unwrap(), |t| t);
        assert!(matches!(convolve(&f, &other, QuadratureRule::Trapezoid), Err(Error::Shape(_))));
    }

    #[test]
    fn dual_of_exponentials_at_zero() {
        let g = Grid::new(30.0, 6000).unwrap();
        let e = GridFunction::from_real_fn(g, |t| (-t).exp());
        let d = dual_convolve(&e, &e).unwrap();
        assert!((d.value(0) - c(0.5)).norm() < 1e-5);
    }

    #[test]
    fn dual_of_unit_boxes() {
        let g = Grid::new(2.0, 400).unwrap();
        let box01 = GridFunction::from_real_fn(g, |t| if t < 1.0 { 1.0 } else { 0.0 })
            .with_jump(200, c(1.0))
            .unwrap()
            .with_support(0, 200)
            .unwrap();
        let d = dual_convolve(&box01, &box01).unwrap();
        assert!((d.value(50) - c(0.75)).norm() < 1e-13, "{}", d.value(50));
        assert!(d.value(300).norm() == 0.0);
        let cc = cosine_convolve(&box01, &box01).unwrap();
        assert!((cc.value(200) - c(0.5)).norm() < 1e-12, "{}", cc.value(200));
    }

    #[test]
    fn cosine_product_at_zero_is_l2_pairing() {
        let g = Grid::new(2.0, 400).unwrap();
        let f = GridFunction::from_real_fn(g, |t| if t < 1.0 { (std::f64::consts::PI * t).sin() } else { 0.0 });
        let cc = cosine_convolve(&f, &f).unwrap();
        assert!((cc.value(0) - c(0.5)).norm() < 1e-4);
    }

    #[test]
    fn powers_and_antiderivatives() {
        let g = Grid::new(2.0, 400).unwrap();
        let chi = GridFunction::from_real_fn(g, |_| 1.0);
        assert!(convolution_power(&chi, 0).is_err());
        assert_eq!(convolution_power(&chi, 1).unwrap().values(), chi.values());
        let i = convolution_power(&chi, 2).unwrap();
        assert!((i.value(300) - c(1.5)).norm() < 1e-12);
        let a = antiderivative(&chi).unwrap();
        assert!((a.value(400) - c(2.0)).norm() < 1e-13);
        let s = second_antiderivative(&chi).unwrap();
        assert!((s.value(400) - c(2.0)).norm() < 1e-13);
        let j = jalpha(g, 0.5);
        let j4 = convolution_power(&j, 4).unwrap();
        assert!((j4.value(200) - c(1.0)).norm() < 1e-9, "{}", j4.value(200));
    }

    #[test]
    fn derivatives_of_quadratics() {
        let g = Grid::new(2.0, 40).unwrap();
        let q = GridFunction::from_real_fn(g, |t| t * t);
        let d1 = derivative(&q, 1).unwrap();
        let d2 = derivative(&q, 2).unwrap();
        for i in 0..=40 {
            assert!((d1.value(i) - c(2.0 * g.node(i))).norm() < 1e-11);
            assert!((d2.value(i) - c(2.0)).norm() < 1e-9);
        }
        assert!(derivative(&q, 3).is_err());
    }

    #[test]
    fn laplace_of_constant_and_power() {
        let g = Grid::new(40.0, 40_000).unwrap();
        let chi = GridFunction::from_real_fn(g, |_| 1.0);
        let l = laplace_transform(&chi, c(1.0)).unwrap();
        assert!((l - c(1.0)).norm() < 1e-6);
        let j = jalpha(g, 0.5);
        let l = laplace_transform(&j, c(4.0)).unwrap();
        assert!((l - c(0.5)).norm() < 1e-6, "{l}");
        assert!(laplace_transform(&chi, Complex64::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid::new(1.5, 8).unwrap();
        let f = GridFunction::from_fn(g, |t| Complex64::new(t.exp(), -t));
        let back = GridFunction::from_csv_str(&f.to_csv_string()).unwrap();
        assert!(back.grid().same_as(&g));
        assert_eq!(back.values(), f.values());
        assert!(GridFunction::from_csv_str("t,re,im\n").is_err());
    }
}
