//! Verification suites: each evaluates a family of identities on every rung
//! of a grid ladder and turns the residuals into calibrated records.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extend::{extend_full, fractional_extend, iterate_doubling, BranchTerm, ExtendOptions, ExtensionRun};
use crate::grid::Grid;
use crate::gridfn::{antiderivative, convolve, dual_convolve, laplace_transform, GridFunction, QuadratureRule};
use crate::homomorphism::CalculusContext;
use crate::kernels::{stable_density, Kernel};
use crate::propagator::{base_cosine, convolve_family, duhamel_residuals, DiagonalGenerator, PropagatorTable};
use crate::quad::j_alpha;
use crate::weyl::{t_prime, TestFunction, WeylOperator};

use super::calibrate::LadderCheck;
use super::config::{Corruption, RunConfig, Suite};
use super::report::{Environment, Record, Report};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Named check evaluated once per rung.
struct Check {
    name: String,
    anchor: &'static str,
    rule: LadderCheck,
}

impl Check {
    fn new(name: impl Into<String>, anchor: &'static str, rule: LadderCheck) -> Self {
        Check { name: name.into(), anchor, rule }
    }
}

/// Evaluates `eval` on every rung in parallel and calibrates each check.
/// `eval` returns one value per entry of `checks`, in order.
fn run_ladder<F>(cfg: &RunConfig, checks: &[Check], eval: F) -> Result<Vec<Record>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync,
{
    let per_rung = cfg.ladder.par_iter().map(|&m| eval(m)).collect::<Result<Vec<_>>>()?;
    let steps: Vec<f64> = cfg.ladder.iter().map(|&m| cfg.t_end / m as f64).collect();
    let mut out = Vec::new();
    for (k, check) in checks.iter().enumerate() {
        let values: Vec<f64> = per_rung.iter().map(|v| v[k]).collect();
        let mut recs = check.rule.records(&check.name, check.anchor, &cfg.ladder, &steps, &values);
        if !cfg.calibrate {
            recs.iter_mut().for_each(|r| r.passed = true);
        }
        out.extend(recs);
    }
    Ok(out)
}

fn environment(cfg: &RunConfig, kernel: String, generator: String) -> Environment {
    Environment {
        grid: cfg.ladder.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(","),
        t_end: cfg.t_end,
        kernel,
        generator,
        version: env!("CARGO_PKG_VERSION").into(),
    }
}

fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.max_abs_diff(b)
}

/// The `∗`-based operations of the identity suite, optionally sabotaged.
struct StarOps {
    shift: bool,
}

impl StarOps {
    fn corrupt(&self, f: GridFunction) -> Result<GridFunction> {
        if !self.shift {
            return Ok(f);
        }
        let n = f.grid().len();
        let values = (0..n).map(|i| if i == 0 { ZERO } else { f.value(i - 1) }).collect();
        GridFunction::from_values(*f.grid(), values)
    }

    fn conv(&self, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
        self.corrupt(convolve(f, g, QuadratureRule::auto(f, g))?)
    }

    fn primitive(&self, f: &GridFunction) -> Result<GridFunction> {
        self.corrupt(antiderivative(f)?)
    }

    fn cosine(&self, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
        let s = self.conv(f, g)?.add(&dual_convolve(f, g)?)?.add(&dual_convolve(g, f)?)?;
        Ok(s.scale(c(0.5)))
    }
}

/// Trapezoid sum of `v(r)` over node indices `lo..=hi`.
fn trapezoid(h: f64, lo: usize, hi: usize, v: impl Fn(usize) -> Complex64) -> Complex64 {
    if hi <= lo {
        return ZERO;
    }
    let inner: Complex64 = (lo + 1..hi).map(&v).sum();
    (inner + (v(lo) + v(hi)) * 0.5) * h
}

const IDENTITY_ANCHORS: [(&str, &str); 10] = [
    ("derivative across convolution", "(φ′∗ψ) = (φ∗ψ′) + ψ(0)φ − φ(0)ψ"),
    ("derivative across dual convolution, left", "(φ′∘ψ) = −φ(0)ψ − (φ∘ψ′)"),
    ("derivative across dual convolution, right", "(ψ∘φ′) = −ψ(0)φ − (ψ′∘φ)"),
    ("cosine convolution, first derivative", "(φ′∗_cψ) = ½[φ∗ψ′ − φ∘ψ′ − ψ′∘φ] − φ(0)ψ"),
    ("cosine convolution, second derivative", "(φ″∗_cψ) = (φ∗_cψ″) + ψ′(0)φ − φ′(0)ψ"),
    (
        "product of primitives, forward",
        "(χ∗g)(t)(χ∗f)(s) = ∫_s^{t+s} g(t+s−r)(χ∗f)(r)dr − ∫_0^t f(t+s−r)(χ∗g)(r)dr",
    ),
    (
        "product of primitives, reflected",
        "(χ∗g)(t)(χ∗f)(s) = ∫_{s−t}^s g(t+r−s)(χ∗f)(r)dr + ∫_0^t f(r+s−t)(χ∗g)(r)dr",
    ),
    ("square of primitive", "[(χ∗f)(t)]² = 2∫_0^t f(r)(χ∗f)(r)dr"),
    ("Weyl power reduction", "W_{k^{∗m}}f = k^{∗(n−m)}∘W_{k^{∗n}}f"),
    ("co-convolution homomorphism", "T′_k(f∘g) = f∘T′_k(g)"),
];

const WEYL_SUPPORT_ANCHOR: &str = "supp f ⊂ [0,a] ⇔ supp W_k f ⊂ [0,a]";

/// Bump pair with nonzero values and slopes at the origin.
fn identity_bumps() -> (TestFunction, TestFunction) {
    (
        TestFunction::new(-0.4, 0.9, 8).expect("valid bump"),
        TestFunction::new(-0.25, 1.1, 8).expect("valid bump"),
    )
}

fn identity_values(ops: &StarOps, grid: &Grid) -> Result<(Vec<f64>, f64)> {
    let (phi_t, psi_t) = identity_bumps();
    let d = |f: &TestFunction, k| f.sample(grid, k);
    let (phi, phi1, phi2) = (d(&phi_t, 0)?, d(&phi_t, 1)?, d(&phi_t, 2)?);
    let (psi, psi1, psi2) = (d(&psi_t, 0)?, d(&psi_t, 1)?, d(&psi_t, 2)?);
    let (p0, p1) = (c(phi_t.value_at(0.0)), c(phi_t.derivative_at(1, 0.0)));
    let (q0, q1) = (c(psi_t.value_at(0.0)), c(psi_t.derivative_at(1, 0.0)));
    let mut out = Vec::with_capacity(IDENTITY_ANCHORS.len());

    let lhs = ops.conv(&phi1, &psi)?;
    let rhs = ops.conv(&phi, &psi1)?.add_scaled(&phi, q0)?.add_scaled(&psi, -p0)?;
    out.push(max_diff(&lhs, &rhs));

    let lhs = dual_convolve(&phi1, &psi)?;
    let rhs = dual_convolve(&phi, &psi1)?.scale(c(-1.0)).add_scaled(&psi, -p0)?;
    out.push(max_diff(&lhs, &rhs));

    let lhs = dual_convolve(&psi, &phi1)?;
    let rhs = dual_convolve(&psi1, &phi)?.scale(c(-1.0)).add_scaled(&phi, -q0)?;
    out.push(max_diff(&lhs, &rhs));

    let lhs = ops.cosine(&phi1, &psi)?;
    let bracket = ops.conv(&phi, &psi1)?.sub(&dual_convolve(&phi, &psi1)?)?.sub(&dual_convolve(&psi1, &phi)?)?;
    let rhs = bracket.scale(c(0.5)).add_scaled(&psi, -p0)?;
    out.push(max_diff(&lhs, &rhs));

    let lhs = ops.cosine(&phi2, &psi)?;
    let rhs = ops.cosine(&phi, &psi2)?.add_scaled(&phi, q1)?.add_scaled(&psi, -p1)?;
    out.push(max_diff(&lhs, &rhs));

    let (a, b) = primitive_product_residuals(ops, grid)?;
    out.push(a);
    out.push(b);
    out.push(square_of_primitive(ops, grid)?);
    out.push(weyl_power_reduction(grid)?);
    out.push(co_convolution_homomorphism(grid)?);

    Ok((out, weyl_support_excess(grid)?))
}

/// Residuals of both primitive-product identities for `f = g = e^{−s}`,
/// each also compared with `(1 − e^{−t})(1 − e^{−s})`.
fn primitive_product_residuals(ops: &StarOps, grid: &Grid) -> Result<(f64, f64)> {
    let h = grid.step();
    let f = GridFunction::from_real_fn(*grid, |t| (-t).exp());
    let prim = ops.primitive(&f)?;
    let t_end = grid.t_end();
    let pairs = [(0.125, 0.25), (0.25, 0.5), (0.125, 0.625), (0.25, 0.25), (0.375, 0.5), (0.5, 0.5)];
    let (mut ra, mut rb) = (0.0f64, 0.0f64);
    for (ft, fs) in pairs {
        let (Some(it), Some(is)) = (grid.index_of(ft * t_end), grid.index_of(fs * t_end)) else {
            continue;
        };
        let lhs = prim.value(it) * prim.value(is);
        let exact = (1.0 - (-(it as f64) * h).exp()) * (1.0 - (-(is as f64) * h).exp());
        let a = trapezoid(h, is, it + is, |r| f.value(it + is - r) * prim.value(r))
            - trapezoid(h, 0, it, |r| f.value(it + is - r) * prim.value(r));
        let b = trapezoid(h, is - it, is, |r| f.value(it + r - is) * prim.value(r))
            + trapezoid(h, 0, it, |r| f.value(r + is - it) * prim.value(r));
        ra = ra.max((lhs - a).norm()).max((lhs - exact).norm());
        rb = rb.max((lhs - b).norm()).max((lhs - exact).norm());
    }
    Ok((ra, rb))
}

fn square_of_primitive(ops: &StarOps, grid: &Grid) -> Result<f64> {
    let h = grid.step();
    let f = GridFunction::from_real_fn(*grid, |t| (3.0 * t).cos() + 0.5 * (7.0 * t).sin() + (-t).exp());
    let prim = ops.primitive(&f)?;
    let mut acc = ZERO;
    let mut worst = 0.0f64;
    for i in 1..grid.len() {
        acc += (f.value(i - 1) * prim.value(i - 1) + f.value(i) * prim.value(i)) * (0.5 * h);
        worst = worst.max((prim.value(i) * prim.value(i) - acc * 2.0).norm());
    }
    Ok(worst)
}

fn weyl_power_reduction(grid: &Grid) -> Result<f64> {
    let f = TestFunction::new(0.3, 1.2, 8)?;
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0] {
        for (n, m) in [(2usize, 1usize), (3, 1), (3, 2)] {
            let wm = WeylOperator::new(Kernel::Jalpha(m as f64 * alpha))?.apply_test(&f, grid)?;
            let wn = WeylOperator::new(Kernel::Jalpha(n as f64 * alpha))?.apply_test(&f, grid)?;
            let rhs = t_prime(&Kernel::Jalpha((n - m) as f64 * alpha), &wn)?;
            worst = worst.max(max_diff(&wm, &rhs));
        }
    }
    Ok(worst)
}

fn co_convolution_homomorphism(grid: &Grid) -> Result<f64> {
    let f = TestFunction::new(-0.2, 0.7, 8)?.sample(grid, 0)?;
    let g = TestFunction::new(0.3, 1.2, 8)?.sample(grid, 0)?;
    let mut worst = 0.0f64;
    for k in [Kernel::Jalpha(0.5), Kernel::Jalpha(1.0), Kernel::CharInterval] {
        let lhs = t_prime(&k, &dual_convolve(&f, &g)?)?;
        let rhs = dual_convolve(&f, &t_prime(&k, &g)?)?;
        worst = worst.max(max_diff(&lhs, &rhs));
    }
    Ok(worst)
}

/// Cells by which a Weyl image reaches past the support of its argument.
fn weyl_support_excess(grid: &Grid) -> Result<f64> {
    let f = TestFunction::new(0.3, 1.2, 8)?;
    let (_, hi) = f.support_nodes(grid)?;
    let mut excess = 0usize;
    for alpha in [0.5, 1.0, 1.5] {
        let w = WeylOperator::new(Kernel::Jalpha(alpha))?.apply_test(&f, grid)?;
        if let Some(last) = (0..grid.len()).rev().find(|&i| w.value(i).norm() > 0.0) {
            excess = excess.max(last.saturating_sub(hi));
        }
    }
    Ok(excess as f64)
}

/// Convolution-calculus and Weyl identities on bumps, fitted to order 2.
pub fn run_identity_suite(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let ops = StarOps { shift: cfg.corruption == Some(Corruption::ConvolutionIndexShift) };
    let rule = LadderCheck::order2().with_order_window(1.7, 2.3);
    let checks: Vec<Check> = IDENTITY_ANCHORS.iter().map(|(n, a)| Check::new(*n, a, rule)).collect();
    let support = std::sync::Mutex::new(Vec::new());
    let records = run_ladder(cfg, &checks, |m| {
        let grid = Grid::new(cfg.t_end, m)?;
        let (values, excess) = identity_values(&ops, &grid)?;
        support.lock().expect("no panics while holding the lock").push((m, excess));
        Ok(values)
    })?;
    let mut report = Report::new("identity", environment(cfg, "jalpha:0.5,jalpha:1,chi01".into(), "-".into()));
    report.extend(records);
    let mut support = support.into_inner().expect("no panics while holding the lock");
    support.sort_by_key(|s| s.0);
    for (m, excess) in support {
        report.push(Record::at_most("Weyl support", WEYL_SUPPORT_ANCHOR, Some(m), excess, 1.0));
    }
    Ok(report)
}

const DUHAMEL_ANCHOR: &str = "a²(I∗C_k)(t) = C_k(t) − (χ∗k)(t)";

fn default_kernels() -> Vec<Kernel> {
    vec![Kernel::Jalpha(1.0), Kernel::Jalpha(0.5), Kernel::CharInterval]
}

fn default_generator() -> DiagonalGenerator {
    "0,1,2i,1+1i".parse().expect("literal generator")
}

fn fmt_a(a: Complex64) -> String {
    match (a.re, a.im) {
        (re, 0.0) => format!("{re}"),
        (0.0, im) => format!("{im}i"),
        (re, im) => format!("{re}{im:+}i"),
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

const PROBES: [f64; 5] = [0.25, 0.375, 0.5, 0.75, 1.0];

/// Duhamel residual of `k ∗ cosh(a·)` at five probe nodes per (kernel, mode).
pub fn run_duhamel_suite(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let kernels = cfg.kernel.clone().map(|k| vec![k]).unwrap_or_else(default_kernels);
    let gen = cfg.generator.clone().unwrap_or_else(default_generator);
    let rule = LadderCheck::order2().with_floor(1e-11);
    let mut checks = Vec::new();
    for k in &kernels {
        for a in gen.spectrum() {
            for p in PROBES {
                checks.push(Check::new(format!("k={k} a={} t={}", fmt_a(*a), p * cfg.t_end), DUHAMEL_ANCHOR, rule));
            }
        }
    }
    let records = run_ladder(cfg, &checks, |m| {
        let grid = Grid::new(cfg.t_end, m)?;
        let base = base_cosine(&gen, &grid);
        let mut out = Vec::new();
        for k in &kernels {
            let table = convolve_family(&base, k)?;
            for mode in 0..gen.dimension() {
                let res = duhamel_residuals(&table, mode)?;
                out.extend(PROBES.iter().map(|p| res[(p * m as f64).round() as usize]));
            }
        }
        Ok(out)
    })?;
    let mut report = Report::new("duhamel", environment(cfg, join(&kernels), gen.to_string()));
    report.extend(records);
    Ok(report)
}

/// `(j_β ∗ cosh(a·))(t) = Σ_k a^{2k} t^{2k+β} / Γ(2k+β+1)`.
pub fn smoothed_cosh(beta: f64, a: Complex64, t: f64) -> Complex64 {
    if t <= 0.0 {
        return ZERO;
    }
    let a2t2 = a * a * t * t;
    let mut term = c(j_alpha(beta + 1.0, t));
    let mut sum = term;
    for k in 0..400 {
        let kf = k as f64;
        term *= a2t2 / ((2.0 * kf + beta + 1.0) * (2.0 * kf + beta + 2.0));
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// `(χ_{(0,1)}^{∗n} ∗ cosh(a·))(t)`, from `χ_{(0,1)}^{∗n} = Σ_k (−1)^k C(n,k) j_n(· − k)`.
pub fn box_power_cosh(n: usize, a: Complex64, t: f64) -> Complex64 {
    let mut binom = 1.0;
    let mut sum = ZERO;
    for k in 0..=n {
        if k > 0 {
            binom *= (n + 1 - k) as f64 / k as f64;
        }
        let u = t - k as f64;
        if u > 0.0 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += smoothed_cosh(n as f64, a, u) * (sign * binom);
        }
    }
    sum
}

/// Closed form of `C_{k^{∗n}}(t) = (k^{∗n} ∗ cosh(a·))(t)` for the suite kernels.
pub fn propagator_oracle(k: &Kernel, n: usize, a: Complex64, t: f64) -> Result<Complex64> {
    match k {
        Kernel::Jalpha(alpha) => Ok(smoothed_cosh(alpha * n as f64, a, t)),
        Kernel::CharInterval => Ok(box_power_cosh(n, a, t)),
        other => Err(Error::UnsupportedKernel(format!("no closed-form propagator for {other}"))),
    }
}

fn oracle_error(table: &PropagatorTable, k: &Kernel, n: usize, mode: usize) -> Result<f64> {
    let a = table.generator().spectrum()[mode];
    let col = table.column(mode)?;
    let grid = table.grid();
    let mut worst = 0.0f64;
    for i in 1..grid.len() {
        worst = worst.max((col.value(i) - propagator_oracle(k, n, a, grid.node(i))?).norm());
    }
    Ok(worst)
}

fn table_duhamel(table: &PropagatorTable) -> Result<f64> {
    let mut worst = 0.0f64;
    for mode in 0..table.dimension() {
        worst = duhamel_residuals(table, mode)?.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

fn table_diff(a: &PropagatorTable, b: &PropagatorTable) -> Result<f64> {
    let mut worst = 0.0f64;
    for mode in 0..a.dimension() {
        worst = worst.max(a.column(mode)?.max_abs_diff(b.column(mode)?));
    }
    Ok(worst)
}

const EXTENSION_STEPS: usize = 3;

/// Extends `k ∗ cosh` from `[0, ν]` to `[0, (n+1)ν]`.
pub fn extension_run(base: &PropagatorTable, k: &Kernel, n_max: usize, opts: ExtendOptions) -> Result<ExtensionRun> {
    match k {
        Kernel::Jalpha(alpha) => fractional_extend(base, *alpha, n_max, opts),
        other => extend_full(base, other, n_max, opts),
    }
}

/// Extended tables against closed-form propagators, seam mismatch, the
/// Duhamel residual of each extension and the doubling overlap.
pub fn run_extension_suite(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let kernels = cfg.kernel.clone().map(|k| vec![k]).unwrap_or_else(default_kernels);
    let gen = cfg.generator.clone().unwrap_or_else(default_generator);
    let opts = ExtendOptions {
        skip_term: (cfg.corruption == Some(Corruption::ExtensionDropTerm)).then_some(BranchTerm::ReflectedHistory),
    };
    let rule = LadderCheck::order2().with_floor(1e-10);
    let mut checks = Vec::new();
    for k in &kernels {
        for n in 1..=EXTENSION_STEPS {
            for a in gen.spectrum() {
                checks.push(Check::new(
                    format!("k={k} a={} n={n} error", fmt_a(*a)),
                    "C_{k^{∗(n+1)}} = k^{∗(n+1)} ∗ cosh(a·) on [0,(n+1)ν]",
                    rule,
                ));
            }
            checks.push(Check::new(
                format!("k={k} n={n} seam"),
                "near and far branches agree at t = nν",
                rule,
            ));
            checks.push(Check::new(format!("k={k} n={n} duhamel"), DUHAMEL_ANCHOR, rule));
        }
        checks.push(Check::new(
            format!("k={k} doubling overlap"),
            "iterated doubling = one-shot extension on [0,4ν]",
            rule,
        ));
    }
    let records = run_ladder(cfg, &checks, |j| {
        let base = base_cosine(&gen, &Grid::new(cfg.t_end, j)?);
        let mut out = Vec::new();
        for k in &kernels {
            let run = extension_run(&base, k, EXTENSION_STEPS, opts)?;
            for n in 1..=EXTENSION_STEPS {
                let table = &run.tables[n];
                for mode in 0..gen.dimension() {
                    out.push(oracle_error(table, k, n + 1, mode)?);
                }
                out.push(run.seams[n - 1]);
                out.push(table_duhamel(table)?);
            }
            let doubled = iterate_doubling(&base, k, 2)?;
            out.push(table_diff(&doubled, &run.tables[3])?);
        }
        Ok(out)
    })?;
    let mut report = Report::new("extension", environment(cfg, join(&kernels), gen.to_string()));
    report.extend(records);
    Ok(report)
}

/// The bumps of the calculus suite.
pub fn calculus_bumps() -> [TestFunction; 2] {
    [TestFunction::new(0.2, 0.8, 8).expect("valid bump"), TestFunction::new(0.5, 1.5, 8).expect("valid bump")]
}

const CALCULUS_POWERS: usize = 4;
const SMOOTHING: [f64; 2] = [0.25, 1.0];

/// Multiplicativity, generator identity, well-definedness and smoothing
/// invariance of the functional calculus for `j_α` kernels.
pub fn run_calculus_suite(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let kernels = match &cfg.kernel {
        Some(k) => vec![k.clone()],
        None => vec![Kernel::Jalpha(1.0), Kernel::Jalpha(0.5)],
    };
    let gen = cfg.generator.clone().unwrap_or_else(|| "0,1,2i".parse().expect("literal generator"));
    let bumps = calculus_bumps();
    let pairs = [(0usize, 0usize), (0, 1), (1, 1)];
    let rule = LadderCheck::order2().with_floor(1e-11);
    let mut checks = Vec::new();
    for k in &kernels {
        for (i, j) in pairs {
            checks.push(Check::new(
                format!("k={k} multiplicativity {} * {}", bumps[i], bumps[j]),
                "𝒞(φ∗_cψ) = 𝒞(φ)𝒞(ψ)",
                rule.with_order_window(1.7, f64::INFINITY),
            ));
        }
        for b in &bumps {
            checks.push(Check::new(
                format!("k={k} generator {b}"),
                "A𝒞(f) = 𝒞(f″) + f′(0)",
                rule.with_order_window(1.7, f64::INFINITY),
            ));
            checks.push(Check::new(format!("k={k} well-defined {b}"), "𝒞(f) independent of n with supp f ⊂ [0,nτ]", rule));
            for beta in SMOOTHING {
                checks.push(Check::new(
                    format!("k={k} smoothing beta={beta} {b}"),
                    "𝒞_{k∗l}(f) = 𝒞_k(f), l = j_β",
                    rule.with_exponent((1.0 + beta).min(2.0)),
                ));
            }
        }
    }
    let extras = std::sync::Mutex::new(Vec::new());
    let records = run_ladder(cfg, &checks, |steps| {
        let mut out = Vec::new();
        let mut linearity = 0.0f64;
        let mut missing = 0usize;
        for k in &kernels {
            let ctx = CalculusContext::new(k, &gen, cfg.t_end, steps, CALCULUS_POWERS)?;
            for (i, j) in pairs {
                out.push(ctx.multiplicativity_residual(&bumps[i], &bumps[j])?);
            }
            for b in &bumps {
                out.push(ctx.generator_residual(b)?);
                out.push(ctx.well_definedness_gap(b)?);
                for beta in SMOOTHING {
                    out.push(ctx.kernel_smoothing_invariance(&Kernel::Jalpha(beta), b)?);
                }
            }
            linearity = linearity.max(ctx.linearity_residual(
                &bumps[0],
                &bumps[1],
                Complex64::new(0.7, -1.3),
                Complex64::new(-2.0, 0.5),
            )?);
            let tests = [
                bumps[0],
                bumps[1],
                TestFunction::new(0.0, 1.0, 8)?,
                TestFunction::new(1.0, 2.5, 8)?,
            ];
            let witnesses = ctx.nondegeneracy_witnesses(&tests, NONDEGENERACY_THRESHOLD)?;
            missing += witnesses.iter().filter(|w| w.is_none()).count();
        }
        extras.lock().expect("no panics while holding the lock").push((steps, linearity, missing));
        Ok(out)
    })?;
    let mut report = Report::new("calculus", environment(cfg, join(&kernels), gen.to_string()));
    report.extend(records);
    let mut extras = extras.into_inner().expect("no panics while holding the lock");
    extras.sort_by_key(|e| e.0);
    for (m, lin, missing) in extras {
        report.push(Record::at_most("linearity", "𝒞(xf + yg) = x𝒞(f) + y𝒞(g)", Some(m), lin, 1e-12));
        report.push(Record::at_most(
            "non-degeneracy: modes without witness",
            "∩ ker 𝒞(θ) = {0}",
            Some(m),
            missing as f64,
            0.0,
        ));
    }
    Ok(report)
}

/// Witness threshold: ten times the loosest calibrated calculus tolerance seen on the default ladder.
const NONDEGENERACY_THRESHOLD: f64 = 1e-4;

const KERNEL_DELTAS: [f64; 3] = [0.3, 0.5, 0.7];

fn kernel_lambdas() -> [Complex64; 3] {
    [c(1.0), c(2.0), Complex64::new(1.0, 1.0)]
}

/// Stable-density transforms, the closed form at `δ = ½`, and subordination of `χ`.
pub fn run_kernel_suite(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let mut checks = Vec::new();
    for d in KERNEL_DELTAS {
        for l in kernel_lambdas() {
            let trunc = (-l.re * cfg.t_end).exp();
            checks.push(Check::new(
                format!("K_{d} transform at λ={}", fmt_a(l)),
                "∫_0^∞ e^{−λt} K_δ(t) dt = e^{−λ^δ}",
                LadderCheck::order2().with_offset(trunc).with_floor(1e-13),
            ));
        }
    }
    let records = run_ladder(cfg, &checks, |m| {
        let grid = Grid::new(cfg.t_end, m)?;
        let mut out = Vec::new();
        for d in KERNEL_DELTAS {
            let sample = Kernel::kdelta(d)?.sample(&grid)?;
            for l in kernel_lambdas() {
                out.push((laplace_transform(&sample, l)? - (-l.powf(d)).exp()).norm());
            }
        }
        Ok(out)
    })?;
    let mut report = Report::new("kernel", environment(cfg, "kdelta:0.3;kdelta:0.5;kdelta:0.7".into(), "-".into()));
    report.extend(records);
    report.push(Record::at_most(
        "K_0.5 closed form, max relative error on [0.05, 5]",
        "K_{1/2}(t) = t^{−3/2} e^{−1/(4t)} / (2√π)",
        None,
        half_stable_error(),
        1e-10,
    ));
    report.push(Record::at_most(
        "subordinated χ against j_0.5, max relative error",
        "(2/√(πt)) ∫_0^∞ u e^{−u²} du = j_{1/2}(t)",
        Some(SUBORDINATION_INTERVALS),
        subordination_error()?,
        1e-10,
    ));
    Ok(report)
}

fn half_stable_error() -> f64 {
    (0..=1000)
        .map(|i| 0.05 + 4.95 * i as f64 / 1000.0)
        .map(|t| {
            let exact = t.powf(-1.5) * (-0.25 / t).exp() / (2.0 * std::f64::consts::PI.sqrt());
            ((stable_density(0.5, t) - exact) / exact).abs()
        })
        .fold(0.0, f64::max)
}

const SUBORDINATION_INTERVALS: usize = 64;

fn subordination_error() -> Result<f64> {
    let grid = Grid::new(2.0, SUBORDINATION_INTERVALS)?;
    let sub = Kernel::subordinated(Kernel::Jalpha(1.0)).sample(&grid)?;
    Ok((1..grid.len())
        .map(|i| {
            let exact = j_alpha(0.5, grid.node(i));
            ((sub.value(i) - exact) / exact).norm()
        })
        .fold(0.0, f64::max))
}

/// Single calculus identity selected from the CLI.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CalculusCheck {
    Multiplicativity,
    Generator,
    Smoothing(f64),
}

impl std::str::FromStr for CalculusCheck {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mult" => Ok(CalculusCheck::Multiplicativity),
            "gen" => Ok(CalculusCheck::Generator),
            "smooth" => Ok(CalculusCheck::Smoothing(0.25)),
            other => Err(Error::Parse(format!("unknown check {other:?}; expected mult, gen or smooth"))),
        }
    }
}

/// One calculus residual on the ladder of `cfg`; `psi` defaults to `f` for
/// the multiplicativity check.
pub fn run_calculus_check(cfg: &RunConfig, check: CalculusCheck, f: &TestFunction, psi: Option<&TestFunction>) -> Result<Report> {
    cfg.validate()?;
    let k = cfg.kernel.clone().unwrap_or(Kernel::Jalpha(1.0));
    let gen = cfg.generator.clone().unwrap_or_else(|| "1".parse().expect("literal generator"));
    let psi = psi.unwrap_or(f);
    let needed = match check {
        CalculusCheck::Multiplicativity => f.end() + psi.end(),
        _ => f.end(),
    };
    let powers = ((needed / cfg.t_end) - 1e-9).ceil().max(1.0) as usize + 1;
    let (name, anchor, rule) = match check {
        CalculusCheck::Multiplicativity => (format!("multiplicativity {f} * {psi}"), "𝒞(φ∗_cψ) = 𝒞(φ)𝒞(ψ)", LadderCheck::order2()),
        CalculusCheck::Generator => (format!("generator {f}"), "A𝒞(f) = 𝒞(f″) + f′(0)", LadderCheck::order2()),
        CalculusCheck::Smoothing(beta) => (
            format!("smoothing beta={beta} {f}"),
            "𝒞_{k∗l}(f) = 𝒞_k(f), l = j_β",
            LadderCheck::order2().with_exponent((1.0 + beta).min(2.0)),
        ),
    };
    let checks = [Check::new(name, anchor, rule.with_floor(1e-11))];
    let records = run_ladder(cfg, &checks, |steps| {
        let ctx = CalculusContext::new(&k, &gen, cfg.t_end, steps, powers)?;
        let v = match check {
            CalculusCheck::Multiplicativity => ctx.multiplicativity_residual(f, psi)?,
            CalculusCheck::Generator => ctx.generator_residual(f)?,
            CalculusCheck::Smoothing(beta) => ctx.kernel_smoothing_invariance(&Kernel::Jalpha(beta), f)?,
        };
        Ok(vec![v])
    })?;
    let mut report = Report::new("calculus", environment(cfg, k.to_string(), gen.to_string()));
    report.extend(records);
    Ok(report)
}

pub fn run_suite(cfg: &RunConfig) -> Result<Report> {
    match cfg.suite {
        Suite::Identity => run_identity_suite(cfg),
        Suite::Duhamel => run_duhamel_suite(cfg),
        Suite::Extension => run_extension_suite(cfg),
        Suite::Calculus => run_calculus_suite(cfg),
        Suite::Kernel => run_kernel_suite(cfg),
    }
}
