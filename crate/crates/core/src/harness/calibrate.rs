//! Self-calibrating `C·h^p` tolerances over a grid ladder.

use super::report::Record;

/// Measures `C = e₀/h₀^p` on the coarsest rung and enforces
/// `offset + max(slack·C·h^p, floor)` on every rung.
#[derive(Clone, Copy, Debug)]
pub struct LadderCheck {
    pub exponent: f64,
    pub slack: f64,
    /// Absolute rounding floor; residuals below it are treated as exact.
    pub floor: f64,
    /// Known error budget that does not shrink with `h` (truncation).
    pub offset: f64,
    /// Accepted range for the fitted order, when the check asserts one.
    pub order_window: Option<(f64, f64)>,
}

impl LadderCheck {
    pub fn order2() -> Self {
        LadderCheck { exponent: 2.0, slack: 1.5, floor: 1e-12, offset: 0.0, order_window: None }
    }

    pub fn with_exponent(mut self, p: f64) -> Self {
        self.exponent = p;
        self
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_order_window(mut self, lo: f64, hi: f64) -> Self {
        self.order_window = Some((lo, hi));
        self
    }

    pub fn tolerances(&self, steps: &[f64], values: &[f64]) -> Vec<f64> {
        let (Some(&h0), Some(&e0)) = (steps.first(), values.first()) else {
            return Vec::new();
        };
        let c = (e0 - self.offset).max(0.0) / h0.powf(self.exponent);
        steps
            .iter()
            .map(|h| self.offset + (self.slack * c * h.powf(self.exponent)).max(self.floor))
            .collect()
    }

    /// Least-squares slope of `ln e` against `ln h` over rungs clear of the floor.
    pub fn fit_order(&self, steps: &[f64], values: &[f64]) -> Option<f64> {
        let pts: Vec<(f64, f64)> = steps
            .iter()
            .zip(values)
            .filter(|(_, &v)| v - self.offset > 10.0 * self.floor)
            .map(|(h, v)| (h.ln(), (v - self.offset).ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
        let (sxy, sxx) = pts
            .iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
        Some(sxy / sxx)
    }

    /// One record per rung, plus an order record when an order window is set.
    ///
    /// A ladder whose residuals all sit at the floor has no measurable order;
    /// its order record passes with value `NaN` serialized as null.
    pub fn records(&self, name: &str, anchor: &str, rungs: &[usize], steps: &[f64], values: &[f64]) -> Vec<Record> {
        let tol = self.tolerances(steps, values);
        let order = self.fit_order(steps, values);
        let mut out: Vec<Record> = rungs
            .iter()
            .zip(values.iter().zip(&tol))
            .map(|(&m, (&v, &t))| Record::at_most(name, anchor, Some(m), v, t).with_order(order))
            .collect();
        if let Some((lo, hi)) = self.order_window {
            let all_at_floor = values.iter().all(|&v| v - self.offset <= 10.0 * self.floor);
            let label = format!("{name} order");
            let bounded = |v: f64| {
                if hi.is_finite() {
                    Record::within(&label, anchor, None, v, lo, hi)
                } else {
                    Record::at_least(&label, anchor, None, v, lo)
                }
            };
            let rec = match order {
                Some(p) => bounded(p),
                None => bounded(f64::NAN).with_passed(all_at_floor),
            };
            out.push(rec.with_order(order));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_second_order_passes() {
        let steps = [0.1, 0.05, 0.025];
        let values: Vec<f64> = steps.iter().map(|h| 3.0 * h * h).collect();
        let check = LadderCheck::order2().with_order_window(1.7, 2.3);
        let recs = check.records("x", "x", &[10, 20, 40], &steps, &values);
        assert!(recs.iter().all(|r| r.passed));
        assert!((check.fit_order(&steps, &values).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn first_order_fails() {
        let steps = [0.1, 0.05, 0.025];
        let values: Vec<f64> = steps.iter().map(|h| 3.0 * h).collect();
        let recs = LadderCheck::order2().records("x", "x", &[10, 20, 40], &steps, &values);
        assert!(recs[0].passed);
        assert!(!recs[1].passed && !recs[2].passed);
    }

    #[test]
    fn floor_absorbs_rounding() {
        let steps = [0.1, 0.05];
        let values = [1e-15, 3e-15];
        let recs = LadderCheck::order2().with_order_window(1.7, 2.3).records("x", "x", &[1, 2], &steps, &values);
        assert!(recs.iter().all(|r| r.passed));
    }
}
