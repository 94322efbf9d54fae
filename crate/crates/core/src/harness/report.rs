//! Check records and report emission (CSV and JSON).

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One check outcome. `value` must lie in `[lower, upper]` (missing bounds are open).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    /// The identity or bound being checked, as a formula.
    pub anchor: String,
    /// Grid intervals of the rung, when the check belongs to one.
    pub intervals: Option<usize>,
    #[serde(with = "nullable_f64")]
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Fitted convergence order of the ladder this record belongs to.
    pub order: Option<f64>,
    pub passed: bool,
}

impl Record {
    pub fn at_most(name: &str, anchor: &str, intervals: Option<usize>, value: f64, upper: f64) -> Self {
        Record {
            name: name.into(),
            anchor: anchor.into(),
            intervals,
            value,
            lower: None,
            upper: Some(upper),
            order: None,
            passed: value <= upper,
        }
    }

    pub fn at_least(name: &str, anchor: &str, intervals: Option<usize>, value: f64, lower: f64) -> Self {
        Record {
            name: name.into(),
            anchor: anchor.into(),
            intervals,
            value,
            lower: Some(lower),
            upper: None,
            order: None,
            passed: value >= lower,
        }
    }

    pub fn within(name: &str, anchor: &str, intervals: Option<usize>, value: f64, lower: f64, upper: f64) -> Self {
        Record {
            name: name.into(),
            anchor: anchor.into(),
            intervals,
            value,
            lower: Some(lower),
            upper: Some(upper),
            order: None,
            passed: (lower..=upper).contains(&value),
        }
    }

    pub fn with_order(mut self, order: Option<f64>) -> Self {
        self.order = order;
        self
    }

    pub fn with_passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

/// What a report was computed from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub grid: String,
    pub t_end: f64,
    pub kernel: String,
    pub generator: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub suite: String,
    pub environment: Environment,
    pub records: Vec<Record>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown format {other:?}; expected csv or json"))),
        }
    }
}

impl Report {
    pub fn new(suite: &str, environment: Environment) -> Self {
        Report { schema: SCHEMA_VERSION, suite: suite.into(), environment, records: Vec::new() }
    }

    pub fn push(&mut self, record: Record) {
        self.records.push(record);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = Record>) {
        self.records.extend(records);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.passed)
    }

    /// Records whose name starts with `prefix`.
    pub fn matching<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.name.starts_with(prefix))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Columns `suite,name,anchor,intervals,value,lower,upper,order,passed`,
    /// preceded by `#` lines carrying the environment.
    pub fn to_csv(&self) -> Result<String> {
        let env = &self.environment;
        let mut out = format!(
            "# schema={} suite={} version={}\n# grid={} T={} kernel={} generator={}\n",
            self.schema, self.suite, env.version, env.grid, env.t_end, env.kernel, env.generator
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let wrap = |e: csv::Error| Error::csv("<report>", e);
        w.write_record(["suite", "name", "anchor", "intervals", "value", "lower", "upper", "order", "passed"])
            .map_err(wrap)?;
        for r in &self.records {
            w.write_record([
                self.suite.clone(),
                r.name.clone(),
                r.anchor.clone(),
                r.intervals.map(|m| m.to_string()).unwrap_or_default(),
                r.value.to_string(),
                opt(r.lower),
                opt(r.upper),
                opt(r.order),
                r.passed.to_string(),
            ])
            .map_err(wrap)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("<report>", e.into_error()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv writer emits the UTF-8 it was given"));
        Ok(out)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        let text = self.render(format)?;
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    }

    /// Merge another report's records, prefixing their names with its suite.
    pub fn absorb(&mut self, other: Report) {
        let suite = other.suite;
        self.records.extend(other.records.into_iter().map(|mut r| {
            r.name = format!("{suite}: {}", r.name);
            r
        }));
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            let mark = if r.passed { "PASS" } else { "FAIL" };
            let rung = r.intervals.map(|m| format!(" M={m}")).unwrap_or_default();
            let bounds = match (r.lower, r.upper) {
                (Some(lo), Some(hi)) => format!("in [{lo:.3}, {hi:.3}]"),
                (None, Some(hi)) => format!("<= {hi:.3e}"),
                (Some(lo), None) => format!(">= {lo:.3e}"),
                (None, None) => String::new(),
            };
            writeln!(f, "[{mark}] {}{rung}: {:.4e} {bounds}", r.name, r.value)?;
        }
        let failed = self.failures().count();
        write!(f, "{}: {} checks, {} failed", self.suite, self.records.len(), failed)
    }
}

/// `NaN` round-trips through JSON as `null`.
mod nullable_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo", Environment { grid: "256,512".into(), t_end: 2.0, ..Default::default() });
        r.push(Record::at_most("a", "f∗g = g∗f", Some(256), 1e-9, 1e-8).with_order(Some(2.01)));
        r.push(Record::within("a order", "f∗g = g∗f", None, f64::NAN, 1.7, 2.3).with_passed(true));
        r
    }

    #[test]
    fn json_round_trip_keeps_schema() {
        let r = sample();
        let text = r.to_json().unwrap();
        assert!(text.contains("\"schema\": 1"));
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back.records[0], r.records[0]);
        assert!(back.records[1].value.is_nan());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let text = sample().to_csv().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# schema=1"));
        assert_eq!(lines[2], "suite,name,anchor,intervals,value,lower,upper,order,passed");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn failure_is_reported() {
        let mut r = sample();
        assert!(r.passed());
        r.push(Record::at_least("growth", "x", None, -1.0, 0.0));
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }
}
