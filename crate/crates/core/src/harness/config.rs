//! Run configuration for the verification suites.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::propagator::DiagonalGenerator;

use super::report::Format;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identity,
    Duhamel,
    Extension,
    Calculus,
    Kernel,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Identity, Suite::Duhamel, Suite::Extension, Suite::Calculus, Suite::Kernel];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identity => "identity",
            Suite::Duhamel => "duhamel",
            Suite::Extension => "extension",
            Suite::Calculus => "calculus",
            Suite::Kernel => "kernel",
        }
    }

    /// Default ladder: grid intervals on `[0, T]` for identity, duhamel and
    /// kernel; cells per `ν` (or `τ`) for extension and calculus.
    pub fn default_ladder(self) -> Vec<usize> {
        match self {
            Suite::Identity | Suite::Duhamel => vec![256, 512, 1024],
            Suite::Extension => vec![32, 64, 128],
            Suite::Calculus => vec![32, 64, 128],
            Suite::Kernel => vec![4000, 8000, 16000],
        }
    }

    /// Default interval length: `T` or, for extension and calculus, `ν = τ`.
    pub fn default_t_end(self) -> f64 {
        match self {
            Suite::Identity | Suite::Duhamel => 2.0,
            Suite::Extension | Suite::Calculus => 1.0,
            Suite::Kernel => 40.0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// Structural sabotage used to show that a suite's tolerances can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corruption {
    /// Every `∗` result is delayed by one node.
    ConvolutionIndexShift,
    /// The reflected-history term of the far branch is dropped.
    ExtensionDropTerm,
}

impl FromStr for Corruption {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "index-shift" => Ok(Corruption::ConvolutionIndexShift),
            "drop-term" => Ok(Corruption::ExtensionDropTerm),
            other => Err(Error::Parse(format!("unknown corruption {other:?}; expected index-shift or drop-term"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub suite: Suite,
    pub ladder: Vec<usize>,
    pub t_end: f64,
    /// Replaces the suite's kernel matrix when set.
    pub kernel: Option<Kernel>,
    /// Replaces the suite's generator matrix when set.
    pub generator: Option<DiagonalGenerator>,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// When false, tolerances are not enforced; records still carry values and orders.
    pub calibrate: bool,
    pub corruption: Option<Corruption>,
}

impl RunConfig {
    pub fn new(suite: Suite) -> Self {
        RunConfig {
            suite,
            ladder: suite.default_ladder(),
            t_end: suite.default_t_end(),
            kernel: None,
            generator: None,
            output: None,
            format: Format::Csv,
            calibrate: true,
            corruption: None,
        }
    }

    pub fn with_ladder(mut self, ladder: Vec<usize>) -> Self {
        self.ladder = ladder;
        self
    }

    pub fn with_corruption(mut self, c: Corruption) -> Self {
        self.corruption = Some(c);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.ladder.len() < 2 {
            return Err(Error::Config(format!(
                "grid ladder needs at least 2 rungs to fit an order, got {:?}",
                self.ladder
            )));
        }
        if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("grid ladder must be strictly increasing: {:?}", self.ladder)));
        }
        if self.ladder[0] < 2 {
            return Err(Error::Config("every rung needs at least 2 intervals".into()));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_end)));
        }
        if let Some(k) = &self.kernel {
            k.validate()?;
        }
        Ok(())
    }
}

/// Parses `256,512,1024`.
pub fn parse_ladder(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse().map_err(|_| Error::Parse(format!("bad ladder entry {p:?}"))))
        .collect()
}
