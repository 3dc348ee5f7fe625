use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::descent::Mode;
use crate::error::{Error, Result};
use crate::forms::Curve;
use crate::point::{parse_rational, TorsionList};
use crate::search::SearchBounds;

/// A named one-parameter family of curves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Family {
    /// `y² = x³ − N²x`.
    Congruent(BigInt),
    /// `y² = x³ + (n² − 6n − 3)x² + 16n x`.
    Bremner(BigInt),
    /// Triangles with base/altitude `n`; only `n = 79` is supported.
    Triangle(BigInt),
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.to_string()
    }
}

impl TryFrom<String> for Family {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad family {s:?}, expected congruent:N, bremner:n or triangle:n"));
        let (name, n) = s.split_once(':').ok_or_else(bad)?;
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        match name.trim() {
            "congruent" => Ok(Family::Congruent(n)),
            "bremner" => Ok(Family::Bremner(n)),
            "triangle" => Ok(Family::Triangle(n)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Congruent(n) => write!(f, "congruent:{n}"),
            Family::Bremner(n) => write!(f, "bremner:{n}"),
            Family::Triangle(n) => write!(f, "triangle:{n}"),
        }
    }
}

impl Family {
    pub fn curve(&self) -> Result<Curve> {
        match self {
            Family::Congruent(n) => family_congruent(n),
            Family::Bremner(n) => family_bremner(n),
            Family::Triangle(n) => family_triangle(n).map(|(primary, _)| primary),
        }
    }
}

/// `y² = x³ − N²x`.
pub fn family_congruent(n: &BigInt) -> Result<Curve> {
    if !n.is_positive() {
        return Err(Error::Config(format!("congruent family needs N >= 1, got {n}")));
    }
    Curve::new(0, -(n * n))
}

/// `y² = x³ + (n² − 6n − 3)x² + 16n x`.
pub fn family_bremner(n: &BigInt) -> Result<Curve> {
    let a = n * n - 6 * n - 3;
    Curve::new(a, 16 * n)
}

/// The triangle curve `y² = x³ + (n² + 2)x² + x` and its 2-isogenous partner.
pub fn family_triangle(n: &BigInt) -> Result<(Curve, Curve)> {
    if *n != BigInt::from(79) {
        return Err(Error::Config(format!(
            "triangle family is only available for n = 79, got {n}"
        )));
    }
    let primary = Curve::new(n * n + 2, BigInt::one())?;
    let iso = primary.isogenous();
    Ok((primary, iso))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveSource {
    Raw {
        #[serde(with = "crate::bigser")]
        a: BigInt,
        #[serde(with = "crate::bigser")]
        b: BigInt,
    },
    Family(Family),
}

impl CurveSource {
    pub fn curve(&self) -> Result<Curve> {
        match self {
            CurveSource::Raw { a, b } => Curve::new(a.clone(), b.clone()),
            CurveSource::Family(f) => f.curve(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Structured,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "structured" | "json" => Ok(OutputFormat::Structured),
            _ => Err(Error::Config(format!("unknown output format {s:?}, expected text|structured"))),
        }
    }
}

/// Everything that determines the answer of a run. Two runs with equal keys
/// produce identical reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchKey {
    pub source: CurveSource,
    pub bounds: SearchBounds,
    pub mode: Mode,
    pub torsion_x: TorsionList,
    #[serde(with = "crate::bigser::opt")]
    pub forced_d: Option<BigInt>,
    pub use_isogenous: bool,
    pub isogeny_variants: bool,
    pub factor_hints: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub source: CurveSource,
    pub bounds: SearchBounds,
    pub mode: Mode,
    /// Extra torsion abscissae on the input curve.
    pub torsion_x: TorsionList,
    pub forced_d: Option<BigInt>,
    /// Search the 2-isogenous curve and map the point back.
    pub use_isogenous: bool,
    /// Also search the models with another 2-torsion point at the origin.
    pub isogeny_variants: bool,
    pub factor_hints: Vec<BigUint>,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    pub workers: usize,
    pub output: OutputFormat,
    /// Stop after this many quartic scans (checkpoint and exit).
    pub max_units: Option<u64>,
}

impl RunConfig {
    pub fn new(source: CurveSource) -> Self {
        Self {
            source,
            bounds: SearchBounds::default(),
            mode: Mode::default(),
            torsion_x: TorsionList::default(),
            forced_d: None,
            use_isogenous: false,
            isogeny_variants: false,
            factor_hints: Vec::new(),
            checkpoint: None,
            resume: false,
            workers: 1,
            output: OutputFormat::Text,
            max_units: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        self.source.curve()?;
        if self.resume && self.checkpoint.is_none() {
            return Err(Error::Config("--resume needs --checkpoint".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        if self.max_units == Some(0) {
            return Err(Error::Config("--max-units must be at least 1".into()));
        }
        if let Some(d) = &self.forced_d {
            if d.is_zero() {
                return Err(Error::Config("--force-d must be nonzero".into()));
            }
        }
        Ok(())
    }

    pub fn key(&self) -> SearchKey {
        SearchKey {
            source: self.source.clone(),
            bounds: self.bounds,
            mode: self.mode,
            torsion_x: self.torsion_x.clone(),
            forced_d: self.forced_d.clone(),
            use_isogenous: self.use_isogenous,
            isogeny_variants: self.isogeny_variants,
            factor_hints: self.factor_hints.iter().map(|h| h.to_string()).collect(),
        }
    }
}

/// Comma-separated rationals, e.g. `0,157,-157,1/4`.
pub fn parse_torsion_list(s: &str) -> Result<TorsionList> {
    let mut t = TorsionList::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let x = parse_rational(part).map_err(|_| Error::TorsionList(format!("not a rational number: {part:?}")))?;
        t.push(x);
    }
    Ok(t)
}

/// `A:B`.
pub fn parse_s1(s: &str) -> Result<(u64, u64)> {
    let bad = || Error::Config(format!("bad --s1 {s:?}, expected A:B"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Comma-separated primes.
pub fn parse_factor_hints(s: &str) -> Result<Vec<BigUint>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            BigUint::from_str(p).map_err(|_| Error::Config(format!("bad factor hint {p:?}, expected a positive integer")))
        })
        .collect()
}

pub fn parse_int(s: &str, what: &str) -> Result<BigInt> {
    BigInt::from_str(s.trim()).map_err(|_| Error::Config(format!("{what}: not an integer: {s:?}")))
}
