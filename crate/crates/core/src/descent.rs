//! The 4-descent and 8-descent drivers.
//!
//! A run walks a fixed enumeration: model variants, then conic bands `s1`
//! with the divisors `d` inside each band, then the `k₀` equation, the
//! quartics, and (for the 8-descent) the factorization stage. The expensive
//! quartic scans are numbered within each `s1` band; a [`Frontier`] names the
//! band and the number of scans already done, which is all a resumed run
//! needs to skip finished work and land on the same answer.

use std::collections::HashSet;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, Factorizer};
use crate::error::{Error, Result};
use crate::forms::{
    descent_pair, factor_quartic, first_conic, first_descent_quartic, k0_divisor_bound, parameterize_first,
    parameterize_second, pell_reduce, quartic_from_second_descent, resultant_k1, ConicForm, ConicSolution, Curve,
    PellReduction, QuarticFactorization, QuarticForm,
};
use crate::point::{self, has_finite_order, RationalPoint, TorsionList, Variant};
use crate::search::{conic_band_hits, Engine, QuarticHit, QuarticSieve, SearchBounds};
use crate::solubility::{is_everywhere_locally_soluble, SolubilityVerdict};

pub use crate::point::isogeny_shift_variants;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Search the first quartics directly.
    Four,
    /// Factor the first quartics and search the second ones; unfactorable
    /// quartics are searched directly.
    #[default]
    Eight,
    /// A direct search of each first quartic, then the 8-descent on it.
    Auto,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four" | "4" => Ok(Mode::Four),
            "eight" | "8" => Ok(Mode::Eight),
            "auto" => Ok(Mode::Auto),
            _ => Err(Error::Config(format!("unknown mode {s:?}, expected four|eight|auto"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Four => "four",
            Mode::Eight => "eight",
            Mode::Auto => "auto",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DescentOptions {
    pub bounds: SearchBounds,
    pub mode: Mode,
    /// Search only this `d`.
    pub forced_d: Option<BigInt>,
    /// Stop after this many quartic scans in one invocation.
    pub max_units: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Direct search of `h² = d f² + a f g + e g²`.
    #[default]
    Direct,
    /// `d H² = F² − α G²` for the divisors the direct search left barren.
    Pell,
}

/// Where a run stands: the quartic scans before `units` in band `s1` of
/// `phase` on variant `variant` are done.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frontier {
    pub variant: usize,
    pub phase: Phase,
    pub s1: u64,
    pub units: u64,
    /// Divisors whose direct conic search has produced a usable solution.
    #[serde(with = "crate::bigser::vec")]
    pub productive: Vec<BigInt>,
}

impl Frontier {
    pub fn start(bounds: &SearchBounds) -> Self {
        Self {
            variant: 0,
            phase: Phase::Direct,
            s1: bounds.s1a,
            units: 0,
            productive: Vec::new(),
        }
    }
}

/// Work counters. Band counters count completed bands plus the band a
/// point was found in.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentStats {
    pub s1_bands: u64,
    pub conic_hits: u64,
    pub pell_hits: u64,
    pub s2_bands: u64,
    pub first_hits: u64,
    pub quartics4: u64,
    pub quartic4_bands: u64,
    pub factorizations: u64,
    pub second_conic_bands: u64,
    pub second_hits: u64,
    pub quartics8: u64,
    pub quartic8_bands: u64,
    pub insoluble: u64,
    pub unproven: u64,
    pub sign_pair_disagreements: u64,
    pub quartic_scans: u64,
    pub degenerate_hits: u64,
    pub torsion_hits: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl DescentStats {
    fn note(&mut self, s: String) {
        if !self.notes.contains(&s) {
            self.notes.push(s);
        }
    }

    fn record(&mut self, v: &SolubilityVerdict) {
        if !v.soluble {
            self.insoluble += 1;
        } else if v.unproven {
            self.unproven += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Quartic4,
    Quartic8,
}

/// A solubility verdict for one quartic along the recorded path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageVerdict {
    pub stage: Stage,
    pub quartic: QuarticForm,
    pub verdict: SolubilityVerdict,
}

/// `reduced(i, j) = z²` for the last quartic searched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    pub stage: Stage,
    #[serde(with = "crate::bigser")]
    pub i: BigInt,
    #[serde(with = "crate::bigser")]
    pub j: BigInt,
    #[serde(with = "crate::bigser")]
    pub z: BigInt,
}

/// The chain of one descent path, from `d` down to the hit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentTrace {
    /// The model searched.
    pub curve: Curve,
    #[serde(with = "crate::bigser")]
    pub d: BigInt,
    /// `(1, h₀, f₀, g₀)`.
    pub conic_solution: ConicSolution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pell: Option<PellReduction>,
    /// `(d, H₀, F₀, G₀)` when the conic solution came through `pell`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pell_solution: Option<ConicSolution>,
    /// `(k₀, u₀, p₀, q₀)`.
    pub first_solution: ConicSolution,
    pub quartic4: QuarticForm,
    /// `m` with `quartic4 = m²·quartic4_reduced`.
    #[serde(with = "crate::bigser")]
    pub quartic4_scale: BigInt,
    pub quartic4_reduced: QuarticForm,
    /// `quartic4_reduced = u·v`, oriented so that `k₁t² = v(r, s)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factorization: Option<QuarticFactorization>,
    /// `(k₁, t₁, r₁, s₁)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_solution: Option<ConicSolution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quartic8: Option<QuarticForm>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::bigser::opt")]
    pub quartic8_scale: Option<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quartic8_reduced: Option<QuarticForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hit: Option<Hit>,
    /// `(r, s)` on `quartic4`, primitive.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::bigser::opt")]
    pub r: Option<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::bigser::opt")]
    pub s: Option<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<RationalPoint>,
    pub solubility_verdicts: Vec<StageVerdict>,
    pub stats: DescentStats,
}

fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}

impl DescentTrace {
    fn new(
        curve: &Curve,
        d: &BigInt,
        conic: &Conic,
        first: ConicSolution,
        quartic4: QuarticForm,
        factorizer: &Factorizer,
    ) -> Self {
        let (reduced, scale) = quartic4.reduced(factorizer);
        Self {
            curve: curve.clone(),
            d: d.clone(),
            conic_solution: conic.solution.clone(),
            pell: conic.pell.as_ref().map(|(p, _)| p.clone()),
            pell_solution: conic.pell.as_ref().map(|(_, s)| s.clone()),
            first_solution: first,
            quartic4,
            quartic4_scale: scale,
            quartic4_reduced: reduced,
            factorization: None,
            second_solution: None,
            quartic8: None,
            quartic8_scale: None,
            quartic8_reduced: None,
            hit: None,
            r: None,
            s: None,
            point: None,
            solubility_verdicts: Vec::new(),
            stats: DescentStats::default(),
        }
    }

    /// Re-check every recorded stage by substitution.
    pub fn validate(&self) -> Result<()> {
        let curve = &self.curve;
        let d = &self.d;
        let conic = first_conic(curve, d)?;
        if !self.conic_solution.k.is_one() || !self.conic_solution.satisfies(&conic) {
            return Err(invariant(format!("conic solution does not satisfy {conic}")));
        }
        if let (Some(pell), Some(sol)) = (&self.pell, &self.pell_solution) {
            if !sol.satisfies(&pell.form()) || sol.k != *d {
                return Err(invariant("Pell solution does not satisfy its form"));
            }
            let lifted = pell.lift(curve, &sol.f, &sol.g, &sol.root);
            if lifted != self.conic_solution {
                return Err(invariant("Pell solution does not lift to the conic solution"));
            }
        }
        let (first_form, _) = descent_pair(curve, d, &self.conic_solution)?;
        if !self.first_solution.satisfies(&first_form) {
            return Err(invariant(format!("first solution does not satisfy {first_form}")));
        }
        let q4 = first_descent_quartic(curve, d, &self.conic_solution, &self.first_solution)?;
        if q4 != self.quartic4 {
            return Err(invariant("quartic4 does not match its construction"));
        }
        let m2 = &self.quartic4_scale * &self.quartic4_scale;
        if self.quartic4_reduced.scaled(&m2) != self.quartic4 {
            return Err(invariant("quartic4 scale does not match"));
        }
        let mut eight = None;
        if let Some(fac) = &self.factorization {
            if fac.expand() != self.quartic4_reduced {
                return Err(invariant(format!("{fac} does not expand to the reduced quartic")));
            }
            if let Some(second) = &self.second_solution {
                if !second.satisfies(&fac.v) {
                    return Err(invariant(format!("second solution does not satisfy {}", fac.v)));
                }
                let res = resultant_k1(fac)?;
                if !res.is_multiple_of(&second.k) {
                    return Err(invariant("k1 does not divide the resultant"));
                }
                let q8 = quartic_from_second_descent(second, &fac.u, &fac.v);
                let (Some(rec), Some(scale), Some(red)) = (&self.quartic8, &self.quartic8_scale, &self.quartic8_reduced)
                else {
                    return Err(invariant("second solution without quartic8"));
                };
                if q8 != *rec || red.scaled(&(scale * scale)) != q8 {
                    return Err(invariant("quartic8 does not match its construction"));
                }
                eight = Some((second, fac, red));
            }
        }
        if let Some(hit) = &self.hit {
            let quartic = match (hit.stage, &eight) {
                (Stage::Quartic4, _) => &self.quartic4_reduced,
                (Stage::Quartic8, Some((_, _, red))) => *red,
                (Stage::Quartic8, None) => return Err(invariant("quartic8 hit without second stage")),
            };
            if quartic.eval(&hit.i, &hit.j) != &hit.z * &hit.z {
                return Err(invariant("hit is not a square value"));
            }
            let (r, s) = match (hit.stage, &eight) {
                (Stage::Quartic8, Some((second, fac, _))) => {
                    second_stage_rs(second, &fac.v, &hit.i, &hit.j)?.ok_or_else(|| invariant("degenerate hit"))?
                }
                _ => (hit.i.clone(), hit.j.clone()),
            };
            if self.r.as_ref() != Some(&r) || self.s.as_ref() != Some(&s) {
                return Err(invariant("recorded (r, s) does not match the hit"));
            }
            let p = first_stage_point(curve, d, &self.conic_solution, &self.first_solution, &r, &s)?
                .ok_or_else(|| invariant("degenerate hit"))?;
            if self.point.as_ref() != Some(&p) || !p.lies_on(curve) {
                return Err(invariant("recorded point does not match the hit"));
            }
        }
        Ok(())
    }
}

/// A point of the first descent: `x = d·v(p, q)/u(p, q)` with `(p, q)` the
/// image of `(r, s)`. `None` for a degenerate pair.
fn first_stage_point(
    curve: &Curve,
    d: &BigInt,
    conic: &ConicSolution,
    first: &ConicSolution,
    r: &BigInt,
    s: &BigInt,
) -> Result<Option<RationalPoint>> {
    let map = parameterize_first(first, &conic.g, d);
    let (p, q) = map.eval(r, s);
    let (first_form, second_form) = descent_pair(curve, d, conic)?;
    let num = second_form.eval(&p, &q);
    let den = first_form.eval(&p, &q);
    if num.is_zero() || den.is_zero() {
        return Ok(None);
    }
    let x = BigRational::new(d * num, den);
    match RationalPoint::from_x(curve, x.clone()) {
        Some(pt) => Ok(Some(pt)),
        None => Err(invariant(format!(
            "x = {} from (r, s) = ({r}, {s}) is not on {curve}",
            point::format_rational(&x)
        ))),
    }
}

/// `(r, s)` from `(i, j)`, made primitive. `None` when both vanish.
fn second_stage_rs(second: &ConicSolution, v: &ConicForm, i: &BigInt, j: &BigInt) -> Result<Option<(BigInt, BigInt)>> {
    let map = parameterize_second(second, v)?;
    let (r, s) = map.eval(i, j);
    let g = r.gcd(&s);
    if g.is_zero() {
        return Ok(None);
    }
    Ok(Some((r / &g, s / &g)))
}

/// The point on `curve` for a square value of `trace.quartic4` at `(r, s)`.
/// `Ok(None)` for a degenerate hit.
pub fn recover_point_4(curve: &Curve, trace: &DescentTrace, r: &BigInt, s: &BigInt) -> Result<Option<RationalPoint>> {
    first_stage_point(curve, &trace.d, &trace.conic_solution, &trace.first_solution, r, s)
}

/// The point on `curve` for a square value of `trace.quartic8` at `(i, j)`.
pub fn recover_point_8(curve: &Curve, trace: &DescentTrace, i: &BigInt, j: &BigInt) -> Result<Option<RationalPoint>> {
    let (Some(second), Some(fac)) = (&trace.second_solution, &trace.factorization) else {
        return Err(Error::Domain("trace has no second descent stage".into()));
    };
    match second_stage_rs(second, &fac.v, i, j)? {
        Some((r, s)) => recover_point_4(curve, trace, &r, &s),
        None => Ok(None),
    }
}

pub fn is_torsion(point: &RationalPoint, torsion: &TorsionList) -> bool {
    torsion.is_torsion(point)
}

pub fn naive_height(point: &RationalPoint) -> f64 {
    point.naive_height()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Found,
    Exhausted,
    Interrupted,
}

/// State to continue an interrupted run from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resume {
    pub frontier: Frontier,
    pub stats: DescentStats,
}

#[derive(Clone, Debug)]
pub struct DescentOutcome {
    pub status: Status,
    /// The point on the target curve.
    pub point: Option<RationalPoint>,
    /// The variant the point was found on.
    pub variant: Option<Variant>,
    pub trace: Option<DescentTrace>,
    pub frontier: Frontier,
    pub stats: DescentStats,
}

/// Map a point on a variant back onto the target curve.
pub fn map_to_target(target: &Curve, variant: &Variant, p: &RationalPoint) -> Option<RationalPoint> {
    let base = point::unshift(p, &variant.shift);
    if variant.via_isogeny {
        point::isogeny_back(target, &base)
    } else {
        Some(base)
    }
}

/// The models searched for `target`.
pub fn variants_for(target: &Curve, use_isogenous: bool, shifts: bool) -> Vec<Variant> {
    let mut base = Variant::identity(target);
    if use_isogenous {
        base = Variant {
            curve: target.isogenous(),
            shift: BigInt::zero(),
            via_isogeny: true,
        };
    }
    if !shifts {
        return vec![base];
    }
    isogeny_shift_variants(&base.curve)
        .into_iter()
        .map(|v| Variant {
            via_isogeny: base.via_isogeny,
            ..v
        })
        .collect()
}

pub struct Descent<'a> {
    target: Curve,
    variants: Vec<Variant>,
    torsion: TorsionList,
    opts: &'a DescentOptions,
    engine: &'a Engine,
    factorizer: &'a Factorizer,
    verdict_log: Option<&'a Mutex<Vec<StageVerdict>>>,
}

struct Conic {
    solution: ConicSolution,
    pell: Option<(PellReduction, ConicSolution)>,
}

enum Stop {
    Found(Box<DescentTrace>),
    Interrupted,
}

type Flow = ControlFlow<Stop>;

struct Run<'r, 'a> {
    owner: &'r Descent<'a>,
    variant_index: usize,
    curve: Curve,
    variant_torsion: TorsionList,
    frontier: Frontier,
    stats: DescentStats,
    replay: Option<Resume>,
    units_this_run: u64,
    progress: &'r mut dyn FnMut(&Resume),
}

impl<'a> Descent<'a> {
    /// `torsion` holds extra known torsion abscissae on `target`; the
    /// two-torsion is added automatically.
    pub fn new(
        target: &Curve,
        variants: Vec<Variant>,
        torsion: &TorsionList,
        opts: &'a DescentOptions,
        engine: &'a Engine,
        factorizer: &'a Factorizer,
    ) -> Result<Self> {
        opts.bounds.validate()?;
        if variants.is_empty() {
            return Err(Error::Config("no curve models to search".into()));
        }
        let mut t = TorsionList::seeded(target);
        t.extend(torsion.xs().iter().cloned());
        Ok(Self {
            target: target.clone(),
            variants,
            torsion: t,
            opts,
            engine,
            factorizer,
            verdict_log: None,
        })
    }

    /// Append every local-solubility verdict the run computes to `log`.
    pub fn log_verdicts(mut self, log: &'a Mutex<Vec<StageVerdict>>) -> Self {
        self.verdict_log = Some(log);
        self
    }

    pub fn variants(&self) -> &[Variant] {
        &self.variants
    }

    /// Run from the start, or from `resume`. `progress` sees the state at
    /// every band start and after every quartic scan.
    pub fn run(&self, resume: Option<Resume>, progress: &mut dyn FnMut(&Resume)) -> Result<DescentOutcome> {
        let start = match &resume {
            Some(r) => {
                if r.frontier.variant > self.variants.len() {
                    return Err(Error::Checkpoint(format!(
                        "frontier names variant {} of {}",
                        r.frontier.variant,
                        self.variants.len()
                    )));
                }
                r.frontier.clone()
            }
            None => Frontier::start(&self.opts.bounds),
        };
        let mut stats = resume.as_ref().map(|r| r.stats.clone()).unwrap_or_default();
        let mut replay = resume;
        let mut units_this_run = 0;
        for vi in start.variant..self.variants.len() {
            let frontier = if vi == start.variant {
                start.clone()
            } else {
                replay = None;
                Frontier {
                    variant: vi,
                    ..Frontier::start(&self.opts.bounds)
                }
            };
            let variant = &self.variants[vi];
            let mut vt = TorsionList::seeded(&variant.curve);
            if !variant.via_isogeny {
                vt.extend(
                    self.torsion
                        .xs()
                        .iter()
                        .map(|x| x - BigRational::from_integer(variant.shift.clone())),
                );
            }
            let mut run = Run {
                owner: self,
                variant_index: vi,
                curve: variant.curve.clone(),
                variant_torsion: vt,
                frontier,
                stats,
                replay: replay.take(),
                units_this_run,
                progress: &mut *progress,
            };
            let flow = run.variant()?;
            stats = run.stats;
            units_this_run = run.units_this_run;
            let frontier = run.frontier;
            match flow {
                ControlFlow::Break(Stop::Found(trace)) => {
                    let searched = trace.point.clone().ok_or_else(|| invariant("found trace without point"))?;
                    let point = map_to_target(&self.target, variant, &searched)
                        .ok_or_else(|| invariant("found point maps to the identity"))?;
                    if !point.lies_on(&self.target) {
                        return Err(invariant("mapped point is not on the target curve"));
                    }
                    return Ok(DescentOutcome {
                        status: Status::Found,
                        point: Some(point),
                        variant: Some(variant.clone()),
                        trace: Some(*trace),
                        frontier,
                        stats,
                    });
                }
                ControlFlow::Break(Stop::Interrupted) => {
                    return Ok(DescentOutcome {
                        status: Status::Interrupted,
                        point: None,
                        variant: None,
                        trace: None,
                        frontier,
                        stats,
                    });
                }
                ControlFlow::Continue(()) => {}
            }
        }
        let frontier = Frontier {
            variant: self.variants.len(),
            ..Frontier::start(&self.opts.bounds)
        };
        Ok(DescentOutcome {
            status: Status::Exhausted,
            point: None,
            variant: None,
            trace: None,
            frontier,
            stats,
        })
    }

    /// Accept a point on `variant` as of infinite order on the target.
    fn accept(&self, variant: &Variant, variant_torsion: &TorsionList, p: &RationalPoint) -> bool {
        if variant_torsion.is_torsion(p) || has_finite_order(&variant.curve, p) {
            return false;
        }
        match map_to_target(&self.target, variant, p) {
            Some(t) => !self.torsion.is_torsion(&t) && !has_finite_order(&self.target, &t),
            None => false,
        }
    }
}

/// A quartic awaiting a scan, with the path that produced it.
struct Pending {
    trace: DescentTrace,
    sieve: QuarticSieve,
    stage: Stage,
}

impl Run<'_, '_> {
    fn log(&mut self, stage: Stage, quartic: &QuarticForm, verdict: &SolubilityVerdict) {
        self.stats.record(verdict);
        if let Some(log) = self.owner.verdict_log {
            if let Ok(mut log) = log.lock() {
                log.push(StageVerdict {
                    stage,
                    quartic: quartic.clone(),
                    verdict: verdict.clone(),
                });
            }
        }
    }

    fn opts(&self) -> &DescentOptions {
        self.owner.opts
    }

    fn factorizer(&self) -> &Factorizer {
        self.owner.factorizer
    }

    fn snapshot(&self) -> Resume {
        Resume {
            frontier: self.frontier.clone(),
            stats: self.stats.clone(),
        }
    }

    fn replaying(&self) -> bool {
        self.replay.is_some()
    }

    /// Restore saved counters once the replay reaches the saved position.
    fn sync_replay(&mut self) {
        if let Some(r) = &self.replay {
            if r.frontier.units == self.frontier.units {
                self.stats = r.stats.clone();
                self.replay = None;
            }
        }
    }

    fn band_start(&mut self, phase: Phase, s1: u64) -> Result<()> {
        if let Some(r) = &self.replay {
            if r.frontier.phase != phase || r.frontier.s1 != s1 {
                return Err(Error::Checkpoint(format!(
                    "band {} has fewer than {} quartic scans",
                    r.frontier.s1, r.frontier.units
                )));
            }
        }
        self.frontier.phase = phase;
        self.frontier.s1 = s1;
        self.frontier.units = 0;
        self.sync_replay();
        if !self.replaying() {
            let snap = self.snapshot();
            (self.progress)(&snap);
        }
        Ok(())
    }

    fn unit_done(&mut self) -> Flow {
        self.frontier.units += 1;
        if self.replaying() {
            self.sync_replay();
            return ControlFlow::Continue(());
        }
        self.units_this_run += 1;
        let snap = self.snapshot();
        (self.progress)(&snap);
        if self.opts().max_units.is_some_and(|m| self.units_this_run >= m) {
            return ControlFlow::Break(Stop::Interrupted);
        }
        ControlFlow::Continue(())
    }

    fn divisor_candidates(&mut self) -> Result<Vec<BigInt>> {
        let b = self.curve.b().clone();
        let ds = match &self.opts().forced_d {
            Some(d) => {
                let (sq, _) = arith::squarefree_decompose(d)?;
                if sq != *d || !b.is_multiple_of(d) {
                    return Err(Error::Config(format!(
                        "forced d = {d} is not a squarefree divisor of b = {b}"
                    )));
                }
                vec![d.clone()]
            }
            None => self.factorizer().squarefree_divisors(&b)?,
        };
        let disc = self.curve.discriminant_factor();
        let mut out = Vec::new();
        for d in ds {
            if d.is_negative() && disc.is_negative() {
                self.stats.note(format!(
                    "{}: d = {d} skipped, h^2 = {} has no real solutions",
                    self.curve,
                    first_conic(&self.curve, &d)?
                ));
                continue;
            }
            out.push(d);
        }
        Ok(out)
    }

    fn variant(&mut self) -> Result<Flow> {
        let ds = self.divisor_candidates()?;
        let bounds = self.opts().bounds;
        log::info!("searching {} with d in {:?}", self.curve, ds.iter().map(|d| d.to_string()).collect::<Vec<_>>());
        if self.frontier.phase == Phase::Direct {
            let forms: Vec<ConicForm> = ds.iter().map(|d| first_conic(&self.curve, d)).collect::<Result<_>>()?;
            let one = [BigInt::from(1)];
            for s1 in self.frontier.s1..=bounds.s1b {
                self.band_start(Phase::Direct, s1)?;
                for (d, form) in ds.iter().zip(&forms) {
                    for sol in conic_band_hits(form, &one, s1) {
                        if sol.g.is_zero() {
                            continue;
                        }
                        if !self.frontier.productive.contains(d) {
                            self.frontier.productive.push(d.clone());
                        }
                        let conic = Conic {
                            solution: sol,
                            pell: None,
                        };
                        if let ControlFlow::Break(b) = self.conic(d, &conic)? {
                            return Ok(ControlFlow::Break(b));
                        }
                    }
                }
                self.stats.s1_bands += 1;
            }
            self.frontier.s1 = bounds.s1a;
        }
        let barren: Vec<BigInt> = ds
            .iter()
            .filter(|d| !self.frontier.productive.contains(d))
            .cloned()
            .collect();
        if barren.is_empty() {
            return Ok(ControlFlow::Continue(()));
        }
        let pells: Vec<PellReduction> = barren
            .iter()
            .map(|d| pell_reduce(&self.curve, d, self.factorizer()))
            .collect::<Result<_>>()?;
        for s1 in self.frontier.s1..=bounds.s1b {
            self.band_start(Phase::Pell, s1)?;
            for (d, pell) in barren.iter().zip(&pells) {
                for sol in conic_band_hits(&pell.form(), std::slice::from_ref(d), s1) {
                    let lifted = pell.lift(&self.curve, &sol.f, &sol.g, &sol.root);
                    if lifted.g.is_zero() || !lifted.satisfies(&first_conic(&self.curve, d)?) {
                        continue;
                    }
                    self.stats.pell_hits += 1;
                    let conic = Conic {
                        solution: lifted,
                        pell: Some((pell.clone(), sol)),
                    };
                    if let ControlFlow::Break(b) = self.conic(d, &conic)? {
                        return Ok(ControlFlow::Break(b));
                    }
                }
            }
            self.stats.s1_bands += 1;
        }
        Ok(ControlFlow::Continue(()))
    }

    fn conic(&mut self, d: &BigInt, conic: &Conic) -> Result<Flow> {
        self.stats.conic_hits += 1;
        let g0 = &conic.solution.g;
        let (first_form, _) = descent_pair(&self.curve, d, &conic.solution)?;
        let k0s = self
            .factorizer()
            .squarefree_divisors(&k0_divisor_bound(&self.curve, g0))?;
        let mut seen = HashSet::new();
        for s2 in 1..=self.opts().bounds.s2b {
            self.stats.s2_bands += 1;
            for first in conic_band_hits(&first_form, &k0s, s2) {
                self.stats.first_hits += 1;
                if let ControlFlow::Break(b) = self.first(d, conic, first, &mut seen)? {
                    return Ok(ControlFlow::Break(b));
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn first(&mut self, d: &BigInt, conic: &Conic, first: ConicSolution, seen: &mut HashSet<QuarticForm>) -> Result<Flow> {
        let mut seeds = vec![first.clone()];
        if !first.g.is_zero() {
            seeds.push(ConicSolution {
                g: -&first.g,
                ..first.clone()
            });
        }
        let mut candidates = Vec::new();
        let mut verdicts = Vec::new();
        for seed in seeds {
            let q = first_descent_quartic(&self.curve, d, &conic.solution, &seed)?;
            let mut trace = DescentTrace::new(&self.curve, d, conic, seed, q, self.factorizer());
            if !seen.insert(trace.quartic4_reduced.clone()) {
                continue;
            }
            self.stats.quartics4 += 1;
            let verdict = is_everywhere_locally_soluble(&trace.quartic4_reduced, self.factorizer());
            self.log(Stage::Quartic4, &trace.quartic4_reduced, &verdict);
            verdicts.push(verdict.soluble);
            trace.solubility_verdicts.push(StageVerdict {
                stage: Stage::Quartic4,
                quartic: trace.quartic4_reduced.clone(),
                verdict: verdict.clone(),
            });
            if verdict.soluble {
                candidates.push(trace);
            }
        }
        if verdicts.len() == 2 && verdicts[0] != verdicts[1] {
            self.stats.sign_pair_disagreements += 1;
            log::warn!("sign-pair quartics from {first:?} received different local verdicts");
        }
        if candidates.is_empty() {
            return Ok(ControlFlow::Continue(()));
        }
        match self.opts().mode {
            Mode::Four => self.scan(candidates.into_iter().map(Pending::first).collect()),
            Mode::Auto => {
                let pending = candidates.iter().cloned().map(Pending::first).collect();
                if let ControlFlow::Break(b) = self.scan(pending)? {
                    return Ok(ControlFlow::Break(b));
                }
                for trace in candidates {
                    let facs = factor_quartic(&trace.quartic4_reduced, self.factorizer());
                    if let ControlFlow::Break(b) = self.eight(trace, &facs, seen)? {
                        return Ok(ControlFlow::Break(b));
                    }
                }
                Ok(ControlFlow::Continue(()))
            }
            Mode::Eight => {
                let mut direct = Vec::new();
                let mut factored = Vec::new();
                for trace in candidates {
                    let facs = factor_quartic(&trace.quartic4_reduced, self.factorizer());
                    if facs.is_empty() {
                        direct.push(Pending::first(trace));
                    } else {
                        factored.push((trace, facs));
                    }
                }
                if !direct.is_empty() {
                    if let ControlFlow::Break(b) = self.scan(direct)? {
                        return Ok(ControlFlow::Break(b));
                    }
                }
                for (trace, facs) in factored {
                    if let ControlFlow::Break(b) = self.eight(trace, &facs, seen)? {
                        return Ok(ControlFlow::Break(b));
                    }
                }
                Ok(ControlFlow::Continue(()))
            }
        }
    }

    fn eight(&mut self, base: DescentTrace, facs: &[QuarticFactorization], seen: &mut HashSet<QuarticForm>) -> Result<Flow> {
        for fac in facs {
            self.stats.factorizations += 1;
            let res = resultant_k1(fac)?;
            let k1s = self.factorizer().squarefree_divisors(&res)?;
            for oriented in [fac.clone(), fac.swapped()] {
                for s3 in 1..=self.opts().bounds.s3b {
                    self.stats.second_conic_bands += 1;
                    for second in conic_band_hits(&oriented.v, &k1s, s3) {
                        self.stats.second_hits += 1;
                        let q8 = quartic_from_second_descent(&second, &oriented.u, &oriented.v);
                        let (red, scale) = q8.reduced(self.factorizer());
                        if !seen.insert(red.clone()) {
                            continue;
                        }
                        self.stats.quartics8 += 1;
                        let verdict = is_everywhere_locally_soluble(&red, self.factorizer());
                        self.log(Stage::Quartic8, &red, &verdict);
                        if !verdict.soluble {
                            continue;
                        }
                        let mut trace = base.clone();
                        trace.factorization = Some(oriented.clone());
                        trace.second_solution = Some(second);
                        trace.quartic8 = Some(q8);
                        trace.quartic8_scale = Some(scale);
                        trace.quartic8_reduced = Some(red.clone());
                        trace.solubility_verdicts.push(StageVerdict {
                            stage: Stage::Quartic8,
                            quartic: red.clone(),
                            verdict,
                        });
                        let pending = Pending {
                            sieve: QuarticSieve::new(&red),
                            trace,
                            stage: Stage::Quartic8,
                        };
                        if let ControlFlow::Break(b) = self.scan(vec![pending])? {
                            return Ok(ControlFlow::Break(b));
                        }
                    }
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    /// One unit: scan the quartics interleaved band by band.
    fn scan(&mut self, pending: Vec<Pending>) -> Result<Flow> {
        if self.replaying() {
            return Ok(self.unit_done());
        }
        self.stats.quartic_scans += 1;
        let stage = pending[0].stage;
        let bound = match stage {
            Stage::Quartic4 => self.opts().bounds.s3b,
            Stage::Quartic8 => self.opts().bounds.s4b,
        };
        let sieves: Vec<QuarticSieve> = pending.iter().map(|p| p.sieve.clone()).collect();
        let owner = self.owner;
        let variant = &owner.variants[self.variant_index];
        let (mut degenerate, mut torsion) = (0u64, 0u64);
        let mut failure = None;
        let (found, bands) = owner.engine.scan_quartics(&sieves, 1..=bound, |_, idx, hit: &QuarticHit| {
            let p = &pending[idx];
            let (i, j) = (BigInt::from(hit.r), BigInt::from(hit.s));
            let recovered = match p.stage {
                Stage::Quartic4 => recover_point_4(&self.curve, &p.trace, &i, &j),
                Stage::Quartic8 => recover_point_8(&self.curve, &p.trace, &i, &j),
            };
            match recovered {
                Err(e) => {
                    failure = Some(e);
                    ControlFlow::Break((idx, hit.clone(), None))
                }
                Ok(None) => {
                    degenerate += 1;
                    ControlFlow::Continue(())
                }
                Ok(Some(pt)) => {
                    if owner.accept(variant, &self.variant_torsion, &pt) {
                        ControlFlow::Break((idx, hit.clone(), Some(pt)))
                    } else {
                        torsion += 1;
                        ControlFlow::Continue(())
                    }
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        self.stats.degenerate_hits += degenerate;
        self.stats.torsion_hits += torsion;
        let partial = u64::from(found.is_some());
        match stage {
            Stage::Quartic4 => self.stats.quartic4_bands += bands + partial,
            Stage::Quartic8 => self.stats.quartic8_bands += bands + partial,
        }
        if let Some((idx, hit, Some(pt))) = found {
            let mut trace = pending.into_iter().nth(idx).map(|p| p.trace).ok_or_else(|| invariant("hit index"))?;
            let (i, j) = (BigInt::from(hit.r), BigInt::from(hit.s));
            let (r, s) = match stage {
                Stage::Quartic4 => (i.clone(), j.clone()),
                Stage::Quartic8 => {
                    let second = trace.second_solution.as_ref().ok_or_else(|| invariant("second solution"))?;
                    let fac = trace.factorization.as_ref().ok_or_else(|| invariant("factorization"))?;
                    second_stage_rs(second, &fac.v, &i, &j)?.ok_or_else(|| invariant("degenerate hit"))?
                }
            };
            trace.hit = Some(Hit { stage, i, j, z: hit.z });
            trace.r = Some(r);
            trace.s = Some(s);
            trace.point = Some(pt);
            self.frontier.units += 1;
            trace.stats = self.stats.clone();
            trace.validate()?;
            return Ok(ControlFlow::Break(Stop::Found(Box::new(trace))));
        }
        Ok(self.unit_done())
    }
}

impl Pending {
    fn first(trace: DescentTrace) -> Self {
        Self {
            sieve: QuarticSieve::new(&trace.quartic4_reduced),
            trace,
            stage: Stage::Quartic4,
        }
    }
}

fn default_engine() -> Result<Engine> {
    Engine::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn single_run(curve: &Curve, bounds: SearchBounds, torsion: &TorsionList, mode: Mode) -> Result<Option<(RationalPoint, DescentTrace)>> {
    let opts = DescentOptions {
        bounds,
        mode,
        ..Default::default()
    };
    let engine = default_engine()?;
    let factorizer = Factorizer::default();
    let descent = Descent::new(curve, vec![Variant::identity(curve)], torsion, &opts, &engine, &factorizer)?;
    let out = descent.run(None, &mut |_| {})?;
    Ok(match (out.point, out.trace) {
        (Some(p), Some(t)) => Some((p, t)),
        _ => None,
    })
}

/// Search `curve` by 4-descent.
pub fn four_descent(curve: &Curve, bounds: SearchBounds, torsion: &TorsionList) -> Result<Option<(RationalPoint, DescentTrace)>> {
    single_run(curve, bounds, torsion, Mode::Four)
}

/// Search `curve` by 8-descent.
pub fn eight_descent(curve: &Curve, bounds: SearchBounds, torsion: &TorsionList) -> Result<Option<(RationalPoint, DescentTrace)>> {
    single_run(curve, bounds, torsion, Mode::Eight)
}
