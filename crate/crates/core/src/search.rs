//! Banded exhaustive searches.
//!
//! A band is the set of primitive pairs `(f, g)` with `|f| + |g| = s`. Pairs
//! are visited with `f` running from `s` down to `0` and `g = ±(s − f)`, the
//! positive sign first. Since every form searched here is homogeneous of even
//! degree, `(f, g)` and `(−f, −g)` give the same value and only `f ≥ 0` is
//! visited. Within one band the order is fixed, so "first hit" is well defined
//! and parallel runs resolve to the same answer as serial ones.

use std::ops::{ControlFlow, RangeInclusive};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, residue_may_be_square, SIEVE_MODULUS};
use crate::error::{Error, Result};
use crate::forms::{ConicForm, ConicSolution, QuarticForm};

/// Band limits for the four search stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    /// First band searched for the first conic.
    pub s1a: u64,
    /// Last band searched for the first conic.
    pub s1b: u64,
    /// Last band for `k u² = g₀p² − g₀d q²`.
    pub s2b: u64,
    /// Last band for the first quartic, or for `k₁t² = v(r, s)` in the 8-descent.
    pub s3b: u64,
    /// Last band for the second quartic.
    pub s4b: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self {
            s1a: 2,
            s1b: 200,
            s2b: 99,
            s3b: 99,
            s4b: 199,
        }
    }
}

impl SearchBounds {
    pub fn new(s1a: u64, s1b: u64, s2b: u64, s3b: u64, s4b: u64) -> Result<Self> {
        let b = Self {
            s1a,
            s1b,
            s2b,
            s3b,
            s4b,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s1a < 2 || self.s1a > self.s1b {
            return Err(Error::Config(format!(
                "need 2 <= s1a <= s1b, got {}:{}",
                self.s1a, self.s1b
            )));
        }
        for (name, v) in [("s2b", self.s2b), ("s3b", self.s3b), ("s4b", self.s4b)] {
            if v < 2 {
                return Err(Error::Config(format!("{name} must be at least 2, got {v}")));
            }
        }
        Ok(())
    }
}

/// Primitive pairs of one band in canonical order.
pub fn band_points(band: u64) -> impl Iterator<Item = (i64, i64)> {
    let band = band as i64;
    (0..=band).rev().flat_map(move |f| {
        let g = band - f;
        let pair: [Option<(i64, i64)>; 2] = if g == 0 {
            [(f == 1).then_some((1, 0)), None]
        } else if f == 0 {
            [(g == 1).then_some((0, 1)), None]
        } else if f.gcd(&g) == 1 {
            [Some((f, g)), Some((f, -g))]
        } else {
            [None, None]
        };
        pair.into_iter().flatten()
    })
}

fn res(n: &BigInt) -> u64 {
    arith::sieve_residue(n)
}

#[inline]
fn mulmod(a: u64, b: u64) -> u64 {
    a * b % SIEVE_MODULUS
}

#[inline]
fn addmod(a: u64, b: u64) -> u64 {
    (a + b) % SIEVE_MODULUS
}

#[inline]
fn small_res(x: i64) -> u64 {
    x.rem_euclid(SIEVE_MODULUS as i64) as u64
}

/// Every hit of `k·root² = form(f, g)` on a band, `k` drawn from `ks`
/// (squarefree, nonzero) and `root > 0`.
pub fn conic_band_hits(form: &ConicForm, ks: &[BigInt], band: u64) -> Vec<ConicSolution> {
    let fr = [res(&form.a), res(&form.b), res(&form.c)];
    let kr: Vec<u64> = ks.iter().map(res).collect();
    let mut out = Vec::new();
    for (f, g) in band_points(band) {
        let (f_r, g_r) = (small_res(f), small_res(g));
        let v_r = addmod(
            addmod(mulmod(mulmod(fr[0], f_r), f_r), mulmod(mulmod(fr[1], f_r), g_r)),
            mulmod(mulmod(fr[2], g_r), g_r),
        );
        let mut value: Option<BigInt> = None;
        for (k, &k_r) in ks.iter().zip(&kr) {
            // k | value and value/k square  ⇔  value·k square (k squarefree).
            if !residue_may_be_square(mulmod(v_r, k_r)) {
                continue;
            }
            let (bf, bg) = (BigInt::from(f), BigInt::from(g));
            let v = value.get_or_insert_with(|| form.eval(&bf, &bg));
            if v.is_zero() || v.sign() != k.sign() || !v.is_multiple_of(k) {
                continue;
            }
            if let Some(root) = arith::exact_sqrt(&(&*v / k)) {
                out.push(ConicSolution::new(k.clone(), root, bf, bg));
            }
        }
    }
    out
}

/// First hit of [`conic_band_hits`].
pub fn search_conic_band(form: &ConicForm, ks: &[BigInt], band: u64) -> Option<ConicSolution> {
    conic_band_hits(form, ks, band).into_iter().next()
}

/// A pair `(r, s)` with `Q(r, s) = z² > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarticHit {
    pub r: i64,
    pub s: i64,
    #[serde(with = "crate::bigser")]
    pub z: BigInt,
}

/// A quartic prepared for repeated evaluation modulo the sieve modulus.
#[derive(Clone, Debug)]
pub struct QuarticSieve {
    quartic: QuarticForm,
    residues: [u64; 5],
}

impl QuarticSieve {
    pub fn new(quartic: &QuarticForm) -> Self {
        Self {
            quartic: quartic.clone(),
            residues: [0, 1, 2, 3, 4].map(|i| res(&quartic.c[i])),
        }
    }

    pub fn quartic(&self) -> &QuarticForm {
        &self.quartic
    }

    #[inline]
    fn residue_at(&self, r: i64, s: i64) -> u64 {
        let (r, s) = (small_res(r), small_res(s));
        let mut acc = self.residues[0];
        let mut sp = s;
        for c in &self.residues[1..] {
            acc = addmod(mulmod(acc, r), mulmod(*c, sp));
            sp = mulmod(sp, s);
        }
        acc
    }

    /// All hits on one band; `sieve = false` skips the residue pre-filter.
    pub fn band_hits(&self, band: u64, sieve: bool) -> Vec<QuarticHit> {
        let mut out = Vec::new();
        for (r, s) in band_points(band) {
            if sieve && !residue_may_be_square(self.residue_at(r, s)) {
                continue;
            }
            let v = self.quartic.eval(&BigInt::from(r), &BigInt::from(s));
            if !v.is_positive() {
                continue;
            }
            if let Some(z) = arith::exact_sqrt(&v) {
                out.push(QuarticHit { r, s, z });
            }
        }
        out
    }
}

/// First hit on one band, if any.
pub fn search_quartic_band(q: &QuarticForm, band: u64) -> Option<QuarticHit> {
    QuarticSieve::new(q).band_hits(band, true).into_iter().next()
}

pub fn quartic_band_hits(q: &QuarticForm, band: u64) -> Vec<QuarticHit> {
    QuarticSieve::new(q).band_hits(band, true)
}

/// Worker pool for the quartic scans. Bands are evaluated in parallel in
/// fixed-size batches and visited strictly in band order.
pub struct Engine {
    pool: Option<rayon::ThreadPool>,
    batch: usize,
}

impl Engine {
    pub fn new(workers: usize) -> Result<Self> {
        let workers = workers.max(1);
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            pool,
            batch: workers * 4,
        })
    }

    pub fn serial() -> Self {
        Self {
            pool: None,
            batch: 1,
        }
    }

    pub fn workers(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// Visit every hit of `sieve` over `bands` in canonical order until `visit` breaks.
    /// Returns the break value and the number of bands fully visited.
    pub fn scan_quartic<T>(
        &self,
        sieve: &QuarticSieve,
        bands: RangeInclusive<u64>,
        mut visit: impl FnMut(u64, &QuarticHit) -> ControlFlow<T>,
    ) -> (Option<T>, u64) {
        self.scan_quartics(std::slice::from_ref(sieve), bands, |band, _, hit| visit(band, hit))
    }

    /// Interleaved scan of several quartics: band by band, and within a band
    /// quartic by quartic in slice order.
    pub fn scan_quartics<T>(
        &self,
        sieves: &[QuarticSieve],
        bands: RangeInclusive<u64>,
        mut visit: impl FnMut(u64, usize, &QuarticHit) -> ControlFlow<T>,
    ) -> (Option<T>, u64) {
        let (lo, hi) = (*bands.start(), *bands.end());
        let mut done = 0;
        let mut start = lo;
        if sieves.is_empty() {
            return (None, 0);
        }
        while start <= hi {
            let end = hi.min(start + self.batch as u64 - 1);
            let jobs: Vec<(u64, usize)> = (start..=end)
                .flat_map(|b| (0..sieves.len()).map(move |i| (b, i)))
                .collect();
            let run = |&(b, i): &(u64, usize)| sieves[i].band_hits(b, true);
            let results: Vec<Vec<QuarticHit>> = match &self.pool {
                Some(pool) => pool.install(|| jobs.par_iter().map(run).collect()),
                None => jobs.iter().map(run).collect(),
            };
            for (&(band, idx), hits) in jobs.iter().zip(&results) {
                for hit in hits {
                    if let ControlFlow::Break(t) = visit(band, idx, hit) {
                        return (Some(t), done);
                    }
                }
                if idx + 1 == sieves.len() {
                    done += 1;
                }
            }
            start = end + 1;
        }
        (None, done)
    }
}

/// The band `|f| + |g|` of a pair.
pub fn band_of(f: &BigInt, g: &BigInt) -> u64 {
    (f.abs() + g.abs()).to_u64().unwrap_or(u64::MAX)
}
