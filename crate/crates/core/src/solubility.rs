//! Local solubility of `z² = Q(r, s)`.
//!
//! A quartic is declared insoluble only with a named obstruction: either `Q`
//! is never positive over the reals, or some prime `p` admits no primitive
//! `(r, s) ∈ ℤ_p²` with `Q(r, s)` a nonzero `p`-adic square. A `true` verdict
//! only means no obstruction was found at the places that were checked.
//!
//! The real test uses a squarefree decomposition and a Sturm count on the
//! odd-multiplicity part. The `p`-adic test refines residue classes
//! `x ≡ x₀ (mod pⁿ)` until the class is decided by a Taylor-expansion
//! valuation argument or Hensel's lemma produces a simple root.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, Factorizer};
use crate::bigser;
use crate::forms::{ConicForm, QuarticForm};

/// Primes at or below this are always checked, whatever the discriminant says.
pub const SMALL_PRIME_BOUND: u32 = 30;

/// Above this, residue classes modulo `p` are not enumerated.
pub const ENUMERATION_LIMIT: u64 = 5_000;

/// `true` iff the binary quadratic has a rational root (in ℙ¹).
pub fn has_rational_roots(quad: &ConicForm) -> bool {
    arith::is_square(&quad.discriminant())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "place")]
pub enum Place {
    Real,
    Prime {
        #[serde(with = "bigser")]
        p: BigInt,
    },
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "R"),
            Place::Prime { p } => write!(f, "Q_{p}"),
        }
    }
}

/// Outcome of [`is_everywhere_locally_soluble`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolubilityVerdict {
    pub soluble: bool,
    /// The place that rules out solutions, when `soluble` is false.
    pub obstruction: Option<Place>,
    /// Set when some place could not be decided ("soluble-unproven").
    pub unproven: bool,
    #[serde(with = "bigser::vec")]
    pub primes_checked: Vec<BigInt>,
    /// Human-readable reasons behind an `unproven` flag.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SolubilityVerdict {
    pub fn label(&self) -> &'static str {
        match (self.soluble, self.unproven) {
            (false, _) => "insoluble",
            (true, false) => "soluble",
            (true, true) => "soluble-unproven",
        }
    }
}

/// Result of a single local test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Local {
    Soluble,
    Insoluble,
    Undecided,
}

/// Test `z² = Q(r, s)` for local obstructions at ℝ and at the primes dividing
/// `2·disc(Q)` (plus every prime up to [`SMALL_PRIME_BOUND`]).
pub fn is_everywhere_locally_soluble(q: &QuarticForm, factorizer: &Factorizer) -> SolubilityVerdict {
    let mut verdict = SolubilityVerdict {
        soluble: true,
        obstruction: None,
        unproven: false,
        primes_checked: Vec::new(),
        notes: Vec::new(),
    };
    if q.is_zero() {
        verdict.soluble = false;
        verdict.obstruction = Some(Place::Real);
        verdict.notes.push("zero quartic".into());
        return verdict;
    }
    if !is_real_soluble(q) {
        verdict.soluble = false;
        verdict.obstruction = Some(Place::Real);
        return verdict;
    }

    let disc = q.discriminant();
    let mut primes: Vec<BigInt> = arith::primes_up_to(SMALL_PRIME_BOUND)
        .into_iter()
        .map(BigInt::from)
        .collect();
    if disc.is_zero() {
        verdict.unproven = true;
        verdict
            .notes
            .push("repeated factor: only small primes checked".into());
    } else {
        match factorizer.factor(&disc) {
            Ok(f) => {
                if let Some(c) = &f.cofactor {
                    verdict.unproven = true;
                    verdict.notes.push(format!(
                        "discriminant cofactor of {} bits left unfactored",
                        c.bits()
                    ));
                }
                primes.extend(f.primes().map(|p| BigInt::from(p.clone())));
            }
            Err(e) => {
                verdict.unproven = true;
                verdict.notes.push(e.to_string());
            }
        }
    }
    primes.sort();
    primes.dedup();

    let two = BigInt::from(2);
    for p in primes {
        verdict.primes_checked.push(p.clone());
        if p != two && !disc.is_zero() && !disc.is_multiple_of(&p) {
            // Good reduction: the curve has a smooth point mod p (Hasse), and it lifts.
            continue;
        }
        let depth = depth_cap(&disc, q, &p);
        let local = is_padic_soluble(q, &p, depth);
        match local {
            Local::Soluble => {}
            Local::Insoluble => {
                verdict.soluble = false;
                verdict.obstruction = Some(Place::Prime { p });
                return verdict;
            }
            Local::Undecided => {
                verdict.unproven = true;
                verdict.notes.push(format!("undecided at p = {p}"));
            }
        }
    }
    verdict
}

fn depth_cap(disc: &BigInt, q: &QuarticForm, p: &BigInt) -> u32 {
    let vd = if disc.is_zero() {
        24
    } else {
        arith::valuation(disc, p).unwrap_or(0)
    };
    let vc = arith::valuation(&q.content(), p).unwrap_or(0);
    let extra = if *p == BigInt::from(2) { 8 } else { 5 };
    vd + vc + extra
}

/// Whether `Q(r, s) > 0` for some real `(r, s)`.
pub fn is_real_soluble(q: &QuarticForm) -> bool {
    if q.c[0].is_positive() || q.c[4].is_positive() {
        return true;
    }
    // f(x) = Q(x, 1), coefficients low → high.
    let f: Vec<BigRational> = q
        .c
        .iter()
        .rev()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    let f = poly::trim(f);
    if f.is_empty() {
        return false;
    }
    if f.last().is_some_and(|lc| lc.is_positive()) {
        return true;
    }
    let odd = poly::odd_multiplicity_part(&f);
    poly::real_root_count(&odd) > 0
}

fn is_padic_square(n: &BigInt, p: &BigInt) -> bool {
    if n.is_zero() {
        return false;
    }
    let v = arith::valuation(n, p).unwrap_or(0);
    if v % 2 == 1 {
        return false;
    }
    let unit = n / p.pow(v);
    if *p == BigInt::from(2) {
        unit.mod_floor(&BigInt::from(8)) == BigInt::one()
    } else {
        legendre(&unit, p) == 1
    }
}

/// Legendre symbol for odd prime `p`; 0 when `p | n`.
pub fn legendre(n: &BigInt, p: &BigInt) -> i32 {
    let r = n.mod_floor(p);
    if r.is_zero() {
        return 0;
    }
    let e = (p - 1u32) / 2u32;
    if r.modpow(&e, p).is_one() {
        1
    } else {
        -1
    }
}

/// Coefficients of `f(x₀ + t)` from coefficients of `f` (both low → high).
fn taylor_shift(f: &[BigInt], x0: &BigInt) -> Vec<BigInt> {
    let mut c = f.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = &c[j + 1] * x0;
            c[j] += t;
        }
    }
    c
}

/// Does some `x ∈ x₀ + pⁿℤ_p` make `f(x)` a nonzero `p`-adic square?
fn class_search(f: &[BigInt], p: &BigInt, x0: BigInt, n: u32, cap: u32) -> Local {
    let two = BigInt::from(2);
    let mut stack = vec![(x0, n)];
    let mut undecided = false;
    while let Some((x0, n)) = stack.pop() {
        let t = taylor_shift(f, &x0);
        let g0 = &t[0];
        if is_padic_square(g0, p) {
            return Local::Soluble;
        }
        let v0 = arith::valuation(g0, p);
        // Hensel: v(f(x₀)) > 2 v(f'(x₀)) gives a simple root.
        if let Some(v1) = t.get(1).and_then(|d| arith::valuation(d, p)) {
            if v0.is_none_or(|v0| v0 > 2 * v1) {
                return Local::Soluble;
            }
        }
        // m = min over k ≥ 1 of v(t_k) + n·k
        let m = t
            .iter()
            .enumerate()
            .skip(1)
            .filter_map(|(k, c)| arith::valuation(c, p).map(|v| v + n * k as u32))
            .min();
        let decided = match (v0, m) {
            (Some(_), None) => true,
            (Some(v0), Some(m)) if v0 < m => *p != two || m - v0 >= 3,
            _ => false,
        };
        if decided {
            // Every x in the class has f(x) in the square class of f(x₀), which is not a square.
            continue;
        }
        if n >= cap {
            undecided = true;
            continue;
        }
        let step = p.pow(n);
        let count = p.to_u64().unwrap_or(u64::MAX);
        for i in (0..count).rev() {
            stack.push((&x0 + &step * BigInt::from(i), n + 1));
        }
    }
    if undecided {
        Local::Undecided
    } else {
        Local::Insoluble
    }
}

/// `p`-adic solubility of `z² = Q(r, s)` with primitive `(r, s)`.
pub fn is_padic_soluble(q: &QuarticForm, p: &BigInt, cap: u32) -> Local {
    let large = p.to_u64().is_none_or(|p| p > ENUMERATION_LIMIT);
    if large {
        return if large_prime_shortcut(q, p) {
            Local::Soluble
        } else {
            Local::Undecided
        };
    }
    // s a unit: x = r/s ∈ ℤ_p and f(x) = Q(x, 1).
    let f: Vec<BigInt> = q.c.iter().rev().cloned().collect();
    let a = class_search(&f, p, BigInt::zero(), 0, cap);
    if a == Local::Soluble {
        return a;
    }
    // p | s, r a unit: y = s/r ∈ pℤ_p and f(y) = Q(1, y).
    let g: Vec<BigInt> = q.c.to_vec();
    let b = class_search(&g, p, BigInt::zero(), 1, cap);
    match (a, b) {
        (_, Local::Soluble) => Local::Soluble,
        (Local::Insoluble, Local::Insoluble) => Local::Insoluble,
        _ => Local::Undecided,
    }
}

/// For a large odd prime, `Q mod p` takes a nonzero square value (which lifts)
/// unless it vanishes or is a non-residue times the square of a quadratic.
fn large_prime_shortcut(q: &QuarticForm, p: &BigInt) -> bool {
    let c: Vec<BigInt> = q.c.iter().map(|c| c.mod_floor(p)).collect();
    if c.iter().all(Zero::is_zero) {
        return false;
    }
    match square_form_multiplier(&c, p) {
        None => true,
        Some(k) => legendre(&k, p) == 1,
    }
}

/// If `Q ≡ k·h² (mod p)` return `k`.
fn square_form_multiplier(c: &[BigInt], p: &BigInt) -> Option<BigInt> {
    let inv = |x: &BigInt| x.modpow(&(p - 2u32), p);
    let m = |x: BigInt| x.mod_floor(p);
    if !c[0].is_zero() {
        let i0 = inv(&c[0]);
        let i2 = inv(&BigInt::from(2));
        let alpha = m(&c[1] * &i0 * &i2);
        let beta = m((&c[2] * &i0 - &alpha * &alpha) * &i2);
        let ok = m(2 * &alpha * &beta - &c[3] * &i0).is_zero() && m(&beta * &beta - &c[4] * &i0).is_zero();
        return ok.then(|| c[0].clone());
    }
    if !c[1].is_zero() {
        return None;
    }
    if !c[2].is_zero() {
        return m(&c[3] * &c[3] - 4 * &c[2] * &c[4])
            .is_zero()
            .then(|| c[2].clone());
    }
    if !c[3].is_zero() {
        return None;
    }
    Some(c[4].clone())
}

/// Dense univariate polynomials over ℚ, coefficients low → high.
mod poly {
    use num_rational::BigRational;
    use num_traits::{One, Signed, Zero};

    pub type Poly = Vec<BigRational>;

    pub fn trim(mut f: Poly) -> Poly {
        while f.last().is_some_and(Zero::is_zero) {
            f.pop();
        }
        f
    }

    fn deriv(f: &Poly) -> Poly {
        trim(
            f.iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(i.into()))
                .collect(),
        )
    }

    fn sub(f: &Poly, g: &Poly) -> Poly {
        let n = f.len().max(g.len());
        trim(
            (0..n)
                .map(|i| {
                    let a = f.get(i).cloned().unwrap_or_else(BigRational::zero);
                    let b = g.get(i).cloned().unwrap_or_else(BigRational::zero);
                    a - b
                })
                .collect(),
        )
    }

    fn monic(f: Poly) -> Poly {
        match f.last().cloned() {
            Some(lc) => f.into_iter().map(|c| c / &lc).collect(),
            None => f,
        }
    }

    /// `(quotient, remainder)`.
    fn divrem(f: &Poly, g: &Poly) -> (Poly, Poly) {
        let mut r = f.clone();
        let dg = g.len() - 1;
        let lc = g[dg].clone();
        if r.len() <= dg {
            return (Vec::new(), r);
        }
        let mut q = vec![BigRational::zero(); r.len() - dg];
        for i in (0..q.len()).rev() {
            let coef = &r[i + dg] / &lc;
            for (j, gj) in g.iter().enumerate() {
                let t = &coef * gj;
                r[i + j] -= t;
            }
            q[i] = coef;
        }
        (trim(q), trim(r))
    }

    fn gcd(f: &Poly, g: &Poly) -> Poly {
        let (mut a, mut b) = (f.clone(), g.clone());
        while !b.is_empty() {
            let (_, r) = divrem(&a, &b);
            a = b;
            b = r;
        }
        monic(a)
    }

    fn is_const(f: &Poly) -> bool {
        f.len() <= 1
    }

    /// Product of the squarefree factors of odd multiplicity (Yun).
    pub fn odd_multiplicity_part(f: &Poly) -> Poly {
        let df = deriv(f);
        let a0 = gcd(f, &df);
        let mut b = divrem(f, &a0).0;
        let mut c = divrem(&df, &a0).0;
        let mut d = sub(&c, &deriv(&b));
        let mut out: Poly = vec![BigRational::one()];
        let mut i = 1;
        while !is_const(&b) {
            let ai = gcd(&b, &d);
            b = divrem(&b, &ai).0;
            c = divrem(&d, &ai).0;
            d = sub(&c, &deriv(&b));
            if i % 2 == 1 {
                out = mul(&out, &ai);
            }
            i += 1;
        }
        out
    }

    fn mul(f: &Poly, g: &Poly) -> Poly {
        if f.is_empty() || g.is_empty() {
            return Vec::new();
        }
        let mut out = vec![BigRational::zero(); f.len() + g.len() - 1];
        for (i, a) in f.iter().enumerate() {
            for (j, b) in g.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        trim(out)
    }

    /// Number of distinct real roots of a squarefree polynomial.
    pub fn real_root_count(f: &Poly) -> usize {
        if is_const(f) {
            return 0;
        }
        let mut chain = vec![f.clone(), deriv(f)];
        loop {
            let n = chain.len();
            let (_, r) = divrem(&chain[n - 2], &chain[n - 1]);
            if r.is_empty() {
                break;
            }
            chain.push(r.into_iter().map(|c| -c).collect());
        }
        let changes = |signs: Vec<i8>| {
            let nz: Vec<i8> = signs.into_iter().filter(|s| *s != 0).collect();
            nz.windows(2).filter(|w| w[0] != w[1]).count()
        };
        let sign = |c: &BigRational| if c.is_positive() { 1i8 } else if c.is_negative() { -1 } else { 0 };
        let at_pos: Vec<i8> = chain.iter().map(|p| sign(p.last().unwrap())).collect();
        let at_neg: Vec<i8> = chain
            .iter()
            .map(|p| {
                let s = sign(p.last().unwrap());
                if (p.len() - 1) % 2 == 1 {
                    -s
                } else {
                    s
                }
            })
            .collect();
        changes(at_neg).saturating_sub(changes(at_pos))
    }
}
