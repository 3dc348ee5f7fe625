//! Conics and quartics of the descent.
//!
//! Everything here is exact integer algebra on binary forms: the first-descent
//! conic `h² = d f² + a f g + e g²`, its Pell-style reduction, the pair of
//! quadratics whose simultaneous square-ness carries the descent, the
//! parameterizations that turn one of them into a quartic, and the
//! factorization of that quartic into two integer quadratics.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, Factorizer};
use crate::bigser;
use crate::error::{Error, Result};
use crate::solubility::has_rational_roots;

/// `y² = x³ + a x² + b x` with `b ≠ 0` and `a² − 4b ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Curve {
    #[serde(with = "bigser")]
    a: BigInt,
    #[serde(with = "bigser")]
    b: BigInt,
}

impl Curve {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Result<Self> {
        let (a, b) = (a.into(), b.into());
        if b.is_zero() || (&a * &a - BigInt::from(4) * &b).is_zero() {
            return Err(Error::SingularCurve {
                a: a.to_string(),
                b: b.to_string(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    /// `a² − 4b`, the discriminant of `x² + a x + b`.
    pub fn discriminant_factor(&self) -> BigInt {
        &self.a * &self.a - 4 * &self.b
    }

    /// The 2-isogenous curve `y² = x³ − 2a x² + (a² − 4b) x`.
    pub fn isogenous(&self) -> Curve {
        Curve {
            a: -2 * &self.a,
            b: self.discriminant_factor(),
        }
    }

    /// `x³ + a x² + b x`.
    pub fn rhs(&self, x: &BigRational) -> BigRational {
        let a = BigRational::from_integer(self.a.clone());
        let b = BigRational::from_integer(self.b.clone());
        ((x + a) * x + b) * x
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3 + ({})x^2 + ({})x", self.a, self.b)
    }
}

/// The binary quadratic form `a f² + b f g + c g²`.
///
/// Used both for the ternary relations `k·□ = form(f, g)` and for the
/// quadratic factors of a quartic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConicForm {
    #[serde(with = "bigser")]
    pub a: BigInt,
    #[serde(with = "bigser")]
    pub b: BigInt,
    #[serde(with = "bigser")]
    pub c: BigInt,
}

impl ConicForm {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }

    pub fn eval(&self, f: &BigInt, g: &BigInt) -> BigInt {
        (&self.a * f + &self.b * g) * f + &self.c * g * g
    }

    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - 4 * &self.a * &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn coeffs(&self) -> [&BigInt; 3] {
        [&self.a, &self.b, &self.c]
    }

    fn neg(&self) -> Self {
        Self::new(-&self.a, -&self.b, -&self.c)
    }

    fn as_poly(&self) -> [BigInt; 3] {
        [self.a.clone(), self.b.clone(), self.c.clone()]
    }
}

impl fmt::Display for ConicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// An integer point on `k · root² = form(f, g)` with `gcd(f, g) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConicSolution {
    #[serde(with = "bigser")]
    pub k: BigInt,
    #[serde(with = "bigser")]
    pub root: BigInt,
    #[serde(with = "bigser")]
    pub f: BigInt,
    #[serde(with = "bigser")]
    pub g: BigInt,
}

impl ConicSolution {
    pub fn new(
        k: impl Into<BigInt>,
        root: impl Into<BigInt>,
        f: impl Into<BigInt>,
        g: impl Into<BigInt>,
    ) -> Self {
        Self {
            k: k.into(),
            root: root.into(),
            f: f.into(),
            g: g.into(),
        }
    }

    /// Exact check of `k · root² = form(f, g)` and primitivity.
    pub fn satisfies(&self, form: &ConicForm) -> bool {
        self.f.gcd(&self.g).is_one()
            && &self.k * &self.root * &self.root == form.eval(&self.f, &self.g)
    }
}

/// `z² = c₀ r⁴ + c₁ r³s + c₂ r²s² + c₃ rs³ + c₄ s⁴`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuarticForm {
    #[serde(with = "bigser::array5")]
    pub c: [BigInt; 5],
}

impl QuarticForm {
    pub fn new(c: [BigInt; 5]) -> Self {
        Self { c }
    }

    pub fn from_i64(c: [i64; 5]) -> Self {
        Self {
            c: c.map(BigInt::from),
        }
    }

    pub fn eval(&self, r: &BigInt, s: &BigInt) -> BigInt {
        let mut acc = self.c[0].clone();
        let mut spow = s.clone();
        for c in &self.c[1..] {
            acc = acc * r + c * &spow;
            spow *= s;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn content(&self) -> BigInt {
        arith::content(self.c.iter())
    }

    /// Divide out the content, keeping its squarefree part: `self = m² · reduced`.
    pub fn reduced(&self, factorizer: &Factorizer) -> (QuarticForm, BigInt) {
        let content = self.content();
        if content.is_zero() || content.is_one() {
            return (self.clone(), BigInt::one());
        }
        let (_, m) = factorizer
            .squarefree_decompose(&content)
            .unwrap_or_else(|_| (content.clone(), BigInt::one()));
        let m2 = &m * &m;
        (
            QuarticForm {
                c: self.c.clone().map(|c| c / &m2),
            },
            m,
        )
    }

    /// The quartic in `(−r, s)`.
    pub fn flip_r(&self) -> QuarticForm {
        let mut c = self.c.clone();
        c[1] = -&c[1];
        c[3] = -&c[3];
        QuarticForm { c }
    }

    /// The quartic in `(s, r)`.
    pub fn reversed(&self) -> QuarticForm {
        let mut c = self.c.clone();
        c.reverse();
        QuarticForm { c }
    }

    pub fn scaled(&self, k: &BigInt) -> QuarticForm {
        QuarticForm {
            c: self.c.clone().map(|c| c * k),
        }
    }

    /// The invariants `(I, J)` with `27·disc = 4I³ − J²`.
    pub fn invariants(&self) -> (BigInt, BigInt) {
        let [a, b, c, d, e] = &self.c;
        let i = 12 * a * e - 3 * b * d + c * c;
        let j = 72 * a * c * e + 9 * b * c * d - 27 * a * d * d - 27 * e * b * b - 2 * c * c * c;
        (i, j)
    }

    pub fn discriminant(&self) -> BigInt {
        let (i, j) = self.invariants();
        (4 * &i * &i * &i - &j * &j) / 27
    }
}

impl fmt::Display for QuarticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d, e] = &self.c;
        write!(f, "({a}, {b}, {c}, {d}, {e})")
    }
}

/// `quartic = (u₁r² + u₂rs + u₃s²)(v₁r² + v₂rs + v₃s²)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuarticFactorization {
    pub u: ConicForm,
    pub v: ConicForm,
}

impl QuarticFactorization {
    pub fn expand(&self) -> QuarticForm {
        QuarticForm::new(poly_mul(&self.u.as_poly(), &self.v.as_poly()))
    }

    pub fn swapped(&self) -> QuarticFactorization {
        QuarticFactorization {
            u: self.v.clone(),
            v: self.u.clone(),
        }
    }

    /// One representative per orbit under `(u, v) ↦ (v, u)` and `(u, v) ↦ (−u, −v)`:
    /// `u₁ > 0` and `u` lexicographically largest of the two choices.
    fn canonical(self) -> QuarticFactorization {
        let norm = |f: QuarticFactorization| {
            if f.u.a.is_negative() || (f.u.a.is_zero() && f.u.c.is_negative()) {
                QuarticFactorization {
                    u: f.u.neg(),
                    v: f.v.neg(),
                }
            } else {
                f
            }
        };
        let a = norm(self.clone());
        let b = norm(self.swapped());
        if a.u.as_poly() >= b.u.as_poly() {
            a
        } else {
            b
        }
    }
}

impl fmt::Display for QuarticFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * {}", self.u, self.v)
    }
}

/// `d H² = F² − α G²` with `a² − 4b = α β²`, `α` squarefree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PellReduction {
    #[serde(with = "bigser")]
    pub alpha: BigInt,
    #[serde(with = "bigser")]
    pub beta: BigInt,
    #[serde(with = "bigser")]
    pub d: BigInt,
}

impl PellReduction {
    /// The form `F² − α G²`; solutions are sought with multiplier `d`.
    pub fn form(&self) -> ConicForm {
        ConicForm::new(1, 0, -&self.alpha)
    }

    /// Map a solution of `d H² = F² − α G²` back to a primitive solution
    /// `(h, f, g)` of the first conic.
    pub fn lift(&self, curve: &Curve, big_f: &BigInt, big_g: &BigInt, big_h: &BigInt) -> ConicSolution {
        let f = &self.beta * big_f - curve.a() * big_g;
        let g = 2 * &self.d * big_g;
        let h = &self.d * &self.beta * big_h;
        let common = f.gcd(&g);
        if common.is_zero() {
            return ConicSolution::new(1, h, f, g);
        }
        let (mut f, mut g, mut h) = (f / &common, g / &common, h / &common);
        if g.is_negative() || (g.is_zero() && f.is_negative()) {
            f = -f;
            g = -g;
        }
        if h.is_negative() {
            h = -h;
        }
        ConicSolution::new(1, h, f, g)
    }
}

/// A pair of binary quadratics `(p(r,s), q(r,s))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticMap {
    pub p: ConicForm,
    pub q: ConicForm,
}

impl QuadraticMap {
    pub fn eval(&self, r: &BigInt, s: &BigInt) -> (BigInt, BigInt) {
        (self.p.eval(r, s), self.q.eval(r, s))
    }

    /// `scale · form(p(r,s), q(r,s))` as a quartic in `(r, s)`.
    pub fn compose(&self, form: &ConicForm, scale: &BigInt) -> QuarticForm {
        let p = self.p.as_poly();
        let q = self.q.as_poly();
        let pp = poly_mul(&p, &p);
        let pq = poly_mul(&p, &q);
        let qq = poly_mul(&q, &q);
        let c = std::array::from_fn(|i| {
            scale * (&form.a * &pp[i] + &form.b * &pq[i] + &form.c * &qq[i])
        });
        QuarticForm { c }
    }
}

fn poly_mul(x: &[BigInt; 3], y: &[BigInt; 3]) -> [BigInt; 5] {
    let mut out: [BigInt; 5] = Default::default();
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            out[i + j] += xi * yj;
        }
    }
    out
}

/// `h² = d f² + a f g + (b/d) g²`.
pub fn first_conic(curve: &Curve, d: &BigInt) -> Result<ConicForm> {
    if d.is_zero() || !curve.b().is_multiple_of(d) {
        return Err(Error::Domain(format!("{d} does not divide b = {}", curve.b())));
    }
    Ok(ConicForm::new(d.clone(), curve.a().clone(), curve.b() / d))
}

pub fn pell_reduce(curve: &Curve, d: &BigInt, factorizer: &Factorizer) -> Result<PellReduction> {
    let (alpha, beta) = factorizer.squarefree_decompose(&curve.discriminant_factor())?;
    Ok(PellReduction {
        alpha,
        beta,
        d: d.clone(),
    })
}

/// The quadratics `k u² = g₀p² − g₀d q²` and
/// `k v² = f₀p² − 2h₀pq + (a g₀ + d f₀) q²` attached to a conic solution.
pub fn descent_pair(curve: &Curve, d: &BigInt, sol: &ConicSolution) -> Result<(ConicForm, ConicForm)> {
    let (h0, f0, g0) = (&sol.root, &sol.f, &sol.g);
    if g0.is_zero() {
        return Err(Error::Domain("conic solution has g0 = 0".into()));
    }
    let first = ConicForm::new(g0.clone(), 0, -(g0 * d));
    let second = ConicForm::new(f0.clone(), -2 * h0, curve.a() * g0 + d * f0);
    Ok((first, second))
}

/// `g₀⁴(a² − 4b)`: every admissible `k₀` divides it.
pub fn k0_divisor_bound(curve: &Curve, g0: &BigInt) -> BigInt {
    let g2 = g0 * g0;
    &g2 * &g2 * curve.discriminant_factor()
}

/// Parameterize all solutions of `k₀u² = g₀p² − g₀d q²` from the seed
/// `first = (k₀, u₀, p₀, q₀)`. A seed with `q₀ = 0` gets the Pell-style map.
pub fn parameterize_first(first: &ConicSolution, g0: &BigInt, d: &BigInt) -> QuadraticMap {
    let (k0, u0, p0, q0) = (&first.k, &first.root, &first.f, &first.g);
    if q0.is_zero() {
        return pell_parameterization(d);
    }
    QuadraticMap {
        p: ConicForm::new(-(p0 * k0), 2 * u0 * k0, -(p0 * g0)),
        q: ConicForm::new(-(q0 * k0), 0, q0 * g0),
    }
}

/// `p = r² + d s²`, `q = 2rs`, so that `p² − d q² = (r² − d s²)²`.
pub fn pell_parameterization(d: &BigInt) -> QuadraticMap {
    QuadraticMap {
        p: ConicForm::new(1, 0, d.clone()),
        q: ConicForm::new(0, 2, 0),
    }
}

/// The quartic `k₀ · (second form)(p(r,s), q(r,s))` by its closed-form coefficients.
pub fn quartic_from_first_descent(
    a: &BigInt,
    d: &BigInt,
    conic: &ConicSolution,
    first: &ConicSolution,
) -> QuarticForm {
    let (h0, f0, g0) = (&conic.root, &conic.f, &conic.g);
    let (k0, u0, p0, q0) = (&first.k, &first.root, &first.f, &first.g);
    let k2 = k0 * k0;
    let k3 = &k2 * k0;
    let q2 = q0 * q0;
    let p2 = p0 * p0;
    let base = a * g0 * &q2 + d * f0 * &q2 + f0 * &p2;
    let hpq = 2 * h0 * p0 * q0;
    let z1 = &k3 * (&base - &hpq);
    let z2 = 4 * u0 * &k3 * (h0 * q0 - f0 * p0);
    let z3 = 2 * &k2 * (f0 * (2 * u0 * u0 * k0 - d * g0 * &q2 + g0 * &p2) - a * g0 * g0 * &q2);
    let z4 = -4 * u0 * g0 * &k2 * (f0 * p0 + h0 * q0);
    let z5 = g0 * g0 * k0 * (&base + &hpq);
    QuarticForm::new([z1, z2, z3, z4, z5])
}

/// Build the first-descent quartic, dispatching on the seed shape.
pub fn first_descent_quartic(curve: &Curve, d: &BigInt, conic: &ConicSolution, first: &ConicSolution) -> Result<QuarticForm> {
    if first.g.is_zero() {
        let (_, second) = descent_pair(curve, d, conic)?;
        Ok(pell_parameterization(d).compose(&second, &first.k))
    } else {
        Ok(quartic_from_first_descent(curve.a(), d, conic, first))
    }
}

/// All factorizations of `q` into two integer quadratics without rational roots.
pub fn factor_quartic(q: &QuarticForm, factorizer: &Factorizer) -> Vec<QuarticFactorization> {
    let [z1, z2, z3, z4, z5] = &q.c;
    if z1.is_zero() || z5.is_zero() {
        return Vec::new();
    }
    let (Ok(f1), Ok(f5)) = (factorizer.factor(z1), factorizer.factor(z5)) else {
        return Vec::new();
    };
    let div1 = positive_divisors(&f1);
    let div5 = positive_divisors(&f5);
    let mut found: Vec<QuarticFactorization> = Vec::new();
    for u1 in &div1 {
        let v1 = z1 / u1;
        for u3 in div5.iter().flat_map(|x| [x.clone(), -x]) {
            let v3 = z5 / &u3;
            for (u2, v2) in middle_coefficients(u1, &v1, &u3, &v3, z2, z3, z4) {
                let fac = QuarticFactorization {
                    u: ConicForm::new(u1.clone(), u2, u3.clone()),
                    v: ConicForm::new(v1.clone(), v2, v3.clone()),
                };
                if fac.expand() != *q {
                    continue;
                }
                if has_rational_roots(&fac.u) || has_rational_roots(&fac.v) {
                    continue;
                }
                let fac = fac.canonical();
                if !found.contains(&fac) {
                    found.push(fac);
                }
            }
        }
    }
    found.sort_by(|x, y| {
        (x.u.as_poly(), x.v.as_poly())
            .cmp(&(y.u.as_poly(), y.v.as_poly()))
            .reverse()
    });
    found
}

/// Candidate `(u₂, v₂)` from `z₂ = u₁v₂ + v₁u₂` and `z₄ = u₃v₂ + v₃u₂`,
/// falling back to the `z₃` equation when the linear system is singular.
fn middle_coefficients(
    u1: &BigInt,
    v1: &BigInt,
    u3: &BigInt,
    v3: &BigInt,
    z2: &BigInt,
    z3: &BigInt,
    z4: &BigInt,
) -> Vec<(BigInt, BigInt)> {
    let det = v1 * u3 - u1 * v3;
    if !det.is_zero() {
        let un = z2 * u3 - u1 * z4;
        let vn = v1 * z4 - v3 * z2;
        if un.is_multiple_of(&det) && vn.is_multiple_of(&det) {
            return vec![(un / &det, vn / &det)];
        }
        return Vec::new();
    }
    // v = λu on the outer coefficients: v₁u₂² − z₂u₂ + u₁(z₃ − 2v₁u₃) = 0.
    let disc = z2 * z2 - 4 * v1 * u1 * (z3 - 2 * v1 * u3);
    let Some(root) = arith::exact_sqrt(&disc) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for num in [z2 + &root, z2 - &root] {
        let den = 2 * v1;
        if !num.is_multiple_of(&den) {
            continue;
        }
        let u2 = num / den;
        let rest = z2 - v1 * &u2;
        if rest.is_multiple_of(u1) {
            out.push((u2, rest / u1));
        }
    }
    out
}

fn positive_divisors(f: &arith::Factorization) -> Vec<BigInt> {
    let mut out = vec![BigInt::one()];
    let mut atoms: Vec<(BigInt, u32)> = f
        .prime_powers
        .iter()
        .map(|(p, e)| (BigInt::from(p.clone()), *e))
        .collect();
    if let Some(c) = &f.cofactor {
        atoms.push((BigInt::from(c.clone()), 1));
    }
    for (p, e) in atoms {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for d in &out {
            let mut pk = d.clone();
            next.push(pk.clone());
            for _ in 0..e {
                pk *= &p;
                next.push(pk.clone());
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// The resultant of the two factors; every admissible `k₁` divides it.
pub fn resultant_k1(fac: &QuarticFactorization) -> Result<BigInt> {
    let (u1, u2, u3) = (&fac.u.a, &fac.u.b, &fac.u.c);
    let (v1, v2, v3) = (&fac.v.a, &fac.v.b, &fac.v.c);
    let res: BigInt = u1 * u1 * v3 * v3 - u1 * u2 * v2 * v3 - 2 * u1 * u3 * v1 * v3 + u1 * u3 * v2 * v2
        + u2 * u2 * v1 * v3
        - u2 * u3 * v1 * v2
        + u3 * u3 * v1 * v1;
    if res.is_zero() {
        return Err(Error::Domain(format!("factors of {fac} share a root")));
    }
    Ok(res)
}

/// Parameterize all solutions of `k₁t² = v(r, s)` from the seed `(k₁, t₁, r₁, s₁)`.
pub fn parameterize_second(second: &ConicSolution, v: &ConicForm) -> Result<QuadraticMap> {
    if !second.satisfies(v) {
        return Err(Error::Domain(format!(
            "({}, {}, {}, {}) does not solve k t^2 = {v}",
            second.k, second.root, second.f, second.g
        )));
    }
    let (k1, t1, r1, s1) = (&second.k, &second.root, &second.f, &second.g);
    Ok(QuadraticMap {
        p: ConicForm::new(k1 * r1, -2 * k1 * t1, r1 * &v.a + s1 * &v.b),
        q: ConicForm::new(s1 * k1, 0, -(s1 * &v.a)),
    })
}

/// `t(i, j)` with `v(r(i,j), s(i,j)) = k₁·t²` under [`parameterize_second`].
pub fn second_square_root(second: &ConicSolution, v: &ConicForm, i: &BigInt, j: &BigInt) -> BigInt {
    let (k1, t1, r1, s1) = (&second.k, &second.root, &second.f, &second.g);
    -(k1 * t1 * i * i) + (2 * r1 * &v.a + s1 * &v.b) * i * j - t1 * &v.a * j * j
}

/// The quartic `k₁ · u(r(i,j), s(i,j))` by its closed-form coefficients.
pub fn quartic_from_second_descent(second: &ConicSolution, u: &ConicForm, v: &ConicForm) -> QuarticForm {
    let (k1, t1, r1, s1) = (&second.k, &second.root, &second.f, &second.g);
    let (u1, u2, u3) = (&u.a, &u.b, &u.c);
    let (v1, v2, v3) = (&v.a, &v.b, &v.c);
    let _ = v3;
    let k2 = k1 * k1;
    let k3 = &k2 * k1;
    let c1 = &k3 * (r1 * r1 * u1 + r1 * s1 * u2 + s1 * s1 * u3);
    let c2 = -2 * &k3 * t1 * (2 * r1 * u1 + s1 * u2);
    let c3 = &k2
        * (4 * k1 * t1 * t1 * u1 + 2 * r1 * r1 * u1 * v1 + 2 * r1 * s1 * u1 * v2
            + s1 * s1 * (u2 * v2 - 2 * u3 * v1));
    let c4 = -2 * &k2 * t1 * (2 * r1 * u1 * v1 + s1 * (2 * u1 * v2 - u2 * v1));
    let c5 = k1
        * (r1 * r1 * u1 * v1 * v1
            + r1 * s1 * v1 * (2 * u1 * v2 - u2 * v1)
            + s1 * s1 * (u1 * v2 * v2 - v1 * (u2 * v2 - u3 * v1)));
    QuarticForm::new([c1, c2, c3, c4, c5])
}
