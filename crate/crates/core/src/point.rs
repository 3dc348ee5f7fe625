//! Rational points, the group law in exact arithmetic, torsion screening and
//! the maps between a curve, its origin-shifted models and its 2-isogenous
//! partner.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith;
use crate::error::{Error, Result};
use crate::forms::Curve;

/// Parse `n` or `n/d` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Square root of a nonnegative rational square.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    let n = arith::exact_sqrt(q.numer())?;
    let d = arith::exact_sqrt(q.denom())?;
    Some(BigRational::new(n, d))
}

/// An affine point with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoint {
    x: BigRational,
    y: BigRational,
}

impl RationalPoint {
    /// A point on `curve`; rejects anything off the curve.
    pub fn on(curve: &Curve, x: BigRational, y: BigRational) -> Result<Self> {
        let p = Self { x, y };
        if !p.lies_on(curve) {
            return Err(Error::Invariant(format!("({p}) is not on {curve}")));
        }
        Ok(p)
    }

    /// The point with abscissa `x` and nonnegative ordinate, if `x` lifts.
    pub fn from_x(curve: &Curve, x: BigRational) -> Option<Self> {
        let y = rational_sqrt(&curve.rhs(&x))?;
        Some(Self { x, y })
    }

    pub fn x(&self) -> &BigRational {
        &self.x
    }

    pub fn y(&self) -> &BigRational {
        &self.y
    }

    pub fn lies_on(&self, curve: &Curve) -> bool {
        &self.y * &self.y == curve.rhs(&self.x)
    }

    /// `½·ln max(|num x|, |den x|)`.
    pub fn naive_height(&self) -> f64 {
        let n = ln_abs(self.x.numer());
        let d = ln_abs(self.x.denom());
        n.max(d) / 2.0
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", format_rational(&self.x), format_rational(&self.y))
    }
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    x: String,
    y: String,
}

impl Serialize for RationalPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointRepr {
            x: format_rational(&self.x),
            y: format_rational(&self.y),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = PointRepr::deserialize(d)?;
        Ok(Self {
            x: parse_rational(&r.x).map_err(D::Error::custom)?,
            y: parse_rational(&r.y).map_err(D::Error::custom)?,
        })
    }
}

/// Natural log of `|n|` for arbitrarily large `n` (0 for `n = 0`).
pub fn ln_abs(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return 0.0;
    }
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().unwrap_or(0.0);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `P + Q` in the group of `curve`; `None` is the point at infinity.
pub fn add(curve: &Curve, p: Option<&RationalPoint>, q: Option<&RationalPoint>) -> Option<RationalPoint> {
    let (p, q) = match (p, q) {
        (None, q) => return q.cloned(),
        (p, None) => return p.cloned(),
        (Some(p), Some(q)) => (p, q),
    };
    let a = BigRational::from_integer(curve.a().clone());
    let b = BigRational::from_integer(curve.b().clone());
    let slope = if p.x == q.x {
        if p.y != q.y || p.y.is_zero() {
            return None;
        }
        let three = BigRational::from_integer(3.into());
        let two = BigRational::from_integer(2.into());
        (three * &p.x * &p.x + two.clone() * &a * &p.x + &b) / (two * &p.y)
    } else {
        (&q.y - &p.y) / (&q.x - &p.x)
    };
    let x = &slope * &slope - &a - &p.x - &q.x;
    let y = &slope * (&p.x - &x) - &p.y;
    Some(RationalPoint { x, y })
}

/// Whether `P` has finite order.
///
/// Uses the bound of 12 on the order of a rational torsion point, and the
/// fact that torsion points on an integral model have integral coordinates.
pub fn has_finite_order(curve: &Curve, p: &RationalPoint) -> bool {
    let mut acc = Some(p.clone());
    for _ in 1..=12 {
        match &acc {
            None => return true,
            Some(q) if !q.x.is_integer() => return false,
            Some(_) => {}
        }
        acc = add(curve, acc.as_ref(), Some(p));
    }
    acc.is_none()
}

/// Abscissae of known torsion points.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TorsionList {
    parsed: Vec<BigRational>,
}

impl Serialize for TorsionList {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let xs: Vec<String> = self.parsed.iter().map(format_rational).collect();
        xs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorsionList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let xs = Vec::<String>::deserialize(d)?;
        let mut t = TorsionList::default();
        for x in xs {
            t.push(parse_rational(&x).map_err(D::Error::custom)?);
        }
        Ok(t)
    }
}

impl TorsionList {
    /// `0` and the rational roots of `x² + a x + b`.
    pub fn seeded(curve: &Curve) -> Self {
        let mut t = Self::default();
        t.push(BigRational::zero());
        for e in two_torsion_roots(curve) {
            t.push(BigRational::from_integer(e));
        }
        t
    }

    pub fn push(&mut self, x: BigRational) {
        if !self.parsed.contains(&x) {
            self.parsed.push(x);
        }
    }

    pub fn extend(&mut self, xs: impl IntoIterator<Item = BigRational>) {
        for x in xs {
            self.push(x);
        }
    }

    pub fn xs(&self) -> &[BigRational] {
        &self.parsed
    }

    /// `y = 0`, or `x` on the list.
    pub fn is_torsion(&self, p: &RationalPoint) -> bool {
        p.y.is_zero() || self.parsed.contains(&p.x)
    }
}

/// Rational (necessarily integral) roots of `x² + a x + b`.
pub fn two_torsion_roots(curve: &Curve) -> Vec<BigInt> {
    let disc = curve.discriminant_factor();
    let Some(root) = arith::exact_sqrt(&disc) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for num in [-curve.a() + &root, -curve.a() - &root] {
        // a² − 4b ≡ a² (mod 4), so −a ± √disc is even.
        out.push(num / 2);
    }
    out.dedup();
    out
}

/// A model of the target curve searched in place of the original.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub curve: Curve,
    /// Points map back by `x ↦ x + shift` onto the base model.
    #[serde(with = "crate::bigser")]
    pub shift: BigInt,
    /// The base model is the 2-isogenous partner of the original curve.
    pub via_isogeny: bool,
}

impl Variant {
    pub fn identity(curve: &Curve) -> Self {
        Self {
            curve: curve.clone(),
            shift: BigInt::zero(),
            via_isogeny: false,
        }
    }
}

/// The curve and its models with a different rational 2-torsion point moved to
/// the origin: `x ↦ x − e` for each rational root `e` of `x² + a x + b`.
pub fn isogeny_shift_variants(curve: &Curve) -> Vec<Variant> {
    let mut out = vec![Variant::identity(curve)];
    let roots = two_torsion_roots(curve);
    if roots.len() < 2 {
        return out;
    }
    for e in roots {
        let a = 3 * &e + curve.a();
        let b = 3 * &e * &e + 2 * curve.a() * &e + curve.b();
        if let Ok(c) = Curve::new(a, b) {
            out.push(Variant {
                curve: c,
                shift: e,
                via_isogeny: false,
            });
        }
    }
    out
}

/// Move a point on a shifted model back to the model it was shifted from.
pub fn unshift(p: &RationalPoint, shift: &BigInt) -> RationalPoint {
    RationalPoint {
        x: &p.x + BigRational::from_integer(shift.clone()),
        y: p.y.clone(),
    }
}

/// `φ: E → E'`, `(x, y) ↦ (y²/x², y(b − x²)/x²)` onto `curve.isogenous()`.
pub fn isogeny_forward(curve: &Curve, p: &RationalPoint) -> Option<RationalPoint> {
    if p.x.is_zero() {
        return None;
    }
    let x2 = &p.x * &p.x;
    let b = BigRational::from_integer(curve.b().clone());
    Some(RationalPoint {
        x: &p.y * &p.y / &x2,
        y: &p.y * (b - &x2) / &x2,
    })
}

/// The dual map `E' → E` for `E' = curve.isogenous()`:
/// `(X, Y) ↦ (Y²/4X², Y(b' − X²)/8X²)`.
pub fn isogeny_back(curve: &Curve, p: &RationalPoint) -> Option<RationalPoint> {
    if p.x.is_zero() {
        return None;
    }
    let x2 = &p.x * &p.x;
    let b_iso = BigRational::from_integer(curve.discriminant_factor());
    let four = BigRational::from_integer(4.into());
    let eight = BigRational::from_integer(8.into());
    Some(RationalPoint {
        x: &p.y * &p.y / (four * &x2),
        y: &p.y * (b_iso - &x2) / (eight * &x2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    const N157_X: &str = "-166136231668185267540804/2825630694251145858025";

    #[test]
    fn n157_point_is_on_curve_and_not_torsion() {
        let c = Curve::new(0, -157 * 157).unwrap();
        let p = RationalPoint::from_x(&c, q(N157_X)).unwrap();
        assert!(p.lies_on(&c));
        assert!(!has_finite_order(&c, &p));
        let t = TorsionList::seeded(&c);
        assert!(!t.is_torsion(&p));
        assert_eq!(t.xs().len(), 3);
        assert!((p.naive_height() - 26.7).abs() < 0.05, "{}", p.naive_height());
    }

    #[test]
    fn torsion_examples() {
        let c = Curve::new(0, -157 * 157).unwrap();
        let t = TorsionList::seeded(&c);
        for x in ["0", "157", "-157"] {
            let p = RationalPoint::from_x(&c, q(x)).unwrap();
            assert!(t.is_torsion(&p));
            assert!(has_finite_order(&c, &p));
        }
        // y = 0 is torsion even when missing from the list.
        let p = RationalPoint::from_x(&c, q("157")).unwrap();
        assert!(TorsionList::default().is_torsion(&p));
        // (−1, 0) on y² = x³ + 6x² + 5x has order 2; (1, ±√12)? not rational.
        let c = Curve::new(6, 5).unwrap();
        let p = RationalPoint::from_x(&c, q("-1")).unwrap();
        assert!(has_finite_order(&c, &p));
    }

    #[test]
    fn naive_height_examples() {
        let c = Curve::new(0, -1).unwrap();
        let p = RationalPoint { x: q("1"), y: q("0") };
        assert!(p.lies_on(&c));
        assert_eq!(p.naive_height(), 0.0);
        let c = Curve::new(0, -367 * 367).unwrap();
        let p = RationalPoint::from_x(&c, q("-367") * q("496953629608513608777/16382168821648506431464").pow(2))
            .unwrap();
        let h = p.naive_height();
        assert!((h - 51.15).abs() < 0.005, "{h}");
    }

    #[test]
    fn shift_variants_of_congruent_curve() {
        let c = Curve::new(0, -157 * 157).unwrap();
        let vs = isogeny_shift_variants(&c);
        let curves: Vec<(BigInt, BigInt)> = vs.iter().map(|v| (v.curve.a().clone(), v.curve.b().clone())).collect();
        let n = BigInt::from(157);
        assert_eq!(curves[0], (BigInt::zero(), -(&n * &n)));
        assert!(curves.contains(&(3 * &n, 2 * &n * &n)));
        assert!(curves.contains(&(-3 * &n, 2 * &n * &n)));
        let c1 = Curve::new(0, -1).unwrap();
        let vs1 = isogeny_shift_variants(&c1);
        let mut got: Vec<_> = vs1.iter().skip(1).map(|v| (v.curve.a().clone(), v.curve.b().clone())).collect();
        got.sort();
        assert_eq!(got, vec![(BigInt::from(-3), BigInt::from(2)), (BigInt::from(3), BigInt::from(2))]);
        // Not fully split: original only.
        assert_eq!(isogeny_shift_variants(&Curve::new(0, 877).unwrap()).len(), 1);
    }

    #[test]
    fn shifted_points_map_back() {
        let c = Curve::new(0, -157 * 157).unwrap();
        let p = RationalPoint::from_x(&c, q(N157_X)).unwrap();
        for v in isogeny_shift_variants(&c) {
            let shifted = RationalPoint {
                x: p.x() - BigRational::from_integer(v.shift.clone()),
                y: p.y().clone(),
            };
            assert!(shifted.lies_on(&v.curve));
            assert_eq!(unshift(&shifted, &v.shift), p);
        }
    }

    #[test]
    fn isogeny_round_trip_lands_on_curves() {
        let e = Curve::new(6243, 1).unwrap();
        let iso = e.isogenous();
        let x = q("2836849934676319513920/468984909449923441");
        let p = RationalPoint::from_x(&iso, x).unwrap();
        let back = isogeny_back(&e, &p).unwrap();
        assert!(back.lies_on(&e));
        assert_eq!(
            format_rational(back.x()),
            "265479261289194419968505186711433025/170541875947725676769862564358062336"
        );
        let fwd = isogeny_forward(&e, &back).unwrap();
        assert!(fwd.lies_on(&iso));
    }

    #[test]
    fn group_law_consistency() {
        // y² = x³ − 25x: (−4, 6) has infinite order.
        let c = Curve::new(0, -25).unwrap();
        let p = RationalPoint::on(&c, q("-4"), q("6")).unwrap();
        let p2 = add(&c, Some(&p), Some(&p)).unwrap();
        assert!(p2.lies_on(&c));
        let p3a = add(&c, Some(&p2), Some(&p)).unwrap();
        let p3b = add(&c, Some(&p), Some(&p2)).unwrap();
        assert_eq!(p3a, p3b);
        assert!(!has_finite_order(&c, &p));
        assert!(RationalPoint::on(&c, q("1"), q("1")).is_err());
    }
}
