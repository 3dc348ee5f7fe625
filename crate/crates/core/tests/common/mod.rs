#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

use ecdescent::arith;
use ecdescent::forms::{ConicForm, ConicSolution, Curve, QuarticForm};

pub fn bi(n: i64) -> BigInt {
    BigInt::from(n)
}

/// `count` values drawn from `strategy` with a fixed seed.
pub fn sample<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).expect("strategy gave up").current())
        .collect()
}

/// A curve, a split `b = d·e`, a point
/// `(h₀, f₀, g₀)` on `h² = d f² + a f g + e g²`, and a seed
/// `(k₀, u₀, p₀, q₀)` on `k₀u² = g₀p² − g₀d q²` with `q₀ ≠ 0`.
#[derive(Clone, Debug)]
pub struct FirstState {
    pub curve: Curve,
    pub d: BigInt,
    pub conic: ConicSolution,
    pub first: ConicSolution,
}

fn inverse_mod(x: i64, m: i64) -> Option<i64> {
    let e = BigInt::from(x).extended_gcd(&BigInt::from(m));
    if e.gcd.abs() != BigInt::from(1) {
        return None;
    }
    e.x.mod_floor(&BigInt::from(m)).to_i64()
}

fn square_part(v: &BigInt, limit: i64) -> BigInt {
    let mut u = BigInt::from(1);
    for c in (2..=limit).rev() {
        let c2 = BigInt::from(c * c);
        if v.is_multiple_of(&c2) {
            u = BigInt::from(c);
            break;
        }
    }
    u
}

pub fn first_state() -> impl Strategy<Value = FirstState> {
    (
        -60i64..=60,
        1i64..=9,
        -25i64..=25,
        1i64..=300,
        -3i64..=3,
        -30i64..=30,
        1i64..=30,
        proptest::bool::ANY,
    )
        .prop_filter_map("not a valid descent state", |(a, g0, f0, h0, t, p0, q0, neg_q)| {
            if f0.gcd(&g0) != 1 {
                return None;
            }
            let m = g0 * g0;
            let d = if m == 1 {
                t * 7 + if t >= 0 { 1 } else { -1 }
            } else {
                let inv = inverse_mod((f0 * f0).rem_euclid(m), m)?;
                let base = ((h0 * h0 - a * f0 * g0).rem_euclid(m) * inv).rem_euclid(m);
                base + m * t
            };
            if d == 0 {
                return None;
            }
            let num = h0 * h0 - d * f0 * f0 - a * f0 * g0;
            if num % m != 0 {
                return None;
            }
            let e = num / m;
            if e == 0 {
                return None;
            }
            let curve = Curve::new(a, d * e).ok()?;
            let q0 = if neg_q { -q0 } else { q0 };
            if p0.gcd(&q0) != 1 {
                return None;
            }
            let value = BigInt::from(g0) * (BigInt::from(p0 * p0) - BigInt::from(d) * q0 * q0);
            if value.is_zero() {
                return None;
            }
            let u0 = square_part(&value, 40);
            let k0 = &value / (&u0 * &u0);
            Some(FirstState {
                curve,
                d: bi(d),
                conic: ConicSolution::new(1, h0, f0, g0),
                first: ConicSolution::new(k0, u0, p0, q0),
            })
        })
}

/// A quadratic without rational roots, `u₁u₃ ≠ 0`.
pub fn irreducible(a: i64, b: i64, c: i64) -> Option<ConicForm> {
    if a == 0 || c == 0 {
        return None;
    }
    let disc = b * b - 4 * a * c;
    if disc >= 0 && arith::is_square(&bi(disc)) {
        return None;
    }
    Some(ConicForm::new(a, b, c))
}

pub fn proportional(u: &ConicForm, v: &ConicForm) -> bool {
    let [u1, u2, u3] = u.coeffs();
    let [v1, v2, v3] = v.coeffs();
    u1 * v2 == u2 * v1 && u1 * v3 == u3 * v1 && u2 * v3 == u3 * v2
}

/// Two coprime quadratics `u, v` and a seed `(k₁, t₁, r₁, s₁)` on `k₁t² = v(r, s)`.
#[derive(Clone, Debug)]
pub struct SecondState {
    pub u: ConicForm,
    pub v: ConicForm,
    pub second: ConicSolution,
}

pub fn second_state() -> impl Strategy<Value = SecondState> {
    (
        (-40i64..=40, -40i64..=40, -40i64..=40),
        (-40i64..=40, -40i64..=40, -40i64..=40),
        -20i64..=20,
        -20i64..=20,
    )
        .prop_filter_map("not a valid second state", |((u1, u2, u3), (v1, v2, v3), r1, s1)| {
            let u = irreducible(u1, u2, u3)?;
            let v = irreducible(v1, v2, v3)?;
            if proportional(&u, &v) || r1.gcd(&s1) != 1 {
                return None;
            }
            let value = v.eval(&bi(r1), &bi(s1));
            let t1 = square_part(&value, 20);
            let k1 = &value / (&t1 * &t1);
            Some(SecondState {
                u,
                v,
                second: ConicSolution::new(k1, t1, r1, s1),
            })
        })
}

/// Two non-proportional irreducible quadratics whose product has the
/// rational point `(r₀, 1)`.
#[derive(Clone, Debug)]
pub struct FactoredQuartic {
    pub u: ConicForm,
    pub v: ConicForm,
    pub quartic: QuarticForm,
    pub point: (i64, i64),
}

pub fn factored_quartic() -> impl Strategy<Value = FactoredQuartic> {
    (
        (-30i64..=30, -30i64..=30, -30i64..=30),
        (-30i64..=30, -30i64..=30),
        -6i64..=6,
        1i64..=4,
    )
        .prop_filter_map("not an irreducible pair", |((u1, u2, u3), (v1, v2), r0, m)| {
            let u = irreducible(u1, u2, u3)?;
            let uu = u.eval(&bi(r0), &bi(1)).to_i64()?;
            let v3 = uu * m * m - v1 * r0 * r0 - v2 * r0;
            let v = irreducible(v1, v2, v3)?;
            if proportional(&u, &v) || uu == 0 {
                return None;
            }
            let mut c: [BigInt; 5] = Default::default();
            let up = [bi(u1), bi(u2), bi(u3)];
            let vp = [bi(v1), bi(v2), bi(v3)];
            for i in 0..3 {
                for j in 0..3 {
                    c[i + j] += &up[i] * &vp[j];
                }
            }
            Some(FactoredQuartic {
                u,
                v,
                quartic: QuarticForm::new(c),
                point: (r0, 1),
            })
        })
}

/// Some `(r, s) ≠ (0, 0)` with `|r| + |s| ≤ bound` and `Q(r, s)` a nonzero square.
pub fn brute_force_square(q: &QuarticForm, bound: i64) -> Option<(i64, i64)> {
    let max = q.c.iter().map(|c| c.abs()).max().unwrap_or_default();
    let fits = max < BigInt::from(10i128.pow(25));
    let c: Vec<i128> = if fits {
        q.c.iter().map(|c| c.to_i128().unwrap()).collect()
    } else {
        Vec::new()
    };
    // Q(−r, −s) = Q(r, s): s > 0, or s = 0 and r > 0.
    for s in 0..=bound {
        let rb = bound - s;
        let lo = if s == 0 { 1 } else { -rb };
        for r in lo..=rb {
            let square = if fits {
                let (r, s) = (r as i128, s as i128);
                let (r2, s2) = (r * r, s * s);
                let v = c[0] * r2 * r2 + c[1] * r2 * r * s + c[2] * r2 * s2 + c[3] * r * s2 * s + c[4] * s2 * s2;
                v > 0 && is_square_i128(v)
            } else {
                let v = q.eval(&bi(r), &bi(s));
                v.is_positive() && arith::is_square(&v)
            };
            if square {
                return Some((r, s));
            }
        }
    }
    None
}

fn is_square_i128(v: i128) -> bool {
    const QR64: u64 = {
        let mut m = 0u64;
        let mut i = 0;
        while i < 64 {
            m |= 1 << ((i * i) % 64);
            i += 1;
        }
        m
    };
    if QR64 >> (v & 63) & 1 == 0 {
        return false;
    }
    let r = (v as f64).sqrt() as i128;
    (r.saturating_sub(2)..=r + 2).any(|x| x >= 0 && x.checked_mul(x) == Some(v))
}

/// Diagonal quartics with a local obstruction at ℝ, 3, 5 or 7.
pub fn obstruction_examples() -> Vec<QuarticForm> {
    [
        [-1, 0, 0, 0, -1],
        [-1, 0, -1, 0, -1],
        [3, 0, 0, 0, 3],
        [3, 0, 0, 0, 12],
        [5, 0, 0, 0, 5],
        [7, 0, 0, 0, 7],
        [3, 0, 0, 0, -6],
        [2, 0, 0, 0, 6],
        [6, 0, 0, 0, 6],
    ]
    .into_iter()
    .map(QuarticForm::from_i64)
    .collect()
}
