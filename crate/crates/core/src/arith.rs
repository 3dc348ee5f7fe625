//! Exact integer utilities: square roots, squarefree parts, signed squarefree
//! divisors and trial-division factoring.
//!
//! Factoring is deliberately simple-minded. Anything trial division cannot
//! finish is reported as an unfactored cofactor instead of being guessed at,
//! and callers decide whether the divisors that are known are good enough.

use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default bound for trial division.
pub const DEFAULT_TRIAL_LIMIT: u64 = 1_000_000;

/// `(⌊√n⌋, ⌊√n⌋² == n)` for `n ≥ 0`.
pub fn integer_sqrt(n: &BigInt) -> Result<(BigInt, bool)> {
    if n.is_negative() {
        return Err(Error::Domain(format!("integer_sqrt of negative value {n}")));
    }
    let root = n.sqrt();
    let exact = &root * &root == *n;
    Ok((root, exact))
}

// Quadratic residue masks: bit r set iff r is a square modulo m.
const fn qr_mask_64() -> u64 {
    let mut mask = 0u64;
    let mut i = 0u64;
    while i < 64 {
        mask |= 1 << ((i * i) % 64);
        i += 1;
    }
    mask
}

const fn qr_table<const M: usize>() -> [bool; M] {
    let mut t = [false; M];
    let mut i = 0;
    while i < M {
        t[(i * i) % M] = true;
        i += 1;
    }
    t
}

pub(crate) const SQ64: u64 = qr_mask_64();
pub(crate) const SQ63: [bool; 63] = qr_table::<63>();
pub(crate) const SQ65: [bool; 65] = qr_table::<65>();
pub(crate) const SQ11: [bool; 11] = qr_table::<11>();

/// Product of the sieve moduli; residues modulo this decide all four tables.
pub(crate) const SIEVE_MODULUS: u64 = 64 * 63 * 65 * 11;

/// Cheap necessary condition for `n` (given modulo [`SIEVE_MODULUS`]) to be a square.
#[inline]
pub(crate) fn residue_may_be_square(res: u64) -> bool {
    SQ64 >> (res & 63) & 1 == 1
        && SQ63[(res % 63) as usize]
        && SQ65[(res % 65) as usize]
        && SQ11[(res % 11) as usize]
}

/// `n mod SIEVE_MODULUS` in `[0, SIEVE_MODULUS)`.
pub(crate) fn sieve_residue(n: &BigInt) -> u64 {
    let m = BigInt::from(SIEVE_MODULUS);
    n.mod_floor(&m).to_u64().unwrap_or(0)
}

/// The square root of `n` if `n` is a perfect square (zero included).
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    if !residue_may_be_square(sieve_residue(n)) {
        return None;
    }
    let root = n.sqrt();
    (&root * &root == *n).then_some(root)
}

pub fn is_square(n: &BigInt) -> bool {
    exact_sqrt(n).is_some()
}

/// Exponent of the prime `p` in `n`; `None` when `n` is zero.
pub fn valuation(n: &BigInt, p: &BigInt) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return Some(v);
        }
        n = q;
        v += 1;
    }
}

/// Gcd of a list of integers (zero for an empty or all-zero list).
pub fn content<'a>(values: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::zero(), |acc, v| acc.gcd(v))
}

/// Prime factorization, possibly incomplete.
///
/// `sign · ∏ pᵉ · cofactor` reconstructs the input. `cofactor` is present
/// only when trial division stopped on a composite it could not split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub sign: i8,
    pub prime_powers: Vec<(BigUint, u32)>,
    pub cofactor: Option<BigUint>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.cofactor.is_none()
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.prime_powers.iter().map(|(p, _)| p)
    }

    /// Multiply everything back together.
    pub fn value(&self) -> BigInt {
        let mut acc = BigUint::one();
        for (p, e) in &self.prime_powers {
            acc *= p.pow(*e);
        }
        if let Some(c) = &self.cofactor {
            acc *= c;
        }
        let acc = BigInt::from(acc);
        if self.sign < 0 {
            -acc
        } else {
            acc
        }
    }

    fn push(&mut self, p: BigUint, e: u32) {
        match self.prime_powers.binary_search_by(|(q, _)| q.cmp(&p)) {
            Ok(i) => self.prime_powers[i].1 += e,
            Err(i) => self.prime_powers.insert(i, (p, e)),
        }
    }
}

/// Miller–Rabin with the first twelve prime bases. Deterministic below 3.3·10²⁴.
pub fn is_probable_prime(n: &BigUint) -> bool {
    const BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &b in &BASES {
        let b = BigUint::from(b);
        if *n == b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &b in &BASES {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Trial-division factoring with an optional list of hinted primes that are
/// divided out first.
#[derive(Clone, Debug)]
pub struct Factorizer {
    limit: u64,
    primes: Arc<[u32]>,
    hints: Vec<BigUint>,
}

impl Default for Factorizer {
    fn default() -> Self {
        Self::new(DEFAULT_TRIAL_LIMIT)
    }
}

impl Factorizer {
    pub fn new(limit: u64) -> Self {
        static DEFAULT_PRIMES: OnceLock<Arc<[u32]>> = OnceLock::new();
        let limit = limit.max(2);
        let sieve = || Arc::from(primes_up_to(limit.min(u32::MAX as u64) as u32));
        let primes = if limit == DEFAULT_TRIAL_LIMIT {
            DEFAULT_PRIMES.get_or_init(sieve).clone()
        } else {
            sieve()
        };
        Self {
            limit,
            primes,
            hints: Vec::new(),
        }
    }

    pub fn with_hints(mut self, hints: impl IntoIterator<Item = BigUint>) -> Self {
        self.hints.extend(hints.into_iter().filter(|h| *h > BigUint::one()));
        self.hints.sort();
        self.hints.dedup();
        self
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn hints(&self) -> &[BigUint] {
        &self.hints
    }

    /// Factor `n ≠ 0`.
    pub fn factor(&self, n: &BigInt) -> Result<Factorization> {
        if n.is_zero() {
            return Err(Error::Domain("cannot factor zero".into()));
        }
        let mut out = Factorization {
            sign: if n.sign() == Sign::Minus { -1 } else { 1 },
            prime_powers: Vec::new(),
            cofactor: None,
        };
        let mut rest = n.magnitude().clone();
        for h in &self.hints {
            let mut e = 0;
            while (&rest % h).is_zero() {
                rest /= h;
                e += 1;
            }
            if e > 0 {
                out.push(h.clone(), e);
            }
        }
        for &p in self.primes.iter() {
            if rest.is_one() {
                break;
            }
            let p64 = p as u64;
            if rest.bits() <= 64 {
                let r = rest.to_u64().unwrap_or(0);
                if p64.saturating_mul(p64) > r {
                    break;
                }
            }
            if (&rest % p).is_zero() {
                let mut e = 0;
                while (&rest % p).is_zero() {
                    rest /= p;
                    e += 1;
                }
                out.push(BigUint::from(p), e);
            }
        }
        if !rest.is_one() {
            let limit_sq = BigUint::from(self.limit) * BigUint::from(self.limit);
            if rest < limit_sq || is_probable_prime(&rest) {
                out.push(rest, 1);
            } else {
                let root = rest.sqrt();
                if &root * &root == rest && is_probable_prime(&root) {
                    out.push(root, 2);
                } else {
                    log::warn!(
                        "trial division up to {} left a composite cofactor with {} bits",
                        self.limit,
                        rest.bits()
                    );
                    out.cofactor = Some(rest);
                }
            }
        }
        Ok(out)
    }

    /// `(s, m)` with `n = s·m²` and `s` squarefree over the known primes.
    /// An unsplit cofactor is kept in `s` unless it is a perfect square.
    pub fn squarefree_decompose(&self, n: &BigInt) -> Result<(BigInt, BigInt)> {
        let f = self.factor(n)?;
        let mut s = BigUint::one();
        let mut m = BigUint::one();
        for (p, e) in &f.prime_powers {
            if e % 2 == 1 {
                s *= p;
            }
            m *= p.pow(e / 2);
        }
        if let Some(c) = &f.cofactor {
            let root = c.sqrt();
            if &root * &root == *c {
                m *= root;
            } else {
                s *= c;
            }
        }
        let s = BigInt::from_biguint(if f.sign < 0 { Sign::Minus } else { Sign::Plus }, s);
        Ok((s, BigInt::from(m)))
    }

    /// Signed squarefree divisors of `n ≠ 0` in canonical order.
    pub fn squarefree_divisors(&self, n: &BigInt) -> Result<Vec<BigInt>> {
        let f = self.factor(n)?;
        Ok(squarefree_divisors_of(&f))
    }
}

/// All `±q` with `q` a product of distinct known primes of `f`, ordered by
/// ascending absolute value with the positive sign first. An unsplit
/// cofactor is treated as one more prime.
pub fn squarefree_divisors_of(f: &Factorization) -> Vec<BigInt> {
    let mut pos = vec![BigUint::one()];
    let atoms = f.primes().chain(f.cofactor.iter().filter(|c| {
        let r = c.sqrt();
        &r * &r != **c
    }));
    for p in atoms {
        let more: Vec<BigUint> = pos.iter().map(|q| q * p).collect();
        pos.extend(more);
    }
    pos.sort();
    let mut out = Vec::with_capacity(pos.len() * 2);
    for q in pos {
        let q = BigInt::from(q);
        out.push(q.clone());
        out.push(-q);
    }
    out
}

/// [`Factorizer::squarefree_decompose`] with the default trial limit.
pub fn squarefree_decompose(n: &BigInt) -> Result<(BigInt, BigInt)> {
    Factorizer::default().squarefree_decompose(n)
}

/// [`Factorizer::squarefree_divisors`] with the default trial limit.
pub fn squarefree_divisors(n: &BigInt) -> Result<Vec<BigInt>> {
    Factorizer::default().squarefree_divisors(n)
}

/// Factor `n` by trial division up to `limit`.
pub fn trial_factor(n: &BigInt, limit: u64) -> Result<Factorization> {
    Factorizer::new(limit).factor(n)
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(limit: u32) -> Vec<u32> {
    let n = limit as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u32);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}
