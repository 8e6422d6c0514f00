//! Capped absolute-precision arithmetic in Q_p.
//!
//! A [`PadicNumber`] is stored as p^val * unit with the unit kept modulo
//! p^(prec-val); `prec` is the absolute precision: the value is known
//! modulo p^prec. Arithmetic never reports more precision than the inputs
//! justify (addition: min of precisions; multiplication: min(N1+v2, N2+v1);
//! inversion of x with valuation v: N-2v).
//!
//! The unit fits in a u128 with modulus below 2^63, which caps the usable
//! number of digits per prime (10 digits at p = 61, 39 at p = 3); requests
//! beyond the cap fail with [`PadicError::PrecisionCap`].

use crate::zmod::Ring;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum PadicError {
    #[error("{0} is not an odd prime >= 3")]
    NotPrime(u64),
    #[error("precision must be >= 1")]
    PrecisionTooLow,
    #[error("requested precision exceeds the u128 cap for p = {p} ({max} digits)")]
    PrecisionCap { p: u64, max: u32 },
    #[error("logarithm of zero")]
    ZeroLog,
    #[error("square root does not exist (non-residue unit part)")]
    NoSquareRoot,
    #[error("matrix singular to working precision (pivot valuation {pivot_val} >= remaining precision {remaining})")]
    Singular { pivot_val: i64, remaining: i64 },
    #[error("not recognizably rational within height bound {0}")]
    NotRational(u64),
    #[error("mixed primes {0} and {1}")]
    MixedPrimes(u64, u64),
    #[error("parse error: {0}")]
    Parse(String),
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    // deterministic Miller-Rabin for u64
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = modpow_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn modpow_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod_u64(r, b, m);
        }
        b = mulmod_u64(b, b, m);
        e >>= 1;
    }
    r
}

/// Sentinel valuation of an exact zero.
pub const INF_VAL: i64 = i64::MAX;

/// An element of Q_p to capped absolute precision.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PadicNumber {
    p: u64,
    /// valuation; INF_VAL encodes an exact zero
    val: i64,
    /// unit part, reduced mod p^(prec - val); coprime to p unless zero
    unit: u128,
    /// absolute precision: the value is known mod p^prec
    prec: i64,
}

impl PadicNumber {
    fn ring(p: u64, digits: i64) -> Result<Ring, PadicError> {
        let d = digits.max(0) as u32;
        Ring::new(p, d).ok_or(PadicError::PrecisionCap {
            p,
            max: Ring::max_digits(p),
        })
    }

    pub fn zero(p: u64, prec: i64) -> PadicNumber {
        PadicNumber {
            p,
            val: INF_VAL,
            unit: 0,
            prec,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.val == INF_VAL || self.unit == 0
    }

    /// True exact zero (infinite valuation), as opposed to zero-to-precision.
    pub fn is_exact_zero(&self) -> bool {
        self.val == INF_VAL
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// Valuation; for a zero-to-precision value this is a lower bound (= prec).
    pub fn valuation(&self) -> i64 {
        if self.is_zero() {
            if self.val == INF_VAL {
                INF_VAL
            } else {
                self.prec
            }
        } else {
            self.val
        }
    }

    pub fn unit_part(&self) -> u128 {
        self.unit
    }

    /// Build p^val * unit known mod p^prec. Normalizes the unit.
    pub fn from_unit_val(p: u64, unit: u128, val: i64, prec: i64) -> Result<PadicNumber, PadicError> {
        if !is_prime_u64(p) || p < 3 {
            return Err(PadicError::NotPrime(p));
        }
        if unit == 0 {
            return Ok(PadicNumber {
                p,
                val: prec,
                unit: 0,
                prec,
            });
        }
        // strip p-powers from unit
        let mut unit = unit;
        let mut val = val;
        while unit % p as u128 == 0 {
            unit /= p as u128;
            val += 1;
        }
        if val >= prec {
            return Ok(PadicNumber {
                p,
                val: prec,
                unit: 0,
                prec,
            });
        }
        let r = Self::ring(p, prec - val)?;
        let unit = unit % r.modulus;
        if unit == 0 {
            return Ok(PadicNumber {
                p,
                val: prec,
                unit: 0,
                prec,
            });
        }
        Ok(PadicNumber { p, val, unit, prec })
    }

    /// The class of an integer at absolute precision `prec`.
    pub fn from_i128(p: u64, x: i128, prec: i64) -> Result<PadicNumber, PadicError> {
        if x == 0 {
            let mut z = Self::zero(p, prec);
            z.val = INF_VAL;
            return Ok(z);
        }
        let r = Self::ring(p, prec.max(1) + 2)?;
        let red = r.reduce_i128(x);
        Self::from_unit_val(p, red, 0, prec)
    }

    /// The class of a rational number q at absolute precision `prec`.
    /// Negative valuation (p dividing the denominator) is allowed.
    pub fn from_rational(q: &BigRational, p: u64, prec: i64) -> Result<PadicNumber, PadicError> {
        if !is_prime_u64(p) || p < 3 {
            return Err(PadicError::NotPrime(p));
        }
        if prec < 1 {
            return Err(PadicError::PrecisionTooLow);
        }
        if q.is_zero() {
            return Ok(PadicNumber {
                p,
                val: INF_VAL,
                unit: 0,
                prec,
            });
        }
        let pb = BigInt::from(p);
        let mut num = q.numer().clone();
        let mut den = q.denom().clone();
        let mut val: i64 = 0;
        while (&num % &pb).is_zero() {
            num /= &pb;
            val += 1;
        }
        while (&den % &pb).is_zero() {
            den /= &pb;
            val -= 1;
        }
        if val >= prec {
            return Ok(PadicNumber {
                p,
                val: prec,
                unit: 0,
                prec,
            });
        }
        let r = Self::ring(p, prec - val)?;
        let m = BigInt::from(r.modulus);
        let nm = ((&num % &m) + &m) % &m;
        let dm = ((&den % &m) + &m) % &m;
        let n_u = nm.to_u128().unwrap();
        let d_u = dm.to_u128().unwrap();
        let unit = r.mul(n_u, r.inv(d_u));
        Ok(PadicNumber { p, val, unit, prec })
    }

    fn check_prime(&self, other: &PadicNumber) {
        assert_eq!(
            self.p, other.p,
            "mixed primes in p-adic arithmetic: {} vs {}",
            self.p, other.p
        );
    }

    pub fn with_precision(&self, prec: i64) -> PadicNumber {
        if self.is_exact_zero() {
            let mut z = *self;
            z.prec = prec;
            return z;
        }
        if self.val >= prec || self.is_zero() {
            return PadicNumber {
                p: self.p,
                val: prec,
                unit: 0,
                prec,
            };
        }
        let digits = (prec - self.val) as u32;
        let r = Ring::new(self.p, digits).expect("precision cap");
        let unit = self.unit % r.modulus;
        PadicNumber::from_unit_val(self.p, unit, self.val, prec).unwrap()
    }

    pub fn add(&self, other: &PadicNumber) -> PadicNumber {
        self.check_prime(other);
        let prec = self.prec.min(other.prec);
        if self.is_exact_zero() {
            return other.with_precision(prec.min(other.prec));
        }
        if other.is_exact_zero() {
            return self.with_precision(prec.min(self.prec));
        }
        if self.is_zero() {
            return other.with_precision(prec);
        }
        if other.is_zero() {
            return self.with_precision(prec);
        }
        let v = self.val.min(other.val);
        if v >= prec {
            return PadicNumber {
                p: self.p,
                val: prec,
                unit: 0,
                prec,
            };
        }
        let r = Self::ring(self.p, prec - v).expect("precision cap");
        let a = r.mul(self.unit % r.modulus, r.pk((self.val - v) as u32));
        let b = r.mul(other.unit % r.modulus, r.pk((other.val - v) as u32));
        let s = r.add(a, b);
        PadicNumber::from_unit_val(self.p, s, v, prec).unwrap()
    }

    pub fn neg(&self) -> PadicNumber {
        if self.is_zero() {
            return *self;
        }
        let r = Self::ring(self.p, self.prec - self.val).unwrap();
        PadicNumber {
            unit: r.modulus - self.unit,
            ..*self
        }
    }

    pub fn sub(&self, other: &PadicNumber) -> PadicNumber {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PadicNumber) -> PadicNumber {
        self.check_prime(other);
        if self.is_exact_zero() || other.is_exact_zero() {
            // precision of 0 * x: 0 known exactly, result exact zero at combined precision
            let prec = if self.is_exact_zero() && other.is_exact_zero() {
                self.prec.min(other.prec)
            } else if self.is_exact_zero() {
                self.prec.saturating_add(other.valuation().min(other.prec))
            } else {
                other.prec.saturating_add(self.valuation().min(self.prec))
            };
            return PadicNumber {
                p: self.p,
                val: INF_VAL,
                unit: 0,
                prec,
            };
        }
        let v1 = self.valuation();
        let v2 = other.valuation();
        let prec = (self.prec + v2).min(other.prec + v1);
        if self.is_zero() || other.is_zero() {
            return PadicNumber {
                p: self.p,
                val: prec,
                unit: 0,
                prec,
            };
        }
        let v = v1 + v2;
        if v >= prec {
            return PadicNumber {
                p: self.p,
                val: prec,
                unit: 0,
                prec,
            };
        }
        let r = Self::ring(self.p, prec - v).expect("precision cap");
        let u = r.mul(self.unit % r.modulus, other.unit % r.modulus);
        PadicNumber { p: self.p, val: v, unit: u, prec }
    }

    /// Multiplicative inverse; input precision N with valuation v gives N - 2v.
    pub fn inv(&self) -> Result<PadicNumber, PadicError> {
        if self.is_zero() {
            return Err(PadicError::Singular {
                pivot_val: self.valuation().min(self.prec),
                remaining: self.prec,
            });
        }
        let new_prec = self.prec - 2 * self.val;
        let digits = self.prec - self.val;
        let r = Self::ring(self.p, digits)?;
        let u = r.inv(self.unit);
        PadicNumber::from_unit_val(self.p, u, -self.val, new_prec)
    }

    pub fn div(&self, other: &PadicNumber) -> Result<PadicNumber, PadicError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn scale_pow_p(&self, k: i64) -> PadicNumber {
        if self.is_exact_zero() {
            return *self;
        }
        if self.is_zero() {
            return PadicNumber {
                p: self.p,
                val: self.prec + k,
                unit: 0,
                prec: self.prec + k,
            };
        }
        PadicNumber {
            val: self.val + k,
            prec: self.prec + k,
            ..*self
        }
    }

    /// Teichmuller lift of the reduction of a unit.
    pub fn teichmuller(&self) -> Result<PadicNumber, PadicError> {
        if self.is_zero() || self.val != 0 {
            return Err(PadicError::ZeroLog);
        }
        let digits = self.prec;
        let r = Self::ring(self.p, digits)?;
        let mut x = self.unit % r.modulus;
        // iterate x <- x^p; converges to the (p-1)-st root of unity
        for _ in 0..r.w + 1 {
            x = r.pow(x, self.p);
        }
        PadicNumber::from_unit_val(self.p, x, 0, self.prec)
    }

    /// Square root by Hensel lifting (p odd); requires even valuation and
    /// square unit part. Returns the root whose unit reduces to the smaller
    /// residue class unless `sign_hint` selects the other branch.
    pub fn sqrt(&self) -> Result<PadicNumber, PadicError> {
        if self.is_exact_zero() {
            return Ok(*self);
        }
        if self.is_zero() {
            return Err(PadicError::NoSquareRoot);
        }
        if self.val % 2 != 0 {
            return Err(PadicError::NoSquareRoot);
        }
        let digits = self.prec - self.val;
        let r = Self::ring(self.p, digits)?;
        let a = self.unit;
        let a_mod_p = (a % self.p as u128) as u64;
        // Tonelli-Shanks mod p, then Hensel
        let root_p = sqrt_mod_p(a_mod_p, self.p).ok_or(PadicError::NoSquareRoot)?;
        let mut x = root_p as u128;
        let inv2 = r.inv(2);
        for _ in 0..r.w + 1 {
            // x <- (x + a/x)/2
            let xi = r.inv(x);
            x = r.mul(r.add(x, r.mul(a, xi)), inv2);
        }
        debug_assert_eq!(r.mul(x, x), a % r.modulus);
        PadicNumber::from_unit_val(self.p, x, self.val / 2, self.prec - self.val / 2)
    }

    /// Serialized form: `v:<val> u:<unit> mod <p>^<prec>`.
    pub fn serialize(&self) -> String {
        if self.is_exact_zero() {
            format!("v:inf u:0 mod {}^{}", self.p, self.prec)
        } else if self.is_zero() {
            format!("v:{} u:0 mod {}^{}", self.prec, self.p, self.prec)
        } else {
            format!("v:{} u:{} mod {}^{}", self.val, self.unit, self.p, self.prec)
        }
    }

    pub fn parse(s: &str) -> Result<PadicNumber, PadicError> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let bad = || PadicError::Parse(format!("bad p-adic literal: {s}"));
        if toks.len() != 4 || toks[2] != "mod" {
            return Err(bad());
        }
        let vs = toks[0].strip_prefix("v:").ok_or_else(bad)?;
        let us = toks[1].strip_prefix("u:").ok_or_else(bad)?;
        let (ps, ns) = toks[3].split_once('^').ok_or_else(bad)?;
        let p: u64 = ps.parse().map_err(|_| bad())?;
        let prec: i64 = ns.parse().map_err(|_| bad())?;
        let unit: u128 = us.parse().map_err(|_| bad())?;
        if vs == "inf" {
            return Ok(PadicNumber {
                p,
                val: INF_VAL,
                unit: 0,
                prec,
            });
        }
        let val: i64 = vs.parse().map_err(|_| bad())?;
        if unit == 0 {
            return Ok(PadicNumber {
                p,
                val: prec,
                unit: 0,
                prec,
            });
        }
        PadicNumber::from_unit_val(p, unit, val, prec)
    }

    /// Residue of a p-adic integer modulo p (errors on negative valuation).
    pub fn residue(&self) -> Result<u64, PadicError> {
        if self.is_zero() {
            return Ok(0);
        }
        if self.val < 0 {
            return Err(PadicError::Parse("negative valuation has no residue".into()));
        }
        if self.val > 0 {
            return Ok(0);
        }
        Ok((self.unit % self.p as u128) as u64)
    }

    /// Integer representative of a p-adic integer mod p^prec.
    pub fn lift(&self) -> Result<u128, PadicError> {
        if self.is_zero() {
            return Ok(0);
        }
        if self.val < 0 {
            return Err(PadicError::Parse("negative valuation has no integer lift".into()));
        }
        let r = Self::ring(self.p, self.prec)?;
        Ok(r.mul(self.unit % r.modulus, r.pk(self.val as u32)))
    }
}

fn sqrt_mod_p(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if modpow_u64(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(modpow_u64(a, (p + 1) / 4, p));
    }
    // Tonelli-Shanks
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while modpow_u64(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = modpow_u64(z, q, p);
    let mut t = modpow_u64(a, q, p);
    let mut r = modpow_u64(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulmod_u64(tt, tt, p);
            i += 1;
        }
        let b = modpow_u64(c, 1 << (m - i - 1), p);
        m = i;
        c = mulmod_u64(b, b, p);
        t = mulmod_u64(t, c, p);
        r = mulmod_u64(r, b, p);
    }
    Some(r)
}

impl fmt::Debug for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.serialize())
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.serialize())
    }
}

/// Branch choice for the p-adic logarithm: the value assigned to log p.
/// The default (Iwasawa) branch sets log p = 0.
#[derive(Clone, Copy, Debug)]
pub struct LogBranch {
    pub p: u64,
    pub log_p: PadicNumber,
}

impl LogBranch {
    pub fn iwasawa(p: u64, prec: i64) -> LogBranch {
        LogBranch {
            p,
            log_p: PadicNumber::zero(p, prec),
        }
    }
}

/// Iwasawa-branch logarithm: log is a homomorphism on Q_p^* with
/// log p = branch constant and log zeta = 0 for roots of unity.
pub fn padic_log(u: &PadicNumber, branch: &LogBranch) -> Result<PadicNumber, PadicError> {
    if u.is_zero() {
        return Err(PadicError::ZeroLog);
    }
    let p = u.prime();
    let n = u.precision() - u.valuation(); // relative precision of the unit
    let target = n; // log preserves precision on 1-units for p odd
    // guard digits for the divisions by k in the series
    let mut guard = 2;
    let mut kk = n;
    while kk > 0 {
        kk /= p as i64;
        guard += 1;
    }
    let max = Ring::max_digits(p) as i64;
    let w = (target + guard).min(max);
    let r = Ring::new(p, w as u32).ok_or(PadicError::PrecisionCap {
        p,
        max: Ring::max_digits(p),
    })?;
    // unit part and Teichmuller projection
    let unorm = u.with_precision(u.valuation() + w);
    let mut unit = unorm.unit_part() % r.modulus;
    if unit == 0 {
        return Err(PadicError::ZeroLog);
    }
    let mut teich = unit;
    for _ in 0..r.w + 1 {
        teich = r.pow(teich, p);
    }
    unit = r.mul(unit, r.inv(teich));
    // unit is now a 1-unit: z = unit - 1, v(z) >= 1
    let z = r.sub(unit, 1);
    // sum_{k>=1} (-1)^(k+1) z^k / k, terminating when z^k = 0 in the ring
    let mut acc: i128 = 0; // accumulate exact numerators over a scaled denominator? use padic accumulation
    let _ = acc;
    let mut term = z; // z^k
    let mut k: u64 = 1;
    let mut total = PadicNumber::zero(p, target);
    while term != 0 {
        // term / k as a PadicNumber at precision w - v_p(k)
        let kv = r.val(k as u128 % r.modulus.max(1)).min(r.w);
        let kv = if k as u128 % r.modulus == 0 { r.w } else { kv };
        let kunit = (k as u128) / r.pk(kv) as u128;
        let tv = r.val(term);
        if (tv as i64) - (kv as i64) >= target {
            // everything from here on is below target precision only if z^k keeps shrinking;
            // valuations of z^k are nondecreasing in k, so we can stop once
            // v(z^k) - max future v_p(k) clears the target. Use a safe margin.
            if (tv as i64) - guard >= target {
                break;
            }
        }
        let tval = r.val(term);
        let tunit = term / r.pk(tval);
        let mut piece =
            PadicNumber::from_unit_val(p, tunit, tval as i64 - kv as i64, w - kv as i64)?;
        let kinv = r.inv(kunit % r.modulus);
        let sign_unit = if k % 2 == 0 { r.modulus - kinv } else { kinv };
        let scal = PadicNumber::from_unit_val(p, sign_unit, 0, w - kv as i64)?;
        piece = piece.mul(&scal);
        total = total.add(&piece);
        term = r.mul(term, z);
        k += 1;
        if k > 4 * w as u64 * p {
            break; // safety net; never hit for v(z) >= 1
        }
    }
    // branch contribution: val * log(p)
    if u.valuation() != 0 && !branch.log_p.is_zero() {
        let v = PadicNumber::from_i128(p, u.valuation() as i128, branch.log_p.precision())?;
        total = total.add(&v.mul(&branch.log_p));
    }
    Ok(total.with_precision(target.min(total.precision())))
}

/// Unique a/b with |a|, |b| <= height_bound, gcd(b, p) = 1 and a/b = x mod p^N,
/// provided 2*height_bound^2 < p^N. Half-extended Euclid on (p^N, lift(x)).
pub fn rational_reconstruct(x: &PadicNumber, height_bound: u64) -> Result<BigRational, PadicError> {
    if x.is_zero() {
        return Ok(BigRational::zero());
    }
    let p = x.prime();
    // handle negative valuation by scaling
    let shift = if x.valuation() < 0 { -x.valuation() } else { 0 };
    let y = x.scale_pow_p(shift);
    let n = y.precision();
    let r = Ring::new(p, n as u32).ok_or(PadicError::PrecisionCap {
        p,
        max: Ring::max_digits(p),
    })?;
    let m = r.modulus as i128;
    let lift = y.lift().map_err(|_| PadicError::NotRational(height_bound))? as i128;
    let bound = height_bound as i128;
    // require 2*H^2 < p^N for uniqueness
    if 2i128.checked_mul(bound * bound).map_or(true, |b| b >= m) {
        return Err(PadicError::NotRational(height_bound));
    }
    let (mut a0, mut a1) = (m, lift);
    let (mut b0, mut b1) = (0i128, 1i128);
    while a1 != 0 && a1.abs() > bound {
        let q = a0.div_euclid(a1);
        let a2 = a0 - q * a1;
        let b2 = b0 - q * b1;
        a0 = a1;
        a1 = a2;
        b0 = b1;
        b1 = b2;
    }
    if b1 == 0 || a1.abs() > bound || b1.abs() > bound || b1.unsigned_abs() % p as u128 == 0 {
        return Err(PadicError::NotRational(height_bound));
    }
    let mut num = BigInt::from(a1);
    let mut den = BigInt::from(b1);
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    let g = num.gcd(&den);
    num /= &g;
    den /= &g;
    // undo the valuation shift
    let mut rat = BigRational::new(num, den);
    if shift > 0 {
        let pk = BigInt::from(p).pow(shift as u32);
        rat /= BigRational::from_integer(pk);
    } else if x.valuation() > 0 {
        // nothing: lift already included positive valuation
    }
    // verify the congruence
    let back = PadicNumber::from_rational(&rat, p, x.precision())?;
    if back.sub(x).is_zero() {
        Ok(rat)
    } else {
        Err(PadicError::NotRational(height_bound))
    }
}

/// Rectangular matrix of p-adic numbers (common prime, per-entry precision).
#[derive(Clone, PartialEq)]
pub struct PadicMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    data: Vec<PadicNumber>,
}

impl fmt::Debug for PadicMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PadicMatrix {}x{} (p={})", self.rows, self.cols, self.p)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.at(i, j).serialize()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl PadicMatrix {
    pub fn new(p: u64, rows: usize, cols: usize, data: Vec<PadicNumber>) -> PadicMatrix {
        assert_eq!(data.len(), rows * cols);
        for x in &data {
            assert_eq!(x.prime(), p, "mixed primes in matrix");
        }
        PadicMatrix { p, rows, cols, data }
    }

    pub fn zero(p: u64, rows: usize, cols: usize, prec: i64) -> PadicMatrix {
        PadicMatrix {
            p,
            rows,
            cols,
            data: vec![PadicNumber::zero(p, prec); rows * cols],
        }
    }

    pub fn identity(p: u64, n: usize, prec: i64) -> PadicMatrix {
        let mut m = Self::zero(p, n, n, prec);
        for i in 0..n {
            *m.at_mut(i, i) = PadicNumber::from_i128(p, 1, prec).unwrap();
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &PadicNumber {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut PadicNumber {
        &mut self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> PadicMatrix {
        let mut out = Self::zero(self.p, self.cols, self.rows, 0);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = *self.at(i, j);
            }
        }
        out
    }

    pub fn mul(&self, other: &PadicMatrix) -> PadicMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zero(self.p, self.rows, other.cols, 0);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = self.at(i, 0).mul(other.at(0, j));
                for k in 1..self.cols {
                    acc = acc.add(&self.at(i, k).mul(other.at(k, j)));
                }
                *out.at_mut(i, j) = acc;
            }
        }
        out
    }

    pub fn add(&self, other: &PadicMatrix) -> PadicMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for i in 0..self.data.len() {
            out.data[i] = self.data[i].add(&other.data[i]);
        }
        out
    }

    pub fn scale(&self, c: &PadicNumber) -> PadicMatrix {
        let mut out = self.clone();
        for x in &mut out.data {
            *x = x.mul(c);
        }
        out
    }

    pub fn min_precision(&self) -> i64 {
        self.data.iter().map(|x| x.precision()).min().unwrap_or(0)
    }

    /// Solve A X = B by Gaussian elimination with minimal-valuation pivoting.
    /// Returns X at the provable precision.
    pub fn solve(&self, b: &PadicMatrix) -> Result<PadicMatrix, PadicError> {
        assert_eq!(self.rows, self.cols, "solve requires a square matrix");
        assert_eq!(self.rows, b.rows);
        let n = self.rows;
        let m = b.cols;
        // augmented working copy
        let mut a = self.clone();
        let mut x = b.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let _ = &mut perm;
        for col in 0..n {
            // minimal-valuation pivot among rows col..n
            let mut best: Option<(usize, i64)> = None;
            for row in col..n {
                let v = a.at(row, col).valuation();
                let better = match best {
                    None => true,
                    Some((_, bv)) => v < bv,
                };
                if !a.at(row, col).is_zero() && better {
                    best = Some((row, v));
                }
            }
            let (prow, pval) = best.ok_or_else(|| PadicError::Singular {
                pivot_val: a.at(col, col).valuation().min(a.at(col, col).precision()),
                remaining: a.at(col, col).precision(),
            })?;
            if prow != col {
                for j in 0..n {
                    let t = *a.at(prow, j);
                    *a.at_mut(prow, j) = *a.at(col, j);
                    *a.at_mut(col, j) = t;
                }
                for j in 0..m {
                    let t = *x.at(prow, j);
                    *x.at_mut(prow, j) = *x.at(col, j);
                    *x.at_mut(col, j) = t;
                }
            }
            let piv = *a.at(col, col);
            if pval >= piv.precision() {
                return Err(PadicError::Singular {
                    pivot_val: pval,
                    remaining: piv.precision(),
                });
            }
            let ipiv = piv.inv()?;
            for j in 0..n {
                *a.at_mut(col, j) = a.at(col, j).mul(&ipiv);
            }
            for j in 0..m {
                *x.at_mut(col, j) = x.at(col, j).mul(&ipiv);
            }
            for row in 0..n {
                if row == col || a.at(row, col).is_zero() {
                    continue;
                }
                let f = *a.at(row, col);
                for j in 0..n {
                    let t = a.at(col, j).mul(&f);
                    *a.at_mut(row, j) = a.at(row, j).sub(&t);
                }
                for j in 0..m {
                    let t = x.at(col, j).mul(&f);
                    *x.at_mut(row, j) = x.at(row, j).sub(&t);
                }
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<PadicMatrix, PadicError> {
        let id = Self::identity(self.p, self.rows, self.min_precision());
        self.solve(&id)
    }

    /// Determinant by cofactor expansion (intended for small matrices).
    pub fn det(&self) -> PadicNumber {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 1 {
            return *self.at(0, 0);
        }
        let mut acc: Option<PadicNumber> = None;
        for j in 0..n {
            if self.at(0, j).is_exact_zero() {
                continue;
            }
            let minor = self.minor(0, j);
            let mut term = self.at(0, j).mul(&minor.det());
            if j % 2 == 1 {
                term = term.neg();
            }
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        acc.unwrap_or_else(|| PadicNumber::zero(self.p, self.min_precision()))
    }

    fn minor(&self, i: usize, j: usize) -> PadicMatrix {
        let n = self.rows;
        let mut data = Vec::with_capacity((n - 1) * (n - 1));
        for r in 0..n {
            if r == i {
                continue;
            }
            for c in 0..n {
                if c == j {
                    continue;
                }
                data.push(*self.at(r, c));
            }
        }
        PadicMatrix::new(self.p, n - 1, n - 1, data)
    }

    /// Characteristic polynomial det(T*I - A), low-to-high coefficients.
    /// Exact cofactor expansion over polynomials (no divisions), fine for n <= 6.
    pub fn charpoly(&self) -> Vec<PadicNumber> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let prec = self.min_precision();
        let one = PadicNumber::from_i128(self.p, 1, prec).unwrap();
        // entries of T*I - A as degree<=1 polys
        let entry = |i: usize, j: usize| -> Vec<PadicNumber> {
            let a = self.at(i, j).neg();
            if i == j {
                vec![a, one]
            } else {
                vec![a]
            }
        };
        fn pmulq(p: u64, a: &[PadicNumber], b: &[PadicNumber]) -> Vec<PadicNumber> {
            let mut c = vec![PadicNumber::zero(p, i64::MAX / 4); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    c[i + j] = c[i + j].add(&x.mul(y));
                }
            }
            c
        }
        fn paddq(a: &[PadicNumber], b: &[PadicNumber]) -> Vec<PadicNumber> {
            let n = a.len().max(b.len());
            let mut c = Vec::with_capacity(n);
            for i in 0..n {
                let x = a.get(i).copied();
                let y = b.get(i).copied();
                c.push(match (x, y) {
                    (Some(x), Some(y)) => x.add(&y),
                    (Some(x), None) => x,
                    (None, Some(y)) => y,
                    _ => unreachable!(),
                });
            }
            c
        }
        fn det_rec(
            mp: &PadicMatrix,
            entry: &dyn Fn(usize, usize) -> Vec<PadicNumber>,
            rows: &[usize],
            cols: &[usize],
        ) -> Vec<PadicNumber> {
            if rows.len() == 1 {
                return entry(rows[0], cols[0]);
            }
            let mut total: Vec<PadicNumber> = vec![PadicNumber::zero(mp.p, i64::MAX / 4)];
            for (k, &c) in cols.iter().enumerate() {
                let sub_cols: Vec<usize> =
                    cols.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect();
                let minor = det_rec(mp, entry, &rows[1..], &sub_cols);
                let mut term = pmulq(mp.p, &entry(rows[0], c), &minor);
                if k % 2 == 1 {
                    for t in &mut term {
                        *t = t.neg();
                    }
                }
                total = paddq(&total, &term);
            }
            total
        }
        let rows: Vec<usize> = (0..n).collect();
        let cols: Vec<usize> = (0..n).collect();
        det_rec(self, &entry, &rows, &cols)
    }

    pub fn trace(&self) -> PadicNumber {
        assert_eq!(self.rows, self.cols);
        let mut acc = *self.at(0, 0);
        for i in 1..self.rows {
            acc = acc.add(self.at(i, i));
        }
        acc
    }

    pub fn serialize(&self) -> String {
        let mut s = format!("rows:{} cols:{} p:{}\n", self.rows, self.cols, self.p);
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.at(i, j).serialize()).collect();
            s.push_str(&row.join(", "));
            s.push('\n');
        }
        s
    }

    pub fn parse(s: &str) -> Result<PadicMatrix, PadicError> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let hdr = lines.next().ok_or_else(|| PadicError::Parse("empty matrix".into()))?;
        let mut rows = 0usize;
        let mut cols = 0usize;
        let mut p = 0u64;
        for tok in hdr.split_whitespace() {
            if let Some(v) = tok.strip_prefix("rows:") {
                rows = v.parse().map_err(|_| PadicError::Parse(hdr.into()))?;
            } else if let Some(v) = tok.strip_prefix("cols:") {
                cols = v.parse().map_err(|_| PadicError::Parse(hdr.into()))?;
            } else if let Some(v) = tok.strip_prefix("p:") {
                p = v.parse().map_err(|_| PadicError::Parse(hdr.into()))?;
            }
        }
        let mut data = Vec::with_capacity(rows * cols);
        for line in lines {
            for cell in line.split(',') {
                let cell = cell.trim();
                if !cell.is_empty() {
                    data.push(PadicNumber::parse(cell)?);
                }
            }
        }
        if data.len() != rows * cols {
            return Err(PadicError::Parse(format!(
                "expected {} entries, found {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(PadicMatrix::new(p, rows, cols, data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn from_rational_examples() {
        // exact zero
        let z = PadicNumber::from_rational(&q(0, 1), 61, 5).unwrap();
        assert!(z.is_exact_zero());
        // 2/3 in Q_5 at N=3: digits (4,1,3) -> 4 + 1*5 + 3*25 = 84
        let x = PadicNumber::from_rational(&q(2, 3), 5, 3).unwrap();
        assert_eq!(x.lift().unwrap(), 84);
        // E:107 alpha_00 digit round trip: 58*61^-1 + 19 + 2*61 + 43*61^2
        let a = q(58, 61) + q(19, 1) + q(2 * 61, 1) + q(43 * 61 * 61, 1);
        let x = PadicNumber::from_rational(&a, 61, 3).unwrap();
        assert_eq!(x.valuation(), -1);
        // unit = 58 + 19*61 + 2*61^2 + 43*61^3
        assert_eq!(x.unit_part(), 58 + 19 * 61 + 2 * 61 * 61 + 43u128 * 61 * 61 * 61);
    }

    #[test]
    fn precision_rules() {
        let a = PadicNumber::from_rational(&q(5, 1), 5, 4).unwrap(); // v=1, N=4
        let b = PadicNumber::from_rational(&q(2, 1), 5, 3).unwrap(); // v=0, N=3
        assert_eq!(a.add(&b).precision(), 3);
        // mul: min(N1+v2, N2+v1) = min(4+0, 3+1) = 4
        assert_eq!(a.mul(&b).precision(), 4);
        // invert: N - 2v = 4 - 2 = 2
        let ai = a.inv().unwrap();
        assert_eq!(ai.precision(), 2);
        assert_eq!(ai.valuation(), -1);
    }

    #[test]
    fn log_identity_and_homomorphism() {
        let br = LogBranch::iwasawa(7, 8);
        let one = PadicNumber::from_i128(7, 1, 8).unwrap();
        assert!(padic_log(&one, &br).unwrap().is_zero());
        let u = PadicNumber::from_i128(7, 3 + 7 * 5 + 49 * 2, 8).unwrap();
        let lu = padic_log(&u, &br).unwrap();
        let lu2 = padic_log(&u.mul(&u), &br).unwrap();
        let two = PadicNumber::from_i128(7, 2, 8).unwrap();
        assert!(lu2.sub(&two.mul(&lu)).is_zero());
    }

    #[test]
    fn log_series_oracle_61() {
        // log_61(2) at N=6 equals (series on the 1-unit 2^60)/60
        let br = LogBranch::iwasawa(61, 6);
        let two = PadicNumber::from_i128(61, 2, 8).unwrap();
        let l2 = padic_log(&two, &br).unwrap();
        // direct series on z = 2^60 - 1 mod 61^8
        let r = Ring::new(61, 8).unwrap();
        let u = r.pow(2, 60);
        let z = r.sub(u, 1);
        let mut term = z;
        let mut acc = PadicNumber::zero(61, 6);
        let mut k = 1u64;
        while term != 0 && k < 4000 {
            let kv = if k % 61 == 0 { 1 } else { 0 };
            let ku = k as u128 / r.pk(kv);
            let tv = r.val(term);
            let piece = PadicNumber::from_unit_val(61, term / r.pk(tv), tv as i64 - kv as i64, 8 - kv as i64)
                .unwrap();
            let mut s = PadicNumber::from_unit_val(61, r.inv(ku % r.modulus), 0, 8 - kv as i64).unwrap();
            if k % 2 == 0 {
                s = s.neg();
            }
            acc = acc.add(&piece.mul(&s));
            term = r.mul(term, z);
            k += 1;
        }
        let sixty = PadicNumber::from_i128(61, 60, 8).unwrap();
        let expect = acc.div(&sixty).unwrap().with_precision(6);
        assert!(l2.sub(&expect).is_zero(), "log mismatch: {l2} vs {expect}");
    }

    #[test]
    fn linear_solve_and_precision_loss() {
        let p = 61;
        let id = PadicMatrix::identity(p, 3, 6);
        let mut b = PadicMatrix::zero(p, 3, 2, 6);
        for i in 0..3 {
            for j in 0..2 {
                *b.at_mut(i, j) = PadicNumber::from_i128(p, (3 * i + j + 1) as i128, 6).unwrap();
            }
        }
        let x = id.solve(&b).unwrap();
        assert_eq!(x, b);
        // diag(p, 1): first row loses a digit
        let mut a = PadicMatrix::identity(p, 2, 6);
        *a.at_mut(0, 0) = PadicNumber::from_i128(p, p as i128, 6).unwrap();
        let id2 = PadicMatrix::identity(p, 2, 6);
        let x = a.solve(&id2).unwrap();
        assert_eq!(x.at(0, 0).precision(), 4); // N - 2v = 6 - 2
        assert_eq!(x.at(1, 1).precision(), 6);
    }

    #[test]
    fn solve_vs_exact_inverse() {
        // random-ish 4x4 integer matrix with unit determinant mod 61
        let p = 61;
        let ents: [[i128; 4]; 4] = [[2, 3, 5, 7], [1, 4, 9, 16], [0, 1, 1, 2], [3, 0, 2, 1]];
        let mut a = PadicMatrix::zero(p, 4, 4, 8);
        for i in 0..4 {
            for j in 0..4 {
                *a.at_mut(i, j) = PadicNumber::from_i128(p, ents[i][j], 8).unwrap();
            }
        }
        let inv = a.inverse().unwrap();
        let prod = inv.mul(&a);
        let id = PadicMatrix::identity(p, 4, 8);
        for i in 0..4 {
            for j in 0..4 {
                assert!(prod.at(i, j).sub(id.at(i, j)).is_zero());
            }
        }
    }

    #[test]
    fn singular_detection() {
        let p = 7;
        let mut a = PadicMatrix::zero(p, 2, 2, 4);
        *a.at_mut(0, 0) = PadicNumber::from_i128(p, 7, 4).unwrap();
        *a.at_mut(0, 1) = PadicNumber::from_i128(p, 14, 4).unwrap();
        *a.at_mut(1, 0) = PadicNumber::from_i128(p, 21, 4).unwrap();
        *a.at_mut(1, 1) = PadicNumber::from_i128(p, 42, 4).unwrap();
        // second column is 2x first: singular
        let b = PadicMatrix::identity(p, 2, 4);
        assert!(matches!(a.solve(&b), Err(PadicError::Singular { .. })));
    }

    #[test]
    fn reconstruct_round_trip() {
        let x = PadicNumber::from_rational(&q(2, 3), 61, 5).unwrap();
        assert_eq!(rational_reconstruct(&x, 100).unwrap(), q(2, 3));
        let y = PadicNumber::from_rational(&q(-4, 1), 29, 4).unwrap();
        assert_eq!(rational_reconstruct(&y, 10).unwrap(), q(-4, 1));
        // a rational of large height is not recognizable with a small bound
        let z = PadicNumber::from_rational(&q(1000003, 999983), 61, 5).unwrap();
        assert!(matches!(
            rational_reconstruct(&z, 10),
            Err(PadicError::NotRational(_))
        ));
    }

    #[test]
    fn serialization_round_trip() {
        let x = PadicNumber::from_rational(&q(-7, 12), 5, 6).unwrap();
        let s = x.serialize();
        let y = PadicNumber::parse(&s).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn charpoly_small() {
        let p = 7;
        let mut a = PadicMatrix::zero(p, 2, 2, 6);
        *a.at_mut(0, 0) = PadicNumber::from_i128(p, 2, 6).unwrap();
        *a.at_mut(1, 1) = PadicNumber::from_i128(p, 3, 6).unwrap();
        let cp = a.charpoly();
        // (T-2)(T-3) = T^2 - 5T + 6
        assert_eq!(cp.len(), 3);
        assert_eq!(cp[0].lift().unwrap(), 6);
        let m5 = PadicNumber::from_i128(p, -5, 6).unwrap();
        assert!(cp[1].sub(&m5).is_zero());
    }

    #[test]
    fn sqrt_and_teichmuller() {
        let x = PadicNumber::from_i128(61, 58, 8).unwrap(); // -3, a QR mod 61
        let s = x.sqrt().unwrap();
        assert!(s.mul(&s).sub(&x).is_zero());
        let t = x.teichmuller().unwrap();
        // t^60 = 1
        let mut acc = PadicNumber::from_i128(61, 1, 8).unwrap();
        for _ in 0..60 {
            acc = acc.mul(&t);
        }
        assert!(acc.sub(&PadicNumber::from_i128(61, 1, 8).unwrap()).is_zero());
    }
}
