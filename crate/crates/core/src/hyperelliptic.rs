//! Hyperelliptic curve models, point counting, Mumford/Cantor arithmetic
//! over finite fields, and Jacobian group structure.
//!
//! Odd-degree models y^2 = f(x), deg f = 2g+1, are first class. Even-degree
//! inputs are converted by the Mobius helper when f has a rational root over
//! the relevant local field: the root is moved to infinity by
//! x = r + c/v, y = w c / v^(g+1) with c = f'(r), which yields a monic model
//! of degree 2g+1.

use crate::ffield::*;
use crate::ratpoly::{rint, Rat, RatPoly};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum CurveError {
    #[error("degree {0} is even; convert to an odd model first")]
    EvenDegree(usize),
    #[error("degree {0} is too small (need >= 5)")]
    DegreeTooSmall(usize),
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("coefficients are not p-integral at {0}")]
    NotPIntegral(u64),
    #[error("not squarefree (discriminant zero)")]
    NotSquarefree,
    #[error("bad reduction at {0} (discriminant non-unit)")]
    BadReduction(u64),
    #[error("no rational Weierstrass root over the local field at {0}")]
    NoLocalRoot(u64),
    #[error("different curves in group operation")]
    CurveMismatch,
    #[error("divisor data invalid: {0}")]
    BadDivisor(String),
    #[error("counting budget exceeded at q = {0}")]
    BudgetExceeded(u64),
    #[error("group structure has more than two invariant factors per prime; unsupported")]
    RankTooLarge,
}

/// Odd-degree hyperelliptic curve over Q: y^2 = f(x), f monic of degree 2g+1.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperellipticCurve {
    pub f: RatPoly,
    pub genus: usize,
    pub label: String,
}

/// Accepts f iff it is monic, odd degree >= 5, p-integral, squarefree, and
/// of good reduction at p. Each failure carries its own diagnostic.
pub fn validate_curve(f: &RatPoly, p: u64, label: &str) -> Result<HyperellipticCurve, CurveError> {
    let deg = f.degree().ok_or(CurveError::DegreeTooSmall(0))?;
    if deg % 2 == 0 {
        return Err(CurveError::EvenDegree(deg));
    }
    if deg < 5 {
        return Err(CurveError::DegreeTooSmall(deg));
    }
    if !f.leading().is_one() {
        return Err(CurveError::NotMonic);
    }
    if f.min_val_p(p) < 0 {
        return Err(CurveError::NotPIntegral(p));
    }
    if !f.is_squarefree() {
        return Err(CurveError::NotSquarefree);
    }
    let disc = f.discriminant();
    let mut v = 0i64;
    let pb = BigInt::from(p);
    let mut num = disc.numer().clone();
    while !num.is_zero() && (&num % &pb).is_zero() {
        num /= &pb;
        v += 1;
    }
    let mut den = disc.denom().clone();
    while (&den % &pb).is_zero() {
        den /= &pb;
        v -= 1;
    }
    if v != 0 {
        return Err(CurveError::BadReduction(p));
    }
    Ok(HyperellipticCurve {
        f: f.clone(),
        genus: (deg - 1) / 2,
        label: label.to_string(),
    })
}

/// Mobius data recording how an even model was converted: x = r + c/v.
#[derive(Debug, Clone)]
pub struct MobiusData {
    /// integer approximation of the chosen p-adic Weierstrass root
    pub root: BigInt,
    /// c = f'(root), the scaling making the new model monic
    pub c: BigRational,
    /// the original even-degree polynomial
    pub original: RatPoly,
    /// number of p-adic digits to which `root` approximates the true root
    pub digits: u32,
}

/// An odd model of a curve over Q_p, possibly obtained from an even model;
/// the coefficients are exact rationals approximating the true model to
/// `digits` p-adic digits (exact when `map` is None).
#[derive(Debug, Clone)]
pub struct OddModelQp {
    pub curve: HyperellipticCurve,
    pub p: u64,
    pub map: Option<MobiusData>,
}

/// Converts an even-degree model to a monic odd-degree model over Q_p by
/// Hensel-lifting a simple root of f mod p and moving it to infinity.
/// Mirrors the worked example: the unique Q_p-rational Weierstrass disk is
/// sent to the disk at infinity.
pub fn odd_model_from_even(
    f: &RatPoly,
    p: u64,
    digits: u32,
    label: &str,
) -> Result<OddModelQp, CurveError> {
    let deg = f.degree().ok_or(CurveError::DegreeTooSmall(0))?;
    if deg % 2 == 1 {
        let c = validate_curve(f, p, label)?;
        return Ok(OddModelQp {
            curve: c,
            p,
            map: None,
        });
    }
    if f.min_val_p(p) < 0 {
        return Err(CurveError::NotPIntegral(p));
    }
    if !f.is_squarefree() {
        return Err(CurveError::NotSquarefree);
    }
    // simple root of f mod p
    let fq = Fq::new(p);
    let fp: Vec<u64> = reduce_poly_mod(f, p).ok_or(CurveError::NotPIntegral(p))?;
    let dfp = fp_deriv(&fq, &fp);
    let mut root_mod_p: Option<u64> = None;
    for x in 0..p {
        if fp_eval(&fq, &fp, x) == 0 {
            if fp_eval(&fq, &dfp, x) == 0 {
                continue; // not a simple root; cannot Hensel-lift
            }
            root_mod_p = Some(x);
            break;
        }
    }
    let r0 = root_mod_p.ok_or(CurveError::NoLocalRoot(p))?;
    // Hensel lift to p^digits
    let df = f.deriv();
    let mut modulus = BigInt::from(p);
    let target = BigInt::from(p).pow(digits);
    let mut r = BigInt::from(r0);
    while modulus < target {
        modulus = (&modulus * &modulus).min(target.clone());
        let rr = BigRational::from_integer(r.clone());
        let fv = f.eval(&rr);
        let dfv = df.eval(&rr);
        // f(r)/f'(r) mod modulus: both are p-integral rationals here
        let fv_int = rat_mod(&fv, &modulus);
        let dfv_int = rat_mod(&dfv, &modulus);
        let inv = mod_inverse(&dfv_int, &modulus).ok_or(CurveError::BadReduction(p))?;
        r = (((&r - fv_int * inv) % &modulus) + &modulus) % &modulus;
    }
    let rq = BigRational::from_integer(r.clone());
    let c = df.eval(&rq);
    // h(u) = sum_i f_i u^(deg-i) (r u + 1)^i; F(v) = sum h_j c^(deg-2-j) v^j
    let d = deg;
    let mut h = vec![Rat::zero(); d + 1];
    for i in 0..=d {
        let fi = f.coeff(i);
        if fi.is_zero() {
            continue;
        }
        // (r u + 1)^i contributes binom(i,k) r^k u^k at u^(d-i+k)
        let mut rk = Rat::one();
        for k in 0..=i {
            let j = d - i + k;
            if j <= d {
                h[j] += &fi * binom_rat(i, k) * &rk;
            }
            rk *= &rq;
        }
    }
    // h[d] = f(r) = 0 (mod p^digits); h[d-1] = f'(r) = c
    let mut newf = vec![Rat::zero(); d];
    for j in 0..d {
        // F_j = h_j * c^(d-2-j), j = 0..d-1; F_{d-1} = h_{d-1}/c = 1
        let e = d as i64 - 2 - j as i64;
        let cf = if e >= 0 {
            crate::ratpoly::pow_rat(&c, e as u32)
        } else {
            Rat::one() / crate::ratpoly::pow_rat(&c, (-e) as u32)
        };
        newf[j] = &h[j] * cf;
    }
    // force exact monicity (h[d-1]/c may differ from 1 by O(p^digits) noise only if r inexact)
    newf[d - 1] = Rat::one();
    let fodd = RatPoly::new(newf);
    let curve = validate_curve(&fodd, p, label)?;
    Ok(OddModelQp {
        curve,
        p,
        map: Some(MobiusData {
            root: r,
            c,
            original: f.clone(),
            digits,
        }),
    })
}

fn binom_rat(n: usize, k: usize) -> Rat {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    BigRational::from_integer(acc)
}

/// Representative of a p-integral rational mod m.
fn rat_mod(x: &Rat, m: &BigInt) -> BigInt {
    let num = ((x.numer() % m) + m) % m;
    let den = ((x.denom() % m) + m) % m;
    let dinv = mod_inverse(&den, m).expect("denominator not invertible");
    (num * dinv) % m
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(((e.x % m) + m) % m)
    } else {
        None
    }
}

/// Reduce a p-integral rational polynomial mod p.
pub fn reduce_poly_mod(f: &RatPoly, p: u64) -> Option<Vec<u64>> {
    let pb = BigInt::from(p);
    let mut out = Vec::with_capacity(f.0.len());
    for c in &f.0 {
        let den = ((c.denom() % &pb) + &pb) % &pb;
        if den.is_zero() {
            return None;
        }
        let num = ((c.numer() % &pb) + &pb) % &pb;
        let dinv = mod_inverse(&den, &pb)?;
        out.push(((num * dinv) % &pb).to_u64().unwrap());
    }
    let mut out = out;
    fp_trim(&mut out);
    Some(out)
}

// ---------------------------------------------------------------------------
// Curves over finite fields
// ---------------------------------------------------------------------------

/// Odd-degree hyperelliptic curve over F_q.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFq {
    pub fq: Fq,
    pub f: FqPoly,
    pub genus: usize,
}

impl CurveFq {
    pub fn new(q: u64, f: FqPoly) -> Result<CurveFq, CurveError> {
        let fq = Fq::new(q);
        let d = f.len() - 1;
        if d % 2 == 0 {
            return Err(CurveError::EvenDegree(d));
        }
        if *f.last().unwrap() != 1 {
            return Err(CurveError::NotMonic);
        }
        let g = fp_gcd(&fq, &f, &fp_deriv(&fq, &f));
        if g.len() > 1 {
            return Err(CurveError::BadReduction(q));
        }
        Ok(CurveFq {
            fq,
            f,
            genus: (d - 1) / 2,
        })
    }

    /// Reduction of a rational odd model mod q (good reduction required).
    pub fn from_rational(curve: &HyperellipticCurve, q: u64) -> Result<CurveFq, CurveError> {
        let f = reduce_poly_mod(&curve.f, q).ok_or(CurveError::NotPIntegral(q))?;
        if f.len() != curve.f.0.len() {
            return Err(CurveError::BadReduction(q));
        }
        CurveFq::new(q, f)
    }
}

/// #X(F_q) for the odd model: one point at infinity plus the affine count.
pub fn count_points(c: &CurveFq) -> u64 {
    let q = c.fq.q;
    let chunk = 1u64 << 14;
    let nchunks = (q + chunk - 1) / chunk;
    let affine: u64 = (0..nchunks)
        .into_par_iter()
        .map(|ci| {
            let fq = c.fq;
            let mut acc = 0u64;
            let lo = ci * chunk;
            let hi = (lo + chunk).min(q);
            for x in lo..hi {
                let v = fp_eval(&fq, &c.f, x);
                if v == 0 {
                    acc += 1;
                } else if fq.legendre(v) == 1 {
                    acc += 2;
                }
            }
            acc
        })
        .sum();
    affine + 1
}

/// #X(F_{q^2}) by enumeration over conjugate pairs.
pub fn count_points_q2(c: &CurveFq) -> u64 {
    let q = c.fq.q;
    let f2 = Fq2::new(q);
    // x in F_q contributes via the base-field evaluation but squareness in F_{q^2}:
    // a nonzero v in F_q is a square in F_{q^2} always iff legendre(v)=1 or v nonsquare
    // => every nonzero v is a square in F_{q^2} iff v^((q^2-1)/2)=1; since
    // (q^2-1)/2 = (q-1)(q+1)/2 and v^(q-1)=1, v^((q^2-1)/2) = v^((q-1)(q+1)/2) = 1 always.
    // So every x in F_q gives 2 points unless f(x)=0 (then 1).
    let mut count = 1u64; // infinity
    for x in 0..q {
        let v = fp_eval(&c.fq, &c.f, x);
        count += if v == 0 { 1 } else { 2 };
    }
    // x = a + b t, b != 0: pair (a, b) ~ (a, -b) conjugate, equal contributions
    let chunk = 1u64 << 8;
    let bmax = (q - 1) / 2;
    let nchunks = (bmax + chunk - 1) / chunk;
    let sum: u64 = (0..nchunks)
        .into_par_iter()
        .map(|ci| {
            let mut acc = 0u64;
            let lo = 1 + ci * chunk;
            let hi = (lo + chunk).min(bmax + 1);
            for b in lo..hi {
                for a in 0..q {
                    let x = Fq2El { a, b };
                    let mut v = f2.zero();
                    for &cf in c.f.iter().rev() {
                        v = f2.mul(v, x);
                        v = f2.add(v, f2.embed(cf));
                    }
                    if f2.is_zero(v) {
                        acc += 2; // the point and its conjugate
                    } else if f2.is_square(v) {
                        acc += 4;
                    }
                }
            }
            acc
        })
        .sum();
    count + sum
}

/// Genus-2 L-polynomial data from exhaustive counts:
/// charpoly(Frob) = T^4 + c1 T^3 + c2 T^2 + q c1 T + q^2.
pub fn lpoly_genus2(c: &CurveFq) -> Result<(i64, i64, u64), CurveError> {
    if c.genus != 2 {
        return Err(CurveError::BadDivisor("lpoly_genus2 needs genus 2".into()));
    }
    let q = c.fq.q as i64;
    if c.fq.q > 200_000 {
        return Err(CurveError::BudgetExceeded(c.fq.q));
    }
    let n1 = count_points(c) as i64;
    let n2 = count_points_q2(c) as i64;
    let a1 = q + 1 - n1;
    let c1 = -a1;
    let c2 = (c1 * c1 - (q * q + 1 - n2)) / 2;
    // |J(F_q)| = L(1) = 1 + c1 + c2 + q c1 + q^2
    let order = 1 + c1 + c2 + q * c1 + q * q;
    // Weil sanity: |a1| <= 4 sqrt(q)
    debug_assert!((a1 * a1) as f64 <= 16.0 * q as f64 + 1e-9);
    Ok((c1, c2, order as u64))
}

// ---------------------------------------------------------------------------
// Mumford representation and Cantor arithmetic
// ---------------------------------------------------------------------------

/// Reduced Mumford representative (a, b): a monic, deg b < deg a <= g,
/// a | b^2 - f. Represents the class [D - deg(a) * infinity].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mumford {
    pub a: FqPoly,
    pub b: FqPoly,
}

impl Mumford {
    pub fn identity() -> Mumford {
        Mumford {
            a: vec![1],
            b: vec![],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.a == vec![1]
    }

    pub fn from_point(c: &CurveFq, x: u64, y: u64) -> Mumford {
        debug_assert_eq!(fp_eval(&c.fq, &c.f, x), c.fq.mul(y, y));
        Mumford {
            a: vec![c.fq.neg(x), 1],
            b: vec![y],
        }
    }

    pub fn is_valid(&self, c: &CurveFq) -> bool {
        if self.a.is_empty() || *self.a.last().unwrap() != 1 {
            return false;
        }
        let b2 = fp_mul(&c.fq, &self.b, &self.b);
        let num = fp_sub(&c.fq, &b2, &c.f);
        fp_rem(&c.fq, &num, &self.a).is_empty()
    }
}

impl CurveFq {
    /// Cantor composition + reduction.
    pub fn add(&self, d1: &Mumford, d2: &Mumford) -> Mumford {
        let f = &self.fq;
        let (a1, b1) = (&d1.a, &d1.b);
        let (a2, b2) = (&d2.a, &d2.b);
        // d1 = gcd(a1, a2) = e1 a1 + e2 a2
        let (g1, e1, e2) = fp_xgcd(f, a1, a2);
        // d = gcd(g1, b1 + b2) = c1 g1 + c2 (b1+b2)
        let b12 = fp_add(f, b1, b2);
        let (d, c1, c2) = fp_xgcd(f, &g1, &b12);
        let s1 = fp_mul(f, &c1, &e1);
        let s2 = fp_mul(f, &c1, &e2);
        let s3 = c2;
        // a = a1 a2 / d^2
        let d2sq = fp_mul(f, &d, &d);
        let (a, rem) = fp_divmod(f, &fp_mul(f, a1, a2), &d2sq);
        debug_assert!(rem.is_empty());
        // b = (s1 a1 b2 + s2 a2 b1 + s3 (b1 b2 + f)) / d mod a
        let t1 = fp_mul(f, &fp_mul(f, &s1, a1), b2);
        let t2 = fp_mul(f, &fp_mul(f, &s2, a2), b1);
        let t3 = fp_mul(f, &s3, &fp_add(f, &fp_mul(f, b1, b2), &self.f));
        let num = fp_add(f, &fp_add(f, &t1, &t2), &t3);
        let (bq, brem) = fp_divmod(f, &num, &d);
        debug_assert!(brem.is_empty());
        let b = fp_rem(f, &bq, &a);
        self.reduce(Mumford { a: fp_monic(f, &a), b })
    }

    fn reduce(&self, d: Mumford) -> Mumford {
        let f = &self.fq;
        let mut a = d.a;
        let mut b = d.b;
        while a.len() - 1 > self.genus {
            // a' = (f - b^2)/a, b' = -b mod a'
            let num = fp_sub(f, &self.f, &fp_mul(f, &b, &b));
            let (anew, rem) = fp_divmod(f, &num, &a);
            debug_assert!(rem.is_empty());
            let anew = fp_monic(f, &anew);
            let bneg: FqPoly = b.iter().map(|&x| f.neg(x)).collect();
            b = fp_rem(f, &bneg, &anew);
            a = anew;
        }
        if a.is_empty() {
            a = vec![1];
        }
        Mumford { a, b }
    }

    pub fn neg_div(&self, d: &Mumford) -> Mumford {
        let bneg: FqPoly = d.b.iter().map(|&x| self.fq.neg(x)).collect();
        Mumford {
            a: d.a.clone(),
            b: fp_rem(&self.fq, &bneg, &d.a),
        }
    }

    pub fn smul(&self, mut n: u64, d: &Mumford) -> Mumford {
        let mut acc = Mumford::identity();
        let mut base = d.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            n >>= 1;
        }
        acc
    }

    /// Deterministic pseudo-random Jacobian element from a seed.
    pub fn random_element(&self, seed: &mut u64) -> Mumford {
        let mut pts = vec![];
        while pts.len() < 2 {
            let x = splitmix(seed) % self.fq.q;
            let v = fp_eval(&self.fq, &self.f, x);
            if let Some(y) = self.fq.sqrt(v) {
                let y = if splitmix(seed) & 1 == 1 { self.fq.neg(y) } else { y };
                pts.push((x, y));
            }
        }
        let d1 = Mumford::from_point(self, pts[0].0, pts[0].1);
        let d2 = Mumford::from_point(self, pts[1].0, pts[1].1);
        self.add(&d1, &d2)
    }
}

pub fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// Group structure
// ---------------------------------------------------------------------------

/// Invariant factors d_1 | d_2 | ... with generator representatives; the
/// stored per-prime data supports discrete logarithms for sieving.
#[derive(Debug, Clone)]
pub struct AbelianGroupStructure {
    pub order: u64,
    /// nontrivial invariant factors, ascending, product = order
    pub invariants: Vec<u64>,
    /// one generator per invariant factor
    pub generators: Vec<Mumford>,
    sylow: Vec<SylowData>,
}

#[derive(Debug, Clone)]
struct SylowData {
    ell: u64,
    e: u32,
    /// orders of the (at most two) cyclic factors: ell^m1 >= ell^m2
    m1: u32,
    m2: u32,
    g1: Mumford,
    g2: Option<Mumford>,
    /// cofactor n / ell^e projecting onto this Sylow subgroup
    cofactor: u64,
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = vec![];
    for d in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
    }
    let mut d = 49u64;
    while d * d <= n && d < 1_000_000 {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 2;
    }
    if n > 1 {
        // n has at most two prime factors > 10^6; pollard-rho it
        let mut stack = vec![n];
        let mut extra = std::collections::BTreeMap::new();
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if crate::padic::is_prime_u64(m) {
                *extra.entry(m).or_insert(0u32) += 1;
                continue;
            }
            let f = pollard_rho(m);
            stack.push(f);
            stack.push(m / f);
        }
        for (p, e) in extra {
            out.push((p, e));
        }
    }
    out.sort();
    out
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut seed = 0x12345678u64 ^ n;
    loop {
        let c = splitmix(&mut seed) % n;
        let f = |x: u64| -> u64 { ((x as u128 * x as u128 + c as u128) % n as u128) as u64 };
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            let diff = if x > y { x - y } else { y - x };
            d = gcd_u64(diff, n);
        }
        if d != n && d != 1 {
            return d;
        }
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Order of an element given a multiple `bound` of it (the group order).
fn element_order(c: &CurveFq, d: &Mumford, bound: u64) -> u64 {
    let mut ord = bound;
    for (p, e) in factorize(bound) {
        for _ in 0..e {
            if ord % p == 0 && c.smul(ord / p, d).is_identity() {
                ord /= p;
            } else {
                break;
            }
        }
    }
    ord
}

/// Computes J(F_q) as a product of at most two cyclic factors per prime
/// (ample for the curves at desk scale; errors otherwise).
pub fn jacobian_group_structure(c: &CurveFq, seed: u64) -> Result<AbelianGroupStructure, CurveError> {
    let (_, _, n) = lpoly_genus2(c)?;
    let mut rng = seed ^ 0xABCDEF;
    let fac = factorize(n);
    let mut sylow = vec![];
    for &(ell, e) in &fac {
        let pe = ell.pow(e);
        let cof = n / pe;
        // sample elements of the Sylow subgroup
        let mut best: Option<(Mumford, u32)> = None;
        let mut tries = 0;
        loop {
            tries += 1;
            if tries > 200 {
                break;
            }
            let s = c.smul(cof, &c.random_element(&mut rng));
            if s.is_identity() {
                continue;
            }
            let ord = element_order(c, &s, pe);
            let m = ord_val(ord, ell);
            if best.as_ref().map_or(true, |&(_, bm)| m > bm) {
                best = Some((s, m));
                if ell.pow(m) == pe {
                    break; // cyclic
                }
            }
            // enough samples to be confident about the exponent
            if tries > 40 && best.is_some() {
                break;
            }
        }
        let (g1, m1) = best.ok_or(CurveError::BadDivisor("empty Sylow sampling".into()))?;
        if ell.pow(m1) == pe {
            sylow.push(SylowData {
                ell,
                e,
                m1,
                m2: 0,
                g1,
                g2: None,
                cofactor: cof,
            });
            continue;
        }
        // look for a second generator: need s with ell^k s notin <g1> until k = e - m1
        let m2_target = e - m1;
        if m2_target > m1 {
            return Err(CurveError::RankTooLarge);
        }
        let dlog_g1 = build_cyclic_dlog(c, &g1, ell, m1)?;
        let mut found: Option<Mumford> = None;
        let mut tries = 0;
        'outer: while tries < 400 {
            tries += 1;
            let s = c.smul(cof, &c.random_element(&mut rng));
            // find smallest k with ell^k s in <g1>
            let mut k = 0u32;
            let mut sk = s.clone();
            while k <= m1 {
                if let Some(a) = dlog_g1.dlog(c, &sk) {
                    if k == m2_target {
                        // g2 = s - (a / ell^k) g1
                        if a % ell.pow(k) != 0 {
                            // order bookkeeping forces divisibility; resample otherwise
                            break;
                        }
                        let adj = c.smul(a / ell.pow(k), &c.neg_div(&g1));
                        let g2 = c.add(&s, &adj);
                        let og2 = element_order(c, &g2, ell.pow(m1));
                        if og2 == ell.pow(m2_target) {
                            found = Some(g2);
                            break 'outer;
                        }
                    }
                    break;
                }
                sk = c.smul(ell, &sk);
                k += 1;
            }
        }
        let g2 = found.ok_or(CurveError::RankTooLarge)?;
        sylow.push(SylowData {
            ell,
            e,
            m1,
            m2: m2_target,
            g1,
            g2: Some(g2),
            cofactor: cof,
        });
    }
    // assemble invariant factors: d2 = prod ell^m1, d1 = prod ell^m2
    let mut d2 = 1u64;
    let mut d1 = 1u64;
    let mut gen2 = Mumford::identity();
    let mut gen1 = Mumford::identity();
    for s in &sylow {
        d2 *= s.ell.pow(s.m1);
        gen2 = c.add(&gen2, &s.g1);
        if let Some(ref g) = s.g2 {
            d1 *= s.ell.pow(s.m2);
            gen1 = c.add(&gen1, g);
        }
    }
    let mut invariants = vec![];
    let mut generators = vec![];
    if d1 > 1 {
        invariants.push(d1);
        generators.push(gen1);
    }
    if d2 > 1 {
        invariants.push(d2);
        generators.push(gen2);
    }
    debug_assert_eq!(invariants.iter().product::<u64>(), n);
    Ok(AbelianGroupStructure {
        order: n,
        invariants,
        generators,
        sylow,
    })
}

fn ord_val(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n % p == 0 && n > 1 {
        n /= p;
        v += 1;
    }
    v
}

/// Discrete-log table for a cyclic ell-group <g> of order ell^m.
struct CyclicDlog {
    table: std::collections::HashMap<Mumford, u64>,
    baby: u64,
    giant_step: Mumford,
    order: u64,
}

fn build_cyclic_dlog(c: &CurveFq, g: &Mumford, ell: u64, m: u32) -> Result<CyclicDlog, CurveError> {
    let order = ell.pow(m);
    let baby = (order as f64).sqrt().ceil() as u64 + 1;
    if baby > 1 << 22 {
        return Err(CurveError::BudgetExceeded(order));
    }
    let mut table = std::collections::HashMap::new();
    let mut cur = Mumford::identity();
    for i in 0..baby {
        table.entry(cur.clone()).or_insert(i);
        cur = c.add(&cur, g);
    }
    // giant step: -baby * g
    let giant_step = c.neg_div(&c.smul(baby, g));
    Ok(CyclicDlog {
        table,
        baby,
        giant_step,
        order,
    })
}

impl CyclicDlog {
    fn dlog(&self, c: &CurveFq, x: &Mumford) -> Option<u64> {
        let mut cur = x.clone();
        for j in 0..=self.baby {
            if let Some(&i) = self.table.get(&cur) {
                return Some((i + j * self.baby) % self.order);
            }
            cur = c.add(&cur, &self.giant_step);
        }
        None
    }
}

impl AbelianGroupStructure {
    /// Coordinates of x with respect to the invariant-factor generators,
    /// i.e. x = sum coords[i] * generators[i]. None if inconsistent.
    ///
    /// The Sylow projection multiplies by the cofactor, so each per-prime
    /// coordinate is corrected by the inverse of the cofactor before CRT.
    pub fn dlog(&self, c: &CurveFq, x: &Mumford) -> Option<Vec<u64>> {
        let two_factors = self.invariants.len() == 2;
        let mut coord1: Vec<(u64, u64)> = vec![]; // (residue, modulus) for the d1 slot
        let mut coord2: Vec<(u64, u64)> = vec![];
        for s in &self.sylow {
            let xs = c.smul(s.cofactor, x);
            let d1 = build_cyclic_dlog(c, &s.g1, s.ell, s.m1).ok()?;
            let me1 = s.ell.pow(s.m1);
            let inv_cof = mod_inv_u64(s.cofactor % me1, me1)?;
            match &s.g2 {
                None => {
                    let a = d1.dlog(c, &xs)?;
                    coord2.push((mulmod(a, inv_cof, me1), me1));
                    if two_factors {
                        coord1.push((0, 1));
                    }
                }
                Some(g2) => {
                    let o2 = s.ell.pow(s.m2);
                    let inv_cof2 = mod_inv_u64(s.cofactor % o2, o2)?;
                    let mut found = None;
                    let mut bg2 = Mumford::identity();
                    for b in 0..o2 {
                        let target = c.add(&xs, &c.neg_div(&bg2));
                        if let Some(a) = d1.dlog(c, &target) {
                            found = Some((a, b));
                            break;
                        }
                        bg2 = c.add(&bg2, g2);
                    }
                    let (a, b) = found?;
                    coord2.push((mulmod(a, inv_cof, me1), me1));
                    coord1.push((mulmod(b, inv_cof2, o2), o2));
                }
            }
        }
        let mut out = vec![];
        if two_factors {
            out.push(crt_combine(&coord1)?);
        }
        out.push(crt_combine(&coord2)?);
        Some(out)
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn mod_inv_u64(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut t, mut newt) = (0i128, 1i128);
    let (mut r, mut newr) = (m as i128, (a % m) as i128);
    while newr != 0 {
        let q = r / newr;
        t -= q * newt;
        std::mem::swap(&mut t, &mut newt);
        r -= q * newr;
        std::mem::swap(&mut r, &mut newr);
    }
    if r != 1 {
        return None;
    }
    Some((((t % m as i128) + m as i128) % m as i128) as u64)
}

fn crt_combine(parts: &[(u64, u64)]) -> Option<u64> {
    let mut x = 0u128;
    let mut m = 1u128;
    for &(r, md) in parts {
        if md == 1 {
            continue;
        }
        // solve x = r mod md given x mod m
        let md = md as u128;
        let r = r as u128;
        let g = gcd_u64(m as u64, md as u64) as u128;
        debug_assert_eq!(g, 1);
        let minv = mod_inv_u64((m % md) as u64, md as u64)? as u128;
        let t = ((r + md - x % md) % md) * minv % md;
        x += m * t;
        m *= md;
    }
    Some(x as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratpoly::{rat, rint};

    fn poly(v: &[i64]) -> RatPoly {
        RatPoly::new(v.iter().map(|&c| rint(c)).collect())
    }

    #[test]
    fn validate_examples() {
        // x^5 - x + 1 at p = 7
        let f = poly(&[1, -1, 0, 0, 0, 1]);
        let c = validate_curve(&f, 7, "t").unwrap();
        assert_eq!(c.genus, 2);
        // x^5 rejected (not squarefree)
        let g = poly(&[0, 0, 0, 0, 0, 1]);
        assert_eq!(validate_curve(&g, 7, "t"), Err(CurveError::NotSquarefree));
        // even degree rejected
        let h = poly(&[1, 0, 0, 0, 0, 0, 1]);
        assert!(matches!(validate_curve(&h, 7, "t"), Err(CurveError::EvenDegree(6))));
        // non-monic rejected
        let mut k = poly(&[1, 0, 0, 0, 0, 2]);
        assert_eq!(validate_curve(&k, 7, "t"), Err(CurveError::NotMonic));
        k = RatPoly::new(vec![rat(1, 7), rint(0), rint(0), rint(0), rint(0), rint(1)]);
        assert_eq!(validate_curve(&k, 7, "t"), Err(CurveError::NotPIntegral(7)));
    }

    #[test]
    fn x0107_odd_model() {
        // y^2 = -3x^6 - 4x^5 - 2x^4 + 2x^3 + 5x^2 + 2x + 1 over Q_61
        let f = poly(&[1, 2, 5, 2, -2, -4, -3]);
        let m = odd_model_from_even(&f, 61, 10, "X0+(107)").unwrap();
        assert_eq!(m.curve.genus, 2);
        let md = m.map.unwrap();
        // root reduces to 30 mod 61
        assert_eq!((&md.root % BigInt::from(61u64)).to_u64().unwrap(), 30);
        // counts agree with the sextic count (isomorphic over Q_61)
        let cq = CurveFq::from_rational(&m.curve, 61).unwrap();
        assert_eq!(count_points(&cq), 75);
    }

    #[test]
    fn counting_small() {
        // y^2 = x^5 - x + 1 over F_7: exhaustive oracle cross-check
        let c = CurveFq::new(7, vec![1, 7 - 1, 0, 0, 0, 1]).unwrap();
        let fq = Fq::new(7);
        let mut expect = 1;
        for x in 0..7 {
            let v = fp_eval(&fq, &c.f, x);
            expect += if v == 0 {
                1
            } else if fq.legendre(v) == 1 {
                2
            } else {
                0
            };
        }
        assert_eq!(count_points(&c), expect);
        // y^2 = x^5 + 1 over F_3: x=0 -> 1 sq (2pts), x=1 -> 2 non-sq, x=2 -> 0 (1pt)
        let c3 = CurveFq::new(3, vec![1, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(count_points(&c3), 1 + 2 + 0 + 1);
    }

    #[test]
    fn cantor_identity_and_inverse() {
        let c = CurveFq::new(11, vec![1, 3, 0, 0, 0, 1]).unwrap(); // y^2 = x^5+3x+1
        let mut seed = 42u64;
        for _ in 0..20 {
            let d = c.random_element(&mut seed);
            assert!(d.is_valid(&c));
            let e = c.add(&d, &Mumford::identity());
            assert_eq!(d, e);
            let inv = c.neg_div(&d);
            assert!(c.add(&d, &inv).is_identity());
        }
    }

    #[test]
    fn cantor_group_law_properties() {
        let c = CurveFq::new(11, vec![1, 3, 0, 0, 0, 1]).unwrap();
        let mut seed = 7u64;
        for _ in 0..50 {
            let a = c.random_element(&mut seed);
            let b = c.random_element(&mut seed);
            let d = c.random_element(&mut seed);
            assert_eq!(c.add(&a, &b), c.add(&b, &a));
            assert_eq!(c.add(&c.add(&a, &b), &d), c.add(&a, &c.add(&b, &d)));
        }
        // Lagrange: |J| * D = 0
        let (_, _, n) = lpoly_genus2(&c).unwrap();
        for _ in 0..20 {
            let d = c.random_element(&mut seed);
            assert!(c.smul(n, &d).is_identity());
        }
    }

    #[test]
    fn group_structures_match_paper() {
        // X0+(107) odd model at q = 61: Z/4681
        let f = poly(&[1, 2, 5, 2, -2, -4, -3]);
        let m = odd_model_from_even(&f, 61, 10, "x0107").unwrap();
        let cq = CurveFq::from_rational(&m.curve, 61).unwrap();
        let gs = jacobian_group_structure(&cq, 1).unwrap();
        assert_eq!(gs.order, 4681);
        assert_eq!(gs.invariants, vec![4681]);
        // C188 at q = 43: (Z/54)^2
        let c188 = poly(&[1, -2, 1, 1, -1, 1]);
        let cc = validate_curve(&c188, 43, "c188").unwrap();
        let cq = CurveFq::from_rational(&cc, 43).unwrap();
        let gs = jacobian_group_structure(&cq, 1).unwrap();
        assert_eq!(gs.order, 2916);
        assert_eq!(gs.invariants, vec![54, 54]);
    }

    #[test]
    fn dlog_consistency() {
        let c188 = poly(&[1, -2, 1, 1, -1, 1]);
        let cc = validate_curve(&c188, 43, "c188").unwrap();
        let cq = CurveFq::from_rational(&cc, 43).unwrap();
        let gs = jacobian_group_structure(&cq, 5).unwrap();
        let mut seed = 99u64;
        for _ in 0..10 {
            let x = cq.random_element(&mut seed);
            let coords = gs.dlog(&cq, &x).expect("dlog");
            let mut acc = Mumford::identity();
            for (i, &a) in coords.iter().enumerate() {
                acc = cq.add(&acc, &cq.smul(a, &gs.generators[i]));
            }
            assert_eq!(acc, x);
        }
    }
}
