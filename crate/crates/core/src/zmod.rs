//! Fixed-modulus arithmetic in Z/p^w and dense polynomial arithmetic over it.
//!
//! This is the internal work ring for the cohomology and Coleman engines.
//! The modulus is kept below 2^63 so that products of two residues fit in
//! u128 without splitting into limbs; the resulting precision cap (w digits
//! with p^w < 2^63) is ample for desk-scale runs and is checked on entry.

/// The ring Z/p^w with p odd prime and p^w < 2^63.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ring {
    pub p: u64,
    pub w: u32,
    pub modulus: u128,
}

pub const RING_CAP_BITS: u32 = 63;

impl Ring {
    pub fn new(p: u64, w: u32) -> Option<Ring> {
        let mut m: u128 = 1;
        for _ in 0..w {
            m = m.checked_mul(p as u128)?;
            if m >= 1u128 << RING_CAP_BITS {
                return None;
            }
        }
        Some(Ring { p, w, modulus: m })
    }

    /// Largest w with p^w < 2^63.
    pub fn max_digits(p: u64) -> u32 {
        let mut m: u128 = 1;
        let mut w = 0;
        while let Some(n) = m.checked_mul(p as u128) {
            if n >= 1u128 << RING_CAP_BITS {
                break;
            }
            m = n;
            w += 1;
        }
        w
    }

    #[inline]
    pub fn reduce_i128(&self, x: i128) -> u128 {
        let m = self.modulus as i128;
        let r = x % m;
        if r < 0 {
            (r + m) as u128
        } else {
            r as u128
        }
    }

    #[inline]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        (a * b) % self.modulus
    }

    pub fn pow(&self, mut b: u128, mut e: u64) -> u128 {
        let mut r: u128 = 1 % self.modulus;
        b %= self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    /// Inverse of a unit (panics if not a unit; callers must check valuation).
    pub fn inv(&self, a: u128) -> u128 {
        assert!(a % self.p as u128 != 0, "zmod::inv of a non-unit");
        // Euler: a^(phi(p^w)-1) = a^(p^w - p^(w-1) - 1)
        let phi = self.modulus - self.modulus / self.p as u128;
        self.pow(a, (phi - 1) as u64)
    }

    /// p-adic valuation of a residue, capped at w (0 maps to w).
    pub fn val(&self, a: u128) -> u32 {
        if a == 0 {
            return self.w;
        }
        let mut v = 0;
        let mut a = a;
        let p = self.p as u128;
        while a % p == 0 {
            a /= p;
            v += 1;
        }
        v
    }

    pub fn pk(&self, k: u32) -> u128 {
        let mut m = 1u128;
        for _ in 0..k {
            m *= self.p as u128;
        }
        m
    }
}

/// Dense polynomial over the ring, low-to-high coefficients, trimmed.
pub type Poly = Vec<u128>;

pub fn trim(a: &mut Poly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn padd(r: &Ring, a: &[u128], b: &[u128]) -> Poly {
    let n = a.len().max(b.len());
    let mut c = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        c.push(r.add(x, y));
    }
    trim(&mut c);
    c
}

pub fn psub(r: &Ring, a: &[u128], b: &[u128]) -> Poly {
    let n = a.len().max(b.len());
    let mut c = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        c.push(r.sub(x, y));
    }
    trim(&mut c);
    c
}

pub fn pmul(r: &Ring, a: &[u128], b: &[u128]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut c = vec![0u128; a.len() + b.len() - 1];
    // Accumulate with delayed reduction: products are < 2^126, and we can
    // add a few before overflow; keep it simple and reduce each time.
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if bj == 0 {
                continue;
            }
            c[i + j] = (c[i + j] + ai * bj) % r.modulus;
        }
    }
    trim(&mut c);
    c
}

pub fn pscale(r: &Ring, a: &[u128], s: u128) -> Poly {
    let s = s % r.modulus;
    let mut c: Poly = a.iter().map(|&x| r.mul(x, s)).collect();
    trim(&mut c);
    c
}

pub fn pderiv(r: &Ring, a: &[u128]) -> Poly {
    if a.len() <= 1 {
        return vec![];
    }
    let mut c = Vec::with_capacity(a.len() - 1);
    for i in 1..a.len() {
        c.push(r.mul(a[i], (i as u128) % r.modulus));
    }
    trim(&mut c);
    c
}

/// Remainder of a by monic m.
pub fn pmod_monic(r: &Ring, a: &[u128], m: &[u128]) -> Poly {
    debug_assert_eq!(*m.last().unwrap(), 1);
    let dm = m.len() - 1;
    let mut a: Poly = a.to_vec();
    while a.len() > dm {
        let c = *a.last().unwrap();
        let sh = a.len() - 1 - dm;
        if c != 0 {
            for i in 0..dm {
                a[sh + i] = r.sub(a[sh + i], r.mul(c, m[i]));
            }
        }
        a.pop();
    }
    trim(&mut a);
    a
}

/// Exact quotient a / m for monic m; panics if division is inexact.
pub fn pdiv_exact_monic(r: &Ring, a: &[u128], m: &[u128]) -> Poly {
    debug_assert_eq!(*m.last().unwrap(), 1);
    let dm = m.len() - 1;
    if a.len() <= dm {
        let mut a = a.to_vec();
        trim(&mut a);
        assert!(a.is_empty(), "inexact polynomial division");
        return vec![];
    }
    let mut a: Poly = a.to_vec();
    let mut q = vec![0u128; a.len() - dm];
    while a.len() > dm {
        let c = *a.last().unwrap();
        let sh = a.len() - 1 - dm;
        q[sh] = c;
        if c != 0 {
            for i in 0..dm {
                a[sh + i] = r.sub(a[sh + i], r.mul(c, m[i]));
            }
        }
        a.pop();
    }
    trim(&mut a);
    assert!(a.is_empty(), "inexact polynomial division");
    q
}

pub fn peval(r: &Ring, a: &[u128], x: u128) -> u128 {
    let mut acc = 0u128;
    for &c in a.iter().rev() {
        acc = r.add(r.mul(acc, x), c);
    }
    acc
}

/// Taylor shift: returns the coefficients of a(x + c).
pub fn pshift(r: &Ring, a: &[u128], c: u128) -> Poly {
    // Horner from the top: b <- b*(x+c) + a_i
    let mut b: Poly = vec![];
    for &ai in a.iter().rev() {
        // b * (x + c)
        let mut nb = vec![0u128; b.len() + 1];
        for (i, &bi) in b.iter().enumerate() {
            nb[i + 1] = r.add(nb[i + 1], bi);
            nb[i] = r.add(nb[i], r.mul(bi, c));
        }
        if nb.is_empty() {
            nb.push(0);
        }
        nb[0] = r.add(nb[0], ai);
        trim(&mut nb);
        b = nb;
    }
    b
}

/// Minimal p-adic valuation over all coefficients (w if zero polynomial).
pub fn pcontent_val(r: &Ring, a: &[u128]) -> u32 {
    let mut v = r.w;
    for &c in a {
        if c != 0 {
            v = v.min(r.val(c));
            if v == 0 {
                break;
            }
        }
    }
    v
}

/// Bezout for coprime-mod-p F, G with F monic: s*F + t*G = 1 in Z/p^w,
/// deg t < deg F. Computed mod p by the extended Euclid, then Newton-lifted.
pub fn bezout_monic(r: &Ring, f: &[u128], g: &[u128]) -> (Poly, Poly) {
    let p = r.p as u128;
    // --- extended euclid mod p for t0 = G^{-1} mod (F, p)
    let red = |a: &[u128]| -> Vec<u128> {
        let mut v: Vec<u128> = a.iter().map(|&x| x % p).collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    };
    let mulp = |a: &[u128], b: &[u128]| -> Vec<u128> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut c = vec![0u128; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                c[i + j] = (c[i + j] + ai * bj) % p;
            }
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        c
    };
    let subp = |a: &[u128], b: &[u128]| -> Vec<u128> {
        let n = a.len().max(b.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            c.push((x + p - y % p) % p);
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        c
    };
    let inv_p = |a: u128| -> u128 {
        // Fermat in F_p
        let mut e = r.p - 2;
        let mut b = a % p;
        let mut acc = 1u128;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    };
    let divmod_p = |a: &[u128], b: &[u128]| -> (Vec<u128>, Vec<u128>) {
        let mut a = a.to_vec();
        let mut q = vec![0u128; a.len().saturating_sub(b.len()) + 1];
        let ilc = inv_p(*b.last().unwrap());
        while a.len() >= b.len() && !a.is_empty() {
            if *a.last().unwrap() == 0 {
                a.pop();
                continue;
            }
            let c = a.last().unwrap() * ilc % p;
            let sh = a.len() - b.len();
            q[sh] = c;
            for i in 0..b.len() {
                a[sh + i] = (a[sh + i] + p * p - c * b[i] % p) % p;
            }
            a.pop();
        }
        while a.last() == Some(&0) {
            a.pop();
        }
        (q, a)
    };
    let (mut r0, mut r1) = (red(f), red(g));
    let (mut t0, mut t1): (Vec<u128>, Vec<u128>) = (vec![], vec![1]);
    while !r1.is_empty() {
        let (q, rem) = divmod_p(&r0, &r1);
        r0 = std::mem::replace(&mut r1, rem);
        let nt = subp(&t0, &mulp(&q, &t1));
        t0 = std::mem::replace(&mut t1, nt);
    }
    assert_eq!(r0.len(), 1, "polynomials not coprime mod p");
    let ic = inv_p(r0[0]);
    let mut t: Poly = t0.iter().map(|&x| x * ic % p).collect();
    // --- Newton lift: t <- t*(2 - t*G) mod F until t*G = 1 mod (F, p^w)
    loop {
        let tg = pmod_monic(r, &pmul(r, &t, g), f);
        let mut err = psub(r, &[1], &tg);
        trim(&mut err);
        if err.is_empty() {
            break;
        }
        let upd = pmod_monic(r, &pmul(r, &t, &err), f);
        t = padd(r, &t, &upd);
    }
    // s = (1 - t*G)/F exactly
    let s = pdiv_exact_monic(r, &psub(r, &[1], &pmul(r, &t, g)), f);
    (s, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_basics() {
        let r = Ring::new(7, 8).unwrap();
        assert_eq!(r.modulus, 5764801);
        assert_eq!(r.mul(r.inv(3), 3), 1);
        assert_eq!(r.val(49), 2);
        assert_eq!(Ring::new(61, 11), None);
        assert_eq!(Ring::max_digits(61), 10);
    }

    #[test]
    fn poly_ops() {
        let r = Ring::new(5, 6).unwrap();
        let a = vec![1, 2, 3];
        let b = vec![4, 1];
        let ab = pmul(&r, &a, &b);
        assert_eq!(ab, vec![4, 9, 14, 3]);
        let q = pdiv_exact_monic(&r, &ab, &b.iter().map(|&x| x).collect::<Vec<_>>());
        // b is not monic; use a monic divisor instead
        let m = vec![2, 0, 1]; // x^2 + 2
        let am = pmul(&r, &a, &m);
        assert_eq!(pdiv_exact_monic(&r, &am, &m), a);
        let _ = q;
    }

    #[test]
    fn taylor_shift() {
        let r = Ring::new(7, 6).unwrap();
        // (x+2)^2 = x^2 + 4x + 4: shift of x^2 by 2
        let a = vec![0, 0, 1];
        assert_eq!(pshift(&r, &a, 2), vec![4, 4, 1]);
    }

    #[test]
    fn bezout() {
        let r = Ring::new(7, 8).unwrap();
        // f = x^5 - x + 1 (monic), g = f' = 5x^4 - 1
        let f = vec![1, r.modulus - 1, 0, 0, 0, 1];
        let g = pderiv(&r, &f);
        let (s, t) = bezout_monic(&r, &f, &g);
        let lhs = padd(&r, &pmul(&r, &s, &f), &pmul(&r, &t, &g));
        assert_eq!(lhs, vec![1]);
    }
}
