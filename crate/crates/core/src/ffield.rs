//! Prime fields F_q (q an odd u64 prime), their quadratic extensions, and
//! dense polynomial arithmetic over them.
//!
//! F_{q^2} is realised as F_q[t]/(t^2 - ns) with ns the smallest quadratic
//! non-residue, chosen deterministically so point counts are reproducible.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fq {
    pub q: u64,
}

impl Fq {
    pub fn new(q: u64) -> Fq {
        Fq { q }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    pub fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.q;
        b %= self.q;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.q != 0, "inverse of zero in F_q");
        self.pow(a, self.q - 2)
    }

    /// Legendre symbol: 1, q-1 (for -1), or 0.
    pub fn legendre(&self, a: u64) -> u64 {
        self.pow(a % self.q, (self.q - 1) / 2)
    }

    pub fn is_square(&self, a: u64) -> bool {
        a % self.q == 0 || self.legendre(a) == 1
    }

    pub fn sqrt(&self, a: u64) -> Option<u64> {
        let a = a % self.q;
        if a == 0 {
            return Some(0);
        }
        if self.legendre(a) != 1 {
            return None;
        }
        if self.q % 4 == 3 {
            return Some(self.pow(a, (self.q + 1) / 4));
        }
        let mut s = 0;
        let mut qq = self.q - 1;
        while qq % 2 == 0 {
            qq /= 2;
            s += 1;
        }
        let mut z = 2;
        while self.legendre(z) != self.q - 1 {
            z += 1;
        }
        let mut m = s;
        let mut c = self.pow(z, qq);
        let mut t = self.pow(a, qq);
        let mut r = self.pow(a, (qq + 1) / 2);
        while t != 1 {
            let mut i = 0;
            let mut tt = t;
            while tt != 1 {
                tt = self.mul(tt, tt);
                i += 1;
            }
            let b = self.pow(c, 1 << (m - i - 1));
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        Some(r)
    }

    /// Smallest quadratic non-residue.
    pub fn nonresidue(&self) -> u64 {
        let mut n = 2;
        while self.is_square(n) {
            n += 1;
        }
        n
    }
}

/// Element of F_{q^2} = F_q[t]/(t^2 - ns): a + b t.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fq2El {
    pub a: u64,
    pub b: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct Fq2 {
    pub base: Fq,
    pub ns: u64,
}

impl Fq2 {
    pub fn new(q: u64) -> Fq2 {
        let base = Fq::new(q);
        Fq2 {
            base,
            ns: base.nonresidue(),
        }
    }

    pub fn embed(&self, a: u64) -> Fq2El {
        Fq2El { a: a % self.base.q, b: 0 }
    }

    pub fn zero(&self) -> Fq2El {
        Fq2El { a: 0, b: 0 }
    }

    pub fn add(&self, x: Fq2El, y: Fq2El) -> Fq2El {
        Fq2El {
            a: self.base.add(x.a, y.a),
            b: self.base.add(x.b, y.b),
        }
    }

    pub fn mul(&self, x: Fq2El, y: Fq2El) -> Fq2El {
        let f = &self.base;
        Fq2El {
            a: f.add(f.mul(x.a, y.a), f.mul(f.mul(x.b, y.b), self.ns)),
            b: f.add(f.mul(x.a, y.b), f.mul(x.b, y.a)),
        }
    }

    pub fn is_zero(&self, x: Fq2El) -> bool {
        x.a == 0 && x.b == 0
    }

    /// Euler test in F_{q^2}: 1 for nonzero squares, q^2-1 style -1 otherwise.
    pub fn is_square(&self, x: Fq2El) -> bool {
        if self.is_zero(x) {
            return true;
        }
        // x is a square in F_{q^2} iff its norm a^2 - ns b^2 is a square in F_q
        let f = &self.base;
        let norm = f.sub(f.mul(x.a, x.a), f.mul(self.ns, f.mul(x.b, x.b)));
        f.is_square(norm)
    }
}

/// Dense polynomial over F_q, low-to-high, trimmed.
pub type FqPoly = Vec<u64>;

pub fn fp_trim(a: &mut FqPoly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn fp_add(f: &Fq, a: &[u64], b: &[u64]) -> FqPoly {
    let n = a.len().max(b.len());
    let mut c = Vec::with_capacity(n);
    for i in 0..n {
        c.push(f.add(
            a.get(i).copied().unwrap_or(0),
            b.get(i).copied().unwrap_or(0),
        ));
    }
    fp_trim(&mut c);
    c
}

pub fn fp_sub(f: &Fq, a: &[u64], b: &[u64]) -> FqPoly {
    let n = a.len().max(b.len());
    let mut c = Vec::with_capacity(n);
    for i in 0..n {
        c.push(f.sub(
            a.get(i).copied().unwrap_or(0),
            b.get(i).copied().unwrap_or(0),
        ));
    }
    fp_trim(&mut c);
    c
}

pub fn fp_mul(f: &Fq, a: &[u64], b: &[u64]) -> FqPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut c = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            c[i + j] = ((c[i + j] as u128 + ai as u128 * bj as u128) % f.q as u128) as u64;
        }
    }
    fp_trim(&mut c);
    c
}

pub fn fp_scale(f: &Fq, a: &[u64], s: u64) -> FqPoly {
    let mut c: FqPoly = a.iter().map(|&x| f.mul(x, s)).collect();
    fp_trim(&mut c);
    c
}

pub fn fp_divmod(f: &Fq, a: &[u64], b: &[u64]) -> (FqPoly, FqPoly) {
    assert!(!b.is_empty());
    let mut r = a.to_vec();
    if r.len() < b.len() {
        fp_trim(&mut r);
        return (vec![], r);
    }
    let mut q = vec![0u64; r.len() - b.len() + 1];
    let ilc = f.inv(*b.last().unwrap());
    while r.len() >= b.len() {
        let c = f.mul(*r.last().unwrap(), ilc);
        let sh = r.len() - b.len();
        if c != 0 {
            q[sh] = c;
            for i in 0..b.len() {
                r[sh + i] = f.sub(r[sh + i], f.mul(c, b[i]));
            }
        }
        r.pop();
    }
    fp_trim(&mut q);
    fp_trim(&mut r);
    (q, r)
}

pub fn fp_rem(f: &Fq, a: &[u64], b: &[u64]) -> FqPoly {
    fp_divmod(f, a, b).1
}

pub fn fp_gcd(f: &Fq, a: &[u64], b: &[u64]) -> FqPoly {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    fp_trim(&mut x);
    fp_trim(&mut y);
    while !y.is_empty() {
        let r = fp_rem(f, &x, &y);
        x = std::mem::replace(&mut y, r);
    }
    if let Some(&lc) = x.last() {
        let ilc = f.inv(lc);
        return fp_scale(f, &x, ilc);
    }
    x
}

/// Extended gcd: returns (g, s, t) with s a + t b = g, g monic.
pub fn fp_xgcd(f: &Fq, a: &[u64], b: &[u64]) -> (FqPoly, FqPoly, FqPoly) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    fp_trim(&mut r0);
    fp_trim(&mut r1);
    let (mut s0, mut s1): (FqPoly, FqPoly) = (vec![1], vec![]);
    let (mut t0, mut t1): (FqPoly, FqPoly) = (vec![], vec![1]);
    while !r1.is_empty() {
        let (q, r) = fp_divmod(f, &r0, &r1);
        r0 = std::mem::replace(&mut r1, r);
        let ns = fp_sub(f, &s0, &fp_mul(f, &q, &s1));
        s0 = std::mem::replace(&mut s1, ns);
        let nt = fp_sub(f, &t0, &fp_mul(f, &q, &t1));
        t0 = std::mem::replace(&mut t1, nt);
    }
    if let Some(&lc) = r0.last() {
        let ilc = f.inv(lc);
        return (
            fp_scale(f, &r0, ilc),
            fp_scale(f, &s0, ilc),
            fp_scale(f, &t0, ilc),
        );
    }
    (r0, s0, t0)
}

pub fn fp_eval(f: &Fq, a: &[u64], x: u64) -> u64 {
    let mut acc = 0u64;
    for &c in a.iter().rev() {
        acc = f.add(f.mul(acc, x), c);
    }
    acc
}

pub fn fp_deriv(f: &Fq, a: &[u64]) -> FqPoly {
    if a.len() <= 1 {
        return vec![];
    }
    let mut c = Vec::with_capacity(a.len() - 1);
    for i in 1..a.len() {
        c.push(f.mul(a[i], (i as u64) % f.q));
    }
    fp_trim(&mut c);
    c
}

pub fn fp_monic(f: &Fq, a: &[u64]) -> FqPoly {
    match a.last() {
        None => vec![],
        Some(&lc) => fp_scale(f, a, f.inv(lc)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fq2_squares() {
        let f2 = Fq2::new(43);
        // embed of a square is a square
        let x = f2.embed(9);
        assert!(f2.is_square(x));
        // t itself (a=0,b=1): norm = -ns, square iff -ns is a QR
        let t = Fq2El { a: 0, b: 1 };
        let f = Fq::new(43);
        let expect = f.is_square(f.neg(f2.ns));
        assert_eq!(f2.is_square(t), expect);
    }

    #[test]
    fn xgcd_identity() {
        let f = Fq::new(11);
        let a = vec![1, 0, 3, 1]; // x^3+3x^2+1
        let b = vec![5, 1]; // x+5
        let (g, s, t) = fp_xgcd(&f, &a, &b);
        let lhs = fp_add(&f, &fp_mul(&f, &s, &a), &fp_mul(&f, &t, &b));
        assert_eq!(lhs, g);
    }
}
