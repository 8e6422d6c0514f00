//! Exact rational polynomials and power series helpers.
//!
//! Used wherever the computation must stay in Q: curve models, cup
//! products via residues, and the metric-graph solver.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Dense polynomial over Q, low-to-high, trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly(pub Vec<Rat>);

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> RatPoly {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly(coeffs)
    }

    pub fn zero() -> RatPoly {
        RatPoly(vec![])
    }

    pub fn monomial(coeff: Rat, deg: usize) -> RatPoly {
        if coeff.is_zero() {
            return Self::zero();
        }
        let mut v = vec![Rat::zero(); deg + 1];
        v[deg] = coeff;
        RatPoly(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.0.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn leading(&self) -> Rat {
        self.0.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let n = self.0.len().max(other.0.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(self.coeff(i) + other.coeff(i));
        }
        RatPoly::new(c)
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        let n = self.0.len().max(other.0.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(self.coeff(i) - other.coeff(i));
        }
        RatPoly::new(c)
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Rat::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        RatPoly::new(c)
    }

    pub fn scale(&self, s: &Rat) -> RatPoly {
        RatPoly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn deriv(&self) -> RatPoly {
        if self.0.len() <= 1 {
            return Self::zero();
        }
        RatPoly::new(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * rint((i + 1) as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Euclidean division (quotient, remainder).
    pub fn divmod(&self, d: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.0.clone();
        let dd = d.0.len();
        if r.len() < dd {
            return (RatPoly::zero(), RatPoly::new(r));
        }
        let mut q = vec![Rat::zero(); r.len() - dd + 1];
        let lead = d.leading();
        while r.len() >= dd {
            let c = r.last().unwrap() / &lead;
            let sh = r.len() - dd;
            if !c.is_zero() {
                q[sh] = c.clone();
                for i in 0..dd {
                    let t = &c * &d.0[i];
                    r[sh + i] -= t;
                }
            }
            r.pop();
        }
        (RatPoly::new(q), RatPoly::new(r))
    }

    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.divmod(&b);
            a = std::mem::replace(&mut b, r);
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.leading();
        a.scale(&(Rat::one() / lead))
    }

    /// Resultant of self and other via the subresultant-free fraction method
    /// (fine at desk scale, exact rational arithmetic).
    pub fn resultant(&self, other: &RatPoly) -> Rat {
        let (mut a, mut b) = (self.clone(), other.clone());
        let mut acc = Rat::one();
        let mut sign = Rat::one();
        loop {
            if b.is_zero() {
                return Rat::zero();
            }
            if b.degree() == Some(0) {
                let db = a.degree().map_or(0, |d| d);
                return sign * acc * pow_rat(&b.0[0], db as u32);
            }
            let (_, r) = a.divmod(&b);
            let da = a.degree().unwrap() as i64;
            let db = b.degree().unwrap() as i64;
            if r.is_zero() {
                return Rat::zero();
            }
            let dr = r.degree().map_or(0, |d| d) as i64;
            // res(a,b) = (-1)^(da db) lc(b)^(da - dr) res(b, r)
            if (da * db) % 2 == 1 {
                sign = -sign;
            }
            acc *= pow_rat(&b.leading(), (da - dr) as u32);
            a = std::mem::replace(&mut b, r);
        }
    }

    pub fn discriminant(&self) -> Rat {
        let d = self.degree().expect("discriminant of zero polynomial");
        assert!(d >= 1);
        let res = self.resultant(&self.deriv());
        let lead = self.leading();
        let sign = if (d * (d - 1) / 2) % 2 == 1 {
            -Rat::one()
        } else {
            Rat::one()
        };
        sign * res / lead
    }

    /// Squarefree over Q.
    pub fn is_squarefree(&self) -> bool {
        let g = self.gcd(&self.deriv());
        g.degree() == Some(0)
    }

    /// Content as p-adic valuation: min over coefficients of v_p.
    pub fn min_val_p(&self, p: u64) -> i64 {
        let pb = BigInt::from(p);
        let mut best: Option<i64> = None;
        for c in &self.0 {
            if c.is_zero() {
                continue;
            }
            let mut v = 0i64;
            let mut num = c.numer().abs();
            let mut den = c.denom().abs();
            while (&num % &pb).is_zero() {
                num /= &pb;
                v += 1;
            }
            while (&den % &pb).is_zero() {
                den /= &pb;
                v -= 1;
            }
            best = Some(best.map_or(v, |b: i64| b.min(v)));
        }
        best.unwrap_or(i64::MAX)
    }

    pub fn to_string_pretty(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = vec![];
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = c.to_string();
            let term = match i {
                0 => cs,
                1 => format!("{cs}*{var}"),
                _ => format!("{cs}*{var}^{i}"),
            };
            parts.push(term);
        }
        parts.join(" + ")
    }
}

pub fn pow_rat(x: &Rat, e: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// Truncated power series over Q with fixed truncation order.
#[derive(Clone, Debug)]
pub struct RatSeries {
    pub coeffs: Vec<Rat>, // c0..c_{n-1}, truncated at n
}

impl RatSeries {
    pub fn new(coeffs: Vec<Rat>, n: usize) -> RatSeries {
        let mut c = coeffs;
        c.resize(n, Rat::zero());
        RatSeries { coeffs: c }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn mul(&self, other: &RatSeries) -> RatSeries {
        let n = self.len().min(other.len());
        let mut c = vec![Rat::zero(); n];
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                if !other.coeffs[j].is_zero() {
                    let t = &self.coeffs[i] * &other.coeffs[j];
                    c[i + j] += t;
                }
            }
        }
        RatSeries { coeffs: c }
    }

    /// 1/sqrt(self) for a series with constant term 1, by Newton iteration.
    pub fn inv_sqrt(&self) -> RatSeries {
        assert!(self.coeffs[0].is_one(), "inv_sqrt needs constant term 1");
        let n = self.len();
        let mut g = RatSeries::new(vec![Rat::one()], n);
        let half = rat(1, 2);
        let three = rint(3);
        // g <- g*(3 - a g^2)/2, doubling precision each round
        let mut prec = 1;
        while prec < n {
            prec = (2 * prec).min(n);
            let ag2 = self.mul(&g.mul(&g));
            let mut t = vec![Rat::zero(); n];
            t[0] = &three - &ag2.coeffs[0];
            for k in 1..n {
                t[k] = -ag2.coeffs[k].clone();
            }
            g = g.mul(&RatSeries { coeffs: t });
            for c in &mut g.coeffs {
                *c *= &half;
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divmod_and_gcd() {
        // (x^2-1) = (x-1)(x+1)
        let a = RatPoly::new(vec![rint(-1), rint(0), rint(1)]);
        let b = RatPoly::new(vec![rint(-1), rint(1)]);
        let (q, r) = a.divmod(&b);
        assert!(r.is_zero());
        assert_eq!(q, RatPoly::new(vec![rint(1), rint(1)]));
        let g = a.gcd(&b);
        assert_eq!(g.degree(), Some(1));
    }

    #[test]
    fn discriminant_values() {
        // disc(x^2 + bx + c) = b^2 - 4c
        let f = RatPoly::new(vec![rint(3), rint(5), rint(1)]);
        assert_eq!(f.discriminant(), rint(25 - 12));
        // x^5 not squarefree
        let g = RatPoly::monomial(Rat::one(), 5);
        assert!(!g.is_squarefree());
    }

    #[test]
    fn series_inv_sqrt() {
        // 1/sqrt(1 - t) = 1 + t/2 + 3t^2/8 + ...
        let a = RatSeries::new(vec![rint(1), rint(-1)], 6);
        let g = a.inv_sqrt();
        assert_eq!(g.coeffs[1], rat(1, 2));
        assert_eq!(g.coeffs[2], rat(3, 8));
        let chk = a.mul(&g.mul(&g));
        assert!(chk.coeffs[1].is_zero() && chk.coeffs[5].is_zero());
    }
}
