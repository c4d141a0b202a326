//! Dense univariate polynomials over a finite field: Euclidean division, gcd
//! and distinct-degree factorization. Used to spot irreducible factors of
//! degree above one, which signal points that are not rational over the
//! current field.

use crate::field::{Fe, Field};

/// Coefficients little-endian, without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dense {
    pub coeffs: Vec<Fe>,
}

impl Dense {
    pub fn new(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Dense { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn x(f: &Field) -> Self {
        Dense::new(vec![Fe::ZERO, f.one()])
    }

    fn one(f: &Field) -> Self {
        Dense::new(vec![f.one()])
    }

    pub fn monic(&self, f: &Field) -> Self {
        match self.coeffs.last() {
            None => self.clone(),
            Some(&lead) => {
                let inv = f.inv(lead).expect("nonzero leading coefficient");
                Dense::new(self.coeffs.iter().map(|&c| f.mul(c, inv)).collect())
            }
        }
    }

    pub fn sub(&self, other: &Self, f: &Field) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &Vec<Fe>, i: usize| v.get(i).copied().unwrap_or(Fe::ZERO);
        Dense::new((0..n).map(|i| f.sub(get(&self.coeffs, i), get(&other.coeffs, i))).collect())
    }

    pub fn mul(&self, other: &Self, f: &Field) -> Self {
        if self.is_zero() || other.is_zero() {
            return Dense::new(vec![]);
        }
        let mut out = vec![Fe::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Dense::new(out)
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, d: &Self, f: &Field) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let inv = f.inv(d.coeffs[dd]).expect("nonzero leading coefficient");
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Dense::new(vec![]), Dense::new(r));
        }
        let mut q = vec![Fe::ZERO; r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = f.mul(r[k + dd], inv);
            q[k] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &dj) in d.coeffs.iter().enumerate() {
                r[k + j] = f.sub(r[k + j], f.mul(c, dj));
            }
        }
        r.truncate(dd);
        (Dense::new(q), Dense::new(r))
    }

    pub fn rem(&self, d: &Self, f: &Field) -> Self {
        self.divrem(d, f).1
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self, f: &Field) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b, f);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// Formal derivative.
    pub fn derivative(&self, f: &Field) -> Self {
        Dense::new(self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| f.mul(c, f.from_int(i as i64))).collect())
    }

    fn powmod(&self, mut n: u64, m: &Self, f: &Field) -> Self {
        let mut base = self.rem(m, f);
        let mut acc = Dense::one(f).rem(m, f);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, f).rem(m, f);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base, f).rem(m, f);
            }
        }
        acc
    }

    /// Squarefree part of a nonzero polynomial: the product of its distinct
    /// irreducible factors.
    pub fn radical(&self, f: &Field) -> Self {
        let mut g = self.monic(f);
        let mut out = Dense::one(f);
        loop {
            if g.degree().unwrap_or(0) == 0 {
                return out;
            }
            let d = g.derivative(f);
            if d.is_zero() {
                // g is a p-th power: take the p-th root of every coefficient
                let p = f.p() as usize;
                g = Dense::new(g.coeffs.iter().step_by(p).map(|&c| f.pe_root(c, 1)).collect());
                continue;
            }
            let common = g.gcd(&d, f);
            let sqfree = g.divrem(&common, f).0;
            // factors of sqfree not already in out
            let fresh = sqfree.divrem(&sqfree.gcd(&out, f), f).0;
            out = out.mul(&fresh, f).monic(f);
            g = common;
        }
    }

    /// Degrees of the distinct irreducible factors, with multiplicity one
    /// per distinct factor, sorted ascending.
    pub fn factor_degrees(&self, f: &Field) -> Vec<usize> {
        let q = f.order() as u64;
        let mut g = self.radical(f);
        let mut out = Vec::new();
        let mut h = Dense::x(f);
        let mut d = 0usize;
        while g.degree().unwrap_or(0) > 0 {
            d += 1;
            if 2 * d > g.degree().unwrap() {
                out.push(g.degree().unwrap());
                break;
            }
            h = h.powmod(q, &g, f);
            let common = g.gcd(&h.sub(&Dense::x(f), f), f);
            let k = common.degree().unwrap_or(0);
            for _ in 0..k / d {
                out.push(d);
            }
            if k > 0 {
                g = g.divrem(&common, f).0;
                h = h.rem(&g, f);
            }
        }
        out
    }

    /// The factor of the radical whose irreducible pieces all have degree > 1.
    pub fn nonlinear_part(&self, f: &Field) -> Self {
        let g = self.radical(f);
        let q = f.order() as u64;
        let lin = g.gcd(&Dense::x(f).powmod(q, &g, f).sub(&Dense::x(f), f), f);
        g.divrem(&lin, f).0.monic(f)
    }
}
