//! Sparse polynomials in `N` variables over a finite field.
//!
//! `BiPoly` (x, y) carries the Weierstrass coefficients, `TriPoly` (x, y, z)
//! the assembled hypersurface, and `UPoly` the slices along a divisor.
//! Power series are never needed: every transform in the engine maps
//! polynomials to polynomials.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{Serialize, SerializeSeq, Serializer};
use thiserror::Error;

use crate::field::{Fe, Field};

/// Order of a polynomial at a point or along a divisor; the zero polynomial
/// has infinite order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(n) => Some(n),
            Order::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Order::Infinite
    }

    /// True when the order is at least `n`.
    pub fn at_least(self, n: u32) -> bool {
        match self {
            Order::Finite(k) => k >= n,
            Order::Infinite => true,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("operation undefined on the zero polynomial")]
    Zero,
    #[error("monomial {divisor:?} does not divide the polynomial")]
    NotDivisible { divisor: Vec<u32> },
}

/// Binomial coefficient `C(n, k)` modulo a prime, by Lucas' theorem.
pub fn binom_mod_p(mut n: u64, mut k: u64, p: u32) -> u32 {
    let p = p as u64;
    let mut acc = 1u64;
    while k > 0 {
        let (ni, ki) = (n % p, k % p);
        if ki > ni {
            return 0;
        }
        // small binomial by multiplicative formula modulo p
        let mut num = 1u64;
        let mut den = 1u64;
        for j in 0..ki {
            num = num * ((ni - j) % p) % p;
            den = den * ((j + 1) % p) % p;
        }
        // den is a unit since ki < p
        let mut inv = 1u64;
        let mut b = den;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                inv = inv * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc = acc * num % p * inv % p;
        n /= p;
        k /= p;
    }
    acc as u32
}

/// A sparse polynomial in `N` variables. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly<const N: usize> {
    field: Field,
    terms: BTreeMap<[u32; N], Fe>,
}

pub type UPoly = Poly<1>;
pub type BiPoly = Poly<2>;
pub type TriPoly = Poly<3>;

fn deg<const N: usize>(e: &[u32; N]) -> u32 {
    e.iter().fold(0u32, |a, &b| a.checked_add(b).expect("exponent overflow"))
}

fn add_exp<const N: usize>(a: &[u32; N], b: &[u32; N]) -> [u32; N] {
    let mut out = [0u32; N];
    for k in 0..N {
        out[k] = a[k].checked_add(b[k]).expect("exponent overflow");
    }
    out
}

impl<const N: usize> Poly<N> {
    pub fn zero(field: &Field) -> Self {
        Poly { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(field: &Field, c: Fe) -> Self {
        Self::monomial(field, [0; N], c)
    }

    pub fn one(field: &Field) -> Self {
        Self::constant(field, field.one())
    }

    pub fn monomial(field: &Field, exps: [u32; N], c: Fe) -> Self {
        let mut p = Self::zero(field);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// The variable with index `k`.
    pub fn var(field: &Field, k: usize) -> Self {
        let mut e = [0; N];
        e[k] = 1;
        Self::monomial(field, e, field.one())
    }

    /// Sums the given terms, combining repeated exponents.
    pub fn from_terms(field: &Field, terms: impl IntoIterator<Item = ([u32; N], Fe)>) -> Self {
        let mut p = Self::zero(field);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Terms given with integer (F_p) coefficients; handy in tests.
    pub fn from_int_terms(field: &Field, terms: &[([u32; N], i64)]) -> Self {
        Self::from_terms(field, terms.iter().map(|&(e, c)| (e, field.from_int(c))))
    }

    fn add_term(&mut self, e: [u32; N], c: Fe) {
        if c.is_zero() {
            return;
        }
        let f = &self.field;
        match self.terms.get_mut(&e) {
            Some(v) => {
                let s = f.add(*v, c);
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending lexicographic order of exponents.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32; N], &Fe)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u32; N]) -> Fe {
        self.terms.get(e).copied().unwrap_or(Fe::ZERO)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(deg).max()
    }

    fn check_field(&self, other: &Self) {
        assert!(self.field == other.field, "polynomials over different fields");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_field(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        Poly { field: f.clone(), terms: self.terms.iter().map(|(e, c)| (*e, f.neg(*c))).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: Fe) -> Self {
        let f = &self.field;
        Self::from_terms(f, self.terms.iter().map(|(e, v)| (*e, f.mul(*v, c))))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_field(other);
        let f = &self.field;
        let mut out = Self::zero(f);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(add_exp(ea, eb), f.mul(*ca, *cb));
            }
        }
        out
    }

    /// Multiplies by the monomial with exponents `exps`.
    pub fn mul_monomial(&self, exps: [u32; N]) -> Self {
        Poly { field: self.field.clone(), terms: self.terms.iter().map(|(e, c)| (add_exp(e, &exps), *c)).collect() }
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.field);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Minimum total degree of a term.
    pub fn ord(&self) -> Order {
        self.terms.keys().map(deg).min().map_or(Order::Infinite, Order::Finite)
    }

    /// Minimum exponent of variable `k`.
    pub fn val(&self, k: usize) -> Order {
        self.terms.keys().map(|e| e[k]).min().map_or(Order::Infinite, Order::Finite)
    }

    /// Sum of the terms of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Poly {
            field: self.field.clone(),
            terms: self.terms.iter().filter(|(e, _)| deg(e) == d).map(|(e, c)| (*e, *c)).collect(),
        }
    }

    /// Lowest-degree homogeneous part.
    pub fn initial_form(&self) -> Result<Self, PolyError> {
        match self.ord() {
            Order::Finite(d) => Ok(self.homogeneous_part(d)),
            Order::Infinite => Err(PolyError::Zero),
        }
    }

    /// Exact division by a monomial.
    pub fn divide_monomial(&self, exps: [u32; N]) -> Result<Self, PolyError> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut q = [0u32; N];
            for k in 0..N {
                q[k] = e[k].checked_sub(exps[k]).ok_or(PolyError::NotDivisible { divisor: exps.to_vec() })?;
            }
            terms.insert(q, *c);
        }
        Ok(Poly { field: self.field.clone(), terms })
    }

    /// True when the monomial with exponents `exps` divides `self`.
    pub fn divisible_by_monomial(&self, exps: [u32; N]) -> bool {
        self.terms.keys().all(|e| (0..N).all(|k| e[k] >= exps[k]))
    }

    /// Returns the `p^e`-th root when every exponent of every term is
    /// divisible by `p^e`.
    pub fn pe_root(&self, e: u32) -> Option<Self> {
        let pe = self.field.char_pow(e);
        let f = &self.field;
        let mut terms = BTreeMap::new();
        for (ex, c) in &self.terms {
            if ex.iter().any(|&v| v % pe != 0) {
                return None;
            }
            let mut r = [0u32; N];
            for k in 0..N {
                r[k] = ex[k] / pe;
            }
            terms.insert(r, f.pe_root(*c, e));
        }
        Some(Poly { field: f.clone(), terms })
    }

    /// Largest `e'` (at most `cap`) such that `self` is a `p^{e'}`-th power.
    pub fn power_level(&self, cap: u32) -> u32 {
        let p = self.field.p();
        let mut best = cap;
        for ex in self.terms.keys() {
            for &v in ex {
                if v == 0 {
                    continue;
                }
                let mut k = 0;
                let mut w = v;
                while w % p == 0 && k < best {
                    w /= p;
                    k += 1;
                }
                best = best.min(k);
            }
        }
        best
    }

    /// Substitutes `images[k]` for variable `k`.
    pub fn compose<const M: usize>(&self, images: &[Poly<M>; N]) -> Poly<M> {
        let f = &self.field;
        for img in images {
            assert!(img.field == *f, "substitution over a different field");
        }
        if images.iter().all(|img| img.terms.len() == 1) {
            return self.compose_monomial(images);
        }
        let mut cache: Vec<BTreeMap<u32, Poly<M>>> = vec![BTreeMap::new(); N];
        let mut out = Poly::<M>::zero(f);
        for (e, c) in &self.terms {
            let mut term = Poly::<M>::constant(f, *c);
            for k in 0..N {
                if e[k] == 0 {
                    continue;
                }
                let pw = cache[k].entry(e[k]).or_insert_with(|| images[k].pow(e[k])).clone();
                term = term.mul(&pw);
            }
            for (te, tc) in term.terms {
                out.add_term(te, tc);
            }
        }
        out
    }

    /// `compose` when every image is a single term.
    fn compose_monomial<const M: usize>(&self, images: &[Poly<M>; N]) -> Poly<M> {
        let f = &self.field;
        let imgs: Vec<(&[u32; M], Fe)> = images.iter().map(|img| img.terms.iter().next().map(|(e, c)| (e, *c)).unwrap()).collect();
        let mut out = Poly::<M>::zero(f);
        for (e, c) in &self.terms {
            let mut ne = [0u32; M];
            let mut nc = *c;
            for (k, (ie, ic)) in imgs.iter().enumerate() {
                for j in 0..M {
                    ne[j] = ie[j].checked_mul(e[k]).and_then(|v| v.checked_add(ne[j])).expect("exponent overflow");
                }
                nc = f.mul(nc, f.pow(*ic, e[k] as u64));
            }
            out.add_term(ne, nc);
        }
        out
    }

    /// Replaces variable `k` by `replacement`, keeping the others.
    pub fn substitute(&self, k: usize, replacement: &Self) -> Self {
        let images: [Self; N] = std::array::from_fn(|j| if j == k { replacement.clone() } else { Self::var(&self.field, j) });
        self.compose(&images)
    }

    /// Value at a point of the field.
    pub fn eval(&self, point: &[Fe; N]) -> Fe {
        let f = &self.field;
        let mut acc = Fe::ZERO;
        for (e, c) in &self.terms {
            let mut t = *c;
            for k in 0..N {
                t = f.mul(t, f.pow(point[k], e[k] as u64));
            }
            acc = f.add(acc, t);
        }
        acc
    }

    /// `self(x + shift)`.
    pub fn translate(&self, shift: &[Fe; N]) -> Self {
        if shift.iter().all(|c| c.is_zero()) {
            return self.clone();
        }
        let f = &self.field;
        let p = f.p();
        let mut out = Self::zero(f);
        for (e, c) in &self.terms {
            // expand prod_k (v_k + s_k)^{e_k} term by term
            let mut partial: Vec<([u32; N], Fe)> = vec![([0; N], *c)];
            for k in 0..N {
                let mut next = Vec::with_capacity(partial.len() * (e[k] as usize + 1));
                for j in 0..=e[k] {
                    let b = binom_mod_p(e[k] as u64, j as u64, p);
                    if b == 0 {
                        continue;
                    }
                    let factor = f.mul(f.from_int(b as i64), f.pow(shift[k], (e[k] - j) as u64));
                    if factor.is_zero() {
                        continue;
                    }
                    for (pe, pc) in &partial {
                        let mut ne = *pe;
                        ne[k] = j;
                        next.push((ne, f.mul(*pc, factor)));
                    }
                }
                partial = next;
            }
            for (ne, nc) in partial {
                out.add_term(ne, nc);
            }
        }
        out
    }

    /// Hasse derivative of order `n` in variable `k`.
    pub fn hasse(&self, k: usize, n: u32) -> Self {
        let f = &self.field;
        let p = f.p();
        Self::from_terms(
            f,
            self.terms.iter().filter(|(e, _)| e[k] >= n).map(|(e, c)| {
                let b = binom_mod_p(e[k] as u64, n as u64, p);
                let mut ne = *e;
                ne[k] -= n;
                (ne, f.mul(*c, f.from_int(b as i64)))
            }),
        )
    }

    /// Applies a coefficient map, e.g. a field embedding.
    pub fn map_coeffs(&self, target: &Field, mut g: impl FnMut(Fe) -> Fe) -> Self {
        Self::from_terms(target, self.terms.iter().map(|(e, c)| (*e, g(*c))))
    }

    /// Drops terms matching the predicate on exponents.
    pub fn filter_terms(&self, mut keep: impl FnMut(&[u32; N]) -> bool) -> Self {
        Poly {
            field: self.field.clone(),
            terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (*e, *c)).collect(),
        }
    }

    /// Serializable form: `[e_0, .., e_{N-1}, coeff-vector]` per term.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("polynomial serialization")
    }
}

impl BiPoly {
    /// `(r, g)` with `r` the valuation along `{axis = 0}` and `g` the slice
    /// of the coefficient of `axis^r`, as a polynomial in the other variable.
    pub fn initial_form_axis(&self, axis: usize) -> Result<(u32, UPoly), PolyError> {
        let r = self.val(axis).finite().ok_or(PolyError::Zero)?;
        let other = 1 - axis;
        let g = UPoly::from_terms(&self.field, self.terms.iter().filter(|(e, _)| e[axis] == r).map(|(e, c)| ([e[other]], *c)));
        Ok((r, g))
    }

    /// Embeds into (x, y, z) space.
    pub fn lift(&self) -> TriPoly {
        TriPoly { field: self.field.clone(), terms: self.terms.iter().map(|(e, c)| ([e[0], e[1], 0], *c)).collect() }
    }
}

impl UPoly {
    /// Smallest exponent `n` with a nonzero term and `p^e` not dividing `n`.
    pub fn res_ord_pe(&self, e: u32) -> Order {
        let pe = self.field.char_pow(e);
        self.terms.keys().map(|k| k[0]).filter(|n| n % pe != 0).min().map_or(Order::Infinite, Order::Finite)
    }

    /// Dense little-endian coefficient vector.
    pub fn dense(&self) -> Vec<Fe> {
        let d = self.terms.keys().map(|k| k[0]).max().map_or(0, |d| d as usize + 1);
        let mut v = vec![Fe::ZERO; d];
        for (k, c) in &self.terms {
            v[k[0] as usize] = *c;
        }
        v
    }
}

impl TriPoly {
    /// Collects `self` as `sum_k coeff_k(x, y) z^k`, returning the coefficient list.
    pub fn z_coefficients(&self) -> BTreeMap<u32, BiPoly> {
        let mut out: BTreeMap<u32, BiPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            out.entry(e[2]).or_insert_with(|| BiPoly::zero(&self.field)).add_term([e[0], e[1]], *c);
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
}

impl<const N: usize> Serialize for Poly<N> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (e, c) in &self.terms {
            let mut row: Vec<serde_json::Value> = e.iter().map(|&v| v.into()).collect();
            row.push(self.field.to_coeffs(*c).into());
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

const NAMES: [&str; 3] = ["x", "y", "z"];

impl<const N: usize> fmt::Display for Poly<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names: Vec<&str> = if N == 1 { vec!["y"] } else { NAMES[..N].to_vec() };
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let mono: Vec<String> = e
                .iter()
                .zip(&names)
                .filter(|(v, _)| **v > 0)
                .map(|(v, n)| if *v == 1 { n.to_string() } else { format!("{n}^{v}") })
                .collect();
            let coeff = if self.field.m() == 1 { c.code().to_string() } else { format!("{:?}", self.field.to_coeffs(*c)) };
            match (mono.is_empty(), c.code() == 1) {
                (true, _) => write!(f, "{coeff}")?,
                (false, true) => write!(f, "{}", mono.join("*"))?,
                (false, false) => write!(f, "{coeff}*{}", mono.join("*"))?,
            }
        }
        Ok(())
    }
}

impl<const N: usize> fmt::Debug for Poly<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}
