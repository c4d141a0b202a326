//! Exact arithmetic in the finite field F_{p^m}.
//!
//! Elements are stored as integer codes `sum c_k p^k`, where `c_k` are the
//! coefficients over F_p in the basis `1, t, .., t^{m-1}` of F_p[t]/(modulus).
//! Multiplication goes through discrete log tables built once per field.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest field order for which log tables are built.
pub const MAX_ORDER: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{m} exceeds the supported maximum {MAX_ORDER}")]
    TooLarge { p: u32, m: u32 },
    #[error("modulus must be monic of degree {m} with coefficients below {p}, got {got:?}")]
    MalformedModulus { p: u32, m: u32, got: Vec<u32> },
    #[error("modulus {0:?} is reducible over the prime field")]
    Reducible(Vec<u32>),
    #[error("division by zero")]
    DivisionByZero,
    #[error("coefficient vector {got:?} is not an element of F_{p}^{m}")]
    Mismatch { p: u32, m: u32, got: Vec<u32> },
    #[error("F_{p}^{small} does not embed into F_{p}^{big}")]
    NoEmbedding { p: u32, small: u32, big: u32 },
}

/// The data defining a field: characteristic, degree and modulus.
///
/// The modulus is monic of degree `m`, stored little-endian with `m + 1`
/// entries. For `m = 1` it is the polynomial `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
}

/// An element of a [`Field`], as its integer code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fe(u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);

    pub fn code(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct Inner {
    spec: FieldSpec,
    q: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    add: Option<Vec<u32>>,
}

/// A finite field F_{p^m}. Cloning is cheap.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}{:?}", self.p(), self.m(), self.0.spec.modulus)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn default_modulus_table(p: u32, m: u32) -> Option<Vec<u32>> {
    let v: &[u32] = match (p, m) {
        (2, 2) => &[1, 1, 1],
        (2, 3) => &[1, 1, 0, 1],
        (2, 4) => &[1, 1, 0, 0, 1],
        (2, 5) => &[1, 0, 1, 0, 0, 1],
        (2, 6) => &[1, 1, 0, 0, 0, 0, 1],
        (2, 8) => &[1, 0, 1, 1, 1, 0, 0, 0, 1],
        (3, 2) => &[2, 2, 1],
        (3, 3) => &[1, 2, 0, 1],
        (3, 4) => &[2, 0, 0, 2, 1],
        (5, 2) => &[2, 4, 1],
        (5, 3) => &[3, 3, 0, 1],
        (7, 2) => &[3, 6, 1],
        _ => return None,
    };
    Some(v.to_vec())
}

/// Remainder of `a` modulo the monic `b`, over F_p, little-endian digits.
fn rem_mod_p(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let db = b.len() - 1;
    let p64 = p as u64;
    while r.len() > db {
        let lead = r.pop().unwrap() % p64;
        if lead != 0 {
            let off = r.len() - db;
            for (k, &bk) in b[..db].iter().enumerate() {
                let sub = lead * bk as u64 % p64;
                r[off + k] = (r[off + k] + p64 - sub) % p64;
            }
        }
    }
    r.into_iter().map(|c| (c % p64) as u32).collect()
}

/// Trial division by every monic polynomial of degree 1..=m/2.
fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let m = modulus.len() - 1;
    if m <= 1 {
        return true;
    }
    for d in 1..=m / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut div = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                div.push((c % p as u64) as u32);
                c /= p as u64;
            }
            div.push(1);
            if rem_mod_p(modulus, &div, p).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u32, m: u32) -> Vec<u32> {
    let count = (p as u64).pow(m);
    for code in 0..count {
        let mut v = Vec::with_capacity(m as usize + 1);
        let mut c = code;
        for _ in 0..m {
            v.push((c % p as u64) as u32);
            c /= p as u64;
        }
        v.push(1);
        if v[0] != 0 && is_irreducible(&v, p) {
            return v;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// The built-in modulus for `(p, m)`: a table entry when present, otherwise
/// the irreducible polynomial with the smallest code.
pub fn default_modulus(p: u32, m: u32) -> Vec<u32> {
    if m == 1 {
        return vec![0, 1];
    }
    default_modulus_table(p, m).unwrap_or_else(|| smallest_irreducible(p, m))
}

fn digits(code: u32, p: u32, m: u32) -> Vec<u32> {
    let mut v = Vec::with_capacity(m as usize);
    let mut c = code;
    for _ in 0..m {
        v.push(c % p);
        c /= p;
    }
    v
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0u32, |acc, &c| acc * p + c)
}

fn mul_digits(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let mut prod = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
        }
    }
    let mut r = rem_mod_p(&prod, modulus, p);
    r.resize(modulus.len() - 1, 0);
    r
}

impl Field {
    /// Builds F_{p^m}. The modulus defaults to [`default_modulus`].
    pub fn new(p: u32, m: u32, modulus: Option<Vec<u32>>) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if m == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u64).checked_pow(m).filter(|&q| q <= MAX_ORDER);
        let q = q.ok_or(FieldError::TooLarge { p, m })? as u32;
        let modulus = match modulus {
            Some(v) => {
                let ok = v.len() == m as usize + 1 && v[m as usize] == 1 && v.iter().all(|&c| c < p);
                if !ok {
                    return Err(FieldError::MalformedModulus { p, m, got: v });
                }
                if !is_irreducible(&v, p) {
                    return Err(FieldError::Reducible(v));
                }
                v
            }
            None => default_modulus(p, m),
        };
        let spec = FieldSpec { p, m, modulus };
        Ok(Field(Arc::new(Self::tables(spec, q))))
    }

    pub fn prime(p: u32) -> Result<Field, FieldError> {
        Field::new(p, 1, None)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Field, FieldError> {
        let modulus = if spec.m == 1 { None } else { Some(spec.modulus.clone()) };
        Field::new(spec.p, spec.m, modulus)
    }

    fn tables(spec: FieldSpec, q: u32) -> Inner {
        let (p, m) = (spec.p, spec.m);
        let order = q - 1;
        // Find a generator of the multiplicative group by brute force.
        let mut exp = Vec::new();
        for g in 1..q {
            let gd = digits(g, p, m);
            let mut cur = vec![0u32; m as usize];
            cur[0] = 1;
            let mut seq = Vec::with_capacity(order as usize);
            loop {
                seq.push(undigits(&cur, p));
                cur = mul_digits(&cur, &gd, &spec.modulus, p);
                if undigits(&cur, p) == 1 {
                    break;
                }
            }
            if seq.len() as u32 == order {
                exp = seq;
                break;
            }
        }
        let mut log = vec![0u32; q as usize];
        for (i, &v) in exp.iter().enumerate() {
            log[v as usize] = i as u32;
        }
        let doubled: Vec<u32> = exp.iter().chain(exp.iter()).copied().collect();
        let add = if p != 2 && q <= 256 {
            let mut t = vec![0u32; (q * q) as usize];
            for a in 0..q {
                let da = digits(a, p, m);
                for b in 0..q {
                    let db = digits(b, p, m);
                    let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                    t[(a * q + b) as usize] = undigits(&s, p);
                }
            }
            Some(t)
        } else {
            None
        };
        Inner { spec, q, exp: doubled, log, add }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn p(&self) -> u32 {
        self.0.spec.p
    }

    pub fn m(&self) -> u32 {
        self.0.spec.m
    }

    /// Number of elements.
    pub fn order(&self) -> u32 {
        self.0.q
    }

    /// `p^e`, panicking on overflow.
    pub fn char_pow(&self, e: u32) -> u32 {
        self.p().checked_pow(e).expect("p^e overflows u32")
    }

    pub fn zero(&self) -> Fe {
        Fe(0)
    }

    pub fn one(&self) -> Fe {
        Fe(1)
    }

    /// Image of an integer under Z -> F_p -> F_{p^m}.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.p() as i64) as u32)
    }

    /// All elements in code order; this is the canonical field order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.0.q).map(Fe)
    }

    pub fn element(&self, code: u32) -> Option<Fe> {
        (code < self.0.q).then_some(Fe(code))
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let p = self.p();
        if p == 2 {
            return Fe(a.0 ^ b.0);
        }
        if let Some(t) = &self.0.add {
            return Fe(t[(a.0 * self.0.q + b.0) as usize]);
        }
        if self.m() == 1 {
            return Fe((a.0 + b.0) % p);
        }
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place = place.wrapping_mul(p);
        }
        Fe(out)
    }

    pub fn neg(&self, a: Fe) -> Fe {
        let p = self.p();
        if p == 2 {
            return a;
        }
        let (mut x, mut out, mut place) = (a.0, 0u32, 1u32);
        while x > 0 {
            out += ((p - x % p) % p) * place;
            x /= p;
            place = place.wrapping_mul(p);
        }
        Fe(out)
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe(0);
        }
        let i = self.0.log[a.0 as usize] + self.0.log[b.0 as usize];
        Fe(self.0.exp[i as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let n = self.0.q - 1;
        let l = self.0.log[a.0 as usize];
        Ok(Fe(self.0.exp[((n - l) % n) as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, k: u64) -> Fe {
        if k == 0 {
            return Fe(1);
        }
        if a.0 == 0 {
            return Fe(0);
        }
        let n = (self.0.q - 1) as u64;
        let l = self.0.log[a.0 as usize] as u64;
        let e = ((l as u128 * (k % n) as u128) % n as u128) as usize;
        Fe(self.0.exp[e])
    }

    /// `a^{p^k}`.
    pub fn frobenius(&self, a: Fe, k: u32) -> Fe {
        if a.0 == 0 {
            return a;
        }
        let n = (self.0.q - 1) as u64;
        let mut l = self.0.log[a.0 as usize] as u64;
        for _ in 0..(k % self.m()) {
            l = l * self.p() as u64 % n;
        }
        Fe(self.0.exp[l as usize])
    }

    /// The unique `d` with `d^{p^e} = c`: the inverse Frobenius applied `e` times.
    pub fn pe_root(&self, c: Fe, e: u32) -> Fe {
        let m = self.m();
        self.frobenius(c, (m - e % m) % m)
    }

    /// Coefficient vector over F_p, length `m`, little-endian.
    pub fn to_coeffs(&self, a: Fe) -> Vec<u32> {
        digits(a.0, self.p(), self.m())
    }

    pub fn from_coeffs(&self, v: &[u32]) -> Result<Fe, FieldError> {
        let (p, m) = (self.p(), self.m());
        if v.len() != m as usize || v.iter().any(|&c| c >= p) {
            return Err(FieldError::Mismatch { p, m, got: v.to_vec() });
        }
        Ok(Fe(undigits(v, p)))
    }

    /// The element `t` (class of the modulus variable); equals 0 when m = 1.
    pub fn generator_t(&self) -> Fe {
        if self.m() == 1 {
            Fe(0)
        } else {
            Fe(self.p())
        }
    }

    /// The extension F_{p^{m d}} with its default modulus.
    pub fn extension(&self, d: u32) -> Result<Field, FieldError> {
        let m = self.m().checked_mul(d).ok_or(FieldError::TooLarge { p: self.p(), m: u32::MAX })?;
        Field::new(self.p(), m, None)
    }

    /// An embedding of `self` into `big`, as a lookup table indexed by code.
    ///
    /// The image of `t` is the smallest-code root of the modulus in `big`.
    pub fn embedding_into(&self, big: &Field) -> Result<Embedding, FieldError> {
        let none = || FieldError::NoEmbedding { p: self.p(), small: self.m(), big: big.m() };
        if big.p() != self.p() || !big.m().is_multiple_of(self.m()) {
            return Err(none());
        }
        let modulus = &self.0.spec.modulus;
        let theta = if self.m() == 1 {
            Fe(0)
        } else {
            big.elements()
                .find(|&th| {
                    let mut acc = Fe(0);
                    for &c in modulus.iter().rev() {
                        acc = big.add(big.mul(acc, th), big.from_int(c as i64));
                    }
                    acc.is_zero()
                })
                .ok_or_else(none)?
        };
        let table = self
            .elements()
            .map(|a| {
                let d = self.to_coeffs(a);
                let mut acc = Fe(0);
                for &c in d.iter().rev() {
                    acc = big.add(big.mul(acc, theta), big.from_int(c as i64));
                }
                acc
            })
            .collect();
        Ok(Embedding { source: self.clone(), target: big.clone(), table })
    }
}

/// A field homomorphism F_{p^m} -> F_{p^{m d}}.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub source: Field,
    pub target: Field,
    table: Vec<Fe>,
}

impl Embedding {
    pub fn apply(&self, a: Fe) -> Fe {
        self.table[a.0 as usize]
    }
}
