//! The monomial-case state: one Weierstrass element
//! `h = z^q + a_1 z^{q-1} + .. + a_q` with `q = p^e`, a boundary monomial
//! `x^alpha y^beta` at a level, and the boundary divisors through the point.

use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::field::{Embedding, Field};
use crate::poly::{binom_mod_p, BiPoly, Order, TriPoly};

/// Exact rational number.
pub type Rat = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rat {
    Ratio::new(n, d)
}

/// Canonical `"n/d"` text, also used for integers (`"3/1"`).
pub fn rat_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Rational for an order divided by `q`, with infinity clamped to `cap`.
pub fn order_over(o: Order, q: u32, cap: Rat) -> Rat {
    match o {
        Order::Finite(n) => rat(n as i64, q as i64).min(cap),
        Order::Infinite => cap,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

/// Where a slope or an invariant is evaluated: the closed point or the
/// generic point of a coordinate divisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loc {
    Point,
    Generic(Axis),
}

impl Loc {
    pub const ALL: [Loc; 3] = [Loc::Point, Loc::Generic(Axis::X), Loc::Generic(Axis::Y)];

    pub fn name(self) -> &'static str {
        match self {
            Loc::Point => "P",
            Loc::Generic(Axis::X) => "xi_x",
            Loc::Generic(Axis::Y) => "xi_y",
        }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A boundary divisor through the point; larger age means created later.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Divisor {
    pub age: u32,
}

/// A violated clause of the state's axioms.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("expected {expected} Weierstrass coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("ord_P(a_{i}) = {ord} <= {i}")]
    OrderTooLow { i: usize, ord: u32 },
    #[error("{axis:?}^{need} does not divide a_{i} (valuation {have})")]
    CeilDivisibility { i: usize, axis: Axis, need: u32, have: u32 },
    #[error("exponent of {0:?} is positive but the divisor is absent")]
    MissingDivisor(Axis),
    #[error("monomial level must be positive")]
    ZeroLevel,
    #[error("both divisors have age {0}")]
    AgeCollision(u32),
    #[error("coefficient a_{0} lives over a different field")]
    FieldMismatch(usize),
}

/// The monomial-case state.
#[derive(Clone, PartialEq, Eq)]
pub struct Situation {
    pub field: Field,
    pub e: u32,
    /// `a_1 .. a_q`, stored at indices `0 .. q-1`.
    pub coeffs: Vec<BiPoly>,
    pub alpha: u32,
    pub beta: u32,
    pub level: u32,
    /// Indexed by [`Axis::index`].
    pub divisors: [Option<Divisor>; 2],
    /// Number of steps in the history; new exceptional divisors take
    /// `step_count + 1` as their age.
    pub step_count: u32,
}

impl fmt::Debug for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Situation(p^e={}, ", self.q())?;
        for (i, a) in self.coeffs.iter().enumerate() {
            if !a.is_zero() {
                write!(f, "a_{}={}, ", i + 1, a)?;
            }
        }
        write!(f, "x^{} y^{} @ {}, divisors {:?})", self.alpha, self.beta, self.level, self.divisors)
    }
}

impl Situation {
    /// Builds a state; the step count starts at the oldest age present so
    /// that exceptional divisors are always younger than the given ones.
    pub fn new(
        field: &Field,
        e: u32,
        coeffs: Vec<BiPoly>,
        (alpha, beta, level): (u32, u32, u32),
        divisors: [Option<Divisor>; 2],
    ) -> Situation {
        let step_count = divisors.iter().flatten().map(|d| d.age).max().unwrap_or(0);
        Situation { field: field.clone(), e, coeffs, alpha, beta, level, divisors, step_count }
    }

    /// Convenience constructor where only `a_q` is nonzero and divisors are
    /// present exactly when their exponent is positive (ages 1 and 2).
    pub fn with_top(field: &Field, e: u32, top: BiPoly, (alpha, beta, level): (u32, u32, u32)) -> Situation {
        let q = field.char_pow(e) as usize;
        let mut coeffs = vec![BiPoly::zero(field); q];
        coeffs[q - 1] = top;
        let divisors = [(alpha > 0).then_some(Divisor { age: 1 }), (beta > 0).then_some(Divisor { age: 2 })];
        Situation::new(field, e, coeffs, (alpha, beta, level), divisors)
    }

    /// `p^e`.
    pub fn q(&self) -> u32 {
        self.field.char_pow(self.e)
    }

    /// `a_i` for `1 <= i <= q`.
    pub fn a(&self, i: usize) -> &BiPoly {
        &self.coeffs[i - 1]
    }

    /// The constant term `a_q`.
    pub fn top(&self) -> &BiPoly {
        self.coeffs.last().expect("at least one coefficient")
    }

    pub fn exponent(&self, axis: Axis) -> u32 {
        match axis {
            Axis::X => self.alpha,
            Axis::Y => self.beta,
        }
    }

    pub fn divisor(&self, axis: Axis) -> Option<Divisor> {
        self.divisors[axis.index()]
    }

    pub fn has_divisor(&self, axis: Axis) -> bool {
        self.divisors[axis.index()].is_some()
    }

    /// Usual monomial order: `(alpha+beta)/a` at P, `alpha/a` along x = 0 and
    /// `beta/a` along y = 0.
    pub fn mu(&self, at: Loc) -> Rat {
        let l = self.level as i64;
        match at {
            Loc::Point => rat((self.alpha + self.beta) as i64, l),
            Loc::Generic(axis) => rat(self.exponent(axis) as i64, l),
        }
    }

    /// Checks every axiom of the state and reports the first violation.
    pub fn validate(&self) -> Result<(), Violation> {
        let q = self.q() as usize;
        if self.coeffs.len() != q {
            return Err(Violation::CoefficientCount { expected: q, got: self.coeffs.len() });
        }
        if self.level == 0 {
            return Err(Violation::ZeroLevel);
        }
        if let (Some(dx), Some(dy)) = (self.divisors[0], self.divisors[1]) {
            if dx.age == dy.age {
                return Err(Violation::AgeCollision(dx.age));
            }
        }
        for axis in Axis::BOTH {
            if self.exponent(axis) > 0 && !self.has_divisor(axis) {
                return Err(Violation::MissingDivisor(axis));
            }
        }
        for (k, a) in self.coeffs.iter().enumerate() {
            let i = k + 1;
            if *a.field() != self.field {
                return Err(Violation::FieldMismatch(i));
            }
            if i < q {
                for axis in Axis::BOTH {
                    let need = ceil_div(self.exponent(axis) as u64 * i as u64, self.level as u64) as u32;
                    if let Order::Finite(have) = a.val(axis.index()) {
                        if have < need {
                            return Err(Violation::CeilDivisibility { i, axis, need, have });
                        }
                    }
                }
            }
            if let Order::Finite(ord) = a.ord() {
                if ord as usize <= i {
                    return Err(Violation::OrderTooLow { i, ord });
                }
            }
        }
        Ok(())
    }

    /// The point lies in the support: `h` has order `q` at the origin and the
    /// monomial has order at least its level.
    pub fn in_support(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(k, a)| a.ord().at_least(k as u32 + 1)) && self.mu(Loc::Point) >= rat(1, 1)
    }

    /// `h` as a polynomial in x, y, z.
    pub fn h(&self) -> TriPoly {
        let q = self.q();
        let mut h = TriPoly::monomial(&self.field, [0, 0, q], self.field.one());
        for (k, a) in self.coeffs.iter().enumerate() {
            h = h.add(&a.lift().mul_monomial([0, 0, q - 1 - k as u32]));
        }
        h
    }

    /// Substitutes `z = z' - w` and rewrites the coefficients in `z'`.
    pub fn shift_z(&self, w: &BiPoly) -> Situation {
        Situation { coeffs: shift_monic(&self.coeffs, w), ..self.clone() }
    }

    /// Reads the coefficients back from a monic Weierstrass polynomial in z of
    /// degree `q`. Returns `None` when `h` does not have that shape.
    pub fn with_h(&self, h: &TriPoly) -> Option<Situation> {
        let q = self.q();
        let zc = h.z_coefficients();
        if zc.keys().next_back().copied() != Some(q) || zc[&q] != BiPoly::one(&self.field) {
            return None;
        }
        let coeffs = (1..=q).map(|i| zc.get(&(q - i)).cloned().unwrap_or_else(|| BiPoly::zero(&self.field))).collect();
        Some(Situation { coeffs, ..self.clone() })
    }

    /// The same state over a larger field.
    pub fn base_change(&self, emb: &Embedding) -> Situation {
        let coeffs = self.coeffs.iter().map(|a| a.map_coeffs(&emb.target, |c| emb.apply(c))).collect();
        Situation { field: emb.target.clone(), coeffs, ..self.clone() }
    }
}

pub fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Divisor-only monomial case: the ideal is a product of divisor ideals with
/// multiplicities, at a level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tau0State {
    pub level: u32,
    pub components: Vec<Component>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub id: u32,
    pub multiplicity: u32,
    pub through_point: bool,
}

/// Coefficients of a monic polynomial `t^q + sum c_i t^{q-i}` (with
/// `q = coeffs.len()`) after the substitution `t = t' - w`.
pub fn shift_monic(coeffs: &[BiPoly], w: &BiPoly) -> Vec<BiPoly> {
    let q = coeffs.len() as u64;
    let f = w.field();
    let p = f.p();
    let minus_w = w.neg();
    let mut powers = vec![BiPoly::one(f)];
    for _ in 0..coeffs.len() {
        let next = powers.last().unwrap().mul(&minus_w);
        powers.push(next);
    }
    let mut out = Vec::with_capacity(coeffs.len());
    for i in 1..=coeffs.len() {
        // c'_i = sum_{j <= i} c_j C(q - j, i - j) (-w)^{i-j}, with c_0 = 1
        let mut acc = BiPoly::zero(f);
        for j in 0..=i {
            let b = binom_mod_p(q - j as u64, (i - j) as u64, p);
            if b == 0 {
                continue;
            }
            let term = if j == 0 { powers[i].clone() } else { coeffs[j - 1].mul(&powers[i - j]) };
            acc = acc.add(&term.scale(f.from_int(b as i64)));
        }
        out.push(acc);
    }
    out
}

/// Two Weierstrass elements `h1` in z (degree `p^e1`) and `h2` in y
/// (degree `p^e2`), with the monomial `x^alpha` at a level.
#[derive(Clone, PartialEq, Eq)]
pub struct Tau2State {
    pub field: Field,
    pub e1: u32,
    pub e2: u32,
    /// `b_1 .. b_{q1}` with `h1 = z^{q1} + sum b_i z^{q1-i}`.
    pub h1: Vec<BiPoly>,
    /// `c_1 .. c_{q2}` in x only, with `h2 = y^{q2} + sum c_j y^{q2-j}`;
    /// stored as bivariate polynomials with zero y-degree.
    pub h2: Vec<BiPoly>,
    pub alpha: u32,
    pub level: u32,
    pub step_count: u32,
}

impl fmt::Debug for Tau2State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tau2State(e1={}, e2={}, h1={:?}, h2={:?}, x^{} @ {})", self.e1, self.e2, self.h1, self.h2, self.alpha, self.level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Field {
        Field::prime(2).unwrap()
    }

    fn bi(f: &Field, t: &[([u32; 2], i64)]) -> BiPoly {
        BiPoly::from_int_terms(f, t)
    }

    #[test]
    fn validates_worked_case() {
        let f = f2();
        let s = Situation::with_top(&f, 1, bi(&f, &[([3, 2], 1)]), (2, 2, 2));
        assert_eq!(s.validate(), Ok(()));
    }

    #[test]
    fn low_order_top_coefficient() {
        let f = f2();
        let s = Situation::with_top(&f, 1, bi(&f, &[([1, 0], 1)]), (2, 2, 2));
        assert_eq!(s.validate(), Err(Violation::OrderTooLow { i: 2, ord: 1 }));
    }

    #[test]
    fn ceil_divisibility_violation() {
        let f = f2();
        // a_1 = y is not divisible by x^{ceil(2/2)} = x
        let mut s = Situation::with_top(&f, 1, BiPoly::zero(&f), (2, 0, 2));
        s.coeffs[0] = bi(&f, &[([0, 1], 1)]);
        assert_eq!(s.validate(), Err(Violation::CeilDivisibility { i: 1, axis: Axis::X, need: 1, have: 0 }));
    }

    #[test]
    fn missing_divisor_and_age_collision() {
        let f = f2();
        let mut s = Situation::with_top(&f, 1, BiPoly::zero(&f), (2, 2, 2));
        s.divisors[1] = None;
        assert_eq!(s.validate(), Err(Violation::MissingDivisor(Axis::Y)));
        s.divisors = [Some(Divisor { age: 3 }), Some(Divisor { age: 3 })];
        assert_eq!(s.validate(), Err(Violation::AgeCollision(3)));
    }

    #[test]
    fn monomial_orders() {
        let f = f2();
        let s = Situation::with_top(&f, 1, BiPoly::zero(&f), (4, 2, 2));
        assert_eq!(s.mu(Loc::Point), rat(3, 1));
        assert_eq!(s.mu(Loc::Generic(Axis::X)), rat(2, 1));
        let s = Situation::with_top(&f, 1, BiPoly::zero(&f), (0, 2, 2));
        assert_eq!(s.mu(Loc::Generic(Axis::X)), rat(0, 1));
    }

    #[test]
    fn support_membership() {
        let f = f2();
        assert!(Situation::with_top(&f, 1, bi(&f, &[([3, 2], 1)]), (2, 2, 2)).in_support());
        assert!(!Situation::with_top(&f, 1, bi(&f, &[([9, 9], 1)]), (1, 0, 2)).in_support());
        let mut s = Situation::with_top(&f, 1, bi(&f, &[([1, 0], 1)]), (2, 2, 2));
        s.coeffs[1] = bi(&f, &[([1, 0], 1)]);
        assert!(!s.in_support());
    }

    #[test]
    fn shift_matches_substitution() {
        let f = Field::prime(3).unwrap();
        let mut s = Situation::with_top(&f, 1, bi(&f, &[([2, 2], 1), ([5, 0], 2)]), (2, 2, 1));
        s.coeffs[0] = bi(&f, &[([2, 2], 1)]);
        s.coeffs[1] = bi(&f, &[([4, 4], 2)]);
        let w = bi(&f, &[([1, 1], 1), ([3, 0], 2)]);
        let shifted = s.shift_z(&w);
        let zp = TriPoly::var(&f, 2).sub(&w.lift());
        let expect = s.h().substitute(2, &zp);
        assert_eq!(shifted.h(), expect);
        assert_eq!(s.with_h(&s.h()).unwrap(), s);
    }
}
