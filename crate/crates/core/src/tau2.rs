//! The two-element case: `h1` monic in z, `h2` monic in y, and the monomial
//! `x^alpha`. The closed point is the only center and the only possible
//! successor is the origin of the x-chart.

use thiserror::Error;

use crate::blowup::{sigma_status, SigmaStatus};
use crate::poly::{BiPoly, Order, PolyError, TriPoly};
use crate::situation::{shift_monic, Tau2State};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Tau2Error {
    #[error("e1 = {e1} exceeds e2 = {e2}")]
    ExponentOrder { e1: u32, e2: u32 },
    #[error("h{element} has {got} coefficients, expected {expected}")]
    CoefficientCount { element: u8, got: usize, expected: usize },
    #[error("coefficient {i} of h{element} has order {ord}, must exceed {i}")]
    OrderTooLow { element: u8, i: usize, ord: Order },
    #[error("coefficient {j} of h2 involves y")]
    NotYFree { j: usize },
    #[error("level must be positive")]
    ZeroLevel,
    #[error("coefficient field mismatch")]
    FieldMismatch,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Result of one blow-up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tau2Outcome {
    Next(Tau2State),
    /// The point has left the support: the chain is finished.
    Done(Exit),
    /// The initial form of `h{element}` stopped being a full power.
    SigmaDrop { element: u8, e: u32 },
}

/// Why the point left the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    /// The monomial no longer reaches the level.
    Monomial,
    /// The transform of `h{0}` has order below its degree.
    Order(u8),
}

/// Checks the shape of the two elements and the orders of their
/// coefficients.
pub fn validate(st: &Tau2State) -> Result<(), Tau2Error> {
    if st.e1 > st.e2 {
        return Err(Tau2Error::ExponentOrder { e1: st.e1, e2: st.e2 });
    }
    if st.level == 0 {
        return Err(Tau2Error::ZeroLevel);
    }
    for (element, coeffs, e) in [(1u8, &st.h1, st.e1), (2, &st.h2, st.e2)] {
        let expected = st.field.char_pow(e) as usize;
        if coeffs.len() != expected {
            return Err(Tau2Error::CoefficientCount { element, got: coeffs.len(), expected });
        }
        for (k, c) in coeffs.iter().enumerate() {
            if *c.field() != st.field {
                return Err(Tau2Error::FieldMismatch);
            }
            let i = k + 1;
            if !c.ord().at_least(i as u32 + 1) {
                return Err(Tau2Error::OrderTooLow { element, i, ord: c.ord() });
            }
            if element == 2 && c.terms().any(|(ex, _)| ex[1] > 0) {
                return Err(Tau2Error::NotYFree { j: i });
            }
        }
    }
    Ok(())
}

/// The point is in the support exactly when the monomial still reaches the
/// level; the element orders hold by the shape axioms.
pub fn in_support(st: &Tau2State) -> bool {
    st.alpha >= st.level
}

/// `t^q + sum c_i t^{q-i}` with `t` the variable in one slot of a
/// trivariate polynomial (slot `slot_of_t`) whose other slots carry the
/// bivariate exponents via `map`.
fn monic(coeffs: &[BiPoly], slot_of_t: usize, map: impl Fn([u32; 2]) -> [u32; 3]) -> TriPoly {
    let f = coeffs[0].field();
    let q = coeffs.len() as u32;
    let mut top = [0u32; 3];
    top[slot_of_t] = q;
    let mut terms = vec![(top, f.one())];
    for (k, c) in coeffs.iter().enumerate() {
        for (ex, v) in c.terms() {
            let mut e3 = map(*ex);
            e3[slot_of_t] += q - k as u32 - 1;
            terms.push((e3, *v));
        }
    }
    TriPoly::from_terms(f, terms)
}

/// Blow-up at the closed point, read at the x-chart origin after the
/// linear readjustments of y and z.
pub fn tau2_step(st: &Tau2State) -> Result<Tau2Outcome, Tau2Error> {
    validate(st)?;
    if !in_support(st) {
        return Ok(Tau2Outcome::Done(Exit::Monomial));
    }
    let f = &st.field;
    let x = BiPoly::var(f, 0);
    let chart = [x.clone(), x.mul(&BiPoly::var(f, 1))];
    let h1: Vec<BiPoly> = st
        .h1
        .iter()
        .enumerate()
        .map(|(k, b)| b.compose(&chart).divide_monomial([k as u32 + 1, 0]))
        .collect::<Result<_, _>>()?;
    let h2: Vec<BiPoly> = st.h2.iter().enumerate().map(|(k, c)| c.divide_monomial([k as u32 + 1, 0])).collect::<Result<_, _>>()?;

    // h2 = y^q2 + ...: read y in the z slot so sigma_status applies
    let t2 = monic(&h2, 2, |[i, _]| [i, 0, 0]);
    if t2.ord() != Order::Finite(f.char_pow(st.e2)) {
        return Ok(Tau2Outcome::Done(Exit::Order(2)));
    }
    let gamma = match sigma_status(&t2, st.e2).expect("monic of full order") {
        SigmaStatus::Dropped(e) => return Ok(Tau2Outcome::SigmaDrop { element: 2, e }),
        SigmaStatus::Same(w) => w,
    };
    let h2 = shift_monic(&h2, &gamma);
    // y = y' - gamma(x) in the coefficients of h1
    let y_img = BiPoly::var(f, 1).sub(&gamma);
    let h1: Vec<BiPoly> = h1.iter().map(|b| b.compose(&[x.clone(), y_img.clone()])).collect();

    let t1 = monic(&h1, 2, |[i, j]| [i, j, 0]);
    if t1.ord() != Order::Finite(f.char_pow(st.e1)) {
        return Ok(Tau2Outcome::Done(Exit::Order(1)));
    }
    let h1 = match sigma_status(&t1, st.e1).expect("monic of full order") {
        SigmaStatus::Dropped(e) => return Ok(Tau2Outcome::SigmaDrop { element: 1, e }),
        SigmaStatus::Same(w) => shift_monic(&h1, &w),
    };
    let next = Tau2State { h1, h2, alpha: st.alpha - st.level, step_count: st.step_count + 1, ..st.clone() };
    validate(&next)?;
    Ok(Tau2Outcome::Next(next))
}

/// How a chain of blow-ups ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tau2Run {
    /// Number of blow-ups performed.
    pub steps: u32,
    pub end: Tau2Outcome,
    pub last: Tau2State,
}

/// Repeats `tau2_step` until the chain ends.
pub fn tau2_chain(st: &Tau2State) -> Result<Tau2Run, Tau2Error> {
    let mut cur = st.clone();
    let mut steps = 0;
    loop {
        match tau2_step(&cur)? {
            Tau2Outcome::Next(n) => {
                cur = n;
                steps += 1;
            }
            end => return Ok(Tau2Run { steps, end, last: cur }),
        }
    }
}
