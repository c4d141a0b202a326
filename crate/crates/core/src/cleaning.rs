//! Slopes, well-adaptedness and the cleaning loop that makes `h`
//! well-adapted at the closed point and along both coordinate divisors.
//! The slope of a well-adapted element is the invariant H.

use thiserror::Error;

use crate::poly::{BiPoly, Order};
use crate::situation::{order_over, Axis, Loc, Rat, Situation, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CleanError {
    #[error("cleaning exceeded its cap of {0} steps")]
    CapExceeded(usize),
    #[error("slope at {at} did not increase ({before} -> {after})")]
    NoIncrease { at: Loc, before: Rat, after: Rat },
    #[error("a z-shift broke the state axioms (the universal divisibility clause fails for this input): {0}")]
    ShiftBrokeAxioms(Violation),
    #[error("not well-adapted at {0}")]
    NotWellAdapted(Loc),
}

/// One cleaning substitution `z = z' - w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanStep {
    pub at: Loc,
    pub w: BiPoly,
}

#[derive(Debug, Clone)]
pub struct CleanReport {
    pub steps: Vec<CleanStep>,
    pub situation: Situation,
}

fn top_order(s: &Situation, at: Loc) -> Order {
    match at {
        Loc::Point => s.top().ord(),
        Loc::Generic(axis) => s.top().val(axis.index()),
    }
}

/// `min(order of a_q / q, mu)` at the location.
pub fn slope(s: &Situation, at: Loc) -> Rat {
    order_over(top_order(s, at), s.q(), s.mu(at))
}

/// The `p^e`-th root of the offending initial form, or `None` when `h` is
/// well-adapted at the location.
pub fn offending_root(s: &Situation, at: Loc) -> Option<BiPoly> {
    if slope(s, at) == s.mu(at) {
        return None;
    }
    let top = s.top();
    match at {
        Loc::Point => top.initial_form().ok()?.pe_root(s.e),
        Loc::Generic(axis) => {
            let (r, g) = top.initial_form_axis(axis.index()).ok()?;
            let q = s.q();
            if r % q != 0 {
                return None;
            }
            let root = g.pe_root(s.e)?;
            let mut exps = [0u32; 2];
            exps[axis.index()] = r / q;
            let other = axis.other().index();
            Some(BiPoly::from_terms(
                &s.field,
                root.terms().map(|(e, c)| {
                    let mut t = exps;
                    t[other] = e[0];
                    (t, *c)
                }),
            ))
        }
    }
}

pub fn is_well_adapted(s: &Situation, at: Loc) -> bool {
    offending_root(s, at).is_none()
}

/// Upper bound on the number of cleaning steps for `s`.
pub fn step_cap(s: &Situation) -> usize {
    let q = s.q() as u64;
    let a = s.level as u64;
    let nominal = a * (s.alpha as u64 + s.beta as u64 + q) + q;
    let floor = |r: Rat| (r * Rat::from_integer(q as i64)).floor().to_integer() as u64;
    let derived = Loc::ALL.iter().map(|&l| floor(s.mu(l))).sum::<u64>() + 3;
    nominal.max(derived) as usize
}

/// Runs the cleaning loop: passes at P, then along x = 0, then along y = 0,
/// restarting from P after every substitution.
pub fn clean(s: &Situation) -> Result<CleanReport, CleanError> {
    let cap = step_cap(s);
    let mut cur = s.clone();
    let mut steps = Vec::new();
    'outer: loop {
        for at in Loc::ALL {
            if let Some(w) = offending_root(&cur, at) {
                if steps.len() >= cap {
                    return Err(CleanError::CapExceeded(cap));
                }
                let before = slope(&cur, at);
                let next = cur.shift_z(&w);
                next.validate().map_err(CleanError::ShiftBrokeAxioms)?;
                let after = slope(&next, at);
                if after <= before {
                    return Err(CleanError::NoIncrease { at, before, after });
                }
                steps.push(CleanStep { at, w });
                cur = next;
                continue 'outer;
            }
        }
        return Ok(CleanReport { steps, situation: cur });
    }
}

/// The invariant H: the slope at a location where `h` is well-adapted.
pub fn invariant_h(s: &Situation, at: Loc) -> Result<Rat, CleanError> {
    if !is_well_adapted(s, at) {
        return Err(CleanError::NotWellAdapted(at));
    }
    Ok(slope(s, at))
}

/// `(H(xi_x), H(xi_y))`, the exponents of the tight monomial.
pub fn tight_monomial(s: &Situation) -> Result<(Rat, Rat), CleanError> {
    Ok((invariant_h(s, Loc::Generic(Axis::X))?, invariant_h(s, Loc::Generic(Axis::Y))?))
}
