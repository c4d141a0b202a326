//! Blow-ups of a cleaned state at the closed point or along one of the
//! curves `V(z, x)`, `V(z, y)`, with every candidate successor point
//! enumerated and classified.

use thiserror::Error;

use crate::cleaning::{clean, CleanError, CleanStep};
use crate::field::Fe;
use crate::poly::{BiPoly, Order, PolyError, TriPoly, UPoly};
use crate::singlocus::{support_shape, SupportError, SupportShape};
use crate::situation::{Axis, Divisor, Situation, Violation};
use crate::univar::Dense;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlowupError {
    #[error(transparent)]
    Support(#[from] SupportError),
    #[error("center {center:?} is not allowed for support shape {shape:?}")]
    WrongCenter { center: Center, shape: SupportShape },
    #[error("transformed coefficient is not divisible by the chart variable: {0}")]
    NotDivisible(#[from] PolyError),
    #[error("transformed element has order {order} at the origin or a non-unit leading coefficient; expected order {expected}")]
    SigmaPrecondition { order: Order, expected: u32 },
    #[error("normalized successor violates the state axioms: {0}")]
    Invalid(Violation),
    #[error(transparent)]
    Clean(#[from] CleanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Center {
    Point,
    Curve(Axis),
}

impl Center {
    pub fn name(self) -> &'static str {
        match self {
            Center::Point => "point",
            Center::Curve(Axis::X) => "curve_x",
            Center::Curve(Axis::Y) => "curve_y",
        }
    }
}

/// A candidate point after blow-up: the chart (named by the variable that
/// generates the exceptional ideal there) and the translation `c` of the
/// other base variable. Curve centers use `c = 0`; the y-chart is only
/// visited at its origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChartPoint {
    pub chart: Axis,
    pub c: Fe,
}

/// Whether the initial form of the transformed element stays a power of
/// the original exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SigmaStatus {
    /// The initial form is `(z + w)^q`; `w` is linear in x, y.
    Same(BiPoly),
    /// The initial form is only a `p^{e'}`-th power.
    Dropped(u32),
}

#[derive(Debug, Clone)]
pub struct Successor {
    /// Cleaned successor state.
    pub situation: Situation,
    /// Shift `z = z' - w` that normalized the initial form.
    pub normalizing_shift: BiPoly,
    pub clean_steps: Vec<CleanStep>,
    /// The axis carrying the new exceptional divisor, for point blow-ups.
    pub exceptional: Option<Axis>,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    NotInSupport,
    SigmaDrop(u32),
    Successor(Box<Successor>),
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::NotInSupport => "not_in_support",
            Outcome::SigmaDrop(_) => "sigma_drop",
            Outcome::Successor(_) => "successor",
        }
    }

    pub fn successor(&self) -> Option<&Successor> {
        match self {
            Outcome::Successor(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlowupOutcome {
    pub at: ChartPoint,
    pub result: Outcome,
}

/// Diagnostics about points the rational enumeration cannot see.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// Part of the exceptional curve's support condition has irreducible
    /// factors of the given degrees, so non-rational points may be in the
    /// support.
    NonRational { factor: UPoly, degrees: Vec<usize> },
    /// The support condition holds along the whole exceptional line.
    WholeLine,
}

impl Warning {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Warning::NonRational { factor, degrees } => serde_json::json!({
                "kind": "non_rational_successor_possible",
                "factor": factor.to_json(),
                "degrees": degrees,
            }),
            Warning::WholeLine => serde_json::json!({"kind": "whole_exceptional_line"}),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Expansion {
    pub center: Center,
    pub outcomes: Vec<BlowupOutcome>,
    pub warnings: Vec<Warning>,
}

/// Classifies the initial form of `h`, which must have order `q` with unit
/// `z^q` coefficient.
pub fn sigma_status(h: &TriPoly, e: u32) -> Result<SigmaStatus, BlowupError> {
    let f = h.field();
    let q = f.char_pow(e);
    let order = h.ord();
    if order != Order::Finite(q) || h.coeff(&[0, 0, q]) != f.one() {
        return Err(BlowupError::SigmaPrecondition { order, expected: q });
    }
    let initial = h.homogeneous_part(q);
    match initial.pe_root(e) {
        Some(root) => {
            let w = BiPoly::from_terms(f, root.terms().filter(|(ex, _)| ex[2] == 0).map(|(ex, c)| ([ex[0], ex[1]], *c)));
            Ok(SigmaStatus::Same(w))
        }
        None => Ok(SigmaStatus::Dropped(initial.power_level(e))),
    }
}

/// Support test, then sigma status, then normalization and re-cleaning.
fn finish(raw: Situation, exceptional: Option<Axis>) -> Result<Outcome, BlowupError> {
    if !raw.in_support() {
        return Ok(Outcome::NotInSupport);
    }
    match sigma_status(&raw.h(), raw.e)? {
        SigmaStatus::Dropped(e) => Ok(Outcome::SigmaDrop(e)),
        SigmaStatus::Same(w) => {
            let normalized = raw.shift_z(&w);
            normalized.validate().map_err(BlowupError::Invalid)?;
            let rep = clean(&normalized)?;
            Ok(Outcome::Successor(Box::new(Successor {
                situation: rep.situation,
                normalizing_shift: w,
                clean_steps: rep.steps,
                exceptional,
            })))
        }
    }
}

/// Blow-up along `V(z, axis)`. The only candidate is the origin of the
/// `axis` chart, where `a_i` becomes `a_i / axis^i`.
pub fn blowup_curve(s: &Situation, axis: Axis) -> Result<Expansion, BlowupError> {
    let center = Center::Curve(axis);
    let shape = support_shape(s)?;
    if !shape.contains_curve(axis) {
        return Err(BlowupError::WrongCenter { center, shape });
    }
    let mut coeffs = Vec::with_capacity(s.coeffs.len());
    for (k, a) in s.coeffs.iter().enumerate() {
        let mut ex = [0u32; 2];
        ex[axis.index()] = k as u32 + 1;
        coeffs.push(a.divide_monomial(ex)?);
    }
    let mut raw = Situation { coeffs, step_count: s.step_count + 1, ..s.clone() };
    match axis {
        Axis::X => raw.alpha -= s.level,
        Axis::Y => raw.beta -= s.level,
    }
    let result = finish(raw, None)?;
    Ok(Expansion { center, outcomes: vec![BlowupOutcome { at: ChartPoint { chart: axis, c: Fe::ZERO }, result }], warnings: vec![] })
}

/// Coefficients after the chart substitution of a point blow-up: in the
/// x-chart `(x, y) -> (x, x y)`, in the y-chart `(x, y) -> (x y, y)`, each
/// `a_i` divided by the chart variable to the `i`.
pub fn chart_coefficients(s: &Situation, chart: Axis) -> Result<Vec<BiPoly>, PolyError> {
    let f = &s.field;
    let x = BiPoly::var(f, 0);
    let y = BiPoly::var(f, 1);
    let xy = x.mul(&y);
    let images = match chart {
        Axis::X => [x, xy],
        Axis::Y => [xy, y],
    };
    s.coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let mut ex = [0u32; 2];
            ex[chart.index()] = k as u32 + 1;
            a.compose(&images).divide_monomial(ex)
        })
        .collect()
}

/// Blow-up at the closed point. Candidates are the x-chart points
/// `(0, c, 0)` for every rational `c`, then the y-chart origin.
pub fn blowup_point(s: &Situation) -> Result<Expansion, BlowupError> {
    let center = Center::Point;
    let shape = support_shape(s)?;
    if shape != SupportShape::PointOnly {
        return Err(BlowupError::WrongCenter { center, shape });
    }
    let f = &s.field;
    let step = s.step_count + 1;
    let exceptional = Divisor { age: step };
    let e_exp = s.alpha + s.beta - s.level;
    let mut outcomes = Vec::new();

    let xchart = chart_coefficients(s, Axis::X)?;
    for c in f.elements() {
        let coeffs = xchart.iter().map(|a| a.translate(&[Fe::ZERO, c])).collect();
        let (beta, hy) = if c.is_zero() { (s.beta, s.divisor(Axis::Y)) } else { (0, None) };
        let raw = Situation {
            field: f.clone(),
            e: s.e,
            coeffs,
            alpha: e_exp,
            beta,
            level: s.level,
            divisors: [Some(exceptional), hy],
            step_count: step,
        };
        outcomes.push(BlowupOutcome { at: ChartPoint { chart: Axis::X, c }, result: finish(raw, Some(Axis::X))? });
    }

    let raw = Situation {
        field: f.clone(),
        e: s.e,
        coeffs: chart_coefficients(s, Axis::Y)?,
        alpha: s.alpha,
        beta: e_exp,
        level: s.level,
        divisors: [s.divisor(Axis::X), Some(exceptional)],
        step_count: step,
    };
    outcomes.push(BlowupOutcome { at: ChartPoint { chart: Axis::Y, c: Fe::ZERO }, result: finish(raw, Some(Axis::Y))? });

    let warnings = if e_exp >= s.level { exceptional_warnings(&xchart) } else { vec![] };
    Ok(Expansion { center, outcomes, warnings })
}

/// Polynomial in `c` whose roots are the points `(0, c, 0)` of the x-chart
/// where every transformed `a_i` has order at least `i`; `None` when the
/// condition holds identically.
pub fn support_condition(xchart: &[BiPoly]) -> Option<Dense> {
    let f = xchart[0].field().clone();
    let mut acc = Dense::new(vec![]);
    for (k, a) in xchart.iter().enumerate() {
        let i = k as u32 + 1;
        for kx in 0..i {
            // b(y) = coefficient of x^kx in a_i; it must vanish to order i - kx at y = c
            let b = UPoly::from_terms(&f, a.terms().filter(|(e, _)| e[0] == kx).map(|(e, c)| ([e[1]], *c)));
            for j in 0..(i - kx) {
                let d = Dense::new(b.hasse(0, j).dense());
                if !d.is_zero() {
                    acc = if acc.is_zero() { d.monic(&f) } else { acc.gcd(&d, &f) };
                }
            }
        }
    }
    (!acc.is_zero()).then_some(acc)
}

fn exceptional_warnings(xchart: &[BiPoly]) -> Vec<Warning> {
    let f = xchart[0].field().clone();
    match support_condition(xchart) {
        None => vec![Warning::WholeLine],
        Some(cond) => {
            let part = cond.nonlinear_part(&f);
            if part.degree().unwrap_or(0) == 0 {
                return vec![];
            }
            let degrees = part.factor_degrees(&f);
            let factor = UPoly::from_terms(&f, part.coeffs.iter().enumerate().map(|(i, &c)| ([i as u32], c)));
            vec![Warning::NonRational { factor, degrees }]
        }
    }
}

/// Blow-up at the given center.
pub fn blowup(s: &Situation, center: Center) -> Result<Expansion, BlowupError> {
    match center {
        Center::Point => blowup_point(s),
        Center::Curve(axis) => blowup_curve(s, axis),
    }
}
