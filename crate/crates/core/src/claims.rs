//! Recomputation checks of how the invariants behave under a single
//! blow-up. Each check compares values computed from scratch on the parent
//! and on a successor against the predicted relation.

use std::fmt;

use crate::blowup::{Center, ChartPoint, Expansion, Outcome};
use crate::invariants::{Class, Config, Profile};
use crate::situation::{rat, Axis, Loc, Rat, Situation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClaimId {
    /// Curve blow-up: mu drops by one along the center's axis, unchanged on the other.
    CurveMu,
    /// Curve blow-up: H along the axes behaves like mu.
    CurveH,
    /// Curve blow-up: rho unchanged on the center's axis, down by one on the other.
    CurveRho,
    /// Point blow-up, bad divisor with H < 1: its strict transform stays bad with smaller rho.
    PointStrictTransform,
    /// Point blow-up, bad point: rho of the bad divisor bounds rho of the exceptional divisor.
    PointExceptionalRho,
    /// Point blow-up in configuration C4 with a bad point: mu of the bad divisor exceeds rho of E.
    PointMixedMu,
    /// Configuration C5 with a good point: each rho exceeds the other divisor's mu.
    GoodPointBothBad,
    /// Point blow-up: the exceptional divisor has the class of the point.
    ExceptionalClass,
}

impl ClaimId {
    pub fn name(self) -> &'static str {
        match self {
            ClaimId::CurveMu => "curve_mu",
            ClaimId::CurveH => "curve_h",
            ClaimId::CurveRho => "curve_rho",
            ClaimId::PointStrictTransform => "point_strict_transform",
            ClaimId::PointExceptionalRho => "point_exceptional_rho",
            ClaimId::PointMixedMu => "point_mixed_mu",
            ClaimId::GoodPointBothBad => "good_point_both_bad",
            ClaimId::ExceptionalClass => "exceptional_class",
        }
    }
}

/// One evaluated check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimCheck {
    pub claim: ClaimId,
    /// The successor the check looked at; `None` for checks on the parent.
    pub at: Option<ChartPoint>,
    pub holds: bool,
    pub detail: String,
}

impl fmt::Display for ClaimCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.holds { "holds" } else { "FAILS" };
        write!(f, "{} {}: {}", self.claim.name(), verdict, self.detail)
    }
}

fn show(r: Option<Rat>) -> String {
    r.map_or("undefined".into(), |r| r.to_string())
}

fn check(out: &mut Vec<ClaimCheck>, claim: ClaimId, at: Option<ChartPoint>, holds: bool, detail: String) {
    out.push(ClaimCheck { claim, at, holds, detail });
}

/// Whether the strict transform of the divisor `axis` passes through the
/// candidate point of a point blow-up.
fn on_strict_transform(at: ChartPoint, axis: Axis) -> bool {
    match axis {
        // H'_x is visible only at the y-chart origin
        Axis::X => at.chart == Axis::Y,
        // H'_y passes through the x-chart origin only
        Axis::Y => at.chart == Axis::X && at.c.is_zero(),
    }
}

fn mu(s: &Situation, axis: Axis) -> Rat {
    s.mu(Loc::Generic(axis))
}

/// Runs every applicable check for an expansion of the cleaned `parent`.
/// `children[k]` is the profile of the k-th outcome when it is a successor.
pub fn check_expansion(parent: &Situation, prof: &Profile, exp: &Expansion, children: &[Option<Profile>]) -> Vec<ClaimCheck> {
    let mut out = Vec::new();
    let one = rat(1, 1);
    match exp.center {
        Center::Curve(a) => {
            let b = a.other();
            for (o, cp) in exp.outcomes.iter().zip(children) {
                let (Outcome::Successor(succ), Some(cp)) = (&o.result, cp) else { continue };
                let t = &succ.situation;
                let at = Some(o.at);
                let (ma, mb) = (mu(parent, a), mu(parent, b));
                let (ta, tb) = (mu(t, a), mu(t, b));
                check(&mut out, ClaimId::CurveMu, at, ta == ma - one && tb == mb, format!("mu {ma},{mb} -> {ta},{tb}"));
                let (ha, hb) = (prof.h_at(Loc::Generic(a)), prof.h_at(Loc::Generic(b)));
                let (sa, sb) = (cp.h_at(Loc::Generic(a)), cp.h_at(Loc::Generic(b)));
                check(&mut out, ClaimId::CurveH, at, sa == ha - one && sb == hb, format!("h {ha},{hb} -> {sa},{sb}"));
                if prof.class_of(a) == Some(Class::Bad) {
                    let (r, s) = (prof.rho_of(a), cp.rho_of(a));
                    check(&mut out, ClaimId::CurveRho, at, r.is_some() && r == s, format!("rho on center axis {} -> {}", show(r), show(s)));
                }
                if prof.class_of(b) == Some(Class::Bad) {
                    let (r, s) = (prof.rho_of(b), cp.rho_of(b));
                    let holds = matches!((r, s), (Some(r), Some(s)) if s == r - one);
                    check(&mut out, ClaimId::CurveRho, at, holds, format!("rho on other axis {} -> {}", show(r), show(s)));
                }
            }
        }
        Center::Point => {
            if prof.inv.config == Config::C5 && prof.point == Class::Good {
                let (rx, ry) = (prof.rho_of(Axis::X), prof.rho_of(Axis::Y));
                let (mx, my) = (mu(parent, Axis::X), mu(parent, Axis::Y));
                let holds = matches!((rx, ry), (Some(rx), Some(ry)) if rx > my && ry > mx);
                check(&mut out, ClaimId::GoodPointBothBad, None, holds, format!("rho {},{} vs mu {mx},{my}", show(rx), show(ry)));
            }
            for (o, cp) in exp.outcomes.iter().zip(children) {
                let (Outcome::Successor(succ), Some(cp)) = (&o.result, cp) else { continue };
                let at = Some(o.at);
                let e_axis = succ.exceptional.expect("point blow-ups record the exceptional axis");
                let e_class = cp.class_of(e_axis);
                let rho_e = cp.rho_of(e_axis);
                check(
                    &mut out,
                    ClaimId::ExceptionalClass,
                    at,
                    e_class == Some(prof.point),
                    format!("point {:?}, exceptional {:?}", prof.point, e_class),
                );
                for a in Axis::BOTH {
                    if prof.class_of(a) != Some(Class::Bad) {
                        continue;
                    }
                    let rho_a = prof.rho_of(a);
                    if on_strict_transform(o.at, a) {
                        if prof.h_at(Loc::Generic(a)) < one {
                            let s = cp.rho_of(a);
                            let holds = cp.class_of(a) == Some(Class::Bad) && matches!((rho_a, s), (Some(r), Some(s)) if r > s);
                            check(&mut out, ClaimId::PointStrictTransform, at, holds, format!("{a:?}: class {:?}, rho {} -> {}", cp.class_of(a), show(rho_a), show(s)));
                        }
                    } else if prof.point == Class::Bad {
                        let holds = matches!((rho_a, rho_e), (Some(r), Some(s)) if r >= s);
                        check(&mut out, ClaimId::PointExceptionalRho, at, holds, format!("rho_{} = {} vs rho_e = {}", a.name(), show(rho_a), show(rho_e)));
                    }
                }
                if let (Config::C4 { bad }, Class::Bad) = (prof.inv.config, prof.point) {
                    if !on_strict_transform(o.at, bad.other()) {
                        let m = mu(parent, bad);
                        let holds = matches!(rho_e, Some(s) if m > s);
                        check(&mut out, ClaimId::PointMixedMu, at, holds, format!("mu_{} = {m} vs rho_e = {}", bad.name(), show(rho_e)));
                    }
                }
            }
        }
    }
    out
}
