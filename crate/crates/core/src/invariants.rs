//! Good and bad divisors and points, the residual invariant rho, the
//! configuration of the boundary, and the termination tuple built from them.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cleaning::{invariant_h, CleanError};
use crate::poly::Order;
use crate::situation::{rat, rat_string, Axis, Loc, Rat, Situation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvError {
    #[error("the {0:?} divisor is absent")]
    DivisorAbsent(Axis),
    #[error("rho is undefined: the {0:?} divisor is good")]
    GoodDivisor(Axis),
    #[error("the slice along the {0:?} divisor is a perfect power although h is well-adapted there")]
    PerfectPowerSlice(Axis),
    #[error("no boundary divisor passes through the point")]
    NoDivisor,
    #[error(transparent)]
    Clean(#[from] CleanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Good,
    Bad,
}

/// Good iff H equals mu at the generic point of the divisor.
pub fn classify_divisor(s: &Situation, axis: Axis) -> Result<Class, InvError> {
    if !s.has_divisor(axis) {
        return Err(InvError::DivisorAbsent(axis));
    }
    let at = Loc::Generic(axis);
    Ok(if invariant_h(s, at)? < s.mu(at) { Class::Bad } else { Class::Good })
}

/// Good iff H(P) equals mu(P).
pub fn classify_point(s: &Situation) -> Result<Class, InvError> {
    Ok(if invariant_h(s, Loc::Point)? < s.mu(Loc::Point) { Class::Bad } else { Class::Good })
}

/// Residual order of the slice of `a_q` along a bad divisor, over `q`.
pub fn rho(s: &Situation, axis: Axis) -> Result<Rat, InvError> {
    if classify_divisor(s, axis)? == Class::Good {
        return Err(InvError::GoodDivisor(axis));
    }
    let q = s.q();
    let (r, g) = s.top().initial_form_axis(axis.index()).map_err(|_| InvError::PerfectPowerSlice(axis))?;
    let n = if r % q != 0 { g.ord() } else { g.res_ord_pe(s.e) };
    match n {
        Order::Finite(n) => Ok(rat(n as i64, q as i64)),
        Order::Infinite => Err(InvError::PerfectPowerSlice(axis)),
    }
}

/// Boundary configuration at the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Config {
    /// One divisor, good.
    C1(Axis),
    /// Two divisors, both good.
    C2,
    /// One divisor, bad.
    C3(Axis),
    /// Two divisors; `bad` is the bad one.
    C4 { bad: Axis },
    /// Two divisors, both bad.
    C5,
}

impl Config {
    pub fn tag(self) -> &'static str {
        match self {
            Config::C1(_) => "C1",
            Config::C2 => "C2",
            Config::C3(_) => "C3",
            Config::C4 { .. } => "C4",
            Config::C5 => "C5",
        }
    }
}

pub fn configuration(s: &Situation) -> Result<Config, InvError> {
    let present: Vec<Axis> = Axis::BOTH.into_iter().filter(|&a| s.has_divisor(a)).collect();
    match present.as_slice() {
        [] => Err(InvError::NoDivisor),
        [a] => Ok(match classify_divisor(s, *a)? {
            Class::Good => Config::C1(*a),
            Class::Bad => Config::C3(*a),
        }),
        _ => {
            let cx = classify_divisor(s, Axis::X)?;
            let cy = classify_divisor(s, Axis::Y)?;
            Ok(match (cx, cy) {
                (Class::Good, Class::Good) => Config::C2,
                (Class::Bad, Class::Good) => Config::C4 { bad: Axis::X },
                (Class::Good, Class::Bad) => Config::C4 { bad: Axis::Y },
                (Class::Bad, Class::Bad) => Config::C5,
            })
        }
    }
}

/// The configuration-tagged termination tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvMon {
    pub config: Config,
    pub tuple: Vec<Rat>,
}

impl fmt::Display for InvMon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.tuple.iter().map(|r| r.to_string()).collect();
        write!(f, "{}({})", self.config.tag(), parts.join(", "))
    }
}

impl InvMon {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config.tag(),
            "tuple": self.tuple.iter().map(rat_string).collect::<Vec<_>>(),
        })
    }
}

pub fn inv_mon(s: &Situation) -> Result<InvMon, InvError> {
    let config = configuration(s)?;
    let mu = |a: Axis| s.mu(Loc::Generic(a));
    let zero = rat(0, 1);
    let tuple = match config {
        Config::C1(a) => vec![zero, zero, mu(a)],
        Config::C2 => {
            let (m1, m2) = (mu(Axis::X), mu(Axis::Y));
            vec![zero, zero, m1.min(m2), m1.max(m2)]
        }
        Config::C3(a) => vec![rho(s, a)?, zero, mu(a)],
        Config::C4 { bad } => {
            let (r, m) = (rho(s, bad)?, mu(bad));
            vec![r.min(m), r.max(m)]
        }
        Config::C5 => {
            let (r1, r2) = (rho(s, Axis::X)?, rho(s, Axis::Y)?);
            vec![r1.min(r2), r1.max(r2)]
        }
    };
    Ok(InvMon { config, tuple })
}

/// Lexicographic comparison of `b` against `a`, absent trailing entries
/// counting as minus infinity. Returns the ordering and the deciding
/// index; an index equal to the shorter length means the padding decided
/// (or the tuples are equal).
pub fn compare(b: &InvMon, a: &InvMon) -> (Ordering, usize) {
    let n = b.tuple.len().min(a.tuple.len());
    for i in 0..n {
        match b.tuple[i].cmp(&a.tuple[i]) {
            Ordering::Equal => continue,
            o => return (o, i),
        }
    }
    (b.tuple.len().cmp(&a.tuple.len()), n)
}

/// True iff `b < a` strictly.
pub fn inv_mon_less(b: &InvMon, a: &InvMon) -> bool {
    compare(b, a).0 == Ordering::Less
}

/// Everything the driver records about a cleaned state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    /// H at P, along x = 0, along y = 0.
    pub h: [Rat; 3],
    pub point: Class,
    pub divisors: [Option<Class>; 2],
    pub rho: [Option<Rat>; 2],
    pub inv: InvMon,
}

impl Profile {
    pub fn h_at(&self, at: Loc) -> Rat {
        match at {
            Loc::Point => self.h[0],
            Loc::Generic(Axis::X) => self.h[1],
            Loc::Generic(Axis::Y) => self.h[2],
        }
    }

    pub fn rho_of(&self, axis: Axis) -> Option<Rat> {
        self.rho[axis.index()]
    }

    pub fn class_of(&self, axis: Axis) -> Option<Class> {
        self.divisors[axis.index()]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let opt = |r: Option<Rat>| r.map(|r| rat_string(&r));
        serde_json::json!({
            "H": self.h.iter().map(rat_string).collect::<Vec<_>>(),
            "point": self.point,
            "divisors": {"x": self.divisors[0], "y": self.divisors[1]},
            "rho": {"x": opt(self.rho[0]), "y": opt(self.rho[1])},
            "inv_mon": self.inv.to_json(),
        })
    }
}

/// Computes all invariants of a cleaned state.
pub fn profile(s: &Situation) -> Result<Profile, InvError> {
    let h = [invariant_h(s, Loc::Point)?, invariant_h(s, Loc::Generic(Axis::X))?, invariant_h(s, Loc::Generic(Axis::Y))?];
    let point = classify_point(s)?;
    let mut divisors = [None; 2];
    let mut rhos = [None; 2];
    for axis in Axis::BOTH {
        if s.has_divisor(axis) {
            let c = classify_divisor(s, axis)?;
            divisors[axis.index()] = Some(c);
            if c == Class::Bad {
                rhos[axis.index()] = Some(rho(s, axis)?);
            }
        }
    }
    Ok(Profile { h, point, divisors, rho: rhos, inv: inv_mon(s)? })
}
