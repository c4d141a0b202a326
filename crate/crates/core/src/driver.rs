//! The resolution procedure: choose a center, expand every successor of the
//! blow-up, and recurse, while monitoring that the termination tuple
//! strictly decreases along every successor edge.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::blowup::{blowup, BlowupError, Center, ChartPoint, Expansion, Outcome, Warning};
use crate::claims::{check_expansion, ClaimCheck};
use crate::cleaning::{clean, CleanError, CleanStep};
use crate::field::FieldError;
use crate::invariants::{compare, profile, InvError, InvMon, Profile};
use crate::singlocus::{support_shape, SupportError, SupportShape};
use crate::situation::{Axis, Loc, Situation, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DriverError {
    #[error("invalid state: {0}")]
    Invalid(#[from] Violation),
    #[error(transparent)]
    Clean(#[from] CleanError),
    #[error(transparent)]
    Invariants(#[from] InvError),
    #[error(transparent)]
    Support(#[from] SupportError),
    #[error(transparent)]
    Blowup(#[from] BlowupError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Center prescribed by the support shape: a curve when there is one (the
/// axis with larger mu, the younger divisor on ties), else the point.
pub fn choose_center(s: &Situation, shape: SupportShape) -> Center {
    match shape {
        SupportShape::PointOnly => Center::Point,
        SupportShape::CurveX => Center::Curve(Axis::X),
        SupportShape::CurveY => Center::Curve(Axis::Y),
        SupportShape::BothCurves => {
            let (mx, my) = (s.mu(Loc::Generic(Axis::X)), s.mu(Loc::Generic(Axis::Y)));
            match mx.cmp(&my) {
                Ordering::Greater => Center::Curve(Axis::X),
                Ordering::Less => Center::Curve(Axis::Y),
                Ordering::Equal => {
                    let age = |a: Axis| s.divisor(a).map_or(0, |d| d.age);
                    if age(Axis::Y) > age(Axis::X) {
                        Center::Curve(Axis::Y)
                    } else {
                        Center::Curve(Axis::X)
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_depth: u32,
    /// Largest extension degree the driver may base-change to when a
    /// non-rational successor is possible; 1 disables extension.
    pub extend_field_cap: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_depth: 64, extend_field_cap: 1 }
    }
}

/// A recorded failure of a monitored property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Breach {
    /// A successor's tuple is not strictly smaller than its parent's.
    NoDecrease { node: usize, at: ChartPoint, parent: InvMon, child: InvMon },
    /// The decrease was decided by a missing trailing entry.
    PaddingDecided { node: usize, at: ChartPoint, index: usize },
    /// A blow-up check failed.
    Claim { node: usize, check: ClaimCheck },
}

impl std::fmt::Display for Breach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Breach::NoDecrease { node, at, parent, child } => {
                write!(f, "node {node} at {at:?}: tuple {child} is not below {parent}")
            }
            Breach::PaddingDecided { node, at, index } => write!(f, "node {node} at {at:?}: decided by padding at index {index}"),
            Breach::Claim { node, check } => write!(f, "node {node}: {check}"),
        }
    }
}

/// An edge from a node to one candidate successor point.
#[derive(Debug, Clone)]
pub struct Edge {
    pub at: ChartPoint,
    pub result: EdgeResult,
}

#[derive(Debug, Clone)]
pub enum EdgeResult {
    NotInSupport,
    SigmaDrop(u32),
    Successor {
        /// Shift that normalized the initial form, then the cleaning steps.
        normalizing_shift: crate::poly::BiPoly,
        clean_steps: Vec<CleanStep>,
        /// Comparison of the child's tuple against the parent's.
        decrease: (Ordering, usize),
        child: Box<TraceNode>,
    },
}

impl EdgeResult {
    pub fn name(&self) -> &'static str {
        match self {
            EdgeResult::NotInSupport => "not_in_support",
            EdgeResult::SigmaDrop(_) => "sigma_drop",
            EdgeResult::Successor { .. } => "successor",
        }
    }
}

/// What happened at a node.
#[derive(Debug, Clone)]
pub enum NodeKind {
    /// The point is not in the support (only possible at the root).
    NotInSupport,
    /// Depth cap reached before the node could be expanded.
    DepthCap,
    Expanded {
        shape: SupportShape,
        center: Center,
        /// Extension degree used for this node's blow-up, if any.
        extended: Option<u32>,
        warnings: Vec<Warning>,
        claims: Vec<ClaimCheck>,
        edges: Vec<Edge>,
    },
}

#[derive(Debug, Clone)]
pub struct TraceNode {
    pub id: usize,
    pub depth: u32,
    pub parent: Option<usize>,
    /// Cleaned state at the node.
    pub situation: Situation,
    pub profile: Option<Profile>,
    pub kind: NodeKind,
}

impl TraceNode {
    /// Nodes in depth-first pre-order (the trace order).
    pub fn walk(&self) -> Vec<&TraceNode> {
        let mut out = vec![self];
        if let NodeKind::Expanded { edges, .. } = &self.kind {
            for e in edges {
                if let EdgeResult::Successor { child, .. } = &e.result {
                    out.extend(child.walk());
                }
            }
        }
        out
    }
}

/// A finished resolution run.
#[derive(Debug, Clone)]
pub struct Resolution {
    /// Cleaning steps applied to the input before the root node.
    pub root_clean: Vec<CleanStep>,
    pub root: TraceNode,
    pub breaches: Vec<Breach>,
}

/// Counts over a resolution tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Summary {
    pub nodes: usize,
    pub leaves: BTreeMap<&'static str, usize>,
    pub max_depth: u32,
    pub field_extensions: usize,
    pub claim_checks: usize,
    pub breaches: usize,
}

impl Resolution {
    pub fn summary(&self) -> Summary {
        let mut s = Summary { breaches: self.breaches.len(), ..Default::default() };
        for n in self.root.walk() {
            s.nodes += 1;
            s.max_depth = s.max_depth.max(n.depth);
            match &n.kind {
                NodeKind::NotInSupport => *s.leaves.entry("not_in_support").or_default() += 1,
                NodeKind::DepthCap => *s.leaves.entry("depth_cap").or_default() += 1,
                NodeKind::Expanded { extended, claims, edges, .. } => {
                    s.field_extensions += extended.is_some() as usize;
                    s.claim_checks += claims.len();
                    for e in edges {
                        match e.result {
                            EdgeResult::NotInSupport => *s.leaves.entry("not_in_support").or_default() += 1,
                            EdgeResult::SigmaDrop(_) => *s.leaves.entry("sigma_drop").or_default() += 1,
                            EdgeResult::Successor { .. } => {}
                        }
                    }
                }
            }
        }
        s
    }

    pub fn depth_capped(&self) -> bool {
        self.root.walk().iter().any(|n| matches!(n.kind, NodeKind::DepthCap))
    }

    /// Every claim check evaluated during the run.
    pub fn claim_checks(&self) -> Vec<&ClaimCheck> {
        let mut out = Vec::new();
        for n in self.root.walk() {
            if let NodeKind::Expanded { claims, .. } = &n.kind {
                out.extend(claims.iter());
            }
        }
        out
    }
}

struct Run {
    limits: Limits,
    next_id: usize,
    breaches: Vec<Breach>,
}

/// Resolves a state: validates, cleans, and expands the full tree of
/// successors up to the depth cap.
pub fn resolve(s: &Situation, limits: Limits) -> Result<Resolution, DriverError> {
    s.validate()?;
    let rep = clean(s)?;
    let mut run = Run { limits, next_id: 0, breaches: Vec::new() };
    let root = if rep.situation.in_support() {
        let prof = profile(&rep.situation)?;
        run.node(rep.situation, prof, 0, None)?
    } else {
        let id = run.fresh();
        let prof = profile(&rep.situation).ok();
        TraceNode { id, depth: 0, parent: None, situation: rep.situation, profile: prof, kind: NodeKind::NotInSupport }
    };
    Ok(Resolution { root_clean: rep.steps, root, breaches: run.breaches })
}

/// Degree of the extension to use for the given warnings, if any.
fn extension_degree(warnings: &[Warning], cap: u32) -> Option<u32> {
    let mut degrees: Vec<u32> = warnings
        .iter()
        .filter_map(|w| match w {
            Warning::NonRational { degrees, .. } => Some(degrees.iter().map(|&d| d as u32).filter(|&d| d > 1 && d <= cap)),
            Warning::WholeLine => None,
        })
        .flatten()
        .collect();
    degrees.sort_unstable();
    degrees.dedup();
    let lcm = degrees.iter().fold(1u32, |acc, &d| acc / gcd(acc, d) * d);
    if lcm > 1 && lcm <= cap {
        Some(lcm)
    } else {
        degrees.last().copied()
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Run {
    fn fresh(&mut self) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn node(&mut self, s: Situation, prof: Profile, depth: u32, parent: Option<usize>) -> Result<TraceNode, DriverError> {
        let id = self.fresh();
        if depth >= self.limits.max_depth {
            return Ok(TraceNode { id, depth, parent, situation: s, profile: Some(prof), kind: NodeKind::DepthCap });
        }
        let shape = support_shape(&s)?;
        let center = choose_center(&s, shape);
        let mut working = s.clone();
        let mut exp: Expansion = blowup(&working, center)?;
        let mut extended = None;
        if let Some(d) = extension_degree(&exp.warnings, self.limits.extend_field_cap) {
            let big = working.field.extension(d)?;
            let emb = working.field.embedding_into(&big)?;
            working = working.base_change(&emb);
            let warnings = exp.warnings;
            exp = blowup(&working, center)?;
            exp.warnings = warnings;
            extended = Some(d);
        }

        let mut children = Vec::with_capacity(exp.outcomes.len());
        for o in &exp.outcomes {
            children.push(match &o.result {
                Outcome::Successor(succ) => Some(profile(&succ.situation)?),
                _ => None,
            });
        }
        let claims = check_expansion(&working, &prof, &exp, &children);
        for c in &claims {
            if !c.holds {
                self.breaches.push(Breach::Claim { node: id, check: c.clone() });
            }
        }

        let mut edges = Vec::with_capacity(exp.outcomes.len());
        for (o, cp) in exp.outcomes.into_iter().zip(children) {
            let result = match o.result {
                Outcome::NotInSupport => EdgeResult::NotInSupport,
                Outcome::SigmaDrop(e) => EdgeResult::SigmaDrop(e),
                Outcome::Successor(succ) => {
                    let cp = cp.expect("successor profile computed above");
                    let decrease = compare(&cp.inv, &prof.inv);
                    let common = cp.inv.tuple.len().min(prof.inv.tuple.len());
                    if decrease.0 != Ordering::Less {
                        self.breaches.push(Breach::NoDecrease { node: id, at: o.at, parent: prof.inv.clone(), child: cp.inv.clone() });
                    } else if decrease.1 >= common {
                        self.breaches.push(Breach::PaddingDecided { node: id, at: o.at, index: decrease.1 });
                    }
                    let succ = *succ;
                    let child = self.node(succ.situation, cp, depth + 1, Some(id))?;
                    EdgeResult::Successor {
                        normalizing_shift: succ.normalizing_shift,
                        clean_steps: succ.clean_steps,
                        decrease,
                        child: Box::new(child),
                    }
                }
            };
            edges.push(Edge { at: o.at, result });
        }
        Ok(TraceNode {
            id,
            depth,
            parent,
            situation: s,
            profile: Some(prof),
            kind: NodeKind::Expanded { shape, center, extended, warnings: exp.warnings, claims, edges },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::invariants::Config;
    use crate::poly::BiPoly;
    use crate::situation::{rat, Divisor};

    fn sit(top: &[([u32; 2], i64)], m: (u32, u32, u32)) -> Situation {
        let f = Field::prime(2).unwrap();
        Situation::with_top(&f, 1, BiPoly::from_int_terms(&f, top), m)
    }

    #[test]
    fn larger_mu_first() {
        let s = sit(&[], (4, 2, 2));
        assert_eq!(choose_center(&s, SupportShape::BothCurves), Center::Curve(Axis::X));
    }

    #[test]
    fn younger_divisor_on_ties() {
        let mut s = sit(&[], (4, 4, 2));
        s.divisors = [Some(Divisor { age: 1 }), Some(Divisor { age: 5 })];
        assert_eq!(choose_center(&s, SupportShape::BothCurves), Center::Curve(Axis::Y));
        s.divisors = [Some(Divisor { age: 7 }), Some(Divisor { age: 5 })];
        assert_eq!(choose_center(&s, SupportShape::BothCurves), Center::Curve(Axis::X));
    }

    #[test]
    fn point_only_center() {
        assert_eq!(choose_center(&sit(&[], (2, 0, 2)), SupportShape::PointOnly), Center::Point);
    }

    #[test]
    fn worked_c4_run() {
        let s = sit(&[([3, 2], 1), ([3, 3], 1)], (4, 2, 2));
        let res = resolve(&s, Limits::default()).unwrap();
        let prof = res.root.profile.as_ref().unwrap();
        assert_eq!(prof.inv.config, Config::C4 { bad: Axis::X });
        assert_eq!(prof.inv.tuple, vec![rat(1, 1), rat(2, 1)]);
        let NodeKind::Expanded { center, edges, .. } = &res.root.kind else { panic!("root not expanded") };
        assert_eq!(*center, Center::Curve(Axis::X));
        let EdgeResult::Successor { decrease, child, .. } = &edges[0].result else { panic!("no successor") };
        assert_eq!(decrease.0, Ordering::Less);
        let NodeKind::Expanded { shape, .. } = &child.kind else { panic!("child not expanded") };
        assert_eq!(*shape, SupportShape::CurveY);
        assert!(res.breaches.is_empty(), "{:?}", res.breaches);
        assert!(!res.depth_capped());
    }

    #[test]
    fn curve_chain_for_zero_constant_term() {
        // a_2 = 0, (4, 0, 2): curve blow-ups lower alpha by 2 until mu(P) < 1
        let res = resolve(&sit(&[], (4, 0, 2)), Limits::default()).unwrap();
        let sum = res.summary();
        assert_eq!(sum.nodes, 2);
        assert_eq!(sum.leaves.get("not_in_support"), Some(&1));
        assert!(res.breaches.is_empty());
    }

    #[test]
    fn sigma_drop_leaf() {
        let res = resolve(&sit(&[([3, 1], 1)], (4, 2, 2)), Limits::default()).unwrap();
        let NodeKind::Expanded { edges, .. } = &res.root.kind else { panic!() };
        assert!(matches!(edges[0].result, EdgeResult::SigmaDrop(0)));
    }

    #[test]
    fn depth_cap_is_reported() {
        let res = resolve(&sit(&[], (12, 0, 2)), Limits { max_depth: 2, extend_field_cap: 1 }).unwrap();
        assert!(res.depth_capped());
        assert_eq!(res.summary().leaves.get("depth_cap"), Some(&1));
    }

    #[test]
    fn root_outside_support() {
        let res = resolve(&sit(&[], (1, 0, 2)), Limits::default()).unwrap();
        assert!(matches!(res.root.kind, NodeKind::NotInSupport));
        assert_eq!(res.summary().nodes, 1);
    }

    #[test]
    fn extension_reveals_conjugate_points() {
        // support condition c^2 + c + 1 after the point blow-up
        let s = sit(&[([1, 2], 1), ([2, 1], 1), ([3, 0], 1)], (4, 0, 2));
        let plain = resolve(&s, Limits::default()).unwrap();
        let ext = resolve(&s, Limits { max_depth: 64, extend_field_cap: 2 }).unwrap();
        assert_eq!(plain.summary().field_extensions, 0);
        assert_eq!(ext.summary().field_extensions, 1);
        let NodeKind::Expanded { edges, .. } = &ext.root.kind else { panic!() };
        assert_eq!(edges.len(), 5);
        assert!(ext.breaches.is_empty(), "{:?}", ext.breaches);
    }
}
