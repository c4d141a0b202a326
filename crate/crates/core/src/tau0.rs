//! The divisor-only case: the ideal is a product of boundary components with
//! multiplicities, and the combinatorial invariant Γ picks the center.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::situation::{rat, rat_string, Component, Rat, Tau0State};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Tau0Error {
    #[error("level must be positive")]
    ZeroLevel,
    #[error("component {id} has zero multiplicity")]
    ZeroMultiplicity { id: u32 },
    #[error("component id {id} appears twice")]
    DuplicateId { id: u32 },
    #[error("{count} components pass through the point; a normal crossing divisor in dimension 3 allows at most 3")]
    TooManyThroughPoint { count: usize },
    #[error("no set of components through the point reaches the level; the point is not in the singular locus")]
    NotSingular,
}

/// The invariant Γ: `(-size, sum / level, ids)` of the chosen set of
/// components. Larger is worse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gamma {
    /// Number of components in the chosen set; Γ1 is its negative.
    pub size: u32,
    /// Γ2: multiplicity sum of the chosen set over the level.
    pub ratio: Rat,
    /// Γ3: ids of the chosen set, ascending.
    pub ids: Vec<u32>,
}

impl Gamma {
    pub fn gamma1(&self) -> i64 {
        -(self.size as i64)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!([self.gamma1(), rat_string(&self.ratio), self.ids])
    }
}

impl Ord for Gamma {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gamma1()
            .cmp(&other.gamma1())
            .then(self.ratio.cmp(&other.ratio))
            .then_with(|| self.ids.cmp(&other.ids))
    }
}

impl PartialOrd for Gamma {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {:?})", self.gamma1(), self.ratio, self.ids)
    }
}

/// Checks the state: positive level and multiplicities, distinct ids, and
/// at most three components through the point.
pub fn validate(st: &Tau0State) -> Result<(), Tau0Error> {
    if st.level == 0 {
        return Err(Tau0Error::ZeroLevel);
    }
    let mut seen = std::collections::BTreeSet::new();
    for c in &st.components {
        if c.multiplicity == 0 {
            return Err(Tau0Error::ZeroMultiplicity { id: c.id });
        }
        if !seen.insert(c.id) {
            return Err(Tau0Error::DuplicateId { id: c.id });
        }
    }
    let count = st.components.iter().filter(|c| c.through_point).count();
    if count > 3 {
        return Err(Tau0Error::TooManyThroughPoint { count });
    }
    Ok(())
}

/// Γ of a state: the smallest number of components through the point whose
/// multiplicities reach the level; among those sets, the largest sum, then
/// the lexicographically largest ascending id tuple.
pub fn gamma(st: &Tau0State) -> Result<Gamma, Tau0Error> {
    let through: Vec<&Component> = st.components.iter().filter(|c| c.through_point).collect();
    let n = through.len();
    for size in 1..=n {
        let mut best: Option<(u32, Vec<u32>)> = None;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let chosen: Vec<&Component> = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| through[k]).collect();
            let sum: u32 = chosen.iter().map(|c| c.multiplicity).sum();
            if sum < st.level {
                continue;
            }
            let mut ids: Vec<u32> = chosen.iter().map(|c| c.id).collect();
            ids.sort_unstable();
            let cand = (sum, ids);
            if best.as_ref().is_none_or(|b| cand > *b) {
                best = Some(cand);
            }
        }
        if let Some((sum, ids)) = best {
            return Ok(Gamma { size: size as u32, ratio: rat(sum as i64, st.level as i64), ids });
        }
    }
    Err(Tau0Error::NotSingular)
}

/// Blow-up along the intersection of the Γ components. Returns one state
/// per kind of point on the exceptional divisor: each proper subset of the
/// Γ components still passes through it, together with the exceptional
/// divisor of multiplicity `sum - level` (dropped when zero).
pub fn tau0_step(st: &Tau0State) -> Result<Vec<Tau0State>, Tau0Error> {
    validate(st)?;
    let g = gamma(st)?;
    let sum: u32 = st.components.iter().filter(|c| g.ids.contains(&c.id)).map(|c| c.multiplicity).sum();
    let new_id = st.components.iter().map(|c| c.id).max().unwrap_or(0) + 1;
    let k = g.ids.len();
    let mut out = Vec::with_capacity((1 << k) - 1);
    for keep in 0u32..((1 << k) - 1) {
        let mut components: Vec<Component> = st
            .components
            .iter()
            .map(|c| match g.ids.iter().position(|&id| id == c.id) {
                Some(pos) => Component { through_point: keep >> pos & 1 == 1, ..*c },
                None => *c,
            })
            .collect();
        if sum > st.level {
            components.push(Component { id: new_id, multiplicity: sum - st.level, through_point: true });
        }
        out.push(Tau0State { level: st.level, components });
    }
    Ok(out)
}

/// Result of exploring every branch of the Γ loop.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tau0Run {
    /// Number of blow-ups performed over all branches.
    pub steps: usize,
    /// Branches ending with the point outside the singular locus.
    pub resolved: usize,
    pub max_depth: u32,
    /// Edges along which Γ failed to decrease, as (parent, child).
    pub breaches: Vec<(Gamma, Gamma)>,
    pub depth_capped: bool,
}

/// Runs the Γ loop along every branch up to `max_depth` blow-ups.
pub fn gamma_loop(st: &Tau0State, max_depth: u32) -> Result<Tau0Run, Tau0Error> {
    validate(st)?;
    let mut run = Tau0Run::default();
    explore(st, 0, max_depth, &mut run)?;
    Ok(run)
}

fn explore(st: &Tau0State, depth: u32, cap: u32, run: &mut Tau0Run) -> Result<(), Tau0Error> {
    run.max_depth = run.max_depth.max(depth);
    let g = match gamma(st) {
        Ok(g) => g,
        Err(Tau0Error::NotSingular) => {
            run.resolved += 1;
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    if depth >= cap {
        run.depth_capped = true;
        return Ok(());
    }
    run.steps += 1;
    for child in tau0_step(st)? {
        if let Ok(cg) = gamma(&child) {
            if cg >= g {
                run.breaches.push((g.clone(), cg));
            }
        }
        explore(&child, depth + 1, cap, run)?;
    }
    Ok(())
}
