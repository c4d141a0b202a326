//! Random states for property tests and the acceptance suite.
//!
//! Generated Weierstrass coefficients are stable under every z-shift: `a_i`
//! for `i < q` is divisible by the ceiling of `M_u^{q - p^v}` with
//! `v = v_p(q - i)`, which is at least `M_u^i` and survives the binomial
//! expansion of `z = z' - w` for arbitrary `w` of order at least 2.

use rand::Rng;

use crate::field::{Fe, Field};
use crate::poly::BiPoly;
use crate::situation::{ceil_div, Component, Divisor, Situation, Tau0State, Tau2State};

/// Ranges for random τ=1 states.
#[derive(Debug, Clone, Copy)]
pub struct SituationParams {
    pub e: u32,
    pub max_exponent: u32,
    pub max_level: u32,
    /// Total degree bound for coefficient terms.
    pub max_degree: u32,
    /// Probability that an admissible monomial gets a nonzero coefficient.
    pub density: f64,
}

impl Default for SituationParams {
    fn default() -> Self {
        SituationParams { e: 1, max_exponent: 6, max_level: 6, max_degree: 6, density: 0.3 }
    }
}

fn nonzero(rng: &mut impl Rng, f: &Field) -> Fe {
    f.element(rng.gen_range(1..f.order())).expect("code below the field order")
}

/// Random polynomial with terms `x^u y^v`, `min_deg <= u + v <= max_deg`,
/// `u >= min_x`, `v >= min_y`.
pub fn random_poly(rng: &mut impl Rng, f: &Field, min_deg: u32, max_deg: u32, (min_x, min_y): (u32, u32), density: f64) -> BiPoly {
    let mut terms = Vec::new();
    for d in min_deg..=max_deg {
        for u in min_x..=d {
            let v = d - u;
            if v >= min_y && rng.gen_bool(density) {
                terms.push(([u, v], nonzero(rng, f)));
            }
        }
    }
    BiPoly::from_terms(f, terms)
}

/// Exponent `k` such that the generated `a_i` is divisible by `M_u^k`.
pub fn stable_power(p: u32, q: u32, i: u32) -> u32 {
    if i >= q {
        return 0;
    }
    let mut v = 1;
    while (q - i).is_multiple_of(v * p) {
        v *= p;
    }
    q - v
}

/// A random valid state over `f` whose divisors are present exactly when
/// their exponents are positive (ages 1 and 2).
pub fn random_situation(rng: &mut impl Rng, f: &Field, params: &SituationParams) -> Situation {
    let q = f.char_pow(params.e);
    let alpha = rng.gen_range(0..=params.max_exponent);
    let beta = rng.gen_range(0..=params.max_exponent);
    let level = rng.gen_range(1..=params.max_level);
    let coeffs = (1..=q)
        .map(|i| {
            let k = stable_power(f.p(), q, i) as u64;
            let min = (ceil_div(alpha as u64 * k, level as u64) as u32, ceil_div(beta as u64 * k, level as u64) as u32);
            random_poly(rng, f, i + 1, params.max_degree.max(i + 1), min, params.density)
        })
        .collect();
    let divisors = [(alpha > 0).then_some(Divisor { age: 1 }), (beta > 0).then_some(Divisor { age: 2 })];
    Situation::new(f, params.e, coeffs, (alpha, beta, level), divisors)
}

/// A random p^e-th power of order at least `q`: the `q`-th power of a
/// random polynomial of order at least one.
pub fn random_pe_power(rng: &mut impl Rng, f: &Field, e: u32, max_deg: u32) -> BiPoly {
    let q = f.char_pow(e);
    loop {
        let g = random_poly(rng, f, 1, max_deg, (0, 0), 0.5);
        if !g.is_zero() {
            return g.pow(q);
        }
    }
}

/// A random divisor-only state with up to `max_components` components, at
/// most three of them through the point.
pub fn random_tau0(rng: &mut impl Rng, max_components: usize, max_mult: u32, max_level: u32) -> Tau0State {
    let n = rng.gen_range(1..=max_components);
    let mut through: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.7)).collect();
    let mut count = 0;
    for t in through.iter_mut() {
        if *t {
            count += 1;
            *t = count <= 3;
        }
    }
    Tau0State {
        level: rng.gen_range(1..=max_level),
        components: (0..n)
            .map(|k| Component { id: k as u32 + 1, multiplicity: rng.gen_range(1..=max_mult), through_point: through[k] })
            .collect(),
    }
}

/// A random two-element state. With `deep` set, every coefficient has
/// x-order beyond what the full countdown can consume, so the chain can
/// only end by the monomial; otherwise coefficients are merely valid.
pub fn random_tau2(rng: &mut impl Rng, f: &Field, e1: u32, e2: u32, max_alpha: u32, max_level: u32, deep: bool) -> Tau2State {
    let alpha = rng.gen_range(0..=max_alpha);
    let level = rng.gen_range(1..=max_level);
    let steps = alpha / level;
    let (q1, q2) = (f.char_pow(e1), f.char_pow(e2));
    let h1 = (1..=q1)
        .map(|i| {
            let min_x = if deep { i * (steps + 2) + 1 } else { 0 };
            let lo = (i + 1).max(min_x);
            random_poly(rng, f, lo, lo + 3, (min_x, 0), 0.3)
        })
        .collect();
    let h2 = (1..=q2)
        .map(|j| {
            let lo = if deep { j * (steps + 2) + 1 } else { j + 1 };
            let mut terms = Vec::new();
            for d in lo..=lo + 3 {
                if rng.gen_bool(0.4) {
                    terms.push(([d, 0], nonzero(rng, f)));
                }
            }
            BiPoly::from_terms(f, terms)
        })
        .collect();
    Tau2State { field: f.clone(), e1, e2, h1, h2, alpha, level, step_count: 0 }
}
