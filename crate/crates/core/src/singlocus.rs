//! Local shape of the support near the point, and a brute-force oracle that
//! enumerates rational points of the support over a finite box field.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cleaning::{invariant_h, CleanError};
use crate::field::{Fe, Field, FieldError};
use crate::poly::TriPoly;
use crate::situation::{rat, Axis, Loc, Situation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SupportError {
    #[error("the point is not in the support")]
    NotInSupport,
    #[error(transparent)]
    Clean(#[from] CleanError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Shape of the support germ at the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SupportShape {
    /// Both curves `V(z, x)` and `V(z, y)`.
    BothCurves,
    /// The curve `V(z, x)` only.
    CurveX,
    /// The curve `V(z, y)` only.
    CurveY,
    PointOnly,
}

impl SupportShape {
    pub fn name(self) -> &'static str {
        match self {
            SupportShape::BothCurves => "both_curves",
            SupportShape::CurveX => "curve_x",
            SupportShape::CurveY => "curve_y",
            SupportShape::PointOnly => "point_only",
        }
    }

    /// Whether the curve `V(z, axis)` lies in the support.
    pub fn contains_curve(self, axis: Axis) -> bool {
        matches!(
            (self, axis),
            (SupportShape::BothCurves, _) | (SupportShape::CurveX, Axis::X) | (SupportShape::CurveY, Axis::Y)
        )
    }

    pub fn germ(self) -> Germ {
        Germ { point: true, curve_x: self.contains_curve(Axis::X), curve_y: self.contains_curve(Axis::Y) }
    }
}

/// Support shape of a cleaned state whose point lies in the support. An
/// absent divisor contributes H = 0.
pub fn support_shape(s: &Situation) -> Result<SupportShape, SupportError> {
    if !s.in_support() {
        return Err(SupportError::NotInSupport);
    }
    let one = rat(1, 1);
    let hx = invariant_h(s, Loc::Generic(Axis::X))? >= one && s.has_divisor(Axis::X);
    let hy = invariant_h(s, Loc::Generic(Axis::Y))? >= one && s.has_divisor(Axis::Y);
    Ok(match (hx, hy) {
        (true, true) => SupportShape::BothCurves,
        (true, false) => SupportShape::CurveX,
        (false, true) => SupportShape::CurveY,
        (false, false) => SupportShape::PointOnly,
    })
}

/// The field in which the oracle enumerates points for a box of degree `n`:
/// the smallest extension of the coefficient field with more than `n`
/// elements.
pub fn box_field(base: &Field, n: u32) -> Result<Field, FieldError> {
    let mut k = 1;
    while (base.order() as u64).pow(k) <= n as u64 {
        k += 1;
    }
    if k == 1 {
        Ok(base.clone())
    } else {
        base.extension(k)
    }
}

/// A point `(x0, y0, z0)` of the box field, by element codes.
pub type Point3 = (u32, u32, u32);

/// Points found by the oracle, over the box field.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub field: Field,
    pub points: BTreeSet<Point3>,
}

/// Enumerates the rational points `Q` of the box field at which the
/// support conditions hold: `ord_Q(D_z^n h) >= q - n` for `0 <= n < q`,
/// with `D_z^n` the Hasse derivatives, and `ord_Q(x^alpha y^beta) >= a`.
pub fn support_oracle(s: &Situation, n: u32) -> Result<OracleResult, SupportError> {
    let big = box_field(&s.field, n)?;
    let emb = s.field.embedding_into(&big)?;
    let h = s.h().map_coeffs(&big, |c| emb.apply(c));
    let q = s.q();
    let derivs: Vec<TriPoly> = (0..q).map(|k| h.hasse(2, k)).collect();
    let mut points = BTreeSet::new();
    for x0 in big.elements() {
        for y0 in big.elements() {
            let mono = if x0.is_zero() { s.alpha } else { 0 } + if y0.is_zero() { s.beta } else { 0 };
            if mono < s.level {
                continue;
            }
            for z0 in big.elements() {
                if !h.eval(&[x0, y0, z0]).is_zero() {
                    continue;
                }
                let shift = [x0, y0, z0];
                let ok = derivs.iter().enumerate().all(|(k, d)| d.translate(&shift).ord().at_least(q - k as u32));
                if ok {
                    points.insert((x0.code(), y0.code(), z0.code()));
                }
            }
        }
    }
    Ok(OracleResult { field: big, points })
}

/// Which local pieces the oracle certifies: the point itself, and each
/// curve `V(z, axis)` when every box point on it passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Germ {
    pub point: bool,
    pub curve_x: bool,
    pub curve_y: bool,
}

impl OracleResult {
    /// Whether every box point of `V(z, axis)` is in the result.
    pub fn contains_curve(&self, axis: Axis) -> bool {
        self.field.elements().all(|t| {
            let p = match axis {
                Axis::X => (0, t.code(), 0),
                Axis::Y => (t.code(), 0, 0),
            };
            self.points.contains(&p)
        })
    }

    pub fn germ(&self) -> Germ {
        Germ {
            point: self.points.contains(&(0, 0, 0)),
            curve_x: self.contains_curve(Axis::X),
            curve_y: self.contains_curve(Axis::Y),
        }
    }

    /// The rational points of the predicted shape inside the box.
    pub fn predicted_points(&self, shape: SupportShape) -> BTreeSet<Point3> {
        let mut out = BTreeSet::from([(0, 0, 0)]);
        for t in self.field.elements().map(Fe::code) {
            if shape.contains_curve(Axis::X) {
                out.insert((0, t, 0));
            }
            if shape.contains_curve(Axis::Y) {
                out.insert((t, 0, 0));
            }
        }
        out
    }

    /// Whether the result matches `shape` on the branches through the
    /// origin: every predicted point is present and no other coordinate
    /// curve is fully present. Points on components away from the origin
    /// are ignored.
    pub fn agrees_with(&self, shape: SupportShape) -> bool {
        self.predicted_points(shape).is_subset(&self.points) && self.germ() == shape.germ()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cleaning::clean;
    use crate::poly::BiPoly;

    fn sit(top: &[([u32; 2], i64)], m: (u32, u32, u32)) -> Situation {
        let f = Field::prime(2).unwrap();
        clean(&Situation::with_top(&f, 1, BiPoly::from_int_terms(&f, top), m)).unwrap().situation
    }

    #[test]
    fn shapes() {
        // h_x = 3/2, h_y = 1
        assert_eq!(support_shape(&sit(&[([3, 2], 1)], (4, 4, 2))), Ok(SupportShape::BothCurves));
        assert_eq!(support_shape(&sit(&[([1, 3], 1)], (2, 0, 2))), Ok(SupportShape::PointOnly));
        // h_x = 2, h_y = 1/2
        assert_eq!(support_shape(&sit(&[([4, 1], 1)], (4, 2, 2))), Ok(SupportShape::CurveX));
        assert_eq!(support_shape(&sit(&[], (1, 0, 2))), Err(SupportError::NotInSupport));
    }

    #[test]
    fn oracle_curve_x() {
        let s = sit(&[([4, 1], 1)], (4, 2, 2));
        let r = support_oracle(&s, 1).unwrap();
        assert_eq!(r.field.order(), 2);
        assert_eq!(r.points, BTreeSet::from([(0, 0, 0), (0, 1, 0)]));
    }

    #[test]
    fn oracle_point_only() {
        let s = sit(&[([1, 3], 1)], (2, 0, 2));
        let r = support_oracle(&s, 1).unwrap();
        assert_eq!(r.points, BTreeSet::from([(0, 0, 0)]));
    }

    #[test]
    fn oracle_empty() {
        let s = sit(&[], (1, 0, 2));
        assert!(support_oracle(&s, 5).unwrap().points.is_empty());
    }

    #[test]
    fn points_away_from_origin_are_ignored() {
        // a_2 = x^3 y (1 + x) also vanishes to order 2 along y = 0 at x = 1
        let f = Field::prime(2).unwrap();
        let top = BiPoly::from_int_terms(&f, &[([3, 1], 1), ([4, 1], 1)]);
        let mut s = Situation::with_top(&f, 1, top, (0, 5, 1));
        s = clean(&s).unwrap().situation;
        let shape = support_shape(&s).unwrap();
        assert_eq!(shape, SupportShape::PointOnly);
        let r = support_oracle(&s, 5).unwrap();
        assert!(r.points.contains(&(1, 0, 0)));
        assert!(r.agrees_with(shape));
        assert!(!r.agrees_with(SupportShape::CurveY));
    }

    #[test]
    fn box_fields() {
        let f2 = Field::prime(2).unwrap();
        assert_eq!(box_field(&f2, 5).unwrap().order(), 8);
        assert_eq!(box_field(&Field::prime(3).unwrap(), 5).unwrap().order(), 9);
        assert_eq!(box_field(&f2, 1).unwrap().order(), 2);
    }
}
