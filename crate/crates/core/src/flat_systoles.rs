//! Systoles of flat tori and flat Klein bottles.
//!
//! A flat torus is `R^2 / L` for a rank-2 lattice `L`; its systole is the
//! length of the shortest nonzero lattice vector, found by two-dimensional
//! (Lagrange-Gauss) basis reduction.
//!
//! A flat Klein bottle is parameterized by `(w, h)`: the quotient of the
//! plane by the group generated by the glide `(x, y) -> (x + w, -y)` and the
//! translation `(x, y) -> (x, y + h)`. Its orientable double cover is the
//! rectangular torus with lattice `<(2w, 0), (0, h)>`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Strictness margin used by [`bound_check`].
pub const BOUND_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlatError {
    #[error("lattice basis is degenerate or ill-conditioned (|det| = {det:e})")]
    Degenerate { det: f64 },
    #[error("non-finite lattice coordinate")]
    NonFinite,
    #[error("Klein bottle parameters must be positive and finite (w = {w}, h = {h})")]
    InvalidBottle { w: f64, h: f64 },
    #[error("systolic ratio needs positive inputs (sys = {sys}, area = {area})")]
    NonPositive { sys: f64, area: f64 },
    #[error("the identity class has no sidedness")]
    IdentityClass,
}

pub type Vec2 = [f64; 2];

fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm2(a: Vec2) -> f64 {
    dot(a, a)
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// A basis of a rank-2 lattice in the Euclidean plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice2 {
    pub v1: Vec2,
    pub v2: Vec2,
}

/// Integer change of basis: row `i` holds the coefficients of the new
/// `v_i` with respect to the old basis.
pub type Unimodular = [[i64; 2]; 2];

impl Lattice2 {
    pub fn new(v1: Vec2, v2: Vec2) -> Result<Self, FlatError> {
        let l = Self { v1, v2 };
        l.check()?;
        Ok(l)
    }

    fn check(&self) -> Result<(), FlatError> {
        if !self.v1.iter().chain(self.v2.iter()).all(|c| c.is_finite()) {
            return Err(FlatError::NonFinite);
        }
        let det = cross(self.v1, self.v2);
        let scale = norm2(self.v1).sqrt() * norm2(self.v2).sqrt();
        if !(det.abs() >= 1e-14 * scale) || det == 0.0 {
            return Err(FlatError::Degenerate { det });
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        cross(self.v1, self.v2).abs()
    }

    pub fn scaled(&self, s: f64) -> Lattice2 {
        Lattice2 {
            v1: [self.v1[0] * s, self.v1[1] * s],
            v2: [self.v2[0] * s, self.v2[1] * s],
        }
    }

    /// The vector `m * v1 + n * v2`.
    pub fn vector(&self, m: i64, n: i64) -> Vec2 {
        let (m, n) = (m as f64, n as f64);
        [
            m * self.v1[0] + n * self.v2[0],
            m * self.v1[1] + n * self.v2[1],
        ]
    }
}

/// Reduced basis: `|v1| <= |v2| <= |v2 +- v1|`.
pub fn reduce(lattice: &Lattice2) -> Result<Lattice2, FlatError> {
    reduce_with_transform(lattice).map(|(l, _)| l)
}

/// As [`reduce`], also returning the unimodular matrix that maps the input
/// basis to the reduced one.
pub fn reduce_with_transform(lattice: &Lattice2) -> Result<(Lattice2, Unimodular), FlatError> {
    lattice.check()?;
    let (mut a, mut b) = (lattice.v1, lattice.v2);
    let mut ta = [1i64, 0];
    let mut tb = [0i64, 1];
    if norm2(b) < norm2(a) {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut ta, &mut tb);
    }
    loop {
        let na = norm2(a);
        let d = dot(a, b);
        if 2.0 * d.abs() <= na {
            break;
        }
        let mu = (d / na).round();
        b = [b[0] - mu * a[0], b[1] - mu * a[1]];
        let mu = mu as i64;
        tb = [tb[0] - mu * ta[0], tb[1] - mu * ta[1]];
        if norm2(b) < na {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut ta, &mut tb);
        }
    }
    Ok((Lattice2 { v1: a, v2: b }, [ta, tb]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    OneSided,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystoleSource {
    CoverSystole,
    Displacement,
}

/// A free homotopy class on a flat torus or Klein bottle, named by the deck
/// transformation realizing it.
///
/// On a Klein bottle `(w, h)` the element `(m, n, glide)` acts by
/// `(x, y) -> (x + (2m + glide) w, (-1)^glide y + n h)`. On a torus `glide`
/// is always 0 and `(m, n)` are lattice coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassDescriptor {
    pub m: i64,
    pub n: i64,
    pub glide: u8,
}

impl ClassDescriptor {
    pub fn new(m: i64, n: i64, glide: u8) -> Self {
        Self {
            m,
            n,
            glide: glide & 1,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.m == 0 && self.n == 0 && self.glide == 0
    }

    /// `self` after `other`, as Klein bottle deck transformations.
    pub fn compose(&self, other: &ClassDescriptor) -> ClassDescriptor {
        // x-shift in units of w, then split into double glides and parity.
        let k = (2 * self.m + self.glide as i64) + (2 * other.m + other.glide as i64);
        let sign = if self.glide == 1 { -1 } else { 1 };
        let n = sign * other.n + self.n;
        ClassDescriptor::new(k.div_euclid(2), n, k.rem_euclid(2) as u8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystoleReport {
    pub value: f64,
    pub realizer: ClassDescriptor,
    pub sided: Sidedness,
    pub source: SystoleSource,
}

pub fn torus_systole(lattice: &Lattice2) -> Result<SystoleReport, FlatError> {
    let (_, t) = reduce_with_transform(lattice)?;
    // Re-evaluated in the input basis so the value matches direct enumeration.
    Ok(SystoleReport {
        value: norm2(lattice.vector(t[0][0], t[0][1])).sqrt(),
        realizer: ClassDescriptor::new(t[0][0], t[0][1], 0),
        sided: Sidedness::TwoSided,
        source: SystoleSource::CoverSystole,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatKleinBottle {
    w: f64,
    h: f64,
}

impl FlatKleinBottle {
    pub fn new(w: f64, h: f64) -> Result<Self, FlatError> {
        if w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0 {
            Ok(Self { w, h })
        } else {
            Err(FlatError::InvalidBottle { w, h })
        }
    }

    /// Length of the glide translation.
    pub fn w(&self) -> f64 {
        self.w
    }

    /// Vertical period.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Lattice of the orientable double cover, `<(2w, 0), (0, h)>`.
    pub fn cover(&self) -> Lattice2 {
        Lattice2 {
            v1: [2.0 * self.w, 0.0],
            v2: [0.0, self.h],
        }
    }

    pub fn scaled(&self, s: f64) -> Result<Self, FlatError> {
        Self::new(self.w * s, self.h * s)
    }

    /// Apply a deck transformation to a point of the plane.
    pub fn act(&self, class: &ClassDescriptor, p: Vec2) -> Vec2 {
        let shift = (2 * class.m + class.glide as i64) as f64 * self.w;
        let y = if class.glide == 1 { -p[1] } else { p[1] };
        [p[0] + shift, y + class.n as f64 * self.h]
    }
}

/// Least displacement `min_x dist(x, tau x)` of the glide on the double
/// cover.
///
/// The orientation-reversing deck transformations are
/// `(x, y) -> (x + (2m+1) w, -y + n h)`; the displacement of such a map at
/// `(x, y)` is `sqrt(((2m+1) w)^2 + (n h - 2y)^2)`. Choosing `y = n h / 2`
/// kills the second term, leaving `min_m |2m+1| w = w`.
pub fn displacement(bottle: &FlatKleinBottle) -> f64 {
    bottle.w
}

pub fn klein_systole(bottle: &FlatKleinBottle) -> SystoleReport {
    let cover = torus_systole(&bottle.cover()).expect("rectangular lattice is well-conditioned");
    let disp = displacement(bottle);
    if disp < cover.value {
        SystoleReport {
            value: disp,
            realizer: ClassDescriptor::new(0, 0, 1),
            sided: Sidedness::OneSided,
            source: SystoleSource::Displacement,
        }
    } else {
        // Cover coefficients: v1 = (2w, 0) is the glide squared.
        SystoleReport {
            value: cover.value,
            realizer: ClassDescriptor::new(cover.realizer.m, cover.realizer.n, 0),
            sided: Sidedness::TwoSided,
            source: SystoleSource::CoverSystole,
        }
    }
}

/// One-sided iff the class reverses orientation.
pub fn sidedness(class: &ClassDescriptor) -> Result<Sidedness, FlatError> {
    if class.is_identity() {
        return Err(FlatError::IdentityClass);
    }
    Ok(if class.glide == 1 {
        Sidedness::OneSided
    } else {
        Sidedness::TwoSided
    })
}

pub fn systolic_ratio(sys: f64, area: f64) -> Result<f64, FlatError> {
    if !(sys > 0.0 && area > 0.0 && sys.is_finite() && area.is_finite()) {
        return Err(FlatError::NonPositive { sys, area });
    }
    Ok(sys * sys / area)
}

/// Upper bounds on `sys^2 / area`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `2 / sqrt(3)`, tori (and conjecturally every aspherical surface).
    Loewner,
    /// `pi / sqrt(8)`, Klein bottles.
    Bavard,
    /// `4 / 3`, every aspherical surface.
    Gromov,
    /// `1.333`, the Klein surface `3RP^2`.
    Surface3Rp2,
}

impl Bound {
    pub const ALL: [Bound; 4] = [Bound::Loewner, Bound::Bavard, Bound::Gromov, Bound::Surface3Rp2];

    pub fn value(&self) -> f64 {
        match self {
            Bound::Loewner => 2.0 / 3f64.sqrt(),
            Bound::Bavard => std::f64::consts::PI / 8f64.sqrt(),
            Bound::Gromov => 4.0 / 3.0,
            Bound::Surface3Rp2 => 1.333,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Bound::Loewner => "loewner",
            Bound::Bavard => "bavard",
            Bound::Gromov => "gromov",
            Bound::Surface3Rp2 => "surface_3rp2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVerdict {
    Satisfied,
    /// Equal to the bound up to [`BOUND_MARGIN`].
    WithinMargin,
    Violated,
}

impl BoundVerdict {
    pub fn holds(&self) -> bool {
        !matches!(self, BoundVerdict::Violated)
    }
}

pub fn bound_check(ratio: f64, bound: Bound) -> BoundVerdict {
    let c = bound.value();
    if ratio < c - BOUND_MARGIN {
        BoundVerdict::Satisfied
    } else if ratio > c + BOUND_MARGIN {
        BoundVerdict::Violated
    } else {
        BoundVerdict::WithinMargin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NamedConstants {
    /// `sqrt(2 / sqrt 3)`
    pub loewner: f64,
    /// `sqrt(pi / sqrt 8)`
    pub bavard: f64,
    pub gromov_ratio: f64,
    /// `arccosh((5 + sqrt 17) / 2)`
    pub parlier_sys: f64,
}

impl NamedConstants {
    pub fn get() -> Self {
        Self {
            loewner: Bound::Loewner.value().sqrt(),
            bavard: Bound::Bavard.value().sqrt(),
            gromov_ratio: Bound::Gromov.value(),
            parlier_sys: ((5.0 + 17f64.sqrt()) / 2.0).acosh(),
        }
    }
}

/// Systole and systolic ratio of Parlier's hyperbolic `3RP^2`, whose area is
/// `2 pi |chi| = 2 pi`.
pub fn parlier_constant() -> (f64, f64) {
    let sys = NamedConstants::get().parlier_sys;
    (sys, sys * sys / (2.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_shortest(l: &Lattice2, range: i64) -> f64 {
        let mut best = f64::INFINITY;
        for m in -range..=range {
            for n in -range..=range {
                if m == 0 && n == 0 {
                    continue;
                }
                best = best.min(norm2(l.vector(m, n)));
            }
        }
        best.sqrt()
    }

    #[test]
    fn reduce_examples() {
        let sq = Lattice2::new([1.0, 0.0], [0.0, 1.0]).unwrap();
        assert_eq!(reduce(&sq).unwrap(), sq);
        let sheared = Lattice2::new([1.0, 0.0], [5.0, 1.0]).unwrap();
        assert_eq!(reduce(&sheared).unwrap(), sq);
        assert_eq!(brute_shortest(&sheared, 10), 1.0);
    }

    #[test]
    fn reduce_hexagonal_terminates() {
        let hex = Lattice2::new([1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]).unwrap();
        let r = reduce(&hex).unwrap();
        // |v2|^2 rounds to just below 1, so the basis may be swapped.
        assert!((norm2(r.v1) - 1.0).abs() < 1e-15 && (norm2(r.v2) - 1.0).abs() < 1e-15);
        assert!((r.area() - hex.area()).abs() < 1e-15);
        assert_eq!(reduce(&r).unwrap(), r);
    }

    #[test]
    fn degenerate_basis() {
        assert!(matches!(
            Lattice2::new([1.0, 0.0], [2.0, 0.0]),
            Err(FlatError::Degenerate { .. })
        ));
        assert!(Lattice2::new([1.0, 0.0], [1.0, 1e-16]).is_err());
    }

    #[test]
    fn torus_examples() {
        let sq = Lattice2::new([1.0, 0.0], [0.0, 1.0]).unwrap();
        let r = torus_systole(&sq).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(systolic_ratio(r.value, sq.area()).unwrap(), 1.0);
        let rect = Lattice2::new([3.0, 0.0], [0.0, 2.0]).unwrap();
        let r = torus_systole(&rect).unwrap();
        assert_eq!(r.value, brute_shortest(&rect, 10));
        assert_eq!(r.value, 2.0);
        assert_eq!(r.realizer, ClassDescriptor::new(0, 1, 0));
    }

    #[test]
    fn klein_examples() {
        let k = FlatKleinBottle::new(1.0, 3.0).unwrap();
        let r = klein_systole(&k);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.source, SystoleSource::Displacement);
        assert_eq!(r.sided, Sidedness::OneSided);

        let k = FlatKleinBottle::new(2.0, 1.0).unwrap();
        let r = klein_systole(&k);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.source, SystoleSource::CoverSystole);
        assert_eq!(r.sided, Sidedness::TwoSided);
        assert_eq!(r.realizer, ClassDescriptor::new(0, 1, 0));
    }

    #[test]
    fn bottle_validation() {
        assert!(FlatKleinBottle::new(0.0, 1.0).is_err());
        assert!(FlatKleinBottle::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn sidedness_examples() {
        assert_eq!(
            sidedness(&ClassDescriptor::new(0, 0, 1)).unwrap(),
            Sidedness::OneSided
        );
        assert_eq!(
            sidedness(&ClassDescriptor::new(0, 1, 0)).unwrap(),
            Sidedness::TwoSided
        );
        let g = ClassDescriptor::new(0, 0, 1);
        let g2 = g.compose(&g);
        assert_eq!(g2, ClassDescriptor::new(1, 0, 0));
        assert_eq!(sidedness(&g2).unwrap(), Sidedness::TwoSided);
        assert_eq!(
            sidedness(&ClassDescriptor::new(0, 0, 0)),
            Err(FlatError::IdentityClass)
        );
    }

    #[test]
    fn compose_matches_action() {
        let k = FlatKleinBottle::new(0.7, 1.9).unwrap();
        let p = [0.3, 0.45];
        for a in [
            ClassDescriptor::new(1, -2, 1),
            ClassDescriptor::new(0, 3, 0),
            ClassDescriptor::new(-1, 1, 1),
        ] {
            for b in [ClassDescriptor::new(2, 1, 1), ClassDescriptor::new(0, -1, 0)] {
                let lhs = k.act(&a.compose(&b), p);
                let rhs = k.act(&a, k.act(&b, p));
                assert!((lhs[0] - rhs[0]).abs() < 1e-12 && (lhs[1] - rhs[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ratio_errors() {
        assert!(systolic_ratio(0.0, 1.0).is_err());
        assert!(systolic_ratio(1.0, -1.0).is_err());
    }

    #[test]
    fn bound_checks() {
        assert_eq!(bound_check(1.34, Bound::Surface3Rp2), BoundVerdict::Violated);
        assert_eq!(
            bound_check(2.0 / 3f64.sqrt(), Bound::Loewner),
            BoundVerdict::WithinMargin
        );
        assert_eq!(bound_check(1.0, Bound::Bavard), BoundVerdict::Satisfied);
    }

    #[test]
    fn constants() {
        let c = NamedConstants::get();
        assert!(c.bavard < c.loewner);
        assert!(c.loewner < (4.0f64 / 3.0).sqrt());
        let (sys, ratio) = parlier_constant();
        assert!((2.19..=2.20).contains(&sys));
        assert!((0.76..=0.77).contains(&ratio));
    }
}
