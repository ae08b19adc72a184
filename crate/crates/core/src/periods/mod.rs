//! Period lattices of the companion tori `-y^2 = (x-a)(x-abar)(x-b)(x-bbar)`
//! and their real structure.
//!
//! The two periods are contour integrals of `dx / y` around closed loops
//! that each enclose exactly two branch points: one around a conjugate pair
//! (crossing the real axis) and one around `a` and `b` (in the upper
//! half-plane). Loops around `{e1, e2}` and `{e2, e3}` meet once, so the two
//! periods form a basis of the lattice.

mod quadrature;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flat_systoles::{reduce, FlatError, FlatKleinBottle, Lattice2};
use crate::real_curves::{CompanionSelection, ComplexPoint, ConjugatePair, CurveError};

pub use quadrature::gauss_legendre;

/// Default tolerance for period computation.
pub const PERIOD_TOL: f64 = 1e-10;
/// Default tolerance for real-form classification.
pub const CLASSIFY_TOL: f64 = 1e-8;
/// Smallest admissible distance between two branch points.
pub const MIN_ROOT_SEPARATION: f64 = 1e-6;

const START_ORDER: usize = 8;
const MAX_ORDER: usize = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeriodError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("branch points are closer than {min_sep:e} (distance {distance:e})")]
    Conditioning { min_sep: f64, distance: f64 },
    #[error("tolerance {0:e} is below the supported minimum 1e-13")]
    Tolerance(f64),
    #[error("quadrature did not converge below {tol:e} by order {order} (residual {residual:e})")]
    Convergence { tol: f64, order: usize, residual: f64 },
    #[error("contour encloses an odd number of branch points")]
    Monodromy,
    #[error("lattice is not stable under complex conjugation within {tol:e}")]
    NotReal { tol: f64 },
    #[error("glide constant does not define a fixed-point-free involution")]
    InvalidGlide,
    #[error(transparent)]
    Lattice(#[from] FlatError),
}

/// The genus-1 curve cut out by two conjugate root pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCurve {
    pair1: ConjugatePair,
    pair2: ConjugatePair,
}

impl QuarticCurve {
    pub fn new(pair1: ConjugatePair, pair2: ConjugatePair) -> Result<Self, CurveError> {
        if pair1.root() == pair2.root() {
            return Err(CurveError::CoincidentRoots(pair1.label(), pair2.label()));
        }
        Ok(Self { pair1, pair2 })
    }

    pub fn from_companion(sel: &CompanionSelection) -> Result<Self, CurveError> {
        let (p, q) = sel.selected_pairs();
        Self::new(p, q)
    }

    pub fn pairs(&self) -> (ConjugatePair, ConjugatePair) {
        (self.pair1, self.pair2)
    }

    /// Multiply all roots by a real `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self, CurveError> {
        let sc = |p: ConjugatePair| {
            ConjugatePair::new(
                p.label(),
                ComplexPoint::new(p.root().re() * s, p.root().im() * s)?,
            )
        };
        Self::new(sc(self.pair1)?, sc(self.pair2)?)
    }

    fn roots(&self) -> [Complex64; 4] {
        let a: Complex64 = self.pair1.root().into();
        let b: Complex64 = self.pair2.root().into();
        [a, a.conj(), b, b.conj()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodLattice {
    pub omega1: ComplexPoint,
    pub omega2: ComplexPoint,
    /// Largest change of a period between the last two quadrature orders.
    pub residual: f64,
}

impl PeriodLattice {
    /// Build from two periods, orienting so that `Im(omega2 / omega1) > 0`.
    pub fn from_periods(omega1: Complex64, omega2: Complex64, residual: f64) -> Result<Self, PeriodError> {
        let ratio = omega2 / omega1;
        if !ratio.im.is_finite() || ratio.im.abs() < 1e-14 * ratio.norm() {
            return Err(PeriodError::Lattice(FlatError::Degenerate {
                det: (omega1.conj() * omega2).im,
            }));
        }
        let omega2 = if ratio.im < 0.0 { -omega2 } else { omega2 };
        Ok(Self {
            omega1: ComplexPoint::new(omega1.re, omega1.im)?,
            omega2: ComplexPoint::new(omega2.re, omega2.im)?,
            residual,
        })
    }

    pub fn lattice(&self) -> Lattice2 {
        Lattice2 {
            v1: self.omega1.into(),
            v2: self.omega2.into(),
        }
    }

    pub fn area(&self) -> f64 {
        self.lattice().area()
    }
}

fn dist_point_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Positively oriented rectangle around the segment `[p, q]` at distance `c`.
fn rectangle_around(p: Complex64, q: Complex64, c: f64) -> [Complex64; 4] {
    let u = (q - p) / (q - p).norm();
    let n = u * Complex64::i();
    let (pc, qc) = (p - u * c, q + u * c);
    [pc - n * c, qc - n * c, qc + n * c, pc + n * c]
}

struct Cycle {
    corners: [Complex64; 4],
    clearance: f64,
}

fn cycle_around(p: Complex64, q: Complex64, roots: &[Complex64; 4], min_sep: f64) -> (Cycle, f64) {
    let others = roots
        .iter()
        .filter(|r| **r != p && **r != q)
        .map(|r| dist_point_segment(*r, p, q))
        .fold(f64::INFINITY, f64::min);
    let c = 0.25 * min_sep.min(others);
    (
        Cycle {
            corners: rectangle_around(p, q, c),
            clearance: c,
        },
        others,
    )
}

fn integrate_cycle(cycle: &Cycle, roots: &[Complex64; 4], tol: f64) -> Result<(Complex64, f64), PeriodError> {
    let piece = 0.5 * cycle.clearance;
    let mut order = START_ORDER;
    let (x, w) = gauss_legendre(order);
    let mut prev = quadrature::integrate_closed(&cycle.corners, roots, piece, &x, &w);
    if (prev.y_end - prev.y_start).norm() > 1e-6 * prev.y_start.norm() {
        return Err(PeriodError::Monodromy);
    }
    loop {
        let next_order = 2 * order;
        let (x, w) = gauss_legendre(next_order);
        let cur = quadrature::integrate_closed(&cycle.corners, roots, piece, &x, &w);
        let residual = (cur.value - prev.value).norm();
        if residual < tol / 4.0 {
            return Ok((cur.value, residual));
        }
        if next_order >= MAX_ORDER {
            return Err(PeriodError::Convergence {
                tol,
                order: next_order,
                residual,
            });
        }
        order = next_order;
        prev = cur;
    }
}

/// Periods of `dx / y` on the companion torus.
pub fn period_lattice(curve: &QuarticCurve, tol: f64) -> Result<PeriodLattice, PeriodError> {
    if !(tol >= 1e-13) {
        return Err(PeriodError::Tolerance(tol));
    }
    let roots = curve.roots();
    let mut min_sep = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            min_sep = min_sep.min((roots[i] - roots[j]).norm());
        }
    }
    if min_sep < MIN_ROOT_SEPARATION {
        return Err(PeriodError::Conditioning {
            min_sep: MIN_ROOT_SEPARATION,
            distance: min_sep,
        });
    }
    let [a, abar, b, bbar] = roots;
    // Loops around {a, abar} and {b, bbar} are homologous up to sign; use
    // whichever segment keeps more room from the other pair.
    let (around_a, room_a) = cycle_around(abar, a, &roots, min_sep);
    let (around_b, room_b) = cycle_around(bbar, b, &roots, min_sep);
    let vertical = if room_a >= room_b { around_a } else { around_b };
    let (upper, _) = cycle_around(a, b, &roots, min_sep);
    let (w1, r1) = integrate_cycle(&vertical, &roots, tol)?;
    let (w2, r2) = integrate_cycle(&upper, &roots, tol)?;
    PeriodLattice::from_periods(w1, w2, r1.max(r2))
}

/// Shape of a lattice that is stable under complex conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RealLatticeForm {
    /// Basis `(width, 0), (0, height)`.
    Rectangular { width: f64, height: f64 },
    /// Basis `omega, conj(omega)` with `omega = modulus * e^{i angle}`,
    /// `0 < angle < pi/2`.
    Rhombic { modulus: f64, angle: f64 },
}

impl RealLatticeForm {
    /// Generators of the real and imaginary sublattices.
    pub fn axes(&self) -> (f64, f64) {
        match *self {
            RealLatticeForm::Rectangular { width, height } => (width, height),
            RealLatticeForm::Rhombic { modulus, angle } => {
                (2.0 * modulus * angle.cos(), 2.0 * modulus * angle.sin())
            }
        }
    }

    /// Area of the flat model.
    pub fn area(&self) -> f64 {
        match *self {
            RealLatticeForm::Rectangular { width, height } => width * height,
            RealLatticeForm::Rhombic { .. } => {
                let (r, s) = self.axes();
                0.5 * r * s
            }
        }
    }
}

fn near_integer(x: f64, tol: f64) -> bool {
    (x - x.round()).abs() <= tol
}

/// Coordinates of `p` in the basis `(v1, v2)`.
fn coords(l: &Lattice2, p: [f64; 2]) -> (f64, f64) {
    let det = l.v1[0] * l.v2[1] - l.v1[1] * l.v2[0];
    (
        (p[0] * l.v2[1] - p[1] * l.v2[0]) / det,
        (l.v1[0] * p[1] - l.v1[1] * p[0]) / det,
    )
}

fn in_lattice(l: &Lattice2, p: [f64; 2], tol: f64) -> bool {
    let (m, n) = coords(l, p);
    near_integer(m, tol) && near_integer(n, tol)
}

struct RealStructure {
    reduced: Lattice2,
    form: RealLatticeForm,
}

fn real_structure(lattice: &PeriodLattice, tol: f64) -> Result<RealStructure, PeriodError> {
    let reduced = reduce(&lattice.lattice())?;
    let scale = (reduced.v1[0].hypot(reduced.v1[1])).max(reduced.v2[0].hypot(reduced.v2[1]));
    for v in [reduced.v1, reduced.v2] {
        if !in_lattice(&reduced, [v[0], -v[1]], tol) {
            return Err(PeriodError::NotReal { tol });
        }
    }
    let mut real: Option<f64> = None;
    let mut imag: Option<f64> = None;
    for m in -4i64..=4 {
        for n in -4i64..=4 {
            if m == 0 && n == 0 {
                continue;
            }
            let v = reduced.vector(m, n);
            if v[1].abs() <= tol * scale && v[0] > 0.0 {
                real = Some(real.map_or(v[0], |r| r.min(v[0])));
            }
            if v[0].abs() <= tol * scale && v[1] > 0.0 {
                imag = Some(imag.map_or(v[1], |s| s.min(v[1])));
            }
        }
    }
    let (r, s) = match (real, imag) {
        (Some(r), Some(s)) => (r, s),
        _ => return Err(PeriodError::NotReal { tol }),
    };
    let det = reduced.area();
    let form = if (r * s - det).abs() <= tol * det * 10.0 {
        RealLatticeForm::Rectangular { width: r, height: s }
    } else if (r * s - 2.0 * det).abs() <= tol * det * 10.0 {
        RealLatticeForm::Rhombic {
            modulus: 0.5 * r.hypot(s),
            angle: s.atan2(r),
        }
    } else {
        return Err(PeriodError::NotReal { tol });
    };
    Ok(RealStructure { reduced, form })
}

/// Classify a conjugation-stable lattice as rectangular or rhombic.
pub fn real_form(lattice: &PeriodLattice, tol: f64) -> Result<RealLatticeForm, PeriodError> {
    real_structure(lattice, tol).map(|s| s.form)
}

/// Whether `z -> conj(z) + c` is a fixed-point-free involution of `C / L`.
///
/// Involution: `c + conj(c) = 2 Re c` must lie in `L`. Fixed points solve
/// `conj(z) + c - z = -2i Im z + c in L`, which has a solution iff some
/// lattice vector has real part `Re c`.
fn is_free_involution(st: &RealStructure, c: Complex64, tol: f64) -> bool {
    if !in_lattice(&st.reduced, [2.0 * c.re, 0.0], tol) {
        return false;
    }
    let (r, _) = st.form.axes();
    let real_step = match st.form {
        RealLatticeForm::Rectangular { .. } => r,
        RealLatticeForm::Rhombic { .. } => 0.5 * r,
    };
    !near_integer(c.re / real_step, tol)
}

/// Glide constants `c` (half-lattice representatives) for which
/// `z -> conj(z) + c` is a fixed-point-free involution.
pub fn classify_real_involutions(lattice: &PeriodLattice, tol: f64) -> Result<Vec<ComplexPoint>, PeriodError> {
    let st = real_structure(lattice, tol)?;
    let (v1, v2) = (
        Complex64::new(st.reduced.v1[0], st.reduced.v1[1]),
        Complex64::new(st.reduced.v2[0], st.reduced.v2[1]),
    );
    let mut out = Vec::new();
    for (i, j) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
        let c = (v1 * i + v2 * j) * 0.5;
        if is_free_involution(&st, c, tol) {
            out.push(ComplexPoint::new(c.re, c.im)?);
        }
    }
    Ok(out)
}

/// The flat Klein bottle `(C / L) / (z -> conj(z) + c)`.
pub fn klein_quotient(lattice: &PeriodLattice, c: &ComplexPoint, tol: f64) -> Result<FlatKleinBottle, PeriodError> {
    let st = real_structure(lattice, tol)?;
    if !is_free_involution(&st, (*c).into(), tol) {
        return Err(PeriodError::InvalidGlide);
    }
    match st.form {
        RealLatticeForm::Rectangular { width, height } => Ok(FlatKleinBottle::new(0.5 * width, height)?),
        RealLatticeForm::Rhombic { .. } => Err(PeriodError::InvalidGlide),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real_curves::Label;

    fn lattice(a: (f64, f64), b: (f64, f64)) -> PeriodLattice {
        PeriodLattice::from_periods(Complex64::new(a.0, a.1), Complex64::new(b.0, b.1), 0.0).unwrap()
    }

    fn quartic(a: (f64, f64), b: (f64, f64)) -> QuarticCurve {
        QuarticCurve::new(
            ConjugatePair::new(Label::A, ComplexPoint::new(a.0, a.1).unwrap()).unwrap(),
            ConjugatePair::new(Label::B, ComplexPoint::new(b.0, b.1).unwrap()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn coincident_pairs_rejected() {
        let p = ConjugatePair::new(Label::A, ComplexPoint::new(0.0, 1.0).unwrap()).unwrap();
        let q = ConjugatePair::new(Label::B, ComplexPoint::new(0.0, 1.0).unwrap()).unwrap();
        assert!(QuarticCurve::new(p, q).is_err());
    }

    #[test]
    fn conditioning_and_tolerance_errors() {
        let c = quartic((0.0, 1.0), (1e-7, 1.0));
        assert!(matches!(
            period_lattice(&c, 1e-10),
            Err(PeriodError::Conditioning { .. })
        ));
        let c = quartic((0.0, 1.0), (0.0, 2.0));
        assert!(matches!(
            period_lattice(&c, 1e-14),
            Err(PeriodError::Tolerance(_))
        ));
    }

    #[test]
    fn biquadratic_periods_are_rectangular() {
        let c = quartic((0.0, 1.0), (0.0, 2.0));
        let l = period_lattice(&c, 1e-10).unwrap();
        assert!(l.residual <= 1e-10);
        let f = real_form(&l, CLASSIFY_TOL).unwrap();
        assert!(matches!(f, RealLatticeForm::Rectangular { .. }));
    }

    #[test]
    fn real_form_examples() {
        let f = real_form(&lattice((2.0, 0.0), (0.0, 1.0)), 1e-8).unwrap();
        assert_eq!(
            f,
            RealLatticeForm::Rectangular {
                width: 2.0,
                height: 1.0
            }
        );
        let f = real_form(&lattice((1.0, 0.5), (1.0, -0.5)), 1e-8).unwrap();
        match f {
            RealLatticeForm::Rhombic { modulus, angle } => {
                assert!((modulus - 1.25f64.sqrt()).abs() < 1e-12);
                assert!((angle - 0.5f64.atan()).abs() < 1e-12);
            }
            other => panic!("expected rhombic, got {other:?}"),
        }
        assert!(matches!(
            real_form(&lattice((1.0, 0.0), (0.3, 1.0)), 1e-8),
            Err(PeriodError::NotReal { .. })
        ));
    }

    #[test]
    fn involutions_of_square_lattice() {
        let l = lattice((1.0, 0.0), (0.0, 1.0));
        let cs = classify_real_involutions(&l, 1e-8).unwrap();
        assert!(cs.iter().any(|c| c.re() == 0.5 && c.im() == 0.0));
        assert!(cs.iter().all(|c| (c.re() - 0.5).abs() < 1e-12));
    }

    #[test]
    fn rhombic_lattice_has_no_free_glide() {
        let l = lattice((1.0, 0.5), (1.0, -0.5));
        assert!(classify_real_involutions(&l, 1e-8).unwrap().is_empty());
    }

    #[test]
    fn quotient_of_rectangle() {
        let l = lattice((2.0, 0.0), (0.0, 1.0));
        let c = ComplexPoint::new(1.0, 0.0).unwrap();
        let k = klein_quotient(&l, &c, 1e-8).unwrap();
        assert_eq!((k.w(), k.h()), (1.0, 1.0));
        assert_eq!(2.0 * k.area(), real_form(&l, 1e-8).unwrap().area());
        // A full period is a reflection, which has fixed points.
        let full = ComplexPoint::new(2.0, 0.0).unwrap();
        assert_eq!(klein_quotient(&l, &full, 1e-8), Err(PeriodError::InvalidGlide));
        let not_involution = ComplexPoint::new(0.3, 0.0).unwrap();
        assert_eq!(
            klein_quotient(&l, &not_involution, 1e-8),
            Err(PeriodError::InvalidGlide)
        );
    }
}
