//! Real hyperelliptic genus-2 curves `-y^2 = prod (x - r)(x - conj r)` with
//! three conjugate root pairs, their companion tori, and the planar loop
//! predicates used in the loop-shortening arguments.
//!
//! Loops are closed polygons in the affine chart `C`. All predicates refuse
//! to answer (with [`CurveError::DegeneratePosition`]) when a query point is
//! closer than `1e-12 * diameter` to the loop, instead of guessing.

mod arrangement;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use arrangement::fat_graph_boundary;

/// Relative distance below which a point is considered to lie on a loop.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("root {label} must lie in the open upper half-plane (im = {im})")]
    NotUpperHalfPlane { label: Label, im: f64 },
    #[error("roots {0} and {1} coincide")]
    CoincidentRoots(Label, Label),
    #[error("branch count must be even and at least 2, got {0}")]
    InvalidBranchCount(u64),
    #[error("a loop needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("consecutive loop vertices {0} and {1} coincide")]
    RepeatedVertex(usize, usize),
    #[error("point ({re}, {im}) lies on the loop within tolerance")]
    DegeneratePosition { re: f64, im: f64 },
    #[error("loop vertex {index} lies on the real axis within tolerance")]
    VertexOnEquator { index: usize },
    #[error("loop is not simple")]
    NotSimple,
    #[error("partitions do not cover the same root set")]
    MismatchedRoots,
    #[error("companion selection needs two distinct labels")]
    InvalidSelection,
    #[error("segment arrangement stayed degenerate after {attempts} perturbations")]
    ArrangementDegenerate { attempts: usize },
}

/// A finite point of the affine chart.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct ComplexPoint {
    re: f64,
    im: f64,
}

impl ComplexPoint {
    pub fn new(re: f64, im: f64) -> Result<Self, CurveError> {
        if re.is_finite() && im.is_finite() {
            Ok(Self { re, im })
        } else {
            Err(CurveError::NonFinite)
        }
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn dist(&self, other: &ComplexPoint) -> f64 {
        (self.re - other.re).hypot(self.im - other.im)
    }

    pub(crate) fn sub(&self, o: &ComplexPoint) -> (f64, f64) {
        (self.re - o.re, self.im - o.im)
    }
}

impl TryFrom<[f64; 2]> for ComplexPoint {
    type Error = CurveError;
    fn try_from(v: [f64; 2]) -> Result<Self, CurveError> {
        ComplexPoint::new(v[0], v[1])
    }
}

impl From<ComplexPoint> for [f64; 2] {
    fn from(p: ComplexPoint) -> [f64; 2] {
        [p.re, p.im]
    }
}

impl From<ComplexPoint> for num_complex::Complex64 {
    fn from(p: ComplexPoint) -> Self {
        num_complex::Complex64::new(p.re, p.im)
    }
}

impl fmt::Debug for ComplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.re, self.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    A,
    B,
    C,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::A, Label::B, Label::C];
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::A => "a",
            Label::B => "b",
            Label::C => "c",
        })
    }
}

/// One of the six branch points: a labelled root or its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RootId {
    pub label: Label,
    pub conjugate: bool,
}

impl RootId {
    pub fn upper(label: Label) -> Self {
        Self {
            label,
            conjugate: false,
        }
    }

    pub fn lower(label: Label) -> Self {
        Self {
            label,
            conjugate: true,
        }
    }
}

impl fmt::Display for RootId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conjugate {
            write!(f, "{}bar", self.label)
        } else {
            write!(f, "{}", self.label)
        }
    }
}

/// A root in the open upper half-plane; its conjugate is implicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePair {
    root: ComplexPoint,
    label: Label,
}

impl ConjugatePair {
    pub fn new(label: Label, root: ComplexPoint) -> Result<Self, CurveError> {
        if !(root.im > 0.0) {
            return Err(CurveError::NotUpperHalfPlane { label, im: root.im });
        }
        Ok(Self { root, label })
    }

    pub fn root(&self) -> ComplexPoint {
        self.root
    }

    pub fn label(&self) -> Label {
        self.label
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealGenus2Curve {
    pairs: [ConjugatePair; 3],
}

impl RealGenus2Curve {
    pub fn new(a: ComplexPoint, b: ComplexPoint, c: ComplexPoint) -> Result<Self, CurveError> {
        let pairs = [
            ConjugatePair::new(Label::A, a)?,
            ConjugatePair::new(Label::B, b)?,
            ConjugatePair::new(Label::C, c)?,
        ];
        for i in 0..3 {
            for j in i + 1..3 {
                if pairs[i].root == pairs[j].root {
                    return Err(CurveError::CoincidentRoots(pairs[i].label, pairs[j].label));
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[ConjugatePair; 3] {
        &self.pairs
    }

    pub fn pair(&self, label: Label) -> ConjugatePair {
        self.pairs[label as usize]
    }

    /// The six branch points in the order `a, abar, b, bbar, c, cbar`.
    pub fn roots(&self) -> [(RootId, ComplexPoint); 6] {
        let mut out = [(RootId::upper(Label::A), self.pairs[0].root); 6];
        for (k, p) in self.pairs.iter().enumerate() {
            out[2 * k] = (RootId::upper(p.label), p.root);
            out[2 * k + 1] = (RootId::lower(p.label), p.root.conj());
        }
        out
    }
}

/// The torus obtained by keeping two of the three root pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompanionSelection {
    pub curve: RealGenus2Curve,
    pub chosen: (Label, Label),
}

impl CompanionSelection {
    pub fn new(curve: RealGenus2Curve, first: Label, second: Label) -> Result<Self, CurveError> {
        if first == second {
            return Err(CurveError::InvalidSelection);
        }
        let chosen = if first < second {
            (first, second)
        } else {
            (second, first)
        };
        Ok(Self { curve, chosen })
    }

    /// The root pairs kept by this companion.
    pub fn selected_pairs(&self) -> (ConjugatePair, ConjugatePair) {
        (self.curve.pair(self.chosen.0), self.curve.pair(self.chosen.1))
    }
}

pub fn companions(curve: &RealGenus2Curve) -> [CompanionSelection; 3] {
    [(Label::A, Label::B), (Label::A, Label::C), (Label::B, Label::C)].map(|(x, y)| {
        CompanionSelection {
            curve: *curve,
            chosen: (x, y),
        }
    })
}

/// A double cover of the sphere branched over `2g + 2` points has genus `g`.
pub fn genus_by_riemann_hurwitz(branch_count: u64) -> Result<u64, CurveError> {
    if branch_count < 2 || branch_count % 2 != 0 {
        return Err(CurveError::InvalidBranchCount(branch_count));
    }
    Ok((branch_count - 2) / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: i64) -> Self {
        if n.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(&self) -> bool {
        matches!(self, Parity::Odd)
    }
}

/// A closed polygonal loop; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ComplexPoint>", into = "Vec<ComplexPoint>")]
pub struct PlanarLoop {
    vertices: Vec<ComplexPoint>,
}

impl TryFrom<Vec<ComplexPoint>> for PlanarLoop {
    type Error = CurveError;
    fn try_from(v: Vec<ComplexPoint>) -> Result<Self, CurveError> {
        PlanarLoop::new(v)
    }
}

impl From<PlanarLoop> for Vec<ComplexPoint> {
    fn from(l: PlanarLoop) -> Self {
        l.vertices
    }
}

impl PlanarLoop {
    pub fn new(vertices: Vec<ComplexPoint>) -> Result<Self, CurveError> {
        let n = vertices.len();
        if n < 3 {
            return Err(CurveError::TooFewVertices(n));
        }
        for i in 0..n {
            let j = (i + 1) % n;
            if vertices[i] == vertices[j] {
                return Err(CurveError::RepeatedVertex(i, j));
            }
        }
        Ok(Self { vertices })
    }

    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self, CurveError> {
        let v = coords
            .iter()
            .map(|&(re, im)| ComplexPoint::new(re, im))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(v)
    }

    pub fn vertices(&self) -> &[ComplexPoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = (ComplexPoint, ComplexPoint)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                d = d.max(p.dist(q));
            }
        }
        d
    }

    /// Bounding-box diagonal; within a factor of sqrt 2 of the diameter.
    fn extent(&self) -> f64 {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &self.vertices {
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(p.im);
            y1 = y1.max(p.im);
        }
        (x1 - x0).hypot(y1 - y0)
    }

    pub fn rotated(&self, k: usize) -> PlanarLoop {
        let mut v = self.vertices.clone();
        let n = v.len();
        v.rotate_left(k % n);
        PlanarLoop { vertices: v }
    }

    pub fn reversed(&self) -> PlanarLoop {
        let mut v = self.vertices.clone();
        v.reverse();
        PlanarLoop { vertices: v }
    }

    /// Concatenate two loops that start at the same basepoint vertex.
    pub fn concat(&self, other: &PlanarLoop) -> Result<PlanarLoop, CurveError> {
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices);
        PlanarLoop::new(v)
    }

    /// No two segments meet except consecutive ones at their shared vertex.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        let segs: Vec<_> = self.segments().collect();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (p, q) = segs[i];
                let (r, s) = segs[j];
                if adjacent {
                    // Shared vertex; reject only a fold-back along the same line.
                    let (shared, a, b) = if j == i + 1 { (q, p, s) } else { (p, q, r) };
                    if orient(shared, a, b) == 0.0 {
                        let (ax, ay) = a.sub(&shared);
                        let (bx, by) = b.sub(&shared);
                        if ax * bx + ay * by > 0.0 {
                            return false;
                        }
                    }
                    if n == 3 && orient(p, q, s) == 0.0 {
                        return false;
                    }
                } else if segments_meet(p, q, r, s) {
                    return false;
                }
            }
        }
        true
    }

    fn check_clear_of(&self, p: &ComplexPoint) -> Result<(), CurveError> {
        let tol = DEGENERATE_TOL * self.extent();
        for (a, b) in self.segments() {
            if point_segment_distance(p, &a, &b) <= tol {
                return Err(CurveError::DegeneratePosition { re: p.re, im: p.im });
            }
        }
        Ok(())
    }

    /// Integer winding number of the loop around `p`.
    pub fn winding_number(&self, p: &ComplexPoint) -> Result<i64, CurveError> {
        self.check_clear_of(p)?;
        Ok(winding_number_unchecked(&self.vertices, p))
    }
}

pub(crate) fn orient(a: ComplexPoint, b: ComplexPoint, c: ComplexPoint) -> f64 {
    let (bx, by) = b.sub(&a);
    let (cx, cy) = c.sub(&a);
    bx * cy - by * cx
}

fn on_segment_bbox(p: ComplexPoint, q: ComplexPoint, r: ComplexPoint) -> bool {
    r.re >= p.re.min(q.re) && r.re <= p.re.max(q.re) && r.im >= p.im.min(q.im) && r.im <= p.im.max(q.im)
}

/// Closed segments `pq` and `rs` share at least one point.
pub(crate) fn segments_meet(p: ComplexPoint, q: ComplexPoint, r: ComplexPoint, s: ComplexPoint) -> bool {
    let d1 = orient(p, q, r);
    let d2 = orient(p, q, s);
    let d3 = orient(r, s, p);
    let d4 = orient(r, s, q);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment_bbox(p, q, r))
        || (d2 == 0.0 && on_segment_bbox(p, q, s))
        || (d3 == 0.0 && on_segment_bbox(r, s, p))
        || (d4 == 0.0 && on_segment_bbox(r, s, q))
}

pub(crate) fn point_segment_distance(p: &ComplexPoint, a: &ComplexPoint, b: &ComplexPoint) -> f64 {
    let (dx, dy) = b.sub(a);
    let (px, py) = p.sub(a);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        ((px * dx + py * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (px - t * dx).hypot(py - t * dy)
}

/// Crossing-number winding count; the caller guarantees `p` is off the loop.
pub(crate) fn winding_number_unchecked(vertices: &[ComplexPoint], p: &ComplexPoint) -> i64 {
    let n = vertices.len();
    let mut w = 0i64;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if a.im <= p.im {
            if b.im > p.im && orient(a, b, *p) > 0.0 {
                w += 1;
            }
        } else if b.im <= p.im && orient(a, b, *p) < 0.0 {
            w -= 1;
        }
    }
    w
}

pub fn winding_parity(lp: &PlanarLoop, point: &ComplexPoint) -> Result<Parity, CurveError> {
    lp.winding_number(point).map(Parity::of)
}

/// Whether the lift of `lp` to the double cover branched at `branch_points`
/// closes up: the monodromy is the parity of the total winding.
pub fn lift_closes(lp: &PlanarLoop, branch_points: &[ComplexPoint]) -> Result<bool, CurveError> {
    let mut total = 0i64;
    for b in branch_points {
        total += lp.winding_number(b)?;
    }
    Ok(total.rem_euclid(2) == 0)
}

/// Two-sided split of the six branch points by a simple loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchPartition {
    pub side_in: BTreeSet<RootId>,
    pub side_out: BTreeSet<RootId>,
}

impl BranchPartition {
    pub fn new(side_in: BTreeSet<RootId>, side_out: BTreeSet<RootId>) -> Self {
        Self { side_in, side_out }
    }

    pub fn swapped(&self) -> Self {
        Self {
            side_in: self.side_out.clone(),
            side_out: self.side_in.clone(),
        }
    }

    fn universe(&self) -> BTreeSet<RootId> {
        self.side_in.union(&self.side_out).copied().collect()
    }

    fn is_disjoint(&self) -> bool {
        self.side_in.is_disjoint(&self.side_out)
    }

    /// Equality as unordered partitions.
    pub fn same_as(&self, other: &BranchPartition) -> bool {
        (self.side_in == other.side_in && self.side_out == other.side_out)
            || (self.side_in == other.side_out && self.side_out == other.side_in)
    }
}

pub fn loop_partition(lp: &PlanarLoop, curve: &RealGenus2Curve) -> Result<BranchPartition, CurveError> {
    if !lp.is_simple() {
        return Err(CurveError::NotSimple);
    }
    let mut side_in = BTreeSet::new();
    let mut side_out = BTreeSet::new();
    for (id, p) in curve.roots() {
        if winding_parity(lp, &p)?.is_odd() {
            side_in.insert(id);
        } else {
            side_out.insert(id);
        }
    }
    Ok(BranchPartition { side_in, side_out })
}

pub fn partitions_identical(
    p1: &BranchPartition,
    p2: &BranchPartition,
    p3: &BranchPartition,
) -> Result<bool, CurveError> {
    let u = p1.universe();
    for p in [p1, p2, p3] {
        if !p.is_disjoint() || p.universe() != u {
            return Err(CurveError::MismatchedRoots);
        }
    }
    Ok(p1.same_as(p2) && p1.same_as(p3))
}

/// Whether some segment of the loop crosses the real axis.
pub fn crosses_equator(lp: &PlanarLoop) -> Result<bool, CurveError> {
    let tol = DEGENERATE_TOL * lp.diameter();
    for (i, v) in lp.vertices().iter().enumerate() {
        if v.im.abs() <= tol {
            return Err(CurveError::VertexOnEquator { index: i });
        }
    }
    Ok(lp.segments().any(|(a, b)| (a.im > 0.0) != (b.im > 0.0)))
}

/// Image of the loop under complex conjugation, vertex order preserved.
pub fn conjugate_loop(lp: &PlanarLoop) -> PlanarLoop {
    PlanarLoop {
        vertices: lp.vertices.iter().map(ComplexPoint::conj).collect(),
    }
}
