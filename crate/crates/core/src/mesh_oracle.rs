//! Discrete flat tori and Klein bottles as weighted 8-connected grid graphs.
//!
//! Vertex `(i, j)` of an `nx x ny` mesh sits at `i e1 + j e2` in a
//! fundamental domain. Each edge records the Z/2 parities of the deck
//! transformation it crosses: bit 0 for the `x` generator (the lattice
//! vector `v1`, or the glide), bit 1 for the `y` generator. A closed walk is
//! homologically nontrivial mod 2 iff its accumulated signature is nonzero,
//! and shortest such walks are found by Dijkstra on the four-sheeted lift.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flat_systoles::{klein_systole, torus_systole, FlatError, FlatKleinBottle, Lattice2, Vec2};

pub const MIN_RESOLUTION: usize = 8;
/// `sec(pi/8) - 1`, the worst-case length distortion of the 8-connected
/// stencil on a square grid.
pub const STENCIL_DISTORTION: f64 = 0.082_392_200_292_393_97;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("resolution {nx}x{ny} is below the minimum {MIN_RESOLUTION}")]
    Resolution { nx: usize, ny: usize },
    #[error("Klein bottle meshes need an even vertical resolution, got {0}")]
    OddKleinResolution(usize),
    #[error("involution table has length {got}, mesh has {expected} vertices")]
    InvolutionLength { got: usize, expected: usize },
    #[error("map is not a bijection of the vertex set")]
    NotBijection,
    #[error("map does not preserve edge weights at edge {0}-{1}")]
    NotIsometry(usize, usize),
    #[error("meshes are not in quotient relation: {0}")]
    NotQuotient(String),
    #[error("displacement needs a torus mesh")]
    NotTorus,
    #[error(transparent)]
    Flat(#[from] FlatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Identification {
    Torus { lattice: Lattice2 },
    Klein { bottle: FlatKleinBottle },
}

impl Identification {
    pub fn torus(lattice: Lattice2) -> Self {
        Identification::Torus { lattice }
    }

    pub fn klein(bottle: FlatKleinBottle) -> Self {
        Identification::Klein { bottle }
    }

    /// Fundamental domain edges `(e1, e2)` before subdivision.
    fn domain(&self) -> (Vec2, Vec2) {
        match self {
            Identification::Torus { lattice } => (lattice.v1, lattice.v2),
            Identification::Klein { bottle } => ([bottle.w(), 0.0], [0.0, bottle.h()]),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Identification::Torus { lattice } => lattice.area(),
            Identification::Klein { bottle } => bottle.area(),
        }
    }

    /// Length of the shortest noncontractible loop of the flat surface.
    pub fn continuum_systole(&self) -> Result<f64, MeshError> {
        Ok(match self {
            Identification::Torus { lattice } => torus_systole(lattice)?.value,
            Identification::Klein { bottle } => klein_systole(bottle).value,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub to: usize,
    pub weight: f64,
    /// Deck-transformation parities crossed by this edge.
    pub flips: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientMesh {
    pub identification: Identification,
    pub nx: usize,
    pub ny: usize,
    /// Adjacency lists, indexed by `i * ny + j`.
    pub adjacency: Vec<Vec<Edge>>,
    area: f64,
}

impl QuotientMesh {
    pub fn vertex_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn coords(&self, v: usize) -> (usize, usize) {
        (v / self.ny, v % self.ny)
    }

    /// Total area, equal to the flat area of the identification.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Area carried by each of the `nx * ny` grid faces.
    pub fn face_area(&self) -> f64 {
        self.area / self.vertex_count() as f64
    }

    /// Longest axis edge.
    pub fn edge_length(&self) -> f64 {
        let (e1, e2) = self.identification.domain();
        let a = (e1[0].hypot(e1[1])) / self.nx as f64;
        let b = (e2[0].hypot(e2[1])) / self.ny as f64;
        a.max(b)
    }

    fn is_klein(&self) -> bool {
        matches!(self.identification, Identification::Klein { .. })
    }
}

const STENCIL: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

pub fn build_mesh(identification: Identification, n: usize) -> Result<QuotientMesh, MeshError> {
    build_mesh_with(identification, n, n)
}

pub fn build_mesh_with(identification: Identification, nx: usize, ny: usize) -> Result<QuotientMesh, MeshError> {
    if nx < MIN_RESOLUTION || ny < MIN_RESOLUTION {
        return Err(MeshError::Resolution { nx, ny });
    }
    let klein = matches!(identification, Identification::Klein { .. });
    if klein && ny % 2 != 0 {
        return Err(MeshError::OddKleinResolution(ny));
    }
    let (d1, d2) = identification.domain();
    let e1 = [d1[0] / nx as f64, d1[1] / nx as f64];
    let e2 = [d2[0] / ny as f64, d2[1] / ny as f64];
    let (nxi, nyi) = (nx as i64, ny as i64);
    let mut adjacency = vec![Vec::with_capacity(8); nx * ny];
    for i in 0..nxi {
        for j in 0..nyi {
            let from = (i * nyi + j) as usize;
            for &(di, dj) in &STENCIL {
                let weight = (di as f64 * e1[0] + dj as f64 * e2[0]).hypot(di as f64 * e1[1] + dj as f64 * e2[1]);
                let (mut ti, mut tj) = (i + di, j + dj);
                let mut flips = 0u8;
                if ti == nxi {
                    ti = 0;
                    flips ^= 1;
                    if klein {
                        tj = -tj;
                    }
                }
                let k = tj.div_euclid(nyi);
                tj = tj.rem_euclid(nyi);
                if k % 2 != 0 {
                    flips ^= 2;
                }
                let to = (ti * nyi + tj) as usize;
                adjacency[from].push(Edge { to, weight, flips });
                adjacency[to].push(Edge {
                    to: from,
                    weight,
                    flips,
                });
            }
        }
    }
    Ok(QuotientMesh {
        identification,
        nx,
        ny,
        adjacency,
        area: identification.area(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleResult {
    pub length: f64,
    /// Closed: first and last entries coincide.
    pub vertex_path: Vec<usize>,
    pub homology_signature: (u8, u8),
}

#[derive(Clone, Copy, PartialEq)]
struct State {
    dist: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest walk from `source` back to itself with nonzero signature.
fn shortest_nontrivial_from(mesh: &QuotientMesh, source: usize) -> Option<CycleResult> {
    let n = mesh.vertex_count();
    let mut dist = vec![f64::INFINITY; 4 * n];
    let mut prev = vec![usize::MAX; 4 * n];
    let mut heap = BinaryHeap::new();
    let start = source * 4;
    dist[start] = 0.0;
    heap.push(State { dist: 0.0, node: start });
    while let Some(State { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        let (v, sig) = (node / 4, (node % 4) as u8);
        if v == source && sig != 0 {
            let mut path = vec![v];
            let mut cur = node;
            while cur != start {
                cur = prev[cur];
                path.push(cur / 4);
            }
            path.reverse();
            return Some(CycleResult {
                length: d,
                vertex_path: path,
                homology_signature: (sig & 1, sig >> 1),
            });
        }
        for e in &mesh.adjacency[v] {
            let next = e.to * 4 + (sig ^ e.flips) as usize;
            let nd = d + e.weight;
            if nd < dist[next] {
                dist[next] = nd;
                prev[next] = node;
                heap.push(State { dist: nd, node: next });
            }
        }
    }
    None
}

fn best_of(results: Vec<CycleResult>) -> CycleResult {
    results
        .into_iter()
        .min_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.vertex_path.cmp(&b.vertex_path)))
        .expect("a closed surface mesh has nontrivial cycles")
}

/// Representatives of the vertex orbits under the mesh's isometries: one
/// vertex for a torus (translations act transitively), and one per row up
/// to `j -> -j` for a Klein bottle (only horizontal translations and the
/// reflection `y -> -y` commute with the glide).
fn orbit_representatives(mesh: &QuotientMesh) -> Vec<usize> {
    if mesh.is_klein() {
        (0..=mesh.ny / 2).map(|j| mesh.index(0, j)).collect()
    } else {
        vec![0]
    }
}

/// Shortest closed walk whose Z/2 homology class is nonzero.
pub fn homological_systole(mesh: &QuotientMesh) -> CycleResult {
    let sources = orbit_representatives(mesh);
    let results = sources
        .par_iter()
        .filter_map(|&s| shortest_nontrivial_from(mesh, s))
        .collect();
    best_of(results)
}

/// As [`homological_systole`], without the symmetry reduction.
pub fn homological_systole_all_sources(mesh: &QuotientMesh) -> CycleResult {
    let results = (0..mesh.vertex_count())
        .into_par_iter()
        .filter_map(|s| shortest_nontrivial_from(mesh, s))
        .collect();
    best_of(results)
}

fn check_involution(mesh: &QuotientMesh, map: &[usize]) -> Result<(), MeshError> {
    let n = mesh.vertex_count();
    if map.len() != n {
        return Err(MeshError::InvolutionLength {
            got: map.len(),
            expected: n,
        });
    }
    let mut seen = vec![false; n];
    for &t in map {
        if t >= n || seen[t] {
            return Err(MeshError::NotBijection);
        }
        seen[t] = true;
    }
    for (u, edges) in mesh.adjacency.iter().enumerate() {
        for e in edges {
            let (fu, fv) = (map[u], map[e.to]);
            let ok = mesh.adjacency[fu]
                .iter()
                .any(|f| f.to == fv && (f.weight - e.weight).abs() <= 1e-12 * e.weight);
            if !ok {
                return Err(MeshError::NotIsometry(u, e.to));
            }
        }
    }
    Ok(())
}

fn distance(mesh: &QuotientMesh, from: usize, to: usize) -> f64 {
    let mut dist = vec![f64::INFINITY; mesh.vertex_count()];
    let mut heap = BinaryHeap::new();
    dist[from] = 0.0;
    heap.push(State { dist: 0.0, node: from });
    while let Some(State { dist: d, node }) = heap.pop() {
        if node == to {
            return d;
        }
        if d > dist[node] {
            continue;
        }
        for e in &mesh.adjacency[node] {
            let nd = d + e.weight;
            if nd < dist[e.to] {
                dist[e.to] = nd;
                heap.push(State { dist: nd, node: e.to });
            }
        }
    }
    f64::INFINITY
}

/// `min_v dist(v, map(v))` in the graph metric of a torus mesh.
pub fn estimate_displacement(mesh: &QuotientMesh, map: &[usize]) -> Result<f64, MeshError> {
    if mesh.is_klein() {
        return Err(MeshError::NotTorus);
    }
    check_involution(mesh, map)?;
    Ok((0..mesh.vertex_count())
        .into_par_iter()
        .map(|v| distance(mesh, v, map[v]))
        .reduce(|| f64::INFINITY, f64::min))
}

fn vertex_map(mesh: &QuotientMesh, f: impl Fn(i64, i64) -> (i64, i64)) -> Vec<usize> {
    let (nx, ny) = (mesh.nx as i64, mesh.ny as i64);
    (0..mesh.vertex_count())
        .map(|v| {
            let (i, j) = mesh.coords(v);
            let (a, b) = f(i as i64, j as i64);
            mesh.index(a.rem_euclid(nx) as usize, b.rem_euclid(ny) as usize)
        })
        .collect()
}

/// `(x, y) -> (x + v1/2, -y)`: the deck glide when the torus is the double
/// cover of a Klein bottle. Needs even `nx`.
pub fn glide_involution(mesh: &QuotientMesh) -> Vec<usize> {
    let half = (mesh.nx / 2) as i64;
    vertex_map(mesh, |i, j| (i + half, -j))
}

/// `p -> -p`.
pub fn point_reflection(mesh: &QuotientMesh) -> Vec<usize> {
    vertex_map(mesh, |i, j| (-i, -j))
}

/// `p -> p + v1/2`. Needs even `nx`.
pub fn half_translation(mesh: &QuotientMesh) -> Vec<usize> {
    let half = (mesh.nx / 2) as i64;
    vertex_map(mesh, |i, j| (i + half, j))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub torus_area: f64,
    pub klein_area: f64,
    pub ratio: f64,
    pub exact: bool,
}

pub fn area_relations_check(torus: &QuotientMesh, klein: &QuotientMesh) -> Result<AreaReport, MeshError> {
    let (lattice, bottle) = match (torus.identification, klein.identification) {
        (Identification::Torus { lattice }, Identification::Klein { bottle }) => (lattice, bottle),
        _ => return Err(MeshError::NotQuotient("expected a torus mesh and a Klein bottle mesh".into())),
    };
    if lattice != bottle.cover() {
        return Err(MeshError::NotQuotient("torus lattice is not the orientable cover".into()));
    }
    if torus.nx != 2 * klein.nx || torus.ny != klein.ny {
        return Err(MeshError::NotQuotient(format!(
            "grid {}x{} does not double {}x{}",
            torus.nx, torus.ny, klein.nx, klein.ny
        )));
    }
    let torus_area = torus.face_area() * torus.vertex_count() as f64;
    let klein_area = klein.face_area() * klein.vertex_count() as f64;
    let ratio = torus_area / klein_area;
    Ok(AreaReport {
        torus_area,
        klein_area,
        ratio,
        exact: ratio == 2.0,
    })
}

/// Mesh systole compared against the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshCheck {
    pub n: usize,
    pub continuum: f64,
    pub mesh_value: f64,
    pub ratio: f64,
    pub bound_ok: bool,
}

pub fn mesh_check(identification: Identification, n: usize) -> Result<MeshCheck, MeshError> {
    let mesh = build_mesh(identification, n)?;
    let continuum = identification.continuum_systole()?;
    let mesh_value = homological_systole(&mesh).length;
    let upper = (1.0 + STENCIL_DISTORTION) * continuum + mesh.edge_length();
    Ok(MeshCheck {
        n,
        continuum,
        mesh_value,
        ratio: mesh_value / continuum,
        bound_ok: continuum * (1.0 - 1e-12) <= mesh_value && mesh_value <= upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_torus() -> Identification {
        Identification::torus(Lattice2::new([1.0, 0.0], [0.0, 1.0]).unwrap())
    }

    #[test]
    fn torus_construction() {
        let m = build_mesh(unit_torus(), 16).unwrap();
        assert_eq!(m.vertex_count(), 256);
        assert!(m.adjacency.iter().all(|a| a.len() == 8));
        let wraps = m.adjacency[m.index(15, 3)]
            .iter()
            .filter(|e| e.flips & 1 == 1)
            .count();
        assert_eq!(wraps, 3);
    }

    #[test]
    fn klein_wrap_reverses_rows() {
        let b = FlatKleinBottle::new(1.0, 1.0).unwrap();
        let m = build_mesh(Identification::klein(b), 16).unwrap();
        let from = m.index(15, 3);
        let straight = m.adjacency[from]
            .iter()
            .find(|e| e.flips & 1 == 1 && (e.weight - 1.0 / 16.0).abs() < 1e-15)
            .unwrap();
        assert_eq!(m.coords(straight.to), (0, 13));
    }

    #[test]
    fn resolution_errors() {
        assert!(matches!(build_mesh(unit_torus(), 4), Err(MeshError::Resolution { .. })));
        let b = FlatKleinBottle::new(1.0, 1.0).unwrap();
        assert!(matches!(
            build_mesh(Identification::klein(b), 9),
            Err(MeshError::OddKleinResolution(9))
        ));
    }

    #[test]
    fn unit_torus_systole_exact() {
        let m = build_mesh(unit_torus(), 32).unwrap();
        let c = homological_systole(&m);
        assert!((c.length - 1.0).abs() < 1e-12);
        assert_ne!(c.homology_signature, (0, 0));
        assert_eq!(c.vertex_path.first(), c.vertex_path.last());
    }

    #[test]
    fn klein_systole_signature() {
        let b = FlatKleinBottle::new(1.0, 3.0).unwrap();
        let m = build_mesh(Identification::klein(b), 16).unwrap();
        let c = homological_systole(&m);
        assert!((c.length - 1.0).abs() < 1e-12);
        assert_eq!(c.homology_signature.0, 1);
        let all = homological_systole_all_sources(&m);
        assert_eq!(all.length, c.length);
    }

    #[test]
    fn displacement_examples() {
        let b = FlatKleinBottle::new(1.0, 1.0).unwrap();
        let m = build_mesh_with(Identification::torus(b.cover()), 16, 8).unwrap();
        let d = estimate_displacement(&m, &glide_involution(&m)).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let id: Vec<usize> = (0..m.vertex_count()).collect();
        assert_eq!(estimate_displacement(&m, &id).unwrap(), 0.0);
        assert_eq!(estimate_displacement(&m, &point_reflection(&m)).unwrap(), 0.0);
        let t = estimate_displacement(&m, &half_translation(&m)).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_isometry_rejected() {
        let l = Lattice2::new([1.0, 0.0], [0.3, 1.0]).unwrap();
        let m = build_mesh(Identification::torus(l), 8).unwrap();
        assert!(matches!(
            estimate_displacement(&m, &glide_involution(&m)),
            Err(MeshError::NotIsometry(..))
        ));
        let mut bad: Vec<usize> = (0..m.vertex_count()).collect();
        bad[1] = 0;
        assert_eq!(estimate_displacement(&m, &bad), Err(MeshError::NotBijection));
    }

    #[test]
    fn area_relation() {
        let b = FlatKleinBottle::new(0.5, 1.0).unwrap();
        let k = build_mesh(Identification::klein(b), 8).unwrap();
        let t = build_mesh_with(Identification::torus(b.cover()), 16, 8).unwrap();
        let r = area_relations_check(&t, &k).unwrap();
        assert_eq!((r.torus_area, r.klein_area, r.ratio), (1.0, 0.5, 2.0));
        assert!(r.exact);
        let wrong = build_mesh(Identification::torus(b.cover()), 8).unwrap();
        assert!(matches!(area_relations_check(&wrong, &k), Err(MeshError::NotQuotient(_))));
    }
}
