use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use klein_systole::flat_systoles::*;
use klein_systole::interval::Interval;
use klein_systole::mesh_oracle::*;
use klein_systole::periods::*;
use klein_systole::proof_chain::*;
use klein_systole::real_curves::*;

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let (x, y) = (0.5 * (a + b), (a * b).sqrt());
        a = x;
        b = y;
        if (a - b).abs() <= 1e-17 * a {
            break;
        }
    }
    a
}

fn quartic(a: (f64, f64), b: (f64, f64)) -> QuarticCurve {
    QuarticCurve::new(
        ConjugatePair::new(Label::A, ComplexPoint::new(a.0, a.1).unwrap()).unwrap(),
        ConjugatePair::new(Label::B, ComplexPoint::new(b.0, b.1).unwrap()).unwrap(),
    )
    .unwrap()
}

fn sorted_norms(l: &Lattice2) -> (f64, f64) {
    let r = reduce(l).unwrap();
    (r.v1[0].hypot(r.v1[1]), r.v2[0].hypot(r.v2[1]))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn imaginary_roots_match_agm() {
    // y^2 = -(x^2 + 1)(x^2 + 4): complete elliptic integrals of modulus 1/2
    // and sqrt(3)/2.
    let l = period_lattice(&quartic((0.0, 1.0), (0.0, 2.0)), PERIOD_TOL).unwrap();
    let pi = std::f64::consts::PI;
    let real = pi / agm(1.0, 3f64.sqrt() / 2.0);
    let imag = pi / (2.0 * agm(1.0, 0.5));
    let (s, t) = sorted_norms(&l.lattice());
    assert!(rel(s, imag) < 1e-9, "{s} vs {imag}");
    assert!(rel(t, real) < 1e-9, "{t} vs {real}");
    assert!(rel(l.area(), real * imag) < 1e-9);
}

#[test]
fn periods_scale_inversely() {
    for (a, b) in [((0.0, 1.0), (0.0, 2.0)), ((1.0, 1.0), (-0.5, 2.0)), ((0.3, 0.7), (2.0, 1.5))] {
        let c = quartic(a, b);
        let base = period_lattice(&c, PERIOD_TOL).unwrap();
        let (s0, t0) = sorted_norms(&base.lattice());
        for lambda in [0.5, 2.0, 10.0] {
            let l = period_lattice(&c.scaled(lambda).unwrap(), PERIOD_TOL).unwrap();
            let (s, t) = sorted_norms(&l.lattice());
            assert!(rel(s * lambda, s0) < 1e-9 && rel(t * lambda, t0) < 1e-9, "{a:?} {b:?} {lambda}");
            assert!(rel(l.area() * lambda * lambda, base.area()) < 1e-9);
        }
    }
}

#[test]
fn generic_lattices_are_real() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let a = (rng.gen_range(-2.0..2.0), rng.gen_range(0.2..2.0));
        let b = (rng.gen_range(-2.0..2.0), rng.gen_range(0.2..2.0));
        let l = period_lattice(&quartic(a, b), PERIOD_TOL).unwrap();
        let form = real_form(&l, CLASSIFY_TOL).unwrap();
        assert!(rel(form.area(), l.area()) < 1e-8, "{a:?} {b:?} {form:?}");
    }
}

/// Smallest `|conj(z) + c - z - v|` over a sampled fundamental domain and
/// nearby lattice vectors `v`, refined around the best sample.
fn grid_min_displacement(l: &Lattice2, c: Complex64) -> f64 {
    let r = reduce(l).unwrap();
    let (v1, v2) = (Complex64::new(r.v1[0], r.v1[1]), Complex64::new(r.v2[0], r.v2[1]));
    let disp = |z: Complex64| {
        let d = z.conj() + c - z;
        let mut best = f64::INFINITY;
        for m in -3..=3 {
            for n in -3..=3 {
                best = best.min((d - v1 * m as f64 - v2 * n as f64).norm());
            }
        }
        best
    };
    let n = 200;
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let z = v1 * (i as f64 / n as f64) + v2 * (j as f64 / n as f64);
            let d = disp(z);
            if d < best.0 {
                best = (d, z);
            }
        }
    }
    let mut step = 1.0 / n as f64;
    for _ in 0..30 {
        let centre = best.1;
        for i in -2..=2 {
            for j in -2..=2 {
                let z = centre + (v1 * i as f64 + v2 * j as f64) * step;
                let d = disp(z);
                if d < best.0 {
                    best = (d, z);
                }
            }
        }
        step *= 0.5;
    }
    best.0
}

#[test]
fn returned_glides_are_free_involutions() {
    let cases = [
        quartic((0.0, 1.0), (0.0, 2.0)),
        quartic((0.0, 0.5), (0.0, 3.0)),
        quartic((1.0, 1.0), (-0.5, 2.0)),
        quartic((0.3, 0.7), (2.0, 1.5)),
    ];
    let mut seen = 0;
    for c in cases {
        let l = period_lattice(&c, PERIOD_TOL).unwrap();
        let lat = l.lattice();
        let scale = l.area().sqrt();
        for g in classify_real_involutions(&l, CLASSIFY_TOL).unwrap() {
            seen += 1;
            let g: Complex64 = g.into();
            // Applying twice translates by 2 Re c, which must be a period.
            let r = reduce(&lat).unwrap();
            let det = r.v1[0] * r.v2[1] - r.v1[1] * r.v2[0];
            let t = 2.0 * g.re;
            let m = t * r.v2[1] / det;
            let n = -t * r.v1[1] / det;
            assert!((m - m.round()).abs() < 1e-8 && (n - n.round()).abs() < 1e-8);
            assert!(grid_min_displacement(&lat, g) > 1e-3 * scale);
            let k = klein_quotient(&l, &g.into_point(), CLASSIFY_TOL);
            if let RealLatticeForm::Rectangular { .. } = real_form(&l, CLASSIFY_TOL).unwrap() {
                assert_eq!(2.0 * k.unwrap().area(), real_form(&l, CLASSIFY_TOL).unwrap().area());
            }
        }
    }
    assert!(seen > 0);
}

trait IntoPoint {
    fn into_point(self) -> ComplexPoint;
}

impl IntoPoint for Complex64 {
    fn into_point(self) -> ComplexPoint {
        ComplexPoint::new(self.re, self.im).unwrap()
    }
}

#[test]
fn klein_systole_matches_class_enumeration() {
    for w in [0.3, 0.5, 1.0, 1.7, 4.0] {
        for h in [0.3, 0.8, 1.0, 2.5, 6.0] {
            let b = FlatKleinBottle::new(w, h).unwrap();
            let mut best = f64::INFINITY;
            for m in -10i64..=10 {
                for n in -10i64..=10 {
                    for glide in 0..=1u8 {
                        let cls = ClassDescriptor::new(m, n, glide);
                        if cls.is_identity() {
                            continue;
                        }
                        let x = (2 * m + glide as i64) as f64 * w;
                        // A glide class attains its displacement on the axis
                        // y = n h / 2; a translation is constant.
                        let len = if glide == 1 { x.abs() } else { x.hypot(n as f64 * h) };
                        best = best.min(len);
                    }
                }
            }
            assert_eq!(klein_systole(&b).value, best, "w = {w}, h = {h}");
        }
    }
}

#[test]
fn bound_ordering() {
    let k = NamedConstants::get();
    assert!(k.bavard < k.loewner && k.loewner < (4.0f64 / 3.0).sqrt());
    assert!((k.loewner - 1.074_569_931_823_54).abs() < 1e-12);
    assert!((k.bavard - 1.053_907_365_255_41).abs() < 1e-12);
    assert!(bavard_interval().hi() < loewner_interval().lo());
}

/// Scalar bisection of the threshold where the belt bound and the Loewner
/// step meet, in plain `f64`.
fn scalar_threshold() -> f64 {
    let pi = std::f64::consts::PI;
    let belt = |a: f64| {
        let beta = a.sqrt();
        let gamma = 0.5 * (beta - 1.0 / beta) * pi / beta;
        2.0 * a * gamma.sin() / pi
    };
    let f = |a: f64| (2.0 / 3f64.sqrt()) * (2.0 / (pi * a) + 1.0 - belt(a)) - a;
    let (mut lo, mut hi) = (1.30, 1.3334);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

#[test]
fn optimal_alpha_brackets_scalar_threshold() {
    let t = scalar_threshold();
    assert!((t - 1.332_376_618_463_9).abs() < 1e-9);
    let r = optimal_alpha(1e-6).unwrap();
    assert!(r.near(t, 1e-9), "{r:?} vs {t}");
}

#[test]
fn torus_boundary_at_130() {
    let pi = std::f64::consts::PI;
    let cap = 1.3 * 3f64.sqrt() / 2.0 - 2.0 / (1.3 * pi);
    assert!((cap - 0.636_125_507_713_9).abs() < 1e-12);
    let ok = ChainParams::with_split(1.30, 1.0 - (cap - 1e-9)).unwrap();
    assert_eq!(torus_chain(&ok).unwrap().last().unwrap().verdict, StepVerdict::Proved);
    let bad = ChainParams::with_split(1.30, 1.0 - (cap + 1e-9)).unwrap();
    assert_eq!(torus_chain(&bad).unwrap().last().unwrap().verdict, StepVerdict::Failed);
}

#[test]
fn interval_endpoints_are_tight() {
    let q = DerivedQuantities::from_alpha(Interval::around(DEFAULT_ALPHA)).unwrap();
    for x in [q.beta, q.delta0, q.h_star, q.gamma, q.sin_gamma] {
        assert!(x.width() < 1e-14, "{x:?}");
    }
}

#[test]
fn mesh_on_hexagonal_torus() {
    let hex = Lattice2::new([1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]).unwrap();
    let c = mesh_check(Identification::torus(hex), 64).unwrap();
    assert!(c.bound_ok);
    assert!(c.mesh_value >= 1.0 - 1e-12 && c.mesh_value <= 1.083);
}

#[test]
fn mesh_on_tall_klein_bottle() {
    let b = FlatKleinBottle::new(1.0, 3.0).unwrap();
    let m = build_mesh(Identification::klein(b), 64).unwrap();
    let c = homological_systole(&m);
    assert!(c.length >= 1.0 - 1e-12 && c.length <= 1.083);
    assert_eq!(c.homology_signature, (1, 0));
}

#[test]
fn mesh_refinement_never_overshoots() {
    let family = [
        Identification::torus(Lattice2::new([1.0, 0.0], [0.0, 1.0]).unwrap()),
        Identification::torus(Lattice2::new([1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]).unwrap()),
        Identification::torus(Lattice2::new([1.0, 0.0], [0.3, 1.1]).unwrap()),
        Identification::klein(FlatKleinBottle::new(1.0, 1.0).unwrap()),
        Identification::klein(FlatKleinBottle::new(0.7, 2.0).unwrap()),
    ];
    for id in family {
        for k in [8usize, 16] {
            let coarse = build_mesh(id, k).unwrap();
            let fine = build_mesh(id, 2 * k).unwrap();
            let a = homological_systole(&coarse).length;
            let b = homological_systole(&fine).length;
            assert!(b <= a + coarse.edge_length(), "{id:?} {k}: {b} > {a}");
        }
    }
}

#[test]
fn symmetry_reduction_agrees_with_all_sources() {
    let ids = [
        Identification::torus(Lattice2::new([1.0, 0.0], [0.3, 1.1]).unwrap()),
        Identification::klein(FlatKleinBottle::new(1.3, 0.9).unwrap()),
        Identification::klein(FlatKleinBottle::new(0.4, 2.0).unwrap()),
    ];
    for id in ids {
        let m = build_mesh_with(id, 12, 10).unwrap();
        assert_eq!(homological_systole(&m).length, homological_systole_all_sources(&m).length);
    }
}

#[test]
fn glide_displacement_on_cover_mesh() {
    for (w, h) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.7)] {
        let b = FlatKleinBottle::new(w, h).unwrap();
        let m = build_mesh_with(Identification::torus(b.cover()), 16, 16).unwrap();
        let d = estimate_displacement(&m, &glide_involution(&m)).unwrap();
        let exact = displacement(&b);
        assert!(d >= exact - 1e-12 && d <= (1.0 + STENCIL_DISTORTION) * exact + 1e-12);
    }
}

#[test]
fn fat_graph_of_random_polygons_is_simple() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let n = rng.gen_range(4..9);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let Ok(lp) = PlanarLoop::from_coords(&pts) else { continue };
        let out = fat_graph_boundary(&lp).unwrap();
        assert!(out.is_simple());
    }
}
