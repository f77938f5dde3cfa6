use std::collections::BTreeSet;

use polydecomp::decomp::{
    brianchon_gram, edge_frame, indicator_sum, lawrence_varchenko, tangent_cone,
    tangent_cone_contains_by_definition, witten, witten_cell, Decomposition,
};
use polydecomp::fixtures;
use polydecomp::geometry::{clip, exact_volume, AxisBox, HalfSpace};
use polydecomp::measure::{sample_points, signed_volume, verify_pointwise};
use polydecomp::rational::{rat, ratio};
use polydecomp::taming::admissible_center;
use polydecomp::{Error, QVector, Rational, SimplePolytope};
use proptest::prelude::*;

const ETA_CANDIDATES: [[i64; 4]; 4] = [
    [1, 3, 7, 13],
    [-2, 5, -11, 17],
    [3, -1, 4, -9],
    [5, 2, -3, 1],
];

fn generic_etas(p: &SimplePolytope) -> Vec<QVector> {
    ETA_CANDIDATES
        .iter()
        .map(|e| QVector::from_ints(&e[..p.dim()]))
        .filter(|eta| lawrence_varchenko(p, eta).is_ok())
        .take(2)
        .collect()
}

#[test]
fn tangent_cone_forms_agree() {
    for (name, p) in fixtures::bounded_fixtures() {
        let region = p.bounding_box(&rat(2));
        for (i, face) in p.faces().iter().enumerate() {
            let cone = tangent_cone(&p, face);
            let mut points = sample_points(&region, 50, i as u64).unwrap();
            points.extend(p.vertices().iter().map(|v| v.point.clone()));
            for x in &points {
                assert_eq!(
                    cone.contains(x),
                    tangent_cone_contains_by_definition(&p, face, x),
                    "{name} face {:?} at {x:?}",
                    face.active
                );
            }
        }
    }
}

#[test]
fn brianchon_gram_pointwise_with_probes() {
    for (name, p) in fixtures::bounded_fixtures() {
        let report = verify_pointwise(&p, &brianchon_gram(&p), 1000, 7, false).unwrap();
        assert!(report.passed, "{name}: {:?}", report.failures.first());
    }
}

#[test]
fn lawrence_varchenko_pointwise_off_spans() {
    for (name, p) in fixtures::bounded_fixtures() {
        let etas = generic_etas(&p);
        assert_eq!(etas.len(), 2, "{name}");
        for eta in etas {
            let d = lawrence_varchenko(&p, &eta).unwrap();
            let report = verify_pointwise(&p, &d, 1000, 7, true).unwrap();
            assert!(
                report.passed,
                "{name} {eta:?}: {:?}",
                report.failures.first()
            );
        }
    }
}

#[test]
fn lawrence_varchenko_flip_complement() {
    for (name, p) in fixtures::bounded_fixtures() {
        for eta in generic_etas(&p) {
            let plus = lawrence_varchenko(&p, &eta).unwrap();
            let minus = lawrence_varchenko(&p, &eta.neg()).unwrap();
            for (a, b) in plus.cells.iter().zip(&minus.cells) {
                assert_eq!(a.provenance, b.provenance);
                assert_eq!(a.flip_count + b.flip_count, p.dim(), "{name}");
                assert!(a.flips.iter().zip(&b.flips).all(|(x, y)| x != y));
            }
        }
    }
}

#[test]
fn lawrence_varchenko_rejects_degenerate_eta() {
    let sq = fixtures::unit_square();
    let err = lawrence_varchenko(&sq, &QVector::from_ints(&[0, 1])).unwrap_err();
    assert!(matches!(err, Error::GenericityFailure { .. }));
    let tri = fixtures::standard_simplex(2);
    // Orthogonal to the hypotenuse direction (1,-1).
    let err = lawrence_varchenko(&tri, &QVector::from_ints(&[1, 1])).unwrap_err();
    assert!(matches!(err, Error::GenericityFailure { .. }));
}

fn same_halfspace_set(a: &[HalfSpace], b: &[HalfSpace]) -> bool {
    a.iter().all(|h| b.contains(h)) && b.iter().all(|h| a.contains(h))
}

#[test]
fn witten_cells_do_not_depend_on_the_frame_vertex() {
    for (name, p) in fixtures::bounded_fixtures() {
        let Some(center) = admissible_center(&p) else {
            continue;
        };
        for face in p.faces().iter() {
            let cells: Vec<_> = face
                .vertex_ids
                .iter()
                .map(|&v| witten_cell(&p, face, &center.center, v).unwrap())
                .collect();
            for c in &cells[1..] {
                assert_eq!(c.sign, cells[0].sign, "{name} {:?}", face.active);
                assert!(
                    same_halfspace_set(&c.halfspaces, &cells[0].halfspaces),
                    "{name} {:?}",
                    face.active
                );
            }
        }
    }
}

#[test]
fn witten_pointwise_off_spans() {
    for (name, p) in fixtures::bounded_fixtures() {
        let Some(center) = admissible_center(&p) else {
            continue;
        };
        let d = witten(&p, &center.center).unwrap();
        let report = verify_pointwise(&p, &d, 500, 11, true).unwrap();
        assert!(report.passed, "{name}: {:?}", report.failures.first());
    }
}

#[test]
fn decompositions_are_deterministic() {
    for (_, p) in fixtures::bounded_fixtures() {
        assert_eq!(brianchon_gram(&p).to_json(), brianchon_gram(&p).to_json());
        for eta in generic_etas(&p) {
            let a = lawrence_varchenko(&p, &eta).unwrap().to_json();
            assert_eq!(a, lawrence_varchenko(&p, &eta).unwrap().to_json());
            assert_eq!(Decomposition::from_json(&a).unwrap().to_json(), a);
        }
    }
}

#[test]
fn edge_frames_generate_the_vertex_cones() {
    for (name, p) in fixtures::bounded_fixtures() {
        for (v, vertex) in p.vertices().iter().enumerate() {
            let frame = edge_frame(&p, v);
            for (k, g) in frame.dropped.iter().zip(&frame.generators) {
                for &i in &vertex.active {
                    let pairing = p.halfspaces()[i].normal.dot(g);
                    if i == *k {
                        assert!(pairing < Rational::from_integer(0.into()), "{name}");
                    } else {
                        assert_eq!(pairing, rat(0), "{name}");
                    }
                }
            }
        }
    }
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=8).prop_map(|(n, d)| ratio(n, d))
}

fn vector(n: usize) -> impl Strategy<Value = QVector> {
    proptest::collection::vec(small_rational(), n).prop_map(QVector)
}

fn fixture_index() -> impl Strategy<Value = usize> {
    0..fixtures::bounded_fixtures().len()
}

fn fixture(i: usize) -> SimplePolytope {
    fixtures::bounded_fixtures().swap_remove(i).1
}

fn translate(hs: &[HalfSpace], t: &QVector) -> Vec<HalfSpace> {
    hs.iter()
        .map(|h| HalfSpace::new(h.normal.clone(), &h.offset + h.normal.dot(t)))
        .collect()
}

fn scale(hs: &[HalfSpace], k: &Rational) -> Vec<HalfSpace> {
    hs.iter()
        .map(|h| HalfSpace::new(h.normal.clone(), &h.offset * k))
        .collect()
}

fn box_from(a: &QVector, b: &QVector) -> Option<AxisBox> {
    if a.iter().zip(b.iter()).any(|(x, y)| x == y) {
        return None;
    }
    let (lo, hi): (Vec<Rational>, Vec<Rational>) = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| {
            if x < y {
                (x.clone(), y.clone())
            } else {
                (y.clone(), x.clone())
            }
        })
        .unzip();
    Some(AxisBox::new(QVector(lo), QVector(hi)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projection_is_idempotent_and_orthogonal(i in fixture_index(), raw in vector(4)) {
        let p = fixture(i);
        let c = QVector(raw.0[..p.dim()].to_vec());
        for face in p.faces().iter() {
            let x = p.affine_projection(face, &c);
            prop_assert_eq!(&p.affine_projection(face, &x), &x);
            let residual = c.sub(&x);
            let base = &p.vertices()[face.vertex_ids[0]].point;
            for &v in &face.vertex_ids[1..] {
                let along = p.vertices()[v].point.sub(base);
                prop_assert_eq!(residual.dot(&along), rat(0));
            }
            let (m, t) = p.projection_map(face);
            let mapped = QVector(m.iter().map(|row| row.dot(&c)).collect()).add(&t);
            prop_assert_eq!(mapped, x);
        }
    }

    #[test]
    fn volume_is_additive_under_box_splits(
        i in fixture_index(),
        a in vector(4),
        b in vector(4),
        axis in 0usize..4,
        frac in 1i64..8,
    ) {
        let p = fixture(i);
        let n = p.dim();
        let region = box_from(&QVector(a.0[..n].iter().map(|x| x / rat(8)).collect()),
                              &QVector(b.0[..n].iter().map(|x| x / rat(8)).collect()));
        prop_assume!(region.is_some());
        let region = region.unwrap();
        let axis = axis % n;
        let at = &region.lower[axis] + (&region.upper[axis] - &region.lower[axis]) * ratio(frac, 8);
        let (left, right) = region.split(axis, &at);
        let whole = exact_volume(&clip(p.halfspaces(), &region));
        let parts = exact_volume(&clip(p.halfspaces(), &left)) + exact_volume(&clip(p.halfspaces(), &right));
        prop_assert_eq!(&whole, &parts);
        let bg = brianchon_gram(&p);
        prop_assert_eq!(signed_volume(&bg, &left) + signed_volume(&bg, &right), signed_volume(&bg, &region));
        prop_assert_eq!(signed_volume(&bg, &region), whole);
    }

    #[test]
    fn volume_is_translation_invariant_and_scales(i in fixture_index(), raw in vector(4), k in 1i64..4) {
        let p = fixture(i);
        let n = p.dim();
        let t = QVector(raw.0[..n].to_vec());
        let region = p.bounding_box(&rat(1));
        let moved = AxisBox::new(region.lower.add(&t), region.upper.add(&t));
        prop_assert_eq!(
            exact_volume(&clip(&translate(p.halfspaces(), &t), &moved)),
            p.volume()
        );
        let k = rat(k);
        let scaled_box = AxisBox::new(region.lower.scale(&k), region.upper.scale(&k));
        let factor = (0..n).fold(rat(1), |acc, _| acc * &k);
        prop_assert_eq!(
            exact_volume(&clip(&scale(p.halfspaces(), &k), &scaled_box)),
            p.volume() * factor
        );
    }

    #[test]
    fn brianchon_gram_holds_at_arbitrary_points(i in fixture_index(), raw in vector(4)) {
        let p = fixture(i);
        let x = QVector(raw.0[..p.dim()].iter().map(|v| v / rat(10)).collect());
        prop_assert_eq!(indicator_sum(&brianchon_gram(&p), &x), i64::from(p.contains(&x)));
    }
}

#[test]
fn faces_match_subset_enumeration() {
    // A subset S of half-spaces is a face iff the barycenter of the vertices
    // lying on every member of S is tight on exactly S.
    for (name, p) in fixtures::bounded_fixtures()
        .into_iter()
        .filter(|(_, p)| p.halfspaces().len() <= 10)
    {
        let m = p.halfspaces().len();
        let mut expected = BTreeSet::new();
        for mask in 0..1u32 << m {
            let sub: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).collect();
            let on: Vec<&QVector> = p
                .vertices()
                .iter()
                .map(|v| &v.point)
                .filter(|x| sub.iter().all(|&i| p.halfspaces()[i].slack(x) == rat(0)))
                .collect();
            if on.is_empty() {
                continue;
            }
            let center = QVector::barycenter(on);
            let tight: Vec<usize> = (0..m)
                .filter(|&i| p.halfspaces()[i].slack(&center) == rat(0))
                .collect();
            if tight == sub {
                expected.insert(sub);
            }
        }
        let got: BTreeSet<Vec<usize>> = p.faces().iter().map(|f| f.active.clone()).collect();
        assert_eq!(got, expected, "{name}");
    }
}

#[test]
fn truncated_prism_has_no_admissible_center_in_the_search_box() {
    use polydecomp::taming::check_assumption;
    let p = fixtures::bounded_fixtures().pop().unwrap().1;
    assert!(admissible_center(&p).is_none());
    let region = p.bounding_box(&rat(2));
    for c in sample_points(&region, 2000, 5).unwrap() {
        assert!(check_assumption(&p, &c).iter().any(|a| !a.pass), "{c:?}");
    }
}
