//! Taming maps on a momentum polytope: per-face critical points of a linear
//! or (negative) norm-square function, admissible centers, dual edge frames
//! and Morse data.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::decomp::{brianchon_gram, lawrence_varchenko, witten, Decomposition, DecompositionKind};
use crate::error::{Error, Result};
use crate::geometry::{Face, SimplePolytope};
use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::{rat, serde_rational, QVector, Rational};

/// The function `rho` on the polytope whose differential defines the taming
/// map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rho", rename_all = "lowercase")]
pub enum TamingSpec {
    /// `rho(x) = <x, eta>`: constant taming map `eta`.
    Linear { eta: QVector },
    /// `rho(x) = |x - c|^2`.
    #[serde(rename = "normsq")]
    NormSquare { center: QVector },
    /// `rho(x) = -|x - c|^2`.
    #[serde(rename = "negnormsq")]
    NegNormSquare { center: QVector },
}

impl TamingSpec {
    pub fn parameter(&self) -> &QVector {
        match self {
            TamingSpec::Linear { eta } => eta,
            TamingSpec::NormSquare { center } | TamingSpec::NegNormSquare { center } => center,
        }
    }

    pub fn evaluate(&self, x: &QVector) -> Rational {
        match self {
            TamingSpec::Linear { eta } => eta.dot(x),
            TamingSpec::NormSquare { center } => x.sub(center).norm_sq(),
            TamingSpec::NegNormSquare { center } => -x.sub(center).norm_sq(),
        }
    }

    fn validate(&self, p: &SimplePolytope) -> Result<()> {
        let v = self.parameter();
        if v.dim() != p.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                got: v.dim(),
            });
        }
        if matches!(self, TamingSpec::Linear { .. }) && v.is_zero() {
            return Err(Error::Usage("linear taming vector must be nonzero".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalizingComponent {
    pub face: Vec<usize>,
    pub dim: usize,
    pub critical_point: QVector,
    #[serde(with = "serde_rational")]
    pub critical_value: Rational,
    pub in_relint: bool,
    /// Every relative-interior point of the face is critical (a linear `rho`
    /// constant on a positive-dimensional face).
    #[serde(default)]
    pub non_isolated: bool,
}

fn orthogonal_to_face(p: &SimplePolytope, face: &Face, v: &QVector) -> bool {
    let mut rows: Vec<QVector> = face
        .active
        .iter()
        .map(|&i| p.halfspaces()[i].normal.clone())
        .collect();
    let base = rows.len();
    rows.push(v.clone());
    linalg::rank(&rows) == base
}

pub fn localizing_set(p: &SimplePolytope, spec: &TamingSpec) -> Result<Vec<LocalizingComponent>> {
    spec.validate(p)?;
    let out = match spec {
        TamingSpec::Linear { eta } => p
            .faces()
            .iter()
            .filter(|f| orthogonal_to_face(p, f, eta))
            .map(|f| LocalizingComponent {
                face: f.active.clone(),
                dim: f.dim,
                critical_point: f.witness.clone(),
                critical_value: spec.evaluate(&f.witness),
                in_relint: true,
                non_isolated: f.dim > 0,
            })
            .collect(),
        TamingSpec::NormSquare { center } | TamingSpec::NegNormSquare { center } => p
            .faces()
            .iter()
            .map(|f| {
                let x = p.affine_projection(f, center);
                LocalizingComponent {
                    face: f.active.clone(),
                    dim: f.dim,
                    critical_value: spec.evaluate(&x),
                    in_relint: p.relint_contains(f, &x),
                    critical_point: x,
                    non_isolated: false,
                }
            })
            .collect(),
    };
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AssumptionCheck {
    pub face: Vec<usize>,
    pub projection: QVector,
    pub pass: bool,
}

/// Whether the closest point of each face's affine hull to `c` lies in the
/// face's relative interior.
pub fn check_assumption(p: &SimplePolytope, c: &QVector) -> Vec<AssumptionCheck> {
    p.faces()
        .iter()
        .map(|f| {
            let x = p.affine_projection(f, c);
            AssumptionCheck {
                face: f.active.clone(),
                pass: p.relint_contains(f, &x),
                projection: x,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleCenter {
    pub center: QVector,
    #[serde(with = "serde_rational")]
    pub margin: Rational,
}

/// Maximizes a uniform margin `t` by which every face projection of `c`
/// clears the inactive constraints, `c` ranging over the bounding box
/// inflated twice. `None` when the optimum is not positive: no admissible
/// center inside that box.
pub fn admissible_center(p: &SimplePolytope) -> Option<AdmissibleCenter> {
    let n = p.dim();
    let region = p.bounding_box(&rat(2));
    // variables: c' = c - lower (n), t+, t-
    let width = n + 2;
    let mut rows: std::collections::BTreeSet<(Vec<Rational>, Rational)> = Default::default();
    for face in p.faces().iter().filter(|f| f.dim >= 1) {
        let (m, shift) = p.projection_map(face);
        for (j, h) in p.halfspaces().iter().enumerate() {
            if face.active.binary_search(&j).is_ok() {
                continue;
            }
            // <a, M c + shift> + t |a|_1 <= b
            let w: Vec<Rational> = (0..n)
                .map(|k| (0..n).fold(Rational::zero(), |acc, i| acc + &h.normal[i] * &m[i][k]))
                .collect();
            let w = QVector(w);
            let rhs = &h.offset - h.normal.dot(&shift) - w.dot(&region.lower);
            let weight = h.normal.l1();
            let mut row = w.0;
            row.push(weight.clone());
            row.push(-weight);
            rows.insert((row, rhs));
        }
    }
    let mut lp = LinearProgram::new(width);
    for (row, rhs) in rows {
        lp.add(row, Relation::Le, rhs);
    }
    for k in 0..n {
        let mut row = vec![Rational::zero(); width];
        row[k] = rat(1);
        lp.add(row, Relation::Le, &region.upper[k] - &region.lower[k]);
    }
    let mut objective = vec![Rational::zero(); width];
    objective[n] = rat(1);
    objective[n + 1] = rat(-1);
    lp.objective = objective;
    match lp.solve() {
        LpOutcome::Optimal { x, value } if value.is_positive() => {
            let center = QVector((0..n).map(|k| &x[k] + &region.lower[k]).collect());
            Some(AdmissibleCenter {
                center,
                margin: value,
            })
        }
        _ => None,
    }
}

/// For each active index `j` of the face, the primitive vector `xi_j` in the
/// face's normal space with `<a_j, xi_j> < 0` and `<a_i, xi_j> = 0` for the
/// other active `i`. At a vertex these are the edge directions.
pub fn dual_edge_frame(p: &SimplePolytope, face: &Face) -> Vec<(usize, QVector)> {
    let normals: Vec<QVector> = face
        .active
        .iter()
        .map(|&i| p.halfspaces()[i].normal.clone())
        .collect();
    let gram: Vec<QVector> = normals
        .iter()
        .map(|a| QVector(normals.iter().map(|b| a.dot(b)).collect()))
        .collect();
    let Some(ginv) = linalg::inverse(&gram) else {
        return Vec::new();
    };
    face.active
        .iter()
        .enumerate()
        .map(|(r, &j)| {
            // xi = -sum_s ginv[r][s] a_s satisfies <a_i, xi> = -delta_ij.
            let xi = normals
                .iter()
                .zip(ginv[r].iter())
                .fold(QVector::zeros(p.dim()), |acc, (a, g)| acc.sub(&a.scale(g)));
            (j, xi.primitive().0)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseEntry {
    pub active: Vec<usize>,
    pub point: QVector,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
}

/// A point in each face with a value that strictly increases towards
/// subfaces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseData {
    pub faces: Vec<MorseEntry>,
}

impl MorseData {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn get(&self, active: &[usize]) -> Option<&MorseEntry> {
        self.faces.iter().find(|e| e.active == active)
    }
}

/// Witness points with `alpha = codim`.
pub fn morse_data(p: &SimplePolytope) -> MorseData {
    MorseData {
        faces: p
            .faces()
            .iter()
            .map(|f| MorseEntry {
                active: f.active.clone(),
                point: f.witness.clone(),
                alpha: rat(f.codim() as i64),
            })
            .collect(),
    }
}

/// Critical points of `|x - c|^2` on each face with their values.
pub fn morse_data_from_center(p: &SimplePolytope, c: &QVector) -> MorseData {
    MorseData {
        faces: p
            .faces()
            .iter()
            .map(|f| {
                let x = p.affine_projection(f, c);
                MorseEntry {
                    active: f.active.clone(),
                    alpha: x.sub(c).norm_sq(),
                    point: x,
                }
            })
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "camelCase")]
pub enum MorseViolation {
    MissingFace {
        face: Vec<usize>,
    },
    UnknownFace {
        face: Vec<usize>,
    },
    NotInRelativeInterior {
        face: Vec<usize>,
    },
    NotIncreasing {
        face: Vec<usize>,
        subface: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseReport {
    pub ok: bool,
    pub violations: Vec<MorseViolation>,
}

/// Checks `x_F ∈ relint F` for every face and `alpha_F < alpha_G` whenever
/// `G` is a proper subface of `F`. For norm-square data the relint condition
/// is also the uniqueness certificate: a strictly convex quadratic has one
/// critical point on each affine hull.
pub fn verify_morse_data(p: &SimplePolytope, data: &MorseData) -> MorseReport {
    let mut violations = Vec::new();
    for e in &data.faces {
        if p.faces().get(&e.active).is_none() {
            violations.push(MorseViolation::UnknownFace {
                face: e.active.clone(),
            });
        }
    }
    for f in p.faces().iter() {
        match data.get(&f.active) {
            None => violations.push(MorseViolation::MissingFace {
                face: f.active.clone(),
            }),
            Some(e) => {
                if e.point.dim() != p.dim() || !p.relint_contains(f, &e.point) {
                    violations.push(MorseViolation::NotInRelativeInterior {
                        face: f.active.clone(),
                    });
                }
            }
        }
    }
    for (i, j) in p.faces().proper_subface_pairs() {
        let (f, g) = (&p.faces().faces[i], &p.faces().faces[j]);
        if let (Some(ef), Some(eg)) = (data.get(&f.active), data.get(&g.active)) {
            if ef.alpha >= eg.alpha {
                violations.push(MorseViolation::NotIncreasing {
                    face: f.active.clone(),
                    subface: g.active.clone(),
                });
            }
        }
    }
    MorseReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// Linear -> Lawrence-Varchenko, norm-square -> Witten, negative norm-square
/// -> Brianchon-Gram.
pub fn induced_decomposition(p: &SimplePolytope, spec: &TamingSpec) -> Result<Decomposition> {
    spec.validate(p)?;
    match spec {
        TamingSpec::Linear { eta } => lawrence_varchenko(p, eta),
        TamingSpec::NormSquare { center } => witten(p, center),
        TamingSpec::NegNormSquare { center } => {
            let mut d = brianchon_gram(p);
            d.kind = DecompositionKind::Bg {
                center: Some(center.clone()),
            };
            Ok(d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::edge_frame;
    use crate::fixtures;
    use crate::rational::ratio;

    fn half_half() -> QVector {
        QVector(vec![ratio(1, 2), ratio(1, 2)])
    }

    #[test]
    fn linear_localizes_to_vertices() {
        let sq = fixtures::unit_square();
        let comps = localizing_set(
            &sq,
            &TamingSpec::Linear {
                eta: QVector::from_ints(&[1, 2]),
            },
        )
        .unwrap();
        assert_eq!(comps.len(), 4);
        assert!(comps.iter().all(|c| c.dim == 0 && !c.non_isolated));

        let comps = localizing_set(
            &sq,
            &TamingSpec::Linear {
                eta: QVector::from_ints(&[0, 1]),
            },
        )
        .unwrap();
        assert_eq!(comps.len(), 6);
        let flagged: Vec<&Vec<usize>> = comps
            .iter()
            .filter(|c| c.non_isolated)
            .map(|c| &c.face)
            .collect();
        // horizontal edges: -y <= 0 (2) and y <= 1 (3)
        assert_eq!(flagged, vec![&vec![2], &vec![3]]);
    }

    #[test]
    fn norm_square_values() {
        let sq = fixtures::unit_square();
        let comps = localizing_set(
            &sq,
            &TamingSpec::NormSquare {
                center: half_half(),
            },
        )
        .unwrap();
        assert_eq!(comps.len(), 9);
        assert!(comps.iter().all(|c| c.in_relint));
        for c in &comps {
            let expected = match c.dim {
                2 => rat(0),
                1 => ratio(1, 4),
                _ => ratio(1, 2),
            };
            assert_eq!(c.critical_value, expected);
        }
        let neg = localizing_set(
            &sq,
            &TamingSpec::NegNormSquare {
                center: half_half(),
            },
        )
        .unwrap();
        assert_eq!(neg[8].critical_value, ratio(-1, 2));
    }

    #[test]
    fn assumption_examples() {
        let sq = fixtures::unit_square();
        assert!(check_assumption(&sq, &half_half()).iter().all(|c| c.pass));
        let checks = check_assumption(&sq, &QVector(vec![rat(2), ratio(1, 2)]));
        assert!(!checks[0].pass);
        let right = checks.iter().find(|c| c.face == vec![1]).unwrap();
        assert!(right.pass);
        assert_eq!(right.projection, QVector(vec![rat(1), ratio(1, 2)]));
        assert!(checks.iter().filter(|c| c.face.len() == 2).all(|c| c.pass));

        let tri = fixtures::standard_simplex(2);
        let checks = check_assumption(&tri, &QVector::from_ints(&[2, 2]));
        let x_axis = checks.iter().find(|c| c.face == vec![1]).unwrap();
        assert!(!x_axis.pass);
        assert_eq!(x_axis.projection, QVector::from_ints(&[2, 0]));
    }

    #[test]
    fn admissible_centers() {
        let sq = fixtures::unit_square();
        let a = admissible_center(&sq).unwrap();
        assert_eq!(a.center, half_half());
        assert_eq!(a.margin, ratio(1, 2));

        let iv = fixtures::interval();
        let a = admissible_center(&iv).unwrap();
        assert_eq!(a.center, QVector::from_ints(&[0]));
        assert_eq!(a.margin, rat(1));

        for p in [fixtures::standard_simplex(2), fixtures::standard_simplex(3)] {
            let a = admissible_center(&p).unwrap();
            assert!(a.margin.is_positive());
            assert!(check_assumption(&p, &a.center).iter().all(|c| c.pass));
        }
    }

    #[test]
    fn dual_frames() {
        let sq = fixtures::unit_square();
        let origin = sq.faces().get(&[0, 2]).unwrap();
        assert_eq!(
            dual_edge_frame(&sq, origin),
            vec![
                (0, QVector::from_ints(&[1, 0])),
                (2, QVector::from_ints(&[0, 1]))
            ]
        );
        let bottom = sq.faces().get(&[2]).unwrap();
        assert_eq!(
            dual_edge_frame(&sq, bottom),
            vec![(2, QVector::from_ints(&[0, 1]))]
        );

        // 2-simplex vertex (1,0): active -y <= 0 (1) and x + y <= 1 (2).
        let tri = fixtures::standard_simplex(2);
        let v = tri.faces().get(&[1, 2]).unwrap();
        assert_eq!(
            dual_edge_frame(&tri, v),
            vec![
                (1, QVector::from_ints(&[-1, 1])),
                (2, QVector::from_ints(&[-1, 0]))
            ]
        );
    }

    #[test]
    fn dual_frames_match_edge_frames_at_vertices() {
        for (_, p) in fixtures::bounded_fixtures() {
            for vid in 0..p.vertices().len() {
                let frame = edge_frame(&p, vid);
                let dual = dual_edge_frame(&p, p.vertex_face(vid));
                for ((j, xi), (k, g)) in
                    dual.iter().zip(frame.dropped.iter().zip(&frame.generators))
                {
                    assert_eq!(j, k);
                    // both primitive and same orientation -> equal
                    assert_eq!(xi, g);
                }
            }
        }
    }

    #[test]
    fn morse_examples() {
        let sq = fixtures::unit_square();
        let data = morse_data(&sq);
        assert_eq!(data.faces[0].alpha, rat(0));
        assert!(data.faces[1..5].iter().all(|e| e.alpha == rat(1)));
        assert!(data.faces[5..].iter().all(|e| e.alpha == rat(2)));
        assert!(verify_morse_data(&sq, &data).ok);

        let mut bad = data.clone();
        for e in bad.faces.iter_mut().filter(|e| e.active.len() == 2) {
            e.alpha = rat(1);
        }
        let report = verify_morse_data(&sq, &bad);
        assert!(!report.ok);
        assert!(report
            .violations
            .iter()
            .all(|v| matches!(v, MorseViolation::NotIncreasing { .. })));

        let centered = morse_data_from_center(&sq, &half_half());
        assert!(verify_morse_data(&sq, &centered).ok);

        let iv = fixtures::interval();
        let d = morse_data(&iv);
        assert_eq!(d.faces[0].point, QVector::from_ints(&[0]));
        assert_eq!(d.faces[0].alpha, rat(0));
        assert_eq!(d.faces[1].alpha, rat(1));
        assert_eq!(morse_data(&fixtures::standard_simplex(3)).faces.len(), 15);
    }

    #[test]
    fn morse_data_json_round_trip() {
        let sq = fixtures::unit_square();
        let d = morse_data_from_center(&sq, &half_half());
        assert_eq!(MorseData::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn induced_dispatch() {
        let iv = fixtures::interval();
        let lv = induced_decomposition(
            &iv,
            &TamingSpec::Linear {
                eta: QVector::from_ints(&[1]),
            },
        )
        .unwrap();
        assert_eq!(lv.kind_name(), "lv");
        let w = induced_decomposition(
            &iv,
            &TamingSpec::NormSquare {
                center: QVector::zeros(1),
            },
        )
        .unwrap();
        assert_eq!(w.kind_name(), "witten");
        let b1 = induced_decomposition(
            &iv,
            &TamingSpec::NegNormSquare {
                center: QVector::zeros(1),
            },
        )
        .unwrap();
        let b2 = induced_decomposition(
            &iv,
            &TamingSpec::NegNormSquare {
                center: QVector::from_ints(&[5]),
            },
        )
        .unwrap();
        assert_eq!(b1.cells, b2.cells);
        assert_eq!(b1.cells, brianchon_gram(&iv).cells);
        assert!(induced_decomposition(
            &iv,
            &TamingSpec::Linear {
                eta: QVector::zeros(1)
            }
        )
        .is_err());
    }

    #[test]
    fn spec_json_tags() {
        let s: TamingSpec =
            serde_json::from_str(r#"{"rho": "normsq", "center": ["1/2", 0]}"#).unwrap();
        assert_eq!(
            s,
            TamingSpec::NormSquare {
                center: QVector(vec![ratio(1, 2), rat(0)])
            }
        );
    }
}
