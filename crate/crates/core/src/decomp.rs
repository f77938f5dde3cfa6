//! Tangent cones and the three signed decompositions of a simple polytope.
//!
//! Every decomposition is a list of closed polyhedral cells with signs. The
//! Brianchon-Gram decomposition has one tangent cone per face with sign
//! `(-1)^dim F`. The Lawrence-Varchenko decomposition has one vertex cone per
//! vertex, with the edges that pair negatively with a polarizing vector `eta`
//! flipped. The norm-square decomposition for a center `c` has one cell per
//! face: the tangent cone with its normal generators flipped wherever they
//! pair negatively with the gradient `2 (x_F - c)` of `|x - c|^2` at the
//! face's critical point `x_F`.

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{contains_all, Face, HalfSpace, SimplePolytope};
use crate::linalg;
use crate::lp::{LinearProgram, Relation};
use crate::rational::{rat, QVector, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentCone {
    pub face: Vec<usize>,
    /// Active half-spaces of the face; empty means all of R^n.
    pub halfspaces: Vec<HalfSpace>,
    pub apex_witness: QVector,
}

impl TangentCone {
    pub fn contains(&self, x: &QVector) -> bool {
        contains_all(&self.halfspaces, x)
    }
}

pub fn tangent_cone(p: &SimplePolytope, face: &Face) -> TangentCone {
    TangentCone {
        face: face.active.clone(),
        halfspaces: face
            .active
            .iter()
            .map(|&i| p.halfspaces()[i].clone())
            .collect(),
        apex_witness: face.witness.clone(),
    }
}

/// Decides `x ∈ {w + λ (y - w) : y ∈ Δ, λ >= 0}` for the face witness `w`
/// by an exact feasibility LP in `(z = λ y, λ)`. Independent of the
/// active-set description of the cone.
pub fn tangent_cone_contains_by_definition(p: &SimplePolytope, face: &Face, x: &QVector) -> bool {
    let n = p.dim();
    let w = &face.witness;
    // variables: z+ (n), z- (n), λ
    let mut lp = LinearProgram::new(2 * n + 1);
    for h in p.halfspaces() {
        let mut row: Vec<Rational> = h.normal.0.clone();
        row.extend(h.normal.0.iter().map(|a| -a));
        row.push(-h.offset.clone());
        lp.add(row, Relation::Le, Rational::zero());
    }
    for i in 0..n {
        let mut row = vec![Rational::zero(); 2 * n + 1];
        row[i] = rat(1);
        row[n + i] = rat(-1);
        row[2 * n] = -w[i].clone();
        lp.add(row, Relation::Eq, &x[i] - &w[i]);
    }
    lp.is_feasible()
}

/// The `n` edge directions at a vertex, pointing into the polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeFrame {
    pub vertex_id: usize,
    /// Active half-space index dropped to obtain each generator.
    pub dropped: Vec<usize>,
    pub generators: Vec<QVector>,
}

pub fn edge_frame(p: &SimplePolytope, vertex_id: usize) -> EdgeFrame {
    let (dropped, generators) = p.edge_directions(vertex_id).into_iter().unzip();
    EdgeFrame {
        vertex_id,
        dropped,
        generators,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProvenanceKind {
    Face,
    Vertex,
}

/// Which face (or vertex) a cell came from, keyed by its active set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: ProvenanceKind,
    pub active: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SignedCell {
    pub provenance: Provenance,
    pub sign: i8,
    pub flip_count: usize,
    /// Per polarized generator (in active-index order), whether it was
    /// flipped. Empty for Brianchon-Gram cells.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flips: Vec<bool>,
    pub halfspaces: Vec<HalfSpace>,
}

impl SignedCell {
    pub fn contains(&self, x: &QVector) -> bool {
        contains_all(&self.halfspaces, x)
    }
}

fn parity_sign(count: usize) -> i8 {
    if count.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DecompositionKind {
    /// Brianchon-Gram. The center is only recorded when the decomposition was
    /// induced by a negative norm-square; the cells do not depend on it.
    Bg {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<QVector>,
    },
    Lv {
        eta: QVector,
    },
    Witten {
        center: QVector,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub dim: usize,
    #[serde(flatten)]
    pub kind: DecompositionKind,
    pub cells: Vec<SignedCell>,
}

impl Decomposition {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            DecompositionKind::Bg { .. } => "bg",
            DecompositionKind::Lv { .. } => "lv",
            DecompositionKind::Witten { .. } => "witten",
        }
    }
}

/// Signed count of cells containing `x` (closed cells).
pub fn indicator_sum(d: &Decomposition, x: &QVector) -> i64 {
    d.cells
        .iter()
        .filter(|c| c.contains(x))
        .map(|c| c.sign as i64)
        .sum()
}

/// H-representation of `apex + span(free) + cone(constrained)` where `basis`
/// is a basis of R^n and `constrained[k]` says whether `basis[k]` carries a
/// nonnegativity constraint. Rows come from inverting the basis matrix.
pub fn cone_from_basis(apex: &QVector, basis: &[QVector], constrained: &[bool]) -> Vec<HalfSpace> {
    let n = apex.dim();
    assert_eq!(basis.len(), n);
    let columns_as_rows: Vec<QVector> = (0..n)
        .map(|i| QVector(basis.iter().map(|g| g[i].clone()).collect()))
        .collect();
    let inv = linalg::inverse(&columns_as_rows).expect("frame is a basis");
    inv.into_iter()
        .zip(constrained)
        .filter(|(_, &c)| c)
        .map(|(row, _)| {
            // <row, x - apex> >= 0
            let offset = -row.dot(apex);
            HalfSpace::new(row.neg(), offset)
        })
        .collect()
}

pub fn brianchon_gram(p: &SimplePolytope) -> Decomposition {
    let cells = p
        .faces()
        .iter()
        .map(|f| SignedCell {
            provenance: Provenance {
                kind: ProvenanceKind::Face,
                active: f.active.clone(),
            },
            sign: parity_sign(f.dim),
            flip_count: f.dim,
            flips: Vec::new(),
            halfspaces: tangent_cone(p, f).halfspaces,
        })
        .collect();
    Decomposition {
        dim: p.dim(),
        kind: DecompositionKind::Bg { center: None },
        cells,
    }
}

fn lv_cell(p: &SimplePolytope, vertex_id: usize, eta: &QVector) -> Result<SignedCell> {
    let frame = edge_frame(p, vertex_id);
    let mut flips = Vec::with_capacity(frame.generators.len());
    let mut polarized = Vec::with_capacity(frame.generators.len());
    for g in &frame.generators {
        let pairing = eta.dot(g);
        if pairing.is_zero() {
            return Err(Error::GenericityFailure {
                vertex: vertex_id,
                edge: g.clone(),
            });
        }
        let flip = pairing.is_negative();
        flips.push(flip);
        polarized.push(if flip { g.neg() } else { g.clone() });
    }
    let vertex = &p.vertices()[vertex_id];
    let flip_count = flips.iter().filter(|&&f| f).count();
    Ok(SignedCell {
        provenance: Provenance {
            kind: ProvenanceKind::Vertex,
            active: vertex.active.clone(),
        },
        sign: parity_sign(flip_count),
        flip_count,
        flips,
        halfspaces: cone_from_basis(&vertex.point, &polarized, &vec![true; p.dim()]),
    })
}

pub fn lawrence_varchenko(p: &SimplePolytope, eta: &QVector) -> Result<Decomposition> {
    if eta.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: eta.dim(),
        });
    }
    let cells = (0..p.vertices().len())
        .into_par_iter()
        .map(|v| lv_cell(p, v, eta))
        .collect::<Result<Vec<_>>>()?;
    Ok(Decomposition {
        dim: p.dim(),
        kind: DecompositionKind::Lv { eta: eta.clone() },
        cells,
    })
}

/// Faces whose closest point to `c` (within the affine hull) is outside the
/// relative interior.
pub fn assumption_failures(p: &SimplePolytope, c: &QVector) -> Vec<Vec<usize>> {
    p.faces()
        .iter()
        .filter(|f| !p.relint_contains(f, &p.affine_projection(f, c)))
        .map(|f| f.active.clone())
        .collect()
}

/// The norm-square cell of `face`, built from the frame at `vertex_id` (which
/// must lie on the face).
pub fn witten_cell(
    p: &SimplePolytope,
    face: &Face,
    c: &QVector,
    vertex_id: usize,
) -> Result<SignedCell> {
    debug_assert!(face.vertex_ids.contains(&vertex_id));
    let critical = p.affine_projection(face, c);
    let gradient = critical.sub(c).scale(&rat(2));
    let frame = edge_frame(p, vertex_id);
    let mut basis = Vec::with_capacity(p.dim());
    let mut constrained = Vec::with_capacity(p.dim());
    let mut flips = Vec::new();
    for (k, g) in frame.dropped.iter().zip(&frame.generators) {
        if face.active.binary_search(k).is_err() {
            // Direction inside the face.
            basis.push(g.clone());
            constrained.push(false);
            continue;
        }
        let pairing = gradient.dot(g);
        if pairing.is_zero() {
            return Err(Error::DegeneratePairing {
                face: face.active.clone(),
                generator: g.clone(),
            });
        }
        let flip = pairing.is_negative();
        flips.push(flip);
        basis.push(if flip { g.neg() } else { g.clone() });
        constrained.push(true);
    }
    let flip_count = flips.iter().filter(|&&f| f).count();
    let apex = &p.vertices()[vertex_id].point;
    Ok(SignedCell {
        provenance: Provenance {
            kind: ProvenanceKind::Face,
            active: face.active.clone(),
        },
        sign: parity_sign(flip_count),
        flip_count,
        flips,
        halfspaces: cone_from_basis(apex, &basis, &constrained),
    })
}

pub fn witten(p: &SimplePolytope, c: &QVector) -> Result<Decomposition> {
    if c.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: c.dim(),
        });
    }
    let failures = assumption_failures(p, c);
    if !failures.is_empty() {
        return Err(Error::AssumptionViolated(failures));
    }
    let cells = p
        .faces()
        .faces
        .par_iter()
        .map(|f| witten_cell(p, f, c, f.vertex_ids[0]))
        .collect::<Result<Vec<_>>>()?;
    Ok(Decomposition {
        dim: p.dim(),
        kind: DecompositionKind::Witten { center: c.clone() },
        cells,
    })
}
