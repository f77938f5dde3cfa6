//! Exact polyhedral primitives: half-spaces, simple polytopes and their face
//! lattices, orthogonal projection onto face affine hulls, box clipping and
//! exact volume.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::{format_rational, parse_rational, rat, QVector, Rational};

/// `{x : <normal, x> <= offset}` with a primitive integer normal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "HalfSpaceRecord", into = "HalfSpaceRecord")]
pub struct HalfSpace {
    pub normal: QVector,
    pub offset: Rational,
}

impl HalfSpace {
    /// Canonicalizes to a primitive integer normal (positive rescaling keeps
    /// the orientation). Panics on a zero normal.
    pub fn new(normal: QVector, offset: Rational) -> Self {
        assert!(!normal.is_zero(), "half-space with zero normal");
        let (normal, factor) = normal.primitive();
        HalfSpace {
            normal,
            offset: offset * factor,
        }
    }

    pub fn from_ints(normal: &[i64], offset: Rational) -> Self {
        Self::new(QVector::from_ints(normal), offset)
    }

    /// `offset - <normal, x>`; nonnegative exactly on the half-space.
    pub fn slack(&self, x: &QVector) -> Rational {
        &self.offset - self.normal.dot(x)
    }

    pub fn contains(&self, x: &QVector) -> bool {
        !self.slack(x).is_negative()
    }

    /// The closed opposite half-space `{<normal, x> >= offset}`.
    pub fn flipped(&self) -> HalfSpace {
        HalfSpace {
            normal: self.normal.neg(),
            offset: -self.offset.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }
}

pub fn contains_all(halfspaces: &[HalfSpace], x: &QVector) -> bool {
    halfspaces.iter().all(|h| h.contains(x))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub point: QVector,
    /// Sorted indices of the half-spaces tight at this vertex.
    pub active: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub active: Vec<usize>,
    pub dim: usize,
    pub vertex_ids: Vec<usize>,
    /// Vertex barycenter; lies in the relative interior.
    pub witness: QVector,
}

impl Face {
    pub fn codim(&self) -> usize {
        self.active.len()
    }

    pub fn is_vertex(&self) -> bool {
        self.dim == 0
    }
}

/// All nonempty faces, ordered by `(|active|, active)`: the full polytope
/// first, vertices last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceLattice {
    pub faces: Vec<Face>,
    index: BTreeMap<Vec<usize>, usize>,
}

impl FaceLattice {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn get(&self, active: &[usize]) -> Option<&Face> {
        self.index.get(active).map(|&i| &self.faces[i])
    }

    pub fn id_of(&self, active: &[usize]) -> Option<usize> {
        self.index.get(active).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter()
    }

    /// Face counts keyed by dimension.
    pub fn f_vector(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for f in &self.faces {
            *counts.entry(f.dim).or_insert(0) += 1;
        }
        counts
    }

    /// `(F, G)` index pairs with `G` a proper subface of `F`.
    pub fn proper_subface_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (i, f) in self.faces.iter().enumerate() {
            for (j, g) in self.faces.iter().enumerate() {
                if g.active.len() > f.active.len() && f.active.iter().all(|a| g.active.contains(a))
                {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }
}

/// A bounded, full-dimensional, simple polytope given by irredundant
/// half-spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplePolytope {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
    vertices: Vec<Vertex>,
    faces: FaceLattice,
}

impl SimplePolytope {
    /// Validates and builds the polytope. Half-spaces are canonicalized but
    /// keep their input order, so indices in errors refer to the input list.
    pub fn new(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self> {
        for (i, h) in halfspaces.iter().enumerate() {
            if h.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: h.dim(),
                });
            }
            if h.normal.is_zero() {
                return Err(Error::ZeroNormal(i));
            }
        }
        let halfspaces: Vec<HalfSpace> = halfspaces
            .into_iter()
            .map(|h| HalfSpace::new(h.normal, h.offset))
            .collect();
        if dim == 0 {
            return Err(Error::NotFullDimensional);
        }
        for (i, h) in halfspaces.iter().enumerate() {
            if halfspaces[..i].contains(h) {
                return Err(Error::RedundantHalfSpace(i));
            }
        }
        if halfspaces.len() < dim + 1 || !recession_cone_is_trivial(dim, &halfspaces) {
            return Err(Error::Unbounded);
        }
        if !has_interior_point(dim, &halfspaces) {
            return Err(Error::NotFullDimensional);
        }
        let vertices = enumerate_vertices(&halfspaces, dim)?;
        for i in 0..halfspaces.len() {
            let on_facet: Vec<&QVector> = vertices
                .iter()
                .filter(|v| v.active.contains(&i))
                .map(|v| &v.point)
                .collect();
            if linalg::affine_dim(&on_facet) != dim as isize - 1 {
                return Err(Error::RedundantHalfSpace(i));
            }
        }
        let faces = enumerate_faces(dim, &vertices);
        Ok(SimplePolytope {
            dim,
            halfspaces,
            vertices,
            faces,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn faces(&self) -> &FaceLattice {
        &self.faces
    }

    pub fn full_face(&self) -> &Face {
        &self.faces.faces[0]
    }

    pub fn contains(&self, x: &QVector) -> bool {
        contains_all(&self.halfspaces, x)
    }

    /// True when `x` lies on the affine span of some facet.
    pub fn on_facet_span(&self, x: &QVector) -> bool {
        self.halfspaces.iter().any(|h| h.slack(x).is_zero())
    }

    /// The 0-dimensional face of a vertex.
    pub fn vertex_face(&self, vertex_id: usize) -> &Face {
        self.faces
            .get(&self.vertices[vertex_id].active)
            .expect("every vertex is a face")
    }

    /// Edge directions at a vertex: for each active index `k`, the primitive
    /// direction keeping the other active constraints tight and strictly
    /// decreasing constraint `k`. Ordered by `k`.
    pub fn edge_directions(&self, vertex_id: usize) -> Vec<(usize, QVector)> {
        let active = &self.vertices[vertex_id].active;
        active
            .iter()
            .map(|&k| {
                let rows: Vec<QVector> = active
                    .iter()
                    .filter(|&&i| i != k)
                    .map(|&i| self.halfspaces[i].normal.clone())
                    .collect();
                let ns = linalg::nullspace(&rows, self.dim);
                debug_assert_eq!(ns.len(), 1, "simple vertex has 1-dimensional edge space");
                let mut g = ns.into_iter().next().expect("edge direction").primitive().0;
                if self.halfspaces[k].normal.dot(&g).is_positive() {
                    g = g.neg();
                }
                (k, g)
            })
            .collect()
    }

    pub fn relint_contains(&self, face: &Face, x: &QVector) -> bool {
        self.halfspaces.iter().enumerate().all(|(i, h)| {
            let s = h.slack(x);
            if face.active.binary_search(&i).is_ok() {
                s.is_zero()
            } else {
                s.is_positive()
            }
        })
    }

    /// Orthogonal projection of `c` onto the affine hull of `face`.
    pub fn affine_projection(&self, face: &Face, c: &QVector) -> QVector {
        let (m, t) = self.projection_map(face);
        apply_affine(&m, &t, c)
    }

    /// The projection onto `aff(face)` as an affine map `c -> M c + t`.
    pub fn projection_map(&self, face: &Face) -> (Vec<QVector>, QVector) {
        let n = self.dim;
        let rows: Vec<&QVector> = face
            .active
            .iter()
            .map(|&i| &self.halfspaces[i].normal)
            .collect();
        let mut m: Vec<QVector> = (0..n).map(|i| QVector::unit(n, i)).collect();
        let mut t = QVector::zeros(n);
        if rows.is_empty() {
            return (m, t);
        }
        let gram: Vec<QVector> = rows
            .iter()
            .map(|a| QVector(rows.iter().map(|b| a.dot(b)).collect()))
            .collect();
        let ginv = linalg::inverse(&gram).expect("active normals are independent");
        // M = I - A^T G^{-1} A, t = A^T G^{-1} lambda
        let k = rows.len();
        let lambda: Vec<&Rational> = face
            .active
            .iter()
            .map(|&i| &self.halfspaces[i].offset)
            .collect();
        for r in 0..k {
            for s in 0..k {
                let g = &ginv[r][s];
                if g.is_zero() {
                    continue;
                }
                for (i, mi) in m.iter_mut().enumerate() {
                    let ai = &rows[r][i] * g;
                    if ai.is_zero() {
                        continue;
                    }
                    for (j, x) in mi.0.iter_mut().enumerate() {
                        *x -= &ai * &rows[s][j];
                    }
                    t.0[i] += &ai * lambda[s];
                }
            }
        }
        (m, t)
    }

    pub fn bounding_box(&self, inflate: &Rational) -> AxisBox {
        let points: Vec<&QVector> = self.vertices.iter().map(|v| &v.point).collect();
        bounding_box_of(&points, inflate)
    }

    pub fn volume(&self) -> Rational {
        let b = self.bounding_box(&rat(1));
        exact_volume(&clip(&self.halfspaces, &b))
    }

    pub fn to_document(&self) -> PolytopeDocument {
        PolytopeDocument::from_halfspaces(self.dim, &self.halfspaces)
    }
}

fn apply_affine(m: &[QVector], t: &QVector, c: &QVector) -> QVector {
    QVector(
        m.iter()
            .zip(&t.0)
            .map(|(row, ti)| row.dot(c) + ti)
            .collect(),
    )
}

/// Bounded iff the normals positively span: rank n and some strictly
/// positive combination vanishes.
fn recession_cone_is_trivial(n: usize, halfspaces: &[HalfSpace]) -> bool {
    let normals: Vec<QVector> = halfspaces.iter().map(|h| h.normal.clone()).collect();
    if linalg::rank(&normals) < n {
        return false;
    }
    // y_i >= 1, sum_i y_i a_i = 0
    let mut lp = LinearProgram::new(halfspaces.len());
    for coord in 0..n {
        lp.add(
            normals.iter().map(|a| a[coord].clone()).collect(),
            Relation::Eq,
            Rational::zero(),
        );
    }
    for i in 0..halfspaces.len() {
        let mut row = vec![Rational::zero(); halfspaces.len()];
        row[i] = Rational::one();
        lp.add(row, Relation::Ge, Rational::one());
    }
    lp.is_feasible()
}

/// Maximizes `t` subject to `A x + t <= b`, `t <= 1`, with `x` split into
/// positive and negative parts.
fn has_interior_point(n: usize, halfspaces: &[HalfSpace]) -> bool {
    let mut lp = LinearProgram::new(2 * n + 1);
    for h in halfspaces {
        let mut row: Vec<Rational> = h.normal.0.clone();
        row.extend(h.normal.0.iter().map(|a| -a));
        row.push(Rational::one());
        lp.add(row, Relation::Le, h.offset.clone());
    }
    let mut cap = vec![Rational::zero(); 2 * n + 1];
    cap[2 * n] = Rational::one();
    lp.add(cap.clone(), Relation::Le, Rational::one());
    lp.objective = cap;
    matches!(lp.solve(), LpOutcome::Optimal { value, .. } if value.is_positive())
}

/// All points where some `n` half-spaces with independent normals meet and
/// every constraint holds, each with its full tight set. No simplicity check.
pub fn vertices_of(halfspaces: &[HalfSpace], n: usize) -> Vec<(QVector, Vec<usize>)> {
    let mut found: BTreeSet<QVector> = BTreeSet::new();
    for subset in (0..halfspaces.len()).combinations(n) {
        let rows: Vec<&QVector> = subset.iter().map(|&i| &halfspaces[i].normal).collect();
        let rhs: Vec<Rational> = subset
            .iter()
            .map(|&i| halfspaces[i].offset.clone())
            .collect();
        let Some(x) = linalg::solve(&rows, &rhs) else {
            continue;
        };
        if found.contains(&x) || !contains_all(halfspaces, &x) {
            continue;
        }
        found.insert(x);
    }
    found
        .into_iter()
        .map(|x| {
            let tight = halfspaces
                .iter()
                .enumerate()
                .filter(|(_, h)| h.slack(&x).is_zero())
                .map(|(i, _)| i)
                .collect();
            (x, tight)
        })
        .collect()
}

/// Vertices sorted by active set; errors with `NotSimple` on any vertex with
/// more than `n` tight constraints.
pub fn enumerate_vertices(halfspaces: &[HalfSpace], n: usize) -> Result<Vec<Vertex>> {
    let mut vertices = Vec::new();
    for (point, active) in vertices_of(halfspaces, n) {
        if active.len() > n {
            return Err(Error::NotSimple {
                vertex: point,
                tight: active,
            });
        }
        vertices.push(Vertex { point, active });
    }
    vertices.sort_by(|a, b| a.active.cmp(&b.active));
    Ok(vertices)
}

pub fn enumerate_faces(n: usize, vertices: &[Vertex]) -> FaceLattice {
    let mut keys: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    for v in vertices {
        for k in 0..=v.active.len() {
            for subset in v.active.iter().copied().combinations(k) {
                keys.insert((subset.len(), subset));
            }
        }
    }
    let mut faces = Vec::with_capacity(keys.len());
    let mut index = BTreeMap::new();
    for (_, active) in keys {
        let vertex_ids: Vec<usize> = vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| active.iter().all(|a| v.active.binary_search(a).is_ok()))
            .map(|(i, _)| i)
            .collect();
        let witness = QVector::barycenter(vertex_ids.iter().map(|&i| &vertices[i].point));
        index.insert(active.clone(), faces.len());
        faces.push(Face {
            dim: n - active.len(),
            active,
            vertex_ids,
            witness,
        });
    }
    FaceLattice { faces, index }
}

/// Axis-aligned box with nonempty interior.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxisBox {
    pub lower: QVector,
    pub upper: QVector,
}

impl AxisBox {
    pub fn new(lower: QVector, upper: QVector) -> Self {
        assert_eq!(lower.dim(), upper.dim());
        assert!(
            lower.iter().zip(upper.iter()).all(|(l, u)| l < u),
            "box must have nonempty interior"
        );
        AxisBox { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn halfspaces(&self) -> Vec<HalfSpace> {
        let n = self.dim();
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            let e = QVector::unit(n, i);
            out.push(HalfSpace::new(e.neg(), -self.lower[i].clone()));
            out.push(HalfSpace::new(e, self.upper[i].clone()));
        }
        out
    }

    pub fn volume(&self) -> Rational {
        self.lower
            .iter()
            .zip(self.upper.iter())
            .fold(Rational::one(), |acc, (l, u)| acc * (u - l))
    }

    /// Splits along coordinate `axis` at `at`, which must lie strictly inside.
    pub fn split(&self, axis: usize, at: &Rational) -> (AxisBox, AxisBox) {
        let mut left_upper = self.upper.clone();
        left_upper.0[axis] = at.clone();
        let mut right_lower = self.lower.clone();
        right_lower.0[axis] = at.clone();
        (
            AxisBox::new(self.lower.clone(), left_upper),
            AxisBox::new(right_lower, self.upper.clone()),
        )
    }
}

/// Coordinate-wise bounds of `points`, each side scaled about its center by
/// `inflate`.
pub fn bounding_box_of(points: &[&QVector], inflate: &Rational) -> AxisBox {
    let n = points[0].dim();
    let mut lower = points[0].clone();
    let mut upper = points[0].clone();
    for p in points {
        for i in 0..n {
            if p[i] < lower[i] {
                lower.0[i] = p[i].clone();
            }
            if p[i] > upper[i] {
                upper.0[i] = p[i].clone();
            }
        }
    }
    let half = Rational::new(1.into(), 2.into());
    for i in 0..n {
        let center = (&lower[i] + &upper[i]) * &half;
        let radius = (&upper[i] - &lower[i]) * &half * inflate;
        lower.0[i] = &center - &radius;
        upper.0[i] = &center + &radius;
    }
    AxisBox { lower, upper }
}

/// A bounded intersection of half-spaces. May be empty, lower-dimensional or
/// non-simple.
#[derive(Clone, Debug)]
pub struct ClippedPolytope {
    pub dim: usize,
    pub halfspaces: Vec<HalfSpace>,
    pub vertices: Vec<QVector>,
    /// Per vertex, the sorted indices of tight half-spaces.
    pub incidence: Vec<Vec<usize>>,
}

impl ClippedPolytope {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn affine_dim(&self) -> isize {
        let pts: Vec<&QVector> = self.vertices.iter().collect();
        linalg::affine_dim(&pts)
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim() == self.dim as isize
    }
}

pub fn clip(halfspaces: &[HalfSpace], region: &AxisBox) -> ClippedPolytope {
    let n = region.dim();
    let mut all: Vec<HalfSpace> = Vec::with_capacity(halfspaces.len() + 2 * n);
    for h in halfspaces {
        let (mut lo, mut hi) = (Rational::zero(), Rational::zero());
        for ((a, l), u) in h
            .normal
            .iter()
            .zip(region.lower.iter())
            .zip(region.upper.iter())
        {
            if a.is_positive() {
                lo += a * l;
                hi += a * u;
            } else {
                lo += a * u;
                hi += a * l;
            }
        }
        if lo > h.offset {
            all.clear();
            all.push(h.clone());
            all.extend(region.halfspaces());
            return ClippedPolytope {
                dim: n,
                halfspaces: all,
                vertices: Vec::new(),
                incidence: Vec::new(),
            };
        }
        // Implied by the box.
        if hi > h.offset && !all.contains(h) {
            all.push(h.clone());
        }
    }
    let cuts = all.len();
    all.extend(region.halfspaces());
    let mut current = box_vertices(region, cuts);
    for (idx, h) in all.iter().enumerate().take(cuts) {
        current = cut(&all, n, current, idx, h);
        if current.is_empty() {
            break;
        }
    }
    let (vertices, incidence) = current
        .into_iter()
        .map(|(x, tight)| (x, tight.into_iter().collect()))
        .unzip();
    ClippedPolytope {
        dim: n,
        halfspaces: all,
        vertices,
        incidence,
    }
}

type Incident = (QVector, BTreeSet<usize>);

/// Corners of `region`; box constraint `2i` is `-x_i <= -lower_i`, `2i + 1`
/// is `x_i <= upper_i`, numbered from `offset`.
fn box_vertices(region: &AxisBox, offset: usize) -> Vec<Incident> {
    let n = region.dim();
    let mut out: BTreeMap<QVector, BTreeSet<usize>> = BTreeMap::new();
    let corners = (0..1usize << n).map(|mask| {
        let mut x = Vec::with_capacity(n);
        let mut tight = BTreeSet::new();
        for i in 0..n {
            if mask >> i & 1 == 1 {
                x.push(region.upper[i].clone());
                tight.insert(offset + 2 * i + 1);
            } else {
                x.push(region.lower[i].clone());
                tight.insert(offset + 2 * i);
            }
        }
        (QVector(x), tight)
    });
    for (x, tight) in corners {
        out.entry(x).or_default().extend(tight);
    }
    out.into_iter().collect()
}

/// One double-description step: intersects the polytope with vertex list
/// `vertices` (full incidence sets) with half-space `idx`.
fn cut(
    all: &[HalfSpace],
    n: usize,
    vertices: Vec<Incident>,
    idx: usize,
    h: &HalfSpace,
) -> Vec<Incident> {
    let slacks: Vec<Rational> = vertices.iter().map(|(x, _)| h.slack(x)).collect();
    if slacks.iter().all(|s| !s.is_negative()) {
        return vertices
            .into_iter()
            .zip(slacks)
            .map(|((x, mut t), s)| {
                if s.is_zero() {
                    t.insert(idx);
                }
                (x, t)
            })
            .collect();
    }
    let mut out: BTreeMap<QVector, BTreeSet<usize>> = BTreeMap::new();
    for (u, su) in vertices.iter().zip(&slacks) {
        if !su.is_negative() {
            continue;
        }
        for (w, sw) in vertices.iter().zip(&slacks) {
            if !sw.is_positive() {
                continue;
            }
            let common: BTreeSet<usize> = u.1.intersection(&w.1).copied().collect();
            if common.len() + 1 < n {
                continue;
            }
            if vertices
                .iter()
                .any(|z| !std::ptr::eq(z, u) && !std::ptr::eq(z, w) && common.is_subset(&z.1))
            {
                continue;
            }
            let rows: Vec<QVector> = common.iter().map(|&i| all[i].normal.clone()).collect();
            if n > 1 && linalg::rank(&rows) + 1 < n {
                continue;
            }
            let t = sw / (sw - su);
            let x = w.0.add(&u.0.sub(&w.0).scale(&t));
            let entry = out.entry(x).or_default();
            entry.extend(common);
            entry.insert(idx);
        }
    }
    for ((x, mut t), s) in vertices.into_iter().zip(slacks) {
        if s.is_negative() {
            continue;
        }
        if s.is_zero() {
            t.insert(idx);
        }
        out.entry(x).or_default().extend(t);
    }
    out.into_iter().collect()
}

/// Exact Lebesgue volume: fan triangulation from the lowest vertex over the
/// recursively triangulated facets that avoid it.
pub fn exact_volume(q: &ClippedPolytope) -> Rational {
    let n = q.dim;
    if q.vertices.len() <= n || !q.is_full_dimensional() {
        return Rational::zero();
    }
    let all: Vec<usize> = (0..q.vertices.len()).collect();
    let simplices = fan_triangulation(q, &all, n);
    let factorial: Rational = (1..=n as i64).fold(Rational::one(), |acc, k| acc * rat(k));
    let total = simplices.iter().fold(Rational::zero(), |acc, s| {
        let base = &q.vertices[s[0]];
        let rows: Vec<QVector> = s[1..].iter().map(|&i| q.vertices[i].sub(base)).collect();
        acc + linalg::determinant(&rows).abs()
    });
    total / factorial
}

/// Triangulates the face spanned by `face` (vertex ids, affine dimension `d`)
/// into `d`-simplices given as vertex-id lists.
fn fan_triangulation(q: &ClippedPolytope, face: &[usize], d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![vec![face[0]]];
    }
    let apex = face[0];
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    let constraints: BTreeSet<usize> = face
        .iter()
        .flat_map(|&v| q.incidence[v].iter().copied())
        .collect();
    for h in constraints {
        let sub: Vec<usize> = face
            .iter()
            .copied()
            .filter(|&v| q.incidence[v].binary_search(&h).is_ok())
            .collect();
        if sub.len() == face.len() || sub.len() < d || sub.contains(&apex) || seen.contains(&sub) {
            continue;
        }
        let pts: Vec<&QVector> = sub.iter().map(|&v| &q.vertices[v]).collect();
        if linalg::affine_dim(&pts) != d as isize - 1 {
            continue;
        }
        for mut simplex in fan_triangulation(q, &sub, d - 1) {
            simplex.insert(0, apex);
            out.push(simplex);
        }
        seen.insert(sub);
    }
    out
}

/// On-disk polytope description: `{"dim": n, "halfspaces": [{"a": [...], "b": ...}]}`
/// with rationals as integers or `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeDocument {
    pub dim: usize,
    pub halfspaces: Vec<HalfSpaceRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceRecord {
    pub a: Vec<Value>,
    pub b: Value,
}

pub fn scalar_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(num) => match (num.as_i64(), num.as_u64()) {
            (Some(i), _) => Ok(rat(i)),
            (None, Some(u)) => parse_rational(&u.to_string()),
            _ => Err(Error::MalformedRational(num.to_string())),
        },
        Value::String(s) => parse_rational(s),
        other => Err(Error::MalformedRational(other.to_string())),
    }
}

impl HalfSpaceRecord {
    pub fn from_halfspace(h: &HalfSpace) -> Self {
        HalfSpaceRecord {
            a: h.normal
                .iter()
                .map(|q| Value::String(format_rational(q)))
                .collect(),
            b: Value::String(format_rational(&h.offset)),
        }
    }

    pub fn to_halfspace(&self, index: usize) -> Result<HalfSpace> {
        let normal = QVector(self.a.iter().map(scalar_from_json).collect::<Result<_>>()?);
        let offset = scalar_from_json(&self.b)?;
        if normal.is_zero() {
            return Err(Error::ZeroNormal(index));
        }
        Ok(HalfSpace::new(normal, offset))
    }
}

impl From<HalfSpace> for HalfSpaceRecord {
    fn from(h: HalfSpace) -> Self {
        HalfSpaceRecord::from_halfspace(&h)
    }
}

impl TryFrom<HalfSpaceRecord> for HalfSpace {
    type Error = Error;

    fn try_from(r: HalfSpaceRecord) -> Result<Self> {
        r.to_halfspace(0)
    }
}

impl PolytopeDocument {
    pub fn from_halfspaces(dim: usize, halfspaces: &[HalfSpace]) -> Self {
        PolytopeDocument {
            dim,
            halfspaces: halfspaces
                .iter()
                .map(HalfSpaceRecord::from_halfspace)
                .collect(),
        }
    }

    pub fn to_halfspaces(&self) -> Result<Vec<HalfSpace>> {
        self.halfspaces
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if r.a.len() != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        got: r.a.len(),
                    });
                }
                r.to_halfspace(i)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

pub fn parse_polytope(doc: &PolytopeDocument) -> Result<SimplePolytope> {
    SimplePolytope::new(doc.dim, doc.to_halfspaces()?)
}

pub fn parse_polytope_str(text: &str) -> Result<SimplePolytope> {
    let doc: PolytopeDocument =
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
    parse_polytope(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::ratio;

    fn hs(a: &[i64], b: i64) -> HalfSpace {
        HalfSpace::from_ints(a, rat(b))
    }

    #[test]
    fn canonical_halfspace() {
        let h = HalfSpace::new(QVector(vec![ratio(1, 2), rat(1)]), rat(1));
        assert_eq!(h.normal, QVector::from_ints(&[1, 2]));
        assert_eq!(h.offset, rat(2));
        let h = HalfSpace::new(QVector::from_ints(&[-4, 6]), rat(3));
        assert_eq!(h.normal, QVector::from_ints(&[-2, 3]));
        assert_eq!(h.offset, ratio(3, 2));
    }

    #[test]
    fn square_and_triangle_counts() {
        let sq = fixtures::unit_square();
        assert_eq!(sq.vertices().len(), 4);
        assert_eq!(sq.faces().len(), 9);
        assert_eq!(
            sq.faces().f_vector(),
            BTreeMap::from([(0, 4), (1, 4), (2, 1)])
        );
        let pts: BTreeSet<QVector> = sq.vertices().iter().map(|v| v.point.clone()).collect();
        let expected: BTreeSet<QVector> = [[0, 0], [1, 0], [0, 1], [1, 1]]
            .iter()
            .map(|p| QVector::from_ints(p))
            .collect();
        assert_eq!(pts, expected);

        let tri = fixtures::standard_simplex(2);
        assert_eq!(tri.vertices().len(), 3);
        assert_eq!(
            tri.faces().f_vector(),
            BTreeMap::from([(0, 3), (1, 3), (2, 1)])
        );
        let tet = fixtures::standard_simplex(3);
        assert_eq!(
            tet.faces().f_vector(),
            BTreeMap::from([(0, 4), (1, 6), (2, 4), (3, 1)])
        );
        let cube = fixtures::cube(3);
        assert_eq!(cube.vertices().len(), 8);
        assert!(cube.vertices().iter().all(|v| v.active.len() == 3));
    }

    #[test]
    fn simplex_face_count_matches_subset_enumeration() {
        // Faces of the n-simplex: proper subsets of its n+1 facets, i.e.
        // 2^(n+1) - 1 index sets of size <= n.
        for n in 1..=4usize {
            let p = fixtures::standard_simplex(n);
            let brute = (0..=n)
                .map(|k| (0..n + 1).combinations(k).count())
                .sum::<usize>();
            assert_eq!(p.faces().len(), brute);
            assert_eq!(brute, (1 << (n + 1)) - 1);
        }
    }

    #[test]
    fn validation_errors() {
        let unbounded = SimplePolytope::new(1, vec![hs(&[-1], 0)]);
        assert_eq!(unbounded, Err(Error::Unbounded));
        let strip = SimplePolytope::new(2, vec![hs(&[0, -1], 0), hs(&[0, 1], 1), hs(&[-1, 0], 0)]);
        assert_eq!(strip, Err(Error::Unbounded));
        let flat = SimplePolytope::new(
            2,
            vec![
                hs(&[-1, 0], 0),
                hs(&[1, 0], 1),
                hs(&[0, -1], 0),
                hs(&[0, 1], 0),
            ],
        );
        assert_eq!(flat, Err(Error::NotFullDimensional));
        let empty = SimplePolytope::new(1, vec![hs(&[1], -1), hs(&[-1], 0)]);
        assert_eq!(empty, Err(Error::NotFullDimensional));

        let mut square = vec![
            hs(&[-1, 0], 0),
            hs(&[1, 0], 1),
            hs(&[0, -1], 0),
            hs(&[0, 1], 1),
        ];
        let mut cut = square.clone();
        cut.push(hs(&[1, 1], 1));
        // x + y <= 1 is not redundant: it cuts the square down to a triangle
        // whose corners (1,0) and (0,1) then sit on three lines.
        assert!(matches!(
            SimplePolytope::new(2, cut),
            Err(Error::NotSimple { .. })
        ));
        square.push(hs(&[1, 1], 3));
        assert_eq!(
            SimplePolytope::new(2, square),
            Err(Error::RedundantHalfSpace(4))
        );
    }

    #[test]
    fn redundancy_fixture_brute_force() {
        // Removing x + y <= 3 leaves the vertex set unchanged.
        let base = vec![
            hs(&[-1, 0], 0),
            hs(&[1, 0], 1),
            hs(&[0, -1], 0),
            hs(&[0, 1], 1),
        ];
        let mut with = base.clone();
        with.push(hs(&[1, 1], 3));
        let a: Vec<QVector> = vertices_of(&base, 2).into_iter().map(|v| v.0).collect();
        let b: Vec<QVector> = vertices_of(&with, 2).into_iter().map(|v| v.0).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn pyramid_is_not_simple() {
        // Square pyramid: base z >= 0 over [0,2]^2, apex (1,1,1) on four facets.
        let p = SimplePolytope::new(
            3,
            vec![
                hs(&[0, 0, -1], 0),
                hs(&[0, -1, 1], 0),
                hs(&[0, 1, 1], 2),
                hs(&[-1, 0, 1], 0),
                hs(&[1, 0, 1], 2),
            ],
        );
        match p {
            Err(Error::NotSimple { vertex, tight }) => {
                assert_eq!(vertex, QVector::from_ints(&[1, 1, 1]));
                assert_eq!(tight.len(), 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn relint_examples() {
        let sq = fixtures::unit_square();
        // halfspaces: 0: -x<=0, 1: x<=1, 2: -y<=0, 3: y<=1
        let bottom = sq.faces().get(&[2]).unwrap();
        assert!(sq.relint_contains(bottom, &QVector(vec![ratio(1, 2), rat(0)])));
        assert!(!sq.relint_contains(bottom, &QVector::from_ints(&[0, 0])));
        let full = sq.full_face();
        assert!(sq.relint_contains(full, &QVector(vec![ratio(1, 2), ratio(1, 2)])));
        for f in sq.faces().iter() {
            assert!(sq.relint_contains(f, &f.witness));
        }
    }

    #[test]
    fn projection_examples() {
        let sq = fixtures::unit_square();
        let c = QVector(vec![ratio(1, 2), ratio(1, 2)]);
        let bottom = sq.faces().get(&[2]).unwrap();
        assert_eq!(
            sq.affine_projection(bottom, &c),
            QVector(vec![ratio(1, 2), rat(0)])
        );
        let origin = sq.faces().get(&[0, 2]).unwrap();
        assert_eq!(
            sq.affine_projection(origin, &QVector::from_ints(&[7, -3])),
            QVector::from_ints(&[0, 0])
        );
        // Hypotenuse x + y = 1 of the 2-simplex; least squares by hand:
        // minimize x^2 + (1-x)^2 -> x = 1/2.
        let tri = fixtures::standard_simplex(2);
        let hyp = tri
            .faces()
            .iter()
            .find(|f| {
                f.dim == 1
                    && f.active
                        .iter()
                        .all(|&i| tri.halfspaces()[i].normal == QVector::from_ints(&[1, 1]))
            })
            .unwrap();
        assert_eq!(
            tri.affine_projection(hyp, &QVector::zeros(2)),
            QVector(vec![ratio(1, 2), ratio(1, 2)])
        );
    }

    #[test]
    fn clip_examples() {
        let square_box = AxisBox::new(QVector::from_ints(&[-1, -1]), QVector::from_ints(&[1, 1]));
        let quadrant = vec![hs(&[-1, 0], 0), hs(&[0, -1], 0)];
        let q = clip(&quadrant, &square_box);
        assert_eq!(q.vertices.len(), 4);
        assert_eq!(exact_volume(&q), rat(1));

        let unit = AxisBox::new(QVector::zeros(2), QVector::from_ints(&[1, 1]));
        let above = vec![hs(&[0, -1], -2)];
        let q = clip(&above, &unit);
        assert!(q.is_empty());
        assert_eq!(exact_volume(&q), rat(0));

        // {y >= x, y >= -x} in [-1,1]^2 is the triangle (0,0), (1,1), (-1,1).
        let vee = vec![hs(&[1, -1], 0), hs(&[-1, -1], 0)];
        let q = clip(&vee, &square_box);
        let pts: BTreeSet<QVector> = q.vertices.iter().cloned().collect();
        let expected: BTreeSet<QVector> = [[0, 0], [1, 1], [-1, 1]]
            .iter()
            .map(|p| QVector::from_ints(p))
            .collect();
        assert_eq!(pts, expected);
        assert_eq!(exact_volume(&q), rat(1));
    }

    #[test]
    fn incremental_clip_matches_subset_enumeration() {
        use crate::decomp::{brianchon_gram, lawrence_varchenko};
        for (_, p) in fixtures::bounded_fixtures()
            .into_iter()
            .filter(|(_, p)| p.dim() <= 3)
        {
            let n = p.dim();
            let eta = QVector((0..n).map(|i| rat([1, 3, 7][i])).collect());
            let mut cells: Vec<Vec<HalfSpace>> = brianchon_gram(&p)
                .cells
                .into_iter()
                .map(|c| c.halfspaces)
                .collect();
            cells.extend(
                lawrence_varchenko(&p, &eta)
                    .unwrap()
                    .cells
                    .into_iter()
                    .map(|c| c.halfspaces),
            );
            let boxes = [
                p.bounding_box(&rat(2)),
                AxisBox::new(QVector(vec![ratio(1, 3); n]), QVector(vec![ratio(7, 5); n])),
                AxisBox::new(QVector(vec![rat(-1); n]), QVector(vec![ratio(1, 2); n])),
            ];
            for hs in &cells {
                for b in &boxes {
                    let q = clip(hs, b);
                    let expected: BTreeSet<QVector> = vertices_of(&q.halfspaces, n)
                        .into_iter()
                        .map(|(x, _)| x)
                        .collect();
                    let got: BTreeSet<QVector> = q.vertices.iter().cloned().collect();
                    assert_eq!(got, expected);
                    for (x, inc) in q.vertices.iter().zip(&q.incidence) {
                        let tight: Vec<usize> = (0..q.halfspaces.len())
                            .filter(|&i| q.halfspaces[i].slack(x).is_zero())
                            .collect();
                        assert_eq!(inc, &tight);
                    }
                }
            }
        }
    }

    #[test]
    fn vee_area_grid_oracle() {
        // Midpoint grid counting on [-1,1]^2 converges to the area of the
        // clipped cone; the exact value must be within the boundary-cell bound.
        let k = 400i64;
        let mut hits = 0i64;
        for i in 0..k {
            for j in 0..k {
                let x = -1.0 + (2 * i + 1) as f64 / k as f64;
                let y = -1.0 + (2 * j + 1) as f64 / k as f64;
                if y >= x && y >= -x {
                    hits += 1;
                }
            }
        }
        let area = hits as f64 * 4.0 / (k * k) as f64;
        assert!((area - 1.0).abs() < 4.0 * 4.0 / k as f64);
    }

    #[test]
    fn lower_dimensional_clip_has_zero_volume() {
        let unit = AxisBox::new(QVector::zeros(2), QVector::from_ints(&[1, 1]));
        let line = vec![hs(&[0, 1], 0), hs(&[0, -1], 0)];
        let q = clip(&line, &unit);
        assert_eq!(q.vertices.len(), 2);
        assert_eq!(exact_volume(&q), rat(0));
    }

    #[test]
    fn simplex_volumes() {
        for n in 2..=4usize {
            let p = fixtures::standard_simplex(n);
            let fact: i64 = (1..=n as i64).product();
            assert_eq!(p.volume(), ratio(1, fact));
        }
        assert_eq!(fixtures::unit_square().volume(), rat(1));
    }

    #[test]
    fn bounding_box_examples() {
        let sq = fixtures::unit_square();
        assert_eq!(
            sq.bounding_box(&rat(1)),
            AxisBox::new(QVector::zeros(2), QVector::from_ints(&[1, 1]))
        );
        assert_eq!(
            sq.bounding_box(&rat(2)),
            AxisBox::new(
                QVector(vec![ratio(-1, 2), ratio(-1, 2)]),
                QVector(vec![ratio(3, 2), ratio(3, 2)])
            )
        );
        let iv = fixtures::interval();
        assert_eq!(
            iv.bounding_box(&rat(3)),
            AxisBox::new(QVector::from_ints(&[-3]), QVector::from_ints(&[3]))
        );
    }

    #[test]
    fn euler_relation_on_fixtures() {
        for (_, p) in fixtures::bounded_fixtures() {
            let chi: i64 = p
                .faces()
                .iter()
                .map(|f| if f.dim % 2 == 0 { 1 } else { -1 })
                .sum();
            assert_eq!(chi, 1);
        }
    }

    #[test]
    fn document_round_trip() {
        let text = r#"{"dim": 2, "halfspaces": [
            {"a": [-1, 0], "b": 0}, {"a": ["2", 0], "b": "2"},
            {"a": [0, "-1/3"], "b": 0}, {"a": [0, 1], "b": 1}]}"#;
        let p = parse_polytope_str(text).unwrap();
        let doc = p.to_document();
        let again = parse_polytope_str(&doc.to_json()).unwrap();
        assert_eq!(p, again);
        assert_eq!(doc, again.to_document());
        assert_eq!(doc.halfspaces[1].a[0], Value::String("1".into()));

        let bad = r#"{"dim": 1, "halfspaces": [{"a": [1], "b": "1/0"}, {"a": [-1], "b": 0}]}"#;
        assert!(matches!(
            parse_polytope_str(bad),
            Err(Error::MalformedRational(_))
        ));
        let float = r#"{"dim": 1, "halfspaces": [{"a": [1], "b": 0.5}, {"a": [-1], "b": 0}]}"#;
        assert!(matches!(
            parse_polytope_str(float),
            Err(Error::MalformedRational(_))
        ));
    }
}
