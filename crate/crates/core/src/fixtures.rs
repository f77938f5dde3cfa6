//! Standard test polytopes: intervals, cubes, simplices, products and seeded
//! vertex truncations.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::geometry::{HalfSpace, SimplePolytope};
use crate::linalg;
use crate::rational::{rat, ratio, QVector, Rational};

/// `[-1, 1]`.
pub fn interval() -> SimplePolytope {
    SimplePolytope::new(
        1,
        vec![
            HalfSpace::from_ints(&[-1], rat(1)),
            HalfSpace::from_ints(&[1], rat(1)),
        ],
    )
    .expect("interval")
}

/// `[0, 1]^n`, half-spaces ordered `-x_0 <= 0, x_0 <= 1, -x_1 <= 0, ...`.
pub fn cube(n: usize) -> SimplePolytope {
    let mut hs = Vec::with_capacity(2 * n);
    for i in 0..n {
        let e = QVector::unit(n, i);
        hs.push(HalfSpace::new(e.neg(), rat(0)));
        hs.push(HalfSpace::new(e, rat(1)));
    }
    SimplePolytope::new(n, hs).expect("cube")
}

pub fn unit_square() -> SimplePolytope {
    cube(2)
}

/// `{x >= 0, sum x <= 1}`.
pub fn standard_simplex(n: usize) -> SimplePolytope {
    let mut hs: Vec<HalfSpace> = (0..n)
        .map(|i| HalfSpace::new(QVector::unit(n, i).neg(), rat(0)))
        .collect();
    hs.push(HalfSpace::new(QVector(vec![rat(1); n]), rat(1)));
    SimplePolytope::new(n, hs).expect("simplex")
}

/// Cartesian product; half-spaces of `p` first, then those of `q`.
pub fn product(p: &SimplePolytope, q: &SimplePolytope) -> SimplePolytope {
    let (n, m) = (p.dim(), q.dim());
    let mut hs = Vec::new();
    for h in p.halfspaces() {
        let mut a = h.normal.0.clone();
        a.extend(std::iter::repeat_n(Rational::zero(), m));
        hs.push(HalfSpace::new(QVector(a), h.offset.clone()));
    }
    for h in q.halfspaces() {
        let mut a = vec![Rational::zero(); n];
        a.extend(h.normal.0.iter().cloned());
        hs.push(HalfSpace::new(QVector(a), h.offset.clone()));
    }
    SimplePolytope::new(n + m, hs).expect("product of simple polytopes is simple")
}

/// Cuts off vertex `vertex_id` by the hyperplane through the points at
/// fractions `depths[k]` of the way along each incident edge.
pub fn truncate_vertex(
    p: &SimplePolytope,
    vertex_id: usize,
    depths: &[Rational],
) -> Option<SimplePolytope> {
    let q = &p.vertices()[vertex_id].point;
    let edges = p.edge_directions(vertex_id);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for ((_, g), depth) in edges.iter().zip(depths) {
        // Largest step along g that stays in the polytope.
        let reach = p
            .halfspaces()
            .iter()
            .filter(|h| h.normal.dot(g).is_positive())
            .map(|h| h.slack(q) / h.normal.dot(g))
            .min()?;
        rows.push(g.clone());
        rhs.push(-(depth * &reach).recip());
    }
    let row_refs: Vec<&QVector> = rows.iter().collect();
    let normal = linalg::solve(&row_refs, &rhs)?;
    let offset = normal.dot(q) - Rational::one();
    let mut hs = p.halfspaces().to_vec();
    hs.push(HalfSpace::new(normal, offset));
    SimplePolytope::new(p.dim(), hs).ok()
}

/// A seeded vertex truncation of `base` with depths drawn from
/// `{1/5, 3/10, 2/5, 1/2}`.
pub fn random_truncation(base: &SimplePolytope, seed: u64) -> SimplePolytope {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    loop {
        let v = rng.random_range(0..base.vertices().len());
        let depths: Vec<Rational> = (0..base.dim())
            .map(|_| ratio(rng.random_range(2..=5), 10))
            .collect();
        if let Some(p) = truncate_vertex(base, v, &depths) {
            return p;
        }
    }
}

/// Named bounded fixtures used across the verification suites.
pub fn bounded_fixtures() -> Vec<(&'static str, SimplePolytope)> {
    let triangle = standard_simplex(2);
    vec![
        ("interval", interval()),
        ("triangle", triangle.clone()),
        ("square", unit_square()),
        ("simplex3", standard_simplex(3)),
        ("cube3", cube(3)),
        ("cube4", cube(4)),
        ("prism", product(&triangle, &interval())),
        ("truncated-triangle", random_truncation(&triangle, 11)),
        (
            "truncated-simplex3",
            random_truncation(&standard_simplex(3), 12),
        ),
        (
            "truncated-prism",
            random_truncation(&product(&triangle, &interval()), 13),
        ),
    ]
}
