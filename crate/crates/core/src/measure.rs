//! Signed piecewise-Lebesgue measures and the verification harness.
//!
//! Box indicators serve as test functions: a decomposition is checked by
//! comparing `Σ sign · vol(cell ∩ B)` with `vol(Δ ∩ B)` exactly on seeded
//! random boxes, and pointwise by comparing signed indicator counts with the
//! indicator of the polytope.
//!
//! Randomness comes from `Xoshiro256PlusPlus` seeded through SplitMix64
//! (`seed_from_u64`). Sample coordinates are snapped to the grid
//! `Z / 2^16`, which keeps exact clipping cheap and makes points on facet
//! spans exactly detectable.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{indicator_sum, Decomposition};
use crate::error::{Error, Result};
use crate::geometry::{clip, exact_volume, AxisBox, HalfSpace, SimplePolytope};
use crate::rational::{serde_rational, QVector, Rational};

pub const SNAP_DENOMINATOR: i64 = 1 << 16;
pub const MIN_MONTE_CARLO_SAMPLES: usize = 1000;

/// A finite signed sum of Lebesgue measures restricted to closed polyhedra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLebesgue {
    pub cells: Vec<(Vec<HalfSpace>, i8)>,
}

impl PiecewiseLebesgue {
    pub fn evaluate(&self, region: &AxisBox) -> Rational {
        self.cells.iter().fold(Rational::zero(), |acc, (hs, sign)| {
            let v = exact_volume(&clip(hs, region));
            if *sign > 0 {
                acc + v
            } else {
                acc - v
            }
        })
    }
}

impl From<&Decomposition> for PiecewiseLebesgue {
    fn from(d: &Decomposition) -> Self {
        PiecewiseLebesgue {
            cells: d
                .cells
                .iter()
                .map(|c| (c.halfspaces.clone(), c.sign))
                .collect(),
        }
    }
}

pub fn signed_volume(d: &Decomposition, region: &AxisBox) -> Rational {
    PiecewiseLebesgue::from(d).evaluate(region)
}

fn snapped_coordinate(
    rng: &mut Xoshiro256PlusPlus,
    lower: &Rational,
    upper: &Rational,
) -> Rational {
    let den = BigInt::from(SNAP_DENOMINATOR);
    let scaled = Rational::from_integer(den.clone());
    let lo: BigInt = (lower * &scaled).floor().to_integer() + 1;
    let hi: BigInt = (upper * &scaled).ceil().to_integer() - 1;
    let lo = lo.to_i64().expect("box fits the sampling grid");
    let hi = hi.to_i64().expect("box fits the sampling grid");
    assert!(lo <= hi, "box too thin for the sampling grid");
    Rational::new(BigInt::from(rng.random_range(lo..=hi)), den)
}

fn snapped_point(rng: &mut Xoshiro256PlusPlus, region: &AxisBox) -> QVector {
    QVector(
        region
            .lower
            .iter()
            .zip(region.upper.iter())
            .map(|(l, u)| snapped_coordinate(rng, l, u))
            .collect(),
    )
}

/// `count` points strictly inside `region` with denominators dividing 2^16.
pub fn sample_points(region: &AxisBox, count: usize, seed: u64) -> Result<Vec<QVector>> {
    if count == 0 {
        return Err(Error::Usage("sample count must be at least 1".into()));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| snapped_point(&mut rng, region))
        .collect())
}

/// `count` boxes spanned by pairs of snapped points; zero-width pairs are
/// resampled.
pub fn sample_boxes(region: &AxisBox, count: usize, seed: u64) -> Result<Vec<AxisBox>> {
    if count == 0 {
        return Err(Error::Usage("box count must be at least 1".into()));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = snapped_point(&mut rng, region);
        let b = snapped_point(&mut rng, region);
        if a.iter().zip(b.iter()).any(|(x, y)| x == y) {
            continue;
        }
        let (lower, upper): (Vec<Rational>, Vec<Rational>) = a
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
        out.push(AxisBox::new(QVector(lower), QVector(upper)));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Pointwise,
    Measure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sample {
    Point(QVector),
    Box(AxisBox),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub sample: Sample,
    #[serde(with = "serde_rational")]
    pub expected: Rational,
    #[serde(with = "serde_rational")]
    pub got: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub kind: ReportKind,
    pub decomposition: String,
    pub seed: u64,
    /// Random samples drawn.
    pub samples: usize,
    /// Deterministic boundary probes evaluated in addition to the samples.
    pub probes: usize,
    pub passed: bool,
    pub failures: Vec<Failure>,
    /// Wall time; kept out of the document so reports stay byte-stable.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Fraction of evaluated samples that failed.
    pub fn failure_rate(&self) -> f64 {
        self.failures.len() as f64 / (self.samples + self.probes) as f64
    }
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Vertices, edge midpoints and face witnesses.
pub fn boundary_probes(p: &SimplePolytope) -> Vec<QVector> {
    let mut probes: Vec<QVector> = p.vertices().iter().map(|v| v.point.clone()).collect();
    for f in p.faces().iter().filter(|f| f.dim == 1) {
        let a = &p.vertices()[f.vertex_ids[0]].point;
        let b = &p.vertices()[f.vertex_ids[1]].point;
        probes.push(QVector::barycenter([a, b]));
    }
    probes.extend(p.faces().iter().map(|f| f.witness.clone()));
    probes
}

/// Checks `indicator_sum(d, x) = 1_Δ(x)` on seeded points from the doubled
/// bounding box. With `avoid_facet_spans`, points on any facet span are
/// resampled; otherwise boundary probes are added.
pub fn verify_pointwise(
    p: &SimplePolytope,
    d: &Decomposition,
    n_points: usize,
    seed: u64,
    avoid_facet_spans: bool,
) -> Result<VerificationReport> {
    let start = Instant::now();
    if n_points == 0 {
        return Err(Error::Usage("point count must be at least 1".into()));
    }
    let region = p.bounding_box(&int(2));
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_points);
    while points.len() < n_points {
        let x = snapped_point(&mut rng, &region);
        if avoid_facet_spans && p.on_facet_span(&x) {
            continue;
        }
        points.push(x);
    }
    let probes = if avoid_facet_spans {
        Vec::new()
    } else {
        boundary_probes(p)
    };
    let n_probes = probes.len();
    points.extend(probes);
    let failures: Vec<Failure> = points
        .par_iter()
        .filter_map(|x| {
            let expected = i64::from(p.contains(x));
            let got = indicator_sum(d, x);
            (expected != got).then(|| Failure {
                sample: Sample::Point(x.clone()),
                expected: int(expected),
                got: int(got),
            })
        })
        .collect();
    Ok(VerificationReport {
        kind: ReportKind::Pointwise,
        decomposition: d.kind_name().to_string(),
        seed,
        samples: n_points,
        probes: n_probes,
        passed: failures.is_empty(),
        failures,
        elapsed: start.elapsed(),
    })
}

/// Checks `signed_volume(d, B) = vol(Δ ∩ B)` exactly on seeded boxes.
pub fn verify_measure(
    p: &SimplePolytope,
    d: &Decomposition,
    n_boxes: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let boxes = sample_boxes(&p.bounding_box(&int(2)), n_boxes, seed)?;
    let measure = PiecewiseLebesgue::from(d);
    let failures: Vec<Failure> = boxes
        .par_iter()
        .filter_map(|b| {
            let expected = exact_volume(&clip(p.halfspaces(), b));
            let got = measure.evaluate(b);
            (expected != got).then(|| Failure {
                sample: Sample::Box(b.clone()),
                expected,
                got,
            })
        })
        .collect();
    Ok(VerificationReport {
        kind: ReportKind::Measure,
        decomposition: d.kind_name().to_string(),
        seed,
        samples: n_boxes,
        probes: 0,
        passed: failures.is_empty(),
        failures,
        elapsed: start.elapsed(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub sigma: f64,
}

/// Hit-or-miss volume of `halfspaces ∩ region` in floating point: hit
/// fraction times box volume, with the binomial standard error.
pub fn monte_carlo_volume(
    halfspaces: &[HalfSpace],
    region: &AxisBox,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples < MIN_MONTE_CARLO_SAMPLES {
        return Err(Error::Usage(format!(
            "Monte-Carlo needs at least {MIN_MONTE_CARLO_SAMPLES} samples"
        )));
    }
    let rows: Vec<(Vec<f64>, f64)> = halfspaces
        .iter()
        .map(|h| (h.normal.to_f64(), crate::rational::to_f64(&h.offset)))
        .collect();
    let lower = region.lower.to_f64();
    let upper = region.upper.to_f64();
    let box_volume = crate::rational::to_f64(&region.volume());
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut x = vec![0.0; lower.len()];
    let mut hits = 0usize;
    for _ in 0..samples {
        for (xi, (l, u)) in x.iter_mut().zip(lower.iter().zip(&upper)) {
            *xi = rng.random_range(*l..*u);
        }
        if rows
            .iter()
            .all(|(a, b)| a.iter().zip(&x).map(|(ai, xi)| ai * xi).sum::<f64>() <= *b)
        {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    Ok(MonteCarloEstimate {
        estimate: frac * box_volume,
        sigma: (frac * (1.0 - frac) / samples as f64).sqrt() * box_volume,
    })
}
