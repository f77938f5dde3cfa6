//! Command implementations for the `polydecomp` binary.
//!
//! Every command returns an [`Outcome`]: an exit code, the JSON payload for
//! standard output and diagnostic lines for standard error.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use polydecomp::decomp::{
    brianchon_gram, lawrence_varchenko, witten, Decomposition, DecompositionKind,
};
use polydecomp::geometry::{parse_polytope_str, HalfSpace};
use polydecomp::measure::{verify_measure, verify_pointwise, VerificationReport};
use polydecomp::rational::{format_rational, parse_rational, rat};
use polydecomp::taming::{
    admissible_center, induced_decomposition, localizing_set, morse_data, morse_data_from_center,
    verify_morse_data, MorseData, TamingSpec,
};
use polydecomp::{fixtures, Error, QVector, Rational, SimplePolytope};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

pub const DEFAULT_POINTS: usize = 1000;
pub const DEFAULT_BOXES: usize = 32;
pub const DEFAULT_SEED: u64 = 7;

/// Caps the verification thread pool when set to a positive integer.
pub const THREADS_ENV: &str = "POLYDECOMP_THREADS";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: Vec<String>,
}

impl Outcome {
    fn new(code: i32, payload: &impl Serialize) -> Self {
        Outcome {
            code,
            stdout: serde_json::to_string_pretty(payload).expect("serializable"),
            stderr: Vec::new(),
        }
    }

    fn with_note(mut self, line: impl Into<String>) -> Self {
        self.stderr.push(line.into());
        self
    }

    pub fn payload(&self) -> Value {
        serde_json::from_str(&self.stdout).expect("payload is JSON")
    }
}

impl From<Error> for Outcome {
    fn from(e: Error) -> Self {
        let code = if e.is_precondition() {
            EXIT_PRECONDITION
        } else {
            EXIT_INPUT_ERROR
        };
        let mut doc = json!({ "error": e.name(), "message": e.to_string() });
        match &e {
            Error::AssumptionViolated(faces) => doc["faces"] = json!(faces),
            Error::NotSimple { vertex, tight } => {
                doc["vertex"] = json!(vertex);
                doc["tight"] = json!(tight);
            }
            Error::GenericityFailure { vertex, edge } => {
                doc["vertex"] = json!(vertex);
                doc["edge"] = json!(edge);
            }
            _ => {}
        }
        Outcome::new(code, &doc).with_note(format!("error: {e}"))
    }
}

fn attempt(f: impl FnOnce() -> Result<Outcome, Error>) -> Outcome {
    f().unwrap_or_else(Outcome::from)
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Document(format!("{}: {e}", path.display())))
}

pub fn load_polytope(path: &Path) -> Result<SimplePolytope, Error> {
    parse_polytope_str(&read(path)?)
}

/// Clap value parser for exact rationals.
pub fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Bg,
    Lv,
    Witten,
}

impl std::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bg" => Ok(Kind::Bg),
            "lv" => Ok(Kind::Lv),
            "witten" => Ok(Kind::Witten),
            _ => Err(format!("unknown decomposition kind {s:?} (bg, lv, witten)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rho {
    Linear,
    NormSquare,
    NegNormSquare,
}

impl std::str::FromStr for Rho {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear" => Ok(Rho::Linear),
            "normsq" => Ok(Rho::NormSquare),
            "negnormsq" => Ok(Rho::NegNormSquare),
            _ => Err(format!(
                "unknown taming function {s:?} (linear, normsq, negnormsq)"
            )),
        }
    }
}

fn required(v: Option<Vec<Rational>>, flag: &str, what: &str) -> Result<QVector, Error> {
    v.map(QVector)
        .ok_or_else(|| Error::Usage(format!("{what} needs --{flag}")))
}

pub fn build_decomposition(
    p: &SimplePolytope,
    kind: Kind,
    eta: Option<Vec<Rational>>,
    center: Option<Vec<Rational>>,
) -> Result<Decomposition, Error> {
    match kind {
        Kind::Bg => Ok(brianchon_gram(p)),
        Kind::Lv => lawrence_varchenko(p, &required(eta, "eta", "lv")?),
        Kind::Witten => witten(p, &required(center, "center", "witten")?),
    }
}

pub fn taming_spec(
    rho: Rho,
    eta: Option<Vec<Rational>>,
    center: Option<Vec<Rational>>,
) -> Result<TamingSpec, Error> {
    Ok(match rho {
        Rho::Linear => TamingSpec::Linear {
            eta: required(eta, "eta", "linear")?,
        },
        Rho::NormSquare => TamingSpec::NormSquare {
            center: required(center, "center", "normsq")?,
        },
        Rho::NegNormSquare => TamingSpec::NegNormSquare {
            center: required(center, "center", "negnormsq")?,
        },
    })
}

fn f_vector(p: &SimplePolytope) -> Vec<usize> {
    let counts = p.faces().f_vector();
    (0..=p.dim())
        .map(|d| counts.get(&d).copied().unwrap_or(0))
        .collect()
}

pub fn cmd_check(path: &Path) -> Outcome {
    attempt(|| {
        let p = load_polytope(path)?;
        Ok(Outcome::new(
            EXIT_PASS,
            &json!({
                "valid": true,
                "dim": p.dim(),
                "halfspaces": p.halfspaces().len(),
                "vertices": p.vertices().len(),
                "fVector": f_vector(&p),
                "volume": format_rational(&p.volume()),
            }),
        ))
    })
}

pub fn cmd_faces(path: &Path) -> Outcome {
    attempt(|| {
        let p = load_polytope(path)?;
        let faces: Vec<Value> = p
            .faces()
            .iter()
            .map(|f| {
                json!({
                    "active": f.active,
                    "dim": f.dim,
                    "vertexIds": f.vertex_ids,
                    "witness": f.witness,
                })
            })
            .collect();
        let vertices: Vec<Value> = p
            .vertices()
            .iter()
            .map(|v| json!({ "point": v.point, "active": v.active }))
            .collect();
        Ok(Outcome::new(
            EXIT_PASS,
            &json!({ "count": faces.len(), "fVector": f_vector(&p), "vertices": vertices, "faces": faces }),
        ))
    })
}

pub fn cmd_decompose(
    path: &Path,
    kind: Kind,
    eta: Option<Vec<Rational>>,
    center: Option<Vec<Rational>>,
) -> Outcome {
    attempt(|| {
        let p = load_polytope(path)?;
        let d = build_decomposition(&p, kind, eta, center)?;
        Ok(Outcome {
            code: EXIT_PASS,
            stdout: d.to_json(),
            stderr: Vec::new(),
        })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyPayload {
    pub decomposition: String,
    pub passed: bool,
    pub pointwise: VerificationReport,
    pub measure: VerificationReport,
}

/// Points on facet spans are skipped for the polarized decompositions, whose
/// pointwise identity only holds off those hyperplanes.
pub fn avoids_spans(d: &Decomposition) -> bool {
    !matches!(d.kind, DecompositionKind::Bg { .. })
}

pub fn run_verification(
    p: &SimplePolytope,
    d: &Decomposition,
    points: usize,
    boxes: usize,
    seed: u64,
) -> Result<VerifyPayload, Error> {
    if d.dim != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: d.dim,
        });
    }
    let pointwise = verify_pointwise(p, d, points, seed, avoids_spans(d))?;
    let measure = verify_measure(p, d, boxes, seed)?;
    Ok(VerifyPayload {
        decomposition: d.kind_name().to_string(),
        passed: pointwise.passed && measure.passed,
        pointwise,
        measure,
    })
}

fn verification_outcome(payload: &VerifyPayload) -> Outcome {
    let code = if payload.passed {
        EXIT_PASS
    } else {
        EXIT_VERIFICATION_FAILED
    };
    let mut out = Outcome::new(code, payload);
    for r in [&payload.pointwise, &payload.measure] {
        out.stderr.push(format!(
            "{} {}: {} samples, {} probes, {} failures in {:.3}s",
            format!("{:?}", r.kind).to_lowercase(),
            r.decomposition,
            r.samples,
            r.probes,
            r.failures.len(),
            r.elapsed.as_secs_f64()
        ));
    }
    out
}

pub struct VerifyArgs {
    pub kind: Option<Kind>,
    pub eta: Option<Vec<Rational>>,
    pub center: Option<Vec<Rational>>,
    pub decomposition: Option<std::path::PathBuf>,
    pub points: usize,
    pub boxes: usize,
    pub seed: u64,
}

pub fn cmd_verify(path: &Path, args: VerifyArgs) -> Outcome {
    attempt(|| {
        let p = load_polytope(path)?;
        let d = match (&args.decomposition, args.kind) {
            (Some(file), _) => Decomposition::from_json(&read(file)?)?,
            (None, Some(kind)) => build_decomposition(&p, kind, args.eta, args.center)?,
            (None, None) => {
                return Err(Error::Usage(
                    "verify needs --kind or --decomposition".into(),
                ))
            }
        };
        let payload = run_verification(&p, &d, args.points, args.boxes, args.seed)?;
        Ok(verification_outcome(&payload))
    })
}

pub fn cmd_localize(
    path: &Path,
    rho: Rho,
    eta: Option<Vec<Rational>>,
    center: Option<Vec<Rational>>,
) -> Outcome {
    attempt(|| {
        let p = load_polytope(path)?;
        let spec = taming_spec(rho, eta, center)?;
        let components = localizing_set(&p, &spec)?;
        let mut out = Outcome::new(
            EXIT_PASS,
            &json!({ "taming": spec, "components": components }),
        );
        for c in components.iter().filter(|c| c.non_isolated) {
            out.stderr.push(format!(
                "warning: face {:?} is a non-isolated critical set; the taming vector is not generic",
                c.face
            ));
        }
        Ok(out)
    })
}

pub fn cmd_admissible_center(path: &Path) -> Outcome {
    attempt(|| {
        let p = load_polytope(path)?;
        Ok(match admissible_center(&p) {
            Some(a) => Outcome::new(
                EXIT_PASS,
                &json!({ "found": true, "center": a.center, "margin": format_rational(&a.margin) }),
            ),
            None => Outcome::new(
                EXIT_PASS,
                &json!({
                    "found": false,
                    "note": "no admissible center inside the bounding box inflated twice; this does not prove none exists",
                }),
            ),
        })
    })
}

pub fn cmd_morse_data(path: &Path, data: Option<&Path>, center: Option<Vec<Rational>>) -> Outcome {
    attempt(|| {
        let p = load_polytope(path)?;
        let data = match (data, center) {
            (Some(file), _) => MorseData::from_json(&read(file)?)?,
            (None, Some(c)) => {
                let c = QVector(c);
                if c.dim() != p.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: p.dim(),
                        got: c.dim(),
                    });
                }
                morse_data_from_center(&p, &c)
            }
            (None, None) => morse_data(&p),
        };
        let report = verify_morse_data(&p, &data);
        let code = if report.ok {
            EXIT_PASS
        } else {
            EXIT_VERIFICATION_FAILED
        };
        let mut out = Outcome::new(code, &json!({ "data": data, "report": report }));
        for v in &report.violations {
            out.stderr.push(format!(
                "violation: {}",
                serde_json::to_string(v).expect("serializable")
            ));
        }
        Ok(out)
    })
}

/// `[l, u]`, `[l, ∞)`, `(-∞, u]` or `ℝ` for a one-dimensional cell.
pub fn interval_notation(halfspaces: &[HalfSpace]) -> String {
    let mut lower: Option<Rational> = None;
    let mut upper: Option<Rational> = None;
    for h in halfspaces {
        let a = &h.normal[0];
        let bound = &h.offset / a;
        if a > &rat(0) {
            upper = Some(upper.map_or(bound.clone(), |u| u.min(bound)));
        } else {
            lower = Some(lower.map_or(bound.clone(), |l| l.max(bound)));
        }
    }
    match (lower, upper) {
        (None, None) => "ℝ".to_string(),
        (Some(l), None) => format!("[{}, ∞)", format_rational(&l)),
        (None, Some(u)) => format!("(-∞, {}]", format_rational(&u)),
        (Some(l), Some(u)) => format!("[{}, {}]", format_rational(&l), format_rational(&u)),
    }
}

/// Signed interval notation for every cell of a one-dimensional decomposition.
pub fn signed_cells(d: &Decomposition) -> Vec<String> {
    d.cells
        .iter()
        .map(|c| {
            format!(
                "{}{}",
                if c.sign > 0 { '+' } else { '-' },
                interval_notation(&c.halfspaces)
            )
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct S2Example {
    pub taming: TamingSpec,
    pub annotation: &'static str,
    pub cells: Vec<String>,
    pub decomposition: Decomposition,
    pub verification: VerifyPayload,
}

/// The height function of the round two-sphere under the rotation action:
/// momentum image `[-1, 1]`, decomposed by a linear, a norm-square and a
/// negative norm-square taming function.
pub fn example_s2() -> Result<Vec<S2Example>, Error> {
    let p = fixtures::interval();
    let zero = QVector::zeros(1);
    let cases = [
        (
            TamingSpec::Linear {
                eta: QVector::from_ints(&[1]),
            },
            "linear height function: polarized vertex rays (Lawrence-Varchenko)",
        ),
        (
            TamingSpec::NormSquare {
                center: zero.clone(),
            },
            "norm-square localization (Witten)",
        ),
        (
            TamingSpec::NegNormSquare { center: zero },
            "negative norm-square: tangent cones of all faces (Brianchon-Gram)",
        ),
    ];
    cases
        .into_iter()
        .map(|(taming, annotation)| {
            let decomposition = induced_decomposition(&p, &taming)?;
            let verification = run_verification(
                &p,
                &decomposition,
                DEFAULT_POINTS,
                DEFAULT_BOXES,
                DEFAULT_SEED,
            )?;
            Ok(S2Example {
                cells: signed_cells(&decomposition),
                taming,
                annotation,
                decomposition,
                verification,
            })
        })
        .collect()
}

pub fn cmd_example_s2() -> Outcome {
    attempt(|| {
        let examples = example_s2()?;
        let passed = examples.iter().all(|e| e.verification.passed);
        let code = if passed {
            EXIT_PASS
        } else {
            EXIT_VERIFICATION_FAILED
        };
        Ok(Outcome::new(
            code,
            &json!({ "polytope": fixtures::interval().to_document(), "passed": passed, "examples": examples }),
        ))
    })
}
