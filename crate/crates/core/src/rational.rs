//! Exact rational scalars and vectors.
//!
//! Everything geometric in this crate is computed over `BigRational`, so the
//! decomposition identities can be checked as equalities.

use std::fmt;
use std::ops::{Deref, DerefMut, Index};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`; whitespace around the parts is ignored.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let bad = || Error::MalformedRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Serde adapter writing rationals as canonical strings and accepting either
/// strings or JSON integers.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    struct RationalVisitor;

    impl Visitor<'_> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an integer or a \"p/q\" string")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(rat(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            parse_rational(v).map_err(E::custom)
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
            Err(E::custom(format!(
                "floating-point value {v} is not an exact rational; write it as \"p/q\""
            )))
        }
    }
}

/// A point or covector in Q^n.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct QVector(pub Vec<Rational>);

impl QVector {
    pub fn zeros(n: usize) -> Self {
        QVector(vec![Rational::zero(); n])
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        QVector(xs.iter().map(|&x| rat(x)).collect())
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = Rational::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &QVector) -> Rational {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn add(&self, other: &QVector) -> QVector {
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &QVector) -> QVector {
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Rational) -> QVector {
        QVector(self.0.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> QVector {
        QVector(self.0.iter().map(|a| -a).collect())
    }

    pub fn norm_sq(&self) -> Rational {
        self.dot(self)
    }

    /// Sum of absolute values.
    pub fn l1(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, a| acc + a.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Barycenter of a nonempty point list.
    pub fn barycenter<'a>(points: impl IntoIterator<Item = &'a QVector>) -> QVector {
        let mut it = points.into_iter();
        let first = it.next().expect("barycenter of an empty point set");
        let mut acc = first.clone();
        let mut count = 1i64;
        for p in it {
            acc = acc.add(p);
            count += 1;
        }
        acc.scale(&ratio(1, count))
    }

    /// Positive rescaling to coprime integer entries. Returns the factor used,
    /// so callers can rescale an attached offset. Zero vectors are returned
    /// unchanged with factor 1.
    pub fn primitive(&self) -> (QVector, Rational) {
        if self.is_zero() {
            return (self.clone(), Rational::one());
        }
        let lcm = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
        let ints: Vec<BigInt> = self.0.iter().map(|a| (a * &lcm).to_integer()).collect();
        let gcd = ints.iter().fold(BigInt::zero(), |acc, a| acc.gcd(a));
        let factor = Rational::new(lcm, gcd.clone());
        let v = QVector(
            ints.into_iter()
                .map(|a| Rational::from_integer(a / &gcd))
                .collect(),
        );
        (v, factor)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

impl Deref for QVector {
    type Target = [Rational];
    fn deref(&self) -> &[Rational] {
        &self.0
    }
}

impl DerefMut for QVector {
    fn deref_mut(&mut self) -> &mut [Rational] {
        &mut self.0
    }
}

impl Index<usize> for QVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl From<Vec<Rational>> for QVector {
    fn from(v: Vec<Rational>) -> Self {
        QVector(v)
    }
}

impl fmt::Debug for QVector {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(
            f,
            "({})",
            self.0
                .iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(", ")
        )
    }
}

impl fmt::Display for QVector {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for QVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for q in &self.0 {
            seq.serialize_element(&format_rational(q))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for QVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Entry(#[serde(with = "serde_rational")] Rational);
        let v: Vec<Entry> = Vec::deserialize(d)?;
        Ok(QVector(v.into_iter().map(|e| e.0).collect()))
    }
}
