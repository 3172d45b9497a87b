//! Cohomology classes `alpha` pairing against edge displacements, in exact
//! rational or floating form.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A class in `H^1(T^d, R) = R^d`. Rational classes carry exact integers and
/// make every downstream verdict exact; floating classes use tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CohomologyClass {
    Rational(Vec<(i64, i64)>),
    Float(Vec<f64>),
}

impl CohomologyClass {
    pub fn rational(entries: Vec<(i64, i64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("empty class".into()));
        }
        if entries.iter().any(|&(_, q)| q == 0) {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        let normalized = entries
            .into_iter()
            .map(|(p, q)| {
                let r = BigRational::new(BigInt::from(p), BigInt::from(q));
                rational_to_pair(&r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CohomologyClass::Rational(normalized))
    }

    pub fn integer(entries: Vec<i64>) -> Self {
        CohomologyClass::Rational(entries.into_iter().map(|p| (p, 1)).collect())
    }

    pub fn float(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("empty class".into()));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("class must be finite".into()));
        }
        Ok(CohomologyClass::Float(entries))
    }

    /// Parse comma-separated entries; a `/` anywhere makes the whole class
    /// rational (decimals without `/` stay floating unless they are integers).
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(|s| s.trim()).collect();
        if parts.is_empty() || parts.iter().any(|p| p.is_empty()) {
            return Err(Error::Parse(format!("bad class literal {text:?}")));
        }
        let exact = parts
            .iter()
            .all(|p| p.contains('/') || p.parse::<i64>().is_ok());
        if exact {
            let entries = parts
                .iter()
                .map(|p| -> Result<(i64, i64)> {
                    if let Some((num, den)) = p.split_once('/') {
                        let num: i64 = num
                            .trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad numerator in {p:?}")))?;
                        let den: i64 = den
                            .trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad denominator in {p:?}")))?;
                        if den == 0 {
                            return Err(Error::Parse("zero denominator".into()));
                        }
                        Ok((num, den))
                    } else {
                        Ok((p.parse::<i64>().unwrap(), 1))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Self::rational(entries)
        } else {
            let entries = parts
                .iter()
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad entry {p:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Self::float(entries)
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            CohomologyClass::Rational(v) => v.len(),
            CohomologyClass::Float(v) => v.len(),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, CohomologyClass::Rational(_))
    }

    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            CohomologyClass::Rational(v) => {
                v.iter().map(|&(p, q)| p as f64 / q as f64).collect()
            }
            CohomologyClass::Float(v) => v.clone(),
        }
    }

    pub fn as_big_rational(&self) -> Option<Vec<BigRational>> {
        match self {
            CohomologyClass::Rational(v) => Some(
                v.iter()
                    .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
                    .collect(),
            ),
            CohomologyClass::Float(_) => None,
        }
    }

    /// Sup norm, used for floating tolerances.
    pub fn sup_norm(&self) -> f64 {
        self.as_f64().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Pairing with an integer displacement, as f64.
    pub fn pair_f64(&self, displacement: &[i32]) -> f64 {
        self.as_f64()
            .iter()
            .zip(displacement)
            .map(|(a, &h)| a * h as f64)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CohomologyClass::Rational(v) => v.iter().all(|&(p, _)| p == 0),
            CohomologyClass::Float(v) => v.iter().all(|&x| x == 0.0),
        }
    }

    pub fn add(&self, other: &CohomologyClass) -> Result<CohomologyClass> {
        combine(self, other, BigRational::one(), 1.0)
    }

    /// `self + t (self - other)` for the inclusion test of recurrent sets.
    pub fn ray_shift(&self, other: &CohomologyClass, t: &BigRational) -> Result<CohomologyClass> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: other.dimension(),
            });
        }
        match (self.as_big_rational(), other.as_big_rational()) {
            (Some(a), Some(b)) => {
                let entries = a
                    .iter()
                    .zip(&b)
                    .map(|(ai, bi)| {
                        let v = ai + t * (ai - bi);
                        rational_to_pair(&v)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(CohomologyClass::Rational(entries))
            }
            _ => {
                let t = t.to_f64().ok_or_else(|| {
                    Error::NumericOverflow("t does not fit in f64".into())
                })?;
                let a = self.as_f64();
                let b = other.as_f64();
                CohomologyClass::float(
                    a.iter()
                        .zip(&b)
                        .map(|(ai, bi)| ai + t * (ai - bi))
                        .collect(),
                )
            }
        }
    }
}

fn combine(
    a: &CohomologyClass,
    b: &CohomologyClass,
    coeff_rat: BigRational,
    coeff_f64: f64,
) -> Result<CohomologyClass> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            got: b.dimension(),
        });
    }
    match (a.as_big_rational(), b.as_big_rational()) {
        (Some(ar), Some(br)) => {
            let entries = ar
                .iter()
                .zip(&br)
                .map(|(x, y)| rational_to_pair(&(x + &coeff_rat * y)))
                .collect::<Result<Vec<_>>>()?;
            Ok(CohomologyClass::Rational(entries))
        }
        _ => {
            let af = a.as_f64();
            let bf = b.as_f64();
            CohomologyClass::float(
                af.iter()
                    .zip(&bf)
                    .map(|(x, y)| x + coeff_f64 * y)
                    .collect(),
            )
        }
    }
}

pub(crate) fn rational_to_pair(r: &BigRational) -> Result<(i64, i64)> {
    let p = r.numer().to_i64();
    let q = r.denom().to_i64();
    match (p, q) {
        (Some(p), Some(q)) => Ok((p, q)),
        _ => Err(Error::NumericOverflow(format!(
            "rational {r} does not fit in i64/i64"
        ))),
    }
}

/// Exact scaled-integer edge weights: `w_e = D * (alpha . h_e)` for the
/// common denominator `D` of the rational class.
pub struct ScaledWeights {
    pub weights: Vec<i128>,
    /// common denominator, > 0
    pub scale: BigInt,
}

impl ScaledWeights {
    pub fn compute(alpha: &CohomologyClass, edges: &[crate::graph::Edge]) -> Result<Self> {
        let rat = alpha
            .as_big_rational()
            .ok_or_else(|| Error::InvalidParameter("exact weights need a rational class".into()))?;
        let mut scale = BigInt::one();
        for r in &rat {
            scale = num::integer::lcm(scale, r.denom().clone());
        }
        let numerators: Vec<i128> = rat
            .iter()
            .map(|r| {
                let scaled = r.numer() * (&scale / r.denom());
                scaled.to_i128().ok_or_else(|| {
                    Error::NumericOverflow("scaled class entry exceeds i128".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let weights = edges
            .iter()
            .map(|e| {
                let mut acc: i128 = 0;
                for (a, &h) in numerators.iter().zip(&e.displacement) {
                    let term = a.checked_mul(h as i128).ok_or_else(|| {
                        Error::NumericOverflow("edge weight overflow".into())
                    })?;
                    acc = acc.checked_add(term).ok_or_else(|| {
                        Error::NumericOverflow("edge weight overflow".into())
                    })?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        if scale.is_negative() || scale.is_zero() {
            return Err(Error::NumericOverflow("bad scale".into()));
        }
        Ok(Self { weights, scale })
    }
}
