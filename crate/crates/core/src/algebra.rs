//! Exact rational algebra on the symbols `S_k = S_{k, 2^{4-k}}^g`.
//!
//! The relations tie `S_k, S_{k+1}, S_{k+2}` together. On `H_g` only the
//! Igusa relations (`k <= 2`) are available; on the Jacobian locus `T_g` the
//! whole triangular family is assumed. Eliminating from the top index down
//! leaves a combination of `S_0` and `S_1`, which is then compared with the
//! theta-series difference `(f4)^2 - f8 = 2^{-2g}((1 - 2^g) S_0 + 2 S_1)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::charspace::even_count;
use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Formats as `"p/q"` with `q > 0`, also for integers.
pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (p, q) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| Error::Parse(format!("bad numerator in {t:?}")))?;
    let q: BigInt = q.parse().map_err(|_| Error::Parse(format!("bad denominator in {t:?}")))?;
    if q.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {t:?}")));
    }
    Ok(Rational::new(p, q))
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rational_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

fn pow2(e: usize) -> BigInt {
    BigInt::one() << e
}

fn rat(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

/// Where an identity is claimed to hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    /// All of the Siegel upper half-space: Igusa relations only.
    H,
    /// The closure of the Jacobian locus: the full relation family.
    T,
}

impl Domain {
    pub fn admits(&self, k: usize, g: usize) -> bool {
        g >= k + 2
            && match self {
                Domain::H => k <= 2,
                Domain::T => true,
            }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::H => write!(f, "H"),
            Domain::T => write!(f, "T"),
        }
    }
}

/// Sparse exact combination `sum_k c_k S_k` at genus `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SVector {
    g: usize,
    coeffs: BTreeMap<usize, Rational>,
}

impl SVector {
    pub fn zero(g: usize) -> Self {
        Self {
            g,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, k: usize, c: Rational) -> Result<()> {
        if k > self.g {
            return Err(Error::DimensionOutOfRange { dim: k, ambient: self.g });
        }
        if c.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
        Ok(())
    }

    fn add_to(&mut self, k: usize, c: &Rational) {
        let v = self.coeff(k) + c;
        self.set(k, v).expect("index checked by caller");
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn top_index(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scaled(&self, c: &Rational) -> SVector {
        let mut out = SVector::zero(self.g);
        for (k, v) in self.terms() {
            out.add_to(k, &(v * c));
        }
        out
    }

    pub fn plus(&self, other: &SVector) -> Result<SVector> {
        if self.g != other.g {
            return Err(Error::DimensionMismatch {
                expected: self.g,
                found: other.g,
            });
        }
        let mut out = self.clone();
        for (k, v) in other.terms() {
            out.add_to(k, v);
        }
        Ok(out)
    }
}

impl fmt::Display for SVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}) S{}", rational_to_string(c), k)?;
        }
        Ok(())
    }
}

/// `Xi^(g) = 2^{-g} sum_i (-1)^i 2^{i(i+1)/2} S_i`.
pub fn xi_symbol(g: usize) -> Result<SVector> {
    if g == 0 {
        return Err(Error::InvalidArgument("genus must be positive".into()));
    }
    let mut v = SVector::zero(g);
    let inv = Rational::new(BigInt::one(), pow2(g));
    for i in 0..=g {
        let mut c = rat(pow2(i * (i + 1) / 2)) * &inv;
        if i % 2 == 1 {
            c = -c;
        }
        v.set(i, c)?;
    }
    Ok(v)
}

/// `(2^{2g-2k} - 1) S_k - 6(2^{k+1} - 1) S_{k+1} - 8(2^{k+2} - 1)(2^{k+1} - 1) S_{k+2}`.
pub fn relation(k: usize, g: usize) -> Result<SVector> {
    if g < k + 2 {
        return Err(Error::InvalidArgument(format!(
            "relation {k} needs genus >= {}, got {g}",
            k + 2
        )));
    }
    let one = BigInt::one();
    let a = pow2(2 * g - 2 * k) - &one;
    let b1 = pow2(k + 1) - &one;
    let b2 = pow2(k + 2) - &one;
    let mut v = SVector::zero(g);
    v.set(k, rat(a))?;
    v.set(k + 1, rat(-BigInt::from(6) * &b1))?;
    v.set(k + 2, rat(-BigInt::from(8) * &b2 * &b1))?;
    Ok(v)
}

/// Outcome of eliminating down to `alpha S_0 + beta S_1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub g: usize,
    pub domain: Domain,
    #[serde(with = "rational_serde")]
    pub alpha: Rational,
    #[serde(with = "rational_serde")]
    pub beta: Rational,
}

/// Replaces `S_{k+2}` in `v` using relation `k`.
fn substitute(v: &mut SVector, k: usize) {
    let top = k + 2;
    let c = v.coeff(top);
    if c.is_zero() {
        return;
    }
    let r = relation(k, v.g).expect("admissibility checked by caller");
    // r = a S_k + b S_{k+1} + d S_{k+2} = 0  =>  S_{k+2} = -(a S_k + b S_{k+1}) / d
    let factor = -(c / r.coeff(top));
    for (j, rc) in r.terms() {
        v.add_to(j, &(rc * &factor));
    }
    debug_assert!(v.coeff(top).is_zero());
}

/// Top-down elimination of every `S_k`, `k >= 2`.
pub fn reduce_to_s01(v: &SVector, domain: Domain) -> Result<Reduction> {
    let mut w = v.clone();
    while let Some(top) = w.top_index() {
        if top < 2 {
            break;
        }
        let k = top - 2;
        if !domain.admits(k, w.g) {
            return Err(Error::EliminationStuck {
                index: top,
                domain: format!("{domain}_{}", w.g),
            });
        }
        substitute(&mut w, k);
    }
    Ok(Reduction {
        g: v.g,
        domain,
        alpha: w.coeff(0),
        beta: w.coeff(1),
    })
}

/// Elimination driven by an explicit sequence of relation indices, cycled
/// until only `S_0, S_1` remain. Each index `k` substitutes for `S_{k+2}`.
pub fn reduce_with_order(v: &SVector, domain: Domain, order: &[usize]) -> Result<Reduction> {
    if order.is_empty() {
        return Err(Error::InvalidArgument("empty relation order".into()));
    }
    for &k in order {
        if !domain.admits(k, v.g) {
            return Err(Error::InvalidArgument(format!(
                "relation {k} is not admissible on {domain}_{}",
                v.g
            )));
        }
    }
    let mut w = v.clone();
    // every pass strictly lowers the top index if the order covers it
    for _ in 0..=v.g * v.g + 1 {
        if w.top_index().map_or(true, |t| t < 2) {
            return Ok(Reduction {
                g: v.g,
                domain,
                alpha: w.coeff(0),
                beta: w.coeff(1),
            });
        }
        for &k in order {
            substitute(&mut w, k);
        }
    }
    Err(Error::EliminationStuck {
        index: w.top_index().unwrap_or(0),
        domain: format!("{domain}_{}", v.g),
    })
}

/// `reduce_to_s01(xi_symbol(g), T)` without intermediate gcds: the
/// coefficients are carried as integers over one common denominator, with the
/// `2^{-g}` prefactor of `Xi` applied at the end.
fn reduce_xi_on_t(g: usize) -> (Rational, Rational) {
    let e = |i: usize| {
        let x = pow2(i * (i + 1) / 2);
        if i % 2 == 1 {
            -x
        } else {
            x
        }
    };
    let one = BigInt::one();
    let mut den = BigInt::one();
    // coefficients of S_{top-1}, S_top over `den`
    let (mut lo, mut hi) = (e(g - 1), e(g));
    for k in (0..=g - 2).rev() {
        let b1 = pow2(k + 1) - &one;
        let a = pow2(2 * g - 2 * k) - &one;
        let b = BigInt::from(-6) * &b1;
        let d = BigInt::from(-8) * (pow2(k + 2) - &one) * &b1;
        let next_lo = e(k) * &den * &d - &hi * &a;
        let next_hi = &lo * &d - &hi * &b;
        den *= &d;
        lo = next_lo;
        hi = next_hi;
    }
    den *= pow2(g);
    (Rational::new(lo, den.clone()), Rational::new(hi, den))
}

/// `c_g` with `Xi^(g) = c_g ((f4)^2 - f8)` on `T_g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosmologicalCoefficient {
    pub g: usize,
    #[serde(with = "rational_serde")]
    pub alpha: Rational,
    #[serde(with = "rational_serde")]
    pub beta: Rational,
    #[serde(with = "rational_serde")]
    pub c: Rational,
    /// For `g <= 3` the target form vanishes identically, so `c` is formal.
    pub target_vanishes_identically: bool,
}

pub fn cosmological_coefficient(g: usize) -> Result<CosmologicalCoefficient> {
    if g < 2 {
        return Err(Error::InvalidArgument("cosmological coefficient needs genus >= 2".into()));
    }
    let (alpha, beta) = reduce_xi_on_t(g);
    let red = Reduction {
        g,
        domain: Domain::T,
        alpha,
        beta,
    };
    let one_minus = rat(BigInt::one() - pow2(g));
    let lhs = &red.alpha * rat(BigInt::from(2));
    let rhs = &red.beta * &one_minus;
    if lhs != rhs {
        return Err(Error::ProportionalityFailure {
            g,
            lhs: rational_to_string(&lhs),
            rhs: rational_to_string(&rhs),
        });
    }
    let c = rat(pow2(2 * g)) * &red.alpha / &one_minus;
    debug_assert_eq!(c, rat(pow2(2 * g - 1)) * &red.beta);
    Ok(CosmologicalCoefficient {
        g,
        alpha: red.alpha,
        beta: red.beta,
        c,
        target_vanishes_identically: g <= 3,
    })
}

/// The constant printed alongside `c_5`, and the one printed for the correction.
pub fn printed_c5() -> Rational {
    Rational::new(BigInt::from(-51), BigInt::from(217))
}

pub fn printed_correction() -> Rational {
    Rational::new(BigInt::from(38192), BigInt::from(17))
}

/// The shift `c` making `Xi'[m] = Xi[m] + c((f4)^2 - f8)` have vanishing sum
/// at genus 5: `c_5 + 528 c = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionConstant {
    pub even_characteristics: u64,
    /// `c_5` from the exact reduction.
    #[serde(with = "rational_serde")]
    pub c5: Rational,
    /// `-c5 / 528` from the exact `c_5`.
    #[serde(with = "rational_serde")]
    pub c: Rational,
    /// `-c5 / 528` using the printed `c_5 = -51/217`.
    #[serde(with = "rational_serde")]
    pub c_from_printed_c5: Rational,
    #[serde(with = "rational_serde")]
    pub printed: Rational,
    /// Whether either derived value equals the printed correction.
    pub matches_printed: bool,
}

pub fn correction_constant() -> Result<CorrectionConstant> {
    let g = 5;
    let n = even_count(g);
    let c5 = cosmological_coefficient(g)?.c;
    let nr = rat(BigInt::from(n));
    let c = -(&c5 / &nr);
    let c_from_printed = -(printed_c5() / &nr);
    let printed = printed_correction();
    Ok(CorrectionConstant {
        even_characteristics: n,
        matches_printed: c == printed || c_from_printed == printed,
        c5,
        c,
        c_from_printed_c5: c_from_printed,
        printed,
    })
}

/// Row of the coefficient table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub g: usize,
    #[serde(with = "rational_serde")]
    pub alpha: Rational,
    #[serde(with = "rational_serde")]
    pub beta: Rational,
    #[serde(with = "rational_serde")]
    pub c_g: Rational,
}

pub fn coefficient_table(gmax: usize) -> Result<Vec<CoefficientRow>> {
    (2..=gmax)
        .map(|g| {
            let c = cosmological_coefficient(g)?;
            Ok(CoefficientRow {
                g,
                alpha: c.alpha,
                beta: c.beta,
                c_g: c.c,
            })
        })
        .collect()
}

/// `true` iff `r` is `+-2^e` times `base` for some integer `e`; returns `e`.
pub fn power_of_two_ratio(r: &Rational, base: &Rational) -> Option<i64> {
    if base.is_zero() || r.is_zero() {
        return None;
    }
    let q = r / base;
    if !q.is_positive() {
        return None;
    }
    let (n, d) = (q.numer().clone(), q.denom().clone());
    let is_pow2 = |x: &BigInt| x.is_positive() && (x & (x - BigInt::one())).is_zero();
    if d.is_one() && is_pow2(&n) {
        Some(n.bits() as i64 - 1)
    } else if n.is_one() && is_pow2(&d) {
        Some(-(d.bits() as i64 - 1))
    } else {
        None
    }
}
