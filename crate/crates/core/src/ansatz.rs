//! Theta-constant polynomials `P_{i,s}`, `S_{i,s}`, the forms `Xi[m]`, the
//! Schottky form `F_g`, and a numeric Siegel Phi operator.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charspace::{enumerate_even_cosets, enumerate_isotropic, gaussian_binomial, Characteristic, Coset};
use crate::error::{Error, Result};
use crate::numeric::{Neumaier, NeumaierC};
use crate::theta::{batch_theta_constants, PeriodMatrix, ThetaOptions, ThetaTable};

/// A numeric form value with its natural magnitude and a propagated bound on
/// the truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormValue {
    pub value: Complex64,
    pub scale: f64,
    pub error_bound: f64,
}

impl FormValue {
    /// `|value| / scale`, or 0 for an exact zero.
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.norm()
        } else {
            self.value.norm() / self.scale
        }
    }

    fn combine(parts: &[(f64, FormValue)]) -> FormValue {
        let mut v = NeumaierC::default();
        let mut s = Neumaier::default();
        let mut e = Neumaier::default();
        for (c, f) in parts {
            v.add(f.value * *c);
            s.add(c.abs() * f.scale);
            e.add(c.abs() * f.error_bound);
        }
        FormValue {
            value: v.sum(),
            scale: s.sum(),
            error_bound: e.sum(),
        }
    }
}

/// Largest genus with integer exponents throughout `Xi`.
pub const MAX_XI_GENUS: usize = 4;

/// Exponent `s = 2^{4-i}` paired with dimension `i`.
pub fn paired_weight(i: usize) -> Result<u32> {
    if i > 4 {
        return Err(Error::Unsupported(format!(
            "P_{{{i}, 2^{{{}}}}} needs a fractional power of theta products; \
             its sign is only coherent on the Torelli cover, not pointwise",
            4 - i as i64
        )));
    }
    Ok(1 << (4 - i))
}

/// Parses an exponent such as `8` or `1/2`; fractional exponents are rejected.
pub fn parse_weight(s: &str) -> Result<u32> {
    let t = s.trim();
    if let Ok(n) = t.parse::<u32>() {
        if n == 0 {
            return Err(Error::InvalidArgument("exponent must be positive".into()));
        }
        return Ok(n);
    }
    if t.contains('/') || t.contains('.') {
        return Err(Error::Unsupported(format!(
            "exponent {t} is not an integer; square roots of theta products have no pointwise sign"
        )));
    }
    Err(Error::Parse(format!("bad exponent {t:?}")))
}

fn check_weight(i: usize, s: u32) -> Result<()> {
    if s == 0 {
        return Err(Error::InvalidArgument("exponent must be positive".into()));
    }
    if i >= 31 || ((s as u64) << i) % 16 != 0 {
        return Err(Error::InvalidArgument(format!("16 must divide 2^{i} * {s}")));
    }
    Ok(())
}

/// All even cosets of all totally isotropic i-dimensional subspaces, in the
/// order (subspace, representative). Cached per `(g, i)`.
pub fn even_cosets(g: usize, i: usize) -> Result<Arc<Vec<Coset>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<Coset>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().unwrap().get(&(g, i)) {
        return Ok(c.clone());
    }
    if i > 2 * g {
        return Err(Error::DimensionOutOfRange { dim: i, ambient: 2 * g });
    }
    // an all-even coset forces its subspace to be isotropic
    let mut out = Vec::new();
    for v in enumerate_isotropic(g, i)? {
        out.extend(enumerate_even_cosets(&v)?);
    }
    let out = Arc::new(out);
    cache.lock().unwrap().insert((g, i), out.clone());
    Ok(out)
}

/// `(prod theta_v)^s` over the elements of a coset, with modulus and error.
fn coset_term(table: &ThetaTable, elements: &[u32], s: u32) -> (Complex64, f64, f64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut m = 1.0;
    let mut me = 1.0;
    for &e in elements {
        let t = table.value(e);
        p *= t;
        m *= t.norm();
        me *= t.norm() + table.tail_bound(e);
    }
    let mod_s = m.powi(s as i32);
    (p.powi(s as i32), mod_s, me.powi(s as i32) - mod_s)
}

fn sum_terms<'a>(table: &ThetaTable, cosets: impl Iterator<Item = &'a Coset>, s: u32) -> FormValue {
    let mut v = NeumaierC::default();
    let mut sc = Neumaier::default();
    let mut err = Neumaier::default();
    for c in cosets {
        let (t, m, e) = coset_term(table, &c.elements(), s);
        v.add(t);
        sc.add(m);
        err.add(e);
    }
    FormValue {
        value: v.sum(),
        scale: sc.sum(),
        error_bound: err.sum(),
    }
}

/// `P_{i,s}` from precomputed theta constants: the sum over linear
/// i-dimensional subspaces of `prod theta_v^s`. Subspaces containing an odd
/// characteristic are skipped.
pub fn p_form_from(table: &ThetaTable, i: usize, s: u32) -> Result<FormValue> {
    check_weight(i, s)?;
    let cosets = even_cosets(table.genus(), i)?;
    Ok(sum_terms(table, cosets.iter().filter(|c| c.rep() == 0), s))
}

/// `S_{i,s}`: every even coset of every i-dimensional subspace, each once.
pub fn s_form_from(table: &ThetaTable, i: usize, s: u32) -> Result<FormValue> {
    check_weight(i, s)?;
    let cosets = even_cosets(table.genus(), i)?;
    Ok(sum_terms(table, cosets.iter(), s))
}

/// `P_{i,s}[m]`: affine i-dimensional subspaces through `m`.
pub fn p_form_m_from(table: &ThetaTable, m: &Characteristic, i: usize, s: u32) -> Result<FormValue> {
    check_weight(i, s)?;
    if m.genus() != table.genus() {
        return Err(Error::DimensionMismatch {
            expected: table.genus(),
            found: m.genus(),
        });
    }
    let cosets = even_cosets(table.genus(), i)?;
    Ok(sum_terms(table, cosets.iter().filter(|c| c.contains(m.bits())), s))
}

fn table(tau: &PeriodMatrix, opts: &ThetaOptions) -> Result<ThetaTable> {
    batch_theta_constants(tau, opts)
}

pub fn p_form(i: usize, s: u32, tau: &PeriodMatrix, opts: &ThetaOptions) -> Result<FormValue> {
    p_form_from(&table(tau, opts)?, i, s)
}

pub fn s_form(i: usize, s: u32, tau: &PeriodMatrix, opts: &ThetaOptions) -> Result<FormValue> {
    s_form_from(&table(tau, opts)?, i, s)
}

fn check_xi_genus(g: usize) -> Result<()> {
    if g == 0 || g > MAX_XI_GENUS {
        return Err(Error::Unsupported(format!(
            "Xi at genus {g}: the top terms need square roots of theta products"
        )));
    }
    Ok(())
}

/// `Xi[m] = 2^{-g} sum_i (-1)^i 2^{i(i-1)/2} P_{i, 2^{4-i}}[m]`.
pub fn xi_m_from(table: &ThetaTable, m: &Characteristic) -> Result<FormValue> {
    let g = table.genus();
    check_xi_genus(g)?;
    let mut parts = Vec::with_capacity(g + 1);
    for i in 0..=g {
        let c = sign(i) * 2f64.powi((i * i.saturating_sub(1) / 2) as i32) / 2f64.powi(g as i32);
        parts.push((c, p_form_m_from(table, m, i, paired_weight(i)?)?));
    }
    Ok(FormValue::combine(&parts))
}

/// `Xi = sum_m Xi[m] = 2^{-g} sum_i (-1)^i 2^{i(i+1)/2} S_{i, 2^{4-i}}`.
pub fn xi_from(table: &ThetaTable) -> Result<FormValue> {
    let g = table.genus();
    check_xi_genus(g)?;
    let mut parts = Vec::with_capacity(g + 1);
    for i in 0..=g {
        let c = sign(i) * 2f64.powi((i * (i + 1) / 2) as i32) / 2f64.powi(g as i32);
        parts.push((c, s_form_from(table, i, paired_weight(i)?)?));
    }
    Ok(FormValue::combine(&parts))
}

fn sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn xi_m_value(m: &Characteristic, tau: &PeriodMatrix, opts: &ThetaOptions) -> Result<FormValue> {
    check_xi_genus(tau.genus())?;
    xi_m_from(&table(tau, opts)?, m)
}

pub fn xi_value(tau: &PeriodMatrix, opts: &ThetaOptions) -> Result<FormValue> {
    check_xi_genus(tau.genus())?;
    xi_from(&table(tau, opts)?)
}

/// `sum_m theta_m^k` with `sum |theta_m|^k` and a bound on the truncation error.
pub fn power_sum(table: &ThetaTable, k: u32) -> FormValue {
    let mut v = NeumaierC::default();
    let mut sc = Neumaier::default();
    let mut err = Neumaier::default();
    for b in 0..table.len() as u32 {
        let t = table.value(b);
        if t == Complex64::new(0.0, 0.0) && table.tail_bound(b) == 0.0 {
            continue;
        }
        let m = t.norm();
        let mk = m.powi(k as i32);
        v.add(t.powi(k as i32));
        sc.add(mk);
        err.add((m + table.tail_bound(b)).powi(k as i32) - mk);
    }
    FormValue {
        value: v.sum(),
        scale: sc.sum(),
        error_bound: err.sum(),
    }
}

/// `F_g = 2^g sum theta^16 - (sum theta^8)^2`, scale `(sum |theta|^8)^2`.
pub fn f_from(table: &ThetaTable) -> FormValue {
    let g = table.genus();
    let s16 = power_sum(table, 16);
    let s8 = power_sum(table, 8);
    let two_g = 2f64.powi(g as i32);
    let value = s16.value * two_g - s8.value * s8.value;
    let scale = s8.scale * s8.scale;
    let a = s8.scale;
    let error_bound = two_g * s16.error_bound + (a + s8.error_bound).powi(2) - a * a;
    FormValue {
        value,
        scale,
        error_bound,
    }
}

pub fn f_value(tau: &PeriodMatrix, opts: &ThetaOptions) -> Result<FormValue> {
    Ok(f_from(&table(tau, opts)?))
}

/// `f4 = 2^{-g} sum theta^8`, the theta-constant side of the E8 theta series.
pub fn f4_from(table: &ThetaTable) -> FormValue {
    let s8 = power_sum(table, 8);
    let c = 2f64.powi(-(table.genus() as i32));
    FormValue {
        value: s8.value * c,
        scale: s8.scale * c,
        error_bound: s8.error_bound * c,
    }
}

/// `f8 = 2^{-g} sum theta^16`, the theta-constant side of the D16+ theta series.
pub fn f8_from(table: &ThetaTable) -> FormValue {
    let s16 = power_sum(table, 16);
    let c = 2f64.powi(-(table.genus() as i32));
    FormValue {
        value: s16.value * c,
        scale: s16.scale * c,
        error_bound: s16.error_bound * c,
    }
}

/// Coefficient in the block-diagonal restriction of `P_{i,s}`: the number of
/// i-dimensional subspaces of `V1 + V2` projecting onto both an n-dimensional
/// `V1` and an m-dimensional `V2`.
pub fn restriction_coefficient(n: usize, m: usize, i: usize) -> u128 {
    if i > n + m || n > i || m > i {
        return 0;
    }
    let d = n + m - i;
    gaussian_binomial(n, d) * gaussian_binomial(m, d) * gl_order(d)
}

fn gl_order(d: usize) -> u128 {
    (0..d).map(|j| (1u128 << d) - (1u128 << j)).product()
}

/// Limit of `form(diag(tau1, i lambda))` as `lambda` grows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiLimit {
    pub value: FormValue,
    /// `|last - previous|` along the schedule.
    pub error_estimate: f64,
    pub trail: Vec<Complex64>,
}

pub fn phi_numeric<F>(form: F, tau1: &PeriodMatrix, lambdas: &[f64]) -> Result<PhiLimit>
where
    F: Fn(&PeriodMatrix) -> Result<FormValue>,
{
    if lambdas.len() < 3 {
        return Err(Error::InvalidArgument("Phi needs at least three lambda values".into()));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("lambda schedule must increase".into()));
    }
    let mut values = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let corner = PeriodMatrix::diagonal(&[Complex64::new(0.0, l)])?;
        let tau = PeriodMatrix::block_diagonal(tau1, &corner)?;
        values.push(form(&tau)?);
    }
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1].value - w[0].value).norm()).collect();
    let last = *values.last().unwrap();
    let tol = 1e-14 * last.scale.max(1e-300);
    // once the differences hit rounding level they stop shrinking; that is convergence
    let settled = |d: f64| d <= tol.max(last.error_bound * 4.0);
    if diffs.windows(2).any(|w| w[1] > w[0] && !settled(w[1])) {
        return Err(Error::NonConvergence(format!(
            "Phi: successive differences {diffs:?} do not decrease"
        )));
    }
    Ok(PhiLimit {
        error_estimate: *diffs.last().unwrap(),
        value: last,
        trail: values.iter().map(|v| v.value).collect(),
    })
}
