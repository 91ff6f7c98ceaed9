//! Riemann theta functions with characteristics, summed over Z^g by
//! increasing sup-norm shells with a certified truncation bound.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charspace::{low_mask, Characteristic};
use crate::error::{Error, Result};
use crate::numeric::NeumaierC;

/// Entries of `tau` must be symmetric to this absolute tolerance (scaled by
/// the largest entry when that exceeds 1).
pub const SYMMETRY_TOL: f64 = 1e-13;

/// A point of the Siegel upper half-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TauRecord", into = "TauRecord")]
pub struct PeriodMatrix {
    g: usize,
    re: DMatrix<f64>,
    im: DMatrix<f64>,
    im_inv: DMatrix<f64>,
    lambda_min: f64,
}

/// On-disk form: `{"g": 2, "re": [[..], ..], "im": [[..], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauRecord {
    pub g: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl TryFrom<TauRecord> for PeriodMatrix {
    type Error = Error;
    fn try_from(r: TauRecord) -> Result<Self> {
        let rows = |m: &Vec<Vec<f64>>| -> Result<DMatrix<f64>> {
            if m.len() != r.g || m.iter().any(|row| row.len() != r.g) {
                return Err(Error::DimensionMismatch {
                    expected: r.g,
                    found: m.len(),
                });
            }
            Ok(DMatrix::from_fn(r.g, r.g, |i, j| m[i][j]))
        };
        PeriodMatrix::from_re_im(rows(&r.re)?, rows(&r.im)?)
    }
}

impl From<PeriodMatrix> for TauRecord {
    fn from(t: PeriodMatrix) -> Self {
        let rows = |m: &DMatrix<f64>| (0..t.g).map(|i| (0..t.g).map(|j| m[(i, j)]).collect()).collect();
        TauRecord {
            g: t.g,
            re: rows(&t.re),
            im: rows(&t.im),
        }
    }
}

impl PeriodMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        Self::from_re_im(entries.map(|c| c.re), entries.map(|c| c.im))
    }

    /// Accepts an asymmetric input up to `tol` and symmetrizes it.
    pub fn new_with_tolerance(entries: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        Self::build(entries.map(|c| c.re), entries.map(|c| c.im), tol)
    }

    pub fn from_re_im(re: DMatrix<f64>, im: DMatrix<f64>) -> Result<Self> {
        Self::build(re, im, SYMMETRY_TOL)
    }

    fn build(re: DMatrix<f64>, im: DMatrix<f64>, tol: f64) -> Result<Self> {
        let g = re.nrows();
        if g == 0 || re.ncols() != g || im.nrows() != g || im.ncols() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                found: re.ncols(),
            });
        }
        if re.iter().chain(im.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry in tau".into()));
        }
        let scale = re.amax().max(im.amax()).max(1.0);
        let asym = (&re - re.transpose()).amax().max((&im - im.transpose()).amax());
        if asym > tol * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let re = (&re + re.transpose()) * 0.5;
        let im = (&im + im.transpose()) * 0.5;
        let lambda_min = im.clone().symmetric_eigen().eigenvalues.min();
        if lambda_min.is_nan() || lambda_min <= 0.0 {
            return Err(Error::NotPositiveDefinite(lambda_min));
        }
        let im_inv = im
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite(lambda_min))?
            .inverse();
        Ok(Self {
            g,
            re,
            im,
            im_inv,
            lambda_min,
        })
    }

    pub fn diagonal(entries: &[Complex64]) -> Result<Self> {
        let g = entries.len();
        Self::new(DMatrix::from_fn(g, g, |i, j| {
            if i == j {
                entries[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn block_diagonal(a: &PeriodMatrix, b: &PeriodMatrix) -> Result<Self> {
        let g = a.g + b.g;
        let m = DMatrix::from_fn(g, g, |i, j| {
            if i < a.g && j < a.g {
                a.entry(i, j)
            } else if i >= a.g && j >= a.g {
                b.entry(i - a.g, j - a.g)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(m)
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[(i, j)], self.im[(i, j)])
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.g, self.g, |i, j| self.entry(i, j))
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im(&self) -> &DMatrix<f64> {
        &self.im
    }

    /// Smallest eigenvalue of `Im tau`.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// `tau + h E_ij` (symmetric update: both `ij` and `ji` move by `h`).
    pub fn perturbed(&self, i: usize, j: usize, h: Complex64) -> Result<Self> {
        let mut m = self.to_complex();
        m[(i, j)] += h;
        if i != j {
            m[(j, i)] += h;
        }
        Self::new(m)
    }

    /// Upper-left `k x k` block.
    pub fn leading_block(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.g {
            return Err(Error::DimensionOutOfRange {
                dim: k,
                ambient: self.g,
            });
        }
        Self::new(self.to_complex().view((0, 0), (k, k)).into_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaOptions {
    /// Certified absolute truncation error per value.
    pub target_abs_error: f64,
    /// Largest sup-norm shell allowed before giving up.
    pub max_radius: usize,
    /// `tau` with `lambda_min(Im tau)` below this is rejected.
    pub lambda_floor: f64,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        Self {
            target_abs_error: 1e-12,
            max_radius: 24,
            lambda_floor: 1e-3,
        }
    }
}

impl ThetaOptions {
    pub fn with_target(mut self, target: f64) -> Self {
        self.target_abs_error = target;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.target_abs_error > 0.0) {
            return Err(Error::InvalidArgument("target_abs_error must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

impl ThetaValue {
    pub const ZERO: ThetaValue = ThetaValue {
        value: Complex64 { re: 0.0, im: 0.0 },
        tail_bound: 0.0,
    };
}

/// Truncation plan for a fixed `eps` block: radius and the bound it achieves.
#[derive(Debug, Clone, Copy)]
struct Plan {
    radius: usize,
    bound: f64,
}

/// Bound on the part of the sum outside the box `|n|_inf <= r`.
///
/// With `c = Y^{-1} Im z` every term has modulus at most
/// `K exp(-pi lambda |n + eps/2 + c|^2)`, `K = exp(pi Im z' Y^{-1} Im z)`. Outside the box some
/// coordinate has `|n_k + s_k| >= r + 1 - max|s|`; summing the one-dimensional
/// Gaussian tails against full one-dimensional sums gives the bound.
fn tail_bound(g: usize, lambda: f64, k_factor: f64, s_max: f64, r: usize) -> f64 {
    let t0 = r as f64 + 1.0 - s_max;
    if t0 <= 0.0 {
        return f64::INFINITY;
    }
    let pl = std::f64::consts::PI * lambda;
    let one_dim_tail = 2.0 * (-pl * t0 * t0).exp() / (1.0 - (-2.0 * pl * t0).exp());
    let full = 1.0 + lambda.powf(-0.5);
    k_factor * g as f64 * one_dim_tail * full.powi(g as i32 - 1)
}

fn plan(tau: &PeriodMatrix, y: &[f64], eps: u32, opts: &ThetaOptions) -> Result<Plan> {
    let g = tau.g;
    let yv = nalgebra::DVector::from_column_slice(y);
    let c = &tau.im_inv * &yv;
    let k_factor = (std::f64::consts::PI * yv.dot(&c)).exp();
    let s_max = (0..g)
        .map(|k| (0.5 * ((eps >> k) & 1) as f64 + c[k]).abs())
        .fold(0.0, f64::max);
    let mut last = f64::INFINITY;
    for r in 0..=opts.max_radius {
        let b = tail_bound(g, tau.lambda_min, k_factor, s_max, r);
        if b <= opts.target_abs_error {
            return Ok(Plan { radius: r, bound: b });
        }
        last = b;
    }
    Err(Error::RadiusCapExceeded {
        max_radius: opts.max_radius,
        achieved: last,
        target: opts.target_abs_error,
    })
}

/// Points of the box `|n|_inf <= r` in Z^g, flattened, ordered by shell then
/// lexicographically.
fn shell_points(g: usize, r: usize) -> Arc<Vec<i32>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<i32>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&(g, r)) {
        return p.clone();
    }
    let side = 2 * r + 1;
    let total = side.pow(g as u32);
    let mut pts: Vec<(i32, Vec<i32>)> = Vec::with_capacity(total);
    let mut n = vec![-(r as i32); g];
    for _ in 0..total {
        let shell = n.iter().map(|x| x.abs()).max().unwrap_or(0);
        pts.push((shell, n.clone()));
        for k in (0..g).rev() {
            if n[k] < r as i32 {
                n[k] += 1;
                break;
            }
            n[k] = -(r as i32);
        }
    }
    pts.sort_by_key(|p| p.0);
    let flat: Arc<Vec<i32>> = Arc::new(pts.into_iter().flat_map(|p| p.1).collect());
    cache.lock().unwrap().insert((g, r), flat.clone());
    flat
}

/// For one `eps`, the partial sums `acc[p] = sum over n = p (mod 2)` of
/// `exp(pi i x'tau x + 2 pi i x'z)` with `x = n + eps/2`.
fn parity_bins(tau: &PeriodMatrix, z: &[Complex64], eps: u32, radius: usize) -> Vec<Complex64> {
    let g = tau.g;
    let pts = shell_points(g, radius);
    let mut acc = vec![NeumaierC::default(); 1 << g];
    let mut x = vec![0.0f64; g];
    let pi = std::f64::consts::PI;
    for n in pts.chunks_exact(g) {
        let mut p = 0usize;
        for k in 0..g {
            x[k] = n[k] as f64 + 0.5 * ((eps >> k) & 1) as f64;
            p |= ((n[k] & 1) as usize) << k;
        }
        let mut qr = 0.0;
        let mut qi = 0.0;
        for i in 0..g {
            let mut rr = 0.0;
            let mut ri = 0.0;
            for j in 0..g {
                rr += tau.re[(i, j)] * x[j];
                ri += tau.im[(i, j)] * x[j];
            }
            qr += x[i] * (rr + 2.0 * z[i].re);
            qi += x[i] * (ri + 2.0 * z[i].im);
        }
        let modulus = (-pi * qi).exp();
        let (s, c) = (pi * qr).sin_cos();
        acc[p].add(Complex64::new(modulus * c, modulus * s));
    }
    acc.into_iter().map(|a| a.sum()).collect()
}

/// `i^k`
fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn combine(bins: &[Complex64], eps: u32, delta: u32) -> Complex64 {
    let mut s = NeumaierC::default();
    for (p, b) in bins.iter().enumerate() {
        if (p as u32 & delta).count_ones() & 1 == 1 {
            s.add(-*b);
        } else {
            s.add(*b);
        }
    }
    i_pow((eps & delta).count_ones()) * s.sum()
}

fn check_inputs(tau: &PeriodMatrix, z: &[Complex64], opts: &ThetaOptions) -> Result<()> {
    opts.validate()?;
    if z.len() != tau.g {
        return Err(Error::DimensionMismatch {
            expected: tau.g,
            found: z.len(),
        });
    }
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidArgument("non-finite z".into()));
    }
    if tau.lambda_min < opts.lambda_floor {
        return Err(Error::NearDegenerate {
            found: tau.lambda_min,
            floor: opts.lambda_floor,
        });
    }
    Ok(())
}

fn check_genus(m: &Characteristic, tau: &PeriodMatrix) -> Result<()> {
    if m.genus() != tau.g {
        return Err(Error::DimensionMismatch {
            expected: tau.g,
            found: m.genus(),
        });
    }
    Ok(())
}

/// `theta_m(tau, z)`.
pub fn theta(
    m: &Characteristic,
    tau: &PeriodMatrix,
    z: &[Complex64],
    opts: &ThetaOptions,
) -> Result<ThetaValue> {
    check_genus(m, tau)?;
    check_inputs(tau, z, opts)?;
    if !m.is_even() && z.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
        return Ok(ThetaValue::ZERO);
    }
    let y: Vec<f64> = z.iter().map(|c| c.im).collect();
    let pl = plan(tau, &y, m.eps(), opts)?;
    let bins = parity_bins(tau, z, m.eps(), pl.radius);
    Ok(ThetaValue {
        value: combine(&bins, m.eps(), m.delta()),
        tail_bound: pl.bound,
    })
}

/// `theta_m(tau, 0)`; exactly zero for odd `m`.
pub fn theta_constant(m: &Characteristic, tau: &PeriodMatrix, opts: &ThetaOptions) -> Result<ThetaValue> {
    let z = vec![Complex64::new(0.0, 0.0); tau.g];
    theta(m, tau, &z, opts)
}

/// All `2^{2g}` values `theta_m(tau, z)`, indexed by the packed characteristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaTable {
    g: usize,
    values: Vec<ThetaValue>,
}

impl ThetaTable {
    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn get(&self, m: &Characteristic) -> ThetaValue {
        self.values[m.bits() as usize]
    }

    /// Value at the packed characteristic `bits`.
    pub fn value(&self, bits: u32) -> Complex64 {
        self.values[bits as usize].value
    }

    pub fn tail_bound(&self, bits: u32) -> f64 {
        self.values[bits as usize].tail_bound
    }

    pub fn max_tail_bound(&self) -> f64 {
        self.values.iter().map(|v| v.tail_bound).fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Characteristic, ThetaValue)> + '_ {
        let g = self.g;
        self.values
            .iter()
            .enumerate()
            .map(move |(b, v)| (Characteristic::from_bits(g, b as u32).unwrap(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Shared-enumeration evaluation of every characteristic at `(tau, z)`.
pub fn batch_theta(tau: &PeriodMatrix, z: &[Complex64], opts: &ThetaOptions) -> Result<ThetaTable> {
    check_inputs(tau, z, opts)?;
    let g = tau.g;
    let y: Vec<f64> = z.iter().map(|c| c.im).collect();
    let at_zero = z.iter().all(|c| *c == Complex64::new(0.0, 0.0));
    let blocks: Vec<Result<Vec<ThetaValue>>> = (0..1u32 << g)
        .into_par_iter()
        .map(|eps| {
            let pl = plan(tau, &y, eps, opts)?;
            let bins = parity_bins(tau, z, eps, pl.radius);
            Ok((0..1u32 << g)
                .map(|delta| {
                    if at_zero && (eps & delta).count_ones() & 1 == 1 {
                        ThetaValue::ZERO
                    } else {
                        ThetaValue {
                            value: combine(&bins, eps, delta),
                            tail_bound: pl.bound,
                        }
                    }
                })
                .collect())
        })
        .collect();
    let mask = low_mask(g);
    let mut values = vec![ThetaValue::ZERO; 1 << (2 * g)];
    for (eps, block) in blocks.into_iter().enumerate() {
        for (delta, v) in block?.into_iter().enumerate() {
            values[(eps as u32 & mask | (delta as u32) << g) as usize] = v;
        }
    }
    Ok(ThetaTable { g, values })
}

pub fn batch_theta_constants(tau: &PeriodMatrix, opts: &ThetaOptions) -> Result<ThetaTable> {
    batch_theta(tau, &vec![Complex64::new(0.0, 0.0); tau.g], opts)
}

/// Multiplier `theta_m(tau, z + tau p + q) / theta_m(tau, z)`.
pub fn quasi_periodicity_factor(
    m: &Characteristic,
    tau: &PeriodMatrix,
    z: &[Complex64],
    p: &[i32],
    q: &[i32],
) -> Complex64 {
    let g = tau.g;
    let mut e = Complex64::new(0.0, 0.0);
    for i in 0..g {
        for j in 0..g {
            e -= tau.entry(i, j) * (p[i] * p[j]) as f64;
        }
        e -= 2.0 * z[i] * p[i] as f64;
        e -= (p[i] * ((m.delta() >> i) & 1) as i32) as f64;
        e += (q[i] * ((m.eps() >> i) & 1) as i32) as f64;
    }
    (Complex64::new(0.0, std::f64::consts::PI) * e).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent oracle: plain double loop over a large box, no shells,
    /// no parity binning, characteristic phases applied per term.
    fn oracle_theta_g1(eps: u32, delta: u32, tau: Complex64, z: Complex64, radius: i32) -> Complex64 {
        let mut s = c(0.0, 0.0);
        for n in -radius..=radius {
            let x = n as f64 + eps as f64 / 2.0;
            let arg = tau * x * x + 2.0 * x * (z + delta as f64 / 2.0);
            s += (c(0.0, std::f64::consts::PI) * arg).exp();
        }
        s
    }

    #[test]
    fn odd_constant_is_exactly_zero() {
        let tau = PeriodMatrix::diagonal(&[c(0.3, 0.9)]).unwrap();
        let m = Characteristic::from_vectors(&[1], &[1]).unwrap();
        let v = theta_constant(&m, &tau, &ThetaOptions::default()).unwrap();
        assert_eq!(v.value, c(0.0, 0.0));
        assert_eq!(v.tail_bound, 0.0);
        let v = theta(&m, &tau, &[c(0.0, 0.0)], &ThetaOptions::default()).unwrap();
        assert_eq!(v.value, c(0.0, 0.0));
    }

    #[test]
    fn genus_one_at_i_matches_oracle() {
        let tau = PeriodMatrix::diagonal(&[c(0.0, 1.0)]).unwrap();
        let m = Characteristic::zero(1);
        let v = theta_constant(&m, &tau, &ThetaOptions::default()).unwrap();
        let o = oracle_theta_g1(0, 0, c(0.0, 1.0), c(0.0, 0.0), 20);
        assert!((v.value - o).norm() < 1e-14);
        assert!((v.value.re - 1.086434811213308).abs() < 1e-14);
        // theta_{01}(i) / theta_{00}(i) = 2^{-1/4}
        let m01 = Characteristic::from_vectors(&[0], &[1]).unwrap();
        let w = theta_constant(&m01, &tau, &ThetaOptions::default()).unwrap();
        assert!((w.value.re / v.value.re - 2f64.powf(-0.25)).abs() < 1e-13);
    }

    #[test]
    fn genus_one_with_z_matches_oracle() {
        let tau_c = c(0.21, 0.83);
        let tau = PeriodMatrix::diagonal(&[tau_c]).unwrap();
        let z = c(0.17, -0.11);
        for bits in 0..4u32 {
            let m = Characteristic::from_bits(1, bits).unwrap();
            let v = theta(&m, &tau, &[z], &ThetaOptions::default()).unwrap();
            let o = oracle_theta_g1(m.eps(), m.delta(), tau_c, z, 30);
            assert!((v.value - o).norm() < 1e-12, "{m:?}");
        }
    }

    #[test]
    fn block_diagonal_factorizes() {
        let t1 = c(0.1, 1.1);
        let t2 = c(-0.3, 0.9);
        let tau = PeriodMatrix::diagonal(&[t1, t2]).unwrap();
        let a = PeriodMatrix::diagonal(&[t1]).unwrap();
        let b = PeriodMatrix::diagonal(&[t2]).unwrap();
        let opts = ThetaOptions::default();
        let big = batch_theta_constants(&tau, &opts).unwrap();
        let ta = batch_theta_constants(&a, &opts).unwrap();
        let tb = batch_theta_constants(&b, &opts).unwrap();
        for e in 0..4u32 {
            for d in 0..4u32 {
                let m = Characteristic::from_parts(2, e, d).unwrap();
                let m1 = Characteristic::from_parts(1, e & 1, d & 1).unwrap();
                let m2 = Characteristic::from_parts(1, e >> 1, d >> 1).unwrap();
                let lhs = big.get(&m).value;
                let rhs = ta.get(&m1).value * tb.get(&m2).value;
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn batch_counts() {
        let tau = PeriodMatrix::diagonal(&[c(0.0, 1.0)]).unwrap();
        let t = batch_theta_constants(&tau, &ThetaOptions::default()).unwrap();
        assert_eq!(t.iter().filter(|(_, v)| v.value != c(0.0, 0.0)).count(), 3);
    }

    #[test]
    fn rejects_bad_tau() {
        let asym = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.1, 0.0), c(0.2, 0.0), c(0.0, 1.0)]);
        assert!(matches!(PeriodMatrix::new(asym), Err(Error::NotSymmetric(_))));
        let indef = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 2.0), c(0.0, 2.0), c(0.0, 1.0)]);
        assert!(matches!(PeriodMatrix::new(indef), Err(Error::NotPositiveDefinite(_))));
        let thin = PeriodMatrix::diagonal(&[c(0.0, 1e-4)]).unwrap();
        let r = theta_constant(&Characteristic::zero(1), &thin, &ThetaOptions::default());
        assert!(matches!(r, Err(Error::NearDegenerate { .. })));
        let opts = ThetaOptions {
            max_radius: 1,
            ..Default::default()
        };
        let tau = PeriodMatrix::diagonal(&[c(0.0, 0.05)]).unwrap();
        assert!(matches!(
            theta_constant(&Characteristic::zero(1), &tau, &opts),
            Err(Error::RadiusCapExceeded { .. })
        ));
    }

    #[test]
    fn tau_json_roundtrip() {
        let tau = PeriodMatrix::diagonal(&[c(0.125, 1.5), c(-0.25, 0.75)]).unwrap();
        let s = serde_json::to_string(&tau).unwrap();
        let back: PeriodMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(tau, back);
    }
}
