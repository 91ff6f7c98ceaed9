//! Identities near the boundary: Riemann's quartic relation, the eighth-power
//! half-argument identity, Fourier-Jacobi expansions in
//! `q = exp(pi i tau11 / 4)`, and the heat-equation gradient check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ansatz::{f_from, FormValue};
use crate::charspace::{e_pairing_bits, tricharacter_exponent, Characteristic};
use crate::error::{Error, Result};
use crate::numeric::{abs_sum, csum};
use crate::theta::{batch_theta, batch_theta_constants, PeriodMatrix, ThetaOptions, ThetaTable};

fn tri(g: usize, a: u32, b: u32, c: u32) -> f64 {
    if tricharacter_exponent(g, a, b, c) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn quartic(t: &ThetaTable, n: u32, a: u32, b: u32) -> Complex64 {
    t.value(n) * t.value(n ^ a) * t.value(n ^ b) * t.value(n ^ a ^ b)
}

/// Relative residual of Riemann's quartic relation at `(m, a, b)`, from
/// precomputed theta constants.
pub fn riemann_quartic_residual_from(t: &ThetaTable, m: &Characteristic, a: &Characteristic, b: &Characteristic) -> Result<f64> {
    let g = t.genus();
    for c in [m, a, b] {
        if c.genus() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                found: c.genus(),
            });
        }
    }
    let (m, a, b) = (m.bits(), a.bits(), b.bits());
    let sign = |n: u32| tri(g, n, a, a) * tri(g, n, b, b) * tri(g, n, a, b);
    let lhs = quartic(t, m, a, b) * sign(m);
    let norm = 2f64.powi(-(g as i32));
    let terms: Vec<Complex64> = (0..1u32 << (2 * g))
        .map(|n| quartic(t, n, a, b) * (sign(n) * e_pairing_bits(g, m, n) as f64 * norm))
        .collect();
    let rhs = csum(terms.iter().copied());
    let scale = lhs.norm() + abs_sum(terms);
    Ok(if scale == 0.0 { 0.0 } else { (lhs - rhs).norm() / scale })
}

pub fn riemann_quartic_residual(
    m: &Characteristic,
    a: &Characteristic,
    b: &Characteristic,
    tau: &PeriodMatrix,
    opts: &ThetaOptions,
) -> Result<f64> {
    riemann_quartic_residual_from(&batch_theta_constants(tau, opts)?, m, a, b)
}

fn halve(z: &[Complex64]) -> Vec<Complex64> {
    z.iter().map(|c| c * 0.5).collect()
}

/// `sum_m theta_m^8(tau, z/2)` and `sum_m theta_m^6(tau, 0) theta_m^2(tau, z)`
/// over all characteristics, odd ones included.
fn eighth_identity_sides(tau: &PeriodMatrix, z: &[Complex64], opts: &ThetaOptions) -> Result<(Complex64, Complex64, f64)> {
    let half = batch_theta(tau, &halve(z), opts)?;
    let at_z = batch_theta(tau, z, opts)?;
    let at_0 = batch_theta_constants(tau, opts)?;
    let n = half.len() as u32;
    let lhs_terms: Vec<Complex64> = (0..n).map(|m| half.value(m).powi(8)).collect();
    let rhs_terms: Vec<Complex64> = (0..n).map(|m| at_0.value(m).powi(6) * at_z.value(m).powi(2)).collect();
    let scale = abs_sum(lhs_terms.iter().copied()) + abs_sum(rhs_terms.iter().copied());
    Ok((csum(lhs_terms), csum(rhs_terms), scale))
}

/// Relative residual of `sum theta^8(tau, z/2) = sum theta^6(tau, 0) theta^2(tau, z)`.
pub fn theta_eighth_identity_residual(tau: &PeriodMatrix, z: &[Complex64], opts: &ThetaOptions) -> Result<f64> {
    let (l, r, scale) = eighth_identity_sides(tau, z, opts)?;
    Ok(if scale == 0.0 { 0.0 } else { (l - r).norm() / scale })
}

/// A point near the boundary: the bordered matrix `[[tau11, z'], [z, tau]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub tau: PeriodMatrix,
    pub z: Vec<Complex64>,
    pub tau11: Complex64,
}

impl BoundaryPoint {
    pub fn new(tau: PeriodMatrix, z: Vec<Complex64>, tau11: Complex64) -> Result<Self> {
        if z.len() != tau.genus() {
            return Err(Error::DimensionMismatch {
                expected: tau.genus(),
                found: z.len(),
            });
        }
        if tau11.im < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "Im tau11 = {} < 1: too far from the boundary for the q-expansion",
                tau11.im
            )));
        }
        let bp = Self { tau, z, tau11 };
        bp.bordered()?;
        Ok(bp)
    }

    /// Genus of the bordered matrix.
    pub fn genus(&self) -> usize {
        self.tau.genus() + 1
    }

    pub fn q(&self) -> Complex64 {
        (Complex64::new(0.0, std::f64::consts::PI / 4.0) * self.tau11).exp()
    }

    pub fn with_tau11(&self, tau11: Complex64) -> Result<Self> {
        Self::new(self.tau.clone(), self.z.clone(), tau11)
    }

    pub fn bordered(&self) -> Result<PeriodMatrix> {
        let h = self.tau.genus();
        let m = DMatrix::from_fn(h + 1, h + 1, |i, j| match (i, j) {
            (0, 0) => self.tau11,
            (0, j) => self.z[j - 1],
            (i, 0) => self.z[i - 1],
            (i, j) => self.tau.entry(i - 1, j - 1),
        });
        PeriodMatrix::new(m)
    }
}

/// Splits a genus-g characteristic into its first entries `(eps1, delta1)` and
/// the genus-(g-1) remainder.
fn split_first(m: &Characteristic) -> Result<(u32, u32, Characteristic)> {
    let g = m.genus();
    if g < 2 {
        return Err(Error::InvalidArgument("need genus >= 2 to split off a corner".into()));
    }
    let (e, d) = (m.eps(), m.delta());
    let rest = Characteristic::from_parts(g - 1, e >> 1, d >> 1)?;
    Ok((e & 1, d & 1, rest))
}

/// Leading term `coefficient * q^order` of `theta_m` at the bordered matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FjTerm {
    pub order: u32,
    pub coefficient: Complex64,
}

/// The two-term models: for `eps1 = 0`,
/// `theta[rest](tau, 0) + (1 + (-1)^{rest parity}) e^{pi i delta1} q^4 theta[rest](tau, z)`;
/// for `eps1 = 1`,
/// `q (e^{pi i delta1/2} + (-1)^{rest parity} e^{-pi i delta1/2}) theta[rest](tau, z/2)`.
fn fj_terms(m: &Characteristic, bp: &BoundaryPoint, opts: &ThetaOptions) -> Result<(FjTerm, FjTerm)> {
    if m.genus() != bp.genus() {
        return Err(Error::DimensionMismatch {
            expected: bp.genus(),
            found: m.genus(),
        });
    }
    let (e1, d1, rest) = split_first(m)?;
    let flip = if rest.is_even() { 1.0 } else { -1.0 };
    if e1 == 0 {
        let c0 = crate::theta::theta_constant(&rest, &bp.tau, opts)?.value;
        let cz = crate::theta::theta(&rest, &bp.tau, &bp.z, opts)?.value;
        let c4 = cz * (if d1 == 0 { 1.0 } else { -1.0 }) * (1.0 + flip);
        Ok((FjTerm { order: 0, coefficient: c0 }, FjTerm { order: 4, coefficient: c4 }))
    } else {
        let ch = crate::theta::theta(&rest, &bp.tau, &halve(&bp.z), opts)?.value;
        // e^{pi i d/2} + flip e^{-pi i d/2}, exactly
        let factor = if d1 == 0 {
            Complex64::new(1.0 + flip, 0.0)
        } else {
            Complex64::new(0.0, 1.0 - flip)
        };
        let c1 = ch * factor;
        Ok((
            FjTerm { order: 1, coefficient: c1 },
            FjTerm {
                order: 9,
                coefficient: Complex64::new(0.0, 0.0),
            },
        ))
    }
}

pub fn fj_theta_leading(m: &Characteristic, bp: &BoundaryPoint, opts: &ThetaOptions) -> Result<FjTerm> {
    Ok(fj_terms(m, bp, opts)?.0)
}

/// Two-term model value of `theta_m` at the bordered matrix and the order of
/// the first neglected power of `q`.
pub fn fj_theta_model(m: &Characteristic, bp: &BoundaryPoint, opts: &ThetaOptions) -> Result<(Complex64, u32)> {
    let (a, b) = fj_terms(m, bp, opts)?;
    let q = bp.q();
    let v = a.coefficient * q.powu(a.order) + b.coefficient * q.powu(b.order);
    Ok((v, if a.order == 0 { 16 } else { 9 }))
}

/// Boundary data of genus-h theta values needed by the q-expansion of `F_{h+1}`.
struct BoundarySums {
    h: usize,
    /// `sum theta^8(tau, 0)`
    t8: Complex64,
    /// `sum theta^14(tau, 0) theta^2(tau, z)`
    u14: Complex64,
    /// `sum theta^6(tau, 0) theta^2(tau, z)`
    u6: Complex64,
    /// `sum theta^8(tau, z/2)`
    w: Complex64,
    /// magnitude for relative comparisons of q^8 coefficients
    scale: f64,
    f_lower: FormValue,
}

fn boundary_sums(tau: &PeriodMatrix, z: &[Complex64], opts: &ThetaOptions) -> Result<BoundarySums> {
    let h = tau.genus();
    let t0 = batch_theta_constants(tau, opts)?;
    let tz = batch_theta(tau, z, opts)?;
    let th = batch_theta(tau, &halve(z), opts)?;
    let n = t0.len() as u32;
    let t8 = csum((0..n).map(|m| t0.value(m).powi(8)));
    let u14 = csum((0..n).map(|m| t0.value(m).powi(14) * tz.value(m).powi(2)));
    let u6 = csum((0..n).map(|m| t0.value(m).powi(6) * tz.value(m).powi(2)));
    let w = csum((0..n).map(|m| th.value(m).powi(8)));
    let a8 = abs_sum((0..n).map(|m| t0.value(m).powi(8)));
    let a14 = abs_sum((0..n).map(|m| t0.value(m).powi(14) * tz.value(m).powi(2)));
    let a6 = abs_sum((0..n).map(|m| t0.value(m).powi(6) * tz.value(m).powi(2)));
    let scale = 1920.0 * (2f64.powi(h as i32) * a14 + a8 * a6);
    Ok(BoundarySums {
        h,
        t8,
        u14,
        u6,
        w,
        scale,
        f_lower: f_from(&t0),
    })
}

impl BoundarySums {
    /// `1920 (2^h U14 - T8 U6)`, after the half-argument identity.
    fn q8_closed(&self) -> Complex64 {
        (self.u14 * 2f64.powi(self.h as i32) - self.t8 * self.u6) * 1920.0
    }

    /// `2^{h+1} 960 U14 - 2 T8 (448 U6 + 512 W)`, before it.
    fn q8_split(&self) -> Complex64 {
        self.u14 * (2f64.powi(self.h as i32 + 1) * 960.0) - self.t8 * (self.u6 * 448.0 + self.w * 512.0) * 2.0
    }
}

/// Two-point fit of `F(tau11) = a + b q^8`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QFit {
    pub im_tau11: Vec<f64>,
    pub constant: Complex64,
    pub q8: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QExpansion {
    pub g: usize,
    /// `4 F_{g-1}(tau)`
    pub constant_term: Complex64,
    /// Scale of `F_{g-1}`, times 4.
    pub constant_scale: f64,
    /// `1920 (2^{g-1} sum theta^14 theta_z^2 - sum theta^8 sum theta^6 theta_z^2)`
    pub q8_coefficient: Complex64,
    /// The same coefficient through the 448 / 512 split.
    pub q8_coefficient_split: Complex64,
    pub q8_scale: f64,
    pub fit: QFit,
    /// `|fit q8 - closed q8| / |closed q8|`
    pub fit_residual: f64,
}

/// Fits `a + b q^8` through `F_g` evaluated at two values of `Im tau11`.
pub fn fit_q8(bp: &BoundaryPoint, im_values: [f64; 2], opts: &ThetaOptions) -> Result<QFit> {
    let mut qs = Vec::new();
    let mut fs = Vec::new();
    for &t in &im_values {
        let p = bp.with_tau11(Complex64::new(bp.tau11.re, t))?;
        let f = f_from(&batch_theta_constants(&p.bordered()?, opts)?).value;
        qs.push(p.q().powu(8));
        fs.push(f);
    }
    let b = (fs[0] - fs[1]) / (qs[0] - qs[1]);
    let a = fs[0] - b * qs[0];
    Ok(QFit {
        im_tau11: im_values.to_vec(),
        constant: a,
        q8: b,
    })
}

/// Default fit abscissae for the q^8 coefficient and for the constant term.
pub const Q8_FIT_IM: [f64; 2] = [2.0, 2.5];
pub const CONSTANT_FIT_IM: [f64; 2] = [4.0, 5.0];

pub fn f_boundary_expansion(bp: &BoundaryPoint, opts: &ThetaOptions) -> Result<QExpansion> {
    let g = bp.genus();
    if g > 5 {
        return Err(Error::Unsupported(format!("boundary expansion at genus {g} (max 5)")));
    }
    let s = boundary_sums(&bp.tau, &bp.z, opts)?;
    let q8 = s.q8_closed();
    let fit = fit_q8(bp, Q8_FIT_IM, opts)?;
    let fit_residual = if q8.norm() == 0.0 {
        fit.q8.norm()
    } else {
        (fit.q8 - q8).norm() / q8.norm()
    };
    Ok(QExpansion {
        g,
        constant_term: s.f_lower.value * 4.0,
        constant_scale: s.f_lower.scale * 4.0,
        q8_coefficient: q8,
        q8_coefficient_split: s.q8_split(),
        q8_scale: s.scale,
        fit,
        fit_residual,
    })
}

/// `v_{F_h}(tau, z) = sum_m 240 dF_h/dX_m theta_m^2(tau, z)`, `X_m = theta_m^2(tau, 0)`,
/// `F_h = 2^h sum X^8 - (sum X^4)^2`.
pub fn v_f(tau: &PeriodMatrix, z: &[Complex64], opts: &ThetaOptions) -> Result<FormValue> {
    let h = tau.genus();
    let t0 = batch_theta_constants(tau, opts)?;
    let tz = batch_theta(tau, z, opts)?;
    v_f_from(h, &t0, &tz)
}

fn v_f_from(h: usize, t0: &ThetaTable, tz: &ThetaTable) -> Result<FormValue> {
    let n = t0.len() as u32;
    let x: Vec<Complex64> = (0..n).map(|m| t0.value(m).powi(2)).collect();
    let sum_x4 = csum(x.iter().map(|v| v.powi(4)));
    let two_h = 2f64.powi(h as i32);
    let terms: Vec<Complex64> = (0..n as usize)
        .map(|m| {
            let d = x[m].powi(7) * (8.0 * two_h) - sum_x4 * x[m].powi(3) * 8.0;
            d * tz.value(m as u32).powi(2) * 240.0
        })
        .collect();
    let scale = 240.0
        * 8.0
        * (0..n as usize)
            .map(|m| (two_h * x[m].norm().powi(7) + abs_sum(x.iter().map(|v| v.powi(4))) * x[m].norm().powi(3)) * tz.value(m as u32).norm_sqr())
            .sum::<f64>();
    Ok(FormValue {
        value: csum(terms),
        scale,
        error_bound: 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatReport {
    pub f: FormValue,
    /// `dF/dtau_ij` (symmetric coordinates), step `h`.
    pub gradient: Vec<Vec<Complex64>>,
    pub gradient_norm: f64,
    /// `||dF/dtau|| / scale of F`
    pub gradient_relative: f64,
    /// `||grad_h - grad_{h/2}|| / ||grad_{h/2}||`
    pub step_halving_disagreement: f64,
    /// Second z-derivatives of `v_F` at `z = 0`.
    pub hessian_v: Vec<Vec<Complex64>>,
    /// `240 c_ij dF/dtau_ij` with `c = 4 pi i` on the diagonal, `2 pi i` off it.
    pub hessian_predicted: Vec<Vec<Complex64>>,
    /// `|<H, P>| / (||H|| ||P||)`
    pub correlation: f64,
    pub hessian_relative_error: f64,
    pub step: f64,
}

fn gradient(tau: &PeriodMatrix, h: f64, opts: &ThetaOptions) -> Result<Vec<Vec<Complex64>>> {
    let g = tau.genus();
    let mut grad = vec![vec![Complex64::new(0.0, 0.0); g]; g];
    let step = Complex64::new(h, 0.0);
    for i in 0..g {
        for j in i..g {
            let plus = f_from(&batch_theta_constants(&tau.perturbed(i, j, step)?, opts)?).value;
            let minus = f_from(&batch_theta_constants(&tau.perturbed(i, j, -step)?, opts)?).value;
            let d = (plus - minus) / (2.0 * h);
            grad[i][j] = d;
            grad[j][i] = d;
        }
    }
    Ok(grad)
}

fn frob(m: &[Vec<Complex64>]) -> f64 {
    m.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn hessian_v(tau: &PeriodMatrix, h: f64, opts: &ThetaOptions) -> Result<Vec<Vec<Complex64>>> {
    let g = tau.genus();
    let t0 = batch_theta_constants(tau, opts)?;
    let v_at = |z: &[Complex64]| -> Result<Complex64> {
        let tz = batch_theta(tau, z, opts)?;
        Ok(v_f_from(g, &t0, &tz)?.value)
    };
    let zero = vec![Complex64::new(0.0, 0.0); g];
    let shift = |pairs: &[(usize, f64)]| {
        let mut z = zero.clone();
        for &(k, s) in pairs {
            z[k] += s;
        }
        z
    };
    let v0 = v_at(&zero)?;
    let mut hess = vec![vec![Complex64::new(0.0, 0.0); g]; g];
    for i in 0..g {
        let p = v_at(&shift(&[(i, h)]))?;
        let m = v_at(&shift(&[(i, -h)]))?;
        hess[i][i] = (p - v0 * 2.0 + m) / (h * h);
        for j in i + 1..g {
            let pp = v_at(&shift(&[(i, h), (j, h)]))?;
            let pm = v_at(&shift(&[(i, h), (j, -h)]))?;
            let mp = v_at(&shift(&[(i, -h), (j, h)]))?;
            let mm = v_at(&shift(&[(i, -h), (j, -h)]))?;
            let d = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[i][j] = d;
            hess[j][i] = d;
        }
    }
    Ok(hess)
}

/// Finite-difference gradient of `F_g` at `tau` and the heat-equation
/// comparison with the z-Hessian of `v_{F_g}`.
pub fn heat_gradient_check(tau: &PeriodMatrix, h_fd: f64, opts: &ThetaOptions) -> Result<HeatReport> {
    if !(1e-5..=1e-3).contains(&h_fd) {
        return Err(Error::InvalidArgument(format!("finite-difference step {h_fd} outside [1e-5, 1e-3]")));
    }
    let g = tau.genus();
    let f = f_from(&batch_theta_constants(tau, opts)?);
    let grad = gradient(tau, h_fd, opts)?;
    let grad_half = gradient(tau, h_fd / 2.0, opts)?;
    let diff: Vec<Vec<Complex64>> = grad
        .iter()
        .zip(&grad_half)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    let gradient_norm = frob(&grad_half);
    let step_halving_disagreement = if gradient_norm == 0.0 { 0.0 } else { frob(&diff) / gradient_norm };
    let hess = hessian_v(tau, h_fd.max(1e-4), opts)?;
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let predicted: Vec<Vec<Complex64>> = (0..g)
        .map(|i| {
            (0..g)
                .map(|j| grad_half[i][j] * two_pi_i * if i == j { 2.0 } else { 1.0 } * 240.0)
                .collect()
        })
        .collect();
    let inner: Complex64 = hess
        .iter()
        .flatten()
        .zip(predicted.iter().flatten())
        .map(|(a, b)| a * b.conj())
        .sum();
    let (nh, np) = (frob(&hess), frob(&predicted));
    let correlation = if nh * np == 0.0 { 0.0 } else { inner.norm() / (nh * np) };
    let err: Vec<Vec<Complex64>> = hess
        .iter()
        .zip(&predicted)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    Ok(HeatReport {
        gradient_relative: if f.scale == 0.0 { 0.0 } else { gradient_norm / f.scale },
        f,
        gradient: grad_half,
        gradient_norm,
        step_halving_disagreement,
        hessian_relative_error: if np == 0.0 { frob(&err) } else { frob(&err) / np },
        hessian_v: hess,
        hessian_predicted: predicted,
        correlation,
        step: h_fd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Sampler;

    #[test]
    fn riemann_with_trivial_a_b() {
        let tau = Sampler::new(2).period_matrix(2).unwrap();
        let z = Characteristic::zero(2);
        for m in Characteristic::all(2) {
            let r = riemann_quartic_residual(&m, &z, &z, &tau, &ThetaOptions::default()).unwrap();
            assert!(r < 1e-12, "{m:?}: {r:e}");
        }
    }

    #[test]
    fn eighth_identity_is_trivial_at_zero() {
        let tau = Sampler::new(3).period_matrix(2).unwrap();
        let z = vec![Complex64::new(0.0, 0.0); 2];
        assert!(theta_eighth_identity_residual(&tau, &z, &ThetaOptions::default()).unwrap() < 1e-15);
    }

    #[test]
    fn boundary_point_validation() {
        let tau = Sampler::new(4).period_matrix(2).unwrap();
        let z = vec![Complex64::new(0.1, 0.0); 2];
        assert!(BoundaryPoint::new(tau.clone(), z.clone(), Complex64::new(0.0, 0.5)).is_err());
        assert!(BoundaryPoint::new(tau.clone(), vec![], Complex64::new(0.0, 3.0)).is_err());
        let bp = BoundaryPoint::new(tau, z, Complex64::new(0.0, 3.0)).unwrap();
        assert_eq!(bp.bordered().unwrap().genus(), 3);
        let s = serde_json::to_string(&bp).unwrap();
        assert_eq!(serde_json::from_str::<BoundaryPoint>(&s).unwrap(), bp);
    }

    #[test]
    fn leading_orders() {
        let tau = Sampler::new(5).period_matrix(2).unwrap();
        let bp = BoundaryPoint::new(tau, vec![Complex64::new(0.1, 0.05); 2], Complex64::new(0.0, 4.0)).unwrap();
        let opts = ThetaOptions::default();
        let m0 = Characteristic::from_vectors(&[0, 1, 0], &[1, 0, 0]).unwrap();
        let m1 = Characteristic::from_vectors(&[1, 1, 0], &[1, 1, 0]).unwrap();
        assert_eq!(fj_theta_leading(&m0, &bp, &opts).unwrap().order, 0);
        let l1 = fj_theta_leading(&m1, &bp, &opts).unwrap();
        assert_eq!(l1.order, 1);
        let rest = Characteristic::from_vectors(&[1, 0], &[1, 0]).unwrap();
        let half: Vec<Complex64> = bp.z.iter().map(|c| c * 0.5).collect();
        let th = crate::theta::theta(&rest, &bp.tau, &half, &opts).unwrap().value;
        let expect = th * Complex64::new(0.0, 2.0);
        assert!((l1.coefficient - expect).norm() < 1e-14);
        let odd = Characteristic::from_vectors(&[1, 1, 0], &[1, 0, 0]).unwrap();
        assert_eq!(fj_theta_leading(&odd, &bp, &opts).unwrap().coefficient, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn two_term_model_tracks_direct_theta() {
        let tau = Sampler::new(7).period_matrix(2).unwrap();
        let opts = ThetaOptions::default();
        let bp = BoundaryPoint::new(tau, vec![Complex64::new(0.15, -0.1), Complex64::new(-0.05, 0.2)], Complex64::new(0.3, 3.0)).unwrap();
        let big = batch_theta_constants(&bp.bordered().unwrap(), &opts).unwrap();
        let q = bp.q().norm();
        for m in Characteristic::all_even(3) {
            let (model, next) = fj_theta_model(&m, &bp, &opts).unwrap();
            let err = (big.get(&m).value - model).norm();
            assert!(err < 50.0 * q.powi(next as i32) + 1e-14, "{m:?}: {err:e}");
        }
    }

    #[test]
    fn rejects_bad_steps() {
        let tau = Sampler::new(6).period_matrix(2).unwrap();
        assert!(heat_gradient_check(&tau, 1e-7, &ThetaOptions::default()).is_err());
    }
}
