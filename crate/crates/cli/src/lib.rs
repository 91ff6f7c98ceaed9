//! Report-producing backends for the `theta-lab` command line.
//!
//! Every suite returns a [`VerificationReport`]; the binary prints it as JSON
//! on stdout and a summary on stderr.

use std::time::Instant;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use theta_lab::algebra::{
    coefficient_table, correction_constant, power_of_two_ratio, printed_c5, rational_to_string, relation, CoefficientRow,
    CorrectionConstant, Domain,
};
use theta_lab::ansatz::{f_from, p_form_from, paired_weight, restriction_coefficient, s_form_from, xi_m_from, FormValue};
use theta_lab::charspace::{
    enumerate_even_cosets, enumerate_subspaces, enumerate_subspaces_of, even_count, gaussian_binomial, quadruple_counts,
    resolve_quadruple_convention, Characteristic, QuadrupleConvention, QuadrupleCounts, Subspace,
};
use theta_lab::degeneration::{
    f_boundary_expansion, fit_q8, heat_gradient_check, riemann_quartic_residual_from, theta_eighth_identity_residual,
    BoundaryPoint, CONSTANT_FIT_IM,
};
use theta_lab::hyperelliptic::{period_matrix, random_hyperelliptic, HyperellipticCurve, PeriodData, QuadratureOptions};
use theta_lab::lattice::{norm_vector_count, GramMatrix};
use theta_lab::sampling::Sampler;
use theta_lab::theta::{batch_theta_constants, PeriodMatrix, ThetaOptions, ThetaTable};
use theta_lab::{Error, Result};

/// Fit tolerance for the q^8 coefficient of the boundary expansion.
pub const Q8_FIT_TOL: f64 = 1e-2;
/// Agreement of the two closed forms of the q^8 coefficient.
pub const Q8_SPLIT_TOL: f64 = 1e-10;
/// Floor, relative to its scale, below which the q^8 coefficient counts as zero.
pub const Q8_ZERO_FLOOR: f64 = 1e-6;
pub const HEAT_STEP: f64 = 1e-4;
pub const HEAT_MIN_GRADIENT: f64 = 1e-4;
pub const HEAT_STEP_HALVING_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub index: usize,
    pub label: String,
    /// SHA-256 prefix of the serialized inputs.
    pub inputs: String,
    pub residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Case {
    pub fn new(index: usize, label: impl Into<String>, inputs: &Value, residual: f64, scale: f64, tolerance: f64) -> Self {
        Self {
            index,
            label: label.into(),
            inputs: digest(inputs),
            residual,
            scale,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

pub fn digest(v: &Value) -> String {
    let h = Sha256::digest(v.to_string().as_bytes());
    h.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub config: Value,
    pub cases: Vec<Case>,
    pub wall_time: f64,
    pub pass: bool,
}

impl VerificationReport {
    fn new(suite: &str, seed: u64, config: Value, mut cases: Vec<Case>, start: Instant) -> Self {
        cases.sort_by_key(|c| c.index);
        let pass = !cases.is_empty() && cases.iter().all(|c| c.pass);
        Self {
            suite: suite.into(),
            seed,
            config,
            cases,
            wall_time: start.elapsed().as_secs_f64(),
            pass,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.cases.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn summary(&self) -> String {
        let failed = self.cases.iter().filter(|c| !c.pass).count();
        format!(
            "{}: {} cases, {} failed, max residual {:.3e}, {:.2}s",
            self.suite,
            self.cases.len(),
            failed,
            self.max_residual(),
            self.wall_time
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    Igusa,
    Riemann,
    Theta8,
    Factorization,
    Fj,
    Heat,
    Schottky,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Igusa,
        Suite::Riemann,
        Suite::Theta8,
        Suite::Factorization,
        Suite::Fj,
        Suite::Heat,
        Suite::Schottky,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Igusa => "igusa",
            Suite::Riemann => "riemann",
            Suite::Theta8 => "theta8",
            Suite::Factorization => "factorization",
            Suite::Fj => "fj",
            Suite::Heat => "heat",
            Suite::Schottky => "schottky",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub g: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub theta: ThetaOptions,
}

impl VerifyConfig {
    pub fn new(g: usize, trials: usize, seed: u64, tol: f64) -> Self {
        Self {
            g,
            trials,
            seed,
            tol,
            theta: ThetaOptions::default(),
        }
    }

    fn echo(&self, suite: Suite) -> Value {
        let mut v = serde_json::to_value(self).expect("plain data");
        v["suite"] = json!(suite.name());
        if suite == Suite::Fj {
            v["q8_fit_tol"] = json!(Q8_FIT_TOL);
            v["q8_split_tol"] = json!(Q8_SPLIT_TOL);
            v["q8_zero_floor"] = json!(Q8_ZERO_FLOOR);
        }
        if suite == Suite::Heat {
            v["step"] = json!(HEAT_STEP);
            v["min_gradient"] = json!(HEAT_MIN_GRADIENT);
            v["step_halving_tol"] = json!(HEAT_STEP_HALVING_TOL);
            v["quadrature"] = serde_json::to_value(QuadratureOptions::default()).expect("plain data");
        }
        v
    }
}

/// Seed of trial `index`; reports record the index so any case can be rerun.
pub fn trial_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index as u64)
}

fn tau_json(tau: &PeriodMatrix) -> Value {
    serde_json::to_value(tau).expect("plain data")
}

fn z_json(z: &[Complex64]) -> Value {
    serde_json::to_value(z).expect("plain data")
}

fn relative(v: Complex64, scale: f64) -> f64 {
    if scale == 0.0 {
        v.norm()
    } else {
        v.norm() / scale
    }
}

/// Igusa relation `k` evaluated through the S forms: `(residual, scale)`.
pub fn igusa_residual(t: &ThetaTable, k: usize) -> Result<(f64, f64)> {
    let rel = relation(k, t.genus())?;
    let mut v = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (j, c) in rel.terms() {
        let c = c.to_f64().unwrap_or(f64::NAN);
        let s = s_form_from(t, j, paired_weight(j)?)?;
        v += s.value * c;
        scale += c.abs() * s.scale;
    }
    Ok((relative(v, scale), scale))
}

fn check_genus(suite: Suite, g: usize, lo: usize, hi: usize) -> Result<()> {
    if g < lo || g > hi {
        return Err(Error::InvalidArgument(format!(
            "suite {} runs at genus {lo}..={hi}, got {g}",
            suite.name()
        )));
    }
    Ok(())
}

fn random_char(rng: &mut Sampler, g: usize) -> Result<Characteristic> {
    Characteristic::from_bits(g, rng.bits(2 * g))
}

fn trial_cases(cfg: &VerifyConfig, suite: Suite, index: usize) -> Result<Vec<Case>> {
    let g = cfg.g;
    let opts = &cfg.theta;
    let mut rng = Sampler::new(trial_seed(cfg.seed, index));
    let case = |label: String, inputs: &Value, residual: f64, scale: f64, tol: f64| Case::new(index, label, inputs, residual, scale, tol);
    match suite {
        Suite::Igusa => {
            let tau = rng.period_matrix(g)?;
            let t = batch_theta_constants(&tau, opts)?;
            let inputs = tau_json(&tau);
            (0..=g - 2)
                .filter(|&k| Domain::H.admits(k, g))
                .map(|k| {
                    let (r, s) = igusa_residual(&t, k)?;
                    Ok(case(format!("relation k={k}"), &inputs, r, s, cfg.tol))
                })
                .collect()
        }
        Suite::Riemann => {
            let tau = rng.period_matrix(g)?;
            let (m, a, b) = (random_char(&mut rng, g)?, random_char(&mut rng, g)?, random_char(&mut rng, g)?);
            let t = batch_theta_constants(&tau, opts)?;
            let r = riemann_quartic_residual_from(&t, &m, &a, &b)?;
            let inputs = json!({"tau": tau_json(&tau), "m": m.bits(), "a": a.bits(), "b": b.bits()});
            Ok(vec![case(format!("{m:?} {a:?} {b:?}"), &inputs, r, 1.0, cfg.tol)])
        }
        Suite::Theta8 => {
            let tau = rng.period_matrix(g)?;
            let z = rng.small_vector(g, 0.5);
            let r = theta_eighth_identity_residual(&tau, &z, opts)?;
            let inputs = json!({"tau": tau_json(&tau), "z": z_json(&z)});
            Ok(vec![case("sum theta^8(z/2)".into(), &inputs, r, 1.0, cfg.tol)])
        }
        Suite::Factorization => {
            let t1 = rng.period_matrix(1)?;
            let t2 = rng.period_matrix(g - 1)?;
            let big = PeriodMatrix::block_diagonal(&t1, &t2)?;
            let inputs = json!({"tau1": tau_json(&t1), "tau2": tau_json(&t2)});
            let (a, b, c) = (
                batch_theta_constants(&t1, opts)?,
                batch_theta_constants(&t2, opts)?,
                batch_theta_constants(&big, opts)?,
            );
            let lhs = xi_m_from(&c, &Characteristic::zero(g))?;
            let x1 = xi_m_from(&a, &Characteristic::zero(1))?;
            let x2 = xi_m_from(&b, &Characteristic::zero(g - 1))?;
            let scale = lhs.scale.max(x1.scale * x2.scale);
            let mut out = vec![case(
                "Xi[0] factorization".into(),
                &inputs,
                relative(lhs.value - x1.value * x2.value, scale),
                scale,
                cfg.tol,
            )];
            for i in 0..=g.min(4) {
                let (r, s) = p_restriction_residual(&a, &b, &c, i)?;
                out.push(case(format!("P_{i} restriction"), &inputs, r, s, cfg.tol));
            }
            Ok(out)
        }
        Suite::Fj => {
            let h = g - 1;
            let tau = rng.period_matrix(h)?;
            let z = rng.small_vector(h, 0.2);
            let tau11 = Complex64::new(rng.uniform(-0.5, 0.5), 3.0);
            let bp = BoundaryPoint::new(tau, z, tau11)?;
            let inputs = serde_json::to_value(&bp).expect("plain data");
            let e = f_boundary_expansion(&bp, opts)?;
            let fit = fit_q8(&bp, CONSTANT_FIT_IM, opts)?;
            let constant = relative(fit.constant - e.constant_term, e.constant_scale);
            let split = relative(e.q8_coefficient - e.q8_coefficient_split, e.q8_scale);
            let denom = e.q8_coefficient.norm().max(Q8_ZERO_FLOOR * e.q8_scale);
            let fit_res = (e.fit.q8 - e.q8_coefficient).norm() / denom;
            Ok(vec![
                case("constant term = 4 F_{g-1}".into(), &inputs, constant, e.constant_scale, cfg.tol),
                case("q8: 448/512 split vs closed form".into(), &inputs, split, e.q8_scale, Q8_SPLIT_TOL),
                case("q8: fit vs closed form".into(), &inputs, fit_res, denom, Q8_FIT_TOL),
            ])
        }
        Suite::Heat => {
            let curve = random_hyperelliptic(g, trial_seed(cfg.seed, index))?;
            let data = period_matrix(&curve, &QuadratureOptions::default())?;
            let rep = heat_gradient_check(&data.tau, HEAT_STEP, opts)?;
            let inputs = serde_json::to_value(&curve).expect("plain data");
            let inv = if rep.gradient_relative > 0.0 {
                1.0 / rep.gradient_relative
            } else {
                f64::INFINITY
            };
            Ok(vec![
                case("F/scale at the Jacobian point".into(), &inputs, rep.f.relative(), rep.f.scale, cfg.tol),
                case(
                    format!("scale/||dF|| (needs ||dF||/scale > {HEAT_MIN_GRADIENT:e})"),
                    &inputs,
                    inv,
                    rep.f.scale,
                    1.0 / HEAT_MIN_GRADIENT,
                ),
                case(
                    "gradient step-halving disagreement".into(),
                    &inputs,
                    rep.step_halving_disagreement,
                    rep.gradient_norm,
                    HEAT_STEP_HALVING_TOL,
                ),
            ])
        }
        Suite::Schottky => {
            let tau = rng.period_matrix(g)?;
            let f = f_from(&batch_theta_constants(&tau, opts)?);
            Ok(vec![case("F/scale".into(), &tau_json(&tau), f.relative(), f.scale, cfg.tol)])
        }
    }
}

/// `P_{i,s}` on a block-diagonal matrix against the restriction sum.
fn p_restriction_residual(a: &ThetaTable, b: &ThetaTable, big: &ThetaTable, i: usize) -> Result<(f64, f64)> {
    let s = paired_weight(i)?;
    let lhs = p_form_from(big, i, s)?;
    let (ka, kb) = (a.genus(), b.genus());
    let mut rhs = Complex64::new(0.0, 0.0);
    for n in 0..=i.min(2 * ka) {
        for m in 0..=i.min(2 * kb) {
            let c = restriction_coefficient(n, m, i);
            if c == 0 {
                continue;
            }
            let pa = p_form_from(a, n, s << (i - n))?;
            let pb = p_form_from(b, m, s << (i - m))?;
            rhs += pa.value * pb.value * c as f64;
        }
    }
    let scale = lhs.scale.max(f64::MIN_POSITIVE);
    Ok((relative(lhs.value - rhs, scale), scale))
}

pub fn verify(suite: Suite, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    match suite {
        Suite::Igusa => check_genus(suite, cfg.g, 2, 4)?,
        Suite::Riemann | Suite::Theta8 | Suite::Schottky => check_genus(suite, cfg.g, 1, 5)?,
        Suite::Factorization => check_genus(suite, cfg.g, 2, 4)?,
        Suite::Fj => check_genus(suite, cfg.g, 3, 5)?,
        Suite::Heat => check_genus(suite, cfg.g, 4, 4)?,
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let cases: Vec<Vec<Case>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| trial_cases(cfg, suite, i))
        .collect::<Result<_>>()?;
    Ok(VerificationReport::new(
        suite.name(),
        cfg.seed,
        cfg.echo(suite),
        cases.into_iter().flatten().collect(),
        start,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffsReport {
    pub rows: Vec<CoefficientRow>,
    pub printed_c5: String,
    pub c5_matches_printed: bool,
    /// `k` with `c5 = 2^k * printed`, when such a power of two exists.
    pub c5_over_printed_log2: Option<i64>,
    pub correction: CorrectionConstant,
    /// Genera `g >= 4` with `c_g = 0`.
    pub vanishing: Vec<usize>,
    pub wall_time: f64,
    pub pass: bool,
}

impl CoeffsReport {
    pub fn c(&self, g: usize) -> Option<&CoefficientRow> {
        self.rows.iter().find(|r| r.g == g)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("coeffs: {} rows, {:.2}s", self.rows.len(), self.wall_time);
        if let Some(r) = self.c(5) {
            s += &format!(
                "; c5 = {} (printed {}{})",
                rational_to_string(&r.c_g),
                self.printed_c5,
                match (self.c5_matches_printed, self.c5_over_printed_log2) {
                    (true, _) => ", match".to_string(),
                    (false, Some(k)) => format!(", differs by 2^{k}"),
                    (false, None) => ", differs".to_string(),
                }
            );
        }
        if !self.vanishing.is_empty() {
            s += &format!("; c_g = 0 at g = {:?}", self.vanishing);
        }
        s
    }
}

pub fn coeffs(gmax: usize) -> Result<CoeffsReport> {
    let start = Instant::now();
    if gmax < 2 {
        return Err(Error::InvalidArgument("gmax must be at least 2".into()));
    }
    let rows = coefficient_table(gmax)?;
    let correction = correction_constant()?;
    let printed = printed_c5();
    let c5 = rows.iter().find(|r| r.g == 5).map(|r| r.c_g.clone());
    let vanishing: Vec<usize> = rows
        .iter()
        .filter(|r| r.g >= 4 && r.c_g.is_zero())
        .map(|r| r.g)
        .collect();
    Ok(CoeffsReport {
        c5_matches_printed: c5.as_ref() == Some(&printed),
        c5_over_printed_log2: c5.as_ref().and_then(|c| power_of_two_ratio(c, &printed)),
        printed_c5: rational_to_string(&printed),
        correction,
        pass: vanishing.is_empty(),
        vanishing,
        rows,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormKind {
    P,
    S,
    Xi,
    F,
    Schottky,
}

impl std::str::FromStr for FormKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "P" => Ok(FormKind::P),
            "S" => Ok(FormKind::S),
            "Xi" => Ok(FormKind::Xi),
            "F" => Ok(FormKind::F),
            "schottky" => Ok(FormKind::Schottky),
            _ => Err(format!("unknown form {s:?} (P, S, Xi, F, schottky)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FormParams {
    pub i: Option<usize>,
    pub s: Option<u32>,
    /// Characteristic bits for `Xi[m]`.
    pub m: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub form: FormKind,
    pub g: usize,
    pub params: FormParams,
    pub value: Complex64,
    pub scale: f64,
    pub relative: f64,
    pub error_bound: f64,
}

pub fn parse_tau(text: &str) -> Result<PeriodMatrix> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn eval(form: FormKind, tau: &PeriodMatrix, params: FormParams, opts: &ThetaOptions) -> Result<EvalReport> {
    let g = tau.genus();
    let t = batch_theta_constants(tau, opts)?;
    let weight = |i: usize| params.s.map_or_else(|| paired_weight(i), Ok);
    let v: FormValue = match form {
        FormKind::P => {
            let i = params.i.unwrap_or(0);
            p_form_from(&t, i, weight(i)?)?
        }
        FormKind::S => {
            let i = params.i.unwrap_or(0);
            s_form_from(&t, i, weight(i)?)?
        }
        FormKind::Xi => match params.m {
            Some(bits) => xi_m_from(&t, &Characteristic::from_bits(g, bits)?)?,
            None => theta_lab::ansatz::xi_from(&t)?,
        },
        FormKind::F => f_from(&t),
        FormKind::Schottky => theta_lab::lattice::schottky_combination_value(tau, opts)?,
    };
    Ok(EvalReport {
        form,
        g,
        params,
        value: v.value,
        scale: v.scale,
        relative: v.relative(),
        error_bound: v.error_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FCheck {
    pub relative: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodsReport {
    pub curve: HyperellipticCurve,
    pub genus: usize,
    pub periods: PeriodData,
    pub f_check: Option<FCheck>,
    pub wall_time: f64,
}

/// Default tolerance of the Jacobian-locus vanishing check.
pub const PERIOD_F_TOL: f64 = 1e-5;

pub fn periods(curve: &HyperellipticCurve, check_f: Option<f64>, opts: &ThetaOptions) -> Result<PeriodsReport> {
    let start = Instant::now();
    let data = period_matrix(curve, &QuadratureOptions::default())?;
    let f_check = match check_f {
        Some(tol) => {
            let f = f_from(&batch_theta_constants(&data.tau, opts)?);
            Some(FCheck {
                relative: f.relative(),
                scale: f.scale,
                tolerance: tol,
                pass: f.relative() <= tol,
            })
        }
        None => None,
    };
    Ok(PeriodsReport {
        genus: curve.genus(),
        curve: curve.clone(),
        periods: data,
        f_check,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountEntry {
    pub name: String,
    pub value: u128,
    /// Independent count by enumeration.
    pub enumerated: u128,
    pub expected: Option<u128>,
    pub pass: bool,
}

impl CountEntry {
    fn new(name: String, value: u128, enumerated: u128, expected: Option<u128>) -> Self {
        let pass = value == enumerated && expected.map_or(true, |e| e == value);
        Self {
            name,
            value,
            enumerated,
            expected,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsReport {
    pub entries: Vec<CountEntry>,
    pub quadruples: Vec<QuadrupleCounts>,
    pub quadruple_convention: Option<QuadrupleConvention>,
    pub pass: bool,
}

pub fn counts() -> Result<CountsReport> {
    let mut entries = Vec::new();
    for g in 1..=5 {
        let formula = (1u128 << (g - 1)) * ((1u128 << g) + 1);
        let enumerated = Characteristic::all(g).filter(|m| m.is_even()).count() as u128;
        entries.push(CountEntry::new(
            format!("even characteristics g={g}"),
            even_count(g) as u128,
            enumerated,
            Some(formula),
        ));
    }
    for (n, k, expect) in [(4usize, 1usize, 15u128), (5, 2, 155)] {
        entries.push(CountEntry::new(
            format!("[{n} {k}]_2"),
            gaussian_binomial(n, k),
            enumerate_subspaces_of(n, k)?.len() as u128,
            Some(expect),
        ));
    }
    for g in 1..=3 {
        let v = &enumerate_subspaces(g, 0)?[0];
        entries.push(CountEntry::new(
            format!("even cosets of 0 at g={g}"),
            even_count(g) as u128,
            enumerate_even_cosets(v)?.len() as u128,
            None,
        ));
    }
    for (s, expect) in [(GramMatrix::e8(), 240u128), (GramMatrix::d16_plus(), 480)] {
        let enumerated = s.count_norm(2) as u128;
        entries.push(CountEntry::new(
            format!("{} norm-2 vectors", s.name()),
            norm_vector_count(&s, 2)? as u128,
            enumerated,
            Some(expect),
        ));
    }
    let n = Subspace::span(6, &[1, 2, 4])?;
    let quadruples = QuadrupleConvention::ALL
        .iter()
        .map(|&c| quadruple_counts(&n, c))
        .collect::<Result<Vec<_>>>()?;
    let resolved = resolve_quadruple_convention(&n)?;
    let pass = entries.iter().all(|e| e.pass) && resolved.is_some();
    Ok(CountsReport {
        entries,
        quadruples,
        quadruple_convention: resolved.map(|q| q.convention),
        pass,
    })
}

/// Rayon pool size from `THETA_LAB_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("THETA_LAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("THETA_LAB_THREADS={v:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}
