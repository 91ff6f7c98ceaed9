//! Theta series of even unimodular lattices, summed directly over lattice
//! vectors (genus 1 and 2) or through theta constants (any genus).

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ansatz::{s_form_from, FormValue};
use crate::error::{Error, Result};
use crate::numeric::NeumaierC;
use crate::theta::{batch_theta_constants, PeriodMatrix, ThetaOptions, ThetaTable};

/// Integer Gram matrix of an even positive definite unimodular lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GramMatrix {
    name: String,
    entries: Vec<Vec<i64>>,
}

impl GramMatrix {
    pub fn new(name: impl Into<String>, entries: Vec<Vec<i64>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("Gram matrix must be square and nonempty".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::InvalidArgument(format!("Gram matrix not symmetric at ({i}, {j})")));
                }
            }
            // x'Sx = sum S_ii x_i^2 + 2 sum_{i<j} S_ij x_i x_j, so even diagonal is enough
            if entries[i][i] % 2 != 0 {
                return Err(Error::InvalidArgument(format!("odd diagonal entry at {i}: lattice not even")));
            }
        }
        let g = Self {
            name: name.into(),
            entries,
        };
        if g.to_f64().cholesky().is_none() {
            return Err(Error::InvalidArgument("Gram matrix not positive definite".into()));
        }
        let det = g.determinant();
        if det != 1 {
            return Err(Error::InvalidArgument(format!("determinant {det}, lattice not unimodular")));
        }
        Ok(g)
    }

    /// E8 from its Cartan matrix.
    pub fn e8() -> Self {
        let mut m = vec![vec![0i64; 8]; 8];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 2;
        }
        let mut link = |a: usize, b: usize| {
            m[a][b] = -1;
            m[b][a] = -1;
        };
        for i in 0..6 {
            link(i, i + 1);
        }
        link(4, 7);
        Self::new("E8", m).expect("E8 Cartan matrix is even unimodular")
    }

    /// D16+ from the basis `h = (1/2, ..., 1/2)`, `e_k - e_{k+1}` (k = 2..15)
    /// and `e_15 + e_16`.
    pub fn d16_plus() -> Self {
        let n = 16;
        // rows in doubled coordinates
        let mut rows: Vec<Vec<i64>> = vec![vec![1; n]];
        for k in 1..n - 1 {
            let mut v = vec![0; n];
            v[k] = 2;
            v[k + 1] = -2;
            rows.push(v);
        }
        let mut v = vec![0; n];
        v[n - 2] = 2;
        v[n - 1] = 2;
        rows.push(v);
        let gram = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum::<i64>() / 4)
                    .collect()
            })
            .collect();
        Self::new("D16+", gram).expect("D16+ basis is even unimodular")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "E8" | "e8" => Ok(Self::e8()),
            "D16plus" | "D16+" | "d16plus" => Ok(Self::d16_plus()),
            _ => Err(Error::InvalidArgument(format!("unknown lattice {name:?}"))),
        }
    }

    /// Rows of whitespace-separated integers.
    pub fn from_text(name: &str, text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<i64>().map_err(|_| Error::Parse(format!("bad integer {t:?}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    /// Weight of the genus-g theta series (half the rank).
    pub fn weight(&self) -> usize {
        self.rank() / 2
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    fn to_f64(&self) -> DMatrix<f64> {
        let n = self.rank();
        DMatrix::from_fn(n, n, |i, j| self.entries[i][j] as f64)
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> i128 {
        let n = self.rank();
        let mut a: Vec<Vec<i128>> = self
            .entries
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&r| a[r][k] != 0) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        sign * a[n - 1][n - 1]
    }

    pub fn norm(&self, x: &[i64]) -> i64 {
        let n = self.rank();
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                s += x[i] * self.entries[i][j] * x[j];
            }
        }
        s
    }

    /// Calls `f(x, x'Sx)` for every integer vector with `x'Sx <= bound`.
    pub fn for_each_vector<F: FnMut(&[i64], i64)>(&self, bound: i64, mut f: F) {
        self.try_for_each_vector(bound, |x, m| {
            f(x, m);
            true
        });
    }

    /// As `for_each_vector`, stopping as soon as `f` returns false. Returns
    /// false if stopped early.
    pub fn try_for_each_vector<F: FnMut(&[i64], i64) -> bool>(&self, bound: i64, mut f: F) -> bool {
        if bound < 0 {
            return true;
        }
        let n = self.rank();
        let r = self
            .to_f64()
            .cholesky()
            .expect("validated positive definite")
            .l()
            .transpose();
        // x'Sx = sum_i q_i (x_i + sum_{j>i} mu_ij x_j)^2
        let q: Vec<f64> = (0..n).map(|i| r[(i, i)] * r[(i, i)]).collect();
        let mu = DMatrix::from_fn(n, n, |i, j| if j > i { r[(i, j)] / r[(i, i)] } else { 0.0 });
        let mut walk = Walk {
            q,
            mu,
            x: vec![0i64; n],
            budget: bound as f64 + 1e-6,
            bound,
        };
        walk.level(n - 1, walk.budget, &mut f)
    }

    /// Number of vectors with `x'Sx = norm`.
    pub fn count_norm(&self, norm: i64) -> u64 {
        self.norm_counts(norm).get(&norm).copied().unwrap_or(0)
    }

    /// Counts of vectors per norm, for all norms up to `bound`.
    pub fn norm_counts(&self, bound: i64) -> BTreeMap<i64, u64> {
        self.norm_counts_capped(bound, u64::MAX).expect("uncapped")
    }

    /// As `norm_counts`, giving up (None) once more than `cap` vectors are seen.
    /// Results are cached per matrix and bound.
    pub fn norm_counts_capped(&self, bound: i64, cap: u64) -> Option<BTreeMap<i64, u64>> {
        type Cache = Mutex<HashMap<(Vec<Vec<i64>>, i64), BTreeMap<i64, u64>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = (self.entries.clone(), bound);
        if let Some(c) = cache.lock().unwrap().get(&key) {
            return Some(c.clone());
        }
        let mut counts = BTreeMap::new();
        let mut seen = 0u64;
        let finished = self.try_for_each_vector(bound, |_, nrm| {
            *counts.entry(nrm).or_insert(0) += 1;
            seen += 1;
            seen <= cap
        });
        if !finished {
            return None;
        }
        cache.lock().unwrap().insert(key, counts.clone());
        Some(counts)
    }
}

struct Walk {
    q: Vec<f64>,
    mu: DMatrix<f64>,
    x: Vec<i64>,
    budget: f64,
    bound: i64,
}

impl Walk {
    fn level<F: FnMut(&[i64], i64) -> bool>(&mut self, level: usize, remaining: f64, f: &mut F) -> bool {
        let n = self.x.len();
        let center: f64 = -(level + 1..n).map(|j| self.mu[(level, j)] * self.x[j] as f64).sum::<f64>();
        let half = (remaining.max(0.0) / self.q[level]).sqrt();
        let lo = (center - half).ceil() as i64;
        let hi = (center + half).floor() as i64;
        for v in lo..=hi {
            let d = v as f64 - center;
            let rest = remaining - self.q[level] * d * d;
            if rest < -1e-9 {
                continue;
            }
            self.x[level] = v;
            let go_on = if level == 0 {
                // the norm is an integer; the partial sums carry only rounding error
                let nrm = (self.budget - rest).round() as i64;
                nrm > self.bound || f(&self.x, nrm)
            } else {
                self.level(level - 1, rest, f)
            };
            if !go_on {
                self.x[level] = 0;
                return false;
            }
        }
        self.x[level] = 0;
        true
    }
}

/// Exact count of vectors with `x'Sx = n`.
pub fn norm_vector_count(s: &GramMatrix, n: i64) -> Result<u64> {
    if n < 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("norm must be a nonnegative even integer, got {n}")));
    }
    Ok(s.count_norm(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeOptions {
    pub target_abs_error: f64,
    /// Cap on summed terms (vectors at genus 1, vector pairs at genus 2).
    pub max_terms: u64,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        Self {
            target_abs_error: 1e-12,
            max_terms: 50_000_000,
        }
    }
}

/// Upper bound on the number of vectors of norm `m`: disjoint balls of
/// radius `1/sqrt 2` around lattice points (minimal norm 2, covolume 1).
fn packing_bound(rank: usize, m: i64) -> f64 {
    ((2.0 * m as f64).sqrt() + 1.0).powi(rank as i32)
}

fn count_or_bound(counts: &BTreeMap<i64, u64>, exact_to: i64, rank: usize, m: i64) -> f64 {
    if m <= exact_to {
        counts.get(&m).copied().unwrap_or(0) as f64
    } else {
        packing_bound(rank, m)
    }
}

/// `sum_{M > nmax} C(M) exp(-pi lambda M)` with `C` the number of genus-g
/// tuples of total norm `M`.
fn series_tail(counts: &BTreeMap<i64, u64>, exact_to: i64, rank: usize, g: usize, lambda: f64, nmax: i64) -> f64 {
    let c = |m: i64| count_or_bound(counts, exact_to, rank, m);
    let mut total = 0.0;
    let mut prev = f64::INFINITY;
    let mut m = nmax + 2;
    loop {
        let cm = match g {
            1 => c(m),
            _ => (0..=m).step_by(2).map(|a| c(a) * c(m - a)).sum(),
        };
        let term = cm * (-std::f64::consts::PI * lambda * m as f64).exp();
        total += term;
        if (term < total * 1e-17 && term < prev) || term == 0.0 || m > 100_000 {
            break;
        }
        prev = term;
        m += 2;
    }
    total
}

struct Cutoff {
    nmax: i64,
    /// Exact norm counts up to `nmax + 2`.
    counts: BTreeMap<i64, u64>,
    tail: f64,
}

/// Smallest even `nmax` meeting the target, with the norm counts needed.
fn choose_cutoff(s: &GramMatrix, g: usize, lambda: f64, opts: &LatticeOptions) -> Result<Cutoff> {
    let rank = s.rank();
    let too_costly = |what: String| {
        Error::CostCapExceeded(format!("{} at genus {g}: {what} (cap {})", s.name, opts.max_terms))
    };
    let mut nmax = 0i64;
    loop {
        let exact_to = nmax + 2;
        let counts = s
            .norm_counts_capped(exact_to, opts.max_terms)
            .ok_or_else(|| too_costly(format!("more than {} vectors of norm <= {exact_to}", opts.max_terms)))?;
        let c = |m: i64| counts.get(&m).copied().unwrap_or(0) as f64;
        let tail = series_tail(&counts, exact_to, rank, g, lambda, nmax);
        let terms: f64 = match g {
            1 => (0..=nmax).step_by(2).map(c).sum(),
            _ => (0..=nmax)
                .step_by(2)
                .map(|a| c(a) * (0..=nmax - a).step_by(2).map(c).sum::<f64>())
                .sum(),
        };
        if terms > opts.max_terms as f64 {
            return Err(too_costly(format!("reaching tail {tail:.2e} needs about {terms:.2e} terms")));
        }
        if tail <= opts.target_abs_error {
            return Ok(Cutoff { nmax, counts, tail });
        }
        nmax += 2;
    }
}

/// `f_S(tau) = sum_u exp(pi i tr(u'Su tau))` over `u` in `Z^{rank x g}`,
/// evaluated directly for `g <= 2`.
pub fn f_s(s: &GramMatrix, tau: &PeriodMatrix, opts: &LatticeOptions) -> Result<LatticeSeriesValue> {
    let g = tau.genus();
    let lambda = tau.lambda_min();
    let pi_i = Complex64::new(0.0, std::f64::consts::PI);
    match g {
        1 => {
            let cut = choose_cutoff(s, 1, lambda, opts)?;
            let t = tau.entry(0, 0);
            let mut acc = NeumaierC::default();
            for (&m, &c) in cut.counts.range(..=cut.nmax) {
                acc.add((pi_i * t * m as f64).exp() * c as f64);
            }
            Ok(LatticeSeriesValue {
                value: acc.sum(),
                tail_bound: cut.tail,
            })
        }
        2 => {
            let cut = choose_cutoff(s, 2, lambda, opts)?;
            let nmax = cut.nmax;
            let n = s.rank();
            // vectors grouped by norm, with S u precomputed
            let mut by_norm: BTreeMap<i64, Vec<(Vec<i64>, Vec<i64>)>> = BTreeMap::new();
            s.for_each_vector(nmax, |x, m| {
                let su: Vec<i64> = (0..n).map(|i| (0..n).map(|j| s.entry(i, j) * x[j]).sum()).collect();
                by_norm.entry(m).or_default().push((x.to_vec(), su));
            });
            let (t11, t12, t22) = (tau.entry(0, 0), tau.entry(0, 1), tau.entry(1, 1));
            let mut acc = NeumaierC::default();
            for (&m1, list1) in &by_norm {
                for (&m2, list2) in by_norm.range(..=nmax - m1) {
                    let base = t11 * m1 as f64 + t22 * m2 as f64;
                    for (_, su1) in list1 {
                        for (u2, _) in list2 {
                            let b: i64 = su1.iter().zip(u2).map(|(a, b)| a * b).sum();
                            acc.add((pi_i * (base + t12 * (2 * b) as f64)).exp());
                        }
                    }
                }
            }
            Ok(LatticeSeriesValue {
                value: acc.sum(),
                tail_bound: cut.tail,
            })
        }
        _ => Err(Error::Unsupported(format!(
            "direct lattice sums stop at genus 2 (genus {g} requested); use the theta-constant path"
        ))),
    }
}

/// `(f4)^2 - f8 = 2^{-2g}((1 - 2^g) S_{0,16} + 2 S_{1,8})` from theta constants.
pub fn schottky_combination_from(table: &ThetaTable) -> Result<(LatticeSeriesValue, f64)> {
    let g = table.genus() as i32;
    let s0 = s_form_from(table, 0, 16)?;
    let s1 = s_form_from(table, 1, 8)?;
    let a = (1.0 - 2f64.powi(g)) / 2f64.powi(2 * g);
    let b = 2.0 / 2f64.powi(2 * g);
    let value = s0.value * a + s1.value * b;
    let tail_bound = a.abs() * s0.error_bound + b * s1.error_bound;
    let scale = a.abs() * s0.scale + b * s1.scale;
    Ok((LatticeSeriesValue { value, tail_bound }, scale))
}

pub fn schottky_combination(tau: &PeriodMatrix, opts: &ThetaOptions) -> Result<LatticeSeriesValue> {
    if tau.genus() > 5 {
        return Err(Error::Unsupported("theta-constant path is limited to genus <= 5".into()));
    }
    Ok(schottky_combination_from(&batch_theta_constants(tau, opts)?)?.0)
}

/// Same, packaged with its natural scale.
pub fn schottky_combination_value(tau: &PeriodMatrix, opts: &ThetaOptions) -> Result<FormValue> {
    let (v, scale) = schottky_combination_from(&batch_theta_constants(tau, opts)?)?;
    Ok(FormValue {
        value: v.value,
        scale,
        error_bound: v.tail_bound,
    })
}

/// Fits `f(it) = sum_{k < ts.len()} a_k exp(-2 pi k t)` through the samples and
/// returns `a_0, a_1, ...`.
pub fn q_coefficients<F>(f: F, ts: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = ts.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two sample points".into()));
    }
    let xs: Vec<f64> = ts.iter().map(|t| (-std::f64::consts::TAU * t).exp()).collect();
    let v = DMatrix::from_fn(n, n, |i, k| xs[i].powi(k as i32));
    let rhs = DVector::from_vec(ts.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?);
    let sol = v
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::IllConditioned("Vandermonde system is singular".into()))?;
    Ok(sol.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_even_unimodular() {
        let e8 = GramMatrix::e8();
        assert_eq!(e8.rank(), 8);
        assert_eq!(e8.determinant(), 1);
        let d = GramMatrix::d16_plus();
        assert_eq!(d.rank(), 16);
        assert_eq!(d.determinant(), 1);
    }

    #[test]
    fn e8_root_count() {
        let e8 = GramMatrix::e8();
        assert_eq!(norm_vector_count(&e8, 0).unwrap(), 1);
        assert_eq!(norm_vector_count(&e8, 2).unwrap(), 240);
        assert_eq!(norm_vector_count(&e8, 4).unwrap(), 2160);
        let mut max_coord = 0;
        e8.for_each_vector(2, |x, _| max_coord = max_coord.max(x.iter().map(|v| v.abs()).max().unwrap()));
        assert!(max_coord <= 6);
        assert!(norm_vector_count(&e8, 3).is_err());
    }

    #[test]
    fn d16_plus_root_count() {
        assert_eq!(norm_vector_count(&GramMatrix::d16_plus(), 2).unwrap(), 480);
    }

    #[test]
    fn rejects_bad_gram_matrices() {
        assert!(GramMatrix::from_text("odd", "1 0\n0 1").is_err());
        assert!(GramMatrix::from_text("det3", "2 -1\n-1 2").is_err());
        assert!(GramMatrix::from_text("asym", "2 1\n0 2").is_err());
        assert!(GramMatrix::from_text("junk", "2 x").is_err());
        let text: String = (0..8)
            .map(|i| (0..8).map(|j| GramMatrix::e8().entry(i, j).to_string()).collect::<Vec<_>>().join(" ") + "\n")
            .collect();
        assert_eq!(GramMatrix::from_text("E8", &text).unwrap().entry(4, 7), -1);
    }

    #[test]
    fn large_imaginary_part_gives_one() {
        let tau = PeriodMatrix::diagonal(&[Complex64::new(0.3, 12.0)]).unwrap();
        let v = f_s(&GramMatrix::e8(), &tau, &LatticeOptions::default()).unwrap();
        assert!((v.value - 1.0).norm() < 1e-12);
    }
}
