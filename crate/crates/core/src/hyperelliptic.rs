//! Period matrices of hyperelliptic curves `y^2 = prod (x - e_j)`.
//!
//! Branch points are put in convex position (collinear sets go through a
//! Cayley map first), sorted by angle, and joined in consecutive pairs by
//! straight cuts. With an odd count the last point is joined to infinity by an
//! outward ray. `a_k` circles cut `k`; `b_k` runs from cut `k` to the last cut
//! through the centroid on one sheet and back on the other.

use gauss_quad::{GaussChebyshevFirstKind, GaussLegendre};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::Sampler;
use crate::theta::PeriodMatrix;

pub const MIN_SEPARATION: f64 = 1e-6;
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRecord", into = "CurveRecord")]
pub struct HyperellipticCurve {
    branch_points: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct CurveRecord {
    branch_points: Vec<Complex64>,
}

impl TryFrom<CurveRecord> for HyperellipticCurve {
    type Error = Error;
    fn try_from(r: CurveRecord) -> Result<Self> {
        Self::new(r.branch_points)
    }
}

impl From<HyperellipticCurve> for CurveRecord {
    fn from(c: HyperellipticCurve) -> Self {
        CurveRecord {
            branch_points: c.branch_points,
        }
    }
}

impl HyperellipticCurve {
    /// Finite branch points; an odd count puts another one at infinity.
    pub fn new(branch_points: Vec<Complex64>) -> Result<Self> {
        let n = branch_points.len();
        if n < 3 {
            return Err(Error::InvalidArgument(format!("need at least 3 branch points, got {n}")));
        }
        if branch_points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidArgument("branch points must be finite".into()));
        }
        for i in 0..n {
            for j in 0..i {
                let d = (branch_points[i] - branch_points[j]).norm();
                if d <= MIN_SEPARATION {
                    return Err(Error::NearDegenerate {
                        found: d,
                        floor: MIN_SEPARATION,
                    });
                }
            }
        }
        Ok(Self { branch_points })
    }

    pub fn from_real(points: &[f64]) -> Result<Self> {
        Self::new(points.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `y^2 = x^n - 1`
    pub fn roots_of_unity(n: usize) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
                .collect(),
        )
    }

    pub fn branch_points(&self) -> &[Complex64] {
        &self.branch_points
    }

    pub fn genus(&self) -> usize {
        (self.branch_points.len() - 1) / 2
    }
}

/// Random curve with `2g + 2` branch points jittered around the unit circle.
pub fn random_hyperelliptic(g: usize, seed: u64) -> Result<HyperellipticCurve> {
    if g == 0 {
        return Err(Error::InvalidArgument("genus must be positive".into()));
    }
    let mut rng = Sampler::new(seed);
    let n = 2 * g + 2;
    let step = 2.0 * std::f64::consts::PI / n as f64;
    HyperellipticCurve::new(
        (0..n)
            .map(|k| {
                let angle = step * (k as f64 + rng.uniform(-0.25, 0.25));
                Complex64::from_polar(1.0 + rng.uniform(-0.05, 0.05), angle)
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Relative agreement required between successive node doublings.
    pub tol: f64,
    pub min_nodes: usize,
    pub max_nodes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            min_nodes: 32,
            max_nodes: 8192,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodData {
    /// `a[i][k] = integral of x^i dx / y over a_k`
    pub a: Vec<Vec<Complex64>>,
    pub b: Vec<Vec<Complex64>>,
    pub tau: PeriodMatrix,
    /// Largest change in any period on the last node doubling, relative to
    /// the largest period.
    pub quadrature_error: f64,
    /// Asymmetry of `A^{-1} B` left after removing the integer part.
    pub symmetry_defect: f64,
    pub condition_number: f64,
    pub nodes: usize,
}

/// Cut layout: consecutive pairs, plus a ray point for odd counts.
struct Model {
    pairs: Vec<(Complex64, Complex64)>,
    ray: Option<(Complex64, Complex64)>,
    hub: Complex64,
}

fn diameter(p: &[Complex64]) -> f64 {
    let mut d: f64 = 0.0;
    for a in p {
        for b in p {
            d = d.max((a - b).norm());
        }
    }
    d
}

fn collinear(p: &[Complex64]) -> Option<(Complex64, Complex64)> {
    let z0 = p[0];
    let far = p.iter().copied().max_by(|a, b| (a - z0).norm().total_cmp(&(b - z0).norm()))?;
    let dir = (far - z0) / (far - z0).norm();
    let diam = diameter(p);
    p.iter()
        .all(|z| ((z - z0) / dir).im.abs() <= 1e-9 * diam)
        .then_some((z0, dir))
}

/// Puts the points in convex position, sorted counterclockwise.
fn layout(curve: &HyperellipticCurve) -> Result<Model> {
    let mut pts = curve.branch_points.clone();
    if let Some((z0, dir)) = collinear(&pts) {
        let t: Vec<f64> = pts.iter().map(|z| ((z - z0) / dir).re).collect();
        let (lo, hi) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        let w = Complex64::new((lo + hi) / 2.0, (hi - lo) / 4.0);
        pts = t.iter().map(|&x| (x - w) / (x - w.conj())).collect();
        if pts.len() % 2 == 1 {
            pts.push(Complex64::new(1.0, 0.0));
        }
    }
    let hub = pts.iter().sum::<Complex64>() / pts.len() as f64;
    pts.sort_by(|a, b| (a - hub).arg().total_cmp(&(b - hub).arg()));
    let n = pts.len();
    let diam = diameter(&pts);
    for k in 0..n {
        let (a, b, c) = (pts[k], pts[(k + 1) % n], pts[(k + 2) % n]);
        let turn = ((b - a).conj() * (c - b)).im;
        if turn <= 1e-9 * diam * diam {
            return Err(Error::Unsupported(
                "branch points not in convex position (after the collinear map)".into(),
            ));
        }
    }
    let pairs: Vec<(Complex64, Complex64)> = pts.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let ray = (n % 2 == 1).then(|| {
        let e = pts[n - 1];
        (e, (e - hub) / (e - hub).norm())
    });
    Ok(Model { pairs, ray, hub })
}

impl Model {
    fn genus(&self) -> usize {
        if self.ray.is_some() {
            self.pairs.len()
        } else {
            self.pairs.len() - 1
        }
    }

    /// `sqrt((x - a)(x - b))` with its cut on the segment `[a, b]`, from
    /// `x - a` and `x - b`.
    fn pair_factor(xa: Complex64, xb: Complex64) -> Complex64 {
        let xc = (xa + xb) / 2.0;
        xc * (xa * xb / (xc * xc)).sqrt()
    }

    /// `sqrt(x - e)` with its cut on the ray `e + s d`, `s >= 0`.
    fn ray_factor(xe: Complex64, d: Complex64) -> Complex64 {
        d.sqrt() * Complex64::i() * (-xe / d).sqrt()
    }

    /// The sheet function, skipping pair `skip`. `near = (e, x - e)` supplies
    /// the offset from a branch point exactly.
    fn y(&self, x: Complex64, skip: Option<usize>, near: Option<(Complex64, Complex64)>) -> Complex64 {
        let diff = |p: Complex64| match near {
            Some((e, dx)) if e == p => dx,
            _ => x - p,
        };
        let mut v = Complex64::new(1.0, 0.0);
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            if Some(k) != skip {
                v *= Self::pair_factor(diff(a), diff(b));
            }
        }
        if let Some((e, d)) = self.ray {
            v *= Self::ray_factor(diff(e), d);
        }
        v
    }

    /// End point of every b-cycle.
    fn anchor(&self) -> Complex64 {
        match self.ray {
            Some((e, _)) => e,
            None => self.pairs[self.pairs.len() - 1].0,
        }
    }

    /// `(A, B)` with `n` nodes per integral.
    fn periods(&self, n: usize) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
        let g = self.genus();
        let cheb = GaussChebyshevFirstKind::new(n).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let leg = GaussLegendre::new(n).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut a = DMatrix::zeros(g, g);
        for k in 0..g {
            let (p, q) = self.pairs[k];
            let (c, r) = ((p + q) / 2.0, (q - p) / 2.0);
            // the pair factor is r i sqrt(1 - s^2) on the upper lip
            for (s, w) in cheb.iter() {
                let x = c + r * *s;
                let f = Complex64::new(0.0, -2.0) * *w / self.y(x, Some(k), None);
                let mut xp = Complex64::new(1.0, 0.0);
                for i in 0..g {
                    a[(i, k)] += f * xp;
                    xp *= x;
                }
            }
        }
        // radial integrals from the hub, t = 1 - s^2
        let radial = |e: Complex64| -> Vec<Complex64> {
            let mut out = vec![Complex64::new(0.0, 0.0); g];
            let span = e - self.hub;
            for (s, w) in leg.iter() {
                let s = 0.5 * (s + 1.0);
                let dx = -span * (s * s);
                let x = e + dx;
                let f = span * (s * w) / self.y(x, None, Some((e, dx)));
                let mut xp = Complex64::new(1.0, 0.0);
                for o in out.iter_mut() {
                    *o += f * xp;
                    xp *= x;
                }
            }
            out
        };
        let end = radial(self.anchor());
        let mut b = DMatrix::zeros(g, g);
        for k in 0..g {
            let start = radial(self.pairs[k].1);
            for i in 0..g {
                b[(i, k)] = (end[i] - start[i]) * 2.0;
            }
        }
        Ok((a, b))
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn period_matrix(curve: &HyperellipticCurve, quad: &QuadratureOptions) -> Result<PeriodData> {
    let model = layout(curve)?;
    let g = model.genus();
    let mut n = quad.min_nodes.max(2);
    let (mut a, mut b) = model.periods(n)?;
    let mut err;
    loop {
        let (a2, b2) = model.periods(2 * n)?;
        let scale = max_abs(&a2).max(max_abs(&b2));
        err = max_abs(&(&a2 - &a)).max(max_abs(&(&b2 - &b))) / scale;
        a = a2;
        b = b2;
        n *= 2;
        if err <= quad.tol {
            break;
        }
        if 2 * n > quad.max_nodes {
            return Err(Error::NonConvergence(format!(
                "period quadrature at {n} nodes: relative change {err:e} > {:e}",
                quad.tol
            )));
        }
    }
    let sv = a.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(format!("a-period matrix condition number {cond:e}")));
    }
    let solve = |a: &DMatrix<Complex64>| -> Result<DMatrix<Complex64>> {
        a.clone()
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::IllConditioned("singular a-period matrix".into()))
    };
    let mut tau = solve(&a)?;
    // orient each a-cycle so that it meets its b-cycle positively
    let mut flipped = false;
    for k in 0..g {
        if tau[(k, k)].im < 0.0 {
            a.column_mut(k).neg_mut();
            flipped = true;
        }
    }
    if flipped {
        tau = solve(&a)?;
    }
    // b-cycles sharing the path through the hub may pick up a-cycles
    let mut defect: f64 = 0.0;
    for i in 0..g {
        for j in 0..i {
            let d = tau[(i, j)] - tau[(j, i)];
            let k = d.re.round();
            defect = defect.max((d - k).norm());
            tau[(i, j)] -= k;
        }
    }
    let sym = (&tau + tau.transpose()) * Complex64::new(0.5, 0.0);
    Ok(PeriodData {
        a: rows(&a),
        b: rows(&b),
        tau: PeriodMatrix::new(sym)?,
        quadrature_error: err,
        symmetry_defect: defect,
        condition_number: cond,
        nodes: n,
    })
}

fn rows(m: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}
