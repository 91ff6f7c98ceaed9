use num_complex::Complex64;
use theta_lab::algebra::{relation, Domain};
use theta_lab::ansatz::{
    f4_from, f8_from, f_from, p_form_from, paired_weight, phi_numeric, restriction_coefficient, s_form_from,
    xi_from, xi_m_from, FormValue,
};
use theta_lab::charspace::{enumerate_subspaces, Characteristic, Subspace};
use theta_lab::sampling::Sampler;
use theta_lab::theta::{batch_theta_constants, PeriodMatrix, ThetaOptions, ThetaTable};

fn table(tau: &PeriodMatrix) -> ThetaTable {
    batch_theta_constants(tau, &ThetaOptions::default()).unwrap()
}

/// Evaluates an exact relation vector numerically with the S forms.
fn igusa_residual(t: &ThetaTable, k: usize) -> f64 {
    let rel = relation(k, t.genus()).unwrap();
    assert!(Domain::H.admits(k, t.genus()));
    let mut v = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (j, c) in rel.terms() {
        let c: f64 = num_traits::ToPrimitive::to_f64(c).unwrap();
        let s = s_form_from(t, j, paired_weight(j).unwrap()).unwrap();
        v += s.value * c;
        scale += c.abs() * s.scale;
    }
    v.norm() / scale
}

#[test]
fn igusa_relations_hold_on_random_points() {
    let mut rng = Sampler::new(11);
    for g in 2..=3 {
        for _ in 0..4 {
            let t = table(&rng.period_matrix(g).unwrap());
            for k in 0..=g - 2 {
                let r = igusa_residual(&t, k);
                assert!(r < 1e-10, "g={g} k={k} residual {r:e}");
            }
        }
    }
}

#[test]
fn schottky_form_vanishes_through_genus_three_and_not_at_four() {
    let mut rng = Sampler::new(12);
    for g in 1..=3 {
        for _ in 0..5 {
            let f = f_from(&table(&rng.period_matrix(g).unwrap()));
            assert!(f.relative() < 1e-10, "g={g}: {:e}", f.relative());
        }
    }
    for _ in 0..3 {
        let f = f_from(&table(&rng.period_matrix_with(4, 0.4, 0.8).unwrap()));
        assert!(f.relative() > 1e-4, "{:e}", f.relative());
    }
}

#[test]
fn schottky_form_matches_theta_series_difference() {
    let mut rng = Sampler::new(13);
    for g in 1..=4 {
        let t = table(&rng.period_matrix(g).unwrap());
        let f = f_from(&t);
        let (f4, f8) = (f4_from(&t), f8_from(&t));
        let comb = f4.value * f4.value - f8.value;
        let via = -comb * 2f64.powi(2 * g as i32);
        assert!((via - f.value).norm() < 1e-12 * f.scale, "g={g}");
        let s0 = s_form_from(&t, 0, 16).unwrap();
        let s1 = s_form_from(&t, 1, 8).unwrap();
        let rhs = (s0.value * (1.0 - 2f64.powi(g as i32)) + s1.value * 2.0) / 2f64.powi(2 * g as i32);
        assert!((rhs - comb).norm() < 1e-12 * f.scale, "g={g}");
    }
}

#[test]
fn xi_vanishes_at_genus_one_and_sum_matches_s_path() {
    let mut rng = Sampler::new(14);
    for _ in 0..5 {
        let t = table(&rng.period_matrix(1).unwrap());
        let xi = xi_from(&t).unwrap();
        assert!(xi.relative() < 1e-9);
    }
    let t = table(&rng.period_matrix(3).unwrap());
    let total: Complex64 = Characteristic::all(3).map(|m| xi_m_from(&t, &m).unwrap().value).sum();
    let xi = xi_from(&t).unwrap();
    assert!((total - xi.value).norm() < 1e-10 * xi.scale);
}

#[test]
fn xi_zero_factorizes_on_block_diagonal() {
    let mut rng = Sampler::new(15);
    for _ in 0..3 {
        let t1 = rng.period_matrix(1).unwrap();
        let t2 = rng.period_matrix(2).unwrap();
        let big = PeriodMatrix::block_diagonal(&t1, &t2).unwrap();
        let z3 = Characteristic::zero(3);
        let lhs = xi_m_from(&table(&big), &z3).unwrap();
        let a = xi_m_from(&table(&t1), &Characteristic::zero(1)).unwrap();
        let b = xi_m_from(&table(&t2), &Characteristic::zero(2)).unwrap();
        assert!((lhs.value - a.value * b.value).norm() < 1e-10 * lhs.scale);
    }
}

#[test]
fn xi_modulus_is_unchanged_by_even_integer_shift() {
    let mut rng = Sampler::new(16);
    let tau = rng.period_matrix(2).unwrap();
    let shifted = tau.perturbed(0, 1, Complex64::new(2.0, 0.0)).unwrap();
    let a = xi_from(&table(&tau)).unwrap();
    let b = xi_from(&table(&shifted)).unwrap();
    assert!((a.value.norm() - b.value.norm()).abs() < 1e-8 * a.scale);
    let c = f_from(&table(&tau));
    let d = f_from(&table(&tau.perturbed(1, 1, Complex64::new(2.0, 0.0)).unwrap()));
    assert!((c.value.norm() - d.value.norm()).abs() < 1e-8 * c.scale);
}

/// Splits a genus-g characteristic into its genus-k and genus-(g-k) parts.
fn split(g: usize, k: usize, bits: u32) -> (u32, u32) {
    let eps = bits & ((1 << g) - 1);
    let delta = bits >> g;
    let lo = (1u32 << k) - 1;
    let a = (eps & lo) | ((delta & lo) << k);
    let b = (eps >> k) | ((delta >> k) << (g - k));
    (a, b)
}

#[test]
fn restriction_coefficients_match_brute_force() {
    for (k, h) in [(1usize, 1usize), (1, 2)] {
        let g = k + h;
        for i in 0..=2 {
            let mut tally: std::collections::HashMap<(Subspace, Subspace), u128> = Default::default();
            for v in enumerate_subspaces(g, i).unwrap() {
                let (mut a, mut b) = (Vec::new(), Vec::new());
                for &x in v.basis() {
                    let (p, q) = split(g, k, x);
                    a.push(p);
                    b.push(q);
                }
                let v1 = Subspace::span(2 * k, &a).unwrap();
                let v2 = Subspace::span(2 * h, &b).unwrap();
                *tally.entry((v1, v2)).or_default() += 1;
            }
            for ((v1, v2), count) in tally {
                assert_eq!(
                    count,
                    restriction_coefficient(v1.dim(), v2.dim(), i),
                    "(k, g-k, i) = ({k}, {h}, {i})"
                );
            }
        }
    }
}

#[test]
fn p_forms_restrict_to_block_diagonal() {
    let mut rng = Sampler::new(17);
    let t1 = rng.period_matrix(1).unwrap();
    let t2 = rng.period_matrix(2).unwrap();
    let (a, b) = (table(&t1), table(&t2));
    let big = table(&PeriodMatrix::block_diagonal(&t1, &t2).unwrap());
    for i in 0..=3usize {
        let s = paired_weight(i).unwrap();
        let lhs = p_form_from(&big, i, s).unwrap();
        let mut rhs = Complex64::new(0.0, 0.0);
        for n in 0..=i.min(2) {
            for m in 0..=i.min(4) {
                let nc = restriction_coefficient(n, m, i);
                if nc == 0 {
                    continue;
                }
                let pa = p_form_from(&a, n, s << (i - n)).unwrap();
                let pb = p_form_from(&b, m, s << (i - m)).unwrap();
                rhs += pa.value * pb.value * nc as f64;
            }
        }
        assert!((lhs.value - rhs).norm() < 1e-10 * lhs.scale.max(1e-300), "i={i}");
    }
}

#[test]
fn phi_operator_limits() {
    let mut rng = Sampler::new(18);
    let tau1 = rng.period_matrix(1).unwrap();
    let sched = [4.0, 6.0, 8.0, 10.0];
    let f4 = |t: &PeriodMatrix| -> theta_lab::Result<FormValue> { Ok(f4_from(&table(t))) };
    let lim = phi_numeric(f4, &tau1, &sched).unwrap();
    let expect = f4_from(&table(&tau1)).value;
    assert!((lim.value.value - expect).norm() < 1e-6 * expect.norm());
    let xi = |t: &PeriodMatrix| xi_from(&table(t));
    let lim = phi_numeric(xi, &tau1, &sched).unwrap();
    assert!(lim.value.relative() < 1e-9);
}

#[test]
fn igusa_relations_hold_at_genus_four() {
    let mut rng = Sampler::new(19);
    let t = table(&rng.period_matrix(4).unwrap());
    for k in 0..=2 {
        let r = igusa_residual(&t, k);
        assert!(r < 1e-7, "k={k} residual {r:e}");
    }
}
