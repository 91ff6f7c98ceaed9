use num_complex::Complex64;
use theta_lab::ansatz::{f4_from, f8_from, f_from};
use theta_lab::lattice::{
    f_s, norm_vector_count, q_coefficients, schottky_combination, schottky_combination_value, GramMatrix,
    LatticeOptions,
};
use theta_lab::sampling::Sampler;
use theta_lab::theta::{batch_theta_constants, PeriodMatrix, ThetaOptions};
use theta_lab::Error;

/// Norm-2 vectors of E8 in the even coordinate model: integer vectors with
/// even coordinate sum, or all coordinates in Z + 1/2 with even sum. Norm 2
/// forces entries in {-1, 0, 1} or {-1/2, 1/2}.
#[test]
fn e8_roots_in_coordinate_model() {
    let mut count = 0;
    for code in 0..3u32.pow(8) {
        let mut c = code;
        let (mut sum, mut norm) = (0i32, 0i32);
        for _ in 0..8 {
            let v = (c % 3) as i32 - 1;
            c /= 3;
            sum += v;
            norm += v * v;
        }
        if norm == 2 && sum % 2 == 0 {
            count += 1;
        }
    }
    for signs in 0..256u32 {
        // all entries +-1/2: norm 2 automatically; even sum <=> even number of minus signs
        if signs.count_ones() % 2 == 0 {
            count += 1;
        }
    }
    assert_eq!(count, 240);
    assert_eq!(norm_vector_count(&GramMatrix::e8(), 2).unwrap(), count);
}

/// D16+ norm-2 vectors are the D16 roots +-e_i +-e_j; glue vectors have norm >= 4.
#[test]
fn d16_plus_roots_in_coordinate_model() {
    let mut count = 0u64;
    for i in 0..16 {
        for j in i + 1..16 {
            let _ = (i, j);
            count += 4;
        }
    }
    assert_eq!(count, 480);
    assert_eq!(norm_vector_count(&GramMatrix::d16_plus(), 2).unwrap(), count);
}

#[test]
fn genus_one_q_coefficients() {
    let opts = LatticeOptions::default();
    let e8 = GramMatrix::e8();
    let f = |t: f64| -> theta_lab::Result<f64> {
        let tau = PeriodMatrix::diagonal(&[Complex64::new(0.0, t)])?;
        Ok(f_s(&e8, &tau, &opts)?.value.re)
    };
    let a = q_coefficients(f, &[1.2, 1.4, 1.6, 1.8]).unwrap();
    assert!((a[0] - 1.0).abs() < 1e-6);
    assert!((a[1] - 240.0).abs() < 1e-3, "{a:?}");

    let d16 = GramMatrix::d16_plus();
    let f = |t: f64| -> theta_lab::Result<f64> {
        let tau = PeriodMatrix::diagonal(&[Complex64::new(0.0, t)])?;
        Ok(f_s(&d16, &tau, &opts)?.value.re)
    };
    let a = q_coefficients(f, &[2.5, 2.75, 3.0, 3.25]).unwrap();
    assert!((a[1] - 480.0).abs() < 1e-3, "{a:?}");

    // same numbers through theta constants
    let f = |t: f64| -> theta_lab::Result<f64> {
        let tau = PeriodMatrix::diagonal(&[Complex64::new(0.0, t)])?;
        Ok(f4_from(&batch_theta_constants(&tau, &ThetaOptions::default())?).value.re)
    };
    let a = q_coefficients(f, &[1.2, 1.4, 1.6, 1.8]).unwrap();
    assert!((a[1] - 240.0).abs() < 1e-3, "{a:?}");
}

#[test]
fn direct_and_theta_paths_agree_at_genus_one() {
    let mut rng = Sampler::new(21);
    let opts = LatticeOptions::default();
    for _ in 0..5 {
        let tau = rng.period_matrix_with(1, 1.0, 2.0).unwrap();
        let t = batch_theta_constants(&tau, &ThetaOptions::default()).unwrap();
        let direct = f_s(&GramMatrix::e8(), &tau, &opts).unwrap();
        let f4 = f4_from(&t);
        assert!((direct.value - f4.value).norm() < 1e-10 * f4.scale);
    }
    for _ in 0..3 {
        let tau = rng.period_matrix_with(1, 2.5, 3.0).unwrap();
        let t = batch_theta_constants(&tau, &ThetaOptions::default()).unwrap();
        let direct = f_s(&GramMatrix::d16_plus(), &tau, &opts).unwrap();
        let f8 = f8_from(&t);
        assert!((direct.value - f8.value).norm() < 1e-10 * f8.scale);
    }
}

#[test]
fn direct_and_theta_paths_agree_at_genus_two() {
    let mut rng = Sampler::new(22);
    let opts = LatticeOptions::default();
    for _ in 0..5 {
        let tau = rng.period_matrix_with(2, 2.5, 3.0).unwrap();
        let t = batch_theta_constants(&tau, &ThetaOptions::default()).unwrap();
        let e8 = f_s(&GramMatrix::e8(), &tau, &opts).unwrap();
        let d16 = f_s(&GramMatrix::d16_plus(), &tau, &opts).unwrap();
        let (f4, f8) = (f4_from(&t), f8_from(&t));
        assert!((e8.value - f4.value).norm() < 1e-8 * f4.scale);
        assert!((d16.value - f8.value).norm() < 1e-8 * f8.scale);
        let comb = schottky_combination(&tau, &ThetaOptions::default()).unwrap();
        let direct = e8.value * e8.value - d16.value;
        assert!((comb.value - direct).norm() < 1e-8 * f8.scale);
    }
}

#[test]
fn direct_sum_factorizes_on_block_diagonal() {
    let mut rng = Sampler::new(23);
    let opts = LatticeOptions::default();
    let t1 = rng.period_matrix_with(1, 1.5, 2.0).unwrap();
    let t2 = rng.period_matrix_with(1, 1.5, 2.0).unwrap();
    let big = PeriodMatrix::block_diagonal(&t1, &t2).unwrap();
    let e8 = GramMatrix::e8();
    let lhs = f_s(&e8, &big, &opts).unwrap().value;
    let rhs = f_s(&e8, &t1, &opts).unwrap().value * f_s(&e8, &t2, &opts).unwrap().value;
    assert!((lhs - rhs).norm() < 1e-9 * rhs.norm());
}

#[test]
fn combination_vanishes_at_genus_one_and_tracks_schottky_form() {
    let mut rng = Sampler::new(24);
    for _ in 0..10 {
        let tau = rng.period_matrix(1).unwrap();
        let v = schottky_combination_value(&tau, &ThetaOptions::default()).unwrap();
        assert!(v.relative() < 1e-9);
    }
    for g in 2..=4 {
        let tau = rng.period_matrix(g).unwrap();
        let t = batch_theta_constants(&tau, &ThetaOptions::default()).unwrap();
        let f = f_from(&t);
        let c = schottky_combination(&tau, &ThetaOptions::default()).unwrap();
        let lhs = -c.value * 2f64.powi(2 * g as i32);
        assert!((lhs - f.value).norm() < 1e-8 * f.scale);
    }
}

#[test]
fn direct_path_refuses_large_genus_and_expensive_points() {
    let tau = Sampler::new(1).period_matrix(3).unwrap();
    assert!(matches!(
        f_s(&GramMatrix::e8(), &tau, &LatticeOptions::default()),
        Err(Error::Unsupported(_))
    ));
    let tau = PeriodMatrix::diagonal(&[Complex64::new(0.0, 0.9)]).unwrap();
    let cheap = LatticeOptions {
        max_terms: 10_000,
        ..Default::default()
    };
    assert!(matches!(
        f_s(&GramMatrix::d16_plus(), &tau, &cheap),
        Err(Error::CostCapExceeded(_))
    ));
}
