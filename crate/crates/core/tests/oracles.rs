//! Cross-checks of the core numerics against independent references:
//! finite differences, nalgebra's eigensolver and closed-form geometry.

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;

use toa_core::analysis::{
    contraction_factor, direction_gram_min_eig, kappa, rank_one_diff_min_eig, ConvexityConfig,
};
use toa_core::estimators::{batch_least_squares, ogd_step, ols_initialize, onm_step};
use toa_core::linalg::{symmetric_eigenvalues, Matrix};
use toa_core::rng::{stream, Domain};
use toa_core::{
    LossSnapshot, MeasurementFrame, Method, OracleConfig, SensorArray, TrackerState, Vector,
};

fn reference_sensors() -> SensorArray<f64> {
    SensorArray::from_coords(&[vec![0.5, 0.5], vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap()
}

fn v(c: &[f64]) -> Vector<f64> {
    Vector::from_slice(c)
}

fn nalgebra_min_eig(m: &Matrix<f64>) -> f64 {
    let n = m.rows();
    let dm = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    SymmetricEigen::new(dm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn rel_err(a: &Vector<f64>, b: &Vector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-8)
}

fn central_gradient(loss: &LossSnapshot<'_, f64>, x: &Vector<f64>) -> Vector<f64> {
    let h = 1e-6 * (1.0 + x.norm());
    let n = x.dim();
    Vector::new(
        (0..n)
            .map(|k| {
                let e = Vector::basis(n, k);
                let fp = loss.value(&(x + &e.scaled(h))).unwrap();
                let fm = loss.value(&(x - &e.scaled(h))).unwrap();
                (fp - fm) / (2.0 * h)
            })
            .collect(),
    )
}

#[test]
fn gradient_and_hessian_match_finite_differences() {
    let s = reference_sensors();
    let mut rng = stream(3, Domain::BallSampling, 0, 0);
    let mut checked = 0;
    while checked < 1000 {
        let truth = v(&[rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]);
        let x = v(&[rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]);
        if s.distances(&x).iter().any(|&d| d < 0.05) {
            continue;
        }
        let mut frame = MeasurementFrame::exact(&s, &truth, 1);
        frame
            .ranges
            .iter_mut()
            .for_each(|r| *r += rng.random_range(-0.1..0.1));
        let loss = LossSnapshot::new(&s, &frame).unwrap();
        let (g, hess) = loss.gradient_and_hessian(&x).unwrap();
        assert!(
            rel_err(&central_gradient(&loss, &x), &g) < 1e-5,
            "gradient at {x:?}"
        );

        let h = 1e-6 * (1.0 + x.norm());
        for k in 0..2 {
            let e = Vector::basis(2, k).scaled(h);
            let col = (&loss.gradient(&(&x + &e)).unwrap() - &loss.gradient(&(&x - &e)).unwrap())
                .scaled(0.5 / h);
            let exact = v(&[hess[(0, k)], hess[(1, k)]]);
            assert!(rel_err(&col, &exact) < 1e-4, "Hessian column {k} at {x:?}");
        }
        checked += 1;
    }
}

#[test]
fn rank_one_difference_matches_nalgebra() {
    let mut rng = stream(9, Domain::Lemmas, 0, 0);
    for _ in 0..1000 {
        let n = rng.random_range(2..=5usize);
        let u = Vector::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect());
        let w = Vector::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect());
        let mut m = Matrix::zeros(n, n);
        m.add_outer(1.0, &u, &u);
        m.add_outer(-1.0, &w, &w);
        let closed = rank_one_diff_min_eig(&u, &w).unwrap();
        assert!((closed - nalgebra_min_eig(&m)).abs() < 1e-10);
    }
}

#[test]
fn zero_noise_ols_then_oracle_is_exact() {
    let s = reference_sensors();
    let mut rng = stream(1, Domain::Trajectory, 0, 0);
    let cfg = OracleConfig::for_sensors(s.m());
    for _ in 0..100 {
        let truth = v(&[rng.random_range(1.0..3.0), rng.random_range(1.0..3.0)]);
        let frame = MeasurementFrame::exact(&s, &truth, 1);
        let init = ols_initialize(&s, &frame).unwrap();
        assert!(init.distance(&truth) < 1e-10);
        let loss = LossSnapshot::new(&s, &frame).unwrap();
        let out = batch_least_squares(&loss, &init, &cfg).unwrap();
        assert!(out.point.distance(&truth) < 1e-6 && out.gradient_norm < 1e-8);
    }
}

#[test]
fn reference_geometry_lambda() {
    let s = reference_sensors();
    let x = v(&[2.0, 1.0]);
    let lambda = direction_gram_min_eig(&s, &x).unwrap();
    let mut gram = Matrix::zeros(2, 2);
    for a in s.positions() {
        let u = &x - a;
        let u = u.scaled(1.0 / u.norm());
        gram.add_outer(1.0, &u, &u);
    }
    assert!((lambda - nalgebra_min_eig(&gram)).abs() < 1e-12);
    assert!((lambda - 0.0641).abs() < 1e-4);
    let k = kappa(&ConvexityConfig::idealized(), 3, lambda, 0.0);
    assert!((k - lambda / 60.0).abs() < 1e-16 && k > 0.0);
}

#[test]
fn single_precision_pipeline() {
    let s =
        SensorArray::<f32>::from_coords(&[vec![0.5, 0.5], vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
    let truth = Vector::from_slice(&[2.0f32, 1.0]);
    let frame = MeasurementFrame::exact(&s, &truth, 1);
    let init = ols_initialize(&s, &frame).unwrap();
    assert!(init.distance(&truth) < 1e-4);
    let loss = LossSnapshot::new(&s, &frame).unwrap();
    let st = TrackerState::new(Method::Onm, Vector::from_slice(&[2.01f32, 0.99]), 0.1).unwrap();
    let next = onm_step(&st, &loss).unwrap();
    assert!(next.estimate.distance(&truth) < st.estimate.distance(&truth));
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-4.0..4.0f64, -4.0..4.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn loss_is_translation_equivariant(target in point(), query in point(), shift in point()) {
        let s = reference_sensors();
        let (t, q, d) = (v(&[target.0, target.1]), v(&[query.0, query.1]), v(&[shift.0, shift.1]));
        prop_assume!(s.distances(&q).iter().all(|&r| r > 0.05));
        let moved = s.translated(&d);
        let f0 = MeasurementFrame::exact(&s, &t, 1);
        let f1 = MeasurementFrame::exact(&moved, &(&t + &d), 1);
        let l0 = LossSnapshot::new(&s, &f0).unwrap();
        let l1 = LossSnapshot::new(&moved, &f1).unwrap();
        let q1 = &q + &d;
        let scale = 1.0 + q.norm() + d.norm() + t.norm();
        prop_assert!((l0.value(&q).unwrap() - l1.value(&q1).unwrap()).abs() < 1e-11 * scale * scale);
        prop_assert!((&l0.gradient(&q).unwrap() - &l1.gradient(&q1).unwrap()).norm() < 1e-10 * scale);
        let (h0, h1) = (l0.hessian(&q).unwrap(), l1.hessian(&q1).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((h0[(i, j)] - h1[(i, j)]).abs() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn trackers_commute_with_translation(start in point(), shift in point()) {
        let s = reference_sensors();
        let truth = v(&[2.0, 1.0]);
        let d = v(&[shift.0, shift.1]);
        let x0 = &truth + &v(&[start.0, start.1]).scaled(0.02);
        let moved = s.translated(&d);
        let f0 = MeasurementFrame::exact(&s, &truth, 1);
        let f1 = MeasurementFrame::exact(&moved, &(&truth + &d), 1);
        let l0 = LossSnapshot::new(&s, &f0).unwrap();
        let l1 = LossSnapshot::new(&moved, &f1).unwrap();
        for method in [Method::Ogd, Method::Onm] {
            let a = TrackerState::new(method, x0.clone(), 0.1).unwrap();
            let b = TrackerState::new(method, &x0 + &d, 0.1).unwrap();
            let (a, b) = match method {
                Method::Ogd => (ogd_step(&a, &l0).unwrap(), ogd_step(&b, &l1).unwrap()),
                Method::Onm => (onm_step(&a, &l0).unwrap(), onm_step(&b, &l1).unwrap()),
            };
            prop_assert!((&a.estimate + &d).distance(&b.estimate) < 1e-9 * (1.0 + d.norm()));
        }
    }

    #[test]
    fn jacobi_eigenvalues_match_nalgebra(entries in prop::collection::vec(-5.0..5.0f64, 15), n in 2usize..=5) {
        let mut m = Matrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let x = entries[k];
                k += 1;
                m.add_outer(x, &Vector::basis(n, i), &Vector::basis(n, j));
                if i != j {
                    m.add_outer(x, &Vector::basis(n, j), &Vector::basis(n, i));
                }
            }
        }
        let ours = symmetric_eigenvalues(&m);
        let dm = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
        let mut theirs: Vec<f64> = SymmetricEigen::new(dm).eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn kappa_decreases_with_noise(s1 in 0.0..0.1f64, s2 in 0.0..0.1f64, k1 in 0.0..5.0f64, k2 in 0.0..5.0f64) {
        let cfg = ConvexityConfig::empirical(k1, k2);
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(kappa(&cfg, 3, 0.0641, hi) <= kappa(&cfg, 3, 0.0641, lo));
    }

    #[test]
    fn rho_decreases_with_step(mu in 0.01..1.0f64, extra in 0.0..10.0f64, a in 0.01..1.0f64, b in 0.01..1.0f64) {
        let l = mu + extra;
        let max = 2.0 / (mu + l);
        let (e1, e2) = if a <= b { (a * max, b * max) } else { (b * max, a * max) };
        let r1 = contraction_factor(e1, mu, l).unwrap();
        let r2 = contraction_factor(e2, mu, l).unwrap();
        prop_assert!(r2 <= r1 && r1 < 1.0 && r2 >= 0.0);
    }
}
