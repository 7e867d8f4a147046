//! Hand-computed and published values checked through the public API.

use std::f64::consts::PI;

use num_complex::Complex64;
use reeb_mec::catalog::{self, handle_family, prequantization, standard_sphere, standard_sphere_af, ustilovsky};
use reeb_mec::indices::{
    catenation_defect, conley_zehnder, conley_zehnder_rot, degree, dgw_index, mean_index, robbin_salamon,
    robbin_salamon_sampled, unitary_index, wip_fit, AnalyticPath, Block, DEFAULT_K_MAX, KAPPA1_CAP,
};
use reeb_mec::mec::{
    mec_af, mec_mb, oracle_convergence, reachability_necessary, surgery_apply, surgery_generators, truncated_euler,
    MecValue, SurgeryMode, SurgeryStep,
};
use reeb_mec::orbit_model::{
    e_invariant, enumerate_generators, orbifold_degree, orbifold_sign, validate_af, AfModel, Model, OrbitType,
    PrincipalOrbitFamily,
};
use reeb_mec::rational::{q, qi};
use reeb_mec::symplin::{
    block_rotation, det_complex_sq, direct_sum, is_symplectic, iterate_path, lift_angle, polar_decompose,
    rotation_path, standard_j, stretch, Mat, SympPath,
};
use reeb_mec::Error;

fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
    (a - b).amax() <= tol
}

fn rot(rates: &[f64]) -> SympPath {
    rotation_path(rates, 1.0, 64).unwrap()
}

fn stretch_path(factor: f64) -> SympPath {
    let samples = (0..=16)
        .map(|i| {
            let t = i as f64 / 16.0;
            (t, stretch(&[factor.powf(t)]))
        })
        .collect();
    SympPath::new(samples).unwrap()
}

#[test]
fn standard_j_blocks() {
    assert_eq!(standard_j(1), Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
    let j = standard_j(2);
    assert_eq!(&j * &j, -Mat::identity(4, 4));
    assert_eq!(j[(0, 2)], -1.0);
    assert_eq!(j[(2, 0)], 1.0);
}

#[test]
fn symplectic_membership() {
    assert!(is_symplectic(&Mat::identity(2, 2), 1e-9).unwrap());
    assert!(is_symplectic(&stretch(&[2.0]), 1e-9).unwrap());
    assert!(!is_symplectic(&Mat::from_diagonal_element(2, 2, 2.0), 1e-9).unwrap());
}

#[test]
fn polar_examples() {
    let d = stretch(&[2.0]);
    let pp = polar_decompose(&d).unwrap();
    assert!(close(&pp.p, &d, 1e-12) && close(&pp.u, &Mat::identity(2, 2), 1e-12));

    let r = block_rotation(&[0.7]);
    let pp = polar_decompose(&r).unwrap();
    assert!(close(&pp.p, &Mat::identity(2, 2), 1e-12) && close(&pp.u, &r, 1e-12));

    let r3 = block_rotation(&[PI / 3.0]);
    let a = &r3 * stretch(&[3.0]);
    let pp = polar_decompose(&a).unwrap();
    assert!(close(&pp.u, &r3, 1e-10));
    assert!(close(&pp.p, &(&r3 * stretch(&[3.0]) * r3.transpose()), 1e-10));
}

#[test]
fn squared_complex_determinant() {
    assert!((det_complex_sq(&Mat::identity(2, 2)).unwrap() - 1.0).norm() < 1e-12);
    let phi = 0.4;
    assert!((det_complex_sq(&block_rotation(&[phi])).unwrap() - Complex64::from_polar(1.0, 2.0 * phi)).norm() < 1e-12);
    let u = block_rotation(&[0.3, -1.1]);
    assert!((det_complex_sq(&u).unwrap() - Complex64::from_polar(1.0, 2.0 * (0.3 - 1.1))).norm() < 1e-12);
}

#[test]
fn lift_examples() {
    assert_eq!(lift_angle(&SympPath::constant(2, 1.0)).unwrap().theta_end(), 0.0);
    assert!((lift_angle(&rot(&[2.0 * PI])).unwrap().theta_end() - 2.0 * PI).abs() < 1e-9);
    assert!(lift_angle(&rot(&[2.0 * PI, -2.0 * PI])).unwrap().theta_end().abs() < 1e-9);
}

#[test]
fn iterate_examples() {
    let p = rot(&[PI]);
    assert_eq!(iterate_path(&p, 1).matrices(), p.matrices());
    let twice = iterate_path(&p, 2);
    let direct = rotation_path(&[PI], 2.0, 128).unwrap();
    assert_eq!(twice.times(), direct.times());
    for (a, b) in twice.matrices().iter().zip(direct.matrices()) {
        assert!(close(a, b, 1e-12));
    }
}

#[test]
fn rotation_path_examples() {
    let p = rotation_path(&[0.0], 3.0, 8).unwrap();
    assert!(p.matrices().iter().all(|m| *m == Mat::identity(2, 2)));
    assert!(rot(&[2.0 * PI]).is_loop());
    let e = rot(&[PI, -PI]).endpoint().clone();
    assert!(close(&e, &-Mat::identity(4, 4), 1e-12));
}

#[test]
fn unitary_index_examples() {
    assert_eq!(unitary_index(&SympPath::constant(1, 1.0)).unwrap(), 0.0);
    assert!((unitary_index(&rot(&[2.0 * PI])).unwrap() - 2.0).abs() < 1e-9);
    assert!((unitary_index(&rot(&[2.0 * PI, 2.0 * PI])).unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn dgw_examples() {
    assert_eq!(dgw_index(&Mat::identity(2, 2)).unwrap(), 0.0);
    assert!(dgw_index(&stretch(&[2.0])).unwrap().abs() < 1e-12);
    assert!((dgw_index(&block_rotation(&[PI / 2.0])).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn conley_zehnder_closed_form() {
    assert_eq!(conley_zehnder_rot(&[1.0], PI).unwrap(), 1);
    assert_eq!(conley_zehnder_rot(&[1.0], 3.0 * PI).unwrap(), 3);
    assert_eq!(conley_zehnder_rot(&[1.0, 1.0], PI).unwrap(), 2);
    assert_eq!(conley_zehnder_rot(&[-1.0], 3.0 * PI).unwrap(), -3);
    assert!(matches!(conley_zehnder_rot(&[2.0 * PI], 1.0), Err(Error::Degenerate { .. })));
}

#[test]
fn conley_zehnder_sampled() {
    assert_eq!(conley_zehnder(&rot(&[PI])).unwrap(), 1);
    assert_eq!(conley_zehnder(&rot(&[3.0 * PI])).unwrap(), 3);
    assert_eq!(conley_zehnder(&stretch_path(2.0)).unwrap(), 0);
    let err = conley_zehnder(&rot(&[2.0 * PI])).unwrap_err();
    assert!(err.to_string().contains("use rs"));
}

#[test]
fn robbin_salamon_examples() {
    assert_eq!(robbin_salamon(&AnalyticPath::rotation(&[2.0 * PI], 1.0)).unwrap(), qi(2));
    assert_eq!(robbin_salamon_sampled(&rot(&[2.0 * PI])).unwrap(), qi(2));
    assert_eq!(robbin_salamon(&AnalyticPath::rotation(&[0.0], 1.0)).unwrap(), qi(0));
    assert_eq!(robbin_salamon_sampled(&SympPath::constant(1, 1.0)).unwrap(), qi(0));
    assert_eq!(robbin_salamon(&AnalyticPath::rotation(&[PI], 1.0)).unwrap(), qi(1));
    let mixed = AnalyticPath { blocks: vec![Block::Rotation(PI), Block::Stretch(0.5)], t_end: 1.0 };
    assert_eq!(robbin_salamon(&mixed).unwrap(), qi(1));
    assert_eq!(robbin_salamon_sampled(&mixed.sample(64).unwrap()).unwrap(), qi(1));
    let sheared = AnalyticPath { blocks: vec![Block::Shear(1.0)], t_end: 1.0 };
    assert!(matches!(robbin_salamon(&sheared), Err(Error::NonIsolatedCrossing(_))));
}

#[test]
fn repeated_eigenvalues_do_not_stall() {
    let rates = [3.0 * PI, 3.0 * PI, -3.0 * PI];
    assert_eq!(robbin_salamon_sampled(&rot(&rates)).unwrap(), qi(3));
    assert_eq!(conley_zehnder(&rot(&rates)).unwrap(), 3);
}

#[test]
fn mean_index_examples() {
    let (m, err) = mean_index(&rot(&[3.0 * PI]), DEFAULT_K_MAX).unwrap();
    assert!((m - 3.0).abs() < 1e-9 && err == 0.0);
    assert_eq!(mean_index(&SympPath::constant(1, 1.0), DEFAULT_K_MAX).unwrap().0, 0.0);
    let (m, _) = mean_index(&rot(&[2.0 * PI, 4.0 * PI]), DEFAULT_K_MAX).unwrap();
    assert!((m - 6.0).abs() < 1e-9);
}

#[test]
fn degree_examples() {
    assert_eq!(degree(2, 2), 1);
    assert_eq!(degree(4, 2), 3);
    assert_eq!(degree(0, 3), 0);
}

#[test]
fn catenation_examples() {
    let p = rot(&[1.3, -0.4]);
    assert!(catenation_defect(&p, &SympPath::constant(2, 1.0)).unwrap() < 1e-9);
    assert!(catenation_defect(&p, &rot(&[0.2, 2.5])).unwrap() < 1e-9);
}

#[test]
fn wip_fit_examples() {
    let line: Vec<(f64, f64)> = (1..=5).map(|a| (a as f64, 2.0 * a as f64 + 1.0)).collect();
    let c = wip_fit(&line).unwrap().unwrap();
    assert!((c.kappa1 - 2.0).abs() < 1e-12 && (c.kappa2 - 1.0).abs() < 1e-12 && c.witness_margin == 0.0);
    let c = wip_fit(&[(1.0, 5.0)]).unwrap().unwrap();
    assert_eq!((c.kappa1, c.kappa2), (KAPPA1_CAP, 5.0 - KAPPA1_CAP));
    assert!(wip_fit(&[(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]).unwrap().is_none());
}

#[test]
fn validate_af_examples() {
    assert!(validate_af(&standard_sphere_af(3).unwrap()).is_empty());
    let mut m = standard_sphere_af(2).unwrap();
    m.families[0].degree_rule.as_mut().unwrap().b += 1;
    assert!(validate_af(&m).iter().any(|v| v.contains("parity")));
    let mut m = standard_sphere_af(2).unwrap();
    m.families[0].delta = qi(0);
    assert!(validate_af(&m).iter().any(|v| v.contains("nonzero")));
}

#[test]
fn orbifold_examples() {
    let s = standard_sphere(2).unwrap();
    assert_eq!(orbifold_degree(&s.maximal[0], 1, 2).unwrap(), 2);
    assert_eq!(orbifold_sign(&s.maximal[0], 2).unwrap(), 1);
    let u = ustilovsky(5, 7).unwrap();
    assert_eq!(orbifold_degree(&u.maximal[0], 1, 5).unwrap(), 44);
    assert_eq!(orbifold_sign(&u.maximal[0], 5).unwrap(), 1);
    for n in 2..=6 {
        assert_eq!(e_invariant(&standard_sphere(n).unwrap().maximal[0].strata).unwrap(), n as i64);
    }
    for (n, p) in [(3, 7), (5, 9), (7, 23)] {
        assert_eq!(e_invariant(&ustilovsky(n, p).unwrap().maximal[0].strata).unwrap(), (n as i64 - 1) * p + 1);
    }
}

#[test]
fn generator_examples() {
    let mb = Model::Mb(standard_sphere(2).unwrap());
    let got = enumerate_generators(&mb, i64::MIN / 4, 8).unwrap();
    assert_eq!(got.into_iter().collect::<Vec<_>>(), vec![(2, 1), (4, 1), (6, 1), (8, 1)]);
    let af = Model::Af(standard_sphere_af(2).unwrap());
    assert_eq!(enumerate_generators(&af, i64::MIN / 4, 8).unwrap(), enumerate_generators(&mb, i64::MIN / 4, 8).unwrap());
    assert!(enumerate_generators(&mb, i64::MIN / 4, 1).unwrap().is_empty());
    assert!(matches!(
        enumerate_generators(&Model::Mb(ustilovsky(5, 7).unwrap()), 0, 100),
        Err(Error::IncompleteData(_))
    ));
}

#[test]
fn mec_af_examples() {
    assert_eq!(mec_af(&standard_sphere_af(2).unwrap()).unwrap(), MecValue::new(q(1, 2), qi(0)));
    let empty = AfModel { n: 2, families: vec![], no_low_degree: true, linearized: false };
    assert_eq!(mec_af(&empty).unwrap(), MecValue::new(qi(0), qi(0)));
    let half = AfModel {
        n: 3,
        families: vec![PrincipalOrbitFamily {
            label: "y".into(),
            orbit_type: OrbitType::II,
            sigma: 1,
            delta: qi(2),
            degree_rule: None,
        }],
        no_low_degree: true,
        linearized: false,
    };
    assert_eq!(mec_af(&half).unwrap().chi_plus, Some(q(1, 4)));
}

#[test]
fn mec_mb_examples() {
    for n in 2..=10 {
        assert_eq!(mec_mb(&standard_sphere(n).unwrap()).unwrap(), MecValue::new(q(1, 2), qi(0)));
    }
    assert_eq!(mec_mb(&ustilovsky(5, 7).unwrap()).unwrap(), MecValue::new(q(29, 46), qi(0)));
    assert_ne!(mec_mb(&ustilovsky(5, 9).unwrap()).unwrap().chi_plus, Some(q(29, 46)));
    assert_eq!(mec_mb(&ustilovsky(5, 9).unwrap()).unwrap().chi_plus, Some(q(37, 58)));
}

#[test]
fn truncated_euler_examples() {
    let mb = Model::Mb(standard_sphere(2).unwrap());
    let af = Model::Af(standard_sphere_af(2).unwrap());
    assert_eq!(truncated_euler(&mb, 100).unwrap(), qi(50));
    assert_eq!(truncated_euler(&af, 100).unwrap(), qi(50));
    assert_eq!(truncated_euler(&Model::Mb(standard_sphere(4).unwrap()), 3).unwrap(), qi(0));
    let rep = oracle_convergence(&mb, &[100, 1000, 10_000]).unwrap();
    assert!(rep.rows.iter().all(|r| r.plus == q(1, 2)));
    assert_eq!(rep.fitted_plus, q(1, 2));
    assert!(matches!(oracle_convergence(&mb, &[1000, 100]), Err(Error::InvalidInput(_))));
}

#[test]
fn surgery_examples() {
    assert_eq!(surgery_generators(2, 1, 7).unwrap(), vec![1, 3, 5, 7]);
    assert_eq!(surgery_generators(3, 1, 8).unwrap(), vec![3, 5, 7]);
    assert!(surgery_generators(3, 1, 2).unwrap().is_empty());
    assert!(matches!(surgery_generators(3, 3, 10), Err(Error::NotSubcritical { .. })));

    let h = handle_family(3, 1).unwrap();
    assert_eq!((h.family.sigma, h.family.delta, h.first_degree), (-1, qi(2), 3));
    assert_eq!(handle_family(3, 2).unwrap().family.sigma, 1);

    let sphere = MecValue::new(q(1, 2), qi(0));
    let step = |k, mode| SurgeryStep { k, n: 3, mode, linearized: false };
    assert_eq!(surgery_apply(&sphere, &step(1, SurgeryMode::Generator)).unwrap(), MecValue::new(qi(0), qi(0)));
    let c = surgery_apply(&sphere, &step(2, SurgeryMode::Corollary)).unwrap();
    assert_eq!(c.chi.unwrap() - sphere.chi.unwrap(), q(1, 2));
}

#[test]
fn reachability_examples() {
    let sphere = mec_mb(&standard_sphere(5).unwrap()).unwrap();
    let u = mec_mb(&ustilovsky(5, 7).unwrap()).unwrap();
    assert!(!reachability_necessary(&sphere, &u, SurgeryMode::Generator).unwrap().reachable);
    let same = reachability_necessary(&sphere, &sphere, SurgeryMode::Generator).unwrap();
    assert!(same.reachable && same.even_surgeries == 0 && same.odd_surgeries == 0);
    let down = reachability_necessary(&sphere, &MecValue::new(qi(0), qi(0)), SurgeryMode::Generator).unwrap();
    assert!(down.reachable && down.odd_surgeries == 1 && down.even_surgeries == 0);
}

#[test]
fn prequantization_examples() {
    assert_eq!(prequantization(2, 2).unwrap(), mec_mb(&standard_sphere(2).unwrap()).unwrap());
    assert_eq!(prequantization(0, 5).unwrap().chi_plus, Some(qi(0)));
    let v = prequantization(6, -3).unwrap();
    assert_eq!((v.chi_plus, v.chi_minus), (Some(qi(0)), Some(qi(-1))));
    let model = catalog::prequantization_model(6, -3, 3).unwrap();
    assert_eq!(mec_mb(&model).unwrap(), v);
}

#[test]
fn direct_sum_of_rotations_is_block_rotation() {
    let a = block_rotation(&[0.3]);
    let b = block_rotation(&[1.2]);
    assert!(close(&direct_sum(&a, &b), &block_rotation(&[0.3, 1.2]), 1e-15));
}
