use dirac_core::catalog::{named_field, random_polynomial_family};
use dirac_core::field::{dirac_apply_fd, laplacian_apply, laplacian_via_dirac, trace_extract};
use dirac_core::{BoundaryMesh, CliffordField64, Domain64, Multivector64, VolumeMesh64};

#[test]
fn monogenic_linear_basis_is_exact() {
    for n in [2usize, 3] {
        let mut basis: Vec<CliffordField64> = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                basis.push(CliffordField64::closed_form("sym", n, move |x: &[f64]| {
                    Multivector64::e(n, j) * x[i - 1] + &(Multivector64::e(n, i) * x[j - 1])
                }));
                basis.push(CliffordField64::closed_form("diag", n, move |x: &[f64]| {
                    Multivector64::e(n, i) * x[i - 1] - &(Multivector64::e(n, j) * x[j - 1])
                }));
            }
        }
        for f in &basis {
            for x in [[0.3, -0.2, 0.5], [1.5, 0.7, -2.0]] {
                assert!(dirac_apply_fd(f, &x[..n], 1e-3).unwrap().max_abs() < 1e-11);
            }
        }
    }
}

#[test]
fn laplacian_is_minus_dirac_squared() {
    let x = [0.31, -0.22];
    for f in random_polynomial_family::<f64>(2, 5, 3) {
        let direct = laplacian_apply(&f, &x, 1e-3).unwrap();
        let nested = |h: f64| laplacian_via_dirac(&f, &x, h).unwrap();
        let (a, b) = (nested(2e-3), nested(1e-3));
        // Richardson estimate of the nested stencil's truncation error
        let truncation = (a - &b).norm() * 4.0 / 3.0;
        assert!((direct - &b).norm() <= 10.0 * truncation + 1e-6, "{}", f.name());
    }
}

#[test]
fn trace_error_is_second_order_in_offset() {
    let d = Domain64::unit_disk();
    let b = BoundaryMesh::new(&d, 64).unwrap();
    let f = named_field::<f64>("exp_trig", 2).unwrap();
    let err = |eps: f64| {
        let t = trace_extract(&f, &b, eps).unwrap();
        let got = t.values_at(b.key(), b.centers()).unwrap();
        b.centers().zip(&got).map(|(y, v)| (v.clone() - &f.eval(y).unwrap()).norm()).fold(0.0, f64::max)
    };
    let (e1, e2, e3) = (err(0.04), err(0.02), err(0.01));
    assert!((e1 / e2).log2() >= 1.8 && (e2 / e3).log2() >= 1.8, "{e1} {e2} {e3}");
}

#[test]
fn boundary_panels_lie_on_the_surface() {
    for (d, res) in [(Domain64::unit_disk(), 256), (Domain64::unit_ball(), 24)] {
        let b = BoundaryMesh::new(&d, res).unwrap();
        let c = d.centroid();
        for i in 0..b.len() {
            let (y, nu) = (b.center(i), b.normal(i));
            let r: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() < 1e-12);
            let len: f64 = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((len - 1.0).abs() < 1e-12);
            assert!(nu.iter().zip(y.iter().zip(c.iter())).map(|(n, (y, c))| n * (y - c)).sum::<f64>() > 0.0);
            assert!(b.area(i) > 0.0);
        }
    }
    let cube = Domain64::unit_box(3);
    let b = BoundaryMesh::new(&cube, 8).unwrap();
    for i in 0..b.len() {
        assert!(cube.signed_distance(b.center(i)).abs() < 1e-12);
        assert_eq!(b.normal(i).iter().filter(|v| v.abs() == 1.0).count(), 1);
    }
}

#[test]
fn refinement_reduces_measure_error() {
    for d in [Domain64::unit_disk(), Domain64::unit_ball()] {
        let errs: Vec<f64> = [4, 8, 16, 32]
            .iter()
            .map(|&r| {
                let m = VolumeMesh64::new(&d, r).unwrap();
                assert!(m.weights().iter().all(|&w| w > 0.0));
                (m.total_weight() - d.measure()).abs()
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-12 * d.measure()), "{errs:?}");
    }
}
