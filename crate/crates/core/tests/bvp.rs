use std::sync::Arc;

use dirac_core::bvp::{manufactured_case, random_first_order_family, sample_points, BVPSpec, BoundaryData, Order, Solution};
use dirac_core::catalog::random_polynomial_family;
use dirac_core::Domain64;

fn sum_specs(a: &BVPSpec<f64>, b: &BVPSpec<f64>) -> BVPSpec<f64> {
    let mut s = a.clone();
    s.f = a.f.sum(&b.f).unwrap();
    s.data = match (&a.data, &b.data) {
        (BoundaryData::First { g: x }, BoundaryData::First { g: y }) => BoundaryData::First { g: x.sum(y).unwrap() },
        (BoundaryData::Second { g1: x1, g2: x2 }, BoundaryData::Second { g1: y1, g2: y2 }) => {
            BoundaryData::Second { g1: x1.sum(y1).unwrap(), g2: x2.sum(y2).unwrap() }
        }
        _ => unreachable!(),
    };
    s
}

#[test]
fn solutions_are_linear_in_the_data() {
    let d = Domain64::unit_disk();
    let pts = sample_points(&d, 8, 0.05, 3).unwrap();
    let first = random_first_order_family(&d, 2, 5, 16);
    let polys = random_polynomial_family::<f64>(2, 6, 8);
    let second: Vec<_> =
        (0..2).map(|i| BVPSpec::second_order(d.clone(), polys[3 * i].clone(), polys[3 * i + 1].clone(), polys[3 * i + 2].clone(), 12)).collect();
    for pair in [first, second] {
        let sum = sum_specs(&pair[0], &pair[1]);
        let (a, b, c) = (Solution::new(&pair[0]).unwrap(), Solution::new(&pair[1]).unwrap(), Solution::new(&sum).unwrap());
        for x in &pts {
            let expect = a.eval(x).unwrap() + &b.eval(x).unwrap();
            let got = c.eval(x).unwrap();
            assert!((got - &expect).norm() <= 1e-10 * (1.0 + expect.norm()));
        }
    }
}

#[test]
fn first_order_reproduction_converges() {
    let d = Domain64::unit_disk();
    let pts = sample_points(&d, 20, 0.1, 42).unwrap();
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&res| {
            let case = manufactured_case("cubic", Order::First, d.clone(), res).unwrap();
            let sol = Solution::new(&case.spec).unwrap();
            case.reproduction_error(&sol, &pts).unwrap()
        })
        .collect();
    assert!((errs[1] / errs[2]).log2() >= 0.8, "{errs:?}");
}

#[test]
fn monogenic_data_is_reproduced() {
    let d = Domain64::unit_disk();
    let pts = sample_points(&d, 20, 0.1, 42).unwrap();
    let case = manufactured_case("monogenic_linear", Order::First, d, 64).unwrap();
    assert!(case.spec.f.eval(&[0.1, 0.2]).unwrap().is_zero());
    let sol = Solution::new(&case.spec).unwrap();
    assert!(case.reproduction_error(&sol, &pts).unwrap() <= 0.01);
}

#[test]
fn first_order_on_the_ball() {
    let d = Domain64::unit_ball();
    let pts = sample_points(&d, 10, 0.1, 42).unwrap();
    let case = manufactured_case("norm_squared", Order::First, d, 12).unwrap();
    let sol = Arc::new(Solution::new(&case.spec).unwrap());
    assert!(case.reproduction_error(&sol, &pts).unwrap() <= 0.02);
}
