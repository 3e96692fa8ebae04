use dirac_core::{embed_vector, mv_conj, mv_mul, mv_norm, vector_inverse, Multivector64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mv(n: usize) -> impl Strategy<Value = Multivector64> {
    prop::collection::vec(-1.0f64..1.0, 1 << n).prop_map(move |c| Multivector64::from_coeffs(n, &c).unwrap())
}

fn triple() -> impl Strategy<Value = (Multivector64, Multivector64, Multivector64)> {
    (1usize..=5).prop_flat_map(|n| (mv(n), mv(n), mv(n)))
}

fn close(a: &Multivector64, b: &Multivector64, rel: f64) -> bool {
    (a.clone() - b).norm() <= rel * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #[test]
    fn product_is_associative((a, b, c) in triple()) {
        let left = mv_mul(&mv_mul(&a, &b).unwrap(), &c).unwrap();
        let right = mv_mul(&a, &mv_mul(&b, &c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn product_distributes((a, b, c) in triple()) {
        let left = mv_mul(&a, &(b.clone() + &c)).unwrap();
        let right = mv_mul(&a, &b).unwrap() + &mv_mul(&a, &c).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn conj_is_an_involutive_anti_automorphism((a, b, _c) in triple(), s in -3.0f64..3.0) {
        prop_assert_eq!(mv_conj(&mv_conj(&a)), a.clone());
        let lhs = mv_conj(&mv_mul(&a, &b).unwrap());
        let rhs = mv_mul(&mv_conj(&b), &mv_conj(&a)).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
        prop_assert!(close(&mv_conj(&(a.clone() * s + &b)), &(mv_conj(&a) * s + &mv_conj(&b)), 1e-14));
    }

    #[test]
    fn vectors_square_to_minus_norm(x in prop::collection::vec(-2.0f64..2.0, 2..=6)) {
        let v = embed_vector(&x);
        let sq = mv_mul(&v, &v).unwrap();
        let r2: f64 = x.iter().map(|t| t * t).sum();
        prop_assert!(close(&sq, &Multivector64::scalar(x.len(), -r2), 1e-12));
        prop_assert!((mv_norm(&v) - r2.sqrt()).abs() <= 1e-12 * (1.0 + r2.sqrt()));
        if r2 > 1e-6 {
            let inv = vector_inverse(&v).unwrap();
            prop_assert!(close(&mv_mul(&v, &inv).unwrap(), &Multivector64::one(x.len()), 1e-12));
        }
    }

    #[test]
    fn squared_norm_is_scalar_part_of_a_conj_a(a in (1usize..=5).prop_flat_map(mv)) {
        let s = mv_mul(&a, &mv_conj(&a)).unwrap().scalar_part();
        let n2 = a.norm() * a.norm();
        prop_assert!((s - n2).abs() <= 1e-12 * (1.0 + n2));
    }
}

#[test]
fn generators_anticommute_exactly() {
    for n in 1..=6 {
        for i in 1..=n {
            let ei = Multivector64::e(n, i);
            assert_eq!(&ei * &ei, -Multivector64::one(n));
            for j in (i + 1)..=n {
                let ej = Multivector64::e(n, j);
                assert!((&ei * &ej + &(&ej * &ei)).is_zero());
            }
        }
    }
}

#[test]
fn product_norm_constant_in_cl3() {
    // empirical sup of |ab| / (|a||b|) over random pairs
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut sup: f64 = 0.0;
    for _ in 0..100_000 {
        let a: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (a, b) = (Multivector64::from_coeffs(3, &a).unwrap(), Multivector64::from_coeffs(3, &b).unwrap());
        sup = sup.max((&a * &b).norm() / (a.norm() * b.norm()));
    }
    assert!(sup >= 1.0 && sup <= 2f64.powf(1.5), "measured c(3) = {sup}");
}

#[test]
fn single_precision_algebra() {
    let x = embed_vector(&[3.0f32, 4.0]);
    assert_eq!(mv_norm(&x), 5.0);
    let inv = vector_inverse(&x).unwrap();
    assert!((mv_mul(&x, &inv).unwrap() - &dirac_core::Multivector::<f32>::one(2)).max_abs() < 1e-6);
}
