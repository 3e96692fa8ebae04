//! Named closed-form fields with analytic derivatives, and the seeded
//! random polynomial family.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use crate::clifford::{BladeIndex, Multivector};
use crate::error::{Error, Result};
use crate::field::CliffordField;
use crate::real::Real;

type Grad<T> = SmallVec<[Multivector<T>; 3]>;

/// `Σ_j e_j g_j`.
pub fn dirac_from_partials<T: Real>(n: usize, partials: &[Multivector<T>]) -> Multivector<T> {
    let mut out = Multivector::zero(n);
    let mut e = [T::zero(); 12];
    for (j, g) in partials.iter().enumerate() {
        e[j] = T::one();
        out += &g.left_mul_vector(&e[..n]);
        e[j] = T::zero();
    }
    out
}

/// Closed-form field whose analytic `Df` comes from its partial derivatives.
pub fn with_partials<T, F, G>(name: &str, n: usize, f: F, grad: G) -> CliffordField<T>
where
    T: Real,
    F: Fn(&[T]) -> Multivector<T> + Send + Sync + 'static,
    G: Fn(&[T]) -> Grad<T> + Send + Sync + 'static,
{
    CliffordField::closed_form(name, n, f).with_dirac(move |x: &[T]| dirac_from_partials(n, &grad(x)))
}

fn e12<T: Real>(n: usize) -> Multivector<T> {
    Multivector::blade(n, BladeIndex(0b11), T::one())
}

fn r2<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |a, &v| a + v * v)
}

/// Names accepted by [`named_field`].
pub const FIELD_NAMES: &[&str] =
    &["one", "zero", "quadratic_mixed", "monogenic_linear", "traceless", "cubic", "exp_trig", "harmonic_quadratic", "norm_squared"];

/// The manufactured fields used by the Borel–Pompeiu experiments.
pub const BOREL_POMPEIU_FIELDS: &[&str] = &["quadratic_mixed", "monogenic_linear", "traceless", "cubic", "exp_trig"];

/// A named closed-form field in `R^n`, `n ≥ 2`, with analytic Dirac
/// derivative. Only `x_1, x_2` enter except through `‖x‖`.
pub fn named_field<T: Real>(name: &str, n: usize) -> Result<CliffordField<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("named fields need n ≥ 2, got {n}")));
    }
    let zero = move || Multivector::<T>::zero(n);
    let e = move |j: usize| Multivector::<T>::e(n, j);
    let one = move || Multivector::<T>::one(n);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let f = match name {
        "one" => CliffordField::constant(one()),
        "zero" => CliffordField::zero(n),
        // ‖x‖² e₀ + x₁ e₂
        "quadratic_mixed" => with_partials(
            name,
            n,
            move |x: &[T]| one() * r2(x) + &(e(2) * x[0]),
            move |x: &[T]| {
                (0..n).map(|j| if j == 0 { one() * (two * x[0]) + &e(2) } else { one() * (two * x[j]) }).collect()
            },
        ),
        // x₁ e₁ − x₂ e₂
        "monogenic_linear" => with_partials(
            name,
            n,
            move |x: &[T]| e(1) * x[0] - &(e(2) * x[1]),
            move |_: &[T]| {
                (0..n)
                    .map(|j| match j {
                        0 => e(1),
                        1 => -e(2),
                        _ => zero(),
                    })
                    .collect()
            },
        ),
        // (1 − ‖x‖²) e₀, zero on the unit sphere
        "traceless" => with_partials(
            name,
            n,
            move |x: &[T]| one() * (T::one() - r2(x)),
            move |x: &[T]| (0..n).map(|j| one() * (-two * x[j])).collect(),
        ),
        // x₁² x₂ e₀ + x₂³ e₁ + x₁³ e₁₂
        "cubic" => with_partials(
            name,
            n,
            move |x: &[T]| one() * (x[0] * x[0] * x[1]) + &(e(1) * x[1].powi(3)) + &(e12::<T>(n) * x[0].powi(3)),
            move |x: &[T]| {
                (0..n)
                    .map(|j| match j {
                        0 => one() * (two * x[0] * x[1]) + &(e12::<T>(n) * (three * x[0] * x[0])),
                        1 => one() * (x[0] * x[0]) + &(e(1) * (three * x[1] * x[1])),
                        _ => zero(),
                    })
                    .collect()
            },
        ),
        // e^{x₁} cos x₂ e₀ + sin(x₁ x₂) e₁₂
        "exp_trig" => with_partials(
            name,
            n,
            move |x: &[T]| one() * (x[0].exp() * x[1].cos()) + &(e12::<T>(n) * (x[0] * x[1]).sin()),
            move |x: &[T]| {
                let c = (x[0] * x[1]).cos();
                (0..n)
                    .map(|j| match j {
                        0 => one() * (x[0].exp() * x[1].cos()) + &(e12::<T>(n) * (x[1] * c)),
                        1 => one() * (-x[0].exp() * x[1].sin()) + &(e12::<T>(n) * (x[0] * c)),
                        _ => zero(),
                    })
                    .collect()
            },
        ),
        // (x₁² − x₂²) e₀
        "harmonic_quadratic" => with_partials(
            name,
            n,
            move |x: &[T]| one() * (x[0] * x[0] - x[1] * x[1]),
            move |x: &[T]| {
                (0..n)
                    .map(|j| match j {
                        0 => one() * (two * x[0]),
                        1 => one() * (-two * x[1]),
                        _ => zero(),
                    })
                    .collect()
            },
        ),
        // ‖x‖² e₀
        "norm_squared" => with_partials(
            name,
            n,
            move |x: &[T]| one() * r2(x),
            move |x: &[T]| (0..n).map(|j| one() * (two * x[j])).collect(),
        ),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown field '{other}'; valid names: {}",
                FIELD_NAMES.join(", ")
            )))
        }
    };
    Ok(f)
}

/// Componentwise `−Δu` for the named fields that have one in closed form.
pub fn named_negative_laplacian<T: Real>(name: &str, n: usize) -> Result<CliffordField<T>> {
    let c = match name {
        "harmonic_quadratic" | "monogenic_linear" | "one" | "zero" => T::zero(),
        "norm_squared" => -T::lit(2.0 * n as f64),
        "traceless" => T::lit(2.0 * n as f64),
        other => return Err(Error::InvalidArgument(format!("no closed-form Laplacian for '{other}'"))),
    };
    Ok(CliffordField::constant(Multivector::scalar(n, c)).renamed(format!("-lap({name})")))
}

/// `Σ_β c_β x^β` over `β ∈ {0, …, degree}^n`, coefficients in `Cl_n`.
#[derive(Clone, Debug)]
pub struct PolynomialField<T: Real> {
    dim: usize,
    degree: usize,
    /// `(degree+1)^n` multivectors, `β_1` fastest.
    coeffs: Vec<Multivector<T>>,
}

impl<T: Real> PolynomialField<T> {
    /// Coefficients uniform in `[−scale, scale]`.
    pub fn random(dim: usize, degree: usize, scale: f64, rng: &mut impl Rng) -> Self {
        let terms = (degree + 1).pow(dim as u32);
        let coeffs = (0..terms)
            .map(|_| {
                let c: Vec<T> = (0..1usize << dim).map(|_| T::lit(rng.gen_range(-scale..=scale))).collect();
                Multivector::from_coeffs(dim, &c).expect("length 2^n")
            })
            .collect();
        PolynomialField { dim, degree, coeffs }
    }

    fn powers(&self, x: &[T], deriv: Option<usize>) -> Vec<SmallVec<[T; 8]>> {
        (0..self.dim)
            .map(|j| {
                (0..=self.degree)
                    .map(|k| match deriv {
                        Some(d) if d == j => {
                            if k == 0 {
                                T::zero()
                            } else {
                                T::from_usize_lossy(k) * x[j].powi(k as i32 - 1)
                            }
                        }
                        _ => x[j].powi(k as i32),
                    })
                    .collect()
            })
            .collect()
    }

    fn eval_with(&self, x: &[T], deriv: Option<usize>) -> Multivector<T> {
        let pw = self.powers(x, deriv);
        let mut out = Multivector::zero(self.dim);
        for (idx, c) in self.coeffs.iter().enumerate() {
            let mut rem = idx;
            let mut m = T::one();
            for p in &pw {
                m *= p[rem % (self.degree + 1)];
                rem /= self.degree + 1;
            }
            out.axpy(m, c);
        }
        out
    }

    pub fn eval(&self, x: &[T]) -> Multivector<T> {
        self.eval_with(x, None)
    }

    pub fn partial(&self, x: &[T], j: usize) -> Multivector<T> {
        self.eval_with(x, Some(j))
    }

    pub fn into_field(self, name: impl Into<String>) -> CliffordField<T> {
        let n = self.dim;
        let p = Arc::new(self);
        let q = Arc::clone(&p);
        CliffordField::closed_form(name, n, move |x: &[T]| p.eval(x)).with_dirac(move |x: &[T]| {
            let g: Grad<T> = (0..n).map(|j| q.partial(x, j)).collect();
            dirac_from_partials(n, &g)
        })
    }
}

/// `count` random tensor-product polynomial fields of degree ≤ 3 with
/// coefficients uniform in `[−1, 1]`, reproducible from `seed`.
pub fn random_polynomial_family<T: Real>(dim: usize, count: usize, seed: u64) -> Vec<CliffordField<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| PolynomialField::random(dim, 3, 1.0, &mut rng).into_field(format!("poly{i}"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{dirac_apply_fd, laplacian_apply};

    #[test]
    fn analytic_dirac_matches_differences() {
        for name in FIELD_NAMES {
            for n in [2, 3] {
                let f = named_field::<f64>(name, n).unwrap();
                let x: Vec<f64> = [0.3, -0.2, 0.1][..n].to_vec();
                let a = f.analytic_dirac(&x).unwrap();
                let d = dirac_apply_fd(&f, &x, 1e-4).unwrap();
                assert!((a - d).max_abs() < 1e-7, "{name} n={n}");
            }
        }
    }

    #[test]
    fn monogenic_field_is_monogenic() {
        let f = named_field::<f64>("monogenic_linear", 2).unwrap();
        assert!(f.analytic_dirac(&[0.4, 0.9]).unwrap().is_zero());
    }

    #[test]
    fn closed_form_laplacians() {
        for name in ["harmonic_quadratic", "norm_squared", "traceless"] {
            let u = named_field::<f64>(name, 2).unwrap();
            let f = named_negative_laplacian::<f64>(name, 2).unwrap();
            let x = [0.2, 0.5];
            let l = laplacian_apply(&u, &x, 1e-3).unwrap();
            assert!((l + f.eval(&x).unwrap()).max_abs() < 1e-6, "{name}");
        }
    }

    #[test]
    fn polynomial_family_is_reproducible() {
        let a = random_polynomial_family::<f64>(2, 3, 42);
        let b = random_polynomial_family::<f64>(2, 3, 42);
        let x = [0.1, 0.7];
        for (f, g) in a.iter().zip(&b) {
            assert_eq!(f.eval(&x).unwrap(), g.eval(&x).unwrap());
            let d = dirac_apply_fd(f, &x, 1e-4).unwrap();
            assert!((f.analytic_dirac(&x).unwrap() - d).max_abs() < 1e-6);
        }
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let err = named_field::<f64>("nope", 2).unwrap_err().to_string();
        assert!(err.contains("quadratic_mixed"));
    }
}
