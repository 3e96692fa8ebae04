//! Sobolev, Slobodeckij, discrete-dual and Hölder norms of Clifford fields,
//! all by midpoint quadrature on the meshes.
//!
//! Reductions run in a fixed order (per-node partial sums in parallel, then a
//! pairwise tree) so repeated runs agree bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::catalog::with_partials;
use crate::clifford::{BladeIndex, Multivector};
use crate::error::{Error, Result};
use crate::field::{multi_index_derivative_adaptive, tangential_derivative, CliffordField, MultiIndex};
use crate::mesh::{BoundaryMesh, Domain, Point, VolumeMesh};
use crate::real::{pairwise_sum, Real};

/// Default finite-difference step for norm derivatives.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Which terms of the boundary norm to include.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SlobodeckijForm {
    /// The double integral over `‖α‖ = [λ]` alone (for `0 < λ < 1` this is
    /// the whole definition).
    #[default]
    Seminorm,
    /// Lower-order `L^p` terms for `‖α‖ ≤ [λ]` plus the double integral; the
    /// definition for `λ > 1`.
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    Sobolev { k: usize, p: f64 },
    Slobodeckij { lambda: f64, p: f64, form: SlobodeckijForm },
    DualLower { p: f64 },
    Holder { lambda_h: f64, sample_pairs: usize, seed: u64 },
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let check_p = |p: f64| if p > 1.0 && p.is_finite() { Ok(()) } else { bad(format!("p = {p} must lie in (1, ∞)")) };
        match *self {
            NormSpec::Sobolev { p, .. } | NormSpec::DualLower { p } => check_p(p),
            NormSpec::Slobodeckij { lambda, p, .. } => {
                check_p(p)?;
                let frac = lambda - lambda.floor();
                if !(lambda > 0.0) || frac <= 0.0 {
                    return bad(format!("λ = {lambda}: fractional part must lie in (0, 1)"));
                }
                Ok(())
            }
            NormSpec::Holder { lambda_h, .. } => {
                if lambda_h > 0.0 && lambda_h <= 1.0 {
                    Ok(())
                } else {
                    bad(format!("Hölder exponent {lambda_h} outside (0, 1]"))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub spec: NormSpec,
    /// Resolution of the mesh the norm was computed on.
    pub resolution: usize,
    /// Cells or panels used.
    pub nodes: usize,
    /// Ordered pairs `(i, i)` skipped by the Slobodeckij double sum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonal_exclusion_count: Option<usize>,
    /// The value only bounds the true norm from below.
    pub lower_bound: bool,
    /// Named parts before the final root (e.g. `seminorm`, `lower_order`).
    pub parts: Vec<(String, f64)>,
}

/// `‖f‖_{W^{k,p}(Ω)}` with `∂^α` by finite differences of step `h`,
/// one-sided next to ∂Ω for fields restricted to Ω.
pub fn sobolev_norm<T: Real>(f: &CliffordField<T>, vmesh: &VolumeMesh<T>, k: usize, p: f64, h: T) -> Result<NormReport> {
    let spec = NormSpec::Sobolev { k, p };
    spec.validate()?;
    let per_order = sobolev_order_sums(f, vmesh, k, p, h)?;
    // cumulative per cell so truncation at k−1 is a prefix of the same sums
    let total = per_order.last().copied().unwrap_or(T::zero());
    let parts = per_order.iter().enumerate().map(|(m, s)| (format!("order<={m}"), s.to_f64_lossy())).collect();
    Ok(NormReport {
        value: total.to_f64_lossy().powf(1.0 / p),
        spec,
        resolution: vmesh.resolution(),
        nodes: vmesh.len(),
        diagonal_exclusion_count: None,
        lower_bound: false,
        parts,
    })
}

/// `Σ_c w_c Σ_{‖α‖≤m} |∂^α f(c)|^p` for `m = 0..=k`; entry `m` only adds
/// nonnegative terms to entry `m−1` in the same order.
pub fn sobolev_order_sums<T: Real>(
    f: &CliffordField<T>,
    vmesh: &VolumeMesh<T>,
    k: usize,
    p: f64,
    h: T,
) -> Result<Vec<T>> {
    let n = vmesh.dim();
    if f.dim() != n {
        return Err(Error::DimensionMismatch { left: n, right: f.dim() });
    }
    let alphas = MultiIndex::up_to(n, k);
    let pp = T::lit(p);
    let zeroth = f.values_at(vmesh.key(), vmesh.centers())?;
    let centers: Vec<&[T]> = vmesh.centers().collect();
    let rows: Vec<SmallVec<[T; 4]>> = centers
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut acc = SmallVec::<[T; 4]>::new();
            let mut s = T::zero();
            for order in 0..=k {
                for a in alphas.iter().filter(|a| a.total() == order) {
                    let v = if order == 0 { zeroth[i].clone() } else { multi_index_derivative_adaptive(f, a, c, h)? };
                    s += v.norm().powf(pp);
                }
                acc.push(s * vmesh.weight(i));
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok((0..=k).map(|m| pairwise_sum(&rows.iter().map(|r| r[m]).collect::<Vec<_>>())).collect())
}

/// Boundary norm of `g` in `W^{λ,p}(∂Ω)`: the double integral of
/// `|∂^α g(x) − ∂^α g(y)|^p / |x−y|^{n+{λ}p−1}` over `‖α‖ = [λ]`, plus the
/// `L^p` terms for `‖α‖ ≤ [λ]` in the full form.
/// Derivatives are tangential, taken on the normally-constant extension.
pub fn slobodeckij_norm<T: Real>(
    g: &CliffordField<T>,
    bmesh: &BoundaryMesh<T>,
    lambda: f64,
    p: f64,
    form: SlobodeckijForm,
) -> Result<NormReport> {
    let spec = NormSpec::Slobodeckij { lambda, p, form };
    spec.validate()?;
    let n = bmesh.dim();
    if g.dim() != n {
        return Err(Error::DimensionMismatch { left: n, right: g.dim() });
    }
    let order = lambda.floor() as usize;
    let frac = lambda - lambda.floor();
    let full = form == SlobodeckijForm::Full;
    let h = T::lit(DEFAULT_STEP * 0.1);
    let domain = bmesh.domain();
    let derivs = |alpha: &MultiIndex| -> Result<Vec<Multivector<T>>> {
        if alpha.total() == 0 {
            return g.values_at(bmesh.key(), bmesh.centers());
        }
        let pts: Vec<&[T]> = bmesh.centers().collect();
        pts.par_iter().map(|y| tangential_derivative(g, domain, alpha, y, h)).collect()
    };
    let pp = T::lit(p);
    let expo = T::lit(n as f64 + frac * p - 1.0);
    let m = bmesh.len();

    let mut semi = T::zero();
    for alpha in MultiIndex::exactly(n, order) {
        let v = derivs(&alpha)?;
        let rows: Vec<T> = (0..m)
            .into_par_iter()
            .map(|i| {
                let yi = bmesh.center(i);
                let mut s = T::zero();
                for j in 0..m {
                    if j == i {
                        continue;
                    }
                    let yj = bmesh.center(j);
                    let d2 = yi.iter().zip(yj).fold(T::zero(), |a, (&u, &w)| a + (u - w) * (u - w));
                    let diff = (v[i].clone() - &v[j]).norm();
                    if diff.is_zero() {
                        continue;
                    }
                    s += diff.powf(pp) / d2.sqrt().powf(expo) * bmesh.area(j);
                }
                s * bmesh.area(i)
            })
            .collect();
        semi += pairwise_sum(&rows);
    }

    let mut lower = T::zero();
    if full {
        for alpha in MultiIndex::up_to(n, order) {
            let v = derivs(&alpha)?;
            let terms: Vec<T> = v.iter().enumerate().map(|(i, x)| x.norm().powf(pp) * bmesh.area(i)).collect();
            lower += pairwise_sum(&terms);
        }
    }
    let mut parts = vec![("seminorm".to_string(), semi.to_f64_lossy())];
    if full {
        parts.push(("lower_order".to_string(), lower.to_f64_lossy()));
    }
    Ok(NormReport {
        value: (semi + lower).to_f64_lossy().powf(1.0 / p),
        spec,
        resolution: bmesh.resolution(),
        nodes: m,
        diagonal_exclusion_count: Some(m),
        lower_bound: false,
        parts,
    })
}

/// Smooth bump supported in Ω shrunk by `margin`: `(1 − ρ²)²` in the
/// shrunken ball, a product of such factors per axis in a box.
pub fn bump_field<T: Real>(domain: &Domain<T>, margin: T) -> Result<CliffordField<T>> {
    let n = domain.dim();
    let two = T::lit(2.0);
    match domain.clone() {
        Domain::Ball { center, radius } => {
            let r = radius - margin;
            if !(r > T::zero()) {
                return Err(Error::InvalidArgument(format!("margin {margin} leaves no support")));
            }
            let c2 = center.clone();
            let val = move |x: &[T]| {
                let s = x.iter().zip(&center).fold(T::zero(), |a, (&p, &q)| a + (p - q) * (p - q)) / (r * r);
                if s < T::one() {
                    (T::one() - s) * (T::one() - s)
                } else {
                    T::zero()
                }
            };
            let grad = move |x: &[T]| -> SmallVec<[T; 3]> {
                let s = x.iter().zip(&c2).fold(T::zero(), |a, (&p, &q)| a + (p - q) * (p - q)) / (r * r);
                (0..n)
                    .map(|j| if s < T::one() { -two * two * (T::one() - s) * (x[j] - c2[j]) / (r * r) } else { T::zero() })
                    .collect()
            };
            Ok(scalar_field("bump", n, val, grad))
        }
        Domain::Box { lo, hi } => {
            let mid: Point<T> = lo.iter().zip(&hi).map(|(&a, &b)| (a + b) / two).collect();
            let half: Point<T> = lo.iter().zip(&hi).map(|(&a, &b)| (b - a) / two - margin).collect();
            if half.iter().any(|&a| !(a > T::zero())) {
                return Err(Error::InvalidArgument(format!("margin {margin} leaves no support")));
            }
            let factor = move |t: T| if t.abs() < T::one() { (T::one() - t * t) * (T::one() - t * t) } else { T::zero() };
            let dfactor = move |t: T| if t.abs() < T::one() { -two * two * t * (T::one() - t * t) } else { T::zero() };
            let (m2, h2) = (mid.clone(), half.clone());
            let val = move |x: &[T]| (0..n).fold(T::one(), |a, j| a * factor((x[j] - mid[j]) / half[j]));
            let grad = move |x: &[T]| -> SmallVec<[T; 3]> {
                (0..n)
                    .map(|j| {
                        (0..n).fold(T::one(), |a, i| {
                            let t = (x[i] - m2[i]) / h2[i];
                            a * if i == j { dfactor(t) / h2[i] } else { factor(t) }
                        })
                    })
                    .collect()
            };
            Ok(scalar_field("bump", n, val, grad))
        }
    }
}

fn scalar_field<T, V, G>(name: &str, n: usize, val: V, grad: G) -> CliffordField<T>
where
    T: Real,
    V: Fn(&[T]) -> T + Send + Sync + 'static,
    G: Fn(&[T]) -> SmallVec<[T; 3]> + Send + Sync + 'static,
{
    with_partials(name, n, move |x: &[T]| Multivector::scalar(n, val(x)), move |x: &[T]| {
        grad(x).into_iter().map(|g| Multivector::scalar(n, g)).collect()
    })
}

/// Test functions `b·e_A` and `b·(x_j − c_j)·e_A` for every blade `A`, with
/// `b` the bump vanishing within `margin` of ∂Ω.
pub fn default_test_family<T: Real>(domain: &Domain<T>, margin: T) -> Result<Vec<CliffordField<T>>> {
    let n = domain.dim();
    let bump = bump_field(domain, margin)?;
    let c = domain.centroid();
    let mut out = Vec::new();
    for a in 0..(1u16 << n) {
        let blade = Multivector::blade(n, BladeIndex(a), T::one());
        for j in 0..=n {
            let (b1, b2, bl, bl2, c1) = (bump.clone(), bump.clone(), blade.clone(), blade.clone(), c.clone());
            let name = if j == 0 { format!("bump*{}", BladeIndex(a).name()) } else { format!("bump*x{j}*{}", BladeIndex(a).name()) };
            let lin = move |x: &[T]| if j == 0 { T::one() } else { x[j - 1] - c1[j - 1] };
            let lin2 = lin.clone();
            let f = CliffordField::closed_form(name, n, move |x: &[T]| bl.clone() * (b1.eval(x).expect("bump").scalar_part() * lin(x)))
                .with_dirac(move |x: &[T]| {
                    // D(φ e_A) = (Dφ) e_A for scalar φ = b·l
                    let bval = b2.eval(x).expect("bump").scalar_part();
                    let db = b2.analytic_dirac(x).expect("bump derivative");
                    let mut dphi = db * lin2(x);
                    if j > 0 {
                        dphi += &(Multivector::e(n, j) * bval);
                    }
                    dphi.try_mul(&bl2).expect("same dimension")
                });
            out.push(f);
        }
    }
    Ok(out)
}

/// Lower bound for `‖Df‖_{W^{−1,p}}`:
/// `max_v |Σ_c w_c (conj(f) Dv)_0| / ‖v‖_{W^{1,q}}` over the test family,
/// `1/p + 1/q = 1`. The pairing is `⟨Df, v⟩` after integration by parts.
pub fn dual_norm_lower_bound<T: Real>(
    f: &CliffordField<T>,
    vmesh: &VolumeMesh<T>,
    p: f64,
    family: &[CliffordField<T>],
) -> Result<NormReport> {
    let spec = NormSpec::DualLower { p };
    spec.validate()?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let q = p / (p - 1.0);
    let fv = f.values_at(vmesh.key(), vmesh.centers())?;
    let mut best = 0.0f64;
    let mut parts = Vec::new();
    for v in family {
        let centers: Vec<&[T]> = vmesh.centers().collect();
        let terms: Vec<T> = centers
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let dv = match v.analytic_dirac(c) {
                    Some(d) => d,
                    None => crate::field::dirac_apply(v, c, T::lit(DEFAULT_STEP))?,
                };
                Ok(fv[i].scalar_product(&dv) * vmesh.weight(i))
            })
            .collect::<Result<_>>()?;
        let pairing = pairwise_sum(&terms).abs().to_f64_lossy();
        let vn = sobolev_norm(v, vmesh, 1, q, T::lit(DEFAULT_STEP))?.value;
        if vn > 0.0 {
            let r = pairing / vn;
            parts.push((v.name().to_string(), r));
            best = best.max(r);
        }
    }
    Ok(NormReport {
        value: best,
        spec,
        resolution: vmesh.resolution(),
        nodes: vmesh.len(),
        diagonal_exclusion_count: None,
        lower_bound: true,
        parts,
    })
}

/// Lower bound for `sup_{x≠y} |u(x)−u(y)|/|x−y|^λ + sup |u|`: all pairs of
/// cell centres, plus `sample_pairs` random pairs drawn from a seeded pool
/// of random interior points.
pub fn holder_norm<T: Real>(
    u: &CliffordField<T>,
    vmesh: &VolumeMesh<T>,
    lambda_h: f64,
    sample_pairs: usize,
    seed: u64,
) -> Result<NormReport> {
    let spec = NormSpec::Holder { lambda_h, sample_pairs, seed };
    spec.validate()?;
    let n = vmesh.dim();
    let domain = vmesh.domain();
    let mut pts: Vec<Point<T>> = vmesh.centers().map(Point::from_slice).collect();
    let cells = pts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = if sample_pairs > 0 { 256.min(2 * sample_pairs).max(2) } else { 0 };
    let c = domain.centroid();
    let half = domain.diameter() * T::lit(0.5);
    while pts.len() < cells + pool {
        let p: Point<T> = (0..n).map(|j| c[j] + half * T::lit(rng.gen_range(-1.0..1.0))).collect();
        if domain.contains(&p) {
            pts.push(p);
        }
    }
    let vals: Vec<Multivector<T>> = {
        let mut v = u.values_at(vmesh.key(), vmesh.centers())?;
        let extra: Vec<Multivector<T>> = pts[cells..].par_iter().map(|p| u.eval(p)).collect::<Result<_>>()?;
        v.extend(extra);
        v
    };
    let lam = T::lit(lambda_h);
    let quotient = |i: usize, j: usize| {
        let d2 = pts[i].iter().zip(&pts[j]).fold(T::zero(), |a, (&x, &y)| a + (x - y) * (x - y));
        if d2.is_zero() {
            return T::zero();
        }
        (vals[i].clone() - &vals[j]).norm() / d2.sqrt().powf(lam)
    };
    let cell_sup = (0..cells)
        .into_par_iter()
        .map(|i| ((i + 1)..cells).fold(T::zero(), |m, j| m.max(quotient(i, j))))
        .reduce(T::zero, |a, b| a.max(b));
    let mut random_sup = T::zero();
    for _ in 0..sample_pairs {
        let i = cells + rng.gen_range(0..pool);
        let j = cells + rng.gen_range(0..pool);
        random_sup = random_sup.max(quotient(i, j));
    }
    let semi = cell_sup.max(random_sup);
    let sup = vals.iter().fold(T::zero(), |m, v| m.max(v.norm()));
    Ok(NormReport {
        value: (semi + sup).to_f64_lossy(),
        spec,
        resolution: vmesh.resolution(),
        nodes: pts.len(),
        diagonal_exclusion_count: None,
        lower_bound: true,
        parts: vec![("seminorm".into(), semi.to_f64_lossy()), ("sup".into(), sup.to_f64_lossy())],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::named_field;
    use std::f64::consts::PI;

    type Mv = Multivector<f64>;

    fn disk(res: usize) -> VolumeMesh<f64> {
        VolumeMesh::new(&Domain::unit_disk(), res).unwrap()
    }

    #[test]
    fn sobolev_examples() {
        let v = disk(32);
        let one = CliffordField::constant(Mv::one(2));
        let r = sobolev_norm(&one, &v, 0, 2.0, 1e-3).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-12);
        let r = sobolev_norm(&one, &v, 1, 2.0, 1e-3).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-12);
        let b = VolumeMesh::new(&Domain::unit_box(2), 64).unwrap();
        let x1 = CliffordField::closed_form("x1", 2, |x: &[f64]| Mv::scalar(2, x[0])).with_support(Domain::unit_box(2));
        let r = sobolev_norm(&x1, &b, 1, 2.0, 1e-3).unwrap();
        // midpoint rule for ∫x² is exact up to h²/12
        assert!((r.value - (1.0f64 / 3.0 + 1.0).sqrt()).abs() < 1e-4, "{}", r.value);
    }

    #[test]
    fn slobodeckij_of_constant_is_zero() {
        let b = BoundaryMesh::new(&Domain::unit_disk(), 64).unwrap();
        let c = CliffordField::constant(Mv::e(2, 1) * 2.5);
        let r = slobodeckij_norm(&c, &b, 0.5, 2.0, SlobodeckijForm::Seminorm).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.diagonal_exclusion_count, Some(64));
        assert!(slobodeckij_norm(&c, &b, 1.0, 2.0, SlobodeckijForm::Seminorm).is_err());
    }

    #[test]
    fn slobodeckij_scales() {
        let b = BoundaryMesh::new(&Domain::unit_disk(), 128).unwrap();
        let g = CliffordField::closed_form("cos", 2, |x: &[f64]| Mv::scalar(2, x[0]));
        let a = slobodeckij_norm(&g, &b, 0.5, 2.0, SlobodeckijForm::Seminorm).unwrap().value;
        let s = slobodeckij_norm(&g.scaled(-3.0), &b, 0.5, 2.0, SlobodeckijForm::Seminorm).unwrap().value;
        assert!((s - 3.0 * a).abs() < 1e-12 * s);
        let semi = slobodeckij_norm(&g, &b, 1.5, 2.0, SlobodeckijForm::Seminorm).unwrap();
        let full = slobodeckij_norm(&g, &b, 1.5, 2.0, SlobodeckijForm::Full).unwrap();
        assert_eq!(full.parts.len(), 2);
        assert!(full.value > semi.value);
    }

    #[test]
    fn holder_examples() {
        let v = disk(32);
        let c = CliffordField::constant(Mv::e(2, 2) * 2.0);
        let r = holder_norm(&c, &v, 0.5, 1000, 1).unwrap();
        assert!((r.value - 2.0).abs() < 1e-15);
        let x1 = CliffordField::closed_form("x1", 2, |x: &[f64]| Mv::scalar(2, x[0]));
        let r = holder_norm(&x1, &v, 0.5, 10_000, 1).unwrap();
        let semi = r.parts[0].1;
        assert!(semi <= 2f64.sqrt() + 1e-12 && semi > 0.98 * 2f64.sqrt(), "{semi}");
    }

    #[test]
    fn dual_bound_examples() {
        let v = disk(32);
        let d = Domain::unit_disk();
        let margin = 2.0 * v.max_diameter();
        let fam = default_test_family(&d, margin).unwrap();
        assert_eq!(fam.len(), 12);
        let zero = CliffordField::zero(2);
        assert_eq!(dual_norm_lower_bound(&zero, &v, 2.0, &fam).unwrap().value, 0.0);
        let f = CliffordField::closed_form("x1", 2, |x: &[f64]| Mv::scalar(2, x[0]));
        let lb = dual_norm_lower_bound(&f, &v, 2.0, &fam).unwrap().value;
        let lp = sobolev_norm(&f, &v, 0, 2.0, 1e-3).unwrap().value;
        assert!(lb > 0.0 && lb <= lp, "{lb} {lp}");
        assert!(dual_norm_lower_bound(&f, &v, 2.0, &[]).is_err());
    }

    #[test]
    fn test_functions_have_consistent_derivatives() {
        for d in [Domain::<f64>::unit_disk(), Domain::unit_box(2), Domain::unit_ball()] {
            let fam = default_test_family(&d, 0.05).unwrap();
            let x: Vec<f64> = d.centroid().iter().map(|c| c + 0.13).collect();
            for f in &fam {
                let a = f.analytic_dirac(&x).unwrap();
                let b = crate::field::dirac_apply_fd(f, &x, 1e-5).unwrap();
                assert!((a - b).max_abs() < 1e-6, "{}", f.name());
            }
        }
    }

    #[test]
    fn sobolev_truncation_is_monotone() {
        let v = disk(16);
        let f = named_field::<f64>("exp_trig", 2).unwrap();
        let sums = sobolev_order_sums(&f, &v, 3, 2.0, 1e-3).unwrap();
        assert!(sums.windows(2).all(|w| w[0] <= w[1]));
    }
}
