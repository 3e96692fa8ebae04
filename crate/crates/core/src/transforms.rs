//! The fundamental solution `ψ(x) = x̄ / (ω_n ‖x‖^n)` and the integral
//! transforms built on it.
//!
//! Conventions: `ζf(x) = ∫_Ω ψ(x−y) f(y) dy` and
//! `ξg(x) = ∫_∂Ω ψ(y−x) ν(y) g(y) dσ_y`. With these, `D ζf = f` in Ω and
//! `f = ξ τf + ζ Df` (Borel–Pompeiu).
//!
//! Volume quadrature splits the kernel with a smooth cutoff `χ(‖y−x‖/ρ)`:
//! `(1−χ)ψ` goes through the cell midpoint rule and `χψ` through a polar or
//! spherical rule centred at `x`, where the Jacobian cancels the singularity.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::clifford::{embed_vector, Multivector};
use crate::error::{point_f64, Error, Result};
use crate::field::{tangential_gradient, trace_extract, CliffordField, FieldFn};
use crate::mesh::{BoundaryMesh, Domain, Point, VolumeMesh};
use crate::real::Real;

/// `ω_n = 2π^{n/2} / Γ(n/2)`, the area of the unit sphere in `R^n`.
pub fn unit_sphere_area<T: Real>(n: usize) -> T {
    assert!(n >= 1, "dimension must be positive");
    // Γ(n/2) by the recurrence Γ(s+1) = sΓ(s) from Γ(1) = 1 or Γ(1/2) = √π
    let pi = std::f64::consts::PI;
    let (mut s, mut gamma) = if n % 2 == 0 { (1.0, 1.0) } else { (0.5, pi.sqrt()) };
    while s < n as f64 / 2.0 {
        gamma *= s;
        s += 1.0;
    }
    T::lit(2.0 * pi.powf(n as f64 / 2.0) / gamma)
}

/// `ψ(x) = x̄ / (ω_n ‖x‖^n)`.
pub fn fundamental_solution<T: Real>(x: &[T]) -> Result<Multivector<T>> {
    let n = x.len();
    let r = crate::real::norm2(x);
    if r.is_zero() {
        return Err(Error::Singularity);
    }
    let scale = -T::one() / (unit_sphere_area::<T>(n) * r.powi(n as i32));
    Ok(embed_vector(x) * scale)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..(m + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp;
        loop {
            let (mut p1, mut p2) = (1.0, 0.0);
            for k in 1..=m {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * k - 1) as f64 * z * p2 - (k - 1) as f64 * p3) / k as f64;
            }
            dp = m as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    #[default]
    Midpoint,
}

/// Quadrature parameters shared by both transforms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformConfig {
    /// Near-field radius `ρ = s · h^γ · R^{1−γ}`: this is `s`, with `h` the
    /// local cell diameter and `R` the inradius of Ω.
    pub singular_split_radius: f64,
    /// `γ ∈ (0, 1]`; below 1 the near field spans more cells as the mesh
    /// refines, so the midpoint error of the split kernel keeps shrinking.
    pub split_exponent: f64,
    /// `ε`: inward trace offset, and the distance below which an
    /// uncorrected Cauchy evaluation is flagged near-singular.
    pub near_boundary_offset: f64,
    pub quadrature: Quadrature,
    /// Gauss–Legendre points along each ray of the near-field rule.
    pub radial_points: usize,
    /// Directions of the near-field rule (azimuthal count in 3D).
    pub angular_points: usize,
    /// Gauss–Legendre points in `cos θ` (3D only).
    pub polar_points: usize,
    /// Angular refinement factor when the near ball meets ∂Ω.
    pub clipped_refinement: usize,
    /// Cauchy evaluations closer to ∂Ω than this many panel diameters
    /// subtract a local monogenic model of the data.
    pub correction_panels: f64,
    /// Step for tangential derivatives of boundary data.
    pub tangential_step: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            singular_split_radius: 2.0,
            split_exponent: 0.5,
            near_boundary_offset: 1e-3,
            quadrature: Quadrature::Midpoint,
            radial_points: 6,
            angular_points: 16,
            polar_points: 8,
            clipped_refinement: 4,
            correction_panels: 4.0,
            tangential_step: 1e-4,
        }
    }
}

impl TransformConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.singular_split_radius >= 1.0) {
            return bad(format!("singular_split_radius {} < 1 cell diameter", self.singular_split_radius));
        }
        if !(self.split_exponent > 0.0 && self.split_exponent <= 1.0) {
            return bad(format!("split_exponent {} outside (0, 1]", self.split_exponent));
        }
        if !(self.near_boundary_offset > 0.0) {
            return bad(format!("near_boundary_offset {} must be positive", self.near_boundary_offset));
        }
        if self.radial_points == 0 || self.angular_points < 4 || self.polar_points == 0 || self.clipped_refinement == 0 {
            return bad("near-field rule needs radial_points ≥ 1, angular_points ≥ 4, polar_points ≥ 1".into());
        }
        if !(self.correction_panels >= 0.0) || !(self.tangential_step > 0.0) {
            return bad("correction_panels must be ≥ 0 and tangential_step > 0".into());
        }
        Ok(())
    }
}

/// Blend `P(t) = 6t² − 8t³ + 3t⁴`, `t = s²`, so `1 − χ(s) = P(s²)`:
/// `O(s⁴)` at the origin and `C²` contact with 1 at `s = 1`.
fn far_weight<T: Real>(s: T) -> T {
    if s >= T::one() {
        return T::one();
    }
    let t = s * s;
    t * t * (T::lit(6.0) - T::lit(8.0) * t + T::lit(3.0) * t * t)
}

fn near_weight<T: Real>(s: T) -> T {
    T::one() - far_weight(s)
}

/// Unit directions and weights of a rule on `S^{n−1}`.
#[derive(Clone, Debug)]
struct SphereRule<T> {
    dirs: Vec<Point<T>>,
    weights: Vec<T>,
}

impl<T: Real> SphereRule<T> {
    fn new(n: usize, angular: usize, polar: usize) -> Self {
        let mut dirs = Vec::new();
        let mut weights = Vec::new();
        let tau = std::f64::consts::TAU;
        match n {
            2 => {
                for k in 0..angular {
                    let t = tau * (k as f64 + 0.5) / angular as f64;
                    dirs.push(SmallVec::from_slice(&[T::lit(t.cos()), T::lit(t.sin())]));
                    weights.push(T::lit(tau / angular as f64));
                }
            }
            3 => {
                let (z, wz) = gauss_legendre(polar);
                for (&c, &wc) in z.iter().zip(&wz) {
                    let s = (1.0 - c * c).sqrt();
                    for k in 0..angular {
                        let p = tau * (k as f64 + 0.5) / angular as f64;
                        dirs.push(SmallVec::from_slice(&[T::lit(s * p.cos()), T::lit(s * p.sin()), T::lit(c)]));
                        weights.push(T::lit(wc * tau / angular as f64));
                    }
                }
            }
            _ => panic!("sphere rule only for n = 2, 3"),
        }
        SphereRule { dirs, weights }
    }
}

#[derive(Clone, Debug)]
struct NearRule<T> {
    open: SphereRule<T>,
    clipped: SphereRule<T>,
    radial: (Vec<T>, Vec<T>),
}

impl<T: Real> NearRule<T> {
    fn new(n: usize, cfg: &TransformConfig) -> Self {
        let (x, w) = gauss_legendre(cfg.radial_points);
        let f = cfg.clipped_refinement;
        NearRule {
            open: SphereRule::new(n, cfg.angular_points, cfg.polar_points),
            clipped: SphereRule::new(n, cfg.angular_points * f, cfg.polar_points * f),
            // mapped to [0, 1]
            radial: (
                x.iter().map(|&t| T::lit(0.5 * (t + 1.0))).collect(),
                w.iter().map(|&t| T::lit(0.5 * t)).collect(),
            ),
        }
    }
}

fn nan_mv<T: Real>(n: usize) -> Multivector<T> {
    Multivector::zero(n).map(|_| T::nan())
}

/// `Σ_j e_j M_j` for the `n` blocks of a flat accumulator.
fn assemble<T: Real>(n: usize, acc: &[T]) -> Multivector<T> {
    let len = 1usize << n;
    let mut out = Multivector::zero(n);
    let mut e = [T::zero(); 3];
    for j in 0..n {
        let m = Multivector::from_coeffs(n, &acc[j * len..(j + 1) * len]).expect("block length");
        e[j] = T::one();
        out += &m.left_mul_vector(&e[..n]);
        e[j] = T::zero();
    }
    out
}

/// Teodorescu transform of a fixed field on a fixed volume mesh; the field
/// is sampled once at the cell centres.
pub struct TeodorescuOperator<T: Real> {
    field: CliffordField<T>,
    mesh: Arc<VolumeMesh<T>>,
    values: Vec<T>,
    cfg: TransformConfig,
    rule: NearRule<T>,
    omega: T,
    inradius: T,
}

impl<T: Real> TeodorescuOperator<T> {
    pub fn new(f: &CliffordField<T>, mesh: Arc<VolumeMesh<T>>, cfg: &TransformConfig) -> Result<Self> {
        cfg.validate()?;
        let n = mesh.dim();
        if f.dim() != n {
            return Err(Error::DimensionMismatch { left: n, right: f.dim() });
        }
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedDomain(format!("teodorescu in dimension {n}")));
        }
        let vals = f.values_at(mesh.key(), mesh.centers())?;
        let values = vals.iter().flat_map(|v| v.coeffs().iter().copied()).collect();
        Ok(TeodorescuOperator {
            field: f.clone(),
            rule: NearRule::new(n, cfg),
            omega: unit_sphere_area(n),
            inradius: mesh.domain().inradius(),
            mesh,
            values,
            cfg: cfg.clone(),
        })
    }

    pub fn mesh(&self) -> &Arc<VolumeMesh<T>> {
        &self.mesh
    }

    pub fn config(&self) -> &TransformConfig {
        &self.cfg
    }

    /// Near-field radius at `x`.
    pub fn split_radius(&self, x: &[T]) -> T {
        let h = self.mesh.local_diameter(x);
        let g = T::lit(self.cfg.split_exponent);
        let rho = T::lit(self.cfg.singular_split_radius) * h.powf(g) * self.inradius.powf(T::one() - g);
        rho.max(h)
    }

    /// `ζf(x)` for `x ∈ Ω`.
    pub fn eval(&self, x: &[T]) -> Result<Multivector<T>> {
        let n = self.mesh.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { left: n, right: x.len() });
        }
        let domain = self.mesh.domain();
        if !domain.contains(x) {
            return Err(Error::OutOfDomain { point: point_f64(x) });
        }
        let rho = self.split_radius(x);
        let len = 1usize << n;
        let mut acc = vec![T::zero(); n * len];
        let inv_omega = T::one() / self.omega;

        // far field: (y − x) (1−χ) / (ω r^n) f(y)
        for (c, (w, f)) in self.mesh.centers().zip(self.mesh.weights().iter().zip(self.values.chunks_exact(len))) {
            let mut d = [T::zero(); 3];
            let mut r2 = T::zero();
            for j in 0..n {
                d[j] = c[j] - x[j];
                r2 += d[j] * d[j];
            }
            if r2.is_zero() {
                continue;
            }
            let r = r2.sqrt();
            let s = *w * far_weight(r / rho) * inv_omega / r.powi(n as i32);
            if s.is_zero() {
                continue;
            }
            for j in 0..n {
                let sj = s * d[j];
                for (a, &fv) in acc[j * len..(j + 1) * len].iter_mut().zip(f) {
                    *a += sj * fv;
                }
            }
        }

        // near field in polar coordinates about x
        let clipped = domain.signed_distance(x) < rho;
        let sphere = if clipped { &self.rule.clipped } else { &self.rule.open };
        let mut p: Point<T> = SmallVec::from_slice(x);
        for (dir, &wd) in sphere.dirs.iter().zip(&sphere.weights) {
            let reach = rho.min(domain.ray_exit(x, dir));
            if !(reach > T::zero()) {
                continue;
            }
            let mut ray = Multivector::zero(n);
            for (&t, &wt) in self.rule.radial.0.iter().zip(&self.rule.radial.1) {
                let r = t * reach;
                for j in 0..n {
                    p[j] = x[j] + r * dir[j];
                }
                let fv = self.field.eval(&p)?;
                ray.axpy(wt * reach * near_weight(r / rho), &fv);
            }
            let s = wd * inv_omega;
            for j in 0..n {
                let sj = s * dir[j];
                for (a, &fv) in acc[j * len..(j + 1) * len].iter_mut().zip(ray.coeffs()) {
                    *a += sj * fv;
                }
            }
        }
        Ok(assemble(n, &acc))
    }

    pub fn eval_many(&self, xs: &[Point<T>]) -> Result<Vec<Multivector<T>>> {
        xs.par_iter().map(|x| self.eval(x)).collect()
    }

    /// `ζf` sampled at every cell centre, evaluable elsewhere in Ω.
    pub fn materialize(self: &Arc<Self>) -> Result<CliffordField<T>> {
        let centers: Vec<&[T]> = self.mesh.centers().collect();
        let values: Vec<Multivector<T>> = centers.par_iter().map(|c| self.eval(c)).collect::<Result<_>>()?;
        let op = Arc::clone(self);
        let fallback: FieldFn<T> = Arc::new(move |x: &[T]| op.eval(x).unwrap_or_else(|_| nan_mv(x.len())));
        Ok(CliffordField::sampled(format!("zeta({})", self.field.name()), self.mesh.dim(), self.mesh.key(), values)?
            .with_fallback(fallback)
            .with_support(self.mesh.domain().clone()))
    }
}

/// One Cauchy evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyValue<T: Real> {
    pub value: Multivector<T>,
    /// Closer to ∂Ω than `ε` with no near-boundary correction applied.
    pub near_singular: bool,
    /// A local monogenic model was subtracted.
    pub corrected: bool,
}

/// Cauchy transform of fixed boundary data on a fixed boundary mesh.
pub struct CauchyOperator<T: Real> {
    data: CliffordField<T>,
    mesh: Arc<BoundaryMesh<T>>,
    /// `ν_i g_i`, flat.
    nu_g: Vec<T>,
    cfg: TransformConfig,
    omega: T,
}

impl<T: Real> CauchyOperator<T> {
    pub fn new(g: &CliffordField<T>, mesh: Arc<BoundaryMesh<T>>, cfg: &TransformConfig) -> Result<Self> {
        cfg.validate()?;
        let n = mesh.dim();
        if g.dim() != n {
            return Err(Error::DimensionMismatch { left: n, right: g.dim() });
        }
        let vals = g.values_at(mesh.key(), mesh.centers())?;
        let nu_g = vals
            .iter()
            .enumerate()
            .flat_map(|(i, v)| v.left_mul_vector(mesh.normal(i)).coeffs().to_vec())
            .collect();
        Ok(CauchyOperator { data: g.clone(), mesh, nu_g, cfg: cfg.clone(), omega: unit_sphere_area(n) })
    }

    pub fn mesh(&self) -> &Arc<BoundaryMesh<T>> {
        &self.mesh
    }

    /// `-Σ_j e_j Σ_i a_i (y_i − x)_j / (ω r^n) h_i` for panel values `h_i`.
    fn sum_with(&self, x: &[T], h: impl Fn(usize) -> SmallVec<[T; 8]>) -> Multivector<T> {
        let n = self.mesh.dim();
        let len = 1usize << n;
        let mut acc = vec![T::zero(); n * len];
        let inv_omega = T::one() / self.omega;
        for i in 0..self.mesh.len() {
            let y = self.mesh.center(i);
            let mut d = [T::zero(); 3];
            let mut r2 = T::zero();
            for j in 0..n {
                d[j] = y[j] - x[j];
                r2 += d[j] * d[j];
            }
            let s = self.mesh.area(i) * inv_omega / r2.sqrt().powi(n as i32);
            let hv = h(i);
            for j in 0..n {
                let sj = s * d[j];
                for (a, &v) in acc[j * len..(j + 1) * len].iter_mut().zip(hv.iter()) {
                    *a += sj * v;
                }
            }
        }
        -assemble(n, &acc)
    }

    fn plain(&self, x: &[T]) -> Multivector<T> {
        let len = 1usize << self.mesh.dim();
        self.sum_with(x, |i| SmallVec::from_slice(&self.nu_g[i * len..(i + 1) * len]))
    }

    /// `ξ(g − m)(x) + [x ∈ Ω] m(x)` with `m` the monogenic linear model
    /// of `g` at the nearest boundary point.
    fn corrected(&self, x: &[T], interior: bool) -> Result<Multivector<T>> {
        let n = self.mesh.dim();
        let domain = self.mesh.domain();
        let (xs, nu) = domain.project(x);
        let g0 = self.data.eval(&xs)?;
        let grad = tangential_gradient(&self.data, domain, &xs, T::lit(self.cfg.tangential_step))?;
        // Σ_k e_k G_k
        let mut dg = Multivector::zero(n);
        let mut e = [T::zero(); 3];
        for (k, gk) in grad.iter().enumerate() {
            e[k] = T::one();
            dg += &gk.left_mul_vector(&e[..n]);
            e[k] = T::zero();
        }
        let b = dg.left_mul_vector(&nu);
        let a: SmallVec<[Multivector<T>; 3]> = grad.iter().zip(&nu).map(|(gj, &vj)| gj.clone() + &(b.clone() * vj)).collect();
        let model = |p: &[T]| {
            let mut m = g0.clone();
            for j in 0..n {
                m.axpy(p[j] - xs[j], &a[j]);
            }
            m
        };
        let len = 1usize << n;
        let rest = self.sum_with(x, |i| {
            let y = self.mesh.center(i);
            let gi = Multivector::from_coeffs(n, &self.nu_g[i * len..(i + 1) * len]).expect("block length");
            let mi = model(y).left_mul_vector(self.mesh.normal(i));
            SmallVec::from_slice((gi - &mi).coeffs())
        });
        Ok(if interior { rest + &model(x) } else { rest })
    }

    /// `ξg(x)` for `x ∉ ∂Ω`.
    pub fn eval_detailed(&self, x: &[T]) -> Result<CauchyValue<T>> {
        let n = self.mesh.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { left: n, right: x.len() });
        }
        let domain = self.mesh.domain();
        let sd = domain.signed_distance(x);
        let dist = sd.abs();
        if dist <= T::lit(1e-12) * domain.diameter() {
            return Err(Error::OnBoundary { point: point_f64(x) });
        }
        let plain = self.plain(x);
        let d0 = T::lit(self.cfg.correction_panels) * self.mesh.max_diameter();
        let eps = T::lit(self.cfg.near_boundary_offset);
        if dist < T::lit(2.0) * d0 && self.data.is_evaluable() {
            let corr = self.corrected(x, sd > T::zero())?;
            // weight 1 up to d0, smoothstep to 0 at 2 d0
            let t = ((dist - d0) / d0).max(T::zero()).min(T::one());
            let beta = T::one() - t * t * (T::lit(3.0) - T::lit(2.0) * t);
            return Ok(CauchyValue { value: corr * beta + &(plain * (T::one() - beta)), near_singular: false, corrected: true });
        }
        if dist < eps {
            log::debug!("near-singular Cauchy evaluation at distance {dist}");
        }
        Ok(CauchyValue { value: plain, near_singular: dist < eps, corrected: false })
    }

    pub fn eval(&self, x: &[T]) -> Result<Multivector<T>> {
        self.eval_detailed(x).map(|v| v.value)
    }

    pub fn eval_many(&self, xs: &[Point<T>]) -> Result<Vec<Multivector<T>>> {
        xs.par_iter().map(|x| self.eval(x)).collect()
    }

    /// `ξg` sampled at the cells of `vmesh` (evaluable elsewhere), and the
    /// number of near-singular cell evaluations.
    pub fn materialize(self: &Arc<Self>, vmesh: &VolumeMesh<T>) -> Result<(CliffordField<T>, usize)> {
        let centers: Vec<&[T]> = vmesh.centers().collect();
        let vals: Vec<CauchyValue<T>> = centers.par_iter().map(|c| self.eval_detailed(c)).collect::<Result<_>>()?;
        let flagged = vals.iter().filter(|v| v.near_singular).count();
        if flagged > 0 {
            log::warn!("{flagged} near-singular Cauchy evaluations while materializing on the volume mesh");
        }
        let op = Arc::clone(self);
        let fallback: FieldFn<T> = Arc::new(move |x: &[T]| op.eval(x).unwrap_or_else(|_| nan_mv(x.len())));
        let field = CliffordField::sampled(
            format!("xi({})", self.data.name()),
            vmesh.dim(),
            vmesh.key(),
            vals.into_iter().map(|v| v.value).collect(),
        )?
        .with_fallback(fallback)
        .with_support(vmesh.domain().clone());
        Ok((field, flagged))
    }
}

/// `ζ_Ω f(x)`.
pub fn teodorescu<T: Real>(f: &CliffordField<T>, vmesh: &VolumeMesh<T>, x: &[T], cfg: &TransformConfig) -> Result<Multivector<T>> {
    TeodorescuOperator::new(f, Arc::new(vmesh.clone()), cfg)?.eval(x)
}

/// `ξ_∂Ω g(x)`.
pub fn cauchy<T: Real>(g: &CliffordField<T>, bmesh: &BoundaryMesh<T>, x: &[T], cfg: &TransformConfig) -> Result<Multivector<T>> {
    CauchyOperator::new(g, Arc::new(bmesh.clone()), cfg)?.eval(x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BorelPompeiuReport {
    /// `‖f(x) − ξτf(x) − ζDf(x)‖` per point.
    pub residuals: Vec<f64>,
    pub residual_max: f64,
    pub residual_mean: f64,
    /// `max ‖f‖` over the sample points.
    pub f_sup: f64,
    /// `residual_max / f_sup`.
    pub relative_max: f64,
}

/// The pieces of the Borel–Pompeiu identity at each point.
#[derive(Clone, Debug)]
pub struct BorelPompeiuTerms<T: Real> {
    pub f: Multivector<T>,
    pub cauchy: Multivector<T>,
    pub teodorescu: Multivector<T>,
}

pub fn borel_pompeiu_terms<T: Real>(
    f: &CliffordField<T>,
    vmesh: &Arc<VolumeMesh<T>>,
    bmesh: &Arc<BoundaryMesh<T>>,
    points: &[Point<T>],
    cfg: &TransformConfig,
) -> Result<Vec<BorelPompeiuTerms<T>>> {
    if !f.has_analytic_dirac() {
        return Err(Error::InvalidArgument(format!("{} has no analytic Dirac derivative", f.name())));
    }
    let tf = trace_extract(f, bmesh, T::lit(cfg.near_boundary_offset))?;
    let g = f.clone();
    let df = CliffordField::closed_form(format!("D{}", f.name()), f.dim(), move |x: &[T]| {
        g.analytic_dirac(x).expect("analytic Dirac")
    });
    let xi = CauchyOperator::new(&tf, Arc::clone(bmesh), cfg)?;
    let zeta = TeodorescuOperator::new(&df, Arc::clone(vmesh), cfg)?;
    points
        .par_iter()
        .map(|x| {
            Ok(BorelPompeiuTerms { f: f.eval(x)?, cauchy: xi.eval(x)?, teodorescu: zeta.eval(x)? })
        })
        .collect()
}

/// Per-point `‖f − ξτf − ζDf‖` with max and mean.
pub fn borel_pompeiu_residual<T: Real>(
    f: &CliffordField<T>,
    vmesh: &Arc<VolumeMesh<T>>,
    bmesh: &Arc<BoundaryMesh<T>>,
    points: &[Point<T>],
    cfg: &TransformConfig,
) -> Result<BorelPompeiuReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    let terms = borel_pompeiu_terms(f, vmesh, bmesh, points, cfg)?;
    let residuals: Vec<f64> =
        terms.iter().map(|t| (t.f.clone() - &t.cauchy - &t.teodorescu).norm().to_f64_lossy()).collect();
    let f_sup = terms.iter().map(|t| t.f.norm().to_f64_lossy()).fold(0.0, f64::max);
    let residual_max = residuals.iter().copied().fold(0.0, f64::max);
    let residual_mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
    Ok(BorelPompeiuReport {
        relative_max: if f_sup > 0.0 { residual_max / f_sup } else { residual_max },
        residuals,
        residual_max,
        residual_mean,
        f_sup,
    })
}

/// `count` deterministic interior points at distance ≥ `margin` from ∂Ω.
pub fn interior_sample_points<T: Real>(domain: &Domain<T>, count: usize, margin: T, seed: u64) -> Vec<Point<T>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = domain.dim();
    let c = domain.centroid();
    let half = domain.diameter() * T::lit(0.5);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p: Point<T> = (0..n).map(|j| c[j] + half * T::lit(rng.gen_range(-1.0..1.0))).collect();
        if domain.signed_distance(&p) >= margin {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::dirac_apply_fd;
    use std::f64::consts::PI;

    type Mv = Multivector<f64>;

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area::<f64>(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area::<f64>(3) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area::<f64>(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_sphere_area::<f64>(1) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_exactness() {
        for m in 1..10 {
            let (x, w) = gauss_legendre(m);
            for deg in 0..(2 * m) {
                let q: f64 = x.iter().zip(&w).map(|(&t, &wt)| wt * t.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "m={m} deg={deg}");
            }
        }
    }

    #[test]
    fn psi_examples() {
        let p = fundamental_solution(&[1.0, 0.0]).unwrap();
        assert!((p - Mv::e(2, 1) * (-1.0 / (2.0 * PI))).max_abs() < 1e-15);
        let x = [0.3, -0.4, 0.5];
        let a = fundamental_solution(&x).unwrap();
        let b = fundamental_solution(&[0.6, -0.8, 1.0]).unwrap();
        assert!((b - a * 0.25).max_abs() < 1e-15);
        assert_eq!(fundamental_solution(&[0.0, 0.0]), Err(Error::Singularity));
        let f = CliffordField::closed_form("psi", 2, |x: &[f64]| fundamental_solution(x).unwrap());
        assert!(dirac_apply_fd(&f, &[0.6, 0.8], 1e-4).unwrap().max_abs() < 1e-6);
    }

    #[test]
    fn blend_is_partition() {
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            assert!((far_weight(s) + near_weight(s) - 1.0).abs() < 1e-15);
        }
        assert_eq!(far_weight(1.0), 1.0);
        assert!(far_weight(0.999_999f64) > 0.999_999);
    }

    fn disk(res: usize) -> (Arc<VolumeMesh<f64>>, Arc<BoundaryMesh<f64>>) {
        let d = Domain::unit_disk();
        (Arc::new(VolumeMesh::new(&d, res).unwrap()), Arc::new(BoundaryMesh::new(&d, 4 * res).unwrap()))
    }

    #[test]
    fn teodorescu_of_one_at_origin_vanishes() {
        let (v, _) = disk(32);
        let one = CliffordField::constant(Mv::one(2));
        let z = teodorescu(&one, &v, &[0.0, 0.0], &TransformConfig::default()).unwrap();
        assert!(z.max_abs() < 1e-12);
    }

    #[test]
    fn teodorescu_of_one_matches_closed_form() {
        // ζ1(x) = −x/2 on the unit disk
        let (v, _) = disk(64);
        let one = CliffordField::constant(Mv::one(2));
        let z = teodorescu(&one, &v, &[0.3, 0.0], &TransformConfig::default()).unwrap();
        assert!((z.clone() + Mv::e(2, 1) * 0.15).max_abs() < 1e-4, "{z}");
        assert!(matches!(
            teodorescu(&one, &v, &[1.2, 0.0], &TransformConfig::default()),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn cauchy_of_one() {
        let (_, b) = disk(64);
        let one = CliffordField::constant(Mv::one(2));
        let cfg = TransformConfig::default();
        assert!((cauchy(&one, &b, &[0.0, 0.0], &cfg).unwrap() - Mv::one(2)).max_abs() < 1e-12);
        assert!(cauchy(&one, &b, &[2.0, 0.0], &cfg).unwrap().max_abs() < 1e-3);
        assert!(matches!(cauchy(&one, &b, &[1.0, 0.0], &cfg), Err(Error::OnBoundary { .. })));
    }

    #[test]
    fn sample_points_respect_margin() {
        let d = Domain::<f64>::unit_disk();
        let pts = interior_sample_points(&d, 20, 0.1, 7);
        assert_eq!(pts.len(), 20);
        assert!(pts.iter().all(|p| d.signed_distance(p) >= 0.1));
        assert_eq!(pts, interior_sample_points(&d, 20, 0.1, 7));
    }
}
