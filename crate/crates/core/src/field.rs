//! Clifford-valued fields and the differential operators acting on them.
//!
//! Derivatives are finite differences with stencils from Fornberg's weight
//! recursion. The multi-index derivative `∂^α` used by the Sobolev and
//! Slobodeckij norms is the coordinate partial derivative, not a power of the
//! Dirac operator.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use smallvec::SmallVec;

use crate::clifford::{Multivector, MAX_DIM};
use crate::error::{point_f64, Error, Result};
use crate::mesh::{BoundaryMesh, Domain, MeshKey, Point};
use crate::real::Real;

/// Closed-form evaluator `R^n → Cl_n`.
pub type FieldFn<T> = Arc<dyn Fn(&[T]) -> Multivector<T> + Send + Sync>;

#[derive(Clone)]
pub enum FieldRepr<T> {
    ClosedForm { eval: FieldFn<T>, dirac: Option<FieldFn<T>> },
    /// One value per node of the mesh identified by `key`. `fallback`, when
    /// present, evaluates the same field anywhere else.
    Sampled { key: MeshKey, values: Arc<[Multivector<T>]>, fallback: Option<FieldFn<T>> },
}

/// A `Cl_n`-valued function `f = Σ_A e_A f_A`.
#[derive(Clone)]
pub struct CliffordField<T> {
    name: String,
    dim: usize,
    repr: FieldRepr<T>,
    support: Option<Arc<Domain<T>>>,
}

impl<T: Real> fmt::Debug for CliffordField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            FieldRepr::ClosedForm { .. } => "closed-form",
            FieldRepr::Sampled { .. } => "sampled",
        };
        write!(f, "CliffordField({}, Cl_{}, {kind})", self.name, self.dim)
    }
}

impl<T: Real> CliffordField<T> {
    pub fn closed_form<F>(name: impl Into<String>, dim: usize, f: F) -> Self
    where
        F: Fn(&[T]) -> Multivector<T> + Send + Sync + 'static,
    {
        CliffordField {
            name: name.into(),
            dim,
            repr: FieldRepr::ClosedForm { eval: Arc::new(f), dirac: None },
            support: None,
        }
    }

    pub fn sampled(name: impl Into<String>, dim: usize, key: MeshKey, values: Vec<Multivector<T>>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: v.dim() });
        }
        Ok(CliffordField {
            name: name.into(),
            dim,
            repr: FieldRepr::Sampled { key, values: values.into(), fallback: None },
            support: None,
        })
    }

    /// Constant field.
    pub fn constant(c: Multivector<T>) -> Self {
        let dim = c.dim();
        let zero = Multivector::zero(dim);
        CliffordField::closed_form(format!("const({c})"), dim, move |_| c.clone()).with_dirac(move |_| zero.clone())
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(Multivector::zero(dim))
    }

    /// Attaches an analytic Dirac derivative `Df`.
    pub fn with_dirac<F>(mut self, d: F) -> Self
    where
        F: Fn(&[T]) -> Multivector<T> + Send + Sync + 'static,
    {
        if let FieldRepr::ClosedForm { dirac, .. } = &mut self.repr {
            *dirac = Some(Arc::new(d));
        }
        self
    }

    /// Off-node evaluator for a sampled field.
    pub fn with_fallback(mut self, f: FieldFn<T>) -> Self {
        if let FieldRepr::Sampled { fallback, .. } = &mut self.repr {
            *fallback = Some(f);
        }
        self
    }

    /// Restricts evaluation to the closure of `domain`.
    pub fn with_support(mut self, domain: Domain<T>) -> Self {
        self.support = Some(Arc::new(domain));
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn repr(&self) -> &FieldRepr<T> {
        &self.repr
    }

    pub fn support(&self) -> Option<&Domain<T>> {
        self.support.as_deref()
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.repr, FieldRepr::ClosedForm { .. })
    }

    /// Whether `eval` works away from sample nodes.
    pub fn is_evaluable(&self) -> bool {
        match &self.repr {
            FieldRepr::ClosedForm { .. } => true,
            FieldRepr::Sampled { fallback, .. } => fallback.is_some(),
        }
    }

    pub fn has_analytic_dirac(&self) -> bool {
        matches!(self.repr, FieldRepr::ClosedForm { dirac: Some(_), .. })
    }

    /// Whether `x` lies in the closed support (always true without one).
    pub fn admits(&self, x: &[T]) -> bool {
        match &self.support {
            None => true,
            Some(d) => d.signed_distance(x) >= -T::lit(1e-10) * d.diameter(),
        }
    }

    fn admits_strictly(&self, x: &[T]) -> bool {
        match &self.support {
            None => true,
            Some(d) => d.contains(x),
        }
    }

    pub fn eval(&self, x: &[T]) -> Result<Multivector<T>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: x.len() });
        }
        if !self.admits(x) {
            return Err(Error::OutOfDomain { point: point_f64(x) });
        }
        match &self.repr {
            FieldRepr::ClosedForm { eval, .. } => Ok(eval(x)),
            FieldRepr::Sampled { fallback: Some(f), .. } => Ok(f(x)),
            FieldRepr::Sampled { fallback: None, .. } => Err(Error::NotEvaluable(self.name.clone())),
        }
    }

    /// Analytic `Df(x)` when the field carries one.
    pub fn analytic_dirac(&self, x: &[T]) -> Option<Multivector<T>> {
        match &self.repr {
            FieldRepr::ClosedForm { dirac: Some(d), .. } => Some(d(x)),
            _ => None,
        }
    }

    /// Values at a node set: reuses samples when `key` matches, otherwise
    /// evaluates at each point in parallel.
    pub fn values_at<'a, I>(&self, key: MeshKey, points: I) -> Result<Vec<Multivector<T>>>
    where
        I: IntoIterator<Item = &'a [T]>,
    {
        if let FieldRepr::Sampled { key: k, values, .. } = &self.repr {
            if *k == key {
                return Ok(values.to_vec());
            }
        }
        let pts: Vec<&[T]> = points.into_iter().collect();
        pts.par_iter().map(|x| self.eval(x)).collect()
    }

    /// The sampled values, when this field was sampled on the mesh `key`.
    pub fn samples_for(&self, key: MeshKey) -> Option<&[Multivector<T>]> {
        match &self.repr {
            FieldRepr::Sampled { key: k, values, .. } if *k == key => Some(values),
            _ => None,
        }
    }

    /// `c * f` (scalar multiple), keeping the representation.
    pub fn scaled(&self, c: T) -> Self {
        let repr = match &self.repr {
            FieldRepr::ClosedForm { eval, dirac } => {
                let e = eval.clone();
                let d = dirac.clone();
                FieldRepr::ClosedForm {
                    eval: Arc::new(move |x: &[T]| e(x) * c),
                    dirac: d.map(|d| Arc::new(move |x: &[T]| d(x) * c) as FieldFn<T>),
                }
            }
            FieldRepr::Sampled { key, values, fallback } => FieldRepr::Sampled {
                key: *key,
                values: values.iter().map(|v| v * c).collect(),
                fallback: fallback.clone().map(|f| Arc::new(move |x: &[T]| f(x) * c) as FieldFn<T>),
            },
        };
        CliffordField { name: format!("{}*{}", c, self.name), dim: self.dim, repr, support: self.support.clone() }
    }

    /// Pointwise sum.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let name = format!("({}+{})", self.name, other.name);
        let support = self.support.clone().or_else(|| other.support.clone());
        let repr = match (&self.repr, &other.repr) {
            (FieldRepr::ClosedForm { eval: a, dirac: da }, FieldRepr::ClosedForm { eval: b, dirac: db }) => {
                let (a, b) = (a.clone(), b.clone());
                let dirac = match (da.clone(), db.clone()) {
                    (Some(da), Some(db)) => Some(Arc::new(move |x: &[T]| da(x) + db(x)) as FieldFn<T>),
                    _ => None,
                };
                FieldRepr::ClosedForm { eval: Arc::new(move |x: &[T]| a(x) + b(x)), dirac }
            }
            (
                FieldRepr::Sampled { key: ka, values: va, fallback: fa },
                FieldRepr::Sampled { key: kb, values: vb, fallback: fb },
            ) if ka == kb => FieldRepr::Sampled {
                key: *ka,
                values: va.iter().zip(vb.iter()).map(|(a, b)| a + b).collect(),
                fallback: match (fa.clone(), fb.clone()) {
                    (Some(a), Some(b)) => Some(Arc::new(move |x: &[T]| a(x) + b(x)) as FieldFn<T>),
                    _ => None,
                },
            },
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "cannot add {} and {}: incompatible representations",
                    self.name, other.name
                )))
            }
        };
        Ok(CliffordField { name, dim: self.dim, repr, support })
    }
}

/// Multi-index `α` with `‖α‖ = Σ α_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    orders: SmallVec<[u8; 3]>,
}

impl MultiIndex {
    pub fn new(orders: &[u8]) -> Self {
        MultiIndex { orders: SmallVec::from_slice(orders) }
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex { orders: SmallVec::from_elem(0, n) }
    }

    /// First-order index along coordinate `j` (0-based).
    pub fn unit(n: usize, j: usize) -> Self {
        let mut m = Self::zero(n);
        m.orders[j] = 1;
        m
    }

    pub fn orders(&self) -> &[u8] {
        &self.orders
    }

    pub fn dim(&self) -> usize {
        self.orders.len()
    }

    pub fn total(&self) -> usize {
        self.orders.iter().map(|&o| o as usize).sum()
    }

    /// All `α` with `‖α‖ = k`, lexicographically descending in `α_1`.
    pub fn exactly(n: usize, k: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
            if cur.len() + 1 == n {
                cur.push(left as u8);
                out.push(MultiIndex::new(cur));
                cur.pop();
                return;
            }
            for a in (0..=left).rev() {
                cur.push(a as u8);
                rec(n, left - a, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, k, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// All `α` with `‖α‖ ≤ k`, graded.
    pub fn up_to(n: usize, k: usize) -> Vec<MultiIndex> {
        (0..=k).flat_map(|m| Self::exactly(n, m)).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orders.iter().map(|o| o.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Fornberg weights for the `m`-th derivative at 0 on the given offsets
/// (unit spacing).
pub fn fd_weights(offsets: &[f64], m: usize) -> Vec<f64> {
    let n = offsets.len();
    assert!(n > m, "need more than {m} points");
    let mut c = vec![vec![0.0; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Stencil layout along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StencilSide {
    Central,
    Forward,
    Backward,
}

fn stencil(order: usize, side: StencilSide) -> (Vec<f64>, Vec<f64>) {
    let offsets: Vec<f64> = match side {
        StencilSide::Central => {
            let m = ((order + 1) / 2) as i64;
            (-m..=m).map(|o| o as f64).collect()
        }
        StencilSide::Forward => (0..=(order as i64 + 1)).map(|o| o as f64).collect(),
        StencilSide::Backward => (0..=(order as i64 + 1)).map(|o| -(o as f64)).collect(),
    };
    let w = fd_weights(&offsets, order);
    (offsets, w)
}

type Evaluator<'a, T> = dyn Fn(&[T]) -> Result<Multivector<T>> + Sync + 'a;

fn tensor_derivative<T: Real>(
    f: &Evaluator<'_, T>,
    dim: usize,
    alpha: &MultiIndex,
    sides: &[StencilSide],
    x: &[T],
    h: T,
) -> Result<Multivector<T>> {
    let mut axes: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    for (j, &o) in alpha.orders().iter().enumerate() {
        if o > 0 {
            let (off, w) = stencil(o as usize, sides[j]);
            axes.push((j, off, w));
        }
    }
    let mut acc = Multivector::zero(dim);
    let mut idx = vec![0usize; axes.len()];
    let mut p: Point<T> = SmallVec::from_slice(x);
    loop {
        let mut w = 1.0;
        p.copy_from_slice(x);
        for (a, (j, off, ws)) in axes.iter().enumerate() {
            w *= ws[idx[a]];
            p[*j] += h * T::lit(off[idx[a]]);
        }
        if w != 0.0 {
            acc.axpy(T::lit(w), &f(&p)?);
        }
        // odometer
        let mut a = 0;
        loop {
            if a == axes.len() {
                let scale = h.powi(-(alpha.total() as i32));
                return Ok(acc * scale);
            }
            idx[a] += 1;
            if idx[a] < axes[a].1.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

fn stencil_points<T: Real>(alpha: &MultiIndex, sides: &[StencilSide], x: &[T], h: T) -> Vec<Point<T>> {
    let mut pts: Vec<Point<T>> = vec![SmallVec::from_slice(x)];
    for (j, &o) in alpha.orders().iter().enumerate() {
        if o == 0 {
            continue;
        }
        let (off, _) = stencil(o as usize, sides[j]);
        pts = pts
            .into_iter()
            .flat_map(|p| {
                off.iter()
                    .map(move |&d| {
                        let mut q = p.clone();
                        q[j] += h * T::lit(d);
                        q
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    pts
}

fn check_step<T: Real>(h: T) -> Result<()> {
    if h > T::zero() && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("step h = {h} must be positive")))
    }
}

fn eval_fn<T: Real>(f: &CliffordField<T>) -> impl Fn(&[T]) -> Result<Multivector<T>> + Sync + '_ {
    move |p: &[T]| f.eval(p)
}

/// `∂^α f(x)` by tensor-product central differences. Errors when the
/// stencil leaves the field's support.
pub fn multi_index_derivative<T: Real>(f: &CliffordField<T>, alpha: &MultiIndex, x: &[T], h: T) -> Result<Multivector<T>> {
    check_step(h)?;
    if alpha.dim() != f.dim() || x.len() != f.dim() {
        return Err(Error::DimensionMismatch { left: f.dim(), right: alpha.dim().max(x.len()) });
    }
    if alpha.total() == 0 {
        return f.eval(x);
    }
    let sides = vec![StencilSide::Central; f.dim()];
    if f.support().is_some() {
        for p in stencil_points(alpha, &sides, x, h) {
            if !f.admits_strictly(&p) {
                return Err(Error::StencilOutOfDomain { point: point_f64(&p) });
            }
        }
    }
    tensor_derivative(&eval_fn(f), f.dim(), alpha, &sides, x, h)
}

/// `∂^α f(x)`, switching to one-sided stencils along axes where the central
/// one would leave the support.
pub fn multi_index_derivative_adaptive<T: Real>(
    f: &CliffordField<T>,
    alpha: &MultiIndex,
    x: &[T],
    h: T,
) -> Result<Multivector<T>> {
    if f.support().is_none() {
        return multi_index_derivative(f, alpha, x, h);
    }
    check_step(h)?;
    if alpha.total() == 0 {
        return f.eval(x);
    }
    let active: Vec<usize> = (0..f.dim()).filter(|&j| alpha.orders()[j] > 0).collect();
    let choices = [StencilSide::Central, StencilSide::Forward, StencilSide::Backward];
    let combos = 3usize.pow(active.len() as u32);
    for c in 0..combos {
        let mut sides = vec![StencilSide::Central; f.dim()];
        let mut rem = c;
        for &j in &active {
            sides[j] = choices[rem % 3];
            rem /= 3;
        }
        let fits = stencil_points(alpha, &sides, x, h).iter().all(|p| p.len() == x.len() && f.admits_strictly(p));
        if fits {
            return tensor_derivative(&eval_fn(f), f.dim(), alpha, &sides, x, h);
        }
    }
    Err(Error::StencilOutOfDomain { point: point_f64(x) })
}

fn dirac_fd<T: Real>(f: &CliffordField<T>, x: &[T], h: T, right: bool) -> Result<Multivector<T>> {
    check_step(h)?;
    let n = f.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { left: n, right: x.len() });
    }
    let mut p: Point<T> = SmallVec::from_slice(x);
    let mut out = Multivector::zero(n);
    let inv = T::one() / (T::lit(2.0) * h);
    for j in 0..n {
        p[j] = x[j] + h;
        if !f.admits_strictly(&p) {
            return Err(Error::StencilOutOfDomain { point: point_f64(&p) });
        }
        let fp = f.eval(&p)?;
        p[j] = x[j] - h;
        if !f.admits_strictly(&p) {
            return Err(Error::StencilOutOfDomain { point: point_f64(&p) });
        }
        let fm = f.eval(&p)?;
        p[j] = x[j];
        let d = (fp - &fm) * inv;
        let mut e = [T::zero(); MAX_DIM];
        e[j] = T::one();
        let term = if right { d.right_mul_vector(&e[..n]) } else { d.left_mul_vector(&e[..n]) };
        out += &term;
    }
    Ok(out)
}

/// `Df(x) = Σ_j e_j ∂_j f(x)`; analytic when the field supplies it, central
/// differences with step `h` otherwise.
pub fn dirac_apply<T: Real>(f: &CliffordField<T>, x: &[T], h: T) -> Result<Multivector<T>> {
    if let Some(d) = f.analytic_dirac(x) {
        if !f.admits(x) {
            return Err(Error::OutOfDomain { point: point_f64(x) });
        }
        return Ok(d);
    }
    dirac_fd(f, x, h, false)
}

/// Finite-difference `Df(x)` even when an analytic derivative exists.
pub fn dirac_apply_fd<T: Real>(f: &CliffordField<T>, x: &[T], h: T) -> Result<Multivector<T>> {
    dirac_fd(f, x, h, false)
}

/// `f(x)D = Σ_j ∂_j f(x) e_j`.
pub fn dirac_right_apply<T: Real>(f: &CliffordField<T>, x: &[T], h: T) -> Result<Multivector<T>> {
    dirac_fd(f, x, h, true)
}

/// `Δf(x) = Σ_j ∂_j² f(x)` componentwise (three-point stencils).
pub fn laplacian_apply<T: Real>(f: &CliffordField<T>, x: &[T], h: T) -> Result<Multivector<T>> {
    let mut out = Multivector::zero(f.dim());
    for d in second_partials(f, x, h)? {
        out += &d;
    }
    Ok(out)
}

/// Central second differences `∂_j² f(x)`, `j = 1..n`.
pub fn second_partials<T: Real>(f: &CliffordField<T>, x: &[T], h: T) -> Result<Vec<Multivector<T>>> {
    check_step(h)?;
    let n = f.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { left: n, right: x.len() });
    }
    let f0 = f.eval(x)?;
    let inv = T::one() / (h * h);
    let mut p: Point<T> = SmallVec::from_slice(x);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        p[j] = x[j] + h;
        if !f.admits_strictly(&p) {
            return Err(Error::StencilOutOfDomain { point: point_f64(&p) });
        }
        let fp = f.eval(&p)?;
        p[j] = x[j] - h;
        if !f.admits_strictly(&p) {
            return Err(Error::StencilOutOfDomain { point: point_f64(&p) });
        }
        let fm = f.eval(&p)?;
        p[j] = x[j];
        out.push((fp + &fm - &(f0.clone() * T::lit(2.0))) * inv);
    }
    Ok(out)
}

/// `-D(Df)(x)`, the Laplacian through the factorisation `Δ = -D²`, with the
/// inner derivative evaluated by `dirac_apply` at each outer stencil point.
pub fn laplacian_via_dirac<T: Real>(f: &CliffordField<T>, x: &[T], h: T) -> Result<Multivector<T>> {
    let inner_f = f.clone();
    let inner = CliffordField::closed_form("Df", f.dim(), move |p: &[T]| {
        dirac_apply(&inner_f, p, h).unwrap_or_else(|_| Multivector::zero(p.len()))
    });
    let inner = match f.support() {
        Some(d) => inner.with_support(d.clone()),
        None => inner,
    };
    // the outer stencil reaches 2h from x
    let mut p: Point<T> = SmallVec::from_slice(x);
    for j in 0..f.dim() {
        for s in [T::lit(2.0), -T::lit(2.0)] {
            p[j] = x[j] + s * h;
            if !f.admits_strictly(&p) {
                return Err(Error::StencilOutOfDomain { point: point_f64(&p) });
            }
        }
        p[j] = x[j];
    }
    Ok(-dirac_fd(&inner, x, h, false)?)
}

/// `Df` as a field: the analytic derivative when there is one, otherwise
/// differences with step `h`, one-sided next to the support boundary.
/// Points where no stencil fits evaluate to NaN.
pub fn dirac_field<T: Real>(f: &CliffordField<T>, h: T) -> CliffordField<T> {
    let n = f.dim();
    let g = f.clone();
    let out = CliffordField::closed_form(format!("D{}", f.name()), n, move |x: &[T]| {
        if let Some(d) = g.analytic_dirac(x) {
            return d;
        }
        let mut out = Multivector::zero(n);
        let mut e = [T::zero(); MAX_DIM];
        for j in 0..n {
            match multi_index_derivative_adaptive(&g, &MultiIndex::unit(n, j), x, h) {
                Ok(d) => {
                    e[j] = T::one();
                    out += &d.left_mul_vector(&e[..n]);
                    e[j] = T::zero();
                }
                Err(_) => return Multivector::zero(n).map(|_| T::nan()),
            }
        }
        out
    });
    match f.support() {
        Some(d) => out.with_support(d.clone()),
        None => out,
    }
}

/// Boundary values `τf` by inward offset and Richardson extrapolation:
/// `2 f(y - εν) - f(y - 2εν)` at each panel centre `y`.
///
/// The returned field is sampled on `bmesh` and keeps an evaluator that
/// applies the same rule at the projection of any point onto `∂Ω`.
pub fn trace_extract<T: Real>(f: &CliffordField<T>, bmesh: &BoundaryMesh<T>, eps: T) -> Result<CliffordField<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument(format!("trace offset {eps} must be positive")));
    }
    if f.dim() != bmesh.dim() {
        return Err(Error::DimensionMismatch { left: f.dim(), right: bmesh.dim() });
    }
    let domain = bmesh.domain().clone();
    let two = T::lit(2.0);
    for i in 0..bmesh.len() {
        let y = bmesh.center(i);
        let nu = bmesh.normal(i);
        let q: Point<T> = y.iter().zip(nu).map(|(&a, &b)| a - two * eps * b).collect();
        if !domain.contains(&q) {
            return Err(Error::InvalidOffset { offset: eps.to_f64_lossy(), panel: i });
        }
    }
    let values: Vec<Multivector<T>> = (0..bmesh.len())
        .into_par_iter()
        .map(|i| {
            let y = bmesh.center(i);
            let nu = bmesh.normal(i);
            let q1: Point<T> = y.iter().zip(nu).map(|(&a, &b)| a - eps * b).collect();
            let q2: Point<T> = y.iter().zip(nu).map(|(&a, &b)| a - two * eps * b).collect();
            Ok(f.eval(&q1)? * two - &f.eval(&q2)?)
        })
        .collect::<Result<_>>()?;
    let inner = f.clone();
    let fallback: FieldFn<T> = Arc::new(move |z: &[T]| {
        let (y, nu) = domain.project(z);
        let q1: Point<T> = y.iter().zip(&nu).map(|(&a, &b)| a - eps * b).collect();
        let q2: Point<T> = y.iter().zip(&nu).map(|(&a, &b)| a - two * eps * b).collect();
        match (inner.eval(&q1), inner.eval(&q2)) {
            (Ok(a), Ok(b)) => a * two - &b,
            _ => Multivector::zero(z.len()),
        }
    });
    Ok(CliffordField::sampled(format!("trace({})", f.name()), f.dim(), bmesh.key(), values)?.with_fallback(fallback))
}

/// `∂^α (g ∘ P)(y)` at a boundary point, `P` the nearest-point projection
/// onto `∂Ω`: derivatives of the normally-constant extension of boundary
/// data, i.e. tangential derivatives.
pub fn tangential_derivative<T: Real>(
    g: &CliffordField<T>,
    domain: &Domain<T>,
    alpha: &MultiIndex,
    y: &[T],
    h: T,
) -> Result<Multivector<T>> {
    check_step(h)?;
    let lifted = |p: &[T]| -> Result<Multivector<T>> {
        let (q, _) = domain.project(p);
        g.eval(&q)
    };
    if alpha.total() == 0 {
        return lifted(y);
    }
    let sides = vec![StencilSide::Central; g.dim()];
    tensor_derivative(&lifted, g.dim(), alpha, &sides, y, h)
}

/// Tangential gradient components `∂_j (g ∘ P)(y)`, `j = 1..n`.
pub fn tangential_gradient<T: Real>(
    g: &CliffordField<T>,
    domain: &Domain<T>,
    y: &[T],
    h: T,
) -> Result<SmallVec<[Multivector<T>; 3]>> {
    (0..g.dim()).map(|j| tangential_derivative(g, domain, &MultiIndex::unit(g.dim(), j), y, h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{embed_vector, BladeIndex};

    type Mv = Multivector<f64>;

    fn field(f: impl Fn(&[f64]) -> Mv + Send + Sync + 'static) -> CliffordField<f64> {
        CliffordField::closed_form("f", 2, f)
    }

    #[test]
    fn fornberg_known_weights() {
        let w = fd_weights(&[-1.0, 0.0, 1.0], 1);
        assert_eq!(w, vec![-0.5, 0.0, 0.5]);
        let w = fd_weights(&[-1.0, 0.0, 1.0], 2);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
        let w = fd_weights(&[0.0, 1.0, 2.0], 1);
        assert!((w[0] + 1.5).abs() < 1e-15 && (w[1] - 2.0).abs() < 1e-15 && (w[2] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(MultiIndex::exactly(2, 2).len(), 3);
        assert_eq!(MultiIndex::up_to(2, 2).len(), 6);
        assert_eq!(MultiIndex::up_to(3, 1).len(), 4);
        assert!(MultiIndex::up_to(3, 3).iter().all(|a| a.total() <= 3));
    }

    #[test]
    fn dirac_of_coordinate() {
        let f = field(|x| Mv::scalar(2, x[0]));
        let d = dirac_apply(&f, &[0.3, 0.2], 1e-3).unwrap();
        assert!((d - Mv::e(2, 1)).max_abs() < 1e-12);
    }

    #[test]
    fn dirac_of_monogenic_linear_is_zero() {
        let f = field(|x| Mv::e(2, 1) * x[0] - &(Mv::e(2, 2) * x[1]));
        assert!(dirac_apply(&f, &[0.3, -0.7], 1e-3).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn dirac_of_squared_norm() {
        let f = field(|x| Mv::scalar(2, x[0] * x[0] + x[1] * x[1]));
        let x = [0.4, -0.1];
        let d = dirac_apply(&f, &x, 1e-3).unwrap();
        assert!((d - embed_vector(&[0.8, -0.2])).max_abs() < 1e-10);
    }

    #[test]
    fn right_dirac_differs_by_order() {
        let f = field(|x| Mv::e(2, 1) * x[1]);
        let x = [0.1, 0.2];
        let e12 = Mv::blade(2, BladeIndex(3), 1.0);
        let r = dirac_right_apply(&f, &x, 1e-3).unwrap();
        let l = dirac_apply(&f, &x, 1e-3).unwrap();
        assert!((r - &e12).max_abs() < 1e-12);
        assert!((l + e12).max_abs() < 1e-12);
        let s = field(|x| Mv::scalar(2, x[0] * x[1] * x[1]));
        let a = dirac_apply(&s, &x, 1e-3).unwrap();
        let b = dirac_right_apply(&s, &x, 1e-3).unwrap();
        assert!((a - b).max_abs() < 1e-14);
    }

    #[test]
    fn multi_index_examples() {
        let x = [0.3, 0.4];
        let f = field(|x| Mv::one(2) * (x[0] * x[0]) + &Mv::e(2, 2));
        assert_eq!(multi_index_derivative(&f, &MultiIndex::zero(2), &x, 1e-3).unwrap(), f.eval(&x).unwrap());
        let g = field(|x| Mv::one(2) * (x[0] * x[1]));
        let d = multi_index_derivative(&g, &MultiIndex::new(&[1, 1]), &x, 1e-3).unwrap();
        assert!((d - Mv::one(2)).max_abs() < 1e-8);
        let e12 = Mv::blade(2, BladeIndex(3), 1.0);
        let q = field(move |x| e12.clone() * (x[0] * x[0]));
        let d = multi_index_derivative(&q, &MultiIndex::new(&[2, 0]), &x, 1e-3).unwrap();
        assert!((d - Mv::blade(2, BladeIndex(3), 2.0)).max_abs() < 1e-6);
    }

    #[test]
    fn stencil_out_of_domain() {
        let f = field(|x| Mv::scalar(2, x[0])).with_support(Domain::unit_disk());
        let err = dirac_apply(&f, &[0.9995, 0.0], 1e-3).unwrap_err();
        assert!(matches!(err, Error::StencilOutOfDomain { .. }));
        let d = multi_index_derivative_adaptive(&f, &MultiIndex::unit(2, 0), &[0.9995, 0.0], 1e-3).unwrap();
        assert!((d - Mv::one(2)).max_abs() < 1e-9);
    }

    #[test]
    fn laplacian_examples() {
        let f = field(|x| Mv::scalar(2, x[0] * x[0] + x[1] * x[1]));
        let l = laplacian_apply(&f, &[0.2, 0.1], 1e-3).unwrap();
        assert!((l - Mv::scalar(2, 4.0)).max_abs() < 1e-6);
        let h = field(|x| Mv::scalar(2, x[0] * x[0] - x[1] * x[1]));
        assert!(laplacian_apply(&h, &[0.2, 0.1], 1e-3).unwrap().max_abs() < 1e-6);
        let v = laplacian_via_dirac(&f, &[0.2, 0.1], 1e-3).unwrap();
        assert!((v - Mv::scalar(2, 4.0)).max_abs() < 1e-5);
    }

    #[test]
    fn trace_examples() {
        let b = BoundaryMesh::new(&Domain::unit_disk(), 64).unwrap();
        let c = CliffordField::constant(Mv::e(2, 2) * 3.0);
        let t = trace_extract(&c, &b, 1e-3).unwrap();
        assert!(t.samples_for(b.key()).unwrap().iter().all(|v| (v - &(Mv::e(2, 2) * 3.0)).max_abs() < 1e-14));
        let f = field(|x| Mv::scalar(2, x[0] * x[0] + x[1] * x[1]));
        let t = trace_extract(&f, &b, 1e-3).unwrap();
        assert!(t.samples_for(b.key()).unwrap().iter().all(|v| (v.scalar_part() - 1.0).abs() < 1e-5));
        let m = field(|x| Mv::e(2, 1) * x[0] - &(Mv::e(2, 2) * x[1]));
        let t = trace_extract(&m, &b, 1e-3).unwrap();
        for (i, v) in t.samples_for(b.key()).unwrap().iter().enumerate() {
            let th = (i as f64 + 0.5) * std::f64::consts::TAU / 64.0;
            let want = Mv::e(2, 1) * th.cos() - &(Mv::e(2, 2) * th.sin());
            assert!((v - &want).max_abs() < 1e-12, "{i}: {v} vs {want}");
        }
        assert!(matches!(trace_extract(&f, &b, 1.2), Err(Error::InvalidOffset { .. })));
    }

    #[test]
    fn tangential_gradient_on_circle() {
        // g = x1 on the unit circle: tangential gradient at (1,0) is 0,
        // at (0,1) it is (1, 0)
        let d = Domain::unit_disk();
        let g = field(|x| Mv::scalar(2, x[0]));
        let t = tangential_gradient(&g, &d, &[1.0, 0.0], 1e-4).unwrap();
        assert!(t[0].max_abs() < 1e-7 && t[1].max_abs() < 1e-7);
        let t = tangential_gradient(&g, &d, &[0.0, 1.0], 1e-4).unwrap();
        assert!((t[0].scalar_part() - 1.0).abs() < 1e-7 && t[1].max_abs() < 1e-7);
    }

    #[test]
    fn sum_and_scale() {
        let a = field(|x| Mv::scalar(2, x[0]));
        let b = field(|x| Mv::e(2, 1) * x[1]);
        let s = a.sum(&b).unwrap().scaled(2.0);
        let v = s.eval(&[1.0, 2.0]).unwrap();
        assert_eq!(v, Mv::scalar(2, 2.0) + Mv::e(2, 1) * 4.0);
    }
}
