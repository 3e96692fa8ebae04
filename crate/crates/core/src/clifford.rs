//! Arithmetic in the Clifford algebra `Cl_n` with `e_j^2 = -1`.
//!
//! Basis blades are indexed by bitmasks: bit `j - 1` set means the generator
//! `e_j` occurs in the canonically ordered product `e_{j1} e_{j2} ... e_{jr}`
//! with `j1 < j2 < ... < jr`. The empty mask is the identity `e_0`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::real::Real;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 12;

/// Basis blade `e_A` for `A ⊂ {1, ..., n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BladeIndex(pub u16);

impl BladeIndex {
    pub const SCALAR: BladeIndex = BladeIndex(0);

    /// Blade of the single generator `e_j`, `j >= 1`.
    pub fn generator(j: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&j));
        BladeIndex(1 << (j - 1))
    }

    /// Blade from a list of 1-based generator indices (order ignored).
    pub fn from_generators(gens: &[usize]) -> Self {
        BladeIndex(gens.iter().fold(0u16, |m, &j| m | (1 << (j - 1))))
    }

    #[inline]
    pub fn grade(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn mask(self) -> usize {
        self.0 as usize
    }

    /// Whether all generators are among `e_1 .. e_n`.
    #[inline]
    pub fn fits(self, n: usize) -> bool {
        n <= MAX_DIM && (self.0 as u32) >> n == 0
    }

    /// Ascending generator indices, 1-based.
    pub fn generators(self) -> impl Iterator<Item = usize> {
        (0..16).filter(move |b| self.0 & (1 << b) != 0).map(|b| b + 1)
    }

    /// `1`, `e1`, `e12`, ... (multi-digit indices are separated by `_`).
    pub fn name(self) -> String {
        if self.0 == 0 {
            return "1".to_owned();
        }
        let gens: Vec<usize> = self.generators().collect();
        if gens.iter().all(|&g| g < 10) {
            let digits: String = gens.iter().map(|g| g.to_string()).collect();
            format!("e{digits}")
        } else {
            let parts: Vec<String> = gens.iter().map(|g| g.to_string()).collect();
            format!("e{}", parts.join("_"))
        }
    }
}

impl fmt::Display for BladeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Sign of `e_A e_B` relative to `e_{A xor B}`; `true` means negative.
///
/// Counts the transpositions needed to merge the two ordered generator
/// strings, plus one factor of `-1` per generator shared by both blades.
#[inline]
fn product_is_negative(a: usize, b: usize) -> bool {
    let mut swaps = 0u32;
    let mut rest = a >> 1;
    while rest != 0 {
        swaps += (rest & b).count_ones();
        rest >>= 1;
    }
    (swaps + (a & b).count_ones()) & 1 == 1
}

/// Product of two basis blades: `e_A e_B = sign * e_{A xor B}`.
pub fn blade_product(a: BladeIndex, b: BladeIndex, n: usize) -> Result<(i8, BladeIndex)> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidArgument(format!("dimension {n} outside 1..={MAX_DIM}")));
    }
    if !a.fits(n) || !b.fits(n) {
        return Err(Error::InvalidArgument(format!("blade {a} or {b} not in Cl_{n}")));
    }
    let sign = if product_is_negative(a.mask(), b.mask()) { -1 } else { 1 };
    Ok((sign, BladeIndex(a.0 ^ b.0)))
}

/// Sign applied by conjugation to a blade of grade `r`:
/// `(-1)^r` from the generators times `(-1)^(r(r-1)/2)` from reversal.
#[inline]
pub fn conj_sign(r: u32) -> i8 {
    // r mod 4: 0 -> +, 1 -> -, 2 -> -, 3 -> +
    match r % 4 {
        0 | 3 => 1,
        _ => -1,
    }
}

type Coeffs<T> = SmallVec<[T; 8]>;

/// Element `a = Σ_A e_A a_A` of `Cl_n`, stored densely (`2^n` slots).
#[derive(Clone, PartialEq)]
pub struct Multivector<T> {
    dim: usize,
    coeffs: Coeffs<T>,
}

impl<T: Real> Multivector<T> {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM, "dimension {dim} outside 1..={MAX_DIM}");
        Multivector { dim, coeffs: SmallVec::from_elem(T::zero(), 1 << dim) }
    }

    pub fn scalar(dim: usize, s: T) -> Self {
        let mut m = Self::zero(dim);
        m.coeffs[0] = s;
        m
    }

    pub fn one(dim: usize) -> Self {
        Self::scalar(dim, T::one())
    }

    /// `coeff * e_A`.
    pub fn blade(dim: usize, blade: BladeIndex, coeff: T) -> Self {
        assert!(blade.fits(dim), "blade {blade} not in Cl_{dim}");
        let mut m = Self::zero(dim);
        m.coeffs[blade.mask()] = coeff;
        m
    }

    /// Generator `e_j` (1-based).
    pub fn e(dim: usize, j: usize) -> Self {
        Self::blade(dim, BladeIndex::generator(j), T::one())
    }

    pub fn from_coeffs(dim: usize, coeffs: &[T]) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        if coeffs.len() != 1 << dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients for Cl_{dim}, got {}",
                1usize << dim,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Multivector { dim, coeffs: SmallVec::from_slice(coeffs) })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    #[inline]
    pub fn get(&self, blade: BladeIndex) -> T {
        self.coeffs[blade.mask()]
    }

    /// Grade-0 coefficient, the "real part".
    #[inline]
    pub fn scalar_part(&self) -> T {
        self.coeffs[0]
    }

    pub fn grade_part(&self, r: u32) -> Self {
        let mut out = Self::zero(self.dim);
        for (a, c) in self.coeffs.iter().enumerate() {
            if (a as u32).count_ones() == r {
                out.coeffs[a] = *c;
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// True when every non-zero coefficient sits on a grade-1 blade.
    pub fn is_vector(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(a, c)| c.is_zero() || a.count_ones() == 1)
    }

    /// Coefficients of the grade-1 part, `(x_1, ..., x_n)`.
    pub fn vector_part(&self) -> SmallVec<[T; MAX_DIM]> {
        (0..self.dim).map(|j| self.coeffs[1 << j]).collect()
    }

    /// Geometric product; errors on dimension mismatch.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: rhs.dim });
        }
        Ok(self.product(rhs))
    }

    fn product(&self, rhs: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (b, &y) in rhs.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let v = x * y;
                if product_is_negative(a, b) {
                    out.coeffs[a ^ b] -= v;
                } else {
                    out.coeffs[a ^ b] += v;
                }
            }
        }
        out
    }

    /// `(Σ_j v_j e_j) * self` without forming the full product table.
    pub fn left_mul_vector(&self, v: &[T]) -> Self {
        debug_assert_eq!(v.len(), self.dim);
        let mut out = Self::zero(self.dim);
        for (j, &vj) in v.iter().enumerate() {
            if vj.is_zero() {
                continue;
            }
            let g = 1usize << j;
            for (b, &y) in self.coeffs.iter().enumerate() {
                let t = vj * y;
                if product_is_negative(g, b) {
                    out.coeffs[g ^ b] -= t;
                } else {
                    out.coeffs[g ^ b] += t;
                }
            }
        }
        out
    }

    /// `self * (Σ_j v_j e_j)`.
    pub fn right_mul_vector(&self, v: &[T]) -> Self {
        debug_assert_eq!(v.len(), self.dim);
        let mut out = Self::zero(self.dim);
        for (j, &vj) in v.iter().enumerate() {
            if vj.is_zero() {
                continue;
            }
            let g = 1usize << j;
            for (a, &x) in self.coeffs.iter().enumerate() {
                let t = x * vj;
                if product_is_negative(a, g) {
                    out.coeffs[a ^ g] -= t;
                } else {
                    out.coeffs[a ^ g] += t;
                }
            }
        }
        out
    }

    /// Clifford conjugate `ā`.
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for (a, c) in out.coeffs.iter_mut().enumerate() {
            if conj_sign((a as u32).count_ones()) < 0 {
                *c = -*c;
            }
        }
        out
    }

    /// `‖a‖ = (Σ_A a_A²)^{1/2}`.
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, &c| acc + c * c)
    }

    /// Scalar part of `conj(self) * other`, i.e. the coefficient inner product.
    pub fn scalar_product(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        self.coeffs.iter().zip(&other.coeffs).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    /// Inverse of a non-zero grade-1 element: `x^{-1} = x̄ / ‖x‖²`.
    pub fn vector_inverse(&self) -> Result<Self> {
        if !self.is_vector() {
            return Err(Error::InvalidArgument("vector_inverse needs a grade-1 element".into()));
        }
        let n2 = self.norm_sq();
        if n2.is_zero() {
            return Err(Error::DivisionByZero("inverse of the zero vector"));
        }
        Ok(self.conj() * (T::one() / n2))
    }

    /// `self += s * other`.
    #[inline]
    pub fn axpy(&mut self, s: T, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Multivector { dim: self.dim, coeffs: self.coeffs.iter().map(|&c| f(c)).collect() }
    }

    pub fn cast<U: Real>(&self) -> Multivector<U> {
        Multivector { dim: self.dim, coeffs: self.coeffs.iter().map(|c| U::lit(c.to_f64_lossy())).collect() }
    }
}

/// `x ↦ Σ_j e_j x_j`.
pub fn embed_vector<T: Real>(x: &[T]) -> Multivector<T> {
    let mut m = Multivector::zero(x.len());
    for (j, &xj) in x.iter().enumerate() {
        m.coeffs[1 << j] = xj;
    }
    m
}

pub fn mv_mul<T: Real>(a: &Multivector<T>, b: &Multivector<T>) -> Result<Multivector<T>> {
    a.try_mul(b)
}

pub fn mv_conj<T: Real>(a: &Multivector<T>) -> Multivector<T> {
    a.conj()
}

pub fn mv_norm<T: Real>(a: &Multivector<T>) -> T {
    a.norm()
}

pub fn vector_inverse<T: Real>(x: &Multivector<T>) -> Result<Multivector<T>> {
    x.vector_inverse()
}

/// Multiplication table of `Cl_n` as CSV: header row of blade names, then
/// one row per left factor with signed product blades (`-e12`).
pub fn multiplication_table_csv(n: usize) -> Result<String> {
    if n == 0 || n > 4 {
        return Err(Error::InvalidArgument(format!("table printed for 1 <= n <= 4, got {n}")));
    }
    let blades: Vec<BladeIndex> = (0..1u16 << n).map(BladeIndex).collect();
    let mut out = String::from("*");
    for b in &blades {
        out.push(',');
        out.push_str(&b.name());
    }
    out.push('\n');
    for &a in &blades {
        out.push_str(&a.name());
        for &b in &blades {
            let (s, c) = blade_product(a, b, n)?;
            out.push(',');
            if s < 0 {
                out.push('-');
            }
            out.push_str(&c.name());
        }
        out.push('\n');
    }
    Ok(out)
}

impl<T: Real> fmt::Debug for Multivector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<T: Real> fmt::Display for Multivector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{}*{}", c, BladeIndex(a as u16).name())?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl<T> Index<BladeIndex> for Multivector<T> {
    type Output = T;
    fn index(&self, b: BladeIndex) -> &T {
        &self.coeffs[b.mask()]
    }
}

impl<T> IndexMut<BladeIndex> for Multivector<T> {
    fn index_mut(&mut self, b: BladeIndex) -> &mut T {
        &mut self.coeffs[b.mask()]
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $atr:ident, $af:ident, $op:tt) => {
        impl<T: Real> $atr<&Multivector<T>> for Multivector<T> {
            fn $af(&mut self, rhs: &Multivector<T>) {
                assert_eq!(self.dim, rhs.dim, "multivector dimension mismatch");
                for (a, &b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                    *a = *a $op b;
                }
            }
        }
        impl<T: Real> $atr for Multivector<T> {
            fn $af(&mut self, rhs: Multivector<T>) {
                <Self as $atr<&Multivector<T>>>::$af(self, &rhs);
            }
        }
        impl<T: Real> $tr<&Multivector<T>> for Multivector<T> {
            type Output = Multivector<T>;
            fn $f(mut self, rhs: &Multivector<T>) -> Multivector<T> {
                self.$af(rhs);
                self
            }
        }
        impl<T: Real> $tr for Multivector<T> {
            type Output = Multivector<T>;
            fn $f(self, rhs: Multivector<T>) -> Multivector<T> {
                self.$f(&rhs)
            }
        }
        impl<T: Real> $tr<&Multivector<T>> for &Multivector<T> {
            type Output = Multivector<T>;
            fn $f(self, rhs: &Multivector<T>) -> Multivector<T> {
                self.clone().$f(rhs)
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, +);
binop!(Sub, sub, SubAssign, sub_assign, -);

impl<T: Real> Neg for Multivector<T> {
    type Output = Multivector<T>;
    fn neg(self) -> Self {
        self.map(|c| -c)
    }
}

impl<T: Real> Neg for &Multivector<T> {
    type Output = Multivector<T>;
    fn neg(self) -> Multivector<T> {
        self.map(|c| -c)
    }
}

impl<T: Real> Mul<T> for Multivector<T> {
    type Output = Multivector<T>;
    fn mul(mut self, s: T) -> Self {
        self *= s;
        self
    }
}

impl<T: Real> Mul<T> for &Multivector<T> {
    type Output = Multivector<T>;
    fn mul(self, s: T) -> Multivector<T> {
        self.clone() * s
    }
}

impl<T: Real> MulAssign<T> for Multivector<T> {
    fn mul_assign(&mut self, s: T) {
        for c in self.coeffs.iter_mut() {
            *c *= s;
        }
    }
}

/// Geometric product. Panics on dimension mismatch; see [`Multivector::try_mul`].
impl<T: Real> Mul<&Multivector<T>> for &Multivector<T> {
    type Output = Multivector<T>;
    fn mul(self, rhs: &Multivector<T>) -> Multivector<T> {
        assert_eq!(self.dim, rhs.dim, "multivector dimension mismatch");
        self.product(rhs)
    }
}

impl<T: Real> Mul for Multivector<T> {
    type Output = Multivector<T>;
    fn mul(self, rhs: Multivector<T>) -> Multivector<T> {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Mv = Multivector<f64>;

    /// Sorts the symbol string `a ++ b` by adjacent swaps and contracts
    /// equal neighbours with `e_j e_j = -1`.
    fn symbol_oracle(a: BladeIndex, b: BladeIndex) -> (i8, BladeIndex) {
        let mut word: Vec<usize> = a.generators().chain(b.generators()).collect();
        let mut sign = 1i8;
        loop {
            let mut changed = false;
            let mut i = 0;
            while i + 1 < word.len() {
                if word[i] > word[i + 1] {
                    word.swap(i, i + 1);
                    sign = -sign;
                    changed = true;
                } else if word[i] == word[i + 1] {
                    word.drain(i..i + 2);
                    sign = -sign;
                    changed = true;
                    continue;
                }
                i += 1;
            }
            if !changed {
                break;
            }
        }
        (sign, BladeIndex::from_generators(&word))
    }

    #[test]
    fn blade_examples() {
        let e1 = BladeIndex::generator(1);
        let e2 = BladeIndex::generator(2);
        let e12 = BladeIndex::from_generators(&[1, 2]);
        assert_eq!(blade_product(e1, e1, 2).unwrap(), (-1, BladeIndex::SCALAR));
        assert_eq!(blade_product(e1, e2, 2).unwrap(), (1, e12));
        assert_eq!(symbol_oracle(e12, e1), (1, e2));
        assert_eq!(blade_product(e12, e1, 2).unwrap(), (1, e2));
    }

    #[test]
    fn blade_outside_dimension_is_rejected() {
        let e3 = BladeIndex::generator(3);
        assert!(matches!(blade_product(e3, e3, 2), Err(Error::InvalidArgument(_))));
        assert!(blade_product(BladeIndex(0), BladeIndex(0), 0).is_err());
    }

    #[test]
    fn oracle_agrees_up_to_five() {
        for n in 1..=5 {
            for a in 0..1u16 << n {
                for b in 0..1u16 << n {
                    let (a, b) = (BladeIndex(a), BladeIndex(b));
                    assert_eq!(blade_product(a, b, n).unwrap(), symbol_oracle(a, b), "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn anticommuting_generators() {
        let e1 = Mv::e(2, 1);
        let e2 = Mv::e(2, 2);
        let e12 = Mv::blade(2, BladeIndex(3), 1.0);
        assert_eq!(&e1 * &e2, e12);
        assert_eq!(&e2 * &e1, -e12);
        for n in 1..=4 {
            for i in 1..=n {
                for j in 1..=n {
                    let s = &Mv::e(n, i) * &Mv::e(n, j) + &Mv::e(n, j) * &Mv::e(n, i);
                    let expect = if i == j { Mv::scalar(n, -2.0) } else { Mv::zero(n) };
                    assert_eq!(s, expect);
                }
            }
        }
    }

    #[test]
    fn conjugation_examples() {
        let e1 = Mv::e(2, 1);
        assert_eq!(e1.conj(), -e1.clone());
        let e12 = &Mv::e(2, 1) * &Mv::e(2, 2);
        assert_eq!(e12.conj(), &Mv::e(2, 2) * &Mv::e(2, 1));
        assert_eq!(e12.conj(), -e12);
        assert_eq!(Mv::one(3).conj(), Mv::one(3));
    }

    #[test]
    fn norm_examples() {
        let a = Mv::one(2) + Mv::e(2, 1);
        assert!((a.norm() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(Mv::blade(2, BladeIndex(3), 1.0).norm(), 1.0);
        let x = embed_vector(&[3.0, 4.0]);
        assert_eq!(x.norm(), 5.0);
    }

    #[test]
    fn vector_inverse_examples() {
        let e1 = Mv::e(2, 1);
        assert_eq!(e1.vector_inverse().unwrap(), -e1.clone());
        assert_eq!(&e1 * &e1.vector_inverse().unwrap(), Mv::one(2));
        let x = Mv::e(2, 2) * 2.0;
        assert_eq!(x.vector_inverse().unwrap(), Mv::e(2, 2) * -0.5);
        let y = Mv::e(2, 1) + Mv::e(2, 2);
        let yi = y.vector_inverse().unwrap();
        assert_eq!(yi, (Mv::e(2, 1) + Mv::e(2, 2)) * -0.5);
        assert_eq!(&y * &yi, Mv::one(2));
        assert_eq!(&yi * &y, Mv::one(2));
    }

    #[test]
    fn vector_inverse_errors() {
        assert_eq!(Mv::zero(3).vector_inverse(), Err(Error::DivisionByZero("inverse of the zero vector")));
        assert!(matches!(Mv::one(3).vector_inverse(), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed_vector(&[1.0, 0.0]), Mv::e(2, 1));
        assert!(embed_vector(&[0.0, 0.0, 0.0]).is_zero());
    }

    #[test]
    fn mismatched_product_errors() {
        assert_eq!(Mv::one(2).try_mul(&Mv::one(3)), Err(Error::DimensionMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn vector_mul_shortcuts_match_full_product() {
        let v = [0.3, -1.2, 0.7];
        let mut m = Mv::zero(3);
        for (i, c) in m.coeffs_mut().iter_mut().enumerate() {
            *c = (i as f64 * 0.37).sin();
        }
        let ve = embed_vector(&v);
        assert!((m.left_mul_vector(&v) - &(&ve * &m)).max_abs() < 1e-15);
        assert!((m.right_mul_vector(&v) - &(&m * &ve)).max_abs() < 1e-15);
    }

    #[test]
    fn table_for_cl2() {
        let t = multiplication_table_csv(2).unwrap();
        let expected = "*,1,e1,e2,e12\n1,1,e1,e2,e12\ne1,e1,-1,e12,-e2\ne2,e2,-e12,-1,e1\ne12,e12,e2,-e1,-1\n";
        assert_eq!(t, expected);
        assert!(multiplication_table_csv(5).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let x = embed_vector(&[1.0f32, 2.0, 2.0]);
        assert_eq!((&x * &x).scalar_part(), -9.0);
    }
}
