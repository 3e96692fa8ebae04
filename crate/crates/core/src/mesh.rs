//! Model domains and their midpoint quadrature meshes.
//!
//! Disks and balls are meshed by polar/spherical product grids with exact
//! cell measures, boxes by uniform Cartesian grids. Boundary meshes carry
//! outward unit normals at panel centres.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::real::{dot, norm2, Real};

pub type Point<T> = SmallVec<[T; 3]>;

/// Domain kind as named on the command line and in configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Disk,
    Ball,
    Box,
}

impl DomainTag {
    pub fn name(self) -> &'static str {
        match self {
            DomainTag::Disk => "disk",
            DomainTag::Ball => "ball",
            DomainTag::Box => "box",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "disk" => Some(DomainTag::Disk),
            "ball" => Some(DomainTag::Ball),
            "box" => Some(DomainTag::Box),
            _ => None,
        }
    }
}

/// Bounded convex domain Ω ⊂ R^n.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain<T> {
    /// Euclidean ball; the disk when `center.len() == 2`.
    Ball { center: Point<T>, radius: T },
    /// Axis-aligned box `[lo, hi]`.
    Box { lo: Point<T>, hi: Point<T> },
}

impl<T: Real> Domain<T> {
    pub fn unit_disk() -> Self {
        Domain::Ball { center: Point::from_elem(T::zero(), 2), radius: T::one() }
    }

    pub fn unit_ball() -> Self {
        Domain::Ball { center: Point::from_elem(T::zero(), 3), radius: T::one() }
    }

    pub fn unit_box(n: usize) -> Self {
        Domain::Box { lo: Point::from_elem(T::zero(), n), hi: Point::from_elem(T::one(), n) }
    }

    /// Default domain for a tag: unit disk, unit ball, or `[0,1]^n`.
    pub fn from_tag(tag: DomainTag, n: usize) -> Result<Self> {
        match (tag, n) {
            (DomainTag::Disk, 2) => Ok(Self::unit_disk()),
            (DomainTag::Ball, 3) => Ok(Self::unit_ball()),
            (DomainTag::Box, 2 | 3) => Ok(Self::unit_box(n)),
            _ => Err(Error::UnsupportedDomain(format!("{} in dimension {n}", tag.name()))),
        }
    }

    pub fn tag(&self) -> DomainTag {
        match self {
            Domain::Ball { center, .. } if center.len() == 2 => DomainTag::Disk,
            Domain::Ball { .. } => DomainTag::Ball,
            Domain::Box { .. } => DomainTag::Box,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { center, .. } => center.len(),
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    pub fn centroid(&self) -> Point<T> {
        match self {
            Domain::Ball { center, .. } => center.clone(),
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(&a, &b)| (a + b) * T::lit(0.5)).collect(),
        }
    }

    /// Distance to ∂Ω, positive inside and negative outside.
    pub fn signed_distance(&self, x: &[T]) -> T {
        match self {
            Domain::Ball { center, radius } => {
                let r = x.iter().zip(center).fold(T::zero(), |a, (&p, &c)| a + (p - c) * (p - c)).sqrt();
                *radius - r
            }
            Domain::Box { lo, hi } => {
                let mut inside = T::infinity();
                let mut outside_sq = T::zero();
                for ((&p, &l), &h) in x.iter().zip(lo).zip(hi) {
                    inside = inside.min(p - l).min(h - p);
                    let over = (l - p).max(p - h).max(T::zero());
                    outside_sq += over * over;
                }
                if outside_sq > T::zero() {
                    -outside_sq.sqrt()
                } else {
                    inside
                }
            }
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, x: &[T]) -> bool {
        self.signed_distance(x) > T::zero()
    }

    /// Nearest boundary point and the outward unit normal there.
    pub fn project(&self, x: &[T]) -> (Point<T>, Point<T>) {
        match self {
            Domain::Ball { center, radius } => {
                let mut d: Point<T> = x.iter().zip(center).map(|(&p, &c)| p - c).collect();
                let r = norm2(&d);
                if r.is_zero() {
                    d.iter_mut().for_each(|v| *v = T::zero());
                    d[0] = T::one();
                } else {
                    d.iter_mut().for_each(|v| *v /= r);
                }
                let y = center.iter().zip(&d).map(|(&c, &u)| c + *radius * u).collect();
                (y, d)
            }
            Domain::Box { lo, hi } => {
                let n = lo.len();
                let mut y: Point<T> = x.iter().zip(lo).zip(hi).map(|((&p, &l), &h)| p.max(l).min(h)).collect();
                let mut normal = Point::from_elem(T::zero(), n);
                if self.contains(x) {
                    // nearest face
                    let (mut best, mut axis, mut upper) = (T::infinity(), 0, false);
                    for a in 0..n {
                        if x[a] - lo[a] < best {
                            best = x[a] - lo[a];
                            axis = a;
                            upper = false;
                        }
                        if hi[a] - x[a] < best {
                            best = hi[a] - x[a];
                            axis = a;
                            upper = true;
                        }
                    }
                    y[axis] = if upper { hi[axis] } else { lo[axis] };
                    normal[axis] = if upper { T::one() } else { -T::one() };
                } else {
                    // face of largest violation
                    let (mut best, mut axis, mut upper) = (-T::one(), 0, false);
                    for a in 0..n {
                        if lo[a] - x[a] > best {
                            best = lo[a] - x[a];
                            axis = a;
                            upper = false;
                        }
                        if x[a] - hi[a] > best {
                            best = x[a] - hi[a];
                            axis = a;
                            upper = true;
                        }
                    }
                    normal[axis] = if upper { T::one() } else { -T::one() };
                }
                (y, normal)
            }
        }
    }

    /// Distance from interior `x` to ∂Ω along the unit direction `w`.
    pub fn ray_exit(&self, x: &[T], w: &[T]) -> T {
        match self {
            Domain::Ball { center, radius } => {
                let d: Point<T> = x.iter().zip(center).map(|(&p, &c)| p - c).collect();
                let b = dot(&d, w);
                let c = dot(&d, &d) - *radius * *radius;
                let disc = (b * b - c).max(T::zero());
                (-b + disc.sqrt()).max(T::zero())
            }
            Domain::Box { lo, hi } => {
                let mut t = T::infinity();
                for a in 0..lo.len() {
                    if w[a] > T::zero() {
                        t = t.min((hi[a] - x[a]) / w[a]);
                    } else if w[a] < T::zero() {
                        t = t.min((lo[a] - x[a]) / w[a]);
                    }
                }
                t.max(T::zero())
            }
        }
    }

    /// |Ω|.
    pub fn measure(&self) -> T {
        match self {
            Domain::Ball { center, radius } => {
                let n = center.len();
                crate::transforms::unit_sphere_area::<T>(n) * radius.powi(n as i32) / T::from_usize_lossy(n)
            }
            Domain::Box { lo, hi } => lo.iter().zip(hi).fold(T::one(), |a, (&l, &h)| a * (h - l)),
        }
    }

    /// |∂Ω|.
    pub fn boundary_measure(&self) -> T {
        match self {
            Domain::Ball { center, radius } => {
                let n = center.len();
                crate::transforms::unit_sphere_area::<T>(n) * radius.powi(n as i32 - 1)
            }
            Domain::Box { lo, hi } => {
                let side: Vec<T> = lo.iter().zip(hi).map(|(&l, &h)| h - l).collect();
                let total = side.iter().fold(T::one(), |a, &s| a * s);
                side.iter().fold(T::zero(), |a, &s| a + T::lit(2.0) * total / s)
            }
        }
    }

    /// Radius of the largest inscribed ball.
    pub fn inradius(&self) -> T {
        match self {
            Domain::Ball { radius, .. } => *radius,
            Domain::Box { lo, hi } => lo.iter().zip(hi).fold(T::infinity(), |m, (&l, &h)| m.min(h - l)) * T::lit(0.5),
        }
    }

    /// Diameter of Ω.
    pub fn diameter(&self) -> T {
        match self {
            Domain::Ball { radius, .. } => T::lit(2.0) * *radius,
            Domain::Box { lo, hi } => {
                let d: Point<T> = lo.iter().zip(hi).map(|(&l, &h)| h - l).collect();
                norm2(&d)
            }
        }
    }

    fn fingerprint(&self, h: &mut Fnv) {
        match self {
            Domain::Ball { center, radius } => {
                h.write(1);
                center.iter().for_each(|c| h.write(c.to_f64_lossy().to_bits()));
                h.write(radius.to_f64_lossy().to_bits());
            }
            Domain::Box { lo, hi } => {
                h.write(2);
                lo.iter().chain(hi).for_each(|c| h.write(c.to_f64_lossy().to_bits()));
            }
        }
    }
}

struct Fnv(u64);

impl Fnv {
    fn new(kind: u64) -> Self {
        let mut h = Fnv(0xcbf2_9ce4_8422_2325);
        h.write(kind);
        h
    }

    fn write(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100_0000_01b3);
        }
    }
}

/// Identifies the node set of a mesh; sampled fields carry it so values are
/// only reused on the mesh they were sampled on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MeshKey(pub u64);

/// Parameters used to size the singular split around an evaluation point.
#[derive(Clone, Debug, PartialEq)]
enum Spacing<T> {
    Polar { dr: T, dtheta: T },
    Spherical { dr: T, dtheta: T, dphi: T },
    Uniform { diag: T },
}

/// Midpoint quadrature cells covering Ω.
#[derive(Clone, Debug)]
pub struct VolumeMesh<T> {
    domain: Domain<T>,
    resolution: usize,
    centers: Vec<T>,
    weights: Vec<T>,
    diameters: Vec<T>,
    spacing: Spacing<T>,
    key: MeshKey,
}

impl<T: Real> VolumeMesh<T> {
    pub fn new(domain: &Domain<T>, resolution: usize) -> Result<Self> {
        if resolution < 4 {
            return Err(Error::InvalidArgument(format!("volume resolution {resolution} < 4")));
        }
        let two_pi = T::TAU();
        let mut centers = Vec::new();
        let mut weights = Vec::new();
        let mut diameters = Vec::new();
        let nr = T::from_usize_lossy(resolution);
        let spacing = match domain {
            Domain::Ball { center, radius } if center.len() == 2 => {
                let dr = *radius / nr;
                let dt = two_pi / nr;
                for i in 0..resolution {
                    let r0 = dr * T::from_usize_lossy(i);
                    let r1 = r0 + dr;
                    let rm = (r0 + r1) * T::lit(0.5);
                    let w = (r1 * r1 - r0 * r0) * T::lit(0.5) * dt;
                    let diam = (dr * dr + r1 * r1 * dt * dt).sqrt();
                    for j in 0..resolution {
                        let t = dt * (T::from_usize_lossy(j) + T::lit(0.5));
                        centers.push(center[0] + rm * t.cos());
                        centers.push(center[1] + rm * t.sin());
                        weights.push(w);
                        diameters.push(diam);
                    }
                }
                Spacing::Polar { dr, dtheta: dt }
            }
            Domain::Ball { center, radius } if center.len() == 3 => {
                let dr = *radius / nr;
                let dt = T::PI() / nr;
                let dp = two_pi / nr;
                let third = T::one() / T::lit(3.0);
                for i in 0..resolution {
                    let r0 = dr * T::from_usize_lossy(i);
                    let r1 = r0 + dr;
                    let rm = (r0 + r1) * T::lit(0.5);
                    let radial = (r1.powi(3) - r0.powi(3)) * third;
                    for j in 0..resolution {
                        let t0 = dt * T::from_usize_lossy(j);
                        let t1 = t0 + dt;
                        let tm = (t0 + t1) * T::lit(0.5);
                        let polar = t0.cos() - t1.cos();
                        let arc = r1 * dt.max(t1.sin().max(t0.sin()) * dp);
                        let diam = (dr * dr + arc * arc).sqrt();
                        for k in 0..resolution {
                            let p = dp * (T::from_usize_lossy(k) + T::lit(0.5));
                            centers.push(center[0] + rm * tm.sin() * p.cos());
                            centers.push(center[1] + rm * tm.sin() * p.sin());
                            centers.push(center[2] + rm * tm.cos());
                            weights.push(radial * polar * dp);
                            diameters.push(diam);
                        }
                    }
                }
                Spacing::Spherical { dr, dtheta: dt, dphi: dp }
            }
            Domain::Box { lo, hi } if lo.len() == 2 || lo.len() == 3 => {
                let n = lo.len();
                let h: Point<T> = lo.iter().zip(hi).map(|(&l, &u)| (u - l) / nr).collect();
                let w = h.iter().fold(T::one(), |a, &s| a * s);
                let diag = norm2(&h);
                let total = resolution.pow(n as u32);
                for idx in 0..total {
                    let mut rem = idx;
                    for a in 0..n {
                        let i = rem % resolution;
                        rem /= resolution;
                        centers.push(lo[a] + h[a] * (T::from_usize_lossy(i) + T::lit(0.5)));
                    }
                    weights.push(w);
                    diameters.push(diag);
                }
                Spacing::Uniform { diag }
            }
            other => {
                return Err(Error::UnsupportedDomain(format!("{} in dimension {}", other.tag().name(), other.dim())))
            }
        };
        let mut h = Fnv::new(10);
        domain.fingerprint(&mut h);
        h.write(resolution as u64);
        Ok(VolumeMesh { domain: domain.clone(), resolution, centers, weights, diameters, spacing, key: MeshKey(h.0) })
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn key(&self) -> MeshKey {
        self.key
    }

    pub fn center(&self, i: usize) -> &[T] {
        let n = self.dim();
        &self.centers[i * n..(i + 1) * n]
    }

    pub fn centers(&self) -> impl Iterator<Item = &[T]> {
        self.centers.chunks_exact(self.dim())
    }

    pub fn weight(&self, i: usize) -> T {
        self.weights[i]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn diameter(&self, i: usize) -> T {
        self.diameters[i]
    }

    pub fn max_diameter(&self) -> T {
        self.diameters.iter().fold(T::zero(), |m, &d| m.max(d))
    }

    pub fn total_weight(&self) -> T {
        crate::real::pairwise_sum(&self.weights)
    }

    /// Size of the cells around `x`, varying smoothly with position.
    pub fn local_diameter(&self, x: &[T]) -> T {
        match &self.spacing {
            Spacing::Polar { dr, dtheta } => {
                let c = self.domain.centroid();
                let r2 = x.iter().zip(&c).fold(T::zero(), |a, (&p, &q)| a + (p - q) * (p - q));
                (*dr * *dr + r2 * *dtheta * *dtheta).sqrt()
            }
            Spacing::Spherical { dr, dtheta, dphi } => {
                let c = self.domain.centroid();
                let r2 = x.iter().zip(&c).fold(T::zero(), |a, (&p, &q)| a + (p - q) * (p - q));
                (*dr * *dr + r2 * (*dtheta * *dtheta).max(*dphi * *dphi)).sqrt()
            }
            Spacing::Uniform { diag } => *diag,
        }
    }

    /// `x_1,...,x_n,weight` rows.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut s = String::new();
        let cols: Vec<String> = (1..=n).map(|j| format!("x{j}")).collect();
        let _ = writeln!(s, "{},weight", cols.join(","));
        for (i, c) in self.centers().enumerate() {
            for v in c {
                let _ = write!(s, "{v},");
            }
            let _ = writeln!(s, "{}", self.weights[i]);
        }
        s
    }
}

/// Midpoint panels covering ∂Ω with outward unit normals.
#[derive(Clone, Debug)]
pub struct BoundaryMesh<T> {
    domain: Domain<T>,
    resolution: usize,
    centers: Vec<T>,
    normals: Vec<T>,
    areas: Vec<T>,
    diameters: Vec<T>,
    key: MeshKey,
}

impl<T: Real> BoundaryMesh<T> {
    /// `resolution` is the panel count for a circle, the number of latitude
    /// bands for a sphere (with twice as many longitude sectors), and the
    /// panels per edge for a box face.
    pub fn new(domain: &Domain<T>, resolution: usize) -> Result<Self> {
        if resolution < 8 {
            return Err(Error::InvalidArgument(format!("boundary resolution {resolution} < 8")));
        }
        let mut centers = Vec::new();
        let mut normals = Vec::new();
        let mut areas = Vec::new();
        let mut diameters = Vec::new();
        let nr = T::from_usize_lossy(resolution);
        match domain {
            Domain::Ball { center, radius } if center.len() == 2 => {
                let dt = T::TAU() / nr;
                for k in 0..resolution {
                    let t = dt * (T::from_usize_lossy(k) + T::lit(0.5));
                    let (s, c) = t.sin_cos();
                    centers.extend([center[0] + *radius * c, center[1] + *radius * s]);
                    normals.extend([c, s]);
                    areas.push(*radius * dt);
                    diameters.push(*radius * dt);
                }
            }
            Domain::Ball { center, radius } if center.len() == 3 => {
                let dt = T::PI() / nr;
                let nphi = 2 * resolution;
                let dp = T::TAU() / T::from_usize_lossy(nphi);
                for j in 0..resolution {
                    let t0 = dt * T::from_usize_lossy(j);
                    let t1 = t0 + dt;
                    let tm = (t0 + t1) * T::lit(0.5);
                    let area = *radius * *radius * (t0.cos() - t1.cos()) * dp;
                    let arc = *radius * dt.max(t0.sin().max(t1.sin()) * dp);
                    let diam = (*radius * *radius * dt * dt + arc * arc).sqrt();
                    for k in 0..nphi {
                        let p = dp * (T::from_usize_lossy(k) + T::lit(0.5));
                        let u = [tm.sin() * p.cos(), tm.sin() * p.sin(), tm.cos()];
                        for a in 0..3 {
                            centers.push(center[a] + *radius * u[a]);
                            normals.push(u[a]);
                        }
                        areas.push(area);
                        diameters.push(diam);
                    }
                }
            }
            Domain::Box { lo, hi } if lo.len() == 2 || lo.len() == 3 => {
                let n = lo.len();
                let h: Point<T> = lo.iter().zip(hi).map(|(&l, &u)| (u - l) / nr).collect();
                let per_face = resolution.pow(n as u32 - 1);
                for axis in 0..n {
                    let others: Vec<usize> = (0..n).filter(|&a| a != axis).collect();
                    let area = others.iter().fold(T::one(), |a, &o| a * h[o]);
                    let diam = norm2(&others.iter().map(|&o| h[o]).collect::<Point<T>>());
                    for upper in [false, true] {
                        for idx in 0..per_face {
                            let mut rem = idx;
                            let mut p = Point::from_elem(T::zero(), n);
                            p[axis] = if upper { hi[axis] } else { lo[axis] };
                            for &o in &others {
                                let i = rem % resolution;
                                rem /= resolution;
                                p[o] = lo[o] + h[o] * (T::from_usize_lossy(i) + T::lit(0.5));
                            }
                            centers.extend(p.iter().copied());
                            for a in 0..n {
                                normals.push(if a != axis {
                                    T::zero()
                                } else if upper {
                                    T::one()
                                } else {
                                    -T::one()
                                });
                            }
                            areas.push(area);
                            diameters.push(diam);
                        }
                    }
                }
            }
            other => {
                return Err(Error::UnsupportedDomain(format!("{} in dimension {}", other.tag().name(), other.dim())))
            }
        }
        let mut h = Fnv::new(20);
        domain.fingerprint(&mut h);
        h.write(resolution as u64);
        Ok(BoundaryMesh { domain: domain.clone(), resolution, centers, normals, areas, diameters, key: MeshKey(h.0) })
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn key(&self) -> MeshKey {
        self.key
    }

    pub fn center(&self, i: usize) -> &[T] {
        let n = self.dim();
        &self.centers[i * n..(i + 1) * n]
    }

    pub fn normal(&self, i: usize) -> &[T] {
        let n = self.dim();
        &self.normals[i * n..(i + 1) * n]
    }

    pub fn centers(&self) -> impl Iterator<Item = &[T]> {
        self.centers.chunks_exact(self.dim())
    }

    pub fn area(&self, i: usize) -> T {
        self.areas[i]
    }

    pub fn areas(&self) -> &[T] {
        &self.areas
    }

    pub fn diameter(&self, i: usize) -> T {
        self.diameters[i]
    }

    pub fn max_diameter(&self) -> T {
        self.diameters.iter().fold(T::zero(), |m, &d| m.max(d))
    }

    pub fn total_area(&self) -> T {
        crate::real::pairwise_sum(&self.areas)
    }

    /// `x_1,...,x_n,area,nu_1,...,nu_n` rows.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut s = String::new();
        let xs: Vec<String> = (1..=n).map(|j| format!("x{j}")).collect();
        let nus: Vec<String> = (1..=n).map(|j| format!("nu{j}")).collect();
        let _ = writeln!(s, "{},area,{}", xs.join(","), nus.join(","));
        for i in 0..self.len() {
            for v in self.center(i) {
                let _ = write!(s, "{v},");
            }
            let _ = write!(s, "{}", self.areas[i]);
            for v in self.normal(i) {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}

/// Panel count matching a volume resolution: `4N` on the circle, `N`
/// latitude bands on the sphere, `N` panels per box edge.
pub fn boundary_resolution_for(tag: DomainTag, volume_resolution: usize) -> usize {
    match tag {
        DomainTag::Disk => 4 * volume_resolution,
        DomainTag::Ball | DomainTag::Box => volume_resolution.max(8),
    }
}

/// Default resolution: 64 in the plane, 24 in space.
pub fn default_resolution(dim: usize) -> usize {
    if dim == 2 {
        64
    } else {
        24
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_area() {
        let m = VolumeMesh::<f64>::new(&Domain::unit_disk(), 64).unwrap();
        assert_eq!(m.len(), 64 * 64);
        let rel = (m.total_weight() - std::f64::consts::PI).abs() / std::f64::consts::PI;
        assert!(rel < 5e-3, "{rel}");
        assert!(m.centers().all(|c| Domain::unit_disk().contains(c)));
        assert!(m.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn unit_box_cells() {
        let m = VolumeMesh::<f64>::new(&Domain::unit_box(2), 10).unwrap();
        assert_eq!(m.len(), 100);
        assert!(m.weights().iter().all(|&w| (w - 0.01).abs() < 1e-15));
    }

    #[test]
    fn ball_volume() {
        let m = VolumeMesh::<f64>::new(&Domain::unit_ball(), 32).unwrap();
        let v = 4.0 * std::f64::consts::PI / 3.0;
        assert!((m.total_weight() - v).abs() / v < 5e-3);
    }

    #[test]
    fn circle_panels() {
        let b = BoundaryMesh::<f64>::new(&Domain::unit_disk(), 256).unwrap();
        assert_eq!(b.len(), 256);
        for i in 0..b.len() {
            assert!((b.area(i) - std::f64::consts::TAU / 256.0).abs() < 1e-15);
            let c = b.center(i);
            let nu = b.normal(i);
            assert!((c[0] - nu[0]).abs() < 1e-15 && (c[1] - nu[1]).abs() < 1e-15);
            assert!((norm2(c) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_panels() {
        let b = BoundaryMesh::<f64>::new(&Domain::unit_ball(), 24).unwrap();
        assert_eq!(b.len(), 1152);
        let s = 4.0 * std::f64::consts::PI;
        assert!((b.total_area() - s).abs() / s < 5e-3);
        for i in 0..b.len() {
            assert!((norm2(b.normal(i)) - 1.0).abs() < 1e-12);
            assert!((norm2(b.center(i)) - 1.0).abs() < 1e-12);
            assert!(dot(b.normal(i), b.center(i)) > 0.0);
        }
    }

    #[test]
    fn box_faces() {
        let d = Domain::<f64>::unit_box(3);
        let b = BoundaryMesh::new(&d, 8).unwrap();
        assert_eq!(b.len(), 6 * 64);
        assert!((b.total_area() - 6.0).abs() < 1e-12);
        let c = d.centroid();
        for i in 0..b.len() {
            let nu = b.normal(i);
            assert_eq!(nu.iter().filter(|v| v.abs() == 1.0).count(), 1);
            let rel: Vec<f64> = b.center(i).iter().zip(&c).map(|(a, b)| a - b).collect();
            assert!(dot(nu, &rel) > 0.0);
        }
    }

    #[test]
    fn refinement_improves_ball_volume() {
        // exact cell measures: the sum matches to rounding at every level
        let v = 4.0 * std::f64::consts::PI / 3.0;
        for n in [8, 16] {
            let m = VolumeMesh::<f64>::new(&Domain::unit_ball(), n).unwrap();
            assert!((m.total_weight() - v).abs() < 1e-12);
        }
    }

    #[test]
    fn resolution_limits() {
        assert!(VolumeMesh::<f64>::new(&Domain::unit_disk(), 3).is_err());
        assert!(BoundaryMesh::<f64>::new(&Domain::unit_disk(), 7).is_err());
        assert!(Domain::<f64>::from_tag(DomainTag::Disk, 3).is_err());
    }

    #[test]
    fn ray_exit_and_projection() {
        let d = Domain::<f64>::unit_disk();
        assert!((d.ray_exit(&[0.5, 0.0], &[1.0, 0.0]) - 0.5).abs() < 1e-15);
        assert!((d.ray_exit(&[0.5, 0.0], &[-1.0, 0.0]) - 1.5).abs() < 1e-15);
        let (y, nu) = d.project(&[0.0, 0.3]);
        assert_eq!((y[1], nu[1]), (1.0, 1.0));
        let b = Domain::<f64>::unit_box(2);
        assert!((b.ray_exit(&[0.25, 0.5], &[-1.0, 0.0]) - 0.25).abs() < 1e-15);
        let (y, nu) = b.project(&[0.1, 0.5]);
        assert_eq!((y[0], nu[0]), (0.0, -1.0));
        assert!((b.signed_distance(&[1.3, 0.5]) + 0.3).abs() < 1e-12);
    }

    #[test]
    fn csv_dump_has_header() {
        let b = BoundaryMesh::<f64>::new(&Domain::unit_disk(), 8).unwrap();
        let csv = b.to_csv();
        assert!(csv.starts_with("x1,x2,area,nu1,nu2\n"));
        assert_eq!(csv.lines().count(), 9);
    }
}
