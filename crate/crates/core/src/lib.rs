//! Numerical Clifford analysis: the algebra `Cl_n`, Clifford-valued fields,
//! the Dirac operator, Teodorescu and Cauchy transforms, Sobolev-type norms,
//! and representation-formula solvers for first- and second-order boundary
//! value problems on the disk, the ball and boxes.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod bvp;
pub mod catalog;
pub mod clifford;
pub mod error;
pub mod field;
pub mod mesh;
pub mod norms;
pub mod real;
pub mod transforms;

pub use clifford::{blade_product, embed_vector, mv_conj, mv_mul, mv_norm, vector_inverse, BladeIndex, Multivector};
pub use error::{Error, Result};
pub use field::{CliffordField, MultiIndex};
pub use mesh::{BoundaryMesh, Domain, DomainTag, MeshKey, VolumeMesh};
pub use real::Real;
pub use transforms::{fundamental_solution, TransformConfig};

pub type Multivector64 = Multivector<f64>;
pub type CliffordField64 = CliffordField<f64>;
pub type Domain64 = Domain<f64>;
pub type VolumeMesh64 = VolumeMesh<f64>;
pub type BoundaryMesh64 = BoundaryMesh<f64>;
