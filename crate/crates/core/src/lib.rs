//! Magnetic polarizability tensors (MPTs) of multiple and inhomogeneous
//! conducting, permeable objects.
//!
//! The pipeline runs mesh → fem → mpt for tensors, `forward` for the
//! leading-order field perturbation, and `inverse` for multistatic response
//! synthesis, MUSIC localization and dictionary classification.

pub mod cli;
pub mod error;
pub mod fem;
pub mod forward;
pub mod inverse;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod mpt;
pub mod tensor;

pub use error::{MptError, Result};
pub use model::{compute_nu, validate_scene, Material, ObjectInstance, Scene, MU0};
pub use tensor::ComplexTensor2;

pub use num_complex::Complex64;
