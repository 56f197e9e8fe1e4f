//! Construction and numerical verification of generalized almost contact,
//! generalized contact-metric and generalized Sasakian structures on
//! coordinate charts, together with their cone lifts and f-extensions.

pub mod calculus;
pub mod cone;
pub mod deformations;
pub mod expr;
pub mod gallery;
pub mod gta;
pub mod integrability;
pub mod jet;
pub mod linalg;
pub mod report;
pub mod structures;
pub mod suite;

pub use jet::C64;
