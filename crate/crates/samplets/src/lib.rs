//! Samplets: discrete signed measures with vanishing polynomial moments,
//! built over a cluster tree of scattered data sites.
//!
//! The crate provides
//!
//! * point-set ingestion (CSV/XYZ/PGM) and bounding geometry ([`points`]),
//! * balanced `2^d`-trees by dyadic bounding-box subdivision ([`tree`]),
//! * samplet bases with `q + 1` vanishing moments, constructed per cluster
//!   by QR factorization of moment matrices ([`basis`]),
//! * the linear-time forward and inverse samplet transform ([`transform`]),
//! * local Hölder exponent estimation from the decay of samplet coefficient
//!   norms along root-to-leaf branches ([`smoothness`]),
//! * closed-form synthetic test signals ([`signals`]).
//!
//! The typical pipeline is: load or synthesize a [`points::PointSet`], build
//! a [`tree::ClusterTree`], build a [`basis::SampletBasis`], push the sample
//! values through [`transform::forward`], and hand the coefficients to
//! [`smoothness::compute_exponents`] to obtain a per-point smoothness chart.

pub mod basis;
pub mod error;
pub mod linalg;
pub mod points;
pub mod signals;
pub mod smoothness;
pub mod stats;
pub mod transform;
pub mod tree;

mod par;
mod rng;

pub use error::{Error, Result};
