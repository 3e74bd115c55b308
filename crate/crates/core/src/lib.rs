//! Topological detection of singular regions in point clouds.
//!
//! The crate computes two per-point quantities:
//!
//! * the *persistent intrinsic dimension* (PID), obtained by scanning a grid
//!   of annulus radii around a point and recording the highest homology
//!   degree that carries persistent features ([`pid`]);
//! * the *Euclidicity* score, the mean bottleneck distance between the
//!   Vietoris–Rips barcodes of a point's annuli and those of uniform samples
//!   from Euclidean annuli of the same size ([`euclidicity`]).
//!
//! Everything here is pure computation and only needs `alloc`; file formats,
//! thread pools and the command line front-end live in the `tardis` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod datasets;
pub mod error;
pub mod euclidicity;
pub mod exec;
pub mod matching;
pub mod persistence;
pub mod pid;
pub mod pointcloud;
pub mod sampler;
pub mod vr;

pub use error::{Error, Result};
pub use euclidicity::{EuclidicityReport, ParameterGrid};
pub use persistence::{BarcodeSet, Interval, PersistenceDiagram};
pub use pid::PidProfile;
pub use pointcloud::{AnnulusSelection, FiniteMetric, PointCloud};
pub use vr::{DistanceMatrix, Filtration, Simplex};
