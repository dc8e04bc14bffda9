//! Construction and spectral verification of transitive bounded-degree
//! 2-dimensional expander complexes.
//!
//! The crate is layered bottom-up:
//!
//! * [`groups`]: finite groups frozen to integer element indices.
//! * [`complexes`]: pure 2-complexes, colorings, links, property Inv, HPOWER.
//! * [`spectra`]: graphs, graph products and the eigensolver.
//! * [`schreier`]: Schreier complexes, commutative triplet structures (CTS),
//!   the lift check and the zig-zag bound.
//! * [`hdz`]: the HDZ pipeline over products of groups.
//! * [`constructions`]: Conlon and 3-product instances, transitivity and link
//!   certificates.
//!
//! Combinatorial objects are integral. Spectral quantities are generic over
//! [`Scalar`]; the aliases at the crate root fix them to `f64`, which is what
//! every verification path uses.

pub mod complexes;
pub mod constructions;
pub mod error;
pub mod groups;
pub mod hdz;
pub mod iso;
pub mod rng;
pub mod scalar;
pub mod schreier;
pub mod spectra;

pub use complexes::{Coloring, TwoComplex};
pub use error::{HdxError, Result};
pub use groups::{FiniteGroup, GeneratorSet, GroupDescriptor};
pub use scalar::Scalar;
pub use schreier::{CtsInstance, ValidationRecord};
pub use spectra::WeightedGraph;

pub type SpectralReport = spectra::SpectralReport<f64>;
pub type SpectralReport32 = spectra::SpectralReport<f32>;
pub type SpectralOptions = spectra::SpectralOptions<f64>;
pub type SpectralOptions32 = spectra::SpectralOptions<f32>;
pub type BoundCheck = schreier::BoundCheck<f64>;

/// Version string embedded in reports and metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
