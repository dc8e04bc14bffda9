//! Graphs, graph products and normalized spectra.

mod eigen;
mod graph;
mod products;

pub use eigen::{
    lambda, lanczos_extremes, normalized_spectrum, symmetric_eigen, symmetric_eigenvalues, Method,
    SpectralOptions, SpectralReport,
};
pub use graph::{NormalizedOperator, WeightedGraph};
pub use products::{
    cartesian_product, cayley_graph, johnson_graph, johnson_lambda, replacement_product,
    walk_graph, zigzag_function, ReplacementProduct,
};
