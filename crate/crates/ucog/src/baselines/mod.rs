//! PCA and SOM dimensionality-reduction baselines for the comparison
//! harness. Both are deliberately minimal: enough to reduce a desk-scale
//! dataset reproducibly, not to compete with mature libraries.

pub mod linalg;
pub mod pca;
pub mod som;

pub use pca::PcaModel;
pub use som::{SomEncoding, SomModel};
