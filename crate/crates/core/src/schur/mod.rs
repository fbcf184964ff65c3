//! Schur-Weyl machinery: partitions and tableaux, the Young orthogonal
//! representation, canonical Schur transforms, and the bipartite tensor-power
//! decomposition.

pub mod decompose;
pub mod transform;
pub mod young;

pub use decompose::{bipartite_power_decompose, PowerComponent, PowerDecomposition};
pub use transform::{max_entangled_p, schur_transform, schur_transform_with_caps, SchurBlock, SchurCaps, SchurTransform};
pub use young::{
    dim_sym, dim_unitary, partitions, standard_tableaux, symmetric_group,
    young_orthogonal_matrix, StandardTableau, YoungDiagram,
};
