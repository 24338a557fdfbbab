//! Ising-model priors over item graphs.

mod graph;
mod ising;

pub use graph::{
    build_block, build_grid, induced_subgraph, load_edge_list, parse_edge_list, perturb_edges,
    subsample_indices, subsample_vertices, write_edge_list, ItemGraph,
};
pub use ising::{IsingPrior, ENUMERATION_LIMIT};
