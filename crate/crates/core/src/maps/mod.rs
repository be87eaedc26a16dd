//! Piecewise-linear chaotic maps: the general N-ary construction and the
//! eight binary modes used by the coder.

mod modes;
mod piecewise;

pub use modes::{bcac_params, twin_mode, Affine, BcacParams, MapMode};
pub use piecewise::{
    build_nary_map, key_bits, keyspace_size, map_forward, LinearPiece, NaryMapSpec, Orientation,
    SymbolModel,
};
