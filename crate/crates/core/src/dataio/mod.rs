//! File formats, serialization and synthetic data generation.

pub mod codec;
pub mod container;
pub mod generate;
pub mod grid;

pub use container::{
    deserialize, deserialize_any, deserialize_k2raster, read_container, serialize, serialize_k2raster, write_container,
    Container,
};
pub use generate::{gen_interpolated, gen_random_smooth, gen_series, GenConfig};
pub use grid::{decode_grid, encode_grid, parse_csv_frame, read_csv_frame, read_grid, write_grid};
