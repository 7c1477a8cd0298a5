//! Compressed storage for time-evolving integer rasters.
//!
//! A [`TK2Raster`] keeps a [`K2Raster`] snapshot every `t_delta` instants
//! and encodes the instants in between as difference trees against their
//! snapshot. Cell lookups and windowed value-range searches run directly on
//! the compressed trees.
//!
//! ```
//! use traster::{Raster, TK2Raster, Window};
//!
//! let a = Raster::from_rows(&[vec![1, 1], vec![2, 3]]).unwrap();
//! let b = Raster::from_rows(&[vec![1, 2], vec![2, 3]]).unwrap();
//! let tk = TK2Raster::build(&[a, b], 2, 6).unwrap();
//! assert_eq!(tk.get_cell_value(0, 1, 1).unwrap(), 2);
//! let hits = tk.get_cells(2, 2, Window::new(0, 1, 0, 1), 1).unwrap();
//! assert_eq!(hits.len(), 2);
//! ```

pub mod bench;
pub mod bitvector;
pub mod dataio;
pub mod error;
mod geometry;
pub mod intcodes;
pub mod k2raster;
pub mod oracle;
pub mod raster;
pub mod tk2raster;

pub use bitvector::RankBitVector;
pub use error::{Error, Result};
pub use intcodes::{zigzag_decode, zigzag_encode, DacSequence};
pub use k2raster::{K2Raster, K2RasterStats};
pub use oracle::DenseSeries;
pub use raster::{Cell, Raster, ValueRange, Window};
pub use tk2raster::{Frame, K2RasterDelta, SnapshotPolicy, TK2Raster, TK2RasterStats};
