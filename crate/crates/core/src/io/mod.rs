//! Run configuration, binary formats and image export.

pub mod config;
pub mod export;
pub mod format;

pub use config::{parse_config, NoiseConfig, RunConfig, EXAMPLE_CONFIG};
pub use export::{export_slices, pixel_value, DEFAULT_FLOOR_DB};
pub use format::{read_beat_cube, read_volume, write_beat_cube, write_volume};
