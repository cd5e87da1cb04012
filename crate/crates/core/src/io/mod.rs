//! Config files, presets and exporters.

mod config;
mod history;
pub mod presets;
mod vtk;

pub use config::{parse_config, serialize_config, REQUIRED_KEYS};
pub use history::{export_history, history_string, parse_history, HistoryRow};
pub use presets::{preset, PRESET_NAMES};
pub use vtk::{export_vtk, vtk_string, Field};
