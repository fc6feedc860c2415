//! Encoder/decoder construction, parameter accounting and width solving.

mod config;
mod model;
mod params;
mod representation;
mod schedule;
mod sizing;

pub use config::{EmbeddingSpec, HNeRVConfig, PRESETS};
pub use model::{BlockSpec, ConvSpec, DecoderSpec, EncoderSpec, EncoderStage};
pub use params::{ParamMap, ParamMasks, VarMap};
pub use representation::VideoRepresentation;
pub use schedule::{channel_schedule, kernel_schedule, ChannelSchedule};
pub use sizing::{rebalance_report, solve_width, total_size, RebalanceRow, RebalanceVariant, WidthSolution};
