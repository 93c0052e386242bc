//! Environment sampling: user drops, multipath channels, CSI impairments and
//! buffers.

mod buffers;
mod channel;
mod config;
mod env;
mod geometry;
mod impairments;
pub mod record;

pub use buffers::{sample_buffers, BufferState};
pub use channel::{sample_aged_pair, sample_channel, sample_multipath, ChannelTensor, Multipath, Ray};
pub use config::{
    ChannelConfig, EnvironmentConfig, GeometryConfig, ImpairmentConfig, PathLossParams,
    ScenarioTag, SPEED_OF_LIGHT, SUBCARRIERS_PER_PRB, SYMBOLS_PER_TTI,
};
pub use env::{init_average_rates, sample_environment, EnvironmentState, AVG_RATE_FLOOR_BPS};
pub use geometry::{sample_geometry, UserPosition};
pub use impairments::{apply_estimation_noise, estimation_noise_variance};
