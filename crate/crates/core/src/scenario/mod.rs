//! Static world: grid geometry, BS/UE placement, UAV missions, RB allocation
//! and configuration.

pub mod config;
pub mod grid;
pub mod world;

pub use config::{AltitudeMode, BaselineConfig, EsnParams, FadingMode, MissionConfig, ScenarioConfig, UtilityWeights};
pub use grid::{CellPos, Grid, Point};
pub use world::{
    allocate_rbs, build_episode_world, build_world, nearest_bs_list, rng_stream, BaseStation, Device, FadingTable,
    GroundUe, Mission, UavState, World,
};
