//! Super-resolution of clustered point sources from band-limited Fourier
//! samples.
//!
//! The pipeline ([`dmusic::run`]) finds the coarse cluster structure with
//! subsampled MUSIC ([`cluster`]), splits the global measurement into one
//! local measurement per cluster with a multipole least-squares fit
//! ([`multipole`]), and runs MUSIC on each local measurement
//! ([`hankel_music`]). [`bench`] holds the Monte-Carlo experiments and
//! [`bounds_oracle`] numerical checks of the supporting inequalities.
//!
//! Algorithms are generic over [`scalar::Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64` or `f32`.

// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod bounds_oracle;
pub mod cluster;
pub mod dmusic;
pub mod error;
pub mod hankel_music;
pub mod io;
pub mod linalg;
pub mod model;
pub mod multipole;
pub mod scalar;

pub use cluster::{detect_clusters, detect_clusters_with, ClusterEstimate, DetectParams};
pub use dmusic::{run, PipelineConfig, PipelineReport};
pub use error::{Error, Result};
pub use hankel_music::{music, music_with_prior, select_peaks, ImagingResult, MusicOptions, MusicOutcome, PeakParams};
pub use model::{modulate, random_instance, synthesize, ClusterRegion, InstanceSpec, SampledMeasurement, Source, SourceMeasure};
pub use multipole::{decouple, multipole_order, DecoupleConfig, DecoupleResult, MultipoleBasis};
pub use scalar::Real;

pub type Measurement = SampledMeasurement<f64>;
pub type Measure = SourceMeasure<f64>;
pub type Region = ClusterRegion<f64>;
pub type Config = PipelineConfig<f64>;
pub type Report = PipelineReport<f64>;
pub type Decoupling = DecoupleResult<f64>;
pub type Clusters = ClusterEstimate<f64>;

pub type Measurement32 = SampledMeasurement<f32>;
pub type Measure32 = SourceMeasure<f32>;
pub type Region32 = ClusterRegion<f32>;
pub type Config32 = PipelineConfig<f32>;
pub type Report32 = PipelineReport<f32>;
pub type Decoupling32 = DecoupleResult<f32>;
pub type Clusters32 = ClusterEstimate<f32>;
