//! End-to-end D-MUSIC: detect clusters on a subsample, decouple the global
//! measurement into local measurements, and run MUSIC with a prior on each
//! cluster. Whenever a stage fails the whole measurement goes through MUSIC
//! with the initial interval as prior instead.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cluster::{detect_clusters_with, ClusterEstimate, DetectParams, DEFAULT_LAMBDA};
use crate::error::{Error, Result};
use crate::hankel_music::{
    music_with_prior_outcome, MusicOptions, DEFAULT_MIN_SUBGRID_SAMPLES, DEFAULT_ORDER_CONSTANT,
};
use crate::model::{modulate, SampledMeasurement};
use crate::multipole::{decouple, DecoupleConfig, DecoupleResult, DEFAULT_C_MEA, DEFAULT_C_MSF};
use crate::scalar::Real;

/// Pipeline parameters. Lengths are spatial (same units as source locations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(serialize = "T: Serialize", deserialize = "T: DeserializeOwned + Real"))]
pub struct PipelineConfig<T: Real> {
    /// Noise level.
    pub sigma: T,
    /// Shrinkage factor for cluster detection.
    pub lambda: T,
    /// Further shrinkage factors tried when detection finds nothing.
    pub lambda_ladder: Vec<T>,
    /// Center of the initial interval known to contain every source.
    pub o_init: T,
    /// Half-width of the initial interval; `None` uses the unaliased range
    /// `pi / (Omega * grid spacing)`.
    pub d_init: Option<T>,
    pub tps_cluster: T,
    pub tps_source: T,
    /// Expected cluster half-width; `None` means `pi / Omega`.
    pub cluster_half_width: Option<T>,
    /// Interval combining threshold; `None` means twice the expected cluster half-width.
    pub ict: Option<T>,
    pub c_mea: T,
    pub c_msf: T,
    /// Total variation assumed for the multipole count.
    pub m: T,
    /// Fixed multipole count.
    pub order_override: Option<usize>,
    pub c_order: T,
    pub min_subgrid_samples: usize,
    pub redistribute_residual: bool,
    pub modulated: bool,
}

impl<T: Real> Default for PipelineConfig<T> {
    fn default() -> Self {
        Self {
            sigma: T::lit(1e-3),
            lambda: T::lit(DEFAULT_LAMBDA),
            lambda_ladder: Vec::new(),
            o_init: T::zero(),
            d_init: None,
            tps_cluster: T::lit(0.1),
            tps_source: T::lit(0.01),
            cluster_half_width: None,
            ict: None,
            c_mea: T::lit(DEFAULT_C_MEA),
            c_msf: T::lit(DEFAULT_C_MSF),
            m: T::one(),
            order_override: None,
            c_order: T::lit(DEFAULT_ORDER_CONSTANT),
            min_subgrid_samples: DEFAULT_MIN_SUBGRID_SAMPLES,
            redistribute_residual: true,
            modulated: true,
        }
    }
}

impl<T: Real> PipelineConfig<T> {
    pub fn new(sigma: T) -> Self {
        Self { sigma, ..Self::default() }
    }

    /// Checks ranges; the error names the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} must be positive, got {v}")))
            }
        };
        positive("sigma", self.sigma)?;
        positive("tps_cluster", self.tps_cluster)?;
        positive("tps_source", self.tps_source)?;
        positive("c_mea", self.c_mea)?;
        positive("c_order", self.c_order)?;
        positive("m", self.m)?;
        for &l in std::iter::once(&self.lambda).chain(&self.lambda_ladder) {
            if !(l > T::zero() && l <= T::one()) {
                return Err(Error::InvalidInput(format!("lambda must lie in (0, 1], got {l}")));
            }
        }
        if !(self.c_msf > T::zero() && self.c_msf < T::one()) {
            return Err(Error::InvalidInput(format!("c_msf must lie in (0, 1), got {}", self.c_msf)));
        }
        if let Some(d) = self.d_init {
            positive("d_init", d)?;
        }
        if let Some(d) = self.cluster_half_width {
            positive("cluster_half_width", d)?;
        }
        if let Some(ict) = self.ict {
            positive("ict", ict)?;
        }
        if self.order_override == Some(0) {
            return Err(Error::InvalidInput("order_override must be positive".into()));
        }
        Ok(())
    }

    /// Resolved initial half-width for a measurement.
    pub fn initial_half_width(&self, meas: &SampledMeasurement<T>) -> T {
        self.d_init.unwrap_or_else(|| T::pi() / (meas.omega() * meas.spacing()))
    }

    /// Resolved interval combining threshold.
    pub fn resolved_ict(&self, omega: T) -> T {
        self.ict
            .unwrap_or_else(|| T::lit(2.0) * self.cluster_half_width.unwrap_or_else(|| T::pi() / omega))
    }

    pub fn music_options(&self) -> MusicOptions<T> {
        MusicOptions {
            c_order: self.c_order,
            min_subgrid_samples: self.min_subgrid_samples,
            ..MusicOptions::default()
        }
    }

    pub fn decouple_config(&self) -> DecoupleConfig<T> {
        DecoupleConfig {
            c_mea: self.c_mea,
            c_msf: self.c_msf,
            m: self.m,
            modulated: self.modulated,
            redistribute_residual: self.redistribute_residual,
            order_override: self.order_override,
        }
    }
}

/// Outcome of [`run`].
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct PipelineReport<T: Real> {
    /// Recovered source locations, ascending.
    pub locations: Vec<T>,
    pub decouple_success: bool,
    /// True when the locations come from MUSIC on the full measurement.
    pub fallback: bool,
    pub cluster_estimate: Option<ClusterEstimate<T>>,
    /// Wall time per stage in seconds.
    pub stage_times: BTreeMap<String, f64>,
    pub residual_norm: Option<T>,
    pub multipole_count: Option<usize>,
    pub warnings: Vec<String>,
    /// Not serialized; kept for diagnostics.
    #[serde(skip)]
    pub decoupling: Option<DecoupleResult<T>>,
}

impl<T: Real> PipelineReport<T> {
    /// Sum of all stage times.
    pub fn total_time(&self) -> f64 {
        self.stage_times.values().sum()
    }
}

/// Runs the full pipeline on an unmodulated measurement.
///
/// Only configuration problems and unusable measurements are returned as
/// errors; failures of detection, decoupling or per-cluster recovery switch to
/// the fallback and are listed in `warnings`.
pub fn run<T: Real>(meas: &SampledMeasurement<T>, config: &PipelineConfig<T>) -> Result<PipelineReport<T>> {
    config.validate()?;
    if meas.is_modulated() {
        return Err(Error::InvalidState("pipeline input must be unmodulated".into()));
    }
    let omega = meas.omega();
    let d_init = config.initial_half_width(meas);
    let mut report = PipelineReport {
        locations: Vec::new(),
        decouple_success: false,
        fallback: false,
        cluster_estimate: None,
        stage_times: BTreeMap::new(),
        residual_norm: None,
        multipole_count: None,
        warnings: Vec::new(),
        decoupling: None,
    };

    let clock = Instant::now();
    let mut detect = DetectParams::new(
        config.lambda,
        config.o_init,
        d_init,
        config.tps_cluster,
        config.resolved_ict(omega),
        config.sigma,
    );
    detect.lambdas.extend(config.lambda_ladder.iter().copied());
    detect.music = config.music_options();
    let detected = detect_clusters_with(meas, &detect);
    report.stage_times.insert("detect".into(), clock.elapsed().as_secs_f64());

    let estimate = match detected {
        Ok(est) => est,
        Err(e) => {
            report.warnings.push(format!("cluster detection failed: {e}"));
            return fallback(meas, config, d_init, report);
        }
    };
    report.cluster_estimate = Some(estimate.clone());

    let clock = Instant::now();
    let decoupled = (if config.modulated { modulate(meas) } else { Ok(meas.clone()) }).and_then(|input| {
        decouple(
            &input,
            &estimate.merged_centers,
            estimate.max_half_width(),
            config.sigma,
            &config.decouple_config(),
        )
    });
    report.stage_times.insert("decouple".into(), clock.elapsed().as_secs_f64());
    let decoupled = match decoupled {
        Ok(d) => d,
        Err(e) => {
            report.warnings.push(format!("decoupling failed: {e}"));
            return fallback(meas, config, d_init, report);
        }
    };
    report.residual_norm = Some(decoupled.residual_norm);
    report.multipole_count = Some(decoupled.multipole_count);
    report.decouple_success = decoupled.success;
    if let Some(w) = &decoupled.conditioning_warning {
        report.warnings.push(w.clone());
    }
    if !decoupled.success {
        report
            .warnings
            .push(format!("decoupling residual {} exceeds C_mea * sigma", decoupled.residual_norm));
        report.decoupling = Some(decoupled);
        return fallback(meas, config, d_init, report);
    }

    let clock = Instant::now();
    let options = config.music_options();
    let d = estimate.interval_radius;
    let per_cluster: Vec<Result<Vec<T>>> = decoupled
        .local_measurements
        .par_iter()
        .zip(estimate.merged_centers.par_iter().zip(estimate.merged_half_widths.par_iter()))
        .map(|(local, (&center, &half_width))| {
            music_with_prior_outcome(local, center, half_width.max(d), config.tps_source, config.sigma, &options)
                .map(|o| o.locations)
        })
        .collect();
    report.stage_times.insert("local_music".into(), clock.elapsed().as_secs_f64());
    report.decoupling = Some(decoupled);

    let mut locations = Vec::new();
    for (j, r) in per_cluster.into_iter().enumerate() {
        match r {
            Ok(mut locs) => locations.append(&mut locs),
            Err(e) => {
                report.warnings.push(format!("local recovery failed for cluster {j}: {e}"));
                return fallback(meas, config, d_init, report);
            }
        }
    }
    locations.sort_by(|a, b| a.partial_cmp(b).expect("finite locations"));
    report.locations = locations;
    Ok(report)
}

fn fallback<T: Real>(
    meas: &SampledMeasurement<T>,
    config: &PipelineConfig<T>,
    d_init: T,
    mut report: PipelineReport<T>,
) -> Result<PipelineReport<T>> {
    let clock = Instant::now();
    let outcome = music_with_prior_outcome(
        meas,
        config.o_init,
        d_init,
        config.tps_source,
        config.sigma,
        &config.music_options(),
    )?;
    report.stage_times.insert("fallback_music".into(), clock.elapsed().as_secs_f64());
    let mut locations = outcome.locations;
    locations.sort_by(|a, b| a.partial_cmp(b).expect("finite locations"));
    report.locations = locations;
    report.fallback = true;
    Ok(report)
}
