//! Coarse cluster-structure detection from a band-limited subsample.
//!
//! MUSIC is run on the low-frequency part `|x| <= lambda` of the measurement.
//! At that reduced resolution each cluster shows up as one or a few peaks
//! `c_j`; every peak is widened to `[c_j - d, c_j + d]` and peaks closer than
//! the interval combining threshold (ICT) are chained into one cluster.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hankel_music::{music_with_prior_outcome, MusicOptions};
use crate::model::SampledMeasurement;
use crate::scalar::Real;

pub const DEFAULT_LAMBDA: f64 = 0.5;

/// Detected cluster structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterEstimate<T> {
    /// Peaks of the subsampled MUSIC image, ascending.
    pub raw_centers: Vec<T>,
    pub merged_centers: Vec<T>,
    pub merged_half_widths: Vec<T>,
    /// `d`, the half-width given to each raw center.
    pub interval_radius: T,
    /// Shrinkage factor that produced this estimate.
    pub shrinkage: T,
    /// Threshold used when chaining raw centers.
    pub ict: T,
}

impl<T: Real> ClusterEstimate<T> {
    pub fn cluster_count(&self) -> usize {
        self.merged_centers.len()
    }

    /// Largest merged half-width.
    pub fn max_half_width(&self) -> T {
        self.merged_half_widths.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    /// Index of the merged interval containing `y`, if any.
    pub fn containing(&self, y: T) -> Option<usize> {
        self.merged_centers
            .iter()
            .zip(&self.merged_half_widths)
            .position(|(&c, &w)| (y - c).abs() <= w)
    }
}

/// Keeps the samples with `|x| <= lambda`.
pub fn subsample<T: Real>(meas: &SampledMeasurement<T>, lambda: T) -> Result<SampledMeasurement<T>> {
    if !(lambda > T::zero() && lambda <= T::one()) {
        return Err(Error::InvalidInput(format!("shrinkage factor must lie in (0, 1], got {lambda}")));
    }
    let tol = T::lit(1e-12);
    let keep: Vec<usize> = (0..meas.len()).filter(|&l| meas.grid()[l].abs() <= lambda + tol).collect();
    if keep.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, available: keep.len() });
    }
    meas.select(&keep)
}

/// `d = (2 pi / (lambda Omega)) sigma^(1/3)`.
pub fn interval_radius<T: Real>(lambda: T, omega: T, sigma: T) -> T {
    T::two_pi() / (lambda * omega) * sigma.cbrt()
}

/// Chains sorted centers whose consecutive gaps are below `ict`; returns the
/// hull midpoints and hull half-widths of the widened intervals.
pub fn merge_intervals<T: Real>(raw_centers: &[T], d: T, ict: T) -> (Vec<T>, Vec<T>) {
    let mut sorted = raw_centers.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite centers"));
    let mut centers = Vec::new();
    let mut half_widths = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] - sorted[j] < ict {
            j += 1;
        }
        let (lo, hi) = (sorted[i] - d, sorted[j] + d);
        centers.push((lo + hi) / T::lit(2.0));
        half_widths.push((hi - lo) / T::lit(2.0));
        i = j + 1;
    }
    (centers, half_widths)
}

/// Detection parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectParams<T> {
    /// Shrinkage factors tried in order until one yields a structure.
    pub lambdas: Vec<T>,
    pub o_init: T,
    pub d_init: T,
    pub tps: T,
    pub ict: T,
    pub sigma: T,
    pub music: MusicOptions<T>,
}

impl<T: Real> DetectParams<T> {
    pub fn new(lambda: T, o_init: T, d_init: T, tps: T, ict: T, sigma: T) -> Self {
        Self { lambdas: vec![lambda], o_init, d_init, tps, ict, sigma, music: MusicOptions::default() }
    }
}

/// Detects clusters with a single shrinkage factor.
pub fn detect_clusters<T: Real>(
    meas: &SampledMeasurement<T>,
    lambda: T,
    o_init: T,
    d_init: T,
    tps: T,
    ict: T,
    sigma: T,
) -> Result<ClusterEstimate<T>> {
    detect_clusters_with(meas, &DetectParams::new(lambda, o_init, d_init, tps, ict, sigma))
}

/// Detects clusters, escalating through `params.lambdas` while detection
/// finds nothing or runs out of samples.
pub fn detect_clusters_with<T: Real>(meas: &SampledMeasurement<T>, params: &DetectParams<T>) -> Result<ClusterEstimate<T>> {
    if params.lambdas.is_empty() {
        return Err(Error::InvalidInput("no shrinkage factor given".into()));
    }
    if !(params.ict > T::zero()) {
        return Err(Error::InvalidInput("ICT must be positive".into()));
    }
    let mut last = Error::EmptyStructure;
    for &lambda in &params.lambdas {
        match detect_once(meas, lambda, params) {
            Ok(est) => return Ok(est),
            Err(e @ (Error::EmptyStructure | Error::InsufficientSamples { .. })) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

fn detect_once<T: Real>(meas: &SampledMeasurement<T>, lambda: T, params: &DetectParams<T>) -> Result<ClusterEstimate<T>> {
    let sub = subsample(meas, lambda)?;
    let outcome = music_with_prior_outcome(&sub, params.o_init, params.d_init, params.tps, params.sigma, &params.music)?;
    if outcome.locations.is_empty() {
        return Err(Error::EmptyStructure);
    }
    let mut raw_centers = outcome.locations;
    raw_centers.sort_by(|a, b| a.partial_cmp(b).expect("finite centers"));
    let d = interval_radius(lambda, meas.omega(), params.sigma);
    let (merged_centers, merged_half_widths) = merge_intervals(&raw_centers, d, params.ict);
    Ok(ClusterEstimate {
        raw_centers,
        merged_centers,
        merged_half_widths,
        interval_radius: d,
        shrinkage: lambda,
        ict: params.ict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{synthesize, Source, SourceMeasure};
    use std::f64::consts::PI;

    fn measure(ys: &[f64]) -> SourceMeasure<f64> {
        SourceMeasure::new(ys.iter().map(|&y| Source::real(y, 1.0)).collect()).unwrap()
    }

    #[test]
    fn subsample_examples() {
        let y = synthesize(&measure(&[0.0]), 1000, 1.0, 0.0, None).unwrap();
        assert_eq!(subsample(&y, 1.0).unwrap(), y);
        let half = subsample(&y, 0.5).unwrap();
        assert!(half.grid().iter().all(|x| x.abs() <= 0.5));
        assert!((495..=505).contains(&half.len()), "{}", half.len());
        assert!((half.spacing() - y.spacing()).abs() < 1e-15);
        assert!(matches!(subsample(&y, 1e-6), Err(Error::InsufficientSamples { .. })));
        assert!(subsample(&y, 0.0).is_err());
    }

    #[test]
    fn interval_radius_examples() {
        assert!((interval_radius(0.5, 1.0, 1e-3) - 0.4 * PI).abs() < 1e-12);
        assert!((interval_radius(1.0, 1.0, 1.0) - 2.0 * PI).abs() < 1e-12);
        assert!((interval_radius(0.5, 2.0, 1e-3) - 0.2 * PI).abs() < 1e-12);
    }

    #[test]
    fn merge_chains_transitively() {
        let (c, w) = merge_intervals(&[0.0, 1.5, 3.0, 10.0], 0.5, 2.0);
        assert_eq!(c, vec![1.5, 10.0]);
        assert_eq!(w, vec![2.0, 0.5]);
        let (c2, w2) = merge_intervals(&[10.0, 3.0, 0.0, 1.5], 0.5, 2.0);
        assert_eq!((c, w), (c2, w2));
        let (c, _) = merge_intervals(&[0.0, 2.0], 0.1, 2.0);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn two_far_sources_give_two_clusters() {
        let truth = [-20.0 * PI, 20.0 * PI];
        let y = synthesize(&measure(&truth), 1000, 1.0, 1e-3, Some(3)).unwrap();
        let est = detect_clusters(&y, 0.5, 0.0, 22.0 * PI, 0.1, 2.0 * PI, 1e-3).unwrap();
        assert_eq!(est.cluster_count(), 2, "{est:?}");
        for (c, t) in est.merged_centers.iter().zip(truth) {
            assert!((c - t).abs() < est.interval_radius);
        }
        assert!(est.merged_centers.windows(2).all(|w| w[1] - w[0] > est.ict));
    }

    #[test]
    fn tight_triple_merges_into_one_cluster() {
        let truth = [-1.0, 0.0, 1.0];
        let y = synthesize(&measure(&truth), 1000, 1.0, 1e-3, Some(8)).unwrap();
        let est = detect_clusters(&y, 0.5, 0.0, 30.0, 0.05, 2.0 * PI, 1e-3).unwrap();
        assert_eq!(est.cluster_count(), 1, "{est:?}");
        for t in truth {
            assert!(est.containing(t).is_some());
        }
    }

    #[test]
    fn single_source_center_within_radius() {
        let y = synthesize(&measure(&[7.3]), 1000, 1.0, 1e-3, Some(1)).unwrap();
        let est = detect_clusters(&y, 0.5, 0.0, 30.0, 0.05, 2.0 * PI, 1e-3).unwrap();
        assert_eq!(est.cluster_count(), 1);
        assert!((est.merged_centers[0] - 7.3).abs() < est.interval_radius);
    }

    #[test]
    fn ladder_escalates_past_insufficient_samples() {
        let y = synthesize(&measure(&[2.0]), 200, 1.0, 1e-3, Some(1)).unwrap();
        let mut params = DetectParams::new(1e-4, 0.0, 10.0, 0.05, PI, 1e-3);
        assert!(detect_clusters_with(&y, &params).is_err());
        params.lambdas.push(0.5);
        let est = detect_clusters_with(&y, &params).unwrap();
        assert_eq!(est.shrinkage, 0.5);
    }
}
