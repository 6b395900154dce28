//! Monte-Carlo experiments: decoupling success ratios and minimum cluster
//! separations, and the D-MUSIC versus MUSIC accuracy/timing comparison.
//!
//! Trials are independent; trial `i` uses seed `seed0 + i`, so results do not
//! depend on scheduling. Experiments run in double precision.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dmusic::{run, PipelineConfig};
use crate::error::{Error, Result};
use crate::hankel_music::{music, MusicOptions};
use crate::model::{
    modulate, modulation_window, random_instance, synthesize, InstanceSpec, Placement, SampledMeasurement, SourceMeasure,
};
use crate::multipole::{decouple, multipole_order, DecoupleConfig, MAX_MULTIPOLES};
use crate::scalar::{cis, rms_norm};

/// Ratio a setting must reach to count as stable decoupling.
pub const SUCCESS_GATE: f64 = 0.99;

/// Global fit gate, in units of sigma.
pub const GLOBAL_FIT_FACTOR: f64 = 3.0;

/// Local reconstruction gate, in units of sigma.
pub const LOCAL_FIT_FACTOR: f64 = 6.0;

/// Reference minimum separations `L(s) / pi` for `s = 3..=29` (modulated decoupling).
pub const REFERENCE_MIN_SEPARATION: [(usize, f64); 27] = [
    (3, 3.0),
    (4, 4.0),
    (5, 5.0),
    (6, 6.0),
    (7, 7.0),
    (8, 8.0),
    (9, 9.0),
    (10, 10.0),
    (11, 11.0),
    (12, 12.0),
    (13, 13.0),
    (14, 14.0),
    (15, 15.0),
    (16, 16.0),
    (17, 18.0),
    (18, 19.5),
    (19, 21.0),
    (20, 22.5),
    (21, 24.0),
    (22, 26.0),
    (23, 27.5),
    (24, 29.5),
    (25, 31.5),
    (26, 33.0),
    (27, 36.5),
    (28, 38.5),
    (29, 40.5),
];

/// Reference `L(s)` in units of `1 / Omega`, if tabulated.
pub fn reference_min_separation(s: usize) -> Option<f64> {
    REFERENCE_MIN_SEPARATION.iter().find(|(k, _)| *k == s).map(|(_, l)| l * PI)
}

/// `{3 pi, 3.5 pi, ..., 50 pi}`.
pub fn separation_grid() -> Vec<f64> {
    (0..=94).map(|k| (3.0 + 0.5 * k as f64) * PI).collect()
}

/// Largest `D` (up to `s`) with `multipole_order(D) <= s`, by bisection.
fn order_boundary(s: usize, sigma: f64, m: f64) -> f64 {
    let ok = |d: f64| multipole_order(d, sigma, m).map(|o| o <= s).unwrap_or(false);
    let (mut lo, mut hi) = (0.0, s as f64);
    if ok(hi) {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 {
            break;
        }
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Interval `(lo, hi]` of half-widths `D` whose multipole order is exactly `s`.
pub fn feasible_half_widths(s: usize, sigma: f64, m: f64) -> Result<(f64, f64)> {
    if s == 0 || s > MAX_MULTIPOLES {
        return Err(Error::InvalidInput(format!("multipole count must lie in 1..={MAX_MULTIPOLES}")));
    }
    let hi = order_boundary(s, sigma, m);
    let lo = if s == 1 { 0.0 } else { order_boundary(s - 1, sigma, m) };
    if !(hi > lo) {
        return Err(Error::InvalidInput(format!("no half-width gives exactly {s} multipoles at sigma = {sigma}")));
    }
    Ok((lo, hi))
}

/// Per-trial record shared by all experiments; norms are `||.|| / sqrt(N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub clusters: usize,
    pub sources: usize,
    /// Dimensionless cluster half-width `D`.
    pub half_width: f64,
    /// Dimensionless minimum center separation `L`.
    pub separation: f64,
    pub multipole_count: Option<usize>,
    pub decouple_residual: Option<f64>,
    pub local_errors: Vec<f64>,
    pub global_fit_ok: bool,
    pub success: bool,
    /// Max deviation after sorted pairing; infinite on count mismatch.
    pub deviation_dmusic: Option<f64>,
    pub deviation_music: Option<f64>,
    pub count_dmusic: Option<usize>,
    pub count_music: Option<usize>,
    pub dmusic_fallback: Option<bool>,
    /// Smallest distance between two true sources.
    pub min_true_separation: Option<f64>,
    pub wall_time_dmusic: Option<f64>,
    pub wall_time_music: Option<f64>,
}

impl TrialRecord {
    fn new(seed: u64, measure: &SourceMeasure<f64>, clusters: usize, half_width: f64, separation: f64) -> Self {
        Self {
            seed,
            clusters,
            sources: measure.len(),
            half_width,
            separation,
            multipole_count: None,
            decouple_residual: None,
            local_errors: Vec::new(),
            global_fit_ok: false,
            success: false,
            deviation_dmusic: None,
            deviation_music: None,
            count_dmusic: None,
            count_music: None,
            dmusic_fallback: None,
            min_true_separation: measure.min_separation(),
            wall_time_dmusic: None,
            wall_time_music: None,
        }
    }
}

/// Settings of the decoupling experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecouplingExperiment {
    pub s: usize,
    pub separation: f64,
    pub sigma: f64,
    pub n: usize,
    pub modulated: bool,
    pub k_range: (usize, usize),
    pub sources_range: (usize, usize),
    /// Total variation of every instance (also used for the multipole count).
    pub m: f64,
}

impl DecouplingExperiment {
    pub fn new(s: usize, separation: f64, sigma: f64, n: usize) -> Self {
        Self { s, separation, sigma, n, modulated: true, k_range: (2, 5), sources_range: (1, 3), m: 1.0 }
    }
}

/// One decoupling trial: draw `D` uniformly from the half-widths with order
/// `s`, draw an instance, decouple, and score the global and local fits.
pub fn decoupling_trial(exp: &DecouplingExperiment, seed: u64) -> Result<TrialRecord> {
    let (lo, hi) = feasible_half_widths(exp.s, exp.sigma, exp.m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let half_width = hi - (hi - lo) * rng.random::<f64>();
    let spec = InstanceSpec::new(exp.k_range.0, exp.k_range.1, exp.separation, half_width, 1.0)
        .sources_per_cluster(exp.sources_range.0, exp.sources_range.1)
        .total_variation(exp.m);
    let (measure, region) = random_instance(&spec, seed)?;
    let mut record = TrialRecord::new(seed, &measure, region.k(), half_width, exp.separation);

    let y = synthesize(&measure, exp.n, 1.0, exp.sigma, Some(seed))?;
    let input = if exp.modulated { modulate(&y)? } else { y };
    let config = DecoupleConfig { modulated: exp.modulated, order_override: Some(exp.s), ..DecoupleConfig::default() };
    let result = decouple(&input, region.centers(), half_width, exp.sigma, &config)?;
    record.multipole_count = Some(result.multipole_count);
    record.decouple_residual = Some(result.residual_norm);
    record.global_fit_ok = result.residual_norm <= GLOBAL_FIT_FACTOR * exp.sigma;

    for (j, fitted) in result.fitted_locals.iter().enumerate() {
        let members = measure.cluster_members(j);
        let diff: Vec<_> = input
            .grid()
            .iter()
            .zip(fitted)
            .map(|(&x, f)| {
                let w = if exp.modulated { modulation_window(x) } else { 1.0 };
                let truth = members.iter().fold(Complex::new(0.0, 0.0), |acc, s| acc + s.amplitude * cis(s.location * x));
                truth * w - f
            })
            .collect();
        record.local_errors.push(rms_norm(&diff));
    }
    record.success = record.global_fit_ok && record.local_errors.iter().all(|&e| e < LOCAL_FIT_FACTOR * exp.sigma);
    Ok(record)
}

/// Runs `trials` decoupling trials in parallel.
pub fn decoupling_records(exp: &DecouplingExperiment, trials: usize, seed0: u64) -> Result<Vec<TrialRecord>> {
    (0..trials as u64).into_par_iter().map(|i| decoupling_trial(exp, seed0 + i)).collect()
}

/// Fraction of successful decoupling trials.
pub fn decoupling_success_ratio(s: usize, separation: f64, trials: usize, sigma: f64, n: usize, seed0: u64) -> Result<f64> {
    success_ratio(&DecouplingExperiment::new(s, separation, sigma, n), trials, seed0)
}

/// Fraction of successful trials for an arbitrary experiment setting.
pub fn success_ratio(exp: &DecouplingExperiment, trials: usize, seed0: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    let records = decoupling_records(exp, trials, seed0)?;
    Ok(records.iter().filter(|r| r.success).count() as f64 / trials as f64)
}

/// Smallest separation in the ascending `grid` whose success ratio reaches
/// [`SUCCESS_GATE`], with the ratios evaluated along the way.
pub fn min_separation_search(
    s: usize,
    grid: &[f64],
    trials: usize,
    sigma: f64,
    n: usize,
    seed0: u64,
) -> Result<(f64, Vec<(f64, f64)>)> {
    min_separation_search_with(&DecouplingExperiment::new(s, 0.0, sigma, n), grid, trials, seed0)
}

/// [`min_separation_search`] for an arbitrary experiment; its `separation`
/// is replaced by each grid value in turn.
pub fn min_separation_search_with(
    exp: &DecouplingExperiment,
    grid: &[f64],
    trials: usize,
    seed0: u64,
) -> Result<(f64, Vec<(f64, f64)>)> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("separation grid must be ascending".into()));
    }
    let mut visited = Vec::new();
    for &l in grid {
        let ratio = success_ratio(&DecouplingExperiment { separation: l, ..*exp }, trials, seed0)?;
        visited.push((l, ratio));
        if ratio >= SUCCESS_GATE {
            return Ok((l, visited));
        }
    }
    Err(Error::SearchExhausted)
}

/// Max deviation between sorted location lists; infinite on count mismatch.
pub fn sorted_deviation(recovered: &[f64], truth: &[f64]) -> f64 {
    if recovered.len() != truth.len() {
        return f64::INFINITY;
    }
    let mut a = recovered.to_vec();
    let mut b = truth.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Settings of the D-MUSIC versus MUSIC comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub sigma: f64,
    pub n: usize,
    pub k_range: (usize, usize),
    pub separation: f64,
    pub half_width: f64,
    pub sources_range: (usize, usize),
    /// Nominal spacing of neighbouring sources in a cluster.
    pub intra_spacing: f64,
    /// Relative jitter of that spacing.
    pub intra_jitter: f64,
    pub amplitude_range: (f64, f64),
    /// Margin added around the outermost sources for the initial interval.
    pub prior_margin: f64,
    pub pipeline: PipelineConfig<f64>,
    /// Run trials concurrently (disable for timing).
    pub parallel: bool,
    /// Untimed warmup runs before the first trial.
    pub warmup: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            sigma: 1e-3,
            n: 1000,
            k_range: (2, 5),
            separation: 12.0 * PI,
            half_width: PI,
            sources_range: (1, 3),
            intra_spacing: 1.0,
            intra_jitter: 0.1,
            amplitude_range: (0.5, 2.0),
            prior_margin: 2.0 * PI,
            pipeline: PipelineConfig::new(1e-3),
            parallel: true,
            warmup: 1,
        }
    }
}

fn compare_trial(config: &CompareConfig, seed: u64) -> Result<TrialRecord> {
    let spec = InstanceSpec::new(config.k_range.0, config.k_range.1, config.separation, config.half_width, 1.0)
        .sources_per_cluster(config.sources_range.0, config.sources_range.1)
        .placement(Placement::Chain { spacing: config.intra_spacing, jitter: config.intra_jitter })
        .amplitude_range(config.amplitude_range.0, config.amplitude_range.1);
    let (measure, region) = random_instance(&spec, seed)?;
    let mut record = TrialRecord::new(seed, &measure, region.k(), config.half_width, config.separation);
    let y = synthesize(&measure, config.n, 1.0, config.sigma, Some(seed))?;
    let truth = measure.sorted_locations();
    let extent = truth.iter().fold(0.0f64, |a, &t| a.max(t.abs()));
    let pipeline = PipelineConfig {
        sigma: config.sigma,
        o_init: 0.0,
        d_init: Some(extent + config.prior_margin),
        ..config.pipeline.clone()
    };
    let (report, t_dmusic) = timed(|| run(&y, &pipeline));
    let report = report?;
    let (plain, t_music) = timed(|| music_baseline(&y, &pipeline));
    let plain = plain?;

    record.decouple_residual = report.residual_norm;
    record.multipole_count = report.multipole_count;
    record.global_fit_ok = report.decouple_success;
    record.dmusic_fallback = Some(report.fallback);
    record.count_dmusic = Some(report.locations.len());
    record.count_music = Some(plain.len());
    record.deviation_dmusic = Some(sorted_deviation(&report.locations, &truth));
    record.deviation_music = Some(sorted_deviation(&plain, &truth));
    record.wall_time_dmusic = Some(t_dmusic.as_secs_f64());
    record.wall_time_music = Some(t_music.as_secs_f64());
    let sep = record.min_true_separation.unwrap_or(f64::INFINITY);
    record.success = record.deviation_dmusic.unwrap() < sep && record.deviation_music.unwrap() < sep;
    Ok(record)
}

/// Standard MUSIC on the full measurement over the initial interval.
pub fn music_baseline(y: &SampledMeasurement<f64>, pipeline: &PipelineConfig<f64>) -> Result<Vec<f64>> {
    let d = pipeline.initial_half_width(y);
    let options = MusicOptions { c_order: pipeline.c_order, ..MusicOptions::default() };
    let outcome = music(y, pipeline.sigma, pipeline.o_init - d, pipeline.o_init + d, pipeline.tps_source, &options)?;
    Ok(outcome.locations)
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, Duration) {
    let clock = Instant::now();
    let out = f();
    (out, clock.elapsed())
}

/// Runs both algorithms on identical data for `trials` instances.
pub fn compare_dmusic_vs_music(config: &CompareConfig, trials: usize, seed0: u64) -> Result<Vec<TrialRecord>> {
    for w in 0..config.warmup {
        compare_trial(config, seed0.wrapping_sub(1 + w as u64))?;
    }
    if config.parallel {
        (0..trials as u64).into_par_iter().map(|i| compare_trial(config, seed0 + i)).collect()
    } else {
        (0..trials as u64).map(|i| compare_trial(config, seed0 + i)).collect()
    }
}

/// Aggregates of a comparison run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub trials: usize,
    /// Trials where both algorithms found every source within the minimum separation.
    pub both_correct: usize,
    pub dmusic_correct: usize,
    pub music_correct: usize,
    pub median_time_dmusic: f64,
    pub median_time_music: f64,
    /// Median over trials of `t_music / t_dmusic`.
    pub median_speedup: f64,
    pub fallbacks: usize,
}

pub fn summarize_comparison(records: &[TrialRecord]) -> CompareSummary {
    let within = |dev: Option<f64>, r: &TrialRecord| dev.unwrap_or(f64::INFINITY) < r.min_true_separation.unwrap_or(f64::INFINITY);
    let median = |mut v: Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if v.is_empty() {
            f64::NAN
        } else if v.len() % 2 == 1 {
            v[v.len() / 2]
        } else {
            0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
        }
    };
    CompareSummary {
        trials: records.len(),
        both_correct: records.iter().filter(|r| r.success).count(),
        dmusic_correct: records.iter().filter(|r| within(r.deviation_dmusic, r)).count(),
        music_correct: records.iter().filter(|r| within(r.deviation_music, r)).count(),
        median_time_dmusic: median(records.iter().filter_map(|r| r.wall_time_dmusic).collect()),
        median_time_music: median(records.iter().filter_map(|r| r.wall_time_music).collect()),
        median_speedup: median(
            records
                .iter()
                .filter_map(|r| Some(r.wall_time_music? / r.wall_time_dmusic?))
                .collect(),
        ),
        fallbacks: records.iter().filter(|r| r.dmusic_fallback == Some(true)).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_range_has_exact_order() {
        for s in [3usize, 4, 12, 20, 29] {
            let (lo, hi) = feasible_half_widths(s, 1e-3, 1.0).unwrap();
            assert!(lo < hi);
            assert_eq!(multipole_order(hi, 1e-3, 1.0).unwrap(), s);
            assert_eq!(multipole_order(0.5 * (lo + hi), 1e-3, 1.0).unwrap(), s);
            assert!(multipole_order(lo, 1e-3, 1.0).unwrap() < s);
        }
        let (lo, hi) = feasible_half_widths(12, 1e-3, 1.0).unwrap();
        assert!(lo < PI && PI <= hi);
    }

    #[test]
    fn grid_and_reference() {
        let g = separation_grid();
        assert_eq!(g.len(), 95);
        assert!((g[0] - 3.0 * PI).abs() < 1e-12 && (g[94] - 50.0 * PI).abs() < 1e-12);
        assert_eq!(reference_min_separation(20), Some(22.5 * PI));
        assert_eq!(reference_min_separation(2), None);
    }

    #[test]
    fn sorted_pairing() {
        assert_eq!(sorted_deviation(&[2.0, 1.0], &[1.1, 2.05]), 0.10000000000000009);
        assert!(sorted_deviation(&[1.0], &[1.0, 2.0]).is_infinite());
    }

    #[test]
    fn decoupling_trials_are_deterministic() {
        let exp = DecouplingExperiment::new(6, 8.0 * PI, 1e-3, 400);
        let a = decoupling_trial(&exp, 17).unwrap();
        let b = decoupling_trial(&exp, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.local_errors.len(), a.clusters);
    }

    #[test]
    fn tiny_separation_fails_often() {
        let ratio = decoupling_success_ratio(12, PI * 2.2, 20, 1e-3, 1000, 1).unwrap();
        assert!(ratio < 0.99, "{ratio}");
    }

    #[test]
    fn comparison_trial_is_reproducible() {
        let config = CompareConfig { warmup: 0, k_range: (2, 2), ..CompareConfig::default() };
        let a = compare_dmusic_vs_music(&config, 1, 5).unwrap();
        let b = compare_dmusic_vs_music(&config, 1, 5).unwrap();
        assert_eq!(a[0].deviation_dmusic, b[0].deviation_dmusic);
        assert_eq!(a[0].deviation_music, b[0].deviation_music);
    }
}
