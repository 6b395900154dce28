//! Subspace imaging on Hankel matrices: standard MUSIC, MUSIC with a prior
//! interval, and peak selection on the resulting image.

use nalgebra::{Complex, DMatrix};

use crate::linalg;
use crate::error::{Error, Result};
use crate::model::SampledMeasurement;
use crate::scalar::{cis, median, norm_sqr, Real};

/// Default multiplier `c` in the order threshold `c * sigma * sqrt(N_hat + 1)`.
pub const DEFAULT_ORDER_CONSTANT: f64 = 5.0;

/// Value reported by the imaging functional when the test vector lies in the
/// signal subspace to working precision.
pub const IMAGING_CAP: f64 = 1e14;

/// Default `n_max`; the prior-interval subgrid keeps at least `2 n_max + 3` samples.
pub const DEFAULT_MAX_SOURCES: usize = 8;

/// Default sample floor of the prior-interval subgrid.
pub const DEFAULT_MIN_SUBGRID_SAMPLES: usize = 2 * DEFAULT_MAX_SOURCES + 3;

/// Assembles the `(N_hat + 1) x (N_hat + 1)` Hankel matrix with
/// `N_hat = floor((N - 1) / 2)` and entry `(p, q) = Y(x_{p+q})`.
pub fn build_hankel<T: Real>(meas: &SampledMeasurement<T>) -> Result<DMatrix<Complex<T>>> {
    let n = meas.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, available: n });
    }
    let dim = (n - 1) / 2 + 1;
    let y = meas.values();
    Ok(DMatrix::from_fn(dim, dim, |p, q| y[p + q]))
}

/// Number of singular values above `max(c * sigma * sqrt(N_hat + 1), floor)`,
/// where `floor` is a relative round-off level tied to the largest singular value.
/// Never exceeds `N_hat`. An override, when given, wins.
pub fn estimate_order<T: Real>(
    singular_values: &[T],
    sigma: T,
    n_hat: usize,
    override_order: Option<usize>,
) -> usize {
    estimate_order_with(singular_values, sigma, n_hat, override_order, T::lit(DEFAULT_ORDER_CONSTANT))
}

pub fn estimate_order_with<T: Real>(
    singular_values: &[T],
    sigma: T,
    n_hat: usize,
    override_order: Option<usize>,
    c_order: T,
) -> usize {
    if let Some(n) = override_order {
        return n;
    }
    let Some(&largest) = singular_values.first() else {
        return 0;
    };
    let dim = T::from_count(n_hat + 1);
    let noise = c_order * sigma * dim.sqrt();
    let roundoff = T::lit(100.0) * T::machine_eps() * dim * largest;
    let tau = noise.max(roundoff);
    singular_values.iter().filter(|&&s| s > tau).count().min(n_hat)
}

/// SVD of the Hankel matrix split into signal and noise subspaces.
#[derive(Debug, Clone)]
pub struct HankelDecomposition<T: Real> {
    pub hankel_dim: usize,
    pub singular_values: Vec<T>,
    /// First `estimated_order` left singular vectors.
    pub signal_subspace: DMatrix<Complex<T>>,
    /// Remaining left singular vectors; columns are orthonormal.
    pub noise_subspace: DMatrix<Complex<T>>,
    pub estimated_order: usize,
    /// `h = Omega * grid spacing`; test vectors are `(exp(i h m omega))_m`.
    pub sample_spacing: T,
}

impl<T: Real> HankelDecomposition<T> {
    /// Decomposes the Hankel matrix of `meas`, estimating the model order from
    /// `sigma` unless `order` is given.
    pub fn new(
        meas: &SampledMeasurement<T>,
        sigma: T,
        order: Option<usize>,
        c_order: T,
    ) -> Result<Self> {
        let hankel = build_hankel(meas)?;
        let dim = hankel.nrows();
        let (singular_values, u) = linalg::left_singular(&hankel);
        let n = estimate_order_with(&singular_values, sigma, dim - 1, order, c_order);
        if n >= dim {
            return Err(Error::DegenerateNoiseSpace { order: n, dim });
        }
        Ok(Self {
            hankel_dim: dim,
            singular_values,
            signal_subspace: u.columns(0, n).into_owned(),
            noise_subspace: u.columns(n, dim - n).into_owned(),
            estimated_order: n,
            sample_spacing: meas.omega() * meas.spacing(),
        })
    }

    /// `J(omega) = ||Phi|| / ||U_2^* Phi||`, capped at [`IMAGING_CAP`].
    pub fn functional(&self, omega: T) -> T {
        let mut phi = vec![Complex::new(T::zero(), T::zero()); self.hankel_dim];
        self.functional_with(omega, &mut phi)
    }

    fn functional_with(&self, omega: T, phi: &mut [Complex<T>]) -> T {
        let dim = self.hankel_dim;
        if self.estimated_order == 0 {
            return T::one();
        }
        let z = cis(self.sample_spacing * omega);
        let mut p = Complex::new(T::one(), T::zero());
        for slot in phi.iter_mut() {
            *slot = p;
            p *= z;
        }
        let phi_sq = T::from_count(dim);
        // ||P_2 Phi||^2 = ||Phi||^2 - ||U_1^* Phi||^2 is cheap when the signal
        // subspace is small; near the signal subspace it cancels, so fall back
        // to projecting on the noise subspace directly.
        let signal_sq = project_sq(&self.signal_subspace, phi);
        let mut noise_sq = phi_sq - signal_sq;
        if noise_sq < T::lit(1e-4) * phi_sq {
            noise_sq = project_sq(&self.noise_subspace, phi);
        }
        let noise_sq = noise_sq.max(T::zero()).min(phi_sq);
        let cap = T::lit(IMAGING_CAP);
        let ratio_sq = noise_sq / phi_sq;
        if ratio_sq < T::one() / (cap * cap) {
            return cap;
        }
        (T::one() / ratio_sq).sqrt().max(T::one())
    }

    /// Evaluates the imaging functional on `ts, ts + tps, ...` up to `te`.
    pub fn image(&self, ts: T, te: T, tps: T) -> Result<ImagingResult<T>> {
        let test_points = test_grid(ts, te, tps)?;
        let mut phi = vec![Complex::new(T::zero(), T::zero()); self.hankel_dim];
        let values = test_points.iter().map(|&w| self.functional_with(w, &mut phi)).collect();
        Ok(ImagingResult { test_points, values, peaks: Vec::new() })
    }
}

/// `sum_k |u_k^* phi|^2` over the columns of `basis`.
fn project_sq<T: Real>(basis: &DMatrix<Complex<T>>, phi: &[Complex<T>]) -> T {
    let dim = basis.nrows();
    let data = basis.as_slice();
    let mut total = T::zero();
    for k in 0..basis.ncols() {
        let col = &data[k * dim..(k + 1) * dim];
        let (mut re, mut im) = (T::zero(), T::zero());
        for (u, f) in col.iter().zip(phi) {
            // conj(u) * f
            re += u.re * f.re + u.im * f.im;
            im += u.re * f.im - u.im * f.re;
        }
        total += re * re + im * im;
    }
    total
}

/// Evenly spaced test points from `ts` to `te` (inclusive when it lands on the grid).
pub fn test_grid<T: Real>(ts: T, te: T, tps: T) -> Result<Vec<T>> {
    if !(ts < te) {
        return Err(Error::InvalidInput(format!("test region [{ts}, {te}] is empty")));
    }
    if !(tps > T::zero()) {
        return Err(Error::InvalidInput("test point spacing must be positive".into()));
    }
    let count = ((te - ts) / tps + T::lit(1e-9)).floor().to_usize().unwrap_or(0) + 1;
    Ok((0..count).map(|k| ts + tps * T::from_count(k)).collect())
}

/// Sampled imaging functional.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagingResult<T> {
    pub test_points: Vec<T>,
    pub values: Vec<T>,
    pub peaks: Vec<T>,
}

impl<T: Real> ImagingResult<T> {
    pub fn spacing(&self) -> T {
        if self.test_points.len() < 2 {
            T::one()
        } else {
            self.test_points[1] - self.test_points[0]
        }
    }

    pub fn value_at_index(&self, i: usize) -> T {
        self.values[i]
    }
}

/// Standard MUSIC image of `meas` over `[ts, te]`. The model order is
/// estimated from the measurement's noise level when `order` is `None`.
pub fn imaging<T: Real>(
    meas: &SampledMeasurement<T>,
    order: Option<usize>,
    ts: T,
    te: T,
    tps: T,
) -> Result<ImagingResult<T>> {
    let decomposition =
        HankelDecomposition::new(meas, meas.sigma(), order, T::lit(DEFAULT_ORDER_CONSTANT))?;
    decomposition.image(ts, te, tps)
}

/// Peak-selection parameters: peak compare range, derivative compare range
/// (both in test-point indices), and derivative threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakParams<T> {
    pub pcr: usize,
    pub dcr: usize,
    pub dct: T,
}

impl<T: Real> PeakParams<T> {
    /// `PCR = DCR = max(3, ceil(0.05 / TPS))`, `DCT = 10 * median(|dJ|) / TPS`.
    pub fn defaults_for(img: &ImagingResult<T>) -> Self {
        let tps = img.spacing();
        let range = (T::lit(0.05) / tps).ceil().to_usize().unwrap_or(3).max(3);
        let diffs: Vec<T> = img.values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let dct = median(&diffs).unwrap_or(T::zero()) * T::lit(10.0) / tps;
        Self { pcr: range, dcr: range, dct }
    }
}

/// Central finite-difference derivative of the image (one-sided at the ends).
pub fn image_derivative<T: Real>(img: &ImagingResult<T>) -> Vec<T> {
    let f = &img.values;
    let m = f.len();
    let h = img.spacing();
    (0..m)
        .map(|j| match (j, m) {
            (_, 0 | 1) => T::zero(),
            (0, _) => (f[1] - f[0]) / h,
            (j, m) if j == m - 1 => (f[m - 1] - f[m - 2]) / h,
            (j, _) => (f[j + 1] - f[j - 1]) / (T::lit(2.0) * h),
        })
        .collect()
}

/// Indices of selected peaks; see [`select_peaks`].
pub fn select_peak_indices<T: Real>(img: &ImagingResult<T>, params: PeakParams<T>) -> Vec<usize> {
    let f = &img.values;
    let m = f.len();
    if m < 3 {
        return Vec::new();
    }
    let deriv = image_derivative(img);
    let mut peaks = Vec::new();
    // The first and last test points are never peaks: the image is cut off there.
    for j in 1..m - 1 {
        let lo = j.saturating_sub(params.pcr);
        let hi = (j + params.pcr).min(m - 1);
        // Maximum of the window; strict against the left part so a plateau
        // yields a single peak.
        let is_max = (lo..j).all(|i| f[i] < f[j]) && (j + 1..=hi).all(|i| f[i] <= f[j]);
        if !is_max {
            continue;
        }
        let dlo = j.saturating_sub(params.dcr);
        let dhi = (j + params.dcr).min(m - 1);
        let steep = (dlo..=dhi).map(|i| deriv[i].abs()).fold(T::zero(), |a, b| a.max(b));
        if steep >= params.dct {
            peaks.push(j);
        }
    }
    peaks
}

/// Local maxima over a `+-PCR` window whose derivative magnitude reaches
/// `DCT` within `+-DCR` indices, sorted ascending.
pub fn select_peaks<T: Real>(img: &ImagingResult<T>, pcr: usize, dcr: usize, dct: T) -> Vec<T> {
    select_peak_indices(img, PeakParams { pcr, dcr, dct })
        .into_iter()
        .map(|i| img.test_points[i])
        .collect()
}

/// Tunables shared by the MUSIC routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MusicOptions<T> {
    pub c_order: T,
    pub order_override: Option<usize>,
    /// Sample floor for the prior-interval subgrid; values below 2 disable it.
    pub min_subgrid_samples: usize,
    /// Peak-selection parameters; `None` uses [`PeakParams::defaults_for`].
    pub peak_params: Option<PeakParams<T>>,
}

impl<T: Real> Default for MusicOptions<T> {
    fn default() -> Self {
        Self {
            c_order: T::lit(DEFAULT_ORDER_CONSTANT),
            order_override: None,
            min_subgrid_samples: DEFAULT_MIN_SUBGRID_SAMPLES,
            peak_params: None,
        }
    }
}

/// Result of one MUSIC run.
#[derive(Debug, Clone)]
pub struct MusicOutcome<T> {
    /// Recovered locations, ascending.
    pub locations: Vec<T>,
    pub image: ImagingResult<T>,
    pub estimated_order: usize,
    pub singular_values: Vec<T>,
}

/// Standard MUSIC: Hankel SVD, imaging over `[ts, te]` with spacing `tps`,
/// then peak selection. At most `estimated_order` peaks are kept (the
/// highest ones).
pub fn music<T: Real>(
    meas: &SampledMeasurement<T>,
    sigma: T,
    ts: T,
    te: T,
    tps: T,
    options: &MusicOptions<T>,
) -> Result<MusicOutcome<T>> {
    let decomposition = HankelDecomposition::new(meas, sigma, options.order_override, options.c_order)?;
    let mut image = decomposition.image(ts, te, tps)?;
    let params = options.peak_params.unwrap_or_else(|| PeakParams::defaults_for(&image));
    let mut idx = select_peak_indices(&image, params);
    let n = decomposition.estimated_order;
    if idx.len() > n {
        idx.sort_by(|&a, &b| image.values[b].partial_cmp(&image.values[a]).unwrap());
        idx.truncate(n);
        idx.sort_unstable();
    }
    let locations: Vec<T> = idx.iter().map(|&i| image.test_points[i]).collect();
    image.peaks = locations.clone();
    Ok(MusicOutcome {
        locations,
        image,
        estimated_order: n,
        singular_values: decomposition.singular_values,
    })
}

/// Indices of the centralized subgrid used by [`music_with_prior`]: spacing
/// `min(pi / (2 Omega D), spacing giving >= min_samples samples)`, rounded down
/// to a multiple of the grid spacing and centered in the available range.
pub fn prior_subgrid<T: Real>(meas: &SampledMeasurement<T>, half_width: T, min_samples: usize) -> Vec<usize> {
    let n = meas.len();
    if n < 2 {
        return (0..n).collect();
    }
    let dx = meas.spacing();
    let span = meas.grid()[n - 1] - meas.grid()[0];
    let nyquist = T::pi() / (T::lit(2.0) * meas.omega() * half_width);
    let target = if min_samples >= 2 {
        nyquist.min(span / T::from_count(min_samples - 1))
    } else {
        nyquist
    };
    let stride = (target / dx + T::lit(1e-9)).floor().to_usize().unwrap_or(1).max(1);
    let count = (n - 1) / stride + 1;
    let start = ((n - 1) - (count - 1) * stride) / 2;
    (0..count).map(|k| start + k * stride).collect()
}

/// MUSIC restricted to the prior interval `[center - half_width, center + half_width]`.
pub fn music_with_prior<T: Real>(
    meas: &SampledMeasurement<T>,
    center: T,
    half_width: T,
    tps: T,
    sigma: T,
) -> Result<Vec<T>> {
    Ok(music_with_prior_outcome(meas, center, half_width, tps, sigma, &MusicOptions::default())?.locations)
}

/// [`music_with_prior`] with explicit options, returning the full outcome
/// (image in centralized coordinates, locations in absolute ones).
pub fn music_with_prior_outcome<T: Real>(
    meas: &SampledMeasurement<T>,
    center: T,
    half_width: T,
    tps: T,
    sigma: T,
    options: &MusicOptions<T>,
) -> Result<MusicOutcome<T>> {
    if !(half_width > T::zero()) {
        return Err(Error::InvalidInput("prior half-width must be positive".into()));
    }
    let idx = prior_subgrid(meas, half_width, options.min_subgrid_samples);
    if idx.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, available: idx.len() });
    }
    let sub = meas.select(&idx)?;
    let omega = meas.omega();
    let centralized: Vec<Complex<T>> = sub
        .grid()
        .iter()
        .zip(sub.values())
        .map(|(&x, &v)| v * cis(-omega * center * x))
        .collect();
    let sub = sub.with_values(centralized)?;
    let mut outcome = music(&sub, sigma, -half_width, half_width, tps, options)?;
    for y in outcome.locations.iter_mut() {
        *y += center;
    }
    Ok(outcome)
}

/// `||v||^2` helper used by tests.
pub fn sum_norm_sqr<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |a, &z| a + norm_sqr(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{synthesize, Source, SourceMeasure};

    fn meas_from(values: &[f64]) -> SampledMeasurement<f64> {
        let n = values.len();
        let grid = crate::model::uniform_grid(n);
        let vals = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        SampledMeasurement::new(grid, vals, 1.0, 0.0, false).unwrap()
    }

    fn point_measure(ys: &[f64]) -> SourceMeasure<f64> {
        SourceMeasure::new(ys.iter().map(|&y| Source::real(y, 1.0)).collect()).unwrap()
    }

    #[test]
    fn hankel_arrangement() {
        let h = build_hankel(&meas_from(&[1.0, 2.0, 3.0, 4.0, 5.0])).unwrap();
        let expect = [[1.0, 2.0, 3.0], [2.0, 3.0, 4.0], [3.0, 4.0, 5.0]];
        for p in 0..3 {
            for q in 0..3 {
                assert_eq!(h[(p, q)], Complex::new(expect[p][q], 0.0));
            }
        }
    }

    #[test]
    fn hankel_dimension_and_errors() {
        let mu = point_measure(&[0.0]);
        let y = synthesize(&mu, 1000, 1.0, 0.0, None).unwrap();
        let h = build_hankel(&y).unwrap();
        assert_eq!(h.nrows(), 500);
        assert!(h.iter().all(|&z| z == Complex::new(1.0, 0.0)));
        let svd = h.svd(false, false);
        assert_eq!(svd.rank(1e-9), 1);
        assert!(matches!(
            build_hankel(&meas_from(&[1.0, 2.0])),
            Err(Error::InsufficientSamples { needed: 3, available: 2 })
        ));
    }

    #[test]
    fn order_estimation_examples() {
        let mu = point_measure(&[-1.0, 1.5]);
        let y = synthesize(&mu, 101, 1.0, 0.0, None).unwrap();
        let svd = build_hankel(&y).unwrap().svd(false, false);
        let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        assert_eq!(estimate_order(&sv, 1e-3, 50, None), 2);
        assert_eq!(estimate_order(&sv, 1e-3, 50, Some(3)), 3);
        assert_eq!(estimate_order(&vec![0.0; 51], 1e-3, 50, None), 0);
        assert_eq!(estimate_order::<f64>(&[], 1e-3, 50, None), 0);
        assert_eq!(estimate_order(&vec![1.0; 51], 1e-3, 50, None), 50);
    }

    #[test]
    fn noise_subspace_is_orthonormal() {
        let mu = point_measure(&[-1.0, 0.7]);
        let y = synthesize(&mu, 61, 1.0, 1e-2, Some(4)).unwrap();
        let d = HankelDecomposition::new(&y, 1e-2, None, 5.0).unwrap();
        assert_eq!(d.estimated_order, 2);
        let u2 = &d.noise_subspace;
        let gram = u2.adjoint() * u2;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - Complex::new(target, 0.0)).norm() < 1e-10);
            }
        }
        assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(d.singular_values.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn steering_vector_in_signal_space_hits_cap() {
        let y = synthesize(&point_measure(&[0.0]), 21, 1.0, 0.0, None).unwrap();
        let img = imaging(&y, None, -1.0, 1.0, 0.5).unwrap();
        assert_eq!(img.values[2], IMAGING_CAP);
        assert!(img.values.iter().all(|&j| j >= 1.0));
    }

    #[test]
    fn zero_order_gives_flat_image() {
        let y = synthesize(&point_measure(&[0.3]), 31, 1.0, 0.0, None).unwrap();
        let img = imaging(&y, Some(0), -2.0, 2.0, 0.01).unwrap();
        assert!(img.values.iter().all(|&j| j == 1.0));
        let err = imaging(&y, Some(16), -2.0, 2.0, 0.01).unwrap_err();
        assert_eq!(err, Error::DegenerateNoiseSpace { order: 16, dim: 16 });
    }

    #[test]
    fn noiseless_two_sources_are_imaged_exactly() {
        let y = synthesize(&point_measure(&[-1.0, 1.0]), 101, 1.0, 0.0, None).unwrap();
        let opts = MusicOptions::default();
        let out = music(&y, 0.0, -3.0, 3.0, 1e-3, &opts).unwrap();
        assert_eq!(out.estimated_order, 2);
        assert_eq!(out.locations.len(), 2);
        assert!((out.locations[0] + 1.0).abs() <= 1e-3);
        assert!((out.locations[1] - 1.0).abs() <= 1e-3);
        // Same image through the raw peak selector.
        let params = PeakParams::defaults_for(&out.image);
        let raw = select_peaks(&out.image, params.pcr, params.dcr, params.dct);
        assert_eq!(raw.len(), 2);
    }

    #[test]
    fn peak_selection_triangle_and_flat() {
        let tri: Vec<f64> = (0..21).map(|i| 10.0 - (i as f64 - 8.0).abs()).collect();
        let img = ImagingResult { test_points: (0..21).map(|i| i as f64).collect(), values: tri, peaks: vec![] };
        assert_eq!(select_peaks(&img, 3, 3, 0.0), vec![8.0]);
        let flat = ImagingResult { test_points: img.test_points.clone(), values: vec![2.0; 21], peaks: vec![] };
        assert!(select_peaks(&flat, 3, 3, 0.1).is_empty());
        // A plateau yields one peak, not one per sample.
        let mut plateau = vec![0.0; 21];
        plateau[9] = 5.0;
        plateau[10] = 5.0;
        let img = ImagingResult { test_points: img.test_points.clone(), values: plateau, peaks: vec![] };
        assert_eq!(select_peaks(&img, 3, 3, 0.0), vec![9.0]);
    }

    #[test]
    fn prior_music_centered_source() {
        let o = 7.0;
        let y = synthesize(&point_measure(&[o]), 400, 1.0, 0.0, None).unwrap();
        let locs = music_with_prior(&y, o, 1.0, 1e-3, 0.0).unwrap();
        assert_eq!(locs.len(), 1);
        assert!((locs[0] - o).abs() <= 1e-3);
    }

    #[test]
    fn prior_music_resolves_pair_far_from_origin() {
        use std::f64::consts::PI;
        let o = 100.0 * PI;
        let y = synthesize(&point_measure(&[o - 0.5, o + 0.5]), 1000, 1.0, 0.0, None).unwrap();
        let locs = music_with_prior(&y, o, PI, 1e-3, 0.0).unwrap();
        assert_eq!(locs.len(), 2);
        assert!((locs[0] - (o - 0.5)).abs() <= 1e-2);
        assert!((locs[1] - (o + 0.5)).abs() <= 1e-2);
    }

    #[test]
    fn prior_subgrid_respects_floor_and_nyquist() {
        let y = synthesize(&point_measure(&[0.0]), 1000, 1.0, 0.0, None).unwrap();
        let idx = prior_subgrid(&y, std::f64::consts::PI, DEFAULT_MIN_SUBGRID_SAMPLES);
        assert!(idx.len() >= 2 * DEFAULT_MAX_SOURCES + 3);
        // Large half-width: Nyquist spacing is finer than the floor.
        let idx = prior_subgrid(&y, 100.0, DEFAULT_MIN_SUBGRID_SAMPLES);
        let stride = idx[1] - idx[0];
        assert!(stride as f64 * y.spacing() <= std::f64::consts::PI / 200.0 + 1e-12);
        assert!(idx.windows(2).all(|w| w[1] - w[0] == stride));
    }

    #[test]
    fn prior_music_insufficient_samples() {
        let y = synthesize(&point_measure(&[0.0]), 1000, 1.0, 0.0, None).unwrap();
        let opts = MusicOptions { min_subgrid_samples: 0, ..MusicOptions::default() };
        // Without the sample floor, a tiny prior interval leaves only two samples.
        let err = music_with_prior_outcome(&y, 0.0, 1.0, 1e-3, 0.0, &opts).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { .. }));
        let short = y.select(&[0, 1]).unwrap();
        let err = music_with_prior(&short, 0.0, 1.0, 1e-3, 0.0).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { needed: 3, available: 2 }));
    }
}
