//! Point-source measures, multi-cluster regions, and the band-limited
//! Fourier forward model.
//!
//! A measure `mu = sum_q a_q delta_{y_q}` is observed through `N` samples
//! `Y(x_l) = sum_q a_q exp(i Omega y_q x_l) + W(x_l)` on an evenly spaced grid
//! in `[-1, 1]`, with the noise bounded by `||W||_2 / sqrt(N) <= sigma`.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::scalar::{cis, modulus, rms_norm, Real};

/// One point source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source<T> {
    pub location: T,
    pub amplitude: Complex<T>,
}

impl<T: Real> Source<T> {
    pub fn new(location: T, amplitude: Complex<T>) -> Self {
        Self { location, amplitude }
    }

    /// Source with a real amplitude.
    pub fn real(location: T, amplitude: T) -> Self {
        Self::new(location, Complex::new(amplitude, T::zero()))
    }
}

/// Discrete measure: a nonempty list of sources with nonzero amplitudes,
/// optionally tagged with the cluster each source belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceMeasure<T> {
    sources: Vec<Source<T>>,
    cluster_assignment: Option<Vec<usize>>,
}

impl<T: Real> SourceMeasure<T> {
    pub fn new(sources: Vec<Source<T>>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::InvalidInput("measure has no sources".into()));
        }
        for (q, s) in sources.iter().enumerate() {
            if !s.location.is_finite() {
                return Err(Error::InvalidInput(format!("source {q} has a non-finite location")));
            }
            let m = modulus(s.amplitude);
            if !(m > T::zero()) || !m.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "source {q} has a zero or non-finite amplitude"
                )));
            }
        }
        Ok(Self { sources, cluster_assignment: None })
    }

    /// Measure with a cluster index per source.
    pub fn with_clusters(sources: Vec<Source<T>>, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != sources.len() {
            return Err(Error::InvalidInput(format!(
                "cluster assignment has {} entries for {} sources",
                assignment.len(),
                sources.len()
            )));
        }
        let mut m = Self::new(sources)?;
        m.cluster_assignment = Some(assignment);
        Ok(m)
    }

    pub fn sources(&self) -> &[Source<T>] {
        &self.sources
    }

    pub fn cluster_assignment(&self) -> Option<&[usize]> {
        self.cluster_assignment.as_deref()
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// Total variation `m = sum |a_q|`.
    pub fn total_variation(&self) -> T {
        self.sources.iter().fold(T::zero(), |acc, s| acc + modulus(s.amplitude))
    }

    /// `m_min = min |a_q|`.
    pub fn min_amplitude(&self) -> T {
        self.sources
            .iter()
            .map(|s| modulus(s.amplitude))
            .fold(T::max_value().unwrap(), |a, b| a.min(b))
    }

    /// Source locations sorted ascending.
    pub fn sorted_locations(&self) -> Vec<T> {
        let mut y: Vec<T> = self.sources.iter().map(|s| s.location).collect();
        y.sort_by(|a, b| a.partial_cmp(b).unwrap());
        y
    }

    /// Smallest gap between any two sources; `None` for a single source.
    pub fn min_separation(&self) -> Option<T> {
        let y = self.sorted_locations();
        y.windows(2).map(|w| w[1] - w[0]).reduce(|a, b| a.min(b))
    }

    /// Sources belonging to cluster `j` (empty when no assignment is present).
    pub fn cluster_members(&self, j: usize) -> Vec<Source<T>> {
        match &self.cluster_assignment {
            Some(a) => self
                .sources
                .iter()
                .zip(a)
                .filter(|(_, &c)| c == j)
                .map(|(s, _)| *s)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Same measure translated by `delta`.
    pub fn shifted(&self, delta: T) -> Self {
        Self {
            sources: self
                .sources
                .iter()
                .map(|s| Source::new(s.location + delta, s.amplitude))
                .collect(),
            cluster_assignment: self.cluster_assignment.clone(),
        }
    }

    /// Sum of two measures (concatenation of the source lists).
    pub fn superpose(&self, other: &Self) -> Self {
        let mut sources = self.sources.clone();
        sources.extend_from_slice(&other.sources);
        Self { sources, cluster_assignment: None }
    }

    /// Fourier transform `F[mu](x) = sum_q a_q exp(i Omega y_q x)`.
    pub fn fourier(&self, x: T, omega: T) -> Complex<T> {
        self.sources
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, s| {
                acc + s.amplitude * cis(omega * s.location * x)
            })
    }
}

/// A `(K, L, D, Omega)`-region: `K` intervals centered at `centers` with
/// spatial half-widths `half_widths` (`D_j / Omega`), pairwise center gaps at
/// least `separation / Omega`, and every `D_j <= max_half_width`.
///
/// `separation` and `max_half_width` are dimensionless (units of `1/Omega`).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRegion<T> {
    centers: Vec<T>,
    half_widths: Vec<T>,
    separation: T,
    max_half_width: T,
    omega: T,
}

impl<T: Real> ClusterRegion<T> {
    pub fn new(
        centers: Vec<T>,
        half_widths: Vec<T>,
        separation: T,
        max_half_width: T,
        omega: T,
    ) -> Result<Self> {
        let region = Self { centers, half_widths, separation, max_half_width, omega };
        region.check()?;
        Ok(region)
    }

    /// Verifies the region invariants.
    pub fn check(&self) -> Result<()> {
        if self.centers.is_empty() {
            return Err(Error::InvalidInput("region has no clusters".into()));
        }
        if self.centers.len() != self.half_widths.len() {
            return Err(Error::InvalidInput("centers and half_widths differ in length".into()));
        }
        if !(self.omega > T::zero()) {
            return Err(Error::InvalidInput("omega must be positive".into()));
        }
        let tol = T::lit(1e-9);
        for (j, &w) in self.half_widths.iter().enumerate() {
            if w < T::zero() || w * self.omega > self.max_half_width * (T::one() + tol) {
                return Err(Error::InvalidInput(format!(
                    "cluster {j} half-width {w} exceeds D/Omega"
                )));
            }
        }
        let mut c = self.centers.clone();
        c.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let min_gap = self.separation / self.omega;
        for w in c.windows(2) {
            if w[1] - w[0] < min_gap * (T::one() - tol) {
                return Err(Error::InvalidInput(format!(
                    "cluster centers {} and {} closer than L/Omega = {}",
                    w[0], w[1], min_gap
                )));
            }
        }
        Ok(())
    }

    pub fn centers(&self) -> &[T] {
        &self.centers
    }

    pub fn half_widths(&self) -> &[T] {
        &self.half_widths
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn separation(&self) -> T {
        self.separation
    }

    pub fn max_half_width(&self) -> T {
        self.max_half_width
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    /// Index of the interval containing `y`, if any.
    pub fn containing(&self, y: T) -> Option<usize> {
        let tol = T::lit(1e-12);
        self.centers
            .iter()
            .zip(&self.half_widths)
            .position(|(&c, &w)| (y - c).abs() <= w + tol)
    }

    /// Index of the nearest center.
    pub fn nearest(&self, y: T) -> usize {
        let mut best = 0;
        for (j, &c) in self.centers.iter().enumerate() {
            if (y - c).abs() < (y - self.centers[best]).abs() {
                best = j;
            }
        }
        best
    }
}

/// Evenly spaced grid `x_l = -1 + 2l/(n-1)`, `l = 0..n`, exactly antisymmetric.
pub fn uniform_grid<T: Real>(n: usize) -> Vec<T> {
    assert!(n >= 2, "grid needs at least two points");
    let denom = T::from_count(n - 1);
    (0..n)
        .map(|l| {
            let num = 2.0 * l as f64 - (n - 1) as f64;
            T::lit(num) / denom
        })
        .collect()
}

/// Complex Fourier samples on an evenly spaced grid inside `[-1, 1]`.
///
/// Full measurements cover the whole interval; subsampled and truncated
/// measurements keep the spacing but cover a sub-interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMeasurement<T> {
    grid: Vec<T>,
    values: Vec<Complex<T>>,
    omega: T,
    sigma: T,
    modulated: bool,
}

impl<T: Real> SampledMeasurement<T> {
    pub fn new(
        grid: Vec<T>,
        values: Vec<Complex<T>>,
        omega: T,
        sigma: T,
        modulated: bool,
    ) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "grid has {} points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.is_empty() {
            return Err(Error::InvalidInput("empty measurement".into()));
        }
        if !(omega > T::zero()) {
            return Err(Error::InvalidInput("omega must be positive".into()));
        }
        if sigma < T::zero() {
            return Err(Error::InvalidInput("sigma must be nonnegative".into()));
        }
        let one = T::one() + T::lit(1e-12);
        if grid.iter().any(|x| !x.is_finite() || x.abs() > one) {
            return Err(Error::InvalidInput("grid points must lie in [-1, 1]".into()));
        }
        if grid.len() >= 2 {
            let h = grid[1] - grid[0];
            if !(h > T::zero()) {
                return Err(Error::InvalidInput("grid must be strictly increasing".into()));
            }
            // consecutive differences of rounded points are off by a few ulps
            let tol = h * T::lit(1e-6) + T::lit(8.0) * T::machine_eps();
            for w in grid.windows(2) {
                if ((w[1] - w[0]) - h).abs() > tol {
                    return Err(Error::InvalidInput("grid must be evenly spaced".into()));
                }
            }
        }
        Ok(Self { grid, values, omega, sigma, modulated })
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn is_modulated(&self) -> bool {
        self.modulated
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Grid spacing; zero for a single sample.
    pub fn spacing(&self) -> T {
        if self.grid.len() < 2 {
            T::zero()
        } else {
            (self.grid[self.grid.len() - 1] - self.grid[0]) / T::from_count(self.grid.len() - 1)
        }
    }

    /// Same grid and metadata with replaced values.
    pub fn with_values(&self, values: Vec<Complex<T>>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.omega, self.sigma, self.modulated)
    }

    /// Sub-measurement at the given (increasing, evenly strided) indices.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let grid = indices.iter().map(|&i| self.grid[i]).collect();
        let values = indices.iter().map(|&i| self.values[i]).collect();
        Self::new(grid, values, self.omega, self.sigma, self.modulated)
    }
}

/// Synthesizes `N` samples of `F[mu]` on the uniform grid, plus noise when a
/// seed is given.
///
/// Noise is iid circular complex Gaussian with per-component standard
/// deviation `sigma / sqrt(2)`, rescaled so that `||W||_2 / sqrt(N) <= sigma`
/// always holds.
pub fn synthesize<T: Real>(
    measure: &SourceMeasure<T>,
    n: usize,
    omega: T,
    sigma: T,
    seed: Option<u64>,
) -> Result<SampledMeasurement<T>> {
    if measure.is_empty() {
        return Err(Error::InvalidInput("measure has no sources".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("need N >= 2 samples, got {n}")));
    }
    if sigma < T::zero() {
        return Err(Error::InvalidInput("sigma must be nonnegative".into()));
    }
    let grid = uniform_grid::<T>(n);
    let mut values: Vec<Complex<T>> = grid.iter().map(|&x| measure.fourier(x, omega)).collect();
    if let Some(seed) = seed {
        let noise = noise_vector(n, sigma, seed);
        for (v, w) in values.iter_mut().zip(noise) {
            *v += w;
        }
    }
    SampledMeasurement::new(grid, values, omega, sigma, false)
}

/// Noise realization with `rms <= sigma`.
pub fn noise_vector<T: Real>(n: usize, sigma: T, seed: u64) -> Vec<Complex<T>> {
    let s = sigma.as_f64();
    if s == 0.0 || n == 0 {
        return vec![Complex::new(T::zero(), T::zero()); n];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, s / 2f64.sqrt()).expect("valid normal");
    let raw: Vec<(f64, f64)> = (0..n).map(|_| (normal.sample(&mut rng), normal.sample(&mut rng))).collect();
    let rms = (raw.iter().map(|(a, b)| a * a + b * b).sum::<f64>() / n as f64).sqrt();
    // Rescale with a hair of headroom so rounding in T cannot push the bound over.
    let scale = if rms > s { s / rms * (1.0 - 1e-12) } else { 1.0 };
    let w: Vec<Complex<T>> = raw
        .into_iter()
        .map(|(a, b)| Complex::new(T::lit(a * scale), T::lit(b * scale)))
        .collect();
    debug_assert!(rms_norm(&w) <= sigma);
    w
}

/// Modulation window `f(x) = 1 - x^2`.
#[inline]
pub fn modulation_window<T: Real>(x: T) -> T {
    T::one() - x * x
}

/// Multiplies every sample by `1 - x_l^2`.
pub fn modulate<T: Real>(meas: &SampledMeasurement<T>) -> Result<SampledMeasurement<T>> {
    if meas.is_modulated() {
        return Err(Error::InvalidState("measurement is already modulated".into()));
    }
    let values = meas
        .grid
        .iter()
        .zip(&meas.values)
        .map(|(&x, &v)| v * modulation_window(x))
        .collect();
    let mut out = meas.with_values(values)?;
    out.modulated = true;
    Ok(out)
}

/// How sources are laid out inside each cluster interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement<T> {
    /// Uniform in the interval, rejecting draws closer than `min_separation`.
    Uniform { min_separation: T },
    /// A chain with consecutive gaps `spacing * (1 + u)`, `u` uniform in `[-jitter, jitter]`.
    Chain { spacing: T, jitter: T },
}

/// Parameters for [`random_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec<T> {
    pub k_min: usize,
    pub k_max: usize,
    /// `L`, minimum center separation in units of `1/Omega`.
    pub separation: T,
    /// `D`, cluster half-width in units of `1/Omega`; every cluster uses it.
    pub half_width: T,
    pub omega: T,
    pub sources_min: usize,
    pub sources_max: usize,
    pub placement: Placement<T>,
    /// Amplitude modulus range; phases are uniform on `[0, 2 pi)`.
    pub amplitude_range: (T, T),
    /// Consecutive center gaps are `(L/Omega) * (1 + spread * u)`, `u ~ U[0,1)`.
    pub gap_spread: T,
    /// Rescale amplitudes so the total variation equals this value.
    pub total_variation: Option<T>,
}

impl<T: Real> InstanceSpec<T> {
    /// `K` clusters drawn from `k_min..=k_max`, one to `sources_max` sources each.
    pub fn new(k_min: usize, k_max: usize, separation: T, half_width: T, omega: T) -> Self {
        Self {
            k_min,
            k_max,
            separation,
            half_width,
            omega,
            sources_min: 1,
            sources_max: 1,
            placement: Placement::Uniform { min_separation: T::zero() },
            amplitude_range: (T::lit(0.5), T::lit(2.0)),
            gap_spread: T::lit(0.5),
            total_variation: None,
        }
    }

    pub fn sources_per_cluster(mut self, min: usize, max: usize) -> Self {
        self.sources_min = min;
        self.sources_max = max;
        self
    }

    pub fn placement(mut self, placement: Placement<T>) -> Self {
        self.placement = placement;
        self
    }

    pub fn amplitude_range(mut self, lo: T, hi: T) -> Self {
        self.amplitude_range = (lo, hi);
        self
    }

    pub fn gap_spread(mut self, spread: T) -> Self {
        self.gap_spread = spread;
        self
    }

    pub fn total_variation(mut self, m: T) -> Self {
        self.total_variation = Some(m);
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Generation(msg.to_string()));
        if self.k_min == 0 || self.k_min > self.k_max {
            return bad("cluster count range must satisfy 1 <= k_min <= k_max");
        }
        if self.sources_min == 0 || self.sources_min > self.sources_max {
            return bad("source count range must satisfy 1 <= min <= max");
        }
        if !(self.omega > T::zero()) || !(self.half_width > T::zero()) {
            return bad("omega and D must be positive");
        }
        if !(self.separation > T::lit(2.0) * self.half_width) {
            return bad("clusters overlap: need L > 2D");
        }
        let (lo, hi) = self.amplitude_range;
        if !(lo > T::zero()) || hi < lo {
            return bad("amplitude range must satisfy 0 < lo <= hi");
        }
        let width = T::lit(2.0) * self.half_width / self.omega;
        let gaps = T::from_count(self.sources_max - 1);
        let needed = match self.placement {
            Placement::Uniform { min_separation } => gaps * min_separation,
            Placement::Chain { spacing, jitter } => gaps * spacing * (T::one() + jitter.abs()),
        };
        if needed > width {
            return Err(Error::Generation(format!(
                "{} sources cannot fit in an interval of width {width} at the requested separation",
                self.sources_max
            )));
        }
        Ok(())
    }
}

/// Draws a random multi-cluster instance; identical seeds give identical instances.
pub fn random_instance<T: Real>(
    spec: &InstanceSpec<T>,
    seed: u64,
) -> Result<(SourceMeasure<T>, ClusterRegion<T>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = |x: T| x.as_f64();
    let k = rng.random_range(spec.k_min..=spec.k_max);
    let omega = f(spec.omega);
    let min_gap = f(spec.separation) / omega;
    let half = f(spec.half_width) / omega;

    let mut centers = vec![0.0f64];
    for _ in 1..k {
        let gap = min_gap * (1.0 + f(spec.gap_spread) * rng.random::<f64>());
        centers.push(centers.last().unwrap() + gap);
    }
    let mid = 0.5 * (centers[0] + centers[k - 1]);
    centers.iter_mut().for_each(|c| *c -= mid);

    let mut locations = Vec::new();
    let mut assignment = Vec::new();
    for (j, &c) in centers.iter().enumerate() {
        let n = rng.random_range(spec.sources_min..=spec.sources_max);
        let ys = place_sources(&mut rng, spec.placement, n, c - half, c + half)?;
        for y in ys {
            locations.push(y);
            assignment.push(j);
        }
    }

    let (lo, hi) = (f(spec.amplitude_range.0), f(spec.amplitude_range.1));
    let mut amps: Vec<(f64, f64)> = locations
        .iter()
        .map(|_| {
            let r = if hi > lo { rng.random_range(lo..hi) } else { lo };
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            (r, phase)
        })
        .collect();
    if let Some(m) = spec.total_variation {
        let total: f64 = amps.iter().map(|a| a.0).sum();
        let scale = f(m) / total;
        amps.iter_mut().for_each(|a| a.0 *= scale);
    }

    let sources = locations
        .iter()
        .zip(&amps)
        .map(|(&y, &(r, p))| Source::new(T::lit(y), Complex::new(T::lit(r * p.cos()), T::lit(r * p.sin()))))
        .collect();
    let measure = SourceMeasure::with_clusters(sources, assignment)?;
    let region = ClusterRegion::new(
        centers.into_iter().map(T::lit).collect(),
        vec![T::lit(half); k],
        spec.separation,
        spec.half_width,
        spec.omega,
    )?;
    Ok((measure, region))
}

fn place_sources<R: Rng>(
    rng: &mut R,
    placement: Placement<impl Real>,
    n: usize,
    lo: f64,
    hi: f64,
) -> Result<Vec<f64>> {
    match placement {
        Placement::Uniform { min_separation } => {
            let sep = min_separation.as_f64();
            for _ in 0..10_000 {
                let mut ys: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
                ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
                if ys.windows(2).all(|w| w[1] - w[0] >= sep) {
                    return Ok(ys);
                }
            }
            Err(Error::Generation(format!(
                "could not place {n} sources in [{lo}, {hi}] with separation {sep}"
            )))
        }
        Placement::Chain { spacing, jitter } => {
            let (sp, jit) = (spacing.as_f64(), jitter.as_f64().abs());
            let gaps: Vec<f64> = (1..n)
                .map(|_| sp * (1.0 + if jit > 0.0 { rng.random_range(-jit..=jit) } else { 0.0 }))
                .collect();
            let len: f64 = gaps.iter().sum();
            let start = if hi - len > lo { rng.random_range(lo..=hi - len) } else { lo };
            let mut ys = vec![start];
            for g in gaps {
                ys.push(ys.last().unwrap() + g);
            }
            Ok(ys)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(y: f64) -> Source<f64> {
        Source::real(y, 1.0)
    }

    #[test]
    fn grid_is_symmetric_and_even() {
        let g = uniform_grid::<f64>(11);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[10], 1.0);
        for l in 0..11 {
            assert_eq!(g[l], -g[10 - l]);
        }
        assert_eq!(g[5], 0.0);
    }

    #[test]
    fn source_at_origin_gives_ones() {
        let mu = SourceMeasure::new(vec![unit(0.0)]).unwrap();
        let y = synthesize(&mu, 17, 1.0, 0.0, None).unwrap();
        for v in y.values() {
            assert_eq!(*v, Complex::new(1.0, 0.0));
        }
    }

    #[test]
    fn single_source_matches_formula() {
        let mu = SourceMeasure::new(vec![unit(2.5)]).unwrap();
        let omega = 3.0;
        let y = synthesize(&mu, 33, omega, 0.0, None).unwrap();
        for (&x, v) in y.grid().iter().zip(y.values()) {
            let expect = cis(omega * 2.5 * x);
            assert!((v - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn symmetric_pair_gives_cosine() {
        let mu = SourceMeasure::new(vec![unit(-1.3), unit(1.3)]).unwrap();
        let y = synthesize(&mu, 41, 2.0, 0.0, None).unwrap();
        for (&x, v) in y.grid().iter().zip(y.values()) {
            assert!((v.re - 2.0 * (2.0 * 1.3 * x).cos()).abs() < 1e-13);
            assert!(v.im.abs() < 1e-13);
        }
    }

    #[test]
    fn sigma_zero_seed_none_is_noiseless() {
        let mu = SourceMeasure::new(vec![unit(0.0)]).unwrap();
        let y = synthesize(&mu, 8, 1.0, 0.5, None).unwrap();
        assert!(y.values().iter().all(|v| *v == Complex::new(1.0, 0.0)));
    }

    #[test]
    fn noise_respects_bound() {
        for seed in 0..50 {
            let w = noise_vector::<f64>(200, 1e-3, seed);
            assert!(rms_norm(&w) <= 1e-3);
        }
        let w = noise_vector::<f32>(64, 1e-2, 3);
        assert!(rms_norm(&w) <= 1e-2);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SourceMeasure::<f64>::new(vec![]).is_err());
        assert!(SourceMeasure::new(vec![Source::real(0.0, 0.0)]).is_err());
        let mu = SourceMeasure::new(vec![unit(0.0)]).unwrap();
        assert!(synthesize(&mu, 1, 1.0, 0.0, None).is_err());
        assert!(synthesize(&mu, 10, 1.0, -1.0, None).is_err());
    }

    #[test]
    fn modulate_examples() {
        let grid = vec![-1.0, -0.5, 0.0, 0.5, 1.0];
        let vals = vec![Complex::new(3.0, 1.0), Complex::new(2.0, 0.0), Complex::new(1.0, 0.0), Complex::new(2.0, 0.0), Complex::new(-4.0, 2.0)];
        let m = SampledMeasurement::new(grid, vals, 1.0, 0.0, false).unwrap();
        let t = modulate(&m).unwrap();
        assert!(t.is_modulated());
        assert_eq!(t.values()[0], Complex::new(0.0, 0.0));
        assert_eq!(t.values()[4], Complex::new(0.0, 0.0));
        assert_eq!(t.values()[2], Complex::new(1.0, 0.0));
        assert_eq!(t.values()[3], Complex::new(1.5, 0.0));
        assert_eq!(modulate(&t), Err(Error::InvalidState("measurement is already modulated".into())));
    }

    #[test]
    fn measurement_validation() {
        let c = Complex::new(0.0, 0.0);
        assert!(SampledMeasurement::new(vec![0.0, 0.1], vec![c], 1.0, 0.0, false).is_err());
        assert!(SampledMeasurement::new(vec![0.0, 0.1, 0.3], vec![c; 3], 1.0, 0.0, false).is_err());
        assert!(SampledMeasurement::new(vec![0.1, 0.0], vec![c; 2], 1.0, 0.0, false).is_err());
        assert!(SampledMeasurement::new(vec![0.0, 1.5], vec![c; 2], 1.0, 0.0, false).is_err());
    }

    #[test]
    fn degenerate_instance() {
        let spec = InstanceSpec::new(1, 1, 12.0 * std::f64::consts::PI, std::f64::consts::PI, 1.0);
        let (mu, region) = random_instance(&spec, 42).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(region.k(), 1);
        assert_eq!(region.containing(mu.sources()[0].location), Some(0));
    }

    #[test]
    fn instance_is_deterministic() {
        let spec = InstanceSpec::new(2, 5, 12.0 * std::f64::consts::PI, std::f64::consts::PI, 1.0)
            .sources_per_cluster(1, 3)
            .placement(Placement::Uniform { min_separation: 0.5 });
        let a = random_instance(&spec, 9).unwrap();
        let b = random_instance(&spec, 9).unwrap();
        assert_eq!(a, b);
        let c = random_instance(&spec, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_instances_satisfy_region_invariants() {
        use std::f64::consts::PI;
        let spec = InstanceSpec::new(2, 5, 12.0 * PI, PI, 1.0)
            .sources_per_cluster(1, 3)
            .placement(Placement::Uniform { min_separation: 0.8 });
        for seed in 0..200 {
            let (mu, region) = random_instance(&spec, seed).unwrap();
            region.check().unwrap();
            assert!((2..=5).contains(&region.k()));
            let assignment = mu.cluster_assignment().unwrap();
            for (s, &j) in mu.sources().iter().zip(assignment) {
                assert!((s.location - region.centers()[j]).abs() <= region.half_widths()[j] + 1e-12);
                let a = modulus(s.amplitude);
                assert!((0.5..=2.0).contains(&a));
            }
            for j in 0..region.k() {
                let mut ys: Vec<f64> = mu.cluster_members(j).iter().map(|s| s.location).collect();
                ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert!(ys.windows(2).all(|w| w[1] - w[0] >= 0.8));
            }
        }
    }

    #[test]
    fn infeasible_geometry_is_reported() {
        let spec = InstanceSpec::new(1, 1, 10.0, 1.0, 1.0)
            .sources_per_cluster(5, 5)
            .placement(Placement::Uniform { min_separation: 1.0 });
        assert!(matches!(random_instance(&spec, 0), Err(Error::Generation(_))));
        let overlapping = InstanceSpec::new(2, 2, 1.0, 1.0, 1.0);
        assert!(matches!(random_instance(&overlapping, 0), Err(Error::Generation(_))));
    }

    #[test]
    fn total_variation_normalization() {
        let spec = InstanceSpec::<f64>::new(3, 3, 40.0, 2.0, 1.0).sources_per_cluster(2, 2).total_variation(1.0);
        let (mu, _) = random_instance(&spec, 1).unwrap();
        assert!((mu.total_variation() - 1.0).abs() < 1e-12);
    }
}
