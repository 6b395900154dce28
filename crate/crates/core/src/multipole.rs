//! Multipole bases around cluster centers and least-squares measurement
//! decoupling.
//!
//! Around a center `O`, a cluster's Fourier data expands as
//! `Y_j(x) = sum_r Q_r h_{r,O}(x)` with basis functions
//! `h_{r,O}(x) = sqrt(2r+1) exp(i Omega O x) (i x)^r` and coefficients
//! `Q_r = sum_q a_q (Omega (y_q - O))^r / (sqrt(2r+1) r!)`. Truncating at `s`
//! terms per cluster and solving one stacked least-squares problem splits the
//! global measurement into per-cluster (local) measurements. The modulated
//! variant multiplies everything by `1 - x^2`, which decorrelates distant
//! clusters much faster.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{modulation_window, SampledMeasurement, Source, SourceMeasure};
use crate::scalar::{cis, ln_factorial, rms_norm, Real};

/// Hard cap on the number of multipoles per cluster.
pub const MAX_MULTIPOLES: usize = 40;

/// Default global-fit tolerance factor (`residual <= C_mea * sigma`).
pub const DEFAULT_C_MEA: f64 = 3.0;

/// Default demodulation cutoff: local samples are kept for `|x| <= C_msf`.
pub const DEFAULT_C_MSF: f64 = 0.9;

/// Natural log of the truncation bound `D^l (l+1) / (l! sqrt(2l+1) (l+1-D))`.
pub fn ln_truncation_term(d: f64, l: usize) -> f64 {
    let lf = l as f64;
    lf * d.ln() + (lf + 1.0).ln() - ln_factorial(l) - 0.5 * (2.0 * lf + 1.0).ln() - (lf + 1.0 - d).ln()
}

/// Smallest integer `l >= D` whose truncation bound is at most `sigma / m`.
///
/// `d` is the dimensionless cluster half-width (`Omega` times the spatial
/// half-width).
pub fn multipole_order<T: Real>(d: T, sigma: T, m: T) -> Result<usize> {
    let (d, sigma, m) = (d.as_f64(), sigma.as_f64(), m.as_f64());
    if !(d > 0.0) || !(sigma > 0.0) || !(m > 0.0) {
        return Err(Error::InvalidInput(format!(
            "multipole order needs D, sigma, m > 0 (got {d}, {sigma}, {m})"
        )));
    }
    let target = (sigma / m).ln();
    let start = (d.ceil() as usize).max(1);
    (start..=MAX_MULTIPOLES)
        .find(|&l| ln_truncation_term(d, l) <= target)
        .ok_or(Error::OrderOverflow { max: MAX_MULTIPOLES })
}

/// The first `s` multipole basis vectors around one center, sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleBasis<T: Real> {
    pub center: T,
    pub order_count: usize,
    pub grid: Vec<T>,
    pub omega: T,
    pub modulated: bool,
    /// `N x s`; column `r` holds `h_{r,O}` (times `1 - x^2` when modulated).
    pub columns: DMatrix<Complex<T>>,
}

impl<T: Real> MultipoleBasis<T> {
    /// `H c`, the vector spanned by coefficients `c`.
    pub fn combine(&self, coefficients: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        &self.columns * coefficients
    }
}

/// Value of the `r`-th (optionally modulated) multipole function at `x`.
pub fn multipole_function<T: Real>(r: usize, center: T, omega: T, modulated: bool, x: T) -> Complex<T> {
    let i_pow = match r % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    };
    let mut v = cis(omega * center * x) * i_pow * (T::from_count(2 * r + 1).sqrt() * x.powi(r as i32));
    if modulated {
        v *= modulation_window(x);
    }
    v
}

/// Builds `H = (h_{0,O}, ..., h_{s-1,O})` on `grid`.
pub fn build_basis<T: Real>(center: T, s: usize, grid: &[T], omega: T, modulated: bool) -> MultipoleBasis<T> {
    let n = grid.len();
    let mut columns = DMatrix::from_element(n, s, Complex::new(T::zero(), T::zero()));
    for (l, &x) in grid.iter().enumerate() {
        let phase = cis(omega * center * x);
        let window = if modulated { modulation_window(x) } else { T::one() };
        // (i x)^r built incrementally
        let ix = Complex::new(T::zero(), x);
        let mut power = Complex::new(T::one(), T::zero());
        for r in 0..s {
            columns[(l, r)] = phase * power * (T::from_count(2 * r + 1).sqrt() * window);
            power *= ix;
        }
    }
    MultipoleBasis { center, order_count: s, grid: grid.to_vec(), omega, modulated, columns }
}

/// Multipole coefficients of a set of sources around `center`.
pub fn exact_coefficients_of<T: Real>(sources: &[Source<T>], center: T, s: usize, omega: T) -> DVector<Complex<T>> {
    let mut theta = DVector::from_element(s, Complex::new(T::zero(), T::zero()));
    for src in sources {
        let delta = omega * (src.location - center);
        // term_r = a delta^r / r!
        let mut term = src.amplitude;
        for r in 0..s {
            if r > 0 {
                term *= delta / T::from_count(r);
            }
            theta[r] += term / T::from_count(2 * r + 1).sqrt();
        }
    }
    theta
}

/// Multipole coefficients of every source in `measure` around `center`.
pub fn exact_coefficients<T: Real>(measure: &SourceMeasure<T>, center: T, s: usize, omega: T) -> DVector<Complex<T>> {
    exact_coefficients_of(measure.sources(), center, s, omega)
}

/// Decoupling knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoupleConfig<T> {
    pub c_mea: T,
    pub c_msf: T,
    /// Total variation assumed when choosing the multipole count.
    pub m: T,
    /// Use the `1 - x^2` modulated bases (the measurement must be modulated).
    pub modulated: bool,
    /// Add the global residual to every recovered local measurement.
    pub redistribute_residual: bool,
    /// Fixed multipole count instead of deriving it from `D`, `sigma`, `m`.
    pub order_override: Option<usize>,
}

impl<T: Real> Default for DecoupleConfig<T> {
    fn default() -> Self {
        Self {
            c_mea: T::lit(DEFAULT_C_MEA),
            c_msf: T::lit(DEFAULT_C_MSF),
            m: T::one(),
            modulated: true,
            redistribute_residual: true,
            order_override: None,
        }
    }
}

/// Output of [`decouple`].
#[derive(Debug, Clone)]
pub struct DecoupleResult<T: Real> {
    /// Multipoles per cluster.
    pub multipole_count: usize,
    pub centers: Vec<T>,
    /// Least-squares coefficients per cluster.
    pub coefficients: Vec<DVector<Complex<T>>>,
    /// `H[j] theta_j` on the full grid, always populated.
    pub fitted_locals: Vec<Vec<Complex<T>>>,
    /// `H[j] theta_j (+ Res)` on the full grid; empty on failure.
    pub modulated_locals: Vec<Vec<Complex<T>>>,
    /// Demodulated local measurements (truncated to `|x| <= C_msf` when
    /// modulated); empty on failure.
    pub local_measurements: Vec<SampledMeasurement<T>>,
    /// `Y - sum_j H[j] theta_j`.
    pub residual: Vec<Complex<T>>,
    /// `||residual|| / sqrt(N)`.
    pub residual_norm: T,
    pub success: bool,
    /// Reciprocal 2-norm condition number of the stacked basis.
    pub rcond: T,
    pub conditioning_warning: Option<String>,
}

/// Splits `meas` into per-cluster local measurements around `centers`.
///
/// `half_width` is the largest spatial cluster half-width; the multipole count
/// is `multipole_order(Omega * half_width, sigma, m)` unless overridden. The
/// stacked least-squares problem is solved through a Householder QR
/// factorization; when the stacked basis is numerically rank deficient a
/// least-norm solution is used and a warning is attached.
pub fn decouple<T: Real>(
    meas: &SampledMeasurement<T>,
    centers: &[T],
    half_width: T,
    sigma: T,
    config: &DecoupleConfig<T>,
) -> Result<DecoupleResult<T>> {
    if centers.is_empty() {
        return Err(Error::InvalidInput("no cluster centers given".into()));
    }
    if meas.is_modulated() != config.modulated {
        return Err(Error::InvalidState(if config.modulated {
            "modulated decoupling needs a modulated measurement".into()
        } else {
            "plain decoupling needs an unmodulated measurement".into()
        }));
    }
    if !(config.c_msf > T::zero() && config.c_msf < T::one()) {
        return Err(Error::InvalidInput("C_msf must lie in (0, 1)".into()));
    }
    let mut sorted = centers.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("cluster centers must be pairwise distinct".into()));
    }

    let omega = meas.omega();
    let s = match config.order_override {
        Some(s) => s,
        None => multipole_order(omega * half_width, sigma, config.m)?,
    };
    let k = centers.len();
    let n = meas.len();
    let grid = meas.grid();

    let bases: Vec<MultipoleBasis<T>> = centers
        .iter()
        .map(|&c| build_basis(c, s, grid, omega, config.modulated))
        .collect();
    let mut stacked = DMatrix::from_element(n, k * s, Complex::new(T::zero(), T::zero()));
    for (j, b) in bases.iter().enumerate() {
        stacked.columns_mut(j * s, s).copy_from(&b.columns);
    }

    let y = DVector::from_column_slice(meas.values());
    let (theta, rcond, warning) = solve_least_squares(stacked, &y);

    let coefficients: Vec<DVector<Complex<T>>> = (0..k).map(|j| theta.rows(j * s, s).into_owned()).collect();
    let fitted_locals: Vec<Vec<Complex<T>>> = bases
        .iter()
        .zip(&coefficients)
        .map(|(b, c)| b.combine(c).as_slice().to_vec())
        .collect();
    let mut residual: Vec<Complex<T>> = meas.values().to_vec();
    for fitted in &fitted_locals {
        for (r, f) in residual.iter_mut().zip(fitted) {
            *r -= *f;
        }
    }
    let residual_norm = rms_norm(&residual);
    let success = residual_norm <= config.c_mea * sigma;

    let mut result = DecoupleResult {
        multipole_count: s,
        centers: centers.to_vec(),
        coefficients,
        fitted_locals,
        modulated_locals: Vec::new(),
        local_measurements: Vec::new(),
        residual,
        residual_norm,
        success,
        rcond,
        conditioning_warning: warning,
    };
    if !success {
        return Ok(result);
    }

    let keep: Vec<usize> = if config.modulated {
        (0..n).filter(|&l| grid[l].abs() <= config.c_msf).collect()
    } else {
        (0..n).collect()
    };
    for fitted in &result.fitted_locals {
        let local: Vec<Complex<T>> = if config.redistribute_residual {
            fitted.iter().zip(&result.residual).map(|(f, r)| *f + *r).collect()
        } else {
            fitted.clone()
        };
        let demodulated: Vec<Complex<T>> = keep
            .iter()
            .map(|&l| {
                if config.modulated {
                    local[l] / modulation_window(grid[l])
                } else {
                    local[l]
                }
            })
            .collect();
        let kept_grid: Vec<T> = keep.iter().map(|&l| grid[l]).collect();
        result
            .local_measurements
            .push(SampledMeasurement::new(kept_grid, demodulated, omega, meas.sigma(), false)?);
        result.modulated_locals.push(local);
    }
    Ok(result)
}

/// Least squares `min ||A theta - y||` via QR; falls back to the least-norm
/// solution when `A` is numerically rank deficient.
fn solve_least_squares<T: Real>(
    a: DMatrix<Complex<T>>,
    y: &DVector<Complex<T>>,
) -> (DVector<Complex<T>>, T, Option<String>) {
    let (n, p) = a.shape();
    let qr = a.qr();
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, p.min(n)).into_owned();
    let r = qr.r();
    let dec = linalg::svd(&r);
    let rcond = dec.rcond();
    let smax = dec.singular_values.first().copied().unwrap_or(T::zero());
    let tol = T::lit(10.0) * T::machine_eps() * T::from_count(n.max(p));
    if rcond > tol {
        if let Some(theta) = r.solve_upper_triangular(&rhs) {
            return (theta, rcond, None);
        }
    }
    let theta = dec.solve(&rhs, tol * smax);
    let warning = format!("stacked multipole basis is ill-conditioned (rcond = {:e}); using least-norm solution", rcond.as_f64());
    (theta, rcond, Some(warning))
}
