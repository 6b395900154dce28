//! Numerical checks of the inequalities behind the decoupling theory.
//!
//! Everything here works in `f64`: the routines are oracles for tests and
//! sweeps, not part of the recovery pipeline. Sup-norms on `[-1, 1]` come
//! from a dense grid refined at the critical points, integrals from adaptive
//! Gauss-Kronrod (7/15) quadrature.

use nalgebra::{Complex, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{uniform_grid, ClusterRegion, SourceMeasure};
use crate::multipole::{build_basis, exact_coefficients_of, multipole_order, MultipoleBasis};

/// Points of the dense grid used for sup-norms.
pub const SUP_GRID_POINTS: usize = 10_001;
/// Samples used for the large-`N` inner products of multipole bases.
pub const DENSE_SAMPLES: usize = 100_000;
/// Absolute slack allowed between a measured value and its bound.
pub const ORACLE_TOLERANCE: f64 = 1e-8;
/// Boundary-condition tolerance for the second oscillatory branch.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Real polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealPolynomial {
    coefficients: Vec<f64>,
}

impl RealPolynomial {
    /// Trailing zero coefficients are dropped, so the leading one is nonzero
    /// unless the polynomial is zero.
    pub fn new(mut coefficients: Vec<f64>) -> Self {
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    pub fn zero() -> Self {
        Self { coefficients: Vec::new() }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// `k`-th derivative.
    pub fn derivative_n(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut c = vec![0.0; self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// `sup |p|` over `[-1, 1]`.
    pub fn sup_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut best = self.eval(-1.0).abs().max(self.eval(1.0).abs());
        for x in self.derivative().roots_in_unit_interval() {
            best = best.max(self.eval(x).abs());
        }
        for &x in dense_points().iter() {
            best = best.max(self.eval(x).abs());
        }
        best
    }

    /// `int_{-1}^{1} |p|`, split at the real roots so each piece is smooth.
    pub fn l1_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut cuts = vec![-1.0];
        cuts.extend(self.roots_in_unit_interval());
        cuts.push(1.0);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| integrate(|x| self.eval(x).abs(), w[0], w[1], 1e-13).value)
            .sum()
    }

    /// Sign changes of `p` on the dense grid, refined by bisection. Roots of
    /// even multiplicity are not reported.
    pub fn roots_in_unit_interval(&self) -> Vec<f64> {
        if self.degree() == 0 {
            return Vec::new();
        }
        let pts = dense_points();
        let mut roots = Vec::new();
        let mut prev = (pts[0], self.eval(pts[0]));
        for &x in &pts[1..] {
            let v = self.eval(x);
            if v == 0.0 {
                roots.push(x);
            } else if prev.1 != 0.0 && (v > 0.0) != (prev.1 > 0.0) {
                roots.push(self.bisect(prev.0, x));
            }
            prev = (x, v);
        }
        roots
    }

    fn bisect(&self, mut a: f64, mut b: f64) -> f64 {
        let fa_pos = self.eval(a) > 0.0;
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if (self.eval(m) > 0.0) == fa_pos {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

fn dense_points() -> Vec<f64> {
    uniform_grid::<f64>(SUP_GRID_POINTS)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the Kronrod-Gauss differences over the accepted panels.
    pub error: f64,
    pub evaluations: usize,
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (0.949.., 0.741.., 0.405.., 0).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = 0.0;
    let mut g = 0.0;
    for i in 0..8 {
        let x = KRONROD_NODES[i];
        let v = if x == 0.0 { f(c) } else { f(c - h * x) + f(c + h * x) };
        k += KRONROD_WEIGHTS[i] * v;
        if i % 2 == 1 {
            g += GAUSS_WEIGHTS[i / 2] * v;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Quadrature {
    integrate_panels(&f, a, b, 1, tol)
}

/// [`integrate`] after splitting `[a, b]` into `panels` equal pieces.
pub fn integrate_panels(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, tol: f64) -> Quadrature {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut out = Quadrature { value: 0.0, error: 0.0, evaluations: 0 };
    let mut stack: Vec<(f64, f64, f64, usize)> = (0..panels)
        .map(|p| {
            let lo = a + width * p as f64;
            let hi = if p + 1 == panels { b } else { lo + width };
            (lo, hi, tol / panels as f64, 0)
        })
        .collect();
    while let Some((lo, hi, local_tol, depth)) = stack.pop() {
        let (v, e) = kronrod_panel(f, lo, hi);
        out.evaluations += 15;
        if e <= local_tol || depth >= 40 || hi - lo < 1e-14 {
            out.value += v;
            out.error += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * local_tol, depth + 1));
            stack.push((mid, hi, 0.5 * local_tol, depth + 1));
        }
    }
    out
}

/// `int_{-1}^{1} e^{i lam x} psi(x) dx`. The interval starts out split into
/// one panel per half period, so every period gets at least 30 nodes.
pub fn oscillatory_integral(psi: &RealPolynomial, lam: f64, tol: f64) -> Complex<f64> {
    oscillatory_integral_panels(psi, lam, tol, 1)
}

/// [`oscillatory_integral`] with `refine` times as many initial panels.
pub fn oscillatory_integral_panels(psi: &RealPolynomial, lam: f64, tol: f64, refine: usize) -> Complex<f64> {
    let periods = (lam.abs() / std::f64::consts::PI).ceil() as usize;
    let panels = periods.max(1) * refine.max(1);
    let re = integrate_panels(&|x: f64| psi.eval(x) * (lam * x).cos(), -1.0, 1.0, panels, tol);
    let im = integrate_panels(&|x: f64| psi.eval(x) * (lam * x).sin(), -1.0, 1.0, panels, tol);
    Complex::new(re.value, im.value)
}

/// `n^2 (n^2 - 1) ... (n^2 - (k-1)^2) / (1 * 3 * ... * (2k-1))`.
pub fn markov_factor(n: usize, k: usize) -> f64 {
    let n2 = (n * n) as f64;
    (0..k).fold(1.0, |acc, j| acc * (n2 - (j * j) as f64) / (2 * j + 1) as f64)
}

/// `(sup |p^(k)|, markov_factor(n, k) sup |p|)`.
pub fn markov_ratio(p: &RealPolynomial, k: usize) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidInput("derivative order must be at least 1".into()));
    }
    let bound = markov_factor(p.degree(), k) * p.sup_norm();
    if k > p.degree() {
        return Ok((0.0, bound));
    }
    Ok((p.derivative_n(k).sup_norm(), bound))
}

/// `(sup |p|, (n + 1)^2 ||p||_1)`.
pub fn linf_l1_ratio(p: &RealPolynomial) -> Result<(f64, f64)> {
    if p.is_zero() {
        return Err(Error::InvalidInput("zero polynomial".into()));
    }
    let n1 = (p.degree() + 1) as f64;
    Ok((p.sup_norm(), n1 * n1 * p.l1_norm()))
}

/// `(|int e^{i lam x} psi|, bound)` with bound `3.2 ||psi|| / lam`, or
/// `0.8 n^4 ||psi|| / lam^3` on the second branch, which requires
/// `psi(+-1) = psi'(+-1) = 0`.
pub fn oscillatory_bound(psi: &RealPolynomial, lam: f64, second_branch: bool) -> Result<(f64, f64)> {
    let n = psi.degree() as f64;
    if !(lam >= 2.0 * n * n) || !(lam > 0.0) {
        return Err(Error::Precondition(format!("lambda {lam} below 2 n^2 = {}", 2.0 * n * n)));
    }
    let sup = psi.sup_norm();
    let bound = if second_branch {
        let d = psi.derivative();
        let worst = [psi.eval(-1.0), psi.eval(1.0), d.eval(-1.0), d.eval(1.0)]
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        if worst > BOUNDARY_TOLERANCE {
            return Err(Error::Precondition(format!(
                "second branch needs psi and psi' to vanish at +-1 (largest value {worst:e})"
            )));
        }
        0.8 * n.powi(4) * sup / lam.powi(3)
    } else {
        3.2 * sup / lam
    };
    Ok((oscillatory_integral(psi, lam, 1e-13).norm(), bound))
}

/// Normalized correlation `|<u, v>| / (||u|| ||v||)` of `H_j a_j` and
/// `H_p a_p`, without the separation precondition.
pub fn correlation(
    basis_j: &MultipoleBasis<f64>,
    basis_p: &MultipoleBasis<f64>,
    a_j: &DVector<Complex<f64>>,
    a_p: &DVector<Complex<f64>>,
) -> Result<f64> {
    if basis_j.grid != basis_p.grid || basis_j.omega != basis_p.omega {
        return Err(Error::InvalidInput("bases are sampled on different grids".into()));
    }
    if basis_j.modulated != basis_p.modulated {
        return Err(Error::InvalidInput("bases differ in modulation".into()));
    }
    if a_j.len() != basis_j.order_count || a_p.len() != basis_p.order_count {
        return Err(Error::InvalidInput("coefficient length differs from basis size".into()));
    }
    let u = basis_j.combine(a_j);
    let v = basis_p.combine(a_p);
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::InvalidInput("zero combination".into()));
    }
    Ok(u.dotc(&v).norm() / (nu * nv))
}

/// Separation `|Omega (O_j - O_p)|` required by the correlation bound.
pub fn correlation_min_separation(s: usize, modulated: bool) -> f64 {
    let s = s as f64;
    if modulated {
        2.0 * (2.0 * s + 2.0).powi(2)
    } else {
        2.0 * (2.0 * s - 2.0).powi(2)
    }
}

/// Correlation bound `3.2 (2s-1)^2 / t` (plain) or
/// `0.8 (2s+2)^4 (2s+3)^2 / t^3` (modulated) at `t = |Omega (O_j - O_p)|`.
pub fn correlation_bound(s: usize, modulated: bool, t: f64) -> f64 {
    let s = s as f64;
    if modulated {
        0.8 * (2.0 * s + 2.0).powi(4) * (2.0 * s + 3.0).powi(2) / t.powi(3)
    } else {
        3.2 * (2.0 * s - 1.0).powi(2) / t
    }
}

/// `(correlation, bound)`; the centers must satisfy the separation
/// precondition for the larger of the two basis sizes.
pub fn correlation_ratio(
    basis_j: &MultipoleBasis<f64>,
    basis_p: &MultipoleBasis<f64>,
    a_j: &DVector<Complex<f64>>,
    a_p: &DVector<Complex<f64>>,
) -> Result<(f64, f64)> {
    let measured = correlation(basis_j, basis_p, a_j, a_p)?;
    let s = basis_j.order_count.max(basis_p.order_count);
    let t = (basis_j.omega * (basis_j.center - basis_p.center)).abs();
    let need = correlation_min_separation(s, basis_j.modulated);
    if !(t > 0.0 && t >= need) {
        return Err(Error::Precondition(format!("center separation {t} below {need}")));
    }
    Ok((measured, correlation_bound(s, basis_j.modulated, t)))
}

/// `((1/sqrt N) ||Y - sum_j H_j theta_j||, sigma)` for the noiseless
/// measurement of `measure` and its exact multipole coefficients, with `s`
/// chosen for the region's `D` and the measure's total variation.
pub fn residual_bound_check(
    measure: &SourceMeasure<f64>,
    region: &ClusterRegion<f64>,
    sigma: f64,
    n: usize,
) -> Result<(f64, f64)> {
    let omega = region.omega();
    let d = region.half_widths().iter().fold(0.0f64, |a, &w| a.max(w)) * omega;
    let s = multipole_order(d.max(f64::MIN_POSITIVE), sigma, measure.total_variation())?;
    let grid = uniform_grid::<f64>(n);
    let mut residual: Vec<Complex<f64>> = grid.iter().map(|&x| measure.fourier(x, omega)).collect();
    for (j, &center) in region.centers().iter().enumerate() {
        let members: Vec<_> = measure
            .sources()
            .iter()
            .filter(|src| region.nearest(src.location) == j)
            .cloned()
            .collect();
        if members.is_empty() {
            continue;
        }
        let theta = exact_coefficients_of(&members, center, s, omega);
        let fitted = build_basis(center, s, &grid, omega, false).combine(&theta);
        for (r, f) in residual.iter_mut().zip(fitted.iter()) {
            *r -= *f;
        }
    }
    Ok((crate::scalar::rms_norm(&residual), sigma))
}

/// Summary of one randomized sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub name: String,
    pub draws: usize,
    /// Draws with `measured > bound + ORACLE_TOLERANCE`.
    pub violations: usize,
    pub max_ratio: f64,
    /// Largest `measured - bound`.
    pub max_excess: f64,
    /// Parameters of the draw with the largest ratio.
    pub worst: String,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Draw {
    measured: f64,
    bound: f64,
    params: String,
}

fn summarize(name: &str, draws: Vec<Draw>) -> SweepReport {
    let mut report = SweepReport {
        name: name.to_string(),
        draws: draws.len(),
        violations: 0,
        max_ratio: 0.0,
        max_excess: f64::NEG_INFINITY,
        worst: String::new(),
    };
    for d in draws {
        if d.measured > d.bound + ORACLE_TOLERANCE {
            report.violations += 1;
        }
        report.max_excess = report.max_excess.max(d.measured - d.bound);
        let ratio = if d.bound > 0.0 { d.measured / d.bound } else if d.measured > 0.0 { f64::INFINITY } else { 0.0 };
        if ratio > report.max_ratio || report.worst.is_empty() {
            report.max_ratio = ratio.max(report.max_ratio);
            report.worst = d.params;
        }
    }
    report
}

fn rng_for(seed: u64, draw: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ draw)
}

/// Polynomial of exact degree `n` with standard normal coefficients.
pub fn random_polynomial(rng: &mut impl Rng, n: usize) -> RealPolynomial {
    let mut c: Vec<f64> = (0..=n).map(|_| rng.sample(StandardNormal)).collect();
    if c[n] == 0.0 {
        c[n] = 1.0;
    }
    RealPolynomial::new(c)
}

fn sweep(name: &str, draws: usize, f: impl Fn(u64) -> Result<Draw> + Sync + Send) -> Result<SweepReport> {
    let results: Result<Vec<Draw>> = (0..draws as u64).into_par_iter().map(f).collect();
    Ok(summarize(name, results?))
}

/// Markov-brothers inequality on random polynomials of degree 1..=12.
pub fn sweep_markov(draws: usize, seed: u64) -> Result<SweepReport> {
    sweep("markov_ratio", draws, |i| {
        let mut rng = rng_for(seed, i);
        let n = rng.random_range(1..=12);
        let k = rng.random_range(1..=n);
        let p = random_polynomial(&mut rng, n);
        let (measured, bound) = markov_ratio(&p, k)?;
        Ok(Draw { measured, bound, params: format!("n={n} k={k} p={:?}", p.coefficients()) })
    })
}

/// Sup-norm versus L1-norm on random polynomials of degree 0..=12.
pub fn sweep_linf_l1(draws: usize, seed: u64) -> Result<SweepReport> {
    sweep("linf_l1_ratio", draws, |i| {
        let mut rng = rng_for(seed, i);
        let n = rng.random_range(0..=12);
        let p = random_polynomial(&mut rng, n);
        let (measured, bound) = linf_l1_ratio(&p)?;
        Ok(Draw { measured, bound, params: format!("n={n} p={:?}", p.coefficients()) })
    })
}

/// Oscillatory-integral bound. The second branch uses `psi = (1 - x^2)^2 q`
/// so the boundary conditions hold exactly.
pub fn sweep_oscillatory(draws: usize, seed: u64, second_branch: bool) -> Result<SweepReport> {
    let name = if second_branch { "oscillatory_bound_second" } else { "oscillatory_bound_first" };
    let bump = RealPolynomial::new(vec![1.0, 0.0, -2.0, 0.0, 1.0]);
    sweep(name, draws, |i| {
        let mut rng = rng_for(seed, i);
        let psi = if second_branch {
            let degree = rng.random_range(0..=6);
            let q = random_polynomial(&mut rng, degree);
            bump.mul(&q)
        } else {
            let degree = rng.random_range(0..=10);
            random_polynomial(&mut rng, degree)
        };
        let n = psi.degree() as f64;
        let lam = (2.0 * n * n).max(1.0) * rng.random_range(1.0..4.0);
        let (measured, bound) = oscillatory_bound(&psi, lam, second_branch)?;
        Ok(Draw { measured, bound, params: format!("lam={lam} psi={:?}", psi.coefficients()) })
    })
}

/// Correlation of random multipole combinations around two centers that
/// satisfy the separation precondition, on a grid of [`DENSE_SAMPLES`] points.
pub fn sweep_correlation(draws: usize, seed: u64) -> Result<SweepReport> {
    sweep_correlation_with(draws, seed, DENSE_SAMPLES)
}

pub fn sweep_correlation_with(draws: usize, seed: u64, samples: usize) -> Result<SweepReport> {
    let grid = uniform_grid::<f64>(samples);
    sweep("correlation_ratio", draws, |i| {
        let mut rng = rng_for(seed, i);
        let modulated = rng.random_bool(0.5);
        let s = rng.random_range(1..=5);
        let t = correlation_min_separation(s, modulated).max(1.0) * rng.random_range(1.0..3.0);
        let center = rng.random_range(-50.0..50.0);
        let coeffs = |rng: &mut ChaCha8Rng| {
            DVector::from_iterator(
                s,
                (0..s).map(|_| Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))),
            )
        };
        let (a_j, a_p) = (coeffs(&mut rng), coeffs(&mut rng));
        let bj = build_basis(center, s, &grid, 1.0, modulated);
        let bp = build_basis(center + t, s, &grid, 1.0, modulated);
        let (measured, bound) = correlation_ratio(&bj, &bp, &a_j, &a_p)?;
        Ok(Draw { measured, bound, params: format!("s={s} modulated={modulated} t={t}") })
    })
}

/// All five inequality sweeps with a shared draw count.
pub fn run_all_sweeps(draws: usize, seed: u64) -> Result<Vec<SweepReport>> {
    Ok(vec![
        sweep_markov(draws, seed)?,
        sweep_linf_l1(draws, seed.wrapping_add(1))?,
        sweep_oscillatory(draws, seed.wrapping_add(2), false)?,
        sweep_oscillatory(draws, seed.wrapping_add(3), true)?,
        sweep_correlation(draws, seed.wrapping_add(4))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Source;

    fn poly(c: &[f64]) -> RealPolynomial {
        RealPolynomial::new(c.to_vec())
    }

    #[test]
    fn polynomial_basics() {
        let p = poly(&[1.0, 2.0, 3.0, 0.0]);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.derivative(), poly(&[2.0, 6.0]));
        assert_eq!(p.derivative_n(3), RealPolynomial::zero());
        assert_eq!(poly(&[1.0, 1.0]).mul(&poly(&[-1.0, 1.0])), poly(&[-1.0, 0.0, 1.0]));
    }

    #[test]
    fn sup_norm_finds_interior_extremum() {
        // x^2 - x has its extremum -1/4 at 1/2 but |p| peaks at x = -1 with 2.
        assert!((poly(&[0.0, -1.0, 1.0]).sup_norm() - 2.0).abs() < 1e-15);
        // T_7 equioscillates; refinement recovers the exact value 1.
        let t7 = poly(&[0.0, -7.0, 0.0, 56.0, 0.0, -112.0, 0.0, 64.0]);
        assert!((t7.sup_norm() - 1.0).abs() < 1e-12);
        // Sharp interior peak that the grid alone misses slightly.
        let p = poly(&[1.0, 0.0, -1e4]);
        assert_eq!(p.sup_norm(), (1.0f64).max(1e4 - 1.0));
    }

    #[test]
    fn quadrature_examples() {
        let q = integrate(|x| x.exp(), -1.0, 1.0, 1e-14);
        assert!((q.value - (1f64.exp() - (-1f64).exp())).abs() < 1e-14);
        let q = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-10);
        assert!((q.value - 4.0 / 3.0).abs() < 1e-9);
        assert!((poly(&[0.0, 1.0]).l1_norm() - 1.0).abs() < 1e-14);
        assert!((poly(&[-1.0, 0.0, 2.0]).l1_norm() - (4.0 * 2f64.sqrt() / 3.0 - 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn quadrature_refinement_is_stable() {
        let psi = poly(&[0.3, -1.0, 0.5, 2.0, -0.7]);
        for lam in [8.0, 50.0, 400.0] {
            let a = oscillatory_integral_panels(&psi, lam, 1e-13, 1);
            let b = oscillatory_integral_panels(&psi, lam, 1e-13, 2);
            assert!((a - b).norm() < 1e-8, "lam {lam}: {a} vs {b}");
        }
    }

    #[test]
    fn markov_examples() {
        let (m, b) = markov_ratio(&poly(&[-1.0, 0.0, 2.0]), 1).unwrap();
        assert!((m - 4.0).abs() < 1e-12 && (b - 4.0).abs() < 1e-12);
        assert_eq!(markov_ratio(&poly(&[0.0, 1.0]), 1).unwrap(), (1.0, 1.0));
        let (m, b) = markov_ratio(&poly(&[0.0, 1.0]), 2).unwrap();
        assert_eq!((m, b), (0.0, 0.0));
        assert!(markov_ratio(&poly(&[1.0]), 0).is_err());
        // T_n attains the bound for every k.
        let t5 = poly(&[0.0, 5.0, 0.0, -20.0, 0.0, 16.0]);
        for k in 1..=5 {
            let (m, b) = markov_ratio(&t5, k).unwrap();
            assert!((m - b).abs() < 1e-9 * b, "k={k}: {m} vs {b}");
        }
    }

    #[test]
    fn markov_random_degree_six() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let p = random_polynomial(&mut rng, 6);
            let (m, b) = markov_ratio(&p, 2).unwrap();
            assert!(m <= b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn linf_l1_examples() {
        let (m, b) = linf_l1_ratio(&poly(&[1.0])).unwrap();
        assert!((m - 1.0).abs() < 1e-15 && (b - 2.0).abs() < 1e-13);
        let (m, b) = linf_l1_ratio(&poly(&[0.0, 1.0])).unwrap();
        assert!((m - 1.0).abs() < 1e-15 && (b - 4.0).abs() < 1e-12);
        assert!(linf_l1_ratio(&RealPolynomial::zero()).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = random_polynomial(&mut rng, 8);
        let (m, b) = linf_l1_ratio(&p).unwrap();
        assert!(m <= b);
    }

    #[test]
    fn oscillatory_closed_forms() {
        let lam: f64 = 8.0;
        let (m, b) = oscillatory_bound(&poly(&[1.0]), lam, false).unwrap();
        assert!((m - (2.0 * lam.sin() / lam).abs()).abs() < 1e-12);
        assert!((m - 0.2473).abs() < 1e-4);
        assert!((b - 0.4).abs() < 1e-15);

        let (m, b) = oscillatory_bound(&poly(&[1.0, 0.0, -1.0]), lam, false).unwrap();
        let exact = (4.0 * (lam.sin() - lam * lam.cos()) / lam.powi(3)).abs();
        assert!((m - exact).abs() < 1e-12);
        assert!(m <= b);
        assert!(matches!(oscillatory_bound(&poly(&[1.0, 0.0, -1.0]), lam, true), Err(Error::Precondition(_))));

        let bump = poly(&[1.0, 0.0, -2.0, 0.0, 1.0]);
        let (m, b) = oscillatory_bound(&bump, 32.0, true).unwrap();
        assert!((b - 0.00625).abs() < 1e-15);
        assert!(m <= b);
        assert!(matches!(oscillatory_bound(&bump, 31.0, true), Err(Error::Precondition(_))));
    }

    #[test]
    fn correlation_examples() {
        let grid = uniform_grid::<f64>(DENSE_SAMPLES);
        let one = DVector::from_element(1, Complex::new(1.0, 0.0));
        let t = 40.0 * std::f64::consts::PI;
        let bj = build_basis(0.0, 1, &grid, 1.0, false);
        let bp = build_basis(t, 1, &grid, 1.0, false);
        let (m, b) = correlation_ratio(&bj, &bp, &one, &one).unwrap();
        assert!(m < 1e-4, "{m}");
        assert!((b - 3.2 / t).abs() < 1e-15);

        assert!((correlation(&bj, &bj, &one, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(correlation_ratio(&bj, &bj, &one, &one), Err(Error::Precondition(_))));

        let modulated = build_basis(0.0, 1, &grid, 1.0, true);
        assert!(correlation(&bj, &modulated, &one, &one).is_err());
        let coarse = build_basis(t, 1, &uniform_grid(100), 1.0, false);
        assert!(correlation(&bj, &coarse, &one, &one).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: DVector<Complex<f64>> = DVector::from_iterator(3, (0..3).map(|_| Complex::new(rng.random(), rng.random())));
        let t = 50.0 * std::f64::consts::PI;
        let bj = build_basis(0.0, 3, &grid, 1.0, true);
        let bp = build_basis(t, 3, &grid, 1.0, true);
        let (m, b) = correlation_ratio(&bj, &bp, &a, &a).unwrap();
        assert!((b - 0.8 * 8f64.powi(4) * 81.0 / t.powi(3)).abs() < 1e-15);
        assert!(m <= b);
    }

    #[test]
    fn residual_examples() {
        let region = ClusterRegion::new(vec![-20.0, 20.0], vec![0.5, 0.5], 30.0, 0.5, 1.0).unwrap();
        let at_centers = SourceMeasure::new(vec![Source::real(-20.0, 1.0), Source::real(20.0, -0.5)]).unwrap();
        let (r, s) = residual_bound_check(&at_centers, &region, 1e-3, 1000).unwrap();
        assert!(r < 1e-13 && s == 1e-3);

        let single = ClusterRegion::new(vec![0.0], vec![0.5], 1.0, 0.5, 1.0).unwrap();
        let mu = SourceMeasure::new(vec![Source::real(-0.3, 0.6), Source::real(0.45, 0.4)]).unwrap();
        let (r, s) = residual_bound_check(&mu, &single, 1e-3, 1000).unwrap();
        assert!(r <= s, "{r}");

        let pi = std::f64::consts::PI;
        let three = ClusterRegion::new(vec![-40.0, 0.0, 40.0], vec![pi; 3], 12.0 * pi, pi, 1.0).unwrap();
        let mu = SourceMeasure::new(vec![
            Source::real(-40.0 - pi, 0.2),
            Source::real(1.0, 0.3),
            Source::real(40.0 + pi, 0.5),
        ])
        .unwrap();
        let (r, s) = residual_bound_check(&mu, &three, 1e-3, 1000).unwrap();
        assert!(r <= s, "{r}");
    }

    #[test]
    fn small_sweeps_pass() {
        for report in [
            sweep_markov(40, 1).unwrap(),
            sweep_linf_l1(40, 2).unwrap(),
            sweep_oscillatory(40, 3, false).unwrap(),
            sweep_oscillatory(40, 4, true).unwrap(),
            sweep_correlation_with(40, 5, 20_000).unwrap(),
        ] {
            assert!(report.passed(), "{report:?}");
            assert_eq!(report.draws, 40);
        }
    }

    #[test]
    fn sweeps_are_deterministic() {
        assert_eq!(sweep_markov(20, 9).unwrap(), sweep_markov(20, 9).unwrap());
    }
}
