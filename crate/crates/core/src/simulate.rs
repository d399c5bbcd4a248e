//! Gaussian simulation on regular grids by spectral sampling, and the
//! validation estimators.
//!
//! Each Hermitian-paired frequency cell receives an independent complex
//! Gaussian weight with variance `(2π)^{-D/2} f(ξ) Δξ` drawn from a
//! counter-based generator keyed by `(seed, realization, cell)`; conjugate
//! symmetry is enforced and an inverse FFT produces the real field. The
//! output is a pure function of the key, so realizations can be generated
//! on any number of threads in any order with bit-identical results. Atoms
//! add random cosine components; cone components get per-sheet weights
//! modulated by `e^{±i c |ξ| t}` over the time slices.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{centered_axis, CovarianceGrid, Provenance};
use crate::density::SpectralDensity;
use crate::error::{Error, Result};
use crate::fftutil::{fft_nd, ravel, unravel};
use crate::rng;
use crate::spdg::SpdgGrid;
use crate::symbol::FreqPoint;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub n: usize,
    pub delta: f64,
}

/// A regular (space or space-time) grid; when `time_axis` is set the last
/// axis is temporal. Frequencies along axis `i` are `2πk/(n_i Δ_i)` for the
/// signed FFT index `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
    pub origin: Vec<f64>,
    pub time_axis: bool,
}

impl GridSpec {
    pub fn new(axes: Vec<GridAxis>, time_axis: bool) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidArgument("a grid needs at least one axis".into()));
        }
        for a in &axes {
            if a.n < 2 {
                return Err(Error::InvalidArgument("grid axes need at least 2 cells".into()));
            }
            if !(a.delta > 0.0) {
                return Err(Error::InvalidArgument("grid spacing must be positive".into()));
            }
        }
        let origin = vec![0.0; axes.len()];
        Ok(GridSpec { axes, origin, time_axis })
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spatial_dim(&self) -> usize {
        self.axes.len() - usize::from(self.time_axis)
    }

    /// Signed frequency of FFT index `k` along axis `i`.
    pub fn freq(&self, axis: usize, k: usize) -> f64 {
        let n = self.axes[axis].n;
        let signed = if k <= n / 2 { k as isize } else { k as isize - n as isize };
        2.0 * std::f64::consts::PI * signed as f64 / (n as f64 * self.axes[axis].delta)
    }

    /// Volume of one frequency cell.
    pub fn freq_cell_volume(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| 2.0 * std::f64::consts::PI / (a.n as f64 * a.delta))
            .product()
    }
}

/// A simulated field on a grid.
#[derive(Clone, Debug)]
pub struct Realization {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub seed: u64,
    pub index: u64,
    /// Snapshot of the generating model (free-form, set by the caller).
    pub label: String,
}

impl Realization {
    pub fn to_spdg(&self) -> SpdgGrid {
        SpdgGrid {
            sizes: self.grid.axes.iter().map(|a| a.n as u64).collect(),
            spacings: self.grid.axes.iter().map(|a| a.delta).collect(),
            values: self.values.clone(),
        }
    }
}

/// Convert a covariance grid (uniform axes) to the binary format; masked
/// cells become NaN.
pub fn covariance_to_spdg(grid: &CovarianceGrid) -> Result<SpdgGrid> {
    let spacing = grid
        .uniform_spacing()
        .ok_or_else(|| Error::InvalidArgument("only uniform grids are serializable".into()))?;
    let values = grid
        .values
        .iter()
        .zip(&grid.valid)
        .map(|(v, ok)| if *ok { *v } else { f64::NAN })
        .collect();
    SpdgGrid::new(
        grid.axes.iter().map(|a| a.len() as u64).collect(),
        spacing,
        values,
    )
}

/// Read a covariance grid back from the binary format (centered lag axes).
pub fn covariance_from_spdg(grid: &SpdgGrid) -> CovarianceGrid {
    let axes: Vec<Vec<f64>> = grid
        .sizes
        .iter()
        .zip(&grid.spacings)
        .map(|(&n, &dx)| centered_axis(n as usize, dx))
        .collect();
    let valid = grid.values.iter().map(|v| !v.is_nan()).collect();
    CovarianceGrid { axes, values: grid.values.clone(), valid, provenance: Provenance::Empirical }
}

struct CellPlan {
    /// Standard deviation per frequency cell (0 for masked cells).
    sigma: Vec<f64>,
    /// Conjugate partner of each linear index.
    conj: Vec<usize>,
}

fn plan_cells(density: &SpectralDensity, grid: &GridSpec) -> Result<CellPlan> {
    let shape = grid.shape();
    let total = grid.len();
    let d = grid.spatial_dim();
    let dd = shape.len() as f64;
    let norm = (2.0 * std::f64::consts::PI).powf(-dd / 2.0) * grid.freq_cell_volume();
    let mut sigma = vec![0.0; total];
    let mut conj = vec![0usize; total];
    let mut idx = vec![0usize; shape.len()];
    let mut point = FreqPoint {
        spatial: vec![0.0; d],
        temporal: if grid.time_axis { Some(0.0) } else { None },
    };
    for lin in 0..total {
        unravel(lin, &shape, &mut idx);
        for (i, &k) in idx.iter().enumerate() {
            let f = grid.freq(i, k);
            if i < d {
                point.spatial[i] = f;
            } else {
                point.temporal = Some(f);
            }
        }
        let f = density.eval_unchecked(&point);
        if !f.is_finite() {
            if density.singular().is_empty() {
                return Err(Error::Singularity(format!(
                    "density is infinite on an untagged frequency cell {idx:?}"
                )));
            }
            // tagged singular cells carry no mass: the minimal solution
            sigma[lin] = 0.0;
        } else {
            if f < 0.0 {
                return Err(Error::InvalidArgument("negative spectral density".into()));
            }
            sigma[lin] = (norm * f).sqrt();
        }
        let mirrored: Vec<usize> = idx
            .iter()
            .zip(&shape)
            .map(|(&k, &n)| if k == 0 { 0 } else { n - k })
            .collect();
        conj[lin] = ravel(&mirrored, &shape);
    }
    Ok(CellPlan { sigma, conj })
}

fn fill_hermitian_weights(
    plan: &CellPlan,
    seed: u64,
    realization: u64,
    out: &mut [Complex64],
) {
    for lin in 0..out.len() {
        let partner = plan.conj[lin];
        if lin > partner {
            continue;
        }
        let s = plan.sigma[lin];
        let (z1, z2) = rng::normal_pair(seed, realization, lin as u64);
        if partner == lin {
            out[lin] = Complex64::new(s * z1, 0.0);
        } else {
            let w = Complex64::new(z1, z2) * (s / 2f64.sqrt());
            out[lin] = w;
            out[partner] = w.conj();
        }
    }
}

/// Generate `n_realizations` Gaussian fields with the given spectral
/// density on the grid. Deterministic in `(density, grid, seed, index)`
/// regardless of thread count.
pub fn simulate(
    density: &SpectralDensity,
    grid: &GridSpec,
    seed: u64,
    n_realizations: usize,
) -> Result<Vec<Realization>> {
    if density.dim() != grid.spatial_dim() || density.has_time() != grid.time_axis {
        return Err(Error::InvalidArgument(format!(
            "density is (d={}, time={}) but the grid is (d={}, time={})",
            density.dim(),
            density.has_time(),
            grid.spatial_dim(),
            grid.time_axis
        )));
    }
    let plan = plan_cells(density, grid)?;
    let shape = grid.shape();
    let total = grid.len();

    // cone components live on the spatial grid with per-sheet weights
    let cone_plan = match density.cone() {
        Some(cone) => {
            if !grid.time_axis {
                return Err(Error::InvalidArgument(
                    "cone components need a temporal axis on the grid".into(),
                ));
            }
            let spatial_axes = grid.axes[..grid.spatial_dim()].to_vec();
            let sgrid = GridSpec::new(spatial_axes, false)?;
            let splan = plan_cells(&cone_spatial_half_density(cone), &sgrid)?;
            Some((cone.speed, sgrid, splan))
        }
        None => None,
    };

    let results: Vec<Result<Realization>> = (0..n_realizations as u64)
        .into_par_iter()
        .map(|r| {
            let mut coeffs = vec![Complex64::default(); total];
            fill_hermitian_weights(&plan, seed, r, &mut coeffs);
            fft_nd(&mut coeffs, &shape, true);
            let mut values: Vec<f64> = coeffs.iter().map(|c| c.re).collect();
            // the imaginary residual measures Hermitian enforcement
            let imag_max = coeffs.iter().map(|c| c.im.abs()).fold(0.0f64, f64::max);
            let std = (values.iter().map(|v| v * v).sum::<f64>() / total as f64).sqrt();
            if imag_max > 1e-10 * std.max(1e-300) {
                return Err(Error::InvalidArgument(
                    "conjugate symmetry enforcement failed; imaginary residual too large".into(),
                ));
            }
            add_atoms(density, grid, seed, r, total as u64, &mut values);
            if let Some((speed, sgrid, splan)) = &cone_plan {
                add_cone(grid, sgrid, splan, *speed, seed, r, 2 * total as u64, &mut values)?;
            }
            Ok(Realization {
                grid: grid.clone(),
                values,
                seed,
                index: r,
                label: String::new(),
            })
        })
        .collect();
    results.into_iter().collect()
}

/// Each cone sheet carries half the spatial spectral mass.
fn cone_spatial_half_density(cone: &crate::density::ConeComponent) -> SpectralDensity {
    let base = cone.spatial.clone();
    SpectralDensity::builder(base.dim(), false)
        .symmetry(base.symmetry())
        .singular(base.singular().clone())
        .build(move |p| 0.5 * base.eval_unchecked(p))
}

fn add_atoms(
    density: &SpectralDensity,
    grid: &GridSpec,
    seed: u64,
    realization: u64,
    key_base: u64,
    values: &mut [f64],
) {
    if density.atoms().is_empty() {
        return;
    }
    let shape = grid.shape();
    let dd = shape.len() as f64;
    let norm = (2.0 * std::f64::consts::PI).powf(-dd / 2.0);
    let mut idx = vec![0usize; shape.len()];
    let mut seen: Vec<usize> = Vec::new();
    for (ai, atom) in density.atoms().iter().enumerate() {
        // process each ± pair once, keyed by the first member encountered
        if seen.iter().any(|&s| density.atoms()[s].location == atom.location.negated()) {
            continue;
        }
        seen.push(ai);
        let at_origin = atom.location.norm_sq() == 0.0;
        let var = if at_origin {
            norm * atom.weight
        } else {
            2.0 * norm * atom.weight
        };
        let (z1, z2) = rng::normal_pair(seed, realization, key_base + ai as u64);
        let amp = var.sqrt();
        for lin in 0..values.len() {
            unravel(lin, &shape, &mut idx);
            let mut phase = 0.0;
            for (i, &k) in idx.iter().enumerate() {
                let x = grid.origin[i] + k as f64 * grid.axes[i].delta;
                let coord = if i < atom.location.spatial.len() {
                    atom.location.spatial[i]
                } else {
                    atom.location.temporal.unwrap_or(0.0)
                };
                phase += coord * x;
            }
            values[lin] += amp * (z1 * phase.cos() + z2 * phase.sin());
        }
    }
}

fn add_cone(
    grid: &GridSpec,
    sgrid: &GridSpec,
    splan: &CellPlan,
    speed: f64,
    seed: u64,
    realization: u64,
    key_base: u64,
    values: &mut [f64],
) -> Result<()> {
    let sshape = sgrid.shape();
    let stotal = sgrid.len();
    let nt = grid.axes.last().unwrap().n;
    let dt = grid.axes.last().unwrap().delta;
    let t0 = *grid.origin.last().unwrap();
    // per-sheet complex weights with the spatial-conjugate sheet swap
    let mut v_plus = vec![Complex64::default(); stotal];
    let mut v_minus = vec![Complex64::default(); stotal];
    for lin in 0..stotal {
        let partner = splan.conj[lin];
        if lin > partner {
            continue;
        }
        let s = splan.sigma[lin];
        let (a1, a2) = rng::normal_pair(seed, realization, key_base + 2 * lin as u64);
        let (b1, b2) = rng::normal_pair(seed, realization, key_base + 2 * lin as u64 + 1);
        if partner == lin {
            // plane wave must stay real: the sheets are conjugate
            let w = Complex64::new(a1, a2) * (s / 2f64.sqrt());
            v_plus[lin] = w;
            v_minus[lin] = w.conj();
        } else {
            let wp = Complex64::new(a1, a2) * (s / 2f64.sqrt());
            let wm = Complex64::new(b1, b2) * (s / 2f64.sqrt());
            v_plus[lin] = wp;
            v_minus[lin] = wm;
            v_plus[partner] = wm.conj();
            v_minus[partner] = wp.conj();
        }
    }
    // radial frequency of each spatial cell
    let mut omega = vec![0.0f64; stotal];
    let mut idx = vec![0usize; sshape.len()];
    for lin in 0..stotal {
        unravel(lin, &sshape, &mut idx);
        let mut r2 = 0.0;
        for (i, &k) in idx.iter().enumerate() {
            let f = sgrid.freq(i, k);
            r2 += f * f;
        }
        omega[lin] = speed * r2.sqrt();
    }
    let mut plane = vec![Complex64::default(); stotal];
    for j in 0..nt {
        let t = t0 + j as f64 * dt;
        for lin in 0..stotal {
            let rot = Complex64::from_polar(1.0, omega[lin] * t);
            plane[lin] = v_plus[lin] * rot + v_minus[lin] * rot.conj();
        }
        fft_nd(&mut plane, &sshape, true);
        for lin in 0..stotal {
            values[lin * nt + j] += plane[lin].re;
        }
    }
    Ok(())
}

/// Expected zero-lag variance of the sampler on this grid: the spectral sum
/// `Σ σ²` over all cells plus atom and cone masses.
pub fn expected_variance(density: &SpectralDensity, grid: &GridSpec) -> Result<f64> {
    let plan = plan_cells(density, grid)?;
    let mut total: f64 = plan.sigma.iter().map(|s| s * s).sum();
    let dd = grid.shape().len() as f64;
    let norm = (2.0 * std::f64::consts::PI).powf(-dd / 2.0);
    let mut seen: Vec<usize> = Vec::new();
    for (ai, atom) in density.atoms().iter().enumerate() {
        if seen.iter().any(|&s| density.atoms()[s].location == atom.location.negated()) {
            continue;
        }
        seen.push(ai);
        let at_origin = atom.location.norm_sq() == 0.0;
        total += if at_origin { norm * atom.weight } else { 2.0 * norm * atom.weight };
    }
    if let Some(cone) = density.cone() {
        let sgrid = GridSpec::new(grid.axes[..grid.spatial_dim()].to_vec(), false)?;
        let splan = plan_cells(&cone_spatial_half_density(cone), &sgrid)?;
        total += 2.0 * splan.sigma.iter().map(|s| s * s).sum::<f64>();
    }
    Ok(total)
}

/// Mean periodogram over realizations: an unbiased estimate of the spectral
/// density at every frequency cell of the grid.
pub fn mean_periodogram(realizations: &[Realization]) -> Result<Vec<f64>> {
    let first = realizations
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one realization".into()))?;
    let grid = &first.grid;
    let shape = grid.shape();
    let total = grid.len();
    let dd = shape.len() as f64;
    let norm = (2.0 * std::f64::consts::PI).powf(dd / 2.0)
        / (total as f64 * total as f64 * grid.freq_cell_volume());
    let mut acc = vec![0.0f64; total];
    for r in realizations {
        if r.grid.shape() != shape {
            return Err(Error::InvalidArgument("realizations live on different grids".into()));
        }
        let mut buf: Vec<Complex64> =
            r.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut buf, &shape, false);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr() * norm;
        }
    }
    let rr = realizations.len() as f64;
    for a in acc.iter_mut() {
        *a /= rr;
    }
    Ok(acc)
}

/// Empirical covariance with per-lag jackknife standard errors.
pub struct EmpiricalEstimate {
    pub grid: CovarianceGrid,
    /// Jackknife standard error per lag (NaN for a single realization).
    pub std_error: Vec<f64>,
}

/// Cross-realization covariance estimator on the grid: for each lag the
/// average product over all in-bounds position pairs (no wrap-around),
/// averaged over realizations. Fields are treated as centered.
pub fn empirical_covariance(
    realizations: &[Realization],
    max_lag: &[usize],
    ergodic: bool,
) -> Result<CovarianceGrid> {
    Ok(empirical_covariance_detailed(realizations, max_lag, ergodic)?.grid)
}

pub fn empirical_covariance_detailed(
    realizations: &[Realization],
    max_lag: &[usize],
    ergodic: bool,
) -> Result<EmpiricalEstimate> {
    let first = realizations
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one realization".into()))?;
    if realizations.len() < 2 && !ergodic {
        return Err(Error::InvalidArgument(
            "need at least two realizations (or the ergodic flag for one large grid)".into(),
        ));
    }
    let shape = first.grid.shape();
    if max_lag.len() != shape.len() {
        return Err(Error::InvalidArgument("one max lag per axis".into()));
    }
    for (m, n) in max_lag.iter().zip(&shape) {
        if 2 * m >= *n {
            return Err(Error::InvalidArgument(format!(
                "max lag {m} reaches half the grid extent ({n} cells); edge effects dominate"
            )));
        }
    }
    let padded: Vec<usize> = shape.iter().zip(max_lag).map(|(&n, &m)| n + m).collect();
    let ptotal: usize = padded.iter().product();
    let out_shape: Vec<usize> = max_lag.iter().map(|&m| 2 * m + 1).collect();
    let out_total: usize = out_shape.iter().product();

    let per_real: Vec<Vec<f64>> = realizations
        .par_iter()
        .map(|r| {
            let mut buf = vec![Complex64::default(); ptotal];
            let mut idx = vec![0usize; shape.len()];
            for lin in 0..r.values.len() {
                unravel(lin, &shape, &mut idx);
                buf[ravel(&idx, &padded)] = Complex64::new(r.values[lin], 0.0);
            }
            fft_nd(&mut buf, &padded, false);
            for c in buf.iter_mut() {
                *c = Complex64::new(c.norm_sqr(), 0.0);
            }
            fft_nd(&mut buf, &padded, true);
            let mut out = vec![0.0f64; out_total];
            let mut oidx = vec![0usize; out_shape.len()];
            for olin in 0..out_total {
                unravel(olin, &out_shape, &mut oidx);
                // pair symmetry: the estimate at -L reuses the one at L
                let mirrored: Vec<usize> =
                    oidx.iter().zip(&out_shape).map(|(&i, &n)| n - 1 - i).collect();
                let mlin = ravel(&mirrored, &out_shape);
                if mlin < olin {
                    out[olin] = out[mlin];
                    continue;
                }
                let mut count = 1.0f64;
                let mut src = Vec::with_capacity(shape.len());
                for i in 0..shape.len() {
                    let lag = oidx[i] as isize - max_lag[i] as isize;
                    count *= (shape[i] as isize - lag.abs()) as f64;
                    let p = padded[i] as isize;
                    src.push(((lag % p + p) % p) as usize);
                }
                out[olin] = buf[ravel(&src, &padded)].re / (ptotal as f64 * count);
            }
            out
        })
        .collect();

    let rr = realizations.len() as f64;
    let mut mean = vec![0.0f64; out_total];
    for est in &per_real {
        for (m, v) in mean.iter_mut().zip(est) {
            *m += v / rr;
        }
    }
    let mut std_error = vec![f64::NAN; out_total];
    if realizations.len() >= 2 {
        for i in 0..out_total {
            let var: f64 = per_real.iter().map(|e| (e[i] - mean[i]).powi(2)).sum();
            std_error[i] = (var / (rr * (rr - 1.0))).sqrt();
        }
    }
    let axes: Vec<Vec<f64>> = max_lag
        .iter()
        .zip(&first.grid.axes)
        .map(|(&m, a)| centered_axis(2 * m + 1, a.delta))
        .collect();
    Ok(EmpiricalEstimate {
        grid: CovarianceGrid {
            axes,
            values: mean,
            valid: vec![true; out_total],
            provenance: Provenance::Empirical,
        },
        std_error,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CompareReport {
    pub max_abs: f64,
    pub max_rel_on_valid: f64,
    pub rmse: f64,
    pub n_compared: usize,
}

/// Deterministic comparison metrics over the intersection of validity
/// masks; relative errors are measured against `max(|b|, 1e-12)`.
pub fn compare(a: &CovarianceGrid, b: &CovarianceGrid) -> Result<CompareReport> {
    if a.shape() != b.shape() {
        return Err(Error::InvalidArgument("grids have different shapes".into()));
    }
    for (x, y) in a.axes.iter().zip(&b.axes) {
        for (u, v) in x.iter().zip(y) {
            if (u - v).abs() > 1e-9 * u.abs().max(1e-300) {
                return Err(Error::InvalidArgument("grids have different axes".into()));
            }
        }
    }
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut sq = 0.0f64;
    let mut n = 0usize;
    for i in 0..a.values.len() {
        if a.valid[i] && b.valid[i] {
            let diff = (a.values[i] - b.values[i]).abs();
            max_abs = max_abs.max(diff);
            max_rel = max_rel.max(diff / b.values[i].abs().max(1e-12));
            sq += diff * diff;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::InvalidArgument("validity masks do not overlap".into()));
    }
    Ok(CompareReport {
        max_abs,
        max_rel_on_valid: max_rel,
        rmse: (sq / n as f64).sqrt(),
        n_compared: n,
    })
}
