//! Covariance evaluation: closed forms, radial spectral transforms,
//! evolution-model mixtures and the white-noise convolution identity.
//!
//! Under the unitary Fourier convention the covariance of an isotropic
//! spectral density `f` is
//! `ρ(h) = |h|^{-(d-2)/2} ∫_0^∞ J_{(d-2)/2}(|h| r) f(r) r^{d/2} dr`.
//! Oscillatory tails are integrated panel by panel on the Bessel-zero scale
//! and the partial sums accelerated with the epsilon algorithm, which also
//! handles the conditionally convergent integrals of slowly decaying
//! densities.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analysis::check_existence;
use crate::density::{ConeComponent, RadialSymmetry, SpectralDensity};
use crate::error::{Error, Result};
use crate::model::{solution_spectral_density, ModelKind, ModelSpec, SourceTerm};
use crate::quad;
use crate::special::{bessel_j, bessel_k, erf, gamma, zero_lag_bessel_limit};
use crate::symbol::{check_evolution_invertibility, FreqPoint, Symbol};

/// A lag in physical space: spatial separation `h` and optional temporal
/// lag `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagPoint {
    pub spatial: Vec<f64>,
    pub temporal: Option<f64>,
}

impl LagPoint {
    pub fn spatial(h: impl Into<Vec<f64>>) -> Self {
        LagPoint { spatial: h.into(), temporal: None }
    }

    pub fn space_time(h: impl Into<Vec<f64>>, u: f64) -> Self {
        LagPoint { spatial: h.into(), temporal: Some(u) }
    }

    pub fn radius(&self) -> f64 {
        self.spatial.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Hankel,
    Mixture,
    Convolution,
    Empirical,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed_form",
            Provenance::Hankel => "hankel",
            Provenance::Mixture => "mixture",
            Provenance::Convolution => "convolution",
            Provenance::Empirical => "empirical",
        }
    }
}

/// Lag-indexed covariance values with provenance and a validity mask for
/// lags where a distributional covariance has no pointwise meaning.
#[derive(Clone, Debug)]
pub struct CovarianceGrid {
    /// Per-dimension lag samples (row-major indexing, last axis fastest).
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    pub provenance: Provenance,
}

impl CovarianceGrid {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len()).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform spacing per axis, when the axes are uniform.
    pub fn uniform_spacing(&self) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(self.axes.len());
        for axis in &self.axes {
            if axis.len() < 2 {
                return None;
            }
            let dx = axis[1] - axis[0];
            for w in axis.windows(2) {
                if ((w[1] - w[0]) - dx).abs() > 1e-9 * dx.abs().max(1e-300) {
                    return None;
                }
            }
            out.push(dx);
        }
        Some(out)
    }

    /// Index of the zero lag on each axis, when present.
    pub fn zero_indices(&self) -> Option<Vec<usize>> {
        self.axes
            .iter()
            .map(|axis| {
                let (i, v) = axis
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())?;
                let tol = if axis.len() > 1 { 1e-9 * (axis[1] - axis[0]).abs() } else { 1e-12 };
                (v.abs() <= tol).then_some(i)
            })
            .collect()
    }
}

/// Centered lag axis: `(i - n/2) · delta` for `i = 0..n`.
pub fn centered_axis(n: usize, delta: f64) -> Vec<f64> {
    let half = (n / 2) as isize;
    (0..n).map(|i| (i as isize - half) as f64 * delta).collect()
}

// ---------------------------------------------------------------------------
// radial Fourier engine
// ---------------------------------------------------------------------------

/// Numerical radial Fourier transform of `f` at spatial lag `h ≥ 0`:
/// `|h|^{-ν} ∫_0^∞ J_ν(h r) m(r) f(r) r^{ν+1} dr`, `ν = (d-2)/2`, with an
/// optional oscillatory modulation `m` (frequency `mod_freq`, e.g.
/// `cos(c|u| r)`), an optional finite support, and tanh-sinh treatment of an
/// integrable singularity at the origin.
pub fn radial_fourier(
    f: &dyn Fn(f64) -> f64,
    d: usize,
    h: f64,
    modulation: Option<(f64, &dyn Fn(f64) -> f64)>,
    support: Option<f64>,
    singular_origin: bool,
    tol: f64,
) -> Result<f64> {
    if h < 0.0 {
        return Err(Error::InvalidArgument("lag radius must be >= 0".into()));
    }
    let nu = (d as f64 - 2.0) / 2.0;
    let (mod_freq, mod_fn): (f64, Option<&dyn Fn(f64) -> f64>) = match modulation {
        Some((w, m)) => (w.abs(), Some(m)),
        None => (0.0, None),
    };
    // integrand including the |h|^{-ν} prefactor folded in at the end
    let kern: Box<dyn Fn(f64) -> f64> = if h == 0.0 {
        let c0 = 2f64.powf(-nu) / gamma(nu + 1.0);
        Box::new(move |r: f64| {
            let m = mod_fn.map_or(1.0, |m| m(r));
            c0 * m * f(r) * r.powi(d as i32 - 1)
        })
    } else {
        Box::new(move |r: f64| {
            let m = mod_fn.map_or(1.0, |m| m(r));
            bessel_j(nu, h * r) * m * f(r) * r.powf(nu + 1.0)
        })
    };
    let freq = h + mod_freq;
    let scale = if h == 0.0 { 1.0 } else { h.powf(-nu) };

    if let Some(rmax) = support {
        // finite support: no tail handling needed
        let head_end = rmax.min(if freq > 0.0 { PI / freq } else { rmax });
        let head = if singular_origin {
            quad::tanh_sinh(&|r| kern(r), 0.0, head_end, tol)?
        } else {
            quad::adaptive(&|r| kern(r), 0.0, head_end, tol)?
        };
        let mut total = head;
        let mut lo = head_end;
        while lo < rmax {
            let hi = (lo + PI / freq.max(PI / (rmax - lo).max(1e-12))).min(rmax);
            total += quad::adaptive(&|r| kern(r), lo, hi, tol)?;
            lo = hi;
        }
        return Ok(scale * total);
    }

    let value = quad::halfline_hybrid(&|r| kern(r), freq, singular_origin, tol).map_err(|e| {
        match e {
            Error::Divergence(m) => Error::Divergence(format!("radial transform: {m}")),
            other => other,
        }
    })?;
    Ok(scale * value)
}

/// Map an isotropic spatial spectral density to covariance values at the
/// requested lag radii.
pub fn hankel_transform(
    density: &SpectralDensity,
    d: usize,
    h_values: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    if density.dim() != d || density.has_time() {
        return Err(Error::InvalidArgument(
            "hankel transform needs a purely spatial density of the stated dimension".into(),
        ));
    }
    if density.symmetry() != RadialSymmetry::FullyRadial {
        return Err(Error::InvalidArgument("hankel transform needs an isotropic density".into()));
    }
    let singular = !density.singular().is_empty();
    let f = |r: f64| density.eval_radial(r);
    let mut out = Vec::with_capacity(h_values.len());
    for &h in h_values {
        if singular && h <= 0.0 {
            return Err(Error::Validity(
                "the density is singular at the origin; only positive lags are valid".into(),
            ));
        }
        out.push(radial_fourier(&f, d, h, None, None, singular, tol)?);
    }
    Ok(out)
}

/// Covariance of a cone-supported spectral component at `(h, u)`:
/// the radial transform of `cos(c |u| r) · f_S(r)`.
pub fn cone_covariance(cone: &ConeComponent, h: f64, u: f64, tol: f64) -> Result<f64> {
    if cone.spatial.symmetry() != RadialSymmetry::FullyRadial {
        return Err(Error::Unsupported(
            "cone covariance implemented for isotropic spatial bases only".into(),
        ));
    }
    let d = cone.spatial.dim();
    let f = |r: f64| cone.spatial.eval_radial(r);
    let w = cone.speed * u.abs();
    let modulation = move |r: f64| (w * r).cos();
    radial_fourier(
        &f,
        d,
        h,
        if w == 0.0 { None } else { Some((w, &modulation)) },
        None,
        !cone.spatial.singular().is_empty(),
        tol,
    )
}

// ---------------------------------------------------------------------------
// closed forms
// ---------------------------------------------------------------------------

/// The Matérn covariance
/// `(2π)^{-d/2} (2^{α-1} Γ(α) κ^{2α-d})^{-1} (κ|h|)^{α-d/2} K_{α-d/2}(κ|h|)`;
/// at `h = 0` the finite limit exists for `α > d/2`.
pub fn matern_covariance(d: usize, kappa: f64, alpha: f64, h: f64) -> Result<f64> {
    if alpha <= 0.0 {
        return Err(Error::Unsupported(
            "the Matérn covariance form needs alpha > 0".into(),
        ));
    }
    let nu = alpha - d as f64 / 2.0;
    let norm = (2.0 * PI).powf(-(d as f64) / 2.0)
        / (2f64.powf(alpha - 1.0) * gamma(alpha) * kappa.powf(2.0 * alpha - d as f64));
    if h == 0.0 {
        if nu <= 0.0 {
            return Err(Error::Validity(
                "distributional covariance: zero lag is outside the validity region".into(),
            ));
        }
        return Ok(norm * zero_lag_bessel_limit(nu));
    }
    Ok(norm * (kappa * h).powf(nu) * bessel_k(nu, kappa * h))
}

fn no_range_covariance(d: usize, alpha: f64, h: f64) -> Result<f64> {
    if alpha >= d as f64 / 2.0 {
        return Err(Error::Validity(
            "no stationary solution for alpha >= d/2; the covariance form does not apply".into(),
        ));
    }
    if h <= 0.0 {
        return Err(Error::Validity(
            "the covariance is a locally integrable function undefined at zero lag".into(),
        ));
    }
    // the κ → 0 limit of the Matérn family fixes the constant:
    // 2^{-2α} π^{-d/2} Γ(d/2-α)/Γ(α) · |h|^{2α-d}
    Ok(2f64.powf(-2.0 * alpha) * PI.powf(-(d as f64) / 2.0) * gamma(d as f64 / 2.0 - alpha)
        / gamma(alpha)
        * h.powf(2.0 * alpha - d as f64))
}

fn heat_covariance(a: f64, h: f64, u: f64) -> Result<f64> {
    // d = 3 only; (2π)^{-2} · π/(2a|h|) · erf(|h| / (2 sqrt(a|u|)))
    let norm = (2.0 * PI).powf(-2.0);
    let u = u.abs();
    if h == 0.0 {
        if u == 0.0 {
            return Err(Error::Validity(
                "distributional covariance: the space-time origin is outside the validity region"
                    .into(),
            ));
        }
        // erf slope limit at h -> 0
        return Ok(norm * PI.sqrt() / (2.0 * a * (a * u).sqrt()));
    }
    let factor = if u == 0.0 { 1.0 } else { erf(h / (2.0 * (a * u).sqrt())) };
    Ok(norm * PI / (2.0 * a * h) * factor)
}

/// Exact-formula covariance for the models that have one. Models outside
/// the closed-form table return `Unsupported` so callers can fall back to
/// the numerical transforms; lags outside the validity region of a
/// distributional covariance return a `Validity` error.
pub fn closed_form(model: &ModelSpec, lag: &LagPoint) -> Result<f64> {
    if lag.spatial.len() != model.d || lag.temporal.is_some() != model.has_time {
        return Err(Error::InvalidArgument("lag shape does not match the model".into()));
    }
    let h = lag.radius();
    match model.name.as_str() {
        "matern" => {
            let kappa = real_param(model, "kappa");
            let alpha = real_param(model, "alpha");
            matern_covariance(model.d, kappa, alpha, h)
        }
        "matern_no_range" => no_range_covariance(model.d, real_param(model, "alpha"), h),
        "heat" => {
            if model.d != 3 {
                return Err(Error::Unsupported(
                    "the heat covariance closed form applies in spatial dimension 3".into(),
                ));
            }
            heat_covariance(real_param(model, "a"), h, lag.temporal.unwrap_or(0.0))
        }
        "waving_matern" => {
            let a = real_param(model, "a");
            let kappa = real_param(model, "kappa");
            let alpha = real_param(model, "alpha");
            let c = real_param(model, "c");
            let u = lag.temporal.unwrap_or(0.0).abs();
            if u == 0.0 {
                return Ok(a * matern_covariance(model.d, kappa, alpha, h)?);
            }
            if model.d == 3 && h > 0.0 {
                // cos(c|ξ||u|) splits into shifted sine kernels:
                // ρ(h,u) = [(h+cu) m(h+cu) + (h-cu) m(|h-cu|)] / (2h)
                let hp = h + c * u;
                let hm = h - c * u;
                let vp = hp * a * matern_covariance(3, kappa, alpha, hp.abs())?;
                let vm = if hm == 0.0 {
                    0.0
                } else {
                    hm * a * matern_covariance(3, kappa, alpha, hm.abs())?
                };
                return Ok((vp + vm) / (2.0 * h));
            }
            Err(Error::Unsupported(
                "waving Matérn closed form covers u = 0 (any d) and d = 3; use the transform path"
                    .into(),
            ))
        }
        "evolving_matern" => {
            let beta = real_param(model, "beta");
            if beta == 1.0 || beta == 2.0 {
                let g = model.spatial_symbol.as_ref().expect("evolution model carries g");
                evolution_mixture_covariance(beta, g, lag, &spatial_source_density(model)?)
            } else {
                Err(Error::Unsupported(
                    "evolving Matérn mixtures are available at beta in {1, 2}".into(),
                ))
            }
        }
        _ => Err(Error::Unsupported(format!(
            "no closed-form covariance for model '{}'",
            model.name
        ))),
    }
}

fn real_param(model: &ModelSpec, key: &str) -> f64 {
    match model.params.get(key) {
        Some(crate::model::ParamValue::Real(v)) => *v,
        _ => unreachable!("validated at build time"),
    }
}

/// The spatial factor of the model's source: white gives the spatial white
/// level, separable gives its spatial factor.
fn spatial_source_density(model: &ModelSpec) -> Result<SpectralDensity> {
    match &model.source {
        SourceTerm::WhiteNoise { dim, .. } => Ok(SpectralDensity::white(*dim, false)),
        SourceTerm::Separable { spatial, temporal } => {
            // the temporal factor must be white for the mixture formulas
            let level = (2.0 * PI).powf(-0.5);
            for w in [0.0, 0.7, 3.0, 11.0] {
                let v = temporal.eval(&FreqPoint::spatial([w]))?;
                if (v - level).abs() > 1e-12 * level {
                    return Err(Error::Unsupported(
                        "mixture covariances need a source that is white noise in time".into(),
                    ));
                }
            }
            Ok(spatial.clone())
        }
        SourceTerm::Custom(_) => Err(Error::Unsupported(
            "mixture covariances need a separable or white source".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// evolution-model mixtures
// ---------------------------------------------------------------------------

/// First- and second-order evolution covariances with a source that is white
/// in time: the spatial transform of the temporal kernel against the spatial
/// source density.
///
/// `β = 1`: kernel `e^{i u g_I(ξ) - |u| |g_R(ξ)|} / (2 |g_R(ξ)|)`;
/// `β = 2`: the γ-form kernel with its `γ_R → 0` limit branch.
pub fn evolution_mixture_covariance(
    beta: f64,
    g_spatial: &Symbol,
    lag: &LagPoint,
    source_spatial: &SpectralDensity,
) -> Result<f64> {
    if beta != 1.0 && beta != 2.0 {
        return Err(Error::InvalidArgument(
            "mixture covariances are defined for temporal orders 1 and 2".into(),
        ));
    }
    if source_spatial.dim() != g_spatial.dim() || source_spatial.has_time() {
        return Err(Error::InvalidArgument(
            "the spatial source must match the symbol dimension".into(),
        ));
    }
    let check = check_evolution_invertibility(beta, g_spatial)?;
    if check.holds != Some(true) {
        return Err(Error::Domain(format!("mixture covariance rejected: {}", check.reason)));
    }
    // the temporal kernel decays in |u| but carries a signed phase u·g_I
    let u = lag.temporal.unwrap_or(0.0);
    let h = lag.radius();
    let d = g_spatial.dim();
    let iso = g_spatial.isotropic() && source_spatial.symmetry() == RadialSymmetry::FullyRadial;
    if iso {
        let f = |r: f64| {
            let p = FreqPoint::radial(d, r);
            let v = g_spatial.eval_unchecked(&p);
            source_spatial.eval_unchecked(&p) * temporal_kernel(beta, v, u.abs())
        };
        return radial_fourier(&f, d, h, None, None, false, 1e-9).map_err(|e| match e {
            Error::Divergence(m) => {
                Error::Divergence(format!("mixture not integrable at this lag: {m}"))
            }
            other => other,
        });
    }
    if d != 2 {
        return Err(Error::Unsupported(
            "anisotropic mixture cubature is implemented for d = 2".into(),
        ));
    }
    anisotropic_mixture_2d(beta, g_spatial, lag, source_spatial, u)
}

/// Temporal kernel of the mixture at a symbol value `g = g_R + i g_I`
/// (only the real part enters at `β = 1` when evaluated on the real axis of
/// an isotropic symbol; the complex case is handled by the cubature path).
fn temporal_kernel(beta: f64, g: Complex64, u: f64) -> f64 {
    if beta == 1.0 {
        let gr = g.re.abs();
        (-u * gr).exp() / (2.0 * gr)
    } else {
        let m = g.norm();
        let gam_r = ((m + g.re) / 2.0).max(0.0).sqrt();
        let gam_i = ((m - g.re) / 2.0).max(0.0).sqrt();
        let z = gam_r * u;
        let osc = if gam_r == 0.0 { u } else { z.sin() / gam_r };
        (-gam_i * u).exp() / (8.0 * gam_i * gam_i)
            * (2.0 * (gam_i * z.cos() + gam_r * z.sin()) / m + 2.0 * osc)
    }
}

fn anisotropic_mixture_2d(
    beta: f64,
    g: &Symbol,
    lag: &LagPoint,
    src: &SpectralDensity,
    u: f64,
) -> Result<f64> {
    let angles = 128usize;
    let mut total = 0.0;
    for ai in 0..angles {
        let phi = 2.0 * PI * (ai as f64 + 0.5) / angles as f64;
        let dir = [phi.cos(), phi.sin()];
        let phase_rate = -(lag.spatial[0] * dir[0] + lag.spatial[1] * dir[1]);
        // complex kernel along the ray; β = 1 carries e^{i u g_I}
        let ray = |r: f64| -> Complex64 {
            let p = FreqPoint::spatial([r * dir[0], r * dir[1]]);
            let v = g.eval_unchecked(&p);
            let s = src.eval_unchecked(&p);
            if beta == 1.0 {
                let gr = v.re.abs();
                Complex64::from_polar(s * (-u.abs() * gr).exp() / (2.0 * gr), u * v.im)
            } else {
                Complex64::new(s * temporal_kernel(2.0, v, u.abs()), 0.0)
            }
        };
        let kern_re = |r: f64| {
            let k = ray(r);
            (k * Complex64::from_polar(1.0, phase_rate * r)).re * r
        };
        // total linear phase rate along the ray: lag phase plus the drift of
        // the imaginary part (sampled at unit radius)
        let gi_slope = if beta == 1.0 {
            u * g.eval_unchecked(&FreqPoint::spatial([dir[0], dir[1]])).im
        } else {
            0.0
        };
        let freq = (phase_rate + gi_slope).abs();
        let ray_total = quad::halfline_hybrid(&kern_re, freq, false, 1e-10).map_err(|e| {
            match e {
                Error::Divergence(m) => {
                    Error::Divergence(format!("mixture not integrable at this lag: {m}"))
                }
                other => other,
            }
        })?;
        total += ray_total * (2.0 * PI / angles as f64);
    }
    Ok(total * (2.0 * PI).powf(-1.0))
}

// ---------------------------------------------------------------------------
// space-time numerical covariance (temporal quadrature + radial transform)
// ---------------------------------------------------------------------------

/// Covariance of a spatially isotropic space-time density at `(h, u)`:
/// a cosine transform in `ω` followed by the radial spatial transform. This
/// is the generic evaluator for models without closed forms (Stein, heat).
pub fn spacetime_covariance_numeric(
    density: &SpectralDensity,
    d: usize,
    h: f64,
    u: f64,
    tol: f64,
) -> Result<f64> {
    if density.dim() != d || !density.has_time() {
        return Err(Error::InvalidArgument("a space-time density is required".into()));
    }
    if density.symmetry() == RadialSymmetry::None {
        return Err(Error::Unsupported(
            "numerical space-time covariance needs spatial isotropy".into(),
        ));
    }
    let singular = !density.singular().is_empty();
    let margin = |r: f64| {
        let fw = |w: f64| density.eval_unchecked(&FreqPoint::space_time(radial_coords(d, r), w));
        // densities are even in ω for spatially isotropic models
        (2.0 * PI).powf(-0.5) * 2.0 * quad::fourier_cos_halfline(&fw, u, tol * 0.1).unwrap_or(f64::NAN)
    };
    let v = radial_fourier(&margin, d, h, None, None, singular, tol)?;
    if v.is_nan() {
        return Err(Error::Divergence("temporal quadrature failed".into()));
    }
    Ok(v)
}

fn radial_coords(d: usize, r: f64) -> Vec<f64> {
    let mut c = vec![0.0; d];
    c[0] = r;
    c
}

// ---------------------------------------------------------------------------
// grids and convolution
// ---------------------------------------------------------------------------

/// General covariance value for a model: closed form when available, then
/// the numerical transform paths, plus atom and cone contributions.
pub fn covariance_value(model: &ModelSpec, lag: &LagPoint) -> Result<f64> {
    match closed_form(model, lag) {
        Ok(v) => return Ok(add_components(model, lag, v)?),
        Err(Error::Unsupported(_)) => {}
        Err(e) => return Err(e),
    }
    let density = solution_spectral_density(model, true)?;
    let h = lag.radius();
    let ac = if density.symmetry() == RadialSymmetry::FullyRadial && !model.has_time {
        hankel_transform(&density, model.d, &[h], 1e-8)?[0]
    } else if model.has_time {
        let all_zero = density.cone().is_some() || is_zero_source(model);
        if all_zero {
            0.0
        } else {
            spacetime_covariance_numeric(&density, model.d, h, lag.temporal.unwrap_or(0.0), 1e-8)?
        }
    } else {
        return Err(Error::Unsupported(format!(
            "no covariance path for anisotropic spatial model '{}'",
            model.name
        )));
    };
    add_components(model, lag, ac)
}

fn is_zero_source(model: &ModelSpec) -> bool {
    matches!(model.kind, ModelKind::HomogeneousWave { .. })
}

fn add_components(model: &ModelSpec, lag: &LagPoint, ac: f64) -> Result<f64> {
    let density = solution_spectral_density(model, true)?;
    let mut total = ac;
    let dd = (model.d + usize::from(model.has_time)) as f64;
    let norm = (2.0 * PI).powf(-dd / 2.0);
    for atom in density.atoms() {
        let mut phase = 0.0;
        for (x, h) in atom.location.spatial.iter().zip(&lag.spatial) {
            phase += x * h;
        }
        if let (Some(w0), Some(u)) = (atom.location.temporal, lag.temporal) {
            phase += w0 * u;
        }
        total += norm * atom.weight * phase.cos();
    }
    if let Some(cone) = density.cone() {
        total += cone_covariance(cone, lag.radius(), lag.temporal.unwrap_or(0.0), 1e-8)?;
    }
    Ok(total)
}

/// How grid cells are sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridSampling {
    /// Point values at the lag nodes; lags without pointwise meaning are
    /// masked, never extrapolated.
    PointValues,
    /// Point values, but a masked origin cell of an integrable singularity
    /// is replaced by its exact cell average (isotropic spatial models).
    OriginCellMean,
    /// Every cell holds its average over the cell; the right sampling when
    /// the grid feeds a discrete convolution (isotropic spatial models).
    CellAverages,
}

/// Evaluate a covariance grid on centered lag axes `(n_i, Δ_i)`. Lags where
/// a distributional covariance has no pointwise value are masked rather
/// than extrapolated (see [`GridSampling`] for the cell-average variants).
pub fn covariance_grid(
    model: &ModelSpec,
    axes_spec: &[(usize, f64)],
    sampling: GridSampling,
) -> Result<CovarianceGrid> {
    let expected = model.d + usize::from(model.has_time);
    if axes_spec.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "model needs {expected} lag axes, got {}",
            axes_spec.len()
        )));
    }
    let axes: Vec<Vec<f64>> = axes_spec.iter().map(|&(n, dx)| centered_axis(n, dx)).collect();
    let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let total: usize = shape.iter().product();
    let mut values = vec![f64::NAN; total];
    let mut valid = vec![false; total];
    let mut idx = vec![0usize; shape.len()];
    let mut provenance = Provenance::ClosedForm;
    // radial memoization: isotropic models only depend on |h| (and u)
    let mut cache: std::collections::BTreeMap<(u64, u64), Result<f64>> =
        std::collections::BTreeMap::new();
    for lin in 0..total {
        crate::fftutil::unravel(lin, &shape, &mut idx);
        let spatial: Vec<f64> = idx[..model.d]
            .iter()
            .zip(&axes[..model.d])
            .map(|(&i, axis)| axis[i])
            .collect();
        let lag = if model.has_time {
            LagPoint::space_time(spatial, axes[model.d][idx[model.d]])
        } else {
            LagPoint::spatial(spatial)
        };
        let key = (lag.radius().to_bits(), lag.temporal.unwrap_or(0.0).abs().to_bits());
        let value = cache.entry(key).or_insert_with(|| covariance_value(model, &lag));
        match value {
            Ok(v) => {
                values[lin] = *v;
                valid[lin] = true;
            }
            Err(Error::Validity(_)) => {}
            Err(Error::Unsupported(m)) => {
                return Err(Error::Unsupported(std::mem::take(m)))
            }
            Err(e) => {
                return Err(Error::Divergence(format!(
                    "covariance evaluation failed at {lag:?}: {e}"
                )))
            }
        }
    }
    if covariance_is_transform_backed(model) {
        provenance = Provenance::Hankel;
    }
    let deltas: Vec<f64> = axes_spec.iter().map(|&(_, dx)| dx).collect();
    match sampling {
        GridSampling::PointValues => {}
        GridSampling::OriginCellMean => {
            if let Some(zero) = zero_linear_index(&axes, &shape) {
                if !valid[zero] {
                    values[zero] = origin_cell_average(model, &deltas)?;
                    valid[zero] = true;
                }
            }
        }
        GridSampling::CellAverages => {
            if model.has_time {
                return Err(Error::Unsupported("cell averages are spatial only".into()));
            }
            let nodes = quad::gauss_legendre(6);
            let zero = zero_linear_index(&axes, &shape);
            let cell_vals: Vec<Result<(f64, bool)>> = (0..total)
                .map(|lin| {
                    if Some(lin) == zero {
                        return Ok((origin_cell_average(model, &deltas)?, true));
                    }
                    let mut idx2 = vec![0usize; shape.len()];
                    crate::fftutil::unravel(lin, &shape, &mut idx2);
                    let center: Vec<f64> = idx2
                        .iter()
                        .zip(&axes)
                        .map(|(&i, axis)| axis[i])
                        .collect();
                    let mean = cell_average_tensor(model, &center, &deltas, &nodes)?;
                    Ok((mean, true))
                })
                .collect();
            for (lin, cv) in cell_vals.into_iter().enumerate() {
                let (v, ok) = cv?;
                values[lin] = v;
                valid[lin] = ok;
            }
        }
    }
    Ok(CovarianceGrid { axes, values, valid, provenance })
}

/// Tensor Gauss-Legendre cell average of the covariance around a non-origin
/// cell (the integrand is smooth away from zero lag).
fn cell_average_tensor(
    model: &ModelSpec,
    center: &[f64],
    deltas: &[f64],
    nodes: &[(f64, f64)],
) -> Result<f64> {
    let d = center.len();
    let mut total = 0.0;
    let mut weight_total = 0.0;
    let mut idx = vec![0usize; d];
    let counts = vec![nodes.len(); d];
    let points: usize = counts.iter().product();
    let mut x = vec![0.0; d];
    for lin in 0..points {
        crate::fftutil::unravel(lin, &counts, &mut idx);
        let mut w = 1.0;
        for i in 0..d {
            let (t, wt) = nodes[idx[i]];
            x[i] = center[i] + 0.5 * deltas[i] * t;
            w *= wt * 0.5;
        }
        total += w * covariance_value(model, &LagPoint::spatial(x.clone()))?;
        weight_total += w;
    }
    Ok(total / weight_total)
}

fn covariance_is_transform_backed(model: &ModelSpec) -> bool {
    !matches!(
        model.name.as_str(),
        "matern" | "matern_no_range" | "heat" | "waving_matern" | "evolving_matern"
    )
}

fn zero_linear_index(axes: &[Vec<f64>], shape: &[usize]) -> Option<usize> {
    let mut idx = Vec::with_capacity(axes.len());
    for axis in axes {
        let (i, v) = axis
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())?;
        if v.abs() > 1e-12 {
            return None;
        }
        idx.push(i);
    }
    Some(crate::fftutil::ravel(&idx, shape))
}

/// Exact average of the covariance over the origin cell, for isotropic
/// spatial models with an integrable singularity at zero lag.
fn origin_cell_average(model: &ModelSpec, deltas: &[f64]) -> Result<f64> {
    if model.has_time {
        return Err(Error::Unsupported("origin cell averaging is spatial only".into()));
    }
    let rho = |r: f64| covariance_value(model, &LagPoint::spatial(radial_coords(model.d, r)));
    match model.d {
        1 => {
            let half = deltas[0] / 2.0;
            let v = quad::tanh_sinh(&|r| rho(r).unwrap_or(f64::NAN), 0.0, half, 1e-9)?;
            Ok(v / half)
        }
        2 => {
            if (deltas[0] - deltas[1]).abs() > 1e-12 * deltas[0] {
                return Err(Error::Unsupported(
                    "origin cell averaging needs square cells".into(),
                ));
            }
            let s = deltas[0] / 2.0;
            // split the square into 8 sectors; integrate r·ρ(r) to the cell
            // boundary r = s / cos θ
            let nodes = quad::gauss_legendre(24);
            let mut total = 0.0;
            for &(t, w) in &nodes {
                let theta = PI / 8.0 * (t + 1.0);
                let rmax = s / theta.cos();
                let inner =
                    quad::tanh_sinh(&|r| r * rho(r).unwrap_or(f64::NAN), 0.0, rmax, 1e-9)?;
                total += w * (PI / 8.0) * inner;
            }
            Ok(8.0 * total / (deltas[0] * deltas[1]))
        }
        _ => Err(Error::Unsupported(
            "origin cell averaging implemented for d <= 2".into(),
        )),
    }
}

/// Discrete convolution of two covariance grids via zero-padded FFT,
/// scaled by the cell volume: the grid for a model whose source has
/// covariance `rho_x` is `rho_w ∗ rho_x`.
pub fn convolve_white(rho_w: &CovarianceGrid, rho_x: &CovarianceGrid) -> Result<CovarianceGrid> {
    if rho_w.axes.len() != rho_x.axes.len() {
        return Err(Error::InvalidArgument("grids have different rank".into()));
    }
    for (a, b) in rho_w.axes.iter().zip(&rho_x.axes) {
        if a.len() != b.len()
            || a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-9 * x.abs().max(1e-300))
        {
            return Err(Error::InvalidArgument("grids must share axes and spacing".into()));
        }
    }
    let spacing = rho_w
        .uniform_spacing()
        .ok_or_else(|| Error::InvalidArgument("convolution needs uniform axes".into()))?;
    if !(rho_w.valid.iter().all(|&v| v) && rho_x.valid.iter().all(|&v| v)) {
        return Err(Error::InvalidArgument(
            "convolution needs fully valid grids (no masked cells)".into(),
        ));
    }
    let zeros = rho_w
        .zero_indices()
        .ok_or_else(|| Error::InvalidArgument("axes must contain the zero lag".into()))?;
    let shape = rho_w.shape();
    let padded: Vec<usize> = shape.iter().map(|&n| 2 * n - 1).collect();
    let total: usize = padded.iter().product();
    let mut fa = vec![Complex64::default(); total];
    let mut fb = vec![Complex64::default(); total];
    let mut idx = vec![0usize; shape.len()];
    for lin in 0..rho_w.values.len() {
        crate::fftutil::unravel(lin, &shape, &mut idx);
        let plin = crate::fftutil::ravel(&idx, &padded);
        fa[plin] = Complex64::new(rho_w.values[lin], 0.0);
        fb[plin] = Complex64::new(rho_x.values[lin], 0.0);
    }
    crate::fftutil::fft_nd(&mut fa, &padded, false);
    crate::fftutil::fft_nd(&mut fb, &padded, false);
    for (a, b) in fa.iter_mut().zip(&fb) {
        *a *= b;
    }
    crate::fftutil::fft_nd(&mut fa, &padded, true);
    let cell_volume: f64 = spacing.iter().product();
    let norm = cell_volume / total as f64;
    let out_len = rho_w.values.len();
    let mut values = vec![0.0; out_len];
    for lin in 0..out_len {
        crate::fftutil::unravel(lin, &shape, &mut idx);
        // output lag index i corresponds to padded index i + z
        let src: Vec<usize> = idx.iter().zip(&zeros).map(|(&i, &z)| i + z).collect();
        values[lin] = fa[crate::fftutil::ravel(&src, &padded)].re * norm;
    }
    // a convolution of even functions is even; averaging with the mirrored
    // grid restores exact evenness and cancels the half-cell box asymmetry
    // that even-sized centered axes carry
    let mirrored = values.clone();
    for lin in 0..out_len {
        crate::fftutil::unravel(lin, &shape, &mut idx);
        let mut ok = true;
        let m: Vec<usize> = idx
            .iter()
            .zip(&zeros)
            .zip(&shape)
            .map(|((&i, &z), &n)| {
                let mi = 2 * z as isize - i as isize;
                if mi < 0 || mi >= n as isize {
                    ok = false;
                    0
                } else {
                    mi as usize
                }
            })
            .collect();
        if ok {
            let mlin = crate::fftutil::ravel(&m, &shape);
            values[lin] = 0.5 * (mirrored[lin] + mirrored[mlin]);
        }
    }
    Ok(CovarianceGrid {
        axes: rho_w.axes.clone(),
        values,
        valid: vec![true; out_len],
        provenance: Provenance::Convolution,
    })
}

/// Positivity gate used before simulating: refuse models whose existence
/// verdict is negative.
pub fn require_existence(model: &ModelSpec) -> Result<()> {
    if model.symbol.inverse_bound().is_certified() {
        return Ok(());
    }
    let report = check_existence(model, &crate::analysis::CheckConfig::default())?;
    if report.exists() {
        Ok(())
    } else {
        Err(Error::NonExistent(format!(
            "model '{}' has no stationary solution (verdict {:?})",
            model.name, report.verdict
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, matern_solution_density, real_params};

    #[test]
    fn matern_closed_form_spot_values() {
        // d=2, κ=1, α=2, |h|=1: K₁(1)/(4π)
        let m = build_model("matern", 2, real_params(&[("kappa", 1.0), ("alpha", 2.0)])).unwrap();
        let v = closed_form(&m, &LagPoint::spatial([1.0, 0.0])).unwrap();
        let expect = bessel_k(1.0, 1.0) / (4.0 * PI);
        assert!((v - expect).abs() < 1e-15 * expect.abs().max(1.0), "{v} vs {expect}");
    }

    #[test]
    fn no_range_closed_form_spot_value() {
        // d=3, α=1, |h|=2: 2^{-2} π^{-3/2} Γ(1/2)/Γ(1) · 1/2 = 1/(8π);
        // both the direct transform of (2π)^{-3/2}|ξ|^{-2} and the κ→0
        // Matérn limit give this value (cross-checked to 25 digits)
        let m = build_model("matern_no_range", 3, real_params(&[("alpha", 1.0)])).unwrap();
        let v = closed_form(&m, &LagPoint::spatial([0.0, 0.0, 2.0])).unwrap();
        assert!((v - 1.0 / (8.0 * PI)).abs() < 1e-15);
        // consistency with the κ→0 Matérn limit at a second point
        let kap = build_model("matern", 3, real_params(&[("kappa", 1e-6), ("alpha", 1.0)])).unwrap();
        let a = closed_form(&m, &LagPoint::spatial([0.7, 0.0, 0.0])).unwrap();
        let b = closed_form(&kap, &LagPoint::spatial([0.7, 0.0, 0.0])).unwrap();
        assert!((a - b).abs() < 1e-5 * a);
        // origin is masked, not extrapolated
        assert!(matches!(
            closed_form(&m, &LagPoint::spatial([0.0, 0.0, 0.0])),
            Err(Error::Validity(_))
        ));
    }

    #[test]
    fn heat_closed_form_spot_values() {
        // d=3, a=1, |h|=1, u=0: (2π)^{-2}·(π/2)·erf(∞) = 1/(8π)
        let m = build_model("heat", 3, real_params(&[("a", 1.0)])).unwrap();
        let v = closed_form(&m, &LagPoint::space_time([1.0, 0.0, 0.0], 0.0)).unwrap();
        assert!((v - 1.0 / (8.0 * PI)).abs() < 1e-15);
        // mpmath: heat(h=1, u=0.5) = 0.0271633518176282085640238683143
        let v = closed_form(&m, &LagPoint::space_time([1.0, 0.0, 0.0], 0.5)).unwrap();
        assert!((v - 0.027163351817628208).abs() < 1e-15);
    }

    #[test]
    fn hankel_matches_matern_closed_form() {
        let m = build_model("matern", 3, real_params(&[("kappa", 1.0), ("alpha", 2.0)])).unwrap();
        let density = solution_spectral_density(&m, false).unwrap();
        let hs = [0.1, 0.5, 1.0, 2.0, 5.0];
        let vals = hankel_transform(&density, 3, &hs, 1e-9).unwrap();
        for (h, v) in hs.iter().zip(&vals) {
            let expect = matern_covariance(3, 1.0, 2.0, *h).unwrap();
            assert!(
                (v - expect).abs() <= 1e-6 * expect.abs(),
                "h={h}: {v} vs {expect}"
            );
        }
    }

    #[test]
    fn truncated_white_matches_analytic_bessel_form() {
        // density (2π)^{-d/2}·1_{r ≤ R}: ρ(h) = (2π)^{-d/2} R^{ν+1} J_{ν+1}(hR) / h^{ν+1}
        for d in [1usize, 2, 3] {
            let nu = (d as f64 - 2.0) / 2.0;
            let r_cut = 3.0f64;
            let level = (2.0 * PI).powf(-(d as f64) / 2.0);
            let f = |r: f64| if r <= r_cut { level } else { 0.0 };
            for &h in &[0.0f64, 0.4, 1.3] {
                let got = radial_fourier(&f, d, h, None, Some(r_cut), false, 1e-11).unwrap();
                let expect = if h == 0.0 {
                    level * 2f64.powf(-nu) / gamma(nu + 2.0) * r_cut.powf(2.0 * nu + 2.0) / 2.0
                } else {
                    level * r_cut.powf(nu + 1.0) * bessel_j(nu + 1.0, h * r_cut) / h.powf(nu + 1.0)
                };
                assert!(
                    (got - expect).abs() <= 1e-9 * expect.abs().max(1e-12),
                    "d={d} h={h}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn hankel_handles_singular_origin_of_the_no_range_model() {
        let m = build_model("matern_no_range", 3, real_params(&[("alpha", 1.0)])).unwrap();
        let density = solution_spectral_density(&m, false).unwrap();
        for &h in &[0.5f64, 2.0] {
            let got = hankel_transform(&density, 3, &[h], 1e-9).unwrap()[0];
            let expect = closed_form(&m, &LagPoint::spatial([h, 0.0, 0.0])).unwrap();
            assert!(
                (got - expect).abs() <= 1e-6 * expect.abs(),
                "h={h}: {got} vs {expect}"
            );
        }
        assert!(hankel_transform(&density, 3, &[0.0], 1e-9).is_err());
    }

    #[test]
    fn waving_matern_at_zero_time_lag_is_matern() {
        let m = build_model(
            "waving_matern",
            3,
            real_params(&[("c", 2.0), ("a", 1.5), ("kappa", 1.0), ("alpha", 2.0)]),
        )
        .unwrap();
        let v = closed_form(&m, &LagPoint::space_time([0.7, 0.0, 0.0], 0.0)).unwrap();
        let expect = 1.5 * matern_covariance(3, 1.0, 2.0, 0.7).unwrap();
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn waving_matern_split_formula_matches_cone_transform() {
        let m = build_model(
            "waving_matern",
            3,
            real_params(&[("c", 1.5), ("a", 1.0), ("kappa", 1.0), ("alpha", 2.0)]),
        )
        .unwrap();
        let density = solution_spectral_density(&m, true).unwrap();
        let cone = density.cone().unwrap();
        for (h, u) in [(0.7, 0.4), (1.3, 0.9), (2.0, 0.1)] {
            let split = closed_form(&m, &LagPoint::space_time([h, 0.0, 0.0], u)).unwrap();
            let transform = cone_covariance(cone, h, u, 1e-10).unwrap();
            assert!(
                (split - transform).abs() <= 1e-7 * split.abs().max(1e-9),
                "(h,u)=({h},{u}): {split} vs {transform}"
            );
        }
        // mpmath cross-check at (h,u) = (0.7, 0.4), c = 1.5:
        let v = closed_form(&m, &LagPoint::space_time([0.7, 0.0, 0.0], 0.4)).unwrap();
        assert!((v - 0.012640741319977086).abs() < 1e-12, "{v}");
    }

    #[test]
    fn first_order_mixture_margin_equals_trace_matern() {
        // β = 1, u = 0 margin equals the Matérn trace with α/2 exponent
        let (a, kappa, alpha) = (1.0, 1.0, 2.0);
        let m = build_model(
            "evolving_matern",
            3,
            real_params(&[("beta", 1.0), ("a", a), ("kappa", kappa), ("alpha", alpha)]),
        )
        .unwrap();
        let g = m.spatial_symbol.as_ref().unwrap();
        let src = SpectralDensity::white(3, false);
        for &h in &[0.4f64, 0.7, 1.5] {
            let got = evolution_mixture_covariance(
                1.0,
                g,
                &LagPoint::space_time([h, 0.0, 0.0], 0.0),
                &src,
            )
            .unwrap();
            // trace covariance: (1/(2a)) Matérn with exponent α/2
            let expect = matern_covariance(3, kappa, alpha / 2.0, h).unwrap() / (2.0 * a);
            assert!(
                (got - expect).abs() <= 1e-6 * expect.abs(),
                "h={h}: {got} vs {expect}"
            );
        }
        // mpmath value at (h,u) = (0.7, 0.3): 0.0102237770501830613
        let got = evolution_mixture_covariance(
            1.0,
            g,
            &LagPoint::space_time([0.7, 0.0, 0.0], 0.3),
            &src,
        )
        .unwrap();
        assert!((got - 0.010223777050183061).abs() < 1e-8, "{got}");
    }

    #[test]
    fn first_order_mixture_is_a_radial_transform_of_its_kernel() {
        // direct definition consistency at u > 0 with g_I = 0
        let m = build_model(
            "evolving_matern",
            2,
            real_params(&[("beta", 1.0), ("a", 0.7), ("kappa", 1.2), ("alpha", 1.6)]),
        )
        .unwrap();
        let g = m.spatial_symbol.as_ref().unwrap().clone();
        let src = SpectralDensity::white(2, false);
        let u = 0.5;
        let h = 0.9;
        let got =
            evolution_mixture_covariance(1.0, &g, &LagPoint::space_time([0.0, h], u), &src)
                .unwrap();
        let f = |r: f64| {
            let p = FreqPoint::radial(2, r);
            let gr = g.eval_unchecked(&p).re.abs();
            src.eval_unchecked(&p) * (-u * gr).exp() / (2.0 * gr)
        };
        let direct = radial_fourier(&f, 2, h, None, None, false, 1e-10).unwrap();
        assert!((got - direct).abs() <= 1e-10 * direct.abs());
    }

    #[test]
    fn second_order_mixture_matches_printed_integral() {
        // independent 1D quadrature of the explicit β = 2 integrand
        let (a, kappa, alpha) = (0.8, 1.0, 2.0);
        let m = build_model(
            "evolving_matern",
            3,
            real_params(&[("beta", 2.0), ("a", a), ("kappa", kappa), ("alpha", alpha)]),
        )
        .unwrap();
        let g = m.spatial_symbol.as_ref().unwrap();
        let src = SpectralDensity::white(3, false);
        for (h, u) in [(0.6, 0.5), (1.1, 1.3)] {
            let got = evolution_mixture_covariance(
                2.0,
                g,
                &LagPoint::space_time([h, 0.0, 0.0], u),
                &src,
            )
            .unwrap();
            let sa = a.sqrt();
            let integrand = |r: f64| {
                let t = (kappa * kappa + r * r).powf(alpha / 4.0);
                bessel_j(0.5, h * r) * (-sa * t * u).exp() * (1.0 + sa * t * u)
                    / (4.0 * a * sa * t.powi(3))
                    * r.powf(1.5)
            };
            let direct = (2.0 * PI).powf(-1.5) / h.sqrt()
                * (quad::adaptive(&integrand, 0.0, 40.0, 1e-12).unwrap()
                    + quad::halfline_decaying(&integrand, 40.0, 1e-12).unwrap_or(0.0));
            assert!(
                (got - direct).abs() <= 1e-6 * direct.abs(),
                "(h,u)=({h},{u}): {got} vs {direct}"
            );
        }
    }

    #[test]
    fn advection_mixture_reduces_to_shifted_diffusion() {
        // the drift only translates the spatial lag: ρ_v(h, u) = ρ_0(h - v u, u)
        let v = [0.8, -0.3];
        let adv = build_model(
            "advection_diffusion",
            2,
            crate::model::params_from_pairs(&[
                ("kappa", crate::model::ParamValue::Real(1.0)),
                ("v", crate::model::ParamValue::Vector(v.to_vec())),
                (
                    "sigma",
                    crate::model::ParamValue::Matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
                ),
            ]),
        )
        .unwrap();
        let still = build_model(
            "evolving_matern",
            2,
            real_params(&[("beta", 1.0), ("a", 1.0), ("kappa", 1.0), ("alpha", 2.0)]),
        )
        .unwrap();
        let src = SpectralDensity::white(2, false);
        let ga = adv.spatial_symbol.as_ref().unwrap();
        let gs = still.spatial_symbol.as_ref().unwrap();
        let (h, u) = ([0.6, 0.2], 0.7);
        let moving =
            evolution_mixture_covariance(1.0, ga, &LagPoint::space_time(h, u), &src).unwrap();
        let shifted = [h[0] - v[0] * u, h[1] - v[1] * u];
        let frame =
            evolution_mixture_covariance(1.0, gs, &LagPoint::space_time(shifted, u), &src)
                .unwrap();
        assert!(
            (moving - frame).abs() <= 2e-5 * frame.abs(),
            "moving {moving} vs frame-shifted {frame}"
        );
    }

    #[test]
    fn stein_covariance_through_the_numeric_path() {
        // finite-measure Stein point: the numeric evaluator returns a
        // positive, decaying covariance with ρ(0,0) dominating
        let m = build_model(
            "stein",
            1,
            real_params(&[
                ("a", 1.0),
                ("b", 1.0),
                ("s", 1.0),
                ("kappa", 1.0),
                ("alpha", 1.0),
                ("beta", 1.0),
                ("nu", 2.0),
            ]),
        )
        .unwrap();
        let density = solution_spectral_density(&m, false).unwrap();
        let v00 = spacetime_covariance_numeric(&density, 1, 0.0, 0.0, 1e-8).unwrap();
        let v10 = spacetime_covariance_numeric(&density, 1, 1.0, 0.0, 1e-8).unwrap();
        let v01 = spacetime_covariance_numeric(&density, 1, 0.0, 1.0, 1e-8).unwrap();
        assert!(v00 > v10.abs() && v00 > v01.abs());
        // the same value through the general dispatcher
        let via = covariance_value(&m, &LagPoint::space_time([1.0], 0.0)).unwrap();
        assert!((via - v10).abs() <= 1e-9 * v10.abs());
    }

    #[test]
    fn convolution_identity_and_commutativity() {
        let m = build_model("matern", 1, real_params(&[("kappa", 1.0), ("alpha", 1.0)])).unwrap();
        let grid = covariance_grid(&m, &[(65, 0.2)], GridSampling::PointValues).unwrap();
        // discrete delta scaled by 1/cell volume convolves to identity
        let mut delta = grid.clone();
        for v in delta.values.iter_mut() {
            *v = 0.0;
        }
        let zero = delta.zero_indices().unwrap()[0];
        delta.values[zero] = 1.0 / 0.2;
        let conv = convolve_white(&grid, &delta).unwrap();
        for (a, b) in conv.values.iter().zip(&grid.values) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
        // commutativity
        let ab = convolve_white(&grid, &delta).unwrap();
        let ba = convolve_white(&delta, &grid).unwrap();
        for (a, b) in ab.values.iter().zip(&ba.values) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
        }
    }

    #[test]
    fn convolution_of_materns_adds_spectral_exponents() {
        // Matérn(α₁) ∗ Matérn(α₂) = Matérn(α₁+α₂) for a shared κ (d = 1)
        let m1 = build_model("matern", 1, real_params(&[("kappa", 1.0), ("alpha", 1.0)])).unwrap();
        let m2 = build_model("matern", 1, real_params(&[("kappa", 1.0), ("alpha", 1.5)])).unwrap();
        let msum = build_model("matern", 1, real_params(&[("kappa", 1.0), ("alpha", 2.5)])).unwrap();
        let axes = [(257usize, 0.125f64)];
        let g1 = covariance_grid(&m1, &axes, GridSampling::CellAverages).unwrap();
        let g2 = covariance_grid(&m2, &axes, GridSampling::CellAverages).unwrap();
        let conv = convolve_white(&g1, &g2).unwrap();
        let direct = covariance_grid(&msum, &axes, GridSampling::PointValues).unwrap();
        // compare on the central half where truncation is negligible
        let n = direct.values.len();
        for i in n / 4..3 * n / 4 {
            let (a, b) = (conv.values[i], direct.values[i]);
            assert!((a - b).abs() <= 2e-3 * b.abs().max(1e-6), "i={i}: {a} vs {b}");
        }
    }

    #[test]
    fn cell_average_restores_the_masked_origin() {
        // d=2 Matérn at α = d/2 has a log-singular origin; the cell mean is
        // finite and close to the covariance slightly away from zero
        let m = build_model("matern", 2, real_params(&[("kappa", 1.0), ("alpha", 1.0)])).unwrap();
        let masked = covariance_grid(&m, &[(33, 0.1), (33, 0.1)], GridSampling::PointValues).unwrap();
        let zero = zero_linear_index(&masked.axes, &masked.shape()).unwrap();
        assert!(!masked.valid[zero]);
        let filled = covariance_grid(&m, &[(33, 0.1), (33, 0.1)], GridSampling::OriginCellMean).unwrap();
        assert!(filled.valid[zero]);
        let near = matern_covariance(2, 1.0, 1.0, 0.05).unwrap();
        assert!(filled.values[zero] > near, "cell mean should exceed the mid-cell value");
        assert!(filled.values[zero] < 3.0 * near);
    }

    #[test]
    fn waving_matern_grid_masks_nothing_and_respects_symmetry() {
        let m = build_model(
            "waving_matern",
            2,
            real_params(&[("c", 1.0), ("a", 1.0), ("kappa", 1.0), ("alpha", 2.0)]),
        )
        .unwrap();
        let grid = covariance_grid(&m, &[(9, 0.5), (9, 0.5), (7, 0.25)], GridSampling::PointValues).unwrap();
        assert!(grid.valid.iter().all(|&v| v));
        // evenness ρ(-h,-u) = ρ(h,u)
        let shape = grid.shape();
        let mut idx = vec![0usize; 3];
        for lin in 0..grid.values.len() {
            crate::fftutil::unravel(lin, &shape, &mut idx);
            let mirrored: Vec<usize> =
                idx.iter().zip(&shape).map(|(&i, &n)| n - 1 - i).collect();
            let mlin = crate::fftutil::ravel(&mirrored, &shape);
            assert!((grid.values[lin] - grid.values[mlin]).abs() <= 1e-9 * grid.values[lin].abs().max(1e-12));
        }
    }
}
