//! Registry of named models.
//!
//! A model binds a symbol function, validated parameters and a source-term
//! spectral measure. The solution spectral density is the source density
//! divided by `|g|²`; models whose symbol vanishes somewhere may in addition
//! carry homogeneous components (atoms, cone measures) chosen at build time.
//!
//! Registry names and parameter keys (all reals unless noted):
//!
//! | name                  | parameters                                   |
//! |-----------------------|----------------------------------------------|
//! | `matern`              | `kappa > 0`, `alpha`                         |
//! | `matern_no_range`     | `alpha > 0`                                  |
//! | `markov`              | `coeffs` (vector, `p(t) = Σ coeffs[i] t^i` strictly positive on `t ≥ 0`) |
//! | `stein`               | `a, b > 0`, `s`, `kappa` (`s²+kappa² > 0`), `alpha`, `beta`, `nu` |
//! | `evolving_matern`     | `beta > 0`, `a > 0`, `kappa > 0`, `alpha`, optional `s_beta ∈ {-1, 1}` |
//! | `advection_diffusion` | `kappa > 0`, `v` (vector, length d), `sigma` (d×d SPD matrix) |
//! | `langevin`            | `D, k, eta0 > 0`, `eta1, nu ≥ 0`             |
//! | `heat`                | `a > 0`                                      |
//! | `wave`                | `c > 0`                                      |
//! | `waving_matern`       | `c > 0`, `a > 0`, `kappa > 0`, `alpha`       |
//!
//! The JSON document consumed by the CLI is
//! `{"name": str, "d": int, "params": {…}, "source": {…}, "homogeneous": {…}}`
//! with `source` and `homogeneous` optional (see [`ModelDoc`]).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{RadialSymmetry, SpectralDensity};
use crate::error::{Error, Result};
use crate::symbol::{
    beta_phase, evolution_symbol, sweep_point, FreqPoint, InverseBound, Symbol, Witness, ZeroSet,
};

/// A validated parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

pub type Params = BTreeMap<String, ParamValue>;

/// Source term of the SPDE.
#[derive(Clone, Debug)]
pub enum SourceTerm {
    WhiteNoise { dim: usize, has_time: bool },
    Separable { spatial: SpectralDensity, temporal: SpectralDensity },
    Custom(SpectralDensity),
}

impl SourceTerm {
    pub fn dim(&self) -> usize {
        match self {
            SourceTerm::WhiteNoise { dim, .. } => *dim,
            SourceTerm::Separable { spatial, .. } => spatial.dim(),
            SourceTerm::Custom(d) => d.dim(),
        }
    }

    pub fn has_time(&self) -> bool {
        match self {
            SourceTerm::WhiteNoise { has_time, .. } => *has_time,
            SourceTerm::Separable { .. } => true,
            SourceTerm::Custom(d) => d.has_time(),
        }
    }

    /// Materialize the spectral density of the source.
    pub fn density(&self) -> SpectralDensity {
        match self {
            SourceTerm::WhiteNoise { dim, has_time } => SpectralDensity::white(*dim, *has_time),
            SourceTerm::Separable { spatial, temporal } => {
                let sp = spatial.clone();
                let tp = temporal.clone();
                let sym = if spatial.symmetry() == RadialSymmetry::FullyRadial {
                    RadialSymmetry::SpatialRadial
                } else {
                    RadialSymmetry::None
                };
                let singular = if spatial.singular().is_empty() && temporal.singular().is_empty() {
                    ZeroSet::Empty
                } else {
                    ZeroSet::Unknown
                };
                SpectralDensity::builder(spatial.dim(), true)
                    .symmetry(sym)
                    .singular(singular)
                    .build(move |f: &FreqPoint| {
                        let w = f.temporal.unwrap_or(0.0);
                        sp.eval_unchecked(&f.spatial_part())
                            * tp.eval_unchecked(&FreqPoint::spatial([w]))
                    })
            }
            SourceTerm::Custom(d) => d.clone(),
        }
    }
}

/// Tensor-product source `spatial ⊗ temporal`.
///
/// The temporal factor is a one-dimensional density evaluated on the `ω`
/// axis (`FreqPoint::spatial([ω])` by convention).
pub fn source_separable(
    spatial: SpectralDensity,
    temporal: SpectralDensity,
) -> Result<SourceTerm> {
    if spatial.has_time() {
        return Err(Error::InvalidArgument(
            "separable source: the spatial factor must not carry a temporal axis".into(),
        ));
    }
    if temporal.dim() != 1 || temporal.has_time() {
        return Err(Error::InvalidArgument(
            "separable source: the temporal factor must be one-dimensional".into(),
        ));
    }
    Ok(SourceTerm::Separable { spatial, temporal })
}

/// Structural family of a model; drives trace analysis and classification.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    Spatial,
    Evolution { beta: f64 },
    SpaceTime,
    HomogeneousWave { speed: f64 },
}

/// Homogeneous solution component selected at build time.
#[derive(Clone, Debug)]
pub enum HomogeneousPart {
    /// Random constant: an atom of the given weight at the origin.
    ConstantAtom { weight: f64 },
    /// Cone measure generating homogeneous wave solutions.
    Cone { speed: f64, spatial: SpectralDensity },
}

/// A named SPDE model: dimensions, parameters, symbol and source term.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    pub d: usize,
    pub has_time: bool,
    pub params: Params,
    pub symbol: Symbol,
    /// The purely spatial symbol `g` for evolution models.
    pub spatial_symbol: Option<Symbol>,
    pub kind: ModelKind,
    pub source: SourceTerm,
    pub homogeneous: Option<HomogeneousPart>,
    /// Build-time warnings (for example a user override of the temporal
    /// sign convention).
    pub notes: Vec<String>,
}

fn p_real(params: &Params, model: &str, key: &str) -> Result<f64> {
    match params.get(key) {
        Some(ParamValue::Real(v)) => Ok(*v),
        Some(_) => Err(Error::InvalidArgument(format!("{model}: parameter '{key}' must be a real"))),
        None => Err(Error::InvalidArgument(format!("{model}: missing parameter '{key}'"))),
    }
}

fn p_real_opt(params: &Params, model: &str, key: &str) -> Result<Option<f64>> {
    match params.get(key) {
        Some(ParamValue::Real(v)) => Ok(Some(*v)),
        Some(_) => Err(Error::InvalidArgument(format!("{model}: parameter '{key}' must be a real"))),
        None => Ok(None),
    }
}

fn p_vector(params: &Params, model: &str, key: &str) -> Result<Vec<f64>> {
    match params.get(key) {
        Some(ParamValue::Vector(v)) => Ok(v.clone()),
        Some(_) => Err(Error::InvalidArgument(format!("{model}: parameter '{key}' must be a vector"))),
        None => Err(Error::InvalidArgument(format!("{model}: missing parameter '{key}'"))),
    }
}

fn p_matrix(params: &Params, model: &str, key: &str) -> Result<Vec<Vec<f64>>> {
    match params.get(key) {
        Some(ParamValue::Matrix(v)) => Ok(v.clone()),
        Some(_) => Err(Error::InvalidArgument(format!("{model}: parameter '{key}' must be a matrix"))),
        None => Err(Error::InvalidArgument(format!("{model}: missing parameter '{key}'"))),
    }
}

fn require(cond: bool, model: &str, constraint: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{model}: constraint violated: {constraint}")))
    }
}

/// Witness for `scale · (κ² + |ξ|²)^{α/2}`, valid for `κ > 0`, `scale > 0`.
fn matern_witness(kappa: f64, alpha: f64, scale: f64) -> Witness {
    if alpha >= 0.0 {
        Witness::constant(1.0 / (scale * kappa.powf(alpha)))
    } else {
        let m = (alpha.abs() / 2.0).ceil();
        let k2 = kappa * kappa;
        Witness::new((2.0 * m) as u32, move |f: &FreqPoint| {
            (1.0 + k2 + f.norm_sq()).powf(m) / scale
        })
    }
}

fn matern_spatial_symbol(d: usize, kappa: f64, alpha: f64, scale: f64) -> Symbol {
    let k2 = kappa * kappa;
    let w = matern_witness(kappa, alpha, scale.abs());
    let deg = if alpha >= 0.0 { (alpha / 2.0).ceil() as i32 } else { 0 };
    let coeff = scale.abs() * (1.0 + k2).powf(alpha.abs() / 2.0).max(kappa.powf(alpha));
    Symbol::builder(d)
        .isotropic(true)
        .poly_bound(deg, coeff)
        .zero_set(ZeroSet::Empty)
        .inverse_bound(InverseBound::Certified(w.clone()))
        .inverse_bound_real(InverseBound::Certified(w))
        .build(move |f: &FreqPoint| {
            let r2: f64 = f.spatial.iter().map(|x| x * x).sum();
            Complex64::new(scale * pow_half(k2 + r2, alpha), 0.0)
        })
}

#[inline]
fn pow_half(base: f64, alpha: f64) -> f64 {
    // (base)^{alpha/2} with exact handling of the ubiquitous alpha = 2
    if alpha == 2.0 {
        base
    } else {
        base.powf(alpha / 2.0)
    }
}

/// Numerical minimum of `p(t) = Σ coeffs[i] t^i` over `t ≥ 0`.
fn poly_min_nonneg(coeffs: &[f64]) -> f64 {
    let eval = |t: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
    let deg = coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0);
    if deg == 0 {
        return eval(0.0);
    }
    if coeffs[deg] < 0.0 {
        return f64::NEG_INFINITY;
    }
    // beyond the Cauchy bound of p' the polynomial is increasing
    let lead = coeffs[deg] * deg as f64;
    let bound = 1.0
        + coeffs[..deg]
            .iter()
            .enumerate()
            .map(|(i, c)| (c * i as f64 / lead).abs())
            .fold(0.0f64, f64::max);
    let mut best = eval(0.0);
    let mut best_t = 0.0;
    let n = 4096;
    for i in 0..=n {
        let t = bound * i as f64 / n as f64;
        let v = eval(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    // golden-section polish around the sampled minimum
    let (mut lo, mut hi) = ((best_t - bound / n as f64).max(0.0), best_t + bound / n as f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if eval(m1) < eval(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.min(eval(0.5 * (lo + hi)))
}

fn cholesky_is_spd(m: &[Vec<f64>]) -> bool {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for j in 0..n {
        let mut diag = a[j][j];
        for k in 0..j {
            diag -= a[j][k] * a[j][k];
        }
        if diag <= 0.0 {
            return false;
        }
        let diag = diag.sqrt();
        a[j][j] = diag;
        for i in j + 1..n {
            let mut v = a[i][j];
            for k in 0..j {
                v -= a[i][k] * a[j][k];
            }
            a[i][j] = v / diag;
        }
    }
    true
}

/// Build a model from the registry.
pub fn build_model(name: &str, d: usize, params: Params) -> Result<ModelSpec> {
    require(d >= 1, name, "spatial dimension d must be >= 1")?;
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "matern" => {
            let kappa = p_real(&params, name, "kappa")?;
            let alpha = p_real(&params, name, "alpha")?;
            require(kappa > 0.0, name, "kappa must be > 0")?;
            let symbol = matern_spatial_symbol(d, kappa, alpha, 1.0);
            Ok(ModelSpec {
                name: lower,
                d,
                has_time: false,
                params,
                symbol,
                spatial_symbol: None,
                kind: ModelKind::Spatial,
                source: SourceTerm::WhiteNoise { dim: d, has_time: false },
                homogeneous: None,
                notes: vec![],
            })
        }
        "matern_no_range" => {
            let alpha = p_real(&params, name, "alpha")?;
            require(alpha > 0.0, name, "alpha must be > 0")?;
            let symbol = Symbol::builder(d)
                .isotropic(true)
                .poly_bound((alpha / 2.0).ceil() as i32, 1.0)
                .zero_set(ZeroSet::Origin)
                .inverse_bound(InverseBound::Refuted)
                .inverse_bound_real(InverseBound::Refuted)
                .build(move |f: &FreqPoint| Complex64::new(f.radius().powf(alpha), 0.0));
            Ok(ModelSpec {
                name: lower,
                d,
                has_time: false,
                params,
                symbol,
                spatial_symbol: None,
                kind: ModelKind::Spatial,
                source: SourceTerm::WhiteNoise { dim: d, has_time: false },
                homogeneous: None,
                notes: vec![],
            })
        }
        "markov" => {
            let coeffs = p_vector(&params, name, "coeffs")?;
            require(!coeffs.is_empty(), name, "coeffs must be non-empty")?;
            let pmin = poly_min_nonneg(&coeffs);
            require(
                pmin > 0.0,
                name,
                "the polynomial p must be strictly positive on [0, ∞)",
            )?;
            let w = Witness::constant(1.0 / pmin.sqrt());
            let deg_p = coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0) as i32;
            let coeff_sum: f64 = coeffs.iter().map(|c| c.abs()).sum();
            let cs = coeffs.clone();
            let symbol = Symbol::builder(d)
                .isotropic(true)
                .poly_bound(deg_p, coeff_sum.sqrt().max(1.0))
                .zero_set(ZeroSet::Empty)
                .inverse_bound(InverseBound::Certified(w.clone()))
                .inverse_bound_real(InverseBound::Certified(w))
                .build(move |f: &FreqPoint| {
                    let t: f64 = f.spatial.iter().map(|x| x * x).sum();
                    let p = cs.iter().rev().fold(0.0, |acc, c| acc * t + c);
                    Complex64::new(p.max(0.0).sqrt(), 0.0)
                });
            Ok(ModelSpec {
                name: lower,
                d,
                has_time: false,
                params,
                symbol,
                spatial_symbol: None,
                kind: ModelKind::Spatial,
                source: SourceTerm::WhiteNoise { dim: d, has_time: false },
                homogeneous: None,
                notes: vec![],
            })
        }
        "stein" => {
            let a = p_real(&params, name, "a")?;
            let b = p_real(&params, name, "b")?;
            let s = p_real(&params, name, "s")?;
            let kappa = p_real(&params, name, "kappa")?;
            let alpha = p_real(&params, name, "alpha")?;
            let beta = p_real(&params, name, "beta")?;
            let nu = p_real(&params, name, "nu")?;
            require(a > 0.0 && b > 0.0, name, "a and b must be > 0")?;
            require(s * s + kappa * kappa > 0.0, name, "s² + kappa² must be > 0")?;
            let s2 = s * s;
            let k2 = kappa * kappa;
            let bound = if alpha >= 0.0 && beta >= 0.0 && nu >= 0.0 {
                let m0 = b * s2.powf(beta) + a * k2.powf(alpha);
                InverseBound::Certified(Witness::constant(m0.powf(-nu / 2.0)))
            } else {
                InverseBound::Unknown
            };
            let deg = ((nu.abs() / 2.0) * alpha.abs().max(beta.abs()).max(1.0)).ceil() as i32;
            let coeff = (b * (s2 + 1.0).powf(beta.abs()) + a * (k2 + 1.0).powf(alpha.abs()))
                .powf(nu.abs() / 2.0)
                .max(1.0);
            let real_bound = bound.clone();
            let symbol = Symbol::builder(d)
                .time(true)
                .isotropic(true)
                .poly_bound(deg, coeff)
                .zero_set(if bound.is_certified() { ZeroSet::Empty } else { ZeroSet::Unknown })
                .inverse_bound(bound)
                .inverse_bound_real(real_bound)
                .build(move |f: &FreqPoint| {
                    let w = f.temporal.unwrap_or(0.0);
                    let r2: f64 = f.spatial.iter().map(|x| x * x).sum();
                    let inner = b * (s2 + w * w).powf(beta) + a * (k2 + r2).powf(alpha);
                    Complex64::new(inner.powf(nu / 2.0), 0.0)
                });
            Ok(ModelSpec {
                name: lower,
                d,
                has_time: true,
                params,
                symbol,
                spatial_symbol: None,
                kind: ModelKind::SpaceTime,
                source: SourceTerm::WhiteNoise { dim: d, has_time: true },
                homogeneous: None,
                notes: vec![],
            })
        }
        "evolving_matern" => {
            let beta = p_real(&params, name, "beta")?;
            let a = p_real(&params, name, "a")?;
            let kappa = p_real(&params, name, "kappa")?;
            let alpha = p_real(&params, name, "alpha")?;
            require(beta > 0.0, name, "beta must be > 0")?;
            require(a > 0.0, name, "a must be > 0")?;
            require(kappa > 0.0, name, "kappa must be > 0")?;
            let (cb, _) = beta_phase(beta);
            let auto_sign = if cb < 0.0 { -1.0 } else { 1.0 };
            let mut notes = vec![];
            let sign = match p_real_opt(&params, name, "s_beta")? {
                Some(v) => {
                    require(v == 1.0 || v == -1.0, name, "s_beta must be 1 or -1")?;
                    if v != auto_sign {
                        notes.push(format!(
                            "s_beta overridden to {v}; the invertibility condition may fail"
                        ));
                    }
                    v
                }
                None => auto_sign,
            };
            let g = matern_spatial_symbol(d, kappa, alpha, sign * a);
            let symbol = evolution_symbol(beta, &g)?;
            Ok(ModelSpec {
                name: lower,
                d,
                has_time: true,
                params,
                symbol,
                spatial_symbol: Some(g),
                kind: ModelKind::Evolution { beta },
                source: SourceTerm::WhiteNoise { dim: d, has_time: true },
                homogeneous: None,
                notes,
            })
        }
        "advection_diffusion" => {
            let kappa = p_real(&params, name, "kappa")?;
            let v = p_vector(&params, name, "v")?;
            let sigma = p_matrix(&params, name, "sigma")?;
            require(kappa > 0.0, name, "kappa must be > 0")?;
            require(v.len() == d, name, "v must have length d")?;
            require(
                sigma.len() == d && sigma.iter().all(|row| row.len() == d),
                name,
                "sigma must be a d x d matrix",
            )?;
            let scale: f64 = sigma
                .iter()
                .flatten()
                .map(|x| x.abs())
                .fold(0.0, f64::max)
                .max(1.0);
            for i in 0..d {
                for j in 0..d {
                    require(
                        (sigma[i][j] - sigma[j][i]).abs() <= 1e-12 * scale,
                        name,
                        "sigma must be symmetric",
                    )?;
                }
            }
            require(cholesky_is_spd(&sigma), name, "sigma must be positive-definite")?;
            let k2 = kappa * kappa;
            let w = Witness::constant(1.0 / k2);
            let vv = v.clone();
            let sg = sigma.clone();
            let coeff = k2 + scale * d as f64 + v.iter().map(|x| x.abs()).sum::<f64>();
            let g = Symbol::builder(d)
                .isotropic(false)
                .poly_bound(1, coeff.max(1.0))
                .zero_set(ZeroSet::Empty)
                .inverse_bound(InverseBound::Certified(w.clone()))
                .inverse_bound_real(InverseBound::Certified(w))
                .build(move |f: &FreqPoint| {
                    let mut quad = 0.0;
                    let mut drift = 0.0;
                    for i in 0..f.spatial.len() {
                        drift += vv[i] * f.spatial[i];
                        for j in 0..f.spatial.len() {
                            quad += f.spatial[i] * sg[i][j] * f.spatial[j];
                        }
                    }
                    Complex64::new(k2 + quad, drift)
                });
            let symbol = evolution_symbol(1.0, &g)?;
            Ok(ModelSpec {
                name: lower,
                d,
                has_time: true,
                params,
                symbol,
                spatial_symbol: Some(g),
                kind: ModelKind::Evolution { beta: 1.0 },
                source: SourceTerm::WhiteNoise { dim: d, has_time: true },
                homogeneous: None,
                notes: vec![],
            })
        }
        "langevin" => {
            let big_d = p_real(&params, name, "D")?;
            let k = p_real(&params, name, "k")?;
            let eta0 = p_real(&params, name, "eta0")?;
            let eta1 = p_real_opt(&params, name, "eta1")?.unwrap_or(0.0);
            let nu = p_real_opt(&params, name, "nu")?.unwrap_or(0.0);
            require(big_d > 0.0 && k > 0.0 && eta0 > 0.0, name, "D, k, eta0 must be > 0")?;
            require(eta1 >= 0.0 && nu >= 0.0, name, "eta1 and nu must be >= 0")?;
            let c = big_d / (2.0 * k.powi(d as i32) * eta0);
            let (k2, k4) = (k * k, k * k * k * k);
            let w = Witness::constant(1.0 / c);
            let g = Symbol::builder(d)
                .isotropic(true)
                .poly_bound(2, c * (1.0 + eta1 * k2 + nu * k4).max(1.0))
                .zero_set(ZeroSet::Empty)
                .inverse_bound(InverseBound::Certified(w.clone()))
                .inverse_bound_real(InverseBound::Certified(w))
                .build(move |f: &FreqPoint| {
                    let r2: f64 = f.spatial.iter().map(|x| x * x).sum();
                    Complex64::new(c * (1.0 + eta1 * k2 * r2 + nu * k4 * r2 * r2), 0.0)
                });
            let symbol = evolution_symbol(1.0, &g)?;
            Ok(ModelSpec {
                name: lower,
                d,
                has_time: true,
                params,
                symbol,
                spatial_symbol: Some(g),
                kind: ModelKind::Evolution { beta: 1.0 },
                source: SourceTerm::WhiteNoise { dim: d, has_time: true },
                homogeneous: None,
                notes: vec![],
            })
        }
        "heat" => {
            let a = p_real(&params, name, "a")?;
            require(a > 0.0, name, "a (diffusivity) must be > 0")?;
            let g = Symbol::builder(d)
                .isotropic(true)
                .poly_bound(1, a)
                .zero_set(ZeroSet::Origin)
                .inverse_bound(InverseBound::Refuted)
                .inverse_bound_real(InverseBound::Refuted)
                .build(move |f: &FreqPoint| {
                    Complex64::new(a * f.spatial.iter().map(|x| x * x).sum::<f64>(), 0.0)
                });
            let symbol = evolution_symbol(1.0, &g)?
                .with_zero_set(ZeroSet::Origin)
                .with_inverse_bound(InverseBound::Refuted);
            Ok(ModelSpec {
                name: lower,
                d,
                has_time: true,
                params,
                symbol,
                spatial_symbol: Some(g),
                kind: ModelKind::Evolution { beta: 1.0 },
                source: SourceTerm::WhiteNoise { dim: d, has_time: true },
                homogeneous: None,
                notes: vec![],
            })
        }
        "wave" | "waving_matern" => {
            let c = p_real(&params, name, "c")?;
            require(c > 0.0, name, "c (propagation velocity) must be > 0")?;
            let c2 = c * c;
            let g = Symbol::builder(d)
                .isotropic(true)
                .poly_bound(1, c2)
                .zero_set(ZeroSet::Origin)
                .inverse_bound(InverseBound::Refuted)
                .inverse_bound_real(InverseBound::Refuted)
                .build(move |f: &FreqPoint| {
                    Complex64::new(c2 * f.spatial.iter().map(|x| x * x).sum::<f64>(), 0.0)
                });
            let symbol = evolution_symbol(2.0, &g)?
                .with_zero_set(ZeroSet::Cone { speed: c })
                .with_inverse_bound(InverseBound::Refuted);
            if lower == "wave" {
                return Ok(ModelSpec {
                    name: lower,
                    d,
                    has_time: true,
                    params,
                    symbol,
                    spatial_symbol: Some(g),
                    kind: ModelKind::Evolution { beta: 2.0 },
                    source: SourceTerm::WhiteNoise { dim: d, has_time: true },
                    homogeneous: None,
                    notes: vec![],
                });
            }
            // waving Matérn: the homogeneous wave solution whose spatial
            // trace is an `a`-scaled Matérn spectral density
            let a = p_real(&params, name, "a")?;
            let kappa = p_real(&params, name, "kappa")?;
            let alpha = p_real(&params, name, "alpha")?;
            require(a > 0.0, name, "a must be > 0")?;
            require(kappa > 0.0, name, "kappa must be > 0")?;
            let spatial = matern_solution_density(d, kappa, alpha, a);
            Ok(ModelSpec {
                name: lower,
                d,
                has_time: true,
                params,
                symbol,
                spatial_symbol: Some(g),
                kind: ModelKind::HomogeneousWave { speed: c },
                source: SourceTerm::Custom(SpectralDensity::zero(d, true)),
                homogeneous: Some(HomogeneousPart::Cone { speed: c, spatial }),
                notes: vec![],
            })
        }
        other => Err(Error::NotFound(format!("unknown model '{other}'"))),
    }
}

/// Matérn solution spectral density `scale · (2π)^{-d/2} (κ²+|ξ|²)^{-α}`.
pub fn matern_solution_density(d: usize, kappa: f64, alpha: f64, scale: f64) -> SpectralDensity {
    let k2 = kappa * kappa;
    let norm = scale * (2.0 * PI).powf(-(d as f64) / 2.0);
    SpectralDensity::builder(d, false)
        .symmetry(RadialSymmetry::FullyRadial)
        .build(move |f: &FreqPoint| {
            let r2: f64 = f.spatial.iter().map(|x| x * x).sum();
            norm / pow_half(k2 + r2, 2.0 * alpha)
        })
}

/// Spectral density of the stationary solution: `source / |g|²` plus any
/// homogeneous components selected on the model.
///
/// Unless `force` is set, a model without a certified invertible symbol is
/// first run through the existence analysis and refused when no stationary
/// solution exists. Points exactly on a symbol zero evaluate to `+∞`.
pub fn solution_spectral_density(model: &ModelSpec, force: bool) -> Result<SpectralDensity> {
    if !force && !model.symbol.inverse_bound().is_certified() {
        let report = crate::analysis::check_existence(model, &crate::analysis::CheckConfig::default())?;
        if !report.exists() {
            return Err(Error::NonExistent(format!(
                "model '{}' has no stationary solution (verdict: {:?})",
                model.name, report.verdict
            )));
        }
    }
    let src = model.source.density();
    let sym = model.symbol.clone();
    let symmetry = derived_symmetry(model, &src);

    let mut builder = SpectralDensity::builder(model.d, model.has_time)
        .symmetry(symmetry)
        .singular(model.symbol.zero_set().clone());

    // atoms of the source pass through the division; mass on a zero of g is
    // inadmissible
    for atom in src.atoms() {
        let g2 = model.symbol.modulus_sq(&atom.location);
        if g2 == 0.0 {
            return Err(Error::Validity(
                "the source places an atom on a zero of the symbol; no stationary solution carries that mass"
                    .into(),
            ));
        }
        builder = builder.atom_pair(atom.location.clone(), atom.weight / g2);
    }
    match &model.homogeneous {
        Some(HomogeneousPart::ConstantAtom { weight }) => {
            builder = builder.atom_pair(FreqPoint::spatial(vec![0.0; model.d]), *weight);
        }
        Some(HomogeneousPart::Cone { speed, spatial }) => {
            builder = builder.cone(*speed, spatial.clone());
        }
        None => {}
    }
    Ok(builder.build(move |f: &FreqPoint| {
        let g2 = sym.eval_unchecked(f).norm_sqr();
        let s = src.eval_unchecked(f);
        if g2 == 0.0 {
            if s == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            s / g2
        }
    }))
}

fn derived_symmetry(model: &ModelSpec, src: &SpectralDensity) -> RadialSymmetry {
    let sym_iso = model
        .spatial_symbol
        .as_ref()
        .map(|g| g.isotropic())
        .unwrap_or_else(|| model.symbol.isotropic());
    match (&model.kind, src.symmetry()) {
        (ModelKind::Spatial, RadialSymmetry::FullyRadial) if sym_iso => RadialSymmetry::FullyRadial,
        (ModelKind::Spatial, _) => RadialSymmetry::None,
        (_, RadialSymmetry::FullyRadial) | (_, RadialSymmetry::SpatialRadial) if sym_iso => {
            RadialSymmetry::SpatialRadial
        }
        _ => RadialSymmetry::None,
    }
}

/// Separability/symmetry classification of a space-time model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub separable: Option<bool>,
    pub symmetric: Option<bool>,
}

/// Classify a model by sampling its solution spectral density: separability
/// is an additive rank-one test on log-density, symmetry a reflection test
/// in `ω`.
pub fn classify(model: &ModelSpec) -> Result<Classification> {
    if !model.has_time {
        return Ok(Classification { separable: None, symmetric: None });
    }
    if let ModelKind::HomogeneousWave { .. } = model.kind {
        // cone measures: cos(c|ξ||u|) temporal modulation is even in u but
        // couples space and time
        return Ok(Classification { separable: Some(false), symmetric: Some(true) });
    }
    let density = solution_spectral_density(model, true)?;
    // symmetry: density(ξ, ω) == density(ξ, -ω) on a sweep
    let mut symmetric = true;
    for i in 0..512u64 {
        let p = sweep_point(model.d, true, 0xc1a55, i);
        let q = FreqPoint::space_time(p.spatial.clone(), -p.temporal.unwrap());
        let a = density.eval(&p)?;
        let b = density.eval(&q)?;
        if a.is_finite() && b.is_finite() && (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
            symmetric = false;
            break;
        }
    }
    // separability: rank-one structure of log f on a sampled grid
    let n = 14usize;
    let mut xi = Vec::with_capacity(n);
    let mut om = Vec::with_capacity(n);
    for i in 0..n {
        let p = sweep_point(model.d, true, 0x5e9a4ab1e, i as u64);
        xi.push(p.spatial.clone());
        om.push(p.temporal.unwrap());
    }
    let mut logf = vec![vec![f64::NAN; n]; n];
    for (i, s) in xi.iter().enumerate() {
        for (j, w) in om.iter().enumerate() {
            let v = density.eval(&FreqPoint::space_time(s.clone(), *w))?;
            if v.is_finite() && v > 0.0 {
                logf[i][j] = v.ln();
            }
        }
    }
    let mut separable = Some(true);
    'outer: for i in 1..n {
        for j in 1..n {
            let (m, mi, mj, m0) = (logf[i][j], logf[i][0], logf[0][j], logf[0][0]);
            if !(m.is_finite() && mi.is_finite() && mj.is_finite() && m0.is_finite()) {
                separable = None;
                break 'outer;
            }
            if (m - mi - mj + m0).abs() > 1e-8 * (1.0 + m.abs()) {
                separable = Some(false);
                break 'outer;
            }
        }
    }
    Ok(Classification { separable, symmetric: Some(symmetric) })
}

// ---------------------------------------------------------------------------
// JSON document schema
// ---------------------------------------------------------------------------

/// The JSON model document: `{"name", "d", "params", "source"?, "homogeneous"?}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelDoc {
    pub name: String,
    pub d: usize,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homogeneous: Option<HomogeneousDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceDoc {
    White,
    Separable { spatial: Box<FactorDoc>, temporal: Box<FactorDoc> },
    Model { model: Box<ModelDoc> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorDoc {
    White,
    Model { model: Box<ModelDoc> },
}

/// Optional homogeneous component: a random constant of the given spectral
/// weight, admissible when the symbol vanishes at the origin.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomogeneousDoc {
    pub weight: f64,
}

fn json_to_param(v: &serde_json::Value) -> Result<ParamValue> {
    match v {
        serde_json::Value::Number(x) => x
            .as_f64()
            .map(ParamValue::Real)
            .ok_or_else(|| Error::InvalidArgument("parameter is not a finite number".into())),
        serde_json::Value::Array(items) => {
            if items.iter().all(|i| i.is_number()) {
                let vals = items
                    .iter()
                    .map(|i| i.as_f64().unwrap())
                    .collect::<Vec<_>>();
                Ok(ParamValue::Vector(vals))
            } else if items.iter().all(|i| i.is_array()) {
                let mut rows = Vec::new();
                for row in items {
                    let row = row.as_array().unwrap();
                    if !row.iter().all(|i| i.is_number()) {
                        return Err(Error::InvalidArgument("matrix entries must be numbers".into()));
                    }
                    rows.push(row.iter().map(|i| i.as_f64().unwrap()).collect());
                }
                Ok(ParamValue::Matrix(rows))
            } else {
                Err(Error::InvalidArgument("parameter array must hold numbers or rows".into()))
            }
        }
        _ => Err(Error::InvalidArgument("parameter must be a number, vector or matrix".into())),
    }
}

/// Build a model (with optional source and homogeneous parts) from a parsed
/// document.
pub fn model_from_doc(doc: &ModelDoc) -> Result<ModelSpec> {
    let mut params = Params::new();
    for (k, v) in &doc.params {
        params.insert(k.clone(), json_to_param(v)?);
    }
    let mut model = build_model(&doc.name, doc.d, params)?;
    if let Some(source) = &doc.source {
        let built = match source {
            SourceDoc::White => SourceTerm::WhiteNoise { dim: model.d, has_time: model.has_time },
            SourceDoc::Separable { spatial, temporal } => {
                if !model.has_time {
                    return Err(Error::InvalidArgument(
                        "separable sources apply to space-time models only".into(),
                    ));
                }
                let sp = factor_density(spatial, model.d)?;
                let tp = factor_density(temporal, 1)?;
                source_separable(sp, tp)?
            }
            SourceDoc::Model { model: src } => {
                let sub = model_from_doc(src)?;
                if sub.d != model.d || sub.has_time != model.has_time {
                    return Err(Error::InvalidArgument(
                        "custom source must live on the same frequency domain as the model".into(),
                    ));
                }
                SourceTerm::Custom(solution_spectral_density(&sub, false)?)
            }
        };
        if built.dim() != model.d || built.has_time() != model.has_time {
            return Err(Error::InvalidArgument("source axes do not match the model".into()));
        }
        model.source = built;
    }
    if let Some(h) = &doc.homogeneous {
        if h.weight <= 0.0 {
            return Err(Error::InvalidArgument("homogeneous weight must be > 0".into()));
        }
        match model.symbol.zero_set() {
            ZeroSet::Origin => {
                model.homogeneous = Some(HomogeneousPart::ConstantAtom { weight: h.weight })
            }
            z => {
                return Err(Error::InvalidArgument(format!(
                    "a random-constant component needs a symbol vanishing at the origin (zero set: {})",
                    z.label()
                )))
            }
        }
    }
    Ok(model)
}

fn factor_density(f: &FactorDoc, expected_d: usize) -> Result<SpectralDensity> {
    match f {
        FactorDoc::White => Ok(SpectralDensity::white(expected_d, false)),
        FactorDoc::Model { model } => {
            let sub = model_from_doc(model)?;
            if sub.has_time || sub.d != expected_d {
                return Err(Error::InvalidArgument(format!(
                    "factor model must be spatial with d = {expected_d}"
                )));
            }
            solution_spectral_density(&sub, false)
        }
    }
}

/// Parse a JSON string into a model document.
pub fn parse_model_doc(text: &str) -> Result<ModelDoc> {
    serde_json::from_str(text)
        .map_err(|e| Error::MalformedFile(format!("model document: {e}")))
}

pub fn params_from_pairs(pairs: &[(&str, ParamValue)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Shorthand for all-real parameter lists.
pub fn real_params(pairs: &[(&str, f64)]) -> Params {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), ParamValue::Real(*v)))
        .collect()
}
