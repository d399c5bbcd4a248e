//! Spectral densities with optional singular components.
//!
//! A spectral measure splits into an absolutely continuous density on
//! frequency space, point atoms (in Hermitian `±ξ` pairs), and an optional
//! measure carried by the space-time cone `{|ω| = c|ξ|}`. Atoms encode
//! random-constant homogeneous solutions; the cone component encodes
//! homogeneous wave solutions. Keeping them first class means downstream
//! covariance and simulation code never has to special-case them.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symbol::{sweep_point, FreqPoint, ZeroSet};

/// What kind of rotational structure the density has; decides which
/// quadrature path is valid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialSymmetry {
    /// Depends only on `|ξ|` (purely spatial) or `|(ξ,ω)|`.
    FullyRadial,
    /// Space-time density depending only on `(|ξ|, ω)`.
    SpatialRadial,
    None,
}

/// A point mass of the spectral measure.
#[derive(Clone, Debug)]
pub struct Atom {
    pub location: FreqPoint,
    pub weight: f64,
}

/// Measure carried by the cone `{ |ω| = speed · |ξ| }`, described by the
/// spectral density of its spatial trace. Normalized so that the `u = 0`
/// temporal margin of the resulting covariance is exactly the covariance of
/// `spatial`.
#[derive(Clone)]
pub struct ConeComponent {
    pub speed: f64,
    pub spatial: SpectralDensity,
}

impl fmt::Debug for ConeComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConeComponent(speed={})", self.speed)
    }
}

type DensityFn = Arc<dyn Fn(&FreqPoint) -> f64 + Send + Sync>;

struct DensityInner {
    dim: usize,
    has_time: bool,
    density: DensityFn,
    symmetry: RadialSymmetry,
    atoms: Vec<Atom>,
    cone: Option<ConeComponent>,
    /// Where the density function may return `+∞`.
    singular: ZeroSet,
    slow_growth_hint: Option<i32>,
}

/// A spectral density plus its singular components. Immutable, cheap to
/// clone, safe to evaluate concurrently.
#[derive(Clone)]
pub struct SpectralDensity {
    inner: Arc<DensityInner>,
}

impl fmt::Debug for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralDensity")
            .field("dim", &self.inner.dim)
            .field("has_time", &self.inner.has_time)
            .field("symmetry", &self.inner.symmetry)
            .field("atoms", &self.inner.atoms.len())
            .field("cone", &self.inner.cone.is_some())
            .field("singular", &self.inner.singular)
            .finish()
    }
}

pub struct DensityBuilder {
    dim: usize,
    has_time: bool,
    symmetry: RadialSymmetry,
    atoms: Vec<Atom>,
    cone: Option<ConeComponent>,
    singular: ZeroSet,
    slow_growth_hint: Option<i32>,
}

impl DensityBuilder {
    pub fn symmetry(mut self, s: RadialSymmetry) -> Self {
        self.symmetry = s;
        self
    }

    /// Add an atom pair at `±location` with the given weight on each side;
    /// an atom at the origin is its own mirror image and is added once.
    pub fn atom_pair(mut self, location: FreqPoint, weight: f64) -> Self {
        let at_origin = location.norm_sq() == 0.0;
        self.atoms.push(Atom { location: location.clone(), weight });
        if !at_origin {
            self.atoms.push(Atom { location: location.negated(), weight });
        }
        self
    }

    pub fn cone(mut self, speed: f64, spatial: SpectralDensity) -> Self {
        self.cone = Some(ConeComponent { speed, spatial });
        self
    }

    pub fn singular(mut self, z: ZeroSet) -> Self {
        self.singular = z;
        self
    }

    pub fn slow_growth_hint(mut self, n: i32) -> Self {
        self.slow_growth_hint = Some(n);
        self
    }

    pub fn build(self, density: impl Fn(&FreqPoint) -> f64 + Send + Sync + 'static) -> SpectralDensity {
        SpectralDensity {
            inner: Arc::new(DensityInner {
                dim: self.dim,
                has_time: self.has_time,
                density: Arc::new(density),
                symmetry: self.symmetry,
                atoms: self.atoms,
                cone: self.cone,
                singular: self.singular,
                slow_growth_hint: self.slow_growth_hint,
            }),
        }
    }
}

impl SpectralDensity {
    pub fn builder(dim: usize, has_time: bool) -> DensityBuilder {
        DensityBuilder {
            dim,
            has_time,
            symmetry: RadialSymmetry::None,
            atoms: Vec::new(),
            cone: None,
            singular: ZeroSet::Empty,
            slow_growth_hint: None,
        }
    }

    /// White Noise density: the constant `(2π)^{-D/2}` over `D = d (+1)`
    /// coordinates.
    pub fn white(dim: usize, has_time: bool) -> SpectralDensity {
        let total = dim + usize::from(has_time);
        let level = (2.0 * std::f64::consts::PI).powf(-(total as f64) / 2.0);
        SpectralDensity::builder(dim, has_time)
            .symmetry(RadialSymmetry::FullyRadial)
            .slow_growth_hint(((total as f64) / 2.0).ceil() as i32 + 1)
            .build(move |_| level)
    }

    /// The zero measure.
    pub fn zero(dim: usize, has_time: bool) -> SpectralDensity {
        SpectralDensity::builder(dim, has_time)
            .symmetry(RadialSymmetry::FullyRadial)
            .slow_growth_hint(0)
            .build(|_| 0.0)
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn has_time(&self) -> bool {
        self.inner.has_time
    }

    pub fn symmetry(&self) -> RadialSymmetry {
        self.inner.symmetry
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.inner.atoms
    }

    pub fn cone(&self) -> Option<&ConeComponent> {
        self.inner.cone.as_ref()
    }

    pub fn singular(&self) -> &ZeroSet {
        &self.inner.singular
    }

    pub fn slow_growth_hint(&self) -> Option<i32> {
        self.inner.slow_growth_hint
    }

    /// Evaluate the absolutely continuous part. Points on the singular set
    /// report `+∞` rather than failing.
    pub fn eval(&self, freq: &FreqPoint) -> Result<f64> {
        if freq.dim() != self.inner.dim || freq.has_time() != self.inner.has_time {
            return Err(Error::InvalidArgument(format!(
                "frequency point has shape (d={}, time={}) but the density expects (d={}, time={})",
                freq.dim(),
                freq.has_time(),
                self.inner.dim,
                self.inner.has_time
            )));
        }
        Ok((self.inner.density)(freq))
    }

    #[inline]
    pub fn eval_unchecked(&self, freq: &FreqPoint) -> f64 {
        (self.inner.density)(freq)
    }

    /// Evaluate at spatial radius `r` (requires `FullyRadial` spatial
    /// symmetry and no time axis).
    pub fn eval_radial(&self, r: f64) -> f64 {
        debug_assert!(self.inner.symmetry == RadialSymmetry::FullyRadial && !self.inner.has_time);
        (self.inner.density)(&FreqPoint::radial(self.inner.dim, r))
    }

    /// Derive a new density with extra atoms, keeping everything else.
    pub fn with_atom_pair(&self, location: FreqPoint, weight: f64) -> SpectralDensity {
        let mut atoms = self.inner.atoms.clone();
        let at_origin = location.norm_sq() == 0.0;
        atoms.push(Atom { location: location.clone(), weight });
        if !at_origin {
            atoms.push(Atom { location: location.negated(), weight });
        }
        SpectralDensity {
            inner: Arc::new(DensityInner {
                dim: self.inner.dim,
                has_time: self.inner.has_time,
                density: self.inner.density.clone(),
                symmetry: self.inner.symmetry,
                atoms,
                cone: self.inner.cone.clone(),
                singular: self.inner.singular.clone(),
                slow_growth_hint: self.inner.slow_growth_hint,
            }),
        }
    }

    /// Check evenness `f(-ξ) = f(ξ)` on a seeded sweep.
    pub fn check_even(&self, n_samples: usize, seed: u64) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..n_samples {
            let p = sweep_point(self.inner.dim, self.inner.has_time, seed, i as u64);
            let a = self.eval(&p)?;
            let b = self.eval(&p.negated())?;
            if a.is_finite() && b.is_finite() {
                worst = worst.max((a - b).abs() / (1.0 + a.abs()));
            }
        }
        Ok(worst)
    }

    /// Total weight of the atoms.
    pub fn atom_mass(&self) -> f64 {
        self.inner.atoms.iter().map(|a| a.weight).sum()
    }
}
