//! Symbol functions and their algebra.
//!
//! A symbol is a continuous, polynomially bounded, Hermitian-symmetric
//! complex function on frequency space. It defines a pseudo-differential
//! operator by multiplication on the Fourier side, and everything downstream
//! (existence verdicts, spectral densities, covariances) is driven by the
//! metadata collected here: where the symbol vanishes, and whether its
//! modulus is certified to stay above the inverse of a strictly positive
//! polynomial. That lower bound is the invertibility certificate: when it
//! holds, `1/g` is itself a symbol and the associated SPDE has exactly one
//! stationary solution no matter the source term.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng;

/// A point in frequency space: `d` spatial coordinates (rad/length) and an
/// optional temporal coordinate (rad/time).
#[derive(Clone, Debug, PartialEq)]
pub struct FreqPoint {
    pub spatial: Vec<f64>,
    pub temporal: Option<f64>,
}

impl FreqPoint {
    pub fn spatial(coords: impl Into<Vec<f64>>) -> Self {
        FreqPoint { spatial: coords.into(), temporal: None }
    }

    pub fn space_time(coords: impl Into<Vec<f64>>, omega: f64) -> Self {
        FreqPoint { spatial: coords.into(), temporal: Some(omega) }
    }

    /// Spatial point with a single nonzero radial coordinate; convenient for
    /// isotropic evaluation.
    pub fn radial(dim: usize, r: f64) -> Self {
        let mut c = vec![0.0; dim];
        if dim > 0 {
            c[0] = r;
        }
        FreqPoint { spatial: c, temporal: None }
    }

    pub fn dim(&self) -> usize {
        self.spatial.len()
    }

    pub fn has_time(&self) -> bool {
        self.temporal.is_some()
    }

    /// Euclidean norm of the spatial part.
    pub fn radius(&self) -> f64 {
        self.spatial.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Squared norm over all coordinates including time.
    pub fn norm_sq(&self) -> f64 {
        self.spatial.iter().map(|x| x * x).sum::<f64>() + self.temporal.map_or(0.0, |w| w * w)
    }

    pub fn negated(&self) -> FreqPoint {
        FreqPoint {
            spatial: self.spatial.iter().map(|x| -x).collect(),
            temporal: self.temporal.map(|w| -w),
        }
    }

    /// The spatial part as its own point.
    pub fn spatial_part(&self) -> FreqPoint {
        FreqPoint { spatial: self.spatial.clone(), temporal: None }
    }
}

/// Description of the zero set of a symbol.
#[derive(Clone, Debug, PartialEq)]
pub enum ZeroSet {
    Empty,
    Origin,
    /// The space-time cone `{ |ω| = speed · |ξ| }`.
    Cone { speed: f64 },
    /// Isolated sampled zeros (stored with their mirror images implied).
    Samples(Vec<FreqPoint>),
    Unknown,
}

impl ZeroSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, ZeroSet::Empty)
    }

    pub fn label(&self) -> String {
        match self {
            ZeroSet::Empty => "empty".into(),
            ZeroSet::Origin => "origin".into(),
            ZeroSet::Cone { speed } => format!("cone({speed})"),
            ZeroSet::Samples(v) => format!("samples({})", v.len()),
            ZeroSet::Unknown => "unknown".into(),
        }
    }
}

type RealFn = Arc<dyn Fn(&FreqPoint) -> f64 + Send + Sync>;
type EvalFn = Arc<dyn Fn(&FreqPoint) -> Complex64 + Send + Sync>;

/// A strictly positive polynomial `p` witnessing `|g| · p ≥ 1`.
#[derive(Clone)]
pub struct Witness {
    pub degree: u32,
    eval: RealFn,
}

impl Witness {
    pub fn new(degree: u32, eval: impl Fn(&FreqPoint) -> f64 + Send + Sync + 'static) -> Self {
        Witness { degree, eval: Arc::new(eval) }
    }

    pub fn constant(value: f64) -> Self {
        Witness { degree: 0, eval: Arc::new(move |_| value) }
    }

    pub fn eval(&self, f: &FreqPoint) -> f64 {
        (self.eval)(f)
    }

    fn product(&self, other: &Witness) -> Witness {
        let a = self.eval.clone();
        let b = other.eval.clone();
        Witness {
            degree: self.degree + other.degree,
            eval: Arc::new(move |f| a(f) * b(f)),
        }
    }
}

impl fmt::Debug for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Witness(degree={})", self.degree)
    }
}

/// Status of the inverse-polynomial lower bound on `|g|` (the invertibility
/// certificate that guarantees a unique stationary solution).
#[derive(Clone, Debug)]
pub enum InverseBound {
    Certified(Witness),
    Refuted,
    Unknown,
}

impl InverseBound {
    pub fn is_certified(&self) -> bool {
        matches!(self, InverseBound::Certified(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            InverseBound::Certified(_) => "certified",
            InverseBound::Refuted => "refuted",
            InverseBound::Unknown => "unknown",
        }
    }
}

struct SymbolInner {
    dim: usize,
    has_time: bool,
    isotropic: bool,
    poly_bound_degree: i32,
    poly_bound_coeff: f64,
    zero_set: ZeroSet,
    inverse_bound: InverseBound,
    /// Same certificate question for the real part alone; evolution models
    /// need it because their space-time modulus is controlled by `Re g`.
    inverse_bound_real: InverseBound,
    eval: EvalFn,
}

/// A symbol function with checkable metadata. Immutable and cheap to clone.
#[derive(Clone)]
pub struct Symbol {
    inner: Arc<SymbolInner>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("dim", &self.inner.dim)
            .field("has_time", &self.inner.has_time)
            .field("isotropic", &self.inner.isotropic)
            .field("poly_bound_degree", &self.inner.poly_bound_degree)
            .field("zero_set", &self.inner.zero_set)
            .field("inverse_bound", &self.inner.inverse_bound.label())
            .finish()
    }
}

pub struct SymbolBuilder {
    dim: usize,
    has_time: bool,
    isotropic: bool,
    poly_bound_degree: i32,
    poly_bound_coeff: f64,
    zero_set: ZeroSet,
    inverse_bound: InverseBound,
    inverse_bound_real: InverseBound,
}

impl SymbolBuilder {
    pub fn new(dim: usize) -> Self {
        SymbolBuilder {
            dim,
            has_time: false,
            isotropic: false,
            poly_bound_degree: 0,
            poly_bound_coeff: 1.0,
            zero_set: ZeroSet::Unknown,
            inverse_bound: InverseBound::Unknown,
            inverse_bound_real: InverseBound::Unknown,
        }
    }

    pub fn time(mut self, has_time: bool) -> Self {
        self.has_time = has_time;
        self
    }

    pub fn isotropic(mut self, iso: bool) -> Self {
        self.isotropic = iso;
        self
    }

    /// `|g(ξ)| ≤ coeff · (1 + |ξ|²)^degree`.
    pub fn poly_bound(mut self, degree: i32, coeff: f64) -> Self {
        self.poly_bound_degree = degree;
        self.poly_bound_coeff = coeff;
        self
    }

    pub fn zero_set(mut self, z: ZeroSet) -> Self {
        self.zero_set = z;
        self
    }

    pub fn inverse_bound(mut self, b: InverseBound) -> Self {
        self.inverse_bound = b;
        self
    }

    pub fn inverse_bound_real(mut self, b: InverseBound) -> Self {
        self.inverse_bound_real = b;
        self
    }

    pub fn build(self, eval: impl Fn(&FreqPoint) -> Complex64 + Send + Sync + 'static) -> Symbol {
        Symbol {
            inner: Arc::new(SymbolInner {
                dim: self.dim,
                has_time: self.has_time,
                isotropic: self.isotropic,
                poly_bound_degree: self.poly_bound_degree,
                poly_bound_coeff: self.poly_bound_coeff,
                zero_set: self.zero_set,
                inverse_bound: self.inverse_bound,
                inverse_bound_real: self.inverse_bound_real,
                eval: Arc::new(eval),
            }),
        }
    }
}

impl Symbol {
    pub fn builder(dim: usize) -> SymbolBuilder {
        SymbolBuilder::new(dim)
    }

    /// The constant symbol `value` (must be real for Hermitian symmetry,
    /// but deliberately broken test symbols are allowed through).
    pub fn constant(dim: usize, value: Complex64) -> Symbol {
        let mag = value.norm();
        let bound = if mag > 0.0 {
            InverseBound::Certified(Witness::constant(1.0 / mag))
        } else {
            InverseBound::Refuted
        };
        let zero = if mag > 0.0 { ZeroSet::Empty } else { ZeroSet::Unknown };
        let real_bound = if value.re.abs() > 0.0 {
            InverseBound::Certified(Witness::constant(1.0 / value.re.abs()))
        } else {
            InverseBound::Refuted
        };
        Symbol::builder(dim)
            .isotropic(true)
            .poly_bound(0, mag.max(1.0))
            .zero_set(zero)
            .inverse_bound(bound)
            .inverse_bound_real(real_bound)
            .build(move |_| value)
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn has_time(&self) -> bool {
        self.inner.has_time
    }

    /// Invariance under spatial rotations (space-time symbols may still
    /// depend freely on `ω`).
    pub fn isotropic(&self) -> bool {
        self.inner.isotropic
    }

    pub fn poly_bound_degree(&self) -> i32 {
        self.inner.poly_bound_degree
    }

    pub fn poly_bound_coeff(&self) -> f64 {
        self.inner.poly_bound_coeff
    }

    pub fn zero_set(&self) -> &ZeroSet {
        &self.inner.zero_set
    }

    pub fn inverse_bound(&self) -> &InverseBound {
        &self.inner.inverse_bound
    }

    pub fn inverse_bound_real(&self) -> &InverseBound {
        &self.inner.inverse_bound_real
    }

    /// Evaluate the symbol. Dimension mismatches are an error.
    pub fn eval(&self, freq: &FreqPoint) -> Result<Complex64> {
        if freq.dim() != self.inner.dim || freq.has_time() != self.inner.has_time {
            return Err(Error::InvalidArgument(format!(
                "frequency point has shape (d={}, time={}) but the symbol expects (d={}, time={})",
                freq.dim(),
                freq.has_time(),
                self.inner.dim,
                self.inner.has_time
            )));
        }
        Ok((self.inner.eval)(freq))
    }

    /// Evaluation without the shape check, for hot loops that validated once.
    #[inline]
    pub fn eval_unchecked(&self, freq: &FreqPoint) -> Complex64 {
        (self.inner.eval)(freq)
    }

    /// `|g(ξ)|²` as a plain real value.
    #[inline]
    pub fn modulus_sq(&self, freq: &FreqPoint) -> f64 {
        (self.inner.eval)(freq).norm_sqr()
    }

    fn clone_inner(&self) -> SymbolInner {
        SymbolInner {
            dim: self.inner.dim,
            has_time: self.inner.has_time,
            isotropic: self.inner.isotropic,
            poly_bound_degree: self.inner.poly_bound_degree,
            poly_bound_coeff: self.inner.poly_bound_coeff,
            zero_set: self.inner.zero_set.clone(),
            inverse_bound: self.inner.inverse_bound.clone(),
            inverse_bound_real: self.inner.inverse_bound_real.clone(),
            eval: self.inner.eval.clone(),
        }
    }

    /// Same evaluator, sharper analytic knowledge of the zero set.
    pub fn with_zero_set(&self, z: ZeroSet) -> Symbol {
        let mut inner = self.clone_inner();
        inner.zero_set = z;
        Symbol { inner: Arc::new(inner) }
    }

    pub fn with_inverse_bound(&self, b: InverseBound) -> Symbol {
        let mut inner = self.clone_inner();
        inner.inverse_bound = b;
        Symbol { inner: Arc::new(inner) }
    }

    pub fn with_inverse_bound_real(&self, b: InverseBound) -> Symbol {
        let mut inner = self.clone_inner();
        inner.inverse_bound_real = b;
        Symbol { inner: Arc::new(inner) }
    }
}

/// Binary/unary combinations of symbols. Metadata is propagated
/// conservatively: the result may report less than the sharpest truth, never
/// more.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CombineOp {
    Sum,
    Product,
    ModulusSquared,
    RealPower(f64),
}

pub fn combine(op: CombineOp, a: &Symbol, b: Option<&Symbol>) -> Result<Symbol> {
    match op {
        CombineOp::Sum | CombineOp::Product => {
            let b = b.ok_or_else(|| {
                Error::InvalidArgument("sum/product need a second operand".into())
            })?;
            if a.dim() != b.dim() || a.has_time() != b.has_time() {
                return Err(Error::InvalidArgument(
                    "combine: operands must share dimension and time axis".into(),
                ));
            }
            let fa = a.inner.eval.clone();
            let fb = b.inner.eval.clone();
            let iso = a.isotropic() && b.isotropic();
            match op {
                CombineOp::Sum => Ok(Symbol::builder(a.dim())
                    .time(a.has_time())
                    .isotropic(iso)
                    .poly_bound(
                        a.poly_bound_degree().max(b.poly_bound_degree()),
                        a.poly_bound_coeff() + b.poly_bound_coeff(),
                    )
                    .zero_set(ZeroSet::Unknown)
                    .build(move |f| fa(f) + fb(f))),
                CombineOp::Product => {
                    let zero = match (a.zero_set(), b.zero_set()) {
                        (ZeroSet::Empty, z) | (z, ZeroSet::Empty) => z.clone(),
                        (za, zb) if za == zb => za.clone(),
                        _ => ZeroSet::Unknown,
                    };
                    let bound = match (a.inverse_bound(), b.inverse_bound()) {
                        (InverseBound::Certified(p), InverseBound::Certified(q)) => {
                            InverseBound::Certified(p.product(q))
                        }
                        (InverseBound::Refuted, _) | (_, InverseBound::Refuted) => {
                            InverseBound::Refuted
                        }
                        _ => InverseBound::Unknown,
                    };
                    Ok(Symbol::builder(a.dim())
                        .time(a.has_time())
                        .isotropic(iso)
                        .poly_bound(
                            a.poly_bound_degree() + b.poly_bound_degree(),
                            a.poly_bound_coeff() * b.poly_bound_coeff(),
                        )
                        .zero_set(zero)
                        .inverse_bound(bound)
                        .build(move |f| fa(f) * fb(f)))
                }
                _ => unreachable!(),
            }
        }
        CombineOp::ModulusSquared => {
            let fa = a.inner.eval.clone();
            let bound = match a.inverse_bound() {
                InverseBound::Certified(p) => InverseBound::Certified(p.product(p)),
                InverseBound::Refuted => InverseBound::Refuted,
                InverseBound::Unknown => InverseBound::Unknown,
            };
            let real_bound = bound.clone();
            Ok(Symbol::builder(a.dim())
                .time(a.has_time())
                .isotropic(a.isotropic())
                .poly_bound(2 * a.poly_bound_degree(), a.poly_bound_coeff().powi(2))
                .zero_set(a.zero_set().clone())
                .inverse_bound(bound)
                .inverse_bound_real(real_bound)
                .build(move |f| Complex64::new(fa(f).norm_sqr(), 0.0)))
        }
        CombineOp::RealPower(r) => {
            if r < 0.0 {
                match (a.zero_set(), a.inverse_bound()) {
                    (ZeroSet::Empty, InverseBound::Certified(_)) => {}
                    (z, _) if !z.is_empty() => {
                        return Err(Error::Domain(format!(
                            "negative power of a symbol with zero set {}",
                            z.label()
                        )));
                    }
                    _ => {
                        return Err(Error::Domain(
                            "negative power requires a certified strictly positive symbol".into(),
                        ))
                    }
                }
            }
            let fa = a.inner.eval.clone();
            let da = a.poly_bound_degree() as f64;
            let ca = a.poly_bound_coeff();
            let (deg, coeff, bound) = if r >= 0.0 {
                let deg = (r * da).ceil() as i32;
                let coeff = ca.powf(r).max(1.0);
                let bound = match a.inverse_bound() {
                    InverseBound::Certified(p) => {
                        let pf = p.clone();
                        let reps = r.ceil().max(1.0) as i32;
                        let degree = p.degree * reps as u32;
                        InverseBound::Certified(Witness::new(degree, move |f| {
                            (1.0 + pf.eval(f)).powi(reps)
                        }))
                    }
                    InverseBound::Refuted => InverseBound::Refuted,
                    InverseBound::Unknown => InverseBound::Unknown,
                };
                (deg, coeff, bound)
            } else {
                // |g^r| = |g|^{-|r|} ≥ (c (1+|ξ|²)^d)^{-|r|}: the poly bound of
                // the base yields the witness of the power
                let m = (r.abs() * da).ceil().max(0.0);
                let cw = ca.powf(r.abs()).max(1.0);
                let witness = Witness::new((2.0 * m) as u32, move |f: &FreqPoint| {
                    cw * (1.0 + f.norm_sq()).powf(m)
                });
                (0, 1.0, InverseBound::Certified(witness))
            };
            let res_bound_real = bound.clone();
            Ok(Symbol::builder(a.dim())
                .time(a.has_time())
                .isotropic(a.isotropic())
                .poly_bound(deg, coeff)
                .zero_set(if r >= 0.0 { a.zero_set().clone() } else { ZeroSet::Empty })
                .inverse_bound(bound)
                .inverse_bound_real(res_bound_real)
                .build(move |f| Complex64::new(fa(f).re.powf(r), 0.0)))
        }
    }
}

/// Deterministic sweep point: log-uniform radius over six decades, uniform
/// direction. Exercises both the origin neighbourhood and the far field.
pub fn sweep_point(dim: usize, has_time: bool, seed: u64, i: u64) -> FreqPoint {
    let total = dim + usize::from(has_time);
    let mut coords = Vec::with_capacity(total);
    let mut norm_sq = 0.0;
    for j in 0..total {
        let (a, _) = rng::normal_pair(seed, i, j as u64);
        coords.push(a);
        norm_sq += a * a;
    }
    let norm = norm_sq.sqrt().max(1e-12);
    let scale = 10f64.powf(-3.0 + 6.0 * rng::uniform(seed, i, total as u64 + 7)) / norm;
    for c in coords.iter_mut() {
        *c *= scale;
    }
    let temporal = if has_time { coords.pop() } else { None };
    FreqPoint { spatial: coords, temporal }
}

/// Result of a Hermitian symmetry sweep.
#[derive(Clone, Debug)]
pub struct HermitianReport {
    /// Largest absolute `|g(-ξ) - conj(g(ξ))|` seen.
    pub max_violation: f64,
    /// Largest violation relative to `1 + |g(ξ)|`.
    pub max_relative: f64,
    pub pass: bool,
}

/// Sample `n_samples` seeded points and measure the worst deviation from
/// `g(-ξ) = conj(g(ξ))`.
pub fn check_hermitian(symbol: &Symbol, n_samples: usize, seed: u64) -> Result<HermitianReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("check_hermitian needs n_samples >= 1".into()));
    }
    let mut max_violation: f64 = 0.0;
    let mut max_relative: f64 = 0.0;
    for i in 0..n_samples {
        let p = sweep_point(symbol.dim(), symbol.has_time(), seed, i as u64);
        let v = symbol.eval(&p)?;
        let m = symbol.eval(&p.negated())?;
        let viol = (m - v.conj()).norm();
        max_violation = max_violation.max(viol);
        max_relative = max_relative.max(viol / (1.0 + v.norm()));
    }
    Ok(HermitianReport {
        max_violation,
        max_relative,
        pass: max_relative <= 1e-12,
    })
}

/// `cos(βπ/2)` and `sin(βπ/2)` with exact values at integer `β`, so that
/// first- and second-order operators come out with no rounding residue.
pub fn beta_phase(beta: f64) -> (f64, f64) {
    if beta.fract() == 0.0 && beta.abs() < 1e15 {
        match (beta as i64).rem_euclid(4) {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        let t = beta * PI / 2.0;
        (t.cos(), t.sin())
    }
}

#[inline]
fn abs_pow(w: f64, beta: f64) -> f64 {
    if beta == 1.0 {
        w.abs()
    } else if beta == 2.0 {
        w * w
    } else {
        w.abs().powf(beta)
    }
}

/// The space-time symbol of `∂^β/∂t^β + L_g`:
/// `(ξ,ω) ↦ |ω|^β cos(βπ/2) + g_R(ξ) + i (sgn(ω) |ω|^β sin(βπ/2) + g_I(ξ))`,
/// with `sgn(0) = 0`.
pub fn evolution_symbol(beta: f64, g_spatial: &Symbol) -> Result<Symbol> {
    if beta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "temporal order must be positive, got {beta}"
        )));
    }
    if g_spatial.has_time() {
        return Err(Error::InvalidArgument(
            "the spatial symbol must not already carry a temporal axis".into(),
        ));
    }
    let (cb, sb) = beta_phase(beta);
    let g = g_spatial.clone();
    let dim = g_spatial.dim();
    let deg = g_spatial.poly_bound_degree().max((beta / 2.0).ceil() as i32);
    let coeff = g_spatial.poly_bound_coeff() + 1.0;

    let check = check_evolution_invertibility(beta, g_spatial)?;
    let (zero, bound) = if check.holds == Some(true) {
        let witness = match g_spatial.inverse_bound_real() {
            InverseBound::Certified(p) => {
                let pf = p.clone();
                InverseBound::Certified(Witness::new(p.degree, move |f: &FreqPoint| {
                    pf.eval(&f.spatial_part())
                }))
            }
            _ => InverseBound::Unknown,
        };
        (ZeroSet::Empty, witness)
    } else {
        (ZeroSet::Unknown, InverseBound::Unknown)
    };

    Ok(Symbol::builder(dim)
        .time(true)
        .isotropic(g_spatial.isotropic())
        .poly_bound(deg, coeff)
        .zero_set(zero)
        .inverse_bound(bound)
        .build(move |f| {
            let w = f.temporal.unwrap_or(0.0);
            let gv = g.eval_unchecked(&f.spatial_part());
            let m = abs_pow(w, beta);
            let sg = if w > 0.0 {
                1.0
            } else if w < 0.0 {
                -1.0
            } else {
                0.0
            };
            Complex64::new(m * cb + gv.re, sg * m * sb + gv.im)
        }))
}

/// Outcome of the invertibility test for an evolution operator.
#[derive(Clone, Debug)]
pub struct EvolutionBoundCheck {
    /// `Some(true)`/`Some(false)` when decidable, `None` when the real part
    /// of the spatial symbol carries no usable certificate.
    pub holds: Option<bool>,
    pub reason: String,
}

/// Decide whether `(iω)^β + g(ξ)` keeps an inverse-polynomial lower bound for
/// every imaginary part `g_I`: the real part `g_R` must be certified away
/// from zero and `g_R · cos(βπ/2) ≥ 0` (the sign check is vacuous at odd
/// integer `β` where the cosine vanishes).
pub fn check_evolution_invertibility(
    beta: f64,
    g_spatial: &Symbol,
) -> Result<EvolutionBoundCheck> {
    if g_spatial.has_time() {
        return Err(Error::InvalidArgument(
            "the spatial symbol must not carry a temporal axis".into(),
        ));
    }
    match g_spatial.inverse_bound_real() {
        InverseBound::Refuted => {
            return Ok(EvolutionBoundCheck {
                holds: Some(false),
                reason: "the real part of the spatial symbol is not bounded below".into(),
            })
        }
        InverseBound::Unknown => {
            return Ok(EvolutionBoundCheck {
                holds: None,
                reason: "no certificate for the real part of the spatial symbol".into(),
            })
        }
        InverseBound::Certified(_) => {}
    }
    let (cb, _) = beta_phase(beta);
    if cb == 0.0 {
        return Ok(EvolutionBoundCheck {
            holds: Some(true),
            reason: "odd-integer temporal order: the cosine term vanishes".into(),
        });
    }
    for i in 0..512u64 {
        let p = sweep_point(g_spatial.dim(), false, 0x5eed_0f17, i);
        let gr = g_spatial.eval(&p)?.re;
        if gr * cb < -1e-12 * (1.0 + gr.abs()) {
            return Ok(EvolutionBoundCheck {
                holds: Some(false),
                reason: format!(
                    "sign condition fails: Re g = {gr:.6e} against cos(beta*pi/2) = {cb:.6e}"
                ),
            });
        }
    }
    Ok(EvolutionBoundCheck { holds: Some(true), reason: "real part certified and sign-aligned".into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matern_like(d: usize, kappa: f64, alpha: f64) -> Symbol {
        let k2 = kappa * kappa;
        Symbol::builder(d)
            .isotropic(true)
            .poly_bound((alpha / 2.0).ceil().max(0.0) as i32, (1.0 + k2).powf(alpha.abs() / 2.0))
            .zero_set(ZeroSet::Empty)
            .inverse_bound(InverseBound::Certified(Witness::constant(kappa.powf(-alpha))))
            .inverse_bound_real(InverseBound::Certified(Witness::constant(kappa.powf(-alpha))))
            .build(move |f: &FreqPoint| {
                let r2 = f.spatial.iter().map(|x| x * x).sum::<f64>();
                Complex64::new((k2 + r2).powf(alpha / 2.0), 0.0)
            })
    }

    #[test]
    fn matern_symbol_at_origin_is_kappa_power() {
        // (kappa² + 0)^{alpha/2} with kappa = 1, alpha = 2 is exactly 1
        let g = matern_like(2, 1.0, 2.0);
        let v = g.eval(&FreqPoint::spatial([0.0, 0.0])).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn fractional_time_symbol_at_unit_frequency() {
        // (iω)^β at ω = 1, β = 1 is exactly i
        let zero = Symbol::constant(0, Complex64::new(0.0, 0.0));
        let s = evolution_symbol(1.0, &zero).unwrap();
        let v = s.eval(&FreqPoint::space_time(Vec::<f64>::new(), 1.0)).unwrap();
        assert_eq!(v, Complex64::new(0.0, 1.0));
        // β = 1/2 at ω = 1: cos(π/4) + i sin(π/4)
        let s = evolution_symbol(0.5, &zero).unwrap();
        let v = s.eval(&FreqPoint::space_time(Vec::<f64>::new(), 1.0)).unwrap();
        let c = std::f64::consts::FRAC_PI_4;
        assert!((v.re - c.cos()).abs() < 1e-15 && (v.im - c.sin()).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        let g = matern_like(2, 1.0, 2.0);
        assert!(g.eval(&FreqPoint::spatial([1.0])).is_err());
        assert!(g.eval(&FreqPoint::space_time([1.0, 2.0], 0.5)).is_err());
    }

    #[test]
    fn hermitian_conjugate_pairs() {
        let g = matern_like(3, 0.7, 1.3);
        for i in 0..200 {
            let p = sweep_point(3, false, 9, i);
            let v = g.eval(&p).unwrap();
            let m = g.eval(&p.negated()).unwrap();
            assert!((m - v.conj()).norm() <= 1e-12 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn combine_modulus_squared_example() {
        // |(1 + 1)|² = 4 for the Matérn symbol with kappa = 1, alpha = 2 at |ξ| = 1
        let g = matern_like(2, 1.0, 2.0);
        let m2 = combine(CombineOp::ModulusSquared, &g, None).unwrap();
        let p = FreqPoint::spatial([1.0, 0.0]);
        let v = m2.eval(&p).unwrap();
        assert!((v.re - 4.0).abs() < 1e-14 && v.im == 0.0);
        // and it matches |eval|² everywhere sampled, to 1 ulp scale
        for i in 0..500 {
            let q = sweep_point(2, false, 4, i);
            let direct = g.eval(&q).unwrap().norm_sqr();
            let via = m2.eval(&q).unwrap().re;
            assert!((direct - via).abs() <= 1e-14 * direct.abs().max(1e-300));
        }
    }

    #[test]
    fn combine_sum_with_zero_is_identity_pointwise() {
        let g = matern_like(2, 1.0, 2.0);
        let z = Symbol::constant(2, Complex64::new(0.0, 0.0));
        let s = combine(CombineOp::Sum, &g, Some(&z)).unwrap();
        for i in 0..200 {
            let q = sweep_point(2, false, 11, i);
            assert_eq!(s.eval(&q).unwrap(), g.eval(&q).unwrap());
        }
    }

    #[test]
    fn product_of_certified_symbols_keeps_certificate() {
        let a = matern_like(2, 1.0, 2.0);
        let b = matern_like(2, 2.0, 1.0);
        let p = combine(CombineOp::Product, &a, Some(&b)).unwrap();
        let w = match p.inverse_bound() {
            InverseBound::Certified(w) => w.clone(),
            other => panic!("expected certified, got {other:?}"),
        };
        // the product witness must satisfy |g1 g2| · (p1 p2) ≥ 1 on a sweep
        for i in 0..1000 {
            let q = sweep_point(2, false, 21, i);
            let m = p.eval(&q).unwrap().norm();
            assert!(m * w.eval(&q) >= 1.0 - 1e-9, "at {q:?}");
        }
    }

    #[test]
    fn negative_power_needs_positivity() {
        let zero_at_origin = Symbol::builder(2)
            .isotropic(true)
            .poly_bound(1, 1.0)
            .zero_set(ZeroSet::Origin)
            .inverse_bound(InverseBound::Refuted)
            .build(|f: &FreqPoint| Complex64::new(f.radius(), 0.0));
        let err = combine(CombineOp::RealPower(-1.0), &zero_at_origin, None).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));

        let g = matern_like(2, 1.0, 2.0);
        let inv = combine(CombineOp::RealPower(-1.0), &g, None).unwrap();
        let v = inv.eval(&FreqPoint::spatial([1.0, 0.0])).unwrap();
        assert!((v.re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hermitian_check_flags_constant_i() {
        // conj(i) = -i, so the violation is |i - (-i)| = 2 at every point
        let g = Symbol::constant(1, Complex64::new(0.0, 1.0));
        let rep = check_hermitian(&g, 64, 5).unwrap();
        assert!(!rep.pass);
        assert!((rep.max_violation - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hermitian_check_accepts_odd_imaginary_part() {
        // g(ξ) = i ξ₁ + 1 is Hermitian: g(-ξ) = 1 - i ξ₁ = conj(g(ξ))
        let g = Symbol::builder(1)
            .poly_bound(1, 2.0)
            .build(|f: &FreqPoint| Complex64::new(1.0, f.spatial[0]));
        let rep = check_hermitian(&g, 256, 17).unwrap();
        assert!(rep.pass, "violation {}", rep.max_violation);
        assert_eq!(rep.max_violation, 0.0);
    }

    #[test]
    fn advection_symbol_is_hermitian() {
        // kappa² + ξᵀΣξ + i vᵀξ with Σ = diag(1, 2), v = (1, -1)
        let g = Symbol::builder(2).poly_bound(1, 5.0).build(|f: &FreqPoint| {
            let (x, y) = (f.spatial[0], f.spatial[1]);
            Complex64::new(1.0 + x * x + 2.0 * y * y, x - y)
        });
        let rep = check_hermitian(&g, 512, 3).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn evolution_symbol_matches_first_and_second_order_forms() {
        // β = 1, g = a|ξ|²: iω + a|ξ|²
        let a = 0.7;
        let g = Symbol::builder(2)
            .isotropic(true)
            .poly_bound(1, a)
            .zero_set(ZeroSet::Origin)
            .inverse_bound(InverseBound::Refuted)
            .inverse_bound_real(InverseBound::Refuted)
            .build(move |f: &FreqPoint| {
                Complex64::new(a * f.spatial.iter().map(|x| x * x).sum::<f64>(), 0.0)
            });
        let s = evolution_symbol(1.0, &g).unwrap();
        let v = s.eval(&FreqPoint::space_time([1.0, 2.0], 3.0)).unwrap();
        assert_eq!(v, Complex64::new(a * 5.0, 3.0));

        // β = 2, g = c²|ξ|² (the caller picks the sign): -ω² + c²|ξ|²
        let c2 = 2.25;
        let gw = Symbol::builder(2)
            .isotropic(true)
            .poly_bound(1, c2)
            .build(move |f: &FreqPoint| {
                Complex64::new(c2 * f.spatial.iter().map(|x| x * x).sum::<f64>(), 0.0)
            });
        let s = evolution_symbol(2.0, &gw).unwrap();
        let v = s.eval(&FreqPoint::space_time([1.0, 0.0], 2.0)).unwrap();
        assert_eq!(v, Complex64::new(-4.0 + c2, 0.0));
    }

    #[test]
    fn evolution_symmetry_in_omega() {
        let g = matern_like(2, 1.0, 2.0);
        // even integer order: values themselves are even in ω
        let s2 = evolution_symbol(2.0, &g).unwrap();
        // real spatial symbol at fractional order: the modulus is even in ω
        let s15 = evolution_symbol(1.5, &g).unwrap();
        for i in 0..300 {
            let p = sweep_point(2, true, 31, i);
            let q = FreqPoint::space_time(p.spatial.clone(), -p.temporal.unwrap());
            assert_eq!(s2.eval(&p).unwrap(), s2.eval(&q).unwrap());
            let a = s15.eval(&p).unwrap().norm();
            let b = s15.eval(&q).unwrap().norm();
            assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        }
    }

    #[test]
    fn evolution_invertibility_prop_conditions() {
        // β = 1: cosine vanishes, certificate on Re g is enough
        let g = matern_like(2, 1.0, 2.0);
        let c = check_evolution_invertibility(1.0, &g).unwrap();
        assert_eq!(c.holds, Some(true));

        // β = 2 with positive Matérn real part: sign condition fails
        let c = check_evolution_invertibility(2.0, &g).unwrap();
        assert_eq!(c.holds, Some(false));

        // β = 2 with the negated symbol: holds
        let minus_one = Symbol::constant(2, Complex64::new(-1.0, 0.0));
        let neg = combine(CombineOp::Product, &minus_one, Some(&g)).unwrap();
        // the product loses the real-part certificate; supply it directly
        let neg = Symbol::builder(2)
            .isotropic(true)
            .poly_bound(neg.poly_bound_degree(), neg.poly_bound_coeff())
            .zero_set(ZeroSet::Empty)
            .inverse_bound_real(InverseBound::Certified(Witness::constant(1.0)))
            .build({
                let inner = neg.clone();
                move |f: &FreqPoint| inner.eval_unchecked(f)
            });
        let c = check_evolution_invertibility(2.0, &neg).unwrap();
        assert_eq!(c.holds, Some(true));

        // β = 2, g_R = -a|ξ|²: refuted real part (zero at the origin)
        let soft = Symbol::builder(2)
            .isotropic(true)
            .poly_bound(1, 1.0)
            .zero_set(ZeroSet::Origin)
            .inverse_bound_real(InverseBound::Refuted)
            .build(|f: &FreqPoint| Complex64::new(-f.radius().powi(2), 0.0));
        let c = check_evolution_invertibility(2.0, &soft).unwrap();
        assert_eq!(c.holds, Some(false));
    }

    #[test]
    fn evolution_modulus_dominates_real_part_when_invertible() {
        // |(iω)^β + g| ≥ |g_R| on a sweep whenever the invertibility check holds
        for &beta in &[1.0, 1.5, 2.0, 3.0] {
            let base = matern_like(2, 1.0, 2.0);
            let (cb, _) = beta_phase(beta);
            let sign = if cb < 0.0 { -1.0 } else { 1.0 };
            let g = Symbol::builder(2)
                .isotropic(true)
                .poly_bound(base.poly_bound_degree(), base.poly_bound_coeff())
                .zero_set(ZeroSet::Empty)
                .inverse_bound_real(InverseBound::Certified(Witness::constant(1.0)))
                .build({
                    let b = base.clone();
                    move |f: &FreqPoint| b.eval_unchecked(f) * sign
                });
            let check = check_evolution_invertibility(beta, &g).unwrap();
            assert_eq!(check.holds, Some(true), "beta={beta}");
            let s = evolution_symbol(beta, &g).unwrap();
            for i in 0..500 {
                let p = sweep_point(2, true, 77, i);
                let m = s.eval(&p).unwrap().norm();
                let gr = g.eval(&p.spatial_part()).unwrap().re.abs();
                assert!(m >= gr * (1.0 - 1e-12), "beta={beta} at {p:?}");
            }
        }
    }
}
