//! Cross-module invariants: positive-definiteness, covariance symmetries,
//! trace reductions against direct temporal quadrature, and spectral
//! fidelity of the sampler.

use std::f64::consts::PI;

use num_complex::Complex64;

use sgrf::analysis::{check_existence, soem_trace, trace_analysis, CheckConfig, Verdict};
use sgrf::covariance::{
    cone_covariance, covariance_grid, covariance_value, evolution_mixture_covariance,
    matern_covariance, radial_fourier, GridSampling, LagPoint,
};
use sgrf::model::{
    build_model, params_from_pairs, real_params, solution_spectral_density, ParamValue,
};
use sgrf::simulate::{mean_periodogram, simulate, GridAxis, GridSpec};
use sgrf::symbol::{FreqPoint, InverseBound, Symbol, Witness, ZeroSet};
use sgrf::{quad, SpectralDensity};

/// Jacobi eigenvalue sweep for small symmetric matrices.
fn min_eigenvalue(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    for _ in 0..100 {
        let mut off = 0.0;
        let (mut p, mut q) = (0, 1);
        for i in 0..n {
            for j in i + 1..n {
                if m[i][j].abs() > off {
                    off = m[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if off < 1e-14 {
            break;
        }
        let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        for k in 0..n {
            let (mkp, mkq) = (m[k][p], m[k][q]);
            m[k][p] = c * mkp - s * mkq;
            m[k][q] = s * mkp + c * mkq;
        }
        for k in 0..n {
            let (mpk, mqk) = (m[p][k], m[q][k]);
            m[p][k] = c * mpk - s * mqk;
            m[q][k] = s * mpk + c * mqk;
        }
    }
    (0..n).map(|i| m[i][i]).fold(f64::INFINITY, f64::min)
}

#[test]
fn covariance_matrix_is_positive_semidefinite_on_random_points() {
    // 25 seeded points in the plane; the Matérn covariance matrix must be
    // PSD up to -1e-8 on the smallest eigenvalue
    let m = build_model("matern", 2, real_params(&[("kappa", 1.0), ("alpha", 2.0)])).unwrap();
    let mut pts = Vec::new();
    for i in 0..25u64 {
        let (a, b) = sgrf::rng::normal_pair(99, 1, i);
        pts.push([3.0 * a, 3.0 * b]);
    }
    let mut cov = vec![vec![0.0; 25]; 25];
    for i in 0..25 {
        for j in 0..25 {
            let h = [pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]];
            cov[i][j] = covariance_value(&m, &LagPoint::spatial(h)).unwrap();
        }
    }
    let scale = cov[0][0];
    let min = min_eigenvalue(cov);
    assert!(min >= -1e-8 * scale, "min eigenvalue {min}");
}

#[test]
fn zero_lag_dominates_for_finite_measure_models() {
    // |ρ(h,u)| ≤ ρ(0,0) wherever both are valid
    let spatial = build_model("matern", 2, real_params(&[("kappa", 1.0), ("alpha", 2.0)])).unwrap();
    let grid = covariance_grid(&spatial, &[(17, 0.4), (17, 0.4)], GridSampling::PointValues).unwrap();
    let zero = grid.zero_indices().unwrap();
    let z = sgrf::fftutil::ravel(&zero, &grid.shape());
    for (v, ok) in grid.values.iter().zip(&grid.valid) {
        if *ok {
            assert!(v.abs() <= grid.values[z] * (1.0 + 1e-12));
        }
    }
    let waving = build_model(
        "waving_matern",
        2,
        real_params(&[("c", 1.0), ("a", 1.0), ("kappa", 1.0), ("alpha", 2.0)]),
    )
    .unwrap();
    let grid = covariance_grid(&waving, &[(9, 0.5), (9, 0.5), (9, 0.4)], GridSampling::PointValues)
        .unwrap();
    let zero = grid.zero_indices().unwrap();
    let z = sgrf::fftutil::ravel(&zero, &grid.shape());
    for v in &grid.values {
        assert!(v.abs() <= grid.values[z] * (1.0 + 1e-9));
    }
}

#[test]
fn time_symmetry_holds_exactly_when_the_criterion_says_so() {
    // evolving Matérn with real spatial symbol: ρ(h,-u) = ρ(h,u)
    let evm = build_model(
        "evolving_matern",
        2,
        real_params(&[("beta", 1.0), ("a", 1.0), ("kappa", 1.0), ("alpha", 2.0)]),
    )
    .unwrap();
    let g = evm.spatial_symbol.as_ref().unwrap();
    let src = SpectralDensity::white(2, false);
    for (h, u) in [(0.5, 0.3), (1.0, 0.8)] {
        let plus =
            evolution_mixture_covariance(1.0, g, &LagPoint::space_time([h, 0.0], u), &src).unwrap();
        let minus =
            evolution_mixture_covariance(1.0, g, &LagPoint::space_time([h, 0.0], -u), &src).unwrap();
        assert_eq!(plus, minus);
    }
    // advection with drift: reflecting time changes the covariance
    let adv = build_model(
        "advection_diffusion",
        2,
        params_from_pairs(&[
            ("kappa", ParamValue::Real(1.0)),
            ("v", ParamValue::Vector(vec![1.0, 0.0])),
            ("sigma", ParamValue::Matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]])),
        ]),
    )
    .unwrap();
    let ga = adv.spatial_symbol.as_ref().unwrap();
    let plus =
        evolution_mixture_covariance(1.0, ga, &LagPoint::space_time([0.6, 0.0], 0.5), &src).unwrap();
    let minus =
        evolution_mixture_covariance(1.0, ga, &LagPoint::space_time([0.6, 0.0], -0.5), &src)
            .unwrap();
    assert!(
        (plus - minus).abs() > 1e-4 * plus.abs(),
        "drift must break time symmetry: {plus} vs {minus}"
    );
}

#[test]
fn soem_trace_matches_temporal_quadrature_with_imaginary_part() {
    // β = 2 with g_I ≠ 0: trace density equals the direct ω-integral of the
    // space-time density (2π)^{-1/2} ∫ dω / ((ω² - g_R)² + g_I²) · (2π)^{-(d+1)/2}
    let d = 2usize;
    let g = Symbol::builder(d)
        .poly_bound(1, 4.0)
        .zero_set(ZeroSet::Empty)
        .inverse_bound(InverseBound::Certified(Witness::constant(1.0)))
        .inverse_bound_real(InverseBound::Certified(Witness::constant(1.0)))
        .build(|f: &FreqPoint| {
            let r2: f64 = f.spatial.iter().map(|x| x * x).sum();
            Complex64::new(-(1.0 + r2), 0.5 * f.spatial[0])
        });
    let src = SpectralDensity::white(d, false);
    let report = soem_trace(&g, &src).unwrap();
    for i in 0..40u64 {
        let p = sgrf::symbol::sweep_point(d, false, 314, i);
        let v = g.eval(&p).unwrap();
        let norm = (2.0 * PI).powf(-0.5) * (2.0 * PI).powf(-(d as f64 + 1.0) / 2.0);
        let dens = |w: f64| 1.0 / ((w * w - v.re).powi(2) + v.im * v.im);
        let head = quad::adaptive(&dens, 0.0, 1.0, 1e-12).unwrap();
        let direct = norm * 2.0 * (head + quad::halfline_decaying(&dens, 1.0, 1e-12).unwrap());
        let got = report.trace_density.eval(&p).unwrap();
        assert!(
            (got - direct).abs() <= 1e-8 * direct,
            "at {p:?}: {got} vs {direct}"
        );
    }
}

#[test]
fn soem_zero_lag_covariance_equals_transform_of_trace_density() {
    // two computed paths: the γ-kernel mixture at u = 0 and the radial
    // transform of the spatial-trace density
    let m = build_model(
        "evolving_matern",
        3,
        real_params(&[("beta", 2.0), ("a", 0.8), ("kappa", 1.0), ("alpha", 2.0)]),
    )
    .unwrap();
    let g = m.spatial_symbol.as_ref().unwrap();
    let src = SpectralDensity::white(3, false);
    let report = soem_trace(g, &src).unwrap();
    for &h in &[0.5f64, 1.2] {
        let mixture =
            evolution_mixture_covariance(2.0, g, &LagPoint::space_time([h, 0.0, 0.0], 0.0), &src)
                .unwrap();
        let f = |r: f64| report.trace_density.eval_radial(r);
        let transform = radial_fourier(&f, 3, h, None, None, false, 1e-9).unwrap();
        assert!(
            (mixture - transform).abs() <= 1e-6 * transform.abs(),
            "h={h}: {mixture} vs {transform}"
        );
    }
}

#[test]
fn cone_margin_reproduces_the_spatial_base_covariance() {
    // cos(0) = 1: the u = 0 cone covariance is the base Matérn covariance
    let m = build_model(
        "waving_matern",
        2,
        real_params(&[("c", 2.0), ("a", 1.3), ("kappa", 0.8), ("alpha", 2.0)]),
    )
    .unwrap();
    let density = solution_spectral_density(&m, true).unwrap();
    let cone = density.cone().unwrap();
    for &h in &[0.0f64, 0.5, 2.0] {
        let got = cone_covariance(cone, h, 0.0, 1e-9).unwrap();
        let expect = 1.3 * matern_covariance(2, 0.8, 2.0, h).unwrap();
        assert!((got - expect).abs() <= 1e-7 * expect, "h={h}");
    }
}

#[test]
fn markov_models_follow_the_polynomial_degree() {
    let cfg = CheckConfig::default();
    // p(t) = 1 + t²: density ~ r^{-8} in d = 2, finite
    let quartic = build_model(
        "markov",
        2,
        params_from_pairs(&[("coeffs", ParamValue::Vector(vec![1.0, 0.0, 1.0]))]),
    )
    .unwrap();
    let r = check_existence(&quartic, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Yes);
    assert_eq!(r.unique, Some(true));
    assert!(r.finite);
    // p(t) = 1 + t: density ~ r^{-2} in d = 2, log-divergent total mass
    let linear = build_model(
        "markov",
        2,
        params_from_pairs(&[("coeffs", ParamValue::Vector(vec![1.0, 1.0]))]),
    )
    .unwrap();
    let r = check_existence(&linear, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Yes, "{:?}", r.diagnostics);
    assert!(!r.finite, "log-divergent spectral mass must not be classified finite");
    assert_eq!(r.n, Some(1));
}

#[test]
fn trace_analysis_beta_one_accepts_imaginary_parts() {
    // the β = 1 margin does not see g_I: advection and its driftless twin
    // have identical trace densities
    let adv = build_model(
        "advection_diffusion",
        2,
        params_from_pairs(&[
            ("kappa", ParamValue::Real(1.0)),
            ("v", ParamValue::Vector(vec![2.0, -1.0])),
            ("sigma", ParamValue::Matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]])),
        ]),
    )
    .unwrap();
    let still = build_model(
        "advection_diffusion",
        2,
        params_from_pairs(&[
            ("kappa", ParamValue::Real(1.0)),
            ("v", ParamValue::Vector(vec![0.0, 0.0])),
            ("sigma", ParamValue::Matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]])),
        ]),
    )
    .unwrap();
    let src = SpectralDensity::white(2, false);
    let ta = trace_analysis(1.0, adv.spatial_symbol.as_ref().unwrap(), &src).unwrap();
    let ts = trace_analysis(1.0, still.spatial_symbol.as_ref().unwrap(), &src).unwrap();
    for i in 0..100u64 {
        let p = sgrf::symbol::sweep_point(2, false, 7, i);
        let a = ta.trace_density.eval(&p).unwrap();
        let b = ts.trace_density.eval(&p).unwrap();
        assert!((a - b).abs() <= 1e-13 * a.abs());
    }
    // fractional orders reject imaginary parts
    assert!(trace_analysis(1.5, adv.spatial_symbol.as_ref().unwrap(), &src).is_err());
}

#[test]
fn sampler_periodogram_tracks_the_target_density() {
    // RMS relative deviation of the mean periodogram over interior cells
    // stays under 10% with 200 realizations
    let m = build_model("matern", 2, real_params(&[("kappa", 1.0), ("alpha", 2.0)])).unwrap();
    let density = solution_spectral_density(&m, false).unwrap();
    let grid = GridSpec::new(
        vec![GridAxis { n: 64, delta: 0.25 }, GridAxis { n: 64, delta: 0.25 }],
        false,
    )
    .unwrap();
    let fields = simulate(&density, &grid, 31337, 200).unwrap();
    let pg = mean_periodogram(&fields).unwrap();
    // target density per cell and the 10th-percentile threshold
    let shape = grid.shape();
    let mut target = vec![0.0f64; pg.len()];
    let mut idx = vec![0usize; 2];
    for lin in 0..pg.len() {
        sgrf::fftutil::unravel(lin, &shape, &mut idx);
        let p = FreqPoint::spatial([grid.freq(0, idx[0]), grid.freq(1, idx[1])]);
        target[lin] = density.eval(&p).unwrap();
    }
    let mut sorted = target.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let threshold = sorted[sorted.len() / 10];
    let mut sum_sq = 0.0;
    let mut n = 0usize;
    for (p, t) in pg.iter().zip(&target) {
        if *t > threshold {
            let rel = (p - t) / t;
            sum_sq += rel * rel;
            n += 1;
        }
    }
    let rms = (sum_sq / n as f64).sqrt();
    assert!(rms <= 0.10, "periodogram RMS relative deviation {rms}");
}
