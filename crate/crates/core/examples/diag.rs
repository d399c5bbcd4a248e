use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use sgrf::covariance::spacetime_covariance_numeric;
use sgrf::model::{build_model, real_params, solution_spectral_density};
use sgrf::{RadialSymmetry, SpectralDensity};

static EVALS: AtomicU64 = AtomicU64::new(0);

fn main() {
    let m = build_model("heat", 3, real_params(&[("a", 1.0)])).unwrap();
    let density = solution_spectral_density(&m, true).unwrap();
    let counted = SpectralDensity::builder(3, true)
        .symmetry(RadialSymmetry::SpatialRadial)
        .singular(density.singular().clone())
        .build(move |p| {
            EVALS.fetch_add(1, Ordering::Relaxed);
            density.eval_unchecked(p)
        });
    for (h, u) in [(0.2, 0.0), (0.2, 2.0), (5.0, 0.0), (5.0, 2.0), (0.85, 1.1)] {
        EVALS.store(0, Ordering::Relaxed);
        let t0 = Instant::now();
        let v = spacetime_covariance_numeric(&counted, 3, h, u, 1e-6).unwrap();
        println!(
            "(h={h}, u={u}): value {v:.6e}, {} evals, {:?}",
            EVALS.load(Ordering::Relaxed),
            t0.elapsed()
        );
    }
}
