//! Numerical quadrature engines.
//!
//! Three integrators cover the crate's needs: an adaptive Gauss-Kronrod rule
//! for smooth finite intervals, a tanh-sinh (double exponential) rule for
//! integrable endpoint singularities, and a panel-plus-extrapolation scheme
//! for oscillatory half-line integrals where the tail converges only
//! conditionally.

use crate::error::{Error, Result};

// QUADPACK 7-15 Gauss-Kronrod constants, positive half.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Fixed 4×GK15 composite rule for one oscillation panel; accurate to near
/// machine precision on a half-period of smooth oscillation.
pub fn panel_integral<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let step = (b - a) / 4.0;
    let mut total = 0.0;
    for i in 0..4 {
        let lo = a + i as f64 * step;
        total += gk15(f, lo, lo + step).0;
    }
    total
}

/// One Gauss-Kronrod 7-15 application on `[a, b]`: `(kronrod, |g7 - k15|)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let u = 0.5 * (b - a);
    let mut k = WGK[7] * f(c);
    let mut g = WG[3] * f(c);
    for i in 0..7 {
        let x = u * XGK[i];
        let pair = f(c - x) + f(c + x);
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    (k * u, ((k - g) * u).abs())
}

/// Adaptive Gauss-Kronrod on a finite interval.
///
/// Splits the worst interval until the summed error estimate drops below
/// `tol * max(|I|, tiny)` or the interval budget is exhausted.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("adaptive: endpoints must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (v, e) = gk15(f, a, b);
    segs.push((a, b, v, e));
    for _ in 0..2000 {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if err <= tol * total.abs().max(1e-300) || err <= tol * tol {
            return Ok(total);
        }
        // split the interval with the largest error estimate
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (sa, sb, _, _) = segs.swap_remove(idx);
        let mid = 0.5 * (sa + sb);
        if mid <= sa || mid >= sb {
            return Ok(segs.iter().map(|s| s.2).sum::<f64>() + v);
        }
        let left = gk15(f, sa, mid);
        let right = gk15(f, mid, sb);
        segs.push((sa, mid, left.0, left.1));
        segs.push((mid, sb, right.0, right.1));
    }
    Err(Error::Divergence(format!(
        "adaptive quadrature failed to converge on [{a}, {b}]"
    )))
}

/// Tanh-sinh quadrature on `[a, b]`, robust to integrable endpoint
/// singularities.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let u = 0.5 * (b - a);
    if u == 0.0 {
        return Ok(0.0);
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let eval = |t: f64| -> f64 {
        let y = half_pi * t.sinh();
        // s in (0,1): relative position in [a,b], computed stably at both ends
        let s = if y >= 0.0 {
            1.0 / (1.0 + (-2.0 * y).exp())
        } else {
            let e = (2.0 * y).exp();
            e / (1.0 + e)
        };
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let x = a + (b - a) * s;
        if x <= a.min(b) || x >= a.max(b) {
            return 0.0;
        }
        let w = half_pi * t.cosh() / (y.cosh() * y.cosh());
        let fx = f(x);
        if fx.is_finite() {
            w * fx
        } else {
            0.0
        }
    };
    let t_max = 6.1;
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1.0;
    while k * h <= t_max {
        sum += eval(k * h) + eval(-k * h);
        k += 1.0;
    }
    let mut prev = sum * h * u;
    for _level in 0..10 {
        // refine by adding the midpoints (odd multiples of h/2)
        let h2 = h * 0.5;
        let mut k = 1.0;
        while k * h2 <= t_max {
            sum += eval(k * h2) + eval(-k * h2);
            k += 2.0;
        }
        h = h2;
        let value = sum * h * u;
        if (value - prev).abs() <= tol * value.abs().max(1e-300) {
            return Ok(value);
        }
        prev = value;
    }
    Ok(prev)
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
///
/// Returns the extrapolated limit and a crude error estimate from the last
/// two even columns.
pub fn wynn_epsilon(sums: &[f64]) -> (f64, f64) {
    let n = sums.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    if n == 1 {
        return (sums[0], f64::INFINITY);
    }
    let mut cur: Vec<f64> = sums.to_vec();
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut best = *sums.last().unwrap();
    let mut prev_best = best;
    let mut col = 0usize;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d.abs() < 1e-300 {
                next.push(prev[i + 1]);
            } else {
                next.push(prev[i + 1] + 1.0 / d);
            }
        }
        prev = cur;
        cur = next;
        col += 1;
        if col % 2 == 0 && !cur.is_empty() {
            prev_best = best;
            best = *cur.last().unwrap();
        }
    }
    (best, (best - prev_best).abs())
}

/// Oscillatory half-line integral `∫_0^∞ f(w) cos(u w) dw` (or the plain
/// tail integral when `u == 0`) for an `f` that decays at infinity, possibly
/// only like a power, so the integral may converge only conditionally.
///
/// The line is cut into panels of half an oscillation period; the partial
/// sums of the panel series are extrapolated with the epsilon algorithm. For
/// the non-oscillatory case panels are dyadic and summed directly with a
/// geometric tail estimate.
pub fn fourier_cos_halfline<F: Fn(f64) -> f64>(f: &F, u: f64, tol: f64) -> Result<f64> {
    let u = u.abs();
    if u == 0.0 {
        let head = adaptive(&|w| f(w), 0.0, 1.0, tol)?;
        return Ok(head + halfline_decaying(&|w| f(w), 1.0, tol)?);
    }
    let g = |w: f64| f(w) * (u * w).cos();
    halfline_hybrid(&g, u, false, tol)
}

/// `∫_a^∞ f` for an eventually monotone decaying, non-oscillatory `f`.
///
/// Dyadic panels turn power-law decay into geometric decay, so the running
/// total plus a geometric tail extrapolation converges even for slow tails.
/// Long plateaus before an eventual crossover (division by a large constant)
/// are tolerated: divergence is only declared when the budget of dyadic
/// doublings runs out without the tail estimate settling.
pub fn halfline_decaying<F: Fn(f64) -> f64>(f: &F, a: f64, tol: f64) -> Result<f64> {
    let mut total = adaptive(f, a, a + 1.0, tol * 0.1)?;
    let mut lo = a + 1.0;
    let mut last = f64::INFINITY;
    let mut prev_est = f64::INFINITY;
    let mut stable = 0usize;
    for _ in 0..160 {
        let hi = a + 2.0 * (lo - a);
        let piece = adaptive(f, lo, hi, tol * 0.1)?;
        total += piece;
        if !total.is_finite() || total.abs() > 1e280 {
            return Err(Error::Divergence("half-line integral grows at the far end".into()));
        }
        let ratio = if last.is_finite() && last.abs() > 0.0 {
            (piece / last).abs()
        } else {
            f64::NAN
        };
        if ratio.is_finite() && ratio < 0.95 {
            let est = total + piece * ratio / (1.0 - ratio);
            if (est - prev_est).abs() <= tol * est.abs().max(1e-300) {
                stable += 1;
                if stable >= 2 {
                    return Ok(est);
                }
            } else {
                stable = 0;
            }
            prev_est = est;
        } else {
            stable = 0;
        }
        if piece.abs() <= tol * tol {
            return Ok(total);
        }
        last = piece;
        lo = hi;
    }
    Err(Error::Divergence(
        "half-line integral did not settle; the integrand decays too slowly".into(),
    ))
}

/// Half-line integral of a possibly oscillatory integrand with linear phase
/// frequency `freq`: a dyadic decaying region first, then half-period panels
/// with epsilon extrapolation of the partial sums. `singular_head` switches
/// the first panel to tanh-sinh for integrable endpoint singularities.
pub fn halfline_hybrid<F: Fn(f64) -> f64>(
    f: &F,
    freq: f64,
    singular_head: bool,
    tol: f64,
) -> Result<f64> {
    if freq <= 0.0 {
        let head = if singular_head {
            tanh_sinh(f, 0.0, 1.0, tol)?
        } else {
            adaptive(f, 0.0, 1.0, tol)?
        };
        return Ok(head + halfline_decaying(f, 1.0, tol)?);
    }
    let panel = std::f64::consts::PI / freq;
    let r_switch = (panel / 4.0).max(1e-6);
    let head_end = r_switch.min(1.0);
    let mut total = if singular_head {
        tanh_sinh(f, 0.0, head_end, tol)?
    } else {
        adaptive(f, 0.0, head_end, tol)?
    };
    if !total.is_finite() {
        return Err(Error::Divergence("integral diverges at the origin".into()));
    }
    // decaying dyadic region; bail out early if the integrand has already
    // died long before oscillations matter
    let mut lo = head_end;
    let mut negligible = 0usize;
    while lo < r_switch {
        let hi = (2.0 * lo).min(r_switch);
        let piece = adaptive(f, lo, hi, tol)?;
        total += piece;
        lo = hi;
        if piece.abs() <= 1e-3 * tol * total.abs().max(1e-300) {
            negligible += 1;
            if negligible >= 3 {
                return Ok(total);
            }
        } else {
            negligible = 0;
        }
    }
    // oscillatory panels with stabilized epsilon extrapolation
    let mut sums = Vec::with_capacity(64);
    let mut window = Vec::with_capacity(40);
    let mut prev_mag = f64::INFINITY;
    let mut grow = 0usize;
    let mut best = f64::NAN;
    let mut stable = 0usize;
    for k in 0..6000usize {
        let a = lo + k as f64 * panel;
        let piece = panel_integral(f, a, a + panel);
        total += piece;
        sums.push(total);
        if piece.abs() > prev_mag * 1.05 && k > 8 {
            grow += 1;
            if grow > 16 {
                return Err(Error::Divergence(
                    "oscillatory tail grows; the integral diverges at the far end".into(),
                ));
            }
        } else {
            grow = 0;
        }
        prev_mag = piece.abs();
        if k >= 9 {
            let take = sums.len().min(36);
            window.clear();
            window.extend_from_slice(&sums[sums.len() - take..]);
            let (val, err) = wynn_epsilon(&window);
            let scale = val.abs().max(1e-300);
            if (val - best).abs() <= tol * scale && err <= tol.sqrt() * scale {
                stable += 1;
                if stable >= 3 || piece.abs() <= 1e-15 * scale {
                    return Ok(val);
                }
            } else {
                stable = 0;
            }
            best = val;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Divergence("oscillatory half-line integral did not converge".into()))
    }
}

/// Panel-extrapolation engine over panels of width `panel` starting at 0.
///
/// Convergence is only declared when the extrapolated value is stable over
/// several consecutive panel additions; the internal epsilon error estimate
/// alone is not trustworthy on short windows.
pub fn oscillatory_halfline<F: Fn(f64) -> f64>(f: &F, panel: f64, tol: f64) -> Result<f64> {
    let max_panels = 4000usize;
    let mut sums = Vec::with_capacity(64);
    let mut total = 0.0;
    let mut window: Vec<f64> = Vec::with_capacity(40);
    let mut best = f64::NAN;
    let mut stable = 0usize;
    let mut grow_count = 0usize;
    let mut prev_mag = f64::INFINITY;
    for k in 0..max_panels {
        let a = k as f64 * panel;
        let b = a + panel;
        let piece = panel_integral(f, a, b);
        total += piece;
        sums.push(total);
        if piece.abs() > prev_mag * 1.02 && k > 8 {
            grow_count += 1;
            if grow_count > 12 {
                return Err(Error::Divergence(
                    "oscillatory tail grows; integral diverges at the radial end".into(),
                ));
            }
        } else {
            grow_count = 0;
        }
        prev_mag = piece.abs();
        if k >= 9 {
            window.clear();
            let take = sums.len().min(36);
            window.extend_from_slice(&sums[sums.len() - take..]);
            let (val, err) = wynn_epsilon(&window);
            let scale = val.abs().max(1e-300);
            if (val - best).abs() <= tol * scale && err <= tol.sqrt() * scale {
                stable += 1;
                if stable >= 3 || piece.abs() < 1e-15 * scale {
                    return Ok(val);
                }
            } else {
                stable = 0;
            }
            best = val;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Divergence("oscillatory integral did not converge".into()))
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let nn = n as f64;
    for i in 1..=(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (nn + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and its derivative
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            pp = nn * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        out.push((-x, w));
        if i != n + 1 - i {
            out.push((x, w));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Fixed-order Gauss-Legendre integral of `f` on `[a, b]`.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, nodes: &[(f64, f64)]) -> f64 {
    let c = 0.5 * (a + b);
    let u = 0.5 * (b - a);
    nodes.iter().map(|&(x, w)| w * f(c + u * x)).sum::<f64>() * u
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn adaptive_matches_analytic() {
        let v = adaptive(&|x: f64| x.exp(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
        let v = adaptive(&|x: f64| 1.0 / (1.0 + x * x), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let v = tanh_sinh(&|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        // ∫_0^1 ln(1/x) dx = 1
        let v = tanh_sinh(&|x: f64| -x.ln(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn oscillatory_tail_converges_conditionally() {
        // ∫_0^∞ sin(x)/x dx = π/2, only conditionally convergent
        let v = oscillatory_halfline(
            &|x: f64| if x == 0.0 { 1.0 } else { x.sin() / x },
            PI,
            1e-10,
        )
        .unwrap();
        assert!((v - PI / 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn cos_transform_of_lorentzian() {
        // ∫_0^∞ cos(u w)/(1+w²) dw = (π/2) e^{-u}
        for &u in &[0.0, 0.5, 2.0] {
            let v = fourier_cos_halfline(&|w: f64| 1.0 / (1.0 + w * w), u, 1e-10).unwrap();
            assert!((v - PI / 2.0 * (-u as f64).exp()).abs() < 1e-8, "u={u} v={v}");
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        let nodes = gauss_legendre(24);
        // degree-9 polynomial integrated exactly
        let v = gl_integrate(&|x: f64| x.powi(8) - 3.0 * x.powi(4) + x, -1.0, 1.0, &nodes);
        let exact = 2.0 / 9.0 - 6.0 / 5.0;
        assert!((v - exact).abs() < 1e-14);
    }
}
