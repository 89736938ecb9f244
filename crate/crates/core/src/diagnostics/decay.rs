//! Two-sided polynomial decay fits `‖(u,u_t)‖ ≈ C (t + k I₀^{-p/2})^{-γ}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::linear_fit;

/// Minimum number of samples inside the fit window.
pub const MIN_TAIL_SAMPLES: usize = 50;
/// Minimum `t_hi / t_lo` of the fit window.
pub const MIN_WINDOW_RATIO: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecayError {
    #[error("insufficient window: {found} samples in [{t_lo}, {t_hi}], need at least {MIN_TAIL_SAMPLES}")]
    InsufficientWindow { found: usize, t_lo: f64, t_hi: f64 },
    #[error("window [{t_lo}, {t_hi}] spans less than a factor {MIN_WINDOW_RATIO}")]
    ShortWindow { t_lo: f64, t_hi: f64 },
    #[error("series must be positive and finite on the fit window")]
    NonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Decay exponent `γ` of the norm.
    pub exponent: f64,
    /// Amplitude `C`.
    pub amplitude: f64,
    /// `k`, with time shift `k·I₀^{-p/2}`.
    pub offset: f64,
    /// RMS residual of `ln y` on the window.
    pub residual: f64,
    pub window: [f64; 2],
    /// Time shift `k·I₀^{-p/2}`.
    pub time_shift: f64,
}

impl DecayFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (t + self.time_shift).powf(-self.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedDecay {
    /// Lower envelope `C₁(t + k₁I₀^{-p/2})^{-1/p}`, below the data on the window.
    pub lower: DecayFit,
    /// Upper envelope `C₂(t + k₂I₀^{-p/2})^{-1/p}`, above the data on the window.
    pub upper: DecayFit,
    /// Least-squares fit with exponent fixed to `1/p`.
    pub constrained: DecayFit,
    /// Least-squares fit with free exponent.
    pub free: DecayFit,
    pub n_samples: usize,
}

struct Tail {
    t: Vec<f64>,
    ly: Vec<f64>,
}

fn select_tail(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<Tail, DecayError> {
    let (t_lo, t_hi) = window;
    if !(t_lo > 0.0) || t_hi / t_lo < MIN_WINDOW_RATIO * (1.0 - 1e-12) {
        return Err(DecayError::ShortWindow { t_lo, t_hi });
    }
    let mut tail = Tail {
        t: Vec::new(),
        ly: Vec::new(),
    };
    for (&t, &y) in times.iter().zip(values) {
        if t >= t_lo && t <= t_hi {
            if !(y > 0.0) || !y.is_finite() {
                return Err(DecayError::NonPositive);
            }
            tail.t.push(t);
            tail.ly.push(y.ln());
        }
    }
    if tail.t.len() < MIN_TAIL_SAMPLES {
        return Err(DecayError::InsufficientWindow {
            found: tail.t.len(),
            t_lo,
            t_hi,
        });
    }
    Ok(tail)
}

/// Minimizes `obj` over `z ∈ [lo, hi]` by a grid scan and golden-section refinement.
fn minimize_1d(lo: f64, hi: f64, mut obj: impl FnMut(f64) -> f64) -> f64 {
    const GRID: usize = 240;
    let step = (hi - lo) / GRID as f64;
    let mut best = (lo, obj(lo));
    for i in 1..=GRID {
        let z = lo + step * i as f64;
        let v = obj(z);
        if v < best.1 {
            best = (z, v);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    for _ in 0..100 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = obj(d);
        }
        if (b - a).abs() < 1e-12 * (1.0 + a.abs()) {
            break;
        }
    }
    let z = 0.5 * (a + b);
    if obj(z) <= best.1 {
        z
    } else {
        best.0
    }
}

struct Fitted {
    shift: f64,
    gamma: f64,
    log_c: f64,
    rms: f64,
}

fn free_at(tail: &Tail, shift: f64) -> Fitted {
    let x: Vec<f64> = tail.t.iter().map(|t| (t + shift).ln()).collect();
    let f = linear_fit(&x, &tail.ly);
    Fitted {
        shift,
        gamma: -f.slope,
        log_c: f.intercept,
        rms: f.rms,
    }
}

fn constrained_at(tail: &Tail, shift: f64, gamma: f64) -> Fitted {
    let n = tail.t.len() as f64;
    let log_c = tail
        .t
        .iter()
        .zip(&tail.ly)
        .map(|(t, ly)| ly + gamma * (t + shift).ln())
        .sum::<f64>()
        / n;
    let ss: f64 = tail
        .t
        .iter()
        .zip(&tail.ly)
        .map(|(t, ly)| {
            let r = ly - log_c + gamma * (t + shift).ln();
            r * r
        })
        .sum();
    Fitted {
        shift,
        gamma,
        log_c,
        rms: (ss / n).sqrt(),
    }
}

fn to_fit(f: &Fitted, scale: f64, window: [f64; 2]) -> DecayFit {
    DecayFit {
        exponent: f.gamma,
        amplitude: f.log_c.exp(),
        offset: f.shift * scale,
        residual: f.rms,
        window,
        time_shift: f.shift,
    }
}

/// Fits the decay law on `window = (t_lo, t_hi)`.
///
/// The free fit searches shifts `s > −t_lo`; the constrained fit fixes
/// `γ = 1/p` and searches `s ≥ 0`. The envelopes rescale the constrained
/// curve by the extreme data-to-model ratios, so the sandwich holds at every
/// window sample.
pub fn fit_two_sided_decay(
    times: &[f64],
    values: &[f64],
    p: f64,
    i0: f64,
    window: (f64, f64),
) -> Result<TwoSidedDecay, DecayError> {
    assert_eq!(times.len(), values.len());
    let tail = select_tail(times, values, window)?;
    let (t_lo, t_hi) = (tail.t[0], tail.t[tail.t.len() - 1]);
    let win = [window.0, window.1];
    // offset k = shift · I₀^{p/2}
    let scale = i0.powf(0.5 * p);

    // shift = e^z − t_lo keeps t + shift > 0 on the window
    let z = minimize_1d((1e-6 * t_lo).ln(), (100.0 * t_hi).ln(), |z| {
        free_at(&tail, z.exp() - t_lo).rms
    });
    let free = free_at(&tail, z.exp() - t_lo);

    let gamma = 1.0 / p;
    let z = minimize_1d(0.0, (1.0 + 100.0 * t_hi).ln(), |z| {
        constrained_at(&tail, z.exp_m1(), gamma).rms
    });
    let cons = constrained_at(&tail, z.exp_m1(), gamma);

    let mut lo_ratio = f64::INFINITY;
    let mut hi_ratio = f64::NEG_INFINITY;
    for (t, ly) in tail.t.iter().zip(&tail.ly) {
        let r = ly - cons.log_c + gamma * (t + cons.shift).ln();
        lo_ratio = lo_ratio.min(r);
        hi_ratio = hi_ratio.max(r);
    }
    let lower = Fitted {
        log_c: cons.log_c + lo_ratio,
        ..cons
    };
    let upper = Fitted {
        log_c: cons.log_c + hi_ratio,
        ..cons
    };
    Ok(TwoSidedDecay {
        lower: to_fit(&lower, scale, win),
        upper: to_fit(&upper, scale, win),
        constrained: to_fit(&cons, scale, win),
        free: to_fit(&free, scale, win),
        n_samples: tail.t.len(),
    })
}

/// Whether `lower ≤ data ≤ upper` at every sample inside the window (with a
/// relative slack for roundoff).
pub fn sandwich_holds(fit: &TwoSidedDecay, times: &[f64], values: &[f64], rel_slack: f64) -> bool {
    let [lo, hi] = fit.lower.window;
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .all(|(&t, &y)| fit.lower.eval(t) <= y * (1.0 + rel_slack) && y <= fit.upper.eval(t) * (1.0 + rel_slack))
}

/// Algebraic decay factor `(s/(t + s))^C` fitted to a ratio series `y(t)/y(0)`,
/// with `s = k I₀^{-p/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSignature {
    /// Exponent `C`.
    pub exponent: f64,
    /// Time shift `s`.
    pub time_shift: f64,
    /// `k = s I₀^{p/2}`.
    pub offset: f64,
    /// Largest multiplicative gap `exp|ln(data/model)|` over the samples.
    pub max_factor: f64,
}

/// Least-squares fit of `ln ratio ≈ −C ln(1 + t/s)` over `s`, using samples
/// with `t > 0`. Returns `None` without at least three positive samples.
pub fn fit_rate_signature(times: &[f64], ratios: &[f64], p: f64, i0: f64) -> Option<RateSignature> {
    assert_eq!(times.len(), ratios.len());
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(ratios)
        .filter(|(t, r)| **t > 0.0 && **r > 0.0 && r.is_finite())
        .map(|(t, r)| (*t, r.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let t_lo = pts.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
    let t_hi = pts.iter().map(|x| x.0).fold(0.0, f64::max);
    // exponent by regression through the origin at a fixed shift
    let at = |s: f64| {
        let xs: Vec<f64> = pts.iter().map(|(t, _)| -(t / s).ln_1p()).collect();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let c = xs.iter().zip(&pts).map(|(x, (_, y))| x * y).sum::<f64>() / sxx;
        let worst = xs
            .iter()
            .zip(&pts)
            .map(|(x, (_, y))| (y - c * x).abs())
            .fold(0.0, f64::max);
        let sse: f64 = xs.iter().zip(&pts).map(|(x, (_, y))| (y - c * x).powi(2)).sum();
        (c, worst, sse)
    };
    let z = minimize_1d((1e-3 * t_lo).ln(), (1e3 * t_hi).ln(), |z| at(z.exp()).2);
    let s = z.exp();
    let (c, worst, _) = at(s);
    Some(RateSignature {
        exponent: c,
        time_shift: s,
        offset: s * i0.powf(0.5 * p),
        max_factor: worst.exp(),
    })
}

/// `n` logarithmically spaced times in `[t_lo, t_hi]`.
pub fn log_spaced(t_lo: f64, t_hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && t_lo > 0.0 && t_hi > t_lo);
    let (a, b) = (t_lo.ln(), t_hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                t_lo
            } else if i == n - 1 {
                t_hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_model_class_series() {
        let t = log_spaced(1e3, 1e5, 200);
        let y: Vec<f64> = t.iter().map(|t| (t + 7.0f64).powf(-1.0 / 1.5)).collect();
        let fit = fit_two_sided_decay(&t, &y, 1.5, 1.0, (1e3, 1e5)).unwrap();
        assert!((fit.free.exponent - 1.0 / 1.5).abs() < 1e-3, "{:?}", fit.free);
        assert!((fit.constrained.time_shift - 7.0).abs() < 7e-3, "{:?}", fit.constrained);
        assert!((fit.constrained.amplitude - 1.0).abs() < 1e-3);
        assert!(fit.lower.amplitude <= fit.upper.amplitude);
        assert!(sandwich_holds(&fit, &t, &y, 1e-12));
    }

    #[test]
    fn offset_scales_with_initial_intensity() {
        let t = log_spaced(1e2, 1e5, 100);
        let y: Vec<f64> = t.iter().map(|t| 2.0 * (t + 40.0f64).powf(-1.0 / 1.2)).collect();
        let i0: f64 = 0.25;
        let fit = fit_two_sided_decay(&t, &y, 1.2, i0, (1e2, 1e5)).unwrap();
        assert!((fit.constrained.offset - 40.0 * i0.powf(0.6)).abs() < 1e-2);
    }

    #[test]
    fn too_few_samples() {
        let t = log_spaced(1e3, 1e5, 30);
        let y: Vec<f64> = t.iter().map(|t| t.powf(-0.5)).collect();
        assert!(matches!(
            fit_two_sided_decay(&t, &y, 1.5, 1.0, (1e3, 1e5)),
            Err(DecayError::InsufficientWindow { found: 30, .. })
        ));
        assert!(matches!(
            fit_two_sided_decay(&t, &y, 1.5, 1.0, (1e3, 1e4)),
            Err(DecayError::ShortWindow { .. }) | Err(DecayError::InsufficientWindow { .. })
        ));
    }
}
