//! One-particle scattering off the excitable delta defect.
//!
//! The scatterer has an elastic strength `u0` and an inelastic coupling
//! `u1 = g*u0` into an internal excitation sitting `e_exc` (dimensionless,
//! in units of four times the elastic binding energy `u0^2/4`) above the
//! ground state. Everything is evaluated in natural units `hbar^2/2m = 1`,
//! so energies are momenta squared and the inelastic threshold sits at
//! `k_th = u0*sqrt(e_exc)`.
//!
//! The even-channel phase shift is carried as an exact numerator/denominator
//! pair `(N, D)` with `D = u0^2 + 4*k_e^2`; amplitudes are evaluated through
//! the pole-safe forms `t = D/(D - iN)`, `r = t - 1`, which make the
//! total-reflection point `D = 0` exact (`t = 0`, `r = -1`) instead of an
//! overflow. The odd channel never sees a point potential and is identity.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScatteringError {
    #[error("invalid scatterer parameters: {0}")]
    InvalidParams(&'static str),
    #[error("momentum must be strictly positive, got {0}")]
    NonPositiveMomentum(f64),
    #[error("evaluation at an S-matrix pole: |D - iN| = {0:.3e}")]
    AtPole(f64),
    #[error("pole guess must be finite and nonzero")]
    InvalidGuess,
    #[error("Newton iteration did not converge: residual {residual:.3e} after {iterations} steps")]
    NoConvergence { residual: f64, iterations: u32 },
    #[error("derivative vanished during Newton iteration")]
    DerivativeVanished,
    #[error("invalid bracket: {0}")]
    InvalidBracket(&'static str),
    #[error("no sign change of the reflection numerator on the bracket")]
    NoSignChange,
}

/// Physical configuration of the scatterer.
///
/// Validated on construction: `u0 > 0`, `g >= 0`, `e_exc >= 0`, all finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScattererParams {
    u0: f64,
    g: f64,
    e_exc: f64,
}

impl ScattererParams {
    pub fn new(u0: f64, g: f64, e_exc: f64) -> Result<Self, ScatteringError> {
        if !(u0.is_finite() && g.is_finite() && e_exc.is_finite()) {
            return Err(ScatteringError::InvalidParams("non-finite input"));
        }
        if u0 <= 0.0 {
            return Err(ScatteringError::InvalidParams("u0 must be > 0"));
        }
        if g < 0.0 {
            return Err(ScatteringError::InvalidParams("g must be >= 0"));
        }
        if e_exc < 0.0 {
            return Err(ScatteringError::InvalidParams("e_exc must be >= 0"));
        }
        Ok(Self { u0, g, e_exc })
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn e_exc(&self) -> f64 {
        self.e_exc
    }

    /// Inelastic strength `u1 = g*u0`.
    pub fn u1(&self) -> f64 {
        self.g * self.u0
    }

    /// Inelastic threshold momentum `k_th = u0*sqrt(e_exc)`.
    pub fn threshold_momentum(&self) -> f64 {
        self.u0 * self.e_exc.sqrt()
    }

    /// Elastic binding energy `u0^2/4` (natural units).
    pub fn binding_energy(&self) -> f64 {
        self.u0 * self.u0 / 4.0
    }
}

/// tan(delta_0) as the exact ratio N/D.
///
/// `d` is real up to roundoff (`k_e^2` is real for real momenta); callers
/// that need the actual phase shift divide, everything else works on the
/// pair to stay finite at the total-reflection point `D = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShiftRatio {
    pub n: Complex64,
    pub d: Complex64,
}

impl PhaseShiftRatio {
    /// The literal ratio; `None` at D = 0.
    pub fn value(&self) -> Option<Complex64> {
        if self.d.norm() == 0.0 {
            None
        } else {
            Some(self.n / self.d)
        }
    }
}

/// Reflection and transmission at one momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelAmplitudes {
    pub r: Complex64,
    pub t: Complex64,
    pub k: f64,
}

impl ChannelAmplitudes {
    /// |r|^2 + |t|^2, the summed outgoing intensity in the ground channel.
    pub fn intensity_sum(&self) -> f64 {
        self.r.norm_sqr() + self.t.norm_sqr()
    }
}

/// Converged S-matrix pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleLocation {
    pub k: Complex64,
    pub residual: f64,
    pub iterations: u32,
}

/// Perturbative resonance position/width, valid for small g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceEstimate {
    pub position: f64,
    pub width: f64,
}

/// Residual threshold for a converged pole: |f(k)| < RESIDUAL_RTOL * u0^2.
pub const RESIDUAL_RTOL: f64 = 1e-10;

const MAX_NEWTON_ITERS: u32 = 200;

/// Excited-channel momentum `k_e = sqrt(k^2 - u0^2 * e_exc)`.
///
/// Real and non-negative above threshold; purely imaginary with positive
/// imaginary part below it, so the excited wave `e^{i k_e |x|}` decays.
pub fn excited_momentum(p: &ScattererParams, k: f64) -> Result<Complex64, ScatteringError> {
    if !(k > 0.0) {
        return Err(ScatteringError::NonPositiveMomentum(k));
    }
    let w = k * k - p.u0 * p.u0 * p.e_exc;
    Ok(if w >= 0.0 {
        Complex64::new(w.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-w).sqrt())
    })
}

// Analytic continuation of k_e to complex k, on the branch Im(k_e) >= 0.
fn excited_momentum_c(p: &ScattererParams, k: Complex64) -> Complex64 {
    let s = (k * k - Complex64::new(p.u0 * p.u0 * p.e_exc, 0.0)).sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

/// The phase-shift pair: `D = u0^2 + 4 k_e^2`,
/// `N = u0 (D - u1^2)/(2k) + i k_e u1^2 / k`.
pub fn tan_delta(p: &ScattererParams, k: f64) -> Result<PhaseShiftRatio, ScatteringError> {
    if !(k > 0.0) {
        return Err(ScatteringError::NonPositiveMomentum(k));
    }
    Ok(literal_pair_c(p, Complex64::new(k, 0.0)))
}

fn literal_pair_c(p: &ScattererParams, k: Complex64) -> PhaseShiftRatio {
    let u0 = p.u0;
    let u1sq = p.u1() * p.u1();
    let ke = excited_momentum_c(p, k);
    let d = Complex64::new(u0 * u0, 0.0) + 4.0 * (k * k - Complex64::new(u0 * u0 * p.e_exc, 0.0));
    let n = u0 * (d - u1sq) / (2.0 * k) + Complex64::i() * ke * u1sq / k;
    PhaseShiftRatio { n, d }
}

// The pair actually used for amplitude and pole evaluation. For g = 0 the
// literal N is proportional to D (N = u0*D/2k), so both vanish together at
// D = 0 even though tan(delta_0) = u0/2k stays regular there; dividing out
// the common factor leaves the equivalent pair (u0, 2k) and removes the
// spurious 0/0.
fn working_pair_c(p: &ScattererParams, k: Complex64) -> PhaseShiftRatio {
    if p.g == 0.0 {
        PhaseShiftRatio { n: Complex64::new(p.u0, 0.0), d: 2.0 * k }
    } else {
        literal_pair_c(p, k)
    }
}

/// Reflection and transmission amplitudes at momentum `k`.
///
/// `t = D/(D - iN)` and `r = t - 1`, so `t - r = 1` holds exactly and the
/// total-reflection point `D = 0` gives exactly `t = 0`, `r = -1`.
pub fn amplitudes(p: &ScattererParams, k: f64) -> Result<ChannelAmplitudes, ScatteringError> {
    if !(k > 0.0) {
        return Err(ScatteringError::NonPositiveMomentum(k));
    }
    let pair = working_pair_c(p, Complex64::new(k, 0.0));
    let denom = pair.d - Complex64::i() * pair.n;
    // Real k is never a pole; the guard protects complex-momentum probes.
    if denom.norm() < 1e-13 * p.u0 * p.u0 {
        return Err(ScatteringError::AtPole(denom.norm()));
    }
    let t = pair.d / denom;
    let r = t - 1.0;
    Ok(ChannelAmplitudes { r, t, k })
}

/// |r|^2 + |t|^2 at momentum `k`: 1 in the elastic regime (g = 0 or
/// k <= k_th), in [0.5, 1] always.
pub fn unitarity_deficit(p: &ScattererParams, k: f64) -> Result<f64, ScatteringError> {
    Ok(amplitudes(p, k)?.intensity_sum())
}

/// Newton search for an S-matrix pole (a complex root of `f = D - iN`).
///
/// The derivative is analytic, steps are halved while they fail to reduce
/// |f|, and the search is capped at 200 iterations. For g = 0 the working
/// pair reduces to `(u0, 2k)` and the elastic bound state `k = i u0/2` is
/// the unique (simple) root.
pub fn find_pole(p: &ScattererParams, guess: Complex64) -> Result<PoleLocation, ScatteringError> {
    if !guess.re.is_finite() || !guess.im.is_finite() || guess.norm() == 0.0 {
        return Err(ScatteringError::InvalidGuess);
    }
    let tol = RESIDUAL_RTOL * p.u0 * p.u0;
    let f = |k: Complex64| {
        let pair = working_pair_c(p, k);
        pair.d - Complex64::i() * pair.n
    };
    let mut k = guess;
    let mut fk = f(k);
    for it in 0..MAX_NEWTON_ITERS {
        if fk.norm() < tol {
            return Ok(PoleLocation { k, residual: fk.norm(), iterations: it });
        }
        let dfk = pole_fn_derivative(p, k)?;
        if dfk.norm() < 1e-300 {
            return Err(ScatteringError::DerivativeVanished);
        }
        let mut step = fk / dfk;
        // Damping: halve while the step fails to shrink |f|.
        let mut accepted = (k - step, f(k - step));
        for _ in 0..60 {
            if accepted.1.norm() < fk.norm() {
                break;
            }
            step *= 0.5;
            accepted = (k - step, f(k - step));
        }
        k = accepted.0;
        fk = accepted.1;
    }
    Err(ScatteringError::NoConvergence { residual: fk.norm(), iterations: MAX_NEWTON_ITERS })
}

// d/dk of the working f(k) = D - iN.
fn pole_fn_derivative(p: &ScattererParams, k: Complex64) -> Result<Complex64, ScatteringError> {
    if p.g == 0.0 {
        // f = 2k - i u0.
        return Ok(Complex64::new(2.0, 0.0));
    }
    let u0 = p.u0;
    let u1sq = p.u1() * p.u1();
    let ke = excited_momentum_c(p, k);
    if ke.norm() < 1e-300 {
        // dN/dk has a k/k_e factor; exactly at threshold it is undefined.
        return Err(ScatteringError::DerivativeVanished);
    }
    let d = Complex64::new(u0 * u0, 0.0) + 4.0 * (k * k - Complex64::new(u0 * u0 * p.e_exc, 0.0));
    let dd = 8.0 * k;
    // N = u0 (D - u1^2)/(2k) + i k_e u1^2 / k
    let dn = u0 * dd / (2.0 * k) - u0 * (d - u1sq) / (2.0 * k * k)
        + Complex64::i() * u1sq * (k / ke * k - ke) / (k * k);
    Ok(dd - Complex64::i() * dn)
}

/// Leading small-g resonance estimate: position `u0/2 - u1^2 u0/(u0^2+4k^2)`,
/// width `k u0 u1^2 / (2 (u0^2+4k^2))`. Documented validity g <~ 0.3; the
/// numeric pole finder is the authoritative locator.
pub fn resonance_estimate(p: &ScattererParams, k: f64) -> Result<ResonanceEstimate, ScatteringError> {
    if !(k > 0.0) {
        return Err(ScatteringError::NonPositiveMomentum(k));
    }
    let u0 = p.u0;
    let u1sq = p.u1() * p.u1();
    let den = u0 * u0 + 4.0 * k * k;
    Ok(ResonanceEstimate {
        position: u0 / 2.0 - u1sq * u0 / den,
        width: k * u0 * u1sq / (2.0 * den),
    })
}

/// The real momentum where D = 0 below threshold (total reflection):
/// `k = u0*sqrt(e_exc - 1/4)`, present only for `e_exc > 1/4` and `g > 0`
/// (for g = 0 the factor D cancels out of tan(delta_0) and nothing special
/// happens there).
pub fn total_reflection_momentum(p: &ScattererParams) -> Option<f64> {
    if p.e_exc > 0.25 && p.g > 0.0 {
        Some(p.u0 * (p.e_exc - 0.25).sqrt())
    } else {
        None
    }
}

// 2k*N(k) for real k below threshold, where it is real:
// u0*(D - u1^2) - 2*kappa*u1^2 with kappa = sqrt(u0^2 e_exc - k^2).
// For g = 0 the cancelled numerator is the constant u0 (never zero).
pub(crate) fn reflection_numerator(p: &ScattererParams, k: f64) -> f64 {
    if p.g == 0.0 {
        return p.u0;
    }
    let u0 = p.u0;
    let u1sq = p.u1() * p.u1();
    let kappa = (u0 * u0 * p.e_exc - k * k).max(0.0).sqrt();
    let d = u0 * u0 + 4.0 * (k * k - u0 * u0 * p.e_exc);
    u0 * (d - u1sq) - 2.0 * kappa * u1sq
}

/// Bisection root of the reflection numerator on `[k_lo, k_hi]` (both below
/// threshold, where N is real), located to `|dk| < 1e-12 * u0`. At the root
/// r = 0 and t = 1.
pub fn reflection_zero(p: &ScattererParams, k_lo: f64, k_hi: f64) -> Result<f64, ScatteringError> {
    if !(k_lo > 0.0) {
        return Err(ScatteringError::NonPositiveMomentum(k_lo));
    }
    if !(k_lo < k_hi) {
        return Err(ScatteringError::InvalidBracket("k_lo must be < k_hi"));
    }
    if p.g > 0.0 && k_hi > p.threshold_momentum() {
        return Err(ScatteringError::InvalidBracket("bracket must stay below threshold"));
    }
    let mut lo = k_lo;
    let mut hi = k_hi;
    let mut flo = reflection_numerator(p, lo);
    let fhi = reflection_numerator(p, hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(ScatteringError::NoSignChange);
    }
    while hi - lo > 1e-12 * p.u0 {
        let mid = 0.5 * (lo + hi);
        let fmid = reflection_numerator(p, mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
