//! Two-fermion scattering machinery.
//!
//! Two distinguishable momenta `k1 != k2` hit the defect from the left in an
//! antisymmetrized state. The two-particle S matrix is block 2x2 in the
//! (left, right) lead basis with diagonal channel blocks; losses make S
//! non-unitary, and the outgoing state is governed by the dual matrix
//! `SD = (S^dagger)^{-1}` instead. The antisymmetric pair matrix
//! `W = SD * Sigma * SD^T` carries all concurrences:
//! the full-state contraction `8|W12 W34 + W13 W42 + W14 W23|` (identically
//! zero for these inputs), the post-selected concurrence built from
//! `gamma = R sigma_y T^T`, and the fixed-number sector values.

use crate::cxmat::{sigma_y, CMat, CxError};
use crate::scattering::{self, ScattererParams, ScatteringError};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TwoBodyError {
    #[error("equal momenta: the antisymmetrized two-fermion input state vanishes")]
    EqualMomenta,
    #[error("momentum must be strictly positive, got {0}")]
    NonPositiveMomentum(f64),
    #[error("both cross products vanish; post-selected concurrence undefined")]
    Undefined,
    #[error("post-selected state has zero norm")]
    ZeroNorm,
    #[error("reflection block is singular (perfect-transmission channel)")]
    SingularReflection,
    #[error("momentum at or below the inelastic threshold")]
    BelowThreshold,
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Matrix(#[from] CxError),
}

/// A validated two-particle configuration.
///
/// Equal momenta are rejected outright: the fermionic input `a^dag a^dag`
/// with identical quantum numbers is the null vector, and silently carrying
/// it forward invites nonsense downstream. The symmetric limit is still
/// reachable through explicitly near-degenerate inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoParticleInput {
    params: ScattererParams,
    k1: f64,
    k2: f64,
}

impl TwoParticleInput {
    pub fn new(params: ScattererParams, k1: f64, k2: f64) -> Result<Self, TwoBodyError> {
        if !(k1 > 0.0) {
            return Err(TwoBodyError::NonPositiveMomentum(k1));
        }
        if !(k2 > 0.0) {
            return Err(TwoBodyError::NonPositiveMomentum(k2));
        }
        if k1 == k2 {
            return Err(TwoBodyError::EqualMomenta);
        }
        Ok(Self { params, k1, k2 })
    }

    pub fn params(&self) -> &ScattererParams {
        &self.params
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }
}

/// Two-particle S matrix: 2x2 blocks [[r, t'], [t, r']], each diagonal with
/// the per-channel amplitudes, and r' = r, t' = t by inversion symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix4 {
    /// Diagonal of the reflection block: (r(k1), r(k2)).
    pub r: [Complex64; 2],
    /// Diagonal of the transmission block: (t(k1), t(k2)).
    pub t: [Complex64; 2],
}

impl SMatrix4 {
    pub fn to_cmat(&self) -> CMat {
        let z = Complex64::new(0.0, 0.0);
        CMat::new(
            4,
            vec![
                self.r[0], z, self.t[0], z, //
                z, self.r[1], z, self.t[1], //
                self.t[0], z, self.r[0], z, //
                z, self.t[1], z, self.r[1],
            ],
        )
        .unwrap()
    }
}

/// The dual matrix SD = (S^dagger)^{-1}, partitioned like S.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSMatrix {
    /// Block R (reflected-reflected).
    pub rr: CMat,
    /// Block T' (top right).
    pub tp: CMat,
    /// Block T (bottom left).
    pub tt: CMat,
    /// Block R' (bottom right).
    pub rp: CMat,
}

impl DualSMatrix {
    pub fn to_cmat(&self) -> CMat {
        let mut m = CMat::zeros(4).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                m.set(i, j, self.rr.get(i, j));
                m.set(i, j + 2, self.tp.get(i, j));
                m.set(i + 2, j, self.tt.get(i, j));
                m.set(i + 2, j + 2, self.rp.get(i, j));
            }
        }
        m
    }

    fn from_cmat(m: &CMat) -> Self {
        let block = |ri: usize, ci: usize| {
            CMat::new(
                2,
                vec![
                    m.get(ri, ci),
                    m.get(ri, ci + 1),
                    m.get(ri + 1, ci),
                    m.get(ri + 1, ci + 1),
                ],
            )
            .unwrap()
        };
        Self { rr: block(0, 0), tp: block(0, 2), tt: block(2, 0), rp: block(2, 2) }
    }
}

/// The antisymmetric pair matrix W = SD * Sigma * SD^T.
#[derive(Debug, Clone, PartialEq)]
pub struct WMatrix(pub CMat);

/// Per-sector concurrences after projecting onto fixed particle-number
/// sectors; `None` marks an empty sector (projection norm below 1e-28).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorConcurrences {
    pub ll: Option<f64>,
    pub rr: Option<f64>,
    pub lr: Option<f64>,
}

/// Everything the front end reports for one two-particle configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceReport {
    pub eta_full: f64,
    pub eta_postselected: f64,
    pub sector_ll: Option<f64>,
    pub sector_rr: Option<f64>,
    pub sector_lr: Option<f64>,
    pub gamma_norm: f64,
}

const EMPTY_NORM: f64 = 1e-28;

/// Builds the two-particle S matrix from the one-particle amplitudes.
pub fn build_smatrix(input: &TwoParticleInput) -> Result<SMatrix4, TwoBodyError> {
    let a1 = scattering::amplitudes(input.params(), input.k1)?;
    let a2 = scattering::amplitudes(input.params(), input.k2)?;
    Ok(SMatrix4 { r: [a1.r, a2.r], t: [a1.t, a2.t] })
}

/// Dual matrix through the block formulas:
/// `R = [r^dag - t^dag (r'^dag)^{-1} t'^dag]^{-1}`,
/// `T' = -R t^dag (r'^dag)^{-1}`, `T = -(r'^dag)^{-1} t'^dag R`,
/// `R' = (r'^dag)^{-1} - (r'^dag)^{-1} t'^dag T'`.
///
/// Fails with [`TwoBodyError::SingularReflection`] when a channel sits at
/// perfect transmission (r = 0); use [`dual_smatrix`] for the fallback.
pub fn dual_smatrix_blocks(s: &SMatrix4) -> Result<DualSMatrix, TwoBodyError> {
    let z = Complex64::new(0.0, 0.0);
    let rb = CMat::new(2, vec![s.r[0], z, z, s.r[1]]).unwrap();
    let tb = CMat::new(2, vec![s.t[0], z, z, s.t[1]]).unwrap();
    // r' = r, t' = t
    let rd = rb.adjoint();
    let td = tb.adjoint();
    let rpd_inv = rd.inverse().map_err(|_| TwoBodyError::SingularReflection)?;
    let bracket = rd.sub(&td.mul(&rpd_inv)?.mul(&td)?)?;
    let rr = bracket.inverse().map_err(|_| TwoBodyError::SingularReflection)?;
    let tp = rr.mul(&td)?.mul(&rpd_inv)?.scale(Complex64::new(-1.0, 0.0));
    let tt = rpd_inv.mul(&td)?.mul(&rr)?.scale(Complex64::new(-1.0, 0.0));
    let rp = rpd_inv.sub(&rpd_inv.mul(&td)?.mul(&tp)?)?;
    Ok(DualSMatrix { rr, tp, tt, rp })
}

/// Dual matrix as the direct 4x4 inverse of S^dagger (the oracle route).
/// Finite whenever r^2 - t^2 != 0 in both channels, which holds for every
/// physical parameter set (that combination is -exp(2i delta)).
pub fn dual_smatrix_direct(s: &SMatrix4) -> Result<DualSMatrix, TwoBodyError> {
    let inv = s.to_cmat().adjoint().inverse()?;
    Ok(DualSMatrix::from_cmat(&inv))
}

/// Dual matrix SD = (S^dagger)^{-1}: block formulas first, falling back to
/// the direct inverse when a perfect-transmission channel makes r'^dag
/// singular (the direct route stays finite as long as r^2 - t^2 != 0 in
/// every channel).
pub fn dual_smatrix(s: &SMatrix4) -> Result<DualSMatrix, TwoBodyError> {
    match dual_smatrix_blocks(s) {
        Ok(d) => Ok(d),
        Err(TwoBodyError::SingularReflection) => dual_smatrix_direct(s),
        Err(e) => Err(e),
    }
}

// Sigma = [[(i/2) sigma_y, 0], [0, 0]]; the nonzero block is [[0, 1/2], [-1/2, 0]].
fn sigma_matrix() -> CMat {
    let mut m = CMat::zeros(4).unwrap();
    m.set(0, 1, Complex64::new(0.5, 0.0));
    m.set(1, 0, Complex64::new(-0.5, 0.0));
    m
}

/// W = SD * Sigma * SD^T; antisymmetric by construction.
pub fn w_matrix(d: &DualSMatrix) -> WMatrix {
    let sd = d.to_cmat();
    let w = sd.mul(&sigma_matrix()).unwrap().mul(&sd.transpose()).unwrap();
    WMatrix(w)
}

/// The epsilon-tensor contraction `8 |W12 W34 + W13 W42 + W14 W23|`.
///
/// Applied to the W of any physical input this vanishes: W = SD Sigma SD^T
/// gives Pf(W) = det(SD) Pf(Sigma) and Pf(Sigma) = 0. The arithmetic is
/// exercised against hand-built normalized W matrices in tests.
pub fn full_concurrence(w: &WMatrix) -> f64 {
    let m = &w.0;
    let term = m.get(0, 1) * m.get(2, 3) + m.get(0, 2) * m.get(3, 1) + m.get(0, 3) * m.get(1, 2);
    8.0 * term.norm()
}

/// gamma = R sigma_y T^T and its norm Tr(gamma gamma^dag).
pub fn postselect(d: &DualSMatrix) -> Result<(CMat, f64), TwoBodyError> {
    let gamma = d.rr.mul(&sigma_y())?.mul(&d.tt.transpose())?;
    let norm: f64 = gamma.entries().iter().map(|z| z.norm_sqr()).sum();
    if norm < EMPTY_NORM {
        return Err(TwoBodyError::ZeroNorm);
    }
    Ok((gamma, norm))
}

// Cross products |R22 T11| and |R11 T22| from a dual matrix.
fn cross_products(d: &DualSMatrix) -> (f64, f64) {
    let a = (d.rr.get(1, 1) * d.tt.get(0, 0)).norm();
    let b = (d.rr.get(0, 0) * d.tt.get(1, 1)).norm();
    (a, b)
}

fn eta_from_products(a: f64, b: f64) -> Result<f64, TwoBodyError> {
    if a == 0.0 && b == 0.0 {
        return Err(TwoBodyError::Undefined);
    }
    Ok(2.0 * a * b / (a * a + b * b))
}

/// Post-selected concurrence through the dual-matrix route:
/// `eta = 2 |R22 T11| |R11 T22| / (|R22 T11|^2 + |R11 T22|^2)`.
///
/// Cross-checked in debug builds against the reduced form, which divides
/// out the per-channel factor `|r^2 - t^2|^{-2}`.
pub fn concurrence_postselected(input: &TwoParticleInput) -> Result<f64, TwoBodyError> {
    let s = build_smatrix(input)?;
    let d = dual_smatrix(&s)?;
    let (a, b) = cross_products(&d);
    let eta = eta_from_products(a, b)?;
    #[cfg(debug_assertions)]
    {
        if let Ok(red) = concurrence_reduced(input) {
            debug_assert!(
                (eta - red).abs() < 1e-12,
                "dual-route eta {eta} deviates from reduced form {red}"
            );
        }
    }
    Ok(eta)
}

/// Post-selected concurrence in the reduced per-channel form
/// `2 |r2 t1| |r1 t2| / (|r2 t1|^2 + |r1 t2|^2)`.
///
/// Equivalent to the dual-matrix route (the channel factors cancel) but
/// needs no matrix inversion, which makes it the primary evaluation for
/// sweeps: it stays finite through reflection zeros and total reflection.
pub fn concurrence_reduced(input: &TwoParticleInput) -> Result<f64, TwoBodyError> {
    let a1 = scattering::amplitudes(input.params(), input.k1)?;
    let a2 = scattering::amplitudes(input.params(), input.k2)?;
    let a = (a2.r * a1.t).norm();
    let b = (a1.r * a2.t).norm();
    eta_from_products(a, b)
}

/// Elastic closed form `2 k1 k2 / (k1^2 + k2^2)` (the g = 0 concurrence).
/// Formal helper: accepts any positive momenta, including k1 = k2.
pub fn elastic_concurrence(k1: f64, k2: f64) -> f64 {
    2.0 * k1 * k2 / (k1 * k1 + k2 * k2)
}

/// Small-coupling expansion of the concurrence,
/// `2k1k2/(k1^2+k2^2) + 8 k1 k2 (k1^2-k2^2)^2 g^2 / [(k1^2+k2^2)^2 D1 D2]`
/// with `D_i = 4k_i^2 + u0^2 - 4 u0^2 e_exc`. Valid when both momenta sit
/// above the inelastic threshold; the residual against the full computation
/// scales as g^4.
pub fn concurrence_smallg(input: &TwoParticleInput) -> Result<f64, TwoBodyError> {
    let p = input.params();
    let kth = p.threshold_momentum();
    if input.k1 <= kth || input.k2 <= kth {
        return Err(TwoBodyError::BelowThreshold);
    }
    let (k1, k2) = (input.k1, input.k2);
    let (k1s, k2s) = (k1 * k1, k2 * k2);
    let u0s = p.u0() * p.u0();
    let d1 = 4.0 * k1s + u0s - 4.0 * u0s * p.e_exc();
    let d2 = 4.0 * k2s + u0s - 4.0 * u0s * p.e_exc();
    let lead = elastic_concurrence(k1, k2);
    let corr = 8.0 * k1 * k2 * (k1s - k2s) * (k1s - k2s) * p.g() * p.g()
        / ((k1s + k2s) * (k1s + k2s) * d1 * d2);
    Ok(lead + corr)
}

/// Large-coupling plateau `eta_inf = 2 rho / (1 + rho^2)` with
/// `rho = |t1/t2|` in the g -> infinity limit, where
/// `t_i -> D_i k_i / (i k_{e,i} - u0/2)` up to the common `1/u1^2` factor
/// and `|r_i| -> 1`.
pub fn plateau_limit(input: &TwoParticleInput) -> Result<f64, TwoBodyError> {
    let p = input.params();
    let kth = p.threshold_momentum();
    if input.k1 <= kth || input.k2 <= kth {
        return Err(TwoBodyError::BelowThreshold);
    }
    let tmag = |k: f64| -> Result<f64, TwoBodyError> {
        let ke = scattering::excited_momentum(p, k)?;
        let d = p.u0() * p.u0() + 4.0 * (k * k - p.u0() * p.u0() * p.e_exc());
        Ok((d * k).abs() / (Complex64::i() * ke - p.u0() / 2.0).norm())
    };
    let rho = tmag(input.k1)? / tmag(input.k2)?;
    Ok(2.0 * rho / (1.0 + rho * rho))
}

/// Sector concurrences after projecting W onto the fixed-number sectors:
/// both-left (modes 1,2), both-right (3,4), one-on-each-side (cross terms).
///
/// Each projection is renormalized before the contraction. The 2x2
/// antisymmetric LL and RR sectors are single Slater determinants, so their
/// concurrence is identically zero whenever the sector is populated; the LR
/// value reproduces the post-selected concurrence.
pub fn sector_concurrences(w: &WMatrix) -> SectorConcurrences {
    let m = &w.0;
    // state norm^2 of a projection with entries {w_ij}: 2 * sum 2|w_ij|^2
    let ll_norm = 4.0 * m.get(0, 1).norm_sqr();
    let rr_norm = 4.0 * m.get(2, 3).norm_sqr();
    let lr_sum = m.get(0, 2).norm_sqr()
        + m.get(0, 3).norm_sqr()
        + m.get(1, 2).norm_sqr()
        + m.get(1, 3).norm_sqr();
    let lr_norm = 4.0 * lr_sum;
    let ll = (ll_norm >= EMPTY_NORM).then_some(0.0);
    let rr = (rr_norm >= EMPTY_NORM).then_some(0.0);
    let lr = (lr_norm >= EMPTY_NORM).then(|| {
        // contraction restricted to the cross block; W12' = W34' = 0
        8.0 * (m.get(0, 2) * m.get(3, 1) + m.get(0, 3) * m.get(1, 2)).norm() / lr_norm
    });
    SectorConcurrences { ll, rr, lr }
}

/// Assembles the full report: full-state, post-selected, sector values,
/// and the post-selected norm.
pub fn concurrence_report(input: &TwoParticleInput) -> Result<ConcurrenceReport, TwoBodyError> {
    let s = build_smatrix(input)?;
    let d = dual_smatrix(&s)?;
    let w = w_matrix(&d);
    let (a, b) = cross_products(&d);
    let eta_ps = eta_from_products(a, b)?;
    let gamma_norm = match postselect(&d) {
        Ok((_, n)) => n,
        Err(TwoBodyError::ZeroNorm) => 0.0,
        Err(e) => return Err(e),
    };
    let sectors = sector_concurrences(&w);
    Ok(ConcurrenceReport {
        eta_full: full_concurrence(&w),
        eta_postselected: eta_ps,
        sector_ll: sectors.ll,
        sector_rr: sectors.rr,
        sector_lr: sectors.lr,
        gamma_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(u0: f64, g: f64, e_exc: f64) -> ScattererParams {
        ScattererParams::new(u0, g, e_exc).unwrap()
    }

    fn input(u0: f64, g: f64, e_exc: f64, k1: f64, k2: f64) -> TwoParticleInput {
        TwoParticleInput::new(params(u0, g, e_exc), k1, k2).unwrap()
    }

    #[test]
    fn input_validation() {
        let p = params(1.0, 0.0, 0.0);
        assert_eq!(TwoParticleInput::new(p, 1.0, 1.0), Err(TwoBodyError::EqualMomenta));
        assert!(matches!(
            TwoParticleInput::new(p, 0.0, 1.0),
            Err(TwoBodyError::NonPositiveMomentum(_))
        ));
        assert!(TwoParticleInput::new(p, 1.0, 1.0 + 1e-12).is_ok());
    }

    #[test]
    fn smatrix_elastic_blocks() {
        let inp = input(1.0, 0.0, 0.0, 0.5, 1.5);
        let s = build_smatrix(&inp).unwrap();
        assert!((s.r[0] - Complex64::new(-0.5, 0.5)).norm() < 1e-15);
        assert!((s.t[0] - Complex64::new(0.5, 0.5)).norm() < 1e-15);
        // per-channel identity
        assert!((s.t[1] - s.r[1] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // unitary: S^dag S = I
        let sc = s.to_cmat();
        let res = sc.adjoint().mul(&sc).unwrap();
        assert!(res.max_abs_diff(&CMat::identity(4).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn smatrix_inelastic_deficit_matches() {
        let inp = input(1.0, 1.0, 0.25, 1.0, 2.0);
        let s = build_smatrix(&inp).unwrap();
        let sc = s.to_cmat();
        let res = sc.adjoint().mul(&sc).unwrap();
        // channel 1 diagonal of S^dag S is |r1|^2 + |t1|^2
        let want = scattering::unitarity_deficit(inp.params(), 1.0).unwrap();
        assert!((res.get(0, 0).re - want).abs() < 1e-12);
        assert!(res.max_abs_diff(&CMat::identity(4).unwrap()).unwrap() > 1e-3);
    }

    #[test]
    fn dual_unitary_collapse() {
        let inp = input(1.0, 0.0, 0.0, 0.5, 1.5);
        let s = build_smatrix(&inp).unwrap();
        let d = dual_smatrix(&s).unwrap();
        assert!(d.to_cmat().max_abs_diff(&s.to_cmat()).unwrap() < 1e-12);
    }

    #[test]
    fn dual_blocks_match_direct_inverse() {
        let inp = input(1.0, 1.0, 0.25, 1.0, 2.0);
        let s = build_smatrix(&inp).unwrap();
        let blocks = dual_smatrix_blocks(&s).unwrap();
        let direct = dual_smatrix_direct(&s).unwrap();
        assert!(blocks.to_cmat().max_abs_diff(&direct.to_cmat()).unwrap() < 1e-11);
        // SD * S^dag = I
        let prod = blocks.to_cmat().mul(&s.to_cmat().adjoint()).unwrap();
        assert!(prod.max_abs_diff(&CMat::identity(4).unwrap()).unwrap() < 1e-11);
    }

    #[test]
    fn dual_diagonal_identities() {
        let inp = input(1.0, 1.0, 0.25, 1.0, 2.0);
        let s = build_smatrix(&inp).unwrap();
        let d = dual_smatrix(&s).unwrap();
        for i in 0..2 {
            let det = s.r[i] * s.r[i] - s.t[i] * s.t[i];
            assert!((d.rr.get(i, i).conj() - s.r[i] / det).norm() < 1e-12);
            assert!((d.tt.get(i, i).conj() - (-s.t[i] / det)).norm() < 1e-12);
        }
    }

    #[test]
    fn dual_fallback_at_reflection_zero() {
        // at the r = 0 point the block route must fail and the fallback
        // must still produce a valid dual matrix
        let p = params(1.0, 0.5, 0.5);
        let k0 = scattering::reflection_zero(&p, 0.05, p.threshold_momentum()).unwrap();
        let inp = TwoParticleInput::new(p, k0, 0.3).unwrap();
        let s = build_smatrix(&inp).unwrap();
        assert_eq!(dual_smatrix_blocks(&s).unwrap_err(), TwoBodyError::SingularReflection);
        let d = dual_smatrix(&s).unwrap();
        let prod = d.to_cmat().mul(&s.to_cmat().adjoint()).unwrap();
        assert!(prod.max_abs_diff(&CMat::identity(4).unwrap()).unwrap() < 1e-9);
    }

    #[test]
    fn w_matrix_antisymmetric_and_unitary_value() {
        let inp = input(1.0, 0.0, 0.0, 0.5, 1.5);
        let s = build_smatrix(&inp).unwrap();
        let d = dual_smatrix(&s).unwrap();
        let w = w_matrix(&d);
        let asym = w.0.sub(&w.0.transpose().scale(Complex64::new(-1.0, 0.0))).unwrap();
        assert!(asym.max_abs() < 1e-12);
        // unitary case: W12 = r1 r2 / 2
        assert!((w.0.get(0, 1) - s.r[0] * s.r[1] / 2.0).norm() < 1e-13);
    }

    #[test]
    fn w_matrix_pure_reflection_structure() {
        // hypothetical r = -1, t = 0 in both channels: only W12 populated
        let s = SMatrix4 {
            r: [Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0)],
            t: [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        };
        let d = dual_smatrix(&s).unwrap();
        let w = w_matrix(&d);
        assert!(w.0.get(0, 1).norm() > 0.4);
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            assert!(w.0.get(i, j).norm() < 1e-15, "({i},{j})");
        }
    }

    #[test]
    fn full_concurrence_vanishes_physically() {
        for (g, e_exc, k1, k2) in [
            (0.0, 0.0, 0.5, 1.5),
            (1.0, 0.25, 1.0, 2.0),
            (0.5, 0.5, 0.3, 0.6),
            (2.0, 1.0, 0.2, 3.0),
        ] {
            let inp = input(1.0, g, e_exc, k1, k2);
            let d = dual_smatrix(&build_smatrix(&inp).unwrap()).unwrap();
            assert!(full_concurrence(&w_matrix(&d)) < 1e-10, "g={g} e={e_exc}");
        }
    }

    #[test]
    fn full_concurrence_contraction_arithmetic() {
        // normalized hand-built W: W12 = W34 = 1/(2 sqrt 2) gives eta = 1
        // and state norm^2 = 2 Tr(W W^dag) = 1
        let v = 1.0 / (2.0 * 2.0f64.sqrt());
        let mut m = CMat::zeros(4).unwrap();
        m.set(0, 1, Complex64::new(v, 0.0));
        m.set(1, 0, Complex64::new(-v, 0.0));
        m.set(2, 3, Complex64::new(v, 0.0));
        m.set(3, 2, Complex64::new(-v, 0.0));
        let tr: f64 = m.entries().iter().map(|z| z.norm_sqr()).sum();
        assert!((2.0 * tr - 1.0).abs() < 1e-15);
        assert!((full_concurrence(&WMatrix(m)) - 1.0).abs() < 1e-15);
        assert_eq!(full_concurrence(&WMatrix(CMat::zeros(4).unwrap())), 0.0);
    }

    #[test]
    fn postselect_gamma_structure() {
        // diagonal blocks: gamma = [[0, -i R11 T22], [i R22 T11, 0]]
        let inp = input(1.0, 0.0, 0.0, 0.5, 1.5);
        let d = dual_smatrix(&build_smatrix(&inp).unwrap()).unwrap();
        let (gamma, norm) = postselect(&d).unwrap();
        let mi = Complex64::new(0.0, -1.0);
        assert!(gamma.get(0, 0).norm() < 1e-15 && gamma.get(1, 1).norm() < 1e-15);
        assert!((gamma.get(0, 1) - mi * d.rr.get(0, 0) * d.tt.get(1, 1)).norm() < 1e-14);
        assert!((gamma.get(1, 0) + mi * d.rr.get(1, 1) * d.tt.get(0, 0)).norm() < 1e-14);
        // unitary case: norm = |r1 t2|^2 + |r2 t1|^2
        let s = build_smatrix(&inp).unwrap();
        let want = (s.r[0] * s.t[1]).norm_sqr() + (s.r[1] * s.t[0]).norm_sqr();
        assert!((norm - want).abs() < 1e-13);
    }

    #[test]
    fn postselect_zero_norm_degenerate() {
        // both channels at perfect transmission: gamma = 0
        let s = SMatrix4 {
            r: [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
            t: [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        };
        let d = dual_smatrix(&s).unwrap();
        assert_eq!(postselect(&d).unwrap_err(), TwoBodyError::ZeroNorm);
    }

    #[test]
    fn concurrence_elastic_closed_form() {
        let inp = input(1.0, 0.0, 0.0, 0.5, 1.5);
        let eta = concurrence_postselected(&inp).unwrap();
        assert!((eta - 0.6).abs() < 1e-12);
        assert!((concurrence_reduced(&inp).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(elastic_concurrence(0.5, 1.5), 0.6);
        // closed form holds at any elastic pair
        for (k1, k2) in [(0.1, 0.2), (0.7, 2.9), (1.0, 40.0)] {
            let inp = input(1.0, 0.0, 0.7, k1, k2);
            let eta = concurrence_reduced(&inp).unwrap();
            assert!((eta - elastic_concurrence(k1, k2)).abs() < 1e-12);
        }
    }

    #[test]
    fn concurrence_zero_at_total_reflection() {
        // t(k2) = 0 at the total-reflection point
        let inp = input(1.0, 0.5, 0.5, 0.25, 0.5);
        assert_eq!(concurrence_reduced(&inp).unwrap(), 0.0);
        assert!(concurrence_postselected(&inp).unwrap() < 1e-12);
    }

    #[test]
    fn concurrence_elastic_limits() {
        // widely separated momenta: eta -> 0
        let inp = input(1.0, 0.0, 0.0, 0.01, 100.0);
        assert!(concurrence_reduced(&inp).unwrap() < 1e-3);
        // near-degenerate: eta -> 1
        let inp = input(1.0, 0.0, 0.0, 1.0, 1.0 + 1e-6);
        assert!(concurrence_reduced(&inp).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn concurrence_exchange_symmetric() {
        let a = concurrence_reduced(&input(1.0, 0.7, 0.3, 0.4, 1.9)).unwrap();
        let b = concurrence_reduced(&input(1.0, 0.7, 0.3, 1.9, 0.4)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn smallg_expansion_point() {
        // 0.6 + 0.192 g^2 at g = 0.1
        let inp = input(1.0, 0.1, 0.0, 0.5, 1.5);
        let e = concurrence_smallg(&inp).unwrap();
        assert!((e - 0.60192).abs() < 1e-12);
        let full = concurrence_postselected(&inp).unwrap();
        assert!((e - full).abs() < 5e-5);
        // g = 0 collapses to the elastic form
        let inp0 = input(1.0, 0.0, 0.0, 0.5, 1.5);
        assert_eq!(concurrence_smallg(&inp0).unwrap(), 0.6);
    }

    #[test]
    fn smallg_residual_scales_g4() {
        let eta_resid = |g: f64| {
            let inp = input(1.0, g, 0.0, 0.5, 1.5);
            concurrence_postselected(&inp).unwrap() - concurrence_smallg(&inp).unwrap()
        };
        let ratio = (eta_resid(0.02) / eta_resid(0.01)).abs();
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn smallg_below_threshold_rejected() {
        let inp = input(1.0, 0.1, 0.5, 0.5, 1.5);
        assert_eq!(concurrence_smallg(&inp).unwrap_err(), TwoBodyError::BelowThreshold);
    }

    #[test]
    fn plateau_values() {
        // rho = 1 formally when k1 = k2 (construct nearby): eta -> 1
        let inp = input(1.0, 0.0, 0.0, 1.0, 1.0 + 1e-9);
        assert!((plateau_limit(&inp).unwrap() - 1.0).abs() < 1e-6);
        // closed value 3 sqrt(5) / 23 at (e_exc=0, 0.5, 1.5)
        let inp = input(1.0, 5.0, 0.0, 0.5, 1.5);
        let want = 3.0 * 5.0f64.sqrt() / 23.0;
        assert!((plateau_limit(&inp).unwrap() - want).abs() < 1e-14);
        // large-g numerical limit is the oracle
        let inp = input(1.0, 50.0, 0.25, 1.0, 2.0);
        let inf = plateau_limit(&inp).unwrap();
        assert!((inf - 2.0 * 0.25 / (1.0 + 0.0625)).abs() < 1e-14);
        assert!((concurrence_reduced(&inp).unwrap() - inf).abs() < 1e-3);
        // plateau flatness at the reference configuration
        let eta = |g: f64| concurrence_reduced(&input(1.0, g, 0.0, 0.5, 1.5)).unwrap();
        assert!((eta(10.0) - eta(20.0)).abs() < 1e-3);
        let below = input(1.0, 1.0, 0.5, 0.5, 1.5);
        assert_eq!(plateau_limit(&below).unwrap_err(), TwoBodyError::BelowThreshold);
    }

    #[test]
    fn sector_identities() {
        for (g, e_exc, k1, k2) in [(0.0, 0.0, 0.5, 1.5), (1.0, 0.25, 1.0, 2.0), (0.5, 0.5, 0.3, 0.6)] {
            let inp = input(1.0, g, e_exc, k1, k2);
            let d = dual_smatrix(&build_smatrix(&inp).unwrap()).unwrap();
            let sec = sector_concurrences(&w_matrix(&d));
            assert_eq!(sec.ll, Some(0.0));
            assert_eq!(sec.rr, Some(0.0));
            let lr = sec.lr.unwrap();
            let ps = concurrence_postselected(&inp).unwrap();
            assert!((lr - ps).abs() < 1e-10, "g={g}");
        }
        let sec = sector_concurrences(&w_matrix(&dual_smatrix(&build_smatrix(&input(1.0, 0.0, 0.0, 0.5, 1.5)).unwrap()).unwrap()));
        assert!((sec.lr.unwrap() - 0.6).abs() < 1e-10);
    }

    #[test]
    fn sector_empty_at_transmission_zero() {
        // t2 = 0: the both-transmitted (RR) sector is empty
        let inp = input(1.0, 0.5, 0.5, 0.25, 0.5);
        let d = dual_smatrix(&build_smatrix(&inp).unwrap()).unwrap();
        let sec = sector_concurrences(&w_matrix(&d));
        assert_eq!(sec.rr, None);
        assert_eq!(sec.ll, Some(0.0));
        assert_eq!(sec.lr, Some(0.0));
    }

    #[test]
    fn report_assembles() {
        let inp = input(1.0, 0.5, 0.25, 0.7, 1.9);
        let rep = concurrence_report(&inp).unwrap();
        assert!(rep.eta_full < 1e-10);
        assert!(rep.eta_postselected > 0.0 && rep.eta_postselected <= 1.0 + 1e-12);
        assert_eq!(rep.sector_ll, Some(0.0));
        assert_eq!(rep.sector_rr, Some(0.0));
        assert!((rep.sector_lr.unwrap() - rep.eta_postselected).abs() < 1e-10);
        assert!(rep.gamma_norm > 0.0);
    }
}
