//! Slopes, discriminants and effective polarization bounds.
//!
//! Spectral sheaves are stable with respect to `H₀ + M f` once `M` exceeds
//! `M₀ = (rank²/8)·(B·H₀)·(H₀²·f)`, where `B = 2m c₂ − (m − 1) c₁²` is the
//! Bogomolov discriminant. This module evaluates those quantities exactly and
//! the slope test for extensions of stable sheaves.

use num::{BigInt, Zero};
use thiserror::Error;

use crate::chow::{ChowError, IntersectionRing, RingElement};
use crate::fiber_k3::FibrationGeometry;
use crate::rational::{ceil, frac, q, Rational};
use crate::spectral::{ChernCharacter, KernelData, SpectralDatum, SpectralError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilityError {
    #[error(transparent)]
    Chow(#[from] ChowError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("rank is zero")]
    ZeroRank,
    #[error("rank must be a positive integer, got {0}")]
    InvalidRank(Rational),
    #[error("hypothesis 0 > D²·H₀ ≥ −k fails: D²·H₀ = {value}, k = {k}")]
    HypothesisViolated { value: Rational, k: i64 },
    #[error("bound k must be positive, got {0}")]
    NonPositiveBound(i64),
}

fn positive_rank(ch: &ChernCharacter) -> Result<i64, StabilityError> {
    if ch.rank().is_zero() {
        return Err(StabilityError::ZeroRank);
    }
    match ch.integral_rank() {
        Some(m) if m > 0 => Ok(m),
        _ => Err(StabilityError::InvalidRank(ch.rank().clone())),
    }
}

fn check_divisor(ring: &IntersectionRing, d: &RingElement) -> Result<(), ChowError> {
    ring.check(d)
}

/// `d(F) = c₁·H·f`.
pub fn relative_degree(
    ch: &ChernCharacter,
    h: &RingElement,
    fib: &FibrationGeometry,
) -> Result<Rational, StabilityError> {
    let ring = fib.ring();
    ring.check(ch.as_element())?;
    check_divisor(ring, h)?;
    Ok(ring.triple_product(ch.ch1(), &h.deg2, &fib.fiber_class().deg2))
}

/// `μ_f(F) = d(F) / rk(F)`.
pub fn relative_slope(
    ch: &ChernCharacter,
    h: &RingElement,
    fib: &FibrationGeometry,
) -> Result<Rational, StabilityError> {
    if ch.rank().is_zero() {
        return Err(StabilityError::ZeroRank);
    }
    Ok(relative_degree(ch, h, fib)? / ch.rank())
}

/// `μ_H(F) = c₁·H² / rk(F)`.
pub fn slope(ring: &IntersectionRing, ch: &ChernCharacter, h: &RingElement) -> Result<Rational, StabilityError> {
    ring.check(ch.as_element())?;
    check_divisor(ring, h)?;
    if ch.rank().is_zero() {
        return Err(StabilityError::ZeroRank);
    }
    Ok(ring.triple_product(ch.ch1(), &h.deg2, &h.deg2) / ch.rank())
}

/// `B = 2m c₂ − (m − 1) c₁²` as a degree-4 pairing vector, `m = rk`.
pub fn discriminant(ring: &IntersectionRing, ch: &ChernCharacter) -> Result<Vec<Rational>, StabilityError> {
    let m = q(positive_rank(ch)?);
    let c2 = ch.c2(ring)?;
    let c1_sq = ring.divisor_product(ch.ch1(), ch.ch1());
    Ok(c2
        .iter()
        .zip(&c1_sq)
        .map(|(c, s)| q(2) * &m * c - (&m - q(1)) * s)
        .collect())
}

/// `n²L² − 2n(C·Q)(L·f) − 2rn·G²`, the discriminant of a spectral transform
/// written through its kernel data only.
pub fn discriminant_closed_form(
    fib: &FibrationGeometry,
    sd: &SpectralDatum,
    kd: &KernelData,
) -> Result<Vec<Rational>, StabilityError> {
    let ring = fib.ring();
    let l = ring.divisor(&kd.l)?;
    let g2 = ring.curve_class(kd.g2.clone())?;
    let l2 = ring.divisor_product(&l.deg2, &l.deg2);
    let lf = ring.divisor_product(&l.deg2, &fib.fiber_class().deg2);
    let (n, r, cq) = (q(sd.n), q(kd.r), q(kd.cq));
    Ok((0..ring.rank())
        .map(|i| &n * &n * &l2[i] - q(2) * &n * &cq * &lf[i] - q(2) * &r * &n * &g2.deg4[i])
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub discriminant: Vec<Rational>,
    /// `B·H₀`.
    pub bh0: Rational,
    /// `H₀²·f`.
    pub h02f: Rational,
    pub m0: Rational,
    /// Smallest integer `M ≥ M₀`.
    pub m0_ceil: BigInt,
    /// `H₀ + M₀ f`.
    pub polarization: Vec<Rational>,
    /// `B·H₀ < 0`: no polarization in the family makes the sheaf semistable.
    pub bogomolov_violated: bool,
}

impl StabilityReport {
    pub fn pass(&self) -> bool {
        !self.bogomolov_violated
    }
}

/// `M₀ = (rk²/8)·(B·H₀)·(H₀²·f)` and the polarization `H₀ + M₀ f`.
pub fn stability_bound(
    ch: &ChernCharacter,
    h0: &RingElement,
    fib: &FibrationGeometry,
) -> Result<StabilityReport, StabilityError> {
    let ring = fib.ring();
    check_divisor(ring, h0)?;
    let b = discriminant(ring, ch)?;
    let f = fib.fiber_class();
    let bh0 = ring.pair(&h0.deg2, &b);
    let h02f = ring.triple_product(&h0.deg2, &h0.deg2, &f.deg2);
    let m0 = ch.rank() * ch.rank() * frac(1, 8) * &bh0 * &h02f;
    let polarization = h0.deg2.iter().zip(&f.deg2).map(|(h, fi)| h + &m0 * fi).collect();
    Ok(StabilityReport {
        bogomolov_violated: bh0 < q(0),
        m0_ceil: ceil(&m0),
        discriminant: b,
        bh0,
        h02f,
        m0,
        polarization,
    })
}

/// The threshold `(k/2)·(H₀²·f)` beyond which `D·H₀·(H₀ + M f) < 0` is
/// forced, valid when `0 > D²·H₀ ≥ −k`.
pub fn polarization_threshold(
    d: &RingElement,
    k: i64,
    h0: &RingElement,
    fib: &FibrationGeometry,
) -> Result<Rational, StabilityError> {
    if k <= 0 {
        return Err(StabilityError::NonPositiveBound(k));
    }
    let ring = fib.ring();
    check_divisor(ring, d)?;
    check_divisor(ring, h0)?;
    let d2h0 = ring.triple_product(&d.deg2, &d.deg2, &h0.deg2);
    if d2h0 >= q(0) || d2h0 < q(-k) {
        return Err(StabilityError::HypothesisViolated { value: d2h0, k });
    }
    let h02f = ring.triple_product(&h0.deg2, &h0.deg2, &fib.fiber_class().deg2);
    Ok(frac(k, 2) * h02f)
}

/// Slope data of a sheaf: `μ` and a positive integral rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SlopeData {
    pub slope: Rational,
    pub rank: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionVerdict {
    pub mu_e: Rational,
    pub mu_g: Rational,
    pub mu_f: Rational,
    pub rank_e: i64,
    pub rank_g: i64,
    /// `μ(E) + rk(F) / (rk(E) rk(G))`.
    pub bound: Rational,
    /// `μ(G) < bound`.
    pub bound_holds: bool,
    /// `μ(E) < μ(F)`.
    pub slope_increases: bool,
}

impl ExtensionVerdict {
    pub fn pass(&self) -> bool {
        self.bound_holds && self.slope_increases
    }
}

/// The two slope conditions for an extension `0 → E → F → G → 0`, given only
/// slopes and ranks.
pub fn extension_verdict(e: &SlopeData, g: &SlopeData) -> Result<ExtensionVerdict, StabilityError> {
    for rank in [e.rank, g.rank] {
        if rank == 0 {
            return Err(StabilityError::ZeroRank);
        }
        if rank < 0 {
            return Err(StabilityError::InvalidRank(q(rank)));
        }
    }
    let rank_f = e.rank + g.rank;
    let mu_f = (&e.slope * q(e.rank) + &g.slope * q(g.rank)) / q(rank_f);
    let bound = &e.slope + frac(rank_f, e.rank * g.rank);
    Ok(ExtensionVerdict {
        bound_holds: g.slope < bound,
        slope_increases: e.slope < mu_f,
        mu_e: e.slope.clone(),
        mu_g: g.slope.clone(),
        mu_f,
        rank_e: e.rank,
        rank_g: g.rank,
        bound,
    })
}

/// [`extension_verdict`] with slopes `μ_H = c₁·H²/rk` read off characters;
/// `ch(F) = ch(E) + ch(G)`.
pub fn extension_check(
    ring: &IntersectionRing,
    ch_e: &ChernCharacter,
    ch_g: &ChernCharacter,
    h: &RingElement,
) -> Result<ExtensionVerdict, StabilityError> {
    let slope_data = |ch: &ChernCharacter| -> Result<SlopeData, StabilityError> {
        let rank = positive_rank(ch)?;
        Ok(SlopeData {
            slope: slope(ring, ch, h)?,
            rank,
        })
    };
    extension_verdict(&slope_data(ch_e)?, &slope_data(ch_g)?)
}
