//! Chern characters of spectral sheaves.
//!
//! A spectral datum is a curve `C ⊂ Y`, flat of degree `n` over the base, of
//! arithmetic genus `g`, carrying a line bundle of degree `d`. Its transform
//! `Ê` on `X` has characters computed from the kernel contractions
//! ([`spectral_chern_general`]), or in closed form when the kernel is the ideal
//! of the relative diagonal ([`spectral_chern_rank_one`]) or when `X` is a
//! product of a reflexive K3 surface and an elliptic curve
//! ([`trivial_fibration_chern`]). The last case is cross-checked by a direct
//! Grothendieck–Riemann–Roch push-forward in the Künneth ring ([`grr_transform`]).

mod grr;
mod reflexive;

pub use grr::{grr_transform, Correspondence};
pub use reflexive::{trivial_fibration_chern, ReflexiveK3Spec, TrivialFibration, K3_EULER_NUMBER};

use thiserror::Error;

use crate::chow::{ChowError, IntersectionRing, RingElement};
use crate::fiber_k3::{FiberError, FibrationGeometry};
use crate::rational::{frac, one, q, to_i64, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Chow(#[from] ChowError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error("cover degree must be at least 1, got {0}")]
    InvalidDegree(i64),
    #[error("arithmetic genus must be non-negative, got {0}")]
    NegativeGenus(i64),
    #[error("kernel rank must be at least 1, got {0}")]
    InvalidRank(i64),
    #[error("ramification R = {0} is odd, so the character is not integral")]
    OddRamification(i64),
    #[error("kernel contraction G1 = {found} disagrees with n·L - (C·Q)·f = {expected}")]
    InconsistentKernel { expected: String, found: String },
    #[error("the base must be an elliptic curve, got genus {0}")]
    BaseNotElliptic(u32),
    #[error("class has degree {degree}, above the ring truncation {max}")]
    DegreeOverflow { degree: usize, max: usize },
    #[error("a cover class [C] is required")]
    MissingCoverClass,
    #[error("cover class meets the fiber class in {found}, expected n = {expected}")]
    InconsistentCover { expected: i64, found: Rational },
    #[error("supplied {name} = {supplied} disagrees with the cover class, which gives {found}")]
    InconsistentPairing {
        name: &'static str,
        supplied: i64,
        found: Rational,
    },
    #[error("Gram data ({h2}, {hl}, {l2}) is not that of a reflexive K3 surface")]
    NotReflexive { h2: i64, hl: i64, l2: i64 },
}

/// Chern character `(ch₀, ch₁, ch₂, ch₃)` of a sheaf or complex on a threefold.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChernCharacter(pub RingElement);

impl ChernCharacter {
    pub fn new(ch0: Rational, ch1: Vec<Rational>, ch2: Vec<Rational>, ch3: Rational) -> Self {
        Self(RingElement {
            deg0: ch0,
            deg2: ch1,
            deg4: ch2,
            deg6: ch3,
        })
    }

    pub fn rank(&self) -> &Rational {
        &self.0.deg0
    }

    pub fn ch1(&self) -> &[Rational] {
        &self.0.deg2
    }

    pub fn ch2(&self) -> &[Rational] {
        &self.0.deg4
    }

    pub fn ch3(&self) -> &Rational {
        &self.0.deg6
    }

    pub fn as_element(&self) -> &RingElement {
        &self.0
    }

    /// Rank as an integer, if it is one.
    pub fn integral_rank(&self) -> Option<i64> {
        to_i64(self.rank())
    }

    /// `c₂ = ½ c₁² − ch₂`, as a degree-4 pairing vector.
    pub fn c2(&self, ring: &IntersectionRing) -> Result<Vec<Rational>, ChowError> {
        ring.check(&self.0)?;
        let c1_sq = ring.divisor_product(self.ch1(), self.ch1());
        Ok(c1_sq
            .into_iter()
            .zip(self.ch2())
            .map(|(s, ch2)| s * frac(1, 2) - ch2)
            .collect())
    }
}

impl From<RingElement> for ChernCharacter {
    fn from(e: RingElement) -> Self {
        Self(e)
    }
}

/// A character known only in low degree; `None` marks an unspecified component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialCharacter {
    pub ch0: Rational,
    pub ch1: Vec<Rational>,
    pub ch2: Option<Vec<Rational>>,
    pub ch3: Option<Rational>,
}

/// `χ(𝓛) = 1 − g + d` by Riemann–Roch on the cover.
pub fn euler_characteristic(d: i64, g: i64) -> i64 {
    1 - g + d
}

/// Hurwitz ramification `R = 2g − 2 − n(2g_B − 2)` of an `n`-fold cover.
pub fn ramification(g: i64, n: i64, base_genus: i64) -> i64 {
    2 * g - 2 - n * (2 * base_genus - 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RamificationWarning {
    /// `R < 0`: no cover with this genus and degree exists.
    Negative,
    /// `R` odd: impossible for an actual cover.
    Odd,
}

pub fn ramification_warnings(r: i64) -> Vec<RamificationWarning> {
    let mut out = Vec::new();
    if r < 0 {
        out.push(RamificationWarning::Negative);
    }
    if r % 2 != 0 {
        out.push(RamificationWarning::Odd);
    }
    out
}

/// `Td(Y/B) = 1 − α f̂ + c₂(Y)/12 − 2α ϖ`, with `α = 1 − g_B` read from `fib`.
pub fn todd_relative(fib: &FibrationGeometry, c2_over_12: &[Rational]) -> Result<RingElement, SpectralError> {
    let ring = fib.ring();
    let alpha = q(fib.alpha());
    let kappa = ring.curve_class(c2_over_12.to_vec())?;
    let f = fib.fiber_class();
    Ok(RingElement {
        deg0: one(),
        deg2: f.deg2.iter().map(|x| -(x * &alpha)).collect(),
        deg4: kappa.deg4,
        deg6: q(-2) * alpha,
    })
}

/// Spectral data `(n, g, d)` and, optionally, the numerical class of the cover.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpectralDatum {
    pub n: i64,
    pub g: i64,
    pub d: i64,
    pub cover_class: Option<Vec<Rational>>,
}

impl SpectralDatum {
    pub fn new(n: i64, g: i64, d: i64) -> Result<Self, SpectralError> {
        let sd = Self {
            n,
            g,
            d,
            cover_class: None,
        };
        sd.validate()?;
        Ok(sd)
    }

    pub fn with_cover_class(mut self, class: Vec<Rational>) -> Self {
        self.cover_class = Some(class);
        self
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        if self.n < 1 {
            return Err(SpectralError::InvalidDegree(self.n));
        }
        if self.g < 0 {
            return Err(SpectralError::NegativeGenus(self.g));
        }
        Ok(())
    }

    pub fn chi(&self) -> i64 {
        euler_characteristic(self.d, self.g)
    }

    pub fn ramification(&self, base_genus: u32) -> i64 {
        ramification(self.g, self.n, i64::from(base_genus))
    }

    /// The cover class, checked against the ring and against `[C]·f = n`.
    pub fn checked_cover(&self, fib: &FibrationGeometry) -> Result<RingElement, SpectralError> {
        let class = self.cover_class.clone().ok_or(SpectralError::MissingCoverClass)?;
        let ring = fib.ring();
        let c = ring.curve_class(class)?;
        let meets = ring.pair(&fib.fiber_class().deg2, &c.deg4);
        if meets != q(self.n) {
            return Err(SpectralError::InconsistentCover {
                expected: self.n,
                found: meets,
            });
        }
        Ok(c)
    }
}

/// Contractions of the universal sheaf against the cover class.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KernelData {
    /// Fiberwise rank of the universal sheaf.
    pub r: i64,
    /// Divisor `L` restricting to `c₁` of the fiber sheaves.
    pub l: Vec<i64>,
    pub s: i64,
    /// `π_X*(π_Y*[C]·γ¹)`, if known.
    pub g1: Option<Vec<Rational>>,
    /// `π_X*(π_Y*[C]·γ²)` as a degree-4 pairing vector.
    pub g2: Vec<Rational>,
    /// `π_X*(π_Y*[C]·γ³)`.
    pub g3: Rational,
    /// `[C]·Q`.
    pub cq: i64,
}

/// `χ − αn`, which equals `d − R/2` by Hurwitz.
pub fn twist_degree(fib: &FibrationGeometry, sd: &SpectralDatum) -> i64 {
    sd.chi() - fib.alpha() * sd.n
}

/// The integer `k` in `c₁(Ê) = nL + k f`.
pub fn fiber_degree_k(fib: &FibrationGeometry, sd: &SpectralDatum, kd: &KernelData) -> i64 {
    twist_degree(fib, sd) * kd.r - kd.cq
}

/// `c₁` computed from the contraction `G¹`: `G¹ + (χ − αn) r f`.
pub fn c1_from_contraction(fib: &FibrationGeometry, sd: &SpectralDatum, kd: &KernelData) -> Option<Vec<Rational>> {
    let g1 = kd.g1.as_ref()?;
    let t = q(twist_degree(fib, sd) * kd.r);
    let f = fib.fiber_class();
    Some(g1.iter().zip(&f.deg2).map(|(g, fi)| g + &t * fi).collect())
}

pub fn spectral_chern_general(
    fib: &FibrationGeometry,
    sd: &SpectralDatum,
    kd: &KernelData,
) -> Result<ChernCharacter, SpectralError> {
    sd.validate()?;
    if kd.r < 1 {
        return Err(SpectralError::InvalidRank(kd.r));
    }
    let ring = fib.ring();
    let l = ring.divisor(&kd.l)?;
    let g2 = ring.curve_class(kd.g2.clone())?;
    let f = fib.fiber_class();
    let t = q(twist_degree(fib, sd));
    let n = q(sd.n);
    let k = q(fiber_degree_k(fib, sd, kd));

    let ch1: Vec<Rational> = l.deg2.iter().zip(&f.deg2).map(|(li, fi)| &n * li + &k * fi).collect();
    if let Some(g1) = &kd.g1 {
        ring.divisor_q(g1.clone())?;
        let from_g1 = c1_from_contraction(fib, sd, kd).expect("g1 present");
        if from_g1 != ch1 {
            let expected: Vec<Rational> = ch1.iter().zip(&f.deg2).map(|(c, fi)| c - &t * q(kd.r) * fi).collect();
            return Err(SpectralError::InconsistentKernel {
                expected: format_vec(&expected),
                found: format_vec(g1),
            });
        }
    }
    let lf = ring.divisor_product(&l.deg2, &f.deg2);
    let ch2 = g2.deg4.iter().zip(lf).map(|(g, x)| g + &t * x).collect();
    let ch3 = &kd.g3 + &t * q(kd.s - kd.r);
    Ok(ChernCharacter::new(q(kd.r * sd.n), ch1, ch2, ch3))
}

fn format_vec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(", "))
}

/// Characters for the kernel `𝓘_Δ` of the relative diagonal:
/// `(n, (d − R/2) f, −[C], d − R/2 − n(g_B − 1))`.
pub fn spectral_chern_rank_one(fib: &FibrationGeometry, sd: &SpectralDatum) -> Result<ChernCharacter, SpectralError> {
    sd.validate()?;
    let cover = sd.checked_cover(fib)?;
    let r = sd.ramification(fib.base_genus());
    if r % 2 != 0 {
        return Err(SpectralError::OddRamification(r));
    }
    let degree = sd.d - r / 2;
    let f = fib.fiber_class();
    let base = i64::from(fib.base_genus());
    Ok(ChernCharacter::new(
        q(sd.n),
        f.deg2.iter().map(|x| x * q(degree)).collect(),
        cover.deg4.iter().map(|x| -x).collect(),
        q(degree - sd.n * (base - 1)),
    ))
}

/// `ch · exp(D)`.
pub fn twist(
    ring: &IntersectionRing,
    ch: &ChernCharacter,
    divisor: &RingElement,
) -> Result<ChernCharacter, SpectralError> {
    let e = ring.exp(divisor)?;
    Ok(ChernCharacter(ring.mul(&ch.0, &e)?))
}

/// `ch(Ê*) = n + (R/2 − d) f` through degree 2. Higher terms are left unspecified.
pub fn dual_rank_one_low_degree(
    fib: &FibrationGeometry,
    sd: &SpectralDatum,
) -> Result<PartialCharacter, SpectralError> {
    sd.validate()?;
    let r = sd.ramification(fib.base_genus());
    if r % 2 != 0 {
        return Err(SpectralError::OddRamification(r));
    }
    let coeff = q(r / 2 - sd.d);
    Ok(PartialCharacter {
        ch0: q(sd.n),
        ch1: fib.fiber_class().deg2.iter().map(|x| x * &coeff).collect(),
        ch2: None,
        ch3: None,
    })
}

/// `ch(i_*𝓛) = (0, 0, [C], χ ϖ)` for a line bundle on the cover.
pub fn pushforward_line_bundle_character(
    ring: &IntersectionRing,
    sd: &SpectralDatum,
) -> Result<ChernCharacter, SpectralError> {
    let class = sd.cover_class.clone().ok_or(SpectralError::MissingCoverClass)?;
    let c = ring.curve_class(class)?;
    Ok(ChernCharacter(RingElement { deg6: q(sd.chi()), ..c }))
}
