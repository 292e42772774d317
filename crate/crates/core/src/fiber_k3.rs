//! Fiberwise Mukai-vector arithmetic on a K3 fibration `X → B`.
//!
//! A sheaf on a fiber with Mukai vector `v = (r, L_t, s)` has Hilbert
//! polynomial `P(m) = ½ r H_t² m² + L_t·H_t m + (r + s)`. The relative moduli
//! space is fine, three-dimensional and equidimensional over `B` when
//! `gcd(r H_t², a(L_t), r + s) = 1` and `v² = 0`, where
//! `a(L_t) = L_t·H_t − ½ r H_t²`.

use num::Zero;
use thiserror::Error;

use crate::chow::{ChowError, IntersectionRing, RingElement};
use crate::rational::{frac, gcd_all, q, to_i64, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiberError {
    #[error(transparent)]
    Chow(#[from] ChowError),
    #[error("fiber class does not square to zero: f·f·{divisor} = {value}")]
    FiberNotIsotropic { divisor: String, value: i64 },
    #[error("rank must be positive, got {0}")]
    InvalidRank(i64),
    #[error("a(L_t) = {0} is not an integer")]
    NonIntegralA(Rational),
}

/// Fibration data: the ring of `X`, the fiber class `f` and the genus of `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibrationGeometry {
    ring: IntersectionRing,
    fiber: Vec<i64>,
    base_genus: u32,
}

impl FibrationGeometry {
    pub fn new(ring: IntersectionRing, fiber: Vec<i64>, base_genus: u32) -> Result<Self, FiberError> {
        let f = ring.divisor(&fiber)?;
        let ff = ring.mul(&f, &f)?;
        for (i, name) in ring.names().iter().enumerate() {
            let v = &ff.deg4[i];
            if !v.is_zero() {
                return Err(FiberError::FiberNotIsotropic {
                    divisor: name.clone(),
                    value: to_i64(v).unwrap_or(i64::MAX),
                });
            }
        }
        Ok(Self {
            ring,
            fiber,
            base_genus,
        })
    }

    pub fn ring(&self) -> &IntersectionRing {
        &self.ring
    }

    pub fn fiber_coefficients(&self) -> &[i64] {
        &self.fiber
    }

    pub fn fiber_class(&self) -> RingElement {
        self.ring.divisor(&self.fiber).expect("validated on construction")
    }

    pub fn base_genus(&self) -> u32 {
        self.base_genus
    }

    /// `α = Td₁(B) = 1 − g_B`.
    pub fn alpha(&self) -> i64 {
        1 - i64::from(self.base_genus)
    }

    /// `D1·D2·f` for integer divisors.
    pub(crate) fn fiber_pairing(&self, d1: &RingElement, d2: &RingElement) -> Result<Rational, ChowError> {
        let prod = self.ring.mul(d1, d2)?;
        Ok(self.ring.integrate(&self.ring.mul(&prod, &self.fiber_class())?))
    }
}

/// Intersection numbers of `L` and `H` restricted to a fiber.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FiberRestriction {
    /// `H_t² = H²·f`
    pub ht2: i64,
    /// `L_t·H_t = L·H·f`
    pub lt_ht: i64,
    /// `L_t² = L²·f`
    pub lt2: i64,
}

impl FiberRestriction {
    pub fn new(ht2: i64, lt_ht: i64, lt2: i64) -> Self {
        Self { ht2, lt_ht, lt2 }
    }
}

pub fn restrict_to_fiber(l: &[i64], h: &[i64], fib: &FibrationGeometry) -> Result<FiberRestriction, FiberError> {
    let ring = fib.ring();
    let l = ring.divisor(l)?;
    let h = ring.divisor(h)?;
    let int = |x: Rational| to_i64(&x).expect("integer divisors have integer intersections");
    Ok(FiberRestriction {
        ht2: int(fib.fiber_pairing(&h, &h)?),
        lt_ht: int(fib.fiber_pairing(&l, &h)?),
        lt2: int(fib.fiber_pairing(&l, &l)?),
    })
}

/// Mukai vector `(r, L_t, s)` on a fiber, with `s = ch₂ + r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MukaiVector {
    pub r: i64,
    pub restriction: FiberRestriction,
    pub s: i64,
}

impl MukaiVector {
    pub fn new(r: i64, restriction: FiberRestriction, s: i64) -> Result<Self, FiberError> {
        if r <= 0 {
            return Err(FiberError::InvalidRank(r));
        }
        Ok(Self { r, restriction, s })
    }

    /// `a(L_t) = L_t·H_t − ½ r H_t²`, possibly half-integral.
    pub fn a(&self) -> Rational {
        q(self.restriction.lt_ht) - frac(self.r * self.restriction.ht2, 2)
    }
}

/// `v² = L_t² − 2rs`.
pub fn mukai_square(v: &MukaiVector) -> i64 {
    v.restriction.lt2 - 2 * v.r * v.s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertPolynomial {
    /// `½ r H_t²`
    pub quadratic: Rational,
    /// `L_t·H_t`
    pub linear: i64,
    /// `r + s`
    pub constant: i64,
    /// Coefficients `(r H_t², a(L_t), r + s)` of `r H_t² C(m+1, 2) + a(L_t) m + (r + s)`.
    pub binomial: (i64, Rational, i64),
}

impl HilbertPolynomial {
    pub fn eval(&self, m: i64) -> Rational {
        &self.quadratic * q(m * m) + q(self.linear * m + self.constant)
    }
}

pub fn hilbert_polynomial(v: &MukaiVector) -> Result<HilbertPolynomial, FiberError> {
    if v.r <= 0 {
        return Err(FiberError::InvalidRank(v.r));
    }
    let ht2 = v.restriction.ht2;
    Ok(HilbertPolynomial {
        quadratic: frac(v.r * ht2, 2),
        linear: v.restriction.lt_ht,
        constant: v.r + v.s,
        binomial: (v.r * ht2, v.a(), v.r + v.s),
    })
}

/// Outcome of the fine relative moduli test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AdmissibilityVerdict {
    /// `(r H_t², a(L_t), s + r)`
    pub gcd_triple: (i64, i64, i64),
    pub gcd: i64,
    pub mukai_square: i64,
}

impl AdmissibilityVerdict {
    pub fn coprime(&self) -> bool {
        self.gcd == 1
    }

    pub fn isotropic(&self) -> bool {
        self.mukai_square == 0
    }

    /// Numerically admissible. Existence of a stable sheaf on some fiber is a
    /// hypothesis and is not checked here.
    pub fn pass(&self) -> bool {
        self.coprime() && self.isotropic()
    }
}

pub fn fine_moduli_check(v: &MukaiVector) -> Result<AdmissibilityVerdict, FiberError> {
    if v.r <= 0 {
        return Err(FiberError::InvalidRank(v.r));
    }
    let a_q = v.a();
    let a = to_i64(&a_q).ok_or(FiberError::NonIntegralA(a_q))?;
    let triple = (v.r * v.restriction.ht2, a, v.s + v.r);
    Ok(AdmissibilityVerdict {
        gcd_triple: triple,
        gcd: gcd_all(&[triple.0, triple.1, triple.2]),
        mukai_square: mukai_square(v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chow::{ring_from_spec, IntersectionRingSpec};
    use proptest::prelude::*;

    fn octic_fibration() -> FibrationGeometry {
        let spec = IntersectionRingSpec::threefold_from_entries(["H", "l"], [([0, 0, 0], 8), ([0, 0, 1], 4)]).unwrap();
        FibrationGeometry::new(ring_from_spec(&spec).unwrap(), vec![0, 1], 0).unwrap()
    }

    #[test]
    fn restriction_examples() {
        let fib = octic_fibration();
        let h = [1, 0];
        assert_eq!(
            restrict_to_fiber(&[1, 0], &h, &fib).unwrap(),
            FiberRestriction::new(4, 4, 4)
        );
        assert_eq!(
            restrict_to_fiber(&[2, 3], &h, &fib).unwrap(),
            FiberRestriction::new(4, 8, 16)
        );
        assert_eq!(
            restrict_to_fiber(&[0, 0], &h, &fib).unwrap(),
            FiberRestriction::new(4, 0, 0)
        );
        assert!(matches!(
            restrict_to_fiber(&[1], &h, &fib),
            Err(FiberError::Chow(ChowError::RingMismatch { .. }))
        ));
    }

    #[test]
    fn fiber_must_be_isotropic() {
        let spec = IntersectionRingSpec::threefold_from_entries(["H", "l"], [([0, 0, 0], 8), ([0, 0, 1], 4)]).unwrap();
        let err = FibrationGeometry::new(ring_from_spec(&spec).unwrap(), vec![1, 0], 0).unwrap_err();
        assert!(matches!(err, FiberError::FiberNotIsotropic { .. }));
    }

    #[test]
    fn alpha_from_base_genus() {
        let fib = octic_fibration();
        assert_eq!(fib.alpha(), 1);
        let elliptic = FibrationGeometry::new(fib.ring().clone(), vec![0, 1], 1).unwrap();
        assert_eq!(elliptic.alpha(), 0);
    }

    #[test]
    fn mukai_square_examples() {
        let v = |r, lt2, s| MukaiVector::new(r, FiberRestriction::new(0, 0, lt2), s).unwrap();
        assert_eq!(mukai_square(&v(2, 4, 1)), 0);
        assert_eq!(mukai_square(&v(1, 0, 0)), 0);
        assert_eq!(mukai_square(&v(2, -12, -3)), 0);
    }

    #[test]
    fn hilbert_polynomial_examples() {
        let p = hilbert_polynomial(&MukaiVector::new(2, FiberRestriction::new(4, 4, 4), 1).unwrap()).unwrap();
        assert_eq!((p.quadratic.clone(), p.linear, p.constant), (q(4), 4, 3));
        assert_eq!(p.binomial, (8, q(0), 3));
        let p = hilbert_polynomial(&MukaiVector::new(1, FiberRestriction::new(2, 0, 0), -1).unwrap()).unwrap();
        assert_eq!((p.quadratic.clone(), p.linear, p.constant), (q(1), 0, 0));
        assert_eq!(p.binomial.1, q(-1));

        assert_eq!(
            MukaiVector::new(0, FiberRestriction::new(4, 4, 4), 1).unwrap_err(),
            FiberError::InvalidRank(0)
        );
        let bad = MukaiVector {
            r: 0,
            restriction: FiberRestriction::new(4, 4, 4),
            s: 1,
        };
        assert_eq!(hilbert_polynomial(&bad).unwrap_err(), FiberError::InvalidRank(0));
    }

    #[test]
    fn admissibility_examples() {
        let fib = octic_fibration();
        let res = restrict_to_fiber(&[1, 0], &[1, 0], &fib).unwrap();
        let pass = fine_moduli_check(&MukaiVector::new(2, res, 1).unwrap()).unwrap();
        assert_eq!(pass.gcd_triple, (8, 0, 3));
        assert!(pass.coprime() && pass.isotropic() && pass.pass());

        let fail = fine_moduli_check(&MukaiVector::new(2, res, 2).unwrap()).unwrap();
        assert_eq!(fail.mukai_square, -4);
        assert!(!fail.pass());

        // reflexive K3: h² = 2, l·h = 0, l² = -12, v = (2, l, -3)
        let reflexive = MukaiVector::new(2, FiberRestriction::new(2, 0, -12), -3).unwrap();
        assert_eq!(reflexive.a(), q(-2));
        let verdict = fine_moduli_check(&reflexive).unwrap();
        assert_eq!(verdict.gcd_triple, (4, -2, -1));
        assert!(verdict.pass());
    }

    #[test]
    fn half_integral_a_is_an_error() {
        let v = MukaiVector::new(1, FiberRestriction::new(3, 0, 0), 0).unwrap();
        assert_eq!(
            fine_moduli_check(&v).unwrap_err(),
            FiberError::NonIntegralA(frac(-3, 2))
        );
    }

    proptest! {
        #[test]
        fn mukai_pairing_symmetric_in_r_and_s(r in 1i64..50, s in 1i64..50, lt2 in -100i64..100) {
            let res = FiberRestriction::new(2, 0, lt2);
            let v = MukaiVector::new(r, res, s).unwrap();
            let w = MukaiVector::new(s, res, r).unwrap();
            prop_assert_eq!(mukai_square(&v), mukai_square(&w));
        }

        #[test]
        fn hilbert_polynomial_at_zero(r in 1i64..20, ht2 in 0i64..20, lt_ht in -20i64..20, s in -20i64..20) {
            let v = MukaiVector::new(r, FiberRestriction::new(ht2, lt_ht, 0), s).unwrap();
            prop_assert_eq!(hilbert_polynomial(&v).unwrap().eval(0), q(r + s));
        }

        #[test]
        fn binomial_form_agrees(r in 1i64..20, ht2 in 0i64..20, lt_ht in -20i64..20, s in -20i64..20, m in -10i64..10) {
            let v = MukaiVector::new(r, FiberRestriction::new(ht2, lt_ht, 0), s).unwrap();
            let p = hilbert_polynomial(&v).unwrap();
            let (c2, a, c0) = p.binomial.clone();
            let binom = q(c2) * frac(m * (m + 1), 2) + a * q(m) + q(c0);
            prop_assert_eq!(p.eval(m), binom);
        }

        #[test]
        fn fiber_twists_do_not_change_restriction(x in -5i64..5, y in -5i64..5, c in -5i64..5) {
            let fib = octic_fibration();
            let base = restrict_to_fiber(&[x, y], &[1, 0], &fib).unwrap();
            let twisted = restrict_to_fiber(&[x, y + c], &[1, 0], &fib).unwrap();
            prop_assert_eq!(base, twisted);
        }
    }
}
