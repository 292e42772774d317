use crate::chow::{IntersectionRingSpec, ProductElement, ProductRing};
use crate::fiber_k3::FibrationGeometry;
use crate::rational::{frac, q, Rational};

use super::{grr_transform, twist, ChernCharacter, Correspondence, SpectralDatum, SpectralError};

pub const K3_EULER_NUMBER: i64 = 24;

/// Gram data of the pair `(h, l)` on a reflexive K3 surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReflexiveK3Spec {
    pub h2: i64,
    pub hl: i64,
    pub l2: i64,
}

impl Default for ReflexiveK3Spec {
    fn default() -> Self {
        Self::standard()
    }
}

impl ReflexiveK3Spec {
    pub const fn standard() -> Self {
        Self { h2: 2, hl: 0, l2: -12 }
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        if *self != Self::standard() {
            return Err(SpectralError::NotReflexive {
                h2: self.h2,
                hl: self.hl,
                l2: self.l2,
            });
        }
        Ok(())
    }

    pub fn surface_spec(&self) -> IntersectionRingSpec {
        IntersectionRingSpec::surface(["h", "l"], vec![self.h2, self.hl, self.hl, self.l2])
    }

    /// Coefficients of `e = l + 2h` in the basis `(h, l)`.
    pub fn e_coefficients(&self) -> [i64; 2] {
        [2, 1]
    }
}

/// `X = S × B` with `S` reflexive and `B` elliptic, together with the fibered
/// square `X ×_B X = S × S × B` used to evaluate the transform directly.
///
/// Divisors on `X` are numbered `H = h⊗1`, `L = l⊗1`, `f = 1⊗pt`.
#[derive(Clone, Debug)]
pub struct TrivialFibration {
    k3: ReflexiveK3Spec,
    threefold: ProductRing,
    correspondence: Correspondence,
    fibration: FibrationGeometry,
}

impl TrivialFibration {
    pub const H: [i64; 3] = [1, 0, 0];
    pub const L: [i64; 3] = [0, 1, 0];
    pub const F: [i64; 3] = [0, 0, 1];
    /// `E = L + 2H`.
    pub const E: [i64; 3] = [2, 1, 0];

    pub fn new(k3: ReflexiveK3Spec) -> Result<Self, SpectralError> {
        k3.validate()?;
        let s = k3.surface_spec();
        let b = IntersectionRingSpec::curve();
        let threefold = crate::chow::tensor_product(&[s.clone(), b.clone()])?;
        let square = crate::chow::tensor_product(&[s.clone(), s, b])?;
        let correspondence = Correspondence::new(square, 0, 1)?;
        let names = ["H", "L", "f"].map(String::from).to_vec();
        let ring = threefold.numerical_ring(Some(names))?;
        let fibration = FibrationGeometry::new(ring, Self::F.to_vec(), 1)?;
        Ok(Self {
            k3,
            threefold,
            correspondence,
            fibration,
        })
    }

    pub fn k3(&self) -> ReflexiveK3Spec {
        self.k3
    }

    /// The Künneth ring of `X`.
    pub fn threefold(&self) -> &ProductRing {
        &self.threefold
    }

    pub fn correspondence(&self) -> &Correspondence {
        &self.correspondence
    }

    /// Numerical ring of `X` with fiber class `f` over an elliptic base.
    pub fn fibration(&self) -> &FibrationGeometry {
        &self.fibration
    }

    /// Class `F = pt⊗1` of a fiber of `X → S`.
    pub fn section_fiber(&self) -> ProductElement {
        self.threefold.class(&[(0, "pt")]).expect("S has a point class")
    }

    /// `Td(X/B) = 1 + (χ_top(S)/12)·F`.
    pub fn relative_todd(&self) -> ProductElement {
        self.threefold.one() + self.section_fiber().scale(&frac(K3_EULER_NUMBER, 12))
    }

    /// `ch 𝒪_Δ = δ_*(Td(X/B)⁻¹)` for the relative diagonal in `S × S × B`.
    pub fn diagonal_structure_sheaf(&self) -> Result<ProductElement, SpectralError> {
        let inv = self.threefold.invert(&self.relative_todd())?;
        Ok(self.correspondence.product.push_along_diagonal(0, 1, &inv)?)
    }

    /// `ch 𝒪_X(E)` as a Künneth class.
    pub fn line_bundle_e(&self) -> Result<ProductElement, SpectralError> {
        let [a, b] = self.k3.e_coefficients();
        let e = self.threefold.class(&[(0, "h")])?.scale(&q(a)) + self.threefold.class(&[(0, "l")])?.scale(&q(b));
        Ok(self.threefold.exp(&e)?)
    }

    /// Character of the extension `𝒩` of `𝓘_Δ ⊗ π₂*𝒪(E)` by `π₁*𝒪(E)`.
    pub fn kernel_character(&self) -> Result<ProductElement, SpectralError> {
        let corr = &self.correspondence;
        let prod = &corr.product;
        let e = self.line_bundle_e()?;
        let from_source = corr.pull_from_source(&e)?;
        let from_target = corr.pull_from_target(&e)?;
        let ideal = prod.one() - self.diagonal_structure_sheaf()?;
        Ok(from_source + prod.mul(&ideal, &from_target)?)
    }

    /// Transform of a numerical character on `X` by an arbitrary kernel on the
    /// fibered square, evaluated by pull-back, product and push-forward.
    pub fn transform(&self, ch: &ChernCharacter, kernel: &ProductElement) -> Result<ChernCharacter, SpectralError> {
        let source = self.threefold.from_numerical(ch.as_element())?;
        let out = grr_transform(&source, kernel, &self.relative_todd(), &self.correspondence)?;
        Ok(ChernCharacter(self.threefold.to_numerical(&out)?))
    }

    /// `(CE, HC)` for a curve class given by its pairings with `(H, L, f)`.
    pub fn cover_pairings(&self, cover: &[Rational]) -> Result<(Rational, Rational), SpectralError> {
        let ring = self.fibration.ring();
        let c = ring.curve_class(cover.to_vec())?;
        let e = ring.divisor(&Self::E)?;
        let h = ring.divisor(&Self::H)?;
        Ok((ring.pair(&e.deg2, &c.deg4), ring.pair(&h.deg2, &c.deg4)))
    }

    /// Characters of `i_*𝓛` transformed by `𝒩`, evaluated directly.
    pub fn kernel_transform(&self, sd: &SpectralDatum) -> Result<ChernCharacter, SpectralError> {
        sd.validate()?;
        let c = sd.checked_cover(&self.fibration)?;
        let ch = ChernCharacter(crate::chow::RingElement { deg6: q(sd.chi()), ..c });
        self.transform(&ch, &self.kernel_character()?)
    }

    /// The same character in closed form:
    /// `(2n, nE + (2χ + CE) f, −2nF + χ E·f − [C], −3χ − CE)`.
    pub fn kernel_transform_closed_form(&self, sd: &SpectralDatum) -> Result<ChernCharacter, SpectralError> {
        sd.validate()?;
        let c = sd.checked_cover(&self.fibration)?;
        let ring = self.fibration.ring();
        let (ce, _) = self.cover_pairings(&c.deg4)?;
        let chi = q(sd.chi());
        let n = q(sd.n);
        let e = ring.divisor(&Self::E)?;
        let f = ring.divisor(&Self::F)?;
        let big_f = self.fiber_of_projection();
        let k = q(2) * &chi + &ce;
        let ch1 = e.deg2.iter().zip(&f.deg2).map(|(ei, fi)| &n * ei + &k * fi).collect();
        let ef = ring.divisor_product(&e.deg2, &f.deg2);
        let ch2 = big_f
            .iter()
            .zip(&ef)
            .zip(&c.deg4)
            .map(|((bf, x), ci)| q(-2) * &n * bf + &chi * x - ci)
            .collect();
        Ok(ChernCharacter::new(q(2) * n, ch1, ch2, q(-3) * chi - ce))
    }

    /// Pairing vector of `F = pt⊗1` in the numerical ring.
    fn fiber_of_projection(&self) -> Vec<Rational> {
        self.threefold
            .to_numerical(&self.section_fiber())
            .expect("F lives in the ring")
            .deg4
    }

    /// [`TrivialFibration::kernel_transform`] twisted by `−H`.
    pub fn transform_oracle(&self, sd: &SpectralDatum) -> Result<ChernCharacter, SpectralError> {
        let ring = self.fibration.ring();
        let minus_h = ring.divisor(&Self::H.map(|x| -x))?;
        twist(ring, &self.kernel_transform(sd)?, &minus_h)
    }

    /// Closed-form characters of the spectral transform `Ê`:
    /// `ch₀ = 2n`, `ch₁ = nL + k f` with `k = 2χ + CE`,
    /// `ch₂ = χ·(l⊗pt) − CE·(h⊗pt) − 4nF − [C]`, `ch₃ = −5χ + HC`.
    pub fn spectral_character(&self, sd: &SpectralDatum, ce: i64, hc: i64) -> Result<ChernCharacter, SpectralError> {
        sd.validate()?;
        let c = sd.checked_cover(&self.fibration)?;
        let (ce_found, hc_found) = self.cover_pairings(&c.deg4)?;
        if ce_found != q(ce) {
            return Err(SpectralError::InconsistentPairing {
                name: "[C]·E",
                supplied: ce,
                found: ce_found,
            });
        }
        if hc_found != q(hc) {
            return Err(SpectralError::InconsistentPairing {
                name: "H·[C]",
                supplied: hc,
                found: hc_found,
            });
        }
        let ring = self.fibration.ring();
        let num = |parts: &[(usize, &str)]| -> Result<Vec<Rational>, SpectralError> {
            Ok(self.threefold.to_numerical(&self.threefold.class(parts)?)?.deg4)
        };
        let l_pt = num(&[(0, "l"), (1, "pt")])?;
        let h_pt = num(&[(0, "h"), (1, "pt")])?;
        let big_f = self.fiber_of_projection();
        let chi = q(sd.chi());
        let n = q(sd.n);
        let k = q(2) * &chi + q(ce);
        let l = ring.divisor(&Self::L)?;
        let f = ring.divisor(&Self::F)?;
        let ch1 = l.deg2.iter().zip(&f.deg2).map(|(li, fi)| &n * li + &k * fi).collect();
        let ch2 = (0..ring.rank())
            .map(|i| &chi * &l_pt[i] - q(ce) * &h_pt[i] - q(4) * &n * &big_f[i] - &c.deg4[i])
            .collect();
        Ok(ChernCharacter::new(q(2) * n, ch1, ch2, q(-5) * chi + q(hc)))
    }
}

/// Characters of the spectral transform on a trivial reflexive K3 fibration
/// over an elliptic curve. `ce` and `hc` must agree with the cover class.
pub fn trivial_fibration_chern(
    sd: &SpectralDatum,
    k3: ReflexiveK3Spec,
    base_genus: u32,
    ce: i64,
    hc: i64,
) -> Result<ChernCharacter, SpectralError> {
    if base_genus != 1 {
        return Err(SpectralError::BaseNotElliptic(base_genus));
    }
    TrivialFibration::new(k3)?.spectral_character(sd, ce, hc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::vec_q;

    fn tf() -> TrivialFibration {
        TrivialFibration::new(ReflexiveK3Spec::standard()).unwrap()
    }

    #[test]
    fn rejects_other_gram_data() {
        let bad = ReflexiveK3Spec { h2: 4, hl: 0, l2: -12 };
        assert!(matches!(bad.validate(), Err(SpectralError::NotReflexive { .. })));
        assert!(TrivialFibration::new(bad).is_err());
    }

    #[test]
    fn numerical_ring_of_product() {
        let t = tf();
        let ring = t.fibration().ring();
        // H²·f = h² = 2, L²·f = −12, everything without f vanishes.
        assert_eq!(ring.triple(0, 0, 2), 2);
        assert_eq!(ring.triple(1, 1, 2), -12);
        assert_eq!(ring.triple(0, 1, 2), 0);
        assert_eq!(ring.triple(0, 0, 0), 0);
        assert_eq!(ring.triple(2, 2, 0), 0);
    }

    #[test]
    fn todd_and_line_bundle() {
        let t = tf();
        let td = t.threefold().to_numerical(&t.relative_todd()).unwrap();
        assert_eq!(td.deg0, q(1));
        assert!(td.deg2.iter().all(|x| *x == q(0)));
        assert_eq!(td.deg4, vec_q(&[0, 0, 2]));
        assert_eq!(td.deg6, q(0));

        let e = t.threefold().to_numerical(&t.line_bundle_e().unwrap()).unwrap();
        assert_eq!(e.deg2, vec_q(&[2, 1, 0]));
        // E²/2 = −2F: E²·f/2 = (4·2 − 12)/2 = −2.
        assert_eq!(e.deg4, vec_q(&[0, 0, -2]));
        assert_eq!(e.deg6, q(0));
    }

    #[test]
    fn diagonal_sheaf_is_identity_kernel() {
        let t = tf();
        let kernel = t.diagonal_structure_sheaf().unwrap();
        let ring = t.fibration().ring();
        let ch = ChernCharacter(crate::chow::RingElement {
            deg0: q(3),
            deg2: vec_q(&[1, -2, 5]),
            deg4: vec_q(&[4, 12, -1]),
            deg6: q(7),
        });
        ring.check(ch.as_element()).unwrap();
        assert_eq!(t.transform(&ch, &kernel).unwrap(), ch);
    }

    #[test]
    fn section_cover_example() {
        let t = tf();
        for d in [-3, 0, 2, 9] {
            let sd = SpectralDatum::new(1, 1, d).unwrap().with_cover_class(vec_q(&[0, 0, 1]));
            let ch = trivial_fibration_chern(&sd, ReflexiveK3Spec::standard(), 1, 0, 0).unwrap();
            assert_eq!(*ch.rank(), q(2));
            assert_eq!(ch.ch1(), vec_q(&[0, 1, 2 * d]).as_slice());
            // d·(l⊗pt) − 4F − [C] with l⊗pt ↦ (0, −12, 0), F ↦ (0, 0, 1).
            assert_eq!(ch.ch2(), vec_q(&[0, -12 * d, -5]).as_slice());
            assert_eq!(*ch.ch3(), q(-5 * d));
            assert_eq!(t.transform_oracle(&sd).unwrap(), ch);
        }
    }

    #[test]
    fn rejects_non_elliptic_base_and_bad_pairings() {
        let sd = SpectralDatum::new(1, 1, 0).unwrap().with_cover_class(vec_q(&[0, 0, 1]));
        let k3 = ReflexiveK3Spec::standard();
        assert_eq!(
            trivial_fibration_chern(&sd, k3, 0, 0, 0),
            Err(SpectralError::BaseNotElliptic(0))
        );
        assert!(matches!(
            trivial_fibration_chern(&sd, k3, 1, 3, 0),
            Err(SpectralError::InconsistentPairing { .. })
        ));
    }

    #[test]
    fn lemma_form_matches_direct_evaluation() {
        let t = tf();
        // C = 2F + 3(h⊗pt) − (l⊗pt): pairings (6, 12, 2).
        let sd = SpectralDatum::new(2, 5, 4)
            .unwrap()
            .with_cover_class(vec_q(&[6, 12, 2]));
        assert_eq!(
            t.kernel_transform(&sd).unwrap(),
            t.kernel_transform_closed_form(&sd).unwrap()
        );
        let (ce, hc) = t.cover_pairings(&vec_q(&[6, 12, 2])).unwrap();
        assert_eq!((ce, hc), (q(24), q(6)));
    }
}
