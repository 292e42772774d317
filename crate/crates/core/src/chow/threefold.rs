use std::ops::{Add, Neg, Sub};

use num::Zero;

use super::ChowError;
use crate::rational::{frac, one, q, zero, Rational};

/// Raw intersection data of a ring, before validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntersectionForm {
    /// Triple intersection numbers `d_ijk = D_i·D_j·D_k`, dense and row-major.
    Threefold(Vec<i64>),
    /// Gram matrix `D_i·D_j` of a surface, dense and row-major.
    Surface(Vec<i64>),
    /// A curve. It has no divisor classes beyond the point.
    Curve,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionRingSpec {
    pub divisor_names: Vec<String>,
    pub form: IntersectionForm,
}

impl IntersectionRingSpec {
    pub fn threefold<S: Into<String>>(names: impl IntoIterator<Item = S>, triple: Vec<i64>) -> Self {
        Self {
            divisor_names: names.into_iter().map(Into::into).collect(),
            form: IntersectionForm::Threefold(triple),
        }
    }

    /// Builds a dense triple tensor from sparse entries, filling in every
    /// permutation of each entry. Two entries that name permutations of the
    /// same triple with different values are rejected.
    pub fn threefold_from_entries<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        entries: impl IntoIterator<Item = ([usize; 3], i64)>,
    ) -> Result<Self, ChowError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let n = names.len();
        let mut triple = vec![0i64; n * n * n];
        let mut source: Vec<Option<[usize; 3]>> = vec![None; n * n * n];
        for (idx, value) in entries {
            for &i in &idx {
                if i >= n {
                    return Err(ChowError::IndexOutOfRange { index: i, len: n });
                }
            }
            for p in permutations(idx) {
                let flat = (p[0] * n + p[1]) * n + p[2];
                match source[flat] {
                    Some(prev) if triple[flat] != value => {
                        return Err(ChowError::AsymmetricTensor {
                            left: triple_name(&names, prev),
                            left_value: triple[flat],
                            right: triple_name(&names, idx),
                            right_value: value,
                        });
                    }
                    _ => {
                        triple[flat] = value;
                        source[flat] = Some(idx);
                    }
                }
            }
        }
        Ok(Self {
            divisor_names: names,
            form: IntersectionForm::Threefold(triple),
        })
    }

    pub fn surface<S: Into<String>>(names: impl IntoIterator<Item = S>, gram: Vec<i64>) -> Self {
        Self {
            divisor_names: names.into_iter().map(Into::into).collect(),
            form: IntersectionForm::Surface(gram),
        }
    }

    pub fn curve() -> Self {
        Self {
            divisor_names: Vec::new(),
            form: IntersectionForm::Curve,
        }
    }

    /// Complex dimension of the underlying variety.
    pub fn dim(&self) -> usize {
        match self.form {
            IntersectionForm::Threefold(_) => 3,
            IntersectionForm::Surface(_) => 2,
            IntersectionForm::Curve => 1,
        }
    }

    /// Number of divisor basis classes.
    pub fn rank(&self) -> usize {
        self.divisor_names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.divisor_names.iter().position(|n| n == name)
    }
}

fn permutations([a, b, c]: [usize; 3]) -> [[usize; 3]; 6] {
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

fn triple_name(names: &[String], [i, j, k]: [usize; 3]) -> String {
    format!("{}.{}.{}", names[i], names[j], names[k])
}

/// A class in the numerical ring of a threefold.
///
/// Degree-4 classes are stored by their intersection numbers against the
/// divisor basis, and `deg6` is the coefficient of the fundamental class,
/// normalized so that it integrates to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    pub deg0: Rational,
    pub deg2: Vec<Rational>,
    pub deg4: Vec<Rational>,
    pub deg6: Rational,
}

impl RingElement {
    pub fn zero(rank: usize) -> Self {
        Self {
            deg0: zero(),
            deg2: vec![zero(); rank],
            deg4: vec![zero(); rank],
            deg6: zero(),
        }
    }

    pub fn rank(&self) -> usize {
        self.deg2.len()
    }

    pub fn is_zero(&self) -> bool {
        self.deg0.is_zero()
            && self.deg2.iter().all(Zero::is_zero)
            && self.deg4.iter().all(Zero::is_zero)
            && self.deg6.is_zero()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            deg0: &self.deg0 * c,
            deg2: self.deg2.iter().map(|x| x * c).collect(),
            deg4: self.deg4.iter().map(|x| x * c).collect(),
            deg6: &self.deg6 * c,
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        assert_eq!(self.rank(), other.rank(), "ring elements from different rings");
        Self {
            deg0: f(&self.deg0, &other.deg0),
            deg2: self.deg2.iter().zip(&other.deg2).map(|(a, b)| f(a, b)).collect(),
            deg4: self.deg4.iter().zip(&other.deg4).map(|(a, b)| f(a, b)).collect(),
            deg6: f(&self.deg6, &other.deg6),
        }
    }
}

impl Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: &RingElement) -> RingElement {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Add for RingElement {
    type Output = RingElement;
    fn add(self, rhs: RingElement) -> RingElement {
        &self + &rhs
    }
}

impl Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: &RingElement) -> RingElement {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Sub for RingElement {
    type Output = RingElement;
    fn sub(self, rhs: RingElement) -> RingElement {
        &self - &rhs
    }
}

impl Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        self.scale(&q(-1))
    }
}

impl Neg for RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        -&self
    }
}

/// Integral over the fundamental class.
pub fn integrate(a: &RingElement) -> Rational {
    a.deg6.clone()
}

/// A validated threefold intersection ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionRing {
    names: Vec<String>,
    raw: Vec<i64>,
    triple: Vec<Rational>,
}

pub fn ring_from_spec(spec: &IntersectionRingSpec) -> Result<IntersectionRing, ChowError> {
    IntersectionRing::from_spec(spec)
}

impl IntersectionRing {
    pub fn from_spec(spec: &IntersectionRingSpec) -> Result<Self, ChowError> {
        let raw = match &spec.form {
            IntersectionForm::Threefold(t) => t,
            _ => {
                return Err(ChowError::DimensionMismatch {
                    expected: 3,
                    found: spec.dim(),
                })
            }
        };
        let n = spec.rank();
        if raw.len() != n * n * n {
            return Err(ChowError::DimensionMismatch {
                expected: n * n * n,
                found: raw.len(),
            });
        }
        let at = |i: usize, j: usize, k: usize| raw[(i * n + j) * n + k];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for p in permutations([i, j, k]) {
                        if at(p[0], p[1], p[2]) != at(i, j, k) {
                            return Err(ChowError::AsymmetricTensor {
                                left: triple_name(&spec.divisor_names, [i, j, k]),
                                left_value: at(i, j, k),
                                right: triple_name(&spec.divisor_names, p),
                                right_value: at(p[0], p[1], p[2]),
                            });
                        }
                    }
                }
            }
        }
        Ok(Self {
            names: spec.divisor_names.clone(),
            raw: raw.clone(),
            triple: raw.iter().map(|&v| q(v)).collect(),
        })
    }

    pub fn spec(&self) -> IntersectionRingSpec {
        IntersectionRingSpec::threefold(self.names.clone(), self.raw.clone())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, ChowError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ChowError::UnknownClass(name.to_string()))
    }

    /// `D_i·D_j·D_k`.
    pub fn triple(&self, i: usize, j: usize, k: usize) -> i64 {
        let n = self.rank();
        self.raw[(i * n + j) * n + k]
    }

    pub fn zero(&self) -> RingElement {
        RingElement::zero(self.rank())
    }

    pub fn one(&self) -> RingElement {
        self.scalar(one())
    }

    pub fn scalar(&self, c: Rational) -> RingElement {
        RingElement { deg0: c, ..self.zero() }
    }

    /// The fundamental class ϖ.
    pub fn point(&self) -> RingElement {
        RingElement {
            deg6: one(),
            ..self.zero()
        }
    }

    pub fn basis_divisor(&self, i: usize) -> RingElement {
        let mut d = self.zero();
        d.deg2[i] = one();
        d
    }

    pub fn divisor(&self, coeffs: &[i64]) -> Result<RingElement, ChowError> {
        self.divisor_q(coeffs.iter().map(|&c| q(c)).collect())
    }

    pub fn divisor_q(&self, coeffs: Vec<Rational>) -> Result<RingElement, ChowError> {
        self.check_len(coeffs.len())?;
        Ok(RingElement {
            deg2: coeffs,
            ..self.zero()
        })
    }

    /// A degree-4 class given by its intersection numbers with the basis divisors.
    pub fn curve_class(&self, pairings: Vec<Rational>) -> Result<RingElement, ChowError> {
        self.check_len(pairings.len())?;
        Ok(RingElement {
            deg4: pairings,
            ..self.zero()
        })
    }

    fn check_len(&self, found: usize) -> Result<(), ChowError> {
        if found == self.rank() {
            Ok(())
        } else {
            Err(ChowError::RingMismatch {
                expected: self.rank(),
                found,
            })
        }
    }

    pub fn check(&self, a: &RingElement) -> Result<(), ChowError> {
        self.check_len(a.deg2.len())?;
        self.check_len(a.deg4.len())
    }

    /// Pairing vector of the degree-4 class `x·y` for divisors `x`, `y`.
    pub fn divisor_product(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let n = self.rank();
        let mut out = vec![zero(); n];
        for (i, xi) in x.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (j, yj) in y.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                let w = xi * yj;
                for (k, slot) in out.iter_mut().enumerate() {
                    let t = &self.triple[(i * n + j) * n + k];
                    if !t.is_zero() {
                        *slot += &w * t;
                    }
                }
            }
        }
        out
    }

    /// Intersection number of a divisor with a degree-4 class.
    pub fn pair(&self, divisor: &[Rational], curve: &[Rational]) -> Rational {
        divisor.iter().zip(curve).map(|(a, b)| a * b).sum()
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> Result<RingElement, ChowError> {
        self.check(a)?;
        self.check(b)?;
        let deg2 = a
            .deg2
            .iter()
            .zip(&b.deg2)
            .map(|(x, y)| &a.deg0 * y + &b.deg0 * x)
            .collect();
        let cross = self.divisor_product(&a.deg2, &b.deg2);
        let deg4 = a
            .deg4
            .iter()
            .zip(&b.deg4)
            .zip(cross)
            .map(|((x, y), c)| &a.deg0 * y + &b.deg0 * x + c)
            .collect();
        let deg6 = &a.deg0 * &b.deg6 + &b.deg0 * &a.deg6 + self.pair(&a.deg2, &b.deg4) + self.pair(&b.deg2, &a.deg4);
        Ok(RingElement {
            deg0: &a.deg0 * &b.deg0,
            deg2,
            deg4,
            deg6,
        })
    }

    pub fn integrate(&self, a: &RingElement) -> Rational {
        integrate(a)
    }

    /// `D1·D2·D3` for three divisors.
    pub fn triple_product(&self, d1: &[Rational], d2: &[Rational], d3: &[Rational]) -> Rational {
        self.pair(d3, &self.divisor_product(d1, d2))
    }

    /// `exp(a) = 1 + a + a²/2 + a³/6` for a class without degree-0 part.
    pub fn exp(&self, a: &RingElement) -> Result<RingElement, ChowError> {
        self.check(a)?;
        if !a.deg0.is_zero() {
            return Err(ChowError::NotNilpotent);
        }
        let a2 = self.mul(a, a)?;
        let a3 = self.mul(&a2, a)?;
        Ok(&(&(&self.one() + a) + &a2.scale(&frac(1, 2))) + &a3.scale(&frac(1, 6)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::vec_q;

    /// The degree-8 hypersurface example: H³=8, H²l=4, Hl²=0, l³=0.
    fn octic() -> IntersectionRing {
        let spec = IntersectionRingSpec::threefold_from_entries(
            ["H", "l"],
            [([0, 0, 0], 8), ([0, 0, 1], 4), ([0, 1, 1], 0), ([1, 1, 1], 0)],
        )
        .unwrap();
        ring_from_spec(&spec).unwrap()
    }

    #[test]
    fn octic_ring_is_valid() {
        let ring = octic();
        assert_eq!(ring.triple(0, 0, 0), 8);
        assert_eq!(ring.triple(1, 0, 0), 4);
        assert_eq!(ring.triple(0, 1, 0), 4);
        assert_eq!(ring.triple(1, 1, 0), 0);
    }

    #[test]
    fn asymmetric_tensor_rejected() {
        let mut t = vec![0i64; 8];
        t[0] = 8;
        t[1] = 4; // H.H.l
        t[2] = 3; // H.l.H
        t[4] = 4; // l.H.H
        let err = ring_from_spec(&IntersectionRingSpec::threefold(["H", "l"], t)).unwrap_err();
        assert!(matches!(err, ChowError::AsymmetricTensor { .. }), "{err}");

        let err =
            IntersectionRingSpec::threefold_from_entries(["H", "l"], [([0, 0, 1], 4), ([0, 1, 0], 3)]).unwrap_err();
        match err {
            ChowError::AsymmetricTensor { left, right, .. } => {
                assert_eq!(left, "H.H.l");
                assert_eq!(right, "H.l.H");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn empty_ring_is_valid() {
        let ring = ring_from_spec(&IntersectionRingSpec::threefold(Vec::<String>::new(), vec![])).unwrap();
        assert_eq!(ring.rank(), 0);
        assert_eq!(integrate(&ring.point()), one());
    }

    #[test]
    fn wrong_tensor_length() {
        let err = ring_from_spec(&IntersectionRingSpec::threefold(["H"], vec![1, 2])).unwrap_err();
        assert_eq!(err, ChowError::DimensionMismatch { expected: 1, found: 2 });
    }

    #[test]
    fn surface_spec_is_not_a_threefold() {
        let err = ring_from_spec(&IntersectionRingSpec::surface(["h"], vec![2])).unwrap_err();
        assert_eq!(err, ChowError::DimensionMismatch { expected: 3, found: 2 });
    }

    #[test]
    fn products_in_octic_ring() {
        let ring = octic();
        let h = ring.divisor(&[1, 0]).unwrap();
        let l = ring.divisor(&[0, 1]).unwrap();
        let hh = ring.mul(&h, &h).unwrap();
        assert_eq!(hh.deg4, vec_q(&[8, 4]));
        let hl = ring.mul(&h, &l).unwrap();
        assert_eq!(hl.deg4, vec_q(&[4, 0]));
        assert_eq!(integrate(&ring.mul(&hh, &h).unwrap()), q(8));
        let ll = ring.mul(&l, &l).unwrap();
        assert_eq!(integrate(&ring.mul(&ll, &l).unwrap()), q(0));
        assert_eq!(ring.mul(&ring.one(), &hl).unwrap(), hl);
    }

    #[test]
    fn mismatched_element_rejected() {
        let ring = octic();
        let alien = RingElement::zero(3);
        assert_eq!(
            ring.mul(&ring.one(), &alien).unwrap_err(),
            ChowError::RingMismatch { expected: 2, found: 3 }
        );
    }

    #[test]
    fn exponential_of_divisor() {
        let ring = octic();
        let h = ring.divisor(&[1, 0]).unwrap();
        let e = ring.exp(&h).unwrap();
        assert_eq!(e.deg0, one());
        assert_eq!(e.deg4, vec_q(&[4, 2]));
        assert_eq!(e.deg6, frac(8, 6));
        assert_eq!(ring.exp(&ring.one()).unwrap_err(), ChowError::NotNilpotent);
    }
}
