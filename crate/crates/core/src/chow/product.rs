use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num::{One, Zero};

use super::linalg::solve;
use super::threefold::{IntersectionForm, IntersectionRing, IntersectionRingSpec, RingElement};
use super::ChowError;
use crate::rational::{q, Rational};

/// A validated surface or curve ring used as a Künneth factor.
///
/// Basis indices: `0` is the unit, `1..=m` are the divisors (surfaces only)
/// and `m + 1` is the point class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorRing {
    spec: IntersectionRingSpec,
    gram: Vec<Rational>,
    inverse_gram: Option<Vec<Rational>>,
}

impl FactorRing {
    pub fn from_spec(spec: &IntersectionRingSpec) -> Result<Self, ChowError> {
        let m = spec.rank();
        let gram = match &spec.form {
            IntersectionForm::Surface(g) => {
                if g.len() != m * m {
                    return Err(ChowError::DimensionMismatch {
                        expected: m * m,
                        found: g.len(),
                    });
                }
                for i in 0..m {
                    for j in 0..i {
                        if g[i * m + j] != g[j * m + i] {
                            return Err(ChowError::AsymmetricTensor {
                                left: format!("{}.{}", spec.divisor_names[i], spec.divisor_names[j]),
                                left_value: g[i * m + j],
                                right: format!("{}.{}", spec.divisor_names[j], spec.divisor_names[i]),
                                right_value: g[j * m + i],
                            });
                        }
                    }
                    let diag = g[i * m + i];
                    if diag % 2 != 0 {
                        return Err(ChowError::OddDiagonal {
                            name: spec.divisor_names[i].clone(),
                            value: diag,
                        });
                    }
                }
                g.iter().map(|&v| q(v)).collect::<Vec<_>>()
            }
            IntersectionForm::Curve => {
                if m != 0 {
                    return Err(ChowError::DimensionMismatch { expected: 0, found: m });
                }
                Vec::new()
            }
            IntersectionForm::Threefold(_) => return Err(ChowError::DimensionMismatch { expected: 2, found: 3 }),
        };
        let inverse_gram = invert_matrix(&gram, m);
        Ok(Self {
            spec: spec.clone(),
            gram,
            inverse_gram,
        })
    }

    pub fn spec(&self) -> &IntersectionRingSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn basis_len(&self) -> usize {
        self.spec.rank() + 2
    }

    pub fn top(&self) -> usize {
        self.spec.rank() + 1
    }

    pub fn basis_degree(&self, b: usize) -> usize {
        if b == 0 {
            0
        } else if b == self.top() {
            self.dim()
        } else {
            1
        }
    }

    pub fn basis_name(&self, b: usize) -> String {
        if b == 0 {
            "1".to_string()
        } else if b == self.top() {
            "pt".to_string()
        } else {
            self.spec.divisor_names[b - 1].clone()
        }
    }

    pub fn basis_index(&self, name: &str) -> Option<usize> {
        match name {
            "1" => Some(0),
            "pt" => Some(self.top()),
            _ => self.spec.index_of(name).map(|i| i + 1),
        }
    }

    fn mul_basis(&self, a: usize, b: usize) -> Option<(usize, Rational)> {
        let m = self.spec.rank();
        if a == 0 {
            return Some((b, Rational::one()));
        }
        if b == 0 {
            return Some((a, Rational::one()));
        }
        if a <= m && b <= m {
            let g = &self.gram[(a - 1) * m + (b - 1)];
            return (!g.is_zero()).then(|| (self.top(), g.clone()));
        }
        None
    }

    /// Expansion of the Poincaré dual of basis class `b`.
    fn dual(&self, b: usize) -> Result<Vec<(usize, Rational)>, ChowError> {
        let m = self.spec.rank();
        if b == 0 {
            return Ok(vec![(self.top(), Rational::one())]);
        }
        if b == self.top() {
            return Ok(vec![(0, Rational::one())]);
        }
        let inv = self.inverse_gram.as_ref().ok_or(ChowError::DegenerateForm)?;
        Ok((0..m)
            .map(|c| (c + 1, inv[(b - 1) * m + c].clone()))
            .filter(|(_, v)| !v.is_zero())
            .collect())
    }
}

fn invert_matrix(a: &[Rational], m: usize) -> Option<Vec<Rational>> {
    let rows: Vec<Vec<Rational>> = (0..m).map(|i| a[i * m..(i + 1) * m].to_vec()).collect();
    let mut out = vec![Rational::zero(); m * m];
    for col in 0..m {
        let e: Vec<Rational> = (0..m)
            .map(|i| if i == col { Rational::one() } else { Rational::zero() })
            .collect();
        let x = solve(rows.clone(), e)?;
        for (row, v) in x.into_iter().enumerate() {
            out[row * m + col] = v;
        }
    }
    Some(out)
}

/// A class in a Künneth product ring, as a sparse sum of basis monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProductElement {
    terms: BTreeMap<Vec<usize>, Rational>,
}

impl ProductElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(index: Vec<usize>, coeff: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(index, coeff);
        e
    }

    pub fn add_term(&mut self, index: Vec<usize>, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(index).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn coefficient(&self, index: &[usize]) -> Rational {
        self.terms.get(index).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }
}

impl Add for &ProductElement {
    type Output = ProductElement;
    fn add(self, rhs: &ProductElement) -> ProductElement {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }
}

impl Add for ProductElement {
    type Output = ProductElement;
    fn add(self, rhs: ProductElement) -> ProductElement {
        &self + &rhs
    }
}

impl Sub for &ProductElement {
    type Output = ProductElement;
    fn sub(self, rhs: &ProductElement) -> ProductElement {
        self + &(-rhs)
    }
}

impl Sub for ProductElement {
    type Output = ProductElement;
    fn sub(self, rhs: ProductElement) -> ProductElement {
        &self - &rhs
    }
}

impl Neg for &ProductElement {
    type Output = ProductElement;
    fn neg(self) -> ProductElement {
        self.scale(&q(-1))
    }
}

impl Neg for ProductElement {
    type Output = ProductElement;
    fn neg(self) -> ProductElement {
        -&self
    }
}

/// Künneth product of surface and curve rings, truncated above a total degree.
///
/// Only even-degree classes are modelled, so the Künneth sign is always +1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductRing {
    factors: Vec<FactorRing>,
    truncation: usize,
}

pub fn tensor_product(specs: &[IntersectionRingSpec]) -> Result<ProductRing, ChowError> {
    let dim = specs.iter().map(IntersectionRingSpec::dim).sum();
    tensor_product_truncated(specs, dim)
}

pub fn tensor_product_truncated(specs: &[IntersectionRingSpec], truncation: usize) -> Result<ProductRing, ChowError> {
    let factors = specs.iter().map(FactorRing::from_spec).collect::<Result<Vec<_>, _>>()?;
    ProductRing::new(factors, truncation)
}

impl ProductRing {
    pub fn new(factors: Vec<FactorRing>, truncation: usize) -> Result<Self, ChowError> {
        let max = factors.iter().map(FactorRing::dim).sum();
        if truncation > max {
            return Err(ChowError::TruncationTooLarge {
                requested: truncation,
                max,
            });
        }
        Ok(Self { factors, truncation })
    }

    pub fn factors(&self) -> &[FactorRing] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(FactorRing::dim).sum()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn one(&self) -> ProductElement {
        ProductElement::monomial(vec![0; self.factors.len()], Rational::one())
    }

    /// The class of a point, i.e. the top monomial.
    pub fn point(&self) -> ProductElement {
        ProductElement::monomial(self.factors.iter().map(FactorRing::top).collect(), Rational::one())
    }

    pub fn degree(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.factors).map(|(&b, f)| f.basis_degree(b)).sum()
    }

    fn factor(&self, i: usize) -> Result<&FactorRing, ChowError> {
        self.factors.get(i).ok_or(ChowError::IndexOutOfRange {
            index: i,
            len: self.factors.len(),
        })
    }

    pub fn check(&self, a: &ProductElement) -> Result<(), ChowError> {
        for (idx, _) in a.terms() {
            if idx.len() != self.factors.len() {
                return Err(ChowError::RingMismatch {
                    expected: self.factors.len(),
                    found: idx.len(),
                });
            }
            for (&b, f) in idx.iter().zip(&self.factors) {
                if b >= f.basis_len() {
                    return Err(ChowError::IndexOutOfRange {
                        index: b,
                        len: f.basis_len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The pure tensor with the named basis classes in the given factors and
    /// the unit everywhere else, e.g. `[(0, "h"), (1, "pt")]` for `h⊗pt`.
    pub fn class(&self, parts: &[(usize, &str)]) -> Result<ProductElement, ChowError> {
        let mut index = vec![0; self.factors.len()];
        for &(i, name) in parts {
            let f = self.factor(i)?;
            index[i] = f
                .basis_index(name)
                .ok_or_else(|| ChowError::UnknownClass(name.to_string()))?;
        }
        Ok(ProductElement::monomial(index, Rational::one()))
    }

    pub fn mul(&self, a: &ProductElement, b: &ProductElement) -> Result<ProductElement, ChowError> {
        self.check(a)?;
        self.check(b)?;
        let mut out = ProductElement::zero();
        for (ia, ca) in a.terms() {
            'pairs: for (ib, cb) in b.terms() {
                let mut index = Vec::with_capacity(ia.len());
                let mut coeff = ca * cb;
                for ((&x, &y), f) in ia.iter().zip(ib).zip(&self.factors) {
                    match f.mul_basis(x, y) {
                        Some((z, c)) => {
                            index.push(z);
                            coeff *= c;
                        }
                        None => continue 'pairs,
                    }
                }
                if self.degree(&index) <= self.truncation {
                    out.add_term(index, coeff);
                }
            }
        }
        Ok(out)
    }

    /// Integral over the whole product: the coefficient of the top monomial.
    pub fn integrate(&self, a: &ProductElement) -> Rational {
        let top: Vec<usize> = self.factors.iter().map(FactorRing::top).collect();
        a.coefficient(&top)
    }

    /// The part of `a` in total degree `degree`.
    pub fn homogeneous(&self, a: &ProductElement, degree: usize) -> ProductElement {
        let mut out = ProductElement::zero();
        for (k, v) in a.terms() {
            if self.degree(k) == degree {
                out.add_term(k.clone(), v.clone());
            }
        }
        out
    }

    pub fn max_degree(&self, a: &ProductElement) -> Option<usize> {
        a.terms().map(|(k, _)| self.degree(k)).max()
    }

    /// The product of all factors except `i`.
    pub fn without_factor(&self, i: usize) -> Result<ProductRing, ChowError> {
        self.factor(i)?;
        let factors: Vec<FactorRing> = self
            .factors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, f)| f.clone())
            .collect();
        let dim = factors.iter().map(FactorRing::dim).sum::<usize>();
        ProductRing::new(factors, self.truncation.min(dim))
    }

    /// Integration over factor `i`: keeps the terms that are top-dimensional in
    /// that factor and drops the factor. The result lives in `without_factor(i)`.
    pub fn push_forward(&self, i: usize, a: &ProductElement) -> Result<ProductElement, ChowError> {
        let top = self.factor(i)?.top();
        self.check(a)?;
        let mut out = ProductElement::zero();
        for (k, v) in a.terms() {
            if k[i] == top {
                let mut rest = k.clone();
                rest.remove(i);
                out.add_term(rest, v.clone());
            }
        }
        Ok(out)
    }

    /// Pull-back along the projection forgetting factor `i`; `a` lives in
    /// `without_factor(i)`.
    pub fn pull_back(&self, i: usize, a: &ProductElement) -> Result<ProductElement, ChowError> {
        let reduced = self.without_factor(i)?;
        reduced.check(a)?;
        let mut out = ProductElement::zero();
        for (k, v) in a.terms() {
            let mut full = k.clone();
            full.insert(i, 0);
            out.add_term(full, v.clone());
        }
        Ok(out)
    }

    /// Class of the diagonal of two identical factors `i` and `j`:
    /// `Σ_b e_b ⊗ e_b^∨`, with the unit in every other factor.
    pub fn diagonal(&self, i: usize, j: usize) -> Result<ProductElement, ChowError> {
        let fi = self.factor(i)?;
        let fj = self.factor(j)?;
        if i == j || fi.spec() != fj.spec() {
            return Err(ChowError::FactorMismatch { first: i, second: j });
        }
        let mut out = ProductElement::zero();
        for b in 0..fi.basis_len() {
            for (c, w) in fi.dual(b)? {
                let mut index = vec![0; self.factors.len()];
                index[i] = b;
                index[j] = c;
                out.add_term(index, w);
            }
        }
        Ok(out)
    }

    /// `δ_*(β)` for the diagonal embedding identifying factors `i` and `j`,
    /// where `β` lives in `without_factor(j)`.
    pub fn push_along_diagonal(&self, i: usize, j: usize, beta: &ProductElement) -> Result<ProductElement, ChowError> {
        let lifted = self.pull_back(j, beta)?;
        self.mul(&lifted, &self.diagonal(i, j)?)
    }

    pub fn exp(&self, a: &ProductElement) -> Result<ProductElement, ChowError> {
        self.check(a)?;
        if !a.coefficient(&vec![0; self.factors.len()]).is_zero() {
            return Err(ChowError::NotNilpotent);
        }
        let mut out = self.one();
        let mut power = self.one();
        for k in 1..=self.truncation {
            power = self.mul(&power, a)?.scale(&Rational::new(1.into(), (k as i64).into()));
            if power.is_zero() {
                break;
            }
            out = &out + &power;
        }
        Ok(out)
    }

    /// Multiplicative inverse of a class with invertible degree-0 part.
    pub fn invert(&self, a: &ProductElement) -> Result<ProductElement, ChowError> {
        self.check(a)?;
        let c = a.coefficient(&vec![0; self.factors.len()]);
        if c.is_zero() {
            return Err(ChowError::NotInvertible);
        }
        let c_inv = c.recip();
        let nil = &a.scale(&c_inv) - &self.one();
        let minus_nil = -&nil;
        let mut out = self.one();
        let mut power = self.one();
        for _ in 0..self.truncation {
            power = self.mul(&power, &minus_nil)?;
            if power.is_zero() {
                break;
            }
            out = &out + &power;
        }
        Ok(out.scale(&c_inv))
    }

    /// All monomials of total degree `degree`, in lexicographic order.
    pub fn monomials(&self, degree: usize) -> Vec<Vec<usize>> {
        fn go(factors: &[FactorRing], prefix: &mut Vec<usize>, remaining: usize, out: &mut Vec<Vec<usize>>) {
            let Some((first, rest)) = factors.split_first() else {
                if remaining == 0 {
                    out.push(prefix.clone());
                }
                return;
            };
            for b in 0..first.basis_len() {
                let d = first.basis_degree(b);
                if d <= remaining {
                    prefix.push(b);
                    go(rest, prefix, remaining - d, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(&self.factors, &mut Vec::new(), degree, &mut out);
        out
    }

    /// Degree-1 monomials ordered by the factor they come from, then by basis
    /// index. This is the divisor basis of [`ProductRing::numerical_ring`].
    pub fn divisor_monomials(&self) -> Vec<Vec<usize>> {
        let mut mons = self.monomials(1);
        mons.sort_by_key(|m| {
            let f = m.iter().position(|&b| b != 0).unwrap_or(0);
            (f, m[f])
        });
        mons
    }

    fn default_divisor_names(&self) -> Vec<String> {
        let raw: Vec<(usize, String)> = self
            .divisor_monomials()
            .iter()
            .map(|m| {
                let f = m.iter().position(|&b| b != 0).unwrap_or(0);
                (f, self.factors[f].basis_name(m[f]))
            })
            .collect();
        raw.iter()
            .map(|(f, name)| {
                if raw.iter().filter(|(_, n)| n == name).count() > 1 {
                    format!("{name}@{f}")
                } else {
                    name.clone()
                }
            })
            .collect()
    }

    /// The numerical threefold ring of a three-dimensional product, with the
    /// degree-1 monomials as divisor basis. `names` overrides the default
    /// basis names.
    pub fn numerical_ring(&self, names: Option<Vec<String>>) -> Result<IntersectionRing, ChowError> {
        if self.dim() != 3 || self.truncation != 3 {
            return Err(ChowError::DimensionMismatch {
                expected: 3,
                found: self.dim().min(self.truncation),
            });
        }
        let divisors = self.divisor_monomials();
        let n = divisors.len();
        let names = names.unwrap_or_else(|| self.default_divisor_names());
        if names.len() != n {
            return Err(ChowError::DimensionMismatch {
                expected: n,
                found: names.len(),
            });
        }
        let mut triple = Vec::with_capacity(n * n * n);
        for a in &divisors {
            for b in &divisors {
                let ab = self.mul(
                    &ProductElement::monomial(a.clone(), Rational::one()),
                    &ProductElement::monomial(b.clone(), Rational::one()),
                )?;
                for c in &divisors {
                    let abc = self.mul(&ab, &ProductElement::monomial(c.clone(), Rational::one()))?;
                    let v = self.integrate(&abc);
                    triple.push(crate::rational::to_i64(&v).ok_or(ChowError::NotFaithful)?);
                }
            }
        }
        IntersectionRing::from_spec(&IntersectionRingSpec::threefold(names, triple))
    }

    /// Numerical image of a product class in [`ProductRing::numerical_ring`].
    pub fn to_numerical(&self, a: &ProductElement) -> Result<RingElement, ChowError> {
        self.check(a)?;
        let divisors = self.divisor_monomials();
        let deg2_part = self.homogeneous(a, 2);
        let mut deg4 = Vec::with_capacity(divisors.len());
        for d in &divisors {
            let prod = self.mul(&deg2_part, &ProductElement::monomial(d.clone(), Rational::one()))?;
            deg4.push(self.integrate(&prod));
        }
        Ok(RingElement {
            deg0: a.coefficient(&vec![0; self.factors.len()]),
            deg2: divisors.iter().map(|d| a.coefficient(d)).collect(),
            deg4,
            deg6: self.integrate(a),
        })
    }

    /// Inverse of [`ProductRing::to_numerical`]. Needs the pairing between
    /// degree-2 monomials and divisors to be a perfect pairing.
    pub fn from_numerical(&self, a: &RingElement) -> Result<ProductElement, ChowError> {
        let divisors = self.divisor_monomials();
        if a.deg2.len() != divisors.len() || a.deg4.len() != divisors.len() {
            return Err(ChowError::RingMismatch {
                expected: divisors.len(),
                found: a.deg2.len(),
            });
        }
        let curves = self.monomials(2);
        if curves.len() != divisors.len() {
            return Err(ChowError::NotFaithful);
        }
        // Row k: pairings of every curve monomial with divisor k.
        let mut matrix = vec![vec![Rational::zero(); curves.len()]; divisors.len()];
        for (j, c) in curves.iter().enumerate() {
            let cm = ProductElement::monomial(c.clone(), Rational::one());
            for (k, d) in divisors.iter().enumerate() {
                let dm = ProductElement::monomial(d.clone(), Rational::one());
                matrix[k][j] = self.integrate(&self.mul(&cm, &dm)?);
            }
        }
        let coeffs = solve(matrix, a.deg4.clone()).ok_or(ChowError::NotFaithful)?;

        let mut out = ProductElement::monomial(vec![0; self.factors.len()], a.deg0.clone());
        for (d, v) in divisors.iter().zip(&a.deg2) {
            out.add_term(d.clone(), v.clone());
        }
        for (c, v) in curves.into_iter().zip(coeffs) {
            out.add_term(c, v);
        }
        out.add_term(self.factors.iter().map(FactorRing::top).collect(), a.deg6.clone());
        Ok(out)
    }
}
