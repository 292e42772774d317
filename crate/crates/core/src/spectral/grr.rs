use crate::chow::{ProductElement, ProductRing};

use super::SpectralError;

/// A fibered product `Y ×_B X` presented as a Künneth product ring.
///
/// `source_factor` appears only in `Y` and is integrated out by the
/// push-forward; `target_factor` appears only in `X`. Every other factor is
/// shared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correspondence {
    pub product: ProductRing,
    pub source_factor: usize,
    pub target_factor: usize,
}

impl Correspondence {
    pub fn new(product: ProductRing, source_factor: usize, target_factor: usize) -> Result<Self, SpectralError> {
        product.without_factor(source_factor)?;
        product.without_factor(target_factor)?;
        if source_factor == target_factor {
            return Err(crate::chow::ChowError::FactorMismatch {
                first: source_factor,
                second: target_factor,
            }
            .into());
        }
        Ok(Self {
            product,
            source_factor,
            target_factor,
        })
    }

    /// The ring of `Y`.
    pub fn source_ring(&self) -> ProductRing {
        self.product.without_factor(self.target_factor).expect("validated")
    }

    /// The ring of `X`.
    pub fn target_ring(&self) -> ProductRing {
        self.product.without_factor(self.source_factor).expect("validated")
    }

    /// `π_Y^*`.
    pub fn pull_from_source(&self, a: &ProductElement) -> Result<ProductElement, SpectralError> {
        Ok(self.product.pull_back(self.target_factor, a)?)
    }

    /// `π_X^*`.
    pub fn pull_from_target(&self, a: &ProductElement) -> Result<ProductElement, SpectralError> {
        Ok(self.product.pull_back(self.source_factor, a)?)
    }
}

fn check_degree(ring: &ProductRing, a: &ProductElement) -> Result<(), SpectralError> {
    ring.check(a)?;
    match ring.max_degree(a) {
        Some(degree) if degree > ring.truncation() => Err(SpectralError::DegreeOverflow {
            degree,
            max: ring.truncation(),
        }),
        _ => Ok(()),
    }
}

/// `ch(Φ(E)) = π_X*( π_Y^*(ch(E)·Td(Y/B)) · ch(𝒫) )`.
///
/// `ch_e` and `todd` live in the source ring, `kernel` in the product; the
/// result lives in the target ring.
pub fn grr_transform(
    ch_e: &ProductElement,
    kernel: &ProductElement,
    todd: &ProductElement,
    corr: &Correspondence,
) -> Result<ProductElement, SpectralError> {
    let source = corr.source_ring();
    check_degree(&source, ch_e)?;
    check_degree(&source, todd)?;
    check_degree(&corr.product, kernel)?;
    let weighted = source.mul(ch_e, todd)?;
    let integrand = corr.product.mul(&corr.pull_from_source(&weighted)?, kernel)?;
    Ok(corr.product.push_forward(corr.source_factor, &integrand)?)
}
