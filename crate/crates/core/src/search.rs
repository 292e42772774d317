//! Exhaustive scans of parameter boxes for admissible spectral data.
//!
//! Grid points are evaluated independently (in parallel by default) and the
//! results are always returned in lexicographic order of the grid tuple, so
//! the output depends only on the request.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use rayon::prelude::*;
use thiserror::Error;

use crate::fiber_k3::{
    fine_moduli_check, restrict_to_fiber, AdmissibilityVerdict, FiberError, FiberRestriction, FibrationGeometry,
    MukaiVector,
};
use crate::rational::{q, Rational};
use crate::spectral::{spectral_chern_rank_one, twist, ChernCharacter, SpectralDatum, SpectralError};
use crate::stability::{stability_bound, StabilityError, StabilityReport};

/// Upper limit on the number of grid points a single request may visit.
pub const MAX_GRID_POINTS: u128 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("range `{0}` is empty")]
    EmptyRange(String),
    #[error("range `{name}` starts at {start}, below the minimum {min}")]
    RangeBelowMinimum { name: String, start: i64, min: i64 },
    #[error("expected {expected} divisor ranges, found {found}")]
    RangeCount { expected: usize, found: usize },
    #[error("request covers {points} grid points, above the limit {max}")]
    GridTooLarge { points: u128, max: u128 },
    #[error("intersection numbers overflow 64-bit integers")]
    Overflow,
    #[error("scan produced more than {cap} results")]
    TooManyResults { cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScanFilter {
    /// `gcd(r H_t², a, r + s) = 1` and `v² = 0`. Always applied by [`scan_mukai`].
    FineModuli,
    /// Rank-one entries with `d = R/2`.
    DegreeZero,
    /// Rank-one entries with `d = n + R/2`, reported after twisting by `−f`.
    C1ZeroAfterTwist,
    /// `B·H ≥ 0`. Needs a cover class for the degree; points without one fail.
    BogomolovNonneg,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Clone, Debug)]
pub struct ScanRequest {
    pub fib: FibrationGeometry,
    /// Polarization `H` restricted to fibers, and `H₀` for stability bounds.
    pub h: Vec<i64>,
    /// One range per divisor coefficient of `L`.
    pub l_ranges: Vec<RangeInclusive<i64>>,
    pub r_range: RangeInclusive<i64>,
    pub s_range: RangeInclusive<i64>,
    pub n_range: RangeInclusive<i64>,
    pub d_range: RangeInclusive<i64>,
    pub g_range: RangeInclusive<i64>,
    pub filters: BTreeSet<ScanFilter>,
    /// Cover classes keyed by the degree `n` they belong to.
    pub covers: BTreeMap<i64, Vec<Rational>>,
    /// Exceeding this count is an error, never a silent truncation.
    pub max_results: Option<usize>,
}

impl ScanRequest {
    /// A request with every range set to the single point `0` (and `1` for
    /// ranks and degrees); callers overwrite the ranges they scan.
    pub fn new(fib: FibrationGeometry, h: Vec<i64>) -> Self {
        let rank = fib.ring().rank();
        Self {
            fib,
            h,
            l_ranges: vec![0..=0; rank],
            r_range: 1..=1,
            s_range: 0..=0,
            n_range: 1..=1,
            d_range: 0..=0,
            g_range: 0..=0,
            filters: BTreeSet::new(),
            covers: BTreeMap::new(),
            max_results: None,
        }
    }
}

fn check_range(name: &str, range: &RangeInclusive<i64>, min: Option<i64>) -> Result<u128, SearchError> {
    if range.is_empty() {
        return Err(SearchError::EmptyRange(name.to_string()));
    }
    if let Some(min) = min {
        if *range.start() < min {
            return Err(SearchError::RangeBelowMinimum {
                name: name.to_string(),
                start: *range.start(),
                min,
            });
        }
    }
    Ok((i128::from(*range.end()) - i128::from(*range.start()) + 1) as u128)
}

fn check_grid(points: u128) -> Result<(), SearchError> {
    if points > MAX_GRID_POINTS {
        return Err(SearchError::GridTooLarge {
            points,
            max: MAX_GRID_POINTS,
        });
    }
    Ok(())
}

fn check_cap(len: usize, cap: Option<usize>) -> Result<(), SearchError> {
    match cap {
        Some(cap) if len > cap => Err(SearchError::TooManyResults { cap }),
        _ => Ok(()),
    }
}

fn evaluate<P, T, F>(points: Vec<P>, exec: Execution, f: F) -> Vec<T>
where
    P: Send + Sync,
    T: Send,
    F: Fn(&P) -> Option<T> + Send + Sync,
{
    match exec {
        Execution::Sequential => points.iter().filter_map(f).collect(),
        // `collect` on an indexed parallel iterator keeps input order.
        Execution::Parallel => points.par_iter().filter_map(f).collect(),
    }
}

/// Cartesian product of ranges in lexicographic order.
fn grid(ranges: &[RangeInclusive<i64>]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for range in ranges {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                range.clone().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MukaiEntry {
    pub r: i64,
    pub l: Vec<i64>,
    pub s: i64,
    pub restriction: FiberRestriction,
    pub verdict: AdmissibilityVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MukaiScan {
    pub points_examined: usize,
    pub entries: Vec<MukaiEntry>,
}

/// Fiber intersection numbers against the divisor basis, so that the
/// restriction of `L` is a quadratic form in its coefficients.
struct FiberForm {
    ht2: i64,
    h_pairing: Vec<i64>,
    gram: Vec<Vec<i64>>,
}

impl FiberForm {
    fn new(fib: &FibrationGeometry, h: &[i64]) -> Result<Self, SearchError> {
        let rank = fib.ring().rank();
        let unit = |i: usize| (0..rank).map(|j| i64::from(i == j)).collect::<Vec<_>>();
        let ht2 = restrict_to_fiber(h, h, fib)?.ht2;
        let mut h_pairing = Vec::with_capacity(rank);
        let mut gram = vec![vec![0; rank]; rank];
        for (i, row) in gram.iter_mut().enumerate() {
            h_pairing.push(restrict_to_fiber(&unit(i), h, fib)?.lt_ht);
            for (j, cell) in row.iter_mut().enumerate() {
                let mut sum = unit(i);
                sum[j] += 1;
                // (D_i + D_j)² = D_i² + 2 D_i·D_j + D_j² on the fiber.
                let both = restrict_to_fiber(&sum, h, fib)?.lt2;
                let di = restrict_to_fiber(&unit(i), h, fib)?.lt2;
                let dj = restrict_to_fiber(&unit(j), h, fib)?.lt2;
                *cell = if i == j { di } else { (both - di - dj) / 2 };
            }
        }
        Ok(Self { ht2, h_pairing, gram })
    }

    fn restrict(&self, l: &[i64]) -> Option<FiberRestriction> {
        let mut lt_ht = 0i64;
        let mut lt2 = 0i64;
        for (i, &li) in l.iter().enumerate() {
            lt_ht = lt_ht.checked_add(li.checked_mul(self.h_pairing[i])?)?;
            for (j, &lj) in l.iter().enumerate() {
                lt2 = lt2.checked_add(li.checked_mul(lj)?.checked_mul(self.gram[i][j])?)?;
            }
        }
        Some(FiberRestriction::new(self.ht2, lt_ht, lt2))
    }
}

fn admissible(r: i64, l: &[i64], s: i64, restriction: FiberRestriction) -> Result<Option<MukaiEntry>, SearchError> {
    let v = MukaiVector::new(r, restriction, s)?;
    match fine_moduli_check(&v) {
        Ok(verdict) if verdict.pass() => Ok(Some(MukaiEntry {
            r,
            l: l.to_vec(),
            s,
            restriction,
            verdict,
        })),
        Ok(_) | Err(FiberError::NonIntegralA(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Whether `(r, L, s)` passes the fine-moduli test. Non-integral `a(L_t)`
/// counts as a failure.
pub fn mukai_point(
    fib: &FibrationGeometry,
    h: &[i64],
    r: i64,
    l: &[i64],
    s: i64,
) -> Result<Option<MukaiEntry>, SearchError> {
    admissible(r, l, s, restrict_to_fiber(l, h, fib)?)
}

/// All `(r, L, s)` in the box admitting a fine relative moduli space, in
/// lexicographic order of `(r, L₁, …, L_k, s)`.
pub fn scan_mukai(req: &ScanRequest) -> Result<MukaiScan, SearchError> {
    scan_mukai_with(req, Execution::Parallel)
}

pub fn scan_mukai_with(req: &ScanRequest, exec: Execution) -> Result<MukaiScan, SearchError> {
    let rank = req.fib.ring().rank();
    if req.l_ranges.len() != rank {
        return Err(SearchError::RangeCount {
            expected: rank,
            found: req.l_ranges.len(),
        });
    }
    let mut points = check_range("r", &req.r_range, Some(1))?;
    for (i, range) in req.l_ranges.iter().enumerate() {
        points = points.saturating_mul(check_range(&format!("L[{i}]"), range, None)?);
    }
    points = points.saturating_mul(check_range("s", &req.s_range, None)?);
    check_grid(points)?;
    let form = FiberForm::new(&req.fib, &req.h)?;

    let mut ranges = vec![req.r_range.clone()];
    ranges.extend(req.l_ranges.iter().cloned());
    ranges.push(req.s_range.clone());
    let tuples = grid(&ranges);
    let examined = tuples.len();
    let entries = evaluate(tuples, exec, |t| {
        let (r, l, s) = (t[0], &t[1..=rank], t[rank + 1]);
        match form.restrict(l) {
            Some(restriction) => admissible(r, l, s, restriction).transpose(),
            None => Some(Err(SearchError::Overflow)),
        }
    });
    let entries = entries.into_iter().collect::<Result<Vec<_>, _>>()?;
    check_cap(entries.len(), req.max_results)?;
    Ok(MukaiScan {
        points_examined: examined,
        entries,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RankOneKind {
    /// `d = R/2`: the transform has relative degree zero.
    DegreeZero,
    /// `d = n + R/2`, twisted by `−f` so that `c₁ = 0`.
    C1ZeroAfterTwist,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOneEntry {
    pub n: i64,
    pub g: i64,
    pub d: i64,
    pub ramification: i64,
    pub kind: RankOneKind,
    pub ch0: i64,
    /// `ch₁` is this multiple of `f`.
    pub ch1_fiber_coefficient: i64,
    pub ch3: i64,
    /// Full character, when a cover class for `n` was supplied.
    pub character: Option<ChernCharacter>,
    pub stability: Option<StabilityReport>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOneScan {
    pub points_examined: usize,
    pub entries: Vec<RankOneEntry>,
}

fn rank_one_entry(req: &ScanRequest, n: i64, g: i64, kind: RankOneKind) -> Result<Option<RankOneEntry>, SearchError> {
    let base = i64::from(req.fib.base_genus());
    let sd0 = SpectralDatum::new(n, g, 0)?;
    let r = sd0.ramification(req.fib.base_genus());
    if r < 0 {
        return Ok(None);
    }
    let d = match kind {
        RankOneKind::DegreeZero => r / 2,
        RankOneKind::C1ZeroAfterTwist => n + r / 2,
    };
    if !req.d_range.contains(&d) {
        return Ok(None);
    }
    // Closed forms: ch₃(Ê) = d − R/2 − n(g_B − 1), and twisting by −f adds [C]·f = n.
    let (ch1, ch3) = match kind {
        RankOneKind::DegreeZero => (0, -n * (base - 1)),
        RankOneKind::C1ZeroAfterTwist => (0, n * (3 - base)),
    };
    let mut entry = RankOneEntry {
        n,
        g,
        d,
        ramification: r,
        kind,
        ch0: n,
        ch1_fiber_coefficient: ch1,
        ch3,
        character: None,
        stability: None,
    };
    if let Some(cover) = req.covers.get(&n) {
        let sd = SpectralDatum::new(n, g, d)?.with_cover_class(cover.clone());
        let ring = req.fib.ring();
        let mut ch = spectral_chern_rank_one(&req.fib, &sd)?;
        if kind == RankOneKind::C1ZeroAfterTwist {
            let minus_f = -&req.fib.fiber_class();
            ch = twist(ring, &ch, &minus_f)?;
        }
        let h0 = ring.divisor(&req.h).map_err(SpectralError::from)?;
        entry.stability = Some(stability_bound(&ch, &h0, &req.fib)?);
        entry.character = Some(ch);
    }
    if req.filters.contains(&ScanFilter::BogomolovNonneg) {
        match &entry.stability {
            Some(report) if report.bh0 >= q(0) => {}
            _ => return Ok(None),
        }
    }
    Ok(Some(entry))
}

/// Distinguished rank-one spectral data over the `(n, g)` box: `d = R/2` and
/// `d = n + R/2` whenever `R ≥ 0` and `d` lies in the degree range. With
/// neither kind filter set, both kinds are reported.
pub fn scan_rank_one(req: &ScanRequest) -> Result<RankOneScan, SearchError> {
    scan_rank_one_with(req, Execution::Parallel)
}

pub fn scan_rank_one_with(req: &ScanRequest, exec: Execution) -> Result<RankOneScan, SearchError> {
    let points = check_range("n", &req.n_range, Some(1))?
        .saturating_mul(check_range("g", &req.g_range, Some(0))?)
        .saturating_mul(2);
    check_range("d", &req.d_range, None)?;
    check_grid(points)?;
    req.fib.ring().divisor(&req.h).map_err(SpectralError::from)?;
    for (n, cover) in &req.covers {
        SpectralDatum::new(*n, 0, 0)?
            .with_cover_class(cover.clone())
            .checked_cover(&req.fib)?;
    }

    let mut kinds = Vec::new();
    if req.filters.contains(&ScanFilter::DegreeZero) {
        kinds.push(RankOneKind::DegreeZero);
    }
    if req.filters.contains(&ScanFilter::C1ZeroAfterTwist) {
        kinds.push(RankOneKind::C1ZeroAfterTwist);
    }
    if kinds.is_empty() {
        kinds = vec![RankOneKind::DegreeZero, RankOneKind::C1ZeroAfterTwist];
    }
    let mut tuples = Vec::new();
    for n in req.n_range.clone() {
        for g in req.g_range.clone() {
            for &kind in &kinds {
                tuples.push((n, g, kind));
            }
        }
    }
    let examined = tuples.len();
    let results = evaluate(tuples, exec, |&(n, g, kind)| {
        rank_one_entry(req, n, g, kind).transpose()
    });
    let entries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    check_cap(entries.len(), req.max_results)?;
    Ok(RankOneScan {
        points_examined: examined,
        entries,
    })
}
