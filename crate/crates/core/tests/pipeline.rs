//! End-to-end runs through the public API: ring, fibration, spectral data,
//! stability bound and scans, each checked against values worked out by hand.

use k3fm::chow::{IntersectionRing, IntersectionRingSpec};
use k3fm::fiber_k3::{fine_moduli_check, mukai_square, restrict_to_fiber, FibrationGeometry, MukaiVector};
use k3fm::rational::{q, vec_q};
use k3fm::search::{scan_mukai_with, scan_rank_one, Execution, ScanFilter, ScanRequest};
use k3fm::spectral::{
    spectral_chern_general, spectral_chern_rank_one, trivial_fibration_chern, twist, ChernCharacter, KernelData,
    ReflexiveK3Spec, SpectralDatum, TrivialFibration,
};
use k3fm::stability::{discriminant, discriminant_closed_form, stability_bound};
use num::BigInt;

fn octic(base_genus: u32) -> FibrationGeometry {
    let spec = IntersectionRingSpec::threefold_from_entries(["H", "l"], [([0, 0, 0], 8), ([0, 0, 1], 4)]).unwrap();
    FibrationGeometry::new(IntersectionRing::from_spec(&spec).unwrap(), vec![0, 1], base_genus).unwrap()
}

#[test]
fn entries_and_full_tensor_agree() {
    let full = IntersectionRingSpec::threefold(["H", "l"], vec![8, 4, 4, 0, 4, 0, 0, 0]);
    assert_eq!(IntersectionRing::from_spec(&full).unwrap(), octic(0).ring().clone());
}

#[test]
fn octic_restriction_and_admissibility() {
    let fib = octic(0);
    let h = [1, 0];
    for x in 0..4 {
        for y in -2..=2 {
            let res = restrict_to_fiber(&[x, y], &h, &fib).unwrap();
            assert_eq!((res.ht2, res.lt_ht, res.lt2), (4, 4 * x, 4 * x * x));
        }
    }
    let res = restrict_to_fiber(&[1, 7], &h, &fib).unwrap();
    let v = MukaiVector::new(2, res, 1).unwrap();
    let verdict = fine_moduli_check(&v).unwrap();
    assert_eq!(verdict.gcd_triple, (8, 0, 3));
    assert_eq!(mukai_square(&v), 0);
    assert!(verdict.pass());
}

#[test]
fn rank_one_data_to_polarization() {
    let fib = octic(0);
    let sd = SpectralDatum::new(3, 2, 4).unwrap().with_cover_class(vec_q(&[6, 3]));
    let ch = spectral_chern_rank_one(&fib, &sd).unwrap();
    assert_eq!(ch, ChernCharacter::new(q(3), vec_q(&[0, 0]), vec_q(&[-6, -3]), q(3)));
    let h0 = fib.ring().divisor(&[1, 0]).unwrap();
    let report = stability_bound(&ch, &h0, &fib).unwrap();
    // B = −2m·ch₂ when c₁ = 0, so B·H = 2·3·6 = 36.
    assert_eq!(report.bh0, q(36));
    assert_eq!(report.m0, q(162));
    assert_eq!(report.m0_ceil, BigInt::from(162));

    // Twisting by any divisor leaves B alone.
    let d = fib.ring().divisor(&[2, -5]).unwrap();
    let twisted = twist(fib.ring(), &ch, &d).unwrap();
    assert_eq!(discriminant(fib.ring(), &twisted).unwrap(), report.discriminant);
}

#[test]
fn general_kernel_discriminant() {
    let fib = octic(1);
    let sd = SpectralDatum::new(3, 1, 2).unwrap();
    let kd = KernelData {
        r: 2,
        l: vec![1, 0],
        s: 1,
        g1: None,
        g2: vec_q(&[2, -1]),
        g3: q(5),
        cq: 1,
    };
    let ch = spectral_chern_general(&fib, &sd, &kd).unwrap();
    let b = discriminant(fib.ring(), &ch).unwrap();
    assert_eq!(b, discriminant_closed_form(&fib, &sd, &kd).unwrap());
    // n²L² = 9·(8, 4), −2n·CQ·(L·f) = −6·(4, 0), −2rn·G2 = −12·(2, −1).
    assert_eq!(b, vec_q(&[72 - 24 - 24, 36 + 12]));
}

#[test]
fn trivial_fibration_matches_direct_transform() {
    let t = TrivialFibration::new(ReflexiveK3Spec::standard()).unwrap();
    for (g, d) in [(1, 0), (1, 3), (4, -2), (7, 5)] {
        let sd = SpectralDatum::new(1, g, d)
            .unwrap()
            .with_cover_class(vec_q(&[1, -3, 1]));
        let (ce, hc) = t.cover_pairings(sd.cover_class.as_ref().unwrap()).unwrap();
        let closed = trivial_fibration_chern(
            &sd,
            t.k3(),
            1,
            ce.to_integer().try_into().unwrap(),
            hc.to_integer().try_into().unwrap(),
        )
        .unwrap();
        assert_eq!(closed, t.transform_oracle(&sd).unwrap());
        assert_eq!(*closed.rank(), q(2));
        assert_eq!(*closed.ch3(), q(-5 * sd.chi()) + hc);
    }
}

#[test]
fn scans_agree_with_pointwise_checks() {
    let mut req = ScanRequest::new(octic(0), vec![1, 0]);
    req.r_range = 1..=3;
    req.l_ranges = vec![-2..=2, -1..=1];
    req.s_range = -2..=2;
    let seq = scan_mukai_with(&req, Execution::Sequential).unwrap();
    let par = scan_mukai_with(&req, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    assert_eq!(seq.points_examined, 3 * 5 * 3 * 5);
    let mut count = 0;
    for r in 1..=3 {
        for x in -2..=2 {
            for y in -1..=1 {
                for s in -2..=2 {
                    let res = restrict_to_fiber(&[x, y], &[1, 0], &req.fib).unwrap();
                    let ok = MukaiVector::new(r, res, s)
                        .and_then(|v| fine_moduli_check(&v))
                        .map(|v| v.pass())
                        .unwrap_or(false);
                    count += usize::from(ok);
                }
            }
        }
    }
    assert_eq!(seq.entries.len(), count);

    let mut req = ScanRequest::new(octic(0), vec![1, 0]);
    req.n_range = 1..=3;
    req.g_range = 0..=3;
    req.d_range = -100..=100;
    req.filters.insert(ScanFilter::DegreeZero);
    req.covers.insert(3, vec_q(&[6, 3]));
    let scan = scan_rank_one(&req).unwrap();
    assert_eq!(scan.entries.len(), 12);
    for e in &scan.entries {
        assert_eq!(e.ch3, e.n);
        assert_eq!(e.stability.is_some(), e.n == 3);
    }
}
