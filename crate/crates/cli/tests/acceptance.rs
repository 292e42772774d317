//! Acceptance run: one PASS/FAIL line per criterion with its wall-clock time.
//! Every check is exact; the time limits are pinned below. Random instances
//! come from a fixed seed so failures reproduce.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use k3fm::chow::{IntersectionRing, IntersectionRingSpec};
use k3fm::fiber_k3::{
    fine_moduli_check, mukai_square, restrict_to_fiber, FiberRestriction, FibrationGeometry, MukaiVector,
};
use k3fm::rational::{q, vec_q};
use k3fm::search::{scan_mukai_with, Execution, ScanRequest};
use k3fm::spectral::{
    spectral_chern_general, spectral_chern_rank_one, trivial_fibration_chern, twist, twist_degree, ChernCharacter,
    KernelData, ReflexiveK3Spec, SpectralDatum, TrivialFibration,
};
use k3fm::stability::{discriminant, discriminant_closed_form, stability_bound};
use k3fm::Rational;
use k3fm_cli::config::{load, ConfigDocument};
use k3fm_cli::{run, Options, Verb};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const SEED: u64 = 0x6b33_666d;

type Check = Result<(), String>;
type Criterion = (&'static str, Duration, Box<dyn FnOnce(&mut StdRng) -> Check>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bundled(name: &str) -> ConfigDocument {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    load(&path)
        .expect("bundled config parses")
        .into_config(true)
        .expect("bundled config is strict-clean")
        .0
}

fn octic(base_genus: u32) -> FibrationGeometry {
    let spec = IntersectionRingSpec::threefold(["H", "l"], vec![8, 4, 4, 0, 4, 0, 0, 0]);
    FibrationGeometry::new(IntersectionRing::from_spec(&spec).unwrap(), vec![0, 1], base_genus).unwrap()
}

fn ring_example() -> Check {
    let report = run(Verb::RingCheck, &bundled("octic.toml"), Options::default()).map_err(|e| e.to_string())?;
    let triple = &report.results["triple"];
    for (key, want) in [("H.H.H", 8), ("H.H.l", 4), ("H.l.l", 0), ("l.l.l", 0)] {
        ensure(triple[key] == want, || format!("{key} = {}, want {want}", triple[key]))?;
    }
    let fib = octic(0);
    for x in 0..=3 {
        for y in -2..=2 {
            let r = restrict_to_fiber(&[x, y], &[1, 0], &fib).map_err(|e| e.to_string())?;
            ensure((r.ht2, r.lt_ht, r.lt2) == (4, 4 * x, 4 * x * x), || {
                format!("x = {x}, y = {y}: {r:?}")
            })?;
        }
    }
    Ok(())
}

fn admissibility() -> Check {
    let fib = octic(0);
    for y in -100..=100 {
        let res = restrict_to_fiber(&[1, y], &[1, 0], &fib).map_err(|e| e.to_string())?;
        let v = MukaiVector::new(2, res, 1).map_err(|e| e.to_string())?;
        let verdict = fine_moduli_check(&v).map_err(|e| e.to_string())?;
        ensure(verdict.pass(), || format!("y = {y}: {verdict:?}"))?;
        ensure(verdict.gcd_triple == (8, 0, 3), || {
            format!("y = {y}: {:?}", verdict.gcd_triple)
        })?;
        ensure(verdict.mukai_square == 0, || {
            format!("y = {y}: v² = {}", verdict.mukai_square)
        })?;
    }
    Ok(())
}

fn rank_one_invariants() -> Check {
    let fib = octic(0);
    let minus_f = fib.ring().divisor(&[0, -1]).unwrap();
    let mut checked = 0;
    for n in [1, 2, 3, 5] {
        for g in 0..=4 {
            let r = 2 * g - 2 + 2 * n;
            if r < 0 || r % 2 != 0 {
                continue;
            }
            // Any curve class with [C]·l = n serves; vary the H pairing too.
            let cover = vec_q(&[2 * n + g, n]);
            let neg: Vec<Rational> = cover.iter().map(|x| -x).collect();

            let sd = SpectralDatum::new(n, g, r / 2).unwrap().with_cover_class(cover.clone());
            let ch = spectral_chern_rank_one(&fib, &sd).map_err(|e| e.to_string())?;
            let want = ChernCharacter::new(q(n), vec_q(&[0, 0]), neg.clone(), q(n));
            ensure(ch == want, || format!("(n, g) = ({n}, {g}): {ch:?}"))?;

            let sd = SpectralDatum::new(n, g, n + r / 2).unwrap().with_cover_class(cover);
            let base = spectral_chern_rank_one(&fib, &sd).map_err(|e| e.to_string())?;
            let ch = twist(fib.ring(), &base, &minus_f).map_err(|e| e.to_string())?;
            let want = ChernCharacter::new(q(n), vec_q(&[0, 0]), neg, q(3 * n));
            ensure(ch == want, || format!("twisted (n, g) = ({n}, {g}): {ch:?}"))?;
            checked += 1;
        }
    }
    ensure(checked == 20, || format!("only {checked} instances"))
}

fn hurwitz_identity(rng: &mut StdRng) -> Check {
    let fibs: Vec<FibrationGeometry> = (0..=6).map(octic).collect();
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=60);
        let g = rng.gen_range(0..=80);
        let d = rng.gen_range(-200..=200);
        let gb = rng.gen_range(0..=6u32);
        let sd = SpectralDatum::new(n, g, d).unwrap();
        // R computed here, not by the library.
        let r = 2 * g - 2 - n * (2 * i64::from(gb) - 2);
        let lhs = twist_degree(&fibs[gb as usize], &sd);
        ensure(r % 2 == 0, || format!("odd R = {r}"))?;
        ensure(lhs == d - r / 2, || {
            format!("(n, d, g, g_B) = ({n}, {d}, {g}, {gb}): {lhs} vs {}", d - r / 2)
        })?;
    }
    Ok(())
}

/// A three-divisor ring `A, B, f` with random entries and `f² = 0`.
fn random_fibration(rng: &mut StdRng) -> FibrationGeometry {
    let mut entries = Vec::new();
    for idx in [
        [0, 0, 0],
        [0, 0, 1],
        [0, 1, 1],
        [1, 1, 1],
        [0, 0, 2],
        [0, 1, 2],
        [1, 1, 2],
    ] {
        entries.push((idx, rng.gen_range(-9..=9)));
    }
    let spec = IntersectionRingSpec::threefold_from_entries(["A", "B", "f"], entries).unwrap();
    let ring = IntersectionRing::from_spec(&spec).unwrap();
    FibrationGeometry::new(ring, vec![0, 0, 1], rng.gen_range(0..=4)).unwrap()
}

fn discriminant_closed_form_check(rng: &mut StdRng) -> Check {
    for i in 0..1000 {
        let fib = random_fibration(rng);
        let ring = fib.ring();
        let n = rng.gen_range(1..=6);
        let g = rng.gen_range(0..=8);
        let sd = SpectralDatum::new(n, g, rng.gen_range(-10..=10)).unwrap();
        let kd = KernelData {
            r: rng.gen_range(1..=5),
            l: (0..3).map(|_| rng.gen_range(-4..=4)).collect(),
            s: rng.gen_range(-5..=5),
            g1: None,
            g2: (0..3).map(|_| q(rng.gen_range(-12..=12))).collect(),
            g3: q(rng.gen_range(-12..=12)),
            cq: rng.gen_range(-6..=6),
        };
        let ch = spectral_chern_general(&fib, &sd, &kd).map_err(|e| e.to_string())?;
        let b = discriminant(ring, &ch).map_err(|e| e.to_string())?;

        // n²L² − 2n·CQ·(L·f) − 2rn·G2, from raw triple numbers.
        let f = [0, 0, 1];
        let l = &kd.l;
        let tri = |a: &[i64], b: &[i64], k: usize| -> i64 {
            (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| a[i] * b[j] * ring.triple(i, j, k))
                .sum()
        };
        let want: Vec<Rational> = (0..3)
            .map(|k| {
                let (nn, r, cq) = (sd.n, kd.r, kd.cq);
                q(nn * nn * tri(l, l, k) - 2 * nn * cq * tri(l, &f, k)) - q(2 * r * nn) * &kd.g2[k]
            })
            .collect();
        ensure(b == want, || format!("instance {i}: B = {b:?}, closed form {want:?}"))?;
        let library = discriminant_closed_form(&fib, &sd, &kd).map_err(|e| e.to_string())?;
        ensure(library == want, || {
            format!("instance {i}: library closed form {library:?}")
        })?;
    }
    Ok(())
}

fn polarization_bound() -> Check {
    let report = run(Verb::Stability, &bundled("rank_one.toml"), Options::default()).map_err(|e| e.to_string())?;
    let s = &report.results["stability"];
    ensure(s["bh0"] == "36" && s["m0"] == "162" && s["h02f"] == "4", || {
        format!("{s}")
    })?;

    let fib = octic(0);
    let sd = SpectralDatum::new(3, 2, 4).unwrap().with_cover_class(vec_q(&[6, 3]));
    let ch = spectral_chern_rank_one(&fib, &sd).map_err(|e| e.to_string())?;
    let h0 = fib.ring().divisor(&[1, 0]).unwrap();
    let b = stability_bound(&ch, &h0, &fib).map_err(|e| e.to_string())?;
    // B = −2·3·ch₂ = 6·[C]; M₀ = 3²/8 · 36 · 4.
    ensure(b.bh0 == q(36), || format!("B·H0 = {}", b.bh0))?;
    ensure(b.m0 == q(9) / q(8) * q(36) * q(4) && b.m0 == q(162), || {
        format!("M0 = {}", b.m0)
    })
}

fn oracle_equivalence(rng: &mut StdRng) -> Check {
    let t = TrivialFibration::new(ReflexiveK3Spec::standard()).map_err(|e| e.to_string())?;
    // Pairings with (H, L, f) of E·f = (2h + l) on a fiber, and of the curve pt × B.
    let ef = [4, -12, 0];
    let pt_b = [0, 0, 1];
    for i in 0..50 {
        let n = 1;
        let g = rng.gen_range(1..=12);
        let d = rng.gen_range(-15..=15);
        let cover = [rng.gen_range(-6..=6), rng.gen_range(-6..=6), n];
        let sd = SpectralDatum::new(n, g, d).unwrap().with_cover_class(vec_q(&cover));
        let chi = sd.chi();
        let ce = 2 * cover[0] + cover[1];
        let hc = cover[0];

        let direct = t.kernel_transform(&sd).map_err(|e| e.to_string())?;
        let lemma = ChernCharacter::new(
            q(2 * n),
            vec_q(&[2 * n, n, 2 * chi + ce]),
            (0..3).map(|k| q(-2 * n * pt_b[k] + chi * ef[k] - cover[k])).collect(),
            q(-3 * chi - ce),
        );
        ensure(direct == lemma, || {
            format!("instance {i} (g, d) = ({g}, {d}): {direct:?} vs {lemma:?}")
        })?;

        let twisted = t.transform_oracle(&sd).map_err(|e| e.to_string())?;
        let closed = trivial_fibration_chern(&sd, t.k3(), 1, ce, hc).map_err(|e| e.to_string())?;
        ensure(twisted == closed, || {
            format!("instance {i}: twist {twisted:?} vs closed {closed:?}")
        })?;
        ensure(*closed.rank() == q(2 * n), || {
            format!("instance {i}: ch0 = {}", closed.rank())
        })?;
        ensure(*closed.ch3() == q(-5 * chi + hc), || {
            format!("instance {i}: ch3 = {}", closed.ch3())
        })?;
    }
    Ok(())
}

fn reflexive_and_twist(rng: &mut StdRng) -> Check {
    let v = MukaiVector::new(2, FiberRestriction::new(2, 0, -12), -3).map_err(|e| e.to_string())?;
    ensure(mukai_square(&v) == 0, || format!("v² = {}", mukai_square(&v)))?;

    for i in 0..1000 {
        let fib = random_fibration(rng);
        let ring = fib.ring();
        let ch = ChernCharacter::new(
            q(rng.gen_range(1..=6)),
            (0..3).map(|_| q(rng.gen_range(-6..=6))).collect(),
            (0..3).map(|_| q(rng.gen_range(-20..=20))).collect(),
            q(rng.gen_range(-20..=20)),
        );
        let coeffs: Vec<i64> = (0..3).map(|_| rng.gen_range(-5..=5)).collect();
        let d = ring.divisor(&coeffs).unwrap();
        let b0 = discriminant(ring, &ch).map_err(|e| e.to_string())?;
        let b1 = discriminant(ring, &twist(ring, &ch, &d).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(b0 == b1, || format!("pair {i}: D = {coeffs:?}, {b0:?} vs {b1:?}"))?;
    }
    Ok(())
}

fn scan_soundness() -> Check {
    let config = bundled("scan.toml");
    let fib = octic(0);
    let mut req = ScanRequest::new(fib.clone(), vec![1, 0]);
    req.r_range = 1..=3;
    req.l_ranges = vec![0..=2, -1..=1];
    req.s_range = -3..=3;
    let par = scan_mukai_with(&req, Execution::Parallel).map_err(|e| e.to_string())?;
    let seq = scan_mukai_with(&req, Execution::Sequential).map_err(|e| e.to_string())?;
    ensure(par.points_examined == 189, || format!("{} points", par.points_examined))?;
    ensure(format!("{par:?}") == format!("{seq:?}"), || {
        "parallel and sequential scans differ".into()
    })?;

    let mut expected = Vec::new();
    for r in 1..=3 {
        for x in 0..=2 {
            for y in -1..=1 {
                for s in -3..=3 {
                    let res = restrict_to_fiber(&[x, y], &[1, 0], &fib).map_err(|e| e.to_string())?;
                    let pass = MukaiVector::new(r, res, s)
                        .and_then(|v| fine_moduli_check(&v))
                        .is_ok_and(|v| v.pass());
                    if pass {
                        expected.push((r, vec![x, y], s));
                    }
                }
            }
        }
    }
    let found: Vec<(i64, Vec<i64>, i64)> = par.entries.iter().map(|e| (e.r, e.l.clone(), e.s)).collect();
    ensure(found == expected, || format!("scan {found:?} vs oracle {expected:?}"))?;
    for y in -1..=1 {
        ensure(expected.contains(&(2, vec![1, y], 1)), || {
            format!("missing (2, H + {y}l, 1)")
        })?;
    }

    let first = run(Verb::Scan, &config, Options::default())
        .map_err(|e| e.to_string())?
        .render_json();
    for _ in 0..5 {
        let again = run(Verb::Scan, &config, Options::default())
            .map_err(|e| e.to_string())?
            .render_json();
        ensure(again == first, || "repeated CLI scans differ".into())?;
    }
    ensure(first.contains(&format!("\"count\": {}", found.len())), || {
        "report count mismatch".into()
    })
}

fn main() -> ExitCode {
    let mut rng = StdRng::seed_from_u64(SEED);
    let criteria: Vec<Criterion> = vec![
        (
            "1 octic ring and fiber restriction",
            Duration::from_secs(1),
            Box::new(|_| ring_example()),
        ),
        (
            "2 fine-moduli instance (2, H + yl, 1)",
            Duration::from_secs(1),
            Box::new(|_| admissibility()),
        ),
        (
            "3 rank-one invariants ch3 = n, 3n",
            Duration::from_secs(1),
            Box::new(|_| rank_one_invariants()),
        ),
        (
            "4 Hurwitz identity, 10000 tuples",
            Duration::from_secs(5),
            Box::new(hurwitz_identity),
        ),
        (
            "5 discriminant closed form, 1000 kernels",
            Duration::from_secs(10),
            Box::new(discriminant_closed_form_check),
        ),
        (
            "6 polarization bound M0 = 162",
            Duration::from_secs(1),
            Box::new(|_| polarization_bound()),
        ),
        (
            "7 S x S x B oracle, 50 instances",
            Duration::from_secs(10),
            Box::new(oracle_equivalence),
        ),
        (
            "8 reflexive v² = 0, 1000 twist pairs",
            Duration::from_secs(5),
            Box::new(reflexive_and_twist),
        ),
        (
            "9 scan soundness and determinism",
            Duration::from_secs(10),
            Box::new(|_| scan_soundness()),
        ),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check(&mut rng);
        let elapsed = start.elapsed();
        let verdict = match (&outcome, elapsed <= limit) {
            (Ok(()), true) => "PASS".to_string(),
            (Ok(()), false) => format!("FAIL (over the {limit:?} limit)"),
            (Err(e), _) => format!("FAIL ({e})"),
        };
        if !verdict.starts_with("PASS") {
            failed += 1;
        }
        println!("{verdict:<4} criterion {name} [{:.3}s]", elapsed.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
