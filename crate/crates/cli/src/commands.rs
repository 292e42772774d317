//! One function per verb. Each turns a config into a [`Report`].

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use k3fm::chow::{ChowError, IntersectionRing, IntersectionRingSpec, RingElement};
use k3fm::fiber_k3::{
    fine_moduli_check, hilbert_polynomial, restrict_to_fiber, FiberError, FibrationGeometry, MukaiVector,
};
use k3fm::rational::{q, zero};
use k3fm::search::{scan_mukai, scan_rank_one, RankOneKind, ScanFilter, ScanRequest, SearchError};
use k3fm::spectral::{
    dual_rank_one_low_degree, fiber_degree_k, ramification_warnings, spectral_chern_general, spectral_chern_rank_one,
    trivial_fibration_chern, twist, twist_degree, ChernCharacter, KernelData, RamificationWarning, ReflexiveK3Spec,
    SpectralDatum, SpectralError, TrivialFibration,
};
use k3fm::stability::{discriminant_closed_form, extension_check, relative_degree, stability_bound, StabilityError};
use k3fm::Rational;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{
    CharacterSection, ConfigDocument, ConfigError, DivisorMap, FilterName, RationalMap, ScanMode, SpectralKind,
};
use crate::report::{linear_combination, named, pairings, rational, Report, Table, Verdict};

pub const REFLEXIVE_PRESET: &str = "reflexive-k3-x-elliptic";

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Chow(#[from] ChowError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::Subcommand)]
pub enum Verb {
    /// Validate the ring and print its intersection table.
    RingCheck,
    /// Chern characters of a spectral transform.
    Spectral,
    /// Discriminant, Bogomolov check and the polarization bound.
    Stability,
    /// Enumerate admissible data over a parameter box.
    Scan,
    /// Slope conditions for an extension.
    Extension,
    /// Cross-check the closed forms on a reflexive K3 times an elliptic curve.
    OracleVerify,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::RingCheck => "ring-check",
            Verb::Spectral => "spectral",
            Verb::Stability => "stability",
            Verb::Scan => "scan",
            Verb::Extension => "extension",
            Verb::OracleVerify => "oracle-verify",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Options {
    pub max_results: Option<usize>,
}

/// Ring, fibration and the product model when the preset is used.
struct Context<'a> {
    config: &'a ConfigDocument,
    ring: IntersectionRing,
    trivial: Option<TrivialFibration>,
}

impl<'a> Context<'a> {
    fn new(config: &'a ConfigDocument) -> Result<Self, AppError> {
        let section = &config.ring;
        match section.preset.as_deref() {
            Some(REFLEXIVE_PRESET) => {
                if !section.divisors.is_empty() || !section.triple.is_empty() {
                    return Err(AppError::Invalid(format!(
                        "[ring] with preset = \"{REFLEXIVE_PRESET}\" takes no divisors or triple entries"
                    )));
                }
                let trivial = TrivialFibration::new(ReflexiveK3Spec::standard())?;
                Ok(Self {
                    config,
                    ring: trivial.fibration().ring().clone(),
                    trivial: Some(trivial),
                })
            }
            Some(other) => Err(AppError::Invalid(format!(
                "unknown ring preset `{other}` (known: {REFLEXIVE_PRESET})"
            ))),
            None => {
                let names = &section.divisors;
                let mut entries = Vec::with_capacity(section.triple.len());
                for (key, &value) in &section.triple {
                    let parts: Vec<&str> = key.split('.').collect();
                    if parts.len() != 3 {
                        return Err(AppError::Invalid(format!(
                            "triple key `{key}` must name three divisors, as in `H.H.l`"
                        )));
                    }
                    let mut idx = [0usize; 3];
                    for (slot, part) in idx.iter_mut().zip(&parts) {
                        *slot = names
                            .iter()
                            .position(|n| n == part)
                            .ok_or_else(|| ChowError::UnknownClass(part.to_string()))?;
                    }
                    entries.push((idx, value));
                }
                let spec = IntersectionRingSpec::threefold_from_entries(names.clone(), entries)?;
                Ok(Self {
                    config,
                    ring: IntersectionRing::from_spec(&spec)?,
                    trivial: None,
                })
            }
        }
    }

    fn names(&self) -> &[String] {
        self.ring.names()
    }

    fn divisor(&self, map: &DivisorMap, what: &str) -> Result<Vec<i64>, AppError> {
        let mut out = vec![0; self.ring.rank()];
        for (name, &c) in map {
            let i = self
                .ring
                .index_of(name)
                .map_err(|_| AppError::Invalid(format!("{what}: unknown divisor `{name}`")))?;
            out[i] = c;
        }
        Ok(out)
    }

    fn rational_vector(&self, map: &RationalMap, what: &str) -> Result<Vec<Rational>, AppError> {
        let mut out = vec![zero(); self.ring.rank()];
        for (name, v) in map {
            let i = self
                .ring
                .index_of(name)
                .map_err(|_| AppError::Invalid(format!("{what}: unknown divisor `{name}`")))?;
            out[i] = v.0.clone();
        }
        Ok(out)
    }

    fn fibration(&self) -> Result<Option<FibrationGeometry>, AppError> {
        match (&self.config.fibration, &self.trivial) {
            (Some(f), _) => {
                let fiber = self.divisor(&f.fiber, "fibration.fiber")?;
                Ok(Some(FibrationGeometry::new(self.ring.clone(), fiber, f.base_genus)?))
            }
            (None, Some(t)) => Ok(Some(t.fibration().clone())),
            (None, None) => Ok(None),
        }
    }

    fn require_fibration(&self) -> Result<FibrationGeometry, AppError> {
        self.fibration()?.ok_or(ConfigError::MissingSection("fibration").into())
    }

    fn polarization(&self) -> Result<Vec<i64>, AppError> {
        let p = self
            .config
            .polarization
            .as_ref()
            .ok_or(ConfigError::MissingSection("polarization"))?;
        self.divisor(&p.h0, "polarization.h0")
    }

    fn character(&self, c: &CharacterSection, what: &str) -> Result<ChernCharacter, AppError> {
        let ch1 = self.rational_vector(&c.ch1, &format!("{what}.ch1"))?;
        let ch2 = self.rational_vector(&c.ch2, &format!("{what}.ch2"))?;
        Ok(ChernCharacter::new(c.ch0.0.clone(), ch1, ch2, c.ch3.0.clone()))
    }

    fn character_json(&self, ch: &ChernCharacter) -> Value {
        json!({
            "ch0": rational(ch.rank()),
            "ch1": named(self.names(), ch.ch1()),
            "ch2": named(self.names(), ch.ch2()),
            "ch3": rational(ch.ch3()),
        })
    }

    fn character_rows(&self, table: &mut Table, label: &str, ch: &ChernCharacter) {
        let key = |k: &str| {
            if label.is_empty() {
                k.to_string()
            } else {
                format!("{label} {k}")
            }
        };
        table.row([key("ch0"), ch.rank().to_string()]);
        table.row([key("ch1"), linear_combination(self.names(), ch.ch1())]);
        table.row([key("ch2"), pairings(self.names(), ch.ch2())]);
        table.row([key("ch3"), ch.ch3().to_string()]);
    }
}

pub fn run(verb: Verb, config: &ConfigDocument, opts: Options) -> Result<Report, AppError> {
    let ctx = Context::new(config)?;
    let mut report = Report::new(verb.name(), config.clone());
    match verb {
        Verb::RingCheck => ring_check(&ctx, &mut report)?,
        Verb::Spectral => spectral(&ctx, &mut report)?,
        Verb::Stability => stability(&ctx, &mut report)?,
        Verb::Scan => scan(&ctx, &mut report, opts)?,
        Verb::Extension => extension(&ctx, &mut report)?,
        Verb::OracleVerify => oracle_verify(&ctx, &mut report)?,
    }
    Ok(report)
}

fn ring_check(ctx: &Context<'_>, report: &mut Report) -> Result<(), AppError> {
    let names = ctx.names().to_vec();
    let n = names.len();
    let mut table = Table::new("intersection numbers", ["triple", "value"]);
    let mut triples = serde_json::Map::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let key = format!("{}.{}.{}", names[i], names[j], names[k]);
                let v = ctx.ring.triple(i, j, k);
                table.row([key.clone(), v.to_string()]);
                triples.insert(key, json!(v));
            }
        }
    }
    report.set("divisors", json!(names));
    report.set("triple", Value::Object(triples));
    report.tables.push(table);
    report.verdict(Verdict::new(
        "symmetric tensor",
        true,
        format!("{n} divisor class{}", if n == 1 { "" } else { "es" }),
    ));

    let Some(fib) = ctx.fibration()? else {
        return Ok(());
    };
    report.verdict(Verdict::new(
        "fiber class isotropic",
        true,
        format!(
            "f = {} with f²·D = 0 for every D",
            linear_combination(&names, &fib.fiber_class().deg2)
        ),
    ));
    report.set(
        "fibration",
        json!({
            "fiber": named(&names, &fib.fiber_class().deg2),
            "base_genus": fib.base_genus(),
            "alpha": fib.alpha(),
        }),
    );
    let Some(_) = &ctx.config.polarization else {
        return Ok(());
    };
    let h0 = ctx.polarization()?;
    let mut fiber_table = Table::key_value("fiber restriction");
    let hr = restrict_to_fiber(&h0, &h0, &fib)?;
    fiber_table.row(["H_t²", &hr.ht2.to_string()]);
    let mut restriction = json!({ "ht2": hr.ht2 });

    if let Some(m) = &ctx.config.mukai {
        let l = ctx.divisor(&m.l, "mukai.L")?;
        let res = restrict_to_fiber(&l, &h0, &fib)?;
        fiber_table.row(["L_t·H_t", &res.lt_ht.to_string()]);
        fiber_table.row(["L_t²", &res.lt2.to_string()]);
        restriction = json!({ "ht2": res.ht2, "lt_ht": res.lt_ht, "lt2": res.lt2 });
        let v = MukaiVector::new(m.r, res, m.s)?;
        let hp = hilbert_polynomial(&v)?;
        fiber_table.row(["a(L_t)", &v.a().to_string()]);
        fiber_table.row([
            "P(m)".to_string(),
            format!("({})m² + {}m + {}", hp.quadratic, hp.linear, hp.constant),
        ]);
        let mut mukai = json!({
            "a": rational(&v.a()),
            "hilbert": {
                "quadratic": rational(&hp.quadratic),
                "linear": hp.linear,
                "constant": hp.constant,
            },
        });
        match fine_moduli_check(&v) {
            Ok(verdict) => {
                let (x, y, z) = verdict.gcd_triple;
                fiber_table.row(["gcd triple".to_string(), format!("({x}, {y}, {z}) -> {}", verdict.gcd)]);
                fiber_table.row(["v²", &verdict.mukai_square.to_string()]);
                mukai["gcd_triple"] = json!([x, y, z]);
                mukai["gcd"] = json!(verdict.gcd);
                mukai["mukai_square"] = json!(verdict.mukai_square);
                report.verdict(Verdict::new(
                    "fine moduli: gcd = 1",
                    verdict.coprime(),
                    format!("gcd({x}, {y}, {z}) = {}", verdict.gcd),
                ));
                report.verdict(Verdict::new(
                    "fine moduli: v² = 0",
                    verdict.isotropic(),
                    format!("v² = {}", verdict.mukai_square),
                ));
            }
            Err(FiberError::NonIntegralA(a)) => {
                report.verdict(Verdict::new(
                    "fine moduli: gcd = 1",
                    false,
                    format!("a(L_t) = {a} is not an integer"),
                ));
            }
            Err(e) => return Err(e.into()),
        }
        report.set("mukai", mukai);
    }
    report.set("restriction", restriction);
    report.tables.push(fiber_table);
    Ok(())
}

/// Character computed from the `[spectral]` (and `[kernel]`) sections.
struct SpectralRun {
    datum: SpectralDatum,
    character: ChernCharacter,
    /// The untwisted character, when a twist was applied.
    untwisted: Option<ChernCharacter>,
    kernel: Option<KernelData>,
}

fn spectral_datum(ctx: &Context<'_>) -> Result<SpectralDatum, AppError> {
    let s = ctx
        .config
        .spectral
        .as_ref()
        .ok_or(ConfigError::MissingSection("spectral"))?;
    let mut sd = SpectralDatum::new(s.n, s.g, s.d)?;
    if let Some(cover) = &s.cover {
        sd = sd.with_cover_class(ctx.rational_vector(cover, "spectral.cover")?);
    }
    Ok(sd)
}

fn kernel_data(ctx: &Context<'_>) -> Result<KernelData, AppError> {
    let k = ctx
        .config
        .kernel
        .as_ref()
        .ok_or(ConfigError::MissingSection("kernel"))?;
    Ok(KernelData {
        r: k.r,
        l: ctx.divisor(&k.l, "kernel.L")?,
        s: k.s,
        g1: k.g1.as_ref().map(|g| ctx.rational_vector(g, "kernel.g1")).transpose()?,
        g2: ctx.rational_vector(&k.g2, "kernel.g2")?,
        g3: k.g3.0.clone(),
        cq: k.cq,
    })
}

fn compute_spectral(ctx: &Context<'_>, fib: &FibrationGeometry) -> Result<SpectralRun, AppError> {
    let s = ctx
        .config
        .spectral
        .as_ref()
        .ok_or(ConfigError::MissingSection("spectral"))?;
    let datum = spectral_datum(ctx)?;
    let mut kernel = None;
    let base = match s.kind {
        SpectralKind::General => {
            let kd = kernel_data(ctx)?;
            let ch = spectral_chern_general(fib, &datum, &kd)?;
            kernel = Some(kd);
            ch
        }
        SpectralKind::RankOne => spectral_chern_rank_one(fib, &datum)?,
        SpectralKind::TrivialFibration => {
            let trivial = ctx.trivial.as_ref().ok_or_else(|| {
                AppError::Invalid(format!(
                    "kind = \"trivial-fibration\" needs [ring] preset = \"{REFLEXIVE_PRESET}\""
                ))
            })?;
            let cover = datum.checked_cover(trivial.fibration())?;
            let (ce, hc) = trivial.cover_pairings(&cover.deg4)?;
            let as_int = |x: Rational, name: &str| {
                k3fm::rational::to_i64(&x).ok_or_else(|| AppError::Invalid(format!("{name} = {x} is not an integer")))
            };
            let ce = s.ce.map_or_else(|| as_int(ce, "[C]·E"), Ok)?;
            let hc = s.hc.map_or_else(|| as_int(hc, "H·[C]"), Ok)?;
            trivial_fibration_chern(&datum, trivial.k3(), fib.base_genus(), ce, hc)?
        }
    };
    match &s.twist {
        Some(t) => {
            let d = ctx.ring.divisor(&ctx.divisor(t, "spectral.twist")?)?;
            let twisted = twist(&ctx.ring, &base, &d)?;
            Ok(SpectralRun {
                datum,
                character: twisted,
                untwisted: Some(base),
                kernel,
            })
        }
        None => Ok(SpectralRun {
            datum,
            character: base,
            untwisted: None,
            kernel,
        }),
    }
}

fn spectral_summary(ctx: &Context<'_>, fib: &FibrationGeometry, run: &SpectralRun, report: &mut Report) -> Table {
    let sd = &run.datum;
    let r = sd.ramification(fib.base_genus());
    let mut table = Table::key_value("spectral data");
    table.row(["n", &sd.n.to_string()]);
    table.row(["g", &sd.g.to_string()]);
    table.row(["d", &sd.d.to_string()]);
    table.row(["g_B", &fib.base_genus().to_string()]);
    table.row(["chi", &sd.chi().to_string()]);
    table.row(["R", &r.to_string()]);
    table.row(["chi - alpha n", &twist_degree(fib, sd).to_string()]);
    let mut results = json!({
        "n": sd.n,
        "g": sd.g,
        "d": sd.d,
        "base_genus": fib.base_genus(),
        "chi": sd.chi(),
        "ramification": r,
        "twist_degree": twist_degree(fib, sd),
    });
    if let Some(kd) = &run.kernel {
        let k = fiber_degree_k(fib, sd, kd);
        table.row(["k", &k.to_string()]);
        results["k"] = json!(k);
    }
    for w in ramification_warnings(r) {
        report.warnings.push(match w {
            RamificationWarning::Negative => format!("R = {r} < 0: no cover of this genus and degree exists"),
            RamificationWarning::Odd => format!("R = {r} is odd"),
        });
    }
    if let Some(c) = &sd.cover_class {
        table.row(["[C]".to_string(), pairings(ctx.names(), c)]);
        results["cover"] = named(ctx.names(), c);
    }
    report.set("spectral", results);
    table
}

fn spectral(ctx: &Context<'_>, report: &mut Report) -> Result<(), AppError> {
    let fib = ctx.require_fibration()?;
    let run = compute_spectral(ctx, &fib)?;
    let mut table = spectral_summary(ctx, &fib, &run, report);
    let kind = ctx.config.spectral.as_ref().map(|s| s.kind).expect("checked");
    report.verdict(Verdict::new(
        "ramification non-negative",
        run.datum.ramification(fib.base_genus()) >= 0,
        format!("R = {}", run.datum.ramification(fib.base_genus())),
    ));

    if let Some(base) = &run.untwisted {
        ctx.character_rows(&mut table, "untwisted", base);
        report.set("untwisted_character", ctx.character_json(base));
    }
    ctx.character_rows(&mut table, "", &run.character);
    report.set("character", ctx.character_json(&run.character));

    if kind == SpectralKind::RankOne {
        let dual = dual_rank_one_low_degree(&fib, &run.datum)?;
        table.row(["dual ch0", &dual.ch0.to_string()]);
        table.row(["dual ch1".to_string(), linear_combination(ctx.names(), &dual.ch1)]);
        table.row(["dual ch2, ch3", "unspecified"]);
        report.set(
            "dual",
            json!({
                "ch0": rational(&dual.ch0),
                "ch1": named(ctx.names(), &dual.ch1),
                "ch2": Value::Null,
                "ch3": Value::Null,
            }),
        );
    }
    if kind == SpectralKind::TrivialFibration {
        let trivial = ctx.trivial.as_ref().expect("checked in compute_spectral");
        let oracle = trivial.transform_oracle(&run.datum)?;
        let closed = run.untwisted.as_ref().unwrap_or(&run.character);
        let agree = &oracle == closed;
        report.set("oracle_verified", json!(agree));
        report.verdict(Verdict::new(
            "oracle-verified",
            agree,
            "closed form equals the direct push-forward on S×S×B, twisted by -H",
        ));
    }
    report.tables.push(table);
    Ok(())
}

fn stability(ctx: &Context<'_>, report: &mut Report) -> Result<(), AppError> {
    let fib = ctx.require_fibration()?;
    let run = compute_spectral(ctx, &fib)?;
    let mut table = spectral_summary(ctx, &fib, &run, report);
    ctx.character_rows(&mut table, "", &run.character);
    report.set("character", ctx.character_json(&run.character));
    report.tables.push(table);

    let h0_coeffs = ctx.polarization()?;
    let h0 = ctx.ring.divisor(&h0_coeffs)?;
    let bound = stability_bound(&run.character, &h0, &fib)?;
    let degree = relative_degree(&run.character, &h0, &fib)?;
    let names = ctx.names();
    let mut t = Table::key_value("stability");
    t.row(["H0".to_string(), linear_combination(names, &h0.deg2)]);
    t.row(["relative degree".to_string(), degree.to_string()]);
    t.row(["B".to_string(), pairings(names, &bound.discriminant)]);
    t.row(["B·H0".to_string(), bound.bh0.to_string()]);
    t.row(["H0²·f".to_string(), bound.h02f.to_string()]);
    t.row(["M0".to_string(), bound.m0.to_string()]);
    t.row(["ceil(M0)".to_string(), bound.m0_ceil.to_string()]);
    t.row(["H0 + M0 f".to_string(), linear_combination(names, &bound.polarization)]);
    report.set(
        "stability",
        json!({
            "relative_degree": rational(&degree),
            "discriminant": named(names, &bound.discriminant),
            "bh0": rational(&bound.bh0),
            "h02f": rational(&bound.h02f),
            "m0": rational(&bound.m0),
            "m0_ceil": bound.m0_ceil.to_string(),
            "polarization": named(names, &bound.polarization),
        }),
    );
    report.verdict(Verdict::new(
        "Bogomolov B·H0 >= 0",
        !bound.bogomolov_violated,
        format!("B·H0 = {}", bound.bh0),
    ));
    if let Some(kd) = &run.kernel {
        let closed = discriminant_closed_form(&fib, &run.datum, kd)?;
        let agree = closed == bound.discriminant;
        t.row(["B (kernel form)".to_string(), pairings(names, &closed)]);
        report.verdict(Verdict::new(
            "discriminant closed form",
            agree,
            "n²L² - 2n(C·Q)(L·f) - 2rn G2 against 2m c2 - (m-1) c1²",
        ));
    }
    report.tables.push(t);
    Ok(())
}

fn range(r: Option<[i64; 2]>, name: &str, default: RangeInclusive<i64>) -> Result<RangeInclusive<i64>, AppError> {
    match r {
        Some([lo, hi]) if lo > hi => Err(SearchError::EmptyRange(name.to_string()).into()),
        Some([lo, hi]) => Ok(lo..=hi),
        None => Ok(default),
    }
}

fn scan(ctx: &Context<'_>, report: &mut Report, opts: Options) -> Result<(), AppError> {
    let s = ctx.config.scan.as_ref().ok_or(ConfigError::MissingSection("scan"))?;
    let fib = ctx.require_fibration()?;
    let h = ctx.polarization()?;
    let mut req = ScanRequest::new(fib, h);
    let names = ctx.names().to_vec();
    for (name, [lo, hi]) in &s.l {
        let i = ctx
            .ring
            .index_of(name)
            .map_err(|_| AppError::Invalid(format!("scan.L: unknown divisor `{name}`")))?;
        req.l_ranges[i] = range(Some([*lo, *hi]), &format!("L.{name}"), 0..=0)?;
    }
    req.r_range = range(s.r, "r", 1..=1)?;
    req.s_range = range(s.s, "s", 0..=0)?;
    req.n_range = range(s.n, "n", 1..=1)?;
    req.g_range = range(s.g, "g", 0..=0)?;
    req.d_range = range(s.d, "d", i64::MIN / 4..=i64::MAX / 4)?;
    req.filters = s
        .filters
        .iter()
        .map(|f| match f {
            FilterName::FineModuli => ScanFilter::FineModuli,
            FilterName::DegreeZero => ScanFilter::DegreeZero,
            FilterName::C1ZeroAfterTwist => ScanFilter::C1ZeroAfterTwist,
            FilterName::BogomolovNonneg => ScanFilter::BogomolovNonneg,
        })
        .collect::<BTreeSet<_>>();
    let mut covers = BTreeMap::new();
    for (key, class) in &s.covers {
        let n: i64 = key
            .parse()
            .map_err(|_| AppError::Invalid(format!("scan.covers: key `{key}` is not a degree")))?;
        covers.insert(n, ctx.rational_vector(class, &format!("scan.covers.{key}"))?);
    }
    req.covers = covers;
    req.max_results = opts.max_results.or(s.max_results);

    match s.mode {
        ScanMode::Mukai => {
            let result = scan_mukai(&req)?;
            let mut header = vec!["r".to_string()];
            header.extend(names.iter().map(|n| format!("L.{n}")));
            header.extend(["s", "Ht²", "Lt·Ht", "Lt²", "gcd triple"].map(String::from));
            let mut table = Table::new("admissible Mukai vectors", header);
            let mut entries = Vec::new();
            for e in &result.entries {
                let (x, y, z) = e.verdict.gcd_triple;
                let mut row = vec![e.r.to_string()];
                row.extend(e.l.iter().map(ToString::to_string));
                row.extend([
                    e.s.to_string(),
                    e.restriction.ht2.to_string(),
                    e.restriction.lt_ht.to_string(),
                    e.restriction.lt2.to_string(),
                    format!("({x}, {y}, {z})"),
                ]);
                table.row(row);
                let l: serde_json::Map<String, Value> =
                    names.iter().zip(&e.l).map(|(n, v)| (n.clone(), json!(v))).collect();
                entries.push(json!({
                    "r": e.r,
                    "L": l,
                    "s": e.s,
                    "restriction": { "ht2": e.restriction.ht2, "lt_ht": e.restriction.lt_ht, "lt2": e.restriction.lt2 },
                    "gcd_triple": [x, y, z],
                    "mukai_square": e.verdict.mukai_square,
                }));
            }
            report.set("points_examined", json!(result.points_examined));
            report.set("count", json!(entries.len()));
            report.set("entries", Value::Array(entries));
            report.tables.push(table);
        }
        ScanMode::RankOne => {
            let result = scan_rank_one(&req)?;
            let mut table = Table::new(
                "rank-one spectral data",
                ["n", "g", "d", "R", "kind", "ch0", "ch1", "ch3", "M0"],
            );
            let mut entries = Vec::new();
            for e in &result.entries {
                let kind = match e.kind {
                    RankOneKind::DegreeZero => "degree-zero",
                    RankOneKind::C1ZeroAfterTwist => "c1-zero-after-twist",
                };
                let m0 = e
                    .stability
                    .as_ref()
                    .map(|s| s.m0.to_string())
                    .unwrap_or_else(|| "-".into());
                table.row([
                    e.n.to_string(),
                    e.g.to_string(),
                    e.d.to_string(),
                    e.ramification.to_string(),
                    kind.to_string(),
                    e.ch0.to_string(),
                    format!("{}f", e.ch1_fiber_coefficient),
                    e.ch3.to_string(),
                    m0,
                ]);
                let mut entry = json!({
                    "n": e.n, "g": e.g, "d": e.d, "ramification": e.ramification, "kind": kind,
                    "ch0": e.ch0, "ch1_fiber_coefficient": e.ch1_fiber_coefficient, "ch3": e.ch3,
                });
                if let Some(ch) = &e.character {
                    entry["character"] = ctx.character_json(ch);
                }
                if let Some(st) = &e.stability {
                    entry["bh0"] = rational(&st.bh0);
                    entry["m0"] = rational(&st.m0);
                }
                entries.push(entry);
            }
            report.set("points_examined", json!(result.points_examined));
            report.set("count", json!(entries.len()));
            report.set("entries", Value::Array(entries));
            report.tables.push(table);
        }
    }
    Ok(())
}

fn extension(ctx: &Context<'_>, report: &mut Report) -> Result<(), AppError> {
    let e = ctx
        .config
        .extension
        .as_ref()
        .ok_or(ConfigError::MissingSection("extension"))?;
    let sub = ctx.character(&e.sub, "extension.sub")?;
    let quotient = ctx.character(&e.quotient, "extension.quotient")?;
    let h = ctx.ring.divisor(&ctx.divisor(&e.h, "extension.h")?)?;
    let v = extension_check(&ctx.ring, &sub, &quotient, &h)?;
    let mut t = Table::key_value("extension 0 -> E -> F -> G -> 0");
    t.row(["mu(E)", &v.mu_e.to_string()]);
    t.row(["mu(G)", &v.mu_g.to_string()]);
    t.row(["mu(F)", &v.mu_f.to_string()]);
    t.row(["mu(E) + rk F/(rk E rk G)", &v.bound.to_string()]);
    report.tables.push(t);
    report.set(
        "extension",
        json!({
            "mu_e": rational(&v.mu_e),
            "mu_g": rational(&v.mu_g),
            "mu_f": rational(&v.mu_f),
            "rank_e": v.rank_e,
            "rank_g": v.rank_g,
            "bound": rational(&v.bound),
        }),
    );
    report.verdict(Verdict::new(
        "mu(G) < mu(E) + rk F/(rk E rk G)",
        v.bound_holds,
        format!("{} < {}", v.mu_g, v.bound),
    ));
    report.verdict(Verdict::new(
        "mu(E) < mu(F)",
        v.slope_increases,
        format!("{} < {}", v.mu_e, v.mu_f),
    ));
    Ok(())
}

fn oracle_verify(ctx: &Context<'_>, report: &mut Report) -> Result<(), AppError> {
    let trivial = ctx
        .trivial
        .as_ref()
        .ok_or_else(|| AppError::Invalid(format!("oracle-verify needs [ring] preset = \"{REFLEXIVE_PRESET}\"")))?;
    let fib = ctx.require_fibration()?;
    let names = ctx.names();

    // Identity kernel on a fixed test character.
    let probe = ChernCharacter(RingElement {
        deg0: q(2),
        deg2: vec![q(1), q(-1), q(3)],
        deg4: vec![q(4), q(12), q(-2)],
        deg6: q(5),
    });
    let identity = trivial.transform(&probe, &trivial.diagonal_structure_sheaf()?)? == probe;
    report.verdict(Verdict::new(
        "identity kernel",
        identity,
        "ch O_Δ transforms every class to itself",
    ));

    let td = trivial.threefold().to_numerical(&trivial.relative_todd())?;
    let td_ok = td
        == RingElement {
            deg0: q(1),
            deg2: vec![zero(); 3],
            deg4: vec![zero(), zero(), q(2)],
            deg6: zero(),
        };
    report.verdict(Verdict::new(
        "Td(X/B) = (1, 0, 2f, 0)",
        td_ok,
        pairings(names, &td.deg4),
    ));

    let sd = spectral_datum(ctx)?;
    let direct = trivial.kernel_transform(&sd)?;
    let closed = trivial.kernel_transform_closed_form(&sd)?;
    report.verdict(Verdict::new(
        "kernel transform",
        direct == closed,
        "push-forward of ch(i_*L)·Td·ch(N) against the closed form",
    ));
    let cover = sd.checked_cover(trivial.fibration())?;
    let (ce, hc) = trivial.cover_pairings(&cover.deg4)?;
    let as_int =
        |x: &Rational| k3fm::rational::to_i64(x).ok_or_else(|| AppError::Invalid(format!("{x} is not an integer")));
    let spectral = trivial_fibration_chern(&sd, trivial.k3(), fib.base_genus(), as_int(&ce)?, as_int(&hc)?)?;
    let oracle = trivial.transform_oracle(&sd)?;
    report.verdict(Verdict::new(
        "spectral character",
        spectral == oracle,
        "closed form against direct evaluation twisted by -H",
    ));

    let mut t = Table::key_value("reflexive K3 × elliptic curve");
    t.row(["[C]".to_string(), pairings(names, &cover.deg4)]);
    t.row(["[C]·E", &ce.to_string()]);
    t.row(["H·[C]", &hc.to_string()]);
    ctx.character_rows(&mut t, "kernel transform", &direct);
    ctx.character_rows(&mut t, "spectral", &oracle);
    report.tables.push(t);
    report.set(
        "oracle",
        json!({
            "ce": rational(&ce),
            "hc": rational(&hc),
            "kernel_transform": ctx.character_json(&direct),
            "kernel_transform_closed_form": ctx.character_json(&closed),
            "spectral": ctx.character_json(&spectral),
            "spectral_direct": ctx.character_json(&oracle),
        }),
    );
    Ok(())
}
