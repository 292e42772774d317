//! Configuration documents.
//!
//! Configs are TOML. Divisors are written as `{ name = coefficient }` maps
//! over the ring's divisor basis, curve classes by their intersection numbers
//! with that basis, and rationals either as integers or as `"p/q"` strings.
//! A JSON report can be fed back in place of a config; its `config` member is
//! used.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use k3fm::Rational;
use num::BigInt;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("TOML parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown key{} {}", if .0.len() == 1 { "" } else { "s" }, .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("missing section [{0}]")]
    MissingSection(&'static str),
    #[error("{0}")]
    Invalid(String),
}

/// An exact rational read from an integer or a `"p/q"` string and always
/// written back as a string.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Q(pub Rational);

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Q {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse = |t: &str| BigInt::from_str(t.trim()).map_err(|_| format!("`{s}` is not a rational"));
        match s.split_once('/') {
            Some((num, den)) => {
                let den = parse(den)?;
                if den == BigInt::from(0) {
                    return Err(format!("`{s}` has zero denominator"));
                }
                Ok(Q(Rational::new(parse(num)?, den)))
            }
            None => Ok(Q(Rational::from_integer(parse(s)?))),
        }
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;

        impl de::Visitor<'_> for Visitor {
            type Value = Q;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or a \"p/q\" string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
                Ok(Q(k3fm::rational::q(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
                Ok(Q(Rational::from_integer(BigInt::from(v))))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

/// Integer coefficients keyed by divisor name.
pub type DivisorMap = BTreeMap<String, i64>;
/// Rational values keyed by divisor name.
pub type RationalMap = BTreeMap<String, Q>;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub divisors: Vec<String>,
    /// Triple intersections keyed `"D1.D2.D3"`. Bare dotted TOML keys
    /// (`H.H.l = 4`) are accepted and flattened.
    #[serde(
        default,
        deserialize_with = "flat_triples",
        skip_serializing_if = "BTreeMap::is_empty"
    )]
    pub triple: BTreeMap<String, i64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TripleNode {
    Value(i64),
    Table(BTreeMap<String, TripleNode>),
}

fn flatten(prefix: &str, node: TripleNode, out: &mut BTreeMap<String, i64>) {
    match node {
        TripleNode::Value(v) => {
            out.insert(prefix.to_string(), v);
        }
        TripleNode::Table(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
    }
}

fn flat_triples<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BTreeMap<String, i64>, D::Error> {
    let raw = BTreeMap::<String, TripleNode>::deserialize(deserializer)?;
    let mut out = BTreeMap::new();
    for (k, v) in raw {
        flatten(&k, v, &mut out);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FibrationSection {
    pub fiber: DivisorMap,
    pub base_genus: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizationSection {
    pub h0: DivisorMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MukaiSection {
    pub r: i64,
    #[serde(rename = "L")]
    pub l: DivisorMap,
    pub s: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralKind {
    General,
    RankOne,
    TrivialFibration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSection {
    pub kind: SpectralKind,
    pub n: i64,
    pub g: i64,
    pub d: i64,
    /// Intersection numbers of the cover class with the divisor basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<RationalMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<DivisorMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ce: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hc: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSection {
    pub r: i64,
    #[serde(rename = "L")]
    pub l: DivisorMap,
    pub s: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1: Option<RationalMap>,
    pub g2: RationalMap,
    pub g3: Q,
    pub cq: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    Mukai,
    RankOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterName {
    FineModuli,
    DegreeZero,
    C1ZeroAfterTwist,
    BogomolovNonneg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSection {
    pub mode: ScanMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<[i64; 2]>,
    #[serde(rename = "L", default, skip_serializing_if = "BTreeMap::is_empty")]
    pub l: BTreeMap<String, [i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub filters: Vec<FilterName>,
    /// Cover classes keyed by the degree `n` as a string.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub covers: BTreeMap<String, RationalMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_results: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterSection {
    pub ch0: Q,
    #[serde(default)]
    pub ch1: RationalMap,
    #[serde(default)]
    pub ch2: RationalMap,
    #[serde(default = "zero_q")]
    pub ch3: Q,
}

fn zero_q() -> Q {
    Q(k3fm::rational::zero())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionSection {
    pub sub: CharacterSection,
    pub quotient: CharacterSection,
    pub h: DivisorMap,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigDocument {
    #[serde(default)]
    pub ring: RingSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibration: Option<FibrationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<PolarizationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mukai: Option<MukaiSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionSection>,
}

/// A parsed document plus the keys that were present but not understood.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: ConfigDocument,
    pub unknown_keys: Vec<String>,
}

fn collect<'de, D, E>(deserializer: D) -> Result<Loaded, E>
where
    D: Deserializer<'de, Error = E>,
{
    let mut unknown = Vec::new();
    // `serde_ignored` marks `Option` layers with a `?` segment; drop them.
    let config = serde_ignored::deserialize(deserializer, |path| {
        unknown.push(path.to_string().replace(".?", "").replace("?.", ""))
    })?;
    Ok(Loaded {
        config,
        unknown_keys: unknown,
    })
}

pub fn parse_toml(text: &str) -> Result<Loaded, ConfigError> {
    Ok(collect(toml::Deserializer::new(text))?)
}

/// Accepts a bare config object or a report carrying one under `config`.
pub fn parse_json(text: &str) -> Result<Loaded, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let inner = match value {
        serde_json::Value::Object(mut map) if map.contains_key("schema_version") => {
            map.remove("config").ok_or(ConfigError::MissingSection("config"))?
        }
        other => other,
    };
    Ok(collect(inner)?)
}

pub fn parse_str(text: &str, json: bool) -> Result<Loaded, ConfigError> {
    if json {
        parse_json(text)
    } else {
        parse_toml(text)
    }
}

/// Reads a config file; `.json` files (or text starting with `{`) are JSON.
pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    parse_str(&text, json)
}

impl Loaded {
    /// Fails on unknown keys when `strict`.
    pub fn into_config(self, strict: bool) -> Result<(ConfigDocument, Vec<String>), ConfigError> {
        if strict && !self.unknown_keys.is_empty() {
            return Err(ConfigError::UnknownKeys(self.unknown_keys));
        }
        Ok((self.config, self.unknown_keys))
    }
}
