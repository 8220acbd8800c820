//! Scenario files and built-in workloads.
//!
//! A scenario is a TOML description of a workload (content types, popularity
//! laws, default cache sizes and simulation parameters). Two built-ins,
//! `mix2011` and `mix2015`, pin the reference four-type Internet traffic
//! mixes so the CLI works without external files.

use std::path::Path;

use serde::Deserialize;

use crate::che::Catalog;
use crate::error::{Error, Result};
use crate::hierarchy::LayerPolicy;
use crate::traffic::{ContentType, PopularityLaw, TrafficMix};

/// Parses a byte size with an optional decimal unit suffix:
/// `KB = 10^3`, `MB = 10^6`, `GB = 10^9`, `TB = 10^12`, `PB = 10^15`.
pub fn parse_size(text: &str) -> Result<f64> {
    let s = text.trim();
    let split = s
        .find(|c: char| c.is_ascii_alphabetic())
        .unwrap_or(s.len());
    let (number, unit) = s.split_at(split);
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| Error::Scenario(format!("bad size `{text}`")))?;
    let factor = match unit.trim().to_ascii_uppercase().as_str() {
        "" | "B" => 1.0,
        "KB" => 1e3,
        "MB" => 1e6,
        "GB" => 1e9,
        "TB" => 1e12,
        "PB" => 1e15,
        other => {
            return Err(Error::Scenario(format!(
                "unknown unit `{other}` in `{text}` (use B, KB, MB, GB, TB, PB; decimal)"
            )))
        }
    };
    if !(value >= 0.0) {
        return Err(Error::Scenario(format!("negative size `{text}`")));
    }
    Ok(value * factor)
}

/// A size that may be written as a bare number of bytes or as text with a
/// unit suffix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SizeField {
    Number(f64),
    Text(String),
}

impl SizeField {
    fn bytes(&self) -> Result<f64> {
        match self {
            Self::Number(v) => Ok(*v),
            Self::Text(t) => parse_size(t),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
enum LawSpec {
    Zipf { alpha: f64 },
    Geometric { ratio: f64 },
    Uniform {},
    Explicit { weights: Vec<f64> },
}

impl LawSpec {
    fn build(&self, population: u64) -> Result<PopularityLaw> {
        match self {
            Self::Zipf { alpha } => PopularityLaw::zipf(*alpha, population),
            Self::Geometric { ratio } => PopularityLaw::geometric(*ratio, population),
            Self::Uniform {} => PopularityLaw::uniform(population),
            Self::Explicit { weights } => {
                if weights.len() as u64 != population {
                    return Err(Error::Scenario(format!(
                        "explicit law has {} weights for population {population}",
                        weights.len()
                    )));
                }
                PopularityLaw::explicit(weights.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeSpec {
    name: String,
    share: f64,
    population: u64,
    object_size: SizeField,
    law: LawSpec,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DefaultsSpec {
    c1: Option<SizeField>,
    c2: Option<SizeField>,
    seed: Option<u64>,
    requests: Option<u64>,
    warmup: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    label: Option<String>,
    #[serde(rename = "type")]
    types: Vec<TypeSpec>,
    #[serde(default)]
    defaults: DefaultsSpec,
}

/// Default knobs a scenario can carry for CLI commands.
#[derive(Debug, Clone)]
pub struct SimDefaults {
    pub c1: f64,
    pub c2: f64,
    pub seed: u64,
    pub requests: u64,
    /// `None` selects adaptive warmup.
    pub warmup: Option<u64>,
}

impl Default for SimDefaults {
    fn default() -> Self {
        Self {
            c1: 1e12,
            c2: 100e12,
            seed: 1,
            requests: 10_000_000,
            warmup: None,
        }
    }
}

/// The workload a scenario describes: a multi-type byte-sized mix, or one
/// popularity law analyzed in object units.
#[derive(Debug, Clone)]
pub enum Workload {
    Mix(TrafficMix),
    Homogeneous(PopularityLaw),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub label: String,
    pub workload: Workload,
    pub defaults: SimDefaults,
}

impl Scenario {
    pub fn catalog(&self) -> Result<Catalog> {
        match &self.workload {
            Workload::Mix(mix) => Ok(Catalog::from_mix(mix)),
            Workload::Homogeneous(law) => Catalog::homogeneous(law),
        }
    }

    pub fn mix(&self) -> Result<&TrafficMix> {
        match &self.workload {
            Workload::Mix(mix) => Ok(mix),
            Workload::Homogeneous(_) => Err(Error::Scenario(
                "this command needs a multi-type mix scenario".into(),
            )),
        }
    }

    pub fn law(&self) -> Result<&PopularityLaw> {
        match &self.workload {
            Workload::Homogeneous(law) => Ok(law),
            Workload::Mix(_) => Err(Error::Scenario(
                "this command needs a single-law scenario".into(),
            )),
        }
    }
}

fn build_scenario(file: ScenarioFile, fallback_label: &str) -> Result<Scenario> {
    if file.types.is_empty() {
        return Err(Error::Scenario("scenario declares no content types".into()));
    }
    let defaults = SimDefaults {
        c1: match &file.defaults.c1 {
            Some(s) => s.bytes()?,
            None => SimDefaults::default().c1,
        },
        c2: match &file.defaults.c2 {
            Some(s) => s.bytes()?,
            None => SimDefaults::default().c2,
        },
        seed: file.defaults.seed.unwrap_or(1),
        requests: file.defaults.requests.unwrap_or(10_000_000),
        warmup: file.defaults.warmup,
    };
    let label = file
        .label
        .clone()
        .unwrap_or_else(|| fallback_label.to_string());
    let workload = if file.types.len() == 1 && file.types[0].share == 1.0 {
        // single-type scenarios run in object units against the bare law
        Workload::Homogeneous(file.types[0].law.build(file.types[0].population)?)
    } else {
        let types = file
            .types
            .iter()
            .map(|t| {
                ContentType::new(
                    &t.name,
                    t.share,
                    t.population,
                    t.object_size.bytes()?,
                    t.law.build(t.population)?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Workload::Mix(TrafficMix::new(types)?)
    };
    Ok(Scenario {
        label,
        workload,
        defaults,
    })
}

/// The reference four-type traffic mix for one measurement year.
/// `year` selects the traffic shares; `vod_alpha` is 0.8 or 1.2 in the
/// reference tables but any positive value is accepted.
pub fn builtin_mix(year: u16, vod_alpha: f64) -> Result<TrafficMix> {
    let shares = match year {
        2011 => [0.18, 0.36, 0.23, 0.23],
        2015 => [0.16, 0.24, 0.23, 0.37],
        _ => {
            return Err(Error::Scenario(format!(
                "no built-in mix for year {year} (2011 and 2015 exist)"
            )))
        }
    };
    TrafficMix::new(vec![
        ContentType::new(
            "web",
            shares[0],
            100_000_000_000,
            10e3,
            PopularityLaw::zipf(0.8, 100_000_000_000)?,
        )?,
        ContentType::new(
            "file_sharing",
            shares[1],
            100_000,
            10e9,
            PopularityLaw::zipf(0.8, 100_000)?,
        )?,
        ContentType::new(
            "ugc",
            shares[2],
            100_000_000,
            10e6,
            PopularityLaw::zipf(0.8, 100_000_000)?,
        )?,
        ContentType::new(
            "vod",
            shares[3],
            10_000,
            100e6,
            PopularityLaw::zipf(vod_alpha, 10_000)?,
        )?,
    ])
}

/// Loads a scenario: `mix2011` and `mix2015` are built in (with the given
/// VoD exponent); anything else is read as a TOML file path.
pub fn load_scenario(name_or_path: &str, vod_alpha: f64) -> Result<Scenario> {
    match name_or_path {
        "mix2011" | "mix2015" => {
            let year = if name_or_path == "mix2011" { 2011 } else { 2015 };
            Ok(Scenario {
                label: format!("{year} vod_alpha={vod_alpha}"),
                workload: Workload::Mix(builtin_mix(year, vod_alpha)?),
                defaults: SimDefaults::default(),
            })
        }
        path => {
            if !Path::new(path).exists() {
                return Err(Error::UnknownScenario(path.to_string()));
            }
            let text = std::fs::read_to_string(path)?;
            let file: ScenarioFile = toml::from_str(&text)
                .map_err(|e| Error::Scenario(format!("{path}: {e}")))?;
            let stem = Path::new(path)
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or(path);
            build_scenario(file, stem)
        }
    }
}

/// The eight labeled (catalog, policy) rows of the reference savings table:
/// both years, both VoD exponents, shared and VoD-dedicated layer-1 policies.
pub fn savings_rows() -> Result<Vec<(String, Catalog, LayerPolicy)>> {
    let mut rows = Vec::new();
    for year in [2011u16, 2015] {
        for vod_alpha in [0.8, 1.2] {
            let catalog = Catalog::from_mix(&builtin_mix(year, vod_alpha)?);
            for (policy_name, policy) in [
                ("shared", LayerPolicy::Shared),
                ("vod-only", LayerPolicy::Dedicated(vec!["vod".into()])),
            ] {
                rows.push((
                    format!("{year} zipf{vod_alpha} {policy_name}"),
                    catalog.clone(),
                    policy,
                ));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write;

    #[test]
    fn sizes_parse_with_decimal_units() {
        assert_eq!(parse_size("0").unwrap(), 0.0);
        assert_eq!(parse_size("1234").unwrap(), 1234.0);
        assert_eq!(parse_size("10KB").unwrap(), 10e3);
        assert_eq!(parse_size("1.5 MB").unwrap(), 1.5e6);
        assert_eq!(parse_size("100 gb").unwrap(), 100e9);
        assert_eq!(parse_size("1TB").unwrap(), 1e12);
        assert_eq!(parse_size("2PB").unwrap(), 2e15);
        assert!(parse_size("10KiB").is_err());
        assert!(parse_size("abc").is_err());
        assert!(parse_size("-1KB").is_err());
    }

    #[test]
    fn builtins_pin_the_reference_shares() {
        let m11 = load_scenario("mix2011", 0.8).unwrap();
        let mix = m11.mix().unwrap();
        let shares: Vec<f64> = (0..4).map(|i| mix.traffic_share(i).unwrap()).collect();
        assert_eq!(shares, vec![0.18, 0.36, 0.23, 0.23]);

        let m15 = load_scenario("mix2015", 1.2).unwrap();
        let mix = m15.mix().unwrap();
        let shares: Vec<f64> = (0..4).map(|i| mix.traffic_share(i).unwrap()).collect();
        assert_eq!(shares, vec![0.16, 0.24, 0.23, 0.37]);
    }

    #[test]
    fn vod_volume_is_one_terabyte() {
        let mix = builtin_mix(2011, 0.8).unwrap();
        let i = mix.type_index("vod").unwrap();
        let volume = mix.unit_size(i).unwrap() * mix.population(i).unwrap() as f64;
        assert_relative_eq!(volume, 1e12);
    }

    fn write_scenario(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".toml").tempfile().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn file_scenario_roundtrip() {
        let f = write_scenario(
            r#"
label = "two types"

[[type]]
name = "a"
share = 0.7
population = 1000
object_size = "1MB"
law = { kind = "zipf", alpha = 0.8 }

[[type]]
name = "b"
share = 0.3
population = 50
object_size = "10MB"
law = { kind = "zipf", alpha = 1.2 }

[defaults]
c1 = "1GB"
seed = 7
"#,
        );
        let s = load_scenario(f.path().to_str().unwrap(), 0.8).unwrap();
        assert_eq!(s.label, "two types");
        assert_eq!(s.defaults.c1, 1e9);
        assert_eq!(s.defaults.seed, 7);
        let mix = s.mix().unwrap();
        assert_eq!(mix.type_names(), vec!["a", "b"]);
    }

    #[test]
    fn single_type_scenario_is_homogeneous() {
        let f = write_scenario(
            r#"
[[type]]
name = "only"
share = 1.0
population = 1000
object_size = 1
law = { kind = "uniform" }
"#,
        );
        let s = load_scenario(f.path().to_str().unwrap(), 0.8).unwrap();
        assert!(s.law().is_ok());
        assert!(s.mix().is_err());
        assert_eq!(s.law().unwrap().population(), 1000);
    }

    #[test]
    fn bad_share_sum_is_rejected_on_load() {
        let f = write_scenario(
            r#"
[[type]]
name = "a"
share = 0.5
population = 10
object_size = 1
law = { kind = "zipf", alpha = 1.0 }

[[type]]
name = "b"
share = 0.4
population = 10
object_size = 1
law = { kind = "zipf", alpha = 1.0 }
"#,
        );
        assert!(matches!(
            load_scenario(f.path().to_str().unwrap(), 0.8),
            Err(Error::ShareSum { .. })
        ));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let f = write_scenario(
            r#"
typo = 1

[[type]]
name = "a"
share = 1.0
population = 10
object_size = 1
law = { kind = "zipf", alpha = 1.0 }
"#,
        );
        assert!(matches!(
            load_scenario(f.path().to_str().unwrap(), 0.8),
            Err(Error::Scenario(_))
        ));
    }

    #[test]
    fn missing_scenario_is_a_clean_error() {
        assert!(matches!(
            load_scenario("no-such-scenario", 0.8),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn savings_rows_cover_the_reference_grid() {
        let rows = savings_rows().unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().any(|(l, _, _)| l == "2011 zipf0.8 shared"));
        assert!(rows.iter().any(|(l, _, _)| l == "2015 zipf1.2 vod-only"));
    }
}
