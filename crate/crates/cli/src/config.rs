//! Run configuration: domain/potential/density specs and their realization.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use specbound::lattice::LatticeDomain;
use specbound::rng::SplitMix64;
use specbound::spectral::Field;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domains: Vec<DomainSpec>,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub density: DensitySpec,
    #[serde(default)]
    pub k_range: KRange,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let config: RunConfig = serde_json::from_slice(&bytes)
            .with_context(|| format!("invalid config file {}", path.display()))?;
        config.validate()?;
        Ok((config, bytes))
    }

    pub fn validate(&self) -> Result<()> {
        if self.domains.is_empty() {
            bail!("config lists no domains");
        }
        self.potential.validate()?;
        self.density.validate()?;
        if self.tolerances.identity_tol < 0.0 || self.tolerances.slack_tol < 0.0 {
            bail!("tolerances must be nonnegative");
        }
        if let KRange::List(ks) = &self.k_range {
            if ks.is_empty() {
                bail!("explicit k list is empty");
            }
            if ks.contains(&0) {
                bail!("k out of range: k = 0 is never admissible");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpec {
    #[serde(rename = "box")]
    BoxShape(Vec<u32>),
    #[serde(rename = "lshape")]
    LShape(u32),
    Random {
        n: usize,
        size: usize,
        seed: u64,
    },
    File(String),
}

impl DomainSpec {
    /// Stable identifier used in reports; avoids commas so CSV cells stay
    /// unquoted for the common shapes.
    pub fn label(&self) -> String {
        match self {
            DomainSpec::BoxShape(dims) => {
                let dims: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
                format!("box:{}", dims.join("x"))
            }
            DomainSpec::LShape(arm) => format!("lshape:{arm}"),
            DomainSpec::Random { n, size, seed } => format!("random:{n}:{size}:{seed}"),
            DomainSpec::File(path) => format!("file:{path}"),
        }
    }

    /// Builds the domain; `base_dir` anchors relative file paths.
    pub fn realize(&self, base_dir: &Path) -> Result<LatticeDomain> {
        match self {
            DomainSpec::BoxShape(dims) => {
                LatticeDomain::make_box(dims.len(), dims).map_err(Into::into)
            }
            DomainSpec::LShape(arm) => LatticeDomain::make_l_shape(*arm).map_err(Into::into),
            DomainSpec::Random { n, size, seed } => {
                LatticeDomain::make_random_connected(*n, *size, *seed).map_err(Into::into)
            }
            DomainSpec::File(path) => {
                let path = resolve(base_dir, path);
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("cannot read domain file {}", path.display()))?;
                LatticeDomain::from_json(&text)
                    .with_context(|| format!("invalid domain file {}", path.display()))
            }
        }
    }
}

fn resolve(base_dir: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialSpec {
    #[default]
    Zero,
    Constant(f64),
    File(String),
    /// Seeded uniform draw on `[0, max)`.
    Uniform(f64),
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Constant(c) if *c < 0.0 || c.is_nan() => {
                bail!("potential must be nonnegative (constant {c})")
            }
            PotentialSpec::Uniform(max) if *max < 0.0 || max.is_nan() => {
                bail!("potential must be nonnegative (uniform upper bound {max})")
            }
            _ => Ok(()),
        }
    }

    pub fn realize(
        &self,
        domain: &Arc<LatticeDomain>,
        base_dir: &Path,
        seed: u64,
    ) -> Result<Field> {
        match self {
            PotentialSpec::Zero => Ok(Field::zeros(domain.clone())),
            PotentialSpec::Constant(c) => Ok(Field::constant(domain.clone(), *c)),
            PotentialSpec::File(path) => load_values(domain, &resolve(base_dir, path)),
            PotentialSpec::Uniform(max) => {
                let mut rng = SplitMix64::new(seed);
                Ok(Field::from_fn(domain.clone(), |_| rng.uniform(0.0, *max)))
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensitySpec {
    #[default]
    One,
    Constant(f64),
    File(String),
    /// Seeded uniform draw on `[lo, hi)` with `lo > 0`.
    Uniform(f64, f64),
}

impl DensitySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DensitySpec::Constant(c) if *c <= 0.0 || c.is_nan() => {
                bail!("density must be positive (constant {c})")
            }
            DensitySpec::Uniform(lo, hi) => {
                if *lo <= 0.0 || lo.is_nan() {
                    bail!("density must be positive (uniform lower bound {lo})");
                }
                if *hi < *lo || hi.is_nan() {
                    bail!("density range is empty ({lo}, {hi})");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn realize(
        &self,
        domain: &Arc<LatticeDomain>,
        base_dir: &Path,
        seed: u64,
    ) -> Result<Field> {
        match self {
            DensitySpec::One => Ok(Field::constant(domain.clone(), 1.0)),
            DensitySpec::Constant(c) => Ok(Field::constant(domain.clone(), *c)),
            DensitySpec::File(path) => load_values(domain, &resolve(base_dir, path)),
            DensitySpec::Uniform(lo, hi) => {
                let mut rng = SplitMix64::new(seed);
                Ok(Field::from_fn(domain.clone(), |_| rng.uniform(*lo, *hi)))
            }
        }
    }
}

/// Per-vertex value file: `{"values": [...]}` in lexicographic vertex order.
fn load_values(domain: &Arc<LatticeDomain>, path: &Path) -> Result<Field> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ValueFile {
        values: Vec<f64>,
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read value file {}", path.display()))?;
    let file: ValueFile = serde_json::from_str(&text)
        .with_context(|| format!("invalid value file {}", path.display()))?;
    Field::new(domain.clone(), file.values)
        .with_context(|| format!("value file {} does not match the domain", path.display()))
}

/// Which orders `k` to evaluate: every admissible one, or an explicit list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum KRange {
    #[default]
    All,
    List(Vec<usize>),
}

impl Serialize for KRange {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            KRange::All => serializer.serialize_str("all"),
            KRange::List(ks) => ks.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for KRange {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct KRangeVisitor;

        impl<'de> Visitor<'de> for KRangeVisitor {
            type Value = KRange;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"all\" or a list of positive integers")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<KRange, E> {
                if s == "all" {
                    Ok(KRange::All)
                } else {
                    Err(E::custom(format!("expected \"all\", got \"{s}\"")))
                }
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<KRange, A::Error> {
                let mut ks = Vec::new();
                while let Some(k) = seq.next_element::<usize>()? {
                    ks.push(k);
                }
                Ok(KRange::List(ks))
            }
        }

        deserializer.deserialize_any(KRangeVisitor)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol")]
    pub identity_tol: f64,
    #[serde(default = "default_tol")]
    pub slack_tol: f64,
}

fn default_tol() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity_tol: default_tol(),
            slack_tol: default_tol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: String,
    #[serde(default)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

/// Parses the `verify --potential` flag: `zero | const:c | file:p | uniform:v`.
pub fn parse_potential_flag(s: &str) -> Result<PotentialSpec> {
    if s == "zero" {
        return Ok(PotentialSpec::Zero);
    }
    if let Some(rest) = s.strip_prefix("const:") {
        return Ok(PotentialSpec::Constant(rest.parse()?));
    }
    if let Some(rest) = s.strip_prefix("file:") {
        return Ok(PotentialSpec::File(rest.to_string()));
    }
    if let Some(rest) = s.strip_prefix("uniform:") {
        return Ok(PotentialSpec::Uniform(rest.parse()?));
    }
    bail!("invalid potential spec \"{s}\" (expected zero|const:c|file:p|uniform:v)")
}

/// Parses the `verify --rho` flag: `one | const:c | file:p | uniform:lo,hi`.
pub fn parse_density_flag(s: &str) -> Result<DensitySpec> {
    if s == "one" {
        return Ok(DensitySpec::One);
    }
    if let Some(rest) = s.strip_prefix("const:") {
        return Ok(DensitySpec::Constant(rest.parse()?));
    }
    if let Some(rest) = s.strip_prefix("file:") {
        return Ok(DensitySpec::File(rest.to_string()));
    }
    if let Some(rest) = s.strip_prefix("uniform:") {
        let (lo, hi) = rest
            .split_once(',')
            .context("uniform density needs two bounds: uniform:lo,hi")?;
        return Ok(DensitySpec::Uniform(lo.trim().parse()?, hi.trim().parse()?));
    }
    bail!("invalid density spec \"{s}\" (expected one|const:c|file:p|uniform:lo,hi)")
}

/// Parses the `verify --k` flag: `all` or a comma-separated list.
pub fn parse_k_flag(s: &str) -> Result<KRange> {
    if s == "all" {
        return Ok(KRange::All);
    }
    let ks = s
        .split(',')
        .map(|part| part.trim().parse::<usize>().map_err(Into::into))
        .collect::<Result<Vec<usize>>>()
        .with_context(|| format!("invalid k list \"{s}\""))?;
    if ks.is_empty() || ks.contains(&0) {
        bail!("k out of range: k must be at least 1");
    }
    Ok(KRange::List(ks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = r#"{
            "seed": 42,
            "domains": [
                {"box": [3, 3]},
                {"lshape": 2},
                {"random": {"n": 2, "size": 25, "seed": 9}},
                {"file": "d.json"}
            ],
            "potential": {"uniform": 2.0},
            "density": {"uniform": [0.5, 2.0]},
            "k_range": [1, 2, 3],
            "tolerances": {"identity_tol": 1e-10, "slack_tol": 1e-8},
            "output": {"path": "report.csv", "format": "csv"}
        }"#;
        let config: RunConfig = serde_json::from_str(text).unwrap();
        config.validate().unwrap();
        assert_eq!(config.domains.len(), 4);
        assert_eq!(config.k_range, KRange::List(vec![1, 2, 3]));
        assert_eq!(config.domains[0].label(), "box:3x3");
        assert_eq!(config.domains[2].label(), "random:2:25:9");
    }

    #[test]
    fn defaults_kick_in() {
        let text = r#"{
            "domains": [{"box": [2]}],
            "output": {"path": "r.csv"}
        }"#;
        let config: RunConfig = serde_json::from_str(text).unwrap();
        config.validate().unwrap();
        assert!(matches!(config.potential, PotentialSpec::Zero));
        assert!(matches!(config.density, DensitySpec::One));
        assert_eq!(config.k_range, KRange::All);
        assert_eq!(config.tolerances.identity_tol, 1e-9);
        assert_eq!(config.seed, 0);
    }

    #[test]
    fn k_range_accepts_all_keyword() {
        let config: RunConfig = serde_json::from_str(
            r#"{"domains": [{"box": [2]}], "k_range": "all", "output": {"path": "r.csv"}}"#,
        )
        .unwrap();
        assert_eq!(config.k_range, KRange::All);
        let bad = serde_json::from_str::<RunConfig>(
            r#"{"domains": [{"box": [2]}], "k_range": "some", "output": {"path": "r.csv"}}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(DensitySpec::Constant(0.0).validate().is_err());
        assert!(DensitySpec::Uniform(0.0, 2.0).validate().is_err());
        assert!(DensitySpec::Uniform(2.0, 1.0).validate().is_err());
        assert!(PotentialSpec::Constant(-1.0).validate().is_err());
        assert!(DensitySpec::Uniform(0.5, 2.0).validate().is_ok());
    }

    #[test]
    fn flag_parsers() {
        assert!(matches!(
            parse_potential_flag("zero").unwrap(),
            PotentialSpec::Zero
        ));
        assert!(matches!(
            parse_potential_flag("const:1.5").unwrap(),
            PotentialSpec::Constant(c) if c == 1.5
        ));
        assert!(matches!(
            parse_density_flag("uniform:0.5,2.0").unwrap(),
            DensitySpec::Uniform(lo, hi) if lo == 0.5 && hi == 2.0
        ));
        assert!(parse_density_flag("uniform:2.0").is_err());
        assert_eq!(parse_k_flag("all").unwrap(), KRange::All);
        assert_eq!(parse_k_flag("1,3").unwrap(), KRange::List(vec![1, 3]));
        assert!(parse_k_flag("0").is_err());
    }

    #[test]
    fn uniform_realization_is_deterministic() {
        let domain = Arc::new(LatticeDomain::make_box(2, &[3, 3]).unwrap());
        let spec = DensitySpec::Uniform(0.5, 2.0);
        let a = spec.realize(&domain, Path::new("."), 11).unwrap();
        let b = spec.realize(&domain, Path::new("."), 11).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(a.values().iter().all(|&v| (0.5..2.0).contains(&v)));
    }
}
