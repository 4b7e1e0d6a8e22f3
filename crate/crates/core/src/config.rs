//! Flat key=value experiment configuration: parsing, validation, and the
//! resolved-config echo used by every CLI run.

use std::collections::BTreeMap;

use crate::attacks::{default_tau_grid, AttackKind, AttackSpec};
use crate::error::{Error, Result};
use crate::protocol::AggMode;

/// Whether Byzantine vector crafting sees quantized integers (the on-the-wire
/// objects) or the raw real momenta.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackDomain {
    Quantized,
    Raw,
}

#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub classes: usize,
    pub dims: usize,
    pub size: usize,
    pub test_size: usize,
    pub separation: f64,
    pub anisotropy: f64,
}

#[derive(Debug, Clone)]
pub struct EncodingConfig {
    pub slot_degree: usize,
    pub base: Option<u64>,
    pub min_slots: usize,
    pub max_p: u64,
    pub max_m: u64,
}

/// One training experiment, fully resolved.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    pub f: usize,
    pub delta: u32,
    pub clamp: f64,
    pub gamma: f64,
    pub beta: f64,
    pub steps: u64,
    pub batch: usize,
    pub l2: f64,
    pub alpha: f64,
    pub attack: AttackSpec,
    pub attack_domain: AttackDomain,
    pub subsample: bool,
    pub agg_mode: AggMode,
    pub seed: u64,
    pub eval_every: u64,
    pub dataset: DatasetConfig,
    pub encoding: EncodingConfig,
}

const REQUIRED: &[&str] = &["n", "f", "delta", "clamp", "gamma", "beta", "T", "batch", "seed"];

const KNOWN: &[&str] = &[
    "n",
    "f",
    "delta",
    "clamp",
    "gamma",
    "beta",
    "T",
    "batch",
    "l2",
    "alpha",
    "attack",
    "tau",
    "tau_grid",
    "attack_domain",
    "subsample",
    "agg_mode",
    "seed",
    "eval_every",
    "dataset.classes",
    "dataset.dims",
    "dataset.size",
    "dataset.test_size",
    "dataset.separation",
    "dataset.anisotropy",
    "encoding.N",
    "encoding.B",
    "encoding.min_slots",
    "encoding.max_p",
    "encoding.max_m",
];

fn parse_num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{v}'"))),
    }
}

fn require<'a>(map: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
}

impl ExperimentConfig {
    /// Parses flat `key=value` text. Blank lines and lines starting with `#`
    /// are ignored; unknown and duplicate keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if !KNOWN.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key '{key}'")));
            }
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key '{key}'")));
            }
        }
        Self::from_map(&map)
    }

    fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        for key in REQUIRED {
            require(map, key)?;
        }
        let n: usize = parse_num(map, "n", 0)?;
        let f: usize = parse_num(map, "f", 0)?;
        let delta: u32 = parse_num(map, "delta", 0)?;
        let clamp: f64 = parse_num(map, "clamp", 0.0)?;
        let beta: f64 = parse_num(map, "beta", 0.0)?;
        if n < 1 || 2 * f >= n {
            return Err(Error::Config(format!("need f < n/2, got n={n}, f={f}")));
        }
        if delta < 2 {
            return Err(Error::Config(format!("need delta > 1, got {delta}")));
        }
        if clamp <= 0.0 || clamp.is_nan() {
            return Err(Error::Config(format!("need clamp > 0, got {clamp}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Config(format!("need beta in (0,1), got {beta}")));
        }

        let kind = AttackKind::parse(map.get("attack").map_or("none", String::as_str))?;
        let fixed_tau: Option<f64> = match map.get("tau") {
            None => None,
            Some(v) => Some(
                v.parse()
                    .map_err(|_| Error::Config(format!("key 'tau': cannot parse '{v}'")))?,
            ),
        };
        let tau_grid = match map.get("tau_grid") {
            None => default_tau_grid(),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("key 'tau_grid': cannot parse '{s}'")))
                })
                .collect::<Result<Vec<f64>>>()?,
        };
        let attack = AttackSpec::new(kind, tau_grid, fixed_tau)?;

        let attack_domain = match map.get("attack_domain").map(String::as_str) {
            None | Some("quantized") => AttackDomain::Quantized,
            Some("raw") => AttackDomain::Raw,
            Some(other) => {
                return Err(Error::Config(format!("unknown attack_domain '{other}'")))
            }
        };
        let subsample = match map.get("subsample").map(String::as_str) {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(Error::Config(format!("key 'subsample': expected true/false, got '{other}'"))),
        };
        let agg_mode = match map.get("agg_mode").map(String::as_str) {
            None | Some("oracle") => AggMode::Oracle,
            Some("homomorphic") => AggMode::Homomorphic,
            Some("average") => AggMode::Average,
            Some(other) => return Err(Error::Config(format!("unknown agg_mode '{other}'"))),
        };

        let dataset = DatasetConfig {
            classes: parse_num(map, "dataset.classes", 3)?,
            dims: parse_num(map, "dataset.dims", 8)?,
            size: parse_num(map, "dataset.size", 600)?,
            test_size: parse_num(map, "dataset.test_size", 300)?,
            separation: parse_num(map, "dataset.separation", 3.0)?,
            anisotropy: parse_num(map, "dataset.anisotropy", 1.0)?,
        };
        if dataset.classes < 2 {
            return Err(Error::Config("dataset.classes must be >= 2".into()));
        }
        if dataset.anisotropy < 1.0 {
            return Err(Error::Config("dataset.anisotropy must be >= 1".into()));
        }
        let encoding = EncodingConfig {
            slot_degree: parse_num(map, "encoding.N", 2)?,
            base: map
                .get("encoding.B")
                .map(|v| {
                    v.parse()
                        .map_err(|_| Error::Config(format!("key 'encoding.B': cannot parse '{v}'")))
                })
                .transpose()?,
            min_slots: parse_num(map, "encoding.min_slots", 1)?,
            max_p: parse_num(map, "encoding.max_p", 100_000)?,
            max_m: parse_num(map, "encoding.max_m", 10_000_000)?,
        };

        Ok(ExperimentConfig {
            n,
            f,
            delta,
            clamp,
            gamma: parse_num(map, "gamma", 0.0)?,
            beta,
            steps: parse_num(map, "T", 0)?,
            batch: parse_num(map, "batch", 0)?,
            l2: parse_num(map, "l2", 1e-4)?,
            alpha: parse_num(map, "alpha", 1.0)?,
            attack,
            attack_domain,
            subsample,
            agg_mode,
            seed: parse_num(map, "seed", 0)?,
            eval_every: parse_num(map, "eval_every", 10)?,
            dataset,
            encoding,
        })
    }

    /// Echo of the fully resolved configuration, key=value per line.
    pub fn to_kv_string(&self) -> String {
        let tau_grid = self
            .attack
            .tau_grid
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        push("n", self.n.to_string());
        push("f", self.f.to_string());
        push("delta", self.delta.to_string());
        push("clamp", self.clamp.to_string());
        push("gamma", self.gamma.to_string());
        push("beta", self.beta.to_string());
        push("T", self.steps.to_string());
        push("batch", self.batch.to_string());
        push("l2", self.l2.to_string());
        push("alpha", self.alpha.to_string());
        push("attack", self.attack.kind.name().to_string());
        if let Some(tau) = self.attack.fixed_tau {
            push("tau", tau.to_string());
        }
        push("tau_grid", tau_grid);
        push(
            "attack_domain",
            match self.attack_domain {
                AttackDomain::Quantized => "quantized".into(),
                AttackDomain::Raw => "raw".into(),
            },
        );
        push("subsample", self.subsample.to_string());
        push("agg_mode", self.agg_mode.name().to_string());
        push("seed", self.seed.to_string());
        push("eval_every", self.eval_every.to_string());
        push("dataset.classes", self.dataset.classes.to_string());
        push("dataset.dims", self.dataset.dims.to_string());
        push("dataset.size", self.dataset.size.to_string());
        push("dataset.test_size", self.dataset.test_size.to_string());
        push("dataset.separation", self.dataset.separation.to_string());
        push("dataset.anisotropy", self.dataset.anisotropy.to_string());
        push("encoding.N", self.encoding.slot_degree.to_string());
        if let Some(b) = self.encoding.base {
            push("encoding.B", b.to_string());
        }
        push("encoding.min_slots", self.encoding.min_slots.to_string());
        push("encoding.max_p", self.encoding.max_p.to_string());
        push("encoding.max_m", self.encoding.max_m.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "n=15\nf=5\ndelta=2\nclamp=0.001\ngamma=0.5\nbeta=0.9\nT=20\nbatch=16\nseed=42\n";

    #[test]
    fn parse_minimal() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(cfg.n, 15);
        assert_eq!(cfg.steps, 20);
        assert_eq!(cfg.l2, 1e-4);
        assert_eq!(cfg.attack.kind, AttackKind::None);
        assert_eq!(cfg.attack.tau_grid.len(), 41);
        assert_eq!(cfg.agg_mode, AggMode::Oracle);
        assert!(!cfg.subsample);
    }

    #[test]
    fn parse_full() {
        let text = format!(
            "{BASE}attack=foe\ntau=2.0\nsubsample=true\nagg_mode=homomorphic\n\
             tau_grid=0,1,2\nattack_domain=raw\nencoding.N=3\nencoding.B=7\n\
             # comment\n\ndataset.dims=4\n"
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg.attack.kind, AttackKind::Foe);
        assert_eq!(cfg.attack.fixed_tau, Some(2.0));
        assert_eq!(cfg.attack.tau_grid, vec![0.0, 1.0, 2.0]);
        assert_eq!(cfg.attack_domain, AttackDomain::Raw);
        assert_eq!(cfg.agg_mode, AggMode::Homomorphic);
        assert_eq!(cfg.encoding.base, Some(7));
        assert_eq!(cfg.dataset.dims, 4);
    }

    #[test]
    fn missing_key_named() {
        let err = ExperimentConfig::parse("n=5\nf=1\n").unwrap_err().to_string();
        assert!(err.contains("delta"), "{err}");
    }

    #[test]
    fn invariants_rejected() {
        for bad in [
            BASE.replace("f=5", "f=8"),
            BASE.replace("delta=2", "delta=1"),
            BASE.replace("clamp=0.001", "clamp=0"),
            BASE.replace("beta=0.9", "beta=1.0"),
        ] {
            assert!(ExperimentConfig::parse(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        assert!(ExperimentConfig::parse(&format!("{BASE}bogus=1\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{BASE}n=15\n")).is_err());
    }

    #[test]
    fn echo_roundtrips() {
        let text = format!("{BASE}attack=alie\nsubsample=true\n");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let echoed = cfg.to_kv_string();
        let cfg2 = ExperimentConfig::parse(&echoed).unwrap();
        assert_eq!(cfg2.to_kv_string(), echoed);
    }
}
