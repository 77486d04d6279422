//! Flat `key = value` run configuration with strict key checking.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use tensorquad::FamilySpec;

/// An error in how the tool was invoked (bad flag value, malformed config,
/// contradictory keys). Mapped to exit code 1, unlike runtime failures.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// How reference values for relative errors are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceMode {
    /// Full grid sum per (seed, grid); refused above six variables.
    BruteForce,
    /// Boundary contraction at the largest grid and bond in the sweep.
    ConvergedTn,
    /// Closed-form value (multiscale family only).
    Analytic,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Family shape; its grid field holds the first entry of `grids`.
    pub family: FamilySpec,
    pub grids: Vec<usize>,
    /// Bond-dimension sweep; empty exactly for the multiscale family.
    pub chis: Vec<usize>,
    /// Quasi-Monte-Carlo sample counts; empty disables the baseline.
    pub n_samples: Vec<u64>,
    pub seeds: Vec<u64>,
    pub reference: ReferenceMode,
    pub out: Option<PathBuf>,
    pub threads: usize,
    /// Sample batch size for the quasi-Monte-Carlo accumulator.
    pub batch: usize,
    /// Singular-value cutoff handed to truncated contractions.
    pub cutoff: f64,
}

/// Command-line values layered on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub chis: Option<Vec<usize>>,
    pub grids: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Raw `KEY=VALUE` pairs applied before the named flags.
    pub sets: Vec<(String, String)>,
}

const FAMILY_KEYS: &[&str] = &["family", "n", "k", "w", "g", "delta", "lambda", "c"];
const RUN_KEYS: &[&str] =
    &["seed", "seeds", "chi", "n_samples", "reference", "out", "threads", "batch", "cutoff"];

fn parse_pairs(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected `key = value`", idx + 1)))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(usage(format!("config line {}: empty key", idx + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(usage(format!("config line {}: duplicate key `{key}`", idx + 1)));
        }
    }
    Ok(map)
}

fn parse_list<T: std::str::FromStr>(raw: &str, key: &str) -> anyhow::Result<Vec<T>> {
    let items: Vec<&str> =
        raw.split(',').map(str::trim).filter(|piece| !piece.is_empty()).collect();
    if items.is_empty() {
        return Err(usage(format!("key `{key}`: empty list")));
    }
    items
        .iter()
        .map(|piece| {
            piece.parse().map_err(|_| usage(format!("key `{key}`: cannot parse `{piece}`")))
        })
        .collect()
}

fn opt_list<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> anyhow::Result<Option<Vec<T>>> {
    map.get(key).map(|raw| parse_list(raw, key)).transpose()
}

fn opt_scalar<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> anyhow::Result<Option<T>> {
    map.get(key)
        .map(|raw| {
            raw.trim().parse().map_err(|_| usage(format!("key `{key}`: cannot parse `{raw}`")))
        })
        .transpose()
}

impl RunConfig {
    /// Reads a config file and folds in command-line overrides.
    pub fn load(path: &Path, overrides: &Overrides) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config `{}`: {e}", path.display())))?;
        let mut map = parse_pairs(&text)?;

        for (key, value) in &overrides.sets {
            map.insert(key.clone(), value.clone());
        }
        if let Some(seeds) = &overrides.seeds {
            map.insert("seeds".into(), join(seeds));
            map.remove("seed");
        }
        if let Some(chis) = &overrides.chis {
            map.insert("chi".into(), join(chis));
        }
        if let Some(grids) = &overrides.grids {
            map.insert("g".into(), join(grids));
        }
        if let Some(threads) = overrides.threads {
            map.insert("threads".into(), threads.to_string());
        }

        for key in map.keys() {
            if !FAMILY_KEYS.contains(&key.as_str()) && !RUN_KEYS.contains(&key.as_str()) {
                return Err(usage(format!("unknown config key `{key}`")));
            }
        }

        if map.get("family").map(String::as_str) == Some("expr") {
            return Err(usage(
                "family `expr` is driven by the `bench expr` subcommand, not a sweep config",
            ));
        }

        let grids: Vec<usize> = opt_list(&map, "g")?
            .ok_or_else(|| usage("missing required key `g` (grid size list)"))?;
        if grids.contains(&0) {
            return Err(usage("key `g`: grid sizes must be positive"));
        }

        let mut family_map = map.clone();
        family_map.insert("g".into(), grids[0].to_string());
        let family = FamilySpec::from_pairs(&family_map).map_err(|e| usage(e.to_string()))?;

        // from_pairs ignores keys it does not need; reject the leftovers so a
        // stray `lambda` on the power family is an error, not silence.
        let used: Vec<&str> = family.to_pairs().into_iter().map(|(k, _)| k).collect();
        for key in map.keys() {
            if FAMILY_KEYS.contains(&key.as_str())
                && key != "g"
                && !used.contains(&key.as_str())
            {
                return Err(usage(format!(
                    "key `{key}` is not used by family `{}`",
                    family.family_name()
                )));
            }
        }

        let seeds = match (map.contains_key("seed"), map.contains_key("seeds")) {
            (true, true) => return Err(usage("give either `seed` or `seeds`, not both")),
            (true, false) => parse_list(&map["seed"], "seed")?,
            (false, true) => parse_list(&map["seeds"], "seeds")?,
            (false, false) => vec![0],
        };

        let is_mera = matches!(family, FamilySpec::Mera { .. });
        let chis: Vec<usize> = match opt_list(&map, "chi")? {
            Some(_) if is_mera => {
                return Err(usage("key `chi` is not used by family `mera` (no bond to truncate)"))
            }
            Some(chis) => {
                if chis.contains(&0) {
                    return Err(usage("key `chi`: bond dimensions must be positive"));
                }
                chis
            }
            None if is_mera => Vec::new(),
            None => return Err(usage("missing required key `chi` (bond dimension list)")),
        };

        let n_samples: Vec<u64> = opt_list(&map, "n_samples")?.unwrap_or_default();
        let continuous = matches!(
            family,
            FamilySpec::PolynomialSin { .. } | FamilySpec::Gaussian { .. }
        );
        if !n_samples.is_empty() && !continuous {
            return Err(usage(format!(
                "key `n_samples`: family `{}` is a discrete grid sum; the sampling baseline \
                 only applies to continuous integrands (polynomial-sin, gaussian)",
                family.family_name()
            )));
        }
        if n_samples.contains(&0) {
            return Err(usage("key `n_samples`: sample counts must be positive"));
        }

        let reference = match map.get("reference").map(String::as_str) {
            Some("brute-force") => ReferenceMode::BruteForce,
            Some("converged-tn") => ReferenceMode::ConvergedTn,
            Some("analytic") => ReferenceMode::Analytic,
            Some(other) => {
                return Err(usage(format!(
                    "key `reference`: `{other}` is not one of brute-force, converged-tn, analytic"
                )))
            }
            None if is_mera => ReferenceMode::Analytic,
            None => ReferenceMode::ConvergedTn,
        };
        if reference == ReferenceMode::Analytic && !is_mera {
            return Err(usage(format!(
                "reference `analytic` needs a closed form; family `{}` has none",
                family.family_name()
            )));
        }

        let out = overrides
            .out
            .clone()
            .or_else(|| map.get("out").map(PathBuf::from));
        let threads = opt_scalar(&map, "threads")?.unwrap_or(1usize);
        if threads == 0 {
            return Err(usage("key `threads`: need at least one worker"));
        }
        let batch = opt_scalar(&map, "batch")?.unwrap_or(1_000_000usize);
        if batch == 0 {
            return Err(usage("key `batch`: batch size must be positive"));
        }
        let cutoff: f64 = opt_scalar(&map, "cutoff")?.unwrap_or(0.0);
        if !(cutoff >= 0.0) {
            return Err(usage(format!("key `cutoff`: must be non-negative, got {cutoff}")));
        }

        Ok(RunConfig {
            family,
            grids,
            chis,
            n_samples,
            seeds,
            reference,
            out,
            threads,
            batch,
            cutoff,
        })
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Splits a `KEY=VALUE` command-line override.
pub fn parse_set(raw: &str) -> anyhow::Result<(String, String)> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| usage(format!("--set `{raw}`: expected KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(usage(format!("--set `{raw}`: empty key")));
    }
    Ok((key.to_string(), value.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn load_text(text: &str, overrides: &Overrides) -> anyhow::Result<RunConfig> {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        RunConfig::load(file.path(), overrides)
    }

    const BASE: &str = "# sweep shape\nfamily = polynomial-power\nn = 4\nk = 3\ng = 4, 6\nchi = 2,8\nseeds = 0,1\n";

    #[test]
    fn a_full_config_parses() {
        let cfg = load_text(BASE, &Overrides::default()).unwrap();
        assert_eq!(cfg.family.family_name(), "polynomial-power");
        assert_eq!(cfg.grids, vec![4, 6]);
        assert_eq!(cfg.chis, vec![2, 8]);
        assert_eq!(cfg.seeds, vec![0, 1]);
        assert_eq!(cfg.reference, ReferenceMode::ConvergedTn);
        assert_eq!(cfg.threads, 1);
        assert_eq!(cfg.batch, 1_000_000);
        assert_eq!(cfg.cutoff, 0.0);
        assert!(cfg.n_samples.is_empty());
        assert!(cfg.out.is_none());
    }

    #[test]
    fn named_overrides_beat_the_file_and_sets() {
        let overrides = Overrides {
            seeds: Some(vec![7]),
            chis: Some(vec![16]),
            grids: Some(vec![10]),
            threads: Some(3),
            sets: vec![
                ("seeds".into(), "9,9,9".into()),
                ("k".into(), "2".into()),
            ],
            ..Overrides::default()
        };
        let cfg = load_text(BASE, &overrides).unwrap();
        assert_eq!(cfg.seeds, vec![7]);
        assert_eq!(cfg.chis, vec![16]);
        assert_eq!(cfg.grids, vec![10]);
        assert_eq!(cfg.threads, 3);
        assert_eq!(cfg.family.grid(), 10);
        match cfg.family {
            FamilySpec::PolynomialPower { n_factors, .. } => assert_eq!(n_factors, 2),
            other => panic!("unexpected family {other:?}"),
        }
    }

    #[test]
    fn unknown_and_unused_keys_are_rejected() {
        let err = load_text(&format!("{BASE}typo = 3\n"), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("unknown config key `typo`"), "{err}");
        let err =
            load_text(&format!("{BASE}lambda = 0.5\n"), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("`lambda` is not used"), "{err}");
        let err = load_text(&BASE.replace("seeds = 0,1", "seeds = 0\nseed = 1"), &Overrides::default())
            .unwrap_err();
        assert!(err.to_string().contains("not both"), "{err}");
    }

    #[test]
    fn empty_lists_and_zeroes_are_rejected() {
        for broken in [
            BASE.replace("chi = 2,8", "chi ="),
            BASE.replace("chi = 2,8", "chi = 0,4"),
            BASE.replace("g = 4, 6", "g = 0"),
        ] {
            assert!(load_text(&broken, &Overrides::default()).is_err(), "{broken}");
        }
    }

    #[test]
    fn sampling_baseline_requires_a_continuous_family() {
        let err = load_text(&format!("{BASE}n_samples = 100\n"), &Overrides::default())
            .unwrap_err();
        assert!(err.to_string().contains("continuous"), "{err}");
        let sin = "family = polynomial-sin\nn = 3\nk = 2\nc = 0.5\ng = 4\nchi = 4\nn_samples = 100,200\n";
        let cfg = load_text(sin, &Overrides::default()).unwrap();
        assert_eq!(cfg.n_samples, vec![100, 200]);
    }

    #[test]
    fn mera_defaults_to_the_closed_form_and_refuses_chi() {
        let cfg = load_text("family = mera\nn = 4\ng = 4\n", &Overrides::default()).unwrap();
        assert_eq!(cfg.reference, ReferenceMode::Analytic);
        assert!(cfg.chis.is_empty());
        let err = load_text("family = mera\nn = 4\ng = 4\nchi = 8\n", &Overrides::default())
            .unwrap_err();
        assert!(err.to_string().contains("mera"), "{err}");
        let err = load_text(
            &format!("{BASE}reference = analytic\n"),
            &Overrides::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("closed form"), "{err}");
    }

    #[test]
    fn expr_family_is_redirected_to_its_subcommand() {
        let err =
            load_text("family = expr\ng = 4\nchi = 2\n", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("bench expr"), "{err}");
        assert!(err.downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn set_pairs_are_parsed_strictly() {
        assert_eq!(parse_set("delta= 0.1").unwrap(), ("delta".into(), "0.1".into()));
        assert!(parse_set("delta").is_err());
        assert!(parse_set("=0.1").is_err());
    }
}
