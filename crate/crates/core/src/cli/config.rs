use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::probcore::{Alphabet, JointPmf, DEFAULT_ENUMERATION_CAP};
use crate::simulator::{CodeMode, FitOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Eta,
    Region,
    Wz,
    Simulate,
    Sweep,
    Diagnose,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eta => "eta",
            Command::Region => "region",
            Command::Wz => "wz",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Diagnose => "diagnose",
        }
    }
}

/// Pmf as written in config files: labels per axis and a row-major list of
/// probabilities (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfFile {
    pub alphabets: Vec<Vec<String>>,
    pub probs: Vec<f64>,
    /// Axis names; `Y0, Y1, ...` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl PmfFile {
    pub fn to_pmf(&self) -> Result<JointPmf, Error> {
        if let Some(names) = &self.names {
            if names.len() != self.alphabets.len() {
                return Err(Error::Config(vec![format!(
                    "pmf: {} names for {} alphabets",
                    names.len(),
                    self.alphabets.len()
                )]));
            }
        }
        let axes = self
            .alphabets
            .iter()
            .enumerate()
            .map(|(i, labels)| {
                let name = self.names.as_ref().map_or_else(|| format!("Y{i}"), |n| n[i].clone());
                Alphabet::new(name, labels.clone())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(JointPmf::new(axes, self.probs.clone())?)
    }

    pub fn from_pmf(p: &JointPmf) -> Self {
        Self {
            alphabets: p.axes().iter().map(|a| a.symbols().to_vec()).collect(),
            probs: p.mass().to_vec(),
            names: Some(p.axes().iter().map(|a| a.name().to_string()).collect()),
        }
    }
}

/// Inline pmf or a path to a JSON file holding one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PmfSource {
    Path(PathBuf),
    Inline(PmfFile),
}

/// Per-letter distortion `d(x, z)` as rows over `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionFile {
    pub table: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistortionSource {
    Path(PathBuf),
    Inline(DistortionFile),
}

/// Validated configuration with every default filled in. Serializing it
/// gives the normalized form of the input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub pmf: PmfSource,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub rates: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// `|Y_{l-1}| + 1` over the largest source alphabet when absent.
    pub aux_card: Option<usize>,
    pub rate_grid: Vec<f64>,
    pub rate_margin: f64,
    pub blocklengths: Vec<usize>,
    pub trials: usize,
    pub mu: Option<f64>,
    pub mode: CodeMode,
    pub epsilon_sweep: Vec<f64>,
    pub fit: FitOptions,
    pub enumeration_cap: u64,
    pub distortion: Option<DistortionSource>,
    pub max_distortion: Option<f64>,
    pub s_card: Option<usize>,
}

const KEYS: &[&str] = &[
    "command",
    "pmf",
    "seed",
    "output_dir",
    "rates",
    "epsilons",
    "aux_card",
    "rate_grid",
    "rate_margin",
    "blocklengths",
    "trials",
    "mu",
    "mode",
    "epsilon_sweep",
    "fit",
    "enumeration_cap",
    "distortion",
    "max_distortion",
    "s_card",
];

pub const DEFAULT_OUTPUT_DIR: &str = "hopex-out";
pub const DEFAULT_RATE_MARGIN: f64 = 0.02;
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Rates `0, 0.05, ..., 1`.
pub fn default_rate_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

struct Fields<'a> {
    obj: &'a Map<String, Value>,
    errors: Vec<String>,
}

impl Fields<'_> {
    fn get<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        let v = self.obj.get(key)?;
        if v.is_null() {
            return None;
        }
        match serde_json::from_value(v.clone()) {
            Ok(x) => Some(x),
            Err(e) => {
                self.errors.push(format!("{key}: {e}"));
                None
            }
        }
    }

    fn require<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        if !self.obj.contains_key(key) {
            self.errors.push(format!("{key}: missing required field"));
            return None;
        }
        self.get(key)
    }

    fn fail(&mut self, msg: String) {
        self.errors.push(msg);
    }
}

/// Parse and validate a JSON config. Every problem found is reported, not
/// only the first.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<String>> {
    let value: Value = serde_json::from_str(text).map_err(|e| vec![format!("malformed JSON: {e}")])?;
    let Value::Object(obj) = value else {
        return Err(vec!["config must be a JSON object".to_string()]);
    };
    let mut f = Fields { obj: &obj, errors: Vec::new() };
    for key in obj.keys() {
        if !KEYS.contains(&key.as_str()) {
            f.fail(format!("{key}: unknown field"));
        }
    }
    let command: Option<Command> = f.require("command");
    let pmf: Option<PmfSource> = f.require("pmf");
    let seed = f.get("seed").unwrap_or(0);
    let output_dir = f.get("output_dir").unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let rates: Vec<f64> = f.get("rates").unwrap_or_default();
    let epsilons: Option<Vec<f64>> = f.get("epsilons");
    let aux_card: Option<usize> = f.get("aux_card");
    let rate_grid: Vec<f64> = f.get("rate_grid").unwrap_or_else(default_rate_grid);
    let rate_margin: f64 = f.get("rate_margin").unwrap_or(DEFAULT_RATE_MARGIN);
    let blocklengths: Vec<usize> = f.get("blocklengths").unwrap_or_default();
    let trials: usize = f.get("trials").unwrap_or(0);
    let mu: Option<f64> = f.get("mu");
    let mode: CodeMode = f.get("mode").unwrap_or_default();
    let epsilon_sweep: Vec<f64> = f.get("epsilon_sweep").unwrap_or_default();
    let fit: FitOptions = f.get("fit").unwrap_or_default();
    let enumeration_cap: u64 = f.get("enumeration_cap").unwrap_or(DEFAULT_ENUMERATION_CAP);
    let distortion: Option<DistortionSource> = f.get("distortion");
    let max_distortion: Option<f64> = f.get("max_distortion");
    let s_card: Option<usize> = f.get("s_card");

    for (i, &r) in rates.iter().enumerate() {
        if !(r >= 0.0 && r.is_finite()) {
            f.fail(format!("rates[{i}]: must be nonnegative and finite, got {r}"));
        }
    }
    for (i, &r) in rate_grid.iter().enumerate() {
        if !(r >= 0.0 && r.is_finite()) {
            f.fail(format!("rate_grid[{i}]: must be nonnegative and finite, got {r}"));
        }
    }
    if let Some(eps) = &epsilons {
        for (i, &e) in eps.iter().enumerate() {
            if !(0.0..1.0).contains(&e) {
                f.fail(format!("epsilons[{i}]: must lie in [0, 1), got {e}"));
            }
        }
        if !rates.is_empty() && eps.len() != rates.len() {
            f.fail(format!("epsilons: {} entries for {} rates", eps.len(), rates.len()));
        }
    }
    for (i, &e) in epsilon_sweep.iter().enumerate() {
        if !(0.0..1.0).contains(&e) {
            f.fail(format!("epsilon_sweep[{i}]: must lie in [0, 1), got {e}"));
        }
    }
    if aux_card == Some(0) {
        f.fail("aux_card: must be at least 1".to_string());
    }
    if !(rate_margin >= 0.0 && rate_margin.is_finite()) {
        f.fail(format!("rate_margin: must be nonnegative and finite, got {rate_margin}"));
    }
    if let Some(m) = mu {
        if !(m > 0.0 && m.is_finite()) {
            f.fail(format!("mu: must be positive, got {m}"));
        }
    }
    if !(fit.ci_width_cap > 0.0) {
        f.fail(format!("fit.ci_width_cap: must be positive, got {}", fit.ci_width_cap));
    }
    if enumeration_cap == 0 {
        f.fail("enumeration_cap: must be at least 1".to_string());
    }
    if blocklengths.contains(&0) {
        f.fail("blocklengths: entries must be at least 1".to_string());
    }
    if let Some(d) = max_distortion {
        if !(d >= 0.0 && d.is_finite()) {
            f.fail(format!("max_distortion: must be nonnegative, got {d}"));
        }
    }
    if s_card == Some(0) {
        f.fail("s_card: must be at least 1".to_string());
    }
    if let Some(PmfSource::Inline(p)) = &pmf {
        if let Err(e) = p.to_pmf() {
            f.fail(format!("pmf: {e}"));
        }
    }

    if let Some(cmd) = command {
        let mut need = |ok: bool, what: &str| {
            if !ok {
                f.errors.push(format!("{what}: required by `{}`", cmd.name()));
            }
        };
        match cmd {
            Command::Eta => need(!rates.is_empty(), "rates"),
            Command::Region => need(!rates.is_empty(), "rates"),
            Command::Wz => {
                need(distortion.is_some(), "distortion");
                need(max_distortion.is_some(), "max_distortion");
            }
            Command::Simulate | Command::Sweep => {
                need(!rates.is_empty(), "rates");
                need(!blocklengths.is_empty(), "blocklengths");
                need(trials > 0, "trials");
                if cmd == Command::Sweep {
                    need(!epsilon_sweep.is_empty(), "epsilon_sweep");
                }
            }
            Command::Diagnose => {
                need(!rates.is_empty(), "rates");
                need(!blocklengths.is_empty(), "blocklengths");
            }
        }
        if matches!(cmd, Command::Simulate | Command::Sweep) && blocklengths.windows(2).any(|w| w[0] >= w[1]) {
            f.fail("blocklengths: must be strictly increasing".to_string());
        }
    }

    if !f.errors.is_empty() {
        return Err(f.errors);
    }
    let epsilons = epsilons.unwrap_or_else(|| vec![DEFAULT_EPSILON; rates.len()]);
    Ok(RunConfig {
        command: command.expect("checked"),
        pmf: pmf.expect("checked"),
        seed,
        output_dir,
        rates,
        epsilons,
        aux_card,
        rate_grid,
        rate_margin,
        blocklengths,
        trials,
        mu,
        mode,
        epsilon_sweep,
        fit,
        enumeration_cap,
        distortion,
        max_distortion,
        s_card,
    })
}

impl RunConfig {
    /// Resolve a relative path against the directory of the config file.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let PmfSource::Path(p) = &mut self.pmf {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(DistortionSource::Path(p)) = &mut self.distortion {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn load_pmf(&self) -> Result<JointPmf, Error> {
        match &self.pmf {
            PmfSource::Inline(p) => p.to_pmf(),
            PmfSource::Path(path) => {
                let text = std::fs::read_to_string(path)?;
                let file: PmfFile = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(vec![format!("pmf file {}: {e}", path.display())]))?;
                file.to_pmf()
            }
        }
    }

    pub fn load_distortion(&self) -> Result<Option<DistortionFile>, Error> {
        match &self.distortion {
            None => Ok(None),
            Some(DistortionSource::Inline(d)) => Ok(Some(d.clone())),
            Some(DistortionSource::Path(path)) => {
                let text = std::fs::read_to_string(path)?;
                let d = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(vec![format!("distortion file {}: {e}", path.display())]))?;
                Ok(Some(d))
            }
        }
    }

    /// Auxiliary cardinality in effect for `p`.
    pub fn aux_card_for(&self, p: &JointPmf) -> usize {
        let shape = p.shape();
        self.aux_card.unwrap_or_else(|| shape[..shape.len() - 1].iter().max().copied().unwrap_or(1) + 1)
    }

    /// Check the config against the loaded pmf.
    pub fn check_against(&self, p: &JointPmf) -> Result<(), Error> {
        let mut errors = Vec::new();
        let shape = p.shape();
        let hops = shape.len().saturating_sub(1);
        if hops == 0 {
            errors.push("pmf: needs at least two axes".to_string());
        }
        let per_hop = !matches!(self.command, Command::Eta | Command::Wz);
        if per_hop && self.rates.len() != hops {
            errors.push(format!("rates: {} entries for a {hops}-hop pmf", self.rates.len()));
        }
        if per_hop && self.epsilons.len() != hops {
            errors.push(format!("epsilons: {} entries for a {hops}-hop pmf", self.epsilons.len()));
        }
        if self.command == Command::Wz && hops != 1 {
            errors.push(format!("pmf: `wz` needs a pmf over (X, Y), got {} axes", shape.len()));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the normalized config, with
    /// file inputs inlined and the output directory left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        if let Ok(p) = self.load_pmf() {
            c.pmf = PmfSource::Inline(PmfFile::from_pmf(&p));
        }
        if let Ok(Some(d)) = self.load_distortion() {
            c.distortion = Some(DistortionSource::Inline(d));
        }
        let digest = Sha256::digest(serde_json::to_string(&c).expect("config serializes").as_bytes());
        hex::encode(&digest[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PMF: &str = r#"{"alphabets": [["0","1"],["0","1"]], "probs": [0.45, 0.05, 0.05, 0.45]}"#;

    #[test]
    fn minimal_eta_config_gets_defaults() {
        let c = parse_config(&format!(r#"{{"command": "eta", "pmf": {PMF}, "rates": [0.5]}}"#)).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.output_dir, PathBuf::from(DEFAULT_OUTPUT_DIR));
        assert_eq!(c.enumeration_cap, DEFAULT_ENUMERATION_CAP);
        assert_eq!(c.epsilons, vec![DEFAULT_EPSILON]);
        assert_eq!(c.rate_grid.len(), 21);
    }

    #[test]
    fn reports_every_error() {
        let text = format!(
            r#"{{"command": "simulate", "pmf": {PMF}, "rates": [-0.5], "mu": -1, "colour": 3, "blocklengths": [8, 4]}}"#
        );
        let errs = parse_config(&text).unwrap_err();
        let joined = errs.join("\n");
        for needle in ["rates[0]", "mu", "colour: unknown field", "trials: required", "strictly increasing"] {
            assert!(joined.contains(needle), "{needle} missing from {joined}");
        }
    }

    #[test]
    fn missing_and_mistyped_fields() {
        let errs = parse_config(r#"{"rates": "fast"}"#).unwrap_err();
        assert!(errs.iter().any(|e| e.starts_with("command: missing")));
        assert!(errs.iter().any(|e| e.starts_with("pmf: missing")));
        assert!(errs.iter().any(|e| e.starts_with("rates:")));
    }

    #[test]
    fn malformed_pmf_rejected() {
        let text = r#"{"command": "eta", "rates": [0.1], "pmf": {"alphabets": [["0","1"]], "probs": [0.4, 0.5]}}"#;
        let errs = parse_config(text).unwrap_err();
        assert!(errs[0].starts_with("pmf:"), "{errs:?}");
    }

    #[test]
    fn normalized_form_round_trips() {
        let text = format!(
            r#"{{"command": "simulate", "pmf": {PMF}, "rates": [0.5], "blocklengths": [10, 20, 30], "trials": 100, "seed": 9}}"#
        );
        let c = parse_config(&text).unwrap();
        let again = parse_config(&c.to_json()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.to_json(), again.to_json());
        assert_eq!(c.hash(), again.hash());
    }
}
