//! Run configuration: defaults, config-file layer, flag overrides.
//!
//! Config files are plain `key = value` lines with `#` comments. Emitted
//! artifacts embed their fully resolved configuration as `# config: key =
//! value` comment lines, and this parser strips that prefix, so any emitted
//! CSV/angle file is itself a valid `--config` input and reproduces the run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

/// Fully resolved configuration of one run; echoed into every artifact.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub degree: Option<usize>,
    pub kappa: Option<f64>,
    pub bands: Vec<(f64, f64)>,
    pub prior: Option<(f64, f64)>,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub points: usize,
    pub format: Format,
    pub angles: Option<String>,
    pub degrees: Vec<usize>,
    pub trials: usize,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            seed: 0,
            restarts: 8,
            max_iters: 150,
            points: 512,
            trials: 5,
            ..Default::default()
        }
    }

    /// Key/value view used both for artifact echoing and reproduction.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = vec![("command".into(), self.command.clone())];
        if let Some(d) = self.degree {
            out.push(("degree".into(), d.to_string()));
        }
        if let Some(k) = self.kappa {
            out.push(("kappa".into(), format!("{k}")));
        }
        for (lo, hi) in &self.bands {
            out.push(("band".into(), format!("{lo}:{hi}")));
        }
        if let Some((mu, sigma)) = self.prior {
            out.push(("prior".into(), format!("{mu}:{sigma}")));
        }
        out.push(("seed".into(), self.seed.to_string()));
        out.push(("restarts".into(), self.restarts.to_string()));
        out.push(("max_iters".into(), self.max_iters.to_string()));
        out.push(("points".into(), self.points.to_string()));
        out.push(("format".into(), self.format.as_str().into()));
        if let Some(a) = &self.angles {
            out.push(("angles".into(), a.clone()));
        }
        if !self.degrees.is_empty() {
            let list: Vec<String> = self.degrees.iter().map(|d| d.to_string()).collect();
            out.push(("degrees".into(), list.join(",")));
        }
        out.push(("trials".into(), self.trials.to_string()));
        if !self.gammas.is_empty() {
            let list: Vec<String> = self.gammas.iter().map(|g| format!("{g}")).collect();
            out.push(("gammas".into(), list.join(",")));
        }
        if !self.betas.is_empty() {
            let list: Vec<String> = self.betas.iter().map(|b| format!("{b}")).collect();
            out.push(("betas".into(), list.join(",")));
        }
        if self.inject_fault {
            out.push(("inject_fault".into(), "true".into()));
        }
        out
    }

    pub fn echo_comment_block(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "# config: {k} = {v}");
        }
        s
    }

    pub fn echo_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        let mut bands = Vec::new();
        let mut gammas = Vec::new();
        let mut betas = Vec::new();
        let mut degrees = Vec::new();
        for (k, v) in self.entries() {
            match k.as_str() {
                "band" => bands.push(serde_json::Value::String(v)),
                "gammas" => gammas.push(serde_json::Value::String(v)),
                "betas" => betas.push(serde_json::Value::String(v)),
                "degrees" => degrees.push(serde_json::Value::String(v)),
                _ => {
                    map.insert(k, serde_json::Value::String(v));
                }
            }
        }
        if !bands.is_empty() {
            map.insert("band".into(), serde_json::Value::Array(bands));
        }
        if !gammas.is_empty() {
            map.insert("gammas".into(), gammas.pop().unwrap());
        }
        if !betas.is_empty() {
            map.insert("betas".into(), betas.pop().unwrap());
        }
        if !degrees.is_empty() {
            map.insert("degrees".into(), degrees.pop().unwrap());
        }
        serde_json::Value::Object(map)
    }

    /// Apply one `key = value` assignment (config-file layer).
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::config(format!("invalid {what}: {value}"));
        match key {
            "command" => {} // informational in echoed configs
            "degree" => self.degree = Some(value.parse().map_err(|_| bad("degree"))?),
            "kappa" => self.kappa = Some(value.parse().map_err(|_| bad("kappa"))?),
            "band" => self.bands.push(parse_pair(value).ok_or_else(|| bad("band"))?),
            "prior" => self.prior = Some(parse_pair(value).ok_or_else(|| bad("prior"))?),
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "restarts" => self.restarts = value.parse().map_err(|_| bad("restarts"))?,
            "max_iters" => self.max_iters = value.parse().map_err(|_| bad("max_iters"))?,
            "points" => self.points = value.parse().map_err(|_| bad("points"))?,
            "format" => {
                self.format = match value {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(bad("format")),
                }
            }
            "angles" => self.angles = Some(value.to_string()),
            "degrees" => self.degrees = parse_degree_list(value).ok_or_else(|| bad("degrees"))?,
            "trials" => self.trials = value.parse().map_err(|_| bad("trials"))?,
            "gammas" => self.gammas = parse_f64_list(value).ok_or_else(|| bad("gammas"))?,
            "betas" => self.betas = parse_f64_list(value).ok_or_else(|| bad("betas"))?,
            "inject_fault" => self.inject_fault = value.parse().map_err(|_| bad("inject_fault"))?,
            "timestamp" | "p_err" | "converged" | "restart_index" => {} // artifact metadata
            _ => return Err(CliError::config(format!("unknown config key: {key}"))),
        }
        Ok(())
    }

    /// Layer a config file underneath already-set defaults. Bands in the
    /// file replace default bands but are themselves replaced by any bands
    /// given on the command line (handled by the caller).
    ///
    /// Two shapes are accepted: a plain config file (`key = value` lines,
    /// `#` comments), or any emitted artifact, in which case only the
    /// embedded `# config: key = value` lines are read and the data rows
    /// are ignored.
    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        let artifact_mode = text.lines().any(|l| l.starts_with("# config:"));
        let mut file_bands = Vec::new();
        for raw in text.lines() {
            let line = if artifact_mode {
                match raw.strip_prefix("# config:") {
                    Some(rest) => rest.trim(),
                    None => continue,
                }
            } else {
                raw.trim()
            };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!("malformed config line: {raw}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if key == "band" {
                file_bands
                    .push(parse_pair(value).ok_or_else(|| CliError::config(format!("bad band: {value}")))?);
            } else {
                self.apply(key, value)?;
            }
        }
        if !file_bands.is_empty() {
            self.bands = file_bands;
        }
        Ok(())
    }
}

pub fn parse_pair(s: &str) -> Option<(f64, f64)> {
    let (a, b) = s.split_once(':')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

pub fn parse_f64_list(s: &str) -> Option<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().ok())
        .collect()
}

/// Degree lists accept comma items and inclusive `a..b` ranges
/// (e.g. `1..5` or `1,3,6,9,13`).
pub fn parse_degree_list(s: &str) -> Option<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        if let Some((a, b)) = item.split_once("..") {
            let (a, b) = (a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?);
            if a > b {
                return None;
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().ok()?);
        }
    }
    Some(out)
}

/// Parse an angle file: `theta_i = v`, `phi_i = v`, `lambda0 = v` lines,
/// `#` comments ignored.
pub fn parse_angle_file(text: &str) -> Result<gqspi_core::PhaseAngles, CliError> {
    let mut thetas: BTreeMap<usize, f64> = BTreeMap::new();
    let mut phis: BTreeMap<usize, f64> = BTreeMap::new();
    let mut lambda0: Option<f64> = None;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::config(format!("malformed angle line: {raw}")));
        };
        let (key, value) = (key.trim(), value.trim());
        let v: f64 = value
            .parse()
            .map_err(|_| CliError::config(format!("bad angle value: {value}")))?;
        if key == "lambda0" {
            lambda0 = Some(v);
        } else if let Some(i) = key.strip_prefix("theta_") {
            let i: usize = i
                .parse()
                .map_err(|_| CliError::config(format!("bad angle index: {key}")))?;
            thetas.insert(i, v);
        } else if let Some(i) = key.strip_prefix("phi_") {
            let i: usize = i
                .parse()
                .map_err(|_| CliError::config(format!("bad angle index: {key}")))?;
            phis.insert(i, v);
        } else {
            return Err(CliError::config(format!("unknown angle key: {key}")));
        }
    }
    let lambda0 = lambda0.ok_or_else(|| CliError::config("angle file missing lambda0".into()))?;
    let d = thetas.len();
    if d == 0 || phis.len() != d {
        return Err(CliError::config(
            "angle file needs matching theta_i and phi_i sets".into(),
        ));
    }
    let mut theta = Vec::with_capacity(d);
    let mut phi = Vec::with_capacity(d);
    for i in 0..d {
        theta.push(*thetas.get(&i).ok_or_else(|| {
            CliError::config(format!("angle file missing theta_{i}"))
        })?);
        phi.push(*phis.get(&i).ok_or_else(|| {
            CliError::config(format!("angle file missing phi_{i}"))
        })?);
    }
    gqspi_core::PhaseAngles::new(theta, phi, lambda0).map_err(CliError::from)
}

pub fn render_angle_lines(angles: &gqspi_core::PhaseAngles) -> String {
    let mut s = String::new();
    for (i, t) in angles.theta().iter().enumerate() {
        let _ = writeln!(s, "theta_{i} = {t}");
    }
    for (i, p) in angles.phi().iter().enumerate() {
        let _ = writeln!(s, "phi_{i} = {p}");
    }
    let _ = writeln!(s, "lambda0 = {}", angles.lambda0());
    s
}
