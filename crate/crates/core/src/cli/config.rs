use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dataprep::{Balance, Normalization, WeightParams};
use crate::error::{Error, Result};
use crate::markerseg::PipelineParams;
use crate::raster::Connectivity;

use super::oracle::OraclePredictorSpec;

/// Bundled presets, name and file text.
pub const PRESETS: &[(&str, &str)] = &[
    ("dic-hela", include_str!("../../presets/dic-hela.cfg")),
    ("fluo-sim", include_str!("../../presets/fluo-sim.cfg")),
    ("phc-psc", include_str!("../../presets/phc-psc.cfg")),
    ("synthetic", include_str!("../../presets/synthetic.cfg")),
];

/// Where the marker targets come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkerSource {
    /// Eroded full (SEG) annotations.
    ErodedFull,
    /// Weak (TRA) annotations.
    Weak,
}

impl FromStr for MarkerSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eroded_full" => Ok(MarkerSource::ErodedFull),
            "weak" => Ok(MarkerSource::Weak),
            other => Err(Error::Config(format!("unknown marker_source `{other}`"))),
        }
    }
}

impl std::fmt::Display for MarkerSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MarkerSource::ErodedFull => "eroded_full",
            MarkerSource::Weak => "weak",
        })
    }
}

/// A value given literally or resolved from data at run time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Setting<T> {
    Fixed(T),
    /// `t_c = calibrate` or `d_inf = measure`.
    FromData,
}

impl<T: std::fmt::Display> Setting<T> {
    fn render(&self, keyword: &str) -> String {
        match self {
            Setting::Fixed(v) => v.to_string(),
            Setting::FromData => keyword.to_string(),
        }
    }
}

/// Parsed flat `key = value` configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetConfig {
    pub root: Option<PathBuf>,
    pub sequences: Vec<String>,
    pub normalization: Normalization,
    pub marker_source: MarkerSource,
    pub k: f64,
    pub t_m: f32,
    pub h: u8,
    pub t_c: Setting<u8>,
    pub d_inf: Setting<f64>,
    pub connectivity: Connectivity,
    pub remove_border: bool,
    pub seed: u64,
    pub oracle: OraclePredictorSpec,
    pub weights: WeightParams,
    /// Augmented copies written per frame by `prepare`.
    pub augment_copies: usize,
    pub elastic: bool,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            root: None,
            sequences: vec!["01".to_string()],
            normalization: Normalization::He,
            marker_source: MarkerSource::ErodedFull,
            k: 0.8,
            t_m: 0.6,
            h: 5,
            t_c: Setting::FromData,
            d_inf: Setting::FromData,
            connectivity: Connectivity::Eight,
            remove_border: false,
            seed: 0,
            oracle: OraclePredictorSpec::default(),
            weights: WeightParams::default(),
            augment_copies: 0,
            elastic: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid value `{value}` for `{key}`"))),
    }
}

/// Splits config text into `(line number, key, value)` entries.
fn entries(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected `key = value`", i + 1)));
        };
        out.push((i + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

impl DatasetConfig {
    /// Parses config text on top of the defaults. A `preset` key, if present,
    /// is applied first regardless of its position.
    pub fn parse(text: &str) -> Result<DatasetConfig> {
        let entries = entries(text)?;
        let mut cfg = DatasetConfig::default();
        if let Some((_, _, name)) = entries.iter().find(|(_, k, _)| k == "preset") {
            let preset = preset_text(name).ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
            cfg = DatasetConfig::parse(preset)?;
        }
        for (line, key, value) in &entries {
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {line}: {}", strip_config(e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file, or a bundled preset when `spec` names one and no
    /// such file exists. A relative `root` is resolved against the file's directory.
    pub fn load(spec: &Path) -> Result<DatasetConfig> {
        if !spec.exists() {
            if let Some(text) = spec.to_str().and_then(preset_text) {
                return DatasetConfig::parse(text);
            }
            return Err(Error::Config(format!("config `{}` is neither a file nor a preset", spec.display())));
        }
        let text = std::fs::read_to_string(spec)?;
        let mut cfg = DatasetConfig::parse(&text)?;
        if let Some(root) = &cfg.root {
            if root.is_relative() {
                let base = spec.parent().unwrap_or(Path::new(""));
                cfg.root = Some(base.join(root));
            }
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "preset" => {}
            "root" => self.root = Some(PathBuf::from(value)),
            "sequences" => {
                self.sequences = value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
            }
            "normalization" => self.normalization = value.parse()?,
            "marker_source" => self.marker_source = value.parse()?,
            "k" => self.k = parse(key, value)?,
            "t_m" => self.t_m = parse(key, value)?,
            "h" => self.h = parse(key, value)?,
            "t_c" => {
                self.t_c = if value == "calibrate" {
                    Setting::FromData
                } else {
                    Setting::Fixed(parse(key, value)?)
                }
            }
            "d_inf" => {
                self.d_inf = if value == "measure" {
                    Setting::FromData
                } else {
                    Setting::Fixed(parse(key, value)?)
                }
            }
            "connectivity" => {
                self.connectivity = Connectivity::try_from(parse::<u8>(key, value)?)?;
            }
            "remove_border" => self.remove_border = parse_bool(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "oracle_sigma" => self.oracle.sigma = parse(key, value)?,
            "oracle_k" => self.oracle.k = parse(key, value)?,
            "oracle_noise" => self.oracle.noise = parse(key, value)?,
            "weight_a" => self.weights.a = parse(key, value)?,
            "weight_d" => self.weights.d = parse(key, value)?,
            "balance" => {
                self.weights.balance = match value {
                    "none" => Balance::None,
                    "class_frequency" => Balance::ClassFrequency,
                    _ => return Err(Error::Config(format!("invalid value `{value}` for `balance`"))),
                }
            }
            "augment_copies" => self.augment_copies = parse(key, value)?,
            "elastic" => self.elastic = parse_bool(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.sequences.is_empty() {
            return Err(Error::Config("no sequences given".into()));
        }
        let probe = PipelineParams {
            t_c: 0,
            d_inf: 1.0,
            ..self.params_with(0, 1.0)
        };
        probe.validate().map_err(|e| Error::Config(strip_config(e)))?;
        if let Setting::Fixed(d) = self.d_inf {
            if !(d > 0.0) {
                return Err(Error::Config(format!("d_inf {d} must be positive")));
            }
        }
        self.oracle.validate().map_err(|e| Error::Config(strip_config(e)))?;
        Ok(())
    }

    /// Pipeline parameters once `t_c` and `d_inf` are known.
    pub fn params_with(&self, t_c: u8, d_inf: f64) -> PipelineParams {
        PipelineParams {
            t_m: self.t_m,
            h: self.h,
            k: self.k,
            d_inf,
            t_c,
            connectivity: self.connectivity,
            remove_border: self.remove_border,
        }
    }

    /// The resolved configuration in the same flat format.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if let Some(root) = &self.root {
            let _ = writeln!(s, "root = {}", root.display());
        }
        let balance = match self.weights.balance {
            Balance::None => "none",
            Balance::ClassFrequency => "class_frequency",
        };
        let _ = write!(
            s,
            "sequences = {}\nnormalization = {}\nmarker_source = {}\nk = {}\nt_m = {}\nh = {}\nt_c = {}\nd_inf = {}\n\
             connectivity = {}\nremove_border = {}\nseed = {}\noracle_sigma = {}\noracle_k = {}\noracle_noise = {}\n\
             weight_a = {}\nweight_d = {}\nbalance = {}\naugment_copies = {}\nelastic = {}\n",
            self.sequences.join(","),
            self.normalization,
            self.marker_source,
            self.k,
            self.t_m,
            self.h,
            self.t_c.render("calibrate"),
            self.d_inf.render("measure"),
            self.connectivity.as_u8(),
            self.remove_border,
            self.seed,
            self.oracle.sigma,
            self.oracle.k,
            self.oracle.noise,
            self.weights.a,
            self.weights.d,
            balance,
            self.augment_copies,
            self.elastic,
        );
        s
    }
}

fn strip_config(e: Error) -> String {
    match e {
        Error::Config(s) => s,
        other => other.to_string(),
    }
}

/// Rewrites (or appends) `key = value` in a config file, keeping other lines.
pub fn write_back(path: &Path, key: &str, value: &str) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    let mut found = false;
    let mut lines: Vec<String> = text
        .lines()
        .map(|line| {
            let body = line.split('#').next().unwrap_or("");
            match body.split_once('=') {
                Some((k, _)) if k.trim() == key && !found => {
                    found = true;
                    format!("{key} = {value}")
                }
                _ => line.to_string(),
            }
        })
        .collect();
    if !found {
        lines.push(format!("{key} = {value}"));
    }
    std::fs::write(path, lines.join("\n") + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_dataset_table() {
        let dic = DatasetConfig::parse(preset_text("dic-hela").unwrap()).unwrap();
        assert_eq!((dic.k, dic.h, dic.t_c, dic.d_inf), (0.8, 5, Setting::Fixed(216), Setting::Fixed(60.0)));
        assert_eq!(dic.normalization, Normalization::He);
        assert_eq!(dic.params_with(216, 60.0), PipelineParams::dic_hela());

        let sim = DatasetConfig::parse(preset_text("fluo-sim").unwrap()).unwrap();
        assert_eq!((sim.h, sim.t_c, sim.d_inf), (30, Setting::Fixed(229), Setting::Fixed(20.0)));
        assert_eq!(sim.params_with(229, 20.0), PipelineParams::fluo_sim());

        let psc = DatasetConfig::parse(preset_text("phc-psc").unwrap()).unwrap();
        assert_eq!(psc.marker_source, MarkerSource::Weak);
        assert_eq!(psc.normalization, Normalization::Median);
        assert_eq!(psc.params_with(156, 6.0), PipelineParams::phc_psc());
    }

    #[test]
    fn overrides_apply_after_preset() {
        let cfg = DatasetConfig::parse("h = 9\npreset = dic-hela\nt_c = calibrate # later\nsequences = 01, 02").unwrap();
        assert_eq!(cfg.h, 9);
        assert_eq!(cfg.t_c, Setting::FromData);
        assert_eq!(cfg.sequences, vec!["01", "02"]);
        assert_eq!(cfg.d_inf, Setting::Fixed(60.0));
    }

    #[test]
    fn rejects_bad_input() {
        for text in ["h = 0", "t_m = 1.5", "bogus = 1", "connectivity = 6", "k", "preset = nope", "t_c = 300", "d_inf = -2"] {
            assert!(matches!(DatasetConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn render_round_trips() {
        let cfg = DatasetConfig::parse("preset = phc-psc\nroot = /data\nseed = 7\nbalance = class_frequency").unwrap();
        assert_eq!(DatasetConfig::parse(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn write_back_replaces_value() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# run\npreset = synthetic\nt_c = calibrate\n").unwrap();
        write_back(&path, "t_c", "131").unwrap();
        let cfg = DatasetConfig::load(&path).unwrap();
        assert_eq!(cfg.t_c, Setting::Fixed(131));
        write_back(&path, "seed", "4").unwrap();
        assert_eq!(DatasetConfig::load(&path).unwrap().seed, 4);
    }

    #[test]
    fn load_resolves_relative_root() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.cfg");
        std::fs::write(&path, "root = data\n").unwrap();
        assert_eq!(DatasetConfig::load(&path).unwrap().root, Some(dir.path().join("data")));
        assert!(DatasetConfig::load(Path::new("fluo-sim")).is_ok());
        assert!(DatasetConfig::load(Path::new("/nowhere/x.cfg")).is_err());
    }
}
