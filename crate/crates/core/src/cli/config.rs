//! Run configuration: a flat `key = value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::constant_field_potential;
use crate::lattice::RibbonParams;
use crate::search::DEFAULT_GRID_POINTS;

/// Problems with the configuration; the message names the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, detail: impl fmt::Display) -> ConfigError {
    ConfigError(format!("invalid {field}: {detail}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(bad("format", format!("{other:?} (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Weak,
    Strong,
    ConstantField,
    Edges,
}

impl FromStr for Mode {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim() {
            "weak" => Ok(Self::Weak),
            "strong" => Ok(Self::Strong),
            "constant-field" => Ok(Self::ConstantField),
            "edges" => Ok(Self::Edges),
            other => Err(bad(
                "mode",
                format!("{other:?} (expected weak, strong, constant-field or edges)"),
            )),
        }
    }
}

/// How the transverse potential is given.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    /// `v_{2k+1} = εk`, even rows zero.
    ConstantField(f64),
    /// `v = (1, 2, …, p)`.
    Ramp,
    /// Entries uniform in `[-scale, scale]`, drawn from the run seed.
    Random(f64),
    Explicit(Vec<f64>),
}

fn parse_list(field: &str, text: &str) -> Result<Vec<f64>, ConfigError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| bad(field, format!("{s:?} is not a number"))))
        .collect()
}

fn parse_scale(name: &str, rest: &str) -> Result<f64, ConfigError> {
    let x: f64 = rest
        .trim()
        .parse()
        .map_err(|_| bad("potential", format!("{name} needs a number, got {rest:?}")))?;
    if !x.is_finite() {
        return Err(bad("potential", format!("{name} scale must be finite")));
    }
    Ok(x)
}

impl PotentialSpec {
    /// `zero`, `ramp`, `constant-field:ε`, `linear-odd:ε`, `random:scale`, a
    /// file of numbers, or a comma-separated list.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let t = text.trim();
        let (head, rest) = match t.split_once([':', ' ']) {
            Some((h, r)) => (h, Some(r)),
            None => (t, None),
        };
        match (head, rest) {
            ("zero", None) => return Ok(Self::Zero),
            ("ramp", None) => return Ok(Self::Ramp),
            ("constant-field" | "linear-odd", Some(r)) => return Ok(Self::ConstantField(parse_scale(head, r)?)),
            ("random", Some(r)) => return Ok(Self::Random(parse_scale(head, r)?)),
            ("constant-field" | "linear-odd" | "random", None) => {
                return Err(bad("potential", format!("{head} needs a scale, e.g. {head}:1e-3")))
            }
            _ => {}
        }
        let path = Path::new(t);
        if path.is_file() {
            let body = std::fs::read_to_string(path)
                .map_err(|e| bad("potential", format!("cannot read {}: {e}", path.display())))?;
            return Ok(Self::Explicit(parse_list("potential", &body)?));
        }
        let list = parse_list("potential", t)?;
        if list.is_empty() {
            return Err(bad("potential", "empty"));
        }
        Ok(Self::Explicit(list))
    }

    pub fn build(&self, width: usize, seed: u64) -> Result<RibbonParams, ConfigError> {
        let p = 2 * width + 1;
        let v = match self {
            Self::Zero => vec![0.0; p],
            Self::ConstantField(eps) => {
                return constant_field_potential(width, *eps).map_err(|e| bad("potential", e));
            }
            Self::Ramp => (1..=p).map(|x| x as f64).collect(),
            Self::Random(scale) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..p).map(|_| scale * rng.gen_range(-1.0..=1.0)).collect()
            }
            Self::Explicit(v) => v.clone(),
        };
        RibbonParams::new(width, v).map_err(|e| bad("potential", e))
    }
}

/// Fully resolved settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub width: usize,
    pub potential: PotentialSpec,
    pub grid_points: usize,
    pub t: Option<f64>,
    pub mode: Option<Mode>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub seed: u64,
    pub m: i64,
    pub cells: Option<usize>,
}

/// Raw values before validation; `None` means "not given here".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub width: Option<String>,
    pub potential: Option<String>,
    pub grid_points: Option<String>,
    pub t: Option<String>,
    pub mode: Option<String>,
    pub format: Option<String>,
    pub out: Option<String>,
    pub report: Option<String>,
    pub seed: Option<String>,
    pub m: Option<String>,
    pub cells: Option<String>,
}

impl ConfigLayer {
    /// Parse `key = value` lines. `#` starts a comment; blank lines are skipped.
    pub fn parse_file_text(text: &str) -> Result<Self, ConfigError> {
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("config line {}: expected key = value", lineno + 1)))?;
            let key = k.trim().to_string();
            if seen.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError(format!("config line {}: duplicate key {key}", lineno + 1)));
            }
        }
        let mut layer = Self::default();
        for (key, value) in seen {
            let slot = match key.as_str() {
                "N" => &mut layer.width,
                "potential" => &mut layer.potential,
                "grid_points" | "grid" => &mut layer.grid_points,
                "t" => &mut layer.t,
                "mode" => &mut layer.mode,
                "format" | "output_format" => &mut layer.format,
                "out" | "output_path" => &mut layer.out,
                "report" => &mut layer.report,
                "seed" => &mut layer.seed,
                "m" => &mut layer.m,
                "L" => &mut layer.cells,
                other => return Err(ConfigError(format!("unknown config key {other:?}"))),
            };
            *slot = Some(value);
        }
        Ok(layer)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_file_text(&text)
    }

    /// Values in `self` win over `base`.
    pub fn over(self, base: Self) -> Self {
        Self {
            width: self.width.or(base.width),
            potential: self.potential.or(base.potential),
            grid_points: self.grid_points.or(base.grid_points),
            t: self.t.or(base.t),
            mode: self.mode.or(base.mode),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
            report: self.report.or(base.report),
            seed: self.seed.or(base.seed),
            m: self.m.or(base.m),
            cells: self.cells.or(base.cells),
        }
    }

    pub fn resolve(self, default_width: usize) -> Result<RunConfig, ConfigError> {
        fn num<T: FromStr>(field: &str, v: Option<String>) -> Result<Option<T>, ConfigError> {
            v.map(|s| s.trim().parse::<T>().map_err(|_| bad(field, format!("{s:?}"))))
                .transpose()
        }
        let width = num::<usize>("N", self.width)?.unwrap_or(default_width);
        if width == 0 {
            return Err(bad("N", "must be at least 1"));
        }
        let potential = match self.potential {
            Some(s) => PotentialSpec::parse(&s)?,
            None => PotentialSpec::Zero,
        };
        if let PotentialSpec::Explicit(v) = &potential {
            if v.len() != 2 * width + 1 {
                return Err(bad(
                    "potential",
                    format!("{} entries given, N = {width} needs p = {}", v.len(), 2 * width + 1),
                ));
            }
        }
        let grid_points = num::<usize>("grid", self.grid_points)?.unwrap_or(DEFAULT_GRID_POINTS);
        if grid_points < 3 || grid_points % 2 == 0 {
            return Err(bad("grid", format!("{grid_points} (must be odd and at least 3)")));
        }
        let t = num::<f64>("t", self.t)?;
        if let Some(t) = t {
            if !(t.is_finite() && t > 0.0) {
                return Err(bad("t", format!("{t} (must be positive)")));
            }
        }
        let mode = self.mode.map(|s| s.parse::<Mode>()).transpose()?;
        let format = self.format.map(|s| s.parse()).transpose()?.unwrap_or_default();
        let seed = num::<u64>("seed", self.seed)?.unwrap_or(0);
        let m = num::<i64>("m", self.m)?.unwrap_or(0);
        let cells = num::<usize>("L", self.cells)?;
        Ok(RunConfig {
            width,
            potential,
            grid_points,
            t,
            mode,
            format,
            out: self.out.map(PathBuf::from),
            report: self.report.map(PathBuf::from),
            seed,
            m,
            cells,
        })
    }
}

impl RunConfig {
    pub fn params(&self) -> Result<RibbonParams, ConfigError> {
        self.potential.build(self.width, self.seed)
    }
}
