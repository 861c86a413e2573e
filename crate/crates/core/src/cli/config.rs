//! Command-line flags, config files and the validated run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;

use crate::field::{resolve_detuning, OverlapMode, PhaseMode, PhysicalRates};
use crate::models::FormulaMode;
use crate::optimize::{grid, ScalingMode, Spacing};

/// Batch driver for cavity spin-squeezing simulations.
///
/// All rates and frequencies are in rad/us (kappa, Omega, delta, g, Gamma,
/// omega-*) and times in us. No unit conversion is performed.
#[derive(Debug, Parser)]
#[command(name = "cavsq", version)]
pub struct Cli {
    /// traj | sweep-detuning | scaling | scatter | optimize-detuning | validate
    pub command: Option<String>,
    /// Flat `key = value` file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Collective spin S (half the atom number).
    #[arg(long = "S", allow_hyphen_values = true)]
    pub s: Option<String>,
    /// Cavity linewidth kappa.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<String>,
    /// Dispersive shift per unit S_z.
    #[arg(long = "Omega", allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Drive amplitude (steady-state field of the empty cavity on resonance).
    #[arg(long, allow_hyphen_values = true)]
    pub beta0: Option<String>,
    /// Detuning in half-linewidths, delta = -x kappa / 2.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Cavity detuning delta.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Single-atom cooperativities, comma separated; `inf` disables scattering.
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
    /// Shearing strength Qx for `validate`.
    #[arg(long = "Qx", allow_hyphen_values = true)]
    pub qx: Option<String>,
    /// Time grid `lo:hi:count[:lin|log]` or a comma list.
    #[arg(long = "t-grid", allow_hyphen_values = true)]
    pub t_grid: Option<String>,
    /// Qx grid, same grammar as --t-grid.
    #[arg(long = "qx-grid", allow_hyphen_values = true)]
    pub qx_grid: Option<String>,
    /// Detuning grid, same grammar as --t-grid.
    #[arg(long = "x-grid", allow_hyphen_values = true)]
    pub x_grid: Option<String>,
    /// Spin values for `scaling`, comma separated.
    #[arg(long = "s-list")]
    pub s_list: Option<String>,
    /// analytic | numeric
    #[arg(long = "phase-mode")]
    pub phase_mode: Option<String>,
    /// on | off
    #[arg(long = "overlap-mode")]
    pub overlap_mode: Option<String>,
    /// standard | as-written
    #[arg(long = "formula-mode")]
    pub formula_mode: Option<String>,
    /// Scaling mode: exact | analytic
    #[arg(long)]
    pub mode: Option<String>,
    /// Atom-cavity coupling g (optional, with the other rates).
    #[arg(long)]
    pub g: Option<String>,
    /// Excited-state linewidth Gamma.
    #[arg(long = "Gamma")]
    pub gamma: Option<String>,
    /// Hyperfine splitting omega_a.
    #[arg(long = "omega-a", allow_hyphen_values = true)]
    pub omega_a: Option<String>,
    /// Cavity frequency omega_c.
    #[arg(long = "omega-c", allow_hyphen_values = true)]
    pub omega_c: Option<String>,
    /// Laser frequency omega_l.
    #[arg(long = "omega-l", allow_hyphen_values = true)]
    pub omega_l: Option<String>,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Plot columns `xcol,ycol`.
    #[arg(long)]
    pub plot: Option<String>,
    /// Omit the metadata comment line.
    #[arg(long = "no-meta")]
    pub no_meta: bool,
}

const KEYS: &[&str] = &[
    "command",
    "S",
    "kappa",
    "Omega",
    "beta0",
    "x",
    "delta",
    "eta",
    "Qx",
    "t-grid",
    "qx-grid",
    "x-grid",
    "s-list",
    "phase-mode",
    "overlap-mode",
    "formula-mode",
    "mode",
    "g",
    "Gamma",
    "omega-a",
    "omega-c",
    "omega-l",
    "out",
    "svg",
    "plot",
    "no-meta",
];

/// Configuration problems; all map to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("unknown config key '{key}' (line {line})")]
    UnknownKey { key: String, line: usize },
    #[error("malformed config line {line}: {text}")]
    Syntax { line: usize, text: String },
    #[error("bad value for '{key}': {reason}")]
    Value { key: &'static str, reason: String },
    #[error("cannot read config file: {0}")]
    Io(String),
}

/// Parse flat `key = value` text; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: n + 1,
            text: raw.to_string(),
        })?;
        let key = k.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                key: key.to_string(),
                line: n + 1,
            });
        }
        map.insert(key.to_string(), v.trim().to_string());
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Traj,
    SweepDetuning,
    Scaling,
    Scatter,
    OptimizeDetuning,
    Validate,
}

impl Command {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "traj" => Self::Traj,
            "sweep-detuning" => Self::SweepDetuning,
            "scaling" => Self::Scaling,
            "scatter" => Self::Scatter,
            "optimize-detuning" => Self::OptimizeDetuning,
            "validate" => Self::Validate,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Traj => "traj",
            Self::SweepDetuning => "sweep-detuning",
            Self::Scaling => "scaling",
            Self::Scatter => "scatter",
            Self::OptimizeDetuning => "optimize-detuning",
            Self::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Range {
        lo: f64,
        hi: f64,
        count: usize,
        spacing: Spacing,
    },
    List(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Range {
                lo,
                hi,
                count,
                spacing,
            } => grid(*lo, *hi, *count, *spacing),
            GridSpec::List(v) => v.clone(),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        let v = self.values();
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

pub fn parse_grid(key: &'static str, text: &str) -> Result<GridSpec, ConfigError> {
    let bad = |reason: String| ConfigError::Value { key, reason };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad(format!("expected lo:hi:count[:lin|log], got '{text}'")));
        }
        let lo = parse_f64(key, parts[0])?;
        let hi = parse_f64(key, parts[1])?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| bad(format!("bad count '{}'", parts[2])))?;
        let spacing = match parts.get(3).copied() {
            None | Some("lin") => Spacing::Linear,
            Some("log") => Spacing::Log,
            Some(o) => return Err(bad(format!("spacing must be lin or log, got '{o}'"))),
        };
        if !(lo < hi) {
            return Err(bad(format!("need lo < hi, got {lo}:{hi}")));
        }
        if count < 2 {
            return Err(bad(format!("need count >= 2, got {count}")));
        }
        if spacing == Spacing::Log && lo <= 0.0 {
            return Err(bad("log spacing needs lo > 0".into()));
        }
        Ok(GridSpec::Range {
            lo,
            hi,
            count,
            spacing,
        })
    } else {
        Ok(GridSpec::List(parse_list(key, text)?))
    }
}

fn parse_f64(key: &'static str, text: &str) -> Result<f64, ConfigError> {
    let v = match text.trim() {
        "inf" => f64::INFINITY,
        t => t.parse::<f64>().map_err(|_| ConfigError::Value {
            key,
            reason: format!("not a number: '{t}'"),
        })?,
    };
    if v.is_nan() {
        return Err(ConfigError::Value {
            key,
            reason: "NaN".into(),
        });
    }
    Ok(v)
}

fn parse_list(key: &'static str, text: &str) -> Result<Vec<f64>, ConfigError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| parse_f64(key, t))
        .collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err(ConfigError::Value {
            key,
            reason: "empty list".into(),
        });
    }
    Ok(v)
}

/// Fully validated run configuration. Optional fields are those a command
/// may not need; [`RunConfig::from_map`] enforces per-command presence.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub s: Option<f64>,
    pub kappa: Option<f64>,
    pub omega: Option<f64>,
    pub beta0: Option<f64>,
    /// Normalized detuning, resolved from `x` or `delta`.
    pub x: Option<f64>,
    pub eta: Vec<f64>,
    pub qx: Option<f64>,
    pub t_grid: Option<GridSpec>,
    pub qx_grid: Option<GridSpec>,
    pub x_grid: Option<GridSpec>,
    pub s_list: Option<Vec<f64>>,
    pub phase: PhaseMode,
    pub overlap: OverlapMode,
    pub formula: FormulaMode,
    pub scaling_mode: ScalingMode,
    pub rates: Option<PhysicalRates>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub plot: Option<(String, String)>,
    pub meta: bool,
}

struct Keys<'a>(&'a BTreeMap<String, String>);

impl Keys<'_> {
    fn raw(&self, key: &'static str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn num(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        self.raw(key).map(|t| parse_f64(key, t)).transpose()
    }

    fn need(&self, key: &'static str) -> Result<f64, ConfigError> {
        self.num(key)?.ok_or(ConfigError::Missing(key))
    }

    fn grid(&self, key: &'static str) -> Result<Option<GridSpec>, ConfigError> {
        self.raw(key).map(|t| parse_grid(key, t)).transpose()
    }

    fn choice<T>(
        &self,
        key: &'static str,
        default: T,
        options: &[(&str, T)],
    ) -> Result<T, ConfigError>
    where
        T: Copy,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => options
                .iter()
                .find(|(name, _)| *name == v)
                .map(|(_, t)| *t)
                .ok_or_else(|| ConfigError::Value {
                    key,
                    reason: format!("unexpected '{v}'"),
                }),
        }
    }
}

impl RunConfig {
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let k = Keys(map);
        let command_name = k.raw("command").ok_or(ConfigError::Missing("command"))?;
        let command = Command::parse(command_name).ok_or_else(|| ConfigError::Value {
            key: "command",
            reason: format!("unknown command '{command_name}'"),
        })?;

        let kappa = k.num("kappa")?;
        let x_raw = k.num("x")?;
        let delta = k.num("delta")?;
        let x = match (x_raw, delta) {
            (None, None) => None,
            (Some(x), None) => Some(x),
            (_, Some(_)) => {
                let kap = kappa.ok_or(ConfigError::Missing("kappa"))?;
                let d = resolve_detuning(kap, x_raw, delta).map_err(|e| ConfigError::Value {
                    key: "delta",
                    reason: e.to_string(),
                })?;
                Some(-2.0 * d / kap)
            }
        };

        let eta = match k.raw("eta") {
            Some(t) => parse_list("eta", t)?,
            None => Vec::new(),
        };
        if eta.iter().any(|e| *e <= 0.0) {
            return Err(ConfigError::Value {
                key: "eta",
                reason: "cooperativities must be positive".into(),
            });
        }

        let rates_keys = ["g", "Gamma", "omega-a", "omega-c", "omega-l"];
        let present = rates_keys
            .iter()
            .filter(|key| map.contains_key(**key))
            .count();
        let rates = match present {
            0 => None,
            5 => Some(PhysicalRates {
                g: k.need("g")?,
                gamma: k.need("Gamma")?,
                omega_a: k.need("omega-a")?,
                omega_c: k.need("omega-c")?,
                omega_l: k.need("omega-l")?,
            }),
            _ => {
                let missing = rates_keys
                    .iter()
                    .find(|key| !map.contains_key(**key))
                    .unwrap();
                return Err(ConfigError::Missing(missing));
            }
        };

        let plot = match k.raw("plot") {
            None => None,
            Some(p) => {
                let (a, b) = p.split_once(',').ok_or_else(|| ConfigError::Value {
                    key: "plot",
                    reason: format!("expected xcol,ycol, got '{p}'"),
                })?;
                Some((a.trim().to_string(), b.trim().to_string()))
            }
        };
        let meta = !matches!(k.raw("no-meta"), Some("true") | Some("1") | Some("yes"));

        let cfg = RunConfig {
            command,
            s: k.num("S")?,
            kappa,
            omega: k.num("Omega")?,
            beta0: k.num("beta0")?,
            x,
            eta,
            qx: k.num("Qx")?,
            t_grid: k.grid("t-grid")?,
            qx_grid: k.grid("qx-grid")?,
            x_grid: k.grid("x-grid")?,
            s_list: k
                .raw("s-list")
                .map(|t| parse_list("s-list", t))
                .transpose()?,
            phase: k.choice(
                "phase-mode",
                PhaseMode::Analytic,
                &[
                    ("analytic", PhaseMode::Analytic),
                    ("numeric", PhaseMode::Numeric),
                ],
            )?,
            overlap: k.choice(
                "overlap-mode",
                OverlapMode::On,
                &[("on", OverlapMode::On), ("off", OverlapMode::Off)],
            )?,
            formula: k.choice(
                "formula-mode",
                FormulaMode::Standard,
                &[
                    ("standard", FormulaMode::Standard),
                    ("as-written", FormulaMode::AsWritten),
                ],
            )?,
            scaling_mode: k.choice(
                "mode",
                ScalingMode::Exact,
                &[
                    ("exact", ScalingMode::Exact),
                    ("analytic", ScalingMode::Analytic),
                ],
            )?,
            rates,
            out: k.raw("out").map(PathBuf::from),
            svg: k.raw("svg").map(PathBuf::from),
            plot,
            meta,
        };
        cfg.check_required()?;
        Ok(cfg)
    }

    fn check_required(&self) -> Result<(), ConfigError> {
        let need = |present: bool, key: &'static str| {
            if present {
                Ok(())
            } else {
                Err(ConfigError::Missing(key))
            }
        };
        let drive = || -> Result<(), ConfigError> {
            need(self.kappa.is_some(), "kappa")?;
            need(self.omega.is_some(), "Omega")?;
            need(self.beta0.is_some(), "beta0")
        };
        match self.command {
            Command::Traj => {
                need(self.s.is_some(), "S")?;
                drive()?;
                need(self.x.is_some(), "x")?;
                need(self.t_grid.is_some() || self.qx_grid.is_some(), "t-grid")?;
                if self.t_grid.is_some() && self.qx_grid.is_some() {
                    return Err(ConfigError::Value {
                        key: "qx-grid",
                        reason: "give either t-grid or qx-grid, not both".into(),
                    });
                }
            }
            Command::SweepDetuning => {
                need(self.s.is_some(), "S")?;
                drive()?;
                need(self.x_grid.is_some(), "x-grid")?;
            }
            Command::Scaling => {
                need(self.s_list.is_some(), "s-list")?;
                need(self.x.is_some(), "x")?;
                if self.scaling_mode == ScalingMode::Exact {
                    drive()?;
                }
            }
            Command::Scatter => {
                need(self.s.is_some(), "S")?;
                need(self.x.is_some(), "x")?;
                need(!self.eta.is_empty(), "eta")?;
                need(self.qx_grid.is_some(), "qx-grid")?;
            }
            Command::OptimizeDetuning => {
                need(self.s.is_some(), "S")?;
                need(!self.eta.is_empty(), "eta")?;
                need(self.x_grid.is_some(), "x-grid")?;
            }
            Command::Validate => {
                need(self.s.is_some(), "S")?;
                drive()?;
                need(self.x.is_some(), "x")?;
                need(self.qx.is_some(), "Qx")?;
            }
        }
        Ok(())
    }
}

impl Cli {
    fn flag_map(&self) -> BTreeMap<String, String> {
        let pairs: [(&str, Option<String>); 25] = [
            ("command", self.command.clone()),
            ("S", self.s.clone()),
            ("kappa", self.kappa.clone()),
            ("Omega", self.omega.clone()),
            ("beta0", self.beta0.clone()),
            ("x", self.x.clone()),
            ("delta", self.delta.clone()),
            ("eta", self.eta.clone()),
            ("Qx", self.qx.clone()),
            ("t-grid", self.t_grid.clone()),
            ("qx-grid", self.qx_grid.clone()),
            ("x-grid", self.x_grid.clone()),
            ("s-list", self.s_list.clone()),
            ("phase-mode", self.phase_mode.clone()),
            ("overlap-mode", self.overlap_mode.clone()),
            ("formula-mode", self.formula_mode.clone()),
            ("mode", self.mode.clone()),
            ("g", self.g.clone()),
            ("Gamma", self.gamma.clone()),
            ("omega-a", self.omega_a.clone()),
            ("omega-c", self.omega_c.clone()),
            ("omega-l", self.omega_l.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("svg", self.svg.as_ref().map(|p| p.display().to_string())),
            ("plot", self.plot.clone()),
        ];
        let mut map: BTreeMap<String, String> = pairs
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect();
        if self.no_meta {
            map.insert("no-meta".into(), "true".into());
        }
        map
    }

    /// Merge the config file (if any) under the command-line flags.
    pub fn into_run_config(self) -> Result<RunConfig, ConfigError> {
        let mut map = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        map.extend(self.flag_map());
        RunConfig::from_map(&map)
    }
}
