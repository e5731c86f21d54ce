//! Plain-text run configuration.
//!
//! ```text
//! # comment
//! [gas]
//! density_per_cm3 = 1e13
//! t_over_tbec = 2
//! ```
//!
//! Every key carries its unit in the name. Unknown sections and keys are
//! rejected with the offending line number.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::beam::{BeamSpec, Stiffness};
use crate::constants::M_RB87;
use crate::dynamics::Closure;
use crate::potential::PotentialSpec;
use crate::rates::{FugacityMode, J_CAP, SERIES_REL_TOL};

/// 1 cm⁻³ in m⁻³.
pub const PER_CM3: f64 = 1e6;

/// Densities of the reference sweep [1/m³].
pub const SWEEP_DENSITIES_PER_CM3: [f64; 5] = [1e12, 5e12, 1e13, 5e13, 1e14];

pub const DEFAULT_C5: f64 = 6e-65;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line, 0 when the problem is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateMethod {
    #[default]
    Series,
    Fgr,
    Simplified,
    C5,
    Oracle,
}

impl RateMethod {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "series" => Some(RateMethod::Series),
            "fgr" => Some(RateMethod::Fgr),
            "simplified" => Some(RateMethod::Simplified),
            "c5" => Some(RateMethod::C5),
            "oracle" => Some(RateMethod::Oracle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Kelvin(f64),
    OverTbec(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GasConfig {
    pub mass: f64,
    /// [1/m³]
    pub density: f64,
    pub temperature: Temperature,
    /// Sweep densities [1/m³].
    pub densities: Vec<f64>,
    pub fugacity: FugacityMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatesConfig {
    pub method: RateMethod,
    pub j_max: usize,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub t_over_tbec_min: f64,
    pub t_over_tbec_max: f64,
    pub points: usize,
}

impl SweepConfig {
    /// Log-spaced T/T_BEC grid, both ends included.
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.t_over_tbec_min];
        }
        let (a, b) = (self.t_over_tbec_min.ln(), self.t_over_tbec_max.ln());
        (0..self.points)
            .map(|i| (a + (b - a) * i as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolConfig {
    /// Initial tube temperature [K].
    pub tc0: f64,
    /// [s]; `None` means 200 relaxation times.
    pub t_end: Option<f64>,
    pub samples: usize,
    pub closure: Closure,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub beam: BeamSpec,
    pub l_max: usize,
    pub potential: PotentialSpec,
    /// V_n(q̄) table: grid and powers.
    pub qbar_max: f64,
    pub qbar_points: usize,
    pub powers: Vec<u32>,
    pub gas: GasConfig,
    pub rates: RatesConfig,
    pub sweep: SweepConfig,
    pub cool: CoolConfig,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let beam = BeamSpec::reference_tube();
        Self {
            beam,
            l_max: 5,
            potential: PotentialSpec {
                radius: beam.radius,
                terms: vec![(5, DEFAULT_C5)],
                even_by_quadrature: true,
            },
            qbar_max: 30.0,
            qbar_points: 601,
            powers: vec![3, 4, 5, 6, 7],
            gas: GasConfig {
                mass: M_RB87,
                density: 1e13 * PER_CM3,
                temperature: Temperature::OverTbec(2.0),
                densities: SWEEP_DENSITIES_PER_CM3.iter().map(|n| n * PER_CM3).collect(),
                fugacity: FugacityMode::Exact,
            },
            rates: RatesConfig {
                method: RateMethod::Series,
                j_max: J_CAP,
                rel_tol: SERIES_REL_TOL,
            },
            sweep: SweepConfig {
                t_over_tbec_min: 1.05,
                t_over_tbec_max: 5.0,
                points: 20,
            },
            cool: CoolConfig {
                tc0: 4.0,
                t_end: None,
                samples: 101,
                closure: Closure::GroundMode,
                rel_tol: 1e-8,
            },
            output_path: None,
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::at(0, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        let mut seen: Vec<(String, usize)> = Vec::new();
        let mut stiffness_line = None;
        let mut density_line = None;
        let mut temperature_line = None;
        let mut densities_line = None;
        let mut potential_radius_set = false;
        let mut terms: Vec<(u32, f64)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line, format!("malformed section header `{body}`")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::at(line, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .as_deref()
                .ok_or_else(|| ConfigError::at(line, format!("key `{key}` outside any section")))?;
            let full = format!("{sec}.{key}");
            if let Some((_, first)) = seen.iter().find(|(k, _)| *k == full) {
                return Err(ConfigError::at(line, format!("duplicate key `{full}` (first on line {first})")));
            }
            seen.push((full, line));

            let num = || parse_f64(line, key, value);
            let positive = || parse_positive(line, key, value);
            let count = || parse_usize(line, key, value);
            let once = |slot: &mut Option<usize>, group: &str| -> Result<(), ConfigError> {
                match slot {
                    Some(first) => Err(ConfigError::at(
                        line,
                        format!("`{key}` conflicts with line {first}; give only one {group}"),
                    )),
                    None => {
                        *slot = Some(line);
                        Ok(())
                    }
                }
            };

            match (sec, key) {
                ("beam", "radius_m") => {
                    cfg.beam.radius = positive()?;
                    if !potential_radius_set {
                        cfg.potential.radius = cfg.beam.radius;
                    }
                }
                ("beam", "length_m") => cfg.beam.length = positive()?,
                ("beam", "rho_c_kg_per_m") => cfg.beam.rho_c = positive()?,
                ("beam", "omega0_rad_per_s") => {
                    once(&mut stiffness_line, "stiffness")?;
                    cfg.beam.stiffness = Stiffness::GroundFrequency(positive()?);
                }
                ("beam", "f0_hz") => {
                    once(&mut stiffness_line, "stiffness")?;
                    cfg.beam.stiffness = Stiffness::GroundFrequency(2.0 * PI * positive()?);
                }
                ("beam", "ei_n_m2") => {
                    once(&mut stiffness_line, "stiffness")?;
                    cfg.beam.stiffness = Stiffness::FlexuralRigidity(positive()?);
                }
                ("beam", "l_max") => cfg.l_max = count()?,
                ("potential", "radius_m") => {
                    cfg.potential.radius = positive()?;
                    potential_radius_set = true;
                }
                ("potential", "even_by_quadrature") => cfg.potential.even_by_quadrature = parse_bool(line, key, value)?,
                ("potential", "qbar_max") => cfg.qbar_max = positive()?,
                ("potential", "qbar_points") => cfg.qbar_points = count()?.max(1),
                ("potential", "powers") => {
                    cfg.powers = parse_list(line, key, value, |s| s.parse::<u32>().ok())?;
                }
                ("potential", k) if coefficient_power(k).is_some() => {
                    terms.push((coefficient_power(k).unwrap_or(0), num()?));
                }
                ("gas", "mass_kg") => cfg.gas.mass = positive()?,
                ("gas", "density_per_cm3") => {
                    once(&mut density_line, "density")?;
                    cfg.gas.density = positive()? * PER_CM3;
                }
                ("gas", "density_per_m3") => {
                    once(&mut density_line, "density")?;
                    cfg.gas.density = positive()?;
                }
                ("gas", "temperature_k") => {
                    once(&mut temperature_line, "temperature")?;
                    cfg.gas.temperature = Temperature::Kelvin(positive()?);
                }
                ("gas", "t_over_tbec") => {
                    once(&mut temperature_line, "temperature")?;
                    cfg.gas.temperature = Temperature::OverTbec(positive()?);
                }
                ("gas", "densities_per_cm3") => {
                    once(&mut densities_line, "density list")?;
                    cfg.gas.densities = parse_positive_list(line, key, value)?
                        .into_iter()
                        .map(|n| n * PER_CM3)
                        .collect();
                }
                ("gas", "densities_per_m3") => {
                    once(&mut densities_line, "density list")?;
                    cfg.gas.densities = parse_positive_list(line, key, value)?;
                }
                ("gas", "fugacity") => {
                    cfg.gas.fugacity = match value {
                        "exact" => FugacityMode::Exact,
                        "classical" => FugacityMode::Classical,
                        _ => return Err(bad_value(line, key, value, "exact or classical")),
                    }
                }
                ("rates", "method") => {
                    cfg.rates.method = RateMethod::parse(value)
                        .ok_or_else(|| bad_value(line, key, value, "series, fgr, simplified, c5 or oracle"))?;
                }
                ("rates", "j_max") => cfg.rates.j_max = count()?.max(1),
                ("rates", "rel_tol") => cfg.rates.rel_tol = positive()?,
                ("sweep", "t_over_tbec_min") => cfg.sweep.t_over_tbec_min = positive()?,
                ("sweep", "t_over_tbec_max") => cfg.sweep.t_over_tbec_max = positive()?,
                ("sweep", "points") => cfg.sweep.points = count()?.max(1),
                ("cool", "tc0_k") => cfg.cool.tc0 = positive()?,
                ("cool", "t_end_s") => cfg.cool.t_end = Some(positive()?),
                ("cool", "samples") => cfg.cool.samples = count()?.max(2),
                ("cool", "closure") => {
                    cfg.cool.closure = match value {
                        "ground" => Closure::GroundMode,
                        "energy" => Closure::EnergyWeighted,
                        _ => return Err(bad_value(line, key, value, "ground or energy")),
                    }
                }
                ("cool", "rel_tol") => cfg.cool.rel_tol = positive()?,
                ("output", "path") => cfg.output_path = Some(PathBuf::from(value)),
                ("output", "format") => {
                    cfg.format = Format::parse(value).ok_or_else(|| bad_value(line, key, value, "csv or json"))?;
                }
                _ => return Err(ConfigError::at(line, format!("unknown key `{key}` in [{sec}]"))),
            }
        }
        if !terms.is_empty() {
            terms.sort_by_key(|&(n, _)| n);
            cfg.potential.terms = terms;
        }
        cfg.potential
            .validate()
            .map_err(|e| ConfigError::at(0, format!("[potential]: {e}")))?;
        if cfg.sweep.t_over_tbec_min > cfg.sweep.t_over_tbec_max {
            return Err(ConfigError::at(0, "[sweep]: t_over_tbec_min exceeds t_over_tbec_max"));
        }
        Ok(cfg)
    }
}

const SECTIONS: [&str; 7] = ["beam", "potential", "gas", "rates", "sweep", "cool", "output"];

/// `c5_j_m5` -> 5.
fn coefficient_power(key: &str) -> Option<u32> {
    let rest = key.strip_prefix('c')?;
    let (n, unit) = rest.split_once("_j_m")?;
    let n: u32 = n.parse().ok()?;
    (unit.parse::<u32>().ok()? == n).then_some(n)
}

fn bad_value(line: usize, key: &str, value: &str, expected: &str) -> ConfigError {
    ConfigError::at(line, format!("`{key}`: expected {expected}, got `{value}`"))
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(bad_value(line, key, value, "a finite number")),
    }
}

fn parse_positive(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = parse_f64(line, key, value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(bad_value(line, key, value, "a positive number"))
    }
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    value
        .parse()
        .map_err(|_| bad_value(line, key, value, "a non-negative integer"))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad_value(line, key, value, "true or false")),
    }
}

fn parse_list<T>(line: usize, key: &str, value: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, ConfigError> {
    let out: Option<Vec<T>> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(&item)
        .collect();
    match out {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(bad_value(line, key, value, "a comma-separated list")),
    }
}

fn parse_positive_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    parse_list(line, key, value, |s| s.parse::<f64>().ok().filter(|v| *v > 0.0 && v.is_finite()))
}
