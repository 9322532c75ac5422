//! Plain-text run configuration.
//!
//! ```text
//! # comments start with '#'
//! [constants]
//! sigma = 0.5
//! [grid]
//! N_p = 32
//! gamma_min = 2
//! [scenario]
//! preset = mixture
//! ```
//!
//! Sections are `constants`, `grid`, `scenario` and `output`. Every key is
//! optional, unknown or repeated keys are errors, and [`RunConfig::render`]
//! writes a file that parses back to the same configuration.

use std::collections::HashSet;
use std::fmt::Write as _;

use marle_core::dynamics::Closure;
use marle_core::quadrature::{internal_cutoff, momentum_cutoff, GridConfig, DEFAULT_CHECK_TOL};
use marle_core::Constants;

use crate::error::{validation, CliError, Result};

/// Physical constants as written in the file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantsBlock {
    pub c: f64,
    pub m: f64,
    pub k_b: f64,
    pub tau: f64,
    pub sigma: f64,
}

impl Default for ConstantsBlock {
    fn default() -> Self {
        ConstantsBlock { c: 1.0, m: 1.0, k_b: 1.0, tau: 1.0, sigma: 0.0 }
    }
}

/// Grid sizes. Unset cutoffs follow the tail rules for `gamma_min`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridBlock {
    pub n_p: usize,
    pub p_max: Option<f64>,
    pub n_i: usize,
    pub s_max: Option<f64>,
    pub gamma_min: f64,
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock { n_p: 32, p_max: None, n_i: 32, s_max: None, gamma_min: 0.5 }
    }
}

/// Initial condition shared by `equilibrate`, `relax` and `transport`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Preset {
    /// One Jüttner distribution `(n, u, gamma)`.
    #[default]
    Single,
    /// Sum of `(n, u, gamma)` and `(n2, u2, gamma2)`.
    Mixture,
    /// `(n, u, gamma)` times `1 + A·exp(−|p/mc − center|²/(2 width²))`.
    Bump,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Single => "single",
            Preset::Mixture => "mixture",
            Preset::Bump => "bump",
        }
    }
}

/// Subcommand parameters. Each run reads only the keys it needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scenario {
    /// Geometric γ scan of `mcurves`.
    pub gamma_start: f64,
    pub gamma_end: f64,
    pub points: usize,

    pub preset: Preset,
    pub n: f64,
    /// Spatial part of the four-velocity, same units as `c`.
    pub u: [f64; 3],
    pub gamma: f64,
    pub n2: f64,
    pub u2: [f64; 3],
    pub gamma2: f64,
    pub bump_amplitude: f64,
    /// In units of `mc`.
    pub bump_center: [f64; 3],
    pub bump_width: f64,

    /// Grids in the `equilibrate` refinement table, each doubling `N_p` and `N_I`.
    pub levels: usize,

    pub dt: f64,
    pub nsteps: usize,
    pub output_every: usize,
    pub refreeze: bool,
    pub closure: Closure,

    /// Periodic slab of `transport` with density `1 + amplitude·sin(2πx/L)`.
    pub length: f64,
    pub ncells: usize,
    pub amplitude: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            gamma_start: 0.1,
            gamma_end: 100.0,
            points: 50,
            preset: Preset::Single,
            n: 1.0,
            u: [0.0; 3],
            gamma: 2.0,
            n2: 1.0,
            u2: [0.0; 3],
            gamma2: 8.0,
            bump_amplitude: 0.5,
            bump_center: [1.0, 0.0, 0.0],
            bump_width: 0.5,
            levels: 2,
            dt: 0.25,
            nsteps: 20,
            output_every: 1,
            refreeze: true,
            closure: Closure::Conservative,
            length: 6.4,
            ncells: 64,
            amplitude: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputBlock {
    /// CSV destination; standard output when unset. `--out` overrides it.
    pub path: Option<String>,
    /// Significant digits of every number.
    pub precision: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { path: None, precision: 17 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub constants: ConstantsBlock,
    pub grid: GridBlock,
    pub scenario: Scenario,
    pub output: OutputBlock,
}

impl RunConfig {
    pub fn constants(&self) -> Result<Constants> {
        let k = &self.constants;
        Constants::new(k.c, k.m, k.k_b, k.tau, k.sigma).map_err(validation)
    }

    pub fn grid_config(&self) -> GridConfig {
        let g = &self.grid;
        GridConfig {
            n_p: g.n_p,
            p_max: g.p_max.unwrap_or_else(|| momentum_cutoff(g.gamma_min)),
            n_i: g.n_i,
            s_max: g.s_max.unwrap_or_else(|| internal_cutoff(g.gamma_min)),
            check_tol: DEFAULT_CHECK_TOL,
        }
    }

    /// Checks every invariant without building anything.
    pub fn validate(&self) -> Result<()> {
        self.constants()?;
        let g = &self.grid;
        require(g.gamma_min.is_finite() && g.gamma_min > 0.0, "gamma_min must be positive")?;
        self.grid_config().validate().map_err(validation)?;

        let s = &self.scenario;
        require(s.gamma_start.is_finite() && s.gamma_start > 0.0, "gamma_start must be positive")?;
        require(s.gamma_end.is_finite() && s.gamma_end > s.gamma_start, "gamma_end must exceed gamma_start")?;
        require(s.points >= 2, "points must be at least 2")?;
        for (n, u, gamma) in [(s.n, s.u, s.gamma), (s.n2, s.u2, s.gamma2)] {
            require(n.is_finite() && n > 0.0, "densities must be positive")?;
            require(gamma.is_finite() && gamma > 0.0, "gamma must be positive")?;
            require(u.iter().all(|x| x.is_finite()), "velocities must be finite")?;
        }
        require(s.bump_amplitude.is_finite() && s.bump_amplitude > -1.0, "bump_amplitude must exceed -1")?;
        require(s.bump_center.iter().all(|x| x.is_finite()), "bump_center must be finite")?;
        require(s.bump_width.is_finite() && s.bump_width > 0.0, "bump_width must be positive")?;
        require(s.levels >= 1, "levels must be at least 1")?;
        require(s.dt.is_finite() && s.dt > 0.0, "dt must be positive")?;
        require(s.nsteps >= 1, "nsteps must be at least 1")?;
        require(s.output_every >= 1, "output_every must be at least 1")?;
        require(s.length.is_finite() && s.length > 0.0, "length must be positive")?;
        require(s.ncells >= 1, "ncells must be at least 1")?;
        require(s.amplitude.is_finite() && s.amplitude.abs() < 1.0, "amplitude must lie in (-1, 1)")?;

        let o = &self.output;
        require((1..=17).contains(&o.precision), "precision must lie in 1..=17")?;
        require(o.path.as_deref() != Some(""), "path must not be empty")?;
        Ok(())
    }

    /// Text form listing every field, section by section.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for field in FIELDS {
            if field.section != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                section = field.section;
                let _ = writeln!(out, "[{section}]");
            }
            if let Some(value) = (field.get)(self) {
                let _ = writeln!(out, "{} = {value}", field.key);
            }
        }
        out
    }
}

fn require(ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Validation(message.to_string()))
    }
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut section: Option<&'static str> = None;
    let mut seen = HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| CliError::parse(line, "unterminated section header"))?
                .trim();
            let known = SECTIONS.iter().copied().find(|s| *s == name);
            section = Some(known.ok_or_else(|| CliError::parse(line, format!("unknown section [{name}]")))?);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| CliError::parse(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let current = section.ok_or_else(|| CliError::parse(line, format!("key `{key}` outside any section")))?;
        let field = FIELDS
            .iter()
            .find(|f| f.section == current && f.key == key)
            .ok_or_else(|| CliError::parse(line, format!("unknown key `{key}` in [{current}]")))?;
        if !seen.insert((current, field.key)) {
            return Err(CliError::parse(line, format!("duplicate key `{key}` in [{current}]")));
        }
        (field.set)(&mut cfg, value).map_err(|m| CliError::parse(line, format!("`{key}`: {m}")))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

const SECTIONS: [&str; 4] = ["constants", "grid", "scenario", "output"];

type Setter = fn(&mut RunConfig, &str) -> std::result::Result<(), String>;
type Getter = fn(&RunConfig) -> Option<String>;

struct Field {
    section: &'static str,
    key: &'static str,
    set: Setter,
    get: Getter,
}

const fn field(section: &'static str, key: &'static str, set: Setter, get: Getter) -> Field {
    Field { section, key, set, get }
}

fn real(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("`{v}` is not a number"))
}

fn count(v: &str) -> std::result::Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("`{v}` is not a non-negative integer"))
}

fn flag(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("`{v}` is not true or false")),
    }
}

fn triple(v: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("`{v}` is not three comma-separated numbers"));
    }
    Ok([real(parts[0])?, real(parts[1])?, real(parts[2])?])
}

fn preset(v: &str) -> std::result::Result<Preset, String> {
    [Preset::Single, Preset::Mixture, Preset::Bump]
        .into_iter()
        .find(|p| p.name() == v)
        .ok_or_else(|| format!("`{v}` is not one of single, mixture, bump"))
}

fn closure(v: &str) -> std::result::Result<Closure, String> {
    match v {
        "analytic" => Ok(Closure::Analytic),
        "conservative" => Ok(Closure::Conservative),
        _ => Err(format!("`{v}` is not analytic or conservative")),
    }
}

fn closure_name(c: Closure) -> &'static str {
    match c {
        Closure::Analytic => "analytic",
        Closure::Conservative => "conservative",
    }
}

/// `{:?}` prints the shortest decimal that parses back to the same double.
fn show(x: f64) -> Option<String> {
    Some(format!("{x:?}"))
}

fn show_triple(v: [f64; 3]) -> Option<String> {
    Some(format!("{:?}, {:?}, {:?}", v[0], v[1], v[2]))
}

const FIELDS: &[Field] = &[
    field("constants", "c", |c, v| real(v).map(|x| c.constants.c = x), |c| show(c.constants.c)),
    field("constants", "m", |c, v| real(v).map(|x| c.constants.m = x), |c| show(c.constants.m)),
    field("constants", "k_B", |c, v| real(v).map(|x| c.constants.k_b = x), |c| show(c.constants.k_b)),
    field("constants", "tau", |c, v| real(v).map(|x| c.constants.tau = x), |c| show(c.constants.tau)),
    field("constants", "sigma", |c, v| real(v).map(|x| c.constants.sigma = x), |c| show(c.constants.sigma)),
    field("grid", "N_p", |c, v| count(v).map(|x| c.grid.n_p = x), |c| Some(c.grid.n_p.to_string())),
    field("grid", "p_max", |c, v| real(v).map(|x| c.grid.p_max = Some(x)), |c| c.grid.p_max.and_then(show)),
    field("grid", "N_I", |c, v| count(v).map(|x| c.grid.n_i = x), |c| Some(c.grid.n_i.to_string())),
    field("grid", "s_max", |c, v| real(v).map(|x| c.grid.s_max = Some(x)), |c| c.grid.s_max.and_then(show)),
    field("grid", "gamma_min", |c, v| real(v).map(|x| c.grid.gamma_min = x), |c| show(c.grid.gamma_min)),
    field("scenario", "gamma_start", |c, v| real(v).map(|x| c.scenario.gamma_start = x), |c| show(c.scenario.gamma_start)),
    field("scenario", "gamma_end", |c, v| real(v).map(|x| c.scenario.gamma_end = x), |c| show(c.scenario.gamma_end)),
    field("scenario", "points", |c, v| count(v).map(|x| c.scenario.points = x), |c| Some(c.scenario.points.to_string())),
    field("scenario", "preset", |c, v| preset(v).map(|x| c.scenario.preset = x), |c| Some(c.scenario.preset.name().into())),
    field("scenario", "n", |c, v| real(v).map(|x| c.scenario.n = x), |c| show(c.scenario.n)),
    field("scenario", "u", |c, v| triple(v).map(|x| c.scenario.u = x), |c| show_triple(c.scenario.u)),
    field("scenario", "gamma", |c, v| real(v).map(|x| c.scenario.gamma = x), |c| show(c.scenario.gamma)),
    field("scenario", "n2", |c, v| real(v).map(|x| c.scenario.n2 = x), |c| show(c.scenario.n2)),
    field("scenario", "u2", |c, v| triple(v).map(|x| c.scenario.u2 = x), |c| show_triple(c.scenario.u2)),
    field("scenario", "gamma2", |c, v| real(v).map(|x| c.scenario.gamma2 = x), |c| show(c.scenario.gamma2)),
    field("scenario", "bump_amplitude", |c, v| real(v).map(|x| c.scenario.bump_amplitude = x), |c| {
        show(c.scenario.bump_amplitude)
    }),
    field("scenario", "bump_center", |c, v| triple(v).map(|x| c.scenario.bump_center = x), |c| {
        show_triple(c.scenario.bump_center)
    }),
    field("scenario", "bump_width", |c, v| real(v).map(|x| c.scenario.bump_width = x), |c| show(c.scenario.bump_width)),
    field("scenario", "levels", |c, v| count(v).map(|x| c.scenario.levels = x), |c| Some(c.scenario.levels.to_string())),
    field("scenario", "dt", |c, v| real(v).map(|x| c.scenario.dt = x), |c| show(c.scenario.dt)),
    field("scenario", "nsteps", |c, v| count(v).map(|x| c.scenario.nsteps = x), |c| Some(c.scenario.nsteps.to_string())),
    field("scenario", "output_every", |c, v| count(v).map(|x| c.scenario.output_every = x), |c| {
        Some(c.scenario.output_every.to_string())
    }),
    field("scenario", "refreeze", |c, v| flag(v).map(|x| c.scenario.refreeze = x), |c| Some(c.scenario.refreeze.to_string())),
    field("scenario", "closure", |c, v| closure(v).map(|x| c.scenario.closure = x), |c| {
        Some(closure_name(c.scenario.closure).into())
    }),
    field("scenario", "length", |c, v| real(v).map(|x| c.scenario.length = x), |c| show(c.scenario.length)),
    field("scenario", "ncells", |c, v| count(v).map(|x| c.scenario.ncells = x), |c| Some(c.scenario.ncells.to_string())),
    field("scenario", "amplitude", |c, v| real(v).map(|x| c.scenario.amplitude = x), |c| show(c.scenario.amplitude)),
    field("output", "path", |c, v| {
        c.output.path = Some(v.to_string());
        Ok(())
    }, |c| c.output.path.clone()),
    field("output", "precision", |c, v| count(v).map(|x| c.output.precision = x), |c| Some(c.output.precision.to_string())),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_nondimensional_preset() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let k = cfg.constants().unwrap();
        assert_eq!((k.c(), k.m(), k.k_b(), k.tau()), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn sigma_below_minus_one_is_rejected() {
        let err = parse_config("[constants]\nsigma = -1.5\n").unwrap_err();
        assert!(matches!(err, CliError::Validation(ref m) if m == "sigma must exceed -1"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn duplicate_and_unknown_keys_report_their_line() {
        let err = parse_config("[grid]\nN_p = 16\n\nN_p = 24\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 4, .. }), "{err}");
        let err = parse_config("[grid]\nnp = 16\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }), "{err}");
        let err = parse_config("N_p = 16\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 1, .. }), "{err}");
        let err = parse_config("[mesh]\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn same_key_in_different_sections_is_not_a_duplicate() {
        // `gamma_min` lives only in [grid]; `gamma` only in [scenario].
        let cfg = parse_config("[grid]\ngamma_min = 2\n[scenario]\ngamma = 3 # cold\n").unwrap();
        assert_eq!(cfg.grid.gamma_min, 2.0);
        assert_eq!(cfg.scenario.gamma, 3.0);
    }

    #[test]
    fn malformed_values_are_parse_errors() {
        for text in ["[scenario]\nu = 1, 2\n", "[scenario]\nrefreeze = yes\n", "[grid]\nN_I = -3\n", "[constants]\nc 1\n"] {
            assert!(matches!(parse_config(text), Err(CliError::Parse { line: 2, .. })), "{text}");
        }
    }

    #[test]
    fn grid_invariants_are_validation_errors() {
        assert!(matches!(parse_config("[grid]\nN_p = 15\n"), Err(CliError::Validation(_))));
        assert!(matches!(parse_config("[grid]\np_max = 0\n"), Err(CliError::Validation(_))));
    }

    #[test]
    fn render_round_trips() {
        let mut cfg = RunConfig::default();
        assert_eq!(parse_config(&cfg.render()).unwrap(), cfg);
        cfg.constants = ConstantsBlock { c: 2.5, m: 0.3, k_b: 1.380649e-23, tau: f64::INFINITY, sigma: 0.1 + 0.2 };
        cfg.grid.p_max = Some(12.125);
        cfg.grid.s_max = Some(1.0 / 3.0);
        cfg.scenario.preset = Preset::Bump;
        cfg.scenario.u = [0.1, -2.0e-7, 3.0];
        cfg.scenario.closure = Closure::Analytic;
        cfg.scenario.refreeze = false;
        cfg.output.path = Some("out/run.csv".into());
        cfg.output.precision = 9;
        let text = cfg.render();
        assert_eq!(parse_config(&text).unwrap(), cfg, "{text}");
    }
}
