//! Flat `section.key = value` run configuration.
//!
//! Every key has a default (the invading-front setup); a file only lists
//! the keys it overrides. Numbers may be written as decimals or as ratios
//! such as `10/9`. Lists are comma separated.

use crate::error::{Error, Result};
use crate::experiments::{InitialDataSpec, SweepConfig};
use crate::grid::{Boundary, Grid1D, SolverConfig};
use crate::model::{ScaledModel, Variant, WolbachiaParams};

struct Key {
    name: &'static str,
    default: &'static str,
    /// Our choice rather than a value fixed by the modelled experiment.
    choice: bool,
}

const fn key(name: &'static str, default: &'static str, choice: bool) -> Key {
    Key { name, default, choice }
}

const KEYS: &[Key] = &[
    key("model.fu", "1.12", false),
    key("model.du", "0.27", false),
    key("model.delta", "10/9", false),
    key("model.sf", "0.1", false),
    key("model.sh", "0.8", false),
    key("model.sigma", "1", false),
    key("model.mu", "0", false),
    key("model.variant", "perfect", true),
    key("model.epsilon", "0.1", true),
    key("grid.xmin", "-15", false),
    key("grid.xmax", "15", false),
    key("grid.dx", "0.05", false),
    key("grid.boundary", "neumann", true),
    key("time.dt", "0.005", false),
    key("time.t_end", "125", false),
    key("time.output_every", "5000", false),
    key("time.clip_negatives", "true", true),
    key("diffusion.a", "0.1", false),
    key("diffusion.table", "", true),
    key("init.amplitude", "0.8", true),
    key("init.radius", "0.55", true),
    key("init.smoothing", "0.5", true),
    key("experiment.epsilons", "0.3, 0.1, 0.05, 0.02", true),
    key("experiment.speed_level", "0.5", true),
    key("experiment.speed_window", "75, 125", false),
    key("experiment.norm_horizon", "25", false),
    key("experiment.norm_every", "1", true),
    key("experiment.speed_every", "100", true),
];

/// A fully validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: WolbachiaParams,
    pub variant: Variant,
    pub epsilon: f64,
    pub solver: SolverConfig,
    pub init: InitialDataSpec,
    pub sweep: SweepConfig,
    /// Value text and source line (0 for defaults) of every key, in
    /// declaration order.
    entries: Vec<(String, usize)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn model(&self) -> Result<ScaledModel> {
        ScaledModel::new(self.params, self.epsilon, self.variant)
    }

    pub fn model_at(&self, epsilon: f64) -> Result<ScaledModel> {
        ScaledModel::new(self.params, epsilon, self.variant)
    }

    /// All keys with their effective values; defaults that are our choices
    /// carry a `# choice` comment.
    pub fn show(&self) -> String {
        let width = KEYS.iter().map(|k| k.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        let mut section = "";
        for (k, (value, _)) in KEYS.iter().zip(&self.entries) {
            let sec = k.name.split('.').next().unwrap_or("");
            if sec != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                section = sec;
            }
            let line = format!("{:<width$} = {value}", k.name);
            if k.choice {
                out.push_str(&format!("{line:<48}  # choice\n"));
            } else {
                out.push_str(&line);
                out.push('\n');
            }
        }
        out
    }

    fn line_of(&self, name: &str) -> usize {
        KEYS.iter().position(|k| k.name == name).map_or(0, |i| self.entries[i].1)
    }
}

/// The default configuration as text.
pub fn show_config() -> String {
    RunConfig::default().show()
}

fn config_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

pub(crate) fn parse_number(text: &str) -> std::result::Result<f64, String> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad numerator in `{text}`"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad denominator in `{text}`"))?;
            if b == 0.0 {
                return Err(format!("zero denominator in `{text}`"));
            }
            a / b
        }
        None => text.parse().map_err(|_| format!("`{text}` is not a number"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{text}` is not finite"))
    }
}

struct Reader {
    values: Vec<(String, usize)>,
}

impl Reader {
    fn index(name: &str) -> usize {
        KEYS.iter().position(|k| k.name == name).expect("known key")
    }

    fn raw(&self, name: &str) -> (&str, usize) {
        let (v, l) = &self.values[Self::index(name)];
        (v.trim(), *l)
    }

    fn num(&self, name: &str) -> Result<f64> {
        let (v, line) = self.raw(name);
        parse_number(v).map_err(|m| config_error(line, name, m))
    }

    fn count(&self, name: &str) -> Result<usize> {
        let (v, line) = self.raw(name);
        v.parse()
            .map_err(|_| config_error(line, name, format!("`{v}` is not a non-negative integer")))
    }

    fn flag(&self, name: &str) -> Result<bool> {
        let (v, line) = self.raw(name);
        match v {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(config_error(line, name, format!("`{v}` is not true or false"))),
        }
    }

    fn list(&self, name: &str) -> Result<Vec<f64>> {
        let (v, line) = self.raw(name);
        v.split(',')
            .map(|s| parse_number(s).map_err(|m| config_error(line, name, m)))
            .collect()
    }
}

/// Piecewise-linear diffusivity through `x:a` nodes, constant beyond the
/// first and last node.
fn tabulated(table: &[(f64, f64)], x: f64) -> f64 {
    let first = table[0];
    let last = table[table.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = table.windows(2).position(|w| x <= w[1].0).expect("inside table");
    let ((x0, a0), (x1, a1)) = (table[k], table[k + 1]);
    a0 + (a1 - a0) * (x - x0) / (x1 - x0)
}

fn parse_table(text: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    let table = text
        .split(',')
        .map(|node| {
            let (x, a) = node.split_once(':').ok_or_else(|| format!("node `{}` is not x:a", node.trim()))?;
            Ok((parse_number(x)?, parse_number(a)?))
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    if table.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err("table nodes must have increasing x".into());
    }
    Ok(table)
}

/// Parses and validates a configuration; omitted keys take their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut values: Vec<(String, usize)> = KEYS.iter().map(|k| (k.default.to_string(), 0)).collect();
    let mut seen = vec![false; KEYS.len()];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| config_error(line, content, "expected `section.key = value`"))?;
        let k = k.trim();
        let idx = KEYS
            .iter()
            .position(|key| key.name == k)
            .ok_or_else(|| config_error(line, k, "unknown key"))?;
        if seen[idx] {
            return Err(config_error(line, k, format!("duplicate key (first set on line {})", values[idx].1)));
        }
        seen[idx] = true;
        values[idx] = (v.trim().to_string(), line);
    }
    let r = Reader { values };

    let params = WolbachiaParams {
        fu: r.num("model.fu")?,
        du: r.num("model.du")?,
        delta: r.num("model.delta")?,
        sf: r.num("model.sf")?,
        sh: r.num("model.sh")?,
        sigma: r.num("model.sigma")?,
        mu: r.num("model.mu")?,
    };
    let variant = match r.raw("model.variant") {
        ("perfect", _) => Variant::PerfectTransmission,
        ("imperfect", _) => Variant::ImperfectTransmission,
        ("alt", _) => Variant::AlternativeScaling,
        (other, line) => {
            return Err(config_error(
                line,
                "model.variant",
                format!("`{other}` is not one of perfect, imperfect, alt"),
            ))
        }
    };
    let epsilon = r.num("model.epsilon")?;
    let grid = Grid1D::with_spacing(r.num("grid.xmin")?, r.num("grid.xmax")?, r.num("grid.dx")?);
    let boundary = match r.raw("grid.boundary") {
        ("neumann", _) => Boundary::Neumann,
        ("dirichlet", _) => Boundary::Dirichlet,
        (other, line) => {
            return Err(config_error(
                line,
                "grid.boundary",
                format!("`{other}` is not neumann or dirichlet"),
            ))
        }
    };
    let grid = grid.map_err(|e| config_error(r.raw("grid.dx").1, "grid.dx", e.to_string()))?;

    let (table_text, table_line) = r.raw("diffusion.table");
    let diffusivity: Vec<f64> = if table_text.is_empty() {
        let a = r.num("diffusion.a")?;
        vec![a; grid.nx()]
    } else {
        let table = parse_table(table_text).map_err(|m| config_error(table_line, "diffusion.table", m))?;
        grid.points().map(|x| tabulated(&table, x)).collect()
    };

    let solver = SolverConfig {
        grid,
        dt: r.num("time.dt")?,
        t_end: r.num("time.t_end")?,
        diffusivity,
        output_every: r.count("time.output_every")?,
        clip_negatives: r.flag("time.clip_negatives")?,
        boundary,
    };
    let init = InitialDataSpec::plateau(r.num("init.amplitude")?, r.num("init.radius")?, r.num("init.smoothing")?);
    let window = r.list("experiment.speed_window")?;
    if window.len() != 2 {
        let line = r.raw("experiment.speed_window").1;
        return Err(config_error(line, "experiment.speed_window", "expected `start, end`"));
    }
    let sweep = SweepConfig {
        epsilons: r.list("experiment.epsilons")?,
        norm_horizon: r.num("experiment.norm_horizon")?,
        norm_every: r.count("experiment.norm_every")?,
        speed_level: r.num("experiment.speed_level")?,
        speed_window: (window[0], window[1]),
        speed_every: r.count("experiment.speed_every")?,
        threads: 0,
    };

    let config = RunConfig {
        params,
        variant,
        epsilon,
        solver,
        init,
        sweep,
        entries: r.values,
    };
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        let locate = |e: Error, section: &str| match e {
            Error::InvalidParameter { name, reason } => {
                let mut key = format!("{section}.{name}");
                if !KEYS.iter().any(|k| k.name == key) {
                    key = KEYS
                        .iter()
                        .find(|k| k.name.ends_with(&format!(".{name}")))
                        .map_or(key, |k| k.name.to_string());
                }
                config_error(self.line_of(&key), &key, reason)
            }
            other => config_error(0, section, other.to_string()),
        };
        if self.params.mu != 0.0 && self.variant != Variant::ImperfectTransmission {
            return Err(config_error(
                self.line_of("model.mu"),
                "model.mu",
                "mu > 0 requires model.variant = imperfect",
            ));
        }
        self.model().map_err(|e| locate(e, "model"))?;
        self.solver.validate().map_err(|e| locate(e, "time"))?;
        self.init.validate(&self.solver.grid).map_err(|e| locate(e, "init"))?;
        self.sweep.validate(&self.solver).map_err(|e| locate(e, "experiment"))?;
        for &eps in &self.sweep.epsilons {
            self.model_at(eps).map_err(|e| locate(e, "experiment"))?;
        }
        Ok(())
    }
}
