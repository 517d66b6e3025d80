//! Flat `key=value` experiment configs.
//!
//! Several pairs may share a line; `#` starts a comment. Values with
//! parentheses (`init=offcenter(1.2, 0.5)`) may contain spaces.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use hyperflow_core::curvfun::CurvatureFunction;
use hyperflow_core::flow::{FlowConfig, InitialData};
use rand::{Rng, SeedableRng};
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Relative slack on the `p ≤ p₀` test, so `p = p₀` typed in decimal passes.
pub const THRESHOLD_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: '{key}' given twice")]
    Duplicate { line: usize, key: String },
    #[error("missing required field '{0}'")]
    Missing(&'static str),
    #[error("line {line}: invalid {field}: {msg}")]
    Invalid { line: usize, field: &'static str, msg: String },
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("theorem mode requires 1 < p <= p0 = {p0} (a = {a}, n = {n}), got p = {p}")]
    Theorem { n: usize, a: f64, p: f64, p0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Theorem,
    Exploratory,
}

/// Initial data as written in the config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    OffCenter { radius: f64, offset: f64 },
    Perturbed { radius: f64, amplitude: f64, mode: u32 },
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::OffCenter { radius, offset } => write!(f, "offcenter({radius},{offset})"),
            InitSpec::Perturbed { radius, amplitude, mode } => {
                write!(f, "perturbed({radius},{amplitude},{mode})")
            }
        }
    }
}

impl Serialize for InitSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: f64,
    pub a: f64,
    #[serde(rename = "N")]
    pub nodes: usize,
    pub init: InitSpec,
    #[serde(rename = "T_end")]
    pub t_end: f64,
    pub cfl: f64,
    pub dt_out: f64,
    pub fit_window: [f64; 2],
    pub mode: Mode,
    pub seed: u64,
    pub output: PathBuf,
    pub sweep_p: Vec<f64>,
    pub sweep_a: Vec<f64>,
    /// Write a snapshot every this many outputs; 0 disables checkpoints.
    pub checkpoint_every: usize,
    pub workers: Option<usize>,
}

const KEYS: [&str; 16] = [
    "n",
    "p",
    "a",
    "N",
    "init",
    "T_end",
    "cfl",
    "dt_out",
    "fit_window",
    "mode",
    "seed",
    "output",
    "sweep_p",
    "sweep_a",
    "checkpoint_every",
    "workers",
];

/// Splits a line into `key=value` tokens, ignoring whitespace inside
/// parentheses and around `=` and `,`.
fn tokens(line: &str, lineno: usize) -> Result<Vec<String>, ConfigError> {
    let mut raw = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for c in line.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(ConfigError::Syntax { line: lineno, msg: "unbalanced ')'".into() });
        }
        if c.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                raw.push(std::mem::take(&mut cur));
            }
        } else if !c.is_whitespace() {
            cur.push(c);
        }
    }
    if depth != 0 {
        return Err(ConfigError::Syntax { line: lineno, msg: "unbalanced '('".into() });
    }
    if !cur.is_empty() {
        raw.push(cur);
    }
    let mut out: Vec<String> = Vec::new();
    for tok in raw {
        let joins = out.last().is_some_and(|prev| {
            prev.ends_with('=') || prev.ends_with(',') || tok.starts_with('=') || tok.starts_with(',')
        });
        if joins {
            out.last_mut().unwrap().push_str(&tok);
        } else {
            out.push(tok);
        }
    }
    Ok(out)
}

fn real(v: &str, line: usize, field: &'static str) -> Result<f64, ConfigError> {
    let x: f64 = v
        .parse()
        .map_err(|_| ConfigError::Invalid { line, field, msg: format!("'{v}' is not a number") })?;
    if !x.is_finite() {
        return Err(ConfigError::Invalid { line, field, msg: format!("'{v}' is not finite") });
    }
    Ok(x)
}

fn integer<T: std::str::FromStr>(v: &str, line: usize, field: &'static str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError::Invalid { line, field, msg: format!("'{v}' is not a non-negative integer") })
}

fn call<'a>(v: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let inner = v.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').collect())
}

fn real_list(v: &str, line: usize, field: &'static str) -> Result<Vec<f64>, ConfigError> {
    let v = v.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(v);
    v.split(',').filter(|s| !s.is_empty()).map(|s| real(s, line, field)).collect()
}

fn init_spec(v: &str, line: usize) -> Result<InitSpec, ConfigError> {
    let bad = |msg: String| ConfigError::Invalid { line, field: "init", msg };
    if let Some(args) = call(v, "offcenter") {
        if args.len() != 2 {
            return Err(bad(format!("offcenter takes (R, d), got '{v}'")));
        }
        return Ok(InitSpec::OffCenter {
            radius: real(args[0], line, "init")?,
            offset: real(args[1], line, "init")?,
        });
    }
    if let Some(args) = call(v, "perturbed") {
        if args.len() != 3 {
            return Err(bad(format!("perturbed takes (r0, amplitude, mode), got '{v}'")));
        }
        return Ok(InitSpec::Perturbed {
            radius: real(args[0], line, "init")?,
            amplitude: real(args[1], line, "init")?,
            mode: integer(args[2], line, "init")?,
        });
    }
    Err(bad(format!("expected offcenter(R,d) or perturbed(r0,amp,mode), got '{v}'")))
}

/// Parses and validates a config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: BTreeMap<&'static str, (usize, String)> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.split('#').next().unwrap_or("");
        for tok in tokens(line, lineno)? {
            let (key, value) = tok.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: lineno,
                msg: format!("expected key=value, got '{tok}'"),
            })?;
            let key = KEYS.iter().find(|k| **k == key).ok_or_else(|| ConfigError::UnknownKey {
                line: lineno,
                key: key.to_string(),
            })?;
            if value.is_empty() {
                return Err(ConfigError::Syntax { line: lineno, msg: format!("'{key}' has no value") });
            }
            if entries.insert(key, (lineno, value.to_string())).is_some() {
                return Err(ConfigError::Duplicate { line: lineno, key: key.to_string() });
            }
        }
    }
    let get = |k: &str| entries.get(k).map(|(l, v)| (*l, v.as_str()));

    let (ln, v) = get("n").ok_or(ConfigError::Missing("n"))?;
    let n: usize = integer(v, ln, "n")?;
    let (lp, v) = get("p").ok_or(ConfigError::Missing("p"))?;
    let p = real(v, lp, "p")?;
    if !(p > 0.0) {
        return Err(ConfigError::Invalid { line: lp, field: "p", msg: format!("{p} must be positive") });
    }
    let (la, a) = match get("a") {
        Some((l, v)) => (l, real(v, l, "a")?),
        None => (0, 1.0 / n.max(1) as f64),
    };
    CurvatureFunction::new(n, a)
        .map_err(|e| ConfigError::Invalid { line: la.max(ln), field: "a", msg: e.to_string() })?;

    let mode = match get("mode") {
        None => Mode::Theorem,
        Some((_, "theorem")) => Mode::Theorem,
        Some((_, "exploratory")) => Mode::Exploratory,
        Some((l, v)) => {
            return Err(ConfigError::Invalid {
                line: l,
                field: "mode",
                msg: format!("'{v}' is neither theorem nor exploratory"),
            })
        }
    };
    let sweep_p = match get("sweep_p") {
        Some((l, v)) => real_list(v, l, "sweep_p")?,
        None => Vec::new(),
    };
    let sweep_a = match get("sweep_a") {
        Some((l, v)) => real_list(v, l, "sweep_a")?,
        None => Vec::new(),
    };
    if mode == Mode::Theorem {
        let ps = if sweep_p.is_empty() { vec![p] } else { sweep_p.clone() };
        let as_ = if sweep_a.is_empty() { vec![a] } else { sweep_a.clone() };
        for &a in &as_ {
            for &p in &ps {
                check_theorem(n, a, p)?;
            }
        }
    }

    let (li, v) = get("init").ok_or(ConfigError::Missing("init"))?;
    let init = init_spec(v, li)?;
    let nodes = match get("N") {
        Some((l, v)) => integer(v, l, "N")?,
        None => 256,
    };
    let t_end = match get("T_end") {
        Some((l, v)) => real(v, l, "T_end")?,
        None => 10.0 * (n as f64).powf(p),
    };
    let cfl = match get("cfl") {
        Some((l, v)) => real(v, l, "cfl")?,
        None => 0.25,
    };
    let dt_out = match get("dt_out") {
        Some((l, v)) => real(v, l, "dt_out")?,
        None => 1.0,
    };
    let fit_window = match get("fit_window") {
        Some((l, v)) => {
            let w = real_list(v, l, "fit_window")?;
            if w.len() != 2 || !(w[0] < w[1]) {
                return Err(ConfigError::Invalid {
                    line: l,
                    field: "fit_window",
                    msg: format!("expected (t1,t2) with t1 < t2, got '{v}'"),
                });
            }
            [w[0], w[1]]
        }
        None => [0.5 * t_end, t_end],
    };
    let seed = match get("seed") {
        Some((l, v)) => integer(v, l, "seed")?,
        None => 0,
    };
    let output = get("output").map(|(_, v)| PathBuf::from(v)).unwrap_or_else(|| PathBuf::from("out"));
    let checkpoint_every = match get("checkpoint_every") {
        Some((l, v)) => integer(v, l, "checkpoint_every")?,
        None => 0,
    };
    let workers = match get("workers") {
        Some((l, v)) => {
            let w: usize = integer(v, l, "workers")?;
            if w == 0 {
                return Err(ConfigError::Invalid { line: l, field: "workers", msg: "must be at least 1".into() });
            }
            Some(w)
        }
        None => None,
    };

    let cfg = ExperimentConfig {
        n,
        p,
        a,
        nodes,
        init,
        t_end,
        cfl,
        dt_out,
        fit_window,
        mode,
        seed,
        output,
        sweep_p,
        sweep_a,
        checkpoint_every,
        workers,
    };
    for (pp, aa) in cfg.grid() {
        let checked = cfg.flow_config(pp, aa).and_then(|f| {
            f.validate()?;
            match cfg.mode {
                Mode::Theorem => f.initial_state().map(|_| ()),
                Mode::Exploratory => f.initial.field(f.mesh()?).map(|_| ()),
            }
        });
        checked.map_err(|e| ConfigError::Validation(format!("p = {pp}, a = {aa}: {e}")))?;
    }
    Ok(cfg)
}

fn check_theorem(n: usize, a: f64, p: f64) -> Result<(), ConfigError> {
    let p0 = CurvatureFunction::new(n, a)
        .map_err(|e| ConfigError::Validation(format!("a = {a}: {e}")))?
        .exact_structure_constants()
        .p0;
    if p > 1.0 && p <= p0 * (1.0 + THRESHOLD_SLACK) {
        Ok(())
    } else {
        Err(ConfigError::Theorem { n, a, p, p0 })
    }
}

impl ExperimentConfig {
    /// `(p, a)` grid points; a single point when no sweep axis is set.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let ps = if self.sweep_p.is_empty() { vec![self.p] } else { self.sweep_p.clone() };
        let as_ = if self.sweep_a.is_empty() { vec![self.a] } else { self.sweep_a.clone() };
        as_.iter().flat_map(|&a| ps.iter().map(move |&p| (p, a))).collect()
    }

    /// Initial data with the perturbation sign drawn from `seed`. A cosine
    /// mode stays even about both poles only for phases 0 and π, so the
    /// sign is the only phase freedom.
    pub fn initial_data(&self) -> InitialData {
        match self.init {
            InitSpec::OffCenter { radius, offset } => InitialData::OffCenter { radius, offset },
            InitSpec::Perturbed { radius, amplitude, mode } => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                InitialData::Perturbed { radius, amplitude: sign * amplitude, mode }
            }
        }
    }

    pub fn flow_config(&self, p: f64, a: f64) -> hyperflow_core::Result<FlowConfig> {
        Ok(FlowConfig {
            curvature: CurvatureFunction::new(self.n, a)?,
            p,
            nodes: self.nodes,
            initial: self.initial_data(),
            t_end: self.t_end,
            cfl: self.cfl,
            dt_out: self.dt_out,
            fit_window: Some(self.fit_window),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line_theorem_config() {
        let c = parse_config("n=2 p=1.5 a=0.5 init=offcenter(1.2,0.5)").unwrap();
        assert_eq!(c.mode, Mode::Theorem);
        assert_eq!(c.init, InitSpec::OffCenter { radius: 1.2, offset: 0.5 });
        assert_eq!(c.nodes, 256);
        assert!((c.t_end - 10.0 * 2f64.powf(1.5)).abs() < 1e-12);
        assert_eq!(c.fit_window, [0.5 * c.t_end, c.t_end]);
    }

    #[test]
    fn threshold_violation_reports_p0() {
        let e = parse_config("n=2 p=2.5 a=0.5").unwrap_err();
        assert!(matches!(e, ConfigError::Theorem { p0, .. } if p0 == 2.0));
        assert!(e.to_string().contains("p0 = 2"));
    }

    #[test]
    fn boundary_exponent_is_admitted() {
        assert!(parse_config("n=2 p=2 a=0.5 init=offcenter(1.2,0.5)").is_ok());
        assert!(parse_config("n=3 p=1.5 init=offcenter(1.2,0.5)").is_ok());
        assert!(parse_config("n=2 p=1 init=offcenter(1.2,0.5)").is_err());
    }

    #[test]
    fn exploratory_allows_any_positive_p() {
        assert!(parse_config("n=2 p=0.5 mode=exploratory init=offcenter(1.2,0.5)").is_ok());
        assert!(parse_config("n=2 p=3 mode=exploratory init=offcenter(1.2,0.5)").is_ok());
    }

    #[test]
    fn missing_field_is_named() {
        assert_eq!(parse_config("p=1.5 init=offcenter(1.2,0.5)").unwrap_err(), ConfigError::Missing("n"));
        assert_eq!(parse_config("n=2 p=1.5").unwrap_err(), ConfigError::Missing("init"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "# acceptance\nn = 2\np = 1.5\ninit = offcenter(1.2, 0.5)\nbogus = 1\n";
        assert_eq!(
            parse_config(text).unwrap_err(),
            ConfigError::UnknownKey { line: 5, key: "bogus".into() }
        );
        let text = "n=2 p=1.5\ninit=offcenter(1.2,0.5)\nN=abc";
        assert!(matches!(parse_config(text), Err(ConfigError::Invalid { line: 3, field: "N", .. })));
        assert!(matches!(
            parse_config("n=2\nn=3"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(parse_config("n=2 p"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(parse_config("init=offcenter(1.2"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn spaced_values_and_lists() {
        let c = parse_config(
            "n = 2  p = 1.5 init = perturbed(1.5, 0.1, 2)  # comment\nsweep_p = 1.2, 1.5, 1.8, 2.0\nfit_window=(5,10)",
        )
        .unwrap();
        assert_eq!(c.sweep_p, vec![1.2, 1.5, 1.8, 2.0]);
        assert_eq!(c.fit_window, [5.0, 10.0]);
        assert_eq!(c.grid().len(), 4);
        assert_eq!(c.init, InitSpec::Perturbed { radius: 1.5, amplitude: 0.1, mode: 2 });
    }

    #[test]
    fn sweep_points_are_checked_in_theorem_mode() {
        let e = parse_config("n=2 p=1.5 init=offcenter(1.2,0.5) sweep_p=1.5,2.5").unwrap_err();
        assert!(matches!(e, ConfigError::Theorem { p, .. } if p == 2.5));
    }

    #[test]
    fn seed_fixes_perturbation_sign() {
        let base = "n=2 p=1.5 init=perturbed(1.5,0.1,2) seed=";
        let amp = |seed: u64| match parse_config(&format!("{base}{seed}")).unwrap().initial_data() {
            InitialData::Perturbed { amplitude, .. } => amplitude,
            _ => unreachable!(),
        };
        assert_eq!(amp(3), amp(3));
        let signs: std::collections::BTreeSet<bool> = (0..16).map(|s| amp(s) > 0.0).collect();
        assert_eq!(signs.len(), 2);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(parse_config("n=2 p=1.5 init=offcenter(1.2,1.5)").is_err());
        assert!(parse_config("n=2 p=1.5 init=offcenter(1.2,0.5) N=8").is_err());
        assert!(parse_config("n=2 p=1.5 init=offcenter(1.2,0.5) cfl=0").is_err());
        assert!(parse_config("n=2 p=1.5 init=sphere(1)").is_err());
        assert!(parse_config("n=2 p=1.5 a=0.7 init=offcenter(1.2,0.5)").is_err());
        assert!(parse_config("n=2 p=1.5 init=offcenter(1.2,0.5) mode=fast").is_err());
        assert!(parse_config("n=2 p=1.5 init=offcenter(1.2,0.5) workers=0").is_err());
    }

    #[test]
    fn summary_echo_contains_every_key() {
        let c = parse_config("n=2 p=1.5 init=offcenter(1.2,0.5)").unwrap();
        let json = serde_json::to_value(&c).unwrap();
        for k in KEYS {
            assert!(json.get(k).is_some(), "{k} missing");
        }
        assert_eq!(json["init"], "offcenter(1.2,0.5)");
    }
}
