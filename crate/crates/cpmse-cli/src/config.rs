//! Flat key-value run configuration.
//!
//! The file is the single source of truth for a run (environment variables
//! override nothing). Sections `[media]`, `[geometry]`, `[sweep]`,
//! `[integration]`, `[output]`; `#` or `;` start a comment. Unknown keys are
//! configuration errors so typos cannot silently fall back to defaults.

use cpmse::quadrature::Compactification;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub epsilon0: f64,
    pub mu0: f64,
    pub epsilon1: f64,
    pub mu1: f64,
    /// Permittivity list for plate sweeps.
    pub epsilon1_list: Vec<f64>,
    pub theta: f64,
    pub r_over_d: f64,
    pub distance: f64,
    pub phi: Vec<f64>,
    pub max_order: usize,
    pub tolerance_scale: f64,
    pub order_tolerances: Vec<f64>,
    pub max_evals: u64,
    pub seed: u64,
    pub t_max: f64,
    pub z_max: f64,
    pub compactification: Compactification,
    pub threads: usize,
    pub policy_threshold: f64,
    pub output: Option<String>,
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            epsilon0: 1.0,
            mu0: 1.0,
            epsilon1: 10.0,
            mu1: 1.0,
            epsilon1_list: vec![3.0, 10.0, 100.0],
            theta: 0.75,
            r_over_d: 0.1,
            distance: 1.0,
            phi: vec![0.0, 0.2, 0.4],
            max_order: 2,
            tolerance_scale: 1.0,
            order_tolerances: vec![0.004, 0.015, 0.04],
            max_evals: 1 << 26,
            seed: 42,
            t_max: 12.0,
            z_max: 12.0,
            compactification: Compactification::Rational,
            threads: 1,
            policy_threshold: 50.0,
            output: None,
            strict: false,
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw
            .split(['#', ';'])
            .next()
            .unwrap_or("")
            .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_lowercase();
            match section.as_str() {
                "media" | "geometry" | "sweep" | "integration" | "output" => {}
                other => return Err(format!("line {}: unknown section [{other}]", lineno + 1)),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let key = key.trim().to_lowercase();
        let value = value.trim();
        let fail = |what: &str| format!("line {}: bad {what}: {value}", lineno + 1);
        match (section.as_str(), key.as_str()) {
            ("media", "epsilon0") => cfg.epsilon0 = value.parse().map_err(|_| fail("float"))?,
            ("media", "mu0") => cfg.mu0 = value.parse().map_err(|_| fail("float"))?,
            ("media", "epsilon1") => cfg.epsilon1 = value.parse().map_err(|_| fail("float"))?,
            ("media", "mu1") => cfg.mu1 = value.parse().map_err(|_| fail("float"))?,
            ("geometry", "theta") => cfg.theta = value.parse().map_err(|_| fail("float"))?,
            ("geometry", "r_over_d") => {
                cfg.r_over_d = value.parse().map_err(|_| fail("float"))?
            }
            ("geometry", "d") => cfg.distance = value.parse().map_err(|_| fail("float"))?,
            ("sweep", "phi") => cfg.phi = parse_list(value).map_err(|_| fail("float list"))?,
            ("sweep", "phi_range") => {
                // min, max, count
                let parts = parse_list(value).map_err(|_| fail("range"))?;
                if parts.len() != 3 || parts[2] < 2.0 {
                    return Err(fail("range (need min, max, count>=2)"));
                }
                let n = parts[2] as usize;
                cfg.phi = (0..n)
                    .map(|i| parts[0] + (parts[1] - parts[0]) * i as f64 / (n - 1) as f64)
                    .collect();
            }
            ("sweep", "epsilon1_list") => {
                cfg.epsilon1_list = parse_list(value).map_err(|_| fail("float list"))?
            }
            ("integration", "max_order") => {
                cfg.max_order = value.parse().map_err(|_| fail("integer"))?
            }
            ("integration", "tolerance_scale") => {
                cfg.tolerance_scale = value.parse().map_err(|_| fail("float"))?
            }
            ("integration", "order_tolerances") => {
                cfg.order_tolerances = parse_list(value).map_err(|_| fail("float list"))?
            }
            ("integration", "max_evals") => {
                cfg.max_evals = value.parse().map_err(|_| fail("integer"))?
            }
            ("integration", "seed") => cfg.seed = value.parse().map_err(|_| fail("integer"))?,
            ("integration", "t_max") => cfg.t_max = value.parse().map_err(|_| fail("float"))?,
            ("integration", "z_max") => cfg.z_max = value.parse().map_err(|_| fail("float"))?,
            ("integration", "policy_threshold") => {
                cfg.policy_threshold = value.parse().map_err(|_| fail("float"))?
            }
            ("integration", "compactification") => {
                cfg.compactification = match value.to_lowercase().as_str() {
                    "rational" => Compactification::Rational,
                    "exponential" => Compactification::Exponential,
                    _ => return Err(fail("compactification (rational|exponential)")),
                }
            }
            ("integration", "threads") => {
                cfg.threads = value.parse().map_err(|_| fail("integer"))?
            }
            ("output", "path") => cfg.output = Some(value.to_string()),
            ("output", "strict") => {
                cfg.strict = value.parse().map_err(|_| fail("bool (true|false)"))?
            }
            (sec, k) => {
                return Err(format!(
                    "line {}: unknown key `{k}` in section [{sec}]",
                    lineno + 1
                ))
            }
        }
    }
    Ok(cfg)
}

fn parse_list(value: &str) -> Result<Vec<f64>, ()> {
    let items: Result<Vec<f64>, _> = value
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(()),
    }
}

/// Stable textual echo of the configuration for the CSV header comment.
pub fn echo_lines(cfg: &RunConfig) -> Vec<String> {
    vec![
        format!(
            "# media: epsilon0={} mu0={} epsilon1={} mu1={} epsilon1_list={:?}",
            cfg.epsilon0, cfg.mu0, cfg.epsilon1, cfg.mu1, cfg.epsilon1_list
        ),
        format!(
            "# geometry: theta={} r_over_d={} d={}",
            cfg.theta, cfg.r_over_d, cfg.distance
        ),
        format!("# sweep: phi={:?}", cfg.phi),
        format!(
            "# integration: max_order={} tolerance_scale={} order_tolerances={:?} max_evals={} seed={} t_max={} z_max={} compactification={:?} threads={} policy_threshold={}",
            cfg.max_order,
            cfg.tolerance_scale,
            cfg.order_tolerances,
            cfg.max_evals,
            cfg.seed,
            cfg.t_max,
            cfg.z_max,
            cfg.compactification,
            cfg.threads,
            cfg.policy_threshold
        ),
        format!("# output: strict={}", cfg.strict),
    ]
}
