//! Run configuration: a line-oriented `key = value` format under
//! `[section]` headers, with all frequencies quoted in MHz and converted to
//! angular rad/ns on ingestion.
//!
//! ```text
//! [system]
//! tls = 200 10          # epsilon_mhz delta_mhz, one line per TLS
//! tls = 400 60
//! slope = 400           # MHz of detuning per amplitude unit
//!
//! [grid]
//! width_ns = 1 100
//! width_samples = 200
//! amplitude = 0.25 3    # default spans 0.5 eps_1 .. 3 eps_N in detuning
//! amplitude_samples = 200
//!
//! [engine]
//! kind = analytic       # analytic | numeric | both
//! stokes = on           # on | off
//! dt_scale = 0.02
//! min_substeps = 2000
//! workers = 0           # 0 = one per hardware thread
//!
//! [spectral]
//! window = none         # none | hann
//! ridge_threshold = 0.2
//! reference_width_ns = 50.5   # default: grid midpoint
//! input = pattern.csv   # source for the ft subcommand
//!
//! [darkstate]
//! coupling = 40 25      # Omega1_mhz Omega2_mhz
//! detuning_mhz = -100 100
//! detuning_samples = 100
//!
//! [lzcheck]
//! adiabaticity = 0.01 0.05 0.1 0.3 0.5 1 2
//! ```
//!
//! Lines starting with `#` or `;` are comments; values carry no trailing
//! comments. Unknown sections or keys are errors, so typos cannot silently
//! fall back to defaults.

use lzs_core::{model, DtPolicy, Stokes, SystemSpec, Tls, Window};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineKind {
    #[default]
    Analytic,
    Numeric,
    Both,
}

impl EngineKind {
    pub fn runs_analytic(self) -> bool {
        self != EngineKind::Numeric
    }
    pub fn runs_numeric(self) -> bool {
        self != EngineKind::Analytic
    }
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Analytic => "analytic",
            EngineKind::Numeric => "numeric",
            EngineKind::Both => "both",
        }
    }
}

/// The level ladder as quoted (MHz) plus its converted form.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemBlock {
    pub tls_mhz: Vec<(f64, f64)>,
    pub slope_mhz: f64,
    pub spec: SystemSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkBlock {
    pub coupling_mhz: (f64, f64),
    pub detuning_mhz: (f64, f64),
    pub detuning_samples: usize,
}

/// Fully validated configuration with defaults applied. Optional blocks
/// stay `None` until a subcommand that needs them asks, so a darkstate run
/// does not require a [system] section and vice versa.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: Option<SystemBlock>,
    pub width_ns: (f64, f64),
    pub width_samples: usize,
    pub amplitude: Option<(f64, f64)>,
    pub amplitude_samples: usize,
    pub engine: EngineKind,
    pub stokes: Stokes,
    pub policy: DtPolicy,
    pub workers: usize,
    pub window: Window,
    pub ridge_threshold: f64,
    pub reference_width_ns: f64,
    pub ft_input: Option<String>,
    pub dark: Option<DarkBlock>,
    pub adiabaticity: Vec<f64>,
}

fn fail(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("line {line}: {msg}"))
}

fn num(line: usize, key: &str, raw: &str) -> Result<f64, CliError> {
    let v: f64 = raw
        .parse()
        .map_err(|_| fail(line, format!("{key}: '{raw}' is not a number")))?;
    if !v.is_finite() {
        return Err(fail(line, format!("{key}: {raw} is not finite")));
    }
    Ok(v)
}

fn count(line: usize, key: &str, raw: &str) -> Result<usize, CliError> {
    raw.parse()
        .map_err(|_| fail(line, format!("{key}: '{raw}' is not a non-negative integer")))
}

fn pair(line: usize, key: &str, raw: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = raw.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(fail(line, format!("{key}: expected two numbers, got '{raw}'")));
    }
    Ok((num(line, key, parts[0])?, num(line, key, parts[1])?))
}

fn range(line: usize, key: &str, raw: &str, positive: bool) -> Result<(f64, f64), CliError> {
    let (lo, hi) = pair(line, key, raw)?;
    if positive && lo <= 0.0 {
        return Err(fail(line, format!("{key}: range must be positive, got {lo}")));
    }
    if lo >= hi {
        return Err(fail(line, format!("{key}: range must be ordered, got {lo} >= {hi}")));
    }
    Ok((lo, hi))
}

fn samples(line: usize, key: &str, raw: &str) -> Result<usize, CliError> {
    let n = count(line, key, raw)?;
    if n < 2 {
        return Err(fail(line, format!("{key}: need at least 2 samples, got {n}")));
    }
    Ok(n)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut tls: Vec<(f64, f64)> = Vec::new();
        let mut slope_mhz: Option<f64> = None;
        let mut width_ns: Option<(f64, f64)> = None;
        let mut width_samples: Option<usize> = None;
        let mut amplitude: Option<(f64, f64)> = None;
        let mut amplitude_samples: Option<usize> = None;
        let mut engine: Option<EngineKind> = None;
        let mut stokes: Option<Stokes> = None;
        let mut dt_scale: Option<f64> = None;
        let mut min_substeps: Option<usize> = None;
        let mut workers: Option<usize> = None;
        let mut window: Option<Window> = None;
        let mut ridge_threshold: Option<f64> = None;
        let mut reference_width_ns: Option<f64> = None;
        let mut ft_input: Option<String> = None;
        let mut coupling: Option<(f64, f64)> = None;
        let mut detuning_mhz: Option<(f64, f64)> = None;
        let mut detuning_samples: Option<usize> = None;
        let mut adiabaticity: Option<Vec<f64>> = None;

        let mut section: Option<&str> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| fail(line, "unterminated section header"))?;
                section = Some(match name {
                    "system" => "system",
                    "grid" => "grid",
                    "engine" => "engine",
                    "spectral" => "spectral",
                    "darkstate" => "darkstate",
                    "lzcheck" => "lzcheck",
                    other => return Err(fail(line, format!("unknown section [{other}]"))),
                });
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| fail(line, format!("expected 'key = value', got '{trimmed}'")))?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(fail(line, format!("{key}: empty value")));
            }
            let section =
                section.ok_or_else(|| fail(line, format!("key '{key}' before any [section]")))?;

            // scalar keys reject duplicates so a forgotten edit cannot hide
            fn once<T>(line: usize, key: &str, slot: &mut Option<T>, v: T) -> Result<(), CliError> {
                if slot.is_some() {
                    return Err(fail(line, format!("duplicate key '{key}'")));
                }
                *slot = Some(v);
                Ok(())
            }

            match (section, key) {
                ("system", "tls") => {
                    let (eps, delta) = pair(line, key, value)?;
                    if eps <= 0.0 || delta <= 0.0 {
                        return Err(fail(
                            line,
                            format!("tls: energy and coupling must be positive, got '{value}'"),
                        ));
                    }
                    tls.push((eps, delta));
                }
                ("system", "slope") => {
                    let v = num(line, key, value)?;
                    if v <= 0.0 {
                        return Err(fail(line, format!("slope must be positive, got {v}")));
                    }
                    once(line, key, &mut slope_mhz, v)?;
                }
                ("grid", "width_ns") => once(line, key, &mut width_ns, range(line, key, value, true)?)?,
                ("grid", "width_samples") => {
                    once(line, key, &mut width_samples, samples(line, key, value)?)?
                }
                ("grid", "amplitude") => {
                    once(line, key, &mut amplitude, range(line, key, value, true)?)?
                }
                ("grid", "amplitude_samples") => {
                    once(line, key, &mut amplitude_samples, samples(line, key, value)?)?
                }
                ("engine", "kind") => {
                    let v = match value {
                        "analytic" => EngineKind::Analytic,
                        "numeric" => EngineKind::Numeric,
                        "both" => EngineKind::Both,
                        other => {
                            return Err(fail(
                                line,
                                format!("kind must be analytic, numeric or both, got '{other}'"),
                            ))
                        }
                    };
                    once(line, key, &mut engine, v)?;
                }
                ("engine", "stokes") => {
                    let v = match value {
                        "on" => Stokes::On,
                        "off" => Stokes::Off,
                        other => {
                            return Err(fail(line, format!("stokes must be on or off, got '{other}'")))
                        }
                    };
                    once(line, key, &mut stokes, v)?;
                }
                ("engine", "dt_scale") => {
                    let v = num(line, key, value)?;
                    if !(v > 0.0 && v <= 0.1) {
                        return Err(fail(line, format!("dt_scale must lie in (0, 0.1], got {v}")));
                    }
                    once(line, key, &mut dt_scale, v)?;
                }
                ("engine", "min_substeps") => {
                    let v = count(line, key, value)?;
                    if v == 0 {
                        return Err(fail(line, "min_substeps must be at least 1"));
                    }
                    once(line, key, &mut min_substeps, v)?;
                }
                ("engine", "workers") => once(line, key, &mut workers, count(line, key, value)?)?,
                ("spectral", "window") => {
                    let v = match value {
                        "none" => Window::None,
                        "hann" => Window::Hann,
                        other => {
                            return Err(fail(line, format!("window must be none or hann, got '{other}'")))
                        }
                    };
                    once(line, key, &mut window, v)?;
                }
                ("spectral", "ridge_threshold") => {
                    let v = num(line, key, value)?;
                    if !(v > 0.0 && v < 1.0) {
                        return Err(fail(
                            line,
                            format!("ridge_threshold must lie strictly between 0 and 1, got {v}"),
                        ));
                    }
                    once(line, key, &mut ridge_threshold, v)?;
                }
                ("spectral", "reference_width_ns") => {
                    let v = num(line, key, value)?;
                    if v <= 0.0 {
                        return Err(fail(line, format!("reference width must be positive, got {v}")));
                    }
                    once(line, key, &mut reference_width_ns, v)?;
                }
                ("spectral", "input") => once(line, key, &mut ft_input, value.to_string())?,
                ("darkstate", "coupling") => {
                    let (c1, c2) = pair(line, key, value)?;
                    if c1 < 0.0 || c2 < 0.0 {
                        return Err(fail(line, format!("couplings must be non-negative, got '{value}'")));
                    }
                    if c1 == 0.0 && c2 == 0.0 {
                        return Err(fail(line, "couplings must not both be zero"));
                    }
                    once(line, key, &mut coupling, (c1, c2))?;
                }
                ("darkstate", "detuning_mhz") => {
                    once(line, key, &mut detuning_mhz, range(line, key, value, false)?)?
                }
                ("darkstate", "detuning_samples") => {
                    once(line, key, &mut detuning_samples, samples(line, key, value)?)?
                }
                ("lzcheck", "adiabaticity") => {
                    let mut list = Vec::new();
                    for part in value.split_whitespace() {
                        let v = num(line, key, part)?;
                        if v <= 0.0 {
                            return Err(fail(line, format!("adiabaticity must be positive, got {v}")));
                        }
                        list.push(v);
                    }
                    once(line, key, &mut adiabaticity, list)?;
                }
                (section, key) => {
                    return Err(fail(line, format!("unknown key '{key}' in section [{section}]")))
                }
            }
        }

        let system = match (tls.is_empty(), slope_mhz) {
            (true, None) => None,
            (true, Some(_)) => {
                return Err(CliError::Config("[system] has a slope but no tls lines".into()))
            }
            (false, None) => {
                return Err(CliError::Config("[system] lists tls but no slope".into()))
            }
            (false, Some(slope)) => {
                let levels: Vec<Tls> =
                    tls.iter().map(|&(e, d)| Tls::from_mhz(e, d)).collect();
                let spec = SystemSpec::new(levels, model::rad_per_ns(slope))
                    .map_err(|e| CliError::Config(format!("[system]: {e}")))?;
                Some(SystemBlock { tls_mhz: tls, slope_mhz: slope, spec })
            }
        };

        let dark = match (coupling, detuning_mhz, detuning_samples) {
            (None, None, None) => None,
            (Some(c), d, n) => Some(DarkBlock {
                coupling_mhz: c,
                detuning_mhz: d.unwrap_or((-100.0, 100.0)),
                detuning_samples: n.unwrap_or(100),
            }),
            _ => {
                return Err(CliError::Config(
                    "[darkstate] needs a coupling line before detuning keys".into(),
                ))
            }
        };

        let width_ns = width_ns.unwrap_or((1.0, 100.0));
        // default drive span: peak detuning from half the lowest level to
        // three times the highest, covering under-, single- and all-crossing
        // regimes
        let amplitude = amplitude.or_else(|| {
            system.as_ref().map(|s| {
                let eps = s.spec.tls();
                let slope = s.spec.slope();
                (0.5 * eps[0].epsilon / slope, 3.0 * eps[eps.len() - 1].epsilon / slope)
            })
        });
        Ok(RunConfig {
            system,
            width_ns,
            width_samples: width_samples.unwrap_or(200),
            amplitude,
            amplitude_samples: amplitude_samples.unwrap_or(200),
            engine: engine.unwrap_or_default(),
            stokes: stokes.unwrap_or(Stokes::On),
            policy: DtPolicy {
                scale: dt_scale.unwrap_or(0.02),
                min_substeps: min_substeps.unwrap_or(2000),
            },
            workers: workers.unwrap_or(0),
            window: window.unwrap_or_default(),
            ridge_threshold: ridge_threshold.unwrap_or(0.2),
            reference_width_ns: reference_width_ns
                .unwrap_or(0.5 * (width_ns.0 + width_ns.1)),
            ft_input,
            dark,
            adiabaticity: adiabaticity
                .unwrap_or_else(|| vec![0.01, 0.05, 0.1, 0.3, 0.5, 1.0, 2.0]),
        })
    }

    pub fn require_system(&self) -> Result<&SystemBlock, CliError> {
        self.system
            .as_ref()
            .ok_or_else(|| CliError::Config("this subcommand needs a [system] section".into()))
    }

    pub fn require_amplitude(&self) -> Result<(f64, f64), CliError> {
        self.amplitude.ok_or_else(|| {
            CliError::Config("no amplitude range: give [grid] amplitude or a [system] section".into())
        })
    }

    /// Canonical echo of every effective setting, defaults included. The
    /// output parses back to an identical config, and exporters embed it in
    /// file headers so each artifact records how to regenerate it.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let mut push = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        if let Some(sys) = &self.system {
            push("[system]".into());
            for &(e, d) in &sys.tls_mhz {
                push(format!("tls = {e} {d}"));
            }
            push(format!("slope = {}", sys.slope_mhz));
        }
        push("[grid]".into());
        push(format!("width_ns = {} {}", self.width_ns.0, self.width_ns.1));
        push(format!("width_samples = {}", self.width_samples));
        if let Some((lo, hi)) = self.amplitude {
            push(format!("amplitude = {lo} {hi}"));
        }
        push(format!("amplitude_samples = {}", self.amplitude_samples));
        push("[engine]".into());
        push(format!("kind = {}", self.engine.name()));
        push(format!("stokes = {}", if self.stokes == Stokes::On { "on" } else { "off" }));
        push(format!("dt_scale = {}", self.policy.scale));
        push(format!("min_substeps = {}", self.policy.min_substeps));
        push(format!("workers = {}", self.workers));
        push("[spectral]".into());
        push(format!(
            "window = {}",
            if self.window == Window::Hann { "hann" } else { "none" }
        ));
        push(format!("ridge_threshold = {}", self.ridge_threshold));
        push(format!("reference_width_ns = {}", self.reference_width_ns));
        if let Some(input) = &self.ft_input {
            push(format!("input = {input}"));
        }
        if let Some(dark) = &self.dark {
            push("[darkstate]".into());
            push(format!("coupling = {} {}", dark.coupling_mhz.0, dark.coupling_mhz.1));
            push(format!(
                "detuning_mhz = {} {}",
                dark.detuning_mhz.0, dark.detuning_mhz.1
            ));
            push(format!("detuning_samples = {}", dark.detuning_samples));
        }
        push("[lzcheck]".into());
        let list: Vec<String> = self.adiabaticity.iter().map(|v| v.to_string()).collect();
        push(format!("adiabaticity = {}", list.join(" ")));
        out
    }
}
