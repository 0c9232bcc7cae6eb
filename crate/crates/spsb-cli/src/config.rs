//! Run configuration: a plain-text `key = value` format with one section
//! per module, merged in order (defaults → config file → command-line
//! overrides). Unknown sections, keys, or malformed values are rejected so
//! typos cannot silently fall back to defaults.

use std::path::PathBuf;

use spsb::models::{Chi3Params, OpoParams};
use spsb::verify::VerifyTolerances;
use spsb::ModelKind;

/// Grid scale for sweep and threshold axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// A one-dimensional evaluation grid.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl GridSpec {
    /// Materializes the grid points in order.
    pub fn build(&self) -> Result<Vec<f64>, String> {
        if self.points == 0 {
            return Err("grid needs at least one point".into());
        }
        if self.scale == Scale::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(format!(
                "log grid endpoints must be positive, got {}..{}",
                self.start, self.stop
            ));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let n = self.points;
        Ok((0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * t,
                    Scale::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect())
    }
}

/// Sweep axis: which parameter varies and over which grid.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    /// "control" (the model's natural control parameter), "rho_sq",
    /// "pump", or "delta".
    pub variable: String,
    pub grid: GridSpec,
}

/// Spectrum evaluation options.
#[derive(Clone, Debug)]
pub struct SpectrumSpec {
    /// Quadrature angle; `None` selects the optimal (most squeezed) one.
    pub phi: Option<f64>,
    /// Polarization-mode angle relative to the broken-symmetry state.
    pub theta: f64,
}

/// Fock-space cutoffs for the oracle comparison.
#[derive(Clone, Debug)]
pub struct OracleSpec {
    pub opo_cutoff: usize,
    pub chi3_cutoff: usize,
}

/// The full, merged run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: ModelKind,
    pub opo: OpoParams,
    pub chi3: Chi3Params,
    pub sweep: SweepSpec,
    pub thresholds: GridSpec,
    pub spectrum: SpectrumSpec,
    pub oracle: OracleSpec,
    pub out: Option<PathBuf>,
    pub tolerances: VerifyTolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Chi3,
            opo: OpoParams {
                pump: 1.5,
                chi: 1.0,
                gamma_p: 1.0,
                gamma_s: 1.0,
            },
            chi3: Chi3Params::kleinman(2.5, -1.0, 0.7, 1.0),
            sweep: SweepSpec {
                variable: "control".into(),
                grid: GridSpec {
                    start: 0.4,
                    stop: 1.2,
                    points: 33,
                    scale: Scale::Linear,
                },
            },
            thresholds: GridSpec {
                start: 0.0,
                stop: 3.0,
                points: 31,
                scale: Scale::Linear,
            },
            spectrum: SpectrumSpec {
                phi: None,
                theta: 0.0,
            },
            oracle: OracleSpec {
                opo_cutoff: 12,
                chi3_cutoff: 7,
            },
            out: None,
            tolerances: VerifyTolerances::default(),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    let x: f64 = value
        .parse()
        .map_err(|_| format!("key '{key}': '{value}' is not a number"))?;
    if !x.is_finite() {
        return Err(format!("key '{key}': value must be finite, got {value}"));
    }
    Ok(x)
}

fn parse_usize(key: &str, value: &str) -> Result<usize, String> {
    value
        .parse()
        .map_err(|_| format!("key '{key}': '{value}' is not a nonnegative integer"))
}

impl RunConfig {
    /// Sets one key in one section; `""` is the top-level section.
    pub fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        match section {
            "" => match key {
                "model" => {
                    self.model = match value {
                        "opo" => ModelKind::Opo,
                        "chi3" => ModelKind::Chi3,
                        _ => return Err(format!("model must be 'opo' or 'chi3', got '{value}'")),
                    }
                }
                "out" => self.out = Some(PathBuf::from(value)),
                _ => return Err(format!("unknown top-level key '{key}'")),
            },
            "opo" => {
                let slot = match key {
                    "pump" => &mut self.opo.pump,
                    "chi" => &mut self.opo.chi,
                    "gamma_p" => &mut self.opo.gamma_p,
                    "gamma_s" => &mut self.opo.gamma_s,
                    _ => return Err(format!("unknown key '{key}' in [opo]")),
                };
                *slot = parse_f64(key, value)?;
            }
            "chi3" => {
                let slot = match key {
                    "delta" => &mut self.chi3.delta,
                    "g" => &mut self.chi3.g,
                    "rho_sq" => &mut self.chi3.rho_sq,
                    "ratio_a" => &mut self.chi3.ratio_a,
                    "ratio_b" => &mut self.chi3.ratio_b,
                    "gamma_s" => &mut self.chi3.gamma_s,
                    _ => return Err(format!("unknown key '{key}' in [chi3]")),
                };
                *slot = parse_f64(key, value)?;
            }
            "sweep" => match key {
                "variable" => {
                    if !["control", "rho_sq", "pump", "delta"].contains(&value) {
                        return Err(format!(
                            "sweep variable must be control, rho_sq, pump, or delta; got '{value}'"
                        ));
                    }
                    self.sweep.variable = value.into();
                }
                "start" => self.sweep.grid.start = parse_f64(key, value)?,
                "stop" => self.sweep.grid.stop = parse_f64(key, value)?,
                "points" => self.sweep.grid.points = parse_usize(key, value)?,
                "scale" => self.sweep.grid.scale = parse_scale(value)?,
                _ => return Err(format!("unknown key '{key}' in [sweep]")),
            },
            "thresholds" => match key {
                "start" => self.thresholds.start = parse_f64(key, value)?,
                "stop" => self.thresholds.stop = parse_f64(key, value)?,
                "points" => self.thresholds.points = parse_usize(key, value)?,
                "scale" => self.thresholds.scale = parse_scale(value)?,
                _ => return Err(format!("unknown key '{key}' in [thresholds]")),
            },
            "spectrum" => match key {
                "phi" => {
                    self.spectrum.phi = if value == "opt" {
                        None
                    } else {
                        Some(parse_f64(key, value)?)
                    }
                }
                "theta" => self.spectrum.theta = parse_f64(key, value)?,
                _ => return Err(format!("unknown key '{key}' in [spectrum]")),
            },
            "oracle" => match key {
                "opo_cutoff" => self.oracle.opo_cutoff = parse_usize(key, value)?,
                "chi3_cutoff" => self.oracle.chi3_cutoff = parse_usize(key, value)?,
                _ => return Err(format!("unknown key '{key}' in [oracle]")),
            },
            "tolerances" => self
                .tolerances
                .set(key, parse_f64(key, value)?)
                .map_err(|e| e.to_string())?,
            _ => return Err(format!("unknown section '[{section}]'")),
        }
        Ok(())
    }

    /// Parses a whole config file body on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| format!("line {}: {msg}", lineno + 1);
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err("unterminated section header".into()))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            self.apply(&section, key.trim(), value.trim())
                .map_err(err)?;
        }
        Ok(())
    }

    /// Applies one `--set` override: `section.key=value` or a top-level
    /// `key=value`.
    pub fn apply_set(&mut self, spec: &str) -> Result<(), String> {
        let (path, value) = spec
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got '{spec}'"))?;
        let (section, key) = match path.trim().split_once('.') {
            Some((s, k)) => (s.trim().to_string(), k.trim().to_string()),
            None => (String::new(), path.trim().to_string()),
        };
        self.apply(&section, &key, value.trim())
    }
}

fn parse_scale(value: &str) -> Result<Scale, String> {
    match value {
        "linear" => Ok(Scale::Linear),
        "log" => Ok(Scale::Log),
        _ => Err(format!("scale must be 'linear' or 'log', got '{value}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parsing_merges_sections_and_rejects_unknowns() {
        let mut cfg = RunConfig::default();
        cfg.apply_text(
            "# comment\nmodel = opo\nout = results\n\n[chi3]\ndelta = 3.0 # inline\n\
             [sweep]\nvariable = rho_sq\npoints = 5\nscale = log\nstart = 0.5\nstop = 2.0\n\
             [tolerances]\ndark = 1e-5\n",
        )
        .unwrap();
        assert_eq!(cfg.model, ModelKind::Opo);
        assert_eq!(cfg.out.as_deref().unwrap().to_str().unwrap(), "results");
        assert_eq!(cfg.chi3.delta, 3.0);
        assert_eq!(cfg.sweep.variable, "rho_sq");
        assert_eq!(cfg.sweep.grid.points, 5);
        assert_eq!(cfg.tolerances.dark, 1e-5);

        let mut cfg = RunConfig::default();
        assert!(cfg.apply_text("[chi3]\ndetuning = 3.0\n").is_err());
        assert!(cfg.apply_text("[typo]\ndelta = 3.0\n").is_err());
        assert!(cfg.apply_text("model = dopo\n").is_err());
        assert!(cfg.apply_text("[chi3]\ndelta == 3.0\n").is_err());
        assert!(cfg.apply_text("[chi3]\ndelta = abc\n").is_err());
        assert!(cfg.apply_text("[chi3\ndelta = 1\n").is_err());
    }

    #[test]
    fn set_overrides_route_to_sections() {
        let mut cfg = RunConfig::default();
        cfg.apply_set("chi3.rho_sq=0.9").unwrap();
        cfg.apply_set("model=opo").unwrap();
        cfg.apply_set("spectrum.phi=opt").unwrap();
        cfg.apply_set("spectrum.theta = 0.3").unwrap();
        assert_eq!(cfg.chi3.rho_sq, 0.9);
        assert_eq!(cfg.model, ModelKind::Opo);
        assert!(cfg.spectrum.phi.is_none());
        assert_eq!(cfg.spectrum.theta, 0.3);
        assert!(cfg.apply_set("chi3.rho_sq").is_err());
        assert!(cfg.apply_set("nope.key=1").is_err());
        assert!(cfg.apply_set("sweep.points=-3").is_err());
    }

    #[test]
    fn grids_materialize_linearly_and_logarithmically() {
        let lin = GridSpec {
            start: 0.0,
            stop: 1.0,
            points: 5,
            scale: Scale::Linear,
        };
        assert_eq!(lin.build().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let log = GridSpec {
            start: 0.01,
            stop: 100.0,
            points: 5,
            scale: Scale::Log,
        };
        let pts = log.build().unwrap();
        assert!((pts[2] - 1.0).abs() < 1e-12);
        assert!((pts[4] - 100.0).abs() < 1e-10);
        let empty = GridSpec {
            points: 0,
            ..lin.clone()
        };
        assert!(empty.build().is_err());
        let bad_log = GridSpec {
            start: 0.0,
            scale: Scale::Log,
            ..lin
        };
        assert!(bad_log.build().is_err());
    }
}
