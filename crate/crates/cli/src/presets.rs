//! Initial data presets.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use curveflow::profiles::{find_periodic_profiles, solve_profile, PeriodicFamily};
use curveflow::{project_closure, PeriodicProfile};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `v0 ≡ c`, `c > 0`.
    Constant(f64),
    /// `v0 = d + cos(x/m)`, `d > 1`.
    Bell(f64),
    /// `v0^{1-p} = 1 + r cos x`, `|r| < 1`.
    Loops(f64),
    /// Steady profile with `j` periods on the circle, times `1 + δ cos(x/m)`.
    Steady { j: u32, delta: f64 },
    File(PathBuf),
}

impl InitialData {
    /// Parses `constant c`, `bell d`, `loops r`, `steady j δ` or `file path`.
    pub fn parse(spec: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut words = spec.split_whitespace();
        let name = words.next().unwrap_or("");
        let args: Vec<&str> = words.collect();
        let num = |i: usize| -> Result<f64, CliError> {
            args.get(i)
                .and_then(|a| a.parse::<f64>().ok())
                .ok_or_else(|| CliError::Config(format!("preset `{spec}`: argument {} missing or not a number", i + 1)))
        };
        let arity = |n: usize| -> Result<(), CliError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(CliError::Config(format!("preset `{spec}` takes {n} argument(s)")))
            }
        };
        let data = match name {
            "constant" => {
                arity(1)?;
                InitialData::Constant(num(0)?)
            }
            "bell" => {
                arity(1)?;
                InitialData::Bell(num(0)?)
            }
            "loops" => {
                arity(1)?;
                InitialData::Loops(num(0)?)
            }
            "steady" => {
                arity(2)?;
                let j = num(0)?;
                if j.fract() != 0.0 || j < 1.0 {
                    return Err(CliError::Config(format!("preset `{spec}`: j must be a positive integer")));
                }
                InitialData::Steady { j: j as u32, delta: num(1)? }
            }
            "file" => {
                arity(1)?;
                InitialData::File(base_dir.join(args[0]))
            }
            _ => return Err(CliError::Config(format!("unknown preset `{spec}`"))),
        };
        data.validate()?;
        Ok(data)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        match *self {
            InitialData::Constant(c) if !(c > 0.0 && c.is_finite()) => bad(format!("constant {c}: need c > 0")),
            InitialData::Bell(d) if !(d > 1.0 && d.is_finite()) => bad(format!("bell {d}: need d > 1")),
            InitialData::Loops(r) if !(r.abs() < 1.0) => bad(format!("loops {r}: need |r| < 1")),
            InitialData::Steady { delta, .. } if !(delta.abs() < 0.5) => bad("steady: need |delta| < 0.5".to_string()),
            _ => Ok(()),
        }
    }
}

/// Samples the initial profile on the `(m, n)` grid, optionally projected
/// onto the closure constraint.
pub fn build_initial_data(data: &InitialData, p: f64, m: u32, n: usize, project: bool) -> Result<PeriodicProfile, CliError> {
    let mf = m as f64;
    let v0 = match data {
        InitialData::Constant(c) => PeriodicProfile::constant(m, n, *c)?,
        InitialData::Bell(d) => PeriodicProfile::from_fn(m, n, |x| d + (x / mf).cos())?,
        InitialData::Loops(r) => {
            if p == 1.0 {
                return Err(CliError::Config("loops preset needs p != 1".into()));
            }
            PeriodicProfile::from_fn(m, n, |x| (1.0 + r * x.cos()).powf(1.0 / (1.0 - p)))?
        }
        InitialData::Steady { j, delta } => {
            let a = match find_periodic_profiles(p, m)? {
                PeriodicFamily::Discrete(list) => list
                    .iter()
                    .find(|(_, jj)| jj == j)
                    .map(|(a, _)| *a)
                    .ok_or_else(|| CliError::Config(format!("no steady profile with {j} periods for p = {p}, m = {m}")))?,
                PeriodicFamily::Continuum { .. } => {
                    return Err(CliError::Config("steady preset needs p != 4".into()));
                }
            };
            let w = solve_profile(a, p, 4096)?.on_circle(m, n)?;
            let values = w
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| v * (1.0 + delta * (w.x(i) / mf).cos()))
                .collect();
            PeriodicProfile::new(m, values)?
        }
        InitialData::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let v = PeriodicProfile::from_csv(&text).map_err(|e| CliError::Config(e.to_string()))?;
            if v.m() != m || v.len() != n {
                return Err(CliError::Config(format!(
                    "{} holds m = {}, n = {}; config asks for m = {m}, n = {n}",
                    path.display(),
                    v.m(),
                    v.len()
                )));
            }
            v
        }
    };
    if project {
        Ok(project_closure(&v0, p)?.profile)
    } else {
        Ok(v0)
    }
}

/// Closure moment of the `loops r` preset for `m ≥ 2`: `mπ r`.
pub fn loops_moment(r: f64, m: u32) -> f64 {
    m as f64 * PI * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use curveflow::closure_moment;

    #[test]
    fn preset_examples() {
        let base = Path::new("");
        let one = build_initial_data(&InitialData::parse("constant 1", base).unwrap(), 2.0, 2, 64, false).unwrap();
        assert!(one.values().iter().all(|&v| v == 1.0));

        let bell = build_initial_data(&InitialData::parse("bell 1.5", base).unwrap(), 2.0, 2, 256, false).unwrap();
        assert_eq!(bell.values()[bell.center()], 2.5);
        assert!((bell.values()[0] - 0.5).abs() < 1e-15);
        assert!(bell.is_symmetric_decreasing(0.0));

        let loops = build_initial_data(&InitialData::parse("loops 0.3", base).unwrap(), 2.0, 2, 256, false).unwrap();
        let mom = closure_moment(&loops, 2.0);
        assert!((mom.re - loops_moment(0.3, 2)).abs() < 1e-12 && mom.im.abs() < 1e-12);
    }

    #[test]
    fn preset_ranges() {
        let base = Path::new("");
        for bad in ["constant 0", "bell 1", "loops 1", "loops", "bell x", "wave 1", "steady 2.5 0.01", "constant 1 2"] {
            assert!(InitialData::parse(bad, base).is_err(), "{bad}");
        }
    }

    #[test]
    fn steady_preset_is_perturbed_member() {
        let d = InitialData::parse("steady 9 0.01", Path::new("")).unwrap();
        let v = build_initial_data(&d, 3.0, 5, 512, true).unwrap();
        assert!(closure_moment(&v, 3.0).modulus() < 1e-10);
        assert!(v.max() / v.min() > 1.5);
    }
}
