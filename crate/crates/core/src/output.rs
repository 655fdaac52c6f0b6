//! Convergence-log CSV files, run configuration files and the slope report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::adaptive::{ConvergenceLog, IterationRecord, RunConfig};
use crate::error::{Error, Result};

pub const CSV_VERSION_LINE: &str = "# goafem-ml v1";
pub const CSV_HEADER: &str = "iter,dofs,mu,zeta,product,goal_value,n_indices,max_param,seconds";
pub const REFERENCE_HEADER: &str = "iter,dofs,product,ref_error";

pub fn convergence_path(dir: &Path, setup: u8) -> PathBuf {
    dir.join(format!("setup{setup}_convergence.csv"))
}

pub fn reference_path(dir: &Path, setup: u8) -> PathBuf {
    dir.join(format!("setup{setup}_reference.csv"))
}

fn row(r: &IterationRecord) -> String {
    format!(
        "{},{},{:e},{:e},{:e},{:e},{},{},{:.3}",
        r.iter, r.dofs, r.mu, r.zeta, r.product, r.goal_value, r.n_indices, r.max_param, r.seconds
    )
}

pub fn convergence_csv(records: &[IterationRecord]) -> String {
    let mut s = format!("{CSV_VERSION_LINE}\n{CSV_HEADER}\n");
    for r in records {
        s.push_str(&row(r));
        s.push('\n');
    }
    s
}

pub fn reference_csv(log: &ConvergenceLog, errors: &[f64]) -> String {
    let mut s = format!("{CSV_VERSION_LINE}\n{REFERENCE_HEADER}\n");
    for (r, e) in log.records.iter().zip(errors) {
        writeln!(s, "{},{},{:e},{:e}", r.iter, r.dofs, r.product, e).unwrap();
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Parsed convergence CSV: column names and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn parse_csv(text: &str) -> Result<Table> {
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(cols) = &columns else {
            columns = Some(line.split(',').map(str::to_string).collect());
            continue;
        };
        let vals = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse { line: k + 1, message: e.to_string() })?;
        if vals.len() != cols.len() {
            return Err(Error::Parse {
                line: k + 1,
                message: format!("expected {} fields, found {}", cols.len(), vals.len()),
            });
        }
        rows.push(vals);
    }
    let columns = columns.ok_or(Error::Parse { line: 0, message: "missing header".into() })?;
    Ok(Table { columns, rows })
}

/// Least-squares slope of `log y` against `log x` over the last `n` points
/// with positive coordinates.
pub fn loglog_slope(x: &[f64], y: &[f64], n: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let pts = &pts[pts.len().saturating_sub(n)..];
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for p in pts {
        sxy += (p.0 - mx) * (p.1 - my);
        sxx += (p.0 - mx) * (p.0 - mx);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Text report: final estimates and the fitted rate of the product.
pub fn report(table: &Table) -> Result<String> {
    let col = |n: &str| table.column(n).ok_or_else(|| Error::Config(format!("column {n} missing")));
    let (dofs, product) = (col("dofs")?, col("product")?);
    let mut s = String::new();
    writeln!(s, "{:>5} {:>10} {:>12} {:>12} {:>12} {:>14}", "iter", "dofs", "mu", "zeta", "product", "goal").unwrap();
    let (mu, zeta, goal) = (col("mu")?, col("zeta")?, col("goal_value")?);
    for i in 0..table.rows.len() {
        writeln!(
            s,
            "{:>5} {:>10} {:>12.4e} {:>12.4e} {:>12.4e} {:>14.8e}",
            i, dofs[i], mu[i], zeta[i], product[i], goal[i]
        )
        .unwrap();
    }
    match loglog_slope(&dofs, &product, 5) {
        Some(k) => writeln!(s, "slope (last 5 points): {k:.4}").unwrap(),
        None => writeln!(s, "slope (last 5 points): n/a").unwrap(),
    }
    Ok(s)
}

/// Reads a flat `key = value` file; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, val) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: k + 1,
            message: format!("expected key = value, found {line:?}"),
        })?;
        out.insert(key.trim().replace('-', "_"), val.trim().to_string());
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("invalid value {v:?} for {key}")))
}

/// Run settings that live outside the adaptive loop itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub run: RunConfig,
    pub ref_tol: Option<f64>,
    pub output_dir: PathBuf,
    pub threads: Option<usize>,
    pub dump_mesh: bool,
}

impl Settings {
    /// Builds settings for `setup` from config-file entries.
    pub fn from_map(setup: Option<u8>, map: &BTreeMap<String, String>) -> Result<Settings> {
        let setup = match (setup, map.get("setup")) {
            (Some(s), _) => s,
            (None, Some(v)) => parse("setup", v)?,
            (None, None) => return Err(Error::Config("no setup given".into())),
        };
        let mut s = Settings {
            run: RunConfig::for_setup(setup)?,
            ref_tol: None,
            output_dir: PathBuf::from("out"),
            threads: None,
            dump_mesh: false,
        };
        for (k, v) in map {
            match k.as_str() {
                "setup" => {}
                "theta" => s.run.theta = parse(k, v)?,
                "tol" => s.run.tol = parse(k, v)?,
                "ref_tol" => s.ref_tol = Some(parse(k, v)?),
                "max_iter" => s.run.max_iter = parse(k, v)?,
                "solver_tol" => s.run.solver_tol = parse(k, v)?,
                "freeze_indices" => s.run.freeze_indices = parse(k, v)?,
                "output_dir" => s.output_dir = PathBuf::from(v),
                "threads" => s.threads = Some(parse(k, v)?),
                "dump_mesh" => s.dump_mesh = parse(k, v)?,
                _ => return Err(Error::Config(format!("unknown config key {k:?}"))),
            }
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.run.validate()?;
        if let Some(r) = self.ref_tol {
            if !(r > 0.0 && r < self.run.tol) {
                return Err(Error::Config(format!("ref_tol {r} must lie in (0, tol)")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = (1..10).map(|i| (i * 100) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 / v).collect();
        assert!((loglog_slope(&x, &y, 5).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&x[..1], &y[..1], 5), None);
    }

    #[test]
    fn config_round_trip() {
        let m = parse_config("# comment\nsetup = 2\ntheta=0.4\nref-tol = 1e-5 # trailing\n").unwrap();
        let s = Settings::from_map(None, &m).unwrap();
        assert_eq!(s.run.setup, 2);
        assert_eq!(s.run.theta, 0.4);
        assert_eq!(s.ref_tol, Some(1e-5));
        assert!(parse_config("novalue").is_err());
        let bad = parse_config("colour = red").unwrap();
        assert!(Settings::from_map(Some(1), &bad).is_err());
    }

    #[test]
    fn csv_parses_back() {
        let t = parse_csv(&format!("{CSV_VERSION_LINE}\n{CSV_HEADER}\n0,10,1e-1,2e-1,3e-2,4,1,0,0.01\n")).unwrap();
        assert_eq!(t.column("dofs").unwrap(), vec![10.0]);
        assert!(parse_csv("a,b\n1\n").is_err());
    }
}
