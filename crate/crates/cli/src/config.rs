//! Config resolution: defaults, then the TOML file, then command-line flags.

use jetext_core::error::{Error, Result};
use jetext_core::report::{ReportFormat, RunConfig};

use crate::CommonOpts;

/// Partial config as read from a TOML file; any subset of fields may appear.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    m: Option<usize>,
    k: Option<u32>,
    p_min: Option<u32>,
    p_max: Option<u32>,
    y_kind: Option<String>,
    eps: Option<f64>,
    seed: Option<u64>,
    quad_order: Option<usize>,
    tolerance: Option<f64>,
    out_dir: Option<String>,
    format: Option<String>,
}

fn parse_p_range(s: &str) -> Result<(u32, u32)> {
    let parts: Vec<&str> = s.split("..").collect();
    match parts.as_slice() {
        [a, b] => {
            let lo = a
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad p-range '{s}'")))?;
            let hi = b
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad p-range '{s}'")))?;
            Ok((lo, hi))
        }
        [a] => {
            let v = a
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad p-range '{s}'")))?;
            Ok((v, v))
        }
        _ => Err(Error::Config(format!("bad p-range '{s}', expected lo..hi"))),
    }
}

fn parse_format(s: &str) -> Result<ReportFormat> {
    match s {
        "csv" => Ok(ReportFormat::Csv),
        "json" => Ok(ReportFormat::Json),
        other => Err(Error::Config(format!(
            "unknown format '{other}', expected csv or json"
        ))),
    }
}

pub fn resolve(opts: &CommonOpts) -> Result<RunConfig> {
    resolve_with(opts, RunConfig::default())
}

/// Resolution order: per-command base, then the TOML file, then flags.
pub fn resolve_with(opts: &CommonOpts, base: RunConfig) -> Result<RunConfig> {
    let mut cfg = base;

    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path)?;
        let file: FileConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("config file: {e}")))?;
        if let Some(v) = file.n {
            cfg.n = v;
        }
        if let Some(v) = file.m {
            cfg.m = v;
        }
        if let Some(v) = file.k {
            cfg.k = v;
        }
        if let Some(v) = file.p_min {
            cfg.p_min = v;
        }
        if let Some(v) = file.p_max {
            cfg.p_max = v;
        }
        if let Some(v) = file.y_kind {
            cfg.y_kind = v;
        }
        if let Some(v) = file.eps {
            cfg.eps = v;
        }
        if let Some(v) = file.seed {
            cfg.seed = v;
        }
        if let Some(v) = file.quad_order {
            cfg.quad_order = v;
        }
        if let Some(v) = file.tolerance {
            cfg.tolerance = v;
        }
        if let Some(v) = file.out_dir {
            cfg.out_dir = Some(v);
        }
        if let Some(v) = file.format {
            cfg.format = parse_format(&v)?;
        }
    }

    if let Some(v) = opts.n {
        cfg.n = v;
    }
    if let Some(v) = opts.m {
        cfg.m = v;
    }
    if let Some(v) = opts.k {
        cfg.k = v;
    }
    if let Some(s) = &opts.p {
        let (lo, hi) = parse_p_range(s)?;
        cfg.p_min = lo;
        cfg.p_max = hi;
    }
    if let Some(v) = &opts.y_kind {
        if !["point", "line", "conic"].contains(&v.as_str()) {
            return Err(Error::Config(format!("unknown y-kind '{v}'")));
        }
        cfg.y_kind = v.clone();
    }
    if let Some(v) = opts.eps {
        cfg.eps = v;
    }
    if let Some(v) = opts.seed {
        cfg.seed = v;
    }
    if let Some(v) = opts.quad_order {
        cfg.quad_order = v;
    }
    if let Some(v) = opts.tolerance {
        cfg.tolerance = v;
    }
    if let Some(v) = &opts.out {
        cfg.out_dir = Some(v.display().to_string());
    }
    if let Some(v) = &opts.format {
        cfg.format = parse_format(v)?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_range_forms() {
        assert_eq!(parse_p_range("6..24").unwrap(), (6, 24));
        assert_eq!(parse_p_range("8").unwrap(), (8, 8));
        assert!(parse_p_range("x..y").is_err());
    }
}
