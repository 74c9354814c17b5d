//! Profile comparison against the model kernels and trend statistics.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// One rescaled comparison point: computed kernel value (normalized by the
/// operator's p-power) against the model profile at sqrt(p)-rescaled
/// coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileSample {
    /// rescaled first argument sqrt(p) Z (flattened complex pairs)
    pub z_rescaled: Vec<(f64, f64)>,
    /// rescaled second argument
    pub zp_rescaled: Vec<(f64, f64)>,
    pub computed: (f64, f64),
    pub model: (f64, f64),
}

impl ProfileSample {
    pub fn new(z: &[Complex64], zp: &[Complex64], computed: Complex64, model: Complex64) -> Self {
        ProfileSample {
            z_rescaled: z.iter().map(|c| (c.re, c.im)).collect(),
            zp_rescaled: zp.iter().map(|c| (c.re, c.im)).collect(),
            computed: (computed.re, computed.im),
            model: (model.re, model.im),
        }
    }

    pub fn deviation(&self) -> f64 {
        let d = Complex64::new(
            self.computed.0 - self.model.0,
            self.computed.1 - self.model.1,
        );
        d.norm()
    }

    fn envelope(&self) -> f64 {
        let zsq: f64 = self.z_rescaled.iter().map(|(a, b)| a * a + b * b).sum();
        let zpsq: f64 = self.zp_rescaled.iter().map(|(a, b)| a * a + b * b).sum();
        (-(zsq + zpsq) * std::f64::consts::PI / 4.0).exp()
    }
}

/// Sup and quadratic-mean deviation over a sample grid, weighted by the
/// Gaussian envelope so tail noise cannot dominate, and normalized by the
/// largest model magnitude.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeviationStats {
    pub sup: f64,
    pub l2_mean: f64,
    pub model_scale: f64,
}

pub fn deviation_stats(samples: &[ProfileSample]) -> DeviationStats {
    let model_scale = samples
        .iter()
        .map(|s| Complex64::new(s.model.0, s.model.1).norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut sup = 0.0f64;
    let mut sq = 0.0f64;
    for s in samples {
        let d = s.deviation() * s.envelope() / model_scale;
        sup = sup.max(d);
        sq += d * d;
    }
    DeviationStats {
        sup,
        l2_mean: (sq / samples.len().max(1) as f64).sqrt(),
        model_scale,
    }
}

/// Power-law fit of a positive series against p: log v = a + e log p.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub r_squared: f64,
}

pub fn trend_fit(series: &[(f64, f64)]) -> Result<PowerLawFit> {
    if series.len() < 5 {
        return Err(Error::DegenerateFit(format!(
            "need >= 5 points, got {}",
            series.len()
        )));
    }
    if series.iter().any(|&(p, v)| p <= 0.0 || v <= 0.0) {
        return Err(Error::DegenerateFit(
            "nonpositive value in power-law fit".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(p, v)| (p.ln(), v.ln())).collect();
    let (slope, intercept, r2, se) = least_squares(&pts)?;
    Ok(PowerLawFit {
        exponent: slope,
        intercept,
        std_error: se,
        r_squared: r2,
    })
}

/// Exponential-decay fit: log |K| regressed on sqrt(p) * dist. Returns the
/// decay constant c (slope = -c), intercept and R^2.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    pub c: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn decay_fit(samples: &[(f64, f64, f64)]) -> Result<DecayFit> {
    if samples.iter().any(|&(_, _, mag)| mag <= 0.0) {
        return Err(Error::DegenerateFit("nonpositive kernel magnitude".into()));
    }
    let mut pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(p, d, mag)| (p.sqrt() * d, mag.ln()))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut distinct = 1;
    for i in 1..pts.len() {
        if (pts[i].0 - pts[i - 1].0).abs() > 1e-12 {
            distinct += 1;
        }
    }
    if distinct < 5 {
        return Err(Error::DegenerateFit(format!(
            "need >= 5 distinct abscissae, got {distinct}"
        )));
    }
    let (slope, intercept, r2, _) = least_squares(&pts)?;
    Ok(DecayFit {
        c: -slope,
        intercept,
        r_squared: r2,
    })
}

fn least_squares(pts: &[(f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-12 * (n * sxx).abs().max(1e-300) {
        return Err(Error::DegenerateFit("degenerate abscissae".into()));
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(x, y) in pts {
        let fit = intercept + slope * x;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let r2 = if ss_tot <= 1e-30 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    let dof = (pts.len() as f64 - 2.0).max(1.0);
    let var_slope = (ss_res / dof) * n / det;
    Ok((slope, intercept, r2, var_slope.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_recovered() {
        let series: Vec<(f64, f64)> = (4..20).map(|p| (p as f64, (p as f64).powf(-1.5))).collect();
        let fit = trend_fit(&series).unwrap();
        assert!((fit.exponent + 1.5).abs() < 1e-9);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn constant_series_has_zero_exponent() {
        let series: Vec<(f64, f64)> = (4..12).map(|p| (p as f64, 7.25)).collect();
        let fit = trend_fit(&series).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
    }

    #[test]
    fn synthetic_decay_recovered_and_permutation_invariant() {
        let mut samples: Vec<(f64, f64, f64)> = Vec::new();
        for p in [4.0f64, 9.0, 16.0, 25.0, 36.0] {
            for d in [0.1, 0.2] {
                samples.push((p, d, (-3.0 * p.sqrt() * d).exp()));
            }
        }
        let fit = decay_fit(&samples).unwrap();
        assert!((fit.c - 3.0).abs() < 1e-6);
        assert!(fit.r_squared > 1.0 - 1e-9);
        samples.reverse();
        let fit2 = decay_fit(&samples).unwrap();
        assert!((fit.c - fit2.c).abs() < 1e-12);
    }

    #[test]
    fn preconditions_enforced() {
        assert!(trend_fit(&[(1.0, 1.0); 3]).is_err());
        assert!(trend_fit(&[(1.0, -1.0); 6]).is_err());
        assert!(decay_fit(&[(4.0, 0.1, 1.0); 4]).is_err());
    }

    #[test]
    fn deviation_weighting() {
        let s = ProfileSample::new(
            &[Complex64::new(0.0, 0.0)],
            &[],
            Complex64::new(1.1, 0.0),
            Complex64::new(1.0, 0.0),
        );
        let stats = deviation_stats(&[s]);
        assert!((stats.sup - 0.1).abs() < 1e-12);
        assert!(stats.sup >= stats.l2_mean - 1e-15);
    }
}
