//! Cochran's Q test over frame incidence, the chi-square survival function
//! it needs, and log-log rank-frequency (Zipf) fitting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::ContingencyMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CochranResult {
    pub q: f64,
    pub df: usize,
    pub p: f64,
    pub k: usize,
    /// Rows with at least one but not all frames present.
    pub usable_rows: usize,
}

/// `Q = (k−1)·[k·ΣC_j² − (ΣC_j)²] / [k·ΣR_i − ΣR_i²]` over column sums `C`
/// and row sums `R`.
pub fn cochran_q(m: &ContingencyMatrix) -> Result<CochranResult> {
    let k = m.num_frames();
    if k < 2 {
        return Err(Error::InvalidArgument("Cochran's Q needs at least two columns".into()));
    }
    let mut col = vec![0u64; k];
    let (mut row_sum, mut row_sq, mut usable) = (0u64, 0u64, 0usize);
    for row in m.rows() {
        let r: u64 = row.iter().map(|&c| u64::from(c)).sum();
        for (c, &x) in col.iter_mut().zip(row) {
            *c += u64::from(x);
        }
        row_sum += r;
        row_sq += r * r;
        if r > 0 && r < k as u64 {
            usable += 1;
        }
    }
    let kf = k as f64;
    let denom = kf * row_sum as f64 - row_sq as f64;
    if usable == 0 || denom <= 0.0 {
        return Err(Error::Degenerate(
            "no row has some but not all frames present".into(),
        ));
    }
    let col_sq: f64 = col.iter().map(|&c| (c as f64) * (c as f64)).sum();
    let total = row_sum as f64;
    let q = ((kf - 1.0) * (kf * col_sq - total * total) / denom).max(0.0);
    let df = k - 1;
    Ok(CochranResult {
        q,
        df,
        p: chi2_sf(q, df),
        k,
        usable_rows: usable,
    })
}

/// Renders a p-value the way reports print it.
pub fn format_p(p: f64) -> String {
    if p < 1e-16 {
        "< 1e-16".to_owned()
    } else if p < 1e-4 {
        format!("{p:.2e}")
    } else {
        format!("{p:.4}")
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

/// Lower regularised incomplete gamma P(a, x) by its power series.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..GAMMA_MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - ln_gamma(a)).exp()
}

/// Upper regularised incomplete gamma Q(a, x) by a continued fraction
/// (modified Lentz).
fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (a * x.ln() - x - ln_gamma(a)).exp() * h
}

/// Chi-square survival function `1 − P(df/2, x/2)`.
pub fn chi2_sf(x: f64, df: usize) -> f64 {
    assert!(df > 0, "degrees of freedom must be positive");
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let a = df as f64 / 2.0;
    let half = x / 2.0;
    let q = if x < df as f64 + 1.0 {
        1.0 - gamma_p_series(a, half)
    } else {
        gamma_q_fraction(a, half)
    };
    q.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipfFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Least-squares line through `(ln rank, ln count)`. Counts are ranked in
/// descending order (stable for ties); zero counts are ignored. A constant
/// sequence fits a flat line with R² = 1.
pub fn zipf_fit(counts: &[u64]) -> Result<ZipfFit> {
    let mut sorted: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    sorted.sort_by(|a, b| b.cmp(a));
    if sorted.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "Zipf fit needs at least 3 nonzero counts, got {}",
            sorted.len()
        )));
    }
    let xs: Vec<f64> = (1..=sorted.len()).map(|r| (r as f64).ln()).collect();
    let ys: Vec<f64> = sorted.iter().map(|&c| (c as f64).ln()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - x_mean) * (y - y_mean);
        sxx += (x - x_mean) * (x - x_mean);
        syy += (y - y_mean) * (y - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(ZipfFit {
        slope,
        intercept,
        r_squared,
        n_points: sorted.len(),
    })
}
