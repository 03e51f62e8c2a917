//! Fourier analysis of interference patterns along the pulse-width axis.
//!
//! A fringe family with phase k_T * T shows up as a fixed-frequency ridge in
//! the transform of each constant-amplitude row. The closed forms for the
//! two-TLS ridge frequencies and their weights live here as well, so a map
//! can be checked against its prediction, and a ridge extractor turns maps
//! into countable points.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::impulse::LzGateParams;
use crate::model::{check_axis, PatternGrid, SystemSpec};

/// Tapering applied to each row before the transform.
///
/// The bare transform matches the textbook definition and keeps ridge
/// amplitudes directly comparable to the closed-form weights; the Hann
/// window trades a wider main lobe for strongly suppressed leakage, which
/// sharpens ridge extraction on short axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    None,
    Hann,
}

/// Unnormalized forward transform, X(k) = sum_j x(j) exp(-2 pi i j k / N).
///
/// Output length equals input length; no scaling is applied, so a constant
/// series c lands N*c on bin zero.
pub fn dft_series(series: &[f64]) -> Result<Vec<C64>> {
    if series.len() < 2 {
        return Err(Error::EmptySeries);
    }
    let mut buf: Vec<C64> = series.iter().map(|&x| C64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    Ok(buf)
}

/// Magnitude half-spectra of a pattern, one column per drive amplitude.
#[derive(Debug, Clone)]
pub struct FtMap {
    magnitudes: Array2<f64>,
    k_axis: Vec<f64>,
    a_axis: Vec<f64>,
}

impl FtMap {
    /// Bin magnitudes, shape (retained bins, amplitude samples).
    pub fn magnitudes(&self) -> &Array2<f64> {
        &self.magnitudes
    }

    /// Angular frequency of each retained bin, 2 pi m / (N dt).
    pub fn k_axis(&self) -> &[f64] {
        &self.k_axis
    }

    /// Drive amplitudes, copied from the source grid.
    pub fn a_axis(&self) -> &[f64] {
        &self.a_axis
    }
}

/// Transform of every constant-amplitude row of a pattern over the width
/// axis. Rows are mean-subtracted first so the incoherent background does
/// not swamp bin zero, then optionally windowed; only the first half of the
/// spectrum is kept since the input is real.
pub fn ft_map(grid: &PatternGrid, window: Window) -> Result<FtMap> {
    let t = grid.t_axis();
    let n = t.len();
    if n < 2 {
        return Err(Error::InvalidAxis("width axis needs at least 2 samples".into()));
    }
    let dt = t[1] - t[0];
    // the slack covers axes that round-tripped through 9-digit text output
    for pair in t.windows(2) {
        if ((pair[1] - pair[0]) - dt).abs() > 1e-5 * dt {
            return Err(Error::InvalidAxis("width axis must be uniformly spaced".into()));
        }
    }
    let taper: Vec<f64> = (0..n)
        .map(|j| match window {
            Window::None => 1.0,
            Window::Hann => 0.5 - 0.5 * (2.0 * PI * j as f64 / (n - 1) as f64).cos(),
        })
        .collect();
    let n_bins = n / 2 + 1;
    let n_a = grid.a_axis().len();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut magnitudes = Array2::zeros((n_bins, n_a));
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for (col, row) in grid.values().outer_iter().enumerate() {
        let mean = row.sum() / n as f64;
        for (j, b) in buf.iter_mut().enumerate() {
            *b = C64::new((row[j] - mean) * taper[j], 0.0);
        }
        fft.process(&mut buf);
        for (m, b) in buf.iter().take(n_bins).enumerate() {
            magnitudes[(m, col)] = b.norm();
        }
    }
    let k_axis = (0..n_bins).map(|m| 2.0 * PI * m as f64 / (n as f64 * dt)).collect();
    Ok(FtMap { magnitudes, k_axis, a_axis: grid.a_axis().to_vec() })
}

/// Closed-form ridge frequencies and weights for the two-TLS system,
/// sampled along an amplitude axis at a fixed reference pulse width.
///
/// `k1` is the fringe between the two reflected paths, `k2` between the
/// transmitted path and the upper reflection, and `k3 = k1 + k2` closes the
/// triangle. The weights are the cosine prefactors of the corresponding
/// fringes (`b0` is the incoherent background); they depend on the sweep
/// rate and therefore on the reference width. Amplitudes whose peak fails
/// to reach the upper anticrossing carry no arcs and are omitted.
#[derive(Debug, Clone)]
pub struct ArcPrediction {
    pub amplitudes: Vec<f64>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub k3: Vec<f64>,
    /// Alternate form of `k2` built on the level separation instead of the
    /// upper level; the two coincide when the lower level sits at zero.
    pub k2_alt: Vec<f64>,
    pub b0: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub b3: Vec<f64>,
}

/// Predicted arcs for a two-TLS system over `a_axis`, with transition
/// probabilities evaluated at pulse width `t_ref`.
pub fn predict_arcs(sys: &SystemSpec, a_axis: &[f64], t_ref: f64) -> Result<ArcPrediction> {
    if sys.n_tls() != 2 {
        return Err(Error::WrongTlsCount { expected: 2, got: sys.n_tls() });
    }
    if !t_ref.is_finite() || t_ref <= 0.0 {
        return Err(Error::InvalidParameter(format!("reference width {t_ref} must be positive")));
    }
    check_axis("amplitude axis", a_axis, true)?;
    let (e1, e2) = (sys.tls()[0].epsilon, sys.tls()[1].epsilon);
    let e12 = e2 - e1;
    let mut out = ArcPrediction {
        amplitudes: Vec::new(),
        k1: Vec::new(),
        k2: Vec::new(),
        k3: Vec::new(),
        k2_alt: Vec::new(),
        b0: Vec::new(),
        b1: Vec::new(),
        b2: Vec::new(),
        b3: Vec::new(),
    };
    for &a in a_axis {
        let peak = sys.slope() * a;
        if peak < e2 {
            continue;
        }
        let nu = 2.0 * peak / t_ref;
        let g1 = LzGateParams::from_sweep(sys.tls()[0].delta, nu)?;
        let g2 = LzGateParams::from_sweep(sys.tls()[1].delta, nu)?;
        let (p1, q1) = (g1.p_lz, 1.0 - g1.p_lz);
        let (p2, q2) = (g2.p_lz, 1.0 - g2.p_lz);
        let k1 = e12 - (e1 + e2) * e12 / (2.0 * peak);
        let k2 = (peak - e2) * (peak - e2) / (2.0 * peak);
        out.amplitudes.push(a);
        out.k1.push(k1);
        out.k2.push(k2);
        out.k3.push(k1 + k2);
        out.k2_alt.push((peak - e12) * (peak - e12) / (2.0 * peak));
        out.b0.push(q1 * q1 + p1 * p1 * q2 * q2 + p1 * p1 * p2 * p2);
        out.b1.push(2.0 * p1 * q1 * q2);
        out.b2.push(2.0 * p1 * p1 * p2 * q2);
        out.b3.push(2.0 * p1 * p2 * q1);
    }
    Ok(out)
}

/// One spectral peak: the column's amplitude, the sub-bin refined angular
/// frequency, and the magnitude at the peak bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgePoint {
    pub amplitude: f64,
    pub k: f64,
    pub magnitude: f64,
}

/// Local spectral maxima above `threshold` times the column maximum, one
/// pass per amplitude column, with parabolic interpolation between bins.
/// Points come out sorted by amplitude, then by frequency.
pub fn extract_ridges(map: &FtMap, threshold: f64) -> Result<Vec<RidgePoint>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    let mags = map.magnitudes();
    let n_bins = mags.nrows();
    let bin = if map.k_axis.len() > 1 { map.k_axis[1] } else { 0.0 };
    let mut out = Vec::new();
    for (col, &amplitude) in map.a_axis.iter().enumerate() {
        let col_max = (0..n_bins).map(|m| mags[(m, col)]).fold(0.0_f64, f64::max);
        if col_max <= 0.0 {
            continue;
        }
        for m in 1..n_bins.saturating_sub(1) {
            let (lo, mid, hi) = (mags[(m - 1, col)], mags[(m, col)], mags[(m + 1, col)]);
            if mid > lo && mid >= hi && mid > threshold * col_max {
                // vertex of the parabola through the three bins; a flat top
                // has no curvature to interpolate, so it stays on the bin
                let denom = lo - 2.0 * mid + hi;
                let shift = if denom.abs() < 1e-12 * mid.max(1.0) {
                    0.0
                } else {
                    0.5 * (lo - hi) / denom
                };
                out.push(RidgePoint {
                    amplitude,
                    k: (m as f64 + shift) * bin,
                    magnitude: mid,
                });
            }
        }
    }
    Ok(out)
}
