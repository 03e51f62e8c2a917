//! System and drive definitions shared by every engine: the qubit-plus-TLS
//! level ladder, the symmetric triangle drive, crossing-time geometry, and
//! the closed-form diabatic path phases the interference formulas consume.
//!
//! Units are fixed here once: energies and couplings are angular frequencies
//! in rad/ns (hbar = 1), times are in ns. Configuration layers quote linear
//! frequencies in MHz and convert on ingestion via [`rad_per_ns`].

use crate::error::{Error, Result};
use ndarray::Array2;

/// Relative slack under the drive peak below which an anticrossing counts as
/// traversed. A crossing at (or numerically at) the turning point is treated
/// as untraversed: the sweep rate vanishes there and the impulse picture has
/// no meaning for it.
pub const TRAVERSAL_REL_TOL: f64 = 1e-9;

/// Convert a linear frequency in MHz to an angular frequency in rad/ns.
pub fn rad_per_ns(mhz: f64) -> f64 {
    2.0 * std::f64::consts::PI * mhz * 1e-3
}

/// Inverse of [`rad_per_ns`], for reporting.
pub fn mhz(rad_ns: f64) -> f64 {
    rad_ns / (2.0 * std::f64::consts::PI * 1e-3)
}

/// Uniform grid of `n >= 2` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidAxis(format!("need at least 2 samples, got {n}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidAxis(format!("bad range [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    v[n - 1] = hi;
    Ok(v)
}

/// One two-level system: level splitting `epsilon` and qubit coupling
/// `delta` (half the anticrossing gap), both in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tls {
    pub epsilon: f64,
    pub delta: f64,
}

impl Tls {
    /// Build from linear frequencies in MHz.
    pub fn from_mhz(epsilon_mhz: f64, delta_mhz: f64) -> Self {
        Self {
            epsilon: rad_per_ns(epsilon_mhz),
            delta: rad_per_ns(delta_mhz),
        }
    }
}

/// Symmetric triangle drive: zero at t = 0, peak `amplitude` at half the
/// width, zero again at `width`. Amplitude is in drive units (the system
/// slope maps it onto detuning), width in ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrianglePulse {
    amplitude: f64,
    width: f64,
}

impl TrianglePulse {
    pub fn new(amplitude: f64, width: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidPulse(format!("amplitude must be positive, got {amplitude}")));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidPulse(format!("width must be positive, got {width}")));
        }
        Ok(Self { amplitude, width })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Drive value at `t`. Errors outside [0, width].
    pub fn value(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let (a, w) = (self.amplitude, self.width);
        Ok(if t <= 0.5 * w { a * (2.0 * t / w) } else { a * (2.0 - 2.0 * t / w) })
    }

    /// Integral of the drive from 0 to `t`, in drive units times ns.
    pub fn integral(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let (a, w) = (self.amplitude, self.width);
        Ok(if t <= 0.5 * w {
            a * t * t / w
        } else {
            // area of the full ramp-up plus the descending branch from w/2 to t
            a * (2.0 * t - t * t / w - 0.5 * w)
        })
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 || t > self.width {
            return Err(Error::TimeOutOfRange { t, width: self.width });
        }
        Ok(())
    }
}

/// Qubit coupled to a ladder of TLSs, with a dimensionless slope mapping the
/// drive signal onto qubit detuning. Splittings are strictly increasing;
/// the drive baseline sits at zero detuning, below the lowest splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    tls: Vec<Tls>,
    slope: f64,
}

impl SystemSpec {
    pub fn new(tls: Vec<Tls>, slope: f64) -> Result<Self> {
        if tls.is_empty() {
            return Err(Error::InvalidSystem("need at least one TLS".into()));
        }
        let mut prev = 0.0;
        for (i, t) in tls.iter().enumerate() {
            if !(t.epsilon.is_finite() && t.epsilon > prev) {
                return Err(Error::InvalidSystem(format!(
                    "splittings must be positive and strictly increasing; offender at index {i}"
                )));
            }
            if !(t.delta.is_finite() && t.delta >= 0.0) {
                return Err(Error::InvalidSystem(format!(
                    "coupling at index {i} must be finite and non-negative"
                )));
            }
            prev = t.epsilon;
        }
        if !(slope.is_finite() && slope > 0.0) {
            return Err(Error::InvalidSystem(format!("slope must be positive, got {slope}")));
        }
        Ok(Self { tls, slope })
    }

    pub fn tls(&self) -> &[Tls] {
        &self.tls
    }

    pub fn n_tls(&self) -> usize {
        self.tls.len()
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// Qubit detuning at `t`: slope times drive value.
    pub fn detuning(&self, pulse: &TrianglePulse, t: f64) -> Result<f64> {
        Ok(self.slope * pulse.value(t)?)
    }

    /// Peak detuning reached by the pulse.
    pub fn peak_detuning(&self, pulse: &TrianglePulse) -> f64 {
        self.slope * pulse.amplitude()
    }

    /// True when anticrossing `index` sits far enough under the peak to be
    /// swept through at finite rate.
    pub fn is_traversed(&self, pulse: &TrianglePulse, index: usize) -> bool {
        let peak = self.peak_detuning(pulse);
        self.tls[index].epsilon < peak * (1.0 - TRAVERSAL_REL_TOL)
    }

    /// Number of traversed anticrossings. Splittings are ordered, so these
    /// are always the first `m` entries of the TLS list.
    pub fn traversed_count(&self, pulse: &TrianglePulse) -> usize {
        self.tls
            .iter()
            .position(|t| t.epsilon >= self.peak_detuning(pulse) * (1.0 - TRAVERSAL_REL_TOL))
            .unwrap_or(self.tls.len())
    }

    /// Sweep rate at every anticrossing: the detuning ramp is linear, so the
    /// rate is the same 2sA/T on both passes.
    pub fn sweep_rate(&self, pulse: &TrianglePulse) -> f64 {
        2.0 * self.peak_detuning(pulse) / pulse.width()
    }

    /// Up- and down-ramp crossing times of anticrossing `index` (0-based,
    /// lowest splitting first). The two times are mirror images in the pulse
    /// midpoint.
    pub fn crossing_times(&self, pulse: &TrianglePulse, index: usize) -> Result<(f64, f64)> {
        if index >= self.tls.len() {
            return Err(Error::InvalidParameter(format!(
                "anticrossing index {index} out of range ({} TLSs)",
                self.tls.len()
            )));
        }
        if !self.is_traversed(pulse, index) {
            return Err(Error::NotTraversed { index });
        }
        let t_up = self.tls[index].epsilon * pulse.width() / (2.0 * self.peak_detuning(pulse));
        Ok((t_up, pulse.width() - t_up))
    }

    /// Number of interference paths at this cell: one per traversed
    /// anticrossing (the path that reflects there) plus the transmitted one.
    pub fn path_count(&self, pulse: &TrianglePulse) -> usize {
        self.traversed_count(pulse) + 1
    }

    /// Instantaneous diabatic energy of path `path` at `t`. Paths are
    /// 0-based: path p < m rides the qubit line until crossing p, sits on
    /// that TLS between the two passes, and rides the qubit line back; path
    /// p = m follows the qubit line through the whole pulse.
    pub fn path_energy(&self, pulse: &TrianglePulse, path: usize, t: f64) -> Result<f64> {
        let m = self.traversed_count(pulse);
        if path > m {
            return Err(Error::NoSuchPath { index: path, count: m + 1 });
        }
        if path == m {
            return self.detuning(pulse, t);
        }
        let (t_up, t_down) = self.crossing_times(pulse, path)?;
        if t >= t_up && t <= t_down {
            Ok(self.tls[path].epsilon)
        } else {
            self.detuning(pulse, t)
        }
    }

    /// Accumulated diabatic phase of every existing path over the full
    /// pulse, lowest path first (closed form; the geometry is piecewise
    /// linear). The transmitted path is last.
    pub fn path_phases(&self, pulse: &TrianglePulse) -> Vec<f64> {
        let m = self.traversed_count(pulse);
        let peak = self.peak_detuning(pulse);
        let w = pulse.width();
        let mut phases: Vec<f64> = (0..m)
            .map(|p| {
                let e = self.tls[p].epsilon;
                w * (e - e * e / (2.0 * peak))
            })
            .collect();
        phases.push(0.5 * w * peak);
        phases
    }
}

/// Return-probability map over the (pulse width, drive amplitude) plane.
/// Rows follow the amplitude axis, columns the width axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternGrid {
    values: Array2<f64>,
    t_axis: Vec<f64>,
    a_axis: Vec<f64>,
}

impl PatternGrid {
    /// Probabilities may overshoot [0, 1] by integrator rounding; anything
    /// within `1e-6` is clamped, anything worse is rejected.
    pub fn new(values: Array2<f64>, t_axis: Vec<f64>, a_axis: Vec<f64>) -> Result<Self> {
        check_axis("pulse-width axis", &t_axis, true)?;
        check_axis("amplitude axis", &a_axis, true)?;
        if values.nrows() != a_axis.len() || values.ncols() != t_axis.len() {
            return Err(Error::InvalidAxis(format!(
                "value shape {:?} does not match axes ({}, {})",
                values.dim(),
                a_axis.len(),
                t_axis.len()
            )));
        }
        let mut values = values;
        for v in values.iter_mut() {
            if !(-1e-6..=1.0 + 1e-6).contains(v) {
                return Err(Error::InvalidParameter(format!("probability {v} outside [0, 1]")));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(Self { values, t_axis, a_axis })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn t_axis(&self) -> &[f64] {
        &self.t_axis
    }

    pub fn a_axis(&self) -> &[f64] {
        &self.a_axis
    }
}

pub(crate) fn check_axis(name: &str, axis: &[f64], require_positive: bool) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidAxis(format!("{name} is empty")));
    }
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidAxis(format!("{name} has non-finite entries")));
    }
    if require_positive && axis[0] <= 0.0 {
        return Err(Error::InvalidAxis(format!("{name} must be positive")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidAxis(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sys2(eps: [f64; 2], delta: [f64; 2], slope: f64) -> SystemSpec {
        SystemSpec::new(
            vec![
                Tls { epsilon: eps[0], delta: delta[0] },
                Tls { epsilon: eps[1], delta: delta[1] },
            ],
            slope,
        )
        .unwrap()
    }

    #[test]
    fn drive_value_on_descending_branch() {
        let p = TrianglePulse::new(2.0, 8.0).unwrap();
        assert_eq!(p.value(6.0).unwrap(), 1.0);
        assert_eq!(p.value(0.0).unwrap(), 0.0);
        assert_eq!(p.value(4.0).unwrap(), 2.0);
        assert_eq!(p.value(8.0).unwrap(), 0.0);
    }

    #[test]
    fn drive_is_symmetric_about_midpoint() {
        let p = TrianglePulse::new(1.7, 13.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let t = rng.random::<f64>() * 13.0;
            let v = p.value(t).unwrap();
            let v_mirror = p.value(13.0 - t).unwrap();
            assert!((v - v_mirror).abs() < 1e-12 * p.amplitude(), "t={t}: {v} vs {v_mirror}");
            assert!(v >= 0.0 && v <= p.amplitude());
        }
    }

    #[test]
    fn drive_rejects_times_outside_window() {
        let p = TrianglePulse::new(1.0, 4.0).unwrap();
        assert!(matches!(p.value(-0.1), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(p.value(4.1), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn drive_integral_matches_quadrature() {
        let p = TrianglePulse::new(2.3, 9.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let t = rng.random::<f64>() * 9.0;
            // midpoint rule on a fine grid as an independent check
            let n = 20_000;
            let h = t / n as f64;
            let quad: f64 = (0..n).map(|i| p.value((i as f64 + 0.5) * h).unwrap() * h).sum();
            let exact = p.integral(t).unwrap();
            assert!((quad - exact).abs() < 1e-6, "t={t}: {quad} vs {exact}");
        }
        assert!((p.integral(9.0).unwrap() - 0.5 * 2.3 * 9.0).abs() < 1e-12);
    }

    #[test]
    fn pulse_construction_rejects_bad_shapes() {
        assert!(TrianglePulse::new(0.0, 1.0).is_err());
        assert!(TrianglePulse::new(-1.0, 1.0).is_err());
        assert!(TrianglePulse::new(1.0, 0.0).is_err());
        assert!(TrianglePulse::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn system_construction_enforces_ordering() {
        let t = |e: f64| Tls { epsilon: e, delta: 0.1 };
        assert!(SystemSpec::new(vec![], 1.0).is_err());
        assert!(SystemSpec::new(vec![t(1.0), t(1.0)], 1.0).is_err());
        assert!(SystemSpec::new(vec![t(2.0), t(1.0)], 1.0).is_err());
        assert!(SystemSpec::new(vec![t(-1.0)], 1.0).is_err());
        assert!(SystemSpec::new(vec![t(1.0)], 0.0).is_err());
        assert!(SystemSpec::new(vec![t(1.0), t(2.0)], 1.0).is_ok());
        let bad = SystemSpec::new(vec![Tls { epsilon: 1.0, delta: -0.1 }], 1.0);
        assert!(bad.is_err());
    }

    #[test]
    fn crossing_times_mirror_the_pulse_midpoint() {
        let sys = SystemSpec::new(vec![Tls { epsilon: 1.0, delta: 0.1 }], 1.0).unwrap();
        let p = TrianglePulse::new(4.0, 8.0).unwrap();
        assert_eq!(sys.crossing_times(&p, 0).unwrap(), (1.0, 7.0));

        let sys = sys2([1.0, 2.5], [0.1, 0.1], 1.3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = 2.0 + 4.0 * rng.random::<f64>();
            let w = 0.5 + 20.0 * rng.random::<f64>();
            let p = TrianglePulse::new(a, w).unwrap();
            for idx in 0..2 {
                if !sys.is_traversed(&p, idx) {
                    continue;
                }
                let (up, down) = sys.crossing_times(&p, idx).unwrap();
                assert!((up + down - w).abs() < 1e-12 * w);
                // the drive actually sits at the crossing there
                let x = sys.detuning(&p, up).unwrap();
                assert!((x - sys.tls()[idx].epsilon).abs() < 1e-9 * x.max(1.0));
            }
            // nesting: higher anticrossings are crossed later going out
            if sys.is_traversed(&p, 1) {
                let (u0, d0) = sys.crossing_times(&p, 0).unwrap();
                let (u1, d1) = sys.crossing_times(&p, 1).unwrap();
                assert!(u0 < u1 && u1 < d1 && d1 < d0);
            }
        }
    }

    #[test]
    fn turning_point_counts_as_untraversed() {
        let make = |eps: f64| SystemSpec::new(vec![Tls { epsilon: eps, delta: 0.1 }], 1.0).unwrap();
        let p = TrianglePulse::new(2.0, 10.0).unwrap();
        assert!(matches!(
            make(2.0).crossing_times(&p, 0),
            Err(Error::NotTraversed { index: 0 })
        ));
        // inside the tolerance band: still excluded
        assert!(!make(2.0 * (1.0 - 1e-12)).is_traversed(&p, 0));
        // clearly below the peak: traversed
        assert!(make(2.0 * (1.0 - 1e-6)).is_traversed(&p, 0));
        assert_eq!(make(1.0).traversed_count(&p), 1);
        assert_eq!(make(2.5).traversed_count(&p), 0);
    }

    #[test]
    fn path_energy_is_continuous_and_flat_between_passes() {
        let sys = sys2([1.0, 2.0], [0.05, 0.05], 1.0);
        let p = TrianglePulse::new(3.0, 12.0).unwrap();
        let (up, down) = sys.crossing_times(&p, 0).unwrap();
        let h = 1e-9;
        for path in 0..sys.path_count(&p) {
            let before = sys.path_energy(&p, path, up - h).unwrap();
            let at = sys.path_energy(&p, path, up).unwrap();
            assert!((before - at).abs() < 1e-6, "path {path} jumps at the crossing");
        }
        // path 0 is pinned to its TLS between the passes
        let mid = 0.5 * (up + down);
        assert_eq!(sys.path_energy(&p, 0, mid).unwrap(), 1.0);
        // the transmitted path follows the drive over the peak
        assert_eq!(sys.path_energy(&p, 2, 6.0).unwrap(), 3.0);
        assert!(matches!(
            sys.path_energy(&p, 3, 1.0),
            Err(Error::NoSuchPath { index: 3, count: 3 })
        ));
    }

    #[test]
    fn path_phases_match_quadrature_of_path_energy() {
        let sys = sys2([1.1, 2.3], [0.05, 0.08], 1.2);
        let p = TrianglePulse::new(2.5, 14.0).unwrap();
        let phases = sys.path_phases(&p);
        assert_eq!(phases.len(), sys.path_count(&p));
        let n = 400_000;
        let h = p.width() / n as f64;
        for (path, phi) in phases.iter().enumerate() {
            let quad: f64 = (0..n)
                .map(|i| sys.path_energy(&p, path, (i as f64 + 0.5) * h).unwrap() * h)
                .sum();
            assert!((quad - phi).abs() < 1e-5, "path {path}: {quad} vs {phi}");
        }
    }

    #[test]
    fn phase_difference_slope_matches_closed_form() {
        // the width-derivative of the first phase difference is
        // e12 * (1 - (e1 + e2) / (2 s A)); phases are affine in width, so a
        // central difference recovers it to rounding
        let sys = sys2([1.0, 2.2], [0.05, 0.05], 1.0);
        let peak = 3.4_f64;
        let slope_expected = (2.2 - 1.0) * (1.0 - (1.0 + 2.2) / (2.0 * peak));
        let dphi = |w: f64| {
            let p = TrianglePulse::new(peak, w).unwrap();
            let ph = sys.path_phases(&p);
            ph[1] - ph[0]
        };
        let (w, h) = (20.0, 0.5);
        let slope = (dphi(w + h) - dphi(w - h)) / (2.0 * h);
        assert!((slope - slope_expected).abs() < 1e-9, "{slope} vs {slope_expected}");
        // and the second difference: (sA - e2)^2 / (2 s A)
        let sys_paths = |w: f64| {
            let p = TrianglePulse::new(peak, w).unwrap();
            let ph = sys.path_phases(&p);
            ph[2] - ph[1]
        };
        let slope2 = (sys_paths(w + h) - sys_paths(w - h)) / (2.0 * h);
        let expected2 = (peak - 2.2_f64).powi(2) / (2.0 * peak);
        assert!((slope2 - expected2).abs() < 1e-9, "{slope2} vs {expected2}");
    }

    #[test]
    fn unit_conversion_round_trips() {
        assert!((rad_per_ns(200.0) - 2.0 * std::f64::consts::PI * 0.2).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let f = rng.random::<f64>() * 1e3;
            assert!((mhz(rad_per_ns(f)) - f).abs() < 1e-9 * f.max(1.0));
        }
    }

    #[test]
    fn linspace_hits_both_endpoints() {
        let v = linspace(1.0, 100.0, 200).unwrap();
        assert_eq!(v.len(), 200);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[199], 100.0);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert!(linspace(1.0, 1.0, 10).is_err());
        assert!(linspace(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn pattern_grid_validates_and_clamps() {
        let t = vec![1.0, 2.0, 3.0];
        let a = vec![0.5, 1.0];
        let vals = Array2::from_shape_vec((2, 3), vec![0.1, 0.2, 0.3, 1.0 + 1e-9, 0.5, -1e-9]).unwrap();
        let g = PatternGrid::new(vals, t.clone(), a.clone()).unwrap();
        assert_eq!(g.values()[[1, 0]], 1.0);
        assert_eq!(g.values()[[1, 2]], 0.0);

        let bad = Array2::from_shape_vec((2, 3), vec![0.1, 0.2, 0.3, 1.5, 0.5, 0.0]).unwrap();
        assert!(PatternGrid::new(bad, t.clone(), a.clone()).is_err());
        let wrong_shape = Array2::zeros((3, 3));
        assert!(PatternGrid::new(wrong_shape, t, a).is_err());
    }
}
