//! Doublet readout and spectrum synthesis.
//!
//! A small-angle non-selective pulse converts population differences into
//! single-quantum line intensities. Linear mode reads the differences
//! directly; exact mode actually rotates the state and reads the
//! coherences, normalized by the equilibrium response so equilibrium reads
//! (1, 1) at any tip angle.
//!
//! Report order is fixed: the |1⟩↔|2⟩ line first, the |0⟩↔|1⟩ line second.
//! Positive intensity means the lower-index population exceeds the
//! higher-index one.

use serde_json::json;

use crate::error::SimError;
use crate::pulse::hard_pulse;
use crate::spin::{DeviationState, SpinSystem};

pub const DEFAULT_TIP_DEG: f64 = 5.0;
pub const DEFAULT_LINEWIDTH_HZ: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetectMode {
    #[default]
    Linear,
    Exact,
}

impl DetectMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectMode::Linear => "linear",
            DetectMode::Exact => "exact",
        }
    }
}

impl std::str::FromStr for DetectMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(DetectMode::Linear),
            "exact" => Ok(DetectMode::Exact),
            other => Err(format!(
                "unknown detection mode `{other}` (expected linear|exact)"
            )),
        }
    }
}

impl std::fmt::Display for DetectMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The pair of doublet line intensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubletReadout {
    /// Intensity of the |1⟩↔|2⟩ line.
    pub i12: f64,
    /// Intensity of the |0⟩↔|1⟩ line.
    pub i01: f64,
    pub mode: DetectMode,
    pub tip_rad: f64,
}

impl DoubletReadout {
    pub fn tip_deg(&self) -> f64 {
        self.tip_rad.to_degrees()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "i12": self.i12,
            "i01": self.i01,
            "mode": self.mode.as_str(),
            "tip_deg": self.tip_deg(),
        })
    }
}

/// (i12, i01) in the linear approximation: bare population differences.
pub fn linear_intensities(p: [f64; 3]) -> (f64, f64) {
    (p[1] - p[2], p[0] - p[1])
}

/// Read the doublet.
///
/// Exact mode applies a hard x-pulse of `tip_rad` and reads the imaginary
/// part of the two single-quantum coherences; the equilibrium state responds
/// with exactly sin(tip)/√2 on both lines, which sets the normalization.
pub fn detect(state: &DeviationState, tip_rad: f64, mode: DetectMode) -> DoubletReadout {
    assert!(
        tip_rad > 0.0 && tip_rad < std::f64::consts::FRAC_PI_2,
        "tip angle must lie in (0, pi/2)"
    );
    let (i12, i01) = match mode {
        DetectMode::Linear => linear_intensities(state.populations()),
        DetectMode::Exact => {
            let tipped = hard_pulse(tip_rad, 0.0).apply(state);
            let equilibrium_response = tip_rad.sin() / f64::sqrt(2.0);
            (
                tipped.matrix()[(1, 2)].im / equilibrium_response,
                tipped.matrix()[(0, 1)].im / equilibrium_response,
            )
        }
    };
    DoubletReadout {
        i12,
        i01,
        mode,
        tip_rad,
    }
}

/// A synthesized doublet spectrum: two absorptive Lorentzians at the
/// transition offsets, peak height equal to the line intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub points: Vec<(f64, f64)>,
    pub linewidth_hz: f64,
    pub sweep_hz: f64,
    pub n_points: usize,
}

impl SpectrumTrace {
    /// CSV with a `freq_hz,amplitude` header and fixed-precision values.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 24 + 20);
        out.push_str("freq_hz,amplitude\n");
        for (f, a) in &self.points {
            out.push_str(&format!("{f:.6},{a:.6}\n"));
        }
        out
    }
}

/// Render a readout as a frequency-domain trace over `[-sweep/2, sweep/2]`.
pub fn synth_spectrum(
    r: &DoubletReadout,
    sys: &SpinSystem,
    linewidth_hz: f64,
    sweep_hz: f64,
    n_points: usize,
) -> Result<SpectrumTrace, SimError> {
    if !linewidth_hz.is_finite() || linewidth_hz <= 0.0 {
        return Err(SimError::NonPositiveLinewidth(linewidth_hz));
    }
    if !sweep_hz.is_finite() || sweep_hz <= sys.splitting_hz() {
        return Err(SimError::SweepTooNarrow {
            sweep: sweep_hz,
            splitting: sys.splitting_hz(),
        });
    }
    if n_points < 2 {
        return Err(SimError::TooFewPoints(n_points));
    }

    let (f12, f01) = sys.transition_offsets();
    let hwhm = linewidth_hz / 2.0;
    let lorentz = |x: f64| hwhm * hwhm / (x * x + hwhm * hwhm);

    let mut points = Vec::with_capacity(n_points);
    let step = sweep_hz / (n_points - 1) as f64;
    for k in 0..n_points {
        let f = -sweep_hz / 2.0 + k as f64 * step;
        let a = r.i12 * lorentz(f - f12) + r.i01 * lorentz(f - f01);
        points.push((f, a));
    }
    Ok(SpectrumTrace {
        points,
        linewidth_hz,
        sweep_hz,
        n_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::crusher;
    use crate::sequences::{verification_targets, TargetId};
    use approx::assert_abs_diff_eq;

    fn tip5() -> f64 {
        DEFAULT_TIP_DEG.to_radians()
    }

    /// The ten caption states and their expected intensities.
    fn paper_states() -> Vec<([f64; 3], (f64, f64))> {
        vec![
            ([1.0, 0.0, -1.0], (1.0, 1.0)),   // equilibrium / U1
            ([1.0, -0.5, -0.5], (0.0, 1.5)),  // pps0
            ([-0.5, 1.0, -0.5], (1.5, -1.5)), // pps1
            ([0.5, 0.5, -1.0], (1.5, 0.0)),   // pps2m
            ([1.0, 0.0, -1.0], (1.0, 1.0)),   // U1
            ([1.0, -1.0, 0.0], (-1.0, 2.0)),  // U2
            ([0.0, 1.0, -1.0], (2.0, -1.0)),  // U3
            ([-1.0, 0.0, 1.0], (-1.0, -1.0)), // U4
            ([-1.0, 1.0, 0.0], (1.0, -2.0)),  // U5
            ([0.0, -1.0, 1.0], (-2.0, 1.0)),  // U6
        ]
    }

    #[test]
    fn linear_readout_reproduces_all_caption_ratios() {
        for (pops, expected) in paper_states() {
            let s = DeviationState::from_populations(pops).unwrap();
            let r = detect(&s, tip5(), DetectMode::Linear);
            assert_abs_diff_eq!(r.i12, expected.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r.i01, expected.1, epsilon = 1e-12);
        }
    }

    #[test]
    fn equilibrium_reads_one_one() {
        let r = detect(&DeviationState::equilibrium(), tip5(), DetectMode::Linear);
        assert_eq!((r.i12, r.i01), (1.0, 1.0));
        let r = detect(&DeviationState::equilibrium(), tip5(), DetectMode::Exact);
        assert_abs_diff_eq!(r.i12, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.i01, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_state_reads_zero() {
        let s = DeviationState::from_populations([0.0, 0.0, 0.0]).unwrap();
        let r = detect(&s, tip5(), DetectMode::Linear);
        assert_eq!((r.i12, r.i01), (0.0, 0.0));
    }

    #[test]
    fn exact_matches_linear_within_one_percent_on_paper_states() {
        for (pops, _) in paper_states() {
            let s = DeviationState::from_populations(pops).unwrap();
            let lin = detect(&s, tip5(), DetectMode::Linear);
            let ex = detect(&s, tip5(), DetectMode::Exact);
            for (e, l) in [(ex.i12, lin.i12), (ex.i01, lin.i01)] {
                let rel = (e - l).abs() / f64::max(1.0, l.abs());
                assert!(rel < 0.01, "exact {e} vs linear {l}");
            }
        }
    }

    #[test]
    fn exact_converges_to_linear_as_tip_shrinks() {
        let s = DeviationState::from_populations([0.5, 0.5, -1.0]).unwrap();
        let lin = detect(&s, 1e-3, DetectMode::Linear);
        let mut last = f64::INFINITY;
        for tip_deg in [10.0f64, 5.0, 2.5, 1.25] {
            let ex = detect(&s, tip_deg.to_radians(), DetectMode::Exact);
            let err = (ex.i12 - lin.i12).abs() + (ex.i01 - lin.i01).abs();
            assert!(err < last, "error must shrink with the tip angle");
            last = err;
        }
    }

    #[test]
    fn linear_detect_ignores_coherences() {
        let p = crate::pulse::ideal_selective(0, 1, 0.7, 0.3).unwrap();
        let s = p.apply(&DeviationState::equilibrium());
        let direct = detect(&s, tip5(), DetectMode::Linear);
        let crushed = detect(&crusher(&s), tip5(), DetectMode::Linear);
        assert_eq!((direct.i12, direct.i01), (crushed.i12, crushed.i01));
    }

    #[test]
    fn linear_formula_shift_invariant() {
        // Adding c to every population (an identity admixture) cancels in
        // the differences.
        let p = [0.4, -0.1, -0.3];
        let shifted = [p[0] + 7.5, p[1] + 7.5, p[2] + 7.5];
        let (a12, a01) = linear_intensities(p);
        let (b12, b01) = linear_intensities(shifted);
        assert_abs_diff_eq!(a12, b12, epsilon = 1e-12);
        assert_abs_diff_eq!(a01, b01, epsilon = 1e-12);
    }

    #[test]
    fn verification_targets_agree_with_linear_formula() {
        for t in verification_targets() {
            if let TargetId::Op(name) = t.id {
                let op = crate::sequences::NamedOperation::get(name);
                let pops = op.permutation.permute_populations([1.0, 0.0, -1.0]);
                assert_eq!(linear_intensities(pops), t.expected);
            }
        }
    }

    #[test]
    fn spectrum_peaks_at_transition_offsets() {
        let sys = SpinSystem::default();
        let r = detect(&DeviationState::equilibrium(), tip5(), DetectMode::Linear);
        let trace = synth_spectrum(&r, &sys, 5.0, 960.0, 1921).unwrap();
        // 0.5 Hz grid: exact points at ±120 Hz.
        let at = |freq: f64| {
            trace
                .points
                .iter()
                .find(|(f, _)| (f - freq).abs() < 1e-9)
                .map(|(_, a)| *a)
                .unwrap()
        };
        let p12 = at(-120.0);
        let p01 = at(120.0);
        assert!((p12 / p01 - 1.0).abs() < 0.01);
        assert!(p12 > 0.99 && p12 < 1.01);
    }

    #[test]
    fn pps0_spectrum_shows_single_line() {
        let sys = SpinSystem::default();
        let s = DeviationState::from_populations([1.0, -0.5, -0.5]).unwrap();
        let r = detect(&s, tip5(), DetectMode::Linear);
        let trace = synth_spectrum(&r, &sys, 5.0, 960.0, 1921).unwrap();
        let max12 = trace
            .points
            .iter()
            .filter(|(f, _)| *f < 0.0)
            .map(|(_, a)| a.abs())
            .fold(0.0, f64::max);
        let max01 = trace
            .points
            .iter()
            .filter(|(f, _)| *f > 0.0)
            .map(|(_, a)| a.abs())
            .fold(0.0, f64::max);
        assert!(max01 > 1.4);
        assert!(max12 < 0.05 * max01);
    }

    #[test]
    fn zero_readout_gives_flat_trace() {
        let sys = SpinSystem::default();
        let s = DeviationState::from_populations([0.0, 0.0, 0.0]).unwrap();
        let r = detect(&s, tip5(), DetectMode::Linear);
        let trace = synth_spectrum(&r, &sys, 5.0, 960.0, 101).unwrap();
        assert!(trace.points.iter().all(|(_, a)| *a == 0.0));
    }

    #[test]
    fn spectrum_validation_errors() {
        let sys = SpinSystem::default();
        let r = detect(&DeviationState::equilibrium(), tip5(), DetectMode::Linear);
        assert!(matches!(
            synth_spectrum(&r, &sys, 0.0, 960.0, 100),
            Err(SimError::NonPositiveLinewidth(_))
        ));
        assert!(matches!(
            synth_spectrum(&r, &sys, 5.0, 100.0, 100),
            Err(SimError::SweepTooNarrow { .. })
        ));
        assert!(matches!(
            synth_spectrum(&r, &sys, 5.0, 960.0, 1),
            Err(SimError::TooFewPoints(1))
        ));
    }

    #[test]
    fn csv_format() {
        let sys = SpinSystem::default();
        let r = detect(&DeviationState::equilibrium(), tip5(), DetectMode::Linear);
        let csv = synth_spectrum(&r, &sys, 5.0, 960.0, 3).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("freq_hz,amplitude"));
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 2);
        assert!(first.starts_with("-480.000000,"));
    }

    #[test]
    fn json_record_shape() {
        let r = detect(&DeviationState::equilibrium(), tip5(), DetectMode::Linear);
        let v = r.to_json();
        assert_eq!(v["mode"], "linear");
        assert_abs_diff_eq!(v["tip_deg"].as_f64().unwrap(), 5.0, epsilon = 1e-12);
        assert!(v["i12"].is_number() && v["i01"].is_number());
    }
}
