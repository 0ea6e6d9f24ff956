//! Spin-1 operator algebra, quadrupolar Hamiltonian and deviation states.
//!
//! Basis convention: the logical labels |0⟩, |1⟩, |2⟩ map to magnetic quantum
//! numbers m = +1, 0, -1, so Iz = diag(1, 0, -1). Everything lives in the
//! rotating frame at the carrier: the Zeeman term is gone and all frequencies
//! are offsets.

use crate::error::SimError;
use crate::linalg::{self, cr, Mat3, C64};

/// Number of levels of the qutrit.
pub const LEVELS: usize = 3;

/// Magnetic quantum number of each logical level |0⟩, |1⟩, |2⟩.
pub const BASIS_M: [f64; 3] = [1.0, 0.0, -1.0];

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// The spin-1 angular momentum matrices in the |0⟩,|1⟩,|2⟩ basis
/// (dimensionless units).
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub iz: Mat3,
    pub ix: Mat3,
    pub iy: Mat3,
    /// I(I+1) times identity, with I = 1.
    pub i_squared: Mat3,
}

impl SpinOperators {
    pub fn spin1() -> Self {
        let iz = Mat3::from_diagonal(&nalgebra::Vector3::new(cr(1.0), cr(0.0), cr(-1.0)));
        let s = FRAC_1_SQRT_2;
        let ix = Mat3::new(
            cr(0.0),
            cr(s),
            cr(0.0),
            cr(s),
            cr(0.0),
            cr(s),
            cr(0.0),
            cr(s),
            cr(0.0),
        );
        let iy = Mat3::new(
            cr(0.0),
            C64::new(0.0, -s),
            cr(0.0),
            C64::new(0.0, s),
            cr(0.0),
            C64::new(0.0, -s),
            cr(0.0),
            C64::new(0.0, s),
            cr(0.0),
        );
        let i_squared = Mat3::identity() * cr(2.0);
        Self {
            iz,
            ix,
            iy,
            i_squared,
        }
    }

    /// Ix cos(phi) + Iy sin(phi): generator of a hard pulse of phase `phi`.
    pub fn transverse(&self, phase: f64) -> Mat3 {
        self.ix * cr(phase.cos()) + self.iy * cr(phase.sin())
    }
}

/// Physical parameters of the oriented spin-1 system.
///
/// Only the doublet splitting enters the dynamics; the effective quadrupolar
/// coupling is derived from it as splitting/6. Carrier frequency and field
/// are bookkeeping for reports and play no computational role.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    splitting_hz: f64,
    pub carrier_mhz: Option<f64>,
    pub field_tesla: Option<f64>,
}

impl Default for SpinSystem {
    fn default() -> Self {
        // The deuterium doublet of the reference sample.
        Self::from_splitting_hz(240.0).unwrap()
    }
}

impl SpinSystem {
    pub fn from_splitting_hz(splitting_hz: f64) -> Result<Self, SimError> {
        if !splitting_hz.is_finite() || splitting_hz <= 0.0 {
            return Err(SimError::NonPositiveSplitting(splitting_hz));
        }
        Ok(Self {
            splitting_hz,
            carrier_mhz: None,
            field_tesla: None,
        })
    }

    /// Parse a `key = value` config file body. `#` starts a comment.
    ///
    /// Recognized keys: `splitting_hz` (default 240), `carrier_mhz`,
    /// `field_tesla`. The runtime keys `mode` and `dt` are accepted here and
    /// left to the command-line layer; they are not system parameters.
    pub fn from_config_str(text: &str) -> Result<Self, SimError> {
        let mut splitting_hz = 240.0;
        let mut carrier_mhz = None;
        let mut field_tesla = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(SimError::Config {
                    line: line_no,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if matches!(key, "mode" | "dt") {
                continue;
            }
            let parsed: f64 = value.parse().map_err(|_| SimError::Config {
                line: line_no,
                message: format!("`{value}` is not a number"),
            })?;
            match key {
                "splitting_hz" => splitting_hz = parsed,
                "carrier_mhz" => carrier_mhz = Some(parsed),
                "field_tesla" => field_tesla = Some(parsed),
                other => {
                    return Err(SimError::Config {
                        line: line_no,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        let mut sys = Self::from_splitting_hz(splitting_hz).map_err(|e| SimError::Config {
            line: 0,
            message: e.to_string(),
        })?;
        sys.carrier_mhz = carrier_mhz;
        sys.field_tesla = field_tesla;
        Ok(sys)
    }

    /// Doublet separation in Hz.
    pub fn splitting_hz(&self) -> f64 {
        self.splitting_hz
    }

    /// Effective quadrupolar coupling in Hz; the splitting is 6 times this.
    pub fn lambda_hz(&self) -> f64 {
        self.splitting_hz / 6.0
    }

    /// Rotating-frame Hamiltonian 2π·Λ·(3Iz² − I²) in rad/s.
    ///
    /// Diagonal with level energies 2πΛ(3m² − 2): diag(2πΛ, −4πΛ, 2πΛ).
    pub fn hamiltonian(&self) -> Mat3 {
        let lam = self.lambda_hz();
        let w = 2.0 * std::f64::consts::PI * lam;
        Mat3::from_diagonal(&nalgebra::Vector3::new(cr(w), cr(-2.0 * w), cr(w)))
    }

    /// Rotating-frame offsets (in Hz) of the two single-quantum lines,
    /// as `(freq_12, freq_01)` for the |1⟩↔|2⟩ and |0⟩↔|1⟩ transitions.
    ///
    /// The sign assignment (|1⟩↔|2⟩ at −3Λ, |0⟩↔|1⟩ at +3Λ) is a convention;
    /// only the report order of the two lines is observable.
    pub fn transition_offsets(&self) -> (f64, f64) {
        let lam = self.lambda_hz();
        (-3.0 * lam, 3.0 * lam)
    }

    /// Offset (Hz) of the transition between adjacent levels `lo` and `lo+1`.
    pub fn offset_of_transition(&self, lo: usize) -> f64 {
        let (f12, f01) = self.transition_offsets();
        match lo {
            0 => f01,
            _ => f12,
        }
    }

    /// The thermal-equilibrium deviation state, populations diag(1, 0, −1).
    pub fn equilibrium_deviation(&self) -> DeviationState {
        DeviationState::equilibrium()
    }
}

/// Traceless Hermitian 3x3 deviation density matrix.
///
/// Normalized so the equilibrium populations are (1, 0, −1); the identity
/// part of the full density matrix is never represented.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationState {
    m: Mat3,
}

/// Validation tolerance for Hermiticity and tracelessness.
pub const STATE_TOL: f64 = 1e-12;

impl DeviationState {
    /// Equilibrium deviation populations under the high-field
    /// high-temperature approximation: proportional to m.
    pub fn equilibrium() -> Self {
        Self {
            m: Mat3::from_diagonal(&nalgebra::Vector3::new(cr(1.0), cr(0.0), cr(-1.0))),
        }
    }

    pub fn from_matrix(m: Mat3) -> Result<Self, SimError> {
        let h = linalg::hermiticity_defect(&m);
        if h > STATE_TOL {
            return Err(SimError::NotHermitian(h));
        }
        let t = linalg::trace_defect(&m);
        if t > STATE_TOL {
            return Err(SimError::NotTraceless(t));
        }
        Ok(Self { m })
    }

    /// Diagonal state from a population triple; must sum to zero.
    pub fn from_populations(p: [f64; 3]) -> Result<Self, SimError> {
        let tr = p.iter().sum::<f64>();
        if tr.abs() > STATE_TOL {
            return Err(SimError::NotTraceless(tr.abs()));
        }
        Ok(Self {
            m: Mat3::from_diagonal(&nalgebra::Vector3::new(cr(p[0]), cr(p[1]), cr(p[2]))),
        })
    }

    /// Wrap a matrix that is Hermitian and traceless by construction
    /// (conjugation by a unitary, crushing, ...).
    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Self { m }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    /// Diagonal populations (p0, p1, p2).
    pub fn populations(&self) -> [f64; 3] {
        [self.m[(0, 0)].re, self.m[(1, 1)].re, self.m[(2, 2)].re]
    }

    /// p_lo − p_{lo+1}, the population difference across one transition.
    pub fn population_difference(&self, lo: usize) -> f64 {
        let p = self.populations();
        p[lo] - p[lo + 1]
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.m)
    }

    pub fn trace_defect(&self) -> f64 {
        linalg::trace_defect(&self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, exp_neg_i_ht, max_abs};
    use approx::assert_abs_diff_eq;

    const TWO_PI: f64 = std::f64::consts::TAU;

    fn sys40() -> SpinSystem {
        // Λ = 40 Hz
        SpinSystem::from_splitting_hz(240.0).unwrap()
    }

    #[test]
    fn angular_momentum_commutators() {
        let ops = SpinOperators::spin1();
        let i = C64::i();
        assert!(max_abs(&(commutator(&ops.iz, &ops.ix) - ops.iy * i)) < 1e-12);
        assert!(max_abs(&(commutator(&ops.ix, &ops.iy) - ops.iz * i)) < 1e-12);
        assert!(max_abs(&(commutator(&ops.iy, &ops.iz) - ops.ix * i)) < 1e-12);
    }

    #[test]
    fn iz_is_diagonal_in_basis_order() {
        let ops = SpinOperators::spin1();
        for (k, m) in BASIS_M.iter().enumerate() {
            assert_abs_diff_eq!(ops.iz[(k, k)].re, *m);
        }
    }

    #[test]
    fn i_squared_is_twice_identity() {
        let ops = SpinOperators::spin1();
        let sum = ops.ix * ops.ix + ops.iy * ops.iy + ops.iz * ops.iz;
        assert!(max_abs(&(sum - ops.i_squared)) < 1e-12);
        assert!(max_abs(&(ops.i_squared - Mat3::identity() * cr(2.0))) < 1e-14);
    }

    #[test]
    fn hamiltonian_matches_level_energies() {
        // diag(2πΛ, −4πΛ, 2πΛ) for Λ = 40 Hz.
        let h = sys40().hamiltonian();
        assert_abs_diff_eq!(h[(0, 0)].re, TWO_PI * 40.0, epsilon = 1e-9);
        assert_abs_diff_eq!(h[(1, 1)].re, -TWO_PI * 80.0, epsilon = 1e-9);
        assert_abs_diff_eq!(h[(2, 2)].re, TWO_PI * 40.0, epsilon = 1e-9);
        for r in 0..3 {
            for c in 0..3 {
                if r != c {
                    assert_eq!(h[(r, c)], cr(0.0));
                }
            }
        }
    }

    #[test]
    fn hamiltonian_from_operator_formula() {
        let ops = SpinOperators::spin1();
        let sys = sys40();
        let w = TWO_PI * sys.lambda_hz();
        let built = (ops.iz * ops.iz * cr(3.0) - ops.i_squared) * cr(w);
        assert!(max_abs(&(built - sys.hamiltonian())) < 1e-9);
    }

    #[test]
    fn zero_coupling_is_degenerate() {
        let sys = SpinSystem::from_splitting_hz(1e-300);
        assert!(sys.is_err() || sys.unwrap().lambda_hz() > 0.0);
        // The isotropic limit is only reachable as Λ → 0; offsets collapse.
        let tiny = SpinSystem::from_splitting_hz(1e-9).unwrap();
        let (f12, f01) = tiny.transition_offsets();
        assert!(f12.abs() < 1e-9 && f01.abs() < 1e-9);
    }

    #[test]
    fn transition_offsets_and_splitting() {
        let (f12, f01) = sys40().transition_offsets();
        assert_abs_diff_eq!(f12, -120.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f01, 120.0, epsilon = 1e-12);
        assert_abs_diff_eq!((f12 - f01).abs(), 240.0, epsilon = 1e-12);
    }

    #[test]
    fn offsets_match_hamiltonian_eigenvalue_gaps() {
        let sys = sys40();
        let h = sys.hamiltonian();
        let hz = |k: usize| h[(k, k)].re / TWO_PI;
        assert_abs_diff_eq!(hz(1) - hz(2), sys.transition_offsets().0, epsilon = 1e-9);
        assert_abs_diff_eq!(hz(0) - hz(1), sys.transition_offsets().1, epsilon = 1e-9);
    }

    #[test]
    fn hamiltonian_commutes_with_iz() {
        let ops = SpinOperators::spin1();
        let h = sys40().hamiltonian();
        assert!(max_abs(&commutator(&h, &ops.iz)) < 1e-12);
    }

    #[test]
    fn equilibrium_is_diag_1_0_m1_and_traceless() {
        let eq = DeviationState::equilibrium();
        assert_eq!(eq.populations(), [1.0, 0.0, -1.0]);
        assert!(eq.trace_defect() < 1e-15);
        assert!(eq.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn equilibrium_fixed_under_free_evolution() {
        let sys = sys40();
        let u = exp_neg_i_ht(&sys.hamiltonian(), 0.0123);
        let eq = DeviationState::equilibrium();
        let evolved = u * eq.matrix() * u.adjoint();
        assert!(max_abs(&(evolved - eq.matrix())) < 1e-12);
    }

    #[test]
    fn rejects_bad_splitting() {
        assert!(matches!(
            SpinSystem::from_splitting_hz(0.0),
            Err(SimError::NonPositiveSplitting(_))
        ));
        assert!(SpinSystem::from_splitting_hz(-240.0).is_err());
        assert!(SpinSystem::from_splitting_hz(f64::NAN).is_err());
    }

    #[test]
    fn config_round_trip() {
        let sys = SpinSystem::from_config_str(
            "# sample\nsplitting_hz = 180\ncarrier_mhz = 76.75 # deuterium\n",
        )
        .unwrap();
        assert_abs_diff_eq!(sys.splitting_hz(), 180.0);
        assert_abs_diff_eq!(sys.lambda_hz(), 30.0);
        assert_eq!(sys.carrier_mhz, Some(76.75));
        assert_eq!(sys.field_tesla, None);
    }

    #[test]
    fn config_defaults_and_errors() {
        let sys = SpinSystem::from_config_str("").unwrap();
        assert_abs_diff_eq!(sys.splitting_hz(), 240.0);
        assert!(matches!(
            SpinSystem::from_config_str("splitting = 240"),
            Err(SimError::Config { line: 1, .. })
        ));
        assert!(matches!(
            SpinSystem::from_config_str("\nsplitting_hz = fast"),
            Err(SimError::Config { line: 2, .. })
        ));
        assert!(SpinSystem::from_config_str("splitting_hz = -1").is_err());
    }

    #[test]
    fn state_validation() {
        assert!(DeviationState::from_populations([1.0, 0.0, -1.0]).is_ok());
        assert!(matches!(
            DeviationState::from_populations([1.0, 0.0, 0.0]),
            Err(SimError::NotTraceless(_))
        ));
        let mut m = Mat3::zeros();
        m[(0, 1)] = cr(1.0); // not Hermitian
        assert!(matches!(
            DeviationState::from_matrix(m),
            Err(SimError::NotHermitian(_))
        ));
    }

    proptest::proptest! {
        #[test]
        fn offsets_distinct_and_symmetric(splitting in 1e-3..1e6f64) {
            let sys = SpinSystem::from_splitting_hz(splitting).unwrap();
            let (f12, f01) = sys.transition_offsets();
            proptest::prop_assert!(f12 != f01);
            proptest::prop_assert!((f12 + f01).abs() <= 1e-9 * splitting);
        }
    }
}
