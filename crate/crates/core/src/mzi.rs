//! Mach-Zehnder interferometer observables.
//!
//! One output port of an ideal 50/50 recombiner is detected. Every phase
//! offset (beamsplitter convention, marginal overlap phase, accumulated path
//! phase) is collapsed into a single fringe offset `phi0`, so the detection
//! probability reads
//!
//! ```text
//! P(phi) = [N + 2 |c1 c2| gamma cos(phi + phi0)] / (2 N),   N = |c1|^2 + |c2|^2
//! ```
//!
//! For lossy states everything is conditional on photon survival, which is
//! what keeps the duality ellipse exact after a loss channel.

use crate::error::{check_unit, Error, Result};
use crate::states::TwoPathState;
use crate::ComplexAmp;

/// Below this coherence the duality residual uses its analytic `gamma -> 0`
/// limit.
pub const GAMMA_EPS: f64 = 1e-9;

/// Anything that looks like `c1 |1>|M1> + e^{-i phi} c2 |2>|M2>`, possibly
/// with `|c1|^2 + |c2|^2 < 1`.
pub trait TwoPath {
    fn amplitudes(&self) -> (ComplexAmp, ComplexAmp);
    fn overlap(&self) -> ComplexAmp;
    fn phase(&self) -> f64;

    fn survival_norm(&self) -> f64 {
        let (c1, c2) = self.amplitudes();
        c1.norm_sqr() + c2.norm_sqr()
    }
}

impl TwoPath for TwoPathState {
    fn amplitudes(&self) -> (ComplexAmp, ComplexAmp) {
        (self.c1(), self.c2())
    }

    fn overlap(&self) -> ComplexAmp {
        self.marginal_overlap()
    }

    fn phase(&self) -> f64 {
        self.extra_phase()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arm {
    Arm1,
    Arm2,
}

/// Photon loss on one arm: `|k>|M_k> -> a |k>|M_k> + b |l>|M_l>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossChannel {
    arm: Arm,
    survival_amplitude: f64,
}

impl LossChannel {
    pub fn new(arm: Arm, survival_amplitude: f64) -> Result<Self> {
        check_unit("survival_amplitude", survival_amplitude)?;
        Ok(Self {
            arm,
            survival_amplitude,
        })
    }

    pub fn arm(&self) -> Arm {
        self.arm
    }

    pub fn survival_amplitude(&self) -> f64 {
        self.survival_amplitude
    }

    /// `|b|^2 = 1 - a^2`.
    pub fn loss_probability(&self) -> f64 {
        1.0 - self.survival_amplitude * self.survival_amplitude
    }
}

/// Surviving part of a two-path state after a [`LossChannel`]; the lost
/// photon mode never re-interferes and is only visible as missing norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossyTwoPathState {
    c1: ComplexAmp,
    c2: ComplexAmp,
    overlap: ComplexAmp,
    extra_phase: f64,
}

impl LossyTwoPathState {
    pub fn survival_norm(&self) -> f64 {
        TwoPath::survival_norm(self)
    }

    /// Conditions on survival and returns the equivalent normalized state.
    pub fn renormalized(&self) -> TwoPathState {
        let norm = self.survival_norm();
        let p1 = (self.c1.norm_sqr() / norm).clamp(0.0, 1.0);
        let gamma = self.overlap.norm().min(1.0);
        // c1, c2 phases fold into the extra phase
        let phase = self.extra_phase - (self.c1 * self.c2.conj()).arg();
        TwoPathState::new(p1, gamma, self.overlap.arg(), phase)
            .expect("renormalized parameters are in range")
    }
}

impl TwoPath for LossyTwoPathState {
    fn amplitudes(&self) -> (ComplexAmp, ComplexAmp) {
        (self.c1, self.c2)
    }

    fn overlap(&self) -> ComplexAmp {
        self.overlap
    }

    fn phase(&self) -> f64 {
        self.extra_phase
    }
}

/// Applies `c_k -> a c_k` on the lossy arm. The marginal overlap is
/// untouched.
pub fn apply_loss(s: &TwoPathState, channel: LossChannel) -> Result<LossyTwoPathState> {
    let a = channel.survival_amplitude;
    let (mut c1, mut c2) = (s.c1(), s.c2());
    match channel.arm {
        Arm::Arm1 => c1 *= a,
        Arm::Arm2 => c2 *= a,
    }
    if c1.norm_sqr() + c2.norm_sqr() == 0.0 {
        return Err(Error::NoSurvivingPhoton);
    }
    Ok(LossyTwoPathState {
        c1,
        c2,
        overlap: s.marginal_overlap(),
        extra_phase: s.extra_phase(),
    })
}

/// Unconditional probabilities of the two recombiner output ports; they sum
/// to the survival norm.
pub fn port_probabilities<S: TwoPath + ?Sized>(s: &S, phi: f64) -> (f64, f64) {
    let (c1, c2) = s.amplitudes();
    let norm = c1.norm_sqr() + c2.norm_sqr();
    let coherence = c1 * c2.conj() * s.overlap().conj();
    let fringe = 2.0 * (coherence * ComplexAmp::from_polar(1.0, phi + s.phase())).re;
    (0.5 * (norm + fringe), 0.5 * (norm - fringe))
}

/// Detection probability at the monitored port, conditional on survival.
pub fn detection_probability<S: TwoPath + ?Sized>(s: &S, phi: f64) -> f64 {
    let (detected, _) = port_probabilities(s, phi);
    (detected / s.survival_norm()).clamp(0.0, 1.0)
}

/// Fringe offset `phi0` such that the detected port peaks at `phi = -phi0`.
pub fn fringe_offset<S: TwoPath + ?Sized>(s: &S) -> f64 {
    let (c1, c2) = s.amplitudes();
    (c1 * c2.conj() * s.overlap().conj()).arg() + s.phase()
}

/// `V = 2 |c1 c2| gamma / N`.
pub fn visibility<S: TwoPath + ?Sized>(s: &S) -> f64 {
    let (c1, c2) = s.amplitudes();
    (2.0 * c1.norm() * c2.norm() * s.overlap().norm() / s.survival_norm()).min(1.0)
}

/// `D = ||c1|^2 - |c2|^2| / N`.
pub fn predictability<S: TwoPath + ?Sized>(s: &S) -> f64 {
    let (c1, c2) = s.amplitudes();
    ((c1.norm_sqr() - c2.norm_sqr()).abs() / s.survival_norm()).min(1.0)
}

/// `(V / gamma)^2 + D^2 - 1`, which vanishes for every state.
pub fn duality_residual<S: TwoPath + ?Sized>(s: &S) -> f64 {
    let gamma = s.overlap().norm();
    let scaled_visibility = if gamma >= GAMMA_EPS {
        visibility(s) / gamma
    } else {
        let (c1, c2) = s.amplitudes();
        2.0 * c1.norm() * c2.norm() / s.survival_norm()
    };
    scaled_visibility.powi(2) + predictability(s).powi(2) - 1.0
}
