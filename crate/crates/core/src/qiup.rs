//! Imaging with undetected photons through induced coherence.
//!
//! The chain is strictly ordered: the pump is split between two nonlinear
//! crystals, each emits a signal-idler pair, the idler from the first crystal
//! crosses the object, both idlers are aligned into a common mode and only
//! the signal photons are interfered and detected.
//!
//! Three mechanisms reduce the signal coherence and they enter the
//! observables only through their product
//! `kappa = T * gamma * alpha` (object transmittance, pump coherence,
//! idler alignment overlap). Branch amplitudes are retained so that
//! probability conservation can be checked at each stage; reflected or
//! absorbed idlers and misaligned idler components are orthogonal sink modes
//! that never re-interfere.

use crate::error::{check_finite, check_unit, Error, Result};
use crate::mzi::GAMMA_EPS;
use crate::states::TwoPathState;

/// Fixed parameters of an imaging setup.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QiupConfig {
    p1: f64,
    pump_coherence: f64,
    alignment_overlap: f64,
    fringe_phase: f64,
}

impl QiupConfig {
    pub fn new(p1: f64, pump_coherence: f64, alignment_overlap: f64, fringe_phase: f64) -> Result<Self> {
        check_unit("p1", p1)?;
        check_unit("gamma", pump_coherence)?;
        check_unit("alpha", alignment_overlap)?;
        check_finite("fringe_phase", fringe_phase)?;
        Ok(Self {
            p1,
            pump_coherence,
            alignment_overlap,
            fringe_phase,
        })
    }

    /// Balanced pump, perfect coherence and alignment.
    pub fn ideal() -> Self {
        Self::new(0.5, 1.0, 1.0, 0.0).expect("valid")
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn pump_coherence(&self) -> f64 {
        self.pump_coherence
    }

    pub fn alignment_overlap(&self) -> f64 {
        self.alignment_overlap
    }

    pub fn fringe_phase(&self) -> f64 {
        self.fringe_phase
    }
}

/// Real amplitude transmittance of one transverse object point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectPixel {
    transmittance: f64,
}

impl ObjectPixel {
    pub fn new(transmittance: f64) -> Result<Self> {
        check_unit("transmittance", transmittance)?;
        Ok(Self { transmittance })
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    /// `R = sqrt(1 - T^2)`.
    pub fn reflectance(&self) -> f64 {
        ((1.0 - self.transmittance) * (1.0 + self.transmittance)).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    PumpSplit,
    PostSpdc,
    PostObject,
    PostAlignment,
}

/// Labels of the probability-carrying branches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Pump photon (or signal-idler pair) from the first crystal arm, with
    /// the idler transmitted by the object when one is present.
    Arm1,
    /// Idler of the first crystal reflected or absorbed by the object.
    Arm1Sink,
    /// Pump photon (or pair) from the second crystal arm.
    Arm2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QiupState {
    stage: Stage,
    p1: f64,
    c1: f64,
    c2: f64,
    transmittance: f64,
    kappa: f64,
    fringe_phase: f64,
}

impl QiupState {
    /// `|psi0> = c1 |1>|m1> + e^{i phi} c2 |2>|m2>`; the pump coherence seeds
    /// the overlap factor.
    pub fn pump_split(cfg: &QiupConfig) -> Self {
        Self {
            stage: Stage::PumpSplit,
            p1: cfg.p1,
            c1: cfg.p1.sqrt(),
            c2: (1.0 - cfg.p1).sqrt(),
            transmittance: 1.0,
            kappa: cfg.pump_coherence,
            fringe_phase: cfg.fringe_phase,
        }
    }

    /// `2 |c1| |c2|` from the split ratio directly, exact at `p1 = 1/2`.
    fn path_balance(&self) -> f64 {
        2.0 * (self.p1 * (1.0 - self.p1)).sqrt()
    }

    fn expect(&self, op: &'static str, expected: Stage) -> Result<()> {
        if self.stage == expected {
            Ok(())
        } else {
            Err(Error::WrongStage {
                op,
                expected,
                found: self.stage,
            })
        }
    }

    /// Single-pair down conversion: `|k> -> |s_k>|i_k>`. Amplitudes carry
    /// over unchanged.
    pub fn spdc(self) -> Result<Self> {
        self.expect("spdc", Stage::PumpSplit)?;
        Ok(Self {
            stage: Stage::PostSpdc,
            ..self
        })
    }

    /// `|i1> -> T |i1> + R |r>`.
    pub fn object_interaction(self, px: ObjectPixel) -> Result<Self> {
        self.expect("object_interaction", Stage::PostSpdc)?;
        Ok(Self {
            stage: Stage::PostObject,
            transmittance: px.transmittance,
            kappa: self.kappa * px.transmittance,
            ..self
        })
    }

    /// Idler modes are merged with mode overlap `alpha`.
    pub fn align_idlers(self, alpha: f64) -> Result<Self> {
        self.expect("align_idlers", Stage::PostObject)?;
        check_unit("alpha", alpha)?;
        Ok(Self {
            stage: Stage::PostAlignment,
            kappa: self.kappa * alpha,
            ..self
        })
    }

    /// Runs the full chain for one object point.
    pub fn forward(cfg: &QiupConfig, px: ObjectPixel) -> Result<Self> {
        Self::pump_split(cfg)
            .spdc()?
            .object_interaction(px)?
            .align_idlers(cfg.alignment_overlap)
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    /// Accumulated overlap factor `T gamma alpha` (so far).
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn amplitudes(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }

    pub fn fringe_phase(&self) -> f64 {
        self.fringe_phase
    }

    /// Probability of each branch at the current stage; sums to one.
    pub fn branch_probabilities(&self) -> Vec<(Branch, f64)> {
        let p1 = self.p1;
        let p2 = 1.0 - self.p1;
        if self.stage < Stage::PostObject {
            vec![(Branch::Arm1, p1), (Branch::Arm2, p2)]
        } else {
            let t = self.transmittance;
            let r2 = (1.0 - t) * (1.0 + t);
            vec![(Branch::Arm1, p1 * t * t), (Branch::Arm1Sink, p1 * r2), (Branch::Arm2, p2)]
        }
    }

    /// Signal detection probability at the monitored beamsplitter port.
    pub fn signal_probability(&self, phi: f64) -> Result<f64> {
        self.expect("signal_probability", Stage::PostAlignment)?;
        let fringe = self.path_balance() * self.kappa * (phi + self.fringe_phase).cos();
        Ok((0.5 * (1.0 + fringe)).clamp(0.0, 1.0))
    }

    /// `V = 2 |c1| |c2| T gamma alpha`.
    pub fn visibility(&self) -> Result<f64> {
        self.expect("visibility", Stage::PostAlignment)?;
        Ok(self.path_balance() * self.kappa)
    }

    /// `D = ||c1|^2 - |c2|^2|`; the object acts on the idler only and leaves
    /// the signal path probabilities alone.
    pub fn predictability(&self) -> Result<f64> {
        self.expect("predictability", Stage::PostAlignment)?;
        Ok((2.0 * self.p1 - 1.0).abs())
    }

    /// `V^2 / kappa^2 + D^2 - 1`, zero for every chain. For
    /// `kappa < 1e-9` the analytic limit `V / kappa -> 2 |c1 c2|` is used.
    pub fn ide_residual(&self) -> Result<f64> {
        let v = self.visibility()?;
        let d = self.predictability()?;
        let scaled = if self.kappa >= GAMMA_EPS {
            v / self.kappa
        } else {
            self.path_balance()
        };
        Ok(scaled * scaled + d * d - 1.0)
    }

    /// Mach-Zehnder state with the same observables: the object plays the
    /// role of partial coherence with `gamma = kappa`.
    pub fn equivalent_two_path(&self) -> Result<TwoPathState> {
        self.expect("equivalent_two_path", Stage::PostAlignment)?;
        TwoPathState::new(self.p1, self.kappa, 0.0, self.fringe_phase)
    }
}
