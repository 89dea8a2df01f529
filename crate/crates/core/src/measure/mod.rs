//! Photon-counting measurements of visibility and predictability.
//!
//! Visibility comes from a fringe scan: the interferometer phase is stepped
//! over a uniform grid and the counts at each step are Poisson distributed
//! around `N * P(phi)`. Predictability comes from two blocked-arm count
//! experiments. Both can also be run in noiseless mode, where the counts are
//! replaced by their expectations.

mod fit;

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mzi::GAMMA_EPS;
use crate::qiup::{ObjectPixel, QiupConfig, QiupState};
use crate::rng::{derive_seed, poisson, seeded_rng, stream};
use crate::fmt_sig17;

/// Predictabilities closer to one than this leave the transmittance
/// undetermined.
pub const D_EPS: f64 = 1e-6;

/// Default number of phase steps per scan.
pub const DEFAULT_GRID_SIZE: usize = 24;

/// Minimum number of phase steps per scan.
pub const MIN_GRID_SIZE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sampling {
    /// Counts drawn from a Poisson distribution.
    #[default]
    Poisson,
    /// Counts equal to their expectation values.
    Noiseless,
}

/// How a single duality measurement is taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementPlan {
    pub grid_size: usize,
    pub photons_per_point: u64,
    pub sampling: Sampling,
}

impl MeasurementPlan {
    pub fn new(grid_size: usize, photons_per_point: u64, sampling: Sampling) -> Result<Self> {
        check_sizes(grid_size, photons_per_point)?;
        Ok(Self {
            grid_size,
            photons_per_point,
            sampling,
        })
    }
}

fn check_sizes(grid_size: usize, photons: u64) -> Result<()> {
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::InvalidParameter {
            name: "grid_size",
            value: grid_size as f64,
            reason: "a fringe scan needs at least 8 phase points",
        });
    }
    if photons == 0 {
        return Err(Error::InvalidParameter {
            name: "photons",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    Ok(())
}

/// `n` phases spread uniformly over `[0, 2 pi)`.
pub fn uniform_phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// Raw record of a fringe measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct FringeScan {
    phase_grid: Vec<f64>,
    photons_per_point: u64,
    expected: Vec<f64>,
    counts: Vec<f64>,
    seed: u64,
    sampling: Sampling,
}

impl FringeScan {
    pub fn phase_grid(&self) -> &[f64] {
        &self.phase_grid
    }

    pub fn photons_per_point(&self) -> u64 {
        self.photons_per_point
    }

    /// `N * P(phi_k)`.
    pub fn expected(&self) -> &[f64] {
        &self.expected
    }

    /// Registered counts; whole numbers unless the scan is noiseless.
    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    /// CSV with header `phase_rad,expected,count`. Reals are written with 17
    /// significant digits; Poisson counts as integers.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase_rad,expected,count\n");
        for ((phi, e), c) in self.phase_grid.iter().zip(&self.expected).zip(&self.counts) {
            let count = match self.sampling {
                Sampling::Poisson => format!("{}", *c as u64),
                Sampling::Noiseless => fmt_sig17(*c),
            };
            writeln!(out, "{},{},{}", fmt_sig17(*phi), fmt_sig17(*e), count).expect("string write");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn build_scan<F>(
    prob_fn: F,
    grid_size: usize,
    photons_per_point: u64,
    seed: u64,
    sampling: Sampling,
) -> Result<FringeScan>
where
    F: Fn(f64) -> f64,
{
    check_sizes(grid_size, photons_per_point)?;
    let phase_grid = uniform_phase_grid(grid_size);
    let n = photons_per_point as f64;
    let expected: Vec<f64> = phase_grid
        .iter()
        .map(|&phi| n * prob_fn(phi).clamp(0.0, 1.0))
        .collect();
    let counts = match sampling {
        Sampling::Noiseless => expected.clone(),
        Sampling::Poisson => {
            let mut rng = seeded_rng(seed);
            expected.iter().map(|&lambda| poisson(&mut rng, lambda) as f64).collect()
        }
    };
    Ok(FringeScan {
        phase_grid,
        photons_per_point,
        expected,
        counts,
        seed,
        sampling,
    })
}

/// Poisson fringe scan: `counts[k] ~ Poisson(N * P(phi_k))`, reproducible
/// from `seed`.
pub fn simulate_fringe_scan<F>(prob_fn: F, grid_size: usize, photons_per_point: u64, seed: u64) -> Result<FringeScan>
where
    F: Fn(f64) -> f64,
{
    build_scan(prob_fn, grid_size, photons_per_point, seed, Sampling::Poisson)
}

/// Noiseless fringe scan with counts equal to `N * P(phi_k)`.
pub fn expected_fringe_scan<F>(prob_fn: F, grid_size: usize, photons_per_point: u64) -> Result<FringeScan>
where
    F: Fn(f64) -> f64,
{
    build_scan(prob_fn, grid_size, photons_per_point, 0, Sampling::Noiseless)
}

/// Scan according to `plan`.
pub fn scan_with<F>(prob_fn: F, plan: &MeasurementPlan, seed: u64) -> Result<FringeScan>
where
    F: Fn(f64) -> f64,
{
    build_scan(prob_fn, plan.grid_size, plan.photons_per_point, seed, plan.sampling)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisibilityEstimate {
    pub v_hat: f64,
    /// `phi0` of the model `A (1 + V cos(phi - phi0))`.
    pub fitted_phase: f64,
    pub sigma_v: f64,
    pub amplitude: f64,
}

fn check_signal(scan: &FringeScan) -> Result<()> {
    if scan.counts.iter().all(|&c| c <= 0.0) {
        return Err(Error::NoSignal);
    }
    Ok(())
}

/// Least-squares fit of `A (1 + V cos(phi - phi0))` to the counts.
///
/// `sigma_v` propagates the fit covariance (residual variance times
/// `(X^T X)^-1`) to `V = sqrt(a1^2 + a2^2) / a0`.
pub fn estimate_visibility(scan: &FringeScan) -> Result<VisibilityEstimate> {
    check_signal(scan)?;
    let fit = fit::fit_harmonic(&scan.phase_grid, &scan.counts)
        .ok_or_else(|| Error::InvalidScan("phase grid does not determine a fringe".into()))?;
    let [a0, a1, a2] = fit.coef;
    if a0 <= 0.0 {
        return Err(Error::NoSignal);
    }
    let r = a1.hypot(a2);
    let v = r / a0;
    let cov = &fit.cov;
    let var = if r > 0.0 {
        let g = [-r / (a0 * a0), a1 / (r * a0), a2 / (r * a0)];
        (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| g[i] * cov[i][j] * g[j])
            .sum::<f64>()
    } else {
        (cov[1][1] + cov[2][2]) / (a0 * a0)
    };
    Ok(VisibilityEstimate {
        v_hat: v.clamp(0.0, 1.0),
        fitted_phase: a2.atan2(a1),
        sigma_v: var.max(0.0).sqrt(),
        amplitude: a0,
    })
}

/// `(max - min) / (max + min)` over the scanned grid, with an uncertainty
/// that adds Poisson noise of the two extreme counts to the largest
/// possible shortfall of a grid sample from the true extremum. Picking the
/// extreme of `n` noisy samples shifts it by up to about `sqrt(2 ln n)`
/// standard deviations, so the Poisson term carries that factor.
pub fn minmax_visibility(scan: &FringeScan) -> Result<(f64, f64)> {
    check_signal(scan)?;
    let hi = scan.counts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = scan.counts.iter().copied().fold(f64::INFINITY, f64::min);
    let sum = hi + lo;
    let v = ((hi - lo) / sum).clamp(0.0, 1.0);

    let statistical = match scan.sampling {
        Sampling::Noiseless => 0.0,
        Sampling::Poisson => {
            let order = (2.0 * (scan.counts.len() as f64).ln()).sqrt();
            order * (4.0 * (lo * lo * hi + hi * hi * lo)).sqrt() / (sum * sum)
        }
    };
    let max_gap = scan
        .phase_grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .chain(std::iter::once(
            TAU + scan.phase_grid[0] - scan.phase_grid[scan.phase_grid.len() - 1],
        ))
        .fold(0.0, f64::max);
    let c = (0.5 * max_gap).cos();
    let discretization = if c > 0.0 { v * (1.0 - c) / c } else { 1.0 };
    Ok((v, statistical + discretization))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictabilityEstimate {
    pub d_hat: f64,
    pub sigma_d: f64,
}

fn check_arms(p_arm1: f64, p_arm2: f64) -> Result<()> {
    for (name, p) in [("p_arm1", p_arm1), ("p_arm2", p_arm2)] {
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidParameter {
                name,
                value: p,
                reason: "must lie in [0, 1]",
            });
        }
    }
    let total = p_arm1 + p_arm2;
    if !(total > 0.0 && total <= 1.0 + 1e-12) {
        return Err(Error::InvalidParameter {
            name: "p_arm1 + p_arm2",
            value: total,
            reason: "must lie in (0, 1]",
        });
    }
    Ok(())
}

/// Blocked-arm experiments `N1 ~ Poisson(photons p1)`,
/// `N2 ~ Poisson(photons p2)` and `D = |N1 - N2| / (N1 + N2)`.
pub fn estimate_predictability(p_arm1: f64, p_arm2: f64, photons: u64, seed: u64) -> Result<PredictabilityEstimate> {
    check_arms(p_arm1, p_arm2)?;
    check_sizes(MIN_GRID_SIZE, photons)?;
    let mut rng = seeded_rng(seed);
    let n1 = poisson(&mut rng, photons as f64 * p_arm1) as f64;
    let n2 = poisson(&mut rng, photons as f64 * p_arm2) as f64;
    predictability_from_counts(n1, n2, true)
}

/// Noiseless counterpart of [`estimate_predictability`].
pub fn expected_predictability(p_arm1: f64, p_arm2: f64) -> Result<PredictabilityEstimate> {
    check_arms(p_arm1, p_arm2)?;
    predictability_from_counts(p_arm1, p_arm2, false)
}

fn predictability_from_counts(n1: f64, n2: f64, poisson: bool) -> Result<PredictabilityEstimate> {
    let total = n1 + n2;
    if total <= 0.0 {
        return Err(Error::NoSignal);
    }
    let sigma_d = if poisson {
        (4.0 * n1 * n2 / total.powi(3)).sqrt()
    } else {
        0.0
    };
    Ok(PredictabilityEstimate {
        d_hat: ((n1 - n2).abs() / total).clamp(0.0, 1.0),
        sigma_d,
    })
}

fn check_predictability(d_hat: f64) -> Result<()> {
    if d_hat > 1.0 - D_EPS {
        return Err(Error::SingularPredictability(d_hat));
    }
    Ok(())
}

/// `eta = 1 - min(1, V / sqrt(1 - D^2))`.
pub fn ellipticity(v_hat: f64, d_hat: f64) -> Result<f64> {
    check_predictability(d_hat)?;
    let ratio = v_hat / (1.0 - d_hat * d_hat).sqrt();
    Ok((1.0 - ratio.min(1.0)).clamp(0.0, 1.0))
}

/// Measured duality point of one pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityEstimate {
    pub v_hat: f64,
    pub sigma_v: f64,
    pub d_hat: f64,
    pub sigma_d: f64,
    pub ellipticity_hat: f64,
    pub fitted_phase: f64,
}

/// Runs the imaging chain for one object point and measures `(V, D)`.
///
/// `seed` is split into independent streams for the fringe scan and the
/// blocked-arm predictability runs; predictability is measured by blocking
/// the pump arms, with `photons_per_point` photons for each.
pub fn measure_pixel(cfg: &QiupConfig, px: ObjectPixel, plan: &MeasurementPlan, seed: u64) -> Result<DualityEstimate> {
    let state = QiupState::forward(cfg, px)?;
    let scan = scan_with(
        |phi| state.signal_probability(phi).unwrap_or(0.0),
        plan,
        derive_seed(seed, &[stream::FRINGE]),
    )?;
    let vis = estimate_visibility(&scan)?;
    let (c1, c2) = state.amplitudes();
    let pred = match plan.sampling {
        Sampling::Noiseless => expected_predictability(c1 * c1, c2 * c2)?,
        Sampling::Poisson => estimate_predictability(
            c1 * c1,
            c2 * c2,
            plan.photons_per_point,
            derive_seed(seed, &[stream::PREDICTABILITY]),
        )?,
    };
    Ok(DualityEstimate {
        v_hat: vis.v_hat,
        sigma_v: vis.sigma_v,
        d_hat: pred.d_hat,
        sigma_d: pred.sigma_d,
        ellipticity_hat: ellipticity(vis.v_hat, pred.d_hat)?,
        fitted_phase: vis.fitted_phase,
    })
}

/// Measured product `alpha * gamma` of the setup imperfections.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration {
    alpha_gamma_hat: f64,
    photons_used: u64,
    seed: u64,
}

impl Calibration {
    pub fn new(alpha_gamma_hat: f64, photons_used: u64, seed: u64) -> Result<Self> {
        if !(alpha_gamma_hat > 0.0 && alpha_gamma_hat <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha_gamma_hat",
                value: alpha_gamma_hat,
                reason: "must lie in (0, 1]",
            });
        }
        Ok(Self {
            alpha_gamma_hat,
            photons_used,
            seed,
        })
    }

    /// No correction: treats the setup as perfectly coherent and aligned.
    pub fn identity() -> Self {
        Self {
            alpha_gamma_hat: 1.0,
            photons_used: 0,
            seed: 0,
        }
    }

    pub fn alpha_gamma_hat(&self) -> f64 {
        self.alpha_gamma_hat
    }

    /// Photons registered during calibration (scan plus blocked-arm runs).
    pub fn photons_used(&self) -> u64 {
        self.photons_used
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Measures the setup without an object (`T = 1`); the ellipse then gives
/// `alpha * gamma = V / sqrt(1 - D^2)`.
pub fn calibrate_no_object(cfg: &QiupConfig, plan: &MeasurementPlan, seed: u64) -> Result<Calibration> {
    let open = ObjectPixel::new(1.0)?;
    let est = measure_pixel(cfg, open, plan, derive_seed(seed, &[stream::CALIBRATION]))?;
    check_predictability(est.d_hat)?;
    let ratio = (est.v_hat / (1.0 - est.d_hat * est.d_hat).sqrt()).min(1.0);
    if ratio < GAMMA_EPS {
        // no induced coherence at all: nothing to divide by
        return Err(Error::NoSignal);
    }
    let photons_used = plan.photons_per_point * (plan.grid_size as u64 + 2);
    Calibration::new(ratio, photons_used, seed)
}

/// `T = V / (alpha gamma sqrt(1 - D^2))`, clamped to `[0, 1]`.
pub fn extract_transmittance(v_hat: f64, d_hat: f64, cal: &Calibration) -> Result<f64> {
    check_predictability(d_hat)?;
    let t = v_hat / (cal.alpha_gamma_hat * (1.0 - d_hat * d_hat).sqrt());
    Ok(t.clamp(0.0, 1.0))
}
