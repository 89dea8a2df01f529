use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt_sig17;
use crate::measure::{
    calibrate_no_object, extract_transmittance, measure_pixel, Calibration, DualityEstimate, MeasurementPlan,
    Sampling, D_EPS,
};
use crate::qiup::{ObjectPixel, QiupConfig};
use crate::rng::{derive_seed, stream};

use super::pgm::{to_pgm, PgmFormat};
use super::{grid_to_csv, max_abs_error, rmse, TransmittanceMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructionPlan {
    pub config: QiupConfig,
    pub measurement: MeasurementPlan,
    pub master_seed: u64,
    /// Measure `alpha * gamma` without the object first; otherwise assume a
    /// perfect setup.
    pub calibrate: bool,
    pub execution: Execution,
}

impl ReconstructionPlan {
    pub fn new(config: QiupConfig, measurement: MeasurementPlan, master_seed: u64) -> Self {
        Self {
            config,
            measurement,
            master_seed,
            calibrate: true,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionReport {
    pub reconstructed: TransmittanceMap,
    pub v_hat: Vec<f64>,
    pub d_hat: Vec<f64>,
    pub ellipticity: Vec<f64>,
    pub rmse: f64,
    pub max_abs_error: f64,
    pub photons_per_point: u64,
    /// Photons spent per pixel: the scan plus the two blocked-arm runs.
    pub photons_per_pixel: u64,
    pub grid_size: usize,
    pub sampling: Sampling,
    pub master_seed: u64,
    pub calibrated: bool,
    pub calibration: Calibration,
}

impl ReconstructionReport {
    /// `key=value` summary lines.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let sampling = match self.sampling {
            Sampling::Poisson => "poisson",
            Sampling::Noiseless => "noiseless",
        };
        let lines = [
            ("width", self.reconstructed.width().to_string()),
            ("height", self.reconstructed.height().to_string()),
            ("grid_size", self.grid_size.to_string()),
            ("photons_per_point", self.photons_per_point.to_string()),
            ("photons_per_pixel", self.photons_per_pixel.to_string()),
            ("sampling", sampling.to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("calibrated", self.calibrated.to_string()),
            ("alpha_gamma_hat", fmt_sig17(self.calibration.alpha_gamma_hat())),
            ("calibration_photons", self.calibration.photons_used().to_string()),
            ("rmse", fmt_sig17(self.rmse)),
            ("max_abs_error", fmt_sig17(self.max_abs_error)),
        ];
        for (k, v) in lines {
            writeln!(out, "{k}={v}").expect("string write");
        }
        out
    }

    /// Writes `report.txt`, the reconstruction as PGM and CSV, and the
    /// per-pixel `v_hat`, `d_hat` and ellipticity grids as CSV.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let width = self.reconstructed.width();
        std::fs::write(dir.join("report.txt"), self.summary())?;
        std::fs::write(dir.join("reconstructed.pgm"), to_pgm(&self.reconstructed, PgmFormat::Binary))?;
        std::fs::write(dir.join("reconstructed.csv"), self.reconstructed.to_csv())?;
        std::fs::write(dir.join("v_hat.csv"), grid_to_csv(width, &self.v_hat))?;
        std::fs::write(dir.join("d_hat.csv"), grid_to_csv(width, &self.d_hat))?;
        std::fs::write(dir.join("ellipticity.csv"), grid_to_csv(width, &self.ellipticity))?;
        Ok(())
    }
}

/// Simulates a measurement of `truth` and inverts it pixel by pixel.
///
/// One calibration is shared by all pixels since the imperfections are
/// uniform across the transverse plane. Each pixel draws from its own seed
/// derived from `(master_seed, x, y)`, so serial and parallel execution give
/// identical reports.
pub fn reconstruct(truth: &TransmittanceMap, plan: &ReconstructionPlan) -> Result<ReconstructionReport> {
    let cfg = &plan.config;
    let d = (2.0 * cfg.p1() - 1.0).abs();
    if d > 1.0 - D_EPS {
        return Err(Error::SingularPredictability(d));
    }
    let calibration = if plan.calibrate {
        calibrate_no_object(cfg, &plan.measurement, plan.master_seed)?
    } else {
        Calibration::identity()
    };

    let width = truth.width();
    let pixel = |idx: usize| -> Result<(DualityEstimate, f64)> {
        let (x, y) = ((idx % width) as u64, (idx / width) as u64);
        let seed = derive_seed(plan.master_seed, &[stream::PIXEL, x, y]);
        let px = ObjectPixel::new(truth.values()[idx])?;
        let est = measure_pixel(cfg, px, &plan.measurement, seed)?;
        let t = extract_transmittance(est.v_hat, est.d_hat, &calibration)?;
        Ok((est, t))
    };
    let n = truth.values().len();
    let results: Vec<(DualityEstimate, f64)> = match plan.execution {
        Execution::Serial => (0..n).map(pixel).collect::<Result<_>>()?,
        Execution::Parallel => (0..n).into_par_iter().map(pixel).collect::<Result<_>>()?,
    };

    let reconstructed = TransmittanceMap::new(width, truth.height(), results.iter().map(|r| r.1).collect())?;
    let m = &plan.measurement;
    Ok(ReconstructionReport {
        rmse: rmse(truth, &reconstructed)?,
        max_abs_error: max_abs_error(truth, &reconstructed)?,
        v_hat: results.iter().map(|r| r.0.v_hat).collect(),
        d_hat: results.iter().map(|r| r.0.d_hat).collect(),
        ellipticity: results.iter().map(|r| r.0.ellipticity_hat).collect(),
        reconstructed,
        photons_per_point: m.photons_per_point,
        photons_per_pixel: m.photons_per_point * (m.grid_size as u64 + 2),
        grid_size: m.grid_size,
        sampling: m.sampling,
        master_seed: plan.master_seed,
        calibrated: plan.calibrate,
        calibration,
    })
}
