//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use duality_core::imaging::{
    load_map, max_abs_error, rank_correlation, reconstruct, save_map, synth_letter_object, Execution, Glyph,
    ReconstructionPlan, TransmittanceMap,
};
use duality_core::measure::{
    calibrate_no_object, measure_pixel, simulate_fringe_scan, MeasurementPlan, Sampling,
};
use duality_core::mzi::{self, apply_loss, Arm, LossChannel};
use duality_core::qiup::{ObjectPixel, QiupConfig, QiupState};
use duality_core::states::{MarginalVector, TwoPathState};
use duality_core::ComplexAmp;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_state(rng: &mut ChaCha8Rng) -> TwoPathState {
    TwoPathState::new(
        rng.random_range(0.0..=1.0),
        rng.random_range(0.0..=1.0),
        rng.random_range(0.0..TAU),
        rng.random_range(0.0..TAU),
    )
    .unwrap()
}

fn letter() -> TransmittanceMap {
    synth_letter_object(64, 64, Glyph::S, 3.0).unwrap()
}

fn imperfect(p1: f64) -> QiupConfig {
    QiupConfig::new(p1, 0.95, 0.9, 0.4).unwrap()
}

fn duality_ellipse_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        worst = worst.max(mzi::duality_residual(&random_state(&mut rng)).abs());
    }
    let elapsed = start.elapsed();
    ensure(worst < 1e-12, || format!("max residual {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("10^4 states, max residual {worst:.1e}, {elapsed:.2?}"))
}

fn demo_ellipse_loci() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_qiup"))
        .args(["demo-ellipse", "--etas", "0,0.2,0.5", "--samples", "201"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    ensure(lines.next() == Some("eta,gamma,p1,predictability,visibility"), || "bad header".into())?;
    let mut loci: Vec<(f64, f64, f64)> = Vec::new(); // eta, max V, worst residual
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (eta, d, v) = (f[0], f[3], f[4]);
        let residual = ((v / (1.0 - eta)).powi(2) + d * d - 1.0).abs();
        match loci.last_mut() {
            Some(l) if l.0 == eta => {
                l.1 = l.1.max(v.abs());
                l.2 = l.2.max(residual);
            }
            _ => loci.push((eta, v.abs(), residual)),
        }
    }
    ensure(loci.len() == 3, || format!("{} loci", loci.len()))?;
    for (&(eta, max_v, residual), axis) in loci.iter().zip([1.0, 0.8, 0.5]) {
        ensure((max_v - axis).abs() < 1e-9, || format!("eta={eta}: semi-minor {max_v}"))?;
        ensure(residual < 1e-12, || format!("eta={eta}: residual {residual:e}"))?;
    }
    Ok("semi-minor axes 1.0, 0.8, 0.5".into())
}

fn fringe_extrema_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = random_state(&mut rng);
        let probs: Vec<f64> = (0..4096)
            .map(|k| mzi::detection_probability(&s, TAU * k as f64 / 4096.0))
            .collect();
        let hi = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = probs.iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.max(((hi - lo) / (hi + lo) - mzi::visibility(&s)).abs());
    }
    ensure(worst < 2e-6, || format!("max deviation {worst:e}"))?;
    Ok(format!("10^3 states, max deviation {worst:.1e}"))
}

/// `det(rho)` of the reduced path density via Cauchy-Binet on the joint
/// amplitude matrix `[c1 M1; e^{-i phi} c2 M2]`.
fn reduced_determinant(row1: &[ComplexAmp], row2: &[ComplexAmp]) -> f64 {
    let mut det = 0.0;
    for j in 0..row1.len() {
        for k in (j + 1)..row1.len() {
            det += (row1[j] * row2[k] - row1[k] * row2[j]).norm_sqr();
        }
    }
    det
}

fn concurrence_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_c, mut worst_sum) = (0.0f64, 0.0f64);
    for trial in 0..4000 {
        let d = [1, 2, 3, 8][trial % 4];
        let mut vec = || {
            let v: Vec<ComplexAmp> = (0..d)
                .map(|_| ComplexAmp::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            MarginalVector::normalized(v).unwrap()
        };
        let (m1, m2) = (vec(), vec());
        let p1: f64 = rng.random_range(0.0..=1.0);
        let c1 = ComplexAmp::from_polar(p1.sqrt(), rng.random_range(0.0..TAU));
        let c2 = ComplexAmp::from_polar((1.0 - p1).sqrt(), rng.random_range(0.0..TAU));
        let phi = rng.random_range(0.0..TAU);
        let s = TwoPathState::from_marginals(c1, c2, &m1, &m2, phi).unwrap();

        let phase = ComplexAmp::from_polar(1.0, -phi);
        let row1: Vec<ComplexAmp> = m1.components().iter().map(|m| c1 * m).collect();
        let row2: Vec<ComplexAmp> = m2.components().iter().map(|m| phase * c2 * m).collect();
        let oracle = 2.0 * reduced_determinant(&row1, &row2).sqrt();
        let c = s.concurrence();
        let (v, dd) = (mzi::visibility(&s), mzi::predictability(&s));
        worst_c = worst_c.max((c - oracle).abs());
        worst_sum = worst_sum.max((v * v + dd * dd + c * c - 1.0).abs());
    }
    ensure(worst_c < 1e-12, || format!("concurrence deviation {worst_c:e}"))?;
    ensure(worst_sum < 1e-12, || format!("complementarity deviation {worst_sum:e}"))?;
    Ok(format!("d in {{1,2,3,8}}, max deviations {worst_c:.1e} / {worst_sum:.1e}"))
}

fn loss_robustness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let s = random_state(&mut rng);
        let arm = if rng.random_bool(0.5) { Arm::Arm1 } else { Arm::Arm2 };
        let a = 1.0 - rng.random_range(0.0..1.0); // (0, 1]
        let Ok(lossy) = apply_loss(&s, LossChannel::new(arm, a).unwrap()) else {
            continue;
        };
        worst = worst.max(mzi::duality_residual(&lossy).abs());
        worst = worst.max(mzi::duality_residual(&lossy.renormalized()).abs());
    }
    ensure(worst < 1e-12, || format!("max residual {worst:e}"))?;
    Ok(format!("10^4 lossy states, max residual {worst:.1e}"))
}

fn imaging_duality_ellipse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (p1, t, g, a): (f64, f64, f64, f64) = (
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
        );
        let s = QiupState::forward(&QiupConfig::new(p1, g, a, 0.0).unwrap(), ObjectPixel::new(t).unwrap()).unwrap();
        let (v, d) = (s.visibility().unwrap(), s.predictability().unwrap());
        let kappa = t * g * a;
        let residual = if kappa > 1e-6 {
            (v * v / (kappa * kappa) + d * d - 1.0).abs()
        } else {
            s.ide_residual().unwrap().abs()
        };
        worst = worst.max(residual);
    }
    ensure(worst < 1e-12, || format!("max residual {worst:e}"))?;

    let mut worst_ecc = 0.0f64;
    for k in 0..=20 {
        let px = ObjectPixel::new(k as f64 / 20.0).unwrap();
        let (mut max_v, mut max_d) = (0.0f64, 0.0f64);
        for j in 0..=200 {
            let cfg = QiupConfig::new(j as f64 / 200.0, 1.0, 1.0, 0.0).unwrap();
            let s = QiupState::forward(&cfg, px).unwrap();
            max_v = max_v.max(s.visibility().unwrap());
            max_d = max_d.max(s.predictability().unwrap());
        }
        let eccentricity = (1.0 - (max_v / max_d).powi(2)).sqrt();
        worst_ecc = worst_ecc.max((eccentricity - px.reflectance()).abs());
    }
    ensure(worst_ecc < 1e-12, || format!("eccentricity deviation {worst_ecc:e}"))?;
    Ok(format!("max residual {worst:.1e}, eccentricity deviation {worst_ecc:.1e}"))
}

fn noiseless_inversion() -> Outcome {
    let start = Instant::now();
    let truth = letter();
    let plan = ReconstructionPlan::new(
        imperfect(0.5),
        MeasurementPlan::new(24, 100_000, Sampling::Noiseless).unwrap(),
        7,
    );
    let report = reconstruct(&truth, &plan).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(report.max_abs_error < 1e-6, || format!("max error {:e}", report.max_abs_error))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("rec.pgm");
    save_map(&report.reconstructed, &path).map_err(|e| e.to_string())?;
    let quantized = load_map(&path).map_err(|e| e.to_string())?;
    let q_err = max_abs_error(&truth, &quantized).unwrap();
    ensure(q_err < 1e-6 + 1.0 / 255.0, || format!("PGM max error {q_err:e}"))?;
    Ok(format!("max error {:.1e} (PGM {q_err:.1e}), {elapsed:.2?}", report.max_abs_error))
}

fn statistical_imaging() -> Outcome {
    let start = Instant::now();
    let truth = letter();
    let measurement = MeasurementPlan::new(24, 100_000, Sampling::Poisson).unwrap();
    let mut errs = Vec::new();
    for seed in 0..20 {
        let plan = ReconstructionPlan::new(imperfect(0.5), measurement, 1000 + seed);
        errs.push(reconstruct(&truth, &plan).map_err(|e| e.to_string())?.rmse);
    }
    let elapsed = start.elapsed();
    let good = errs.iter().filter(|&&e| e < 0.02).count();
    let worst = errs.iter().copied().fold(0.0, f64::max);
    ensure(good >= 19, || format!("{good}/20 seeds below 0.02 (worst {worst:.4})"))?;
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!("{good}/20 seeds with rmse < 0.02, worst {worst:.4}, {elapsed:.2?}"))
}

fn calibration_correctness() -> Outcome {
    let noiseless = MeasurementPlan::new(24, 100_000, Sampling::Noiseless).unwrap();
    for (alpha, gamma) in [(1.0, 1.0), (0.9, 0.95), (0.5, 0.7), (0.2, 1.0)] {
        for p1 in [0.5, 0.3] {
            let cfg = QiupConfig::new(p1, gamma, alpha, 1.3).unwrap();
            let cal = calibrate_no_object(&cfg, &noiseless, 0).map_err(|e| e.to_string())?;
            let err = (cal.alpha_gamma_hat() - alpha * gamma).abs();
            ensure(err < 1e-12, || format!("alpha={alpha} gamma={gamma}: error {err:e}"))?;
        }
    }
    let truth = letter();
    let mut plan = ReconstructionPlan::new(imperfect(0.5), noiseless, 0);
    plan.calibrate = false;
    let report = reconstruct(&truth, &plan).map_err(|e| e.to_string())?;
    let scaled_err = truth
        .values()
        .iter()
        .zip(report.reconstructed.values())
        .map(|(t, r)| (r - 0.855 * t).abs())
        .fold(0.0, f64::max);
    ensure(scaled_err < 1e-12, || format!("uncalibrated deviation from T*0.855: {scaled_err:e}"))?;
    let rank = rank_correlation(&truth, &report.reconstructed).unwrap();
    ensure(rank == Some(1.0), || format!("rank correlation {rank:?}"))?;
    Ok("alpha*gamma exact, uncalibrated map = 0.855 T, rank correlation 1".into())
}

fn determinism() -> Outcome {
    let scan = || simulate_fringe_scan(|phi| 0.5 * (1.0 + 0.7 * phi.cos()), 24, 100_000, 99).unwrap().to_csv();
    ensure(scan() == scan(), || "fringe scan differs".into())?;

    let plan = MeasurementPlan::new(24, 50_000, Sampling::Poisson).unwrap();
    let px = ObjectPixel::new(0.6).unwrap();
    let pixel = || measure_pixel(&imperfect(0.5), px, &plan, 5).unwrap();
    ensure(pixel() == pixel(), || "pixel estimate differs".into())?;
    let cal = || calibrate_no_object(&imperfect(0.5), &plan, 5).unwrap();
    ensure(cal() == cal(), || "calibration differs".into())?;

    let truth = letter();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for (k, execution) in [Execution::Parallel, Execution::Parallel, Execution::Serial].into_iter().enumerate() {
        let mut rp = ReconstructionPlan::new(imperfect(0.5), plan, 2024);
        rp.execution = execution;
        let out = dir.path().join(k.to_string());
        reconstruct(&truth, &rp).unwrap().write_to_dir(&out).unwrap();
        let mut bytes = Vec::new();
        for f in ["report.txt", "reconstructed.pgm", "reconstructed.csv", "v_hat.csv", "d_hat.csv", "ellipticity.csv"] {
            bytes.push(std::fs::read(out.join(f)).unwrap());
        }
        files.push(bytes);
    }
    ensure(files[0] == files[1], || "reconstruction rerun differs".into())?;
    ensure(files[0] == files[2], || "serial and parallel reconstruction differ".into())?;

    let cli = || {
        Command::new(env!("CARGO_BIN_EXE_qiup"))
            .args(["scan", "--p1", "0.7", "--gamma", "0.9", "--photons", "100000", "--seed", "31"])
            .output()
            .unwrap()
            .stdout
    };
    ensure(cli() == cli(), || "CLI scan differs".into())?;
    Ok("scans, estimates, calibration, reconstruction files and CLI output byte-identical".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("duality ellipse identity", duality_ellipse_identity),
        ("demo-ellipse loci", demo_ellipse_loci),
        ("fringe-extrema oracle", fringe_extrema_oracle),
        ("concurrence identity", concurrence_identity),
        ("loss robustness", loss_robustness),
        ("imaging duality ellipse", imaging_duality_ellipse),
        ("noiseless imaging inversion", noiseless_inversion),
        ("statistical imaging", statistical_imaging),
        ("calibration correctness", calibration_correctness),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
