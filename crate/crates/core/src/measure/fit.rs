//! Linear least-squares fit of a single-harmonic fringe
//! `y = a0 + a1 cos(phi) + a2 sin(phi)`.

/// Fitted coefficients with their covariance.
#[derive(Clone, Copy, Debug)]
pub(crate) struct HarmonicFit {
    pub coef: [f64; 3],
    pub cov: [[f64; 3]; 3],
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    if !det.is_normal() {
        return None;
    }
    let inv_det = 1.0 / det;
    Some([
        [
            c00 * inv_det,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det,
        ],
        [
            c01 * inv_det,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det,
        ],
        [
            c02 * inv_det,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det,
        ],
    ])
}

/// Returns `None` when the phases do not determine all three coefficients.
pub(crate) fn fit_harmonic(phases: &[f64], values: &[f64]) -> Option<HarmonicFit> {
    debug_assert_eq!(phases.len(), values.len());
    let n = phases.len();
    if n < 3 {
        return None;
    }
    let mut xtx = [[0.0; 3]; 3];
    let mut xty = [0.0; 3];
    for (&phi, &y) in phases.iter().zip(values) {
        let row = [1.0, phi.cos(), phi.sin()];
        for i in 0..3 {
            xty[i] += row[i] * y;
            for j in 0..3 {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    let inv = invert3(&xtx)?;
    let mut coef = [0.0; 3];
    for i in 0..3 {
        coef[i] = (0..3).map(|j| inv[i][j] * xty[j]).sum();
    }

    let rss: f64 = phases
        .iter()
        .zip(values)
        .map(|(&phi, &y)| {
            let r = y - (coef[0] + coef[1] * phi.cos() + coef[2] * phi.sin());
            r * r
        })
        .sum();
    let dof = n.saturating_sub(3);
    let s2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let mut cov = inv;
    cov.iter_mut().flatten().for_each(|c| *c *= s2);
    Some(HarmonicFit { coef, cov })
}
