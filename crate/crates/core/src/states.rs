//! Two-path single-photon states.
//!
//! A photon after the first beamsplitter is written as
//! `c1 |1>|M1> + e^{-i phi} c2 |2>|M2>`, where `|M1>`, `|M2>` collect every
//! degree of freedom other than the path. All observables depend on the
//! marginals only through the overlap `<M1|M2>`, so [`TwoPathState`] stores
//! that overlap instead of the vectors themselves. [`MarginalVector`] keeps
//! the explicit representation around for constructing states from first
//! principles and for oracle checks.

use crate::error::{check_finite, check_unit, Error, Result};
use crate::ComplexAmp;

const NORM_TOL: f64 = 1e-12;

/// Normalized finite-dimensional complex vector standing in for a marginal
/// state.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalVector {
    components: Vec<ComplexAmp>,
}

impl MarginalVector {
    /// Wraps `components`, which must already have unit norm (within 1e-12).
    pub fn new(components: Vec<ComplexAmp>) -> Result<Self> {
        let norm = euclidean_norm(&components)?;
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { components })
    }

    /// Rescales `components` to unit norm.
    pub fn normalized(components: Vec<ComplexAmp>) -> Result<Self> {
        let norm = euclidean_norm(&components)?;
        if norm == 0.0 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            components: components.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// Real vector convenience constructor; must have unit norm.
    pub fn from_real(components: &[f64]) -> Result<Self> {
        Self::new(components.iter().map(|&x| ComplexAmp::new(x, 0.0)).collect())
    }

    /// The `k`-th standard basis vector of dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::DimensionMismatch { left: dim, right: k });
        }
        let mut components = vec![ComplexAmp::new(0.0, 0.0); dim];
        components[k] = ComplexAmp::new(1.0, 0.0);
        Ok(Self { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ComplexAmp] {
        &self.components
    }
}

fn euclidean_norm(components: &[ComplexAmp]) -> Result<f64> {
    if components.is_empty() {
        return Err(Error::InvalidParameter {
            name: "dimension",
            value: 0.0,
            reason: "marginal vectors need at least one component",
        });
    }
    if components.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "component",
            value: f64::NAN,
            reason: "must be finite",
        });
    }
    Ok(components.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
}

/// `<a|b>`, antilinear in the first argument.
pub fn inner_product(a: &MarginalVector, b: &MarginalVector) -> Result<ComplexAmp> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(a.components
        .iter()
        .zip(&b.components)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Degree of coherence `|<a|b>|`, clamped to `[0, 1]`.
pub fn degree_of_coherence(a: &MarginalVector, b: &MarginalVector) -> Result<f64> {
    Ok(inner_product(a, b)?.norm().min(1.0))
}

/// `1 - |<a|b>|^2` for unit vectors, evaluated through the Lagrange identity
/// `|a|^2 |b|^2 - |<a|b>|^2 = sum_{j<k} |a_j b_k - a_k b_j|^2`, which has no
/// cancellation when the vectors are nearly parallel.
fn incoherence(a: &MarginalVector, b: &MarginalVector) -> f64 {
    let (a, b) = (&a.components, &b.components);
    let mut acc = 0.0;
    for j in 0..a.len() {
        for k in (j + 1)..a.len() {
            acc += (a[j] * b[k] - a[k] * b[j]).norm_sqr();
        }
    }
    acc.min(1.0)
}

/// General two-path state `c1 |1>|M1> + e^{-i phi} c2 |2>|M2>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoPathState {
    c1: ComplexAmp,
    c2: ComplexAmp,
    marginal_overlap: ComplexAmp,
    // 1 - |<M1|M2>|^2, kept separately so product states give exactly zero
    incoherence: f64,
    extra_phase: f64,
}

impl TwoPathState {
    /// Builds a state with real nonnegative `c1 = sqrt(p1)`,
    /// `c2 = sqrt(1 - p1)` and overlap `gamma * e^{i overlap_phase}`.
    pub fn new(p1: f64, gamma: f64, overlap_phase: f64, phi: f64) -> Result<Self> {
        check_unit("p1", p1)?;
        check_unit("gamma", gamma)?;
        check_finite("overlap_phase", overlap_phase)?;
        check_finite("phi", phi)?;
        Ok(Self {
            c1: ComplexAmp::new(p1.sqrt(), 0.0),
            c2: ComplexAmp::new((1.0 - p1).sqrt(), 0.0),
            marginal_overlap: ComplexAmp::from_polar(gamma, overlap_phase),
            incoherence: (1.0 - gamma) * (1.0 + gamma),
            extra_phase: phi,
        })
    }

    /// Builds a state from explicit amplitudes and marginal vectors.
    pub fn from_marginals(
        c1: ComplexAmp,
        c2: ComplexAmp,
        m1: &MarginalVector,
        m2: &MarginalVector,
        phi: f64,
    ) -> Result<Self> {
        let total = c1.norm_sqr() + c2.norm_sqr();
        if !total.is_finite() || (total - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(total.sqrt()));
        }
        check_finite("phi", phi)?;
        let overlap = inner_product(m1, m2)?;
        let overlap = if overlap.norm() > 1.0 {
            overlap / overlap.norm()
        } else {
            overlap
        };
        Ok(Self {
            c1,
            c2,
            marginal_overlap: overlap,
            incoherence: incoherence(m1, m2),
            extra_phase: phi,
        })
    }

    pub fn c1(&self) -> ComplexAmp {
        self.c1
    }

    pub fn c2(&self) -> ComplexAmp {
        self.c2
    }

    /// `<M1|M2>`.
    pub fn marginal_overlap(&self) -> ComplexAmp {
        self.marginal_overlap
    }

    /// Degree of coherence `|<M1|M2>|`.
    pub fn gamma(&self) -> f64 {
        self.marginal_overlap.norm()
    }

    /// Accumulated relative phase between the two paths.
    pub fn extra_phase(&self) -> f64 {
        self.extra_phase
    }

    pub fn p1(&self) -> f64 {
        self.c1.norm_sqr()
    }

    pub fn p2(&self) -> f64 {
        self.c2.norm_sqr()
    }

    /// Reduced density matrix of the path after tracing out the marginal.
    ///
    /// With the joint state `c1 |1>|M1> + e^{-i phi} c2 |2>|M2>` the
    /// coherence is `rho_12 = c1 conj(c2) conj(<M1|M2>) e^{i phi}`.
    pub fn reduced_path_density(&self) -> DensityMatrix2 {
        let rho12 = self.c1
            * self.c2.conj()
            * self.marginal_overlap.conj()
            * ComplexAmp::from_polar(1.0, self.extra_phase);
        DensityMatrix2::new(self.p1(), self.p2(), rho12)
    }

    /// Path-marginal entanglement `C = 2 |c1 c2| sqrt(1 - gamma^2)`.
    pub fn concurrence(&self) -> f64 {
        2.0 * self.c1.norm() * self.c2.norm() * self.incoherence.max(0.0).sqrt()
    }
}

/// Hermitian 2x2 density matrix of the path mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix2 {
    rho11: f64,
    rho22: f64,
    rho12: ComplexAmp,
}

impl DensityMatrix2 {
    fn new(rho11: f64, rho22: f64, rho12: ComplexAmp) -> Self {
        Self { rho11, rho22, rho12 }
    }

    pub fn rho11(&self) -> ComplexAmp {
        ComplexAmp::new(self.rho11, 0.0)
    }

    pub fn rho22(&self) -> ComplexAmp {
        ComplexAmp::new(self.rho22, 0.0)
    }

    pub fn rho12(&self) -> ComplexAmp {
        self.rho12
    }

    pub fn rho21(&self) -> ComplexAmp {
        self.rho12.conj()
    }

    pub fn trace(&self) -> f64 {
        self.rho11 + self.rho22
    }

    pub fn determinant(&self) -> f64 {
        self.rho11 * self.rho22 - self.rho12.norm_sqr()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let half_trace = 0.5 * self.trace();
        let half_gap = (0.25 * (self.rho11 - self.rho22).powi(2) + self.rho12.norm_sqr()).sqrt();
        [half_trace - half_gap, half_trace + half_gap]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> ComplexAmp {
        ComplexAmp::new(re, im)
    }

    #[test]
    fn inner_product_examples() {
        let v = MarginalVector::normalized(vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.0, 0.4)]).unwrap();
        let self_overlap = inner_product(&v, &v).unwrap();
        assert!((self_overlap - c(1.0, 0.0)).norm() < 1e-15);

        let e1 = MarginalVector::basis(2, 0).unwrap();
        let e2 = MarginalVector::basis(2, 1).unwrap();
        assert_eq!(inner_product(&e1, &e2).unwrap(), c(0.0, 0.0));

        let w = MarginalVector::from_real(&[0.8, 0.6]).unwrap();
        assert!((inner_product(&e1, &w).unwrap() - c(0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inner_product_is_conjugate_symmetric() {
        let a = MarginalVector::normalized(vec![c(1.0, 2.0), c(-0.5, 0.25)]).unwrap();
        let b = MarginalVector::normalized(vec![c(0.1, -0.3), c(0.7, 0.9)]).unwrap();
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = MarginalVector::basis(2, 0).unwrap();
        let b = MarginalVector::basis(3, 0).unwrap();
        assert!(matches!(
            inner_product(&a, &b),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
        assert!(degree_of_coherence(&a, &b).is_err());
    }

    #[test]
    fn unnormalized_vector_is_rejected() {
        assert!(matches!(
            MarginalVector::from_real(&[1.0, 1.0]),
            Err(Error::NotNormalized(_))
        ));
        assert!(MarginalVector::normalized(vec![c(0.0, 0.0)]).is_err());
        assert!(MarginalVector::new(vec![]).is_err());
    }

    #[test]
    fn degree_of_coherence_examples() {
        let e1 = MarginalVector::basis(2, 0).unwrap();
        let e2 = MarginalVector::basis(2, 1).unwrap();
        assert_eq!(degree_of_coherence(&e1, &e1).unwrap(), 1.0);
        assert_eq!(degree_of_coherence(&e1, &e2).unwrap(), 0.0);
        let b = MarginalVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert!((degree_of_coherence(&e1, &b).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn make_two_path_state_examples() {
        let s = TwoPathState::new(0.5, 1.0, 0.0, 0.0).unwrap();
        assert!((s.c1().re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.c2().re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(s.gamma(), 1.0);

        let s = TwoPathState::new(1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(s.c2(), c(0.0, 0.0));
        assert_eq!(s.p1(), 1.0);

        let s = TwoPathState::new(0.8, 0.6, 0.0, 0.0).unwrap();
        assert!((s.c1().re - 0.8f64.sqrt()).abs() < 1e-15);
        assert!((s.c2().re - 0.2f64.sqrt()).abs() < 1e-15);
        assert!((s.gamma() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn make_two_path_state_rejects_out_of_range() {
        assert!(TwoPathState::new(-0.1, 0.5, 0.0, 0.0).unwrap_err().is_invalid_parameter());
        assert!(TwoPathState::new(0.5, 1.1, 0.0, 0.0).unwrap_err().is_invalid_parameter());
        assert!(TwoPathState::new(f64::NAN, 0.5, 0.0, 0.0).is_err());
        assert!(TwoPathState::new(0.5, 0.5, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn reduced_density_examples() {
        let rho = TwoPathState::new(0.5, 1.0, 0.0, 0.0).unwrap().reduced_path_density();
        assert!((rho.rho12().norm() - 0.5).abs() < 1e-15);

        let rho = TwoPathState::new(0.5, 0.0, 0.0, 0.0).unwrap().reduced_path_density();
        assert!((rho.rho11().re - 0.5).abs() < 1e-15);
        assert!((rho.rho22().re - 0.5).abs() < 1e-15);
        assert_eq!(rho.rho12().norm(), 0.0);

        let rho = TwoPathState::new(0.8, 0.6, 0.3, 1.1).unwrap().reduced_path_density();
        assert!((rho.rho12().norm() - 0.24).abs() < 1e-15);
        assert_eq!(rho.rho21(), rho.rho12().conj());
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn concurrence_examples() {
        let s = TwoPathState::new(0.5, 0.0, 0.0, 0.0).unwrap();
        assert!((s.concurrence() - 1.0).abs() < 1e-15);
        for p1 in [0.0, 0.2, 0.5, 0.9, 1.0] {
            assert_eq!(TwoPathState::new(p1, 1.0, 0.7, 0.0).unwrap().concurrence(), 0.0);
        }
        let s = TwoPathState::new(0.8, 0.6, 0.0, 0.0).unwrap();
        assert!((s.concurrence() - 0.64).abs() < 1e-15);
    }

    #[test]
    fn from_marginals_matches_scalar_constructor() {
        let m1 = MarginalVector::basis(2, 0).unwrap();
        let m2 = MarginalVector::from_real(&[0.6, 0.8]).unwrap();
        let s = TwoPathState::from_marginals(
            c(0.8f64.sqrt(), 0.0),
            c(0.2f64.sqrt(), 0.0),
            &m1,
            &m2,
            0.0,
        )
        .unwrap();
        let t = TwoPathState::new(0.8, 0.6, 0.0, 0.0).unwrap();
        assert!((s.gamma() - t.gamma()).abs() < 1e-15);
        assert!((s.concurrence() - t.concurrence()).abs() < 1e-15);
        assert!((s.concurrence() - 0.64).abs() < 1e-15);
    }

    #[test]
    fn from_marginals_requires_normalized_amplitudes() {
        let m = MarginalVector::basis(1, 0).unwrap();
        assert!(matches!(
            TwoPathState::from_marginals(c(1.0, 0.0), c(1.0, 0.0), &m, &m, 0.0),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn one_dimensional_marginals_are_product_states() {
        let m1 = MarginalVector::normalized(vec![c(0.3, -0.7)]).unwrap();
        let m2 = MarginalVector::normalized(vec![c(-0.9, 0.2)]).unwrap();
        let s = TwoPathState::from_marginals(c(0.6, 0.0), c(0.0, 0.8), &m1, &m2, 0.4).unwrap();
        assert_eq!(s.concurrence(), 0.0);
        assert!((s.gamma() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_pure_and_mixed_states() {
        let rho = TwoPathState::new(0.3, 1.0, 0.0, 0.0).unwrap().reduced_path_density();
        let [lo, hi] = rho.eigenvalues();
        assert!(lo.abs() < 1e-15);
        assert!((hi - 1.0).abs() < 1e-15);

        let rho = TwoPathState::new(0.3, 0.0, 0.0, 0.0).unwrap().reduced_path_density();
        let [lo, hi] = rho.eigenvalues();
        assert!((lo - 0.3).abs() < 1e-15);
        assert!((hi - 0.7).abs() < 1e-15);
    }
}
