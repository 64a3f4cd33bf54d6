//! Gaussian continuous-variable states in the quadrature picture.
//!
//! Quadratures are ordered `x₁, p₁, …, xₙ, pₙ` with `[x, p] = i` (ħ = 1), so
//! the vacuum covariance is `I/2` and Heisenberg's bound on a single mode
//! reads `V(x)·V(p) ≥ 1/4`.
//!
//! Beam-splitter convention, for amplitude transmissivity `t = √T` and
//! reflectivity `ρ = √(1−T)`, acting identically on `x` and `p`:
//!
//! ```text
//! ⎡a_i'⎤   ⎡ t  ρ⎤ ⎡a_i⎤
//! ⎣a_j'⎦ = ⎣−ρ  t⎦ ⎣a_j⎦
//! ```
//!
//! The reflection from port `i` into port `j` carries the π phase flip.
//! Swapping the port order gives the inverse transform.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vacuum variance of a single quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Reid bound on the product of conditional variances.
pub const REID_BOUND: f64 = 0.25;

/// Measured variances below this fraction of the largest covariance entry are
/// treated as zero when conditioning.
const DEGENERATE_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaussianError {
    #[error("mode {mode} out of range for a {n_modes}-mode state")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("modes must be distinct, got {0} twice")]
    SameMode(usize),
    #[error("transmissivity must lie in [0, 1], got {0}")]
    InvalidTransmissivity(f64),
    #[error("conditioning needs at least two modes")]
    TooFewModes,
    #[error("state needs at least one mode")]
    Empty,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("covariance matrix is not symmetric")]
    NotSymmetric,
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("negative squeeze parameter {0}")]
    NegativeSqueezing(f64),
}

/// Symplectic form `⊕ [[0, 1], [−1, 0]]` for `n` modes.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Symplectic eigenvalues of a positive-definite covariance matrix, ascending.
///
/// With `S = σ^{1/2}`, the antisymmetric `K = SΩS` is similar to `Ωσ`, and
/// `KᵀK` carries each symplectic eigenvalue squared twice.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>, GaussianError> {
    let n2 = cov.nrows();
    if n2 == 0 || n2 % 2 != 0 || cov.ncols() != n2 {
        return Err(GaussianError::Dimension(format!("{}x{} covariance", cov.nrows(), cov.ncols())));
    }
    let eig = SymmetricEigen::new(cov.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(GaussianError::NotPositiveDefinite);
    }
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let k = &root * symplectic_form(n2 / 2) * &root;
    let gram = k.transpose() * &k;
    let gram = (&gram + gram.transpose()) * 0.5;
    let mut squares: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
    squares.sort_by(f64::total_cmp);
    Ok(squares
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect())
}

/// Multimode Gaussian state: first moments plus symmetric covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    n_modes: usize,
    mean: Vec<f64>,
    /// Row-major.
    cov: Vec<f64>,
}

impl From<GaussianState> for StateJson {
    fn from(s: GaussianState) -> Self {
        let n = s.mean.len();
        Self {
            n_modes: s.n_modes(),
            mean: s.mean.iter().copied().collect(),
            cov: (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|ij| s.cov[ij]).collect(),
        }
    }
}

impl TryFrom<StateJson> for GaussianState {
    type Error = GaussianError;

    fn try_from(j: StateJson) -> Result<Self, Self::Error> {
        let n = 2 * j.n_modes;
        if j.mean.len() != n || j.cov.len() != n * n {
            return Err(GaussianError::Dimension(format!(
                "{} modes need {} means and {} covariance entries",
                j.n_modes,
                n,
                n * n
            )));
        }
        GaussianState::new(DVector::from_vec(j.mean), DMatrix::from_row_slice(n, n, &j.cov))
    }
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self, GaussianError> {
        let n = mean.len();
        if n == 0 {
            return Err(GaussianError::Empty);
        }
        if n % 2 != 0 || cov.nrows() != n || cov.ncols() != n {
            return Err(GaussianError::Dimension(format!(
                "mean of length {n} with {}x{} covariance",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        if (&cov - cov.transpose()).amax() > 1e-12 * scale {
            return Err(GaussianError::NotSymmetric);
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { mean, cov })
    }

    pub fn vacuum(n_modes: usize) -> Result<Self, GaussianError> {
        if n_modes == 0 {
            return Err(GaussianError::Empty);
        }
        Ok(Self {
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes) * VACUUM_VARIANCE,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn check_mode(&self, mode: usize) -> Result<(), GaussianError> {
        if mode < self.n_modes() {
            Ok(())
        } else {
            Err(GaussianError::ModeOutOfRange { mode, n_modes: self.n_modes() })
        }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<(), GaussianError> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i == j {
            return Err(GaussianError::SameMode(i));
        }
        Ok(())
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>, GaussianError> {
        symplectic_eigenvalues(&self.cov)
    }

    /// `σ + (i/2)Ω ≥ 0`, checked as every symplectic eigenvalue ≥ 1/2 − `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.symplectic_eigenvalues()
            .map(|nu| nu.iter().all(|&v| v >= VACUUM_VARIANCE - tol))
            .unwrap_or(false)
    }

    /// Tr ρ² = 1/(2ⁿ √det σ).
    pub fn purity(&self) -> f64 {
        1.0 / (2f64.powi(self.n_modes() as i32) * self.cov.determinant().sqrt())
    }

    /// Variance of the linear combination `Σ wₖ rₖ` of quadratures.
    pub fn quadrature_variance(&self, weights: &DVector<f64>) -> f64 {
        (weights.transpose() * &self.cov * weights)[(0, 0)]
    }

    /// Applies a full `2n × 2n` linear map `r → S r`.
    pub fn transform(&self, s: &DMatrix<f64>) -> Result<Self, GaussianError> {
        let n = self.mean.len();
        if s.nrows() != n || s.ncols() != n {
            return Err(GaussianError::Dimension(format!("transform must be {n}x{n}")));
        }
        let cov = s * &self.cov * s.transpose();
        Ok(Self {
            mean: s * &self.mean,
            cov: (&cov + cov.transpose()) * 0.5,
        })
    }

    fn embed(&self, mode: usize, block: [[f64; 2]; 2]) -> DMatrix<f64> {
        let mut s = DMatrix::identity(self.mean.len(), self.mean.len());
        for (a, row) in block.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                s[(2 * mode + a, 2 * mode + b)] = *v;
            }
        }
        s
    }

    /// Phase-space rotation of one mode by `angle`.
    pub fn rotate(&self, mode: usize, angle: f64) -> Result<Self, GaussianError> {
        self.check_mode(mode)?;
        let (s, c) = angle.sin_cos();
        self.transform(&self.embed(mode, [[c, -s], [s, c]]))
    }

    /// Single-mode squeezing along `angle`: at angle 0 the x variance shrinks
    /// by e^{-2r} and the p variance grows by e^{2r}; at π/2 the roles swap.
    pub fn squeeze(&self, mode: usize, r: f64, angle: f64) -> Result<Self, GaussianError> {
        self.check_mode(mode)?;
        let (s, c) = angle.sin_cos();
        let (shrink, grow) = ((-r).exp(), r.exp());
        // R(angle) · diag(e^{-r}, e^{r}) · R(angle)ᵀ
        let block = [
            [c * c * shrink + s * s * grow, c * s * (shrink - grow)],
            [c * s * (shrink - grow), s * s * shrink + c * c * grow],
        ];
        self.transform(&self.embed(mode, block))
    }

    pub fn beam_splitter(&self, i: usize, j: usize, transmissivity: f64) -> Result<Self, GaussianError> {
        self.check_pair(i, j)?;
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(GaussianError::InvalidTransmissivity(transmissivity));
        }
        let t = transmissivity.sqrt();
        let rho = (1.0 - transmissivity).sqrt();
        let mut s = DMatrix::identity(self.mean.len(), self.mean.len());
        for q in 0..2 {
            let (a, b) = (2 * i + q, 2 * j + q);
            s[(a, a)] = t;
            s[(a, b)] = rho;
            s[(b, a)] = -rho;
            s[(b, b)] = t;
        }
        self.transform(&s)
    }

    /// Tensor product with another state; its modes are appended.
    pub fn direct_sum(&self, other: &GaussianState) -> Self {
        let (n1, n2) = (self.mean.len(), other.mean.len());
        let mut mean = DVector::zeros(n1 + n2);
        mean.rows_mut(0, n1).copy_from(&self.mean);
        mean.rows_mut(n1, n2).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(n1 + n2, n1 + n2);
        cov.view_mut((0, 0), (n1, n1)).copy_from(&self.cov);
        cov.view_mut((n1, n1), (n2, n2)).copy_from(&other.cov);
        Self { mean, cov }
    }

    /// Marginal state of the listed modes, in the given order.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self, GaussianError> {
        for &m in modes {
            self.check_mode(m)?;
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        if idx.is_empty() {
            return Err(GaussianError::Empty);
        }
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.cov[(idx[a], idx[b])]);
        Ok(Self { mean, cov })
    }

    /// Flips the sign of `mode`'s momentum (transpose in the Fock basis).
    pub fn partial_transpose(&self, mode: usize) -> Result<Self, GaussianError> {
        self.check_mode(mode)?;
        self.transform(&self.embed(mode, [[1.0, 0.0], [0.0, -1.0]]))
    }

    /// Homodyne measurement of `cos θ·x + sin θ·p` on `mode` with outcome 0.
    pub fn homodyne_condition(&self, mode: usize, quadrature_angle: f64) -> Result<Self, GaussianError> {
        self.homodyne_condition_with_outcome(mode, quadrature_angle, 0.0)
    }

    /// Conditions the remaining modes on a homodyne outcome.
    ///
    /// The remaining covariance is the Schur complement of the measured
    /// quadrature's variance; a vanishing variance leaves the rest untouched
    /// (Moore–Penrose inverse of zero).
    pub fn homodyne_condition_with_outcome(
        &self,
        mode: usize,
        quadrature_angle: f64,
        outcome: f64,
    ) -> Result<Self, GaussianError> {
        if self.n_modes() < 2 {
            return Err(GaussianError::TooFewModes);
        }
        self.check_mode(mode)?;
        let n = self.mean.len();
        let mut u = DVector::zeros(n);
        u[2 * mode] = quadrature_angle.cos();
        u[2 * mode + 1] = quadrature_angle.sin();

        let coupling = &self.cov * &u;
        let variance = u.dot(&coupling);
        let measured_mean = u.dot(&self.mean);

        let keep: Vec<usize> = (0..n).filter(|&k| k / 2 != mode).collect();
        let mut mean = DVector::from_iterator(keep.len(), keep.iter().map(|&k| self.mean[k]));
        let mut cov = DMatrix::from_fn(keep.len(), keep.len(), |a, b| self.cov[(keep[a], keep[b])]);

        if variance > DEGENERATE_RTOL * self.cov.amax() {
            let c = DVector::from_iterator(keep.len(), keep.iter().map(|&k| coupling[k]));
            cov -= &c * c.transpose() / variance;
            mean += &c * ((outcome - measured_mean) / variance);
        }
        Ok(Self {
            mean,
            cov: (&cov + cov.transpose()) * 0.5,
        })
    }
}

/// Logarithmic negativity between modes `a` and `b` of `state`.
///
/// Sums −ln(2ν̃) over the partially transposed symplectic eigenvalues below
/// 1/2; for two modes at most the smallest one contributes.
pub fn log_negativity(state: &GaussianState, a: usize, b: usize) -> Result<f64, GaussianError> {
    state.check_pair(a, b)?;
    let pair = state.reduced(&[a, b])?;
    if pair.cov.view((0, 2), (2, 2)).iter().all(|&v| v == 0.0) {
        // Product states are separable.
        return Ok(0.0);
    }
    let pt = pair.partial_transpose(1)?;
    let nu = pt.symplectic_eigenvalues()?;
    Ok(nu
        .iter()
        .filter(|&&v| v < VACUUM_VARIANCE)
        .map(|&v| -(2.0 * v).ln())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EprReport {
    /// V(x_A | x_B).
    pub cond_var_x: f64,
    /// V(p_A | p_B).
    pub cond_var_p: f64,
    pub reid_product: f64,
    pub epr_certified: bool,
    pub log_negativity: f64,
}

/// Reid inference variances of mode `a` given same-quadrature homodyne on
/// `b`, and the logarithmic negativity of the pair.
pub fn epr_report(state: &GaussianState, a: usize, b: usize) -> Result<EprReport, GaussianError> {
    state.check_pair(a, b)?;
    let pair = state.reduced(&[a, b])?;
    let given_x = pair.homodyne_condition(1, 0.0)?;
    let given_p = pair.homodyne_condition(1, std::f64::consts::FRAC_PI_2)?;
    let cond_var_x = given_x.cov()[(0, 0)];
    let cond_var_p = given_p.cov()[(1, 1)];
    let reid_product = cond_var_x * cond_var_p;
    Ok(EprReport {
        cond_var_x,
        cond_var_p,
        reid_product,
        epr_certified: reid_product < REID_BOUND,
        log_negativity: log_negativity(state, a, b)?,
    })
}

/// Two squeezed vacua superposed on a balanced beam splitter.
///
/// Mode 0 is squeezed in p by `r1`, mode 1 in x by `r2`. The outputs have
/// anti-correlated amplitude and correlated phase quadratures, so
/// V(x_A + x_B) = e^{-2 r2} and V(p_A − p_B) = e^{-2 r1}.
pub fn epr_pair(r1: f64, r2: f64) -> Result<GaussianState, GaussianError> {
    for r in [r1, r2] {
        if r < 0.0 {
            return Err(GaussianError::NegativeSqueezing(r));
        }
    }
    GaussianState::vacuum(2)?
        .squeeze(0, r1, std::f64::consts::FRAC_PI_2)?
        .squeeze(1, r2, 0.0)?
        .beam_splitter(0, 1, 0.5)
}

/// Entanglement swapping between two EPR pairs (A, B) and (C, D).
///
/// B and C meet on a balanced beam splitter; one output is measured in x,
/// the other in p, and the report describes the conditional state of A, D.
pub fn entanglement_swap(r_pair1: f64, r_pair2: f64) -> Result<EprReport, GaussianError> {
    let state = swapped_state(r_pair1, r_pair2)?;
    epr_report(&state, 0, 1)
}

/// Conditional two-mode state of the outer modes after swapping.
pub fn swapped_state(r_pair1: f64, r_pair2: f64) -> Result<GaussianState, GaussianError> {
    let joint = epr_pair(r_pair1, r_pair1)?.direct_sum(&epr_pair(r_pair2, r_pair2)?);
    // Modes: 0 = A, 1 = B, 2 = C, 3 = D.
    joint
        .beam_splitter(1, 2, 0.5)?
        .homodyne_condition(1, 0.0)?
        // C has moved to index 1 after B was removed.
        .homodyne_condition(1, std::f64::consts::FRAC_PI_2)
}
