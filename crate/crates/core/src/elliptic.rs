//! Jacobi theta functions and Weierstrass σ, ζ on the rectangular lattice
//! 2ℤ + 2τℤ.
//!
//! Conventions: ω₁ = 2, ω₂ = 2τ, nome q = exp(iπτ), v = πz/2. Then
//!
//! σ(z) = (2/π) · exp(η₁z²/2) · θ₁(v) / θ₁'(0),   η₁ = (π²/12) · E₂(q²),
//!
//! and the quasi-periodicity verified numerically by this crate's tests is
//!
//! σ(z + ω_i) = −exp(2η_i (z + ω_i/2)) · σ(z).
//!
//! [`Lattice::log_sigma_upper`] and [`Lattice::log_sigma_lower`] give a
//! branch-fixed logarithm of σ on the two halves of the strip
//! |Im z| ≤ Im τ; harmonic extensions are built from their imaginary parts.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Distance from a lattice point below which σ is treated as zero and ζ as
/// singular.
pub const POLE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error("lattice with tau = {tau} is invalid: {reason}")]
    InvalidLattice { tau: Complex64, reason: String },
    #[error("series for tau = {tau} did not converge within {max_terms} terms")]
    NonConvergence { tau: Complex64, max_terms: usize },
    #[error("z = {z} is within {dist:.3e} of the lattice point {point}")]
    PoleProximity { z: Complex64, point: Complex64, dist: f64 },
    #[error("z = {z} is outside the strip |Im z| <= {limit} where the log-sigma series is valid")]
    OutsideStrip { z: Complex64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, EllipticError>;

/// Truncation control for the q-series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-17,
            max_terms: 256,
        }
    }
}

/// Period lattice 2ℤ + 2τℤ with cached series data and quasi-periods.
#[derive(Debug, Clone)]
pub struct Lattice {
    tau: Complex64,
    q: Complex64,
    cfg: SeriesConfig,
    /// q^{2n} for n = 1..=N.
    q2n: Vec<Complex64>,
    /// Σ log(1 − q^{2n}).
    log_euler: Complex64,
    theta1_prime0: Complex64,
    eta1: Complex64,
    eta2: Complex64,
}

impl Lattice {
    pub fn new(tau: Complex64) -> Result<Self> {
        Self::with_config(tau, SeriesConfig::default())
    }

    /// Lattice with purely imaginary τ = i·tau_im.
    pub fn imaginary(tau_im: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, tau_im))
    }

    pub fn with_config(tau: Complex64, cfg: SeriesConfig) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(EllipticError::InvalidLattice {
                tau,
                reason: "Im(tau) must be positive and finite".into(),
            });
        }
        if !(cfg.rel_tol > 0.0) || cfg.max_terms < 16 {
            return Err(EllipticError::InvalidLattice {
                tau,
                reason: format!(
                    "series config needs rel_tol > 0 and max_terms >= 16 (got {:?})",
                    cfg
                ),
            });
        }
        let q = (I * PI * tau).exp();
        let qa = q.norm();
        if qa >= 1.0 {
            return Err(EllipticError::NonConvergence {
                tau,
                max_terms: cfg.max_terms,
            });
        }
        // Term n of the log-sigma and zeta sums is bounded by |q|^{2n-1} on
        // the strip |Im z| <= Im τ; keep terms until the next one is negligible.
        let mut q2n = Vec::new();
        let q2 = q * q;
        let mut p = q2;
        loop {
            q2n.push(p);
            if qa.powf(2.0 * q2n.len() as f64 + 1.0) < cfg.rel_tol {
                break;
            }
            if q2n.len() >= cfg.max_terms {
                return Err(EllipticError::NonConvergence {
                    tau,
                    max_terms: cfg.max_terms,
                });
            }
            p *= q2;
        }
        let log_euler = q2n.iter().map(|&x| (1.0 - x).ln()).sum();

        let mut lat = Self {
            tau,
            q,
            cfg,
            q2n,
            log_euler,
            theta1_prime0: Complex64::new(0.0, 0.0),
            eta1: Complex64::new(0.0, 0.0),
            eta2: Complex64::new(0.0, 0.0),
        };
        lat.theta1_prime0 = lat.theta1_prime_zero()?;
        let e2: Complex64 = Complex64::new(1.0, 0.0)
            - 24.0
                * lat
                    .q2n
                    .iter()
                    .enumerate()
                    .map(|(k, &x)| (k as f64 + 1.0) * x / (1.0 - x))
                    .sum::<Complex64>();
        lat.eta1 = PI * PI / 12.0 * e2;
        lat.eta2 = lat.zeta_strip(tau);
        Ok(lat)
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn tau_im(&self) -> f64 {
        self.tau.im
    }

    pub fn omega1(&self) -> Complex64 {
        Complex64::new(2.0, 0.0)
    }

    pub fn omega2(&self) -> Complex64 {
        2.0 * self.tau
    }

    pub fn nome(&self) -> Complex64 {
        self.q
    }

    pub fn config(&self) -> SeriesConfig {
        self.cfg
    }

    /// Number of retained product terms.
    pub fn terms(&self) -> usize {
        self.q2n.len()
    }

    /// Quasi-period constants (η₁, η₂) = (ζ(ω₁/2), ζ(ω₂/2)).
    pub fn eta_constants(&self) -> (Complex64, Complex64) {
        (self.eta1, self.eta2)
    }

    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }

    pub fn eta2(&self) -> Complex64 {
        self.eta2
    }

    /// q^{(n+1/2)^2} and q^{n^2} without forming fractional powers of q.
    fn qpow(&self, e: f64) -> Complex64 {
        (I * PI * self.tau * e).exp()
    }

    /// Sums `term(n)` for n = start.. until terms fall below rel_tol of the
    /// largest one seen.
    fn series(&self, start: usize, mut term: impl FnMut(usize) -> Complex64) -> Result<Complex64> {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut biggest = 0.0f64;
        let mut small_run = 0;
        for n in start..start + self.cfg.max_terms {
            let t = term(n);
            let a = t.norm();
            sum += t;
            biggest = biggest.max(a);
            if a <= self.cfg.rel_tol * biggest || a == 0.0 {
                small_run += 1;
                if small_run >= 2 {
                    return Ok(sum);
                }
            } else {
                small_run = 0;
            }
        }
        Err(EllipticError::NonConvergence {
            tau: self.tau,
            max_terms: self.cfg.max_terms,
        })
    }

    /// θ₁(πz/2 | τ).
    pub fn theta1(&self, z: Complex64) -> Result<Complex64> {
        let v = PI * z / 2.0;
        let s = self.series(0, |n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let k = n as f64 + 0.5;
            sign * self.qpow(k * k) * ((2.0 * n as f64 + 1.0) * v).sin()
        })?;
        Ok(2.0 * s)
    }

    /// θ₂(πz/2 | τ).
    pub fn theta2(&self, z: Complex64) -> Result<Complex64> {
        let v = PI * z / 2.0;
        let s = self.series(0, |n| {
            let k = n as f64 + 0.5;
            self.qpow(k * k) * ((2.0 * n as f64 + 1.0) * v).cos()
        })?;
        Ok(2.0 * s)
    }

    /// θ₃(πz/2 | τ).
    pub fn theta3(&self, z: Complex64) -> Result<Complex64> {
        let v = PI * z / 2.0;
        let s = self.series(1, |n| {
            let k = n as f64;
            self.qpow(k * k) * (2.0 * k * v).cos()
        })?;
        Ok(1.0 + 2.0 * s)
    }

    /// θ₄(πz/2 | τ).
    pub fn theta4(&self, z: Complex64) -> Result<Complex64> {
        let v = PI * z / 2.0;
        let s = self.series(1, |n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let k = n as f64;
            sign * self.qpow(k * k) * (2.0 * k * v).cos()
        })?;
        Ok(1.0 + 2.0 * s)
    }

    fn theta1_prime_zero(&self) -> Result<Complex64> {
        let s = self.series(0, |n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let k = n as f64 + 0.5;
            sign * (2.0 * n as f64 + 1.0) * self.qpow(k * k)
        })?;
        Ok(2.0 * s)
    }

    /// dθ₁/dv at v = 0.
    pub fn theta1_prime0(&self) -> Complex64 {
        self.theta1_prime0
    }

    /// Complementary modulus k' = θ₄(0)²/θ₃(0)².
    pub fn k_prime(&self) -> Result<Complex64> {
        let t3 = self.theta3(Complex64::new(0.0, 0.0))?;
        let t4 = self.theta4(Complex64::new(0.0, 0.0))?;
        Ok(t4 * t4 / (t3 * t3))
    }

    /// Weierstrass σ, normalized so that σ(z) = z + O(z⁵).
    pub fn sigma(&self, z: Complex64) -> Result<Complex64> {
        let th = self.theta1(z)?;
        Ok(2.0 / PI * (self.eta1 * z * z / 2.0).exp() * th / self.theta1_prime0)
    }

    /// Writes z = z0 + 2k + 2mτ with Re z0 ∈ [−1, 1) and Im z0 ∈ [−Im τ, Im τ).
    fn reduce(&self, z: Complex64) -> (Complex64, f64, f64) {
        let h = self.tau.im;
        let m = ((z.im + h) / (2.0 * h)).floor();
        let w = z - 2.0 * m * self.tau;
        let k = ((w.re + 1.0) / 2.0).floor();
        (w - 2.0 * k, k, m)
    }

    fn guard(&self, z: Complex64, z0: Complex64) -> Result<()> {
        let d = z0.norm();
        if d < POLE_GUARD {
            return Err(EllipticError::PoleProximity {
                z,
                point: z - z0,
                dist: d,
            });
        }
        Ok(())
    }

    /// Weierstrass ζ = σ'/σ.
    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        let (z0, k, m) = self.reduce(z);
        self.guard(z, z0)?;
        Ok(self.zeta_strip(z0) + 2.0 * k * self.eta1 + 2.0 * m * self.eta2)
    }

    /// ζ from the product expansion, valid for |Im z| <= Im τ.
    fn zeta_strip(&self, z: Complex64) -> Complex64 {
        let v = PI * z / 2.0;
        let e = (2.0 * I * v).exp();
        let einv = (-2.0 * I * v).exp();
        let mut acc = v.cos() / v.sin();
        for &p in &self.q2n {
            let x = p * e;
            let y = p * einv;
            acc += -2.0 * I * x / (1.0 - x) + 2.0 * I * y / (1.0 - y);
        }
        self.eta1 * z + PI / 2.0 * acc
    }

    fn check_strip(&self, z: Complex64) -> Result<()> {
        let limit = 1.5 * self.tau.im;
        if z.im.abs() > limit || !z.re.is_finite() {
            return Err(EllipticError::OutsideStrip { z, limit });
        }
        let k = (z.re / 2.0).round();
        let p = Complex64::new(2.0 * k, 0.0);
        let d = (z - p).norm();
        if d < POLE_GUARD {
            return Err(EllipticError::PoleProximity { z, point: p, dist: d });
        }
        Ok(())
    }

    fn log_sigma_common(&self, z: Complex64) -> Complex64 {
        let v = PI * z / 2.0;
        let e = (2.0 * I * v).exp();
        let einv = (-2.0 * I * v).exp();
        let mut acc = Complex64::new((2.0 / PI).ln(), 0.0) - 2.0 * self.log_euler
            + self.eta1 * z * z / 2.0;
        for &p in &self.q2n {
            acc += (1.0 - p * e).ln() + (1.0 - p * einv).ln();
        }
        acc
    }

    /// Branch of log σ(z) continuous on 0 ≤ Im z ≤ 1.5·Im τ (minus the zeros
    /// 2k), real-valued on the segment (0, 2).
    pub fn log_sigma_upper(&self, z: Complex64) -> Result<Complex64> {
        self.check_strip(z)?;
        let v = PI * z / 2.0;
        let ls = Complex64::new(0.0, 0.5).ln() - I * v + (1.0 - (2.0 * I * v).exp()).ln();
        Ok(self.log_sigma_common(z) + ls)
    }

    /// Mirror branch of log σ(z) on −1.5·Im τ ≤ Im z ≤ 0; equals the
    /// conjugate of `log_sigma_upper(z̄)` for purely imaginary τ.
    pub fn log_sigma_lower(&self, z: Complex64) -> Result<Complex64> {
        self.check_strip(z)?;
        let v = PI * z / 2.0;
        let ls = Complex64::new(0.0, -0.5).ln() + I * v + (1.0 - (-2.0 * I * v).exp()).ln();
        Ok(self.log_sigma_common(z) + ls)
    }

    /// log σ(z) on the branch selected by the sign of Im z.
    pub fn log_sigma(&self, z: Complex64) -> Result<Complex64> {
        if z.im >= 0.0 {
            self.log_sigma_upper(z)
        } else {
            self.log_sigma_lower(z)
        }
    }
}

/// Im(log σ(u−b) − log σ(u−a)) from the branch-fixed series, never from the
/// principal argument of the quotient. Each term uses the branch of its own
/// half-strip, so the value is continuous along paths that keep u − a and
/// u − b off the real axis, and 0 when both are small positive reals.
pub fn im_log_sigma_ratio(u: Complex64, b: Complex64, a: Complex64, lattice: &Lattice) -> Result<f64> {
    let lb = lattice.log_sigma(u - b)?;
    let la = lattice.log_sigma(u - a)?;
    Ok((lb - la).im)
}
