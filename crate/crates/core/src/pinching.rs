//! Scalar pinching functions for submanifolds of `H^n(c)` and their
//! certified properties.
//!
//! `alpha(n, |H|, c)` is the sharp pinching threshold for `|h|^2`; its
//! traceless companion `alpha_ring(y) = alpha(n, sqrt(y), c) - y/n` drives
//! every monitor in the flow engines. Near the domain boundary
//! `y -> -n^2 c` the radicand is evaluated in the factored form
//! `y (y + 4(n-1)c)` to avoid cancellation.

use crate::curvature::SecondFundamentalForm;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dimension and ambient curvature bundle for the pinching functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinchingProfile {
    n: u32,
    c: f64,
}

/// Exponent configuration for the auxiliary function
/// `f_sigma = |h-ring|^2 / alpha_ring^{1-sigma}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaConfig {
    sigma: f64,
}

impl SigmaConfig {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::Config(format!("sigma must lie in (0,1), got {sigma}")));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// `alpha(n,|H|,c) = nc + n/(2(n-1)) |H|^2 - (n-2)/(2(n-1)) sqrt(|H|^4 + 4(n-1)c|H|^2)`,
/// defined wherever the radicand is non-negative; valid for either sign of `c`.
pub fn alpha_general(n: u32, h_norm: f64, c: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Config(format!("n must be >= 2, got {n}")));
    }
    if h_norm < 0.0 {
        return Err(Error::Domain(format!("|H| must be >= 0, got {h_norm}")));
    }
    let nf = n as f64;
    let y = h_norm * h_norm;
    let radicand = y * (y + 4.0 * (nf - 1.0) * c);
    if radicand < 0.0 {
        return Err(Error::Domain(format!(
            "negative radicand at |H|^2 = {y:.6e}, c = {c}"
        )));
    }
    Ok(nf * c + nf / (2.0 * (nf - 1.0)) * y - (nf - 2.0) / (2.0 * (nf - 1.0)) * radicand.sqrt())
}

impl PinchingProfile {
    pub fn new(n: u32, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("n must be >= 2, got {n}")));
        }
        if !(c < 0.0) || !c.is_finite() {
            return Err(Error::Config(format!("c must be negative, got {c}")));
        }
        Ok(Self { n, c })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `-n^2 c`, the lower edge of the mean-curvature regime.
    pub fn y_threshold(&self) -> f64 {
        -self.nf() * self.nf() * self.c
    }

    pub fn alpha(&self, h_norm: f64) -> Result<f64> {
        alpha_general(self.n, h_norm, self.c)
    }

    fn radicand(&self, y: f64) -> Result<f64> {
        let r = y * (y + 4.0 * (self.nf() - 1.0) * self.c);
        if r < 0.0 {
            return Err(Error::Domain(format!(
                "alpha_ring radicand negative at y = {y:.6e} (n = {}, c = {})",
                self.n, self.c
            )));
        }
        Ok(r)
    }

    /// `alpha_ring(y) = nc + (n^2-2n+2)/(2(n-1)n) y - (n-2)/(2(n-1)) sqrt(y^2 + 4(n-1)cy)`.
    ///
    /// Evaluable wherever the radicand is non-negative, which includes the
    /// closed boundary `y = -n^2 c` where it vanishes.
    pub fn alpha_ring(&self, y: f64) -> Result<f64> {
        let n = self.nf();
        let r = self.radicand(y)?;
        Ok(n * self.c + (n * n - 2.0 * n + 2.0) / (2.0 * (n - 1.0) * n) * y
            - (n - 2.0) / (2.0 * (n - 1.0)) * r.sqrt())
    }

    /// First derivative of `alpha_ring`.
    pub fn alpha_ring_d1(&self, y: f64) -> Result<f64> {
        let n = self.nf();
        let r = self.radicand(y)?;
        if r == 0.0 {
            return Err(Error::Domain(format!("alpha_ring' singular at y = {y:.6e}")));
        }
        Ok((n * n - 2.0 * n + 2.0) / (2.0 * (n - 1.0) * n)
            - (n - 2.0) / (2.0 * (n - 1.0)) * (y + 2.0 * (n - 1.0) * self.c) / r.sqrt())
    }

    /// Second derivative: `2(n-1)(n-2)c^2 / (y^2 + 4(n-1)cy)^{3/2}`.
    pub fn alpha_ring_d2(&self, y: f64) -> Result<f64> {
        let n = self.nf();
        let r = self.radicand(y)?;
        if r == 0.0 {
            return Err(Error::Domain(format!("alpha_ring'' singular at y = {y:.6e}")));
        }
        Ok(2.0 * (n - 1.0) * (n - 2.0) * self.c * self.c / r.powf(1.5))
    }

    /// Substitution `xi = y / sqrt(y^2 + 4(n-1)cy)`, mapping
    /// `(-n^2 c, inf)` into `(1, n/(n-2))`.
    pub fn xi_of_y(&self, y: f64) -> Result<f64> {
        if y <= self.y_threshold() {
            return Err(Error::Domain(format!(
                "xi substitution needs y > {:.6e}, got {y:.6e}",
                self.y_threshold()
            )));
        }
        Ok(y / self.radicand(y)?.sqrt())
    }

    /// Inverse substitution `y = 4(n-1)c / (xi^{-2} - 1)`.
    pub fn y_of_xi(&self, xi: f64) -> Result<f64> {
        let n = self.nf();
        if !(xi > 1.0 && xi < n / (n - 2.0)) {
            return Err(Error::Domain(format!(
                "xi must lie in (1, {:.6}), got {xi}",
                n / (n - 2.0)
            )));
        }
        Ok(4.0 * (n - 1.0) * self.c / (1.0 / (xi * xi) - 1.0))
    }

    /// `omega = |H|^2 + 4(n-1)c`; positive throughout the regime since
    /// `n^2 >= 4(n-1)`.
    pub fn omega(&self, y: f64) -> f64 {
        y + 4.0 * (self.nf() - 1.0) * self.c
    }

    /// Residuals and margins for the six certified properties of
    /// `alpha_ring` on `y > -n^2 c`. Identities should vanish; for `n >= 6`
    /// every inequality margin is strictly positive, and for `n = 5` at
    /// least one of them fails near the boundary.
    pub fn alpha_ring_property_margins(&self, y: f64) -> Result<AlphaRingMargins> {
        let n = self.nf();
        let c = self.c;
        if y <= self.y_threshold() {
            return Err(Error::Domain(format!(
                "margins need y > {:.6e}, got {y:.6e}",
                self.y_threshold()
            )));
        }
        let a = self.alpha_ring(y)?;
        let a1 = self.alpha_ring_d1(y)?;
        let a2 = self.alpha_ring_d2(y)?;
        let id_i = y * a1 * (a + y / n + n * c) - a * (a + y / n - n * c);
        let id_ii = (n - 2.0) / (n * (n - 1.0)).sqrt() * (y * a).max(0.0).sqrt()
            - (y / n - a + n * c);
        Ok(AlphaRingMargins {
            id_i,
            id_ii,
            alpha_pos: a,
            alpha_upper: (y + n * n * c) / (n * (n - 1.0)) - a,
            d1_pos: a1,
            d1_upper: 1.0 / (n * (n - 1.0)) - a1,
            d2_pos: a2,
            grad_compare: a.max(0.0).sqrt() - 2.0 * y.sqrt() * a1,
            euler_compare: y * a1 - a,
            concavity_budget: 2.0 * (n - 1.0) / (n * (n + 2.0)) - (2.0 * y * a2 + a1),
        })
    }

    fn regime_y(&self, h: &SecondFundamentalForm) -> Result<(f64, f64)> {
        let y = h.mean_norm_sq();
        if y <= self.y_threshold() {
            return Err(Error::OutsideMeanCurvatureRegime(format!(
                "|H|^2 = {y:.6e} <= {:.6e}",
                self.y_threshold()
            )));
        }
        Ok((y, h.traceless_norm_sq()))
    }

    /// `alpha_ring(|H|^2) - eps omega(|H|^2) - |h-ring|^2`; positive means
    /// strictly pinched.
    pub fn pinch_margin(&self, h: &SecondFundamentalForm, eps: f64) -> Result<f64> {
        let (y, ho_sq) = self.regime_y(h)?;
        Ok(self.alpha_ring(y)? - eps * self.omega(y) - ho_sq)
    }

    /// Scalar form of [`Self::pinch_margin`] for precomputed `(|H|^2, |h-ring|^2)`.
    pub fn pinch_margin_scalar(&self, y: f64, ho_sq: f64, eps: f64) -> Result<f64> {
        if y <= self.y_threshold() {
            return Err(Error::OutsideMeanCurvatureRegime(format!(
                "|H|^2 = {y:.6e} <= {:.6e}",
                self.y_threshold()
            )));
        }
        Ok(self.alpha_ring(y)? - eps * self.omega(y) - ho_sq)
    }

    /// `(alpha_ring - |h-ring|^2)/omega`: the largest eps for which the
    /// strict pinching condition holds at this point (non-positive when the
    /// point sits on or outside the boundary).
    pub fn eps_star(&self, h: &SecondFundamentalForm) -> Result<f64> {
        let (y, ho_sq) = self.regime_y(h)?;
        Ok((self.alpha_ring(y)? - ho_sq) / self.omega(y))
    }

    pub fn eps_star_scalar(&self, y: f64, ho_sq: f64) -> Result<f64> {
        if y <= self.y_threshold() {
            return Err(Error::OutsideMeanCurvatureRegime(format!(
                "|H|^2 = {y:.6e} <= {:.6e}",
                self.y_threshold()
            )));
        }
        Ok((self.alpha_ring(y)? - ho_sq) / self.omega(y))
    }

    /// `f_sigma = |h-ring|^2 alpha_ring^{sigma - 1}` (zero at umbilic points).
    pub fn f_sigma(&self, s: SigmaConfig, h: &SecondFundamentalForm) -> Result<f64> {
        let (y, ho_sq) = self.regime_y(h)?;
        self.f_sigma_scalar(s, y, ho_sq)
    }

    pub fn f_sigma_scalar(&self, s: SigmaConfig, y: f64, ho_sq: f64) -> Result<f64> {
        if ho_sq == 0.0 {
            return Ok(0.0);
        }
        if y <= self.y_threshold() {
            return Err(Error::OutsideMeanCurvatureRegime(format!(
                "|H|^2 = {y:.6e} <= {:.6e}",
                self.y_threshold()
            )));
        }
        let a = self.alpha_ring(y)?;
        if a <= 0.0 {
            return Err(Error::Domain(format!("alpha_ring = {a:.6e} not positive")));
        }
        Ok(ho_sq * a.powf(s.sigma - 1.0))
    }
}

/// Margin record for the six properties of `alpha_ring`.
///
/// `id_*` are identity residuals (0 expected); all other fields are margins
/// that the certification asserts strictly positive for `n >= 6`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AlphaRingMargins {
    /// residual of `y a' (a + y/n + nc) = a (a + y/n - nc)`
    pub id_i: f64,
    /// residual of `(n-2)/sqrt(n(n-1)) sqrt(y a) = y/n - a + nc`
    pub id_ii: f64,
    /// `a > 0`
    pub alpha_pos: f64,
    /// `a < (y + n^2 c)/(n(n-1))`
    pub alpha_upper: f64,
    /// `a' > 0`
    pub d1_pos: f64,
    /// `a' < 1/(n(n-1))`
    pub d1_upper: f64,
    /// `a'' > 0`
    pub d2_pos: f64,
    /// `2 sqrt(y) a' < sqrt(a)`
    pub grad_compare: f64,
    /// `y a' > a`
    pub euler_compare: f64,
    /// `2y a'' + a' < 2(n-1)/(n(n+2))`
    pub concavity_budget: f64,
}

impl AlphaRingMargins {
    /// Inequality margins in a fixed order with stable labels.
    pub fn inequalities(&self) -> [(&'static str, f64); 8] {
        [
            ("alpha_pos", self.alpha_pos),
            ("alpha_upper", self.alpha_upper),
            ("d1_pos", self.d1_pos),
            ("d1_upper", self.d1_upper),
            ("d2_pos", self.d2_pos),
            ("grad_compare", self.grad_compare),
            ("euler_compare", self.euler_compare),
            ("concavity_budget", self.concavity_budget),
        ]
    }
}

const SQRT7: f64 = 2.6457513110645906;

/// `beta(x) = 5/11 c + 15/88 x + (sqrt(7)/88) sqrt(7x^2 + 272cx + 4000c^2)`
/// (n = 5). The radicand has negative discriminant, so `beta` is defined for
/// every `x` when `c != 0`.
pub fn beta(x: f64, c: f64) -> f64 {
    5.0 / 11.0 * c + 15.0 / 88.0 * x + SQRT7 / 88.0 * beta_radicand(x, c).sqrt()
}

fn beta_radicand(x: f64, c: f64) -> f64 {
    7.0 * x * x + 272.0 * c * x + 4000.0 * c * c
}

/// `beta_ring(x) = beta(x) - x/5`.
pub fn beta_ring(x: f64, c: f64) -> f64 {
    beta(x, c) - x / 5.0
}

pub fn beta_ring_d1(x: f64, c: f64) -> f64 {
    15.0 / 88.0 + SQRT7 / 88.0 * (7.0 * x + 136.0 * c) / beta_radicand(x, c).sqrt() - 0.2
}

pub fn beta_ring_d2(x: f64, c: f64) -> f64 {
    // second derivative of the radical term: 9504 c^2 sqrt(7) / (88 R^3)
    108.0 * SQRT7 * c * c / beta_radicand(x, c).powf(1.5)
}

/// Margins for the `n = 5` properties of `beta_ring` on `x > -25c`, plus the
/// comparison `x/4 + 2c < beta(x)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BetaMargins {
    /// `beta_ring > max(x/20 + 2c, 0)`
    pub lower_gap: f64,
    /// `beta_ring < alpha_ring` at n = 5
    pub upper_gap: f64,
    /// `x b' (b + x/5 + 5c) > b (b + x/5 - 5c)`
    pub ode_compare: f64,
    /// `2 sqrt(x) b' < sqrt(b)`
    pub grad_compare: f64,
    /// `2x b'' + b' < 8/35`
    pub concavity_budget: f64,
    /// `x/4 + 2c < beta(x)`
    pub improves_linear: f64,
}

impl BetaMargins {
    pub fn all(&self) -> [(&'static str, f64); 6] {
        [
            ("lower_gap", self.lower_gap),
            ("upper_gap", self.upper_gap),
            ("ode_compare", self.ode_compare),
            ("grad_compare", self.grad_compare),
            ("concavity_budget", self.concavity_budget),
            ("improves_linear", self.improves_linear),
        ]
    }
}

pub fn beta_margins(x: f64, c: f64) -> Result<BetaMargins> {
    if !(c < 0.0) {
        return Err(Error::Config(format!("c must be negative, got {c}")));
    }
    if x <= -25.0 * c {
        return Err(Error::Domain(format!(
            "beta suite needs x > {:.6e}, got {x:.6e}",
            -25.0 * c
        )));
    }
    let b = beta_ring(x, c);
    let b1 = beta_ring_d1(x, c);
    let b2 = beta_ring_d2(x, c);
    let alpha5 = PinchingProfile::new(5, c)?.alpha_ring(x)?;
    Ok(BetaMargins {
        lower_gap: b - (x / 20.0 + 2.0 * c).max(0.0),
        upper_gap: alpha5 - b,
        ode_compare: x * b1 * (b + x / 5.0 + 5.0 * c) - b * (b + x / 5.0 - 5.0 * c),
        grad_compare: b.max(0.0).sqrt() - 2.0 * x.sqrt() * b1,
        concavity_budget: 8.0 / 35.0 - (2.0 * x * b2 + b1),
        improves_linear: beta(x, c) - (x / 4.0 + 2.0 * c),
    })
}
