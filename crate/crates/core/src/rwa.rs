//! Dressed-state rotating-wave oracle: Bessel-renormalized gap, resonance
//! lineshape, and closed-form rates for longitudinal and transverse noise.

use std::f64::consts::PI;

use crate::bath::OhmicBath;
use crate::error::{LzsError, Result};
use crate::model::TlsParams;

/// Integer-order Bessel function of the first kind (Miller backward recurrence).
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    if !x.is_finite() || n.abs() > 200 || x.abs() > 500.0 {
        return Err(LzsError::InvalidParameter(format!("bessel_j out of range: n={n}, x={x}")));
    }
    let order = n.unsigned_abs() as usize;
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x)
    let mut sign = 1.0;
    if (n < 0) != (x < 0.0) && order % 2 == 1 {
        sign = -1.0;
    }
    let x = x.abs();
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    let top = order.max(x.ceil() as usize) + 40 + (10.0 * x.cbrt()) as usize;
    let top = top + top % 2;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=top).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if k - 1 == order {
            wanted = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    Ok(sign * wanted / norm)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedParams {
    pub n: i32,
    /// Δ_n = Δ·J_{−n}(A/ω₀)
    pub delta_n: f64,
    /// ε₀ − nω₀
    pub epsilon_n: f64,
    pub omega_n: f64,
    pub cos2phi: f64,
    pub sin2phi: f64,
    /// A/ω₀ = f_ac/f_ω
    pub x: f64,
    pub epsilon0: f64,
    pub omega0: f64,
    /// |ε_n| ≲ 10|Δ_n|: the single-resonance reduction holds.
    pub near_resonance: bool,
    /// A·ω₀ ≥ 10Δ²: strong-driving condition.
    pub strong_drive: bool,
}

pub fn dressed_params(tls: &TlsParams, f_dc: f64, f_ac: f64, omega0: f64, n: i32) -> Result<DressedParams> {
    let epsilon0 = 4.0 * PI * tls.i_p * f_dc;
    let amp = 4.0 * PI * tls.i_p * f_ac;
    dressed_from_energies(tls.delta, epsilon0, amp, omega0, n)
}

pub fn dressed_from_energies(delta: f64, epsilon0: f64, amp: f64, omega0: f64, n: i32) -> Result<DressedParams> {
    if !(omega0 > 0.0) {
        return Err(LzsError::InvalidParameter("omega0 must be > 0".into()));
    }
    let x = amp / omega0;
    let delta_n = delta * bessel_j(-n, x)?;
    let epsilon_n = epsilon0 - n as f64 * omega0;
    let omega_n = epsilon_n.hypot(delta_n);
    let (cos2phi, sin2phi) = if omega_n > 0.0 { (epsilon_n / omega_n, delta_n / omega_n) } else { (1.0, 0.0) };
    Ok(DressedParams {
        n,
        delta_n,
        epsilon_n,
        omega_n,
        cos2phi,
        sin2phi,
        x,
        epsilon0,
        omega0,
        near_resonance: epsilon_n.abs() <= 10.0 * delta_n.abs(),
        strong_drive: amp * omega0 >= 10.0 * delta * delta,
    })
}

/// Nearest resonance index round(ε₀/ω₀).
pub fn nearest_resonance(epsilon0: f64, omega0: f64) -> i32 {
    (epsilon0 / omega0).round() as i32
}

/// Time-averaged P₊ near the n-photon resonance.
pub fn p_plus_averaged(d: &DressedParams) -> f64 {
    let d2 = d.delta_n * d.delta_n;
    let den = d.epsilon_n * d.epsilon_n + d2;
    if den == 0.0 {
        return 1.0;
    }
    1.0 - 0.5 * d2 / den
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwaRates {
    /// population relaxation, Γ↑ + Γ↓
    pub gamma_r: f64,
    /// coherence decay, Γ_r/2 + Γ_φ
    pub gamma_d: f64,
    pub gamma_phi: f64,
    pub up: f64,
    pub down: f64,
}

impl RwaRates {
    /// (Γ_d, Γ_r): the two rates with their labels exchanged.
    pub fn swapped_labels(&self) -> (f64, f64) {
        (self.gamma_d, self.gamma_r)
    }

    fn from_components(transverse: f64, longitudinal: f64, omega_n: f64, bath: &OhmicBath) -> Self {
        let t2 = transverse * transverse;
        let up = t2 * bath.g(omega_n);
        let down = t2 * bath.g(-omega_n);
        let gamma_r = up + down;
        let gamma_phi = longitudinal * longitudinal * bath.g(0.0);
        RwaRates { gamma_r, gamma_d: gamma_r / 2.0 + gamma_phi, gamma_phi, up, down }
    }
}

pub fn rates_longitudinal(d: &DressedParams, bath: &OhmicBath, lambda_f: f64) -> RwaRates {
    RwaRates::from_components(lambda_f * d.sin2phi, lambda_f * d.cos2phi, d.omega_n, bath)
}

pub fn rates_transverse(d: &DressedParams, bath: &OhmicBath, lambda_ch: f64) -> Result<RwaRates> {
    let c0 = bessel_j(-d.n, d.x)?;
    Ok(RwaRates::from_components(lambda_ch * c0 * d.cos2phi, lambda_ch * c0 * d.sin2phi, d.omega_n, bath))
}

/// Coefficients of λ(cosθ·σ_z + sinθ·σ_x) in the rotated dressed frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedCoefficients {
    pub a_x0: f64,
    pub a_xc: f64,
    pub a_ys: f64,
    pub a_z0: f64,
    pub a_zc: f64,
    pub c0: f64,
}

impl DressedCoefficients {
    /// weight at zero frequency (pure dephasing)
    pub fn z0(&self) -> f64 {
        self.a_z0 + self.a_zc * self.c0
    }

    /// weight at ±Ω_n (relaxation)
    pub fn x_omega(&self) -> f64 {
        self.a_x0 + self.a_xc * self.c0
    }

    pub fn rates(&self, d: &DressedParams, bath: &OhmicBath) -> RwaRates {
        RwaRates::from_components(self.x_omega(), self.z0(), d.omega_n, bath)
    }
}

pub fn dressed_coupling_coefficients(lambda: f64, theta: f64, phi: f64, n: i32, x: f64) -> Result<DressedCoefficients> {
    let (s2, c2) = (2.0 * phi).sin_cos();
    let (st, ct) = theta.sin_cos();
    Ok(DressedCoefficients {
        a_x0: lambda * ct * s2,
        a_xc: -lambda * st * c2,
        a_ys: -lambda * st,
        a_z0: lambda * ct * c2,
        a_zc: lambda * st * s2,
        c0: bessel_j(-n, x)?,
    })
}

/// Rotation angle φ with (cos2φ, sin2φ) = (ε_n, Δ_n)/Ω_n.
pub fn rotation_angle(d: &DressedParams) -> f64 {
    0.5 * d.sin2phi.atan2(d.cos2phi)
}
