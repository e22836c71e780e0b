//! Three-junction flux qubit in the charge basis, its two-level reduction and
//! the multilevel truncation used by the Floquet solver.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LzsError, Result};
use crate::linalg::{self, c, CMat, I};

pub const DEFAULT_N_CHARGE: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FqParams {
    pub alpha: f64,
    pub eta: f64,
    /// static detuning f̃_dc = f − 1/2
    pub f_dc: f64,
    pub n_charge: usize,
}

impl FqParams {
    pub fn new(alpha: f64, eta: f64, f_dc: f64, n_charge: usize) -> Result<Self> {
        let p = FqParams { alpha, eta, f_dc, n_charge };
        p.validate()?;
        Ok(p)
    }

    /// α = 0.8, η = 0.25 at the symmetry point.
    pub fn reference() -> Self {
        FqParams { alpha: 0.8, eta: 0.25, f_dc: 0.0, n_charge: DEFAULT_N_CHARGE }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(LzsError::InvalidParameter(format!("alpha must lie in (0, 2), got {}", self.alpha)));
        }
        if !(self.eta > 0.0 && self.eta < 2.0) {
            return Err(LzsError::InvalidParameter(format!("eta must lie in (0, 2), got {}", self.eta)));
        }
        if !self.f_dc.is_finite() {
            return Err(LzsError::InvalidParameter("f_dc must be finite".into()));
        }
        if self.n_charge < 4 {
            return Err(LzsError::InvalidParameter(format!("n_charge must be ≥ 4, got {}", self.n_charge)));
        }
        Ok(())
    }

    /// E_p = η²/4 (units of E_J)
    pub fn e_p(&self) -> f64 {
        self.eta * self.eta / 4.0
    }

    /// E_m = E_p/(1+2α)
    pub fn e_m(&self) -> f64 {
        self.e_p() / (1.0 + 2.0 * self.alpha)
    }
}

/// Charge states (n_p, n_m) with |n_p|, |n_m| ≤ N and n_p + n_m even.
///
/// Integer junction charges n₁, n₂ give n_p = n₁+n₂ and n_m = n₁−n₂ of equal
/// parity; the odd sector is an unphysical decoupled copy.
#[derive(Clone, Debug)]
pub struct ChargeBasis {
    pub cutoff: i32,
    pub states: Vec<(i32, i32)>,
    index: HashMap<(i32, i32), usize>,
}

impl ChargeBasis {
    pub fn new(cutoff: usize) -> Self {
        let n = cutoff as i32;
        let mut states = Vec::new();
        for np in -n..=n {
            for nm in -n..=n {
                if (np + nm).rem_euclid(2) == 0 {
                    states.push((np, nm));
                }
            }
        }
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        ChargeBasis { cutoff: n, states, index }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, np: i32, nm: i32) -> Option<usize> {
        self.index.get(&(np, nm)).copied()
    }
}

/// Flux-independent pieces of the charge-basis Hamiltonian.
#[derive(Clone, Debug)]
pub struct FqOperators {
    pub params: FqParams,
    pub basis: ChargeBasis,
    /// E_p n_p² + E_m n_m² + (2+α)
    pub diagonal: Vec<f64>,
    /// cos φ_p · cos φ_m
    pub cos_cos: CMat,
    /// cos 2φ_m
    pub cos2m: CMat,
    /// sin 2φ_m
    pub sin2m: CMat,
    pub n_m: CMat,
    pub n_p: CMat,
}

impl FqOperators {
    pub fn new(params: &FqParams) -> Result<Self> {
        params.validate()?;
        let basis = ChargeBasis::new(params.n_charge);
        let d = basis.dim();
        let (ep, em) = (params.e_p(), params.e_m());
        let mut diagonal = vec![0.0; d];
        let mut cos_cos = CMat::zeros(d, d);
        let mut cos2m = CMat::zeros(d, d);
        let mut sin2m = CMat::zeros(d, d);
        let mut n_m = CMat::zeros(d, d);
        let mut n_p = CMat::zeros(d, d);
        for (i, &(np, nm)) in basis.states.iter().enumerate() {
            diagonal[i] = ep * (np * np) as f64 + em * (nm * nm) as f64 + 2.0 + params.alpha;
            n_m[(i, i)] = c(nm as f64);
            n_p[(i, i)] = c(np as f64);
            for (dp, dm) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                if let Some(j) = basis.index(np + dp, nm + dm) {
                    cos_cos[(j, i)] = c(0.25);
                }
            }
            // e^{2iφ_m} raises n_m by two
            if let Some(j) = basis.index(np, nm + 2) {
                cos2m[(j, i)] = c(0.5);
                sin2m[(j, i)] = Complex64::new(0.0, -0.5);
            }
            if let Some(j) = basis.index(np, nm - 2) {
                cos2m[(j, i)] = c(0.5);
                sin2m[(j, i)] = Complex64::new(0.0, 0.5);
            }
        }
        Ok(FqOperators { params: *params, basis, diagonal, cos_cos, cos2m, sin2m, n_m, n_p })
    }

    /// Flux-independent part: kinetic + (2+α) − 2 cosφ_p cosφ_m.
    pub fn static_part(&self) -> CMat {
        let mut h = &self.cos_cos * c(-2.0);
        for (i, &e) in self.diagonal.iter().enumerate() {
            h[(i, i)] += c(e);
        }
        h
    }

    /// cos(2πf + 2φ_m) = cos2πf·cos2φ_m − sin2πf·sin2φ_m
    pub fn cos_flux(&self, f: f64) -> CMat {
        let (s, co) = (2.0 * PI * f).sin_cos();
        &self.cos2m * c(co) - &self.sin2m * c(s)
    }

    /// sin(2πf + 2φ_m) = sin2πf·cos2φ_m + cos2πf·sin2φ_m
    pub fn sin_flux(&self, f: f64) -> CMat {
        let (s, co) = (2.0 * PI * f).sin_cos();
        &self.cos2m * c(s) + &self.sin2m * c(co)
    }

    pub fn hamiltonian(&self, f: f64) -> CMat {
        self.static_part() - self.cos_flux(f) * c(self.params.alpha)
    }

    /// V = 2+α − 2cosφ_p cosφ_m − α cos(2πf+2φ_m)
    pub fn potential(&self, f: f64) -> CMat {
        let mut v = &self.cos_cos * c(-2.0) - self.cos_flux(f) * c(self.params.alpha);
        for i in 0..self.basis.dim() {
            v[(i, i)] += c(2.0 + self.params.alpha);
        }
        v
    }

    /// Loop current I = α sin(2πf̃ + 2φ_m) = −α sin(2πf + 2φ_m), in units of I_c.
    pub fn current(&self, f: f64) -> CMat {
        self.sin_flux(f) * c(-self.params.alpha)
    }

    /// Flux-noise operator 2πα sin(2πf + 2φ_m).
    pub fn flux_noise(&self, f: f64) -> CMat {
        self.sin_flux(f) * c(2.0 * PI * self.params.alpha)
    }

    /// Charge-noise operator 2E_m n_m.
    pub fn charge_noise(&self) -> CMat {
        &self.n_m * c(2.0 * self.params.e_m())
    }
}

/// H = E_p n_p² + E_m n_m² + V(f) in the charge basis.
pub fn build_fq_hamiltonian(params: &FqParams, f: f64) -> Result<CMat> {
    if !f.is_finite() {
        return Err(LzsError::InvalidParameter("flux must be finite".into()));
    }
    Ok(FqOperators::new(params)?.hamiltonian(f))
}

#[derive(Clone, Debug)]
pub struct StaticSpectrum {
    pub energies: Vec<f64>,
    /// columns are eigenvectors
    pub states: CMat,
}

/// k lowest eigenpairs; each vector's largest component is made real positive.
pub fn diagonalize_static(h: &CMat, k: usize) -> Result<StaticSpectrum> {
    let n = h.nrows();
    if h.ncols() != n || k == 0 || k > n {
        return Err(LzsError::InvalidParameter(format!("cannot take {k} levels of a {n}×{} matrix", h.ncols())));
    }
    let (vals, vecs) = linalg::eigh(h);
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(LzsError::Eigensolver("non-finite eigenvalue".into()));
    }
    let mut states = vecs.columns(0, k).into_owned();
    linalg::fix_phases(&mut states);
    Ok(StaticSpectrum { energies: vals[..k].to_vec(), states })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TlsParams {
    pub delta: f64,
    pub i_p: f64,
    pub lambda_f: f64,
    pub lambda_ch: f64,
    pub lambda_cc: f64,
    /// the neglected n_p charge channel
    pub lambda_ch_p: f64,
}

impl TlsParams {
    /// Explicit gap and current; couplings default to unit strength.
    pub fn explicit(delta: f64, i_p: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite() && i_p > 0.0 && i_p.is_finite()) {
            return Err(LzsError::InvalidParameter("delta must be ≥ 0 and i_p > 0".into()));
        }
        Ok(TlsParams { delta, i_p, lambda_f: 2.0 * PI * i_p, lambda_ch: 1.0, lambda_cc: 1.0, lambda_ch_p: 0.0 })
    }

    /// f_ω = ω₀/(4πI_p): detuning step between successive resonances.
    pub fn f_omega(&self, omega0: f64) -> f64 {
        omega0 / (4.0 * PI * self.i_p)
    }
}

/// Gap, persistent current and coupling strengths from the two lowest states at f = 1/2.
pub fn compute_tls_parameters(params: &FqParams) -> Result<TlsParams> {
    let ops = FqOperators::new(params)?;
    tls_from_operators(&ops)
}

fn tls_from_operators(ops: &FqOperators) -> Result<TlsParams> {
    let h = ops.hamiltonian(0.5);
    let spec = diagonalize_static(&h, 2)?;
    let delta = spec.energies[1] - spec.energies[0];
    if delta < 1e-12 {
        return Err(LzsError::Degenerate { what: "ground doublet", gap: delta });
    }
    let cur = ops.current(0.5);
    let v0 = spec.states.column(0).into_owned();
    let mut v1 = spec.states.column(1).into_owned();
    // rotate |1⟩ so that ⟨0|I|1⟩ is real positive
    let z = (v0.adjoint() * &cur * &v1)[(0, 0)];
    if z.norm() > 0.0 {
        v1 *= z.conj() / z.norm();
    }
    let s2 = c(std::f64::consts::FRAC_1_SQRT_2);
    let plus = (&v0 + &v1) * s2;
    let minus = (&v0 - &v1) * s2;
    let elem = |a: &nalgebra::DVector<Complex64>, op: &CMat, b: &nalgebra::DVector<Complex64>| (a.adjoint() * op * b)[(0, 0)];
    let i_p = elem(&plus, &cur, &plus).norm();
    let p = &ops.params;
    Ok(TlsParams {
        delta,
        i_p,
        lambda_f: 2.0 * PI * i_p,
        lambda_ch: 2.0 * p.e_m() * elem(&minus, &ops.n_m, &plus).norm(),
        lambda_cc: elem(&minus, &ops.potential(0.5), &plus).norm(),
        lambda_ch_p: 2.0 * p.e_p() * elem(&minus, &ops.n_p, &plus).norm(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> CMat {
        match self {
            Axis::X => CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
            Axis::Y => CMat::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)]),
            Axis::Z => CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSpec {
    pub axis: Axis,
    pub strength: f64,
    pub tag: String,
}

impl CouplingSpec {
    pub fn new(axis: Axis, strength: f64, tag: impl Into<String>) -> Self {
        CouplingSpec { axis, strength, tag: tag.into() }
    }

    /// λ_f = cosθ on σ_z and λ_ch = sinθ on σ_y.
    pub fn mixed(theta: f64, longitudinal_tag: &str, transverse_tag: &str) -> Vec<Self> {
        vec![
            CouplingSpec::new(Axis::Z, theta.cos(), longitudinal_tag),
            CouplingSpec::new(Axis::Y, theta.sin(), transverse_tag),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct Coupling {
    pub operator: CMat,
    pub tag: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drive {
    pub f_dc: f64,
    pub f_ac: f64,
    pub omega0: f64,
}

impl Drive {
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega0
    }

    /// f(t) = 1/2 + f̃_dc + f_ac cos(ω₀t)
    pub fn flux(&self, t: f64) -> f64 {
        0.5 + self.f_dc + self.f_ac * (self.omega0 * t).cos()
    }
}

#[derive(Clone, Debug)]
pub enum DriveForm {
    /// H(t) = h0 + cos(ω₀t)·h1
    Linear { h0: CMat, h1: CMat },
    /// H(t) = h0 + hc·cos2πf(t) + hs·sin2πf(t)
    Flux { h0: CMat, hc: CMat, hs: CMat },
}

#[derive(Clone, Debug)]
pub struct DrivenModel {
    pub dim: usize,
    pub form: DriveForm,
    pub drive: Drive,
    pub couplings: Vec<Coupling>,
    pub projector_plus: CMat,
}

impl DrivenModel {
    pub fn hamiltonian_at(&self, t: f64) -> CMat {
        match &self.form {
            DriveForm::Linear { h0, h1 } => h0 + h1 * c((self.drive.omega0 * t).cos()),
            DriveForm::Flux { h0, hc, hs } => {
                let (s, co) = (2.0 * PI * self.drive.flux(t)).sin_cos();
                h0 + hc * c(co) + hs * c(s)
            }
        }
    }

    /// H with the ac amplitude switched off.
    pub fn static_hamiltonian(&self) -> CMat {
        match &self.form {
            DriveForm::Linear { h0, .. } => h0.clone(),
            DriveForm::Flux { h0, hc, hs } => {
                let (s, co) = (2.0 * PI * (0.5 + self.drive.f_dc)).sin_cos();
                h0 + hc * c(co) + hs * c(s)
            }
        }
    }

    pub fn period(&self) -> f64 {
        self.drive.period()
    }

    /// Largest eigenvalue spread of H(t) − H_static over a period sample.
    pub fn drive_spread(&self) -> f64 {
        let h_static = self.static_hamiltonian();
        let tau = self.period();
        (0..64)
            .map(|j| {
                let (vals, _) = linalg::eigh(&(self.hamiltonian_at(tau * j as f64 / 64.0) - &h_static));
                vals[vals.len() - 1] - vals[0]
            })
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, m: &CMat| -> Result<()> {
            if m.nrows() != self.dim || m.ncols() != self.dim {
                return Err(LzsError::InvalidParameter(format!("{name} has wrong shape")));
            }
            let d = linalg::hermiticity_defect(m);
            if d > 1e-12 * linalg::max_abs(m).max(1.0) {
                return Err(LzsError::InvalidParameter(format!("{name} not Hermitian (defect {d:e})")));
            }
            Ok(())
        };
        match &self.form {
            DriveForm::Linear { h0, h1 } => {
                check("h0", h0)?;
                check("h1", h1)?;
            }
            DriveForm::Flux { h0, hc, hs } => {
                check("h0", h0)?;
                check("hc", hc)?;
                check("hs", hs)?;
            }
        }
        for cp in &self.couplings {
            check(&cp.tag, &cp.operator)?;
        }
        check("projector_plus", &self.projector_plus)?;
        let p = &self.projector_plus;
        if linalg::max_abs(&(p * p - p)) > 1e-10 {
            return Err(LzsError::InvalidParameter("projector_plus not idempotent".into()));
        }
        Ok(())
    }
}

/// Two-level model in the persistent-current basis (|+⟩, |−⟩):
/// H(t) = −ε(t)/2 σ_z − Δ/2 σ_x with ε(t) = 4πI_p(f̃_dc + f_ac cos ω₀t).
pub fn build_tls_model(tls: &TlsParams, f_dc: f64, f_ac: f64, omega0: f64, couplings: &[CouplingSpec]) -> Result<DrivenModel> {
    if !(omega0 > 0.0 && omega0.is_finite()) || !f_dc.is_finite() || !f_ac.is_finite() {
        return Err(LzsError::InvalidParameter("drive parameters must be finite with omega0 > 0".into()));
    }
    let eps0 = 4.0 * PI * tls.i_p * f_dc;
    let amp = 4.0 * PI * tls.i_p * f_ac;
    let (sx, sz) = (Axis::X.pauli(), Axis::Z.pauli());
    let h0 = &sz * c(-eps0 / 2.0) - &sx * c(tls.delta / 2.0);
    let h1 = &sz * c(-amp / 2.0);
    let couplings = couplings
        .iter()
        .map(|cs| Coupling { operator: cs.axis.pauli() * c(-cs.strength), tag: cs.tag.clone() })
        .collect();
    let mut projector_plus = CMat::zeros(2, 2);
    projector_plus[(0, 0)] = c(1.0);
    let model = DrivenModel {
        dim: 2,
        form: DriveForm::Linear { h0, h1 },
        drive: Drive { f_dc, f_ac, omega0 },
        couplings,
        projector_plus,
    };
    model.validate()?;
    Ok(model)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Flux,
    Charge,
    CriticalCurrent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultilevelCoupling {
    pub kind: NoiseKind,
    /// multiplier on the physical operator
    pub scale: f64,
    pub tag: String,
}

impl MultilevelCoupling {
    pub fn new(kind: NoiseKind, tag: impl Into<String>) -> Self {
        MultilevelCoupling { kind, scale: 1.0, tag: tag.into() }
    }
}

/// Operators projected onto the m lowest eigenstates at f = 1/2 + f̃_dc.
#[derive(Clone, Debug)]
pub struct MultilevelProjection {
    pub alpha: f64,
    pub f_dc: f64,
    pub energies: Vec<f64>,
    pub cos2m: CMat,
    pub sin2m: CMat,
    pub current: CMat,
    pub flux_noise: CMat,
    pub charge_noise: CMat,
    pub potential: CMat,
}

impl MultilevelProjection {
    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    pub fn model(&self, f_ac: f64, omega0: f64, couplings: &[MultilevelCoupling]) -> Result<DrivenModel> {
        if !(omega0 > 0.0 && omega0.is_finite()) || !f_ac.is_finite() {
            return Err(LzsError::InvalidParameter("drive parameters must be finite with omega0 > 0".into()));
        }
        let m = self.levels();
        let (s, co) = (2.0 * PI * (0.5 + self.f_dc)).sin_cos();
        let a = self.alpha;
        let mut h0 = (&self.cos2m * c(co) - &self.sin2m * c(s)) * c(a);
        for (i, e) in self.energies.iter().enumerate() {
            h0[(i, i)] += c(*e);
        }
        let hc = &self.cos2m * c(-a);
        let hs = &self.sin2m * c(a);
        let couplings = couplings
            .iter()
            .map(|cp| {
                let op = match cp.kind {
                    NoiseKind::Flux => &self.flux_noise,
                    NoiseKind::Charge => &self.charge_noise,
                    NoiseKind::CriticalCurrent => &self.potential,
                };
                Coupling { operator: op * c(cp.scale), tag: cp.tag.clone() }
            })
            .collect();
        let (vals, vecs) = linalg::eigh(&self.current);
        let mut projector_plus = CMat::zeros(m, m);
        for (j, v) in vals.iter().enumerate() {
            if *v > 0.0 {
                let col = vecs.column(j);
                projector_plus += &col * col.adjoint();
            }
        }
        let projector_plus = linalg::hermitize(&projector_plus);
        let model = DrivenModel {
            dim: m,
            form: DriveForm::Flux { h0: linalg::hermitize(&h0), hc, hs },
            drive: Drive { f_dc: self.f_dc, f_ac, omega0 },
            couplings,
            projector_plus,
        };
        model.validate()?;
        Ok(model)
    }
}

const RITZ_LOW: usize = 80;
const RITZ_ENRICH: usize = 8;

/// A flux qubit prepared for repeated multilevel projections.
///
/// Diagonalizes at f = 1/2 once and then works in the span of the lowest
/// eigenvectors plus their images under cos2φ_m and sin2φ_m, which holds the
/// low-lying states at small detuning to near machine precision.
#[derive(Clone, Debug)]
pub struct FluxQubit {
    pub ops: FqOperators,
    pub tls: TlsParams,
    ritz: Ritz,
}

#[derive(Clone, Debug)]
struct Ritz {
    /// charge-basis columns of the reduced basis
    basis: CMat,
    static_part: CMat,
    cos2m: CMat,
    sin2m: CMat,
    n_m: CMat,
    cos_cos: CMat,
}

impl FluxQubit {
    pub fn new(params: &FqParams) -> Result<Self> {
        let ops = FqOperators::new(params)?;
        let tls = tls_from_operators(&ops)?;
        let dim = ops.basis.dim();
        let low = RITZ_LOW.min(dim);
        let full = ops.hamiltonian(0.5);
        let (_, vecs) = linalg::eigh(&full);
        let basis = if low == dim {
            vecs
        } else {
            let lowest = vecs.columns(0, low).into_owned();
            let seed = lowest.columns(0, RITZ_ENRICH.min(low)).into_owned();
            let c_img = &ops.cos2m * &seed;
            let s_img = &ops.sin2m * &seed;
            let mut stacked = CMat::zeros(dim, low + 2 * seed.ncols());
            stacked.columns_mut(0, low).copy_from(&lowest);
            stacked.columns_mut(low, seed.ncols()).copy_from(&c_img);
            stacked.columns_mut(low + seed.ncols(), seed.ncols()).copy_from(&s_img);
            stacked.qr().q()
        };
        let project = |m: &CMat| linalg::hermitize(&(basis.adjoint() * m * &basis));
        let ritz = Ritz {
            static_part: project(&ops.static_part()),
            cos2m: project(&ops.cos2m),
            sin2m: project(&ops.sin2m),
            n_m: project(&ops.n_m),
            cos_cos: project(&ops.cos_cos),
            basis,
        };
        Ok(FluxQubit { ops, tls, ritz })
    }

    pub fn params(&self) -> &FqParams {
        &self.ops.params
    }

    /// Lowest m levels at f = 1/2 + f̃_dc in the reduced basis.
    pub fn spectrum(&self, f_dc: f64, m: usize) -> Result<(Vec<f64>, CMat)> {
        if m > RITZ_ENRICH || m > self.ritz.basis.ncols() {
            return Err(LzsError::InvalidParameter(format!("at most {RITZ_ENRICH} converged levels available, asked for {m}")));
        }
        let f = 0.5 + f_dc;
        let a = self.ops.params.alpha;
        let (s, co) = (2.0 * PI * f).sin_cos();
        let h = &self.ritz.static_part - (&self.ritz.cos2m * c(co) - &self.ritz.sin2m * c(s)) * c(a);
        let (vals, vecs) = linalg::eigh(&h);
        let mut w = vecs.columns(0, m).into_owned();
        // phase convention applied to the charge-basis vectors
        let full = &self.ritz.basis * &w;
        for j in 0..m {
            let col = full.column(j);
            let mut best = 0;
            let mut best_abs = -1.0;
            for (i, z) in col.iter().enumerate() {
                if z.norm() > best_abs + 1e-12 {
                    best = i;
                    best_abs = z.norm();
                }
            }
            let phase = col[best].conj() / best_abs;
            w.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
        Ok((vals[..m].to_vec(), w))
    }

    /// Charge-basis eigenvectors for the m lowest levels at f̃_dc.
    pub fn states(&self, f_dc: f64, m: usize) -> Result<StaticSpectrum> {
        let (energies, w) = self.spectrum(f_dc, m)?;
        Ok(StaticSpectrum { energies, states: &self.ritz.basis * w })
    }

    pub fn projection(&self, f_dc: f64, m: usize) -> Result<MultilevelProjection> {
        let (energies, w) = self.spectrum(f_dc, m)?;
        let r = &self.ritz;
        let p = |x: &CMat| -> Result<CMat> {
            let y = w.adjoint() * x * &w;
            let d = linalg::hermiticity_defect(&y);
            if d > 1e-10 {
                return Err(LzsError::InvalidParameter(format!("projected operator not Hermitian (defect {d:e})")));
            }
            Ok(linalg::hermitize(&y))
        };
        let a = self.ops.params.alpha;
        let (s, co) = (2.0 * PI * (0.5 + f_dc)).sin_cos();
        let cos2m = p(&r.cos2m)?;
        let sin2m = p(&r.sin2m)?;
        let sin_flux = &cos2m * c(s) + &sin2m * c(co);
        let cos_flux = &cos2m * c(co) - &sin2m * c(s);
        let mut potential = p(&r.cos_cos)? * c(-2.0) - cos_flux * c(a);
        for i in 0..m {
            potential[(i, i)] += c(2.0 + a);
        }
        Ok(MultilevelProjection {
            alpha: a,
            f_dc,
            energies,
            current: &sin_flux * c(-a),
            flux_noise: &sin_flux * c(2.0 * PI * a),
            charge_noise: p(&r.n_m)? * c(2.0 * self.ops.params.e_m()),
            potential,
            cos2m,
            sin2m,
        })
    }
}

/// m-level truncated model at f̃_dc with the given noise channels.
pub fn build_multilevel_model(
    params: &FqParams,
    m: usize,
    f_dc: f64,
    f_ac: f64,
    omega0: f64,
    couplings: &[MultilevelCoupling],
) -> Result<DrivenModel> {
    FluxQubit::new(params)?.projection(f_dc, m)?.model(f_ac, omega0, couplings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small(n: usize) -> FqParams {
        FqParams::new(0.8, 0.25, 0.0, n).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(FqParams::new(2.0, 0.25, 0.0, 10).is_err());
        assert!(FqParams::new(0.8, 0.0, 0.0, 10).is_err());
        assert!(FqParams::new(0.8, 0.25, 0.0, 3).is_err());
        assert!(FqParams::new(0.8, 0.25, f64::NAN, 10).is_err());
    }

    #[test]
    fn basis_is_even_sector() {
        let b = ChargeBasis::new(4);
        assert_eq!(b.dim(), (81 + 1) / 2);
        assert!(b.states.iter().all(|(p, m)| (p + m) % 2 == 0));
        assert_eq!(b.index(1, 1).map(|i| b.states[i]), Some((1, 1)));
        assert!(b.index(1, 0).is_none());
    }

    #[test]
    fn hamiltonian_hermitian_with_expected_diagonal() {
        let p = small(6);
        let ops = FqOperators::new(&p).unwrap();
        let h = ops.hamiltonian(0.4871);
        assert!(linalg::hermiticity_defect(&h) < 1e-15);
        for (i, &(np, nm)) in ops.basis.states.iter().enumerate() {
            let expect = p.e_p() * (np * np) as f64 + p.e_m() * (nm * nm) as f64 + 2.8;
            assert!((h[(i, i)].re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn hop_amplitudes() {
        let p = small(6);
        let ops = FqOperators::new(&p).unwrap();
        let f = 0.47;
        let h = ops.hamiltonian(f);
        let b = &ops.basis;
        let (i, j) = (b.index(0, 0).unwrap(), b.index(1, 1).unwrap());
        assert!((h[(j, i)] - c(-0.5)).norm() < 1e-15);
        let k = b.index(0, 2).unwrap();
        let expect = Complex64::from_polar(-0.4, 2.0 * PI * f);
        assert!((h[(k, i)] - expect).norm() < 1e-15);
    }

    #[test]
    fn flux_periodicity() {
        let p = small(6);
        let a = diagonalize_static(&build_fq_hamiltonian(&p, 0.52).unwrap(), 6).unwrap();
        let b = diagonalize_static(&build_fq_hamiltonian(&p, 1.52).unwrap(), 6).unwrap();
        for (x, y) in a.energies.iter().zip(&b.energies) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn non_finite_flux_rejected() {
        assert!(build_fq_hamiltonian(&small(6), f64::INFINITY).is_err());
    }

    #[test]
    fn diagonalize_trivial_cases() {
        let d = 3.33e-4;
        let h = CMat::from_row_slice(2, 2, &[c(0.0), c(-d / 2.0), c(-d / 2.0), c(0.0)]);
        let s = diagonalize_static(&h, 2).unwrap();
        assert!((s.energies[0] + d / 2.0).abs() < 1e-18 && (s.energies[1] - d / 2.0).abs() < 1e-18);

        let h = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0), c(1.0), c(2.0)]));
        let s = diagonalize_static(&h, 3).unwrap();
        assert_eq!(s.energies, vec![1.0, 2.0, 3.0]);
        for (col, row) in [(0, 1), (1, 2), (2, 0)] {
            assert!((s.states[(row, col)] - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn static_spectrum_invariants() {
        let p = small(8);
        let h = build_fq_hamiltonian(&p, 0.503).unwrap();
        let s = diagonalize_static(&h, 5).unwrap();
        let gram = s.states.adjoint() * &s.states;
        assert!(linalg::max_abs(&(gram - CMat::identity(5, 5))) < 1e-10);
        let norm = linalg::fro(&h);
        for k in 0..5 {
            let r = &h * s.states.column(k) - s.states.column(k) * c(s.energies[k]);
            assert!(r.norm() <= 1e-10 * norm);
        }
    }

    #[test]
    fn reference_device_parameters() {
        let t = compute_tls_parameters(&FqParams::reference()).unwrap();
        assert!((t.delta / 3.33e-4 - 1.0).abs() < 0.01, "delta {}", t.delta);
        assert!((t.i_p / 0.721 - 1.0).abs() < 0.01, "i_p {}", t.i_p);
        assert!((t.lambda_f / 4.5 - 1.0).abs() < 0.05);
        assert!((t.lambda_ch / 3e-4 - 1.0).abs() < 0.05);
        assert!(t.lambda_ch_p < 1e-10);
        assert!(t.lambda_cc > 0.0);
    }

    #[test]
    fn truncation_convergence() {
        let a = compute_tls_parameters(&small(20)).unwrap();
        let b = compute_tls_parameters(&small(22)).unwrap();
        assert!((a.delta / b.delta - 1.0).abs() < 1e-6);
        assert!((a.i_p / b.i_p - 1.0).abs() < 1e-6);
    }

    #[test]
    fn alpha_07_confirmed_at_doubled_cutoff() {
        let base = compute_tls_parameters(&FqParams::new(0.7, 0.25, 0.0, 20).unwrap()).unwrap();
        let big = compute_tls_parameters(&FqParams::new(0.7, 0.25, 0.0, 40).unwrap()).unwrap();
        assert!((base.delta / big.delta - 1.0).abs() < 1e-6);
        assert!((base.i_p / big.i_p - 1.0).abs() < 1e-6);
        assert!((base.lambda_ch / big.lambda_ch - 1.0).abs() < 1e-6);
    }

    #[test]
    fn f_omega_arithmetic() {
        let t = TlsParams::explicit(3.33e-4, 0.721).unwrap();
        let fw = t.f_omega(0.003);
        assert!((fw - 3.31e-4).abs() < 1e-6);
        assert!((0.0009 / fw - 2.7).abs() < 0.05);
        let m = build_tls_model(&t, 4.0 * fw, 0.0, 0.003, &[]).unwrap();
        let h = m.static_hamiltonian();
        assert!((h[(0, 0)].re * -2.0 - 4.0 * 0.003).abs() < 1e-15);
    }

    #[test]
    fn tls_model_structure() {
        let t = TlsParams::explicit(3.33e-4, 0.721).unwrap();
        let m = build_tls_model(&t, 0.001, 0.003, 0.003, &[CouplingSpec::new(Axis::Z, 2.0, "f")]).unwrap();
        assert_eq!(m.dim, 2);
        assert!((m.couplings[0].operator.clone() + Axis::Z.pauli() * c(2.0)).norm() < 1e-15);
        assert_eq!(m.projector_plus[(0, 0)], c(1.0));
        assert!((m.drive_spread() - 4.0 * PI * 0.721 * 0.003).abs() < 1e-12);
    }

    #[test]
    fn mixing_endpoints() {
        let z = CouplingSpec::mixed(0.0, "f", "ch");
        assert_eq!((z[0].strength, z[1].strength), (1.0, 0.0));
        let y = CouplingSpec::mixed(PI / 2.0, "f", "ch");
        assert!(y[0].strength.abs() < 1e-16 && y[1].strength == 1.0);
    }

    #[test]
    fn ritz_matches_full_diagonalization() {
        let q = FluxQubit::new(&FqParams::reference()).unwrap();
        for f_dc in [0.0009, 0.006, -0.004] {
            let (e, _) = q.spectrum(f_dc, 4).unwrap();
            let full = diagonalize_static(&q.ops.hamiltonian(0.5 + f_dc), 4).unwrap();
            for (a, b) in e.iter().zip(&full.energies) {
                assert!((a - b).abs() < 1e-10, "{f_dc}: {a} vs {b}");
            }
            let st = q.states(f_dc, 4).unwrap();
            for k in 0..4 {
                let ov = (st.states.column(k).adjoint() * full.states.column(k))[(0, 0)];
                assert!((ov - c(1.0)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn multilevel_reproduces_exact_drive_in_subspace() {
        let q = FluxQubit::new(&FqParams::reference()).unwrap();
        let f_dc = 0.0009;
        let proj = q.projection(f_dc, 4).unwrap();
        let model = proj.model(0.004, 0.003, &[MultilevelCoupling::new(NoiseKind::Flux, "f")]).unwrap();
        let st = q.states(f_dc, 4).unwrap();
        for t in [0.0, 300.0, 1234.5] {
            let exact = st.states.adjoint() * q.ops.hamiltonian(model.drive.flux(t)) * &st.states;
            assert!(linalg::max_abs(&(exact - model.hamiltonian_at(t))) < 1e-10);
        }
        let p = &model.projector_plus;
        let (vals, _) = linalg::eigh(p);
        assert!(vals.iter().all(|v| v.abs() < 1e-10 || (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn multilevel_two_level_limit() {
        let params = FqParams::reference();
        let q = FluxQubit::new(&params).unwrap();
        let proj = q.projection(0.0, 2).unwrap();
        let model = proj.model(0.0, 0.003, &[MultilevelCoupling::new(NoiseKind::Flux, "f")]).unwrap();
        let (vals, _) = linalg::eigh(&model.couplings[0].operator);
        assert!((vals[1] - q.tls.lambda_f).abs() / q.tls.lambda_f < 1e-6);
        // P₊ projector is rank one and favours positive current for f̃ > 0
        assert!((model.projector_plus.trace().re - 1.0).abs() < 1e-12);
        let right = q.projection(0.002, 2).unwrap().model(0.0, 0.003, &[]).unwrap();
        let g = diagonalize_static(&right.static_hamiltonian(), 1).unwrap();
        let pp = (g.states.adjoint() * &right.projector_plus * &g.states)[(0, 0)].re;
        assert!(pp > 0.9);
    }

    #[test]
    fn multilevel_level_limit() {
        let q = FluxQubit::new(&small(10)).unwrap();
        assert!(q.projection(0.0, 9).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(5))]
        #[test]
        fn spectrum_symmetric_in_detuning(ft in -0.01f64..0.01) {
            let p = small(10);
            let a = diagonalize_static(&build_fq_hamiltonian(&p, 0.5 + ft).unwrap(), 4).unwrap();
            let b = diagonalize_static(&build_fq_hamiltonian(&p, 0.5 - ft).unwrap(), 4).unwrap();
            for (x, y) in a.energies.iter().zip(&b.energies) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn tls_rebuild_matches_pauli_form(t in 0.0f64..5000.0, f_dc in -0.003f64..0.003, f_ac in 0.0f64..0.01) {
            let tls = TlsParams::explicit(3.33e-4, 0.721).unwrap();
            let m = build_tls_model(&tls, f_dc, f_ac, 0.003, &[]).unwrap();
            let eps = 4.0 * PI * 0.721 * (f_dc + f_ac * (0.003 * t).cos());
            let expect = Axis::Z.pauli() * c(-eps / 2.0) - Axis::X.pauli() * c(3.33e-4 / 2.0);
            prop_assert!(linalg::max_abs(&(m.hamiltonian_at(t) - expect)) < 1e-12);
        }
    }
}
