//! Floquet–Born–Markov generator, its evolution, steady state and timescales.

use num_complex::Complex64;

use crate::bath::OhmicBath;
use crate::error::{LzsError, Result};
use crate::floquet::{harmonic_table, CouplingElements, ElementTable, FloquetBasis};
use crate::linalg::{self, c, CMat, CVec, I};
use crate::model::DrivenModel;

/// R_{αβα'β'} stored flat, index ((α·M + β)·M + α')·M + β'.
#[derive(Clone, Debug)]
pub struct RateTensor {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl RateTensor {
    fn idx(&self, a: usize, b: usize, a2: usize, b2: usize) -> usize {
        let m = self.dim;
        ((a * m + b) * m + a2) * m + b2
    }

    pub fn get(&self, a: usize, b: usize, a2: usize, b2: usize) -> Complex64 {
        self.data[self.idx(a, b, a2, b2)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// R_{αβα'β'} = Σ_ν Σ_q ½ g_ν(ε_α − ε_α' − qω₀) A_{αα',q} A_{β'β,−q}.
pub fn rate_tensor(elements: &CouplingElements, baths: &[OhmicBath], basis: &FloquetBasis) -> Result<RateTensor> {
    let m = basis.dim();
    let mut r = RateTensor { dim: m, data: vec![c(0.0); m * m * m * m] };
    let w = basis.omega0;
    for table in &elements.tables {
        let bath = baths
            .iter()
            .find(|b| b.tag == table.tag)
            .ok_or_else(|| LzsError::MissingBath(table.tag.clone()))?;
        if bath.gamma == 0.0 {
            continue;
        }
        let kk = table.harmonics as i64;
        for q in -kk..=kk {
            let aq = table.at(q).unwrap();
            let amq = table.at(-q).unwrap();
            for a in 0..m {
                for a2 in 0..m {
                    let omega = basis.quasienergies[a] - basis.quasienergies[a2] - q as f64 * w;
                    let left = aq[(a, a2)] * (0.5 * bath.g(omega));
                    if left == c(0.0) {
                        continue;
                    }
                    for b in 0..m {
                        for b2 in 0..m {
                            let i = r.idx(a, b, a2, b2);
                            r.data[i] += left * amq[(b2, b)];
                        }
                    }
                }
            }
        }
    }
    Ok(r)
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub dim: usize,
    /// M²×M² acting on vec(ρ), index α·M + β
    pub matrix: CMat,
    pub quasienergies: Vec<f64>,
    pub omega0: f64,
}

fn vec_index(m: usize, a: usize, b: usize) -> usize {
    a * m + b
}

pub fn build_generator(r: &RateTensor, basis: &FloquetBasis) -> Result<Generator> {
    let m = basis.dim();
    if r.dim != m {
        return Err(LzsError::Generator("rate tensor and basis differ in dimension".into()));
    }
    let mut diss = CMat::zeros(m * m, m * m);
    // Σ_η R_{ηη a2 a}
    let mut decay = CMat::zeros(m, m);
    for a2 in 0..m {
        for a in 0..m {
            decay[(a2, a)] = (0..m).map(|eta| r.get(eta, eta, a2, a)).sum();
        }
    }
    for a in 0..m {
        for b in 0..m {
            let row = vec_index(m, a, b);
            for a2 in 0..m {
                for b2 in 0..m {
                    let mut v = r.get(a, b, a2, b2) + r.get(b, a, b2, a2).conj();
                    if b == b2 {
                        v -= decay[(a2, a)];
                    }
                    if a == a2 {
                        v -= decay[(b2, b)].conj();
                    }
                    diss[(row, vec_index(m, a2, b2))] = v;
                }
            }
        }
    }
    let scale = linalg::max_abs(&diss);
    let defect = trace_defect_of(&diss, m);
    if defect > 1e-8 * scale.max(f64::MIN_POSITIVE) && defect > 0.0 {
        return Err(LzsError::Generator(format!("trace preservation violated by {defect:e}")));
    }
    let mut matrix = diss;
    for a in 0..m {
        for b in 0..m {
            let i = vec_index(m, a, b);
            matrix[(i, i)] -= I * (basis.quasienergies[a] - basis.quasienergies[b]);
        }
    }
    Ok(Generator { dim: m, matrix, quasienergies: basis.quasienergies.clone(), omega0: basis.omega0 })
}

fn trace_defect_of(matrix: &CMat, m: usize) -> f64 {
    let mut worst = 0.0_f64;
    for col in 0..m * m {
        let s: Complex64 = (0..m).map(|a| matrix[(vec_index(m, a, a), col)]).sum();
        worst = worst.max(s.norm());
    }
    worst
}

impl Generator {
    /// Purely coherent generator −i(ε_α − ε_β).
    pub fn coherent(basis: &FloquetBasis) -> Self {
        let m = basis.dim();
        let mut matrix = CMat::zeros(m * m, m * m);
        for a in 0..m {
            for b in 0..m {
                let i = vec_index(m, a, b);
                matrix[(i, i)] = -I * (basis.quasienergies[a] - basis.quasienergies[b]);
            }
        }
        Generator { dim: m, matrix, quasienergies: basis.quasienergies.clone(), omega0: basis.omega0 }
    }

    pub fn norm(&self) -> f64 {
        linalg::fro(&self.matrix)
    }

    /// max over (α',β') of |Σ_α Λ_{αα,α'β'}|
    pub fn trace_defect(&self) -> f64 {
        trace_defect_of(&self.matrix, self.dim)
    }

    /// max |Λ_{βα,β'α'} − conj(Λ_{αβ,α'β'})|
    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..m {
            for b in 0..m {
                for a2 in 0..m {
                    for b2 in 0..m {
                        let x = self.matrix[(vec_index(m, a, b), vec_index(m, a2, b2))];
                        let y = self.matrix[(vec_index(m, b, a), vec_index(m, b2, a2))];
                        worst = worst.max((y - x.conj()).norm());
                    }
                }
            }
        }
        worst
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        unvec(&(&self.matrix * vectorize(rho)), self.dim)
    }

    pub fn eigen(&self) -> Result<(Vec<Complex64>, CMat)> {
        linalg::eig(&self.matrix)
    }
}

pub fn vectorize(rho: &CMat) -> CVec {
    let m = rho.nrows();
    CVec::from_fn(m * m, |i, _| rho[(i / m, i % m)])
}

pub fn unvec(v: &CVec, m: usize) -> CMat {
    CMat::from_fn(m, m, |a, b| v[a * m + b])
}

/// ρ_{αβ}(0) = ⟨α(0)|Ψ₀⟩⟨Ψ₀|β(0)⟩ with Ψ₀ the ground state of the undriven Hamiltonian.
pub fn initial_state(model: &DrivenModel, basis: &FloquetBasis) -> Result<CMat> {
    let h = model.static_hamiltonian();
    let (vals, vecs) = linalg::eigh(&h);
    if vals.len() > 1 {
        let gap = vals[1] - vals[0];
        if gap <= 1e-14 * vals[0].abs().max(vals[1].abs()).max(1.0) {
            return Err(LzsError::Degenerate { what: "ground state", gap });
        }
    }
    let amp = basis.initial_states().adjoint() * vecs.column(0);
    Ok(&amp * amp.adjoint())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvolutionMethod {
    Eigenmodes,
    /// Λ (near-)defective: matrix exponential per time point
    Exponential,
}

/// ρ(t) = Σ_m c_m e^{λ_m t} r_m, or the exponential fallback.
#[derive(Clone, Debug)]
pub struct Dynamics {
    pub dim: usize,
    pub rho0: CMat,
    pub method: EvolutionMethod,
    pub eigenvalues: Vec<Complex64>,
    modes: Vec<CMat>,
    coefficients: Vec<Complex64>,
    generator: CMat,
}

const CONDITION_LIMIT: f64 = 1e8;

impl Dynamics {
    pub fn new(gen: &Generator, rho0: &CMat) -> Result<Self> {
        let m = gen.dim;
        let (vals, vecs) = gen.eigen()?;
        let inverse = vecs.clone().try_inverse();
        let (method, coefficients) = match inverse {
            Some(inv) if linalg::max_abs(&inv) * linalg::max_abs(&vecs) * (m * m) as f64 <= CONDITION_LIMIT => {
                let cvec = &inv * vectorize(rho0);
                (EvolutionMethod::Eigenmodes, cvec.iter().copied().collect())
            }
            _ => (EvolutionMethod::Exponential, Vec::new()),
        };
        let modes = (0..m * m).map(|k| unvec(&vecs.column(k).into_owned(), m)).collect();
        Ok(Dynamics { dim: m, rho0: rho0.clone(), method, eigenvalues: vals, modes, coefficients, generator: gen.matrix.clone() })
    }

    pub fn state(&self, t: f64) -> CMat {
        if t == 0.0 {
            return self.rho0.clone();
        }
        match self.method {
            EvolutionMethod::Eigenmodes => {
                let mut out = CMat::zeros(self.dim, self.dim);
                for (k, r) in self.modes.iter().enumerate() {
                    out += r * (self.coefficients[k] * (self.eigenvalues[k] * t).exp());
                }
                out
            }
            EvolutionMethod::Exponential => {
                let prop = (&self.generator * c(t)).exp();
                unvec(&(prop * vectorize(&self.rho0)), self.dim)
            }
        }
    }

    /// Average of Tr[Π ρ_S] over [t, t + window].
    pub fn window_average(&self, obs: &Observable, t: f64, window: f64) -> f64 {
        match self.method {
            EvolutionMethod::Eigenmodes => {
                let w0 = obs.omega0;
                let kk = obs.table.harmonics as i64;
                let mut total = c(0.0);
                for (k, r) in self.modes.iter().enumerate() {
                    let lam = self.eigenvalues[k];
                    let weight = self.coefficients[k] * (lam * t).exp();
                    if weight == c(0.0) {
                        continue;
                    }
                    let mut s = c(0.0);
                    for d in -kk..=kk {
                        let pd = obs.table.at(d).unwrap();
                        let z = lam - I * (d as f64 * w0);
                        let inner: Complex64 = (0..self.dim)
                            .flat_map(|a| (0..self.dim).map(move |b| (a, b)))
                            .map(|(a, b)| r[(a, b)] * pd[(b, a)])
                            .sum();
                        s += inner * (-I * (d as f64 * w0 * t)).exp() * window_mean(z, window);
                    }
                    total += weight * s;
                }
                total.re
            }
            EvolutionMethod::Exponential => {
                let tau = 2.0 * std::f64::consts::PI / obs.omega0;
                let periods = (window / tau).round().max(1.0) as usize;
                (0..periods).map(|p| self.period_average_sampled(obs, t + p as f64 * tau)).sum::<f64>() / periods as f64
            }
        }
    }

    /// One-period average from t by Simpson's rule on the Floquet grid.
    pub fn period_average_sampled(&self, obs: &Observable, t: f64) -> f64 {
        let n = obs.grid.len();
        let tau = 2.0 * std::f64::consts::PI / obs.omega0;
        let step = (&self.generator * c(tau / n as f64)).exp();
        let mut v = vectorize(&self.state(t));
        let mut acc = 0.0;
        for j in 0..=n {
            let f = (unvec(&v, self.dim) * &obs.grid[j % n]).trace().re;
            let w = if j == 0 || j == n { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f;
            v = &step * v;
        }
        acc / (3.0 * n as f64)
    }
}

/// (e^{zT} − 1)/(zT), or its T → ∞ limit when `window` is infinite.
fn window_mean(z: Complex64, window: f64) -> Complex64 {
    if window.is_infinite() {
        return if z.norm() < 1e-15 { c(1.0) } else { c(0.0) };
    }
    let x = z * window;
    if x.norm() < 1e-8 {
        c(1.0) + x * 0.5
    } else {
        (x.exp() - c(1.0)) / x
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub states: Vec<CMat>,
    pub method: EvolutionMethod,
    pub trace_defect: f64,
}

pub fn evolve(gen: &Generator, rho0: &CMat, times: &[f64]) -> Result<Evolution> {
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(LzsError::InvalidParameter("times must be finite, ≥ 0 and ascending".into()));
    }
    let dyn_ = Dynamics::new(gen, rho0)?;
    let states: Vec<CMat> = times.iter().map(|&t| dyn_.state(t)).collect();
    let tr0 = rho0.trace();
    let trace_defect = states.iter().map(|s| (s.trace() - tr0).norm()).fold(0.0, f64::max);
    Ok(Evolution { states, method: dyn_.method, trace_defect })
}

/// Zero mode of Λ normalized to unit trace.
pub fn steady_state(gen: &Generator) -> Result<CMat> {
    let m = gen.dim;
    let norm = gen.norm();
    let (vals, _) = gen.eigen()?;
    let mut mags: Vec<f64> = vals.iter().map(|z| z.norm()).collect();
    mags.sort_by(f64::total_cmp);
    let threshold = 1e-10 * norm;
    if mags[0] >= threshold {
        return Err(LzsError::Generator(format!("no zero eigenvalue (smallest |λ| = {:e})", mags[0])));
    }
    if mags.len() > 1 && mags[1] < threshold {
        return Err(LzsError::NonUniqueSteadyState { first: mags[0], second: mags[1] });
    }
    // Λx = 0 with the first row swapped for Tr x = 1
    let mut a = gen.matrix.clone();
    let mut rhs = CVec::zeros(m * m);
    for col in 0..m * m {
        a[(0, col)] = c(0.0);
    }
    for k in 0..m {
        a[(0, vec_index(m, k, k))] = c(1.0);
    }
    rhs[0] = c(1.0);
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| LzsError::Generator("steady-state system singular".into()))?;
    let rho = linalg::hermitize(&unvec(&x, m));
    let rho = &rho / rho.trace();
    let resid = (&gen.matrix * vectorize(&rho)).norm();
    if resid > 1e-9 * norm {
        return Err(LzsError::Generator(format!("steady-state residual {resid:e}")));
    }
    Ok(rho)
}

#[derive(Clone, Debug)]
pub struct Timescales {
    pub t_r: Option<f64>,
    pub t_d: Option<f64>,
    pub eigenvalues: Vec<Complex64>,
}

impl Timescales {
    /// 1/t_φ = 1/t_d − 1/(2t_r)
    pub fn t_phi(&self) -> Option<f64> {
        match (self.t_r, self.t_d) {
            (Some(r), Some(d)) => Some(1.0 / (1.0 / d - 0.5 / r)),
            _ => None,
        }
    }
}

pub fn timescales(gen: &Generator) -> Result<Timescales> {
    let (vals, _) = gen.eigen()?;
    Ok(classify_spectrum(vals, gen.norm()))
}

/// Drop the steady-state mode; slowest real decay gives t_r, the slowest
/// complex pair gives t_d.
pub fn classify_spectrum(vals: Vec<Complex64>, norm: f64) -> Timescales {
    let zero = (0..vals.len()).min_by(|&a, &b| vals[a].norm().total_cmp(&vals[b].norm()));
    let tol = 1e-10 * norm;
    let mut real_max: Option<f64> = None;
    let mut complex_max: Option<f64> = None;
    for (k, v) in vals.iter().enumerate() {
        if Some(k) == zero {
            continue;
        }
        if v.im.abs() <= tol {
            if v.re < 0.0 {
                real_max = Some(real_max.map_or(v.re, |r: f64| r.max(v.re)));
            }
        } else if v.re < 0.0 {
            complex_max = Some(complex_max.map_or(v.re, |r: f64| r.max(v.re)));
        }
    }
    Timescales { t_r: real_max.map(|r| -1.0 / r), t_d: complex_max.map(|r| -1.0 / r), eigenvalues: vals }
}

/// An observable Π in the Floquet frame.
#[derive(Clone, Debug)]
pub struct Observable {
    pub omega0: f64,
    /// Π_{βα}(d) = Σ_k ⟨β_k|Π|α_{k+d}⟩
    pub table: ElementTable,
    /// ⟨β(t_j)|Π|α(t_j)⟩ on the period grid
    pub grid: Vec<CMat>,
}

impl Observable {
    pub fn new(basis: &FloquetBasis, op: &CMat) -> Result<Self> {
        // amplitudes, not rates, are summed here: keep shells down to double precision
        let table = harmonic_table(basis, op, "observable", 1e-24);
        let grid = basis.states_grid.iter().map(|s| s.adjoint() * op * s).collect();
        Ok(Observable { omega0: basis.omega0, table, grid })
    }

    /// Tr[Π ρ_S(mτ)]
    pub fn stroboscopic(&self, rho: &CMat) -> f64 {
        (rho * &self.grid[0]).trace().re
    }

    /// Period average of Tr[Π ρ_S] for a stationary ρ in the Floquet frame.
    pub fn stationary_average(&self, rho: &CMat) -> f64 {
        (rho * self.table.at(0).unwrap()).trace().re
    }
}

/// max(0, −λ_min(ρ))
pub fn positivity_defect(rho: &CMat) -> f64 {
    let (vals, _) = linalg::eigh(&linalg::hermitize(rho));
    (-vals[0]).max(0.0)
}
