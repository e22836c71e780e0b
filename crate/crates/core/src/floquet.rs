//! Floquet quasienergies, period-sampled Floquet states and their harmonics.

use std::f64::consts::PI;

use nalgebra::Schur;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{LzsError, Result};
use crate::linalg::{self, c, CMat, I};
use crate::model::{Coupling, DrivenModel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloquetSettings {
    /// Magnus steps per period (power of two ≥ 256)
    pub n_steps: usize,
    /// sampling points per period (power of two, divides n_steps)
    pub n_grid: usize,
    /// harmonic cutoff K; `None` picks max(32, ⌈4A/ω₀⌉+10)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmonics: Option<usize>,
}

impl Default for FloquetSettings {
    fn default() -> Self {
        FloquetSettings { n_steps: 4096, n_grid: 4096, harmonics: None }
    }
}

impl FloquetSettings {
    pub fn validate(&self) -> Result<()> {
        if !self.n_steps.is_power_of_two() || self.n_steps < 256 {
            return Err(LzsError::InvalidParameter(format!("n_steps must be a power of two ≥ 256, got {}", self.n_steps)));
        }
        if !self.n_grid.is_power_of_two() || self.n_grid < 16 || self.n_grid > self.n_steps {
            return Err(LzsError::InvalidParameter(format!("n_grid must be a power of two in [16, n_steps], got {}", self.n_grid)));
        }
        Ok(())
    }
}

const C1: f64 = 0.5 - 0.288_675_134_594_812_9; // 1/2 − √3/6
const C2: f64 = 0.5 + 0.288_675_134_594_812_9;
const MAGNUS_COMMUTATOR: f64 = 0.144_337_567_297_406_43; // √3/12

/// Fourth-order Magnus step from t to t+dt.
fn magnus_step(model: &DrivenModel, t: f64, dt: f64) -> CMat {
    let h1 = model.hamiltonian_at(t + C1 * dt);
    let h2 = model.hamiltonian_at(t + C2 * dt);
    let comm = &h2 * &h1 - &h1 * &h2;
    let heff = (&h1 + &h2) * c(0.5) - comm * (I * (MAGNUS_COMMUTATOR * dt));
    linalg::expm_herm(&linalg::hermitize(&heff), dt)
}

/// U(t_j) at `n_record` equally spaced times in [0, τ), plus U(τ).
fn propagate(model: &DrivenModel, n_steps: usize, n_record: usize) -> (CMat, Vec<CMat>) {
    let dt = model.period() / n_steps as f64;
    let every = n_steps / n_record;
    let mut u = CMat::identity(model.dim, model.dim);
    let mut grid = Vec::with_capacity(n_record);
    for j in 0..n_steps {
        if j % every == 0 {
            grid.push(u.clone());
        }
        u = magnus_step(model, j as f64 * dt, dt) * u;
    }
    (u, grid)
}

/// Monodromy matrix U(τ).
pub fn propagate_one_period(model: &DrivenModel, n_steps: usize) -> Result<CMat> {
    FloquetSettings { n_steps, n_grid: 256.min(n_steps), harmonics: None }.validate()?;
    let (u, _) = propagate(model, n_steps, 1);
    let defect = linalg::unitarity_defect(&u);
    if defect > 1e-9 {
        return Err(LzsError::Unitarity { defect });
    }
    Ok(u)
}

#[derive(Clone, Debug)]
pub struct FloquetBasis {
    pub omega0: f64,
    /// folded into (−ω₀/2, ω₀/2] unless shifted explicitly
    pub quasienergies: Vec<f64>,
    /// |α(t_j)⟩ as columns, t_j = jτ/N_t
    pub states_grid: Vec<CMat>,
    /// cutoff K of the stored harmonics
    pub harmonics: usize,
    /// |α_k⟩ as columns, index k + K
    pub fourier: Vec<CMat>,
    /// two eigenphases of U(τ) closer than 1e-12
    pub degenerate: bool,
    pub unitarity_defect: f64,
    pub settings: FloquetSettings,
}

impl FloquetBasis {
    pub fn dim(&self) -> usize {
        self.quasienergies.len()
    }

    pub fn n_grid(&self) -> usize {
        self.states_grid.len()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega0
    }

    pub fn grid_time(&self, j: usize) -> f64 {
        self.period() * j as f64 / self.n_grid() as f64
    }

    /// |α_k⟩ columns, or `None` outside |k| ≤ K.
    pub fn component(&self, k: i64) -> Option<&CMat> {
        let kk = self.harmonics as i64;
        if k.abs() > kk {
            None
        } else {
            Some(&self.fourier[(k + kk) as usize])
        }
    }

    /// The grid states at t = 0.
    pub fn initial_states(&self) -> &CMat {
        &self.states_grid[0]
    }

    /// Relabel ε_α → ε_α + s·ω₀, |α(t)⟩ → e^{isω₀t}|α(t)⟩; physically the same state.
    pub fn shift_branch(&self, alpha: usize, s: i64) -> FloquetBasis {
        let mut out = self.clone();
        out.quasienergies[alpha] += s as f64 * self.omega0;
        for (j, m) in out.states_grid.iter_mut().enumerate() {
            let ph = Complex64::from_polar(1.0, s as f64 * self.omega0 * self.grid_time(j));
            m.column_mut(alpha).iter_mut().for_each(|z| *z *= ph);
        }
        let kk = self.harmonics as i64;
        for k in -kk..=kk {
            let src = k + s;
            let col = self.component(src).map(|m| m.column(alpha).into_owned());
            let dst = &mut out.fourier[(k + kk) as usize];
            match col {
                Some(v) => dst.column_mut(alpha).copy_from(&v),
                None => dst.column_mut(alpha).fill(c(0.0)),
            }
        }
        out
    }

    /// Σ_k ⟨α_k|β_k⟩, which should be the identity.
    pub fn fourier_gram(&self) -> CMat {
        self.fourier.iter().fold(CMat::zeros(self.dim(), self.dim()), |acc, f| acc + f.adjoint() * f)
    }

    /// Σ_k |α_k⟩ e^{−ikω₀t}
    pub fn reconstruct(&self, t: f64) -> CMat {
        let kk = self.harmonics as i64;
        let mut out = CMat::zeros(self.fourier[0].nrows(), self.dim());
        for k in -kk..=kk {
            out += self.component(k).unwrap() * Complex64::from_polar(1.0, -(k as f64) * self.omega0 * t);
        }
        out
    }
}

fn default_harmonics(model: &DrivenModel) -> usize {
    let a_max = model.drive_spread();
    32.max((4.0 * a_max / model.drive.omega0).ceil() as usize + 10)
}

/// Inverse DFT along the grid of every matrix entry: out_q = (1/N) Σ_j x_j e^{2πi jq/N}.
fn grid_transform(series: &[CMat]) -> Vec<CMat> {
    let n = series.len();
    let (rows, cols) = series[0].shape();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let mut out = vec![CMat::zeros(rows, cols); n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let scale = 1.0 / n as f64;
    for r in 0..rows {
        for col in 0..cols {
            for (j, m) in series.iter().enumerate() {
                buf[j] = m[(r, col)];
            }
            fft.process(&mut buf);
            for (q, m) in out.iter_mut().enumerate() {
                m[(r, col)] = buf[q] * scale;
            }
        }
    }
    out
}

fn wrap(q: i64, n: usize) -> usize {
    q.rem_euclid(n as i64) as usize
}

pub fn floquet_states(model: &DrivenModel, settings: &FloquetSettings) -> Result<FloquetBasis> {
    settings.validate()?;
    let mut settings = *settings;
    let k_cut = settings.harmonics.unwrap_or_else(|| default_harmonics(model));
    while settings.n_grid < 4 * k_cut {
        settings.n_grid *= 2;
        settings.n_steps = settings.n_steps.max(settings.n_grid);
    }
    let tau = model.period();
    let omega0 = model.drive.omega0;
    let (u_tau, grid) = propagate(model, settings.n_steps, settings.n_grid);
    let defect = grid.iter().map(linalg::unitarity_defect).fold(linalg::unitarity_defect(&u_tau), f64::max);
    if defect > 1e-9 {
        return Err(LzsError::Unitarity { defect });
    }

    let schur = Schur::try_new(u_tau, 1e-15, 10_000)
        .ok_or_else(|| LzsError::Eigensolver("Schur iteration on U(τ) did not converge".into()))?;
    let (q, t) = schur.unpack();
    let m = model.dim;
    let lambdas: Vec<Complex64> = (0..m).map(|i| t[(i, i)]).collect();
    let mut degenerate = false;
    for i in 0..m {
        for j in 0..i {
            if (lambdas[i] - lambdas[j]).norm() < 1e-12 {
                degenerate = true;
            }
        }
    }
    let fold = |e: f64| {
        let mut e = e;
        while e <= -omega0 / 2.0 {
            e += omega0;
        }
        while e > omega0 / 2.0 {
            e -= omega0;
        }
        e
    };
    let raw_eps: Vec<f64> = lambdas.iter().map(|l| fold(-l.arg() / tau)).collect();

    // label Floquet states by overlap with the static eigenbasis
    let (_, static_vecs) = linalg::eigh(&model.static_hamiltonian());
    let overlaps = static_vecs.adjoint() * &q;
    let mut order = Vec::with_capacity(m);
    let mut used = vec![false; m];
    for level in 0..m {
        let mut best = None;
        let mut best_w = -1.0;
        for a in 0..m {
            if used[a] {
                continue;
            }
            let w = overlaps[(level, a)].norm_sqr();
            let better = match best {
                None => true,
                Some(b) => w > best_w + 1e-12 || ((w - best_w).abs() <= 1e-12 && raw_eps[a] < raw_eps[b]),
            };
            if better {
                best = Some(a);
                best_w = w;
            }
        }
        let b = best.unwrap();
        used[b] = true;
        order.push(b);
    }
    let quasienergies: Vec<f64> = order.iter().map(|&a| raw_eps[a]).collect();
    let mut v0 = CMat::from_fn(m, m, |r, col| q[(r, order[col])]);
    linalg::fix_phases(&mut v0);

    let states_grid: Vec<CMat> = grid
        .iter()
        .enumerate()
        .map(|(j, uj)| {
            let tj = tau * j as f64 / settings.n_grid as f64;
            let mut s = uj * &v0;
            for (a, e) in quasienergies.iter().enumerate() {
                let ph = Complex64::from_polar(1.0, e * tj);
                s.column_mut(a).iter_mut().for_each(|z| *z *= ph);
            }
            s
        })
        .collect();

    let spectrum = grid_transform(&states_grid);
    let kk = k_cut as i64;
    let fourier = (-kk..=kk).map(|k| spectrum[wrap(k, settings.n_grid)].clone()).collect();
    Ok(FloquetBasis {
        omega0,
        quasienergies,
        states_grid,
        harmonics: k_cut,
        fourier,
        degenerate,
        unitarity_defect: defect,
        settings,
    })
}

/// A^ν_{αβ,q} for one operator, index q + K.
#[derive(Clone, Debug)]
pub struct ElementTable {
    pub tag: String,
    pub harmonics: usize,
    pub q: Vec<CMat>,
    /// relative weight of the outermost shell
    pub tail: f64,
}

impl ElementTable {
    pub fn at(&self, q: i64) -> Option<&CMat> {
        let kk = self.harmonics as i64;
        if q.abs() > kk {
            None
        } else {
            Some(&self.q[(q + kk) as usize])
        }
    }
}

#[derive(Clone, Debug)]
pub struct CouplingElements {
    pub tables: Vec<ElementTable>,
}

fn shell_weight(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// A_{αβ,q} = Σ_k ⟨α_k|A|β_{k+q}⟩ for a single operator, via the period grid.
pub fn operator_elements(basis: &FloquetBasis, op: &CMat, tag: &str) -> Result<ElementTable> {
    let table = harmonic_table(basis, op, tag, 1e-8);
    if table.tail >= 1e-8 {
        return Err(LzsError::HarmonicTail { k: table.harmonics, weight: table.tail });
    }
    Ok(table)
}

/// Harmonics kept until the outermost shell falls below `tol`, or up to N/2 − 1.
pub fn harmonic_table(basis: &FloquetBasis, op: &CMat, tag: &str, tol: f64) -> ElementTable {
    let series: Vec<CMat> = basis.states_grid.iter().map(|s| s.adjoint() * op * s).collect();
    let spectrum = grid_transform(&series);
    let n = basis.n_grid();
    let limit = n / 2 - 1;
    let total: f64 = spectrum.iter().map(shell_weight).sum();
    let rel = |k: usize| {
        let w = shell_weight(&spectrum[wrap(k as i64, n)]) + shell_weight(&spectrum[wrap(-(k as i64), n)]);
        if total > 0.0 {
            w / total
        } else if w == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let mut k_cut = basis.harmonics.min(limit);
    while rel(k_cut) >= tol && k_cut < limit {
        k_cut = (k_cut * 2).min(limit);
    }
    let tail = rel(k_cut);
    let kk = k_cut as i64;
    ElementTable {
        tag: tag.to_string(),
        harmonics: k_cut,
        q: (-kk..=kk).map(|q| spectrum[wrap(q, n)].clone()).collect(),
        tail,
    }
}

pub fn matrix_elements(basis: &FloquetBasis, couplings: &[Coupling]) -> Result<CouplingElements> {
    let tables = couplings
        .iter()
        .map(|cp| operator_elements(basis, &cp.operator, &cp.tag))
        .collect::<Result<Vec<_>>>()?;
    Ok(CouplingElements { tables })
}

/// Direct Σ_k ⟨α_k|A|β_{k+q}⟩ over stored harmonics (reference definition).
pub fn elements_from_harmonics(basis: &FloquetBasis, op: &CMat, q: i64) -> CMat {
    let kk = basis.harmonics as i64;
    let mut out = CMat::zeros(basis.dim(), basis.dim());
    for k in -kk..=kk {
        if let (Some(a), Some(b)) = (basis.component(k), basis.component(k + q)) {
            out += a.adjoint() * op * b;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_tls_model, Axis, CouplingSpec, TlsParams};
    use crate::rwa::bessel_j;
    use proptest::prelude::*;

    const W: f64 = 0.003;

    fn tls(delta: f64, f_dc: f64, f_ac: f64) -> DrivenModel {
        let t = TlsParams::explicit(delta, 0.721).unwrap();
        build_tls_model(&t, f_dc, f_ac, W, &[CouplingSpec::new(Axis::Z, 1.0, "f"), CouplingSpec::new(Axis::Y, 1.0, "ch")]).unwrap()
    }

    fn quick() -> FloquetSettings {
        FloquetSettings { n_steps: 1024, n_grid: 512, harmonics: None }
    }

    #[test]
    fn static_limit_phases() {
        let m = tls(3.33e-4, 0.0005, 0.0);
        let u = propagate_one_period(&m, 256).unwrap();
        let expect = linalg::expm_herm(&m.static_hamiltonian(), m.period());
        assert!(linalg::max_abs(&(u - expect)) < 1e-12);
    }

    #[test]
    fn commuting_drive_is_diagonal() {
        let m = tls(0.0, 0.0002, 0.004);
        let u = propagate_one_period(&m, 1024).unwrap();
        let eps0 = 4.0 * PI * 0.721 * 0.0002;
        let tau = m.period();
        assert!(u[(0, 1)].norm() < 1e-13);
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, eps0 * tau / 2.0)).norm() < 1e-10);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, -eps0 * tau / 2.0)).norm() < 1e-10);
    }

    #[test]
    fn step_count_checked() {
        let m = tls(3.33e-4, 0.0, 0.003);
        assert!(propagate_one_period(&m, 100).is_err());
        assert!(propagate_one_period(&m, 128).is_err());
    }

    #[test]
    fn self_convergence_at_default_steps() {
        let m = tls(3.33e-4, 0.0011, 0.003);
        let a = propagate_one_period(&m, 4096).unwrap();
        let b = propagate_one_period(&m, 8192).unwrap();
        assert!(linalg::max_abs(&(a - b)) < 1e-10);
    }

    #[test]
    fn undriven_quasienergies_fold_static_levels() {
        let m = tls(3.33e-4, 0.0005, 0.0);
        let fb = floquet_states(&m, &quick()).unwrap();
        let (e, vecs) = linalg::eigh(&m.static_hamiltonian());
        for a in 0..2 {
            let mut folded = e[a];
            while folded > W / 2.0 {
                folded -= W;
            }
            while folded <= -W / 2.0 {
                folded += W;
            }
            assert!((fb.quasienergies[a] - folded).abs() < 1e-12);
            // the folded state is e^{−ikω₀t}|φ⟩ with k = (E − ε)/ω₀
            let shift = ((e[a] - folded) / W).round() as i64;
            let ov = (vecs.column(a).adjoint() * fb.component(shift).unwrap().column(a))[(0, 0)].norm();
            assert!((ov - 1.0).abs() < 1e-10);
            for k in [-2i64, -1, 0, 1, 3] {
                if k != shift {
                    assert!(fb.component(k).unwrap().column(a).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn zero_gap_matches_bessel_closed_form() {
        let (f_dc, f_ac) = (0.0002, 0.003);
        let m = tls(0.0, f_dc, f_ac);
        let fb = floquet_states(&m, &FloquetSettings::default()).unwrap();
        let eps0 = 4.0 * PI * 0.721 * f_dc;
        let amp = 4.0 * PI * 0.721 * f_ac;
        // |+⟩ branch: quasienergy −ε₀/2
        let plus = (0..2).find(|&a| fb.component(0).unwrap()[(0, a)].norm() > 0.1).unwrap();
        assert!((fb.quasienergies[plus] + eps0 / 2.0).abs() < 1e-10);
        let x = amp / (2.0 * W);
        let phase = fb.component(0).unwrap()[(0, plus)] / bessel_j(0, x).unwrap();
        for k in -20i64..=20 {
            let got = fb.component(k).unwrap()[(0, plus)];
            let want = phase * bessel_j(-k as i32, x).unwrap();
            assert!((got - want).norm() < 1e-8, "k={k}: {got} vs {want}");
            assert!(fb.component(k).unwrap()[(1, plus)].norm() < 1e-12);
        }
    }

    /// Extended-space (Shirley) Hamiltonian with harmonic cutoff n:
    /// block (k, k') = H_{k−k'} − kω₀δ_{kk'}, with H(t) = Σ_p H_p e^{−ipω₀t}.
    fn shirley_quasienergies(m: &DrivenModel, n: i64) -> Vec<f64> {
        let (h0, h1) = match &m.form {
            crate::model::DriveForm::Linear { h0, h1 } => (h0.clone(), h1.clone()),
            _ => unreachable!(),
        };
        let d = m.dim;
        let size = (2 * n + 1) as usize * d;
        let mut big = CMat::zeros(size, size);
        for k in -n..=n {
            let r = (k + n) as usize * d;
            let mut diag = h0.clone();
            for i in 0..d {
                diag[(i, i)] -= c(k as f64 * W);
            }
            big.view_mut((r, r), (d, d)).copy_from(&diag);
            if k < n {
                let r2 = (k + 1 + n) as usize * d;
                big.view_mut((r, r2), (d, d)).copy_from(&(&h1 * c(0.5)));
                big.view_mut((r2, r), (d, d)).copy_from(&(&h1 * c(0.5)));
            }
        }
        let (vals, vecs) = linalg::eigh(&big);
        // keep eigenvalues whose vectors sit in the central blocks
        let mut out = Vec::new();
        for (j, v) in vals.iter().enumerate() {
            let mut centroid = 0.0;
            for k in -n..=n {
                let r = (k + n) as usize * d;
                let w: f64 = (0..d).map(|i| vecs[(r + i, j)].norm_sqr()).sum();
                centroid += w * k as f64;
            }
            if centroid.abs() < n as f64 / 2.0 && v.abs() <= W / 2.0 {
                out.push(*v);
            }
        }
        out
    }

    #[test]
    fn quasienergies_match_shirley_oracle() {
        for (f_dc, f_ac) in [(0.0011, 0.003), (4.0 * 3.31e-4, 0.003), (0.0003, 0.0015)] {
            let m = tls(3.33e-4, f_dc, f_ac);
            let fb = floquet_states(&m, &FloquetSettings::default()).unwrap();
            let reference = shirley_quasienergies(&m, 80);
            for e in &fb.quasienergies {
                let best = reference.iter().map(|r| (r - e).abs()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-8, "quasienergy {e} vs Shirley {reference:?}");
            }
        }
    }

    #[test]
    fn basis_invariants() {
        let m = tls(3.33e-4, 0.0011, 0.003);
        let fb = floquet_states(&m, &FloquetSettings::default()).unwrap();
        for s in &fb.states_grid {
            assert!(linalg::max_abs(&(s.adjoint() * s - CMat::identity(2, 2))) < 1e-8);
        }
        assert!(linalg::max_abs(&(fb.fourier_gram() - CMat::identity(2, 2))) < 1e-8);
        for j in [0usize, 17, 1000, 4095] {
            let r = fb.reconstruct(fb.grid_time(j));
            assert!(linalg::max_abs(&(r - &fb.states_grid[j])) < 1e-8);
        }
        assert!(fb.unitarity_defect < 1e-9);
        assert!(fb.quasienergies.iter().all(|e| *e > -W / 2.0 && *e <= W / 2.0));
    }

    #[test]
    fn sampling_convergence() {
        let m = tls(3.33e-4, 0.0011, 0.003);
        let a = floquet_states(&m, &FloquetSettings { n_steps: 8192, n_grid: 4096, harmonics: Some(40) }).unwrap();
        let b = floquet_states(&m, &FloquetSettings { n_steps: 8192, n_grid: 8192, harmonics: Some(40) }).unwrap();
        for (x, y) in a.fourier.iter().zip(&b.fourier) {
            assert!(linalg::max_abs(&(x - y)) < 1e-9);
        }
    }

    #[test]
    fn grid_elements_equal_harmonic_sum() {
        let m = tls(3.33e-4, 0.0011, 0.003);
        let fb = floquet_states(&m, &FloquetSettings::default()).unwrap();
        for cp in &m.couplings {
            let t = operator_elements(&fb, &cp.operator, &cp.tag).unwrap();
            for q in -10i64..=10 {
                let direct = elements_from_harmonics(&fb, &cp.operator, q);
                assert!(linalg::max_abs(&(direct - t.at(q).unwrap())) < 1e-10);
            }
        }
    }

    #[test]
    fn zero_gap_longitudinal_elements() {
        let m = tls(0.0, 0.0002, 0.003);
        let fb = floquet_states(&m, &FloquetSettings::default()).unwrap();
        let t = operator_elements(&fb, &m.couplings[0].operator, "f").unwrap();
        let plus = (0..2).find(|&a| fb.component(0).unwrap()[(0, a)].norm() > 0.1).unwrap();
        let kk = t.harmonics as i64;
        for q in -kk..=kk {
            let a = t.at(q).unwrap();
            let diag = if q == 0 { if plus == 0 { [-1.0, 1.0] } else { [1.0, -1.0] } } else { [0.0, 0.0] };
            assert!((a[(0, 0)] - c(diag[0])).norm() < 1e-10);
            assert!((a[(1, 1)] - c(diag[1])).norm() < 1e-10);
            assert!(a[(0, 1)].norm() < 1e-10 && a[(1, 0)].norm() < 1e-10);
        }
    }

    #[test]
    fn undriven_elements_are_static() {
        let m = tls(3.33e-4, 0.0005, 0.0);
        let fb = floquet_states(&m, &quick()).unwrap();
        let v = fb.initial_states();
        let (e, _) = linalg::eigh(&m.static_hamiltonian());
        for cp in &m.couplings {
            let t = operator_elements(&fb, &cp.operator, &cp.tag).unwrap();
            let direct = v.adjoint() * &cp.operator * v;
            // ⟨α(t)|A|β(t)⟩ oscillates as e^{−i(k_β − k_α)ω₀t}
            let shift: Vec<i64> = (0..2).map(|a| ((e[a] - fb.quasienergies[a]) / W).round() as i64).collect();
            for a in 0..2 {
                for b in 0..2 {
                    let q = shift[b] - shift[a];
                    assert!((t.at(q).unwrap()[(a, b)] - direct[(a, b)]).norm() < 1e-12);
                    assert!(t.at(q + 1).unwrap()[(a, b)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn branch_shift_relabels_harmonics() {
        let m = tls(3.33e-4, 0.0011, 0.003);
        let fb = floquet_states(&m, &FloquetSettings::default()).unwrap();
        let shifted = fb.shift_branch(1, 1);
        for j in [0usize, 100, 3000] {
            let r = shifted.reconstruct(shifted.grid_time(j));
            assert!(linalg::max_abs(&(r - &shifted.states_grid[j])) < 1e-8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn element_hermiticity(f_dc in -0.002f64..0.002, f_ac in 0.0f64..0.004, theta in 0.0f64..3.0) {
            let t = TlsParams::explicit(3.33e-4, 0.721).unwrap();
            let m = build_tls_model(&t, f_dc, f_ac, W, &CouplingSpec::mixed(theta, "f", "ch")).unwrap();
            let fb = floquet_states(&m, &quick()).unwrap();
            let mut op = Axis::X.pauli() * c(theta.cos());
            op += Axis::Y.pauli() * c(0.3) + Axis::Z.pauli() * c(theta.sin());
            let tab = operator_elements(&fb, &op, "x").unwrap();
            let kk = tab.harmonics as i64;
            for q in -kk..=kk {
                let a = tab.at(q).unwrap();
                let b = tab.at(-q).unwrap();
                for al in 0..2 {
                    for be in 0..2 {
                        prop_assert!((b[(be, al)] - a[(al, be)].conj()).norm() < 1e-10);
                    }
                }
            }
        }
    }
}
