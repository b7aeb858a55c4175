//! Brute-force reference: unitary evolution of the full system-meter density
//! matrix on a truncated Fock space.
//!
//! Basis ordering is `|i⟩ ⊗ |n⟩ ↦ i·dim_meter + n`. The coupled Hamiltonian is
//! time independent during the coupling episode, so `ρ(t)` follows from one
//! Hermitian eigendecomposition.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::displaced_fock::{alpha_sq, joint_distribution};
use crate::error::{Error, Result};
use crate::params::{phase, EngineParams, TlsPopulations};
use crate::thermo::thermo_report_from;

type C64 = Complex<f64>;

/// Largest default meter dimension.
pub const MAX_DEFAULT_DIM: usize = 512;
/// Occupation allowed in the top two meter levels after evolution.
pub const LEAK_LIMIT: f64 = 1e-10;

/// Truncated density matrix of system and meter.
#[derive(Debug, Clone)]
pub struct TruncatedState {
    pub dim_meter: usize,
    pub rho: DMatrix<C64>,
    pub params: EngineParams,
}

/// Largest `|α(t)|²` for `t ∈ [0, t_m]`; the displacement peaks at half a period.
pub fn peak_alpha_sq(params: &EngineParams) -> f64 {
    if phase(params) >= PI {
        2.0 * params.g_eff_sq() / params.hbar_omega()
    } else {
        alpha_sq(params)
    }
}

/// Meter dimension that holds the thermal tail to 1e−14 and the displaced
/// distribution to ten standard deviations at every time of the evolution.
pub fn default_dim_meter(params: &EngineParams) -> usize {
    let x = params.meter_beta_hw();
    let a2 = peak_alpha_sq(params);
    let nbar = if x > 700.0 { 0.0 } else { 1.0 / x.exp_m1() };
    let spread = a2 + 10.0 * (a2 + 1.0).sqrt() + 20.0;
    let thermal_tail = (1e-14f64).ln() / -x;
    let dim = (nbar.max(thermal_tail) + spread).ceil() as usize;
    dim.clamp(2, MAX_DEFAULT_DIM)
}

/// `H_S + H_M + V_I` with `V_I = i√(g_eff² ħω/2)(a† − a)` on the excited sector.
pub fn build_hamiltonian(params: &EngineParams, dim_meter: usize) -> Result<DMatrix<C64>> {
    if dim_meter < 2 {
        return Err(Error::Domain {
            what: "build_hamiltonian",
            reason: format!("dim_meter = {dim_meter} must be at least 2"),
        });
    }
    let d = dim_meter;
    let hw = params.hbar_omega();
    let c = (0.5 * params.g_eff_sq() * hw).sqrt();
    let mut h = DMatrix::<C64>::zeros(2 * d, 2 * d);
    for i in 0..2 {
        for n in 0..d {
            let k = i * d + n;
            h[(k, k)] = C64::new(i as f64 * params.delta_e() + hw * (n as f64 + 0.5), 0.0);
        }
    }
    for n in 0..d - 1 {
        let amp = c * ((n + 1) as f64).sqrt();
        let (lo, hi) = (d + n, d + n + 1);
        h[(hi, lo)] = C64::new(0.0, amp);
        h[(lo, hi)] = C64::new(0.0, -amp);
    }
    Ok(h)
}

/// Diagonal of the uncoupled Hamiltonian `H_S + H_M`.
fn bare_energies(params: &EngineParams, dim_meter: usize) -> Vec<f64> {
    (0..2 * dim_meter)
        .map(|k| {
            let (i, n) = (k / dim_meter, k % dim_meter);
            i as f64 * params.delta_e() + params.hbar_omega() * (n as f64 + 0.5)
        })
        .collect()
}

/// Product of the system and meter thermal states, truncated without renormalisation.
pub fn initial_state(params: &EngineParams, dim_meter: usize) -> TruncatedState {
    let pops = TlsPopulations::at(params.delta_e());
    let x = params.meter_beta_hw();
    let one_q = -(-x).exp_m1();
    let mut rho = DMatrix::<C64>::zeros(2 * dim_meter, 2 * dim_meter);
    for n in 0..dim_meter {
        let w = one_q * (-(n as f64) * x).exp();
        rho[(n, n)] = C64::new(pops.a * w, 0.0);
        rho[(dim_meter + n, dim_meter + n)] = C64::new(pops.b * w, 0.0);
    }
    TruncatedState { dim_meter, rho, params: *params }
}

/// `ρ(t_m) = e^{−iHt_m} ρ(0) e^{iHt_m}`; `dim_meter = None` picks [`default_dim_meter`].
pub fn evolve(params: &EngineParams, dim_meter: Option<usize>) -> Result<TruncatedState> {
    let d = dim_meter.unwrap_or_else(|| default_dim_meter(params));
    let h = build_hamiltonian(params, d)?;
    let mut state = initial_state(params, d);
    let t = params.tau();
    if t == 0.0 {
        return Ok(state);
    }
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let phases = DMatrix::<C64>::from_diagonal(&eig.eigenvalues.map(|e| C64::new(0.0, -e * t).exp()));
    let u = &v * phases * v.adjoint();
    state.rho = &u * &state.rho * u.adjoint();
    let leak = state.meter_occupation(d - 2) + state.meter_occupation(d - 1);
    if leak > LEAK_LIMIT {
        return Err(Error::TruncationLeak { occupation: leak, limit: LEAK_LIMIT, dim_meter: d });
    }
    Ok(state)
}

impl TruncatedState {
    fn idx(&self, i: usize, n: usize) -> usize {
        i * self.dim_meter + n
    }

    /// `P(i, n) = ⟨i,n|ρ|i,n⟩`.
    pub fn joint(&self, i: usize, n: usize) -> f64 {
        let k = self.idx(i, n);
        self.rho[(k, k)].re
    }

    pub fn meter_occupation(&self, n: usize) -> f64 {
        self.joint(0, n) + self.joint(1, n)
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).diagonal().iter().map(|z| z.re).sum()
    }

    /// Smallest eigenvalue of `ρ`.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.rho.clone()).eigenvalues.min()
    }

    /// Reduced system state `tr_M ρ` as a 2×2 matrix.
    pub fn system_marginal(&self) -> [[C64; 2]; 2] {
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..self.dim_meter).map(|n| self.rho[(self.idx(i, n), self.idx(j, n))]).sum();
            }
        }
        out
    }

    /// Unnormalised conditional system block `⟨n|ρ|n⟩`.
    pub fn conditional_block(&self, n: usize) -> [[C64; 2]; 2] {
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.rho[(self.idx(i, n), self.idx(j, n))];
            }
        }
        out
    }

    /// `Σ_n P(n) S(ρ_S|n)` from the von Neumann entropy of each conditional block.
    pub fn conditional_entropy(&self) -> f64 {
        (0..self.dim_meter)
            .map(|n| {
                let (lo, hi) = eigen2(&self.conditional_block(n));
                -xlnx(lo) - xlnx(hi) + xlnx(lo + hi)
            })
            .sum()
    }

    /// Outcome-averaged ergotropy of the conditional system states.
    pub fn averaged_ergotropy(&self) -> f64 {
        let de = self.params.delta_e();
        (0..self.dim_meter)
            .map(|n| {
                let block = self.conditional_block(n);
                let (lo, _) = eigen2(&block);
                de * (block[1][1].re - lo).max(0.0)
            })
            .sum()
    }

    /// von Neumann entropy of the reduced system state.
    pub fn system_entropy(&self) -> f64 {
        let (lo, hi) = eigen2(&self.system_marginal());
        -xlnx(lo) - xlnx(hi)
    }

    /// `tr{ρ V_I}`, the cost of switching the coupling on.
    pub fn coupling_energy(&self) -> f64 {
        let h = build_hamiltonian(&self.params, self.dim_meter).expect("dim_meter >= 2");
        let bare = bare_energies(&self.params, self.dim_meter);
        let mut v = h;
        for (k, e) in bare.iter().enumerate() {
            v[(k, k)] -= C64::new(*e, 0.0);
        }
        (&v * &self.rho).diagonal().iter().map(|z| z.re).sum()
    }
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Eigenvalues of a 2×2 Hermitian matrix, ascending.
fn eigen2(m: &[[C64; 2]; 2]) -> (f64, f64) {
    let (p, r) = (m[0][0].re, m[1][1].re);
    let off = m[0][1].norm();
    let mean = 0.5 * (p + r);
    let rad = (0.25 * (p - r) * (p - r) + off * off).sqrt();
    (mean - rad, mean + rad)
}

/// `tr{(H_S + H_M)(ρ(t_m) − ρ(0))}`.
pub fn oracle_measurement_work(state_tm: &TruncatedState, state_0: &TruncatedState) -> Result<f64> {
    if state_tm.dim_meter != state_0.dim_meter {
        return Err(Error::LengthMismatch { left: state_tm.dim_meter, right: state_0.dim_meter });
    }
    let e = bare_energies(&state_tm.params, state_tm.dim_meter);
    Ok(e.iter().enumerate().map(|(k, e)| e * (state_tm.rho[(k, k)].re - state_0.rho[(k, k)].re)).sum())
}

/// Worst absolute deviations between the closed forms and the oracle at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct OracleResiduals {
    pub joint: f64,
    pub w_meas: f64,
    pub s_tm: f64,
    pub info: f64,
    pub w_ext: f64,
    pub dim_meter: usize,
}

impl OracleResiduals {
    pub fn max(&self) -> f64 {
        self.joint.max(self.w_meas).max(self.s_tm).max(self.info).max(self.w_ext)
    }

    pub fn merge(self, other: Self) -> Self {
        OracleResiduals {
            joint: self.joint.max(other.joint),
            w_meas: self.w_meas.max(other.w_meas),
            s_tm: self.s_tm.max(other.s_tm),
            info: self.info.max(other.info),
            w_ext: self.w_ext.max(other.w_ext),
            dim_meter: self.dim_meter.max(other.dim_meter),
        }
    }
}

/// Evolves the oracle and compares every closed-form quantity against it.
pub fn compare_with_closed_form(params: &EngineParams, tol: f64) -> Result<OracleResiduals> {
    let state = evolve(params, None)?;
    let d = state.dim_meter;
    let start = initial_state(params, d);
    let dist = joint_distribution(params, tol)?;
    let report = thermo_report_from(&dist);
    let joint = (0..d)
        .flat_map(|n| [(0, n), (1, n)])
        .map(|(i, n)| (dist.p_joint(i, n) - state.joint(i, n)).abs())
        .fold(0.0, f64::max);
    let s_tm = state.conditional_entropy();
    let info = state.system_entropy() - s_tm;
    Ok(OracleResiduals {
        joint,
        w_meas: (report.w_meas - oracle_measurement_work(&state, &start)?).abs(),
        s_tm: (report.s_tm - s_tm).abs(),
        info: (report.info - info).abs(),
        w_ext: (report.w_ext - state.averaged_ergotropy()).abs(),
        dim_meter: d,
    })
}
