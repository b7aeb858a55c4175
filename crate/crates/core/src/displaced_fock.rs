//! Meter outcome statistics after the coupling episode.
//!
//! The excited branch of the meter is a displaced thermal state. Its Fock
//! distribution is evaluated with a three-term recurrence in the photon number
//! carried in the log domain, which stays finite for displacements up to the
//! truncation cap. The textbook route (thermal mixture of displaced Fock
//! states with Laguerre matrix elements) is kept in
//! [`joint_distribution_mode_sum`] for cross-checks.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::{phase, EngineParams, TlsPopulations};

/// Default tail tolerance of the adaptive truncation.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Largest log-mass correction treated as rounding drift when renormalizing the excited branch.
const RENORM_LIMIT: f64 = 1e-8;

/// Default hard cap on the number of retained meter levels.
pub const DEFAULT_CAP: usize = 20_000;

const LN_TINY: f64 = -690.775_527_898_213_7; // ln(1e-300)

/// `|α(t_m)|² = g_eff² (1 − cos φ) / ħω`.
pub fn alpha_sq(params: &EngineParams) -> f64 {
    let half = 0.5 * phase(params);
    let s = half.sin();
    2.0 * params.g_eff_sq() * s * s / params.hbar_omega()
}

/// `1 − cos φ` without cancellation near φ = 0.
pub(crate) fn one_minus_cos(phi: f64) -> f64 {
    let s = (0.5 * phi).sin();
    2.0 * s * s
}

/// `|⟨n|D(α)|m⟩|²` for `|α|² = alpha_sq`.
pub fn displacement_prob(n: usize, m: usize, alpha_sq: f64) -> f64 {
    if alpha_sq == 0.0 {
        return if n == m { 1.0 } else { 0.0 };
    }
    let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
    let k = (hi - lo) as f64;
    let (lag, scale) = laguerre_scaled(lo, k, alpha_sq);
    if lag == 0.0 {
        return 0.0;
    }
    let ln = ln_gamma(lo as f64 + 1.0) - ln_gamma(hi as f64 + 1.0) + k * alpha_sq.ln() - alpha_sq
        + 2.0 * (lag.abs().ln() + scale);
    ln.exp().min(1.0)
}

/// `L_deg^{(k)}(x)` as `value · e^{scale}`, by upward recurrence in the degree.
fn laguerre_scaled(deg: usize, k: f64, x: f64) -> (f64, f64) {
    const BIG: f64 = 1e150;
    let mut prev = 1.0;
    if deg == 0 {
        return (prev, 0.0);
    }
    let mut cur = 1.0 + k - x;
    let mut scale = 0.0;
    for j in 1..deg {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * cur - (jf + k) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            scale += BIG.ln();
        }
    }
    (cur, scale)
}

/// A sign change of `P(1,n) − P(0,n)` between `n − 1` and `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub n: usize,
    /// `true` when the excited branch overtakes the ground branch at `n`.
    pub upward: bool,
}

/// First outcome with population inversion, plus every sign change seen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdScan {
    pub n_prime: Option<usize>,
    pub crossings: Vec<Crossing>,
}

impl ThresholdScan {
    /// More than one sign change means the inverted window is not a single tail.
    pub fn is_monotone(&self) -> bool {
        self.crossings.len() <= 1
    }
}

/// Truncated joint table `P(i, n)` for `i ∈ {0, 1}`, `n ∈ [0, n_max]`.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    params: EngineParams,
    pops: TlsPopulations,
    alpha_sq: f64,
    n_max: usize,
    tail_mass: f64,
    ln_p0: Vec<f64>,
    ln_p1: Vec<f64>,
    p0: Vec<f64>,
    p1: Vec<f64>,
}

impl JointDistribution {
    fn from_logs(params: &EngineParams, alpha_sq: f64, ln_p0: Vec<f64>, ln_p1: Vec<f64>, tail_mass: f64) -> Self {
        let p0: Vec<f64> = ln_p0.iter().map(|l| l.exp()).collect();
        let p1: Vec<f64> = ln_p1.iter().map(|l| l.exp()).collect();
        JointDistribution {
            params: *params,
            pops: TlsPopulations::at(params.delta_e()),
            alpha_sq,
            n_max: p0.len() - 1,
            tail_mass,
            ln_p0,
            ln_p1,
            p0,
            p1,
        }
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn populations(&self) -> TlsPopulations {
        self.pops
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha_sq
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `P(i, n)`; zero beyond the truncation.
    pub fn p_joint(&self, i: usize, n: usize) -> f64 {
        let v = if i == 0 { &self.p0 } else { &self.p1 };
        v.get(n).copied().unwrap_or(0.0)
    }

    pub fn p0(&self) -> &[f64] {
        &self.p0
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }

    pub fn ln_p0(&self) -> &[f64] {
        &self.ln_p0
    }

    pub fn ln_p1(&self) -> &[f64] {
        &self.ln_p1
    }

    /// Sum of all retained entries.
    pub fn retained_mass(&self) -> f64 {
        self.p0.iter().sum::<f64>() + self.p1.iter().sum::<f64>()
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::IndexOutOfRange { n, n_max: self.n_max });
        }
        Ok(())
    }
}

fn validate_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 && tol <= 1e-6 {
        Ok(())
    } else {
        Err(Error::Validation { field: "tol", value: tol, reason: "must lie in (0, 1e-6]" })
    }
}

/// Joint outcome table with the default cap.
pub fn joint_distribution(params: &EngineParams, tol: f64) -> Result<JointDistribution> {
    joint_distribution_capped(params, tol, DEFAULT_CAP)
}

/// Joint outcome table; `n_max` doubles until the discarded mass is at most `tol`.
pub fn joint_distribution_capped(params: &EngineParams, tol: f64, cap: usize) -> Result<JointDistribution> {
    validate_tol(tol)?;
    let x = params.meter_beta_hw();
    let q = (-x).exp();
    let one_q = -(-x).exp_m1();
    let ln_one_q = one_q.ln();
    let a2 = alpha_sq(params);
    let d = params.delta_e();
    let la = TlsPopulations::ln_a(d);
    let lb = TlsPopulations::ln_b(d);

    let nbar = if x > 700.0 { 0.0 } else { 1.0 / x.exp_m1() };
    let mut n_max = (nbar + a2 + 10.0 * (a2 + 1.0).sqrt()).ceil() as usize;
    // The ground branch tail is exactly a·q^{N+1}; start where half the budget is met.
    let need0 = ((0.5 * tol).ln() - la) / -x - 1.0;
    if need0.is_finite() && need0 > n_max as f64 {
        n_max = need0.ceil().min(usize::MAX as f64 / 4.0) as usize;
    }
    n_max = n_max.clamp(1, cap.max(1));

    let base1 = lb + ln_one_q - a2 * one_q;
    let s = a2 * one_q * one_q;
    let thermal = a2 == 0.0;
    let ln_q = -x;

    let mut ln_p1: Vec<f64> = Vec::with_capacity(n_max + 2);
    let mut ln_t = 0.0;
    let mut rho = 0.0;
    ln_p1.push(base1);

    // ρ_{n+1} from ρ_n, for T_{n+1} = [((2n+1)q + s)T_n − n q² T_{n−1}]/(n+1).
    let step = |n: usize, rho: f64| -> f64 {
        if n == 0 {
            return q + s;
        }
        let nf = n as f64;
        let back = if q == 0.0 || rho == 0.0 { 0.0 } else { nf * q * q / rho };
        (((2.0 * nf + 1.0) * q + s) - back).max(0.0) / (nf + 1.0)
    };

    loop {
        while ln_p1.len() <= n_max {
            let n = ln_p1.len() - 1;
            if thermal {
                ln_t = (n + 1) as f64 * ln_q;
            } else {
                rho = step(n, rho);
                ln_t += rho.ln();
            }
            ln_p1.push(base1 + ln_t);
        }
        let rho_next = if thermal { q } else { step(n_max, rho) };
        let tail0 = (la - (n_max as f64 + 1.0) * x).exp();
        let p1_last = ln_p1[n_max].exp();
        let decreasing = thermal || rho_next <= rho * (1.0 + 1e-12);
        let tail1 = if rho_next < 1.0 && decreasing { p1_last * rho_next / (1.0 - rho_next) } else { f64::INFINITY };
        let tail = tail0 + tail1;
        if tail <= tol {
            // The log-domain exponents grow like |α|², and so does their rounding
            // drift; the excited branch is pinned back to its exact mass b.
            let peak = ln_p1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = ln_p1.iter().map(|l| (l - peak).exp()).sum::<f64>() + tail1 * (-peak).exp();
            let shift = lb - (peak + sum.ln());
            let (ln_p1, tail) = if shift.is_finite() && shift.abs() <= RENORM_LIMIT {
                (ln_p1.iter().map(|l| l + shift).collect(), tail0 + tail1 * shift.exp())
            } else {
                (ln_p1, tail)
            };
            let ln_p0: Vec<f64> = (0..=n_max).map(|n| la + ln_one_q + n as f64 * ln_q).collect();
            return Ok(JointDistribution::from_logs(params, a2, ln_p0, ln_p1, tail));
        }
        if n_max >= cap {
            return Err(Error::TruncationCap { n_max, cap, tail });
        }
        n_max = (2 * n_max).min(cap);
    }
}

/// Joint table by the explicit thermal mixture `Σ_m P_m |⟨n|D(α)|m⟩|²`.
///
/// Quadratic in the truncation and meant for cross-checks at small sizes.
pub fn joint_distribution_mode_sum(params: &EngineParams, n_max: usize, tol: f64) -> Result<JointDistribution> {
    validate_tol(tol)?;
    let x = params.meter_beta_hw();
    let one_q = -(-x).exp_m1();
    let a2 = alpha_sq(params);
    let pops = TlsPopulations::at(params.delta_e());
    let mut m_max = 0usize;
    while m_max < 100_000 && (one_q.ln() - (m_max as f64 + 1.0) * x).exp() > tol * 1e-3 {
        m_max += 1;
    }
    let weights: Vec<f64> = (0..=m_max).map(|m| one_q * (-(m as f64) * x).exp()).collect();
    let ln_p0: Vec<f64> = (0..=n_max).map(|n| pops.a.ln() + one_q.ln() - n as f64 * x).collect();
    let ln_p1: Vec<f64> = (0..=n_max)
        .map(|n| {
            let s: f64 = weights.iter().enumerate().map(|(m, w)| w * displacement_prob(n, m, a2)).sum();
            pops.b.ln() + s.ln()
        })
        .collect();
    let mut dist = JointDistribution::from_logs(params, a2, ln_p0, ln_p1, 0.0);
    dist.tail_mass = (1.0 - dist.retained_mass()).max(0.0);
    Ok(dist)
}

/// `P(1 | n)`, computed from the log ratio so it stays accurate when either branch underflows.
pub fn conditional_excited(dist: &JointDistribution, n: usize) -> Result<f64> {
    dist.check_index(n)?;
    let (l0, l1) = (dist.ln_p0[n], dist.ln_p1[n]);
    let hi = l0.max(l1);
    if hi == f64::NEG_INFINITY || hi + (-(l0 - l1).abs()).exp().ln_1p() < LN_TINY {
        return Err(Error::UndefinedConditional { n, probability: dist.p0[n] + dist.p1[n] });
    }
    Ok(logistic(l1 - l0))
}

/// `P(n)`, the meter outcome marginal.
pub fn meter_marginal(dist: &JointDistribution, n: usize) -> Result<f64> {
    dist.check_index(n)?;
    Ok(dist.p0[n] + dist.p1[n])
}

/// `1 / (1 + e^{−z})`.
pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Scans `n ∈ [0, n_max]` for strict inversion `P(1,n) > P(0,n)`.
pub fn work_threshold_level(dist: &JointDistribution) -> ThresholdScan {
    let mut n_prime = None;
    let mut crossings = Vec::new();
    let mut prev = None;
    for n in 0..=dist.n_max {
        let (l0, l1) = (dist.ln_p0[n], dist.ln_p1[n]);
        if l0 == f64::NEG_INFINITY && l1 == f64::NEG_INFINITY {
            continue;
        }
        let inverted = l1 > l0;
        if inverted && n_prime.is_none() {
            n_prime = Some(n);
        }
        if let Some(p) = prev {
            if p != inverted {
                crossings.push(Crossing { n, upward: inverted });
            }
        }
        prev = Some(inverted);
    }
    ThresholdScan { n_prime, crossings }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;

    fn params(r: f64, de: f64, hw: f64, g: f64, phi: f64) -> EngineParams {
        EngineParams::with_phase(r, de, hw, g, phi).unwrap()
    }

    fn ln_factorial(n: usize) -> f64 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    }

    // Independent reference: Glauber's finite sum, valid at small indices.
    fn glauber_sum(n: usize, m: usize, x: f64) -> f64 {
        let alpha = x.sqrt();
        let mut amp = 0.0;
        for j in 0..=n.min(m) {
            let ln =
                0.5 * (ln_factorial(n) + ln_factorial(m)) - ln_factorial(j) - ln_factorial(n - j) - ln_factorial(m - j);
            let sign = if (m - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            amp += sign * ln.exp() * alpha.powi((n + m - 2 * j) as i32);
        }
        amp * amp * (-x).exp()
    }

    #[test]
    fn alpha_sq_examples() {
        assert_eq!(alpha_sq(&params(0.2, 4.0, 1.5, 0.4, 0.0)), 0.0);
        let p = params(0.2, 4.0, 1.5, 0.4, PI);
        assert!((alpha_sq(&p) - 2.0 * 0.4 / 1.5).abs() < 1e-15);
        let p = params(0.2, 4.0, 1.5, 0.4, PI / 2.0);
        assert!((alpha_sq(&p) - 0.266667).abs() < 5e-7);
    }

    #[test]
    fn displacement_identity_and_vacuum_row() {
        assert_eq!(displacement_prob(3, 3, 0.0), 1.0);
        assert_eq!(displacement_prob(3, 4, 0.0), 0.0);
        for n in 0..30 {
            let x: f64 = 2.7;
            let expect = (n as f64 * x.ln() - x - ln_factorial(n)).exp();
            assert!((displacement_prob(n, 0, x) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn displacement_matches_glauber_sum() {
        for &x in &[0.1, 0.5, 1.0, 3.0, 10.0] {
            for n in 0..12 {
                for m in 0..12 {
                    let a = displacement_prob(n, m, x);
                    let b = glauber_sum(n, m, x);
                    assert!((a - b).abs() < 1e-12, "n={n} m={m} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn displacement_rows_are_unitary() {
        for &x in &[0.1, 1.0, 10.0] {
            for m in 0..=50 {
                let total: f64 = (0..400).map(|n| displacement_prob(n, m, x)).sum();
                assert!((total - 1.0).abs() < 1e-10, "m={m} x={x}: {total}");
            }
        }
    }

    #[test]
    fn displacement_survives_extreme_arguments() {
        let v = displacement_prob(1_000_000, 999_000, 1e6);
        assert!(v.is_finite() && (0.0..=1.0).contains(&v));
        let v = displacement_prob(15_000, 2_000, 1e4);
        assert!(v.is_finite() && (0.0..=1.0).contains(&v));
        let total: f64 = (8_000..12_500).map(|n| displacement_prob(n, 3, 1e4)).sum();
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    #[test]
    fn zero_time_is_product_of_thermal_states() {
        let p = params(0.3, 1.0, 0.1, 1.0, 0.0);
        let d = joint_distribution(&p, DEFAULT_TOL).unwrap();
        let pops = d.populations();
        let q = p.meter_ratio();
        for n in 0..50 {
            let w = (1.0 - q) * q.powi(n as i32);
            assert!((d.p_joint(0, n) - pops.a * w).abs() < 1e-15);
            assert!((d.p_joint(1, n) - pops.b * w).abs() < 1e-15);
            assert!((conditional_excited(&d, n).unwrap() - pops.b).abs() < 1e-15);
            assert!((meter_marginal(&d, n).unwrap() - w).abs() < 1e-14);
        }
        assert_eq!(work_threshold_level(&d).n_prime, None);
        assert!(work_threshold_level(&d).crossings.is_empty());
    }

    #[test]
    fn no_coupling_keeps_conditionals_flat() {
        let p = params(0.3, 2.0, 0.4, 0.0, 1.3);
        let d = joint_distribution(&p, DEFAULT_TOL).unwrap();
        for n in 0..=d.n_max().min(100) {
            assert!((conditional_excited(&d, n).unwrap() - d.populations().b).abs() < 1e-15);
        }
    }

    #[test]
    fn cold_meter_gives_poisson_excited_branch() {
        let p = params(1e-6, 4.0, 1.5, 0.4, PI / 2.0);
        let d = joint_distribution(&p, DEFAULT_TOL).unwrap();
        let b = d.populations().b;
        let x = d.alpha_sq();
        for n in 0..20 {
            let pois = b * (n as f64 * x.ln() - x - ln_factorial(n)).exp();
            assert!((d.p_joint(1, n) - pois).abs() < 1e-15);
        }
        assert_eq!(work_threshold_level(&d).n_prime, Some(1));
    }

    #[test]
    fn fig2_conditionals_cross_once() {
        let p = params(0.3, 1.0, 0.1, 1.0, PI / 2.0);
        let d = joint_distribution(&p, DEFAULT_TOL).unwrap();
        let scan = work_threshold_level(&d);
        let n_prime = scan.n_prime.expect("inversion expected");
        assert!(n_prime > 0);
        assert!(scan.is_monotone());
        for n in n_prime..n_prime + 20 {
            assert!(conditional_excited(&d, n).unwrap() > 0.5);
        }
        assert!(conditional_excited(&d, n_prime - 1).unwrap() <= 0.5);
    }

    #[test]
    fn matches_mode_sum() {
        for &(r, de, hw, g, phi) in &[
            (0.2, 4.0, 1.5, 0.4, PI / 2.0),
            (0.3, 1.0, 0.1, 1.0, PI / 2.0),
            (1.0, 0.5, 0.5, 2.0, 2.0),
            (0.05, 3.0, 0.2, 0.3, 0.7),
        ] {
            let p = params(r, de, hw, g, phi);
            let d = joint_distribution(&p, DEFAULT_TOL).unwrap();
            let m = joint_distribution_mode_sum(&p, d.n_max().min(150), DEFAULT_TOL).unwrap();
            for n in 0..=m.n_max() {
                assert!((d.p_joint(1, n) - m.p_joint(1, n)).abs() < 1e-13, "n={n}");
                assert!((d.p_joint(0, n) - m.p_joint(0, n)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn normalisation_and_marginals() {
        let p = params(0.2, 4.0, 1.5, 0.4, PI / 2.0);
        let d = joint_distribution(&p, DEFAULT_TOL).unwrap();
        assert!((d.retained_mass() + d.tail_mass() - 1.0).abs() < 1e-12);
        let pops = d.populations();
        assert!((d.p0().iter().sum::<f64>() - pops.a).abs() <= DEFAULT_TOL);
        assert!((d.p1().iter().sum::<f64>() - pops.b).abs() <= DEFAULT_TOL);
    }

    #[test]
    fn errors() {
        let p = params(0.2, 4.0, 1.5, 0.4, PI / 2.0);
        assert!(matches!(joint_distribution(&p, 0.0), Err(Error::Validation { field: "tol", .. })));
        assert!(matches!(joint_distribution(&p, 1e-3), Err(Error::Validation { .. })));
        let d = joint_distribution(&p, DEFAULT_TOL).unwrap();
        assert!(matches!(conditional_excited(&d, d.n_max() + 1), Err(Error::IndexOutOfRange { .. })));
        let huge = params(0.2, 4.0, 1.5, 1e12, PI);
        assert!(matches!(joint_distribution(&huge, DEFAULT_TOL), Err(Error::TruncationCap { .. })));
        let cold = params(1e-4, 4.0, 1.0, 0.0, 1.0);
        let d = joint_distribution(&cold, DEFAULT_TOL).unwrap();
        let deep = (0..=d.n_max()).find(|&n| d.p_joint(0, n) + d.p_joint(1, n) < 1e-300);
        if let Some(n) = deep {
            assert!(matches!(conditional_excited(&d, n), Err(Error::UndefinedConditional { .. })));
        }
    }

    #[test]
    fn strong_displacement_is_normalised() {
        let p = params(0.5, 1.0, 0.01, 40.0, PI);
        let d = joint_distribution(&p, DEFAULT_TOL).unwrap();
        assert!(d.alpha_sq() > 7000.0);
        assert!((d.retained_mass() + d.tail_mass() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn period_two_pi(
            lr in -4.0f64..0.0, lde in -3.0f64..2.0, lhw in -1.0f64..1.0,
            lg in -3.0f64..1.0, c in 0.0f64..1.0,
        ) {
            let phi = 2.0 * PI * c;
            let p = params(10f64.powf(lr), 10f64.powf(lde), 10f64.powf(lhw), 10f64.powf(lg), phi);
            let q = p.set_phase(phi + 2.0 * PI).unwrap();
            let (d1, d2) = (joint_distribution(&p, DEFAULT_TOL), joint_distribution(&q, DEFAULT_TOL));
            if let (Ok(d1), Ok(d2)) = (d1, d2) {
                for n in 0..=d1.n_max().min(d2.n_max()) {
                    prop_assert!((d1.p_joint(1, n) - d2.p_joint(1, n)).abs() < 1e-12);
                    prop_assert!((d1.p_joint(0, n) - d2.p_joint(0, n)).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn displacement_symmetric(n in 0usize..200, m in 0usize..200, lx in -2.0f64..3.0) {
            let x = 10f64.powf(lx);
            let (a, b) = (displacement_prob(n, m, x), displacement_prob(m, n, x));
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
