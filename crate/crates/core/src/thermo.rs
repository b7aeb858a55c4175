//! Per-cycle energetics and information gain.

use serde::Serialize;

use crate::displaced_fock::{
    joint_distribution, logistic, one_minus_cos, work_threshold_level, Crossing, JointDistribution,
};
use crate::error::{Error, Result};
use crate::params::{phase, softplus, EngineParams, TlsPopulations};

/// Energetics of one engine cycle at a single parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermoReport {
    pub w_meas: f64,
    pub w_ext: f64,
    pub w_net: f64,
    /// Information gain in nats.
    pub info: f64,
    /// Entropy of the initial system state in nats.
    pub s0: f64,
    /// Outcome-averaged conditional entropy after readout, in nats.
    pub s_tm: f64,
    pub n_prime: Option<usize>,
    pub crossings: Vec<Crossing>,
    pub tail_mass: f64,
    pub n_max: usize,
    pub alpha_sq: f64,
}

/// `W_meas = b g_eff² (1 − cos φ)`.
pub fn measurement_work(params: &EngineParams) -> f64 {
    let pops = TlsPopulations::at(params.delta_e());
    pops.b * params.g_eff_sq() * one_minus_cos(phase(params))
}

/// Outcome-averaged ergotropy: `ΔE Σ_n max(P(1,n) − P(0,n), 0)`.
pub fn extracted_work(dist: &JointDistribution) -> f64 {
    let sum: f64 = dist
        .ln_p0()
        .iter()
        .zip(dist.ln_p1())
        .zip(dist.p1())
        .filter(|((l0, l1), _)| l1 > l0)
        .map(|((l0, l1), p1)| -p1 * (l0 - l1).exp_m1())
        .sum();
    dist.params().delta_e() * sum
}

/// Binary entropy `h(a, b)` of the initial system state, in nats.
pub fn initial_entropy(delta_e: f64) -> f64 {
    let p = TlsPopulations::at(delta_e);
    let (la, lb) = (TlsPopulations::ln_a(delta_e), TlsPopulations::ln_b(delta_e));
    -xlogy(p.a, la) - xlogy(p.b, lb)
}

fn xlogy(x: f64, ly: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * ly
    }
}

/// `Σ_n P(n) h(P(1|n))`.
pub fn conditional_entropy(dist: &JointDistribution) -> f64 {
    dist.ln_p0()
        .iter()
        .zip(dist.ln_p1())
        .zip(dist.p0().iter().zip(dist.p1()))
        .map(|((&l0, &l1), (&p0, &p1))| {
            if p0 == 0.0 && p1 == 0.0 {
                return 0.0;
            }
            let z = l0 - l1;
            // P(n)·c_i·ln c_i = P(i,n)·ln c_i
            xlogy(p0, -softplus(-z)) + xlogy(p1, -softplus(z))
        })
        .map(|v| -v)
        .sum()
}

/// `I = S(0) − S(t_m)`, evaluated as the mutual information
/// `Σ_n [P(0,n) ln(P(0|n)/a) + P(1,n) ln(P(1|n)/b)]` so small values keep
/// their relative accuracy.
pub fn information_gain(dist: &JointDistribution) -> f64 {
    let d = dist.params().delta_e();
    let sum: f64 = dist
        .ln_p0()
        .iter()
        .zip(dist.ln_p1())
        .zip(dist.p0().iter().zip(dist.p1()))
        .map(|((&l0, &l1), (&p0, &p1))| {
            if p0 == 0.0 && p1 == 0.0 {
                return 0.0;
            }
            let z = l0 - l1;
            let (ln_c0_a, ln_c1_b) = if (z - d).abs() < 1.0 {
                ((logistic(-z) * (z - d).exp_m1()).ln_1p(), (logistic(z) * (d - z).exp_m1()).ln_1p())
            } else {
                (softplus(-d) - softplus(-z), softplus(d) - softplus(z))
            };
            xlogy(p0, ln_c0_a) + xlogy(p1, ln_c1_b)
        })
        .sum();
    sum
}

/// Free-energy bound `T_S I` on the extracted work.
pub fn free_energy_bound(dist: &JointDistribution) -> f64 {
    information_gain(dist)
}

/// Thermal work `T_S I − W_ext`.
pub fn thermal_work(dist: &JointDistribution) -> f64 {
    information_gain(dist) - extracted_work(dist)
}

/// Temperature of the passive state with conditional excited population `p1`.
pub fn passive_temperature(p1: f64, params: &EngineParams) -> Result<f64> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::Domain {
            what: "passive_temperature",
            reason: format!("conditional population {p1} outside (0, 1)"),
        });
    }
    if p1 == 0.5 {
        return Err(Error::InfiniteTemperature);
    }
    let (hi, lo) = if p1 > 0.5 { (p1, 1.0 - p1) } else { (1.0 - p1, p1) };
    Ok(params.delta_e() / (hi / lo).ln())
}

/// Assembles the cycle energetics from an existing joint table.
pub fn thermo_report_from(dist: &JointDistribution) -> ThermoReport {
    let params = dist.params();
    let w_meas = measurement_work(params);
    let w_ext = extracted_work(dist);
    let info = information_gain(dist);
    let s0 = initial_entropy(params.delta_e());
    let scan = work_threshold_level(dist);
    ThermoReport {
        w_meas,
        w_ext,
        w_net: w_ext - w_meas,
        info,
        s0,
        s_tm: conditional_entropy(dist),
        n_prime: scan.n_prime,
        crossings: scan.crossings,
        tail_mass: dist.tail_mass(),
        n_max: dist.n_max(),
        alpha_sq: dist.alpha_sq(),
    }
}

pub fn thermo_report(params: &EngineParams, tol: f64) -> Result<ThermoReport> {
    Ok(thermo_report_from(&joint_distribution(params, tol)?))
}

/// `W_net = W_ext − W_meas`.
pub fn net_work(params: &EngineParams, tol: f64) -> Result<f64> {
    Ok(thermo_report(params, tol)?.w_net)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;
    use crate::displaced_fock::{conditional_excited, DEFAULT_TOL};

    fn params(r: f64, de: f64, hw: f64, g: f64, phi: f64) -> EngineParams {
        EngineParams::with_phase(r, de, hw, g, phi).unwrap()
    }

    fn report(p: &EngineParams) -> ThermoReport {
        thermo_report(p, DEFAULT_TOL).unwrap()
    }

    // Straight textbook evaluation, used as an independent reference.
    fn naive_info(dist: &JointDistribution) -> f64 {
        let h = |c: f64| {
            let f = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
            f(c) + f(1.0 - c)
        };
        let pops = dist.populations();
        let s_tm: f64 = (0..=dist.n_max())
            .map(|n| {
                let (p0, p1) = (dist.p_joint(0, n), dist.p_joint(1, n));
                if p0 + p1 == 0.0 {
                    0.0
                } else {
                    (p0 + p1) * h(p1 / (p0 + p1))
                }
            })
            .sum();
        h(pops.b) - s_tm
    }

    #[test]
    fn measurement_work_examples() {
        assert_eq!(measurement_work(&params(0.2, 4.0, 1.5, 0.4, 0.0)), 0.0);
        let p = params(0.2, 4.0, 1.5, 0.4, PI);
        let b = TlsPopulations::at(4.0).b;
        assert!((measurement_work(&p) - 2.0 * b * 0.4).abs() < 1e-16);
        let sym = params(0.2, 4.0, 1.5, 0.4, 2.0 * PI - 1.1);
        assert!((measurement_work(&params(0.2, 4.0, 1.5, 0.4, 1.1)) - measurement_work(&sym)).abs() < 1e-15);
    }

    #[test]
    fn zero_time_is_idle() {
        let r = report(&params(0.2, 4.0, 1.5, 0.4, 0.0));
        assert_eq!((r.w_meas, r.w_ext, r.w_net), (0.0, 0.0, 0.0));
        assert!(r.info.abs() < 1e-15);
        assert!((r.s0 - r.s_tm).abs() < 1e-14);
        assert_eq!(r.n_prime, None);
    }

    #[test]
    fn no_coupling_gains_nothing() {
        let r = report(&params(0.2, 4.0, 1.5, 0.0, 1.0));
        assert!(r.info.abs() < 1e-15);
        assert_eq!(r.w_ext, 0.0);
    }

    #[test]
    fn cold_meter_extracted_work() {
        let p = params(1e-6, 4.0, 1.5, 0.4, PI / 2.0);
        let r = report(&p);
        let b = TlsPopulations::at(4.0).b;
        let expect = 4.0 * b * (1.0 - (-r.alpha_sq).exp());
        assert!((r.w_ext - expect).abs() < 1e-14 * expect.max(1.0));
        assert_eq!(r.n_prime, Some(1));
    }

    #[test]
    fn info_matches_naive_entropy_difference() {
        for &(rt, de, hw, g, phi) in &[
            (0.2, 4.0, 1.5, 0.4, PI / 2.0),
            (0.3, 1.0, 0.1, 1.0, PI / 2.0),
            (1.0, 0.3, 2.0, 5.0, 2.5),
            (0.01, 10.0, 0.5, 3.0, 1.0),
        ] {
            let p = params(rt, de, hw, g, phi);
            let d = joint_distribution(&p, DEFAULT_TOL).unwrap();
            let r = thermo_report_from(&d);
            assert!((r.info - naive_info(&d)).abs() < 1e-12);
            assert!((r.info - (r.s0 - r.s_tm)).abs() < 1e-12);
            assert!(r.w_ext <= r.info + 1e-12);
        }
    }

    #[test]
    fn passive_temperature_branches() {
        let p = params(0.2, 4.0, 1.5, 0.4, 1.0);
        let b = TlsPopulations::at(4.0).b;
        assert!((passive_temperature(b, &p).unwrap() - 1.0).abs() < 1e-12);
        assert!(passive_temperature(1e-300, &p).unwrap() < 0.01);
        let t = 4.0 / (0.6f64 / 0.4).ln();
        assert!((t - 9.8653).abs() < 1e-4);
        assert!((passive_temperature(0.6, &p).unwrap() - t).abs() < 1e-12);
        assert!((passive_temperature(0.4, &p).unwrap() - t).abs() < 1e-12);
        assert!(matches!(passive_temperature(0.5, &p), Err(Error::InfiniteTemperature)));
        assert!(passive_temperature(1.0, &p).is_err());
    }

    #[test]
    fn passive_temperature_of_conditionals() {
        let p = params(0.3, 1.0, 0.1, 1.0, PI / 2.0);
        let d = joint_distribution(&p, DEFAULT_TOL).unwrap();
        let t = passive_temperature(conditional_excited(&d, 0).unwrap(), &p).unwrap();
        assert!(t > 0.0 && t < 1.0);
    }

    #[test]
    fn thermal_work_identity() {
        let p = params(0.2, 4.0, 1.5, 0.4, PI / 2.0);
        let d = joint_distribution(&p, DEFAULT_TOL).unwrap();
        assert!((thermal_work(&d) + extracted_work(&d) - information_gain(&d)).abs() < 1e-15);
        assert!(thermal_work(&d) >= 0.0);
        let d = joint_distribution(&p.set_tau(0.0).unwrap(), DEFAULT_TOL).unwrap();
        assert!(thermal_work(&d).abs() < 1e-15);
        assert_eq!(free_energy_bound(&d), information_gain(&d));
    }

    #[test]
    fn fig4_net_work_goes_negative() {
        let base = params(0.3, 1.0, 0.1, 1.0, 0.0);
        let negative = (1..200)
            .map(|k| base.set_phase(2.0 * PI * k as f64 / 200.0).unwrap())
            .any(|p| net_work(&p, DEFAULT_TOL).unwrap() < 0.0);
        assert!(negative);
    }

    #[test]
    fn cold_asymptote_approaches_initial_entropy() {
        let p = params(1e-6, 2.0, 1.0, 30.0, PI);
        let r = report(&p);
        let b = TlsPopulations::at(2.0).b;
        assert!((r.info - r.s0).abs() < 1e-10);
        assert!((r.w_ext - 2.0 * b).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn bound_and_reset(
            lr in -4.0f64..0.0, lde in -3.0f64..2.0, lhw in -3.0f64..2.0,
            lg in -6.0f64..2.0, c in 0.0f64..1.0, k in 1u32..3,
        ) {
            let p = params(10f64.powf(lr), 10f64.powf(lde), 10f64.powf(lhw), 10f64.powf(lg), 2.0 * PI * c);
            if let Ok(r) = thermo_report(&p, DEFAULT_TOL) {
                prop_assert!(r.info >= -1e-12);
                prop_assert!(r.w_ext <= r.info + 1e-12);
                prop_assert!(r.w_meas >= 0.0 && r.w_ext >= 0.0);
                prop_assert_eq!(r.w_net, r.w_ext - r.w_meas);
            }
            let reset = p.set_phase(2.0 * PI * k as f64).unwrap();
            if let Ok(r) = thermo_report(&reset, DEFAULT_TOL) {
                prop_assert!(r.w_meas.abs() < 1e-12 && r.w_ext.abs() < 1e-12 && r.info.abs() < 1e-12);
            }
        }

        #[test]
        fn mirror_symmetry(lg in -2.0f64..1.0, phi in 0.01f64..3.1) {
            let p = params(0.2, 4.0, 1.5, 10f64.powf(lg), phi);
            let m = p.set_phase(2.0 * PI - phi).unwrap();
            let (a, b) = (report(&p), report(&m));
            prop_assert!((a.w_meas - b.w_meas).abs() < 1e-12);
            prop_assert!((a.w_ext - b.w_ext).abs() < 1e-12);
            prop_assert!((a.info - b.info).abs() < 1e-12);
        }
    }
}
