mod common;

use boxsd_core::analytic::{
    a_value, asymptotic_visit_prob, complexity_lower_bound, component_cdf_linf,
    component_cdf_ltilde_bounds, component_cdf_ltilde_exact, expected_nodes,
    expected_nodes_with_cap, log_scaling_term, pep_bounds, radius_l2, radius_linf, radius_ltilde,
    rho_c, scaling_exponent, sum_representation_mgf, sum_representation_sampler, tpb_report,
    LevelValue, PrefixState,
};
use boxsd_core::decoder::NormKind;
use boxsd_core::model::{make_constellation, snr_db_to_sigma2, ComponentClass, Rng, SystemConfig};
use boxsd_core::montecarlo::{ks_critical_1pct, ks_statistic};
use boxsd_core::Error;
use common::{brute_force_expected, gamma, linf_cdf_oracle, ltilde_cdf_oracle, qam4, rel_err};

fn cfg(m: usize, n: usize, snr_db: f64) -> SystemConfig {
    SystemConfig::from_snr_db(m, n, snr_db, qam4()).unwrap()
}

fn ln_fact(n: usize) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

#[test]
fn dp_matches_pair_enumeration() {
    for (m, n) in [(1, 1), (2, 2), (3, 3), (2, 3), (1, 3)] {
        for snr in [5.0, 15.0] {
            for eps in [1e-1, 1e-2, 1e-5] {
                let c = cfg(m, n, snr);
                for norm in NormKind::ALL {
                    let rep = expected_nodes(norm, &c, eps).unwrap();
                    let c2 = norm.radius2(eps, n, c.sigma2).unwrap();
                    let brute = brute_force_expected(norm, &c, c2);
                    for (v, (lo, hi)) in rep.per_level.iter().zip(&brute) {
                        assert!(
                            rel_err(v.lower(), *lo) < 1e-10,
                            "{m}x{n} {norm:?} {} vs {lo}",
                            v.lower()
                        );
                        assert!(
                            rel_err(v.upper(), *hi) < 1e-10,
                            "{m}x{n} {norm:?} {} vs {hi}",
                            v.upper()
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn bpsk_single_antenna_expectation() {
    let c = SystemConfig::new(1, 1, 0.3, make_constellation("bpsk").unwrap()).unwrap();
    let eps = 0.05;
    let c2 = radius_l2(eps, 1, 0.3).unwrap();
    let want = gamma(1.0, c2 / 0.3) + gamma(1.0, c2 / (4.0 + 0.3));
    let got = expected_nodes(NormKind::L2, &c, eps).unwrap().total.lower();
    assert!(rel_err(got, want) < 1e-13);
}

#[test]
fn report_invariants() {
    for (m, n) in [(4, 4), (4, 6), (6, 6), (8, 8)] {
        for eps in [0.1, 1e-3, 1e-6] {
            for norm in NormKind::ALL {
                let rep = expected_nodes(norm, &cfg(m, n, 12.0), eps).unwrap();
                let mut lo = 0.0;
                let mut hi = 0.0;
                for (k, v) in rep.per_level.iter().enumerate() {
                    assert!(v.lower() >= 0.0 && v.lower() <= v.upper());
                    assert!(v.upper() <= 4f64.powi(k as i32 + 1) * (1.0 + 1e-12));
                    lo += v.lower();
                    hi += v.upper();
                }
                assert!(rel_err(rep.total.lower(), lo) < 1e-14);
                assert!(rel_err(rep.total.upper(), hi) < 1e-14);
                assert_eq!(rep.per_level.len(), m);
                assert_eq!(norm == NormKind::LtildeInf, rep.total.exact().is_none());
            }
        }
    }
}

#[test]
fn sixteen_qam_eight_antennas_is_tractable() {
    let c = SystemConfig::from_snr_db(8, 8, 20.0, make_constellation("16qam").unwrap()).unwrap();
    let rep = expected_nodes(NormKind::Linf, &c, 1e-2).unwrap();
    assert!(rep.total.lower() > 8.0 && rep.total.lower() < 16f64.powi(8));
}

#[test]
fn state_cap_guard() {
    assert!(matches!(
        expected_nodes_with_cap(NormKind::L2, &cfg(4, 4, 10.0), 0.01, 3),
        Err(Error::StateOverflow(3))
    ));
}

#[test]
fn radii_closed_forms() {
    for &s2 in &[0.01, 1.0] {
        for &eps in &[0.5, 1e-3, 1e-10] {
            let want = -s2 * f64::ln(eps);
            assert!(rel_err(radius_l2(eps, 1, s2).unwrap(), want) < 1e-12);
            assert!(rel_err(radius_linf(eps, 1, s2).unwrap(), want) < 1e-12);
        }
    }
    for n in [1, 4, 16] {
        let mut last = 0.0;
        for e in 1..12 {
            let c2 = radius_l2(10f64.powi(-e), n, 1.0).unwrap();
            assert!(c2 > last);
            last = c2;
        }
    }
    assert!(radius_l2(0.0, 2, 1.0).is_err());
    assert!(radius_linf(1.0, 2, 1.0).is_err());
    assert!(radius_ltilde(-0.1, 2, 1.0).is_err());
}

#[test]
fn radii_defining_identities() {
    for n in [1, 3, 8, 32] {
        for &eps in &[0.3, 1e-2, 1e-6] {
            let s2 = 0.2;
            let c2 = radius_l2(eps, n, s2).unwrap();
            assert!((gamma(n as f64, c2 / s2) - (1.0 - eps)).abs() < 1e-12);
            let ci = radius_linf(eps, n, s2).unwrap();
            assert!(((1.0 - (-ci / s2).exp()).powi(n as i32) - (1.0 - eps)).abs() < 1e-12);
            let ct = radius_ltilde(eps, n, s2).unwrap();
            assert!((gamma(0.5, ct / s2).powi(2 * n as i32) - (1.0 - eps)).abs() < 1e-12);
            assert!(ct >= ci / 2.0 && ct <= ci, "n={n} eps={eps}");
        }
    }
}

#[test]
fn radii_large_n_behavior() {
    let ratio = radius_l2(0.1, 256, 1.0).unwrap() / 256.0;
    assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
    // normal approximation N + z√N with z the upper 1% point
    let eps = 1e-2;
    let z = 2.326_347_874_040_841;
    let c2 = radius_l2(eps, 256, 1.0).unwrap();
    assert!((c2 - (256.0 + z * 16.0)).abs() < 0.01 * 256.0, "{c2}");
    // C∞²/σ² − log N tends to −log(−log(1 − ε))
    let lim = -(-(1.0f64 - eps).ln()).ln();
    let gap = |n: usize| radius_linf(eps, n, 1.0).unwrap() - (n as f64).ln();
    assert!((gap(256) - lim).abs() < 1e-2);
    assert!((gap(4096) - lim).abs() < (gap(256) - lim).abs());
    // so C∞²/(σ² log N) decreases towards 1
    let r = |n: usize| radius_linf(eps, n, 1.0).unwrap() / (n as f64).ln();
    assert!(r(1 << 20) < r(1 << 10) && r(1 << 10) < r(256));
}

#[test]
fn linf_cdf_special_cases() {
    let s2 = 0.1;
    let c2 = 0.4;
    let zero = PrefixState::new(0, 0, 1).unwrap();
    for (m, l) in [(1, 0), (3, 2)] {
        let got = component_cdf_linf(zero, m, l, c2, s2, 4).unwrap();
        assert!(rel_err(got, gamma(1.0, c2 / s2)) < 1e-14);
    }
    let first = PrefixState::new(0, 6, 1).unwrap();
    let got = component_cdf_linf(first, 1, 0, c2, s2, 3).unwrap();
    assert!(rel_err(got, gamma(1.0, c2 / (2.0 + s2))) < 1e-14);
    let st = PrefixState::new(0, 8, 5).unwrap();
    for (m, l) in [(1, 1), (2, 0), (4, 3)] {
        let got = component_cdf_linf(st, m, l, c2, s2, 4).unwrap();
        let want = linf_cdf_oracle(1.6 * 0.0, 1.6, m, l, c2, s2, 4);
        assert!(rel_err(got, want) < 1e-12);
    }
    assert!(component_cdf_linf(st, 0, 0, c2, s2, 4).is_err());
    assert!(PrefixState::new(3, 2, 1).is_err());
}

#[test]
fn ltilde_exact_matches_direct_series() {
    let s2 = 0.05;
    for &(qp, qc) in &[(0u64, 0u64), (0, 2), (2, 4), (4, 4), (6, 14)] {
        let st = PrefixState::new(qp, qc, 1).unwrap();
        let class = if qp == qc {
            ComponentClass::Zero
        } else {
            ComponentClass::PurelyReal
        };
        for (m, l) in [(1, 0), (2, 1), (4, 0), (6, 2)] {
            for c2 in [0.01, 0.2, 1.0, 4.0] {
                let got = component_cdf_ltilde_exact(st, m, l, c2, s2, 4, class).unwrap();
                let want = ltilde_cdf_oracle(qp as f64, qc as f64, m, l, c2, s2, 4);
                assert!(
                    (got - want).abs() < 1e-11,
                    "{qp} {qc} m={m} l={l} c2={c2}: {got} vs {want}"
                );
                let imag =
                    component_cdf_ltilde_exact(st, m, l, c2, s2, 4, ComponentClass::PurelyImag);
                if class == ComponentClass::PurelyReal {
                    assert_eq!(imag.unwrap(), got);
                }
            }
        }
    }
}

#[test]
fn ltilde_exact_zero_prefix() {
    let st = PrefixState::new(0, 0, 1).unwrap();
    for c2 in [0.01, 0.3, 2.0] {
        let got = component_cdf_ltilde_exact(st, 2, 1, c2, 0.2, 2, ComponentClass::Zero).unwrap();
        assert!(rel_err(got, gamma(0.5, c2 / 0.2).powi(2)) < 1e-14);
    }
}

#[test]
fn ltilde_exact_rejects_general_components() {
    let st = PrefixState::new(0, 4, 1).unwrap();
    assert!(matches!(
        component_cdf_ltilde_exact(st, 1, 0, 1.0, 0.1, 2, ComponentClass::General),
        Err(Error::Contract(_))
    ));
    assert!(matches!(
        component_cdf_ltilde_exact(st, 1, 0, 1.0, 0.1, 2, ComponentClass::Zero),
        Err(Error::Contract(_))
    ));
}

#[test]
fn ltilde_exact_is_a_cdf_in_radius() {
    let st = PrefixState::new(2, 4, 1).unwrap();
    let mut last = 0.0;
    for i in 0..200 {
        let c2 = 0.01 * 1.05f64.powi(i);
        let v =
            component_cdf_ltilde_exact(st, 3, 1, c2, 0.1, 4, ComponentClass::PurelyReal).unwrap();
        assert!(v + 1e-15 >= last && v <= 1.0);
        last = v;
    }
    assert!(last > 1.0 - 1e-9);
}

#[test]
fn ltilde_bounds_sandwich_exact_values() {
    let s2 = 0.1;
    for &(qp, qc) in &[(0u64, 0u64), (0, 2), (2, 4), (4, 4)] {
        let st = PrefixState::new(qp, qc, 1).unwrap();
        let class = if qp == qc {
            ComponentClass::Zero
        } else {
            ComponentClass::PurelyReal
        };
        for (m, l) in [(1, 0), (3, 1)] {
            for c2 in [0.05, 0.5, 3.0] {
                let (lo, hi) = component_cdf_ltilde_bounds(st, m, l, c2, s2, 4).unwrap();
                let e = component_cdf_ltilde_exact(st, m, l, c2, s2, 4, class).unwrap();
                assert!(lo <= e + 1e-14 && e <= hi + 1e-14);
            }
        }
        let (lo, hi) = component_cdf_ltilde_bounds(st, 2, 0, 1e4, s2, 4).unwrap();
        assert!(lo > 1.0 - 1e-12 && hi > 1.0 - 1e-12);
    }
}

#[test]
fn lower_bound_examples() {
    let bpsk = make_constellation("bpsk").unwrap();
    let c = SystemConfig::new(1, 1, 0.5, bpsk).unwrap();
    let eps = 0.2;
    let want = (1.0 - eps) / (1.0 + 4.0 / 0.5);
    assert!(rel_err(complexity_lower_bound(&c, eps).unwrap(), want) < 1e-14);
    assert_eq!(complexity_lower_bound(&cfg(3, 3, 10.0), 1.0).unwrap(), 0.0);
    assert!(complexity_lower_bound(&cfg(2, 3, 10.0), 0.1).is_err());
}

#[test]
fn lower_bound_below_exact_totals() {
    for m in 2..=4 {
        for snr in [0.0, 5.0, 10.0, 15.0, 20.0, 25.0] {
            for eps in [0.5, 0.1, 1e-2, 1e-4, 1e-6] {
                let c = cfg(m, m, snr);
                let lb = complexity_lower_bound(&c, eps).unwrap();
                for norm in [NormKind::L2, NormKind::Linf] {
                    let t = expected_nodes(norm, &c, eps).unwrap().total.lower();
                    assert!(lb <= t, "{m} {snr} {eps} {norm:?}: {lb} > {t}");
                }
            }
        }
    }
}

#[test]
fn scaling_exponent_sign() {
    let (s2, b2) = (0.1, 4.0);
    for alpha in [0.1, 0.5, 1.0] {
        let g = scaling_exponent(alpha, alpha, s2, b2).unwrap();
        assert!(rel_err(g, -alpha * (1.0 + b2 * alpha / s2).ln()) < 1e-14 && g < 0.0);
    }
    // positive below α < 2σ²(√2 − 1)/B² with β = α/2
    let alpha = 0.9 * 2.0 * s2 * (2f64.sqrt() - 1.0) / b2;
    assert!(scaling_exponent(alpha, alpha / 2.0, s2, b2).unwrap() > 0.0);
    assert!(scaling_exponent(0.5, 0.6, s2, b2).is_err());
    assert!(scaling_exponent(1.5, 0.6, s2, b2).is_err());
}

#[test]
fn single_term_converges_to_exponent() {
    let (alpha, beta, s2, b2, eps) = (0.5, 0.25, 4.0, 4.0, 0.1);
    let g = scaling_exponent(alpha, beta, s2, b2).unwrap();
    assert!(g > 0.0);
    let err: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&m| log_scaling_term(m, alpha, beta, eps, s2, b2).unwrap() / m as f64 - g)
        .collect();
    for (i, &m) in [64.0, 128.0, 256.0].iter().enumerate() {
        assert!((err[i] * m).abs() < 1.0);
    }
    assert!(err[2].abs() < err[1].abs() && err[1].abs() < err[0].abs());
}

#[test]
fn tpb_reported_depths_for_six_antennas() {
    let c = cfg(6, 6, 15.0);
    assert_eq!(tpb_report(&c, 1e-2).unwrap().k_bar, 3);
    assert_eq!(tpb_report(&c, 1e-5).unwrap().k_bar, 2);
}

#[test]
fn tpb_report_consistency() {
    for (m, n) in [(4, 4), (6, 6), (4, 6), (8, 8)] {
        for eps in [0.5, 1e-2, 1e-6] {
            let c = cfg(m, n, 10.0);
            let r = tpb_report(&c, eps).unwrap();
            let l = n - m;
            assert!(r.rho_c >= 1.0 && r.rho_c <= (ln_fact(n) / n as f64).exp());
            assert!(rel_err(r.rho_c, rho_c(eps, n).unwrap()) < 1e-14);
            for (i, &a) in r.a_values.iter().enumerate() {
                let lo = (-ln_fact(i + 1 + l)).exp();
                assert!(a <= 1.0 + 1e-14 && a >= lo * (1.0 - 1e-12));
            }
            assert_eq!(
                r.k_bar_inst,
                (r.rho_c.floor() as i64 - l as i64).max(0) as usize
            );
            for (k, mb) in r.m_bar.iter().enumerate() {
                if let Some(v) = mb {
                    assert!(*v >= 1 && *v <= k + 1);
                }
            }
            if l == 0 {
                let cross = (1..=m)
                    .filter(|&k| r.volumes[k - 1].1 <= r.volumes[k - 1].0)
                    .max()
                    .unwrap_or(0);
                assert_eq!(cross, r.k_bar);
            }
        }
    }
}

#[test]
fn a_value_limits_and_monotonicity() {
    assert_eq!(a_value(2.5, 1).unwrap(), 1.0);
    for n in 1..=8 {
        assert!((a_value(1e-9, n).unwrap() - 1.0).abs() < 1e-6);
        let lim = (-ln_fact(n)).exp();
        assert!((a_value(1e9, n).unwrap() - lim).abs() < 1e-6);
        let mut last = f64::INFINITY;
        for i in 0..100 {
            let kappa = 1e-3 * 1.15f64.powi(i);
            let a = a_value(kappa, n).unwrap();
            assert!(a <= last * (1.0 + 1e-12));
            last = a;
        }
    }
    assert!(a_value(0.0, 2).is_err());
}

#[test]
fn rho_c_monotone_in_eps() {
    for n in [2, 4, 6, 8] {
        let mut last = 0.0;
        for i in 0..50 {
            let eps = 10f64.powf(-12.0 + 12.0 * i as f64 / 50.0);
            let r = rho_c(eps, n).unwrap();
            assert!(r >= last);
            last = r;
        }
    }
}

#[test]
fn zero_error_visit_probabilities_ordered() {
    for n in [2, 4, 6] {
        for eps in [0.1, 1e-3, 1e-6] {
            let ki = radius_linf(eps, n, 1.0).unwrap();
            let k2 = radius_l2(eps, n, 1.0).unwrap();
            for k in 1..=n {
                assert!(gamma(1.0, ki).powi(k as i32) <= gamma(k as f64, k2) + 1e-14);
            }
        }
    }
}

/// Exact probability that the l∞ decoder keeps an error prefix alive.
fn exact_linf_visit(norms: &[f64], l: usize, c2: f64, s2: f64, m_tx: usize) -> f64 {
    let mut v = gamma(1.0, c2 / s2).powi(l as i32);
    for m in 1..norms.len() {
        v *= linf_cdf_oracle(norms[m - 1], norms[m], m, l, c2, s2, m_tx);
    }
    v
}

#[test]
fn visit_probability_asymptotes() {
    // k = 3 error prefix with first error at level 2, M = 4, L = 1
    let (m_tx, l) = (4, 1);
    let norms = [0.0, 0.0, 2.0, 6.0];
    let n = m_tx + l;
    let eps = 1e-2;
    let ki = radius_linf(eps, n, 1.0).unwrap();
    let k2 = radius_l2(eps, n, 1.0).unwrap();
    let rho_ratio = k2 / ki;
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for db in [30.0, 40.0, 50.0, 60.0] {
        let s2 = snr_db_to_sigma2(db);
        let rho = 1.0 / s2;
        let exact_i = exact_linf_visit(&norms, l, ki * s2, s2, m_tx);
        let asym_i = asymptotic_visit_prob(NormKind::Linf, 3, l, 2, 6.0, ki, rho, m_tx).unwrap();
        let exact_2 = gamma((3 + l) as f64, k2 * s2 / (6.0 / m_tx as f64 + s2));
        let asym_2 = asymptotic_visit_prob(NormKind::L2, 3, l, 2, 6.0, k2, rho, m_tx).unwrap();
        let e = (
            (exact_i / asym_i - 1.0).abs(),
            (exact_2 / asym_2 - 1.0).abs(),
        );
        assert!(e.0 < prev.0 && e.1 < prev.1, "{db} dB: {e:?}");
        prev = e;
        let lhs = asym_i / asym_2 <= 1.0;
        let a = a_value(ki, 2 + l).unwrap();
        let rhs = a <= (4.0 * rho_ratio.ln() - ln_fact(4)).exp();
        assert_eq!(lhs, rhs);
    }
    assert!(prev.0 < 0.05 && prev.1 < 0.05);
    // k + L = 1 instantiation
    let v = asymptotic_visit_prob(NormKind::L2, 1, 0, 1, 2.0, 3.0, 100.0, 2).unwrap();
    assert!(rel_err(v, 3.0 / (100.0 * 2.0 / 2.0)) < 1e-14);
    assert!(asymptotic_visit_prob(NormKind::L2, 1, 0, 1, 0.0, 3.0, 100.0, 2).is_err());
}

#[test]
fn pep_bound_properties() {
    for n in 1..=16 {
        let b = pep_bounds(n, n, 2.0, 100.0).unwrap();
        assert!(b.beta <= 4.0 * ((n as f64).sqrt() + 1.0).powi(2) * (1.0 + 1e-12));
        assert!(b.beta <= 16.0 * n as f64);
        assert!(b.beta_tilde >= b.beta);
        for i in 0..40 {
            let rho = 10f64.powf(i as f64 / 5.0);
            let p = pep_bounds(n, n, 2.0, rho).unwrap();
            assert!(p.lb_ml <= p.ub_ml);
            assert!(p.ub_ml <= p.ub_inf && p.ub_inf <= p.ub_ltilde);
        }
        let (lo, hi) = (
            pep_bounds(n, n, 2.0, 1e4).unwrap(),
            pep_bounds(n, n, 2.0, 1e6).unwrap(),
        );
        for (a, b) in [
            (lo.ub_inf, hi.ub_inf),
            (lo.ub_ml, hi.ub_ml),
            (lo.lb_ml, hi.lb_ml),
        ] {
            let slope = (b.ln() - a.ln()) / (1e6f64.ln() - 1e4f64.ln());
            assert!(
                (slope + n as f64).abs() < 0.02 * n as f64,
                "n={n} slope={slope}"
            );
        }
    }
    assert!(pep_bounds(2, 2, 0.0, 10.0).is_err());
}

#[test]
fn sampler_pure_noise_is_exponential() {
    let st = PrefixState::new(4, 4, 1).unwrap();
    let mut rng = Rng::new(4);
    let s2 = 0.3;
    // with b_m = 0 only the σ² part survives
    let xs: Vec<f64> = (0..50_000)
        .map(|_| sum_representation_sampler(st, 3, 1, s2, 4, &mut rng))
        .map(|x| x * s2 / (1.0 + s2))
        .collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!((mean - s2).abs() < 0.01);
    let d = ks_statistic(&xs, |x| 1.0 - (-x / s2).exp());
    assert!(d < ks_critical_1pct(xs.len()));
}

#[test]
fn sampler_matches_component_cdf() {
    let mut rng = Rng::new(8);
    let s2 = 0.1;
    for &(qp, qc, m, l) in &[
        (0u64, 2u64, 1usize, 0usize),
        (2, 6, 2, 1),
        (4, 8, 3, 0),
        (0, 4, 2, 2),
    ] {
        let st = PrefixState::new(qp, qc, 1).unwrap();
        let xs: Vec<f64> = (0..50_000)
            .map(|_| sum_representation_sampler(st, m, l, s2, 4, &mut rng))
            .collect();
        let d = ks_statistic(&xs, |x| component_cdf_linf(st, m, l, x, s2, 4).unwrap());
        assert!(d < ks_critical_1pct(xs.len()), "{qp} {qc}: {d}");
    }
}

#[test]
fn sampler_mgf_at_minus_one() {
    let mut rng = Rng::new(15);
    let st = PrefixState::new(2, 6, 1).unwrap();
    let (m, l, s2, mt) = (2, 1, 0.2, 4);
    let n = 100_000;
    let vals: Vec<f64> = (0..n)
        .map(|_| (-sum_representation_sampler(st, m, l, s2, mt, &mut rng)).exp())
        .collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let want = sum_representation_mgf(st, m, l, s2, mt, -1.0);
    assert!(
        (mean - want).abs() < 3.0 * sd / (n as f64).sqrt(),
        "{mean} vs {want}"
    );
}

#[test]
fn mgf_product_telescopes() {
    let (l, s2, mt) = (2usize, 0.15f64, 4usize);
    let norms = [0u64, 2, 2, 6, 10];
    for &s in &[-3.0, -0.5, 0.4] {
        let mut prod = (1.0 - s2 * s).powi(-(l as i32));
        for m in 1..norms.len() {
            let st = PrefixState::new(norms[m - 1], norms[m], 1).unwrap();
            prod *= sum_representation_mgf(st, m, l, s2, mt, s);
        }
        let k = norms.len() - 1;
        let want = (1.0 - (10.0 / mt as f64 + s2) * s).powi(-((k + l) as i32));
        assert!(rel_err(prod, want) < 1e-12);
    }
}

#[test]
fn level_value_accessors() {
    let e = LevelValue::Exact(2.0);
    assert_eq!((e.lower(), e.upper(), e.exact()), (2.0, 2.0, Some(2.0)));
    let b = LevelValue::Bounds {
        lower: 1.0,
        upper: 3.0,
    };
    assert_eq!((b.lower(), b.upper(), b.exact()), (1.0, 3.0, None));
}
