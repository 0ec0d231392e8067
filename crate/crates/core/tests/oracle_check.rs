//! The main pipeline against the independent brute-force oracle.

mod common;

use num_complex::Complex64;
use postfid::fidelity::fidelity_report;
use postfid::gates::{build_ns, NsGateSpec};

fn equal_amplitude() -> Complex64 {
    Complex64::new(1.0 / 3.0f64.sqrt(), 0.0)
}

#[test]
fn ns_reports_match_oracle_across_efficiencies() {
    let v = equal_amplitude();
    let gate = build_ns(&NsGateSpec::equal_amplitudes()).unwrap();
    for eta in [0.15, 0.5, 0.7, 0.8, 1.0] {
        let report = fidelity_report(
            &gate.circuit,
            &gate.input,
            &gate.desired,
            &gate.correct_counts,
            eta,
        )
        .unwrap();
        let oracle = common::ns_oracle(v, v, v, eta);
        assert!(
            (report.click_probability - oracle.click_probability).abs() < 1e-12,
            "eta={eta}: click {} vs {}",
            report.click_probability,
            oracle.click_probability
        );
        assert!(
            (report.f_r - oracle.f_r).abs() < 1e-12,
            "eta={eta}: F_r {} vs {}",
            report.f_r,
            oracle.f_r
        );
        assert!(
            (report.f_c - oracle.f_c).abs() < 1e-12,
            "eta={eta}: F_c {} vs {}",
            report.f_c,
            oracle.f_c
        );
        assert!(
            (report.f_o - oracle.f_o).abs() < 1e-12,
            "eta={eta}: F_o {} vs {}",
            report.f_o,
            oracle.f_o
        );
    }
}

#[test]
fn ns_oracle_matches_on_skewed_amplitudes() {
    let spec = NsGateSpec::from_reals(0.2, 0.5, 0.9).unwrap();
    let gate = build_ns(&spec).unwrap();
    for eta in [0.4, 0.9] {
        let report = fidelity_report(
            &gate.circuit,
            &gate.input,
            &gate.desired,
            &gate.correct_counts,
            eta,
        )
        .unwrap();
        let oracle = common::ns_oracle(spec.alpha, spec.beta, spec.gamma, eta);
        assert!((report.f_r - oracle.f_r).abs() < 1e-12, "eta={eta}");
        assert!((report.f_c - oracle.f_c).abs() < 1e-12, "eta={eta}");
        assert!((report.f_o - oracle.f_o).abs() < 1e-12, "eta={eta}");
        assert!((report.click_probability - oracle.click_probability).abs() < 1e-12);
    }
}

#[test]
fn cs_composition_sides_match_oracle() {
    for eta in [0.3, 0.6, 0.9] {
        let check = postfid::gates::cs_composition_check(eta).unwrap();
        let cs_oracle = common::cs_oracle_11(eta);
        assert!(
            (check.f_r_cs - cs_oracle.f_r).abs() < 1e-12,
            "eta={eta}: CS side {} vs oracle {}",
            check.f_r_cs,
            cs_oracle.f_r
        );
        let h = Complex64::new(1.0 / common::SQRT2, 0.0);
        let ns_oracle = common::ns_oracle(h, Complex64::ZERO, h, eta);
        assert!(
            (check.f_r_ns_squared - ns_oracle.f_r * ns_oracle.f_r).abs() < 1e-12,
            "eta={eta}: NS^2 side {} vs oracle {}",
            check.f_r_ns_squared,
            ns_oracle.f_r * ns_oracle.f_r
        );
    }
}

/// Prints the reference numbers frozen into the acceptance suite.
/// Run with `--nocapture` to regenerate them.
#[test]
fn print_golden_values() {
    let v = equal_amplitude();
    let perfect = common::ns_oracle(v, v, v, 1.0);
    println!("golden p_c (perfect, equal amplitudes) = {:.15}", perfect.p_click_perfect);
    let half = common::ns_oracle(v, v, v, 0.5);
    println!("golden eta=0.5 click_probability = {:.15}", half.click_probability);
    println!("golden eta=0.5 F_r = {:.15}", half.f_r);
    println!("golden eta=0.5 F_c = {:.15}", half.f_c);
    println!("golden eta=0.5 F_o = {:.15}", half.f_o);
    for eta in [0.3, 0.6, 0.9] {
        let cs = common::cs_oracle_11(eta);
        let h = Complex64::new(1.0 / common::SQRT2, 0.0);
        let ns = common::ns_oracle(h, Complex64::ZERO, h, eta);
        println!(
            "eta={eta}: F_r(CS) = {:.15}, F_r(NS)^2 = {:.15}, diff = {:.3e}",
            cs.f_r,
            ns.f_r * ns.f_r,
            (cs.f_r - ns.f_r * ns.f_r).abs()
        );
    }
}
