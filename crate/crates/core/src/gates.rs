//! Concrete postselected circuits: the nonlinear sign-shift (NS) gate and
//! the control sign-shift (CS) gate built from two of them.
//!
//! # Frozen NS layout
//!
//! The NS gate maps `alpha|0> + beta|1> + gamma|2>` to
//! `alpha|0> + beta|1> - gamma|2>` on the signal mode whenever its two
//! counters read exactly `(1, 0)`.  The layout below is fixed
//! operationally: it is the two-beam-splitter arrangement that passes the
//! sign-flip requirement for every input triple, with both splitters
//! port-crossed so their quoted reflectivities are the physical `|r|^2`.
//!
//! ```text
//! sig ------[BS1]------[BS2]------>  output
//!             |          |
//! anc1 |1> ---+          |       ->  counter, correct reading 1
//! anc2 |0> --------------+       ->  counter, correct reading 0
//!
//! BS1: R = (3 - sqrt 2)/7,  crossed, grey side on anc1
//! BS2: R = 5 - 3 sqrt 2,    crossed, grey side on sig
//! ```
//!
//! The postselected amplitudes come out proportional to `(1, 1, -1)` with
//! common magnitude `sqrt(R1)`, so the success probability is
//! `R1 = (3 - sqrt 2)/7` for any normalized input.
//!
//! # CS gate
//!
//! Single-rail photon-number encoding on a control and a target mode: a
//! 50/50 splitter, one NS gate on each arm, and the inverse 50/50 splitter.
//! The correct result is both NS counters reading `(1, 0)`; any other
//! reading means an NS gate failed and the output is discarded.

use num_complex::Complex64;
use std::sync::Arc;

use ndarray::Array1;

use crate::channels::{BeamSplitterSpec, Circuit, Element, GreySide};
use crate::error::{Error, Result};
use crate::fidelity::{fidelity_report, FidelityReport};
use crate::fock::{ModeSystem, PureState};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Reflectivity of the splitter joining signal and the one-photon ancilla.
pub fn ns_reflectivity_first() -> f64 {
    (3.0 - SQRT2) / 7.0
}

/// Reflectivity of the splitter joining signal and the vacuum ancilla.
pub fn ns_reflectivity_second() -> f64 {
    5.0 - 3.0 * SQRT2
}

/// Probability of the correct `(1, 0)` reading under perfect detection;
/// input-independent because all three postselected amplitudes share one
/// magnitude.
pub fn ns_success_probability() -> f64 {
    ns_reflectivity_first()
}

/// Signal amplitudes for the NS gate.
#[derive(Debug, Clone)]
pub struct NsGateSpec {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

impl NsGateSpec {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr() + gamma.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm: norm.sqrt() });
        }
        Ok(NsGateSpec { alpha, beta, gamma })
    }

    /// Real amplitudes, normalized here.
    pub fn from_reals(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let norm = (alpha * alpha + beta * beta + gamma * gamma).sqrt();
        if norm <= 0.0 {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        NsGateSpec::new(
            Complex64::new(alpha / norm, 0.0),
            Complex64::new(beta / norm, 0.0),
            Complex64::new(gamma / norm, 0.0),
        )
    }

    /// The Fig.-5 operating point `alpha = beta = gamma = 1/sqrt 3`.
    pub fn equal_amplitudes() -> Self {
        let v = Complex64::new(1.0 / 3.0f64.sqrt(), 0.0);
        NsGateSpec {
            alpha: v,
            beta: v,
            gamma: v,
        }
    }
}

/// A built gate: circuit, prepared input, target output, and the counts
/// that declare success.
#[derive(Debug, Clone)]
pub struct GateSetup {
    pub circuit: Circuit,
    pub input: PureState,
    pub desired: PureState,
    pub correct_counts: Vec<usize>,
}

/// Assemble the NS gate for the given signal amplitudes.
pub fn build_ns(spec: &NsGateSpec) -> Result<GateSetup> {
    let system = ModeSystem::new(&["sig", "anc1", "anc2"], 3)?;
    let mut amps = Array1::zeros(system.dim());
    amps[system.index_of(&[0, 1, 0]).unwrap()] = spec.alpha;
    amps[system.index_of(&[1, 1, 0]).unwrap()] = spec.beta;
    amps[system.index_of(&[2, 1, 0]).unwrap()] = spec.gamma;
    let input = PureState::from_amplitudes(system.clone(), amps)?;

    let out_system = system.subsystem(&[0]);
    let mut desired_amps = Array1::zeros(out_system.dim());
    desired_amps[out_system.index_of(&[0]).unwrap()] = spec.alpha;
    desired_amps[out_system.index_of(&[1]).unwrap()] = spec.beta;
    desired_amps[out_system.index_of(&[2]).unwrap()] = -spec.gamma;
    let desired = PureState::from_amplitudes(out_system, desired_amps)?;

    let circuit = Circuit::new(
        system,
        vec![
            Element::BeamSplitter(BeamSplitterSpec::crossed(
                "sig",
                "anc1",
                ns_reflectivity_first(),
                GreySide::ModeB,
            )),
            Element::BeamSplitter(BeamSplitterSpec::crossed(
                "sig",
                "anc2",
                ns_reflectivity_second(),
                GreySide::ModeA,
            )),
        ],
        &["anc1", "anc2"],
    )?;

    Ok(GateSetup {
        circuit,
        input,
        desired,
        correct_counts: vec![1, 0],
    })
}

/// Control/target amplitudes over the qubit basis `{|00>,|01>,|10>,|11>}`
/// in photon-number encoding.
#[derive(Debug, Clone)]
pub struct CsGateSpec {
    pub amplitudes: [Complex64; 4],
}

impl CsGateSpec {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm: norm.sqrt() });
        }
        Ok(CsGateSpec { amplitudes })
    }

    /// One of the four truth-table inputs.
    pub fn basis(control: usize, target: usize) -> Result<Self> {
        if control > 1 || target > 1 {
            return Err(Error::InvalidParameter(format!(
                "control/target photon numbers must be 0 or 1, got ({control}, {target})"
            )));
        }
        let mut amplitudes = [Complex64::ZERO; 4];
        amplitudes[2 * control + target] = Complex64::new(1.0, 0.0);
        Ok(CsGateSpec { amplitudes })
    }
}

/// Assemble the CS gate: 50/50 splitter, an NS gate on each arm, inverse
/// 50/50 splitter.  Correct result: both NS counters read `(1, 0)`.
pub fn build_cs(spec: &CsGateSpec) -> Result<GateSetup> {
    let system = ModeSystem::new(&["ctl", "tgt", "ca1", "ca2", "ta1", "ta2"], 4)?;
    let mut amps = Array1::zeros(system.dim());
    for (k, amp) in spec.amplitudes.iter().enumerate() {
        let (c_n, t_n) = (k / 2, k % 2);
        amps[system.index_of(&[c_n, t_n, 1, 0, 1, 0]).unwrap()] = *amp;
    }
    let input = PureState::from_amplitudes(system.clone(), amps)?;

    let out_system = system.subsystem(&[0, 1]);
    let mut desired_amps = Array1::zeros(out_system.dim());
    for (k, amp) in spec.amplitudes.iter().enumerate() {
        let (c_n, t_n) = (k / 2, k % 2);
        let sign = if c_n == 1 && t_n == 1 { -1.0 } else { 1.0 };
        desired_amps[out_system.index_of(&[c_n, t_n]).unwrap()] =
            *amp * Complex64::new(sign, 0.0);
    }
    let desired = PureState::from_amplitudes(out_system, desired_amps)?;

    let mut elements = vec![Element::BeamSplitter(BeamSplitterSpec::through(
        "ctl",
        "tgt",
        0.5,
        GreySide::ModeA,
    ))];
    for (sig, a1, a2) in [("ctl", "ca1", "ca2"), ("tgt", "ta1", "ta2")] {
        elements.push(Element::BeamSplitter(BeamSplitterSpec::crossed(
            sig,
            a1,
            ns_reflectivity_first(),
            GreySide::ModeB,
        )));
        elements.push(Element::BeamSplitter(BeamSplitterSpec::crossed(
            sig,
            a2,
            ns_reflectivity_second(),
            GreySide::ModeA,
        )));
    }
    elements.push(Element::BeamSplitter(BeamSplitterSpec::through(
        "ctl",
        "tgt",
        0.5,
        GreySide::ModeB,
    )));

    let circuit = Circuit::new(system, elements, &["ca1", "ca2", "ta1", "ta2"])?;
    Ok(GateSetup {
        circuit,
        input,
        desired,
        correct_counts: vec![1, 0, 1, 0],
    })
}

/// One fidelity report per efficiency on the grid.
pub fn ns_fidelity_sweep(spec: &NsGateSpec, eta_grid: &[f64]) -> Result<Vec<FidelityReport>> {
    let gate = build_ns(spec)?;
    eta_grid
        .iter()
        .map(|&eta| {
            fidelity_report(
                &gate.circuit,
                &gate.input,
                &gate.desired,
                &gate.correct_counts,
                eta,
            )
        })
        .collect()
}

/// Fidelity reports for the CS gate over an efficiency grid.
pub fn cs_fidelity_sweep(spec: &CsGateSpec, eta_grid: &[f64]) -> Result<Vec<FidelityReport>> {
    let gate = build_cs(spec)?;
    eta_grid
        .iter()
        .map(|&eta| {
            fidelity_report(
                &gate.circuit,
                &gate.input,
                &gate.desired,
                &gate.correct_counts,
                eta,
            )
        })
        .collect()
}

/// Both sides of the composition claim `F_r(CS) = F_r(NS)^2`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CompositionCheck {
    pub eta: f64,
    #[serde(rename = "F_r_cs")]
    pub f_r_cs: f64,
    #[serde(rename = "F_r_ns_squared")]
    pub f_r_ns_squared: f64,
    pub discrepancy: f64,
}

/// Measures the composition claim at one efficiency.
///
/// The CS side is a full joint simulation on the `|11>` input.  The
/// per-gate side runs one NS gate standalone with signal amplitudes
/// `(1, 0, 1)/sqrt 2`, the photon-number content each arm carries inside
/// the CS gate after the first splitter.
pub fn cs_composition_check(eta: f64) -> Result<CompositionCheck> {
    let cs = build_cs(&CsGateSpec::basis(1, 1)?)?;
    let cs_report = fidelity_report(&cs.circuit, &cs.input, &cs.desired, &cs.correct_counts, eta)?;

    let h = 1.0 / SQRT2;
    let ns_spec = NsGateSpec::from_reals(h, 0.0, h)?;
    let ns = build_ns(&ns_spec)?;
    let ns_report = fidelity_report(&ns.circuit, &ns.input, &ns.desired, &ns.correct_counts, eta)?;

    let f_r_cs = cs_report.f_r;
    let f_r_ns_squared = ns_report.f_r * ns_report.f_r;
    Ok(CompositionCheck {
        eta,
        f_r_cs,
        f_r_ns_squared,
        discrepancy: (f_r_cs - f_r_ns_squared).abs(),
    })
}

/// Overlap fidelity between the gate's perfect-detector conditional output
/// and its target state.  The NS convention freeze requires this to be 1;
/// the raw overlap is computed here so a broken layout reports a low value
/// instead of tripping the report postconditions.
pub fn perfect_conditional_fidelity(gate: &GateSetup) -> Result<f64> {
    let cond = perfect_conditional_state(gate)?;
    crate::fidelity::overlap_fidelity(&gate.desired, &cond.state)
}

/// The perfect-detector probability of the gate's correct reading.
pub fn perfect_success_probability(gate: &GateSetup) -> Result<f64> {
    use crate::measurement::{compound_pom, ideal_counter_pom};
    use crate::postselect::{joint_state, outcome_distribution};
    let rho = joint_state(&gate.circuit, &gate.input)?;
    let system = gate.circuit.system();
    let sets: Vec<_> = gate
        .circuit
        .detection_positions()
        .iter()
        .map(|&p| ideal_counter_pom(&system.subsystem(&[p]), system.cutoff()))
        .collect::<Result<_>>()?;
    let pom = compound_pom(&sets, Some(system.cutoff()))?;
    let dist = outcome_distribution(&rho, &pom)?;
    dist.probability_of(&gate.correct_counts)
        .ok_or_else(|| Error::InvalidParameter("correct outcome missing".into()))
}

/// The conditional output state on the output modes under perfect detection.
pub fn perfect_conditional_state(gate: &GateSetup) -> Result<crate::postselect::ConditionalOutput> {
    use crate::measurement::{compound_pom, ideal_counter_pom};
    use crate::postselect::{conditional_state, joint_state};
    let rho = joint_state(&gate.circuit, &gate.input)?;
    let system = gate.circuit.system();
    let sets: Vec<_> = gate
        .circuit
        .detection_positions()
        .iter()
        .map(|&p| ideal_counter_pom(&system.subsystem(&[p]), system.cutoff()))
        .collect::<Result<_>>()?;
    let pom = compound_pom(&sets, Some(system.cutoff()))?;
    let pos = pom
        .position_of(&gate.correct_counts)
        .ok_or_else(|| Error::InvalidParameter("correct outcome missing".into()))?;
    let (label, element) = &pom.elements()[pos];
    conditional_state(&rho, label, element)
}

/// A deliberately mis-frozen NS layout (one grey side flipped); the
/// sign-flip validation must reject it.
pub fn build_ns_with_corrupted_convention(spec: &NsGateSpec) -> Result<GateSetup> {
    let good = build_ns(spec)?;
    let system: Arc<ModeSystem> = good.circuit.system().clone();
    let circuit = Circuit::new(
        system,
        vec![
            Element::BeamSplitter(BeamSplitterSpec::crossed(
                "sig",
                "anc1",
                ns_reflectivity_first(),
                GreySide::ModeB,
            )),
            Element::BeamSplitter(BeamSplitterSpec::crossed(
                "sig",
                "anc2",
                ns_reflectivity_second(),
                GreySide::ModeB,
            )),
        ],
        &["anc1", "anc2"],
    )?;
    Ok(GateSetup { circuit, ..good })
}
