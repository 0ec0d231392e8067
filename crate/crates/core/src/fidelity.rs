//! The three fidelity measures for postselecting devices and the
//! positive-semidefinite extraction subproblem behind the correct output
//! fidelity.
//!
//! For an announced correct result `c`:
//!
//! * `F_r = P^retr(c|c)` — the retrodictive conditional probability that the
//!   detection arm really carried the announced outcome;
//! * `F_c = F_r + Sum_j P^retr(i_j|c) * Pmax_j` — adds, per incorrect
//!   outcome, the largest fraction of the desired pure state extractable
//!   from that conditional output;
//! * `F_o = Tr[rho_c rho_c']` — the plain overlap with the imperfect output.
//!
//! They obey `F_r <= F_c <= F_o <= 1`, which every report enforces.

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::channels::Circuit;
use crate::error::{Error, Result};
use crate::fock::{HermitianOperator, OperatorRole, PureState};
use crate::measurement::{
    compound_pom, ideal_counter_pom, lossy_counter_pom, retro_weights, PomSet, RetroWeightTable,
};
use crate::postselect::{
    conditional_state, imperfect_output, joint_state, outcome_distribution, OutcomeDistribution,
};
use crate::tolerance::{IMPOSSIBLE_OUTCOME_TOL, SUPPORT_CUT};

/// Retrodictive conditional probabilities `P^retr(k|announced)` over the
/// outcomes of a detection POM.
#[derive(Debug, Clone)]
pub struct RetroConditionals {
    outcomes: Vec<Vec<usize>>,
    announced: usize,
    values: Vec<f64>,
}

impl RetroConditionals {
    pub fn outcomes(&self) -> &[Vec<usize>] {
        &self.outcomes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn announced_index(&self) -> usize {
        self.announced
    }

    /// `P^retr(announced|announced)`.
    pub fn correct(&self) -> f64 {
        self.values[self.announced]
    }
}

/// `<psi|rho'|psi>`: the probability that the produced state passes a
/// projective test onto the desired pure state.
pub fn overlap_fidelity(desired: &PureState, actual: &HermitianOperator) -> Result<f64> {
    let v = actual.expectation(desired)?;
    if !(-1e-12..=1.0 + 1e-12).contains(&v) {
        return Err(Error::Other(format!("overlap {v} outside [0, 1]")));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Bayes inversion: `P^retr(k|c) = p_k P^p(c|k) / Sum_m p_m P^p(c|m)`.
pub fn bayes_retro(
    dist: &OutcomeDistribution,
    weights: &RetroWeightTable,
    result_counts: &[usize],
) -> Result<RetroConditionals> {
    if dist.len() != weights.len() {
        return Err(Error::InvalidParameter(
            "distribution and weight table have different outcome counts".into(),
        ));
    }
    for (label, counts) in dist.labels().iter().zip(weights.outcomes()) {
        if &label.counts != counts {
            return Err(Error::InvalidParameter(
                "distribution and weight table outcomes are not aligned".into(),
            ));
        }
    }
    let announced = weights
        .outcomes()
        .iter()
        .position(|c| c == result_counts)
        .ok_or_else(|| Error::InvalidParameter(format!("no outcome {result_counts:?}")))?;
    let joint: Vec<f64> = (0..dist.len())
        .map(|k| dist.probabilities()[k] * weights.forward_probability(announced, k))
        .collect();
    let total: f64 = joint.iter().sum();
    if total <= IMPOSSIBLE_OUTCOME_TOL {
        return Err(Error::ImpossibleOutcome { probability: total });
    }
    let values: Vec<f64> = joint.iter().map(|v| v / total).collect();
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::Other(format!(
            "retrodictive conditionals sum to {sum}"
        )));
    }
    Ok(RetroConditionals {
        outcomes: weights.outcomes().to_vec(),
        announced,
        values,
    })
}

/// `F_r`: the correct-outcome entry of the retrodictive conditionals.
pub fn retrodictive_fidelity(conds: &RetroConditionals) -> f64 {
    conds.correct()
}

/// Result of extracting the largest multiple of a pure state from a density
/// operator while keeping the remainder positive semidefinite.
#[derive(Debug, Clone)]
pub struct PmaxExtraction {
    pub p_max: f64,
    /// `rho_i - p_max |psi><psi|`; positive semidefinite with trace
    /// `1 - p_max`.
    pub remainder: HermitianOperator,
}

/// `p_max = max { p : rho_i - p |psi><psi| is positive semidefinite }`.
///
/// Closed form: zero when `|psi>` has any component outside the support of
/// `rho_i` (support cut at eigenvalue `1e-10`), else
/// `1 / <psi| rho_i^+ |psi>` with the support-restricted inverse.
pub fn pmax_extract(rho_i: &HermitianOperator, psi: &PureState) -> Result<PmaxExtraction> {
    if rho_i.system() != psi.system() {
        return Err(Error::SystemMismatch);
    }
    let spec = rho_i.hermitian_spectrum()?;
    let d = rho_i.system().dim();
    // components of psi along the eigenvectors
    let mut comps = vec![Complex64::ZERO; d];
    for (k, comp) in comps.iter_mut().enumerate() {
        let mut acc = Complex64::ZERO;
        for r in 0..d {
            acc += spec.eigenvectors[(r, k)].conj() * psi.amplitudes()[r];
        }
        *comp = acc;
    }
    let outside: f64 = (0..d)
        .filter(|&k| spec.eigenvalues[k] <= SUPPORT_CUT)
        .map(|k| comps[k].norm_sqr())
        .sum();
    let p_max = if outside > SUPPORT_CUT {
        0.0
    } else {
        let inv_form: f64 = (0..d)
            .filter(|&k| spec.eigenvalues[k] > SUPPORT_CUT)
            .map(|k| comps[k].norm_sqr() / spec.eigenvalues[k])
            .sum();
        if inv_form <= 0.0 {
            0.0
        } else {
            1.0 / inv_form
        }
    };
    let mut remainder_entries = rho_i.entries().clone();
    if p_max > 0.0 {
        for i in 0..d {
            for j in 0..d {
                remainder_entries[(i, j)] -= Complex64::new(p_max, 0.0)
                    * psi.amplitudes()[i]
                    * psi.amplitudes()[j].conj();
            }
        }
    }
    let remainder =
        HermitianOperator::new(rho_i.system().clone(), remainder_entries, OperatorRole::Generic)?;
    let min_eig = remainder
        .hermitian_spectrum()?
        .eigenvalues
        .first()
        .copied()
        .unwrap_or(0.0);
    if min_eig < -1e-10 {
        return Err(Error::NotPositive {
            min_eigenvalue: min_eig,
        });
    }
    let expected_trace = rho_i.trace().re - p_max;
    if (remainder.trace().re - expected_trace).abs() > 1e-10 {
        return Err(Error::BadTrace {
            trace: remainder.trace().re,
        });
    }
    Ok(PmaxExtraction { p_max, remainder })
}

/// `F_c = F_r + Sum_j P^retr(i_j|c) * pmax_j`, with `pmax_j` aligned to the
/// non-announced outcomes in table order.
pub fn correct_output_fidelity(conds: &RetroConditionals, pmaxes: &[f64]) -> Result<f64> {
    let incorrect: Vec<usize> = (0..conds.values.len())
        .filter(|&k| k != conds.announced)
        .collect();
    if incorrect.len() != pmaxes.len() {
        return Err(Error::InvalidParameter(format!(
            "{} extraction values for {} incorrect outcomes",
            pmaxes.len(),
            incorrect.len()
        )));
    }
    let mut f_c = conds.correct();
    for (&k, &p) in incorrect.iter().zip(pmaxes) {
        f_c += conds.values[k] * p;
    }
    Ok(f_c)
}

/// Diagnostics for one incorrect detector outcome inside a report.
#[derive(Debug, Clone, Serialize)]
pub struct IncorrectOutcome {
    pub counts: Vec<usize>,
    /// `P^retr(i_j|c)`.
    pub p_retr: f64,
    /// `Pmax_j` for this outcome's conditional state.
    pub p_max: f64,
    /// `Tr[rho_c rho_{i_j}]`.
    pub overlap: f64,
}

/// Everything the fidelity analysis produces for one quantum efficiency.
#[derive(Debug, Clone, Serialize)]
pub struct FidelityReport {
    pub eta: f64,
    /// Probability that the imperfect detector announces the correct result.
    pub click_probability: f64,
    #[serde(rename = "F_r")]
    pub f_r: f64,
    #[serde(rename = "F_c")]
    pub f_c: f64,
    #[serde(rename = "F_o")]
    pub f_o: f64,
    pub incorrect_outcomes: Vec<IncorrectOutcome>,
    /// Extraction from the lumped incorrect mixture, reported because
    /// lumping can only lower per-outcome extractability.
    pub lumped_p_max: f64,
}

const TWO_PATH_TOL: f64 = 1e-12;

/// Full fidelity analysis of a postselecting circuit at one detector
/// efficiency.
///
/// Detection is modelled per mode as an ideal counter behind a loss channel
/// of transmission `eta`; the correct result is the outcome with
/// `correct_counts`.  The report is computed along two independent routes
/// (retro-propagated POM element versus the explicit mixture over perfect
/// conditionals, and direct overlap versus its Bayes decomposition) which
/// must agree to `1e-12`, and the chain `F_r <= F_c <= F_o <= 1` is a hard
/// postcondition.
pub fn fidelity_report(
    circuit: &Circuit,
    input: &PureState,
    desired: &PureState,
    correct_counts: &[usize],
    eta: f64,
) -> Result<FidelityReport> {
    let rho12 = joint_state(circuit, input)?;
    let system = circuit.system();
    let cutoff = system.cutoff();

    let mut ideal_sets = Vec::new();
    let mut lossy_sets = Vec::new();
    for &pos in &circuit.detection_positions() {
        let sub = system.subsystem(&[pos]);
        ideal_sets.push(ideal_counter_pom(&sub, cutoff)?);
        lossy_sets.push(lossy_counter_pom(&sub, eta, cutoff)?);
    }
    let ideal = compound_pom(&ideal_sets, Some(cutoff))?.classify_correct(correct_counts)?;
    let lossy = compound_pom(&lossy_sets, Some(cutoff))?;
    let weights = retro_weights(&lossy, &ideal)?;
    let dist = outcome_distribution(&rho12, &ideal)?;
    let conds = bayes_retro(&dist, &weights, correct_counts)?;
    let f_r = retrodictive_fidelity(&conds);

    let c_pos = ideal.position_of(correct_counts).unwrap();
    let (c_label, c_element) = &ideal.elements()[c_pos];
    let rho_c = conditional_state(&rho12, c_label, c_element)?;

    // Route 1: condition directly on the retro-propagated element.
    let l_pos = lossy.position_of(correct_counts).unwrap();
    let (l_label, l_element) = &lossy.elements()[l_pos];
    let direct = conditional_state(&rho12, l_label, l_element)?;
    // Route 2: the explicit mixture over perfect conditionals.
    let mixture = imperfect_output(&rho12, &ideal, &weights, correct_counts)?;
    let state_gap = (&direct.state.entries().clone() - mixture.state.entries())
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    let prob_gap = (direct.click_probability - mixture.click_probability).abs();
    if state_gap > TWO_PATH_TOL || prob_gap > TWO_PATH_TOL {
        return Err(Error::Other(format!(
            "imperfect output routes disagree: state {state_gap:.3e}, probability {prob_gap:.3e}"
        )));
    }

    let f_o = overlap_fidelity(desired, &direct.state)?;

    // Bayes decomposition of the overlap, plus per-outcome extraction.
    let mut f_o_bayes = 0.0f64;
    let mut incorrect_outcomes = Vec::new();
    let mut extraction_total = 0.0f64;
    let mut lumped: Option<Array2<Complex64>> = None;
    let mut lumped_weight = 0.0f64;
    for k in 0..conds.values().len() {
        let w = conds.values()[k];
        if k == c_pos {
            f_o_bayes += w * rho_c.state.trace_product(&rho_c.state)?.re;
            continue;
        }
        let p_k = dist.probabilities()[k];
        if w <= 0.0 || p_k <= IMPOSSIBLE_OUTCOME_TOL {
            incorrect_outcomes.push(IncorrectOutcome {
                counts: conds.outcomes()[k].clone(),
                p_retr: 0.0,
                p_max: 0.0,
                overlap: 0.0,
            });
            continue;
        }
        let (label_k, element_k) = &ideal.elements()[k];
        let cond_k = conditional_state(&rho12, label_k, element_k)?;
        let overlap = rho_c.state.trace_product(&cond_k.state)?.re;
        f_o_bayes += w * overlap;
        let extraction = pmax_extract(&cond_k.state, desired)?;
        extraction_total += w * extraction.p_max;
        incorrect_outcomes.push(IncorrectOutcome {
            counts: conds.outcomes()[k].clone(),
            p_retr: w,
            p_max: extraction.p_max,
            overlap,
        });
        let scaled = cond_k.state.entries().mapv(|z| z * Complex64::new(w, 0.0));
        match &mut lumped {
            Some(acc) => *acc += &scaled,
            None => lumped = Some(scaled),
        }
        lumped_weight += w;
    }
    if (f_o - f_o_bayes).abs() > TWO_PATH_TOL {
        return Err(Error::Other(format!(
            "overlap routes disagree: direct {f_o:.15} vs decomposed {f_o_bayes:.15}"
        )));
    }

    let f_c = f_r + extraction_total;

    let lumped_p_max = match lumped {
        Some(entries) if lumped_weight > IMPOSSIBLE_OUTCOME_TOL => {
            let normalized = entries.mapv(|z| z / Complex64::new(lumped_weight, 0.0));
            let mixture_state = HermitianOperator::new(
                rho_c.state.system().clone(),
                normalized,
                OperatorRole::Density,
            )?;
            pmax_extract(&mixture_state, desired)?.p_max
        }
        _ => 0.0,
    };

    let slack = 1e-12;
    if !(f_r <= f_c + slack && f_c <= f_o + slack && f_o <= 1.0 + slack) {
        return Err(Error::ChainViolation { f_r, f_c, f_o });
    }

    Ok(FidelityReport {
        eta,
        click_probability: direct.click_probability,
        f_r,
        f_c,
        f_o,
        incorrect_outcomes,
        lumped_p_max,
    })
}

/// The set of per-mode lossy counters assembled over a circuit's detection
/// modes, exposed for validation tooling.
pub fn detection_poms(circuit: &Circuit, eta: f64) -> Result<(PomSet, PomSet)> {
    let system = circuit.system();
    let cutoff = system.cutoff();
    let mut ideal_sets = Vec::new();
    let mut lossy_sets = Vec::new();
    for &pos in &circuit.detection_positions() {
        let sub = system.subsystem(&[pos]);
        ideal_sets.push(ideal_counter_pom(&sub, cutoff)?);
        lossy_sets.push(lossy_counter_pom(&sub, eta, cutoff)?);
    }
    Ok((
        compound_pom(&ideal_sets, Some(cutoff))?,
        compound_pom(&lossy_sets, Some(cutoff))?,
    ))
}
