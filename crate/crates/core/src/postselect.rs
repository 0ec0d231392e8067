//! Joint output states, outcome probability distributions, retrodictive
//! states, and conditional output states for perfect and imperfect detection.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use crate::channels::{apply_circuit, Circuit};
use crate::error::{Error, Result};
use crate::fock::{HermitianOperator, ModeSystem, OperatorRole, PureState};
use crate::measurement::{OutcomeLabel, PomSet, RetroWeightTable};
use crate::tolerance::{global_tol, IMPOSSIBLE_OUTCOME_TOL};

/// Detector-outcome probabilities with the associated retrodictive states
/// `Lambda_k = pi_k / Tr pi_k`.
///
/// The retrodictive states describe the detected arm alone and are kept for
/// probability bookkeeping and inspection only; the device output is always
/// computed from the joint state, never from this decomposition.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    labels: Vec<OutcomeLabel>,
    probabilities: Vec<f64>,
    retrodictive_states: Vec<HermitianOperator>,
}

impl OutcomeDistribution {
    /// Assembles a distribution from outcome labels, probabilities, and the
    /// retrodictive states, checking normalization on both.
    pub fn from_parts(
        labels: Vec<OutcomeLabel>,
        probabilities: Vec<f64>,
        retrodictive_states: Vec<HermitianOperator>,
    ) -> Result<Self> {
        if labels.len() != probabilities.len() || labels.len() != retrodictive_states.len() {
            return Err(Error::InvalidParameter(
                "labels, probabilities, and states must align".into(),
            ));
        }
        let tol = global_tol();
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "outcome probabilities sum to {total}, not 1"
            )));
        }
        for p in &probabilities {
            if *p < -tol {
                return Err(Error::InvalidParameter(format!("negative probability {p}")));
            }
        }
        for lam in &retrodictive_states {
            let tr = lam.trace().re;
            if (tr - 1.0).abs() > tol {
                return Err(Error::BadTrace { trace: tr });
            }
        }
        Ok(OutcomeDistribution {
            labels,
            probabilities,
            retrodictive_states,
        })
    }

    pub fn labels(&self) -> &[OutcomeLabel] {
        &self.labels
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn retrodictive_states(&self) -> &[HermitianOperator] {
        &self.retrodictive_states
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position_of(&self, counts: &[usize]) -> Option<usize> {
        self.labels.iter().position(|l| l.counts == counts)
    }

    pub fn probability_of(&self, counts: &[usize]) -> Option<f64> {
        self.position_of(counts).map(|i| self.probabilities[i])
    }
}

/// The state left on the output modes after a detector outcome, with the
/// probability of that outcome.
#[derive(Debug, Clone)]
pub struct ConditionalOutput {
    pub outcome: OutcomeLabel,
    pub state: HermitianOperator,
    pub click_probability: f64,
}

/// An unnormalized conditional operator paired with its weight, so the
/// numerator and denominator of the conditioning rule stay separately
/// inspectable.
#[derive(Debug, Clone)]
pub struct WeightedConditional {
    pub operator: HermitianOperator,
    pub weight: f64,
}

/// `rho_12 = |U psi><U psi|` for the circuit's full mode system.
pub fn joint_state(circuit: &Circuit, input: &PureState) -> Result<HermitianOperator> {
    let out = apply_circuit(circuit, input)?;
    HermitianOperator::pure_density(&out)
}

fn detection_positions(joint: &Arc<ModeSystem>, pom_system: &Arc<ModeSystem>) -> Result<Vec<usize>> {
    if pom_system.cutoff() != joint.cutoff() {
        return Err(Error::InvalidParameter(format!(
            "detection subsystem cutoff {} differs from the joint cutoff {}",
            pom_system.cutoff(),
            joint.cutoff()
        )));
    }
    pom_system
        .labels()
        .iter()
        .map(|l| joint.mode_position(l))
        .collect()
}

/// `Tr_det[rho (1 (x) pi)]` on raw entries, with its weight
/// `Tr[rho (1 (x) pi)]`.
fn contract_detection(
    rho: &HermitianOperator,
    element: &HermitianOperator,
) -> Result<(Arc<ModeSystem>, Array2<Complex64>, f64)> {
    let joint = rho.system();
    let det_positions = detection_positions(joint, element.system())?;
    let kept: Vec<usize> = (0..joint.mode_count())
        .filter(|p| !det_positions.contains(p))
        .collect();
    let kept_system = if kept.is_empty() {
        ModeSystem::scalar()
    } else {
        joint.subsystem(&kept)
    };
    let det_system = element.system();
    let mut split: Vec<(usize, usize)> = Vec::with_capacity(joint.dim());
    for occ in joint.basis() {
        let kept_occ: Vec<usize> = kept.iter().map(|&p| occ[p]).collect();
        let det_occ: Vec<usize> = det_positions.iter().map(|&p| occ[p]).collect();
        split.push((
            kept_system.index_of(&kept_occ).unwrap(),
            det_system.index_of(&det_occ).unwrap(),
        ));
    }
    let mut out: Array2<Complex64> = Array2::zeros((kept_system.dim(), kept_system.dim()));
    let rho_e = rho.entries();
    let pi_e = element.entries();
    for (i, &(xi, di)) in split.iter().enumerate() {
        for (j, &(xj, dj)) in split.iter().enumerate() {
            let p = pi_e[(dj, di)];
            if p != Complex64::ZERO {
                out[(xi, xj)] += rho_e[(i, j)] * p;
            }
        }
    }
    let weight: f64 = (0..kept_system.dim()).map(|i| out[(i, i)].re).sum();
    Ok((kept_system, out, weight))
}

/// Outcome probabilities `p_k = Tr[rho_12 (1 (x) pi_k)]` for a complete POM
/// on the detection modes, together with the retrodictive states.
pub fn outcome_distribution(rho12: &HermitianOperator, pom: &PomSet) -> Result<OutcomeDistribution> {
    detection_positions(rho12.system(), pom.system())?;
    let tol = global_tol();
    let mut labels = Vec::with_capacity(pom.len());
    let mut probabilities = Vec::with_capacity(pom.len());
    let mut retrodictive_states = Vec::with_capacity(pom.len());
    for (label, element) in pom.elements() {
        let (_, _, weight) = contract_detection(rho12, element)?;
        if weight < -tol {
            return Err(Error::NotPositive {
                min_eigenvalue: weight,
            });
        }
        probabilities.push(weight.max(0.0));
        labels.push(label.clone());
        let tr = element.trace().re;
        if tr <= tol {
            return Err(Error::InvalidParameter(format!(
                "outcome {:?} has a zero-trace element and no retrodictive state",
                label.counts
            )));
        }
        let lam = element.entries().mapv(|z| z / Complex64::new(tr, 0.0));
        retrodictive_states.push(HermitianOperator::new(
            element.system().clone(),
            lam,
            OperatorRole::Density,
        )?);
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::InvalidParameter(format!(
            "outcome probabilities sum to {total}, not 1"
        )));
    }
    Ok(OutcomeDistribution {
        labels,
        probabilities,
        retrodictive_states,
    })
}

/// The unnormalized conditional operator `Tr_det[rho_12 (1 (x) pi)]` and its
/// weight.
pub fn unnormalized_conditional(
    rho12: &HermitianOperator,
    element: &HermitianOperator,
) -> Result<WeightedConditional> {
    let (system, entries, weight) = contract_detection(rho12, element)?;
    Ok(WeightedConditional {
        operator: HermitianOperator::new(system, entries, OperatorRole::Generic)?,
        weight,
    })
}

/// The normalized state on the output modes given that the detector fired
/// with the supplied element.
pub fn conditional_state(
    rho12: &HermitianOperator,
    label: &OutcomeLabel,
    element: &HermitianOperator,
) -> Result<ConditionalOutput> {
    let (system, entries, weight) = contract_detection(rho12, element)?;
    if weight <= IMPOSSIBLE_OUTCOME_TOL {
        return Err(Error::ImpossibleOutcome {
            probability: weight,
        });
    }
    let state = HermitianOperator::new(
        system,
        entries.mapv(|z| z / Complex64::new(weight, 0.0)),
        OperatorRole::Density,
    )?;
    Ok(ConditionalOutput {
        outcome: label.clone(),
        state,
        click_probability: weight,
    })
}

/// The imperfect-detector output state in its explicit mixture form over the
/// perfect-device conditionals:
///
/// `rho_c' = Sum_k P^p(c|k) T_k / Sum_k p_k P^p(c|k)`,
///
/// where `T_k` are the unnormalized perfect conditionals and the denominator
/// is the probability that the imperfect detector announces `c`.
pub fn imperfect_output(
    rho12: &HermitianOperator,
    ideal_pom: &PomSet,
    weights: &RetroWeightTable,
    correct_counts: &[usize],
) -> Result<ConditionalOutput> {
    if ideal_pom.len() != weights.len() {
        return Err(Error::InvalidParameter(
            "weight table does not match the POM outcome count".into(),
        ));
    }
    for ((label, _), counts) in ideal_pom.elements().iter().zip(weights.outcomes()) {
        if &label.counts != counts {
            return Err(Error::InvalidParameter(
                "weight table outcomes are not aligned with the POM".into(),
            ));
        }
    }
    let announced = ideal_pom
        .position_of(correct_counts)
        .ok_or_else(|| Error::InvalidParameter(format!("no outcome {correct_counts:?}")))?;

    let mut numerator: Option<Array2<Complex64>> = None;
    let mut out_system: Option<Arc<ModeSystem>> = None;
    let mut denominator = 0.0f64;
    for (k, (_, element)) in ideal_pom.elements().iter().enumerate() {
        let transition = weights.forward_probability(announced, k);
        if transition == 0.0 {
            continue;
        }
        let (system, entries, weight) = contract_detection(rho12, element)?;
        denominator += weight * transition;
        let scaled = entries.mapv(|z| z * Complex64::new(transition, 0.0));
        match &mut numerator {
            Some(acc) => *acc += &scaled,
            None => {
                numerator = Some(scaled);
                out_system = Some(system);
            }
        }
    }
    if denominator <= IMPOSSIBLE_OUTCOME_TOL {
        return Err(Error::ImpossibleOutcome {
            probability: denominator,
        });
    }
    let entries = numerator.unwrap().mapv(|z| z / Complex64::new(denominator, 0.0));
    let state = HermitianOperator::new(out_system.unwrap(), entries, OperatorRole::Density)?;
    Ok(ConditionalOutput {
        outcome: ideal_pom.elements()[announced].0.clone(),
        state,
        click_probability: denominator,
    })
}
