//! Photon-counting POM sets, ideal and loss-degraded, compound detection
//! over several modes, and retrodictive-weight extraction.
//!
//! Completeness (`Sum_k pi_k = 1`) is treated as an invariant, not an
//! approximation: the top counting outcome is the projector onto "cutoff or
//! more" photons restricted to the truncated space, so every set constructed
//! here sums to the identity exactly, including after retro-propagation.
//! Incorrect outcomes are kept separate; lumping is a presentation-layer sum.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use crate::channels::{binomial, loss_kraus};
use crate::error::{Error, Result};
use crate::fock::{HermitianOperator, ModeSystem, OperatorRole};
use crate::tolerance::global_tol;

/// Whether an outcome is the designated correct result of a device.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Correct,
    /// `Incorrect(j)` is the j-th incorrect result, counted in label order.
    Incorrect(usize),
}

/// A detector outcome: one photon count per detection mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeLabel {
    pub counts: Vec<usize>,
    pub classification: Classification,
}

/// A complete family of measurement outcome elements.
#[derive(Debug, Clone)]
pub struct PomSet {
    system: Arc<ModeSystem>,
    elements: Vec<(OutcomeLabel, HermitianOperator)>,
}

impl PomSet {
    /// Builds the set, verifying completeness within the global tolerance.
    /// Element positivity is enforced by the `pom_element` operator role.
    pub fn new(
        system: Arc<ModeSystem>,
        elements: Vec<(OutcomeLabel, HermitianOperator)>,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidParameter("empty POM set".into()));
        }
        let d = system.dim();
        let mut sum: Array2<Complex64> = Array2::zeros((d, d));
        for (_, op) in &elements {
            if *op.system() != system {
                return Err(Error::SystemMismatch);
            }
            sum += op.entries();
        }
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((sum[(i, j)] - Complex64::new(expect, 0.0)).norm());
            }
        }
        if worst > global_tol() {
            return Err(Error::IncompletePom { deviation: worst });
        }
        Ok(PomSet { system, elements })
    }

    pub fn system(&self) -> &Arc<ModeSystem> {
        &self.system
    }

    pub fn elements(&self) -> &[(OutcomeLabel, HermitianOperator)] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position_of(&self, counts: &[usize]) -> Option<usize> {
        self.elements.iter().position(|(l, _)| l.counts == counts)
    }

    /// Re-classifies the labels so the outcome with the given counts is the
    /// single correct one and the rest are numbered incorrect results.
    pub fn classify_correct(&self, correct_counts: &[usize]) -> Result<PomSet> {
        if self.position_of(correct_counts).is_none() {
            return Err(Error::InvalidParameter(format!(
                "no outcome with counts {correct_counts:?}"
            )));
        }
        let mut elements = self.elements.clone();
        let mut j = 0usize;
        for (label, _) in elements.iter_mut() {
            if label.counts == correct_counts {
                label.classification = Classification::Correct;
            } else {
                label.classification = Classification::Incorrect(j);
                j += 1;
            }
        }
        PomSet::new(self.system.clone(), elements)
    }
}

/// Ideal photon counter on a single mode.
///
/// Outcomes `0..cutoff` are exact-count projectors `|n><n|`; the final
/// outcome `cutoff` is the projector onto `cutoff` or more photons within
/// the truncated space, which keeps the set exactly complete.
pub fn ideal_counter_pom(system: &Arc<ModeSystem>, cutoff: usize) -> Result<PomSet> {
    if system.mode_count() != 1 {
        return Err(Error::InvalidParameter(
            "counter POMs are built per detection mode".into(),
        ));
    }
    if cutoff > system.cutoff() {
        return Err(Error::InvalidParameter(format!(
            "outcome cutoff {cutoff} exceeds the system cutoff {}",
            system.cutoff()
        )));
    }
    let d = system.dim();
    let mut elements = Vec::with_capacity(cutoff + 1);
    for n in 0..=cutoff {
        let mut entries: Array2<Complex64> = Array2::zeros((d, d));
        if n < cutoff {
            let i = system.index_of(&[n]).unwrap();
            entries[(i, i)] = Complex64::new(1.0, 0.0);
        } else {
            for m in n..=system.cutoff() {
                let i = system.index_of(&[m]).unwrap();
                entries[(i, i)] = Complex64::new(1.0, 0.0);
            }
        }
        let op = HermitianOperator::new(system.clone(), entries, OperatorRole::PomElement)?;
        elements.push((
            OutcomeLabel {
                counts: vec![n],
                classification: Classification::Incorrect(n),
            },
            op,
        ));
    }
    PomSet::new(system.clone(), elements)
}

/// Photon counter of quantum efficiency `eta`: every ideal element evolved
/// backwards through the loss channel.
pub fn lossy_counter_pom(system: &Arc<ModeSystem>, eta: f64, cutoff: usize) -> Result<PomSet> {
    let ideal = ideal_counter_pom(system, cutoff)?;
    let channel = loss_kraus(eta, system.cutoff())?;
    let mut elements = Vec::with_capacity(ideal.len());
    for (label, op) in ideal.elements() {
        elements.push((label.clone(), channel.retro_propagate(op)?));
    }
    PomSet::new(system.clone(), elements)
}

/// Joint detection over several modes: one element per combination of
/// per-mode outcomes, restricted to the truncated joint basis.
///
/// Combinations without support in the joint basis (their count total
/// exceeds the cutoff) are dropped; they are identically zero there and
/// can never fire.  The joint cutoff must not exceed any factor cutoff so
/// every joint occupation stays within each factor's basis.
pub fn compound_pom(per_mode: &[PomSet], cutoff: Option<usize>) -> Result<PomSet> {
    if per_mode.is_empty() {
        return Err(Error::InvalidParameter("no per-mode POM sets".into()));
    }
    let mut labels: Vec<&str> = Vec::new();
    for set in per_mode {
        for l in set.system().labels() {
            if labels.contains(&l.as_str()) {
                return Err(Error::ModeCollision(l.clone()));
            }
            labels.push(l);
        }
    }
    let min_factor_cutoff = per_mode
        .iter()
        .map(|s| s.system().cutoff())
        .min()
        .unwrap();
    let joint_cutoff = cutoff.unwrap_or(min_factor_cutoff);
    if joint_cutoff > min_factor_cutoff {
        return Err(Error::InvalidParameter(format!(
            "joint cutoff {joint_cutoff} exceeds a factor cutoff {min_factor_cutoff}"
        )));
    }
    let joint = ModeSystem::new(&labels, joint_cutoff)?;
    let d = joint.dim();

    // Factor index decomposition of every joint basis element.
    let offsets: Vec<usize> = {
        let mut acc = 0;
        let mut v = Vec::with_capacity(per_mode.len());
        for set in per_mode {
            v.push(acc);
            acc += set.system().mode_count();
        }
        v
    };
    let factor_indices: Vec<Vec<usize>> = joint
        .basis()
        .iter()
        .map(|occ| {
            per_mode
                .iter()
                .zip(&offsets)
                .map(|(set, &off)| {
                    let block = &occ[off..off + set.system().mode_count()];
                    set.system().index_of(block).expect("within factor cutoff")
                })
                .collect()
        })
        .collect();

    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for set in per_mode {
        let mut next = Vec::with_capacity(combos.len() * set.len());
        for combo in &combos {
            for k in 0..set.len() {
                let mut c = combo.clone();
                c.push(k);
                next.push(c);
            }
        }
        combos = next;
    }

    let mut elements = Vec::new();
    let mut j_incorrect = 0usize;
    for combo in combos {
        let counts: Vec<usize> = combo
            .iter()
            .enumerate()
            .flat_map(|(f, &k)| per_mode[f].elements()[k].0.counts.clone())
            .collect();
        // Combinations whose count total exceeds the cutoff have no support
        // in the joint basis and can never fire; dropping them by counts
        // (not by entry values) keeps ideal and degraded sets aligned.
        if counts.iter().sum::<usize>() > joint_cutoff {
            continue;
        }
        let mut entries: Array2<Complex64> = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                let mut v = Complex64::new(1.0, 0.0);
                for (f, &k) in combo.iter().enumerate() {
                    let (_, op) = &per_mode[f].elements()[k];
                    v *= op.entries()[(factor_indices[i][f], factor_indices[j][f])];
                    if v == Complex64::ZERO {
                        break;
                    }
                }
                entries[(i, j)] = v;
            }
        }
        let op = HermitianOperator::new(joint.clone(), entries, OperatorRole::PomElement)?;
        elements.push((
            OutcomeLabel {
                counts,
                classification: Classification::Incorrect(j_incorrect),
            },
            op,
        ));
        j_incorrect += 1;
    }
    PomSet::new(joint, elements)
}

/// Forward count-transition probabilities and their retrodictive reading.
///
/// `forward[(l, m)]` is the predictive probability `P^p(l|m)` that pre-mixer
/// outcome `m` is registered as `l`; by the duality this equals the
/// retrodictive weight that result `l` corresponds to pre-mixer result `m`.
/// Columns are indexed by `m` and sum to one.
#[derive(Debug, Clone)]
pub struct RetroWeightTable {
    outcomes: Vec<Vec<usize>>,
    forward: Array2<f64>,
}

impl RetroWeightTable {
    pub fn outcomes(&self) -> &[Vec<usize>] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// `P^p(l|m)`.
    pub fn forward_probability(&self, l: usize, m: usize) -> f64 {
        self.forward[(l, m)]
    }

    /// Retrodictive weight that announced result `l` corresponds to
    /// pre-mixer result `m`; equals `P^p(l|m)`.
    pub fn retro_weight(&self, m: usize, l: usize) -> f64 {
        self.forward[(l, m)]
    }

    pub fn identity(outcomes: Vec<Vec<usize>>) -> Self {
        let n = outcomes.len();
        RetroWeightTable {
            outcomes,
            forward: Array2::eye(n),
        }
    }

    /// Builds a table from explicit forward probabilities, verifying that
    /// every column is a probability distribution.
    pub fn from_forward(outcomes: Vec<Vec<usize>>, forward: Array2<f64>) -> Result<Self> {
        let n = outcomes.len();
        if forward.nrows() != n || forward.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: forward.nrows().max(forward.ncols()),
            });
        }
        let tol = global_tol();
        for m in 0..n {
            let mut s = 0.0;
            for l in 0..n {
                if forward[(l, m)] < -tol {
                    return Err(Error::InvalidParameter(format!(
                        "negative transition probability at ({l}, {m})"
                    )));
                }
                s += forward[(l, m)];
            }
            if (s - 1.0).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "forward column {m} sums to {s}, not 1"
                )));
            }
        }
        Ok(RetroWeightTable { outcomes, forward })
    }
}

/// Expand each mixed POM element over the ideal (orthogonal) elements.
///
/// The coefficients are the retrodictive weights; a residual above `1e-8`
/// means the mixed element falls outside the ideal span and signals a
/// detector model this library does not cover.
pub fn retro_weights(mixed: &PomSet, ideal: &PomSet) -> Result<RetroWeightTable> {
    if mixed.system() != ideal.system() {
        return Err(Error::SystemMismatch);
    }
    if mixed.len() != ideal.len() {
        return Err(Error::InvalidParameter(format!(
            "outcome count mismatch: {} mixed vs {} ideal",
            mixed.len(),
            ideal.len()
        )));
    }
    for ((lm, _), (li, _)) in mixed.elements().iter().zip(ideal.elements()) {
        if lm.counts != li.counts {
            return Err(Error::InvalidParameter(
                "mixed and ideal outcome labels are not aligned".into(),
            ));
        }
    }
    let n = ideal.len();
    let d = ideal.system().dim();
    let norms: Vec<f64> = ideal
        .elements()
        .iter()
        .map(|(_, op)| op.trace_product(op).map(|z| z.re))
        .collect::<Result<_>>()?;
    let mut forward = Array2::zeros((n, n));
    for (l, (_, op_mixed)) in mixed.elements().iter().enumerate() {
        let mut coeffs = vec![0.0f64; n];
        for (m, (_, op_ideal)) in ideal.elements().iter().enumerate() {
            if norms[m] <= 0.0 {
                return Err(Error::InvalidParameter(
                    "ideal POM element has zero norm".into(),
                ));
            }
            coeffs[m] = op_ideal.trace_product(op_mixed)?.re / norms[m];
        }
        // residual of the expansion
        let mut recon: Array2<Complex64> = Array2::zeros((d, d));
        for (m, (_, op_ideal)) in ideal.elements().iter().enumerate() {
            recon += &op_ideal.entries().mapv(|z| z * Complex64::new(coeffs[m], 0.0));
        }
        let resid = (&recon - op_mixed.entries())
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        if resid > 1e-8 {
            return Err(Error::ExpansionResidual { residual: resid });
        }
        for m in 0..n {
            forward[(l, m)] = coeffs[m];
        }
    }
    // Eq. of total probability: every column sums to one.
    let tol = global_tol();
    for m in 0..n {
        let s: f64 = (0..n).map(|l| forward[(l, m)]).sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "retro weight column {m} sums to {s}, not 1"
            )));
        }
    }
    Ok(RetroWeightTable {
        outcomes: ideal
            .elements()
            .iter()
            .map(|(l, _)| l.counts.clone())
            .collect(),
        forward,
    })
}

/// Analytic forward transition probability of the loss channel: probability
/// that `m` photons register as `l` clicks at efficiency `eta`, with the top
/// outcome `l = cutoff` absorbing `cutoff` or more clicks.
pub fn loss_transition_probability(eta: f64, cutoff: usize, l: usize, m: usize) -> f64 {
    let exact = |l: usize| -> f64 {
        if l > m {
            0.0
        } else {
            binomial(m, l) * eta.powi(l as i32) * (1.0 - eta).powi((m - l) as i32)
        }
    };
    if l < cutoff {
        exact(l)
    } else {
        (cutoff..=m).map(exact).sum()
    }
}
