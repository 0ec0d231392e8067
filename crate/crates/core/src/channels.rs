//! Passive linear-optical elements lifted to the truncated Fock space, and
//! the photon-loss channel in Kraus form.
//!
//! Loss is used retrodictively: detector POM elements are propagated
//! backwards through the attenuator (`Sum_k A_k^dag pi A_k`) instead of
//! evolving states forwards, so imperfect detection becomes a projection onto
//! mixed POM elements.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{HermitianOperator, ModeSystem, PureState};
use crate::tolerance::global_tol;

/// Which input port carries the pi phase change on reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreySide {
    ModeA,
    ModeB,
}

/// Port geometry of a beam splitter in the fixed-line circuit model.
///
/// `Through` keeps transmitted light on its line (one-photon block
/// `[[t, r], [-r, t]]` up to the grey-side sign).  `Crossed` routes
/// transmitted light onto the other line, so reflection amplitudes sit on
/// the diagonal (`[[r, t], [t, -r]]` up to the grey-side sign).  Both are
/// the same physical device; the flag records how its ports map onto the
/// circuit's mode lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Through,
    Crossed,
}

/// A beam splitter acting on two named modes.
#[derive(Debug, Clone)]
pub struct BeamSplitterSpec {
    pub mode_a: String,
    pub mode_b: String,
    /// Reflectivity `R = |r|^2` in `[0, 1]`.
    pub reflectivity: f64,
    pub grey_side: GreySide,
    pub orientation: Orientation,
}

impl BeamSplitterSpec {
    pub fn through(mode_a: &str, mode_b: &str, reflectivity: f64, grey_side: GreySide) -> Self {
        BeamSplitterSpec {
            mode_a: mode_a.into(),
            mode_b: mode_b.into(),
            reflectivity,
            grey_side,
            orientation: Orientation::Through,
        }
    }

    pub fn crossed(mode_a: &str, mode_b: &str, reflectivity: f64, grey_side: GreySide) -> Self {
        BeamSplitterSpec {
            mode_a: mode_a.into(),
            mode_b: mode_b.into(),
            reflectivity,
            grey_side,
            orientation: Orientation::Crossed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.reflectivity) {
            return Err(Error::InvalidParameter(format!(
                "reflectivity {} outside [0, 1]",
                self.reflectivity
            )));
        }
        if self.mode_a == self.mode_b {
            return Err(Error::ModeCollision(self.mode_a.clone()));
        }
        Ok(())
    }

    /// The 2x2 one-photon block on `{|1,0>, |0,1>}`.
    pub fn one_photon_block(&self) -> [[Complex64; 2]; 2] {
        let r = self.reflectivity.sqrt();
        let t = (1.0 - self.reflectivity).sqrt();
        let c = |x: f64| Complex64::new(x, 0.0);
        match self.orientation {
            // Reflection a->b is -r when the grey coating faces port a.
            Orientation::Through => match self.grey_side {
                GreySide::ModeA => [[c(t), c(r)], [c(-r), c(t)]],
                GreySide::ModeB => [[c(t), c(-r)], [c(r), c(t)]],
            },
            // Reflections stay on-line; the grey-facing one carries the sign.
            Orientation::Crossed => match self.grey_side {
                GreySide::ModeA => [[c(-r), c(t)], [c(t), c(r)]],
                GreySide::ModeB => [[c(r), c(t)], [c(t), c(-r)]],
            },
        }
    }
}

/// One entry of a circuit's element list.
#[derive(Debug, Clone)]
pub enum Element {
    BeamSplitter(BeamSplitterSpec),
    /// `|n> -> exp(i n phase) |n>` on one mode.
    PhaseShift { mode: String, phase: f64 },
}

/// An ordered list of passive elements plus a detection specification.
#[derive(Debug, Clone)]
pub struct Circuit {
    system: Arc<ModeSystem>,
    elements: Vec<Element>,
    detection_modes: Vec<String>,
    output_modes: Vec<String>,
}

impl Circuit {
    pub fn new(
        system: Arc<ModeSystem>,
        elements: Vec<Element>,
        detection_modes: &[&str],
    ) -> Result<Self> {
        for el in &elements {
            match el {
                Element::BeamSplitter(spec) => {
                    spec.validate()?;
                    system.mode_position(&spec.mode_a)?;
                    system.mode_position(&spec.mode_b)?;
                }
                Element::PhaseShift { mode, .. } => {
                    system.mode_position(mode)?;
                }
            }
        }
        let mut det = Vec::with_capacity(detection_modes.len());
        for label in detection_modes {
            system.mode_position(label)?;
            if det.contains(&label.to_string()) {
                return Err(Error::ModeCollision((*label).into()));
            }
            det.push((*label).to_string());
        }
        let output_modes = system
            .labels()
            .iter()
            .filter(|l| !det.contains(l))
            .cloned()
            .collect();
        Ok(Circuit {
            system,
            elements,
            detection_modes: det,
            output_modes,
        })
    }

    pub fn system(&self) -> &Arc<ModeSystem> {
        &self.system
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn detection_modes(&self) -> &[String] {
        &self.detection_modes
    }

    pub fn output_modes(&self) -> &[String] {
        &self.output_modes
    }

    pub fn detection_positions(&self) -> Vec<usize> {
        self.detection_modes
            .iter()
            .map(|l| self.system.mode_position(l).unwrap())
            .collect()
    }

    /// The full unitary of the element list, rightmost factor first.
    pub fn total_unitary(&self) -> Result<Array2<Complex64>> {
        let mut u = Array2::eye(self.system.dim());
        for el in &self.elements {
            let step = element_unitary(&self.system, el)?;
            u = step.dot(&u);
        }
        Ok(u)
    }
}

fn element_unitary(system: &Arc<ModeSystem>, element: &Element) -> Result<Array2<Complex64>> {
    match element {
        Element::BeamSplitter(spec) => beam_splitter_unitary(system, spec),
        Element::PhaseShift { mode, phase } => {
            let pos = system.mode_position(mode)?;
            let d = system.dim();
            let mut u = Array2::zeros((d, d));
            for (i, occ) in system.basis().iter().enumerate() {
                let n = occ[pos] as f64;
                u[(i, i)] = Complex64::from_polar(1.0, n * phase);
            }
            Ok(u)
        }
    }
}

/// Lift a beam splitter to the truncated Fock space of `system`.
///
/// The lift acts per total-photon sector via the standard combinatorial
/// transformation of creation-operator monomials; it is block-diagonal in
/// total photon number and unitary on the truncated space.
pub fn beam_splitter_unitary(
    system: &Arc<ModeSystem>,
    spec: &BeamSplitterSpec,
) -> Result<Array2<Complex64>> {
    spec.validate()?;
    let pa = system.mode_position(&spec.mode_a)?;
    let pb = system.mode_position(&spec.mode_b)?;
    let block = spec.one_photon_block();
    let d = system.dim();
    let mut u = Array2::zeros((d, d));
    for (j, occ) in system.basis().iter().enumerate() {
        let na = occ[pa];
        let nb = occ[pb];
        let total = na + nb;
        let mut target = occ.clone();
        for p in 0..=total {
            let q = total - p;
            target[pa] = p;
            target[pb] = q;
            let i = system
                .index_of(&target)
                .expect("photon-conserving image stays in the truncated basis");
            u[(i, j)] = two_mode_amplitude(&block, na, nb, p);
        }
    }
    Ok(u)
}

/// `<p, q| U |na, nb>` for a two-mode passive element with the given
/// one-photon block, with `q = na + nb - p`.
fn two_mode_amplitude(block: &[[Complex64; 2]; 2], na: usize, nb: usize, p: usize) -> Complex64 {
    let q = na + nb - p;
    let lo = p.saturating_sub(nb);
    let hi = p.min(na);
    let mut acc = Complex64::ZERO;
    for i in lo..=hi {
        let j = p - i;
        let term = Complex64::new(binomial(na, i) * binomial(nb, j), 0.0)
            * block[0][0].powu(i as u32)
            * block[1][0].powu((na - i) as u32)
            * block[0][1].powu(j as u32)
            * block[1][1].powu((nb - j) as u32);
        acc += term;
    }
    acc * Complex64::new(
        (factorial(p) * factorial(q) / (factorial(na) * factorial(nb))).sqrt(),
        0.0,
    )
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Run a pure state through the circuit's element list.
pub fn apply_circuit(circuit: &Circuit, input: &PureState) -> Result<PureState> {
    if input.system() != circuit.system() {
        return Err(Error::SystemMismatch);
    }
    let mut amps: Array1<Complex64> = input.amplitudes().clone();
    for el in circuit.elements() {
        let u = element_unitary(circuit.system(), el)?;
        amps = u.dot(&amps);
    }
    PureState::from_amplitudes(circuit.system().clone(), amps)
}

/// A quantum channel on one mode in Kraus form.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    operators: Vec<Array2<Complex64>>,
    dim: usize,
    label: String,
}

impl KrausChannel {
    /// Builds the channel and verifies trace preservation
    /// `Sum_k A_k^dag A_k = 1`.
    pub fn new(operators: Vec<Array2<Complex64>>, label: &str) -> Result<Self> {
        let dim = operators
            .first()
            .map(|a| a.ncols())
            .ok_or_else(|| Error::InvalidParameter("empty Kraus list".into()))?;
        for a in &operators {
            if a.nrows() != dim || a.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.nrows().max(a.ncols()),
                });
            }
        }
        let mut sum: Array2<Complex64> = Array2::zeros((dim, dim));
        for a in &operators {
            for i in 0..dim {
                for j in 0..dim {
                    let mut acc = Complex64::ZERO;
                    for k in 0..dim {
                        acc += a[(k, i)].conj() * a[(k, j)];
                    }
                    sum[(i, j)] += acc;
                }
            }
        }
        let tol = global_tol();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let expect = if i == j { 1.0 } else { 0.0 };
                let dev = (sum[(i, j)] - Complex64::new(expect, 0.0)).norm();
                worst = worst.max(dev);
            }
        }
        if worst > tol {
            return Err(Error::InvalidParameter(format!(
                "Kraus completeness violated by {worst:.3e} for {label}"
            )));
        }
        Ok(KrausChannel {
            operators,
            dim,
            label: label.into(),
        })
    }

    pub fn operators(&self) -> &[Array2<Complex64>] {
        &self.operators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Predictive application: `rho -> Sum_k A_k rho A_k^dag`.
    pub fn forward(&self, rho: &HermitianOperator) -> Result<HermitianOperator> {
        let out = self.sandwich(rho, false)?;
        HermitianOperator::new(rho.system().clone(), out, rho.role())
    }

    /// Retrodictive (Heisenberg-dual) application:
    /// `pi -> Sum_k A_k^dag pi A_k`.
    pub fn retro_propagate(&self, pom_element: &HermitianOperator) -> Result<HermitianOperator> {
        let out = self.sandwich(pom_element, true)?;
        HermitianOperator::new(pom_element.system().clone(), out, pom_element.role())
    }

    fn sandwich(&self, op: &HermitianOperator, dual: bool) -> Result<Array2<Complex64>> {
        let d = op.system().dim();
        if d != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: d,
            });
        }
        let mut out: Array2<Complex64> = Array2::zeros((d, d));
        for a in &self.operators {
            let adag = a.t().mapv(|z| z.conj());
            let term = if dual {
                adag.dot(op.entries()).dot(a)
            } else {
                a.dot(op.entries()).dot(&adag)
            };
            out += &term;
        }
        Ok(out)
    }
}

/// Photon loss with transmission `eta`, modelling a detector of that quantum
/// efficiency as an attenuator in front of a perfect counter.
///
/// `A_k = Sum_n sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k><n|` for
/// `k = 0..=cutoff`; identically zero operators are dropped.
pub fn loss_kraus(eta: f64, cutoff: usize) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!(
            "quantum efficiency {eta} outside [0, 1]"
        )));
    }
    let dim = cutoff + 1;
    let mut ops = Vec::new();
    for k in 0..dim {
        let mut a: Array2<Complex64> = Array2::zeros((dim, dim));
        let mut nonzero = false;
        for n in k..dim {
            let w = binomial(n, k) * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32);
            if w > 0.0 {
                a[(n - k, n)] = Complex64::new(w.sqrt(), 0.0);
                nonzero = true;
            }
        }
        if nonzero {
            ops.push(a);
        }
    }
    KrausChannel::new(ops, &format!("loss({eta})"))
}
