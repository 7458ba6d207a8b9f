//! The hypothetical exact flipper: phases `μ, ν`, three post-action machine
//! states, and the machine's linear extension to composite states.
//!
//! Only the Gram matrix of `|M₀⟩, |M_ψ⟩, |M_φ⟩` enters any observable, so the
//! machine lives in a three-dimensional space. The initial machine state is
//! never needed and is not modeled.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, inner, norm_sqr, CMatrix, StateVector, C64, ONE, ZERO};
use crate::tol;
use crate::triple::{FlipTriple, Which};

pub const MACHINE_DIM: usize = 3;

pub type MachineVector = [C64; MACHINE_DIM];

#[derive(Debug, Clone, PartialEq)]
pub struct MachineModel {
    mu: f64,
    nu: f64,
    gram: CMatrix,
    vectors: [MachineVector; 3],
}

impl MachineModel {
    /// Machine with the given phases and post-action overlaps
    /// `gram[(i, j)] = ⟨M_i|M_j⟩`, rows ordered `M₀, M_ψ, M_φ`.
    pub fn from_gram(mu: f64, nu: f64, gram: CMatrix) -> Result<Self> {
        let vectors = machine_from_gram(&gram)?;
        Ok(Self { mu, nu, gram, vectors })
    }

    /// Machine realized by explicit unit vectors; the Gram matrix is derived.
    pub fn from_vectors(mu: f64, nu: f64, vectors: [MachineVector; 3]) -> Result<Self> {
        for v in &vectors {
            let n = norm_sqr(v);
            if (n - 1.0).abs() > tol::NORM {
                return Err(Error::NotNormalized(n));
            }
        }
        let mut gram = CMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                gram[(i, j)] = inner(&vectors[i], &vectors[j]);
            }
        }
        Ok(Self { mu, nu, gram, vectors })
    }

    /// All machine states equal, no phases.
    pub fn trivial() -> Self {
        let e = [ONE, ZERO, ZERO];
        Self::from_vectors(0.0, 0.0, [e, e, e]).expect("unit vectors")
    }

    /// Mutually orthogonal machine states, no phases.
    pub fn identity_gram() -> Self {
        Self::from_vectors(
            0.0,
            0.0,
            [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]],
        )
        .expect("unit vectors")
    }

    /// `|M_ψ⟩ = -e^{-iμ}|M₀⟩`, `|M_φ⟩ = -e^{-iν}|M₀⟩` with `μ = ν = 0`: the
    /// machine that leaves the remote marginal untouched whenever the triple
    /// lies on a great circle.
    pub fn great_circle_witness() -> Self {
        let e = [ONE, ZERO, ZERO];
        let m = [-ONE, ZERO, ZERO];
        Self::from_vectors(0.0, 0.0, [e, m, m]).expect("unit vectors")
    }

    /// Uniform phases and Haar-random machine states, `M₀` gauge-fixed to `e₁`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let tau = std::f64::consts::TAU;
        let mu = rng.random::<f64>() * tau;
        let nu = rng.random::<f64>() * tau;
        let e = [ONE, ZERO, ZERO];
        let v1 = random_unit(rng);
        let v2 = random_unit(rng);
        Self::from_vectors(mu, nu, [e, v1, v2]).expect("unit vectors")
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn vectors(&self) -> &[MachineVector; 3] {
        &self.vectors
    }

    pub fn vector(&self, which: Which) -> &MachineVector {
        &self.vectors[which.index()]
    }

    /// `⟨M_i|M_j⟩`
    pub fn overlap(&self, i: Which, j: Which) -> C64 {
        self.gram[(i.index(), j.index())]
    }

    /// Phase picked up by input `which`: `1`, `e^{iμ}` or `e^{iν}`.
    pub fn phase(&self, which: Which) -> C64 {
        match which {
            Which::Zero => ONE,
            Which::Psi => C64::from_polar(1.0, self.mu),
            Which::Phi => C64::from_polar(1.0, self.nu),
        }
    }
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> MachineVector {
    loop {
        let v: MachineVector = std::array::from_fn(|_| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = norm_sqr(&v).sqrt();
        if n > 1e-6 {
            return v.map(|z| z / n);
        }
    }
}

/// Realizes a unit-diagonal PSD Gram matrix as three unit vectors in `C³`,
/// with `M₀` mapped onto the first basis vector.
pub fn machine_from_gram(gram: &CMatrix) -> Result<[MachineVector; 3]> {
    if gram.dim() != 3 {
        return Err(Error::InvalidGram(format!("expected 3×3, got {0}×{0}", gram.dim())));
    }
    let defect = gram.hermitian_defect();
    if defect > tol::HERMITIAN {
        return Err(Error::NotHermitian(defect));
    }
    for i in 0..3 {
        if (gram[(i, i)] - ONE).norm() > tol::DEFAULT {
            return Err(Error::InvalidGram(format!("diagonal entry {i} is {}", gram[(i, i)])));
        }
        for j in 0..3 {
            if gram[(i, j)].norm() > 1.0 + 1e-12 {
                return Err(Error::InvalidGram(format!(
                    "overlap ({i},{j}) has magnitude {}",
                    gram[(i, j)].norm()
                )));
            }
        }
    }
    let eig = hermitian_eigen(gram)?;
    if eig.values[0] < -tol::NEG_EIGEN {
        return Err(Error::GramNotPsd(eig.values[0]));
    }

    // G = V Λ V^H, so the columns of Λ^{1/2} V^H have Gram matrix G
    let mut cols = [[ZERO; 3]; 3];
    for (j, col) in cols.iter_mut().enumerate() {
        for (k, slot) in col.iter_mut().enumerate() {
            *slot = eig.vectors[(j, k)].conj() * eig.values[k].max(0.0).sqrt();
        }
    }

    let first = {
        let n = norm_sqr(&cols[0]).sqrt();
        cols[0].map(|z| z / n)
    };
    let frame = complete_frame(&first);
    let mut out = [[ZERO; 3]; 3];
    for (j, col) in cols.iter().enumerate() {
        for (r, row) in frame.iter().enumerate() {
            out[j][r] = inner(row, col);
        }
    }
    out[0] = [ONE, ZERO, ZERO];
    Ok(out)
}

/// Orthonormal basis of `C³` whose first element is `v`.
fn complete_frame(v: &MachineVector) -> [MachineVector; 3] {
    let mut frame = vec![*v];
    for k in 0..3 {
        if frame.len() == 3 {
            break;
        }
        let mut e = [ZERO; 3];
        e[k] = ONE;
        for f in &frame {
            let p = inner(f, &e);
            for i in 0..3 {
                e[i] -= f[i] * p;
            }
        }
        let n = norm_sqr(&e).sqrt();
        if n > 1e-6 {
            frame.push(e.map(|z| z / n));
        }
    }
    [frame[0], frame[1], frame[2]]
}

/// Serialized machine: `{mu, nu, gram: [[re, im]; 9]}` with the Gram matrix row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineJson {
    pub mu: f64,
    pub nu: f64,
    pub gram: Vec<[f64; 2]>,
}

impl From<&MachineModel> for MachineJson {
    fn from(m: &MachineModel) -> Self {
        Self {
            mu: m.mu,
            nu: m.nu,
            gram: m.gram.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MachineJson> for MachineModel {
    type Error = Error;
    fn try_from(j: MachineJson) -> Result<Self> {
        if j.gram.len() != 9 {
            return Err(Error::InvalidGram(format!("expected 9 entries, got {}", j.gram.len())));
        }
        let entries = j.gram.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        MachineModel::from_gram(j.mu, j.nu, CMatrix::from_row_major(3, entries))
    }
}

impl Serialize for MachineModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MachineJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MachineModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MachineJson::deserialize(d)?;
        MachineModel::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// All free parameters of one run: the three states and the machine.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipScenario {
    pub triple: FlipTriple,
    pub machine: MachineModel,
}

impl FlipScenario {
    pub fn new(triple: FlipTriple, machine: MachineModel) -> Result<Self> {
        triple.validate()?;
        Ok(Self { triple, machine })
    }
}

/// One term of a composite state: `coeff · (rest with member(tag) inserted at the target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedTerm {
    pub coeff: C64,
    pub rest: StateVector,
    pub tag: Which,
}

/// A composite state written as a formal sum whose target qubit carries one
/// of the three defined inputs in every term.
///
/// The decomposition over the non-orthogonal inputs is not unique, and the
/// machine's linear extension depends on it, so the caller fixes it.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedState {
    layout: Vec<usize>,
    target: usize,
    terms: Vec<TaggedTerm>,
}

impl TaggedState {
    pub fn new(layout: Vec<usize>, target: usize) -> Result<Self> {
        if target >= layout.len() {
            return Err(Error::InvalidFactors(format!(
                "target {target} out of range for layout {layout:?}"
            )));
        }
        if layout[target] != 2 {
            return Err(Error::TargetNotQubit(target));
        }
        Ok(Self {
            layout,
            target,
            terms: Vec::new(),
        })
    }

    pub fn layout(&self) -> &[usize] {
        &self.layout
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn terms(&self) -> &[TaggedTerm] {
        &self.terms
    }

    fn rest_layout(&self) -> Vec<usize> {
        let mut l = self.layout.clone();
        l.remove(self.target);
        l
    }

    pub fn push(&mut self, coeff: C64, rest: StateVector, tag: Which) -> Result<()> {
        let want = self.rest_layout();
        if rest.layout() != want.as_slice() {
            return Err(Error::InvalidFactors(format!(
                "term layout {:?} does not match {:?}",
                rest.layout(),
                want
            )));
        }
        self.terms.push(TaggedTerm { coeff, rest, tag });
        Ok(())
    }

    /// Adds a term whose target slot holds `ket`, which must be a scalar
    /// multiple of exactly one of the triple's members.
    pub fn push_ket(
        &mut self,
        coeff: C64,
        rest: StateVector,
        ket: &StateVector,
        triple: &FlipTriple,
    ) -> Result<()> {
        if ket.dim() != 2 {
            return Err(Error::TargetNotQubit(self.target));
        }
        let scale = ket.norm_sqr().sqrt();
        let mut found = None;
        for w in Which::ALL {
            let member = triple.member_ket(w);
            let proj = member.inner(ket);
            let resid = ket.add(&member.scaled(-proj))?.norm_sqr().sqrt();
            if resid <= tol::DEFAULT * scale.max(1.0) {
                if found.is_some() {
                    return Err(Error::AmbiguousInput);
                }
                found = Some((w, proj));
            }
        }
        let (tag, proj) = found.ok_or(Error::UndefinedInput)?;
        self.push(coeff * proj, rest, tag)
    }

    /// Linear combination `α·self + β·other`; both must share layout and target.
    pub fn combine(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        if self.layout != other.layout || self.target != other.target {
            return Err(Error::InvalidFactors("tagged states differ in layout".into()));
        }
        let mut terms: Vec<TaggedTerm> = self
            .terms
            .iter()
            .map(|t| TaggedTerm { coeff: t.coeff * alpha, ..t.clone() })
            .collect();
        terms.extend(other.terms.iter().map(|t| TaggedTerm { coeff: t.coeff * beta, ..t.clone() }));
        Ok(Self {
            layout: self.layout.clone(),
            target: self.target,
            terms,
        })
    }

    /// The actual vector `Σ coeff · rest ⊗_target member(tag)`.
    pub fn materialize(&self, triple: &FlipTriple) -> StateVector {
        let mut out = StateVector::zeros(self.layout.clone());
        for term in &self.terms {
            let ket = triple.member_amps(term.tag);
            self.scatter(out.amplitudes_mut(), term, &ket, None);
        }
        out
    }

    fn strides(&self) -> usize {
        self.layout[self.target + 1..].iter().product()
    }

    /// Adds `coeff · rest ⊗_target ket (⊗ machine)` into `dst`.
    fn scatter(
        &self,
        dst: &mut [C64],
        term: &TaggedTerm,
        ket: &[C64; 2],
        machine: Option<(&MachineVector, C64)>,
    ) {
        let inner_dim = self.strides();
        let (mvec, phase) = match machine {
            Some((v, p)) => (&v[..], p),
            None => (&[ONE][..], ONE),
        };
        let m_dim = mvec.len();
        for (ri, r) in term.rest.amplitudes().iter().enumerate() {
            if *r == ZERO {
                continue;
            }
            let (outer, inner) = (ri / inner_dim, ri % inner_dim);
            for (t, k) in ket.iter().enumerate() {
                let base = ((outer * 2 + t) * inner_dim + inner) * m_dim;
                let amp = term.coeff * phase * r * k;
                for (m, mv) in mvec.iter().enumerate() {
                    dst[base + m] += amp * mv;
                }
            }
        }
    }
}

/// Applies the flipper to the target qubit of every term:
/// `|x⟩ ↦ phase(x)·|x̄⟩ ⊗ |M_x⟩`, appending a three-dimensional machine factor.
/// The result is not renormalized; the machine need not be unitary.
pub fn apply_flip_channel(state: &TaggedState, scenario: &FlipScenario) -> StateVector {
    let mut layout = state.layout.clone();
    layout.push(MACHINE_DIM);
    let mut out = StateVector::zeros(layout);
    for term in &state.terms {
        let ket = scenario.triple.flip_amps(term.tag);
        let m = scenario.machine.vector(term.tag);
        let phase = scenario.machine.phase(term.tag);
        state.scatter(out.amplitudes_mut(), term, &ket, Some((m, phase)));
    }
    out
}
