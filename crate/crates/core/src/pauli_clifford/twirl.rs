use super::clifford::clifford_group;
use super::pauli::{pauli_group, pauli_twirl_on, PauliOp};
use crate::error::{LabError, Result};
use crate::qstate::channel::{Channel, ChannelKind};
use crate::qstate::cq::CqState;
use crate::qstate::linalg::*;

fn qubits_of(state: &CqState, ids: &[&str]) -> Result<(Vec<usize>, usize)> {
    let mut t = vec![];
    let mut n = 0;
    for id in ids {
        let reg = state.layout().get(id)?;
        if !reg.is_quantum() || !reg.dim.is_power_of_two() {
            return Err(LabError::InvalidParameter(format!("`{id}` is not a qubit register")));
        }
        n += reg.size;
        t.push(state.layout().quantum_index(id)?);
    }
    Ok((t, n))
}

/// Uniform Pauli conjugation on `reg_a`; equals `U_A (x) rho_B`.
pub fn pauli_one_design_twirl(state: &CqState, reg_a: &[&str]) -> Result<CqState> {
    let (t, _) = qubits_of(state, reg_a)?;
    let dims = state.layout().quantum_dims();
    let branches = state.branches().iter().map(|(k, m)| (k.clone(), pauli_twirl_on(m, &dims, &t))).collect();
    CqState::new_unchecked(state.layout().clone(), branches)
}

/// `(1/|C|) sum_C (C^dagger P C) rho (C^dagger Q^dagger C)` on `reg_a` by
/// enumeration of the Clifford group (`|A| <= 2`).
pub fn clifford_pq_twirl(state: &CqState, reg_a: &[&str], p: &PauliOp, q: &PauliOp) -> Result<CqState> {
    let (t, n) = qubits_of(state, reg_a)?;
    if p.n != n || q.n != n {
        return Err(LabError::DimensionMismatch("Pauli length vs register".into()));
    }
    let group = clifford_group(n)?;
    let dims = state.layout().quantum_dims();
    let pm = p.matrix();
    let qm = q.matrix();
    let w = 1.0 / group.len() as f64;
    let mut out = std::collections::BTreeMap::new();
    for (k, rho) in state.branches() {
        let mut acc = zeros(rho.nrows(), rho.ncols());
        for c in group {
            let l = c.unitary.adjoint() * &pm * &c.unitary;
            let r = c.unitary.adjoint() * &qm * &c.unitary;
            let le = embed(&l, &dims, &t);
            let re = embed(&r, &dims, &t);
            acc += le * rho * re.adjoint();
        }
        out.insert(k.clone(), acc.scale(w));
    }
    CqState::new_unchecked(state.layout().clone(), out)
}

/// Closed form of the subgroup twirl: zero for `P != Q` (mod phase), `rho`
/// for `P = Q = I`, and `(d^2 U_A (x) rho_B - rho)/(d^2 - 1)` otherwise, with
/// the phase factor of `P Q^dagger` carried along.
pub fn clifford_pq_twirl_closed_form(state: &CqState, reg_a: &[&str], p: &PauliOp, q: &PauliOp) -> Result<CqState> {
    let (t, n) = qubits_of(state, reg_a)?;
    let dims = state.layout().quantum_dims();
    let d2 = (1usize << (2 * n)) as f64;
    let same_bits = p.x == q.x && p.z == q.z;
    let ph_p = [ONE, I, -ONE, -I][p.phase as usize];
    let ph_q = [ONE, I, -ONE, -I][q.phase as usize];
    let factor = ph_p * ph_q.conj();
    let mut out = std::collections::BTreeMap::new();
    for (k, rho) in state.branches() {
        let m = if !same_bits {
            zeros(rho.nrows(), rho.ncols())
        } else if p.is_identity_mod_phase() {
            rho * factor
        } else {
            let tw = pauli_twirl_on(rho, &dims, &t);
            (tw.scale(d2) - rho).unscale(d2 - 1.0) * factor
        };
        out.insert(k.clone(), m);
    }
    CqState::new_unchecked(state.layout().clone(), out)
}

/// Pauli-basis split of an attack on `A (x) E` (A first, `n_a` qubits):
/// `K_i = sum_Q Q (x) M_i^Q`.
pub fn pauli_components(attack: &Channel, n_a: usize) -> Vec<Vec<Mat>> {
    let da = 1usize << n_a;
    let de = attack.din() / da;
    let paulis = pauli_group(n_a);
    let dims = [da, de];
    paulis
        .iter()
        .map(|q| {
            let qd = q.matrix().adjoint();
            attack
                .kraus
                .iter()
                .map(|k| {
                    let prod = embed(&qd, &dims, &[0]) * k;
                    partial_trace(&prod, &dims, &[1]).unscale(da as f64)
                })
                .collect()
        })
        .collect()
}

/// Side-information decomposition of the Clifford-twirled attack.
#[derive(Clone, Debug)]
pub struct TwirlDecomposition {
    pub n_a: usize,
    /// CP map on E from the identity Pauli component.
    pub phi1: Channel,
    /// CP map on E from the non-identity Pauli components.
    pub phi2: Channel,
    /// `2 / (4^{|A|} - 1)`.
    pub residual_bound: f64,
}

pub fn twirl_with_side_info(attack: &Channel, n_a: usize) -> Result<TwirlDecomposition> {
    attack.validate(1e-8)?;
    if attack.kind != ChannelKind::Cptp {
        return Err(LabError::BadChannel { expected: "trace preserving", deviation: f64::NAN });
    }
    let da = 1usize << n_a;
    if attack.din() % da != 0 {
        return Err(LabError::DimensionMismatch("attack does not contain A".into()));
    }
    let de = attack.din() / da;
    let comps = pauli_components(attack, n_a);
    let phi1 = Channel::from_kraus_unchecked(comps[0].clone(), vec![de], vec![de], ChannelKind::Cp);
    let rest: Vec<Mat> = comps[1..].iter().flatten().cloned().collect();
    let phi2 = Channel::from_kraus_unchecked(rest, vec![de], vec![de], ChannelKind::Cp);
    let d2 = (da * da) as f64;
    Ok(TwirlDecomposition { n_a, phi1, phi2, residual_bound: 2.0 / (d2 - 1.0) })
}

impl TwirlDecomposition {
    /// `Phi1 (x) id_A + U_A (x) Phi2(Tr_A)` applied to `rho` on `[A, E, R]`
    /// (`R` an untouched reference of dimension `dr`).
    pub fn apply_approx(&self, rho: &Mat, dr: usize) -> Mat {
        let da = 1usize << self.n_a;
        let de = self.phi1.din();
        let dims = [da, de, dr];
        let first = apply_kraus_on(rho, &dims, &[1], &self.phi1.kraus);
        let red = partial_trace(rho, &dims, &[1, 2]);
        let second = apply_kraus_on(&red, &[de, dr], &[0], &self.phi2.kraus);
        first + maximally_mixed(da).kronecker(&second)
    }

    /// Exact Clifford-twirled attack from the 2-design identity: the
    /// approximation above minus `(Phi2 (x) id_A)/(d^2-1)` with the
    /// `U_A` term weighted `d^2/(d^2-1)`.
    pub fn apply_exact(&self, rho: &Mat, dr: usize) -> Mat {
        let da = 1usize << self.n_a;
        let de = self.phi1.din();
        let d2 = (da * da) as f64;
        let dims = [da, de, dr];
        let first = apply_kraus_on(rho, &dims, &[1], &self.phi1.kraus);
        let red = partial_trace(rho, &dims, &[1, 2]);
        let second = apply_kraus_on(&red, &[de, dr], &[0], &self.phi2.kraus);
        let third = apply_kraus_on(rho, &dims, &[1], &self.phi2.kraus);
        first + maximally_mixed(da).kronecker(&second).scale(d2 / (d2 - 1.0)) - third.unscale(d2 - 1.0)
    }
}

/// Exact Clifford average `E_C (C^dagger (x) I) attack((C (x) I) rho (C (x) I)^dagger) (C (x) I)`
/// by enumeration; `rho` on `[A, E, R]`.
pub fn clifford_twirled_attack(attack: &Channel, n_a: usize, rho: &Mat, dr: usize) -> Result<Mat> {
    let group = clifford_group(n_a)?;
    let da = 1usize << n_a;
    let de = attack.din() / da;
    let dims = [da, de, dr];
    let mut acc = zeros(rho.nrows(), rho.ncols());
    for c in group {
        let enc = apply_kraus_on(rho, &dims, &[0], std::slice::from_ref(&c.unitary));
        let att = apply_kraus_on(&enc, &dims, &[0, 1], &attack.kraus);
        acc += apply_kraus_on(&att, &dims, &[0], &[c.unitary.adjoint()]);
    }
    Ok(acc.unscale(group.len() as f64))
}

/// Checks `(M (x) I) Phi (M^dagger (x) I) = (I (x) M^T) Phi (I (x) conj(M))`
/// on the canonical purification of the maximally mixed state.
pub fn transpose_trick_check(m: &Mat) -> bool {
    let d = m.nrows();
    let phi = projector(&max_entangled(d));
    let id = identity(d);
    let lhs = m.kronecker(&id) * &phi * m.kronecker(&id).adjoint();
    let mt = m.transpose();
    let rhs = id.kronecker(&mt) * &phi * id.kronecker(&mt).adjoint();
    max_abs_diff(&lhs, &rhs) < 1e-9
}
