use super::local::{LocalMap, ShareShape};
use super::{combined_layout, Adversary};
use crate::error::{LabError, Result};
use crate::qcodes::scheme::{encode_message, CodingScheme, OUTPUT};
use crate::qstate::linalg::*;
use crate::qstate::{Channel, ChannelKind, CqState, Register, RegisterLayout};

fn rename_suffix(s: &CqState, suffix: &str) -> Result<CqState> {
    s.renamed(|r| Register { id: format!("{}{suffix}", r.id), ..r.clone() })
}

/// Code state of `psi` with registers in code-layout order.
fn encoded(code: &dyn CodingScheme, psi: &Vector) -> Result<CqState> {
    let s = encode_message(code, &projector(psi))?;
    let ids = code.code_layout().ids();
    let order: Vec<&str> = ids.iter().map(String::as_str).collect();
    s.reorder(&order)
}

/// Unitary swapping the quantum factors and table swapping the classical
/// digits named by `pairs` within a share.
fn pair_swap(shape: &ShareShape, pairs: &[(String, String)]) -> Result<(Mat, Vec<u64>)> {
    let find = |list: &[String], id: &str| list.iter().position(|x| x == id);
    let mut qperm: Vec<usize> = (0..shape.quantum.len()).collect();
    let mut cperm: Vec<usize> = (0..shape.classical.len()).collect();
    for (a, b) in pairs {
        match (find(&shape.quantum, a), find(&shape.quantum, b)) {
            (Some(i), Some(j)) => qperm.swap(i, j),
            _ => match (find(&shape.classical, a), find(&shape.classical, b)) {
                (Some(i), Some(j)) => cperm.swap(i, j),
                _ => return Err(LabError::UnknownRegister(format!("{a}/{b}"))),
            },
        }
    }
    let d = shape.qdim();
    let mut u = zeros(d, d);
    for x in 0..d {
        let dg = digits(x, &shape.quantum_dims);
        let nd: Vec<usize> = qperm.iter().map(|&k| dg[k]).collect();
        let y = nd.iter().zip(&shape.quantum_dims).fold(0, |acc, (v, dd)| acc * dd + v);
        u[(y, x)] = r(1.0);
    }
    let nv = shape.cvalues();
    let table = (0..nv)
        .map(|v| {
            let dg = digits(v, &shape.classical_dims);
            let nd: Vec<usize> = cperm.iter().map(|&k| dg[k]).collect();
            nd.iter().zip(&shape.classical_dims).fold(0u64, |acc, (v, dd)| acc * *dd as u64 + *v as u64)
        })
        .collect();
    Ok((u, table))
}

/// Pre-shares a code state of `fixed` and swaps every share with its copy;
/// the decoder then sees `fixed` whatever was encoded. With `budgets` the
/// ancilla is checked against the per-share limits.
pub fn substitution_attack(code: &dyn CodingScheme, fixed: &Vector, budgets: Option<&[usize]>) -> Result<Adversary> {
    let layout = code.code_layout();
    let anc = rename_suffix(&encoded(code, fixed)?, "~")?;
    let full = combined_layout(&layout, Some(&anc))?;
    let mut maps = vec![];
    for s in layout.shares() {
        let shape = ShareShape::of(&full, s);
        let pairs: Vec<(String, String)> = layout
            .registers()
            .iter()
            .filter(|r| r.share == s)
            .map(|r| (r.id.clone(), format!("{}~", r.id)))
            .collect();
        let (u, table) = pair_swap(&shape, &pairs)?;
        let ch = Channel::unitary(u, shape.quantum_dims.clone())?;
        maps.push(if shape.classical.is_empty() { LocalMap::quantum_only(&shape, ch) } else { LocalMap::relabel(&shape, &table, &[ch])? });
    }
    match budgets {
        Some(b) => Adversary::build_lo_bounded(&layout, maps, Some(anc), b),
        None => Adversary::build_lo_star(&layout, maps, Some(anc)),
    }
}

fn is_projector(pi: &Mat, tol: f64) -> bool {
    max_abs_diff(pi, &pi.adjoint()) < tol && max_abs_diff(&(pi * pi), pi) < tol
}

/// Reflection `I - 2 Pi` on the quantum registers of one share.
pub fn swap_attack(code: &dyn CodingScheme, share: usize, pi: &Mat) -> Result<Adversary> {
    let layout = code.code_layout();
    let shape = ShareShape::of(&layout, share);
    if shape.quantum.is_empty() && shape.classical.is_empty() {
        return Err(LabError::InvalidParameter(format!("share {share} is not part of the code")));
    }
    if pi.nrows() != shape.qdim() || pi.ncols() != shape.qdim() || !is_projector(pi, 1e-9) {
        return Err(LabError::InvalidParameter(format!("distinguisher is not a projector on share {share}")));
    }
    let u = identity(shape.qdim()) - pi.scale(2.0);
    let maps = layout
        .shares()
        .iter()
        .map(|&s| {
            let sh = ShareShape::of(&layout, s);
            if s == share {
                Ok(LocalMap::quantum_only(&sh, Channel::unitary(u.clone(), sh.quantum_dims.clone())?))
            } else {
                Ok(LocalMap::identity(&sh))
            }
        })
        .collect::<Result<_>>()?;
    Adversary::build_lo(&layout, maps)
}

fn two_shares(layout: &RegisterLayout) -> Result<(usize, usize)> {
    match layout.shares().as_slice() {
        [a, b] => Ok((*a, *b)),
        s => Err(LabError::InvalidParameter(format!("needs a 2-split code, got {} shares", s.len()))),
    }
}

/// Marginal of a code state on one share, as `(classical value, operator)`.
fn share_marginal(state: &CqState, shape: &ShareShape) -> Result<Vec<(u64, Mat)>> {
    let mut ids: Vec<&str> = shape.quantum.iter().map(String::as_str).collect();
    ids.extend(shape.classical.iter().map(String::as_str));
    let m = state.tensor_and_trace(&ids)?;
    let cids: Vec<&str> = m.layout().classical().map(|r| r.id.as_str()).collect();
    // Classical digits in shape order.
    let pos: Vec<usize> = shape.classical.iter().map(|id| cids.iter().position(|c| c == id).unwrap()).collect();
    let qorder: Vec<usize> = shape.quantum.iter().map(|id| m.layout().quantum_index(id)).collect::<Result<_>>()?;
    let qd = m.layout().quantum_dims();
    Ok(m.branches()
        .iter()
        .map(|(k, op)| {
            let v = pos.iter().zip(&shape.classical_dims).fold(0u64, |acc, (&p, &d)| acc * d as u64 + k[p]);
            (v, if qorder.len() > 1 { permute_factors(op, &qd, &qorder) } else { op.clone() })
        })
        .collect())
}

fn marginal_at(m: &[(u64, Mat)], v: u64, d: usize) -> Mat {
    m.iter().find(|(c, _)| *c == v).map(|(_, o)| o.clone()).unwrap_or_else(|| zeros(d, d))
}

/// `X -> Tr(Pi X) sigma` with `sigma` possibly subnormalized.
pub fn measure_prepare(pi: &Mat, sigma: &Mat) -> Channel {
    let (pv, pvec) = eigh(pi);
    let (sv, svec) = eigh(sigma);
    let (din, dout) = (pi.nrows(), sigma.nrows());
    let mut kraus = vec![];
    for (i, &pe) in pv.iter().enumerate() {
        if pe < 0.5 {
            continue;
        }
        let f = pvec.column(i).into_owned();
        for (j, &se) in sv.iter().enumerate() {
            if se <= 1e-14 {
                continue;
            }
            let e = svec.column(j).into_owned();
            kraus.push((&e * f.adjoint()).scale(se.sqrt()));
        }
    }
    if kraus.is_empty() {
        kraus.push(zeros(dout, din));
    }
    Channel::from_kraus_unchecked(kraus, vec![din], vec![dout], ChannelKind::Cp)
}

/// Helstrom projectors (guess 0, guess 1) per classical value of a share.
fn helstrom(m0: &[(u64, Mat)], m1: &[(u64, Mat)], shape: &ShareShape) -> Vec<(Mat, Mat)> {
    let d = shape.qdim();
    (0..shape.cvalues() as u64)
        .map(|v| {
            let diff = marginal_at(m0, v, d) - marginal_at(m1, v, d);
            let p0 = herm_map(&diff, |x| if x > 1e-12 { 1.0 } else { 0.0 });
            let p1 = identity(d) - &p0;
            (p0, p1)
        })
        .collect()
}

/// Outcome of the measure-and-prepare attack on a 2-split code.
#[derive(Clone, Debug)]
pub struct Lambda2 {
    pub adversary: Adversary,
    /// `||rho_L^0 - rho_L^1||_1` for the left marginals.
    pub delta_l: f64,
}

/// The right share is replaced by its marginal for message `r`; the left
/// share is measured with the Helstrom test for `psi0` vs `psi1` and
/// replaced by the left marginal for `guess xor l`.
pub fn lambda2_attack(code: &dyn CodingScheme, psi0: &Vector, psi1: &Vector, r: usize, l: usize) -> Result<Lambda2> {
    let layout = code.code_layout();
    let (sl, sr) = two_shares(&layout)?;
    let (shl, shr) = (ShareShape::of(&layout, sl), ShareShape::of(&layout, sr));
    let e = [encoded(code, psi0)?, encoded(code, psi1)?];
    let ml = [share_marginal(&e[0], &shl)?, share_marginal(&e[1], &shl)?];
    let mr = share_marginal(&e[r & 1], &shr)?;
    let delta_l: f64 = (0..shl.cvalues() as u64)
        .map(|v| trace_norm_herm(&(marginal_at(&ml[0], v, shl.qdim()) - marginal_at(&ml[1], v, shl.qdim()))))
        .sum();

    let right = LocalMap {
        quantum: shr.quantum.clone(),
        classical: shr.classical.clone(),
        rules: vec![mr
            .iter()
            .map(|(c, op)| (Some(*c), Channel::replacement(op, shr.quantum_dims.clone(), shr.quantum_dims.clone())))
            .collect()],
    };
    let h = helstrom(&ml[0], &ml[1], &shl);
    let rules = h
        .iter()
        .map(|(p0, p1)| {
            let mut out = vec![];
            for (guess, pi) in [(0usize, p0), (1, p1)] {
                for (c, sigma) in &ml[(guess ^ l) & 1] {
                    out.push((Some(*c), measure_prepare(pi, sigma)));
                }
            }
            out
        })
        .collect();
    let left = LocalMap { quantum: shl.quantum.clone(), classical: shl.classical.clone(), rules };
    let maps = if sl < sr { vec![left, right] } else { vec![right, left] };
    Ok(Lambda2 { adversary: Adversary::build_lo(&layout, maps)?, delta_l })
}

/// Pre-shares code states of both messages. The left party runs the
/// Helstrom test on its share and swaps in the left half of the copy of the
/// other message; the right party swaps in the right half of a uniformly
/// chosen copy.
pub fn lambda1_attack(code: &dyn CodingScheme, psi0: &Vector, psi1: &Vector) -> Result<Adversary> {
    let layout = code.code_layout();
    let (sl, sr) = two_shares(&layout)?;
    let e0 = encoded(code, psi0)?;
    let e1 = encoded(code, psi1)?;
    let shl = ShareShape::of(&layout, sl);
    let h = helstrom(&share_marginal(&e0, &shl)?, &share_marginal(&e1, &shl)?, &shl);
    let anc = rename_suffix(&e0, "~0")?.tensor(&rename_suffix(&e1, "~1")?)?;
    let full = combined_layout(&layout, Some(&anc))?;
    let pairs = |s: usize, copy: usize| -> Vec<(String, String)> {
        layout.registers().iter().filter(|r| r.share == s).map(|r| (r.id.clone(), format!("{}~{copy}", r.id))).collect()
    };

    let fl = ShareShape::of(&full, sl);
    let swaps_l = [pair_swap(&fl, &pairs(sl, 0))?, pair_swap(&fl, &pairs(sl, 1))?];
    let code_q: Vec<usize> = shl.quantum.iter().map(|id| fl.quantum.iter().position(|x| x == id).unwrap()).collect();
    let code_c: Vec<usize> = shl.classical.iter().map(|id| fl.classical.iter().position(|x| x == id).unwrap()).collect();
    let mut rules = vec![];
    for v in 0..fl.cvalues() {
        let dg = digits(v, &fl.classical_dims);
        let c = code_c.iter().zip(&shl.classical_dims).fold(0usize, |acc, (&p, &d)| acc * d + dg[p]);
        let (p0, p1) = &h[c];
        let mut out = vec![];
        for (guess, pi) in [(0usize, p0), (1, p1)] {
            let (u, table) = &swaps_l[1 - guess];
            let k = u * embed(pi, &fl.quantum_dims, &code_q);
            out.push((Some(table[v]), Channel::from_kraus_unchecked(vec![k], fl.quantum_dims.clone(), fl.quantum_dims.clone(), ChannelKind::Cp)));
        }
        rules.push(out);
    }
    let left = LocalMap { quantum: fl.quantum.clone(), classical: fl.classical.clone(), rules };

    let fr = ShareShape::of(&full, sr);
    let mut rules = vec![];
    let swaps_r = [pair_swap(&fr, &pairs(sr, 0))?, pair_swap(&fr, &pairs(sr, 1))?];
    for v in 0..fr.cvalues() {
        rules.push(
            swaps_r
                .iter()
                .map(|(u, table)| {
                    (Some(table[v]), Channel::from_kraus_unchecked(vec![u.scale(0.5f64.sqrt())], fr.quantum_dims.clone(), fr.quantum_dims.clone(), ChannelKind::Cp))
                })
                .collect(),
        );
    }
    let right = LocalMap { quantum: fr.quantum.clone(), classical: fr.classical.clone(), rules };
    let maps = if sl < sr { vec![left, right] } else { vec![right, left] };
    Adversary::build_lo_star(&layout, maps, Some(anc))
}

/// Quantities of the convex decomposition produced by the measure-and-
/// prepare attack for one `(r, l)`.
#[derive(Clone, Debug)]
pub struct Lambda2Check {
    pub delta_l: f64,
    /// `||sigma_0 - sigma_1||_1` where `sigma_b` is the output for message
    /// `b` minus `delta_l / 2` times the decoded product of marginals.
    pub remainder_gap: f64,
    pub remainder_min_eig: f64,
    pub remainder_trace: f64,
}

/// Checks that `Dec(Lambda(Enc(psi_b))) - (delta_l / 2) Dec(rho_L^{b xor l}
/// (x) rho_R^r)` does not depend on `b`, is positive and has trace
/// `1 - delta_l / 2`.
pub fn lambda2_check(code: &dyn CodingScheme, psi0: &Vector, psi1: &Vector, r: usize, l: usize) -> Result<Lambda2Check> {
    let lam = lambda2_attack(code, psi0, psi1, r, l)?;
    let layout = code.code_layout();
    let (sl, sr) = two_shares(&layout)?;
    let psis = [psi0, psi1];
    let e = [encoded(code, psi0)?, encoded(code, psi1)?];
    let idl: Vec<String> = layout.registers().iter().filter(|x| x.share == sl).map(|x| x.id.clone()).collect();
    let idr: Vec<String> = layout.registers().iter().filter(|x| x.share == sr).map(|x| x.id.clone()).collect();
    let ids = layout.ids();
    let order: Vec<&str> = ids.iter().map(String::as_str).collect();
    let mut rem = vec![];
    for b in 0..2 {
        let out = crate::qcodes::scheme::tampered_output(code, Some(&lam.adversary), &projector(psis[b]))?;
        let lm = e[(b ^ l) & 1].tensor_and_trace(&idl.iter().map(String::as_str).collect::<Vec<_>>())?;
        let rm = e[r & 1].tensor_and_trace(&idr.iter().map(String::as_str).collect::<Vec<_>>())?;
        let prod = lm.tensor(&rm)?.reorder(&order)?;
        let dec = code.decode(&prod)?.tensor_and_trace(&[OUTPUT])?.quantum_part();
        rem.push(out - dec.scale(lam.delta_l / 2.0));
    }
    Ok(Lambda2Check {
        delta_l: lam.delta_l,
        remainder_gap: trace_norm_herm(&(&rem[0] - &rem[1])),
        remainder_min_eig: min_eigenvalue(&rem[0]).min(min_eigenvalue(&rem[1])),
        remainder_trace: rem[0].trace().re,
    })
}
