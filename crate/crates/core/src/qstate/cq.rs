use std::collections::BTreeMap;

use super::channel::Channel;
use super::layout::{Register, RegisterLayout};
use super::linalg::*;
use crate::error::{LabError, Result};

pub const STATE_TOL: f64 = 1e-9;

/// Classical assignment: one value per classical register, in layout order.
pub type Assignment = Vec<u64>;

/// Hybrid classical-quantum state. Each classical assignment maps to a
/// subnormalized operator over the quantum registers (layout order).
#[derive(Clone, Debug)]
pub struct CqState {
    layout: RegisterLayout,
    branches: BTreeMap<Assignment, Mat>,
}

impl CqState {
    /// Builds and validates (PSD per branch, unit total trace).
    pub fn new(layout: RegisterLayout, branches: BTreeMap<Assignment, Mat>) -> Result<Self> {
        let s = Self::new_unchecked(layout, branches)?;
        s.validate(STATE_TOL)?;
        Ok(s)
    }

    /// Checks shapes only; used for subnormalized intermediate objects.
    pub fn new_unchecked(layout: RegisterLayout, branches: BTreeMap<Assignment, Mat>) -> Result<Self> {
        let d = layout.quantum_dim();
        let nc = layout.classical().count();
        let cdims: Vec<usize> = layout.classical().map(|r| r.dim).collect();
        for (k, m) in &branches {
            if k.len() != nc {
                return Err(LabError::LayoutMismatch(format!("assignment has {} entries, expected {}", k.len(), nc)));
            }
            for (v, dim) in k.iter().zip(&cdims) {
                if *v as usize >= *dim {
                    return Err(LabError::LayoutMismatch(format!("classical value {v} out of range {dim}")));
                }
            }
            if m.nrows() != d || m.ncols() != d {
                return Err(LabError::DimensionMismatch(format!("branch operator {}x{}, expected {d}", m.nrows(), m.ncols())));
            }
        }
        Ok(CqState { layout, branches })
    }

    /// Purely quantum state on a layout without classical registers.
    pub fn quantum(layout: RegisterLayout, rho: Mat) -> Result<Self> {
        let nc = layout.classical().count();
        if nc != 0 {
            return Err(LabError::LayoutMismatch("layout has classical registers".into()));
        }
        let mut b = BTreeMap::new();
        b.insert(vec![], rho);
        Self::new(layout, b)
    }

    pub fn pure(layout: RegisterLayout, psi: &Vector) -> Result<Self> {
        Self::quantum(layout, projector(psi))
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn branches(&self) -> &BTreeMap<Assignment, Mat> {
        &self.branches
    }

    pub fn into_branches(self) -> BTreeMap<Assignment, Mat> {
        self.branches
    }

    pub fn trace(&self) -> f64 {
        self.branches.values().map(|m| m.trace().re).sum()
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        for m in self.branches.values() {
            let me = min_eigenvalue(m);
            if me < -tol {
                return Err(LabError::NotPsd(me));
            }
        }
        let t = self.trace();
        if (t - 1.0).abs() > tol.max(1e-9) {
            return Err(LabError::BadTrace(t));
        }
        Ok(())
    }

    /// Collapses all branches into one quantum operator (classical data dropped).
    pub fn quantum_part(&self) -> Mat {
        let d = self.layout.quantum_dim();
        let mut out = zeros(d, d);
        for m in self.branches.values() {
            out += m;
        }
        out
    }

    /// Marginal on `keep`; classical registers outside `keep` are summed out.
    pub fn tensor_and_trace(&self, keep: &[&str]) -> Result<Self> {
        let new_layout = self.layout.restrict(keep)?;
        let qdims = self.layout.quantum_dims();
        let qkeep: Vec<usize> = self
            .layout
            .quantum()
            .enumerate()
            .filter(|(_, r)| keep.contains(&r.id.as_str()))
            .map(|(i, _)| i)
            .collect();
        let ckeep: Vec<usize> = self
            .layout
            .classical()
            .enumerate()
            .filter(|(_, r)| keep.contains(&r.id.as_str()))
            .map(|(i, _)| i)
            .collect();
        let mut out: BTreeMap<Assignment, Mat> = BTreeMap::new();
        for (k, m) in &self.branches {
            let nk: Assignment = ckeep.iter().map(|&i| k[i]).collect();
            let pm = if qkeep.len() == qdims.len() { m.clone() } else { partial_trace(m, &qdims, &qkeep) };
            match out.get_mut(&nk) {
                Some(acc) => *acc += pm,
                None => {
                    out.insert(nk, pm);
                }
            }
        }
        Self::new_unchecked(new_layout, out)
    }

    /// Reorders registers to the given complete id list.
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.layout.registers().len() {
            return Err(LabError::LayoutMismatch("reorder needs every register".into()));
        }
        let regs: Vec<Register> = order.iter().map(|id| self.layout.get(id).cloned()).collect::<Result<_>>()?;
        let new_layout = RegisterLayout::with_cap(regs, self.layout.cap())?;
        let qperm: Vec<usize> = new_layout.quantum().map(|r| self.layout.quantum_index(&r.id)).collect::<Result<_>>()?;
        let cperm: Vec<usize> = new_layout.classical().map(|r| self.layout.classical_index(&r.id)).collect::<Result<_>>()?;
        let qdims = self.layout.quantum_dims();
        let branches = self
            .branches
            .iter()
            .map(|(k, m)| (cperm.iter().map(|&i| k[i]).collect(), permute_factors(m, &qdims, &qperm)))
            .collect();
        Self::new_unchecked(new_layout, branches)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        // Quantum order in the concatenated layout: ours then theirs, which
        // matches kron order; classical order likewise.
        let mut out = BTreeMap::new();
        for (ka, a) in &self.branches {
            for (kb, b) in &other.branches {
                let mut k = ka.clone();
                k.extend(kb.iter().copied());
                out.insert(k, a.kronecker(b));
            }
        }
        Self::new_unchecked(layout, out)
    }

    fn targets(&self, ids: &[&str]) -> Result<Vec<usize>> {
        ids.iter()
            .map(|id| {
                let r = self.layout.get(id)?;
                if !r.is_quantum() {
                    return Err(LabError::InvalidParameter(format!("`{id}` is classical")));
                }
                self.layout.quantum_index(id)
            })
            .collect()
    }

    /// Applies a same-dimension channel to the listed quantum registers.
    pub fn apply_channel(&self, ch: &Channel, ids: &[&str]) -> Result<Self> {
        let t = self.targets(ids)?;
        let qdims = self.layout.quantum_dims();
        let tdims: Vec<usize> = t.iter().map(|&i| qdims[i]).collect();
        if ch.in_dims.iter().product::<usize>() != tdims.iter().product::<usize>() || ch.din() != ch.dout() {
            return Err(LabError::DimensionMismatch(format!("channel dims {:?} on registers {:?}", ch.in_dims, tdims)));
        }
        let branches = self
            .branches
            .iter()
            .map(|(k, m)| (k.clone(), apply_kraus_on(m, &qdims, &t, &ch.kraus)))
            .collect();
        let out = Self::new_unchecked(self.layout.clone(), branches)?;
        out.check_trace_contract(ch, self.trace())?;
        Ok(out)
    }

    /// Applies a channel that replaces registers `ids` by `out_regs`; the new
    /// registers are appended at the end of the layout.
    pub fn apply_channel_replace(&self, ch: &Channel, ids: &[&str], out_regs: Vec<Register>) -> Result<Self> {
        let t = self.targets(ids)?;
        let qdims = self.layout.quantum_dims();
        let din: usize = t.iter().map(|&i| qdims[i]).product();
        let dout: usize = out_regs.iter().map(|r| r.dim).product();
        if ch.din() != din || ch.dout() != dout {
            return Err(LabError::DimensionMismatch("replacement channel dims".into()));
        }
        let kept: Vec<Register> = self.layout.registers().iter().filter(|r| !ids.contains(&r.id.as_str())).cloned().collect();
        let mut regs = kept.clone();
        regs.extend(out_regs.iter().cloned());
        let new_layout = RegisterLayout::with_cap(regs, self.layout.cap())?;
        // apply_on puts outputs first; move them to the end.
        let n_rest = qdims.len() - t.len();
        let n_out = 1usize;
        let mut branches = BTreeMap::new();
        for (k, m) in &self.branches {
            let (o, nd) = ch.apply_on(m, &qdims, &t);
            // Collapse output factor list to a single factor of dim dout.
            let mut dims2 = vec![dout];
            dims2.extend(nd[ch.out_dims.len()..].iter().copied());
            let mut perm: Vec<usize> = (n_out..n_out + n_rest).collect();
            perm.push(0);
            let o2 = permute_factors(&o, &dims2, &perm);
            branches.insert(k.clone(), o2);
        }
        let out = Self::new_unchecked(new_layout, branches)?;
        out.check_trace_contract(ch, self.trace())?;
        Ok(out)
    }

    fn check_trace_contract(&self, ch: &Channel, before: f64) -> Result<()> {
        let after = self.trace();
        match ch.kind {
            super::channel::ChannelKind::Cptp if (after - before).abs() > 1e-8 => Err(LabError::BadTrace(after)),
            super::channel::ChannelKind::Cp if after > before + 1e-8 => Err(LabError::BadTrace(after)),
            _ => Ok(()),
        }
    }

    /// Measures a quantum register in the computational basis into a new
    /// classical register with the same id (appended at the end).
    pub fn measure(&self, id: &str) -> Result<Self> {
        let reg = self.layout.get(id)?.clone();
        let t = self.targets(&[id])?;
        let qdims = self.layout.quantum_dims();
        let rest: Vec<usize> = (0..qdims.len()).filter(|k| *k != t[0]).collect();
        let mut regs: Vec<Register> = self.layout.registers().iter().filter(|r| r.id != id).cloned().collect();
        regs.push(Register { kind: super::layout::RegKind::Classical, ..reg.clone() });
        let new_layout = RegisterLayout::with_cap(regs, self.layout.cap())?;
        let ot = offsets(&qdims, &t);
        let or = offsets(&qdims, &rest);
        let mut out = BTreeMap::new();
        for (k, m) in &self.branches {
            for (v, &o) in ot.iter().enumerate() {
                let blk = Mat::from_fn(or.len(), or.len(), |a, b| m[(o + or[a], o + or[b])]);
                if blk.trace().re.abs() < 1e-15 && blk.iter().all(|x| x.norm() < 1e-15) {
                    continue;
                }
                let mut nk = k.clone();
                nk.push(v as u64);
                out.insert(nk, blk);
            }
        }
        Self::new_unchecked(new_layout, out)
    }

    /// Scales every branch by `w`.
    pub fn scaled(&self, w: f64) -> Self {
        CqState {
            layout: self.layout.clone(),
            branches: self.branches.iter().map(|(k, m)| (k.clone(), m.scale(w))).collect(),
        }
    }

    /// Branch-wise sum of two states on the same layout.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.layout != other.layout {
            return Err(LabError::LayoutMismatch("add".into()));
        }
        let mut out = self.branches.clone();
        for (k, m) in &other.branches {
            match out.get_mut(k) {
                Some(acc) => *acc += m,
                None => {
                    out.insert(k.clone(), m.clone());
                }
            }
        }
        Ok(CqState { layout: self.layout.clone(), branches: out })
    }

    /// Same state with every register renamed (and optionally reassigned
    /// to another share) by `f`.
    pub fn renamed(&self, f: impl Fn(&Register) -> Register) -> Result<Self> {
        let regs: Vec<Register> = self.layout.registers().iter().map(|r| {
            let n = f(r);
            Register { kind: r.kind, size: r.size, dim: r.dim, ..n }
        }).collect();
        let layout = RegisterLayout::with_cap(regs, self.layout.cap())?;
        Ok(CqState { layout, branches: self.branches.clone() })
    }

    /// Register ids of this state.
    pub fn ids(&self) -> Vec<String> {
        self.layout.ids()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        if self.branches.len() != 1 {
            return false;
        }
        let m = self.branches.values().next().unwrap();
        let t = m.trace().re;
        let p2 = (m * m).trace().re;
        (p2 - t * t).abs() < tol
    }

    /// State vector of a pure single-branch state (global phase fixed by the
    /// largest component).
    pub fn pure_vector(&self) -> Result<Vector> {
        if !self.is_pure(1e-8) {
            return Err(LabError::NotPure);
        }
        let m = self.branches.values().next().unwrap();
        let (vals, vecs) = eigh(m);
        let top = vals.len() - 1;
        let v = vecs.column(top).into_owned().scale(vals[top].max(0.0).sqrt());
        let (imax, _) = v.iter().enumerate().fold((0, 0.0), |(bi, bv), (i, x)| if x.norm() > bv { (i, x.norm()) } else { (bi, bv) });
        let ph = v[imax] / v[imax].norm();
        Ok(v.map(|x| x / ph))
    }
}

/// Trace distance `||a - b||_1` (block-diagonal over assignments) and the
/// branch-wise fidelity; unmatched assignments contribute zero fidelity.
pub fn metrics(a: &CqState, b: &CqState) -> Result<(f64, f64)> {
    if a.layout != b.layout {
        return Err(LabError::LayoutMismatch("metrics".into()));
    }
    let mut td = 0.0;
    let mut fid = 0.0;
    let mut keys: Vec<&Assignment> = a.branches.keys().chain(b.branches.keys()).collect();
    keys.sort();
    keys.dedup();
    let d = a.layout.quantum_dim();
    let z = zeros(d, d);
    for k in keys {
        let ma = a.branches.get(k);
        let mb = b.branches.get(k);
        let x = ma.unwrap_or(&z);
        let y = mb.unwrap_or(&z);
        td += trace_norm_herm(&(x - y));
        if ma.is_some() && mb.is_some() {
            fid += fidelity(x, y);
        }
    }
    Ok((td, fid))
}

/// `(sqrt(rho) (x) I) sum_i |i>|i>` on a doubled layout `[S, S']`.
pub fn canonical_purification(rho: &Mat) -> Result<CqState> {
    let me = min_eigenvalue(rho);
    if me < -STATE_TOL {
        return Err(LabError::NotPsd(me));
    }
    let t = rho.trace().re;
    if (t - 1.0).abs() > STATE_TOL {
        return Err(LabError::BadTrace(t));
    }
    let d = rho.nrows();
    let s = sqrt_psd(rho);
    let mut v = Vector::zeros(d * d);
    for i in 0..d {
        for a in 0..d {
            v[a * d + i] += s[(a, i)];
        }
    }
    let layout = RegisterLayout::with_cap(
        vec![Register::qudit("S", d, 0), Register::qudit("S_ref", d, 1)],
        (d * d).max(super::layout::DEFAULT_DIM_CAP),
    )?;
    CqState::pure(layout, &v)
}
