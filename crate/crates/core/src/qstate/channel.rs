use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::*;
use crate::error::{LabError, Result};

pub const CHANNEL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelKind {
    Cptp,
    Cp,
}

/// A completely positive map in Kraus form, `rho -> sum_k K_k rho K_k^dagger`.
/// `in_dims`/`out_dims` list the tensor factors it consumes and produces.
#[derive(Clone, Debug)]
pub struct Channel {
    pub kraus: Vec<Mat>,
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
    pub kind: ChannelKind,
}

impl Channel {
    pub fn new(kraus: Vec<Mat>, in_dims: Vec<usize>, out_dims: Vec<usize>, kind: ChannelKind) -> Result<Self> {
        let din: usize = in_dims.iter().product();
        let dout: usize = out_dims.iter().product();
        if kraus.is_empty() {
            return Err(LabError::InvalidParameter("channel needs at least one operator".into()));
        }
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(LabError::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    dout,
                    din
                )));
            }
        }
        let ch = Channel { kraus, in_dims, out_dims, kind };
        ch.validate(CHANNEL_TOL)?;
        Ok(ch)
    }

    /// Builds without validation; callers guarantee the trace contract.
    pub fn from_kraus_unchecked(kraus: Vec<Mat>, in_dims: Vec<usize>, out_dims: Vec<usize>, kind: ChannelKind) -> Self {
        Channel { kraus, in_dims, out_dims, kind }
    }

    pub fn din(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn dout(&self) -> usize {
        self.out_dims.iter().product()
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let d = self.din();
        let mut s = zeros(d, d);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        match self.kind {
            ChannelKind::Cptp => {
                let dev = max_abs_diff(&s, &identity(d));
                if dev > tol.max(1e-9) * (d as f64).max(1.0) {
                    return Err(LabError::BadChannel { expected: "trace preserving", deviation: dev });
                }
            }
            ChannelKind::Cp => {
                let top = eigvalsh(&s).last().copied().unwrap_or(0.0);
                if top > 1.0 + tol.max(1e-9) {
                    return Err(LabError::BadChannel { expected: "trace non-increasing", deviation: top - 1.0 });
                }
            }
        }
        Ok(())
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d = dims.iter().product();
        Channel { kraus: vec![identity(d)], in_dims: dims.clone(), out_dims: dims, kind: ChannelKind::Cptp }
    }

    pub fn unitary(u: Mat, dims: Vec<usize>) -> Result<Self> {
        Channel::new(vec![u], dims.clone(), dims, ChannelKind::Cptp)
    }

    /// Replaces the input with a fixed state.
    pub fn replacement(sigma: &Mat, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Self {
        let din: usize = in_dims.iter().product();
        let (vals, vecs) = eigh(sigma);
        let mut kraus = vec![];
        for (v, val) in vals.iter().enumerate() {
            if *val <= 1e-14 {
                continue;
            }
            for j in 0..din {
                let mut k = zeros(sigma.nrows(), din);
                for a in 0..sigma.nrows() {
                    k[(a, j)] = vecs[(a, v)] * val.sqrt();
                }
                kraus.push(k);
            }
        }
        Channel { kraus, in_dims, out_dims, kind: ChannelKind::Cptp }
    }

    /// `rho -> (1 - rate) rho + rate * Tr(rho) I/d`.
    pub fn depolarizing(d: usize, rate: f64) -> Self {
        let n = (d as f64).log2().round() as usize;
        let mut kraus = vec![];
        if d == 1 << n {
            // Pauli Kraus form.
            let ps = pauli_matrices();
            let total = 1usize << (2 * n);
            for idx in 0..total {
                let mut m = identity(1);
                for q in 0..n {
                    let p = (idx >> (2 * (n - 1 - q))) & 3;
                    m = m.kronecker(&ps[p]);
                }
                let w = if idx == 0 { 1.0 - rate + rate / total as f64 } else { rate / total as f64 };
                if w > 0.0 {
                    kraus.push(m.scale(w.sqrt()));
                }
            }
        } else {
            kraus.push(identity(d).scale((1.0 - rate).max(0.0).sqrt()));
            for i in 0..d {
                for j in 0..d {
                    kraus.push(unit(d, i, j).scale((rate / d as f64).sqrt()));
                }
            }
        }
        Channel { kraus, in_dims: vec![d], out_dims: vec![d], kind: ChannelKind::Cptp }
    }

    /// Stinespring sampling: Haar unitary on input (x) environment, environment
    /// initialized to |0> and traced out afterwards.
    pub fn random_stinespring<R: Rng + ?Sized>(dims: Vec<usize>, env_dim: usize, rng: &mut R) -> Self {
        let d: usize = dims.iter().product();
        let u = haar_unitary(d * env_dim, rng);
        // Isometry columns: inputs |i>|0>_env.
        let mut kraus = Vec::with_capacity(env_dim);
        for e in 0..env_dim {
            let k = Mat::from_fn(d, d, |a, i| u[(a * env_dim + e, i * env_dim)]);
            kraus.push(k);
        }
        Channel { kraus, in_dims: dims.clone(), out_dims: dims, kind: ChannelKind::Cptp }
    }

    pub fn random_unitary<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Self {
        let d: usize = dims.iter().product();
        Channel { kraus: vec![haar_unitary(d, rng)], in_dims: dims.clone(), out_dims: dims, kind: ChannelKind::Cptp }
    }

    pub fn apply(&self, rho: &Mat) -> Mat {
        let d = self.dout();
        let mut out = zeros(d, d);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Applies the channel to the factors `targets` of `rho` (dims `dims`).
    /// Returns the new operator with output factors placed first, followed by
    /// the untouched factors in their original order, and the new dims.
    pub fn apply_on(&self, rho: &Mat, dims: &[usize], targets: &[usize]) -> (Mat, Vec<usize>) {
        let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
        if self.in_dims == self.out_dims {
            let out = apply_kraus_on(rho, dims, targets, &self.kraus);
            let mut perm: Vec<usize> = targets.to_vec();
            perm.extend(rest.iter().copied());
            let nd: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
            return (permute_factors(&out, dims, &perm), nd);
        }
        let mut perm: Vec<usize> = targets.to_vec();
        perm.extend(rest.iter().copied());
        let moved = permute_factors(rho, dims, &perm);
        let dr: usize = rest.iter().map(|&k| dims[k]).product();
        let id_r = identity(dr);
        let mut out = zeros(self.dout() * dr, self.dout() * dr);
        for k in &self.kraus {
            let big = k.kronecker(&id_r);
            out += &big * &moved * big.adjoint();
        }
        let mut nd = self.out_dims.clone();
        nd.extend(rest.iter().map(|&k| dims[k]));
        (out, nd)
    }

    /// Sequential composition `other` after `self`.
    pub fn then(&self, other: &Channel) -> Result<Channel> {
        if self.dout() != other.din() {
            return Err(LabError::DimensionMismatch("composition".into()));
        }
        let mut kraus = vec![];
        for b in &other.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        let kind = if self.kind == ChannelKind::Cptp && other.kind == ChannelKind::Cptp {
            ChannelKind::Cptp
        } else {
            ChannelKind::Cp
        };
        Ok(Channel { kraus, in_dims: self.in_dims.clone(), out_dims: other.out_dims.clone(), kind })
    }

    pub fn tensor(&self, other: &Channel) -> Channel {
        let mut kraus = vec![];
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kronecker(b));
            }
        }
        let mut in_dims = self.in_dims.clone();
        in_dims.extend(other.in_dims.iter().copied());
        let mut out_dims = self.out_dims.clone();
        out_dims.extend(other.out_dims.iter().copied());
        let kind = if self.kind == ChannelKind::Cptp && other.kind == ChannelKind::Cptp {
            ChannelKind::Cptp
        } else {
            ChannelKind::Cp
        };
        Channel { kraus, in_dims, out_dims, kind }
    }

    pub fn scaled(&self, w: f64) -> Channel {
        Channel {
            kraus: self.kraus.iter().map(|k| k.scale(w.sqrt())).collect(),
            in_dims: self.in_dims.clone(),
            out_dims: self.out_dims.clone(),
            kind: ChannelKind::Cp,
        }
    }

    /// Choi operator `(E (x) id)(|Phi><Phi|)` with output first, reference
    /// second, normalized to unit trace for CPTP maps.
    pub fn choi(&self) -> Mat {
        let din = self.din();
        let dout = self.dout();
        let mut j = zeros(dout * din, dout * din);
        for k in &self.kraus {
            // Column vector of (K (x) I)|Phi> = sum_i K|i> (x) |i> / sqrt(din).
            let mut v = Vector::zeros(dout * din);
            for i in 0..din {
                for a in 0..dout {
                    v[a * din + i] = k[(a, i)];
                }
            }
            j += &v * v.adjoint();
        }
        j.unscale(din as f64)
    }

    pub fn superop(&self) -> Mat {
        superop(&self.kraus)
    }

    /// Permutes the tensor factors of a same-dimension channel: new factor `p`
    /// is old factor `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> Channel {
        let dims = &self.in_dims;
        let nd: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
        let kraus = self.kraus.iter().map(|k| permute_factors(k, dims, perm)).collect();
        Channel { kraus, in_dims: nd.clone(), out_dims: nd, kind: self.kind }
    }
}

/// A quantum instrument: CP maps indexed by classical outcome summing to a channel.
#[derive(Clone, Debug)]
pub struct Instrument {
    pub branches: Vec<Channel>,
}

impl Instrument {
    pub fn new(branches: Vec<Channel>) -> Result<Self> {
        let inst = Instrument { branches };
        inst.validate(1e-8)?;
        Ok(inst)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let all: Vec<Mat> = self.branches.iter().flat_map(|b| b.kraus.iter().cloned()).collect();
        let first = self.branches.first().ok_or_else(|| LabError::InvalidParameter("empty instrument".into()))?;
        Channel::from_kraus_unchecked(all, first.in_dims.clone(), first.out_dims.clone(), ChannelKind::Cptp)
            .validate(tol)
    }

    /// Projective measurement in the columns of `basis` (a unitary); the
    /// post-measurement state is the basis vector.
    pub fn projective(basis: &Mat) -> Self {
        let d = basis.nrows();
        let branches = (0..d)
            .map(|i| {
                let v = basis.column(i).into_owned();
                Channel::from_kraus_unchecked(vec![projector(&v)], vec![d], vec![d], ChannelKind::Cp)
            })
            .collect();
        Instrument { branches }
    }
}
