use rand::Rng;

use super::local::{LocalMap, ShareShape};
use super::locc::LoccNode;
use super::{Adversary, DEFAULT_ROUND_CAP};
use crate::error::{LabError, Result};
use crate::qstate::linalg::*;
use crate::qstate::{Channel, ChannelKind, RegisterLayout};

/// A named orthonormal basis (columns of a unitary).
#[derive(Clone, Debug)]
pub struct NetBasis {
    pub name: String,
    pub basis: Mat,
}

fn bell_pair_basis() -> Mat {
    cnot() * kron(&hadamard(), &identity(2))
}

/// Computational, Hadamard and pairwise Bell bases on `n` qubits, followed
/// by `n_random` Haar-random bases.
pub fn measurement_net<R: Rng + ?Sized>(n: usize, n_random: usize, rng: &mut R) -> Vec<NetBasis> {
    let d = 1usize << n;
    let mut net = vec![NetBasis { name: "computational".into(), basis: identity(d) }];
    let h: Vec<Mat> = (0..n).map(|_| hadamard()).collect();
    net.push(NetBasis { name: "hadamard".into(), basis: kron_all(&h) });
    if n >= 2 {
        let mut parts: Vec<Mat> = (0..n / 2).map(|_| bell_pair_basis()).collect();
        if n % 2 == 1 {
            parts.push(identity(2));
        }
        net.push(NetBasis { name: "bell".into(), basis: kron_all(&parts) });
    }
    for i in 0..n_random {
        net.push(NetBasis { name: format!("random{i}"), basis: haar_unitary(d, rng) });
    }
    net
}

/// `X^o`: flips the bits set in `o` (big-endian index XOR).
pub fn x_power(d: usize, o: usize) -> Mat {
    Mat::from_fn(d, d, |i, j| if i == j ^ (o % d) { r(1.0) } else { r(0.0) })
}

/// `Z^o`: sign `(-1)^{popcount(j & o)}` on basis state `j`.
pub fn z_power(d: usize, o: usize) -> Mat {
    Mat::from_fn(d, d, |i, j| if i == j { r(if (j & o).count_ones() % 2 == 0 { 1.0 } else { -1.0 }) } else { r(0.0) })
}

fn projective_maps(shape: &ShareShape, basis: &Mat) -> Vec<LocalMap> {
    let d = basis.nrows();
    (0..d)
        .map(|i| {
            let v = basis.column(i).into_owned();
            let ch = Channel::from_kraus_unchecked(vec![projector(&v)], shape.quantum_dims.clone(), shape.quantum_dims.clone(), ChannelKind::Cp);
            LocalMap::quantum_only(shape, ch)
        })
        .collect()
}

fn unitary_map(shape: &ShareShape, u: Mat) -> LocalMap {
    LocalMap::quantum_only(shape, Channel::from_kraus_unchecked(vec![u], shape.quantum_dims.clone(), shape.quantum_dims.clone(), ChannelKind::Cptp))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Response {
    Identity,
    FlipX,
    FlipZ,
    Random,
}

/// One- and two-round tampering strategies for a code with two purely
/// quantum shares. In a one-round strategy one party measures in a net
/// basis and the other applies an outcome-dependent correction (none, `X^o`,
/// `Z^o` or a random unitary per outcome). In a two-round strategy the
/// first party measures, the second measures in a structured basis, and the
/// first applies `X^{o_2}`.
pub fn tampering_catalog<R: Rng + ?Sized>(
    layout: &RegisterLayout,
    n_random: usize,
    two_round: bool,
    rng: &mut R,
) -> Result<Vec<(String, Adversary)>> {
    let shares = layout.shares();
    if shares.len() != 2 {
        return Err(LabError::InvalidParameter("catalog needs exactly two shares".into()));
    }
    let shapes: Vec<ShareShape> = shares.iter().map(|&s| ShareShape::of(layout, s)).collect();
    if shapes.iter().any(|s| !s.classical.is_empty() || !s.qdim().is_power_of_two()) {
        return Err(LabError::InvalidParameter("catalog needs purely quantum qubit shares".into()));
    }
    let ids: Vec<Vec<LocalMap>> = vec![shapes.iter().map(LocalMap::identity).collect()];
    let idle = |maps: &mut Vec<LocalMap>, pos: usize, m: LocalMap| maps[pos] = m;
    let mut out = vec![];
    for actor in 0..2 {
        let other = 1 - actor;
        let (sa, sb) = (&shapes[actor], &shapes[other]);
        let (da, db) = (sa.qdim(), sb.qdim());
        let net = measurement_net(da.trailing_zeros() as usize, n_random, rng);
        for nb in &net {
            for resp in [Response::Identity, Response::FlipX, Response::FlipZ, Response::Random] {
                let responses = (0..da)
                    .map(|o| {
                        let mut maps = ids[0].clone();
                        let u = match resp {
                            Response::Identity => identity(db),
                            Response::FlipX => x_power(db, o),
                            Response::FlipZ => z_power(db, o),
                            Response::Random => haar_unitary(db, rng),
                        };
                        idle(&mut maps, other, unitary_map(sb, u));
                        LoccNode::Finish(maps)
                    })
                    .collect();
                let tree = LoccNode::Round { actor, instrument: projective_maps(sa, &nb.basis), responses };
                let name = format!("1r/actor{actor}/{}/{resp:?}", nb.name);
                out.push((name, Adversary::build_locc(layout, tree, DEFAULT_ROUND_CAP)?));
            }
        }
        if two_round {
            let net_b = measurement_net(db.trailing_zeros() as usize, 0, rng);
            for na in &net {
                for nb in &net_b {
                    let responses = (0..da)
                        .map(|_| {
                            let inner = (0..db)
                                .map(|o2| {
                                    let mut maps = ids[0].clone();
                                    idle(&mut maps, actor, unitary_map(sa, x_power(da, o2)));
                                    LoccNode::Finish(maps)
                                })
                                .collect();
                            LoccNode::Round { actor: other, instrument: projective_maps(sb, &nb.basis), responses: inner }
                        })
                        .collect();
                    let tree = LoccNode::Round { actor, instrument: projective_maps(sa, &na.basis), responses };
                    let name = format!("2r/actor{actor}/{}/{}", na.name, nb.name);
                    out.push((name, Adversary::build_locc(layout, tree, DEFAULT_ROUND_CAP)?));
                }
            }
        }
    }
    Ok(out)
}
