use serde::{Deserialize, Serialize};

use super::channel::{Channel, ChannelKind};
use super::cq::CqState;
use super::layout::RegisterLayout;
use super::linalg::{c, Mat};
use crate::error::{LabError, Result};

/// Dense complex matrix as a row-major list of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatDesc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&Mat> for MatDesc {
    fn from(m: &Mat) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        MatDesc { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl MatDesc {
    pub fn to_mat(&self) -> Result<Mat> {
        if self.data.len() != self.rows * self.cols {
            return Err(LabError::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(Mat::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            c(re, im)
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDesc {
    pub kind: ChannelKind,
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
    pub kraus: Vec<MatDesc>,
}

impl From<&Channel> for ChannelDesc {
    fn from(ch: &Channel) -> Self {
        ChannelDesc {
            kind: ch.kind,
            in_dims: ch.in_dims.clone(),
            out_dims: ch.out_dims.clone(),
            kraus: ch.kraus.iter().map(MatDesc::from).collect(),
        }
    }
}

impl ChannelDesc {
    /// Rebuilds and re-validates the channel.
    pub fn to_channel(&self) -> Result<Channel> {
        let kraus = self.kraus.iter().map(MatDesc::to_mat).collect::<Result<Vec<_>>>()?;
        Channel::new(kraus, self.in_dims.clone(), self.out_dims.clone(), self.kind)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CqStateDesc {
    pub layout: RegisterLayout,
    pub branches: Vec<(Vec<u64>, MatDesc)>,
}

impl From<&CqState> for CqStateDesc {
    fn from(s: &CqState) -> Self {
        CqStateDesc {
            layout: s.layout().clone(),
            branches: s.branches().iter().map(|(k, m)| (k.clone(), MatDesc::from(m))).collect(),
        }
    }
}

impl CqStateDesc {
    pub fn to_state(&self) -> Result<CqState> {
        let layout = RegisterLayout::with_cap(self.layout.registers().to_vec(), self.layout.cap())?;
        let branches = self
            .branches
            .iter()
            .map(|(k, m)| Ok((k.clone(), m.to_mat()?)))
            .collect::<Result<_>>()?;
        CqState::new(layout, branches)
    }
}
