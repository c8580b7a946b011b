use itertools::Itertools;

use crate::error::{LabError, Result};
use crate::qcodes::scheme::encode_message;
use crate::qcodes::CodingScheme;
use crate::qstate::{metrics, CqState};

/// Largest distance between the marginals of two encoded messages on one
/// group of shares.
fn marginal_gap(encoded: &[CqState], ids: &[String]) -> Result<f64> {
    let keep: Vec<&str> = ids.iter().map(String::as_str).collect();
    let marg: Vec<CqState> = encoded.iter().map(|e| e.tensor_and_trace(&keep)).collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for (a, b) in marg.iter().tuple_combinations() {
        worst = worst.max(metrics(a, b)?.0);
    }
    Ok(worst)
}

/// `max` over share groups of size `group` and message pairs of the trace
/// distance between marginals of the encodings.
pub fn share_group_privacy(code: &dyn CodingScheme, messages: &[crate::qstate::Mat], group: usize) -> Result<Vec<(Vec<usize>, f64)>> {
    if messages.len() < 2 {
        return Err(LabError::InvalidParameter("need at least two messages".into()));
    }
    let layout = code.code_layout();
    let encoded: Vec<CqState> = messages.iter().map(|m| encode_message(code, m)).collect::<Result<_>>()?;
    layout
        .shares()
        .into_iter()
        .combinations(group)
        .map(|set| {
            let ids: Vec<String> = set.iter().flat_map(|&s| layout.share_ids(s)).collect();
            Ok((set, marginal_gap(&encoded, &ids)?))
        })
        .collect()
}

/// Single-share encryption: the largest per-share distance between encodings.
pub fn single_share_privacy(code: &dyn CodingScheme, messages: &[crate::qstate::Mat]) -> Result<f64> {
    Ok(share_group_privacy(code, messages, 1)?.into_iter().map(|(_, d)| d).fold(0.0, f64::max))
}
