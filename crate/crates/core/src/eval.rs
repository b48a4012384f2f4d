//! Quantitative evaluation: the binary similarity measure, image-level
//! confusion metrics, and the serialized report.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

/// Binary similarity `gamma = |1 - (2/pq) * sum(a xor b)|`, computed exactly
/// as printed: 1 for identical masks, 0 when exactly half the pixels differ,
/// and (a quirk of the absolute value) 1 again for fully complementary masks.
pub fn binary_similarity(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::arg("mask dimensions differ"));
    }
    let differing = a
        .bits()
        .iter()
        .zip(b.bits())
        .filter(|(x, y)| x != y)
        .count();
    let pq = (a.rows() * a.cols()) as f64;
    Ok((1.0 - 2.0 * differing as f64 / pq).abs())
}

/// Image-level confusion counts and the derived ratios; ratios whose
/// denominator is zero are absent rather than zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionMetrics {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fp_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fn_rate: Option<f64>,
}

/// Counts (predicted, actual) decisions into a [`ConfusionMetrics`].
pub fn confusion_metrics(decisions: &[(bool, bool)]) -> Result<ConfusionMetrics> {
    if decisions.is_empty() {
        return Err(Error::arg("decision list is empty"));
    }
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut tn = 0u64;
    let mut fn_ = 0u64;
    for &(predicted, actual) in decisions {
        match (predicted, actual) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    Ok(ConfusionMetrics {
        tp,
        fp,
        tn,
        fn_,
        accuracy: ratio(tp + tn, tp + tn + fp + fn_),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        fp_rate: ratio(fp, fp + tn),
        fn_rate: ratio(fn_, fn_ + tp),
    })
}

/// Evaluation report serialized as a flat JSON object; missing ratios are
/// absent keys and timings are reported per stage in integer milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(flatten)]
    pub confusion: ConfusionMetrics,
    pub timings_ms: BTreeMap<String, u64>,
}
