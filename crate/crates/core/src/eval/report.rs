use serde::Serialize;

/// Metric bundle for one evaluation run. Undefined metrics (single-class
/// pools) stay `None` and serialize as null.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    /// Pooled-ROC AUC across frames (primary).
    pub auc: Option<f64>,
    /// Per-frame-averaged AUC (secondary reading of the same measure).
    pub auc_per_frame: Option<f64>,
    /// Mean normalized argmax distance over in-frame ground truths.
    pub l2_mean: Option<f64>,
    /// Average precision of alpha against in-frame labels.
    pub out_of_frame_ap: Option<f64>,
    pub n_inframe: usize,
    pub n_total: usize,
}
