//! Small dense models trained by hand-written backpropagation.

mod loss;
mod metrics;
mod model;
mod optim;
mod train;

pub use loss::{loss_ce, loss_mse, loss_on_selection, loss_projected_ce, LossKind, ProjectedLoss};
pub use metrics::{
    metric_sparsity, weight_density, write_metrics_csv, MetricsRow, DEFAULT_METRIC_THRESHOLD,
};
pub use model::{Activation, Layer, LayerGrad, Model};
pub use optim::{Optimizer, OptimizerKind};
pub use train::{evaluate_model, train, Regularizer, TrainConfig};
