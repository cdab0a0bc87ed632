//! Dataset ingestion, augmentation, robustness protocols, and reports.

mod augment;
mod idx;
mod protocol;
mod report;
mod synthetic;

pub use augment::{rescale_image, rotate_pointcloud, rotate_pointcloud_about};
pub use idx::{load_idx, load_idx_images, load_idx_labels, write_idx_images, write_idx_labels};
pub use protocol::{
    prune_cloud, run_protocol, Dataset, NamedConfig, ProtocolKind, RobustnessProtocol,
};
pub use report::{
    emit_report, ReportFormat, ReportMetadata, ReportRow, RobustnessReport, Split,
};
pub use synthetic::{synthetic_digit, synthetic_digits};
