//! Periodic geodesics: G-periods, parallelism classes of axes, the product
//! structure of flow lines along a class, the extension of open sets from
//! a closed subset, and an explicit equivariant cover of the periodic part
//! of the flow space for lattice actions.

mod bundle;
mod classes;
mod cover;
mod extend;
pub mod median;

pub use classes::{
    enumerate_axis_classes, fs_le_gamma, g_period, AxisClass, AxisClasses, GPeriod, ParallelDatum, PERIOD_TOL,
};
pub use bundle::{BundleKind, FlowLineBundle};
pub use extend::{
    check_extension_laws, extend_open, BallSet, ExtensionReport, ExtensionSubset, Interval, IntervalSet, LineSubset,
    PointNet, Split,
};
pub use cover::{
    build_cover, check_cover, cover_constants, BallFamily, CheckCoverConfig, ClassFamily, Cover, CoverReport, IsotropyEntry,
    PatchId, BALL_RADIUS, HALF_WIDTH,
};
