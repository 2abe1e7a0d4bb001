//! Mobility traces, Poisson link events and the scenario runner.

mod cdf;
mod events;
mod scenario;
mod trace;

pub use cdf::{cdf_at, compute_cdf, dominance_order, quantile, CdfPoint, DOMINANCE_LEVELS};
pub use events::{
    generate_link_events, pair_distances, resolve_event_params, EventGenParams, ResolvedEventParams,
    DENSEST_PAIR_EVENTS,
};
pub use scenario::{
    evaluate_over_epochs, mine_window, run_point, run_scenario, write_cdf_csv, write_metrics_csv, CdfRow, MetricRow,
    PointOutcome, ReplicationSeeds, ScenarioConfig, ScenarioReport, Strategy, StrategyOutcome, SweepSummary,
};
pub use trace::{
    generate_synthetic_trace, load_trace, read_trace, save_trace, write_trace, RoadGeometry, SyntheticTraceParams,
    Trace,
};
