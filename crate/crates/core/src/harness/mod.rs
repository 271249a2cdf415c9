//! Experiment orchestration: configuration, simulation runs, sweeps, the
//! approximation-gap study and CSV output.

mod config;
mod gap;
mod output;
mod sim;
mod sweep;

pub use config::{
    ArrivalsConfig, ChannelProfile, ChannelsConfig, ExperimentConfig, ExperimentSection,
    MdpSection, SetEnumeration, TopologyConfig, DOT11G_RATES_MBPS, SENSOR_ENERGY_UJ,
};
pub use gap::{run_gap_study, run_gap_study_on, GapRow};
pub use output::{emit_csv, format_sig, write_csv, CsvRow};
pub use sim::{run_simulation, run_simulation_with, RunMetrics, RunParams, SlotRecord};
pub use sweep::{run_sweep, SweepAxis, SweepRow};

/// Sample mean and standard deviation (`n - 1` denominator; zero for a
/// single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}
