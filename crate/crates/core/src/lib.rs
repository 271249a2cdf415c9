//! Transmission scheduling for mutually interfering WLAN access points that
//! both deliver data and charge RF energy-harvesting sensors.
//!
//! The crate models the network as a conflict graph whose maximal
//! independent sets form the action space of a finite-horizon MDP. Each slot
//! the scheduler activates one transmission set; every active AP serves one
//! of its stations, chosen by a per-AP policy, and nearby sensors harvest
//! energy from the packets sent. The reward is a weighted sum of packets
//! delivered and energy harvested.
//!
//! - [`topology`]: conflict graph, association, transmission sets
//! - [`stochastics`]: Markov channels, arrivals, seeded streams
//! - [`dynamics`]: one-slot evolution and reward
//! - [`policies`]: max weight, max queue, max CSI, random
//! - [`mdp`]: exact and sampled value iteration, planning, gap
//! - [`harness`]: experiment configuration, sweeps and CSV output

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod policies;
pub mod scenario;
pub mod stochastics;
pub mod topology;

pub use error::{Error, Result};
