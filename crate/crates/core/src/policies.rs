//! Per-AP station selection rules.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Selections, SystemState};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::topology::{ApId, StationId, TransmissionSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Largest product of channel rate and queue length.
    MaxWeight,
    /// Longest queue.
    MaxQueue,
    /// Best channel.
    MaxCsi,
    /// Uniformly random station.
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::MaxWeight,
        PolicyKind::MaxQueue,
        PolicyKind::MaxCsi,
        PolicyKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::MaxWeight => "maxweight",
            PolicyKind::MaxQueue => "maxqueue",
            PolicyKind::MaxCsi => "maxcsi",
            PolicyKind::Random => "random",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownPolicy(s.to_string()))
    }
}

/// What a policy sees about one station of an AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub station: StationId,
    pub queue_len: u32,
    pub rate: f64,
}

pub fn candidates(sc: &Scenario, state: &SystemState, ap: ApId) -> Vec<Candidate> {
    sc.topology
        .stations_of(ap)
        .iter()
        .map(|&s| Candidate {
            station: s,
            queue_len: state.queues.get(s),
            rate: sc.station_rate(state, s),
        })
        .collect()
}

/// Argmax for the deterministic policies; ties go to the lowest station ID.
/// Returns `None` for [`PolicyKind::Random`] or an empty candidate list.
pub fn argmax_station(kind: PolicyKind, cands: &[Candidate]) -> Option<StationId> {
    let score = |c: &Candidate| match kind {
        PolicyKind::MaxWeight => c.rate * c.queue_len as f64,
        PolicyKind::MaxQueue => c.queue_len as f64,
        PolicyKind::MaxCsi => c.rate,
        PolicyKind::Random => 0.0,
    };
    if kind == PolicyKind::Random {
        return None;
    }
    let mut best: Option<(f64, StationId)> = None;
    for c in cands {
        let s = score(c);
        best = match best {
            Some((bs, bid)) if bs > s || (bs == s && bid < c.station) => Some((bs, bid)),
            _ => Some((s, c.station)),
        };
    }
    best.map(|(_, id)| id)
}

pub fn select_station<R: Rng + ?Sized>(
    kind: PolicyKind,
    ap: ApId,
    cands: &[Candidate],
    rng: &mut R,
) -> Result<StationId> {
    if cands.is_empty() {
        return Err(Error::NoStations(ap));
    }
    match kind {
        PolicyKind::Random => Ok(cands[rng.gen_range(0..cands.len())].station),
        _ => Ok(argmax_station(kind, cands).expect("non-empty")),
    }
}

/// Applies [`select_station`] to every active AP of `action`.
pub fn select_all<R: Rng + ?Sized>(
    kind: PolicyKind,
    action: &TransmissionSet,
    state: &SystemState,
    sc: &Scenario,
    rng: &mut R,
) -> Result<Selections> {
    action
        .active_aps()
        .map(|ap| Ok((ap, select_station(kind, ap, &candidates(sc, state, ap), rng)?)))
        .collect()
}

/// Distribution of the station chosen by `ap`: a point mass for the
/// deterministic policies, uniform over the AP's stations for `Random`.
pub fn selection_distribution(
    kind: PolicyKind,
    ap: ApId,
    sc: &Scenario,
    state: &SystemState,
) -> Result<Vec<(StationId, f64)>> {
    let stations = sc.topology.stations_of(ap);
    if stations.is_empty() {
        return Err(Error::NoStations(ap));
    }
    Ok(match kind {
        PolicyKind::Random => {
            let p = 1.0 / stations.len() as f64;
            stations.iter().map(|&s| (s, p)).collect()
        }
        _ => vec![(
            argmax_station(kind, &candidates(sc, state, ap)).expect("non-empty"),
            1.0,
        )],
    })
}
