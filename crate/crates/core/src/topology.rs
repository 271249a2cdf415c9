//! Conflict graph, station/sensor association and the transmission sets that
//! form the scheduler's action space.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(ApId, "ap");
id_type!(StationId, "sta");
id_type!(SensorId, "sen");

/// Undirected interference graph over access points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    n_aps: usize,
    edges: Vec<(ApId, ApId)>,
    adjacency: Vec<bool>,
}

impl ConflictGraph {
    pub fn new(n_aps: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_aps == 0 {
            return Err(Error::InvalidTopology("graph needs at least one AP".into()));
        }
        let mut adjacency = vec![false; n_aps * n_aps];
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= n_aps || b >= n_aps {
                return Err(Error::InvalidTopology(format!(
                    "edge ({a}, {b}) references an AP outside 0..{n_aps}"
                )));
            }
            if a == b {
                return Err(Error::InvalidTopology(format!("self-loop on AP {a}")));
            }
            let (lo, hi) = (a.min(b), a.max(b));
            if !adjacency[lo * n_aps + hi] {
                adjacency[lo * n_aps + hi] = true;
                adjacency[hi * n_aps + lo] = true;
                list.push((ApId(lo), ApId(hi)));
            }
        }
        list.sort_unstable();
        Ok(Self {
            n_aps,
            edges: list,
            adjacency,
        })
    }

    pub fn edgeless(n_aps: usize) -> Result<Self> {
        Self::new(n_aps, std::iter::empty())
    }

    pub fn path(n_aps: usize) -> Result<Self> {
        Self::new(n_aps, (1..n_aps).map(|b| (b - 1, b)))
    }

    pub fn complete(n_aps: usize) -> Result<Self> {
        Self::new(
            n_aps,
            (0..n_aps).flat_map(|a| (a + 1..n_aps).map(move |b| (a, b))),
        )
    }

    pub fn n_aps(&self) -> usize {
        self.n_aps
    }

    pub fn aps(&self) -> impl Iterator<Item = ApId> {
        (0..self.n_aps).map(ApId)
    }

    /// Edges as `(lo, hi)` pairs in ascending order.
    pub fn edges(&self) -> &[(ApId, ApId)] {
        &self.edges
    }

    #[inline]
    pub fn conflicts(&self, a: ApId, b: ApId) -> bool {
        self.adjacency[a.0 * self.n_aps + b.0]
    }
}

/// Binary activation vector over APs; one column of the action matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransmissionSet {
    active: Vec<bool>,
}

impl TransmissionSet {
    pub fn new(active: Vec<bool>) -> Self {
        Self { active }
    }

    pub fn empty(n_aps: usize) -> Self {
        Self {
            active: vec![false; n_aps],
        }
    }

    /// Builds a set from a 0/1 slice, e.g. `&[1, 0, 1]`.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self {
            active: bits.iter().map(|&b| b != 0).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    #[inline]
    pub fn is_active(&self, ap: ApId) -> bool {
        self.active[ap.0]
    }

    pub fn set(&mut self, ap: ApId, on: bool) {
        self.active[ap.0] = on;
    }

    pub fn active_aps(&self) -> impl Iterator<Item = ApId> + '_ {
        self.active
            .iter()
            .enumerate()
            .filter(|(_, &on)| on)
            .map(|(a, _)| ApId(a))
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&on| on).count()
    }

    pub fn bits(&self) -> Vec<u8> {
        self.active.iter().map(|&on| on as u8).collect()
    }
}

impl fmt::Display for TransmissionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, &on) in self.active.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(if on { "1" } else { "0" })?;
        }
        f.write_str("]")
    }
}

/// Ordered, duplicate-free collection of transmission sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransmissionSetMatrix {
    sets: Vec<TransmissionSet>,
}

impl TransmissionSetMatrix {
    /// Validates independence and width against `graph`, dropping duplicates.
    pub fn from_sets(graph: &ConflictGraph, sets: Vec<TransmissionSet>) -> Result<Self> {
        let mut out = Self::default();
        for set in sets {
            if set.len() != graph.n_aps() {
                return Err(Error::InvalidTopology(format!(
                    "set {set} has width {} but the graph has {} APs",
                    set.len(),
                    graph.n_aps()
                )));
            }
            if !is_independent(graph, &set) {
                return Err(Error::NotIndependent(set.to_string()));
            }
            out.insert(set);
        }
        if out.is_empty() {
            return Err(Error::InvalidTopology("empty action matrix".into()));
        }
        Ok(out)
    }

    fn insert(&mut self, set: TransmissionSet) -> bool {
        if self.sets.contains(&set) {
            false
        } else {
            self.sets.push(set);
            true
        }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn get(&self, i: usize) -> &TransmissionSet {
        &self.sets[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TransmissionSet> {
        self.sets.iter()
    }

    pub fn contains(&self, set: &TransmissionSet) -> bool {
        self.sets.contains(set)
    }

    pub fn as_slice(&self) -> &[TransmissionSet] {
        &self.sets
    }
}

impl<'a> IntoIterator for &'a TransmissionSetMatrix {
    type Item = &'a TransmissionSet;
    type IntoIter = std::slice::Iter<'a, TransmissionSet>;

    fn into_iter(self) -> Self::IntoIter {
        self.sets.iter()
    }
}

/// True iff no conflict edge joins two active APs.
pub fn is_independent(graph: &ConflictGraph, set: &TransmissionSet) -> bool {
    let active: Vec<ApId> = set.active_aps().collect();
    active
        .iter()
        .enumerate()
        .all(|(i, &a)| active[i + 1..].iter().all(|&b| !graph.conflicts(a, b)))
}

/// True iff `set` is independent and no inactive AP can join it.
pub fn is_maximal(graph: &ConflictGraph, set: &TransmissionSet) -> bool {
    is_independent(graph, set)
        && graph
            .aps()
            .filter(|&a| !set.is_active(a))
            .all(|a| set.active_aps().any(|b| graph.conflicts(a, b)))
}

/// Greedy construction of the action matrix.
///
/// Each AP in ascending ID order seeds a set; the remaining APs are scanned
/// in ascending ID order and added when they conflict with no member. Sets
/// already present are skipped, so the result holds at most `n_aps` columns.
pub fn enumerate_transmission_sets(graph: &ConflictGraph) -> TransmissionSetMatrix {
    let mut matrix = TransmissionSetMatrix::default();
    for seed in graph.aps() {
        let mut set = TransmissionSet::empty(graph.n_aps());
        set.set(seed, true);
        let mut members = vec![seed];
        for cand in graph.aps().filter(|&a| a != seed) {
            if members.iter().all(|&m| !graph.conflicts(cand, m)) {
                set.set(cand, true);
                members.push(cand);
            }
        }
        matrix.insert(set);
    }
    matrix
}

/// Largest graph accepted by [`enumerate_maximal_sets_exhaustive`].
pub const EXHAUSTIVE_MAX_APS: usize = 24;

/// Every maximal independent set, by scanning all `2^n` subsets.
///
/// Sets are ordered by their bitmask with AP 0 as the least significant bit.
pub fn enumerate_maximal_sets_exhaustive(graph: &ConflictGraph) -> Result<TransmissionSetMatrix> {
    let n = graph.n_aps();
    if n > EXHAUSTIVE_MAX_APS {
        return Err(Error::InvalidConfig(format!(
            "exhaustive set enumeration is limited to {EXHAUSTIVE_MAX_APS} APs, got {n}"
        )));
    }
    let neighbours: Vec<u32> = graph
        .aps()
        .map(|a| {
            graph
                .aps()
                .filter(|&b| graph.conflicts(a, b))
                .fold(0u32, |m, b| m | (1 << b.0))
        })
        .collect();
    let mut matrix = TransmissionSetMatrix::default();
    for mask in 1u32..(1u32 << n) {
        let independent = (0..n).all(|a| mask & (1 << a) == 0 || neighbours[a] & mask == 0);
        if !independent {
            continue;
        }
        let maximal = (0..n).all(|a| mask & (1 << a) != 0 || neighbours[a] & mask != 0);
        if maximal {
            matrix.insert(TransmissionSet::new(
                (0..n).map(|a| mask & (1 << a) != 0).collect(),
            ));
        }
    }
    Ok(matrix)
}

/// Conflict graph plus the station and sensor association of every AP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    graph: ConflictGraph,
    stations: Vec<Vec<StationId>>,
    sensors: Vec<Vec<SensorId>>,
    station_ap: Vec<ApId>,
    sensor_ap: Vec<ApId>,
}

impl Topology {
    /// `stations[a]` and `sensors[a]` list the IDs associated with AP `a`.
    /// IDs of each kind must cover `0..n` exactly once.
    pub fn new(
        graph: ConflictGraph,
        stations: Vec<Vec<StationId>>,
        sensors: Vec<Vec<SensorId>>,
    ) -> Result<Self> {
        let n = graph.n_aps();
        if stations.len() != n || sensors.len() != n {
            return Err(Error::InvalidTopology(format!(
                "association maps must have one entry per AP ({n})"
            )));
        }
        let station_ap = owner_map(&stations, "station", |s| s.0)?;
        let sensor_ap = owner_map(&sensors, "sensor", |s| s.0)?;
        let mut stations = stations;
        let mut sensors = sensors;
        stations.iter_mut().for_each(|v| v.sort_unstable());
        sensors.iter_mut().for_each(|v| v.sort_unstable());
        Ok(Self {
            graph,
            stations,
            sensors,
            station_ap,
            sensor_ap,
        })
    }

    /// Assigns consecutive IDs AP by AP from per-AP counts.
    pub fn from_counts(
        graph: ConflictGraph,
        station_counts: &[usize],
        sensor_counts: &[usize],
    ) -> Result<Self> {
        fn assign<T>(counts: &[usize], make: impl Fn(usize) -> T) -> Vec<Vec<T>> {
            let mut next = 0;
            counts
                .iter()
                .map(|&c| {
                    let ids = (next..next + c).map(&make).collect();
                    next += c;
                    ids
                })
                .collect()
        }
        Self::new(
            graph,
            assign(station_counts, StationId),
            assign(sensor_counts, SensorId),
        )
    }

    pub fn graph(&self) -> &ConflictGraph {
        &self.graph
    }

    pub fn n_aps(&self) -> usize {
        self.graph.n_aps()
    }

    pub fn n_stations(&self) -> usize {
        self.station_ap.len()
    }

    pub fn n_sensors(&self) -> usize {
        self.sensor_ap.len()
    }

    pub fn aps(&self) -> impl Iterator<Item = ApId> {
        self.graph.aps()
    }

    pub fn stations_of(&self, ap: ApId) -> &[StationId] {
        &self.stations[ap.0]
    }

    pub fn sensors_of(&self, ap: ApId) -> &[SensorId] {
        &self.sensors[ap.0]
    }

    pub fn ap_of_station(&self, s: StationId) -> ApId {
        self.station_ap[s.0]
    }

    pub fn ap_of_sensor(&self, s: SensorId) -> ApId {
        self.sensor_ap[s.0]
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: TopologyFile = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        file.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&TopologyFile::from(self))
            .expect("topology serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn owner_map<T>(lists: &[Vec<T>], kind: &str, id: impl Fn(&T) -> usize) -> Result<Vec<ApId>> {
    let total: usize = lists.iter().map(Vec::len).sum();
    let mut owner = vec![None; total];
    for (a, list) in lists.iter().enumerate() {
        for item in list {
            let i = id(item);
            match owner.get_mut(i) {
                Some(slot @ None) => *slot = Some(ApId(a)),
                Some(Some(prev)) => {
                    return Err(Error::InvalidTopology(format!(
                        "{kind} {i} is associated with both {prev} and ap{a}"
                    )))
                }
                None => {
                    return Err(Error::InvalidTopology(format!(
                        "{kind} IDs must be dense in 0..{total}, found {i}"
                    )))
                }
            }
        }
    }
    Ok(owner.into_iter().map(|o| o.expect("dense ids")).collect())
}

/// On-disk JSON layout of a [`Topology`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TopologyFile {
    pub n_aps: usize,
    pub edges: Vec<[usize; 2]>,
    pub stations: Vec<Vec<usize>>,
    pub sensors: Vec<Vec<usize>>,
}

impl TryFrom<TopologyFile> for Topology {
    type Error = Error;

    fn try_from(f: TopologyFile) -> Result<Self> {
        let graph = ConflictGraph::new(f.n_aps, f.edges.iter().map(|e| (e[0], e[1])))?;
        Topology::new(
            graph,
            f.stations
                .into_iter()
                .map(|v| v.into_iter().map(StationId).collect())
                .collect(),
            f.sensors
                .into_iter()
                .map(|v| v.into_iter().map(SensorId).collect())
                .collect(),
        )
    }
}

impl From<&Topology> for TopologyFile {
    fn from(t: &Topology) -> Self {
        TopologyFile {
            n_aps: t.n_aps(),
            edges: t.graph.edges().iter().map(|&(a, b)| [a.0, b.0]).collect(),
            stations: t
                .stations
                .iter()
                .map(|v| v.iter().map(|s| s.0).collect())
                .collect(),
            sensors: t
                .sensors
                .iter()
                .map(|v| v.iter().map(|s| s.0).collect())
                .collect(),
        }
    }
}

impl Serialize for Topology {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TopologyFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Topology {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        TopologyFile::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

/// Random WLAN: each AP pair conflicts independently with `edge_prob`; each AP
/// gets `1..=max_stations` stations and `0..=max_sensors` sensors.
///
/// All pair draws happen before the association draws, so two calls that share
/// a seed but differ in `edge_prob` produce nested edge sets and identical
/// association.
pub fn build_random_topology<R: Rng + ?Sized>(
    n_aps: usize,
    edge_prob: f64,
    max_stations: usize,
    max_sensors: usize,
    rng: &mut R,
) -> Result<Topology> {
    if n_aps == 0 {
        return Err(Error::InvalidTopology("n_aps must be at least 1".into()));
    }
    if max_stations == 0 {
        return Err(Error::InvalidTopology(
            "max_stations must be at least 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidTopology(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let mut edges = Vec::new();
    for a in 0..n_aps {
        for b in a + 1..n_aps {
            let u: f64 = rng.gen();
            if u < edge_prob {
                edges.push((a, b));
            }
        }
    }
    let graph = ConflictGraph::new(n_aps, edges)?;
    let stations: Vec<usize> = (0..n_aps)
        .map(|_| rng.gen_range(1..=max_stations))
        .collect();
    let sensors: Vec<usize> = (0..n_aps).map(|_| rng.gen_range(0..=max_sensors)).collect();
    Topology::from_counts(graph, &stations, &sensors)
}
