//! Walker Delta shell generation, circular-orbit propagation, +Grid
//! inter-satellite adjacency and per-slot ground contact selection.
//!
//! Satellites ride circular Keplerian orbits around a spherical Earth in an
//! inertial frame. Ground stations are fixed on the surface and rotate with
//! the Earth at the sidereal rate. Visibility is purely range based.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const MU_EARTH_KM3_S2: f64 = 398_600.441_8;
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;

pub type Position = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid shell configuration: {0}")]
    Shell(String),
    #[error("invalid ground station {id}: {reason}")]
    Station { id: usize, reason: String },
    #[error("unknown shell preset `{0}`")]
    UnknownPreset(String),
}

/// Geometry of one Walker Delta shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellConfig {
    pub orbit_count: usize,
    pub sats_per_orbit: usize,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    /// Walker `F` parameter.
    pub phasing_factor: usize,
    pub max_gsl_range_km: f64,
    pub max_isl_range_km: f64,
}

impl ShellConfig {
    /// Starlink shell 1: 72 planes of 22 satellites at 550 km, 53 degrees.
    pub fn shell1() -> Self {
        Self {
            orbit_count: 72,
            sats_per_orbit: 22,
            altitude_km: 550.0,
            inclination_deg: 53.0,
            phasing_factor: 1,
            max_gsl_range_km: 1260.0,
            max_isl_range_km: 5442.958,
        }
    }

    /// Reduced 8x8 shell used for desk-scale experiments.
    ///
    /// With only 64 satellites the shell1 link lengths would leave a single
    /// station uncovered most of the time, so the GSL range is stretched to
    /// just inside the 550 km horizon distance (about 2704 km) and the ISL
    /// range covers the widest +Grid spacing of an 8x8 torus.
    pub fn desk() -> Self {
        Self {
            orbit_count: 8,
            sats_per_orbit: 8,
            altitude_km: 550.0,
            inclination_deg: 53.0,
            phasing_factor: 1,
            max_gsl_range_km: 2650.0,
            max_isl_range_km: 6500.0,
        }
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        match name {
            "shell1" => Ok(Self::shell1()),
            "desk" | "desk8x8" => Ok(Self::desk()),
            other => Err(ConfigError::UnknownPreset(other.to_string())),
        }
    }

    pub fn satellite_count(&self) -> usize {
        self.orbit_count * self.sats_per_orbit
    }

    pub fn orbit_radius_km(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude_km
    }

    /// Orbital period in seconds.
    pub fn period_s(&self) -> f64 {
        2.0 * PI / mean_motion(self.orbit_radius_km())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Shell(msg));
        if self.orbit_count == 0 {
            return fail("orbit_count must be at least 1".into());
        }
        if self.sats_per_orbit == 0 {
            return fail("sats_per_orbit must be at least 1".into());
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return fail(format!(
                "inclination_deg {} outside [0, 180]",
                self.inclination_deg
            ));
        }
        if self.phasing_factor >= self.orbit_count {
            return fail(format!(
                "phasing_factor {} must be below orbit_count {}",
                self.phasing_factor, self.orbit_count
            ));
        }
        if !(self.altitude_km > 0.0) || !self.altitude_km.is_finite() {
            return fail(format!("altitude_km {} must be positive", self.altitude_km));
        }
        if !(self.max_gsl_range_km > 0.0) {
            return fail(format!(
                "max_gsl_range_km {} must be positive",
                self.max_gsl_range_km
            ));
        }
        if !(self.max_isl_range_km > 0.0) {
            return fail(format!(
                "max_isl_range_km {} must be positive",
                self.max_isl_range_km
            ));
        }
        Ok(())
    }
}

fn mean_motion(radius_km: f64) -> f64 {
    (MU_EARTH_KM3_S2 / radius_km.powi(3)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SatelliteId {
    pub orbit: usize,
    pub slot: usize,
    pub flat: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStation {
    pub id: usize,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

impl GroundStation {
    /// Builds a station, wrapping the longitude into [-180, 180).
    pub fn new(id: usize, latitude_deg: f64, longitude_deg: f64) -> Result<Self, ConfigError> {
        if !latitude_deg.is_finite() || latitude_deg.abs() > 90.0 {
            return Err(ConfigError::Station {
                id,
                reason: format!("latitude {latitude_deg} outside [-90, 90]"),
            });
        }
        if !longitude_deg.is_finite() {
            return Err(ConfigError::Station {
                id,
                reason: "longitude must be finite".into(),
            });
        }
        Ok(Self {
            id,
            latitude_deg,
            longitude_deg: normalize_longitude(longitude_deg),
        })
    }

    /// Earth-centred inertial position at `time_s` seconds past epoch.
    pub fn position_at(&self, time_s: f64) -> Position {
        let lat = self.latitude_deg.to_radians();
        let lon = self.longitude_deg.to_radians() + EARTH_ROTATION_RAD_S * time_s;
        [
            EARTH_RADIUS_KM * lat.cos() * lon.cos(),
            EARTH_RADIUS_KM * lat.cos() * lon.sin(),
            EARTH_RADIUS_KM * lat.sin(),
        ]
    }
}

pub fn normalize_longitude(lon: f64) -> f64 {
    let wrapped = (lon + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// Named station layouts.
pub fn station_preset(name: &str) -> Option<Vec<GroundStation>> {
    let raw: &[(f64, f64)] = match name {
        "equator" => &[(0.0, 0.0)],
        "shanghai" => &[(31.23, 121.47)],
        "cities4" => &[
            (31.23, 121.47),
            (40.71, -74.01),
            (51.51, -0.13),
            (-33.87, 151.21),
        ],
        _ => return None,
    };
    Some(
        raw.iter()
            .enumerate()
            .map(|(id, &(lat, lon))| GroundStation {
                id,
                latitude_deg: lat,
                longitude_deg: normalize_longitude(lon),
            })
            .collect(),
    )
}

pub const STATION_PRESETS: &[&str] = &["equator", "shanghai", "cities4"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalElements {
    pub id: SatelliteId,
    pub raan_rad: f64,
    /// Argument of latitude at epoch.
    pub anomaly_rad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationTopology {
    config: ShellConfig,
    epoch_s: f64,
    radius_km: f64,
    mean_motion_rad_s: f64,
    satellites: Vec<OrbitalElements>,
}

pub fn generate_walker_delta(
    config: ShellConfig,
    epoch_s: f64,
) -> Result<ConstellationTopology, ConfigError> {
    config.validate()?;
    let planes = config.orbit_count;
    let per_plane = config.sats_per_orbit;
    let total = planes * per_plane;
    let mut satellites = Vec::with_capacity(total);
    for orbit in 0..planes {
        let raan = 2.0 * PI * orbit as f64 / planes as f64;
        let phase = 2.0 * PI * (config.phasing_factor * orbit) as f64 / total as f64;
        for slot in 0..per_plane {
            let anomaly = 2.0 * PI * slot as f64 / per_plane as f64 + phase;
            satellites.push(OrbitalElements {
                id: SatelliteId {
                    orbit,
                    slot,
                    flat: orbit * per_plane + slot,
                },
                raan_rad: raan,
                anomaly_rad: anomaly,
            });
        }
    }
    let radius_km = config.orbit_radius_km();
    Ok(ConstellationTopology {
        config,
        epoch_s,
        radius_km,
        mean_motion_rad_s: mean_motion(radius_km),
        satellites,
    })
}

impl ConstellationTopology {
    pub fn config(&self) -> &ShellConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.satellites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satellites.is_empty()
    }

    pub fn satellites(&self) -> &[OrbitalElements] {
        &self.satellites
    }

    pub fn radius_km(&self) -> f64 {
        self.radius_km
    }

    pub fn epoch_s(&self) -> f64 {
        self.epoch_s
    }

    pub fn id(&self, orbit: usize, slot: usize) -> SatelliteId {
        let c = &self.config;
        assert!(orbit < c.orbit_count && slot < c.sats_per_orbit);
        SatelliteId {
            orbit,
            slot,
            flat: orbit * c.sats_per_orbit + slot,
        }
    }

    pub fn id_of_flat(&self, flat: usize) -> SatelliteId {
        self.satellites[flat].id
    }

    /// Inertial positions of every satellite at slot `t`.
    pub fn propagate(&self, t: usize, slot_seconds: f64) -> Vec<Position> {
        self.positions_at(t as f64 * slot_seconds)
    }

    /// Inertial positions `time_s` seconds after the slot-0 instant.
    pub fn positions_at(&self, time_s: f64) -> Vec<Position> {
        let elapsed = self.epoch_s + time_s;
        let (sin_i, cos_i) = self.config.inclination_deg.to_radians().sin_cos();
        let r = self.radius_km;
        self.satellites
            .iter()
            .map(|sat| {
                let u = sat.anomaly_rad + self.mean_motion_rad_s * elapsed;
                let (sin_u, cos_u) = u.sin_cos();
                let (sin_o, cos_o) = sat.raan_rad.sin_cos();
                [
                    r * (cos_o * cos_u - sin_o * sin_u * cos_i),
                    r * (sin_o * cos_u + cos_o * sin_u * cos_i),
                    r * sin_u * sin_i,
                ]
            })
            .collect()
    }

    /// +Grid neighbours in the order: previous slot, next slot, previous
    /// orbit, next orbit. Self-loops and duplicates (tiny shells) are dropped.
    pub fn isl_neighbors(&self, sat: SatelliteId) -> Vec<SatelliteId> {
        let c = &self.config;
        let (p, s) = (c.orbit_count, c.sats_per_orbit);
        let candidates = [
            (sat.orbit, (sat.slot + s - 1) % s),
            (sat.orbit, (sat.slot + 1) % s),
            ((sat.orbit + p - 1) % p, sat.slot),
            ((sat.orbit + 1) % p, sat.slot),
        ];
        let mut out: Vec<SatelliteId> = Vec::with_capacity(4);
        for (o, sl) in candidates {
            let id = self.id(o, sl);
            if id != sat && !out.contains(&id) {
                out.push(id);
            }
        }
        out
    }

    /// Every undirected +Grid pair, each listed once with `a < b`, sorted.
    pub fn isl_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .satellites
            .iter()
            .flat_map(|sat| {
                let a = sat.id.flat;
                self.isl_neighbors(sat.id)
                    .into_iter()
                    .map(move |n| (a.min(n.flat), a.max(n.flat)))
            })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }
}

pub fn distance_km(a: &Position, b: &Position) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Flat indices of satellites within `max_gsl_range_km` of the station
/// position, ascending.
pub fn visible_satellites(
    positions: &[Position],
    station_position: &Position,
    max_gsl_range_km: f64,
) -> Vec<usize> {
    positions
        .iter()
        .enumerate()
        .filter(|(_, p)| distance_km(p, station_position) <= max_gsl_range_km)
        .map(|(i, _)| i)
        .collect()
}

/// Per-slot link capacities, in data units (1 unit = 1 Mb).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandwidthProfile {
    pub gsl_units: u64,
    pub isl_units: u64,
    pub uplink_units: u64,
}

impl BandwidthProfile {
    /// Converts Gbps link rates into whole megabits per slot, rounding down.
    pub fn from_gbps(gsl_gbps: f64, isl_gbps: f64, uplink_gbps: f64, slot_seconds: f64) -> Self {
        let units = |gbps: f64| (gbps * slot_seconds * 1000.0 + 1e-9).floor().max(0.0) as u64;
        Self {
            gsl_units: units(gsl_gbps),
            isl_units: units(isl_gbps),
            uplink_units: units(uplink_gbps),
        }
    }

    pub fn uniform(units: u64) -> Self {
        Self {
            gsl_units: units,
            isl_units: units,
            uplink_units: units,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GslContact {
    pub station: usize,
    pub sat: usize,
}

/// Link state of one slot. `isl_up` is indexed by the table's link list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SlotContacts {
    pub gsl: Vec<GslContact>,
    pub isl_up: Vec<bool>,
}

impl SlotContacts {
    pub fn station_of(&self, sat: usize) -> Option<usize> {
        self.gsl.iter().find(|c| c.sat == sat).map(|c| c.station)
    }

    pub fn sat_of(&self, station: usize) -> Option<usize> {
        self.gsl
            .iter()
            .find(|c| c.station == station)
            .map(|c| c.sat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IslLink {
    pub a: usize,
    pub b: usize,
}

/// Time-indexed contact plan: GSL matchings, live ISLs and link capacities.
///
/// Geometry is shared behind `Arc`, so re-pricing a table with a different
/// bandwidth profile is cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactTable {
    sat_count: usize,
    station_count: usize,
    slot_seconds: f64,
    links: Arc<Vec<IslLink>>,
    /// `adjacency[sat]` = (neighbour, link index)
    adjacency: Arc<Vec<Vec<(usize, usize)>>>,
    slots: Arc<Vec<SlotContacts>>,
    bandwidth: BandwidthProfile,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContactError {
    #[error("slot {slot}: {reason}")]
    Invalid { slot: usize, reason: String },
}

impl ContactTable {
    /// Assembles a table from explicit slots, checking matching injectivity
    /// and index ranges.
    pub fn from_slots(
        sat_count: usize,
        station_count: usize,
        pairs: &[(usize, usize)],
        slots: Vec<SlotContacts>,
        bandwidth: BandwidthProfile,
        slot_seconds: f64,
    ) -> Result<Self, ContactError> {
        let links: Vec<IslLink> = pairs.iter().map(|&(a, b)| IslLink { a, b }).collect();
        let mut adjacency = vec![Vec::new(); sat_count];
        for (idx, l) in links.iter().enumerate() {
            if l.a >= sat_count || l.b >= sat_count || l.a == l.b {
                return Err(ContactError::Invalid {
                    slot: 0,
                    reason: format!("bad ISL pair ({}, {})", l.a, l.b),
                });
            }
            adjacency[l.a].push((l.b, idx));
            adjacency[l.b].push((l.a, idx));
        }
        for adj in adjacency.iter_mut() {
            adj.sort_unstable();
        }
        for (t, slot) in slots.iter().enumerate() {
            let bad = |reason: String| Err(ContactError::Invalid { slot: t, reason });
            if slot.isl_up.len() != links.len() {
                return bad(format!(
                    "isl_up has {} entries for {} links",
                    slot.isl_up.len(),
                    links.len()
                ));
            }
            let mut seen_sat = vec![false; sat_count];
            let mut seen_station = vec![false; station_count];
            for c in &slot.gsl {
                if c.sat >= sat_count || c.station >= station_count {
                    return bad(format!("contact {c:?} out of range"));
                }
                if std::mem::replace(&mut seen_sat[c.sat], true) {
                    return bad(format!("satellite {} assigned twice", c.sat));
                }
                if std::mem::replace(&mut seen_station[c.station], true) {
                    return bad(format!("station {} assigned twice", c.station));
                }
            }
        }
        Ok(Self {
            sat_count,
            station_count,
            slot_seconds,
            links: Arc::new(links),
            adjacency: Arc::new(adjacency),
            slots: Arc::new(slots),
            bandwidth,
        })
    }

    pub fn with_bandwidth(&self, bandwidth: BandwidthProfile) -> Self {
        Self {
            bandwidth,
            ..self.clone()
        }
    }

    pub fn horizon(&self) -> usize {
        self.slots.len()
    }

    pub fn sat_count(&self) -> usize {
        self.sat_count
    }

    pub fn station_count(&self) -> usize {
        self.station_count
    }

    pub fn slot_seconds(&self) -> f64 {
        self.slot_seconds
    }

    pub fn bandwidth(&self) -> BandwidthProfile {
        self.bandwidth
    }

    pub fn links(&self) -> &[IslLink] {
        &self.links
    }

    pub fn slot(&self, t: usize) -> &SlotContacts {
        &self.slots[t]
    }

    pub fn slots(&self) -> &[SlotContacts] {
        &self.slots
    }

    /// Neighbours of `sat` whose ISL is up at slot `t`, ascending.
    pub fn live_neighbors(&self, t: usize, sat: usize) -> impl Iterator<Item = usize> + '_ {
        let up = &self.slots[t].isl_up;
        self.adjacency[sat]
            .iter()
            .filter(move |(_, link)| up[*link])
            .map(|(n, _)| *n)
    }

    pub fn link_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency
            .get(a)?
            .iter()
            .find(|(n, _)| *n == b)
            .map(|(_, l)| *l)
    }

    pub fn isl_up(&self, t: usize, a: usize, b: usize) -> bool {
        self.link_between(a, b)
            .map(|l| self.slots[t].isl_up[l])
            .unwrap_or(false)
    }

    /// Per-satellite count of GSL contact slots in `[from, to)`.
    pub fn contact_slots(&self, from: usize, to: usize) -> Vec<usize> {
        let mut counts = vec![0; self.sat_count];
        for slot in &self.slots[from.min(self.horizon())..to.min(self.horizon())] {
            for c in &slot.gsl {
                counts[c.sat] += 1;
            }
        }
        counts
    }
}

/// Computes the contact plan for `horizon` slots: per slot, stations in
/// ascending id each take their nearest visible satellite not yet claimed
/// (ties by flat index); ISLs are the +Grid pairs within range.
pub fn build_contact_table(
    topology: &ConstellationTopology,
    stations: &[GroundStation],
    horizon: usize,
    slot_seconds: f64,
    bandwidth: BandwidthProfile,
) -> ContactTable {
    let cfg = topology.config();
    let pairs = topology.isl_pairs();
    let mut order: Vec<&GroundStation> = stations.iter().collect();
    order.sort_by_key(|s| s.id);
    let station_index: Vec<usize> = order.iter().map(|s| s.id).collect();

    let slots = (0..horizon)
        .map(|t| {
            let time_s = t as f64 * slot_seconds;
            let positions = topology.positions_at(time_s);
            let mut taken = vec![false; positions.len()];
            let mut gsl = Vec::new();
            for (station_idx, station) in order.iter().enumerate() {
                let here = station.position_at(topology.epoch_s() + time_s);
                let best = positions
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !taken[*i])
                    .map(|(i, p)| (distance_km(p, &here), i))
                    .filter(|(d, _)| *d <= cfg.max_gsl_range_km)
                    .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                if let Some((_, sat)) = best {
                    taken[sat] = true;
                    gsl.push(GslContact {
                        station: station_idx,
                        sat,
                    });
                }
            }
            let isl_up = pairs
                .iter()
                .map(|&(a, b)| distance_km(&positions[a], &positions[b]) <= cfg.max_isl_range_km)
                .collect();
            SlotContacts { gsl, isl_up }
        })
        .collect();

    ContactTable::from_slots(
        topology.len(),
        station_index.len(),
        &pairs,
        slots,
        bandwidth,
        slot_seconds,
    )
    .expect("geometry-derived contact table is consistent")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(orbits: usize, per: usize, f: usize) -> ConstellationTopology {
        generate_walker_delta(
            ShellConfig {
                orbit_count: orbits,
                sats_per_orbit: per,
                altitude_km: 550.0,
                inclination_deg: 53.0,
                phasing_factor: f,
                max_gsl_range_km: 1260.0,
                max_isl_range_km: 20_000.0,
            },
            0.0,
        )
        .unwrap()
    }

    fn ids(topo: &ConstellationTopology, raw: &[(usize, usize)]) -> Vec<SatelliteId> {
        raw.iter().map(|&(o, s)| topo.id(o, s)).collect()
    }

    #[test]
    fn shell1_preset_has_1584_satellites() {
        let topo = generate_walker_delta(ShellConfig::shell1(), 0.0).unwrap();
        assert_eq!(topo.len(), 1584);
        assert_eq!(topo.config().altitude_km, 550.0);
        assert_eq!(topo.config().inclination_deg, 53.0);
    }

    #[test]
    fn spacing_of_four_by_four() {
        let topo = small(4, 4, 0);
        assert_eq!(topo.len(), 16);
        let mut raans: Vec<i64> = topo
            .satellites()
            .iter()
            .map(|s| s.raan_rad.to_degrees().round() as i64)
            .collect();
        raans.dedup();
        assert_eq!(raans, vec![0, 90, 180, 270]);
        let anomalies: Vec<i64> = topo.satellites()[..4]
            .iter()
            .map(|s| s.anomaly_rad.to_degrees().round() as i64)
            .collect();
        assert_eq!(anomalies, vec![0, 90, 180, 270]);
    }

    #[test]
    fn phasing_offsets_next_plane() {
        let topo = small(4, 4, 1);
        let step = topo.satellites()[4].anomaly_rad - topo.satellites()[0].anomaly_rad;
        assert!((step.to_degrees() - 360.0 / 16.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = ShellConfig::shell1();
        c.orbit_count = 0;
        assert!(generate_walker_delta(c, 0.0).is_err());
        let mut c = ShellConfig::shell1();
        c.phasing_factor = 72;
        assert!(generate_walker_delta(c, 0.0).is_err());
        let mut c = ShellConfig::shell1();
        c.inclination_deg = 181.0;
        assert!(generate_walker_delta(c, 0.0).is_err());
        let mut c = ShellConfig::shell1();
        c.max_isl_range_km = 0.0;
        assert!(generate_walker_delta(c, 0.0).is_err());
        assert!(ShellConfig::preset("nope").is_err());
    }

    #[test]
    fn single_satellite_has_no_neighbors() {
        let topo = small(1, 1, 0);
        assert!(topo.isl_neighbors(topo.id(0, 0)).is_empty());
        assert!(topo.isl_pairs().is_empty());
    }

    #[test]
    fn plus_grid_neighbors() {
        let topo = small(4, 4, 0);
        assert_eq!(
            topo.isl_neighbors(topo.id(1, 1)),
            ids(&topo, &[(1, 0), (1, 2), (0, 1), (2, 1)])
        );
        assert_eq!(
            topo.isl_neighbors(topo.id(0, 0)),
            ids(&topo, &[(0, 3), (0, 1), (3, 0), (1, 0)])
        );
    }

    #[test]
    fn shell1_neighbors_are_four_and_symmetric() {
        let topo = generate_walker_delta(ShellConfig::shell1(), 0.0).unwrap();
        for sat in topo.satellites() {
            let n = topo.isl_neighbors(sat.id);
            assert_eq!(n.len(), 4);
            for other in n {
                assert!(topo.isl_neighbors(other).contains(&sat.id));
            }
        }
        assert_eq!(topo.isl_pairs().len(), 2 * 1584);
    }

    #[test]
    fn circular_radius_and_inclination_bound() {
        let topo = generate_walker_delta(ShellConfig::shell1(), 0.0).unwrap();
        let zmax = 6921.0 * 53f64.to_radians().sin();
        for t in [0, 17, 600, 5000] {
            for p in topo.propagate(t, 1.0) {
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                assert!((r - 6921.0).abs() < 1e-6);
                assert!(p[2].abs() <= zmax + 1e-6);
            }
        }
    }

    #[test]
    fn equatorial_satellite_starts_on_x_axis() {
        let mut c = ShellConfig::shell1();
        c.orbit_count = 1;
        c.sats_per_orbit = 1;
        c.phasing_factor = 0;
        c.inclination_deg = 0.0;
        let topo = generate_walker_delta(c, 0.0).unwrap();
        let p = topo.propagate(0, 1.0)[0];
        assert!((p[0] - 6921.0).abs() < 1e-9 && p[1].abs() < 1e-9 && p[2].abs() < 1e-9);
    }

    #[test]
    fn propagation_is_periodic() {
        let topo = small(3, 5, 1);
        let period = topo.config().period_s();
        let slot = period / 40.0;
        let a = topo.propagate(3, slot);
        let b = topo.propagate(43, slot);
        for (p, q) in a.iter().zip(&b) {
            assert!(distance_km(p, q) < 1e-6);
        }
    }

    #[test]
    fn overhead_and_antipode_visibility() {
        let station = GroundStation::new(0, 0.0, 0.0).unwrap();
        let here = station.position_at(0.0);
        assert!((here[0] - 6371.0).abs() < 1e-9);
        let overhead = [6921.0, 0.0, 0.0];
        let antipode = [-6921.0, 0.0, 0.0];
        assert!((distance_km(&overhead, &here) - 550.0).abs() < 1e-9);
        assert_eq!(
            visible_satellites(&[overhead, antipode], &here, 1260.0),
            vec![0]
        );
    }

    #[test]
    fn longitude_normalization() {
        assert_eq!(normalize_longitude(180.0), -180.0);
        assert_eq!(normalize_longitude(190.0), -170.0);
        assert_eq!(normalize_longitude(-180.0), -180.0);
        assert_eq!(normalize_longitude(359.0), -1.0);
        assert!(GroundStation::new(0, 91.0, 0.0).is_err());
    }

    fn equatorial_pair() -> ConstellationTopology {
        // two satellites in one equatorial plane
        let c = ShellConfig {
            orbit_count: 1,
            sats_per_orbit: 2,
            altitude_km: 550.0,
            inclination_deg: 0.0,
            phasing_factor: 0,
            max_gsl_range_km: 1260.0,
            max_isl_range_km: 20_000.0,
        };
        generate_walker_delta(c, 0.0).unwrap()
    }

    #[test]
    fn single_visible_satellite_is_assigned() {
        let topo = equatorial_pair();
        let stations = [GroundStation::new(0, 0.0, 0.0).unwrap()];
        let table = build_contact_table(&topo, &stations, 1, 1.0, BandwidthProfile::uniform(10));
        assert_eq!(table.slot(0).gsl, vec![GslContact { station: 0, sat: 0 }]);
        assert_eq!(table.bandwidth().gsl_units, 10);
    }

    #[test]
    fn shared_satellite_goes_to_lower_station_id() {
        let topo = equatorial_pair();
        let stations = [
            GroundStation::new(1, 1.0, 0.0).unwrap(),
            GroundStation::new(0, -1.0, 0.0).unwrap(),
        ];
        let table = build_contact_table(&topo, &stations, 1, 1.0, BandwidthProfile::uniform(10));
        assert_eq!(table.slot(0).gsl, vec![GslContact { station: 0, sat: 0 }]);
    }

    #[test]
    fn bandwidth_quantization_rounds_down() {
        let b = BandwidthProfile::from_gbps(1.0, 5.0, 0.0015, 1.0);
        assert_eq!((b.gsl_units, b.isl_units, b.uplink_units), (1000, 5000, 1));
        assert_eq!(
            BandwidthProfile::from_gbps(10.0, 1.0, 1.0, 0.5).gsl_units,
            5000
        );
    }

    #[test]
    fn from_slots_rejects_double_assignment() {
        let slot = SlotContacts {
            gsl: vec![
                GslContact { station: 0, sat: 0 },
                GslContact { station: 1, sat: 0 },
            ],
            isl_up: vec![],
        };
        assert!(
            ContactTable::from_slots(1, 2, &[], vec![slot], BandwidthProfile::uniform(1), 1.0)
                .is_err()
        );
    }

    #[test]
    fn shell1_contact_windows_last_minutes() {
        let topo = generate_walker_delta(ShellConfig::shell1(), 0.0).unwrap();
        let station = GroundStation::new(0, 0.0, 0.0).unwrap();
        let mut run = vec![0usize; topo.len()];
        let mut longest = 0usize;
        for t in 0..600 {
            let here = station.position_at(t as f64);
            let visible = visible_satellites(&topo.propagate(t, 1.0), &here, 1260.0);
            let mut next = vec![0usize; topo.len()];
            for v in visible {
                next[v] = run[v] + 1;
                longest = longest.max(next[v]);
            }
            run = next;
        }
        // a full pass under 1260 km slant range spans a few minutes
        assert!((150..=900).contains(&longest), "longest window {longest}s");
    }
}
