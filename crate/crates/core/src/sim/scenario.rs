use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{ConfigError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// Symbol error rate with the best, 2nd, ..., worst relay, a random relay
    /// and no relay, versus SNR.
    RelayOrdering,
    /// Protocol metrics versus mean neighbor count.
    PerVsDensity,
    /// Protocol metrics versus contention window.
    TmaxSweep,
    /// Protocol metrics versus constellation size.
    ThroughputVsConstellation,
    /// Protocol metrics versus SNR.
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::RelayOrdering => "relay_ordering",
            ScenarioKind::PerVsDensity => "per_vs_density",
            ScenarioKind::TmaxSweep => "tmax_sweep",
            ScenarioKind::ThroughputVsConstellation => "throughput_vs_constellation",
            ScenarioKind::Custom => "custom",
        }
    }

    /// Name of the swept quantity.
    pub fn axis(self) -> &'static str {
        match self {
            ScenarioKind::RelayOrdering | ScenarioKind::Custom => "snr_db",
            ScenarioKind::PerVsDensity => "neighbors",
            ScenarioKind::TmaxSweep => "tmax_us",
            ScenarioKind::ThroughputVsConstellation => "qam_m",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = ();
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Ok(match s {
            "relay_ordering" => ScenarioKind::RelayOrdering,
            "per_vs_density" => ScenarioKind::PerVsDensity,
            "tmax_sweep" => ScenarioKind::TmaxSweep,
            "throughput_vs_constellation" => ScenarioKind::ThroughputVsConstellation,
            "custom" => ScenarioKind::Custom,
            _ => return Err(()),
        })
    }
}

/// Unit-distance SNR of the protocol scenarios, in dB.
pub const DEFAULT_SNR_DB: f64 = 25.0;
/// Radio range of the protocol scenarios, in units of the reference distance.
pub const DEFAULT_RADIO_RANGE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Relays per topology for relay ordering; mean neighbor count otherwise.
    pub neighbors: Vec<usize>,
    pub snr_db_min: f64,
    pub snr_db_max: f64,
    pub snr_db_step: f64,
    pub tmax_us: Vec<f64>,
    pub nsa: usize,
    pub qam_m: Vec<u32>,
    /// Topologies for relay ordering; packets per topology otherwise.
    pub trials: usize,
    pub seed: u64,
    /// Topologies per sweep point (protocol scenarios).
    pub topologies: usize,
    /// Nodes per topology (protocol scenarios).
    pub nodes: usize,
    pub radio_range: f64,
    /// Symbols per topology, arm and SNR (relay ordering).
    pub symbols: usize,
    /// Also run the direct-transmission baseline.
    pub baseline: bool,
}

pub const SCENARIO_KEYS: [&str; 16] = [
    "kind",
    "neighbors",
    "snr_db_min",
    "snr_db_max",
    "snr_db_step",
    "tmax_us",
    "nsa",
    "qam_m",
    "trials",
    "seed",
    "topologies",
    "nodes",
    "radio_range",
    "symbols",
    "baseline",
    "snr_db",
];

impl Scenario {
    pub fn preset(kind: ScenarioKind) -> Self {
        let protocol = Self {
            kind,
            neighbors: vec![10],
            snr_db_min: DEFAULT_SNR_DB,
            snr_db_max: DEFAULT_SNR_DB,
            snr_db_step: 5.0,
            tmax_us: vec![500.0],
            nsa: 8,
            qam_m: vec![4],
            trials: 50,
            seed: 1,
            topologies: 20,
            nodes: 50,
            radio_range: DEFAULT_RADIO_RANGE,
            symbols: 2000,
            baseline: false,
        };
        match kind {
            ScenarioKind::RelayOrdering => Self {
                neighbors: vec![5],
                snr_db_min: 15.0,
                snr_db_max: 30.0,
                trials: 200,
                radio_range: 1.0,
                ..protocol
            },
            ScenarioKind::PerVsDensity => Self { neighbors: vec![2, 5, 10, 15, 20], baseline: true, ..protocol },
            ScenarioKind::TmaxSweep => Self { tmax_us: vec![100.0, 300.0, 500.0, 700.0, 1000.0], ..protocol },
            ScenarioKind::ThroughputVsConstellation => Self { qam_m: vec![4, 16, 64], ..protocol },
            ScenarioKind::Custom => Self { snr_db_min: 20.0, snr_db_max: 35.0, ..protocol },
        }
    }

    pub fn snr_grid(&self) -> Vec<f64> {
        let mut grid = Vec::new();
        let mut k = 0;
        loop {
            let v = self.snr_db_min + k as f64 * self.snr_db_step;
            if v > self.snr_db_max + 1e-9 {
                break;
            }
            grid.push(v);
            k += 1;
        }
        grid
    }

    /// Values of the swept quantity, in order.
    pub fn axis_values(&self) -> Vec<f64> {
        match self.kind {
            ScenarioKind::RelayOrdering | ScenarioKind::Custom => self.snr_grid(),
            ScenarioKind::PerVsDensity => self.neighbors.iter().map(|&n| n as f64).collect(),
            ScenarioKind::TmaxSweep => self.tmax_us.clone(),
            ScenarioKind::ThroughputVsConstellation => self.qam_m.iter().map(|&m| m as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg).into());
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(self.snr_db_step > 0.0) || self.snr_db_max < self.snr_db_min || !self.snr_db_min.is_finite() {
            return bad("snr range is empty".into());
        }
        if self.neighbors.is_empty() || self.tmax_us.is_empty() || self.qam_m.is_empty() {
            return bad("list-valued keys need at least one value".into());
        }
        if self.nsa < 2 || self.nsa % 2 != 0 {
            return bad(format!("nsa must be even and at least 2, got {}", self.nsa));
        }
        if self.tmax_us.iter().any(|t| !(*t > 0.0)) {
            return bad("tmax_us must be positive".into());
        }
        if let Some(m) = self.qam_m.iter().find(|&&m| crate::phy::QamParams::new(m).is_err()) {
            return bad(format!("qam_m {m} is not a square constellation"));
        }
        if !(self.radio_range > 0.0) {
            return bad("radio_range must be positive".into());
        }
        if self.kind == ScenarioKind::RelayOrdering {
            if self.symbols == 0 {
                return bad("symbols must be positive".into());
            }
            if self.neighbors.len() != 1 || self.neighbors[0] == 0 {
                return bad("relay ordering needs one positive relay count".into());
            }
            if self.qam_m.len() != 1 {
                return bad("relay ordering takes one constellation".into());
            }
            return Ok(());
        }
        if self.topologies == 0 || self.nodes < 2 {
            return bad("need at least one topology of two nodes".into());
        }
        let single = |len: usize, key: &str, axis: bool| {
            if len != 1 && !axis {
                Err(ConfigError::Invalid(format!("{key} takes one value for {}", self.kind)))
            } else {
                Ok(())
            }
        };
        single(self.neighbors.len(), "neighbors", self.kind == ScenarioKind::PerVsDensity)?;
        single(self.tmax_us.len(), "tmax_us", self.kind == ScenarioKind::TmaxSweep)?;
        single(self.qam_m.len(), "qam_m", self.kind == ScenarioKind::ThroughputVsConstellation)?;
        if self.kind != ScenarioKind::Custom && self.snr_db_min != self.snr_db_max {
            return bad(format!("{} runs at a single SNR; set snr_db", self.kind));
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the kind's preset. `#` starts a
    /// comment. List-valued keys take comma-separated values. Without a
    /// `kind` key the scenario is `custom`.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_default(text, ScenarioKind::Custom)
    }

    /// Like [`Scenario::parse`] with `default_kind` used when the text has
    /// no `kind` key.
    pub fn parse_with_default(text: &str, default_kind: ScenarioKind) -> Result<Self> {
        let mut pairs: Vec<(usize, String, String)> = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Malformed { line: i + 1, text: raw.to_string() }.into());
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if !SCENARIO_KEYS.contains(&k.as_str()) {
                return Err(ConfigError::UnknownKey { line: i + 1, key: k }.into());
            }
            if !seen.insert(k.clone()) {
                return Err(ConfigError::DuplicateKey { key: k }.into());
            }
            pairs.push((i + 1, k, v));
        }
        let kind = match pairs.iter().find(|(_, k, _)| k == "kind") {
            Some((_, _, v)) => v.parse().map_err(|_| ConfigError::BadValue { key: "kind".into(), value: v.clone() })?,
            None => default_kind,
        };
        let mut s = Self::preset(kind);
        for (_, k, v) in &pairs {
            s.set(k, v)?;
        }
        s.validate()?;
        Ok(s)
    }

    /// Applies one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn one<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, ConfigError> {
            v.trim().parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: v.into() })
        }
        fn list<T: FromStr>(key: &str, v: &str) -> std::result::Result<Vec<T>, ConfigError> {
            v.split(',').map(|x| one(key, x)).collect()
        }
        match key {
            "kind" => {
                self.kind = value.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into() })?
            }
            "neighbors" => self.neighbors = list(key, value)?,
            "snr_db_min" => self.snr_db_min = one(key, value)?,
            "snr_db_max" => self.snr_db_max = one(key, value)?,
            "snr_db_step" => self.snr_db_step = one(key, value)?,
            "snr_db" => {
                self.snr_db_min = one(key, value)?;
                self.snr_db_max = self.snr_db_min;
            }
            "tmax_us" => self.tmax_us = list(key, value)?,
            "nsa" => self.nsa = one(key, value)?,
            "qam_m" => self.qam_m = list(key, value)?,
            "trials" => self.trials = one(key, value)?,
            "seed" => self.seed = one(key, value)?,
            "topologies" => self.topologies = one(key, value)?,
            "nodes" => self.nodes = one(key, value)?,
            "radio_range" => self.radio_range = one(key, value)?,
            "symbols" => self.symbols = one(key, value)?,
            "baseline" => self.baseline = one(key, value)?,
            _ => return Err(ConfigError::UnknownKey { line: 0, key: key.into() }.into()),
        }
        Ok(())
    }

    /// `key = value` lines that [`Scenario::parse`] reads back to `self`.
    pub fn to_text(&self) -> String {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("kind", self.kind.to_string());
        put("neighbors", join(&self.neighbors));
        put("snr_db_min", self.snr_db_min.to_string());
        put("snr_db_max", self.snr_db_max.to_string());
        put("snr_db_step", self.snr_db_step.to_string());
        put("tmax_us", join(&self.tmax_us));
        put("nsa", self.nsa.to_string());
        put("qam_m", join(&self.qam_m));
        put("trials", self.trials.to_string());
        put("seed", self.seed.to_string());
        put("topologies", self.topologies.to_string());
        put("nodes", self.nodes.to_string());
        put("radio_range", self.radio_range.to_string());
        put("symbols", self.symbols.to_string());
        put("baseline", self.baseline.to_string());
        out
    }
}
