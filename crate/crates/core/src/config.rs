//! Intersection configuration: available signal groups, name aliases, default
//! pedestrian parents, inter-green defaults, the conflict matrix and the
//! export palette.
//!
//! The shipped default describes a four-legged intersection with right-hand
//! traffic and every movement signalised. Its conflict matrix is derived from
//! the movement geometry by [`IntersectionConfig::generated_default`]; the
//! asset file is a frozen copy of that output so it can be edited by hand.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::movement::{Bound, Half, Leg, MovementId, Turn, BOUNDS, LEGS};

pub const DEFAULT_CONFIG_JSON: &str = include_str!("../assets/intersection.default.json");

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterGreen {
    pub late_start: u32,
    pub red_amber: u32,
    pub yellow: u32,
    pub green_flash: u32,
    pub all_red: u32,
    pub early_cut_off: u32,
}

impl Default for InterGreen {
    fn default() -> Self {
        InterGreen {
            late_start: 0,
            red_amber: 0,
            yellow: 3,
            green_flash: 0,
            all_red: 0,
            early_cut_off: 0,
        }
    }
}

/// SVG fill colours per colour code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Palette {
    pub red: String,
    pub yellow: String,
    pub green: String,
    pub flash: String,
    pub red_amber: String,
    pub off: String,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            red: "#d62728".into(),
            yellow: "#ffbf00".into(),
            green: "#2ca02c".into(),
            flash: "#98df8a".into(),
            red_amber: "#ff7f0e".into(),
            off: "#c7c7c7".into(),
        }
    }
}

impl Palette {
    pub fn fill(&self, code: i8) -> &str {
        match code {
            1 => &self.yellow,
            2 => &self.green,
            3 => &self.flash,
            4 => &self.red_amber,
            -1 => &self.off,
            _ => &self.red,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionConfig {
    /// Movements with signal heads at this intersection.
    pub movements: BTreeSet<MovementId>,
    /// Extra phase-name aliases, matched after folding case and punctuation.
    #[serde(default)]
    pub aliases: BTreeMap<String, MovementId>,
    /// Parents substituted for `"default"` on pedestrian records.
    pub ped_parents: BTreeMap<MovementId, Vec<MovementId>>,
    #[serde(default)]
    pub inter_green: InterGreen,
    /// Flashing don't-walk length overriding the derived default.
    #[serde(default)]
    pub ped_clear: Option<u32>,
    #[serde(default = "default_min_walk")]
    pub min_walk: u32,
    /// Movements whose absence from a plan is reported.
    #[serde(default)]
    pub critical: Vec<MovementId>,
    pub conflicts: Vec<(MovementId, MovementId)>,
    /// Conflicting pairs tolerated while one side is lights-off.
    #[serde(default)]
    pub exceptions: Vec<(MovementId, MovementId)>,
    #[serde(default)]
    pub palette: Palette,
}

fn default_min_walk() -> u32 {
    7
}

fn ordered(a: MovementId, b: MovementId) -> (MovementId, MovementId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Default for IntersectionConfig {
    fn default() -> Self {
        IntersectionConfig::from_json(DEFAULT_CONFIG_JSON).expect("shipped config is valid")
    }
}

impl IntersectionConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: IntersectionConfig = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config always serializes") + "\n"
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.min_walk < 1 {
            return Err(ConfigError::Invalid("min_walk must be at least 1".into()));
        }
        for (ped, parents) in &self.ped_parents {
            if !ped.is_pedestrian() {
                return Err(ConfigError::Invalid(format!(
                    "{ped} is not a pedestrian movement"
                )));
            }
            if parents.is_empty() {
                return Err(ConfigError::Invalid(format!(
                    "{ped} has an empty parent list"
                )));
            }
            for p in parents {
                if !p.is_vehicular() || !self.movements.contains(p) {
                    return Err(ConfigError::Invalid(format!(
                        "default parent {p} of {ped} is not an available vehicular movement"
                    )));
                }
            }
        }
        for (a, b) in self.conflicts.iter().chain(&self.exceptions) {
            if a == b {
                return Err(ConfigError::Invalid(format!("{a} paired with itself")));
            }
        }
        Ok(())
    }

    /// Conflict pairs, each ordered (smaller, larger).
    pub fn conflict_set(&self) -> BTreeSet<(MovementId, MovementId)> {
        self.conflicts.iter().map(|&(a, b)| ordered(a, b)).collect()
    }

    pub fn exception_set(&self) -> BTreeSet<(MovementId, MovementId)> {
        self.exceptions
            .iter()
            .map(|&(a, b)| ordered(a, b))
            .collect()
    }

    pub fn conflicts(&self, a: MovementId, b: MovementId) -> bool {
        let key = ordered(a, b);
        self.conflicts.iter().any(|&(x, y)| ordered(x, y) == key)
    }

    /// The four-leg, all-movements configuration built from geometry.
    pub fn generated_default() -> Self {
        let movements: BTreeSet<MovementId> = MovementId::all_signalised().into_iter().collect();

        let mut ped_parents = BTreeMap::new();
        for leg in LEGS {
            // the through movement running alongside this crosswalk
            let along = match leg {
                Leg::North => Bound::West,
                Leg::East => Bound::North,
                Leg::South => Bound::East,
                Leg::West => Bound::South,
            };
            let through = MovementId::vehicle(along, Turn::Through);
            ped_parents.insert(MovementId::ped(leg), vec![through]);
            // each half runs with the left turn that leaves the other half clear
            let entering_left = BOUNDS
                .into_iter()
                .find(|b| b.entry_leg() == leg)
                .map(|b| MovementId::vehicle(b, Turn::Left))
                .expect("four legs");
            let exiting_left = BOUNDS
                .into_iter()
                .find(|b| Leg::toward(b.left()) == leg)
                .map(|b| MovementId::vehicle(b, Turn::Left))
                .expect("four legs");
            ped_parents.insert(
                MovementId::ped_half(leg, Half::A),
                vec![through, exiting_left],
            );
            ped_parents.insert(
                MovementId::ped_half(leg, Half::B),
                vec![through, entering_left],
            );
        }

        let (conflicts, exceptions) = geometric_conflicts();
        IntersectionConfig {
            movements,
            aliases: default_aliases(),
            ped_parents,
            inter_green: InterGreen::default(),
            ped_clear: None,
            min_walk: default_min_walk(),
            critical: BOUNDS
                .into_iter()
                .map(|b| MovementId::vehicle(b, Turn::Through))
                .collect(),
            conflicts,
            exceptions,
            palette: Palette::default(),
        }
    }
}

fn default_aliases() -> BTreeMap<String, MovementId> {
    let mut m = BTreeMap::new();
    m.insert("∅A".to_owned(), MovementId::ped(Leg::North));
    m.insert(
        "∅B".to_owned(),
        MovementId::vehicle(Bound::West, Turn::Through),
    );
    m.insert("∅E".to_owned(), MovementId::ped_half(Leg::North, Half::A));
    m.insert("∅F".to_owned(), MovementId::ped_half(Leg::North, Half::B));
    m
}

fn geometric_conflicts() -> (Vec<(MovementId, MovementId)>, Vec<(MovementId, MovementId)>) {
    let mut conflicts = BTreeSet::new();
    let mut exceptions = BTreeSet::new();
    let turning = [Turn::Left, Turn::UTurn];

    for a in BOUNDS {
        for b in BOUNDS {
            let at = MovementId::vehicle(a, Turn::Through);
            let bt = MovementId::vehicle(b, Turn::Through);
            if a.is_perpendicular(b) {
                conflicts.insert(ordered(at, bt));
            }
            for ta in turning {
                let al = MovementId::vehicle(a, ta);
                if b == a.opposite() || a.is_perpendicular(b) {
                    conflicts.insert(ordered(al, bt));
                }
                if b == a.opposite() && ta == Turn::Left {
                    exceptions.insert(ordered(al, bt));
                }
                if a.is_perpendicular(b) {
                    for tb in turning {
                        conflicts.insert(ordered(al, MovementId::vehicle(b, tb)));
                    }
                }
            }
        }
    }

    for leg in LEGS {
        for bound in BOUNDS {
            for turn in [Turn::Left, Turn::Through, Turn::UTurn] {
                let v = MovementId::vehicle(bound, turn);
                let (entry, exit) = v.legs().expect("vehicular");
                if entry == leg {
                    conflicts.insert(ordered(MovementId::ped(leg), v));
                    conflicts.insert(ordered(MovementId::ped_half(leg, Half::A), v));
                }
                if exit == leg {
                    conflicts.insert(ordered(MovementId::ped(leg), v));
                    conflicts.insert(ordered(MovementId::ped_half(leg, Half::B), v));
                }
            }
        }
    }
    (
        conflicts.into_iter().collect(),
        exceptions.into_iter().collect(),
    )
}
