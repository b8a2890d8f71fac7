//! Movement naming for a four-legged intersection.
//!
//! Vehicular movements are named by travel direction and turn (`WBT` is the
//! westbound through movement). Pedestrian crossings are named by the leg
//! they cross (`NorthPed` crosses the north leg); two-stage crossings split a
//! crosswalk at the median into half `A`, on the side where traffic enters the
//! intersection, and half `B`, on the side where it leaves.
//!
//! The derived ordering is the canonical row order used by every export:
//! vehicular NB, SB, EB, WB × L, T, R, U, then pedestrian crossings leg by leg.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Direction of travel of a vehicular movement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    North,
    South,
    East,
    West,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Turn {
    Left,
    Through,
    Right,
    UTurn,
}

/// An intersection leg (approach).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Leg {
    North,
    South,
    East,
    West,
}

/// Half of a two-stage crosswalk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Half {
    /// The half carrying traffic into the intersection.
    A,
    /// The half carrying traffic out of the intersection.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MovementId {
    Vehicle {
        bound: Bound,
        turn: Turn,
    },
    Pedestrian {
        leg: Leg,
        half: Option<Half>,
    },
    /// Placeholder occupying time in a stage without any signal head.
    Dummy,
    /// Exclusive pedestrian phase; expanded into the four crossings during cleansing.
    AllPed,
}

pub const BOUNDS: [Bound; 4] = [Bound::North, Bound::South, Bound::East, Bound::West];
pub const TURNS: [Turn; 4] = [Turn::Left, Turn::Through, Turn::Right, Turn::UTurn];
pub const LEGS: [Leg; 4] = [Leg::North, Leg::South, Leg::East, Leg::West];

impl Bound {
    fn code(self) -> &'static str {
        match self {
            Bound::North => "NB",
            Bound::South => "SB",
            Bound::East => "EB",
            Bound::West => "WB",
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            Bound::North => "northbound",
            Bound::South => "southbound",
            Bound::East => "eastbound",
            Bound::West => "westbound",
        }
    }

    pub fn opposite(self) -> Bound {
        match self {
            Bound::North => Bound::South,
            Bound::South => Bound::North,
            Bound::East => Bound::West,
            Bound::West => Bound::East,
        }
    }

    /// Leg a vehicle travelling in this direction enters from.
    pub fn entry_leg(self) -> Leg {
        match self {
            Bound::North => Leg::South,
            Bound::South => Leg::North,
            Bound::East => Leg::West,
            Bound::West => Leg::East,
        }
    }

    /// Direction after turning left (right-hand traffic).
    pub fn left(self) -> Bound {
        match self {
            Bound::North => Bound::West,
            Bound::West => Bound::South,
            Bound::South => Bound::East,
            Bound::East => Bound::North,
        }
    }

    pub fn right(self) -> Bound {
        self.left().opposite()
    }

    pub fn is_perpendicular(self, other: Bound) -> bool {
        other != self && other != self.opposite()
    }

    /// Rotate a quarter turn clockwise, seen from above with north up.
    pub fn rotate(self) -> Bound {
        self.right()
    }
}

impl Turn {
    fn code(self) -> &'static str {
        match self {
            Turn::Left => "L",
            Turn::Through => "T",
            Turn::Right => "R",
            Turn::UTurn => "U",
        }
    }
}

impl Leg {
    fn word(self) -> &'static str {
        match self {
            Leg::North => "North",
            Leg::South => "South",
            Leg::East => "East",
            Leg::West => "West",
        }
    }

    /// Leg a vehicle leaves through when it travels in `bound`.
    pub fn toward(bound: Bound) -> Leg {
        bound.opposite().entry_leg()
    }

    pub fn rotate(self) -> Leg {
        match self {
            Leg::North => Leg::East,
            Leg::East => Leg::South,
            Leg::South => Leg::West,
            Leg::West => Leg::North,
        }
    }
}

impl MovementId {
    pub const fn vehicle(bound: Bound, turn: Turn) -> Self {
        MovementId::Vehicle { bound, turn }
    }

    pub const fn ped(leg: Leg) -> Self {
        MovementId::Pedestrian { leg, half: None }
    }

    pub const fn ped_half(leg: Leg, half: Half) -> Self {
        MovementId::Pedestrian {
            leg,
            half: Some(half),
        }
    }

    /// All 28 signalised movements (16 vehicular, 12 pedestrian) in canonical order.
    pub fn all_signalised() -> Vec<MovementId> {
        let mut out = Vec::with_capacity(28);
        for bound in BOUNDS {
            for turn in TURNS {
                out.push(MovementId::vehicle(bound, turn));
            }
        }
        for leg in LEGS {
            out.push(MovementId::ped(leg));
            out.push(MovementId::ped_half(leg, Half::A));
            out.push(MovementId::ped_half(leg, Half::B));
        }
        out
    }

    pub fn is_pedestrian(self) -> bool {
        matches!(self, MovementId::Pedestrian { .. })
    }

    pub fn is_vehicular(self) -> bool {
        matches!(self, MovementId::Vehicle { .. })
    }

    pub fn is_through(self) -> bool {
        matches!(
            self,
            MovementId::Vehicle {
                turn: Turn::Through,
                ..
            }
        )
    }

    /// Whether the movement owns a signal head and therefore a colour row.
    pub fn is_signalised(self) -> bool {
        self.is_vehicular() || self.is_pedestrian()
    }

    /// Legs traversed by a vehicular movement: (entry, exit).
    pub fn legs(self) -> Option<(Leg, Leg)> {
        match self {
            MovementId::Vehicle { bound, turn } => {
                let exit_bound = match turn {
                    Turn::Left => bound.left(),
                    Turn::Through => bound,
                    Turn::Right => bound.right(),
                    Turn::UTurn => bound.opposite(),
                };
                Some((bound.entry_leg(), Leg::toward(exit_bound)))
            }
            _ => None,
        }
    }

    /// Quarter-turn clockwise rotation of the movement geometry.
    pub fn rotate(self) -> MovementId {
        match self {
            MovementId::Vehicle { bound, turn } => MovementId::vehicle(bound.rotate(), turn),
            MovementId::Pedestrian { leg, half } => MovementId::Pedestrian {
                leg: leg.rotate(),
                half,
            },
            other => other,
        }
    }

    pub fn name(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MovementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MovementId::Vehicle { bound, turn } => write!(f, "{}{}", bound.code(), turn.code()),
            MovementId::Pedestrian { leg, half } => {
                write!(f, "{}Ped", leg.word())?;
                match half {
                    Some(Half::A) => f.write_str("A"),
                    Some(Half::B) => f.write_str("B"),
                    None => Ok(()),
                }
            }
            MovementId::Dummy => f.write_str("dummyPhase"),
            MovementId::AllPed => f.write_str("AllPed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` is not a canonical movement name")]
pub struct NotCanonical(pub String);

impl FromStr for MovementId {
    type Err = NotCanonical;

    /// Parses canonical names only; aliases are resolved by the cleansing pass.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dummyPhase" => return Ok(MovementId::Dummy),
            "AllPed" => return Ok(MovementId::AllPed),
            _ => {}
        }
        for bound in BOUNDS {
            for turn in TURNS {
                let m = MovementId::vehicle(bound, turn);
                if s == m.to_string() {
                    return Ok(m);
                }
            }
        }
        for leg in LEGS {
            let Some(rest) = s.strip_prefix(leg.word()) else {
                continue;
            };
            return match rest {
                "Ped" => Ok(MovementId::ped(leg)),
                "PedA" => Ok(MovementId::ped_half(leg, Half::A)),
                "PedB" => Ok(MovementId::ped_half(leg, Half::B)),
                _ => Err(NotCanonical(s.to_owned())),
            };
        }
        Err(NotCanonical(s.to_owned()))
    }
}

impl Serialize for MovementId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MovementId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
