//! Hand-stepped expected colour tables for the valid corpus cases.
//!
//! Each row is written as inclusive second ranges; every second not listed
//! is red. Nothing here calls into the pipeline.

#![allow(dead_code)]

use std::collections::BTreeMap;

pub const RED: i8 = 0;
pub const YEL: i8 = 1;
pub const GRN: i8 = 2;
pub const FLS: i8 = 3;
pub const RA: i8 = 4;
pub const OFF: i8 = -1;
/// Walk and flashing don't walk share the green and flash codes.
pub const WALK: i8 = GRN;
pub const FDW: i8 = FLS;

/// Approaches north, south, east, west; turns left, through, right, U;
/// then the crosswalks leg by leg, whole crossing before its halves.
pub const ROW_ORDER: [&str; 28] = [
    "NBL",
    "NBT",
    "NBR",
    "NBU",
    "SBL",
    "SBT",
    "SBR",
    "SBU",
    "EBL",
    "EBT",
    "EBR",
    "EBU",
    "WBL",
    "WBT",
    "WBR",
    "WBU",
    "NorthPed",
    "NorthPedA",
    "NorthPedB",
    "SouthPed",
    "SouthPedA",
    "SouthPedB",
    "EastPed",
    "EastPedA",
    "EastPedB",
    "WestPed",
    "WestPedA",
    "WestPedB",
];

pub type Seg = (u32, u32, i8);

pub struct Expected {
    pub cycle: u32,
    pub rows: BTreeMap<String, Vec<i8>>,
}

impl Expected {
    fn new(cycle: u32) -> Self {
        Expected {
            cycle,
            rows: BTreeMap::new(),
        }
    }

    fn row(mut self, names: &[&str], segs: &[Seg]) -> Self {
        let mut cells = vec![RED; self.cycle as usize];
        for &(a, b, code) in segs {
            assert!(
                a <= b && b < self.cycle,
                "segment {a}..={b} outside cycle {}",
                self.cycle
            );
            for t in a..=b {
                cells[t as usize] = code;
            }
        }
        for n in names {
            assert!(
                self.rows.insert((*n).to_owned(), cells.clone()).is_none(),
                "row {n} twice"
            );
        }
        self
    }

    fn without(mut self, name: &str) -> Self {
        assert!(self.rows.remove(name).is_some());
        self
    }

    /// `movement,0,1,...` header then one line per row in [`ROW_ORDER`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("movement");
        for t in 0..self.cycle {
            out.push_str(&format!(",{t}"));
        }
        out.push('\n');
        let mut rows: Vec<_> = self.rows.iter().collect();
        rows.sort_by_key(|(name, _)| {
            ROW_ORDER
                .iter()
                .position(|n| n == name)
                .unwrap_or_else(|| panic!("unknown movement {name}"))
        });
        for (name, cells) in rows {
            out.push_str(name);
            for c in cells {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

fn veh(g: (u32, u32), y: (u32, u32)) -> Vec<Seg> {
    vec![(g.0, g.1, GRN), (y.0, y.1, YEL)]
}

fn ped(w: (u32, u32), c: (u32, u32)) -> Vec<Seg> {
    vec![(w.0, w.1, WALK), (c.0, c.1, FDW)]
}

fn ring_stage_overlap() -> Expected {
    Expected::new(110)
        .row(&["NBL"], &[(0, 14, GRN), (15, 17, FLS), (18, 20, YEL)])
        .row(&["SBT"], &[(21, 58, GRN), (59, 61, FLS), (62, 64, YEL)])
        .row(&["SBL"], &[(0, 32, GRN), (33, 35, FLS), (36, 38, YEL)])
        .row(&["NBT"], &[(39, 58, GRN), (59, 61, FLS), (62, 64, YEL)])
        .row(
            &["WBL", "EBL", "NBR"],
            &[(65, 78, GRN), (79, 81, FLS), (82, 84, YEL)],
        )
        .row(
            &["WBT", "EBT"],
            &[(85, 103, GRN), (104, 106, FLS), (107, 109, YEL)],
        )
        .row(
            &["WBR"],
            &[(88, 109, GRN), (0, 14, GRN), (15, 17, FLS), (18, 20, YEL)],
        )
        .row(&["NorthPed", "SouthPed"], &ped((85, 106), (107, 109)))
        .row(&["EastPed"], &ped((39, 61), (62, 64)))
        .row(&["WestPed"], &ped((21, 61), (62, 64)))
}

fn c11() -> Expected {
    Expected::new(138)
        .row(&["WBL"], &veh((0, 45), (46, 48)))
        .row(&["EBT"], &veh((49, 98), (99, 101)))
        .row(&["SouthPed"], &[(49, 101, WALK)])
        .row(&["EastPed"], &[(102, 137, WALK)])
        .row(&["NBL"], &veh((102, 134), (135, 137)))
        .row(&["WestPed"], &[(0, 27, WALK)])
        .row(&["WBT"], &veh((28, 98), (99, 101)))
}

fn c11_1() -> Expected {
    c11()
        .row(&["EBR"], &[(60, 137, OFF)])
        .row(&["NBR"], &[(100, 137, OFF), (0, 29, OFF)])
}

fn c39() -> Expected {
    Expected::new(115)
        .row(&["NBT", "SBT"], &veh((0, 27), (28, 30)))
        .row(&["NBL", "SBL"], &veh((31, 51), (52, 54)))
        .row(&["EBT", "WBT"], &veh((55, 84), (85, 87)))
        .row(&["EBL", "WBL"], &veh((88, 111), (112, 114)))
        .row(&["WestPedA"], &ped((0, 51), (52, 54)))
        .row(
            &["WestPedB"],
            &[(88, 114, WALK), (0, 27, WALK), (28, 30, FDW)],
        )
        .row(&["NorthPed", "SouthPed"], &ped((55, 84), (85, 87)))
        .row(&["EastPed"], &ped((0, 27), (28, 30)))
}

fn ring_dual() -> Expected {
    Expected::new(117)
        .row(&["WBL"], &veh((0, 29), (30, 32)))
        .row(&["EBT"], &veh((33, 53), (54, 56)))
        .row(&["NBL", "SBL"], &veh((57, 79), (80, 82)))
        .row(&["SBT", "NBT"], &veh((83, 113), (114, 116)))
        .row(&["EBL"], &veh((0, 14), (15, 17)))
        .row(&["WBT"], &veh((18, 53), (54, 56)))
}

fn stage_reservice() -> Expected {
    Expected::new(116)
        .row(&["WBL", "EBL"], &veh((0, 21), (22, 24)))
        .row(
            &["WBT", "EBT"],
            &[
                (25, 54, GRN),
                (55, 57, YEL),
                (104, 112, GRN),
                (113, 115, YEL),
            ],
        )
        .row(&["NBL", "SBL"], &veh((58, 80), (81, 83)))
        .row(&["NBT", "SBT"], &veh((84, 100), (101, 103)))
        .row(&["NorthPed"], &ped((25, 54), (55, 57)))
}

fn stage_in_ring() -> Expected {
    Expected::new(116)
        .row(&["WBL"], &veh((0, 30), (31, 33)))
        .row(&["EBT"], &veh((34, 54), (55, 57)))
        .row(&["NBL", "SBL", "EBR"], &veh((58, 80), (81, 83)))
        .row(&["SBT", "NBT"], &veh((84, 112), (113, 115)))
        .row(&["EBL"], &veh((0, 21), (22, 24)))
        .row(&["WBT"], &veh((25, 54), (55, 57)))
}

fn protected_permissive() -> Expected {
    Expected::new(90)
        .row(
            &["NBL", "SBL"],
            &[(0, 16, GRN), (17, 19, YEL), (20, 59, OFF)],
        )
        .row(&["NBT", "SBT"], &veh((20, 56), (57, 59)))
        .row(&["EBT", "WBT"], &veh((60, 86), (87, 89)))
}

fn split_phasing() -> Expected {
    Expected::new(90)
        .row(&["NBT", "NBL"], &veh((0, 26), (27, 29)))
        .row(&["SBT", "SBL"], &veh((30, 51), (52, 54)))
        .row(&["EBT", "WBT"], &veh((55, 86), (87, 89)))
        .row(&["NorthPed", "SouthPed"], &ped((55, 86), (87, 89)))
        .row(&["EastPed"], &ped((0, 26), (27, 29)))
        .row(&["WestPed"], &ped((30, 51), (52, 54)))
}

fn two_stage_north() -> Expected {
    Expected::new(100)
        .row(&["WBT", "EBT"], &veh((0, 26), (27, 29)))
        .row(&["WBL", "EBL"], &veh((30, 46), (47, 49)))
        .row(&["NBT", "SBT"], &veh((50, 76), (77, 79)))
        .row(&["NBL", "SBL"], &veh((80, 96), (97, 99)))
        .row(&["NorthPedA"], &ped((0, 46), (47, 49)))
        .row(
            &["NorthPedB"],
            &[(80, 99, WALK), (0, 26, WALK), (27, 29, FDW)],
        )
}

fn allped() -> Expected {
    Expected::new(80)
        .row(&["NBT", "SBT"], &veh((0, 26), (27, 29)))
        .row(&["EBT", "WBT"], &veh((30, 56), (57, 59)))
        .row(
            &["NorthPed", "SouthPed", "EastPed", "WestPed"],
            &ped((60, 74), (75, 79)),
        )
}

fn lpi() -> Expected {
    Expected::new(80)
        .row(&["NBT", "SBT"], &veh((4, 36), (37, 39)))
        .row(&["EBT", "WBT"], &veh((40, 76), (77, 79)))
        .row(&["EastPed", "WestPed"], &ped((0, 36), (37, 39)))
}

fn red_amber() -> Expected {
    Expected::new(70)
        .row(&["NBT", "SBT"], &[(0, 1, RA), (2, 29, GRN), (30, 32, YEL)])
        .row(
            &["EBT", "WBT"],
            &[(35, 36, RA), (37, 64, GRN), (65, 67, YEL)],
        )
        .row(&["NorthPed"], &ped((37, 64), (65, 69)))
}

fn green_window() -> Expected {
    Expected::new(70)
        .row(&["NBT", "SBT"], &veh((0, 36), (37, 39)))
        .row(&["EBT", "WBT"], &veh((40, 66), (67, 69)))
        .row(&["NBR"], &veh((5, 29), (30, 32)))
}

fn multi_parent_overlap() -> Expected {
    Expected::new(80)
        .row(&["EBT", "WBT"], &veh((0, 26), (27, 29)))
        .row(&["NBL", "SBL"], &veh((30, 46), (47, 49)))
        .row(&["NBT", "SBT"], &veh((50, 76), (77, 79)))
        .row(&["EBR"], &veh((0, 46), (47, 49)))
}

fn reservice_merge() -> Expected {
    Expected::new(69)
        .row(&["WBL"], &veh((0, 11), (12, 14)))
        .row(&["WBT"], &veh((0, 35), (36, 38)))
        .row(&["EBT"], &veh((15, 35), (36, 38)))
        .row(&["NBT", "SBT"], &veh((39, 65), (66, 68)))
}

fn two_stage_sixty() -> Expected {
    Expected::new(60)
        .row(&["NBT", "SBT"], &veh((0, 26), (27, 29)))
        .row(&["EBT", "WBT"], &veh((30, 56), (57, 59)))
}

fn standalone_only() -> Expected {
    Expected::new(90)
        .row(&["NBT", "SBT"], &veh((0, 41), (42, 44)))
        .row(&["EBT", "WBT"], &veh((45, 86), (87, 89)))
}

fn prohibited_left() -> Expected {
    two_stage_sixty().row(&["NBL"], &[])
}

fn permissive_left() -> Expected {
    two_stage_sixty().row(&["EBL", "WBL"], &[(30, 59, OFF)])
}

fn unlabeled_stages() -> Expected {
    Expected::new(110)
        .row(&["NBT"], &veh((0, 26), (27, 29)))
        .row(&["SBT"], &veh((30, 56), (57, 59)))
        .row(&["EBT"], &veh((60, 81), (82, 84)))
        .row(&["WBT"], &veh((85, 106), (107, 109)))
}

fn flat_ring() -> Expected {
    Expected::new(100)
        .row(&["WBL"], &veh((0, 16), (17, 19)))
        .row(&["WBT"], &veh((20, 46), (47, 49)))
        .row(&["NBL"], &veh((50, 66), (67, 69)))
        .row(&["NBT"], &veh((70, 96), (97, 99)))
}

fn overthinking_split() -> Expected {
    Expected::new(80)
        .row(&["EBT", "WBT"], &veh((0, 36), (37, 39)))
        .row(&["NBT", "SBT"], &veh((40, 76), (77, 79)))
        .row(&["EBR"], &[(70, 79, GRN), (0, 16, GRN), (17, 19, YEL)])
}

/// Expected table for every valid case id.
pub fn expected(case: &str) -> Option<Expected> {
    Some(match case {
        "ring-stage-overlap" => ring_stage_overlap(),
        "c11" => c11(),
        "c11-1" => c11_1(),
        "c39" => c39(),
        "c39-1" => c39().without("SBL"),
        "ring-dual" | "ring-in-stage" | "ring-in-stage-zh" => ring_dual(),
        "stage-reservice" => stage_reservice(),
        "stage-in-ring" => stage_in_ring(),
        "protected-permissive" => protected_permissive(),
        "split-phasing" => split_phasing(),
        "two-stage-north" => two_stage_north(),
        "allped" | "allped-zh" => allped(),
        "lpi" => lpi(),
        "red-amber" => red_amber(),
        "green-window" => green_window(),
        "multi-parent-overlap" => multi_parent_overlap(),
        "reservice-merge" => reservice_merge(),
        "cycle-mismatch-zh" | "garbled-then-fixed" => two_stage_sixty(),
        "standalone-only" => standalone_only(),
        "prohibited-left" => prohibited_left(),
        "permissive-left" => permissive_left(),
        "unlabeled-stages" => unlabeled_stages(),
        "flat-ring" => flat_ring(),
        "overthinking-split" => overthinking_split(),
        _ => return None,
    })
}

/// The well-formed plan each malformed case is a variant of, written
/// inline so the fault-tolerance check does not depend on the corpus.
pub fn well_formed_twin(case: &str) -> Option<&'static str> {
    Some(match case {
        "unlabeled-stages" => {
            r#"{"result1":[{"stageStyle":[[{"NBT":{"split":30}}],[{"SBT":{"split":30}}],[{"EBT":{"split":25}}],[{"WBT":{"split":25}}]]}],
               "result2":[{"NBT":{"phaseOrder":1}},{"SBT":{"phaseOrder":1}},{"EBT":{"phaseOrder":1}},{"WBT":{"phaseOrder":1}}]}"#
        }
        "flat-ring" => {
            r#"{"result1":[{"ringStyle":[[{"WBL":{"split":20}},{"WBT":{"split":30}},{"NBL":{"split":20}},{"NBT":{"split":30}}]]}],
               "result2":[{"WBL":{"phaseOrder":1}},{"WBT":{"phaseOrder":1}},{"NBL":{"phaseOrder":1}},{"NBT":{"phaseOrder":1}}]}"#
        }
        "overthinking-split" => {
            r#"{"result1":[{"stageStyle":[[{"EBT":{"split":40}},{"WBT":{"split":40}}],[{"NBT":{"split":40}},{"SBT":{"split":40}}]]}],
               "result2":[{"EBT":{"phaseOrder":1}},{"WBT":{"phaseOrder":1}},{"NBT":{"phaseOrder":1}},{"SBT":{"phaseOrder":1}},
                          {"EBR":{"phaseOrder":1,"startTime":70,"endTime":20}}]}"#
        }
        _ => return None,
    })
}
