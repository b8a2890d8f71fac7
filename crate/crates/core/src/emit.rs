//! Per-second colour tables and their exports.
//!
//! Codes: 0 red, 1 yellow, 2 green or WALK, 3 green flash or flashing
//! don't-walk, 4 red/amber, -1 permissive or lights off.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Palette;
use crate::diagnostic::Diagnostic;
use crate::movement::MovementId;
use crate::timing::PlacedPhase;

pub const RED: i8 = 0;
pub const YELLOW: i8 = 1;
pub const GREEN: i8 = 2;
pub const FLASH: i8 = 3;
pub const RED_AMBER: i8 = 4;
pub const OFF: i8 = -1;

pub const CODES: [i8; 6] = [RED, YELLOW, GREEN, FLASH, RED_AMBER, OFF];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmitError {
    #[error("unsupported export format `{0}`")]
    UnsupportedFormat(String),
    #[error("invalid colour table: {0}")]
    InvalidTable(String),
}

impl EmitError {
    pub fn code(&self) -> &'static str {
        match self {
            EmitError::UnsupportedFormat(_) => "unsupported-format",
            EmitError::InvalidTable(_) => "invalid-table",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ColorTable {
    pub cycle: u32,
    /// Rows in canonical movement order.
    pub rows: BTreeMap<MovementId, Vec<i8>>,
}

impl ColorTable {
    pub fn new(cycle: u32) -> Self {
        ColorTable {
            cycle,
            rows: BTreeMap::new(),
        }
    }

    pub fn row(&self, m: MovementId) -> Option<&[i8]> {
        self.rows.get(&m).map(Vec::as_slice)
    }

    pub fn code(&self, m: MovementId, t: u32) -> Option<i8> {
        self.rows.get(&m).and_then(|r| r.get(t as usize)).copied()
    }

    /// Checks row lengths and codes.
    pub fn check(&self) -> Result<(), EmitError> {
        for (m, row) in &self.rows {
            if !m.is_signalised() {
                return Err(EmitError::InvalidTable(format!("{m} cannot have a row")));
            }
            if row.len() != self.cycle as usize {
                return Err(EmitError::InvalidTable(format!(
                    "row {m} has {} entries for a {} s cycle",
                    row.len(),
                    self.cycle
                )));
            }
            if let Some(c) = row.iter().find(|c| !CODES.contains(c)) {
                return Err(EmitError::InvalidTable(format!(
                    "row {m} has unknown code {c}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut out = format!("{{\"cycle\":{},\"rows\":{{", self.cycle);
        let mut first = true;
        for (m, row) in &self.rows {
            out.push_str(if first { "\n" } else { ",\n" });
            first = false;
            let codes: Vec<String> = row.iter().map(i8::to_string).collect();
            let _ = write!(out, "\"{m}\":[{}]", codes.join(","));
        }
        if !first {
            out.push('\n');
        }
        out.push_str("}}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self, EmitError> {
        let t: ColorTable =
            serde_json::from_str(text).map_err(|e| EmitError::InvalidTable(e.to_string()))?;
        t.check()?;
        Ok(t)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec!["movement".to_owned()];
        header.extend((0..self.cycle).map(|t| t.to_string()));
        w.write_record(&header).expect("in-memory write");
        for (m, row) in &self.rows {
            let mut rec = vec![m.to_string()];
            rec.extend(row.iter().map(i8::to_string));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    pub fn from_csv(text: &str) -> Result<Self, EmitError> {
        let bad = |msg: String| EmitError::InvalidTable(msg);
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.get(0) != Some("movement") {
            return Err(bad("first column must be `movement`".into()));
        }
        for (i, h) in header.iter().skip(1).enumerate() {
            if h != i.to_string() {
                return Err(bad(format!("column {} is labelled `{h}`", i + 1)));
            }
        }
        let mut table = ColorTable::new(header.len() as u32 - 1);
        for rec in r.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let name = rec.get(0).unwrap_or_default();
            let m: MovementId = name
                .parse()
                .map_err(|_| bad(format!("unknown movement `{name}`")))?;
            let row = rec
                .iter()
                .skip(1)
                .map(|c| {
                    c.trim()
                        .parse::<i8>()
                        .map_err(|_| bad(format!("row {name}: bad code `{c}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if table.rows.insert(m, row).is_some() {
                return Err(bad(format!("duplicate row {name}")));
            }
        }
        table.check()?;
        Ok(table)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
    Svg,
    Text,
}

impl FromStr for ExportFormat {
    type Err = EmitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            "svg" => Ok(ExportFormat::Svg),
            "text" | "txt" => Ok(ExportFormat::Text),
            _ => Err(EmitError::UnsupportedFormat(s.to_owned())),
        }
    }
}

impl ExportFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Json => "application/json",
            ExportFormat::Csv => "text/csv",
            ExportFormat::Svg => "image/svg+xml",
            ExportFormat::Text => "text/plain; charset=utf-8",
        }
    }
}

pub fn export(table: &ColorTable, format: ExportFormat) -> Vec<u8> {
    export_with_palette(table, format, &Palette::default())
}

pub fn export_with_palette(table: &ColorTable, format: ExportFormat, palette: &Palette) -> Vec<u8> {
    match format {
        ExportFormat::Json => table.to_json().into_bytes(),
        ExportFormat::Csv => table.to_csv().into_bytes(),
        ExportFormat::Svg => render_svg(table, palette).into_bytes(),
        ExportFormat::Text => render_times_table(table).into_bytes(),
    }
}

fn paint(row: &mut [i8], start: u32, cycle: u32, segments: &[(u32, i8)]) {
    let mut t = start;
    for &(len, code) in segments {
        for _ in 0..len {
            row[(t % cycle) as usize] = code;
            t += 1;
        }
    }
}

/// Renders placed, merged phases into a colour table.
pub fn render_colors(phases: &[PlacedPhase], cycle: u32) -> (ColorTable, Vec<Diagnostic>) {
    let mut table = ColorTable::new(cycle);
    let mut notes = Vec::new();
    for p in phases.iter().filter(|p| p.phase.is_signalised()) {
        table
            .rows
            .entry(p.phase)
            .or_insert_with(|| vec![RED; cycle as usize]);
    }
    let permissive_first = phases
        .iter()
        .filter(|p| p.permissive)
        .chain(phases.iter().filter(|p| !p.permissive));
    for p in permissive_first {
        let Some(row) = table.rows.get_mut(&p.phase) else {
            continue;
        };
        let iv = &p.interval;
        let q = &p.params;
        if p.prohibited {
            continue;
        }
        if p.permissive {
            paint(row, iv.start, cycle, &[(iv.len(), OFF)]);
        } else if p.phase.is_pedestrian() {
            let lead = q.late_start + q.red_amber;
            let (walk, clear) = if p.ped_clear > q.green {
                notes.push(Diagnostic::error(
                    "negative-walk",
                    format!("{}#{}", p.phase, p.phase_order),
                    format!(
                        "{} s left after red and clearance cannot hold {} s of flashing don't-walk",
                        q.green, p.ped_clear
                    ),
                ));
                (0, q.green)
            } else {
                (q.green - p.ped_clear, p.ped_clear)
            };
            let rest = iv.len() - lead - walk - clear;
            paint(
                row,
                iv.start,
                cycle,
                &[(lead, RED), (walk, GREEN), (clear, FLASH), (rest, RED)],
            );
        } else {
            paint(
                row,
                iv.start,
                cycle,
                &[
                    (q.late_start, RED),
                    (q.red_amber, RED_AMBER),
                    (q.green - q.green_flash, GREEN),
                    (q.green_flash, FLASH),
                    (q.yellow, YELLOW),
                    (q.all_red + q.early_cut_off, RED),
                ],
            );
        }
    }
    (table, notes)
}

fn glyph(code: i8) -> char {
    match code {
        GREEN => 'G',
        FLASH => 'F',
        YELLOW => 'Y',
        RED_AMBER => 'A',
        OFF => '.',
        _ => 'r',
    }
}

pub const LEGEND: &str = "legend: G green/walk  F green flash/flashing don't walk  Y yellow  A red-amber  r red  . lights off";

/// Monospaced signal times table: one glyph per second.
pub fn render_times_table(table: &ColorTable) -> String {
    let mut out = format!("cycle {} s\n", table.cycle);
    let width = table
        .rows
        .keys()
        .map(|m| m.to_string().len())
        .max()
        .unwrap_or(0)
        .max(9)
        + 1;
    if !table.rows.is_empty() {
        let c = table.cycle as usize;
        let mut numbers = vec![' '; c];
        let mut ticks = vec![' '; c];
        for t in (0..c).step_by(10) {
            ticks[t] = '|';
            for (k, ch) in t.to_string().chars().enumerate() {
                if t + k < c {
                    numbers[t + k] = ch;
                }
            }
        }
        let _ = writeln!(
            out,
            "{:width$}{}",
            "",
            numbers.iter().collect::<String>().trim_end()
        );
        let _ = writeln!(
            out,
            "{:width$}{}",
            "",
            ticks.iter().collect::<String>().trim_end()
        );
        for (m, row) in &table.rows {
            let _ = writeln!(
                out,
                "{:width$}{}",
                m.to_string(),
                row.iter().map(|&c| glyph(c)).collect::<String>()
            );
        }
    }
    out.push_str(LEGEND);
    out.push('\n');
    out
}

const CELL_W: u32 = 6;
const ROW_H: u32 = 18;
const LABEL_W: u32 = 90;

pub fn render_svg(table: &ColorTable, palette: &Palette) -> String {
    let width = LABEL_W + CELL_W * table.cycle;
    let height = ROW_H * (table.rows.len() as u32 + 1);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"monospace\" font-size=\"11\">"
    );
    for t in (0..table.cycle).step_by(10) {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"12\">{t}</text>",
            LABEL_W + CELL_W * t
        );
    }
    for (i, (m, row)) in table.rows.iter().enumerate() {
        let y = ROW_H * (i as u32 + 1);
        let _ = writeln!(out, "<g data-movement=\"{m}\">");
        let _ = writeln!(out, "<text x=\"2\" y=\"{}\">{m}</text>", y + 13);
        for (t, &code) in row.iter().enumerate() {
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{CELL_W}\" height=\"{}\" fill=\"{}\" data-code=\"{code}\"/>",
                LABEL_W + CELL_W * t as u32,
                y + 1,
                ROW_H - 2,
                palette.fill(code)
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timing::{CycleInterval, PhaseKind, SplitParams};

    fn m(s: &str) -> MovementId {
        s.parse().unwrap()
    }

    fn placed(name: &str, start: u32, end: u32, cycle: u32, params: SplitParams) -> PlacedPhase {
        PlacedPhase {
            phase: m(name),
            phase_order: 1,
            interval: CycleInterval::new(start, end, cycle).unwrap(),
            params,
            kind: PhaseKind::Major,
            permissive: false,
            prohibited: false,
            ped_clear: 0,
        }
    }

    fn runs(row: &[i8]) -> Vec<(usize, usize, i8)> {
        let mut out: Vec<(usize, usize, i8)> = Vec::new();
        for (t, &c) in row.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.2 == c => last.1 = t,
                _ => out.push((t, t, c)),
            }
        }
        out
    }

    #[test]
    fn protected_vehicle_split() {
        let p = placed(
            "WBL",
            65,
            85,
            110,
            SplitParams {
                green: 17,
                yellow: 3,
                green_flash: 3,
                ..Default::default()
            },
        );
        let (t, notes) = render_colors(&[p], 110);
        assert!(notes.is_empty());
        assert_eq!(
            runs(t.row(m("WBL")).unwrap()),
            vec![
                (0, 64, 0),
                (65, 78, 2),
                (79, 81, 3),
                (82, 84, 1),
                (85, 109, 0)
            ]
        );
    }

    #[test]
    fn pedestrian_walk_and_clearance() {
        let mut p = placed(
            "NorthPed",
            85,
            110,
            110,
            SplitParams {
                green: 25,
                ..Default::default()
            },
        );
        p.ped_clear = 3;
        let (t, _) = render_colors(&[p], 110);
        assert_eq!(
            runs(t.row(m("NorthPed")).unwrap()),
            vec![(0, 84, 0), (85, 106, 2), (107, 109, 3)]
        );
    }

    #[test]
    fn permissive_is_lights_off() {
        let mut p = placed(
            "NBR",
            65,
            85,
            110,
            SplitParams {
                green: 20,
                ..Default::default()
            },
        );
        p.permissive = true;
        let (t, _) = render_colors(&[p], 110);
        assert_eq!(
            runs(t.row(m("NBR")).unwrap()),
            vec![(0, 64, 0), (65, 84, -1), (85, 109, 0)]
        );
    }

    #[test]
    fn negative_walk_is_reported() {
        let mut p = placed(
            "EastPed",
            0,
            4,
            20,
            SplitParams {
                green: 2,
                late_start: 2,
                ..Default::default()
            },
        );
        p.ped_clear = 3;
        let (t, notes) = render_colors(&[p], 20);
        assert_eq!(notes[0].code, "negative-walk");
        assert!(!t.row(m("EastPed")).unwrap().contains(&GREEN));
    }

    #[test]
    fn dummy_has_no_row() {
        let p = placed(
            "dummyPhase",
            0,
            10,
            20,
            SplitParams {
                green: 7,
                yellow: 3,
                ..Default::default()
            },
        );
        assert!(render_colors(&[p], 20).0.rows.is_empty());
    }

    fn small() -> ColorTable {
        let mut t = ColorTable::new(4);
        t.rows.insert(m("SBT"), vec![2, 1, 0, 0]);
        t.rows.insert(m("NBL"), vec![0, 0, 4, -1]);
        t
    }

    #[test]
    fn json_round_trip_and_layout() {
        let t = small();
        let text = t.to_json();
        assert_eq!(
            text,
            "{\"cycle\":4,\"rows\":{\n\"NBL\":[0,0,4,-1],\n\"SBT\":[2,1,0,0]\n}}\n"
        );
        assert_eq!(ColorTable::from_json(&text).unwrap(), t);
        assert_eq!(ColorTable::new(5).to_json(), "{\"cycle\":5,\"rows\":{}}\n");
    }

    #[test]
    fn csv_layout() {
        let t = small();
        let text = t.to_csv();
        assert_eq!(text, "movement,0,1,2,3\nNBL,0,0,4,-1\nSBT,2,1,0,0\n");
        assert_eq!(text.lines().count(), 3);
        assert_eq!(ColorTable::from_csv(&text).unwrap(), t);
    }

    #[test]
    fn svg_uses_palette() {
        let palette = Palette {
            red_amber: "#123456".into(),
            ..Default::default()
        };
        let svg = render_svg(&small(), &palette);
        assert!(svg.contains("fill=\"#123456\" data-code=\"4\""));
    }

    #[test]
    fn times_table() {
        let empty = render_times_table(&ColorTable::new(10));
        assert_eq!(empty, format!("cycle 10 s\n{LEGEND}\n"));
        let mut t = ColorTable::new(12);
        t.rows.insert(m("EBR"), vec![-1; 12]);
        let text = render_times_table(&t);
        assert!(text.contains("EBR       ............\n"), "{text}");
    }

    #[test]
    fn unsupported_format() {
        assert_eq!(
            "pdf".parse::<ExportFormat>(),
            Err(EmitError::UnsupportedFormat("pdf".into()))
        );
    }
}
