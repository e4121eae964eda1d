//! Switch fabrics on a parallel-rail framework.
//!
//! A [`CircuitLayout`] is a row of equally spaced rails crossed by an ordered
//! list of columns. Each column holds 2x2 devices on adjacent rail pairs
//! (a placement at rail `r` spans `r` and `r + 1`) or a multi-rail shuffle
//! block. Light only moves forward through the columns.

mod generate;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use generate::generate;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FabricError {
    #[error("unsupported size for {kind}: {detail}")]
    UnsupportedSize { kind: ArchitectureKind, detail: String },
    #[error("palette too small: need {needed} distinct resonances, got {distinct}")]
    PaletteTooSmall { needed: usize, distinct: usize },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("unknown architecture kind {0:?}")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchitectureKind {
    Crosspoint,
    SpankeBenes,
    Piloss,
    #[serde(rename = "clos_benes_16")]
    ClosBenes16,
    #[serde(rename = "select_8to1")]
    Select8To1,
    #[serde(rename = "select_1to8")]
    Select1To8,
    Mux8,
    Demux8,
    Multicrossbar,
    #[serde(rename = "wss_6x6x4")]
    Wss6x6x4,
    #[serde(rename = "wss_8x8x3")]
    Wss8x8x3,
    #[serde(rename = "wcc_4x4x4")]
    Wcc4x4x4,
}

impl ArchitectureKind {
    pub const ALL: [ArchitectureKind; 12] = [
        Self::Crosspoint,
        Self::SpankeBenes,
        Self::Piloss,
        Self::ClosBenes16,
        Self::Select8To1,
        Self::Select1To8,
        Self::Mux8,
        Self::Demux8,
        Self::Multicrossbar,
        Self::Wss6x6x4,
        Self::Wss8x8x3,
        Self::Wcc4x4x4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Crosspoint => "crosspoint",
            Self::SpankeBenes => "spanke_benes",
            Self::Piloss => "piloss",
            Self::ClosBenes16 => "clos_benes_16",
            Self::Select8To1 => "select_8to1",
            Self::Select1To8 => "select_1to8",
            Self::Mux8 => "mux8",
            Self::Demux8 => "demux8",
            Self::Multicrossbar => "multicrossbar",
            Self::Wss6x6x4 => "wss_6x6x4",
            Self::Wss8x8x3 => "wss_8x8x3",
            Self::Wcc4x4x4 => "wcc_4x4x4",
        }
    }

    /// Kinds whose colored devices are routed per wavelength.
    pub fn is_wavelength_routed(self) -> bool {
        matches!(self, Self::Multicrossbar | Self::Wss6x6x4 | Self::Wss8x8x3 | Self::Wcc4x4x4)
    }
}

impl fmt::Display for ArchitectureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ArchitectureKind {
    type Err = FabricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| FabricError::UnknownKind(s.into()))
    }
}

/// Architecture kind plus its size parameters. `None` picks the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub kind: ArchitectureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<usize>,
}

impl ArchitectureSpec {
    pub fn new(kind: ArchitectureKind) -> Self {
        Self { kind, n: None, colors: None }
    }

    pub fn with_n(kind: ArchitectureKind, n: usize) -> Self {
        Self { kind, n: Some(n), colors: None }
    }

    pub fn with_colors(kind: ArchitectureKind, colors: usize) -> Self {
        Self { kind, n: None, colors: Some(colors) }
    }

    /// Port count and color count after defaults, checked against each kind's domain.
    pub fn resolved(&self) -> Result<(usize, usize), FabricError> {
        let unsupported = |detail: String| FabricError::UnsupportedSize { kind: self.kind, detail };
        let fixed = |n: usize, colors: usize| -> Result<(usize, usize), FabricError> {
            match (self.n, self.colors) {
                (Some(m), _) if m != n => Err(unsupported(format!("n must be {n}, got {m}"))),
                (_, Some(c)) if c != colors => Err(unsupported(format!("colors must be {colors}, got {c}"))),
                _ => Ok((n, colors)),
            }
        };
        match self.kind {
            ArchitectureKind::Crosspoint | ArchitectureKind::SpankeBenes | ArchitectureKind::Piloss => {
                let n = self.n.unwrap_or(8);
                if !(2..=16).contains(&n) {
                    return Err(unsupported(format!("n must lie in 2..=16, got {n}")));
                }
                if self.colors.is_some_and(|c| c != 1) {
                    return Err(unsupported("space switches are monochromatic".into()));
                }
                Ok((n, 1))
            }
            ArchitectureKind::Multicrossbar => {
                let colors = self.colors.unwrap_or(3);
                if !(1..=8).contains(&colors) {
                    return Err(unsupported(format!("colors must lie in 1..=8, got {colors}")));
                }
                if self.n.is_some_and(|n| n != 2) {
                    return Err(unsupported("multicrossbar is 2x2".into()));
                }
                Ok((2, colors))
            }
            ArchitectureKind::ClosBenes16 => fixed(16, 1),
            ArchitectureKind::Select8To1 | ArchitectureKind::Select1To8 => fixed(8, 1),
            ArchitectureKind::Mux8 | ArchitectureKind::Demux8 => fixed(8, 8),
            ArchitectureKind::Wss6x6x4 => fixed(6, 4),
            ArchitectureKind::Wss8x8x3 => fixed(8, 3),
            ArchitectureKind::Wcc4x4x4 => fixed(4, 4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ControlId(pub u32);

impl fmt::Display for ControlId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementKind {
    /// Add-drop resonator switch. Unheated it drops (cross); heated it passes (bar).
    Switch,
    /// Interferometric switch. Unpowered it is in bar.
    Mzi,
    /// Passive add-drop dedicated to one color.
    Filter,
    Crossover,
    /// Passive 2x2 splitter.
    Coupler,
    /// Abstract multi-rail permutation.
    Shuffle,
}

impl PlacementKind {
    pub fn is_active(self) -> bool {
        matches!(self, Self::Switch | Self::Mzi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actuation {
    Cross,
    Bar,
}

impl Actuation {
    pub fn flip(self) -> Self {
        match self {
            Self::Cross => Self::Bar,
            Self::Bar => Self::Cross,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Top rail; a 2x2 spans `rail` and `rail + 1`.
    pub rail: usize,
    pub kind: PlacementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlId>,
    /// Resonance of a wavelength-dedicated device (nm).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_nm: Option<f64>,
    /// Palette slot the color was taken from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<usize>,
    /// Shuffle only: offset `k` inside the block goes to offset `permutation[k]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
}

impl Placement {
    pub fn passive(rail: usize, kind: PlacementKind) -> Self {
        Self { rail, kind, control: None, color_nm: None, channel: None, permutation: None }
    }

    pub fn span(&self) -> usize {
        self.permutation.as_ref().map_or(2, Vec::len)
    }

    pub fn rails(&self) -> std::ops::Range<usize> {
        self.rail..self.rail + self.span()
    }

    /// State of an active device when its control is not driven.
    pub fn ambient(&self) -> Option<Actuation> {
        match self.kind {
            PlacementKind::Switch => Some(Actuation::Cross),
            PlacementKind::Mzi => Some(Actuation::Bar),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Column {
    pub placements: Vec<Placement>,
}

/// Absorber on `rail` right after `column`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Terminator {
    pub rail: usize,
    pub column: usize,
}

/// Physical spacing, kept as metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pitch {
    pub rail_um: f64,
    pub column_um: f64,
}

impl Default for Pitch {
    fn default() -> Self {
        Self { rail_um: 9.0, column_um: 12.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitLayout {
    pub arch: ArchitectureSpec,
    pub n_rails: usize,
    pub columns: Vec<Column>,
    pub terminators: Vec<Terminator>,
    /// Rail of each logical input.
    pub inputs: Vec<usize>,
    /// Rails of each logical output. A demultiplexed output spans one rail per color.
    pub outputs: Vec<Vec<usize>>,
    #[serde(default)]
    pub pitch: Pitch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub active: usize,
    pub passive_crossovers: usize,
    pub passive_filters: usize,
    pub couplers: usize,
    pub shuffle_blocks: usize,
    pub terminators: usize,
    pub rails: usize,
    pub columns: usize,
}

impl ComponentCounts {
    /// Crossovers, filters and couplers.
    pub fn passive(&self) -> usize {
        self.passive_crossovers + self.passive_filters + self.couplers
    }
}

impl CircuitLayout {
    pub fn empty(arch: ArchitectureSpec, n_rails: usize) -> Self {
        Self {
            arch,
            n_rails,
            columns: Vec::new(),
            terminators: Vec::new(),
            inputs: (0..n_rails).collect(),
            outputs: (0..n_rails).map(|r| vec![r]).collect(),
            pitch: Pitch::default(),
        }
    }

    pub fn placements(&self) -> impl Iterator<Item = (usize, &Placement)> {
        self.columns.iter().enumerate().flat_map(|(c, col)| col.placements.iter().map(move |p| (c, p)))
    }

    /// Every control id with its column and placement, in layout order.
    pub fn controls(&self) -> impl Iterator<Item = (ControlId, usize, &Placement)> {
        self.placements().filter_map(|(c, p)| p.control.map(|id| (id, c, p)))
    }

    pub fn placement_of(&self, id: ControlId) -> Option<&Placement> {
        self.controls().find(|(c, _, _)| *c == id).map(|(_, _, p)| p)
    }

    /// Number of palette slots the layout uses.
    pub fn channel_count(&self) -> usize {
        self.placements().filter_map(|(_, p)| p.channel).map(|c| c + 1).max().unwrap_or(0)
    }

    /// Distinct colors present, ascending by channel.
    pub fn palette(&self) -> Vec<f64> {
        let mut slots = vec![f64::NAN; self.channel_count()];
        for (_, p) in self.placements() {
            if let (Some(ch), Some(c)) = (p.channel, p.color_nm) {
                slots[ch] = c;
            }
        }
        slots
    }

    /// Output port owning `rail`, if any.
    pub fn output_of_rail(&self, rail: usize) -> Option<usize> {
        self.outputs.iter().position(|rails| rails.contains(&rail))
    }

    pub fn validate(&self) -> Result<(), FabricError> {
        let bad = |msg: String| Err(FabricError::InvalidLayout(msg));
        let mut controls = BTreeSet::new();
        for (c, col) in self.columns.iter().enumerate() {
            let mut used = vec![false; self.n_rails];
            for p in &col.placements {
                if p.span() < 2 || p.rail + p.span() > self.n_rails {
                    return bad(format!("column {c}: placement at rail {} leaves the {} rails", p.rail, self.n_rails));
                }
                for r in p.rails() {
                    if std::mem::replace(&mut used[r], true) {
                        return bad(format!("column {c}: rail {r} occupied twice"));
                    }
                }
                match (p.kind, &p.permutation) {
                    (PlacementKind::Shuffle, Some(perm)) => {
                        let mut seen = vec![false; perm.len()];
                        if perm.iter().any(|&k| k >= perm.len() || std::mem::replace(&mut seen[k], true)) {
                            return bad(format!("column {c}: shuffle is not a permutation"));
                        }
                    }
                    (PlacementKind::Shuffle, None) => return bad(format!("column {c}: shuffle without permutation")),
                    (_, Some(_)) => return bad(format!("column {c}: permutation on a 2x2 device")),
                    _ => {}
                }
                match (p.kind.is_active(), p.control) {
                    (true, Some(id)) => {
                        if !controls.insert(id) {
                            return bad(format!("control {id} used twice"));
                        }
                    }
                    (true, None) => return bad(format!("column {c}: active device at rail {} without control", p.rail)),
                    (false, Some(id)) => return bad(format!("control {id} on a passive device")),
                    (false, None) => {}
                }
                if p.kind == PlacementKind::Filter && p.color_nm.is_none() {
                    return bad(format!("column {c}: filter at rail {} has no color", p.rail));
                }
            }
        }
        for t in &self.terminators {
            if t.rail >= self.n_rails || t.column >= self.columns.len().max(1) {
                return bad(format!("terminator {t:?} out of range"));
            }
        }
        let in_range = |r: &usize| *r < self.n_rails;
        if !self.inputs.iter().all(in_range) || !self.outputs.iter().flatten().all(in_range) {
            return bad("port rail out of range".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FabricError> {
        let layout: Self = serde_json::from_str(text).map_err(|e| FabricError::InvalidLayout(e.to_string()))?;
        layout.validate()?;
        Ok(layout)
    }
}

pub fn count_components(layout: &CircuitLayout) -> ComponentCounts {
    let mut counts = ComponentCounts {
        terminators: layout.terminators.len(),
        rails: layout.n_rails,
        columns: layout.columns.len(),
        ..Default::default()
    };
    for (_, p) in layout.placements() {
        match p.kind {
            PlacementKind::Switch | PlacementKind::Mzi => counts.active += 1,
            PlacementKind::Crossover => counts.passive_crossovers += 1,
            PlacementKind::Filter => counts.passive_filters += 1,
            PlacementKind::Coupler => counts.couplers += 1,
            PlacementKind::Shuffle => counts.shuffle_blocks += 1,
        }
    }
    counts
}

/// `colors` resonances 2 nm apart, centered on 1550 nm.
pub fn default_palette(colors: usize) -> Vec<f64> {
    (0..colors).map(|k| 1550.0 + 2.0 * (k as f64 - (colors as f64 - 1.0) / 2.0)).collect()
}

/// Retag every wavelength-dedicated placement with `palette[channel]`.
pub fn assign_colors(layout: &CircuitLayout, palette: &[f64]) -> Result<CircuitLayout, FabricError> {
    let needed = layout.channel_count();
    let slots = &palette[..needed.min(palette.len())];
    let mut distinct: Vec<f64> = slots.iter().copied().filter(|c| c.is_finite()).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if palette.len() < needed || distinct.len() < needed {
        return Err(FabricError::PaletteTooSmall { needed, distinct: distinct.len() });
    }
    let mut out = layout.clone();
    for col in &mut out.columns {
        for p in &mut col.placements {
            if let Some(ch) = p.channel {
                p.color_nm = Some(palette[ch]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_layout_counts_zero() {
        let layout = CircuitLayout::empty(ArchitectureSpec::new(ArchitectureKind::Crosspoint), 0);
        let c = count_components(&layout);
        assert_eq!(c, ComponentCounts::default());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ArchitectureKind::ALL {
            assert_eq!(kind.name().parse::<ArchitectureKind>().unwrap(), kind);
            assert_eq!(serde_json::to_string(&kind).unwrap(), format!("\"{}\"", kind.name()));
        }
        assert!("benes".parse::<ArchitectureKind>().is_err());
    }

    #[test]
    fn default_palette_is_centered() {
        assert_eq!(default_palette(3), vec![1548.0, 1550.0, 1552.0]);
        assert_eq!(default_palette(4), vec![1547.0, 1549.0, 1551.0, 1553.0]);
    }

    #[test]
    fn validation_catches_overlap_and_duplicate_controls() {
        let mut layout = CircuitLayout::empty(ArchitectureSpec::new(ArchitectureKind::SpankeBenes), 3);
        let switch = |rail, id| Placement { control: Some(ControlId(id)), ..Placement::passive(rail, PlacementKind::Switch) };
        layout.columns.push(Column { placements: vec![switch(0, 0), switch(1, 1)] });
        assert!(layout.validate().is_err());
        layout.columns[0].placements.pop();
        layout.columns.push(Column { placements: vec![switch(1, 0)] });
        assert!(layout.validate().is_err());
        layout.columns[1].placements[0].control = Some(ControlId(1));
        layout.validate().unwrap();
        layout.columns[1].placements[0].rail = 2;
        assert!(layout.validate().is_err());
    }
}
