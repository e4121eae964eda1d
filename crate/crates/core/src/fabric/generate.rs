use super::{
    default_palette, ArchitectureKind, ArchitectureSpec, CircuitLayout, Column, ControlId, FabricError, Placement,
    PlacementKind, Terminator,
};

/// Build the layout for `spec`. Colored devices get the default palette.
pub fn generate(spec: &ArchitectureSpec) -> Result<CircuitLayout, FabricError> {
    let (n, colors) = spec.resolved()?;
    let spec = ArchitectureSpec { kind: spec.kind, n: Some(n), colors: Some(colors) };
    let layout = match spec.kind {
        ArchitectureKind::Crosspoint => crosspoint(spec, n),
        ArchitectureKind::SpankeBenes => spanke_benes(spec, n),
        ArchitectureKind::Piloss => piloss(spec, n),
        ArchitectureKind::ClosBenes16 => {
            let mut stages = vec![Stage::Switches, Stage::Permute(unshuffle(16))];
            stages.extend(parallel(&omega(8)));
            stages.extend([Stage::Permute(shuffle(16)), Stage::Switches]);
            staged(spec, 16, &stages, 1)
        }
        ArchitectureKind::Select8To1 => select_8to1(spec),
        ArchitectureKind::Select1To8 => select_1to8(spec),
        ArchitectureKind::Mux8 => mux8(spec),
        ArchitectureKind::Demux8 => demux8(spec),
        ArchitectureKind::Multicrossbar => {
            let mut b = Builder::new(spec, 2, colors);
            for c in 0..colors {
                b.switches(&[0], Some(c));
            }
            b.finish()
        }
        ArchitectureKind::Wss6x6x4 => wss_6x6x4(spec),
        ArchitectureKind::Wss8x8x3 => staged(spec, 8, &benes(8), colors),
        ArchitectureKind::Wcc4x4x4 => wcc_4x4x4(spec),
    };
    debug_assert!(layout.validate().is_ok(), "{:?}", layout.validate());
    Ok(layout)
}

struct Builder {
    layout: CircuitLayout,
    palette: Vec<f64>,
    next_control: u32,
}

impl Builder {
    fn new(arch: ArchitectureSpec, n_rails: usize, colors: usize) -> Self {
        Self { layout: CircuitLayout::empty(arch, n_rails), palette: default_palette(colors), next_control: 0 }
    }

    fn push(&mut self, placements: Vec<Placement>) -> usize {
        if !placements.is_empty() {
            self.layout.columns.push(Column { placements });
        }
        self.layout.columns.len().saturating_sub(1)
    }

    fn device(&mut self, rail: usize, kind: PlacementKind, channel: Option<usize>) -> Placement {
        let control = kind.is_active().then(|| {
            self.next_control += 1;
            ControlId(self.next_control - 1)
        });
        Placement { control, channel, color_nm: channel.map(|c| self.palette[c]), ..Placement::passive(rail, kind) }
    }

    fn column_of(&mut self, tops: &[usize], kind: PlacementKind, channel: Option<usize>) -> usize {
        let placements = tops.iter().map(|&r| self.device(r, kind, channel)).collect();
        self.push(placements)
    }

    fn switches(&mut self, tops: &[usize], channel: Option<usize>) -> usize {
        self.column_of(tops, PlacementKind::Switch, channel)
    }

    fn crossovers(&mut self, tops: &[usize]) -> usize {
        self.column_of(tops, PlacementKind::Crossover, None)
    }

    /// Crossover columns moving the light on rail `r` to rail `perm[r]`.
    ///
    /// Odd-even transposition on the destination tags, so the number of
    /// crossovers equals the number of inversions of `perm`.
    fn permute(&mut self, perm: &[usize]) {
        let mut tags = perm.to_vec();
        let mut parity = 0;
        let mut idle = 0;
        while idle < 2 {
            let tops: Vec<usize> = (parity..tags.len().saturating_sub(1)).step_by(2).filter(|&r| tags[r] > tags[r + 1]).collect();
            for &r in &tops {
                tags.swap(r, r + 1);
            }
            idle = if tops.is_empty() { idle + 1 } else { 0 };
            self.crossovers(&tops);
            parity ^= 1;
        }
        debug_assert!(tags.windows(2).all(|w| w[0] < w[1]));
    }

    fn terminate(&mut self, rail: usize, column: usize) {
        self.layout.terminators.push(Terminator { rail, column });
    }

    fn finish(self) -> CircuitLayout {
        self.layout
    }
}

/// One step of a multistage network over all rails.
#[derive(Debug, Clone, PartialEq)]
enum Stage {
    /// A 2x2 switch on every pair `(2i, 2i + 1)`.
    Switches,
    Permute(Vec<usize>),
}

/// Perfect unshuffle: even rails to the top half, odd rails to the bottom half.
pub(crate) fn unshuffle(n: usize) -> Vec<usize> {
    (0..n).map(|r| if r % 2 == 0 { r / 2 } else { n / 2 + r / 2 }).collect()
}

pub(crate) fn shuffle(n: usize) -> Vec<usize> {
    let mut inv = vec![0; n];
    for (r, d) in unshuffle(n).into_iter().enumerate() {
        inv[d] = r;
    }
    inv
}

/// The same stage list on two stacked copies of the rails.
fn parallel(stages: &[Stage]) -> Vec<Stage> {
    stages
        .iter()
        .map(|s| match s {
            Stage::Switches => Stage::Switches,
            Stage::Permute(p) => Stage::Permute(p.iter().copied().chain(p.iter().map(|d| d + p.len())).collect()),
        })
        .collect()
}

fn benes(n: usize) -> Vec<Stage> {
    if n == 2 {
        return vec![Stage::Switches];
    }
    let mut stages = vec![Stage::Switches, Stage::Permute(unshuffle(n))];
    stages.extend(parallel(&benes(n / 2)));
    stages.extend([Stage::Permute(shuffle(n)), Stage::Switches]);
    stages
}

/// Perfect shuffle ahead of every switch stage.
fn omega(n: usize) -> Vec<Stage> {
    (0..n.trailing_zeros()).flat_map(|_| [Stage::Permute(shuffle(n)), Stage::Switches]).collect()
}

/// Compose runs of consecutive permutations so each run is one crossover array.
fn merge_permutes(stages: &[Stage]) -> Vec<Stage> {
    let mut out: Vec<Stage> = Vec::new();
    for stage in stages {
        match (out.last_mut(), stage) {
            (Some(Stage::Permute(first)), Stage::Permute(then)) => {
                for d in first.iter_mut() {
                    *d = then[*d];
                }
            }
            _ => out.push(stage.clone()),
        }
    }
    out
}

/// Multistage network with each switch stage repeated once per color.
fn staged(spec: ArchitectureSpec, n: usize, stages: &[Stage], colors: usize) -> CircuitLayout {
    let mut b = Builder::new(spec, n, colors);
    let pairs: Vec<usize> = (0..n).step_by(2).collect();
    for stage in &merge_permutes(stages) {
        match stage {
            Stage::Switches if colors > 1 => {
                for c in 0..colors {
                    b.switches(&pairs, Some(c));
                }
            }
            Stage::Switches => {
                b.switches(&pairs, None);
            }
            Stage::Permute(p) => b.permute(p),
        }
    }
    b.finish()
}

/// Rows on rails `0..n` transposed against columns on `n..2n` by a diamond
/// of switches. Unheated, row `i` ends on rail `n + i` and column `j` on rail `j`.
fn crosspoint(spec: ArchitectureSpec, n: usize) -> CircuitLayout {
    let mut b = Builder::new(spec, 2 * n, 1);
    let mut is_row: Vec<bool> = (0..2 * n).map(|r| r < n).collect();
    loop {
        let mut tops = Vec::new();
        let mut r = 0;
        while r + 1 < 2 * n {
            if is_row[r] && !is_row[r + 1] {
                tops.push(r);
                r += 2;
            } else {
                r += 1;
            }
        }
        if tops.is_empty() {
            break;
        }
        for &r in &tops {
            is_row.swap(r, r + 1);
        }
        b.switches(&tops, None);
    }
    let mut layout = b.finish();
    layout.inputs = (0..n).collect();
    layout.outputs = (0..n).map(|j| vec![j]).collect();
    layout
}

fn spanke_benes(spec: ArchitectureSpec, n: usize) -> CircuitLayout {
    let mut b = Builder::new(spec, n, 1);
    for c in 0..n {
        let tops: Vec<usize> = (c % 2..n - 1).step_by(2).collect();
        b.switches(&tops, None);
    }
    b.finish()
}

/// `n` switch layers on `(2i, 2i + 1)` alternating with crossover layers on
/// `(2i + 1, 2i + 2)`. Inputs enter the upper port of each first-layer switch
/// and leave from the lower port of each last-layer switch.
fn piloss(spec: ArchitectureSpec, n: usize) -> CircuitLayout {
    let mut b = Builder::new(spec, 2 * n, 1);
    let switches: Vec<usize> = (0..n).map(|i| 2 * i).collect();
    let crossovers: Vec<usize> = (0..n - 1).map(|i| 2 * i + 1).collect();
    for k in 0..n {
        b.switches(&switches, None);
        if k + 1 < n {
            b.crossovers(&crossovers);
        }
    }
    let mut layout = b.finish();
    layout.inputs = (0..n).map(|i| 2 * i).collect();
    layout.outputs = (0..n).map(|j| vec![2 * j + 1]).collect();
    layout
}

/// Staircase from input 7 up to input 0; the bus starts on the idle rail 8
/// and leaves on rail 0. Every device dumps its unselected input into an
/// absorber on its lower rail.
fn select_8to1(spec: ArchitectureSpec) -> CircuitLayout {
    let mut b = Builder::new(spec, 9, 1);
    for k in (0..8).rev() {
        let col = b.switches(&[k], None);
        b.terminate(k + 1, col);
    }
    let mut layout = b.finish();
    layout.inputs = (0..8).collect();
    layout.outputs = vec![vec![0]];
    layout
}

fn select_1to8(spec: ArchitectureSpec) -> CircuitLayout {
    let mut b = Builder::new(spec, 9, 1);
    let mut last = 0;
    for k in 0..8 {
        last = b.switches(&[k], None);
    }
    b.terminate(8, last);
    let mut layout = b.finish();
    layout.inputs = vec![0];
    layout.outputs = (0..8).map(|k| vec![k]).collect();
    layout
}

/// Colored add-drops from input 7 up to input 0, each followed by a crossover
/// lifting the bus one rail. The combined output leaves on rail 1.
fn mux8_columns(spec: ArchitectureSpec) -> CircuitLayout {
    let mut b = Builder::new(spec, 9, 8);
    for k in (0..8).rev() {
        let filter = b.device(k, PlacementKind::Filter, Some(k));
        b.push(vec![filter]);
        if k > 0 {
            b.crossovers(&[k]);
        }
    }
    b.finish()
}

fn mux8(spec: ArchitectureSpec) -> CircuitLayout {
    let mut layout = mux8_columns(spec);
    layout.inputs = (0..8).collect();
    layout.outputs = vec![vec![1]];
    layout
}

/// The multiplexer run backwards.
fn demux8(spec: ArchitectureSpec) -> CircuitLayout {
    let mut layout = mux8_columns(spec);
    layout.columns.reverse();
    layout.inputs = vec![1];
    layout.outputs = (0..8).map(|k| vec![k]).collect();
    layout
}

/// Per color: `S0 S4 | S0 S2 | X | S1 S3 | X | S1 S3 | X | S1 S3 | S0 S4`
/// where `X` is a shared crossover column on `(0,1) (2,3) (4,5)`.
fn wss_6x6x4(spec: ArchitectureSpec) -> CircuitLayout {
    const CROSS: &[usize] = &[0, 2, 4];
    let pattern: [Option<&[usize]>; 9] = [
        Some(&[0, 4]),
        Some(&[0, 2]),
        None,
        Some(&[1, 3]),
        None,
        Some(&[1, 3]),
        None,
        Some(&[1, 3]),
        Some(&[0, 4]),
    ];
    let mut b = Builder::new(spec, 6, 4);
    for step in pattern {
        match step {
            Some(tops) => {
                for c in 0..4 {
                    b.switches(tops, Some(c));
                }
            }
            None => {
                b.crossovers(CROSS);
            }
        }
    }
    b.finish()
}

/// Passive demultiplexer per input, one abstract shuffle regrouping the lanes
/// by color, then a four-rail brick of colored switches per color.
///
/// Input `i` enters on rail `4i + 1`; its color `c` lands on rail `4i + c`,
/// the shuffle moves it to rail `4c + i`, and output `b` collects color `c`
/// on rail `4c + b`.
fn wcc_4x4x4(spec: ArchitectureSpec) -> CircuitLayout {
    let mut b = Builder::new(spec, 16, 4);
    for (offset, channel) in [(0, 0), (1, 2), (1, 3), (2, 3)] {
        let filters = (0..4).map(|i| b.device(4 * i + offset, PlacementKind::Filter, Some(channel))).collect();
        b.push(filters);
    }
    let perm = (0..16).map(|r| 4 * (r % 4) + r / 4).collect();
    b.push(vec![Placement { permutation: Some(perm), ..Placement::passive(0, PlacementKind::Shuffle) }]);
    for step in 0..8 {
        let offsets: &[usize] = if step % 2 == 0 { &[0, 2] } else { &[1] };
        let placements = (0..4)
            .flat_map(|c| offsets.iter().map(move |o| (c, 4 * c + o)))
            .map(|(c, r)| b.device(r, PlacementKind::Switch, Some(c)))
            .collect();
        b.push(placements);
    }
    let mut layout = b.finish();
    layout.inputs = (0..4).map(|i| 4 * i + 1).collect();
    layout.outputs = (0..4).map(|o| (0..4).map(|c| 4 * c + o).collect()).collect();
    layout
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fabric::count_components;

    fn counts(kind: ArchitectureKind) -> crate::fabric::ComponentCounts {
        count_components(&generate(&ArchitectureSpec::new(kind)).unwrap())
    }

    #[test]
    fn permute_uses_one_crossover_per_inversion() {
        let mut b = Builder::new(ArchitectureSpec::new(ArchitectureKind::ClosBenes16), 16, 1);
        b.permute(&unshuffle(16));
        assert_eq!(count_components(&b.finish()).passive_crossovers, 28);
    }

    #[test]
    fn shuffle_inverts_unshuffle() {
        let u = unshuffle(8);
        let s = shuffle(8);
        assert_eq!(u, vec![0, 4, 1, 5, 2, 6, 3, 7]);
        for r in 0..8 {
            assert_eq!(s[u[r]], r);
        }
    }

    #[test]
    fn fixed_kind_counts() {
        let c = counts(ArchitectureKind::ClosBenes16);
        assert_eq!((c.active, c.passive_crossovers), (40, 92));
        let c = counts(ArchitectureKind::Select8To1);
        assert_eq!((c.active, c.passive_crossovers, c.terminators, c.rails), (8, 0, 8, 9));
        let c = counts(ArchitectureKind::Select1To8);
        assert_eq!((c.active, c.terminators), (8, 1));
        let c = counts(ArchitectureKind::Mux8);
        assert_eq!((c.passive_filters, c.passive_crossovers, c.rails), (8, 7, 9));
        let c = counts(ArchitectureKind::Multicrossbar);
        assert_eq!((c.active, c.columns), (3, 3));
        let c = counts(ArchitectureKind::Wss6x6x4);
        assert_eq!((c.active, c.passive_crossovers), (48, 9));
        let c = counts(ArchitectureKind::Wss8x8x3);
        assert_eq!((c.active, c.passive_crossovers), (60, 16));
        let c = counts(ArchitectureKind::Wcc4x4x4);
        assert_eq!((c.active, c.passive(), c.shuffle_blocks, c.passive_crossovers), (48, 16, 1, 0));
    }

    #[test]
    fn fixed_kinds_reject_other_sizes() {
        assert!(generate(&ArchitectureSpec::with_n(ArchitectureKind::ClosBenes16, 8)).is_err());
        assert!(generate(&ArchitectureSpec::with_n(ArchitectureKind::Crosspoint, 17)).is_err());
        assert!(generate(&ArchitectureSpec::with_n(ArchitectureKind::Piloss, 1)).is_err());
        assert!(generate(&ArchitectureSpec::with_colors(ArchitectureKind::Multicrossbar, 0)).is_err());
        assert!(generate(&ArchitectureSpec::with_colors(ArchitectureKind::Wss8x8x3, 4)).is_err());
    }
}
