use std::collections::{BTreeMap, HashSet};

use super::{within_linewidth, Permutation, RouteRequest, RoutingError, SwitchState, WavelengthRequest};
use crate::fabric::{Actuation, ArchitectureKind, CircuitLayout, ControlId, PlacementKind};

/// Largest number of controls per color searched exhaustively.
const EXHAUSTIVE_CONTROLS: usize = 16;

/// A switch state realizing `request` on `layout`.
pub fn solve_state(layout: &CircuitLayout, request: &RouteRequest) -> Result<SwitchState, RoutingError> {
    let kind = layout.arch.kind;
    let unsupported = || RoutingError::Unsupported { kind, request: request.label() };
    match request {
        RouteRequest::Permutation(p) => {
            if p.len() != layout.inputs.len() {
                return Err(RoutingError::InvalidRequest(format!(
                    "{} entries for {} inputs",
                    p.len(),
                    layout.inputs.len()
                )));
            }
            match kind {
                ArchitectureKind::Crosspoint => Ok(crosspoint(layout, p)),
                ArchitectureKind::SpankeBenes => Ok(spanke_benes(layout, p)),
                ArchitectureKind::Piloss => piloss(layout, p),
                ArchitectureKind::ClosBenes16 => clos(layout, p),
                _ => Err(unsupported()),
            }
        }
        RouteRequest::Wavelength(req) => solve_wavelength_routing(layout, req),
        RouteRequest::Connection { input, output } => match kind {
            ArchitectureKind::Select8To1 | ArchitectureKind::Select1To8 => connection(layout, *input, *output),
            _ => Err(unsupported()),
        },
    }
}

/// Per-color switch settings realizing every `(input, color, output)` route.
pub fn solve_wavelength_routing(layout: &CircuitLayout, req: &WavelengthRequest) -> Result<SwitchState, RoutingError> {
    let palette = layout.palette();
    if palette.is_empty() {
        return Err(RoutingError::Unsupported { kind: layout.arch.kind, request: "wavelength" });
    }
    let mut by_channel: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for route in &req.routes {
        if route.input >= layout.inputs.len() || route.output >= layout.outputs.len() {
            return Err(RoutingError::InvalidRequest(format!("port out of range in {route:?}")));
        }
        let channel = palette
            .iter()
            .position(|&c| within_linewidth(route.color_nm, c))
            .ok_or_else(|| RoutingError::InvalidRequest(format!("no device is tuned to {} nm", route.color_nm)))?;
        let pairs = by_channel.entry(channel).or_default();
        if pairs.iter().any(|&(i, o)| i == route.input || o == route.output) {
            return Err(RoutingError::Unroutable(format!("two routes share a port at {} nm", route.color_nm)));
        }
        pairs.push((route.input, route.output));
    }
    let mut state = SwitchState::ambient(layout);
    for (channel, pairs) in by_channel {
        if layout.arch.kind == ArchitectureKind::Wss8x8x3 {
            let perm = complete(&pairs, layout.inputs.len());
            let plan: Vec<_> = layout.inputs.iter().copied().zip(benes_ports(&perm)).collect();
            drive(layout, Some(channel), &plan, &mut state)?;
        } else {
            let lanes = Lanes::new(layout, Some(channel), palette[channel]);
            if lanes.controls.len() > EXHAUSTIVE_CONTROLS {
                return Err(RoutingError::Unsupported { kind: layout.arch.kind, request: "wavelength" });
            }
            let targets: Vec<(usize, Vec<usize>)> =
                pairs.iter().map(|&(i, o)| (layout.inputs[i], layout.outputs[o].clone())).collect();
            let mask = lanes
                .search(|end| targets.iter().all(|(start, rails)| end[*start].is_some_and(|r| rails.contains(&r))))
                .ok_or_else(|| RoutingError::Unroutable(format!("no setting of color {channel} realizes {pairs:?}")))?;
            lanes.apply(mask, &mut state);
        }
    }
    Ok(state)
}

/// Fill the unrequested inputs of a partial map with the unused outputs in order.
fn complete(pairs: &[(usize, usize)], n: usize) -> Vec<usize> {
    let mut sigma = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for &(i, o) in pairs {
        sigma[i] = o;
        used[o] = true;
    }
    let mut free = (0..n).filter(|&o| !used[o]);
    for s in sigma.iter_mut().filter(|s| **s == usize::MAX) {
        *s = free.next().expect("as many free outputs as free inputs");
    }
    sigma
}

/// Bar exactly at the switch where row `i` meets column `sigma(i)`.
fn crosspoint(layout: &CircuitLayout, p: &Permutation) -> SwitchState {
    let n = p.len();
    let mut line: Vec<usize> = (0..layout.n_rails).collect();
    let mut state = SwitchState::default();
    for (_, pl) in layout.placements() {
        let (upper, lower) = (line[pl.rail], line[pl.rail + 1]);
        let meet = upper < n && lower == n + p.apply(upper);
        if let Some(id) = pl.control {
            state.set(id, if meet { Actuation::Bar } else { Actuation::Cross });
        }
        line.swap(pl.rail, pl.rail + 1);
    }
    state
}

/// Odd-even transposition sort on the destination tags.
fn spanke_benes(layout: &CircuitLayout, p: &Permutation) -> SwitchState {
    let mut tag = vec![usize::MAX; layout.n_rails];
    for (i, &r) in layout.inputs.iter().enumerate() {
        tag[r] = p.apply(i);
    }
    let mut state = SwitchState::default();
    for (_, pl) in layout.placements() {
        let cross = tag[pl.rail] > tag[pl.rail + 1];
        if cross {
            tag.swap(pl.rail, pl.rail + 1);
        }
        if let Some(id) = pl.control {
            state.set(id, if cross { Actuation::Cross } else { Actuation::Bar });
        }
    }
    state
}

fn piloss(layout: &CircuitLayout, p: &Permutation) -> Result<SwitchState, RoutingError> {
    let exits = piloss_walk(p.as_slice()).ok_or_else(|| RoutingError::Unroutable(format!("{:?}", p.as_slice())))?;
    let plan: Vec<_> = layout.inputs.iter().copied().zip(exits).collect();
    let mut state = SwitchState::ambient(layout);
    drive(layout, None, &plan, &mut state)?;
    Ok(state)
}

/// Exit ports for each input of the switch-and-crossover lattice.
///
/// Signal `i` occupies one switch slot per layer. Leaving by the upper port
/// moves it one slot up, by the lower port one slot down; at the lattice
/// edges it stays put. Within a layer no two signals may leave a slot by the
/// same port, and every signal leaves its destination slot by the lower port.
pub(crate) fn piloss_walk(target: &[usize]) -> Option<Vec<Vec<bool>>> {
    let n = target.len();
    let mut walk = Walk { n, target, exits: vec![vec![true; n]; n], dead: HashSet::new() };
    let start: Vec<usize> = (0..n).collect();
    walk.layer(0, &start).then_some(walk.exits)
}

struct Walk<'a> {
    n: usize,
    target: &'a [usize],
    exits: Vec<Vec<bool>>,
    dead: HashSet<(usize, Vec<usize>)>,
}

impl Walk<'_> {
    fn step(&self, x: usize, down: bool) -> usize {
        if down {
            (x + 1).min(self.n - 1)
        } else {
            x.saturating_sub(1)
        }
    }

    /// Whether slot `y` is reachable from `x` in exactly `t` moves.
    fn reach(&self, x: usize, y: usize, t: usize) -> bool {
        let d = x.abs_diff(y);
        d <= t && ((t - d).is_multiple_of(2) || x + y < t || 2 * self.n - 1 - x - y <= t)
    }

    fn layer(&mut self, k: usize, pos: &[usize]) -> bool {
        if k + 1 == self.n {
            return pos == self.target;
        }
        if self.dead.contains(&(k, pos.to_vec())) {
            return false;
        }
        let mut next = vec![0; self.n];
        let mut used = vec![[false; 2]; self.n];
        if self.assign(k, pos, 0, &mut next, &mut used) {
            return true;
        }
        self.dead.insert((k, pos.to_vec()));
        false
    }

    fn assign(&mut self, k: usize, pos: &[usize], i: usize, next: &mut [usize], used: &mut [[bool; 2]]) -> bool {
        if i == self.n {
            let next = next.to_vec();
            return self.layer(k + 1, &next);
        }
        let x = pos[i];
        let remaining = self.n - 2 - k;
        let prefer_down = self.target[i] > x;
        for down in [prefer_down, !prefer_down] {
            let y = self.step(x, down);
            if used[x][down as usize] || !self.reach(y, self.target[i], remaining) {
                continue;
            }
            used[x][down as usize] = true;
            next[i] = y;
            self.exits[i][k] = down;
            if self.assign(k, pos, i + 1, next, used) {
                return true;
            }
            used[x][down as usize] = false;
        }
        false
    }
}

/// Benes network of 2x2 switches: cycles of the looping algorithm, each
/// listing inputs with the half they take when the cycle starts in the upper one.
fn cycles(perm: &[usize]) -> Vec<Vec<(usize, bool)>> {
    let mut inv = vec![0; perm.len()];
    for (a, &b) in perm.iter().enumerate() {
        inv[b] = a;
    }
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut a = start;
        loop {
            seen[a] = true;
            cycle.push((a, false));
            let partner = inv[perm[a] ^ 1];
            seen[partner] = true;
            cycle.push((partner, true));
            a = partner ^ 1;
            if seen[a] {
                break;
            }
        }
        out.push(cycle);
    }
    out
}

fn halves(cycles: &[Vec<(usize, bool)>], flips: u64, n: usize) -> Vec<bool> {
    let mut lower = vec![false; n];
    for (c, cycle) in cycles.iter().enumerate() {
        let flip = flips >> c & 1 == 1;
        for &(a, side) in cycle {
            lower[a] = side ^ flip;
        }
    }
    lower
}

/// Split `perm` into the two middle subnetworks given each input's half.
fn split(perm: &[usize], lower: &[bool]) -> [Vec<usize>; 2] {
    let half = perm.len() / 2;
    let mut sub = [vec![0; half], vec![0; half]];
    for (a, &b) in perm.iter().enumerate() {
        sub[lower[a] as usize][a / 2] = b / 2;
    }
    sub
}

fn assemble(perm: &[usize], lower: &[bool], sub: &[Vec<Vec<bool>>; 2], last: bool) -> Vec<Vec<bool>> {
    perm.iter()
        .enumerate()
        .map(|(a, &b)| {
            let mut ports = vec![lower[a]];
            ports.extend_from_slice(&sub[lower[a] as usize][a / 2]);
            if last {
                ports.push(b % 2 == 1);
            }
            ports
        })
        .collect()
}

/// Exit ports for each input of a recursive Benes network.
pub(crate) fn benes_ports(perm: &[usize]) -> Vec<Vec<bool>> {
    if perm.len() == 2 {
        return perm.iter().map(|&b| vec![b == 1]).collect();
    }
    let lower = halves(&cycles(perm), 0, perm.len());
    let [up, down] = split(perm, &lower);
    assemble(perm, &lower, &[benes_ports(&up), benes_ports(&down)], true)
}

/// Exit ports through an omega network by destination tags, most
/// significant bit first. `None` when two signals want the same port.
fn omega_ports(perm: &[usize]) -> Option<Vec<Vec<bool>>> {
    let n = perm.len();
    let stages = n.trailing_zeros();
    let mut pos: Vec<usize> = (0..n).collect();
    let mut ports = vec![Vec::new(); n];
    for k in (0..stages).rev() {
        let mut taken = vec![false; n];
        for (a, &b) in perm.iter().enumerate() {
            let shuffled = (pos[a] << 1 | pos[a] >> (stages - 1)) & (n - 1);
            let next = (shuffled & !1) | (b >> k & 1);
            if std::mem::replace(&mut taken[next], true) {
                return None;
            }
            pos[a] = next;
            ports[a].push(next & 1 == 1);
        }
    }
    Some(ports)
}

/// Outer Benes stages around two omega middles. Tries every orientation
/// of the looping cycles, lowest-input cycle first.
fn clos(layout: &CircuitLayout, p: &Permutation) -> Result<SwitchState, RoutingError> {
    let perm = p.as_slice();
    let cycles = cycles(perm);
    let ports = (0..1u64 << cycles.len())
        .find_map(|flips| {
            let lower = halves(&cycles, flips, perm.len());
            let [up, down] = split(perm, &lower);
            let sub = [omega_ports(&up)?, omega_ports(&down)?];
            Some(assemble(perm, &lower, &sub, true))
        })
        .ok_or_else(|| RoutingError::Unroutable(format!("{perm:?} blocks in every middle orientation")))?;
    let plan: Vec<_> = layout.inputs.iter().copied().zip(ports).collect();
    let mut state = SwitchState::ambient(layout);
    drive(layout, None, &plan, &mut state)?;
    Ok(state)
}

fn connection(layout: &CircuitLayout, input: usize, output: usize) -> Result<SwitchState, RoutingError> {
    if input >= layout.inputs.len() || output >= layout.outputs.len() {
        return Err(RoutingError::InvalidRequest(format!("no path {input} -> {output}")));
    }
    let lanes = Lanes::new(layout, None, f64::NAN);
    let start = layout.inputs[input];
    let mask = lanes
        .search(|end| {
            layout.inputs.iter().all(|&r| {
                let out = end[r].and_then(|e| layout.output_of_rail(e));
                if r == start {
                    out == Some(output)
                } else {
                    out.is_none()
                }
            })
        })
        .ok_or_else(|| RoutingError::Unroutable(format!("no setting isolates {input} -> {output}")))?;
    let mut state = SwitchState::ambient(layout);
    lanes.apply(mask, &mut state);
    Ok(state)
}

/// Set every device met by a planned signal so that it leaves by the wanted
/// port. `plan` holds each signal's entry rail and its exits in order
/// (`false` upper, `true` lower). With `channel` set, only devices of that
/// color act; the others stay as they are.
fn drive(
    layout: &CircuitLayout,
    channel: Option<usize>,
    plan: &[(usize, Vec<bool>)],
    state: &mut SwitchState,
) -> Result<(), RoutingError> {
    let mut at: Vec<Option<usize>> = vec![None; layout.n_rails];
    for (s, (r, _)) in plan.iter().enumerate() {
        at[*r] = Some(s);
    }
    let mut next = vec![0; plan.len()];
    for (c, column) in layout.columns.iter().enumerate() {
        for p in &column.placements {
            if let Some(perm) = &p.permutation {
                let old: Vec<_> = p.rails().map(|r| at[r]).collect();
                for (k, sig) in old.into_iter().enumerate() {
                    at[p.rail + perm[k]] = sig;
                }
                continue;
            }
            match p.kind {
                PlacementKind::Crossover => at.swap(p.rail, p.rail + 1),
                PlacementKind::Filter if channel.is_some() && p.channel == channel => at.swap(p.rail, p.rail + 1),
                PlacementKind::Filter => {}
                PlacementKind::Coupler => return Err(RoutingError::NotTraceable { column: c, rail: p.rail }),
                PlacementKind::Switch | PlacementKind::Mzi if p.channel.is_none() || p.channel == channel => {
                    let mut cross = None;
                    for (k, r) in [p.rail, p.rail + 1].into_iter().enumerate() {
                        let Some(s) = at[r] else { continue };
                        let exit = *plan[s].1.get(next[s]).ok_or_else(|| {
                            RoutingError::Unroutable(format!("signal {s} has no exit planned at column {c}"))
                        })?;
                        next[s] += 1;
                        let wants = exit != (k == 1);
                        if cross.is_some_and(|w| w != wants) {
                            return Err(RoutingError::Unroutable(format!("conflicting exits at column {c}, rail {}", p.rail)));
                        }
                        cross = Some(wants);
                    }
                    if let Some(cross) = cross {
                        let id = p.control.expect("active placement has a control");
                        state.set(id, if cross { Actuation::Cross } else { Actuation::Bar });
                        if cross {
                            at.swap(p.rail, p.rail + 1);
                        }
                    }
                }
                PlacementKind::Switch | PlacementKind::Mzi => {}
                PlacementKind::Shuffle => unreachable!("shuffles carry a permutation"),
            }
        }
        for t in layout.terminators.iter().filter(|t| t.column == c) {
            at[t.rail] = None;
        }
    }
    match next.iter().zip(plan).position(|(&used, (_, exits))| used != exits.len()) {
        Some(s) => Err(RoutingError::Unroutable(format!("signal {s} met {} of {} planned devices", next[s], plan[s].1.len()))),
        None => Ok(()),
    }
}

enum Op {
    Swap(usize),
    /// Controlled device on `rail`, crossing when its bit differs from `ambient_bar`.
    Control { rail: usize, bit: usize, ambient_bar: bool },
    Permute(usize, Vec<usize>),
    Absorb(usize),
}

/// The layout as seen by one color, with that color's controls as bits.
/// A set bit drives the device away from its ambient state.
struct Lanes {
    n_rails: usize,
    ops: Vec<Op>,
    controls: Vec<(ControlId, Actuation)>,
}

impl Lanes {
    fn new(layout: &CircuitLayout, channel: Option<usize>, color_nm: f64) -> Self {
        let mut ops = Vec::new();
        let mut controls = Vec::new();
        for (c, column) in layout.columns.iter().enumerate() {
            for p in &column.placements {
                match (p.kind, p.control) {
                    (PlacementKind::Shuffle, _) => {
                        ops.push(Op::Permute(p.rail, p.permutation.clone().unwrap_or_default()));
                    }
                    (PlacementKind::Crossover, _) => ops.push(Op::Swap(p.rail)),
                    (PlacementKind::Filter, _) => {
                        if p.color_nm.is_some_and(|d| within_linewidth(color_nm, d)) {
                            ops.push(Op::Swap(p.rail));
                        }
                    }
                    (_, Some(id)) if p.channel == channel => {
                        let ambient = p.ambient().expect("controlled devices are active");
                        ops.push(Op::Control { rail: p.rail, bit: controls.len(), ambient_bar: ambient == Actuation::Bar });
                        controls.push((id, ambient));
                    }
                    _ => {}
                }
            }
            ops.extend(layout.terminators.iter().filter(|t| t.column == c).map(|t| Op::Absorb(t.rail)));
        }
        Self { n_rails: layout.n_rails, ops, controls }
    }

    /// Final rail of the light entering on each rail, `None` when absorbed.
    fn run(&self, mask: u64) -> Vec<Option<usize>> {
        let mut at: Vec<Option<usize>> = (0..self.n_rails).map(Some).collect();
        for op in &self.ops {
            match op {
                Op::Swap(r) => at.swap(*r, r + 1),
                Op::Control { rail, bit, ambient_bar } => {
                    if (mask >> bit & 1 == 1) == *ambient_bar {
                        at.swap(*rail, rail + 1);
                    }
                }
                Op::Permute(r, perm) => {
                    let old = at[*r..r + perm.len()].to_vec();
                    for (k, sig) in old.into_iter().enumerate() {
                        at[r + perm[k]] = sig;
                    }
                }
                Op::Absorb(r) => at[*r] = None,
            }
        }
        let mut end = vec![None; self.n_rails];
        for (r, sig) in at.into_iter().enumerate() {
            if let Some(s) = sig {
                end[s] = Some(r);
            }
        }
        end
    }

    /// First mask, fewest driven devices first, whose lanes satisfy `accept`.
    fn search(&self, accept: impl Fn(&[Option<usize>]) -> bool) -> Option<u64> {
        let mut masks: Vec<u64> = (0..1u64 << self.controls.len()).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        masks.into_iter().find(|&m| accept(&self.run(m)))
    }

    fn apply(&self, mask: u64, state: &mut SwitchState) {
        for (bit, &(id, ambient)) in self.controls.iter().enumerate() {
            state.set(id, if mask >> bit & 1 == 1 { ambient.flip() } else { ambient });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fabric::{generate, ArchitectureSpec};
    use crate::routing::{verify, WavelengthRoute};
    use rand::SeedableRng;

    fn layout(kind: ArchitectureKind) -> CircuitLayout {
        generate(&ArchitectureSpec::new(kind)).unwrap()
    }

    fn routes(kind: ArchitectureKind, perm: &Permutation) -> bool {
        let l = layout(kind);
        let request = RouteRequest::Permutation(perm.clone());
        solve_state(&l, &request).is_ok_and(|s| verify(&l, &s, &request).unwrap())
    }

    #[test]
    fn benes_ports_have_log_depth() {
        let ports = benes_ports(&[3, 7, 0, 1, 6, 2, 5, 4]);
        assert!(ports.iter().all(|p| p.len() == 5));
    }

    #[test]
    fn omega_passes_identity_and_rejects_port_clash() {
        assert_eq!(omega_ports(&[0, 1, 2, 3]).unwrap(), vec![vec![false, false], vec![false, true], vec![true, false], vec![true, true]]);
        // 0 and 2 share the first switch after the shuffle and both want the upper port.
        assert!(omega_ports(&[0, 2, 1, 3]).is_none());
    }

    #[test]
    fn walk_counts_one_switch_per_layer() {
        let exits = piloss_walk(&[7, 6, 5, 4, 3, 2, 1, 0]).unwrap();
        assert!(exits.iter().all(|e| e.len() == 8 && e[7]));
    }

    #[test]
    fn small_networks_route_every_permutation() {
        for kind in [ArchitectureKind::Crosspoint, ArchitectureKind::SpankeBenes, ArchitectureKind::Piloss] {
            for n in [2, 3, 4, 5] {
                let l = generate(&ArchitectureSpec::with_n(kind, n)).unwrap();
                for p in Permutation::all(n) {
                    let request = RouteRequest::Permutation(p.clone());
                    let state = solve_state(&l, &request).unwrap();
                    assert!(verify(&l, &state, &request).unwrap(), "{kind} {p:?}");
                }
            }
        }
    }

    #[test]
    fn clos_routes_identity_and_reversal() {
        assert!(routes(ArchitectureKind::ClosBenes16, &Permutation::identity(16)));
        assert!(routes(ArchitectureKind::ClosBenes16, &Permutation::reversal(16)));
    }

    #[test]
    fn clos_solutions_always_verify() {
        let l = layout(ArchitectureKind::ClosBenes16);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let request = RouteRequest::Permutation(Permutation::random(16, &mut rng));
            match solve_state(&l, &request) {
                Ok(state) => assert!(verify(&l, &state, &request).unwrap()),
                Err(e) => assert!(matches!(e, RoutingError::Unroutable(_)), "{e}"),
            }
        }
    }

    #[test]
    fn selectors_isolate_one_path() {
        let l = layout(ArchitectureKind::Select8To1);
        for input in 0..8 {
            let request = RouteRequest::Connection { input, output: 0 };
            let state = solve_state(&l, &request).unwrap();
            assert!(verify(&l, &state, &request).unwrap());
            assert_eq!(state.non_ambient(&l), 1, "input {input}");
        }
        let l = layout(ArchitectureKind::Select1To8);
        for output in 0..8 {
            let request = RouteRequest::Connection { input: 0, output };
            let state = solve_state(&l, &request).unwrap();
            assert!(verify(&l, &state, &request).unwrap());
        }
        assert!(solve_state(&l, &RouteRequest::Connection { input: 1, output: 0 }).is_err());
    }

    #[test]
    fn multicrossbar_routes_colors_independently() {
        let l = layout(ArchitectureKind::Multicrossbar);
        let palette = l.palette();
        let req = WavelengthRequest {
            routes: vec![
                WavelengthRoute { input: 0, color_nm: palette[0], output: 1 },
                WavelengthRoute { input: 0, color_nm: palette[1], output: 0 },
                WavelengthRoute { input: 1, color_nm: palette[2], output: 0 },
            ],
        };
        let state = solve_wavelength_routing(&l, &req).unwrap();
        assert!(verify(&l, &state, &RouteRequest::Wavelength(req)).unwrap());
    }

    #[test]
    fn unknown_color_and_port_clash_are_rejected() {
        let l = layout(ArchitectureKind::Wss8x8x3);
        let bad = WavelengthRequest { routes: vec![WavelengthRoute { input: 0, color_nm: 1500.0, output: 0 }] };
        assert!(matches!(solve_wavelength_routing(&l, &bad), Err(RoutingError::InvalidRequest(_))));
        let c = l.palette()[0];
        let clash = WavelengthRequest {
            routes: vec![
                WavelengthRoute { input: 0, color_nm: c, output: 0 },
                WavelengthRoute { input: 1, color_nm: c, output: 0 },
            ],
        };
        assert!(matches!(solve_wavelength_routing(&l, &clash), Err(RoutingError::Unroutable(_))));
    }

    #[test]
    fn wavelength_kinds_route_full_per_color_permutations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for kind in [ArchitectureKind::Wss6x6x4, ArchitectureKind::Wss8x8x3, ArchitectureKind::Wcc4x4x4] {
            let l = layout(kind);
            let n = l.inputs.len();
            for _ in 0..20 {
                let routes = l
                    .palette()
                    .into_iter()
                    .flat_map(|c| {
                        let p = Permutation::random(n, &mut rng);
                        (0..n).map(move |i| WavelengthRoute { input: i, color_nm: c, output: p.apply(i) })
                    })
                    .collect();
                let req = WavelengthRequest { routes };
                let state = solve_wavelength_routing(&l, &req).unwrap_or_else(|e| panic!("{kind}: {e}"));
                assert!(verify(&l, &state, &RouteRequest::Wavelength(req)).unwrap(), "{kind}");
            }
        }
    }
}
