//! Switch-state solvers and the path-trace oracle.
//!
//! The oracle is purely topological: cross exchanges the two rails of a
//! device, bar passes straight through, terminators absorb. A
//! wavelength-dedicated device only acts on light within half a linewidth of
//! its color; every other color sees it in bar.

mod solve;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fabric::{Actuation, ArchitectureKind, CircuitLayout, ControlId, Placement, PlacementKind};
use crate::netsim::ResonatorParams;

pub use solve::{solve_state, solve_wavelength_routing};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RoutingError {
    #[error("control {0} has no state")]
    UnresolvedControl(ControlId),
    #[error("column {column}, rail {rail}: wavelength-dedicated device needs a color to trace")]
    MissingWavelength { column: usize, rail: usize },
    #[error("column {column}, rail {rail}: a power splitter has no single path")]
    NotTraceable { column: usize, rail: usize },
    #[error("unroutable: {0}")]
    Unroutable(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("{kind} does not accept {request} requests")]
    Unsupported { kind: ArchitectureKind, request: &'static str },
}

/// Bijection from input index to output index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PermutationRepr", into = "PermutationRepr")]
pub struct Permutation {
    sigma: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PermutationRepr {
    sigma: Vec<usize>,
}

impl TryFrom<PermutationRepr> for Permutation {
    type Error = RoutingError;

    fn try_from(r: PermutationRepr) -> Result<Self, Self::Error> {
        Permutation::new(r.sigma)
    }
}

impl From<Permutation> for PermutationRepr {
    fn from(p: Permutation) -> Self {
        Self { sigma: p.sigma }
    }
}

impl Permutation {
    pub fn new(sigma: Vec<usize>) -> Result<Self, RoutingError> {
        let mut seen = vec![false; sigma.len()];
        for &s in &sigma {
            if s >= sigma.len() || std::mem::replace(&mut seen[s], true) {
                return Err(RoutingError::InvalidRequest(format!("{sigma:?} is not a permutation")));
            }
        }
        Ok(Self { sigma })
    }

    pub fn identity(n: usize) -> Self {
        Self { sigma: (0..n).collect() }
    }

    pub fn reversal(n: usize) -> Self {
        Self { sigma: (0..n).rev().collect() }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.shuffle(rng);
        Self { sigma }
    }

    /// Every permutation of `0..n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        let mut next = Some((0..n).collect::<Vec<_>>());
        std::iter::from_fn(move || {
            let current = next.take()?;
            let mut p = current.clone();
            if let Some(k) = (1..p.len()).rev().find(|&k| p[k - 1] < p[k]) {
                let l = (k..p.len()).rev().find(|&l| p[l] > p[k - 1]).expect("successor exists");
                p.swap(k - 1, l);
                p[k..].reverse();
                next = Some(p);
            }
            Some(Self { sigma: current })
        })
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn apply(&self, input: usize) -> usize {
        self.sigma[input]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.sigma
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.sigma.len()];
        for (i, &s) in self.sigma.iter().enumerate() {
            inv[s] = i;
        }
        Self { sigma: inv }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub actuation: Actuation,
    /// Index shift for analog models; defaults follow the actuation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_n: Option<f64>,
}

impl From<Actuation> for Setting {
    fn from(actuation: Actuation) -> Self {
        Self { actuation, delta_n: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SwitchState {
    pub controls: BTreeMap<ControlId, Setting>,
}

impl SwitchState {
    /// Every control of `layout` left in its unactuated state.
    pub fn ambient(layout: &CircuitLayout) -> Self {
        let controls = layout
            .controls()
            .map(|(id, _, p)| (id, Setting::from(p.ambient().expect("controlled devices are active"))))
            .collect();
        Self { controls }
    }

    pub fn setting(&self, id: ControlId) -> Option<&Setting> {
        self.controls.get(&id)
    }

    pub fn actuation(&self, id: ControlId) -> Option<Actuation> {
        self.controls.get(&id).map(|s| s.actuation)
    }

    pub fn set(&mut self, id: ControlId, actuation: Actuation) {
        self.controls.insert(id, Setting::from(actuation));
    }

    /// Controls whose actuation differs from the device's ambient state.
    pub fn non_ambient(&self, layout: &CircuitLayout) -> usize {
        layout.controls().filter(|(id, _, p)| self.actuation(*id).is_some_and(|a| Some(a) != p.ambient())).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavelengthRoute {
    pub input: usize,
    pub color_nm: f64,
    pub output: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WavelengthRequest {
    pub routes: Vec<WavelengthRoute>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RouteRequest {
    Permutation(Permutation),
    Wavelength(WavelengthRequest),
    /// A single path, for the selector circuits.
    Connection { input: usize, output: usize },
}

impl RouteRequest {
    pub(crate) fn label(&self) -> &'static str {
        match self {
            Self::Permutation(_) => "permutation",
            Self::Wavelength(_) => "wavelength",
            Self::Connection { .. } => "connection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathEnd {
    Output(usize),
    Terminated { rail: usize, column: usize },
    /// Left the last column on a rail that is not an output.
    Open { rail: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTrace {
    pub input: usize,
    pub end: PathEnd,
    /// Rail the light was on where the path ended.
    pub rail: usize,
    /// Active devices passed, in order.
    pub controls: Vec<ControlId>,
    pub crossovers: usize,
    pub filters: usize,
}

impl PathTrace {
    pub fn output(&self) -> Option<usize> {
        match self.end {
            PathEnd::Output(o) => Some(o),
            _ => None,
        }
    }

    /// Active plus passive devices passed.
    pub fn elements(&self) -> usize {
        self.controls.len() + self.crossovers + self.filters
    }
}

/// Whether light at `color_nm` sees a device dedicated to `device_nm`.
pub fn within_linewidth(color_nm: f64, device_nm: f64) -> bool {
    let q = ResonatorParams::nominal().q;
    (color_nm - device_nm).abs() < device_nm / q / 2.0
}

/// Whether `p` exchanges its rails for light at `color_nm`.
fn crosses(p: &Placement, column: usize, state: &SwitchState, color_nm: Option<f64>) -> Result<bool, RoutingError> {
    let tuned = |device: Option<f64>| -> Result<bool, RoutingError> {
        match (device, color_nm) {
            (None, _) => Ok(true),
            (Some(d), Some(c)) => Ok(within_linewidth(c, d)),
            (Some(_), None) => Err(RoutingError::MissingWavelength { column, rail: p.rail }),
        }
    };
    match p.kind {
        PlacementKind::Switch | PlacementKind::Mzi => {
            let id = p.control.expect("active placement has a control");
            let act = state.actuation(id).ok_or(RoutingError::UnresolvedControl(id))?;
            Ok(act == Actuation::Cross && tuned(p.color_nm)?)
        }
        PlacementKind::Filter => tuned(p.color_nm),
        PlacementKind::Crossover => Ok(true),
        PlacementKind::Coupler => Err(RoutingError::NotTraceable { column, rail: p.rail }),
        PlacementKind::Shuffle => unreachable!("shuffles are handled separately"),
    }
}

/// Follow every input through `layout` in `state` at `color_nm`.
pub fn trace_paths(layout: &CircuitLayout, state: &SwitchState, color_nm: Option<f64>) -> Result<Vec<PathTrace>, RoutingError> {
    for (id, _, _) in layout.controls() {
        state.setting(id).ok_or(RoutingError::UnresolvedControl(id))?;
    }
    let mut traces: Vec<PathTrace> = (0..layout.inputs.len())
        .map(|input| PathTrace {
            input,
            end: PathEnd::Open { rail: layout.inputs[input] },
            rail: layout.inputs[input],
            controls: Vec::new(),
            crossovers: 0,
            filters: 0,
        })
        .collect();
    let mut at: Vec<Option<usize>> = vec![None; layout.n_rails];
    for (i, &r) in layout.inputs.iter().enumerate() {
        at[r] = Some(i);
    }
    let mut done = vec![false; traces.len()];
    for (c, column) in layout.columns.iter().enumerate() {
        for p in &column.placements {
            if p.rails().all(|r| at[r].is_none()) {
                continue;
            }
            if let Some(perm) = &p.permutation {
                let old: Vec<_> = p.rails().map(|r| at[r]).collect();
                for (k, sig) in old.into_iter().enumerate() {
                    at[p.rail + perm[k]] = sig;
                }
                continue;
            }
            let cross = crosses(p, c, state, color_nm)?;
            for r in p.rails() {
                if let Some(s) = at[r] {
                    let t = &mut traces[s];
                    match p.kind {
                        PlacementKind::Crossover => t.crossovers += 1,
                        PlacementKind::Filter => t.filters += 1,
                        _ => t.controls.extend(p.control),
                    }
                }
            }
            if cross {
                at.swap(p.rail, p.rail + 1);
            }
        }
        for term in layout.terminators.iter().filter(|t| t.column == c) {
            if let Some(s) = at[term.rail].take() {
                traces[s].end = PathEnd::Terminated { rail: term.rail, column: c };
                traces[s].rail = term.rail;
                done[s] = true;
            }
        }
    }
    for (r, sig) in at.iter().enumerate() {
        if let Some(s) = *sig {
            if !done[s] {
                traces[s].end = layout.output_of_rail(r).map_or(PathEnd::Open { rail: r }, PathEnd::Output);
                traces[s].rail = r;
            }
        }
    }
    Ok(traces)
}

/// Output reached by each input, `None` when absorbed or lost.
pub fn realized(traces: &[PathTrace]) -> Vec<Option<usize>> {
    traces.iter().map(PathTrace::output).collect()
}

/// Whether `state` realizes `request` on `layout` according to the oracle.
pub fn verify(layout: &CircuitLayout, state: &SwitchState, request: &RouteRequest) -> Result<bool, RoutingError> {
    match request {
        RouteRequest::Permutation(p) => {
            let got = realized(&trace_paths(layout, state, None)?);
            Ok(got.len() == p.len() && got.iter().enumerate().all(|(i, o)| *o == Some(p.apply(i))))
        }
        RouteRequest::Wavelength(req) => {
            for route in &req.routes {
                let traces = trace_paths(layout, state, Some(route.color_nm))?;
                if traces.get(route.input).and_then(PathTrace::output) != Some(route.output) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        RouteRequest::Connection { input, output } => {
            let got = realized(&trace_paths(layout, state, None)?);
            let others_blocked = got.iter().enumerate().all(|(i, o)| i == *input || o.is_none());
            Ok(got.get(*input) == Some(&Some(*output)) && others_blocked)
        }
    }
}
