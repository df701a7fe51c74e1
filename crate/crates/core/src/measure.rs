//! The measure-valued extension of the transport flow.
//!
//! States here are finite signed measures on the metric graph: per edge, a
//! finite list of point atoms plus a step-function density.  The flow `S(t)`
//! moves atoms at unit speed and pushes them through the junction operator
//! exactly like densities, so the embedding `f ↦ f·ds` intertwines `S(t)`
//! with the `L¹` flow by construction.
//!
//! The point of carrying measures at all is the contrast between topologies:
//! `S(t)` is strongly continuous for the weak* pairing against continuous
//! test functions, but an atomic state jumps in total variation the moment it
//! moves.  [`weakstar_continuity_probe`] tabulates both effects side by side.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::flow::evaluate_t;
use crate::operator::{ColumnStochasticOperator, SparseVec};
use crate::ratio::{format_ratio, split_time, to_f64, Q};
use crate::step::{EdgeStepFunction, StepFunction};

/// A continuous piecewise-linear function on `[0, 1]`, used as a weak* test
/// function.  Exactly integrable against step densities and point atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseLinearData", into = "PiecewiseLinearData")]
pub struct PiecewiseLinear {
    nodes: Vec<Q>,
    values: Vec<Q>,
}

/// Serialized form of a [`PiecewiseLinear`] function.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PiecewiseLinearData {
    /// Interpolation nodes `0 = n_0 < … < n_k = 1`.
    #[serde(with = "crate::ratio::ratio_serde_vec")]
    nodes: Vec<Q>,
    /// Function values at the nodes.
    #[serde(with = "crate::ratio::ratio_serde_vec")]
    values: Vec<Q>,
}

impl TryFrom<PiecewiseLinearData> for PiecewiseLinear {
    type Error = Error;
    fn try_from(data: PiecewiseLinearData) -> Result<Self, Error> {
        PiecewiseLinear::new(data.nodes, data.values)
    }
}

impl From<PiecewiseLinear> for PiecewiseLinearData {
    fn from(f: PiecewiseLinear) -> Self {
        Self { nodes: f.nodes, values: f.values }
    }
}

impl PiecewiseLinear {
    /// Builds the interpolant through `(nodes[i], values[i])` after checking
    /// that the nodes form a strictly increasing partition of `[0, 1]`.
    pub fn new(nodes: Vec<Q>, values: Vec<Q>) -> Result<Self, Error> {
        let reason = |r: &str| Error::MalformedTestFunction { reason: r.to_string() };
        if nodes.len() < 2 {
            return Err(reason("need at least two nodes"));
        }
        if nodes.len() != values.len() {
            return Err(reason("need exactly one value per node"));
        }
        if !nodes[0].is_zero() {
            return Err(reason("first node must be 0"));
        }
        if !nodes[nodes.len() - 1].is_one() {
            return Err(reason("last node must be 1"));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(reason("nodes must be strictly increasing"));
        }
        Ok(Self { nodes, values })
    }

    /// The constant function `v`.
    pub fn constant(v: Q) -> Self {
        Self { nodes: vec![Q::zero(), Q::one()], values: vec![v.clone(), v] }
    }

    /// Exact value at `s ∈ [0, 1]`.
    pub fn eval(&self, s: &Q) -> Result<Q, Error> {
        if s.is_negative() || *s > Q::one() {
            return Err(Error::MalformedTestFunction {
                reason: format!("evaluation point {} outside [0, 1]", format_ratio(s)),
            });
        }
        let idx = self.nodes[1..self.nodes.len() - 1].partition_point(|n| n <= s);
        let (lo, hi) = (&self.nodes[idx], &self.nodes[idx + 1]);
        let (vlo, vhi) = (&self.values[idx], &self.values[idx + 1]);
        Ok(vlo + (vhi - vlo) * (s - lo) / (hi - lo))
    }

    /// Exact integral over `[a, b] ⊆ [0, 1]`.
    pub fn integral_over(&self, a: &Q, b: &Q) -> Result<Q, Error> {
        if a > b {
            return Err(Error::MalformedTestFunction {
                reason: "integration bounds out of order".into(),
            });
        }
        let mut cuts = vec![a.clone()];
        for n in &self.nodes {
            if n > a && n < b {
                cuts.push(n.clone());
            }
        }
        cuts.push(b.clone());
        let two = Q::from_integer(2.into());
        let mut total = Q::zero();
        for w in cuts.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            total += (self.eval(lo)? + self.eval(hi)?) / &two * (hi - lo);
        }
        Ok(total)
    }

    /// Exact Lipschitz constant (maximal absolute slope).
    pub fn lipschitz(&self) -> Q {
        self.nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(n, v)| ((&v[1] - &v[0]) / (&n[1] - &n[0])).abs())
            .max()
            .expect("at least one segment")
    }

    /// Maximal absolute value (attained at a node).
    pub fn sup_norm(&self) -> Q {
        self.values.iter().map(Signed::abs).max().expect("at least one node")
    }
}

/// A vector of test functions, one per edge; absent components are zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestFunction {
    /// Ambient edge count.
    pub dim: usize,
    /// Active components keyed by edge index.
    pub edges: BTreeMap<usize, PiecewiseLinear>,
}

impl TestFunction {
    /// The zero test function over `dim` edges.
    pub fn zero(dim: usize) -> Self {
        Self { dim, edges: BTreeMap::new() }
    }

    /// Sets the component on `edge`.
    pub fn set_component(&mut self, edge: usize, f: PiecewiseLinear) -> Result<(), Error> {
        if edge >= self.dim {
            return Err(Error::EdgeIndexOutOfRange { index: edge, dim: self.dim });
        }
        self.edges.insert(edge, f);
        Ok(())
    }

    /// Largest Lipschitz constant across components.
    pub fn lipschitz(&self) -> Q {
        self.edges.values().map(PiecewiseLinear::lipschitz).max().unwrap_or_else(Q::zero)
    }
}

/// The measure on a single edge: finitely many atoms plus a step density.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ComponentMeasureData", into = "ComponentMeasureData")]
pub struct ComponentMeasure {
    /// Atoms as `(position, weight)`, sorted by position, unique, nonzero.
    atoms: Vec<(Q, Q)>,
    /// Absolutely continuous part.
    density: StepFunction,
}

/// Serialized form of a [`ComponentMeasure`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ComponentMeasureData {
    /// Point masses.
    #[serde(default)]
    atoms: Vec<AtomData>,
    /// Step density; omitted when zero.
    #[serde(default)]
    density: Option<StepFunction>,
}

/// One serialized atom.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct AtomData {
    /// Position in `[0, 1]`.
    #[serde(with = "crate::ratio::ratio_serde")]
    pos: Q,
    /// Signed weight.
    #[serde(with = "crate::ratio::ratio_serde")]
    weight: Q,
}

impl TryFrom<ComponentMeasureData> for ComponentMeasure {
    type Error = Error;
    fn try_from(data: ComponentMeasureData) -> Result<Self, Error> {
        ComponentMeasure::new(
            data.atoms.into_iter().map(|a| (a.pos, a.weight)).collect(),
            data.density.unwrap_or_else(StepFunction::zero),
        )
    }
}

impl From<ComponentMeasure> for ComponentMeasureData {
    fn from(m: ComponentMeasure) -> Self {
        Self {
            atoms: m.atoms.into_iter().map(|(pos, weight)| AtomData { pos, weight }).collect(),
            density: if m.density.is_zero() { None } else { Some(m.density) },
        }
    }
}

impl ComponentMeasure {
    /// Builds a component measure; atoms are sorted, merged at coincident
    /// positions, and dropped when their weight cancels to zero.
    pub fn new(atoms: Vec<(Q, Q)>, density: StepFunction) -> Result<Self, Error> {
        let mut merged: BTreeMap<Q, Q> = BTreeMap::new();
        for (pos, weight) in atoms {
            if pos.is_negative() || pos > Q::one() {
                return Err(Error::MalformedMeasure {
                    reason: format!("atom position {} outside [0, 1]", format_ratio(&pos)),
                });
            }
            *merged.entry(pos).or_insert_with(Q::zero) += weight;
        }
        merged.retain(|_, w| !w.is_zero());
        Ok(Self { atoms: merged.into_iter().collect(), density })
    }

    /// The zero measure.
    pub fn zero() -> Self {
        Self { atoms: Vec::new(), density: StepFunction::zero() }
    }

    /// A single atom.
    pub fn atom(pos: Q, weight: Q) -> Result<Self, Error> {
        Self::new(vec![(pos, weight)], StepFunction::zero())
    }

    /// Atoms as `(position, weight)` pairs, sorted by position.
    pub fn atoms(&self) -> &[(Q, Q)] {
        &self.atoms
    }

    /// The absolutely continuous part.
    pub fn density(&self) -> &StepFunction {
        &self.density
    }

    /// True for the zero measure.
    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_zero()
    }

    /// Total variation: atom weights in absolute value plus `∫ |density|`.
    pub fn variation(&self) -> Q {
        self.atoms.iter().map(|(_, w)| w.abs()).sum::<Q>() + self.density.integral_abs()
    }

    /// Exact pairing `∫ φ dμ` against a piecewise-linear test function.
    pub fn pair(&self, phi: &PiecewiseLinear) -> Result<Q, Error> {
        let mut total = Q::zero();
        for (pos, weight) in &self.atoms {
            total += weight * phi.eval(pos)?;
        }
        for (a, b, v) in self.density.cells() {
            total += v * phi.integral_over(a, b)?;
        }
        Ok(total)
    }

    fn add_scaled(&self, other: &Self, scale: &Q) -> Result<Self, Error> {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().map(|(p, w)| (p.clone(), w * scale)));
        Self::new(atoms, self.density.add(&other.density.scaled(scale)))
    }
}

/// A finite signed measure on the whole graph, one component per active edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EdgeMeasureData", into = "EdgeMeasureData")]
pub struct EdgeMeasure {
    dim: usize,
    components: BTreeMap<usize, ComponentMeasure>,
}

/// Serialized form of an [`EdgeMeasure`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct EdgeMeasureData {
    /// Ambient edge count.
    dim: usize,
    /// Active components keyed by edge index.
    edges: BTreeMap<usize, ComponentMeasure>,
}

impl TryFrom<EdgeMeasureData> for EdgeMeasure {
    type Error = Error;
    fn try_from(data: EdgeMeasureData) -> Result<Self, Error> {
        let mut out = EdgeMeasure::zero(data.dim);
        for (edge, comp) in data.edges {
            out.set_component(edge, comp)?;
        }
        Ok(out)
    }
}

impl From<EdgeMeasure> for EdgeMeasureData {
    fn from(m: EdgeMeasure) -> Self {
        Self { dim: m.dim, edges: m.components }
    }
}

impl EdgeMeasure {
    /// The zero measure over `dim` edges.
    pub fn zero(dim: usize) -> Self {
        Self { dim, components: BTreeMap::new() }
    }

    /// Ambient edge count.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sets the component on `edge` (dropping it when zero).
    pub fn set_component(&mut self, edge: usize, m: ComponentMeasure) -> Result<(), Error> {
        if edge >= self.dim {
            return Err(Error::EdgeIndexOutOfRange { index: edge, dim: self.dim });
        }
        if m.is_zero() {
            self.components.remove(&edge);
        } else {
            self.components.insert(edge, m);
        }
        Ok(())
    }

    /// Builder form of [`EdgeMeasure::set_component`].
    pub fn with_component(mut self, edge: usize, m: ComponentMeasure) -> Result<Self, Error> {
        self.set_component(edge, m)?;
        Ok(self)
    }

    /// The component on `edge`; `None` means zero.
    pub fn component(&self, edge: usize) -> Option<&ComponentMeasure> {
        self.components.get(&edge)
    }

    /// Active edges in increasing order.
    pub fn active_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.keys().copied()
    }

    /// True for the zero measure.
    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Total variation norm, exact.
    pub fn variation(&self) -> Q {
        self.components.values().map(ComponentMeasure::variation).sum()
    }

    /// Exact linear combination `self + scale · other`.
    pub fn add_scaled(&self, other: &Self, scale: &Q) -> Result<Self, Error> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut out = self.clone();
        for (&j, m) in &other.components {
            let combined = match out.components.get(&j) {
                Some(existing) => existing.add_scaled(m, scale)?,
                None => ComponentMeasure::zero().add_scaled(m, scale)?,
            };
            out.set_component(j, combined)?;
        }
        Ok(out)
    }

    /// Exact difference.
    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.add_scaled(other, &-Q::one())
    }

    /// Exact weak* pairing `Σ_j ∫ φ_j dμ_j`.
    pub fn pair(&self, phi: &TestFunction) -> Result<Q, Error> {
        if phi.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: phi.dim });
        }
        let mut total = Q::zero();
        for (j, comp) in &self.components {
            if let Some(phi_j) = phi.edges.get(j) {
                total += comp.pair(phi_j)?;
            }
        }
        Ok(total)
    }

    /// Restriction to `[a, b]` per edge: atoms on the closed interval, the
    /// density on `[a, b)`.
    pub fn restrict(&self, a: &Q, b: &Q) -> Result<Self, Error> {
        if a.is_negative() || b > &Q::one() || a > b {
            return Err(Error::MalformedMeasure { reason: "restriction window out of range".into() });
        }
        let mut out = Self::zero(self.dim);
        for (&j, comp) in &self.components {
            let atoms: Vec<(Q, Q)> = comp
                .atoms
                .iter()
                .filter(|(p, _)| p >= a && p <= b)
                .cloned()
                .collect();
            let density = mask_window(&comp.density, a, b);
            out.set_component(j, ComponentMeasure::new(atoms, density)?)?;
        }
        Ok(out)
    }
}

/// Restricts a step function to `[a, b)`, zero elsewhere, exactly.
fn mask_window(f: &StepFunction, a: &Q, b: &Q) -> StepFunction {
    let mut breaks: Vec<Q> = f.breaks().to_vec();
    for cut in [a, b] {
        if cut > &Q::zero() && cut < &Q::one() {
            breaks.push(cut.clone());
        }
    }
    breaks.sort();
    breaks.dedup();
    let values: Vec<Q> = breaks[..breaks.len() - 1]
        .iter()
        .map(|lo| {
            if lo >= a && lo < b {
                f.value_at(lo).expect("breakpoint in range").clone()
            } else {
                Q::zero()
            }
        })
        .collect();
    StepFunction::new(breaks, values).expect("valid partition")
}

/// Embeds an `L¹` profile as the measure `f · ds` (no atoms).
pub fn embed(f: &EdgeStepFunction) -> Result<EdgeMeasure, Error> {
    let mut out = EdgeMeasure::zero(f.dim());
    for j in f.active_edges() {
        let density = f.component(j).expect("active edge has a component").clone();
        out.set_component(j, ComponentMeasure::new(Vec::new(), density)?)?;
    }
    Ok(out)
}

/// Evaluates the measure flow `S(t) μ` exactly.
///
/// Atoms are grouped by position into edge-space vectors, translated by the
/// fractional part of `t`, and hit by `Bⁿ` (or `Bⁿ⁺¹` after wrapping through
/// the junction); two groups can land on the same position only at `1 − τ`,
/// where they merge.  Densities follow the `L¹` flow verbatim, so embedding
/// commutes with evolution by construction.
pub fn evaluate_s(
    op: &ColumnStochasticOperator,
    t: &Q,
    mu: &EdgeMeasure,
) -> Result<EdgeMeasure, Error> {
    if mu.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: mu.dim() });
    }
    let (n, tau) = split_time(t)?;

    // Group atoms by position across edges.
    let mut grouped: BTreeMap<Q, SparseVec> = BTreeMap::new();
    for (&j, comp) in &mu.components {
        for (pos, weight) in &comp.atoms {
            grouped
                .entry(pos.clone())
                .or_insert_with(SparseVec::zero)
                .add_to(j, weight);
        }
    }
    let mut moved: BTreeMap<Q, SparseVec> = BTreeMap::new();
    for (pos, weights) in grouped {
        let (target, image) = if pos >= tau {
            (&pos - &tau, op.apply_power(&weights, n)?)
        } else {
            (&pos + (Q::one() - &tau), op.apply_power(&weights, n + 1)?)
        };
        let slot = moved.entry(target).or_insert_with(SparseVec::zero);
        for (i, w) in image.iter() {
            slot.add_to(i, w);
        }
    }

    // Densities transform exactly like L¹ data.
    let mut densities = EdgeStepFunction::zero(mu.dim());
    for (&j, comp) in &mu.components {
        densities.set_component(j, comp.density.clone())?;
    }
    let moved_densities = evaluate_t(op, t, &densities)?;

    let mut out = EdgeMeasure::zero(mu.dim());
    for j in 0..mu.dim() {
        let atoms: Vec<(Q, Q)> = moved
            .iter()
            .filter_map(|(pos, w)| {
                let weight = w.get(j);
                (!weight.is_zero()).then(|| (pos.clone(), weight))
            })
            .collect();
        let density = moved_densities
            .component(j)
            .cloned()
            .unwrap_or_else(StepFunction::zero);
        out.set_component(j, ComponentMeasure::new(atoms, density)?)?;
    }
    Ok(out)
}

/// Rigid translation by `t` towards the head, failing when any mass would
/// cross the junction.
pub fn shift(mu: &EdgeMeasure, t: &Q) -> Result<EdgeMeasure, Error> {
    if t.is_negative() || t > &Q::one() {
        return Err(Error::ShiftOutOfRange { t: format_ratio(t) });
    }
    let mut out = EdgeMeasure::zero(mu.dim());
    for (&j, comp) in &mu.components {
        let mut atoms = Vec::with_capacity(comp.atoms.len());
        for (pos, weight) in &comp.atoms {
            if pos < t {
                return Err(Error::ShiftOutOfRange { t: format_ratio(t) });
            }
            atoms.push((pos - t, weight.clone()));
        }
        let density = shift_density(&comp.density, t);
        // Mass on [0, t) would cross the junction under a rigid shift.
        if !t.is_zero() && mask_window(&comp.density, &Q::zero(), t).integral_abs() != Q::zero() {
            return Err(Error::ShiftOutOfRange { t: format_ratio(t) });
        }
        out.set_component(j, ComponentMeasure::new(atoms, density)?)?;
    }
    Ok(out)
}

/// The nilpotent one-edge shift: translate by `t` and silently drop whatever
/// crosses the head.  Identically zero once `t > 1`.
pub fn nilpotent_shift(mu: &EdgeMeasure, t: &Q) -> Result<EdgeMeasure, Error> {
    if t.is_negative() {
        return Err(Error::ShiftOutOfRange { t: format_ratio(t) });
    }
    let mut out = EdgeMeasure::zero(mu.dim());
    if t > &Q::one() {
        return Ok(out);
    }
    for (&j, comp) in &mu.components {
        let atoms: Vec<(Q, Q)> = comp
            .atoms
            .iter()
            .filter(|(p, _)| p >= t)
            .map(|(p, w)| (p - t, w.clone()))
            .collect();
        out.set_component(j, ComponentMeasure::new(atoms, shift_density(&comp.density, t))?)?;
    }
    Ok(out)
}

/// `g(s) = f(s + t)` for `s + t < 1`, zero beyond; assumes `t ∈ [0, 1]`.
fn shift_density(f: &StepFunction, t: &Q) -> StepFunction {
    if t.is_zero() {
        return f.clone();
    }
    if *t == Q::one() {
        return StepFunction::zero();
    }
    let boundary = Q::one() - t;
    let mut breaks = vec![Q::zero()];
    for b in f.breaks() {
        if b > t && *b < Q::one() {
            breaks.push(b - t);
        }
    }
    breaks.push(boundary.clone());
    breaks.push(Q::one());
    breaks.sort();
    breaks.dedup();
    let values: Vec<Q> = breaks[..breaks.len() - 1]
        .iter()
        .map(|lo| {
            if *lo < boundary {
                f.value_at(&(lo + t)).expect("point in range").clone()
            } else {
                Q::zero()
            }
        })
        .collect();
    StepFunction::new(breaks, values).expect("valid partition")
}

/// One row of a weak*-versus-total-variation continuity probe.
#[derive(Debug, Clone)]
pub struct ProbeRow {
    /// Sample time.
    pub t: f64,
    /// `|⟨S(t)μ − μ, φ⟩|`: vanishes as `t → 0` (weak* continuity).
    pub pairing_gap: f64,
    /// `‖S(t)μ − μ‖_TV`: jumps immediately for atomic `μ`.
    pub tv_gap: f64,
}

/// Tabulates weak* pairing gaps against total-variation gaps along a time
/// grid, demonstrating that the measure flow is weak*-continuous but not
/// strongly continuous in variation norm.
pub fn weakstar_continuity_probe(
    op: &ColumnStochasticOperator,
    mu: &EdgeMeasure,
    phi: &TestFunction,
    times: &[Q],
) -> Result<Vec<ProbeRow>, Error> {
    let base = mu.pair(phi)?;
    let mut rows = Vec::with_capacity(times.len());
    for t in times {
        let moved = evaluate_s(op, t, mu)?;
        let pairing_gap = to_f64(&(moved.pair(phi)? - &base).abs());
        let tv_gap = to_f64(&moved.sub(mu)?.variation());
        rows.push(ProbeRow { t: to_f64(t), pairing_gap, tv_gap });
    }
    Ok(rows)
}
