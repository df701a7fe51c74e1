//! Piecewise-constant data on the unit interval, exactly represented.
//!
//! A [`StepFunction`] partitions `[0, 1]` by rational breakpoints into
//! half-open cells `[b_i, b_{i+1})` with a rational value per cell (the point
//! `s = 1` takes the last cell's value by convention).  A vector-valued
//! [`EdgeStepFunction`] stores one component per *active* edge; absent
//! components are identically zero.  Both types keep a canonical form —
//! adjacent cells with equal values are merged, identically zero components
//! are dropped — so derived equality is semantic equality.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::operator::SparseVec;
use crate::ratio::{format_ratio, Q};

/// An exact piecewise-constant function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StepFunctionData", into = "StepFunctionData")]
pub struct StepFunction {
    breaks: Vec<Q>,
    values: Vec<Q>,
}

/// Serialized form of a [`StepFunction`]: `"p/q"` breakpoints and values.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct StepFunctionData {
    /// Breakpoints `0 = b_0 < … < b_n = 1`.
    #[serde(with = "crate::ratio::ratio_serde_vec")]
    breaks: Vec<Q>,
    /// Cell values; one fewer than breakpoints.
    #[serde(with = "crate::ratio::ratio_serde_vec")]
    values: Vec<Q>,
}

impl TryFrom<StepFunctionData> for StepFunction {
    type Error = Error;
    fn try_from(data: StepFunctionData) -> Result<Self, Error> {
        StepFunction::new(data.breaks, data.values)
    }
}

impl From<StepFunction> for StepFunctionData {
    fn from(f: StepFunction) -> Self {
        Self { breaks: f.breaks, values: f.values }
    }
}

impl StepFunction {
    /// Builds a step function after validating that `breaks` is a strictly
    /// increasing partition of `[0, 1]` with exactly one value per cell.
    /// Adjacent cells with equal values are merged.
    pub fn new(breaks: Vec<Q>, values: Vec<Q>) -> Result<Self, Error> {
        let reason = |r: &str| Error::MalformedStepFunction { reason: r.to_string() };
        if breaks.len() < 2 {
            return Err(reason("need at least two breakpoints"));
        }
        if values.len() + 1 != breaks.len() {
            return Err(reason("need exactly one value per cell"));
        }
        if !breaks[0].is_zero() {
            return Err(reason("first breakpoint must be 0"));
        }
        if breaks[breaks.len() - 1] != Q::from_integer(1.into()) {
            return Err(reason("last breakpoint must be 1"));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(reason("breakpoints must be strictly increasing"));
        }
        Ok(Self::merged(breaks, values))
    }

    /// Merges adjacent equal-valued cells; assumes a structurally valid partition.
    fn merged(breaks: Vec<Q>, values: Vec<Q>) -> Self {
        let mut out_breaks = vec![breaks[0].clone()];
        let mut out_values: Vec<Q> = Vec::new();
        for (i, v) in values.into_iter().enumerate() {
            if out_values.last() == Some(&v) {
                // extend the previous cell: skip the interior breakpoint
            } else {
                out_values.push(v);
                if i > 0 {
                    out_breaks.push(breaks[i].clone());
                }
            }
        }
        out_breaks.push(breaks[breaks.len() - 1].clone());
        Self { breaks: out_breaks, values: out_values }
    }

    /// The zero function.
    pub fn zero() -> Self {
        Self {
            breaks: vec![Q::zero(), Q::from_integer(1.into())],
            values: vec![Q::zero()],
        }
    }

    /// The constant function with value `v`.
    pub fn constant(v: Q) -> Self {
        Self { breaks: vec![Q::zero(), Q::from_integer(1.into())], values: vec![v] }
    }

    /// Breakpoints `0 = b_0 < … < b_n = 1`.
    pub fn breaks(&self) -> &[Q] {
        &self.breaks
    }

    /// Cell values (one per half-open cell).
    pub fn values(&self) -> &[Q] {
        &self.values
    }

    /// True for the zero function.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    /// The value at `s ∈ [0, 1]`; cells are half-open `[b_i, b_{i+1})` and
    /// `s = 1` takes the last cell's value.
    pub fn value_at(&self, s: &Q) -> Result<&Q, Error> {
        if s.is_negative() || *s > Q::from_integer(1.into()) {
            return Err(Error::MalformedStepFunction {
                reason: format!("evaluation point {} outside [0, 1]", format_ratio(s)),
            });
        }
        // partition_point: first cell whose upper breakpoint exceeds s.
        let idx = self.breaks[1..self.breaks.len() - 1].partition_point(|b| b <= s);
        Ok(&self.values[idx])
    }

    /// Exact integral of `|f|` over `[0, 1]`.
    pub fn integral_abs(&self) -> Q {
        self.cells().map(|(a, b, v)| v.abs() * (b - a)).sum()
    }

    /// Exact integral of `f` over `[0, 1]`.
    pub fn integral(&self) -> Q {
        self.cells().map(|(a, b, v)| v * (b - a)).sum()
    }

    /// Iterates over cells as `(lower, upper, value)`.
    pub fn cells(&self) -> impl Iterator<Item = (&Q, &Q, &Q)> {
        self.breaks
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (&w[0], &w[1], v))
    }

    /// Pointwise sum, exact.
    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    /// Pointwise difference, exact.
    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    /// Pointwise scaling, exact.
    pub fn scaled(&self, factor: &Q) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        Self {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    fn combine(&self, other: &Self, op: impl Fn(&Q, &Q) -> Q) -> Self {
        let mut breaks: Vec<Q> = self.breaks.iter().chain(&other.breaks).cloned().collect();
        breaks.sort();
        breaks.dedup();
        let mut values = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            let a = self.value_at(&w[0]).expect("breakpoint in range");
            let b = other.value_at(&w[0]).expect("breakpoint in range");
            values.push(op(a, b));
        }
        Self::merged(breaks, values)
    }
}

/// A finitely supported vector of step functions, one per active edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EdgeStepFunctionData", into = "EdgeStepFunctionData")]
pub struct EdgeStepFunction {
    dim: usize,
    components: BTreeMap<usize, StepFunction>,
}

/// Serialized form of an [`EdgeStepFunction`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct EdgeStepFunctionData {
    /// Ambient edge count.
    dim: usize,
    /// Active components keyed by edge index.
    edges: BTreeMap<usize, StepFunction>,
}

impl TryFrom<EdgeStepFunctionData> for EdgeStepFunction {
    type Error = Error;
    fn try_from(data: EdgeStepFunctionData) -> Result<Self, Error> {
        let mut f = EdgeStepFunction::zero(data.dim);
        for (edge, fun) in data.edges {
            f.set_component(edge, fun)?;
        }
        Ok(f)
    }
}

impl From<EdgeStepFunction> for EdgeStepFunctionData {
    fn from(f: EdgeStepFunction) -> Self {
        Self { dim: f.dim, edges: f.components }
    }
}

impl EdgeStepFunction {
    /// The zero function over `dim` edges.
    pub fn zero(dim: usize) -> Self {
        Self { dim, components: BTreeMap::new() }
    }

    /// Ambient edge count.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sets the component on `edge` (dropping it when identically zero).
    pub fn set_component(&mut self, edge: usize, f: StepFunction) -> Result<(), Error> {
        if edge >= self.dim {
            return Err(Error::EdgeIndexOutOfRange { index: edge, dim: self.dim });
        }
        if f.is_zero() {
            self.components.remove(&edge);
        } else {
            self.components.insert(edge, f);
        }
        Ok(())
    }

    /// Builder form of [`EdgeStepFunction::set_component`].
    pub fn with_component(mut self, edge: usize, f: StepFunction) -> Result<Self, Error> {
        self.set_component(edge, f)?;
        Ok(self)
    }

    /// The component on `edge`; `None` means identically zero.
    pub fn component(&self, edge: usize) -> Option<&StepFunction> {
        self.components.get(&edge)
    }

    /// Active edges in increasing order.
    pub fn active_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.keys().copied()
    }

    /// True for the zero function.
    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// The ℓ¹-valued section at `s`: the vector `(f_j(s))_j`.
    pub fn section_at(&self, s: &Q) -> Result<SparseVec, Error> {
        let mut v = SparseVec::zero();
        for (&j, f) in &self.components {
            v.add_to(j, f.value_at(s)?);
        }
        Ok(v)
    }

    /// Exact `L¹(ℓ¹)` norm: `Σ_j ∫ |f_j|`.
    pub fn l1_norm(&self) -> Q {
        self.components.values().map(StepFunction::integral_abs).sum()
    }

    /// Exact `L∞(ℓ¹)` norm: the essential sup of `s ↦ Σ_j |f_j(s)|`, i.e. the
    /// maximum of the ℓ¹ section norm over the merged partition.
    pub fn linf_norm(&self) -> Q {
        let (breaks, sections) = self.global_sections();
        sections
            .iter()
            .map(SparseVec::l1_norm)
            .max()
            .unwrap_or_else(|| {
                debug_assert!(breaks.len() == 2 || breaks.is_empty());
                Q::zero()
            })
    }

    /// Pointwise linear combination `self + scale * other`, exact.
    pub fn add_scaled(&self, other: &Self, scale: &Q) -> Result<Self, Error> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut out = self.clone();
        for (&j, g) in &other.components {
            let combined = match out.components.get(&j) {
                Some(f) => f.add(&g.scaled(scale)),
                None => g.scaled(scale),
            };
            out.set_component(j, combined)?;
        }
        Ok(out)
    }

    /// Pointwise difference, exact.
    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.add_scaled(other, &-Q::from_integer(1.into()))
    }

    /// The merged global view: breakpoints covering every component and the
    /// constant ℓ¹ section on each cell.  Returns `(breaks, sections)` with
    /// `sections.len() + 1 == breaks.len()`; the zero function yields the
    /// trivial partition with one zero section.
    pub fn global_sections(&self) -> (Vec<Q>, Vec<SparseVec>) {
        let mut breaks: Vec<Q> = vec![Q::zero(), Q::from_integer(1.into())];
        for f in self.components.values() {
            breaks.extend(f.breaks().iter().cloned());
        }
        breaks.sort();
        breaks.dedup();
        let sections = breaks[..breaks.len() - 1]
            .iter()
            .map(|b| self.section_at(b).expect("breakpoint in range"))
            .collect();
        (breaks, sections)
    }

    /// Rebuilds from a global view; cells may repeat values (they are merged)
    /// but `breaks` must be a strictly increasing partition of `[0, 1]`.
    pub fn from_global_sections(
        dim: usize,
        breaks: Vec<Q>,
        sections: Vec<SparseVec>,
    ) -> Result<Self, Error> {
        if breaks.len() != sections.len() + 1 {
            return Err(Error::MalformedStepFunction {
                reason: "need exactly one section per cell".into(),
            });
        }
        let mut per_edge: BTreeMap<usize, Vec<Q>> = BTreeMap::new();
        for section in &sections {
            for (j, _) in section.iter() {
                per_edge.entry(j).or_default();
            }
        }
        let mut out = Self::zero(dim);
        for (j, _) in std::mem::take(&mut per_edge) {
            let values: Vec<Q> = sections.iter().map(|s| s.get(j)).collect();
            out.set_component(j, StepFunction::new(breaks.clone(), values)?)?;
        }
        Ok(out)
    }
}
