//! Generalized Conway life over the maximal cells of a block complex.
//!
//! The board is the set of maximal cells of a window, two cells being
//! neighbors when they share a support vertex.  A rule assigns every cell
//! type a birth set and a survival set of neighbor counts; the classic game
//! is the unit-square complex of ℤ² with B={3}, S={2,3}.  A rule is
//! *admissible* when no type births on zero neighbors, which is what keeps
//! finite states finite.
//!
//! Rule-space bookkeeping: with sets drawn from {0,…,n_i} there are
//! 2^(2(n_i+1)) rules per type and 2^(n_i)·2^(n_i+1) admissible ones; counts
//! quoted elsewhere as 2^(2n_i) correspond to dropping the count 0 from both
//! sets, which the admissibility predicate makes redundant only for the
//! birth set.  This module keeps the full encoding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::complex::{
    act, cell_types_and_neighbors, maximal_cells, Block, ComplexError, ComplexOptions,
    ComplexReport,
};
use crate::group::{ball, GroupError, MarkedGroup, Window};
use crate::oplab::{OpError, SparseOperator};

#[derive(Debug, Error)]
pub enum LifeError {
    #[error("rule lists {found} types, complex has {expected}")]
    TypeCount { expected: usize, found: usize },
    #[error("neighbor count {value} out of range for type {type_index} (max {cap})")]
    NeighborRange { type_index: usize, value: u32, cap: u32 },
    #[error("type {type_index} has no certified cell, so its neighbor range is unknown")]
    UncertifiedType { type_index: usize },
    #[error("rule is inadmissible (births on zero neighbors); step would not keep states finite")]
    Inadmissible,
    #[error("alive cell {cell} is too close to the window boundary; its neighborhood may exit the window")]
    Boundary { cell: String },
    #[error("no cell of the complex matches `{line}`")]
    UnknownCell { line: String },
    #[error("state space of {states} cells exceeds the enumeration cap {cap}")]
    StateSpace { states: usize, cap: usize },
    #[error("cannot parse rule: {reason}")]
    RuleParse { reason: String },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Operator(#[from] OpError),
}

/// The board: a window, its maximal cells, and the neighbor graph.
///
/// Cell types are discovered on a small window (where every enumeration
/// search is conclusive) and their translates are then scanned across the
/// full window, so large boards cost translation rather than enumeration.
pub struct LifeComplex {
    window: Window,
    report: ComplexReport,
    index_of: BTreeMap<Block, usize>,
    by_render: BTreeMap<String, usize>,
    renders: Vec<String>,
}

impl LifeComplex {
    /// Builds the board for `group` on `ball(radius)`, discovering cell
    /// types on `ball(discovery_radius)` first.
    pub fn build(
        group: &Arc<MarkedGroup>,
        radius: u32,
        discovery_radius: u32,
        ball_cap: usize,
        opts: &ComplexOptions,
    ) -> Result<LifeComplex, LifeError> {
        let wd = ball(group, discovery_radius.min(radius), ball_cap)?;
        let mc = maximal_cells(&wd, opts)?;
        let discovery = cell_types_and_neighbors(&wd, &mc.cells)?;
        let reps: Vec<Block> =
            discovery.types.iter().map(|t| t.representative.clone()).collect();
        let window = if radius == wd.radius() {
            wd
        } else {
            ball(group, radius, ball_cap)?
        };
        let mut cells: BTreeSet<Block> = BTreeSet::new();
        for rep in &reps {
            for v in 0..window.len() as u32 {
                let g = window.element(v).clone();
                let moved = act(group, &g, rep);
                let inside = moved
                    .support()
                    .iter()
                    .all(|e| window.index_of(e).is_some_and(|i| window.is_interior(i)));
                if inside {
                    cells.insert(moved);
                }
            }
        }
        let cells: Vec<Block> = cells.into_iter().collect();
        Self::from_cells(window, cells)
    }

    /// Wraps an explicit cell list (already supported in the window).
    pub fn from_cells(window: Window, cells: Vec<Block>) -> Result<LifeComplex, LifeError> {
        let report = cell_types_and_neighbors(&window, &cells)?;
        let group = window.group().clone();
        let mut index_of = BTreeMap::new();
        let mut by_render = BTreeMap::new();
        let mut renders = Vec::with_capacity(report.cells.len());
        for (i, c) in report.cells.iter().enumerate() {
            index_of.insert(c.clone(), i);
            let r = c.render(&group);
            by_render.insert(r.clone(), i);
            renders.push(r);
        }
        Ok(LifeComplex { window, report, index_of, by_render, renders })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn report(&self) -> &ComplexReport {
        &self.report
    }

    pub fn cells(&self) -> &[Block] {
        &self.report.cells
    }

    pub fn cell_index(&self, cell: &Block) -> Option<usize> {
        self.index_of.get(cell).copied()
    }

    /// The canonical one-line encoding of a cell.
    pub fn render_cell(&self, index: usize) -> &str {
        &self.renders[index]
    }
}

/// Per-type birth and survival sets, encoded as bitmasks over {0,…,n_i}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LifeRule {
    birth: Vec<u64>,
    survive: Vec<u64>,
    caps: Vec<u32>,
}

impl LifeRule {
    pub fn type_count(&self) -> usize {
        self.caps.len()
    }

    /// Admissible iff no type births on zero alive neighbors.
    pub fn admissible(&self) -> bool {
        self.birth.iter().all(|b| b & 1 == 0)
    }

    fn births(&self, type_index: usize, count: u32) -> bool {
        self.birth[type_index] >> count & 1 == 1
    }

    fn survives(&self, type_index: usize, count: u32) -> bool {
        self.survive[type_index] >> count & 1 == 1
    }
}

fn render_set(mask: u64) -> String {
    let items: Vec<String> =
        (0..64).filter(|&k| mask >> k & 1 == 1).map(|k| k.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

impl fmt::Display for LifeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (b, s)) in self.birth.iter().zip(&self.survive).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            if self.caps.len() > 1 {
                write!(f, "type_{i}: ")?;
            }
            write!(f, "B={} S={}", render_set(*b), render_set(*s))?;
        }
        Ok(())
    }
}

/// The highest possible neighbor count of each type, read off the certified
/// neighbor statistics of the complex.
fn type_caps(report: &ComplexReport) -> Result<Vec<u32>, LifeError> {
    report
        .types
        .iter()
        .enumerate()
        .map(|(i, t)| match t.neighbor_counts.last() {
            Some(&n) if n < 64 => Ok(n as u32),
            Some(_) => Err(LifeError::NeighborRange {
                type_index: i,
                value: *t.neighbor_counts.last().unwrap() as u32,
                cap: 63,
            }),
            None => Err(LifeError::UncertifiedType { type_index: i }),
        })
        .collect()
}

/// Builds a rule from explicit per-type birth and survival sets.
pub fn make_rule(
    report: &ComplexReport,
    per_type: &[(BTreeSet<u32>, BTreeSet<u32>)],
) -> Result<LifeRule, LifeError> {
    let caps = type_caps(report)?;
    if per_type.len() != caps.len() {
        return Err(LifeError::TypeCount { expected: caps.len(), found: per_type.len() });
    }
    let mut birth = Vec::with_capacity(caps.len());
    let mut survive = Vec::with_capacity(caps.len());
    for (i, (b, s)) in per_type.iter().enumerate() {
        let mut bm = 0u64;
        let mut sm = 0u64;
        for &v in b {
            if v > caps[i] {
                return Err(LifeError::NeighborRange { type_index: i, value: v, cap: caps[i] });
            }
            bm |= 1 << v;
        }
        for &v in s {
            if v > caps[i] {
                return Err(LifeError::NeighborRange { type_index: i, value: v, cap: caps[i] });
            }
            sm |= 1 << v;
        }
        birth.push(bm);
        survive.push(sm);
    }
    Ok(LifeRule { birth, survive, caps })
}

/// The same birth/survival sets applied to every type; `uniform_rule(report,
/// [3], [2, 3])` on the ℤ² complex is classic life.
pub fn uniform_rule(
    report: &ComplexReport,
    birth: &[u32],
    survive: &[u32],
) -> Result<LifeRule, LifeError> {
    let b: BTreeSet<u32> = birth.iter().copied().collect();
    let s: BTreeSet<u32> = survive.iter().copied().collect();
    let per: Vec<_> = report.types.iter().map(|_| (b.clone(), s.clone())).collect();
    make_rule(report, &per)
}

fn parse_set(text: &str) -> Result<BTreeSet<u32>, LifeError> {
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| LifeError::RuleParse { reason: format!("expected {{…}}, got `{text}`") })?;
    let mut out = BTreeSet::new();
    for part in inner.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let v: u32 = part
            .parse()
            .map_err(|_| LifeError::RuleParse { reason: format!("bad count `{part}`") })?;
        out.insert(v);
    }
    Ok(out)
}

/// Parses the textual rule form.  Single-type rules read `B={3} S={2,3}`;
/// multi-type rules use one `type_i: B={…} S={…}` line per type, and a bare
/// line applies to every type.
pub fn parse_rule(report: &ComplexReport, text: &str) -> Result<LifeRule, LifeError> {
    let caps = type_caps(report)?;
    let mut per: Vec<Option<(BTreeSet<u32>, BTreeSet<u32>)>> = vec![None; caps.len()];
    let mut uniform: Option<(BTreeSet<u32>, BTreeSet<u32>)> = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (target, rest) = match line.strip_prefix("type_") {
            Some(tail) => {
                let (idx, rest) = tail.split_once(':').ok_or_else(|| LifeError::RuleParse {
                    reason: format!("missing `:` in `{line}`"),
                })?;
                let idx: usize = idx.trim().parse().map_err(|_| LifeError::RuleParse {
                    reason: format!("bad type index in `{line}`"),
                })?;
                if idx >= caps.len() {
                    return Err(LifeError::TypeCount { expected: caps.len(), found: idx + 1 });
                }
                (Some(idx), rest.trim())
            }
            None => (None, line),
        };
        let mut b = None;
        let mut s = None;
        for tok in rest.split_whitespace() {
            if let Some(t) = tok.strip_prefix("B=") {
                b = Some(parse_set(t)?);
            } else if let Some(t) = tok.strip_prefix("S=") {
                s = Some(parse_set(t)?);
            } else {
                return Err(LifeError::RuleParse { reason: format!("unexpected token `{tok}`") });
            }
        }
        let (b, s) = match (b, s) {
            (Some(b), Some(s)) => (b, s),
            _ => {
                return Err(LifeError::RuleParse {
                    reason: format!("line `{line}` needs both B={{…}} and S={{…}}"),
                })
            }
        };
        match target {
            Some(i) => per[i] = Some((b, s)),
            None => uniform = Some((b, s)),
        }
    }
    let per: Vec<(BTreeSet<u32>, BTreeSet<u32>)> = per
        .into_iter()
        .enumerate()
        .map(|(i, slot)| {
            slot.or_else(|| uniform.clone()).ok_or_else(|| LifeError::RuleParse {
                reason: format!("no rule given for type {i}"),
            })
        })
        .collect::<Result<_, _>>()?;
    make_rule(report, &per)
}

/// A finite set of alive cells, by index into the complex's cell list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LifeState {
    pub alive: BTreeSet<usize>,
}

impl LifeState {
    pub fn from_cells(cells: impl IntoIterator<Item = usize>) -> LifeState {
        LifeState { alive: cells.into_iter().collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    pub fn len(&self) -> usize {
        self.alive.len()
    }
}

/// One-cell-per-line serialization, in canonical cell order.
pub fn state_to_string(complex: &LifeComplex, state: &LifeState) -> String {
    let mut out = String::new();
    for &i in &state.alive {
        out.push_str(complex.render_cell(i));
        out.push('\n');
    }
    out
}

pub fn parse_state(complex: &LifeComplex, text: &str) -> Result<LifeState, LifeError> {
    let mut alive = BTreeSet::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match complex.by_render.get(line) {
            Some(&i) => {
                alive.insert(i);
            }
            None => return Err(LifeError::UnknownCell { line: line.to_string() }),
        }
    }
    Ok(LifeState { alive })
}

/// One generation.  Requires an admissible rule — a dead cell with zero
/// alive neighbors then stays dead, so only alive cells and their neighbors
/// need examining and the full (infinite) board behaves like this finite
/// one, provided every alive cell's neighborhood is certified complete.
pub fn step(
    complex: &LifeComplex,
    rule: &LifeRule,
    state: &LifeState,
) -> Result<LifeState, LifeError> {
    if !rule.admissible() {
        return Err(LifeError::Inadmissible);
    }
    if rule.type_count() != complex.report.types.len() {
        return Err(LifeError::TypeCount {
            expected: complex.report.types.len(),
            found: rule.type_count(),
        });
    }
    let report = &complex.report;
    for &c in &state.alive {
        if !report.complete[c] {
            return Err(LifeError::Boundary { cell: complex.render_cell(c).to_string() });
        }
    }
    let mut candidates: BTreeSet<usize> = state.alive.clone();
    for &c in &state.alive {
        candidates.extend(report.neighbors[c].iter().copied());
    }
    let mut next = BTreeSet::new();
    for c in candidates {
        let count =
            report.neighbors[c].iter().filter(|n| state.alive.contains(n)).count() as u32;
        let t = report.type_of[c];
        let alive_now = state.alive.contains(&c);
        let alive_next = if alive_now {
            count <= rule.caps[t] && rule.survives(t, count)
        } else {
            count <= rule.caps[t] && rule.births(t, count)
        };
        if alive_next {
            next.insert(c);
        }
    }
    Ok(LifeState { alive: next })
}

/// All states supported on the given cells, in subset-bitmask order (the
/// basis for [`step_matrix`]).  `cap` bounds the number of states.
pub fn enumerate_states(
    cells: &[usize],
    cap: usize,
) -> Result<Vec<LifeState>, LifeError> {
    let k = cells.len();
    if k >= usize::BITS as usize || (1usize << k) > cap {
        return Err(LifeError::StateSpace { states: k, cap });
    }
    let mut out = Vec::with_capacity(1 << k);
    for mask in 0..(1usize << k) {
        let alive = cells
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .map(|(_, &c)| c)
            .collect();
        out.push(LifeState { alive });
    }
    Ok(out)
}

/// The step operator truncated to `basis`: a 0/1 matrix with one entry per
/// column, column j holding the basis index of `step(basis[j])`.  Columns
/// whose step leaves the window or the basis are zero and recorded in the
/// boundary mask.  Row sums count preimages (the fiber-size diagnostic).
pub fn step_matrix(
    complex: &LifeComplex,
    rule: &LifeRule,
    basis: &[LifeState],
) -> Result<SparseOperator, LifeError> {
    if !rule.admissible() {
        return Err(LifeError::Inadmissible);
    }
    let index: BTreeMap<&BTreeSet<usize>, u32> =
        basis.iter().enumerate().map(|(i, s)| (&s.alive, i as u32)).collect();
    let mut images = Vec::with_capacity(basis.len());
    for state in basis {
        let img = match step(complex, rule, state) {
            Ok(next) => index.get(&next.alive).copied(),
            Err(LifeError::Boundary { .. }) => None,
            Err(e) => return Err(e),
        };
        images.push(img);
    }
    let tag = format!(
        "life:{}:r{}:cells{}",
        complex.window.group().presentation().text(),
        complex.window.radius(),
        complex.cells().len()
    );
    Ok(SparseOperator::basis_map(&images, tag)?)
}
