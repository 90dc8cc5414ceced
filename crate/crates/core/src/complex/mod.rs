//! The block hierarchy of a marked group.
//!
//! Level 0 is the group itself, level 1 the Cayley edges `{g, gs}`, and a
//! block of level n ≥ 2 is a finite set of level-(n−1) blocks in which every
//! sub-member has exactly one *partner*: for each member `b` and each `c ∈ b`
//! there is exactly one other member `b′` with `b ∩ b′ = {c}`.  Composition
//! is symmetric difference of member sets.  Two tiers of the notion coexist:
//!
//! * **strict** blocks — the inductive hierarchy used for enumeration,
//!   irreducibility, maximal cells and tile types: members are themselves
//!   irreducible blocks of the previous level, and level-1 blocks are actual
//!   Cayley edges (`ℓ(g⁻¹h) = 1`);
//! * **loose** block values — whatever the [`Block`] type can hold, e.g. the
//!   pair `{e, s²}` arising as a composition of two edges.  Loose values are
//!   legal results of [`compose_blocks`] and inputs to
//!   [`is_admissible_block`], but never members of enumerated blocks.
//!
//! At level 2 the matching condition says every vertex touched by the member
//! edges has degree exactly 2, so strict connected 2-blocks are the simple
//! cycles of the Cayley graph; squares, cubes and their relatives appear as
//! the irreducible ones.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::group::{Element, GroupError, MarkedGroup, Window};

mod engine;
mod export;

pub use export::{export_dot, export_graphml};

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("blocks have different dimensions: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },
    #[error("composition result is not a block: {reason}")]
    NotComposable { reason: String },
    #[error("invalid block: {reason}")]
    InvalidBlock { reason: String },
    #[error("window too small: {what}")]
    WindowTooSmall { what: String },
    #[error("search budget of {budget} nodes exhausted; raise it or shrink the window")]
    SearchBudget { budget: u64 },
    #[error("cell {index} cannot be resolved in this window")]
    UnknownCell { index: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A block of the hierarchy.  `Vertex` is level 0; a `Cell` of dimension n
/// holds blocks of dimension n−1 in a canonical ordered set, so structural
/// equality is block equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    Vertex(Element),
    Cell { dim: u32, members: BTreeSet<Block> },
}

impl Block {
    pub fn vertex(e: Element) -> Block {
        Block::Vertex(e)
    }

    /// A dimension-1 block: an unordered pair of distinct vertices.  No
    /// adjacency is required — composites like `{e, s²}` are representable —
    /// but only genuine Cayley edges ever appear in enumerated blocks.
    pub fn pair(a: Element, b: Element) -> Result<Block, ComplexError> {
        if a == b {
            return Err(ComplexError::InvalidBlock {
                reason: "a dimension-1 block needs two distinct vertices".into(),
            });
        }
        let members = BTreeSet::from([Block::Vertex(a), Block::Vertex(b)]);
        Ok(Block::Cell { dim: 1, members })
    }

    /// Builds a cell from members of equal dimension.  Structural validity
    /// (the partner condition) is checked via [`validate_block`].
    pub fn cell(members: BTreeSet<Block>) -> Result<Block, ComplexError> {
        let mut dims = members.iter().map(Block::dimension);
        let first = dims.next().ok_or_else(|| ComplexError::InvalidBlock {
            reason: "a cell needs at least one member".into(),
        })?;
        for d in dims {
            if d != first {
                return Err(ComplexError::DimensionMismatch { left: first, right: d });
            }
        }
        let block = Block::Cell { dim: first + 1, members };
        validate_block(&block)?;
        Ok(block)
    }

    pub fn dimension(&self) -> u32 {
        match self {
            Block::Vertex(_) => 0,
            Block::Cell { dim, .. } => *dim,
        }
    }

    pub fn members(&self) -> Option<&BTreeSet<Block>> {
        match self {
            Block::Vertex(_) => None,
            Block::Cell { members, .. } => Some(members),
        }
    }

    /// Member count; the `card` of the composition axioms.
    pub fn card(&self) -> usize {
        self.members().map_or(1, BTreeSet::len)
    }

    /// All vertices reachable by recursive membership (the € relation).
    pub fn support(&self) -> BTreeSet<Element> {
        let mut out = BTreeSet::new();
        self.collect_support(&mut out);
        out
    }

    fn collect_support(&self, out: &mut BTreeSet<Element>) {
        match self {
            Block::Vertex(e) => {
                out.insert(e.clone());
            }
            Block::Cell { members, .. } => {
                for m in members {
                    m.collect_support(out);
                }
            }
        }
    }

    /// Recursive bracketed rendering, e.g. `[[e a][a a b]]`.
    pub fn render(&self, group: &MarkedGroup) -> String {
        match self {
            Block::Vertex(e) => group.render(e),
            Block::Cell { members, .. } => {
                let inner: Vec<String> = members.iter().map(|m| m.render(group)).collect();
                if self.dimension() == 1 {
                    format!("[{}]", inner.join(" "))
                } else {
                    format!("[{}]", inner.join(""))
                }
            }
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::Vertex(_) => write!(f, "vertex"),
            Block::Cell { dim, members } => write!(f, "{dim}-block({} members)", members.len()),
        }
    }
}

/// Checks the structural block conditions: a dimension-1 block is a pair of
/// distinct vertices; at dimension ≥ 2 every sub-member of every member must
/// have exactly one partner.  Member adjacency/irreducibility (the strict
/// tier) is a property of the enumeration, not of the value.
pub fn validate_block(block: &Block) -> Result<(), ComplexError> {
    match block {
        Block::Vertex(_) => Ok(()),
        Block::Cell { dim, members } => {
            for m in members {
                if m.dimension() + 1 != *dim {
                    return Err(ComplexError::DimensionMismatch {
                        left: *dim,
                        right: m.dimension(),
                    });
                }
                validate_block(m)?;
            }
            if *dim == 1 {
                if members.len() != 2 {
                    return Err(ComplexError::InvalidBlock {
                        reason: format!(
                            "a dimension-1 block has exactly 2 vertices, found {}",
                            members.len()
                        ),
                    });
                }
                return Ok(());
            }
            let list: Vec<&Block> = members.iter().collect();
            for (i, b) in list.iter().enumerate() {
                let b_members = b.members().expect("dim >= 1 member");
                for c in b_members {
                    let mut partners = 0;
                    for (j, other) in list.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        let o_members = other.members().expect("dim >= 1 member");
                        let mut inter = b_members.intersection(o_members);
                        if inter.next() == Some(c) && inter.next().is_none() {
                            partners += 1;
                        }
                    }
                    if partners != 1 {
                        return Err(ComplexError::InvalidBlock {
                            reason: format!(
                                "sub-member of a {dim}-block has {partners} exact partners \
                                 instead of 1"
                            ),
                        });
                    }
                }
            }
            Ok(())
        }
    }
}

/// Symmetric difference of member sets.  `Ok(None)` is the empty product
/// (`a.a = ∅`); a nonempty result must again satisfy the block conditions.
pub fn compose_blocks(a: &Block, b: &Block) -> Result<Option<Block>, ComplexError> {
    let (da, db) = (a.dimension(), b.dimension());
    if da != db {
        return Err(ComplexError::DimensionMismatch { left: da, right: db });
    }
    if da == 0 {
        return Err(ComplexError::NotComposable {
            reason: "vertices (dimension 0) do not compose".into(),
        });
    }
    let ma = a.members().expect("dim >= 1");
    let mb = b.members().expect("dim >= 1");
    let diff: BTreeSet<Block> = ma.symmetric_difference(mb).cloned().collect();
    if diff.is_empty() {
        return Ok(None);
    }
    let result = Block::Cell { dim: da, members: diff };
    validate_block(&result).map_err(|e| ComplexError::NotComposable { reason: e.to_string() })?;
    Ok(Some(result))
}

/// Left translation `b ↦ g·b`, applied recursively to every vertex.
pub fn act(group: &MarkedGroup, g: &Element, block: &Block) -> Block {
    match block {
        Block::Vertex(e) => Block::Vertex(group.multiply(g, e)),
        Block::Cell { dim, members } => Block::Cell {
            dim: *dim,
            members: members.iter().map(|m| act(group, g, m)).collect(),
        },
    }
}

/// Canonical representative of a block's translation orbit: the minimum of
/// `v⁻¹ · b` over all support vertices `v`.  The candidate set is itself a
/// translation invariant, so equal orbits get equal representatives.
pub(crate) fn min_translate(group: &MarkedGroup, block: &Block) -> Block {
    block
        .support()
        .iter()
        .map(|v| act(group, &group.inverse(v), block))
        .min()
        .expect("blocks have nonempty support")
}

/// Tuning knobs for the block searches.
#[derive(Clone, Debug)]
pub struct ComplexOptions {
    /// Maximum member count of an enumerated block.  The factor searches
    /// enumerate member subsets, so values above 16 are clamped to 16.
    pub size_cap: usize,
    /// Node budget shared by the irreducibility and maximality searches.
    pub search_budget: u64,
    /// Highest dimension to explore; `None` means one past the generator
    /// count (the hierarchy provably stops at the generator count, and the
    /// extra level verifies that it did).
    pub max_dimension: Option<u32>,
}

impl Default for ComplexOptions {
    fn default() -> Self {
        Self { size_cap: 12, search_budget: 5_000_000, max_dimension: None }
    }
}

/// Irreducible level-`n` blocks supported in the window, sorted canonically.
#[derive(Debug)]
pub struct LevelEnumeration {
    pub dimension: u32,
    pub blocks: Vec<Block>,
    /// Number of search branches cut off by `size_cap`; nonzero means larger
    /// blocks may exist beyond the cap.
    pub truncated_branches: u64,
}

/// Everything `maximal_cells` learned about one window.
#[derive(Debug)]
pub struct MaximalCells {
    /// Maximal cells with support in the window interior, all dimensions
    /// mixed, in canonical order.
    pub cells: Vec<Block>,
    /// Highest dimension carrying an irreducible block ("N").
    pub dimension_bound: u32,
    /// Irreducible block counts per level (index = dimension) as enumerated
    /// in the type-discovery region.
    pub per_level: Vec<usize>,
    /// True if some enumeration branch hit `size_cap`.
    pub truncated: bool,
}

/// One translation-orbit type of maximal cells.
#[derive(Debug)]
pub struct CellType {
    pub representative: Block,
    pub dimension: u32,
    /// Cells of this type in the returned cell list.
    pub cell_count: usize,
    /// Distinct neighbor counts observed over safely-interior cells; a
    /// singleton list is the type's neighbor count, an empty list means the
    /// window was too small to certify any cell of this type.
    pub neighbor_counts: Vec<usize>,
    /// How many cells were counted for the neighbor statistics.
    pub sampled: usize,
}

/// Types plus the neighbor graph over a maximal-cell list.
#[derive(Debug)]
pub struct ComplexReport {
    pub cells: Vec<Block>,
    pub types: Vec<CellType>,
    /// `type_of[i]` indexes `types` for `cells[i]`.
    pub type_of: Vec<usize>,
    /// `neighbors[i]` lists indices of cells sharing ≥ 1 support vertex.
    pub neighbors: Vec<Vec<usize>>,
    /// `complete[i]` is true when every maximal cell touching `cells[i]`
    /// provably lies in the list, so `neighbors[i]` is the whole
    /// neighborhood and not a window artifact.
    pub complete: Vec<bool>,
    /// Cells excluded from neighbor statistics because their neighborhood
    /// may leave the window (`!complete[i]`).
    pub stats_excluded: usize,
}

/// All irreducible `n`-blocks with support in the window (level 1 = all
/// window edges).  Deterministic order.  The certification quality near the
/// window boundary is limited by the margin the window leaves around a
/// block; callers needing complete statistics should keep supports a few
/// units away from the sphere (see `maximal_cells`, which does).
pub fn enumerate_level(
    window: &Window,
    n: u32,
    opts: &ComplexOptions,
) -> Result<LevelEnumeration, ComplexError> {
    engine::enumerate_level(window, n, opts)
}

/// Maximal cells (irreducible blocks not contained in any higher block
/// supported in the window) with support in the window interior, plus the
/// observed dimension bound.  Types are discovered in a shrunken core region
/// where every search is conclusive, then translated across the interior.
pub fn maximal_cells(window: &Window, opts: &ComplexOptions) -> Result<MaximalCells, ComplexError> {
    engine::maximal_cells(window, opts)
}

/// Partitions maximal cells into translation-orbit types and builds the
/// shared-support-vertex neighbor graph.  `cells` should be the full
/// interior cell list from [`maximal_cells`]; neighbor statistics are
/// restricted to cells whose whole neighborhood provably lies inside it.
pub fn cell_types_and_neighbors(
    window: &Window,
    cells: &[Block],
) -> Result<ComplexReport, ComplexError> {
    engine::cell_types_and_neighbors(window, cells)
}

/// Whether a (possibly loose) block decomposes into irreducible blocks of
/// the window: membership of its member set in the GF(2) span of the
/// enumerated irreducible blocks of the same dimension.
pub fn is_admissible_block(
    window: &Window,
    block: &Block,
    opts: &ComplexOptions,
) -> Result<bool, ComplexError> {
    engine::is_admissible_block(window, block, opts)
}
