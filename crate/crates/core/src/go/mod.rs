//! Go on a Cayley graph.
//!
//! A position is a finite map from group elements to stone colors; clusters,
//! liberties and eyes are read off the Cayley adjacency inside a finite
//! window.  The move function follows the classic rule chain — occupied
//! vertices are frozen, last liberties capture, immortal eyes are protected,
//! anything else places a stone — and the admissible states are the closure
//! of the vacuum under moves at interior vertices.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::group::{GroupError, MarkedGroup, Window};
use crate::oplab::{OpError, SparseOperator};

#[derive(Debug, Error)]
pub enum GoError {
    #[error("stone at `{word}` is not interior to the window; enlarge the radius")]
    SupportTouchesBoundary { word: String },
    #[error("move at `{word}` is outside the window interior")]
    MoveOutsideInterior { word: String },
    #[error("admissible-state cap exceeded: more than {cap} states")]
    EnumerationCap { cap: usize },
    #[error("state document line {line}: {msg}")]
    Document { line: usize, msg: String },
    #[error("state does not fit this window: {msg}")]
    WindowMismatch { msg: String },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Operator(#[from] OpError),
}

/// Stone colors.  The sign convention is black = −1, white = +1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn sign(self) -> i8 {
        match self {
            Color::Black => -1,
            Color::White => 1,
        }
    }

    pub fn opposite(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Black => "black",
            Color::White => "white",
        }
    }

    pub fn parse(text: &str) -> Option<Color> {
        match text {
            "black" | "b" | "-1" => Some(Color::Black),
            "white" | "w" | "1" | "+1" => Some(Color::White),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A finite Go position over a window's vertex set.
///
/// Stones are keyed by window index, so a state only means something relative
/// to a window of the group it was built against.  Balls of the same group
/// nest as ordered prefixes, so growing the radius keeps every index valid.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GoState {
    stones: BTreeMap<u32, Color>,
}

impl GoState {
    /// The empty board.
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn from_stones(stones: impl IntoIterator<Item = (u32, Color)>) -> Self {
        Self { stones: stones.into_iter().collect() }
    }

    pub fn stone(&self, v: u32) -> Option<Color> {
        self.stones.get(&v).copied()
    }

    /// Stones in canonical (window-index) order.
    pub fn stones(&self) -> impl Iterator<Item = (u32, Color)> + '_ {
        self.stones.iter().map(|(&v, &c)| (v, c))
    }

    pub fn len(&self) -> usize {
        self.stones.len()
    }

    pub fn is_vacuum(&self) -> bool {
        self.stones.is_empty()
    }
}

/// A maximal connected set of same-colored stones together with its liberty
/// and eye sets.  All vertex lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub color: Color,
    pub vertices: Vec<u32>,
    pub liberties: Vec<u32>,
    pub eyes: Vec<u32>,
}

impl Cluster {
    pub fn liberty_count(&self) -> usize {
        self.liberties.len()
    }

    /// A cluster with two eyes can never be captured.
    pub fn is_immortal(&self) -> bool {
        self.eyes.len() >= 2
    }
}

fn boundary_error(window: &Window, v: u32) -> GoError {
    GoError::SupportTouchesBoundary { word: window.group().render(window.element(v)) }
}

/// Partitions the stones of `state` into clusters.
///
/// The support must lie in the window interior so that every neighbor of a
/// stone is visible; an eye is only certified at interior vertices, where the
/// full neighbor set is known (a sphere vertex always has an unseen neighbor
/// further out, which is empty, so it can never be an eye anyway).
pub fn analyze_clusters(state: &GoState, window: &Window) -> Result<Vec<Cluster>, GoError> {
    for (v, _) in state.stones() {
        if !window.is_interior(v) {
            return Err(boundary_error(window, v));
        }
    }
    let mut seen: BTreeSet<u32> = BTreeSet::new();
    let mut clusters = Vec::new();
    for (v, color) in state.stones() {
        if seen.contains(&v) {
            continue;
        }
        let mut queue = VecDeque::from([v]);
        let mut members = BTreeSet::from([v]);
        seen.insert(v);
        while let Some(u) = queue.pop_front() {
            for &w in window.neighbors(u) {
                if state.stone(w) == Some(color) && seen.insert(w) {
                    members.insert(w);
                    queue.push_back(w);
                }
            }
        }
        let mut liberties: BTreeSet<u32> = BTreeSet::new();
        for &u in &members {
            for &w in window.neighbors(u) {
                if state.stone(w).is_none() {
                    liberties.insert(w);
                }
            }
        }
        let eyes = liberties
            .iter()
            .copied()
            .filter(|&w| {
                window.is_interior(w) && window.neighbors(w).iter().all(|n| members.contains(n))
            })
            .collect();
        clusters.push(Cluster {
            color,
            vertices: members.into_iter().collect(),
            liberties: liberties.into_iter().collect(),
            eyes,
        });
    }
    Ok(clusters)
}

/// Applies one move of `color` at the interior vertex `g`.
///
/// Rule chain, in order:
/// 1. a stone already at `g` freezes the position;
/// 2. if `g` is the last liberty of some clusters, the opposite-colored ones
///    are captured and the stone is placed; if all of them share the mover's
///    color nothing is captured and the move is a no-op (no suicide);
/// 3. if `g` is an eye of a cluster with at least two eyes, the position is
///    unchanged regardless of color (immortality);
/// 4. otherwise the stone is placed — unless its own fresh cluster would have
///    zero liberties.  That last guard covers the one configuration the named
///    rules miss: a false eye, all of whose neighbors are occupied by enemy
///    clusters that each keep another liberty.  Placing there would give
///    birth to a dead cluster, which the no-suicide principle forbids.
pub fn play(state: &GoState, color: Color, g: u32, window: &Window) -> Result<GoState, GoError> {
    if !window.is_interior(g) {
        return Err(GoError::MoveOutsideInterior {
            word: window.group().render(window.element(g)),
        });
    }
    if state.stone(g).is_some() {
        return Ok(state.clone());
    }
    let clusters = analyze_clusters(state, window)?;
    let at_last_liberty: Vec<&Cluster> =
        clusters.iter().filter(|c| c.liberties.as_slice() == [g]).collect();
    if !at_last_liberty.is_empty() {
        if at_last_liberty.iter().all(|c| c.color == color) {
            return Ok(state.clone());
        }
        let mut next = state.clone();
        for c in &at_last_liberty {
            if c.color != color {
                for &v in &c.vertices {
                    next.stones.remove(&v);
                }
            }
        }
        next.stones.insert(g, color);
        return Ok(next);
    }
    if clusters.iter().any(|c| c.eyes.len() >= 2 && c.eyes.binary_search(&g).is_ok()) {
        return Ok(state.clone());
    }
    let mut next = state.clone();
    next.stones.insert(g, color);
    if fresh_cluster_is_dead(&next, color, g, window) {
        return Ok(state.clone());
    }
    Ok(next)
}

/// True iff the cluster of the just-placed stone at `g` has no liberty.
fn fresh_cluster_is_dead(state: &GoState, color: Color, g: u32, window: &Window) -> bool {
    let mut queue = VecDeque::from([g]);
    let mut members = BTreeSet::from([g]);
    while let Some(u) = queue.pop_front() {
        for &w in window.neighbors(u) {
            match state.stone(w) {
                None => return false,
                Some(c) if c == color && members.insert(w) => queue.push_back(w),
                _ => {}
            }
        }
    }
    true
}

/// The admissible states over one window, with every move transition
/// recorded.  States appear in discovery order; the vacuum has index 0.
pub struct Admissible {
    group: std::sync::Arc<MarkedGroup>,
    radius: u32,
    depth: u32,
    interior: Vec<u32>,
    states: Vec<GoState>,
    discovery_depth: Vec<u32>,
    /// Per state: images of the moves `(Black, interior[0..k])` then
    /// `(White, interior[0..k])`; `None` when the image lies beyond the
    /// enumerated depth.
    transitions: Vec<Vec<Option<u32>>>,
}

impl Admissible {
    pub fn states(&self) -> &[GoState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: u32) -> &GoState {
        &self.states[i as usize]
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn discovery_depth(&self, i: u32) -> u32 {
        self.discovery_depth[i as usize]
    }

    /// Interior vertices, in window order; move slots refer to this list.
    pub fn interior(&self) -> &[u32] {
        &self.interior
    }

    pub fn vertex_slot(&self, g: u32) -> Option<usize> {
        self.interior.binary_search(&g).ok()
    }

    /// Image of state `i` under the move `(color, interior[slot])`, or `None`
    /// if it lies beyond the enumerated depth.
    pub fn transition(&self, i: u32, color: Color, slot: usize) -> Option<u32> {
        let offset = match color {
            Color::Black => 0,
            Color::White => self.interior.len(),
        };
        self.transitions[i as usize][offset + slot]
    }

    pub fn basis_tag(&self) -> String {
        format!("go:{}:r{}:d{}", self.group.presentation().text(), self.radius, self.depth)
    }
}

/// Breadth-first closure of the vacuum under all interior moves, up to
/// `depth` moves, with at most `cap` states retained.
///
/// Every enumerated state is expanded — including those on the last layer, so
/// the transition table is total — but images past the depth limit are not
/// added and show up as `None`.
pub fn enumerate_admissible(window: &Window, depth: u32, cap: usize) -> Result<Admissible, GoError> {
    let interior = window.interior_indices();
    let mut states = vec![GoState::vacuum()];
    let mut index: BTreeMap<GoState, u32> = BTreeMap::from([(GoState::vacuum(), 0)]);
    let mut discovery_depth = vec![0u32];
    let mut transitions: Vec<Vec<Option<u32>>> = Vec::new();
    let mut cursor = 0;
    while cursor < states.len() {
        let current = states[cursor].clone();
        let d = discovery_depth[cursor];
        let mut row = Vec::with_capacity(2 * interior.len());
        for color in [Color::Black, Color::White] {
            for &g in &interior {
                let image = play(&current, color, g, window)?;
                let id = match index.get(&image) {
                    Some(&i) => Some(i),
                    None if d < depth => {
                        if states.len() >= cap {
                            return Err(GoError::EnumerationCap { cap });
                        }
                        let i = states.len() as u32;
                        states.push(image.clone());
                        discovery_depth.push(d + 1);
                        index.insert(image, i);
                        Some(i)
                    }
                    None => None,
                };
                row.push(id);
            }
        }
        transitions.push(row);
        cursor += 1;
    }
    Ok(Admissible {
        group: window.group().clone(),
        radius: window.radius(),
        depth,
        interior,
        states,
        discovery_depth,
        transitions,
    })
}

/// The move `(color, g)` as a 0/1 operator on the enumerated state basis.
/// Each unmasked column has exactly one entry: the index of the image state.
/// Columns whose image escapes the basis are zero and masked.
pub fn move_matrix(adm: &Admissible, color: Color, g: u32) -> Result<SparseOperator, GoError> {
    let slot = adm.vertex_slot(g).ok_or_else(|| GoError::MoveOutsideInterior {
        word: format!("vertex index {g}"),
    })?;
    let images: Vec<Option<u32>> =
        (0..adm.len() as u32).map(|i| adm.transition(i, color, slot)).collect();
    Ok(SparseOperator::basis_map(&images, adm.basis_tag())?)
}

/// Renders a state as a small text document: presentation and radius header,
/// then one `word TAB color` record per stone in canonical order.
pub fn write_state_document(state: &GoState, window: &Window) -> String {
    let mut out = String::new();
    out.push_str(&format!("group: {}\n", window.group().presentation().text()));
    out.push_str(&format!("radius: {}\n", window.radius()));
    for (v, color) in state.stones() {
        out.push_str(&format!("{}\t{}\n", window.group().render(window.element(v)), color));
    }
    out
}

/// A parsed state document, not yet tied to a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDocument {
    pub group: String,
    pub radius: u32,
    pub stones: Vec<(String, Color)>,
}

pub fn read_state_document(text: &str) -> Result<StateDocument, GoError> {
    let mut group = None;
    let mut radius = None;
    let mut stones = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("group:") {
            group = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("radius:") {
            radius = Some(rest.trim().parse::<u32>().map_err(|_| GoError::Document {
                line: lineno,
                msg: format!("bad radius `{}`", rest.trim()),
            })?);
        } else {
            let (word, color) = raw.split_once('\t').ok_or_else(|| GoError::Document {
                line: lineno,
                msg: "stone records are `word TAB color`".into(),
            })?;
            let color = Color::parse(color.trim()).ok_or_else(|| GoError::Document {
                line: lineno,
                msg: format!("unknown color `{}`", color.trim()),
            })?;
            stones.push((word.trim().to_string(), color));
        }
    }
    Ok(StateDocument {
        group: group.ok_or(GoError::Document { line: 1, msg: "missing `group:` header".into() })?,
        radius: radius.ok_or(GoError::Document { line: 1, msg: "missing `radius:` header".into() })?,
        stones,
    })
}

/// Resolves a parsed document against a window of the same marked group.
pub fn bind_state(doc: &StateDocument, window: &Window) -> Result<GoState, GoError> {
    let declared = MarkedGroup::parse(&doc.group)?;
    if declared.presentation().text() != window.group().presentation().text() {
        return Err(GoError::WindowMismatch {
            msg: format!(
                "document group `{}` vs window group `{}`",
                declared.presentation().text(),
                window.group().presentation().text()
            ),
        });
    }
    let mut stones = BTreeMap::new();
    for (word, color) in &doc.stones {
        let e = window.group().parse_word(word)?;
        let v = window.index_of(&e).ok_or_else(|| GoError::WindowMismatch {
            msg: format!("stone `{word}` lies outside the radius-{} window", window.radius()),
        })?;
        if stones.insert(v, *color).is_some() {
            return Err(GoError::WindowMismatch { msg: format!("duplicate stone at `{word}`") });
        }
    }
    Ok(GoState { stones })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::ball;

    fn window(presentation: &str, radius: u32) -> Window {
        let g = MarkedGroup::parse(presentation).unwrap();
        ball(&g, radius, 1_000_000).unwrap()
    }

    fn vertex(w: &Window, word: &str) -> u32 {
        let e = w.group().parse_word(word).unwrap();
        w.index_of(&e).unwrap()
    }

    fn state(w: &Window, stones: &[(&str, Color)]) -> GoState {
        GoState::from_stones(stones.iter().map(|&(word, c)| (vertex(w, word), c)))
    }

    fn words(w: &Window, vs: &[u32]) -> Vec<String> {
        vs.iter().map(|&v| w.group().render(w.element(v))).collect()
    }

    use Color::{Black, White};

    #[test]
    fn vacuum_has_no_clusters() {
        let w = window("<s|>", 4);
        assert!(analyze_clusters(&GoState::vacuum(), &w).unwrap().is_empty());
    }

    #[test]
    fn line_cluster_liberties_and_no_eyes() {
        let w = window("<s|>", 6);
        let s = state(&w, &[("s", Black), ("s^2", Black), ("s^3", Black)]);
        let clusters = analyze_clusters(&s, &w).unwrap();
        assert_eq!(clusters.len(), 1);
        let c = &clusters[0];
        assert_eq!(c.color, Black);
        assert_eq!(words(&w, &c.vertices), ["s", "s^2", "s^3"]);
        let mut libs = words(&w, &c.liberties);
        libs.sort();
        assert_eq!(libs, ["e", "s^4"]);
        assert!(c.eyes.is_empty());
    }

    #[test]
    fn ring_on_the_grid_has_one_eye_at_the_origin() {
        let w = window("<a,b|[a,b]>", 3);
        let ring = [
            "a", "a b", "b", "a^-1 b", "a^-1", "a^-1 b^-1", "b^-1", "a b^-1",
        ];
        let s = GoState::from_stones(ring.iter().map(|word| (vertex(&w, word), Black)));
        let clusters = analyze_clusters(&s, &w).unwrap();
        assert_eq!(clusters.len(), 1);
        let c = &clusters[0];
        assert_eq!(c.vertices.len(), 8);
        assert_eq!(words(&w, &c.eyes), ["e"]);
        assert!(!c.is_immortal());
    }

    #[test]
    fn boundary_support_is_rejected() {
        let w = window("<s|>", 3);
        let s = state(&w, &[("s^3", Black)]);
        assert!(matches!(
            analyze_clusters(&s, &w),
            Err(GoError::SupportTouchesBoundary { .. })
        ));
        assert!(matches!(
            play(&GoState::vacuum(), Black, vertex(&w, "s^3"), &w),
            Err(GoError::MoveOutsideInterior { .. })
        ));
    }

    #[test]
    fn occupied_vertices_freeze_the_position() {
        let w = window("<s|>", 4);
        let s = state(&w, &[("s", Black)]);
        assert_eq!(play(&s, Black, vertex(&w, "s"), &w).unwrap(), s);
        assert_eq!(play(&s, White, vertex(&w, "s"), &w).unwrap(), s);
    }

    #[test]
    fn vacuum_move_places_one_stone() {
        let w = window("<s|>", 4);
        let next = play(&GoState::vacuum(), Black, vertex(&w, "s^-1"), &w).unwrap();
        assert_eq!(next, state(&w, &[("s^-1", Black)]));
    }

    #[test]
    fn last_liberty_capture_on_the_line() {
        // Black plays the only liberty of the white stone: capture, place.
        let w = window("<s|>", 4);
        let before = state(&w, &[("e", White), ("s^-1", Black)]);
        let after = play(&before, Black, vertex(&w, "s"), &w).unwrap();
        assert_eq!(after, state(&w, &[("s^-1", Black), ("s", Black)]));
        assert_eq!(after.stone(vertex(&w, "e")), None);
    }

    #[test]
    fn same_color_last_liberty_is_a_no_op() {
        // White filling the last liberty of its own cluster captures nothing
        // and is refused, even though the merged cluster would survive.
        let w = window("<s|>", 4);
        let before = state(&w, &[("e", White), ("s", Black)]);
        let after = play(&before, White, vertex(&w, "s^-1"), &w).unwrap();
        assert_eq!(after, before);
    }

    #[test]
    fn false_eye_placement_is_refused() {
        // Both neighbors of the origin hold black stones of two different
        // clusters, each with a spare liberty, so no capture fires; a white
        // stone at the origin would be born dead and is not placed.
        let w = window("<s|>", 4);
        let before = state(&w, &[("s^-1", Black), ("s", Black)]);
        let after = play(&before, White, vertex(&w, "e"), &w).unwrap();
        assert_eq!(after, before);
        // Black at the origin merges the two clusters instead.
        let merged = play(&before, Black, vertex(&w, "e"), &w).unwrap();
        let clusters = analyze_clusters(&merged, &w).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].vertices.len(), 3);
    }

    #[test]
    fn mixed_last_liberty_captures_enemies_and_keeps_friends() {
        // The origin is simultaneously the last liberty of a black and a
        // white cluster.  Black captures the white pair, keeps its own, and
        // the merged black cluster breathes through the freed vertices.
        let w = window("<s|>", 5);
        let before = state(
            &w,
            &[
                ("s^-3", White),
                ("s^-2", Black),
                ("s^-1", Black),
                ("s", White),
                ("s^2", White),
                ("s^3", Black),
            ],
        );
        let after = play(&before, Black, vertex(&w, "e"), &w).unwrap();
        let expected = state(
            &w,
            &[
                ("s^-3", White),
                ("s^-2", Black),
                ("s^-1", Black),
                ("e", Black),
                ("s^3", Black),
            ],
        );
        assert_eq!(after, expected);
        for c in analyze_clusters(&after, &w).unwrap() {
            assert!(c.liberty_count() >= 1);
        }
    }

    #[test]
    fn two_eye_cluster_ignores_moves_in_its_eyes() {
        // A 5×3 rectangle of stones with two holes:
        //   X X X X X
        //   X . X . X
        //   X X X X X
        // Each hole is an eye, so the cluster is immortal and plays at either
        // hole — by either color — leave the position unchanged.
        let w = window("<a,b|[a,b]>", 4);
        let mut stones = Vec::new();
        for x in -2i32..=2 {
            for y in -1i32..=1 {
                if y == 0 && (x == -1 || x == 1) {
                    continue;
                }
                stones.push((grid_vertex(&w, x, y), Black));
            }
        }
        let s = GoState::from_stones(stones);
        let clusters = analyze_clusters(&s, &w).unwrap();
        assert_eq!(clusters.len(), 1);
        assert!(clusters[0].is_immortal());
        assert_eq!(clusters[0].eyes.len(), 2);
        for x in [-1i32, 1] {
            let eye = grid_vertex(&w, x, 0);
            assert_eq!(play(&s, Black, eye, &w).unwrap(), s);
            assert_eq!(play(&s, White, eye, &w).unwrap(), s);
        }
    }

    fn grid_vertex(w: &Window, x: i32, y: i32) -> u32 {
        let g = w.group();
        let mut word = Vec::new();
        for _ in 0..x.abs() {
            word.push(if x > 0 { 1 } else { -1 });
        }
        for _ in 0..y.abs() {
            word.push(if y > 0 { 2 } else { -2 });
        }
        w.index_of(&g.normal_form(&word)).unwrap()
    }

    #[test]
    fn depth_one_enumeration_counts_two_colors_per_interior_vertex() {
        let w = window("<a,b|[a,b]>", 2);
        let adm = enumerate_admissible(&w, 1, 10_000).unwrap();
        let k = w.interior_indices().len();
        assert_eq!(k, 5);
        assert_eq!(adm.len(), 2 * k + 1);
        assert!(adm.state(0).is_vacuum());
    }

    #[test]
    fn depth_zero_enumeration_is_just_the_vacuum() {
        let w = window("<s|>", 3);
        let adm = enumerate_admissible(&w, 0, 10).unwrap();
        assert_eq!(adm.len(), 1);
        // Moves out of the vacuum exist but lie beyond depth 0.
        assert_eq!(adm.transition(0, Black, 0), None);
    }

    #[test]
    fn enumeration_matches_a_brute_force_closure() {
        // Oracle: repeatedly apply every move to every known state, depth
        // times, with dedup by the serialized form — no shared bookkeeping
        // with the enumerator.
        let w = window("<s|>", 3);
        let depth = 2;
        let adm = enumerate_admissible(&w, depth, 100_000).unwrap();

        let mut oracle: BTreeMap<String, GoState> = BTreeMap::new();
        let key = |s: &GoState| write_state_document(s, &w);
        oracle.insert(key(&GoState::vacuum()), GoState::vacuum());
        for _ in 0..depth {
            let snapshot: Vec<GoState> = oracle.values().cloned().collect();
            for s in snapshot {
                for color in [Black, White] {
                    for &g in &w.interior_indices() {
                        let img = play(&s, color, g, &w).unwrap();
                        oracle.insert(key(&img), img);
                    }
                }
            }
        }
        let mut ours: Vec<String> = adm.states().iter().map(key).collect();
        ours.sort();
        let theirs: Vec<String> = oracle.keys().cloned().collect();
        assert_eq!(ours, theirs);

        // Every recorded transition agrees with an independent replay.
        for (i, s) in adm.states().iter().enumerate() {
            for color in [Black, White] {
                for (slot, &g) in adm.interior().iter().enumerate() {
                    let img = play(s, color, g, &w).unwrap();
                    match adm.transition(i as u32, color, slot) {
                        Some(j) => assert_eq!(adm.state(j), &img),
                        None => assert!(!adm.states().contains(&img)),
                    }
                }
            }
        }
    }

    #[test]
    fn enumerated_states_have_no_dead_clusters_and_moves_are_idempotent() {
        let w = window("<s|>", 4);
        let adm = enumerate_admissible(&w, 3, 100_000).unwrap();
        assert!(adm.len() > 100);
        for s in adm.states() {
            for c in analyze_clusters(s, &w).unwrap() {
                assert!(c.liberty_count() >= 1, "dead cluster in {s:?}");
            }
            for color in [Black, White] {
                for &g in adm.interior() {
                    let once = play(s, color, g, &w).unwrap();
                    let twice = play(&once, color, g, &w).unwrap();
                    assert_eq!(once, twice);
                }
            }
        }
    }

    #[test]
    fn no_eyes_ever_appear_on_the_line() {
        // An eye on the line would need both neighbors of an empty vertex in
        // one cluster, but removing a vertex disconnects the line.
        let w = window("<s|>", 3);
        let adm = enumerate_admissible(&w, 4, 1_000_000).unwrap();
        for s in adm.states() {
            for c in analyze_clusters(s, &w).unwrap() {
                assert!(c.eyes.is_empty());
            }
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let w = window("<s|>", 4);
        assert!(matches!(
            enumerate_admissible(&w, 3, 50),
            Err(GoError::EnumerationCap { cap: 50 })
        ));
    }

    #[test]
    fn move_matrix_matches_independent_replay() {
        let w = window("<s|>", 3);
        let adm = enumerate_admissible(&w, 2, 100_000).unwrap();
        let g = vertex(&w, "s");
        let m = move_matrix(&adm, Black, g).unwrap();
        assert_eq!(m.dim() as usize, adm.len());
        // Column of the vacuum points at the single-stone state.
        let single = state(&w, &[("s", Black)]);
        let target = adm.states().iter().position(|s| *s == single).unwrap() as u32;
        assert!(m.entries().contains(&(target, 0, num_complex::Complex64::ONE)));
        // Diagonal entry for every state with a stone at g; one entry per
        // unmasked column; masked columns are exactly the escaping images.
        let mut per_column = vec![0usize; adm.len()];
        for &(r, c, v) in m.entries() {
            assert_eq!(v, num_complex::Complex64::ONE);
            per_column[c as usize] += 1;
            let s = adm.state(c);
            if s.stone(g).is_some() {
                assert_eq!(r, c);
            }
        }
        for (c, s) in adm.states().iter().enumerate() {
            let img = play(s, Black, g, &w).unwrap();
            match adm.states().iter().position(|t| *t == img) {
                Some(row) => {
                    assert_eq!(per_column[c], 1);
                    assert!(m.entries().contains(&(row as u32, c as u32, num_complex::Complex64::ONE)));
                    assert!(!m.boundary_mask().contains(&(c as u32)));
                }
                None => {
                    assert_eq!(per_column[c], 0);
                    assert!(m.boundary_mask().contains(&(c as u32)));
                }
            }
        }
    }

    #[test]
    fn state_documents_round_trip() {
        let w = window("<a,b|[a,b]>", 3);
        let s = state(&w, &[("a", Black), ("b^-1", White), ("e", Black)]);
        let doc = write_state_document(&s, &w);
        let parsed = read_state_document(&doc).unwrap();
        assert_eq!(parsed.radius, 3);
        assert_eq!(bind_state(&parsed, &w).unwrap(), s);
        // Serialization is canonical: two identical states, one document.
        let again = write_state_document(&bind_state(&parsed, &w).unwrap(), &w);
        assert_eq!(doc, again);
    }

    #[test]
    fn state_documents_reject_garbage() {
        assert!(matches!(
            read_state_document("radius: 3\n"),
            Err(GoError::Document { .. })
        ));
        assert!(matches!(
            read_state_document("group: <s|>\nradius: x\n"),
            Err(GoError::Document { line: 2, .. })
        ));
        let w = window("<s|>", 3);
        let doc = read_state_document("group: <a|>\nradius: 3\ns\tblack\n").unwrap();
        assert!(matches!(bind_state(&doc, &w), Err(GoError::WindowMismatch { .. })));
    }
}
