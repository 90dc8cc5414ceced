//! Cayley-ball windows: the finite truncation every other module works in.
//!
//! A `Window` is the ball of a given radius around the identity, enumerated in
//! canonical (length, shortlex) order, together with the in-window adjacency
//! and the interior flags (vertices all of whose Cayley neighbors are inside
//! the window).

use std::collections::HashMap;
use std::sync::Arc;

use super::{word_cmp, Element, GroupError, Letter, MarkedGroup};

pub struct Window {
    group: Arc<MarkedGroup>,
    radius: u32,
    elements: Vec<Element>,
    index: HashMap<Element, u32>,
    /// per vertex, per letter slot (letter_rank order): in-window image
    letter_images: Vec<Vec<Option<u32>>>,
    /// distinct in-window neighbors, sorted ascending
    neighbors: Vec<Vec<u32>>,
    interior: Vec<bool>,
    /// offsets of each sphere: elements[sphere_start[r] .. sphere_start[r+1]]
    sphere_start: Vec<u32>,
}

/// Enumerate the ball of `radius` around the identity. Fails if more than
/// `cap` elements would be produced.
pub fn ball(
    group: &Arc<MarkedGroup>,
    radius: u32,
    cap: usize,
) -> Result<Window, GroupError> {
    let letters = group.letters();
    let mut elements: Vec<Element> = vec![group.identity()];
    let mut index: HashMap<Element, u32> = HashMap::new();
    index.insert(group.identity(), 0);
    let mut sphere_start: Vec<u32> = vec![0, 1];
    let mut frontier: Vec<u32> = vec![0];

    for layer in 0..radius {
        let mut next: Vec<Element> = Vec::new();
        for &vi in &frontier {
            let v = elements[vi as usize].clone();
            for &l in &letters {
                let w = group.mul_letter(&v, l);
                if !index.contains_key(&w) {
                    debug_assert_eq!(w.len() as u32, layer + 1, "BFS layer mismatch");
                    index.insert(w.clone(), u32::MAX); // placeholder, fixed below
                    next.push(w);
                }
            }
        }
        next.sort_by(|a, b| word_cmp(a.word(), b.word()));
        frontier = Vec::with_capacity(next.len());
        for w in next {
            let id = elements.len() as u32;
            if elements.len() >= cap {
                return Err(GroupError::BallCap { cap, radius });
            }
            *index.get_mut(&w).unwrap() = id;
            elements.push(w);
            frontier.push(id);
        }
        sphere_start.push(elements.len() as u32);
        if frontier.is_empty() {
            // finite group exhausted early; pad the offsets
            while sphere_start.len() <= radius as usize + 1 {
                sphere_start.push(elements.len() as u32);
            }
            break;
        }
    }

    let mut letter_images = Vec::with_capacity(elements.len());
    let mut neighbors = Vec::with_capacity(elements.len());
    let mut interior = Vec::with_capacity(elements.len());
    for (vi, v) in elements.iter().enumerate() {
        let mut images = Vec::with_capacity(letters.len());
        let mut nbrs: Vec<u32> = Vec::new();
        let mut inside = true;
        for &l in &letters {
            let w = group.mul_letter(v, l);
            match index.get(&w) {
                Some(&id) => {
                    images.push(Some(id));
                    if id as usize != vi {
                        nbrs.push(id);
                    }
                }
                None => {
                    images.push(None);
                    inside = false;
                }
            }
        }
        nbrs.sort_unstable();
        nbrs.dedup();
        letter_images.push(images);
        neighbors.push(nbrs);
        interior.push(inside);
    }

    Ok(Window {
        group: Arc::clone(group),
        radius,
        elements,
        index,
        letter_images,
        neighbors,
        interior,
        sphere_start,
    })
}

impl Window {
    pub fn group(&self) -> &Arc<MarkedGroup> {
        &self.group
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, id: u32) -> &Element {
        &self.elements[id as usize]
    }

    pub fn index_of(&self, e: &Element) -> Option<u32> {
        self.index.get(e).copied()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.index.contains_key(e)
    }

    /// In-window image of vertex `v` under right multiplication by `l`.
    pub fn letter_image(&self, v: u32, l: Letter) -> Option<u32> {
        let slot = super::letter_rank(l) as usize;
        self.letter_images[v as usize][slot]
    }

    /// Distinct in-window Cayley neighbors, ascending.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[v as usize]
    }

    /// True if every Cayley neighbor of `v` lies inside the window.
    pub fn is_interior(&self, v: u32) -> bool {
        self.interior[v as usize]
    }

    pub fn interior_indices(&self) -> Vec<u32> {
        (0..self.len() as u32).filter(|&v| self.is_interior(v)).collect()
    }

    /// Number of elements with word length exactly `r`.
    pub fn sphere_size(&self, r: u32) -> usize {
        let a = self.sphere_start[r as usize] as usize;
        let b = self.sphere_start[r as usize + 1] as usize;
        b - a
    }

    /// Number of elements with word length at most `r`.
    pub fn ball_size(&self, r: u32) -> usize {
        self.sphere_start[r as usize + 1] as usize
    }

    /// Ball sizes for every radius up to the window radius.
    pub fn growth(&self) -> Vec<usize> {
        (0..=self.radius).map(|r| self.ball_size(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(text: &str, r: u32) -> Window {
        let g = MarkedGroup::parse(text).unwrap();
        ball(&g, r, 10_000_000).unwrap()
    }

    /// Independent oracle: plain breadth-first distance labelling driven only
    /// by `multiply`, no normal-form length shortcuts.
    fn bfs_distances(
        group: &Arc<MarkedGroup>,
        radius: u32,
    ) -> HashMap<Element, u32> {
        let mut dist: HashMap<Element, u32> = HashMap::new();
        dist.insert(group.identity(), 0);
        let mut frontier = vec![group.identity()];
        for d in 0..radius {
            let mut next = Vec::new();
            for v in &frontier {
                for &l in &group.letters() {
                    let w = group.mul_letter(v, l);
                    if !dist.contains_key(&w) {
                        dist.insert(w.clone(), d + 1);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    #[test]
    fn z2_ball_growth_matches_closed_form() {
        let w = window("<s1,s2 | [s1,s2]>", 10);
        for r in 0..=10u32 {
            let expect = 2 * (r as usize) * (r as usize) + 2 * (r as usize) + 1;
            assert_eq!(w.ball_size(r), expect, "radius {r}");
        }
    }

    #[test]
    fn f2_ball_growth_matches_closed_form() {
        let w = window("<a,b|>", 8);
        for r in 0..=8u32 {
            let expect = 2 * 3usize.pow(r) - 1;
            assert_eq!(w.ball_size(r), expect, "radius {r}");
        }
    }

    #[test]
    fn dihedral_ball_growth() {
        let w = window("<a,b | a^2, b^2>", 6);
        for r in 0..=6u32 {
            assert_eq!(w.ball_size(r), 2 * r as usize + 1, "radius {r}");
        }
    }

    #[test]
    fn word_length_equals_bfs_distance() {
        for text in ["<a,b|>", "<s1,s2 | [s1,s2]>", "<a,b | a^2, b^2>", "<s1,s2,s3 | [s1,s2]>"] {
            let g = MarkedGroup::parse(text).unwrap();
            let dist = bfs_distances(&g, 5);
            for (e, d) in &dist {
                assert_eq!(e.len() as u32, *d, "{} in {}", g.render(e), text);
            }
        }
    }

    #[test]
    fn balls_nest_as_ordered_prefixes() {
        for text in ["<a,b|>", "<s1,s2 | [s1,s2]>"] {
            let g = MarkedGroup::parse(text).unwrap();
            for r in 0..5u32 {
                let small = ball(&g, r, 1_000_000).unwrap();
                let large = ball(&g, r + 1, 1_000_000).unwrap();
                assert_eq!(
                    small.elements(),
                    &large.elements()[..small.len()],
                    "{text} radius {r}"
                );
            }
        }
    }

    #[test]
    fn interior_is_smaller_ball() {
        let w = window("<s1,s2 | [s1,s2]>", 4);
        for v in 0..w.len() as u32 {
            let expect = w.element(v).len() <= 3;
            assert_eq!(w.is_interior(v), expect);
        }
    }

    #[test]
    fn ball_cap_is_enforced() {
        let g = MarkedGroup::parse("<a,b|>").unwrap();
        match ball(&g, 6, 100) {
            Err(GroupError::BallCap { cap: 100, .. }) => {}
            Err(other) => panic!("expected cap error, got {other:?}"),
            Ok(_) => panic!("expected cap error, got a window"),
        }
    }

    #[test]
    fn canonical_order_is_length_then_shortlex() {
        let w = window("<a,b|>", 3);
        for i in 1..w.len() {
            assert!(
                word_cmp(w.element(i as u32 - 1).word(), w.element(i as u32).word())
                    == std::cmp::Ordering::Less
            );
        }
        // identity is index 0, first generator is index 1
        assert!(w.element(0).is_identity());
        assert_eq!(w.group().render(w.element(1)), "a");
        assert_eq!(w.group().render(w.element(2)), "a^-1");
    }
}
