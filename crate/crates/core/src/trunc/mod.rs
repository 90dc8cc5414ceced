//! Right-translation operators U_s and truncated word-length operators X_s
//! on ℓ²(ball), and the audit of the identity X_s + X*_{s⁻¹} − I = U_s.
//!
//! The identity is treated as a claim under measurement, not an axiom: the
//! defect D = X_s + X*_{s⁻¹} − I − U_s is computed in exact integer
//! arithmetic over interior columns and reported entry by entry.  On ℤ the
//! interior support is exactly the identity vertex (value −1): the identity
//! grows in both s-directions, so the X*-side loses its diagonal while the
//! X-side still matches U.  The same mechanism makes every two-sided-growth
//! vertex a defect point, which is what the reports show on ℤ² and F₂.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::group::{GroupError, Letter, Window};
use crate::oplab::{OpError, SparseOperator};

#[derive(Debug, Error)]
pub enum TruncError {
    #[error("`{word}` is not a generator or inverse generator")]
    NotAGenerator { word: String },
    #[error("window radius {got} is too small (need ≥ {need})")]
    RadiusTooSmall { need: u32, got: u32 },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Operator(#[from] OpError),
}

/// The translation pair for one generator letter.
pub struct GeneratorOps {
    /// U_s: e_g ↦ e_(gs), boundary-masked where gs exits the window.
    pub u: SparseOperator,
    /// X_s: e_g ↦ e_(gs) if ℓ(gs) = ℓ(g)+1, else e_g; masked where the
    /// increasing image exits the window.
    pub x: SparseOperator,
}

fn vertex_norm(w: &Window, v: u32) -> u32 {
    for r in 0..=w.radius() {
        if (v as usize) < w.ball_size(r) {
            return r;
        }
    }
    w.radius()
}

/// Resolves a one-letter word ("s", "a^-1", …) to its letter.
fn resolve_letter(w: &Window, s: &str) -> Result<Letter, TruncError> {
    let e = w.group().parse_word(s)?;
    match e.word() {
        [l] => Ok(*l),
        _ => Err(TruncError::NotAGenerator { word: s.to_string() }),
    }
}

// The tag names the basis (the ball), not the operator: U_s, X_s and the
// defect for any generator all live on the same window and must compose.
fn tag(w: &Window) -> String {
    format!("ball:{}:r{}", w.group().presentation().text(), w.radius())
}

/// Builds U_s and X_s on the window basis.
pub fn generator_operators(w: &Window, s: &str) -> Result<GeneratorOps, TruncError> {
    if w.radius() < 1 {
        return Err(TruncError::RadiusTooSmall { need: 1, got: w.radius() });
    }
    let l = resolve_letter(w, s)?;
    let n = w.len() as u32;
    let u_images: Vec<Option<u32>> = (0..n).map(|g| w.letter_image(g, l)).collect();
    // A missing image means ℓ(gs) = R+1 = ℓ(g)+1 (the ball is full), so the
    // increasing branch applies but is unrepresentable: masked.
    let x_images: Vec<Option<u32>> = (0..n)
        .map(|g| match w.letter_image(g, l) {
            Some(h) if vertex_norm(w, h) == vertex_norm(w, g) + 1 => Some(h),
            Some(_) => Some(g),
            None => None,
        })
        .collect();
    Ok(GeneratorOps {
        u: SparseOperator::basis_map(&u_images, tag(w))?,
        x: SparseOperator::basis_map(&x_images, tag(w))?,
    })
}

/// One nonzero of the defect operator, with the basis words spelled out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectEntry {
    pub row: u32,
    pub col: u32,
    pub row_word: String,
    pub col_word: String,
    pub value: i64,
}

/// The audited defect D = X_s + X*_(s⁻¹) − I − U_s over interior columns.
#[derive(Debug)]
pub struct DefectReport {
    /// Nonzero entries in (col, row) order, exact integers.
    pub entries: Vec<DefectEntry>,
    /// Interior column count (‖g‖ ≤ R−1).
    pub interior_columns: usize,
    /// True iff the support is exactly {(identity, identity)} with value −1.
    pub identity_only: bool,
    /// The defect as an operator; non-interior columns are masked.
    pub operator: SparseOperator,
}

impl DefectReport {
    /// Lines of the structured text artifact.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "defect entries: {} (interior columns: {})\n",
            self.entries.len(),
            self.interior_columns
        ));
        for e in &self.entries {
            out.push_str(&format!("({}, {}) = {}\n", e.row_word, e.col_word, e.value));
        }
        out.push_str(&format!("identity-only: {}\n", self.identity_only));
        out
    }
}

/// Measures the defect of the translation identity for generator `s`.
/// All arithmetic is exact (the four operators are 0/±1 integer matrices).
pub fn identity_defect(w: &Window, s: &str) -> Result<DefectReport, TruncError> {
    if w.radius() < 2 {
        return Err(TruncError::RadiusTooSmall { need: 2, got: w.radius() });
    }
    let l = resolve_letter(w, s)?;
    let linv = -l;
    let n = w.len() as u32;
    let group = w.group().clone();

    let norm = |v: u32| vertex_norm(w, v);
    // The two basis maps: increasing-image-or-diagonal.
    let x_map = |letter: Letter, g: u32| -> Option<u32> {
        match w.letter_image(g, letter) {
            Some(h) if norm(h) == norm(g) + 1 => Some(h),
            Some(_) => Some(g),
            None => None,
        }
    };

    let interior: Vec<u32> = (0..n).filter(|&g| norm(g) + 1 <= w.radius()).collect();
    let mut coeffs: BTreeMap<(u32, u32), i64> = BTreeMap::new();
    for &g in &interior {
        // X_s e_g (always defined for interior g).
        let xg = x_map(l, g).expect("interior image stays inside");
        *coeffs.entry((xg, g)).or_insert(0) += 1;
        // −I, −U_s.
        *coeffs.entry((g, g)).or_insert(0) -= 1;
        let ug = w.letter_image(g, l).expect("interior image stays inside");
        *coeffs.entry((ug, g)).or_insert(0) -= 1;
    }
    // X*_(s⁻¹): entry (g, h) of X_(s⁻¹) contributes to column h of the
    // adjoint... transposed: adjoint entry (h, g).  Walk every column of
    // X_(s⁻¹) and transpose into the interior columns.
    for h in 0..n {
        if let Some(row) = x_map(linv, h) {
            // X_(s⁻¹)[row, h] = 1 → adjoint[h, row] = 1: contributes to
            // column `row` when that column is interior.
            if norm(row) + 1 <= w.radius() {
                *coeffs.entry((h, row)).or_insert(0) += 1;
            }
        }
    }

    let mut entries = Vec::new();
    for (&(row, col), &v) in &coeffs {
        if v != 0 {
            entries.push(DefectEntry {
                row,
                col,
                row_word: group.render(w.element(row)),
                col_word: group.render(w.element(col)),
                value: v,
            });
        }
    }
    entries.sort_by_key(|e| (e.col, e.row));
    let identity_vertex = w.index_of(&group.identity()).expect("identity in ball");
    let identity_only = entries.len() == 1
        && entries[0].row == identity_vertex
        && entries[0].col == identity_vertex
        && entries[0].value == -1;

    let mask: Vec<u32> = (0..n).filter(|&g| norm(g) + 1 > w.radius()).collect();
    let triplets = entries.iter().map(|e| {
        (e.row, e.col, num_complex::Complex64::new(e.value as f64, 0.0))
    });
    let operator =
        SparseOperator::from_triplets(n, triplets, mask, tag(w))?;
    Ok(DefectReport { entries, interior_columns: interior.len(), identity_only, operator })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ball, MarkedGroup};

    fn win(p: &str, r: u32) -> Window {
        let g = MarkedGroup::parse(p).unwrap();
        ball(&g, r, 1_000_000).unwrap()
    }

    fn idx(w: &Window, word: &str) -> u32 {
        w.index_of(&w.group().parse_word(word).unwrap()).unwrap()
    }

    #[test]
    fn x_moves_outward_and_fixes_inward_vertices() {
        let w = win("<s|>", 5);
        let ops = generator_operators(&w, "s").unwrap();
        let col = |g: u32| -> Vec<(u32, u32)> {
            ops.x.entries().iter().filter(|&&(_, c, _)| c == g).map(|&(r, c, _)| (r, c)).collect()
        };
        // X_s e_0 = e_s (outward), X_s e_(s⁻¹) = e_(s⁻¹) (inward step).
        assert_eq!(col(idx(&w, "e")), vec![(idx(&w, "s"), idx(&w, "e"))]);
        assert_eq!(col(idx(&w, "s^-1")), vec![(idx(&w, "s^-1"), idx(&w, "s^-1"))]);
        // Exactly one nonzero per unmasked column.
        for g in 0..w.len() as u32 {
            let k = col(g).len();
            if ops.x.boundary_mask().contains(&g) {
                assert_eq!(k, 0);
            } else {
                assert_eq!(k, 1, "column {g}");
            }
        }
    }

    #[test]
    fn u_is_injective_on_unmasked_columns() {
        for p in ["<s|>", "<a,b|[a,b]>", "<a,b|>"] {
            let w = win(p, 4);
            let ops = generator_operators(&w, "a").or_else(|_| generator_operators(&w, "s")).unwrap();
            let mut images = std::collections::BTreeSet::new();
            for &(r, c, v) in ops.u.entries() {
                assert!(!ops.u.boundary_mask().contains(&c));
                assert_eq!(v, num_complex::Complex64::ONE);
                assert!(images.insert(r), "duplicate image row {r}");
            }
        }
    }

    #[test]
    fn adjoint_of_x_kills_the_identity_on_the_line() {
        let w = win("<s|>", 5);
        let ops = generator_operators(&w, "s^-1").unwrap();
        let adj = ops.x.adjoint();
        let e = idx(&w, "e");
        // X*_(s⁻¹) e_e = 0: nothing maps to the identity under X_(s⁻¹).
        assert!(adj.entries().iter().all(|&(_, c, _)| c != e));
    }

    #[test]
    fn defect_on_the_line_is_minus_one_at_the_identity() {
        let w = win("<s|>", 5);
        let report = identity_defect(&w, "s").unwrap();
        assert!(report.identity_only, "entries: {:?}", report.entries);
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].value, -1);
        assert_eq!(report.entries[0].row_word, "e");
        assert_eq!(report.interior_columns, w.ball_size(4));
        let text = report.render();
        assert!(text.contains("(e, e) = -1"));
        assert!(text.contains("identity-only: true"));
    }

    /// The derived support law: an interior vertex is a defect point iff
    /// both its s-steps increase the word length, and the defect there is
    /// the −1 diagonal.
    fn assert_two_sided_growth_support(p: &str, s: &str, radius: u32) {
        let w = win(p, radius);
        let report = identity_defect(&w, s).unwrap();
        let l = w.group().parse_word(s).unwrap().word()[0];
        let expected: Vec<u32> = (0..w.len() as u32)
            .filter(|&g| vertex_norm(&w, g) + 1 <= radius)
            .filter(|&g| {
                let up = |letter| {
                    w.letter_image(g, letter)
                        .is_none_or(|h| vertex_norm(&w, h) == vertex_norm(&w, g) + 1)
                };
                up(l) && up(-l)
            })
            .collect();
        let support: Vec<u32> = report.entries.iter().map(|e| e.col).collect();
        assert_eq!(support, expected, "{p} defect support");
        for e in &report.entries {
            assert_eq!(e.row, e.col, "{p} defect is diagonal");
            assert_eq!(e.value, -1, "{p} defect value");
        }
    }

    #[test]
    fn defect_support_is_the_two_sided_growth_set() {
        assert_two_sided_growth_support("<s|>", "s", 5);
        assert_two_sided_growth_support("<a,b|[a,b]>", "a", 5);
        assert_two_sided_growth_support("<a,b|>", "a", 4);
    }

    #[test]
    fn plane_and_tree_defects_exceed_the_identity() {
        // On ℤ² the whole b-axis grows two-sidedly in a; on F₂ every vertex
        // not ending in a letter of ⟨a⟩ does.  The identity-only claim holds
        // on ℤ alone.
        let w2 = win("<a,b|[a,b]>", 4);
        let r2 = identity_defect(&w2, "a").unwrap();
        assert!(!r2.identity_only);
        assert!(r2.entries.len() > 1);
        let wf = win("<a,b|>", 4);
        let rf = identity_defect(&wf, "a").unwrap();
        assert!(!rf.identity_only);
        assert!(rf.entries.len() > 1);
    }

    #[test]
    fn small_windows_are_rejected() {
        let w = win("<s|>", 1);
        assert!(matches!(
            identity_defect(&w, "s"),
            Err(TruncError::RadiusTooSmall { need: 2, got: 1 })
        ));
        let w0 = win("<s|>", 0);
        assert!(matches!(
            generator_operators(&w0, "s"),
            Err(TruncError::RadiusTooSmall { need: 1, got: 0 })
        ));
        assert!(matches!(
            generator_operators(&w, "s^2"),
            Err(TruncError::NotAGenerator { .. })
        ));
    }
}
