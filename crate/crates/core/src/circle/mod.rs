//! The circle action generated by s(x) = x² and rotations: word evaluation,
//! relation-defect sweeps (faithfulness evidence), and the invariant-measure
//! experiments.
//!
//! Letters: `a` acts by s, `b` (= `b1`), `b2`, … act by rotations with
//! pairwise distinct angles derived from the base angle θ as θ_i = frac(i·θ).
//! The inverse of s on [0,1) is two-valued; `a^-1` uses the principal branch
//! x ↦ √x throughout, which makes evaluation total — inverse-law tests hold
//! on [0,1) because √(x²) = (√x)² = x there, but concatenation identities
//! involving `a^-1` are only as good as the branch convention.
//!
//! Every numeric claim here is statistical evidence at an explicit
//! tolerance, never a proof: a floating-point θ is rational, and the
//! faithfulness lemma needs more.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CircleError {
    #[error("word is not freely reduced at position {position}")]
    NotReduced { position: usize },
    #[error("cannot read letter `{token}`")]
    BadLetter { token: String },
    #[error("letter 0 is not a letter")]
    ZeroLetter,
}

/// A freely reduced word in a, b1, b2, …  Letters are signed integers:
/// ±1 ↔ a^±1, ±(k+1) ↔ b_k^±1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircleWord {
    letters: Vec<i32>,
}

impl CircleWord {
    pub fn new(letters: Vec<i32>) -> Result<CircleWord, CircleError> {
        if letters.contains(&0) {
            return Err(CircleError::ZeroLetter);
        }
        for (i, pair) in letters.windows(2).enumerate() {
            if pair[0] == -pair[1] {
                return Err(CircleError::NotReduced { position: i });
            }
        }
        Ok(CircleWord { letters })
    }

    /// Reads words like `a b^-1 b2^3`; letters apply right to left.
    pub fn parse(text: &str) -> Result<CircleWord, CircleError> {
        let mut letters = Vec::new();
        for token in text.split_whitespace() {
            if token == "e" {
                continue;
            }
            let (name, exp) = match token.split_once('^') {
                Some((n, e)) => {
                    let exp: i64 = e
                        .parse()
                        .map_err(|_| CircleError::BadLetter { token: token.to_string() })?;
                    (n, exp)
                }
                None => (token, 1),
            };
            let base: i32 = match name {
                "a" => 1,
                "b" => 2,
                _ => match name.strip_prefix('b').and_then(|k| k.parse::<i32>().ok()) {
                    Some(k) if k >= 1 => k + 1,
                    _ => return Err(CircleError::BadLetter { token: token.to_string() }),
                },
            };
            let letter = if exp >= 0 { base } else { -base };
            for _ in 0..exp.unsigned_abs() {
                letters.push(letter);
            }
        }
        CircleWord::new(letters)
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Highest generator index in use (a counts as 1, b_k as k+1); the
    /// word lives in a free group of at least this rank.
    pub fn rank(&self) -> usize {
        self.letters.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(1).max(2)
    }

    pub fn inverse(&self) -> CircleWord {
        CircleWord { letters: self.letters.iter().rev().map(|l| -l).collect() }
    }

    /// Concatenation with free reduction at the seam.
    pub fn concat(&self, other: &CircleWord) -> CircleWord {
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last() == Some(&-l) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        CircleWord { letters }
    }
}

// Rendering uses a run-length form: `a a b^-1` → `a^2 b^-1`.
impl fmt::Display for CircleWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let name = |l: i32| -> String {
            match l.abs() {
                1 => "a".to_string(),
                2 => "b".to_string(),
                k => format!("b{}", k - 1),
            }
        };
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let exp = if l > 0 { run as i64 } else { -(run as i64) };
            if exp == 1 {
                write!(f, "{}", name(l))?;
            } else {
                write!(f, "{}^{}", name(l), exp)?;
            }
            i += run;
        }
        Ok(())
    }
}

/// The rotation angles θ_1, …, θ_(rank−1): θ_i = frac(i·θ), pairwise
/// distinct for irrational θ.
pub fn rotation_angles(theta: f64, rank: usize) -> Vec<f64> {
    (1..rank).map(|i| (i as f64 * theta).rem_euclid(1.0)).collect()
}

fn frac(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    if y == 1.0 {
        0.0
    } else {
        y
    }
}

/// Applies the word to x, rightmost letter first; all arithmetic mod 1.
pub fn eval_word(word: &CircleWord, theta: f64, x: f64) -> f64 {
    let angles = rotation_angles(theta, word.rank());
    let mut y = frac(x);
    for &l in word.letters.iter().rev() {
        y = match l {
            1 => frac(y * y),
            -1 => y.sqrt(),
            k if k > 1 => frac(y + angles[k as usize - 2]),
            k => frac(y - angles[(-k) as usize - 2]),
        };
    }
    y
}

/// Distance on the circle ℝ/ℤ.
pub fn circle_distance(u: f64, v: f64) -> f64 {
    let d = (u - v).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Base-2 van der Corput point, the deterministic low-discrepancy sample.
fn van_der_corput(mut n: u64) -> f64 {
    let mut x = 0.0;
    let mut denom = 1.0;
    while n > 0 {
        denom *= 2.0;
        x += (n & 1) as f64 / denom;
        n >>= 1;
    }
    x
}

/// Sweep statistics of x ↦ d(w(x), x) over a deterministic sample.
#[derive(Debug, Clone)]
pub struct RelationDefect {
    /// Supremum of the circle distance between w(x) and x over the sample.
    pub sup: f64,
    /// A sample point attaining the supremum.
    pub argmax: f64,
    /// Sample points with defect below 1e-9 (near-fixed points).
    pub near_zero: usize,
    /// Sign changes of the displacement on a uniform grid — a fixed-point
    /// count estimate ("at most finitely many" is the claim under test).
    pub sign_changes: usize,
    pub samples: usize,
}

/// Evaluates the faithfulness evidence for one word: how far w is from the
/// identity map.  The empty word reports defect 0.
pub fn relation_defect(word: &CircleWord, theta: f64, samples: usize) -> RelationDefect {
    let mut sup = 0.0;
    let mut argmax = 0.0;
    let mut near_zero = 0;
    for n in 0..samples as u64 {
        let x = van_der_corput(n);
        let d = circle_distance(eval_word(word, theta, x), x);
        if d > sup {
            sup = d;
            argmax = x;
        }
        if d < 1e-9 {
            near_zero += 1;
        }
    }
    // Displacement sign changes on a uniform grid, for the fixed-point
    // estimate; displacement is lifted to (−1/2, 1/2].
    let grid = samples.max(2);
    let displaced = |x: f64| -> f64 {
        let d = (eval_word(word, theta, x) - x).rem_euclid(1.0);
        if d > 0.5 {
            d - 1.0
        } else {
            d
        }
    };
    let mut sign_changes = 0;
    let mut prev = displaced(0.0);
    for k in 1..=grid {
        let cur = displaced(k as f64 / grid as f64);
        if prev.signum() != cur.signum() && prev != 0.0 && cur != 0.0 {
            sign_changes += 1;
        }
        prev = cur;
    }
    RelationDefect { sup, argmax, near_zero, sign_changes, samples }
}

/// One interval row of the measure experiment.
#[derive(Debug, Clone)]
pub struct PushforwardRow {
    pub lo: f64,
    pub hi: f64,
    /// Lebesgue mass hi − lo.
    pub mass: f64,
    /// Mass of the s-preimage [√lo, √hi]: the pushforward s_*Leb.
    pub pushforward_mass: f64,
    /// Mass of the rotated interval (A − θ), computed mod 1.
    pub rotated_mass: f64,
}

/// The measure experiment: analytic masses, the pushforward table,
/// invariance defects, and the rotation-orbit discrepancy.
#[derive(Debug, Clone)]
pub struct MeasureReport {
    pub theta: f64,
    /// Leb([1/4, 1/2]) = 1/4.
    pub mass_quarter_half: f64,
    /// Leb([1/16, 1/4]) = 3/16 — the s-image of the interval above.
    pub mass_sixteenth_quarter: f64,
    /// Ratio of the two masses (4/3).
    pub ratio: f64,
    /// Set when the ratio disagrees with the factor 2 quoted alongside the
    /// claim this experiment audits.
    pub factor_two_flag: bool,
    pub rows: Vec<PushforwardRow>,
    /// max |m(A) − m(A − θ)| over the rows — rotation invariance of Leb.
    pub rotation_defect: f64,
    /// max |m(A) − m(s⁻¹A)| over the rows — how far Leb is from s-invariant.
    pub scaling_defect: f64,
    /// (N, star discrepancy of {frac(kθ) : 0 ≤ k < N}).
    pub discrepancy: Vec<(usize, f64)>,
}

/// Star discrepancy D*_N of a point set in [0,1).
fn star_discrepancy(points: &mut [f64]) -> f64 {
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = points.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in points.iter().enumerate() {
        d = d.max((i as f64 + 1.0) / n - x);
        d = d.max(x - i as f64 / n);
    }
    d
}

pub fn measure_experiments(theta: f64, grid: usize) -> MeasureReport {
    let mass_quarter_half: f64 = 0.5 - 0.25;
    let mass_sixteenth_quarter: f64 = 0.25 - 0.0625;
    let ratio = mass_quarter_half / mass_sixteenth_quarter;
    let factor_two_flag = (ratio - 2.0).abs() > 1e-9;

    let grid = grid.max(2);
    let mut rows = Vec::with_capacity(grid);
    let mut rotation_defect: f64 = 0.0;
    let mut scaling_defect: f64 = 0.0;
    for k in 0..grid {
        let lo = k as f64 / grid as f64;
        let hi = (k + 1) as f64 / grid as f64;
        let mass = hi - lo;
        let pushforward_mass = hi.sqrt() - lo.sqrt();
        // A − θ mod 1: either one interval or two arcs; total length is
        // measured honestly rather than assumed.
        let a = frac(lo - theta);
        let b = frac(hi - theta);
        let rotated_mass = if a <= b { b - a } else { (1.0 - a) + b };
        rows.push(PushforwardRow { lo, hi, mass, pushforward_mass, rotated_mass });
        rotation_defect = rotation_defect.max((mass - rotated_mass).abs());
        scaling_defect = scaling_defect.max((mass - pushforward_mass).abs());
    }

    let mut discrepancy = Vec::new();
    for &n in &[100usize, 1_000, 10_000] {
        let mut pts: Vec<f64> = (0..n).map(|k| frac(k as f64 * theta)).collect();
        discrepancy.push((n, star_discrepancy(&mut pts)));
    }

    MeasureReport {
        theta,
        mass_quarter_half,
        mass_sixteenth_quarter,
        ratio,
        factor_two_flag,
        rows,
        rotation_defect,
        scaling_defect,
        discrepancy,
    }
}

impl MeasureReport {
    /// CSV artifact: interval bounds, masses and defects per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lo,hi,mass,pushforward_mass,rotated_mass,scaling_defect,rotation_defect\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.lo,
                r.hi,
                r.mass,
                r.pushforward_mass,
                r.rotated_mass,
                (r.mass - r.pushforward_mass).abs(),
                (r.mass - r.rotated_mass).abs()
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("theta = {}\n", self.theta));
        out.push_str(&format!("Leb([1/4,1/2]) = {}\n", self.mass_quarter_half));
        out.push_str(&format!("Leb([1/16,1/4]) = {}\n", self.mass_sixteenth_quarter));
        out.push_str(&format!(
            "ratio = {} (factor-2 discrepancy flag: {})\n",
            self.ratio, self.factor_two_flag
        ));
        out.push_str(&format!("rotation-invariance defect = {:e}\n", self.rotation_defect));
        out.push_str(&format!("scaling-invariance defect = {:e}\n", self.scaling_defect));
        for (n, d) in &self.discrepancy {
            out.push_str(&format!("D*_{n} = {d}\n"));
        }
        out
    }
}

/// Uniformly random freely reduced word of exactly `len` letters over the
/// rank-2 alphabet, for the faithfulness sweeps.
pub fn random_reduced_word(rng: &mut impl rand::Rng, len: usize) -> CircleWord {
    let mut letters: Vec<i32> = Vec::with_capacity(len);
    while letters.len() < len {
        let choices: Vec<i32> = [1i32, -1, 2, -2]
            .into_iter()
            .filter(|&l| letters.last() != Some(&-l))
            .collect();
        letters.push(choices[rng.random_range(0..choices.len())]);
    }
    CircleWord::new(letters).expect("constructed reduced")
}

/// Letters that occur in the word, for reporting.
pub fn letters_used(word: &CircleWord) -> BTreeSet<i32> {
    word.letters().iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    #[test]
    fn eval_matches_the_worked_examples() {
        let a = CircleWord::parse("a").unwrap();
        assert_eq!(eval_word(&a, 0.3, 0.5), 0.25);
        let b = CircleWord::parse("b").unwrap();
        let got = eval_word(&b, 1.0 / 3.0, 5.0 / 6.0);
        assert!((got - 1.0 / 6.0).abs() < 1e-12, "got {got}");
        let e = CircleWord::parse("e").unwrap();
        assert_eq!(eval_word(&e, 0.3, 0.77), 0.77);
    }

    #[test]
    fn words_must_be_reduced() {
        assert!(matches!(
            CircleWord::parse("b b^-1"),
            Err(CircleError::NotReduced { position: 0 })
        ));
        assert!(CircleWord::parse("b a b^-1").is_ok());
        assert!(matches!(
            CircleWord::new(vec![1, 0]),
            Err(CircleError::ZeroLetter)
        ));
        assert!(matches!(
            CircleWord::parse("c"),
            Err(CircleError::BadLetter { .. })
        ));
    }

    #[test]
    fn parse_powers_and_render_round_trip() {
        let w = CircleWord::parse("a^2 b^-3 b2").unwrap();
        assert_eq!(w.letters(), &[1, 1, -2, -2, -2, 3]);
        assert_eq!(w.to_string(), "a^2 b^-3 b2");
        assert_eq!(CircleWord::parse(&w.to_string()).unwrap(), w);
        assert_eq!(w.rank(), 3);
    }

    #[test]
    fn concatenation_matches_composition() {
        let theta = golden();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let w1 = random_reduced_word(&mut rng, 4);
            let w2 = random_reduced_word(&mut rng, 4);
            let w = w1.concat(&w2);
            for n in 0..20 {
                let x = van_der_corput(n);
                let composed = eval_word(&w1, theta, eval_word(&w2, theta, x));
                let direct = eval_word(&w, theta, x);
                assert!(
                    circle_distance(composed, direct) < 1e-9,
                    "{w1} ∘ {w2} at {x}: {composed} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn inverse_words_undo_on_the_principal_branch() {
        let theta = golden();
        let w = CircleWord::parse("a b a b^-1").unwrap();
        let winv = w.inverse();
        assert_eq!(winv.to_string(), "b a^-1 b^-1 a^-1");
        for n in 0..100 {
            let x = van_der_corput(n);
            let back = eval_word(&winv, theta, eval_word(&w, theta, x));
            assert!(circle_distance(back, x) < 1e-9, "x = {x}, back = {back}");
        }
    }

    #[test]
    fn the_commutator_is_far_from_the_identity() {
        let w = CircleWord::parse("a b a^-1 b^-1").unwrap();
        let report = relation_defect(&w, golden(), 10_000);
        assert!(report.sup > 1e-6, "sup = {}", report.sup);
        assert!(report.near_zero < report.samples / 100);
    }

    #[test]
    fn random_reduced_words_have_visible_defect() {
        let theta = golden();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let len = rng.random_range(1..=8);
            let w = random_reduced_word(&mut rng, len);
            let report = relation_defect(&w, theta, 2_000);
            assert!(report.sup > 1e-6, "word {w} has sup {}", report.sup);
        }
    }

    #[test]
    fn empty_word_has_zero_defect() {
        let e = CircleWord::parse("e").unwrap();
        let report = relation_defect(&e, golden(), 1_000);
        assert_eq!(report.sup, 0.0);
        assert_eq!(report.near_zero, report.samples);
        assert_eq!(report.sign_changes, 0);
    }

    #[test]
    fn displacement_sign_changes_witness_fixed_points() {
        // w = a b: (x + θ)² has fixed points where (x+θ)² = x; the
        // displacement changes sign across each transversal root.
        let w = CircleWord::parse("a b").unwrap();
        let report = relation_defect(&w, golden(), 4_000);
        assert!(report.sign_changes >= 1);
        assert!(report.sign_changes <= 8, "finitely many: {}", report.sign_changes);
    }

    #[test]
    fn measure_report_reproduces_the_analytic_masses() {
        let r = measure_experiments(golden(), 16);
        assert!((r.mass_quarter_half - 0.25).abs() < 1e-12);
        assert!((r.mass_sixteenth_quarter - 0.1875).abs() < 1e-12);
        assert!((r.ratio - 4.0 / 3.0).abs() < 1e-12);
        assert!(r.factor_two_flag, "the quoted factor 2 must be flagged");
        assert!(r.rotation_defect < 1e-12, "Lebesgue is rotation invariant");
        assert!(r.scaling_defect > 0.1, "Lebesgue is far from s-invariant");
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 17);
        assert!(r.summary().contains("ratio"));
    }

    #[test]
    fn rotation_orbit_discrepancy_decreases() {
        let r = measure_experiments(golden(), 8);
        let d: Vec<f64> = r.discrepancy.iter().map(|&(_, d)| d).collect();
        assert_eq!(r.discrepancy.len(), 3);
        assert!(d[0] > d[1] && d[1] > d[2], "discrepancies {d:?}");
        assert!(d[2] < 0.01);
    }
}
