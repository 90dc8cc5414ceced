//! Conjugacy-class growth evidence for the infinite-conjugacy-class property.
//!
//! For every nontrivial element of the ball we track the number of distinct
//! conjugates `h g h^-1` as the conjugator radius grows. A class that stops
//! growing is closed under conjugation by all generators, hence provably
//! finite; classes that keep growing are evidence (never proof) of ICC.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use super::{ball, Element, GroupError, MarkedGroup};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IccVerdict {
    /// Every tracked class grew at every radius step.
    IccConsistent,
    /// Some nontrivial class is provably finite.
    NotIcc,
    /// Nothing to observe (radius too small).
    Inconclusive,
}

impl fmt::Display for IccVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IccVerdict::IccConsistent => "ICC-consistent",
            IccVerdict::NotIcc => "not ICC",
            IccVerdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct ClassGrowth {
    pub representative: Element,
    /// counts[k] = number of distinct conjugates h g h^-1 with word length
    /// of h at most k, for k = 0..=radius.
    pub counts: Vec<usize>,
    /// First k at which the conjugate set is closed under all generator
    /// conjugations; if set, the class has exactly `counts[k]` elements.
    pub stabilized_at: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct IccReport {
    pub presentation: String,
    pub radius: u32,
    pub classes: Vec<ClassGrowth>,
    pub verdict: IccVerdict,
}

impl fmt::Display for IccReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "icc evidence for {}", self.presentation)?;
        writeln!(f, "conjugator radius up to {}", self.radius)?;
        for c in &self.classes {
            write!(f, "  class counts")?;
            for n in &c.counts {
                write!(f, " {n}")?;
            }
            match c.stabilized_at {
                Some(k) => writeln!(f, "  (finite, closed at radius {k})")?,
                None => writeln!(f, "  (growing)")?,
            }
        }
        writeln!(f, "verdict: {}", self.verdict)
    }
}

/// Conjugacy growth for every nontrivial element of `ball(radius)`.
pub fn icc_evidence(
    group: &Arc<MarkedGroup>,
    radius: u32,
    cap: usize,
) -> Result<IccReport, GroupError> {
    let window = ball(group, radius, cap)?;
    let letters = group.letters();
    let mut classes = Vec::new();
    for g in window.elements().iter().skip(1) {
        let mut set: HashSet<Element> = HashSet::new();
        set.insert(g.clone());
        let mut counts = vec![1usize];
        let mut stabilized_at = None;
        for k in 1..=radius {
            let snapshot: Vec<Element> = set.iter().cloned().collect();
            for x in &snapshot {
                for &l in &letters {
                    // conjugate by the single letter l: l x l^-1
                    let mut w = Vec::with_capacity(x.len() + 2);
                    w.push(l);
                    w.extend_from_slice(x.word());
                    w.push(-l);
                    set.insert(group.normal_form(&w));
                }
            }
            counts.push(set.len());
            if set.len() == counts[k as usize - 1] {
                stabilized_at = Some(k);
                // a closed set stays closed: later counts are equal
                for _ in k..radius {
                    counts.push(set.len());
                }
                break;
            }
        }
        classes.push(ClassGrowth {
            representative: g.clone(),
            counts,
            stabilized_at,
        });
    }
    let verdict = if classes.is_empty() {
        IccVerdict::Inconclusive
    } else if classes.iter().any(|c| c.stabilized_at.is_some()) {
        IccVerdict::NotIcc
    } else {
        IccVerdict::IccConsistent
    };
    Ok(IccReport {
        presentation: group.presentation().text().to_string(),
        radius,
        classes,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abelian_groups_are_not_icc() {
        let g = MarkedGroup::parse("<s1,s2 | [s1,s2]>").unwrap();
        let report = icc_evidence(&g, 3, 100_000).unwrap();
        assert_eq!(report.verdict, IccVerdict::NotIcc);
        // every class is a singleton, closed immediately
        for c in &report.classes {
            assert_eq!(c.stabilized_at, Some(1));
            assert!(c.counts.iter().all(|&n| n == 1));
        }
    }

    #[test]
    fn free_group_classes_keep_growing() {
        let g = MarkedGroup::parse("<a,b|>").unwrap();
        let report = icc_evidence(&g, 3, 100_000).unwrap();
        assert_eq!(report.verdict, IccVerdict::IccConsistent);
        // spot check the generator's class: strictly growing counts
        let a = g.parse_word("a").unwrap();
        let c = report
            .classes
            .iter()
            .find(|c| c.representative == a)
            .unwrap();
        assert!(c.counts[3] > c.counts[2]);
        assert!(c.counts[2] > c.counts[1]);
    }

    #[test]
    fn free_product_is_icc_consistent() {
        let g = MarkedGroup::parse("<s1,s2,s3 | [s1,s2]>").unwrap();
        let report = icc_evidence(&g, 2, 100_000).unwrap();
        assert_eq!(report.verdict, IccVerdict::IccConsistent);
    }

    #[test]
    fn central_element_is_detected_as_finite_class() {
        // a is central, b and c are free: class of a is {a}, classes of b, c grow
        let g = MarkedGroup::parse("<a,b,c | [a,b], [a,c]>").unwrap();
        let report = icc_evidence(&g, 2, 1_000_000).unwrap();
        assert_eq!(report.verdict, IccVerdict::NotIcc);
        let a = g.parse_word("a").unwrap();
        let b = g.parse_word("b").unwrap();
        let ca = report.classes.iter().find(|c| c.representative == a).unwrap();
        assert_eq!(ca.stabilized_at, Some(1));
        let cb = report.classes.iter().find(|c| c.representative == b).unwrap();
        assert_eq!(cb.stabilized_at, None);
    }
}
