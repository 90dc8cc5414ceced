//! Shortlex Knuth-Bendix completion for string rewriting over group letters.
//!
//! The fallback path for presentations outside the structurally recognized
//! classes. Seeds are the free-reduction rules `x x^-1 -> ε` plus one rule
//! `r -> ε` per relator; completion resolves critical pairs until the system
//! is confluent or the budget runs out. Because rules are oriented by the
//! shortlex order, a confluent system yields shortlex-minimal (hence geodesic)
//! normal forms.

use std::cmp::Ordering;
use std::collections::VecDeque;

use super::{free_reduce, letter, word_cmp, GroupError, Letter, Presentation};

#[derive(Debug, Clone)]
pub struct KbBudget {
    /// Maximum number of live rules.
    pub max_rules: usize,
    /// Maximum length of a rule's left-hand side.
    pub max_rule_len: usize,
    /// Maximum number of critical pairs examined.
    pub max_pairs: usize,
}

impl Default for KbBudget {
    fn default() -> Self {
        KbBudget {
            max_rules: 4000,
            max_rule_len: 64,
            max_pairs: 400_000,
        }
    }
}

#[derive(Debug, Clone)]
struct Rule {
    lhs: Vec<Letter>,
    rhs: Vec<Letter>,
    alive: bool,
}

/// A confluent, shortlex-reducing string rewriting system.
#[derive(Debug, Clone)]
pub struct RewriteSystem {
    rules: Vec<(Vec<Letter>, Vec<Letter>)>,
}

impl RewriteSystem {
    pub fn rules(&self) -> &[(Vec<Letter>, Vec<Letter>)] {
        &self.rules
    }

    /// Reduce a word to its unique normal form.
    pub fn normalize(&self, word: &[Letter]) -> Vec<Letter> {
        normalize_with(&self.rules, word)
    }
}

fn normalize_with(rules: &[(Vec<Letter>, Vec<Letter>)], word: &[Letter]) -> Vec<Letter> {
    let mut w = word.to_vec();
    'outer: loop {
        for start in 0..w.len() {
            for (lhs, rhs) in rules {
                if lhs.len() <= w.len() - start && w[start..start + lhs.len()] == lhs[..] {
                    let mut next = Vec::with_capacity(w.len() - lhs.len() + rhs.len());
                    next.extend_from_slice(&w[..start]);
                    next.extend_from_slice(rhs);
                    next.extend_from_slice(&w[start + lhs.len()..]);
                    w = next;
                    continue 'outer;
                }
            }
        }
        return w;
    }
}

struct Completion {
    rules: Vec<Rule>,
    queue: VecDeque<(usize, usize)>,
    pairs_examined: usize,
    budget: KbBudget,
}

impl Completion {
    fn live_rules(&self) -> Vec<(Vec<Letter>, Vec<Letter>)> {
        self.rules
            .iter()
            .filter(|r| r.alive)
            .map(|r| (r.lhs.clone(), r.rhs.clone()))
            .collect()
    }

    fn normalize(&self, word: &[Letter]) -> Vec<Letter> {
        // normalize against live rules only
        let mut w = word.to_vec();
        'outer: loop {
            for start in 0..w.len() {
                for r in &self.rules {
                    if !r.alive {
                        continue;
                    }
                    if r.lhs.len() <= w.len() - start
                        && w[start..start + r.lhs.len()] == r.lhs[..]
                    {
                        let mut next =
                            Vec::with_capacity(w.len() - r.lhs.len() + r.rhs.len());
                        next.extend_from_slice(&w[..start]);
                        next.extend_from_slice(&r.rhs);
                        next.extend_from_slice(&w[start + r.lhs.len()..]);
                        w = next;
                        continue 'outer;
                    }
                }
            }
            return w;
        }
    }

    fn live_count(&self) -> usize {
        self.rules.iter().filter(|r| r.alive).count()
    }

    /// Normalize both sides, orient, insert, interreduce. Returns Err on
    /// budget exhaustion.
    fn add_equation(&mut self, a: &[Letter], b: &[Letter]) -> Result<(), GroupError> {
        let mut work = vec![(a.to_vec(), b.to_vec())];
        while let Some((u, v)) = work.pop() {
            let nu = self.normalize(&u);
            let nv = self.normalize(&v);
            if nu == nv {
                continue;
            }
            let (lhs, rhs) = match word_cmp(&nu, &nv) {
                Ordering::Greater => (nu, nv),
                Ordering::Less => (nv, nu),
                Ordering::Equal => unreachable!("distinct words cannot be shortlex-equal"),
            };
            if lhs.len() > self.budget.max_rule_len {
                return Err(self.budget_error());
            }
            let new_idx = self.rules.len();
            self.rules.push(Rule {
                lhs,
                rhs,
                alive: true,
            });
            if self.live_count() > self.budget.max_rules {
                return Err(self.budget_error());
            }
            // interreduce: any live rule whose lhs contains the new lhs as a
            // factor is replaced by its re-normalized equation
            let new_lhs = self.rules[new_idx].lhs.clone();
            for i in 0..new_idx {
                if !self.rules[i].alive || i == new_idx {
                    continue;
                }
                if contains_factor(&self.rules[i].lhs, &new_lhs) {
                    self.rules[i].alive = false;
                    let (l, r) = (self.rules[i].lhs.clone(), self.rules[i].rhs.clone());
                    work.push((l, r));
                }
            }
            for i in 0..self.rules.len() {
                if self.rules[i].alive {
                    self.queue.push_back((i, new_idx));
                    if i != new_idx {
                        self.queue.push_back((new_idx, i));
                    }
                }
            }
        }
        Ok(())
    }

    fn budget_error(&self) -> GroupError {
        GroupError::CompletionBudget {
            rules: self.live_count(),
            pairs: self.pairs_examined,
        }
    }
}

fn contains_factor(hay: &[Letter], needle: &[Letter]) -> bool {
    if needle.len() > hay.len() {
        return false;
    }
    (0..=hay.len() - needle.len()).any(|s| &hay[s..s + needle.len()] == needle)
}

/// Run Knuth-Bendix completion on the presentation's relators.
pub fn complete(p: &Presentation, budget: &KbBudget) -> Result<RewriteSystem, GroupError> {
    let mut c = Completion {
        rules: Vec::new(),
        queue: VecDeque::new(),
        pairs_examined: 0,
        budget: budget.clone(),
    };
    for g in 0..p.generators().len() {
        for inv in [false, true] {
            let l = letter(g, inv);
            c.add_equation(&[l, -l], &[])?;
        }
    }
    for r in p.relators() {
        let reduced = free_reduce(r);
        c.add_equation(&reduced, &[])?;
    }
    while let Some((i, j)) = c.queue.pop_front() {
        if !c.rules[i].alive || !c.rules[j].alive {
            continue;
        }
        c.pairs_examined += 1;
        if c.pairs_examined > c.budget.max_pairs {
            return Err(c.budget_error());
        }
        let (l1, r1) = (c.rules[i].lhs.clone(), c.rules[i].rhs.clone());
        let (l2, r2) = (c.rules[j].lhs.clone(), c.rules[j].rhs.clone());
        // proper overlaps: a suffix of l1 equals a prefix of l2
        let max_k = l1.len().min(l2.len());
        for k in 1..max_k {
            if l1[l1.len() - k..] == l2[..k] {
                // word l1 · l2[k..] reduces two ways
                let mut u = r1.clone();
                u.extend_from_slice(&l2[k..]);
                let mut v = l1[..l1.len() - k].to_vec();
                v.extend_from_slice(&r2);
                c.add_equation(&u, &v)?;
                if !c.rules[i].alive || !c.rules[j].alive {
                    break;
                }
            }
        }
        // containment: l2 occurs strictly inside l1
        if c.rules[i].alive && c.rules[j].alive && l2.len() < l1.len() {
            for s in 0..=l1.len() - l2.len() {
                if l1[s..s + l2.len()] == l2[..] {
                    let mut v = l1[..s].to_vec();
                    v.extend_from_slice(&r2);
                    v.extend_from_slice(&l1[s + l2.len()..]);
                    c.add_equation(&r1, &v)?;
                    if !c.rules[i].alive || !c.rules[j].alive {
                        break;
                    }
                }
            }
        }
    }
    let mut rules = c.live_rules();
    // final interreduction pass: normalize each rhs against the full system
    let snapshot = rules.clone();
    for (_, rhs) in rules.iter_mut() {
        *rhs = normalize_with(&snapshot, rhs);
    }
    rules.sort_by(|a, b| word_cmp(&a.0, &b.0));
    Ok(RewriteSystem { rules })
}
