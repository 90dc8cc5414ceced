//! Presentation and word parsing.
//!
//! Presentations use the ASCII form `<a,b,c | w1, w2>` (angle brackets
//! `⟨ ⟩` are accepted too). Words are written by juxtaposition with `^n`
//! exponents, `[x,y]` commutator sugar and `(w)^n` grouping, e.g.
//! `<s1,s2 | [s1,s2]>` or `a b^-2 (a b)^3`.

use super::{free_reduce, letter, render_word, GroupError, Letter};

#[derive(Debug, Clone)]
pub struct Presentation {
    generators: Vec<String>,
    relators: Vec<Vec<Letter>>,
    text: String,
}

impl Presentation {
    pub fn parse(input: &str) -> Result<Self, GroupError> {
        let trimmed = input.trim();
        let (body, base) = strip_brackets(trimmed, input)?;
        let (gen_part, rel_part) = match find_top_level(body, '|') {
            Some(i) => (&body[..i], Some(&body[i + 1..])),
            None => (body, None),
        };
        let generators = parse_generators(gen_part, base)?;
        let mut relators = Vec::new();
        if let Some(rels) = rel_part {
            let rel_off = base + gen_part.len() + 1;
            for (piece, off) in split_top_level(rels, ',') {
                if piece.trim().is_empty() {
                    if rels.trim().is_empty() {
                        continue; // `<a,b |>` has an empty relator section
                    }
                    return Err(GroupError::Parse {
                        pos: rel_off + off,
                        msg: "empty relator".into(),
                    });
                }
                let word = parse_word_at(&generators, piece, rel_off + off)?;
                let reduced = free_reduce(&word);
                if !reduced.is_empty() {
                    relators.push(reduced);
                }
            }
        }
        let text = render_presentation(&generators, &relators);
        Ok(Presentation {
            generators,
            relators,
            text,
        })
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    /// Freely reduced relator words (trivial relators are dropped).
    pub fn relators(&self) -> &[Vec<Letter>] {
        &self.relators
    }

    /// Canonical re-rendering, used in artifact headers and basis tags.
    pub fn text(&self) -> &str {
        &self.text
    }
}

fn render_presentation(generators: &[String], relators: &[Vec<Letter>]) -> String {
    let rels: Vec<String> = relators
        .iter()
        .map(|r| render_word(generators, r))
        .collect();
    format!("<{} | {}>", generators.join(","), rels.join(", "))
}

/// Strip `<...>` or `⟨...⟩`; returns the body and its byte offset in `input`.
fn strip_brackets<'a>(trimmed: &'a str, input: &str) -> Result<(&'a str, usize), GroupError> {
    let start_off = input.len() - input.trim_start().len();
    let (open_len, rest) = if let Some(r) = trimmed.strip_prefix('<') {
        (1, r)
    } else if let Some(r) = trimmed.strip_prefix('⟨') {
        ('⟨'.len_utf8(), r)
    } else {
        return Err(GroupError::Parse {
            pos: start_off,
            msg: "expected presentation to start with '<'".into(),
        });
    };
    let body = if let Some(b) = rest.strip_suffix('>') {
        b
    } else if let Some(b) = rest.strip_suffix('⟩') {
        b
    } else {
        return Err(GroupError::Parse {
            pos: input.len(),
            msg: "expected presentation to end with '>'".into(),
        });
    };
    Ok((body, start_off + open_len))
}

fn find_top_level(s: &str, target: char) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            c if c == target && depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

fn split_top_level(s: &str, sep: char) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push((&s[start..i], start));
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push((&s[start..], start));
    out
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn parse_generators(part: &str, base: usize) -> Result<Vec<String>, GroupError> {
    let mut gens: Vec<String> = Vec::new();
    for (piece, off) in split_top_level(part, ',') {
        let name = piece.trim();
        let pos = base + off + (piece.len() - piece.trim_start().len());
        if name.is_empty() {
            return Err(GroupError::Parse {
                pos,
                msg: "empty generator name".into(),
            });
        }
        let mut chars = name.chars();
        let first = chars.next().unwrap();
        if !is_ident_start(first) || !name.chars().all(is_ident_char) {
            return Err(GroupError::Parse {
                pos,
                msg: format!("invalid generator name `{name}`"),
            });
        }
        if name == "e" {
            return Err(GroupError::Parse {
                pos,
                msg: "`e` is reserved for the identity".into(),
            });
        }
        if gens.iter().any(|g| g == name) {
            return Err(GroupError::Parse {
                pos,
                msg: format!("duplicate generator `{name}`"),
            });
        }
        gens.push(name.to_string());
    }
    if gens.is_empty() {
        return Err(GroupError::Parse {
            pos: base,
            msg: "at least one generator is required".into(),
        });
    }
    Ok(gens)
}

/// Parse a standalone word over the given generators.
pub fn parse_word(generators: &[String], text: &str) -> Result<Vec<Letter>, GroupError> {
    parse_word_at(generators, text, 0)
}

struct WordParser<'a> {
    generators: &'a [String],
    bytes: &'a [u8],
    text: &'a str,
    pos: usize,
    base: usize,
}

fn parse_word_at(
    generators: &[String],
    text: &str,
    base: usize,
) -> Result<Vec<Letter>, GroupError> {
    let mut p = WordParser {
        generators,
        bytes: text.as_bytes(),
        text,
        pos: 0,
        base,
    };
    let word = p.parse_sequence(&[])?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(word)
}

impl<'a> WordParser<'a> {
    fn err(&self, msg: &str) -> GroupError {
        GroupError::WordParse {
            pos: self.base + self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos] as char).is_ascii_whitespace()
        {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    /// Parse terms until end of input or one of the stop characters.
    fn parse_sequence(&mut self, stops: &[char]) -> Result<Vec<Letter>, GroupError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(c) if stops.contains(&c) => break,
                Some(_) => {
                    let term = self.parse_term()?;
                    out.extend(term);
                }
            }
        }
        Ok(out)
    }

    fn parse_term(&mut self) -> Result<Vec<Letter>, GroupError> {
        let atom = self.parse_atom()?;
        self.skip_ws();
        if self.peek() == Some('^') {
            self.pos += 1;
            let exp = self.parse_int()?;
            Ok(apply_exponent(&atom, exp))
        } else {
            Ok(atom)
        }
    }

    fn parse_int(&mut self) -> Result<i64, GroupError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(self.err("expected an integer exponent"));
        }
        self.text[start..self.pos]
            .parse::<i64>()
            .map_err(|_| self.err("exponent out of range"))
    }

    fn parse_atom(&mut self) -> Result<Vec<Letter>, GroupError> {
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let x = self.parse_sequence(&[','])?;
                if self.peek() != Some(',') {
                    return Err(self.err("expected ',' in commutator"));
                }
                self.pos += 1;
                let y = self.parse_sequence(&[']'])?;
                if self.peek() != Some(']') {
                    return Err(self.err("expected ']' closing commutator"));
                }
                self.pos += 1;
                // [x,y] = x y x^-1 y^-1
                let mut out = Vec::with_capacity(2 * (x.len() + y.len()));
                out.extend_from_slice(&x);
                out.extend_from_slice(&y);
                out.extend(x.iter().rev().map(|&l| -l));
                out.extend(y.iter().rev().map(|&l| -l));
                Ok(out)
            }
            Some('(') => {
                self.pos += 1;
                let w = self.parse_sequence(&[')'])?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(w)
            }
            Some(c) if is_ident_start(c) || c == '1' => self.parse_name(),
            Some(_) => Err(self.err("expected a generator, '[', or '('")),
            None => Err(self.err("unexpected end of word")),
        }
    }

    fn parse_name(&mut self) -> Result<Vec<Letter>, GroupError> {
        let rest = &self.text[self.pos..];
        // longest generator-name match at the current position
        let mut best: Option<usize> = None;
        for (i, g) in self.generators.iter().enumerate() {
            if rest.starts_with(g.as_str())
                && best.map_or(true, |b: usize| g.len() > self.generators[b].len())
            {
                best = Some(i);
            }
        }
        if let Some(i) = best {
            self.pos += self.generators[i].len();
            return Ok(vec![letter(i, false)]);
        }
        if rest.starts_with('e') || rest.starts_with('1') {
            self.pos += 1;
            return Ok(Vec::new());
        }
        Err(self.err("unknown generator"))
    }
}

fn apply_exponent(atom: &[Letter], exp: i64) -> Vec<Letter> {
    let base: Vec<Letter> = if exp < 0 {
        atom.iter().rev().map(|&l| -l).collect()
    } else {
        atom.to_vec()
    };
    let mut out = Vec::with_capacity(base.len() * exp.unsigned_abs() as usize);
    for _ in 0..exp.unsigned_abs() {
        out.extend_from_slice(&base);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn juxtaposed_letters_tokenize_greedily() {
        let gens = vec!["a".to_string(), "b".to_string()];
        let w = parse_word(&gens, "abab").unwrap();
        assert_eq!(w, vec![1, 2, 1, 2]);

        let gens = vec!["s1".to_string(), "s2".to_string()];
        let w = parse_word(&gens, "s1s2^-1").unwrap();
        assert_eq!(w, vec![1, -2]);
    }

    #[test]
    fn prefix_generator_names() {
        let gens = vec!["a".to_string(), "ab".to_string()];
        // longest match: "ab" then "a"
        let w = parse_word(&gens, "aba").unwrap();
        assert_eq!(w, vec![2, 1]);
    }

    #[test]
    fn unicode_brackets() {
        let p = Presentation::parse("⟨a,b | [a,b]⟩").unwrap();
        assert_eq!(p.generators(), &["a".to_string(), "b".to_string()]);
        assert_eq!(p.relators().len(), 1);
    }

    #[test]
    fn trivial_relators_are_dropped() {
        let p = Presentation::parse("<a,b | a a^-1>").unwrap();
        assert!(p.relators().is_empty());
    }

    #[test]
    fn canonical_text_is_stable() {
        let p = Presentation::parse("  < a , b |  [a, b ] > ").unwrap();
        assert_eq!(p.text(), "<a,b | a b a^-1 b^-1>");
        let q = Presentation::parse(p.text()).unwrap();
        assert_eq!(q.text(), p.text());
    }
}
