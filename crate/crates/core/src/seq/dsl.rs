//! Line-oriented parser for `.seq` recurrence files.
//!
//! ```text
//! base 4
//! name rho
//! init rho(0) = 1
//! rule rho(4n+2) = rho(n) + rho(n+1)
//! ```

use std::collections::BTreeMap;

use super::{RecurrenceSpec, Rule, SeqDef, SpecError, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u128),
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Eq,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Eq => "`=`".into(),
        }
    }
}

struct Lexed {
    line: usize,
    toks: Vec<(usize, Tok)>,
    end_col: usize,
}

fn syntax(line: usize, col: usize, expected: &str, found: String) -> SpecError {
    SpecError::Syntax {
        line,
        col,
        expected: expected.to_string(),
        found,
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex_line(line_no: usize, text: &str) -> Result<Lexed, SpecError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((col, t));
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let v = digits
                .parse::<u128>()
                .map_err(|_| syntax(line_no, col, "an integer that fits 128 bits", digits.clone()))?;
            toks.push((col, Tok::Int(v)));
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            toks.push((col, Tok::Ident(chars[start..i].iter().collect())));
        } else {
            return Err(syntax(line_no, col, "a token", format!("`{c}`")));
        }
    }
    Ok(Lexed {
        line: line_no,
        toks,
        end_col: chars.len() + 1,
    })
}

struct Cursor<'a> {
    lexed: &'a Lexed,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.lexed.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.lexed
            .toks
            .get(self.pos)
            .map(|(c, _)| *c)
            .unwrap_or(self.lexed.end_col)
    }

    fn err(&self, expected: &str) -> SpecError {
        let found = self.peek().map(Tok::describe).unwrap_or_else(|| "end of line".into());
        syntax(self.lexed.line, self.col(), expected, found)
    }

    fn expect(&mut self, want: &Tok, expected: &str) -> Result<(), SpecError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(expected))
        }
    }

    fn int(&mut self) -> Result<u128, SpecError> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(*v)
            }
            _ => Err(self.err("an integer")),
        }
    }

    fn ident(&mut self) -> Result<(usize, String), SpecError> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok((col, s.clone()))
            }
            _ => Err(self.err("an identifier")),
        }
    }

    fn signed_int(&mut self) -> Result<i128, SpecError> {
        let neg = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                true
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let col = self.col();
        let v = self.int()?;
        let v = i128::try_from(v).map_err(|_| syntax(self.lexed.line, col, "a 127-bit integer", v.to_string()))?;
        Ok(if neg { -v } else { v })
    }

    fn end(&self) -> Result<(), SpecError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.err("end of line")),
        }
    }

    /// `n` or `n+<INT>` inside parentheses, after the opening paren.
    fn n_plus(&mut self) -> Result<u32, SpecError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "n" => self.pos += 1,
            _ => return Err(self.err("`n`")),
        }
        let shift = if self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            let col = self.col();
            let v = self.int()?;
            u32::try_from(v).map_err(|_| syntax(self.lexed.line, col, "a small shift", v.to_string()))?
        } else {
            0
        };
        self.expect(&Tok::RParen, "`)`")?;
        Ok(shift)
    }
}

struct RawTerm {
    coef: i128,
    name: String,
    shift: u32,
}

struct RawRule {
    line: usize,
    seq: String,
    base: u32,
    residue: u32,
    terms: Vec<RawTerm>,
    constant: i128,
}

fn parse_term(
    cur: &mut Cursor<'_>,
    sign: i128,
    terms: &mut Vec<RawTerm>,
    constant: &mut i128,
) -> Result<(), SpecError> {
    let overflow = |cur: &Cursor<'_>| {
        syntax(
            cur.lexed.line,
            cur.col(),
            "a coefficient that fits 127 bits",
            "overflow".into(),
        )
    };
    let coef = match cur.peek() {
        Some(Tok::Int(v)) => {
            let v = *v;
            cur.pos += 1;
            let v = i128::try_from(v).map_err(|_| overflow(cur))?;
            match cur.peek() {
                Some(Tok::Star) => {
                    cur.pos += 1;
                    Some(v)
                }
                Some(Tok::Ident(_)) => Some(v),
                _ => {
                    *constant = constant.checked_add(sign * v).ok_or_else(|| overflow(cur))?;
                    return Ok(());
                }
            }
        }
        _ => None,
    };
    let (col, name) = cur.ident()?;
    if name == "n" {
        return Err(syntax(cur.lexed.line, col, "a sequence name", "`n`".into()));
    }
    cur.expect(&Tok::LParen, "`(`")?;
    let shift = cur.n_plus()?;
    terms.push(RawTerm {
        coef: sign * coef.unwrap_or(1),
        name,
        shift,
    });
    Ok(())
}

fn parse_rule(cur: &mut Cursor<'_>) -> Result<RawRule, SpecError> {
    let (_, seq) = cur.ident()?;
    cur.expect(&Tok::LParen, "`(`")?;
    let base_col = cur.col();
    let base = match cur.peek() {
        Some(Tok::Int(v)) => {
            let v = *v;
            cur.pos += 1;
            u32::try_from(v).map_err(|_| syntax(cur.lexed.line, base_col, "a small base", v.to_string()))?
        }
        _ => 1,
    };
    match cur.peek() {
        Some(Tok::Ident(s)) if s == "n" => cur.pos += 1,
        _ => return Err(cur.err("`n`")),
    }
    let residue = if cur.peek() == Some(&Tok::Plus) {
        cur.pos += 1;
        let col = cur.col();
        let v = cur.int()?;
        u32::try_from(v).map_err(|_| syntax(cur.lexed.line, col, "a small residue", v.to_string()))?
    } else {
        0
    };
    cur.expect(&Tok::RParen, "`)`")?;
    cur.expect(&Tok::Eq, "`=`")?;

    let mut terms = Vec::new();
    let mut constant = 0i128;
    let mut sign = match cur.peek() {
        Some(Tok::Minus) => {
            cur.pos += 1;
            -1
        }
        Some(Tok::Plus) => {
            cur.pos += 1;
            1
        }
        _ => 1,
    };
    loop {
        parse_term(cur, sign, &mut terms, &mut constant)?;
        sign = match cur.peek() {
            None => break,
            Some(Tok::Plus) => 1,
            Some(Tok::Minus) => -1,
            Some(_) => return Err(cur.err("`+`, `-` or end of line")),
        };
        cur.pos += 1;
    }
    Ok(RawRule {
        line: cur.lexed.line,
        seq,
        base,
        residue,
        terms,
        constant,
    })
}

/// Parses and validates a `.seq` source.
pub fn parse_spec(text: &str) -> Result<RecurrenceSpec, SpecError> {
    let mut base: Option<(usize, u32)> = None;
    let mut name: Option<String> = None;
    let mut nmin: u64 = 1;
    let mut inits: Vec<(usize, String, u128, i128)> = Vec::new();
    let mut rules: Vec<RawRule> = Vec::new();
    // Sequence names in order of first appearance.
    let mut order: Vec<String> = Vec::new();
    let note = |s: &str, order: &mut Vec<String>| {
        if !order.iter().any(|o| o == s) {
            order.push(s.to_string());
        }
    };

    for (idx, raw) in text.lines().enumerate() {
        let lexed = lex_line(idx + 1, raw)?;
        let mut cur = Cursor { lexed: &lexed, pos: 0 };
        let Some(first) = cur.peek() else { continue };
        let keyword = match first {
            Tok::Ident(k) => k.clone(),
            _ => return Err(cur.err("`base`, `name`, `nmin`, `init` or `rule`")),
        };
        cur.pos += 1;
        match keyword.as_str() {
            "base" => {
                let col = cur.col();
                let v = cur.int()?;
                let b = u32::try_from(v)
                    .ok()
                    .filter(|&b| b >= 2)
                    .ok_or_else(|| syntax(lexed.line, col, "a base >= 2", v.to_string()))?;
                base = Some((lexed.line, b));
            }
            "name" => {
                let (_, n) = cur.ident()?;
                note(&n, &mut order);
                name = Some(n);
            }
            "nmin" => {
                let col = cur.col();
                let v = cur.int()?;
                nmin = u64::try_from(v).map_err(|_| syntax(lexed.line, col, "a small nmin", v.to_string()))?;
            }
            "init" => {
                let (_, s) = cur.ident()?;
                cur.expect(&Tok::LParen, "`(`")?;
                let index = cur.int()?;
                cur.expect(&Tok::RParen, "`)`")?;
                cur.expect(&Tok::Eq, "`=`")?;
                let v = cur.signed_int()?;
                note(&s, &mut order);
                inits.push((lexed.line, s, index, v));
            }
            "rule" => {
                let r = parse_rule(&mut cur)?;
                note(&r.seq, &mut order);
                rules.push(r);
            }
            _ => {
                cur.pos -= 1;
                return Err(cur.err("`base`, `name`, `nmin`, `init` or `rule`"));
            }
        }
        cur.end()?;
    }

    let (_, base) = base.ok_or(SpecError::MissingHeader("base"))?;
    let name = name.ok_or(SpecError::MissingHeader("name"))?;

    let mut seqs: Vec<SeqDef> = order
        .iter()
        .map(|n| SeqDef {
            name: n.clone(),
            initials: BTreeMap::new(),
            rules: Vec::new(),
        })
        .collect();
    let index_of = |n: &str| order.iter().position(|o| o == n);

    for (line, s, index, v) in inits {
        let def = &mut seqs[index_of(&s).expect("noted")];
        if def.initials.insert(index, v).is_some() {
            return Err(SpecError::DuplicateInitial { line, seq: s, index });
        }
    }

    let mut slots: Vec<Vec<Option<(usize, Rule)>>> = vec![vec![None; base as usize]; seqs.len()];
    for r in &rules {
        if r.base != base {
            return Err(SpecError::BaseMismatch {
                line: r.line,
                base,
                got: r.base,
            });
        }
        if r.residue >= base {
            return Err(SpecError::ResidueOutOfRange {
                line: r.line,
                residue: r.residue,
                base,
            });
        }
        let mut terms = Vec::with_capacity(r.terms.len());
        for t in &r.terms {
            let seq = index_of(&t.name).ok_or_else(|| SpecError::UnknownSequence {
                line: r.line,
                name: t.name.clone(),
            })?;
            terms.push(Term {
                coef: t.coef,
                seq,
                shift: t.shift,
            });
        }
        let slot = &mut slots[index_of(&r.seq).expect("noted")][r.residue as usize];
        if slot.is_some() {
            return Err(SpecError::DuplicateRule {
                line: r.line,
                seq: r.seq.clone(),
                residue: r.residue,
            });
        }
        *slot = Some((
            r.line,
            Rule {
                terms,
                constant: r.constant,
            },
        ));
    }

    for (def, slot) in seqs.iter_mut().zip(slots) {
        for (i, s) in slot.into_iter().enumerate() {
            let (line, rule) = s.ok_or_else(|| SpecError::MissingResidue {
                seq: def.name.clone(),
                residue: i as u32,
            })?;
            let bound = (base as u128 - 1) * nmin as u128 + i as u128;
            if let Some(t) = rule.terms.iter().find(|t| t.shift as u128 >= bound) {
                return Err(SpecError::NonWellFounded {
                    line,
                    seq: def.name.clone(),
                    base,
                    residue: i as u32,
                    shift: t.shift,
                    bound,
                });
            }
            def.rules.push(rule);
        }
    }

    let start = base as u128 * nmin as u128;
    for def in &seqs {
        if let Some(index) = (0..start).find(|k| !def.initials.contains_key(k)) {
            return Err(SpecError::MissingInitial {
                seq: def.name.clone(),
                index,
            });
        }
    }

    let primary = index_of(&name).expect("noted");
    Ok(RecurrenceSpec {
        base,
        name,
        nmin,
        seqs,
        primary,
    })
}
