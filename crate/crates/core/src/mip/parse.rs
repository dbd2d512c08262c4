//! Reader for the LP subset written by [`super::MipModel::to_lp`]:
//! objective, constraints, upper/lower bounds, `free` and binaries.

use std::collections::HashMap;

use super::{Constraint, MipModel, Sense, VarKind, Variable};
use crate::error::{Result, UmeError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Cmp(Sense),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn section_header(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    match l.as_str() {
        "minimize" | "minimum" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "generals" | "general" | "gen" => Some(Section::Generals),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>> {
    let err = |reason: String| UmeError::LpParse {
        line: lineno,
        reason,
    };
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\\' => break,
            c if c.is_whitespace() => i += 1,
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            ':' => {
                toks.push(Tok::Colon);
                i += 1;
            }
            '<' | '>' | '=' => {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j], '=' | '<' | '>') {
                    j += 1;
                }
                let op: String = chars[i..j].iter().collect();
                let sense = match op.as_str() {
                    "<=" | "<" | "=<" => Sense::Le,
                    ">=" | ">" | "=>" => Sense::Ge,
                    "=" => Sense::Eq,
                    _ => return Err(err(format!("unknown operator {op}"))),
                };
                toks.push(Tok::Cmp(sense));
                i = j;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && matches!(chars[j], 'e' | 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && matches!(chars[k], '+' | '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text: String = chars[i..j].iter().collect();
                let v = text
                    .parse::<f64>()
                    .map_err(|_| err(format!("bad number {text}")))?;
                toks.push(Tok::Num(v));
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric()
                        || matches!(chars[j], '_' | '.' | '[' | ']'))
                {
                    j += 1;
                }
                toks.push(Tok::Ident(chars[i..j].iter().collect()));
                i = j;
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        }
    }
    Ok(toks)
}

struct Builder {
    model: MipModel,
    index: HashMap<String, usize>,
}

impl Builder {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = self.model.variables.len();
        self.model.variables.push(Variable {
            name: name.to_string(),
            kind: VarKind::Continuous,
            upper: None,
        });
        self.index.insert(name.to_string(), v);
        v
    }
}

/// `[name :] expr [cmp rhs]` over a token slice.
fn parse_row(
    toks: &[Tok],
    b: &mut Builder,
    line: usize,
) -> Result<(Option<String>, Vec<(usize, f64)>, Option<(Sense, f64)>)> {
    let err = |reason: &str| UmeError::LpParse {
        line,
        reason: reason.to_string(),
    };
    let mut pos = 0;
    let mut name = None;
    if let [Tok::Ident(n), Tok::Colon, ..] = toks {
        name = Some(n.clone());
        pos = 2;
    }
    let mut terms = Vec::new();
    let mut cmp = None;
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    while pos < toks.len() {
        match &toks[pos] {
            Tok::Plus => {}
            Tok::Minus => sign = -sign,
            Tok::Num(v) => coef = Some(coef.unwrap_or(1.0) * v),
            Tok::Ident(v) => {
                let idx = b.var(v);
                terms.push((idx, sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
            Tok::Cmp(s) => {
                let mut rsign = 1.0;
                let mut rest = &toks[pos + 1..];
                while let [t @ (Tok::Plus | Tok::Minus), tail @ ..] = rest {
                    if *t == Tok::Minus {
                        rsign = -rsign;
                    }
                    rest = tail;
                }
                match rest {
                    [Tok::Num(v)] => cmp = Some((*s, rsign * v)),
                    _ => return Err(err("expected a number after the comparison")),
                }
                pos = toks.len();
                continue;
            }
            Tok::Colon => return Err(err("unexpected ':'")),
        }
        pos += 1;
    }
    if coef.is_some() {
        return Err(err("dangling constant in expression"));
    }
    Ok((name, terms, cmp))
}

pub fn parse_lp(text: &str) -> Result<MipModel> {
    let mut b = Builder {
        model: MipModel::default(),
        index: HashMap::new(),
    };
    let mut section = Section::None;
    // pending multi-line row: tokens and starting line
    let mut pending: Vec<Tok> = Vec::new();
    let mut pending_line = 0;

    let flush =
        |pending: &mut Vec<Tok>, section: Section, b: &mut Builder, line: usize| -> Result<()> {
            if pending.is_empty() {
                return Ok(());
            }
            let toks = std::mem::take(pending);
            match section {
                Section::Objective => {
                    let (_, terms, cmp) = parse_row(&toks, b, line)?;
                    if cmp.is_some() {
                        return Err(UmeError::LpParse {
                            line,
                            reason: "comparison in objective".into(),
                        });
                    }
                    b.model.objective.extend(terms);
                }
                Section::Constraints => {
                    let (name, terms, cmp) = parse_row(&toks, b, line)?;
                    let (sense, rhs) = cmp.ok_or(UmeError::LpParse {
                        line,
                        reason: "constraint without right-hand side".into(),
                    })?;
                    let name =
                        name.unwrap_or_else(|| format!("c{}", b.model.constraints.len() + 1));
                    b.model.constraints.push(Constraint {
                        name,
                        terms,
                        sense,
                        rhs,
                    });
                }
                _ => {}
            }
            Ok(())
        };

    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        if let Some(s) = section_header(raw) {
            flush(&mut pending, section, &mut b, pending_line)?;
            section = s;
            continue;
        }
        let toks = tokenize(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        match section {
            Section::None => {
                return Err(UmeError::LpParse {
                    line: lineno,
                    reason: "content before the objective".into(),
                })
            }
            Section::End => {
                return Err(UmeError::LpParse {
                    line: lineno,
                    reason: "content after End".into(),
                })
            }
            Section::Objective | Section::Constraints => {
                let starts_row = matches!(toks.as_slice(), [Tok::Ident(_), Tok::Colon, ..]);
                if starts_row {
                    flush(&mut pending, section, &mut b, pending_line)?;
                    pending_line = lineno;
                }
                if pending.is_empty() {
                    pending_line = lineno;
                }
                pending.extend(toks);
                // a constraint ends with its right-hand side
                let complete = section == Section::Constraints
                    && matches!(pending.last(), Some(Tok::Num(_)))
                    && pending.iter().any(|t| matches!(t, Tok::Cmp(_)));
                if complete {
                    flush(&mut pending, section, &mut b, pending_line)?;
                }
            }
            Section::Bounds => parse_bound(&toks, &mut b, lineno)?,
            Section::Binaries | Section::Generals => {
                for t in toks {
                    match t {
                        Tok::Ident(name) => {
                            let v = b.var(&name);
                            if section == Section::Binaries {
                                b.model.variables[v].kind = VarKind::Binary;
                            }
                        }
                        _ => {
                            return Err(UmeError::LpParse {
                                line: lineno,
                                reason: "expected variable names".into(),
                            })
                        }
                    }
                }
            }
        }
    }
    flush(&mut pending, section, &mut b, pending_line)?;
    if section != Section::End {
        return Err(UmeError::LpParse {
            line: text.lines().count(),
            reason: "missing End".into(),
        });
    }
    Ok(b.model)
}

fn parse_bound(toks: &[Tok], b: &mut Builder, line: usize) -> Result<()> {
    let err = || UmeError::LpParse {
        line,
        reason: "unsupported bound".into(),
    };
    let num = |t: &[Tok]| -> Option<(f64, usize)> {
        match t {
            [Tok::Minus, Tok::Num(v), ..] => Some((-v, 2)),
            [Tok::Plus, Tok::Num(v), ..] => Some((*v, 2)),
            [Tok::Num(v), ..] => Some((*v, 1)),
            _ => None,
        }
    };
    match toks {
        [Tok::Ident(x), Tok::Ident(f)] if f.eq_ignore_ascii_case("free") => {
            b.var(x);
            Ok(())
        }
        [Tok::Ident(x), Tok::Cmp(s), rest @ ..] => {
            let (v, used) = num(rest).ok_or_else(err)?;
            if used != rest.len() {
                return Err(err());
            }
            let idx = b.var(x);
            match s {
                Sense::Le => b.model.variables[idx].upper = Some(v),
                Sense::Eq => b.model.variables[idx].upper = Some(v),
                // lower bounds other than the default zero are not represented
                Sense::Ge => {}
            }
            Ok(())
        }
        _ => {
            // lo <= x <= hi
            let (_, used) = num(toks).ok_or_else(err)?;
            match &toks[used..] {
                [Tok::Cmp(Sense::Le), Tok::Ident(x), Tok::Cmp(Sense::Le), rest @ ..] => {
                    let (hi, u2) = num(rest).ok_or_else(err)?;
                    if u2 != rest.len() {
                        return Err(err());
                    }
                    let idx = b.var(x);
                    b.model.variables[idx].upper = Some(hi);
                    Ok(())
                }
                _ => Err(err()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_mip, MipOptions};
    use super::*;

    #[test]
    fn round_trip_chain() {
        let p = super::super::tests::chain();
        for options in [
            MipOptions::default(),
            MipOptions {
                budget_at_most: true,
                pi_upper_bound: true,
            },
        ] {
            let model = build_mip(&p, options);
            let parsed = parse_lp(&model.to_lp()).unwrap();
            assert_eq!(parsed.canonical(), model.canonical());
        }
    }

    #[test]
    fn hand_written_lp() {
        let text = "\\ comment\nMinimize\n obj: 2x + 3 y\nSubject To\n c1: x + y\n  >= 1\n -x - 2.5e-1 y <= -0.1\nBounds\n 0 <= x <= 4\n y free\nBinary\n z\nEnd\n";
        let m = parse_lp(text).unwrap();
        assert_eq!(m.variables.len(), 3);
        assert_eq!(m.objective, vec![(0, 2.0), (1, 3.0)]);
        assert_eq!(m.constraints.len(), 2);
        assert_eq!(m.constraints[0].rhs, 1.0);
        assert_eq!(m.constraints[1].terms, vec![(0, -1.0), (1, -0.25)]);
        assert_eq!(m.constraints[1].rhs, -0.1);
        assert_eq!(m.constraints[1].name, "c2");
        assert_eq!(m.variables[0].upper, Some(4.0));
        assert_eq!(m.variables[2].kind, VarKind::Binary);
    }

    #[test]
    fn malformed_input() {
        assert!(parse_lp("Minimize\n obj: x\nSubject To\n c: x + \nEnd\n").is_err());
        assert!(parse_lp("Minimize\n obj: x\n").is_err());
        assert!(parse_lp("x + y\n").is_err());
        assert!(parse_lp("Minimize\n obj: x $ y\nEnd\n").is_err());
    }
}
