//! SDPA sparse format (`.dat-s`) and solver result files.
//!
//! Problems are written in SDPA's dual form, `max F₀ • Y` subject to
//! `Fᵢ • Y = cᵢ`, `Y ⪰ 0`, so the SOS blocks are the solver's `yMat`.
//! Header comment lines carry the metadata needed to rebuild an
//! [`SdpProblem`] from the file alone.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rug::{Float, Rational};

use super::{Constraint, Entry, SdpError, SdpProblem, SosTuple};
use crate::rigor::{format_float, parse_exact_rational, Enclosure, Precision};
use crate::sym::SymMatrix;

/// Skew `|Y − Yᵀ|` tolerated without a warning.
pub const SKEW_TOLERANCE: f64 = 1e-40;

fn entry_line(out: &mut String, mat: usize, e: &Entry, digits: usize) {
    let _ = writeln!(
        out,
        "{} {} {} {} {}",
        mat,
        e.block + 1,
        e.i + 1,
        e.j + 1,
        format_float(e.value.mid(), digits)
    );
}

pub fn to_sdpa_string(p: &SdpProblem, digits: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\"cplus: maximize F0.Y subject to Fi.Y = ci, Y psd");
    let _ = writeln!(out, "* A = {}", p.a);
    let _ = writeln!(out, "* d = {}", p.d);
    let _ = writeln!(out, "* epsilon = {}", p.epsilon);
    let _ = writeln!(out, "* trace_penalty = {}", p.trace_penalty);
    let _ = writeln!(out, "* precision = {}", p.prec.bits());
    let _ = writeln!(
        out,
        "* objective_constant = {}",
        format_float(p.objective_constant.mid(), digits)
    );
    let _ = writeln!(out, "{}", p.constraints.len());
    let _ = writeln!(out, "{}", p.block_sizes.len());
    let sizes: Vec<String> = p.block_sizes.iter().map(usize::to_string).collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = p
        .constraints
        .iter()
        .map(|c| format_float(c.rhs.mid(), digits))
        .collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    for e in &p.objective {
        entry_line(&mut out, 0, e, digits);
    }
    for (m, c) in p.constraints.iter().enumerate() {
        for e in &c.entries {
            entry_line(&mut out, m + 1, e, digits);
        }
    }
    out
}

pub fn write_sdpa(p: &SdpProblem, path: &Path, digits: usize) -> Result<(), SdpError> {
    fs::write(path, to_sdpa_string(p, digits)).map_err(|source| SdpError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, SdpError> {
    fs::read_to_string(path).map_err(|source| SdpError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_sdpa(path: &Path) -> Result<SdpProblem, SdpError> {
    let text = read_text(path)?;
    parse_sdpa(&text, &path.display().to_string())
}

fn parse_sdpa(text: &str, path: &str) -> Result<SdpProblem, SdpError> {
    let err = |line: usize, detail: String| SdpError::Parse {
        path: path.to_string(),
        line,
        detail,
    };
    let mut meta = std::collections::HashMap::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((_, l)) = lines.peek() {
        if let Some(rest) = l.strip_prefix('*') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        } else if !l.starts_with('"') {
            break;
        }
        lines.next();
    }
    let get = |key: &str| {
        meta.get(key).cloned().ok_or_else(|| SdpError::Missing {
            path: path.to_string(),
            what: format!("header field '{key}'"),
        })
    };
    let rational = |key: &str| -> Result<Rational, SdpError> {
        parse_exact_rational(&get(key)?).map_err(|e| err(0, format!("{key}: {e}")))
    };
    let a = rational("A")?;
    let epsilon = rational("epsilon")?;
    let trace_penalty = match meta.get("trace_penalty") {
        Some(v) => parse_exact_rational(v).map_err(|e| err(0, format!("trace_penalty: {e}")))?,
        None => Rational::new(),
    };
    let d: usize = get("d")?.parse().map_err(|_| err(0, "bad degree".into()))?;
    let bits: u32 = get("precision")?
        .parse()
        .map_err(|_| err(0, "bad precision".into()))?;
    let prec = Precision::new(bits)?;
    let decimal = |line: usize, s: &str| {
        Enclosure::from_decimal(s.trim_matches(|c| c == ',' || c == '{' || c == '}'), prec)
            .map_err(|e| err(line, e.to_string()))
    };
    let objective_constant = decimal(0, &get("objective_constant")?)?;

    let mut next = |what: &str| {
        lines.next().ok_or_else(|| SdpError::Missing {
            path: path.to_string(),
            what: what.to_string(),
        })
    };
    let first_int = |line: usize, s: &str| -> Result<usize, SdpError> {
        s.split_whitespace()
            .next()
            .and_then(|t| t.trim_matches(|c| c == ',' || c == '=').parse().ok())
            .ok_or_else(|| err(line, format!("expected an integer, found '{s}'")))
    };
    let (ln, l) = next("constraint count")?;
    let m = first_int(ln + 1, l)?;
    let (ln, l) = next("block count")?;
    let nblocks = first_int(ln + 1, l)?;
    let (ln, l) = next("block structure")?;
    let block_sizes: Vec<usize> = l
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .take(nblocks)
        .map(|t| t.parse().map_err(|_| err(ln + 1, format!("bad block size '{t}'"))))
        .collect::<Result<_, _>>()?;
    if block_sizes.len() != nblocks {
        return Err(err(ln + 1, "block structure is short".into()));
    }
    let (ln, l) = next("right-hand side")?;
    let rhs: Vec<Enclosure> = l
        .split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}')
        .filter(|t| !t.is_empty())
        .map(|t| decimal(ln + 1, t))
        .collect::<Result<_, _>>()?;
    if rhs.len() != m {
        return Err(err(ln + 1, format!("expected {m} right-hand sides, found {}", rhs.len())));
    }
    let mut constraints: Vec<Constraint> = rhs
        .into_iter()
        .map(|rhs| Constraint {
            entries: Vec::new(),
            rhs,
        })
        .collect();
    let mut objective = Vec::new();
    for (ln, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() < 5 {
            return Err(err(ln + 1, "expected 'mat block i j value'".into()));
        }
        let idx = |t: &str| -> Result<usize, SdpError> {
            t.trim_matches(',')
                .parse()
                .map_err(|_| err(ln + 1, format!("bad index '{t}'")))
        };
        let (mat, block, i, j) = (idx(f[0])?, idx(f[1])?, idx(f[2])?, idx(f[3])?);
        if block == 0 || block > nblocks || i == 0 || j == 0 || i > j || j > block_sizes[block - 1] {
            return Err(err(ln + 1, format!("entry ({block}, {i}, {j}) out of range")));
        }
        let entry = Entry {
            block: block - 1,
            i: i - 1,
            j: j - 1,
            value: decimal(ln + 1, f[4])?,
        };
        match mat {
            0 => objective.push(entry),
            k if k <= m => constraints[k - 1].entries.push(entry),
            _ => return Err(err(ln + 1, format!("matrix {mat} exceeds {m}"))),
        }
    }
    Ok(SdpProblem {
        a,
        d,
        epsilon,
        trace_penalty,
        block_sizes,
        constraints,
        objective,
        objective_constant,
        prec,
    })
}

/// What the parser noticed about a solution file besides the matrices.
#[derive(Debug, Clone, Default)]
pub struct SolutionMeta {
    pub phase: Option<String>,
    pub max_skew: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
enum Node {
    Num(String),
    List(Vec<Node>),
}

struct Braces<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Braces<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_whitespace() || self.s[self.pos] == b',') {
            self.pos += 1;
        }
    }

    fn parse(&mut self) -> Option<Node> {
        self.skip_ws();
        if self.pos >= self.s.len() {
            return None;
        }
        if self.s[self.pos] == b'{' {
            self.pos += 1;
            let mut items = Vec::new();
            loop {
                self.skip_ws();
                if self.pos >= self.s.len() {
                    return None;
                }
                if self.s[self.pos] == b'}' {
                    self.pos += 1;
                    return Some(Node::List(items));
                }
                items.push(self.parse()?);
            }
        }
        let start = self.pos;
        while self.pos < self.s.len()
            && !matches!(self.s[self.pos], b'{' | b'}' | b',')
            && !self.s[self.pos].is_ascii_whitespace()
        {
            self.pos += 1;
        }
        let tok = std::str::from_utf8(&self.s[start..self.pos]).ok()?;
        Some(Node::Num(tok.to_string()))
    }
}

fn key_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| {
        let (k, v) = l.split_once('=')?;
        (k.trim() == key).then(|| v.trim())
    })
}

/// Reads `yMat` from a solver result, symmetrizes each block, and adds the
/// ε shift. Entries are rounded once to the problem's precision and kept as
/// exact values: the tuple being certified is the rounded one.
pub fn read_solution(path: &Path, p: &SdpProblem) -> Result<(SosTuple, SolutionMeta), SdpError> {
    let text = read_text(path)?;
    parse_solution(&text, &path.display().to_string(), p)
}

fn parse_solution(text: &str, path: &str, p: &SdpProblem) -> Result<(SosTuple, SolutionMeta), SdpError> {
    let missing = |what: String| SdpError::Missing {
        path: path.to_string(),
        what,
    };
    let mut meta = SolutionMeta {
        phase: key_value(text, "phase.value").map(str::to_string),
        ..Default::default()
    };
    let start = text
        .lines()
        .scan(0usize, |off, l| {
            let here = *off;
            *off += l.len() + 1;
            Some((here, l))
        })
        .find(|(_, l)| l.trim_start().starts_with("yMat"))
        .map(|(off, _)| off)
        .ok_or_else(|| missing("yMat section".into()))?;
    let brace = text[start..]
        .find('{')
        .ok_or_else(|| missing("yMat body".into()))?;
    let mut parser = Braces {
        s: text[start + brace..].as_bytes(),
        pos: 0,
    };
    let blocks = match parser.parse() {
        Some(Node::List(b)) => b,
        _ => return Err(missing("closing brace of yMat".into())),
    };
    if blocks.len() < p.block_sizes.len() {
        return Err(missing(format!(
            "yMat block {} of {}",
            blocks.len() + 1,
            p.block_sizes.len()
        )));
    }
    let prec = p.prec;
    let parse_num = |s: &str| -> Result<Float, SdpError> {
        Float::parse(s)
            .map(|v| Float::with_val(prec.bits(), v))
            .map_err(|e| SdpError::Parse {
                path: path.to_string(),
                line: 0,
                detail: format!("bad number '{s}': {e}"),
            })
    };
    let mut mats = Vec::with_capacity(8);
    for (b, (node, &n)) in blocks.iter().zip(&p.block_sizes).enumerate() {
        let rows = match node {
            Node::List(r) if r.len() == n => r,
            _ => {
                return Err(SdpError::Dimension(format!(
                    "yMat block {} is not {n}x{n}",
                    b + 1
                )))
            }
        };
        let mut dense = vec![vec![Float::new(prec.bits()); n]; n];
        for (i, row) in rows.iter().enumerate() {
            match row {
                Node::List(cols) if cols.len() == n => {
                    for (j, c) in cols.iter().enumerate() {
                        match c {
                            Node::Num(s) => dense[i][j] = parse_num(s)?,
                            Node::List(_) => {
                                return Err(SdpError::Dimension(format!(
                                    "yMat block {} row {} is nested too deeply",
                                    b + 1,
                                    i + 1
                                )))
                            }
                        }
                    }
                }
                _ => {
                    return Err(SdpError::Dimension(format!(
                        "yMat block {} row {} does not have {n} entries",
                        b + 1,
                        i + 1
                    )))
                }
            }
        }
        let m = SymMatrix::from_fn(n, |i, j| {
            let skew = Float::with_val(prec.bits(), &dense[i][j] - &dense[j][i]).abs().to_f64();
            if skew > meta.max_skew {
                meta.max_skew = skew;
            }
            let mut avg = Float::with_val(prec.bits(), &dense[i][j] + &dense[j][i]);
            avg >>= 1;
            if i == j {
                // the rounded sum is the entry; a ball around v + ε would
                // carry a fixed-precision radius into every later step
                avg = Float::with_val(prec.bits(), &avg + &p.epsilon);
            }
            Enclosure::exact(avg)
        });
        mats.push(m);
    }
    if meta.max_skew > SKEW_TOLERANCE {
        meta.warnings.push(format!(
            "solution blocks were asymmetric by up to {:.3e}; symmetrized",
            meta.max_skew
        ));
    }
    let mut it = mats.into_iter();
    let q = [(); 4].map(|_| it.next().unwrap());
    let r = [(); 4].map(|_| it.next().unwrap());
    Ok((SosTuple::new(q, r, p.epsilon.clone())?, meta))
}
