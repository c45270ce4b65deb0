//! Seeded benchmark instance generation and the text instance format.
//!
//! Every family draws from `SubtractiveRng::new(s + n + index)` in a fixed
//! order:
//!
//! * Random: one weight per vector, vectors in lexicographic order;
//! * Clique / SquareRoot: matrices for pairs `(i, j)` in lexicographic order,
//!   each row-major;
//! * Geometric: for each part, `n` points, `x` then `y`;
//! * Product: `s` arrays of `n` factors.
//!
//! All draws are uniform integers in `1..=100`.
//!
//! File layout: a header line `MAP <code> <s> <n> <seed>`, a model tag line
//! (`tensor`, `edges sum`, `edges root`, `points`, `product`), then the
//! payload as whitespace-separated numbers in draw order.

use std::fmt::Write as _;

use crate::error::{MapError, Result};
use crate::model::{Combiner, Family, Instance, Weights};
use crate::rng::SubtractiveRng;

pub use crate::model::InstanceId;

/// Largest tensor the generator will allocate (the 6-AP n=18 bed needs ~34M).
const MAX_TENSOR: usize = 1 << 31;

/// Sizes `n` of the benchmark bed per dimension count, small to large.
pub fn bed_sizes(s: usize) -> Option<[usize; 3]> {
    match s {
        3 => Some([40, 70, 100]),
        4 => Some([20, 30, 40]),
        5 => Some([15, 18, 25]),
        6 => Some([12, 15, 18]),
        _ => None,
    }
}

/// Size class of `n` within the bed: 0 small, 1 moderate, 2 large.
pub fn size_class(s: usize, n: usize) -> Option<usize> {
    bed_sizes(s)?.iter().position(|&x| x == n)
}

/// All ids of the benchmark bed for the given families.
pub fn bed(families: &[Family]) -> Vec<InstanceId> {
    let mut ids = Vec::new();
    for &family in families {
        for s in 3..=6 {
            for n in bed_sizes(s).unwrap() {
                for index in 1..=10 {
                    ids.push(InstanceId::new(family, s, n, index));
                }
            }
        }
    }
    ids
}

fn draw(rng: &mut SubtractiveRng) -> i64 {
    rng.next_int(1, 101).expect("non-empty range")
}

/// Generates the instance for `id`.
pub fn generate(id: InstanceId) -> Result<Instance> {
    let InstanceId { family, s, n, index } = id;
    if s < 2 || n < 1 || index < 1 {
        return Err(MapError::domain(format!("invalid instance id {id}")));
    }
    let mut rng = SubtractiveRng::new(id.seed());
    let inst = match family {
        Family::Random => {
            let size = n
                .checked_pow(s as u32)
                .filter(|&x| x <= MAX_TENSOR)
                .ok_or_else(|| MapError::domain(format!("tensor for {id} is too large")))?;
            let w = (0..size).map(|_| draw(&mut rng) as u8).collect();
            Instance::tensor(s, n, w)?
        }
        Family::Clique | Family::SquareRoot => {
            let combiner = if family == Family::Clique {
                Combiner::Sum
            } else {
                Combiner::RootOfSquares
            };
            let matrices = (0..s * (s - 1) / 2)
                .map(|_| (0..n * n).map(|_| draw(&mut rng) as u32).collect())
                .collect();
            Instance::edges(s, n, combiner, matrices)?
        }
        Family::Geometric => {
            let points = (0..s)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            let x = draw(&mut rng) as f64;
                            let y = draw(&mut rng) as f64;
                            (x, y)
                        })
                        .collect()
                })
                .collect();
            Instance::geometric(s, n, points)?
        }
        Family::Product => {
            let arrays = (0..s)
                .map(|_| (0..n).map(|_| draw(&mut rng) as u32).collect())
                .collect();
            Instance::product(s, n, arrays)?
        }
    };
    Ok(inst.with_seed(id.seed()))
}

fn model_tag(inst: &Instance) -> &'static str {
    match inst.weights() {
        Weights::Tensor(_) => "tensor",
        Weights::Edges { combiner: Combiner::Sum, .. } => "edges sum",
        Weights::Edges { combiner: Combiner::RootOfSquares, .. } => "edges root",
        Weights::Geometric { .. } => "points",
        Weights::Product(_) => "product",
    }
}

fn write_rows<T: std::fmt::Display>(out: &mut String, values: &[T], width: usize) {
    for row in values.chunks(width) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
}

/// Serializes an instance to the text format.
pub fn write_instance(inst: &Instance) -> String {
    let (s, n) = (inst.s(), inst.n());
    let mut out = format!(
        "MAP {} {} {} {}\n{}\n",
        inst.family().code(),
        s,
        n,
        inst.seed(),
        model_tag(inst)
    );
    match inst.weights() {
        Weights::Tensor(t) => write_rows(&mut out, t, n),
        Weights::Edges { matrices, .. } => {
            for m in matrices {
                write_rows(&mut out, m, n);
            }
        }
        Weights::Geometric { points, .. } => {
            for part in points {
                for (x, y) in part {
                    let _ = writeln!(out, "{x} {y}");
                }
            }
        }
        Weights::Product(arrays) => {
            for a in arrays {
                write_rows(&mut out, a, n);
            }
        }
    }
    out
}

struct Tokens<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn err(&self, offset: usize, message: impl Into<String>) -> MapError {
        MapError::Parse { offset, message: message.into() }
    }

    fn next_token(&mut self) -> Option<(usize, &'a str)> {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < bytes.len() && !bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some((start, &self.text[start..self.pos]))
    }

    fn line(&mut self) -> Result<(usize, &'a str)> {
        let start = self.pos;
        let rest = &self.text[start..];
        let end = rest.find('\n').ok_or_else(|| self.err(start, "unterminated line"))?;
        self.pos = start + end + 1;
        Ok((start, rest[..end].trim_end_matches('\r')))
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let at = self.pos;
        let (offset, tok) = self
            .next_token()
            .ok_or_else(|| self.err(at, format!("truncated payload: expected {what}")))?;
        tok.parse()
            .map_err(|_| self.err(offset, format!("expected {what}, found '{tok}'")))
    }

    fn bounded(&mut self, what: &str, lo: u32, hi: u32) -> Result<u32> {
        let at = self.pos;
        let v: u32 = self.number(what)?;
        if v < lo || v > hi {
            return Err(self.err(at, format!("{what} {v} outside {lo}..={hi}")));
        }
        Ok(v)
    }
}

/// Parses the text format produced by [`write_instance`].
pub fn read_instance(text: &str) -> Result<Instance> {
    let mut tok = Tokens { text, pos: 0 };
    let (hoff, header) = tok.line()?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "MAP" {
        return Err(tok.err(hoff, format!("malformed header '{header}'")));
    }
    let family = Family::from_code(fields[1])
        .map_err(|_| tok.err(hoff, format!("unknown family code '{}'", fields[1])))?;
    let parse_field = |i: usize| -> Result<i64> {
        fields[i]
            .parse()
            .map_err(|_| tok.err(hoff, format!("header field '{}' is not an integer", fields[i])))
    };
    let (s, n, seed) = (parse_field(2)?, parse_field(3)?, parse_field(4)?);
    if s < 2 || n < 1 || s > 64 || n > 1 << 16 {
        return Err(tok.err(hoff, format!("unsupported shape s={s} n={n}")));
    }
    let seed = i32::try_from(seed).map_err(|_| tok.err(hoff, "seed out of 32-bit range"))?;
    let (s, n) = (s as usize, n as usize);

    let (toff, tag) = tok.line()?;
    let expected = match family {
        Family::Random => "tensor",
        Family::Clique => "edges sum",
        Family::SquareRoot => "edges root",
        Family::Geometric => "points",
        Family::Product => "product",
    };
    if tag.trim() != expected {
        return Err(tok.err(toff, format!("model tag '{tag}' does not match family {family}")));
    }

    let inst = match family {
        Family::Random => {
            let size = n
                .checked_pow(s as u32)
                .filter(|&x| x <= MAX_TENSOR)
                .ok_or_else(|| tok.err(hoff, "tensor too large"))?;
            let mut w = Vec::with_capacity(size);
            for _ in 0..size {
                w.push(tok.bounded("tensor weight", 0, 255)? as u8);
            }
            Instance::tensor(s, n, w)?
        }
        Family::Clique | Family::SquareRoot => {
            let combiner = if family == Family::Clique {
                Combiner::Sum
            } else {
                Combiner::RootOfSquares
            };
            let mut matrices = Vec::with_capacity(s * (s - 1) / 2);
            for _ in 0..s * (s - 1) / 2 {
                let mut m = Vec::with_capacity(n * n);
                for _ in 0..n * n {
                    m.push(tok.number::<u32>("edge weight")?);
                }
                matrices.push(m);
            }
            Instance::edges(s, n, combiner, matrices)?
        }
        Family::Geometric => {
            let mut points = Vec::with_capacity(s);
            for _ in 0..s {
                let mut part = Vec::with_capacity(n);
                for _ in 0..n {
                    let at = tok.pos;
                    let x: f64 = tok.number("x coordinate")?;
                    let y: f64 = tok.number("y coordinate")?;
                    if !x.is_finite() || !y.is_finite() || x < 0.0 || y < 0.0 {
                        return Err(tok.err(at, "point coordinates must be finite and non-negative"));
                    }
                    part.push((x, y));
                }
                points.push(part);
            }
            Instance::geometric(s, n, points)?
        }
        Family::Product => {
            let mut arrays = Vec::with_capacity(s);
            for _ in 0..s {
                let mut a = Vec::with_capacity(n);
                for _ in 0..n {
                    a.push(tok.bounded("product factor", 1, u32::MAX)?);
                }
                arrays.push(a);
            }
            Instance::product(s, n, arrays)?
        }
    };
    if let Some((offset, extra)) = tok.next_token() {
        return Err(tok.err(offset, format!("unexpected trailing token '{extra}'")));
    }
    Ok(inst.with_seed(seed))
}
