//! File formats.
//!
//! Polynomials: text is a header line `n q` followed by `n` lines holding
//! one decimal coefficient each; `q` and the coefficients may be wider than
//! a word (RNS inputs). The binary form is `NTTP`, a version byte, then
//! little-endian `u64` words `n`, `q`, `c_0 .. c_{n-1}`.
//!
//! Plans: one `n q psi variant` line per prime; blank lines and lines
//! starting with `#` are skipped.

use std::fs;
use std::path::Path;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::params::NttPlan;

pub const MAGIC: &[u8; 4] = b"NTTP";
pub const VERSION: u8 = 1;

/// A polynomial together with the modulus its coefficients live under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyFile {
    pub modulus: BigUint,
    pub coeffs: Vec<BigUint>,
}

impl PolyFile {
    pub fn from_words(q: u64, coeffs: &[u64]) -> Self {
        Self {
            modulus: BigUint::from(q),
            coeffs: coeffs.iter().map(|&c| BigUint::from(c)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Modulus and coefficients as machine words.
    pub fn to_words(&self) -> Result<(u64, Vec<u64>)> {
        let word = |x: &BigUint| {
            u64::try_from(x).map_err(|_| Error::ModulusTooLarge {
                bits: x.bits() as u32,
                max: 64,
            })
        };
        let q = word(&self.modulus)?;
        let coeffs = self.coeffs.iter().map(word).collect::<Result<_>>()?;
        Ok((q, coeffs))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.coeffs.len(), self.modulus);
        for c in &self.coeffs {
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `n q` header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: hline,
                msg: format!("expected `n q`, found `{header}`"),
            });
        }
        let n: usize = fields[0].parse().map_err(|e| Error::Parse {
            line: hline,
            msg: format!("bad length `{}`: {e}", fields[0]),
        })?;
        let modulus = parse_big(fields[1], hline, "modulus")?;
        if modulus < BigUint::from(2u32) {
            return Err(Error::Parse {
                line: hline,
                msg: format!("modulus {modulus} is below 2"),
            });
        }
        let mut coeffs = Vec::with_capacity(n);
        for (line, l) in lines {
            if coeffs.len() == n {
                return Err(Error::Parse {
                    line,
                    msg: format!("more than {n} coefficients"),
                });
            }
            let c = parse_big(l, line, "coefficient")?;
            if c >= modulus {
                return Err(Error::Parse {
                    line,
                    msg: format!("coefficient {c} is not below {modulus}"),
                });
            }
            coeffs.push(c);
        }
        if coeffs.len() != n {
            return Err(Error::Parse {
                line: text.lines().count() + 1,
                msg: format!("expected {n} coefficients, found {}", coeffs.len()),
            });
        }
        Ok(Self { modulus, coeffs })
    }

    pub fn to_binary(&self) -> Result<Vec<u8>> {
        let (q, coeffs) = self.to_words()?;
        let mut out = Vec::with_capacity(5 + 8 * (coeffs.len() + 2));
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        for w in [coeffs.len() as u64, q].into_iter().chain(coeffs) {
            out.extend_from_slice(&w.to_le_bytes());
        }
        Ok(out)
    }

    pub fn parse_binary(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: String| Error::Parse { line: 0, msg };
        if bytes.len() < 5 || &bytes[..4] != MAGIC {
            return Err(bad("missing NTTP magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(bad(format!("unsupported version {}", bytes[4])));
        }
        let body = &bytes[5..];
        if !body.len().is_multiple_of(8) || body.len() < 16 {
            return Err(bad(format!("truncated body of {} bytes", body.len())));
        }
        let words: Vec<u64> = body
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let (n, q) = (words[0], words[1]);
        if words.len() as u64 - 2 != n {
            return Err(bad(format!(
                "header says {n} words, found {}",
                words.len() - 2
            )));
        }
        if let Some((i, c)) = words[2..].iter().enumerate().find(|(_, &c)| c >= q) {
            return Err(bad(format!("coefficient {i} is {c}, not below {q}")));
        }
        Ok(Self::from_words(q, &words[2..]))
    }

    /// Accepts either format, chosen by the magic bytes.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(MAGIC) {
            return Self::parse_binary(bytes);
        }
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
            line: 0,
            msg: format!("not UTF-8 text: {e}"),
        })?;
        Self::parse_text(text)
    }
}

fn parse_big(s: &str, line: usize, what: &str) -> Result<BigUint> {
    s.parse::<BigUint>().map_err(|e| Error::Parse {
        line,
        msg: format!("bad {what} `{s}`: {e}"),
    })
}

/// Parses plan lines, reporting failures with their line number.
pub fn parse_plans(text: &str) -> Result<Vec<NttPlan>> {
    let mut plans = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let plan = NttPlan::from_line(l).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::Parse { line: i + 1, msg },
            other => Error::Parse {
                line: i + 1,
                msg: other.to_string(),
            },
        })?;
        plans.push(plan);
    }
    if plans.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no plan lines".into(),
        });
    }
    Ok(plans)
}

pub fn plans_to_text(plans: &[NttPlan]) -> String {
    plans.iter().map(|p| p.to_line() + "\n").collect()
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

pub fn read_plans(path: &Path) -> Result<Vec<NttPlan>> {
    let bytes = read_file(path)?;
    let text = String::from_utf8_lossy(&bytes);
    parse_plans(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

pub fn read_poly(path: &Path) -> Result<PolyFile> {
    PolyFile::parse(&read_file(path)?).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::Variant;
    use crate::params::{build_plan, PrimeSource};

    #[test]
    fn text_roundtrip() {
        let p = PolyFile::from_words(97, &[0, 5, 96, 1]);
        let text = p.to_text();
        assert_eq!(text, "4 97\n0\n5\n96\n1\n");
        assert_eq!(PolyFile::parse_text(&text).unwrap(), p);
        assert_eq!(PolyFile::parse(text.as_bytes()).unwrap(), p);
    }

    #[test]
    fn wide_text() {
        let text = "2 340282366920938463463374607431768211457\n340282366920938463463374607431768211456\n7\n";
        let p = PolyFile::parse_text(text).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.to_words().is_err());
        assert!(p.to_binary().is_err());
    }

    #[test]
    fn binary_roundtrip() {
        let p = PolyFile::from_words(994_705_409, &[1, 2, 994_705_408, 0]);
        let bytes = p.to_binary().unwrap();
        assert_eq!(&bytes[..5], b"NTTP\x01");
        assert_eq!(bytes.len(), 5 + 8 * 6);
        assert_eq!(PolyFile::parse(&bytes).unwrap(), p);
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(PolyFile::parse_binary(&bad).is_err());
        assert!(PolyFile::parse_binary(&bytes[..bytes.len() - 8]).is_err());
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let line_of = |t: &str| match PolyFile::parse_text(t) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line_of("2 97\n1\nx\n"), 3);
        assert_eq!(line_of("2 97\n1\n97\n"), 3);
        assert_eq!(line_of("2\n1\n2\n"), 1);
        assert_eq!(line_of("2 97\n1\n2\n3\n"), 4);
        assert_eq!(line_of("3 97\n1\n2\n"), 4);
        assert_eq!(line_of(""), 1);
    }

    #[test]
    fn plan_lines() {
        let a = build_plan(
            16,
            PrimeSource::Generate { bits: 20, seed: 1 },
            Variant::Proposed,
        )
        .unwrap();
        let b = build_plan(
            16,
            PrimeSource::Generate { bits: 20, seed: 9 },
            Variant::Dhem,
        )
        .unwrap();
        let text = format!("# basis\n{}\n", plans_to_text(&[a.clone(), b.clone()]));
        let back = parse_plans(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].to_line(), a.to_line());
        assert_eq!(back[1].to_line(), b.to_line());
        assert!(matches!(
            parse_plans("16 97 3 proposed\n16 12289 nope proposed\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_plans(&format!("{}\n16 97 x proposed\n", a.to_line())),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
