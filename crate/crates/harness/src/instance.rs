//! Text instance and candidate files.
//!
//! ```text
//! phasesync-instance v1
//! n=3
//! sigma=0.5
//! kind=complex-gaussian
//! seed=42
//! [matrix]
//! re,im            (upper triangle of C, row-major, n(n+1)/2 lines)
//! [signal]
//! re,im            (n lines; section optional)
//! ```
//!
//! A candidate file is `phasesync-candidate v1`, `n=…`, `[vector]` and `n`
//! `re,im` lines.

use std::fmt::Write as _;
use std::path::Path;

use phasesync::lina::{ComplexVector, HermitianMatrix, C64};
use phasesync::model::{MeasurementModel, NoiseKind, SignalVector};

use crate::error::{HarnessError, Result};

const INSTANCE_MAGIC: &str = "phasesync-instance v1";
const CANDIDATE_MAGIC: &str = "phasesync-candidate v1";

#[derive(Debug, Clone)]
pub struct Instance {
    pub sigma: f64,
    pub kind: NoiseKind,
    pub seed: u64,
    pub c: HermitianMatrix,
    pub signal: Option<SignalVector>,
}

impl Instance {
    pub fn from_model(model: &MeasurementModel, seed: u64) -> Self {
        Self {
            sigma: model.sigma,
            kind: model.noise.kind(),
            seed,
            c: model.c().clone(),
            signal: Some(model.signal.clone()),
        }
    }

    pub fn n(&self) -> usize {
        self.c.n()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{INSTANCE_MAGIC}");
        let _ = writeln!(s, "n={}", self.n());
        let _ = writeln!(s, "sigma={:?}", self.sigma);
        let _ = writeln!(s, "kind={}", self.kind);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "[matrix]");
        for v in self.c.upper_packed() {
            push_complex(&mut s, v);
        }
        if let Some(z) = &self.signal {
            let _ = writeln!(s, "[signal]");
            for &v in z.vector().iter() {
                push_complex(&mut s, v);
            }
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| HarnessError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// `origin` only labels errors.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = Lines::new(text, origin);
        lines.expect(INSTANCE_MAGIC)?;
        let n: usize = lines.key("n")?;
        let sigma: f64 = lines.key("sigma")?;
        let kind: NoiseKind = lines.key("kind")?;
        let seed: u64 = lines.key("seed")?;
        lines.expect("[matrix]")?;
        let packed = lines.complex_block(n * (n + 1) / 2)?;
        let c = HermitianMatrix::from_upper_packed(n, &packed)
            .map_err(|e| lines.error(format!("invalid matrix: {e}")))?;
        let signal = if lines.peek().is_some() {
            lines.expect("[signal]")?;
            let z = lines.complex_block(n)?;
            let v = ComplexVector::new(z).map_err(|e| lines.error(e.to_string()))?;
            Some(SignalVector::new(v).map_err(|e| lines.error(format!("invalid signal: {e}")))?)
        } else {
            None
        };
        lines.end()?;
        Ok(Self {
            sigma,
            kind,
            seed,
            c,
            signal,
        })
    }
}

pub fn candidate_text(x: &ComplexVector) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CANDIDATE_MAGIC}");
    let _ = writeln!(s, "n={}", x.len());
    let _ = writeln!(s, "[vector]");
    for &v in x.iter() {
        push_complex(&mut s, v);
    }
    s
}

pub fn write_candidate(x: &ComplexVector, path: &Path) -> Result<()> {
    std::fs::write(path, candidate_text(x)).map_err(|e| HarnessError::io(path, e))
}

pub fn read_candidate(path: &Path) -> Result<ComplexVector> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut lines = Lines::new(&text, path);
    lines.expect(CANDIDATE_MAGIC)?;
    let n: usize = lines.key("n")?;
    lines.expect("[vector]")?;
    let v = lines.complex_block(n)?;
    lines.end()?;
    ComplexVector::new(v).map_err(|e| lines.error(e.to_string()))
}

fn push_complex(s: &mut String, v: C64) {
    let _ = writeln!(s, "{:?},{:?}", v.re, v.im);
}

/// Line cursor that skips blank lines and tracks 1-based line numbers.
struct Lines<'a> {
    items: Vec<(u64, &'a str)>,
    pos: usize,
    origin: &'a Path,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, origin: &'a Path) -> Self {
        let items = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i as u64 + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Self { items, pos: 0, origin }
    }

    fn line_no(&self) -> u64 {
        self.items
            .get(self.pos)
            .or(self.items.last())
            .map_or(1, |(n, _)| *n)
    }

    fn error(&self, message: impl Into<String>) -> HarnessError {
        HarnessError::parse(self.origin, self.line_no(), message)
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|(_, l)| *l)
    }

    fn next(&mut self, what: &str) -> Result<&'a str> {
        let l = self
            .peek()
            .ok_or_else(|| self.error(format!("unexpected end of file, expected {what}")))?;
        self.pos += 1;
        Ok(l)
    }

    fn expect(&mut self, literal: &str) -> Result<()> {
        let l = self.next(literal)?;
        if l != literal {
            self.pos -= 1;
            return Err(self.error(format!("expected `{literal}`, found `{l}`")));
        }
        Ok(())
    }

    fn key<T: std::str::FromStr>(&mut self, name: &str) -> Result<T> {
        let l = self.next(name)?;
        let value = l
            .strip_prefix(name)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| {
                self.pos -= 1;
                self.error(format!("expected `{name}=…`, found `{l}`"))
            })?;
        value.trim().parse().map_err(|_| {
            self.pos -= 1;
            self.error(format!("bad value `{value}` for `{name}`"))
        })
    }

    fn complex_block(&mut self, count: usize) -> Result<Vec<C64>> {
        (0..count)
            .map(|_| {
                let l = self.next("a `re,im` line")?;
                let parsed = l
                    .split_once(',')
                    .and_then(|(a, b)| Some(C64::new(a.trim().parse().ok()?, b.trim().parse().ok()?)));
                parsed.ok_or_else(|| {
                    self.pos -= 1;
                    self.error(format!("expected `re,im`, found `{l}`"))
                })
            })
            .collect()
    }

    fn end(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(l) => Err(self.error(format!("unexpected trailing line `{l}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_round_trip() {
        let model = MeasurementModel::sample(5, 0.7, NoiseKind::Rademacher, 3).unwrap();
        let inst = Instance::from_model(&model, 3);
        let text = inst.to_text();
        assert!(text.starts_with("phasesync-instance v1\nn=5\nsigma=0.7\nkind=rademacher\nseed=3\n[matrix]\n"));
        let back = Instance::parse(&text, Path::new("mem")).unwrap();
        assert_eq!(back.c, inst.c);
        assert_eq!(back.signal.unwrap().vector(), model.signal.vector());
        assert_eq!(back.sigma.to_bits(), 0.7f64.to_bits());
    }

    #[test]
    fn signal_section_is_optional() {
        let model = MeasurementModel::sample(3, 0.1, NoiseKind::ComplexGaussian, 1).unwrap();
        let mut inst = Instance::from_model(&model, 1);
        inst.signal = None;
        let back = Instance::parse(&inst.to_text(), Path::new("mem")).unwrap();
        assert!(back.signal.is_none());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let model = MeasurementModel::sample(3, 0.1, NoiseKind::ComplexGaussian, 1).unwrap();
        let text = Instance::from_model(&model, 1).to_text();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[7] = "1.0;2.0";
        match Instance::parse(&lines.join("\n"), Path::new("mem")) {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
        let truncated: String = text.lines().take(9).collect::<Vec<_>>().join("\n");
        assert!(matches!(
            Instance::parse(&truncated, Path::new("mem")),
            Err(HarnessError::Parse { .. })
        ));
        assert!(matches!(
            Instance::parse("phasesync-instance v1\nn=x\n", Path::new("mem")),
            Err(HarnessError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn candidate_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        let x = SignalVector::sample(4, 2).unwrap().vector().clone();
        write_candidate(&x, &path).unwrap();
        assert_eq!(read_candidate(&path).unwrap(), x);
    }
}
