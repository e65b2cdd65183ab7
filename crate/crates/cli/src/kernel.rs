//! Kernel vector files: a `# kernel mod <l hex> dim <N>` header, then one
//! lowercase hex coordinate per line.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::Num;

#[derive(Debug, PartialEq, Eq)]
pub struct KernelFile {
    pub ell: BigUint,
    pub coords: Vec<BigUint>,
}

impl KernelFile {
    pub fn render(&self) -> String {
        let mut out = format!("# kernel mod {:x} dim {}\n", self.ell, self.coords.len());
        for c in &self.coords {
            writeln!(out, "{c:x}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<KernelFile, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty kernel file")?;
        let words: Vec<&str> = header.split_whitespace().collect();
        let (ell, dim) = match words.as_slice() {
            ["#", "kernel", "mod", ell, "dim", dim] => (*ell, *dim),
            _ => return Err(format!("bad kernel header `{header}`")),
        };
        let ell = parse_hex(ell).ok_or_else(|| format!("bad modulus `{ell}`"))?;
        let dim: usize = dim.parse().map_err(|_| format!("bad dimension `{dim}`"))?;
        let coords = lines
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| parse_hex(l.trim()).ok_or_else(|| format!("line {}: bad coordinate `{l}`", i + 2)))
            .collect::<Result<Vec<_>, _>>()?;
        if coords.len() != dim {
            return Err(format!("header says dim {dim}, found {} coordinates", coords.len()));
        }
        Ok(KernelFile { ell, coords })
    }

    pub fn load(path: &Path) -> std::io::Result<Result<KernelFile, String>> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }
}

pub fn parse_hex(s: &str) -> Option<BigUint> {
    let s = s.strip_prefix("0x").unwrap_or(s);
    if s.is_empty() {
        return None;
    }
    BigUint::from_str_radix(s, 16).ok()
}
