use serde::{Deserialize, Serialize};

use super::mask;
use crate::{Error, Result};

/// Exhaustive truth table of a function `{0,1}^in → {0,1}^out`.
///
/// The table is always fully materialised: a superposition query evaluates
/// the function on every input at once, so lazy sampling has no meaning here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionTable {
    in_width: usize,
    out_width: usize,
    entries: Vec<u64>,
}

impl FunctionTable {
    pub fn new(in_width: usize, out_width: usize, entries: Vec<u64>) -> Result<Self> {
        if in_width == 0 || out_width == 0 {
            return Err(Error::EmptySegment);
        }
        if entries.len() != 1usize << in_width {
            return Err(Error::WidthMismatch {
                context: "function table length",
                expected: 1usize << in_width,
                got: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&v| v > mask(out_width)) {
            return Err(Error::ValueOutOfRange {
                value: bad,
                width: out_width,
            });
        }
        Ok(FunctionTable {
            in_width,
            out_width,
            entries,
        })
    }

    pub fn from_fn(in_width: usize, out_width: usize, f: impl Fn(u64) -> u64) -> Result<Self> {
        let entries = (0..1u64 << in_width).map(f).collect();
        FunctionTable::new(in_width, out_width, entries)
    }

    /// The all-zero function; XORing it is the identity.
    pub fn zero(in_width: usize, out_width: usize) -> Self {
        FunctionTable {
            in_width,
            out_width,
            entries: vec![0; 1 << in_width],
        }
    }

    pub fn constant(in_width: usize, out_width: usize, value: u64) -> Result<Self> {
        FunctionTable::new(in_width, out_width, vec![value; 1 << in_width])
    }

    pub fn identity(width: usize) -> Self {
        FunctionTable {
            in_width: width,
            out_width: width,
            entries: (0..1u64 << width).collect(),
        }
    }

    pub fn in_width(&self) -> usize {
        self.in_width
    }

    pub fn out_width(&self) -> usize {
        self.out_width
    }

    #[inline]
    pub fn get(&self, x: u64) -> u64 {
        self.entries[x as usize]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// `self ∘ p`: the table of `x ↦ f(p(x))`.
    pub fn compose_permutation(&self, p: &PermutationTable) -> Result<FunctionTable> {
        if p.width() != self.in_width {
            return Err(Error::WidthMismatch {
                context: "permutation pre-composition",
                expected: self.in_width,
                got: p.width(),
            });
        }
        let entries = (0..1u64 << self.in_width)
            .map(|x| self.get(p.get(x)))
            .collect();
        FunctionTable::new(self.in_width, self.out_width, entries)
    }

    /// Hex dump, one entry per line, for debugging.
    pub fn hex_dump(&self) -> String {
        use std::fmt::Write;
        let in_digits = (self.in_width + 3) / 4;
        let out_digits = (self.out_width + 3) / 4;
        let mut out = String::new();
        for (x, y) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{x:0in_digits$x} {y:0out_digits$x}");
        }
        out
    }
}

/// Exhaustive table of a bijection on `{0,…,2^width−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationTable {
    width: usize,
    entries: Vec<u64>,
}

impl PermutationTable {
    pub fn new(width: usize, entries: Vec<u64>) -> Result<Self> {
        if width == 0 {
            return Err(Error::EmptySegment);
        }
        if entries.len() != 1usize << width {
            return Err(Error::WidthMismatch {
                context: "permutation table length",
                expected: 1usize << width,
                got: entries.len(),
            });
        }
        let mut seen = vec![false; entries.len()];
        for &v in &entries {
            if v > mask(width) || seen[v as usize] {
                return Err(Error::NotABijection);
            }
            seen[v as usize] = true;
        }
        Ok(PermutationTable { width, entries })
    }

    pub fn identity(width: usize) -> Self {
        PermutationTable {
            width,
            entries: (0..1u64 << width).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, x: u64) -> u64 {
        self.entries[x as usize]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn inverse(&self) -> PermutationTable {
        let mut entries = vec![0u64; self.entries.len()];
        for (x, &y) in self.entries.iter().enumerate() {
            entries[y as usize] = x as u64;
        }
        PermutationTable {
            width: self.width,
            entries,
        }
    }
}
