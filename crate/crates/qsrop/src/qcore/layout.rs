use serde::{Deserialize, Serialize};

use super::mask;
use crate::{Error, Result};

/// One named, contiguous block of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub width: usize,
}

/// An ordered split of a register into disjoint, contiguous segments.
///
/// Segment 0 occupies the least-significant bits, so the basis index of a
/// joint value is `Σ value_k · 2^offset_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    segments: Vec<Segment>,
    total_qubits: usize,
}

impl RegisterLayout {
    /// Build a layout from `(name, width)` pairs under a qubit cap.
    pub fn new(segments: &[(&str, usize)], cap: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(segments.len());
        let mut offset = 0usize;
        for (name, width) in segments {
            if *width == 0 {
                return Err(Error::EmptySegment);
            }
            if out.iter().any(|s: &Segment| s.name == *name) {
                return Err(Error::DuplicateSegment(name.to_string()));
            }
            out.push(Segment {
                name: name.to_string(),
                offset,
                width: *width,
            });
            offset += width;
        }
        if offset > cap || offset > 63 {
            return Err(Error::QubitCapExceeded {
                requested: offset,
                cap,
            });
        }
        Ok(RegisterLayout {
            segments: out,
            total_qubits: offset,
        })
    }

    pub fn total_qubits(&self) -> usize {
        self.total_qubits
    }

    pub fn dimension(&self) -> usize {
        1usize << self.total_qubits
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, name: &str) -> Result<&Segment> {
        self.segments
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownSegment(name.to_string()))
    }

    /// Resolve an ordered list of segment names into a bit-gathering view.
    /// The first name contributes the least-significant bits of the joined
    /// value.
    pub fn span(&self, names: &[&str]) -> Result<Span> {
        let mut parts = Vec::with_capacity(names.len());
        let mut width = 0usize;
        for name in names {
            let seg = self.segment(name)?;
            parts.push((seg.offset, seg.width));
            width += seg.width;
        }
        Ok(Span { parts, width })
    }

    /// True when the two spans touch no common qubit.
    pub fn disjoint(a: &Span, b: &Span) -> bool {
        a.register_mask() & b.register_mask() == 0
    }
}

/// A view over one or more segments, used to read and write joint values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    parts: Vec<(usize, usize)>,
    width: usize,
}

impl Span {
    pub fn width(&self) -> usize {
        self.width
    }

    /// Read the span's value out of a basis index.
    #[inline]
    pub fn extract(&self, index: u64) -> u64 {
        let mut v = 0u64;
        let mut shift = 0usize;
        for &(offset, width) in &self.parts {
            v |= ((index >> offset) & mask(width)) << shift;
            shift += width;
        }
        v
    }

    /// Scatter a span value into register bit positions.
    #[inline]
    pub fn scatter(&self, value: u64) -> u64 {
        let mut out = 0u64;
        let mut shift = 0usize;
        for &(offset, width) in &self.parts {
            out |= ((value >> shift) & mask(width)) << offset;
            shift += width;
        }
        out
    }

    /// Basis index with the span's bits XORed by `value`.
    #[inline]
    pub fn xor_into(&self, index: u64, value: u64) -> u64 {
        index ^ self.scatter(value)
    }

    fn register_mask(&self) -> u64 {
        let mut m = 0u64;
        for &(offset, width) in &self.parts {
            m |= mask(width) << offset;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_accumulate_from_lsb() {
        let l = RegisterLayout::new(&[("m", 2), ("c", 3)], 22).unwrap();
        assert_eq!(l.segment("m").unwrap().offset, 0);
        assert_eq!(l.segment("c").unwrap().offset, 2);
        assert_eq!(l.total_qubits(), 5);
        assert_eq!(l.dimension(), 32);
    }

    #[test]
    fn enforces_cap_and_uniqueness() {
        assert!(matches!(
            RegisterLayout::new(&[("a", 23)], 22),
            Err(Error::QubitCapExceeded { .. })
        ));
        assert!(RegisterLayout::new(&[("a", 1), ("a", 1)], 22).is_err());
        assert!(RegisterLayout::new(&[("a", 0)], 22).is_err());
    }

    #[test]
    fn span_round_trips_values() {
        let l = RegisterLayout::new(&[("a", 2), ("b", 3), ("c", 1)], 22).unwrap();
        let span = l.span(&["a", "c"]).unwrap();
        assert_eq!(span.width(), 3);
        // index bits: c b2 b1 b0 a1 a0
        let index = 0b1_000_10u64;
        assert_eq!(span.extract(index), 0b1_10);
        assert_eq!(span.scatter(0b1_10), index);
        assert_eq!(span.xor_into(index, 0b1_10), 0);
    }

    #[test]
    fn unknown_segment_is_an_error() {
        let l = RegisterLayout::new(&[("a", 2)], 22).unwrap();
        assert!(matches!(l.span(&["z"]), Err(Error::UnknownSegment(_))));
    }
}
