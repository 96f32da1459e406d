use serde::{Deserialize, Serialize};

use super::mask;
use crate::{Error, Result};

/// A fixed-width bit string, the classical values `x`, `y`, `m`, `c`, `τ`, …
///
/// Invariant: `value < 2^width`, `1 ≤ width ≤ 63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitString {
    width: usize,
    value: u64,
}

impl BitString {
    pub fn new(width: usize, value: u64) -> Result<Self> {
        if width == 0 {
            return Err(Error::EmptySegment);
        }
        if width > 63 || value > mask(width) {
            return Err(Error::ValueOutOfRange { value, width });
        }
        Ok(BitString { width, value })
    }

    pub fn zero(width: usize) -> Self {
        BitString { width, value: 0 }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn xor(&self, other: &BitString) -> Result<Self> {
        if self.width != other.width {
            return Err(Error::WidthMismatch {
                context: "xor of bit strings",
                expected: self.width,
                got: other.width,
            });
        }
        Ok(BitString {
            width: self.width,
            value: self.value ^ other.value,
        })
    }

    /// Binary rendering, most-significant bit first.
    pub fn bits(&self) -> String {
        (0..self.width)
            .rev()
            .map(|b| if self.value >> b & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_values() {
        assert!(BitString::new(3, 8).is_err());
        assert!(BitString::new(3, 7).is_ok());
        assert!(BitString::new(0, 0).is_err());
    }

    #[test]
    fn renders_msb_first() {
        assert_eq!(BitString::new(4, 0b0110).unwrap().bits(), "0110");
    }

    #[test]
    fn xor_requires_equal_widths() {
        let a = BitString::new(4, 0b0101).unwrap();
        let b = BitString::new(4, 0b0011).unwrap();
        assert_eq!(a.xor(&b).unwrap().value(), 0b0110);
        assert!(a.xor(&BitString::new(3, 0).unwrap()).is_err());
    }
}
