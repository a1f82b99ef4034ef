use std::fmt;

use super::ConstructError;

/// A pair of equal-length bit strings; bit 1 is the most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EqInstance {
    pub y: Vec<u8>,
    pub z: Vec<u8>,
}

impl EqInstance {
    pub fn new(y: Vec<u8>, z: Vec<u8>) -> Result<EqInstance, ConstructError> {
        if y.len() != z.len() || y.is_empty() {
            return Err(ConstructError::BadInstance(format!("lengths {} and {}", y.len(), z.len())));
        }
        if y.iter().chain(&z).any(|&b| b > 1) {
            return Err(ConstructError::BadInstance("bits must be 0 or 1".into()));
        }
        Ok(EqInstance { y, z })
    }

    pub fn parse(y: &str, z: &str) -> Result<EqInstance, ConstructError> {
        EqInstance::new(parse_bits(y)?, parse_bits(z)?)
    }

    /// Instance from two integers whose binary expansions (MSB first, `m` bits) are y and z.
    pub fn from_ints(m: usize, y: u64, z: u64) -> EqInstance {
        EqInstance { y: int_bits(m, y), z: int_bits(m, z) }
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }

    /// 1 iff y = z.
    pub fn eq_truth(&self) -> u8 {
        u8::from(self.y == self.z)
    }

    /// `y_i` for 1-based `i`.
    pub fn yb(&self, i: usize) -> u8 {
        self.y[i - 1]
    }

    pub fn zb(&self, i: usize) -> u8 {
        self.z[i - 1]
    }
}

pub fn parse_bits(s: &str) -> Result<Vec<u8>, ConstructError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(ConstructError::BadInstance(format!("not a bit string: {s:?}"))),
        })
        .collect()
}

pub fn int_bits(m: usize, v: u64) -> Vec<u8> {
    (0..m).map(|i| ((v >> (m - 1 - i)) & 1) as u8).collect()
}

pub fn bits_int(b: &[u8]) -> u64 {
    b.iter().fold(0, |acc, &x| (acc << 1) | x as u64)
}

pub fn bits_str(b: &[u8]) -> String {
    b.iter().map(|&x| if x == 1 { '1' } else { '0' }).collect()
}

impl fmt::Display for EqInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y={} z={}", bits_str(&self.y), bits_str(&self.z))
    }
}
