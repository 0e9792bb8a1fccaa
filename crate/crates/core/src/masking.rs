//! Level subsets and their expansion to 40×T input masks.
//!
//! A [`LevelMask`] selects book levels; each selected level keeps its four
//! feature rows (ask price, ask volume, bid price, bid volume) and every other
//! row is zeroed across all time steps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::{FEATURES, LEVELS};

/// Ten-bit level subset. Bit `k-1` set means level `k` is included.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LevelMask(u16);

impl LevelMask {
    pub const NONE: LevelMask = LevelMask(0);
    pub const ALL: LevelMask = LevelMask((1 << LEVELS) - 1);

    pub fn from_bits(bits: u16) -> Result<Self> {
        if bits > Self::ALL.0 {
            return Err(Error::arg(format!("mask bits {bits:#x} exceed ten levels")));
        }
        Ok(Self(bits))
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    /// Builds a mask from 1-based level numbers.
    pub fn from_levels<I: IntoIterator<Item = usize>>(levels: I) -> Result<Self> {
        let mut bits = 0u16;
        for level in levels {
            if !(1..=LEVELS).contains(&level) {
                return Err(Error::arg(format!("level {level} outside 1..={LEVELS}")));
            }
            bits |= 1 << (level - 1);
        }
        Ok(Self(bits))
    }

    pub fn single(level: usize) -> Result<Self> {
        Self::from_levels([level])
    }

    pub fn from_flags(flags: &[bool; LEVELS]) -> Self {
        let mut bits = 0;
        for (k, &f) in flags.iter().enumerate() {
            if f {
                bits |= 1 << k;
            }
        }
        Self(bits)
    }

    pub fn flags(self) -> [bool; LEVELS] {
        std::array::from_fn(|k| self.0 & (1 << k) != 0)
    }

    /// 0.0 / 1.0 per level, level 1 first.
    pub fn as_reals(self) -> [f64; LEVELS] {
        std::array::from_fn(|k| f64::from((self.0 >> k) & 1))
    }

    pub fn contains(self, level: usize) -> bool {
        (1..=LEVELS).contains(&level) && self.0 & (1 << (level - 1)) != 0
    }

    pub fn with(self, level: usize) -> Self {
        debug_assert!((1..=LEVELS).contains(&level));
        Self(self.0 | (1 << (level - 1)))
    }

    pub fn without(self, level: usize) -> Self {
        debug_assert!((1..=LEVELS).contains(&level));
        Self(self.0 & !(1 << (level - 1)))
    }

    pub fn and(self, other: LevelMask) -> Self {
        Self(self.0 & other.0)
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Included levels, ascending, 1-based.
    pub fn levels(self) -> impl Iterator<Item = usize> {
        (1..=LEVELS).filter(move |&k| self.contains(k))
    }

    /// Feature rows (0-based) belonging to included levels.
    pub fn rows(self) -> Vec<usize> {
        self.levels().flat_map(|k| 4 * (k - 1)..4 * k).collect()
    }

    pub fn hamming(self, other: LevelMask) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    /// All 1024 masks in bit order.
    pub fn all_masks() -> impl Iterator<Item = LevelMask> {
        (0..=Self::ALL.0).map(LevelMask)
    }
}

impl fmt::Display for LevelMask {
    /// Ten '0'/'1' characters, level 1 leftmost.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..LEVELS {
            f.write_str(if self.0 & (1 << k) != 0 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for LevelMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LevelMask({self})")
    }
}

impl FromStr for LevelMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != LEVELS {
            return Err(Error::arg(format!("mask '{s}' must have {LEVELS} characters")));
        }
        let mut bits = 0u16;
        for (k, c) in s.chars().enumerate() {
            match c {
                '1' => bits |= 1 << k,
                '0' => {}
                _ => return Err(Error::arg(format!("mask '{s}' contains '{c}'"))),
            }
        }
        Ok(Self(bits))
    }
}

impl Serialize for LevelMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LevelMask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// 40×T binary matrix; row `i` repeats the bit of level `i / 4 + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskMatrix(Matrix);

impl MaskMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

pub fn mask_matrix(s: LevelMask, t: usize) -> Result<MaskMatrix> {
    if t == 0 {
        return Err(Error::arg("window length T must be at least 1"));
    }
    let bits = s.as_reals();
    Ok(MaskMatrix(Matrix::from_fn(FEATURES, t, |i, _| bits[i / 4])))
}

/// Same mask built as the product `I1 · s · I2`, with `I1` the 40×10 row-to-level
/// incidence matrix and `I2` a 1×T row of ones.
pub fn mask_matrix_oracle(s: LevelMask, t: usize) -> Result<MaskMatrix> {
    if t == 0 {
        return Err(Error::arg("window length T must be at least 1"));
    }
    let incidence = Matrix::from_fn(FEATURES, LEVELS, |i, k| if k == i / 4 { 1.0 } else { 0.0 });
    let column = Matrix::from_vec(LEVELS, 1, s.as_reals().to_vec())?;
    let ones = Matrix::filled(1, t, 1.0);
    Ok(MaskMatrix(incidence.matmul(&column)?.matmul(&ones)?))
}

pub fn apply_mask(x: &Matrix, m: &MaskMatrix) -> Result<Matrix> {
    if x.rows() != FEATURES {
        return Err(Error::arg(format!("input has {} rows, expected {FEATURES}", x.rows())));
    }
    x.hadamard(&m.0)
}

pub fn mask_from_levels<I: IntoIterator<Item = usize>>(levels: I) -> Result<LevelMask> {
    LevelMask::from_levels(levels)
}
