//! Dense indexing of `V(k) = k^n`: the point `(x_1, ..., x_n)` sits at
//! `sum_a x_a q^a`, where each coordinate uses the field's coefficient
//! encoding. Read digit by digit this is the `F_p^{en}` mixed-radix index.

use crate::error::{Error, Result};
use crate::field::FieldElement;

/// Default cap on `q^n`.
pub const DEFAULT_GRID_CAP: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridShape {
    pub q: u32,
    pub n: usize,
}

impl GridShape {
    pub fn new(q: u32, n: usize, cap: u64) -> Result<Self> {
        let size = (q as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
        if size > cap {
            return Err(Error::GridTooLarge { size, cap });
        }
        Ok(GridShape { q, n })
    }

    pub fn size(&self) -> usize {
        (self.q as usize).pow(self.n as u32)
    }

    pub fn point(&self, mut index: usize) -> Vec<FieldElement> {
        let q = self.q as usize;
        (0..self.n)
            .map(|_| {
                let c = index % q;
                index /= q;
                FieldElement(c as u32)
            })
            .collect()
    }

    pub fn point_into(&self, mut index: usize, out: &mut [FieldElement]) {
        let q = self.q as usize;
        for c in out.iter_mut() {
            *c = FieldElement((index % q) as u32);
            index /= q;
        }
    }

    pub fn index(&self, point: &[FieldElement]) -> usize {
        point.iter().rev().fold(0usize, |acc, c| acc * self.q as usize + c.0 as usize)
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<FieldElement>> + '_ {
        (0..self.size()).map(move |i| self.point(i))
    }
}
