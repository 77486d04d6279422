//! Low-discrepancy point sequence with 52 output bits per coordinate,
//! generated by gray-code stepping over per-dimension direction numbers.
//! Index 0 is the all-zeros point and is never emitted: enumeration starts at
//! index 1, and `skip_to` jumps straight to any index without stepping
//! through predecessors.

use crate::{Error, Result};

mod table {
    include!("joekuo_table.rs");
}

/// Output bits per coordinate; values are dyadic rationals k / 2^52.
pub const BITS: u32 = 52;

/// Highest supported dimension (1 ladder dimension + 49 table rows).
pub const MAX_DIMENSION: usize = 50;

const SCALE: f64 = 1.0 / ((1u64 << BITS) as f64);

/// Direction numbers for one dimension: 52 values, each with its lowest set
/// bit at position BITS-1-k, making every partial XOR nonzero.
fn direction_numbers(dim_index: usize) -> Vec<u64> {
    let mut v = vec![0u64; BITS as usize];
    if dim_index == 0 {
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = 1u64 << (BITS as usize - 1 - k);
        }
        return v;
    }
    let (poly, init) = table::DIRECTIONS[dim_index - 1];
    let s = init.len();
    for (k, &m) in init.iter().enumerate() {
        v[k] = m << (BITS as usize - 1 - k);
    }
    for k in s..BITS as usize {
        let mut vk = v[k - s] ^ (v[k - s] >> s);
        for i in 1..s {
            if (poly >> (s - i)) & 1 == 1 {
                vk ^= v[k - i];
            }
        }
        v[k] = vk;
    }
    v
}

/// Stateful generator over a fixed dimension. `index` is the index of the
/// next point to be emitted.
#[derive(Clone, Debug)]
pub struct SobolSequence {
    dim: usize,
    index: u64,
    state: Vec<u64>,
    directions: Vec<Vec<u64>>,
}

impl SobolSequence {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIMENSION {
            return Err(Error::InvalidArgument(format!(
                "dimension {dim} outside 1..={MAX_DIMENSION}"
            )));
        }
        let mut seq = SobolSequence {
            dim,
            index: 0,
            state: vec![0; dim],
            directions: (0..dim).map(direction_numbers).collect(),
        };
        seq.skip_to(1)?;
        Ok(seq)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the point the next `next_point` call will emit.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Position the sequence so the next emitted point has this index.
    /// Index 0 (the all-zeros point) is excluded from enumeration.
    pub fn skip_to(&mut self, index: u64) -> Result<()> {
        if index == 0 {
            return Err(Error::InvalidArgument(
                "point indices start at 1; index 0 is the skipped origin".into(),
            ));
        }
        if index >= 1u64 << BITS {
            return Err(Error::InvalidArgument(format!(
                "index {index} exceeds the {BITS}-bit sequence length"
            )));
        }
        // Direct gray-code composition of the state at `index`.
        let gray = index ^ (index >> 1);
        for (d, slot) in self.state.iter_mut().enumerate() {
            let mut x = 0u64;
            for k in 0..BITS as usize {
                if (gray >> k) & 1 == 1 {
                    x ^= self.directions[d][k];
                }
            }
            *slot = x;
        }
        self.index = index;
        Ok(())
    }

    /// Write the current point into `out` and advance by one step.
    pub fn next_point(&mut self, out: &mut [f64]) -> Result<()> {
        if out.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "output slice has {} slots for dimension {}",
                out.len(),
                self.dim
            )));
        }
        if self.index >= 1u64 << BITS {
            return Err(Error::InvalidArgument(
                "sequence exhausted its 52-bit index range".into(),
            ));
        }
        for (slot, &x) in out.iter_mut().zip(&self.state) {
            *slot = x as f64 * SCALE;
        }
        // Gray-code step: flip the direction picked by the lowest set bit of
        // the next index.
        let step = self.index + 1;
        let k = step.trailing_zeros() as usize;
        if k < BITS as usize {
            for (d, slot) in self.state.iter_mut().enumerate() {
                *slot ^= self.directions[d][k];
            }
        }
        self.index = step;
        Ok(())
    }
}

/// `count` consecutive points starting at `start_index` (which must be at
/// least 1), each a length-`dim` vector in [0, 1).
pub fn sobol_points(dim: usize, start_index: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    let mut seq = SobolSequence::new(dim)?;
    seq.skip_to(start_index)?;
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0.0; dim];
    for _ in 0..count {
        seq.next_point(&mut buf)?;
        out.push(buf.clone());
    }
    Ok(out)
}
