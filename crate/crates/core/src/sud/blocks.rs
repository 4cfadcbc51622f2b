use super::dyadic::DyadicRational;
use crate::error::{Error, Result};

/// Largest block index that gets fully materialised; `V_3 = 2^19` values is
/// the last size that fits comfortably in memory.
pub const MAX_MATERIALIZED_BLOCK: u32 = 3;

/// The unique writing of `n >= 1` as `n = k * 2^i + 2^(i-1) - 2` with
/// `i >= 1`, `k >= 0`. The exponent comes from the dyadic part of `n + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexDecomposition {
    pub i: u32,
    pub k: u64,
}

impl IndexDecomposition {
    pub fn of(n: u64) -> Self {
        debug_assert!(n >= 1);
        let m = n + 2;
        let i = m.trailing_zeros() + 1;
        let k = ((m >> (i - 1)) - 1) / 2;
        IndexDecomposition { i, k }
    }

    pub fn recompose(&self) -> u64 {
        let v = (self.k as u128) * (1u128 << self.i) + (1u128 << (self.i - 1)) - 2;
        v as u64
    }
}

/// The residue split `k = r * 2^(i^2) + s (mod 2 * 2^(2 i^2))` with
/// `0 <= r <= 2 * 2^(i^2) - 1` and `1 <= s <= 2^(i^2)`. The residue 0 maps to
/// the top slot `(r, s) = (2 * 2^(i^2) - 1, 2^(i^2))`, forced by `s >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub r: u128,
    pub s: u128,
}

impl BlockDecomposition {
    pub fn of(k: u64, i: u32) -> Result<Self> {
        let u = block_exponent(i);
        if u <= 63 {
            let modulus = 1u128 << (2 * u + 1);
            let mut m = (k as u128) % modulus;
            if m == 0 {
                m = modulus;
            }
            let pow_u = 1u128 << u;
            let s = ((m - 1) % pow_u) + 1;
            let r = (m - s) >> u;
            return Ok(BlockDecomposition { r, s });
        }
        // The block length dwarfs any 64-bit k; no wrap-around happens.
        if k == 0 {
            if u >= 127 {
                return Err(Error::ExactOverflow {
                    context: "block decomposition",
                    i,
                });
            }
            return Ok(BlockDecomposition {
                r: (1u128 << (u + 1)) - 1,
                s: 1u128 << u,
            });
        }
        Ok(BlockDecomposition {
            r: 0,
            s: k as u128,
        })
    }
}

/// `u = i^2`, the denominator exponent of block `i`.
pub fn block_exponent(i: u32) -> u32 {
    i * i
}

/// `V_i = 2 * 2^(2 i^2)`, the block length. Only valid while it fits `u64`.
pub fn block_length(i: u32) -> Result<u64> {
    let u = block_exponent(i);
    if 2 * u + 1 >= 64 {
        return Err(Error::ExactOverflow {
            context: "block length",
            i,
        });
    }
    Ok(1u64 << (2 * u + 1))
}

/// Value of the digital sequence at block position `k` of block `i`:
/// `r s / 2^(i^2)` on the lower half of the `r` range and
/// `r s / 2^(i^2) + s / 2^(i^2)` on the upper half, reduced mod 1.
pub fn block_term(k: u64, i: u32) -> Result<DyadicRational> {
    let u = block_exponent(i);
    if k == 0 {
        // Wraps to the final slot, whose value is the integer 2^(u+1).
        return Ok(DyadicRational::ZERO);
    }
    let bd = BlockDecomposition::of(k, i)?;
    let lower = if u >= 127 {
        true
    } else {
        bd.r < (1u128 << u)
    };
    let num = bd
        .r
        .checked_mul(bd.s)
        .and_then(|rs| rs.checked_add(if lower { 0 } else { bd.s }))
        .ok_or(Error::ExactOverflow {
            context: "block term numerator",
            i,
        })?;
    DyadicRational::from_parts(num, u)
}

/// Term `n` of the shipped sequence, by direct evaluation of the closed form.
pub fn term(n: u64) -> Result<DyadicRational> {
    let idx = IndexDecomposition::of(n);
    block_term(idx.k, idx.i)
}

/// One fully materialised block: the finite sequence `(c_k)` for
/// `k in [1, V_i]`, every value a dyadic rational with denominator dividing
/// `2^(i^2)`.
#[derive(Debug, Clone)]
pub struct SudBlock {
    pub i: u32,
    pub u: u32,
    values: Vec<DyadicRational>,
}

impl SudBlock {
    pub fn len(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at 1-based block position `k` (no wrap-around).
    pub fn value(&self, k: u64) -> DyadicRational {
        self.values[(k - 1) as usize]
    }

    /// Value at 1-based position with periodic extension, residue 0 mapping
    /// to the final slot.
    pub fn value_wrapped(&self, k: u64) -> DyadicRational {
        let v = self.len();
        let m = if k == 0 { v } else { ((k - 1) % v) + 1 };
        self.value(m)
    }

    pub fn values(&self) -> &[DyadicRational] {
        &self.values
    }

    /// Returns a copy with position `k` (1-based) replaced, for mutation
    /// testing of the certification machinery.
    pub fn with_value(&self, k: u64, value: DyadicRational) -> SudBlock {
        let mut values = self.values.clone();
        values[(k - 1) as usize] = value;
        SudBlock {
            i: self.i,
            u: self.u,
            values,
        }
    }
}

/// Materialises block `i` in full. Limited to `i <= 3`; larger blocks are
/// served lazily through [`block_term`].
pub fn block_values(i: u32) -> Result<SudBlock> {
    if i == 0 || i > MAX_MATERIALIZED_BLOCK {
        return Err(Error::InfeasibleBlock {
            i,
            why: format!(
                "only blocks 1..={MAX_MATERIALIZED_BLOCK} are materialised in full"
            ),
        });
    }
    let v = block_length(i)?;
    let mut values = Vec::with_capacity(v as usize);
    for k in 1..=v {
        values.push(block_term(k, i)?);
    }
    Ok(SudBlock {
        i,
        u: block_exponent(i),
        values,
    })
}

fn cached_blocks() -> &'static [SudBlock] {
    use std::sync::OnceLock;
    static BLOCKS: OnceLock<Vec<SudBlock>> = OnceLock::new();
    BLOCKS.get_or_init(|| {
        (1..=MAX_MATERIALIZED_BLOCK)
            .map(|i| block_values(i).expect("small blocks always materialise"))
            .collect()
    })
}

/// Term `n` of the sequence by block interleaving: the index decomposition
/// routes `n` to position `k` of block `i`, extended periodically. For
/// materialised blocks this is a table lookup; the result agrees with
/// [`term`] everywhere, which the tests assert.
pub fn term_via_blocks(n: u64) -> Result<DyadicRational> {
    let idx = IndexDecomposition::of(n);
    if idx.i <= MAX_MATERIALIZED_BLOCK {
        let block = &cached_blocks()[(idx.i - 1) as usize];
        return Ok(block.value_wrapped(idx.k));
    }
    block_term(idx.k, idx.i)
}
