//! Randomized Sobol points with random access.
//!
//! Direction numbers come from the Joe–Kuo D6 table shipped with the `sobol`
//! crate. Randomization is a linear matrix scramble of the direction numbers
//! followed by a digital shift. Points are generated in Gray-code order so
//! any block of indices can be started independently, which keeps parallel
//! estimates deterministic.

use std::sync::OnceLock;

use rand::Rng;
use sobol::params::JoeKuoD6;
use sobol::Sobol;

/// Largest dimension supported by the bundled direction numbers.
pub const MAX_DIMENSION: usize = 1000;

const BITS: usize = 64;

fn direction_table() -> &'static JoeKuoD6 {
    static TABLE: OnceLock<JoeKuoD6> = OnceLock::new();
    TABLE.get_or_init(JoeKuoD6::standard)
}

/// Direction numbers for the first `dims` Sobol coordinates.
#[derive(Debug, Clone)]
pub struct SobolDirections {
    dirs: Vec<Vec<u64>>,
}

impl SobolDirections {
    /// # Panics
    /// If `dims` exceeds [`MAX_DIMENSION`].
    pub fn new(dims: usize) -> Self {
        assert!(dims <= MAX_DIMENSION, "Sobol dimension {dims} above {MAX_DIMENSION}");
        let dirs = Sobol::<f64>::init_direction_vals::<u32>(dims, BITS, direction_table());
        Self { dirs }
    }

    pub fn dims(&self) -> usize {
        self.dirs.len()
    }

    /// Applies an independent random lower-triangular binary matrix (unit
    /// diagonal, most significant digit first) to each coordinate.
    pub fn scrambled<R: Rng>(&self, rng: &mut R) -> Self {
        let dirs =
            self.dirs
                .iter()
                .map(|d| {
                    // masks[k] selects the input digits feeding output digit k.
                    let masks: Vec<u64> = (0..BITS)
                        .map(|k| {
                            let pos = BITS - 1 - k;
                            let upper = if pos == BITS - 1 { 0 } else { u64::MAX << (pos + 1) };
                            (rng.random::<u64>() & upper) | (1u64 << pos)
                        })
                        .collect();
                    d.iter()
                        .map(|&v| {
                            masks.iter().enumerate().fold(0u64, |acc, (k, &m)| {
                                acc | ((((m & v).count_ones() & 1) as u64) << (BITS - 1 - k))
                            })
                        })
                        .collect()
                })
                .collect();
        Self { dirs }
    }

    /// Cursor positioned at point `index` with the given digital shift.
    pub fn cursor(&self, index: u64, shift: &[u64]) -> SobolCursor<'_> {
        debug_assert_eq!(shift.len(), self.dims());
        let gray = index ^ (index >> 1);
        let state = self
            .dirs
            .iter()
            .map(|d| {
                let mut x = 0u64;
                let mut g = gray;
                let mut bit = 0;
                while g != 0 {
                    if g & 1 == 1 {
                        x ^= d[bit];
                    }
                    g >>= 1;
                    bit += 1;
                }
                x
            })
            .collect();
        SobolCursor { dirs: self, index, state, shift: shift.to_vec() }
    }
}

pub struct SobolCursor<'a> {
    dirs: &'a SobolDirections,
    index: u64,
    state: Vec<u64>,
    shift: Vec<u64>,
}

impl SobolCursor<'_> {
    /// Writes the current point into `out` (values strictly inside (0,1))
    /// and advances.
    pub fn next_into(&mut self, out: &mut [f64]) {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        for ((o, &x), &s) in out.iter_mut().zip(&self.state).zip(&self.shift) {
            *o = (((x ^ s) >> 11) as f64 + 0.5) * SCALE;
        }
        self.index += 1;
        let bit = self.index.trailing_zeros() as usize;
        for (x, d) in self.state.iter_mut().zip(&self.dirs.dirs) {
            *x ^= d[bit];
        }
    }
}
