//! Abductive learning of glyph perception and bitwise arithmetic rules.
//!
//! A perception network labels glyph images with the symbols `0 1 + =`.
//! A logic layer abduces which bitwise rule table, together with small
//! corrections to those labels, best explains a batch of equations known
//! only to be right or wrong. The corrections train the network and the
//! rule tables become features for a final classifier.

pub mod datasets;
pub mod dfo;
pub mod equation;
pub mod logic;
pub mod neural;
pub mod perception;
pub mod trainer;

/// Splits `base` into independent streams (SplitMix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
