//! Small classical parity-check matrices used as inputs and fixtures.

use crate::f2::BitMatrix;

/// Cyclic repetition code of length L: check i touches bits i and i+1 mod L.
#[must_use]
pub fn repetition_cyclic(l: usize) -> BitMatrix {
    let mut m = BitMatrix::zeros(l, l);
    for i in 0..l {
        m.set(i, i, true);
        m.set(i, (i + 1) % l, true);
    }
    m
}

/// Open repetition code: L−1 checks on L bits.
#[must_use]
pub fn repetition_open(l: usize) -> BitMatrix {
    let mut m = BitMatrix::zeros(l.saturating_sub(1), l);
    for i in 0..l.saturating_sub(1) {
        m.set(i, i, true);
        m.set(i, i + 1, true);
    }
    m
}

/// The [7,4] Hamming code.
#[must_use]
pub fn hamming7() -> BitMatrix {
    BitMatrix::from_strs(&["1010101", "0110011", "0001111"])
}
