//! Counter-based seed derivation.
//!
//! `derive(master, stream, index)` runs one SplitMix64 round over
//! `master + stream·φ + index·φ²` (φ the 64-bit golden ratio constant), so
//! every trial of every experiment gets an independent, reproducible seed.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    let g2 = GOLDEN.wrapping_mul(GOLDEN);
    splitmix64(
        master
            .wrapping_add(stream.wrapping_mul(GOLDEN))
            .wrapping_add(index.wrapping_mul(g2)),
    )
}
