//! Fixed inputs shared by the benchmarks.

use nagata_core::{OracleParams, PicardClass};

/// Plane classes of increasing size for `reduce`: uniform systems just
/// below the Nagata bound and a few staircases.
pub fn reduce_inputs() -> Vec<(&'static str, PicardClass)> {
    vec![
        ("uniform_9x13", PicardClass::from_ints(39, &[13; 9])),
        ("uniform_8x40", PicardClass::from_ints(113, &[40; 8])),
        (
            "staircase_8",
            PicardClass::from_ints(60, &[30, 25, 20, 18, 15, 12, 10, 7]),
        ),
        ("uniform_12x100", PicardClass::from_ints(346, &[100; 12])),
    ]
}

/// Interpolation problems, smallest first.
pub fn h0_inputs() -> Vec<(&'static str, PicardClass)> {
    vec![
        ("d6_2^8", PicardClass::from_ints(6, &[2; 8])),
        ("d10_3^10", PicardClass::from_ints(10, &[3; 10])),
        ("d19_6^10", PicardClass::from_ints(19, &[6; 10])),
    ]
}

pub fn oracle_params() -> OracleParams {
    OracleParams::with_seed(0)
}

/// Ranges of r for `scan`.
pub const SCAN_RANGES: [(u64, u64); 2] = [(2, 1_000), (2, 10_000)];
