//! Shared fixtures and the brute-force oracle for the integration and
//! acceptance suites.

#![allow(dead_code)]

pub mod oracle;

use slotcode::channel::Dmc;

/// The canonical 2-message test channel: silent row (0.95, 0.05), message
/// rows (0.8, 0.2) and (0.2, 0.8). Built from raw numbers here so the test
/// side does not depend on the library's own fixture constructor.
pub fn ch1() -> Dmc {
    Dmc::new(&[vec![0.95, 0.05], vec![0.8, 0.2], vec![0.2, 0.8]], 0).unwrap()
}

pub const CH1_ROWS: [[f64; 2]; 3] = [[0.95, 0.05], [0.8, 0.2], [0.2, 0.8]];
