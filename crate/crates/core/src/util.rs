//! Small numeric helpers usable without `std` float intrinsics.

/// Absolute value without pulling in `std`.
pub(crate) fn fabs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

/// Nearest integer, ties away from zero.
pub(crate) fn round_to_i64(x: f64) -> i64 {
    if x >= 0.0 {
        (x + 0.5) as i64
    } else {
        -((-x + 0.5) as i64)
    }
}

/// True when `x` is within `tol` of its nearest integer.
pub(crate) fn is_integral(x: f64, tol: f64) -> bool {
    fabs(x - round_to_i64(x) as f64) <= tol
}

/// Ceiling of `num / den` for positive integers.
pub(crate) fn ceil_div(num: u64, den: u64) -> u64 {
    debug_assert!(den > 0);
    num.div_ceil(den)
}

/// Total order on `f64` for use in heaps and sorts; inputs are finite.
#[derive(Clone, Copy, PartialEq, Debug)]
pub(crate) struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
