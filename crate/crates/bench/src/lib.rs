//! Shared inputs for the kernel benchmarks.

use reticular_core::{catalog, NormalFormEntry};

/// Catalog entry by exact label.
pub fn entry(label: &str) -> &'static NormalFormEntry {
    catalog().iter().find(|e| e.label == label).unwrap_or_else(|| panic!("no catalog entry {label}"))
}

/// Germs exercising the codimension kernel, from cheap to expensive.
pub const CODIM_GERMS: &[(&str, usize, usize)] = &[
    ("x1^2 + x1*x2 + 1/3*x2^2", 2, 0),
    ("x1^3 + x1*x2 + x2^2", 2, 0),
    ("x1^2 + x1*x2 + x2^3 + x1*y1 + y1^2", 2, 1),
];
