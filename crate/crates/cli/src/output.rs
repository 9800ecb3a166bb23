//! Deterministic text output: float formatting, CSV assembly and the
//! content hash printed by `gen`.

use std::fmt::Write as _;

/// Shortest round-trip decimal form, locale independent.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Optional field: empty string when absent.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Assemble CSV text from a header and rows. Fields are written verbatim;
/// callers only pass numeric or fixed-keyword fields, so no quoting is
/// needed.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", header.join(","));
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "row width must match header");
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// FNV-1a 64-bit hash; stable content digest for generated instance files.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
