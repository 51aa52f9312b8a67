//! Embedded reference tables.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const KNOWN_VALUES_CSV: &str = include_str!("../../data/known_values.csv");
const TABLE3_CSV: &str = include_str!("../../data/table3.csv");

/// Denominators of the angle columns of the SDP table.
pub const TABLE3_ANGLES: [u32; 6] = [5, 7, 9, 11, 13, 15];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KnownValuesEntry {
    pub n: u32,
    pub lower: u64,
    pub upper: u64,
    /// Integer values of `1/α` attaining the lower bound.
    pub angle_inverse: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table3Row {
    pub n: u32,
    /// One cell per entry of [`TABLE3_ANGLES`].
    pub per_angle: [u64; 6],
    pub max: u64,
    pub gerzon: u64,
    pub angle_inverse: u32,
    pub informational: bool,
}

fn read<T: serde::de::DeserializeOwned>(text: &str) -> Vec<T> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .expect("embedded table is well formed")
}

#[derive(Deserialize)]
struct KnownRecord {
    n: u32,
    lower: u64,
    upper: u64,
    angle_inverse: String,
}

#[derive(Deserialize)]
struct Table3Record {
    n: u32,
    a1_5: u64,
    a1_7: u64,
    a1_9: u64,
    a1_11: u64,
    a1_13: u64,
    a1_15: u64,
    max: u64,
    gerzon: u64,
    angle: String,
    informational: u8,
}

fn known_table() -> &'static [KnownValuesEntry] {
    static TABLE: OnceLock<Vec<KnownValuesEntry>> = OnceLock::new();
    TABLE.get_or_init(|| {
        read::<KnownRecord>(KNOWN_VALUES_CSV)
            .into_iter()
            .map(|r| KnownValuesEntry {
                n: r.n,
                lower: r.lower,
                upper: r.upper,
                angle_inverse: r
                    .angle_inverse
                    .split(';')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().expect("integer angle"))
                    .collect(),
            })
            .collect()
    })
}

fn table3() -> &'static [Table3Row] {
    static TABLE: OnceLock<Vec<Table3Row>> = OnceLock::new();
    TABLE.get_or_init(|| {
        read::<Table3Record>(TABLE3_CSV)
            .into_iter()
            .map(|r| Table3Row {
                n: r.n,
                per_angle: [r.a1_5, r.a1_7, r.a1_9, r.a1_11, r.a1_13, r.a1_15],
                max: r.max,
                gerzon: r.gerzon,
                angle_inverse: r
                    .angle
                    .trim_start_matches("1/")
                    .parse()
                    .expect("angle of the form 1/d"),
                informational: r.informational == 1,
            })
            .collect()
    })
}

/// Known lower and upper bounds on `M(n)`, for tabulated `n`.
pub fn known_values(n: u32) -> Option<KnownValuesEntry> {
    known_table().iter().find(|e| e.n == n).cloned()
}

/// The tabulated SDP row for `n`, if any.
pub fn table3_row(n: u32) -> Option<Table3Row> {
    table3().iter().find(|r| r.n == n).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_examples() {
        let e = known_values(17).unwrap();
        assert_eq!((e.lower, e.upper), (48, 50));
        let e = known_values(23).unwrap();
        assert_eq!((e.lower, e.upper), (276, 276));
        assert_eq!(known_values(500), None);
        assert_eq!(known_values(14).unwrap().angle_inverse, vec![3, 5]);
        assert!(known_values(3).unwrap().angle_inverse.is_empty());
    }

    #[test]
    fn known_table_is_consistent() {
        let t = known_table();
        assert_eq!(t.len(), 42);
        assert!(t.iter().all(|e| e.lower <= e.upper));
        for n in 24..=41 {
            assert_eq!(known_values(n).unwrap().upper, 276);
        }
    }

    #[test]
    fn table3_rows() {
        let t = table3();
        assert_eq!(t.len(), 118);
        assert!(t.windows(2).all(|w| w[0].n + 1 == w[1].n));
        for r in t {
            assert_eq!(r.gerzon, r.n as u64 * (r.n as u64 + 1) / 2);
            assert_eq!(r.max, *r.per_angle.iter().max().unwrap());
            assert_eq!(r.informational, r.n >= 137);
        }
        let r = table3_row(23).unwrap();
        assert_eq!(r.per_angle, [276, 42, 31, 28, 26, 25]);
        assert_eq!(r.angle_inverse, 5);
        assert!(table3_row(140).is_none());
    }
}
