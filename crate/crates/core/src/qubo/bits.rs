use std::cmp::Ordering;

/// Tie-break order on bitstrings: the bitstring read as a binary number with
/// variable 0 as the least significant bit. Smaller wins.
pub type BitOrder = fn(&[bool], &[bool]) -> Ordering;

pub fn bit_order(a: &[bool], b: &[bool]) -> Ordering {
    debug_assert_eq!(a.len(), b.len());
    a.iter().rev().cmp(b.iter().rev())
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn bits_from_str(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// Serde adapter storing a bitstring as a `"0110..."` string.
pub mod serde_bits {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::bits_to_string(bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        super::bits_from_str(&s).ok_or_else(|| D::Error::custom("bitstring must contain only 0 and 1"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_index_is_least_significant() {
        assert_eq!(bit_order(&[true, false], &[false, true]), Ordering::Less);
        assert_eq!(bit_order(&[false, false], &[true, false]), Ordering::Less);
        assert_eq!(bit_order(&[true, true], &[true, true]), Ordering::Equal);
    }

    #[test]
    fn string_form() {
        let b = vec![true, false, true, true];
        assert_eq!(bits_to_string(&b), "1011");
        assert_eq!(bits_from_str("1011").unwrap(), b);
        assert!(bits_from_str("10x").is_none());
    }
}
