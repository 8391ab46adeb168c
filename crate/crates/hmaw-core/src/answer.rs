//! Numeric answer extraction and exact-match scoring for objective tasks.
//!
//! Responses are scored by pulling the last number literal out of the text
//! and comparing it to the gold answer as an exact decimal, so `72.0`
//! equals `72` and float rounding can never flip a case.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// A number in canonical decimal form: sign, integer digits without leading
/// zeros, fraction digits without trailing zeros. Equality is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalNumber {
    negative: bool,
    int_digits: String,
    frac_digits: String,
}

impl CanonicalNumber {
    fn from_parts(negative: bool, int_digits: &[u8], frac_digits: &[u8]) -> CanonicalNumber {
        let mut int_start = 0;
        while int_start + 1 < int_digits.len() && int_digits[int_start] == b'0' {
            int_start += 1;
        }
        let mut frac_end = frac_digits.len();
        while frac_end > 0 && frac_digits[frac_end - 1] == b'0' {
            frac_end -= 1;
        }
        let int_digits = if int_digits.is_empty() {
            String::from("0")
        } else {
            String::from_utf8_lossy(&int_digits[int_start..]).into_owned()
        };
        let frac_digits = String::from_utf8_lossy(&frac_digits[..frac_end]).into_owned();
        let is_zero = int_digits == "0" && frac_digits.is_empty();
        CanonicalNumber {
            negative: negative && !is_zero,
            int_digits,
            frac_digits,
        }
    }

    /// Strict parse of a gold answer: one number literal (optional sign and
    /// currency symbol, comma thousands groups, decimal fraction) and
    /// nothing else.
    pub fn parse(text: &str) -> Option<CanonicalNumber> {
        let bytes = text.trim().as_bytes();
        let mut i = 0;
        let mut negative = false;
        let mut seen_currency = false;
        while i < bytes.len() {
            match bytes[i] {
                b'-' if !negative && !seen_currency => {
                    negative = true;
                    i += 1;
                }
                b'$' if !seen_currency => {
                    seen_currency = true;
                    i += 1;
                }
                _ => break,
            }
        }
        let (int_digits, frac_digits, end) = scan_unsigned(bytes, i)?;
        if end != bytes.len() {
            return None;
        }
        Some(CanonicalNumber::from_parts(negative, &int_digits, &frac_digits))
    }
}

impl core::fmt::Display for CanonicalNumber {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        f.write_str(&self.int_digits)?;
        if !self.frac_digits.is_empty() {
            f.write_str(".")?;
            f.write_str(&self.frac_digits)?;
        }
        Ok(())
    }
}

impl Serialize for CanonicalNumber {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CanonicalNumber {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CanonicalNumber::parse(&s)
            .ok_or_else(|| serde::de::Error::custom("not a canonical number"))
    }
}

/// Scan digits (with comma thousands groups) and an optional fraction
/// starting at `i`. Returns the digit strings and the index just past the
/// literal.
fn scan_unsigned(bytes: &[u8], mut i: usize) -> Option<(Vec<u8>, Vec<u8>, usize)> {
    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
        return None;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut int_digits: Vec<u8> = bytes[int_start..i].to_vec();
    // A comma counts as a thousands separator only before exactly three digits.
    while i + 3 < bytes.len()
        && bytes[i] == b','
        && bytes[i + 1..i + 4].iter().all(u8::is_ascii_digit)
        && (i + 4 >= bytes.len() || !bytes[i + 4].is_ascii_digit())
    {
        int_digits.extend_from_slice(&bytes[i + 1..i + 4]);
        i += 4;
    }
    let mut frac_digits: Vec<u8> = Vec::new();
    if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        frac_digits = bytes[frac_start..i].to_vec();
    }
    Some((int_digits, frac_digits, i))
}

/// The last number in the text, with currency symbols and thousands
/// separators stripped and trailing punctuation ignored. `None` when the
/// text has no digits.
pub fn extract_numeric_answer(text: &str) -> Option<CanonicalNumber> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut last: Option<CanonicalNumber> = None;
    while i < bytes.len() {
        if !bytes[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let mut negative = false;
        {
            let mut j = i;
            if j > 0 && bytes[j - 1] == b'$' {
                j -= 1;
            }
            // A minus sign directly before the literal is a sign unless it
            // follows a digit, as in the range "5-6".
            if j > 0 && bytes[j - 1] == b'-' {
                let before = j.checked_sub(2).map(|k| bytes[k]);
                if before.map_or(true, |c| !c.is_ascii_digit()) {
                    negative = true;
                }
            }
        }
        let (int_digits, frac_digits, end) =
            scan_unsigned(bytes, i).expect("position starts with a digit");
        last = Some(CanonicalNumber::from_parts(negative, &int_digits, &frac_digits));
        i = end;
    }
    last
}

/// A scored objective case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveScore {
    pub query_id: String,
    pub extracted: Option<CanonicalNumber>,
    pub correct: bool,
}

impl ObjectiveScore {
    pub fn score(&self) -> f64 {
        if self.correct {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GoldError {
    #[error("gold answer `{0}` is not a number")]
    Unparseable(String),
}

/// Correct iff the last number extracted from the response equals the gold
/// answer exactly.
pub fn score_objective(
    query_id: &str,
    response: &str,
    gold: &str,
) -> Result<ObjectiveScore, GoldError> {
    let gold_number =
        CanonicalNumber::parse(gold).ok_or_else(|| GoldError::Unparseable(gold.to_string()))?;
    let extracted = extract_numeric_answer(response);
    let correct = extracted.as_ref() == Some(&gold_number);
    Ok(ObjectiveScore {
        query_id: query_id.to_string(),
        extracted,
        correct,
    })
}
