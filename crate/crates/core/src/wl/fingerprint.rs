use std::collections::BTreeMap;

use super::ColorDigest;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"GWFP";
const VERSION: u8 = 1;

/// Cloud-level invariant: the multiset of tuple colors after some iteration,
/// with colors named by their content digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    pub ell: usize,
    pub iteration: usize,
    /// Sorted by digest.
    pub entries: Vec<(ColorDigest, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    Different,
}

impl Fingerprint {
    pub fn from_ids(ell: usize, iteration: usize, digests: impl IntoIterator<Item = ColorDigest>) -> Self {
        let mut counts: BTreeMap<ColorDigest, u64> = BTreeMap::new();
        for d in digests {
            *counts.entry(d).or_default() += 1;
        }
        Self {
            ell,
            iteration,
            entries: counts.into_iter().collect(),
        }
    }

    /// Sum of multiplicities (`n^ℓ`).
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|(_, m)| m).sum()
    }

    pub fn classes(&self) -> usize {
        self.entries.len()
    }

    /// Canonical byte encoding: magic, version, `ell`, iteration, entry
    /// count, then `(digest, multiplicity)` pairs, integers big-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(25 + self.entries.len() * 40);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&(self.ell as u32).to_be_bytes());
        out.extend_from_slice(&(self.iteration as u32).to_be_bytes());
        out.extend_from_slice(&(self.entries.len() as u64).to_be_bytes());
        for (d, m) in &self.entries {
            out.extend_from_slice(d);
            out.extend_from_slice(&m.to_be_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |why: &str| Error::BadColors(format!("fingerprint: {why}"));
        if bytes.len() < 21 || &bytes[..4] != MAGIC {
            return Err(bad("missing header"));
        }
        if bytes[4] != VERSION {
            return Err(bad("unknown version"));
        }
        let u32_at = |o: usize| u32::from_be_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let ell = u32_at(5) as usize;
        let iteration = u32_at(9) as usize;
        let count = u64::from_be_bytes(bytes[13..21].try_into().expect("8 bytes")) as usize;
        let body = &bytes[21..];
        if body.len() != count.checked_mul(40).ok_or_else(|| bad("entry count overflow"))? {
            return Err(bad("length does not match entry count"));
        }
        let entries = body
            .chunks(40)
            .map(|c| {
                let d: ColorDigest = c[..32].try_into().expect("32 bytes");
                (d, u64::from_be_bytes(c[32..].try_into().expect("8 bytes")))
            })
            .collect::<Vec<_>>();
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(bad("entries not strictly sorted"));
        }
        Ok(Self { ell, iteration, entries })
    }
}

/// Multiset equality; the two fingerprints must come from the same `ℓ` and iteration.
pub fn compare(a: &Fingerprint, b: &Fingerprint) -> Result<Verdict> {
    if a.ell != b.ell || a.iteration != b.iteration {
        return Err(Error::ParameterMismatch(format!(
            "comparing (ell={}, t={}) with (ell={}, t={})",
            a.ell, a.iteration, b.ell, b.iteration
        )));
    }
    Ok(if a.entries == b.entries { Verdict::Equal } else { Verdict::Different })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bytes_roundtrip() {
        let f = Fingerprint::from_ids(2, 3, [[1u8; 32], [0u8; 32], [1u8; 32]]);
        assert_eq!(f.total(), 3);
        assert_eq!(f.entries[0], ([0u8; 32], 1));
        let back = Fingerprint::from_bytes(&f.to_bytes()).unwrap();
        assert_eq!(back, f);
        assert!(Fingerprint::from_bytes(&f.to_bytes()[..30]).is_err());
    }

    #[test]
    fn mismatched_parameters_are_an_error() {
        let a = Fingerprint::from_ids(1, 1, [[0u8; 32]]);
        let b = Fingerprint::from_ids(1, 2, [[0u8; 32]]);
        assert!(compare(&a, &b).is_err());
        assert_eq!(compare(&a, &a).unwrap(), Verdict::Equal);
    }
}
