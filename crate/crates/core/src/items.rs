//! Defectivity vectors, defective sets, the approximate-recovery distance and
//! the false positive / false negative metrics.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, invalid, Error, Result};

/// Binary status of `n` items, `true` meaning defective. Items are 0-indexed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DefectivityVector {
    bits: Vec<bool>,
}

impl DefectivityVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![false; n] }
    }

    /// Build from 0/1 integers; any other value is rejected.
    pub fn from_u8(values: &[u8]) -> Result<Self> {
        values
            .iter()
            .map(|&v| match v {
                0 => Ok(false),
                1 => Ok(true),
                other => invalid(format!("defectivity entry must be 0 or 1, got {other}")),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// The vector whose `j`-th bit is bit `j` of `mask` (used for enumeration).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self::new((0..n).map(|j| (mask >> j) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, j: usize) -> bool {
        self.bits[j]
    }

    pub fn set(&mut self, j: usize, value: bool) {
        self.bits[j] = value;
    }

    /// Number of defectives `k`.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `±1` spin representation `2u - 1`.
    pub fn spins(&self) -> impl Iterator<Item = f64> + '_ {
        self.bits.iter().map(|&b| if b { 1.0 } else { -1.0 })
    }

    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn support(&self) -> DefectiveSet {
        DefectiveSet {
            members: self
                .bits
                .iter()
                .enumerate()
                .filter_map(|(j, &b)| b.then_some(j))
                .collect(),
            n: self.len(),
        }
    }
}

impl fmt::Debug for DefectivityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DefectivityVector({})", self.to_bitstring())
    }
}

impl fmt::Display for DefectivityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

impl FromStr for DefectivityVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('[') {
            let values: Vec<u8> = serde_json::from_str(s)?;
            return Self::from_u8(&values);
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => invalid(format!("unexpected character {other:?} in bitstring")),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

impl Serialize for DefectivityVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_bitstring())
    }
}

impl<'de> Deserialize<'de> for DefectivityVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct BitsVisitor;

        impl<'de> Visitor<'de> for BitsVisitor {
            type Value = DefectivityVector;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a 0/1 string or an array of 0/1 integers")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut values = Vec::new();
                while let Some(v) = seq.next_element::<u8>()? {
                    values.push(v);
                }
                DefectivityVector::from_u8(&values).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_any(BitsVisitor)
    }
}

/// Sorted set of defective item indices within `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DefectiveSet {
    members: BTreeSet<usize>,
    n: usize,
}

impl DefectiveSet {
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&max) = members.iter().next_back() {
            if max >= n {
                return invalid(format!("item index {max} out of range for n = {n}"));
            }
        }
        Ok(Self { members, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.members.contains(&j)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn to_vector(&self) -> DefectivityVector {
        let mut v = DefectivityVector::zeros(self.n);
        for j in self.iter() {
            v.set(j, true);
        }
        v
    }
}

/// `d(a, b) = max(|a \ b|, |b \ a|)`.
pub fn approx_distance(a: &DefectiveSet, b: &DefectiveSet) -> Result<usize> {
    check_dim(a.n, b.n)?;
    Ok(distance_unchecked(a, b))
}

pub(crate) fn distance_unchecked(a: &DefectiveSet, b: &DefectiveSet) -> usize {
    let a_minus_b = a.members.difference(&b.members).count();
    let b_minus_a = b.members.difference(&a.members).count();
    a_minus_b.max(b_minus_a)
}

/// Error counts of an estimate against the truth. Rates are `None` when the
/// truth has no defectives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub false_pos: usize,
    pub false_neg: usize,
    pub fp_rate: Option<f64>,
    pub fn_rate: Option<f64>,
    /// Seconds spent in the decoder's solve.
    pub wall_time: f64,
}

pub fn count_fp_fn(truth: &DefectivityVector, estimate: &DefectivityVector) -> Result<ErrorReport> {
    check_dim(truth.len(), estimate.len())?;
    let mut false_pos = 0;
    let mut false_neg = 0;
    for (&t, &e) in truth.bits.iter().zip(&estimate.bits) {
        match (t, e) {
            (false, true) => false_pos += 1,
            (true, false) => false_neg += 1,
            _ => {}
        }
    }
    let k = truth.weight();
    let rate = |c: usize| (k > 0).then(|| c as f64 / k as f64);
    Ok(ErrorReport {
        false_pos,
        false_neg,
        fp_rate: rate(false_pos),
        fn_rate: rate(false_neg),
        wall_time: 0.0,
    })
}
