//! Median combiner of forecasts and enumeration of its subset variants.
//!
//! A variant is any subset of two or more base methods; its forecast is the
//! sample median of the members' forecasts (mean of the two middle values
//! for even counts, so a pair reduces to the mean).

use crate::error::{Error, Result};
use crate::forecast::BaseMethod;
use crate::util;

/// Identifier for one of the 31 methods: a base method or a combiner over a
/// subset of bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodId {
    Base(BaseMethod),
    /// Bitmask over the five bases; bit `i` set means base number `i + 1`
    /// participates. Cardinality is always in 2..=5.
    Combo(u8),
}

impl MethodId {
    /// The last-observation benchmark.
    pub fn benchmark() -> MethodId {
        MethodId::Base(BaseMethod::Naive)
    }

    pub fn is_benchmark(&self) -> bool {
        *self == Self::benchmark()
    }

    /// Base methods participating in this method's forecast.
    pub fn members(&self) -> Vec<BaseMethod> {
        match self {
            MethodId::Base(b) => vec![*b],
            MethodId::Combo(mask) => BaseMethod::ALL
                .iter()
                .filter(|b| mask & (1 << (b.number() - 1)) != 0)
                .copied()
                .collect(),
        }
    }

    /// Display label: base name, or "combiner of (i),(j),..." with the
    /// reported base numbering.
    pub fn label(&self) -> String {
        match self {
            MethodId::Base(b) => b.label().to_string(),
            MethodId::Combo(_) => {
                let nums: Vec<String> =
                    self.members().iter().map(|b| format!("({})", b.number())).collect();
                format!("combiner of {}", nums.join(","))
            }
        }
    }

    /// Parses a base name/number or a combo written as "1+4+5".
    pub fn parse(token: &str) -> Result<MethodId> {
        let t = token.trim();
        if t.contains('+') {
            let mut mask = 0u8;
            for part in t.split('+') {
                let base = BaseMethod::parse(part)
                    .ok_or_else(|| Error::UnknownMethod(token.to_string()))?;
                mask |= 1 << (base.number() - 1);
            }
            if mask.count_ones() < 2 {
                return Err(Error::UnknownMethod(token.to_string()));
            }
            Ok(MethodId::Combo(mask))
        } else {
            BaseMethod::parse(t)
                .map(MethodId::Base)
                .ok_or_else(|| Error::UnknownMethod(token.to_string()))
        }
    }

    /// Sort key giving the canonical report order: bases by number, then
    /// combiners by size and lexicographic member tuple.
    fn sort_key(&self) -> (u8, u8, Vec<u8>) {
        match self {
            MethodId::Base(b) => (0, b.number(), vec![]),
            MethodId::Combo(_) => {
                let nums: Vec<u8> = self.members().iter().map(|b| b.number()).collect();
                (1, nums.len() as u8, nums)
            }
        }
    }
}

impl PartialOrd for MethodId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MethodId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// Every subset of size >= 2 of the given bases, ordered by size then
/// lexicographic member tuple.
pub fn enumerate_variants(bases: &[BaseMethod]) -> Result<Vec<MethodId>> {
    let mut distinct: Vec<BaseMethod> = Vec::new();
    for b in bases {
        if !distinct.contains(b) {
            distinct.push(*b);
        }
    }
    if distinct.len() < 2 {
        return Err(Error::TooFewBases);
    }
    let mut variants: Vec<MethodId> = Vec::new();
    let n = distinct.len();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut bits = 0u8;
        for (i, b) in distinct.iter().enumerate() {
            if mask & (1 << i) != 0 {
                bits |= 1 << (b.number() - 1);
            }
        }
        variants.push(MethodId::Combo(bits));
    }
    variants.sort();
    Ok(variants)
}

/// The canonical 31 methods: the five bases followed by the 26 combiner
/// variants in stable report order.
pub fn all_method_ids() -> Vec<MethodId> {
    let mut out: Vec<MethodId> = BaseMethod::ALL.iter().map(|b| MethodId::Base(*b)).collect();
    out.extend(enumerate_variants(&BaseMethod::ALL).expect("five bases"));
    out
}

/// Sample median of two or more finite forecasts: the middle value for odd
/// counts, the mean of the two middle values for even counts.
pub fn median_combine(forecasts: &[f64]) -> Result<f64> {
    if forecasts.len() < 2 {
        return Err(Error::TooFewValues { need: 2, got: forecasts.len() });
    }
    if let Some(idx) = forecasts.iter().position(|f| !f.is_finite()) {
        return Err(Error::NonFinite(idx));
    }
    let mut buf = forecasts.to_vec();
    Ok(util::median_in_place(&mut buf))
}
