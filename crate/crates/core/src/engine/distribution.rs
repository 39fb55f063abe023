use super::EngineError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write;

/// Outcome distribution over a classical register of `width` bits.
///
/// Keys pack the register with bit `i` in position `i`; bitstrings print bit
/// 0 leftmost. A distribution is either exact (probabilities only) or
/// sampled, in which case it also carries integer counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "DistributionJson", try_from = "DistributionJson")]
pub struct Distribution {
    width: usize,
    probs: BTreeMap<u64, f64>,
    counts: Option<BTreeMap<u64, u64>>,
}

#[derive(Serialize, Deserialize)]
struct DistributionJson {
    #[serde(default = "schema_version")]
    schema_version: u32,
    width: usize,
    shots: Option<u64>,
    outcomes: Vec<OutcomeJson>,
}

fn schema_version() -> u32 {
    1
}

#[derive(Serialize, Deserialize)]
struct OutcomeJson {
    bitstring: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<u64>,
    probability: f64,
}

pub fn bitstring(key: u64, width: usize) -> String {
    (0..width).map(|i| if (key >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bitstring(s: &str) -> Option<u64> {
    if s.len() > 64 {
        return None;
    }
    s.chars().enumerate().try_fold(0u64, |acc, (i, ch)| match ch {
        '0' => Some(acc),
        '1' => Some(acc | (1 << i)),
        _ => None,
    })
}

impl Distribution {
    pub fn from_counts(width: usize, counts: BTreeMap<u64, u64>) -> Self {
        let shots: u64 = counts.values().sum();
        let probs = counts.iter().map(|(&k, &n)| (k, n as f64 / shots.max(1) as f64)).collect();
        Self { width, probs, counts: Some(counts) }
    }

    /// Exact distribution; zero entries are dropped and duplicate keys merge.
    pub fn from_probabilities(width: usize, entries: impl IntoIterator<Item = (u64, f64)>) -> Self {
        let mut probs = BTreeMap::new();
        for (k, p) in entries {
            *probs.entry(k).or_insert(0.0) += p;
        }
        probs.retain(|_, p| *p != 0.0);
        Self { width, probs, counts: None }
    }

    pub fn point(width: usize, key: u64) -> Self {
        Self::from_probabilities(width, [(key, 1.0)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_sampled(&self) -> bool {
        self.counts.is_some()
    }

    pub fn shots(&self) -> Option<u64> {
        self.counts.as_ref().map(|c| c.values().sum())
    }

    pub fn probability(&self, key: u64) -> f64 {
        self.probs.get(&key).copied().unwrap_or(0.0)
    }

    pub fn count(&self, key: u64) -> Option<u64> {
        self.counts.as_ref().map(|c| c.get(&key).copied().unwrap_or(0))
    }

    pub fn probabilities(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().map(|(&k, &p)| (k, p))
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.probs.keys().copied()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn check_normalized(&self, tol: f64) -> Result<(), EngineError> {
        let t = self.total();
        if (t - 1.0).abs() > tol {
            Err(EngineError::NotNormalized(t))
        } else {
            Ok(())
        }
    }

    /// Keeps the listed bits; new bit `j` is old bit `bits[j]`.
    pub fn marginalize(&self, bits: &[usize]) -> Distribution {
        let project = |k: u64| bits.iter().enumerate().fold(0u64, |acc, (j, &b)| acc | (((k >> b) & 1) << j));
        match &self.counts {
            Some(counts) => {
                let mut out = BTreeMap::new();
                for (&k, &n) in counts {
                    *out.entry(project(k)).or_insert(0) += n;
                }
                Distribution::from_counts(bits.len(), out)
            }
            None => Distribution::from_probabilities(bits.len(), self.probabilities().map(|(k, p)| (project(k), p))),
        }
    }

    /// Conditions on `bit == value` and renormalizes. `None` when the event
    /// has zero probability.
    pub fn post_select(&self, bit: usize, value: bool) -> Option<Distribution> {
        let keep = |k: u64| ((k >> bit) & 1 == 1) == value;
        match &self.counts {
            Some(counts) => {
                let kept: BTreeMap<u64, u64> = counts.iter().filter(|(k, _)| keep(**k)).map(|(&k, &n)| (k, n)).collect();
                if kept.values().sum::<u64>() == 0 {
                    return None;
                }
                Some(Distribution::from_counts(self.width, kept))
            }
            None => {
                let mass: f64 = self.probabilities().filter(|(k, _)| keep(*k)).map(|(_, p)| p).sum();
                if mass <= 0.0 {
                    return None;
                }
                Some(Distribution::from_probabilities(
                    self.width,
                    self.probabilities().filter(|(k, _)| keep(*k)).map(|(k, p)| (k, p / mass)),
                ))
            }
        }
    }

    /// Expectation of `(-1)^(parity of the listed bits)`.
    pub fn parity_expectation(&self, bits: &[usize]) -> f64 {
        let mask: u64 = bits.iter().map(|&b| 1u64 << b).sum();
        self.probabilities().map(|(k, p)| if (k & mask).count_ones() % 2 == 0 { p } else { -p }).sum()
    }

    /// `schema_version,bitstring,count,probability` with one row per outcome
    /// in key order. The count column is empty for exact distributions.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("schema_version,bitstring,count,probability\n");
        for (k, p) in self.probabilities() {
            let count = self.count(k).map(|n| n.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{}", schema_version(), bitstring(k, self.width), count, p).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("distribution serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, EngineError> {
        serde_json::from_str(s).map_err(|e| EngineError::Format(e.to_string()))
    }
}

impl From<Distribution> for DistributionJson {
    fn from(d: Distribution) -> Self {
        DistributionJson {
            schema_version: schema_version(),
            width: d.width,
            shots: d.shots(),
            outcomes: d
                .probabilities()
                .map(|(k, p)| OutcomeJson { bitstring: bitstring(k, d.width), count: d.count(k), probability: p })
                .collect(),
        }
    }
}

impl TryFrom<DistributionJson> for Distribution {
    type Error = EngineError;

    fn try_from(doc: DistributionJson) -> Result<Self, EngineError> {
        let key = |o: &OutcomeJson| {
            parse_bitstring(&o.bitstring).ok_or_else(|| EngineError::Format(format!("bad bitstring `{}`", o.bitstring)))
        };
        if doc.shots.is_some() {
            let mut counts = BTreeMap::new();
            for o in &doc.outcomes {
                counts.insert(key(o)?, o.count.unwrap_or(0));
            }
            Ok(Distribution::from_counts(doc.width, counts))
        } else {
            let entries = doc.outcomes.iter().map(|o| key(o).map(|k| (k, o.probability))).collect::<Result<Vec<_>, _>>()?;
            Ok(Distribution::from_probabilities(doc.width, entries))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitstrings_put_bit_zero_first() {
        assert_eq!(bitstring(0b001, 3), "100");
        assert_eq!(parse_bitstring("100"), Some(1));
    }

    #[test]
    fn marginalize_and_post_select() {
        let d = Distribution::from_probabilities(2, [(0b00, 0.5), (0b11, 0.25), (0b10, 0.25)]);
        let m = d.marginalize(&[1]);
        assert_eq!(m.probability(1), 0.5);
        let ps = d.post_select(0, true).unwrap();
        assert_eq!(ps.probability(0b11), 1.0);
        assert!(Distribution::point(1, 0).post_select(0, true).is_none());
    }

    #[test]
    fn json_and_csv() {
        let mut counts = BTreeMap::new();
        counts.insert(0b01, 3);
        counts.insert(0b10, 1);
        let d = Distribution::from_counts(2, counts);
        assert_eq!(d.to_csv(), "schema_version,bitstring,count,probability\n1,10,3,0.75\n1,01,1,0.25\n");
        assert_eq!(Distribution::from_json(&d.to_json()).unwrap(), d);
        let e = Distribution::from_probabilities(2, [(3, 1.0)]);
        assert_eq!(Distribution::from_json(&e.to_json()).unwrap(), e);
    }
}
