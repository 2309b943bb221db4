use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ConfigError, ParseError};
use crate::lattice::{Element, ProcessId, Tag, Universe};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sqrtf,
    Logn,
    Logf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Sqrtf, Algorithm::Logn, Algorithm::Logf];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sqrtf => "sqrtf",
            Algorithm::Logn => "logn",
            Algorithm::Logf => "logf",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

/// Built-in Byzantine behaviours, written as `name` or `name(param)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AdversarySpec {
    Silent,
    /// Honest before sub-round `r`, silent from it on.
    CrashAt(usize),
    EquivocateSplit,
    InjectFresh,
    /// Honest before outer round `r`, silent from it on.
    Terrible(usize),
    LieLabel,
    RandomWithinSafe(u64),
}

impl AdversarySpec {
    pub fn builtin() -> Vec<AdversarySpec> {
        vec![
            AdversarySpec::Silent,
            AdversarySpec::CrashAt(4),
            AdversarySpec::EquivocateSplit,
            AdversarySpec::InjectFresh,
            AdversarySpec::Terrible(2),
            AdversarySpec::LieLabel,
            AdversarySpec::RandomWithinSafe(1),
        ]
    }

    pub fn param(&self) -> u64 {
        match self {
            AdversarySpec::CrashAt(r) | AdversarySpec::Terrible(r) => *r as u64,
            AdversarySpec::RandomWithinSafe(s) => *s,
            _ => 0,
        }
    }
}

pub fn builtin_adversaries() -> Vec<String> {
    AdversarySpec::builtin().iter().map(ToString::to_string).collect()
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::Silent => f.write_str("silent"),
            AdversarySpec::CrashAt(r) => write!(f, "crash_at({r})"),
            AdversarySpec::EquivocateSplit => f.write_str("equivocate_split"),
            AdversarySpec::InjectFresh => f.write_str("inject_fresh"),
            AdversarySpec::Terrible(r) => write!(f, "terrible({r})"),
            AdversarySpec::LieLabel => f.write_str("lie_label"),
            AdversarySpec::RandomWithinSafe(s) => write!(f, "random_within_safe({s})"),
        }
    }
}

impl FromStr for AdversarySpec {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, arg) = match s.split_once('(') {
            Some((name, rest)) => {
                let arg = rest
                    .strip_suffix(')')
                    .ok_or_else(|| ParseError::BadAdversaryParam(s.to_string()))?;
                (name.trim(), Some(arg.trim()))
            }
            None => (s, None),
        };
        let num = || -> Result<u64, ParseError> {
            arg.and_then(|a| a.parse().ok())
                .ok_or_else(|| ParseError::BadAdversaryParam(s.to_string()))
        };
        let bare = |spec| match arg {
            None => Ok(spec),
            Some(_) => Err(ParseError::BadAdversaryParam(s.to_string())),
        };
        match name {
            "silent" => bare(AdversarySpec::Silent),
            "equivocate_split" => bare(AdversarySpec::EquivocateSplit),
            "inject_fresh" => bare(AdversarySpec::InjectFresh),
            "lie_label" => bare(AdversarySpec::LieLabel),
            "crash_at" => Ok(AdversarySpec::CrashAt(num()? as usize)),
            "terrible" => Ok(AdversarySpec::Terrible(num()? as usize)),
            "random_within_safe" => Ok(AdversarySpec::RandomWithinSafe(num()?)),
            _ => Err(ParseError::UnknownAdversary(s.to_string())),
        }
    }
}

impl Serialize for AdversarySpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AdversarySpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub f: usize,
    pub byzantine_ids: BTreeSet<ProcessId>,
    pub algorithm: Algorithm,
    /// One input per process; Byzantine ids use theirs for honest-looking
    /// behaviour.
    pub inputs: Vec<Element>,
    pub adversary: AdversarySpec,
    pub seed: u64,
    pub universe_size: usize,
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self, ConfigError> {
        let c: RunConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn t(&self) -> usize {
        self.byzantine_ids.len()
    }

    pub fn is_correct(&self, id: ProcessId) -> bool {
        !self.byzantine_ids.contains(&id)
    }

    pub fn correct_ids(&self) -> Vec<ProcessId> {
        (0..self.n).filter(|&i| self.is_correct(i)).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::Empty);
        }
        if self.n < 3 * self.f + 1 {
            return Err(ConfigError::Resilience { n: self.n, f: self.f });
        }
        if self.t() > self.f {
            return Err(ConfigError::TooManyByzantine { t: self.t(), f: self.f });
        }
        if let Some(&id) = self.byzantine_ids.iter().find(|&&id| id >= self.n) {
            return Err(ConfigError::ByzantineOutOfRange { id, n: self.n });
        }
        if self.inputs.len() != self.n {
            return Err(ConfigError::InputCount {
                n: self.n,
                got: self.inputs.len(),
            });
        }
        let needed = self.input_tags().len();
        if self.universe_size < needed {
            return Err(ConfigError::UniverseTooSmall {
                size: self.universe_size,
                needed,
            });
        }
        Ok(())
    }

    fn input_tags(&self) -> BTreeSet<Tag> {
        self.inputs.iter().flat_map(|v| v.tags().iter().copied()).collect()
    }

    /// Input tags plus spare tags up to `universe_size`. Spare tags belong
    /// to Byzantine origins (or to everyone when there are none), handed out
    /// round-robin with fresh nonces.
    pub fn universe(&self) -> Universe {
        let mut tags = self.input_tags();
        let owners: Vec<ProcessId> = if self.byzantine_ids.is_empty() {
            (0..self.n).collect()
        } else {
            self.byzantine_ids.iter().copied().collect()
        };
        let mut next_nonce: Vec<u32> = vec![0; self.n.max(1)];
        let mut turn = 0;
        while tags.len() < self.universe_size {
            let origin = owners[turn % owners.len()];
            turn += 1;
            loop {
                let tag = Tag::new(origin, next_nonce[origin]);
                next_nonce[origin] += 1;
                if tags.insert(tag) {
                    break;
                }
            }
        }
        Universe::new(tags)
    }

    /// Spare tags per Byzantine origin, in nonce order.
    pub fn spare_tags(&self) -> std::collections::BTreeMap<ProcessId, Vec<Tag>> {
        let used = self.input_tags();
        let mut out: std::collections::BTreeMap<ProcessId, Vec<Tag>> = std::collections::BTreeMap::new();
        for t in self.universe().tags() {
            if self.byzantine_ids.contains(&t.origin) && !used.contains(t) {
                out.entry(t.origin).or_default().push(*t);
            }
        }
        out
    }

    /// A reproducible configuration for experiments: every process gets its
    /// own tag `(i, 0)`, a third also pick up a neighbour's tag, and the
    /// Byzantine ids are drawn from `seed`.
    pub fn generated(n: usize, f: usize, t: usize, algorithm: Algorithm, adversary: AdversarySpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let byzantine_ids = sample(&mut rng, n, t.min(n)).into_iter().collect();
        // Inputs are pairwise distinct: a pair already drawn by its partner
        // falls back to the singleton.
        let mut seen = std::collections::BTreeSet::new();
        let inputs = (0..n)
            .map(|i| {
                let own = Tag::new(i, 0);
                if n > 1 && rng.gen_ratio(1, 3) {
                    let j = (i + rng.gen_range(1..n)) % n;
                    let pair = Element::from_tags([own, Tag::new(j, 0)]);
                    if seen.insert(pair.clone()) {
                        return pair;
                    }
                }
                Element::singleton(own)
            })
            .collect();
        RunConfig {
            n,
            f,
            byzantine_ids,
            algorithm,
            inputs,
            adversary,
            seed,
            universe_size: 4 * n,
        }
    }
}

/// `floor((n - 1) / 3)`.
pub fn default_f(n: usize) -> usize {
    n.saturating_sub(1) / 3
}
