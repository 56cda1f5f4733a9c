use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ProbError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negated,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negated,
            Polarity::Negated => Polarity::Positive,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Polarity::Positive
    }

    pub fn from_bool(value: bool) -> Self {
        if value {
            Polarity::Positive
        } else {
            Polarity::Negated
        }
    }
}

/// A literal over one binary variable: `X` or `~X`.
///
/// Serialized as a string, with a leading `~` for the negated form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Proposition {
    variable: String,
    polarity: Polarity,
}

impl Proposition {
    pub fn new(variable: impl Into<String>, polarity: Polarity) -> Self {
        Self {
            variable: variable.into(),
            polarity,
        }
    }

    pub fn positive(variable: impl Into<String>) -> Self {
        Self::new(variable, Polarity::Positive)
    }

    pub fn negated(variable: impl Into<String>) -> Self {
        Self::new(variable, Polarity::Negated)
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn is_positive(&self) -> bool {
        self.polarity.is_positive()
    }

    /// Negation is an involution: `p.negate().negate() == p`.
    pub fn negate(&self) -> Self {
        Self {
            variable: self.variable.clone(),
            polarity: self.polarity.flip(),
        }
    }
}

pub(crate) fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with(['~', '!', '¬'])
        && !name.chars().any(|c| c.is_whitespace() || c == ',')
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::Positive => write!(f, "{}", self.variable),
            Polarity::Negated => write!(f, "~{}", self.variable),
        }
    }
}

impl FromStr for Proposition {
    type Err = ProbError;

    /// Accepts `E`, `~E`, `!E` and `¬E`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (polarity, name) = if let Some(rest) = s.strip_prefix('~') {
            (Polarity::Negated, rest)
        } else if let Some(rest) = s.strip_prefix('!') {
            (Polarity::Negated, rest)
        } else if let Some(rest) = s.strip_prefix('¬') {
            (Polarity::Negated, rest)
        } else {
            (Polarity::Positive, s)
        };
        if !valid_name(name) {
            return Err(ProbError::InvalidName(s.to_string()));
        }
        Ok(Proposition::new(name, polarity))
    }
}

impl Serialize for Proposition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Proposition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// A consistent conjunction of literals. The empty set stands for "no
/// evidence".
///
/// No variable may appear in both polarities; a literal repeated with the
/// same polarity is absorbed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvidenceSet {
    literals: BTreeMap<String, Polarity>,
}

impl EvidenceSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(literal: Proposition) -> Self {
        let mut literals = BTreeMap::new();
        literals.insert(literal.variable, literal.polarity);
        Self { literals }
    }

    pub fn from_literals<I>(literals: I) -> Result<Self, ProbError>
    where
        I: IntoIterator<Item = Proposition>,
    {
        let mut set = Self::empty();
        for literal in literals {
            set.insert(literal)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, literal: Proposition) -> Result<(), ProbError> {
        match self.literals.get(&literal.variable) {
            Some(existing) if *existing != literal.polarity => {
                Err(ProbError::ConflictingLiteral(literal.variable))
            }
            Some(_) => Ok(()),
            None => {
                self.literals.insert(literal.variable, literal.polarity);
                Ok(())
            }
        }
    }

    pub fn with(mut self, literal: Proposition) -> Result<Self, ProbError> {
        self.insert(literal)?;
        Ok(self)
    }

    pub fn union(&self, other: &EvidenceSet) -> Result<Self, ProbError> {
        let mut out = self.clone();
        for literal in other.iter() {
            out.insert(literal)?;
        }
        Ok(out)
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn get(&self, variable: &str) -> Option<Polarity> {
        self.literals.get(variable).copied()
    }

    pub fn contains(&self, literal: &Proposition) -> bool {
        self.get(literal.variable()) == Some(literal.polarity())
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.literals.keys().map(String::as_str)
    }

    pub fn shares_variable_with(&self, other: &EvidenceSet) -> bool {
        self.variables().any(|v| other.get(v).is_some())
    }

    /// Literals in variable-name order.
    pub fn iter(&self) -> impl Iterator<Item = Proposition> + '_ {
        self.literals
            .iter()
            .map(|(v, p)| Proposition::new(v.clone(), *p))
    }

    pub fn to_vec(&self) -> Vec<Proposition> {
        self.iter().collect()
    }
}

impl fmt::Display for EvidenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl Serialize for EvidenceSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for EvidenceSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let literals = Vec::<Proposition>::deserialize(deserializer)?;
        EvidenceSet::from_literals(literals).map_err(serde::de::Error::custom)
    }
}
