//! Finite abstract argumentation frameworks and their extension semantics.
//!
//! Arguments are kept sorted by id, so every set and every serialized
//! document comes out in lexicographic order.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest framework [`enumerate_complete_extensions`] accepts by default.
pub const DEFAULT_ORACLE_BOUND: usize = 16;

/// Opaque argument identifier. Never empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ArgumentId(String);

impl ArgumentId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::EmptyArgumentId);
        }
        Ok(ArgumentId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ArgumentId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        ArgumentId::new(value)
    }
}

impl From<ArgumentId> for String {
    fn from(id: ArgumentId) -> String {
        id.0
    }
}

impl fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A set of arguments, typically an extension of some framework.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExtensionSet {
    members: BTreeSet<ArgumentId>,
}

impl ExtensionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn members(&self) -> &BTreeSet<ArgumentId> {
        &self.members
    }

    pub fn contains(&self, id: &ArgumentId) -> bool {
        self.members.contains(id)
    }

    pub fn insert(&mut self, id: ArgumentId) -> bool {
        self.members.insert(id)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_subset(&self, other: &ExtensionSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ArgumentId> {
        self.members.iter()
    }
}

impl FromIterator<ArgumentId> for ExtensionSet {
    fn from_iter<I: IntoIterator<Item = ArgumentId>>(iter: I) -> Self {
        ExtensionSet {
            members: iter.into_iter().collect(),
        }
    }
}

/// An argumentation framework `(arguments, attacks)`.
///
/// Self-attacks are allowed. Duplicate arguments and duplicate attacks
/// collapse on construction.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ArgumentationFramework {
    arguments: Vec<ArgumentId>,
    /// Sorted, deduplicated `(attacker, attacked)` index pairs.
    attacks: Vec<(usize, usize)>,
    attackers: Vec<Vec<usize>>,
}

impl ArgumentationFramework {
    pub fn new<A, T>(arguments: A, attacks: T) -> Result<Self>
    where
        A: IntoIterator<Item = ArgumentId>,
        T: IntoIterator<Item = (ArgumentId, ArgumentId)>,
    {
        let mut args: Vec<ArgumentId> = arguments.into_iter().collect();
        args.sort();
        args.dedup();
        let mut af = ArgumentationFramework {
            attackers: vec![Vec::new(); args.len()],
            arguments: args,
            attacks: Vec::new(),
        };
        let mut pairs = Vec::new();
        for (from, to) in attacks {
            pairs.push((af.index_of(&from)?, af.index_of(&to)?));
        }
        pairs.sort_unstable();
        pairs.dedup();
        for &(from, to) in &pairs {
            af.attackers[to].push(from);
        }
        af.attacks = pairs;
        Ok(af)
    }

    /// Parses the debug document `{"arguments": [...], "attacks": [[from, to], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FrameworkDocument = serde_json::from_str(text)?;
        Self::try_from(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FrameworkDocument::from(self))
            .expect("framework document serializes")
    }

    pub fn arguments(&self) -> &[ArgumentId] {
        &self.arguments
    }

    pub fn len(&self) -> usize {
        self.arguments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arguments.is_empty()
    }

    pub fn attacks(&self) -> impl Iterator<Item = (&ArgumentId, &ArgumentId)> + '_ {
        self.attacks
            .iter()
            .map(|&(from, to)| (&self.arguments[from], &self.arguments[to]))
    }

    pub fn attack_count(&self) -> usize {
        self.attacks.len()
    }

    pub fn contains(&self, id: &ArgumentId) -> bool {
        self.arguments.binary_search(id).is_ok()
    }

    pub fn has_attack(&self, from: &ArgumentId, to: &ArgumentId) -> bool {
        match (
            self.arguments.binary_search(from),
            self.arguments.binary_search(to),
        ) {
            (Ok(f), Ok(t)) => self.attacks.binary_search(&(f, t)).is_ok(),
            _ => false,
        }
    }

    fn index_of(&self, id: &ArgumentId) -> Result<usize> {
        self.arguments
            .binary_search(id)
            .map_err(|_| Error::UnknownArgument(id.to_string()))
    }

    fn mask_of(&self, set: &ExtensionSet) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.arguments.len()];
        for id in set.iter() {
            mask[self.index_of(id)?] = true;
        }
        Ok(mask)
    }

    fn set_of(&self, mask: &[bool]) -> ExtensionSet {
        mask.iter()
            .zip(&self.arguments)
            .filter(|(&m, _)| m)
            .map(|(_, id)| id.clone())
            .collect()
    }

    fn mask_attacks(&self, mask: &[bool], target: usize) -> bool {
        self.attackers[target].iter().any(|&b| mask[b])
    }

    fn mask_defends(&self, mask: &[bool], target: usize) -> bool {
        self.attackers[target]
            .iter()
            .all(|&b| self.mask_attacks(mask, b))
    }

    fn mask_conflict_free(&self, mask: &[bool]) -> bool {
        !self.attacks.iter().any(|&(b, a)| mask[b] && mask[a])
    }

    fn mask_characteristic(&self, mask: &[bool]) -> Vec<bool> {
        (0..self.arguments.len())
            .map(|a| self.mask_defends(mask, a))
            .collect()
    }

    /// True iff some member of `set` attacks `target`.
    pub fn set_attacks(&self, set: &ExtensionSet, target: &ArgumentId) -> Result<bool> {
        let mask = self.mask_of(set)?;
        Ok(self.mask_attacks(&mask, self.index_of(target)?))
    }

    pub fn is_conflict_free(&self, set: &ExtensionSet) -> Result<bool> {
        Ok(self.mask_conflict_free(&self.mask_of(set)?))
    }

    /// True iff `set` attacks every attacker of `target`.
    pub fn defends(&self, set: &ExtensionSet, target: &ArgumentId) -> Result<bool> {
        let mask = self.mask_of(set)?;
        Ok(self.mask_defends(&mask, self.index_of(target)?))
    }

    /// Conflict-free and defends each of its members.
    pub fn is_admissible(&self, set: &ExtensionSet) -> Result<bool> {
        let mask = self.mask_of(set)?;
        Ok(self.mask_conflict_free(&mask)
            && (0..mask.len()).all(|a| !mask[a] || self.mask_defends(&mask, a)))
    }

    /// Admissible and contains every argument it defends.
    pub fn is_complete(&self, set: &ExtensionSet) -> Result<bool> {
        let mask = self.mask_of(set)?;
        Ok(self.mask_conflict_free(&mask) && self.mask_characteristic(&mask) == mask)
    }

    /// The characteristic function: every argument defended by `set`.
    pub fn characteristic(&self, set: &ExtensionSet) -> Result<ExtensionSet> {
        let mask = self.mask_of(set)?;
        Ok(self.set_of(&self.mask_characteristic(&mask)))
    }

    /// Least fixpoint of the characteristic function, iterated from the empty set.
    pub fn grounded_extension(&self) -> ExtensionSet {
        self.set_of(&self.grounded_mask())
    }

    pub(crate) fn grounded_mask(&self) -> Vec<bool> {
        let mut current = vec![false; self.arguments.len()];
        // The iterates grow monotonically, so at most |Arg| + 1 rounds are needed.
        for _ in 0..=self.arguments.len() {
            let next = self.mask_characteristic(&current);
            if next == current {
                break;
            }
            current = next;
        }
        current
    }
}

/// Brute-force enumeration of every complete extension.
///
/// Exponential in the number of arguments; refuses frameworks larger than
/// `bound`. Results are sorted by size, then lexicographically.
pub fn enumerate_complete_extensions(
    af: &ArgumentationFramework,
    bound: usize,
) -> Result<Vec<ExtensionSet>> {
    let n = af.len();
    if n > bound || n >= 63 {
        return Err(Error::SizeBoundExceeded { size: n, bound });
    }
    let mut found = Vec::new();
    let mut mask = vec![false; n];
    for bits in 0u64..(1u64 << n) {
        for (i, m) in mask.iter_mut().enumerate() {
            *m = bits >> i & 1 == 1;
        }
        if af.mask_conflict_free(&mask) && af.mask_characteristic(&mask) == mask {
            found.push(af.set_of(&mask));
        }
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(found)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameworkDocument {
    arguments: Vec<ArgumentId>,
    attacks: Vec<(ArgumentId, ArgumentId)>,
}

impl From<&ArgumentationFramework> for FrameworkDocument {
    fn from(af: &ArgumentationFramework) -> Self {
        FrameworkDocument {
            arguments: af.arguments.clone(),
            attacks: af
                .attacks()
                .map(|(from, to)| (from.clone(), to.clone()))
                .collect(),
        }
    }
}

impl TryFrom<FrameworkDocument> for ArgumentationFramework {
    type Error = Error;

    fn try_from(doc: FrameworkDocument) -> Result<Self> {
        ArgumentationFramework::new(doc.arguments, doc.attacks)
    }
}
