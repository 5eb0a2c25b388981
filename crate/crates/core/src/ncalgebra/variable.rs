use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::AlgebraError;

pub type VarId = u32;

/// A self-adjoint operator variable. `group` is the party or site tag used by
/// the commuting-partition and Pauli rule families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub id: VarId,
    pub label: String,
    pub group: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VariableSet {
    vars: Vec<Variable>,
    by_label: BTreeMap<String, VarId>,
}

impl VariableSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: &str, group: Option<u32>) -> Result<VarId, AlgebraError> {
        let label = label.trim();
        let ok = label.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
        if !ok || label == "i" {
            return Err(AlgebraError::Parse(alloc::format!("invalid variable label {label:?}")));
        }
        if self.by_label.contains_key(label) {
            return Err(AlgebraError::DuplicateLabel(label.to_string()));
        }
        let id = self.vars.len() as VarId;
        self.vars.push(Variable { id, label: label.to_string(), group });
        self.by_label.insert(label.to_string(), id);
        Ok(id)
    }

    /// Builds a set from `(label, group)` pairs.
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = (&'a str, Option<u32>)>) -> Result<Self, AlgebraError> {
        let mut s = VariableSet::new();
        for (l, g) in labels {
            s.push(l, g)?;
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn get(&self, id: VarId) -> Option<&Variable> {
        self.vars.get(id as usize)
    }

    pub fn id_of(&self, label: &str) -> Option<VarId> {
        self.by_label.get(label).copied()
    }

    pub fn label(&self, id: VarId) -> &str {
        self.vars.get(id as usize).map(|v| v.label.as_str()).unwrap_or("?")
    }

    pub fn group(&self, id: VarId) -> Option<u32> {
        self.vars.get(id as usize).and_then(|v| v.group)
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Variable> {
        self.vars.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars.iter().map(|v| v.id)
    }

    pub fn contains(&self, id: VarId) -> bool {
        (id as usize) < self.vars.len()
    }
}
