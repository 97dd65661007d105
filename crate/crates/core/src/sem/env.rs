use super::Value;
use crate::syntax::Ident;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Entry {
    name: Ident,
    value: Value,
    mutable: bool,
}

/// Variable bindings in declaration order. Later bindings shadow earlier
/// ones; `truncate` pops back to a saved depth when a block ends.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    entries: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AssignError {
    #[error("`{0}` is not declared")]
    Undeclared(Ident),
    #[error("`{0}` is not mutable")]
    Immutable(Ident),
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Env
    where
        I: IntoIterator<Item = (S, Value)>,
        S: Into<Ident>,
    {
        let mut env = Env::new();
        for (k, v) in pairs {
            env.bind(k.into(), v, false);
        }
        env
    }

    pub fn bind(&mut self, name: Ident, value: Value, mutable: bool) {
        self.entries.push(Entry { name, value, mutable });
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.entries.iter().rev().find(|e| &*e.name == name).map(|e| &e.value)
    }

    pub fn assign(&mut self, name: &str, value: Value) -> Result<(), AssignError> {
        match self.entries.iter_mut().rev().find(|e| &*e.name == name) {
            Some(e) if e.mutable => {
                e.value = value;
                Ok(())
            }
            Some(e) => Err(AssignError::Immutable(e.name.clone())),
            None => Err(AssignError::Undeclared(name.into())),
        }
    }

    pub fn depth(&self) -> usize {
        self.entries.len()
    }

    pub fn truncate(&mut self, depth: usize) {
        self.entries.truncate(depth);
    }

    /// Visible bindings, innermost last, shadowed entries omitted.
    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &Value)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(i, e)| !self.entries[i + 1..].iter().any(|later| later.name == e.name))
            .map(|(_, e)| (&e.name, &e.value))
    }
}
