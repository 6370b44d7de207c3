use crate::ExprError;

/// Ordered variable names; position `i` names `x_i`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Vars(Vec<String>);

impl Vars {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(names: I) -> Self {
        Vars(names.into_iter().map(Into::into).collect())
    }

    /// `u1, ..., u<n>`.
    pub fn coordinates(n: usize) -> Self {
        Vars((1..=n).map(|i| format!("u{i}")).collect())
    }

    pub fn with(&self, name: &str) -> Self {
        let mut v = self.0.clone();
        v.push(name.to_string());
        Vars(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Result<usize, ExprError> {
        self.0
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ExprError::UnknownIdentifier { name: name.to_string(), pos: 0 })
    }
}
