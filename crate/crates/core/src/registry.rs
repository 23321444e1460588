//! Name-indexed tables of strategy objects.

use crate::error::{Error, Result};

/// Something that can be registered and selected by name.
pub trait Named {
    fn name(&self) -> &'static str;
}

/// An ordered table of trait objects keyed by their [`Named::name`].
///
/// Iteration order is registration order, which the verification report
/// relies on for deterministic output.
pub struct Registry<T: ?Sized + Named> {
    family: &'static str,
    entries: Vec<Box<T>>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(family: &'static str) -> Self {
        Self {
            family,
            entries: Vec::new(),
        }
    }

    /// Adds `entry`, replacing any previous entry of the same name in place.
    pub fn register(&mut self, entry: Box<T>) -> &mut Self {
        match self.entries.iter().position(|e| e.name() == entry.name()) {
            Some(idx) => self.entries[idx] = entry,
            None => self.entries.push(entry),
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                family: self.family,
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(|b| b.as_ref())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter: Named {
        fn greet(&self) -> String;
    }

    struct Hello(&'static str);
    impl Named for Hello {
        fn name(&self) -> &'static str {
            self.0
        }
    }
    impl Greeter for Hello {
        fn greet(&self) -> String {
            format!("hello from {}", self.0)
        }
    }

    #[test]
    fn lookup_and_order() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register(Box::new(Hello("b"))).register(Box::new(Hello("a")));
        assert_eq!(reg.names(), vec!["b", "a"]);
        assert_eq!(reg.get("a").unwrap().greet(), "hello from a");
        reg.register(Box::new(Hello("b")));
        assert_eq!(reg.len(), 2);
    }

    #[test]
    fn unknown_name_lists_known() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register(Box::new(Hello("x")));
        let err = reg.get("y").err().unwrap();
        assert!(err.to_string().contains("known: x"), "{err}");
        assert!(err.is_input_error());
    }
}
