//! Shared lexing helpers and atom naming for the textual forms.

use std::collections::BTreeMap;
use std::fmt;

use crate::atoms::Atom;

/// A parse failure at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError {
            offset,
            message: message.into(),
        }
    }
}

/// Binds textual labels to atoms.
///
/// Labels seen for the first time are bound to fresh atoms, so two parses
/// with the same labels under different tables produce isomorphic but not
/// identical values. Atoms without a label print as `a<N>`.
#[derive(Debug, Clone, Default)]
pub struct AtomNames {
    by_label: BTreeMap<String, Atom>,
    by_atom: BTreeMap<Atom, String>,
}

impl AtomNames {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the atom bound to `label`, binding a fresh one if needed.
    pub fn bind(&mut self, label: &str) -> Atom {
        if let Some(a) = self.by_label.get(label) {
            return *a;
        }
        let a = Atom::fresh();
        self.by_label.insert(label.to_string(), a);
        self.by_atom.insert(a, label.to_string());
        a
    }

    /// Binds a label to an existing atom. Returns false if either side is taken.
    pub fn insert(&mut self, label: &str, atom: Atom) -> bool {
        if self.by_label.contains_key(label) || self.by_atom.contains_key(&atom) {
            return false;
        }
        self.by_label.insert(label.to_string(), atom);
        self.by_atom.insert(atom, label.to_string());
        true
    }

    pub fn lookup(&self, label: &str) -> Option<Atom> {
        self.by_label.get(label).copied()
    }

    pub fn name(&self, atom: Atom) -> String {
        match self.by_atom.get(&atom) {
            Some(l) => l.clone(),
            None => atom.to_string(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.by_label.is_empty()
    }
}

/// Textual rendering under a label table.
pub trait Render {
    fn render(&self, names: &AtomNames) -> String;
}

/// Adapter so any `Render` value can be used with `{}`.
pub struct Rendered<'a, T: ?Sized>(pub &'a T, pub &'a AtomNames);

impl<T: Render + ?Sized> fmt::Display for Rendered<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.render(self.1))
    }
}

pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub(crate) fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    pub(crate) fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    /// Consumes `tok` if the remaining input starts with it (after whitespace).
    pub(crate) fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{tok}`")))
        }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.pos, message)
    }

    /// Reads an identifier `[A-Za-z_][A-Za-z0-9_]*`.
    pub(crate) fn ident(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let mut end = 0;
        for (i, c) in rest.char_indices() {
            let ok = if i == 0 {
                c.is_ascii_alphabetic() || c == '_'
            } else {
                c.is_ascii_alphanumeric() || c == '_'
            };
            if !ok {
                break;
            }
            end = i + c.len_utf8();
        }
        if end == 0 {
            return Err(self.error("expected identifier"));
        }
        self.pos += end;
        Ok(&rest[..end])
    }

    /// Looks at the next identifier without consuming it.
    pub(crate) fn peek_ident(&mut self) -> Option<&'a str> {
        let save = self.pos;
        let r = self.ident().ok();
        self.pos = save;
        r
    }

    pub(crate) fn number(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|(_, c)| !c.is_ascii_digit())
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if end == 0 {
            return Err(self.error("expected number"));
        }
        let n = rest[..end]
            .parse()
            .map_err(|_| self.error("number out of range"))?;
        self.pos += end;
        Ok(n)
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    pub(crate) fn finish(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }
}
