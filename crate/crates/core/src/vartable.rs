//! The variable table: names, derivative orders, and successor links.
//!
//! Every polynomial variable is a row here. Differential variables (states,
//! outputs, inputs) come in towers `x, x', x'', ...` linked by successor
//! indices; parameters are constants with no successor. Derivatives are
//! appended on demand, so a table only ever grows, and growing it never
//! invalidates existing polynomials (monomials pad with zeros).

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};

use crate::error::{Error, Result};

static NEXT_TABLE_ID: AtomicU32 = AtomicU32::new(1);

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VarKind {
    Parameter,
    State,
    Output,
    Input,
}

#[derive(Clone, Debug)]
struct VarInfo {
    /// Base name without derivative marks.
    name: String,
    order: u32,
    kind: VarKind,
    /// Index of the order-0 entry of this tower (self for order 0).
    base: usize,
    succ: Option<usize>,
}

/// Ordered list of variables; indices are stable for the table's lifetime.
#[derive(Clone, Debug)]
pub struct VarTable {
    id: u32,
    vars: Vec<VarInfo>,
    by_key: HashMap<(String, u32), usize>,
}

impl Default for VarTable {
    fn default() -> Self {
        Self::new()
    }
}

impl VarTable {
    pub fn new() -> Self {
        VarTable {
            id: NEXT_TABLE_ID.fetch_add(1, Ordering::Relaxed),
            vars: Vec::new(),
            by_key: HashMap::new(),
        }
    }

    /// Identity used by polynomials to detect cross-table mixing.
    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Add an order-0 variable. Errors if the name is already taken.
    pub fn add(&mut self, name: &str, kind: VarKind) -> Result<usize> {
        if self.by_key.contains_key(&(name.to_string(), 0)) {
            return Err(Error::usage(format!("variable {name} declared twice")));
        }
        let idx = self.vars.len();
        self.vars.push(VarInfo { name: name.to_string(), order: 0, kind, base: idx, succ: None });
        self.by_key.insert((name.to_string(), 0), idx);
        Ok(idx)
    }

    /// Derivative of `var`, appending a new row if the tower is too short.
    /// Parameters are constants and have no derivative.
    pub fn ensure_successor(&mut self, var: usize) -> Result<usize> {
        let info = &self.vars[var];
        if info.kind == VarKind::Parameter {
            return Err(Error::usage(format!("parameter {} has no derivative", info.name)));
        }
        if let Some(s) = info.succ {
            return Ok(s);
        }
        let (name, order, kind, base) = (info.name.clone(), info.order, info.kind, info.base);
        let idx = self.vars.len();
        self.vars.push(VarInfo { name: name.clone(), order: order + 1, kind, base, succ: None });
        self.by_key.insert((name, order + 1), idx);
        self.vars[var].succ = Some(idx);
        Ok(idx)
    }

    pub fn successor(&self, var: usize) -> Option<usize> {
        self.vars[var].succ
    }

    pub fn kind(&self, var: usize) -> VarKind {
        self.vars[var].kind
    }

    pub fn order(&self, var: usize) -> u32 {
        self.vars[var].order
    }

    /// Index of the order-0 entry of this variable's tower.
    pub fn base(&self, var: usize) -> usize {
        self.vars[var].base
    }

    pub fn base_name(&self, var: usize) -> &str {
        &self.vars[var].name
    }

    /// Look up `name` differentiated `order` times, if present.
    pub fn lookup(&self, name: &str, order: u32) -> Option<usize> {
        self.by_key.get(&(name.to_string(), order)).copied()
    }

    /// Derivative of order `order` of the tower containing `var`, growing
    /// the tower if necessary.
    pub fn derivative(&mut self, var: usize, order: u32) -> Result<usize> {
        let base = self.vars[var].base;
        let mut cur = base;
        for _ in 0..order {
            cur = self.ensure_successor(cur)?;
        }
        Ok(cur)
    }

    /// Printable name: base name with one prime per derivative order.
    pub fn display_name(&self, var: usize) -> String {
        let info = &self.vars[var];
        let mut s = info.name.clone();
        for _ in 0..info.order {
            s.push('\'');
        }
        s
    }

    /// All order-0 variables of a given kind, in insertion order.
    pub fn bases_of_kind(&self, kind: VarKind) -> Vec<usize> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == kind && v.order == 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        0..self.vars.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn towers_grow_on_demand() {
        let mut t = VarTable::new();
        let x = t.add("x", VarKind::State).unwrap();
        let x1 = t.ensure_successor(x).unwrap();
        let x2 = t.ensure_successor(x1).unwrap();
        assert_eq!(t.ensure_successor(x).unwrap(), x1);
        assert_eq!(t.order(x2), 2);
        assert_eq!(t.base(x2), x);
        assert_eq!(t.display_name(x2), "x''");
        assert_eq!(t.derivative(x, 2).unwrap(), x2);
    }

    #[test]
    fn parameters_are_constants() {
        let mut t = VarTable::new();
        let mu = t.add("mu", VarKind::Parameter).unwrap();
        assert!(t.ensure_successor(mu).is_err());
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut t = VarTable::new();
        t.add("x", VarKind::State).unwrap();
        assert!(t.add("x", VarKind::Output).is_err());
    }
}
