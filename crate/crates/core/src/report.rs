//! Condition-by-condition verification reports.

use std::fmt;

use crate::conformal::ModElem;
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Residual {
    Elem(ModElem),
    Scalar(Poly),
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        match self {
            Residual::Elem(e) => e.is_zero(),
            Residual::Scalar(p) => p.is_zero(),
        }
    }
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Residual::Elem(e) => e.fmt(f),
            Residual::Scalar(p) => p.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub condition: String,
    pub args: Vec<String>,
    pub residual: Residual,
}

impl Item {
    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }
}

/// Residuals in a fixed order: condition families in the order they were
/// checked, basis tuples in basis order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub items: Vec<Item>,
    /// Set when a condition list and the Jacobi oracle disagree.
    pub suspect: Option<String>,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Report {
            title: title.to_string(),
            ..Report::default()
        }
    }

    pub fn push(&mut self, condition: &str, args: &[&str], residual: Residual) {
        self.items.push(Item {
            condition: condition.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
            residual,
        });
    }

    pub fn push_elem(&mut self, condition: &str, args: &[&str], r: ModElem) {
        self.push(condition, args, Residual::Elem(r));
    }

    pub fn push_scalar(&mut self, condition: &str, args: &[&str], r: Poly) {
        self.push(condition, args, Residual::Scalar(r));
    }

    pub fn extend(&mut self, other: Report) {
        self.items.extend(other.items);
        if self.suspect.is_none() {
            self.suspect = other.suspect;
        }
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(Item::passed)
    }

    pub fn first_failure(&self) -> Option<&Item> {
        self.items.iter().find(|i| !i.passed())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Item> {
        self.items.iter().filter(|i| !i.passed())
    }

    /// Distinct condition labels with at least one nonzero residual.
    pub fn failing_conditions(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for i in self.failures() {
            if !out.contains(&i.condition) {
                out.push(i.condition.clone());
            }
        }
        out
    }

    pub fn verdict(&self) -> &'static str {
        if self.passed() {
            "pass"
        } else {
            "fail"
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let failing = self.failures().count();
        writeln!(
            f,
            "{}: {} ({} items, {} failing)",
            self.title,
            self.verdict(),
            self.items.len(),
            failing
        )?;
        if let Some(item) = self.first_failure() {
            writeln!(
                f,
                "first failure: {} ({}) residual: {}",
                item.condition,
                item.args.join(","),
                item.residual
            )?;
        }
        if let Some(s) = &self.suspect {
            writeln!(f, "suspect: {s}")?;
        }
        Ok(())
    }
}
