//! A small mixed-integer linear model representation and the solver
//! boundary. Formulations build a [`Model`]; a [`MilpSolver`] backend
//! (supplied by the caller) returns a [`SolveOutcome`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

/// Values within this distance of an integer are rounded to it.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// Allowed absolute violation of a constraint by a returned assignment.
pub const FEASIBILITY_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    /// Non-negative continuous variable with an optional upper bound.
    Continuous,
    /// Non-negative integer variable.
    Integer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Solve parameters carried with a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Wall-clock limit in seconds; `None` means unlimited.
    pub time_limit: Option<f64>,
    /// The objective is zero; any feasible point answers the question.
    pub feasibility_only: bool,
}

impl Default for Params {
    fn default() -> Self {
        Params { time_limit: None, feasibility_only: true }
    }
}

/// A minimisation MILP.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Model {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(VarId, f64)>,
    pub params: Params,
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model { name: name.into(), ..Default::default() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind) -> VarId {
        let upper = match kind {
            VarKind::Binary => 1.0,
            _ => f64::INFINITY,
        };
        self.add_bounded_var(name, kind, 0.0, upper)
    }

    pub fn add_bounded_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        self.variables.push(Variable { name: name.into(), kind, lower, upper });
        VarId(self.variables.len() - 1)
    }

    /// Adds `Σ terms (relation) rhs`. Panics on a reference to an undeclared
    /// variable or a non-finite coefficient; both are formulation bugs.
    pub fn add_constraint(&mut self, name: impl Into<String>, terms: Vec<(VarId, f64)>, relation: Relation, rhs: f64) {
        for &(v, a) in &terms {
            assert!(v.0 < self.variables.len(), "constraint references undeclared variable");
            assert!(a.is_finite(), "non-finite coefficient");
        }
        assert!(rhs.is_finite(), "non-finite right-hand side");
        self.constraints.push(Constraint { name: name.into(), terms, relation, rhs });
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>) {
        self.params.feasibility_only = terms.iter().all(|&(_, a)| a == 0.0);
        self.objective = terms;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Rounds integer-constrained values to the nearest integer.
    /// Fails if any is further than [`INTEGRALITY_TOL`] from an integer.
    pub fn round_integers(&self, values: &mut [f64]) -> Result<(), String> {
        for (var, x) in self.variables.iter().zip(values.iter_mut()) {
            if var.kind == VarKind::Continuous {
                continue;
            }
            let r = libm_round(*x);
            if (r - *x).abs() > INTEGRALITY_TOL {
                return Err(format!("variable {} has fractional value {}", var.name, x));
            }
            *x = r;
        }
        Ok(())
    }

    /// Checks bounds and constraints, returning the first violation.
    pub fn check_assignment(&self, values: &[f64]) -> Result<(), String> {
        if values.len() != self.variables.len() {
            return Err(format!("expected {} values, got {}", self.variables.len(), values.len()));
        }
        for (var, &x) in self.variables.iter().zip(values) {
            if !(x >= var.lower - FEASIBILITY_TOL && x <= var.upper + FEASIBILITY_TOL) {
                return Err(format!("variable {} = {} outside [{}, {}]", var.name, x, var.lower, var.upper));
            }
        }
        for con in &self.constraints {
            let lhs: f64 = con.terms.iter().map(|&(v, a)| a * values[v.0]).sum();
            let ok = match con.relation {
                Relation::Le => lhs <= con.rhs + FEASIBILITY_TOL,
                Relation::Ge => lhs >= con.rhs - FEASIBILITY_TOL,
                Relation::Eq => (lhs - con.rhs).abs() <= FEASIBILITY_TOL,
            };
            if !ok {
                return Err(format!("constraint {} violated: lhs {} vs rhs {}", con.name, lhs, con.rhs));
            }
        }
        Ok(())
    }

    /// Writes the model in CPLEX LP file syntax.
    pub fn to_lp(&self) -> String {
        let names: Vec<String> =
            self.variables.iter().enumerate().map(|(k, v)| lp_name(&v.name, k)).collect();
        let mut out = String::new();
        let _ = writeln!(out, "\\ {}", self.name);
        out.push_str("Minimize\n obj:");
        if self.objective.is_empty() {
            // LP syntax requires at least one term.
            match names.first() {
                Some(n) => {
                    let _ = write!(out, " 0 {n}");
                }
                None => out.push_str(" 0"),
            }
        }
        for &(v, a) in &self.objective {
            let _ = write!(out, " {} {}", signed(a), names[v.0]);
        }
        out.push_str("\nSubject To\n");
        for (k, con) in self.constraints.iter().enumerate() {
            let _ = write!(out, " {}:", lp_name(&con.name, k));
            if con.terms.is_empty() {
                let _ = write!(out, " 0 {}", names.first().map(String::as_str).unwrap_or("x"));
            }
            for &(v, a) in &con.terms {
                let _ = write!(out, " {} {}", signed(a), names[v.0]);
            }
            let rel = match con.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " {} {}", rel, con.rhs);
        }
        out.push_str("Bounds\n");
        for (var, name) in self.variables.iter().zip(&names) {
            if var.kind == VarKind::Binary {
                continue;
            }
            if var.upper.is_finite() {
                let _ = writeln!(out, " {} <= {} <= {}", var.lower, name, var.upper);
            } else {
                let _ = writeln!(out, " {} >= {}", name, var.lower);
            }
        }
        for (kind, header) in [(VarKind::Binary, "Binaries"), (VarKind::Integer, "Generals")] {
            let list: Vec<&str> = self
                .variables
                .iter()
                .zip(&names)
                .filter(|(v, _)| v.kind == kind)
                .map(|(_, n)| n.as_str())
                .collect();
            if !list.is_empty() {
                let _ = writeln!(out, "{header}");
                for chunk in list.chunks(8) {
                    let _ = writeln!(out, " {}", chunk.join(" "));
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

fn signed(a: f64) -> String {
    if a < 0.0 {
        format!("- {}", -a)
    } else {
        format!("+ {a}")
    }
}

fn lp_name(name: &str, k: usize) -> String {
    let clean: String =
        name.chars().map(|ch| if ch.is_ascii_alphanumeric() || ch == '_' { ch } else { '_' }).collect();
    if clean.is_empty() || clean.starts_with(|ch: char| ch.is_ascii_digit()) {
        format!("v{k}_{clean}")
    } else {
        clean
    }
}

fn libm_round(x: f64) -> f64 {
    // f64::round is std-only.
    let t = x as i64 as f64;
    let frac = x - t;
    if frac >= 0.5 {
        t + 1.0
    } else if frac <= -0.5 {
        t - 1.0
    } else {
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Timeout,
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Variable values, present iff the status is optimal.
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
}

impl SolveOutcome {
    pub fn infeasible() -> Self {
        SolveOutcome { status: SolveStatus::Infeasible, values: None, objective: None }
    }

    pub fn timeout() -> Self {
        SolveOutcome { status: SolveStatus::Timeout, values: None, objective: None }
    }

    pub fn error(msg: impl ToString) -> Self {
        SolveOutcome { status: SolveStatus::Error(msg.to_string()), values: None, objective: None }
    }

    /// Builds an optimal outcome from raw backend values: rounds integer
    /// variables and verifies the assignment, degrading to an error status
    /// if either step fails.
    pub fn optimal(model: &Model, mut values: Vec<f64>) -> Self {
        if let Err(e) = model.round_integers(&mut values) {
            return Self::error(e);
        }
        if let Err(e) = model.check_assignment(&values) {
            return Self::error(e);
        }
        let objective = model.objective_value(&values);
        SolveOutcome { status: SolveStatus::Optimal, values: Some(values), objective: Some(objective) }
    }

    /// Converts non-optimal statuses to errors; returns the values on
    /// success and `None` on infeasibility.
    pub fn into_result(self) -> crate::Result<Option<Vec<f64>>> {
        match self.status {
            SolveStatus::Optimal => Ok(self.values),
            SolveStatus::Infeasible => Ok(None),
            SolveStatus::Timeout => Err(crate::Error::Timeout),
            SolveStatus::Error(e) => Err(crate::Error::Solver(e)),
        }
    }
}

/// An exact MILP backend.
pub trait MilpSolver: Sync {
    fn name(&self) -> &str;
    fn solve(&self, model: &Model) -> SolveOutcome;
}

impl<S: MilpSolver + ?Sized> MilpSolver for &S {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn solve(&self, model: &Model) -> SolveOutcome {
        (**self).solve(model)
    }
}

/// Exhaustive solver for pure 0/1 models with a handful of variables.
/// Intended as a test oracle for formulations and backends.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationSolver {
    pub max_vars: usize,
}

impl Default for EnumerationSolver {
    fn default() -> Self {
        EnumerationSolver { max_vars: 20 }
    }
}

impl MilpSolver for EnumerationSolver {
    fn name(&self) -> &str {
        "enumeration"
    }

    fn solve(&self, model: &Model) -> SolveOutcome {
        let n = model.num_vars();
        if n > self.max_vars || model.variables().iter().any(|v| v.kind != VarKind::Binary) {
            return SolveOutcome::error("enumeration solver needs few binary variables");
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut values = vec![0.0; n];
        for mask in 0u64..(1u64 << n) {
            for (k, x) in values.iter_mut().enumerate() {
                *x = ((mask >> k) & 1) as f64;
            }
            if model.check_assignment(&values).is_ok() {
                let obj = model.objective_value(&values);
                if best.as_ref().is_none_or(|(b, _)| obj < *b - 1e-9) {
                    best = Some((obj, values.clone()));
                }
            }
        }
        match best {
            Some((_, v)) => SolveOutcome::optimal(model, v),
            None => SolveOutcome::infeasible(),
        }
    }
}
