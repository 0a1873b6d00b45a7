//! MILP backends. HiGHS is the default; the enumeration solver from the
//! core crate is available for tiny models and tests.

use std::num::NonZeroU32;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense};
use latdeck_core::milp::{EnumerationSolver, MilpSolver, Model, Relation, SolveOutcome, SolveStatus, VarKind};

/// HiGHS with one thread and a fixed random seed, so repeated solves of a
/// model are reproducible.
#[derive(Debug, Clone, Copy)]
pub struct HighsSolver {
    pub seed: i32,
    pub threads: u32,
}

impl Default for HighsSolver {
    fn default() -> Self {
        HighsSolver { seed: 0, threads: 1 }
    }
}

impl MilpSolver for HighsSolver {
    fn name(&self) -> &str {
        "highs"
    }

    fn solve(&self, model: &Model) -> SolveOutcome {
        // HiGHS 1.15.0 postsolve can turn valid points of the reduced model
        // into row-violating ones, reject them all and report infeasible
        // while still holding such a point. Those answers, and errors, are
        // redone without presolve.
        let (out, doubtful) = self.run(model, true);
        if doubtful || matches!(out.status, SolveStatus::Error(_)) {
            log::debug!("re-solving {} without presolve", model.name);
            return self.run(model, false).0;
        }
        out
    }
}

impl HighsSolver {
    fn run(&self, model: &Model, presolve: bool) -> (SolveOutcome, bool) {
        let mut pb = RowProblem::default();
        let mut cost = vec![0.0; model.num_vars()];
        for &(v, c) in model.objective() {
            cost[v.0] += c;
        }
        let cols: Vec<_> = model
            .variables()
            .iter()
            .zip(&cost)
            .map(|(var, &c)| match var.kind {
                VarKind::Binary => pb.add_integer_column(c, 0.0..=1.0),
                VarKind::Integer => pb.add_integer_column(c, var.lower..=var.upper),
                VarKind::Continuous => pb.add_column(c, var.lower..=var.upper),
            })
            .collect();
        for con in model.constraints() {
            let row: Vec<_> = con.terms.iter().map(|&(v, a)| (cols[v.0], a)).collect();
            match con.relation {
                Relation::Le => pb.add_row(..=con.rhs, row),
                Relation::Ge => pb.add_row(con.rhs.., row),
                Relation::Eq => pb.add_row(con.rhs..=con.rhs, row),
            }
        }
        let mut hm = match pb.try_optimise(Sense::Minimise) {
            Ok(m) => m,
            Err(e) => return (SolveOutcome::error(format!("HiGHS rejected the model: {e:?}")), false),
        };
        hm.make_quiet();
        hm.set_threads(NonZeroU32::new(self.threads.max(1)).unwrap());
        hm.set_option("random_seed", self.seed);
        hm.set_option("mip_rel_gap", 0.0);
        if !presolve {
            hm.set_option("presolve", "off");
        }
        if let Some(t) = model.params.time_limit {
            hm.set_option("time_limit", t.max(0.0));
        }
        let solved = match hm.try_solve() {
            Ok(s) => s,
            Err(e) => return (SolveOutcome::error(format!("HiGHS failed: {e:?}")), false),
        };
        let point = solved.primal_solution_status();
        let has_point = point == HighsSolutionStatus::Feasible;
        let out = match solved.status() {
            HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => {
                SolveOutcome::optimal(model, solved.get_solution().columns().to_vec())
            }
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => {
                return (SolveOutcome::infeasible(), point != HighsSolutionStatus::None);
            }
            // Any incumbent answers a pure feasibility question.
            HighsModelStatus::ReachedTimeLimit | HighsModelStatus::ReachedSolutionLimit
                if model.params.feasibility_only && has_point =>
            {
                SolveOutcome::optimal(model, solved.get_solution().columns().to_vec())
            }
            HighsModelStatus::ReachedTimeLimit => SolveOutcome::timeout(),
            other => SolveOutcome::error(format!("HiGHS status {other:?}")),
        };
        (out, false)
    }
}

/// A backend chosen at run time.
pub enum Backend {
    Highs(HighsSolver),
    Enumeration(EnumerationSolver),
}

impl Backend {
    /// `highs` or `enumeration`.
    pub fn by_name(name: &str) -> anyhow::Result<Backend> {
        match name {
            "highs" => Ok(Backend::Highs(HighsSolver::default())),
            "enumeration" => Ok(Backend::Enumeration(EnumerationSolver::default())),
            _ => anyhow::bail!("unknown MILP backend {name:?} (expected highs or enumeration)"),
        }
    }
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Highs(HighsSolver::default())
    }
}

impl MilpSolver for Backend {
    fn name(&self) -> &str {
        match self {
            Backend::Highs(s) => s.name(),
            Backend::Enumeration(s) => s.name(),
        }
    }

    fn solve(&self, model: &Model) -> SolveOutcome {
        match self {
            Backend::Highs(s) => s.solve(model),
            Backend::Enumeration(s) => s.solve(model),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use latdeck_core::cut::CutModel;
    use latdeck_core::experiments::generate_experiment;
    use latdeck_core::Deck;

    fn single_binary(rhs: f64) -> Model {
        let mut m = Model::new("t");
        let x = m.add_var("x", VarKind::Binary);
        m.add_constraint("c", vec![(x, 1.0)], Relation::Ge, rhs);
        m
    }

    #[test]
    fn trivial_models() {
        let s = HighsSolver::default();
        let out = s.solve(&single_binary(1.0));
        assert_eq!(out.status, SolveStatus::Optimal);
        assert_eq!(out.values.unwrap(), [1.0]);
        assert_eq!(s.solve(&single_binary(2.0)).status, SolveStatus::Infeasible);
    }

    #[test]
    fn integer_objective() {
        let mut m = Model::new("t");
        let x = m.add_var("x", VarKind::Integer);
        let y = m.add_var("y", VarKind::Binary);
        m.add_constraint("c", vec![(x, 2.0), (y, 1.0)], Relation::Ge, 4.5);
        m.set_objective(vec![(x, 1.0), (y, 3.0)]);
        let out = HighsSolver::default().solve(&m);
        assert_eq!(out.objective, Some(3.0));
    }

    #[test]
    fn agrees_with_enumeration() {
        let mut m = Model::new("t");
        let v: Vec<_> = (0..6).map(|k| m.add_var(format!("x{k}"), VarKind::Binary)).collect();
        m.add_constraint("a", vec![(v[0], 1.0), (v[1], 1.0), (v[2], 1.0)], Relation::Eq, 2.0);
        m.add_constraint("b", vec![(v[3], 2.0), (v[4], -1.0), (v[5], 1.0)], Relation::Ge, 1.0);
        m.add_constraint("c", vec![(v[0], 1.0), (v[3], 1.0)], Relation::Le, 1.0);
        m.set_objective(v.iter().enumerate().map(|(k, &x)| (x, (k as f64) - 2.5)).collect());
        let a = HighsSolver::default().solve(&m);
        let b = EnumerationSolver::default().solve(&m);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn names() {
        assert_eq!(Backend::by_name("highs").unwrap().name(), "highs");
        assert!(Backend::by_name("gurobi").is_err());
    }

    #[test]
    fn presolve_false_infeasibility_is_caught() {
        // Contests of sizes 1..5; candidates 12 and 15 (1-based) share a
        // count, so the minimal cut model has an optimum of 2.
        let style = generate_experiment(1, 5).unwrap();
        let deck = Deck::from_marks(&[
            &[1, 8, 13],
            &[0, 4, 9, 12],
            &[2, 3, 7, 12],
            &[2, 7, 11],
            &[1, 5, 6, 14],
            &[2, 3, 7, 10],
            &[2, 4, 6, 12],
            &[4, 7, 14],
            &[1, 9, 11],
        ]);
        for minimal in [true, false] {
            let cut = CutModel::build(&style, &deck, minimal).unwrap();
            let out = HighsSolver::default().solve(&cut.model);
            assert_eq!(out.status, SolveStatus::Optimal);
            assert_eq!(out.objective, Some(if minimal { 2.0 } else { 0.0 }));
        }
    }
}
