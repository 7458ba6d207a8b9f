//! Per-scenario verification reports and their CSV/JSON forms.

use serde::{Deserialize, Serialize};

use crate::constructions::{entanglement, product, signalling};
use crate::error::{Error, Result};
use crate::linalg::{binary_entropy, trace_distance, von_neumann_entropy, reduced_density};
use crate::machine::FlipScenario;

/// One flat record per scenario. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub triple_a: f64,
    pub triple_b: f64,
    pub triple_c: f64,
    pub triple_d: f64,
    pub theta: f64,
    pub mu: f64,
    pub nu: f64,
    pub deviation: f64,
    pub lambda_i: f64,
    pub lambda_f: f64,
    pub entropy_i: f64,
    pub entropy_f: f64,
    pub gain: f64,
    pub n_value: f64,
    pub great_circle: bool,
    pub feasible: bool,
}

pub const CSV_FIELDS: [&str; 16] = [
    "triple_a",
    "triple_b",
    "triple_c",
    "triple_d",
    "theta",
    "mu",
    "nu",
    "deviation",
    "lambda_i",
    "lambda_f",
    "entropy_i",
    "entropy_f",
    "gain",
    "n_value",
    "great_circle",
    "feasible",
];

/// 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

impl VerificationReport {
    pub fn csv_header() -> String {
        CSV_FIELDS.join(",")
    }

    pub fn csv_row(&self) -> String {
        let nums = [
            self.triple_a,
            self.triple_b,
            self.triple_c,
            self.triple_d,
            self.theta,
            self.mu,
            self.nu,
            self.deviation,
            self.lambda_i,
            self.lambda_f,
            self.entropy_i,
            self.entropy_f,
            self.gain,
            self.n_value,
        ];
        let mut cells: Vec<String> = nums.iter().map(|&x| format_number(x)).collect();
        cells.push(self.great_circle.to_string());
        cells.push(self.feasible.to_string());
        cells.join(",")
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let cells: Vec<&str> = line.trim_end().split(',').collect();
        if cells.len() != CSV_FIELDS.len() {
            return Err(Error::Config(format!(
                "expected {} columns, got {}",
                CSV_FIELDS.len(),
                cells.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            cells[i]
                .parse()
                .map_err(|_| Error::Config(format!("column {} is not a number: {}", CSV_FIELDS[i], cells[i])))
        };
        let flag = |i: usize| -> Result<bool> {
            cells[i]
                .parse()
                .map_err(|_| Error::Config(format!("column {} is not a boolean: {}", CSV_FIELDS[i], cells[i])))
        };
        Ok(Self {
            triple_a: num(0)?,
            triple_b: num(1)?,
            triple_c: num(2)?,
            triple_d: num(3)?,
            theta: num(4)?,
            mu: num(5)?,
            nu: num(6)?,
            deviation: num(7)?,
            lambda_i: num(8)?,
            lambda_f: num(9)?,
            entropy_i: num(10)?,
            entropy_f: num(11)?,
            gain: num(12)?,
            n_value: num(13)?,
            great_circle: flag(14)?,
            feasible: flag(15)?,
        })
    }
}

/// A quantity derived two ways: closed form and explicit construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub closed_form: f64,
    pub oracle: f64,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn compare(name: &str, closed_form: f64, oracle: f64, tolerance: f64) -> Self {
        let error = (closed_form - oracle).abs();
        Self {
            name: name.into(),
            closed_form,
            oracle,
            error,
            tolerance,
            pass: error <= tolerance,
        }
    }

    /// Entrywise discrepancy between two matrices; `closed_form`/`oracle` hold
    /// the largest eigenvalues of each for context.
    fn matrices(name: &str, error: f64, closed_form: f64, oracle: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            closed_form,
            oracle,
            error,
            tolerance,
            pass: error <= tolerance,
        }
    }

    /// `value ≤ bound`; the slack is reported as the error when violated.
    fn bound(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            closed_form: value,
            oracle: bound,
            error: (value - bound).max(0.0),
            tolerance: 0.0,
            pass: value <= bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub great_circle: f64,
    pub feasibility: f64,
    pub consistency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            great_circle: crate::tol::GREAT_CIRCLE,
            feasibility: crate::tol::DEFAULT,
            consistency: crate::tol::DEFAULT,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("great_circle", self.great_circle),
            ("feasibility", self.feasibility),
            ("consistency", self.consistency),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Config(format!("tolerance {name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductSummary {
    pub initial_entropy: f64,
    pub bracket_norm: f64,
    pub n_formula: f64,
    pub final_entanglement: f64,
}

/// Full evaluation of one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub report: VerificationReport,
    pub frobenius_deviation: f64,
    pub residuals: [f64; 4],
    pub appendix: entanglement::AppendixReport,
    pub product: Option<ProductSummary>,
    pub checks: Vec<Check>,
}

impl Evaluation {
    pub fn consistent(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Evaluates every construction for `scenario`, pairing each closed form with
/// its explicit tensor-construction counterpart.
pub fn evaluate(scenario: &FlipScenario, tol: &Tolerances) -> Result<Evaluation> {
    let t = &scenario.triple;
    let ctol = tol.consistency;
    let mut checks = Vec::new();

    // qutrit–qubit signalling construction
    let sig_i = signalling::alice_marginal_initial(t);
    let sig_f = signalling::alice_marginal_final(scenario);
    let (sig_i_x, sig_f_x) = signalling::alice_marginals_explicit(scenario)?;
    checks.push(Check::matrices(
        "signalling_initial_marginal",
        sig_i.matrix().max_abs_diff(sig_i_x.matrix()),
        sig_i.largest_eigenvalue(),
        sig_i_x.largest_eigenvalue(),
        ctol,
    ));
    checks.push(Check::matrices(
        "signalling_final_marginal",
        sig_f.matrix().max_abs_diff(sig_f_x.matrix()),
        sig_f.largest_eigenvalue(),
        sig_f_x.largest_eigenvalue(),
        ctol,
    ));
    let deviation = signalling::signalling_deviation(scenario);
    checks.push(Check::compare(
        "deviation",
        deviation,
        trace_distance(&sig_i_x, &sig_f_x)?,
        ctol,
    ));
    let residuals = signalling::constraint_residuals(scenario);
    let verdict = signalling::nosignalling_feasibility(t, tol.feasibility);

    // five-qubit entanglement construction
    let ent_i = entanglement::alice_marginal_initial(t);
    let ent_f = entanglement::alice_marginal_final(scenario);
    let (ent_i_x, ent_f_x) = entanglement::alice_marginals_explicit(scenario)?;
    checks.push(Check::matrices(
        "entanglement_initial_marginal",
        ent_i.matrix().max_abs_diff(ent_i_x.matrix()),
        ent_i.largest_eigenvalue(),
        ent_i_x.largest_eigenvalue(),
        ctol,
    ));
    checks.push(Check::matrices(
        "entanglement_final_marginal",
        ent_f.matrix().max_abs_diff(ent_f_x.matrix()),
        ent_f.largest_eigenvalue(),
        ent_f_x.largest_eigenvalue(),
        ctol,
    ));
    let (lambda_i, lambda_f) = entanglement::lambda_pair(scenario);
    checks.push(Check::compare("lambda_i", lambda_i, ent_i_x.largest_eigenvalue(), ctol));
    checks.push(Check::compare("lambda_f", lambda_f, ent_f_x.largest_eigenvalue(), ctol));
    let entropy_i = von_neumann_entropy(&ent_i_x)?;
    let entropy_f = von_neumann_entropy(&ent_f_x)?;
    checks.push(Check::compare("entropy_i", binary_entropy(lambda_i), entropy_i, ctol));
    checks.push(Check::compare("entropy_f", binary_entropy(lambda_f), entropy_f, ctol));
    checks.push(Check::bound("monotone_ok", lambda_f, lambda_i + 1e-10));

    let appendix = entanglement::appendix_terms(scenario);
    checks.push(Check::compare(
        "appendix_identity",
        appendix.lhs_total,
        entanglement::squared_difference(scenario),
        1e-8,
    ));
    let min_term = appendix.terms.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(Check::bound("appendix_terms_nonnegative", -min_term, 1e-10));

    // three-qubit product construction
    let n_value = product::normalization_n(scenario);
    let product = match product::build_product_state(t) {
        Ok(psi) => {
            let initial_entropy = von_neumann_entropy(&reduced_density(&psi, &[0])?)?;
            let out = product::product_final(scenario)?;
            checks.push(Check::bound("product_initial_separable", initial_entropy, ctol));
            checks.push(Check::compare("product_n", out.n_formula, out.bracket_norm, ctol));
            let factored = product::build_product_state_factored(t)?;
            checks.push(Check::matrices(
                "product_forms_agree",
                psi.max_abs_diff(&factored),
                0.0,
                0.0,
                1e-12,
            ));
            Some(ProductSummary {
                initial_entropy,
                bracket_norm: out.bracket_norm,
                n_formula: out.n_formula,
                final_entanglement: out.entanglement,
            })
        }
        Err(Error::SingularNormalization) => None,
        Err(e) => return Err(e),
    };

    let report = VerificationReport {
        triple_a: t.a,
        triple_b: t.b,
        triple_c: t.c,
        triple_d: t.d,
        theta: t.theta,
        mu: scenario.machine.mu(),
        nu: scenario.machine.nu(),
        deviation,
        lambda_i,
        lambda_f,
        entropy_i,
        entropy_f,
        gain: entropy_f - entropy_i,
        n_value,
        great_circle: t.is_great_circle(tol.great_circle),
        feasible: verdict.feasible,
    };
    Ok(Evaluation {
        report,
        frobenius_deviation: signalling::signalling_deviation_frobenius(scenario),
        residuals,
        appendix,
        product,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::MachineModel;
    use crate::triple::FlipTriple;

    #[test]
    fn reference_scenario_report() {
        let s = FlipScenario::new(FlipTriple::reference(), MachineModel::trivial()).unwrap();
        let ev = evaluate(&s, &Tolerances::default()).unwrap();
        assert!(ev.consistent(), "{:?}", ev.failed_checks());
        assert!((ev.report.lambda_i - 0.75).abs() < 1e-12);
        assert!((ev.report.lambda_f - 0.625).abs() < 1e-12);
        assert!((ev.report.gain - 0.14312).abs() < 1e-4);
        assert!((ev.report.n_value - 3.0).abs() < 1e-12);
        assert!(!ev.report.great_circle && !ev.report.feasible);
    }

    #[test]
    fn csv_row_round_trip() {
        let s = FlipScenario::new(FlipTriple::from_angles(0.3, 0.8, 2.5).unwrap(), MachineModel::identity_gram())
            .unwrap();
        let r = evaluate(&s, &Tolerances::default()).unwrap().report;
        let row = r.csv_row();
        let back = VerificationReport::from_csv_row(&row).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.csv_row(), row);
        assert_eq!(VerificationReport::csv_header().split(',').count(), 16);
    }

    #[test]
    fn singular_product_is_skipped() {
        let t = FlipTriple::new(1.0, 0.0, 1.0, 0.0, 0.4).unwrap();
        let s = FlipScenario::new(t, MachineModel::trivial()).unwrap();
        let ev = evaluate(&s, &Tolerances::default()).unwrap();
        assert!(ev.product.is_none());
        assert!(ev.consistent());
    }
}
