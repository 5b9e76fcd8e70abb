//! The finite-dimensional mechanics subcommands, reporting as JSON.

use std::path::Path;

use invar_core::mech::{
    self, exterior_closed, lie_derivative, NondegeneracyCertificate, TangentChart, TwoForm,
};
use serde_json::{json, Map, Value};

use crate::problems::load_problem;
use crate::{CliError, SCHEMA_VERSION};

fn two_form_json(form: &TwoForm) -> Value {
    let mut map = Map::new();
    for (j, k, expr) in form.upper_entries() {
        if !expr.is_zero() {
            map.insert(
                format!("{}{}", form.chart().name(j), form.chart().name(k)),
                Value::String(expr.to_string()),
            );
        }
    }
    Value::Object(map)
}

fn nondegeneracy_json(cert: &NondegeneracyCertificate) -> Value {
    json!({
        "seed": cert.seed,
        "points": cert.samples.len(),
        "nonzero_at_all_samples": cert.nonzero_at_all_samples,
        "samples": cert.samples.iter().map(|(point, det)| {
            json!({
                "point": point.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                "det": det.to_string(),
            })
        }).collect::<Vec<_>>(),
    })
}

pub fn fode(field_path: &Path, form_path: &Path) -> Result<(), CliError> {
    let field_file = load_problem(field_path)?;
    let form_file = load_problem(form_path)?;
    let field = field_file
        .vector_field()
        .map_err(|e| CliError::input(format!("{}: {e}", field_path.display())))?;
    let omega = form_file
        .two_form()
        .map_err(|e| CliError::input(format!("{}: {e}", form_path.display())))?;
    if field.chart() != omega.chart() {
        return Err(CliError::input(format!(
            "field and form declare different charts: {} vs {}",
            field.chart().space(),
            omega.chart().space()
        )));
    }

    let closed = exterior_closed(&omega);
    let lie = lie_derivative(&field, &omega)
        .map_err(|e| CliError::internal(e.to_string()))?;
    let mut report = Map::new();
    report.insert("command".into(), json!("mech fode"));
    report.insert("schema_version".into(), json!(SCHEMA_VERSION));
    report.insert("field".into(), json!(field_file.name));
    report.insert("form".into(), json!(form_file.name));
    report.insert(
        "hypotheses".into(),
        json!({
            "form_closed": closed.closed,
            "lie_derivative_zero": lie.is_zero(),
        }),
    );

    if !closed.closed || !lie.is_zero() {
        report.insert("constructed".into(), json!(false));
        let mut witness = Map::new();
        if !closed.closed {
            let chart = omega.chart();
            let mut residuals = Map::new();
            for ((i, j, k), expr) in &closed.residuals {
                residuals.insert(
                    format!("{}{}{}", chart.name(*i), chart.name(*j), chart.name(*k)),
                    Value::String(expr.to_string()),
                );
            }
            witness.insert("closedness_residuals".into(), Value::Object(residuals));
        }
        if !lie.is_zero() {
            witness.insert("lie_derivative".into(), two_form_json(&lie));
        }
        report.insert("witness".into(), Value::Object(witness));
        println!("{}", Value::Object(report));
        return Ok(());
    }

    let out = mech::fode_lagrangian(&field, &omega)
        .map_err(|e| CliError::internal(e.to_string()))?;
    let chart = field.chart();
    let mut b = Map::new();
    let mut lagrangian_terms = Vec::new();
    for (j, coeff) in out.b.coeffs().iter().enumerate() {
        b.insert(chart.name(j).to_string(), Value::String(coeff.to_string()));
        lagrangian_terms.push(format!("({coeff})*v_{}", chart.name(j)));
    }
    let mut residual = Map::new();
    for (j, coeff) in out.residual.coeffs().iter().enumerate() {
        residual.insert(chart.name(j).to_string(), Value::String(coeff.to_string()));
    }
    report.insert("constructed".into(), json!(true));
    report.insert("b".into(), Value::Object(b));
    report.insert("energy".into(), json!(out.energy.to_string()));
    report.insert(
        "lagrangian".into(),
        json!(format!(
            "L = {} - ({})",
            lagrangian_terms.join(" + "),
            out.energy
        )),
    );
    report.insert("residual".into(), Value::Object(residual));
    report.insert("residual_zero".into(), json!(out.residual_zero));
    report.insert("nondegeneracy".into(), nondegeneracy_json(&out.nondegeneracy));
    println!("{}", Value::Object(report));
    Ok(())
}

pub const SODE_NOTE: &str =
    "existence criteria verified; no explicit Lagrangian construction is available for the second-order case";

pub fn sode_check(field_path: &Path, form_path: &Path) -> Result<(), CliError> {
    let field_file = load_problem(field_path)?;
    let form_file = load_problem(form_path)?;
    let field = field_file
        .vector_field()
        .map_err(|e| CliError::input(format!("{}: {e}", field_path.display())))?;
    let omega = form_file
        .two_form()
        .map_err(|e| CliError::input(format!("{}: {e}", form_path.display())))?;
    if field.chart() != omega.chart() {
        return Err(CliError::input(format!(
            "field and form declare different charts: {} vs {}",
            field.chart().space(),
            omega.chart().space()
        )));
    }
    let tangent = TangentChart::from_chart(field.chart().clone())
        .map_err(|e| CliError::input(e.to_string()))?;
    let report = mech::sode_check(&tangent, &field, &omega)
        .map_err(|e| CliError::internal(e.to_string()))?;

    let chart = field.chart();
    let mut vertical = Map::new();
    for ((j, k), expr) in &report.vertical_witnesses {
        vertical.insert(
            format!(
                "{}{}",
                chart.name(tangent.velocity(*j)),
                chart.name(tangent.velocity(*k))
            ),
            Value::String(expr.to_string()),
        );
    }
    let out = json!({
        "command": "mech sode-check",
        "schema_version": SCHEMA_VERSION,
        "field": field_file.name,
        "form": form_file.name,
        "second_order": report.second_order,
        "lie_derivative_zero": report.lie_zero,
        "vertical_block_zero": report.vertical_zero,
        "hypotheses_hold": report.hypotheses_hold,
        "witnesses": {
            "lie_derivative": two_form_json(&report.lie),
            "vertical_block": Value::Object(vertical),
        },
        "note": SODE_NOTE,
    });
    println!("{out}");
    Ok(())
}
