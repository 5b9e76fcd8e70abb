//! The symbolic subcommands: `varcheck`, `el`, `tonti`.

use std::path::Path;

use invar_core::parser::{render, BodyEntry, BodyKey, FileKind, ProblemFile};
use invar_core::varcalc::{euler_lagrange, helmholtz, tonti_lagrangian, HelmholtzReport};
use invar_core::JetSpace;

use crate::CliError;

pub fn load_problem(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    invar_core::parse_problem(&text)
        .map_err(|e| CliError::input(format!("{}:{e}", path.display())))
}

/// The pinned JSON shape of a variationality verdict:
/// `{"variational": …, "nonzero_entries": […]}`.
pub fn varcheck_json(report: &HelmholtzReport, space: &JetSpace) -> String {
    let entries: Vec<String> = report
        .witness_entries()
        .map(|(key, expr)| {
            let letters: Vec<&str> = key
                .index
                .indices()
                .iter()
                .map(|&j| space.indep_name(j))
                .collect();
            format!(
                "{{\"sigma\": \"{}\", \"mu\": \"{}\", \"index\": \"{}\", \"expr\": \"{}\"}}",
                space.dep_name(key.sigma),
                space.dep_name(key.mu),
                letters.join(","),
                expr
            )
        })
        .collect();
    format!(
        "{{\"variational\": {}, \"nonzero_entries\": [{}]}}",
        report.variational,
        entries.join(", ")
    )
}

pub fn varcheck(file: &Path, json: bool) -> Result<(), CliError> {
    let problem = load_problem(file)?;
    let source = problem
        .source_form()
        .map_err(|e| CliError::input(format!("{}: {e}", file.display())))?;
    let report = helmholtz(&source);
    if json {
        println!("{}", varcheck_json(&report, report.space()));
    } else {
        println!("{report}");
    }
    Ok(())
}

pub fn euler_lagrange_cmd(file: &Path) -> Result<(), CliError> {
    let problem = load_problem(file)?;
    let lagrangian = problem
        .lagrangian()
        .map_err(|e| CliError::input(format!("{}: {e}", file.display())))?;
    let source = euler_lagrange(&lagrangian);
    let out = ProblemFile {
        kind: FileKind::System,
        name: problem.name.clone(),
        space: source.space().clone(),
        entries: source
            .components()
            .iter()
            .map(|expr| BodyEntry {
                key: BodyKey::Eq,
                expr: expr.clone(),
            })
            .collect(),
    };
    print!("{}", render(&out));
    Ok(())
}

pub fn tonti_cmd(file: &Path, verify: bool) -> Result<(), CliError> {
    let problem = load_problem(file)?;
    let source = problem
        .source_form()
        .map_err(|e| CliError::input(format!("{}: {e}", file.display())))?;
    let lagrangian = tonti_lagrangian(&source);
    let out = ProblemFile {
        kind: FileKind::Lagrangian,
        name: problem.name.clone(),
        space: lagrangian.space().clone(),
        entries: vec![BodyEntry {
            key: BodyKey::Density,
            expr: lagrangian.density().clone(),
        }],
    };
    print!("{}", render(&out));
    if verify {
        let reproduced = euler_lagrange(&lagrangian) == source;
        println!("# verify: euler-lagrange of the density reproduces the source form: {reproduced}");
    }
    Ok(())
}
