use std::fmt::Write;

use super::{Problem, ProblemError, Result};
use crate::numerics::{Grid, StateVector};
use crate::training::Surrogate;

/// One exported field: header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FieldTable {
    /// Comma-separated with a header row, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", cells.join(",")).expect("writing to a string");
        }
        out
    }
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Prediction, reference and pointwise error of every field.
///
/// Spatial problems export one time slice (`t`, default the final level).
/// ODE systems export the whole time series, or the single time `t`.
pub fn export_fields(problem: &Problem, surrogate: &Surrogate, params: &[f64], t: Option<f64>) -> Result<Vec<FieldTable>> {
    if params.len() != problem.param_ranges.len() {
        return Err(ProblemError::Invalid(format!(
            "{} expects parameters {:?}",
            problem.id(),
            problem.id().param_names()
        )));
    }
    match problem.grid {
        Grid::Point => {
            let times = match t {
                Some(t) => vec![t],
                None => problem.times.clone(),
            };
            let preds = surrogate.predict_levels(&times, params)?;
            let refs: Vec<StateVector> = match t {
                Some(t) => vec![problem.reference(params, t)?],
                None => problem.reference_levels(params)?,
            };
            let names: &[&str] = if problem.field_count == 3 { &["x", "y", "z"] } else { &["y"] };
            Ok(names
                .iter()
                .enumerate()
                .map(|(f, name)| FieldTable {
                    name: name.to_string(),
                    header: strings(&["t", "prediction", "reference", "abs_error"]),
                    rows: times
                        .iter()
                        .zip(&preds)
                        .zip(&refs)
                        .map(|((t, p), r)| {
                            let (a, b) = (p.values()[f], r.values()[f]);
                            vec![*t, a, b, (a - b).abs()]
                        })
                        .collect(),
                })
                .collect())
        }
        Grid::Line(_) | Grid::Plane(_) => {
            let steady = problem.times.is_empty();
            let t = if steady { 0.0 } else { t.unwrap_or(*problem.times.last().expect("levels")) };
            let p = surrogate.predict(t, params)?;
            let r = problem.reference(params, t)?;
            let coords = problem.grid.coordinates();
            let mut header = if coords[0].len() == 2 { strings(&["x", "y"]) } else { strings(&["x"]) };
            if !steady {
                header.push("t".into());
            }
            header.extend(strings(&["prediction", "reference", "abs_error"]));
            let rows = coords
                .iter()
                .zip(p.values().iter().zip(r.values()))
                .map(|(c, (a, b))| {
                    let mut row = c.clone();
                    if !steady {
                        row.push(t);
                    }
                    row.extend([*a, *b, (a - b).abs()]);
                    row
                })
                .collect();
            Ok(vec![FieldTable {
                name: "u".into(),
                header,
                rows,
            }])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{ExperimentId, ExperimentSettings};

    fn problem(id: ExperimentId) -> Problem {
        Problem::new(ExperimentSettings::preset(id)).unwrap()
    }

    #[test]
    fn allen_cahn_slice_has_a_row_per_point() {
        let p = problem(ExperimentId::AllenCahnForward);
        let s = p.fresh_surrogate().unwrap();
        let tables = export_fields(&p, &s, &[1e-3], Some(0.65)).unwrap();
        assert_eq!(tables.len(), 1);
        assert_eq!(tables[0].rows.len(), 101);
        assert_eq!(tables[0].header, ["x", "t", "prediction", "reference", "abs_error"]);
        let reference = p.reference(&[1e-3], 0.65).unwrap();
        for (row, r) in tables[0].rows.iter().zip(reference.values()) {
            assert_eq!(row[3].to_bits(), r.to_bits());
        }
    }

    #[test]
    fn fokker_planck_table_has_boltzmann_reference() {
        let p = problem(ExperimentId::FokkerPlanckSteady);
        let s = p.fresh_surrogate().unwrap();
        let tables = export_fields(&p, &s, &[1.5], None).unwrap();
        assert_eq!(tables[0].rows.len(), 1024);
        assert_eq!(tables[0].header[..2], ["x", "y"]);
        let eq = crate::solvers::boltzmann_equilibrium(1.5, &crate::numerics::Grid2D::unit_square(32, 32).unwrap()).unwrap();
        assert!(tables[0].rows.iter().zip(eq.values()).all(|(row, v)| row[3] == *v));
    }

    #[test]
    fn lorenz_exports_one_file_per_component() {
        let p = problem(ExperimentId::LorenzForward);
        let s = p.fresh_surrogate().unwrap();
        let tables = export_fields(&p, &s, &[], None).unwrap();
        assert_eq!(tables.iter().map(|t| t.name.as_str()).collect::<Vec<_>>(), ["x", "y", "z"]);
        assert_eq!(tables[0].rows.len(), 301);
        assert_eq!(tables[2].rows[0][2], 10.0);
        let csv = tables[0].to_csv();
        assert!(csv.starts_with("t,prediction,reference,abs_error\n"));
        assert_eq!(csv.lines().count(), 302);
    }
}
