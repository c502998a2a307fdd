//! Solver oracle suite behind `verify-solvers`.

use std::f64::consts::PI;
use std::fmt::Write;

use pullpush::numerics::{spectral_fourth_derivative, spectral_second_derivative, Grid, Grid1D, Grid2D, StateVector};
use pullpush::solvers::{
    allen_cahn_initial_state, allen_cahn_solver, boltzmann_equilibrium, cfl_check, linear_ode_analytic, Etdrk4,
    FokkerPlanckFvm, LinearOdeEuler, Solver, SpectralPdeConfig, ZeroNonlinearity,
};
use pullpush::numerics::Spectral1D;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Burgers preset step and spacing, the defaults of the CFL row.
pub const BURGERS_DT: f64 = 1e-4;
pub const BURGERS_DX: f64 = 2.0 / 400.0;
const BURGERS_NU: [f64; 5] = [0.01, 0.02, 0.03, 0.04, 0.05];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub name: String,
    pub measured: f64,
    /// Human-readable acceptance rule for `measured`.
    pub rule: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub rows: Vec<OracleRow>,
    pub all_pass: bool,
}

impl VerificationReport {
    pub fn table(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for r in &self.rows {
            let verdict = if r.pass { "PASS" } else { "FAIL" };
            writeln!(out, "{verdict}  {:width$}  {:>12.4e}  {}", r.name, r.measured, r.rule).unwrap();
        }
        let summary = if self.all_pass { "all oracles pass" } else { "oracle failures" };
        writeln!(out, "{summary}").unwrap();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Time step checked against the Burgers CFL limits.
    pub cfl_dt: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { cfl_dt: BURGERS_DT }
    }
}

fn row(name: &str, measured: f64, rule: &str, pass: bool) -> OracleRow {
    OracleRow {
        name: name.to_string(),
        measured,
        rule: rule.to_string(),
        pass: pass && measured.is_finite(),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn scalar(y: f64) -> StateVector {
    StateVector::new(Grid::Point, 1, vec![y]).expect("scalar state")
}

/// Worst error of forward Euler against the closed form for α=1, k=−3, y0=0 on [0, 4].
fn euler_error(dt: f64) -> Result<f64, CliError> {
    let solver = LinearOdeEuler::new(1.0, -3.0, dt)?;
    let steps = (4.0 / dt).round() as usize;
    let mut state = scalar(0.0);
    let mut worst = 0.0f64;
    for n in 1..=steps {
        state = solver.apply(&state, 1)?;
        let exact = linear_ode_analytic(n as f64 * dt, 1.0, -3.0, 0.0)?;
        worst = worst.max((state.values()[0] - exact).abs());
    }
    Ok(worst)
}

fn etdrk4_linear_error() -> Result<f64, CliError> {
    let grid = Grid1D::new(0.0, 2.0 * PI, 32, true)?;
    let sp = Spectral1D::new(&grid)?;
    let symbol = |k: f64| -0.3 * k * k + 0.1;
    let eig: Vec<f64> = sp.wavenumbers().iter().map(|&k| symbol(k)).collect();
    let dt = 0.05;
    let solver = Etdrk4::new(grid, dt, eig, ZeroNonlinearity)?;
    let xs = grid.points();
    let modes = [0.0, 1.0, 3.0, 7.0, 15.0];
    let u0: Vec<f64> = xs.iter().map(|x| modes.iter().map(|m| (m * x).cos()).sum()).collect();
    let out = solver.apply(&StateVector::new(Grid::Line(grid), 1, u0)?, 1)?;
    let exact: Vec<f64> = xs
        .iter()
        .map(|x| modes.iter().map(|&m| (symbol(m) * dt).exp() * (m * x).cos()).sum())
        .collect();
    Ok(max_abs_diff(out.values(), &exact))
}

fn allen_cahn_order() -> Result<f64, CliError> {
    let run = |dt: f64| -> Result<Vec<f64>, CliError> {
        let mut cfg = SpectralPdeConfig::allen_cahn(1e-3);
        cfg.dt = dt;
        let s = allen_cahn_solver(&cfg)?;
        let u0 = allen_cahn_initial_state(s.grid());
        Ok(s.apply(&u0, (0.1 / dt).round() as usize)?.into_values())
    };
    let (a, b, c) = (run(0.025)?, run(0.0125)?, run(0.00625)?);
    Ok((max_abs_diff(&a, &b) / max_abs_diff(&b, &c)).log2())
}

/// Worst error relative to the derivative's amplitude. Round-off grows like
/// the largest wavenumber to the derivative order, so coarse grids are used.
fn spectral_error() -> Result<f64, CliError> {
    let mut worst = 0.0f64;
    for n in [32, 64] {
        let g = Grid1D::new(-1.0, 1.0, n, true)?;
        let xs = g.points();
        for m in [1.0, 3.0] {
            let w = m * PI;
            let u = StateVector::new(Grid::Line(g), 1, xs.iter().map(|x| (w * x).sin()).collect())?;
            let d2 = spectral_second_derivative(&u, &g)?;
            let d4 = spectral_fourth_derivative(&u, &g)?;
            let e2: Vec<f64> = xs.iter().map(|x| -w * w * (w * x).sin()).collect();
            let e4: Vec<f64> = xs.iter().map(|x| w.powi(4) * (w * x).sin()).collect();
            worst = worst.max(max_abs_diff(d2.values(), &e2) / w.powi(2));
            worst = worst.max(max_abs_diff(d4.values(), &e4) / w.powi(4));
        }
    }
    Ok(worst)
}

fn fp_fixed_point_residual() -> Result<f64, CliError> {
    let g = Grid2D::unit_square(32, 32)?;
    let mut worst = 0.0f64;
    for alpha in [1.0, 1.5, 2.0] {
        let eq = boltzmann_equilibrium(alpha, &g)?;
        let out = FokkerPlanckFvm::new(alpha, 1.0 / 32.0, g)?.apply(&eq, 10)?;
        let diff: Vec<f64> = eq.values().iter().zip(out.values()).map(|(a, b)| a - b).collect();
        let norm = (diff.iter().map(|d| d * d).sum::<f64>() * g.cell_area()).sqrt();
        worst = worst.max(norm);
    }
    Ok(worst)
}

fn fp_mass_drift() -> Result<f64, CliError> {
    let g = Grid2D::unit_square(32, 32)?;
    let (cx, cy) = (0.3, 0.6);
    let u0: Vec<f64> = g
        .cell_centers()
        .iter()
        .map(|(x, y)| (-((x - cx).powi(2) + (y - cy).powi(2)) / 0.02).exp() + 0.1)
        .collect();
    let u = StateVector::new(Grid::Plane(g), 1, u0)?;
    let out = FokkerPlanckFvm::new(1.0, 1.0 / 32.0, g)?.apply(&u, 1000)?;
    Ok(((out.total_mass() - u.total_mass()) / u.total_mass()).abs())
}

pub fn verify_solvers(options: &VerifyOptions) -> Result<VerificationReport, CliError> {
    let mut rows = Vec::new();
    let e1 = euler_error(0.01)?;
    let e2 = euler_error(0.005)?;
    rows.push(row("euler_vs_closed_form", e1, "max abs error < 2e-2", e1 < 2e-2));
    let ratio = e1 / e2;
    rows.push(row("euler_halving_ratio", ratio, "error ratio within 20% of 2", (ratio - 2.0).abs() <= 0.4));

    let lin = etdrk4_linear_error()?;
    rows.push(row("etdrk4_linear_modes", lin, "max abs error < 1e-12", lin < 1e-12));
    let order = allen_cahn_order()?;
    rows.push(row("etdrk4_allen_cahn_order", order, "observed order in [3.6, 4.4]", (3.6..=4.4).contains(&order)));

    let sp = spectral_error()?;
    rows.push(row("spectral_derivatives", sp, "max error / amplitude < 1e-9", sp < 1e-9));

    let res = fp_fixed_point_residual()?;
    rows.push(row("fp_boltzmann_fixed_point", res, "residual norm after 10 steps < 1e-8", res < 1e-8));
    let drift = fp_mass_drift()?;
    rows.push(row("fp_mass_drift", drift, "relative drift over 1000 steps < 1e-10", drift < 1e-10));

    let ok = cfl_check(1.0, 0.05, 1e-4, 5e-3);
    let bad = cfl_check(1.0, 0.05, 5e-4, 5e-3);
    let reproduced = ok.pass
        && (ok.advective - 0.02).abs() < 1e-12
        && (ok.diffusive - 0.2).abs() < 1e-12
        && !bad.pass
        && (bad.diffusive - 1.0).abs() < 1e-12;
    rows.push(row(
        "cfl_reference_margins",
        bad.diffusive,
        "dt 1e-4 passes (0.02, 0.2), dt 5e-4 fails (diffusive 1.0)",
        reproduced,
    ));
    let worst = BURGERS_NU
        .iter()
        .map(|&nu| cfl_check(1.0, nu, options.cfl_dt, BURGERS_DX))
        .fold(cfl_check(0.0, 0.0, options.cfl_dt, BURGERS_DX), |acc, r| if r.diffusive > acc.diffusive { r } else { acc });
    let rule = format!("burgers preset at dt {:e}: advective < 1, diffusive < 1/2", options.cfl_dt);
    rows.push(row("cfl_burgers_preset", worst.diffusive, &rule, worst.pass));

    let all_pass = rows.iter().all(|r| r.pass);
    Ok(VerificationReport { rows, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cfl_row_tracks_the_step() {
        let r = verify_solvers(&VerifyOptions { cfl_dt: 5e-4 }).unwrap();
        let cfl = r.rows.iter().find(|r| r.name == "cfl_burgers_preset").unwrap();
        assert!(!cfl.pass);
        assert!((cfl.measured - 1.0).abs() < 1e-12);
        assert!(!r.all_pass);
    }
}
