//! Presets reproducing the data behind each figure, plus gnuplot scripts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use spinsurf_core::basis::ups_for;
use spinsurf_core::{Coupling, GeometryParams, Sign, SolverOptions};

use crate::error::{Error, Result};
use crate::sweep::{logspace, run_sweep, Observable, Parameter, SweepSpec, SweepTable};

#[derive(Debug, Clone, Default)]
pub struct FigureOptions {
    pub solver: SolverOptions,
    pub threads: Option<usize>,
    /// Replaces the default `λ` grid where a figure plots against `λ`.
    pub lambda_grid: Option<Vec<f64>>,
}

/// Default `λ` grid: 25 points from 0.01 to 1, log spaced.
pub fn default_lambda_grid() -> Vec<f64> {
    logspace(1e-2, 1.0, 25)
}

/// `Kᶻ` grid of the anisotropy scan, step 0.005 J.
pub fn kz_grid() -> Vec<f64> {
    (0..=300).map(|k| k as f64 * 0.005).collect()
}

/// Hierarchy ratios of the multi-pair ring, ending at the smallest couplings.
pub const RING8_RATIOS: [f64; 6] = [1.0, 0.5, 0.3, 0.2, 0.1, 0.05];
/// Surface weight held fixed in the multi-pair ring.
pub const RING8_LAMBDA: f64 = 0.05;
/// `Jᶻ = Kᶻ` of the XXZ variants.
pub const XXZ_JZ: f64 = 0.5;

/// Largest even ring whose biggest magnetization sector fits in `max_dim`.
pub fn ring_sizes(max_dim: usize) -> Vec<usize> {
    (4..=60)
        .step_by(2)
        .take_while(|&n| sector_dim(n + 2) <= max_dim)
        .collect()
}

fn sector_dim(n: usize) -> usize {
    let ups = ups_for(n, (n % 2) as i32).expect("feasible");
    let mut c: u128 = 1;
    for k in 0..ups {
        c = c * (n - k) as u128 / (k + 1) as u128;
    }
    c.min(usize::MAX as u128) as usize
}

/// One output table of a figure.
#[derive(Debug, Clone)]
pub struct Panel {
    pub name: String,
    pub spec: SweepSpec,
    /// gnuplot `using` columns (1-based) plotted against column `x`.
    pub plot: Vec<usize>,
    pub x: usize,
    pub log_x: bool,
}

fn params(lambda: f64, bulk: Coupling, sign: Sign) -> GeometryParams {
    GeometryParams::new(lambda, bulk, sign)
}

/// The sweeps making up figure `n`.
pub fn figure_panels(n: u32, opts: &FigureOptions) -> Result<Vec<Panel>> {
    let lambdas = opts.lambda_grid.clone().unwrap_or_else(default_lambda_grid);
    let xx = Coupling::xx(1.0);
    let xxz = Coupling::xxz(1.0, XXZ_JZ);
    let af = Sign::Antiferro;
    let conc = Observable::Concurrence(None);
    let mut out = Vec::new();
    let mut push = |name: String, spec: SweepSpec, plot: Vec<usize>, log_x: bool| {
        let spec = SweepSpec {
            solver: opts.solver,
            threads: opts.threads,
            ..spec
        };
        out.push(Panel {
            name,
            spec,
            plot,
            x: 1,
            log_x,
        });
    };
    match n {
        1 => {
            for g in ["square2", "cube2"] {
                for (m, c) in [("xx", xx), ("xxz", xxz)] {
                    let spec = SweepSpec::geometry(
                        g,
                        params(0.1, c, af),
                        Parameter::Lambda,
                        lambdas.clone(),
                    )
                    .observe([conc.clone(), Observable::Gap]);
                    push(format!("fig1_{g}_{m}"), spec, vec![2, 3], true);
                }
            }
        }
        2 => {
            for g in ["square2", "cube2"] {
                let spec = SweepSpec::geometry(g, params(0.1, xxz, af), Parameter::Kz, kz_grid())
                    .observe([conc.clone(), Observable::Gap]);
                push(format!("fig2_{g}"), spec, vec![2], false);
            }
        }
        3 => {
            let sizes: Vec<f64> = ring_sizes(opts.solver.max_dim)
                .into_iter()
                .map(|s| s as f64)
                .collect();
            for lambda in [0.05, 0.1] {
                let spec = SweepSpec::geometry(
                    "ring",
                    params(lambda, xx, af),
                    Parameter::Size,
                    sizes.clone(),
                )
                .observe([Observable::Sites, conc.clone(), Observable::Gap]);
                push(format!("fig3_ring_lambda{lambda}"), spec, vec![3, 4], false);
            }
        }
        4 => {
            for g in ["frustrated_square", "frustrated_pentagon"] {
                for (s, sign) in [("antiferro", Sign::Antiferro), ("ferro", Sign::Ferro)] {
                    let spec = SweepSpec::geometry(
                        g,
                        params(0.1, xx, sign),
                        Parameter::Lambda,
                        lambdas.clone(),
                    )
                    .observe([conc.clone(), Observable::Gap]);
                    push(format!("fig4_{g}_{s}"), spec, vec![2], true);
                }
            }
        }
        5 => {
            let blocks: Vec<f64> = (1..=5).map(|m| m as f64).collect();
            let spec =
                SweepSpec::geometry("modular", params(0.1, xx, af), Parameter::Blocks, blocks)
                    .observe([Observable::Sites, conc.clone(), Observable::Gap]);
            push("fig5_modular".into(), spec, vec![3, 4], false);
        }
        6 => {
            // λ′ defaults to λ²
            for (s, sign) in [("antiferro", Sign::Antiferro), ("ferro", Sign::Ferro)] {
                let spec = SweepSpec::geometry(
                    "nested_squares",
                    params(0.1, xx, sign),
                    Parameter::Lambda,
                    lambdas.clone(),
                )
                .observe([
                    Observable::Concurrence(Some((4, 5))),
                    Observable::Concurrence(Some((6, 7))),
                    Observable::Gap,
                ]);
                push(format!("fig6_nested_squares_{s}"), spec, vec![2, 3], true);
            }
        }
        7 => {
            let pairs = (0..4).map(|p| Observable::Concurrence(Some((8 + 2 * p, 9 + 2 * p))));
            let spec = SweepSpec::geometry(
                "ring8",
                params(RING8_LAMBDA, xx, af),
                Parameter::Ratio,
                RING8_RATIOS.to_vec(),
            )
            .observe(pairs.chain([Observable::Gap]));
            push("fig7_ring8".into(), spec, vec![2, 3, 4, 5], true);
        }
        8 => {
            for g in ["square4", "cube4"] {
                let spec = SweepSpec::geometry(
                    g,
                    params(0.1, xx, Sign::Ferro),
                    Parameter::Lambda,
                    lambdas.clone(),
                )
                .observe([Observable::Fidelity, Observable::Gap]);
                push(format!("fig8_{g}"), spec, vec![2], true);
            }
        }
        _ => return Err(Error::UnknownFigure(n)),
    }
    // ring sizes are plotted against the total number of spins
    for p in out
        .iter_mut()
        .filter(|p| p.spec.parameter == Parameter::Size)
    {
        p.x = 2;
    }
    Ok(out)
}

/// gnuplot script plotting `csv` (the `#` header line is a comment there).
pub fn gnuplot_script(panel: &Panel, csv: &str, columns: &[String]) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    let xlabel = match panel.x {
        1 => panel.spec.parameter.name(),
        c => columns.get(c - 2).map(String::as_str).unwrap_or(""),
    };
    s.push_str(&format!("set xlabel '{xlabel}'\n"));
    if panel.log_x {
        s.push_str("set logscale x\n");
    }
    s.push_str(&format!(
        "set terminal pngcairo size 800,600\nset output '{}.png'\n",
        panel.name
    ));
    let plots: Vec<String> = panel
        .plot
        .iter()
        .map(|&c| {
            let title = columns.get(c - 2).map(String::as_str).unwrap_or("");
            format!(
                "'{csv}' using {}:{c} with linespoints title '{title}'",
                panel.x
            )
        })
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

/// Runs figure `n` and writes `<name>.csv` and `<name>.gp` per panel into `dir`.
pub fn figure(n: u32, dir: impl AsRef<Path>, opts: &FigureOptions) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let panels = figure_panels(n, opts)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for panel in &panels {
        let table = run_sweep(&panel.spec)?;
        let csv = dir.join(format!("{}.csv", panel.name));
        table.write_csv(&csv)?;
        let gp = dir.join(format!("{}.gp", panel.name));
        let script = gnuplot_script(panel, &format!("{}.csv", panel.name), &table.columns);
        fs::write(&gp, script).map_err(|e| Error::io(&gp, e))?;
        written.extend([csv, gp]);
    }
    Ok(written)
}

/// One row of the frustration comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrustrationRow {
    pub geometry: String,
    pub lambda: f64,
    pub antiferro: Option<f64>,
    pub ferro: Option<f64>,
    /// `C_antiferro ≤ C_ferro`, checked for `λ ∈ [0.05, 0.5]`.
    pub ordered: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrustrationTable {
    pub rows: Vec<FrustrationRow>,
}

impl FrustrationTable {
    /// Rows in the checked window where the ordering fails or could not be computed.
    pub fn violations(&self) -> Vec<&FrustrationRow> {
        self.rows
            .iter()
            .filter(|r| r.ordered == Some(false))
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "geometry",
            "lambda",
            "c_antiferro",
            "c_ferro",
            "antiferro_le_ferro",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.geometry.clone(),
                format!("{}", r.lambda),
                opt(r.antiferro),
                opt(r.ferro),
                r.ordered.map(|b| b.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(
            String::from_utf8(w.into_inner().map_err(|e| Error::Spec(e.to_string()))?)
                .expect("utf-8"),
        )
    }
}

pub const FRUSTRATION_WINDOW: (f64, f64) = (0.05, 0.5);

/// Surface concurrence of the frustrated geometries under antiferro and
/// ferro XX couplings along `grid`.
pub fn compare_frustration(grid: &[f64], opts: &FigureOptions) -> Result<FrustrationTable> {
    let mut rows = Vec::new();
    for g in ["frustrated_square", "frustrated_pentagon"] {
        let run = |sign| {
            let spec = SweepSpec::geometry(
                g,
                params(0.1, Coupling::xx(1.0), sign),
                Parameter::Lambda,
                grid.to_vec(),
            )
            .observe([Observable::Concurrence(None)]);
            run_sweep(&SweepSpec {
                solver: opts.solver,
                threads: opts.threads,
                ..spec
            })
        };
        let (af, f): (SweepTable, SweepTable) = (run(Sign::Antiferro)?, run(Sign::Ferro)?);
        for (k, &lambda) in grid.iter().enumerate() {
            let (a, b) = (af.rows[k].values[0], f.rows[k].values[0]);
            let in_window =
                lambda >= FRUSTRATION_WINDOW.0 - 1e-12 && lambda <= FRUSTRATION_WINDOW.1 + 1e-12;
            let ordered = match (a, b) {
                (Some(a), Some(b)) if in_window => Some(a <= b),
                (_, _) if in_window => Some(false),
                _ => None,
            };
            rows.push(FrustrationRow {
                geometry: g.into(),
                lambda,
                antiferro: a,
                ferro: b,
                ordered,
            });
        }
    }
    Ok(FrustrationTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_figures() {
        for n in [0, 9] {
            assert!(
                matches!(figure_panels(n, &FigureOptions::default()), Err(Error::UnknownFigure(m)) if m == n)
            );
        }
    }

    #[test]
    fn ring_sizes_respect_cap() {
        assert_eq!(ring_sizes(1 << 20), (4..=20).step_by(2).collect::<Vec<_>>());
        assert_eq!(ring_sizes(924), vec![4, 6, 8, 10]);
    }

    #[test]
    fn every_preset_validates() {
        for n in 1..=8 {
            for p in figure_panels(n, &FigureOptions::default()).unwrap() {
                p.spec
                    .validate()
                    .unwrap_or_else(|e| panic!("{}: {e}", p.name));
            }
        }
    }

    #[test]
    fn anisotropy_grid_step() {
        let g = kz_grid();
        assert!(g.windows(2).all(|w| w[1] - w[0] <= 0.005 + 1e-12));
        assert!(g[0] == 0.0 && (g[g.len() - 1] - 1.5).abs() < 1e-12);
    }
}
