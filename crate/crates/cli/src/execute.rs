//! Pipeline: main run, requested checks, CSV artifacts and the manifest.
//!
//! Every artifact is produced in a fixed order from deterministic runs, so a
//! config and seed determine every output byte. The manifest is written last
//! and lists every other file with its SHA-256.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use conrelax::convex::ConvexSet;
use conrelax::format::g17;
use conrelax::grid::{Field, Region};
use conrelax::scalar::Scalar;
use conrelax::solver::{run, RunReport};
use conrelax::verify::{self, Verdict};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::canonical::to_canonical;
use crate::config::{build, CheckConfig, Problem, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Main run plus single-run checks; sweeps are skipped.
    Run,
    /// Everything, sweeps included.
    Study,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub t: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub h: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    /// `false` when an error stopped the pipeline early.
    pub complete: bool,
    pub initial_outside_constraint: bool,
    pub initial_constraint_distance: f64,
    pub all_checks_pass: bool,
    pub skipped_checks: Vec<String>,
    pub snapshots: Vec<SnapshotEntry>,
    pub files: Vec<FileEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub verdicts: Vec<Verdict>,
    pub manifest: Manifest,
    pub output_dir: PathBuf,
}

impl Execution {
    /// 1 on error, 2 when a check fails, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.manifest.error.is_some() {
            1
        } else if self.manifest.all_checks_pass {
            0
        } else {
            2
        }
    }
}

/// Output tree with a running file list.
struct Out {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl Out {
    fn write(&mut self, rel: &str, bytes: &[u8]) -> io::Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.files.push(FileEntry {
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    fn write_with(&mut self, rel: &str, f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> io::Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(rel, &buf)
    }
}

fn csv_table(header: &str, rows: &[Vec<String>]) -> Vec<u8> {
    let mut s = String::from(header);
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s.into_bytes()
}

fn state(v: &[f64]) -> String {
    v.iter().map(|x| g17(*x)).collect::<Vec<_>>().join(" ")
}

fn verdict(check: &str, parameters: String, value: f64, budget: f64, pass: bool) -> Verdict {
    debug_assert!(!parameters.contains(','));
    Verdict {
        check: check.to_string(),
        parameters,
        value,
        budget,
        pass,
    }
}

fn verdicts_csv(verdicts: &[Verdict]) -> Vec<u8> {
    let rows: Vec<Vec<String>> = verdicts
        .iter()
        .map(|v| {
            vec![
                v.check.clone(),
                v.parameters.clone(),
                g17(v.value),
                g17(v.budget),
                v.pass.to_string(),
            ]
        })
        .collect();
    csv_table("check,parameters,value,budget,pass", &rows)
}

fn report_bytes(report: &RunReport<f64>) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    Ok(buf)
}

fn write_run_dir(out: &mut Out, dir: &str, report: &RunReport<f64>) -> io::Result<()> {
    out.write(&format!("{dir}/report.csv"), &report_bytes(report)?)
}

fn worst_distance(k: &ConvexSet<f64>, f: &Field<f64>) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for cell in 0..f.num_cells() {
        worst = worst.max(k.distance(f.cell(cell)).map_err(|e| e.to_string())?);
    }
    Ok(worst)
}

struct State<'a> {
    cfg: &'a RunConfig,
    problem: Problem,
    out: Out,
    verdicts: Vec<Verdict>,
    snapshots: Vec<SnapshotEntry>,
    skipped: Vec<String>,
}

/// Runs the pipeline into `output_dir`. Errors inside the pipeline end up in
/// the manifest; only failures to write the manifest itself are returned.
pub fn execute(cfg: &RunConfig, mode: Mode, output_dir: &Path) -> io::Result<Execution> {
    fs::create_dir_all(output_dir)?;
    let config_text = to_canonical(cfg).map_err(io::Error::other)?;
    let mut out = Out {
        root: output_dir.to_path_buf(),
        files: Vec::new(),
    };
    out.write("config.json", config_text.as_bytes())?;

    let mut manifest = Manifest {
        command: match mode {
            Mode::Run => "run",
            Mode::Study => "study",
        }
        .to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
        seed: cfg.seed,
        complete: false,
        initial_outside_constraint: false,
        initial_constraint_distance: 0.0,
        all_checks_pass: false,
        skipped_checks: Vec::new(),
        snapshots: Vec::new(),
        files: Vec::new(),
        error: None,
    };

    let (verdicts, error) = match build(cfg) {
        Err(e) => (Vec::new(), Some(e)),
        Ok(problem) => {
            let mut st = State {
                cfg,
                problem,
                out,
                verdicts: Vec::new(),
                snapshots: Vec::new(),
                skipped: Vec::new(),
            };
            let result = st.pipeline(mode, &mut manifest);
            let error = result.err();
            st.out.write("verdicts.csv", &verdicts_csv(&st.verdicts))?;
            manifest.snapshots = st.snapshots;
            manifest.skipped_checks = st.skipped;
            out = st.out;
            (st.verdicts, error)
        }
    };
    manifest.complete = error.is_none();
    manifest.all_checks_pass = error.is_none() && verdicts.iter().all(|v| v.pass);
    manifest.error = error;
    out.files.sort_by(|a, b| a.path.cmp(&b.path));
    manifest.files = out.files.clone();
    let text = to_canonical(&manifest).map_err(io::Error::other)?;
    fs::write(output_dir.join("manifest.json"), text)?;
    Ok(Execution {
        verdicts,
        manifest,
        output_dir: output_dir.to_path_buf(),
    })
}

impl State<'_> {
    fn pipeline(&mut self, mode: Mode, manifest: &mut Manifest) -> Result<(), String> {
        let p = &self.problem;
        let d0 = worst_distance(&p.constraint, &p.initial)?;
        manifest.initial_constraint_distance = d0;
        manifest.initial_outside_constraint = d0 > 0.0;

        let report = run(&p.system, &p.constraint, &p.initial, &p.solver).map_err(|e| e.to_string())?;
        self.write_main(&report).map_err(|e| e.to_string())?;

        for (i, check) in self.cfg.verify.clone().iter().enumerate() {
            if check.is_study() && mode == Mode::Run {
                self.skipped.push(format!("{i}:{}", check.name()));
                continue;
            }
            self.check(i, check, &report)
                .map_err(|e| format!("verify[{i}] ({}): {e}", check.name()))?;
        }
        Ok(())
    }

    fn write_main(&mut self, report: &RunReport<f64>) -> io::Result<()> {
        self.out.write("report.csv", &report_bytes(report)?)?;
        let h = report.grid.h();
        for (i, snap) in report.snapshots.iter().enumerate() {
            let file = format!("snapshots/snap_t{i:04}.csv");
            self.out.write_with(&file, |buf| snap.field.write_csv(buf))?;
            self.snapshots.push(SnapshotEntry {
                file,
                t: snap.time(),
                epsilon: report.config.epsilon,
                eta: report.config.eta,
                h,
                dt: snap.dt,
            });
        }
        Ok(())
    }

    fn check(&mut self, i: usize, check: &CheckConfig, report: &RunReport<f64>) -> Result<(), String> {
        let p = &self.problem;
        let (sys, k, w0) = (&p.system, &p.constraint, &p.initial);
        let err = |e: verify::VerifyError| e.to_string();
        let io_err = |e: io::Error| e.to_string();
        let name = check.name();
        match check {
            CheckConfig::Energy => {
                let v = verify::energy_check(report);
                let params = format!("initial={};final={}", g17(v.initial), g17(v.last));
                self.verdicts
                    .push(verdict(name, params, v.max_uptick, f64::slack(), v.pass && v.last <= v.initial));
            }
            CheckConfig::FiniteSpeed { radius } => {
                let (_, rows) = verify::finite_speed_check(report, *radius, sys.speed_bound()).map_err(err)?;
                for r in rows {
                    let params = format!("t={};radius={}", g17(r.t), g17(r.radius));
                    self.verdicts.push(verdict(name, params, r.outside, r.limit, r.pass));
                }
            }
            CheckConfig::Entropy {
                epsilons,
                bumps,
                residual_constant,
            } => {
                let eps = epsilons.clone().unwrap_or_else(|| vec![p.solver.epsilon]);
                let study = verify::entropy_study(sys, k, w0, &p.solver, &eps, *bumps, self.cfg.seed, *residual_constant)
                    .map_err(err)?;
                let mut rows = Vec::new();
                for (e, reports) in eps.iter().zip(&study.reports) {
                    for r in reports {
                        rows.push(vec![
                            g17(*e),
                            state(&r.kappa),
                            r.phi.describe().replace(',', ";"),
                            g17(r.value),
                            g17(r.budget),
                            r.pass.to_string(),
                        ]);
                    }
                    let worst = reports.iter().min_by(|a, b| slack_ratio(a).total_cmp(&slack_ratio(b)));
                    if let Some(w) = worst {
                        let params = format!("epsilon={};pairs={}", g17(*e), reports.len());
                        self.verdicts
                            .push(verdict(name, params, w.value, w.budget, reports.iter().all(|r| r.pass)));
                    }
                }
                self.out
                    .write(
                        &format!("study_{i:02}_entropy.csv"),
                        &csv_table("epsilon,kappa,phi,value,budget,pass", &rows),
                    )
                    .map_err(io_err)?;
            }
            CheckConfig::Contraction {
                radii,
                offsets,
                final_time,
            } => {
                let mut cfg = p.solver.clone();
                cfg.final_time = final_time.unwrap_or(cfg.final_time);
                let other = w0.shift(&lattice(offsets, w0.grid().dim()));
                let rep = verify::contraction_check(sys, k, w0, &other, &cfg, radii).map_err(err)?;
                let mut rows = Vec::new();
                for r in &rep.rows {
                    let radius = r.radius.map_or("all".to_string(), g17);
                    rows.push(vec![
                        g17(r.t),
                        radius.clone(),
                        g17(r.lhs),
                        g17(r.rhs),
                        g17(r.tolerance),
                        r.pass.to_string(),
                    ]);
                    let params = format!("t={};radius={radius}", g17(r.t));
                    self.verdicts
                        .push(verdict(name, params, r.lhs, r.rhs * (1.0 + r.tolerance), r.pass));
                }
                self.out
                    .write(
                        &format!("study_{i:02}_contraction.csv"),
                        &csv_table("t,radius,lhs,rhs,tolerance,pass", &rows),
                    )
                    .map_err(io_err)?;
            }
            CheckConfig::Translation {
                radius,
                offsets,
                final_time,
            } => {
                let mut cfg = p.solver.clone();
                cfg.final_time = final_time.unwrap_or(cfg.final_time);
                let offs = lattice(offsets, w0.grid().dim());
                let rep = verify::translation_estimate_check(sys, k, w0, &offs, &cfg, *radius).map_err(err)?;
                let params = format!("radius={};offsets={}", g17(*radius), offsets_text(&offs));
                let budget = rep.rhs * (1.0 + 5.0 * w0.grid().h());
                self.verdicts.push(verdict(name, params, rep.lhs, budget, rep.pass));
            }
            CheckConfig::EpsilonStudy {
                epsilons,
                omega_radius,
            } => {
                let study = verify::epsilon_cauchy_study(sys, k, w0, &p.solver, epsilons, Region::Ball {
                    radius: *omega_radius,
                })
                .map_err(err)?;
                let mut rows = Vec::new();
                for (j, (e, d)) in epsilons.iter().zip(&study.constraint_dist).enumerate() {
                    rows.push(vec!["constraint_dist".into(), j.to_string(), g17(*e), g17(*d)]);
                }
                for (j, c) in study.cauchy.iter().enumerate() {
                    rows.push(vec!["cauchy".into(), j.to_string(), g17(epsilons[j + 1]), g17(*c)]);
                }
                for (j, r) in study.runs.iter().enumerate() {
                    write_run_dir(&mut self.out, &format!("study_{i:02}_epsilon/eps_{j}"), r).map_err(io_err)?;
                }
                self.out
                    .write(
                        &format!("study_{i:02}_epsilon.csv"),
                        &csv_table("quantity,index,epsilon,value", &rows),
                    )
                    .map_err(io_err)?;
                let first = study.constraint_dist[0];
                let last = *study.constraint_dist.last().expect("nonempty");
                let params = format!("epsilons={};omega_radius={}", state(epsilons), g17(*omega_radius));
                self.verdicts
                    .push(verdict(name, params, last, 0.1 * first, study.pass));
            }
            CheckConfig::EtaStudy { etas, omega_radius } => {
                let study = verify::eta_study(sys, k, w0, &p.solver, etas, Region::Ball {
                    radius: *omega_radius,
                })
                .map_err(err)?;
                let rows: Vec<Vec<String>> = etas
                    .iter()
                    .zip(&study.distances)
                    .enumerate()
                    .map(|(j, (e, d))| vec![j.to_string(), g17(*e), g17(*d)])
                    .collect();
                write_run_dir(&mut self.out, &format!("study_{i:02}_eta/reference"), &study.reference)
                    .map_err(io_err)?;
                for (j, r) in study.runs.iter().enumerate() {
                    write_run_dir(&mut self.out, &format!("study_{i:02}_eta/eta_{j}"), r).map_err(io_err)?;
                }
                self.out
                    .write(&format!("study_{i:02}_eta.csv"), &csv_table("index,eta,distance", &rows))
                    .map_err(io_err)?;
                let first = study.distances[0];
                let last = *study.distances.last().expect("nonempty");
                let params = format!("etas={};omega_radius={}", state(etas), g17(*omega_radius));
                self.verdicts.push(verdict(name, params, last, 0.5 * first, study.pass));
            }
            CheckConfig::L2Data { widths } => {
                let study = verify::l2_data_relaxation_study(sys, k, w0, &p.solver, widths).map_err(err)?;
                let mut rows = Vec::new();
                for r in &study.rows {
                    rows.push(vec![
                        g17(widths[r.first]),
                        g17(widths[r.second]),
                        g17(r.solution_gap),
                        g17(r.data_gap),
                        r.pass.to_string(),
                    ]);
                    let params = format!("width_a={};width_b={}", g17(widths[r.first]), g17(widths[r.second]));
                    self.verdicts.push(verdict(
                        name,
                        params,
                        r.solution_gap,
                        r.data_gap * (1.0 + 1e-10),
                        r.pass,
                    ));
                }
                self.out
                    .write(
                        &format!("study_{i:02}_l2_data.csv"),
                        &csv_table("width_a,width_b,solution_gap,data_gap,pass", &rows),
                    )
                    .map_err(io_err)?;
            }
        }
        Ok(())
    }
}

/// `value / budget`; the pair closest to failing has the smallest ratio.
fn slack_ratio(r: &verify::EntropyReport<f64>) -> f64 {
    if r.budget > 0.0 {
        r.value / r.budget
    } else if r.value < 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    }
}

/// Pads the configured offsets with zeros up to the space dimension.
fn lattice(offsets: &[isize], dim: usize) -> Vec<isize> {
    (0..dim).map(|j| offsets.get(j).copied().unwrap_or(0)).collect()
}

fn offsets_text(offsets: &[isize]) -> String {
    offsets.iter().map(isize::to_string).collect::<Vec<_>>().join(" ")
}
