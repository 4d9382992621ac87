use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracfv::harness::{
    run_case, sweep_case_1_1, CaseId, CaseSpec, Discretization, Elimination, HarnessError, BUILD_DESCRIBE,
};
use fracfv::mesh::import_conforming_mesh;

#[derive(Parser)]
#[command(name = "fracfv", version = BUILD_DESCRIBE, about = "Fractured porous media flow and transport benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark case and report errors against its reference.
    Run {
        /// 1.1, 1.2-lite, 1.3, 2, 3 or 4
        case: CaseId,
        #[arg(long)]
        resolution: Option<usize>,
        /// tpfa, mpfa or hybrid
        #[arg(long)]
        disc: Option<Discretization>,
        /// none, schur or star_delta
        #[arg(long)]
        elim: Option<Elimination>,
        /// Directory for report.json, fields and time series.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Case parameter override, `key=value`; repeatable.
        #[arg(long = "override", value_parser = parse_override)]
        overrides: Vec<(String, f64)>,
        /// Accepted for compatibility; runs are single-threaded.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Case 1.1 sweep over K_h, K_v in {1e-3, 1, 1e3}.
    Sweep {
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 1.0, 1e3])]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read a mesh document and check its consistency.
    ValidateMesh { file: PathBuf },
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            case,
            resolution,
            disc,
            elim,
            out,
            overrides,
            threads: _,
        } => {
            let mut spec = CaseSpec::new(case);
            if let Some(r) = resolution {
                spec = spec.with_resolution(r);
            }
            if let Some(d) = disc {
                spec = spec.with_discretization(d);
            }
            if let Some(e) = elim {
                spec = spec.with_elimination(e);
            }
            for (k, v) in &overrides {
                spec = spec.with_override(k, *v);
            }
            let output = run_case(&spec)?;
            let r = &output.report;
            println!("case {} dofs {} solved {}", case, r.dofs, r.solved_dofs);
            for e in &r.errors {
                println!("error {:<10} {:<18} {:.6e}", e.quantity, e.group, e.value);
            }
            if let Some(c) = &r.condition {
                println!("condition full {:.6e} solved {:.6e} ratio {:.6e}", c.full, c.solved, c.ratio);
            }
            for note in &r.notes {
                println!("note {note}");
            }
            if let Some(dir) = out {
                output.write(&dir)?;
                println!("wrote {}", dir.display());
            }
        }
        Command::Sweep { resolution, values, out } => {
            let res = resolution.unwrap_or(CaseId::Case1_1.default_resolution());
            let report = sweep_case_1_1(&values, res)?;
            print!("{}", report.tables());
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("sweep.json"), report.to_json())?;
                std::fs::write(dir.join("sweep.tsv"), report.tables())?;
                println!("wrote {}", dir.display());
            }
        }
        Command::ValidateMesh { file } => {
            let mesh = import_conforming_mesh(&file)?;
            mesh.validate()?;
            for (s, g) in mesh.subdomains.iter().enumerate() {
                println!("subdomain {s} dim {} cells {} faces {}", g.dim, g.num_cells(), g.num_faces());
            }
            println!("interfaces {} dofs {}", mesh.interfaces.len(), mesh.num_dofs());
            println!("ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(HarnessError::Usage(String::new()).exit_code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracfv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
