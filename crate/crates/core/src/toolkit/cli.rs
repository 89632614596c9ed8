//! `sepdec` command-line front end.
//!
//! Exit codes: 0 success, 1 input or numerical error, 2 mathematical rejection
//! (including a failed verification or a negative `check` verdict).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bipartite::BipartiteMatrix;
use crate::channels::{
    choi_of_holevo, depolarizing_form, dephasing_form, detect_cq, detect_qc, identity_choi, ChannelKind,
};
use crate::decompose::{
    b_orthogonal_form, independent_form, marginal_rank_separability, ppt_check, ppt_min_eigenvalue, MarginalRankVerdict,
    Side,
};
use crate::error::{Error, Result};
use crate::matcore::Tolerances;
use crate::toolkit::generators::{
    generate_b_independent, generate_cq_form, generate_entangled_pure, generate_entangled_pure_uniform,
    generate_marginal_rank, generate_qc_form,
};
use crate::toolkit::io::{emit_matrix, read_matrix_file};
use crate::toolkit::report::{build_report, report_from_decomposition, DecompositionReport};
use crate::toolkit::verify::verify_report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "sepdec", version, about = "Canonical separable decompositions of bipartite PSD matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Tolerance overrides; each flag falls back to its `SEPDEC_TOL_*` variable.
#[derive(Args, Debug, Clone, Default)]
pub struct TolArgs {
    #[arg(long, env = "SEPDEC_TOL_HERM")]
    pub tol_herm: Option<f64>,
    #[arg(long, env = "SEPDEC_TOL_PSD")]
    pub tol_psd: Option<f64>,
    #[arg(long, env = "SEPDEC_TOL_RANK")]
    pub tol_rank: Option<f64>,
    #[arg(long, env = "SEPDEC_TOL_NORMAL")]
    pub tol_normal: Option<f64>,
    #[arg(long, env = "SEPDEC_TOL_COMMUTE")]
    pub tol_commute: Option<f64>,
    #[arg(long, env = "SEPDEC_TOL_CLUSTER")]
    pub tol_cluster: Option<f64>,
    #[arg(long, env = "SEPDEC_TOL_RECON")]
    pub tol_recon: Option<f64>,
}

impl TolArgs {
    pub fn resolve(&self) -> Result<Tolerances> {
        let d = Tolerances::default();
        let tol = Tolerances {
            herm: self.tol_herm.unwrap_or(d.herm),
            psd: self.tol_psd.unwrap_or(d.psd),
            rank: self.tol_rank.unwrap_or(d.rank),
            normal: self.tol_normal.unwrap_or(d.normal),
            commute: self.tol_commute.unwrap_or(d.commute),
            cluster: self.tol_cluster.unwrap_or(d.cluster),
            recon: self.tol_recon.unwrap_or(d.recon),
        };
        tol.validate()?;
        Ok(tol)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideArg {
    A,
    B,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::A => Side::A,
            SideArg::B => Side::B,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    BIndependent,
    BOrthogonal,
    MarginalRank,
    Qc,
    Cq,
    Ppt,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    BIndependent,
    MarginalRank,
    Entangled,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelArg {
    Identity,
    Dephasing,
    Depolarizing,
    RandomQc,
    RandomCq,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Canonical decomposition, pure-product refinement and face report.
    Decompose {
        input: PathBuf,
        #[arg(long, value_enum, ignore_case = true, default_value = "b")]
        side: SideArg,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rescale the input to unit trace first.
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Prints a single verdict line.
    Check {
        input: PathBuf,
        #[arg(long, value_enum)]
        test: TestKind,
        #[arg(long, value_enum, ignore_case = true, default_value = "b")]
        side: SideArg,
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Re-checks a JSON report against its input matrix.
    Verify {
        report: PathBuf,
        input: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Writes a seeded instance as a matrix file.
    Generate {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Ranks of the B-side factors (b-independent).
        #[arg(long, value_delimiter = ',', default_value = "1,1")]
        ranks: Vec<usize>,
        /// Number of terms (marginal-rank).
        #[arg(long, default_value_t = 2)]
        p: usize,
        /// Schmidt rank (entangled).
        #[arg(long, default_value_t = 2)]
        schmidt_rank: usize,
        /// Equal Schmidt weights (entangled).
        #[arg(long)]
        uniform: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the ground truth as a JSON report.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Writes the Choi matrix of a named channel.
    Choi {
        #[arg(value_enum)]
        channel: ChannelArg,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Output dimension; defaults to `m`.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Result of a command: text for stdout and the exit code.
struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: EXIT_OK }
    }

    fn verdict(text: String, yes: bool) -> Self {
        Self { text, code: if yes { EXIT_OK } else { EXIT_REJECTED } }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_rejection() {
        EXIT_REJECTED
    } else {
        EXIT_INPUT
    }
}

fn load(path: &Path, normalize: bool) -> Result<BipartiteMatrix> {
    let t = read_matrix_file(path)?;
    if normalize {
        t.normalized()
    } else {
        Ok(t)
    }
}

fn emit(out: Option<&Path>, text: String) -> Result<String> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn line(s: String) -> String {
    s + "\n"
}

fn cmd_check(t: &BipartiteMatrix, test: TestKind, side: Side, tol: &Tolerances) -> Result<Outcome> {
    Ok(match test {
        TestKind::Ppt => {
            let min = ppt_min_eigenvalue(t, tol)?;
            let yes = ppt_check(t, tol);
            let text = if yes {
                "PPT: yes".to_string()
            } else {
                format!("PPT: no (min eigenvalue {min:.6e})")
            };
            Outcome::verdict(line(text), yes)
        }
        TestKind::BIndependent => {
            let label = match side {
                Side::B => "B-independent",
                Side::A => "A-independent",
            };
            match independent_form(t, side, tol) {
                Ok(dec) => Outcome::verdict(line(format!("{label}: yes (p={})", dec.p())), true),
                Err(Error::NotBIndependent(d)) | Err(Error::NotAIndependent(d)) => {
                    Outcome::verdict(line(format!("{label}: no ({d})")), false)
                }
                Err(e) => return Err(e),
            }
        }
        TestKind::BOrthogonal => match b_orthogonal_form(t, tol) {
            Ok(dec) => Outcome::verdict(line(format!("B-orthogonal: yes (p={})", dec.p())), true),
            Err(Error::NotBOrthogonal(d)) => Outcome::verdict(line(format!("B-orthogonal: no ({d})")), false),
            Err(e) => return Err(e),
        },
        TestKind::MarginalRank => match marginal_rank_separability(t, tol)? {
            MarginalRankVerdict::Separable(dec) => {
                Outcome::verdict(line(format!("separable: yes (p={})", dec.p())), true)
            }
            MarginalRankVerdict::Entangled(d) => Outcome::verdict(line(format!("separable: no ({d})")), false),
            MarginalRankVerdict::NotMarginalRank { rank_t, rank_t_b } => Outcome::verdict(
                line(format!("separable: not-marginal-rank (rank T = {rank_t}, rank T_B = {rank_t_b})")),
                false,
            ),
        },
        TestKind::Qc | TestKind::Cq => {
            let (label, class) = match test {
                TestKind::Qc => ("QC", detect_qc(t, tol)?),
                _ => ("CQ", detect_cq(t, tol)?),
            };
            let text = match class.kind {
                ChannelKind::Qc | ChannelKind::Cq => format!("{label}: yes"),
                ChannelKind::OrthogonalOnly => format!("{label}: no (orthogonal but not trace-preserving)"),
                ChannelKind::None => format!("{label}: no"),
            };
            let yes = matches!(class.kind, ChannelKind::Qc | ChannelKind::Cq);
            Outcome::verdict(line(text), yes)
        }
    })
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Decompose { input, side, format, out, normalize, tol } => {
            let tol = tol.resolve()?;
            let t = load(&input, normalize)?;
            let report = build_report(&t, side.into(), &tol, None)?;
            let text = match format {
                Format::Json => line(report.to_json()?),
                Format::Text => report.render_text(),
            };
            Ok(Outcome::ok(emit(out.as_deref(), text)?))
        }
        Command::Check { input, test, side, normalize, tol } => {
            let tol = tol.resolve()?;
            let t = load(&input, normalize)?;
            cmd_check(&t, test, side.into(), &tol)
        }
        Command::Verify { report, input, tol } => {
            let tol = tol.resolve()?;
            let r = DecompositionReport::from_json(&std::fs::read_to_string(report)?)?;
            let t = read_matrix_file(input)?;
            verify_report(&r, &t, &tol)?;
            Ok(Outcome::ok(line("verified: ok".into())))
        }
        Command::Generate { kind, m, n, ranks, p, schmidt_rank, uniform, seed, out, truth } => {
            let (t, gt) = match kind {
                GenKind::BIndependent => {
                    let (t, gt) = generate_b_independent(m, n, &ranks, seed)?;
                    (t, Some(gt))
                }
                GenKind::MarginalRank => {
                    let (t, gt) = generate_marginal_rank(m, n, p, seed)?;
                    (t, Some(gt))
                }
                GenKind::Entangled if uniform => (generate_entangled_pure_uniform(m, n, schmidt_rank, seed)?, None),
                GenKind::Entangled => (generate_entangled_pure(m, n, schmidt_rank, seed)?, None),
            };
            if let Some(path) = truth {
                let gt = gt.ok_or_else(|| Error::InfeasibleRanks("entangled instances have no ground truth".into()))?;
                let report = report_from_decomposition(&t, &gt, &Tolerances::default(), Some(seed));
                std::fs::write(path, line(report.to_json()?))?;
            }
            let text = format!("# generated: {kind:?} m={m} n={n} seed={seed}\n{}", emit_matrix(&t));
            Ok(Outcome::ok(emit(out.as_deref(), text)?))
        }
        Command::Choi { channel, m, n, seed, out } => {
            let n = n.unwrap_or(m);
            if m == 0 || n == 0 {
                return Err(Error::ShapeMismatch("dimensions must be positive".into()));
            }
            let c = match channel {
                ChannelArg::Identity if m != n => {
                    return Err(Error::ShapeMismatch("the identity channel needs m = n".into()))
                }
                ChannelArg::Identity => identity_choi(m),
                ChannelArg::Dephasing if m != n => {
                    return Err(Error::ShapeMismatch("the dephasing channel needs m = n".into()))
                }
                ChannelArg::Dephasing => choi_of_holevo(&dephasing_form(m))?,
                ChannelArg::Depolarizing => choi_of_holevo(&depolarizing_form(m, n))?,
                ChannelArg::RandomQc => choi_of_holevo(&generate_qc_form(m, n, seed)?)?,
                ChannelArg::RandomCq => choi_of_holevo(&generate_cq_form(m, n, seed)?)?,
            };
            Ok(Outcome::ok(emit(out.as_deref(), emit_matrix(&c))?))
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => {
            let _ = stdout.write_all(outcome.text.as_bytes());
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_exits_zero_and_bad_flags_exit_one() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run(["sepdec", "--help"], &mut out, &mut err), EXIT_OK);
        assert!(String::from_utf8(out).unwrap().contains("decompose"));
        let mut out = Vec::new();
        assert_eq!(run(["sepdec", "decompose"], &mut out, &mut err), EXIT_INPUT);
        assert_eq!(run(["sepdec", "frobnicate"], &mut out, &mut err), EXIT_INPUT);
    }

    #[test]
    fn tolerance_flags_override_defaults() {
        let args = TolArgs { tol_rank: Some(1e-7), ..Default::default() };
        let tol = args.resolve().unwrap();
        assert_eq!(tol.rank, 1e-7);
        assert_eq!(tol.cluster, Tolerances::default().cluster);
        let bad = TolArgs { tol_cluster: Some(-1.0), ..Default::default() };
        assert!(bad.resolve().is_err());
    }
}
