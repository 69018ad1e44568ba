//! Command-line front end: evaluate the torsion function, compute torsion
//! reports, emit per-character tables, and run the verification ledger.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 convergence warning from the truncated spectral sum.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use lens_torsion::spectrum::kappa_direct;
use lens_torsion::torsion::{corollary_report, kappa_closed};
use lens_torsion::verify::{run_all, VerifyConfig};
use lens_torsion::{Error, FlatBundle, LensSpace, TorsionReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "lens-torsion",
    version,
    about = "Contact and Ray-Singer torsion of lens spaces with flat line bundles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the torsion function kappa(s): the closed Hurwitz form and,
    /// for s >= n + 2, the truncated spectral sum with its tail bound.
    Kappa {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: i64,
        /// Rotation parameters nu_1,...,nu_{n+1} (defaults to all ones).
        #[arg(long, value_delimiter = ',')]
        nu: Option<Vec<i64>>,
        /// Holonomy character.
        #[arg(long, default_value_t = 0)]
        u: i64,
        #[arg(long)]
        s: f64,
        /// Truncation bound in p for the spectral sum.
        #[arg(long, default_value_t = 300)]
        pmax: i64,
        /// Truncation bound in q for the spectral sum.
        #[arg(long, default_value_t = 300)]
        qmax: i64,
    },
    /// Compute the torsion report: kappa(0), kappa'(0), the contact and
    /// Ray-Singer torsions, dim H^0, and their ratio check.
    Torsion {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: i64,
        #[arg(long, value_delimiter = ',')]
        nu: Option<Vec<i64>>,
        /// Single holonomy character (rank-one bundle).
        #[arg(long, conflicts_with = "us")]
        u: Option<i64>,
        /// Characters of the rank-one summands of a higher-rank bundle.
        #[arg(long, value_delimiter = ',')]
        us: Option<Vec<i64>>,
    },
    /// Torsion table over every character u = 0..mu-1.
    Table {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: i64,
        #[arg(long, value_delimiter = ',')]
        nu: Option<Vec<i64>>,
    },
    /// Run the identity ledger over a seeded grid.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest group order in the lens-space grid.
        #[arg(long, default_value_t = 8)]
        grid_mu: i64,
        /// Largest n in the lens-space grid.
        #[arg(long, default_value_t = 2)]
        grid_n: usize,
    },
}

/// 17 significant digits: enough for exact f64 round-trips.
fn fmt_g(x: f64) -> String {
    format!("{:.16e}", x)
}

fn fmt_ints(v: &[i64], sep: &str) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn make_lens(n: usize, mu: i64, nu: &Option<Vec<i64>>) -> Result<LensSpace, Error> {
    let nu = nu.clone().unwrap_or_else(|| vec![1; n + 1]);
    LensSpace::new(n, mu, &nu)
}

struct KappaOut {
    lens: LensSpace,
    u: i64,
    s: f64,
    closed: Complex64,
    err: f64,
    direct: Option<(f64, f64, f64)>, // value, tail, discrepancy
}

fn render_kappa(out: &KappaOut, format: Format) -> String {
    match format {
        Format::Text => {
            let mut s = format!(
                "lens space: n = {}, mu = {}, nu = ({}), u = {}\n",
                out.lens.n(),
                out.lens.mu(),
                fmt_ints(out.lens.nu(), ", "),
                out.u
            );
            s += &format!(
                "kappa({}) = {} (err {:.3e})\n",
                out.s,
                fmt_g(out.closed.re),
                out.err
            );
            if let Some((v, tail, disc)) = out.direct {
                s += &format!("spectral sum  = {} (tail {:.3e})\n", fmt_g(v), tail);
                s += &format!("discrepancy   = {:.3e}\n", disc);
            }
            s
        }
        Format::Json => {
            let mut s = format!(
                "{{\"n\": {}, \"mu\": {}, \"nu\": [{}], \"u\": {}, \"s\": {}, \"kappa_closed\": {}, \"err\": {}",
                out.lens.n(),
                out.lens.mu(),
                fmt_ints(out.lens.nu(), ", "),
                out.u,
                fmt_g(out.s),
                fmt_g(out.closed.re),
                fmt_g(out.err)
            );
            if let Some((v, tail, disc)) = out.direct {
                s += &format!(
                    ", \"kappa_direct\": {}, \"tail\": {}, \"discrepancy\": {}",
                    fmt_g(v),
                    fmt_g(tail),
                    fmt_g(disc)
                );
            }
            s += "}\n";
            s
        }
        Format::Csv => {
            let mut s =
                String::from("n,mu,nu,u,s,kappa_closed,err,kappa_direct,tail,discrepancy\n");
            let (v, tail, disc) = match out.direct {
                Some((v, t, d)) => (fmt_g(v), fmt_g(t), fmt_g(d)),
                None => (String::new(), String::new(), String::new()),
            };
            s += &format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                out.lens.n(),
                out.lens.mu(),
                fmt_ints(out.lens.nu(), ";"),
                out.u,
                fmt_g(out.s),
                fmt_g(out.closed.re),
                fmt_g(out.err),
                v,
                tail,
                disc
            );
            s
        }
    }
}

fn report_json(r: &TorsionReport) -> String {
    format!(
        "{{\"n\": {}, \"mu\": {}, \"nu\": [{}], \"us\": [{}], \"kappa0\": {}, \"kappa_prime0\": {}, \"T_contact\": {}, \"T_ray_singer\": {}, \"dim_H0\": {}, \"ratio_check\": {}}}",
        r.n,
        r.mu,
        fmt_ints(&r.nu, ", "),
        fmt_ints(&r.us, ", "),
        fmt_g(r.kappa0),
        fmt_g(r.kappa_prime0),
        fmt_g(r.t_contact),
        fmt_g(r.t_ray_singer),
        r.dim_h0,
        fmt_g(r.ratio_check)
    )
}

fn render_torsion(r: &TorsionReport, format: Format) -> String {
    match format {
        Format::Text => {
            let mut s = format!(
                "lens space: n = {}, mu = {}, nu = ({}), characters = ({})\n",
                r.n,
                r.mu,
                fmt_ints(&r.nu, ", "),
                fmt_ints(&r.us, ", ")
            );
            s += &format!("kappa(0)      = {}\n", fmt_g(r.kappa0));
            s += &format!("kappa'(0)     = {}\n", fmt_g(r.kappa_prime0));
            s += &format!("T_contact     = {}\n", fmt_g(r.t_contact));
            s += &format!("T_ray_singer  = {}\n", fmt_g(r.t_ray_singer));
            s += &format!("dim H^0       = {}\n", r.dim_h0);
            s += &format!("ratio check   = {}\n", fmt_g(r.ratio_check));
            s
        }
        Format::Json => report_json(r) + "\n",
        Format::Csv => {
            let mut s = String::from(
                "n,mu,nu,us,kappa0,kappa_prime0,T_contact,T_ray_singer,dim_H0,ratio_check\n",
            );
            s += &format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.n,
                r.mu,
                fmt_ints(&r.nu, ";"),
                fmt_ints(&r.us, ";"),
                fmt_g(r.kappa0),
                fmt_g(r.kappa_prime0),
                fmt_g(r.t_contact),
                fmt_g(r.t_ray_singer),
                r.dim_h0,
                fmt_g(r.ratio_check)
            );
            s
        }
    }
}

fn render_table(rows: &[TorsionReport], format: Format) -> String {
    match format {
        Format::Text => {
            let mut s = format!(
                "{:>4} {:>24} {:>24} {:>24} {:>7} {:>22}\n",
                "u", "kappa_prime0", "T_contact", "T_ray_singer", "dim_H0", "ratio_check"
            );
            for r in rows {
                s += &format!(
                    "{:>4} {:>24.16e} {:>24.16e} {:>24.16e} {:>7} {:>22.16}\n",
                    r.us[0], r.kappa_prime0, r.t_contact, r.t_ray_singer, r.dim_h0, r.ratio_check
                );
            }
            s
        }
        Format::Json => {
            let body: Vec<String> = rows.iter().map(|r| format!("  {}", report_json(r))).collect();
            format!("[\n{}\n]\n", body.join(",\n"))
        }
        Format::Csv => {
            let mut s = String::from(
                "u,kappa0,kappa_prime0,T_contact,T_ray_singer,dim_H0,ratio_check\n",
            );
            for r in rows {
                s += &format!(
                    "{},{},{},{},{},{},{}\n",
                    r.us[0],
                    fmt_g(r.kappa0),
                    fmt_g(r.kappa_prime0),
                    fmt_g(r.t_contact),
                    fmt_g(r.t_ray_singer),
                    r.dim_h0,
                    fmt_g(r.ratio_check)
                );
            }
            s
        }
    }
}

fn emit(text: &str, output: &Option<PathBuf>) -> Result<(), String> {
    match output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {path:?}: {e}")),
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Convergence { .. } => 3,
        _ => 2,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_kappa(
    format: Format,
    n: usize,
    mu: i64,
    nu: &Option<Vec<i64>>,
    u: i64,
    s: f64,
    pmax: i64,
    qmax: i64,
) -> Result<(String, i32), Error> {
    let lens = make_lens(n, mu, nu)?;
    let closed = kappa_closed(&lens, u, Complex64::new(s, 0.0))?;
    let mut code = 0;
    let direct = if s >= (n + 2) as f64 {
        let d = kappa_direct(&lens, u, s, pmax, qmax)?;
        if !d.converged {
            code = 3;
        }
        Some((d.value, d.tail, (d.value - closed.value.re).abs()))
    } else {
        None
    };
    let out = KappaOut {
        lens,
        u,
        s,
        closed: closed.value,
        err: closed.err,
        direct,
    };
    Ok((render_kappa(&out, format), code))
}

fn cmd_torsion(
    format: Format,
    n: usize,
    mu: i64,
    nu: &Option<Vec<i64>>,
    u: &Option<i64>,
    us: &Option<Vec<i64>>,
) -> Result<(String, i32), Error> {
    let lens = make_lens(n, mu, nu)?;
    let us = match (u, us) {
        (Some(u), None) => vec![*u],
        (None, Some(us)) => us.clone(),
        (None, None) => vec![0],
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let bundle = FlatBundle::new(&lens, &us)?;
    let report = corollary_report(&lens, &bundle)?;
    Ok((render_torsion(&report, format), 0))
}

fn cmd_table(format: Format, n: usize, mu: i64, nu: &Option<Vec<i64>>) -> Result<(String, i32), Error> {
    let lens = make_lens(n, mu, nu)?;
    let rows = (0..lens.mu())
        .map(|u| corollary_report(&lens, &FlatBundle::line(&lens, u)))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok((render_table(&rows, format), 0))
}

fn cmd_verify(format: Format, cfg: VerifyConfig) -> (String, i32) {
    let results = run_all(&cfg);
    let failed = results.iter().filter(|r| !r.pass).count();
    let text = match format {
        Format::Text => {
            let mut s = String::new();
            for r in &results {
                s += &format!(
                    "{:<36} max residual {:>12.3e}  (tol {:>8.1e}, {:>5} pts)  {}\n",
                    r.name,
                    r.max_residual,
                    r.tolerance,
                    r.points,
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            s += &format!(
                "{} checks, {} failed (seed {}, grid mu <= {}, n <= {})\n",
                results.len(),
                failed,
                cfg.seed,
                cfg.grid_mu,
                cfg.grid_n
            );
            s
        }
        Format::Json => {
            let body: Vec<String> = results
                .iter()
                .map(|r| {
                    format!(
                        "  {{\"check\": \"{}\", \"max_residual\": {}, \"tolerance\": {}, \"points\": {}, \"pass\": {}}}",
                        r.name,
                        fmt_g(r.max_residual),
                        fmt_g(r.tolerance),
                        r.points,
                        r.pass
                    )
                })
                .collect();
            format!("[\n{}\n]\n", body.join(",\n"))
        }
        Format::Csv => {
            let mut s = String::from("check,max_residual,tolerance,points,pass\n");
            for r in &results {
                s += &format!(
                    "{},{},{},{},{}\n",
                    r.name,
                    fmt_g(r.max_residual),
                    fmt_g(r.tolerance),
                    r.points,
                    r.pass
                );
            }
            s
        }
    };
    (text, if failed > 0 { 1 } else { 0 })
}

fn run() -> i32 {
    let cli = Cli::parse();
    let result: Result<(String, i32), Error> = match &cli.command {
        Command::Kappa {
            n,
            mu,
            nu,
            u,
            s,
            pmax,
            qmax,
        } => cmd_kappa(cli.format, *n, *mu, nu, *u, *s, *pmax, *qmax),
        Command::Torsion { n, mu, nu, u, us } => cmd_torsion(cli.format, *n, *mu, nu, u, us),
        Command::Table { n, mu, nu } => cmd_table(cli.format, *n, *mu, nu),
        Command::Verify {
            seed,
            grid_mu,
            grid_n,
        } => Ok(cmd_verify(
            cli.format,
            VerifyConfig {
                seed: *seed,
                grid_mu: *grid_mu,
                grid_n: *grid_n,
            },
        )),
    };
    match result {
        Ok((text, code)) => {
            if let Err(msg) = emit(&text, &cli.output) {
                eprintln!("error: {msg}");
                return 2;
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn main() {
    // Flush explicitly so piped output is complete before the exit code.
    let code = run();
    std::io::stdout().flush().ok();
    std::process::exit(code);
}
