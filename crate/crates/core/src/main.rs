//! Command-line surface for the Γ-sequence engine.
//!
//! Every subcommand is pure input → output: a human-readable summary goes
//! to standard output and, when `--out` is given, a machine-readable JSON
//! document is written there. Campaign reports stream to `--out` as JSON
//! lines and can be resumed. Exit status: 0 success, 1 input does not
//! parse, 2 domain error or campaign violation, 3 bounds exceeded.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_traits::ToPrimitive;
use serde::Serialize;

use gammaseq::abgroup::{FgAbGroup, Int};
use gammaseq::analysis::{
    even_order_witness, infinite_witness, involution_from_normal_form, order_four_normal_form,
    EvenOrderOutcome,
};
use gammaseq::doc::{matrix_to_rows, SequenceDoc};
use gammaseq::gamma::{gamma_n1, gamma_object, GammaKind};
use gammaseq::gseq::{compute_b_group, moore_sequence, BGroupResult, GammaMorphism};
use gammaseq::search::{run_even_order_sweep, run_odd_order_campaign, CampaignSpec};
use gammaseq::{Error, Result};

#[derive(Parser)]
#[command(
    name = "gammaseq",
    version,
    about = "Exact computation with Whitehead Γ-sequences of finite-type complexes"
)]
struct Cli {
    /// Cap the worker thread pool at N threads.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Write the machine-readable result document to this path.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the Γ-group of a group literal with its tag table.
    Gamma {
        /// Group literal, e.g. "0", "2 x 4", "free^2 x 3" (spaces optional).
        #[arg(long)]
        group: String,
        /// Sequence degree: 2 uses the quadratic functor, >= 3 the mod-2
        /// reduction.
        #[arg(long, default_value_t = 2)]
        n: u32,
    },
    /// Check a sequence document and echo its normalized form.
    Validate {
        /// Path to the sequence document (JSON).
        doc: PathBuf,
    },
    /// Compute the morphism group of a sequence document.
    Bgroup {
        doc: PathBuf,
    },
    /// Build the Moore sequence of a group and compute its morphism group.
    Moore {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 2)]
        n: u32,
    },
    /// Produce an infinite or order-2 witness, or a triviality certificate,
    /// for a sequence document.
    Witness {
        doc: PathBuf,
    },
    /// Normal form and involution for an order-4 element of Γ((Z_2)^r).
    Normalform {
        /// Elementary 2-group literal, e.g. "2 x 2 x 2".
        #[arg(long)]
        group: String,
        /// Comma-separated tag coefficients of the element.
        #[arg(long)]
        element: String,
    },
    /// Run a bounded campaign from a spec document; the report streams to
    /// --out as JSON lines.
    Search {
        /// Path to the campaign spec (JSON).
        spec: PathBuf,
        /// Continue an interrupted report at --out instead of overwriting.
        #[arg(long)]
        resume: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::BadLiteral(_) | Error::BadDocument(_) | Error::ShapeMismatch(_)
                | Error::Io(_) => 1,
                Error::TooLarge(_)
                | Error::BoundsTooLarge(_)
                | Error::NotEnumerable(_)
                | Error::InfiniteAutGroup
                | Error::InfiniteHomSet => 3,
                _ => 2,
            })
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Gamma { group, n } => cmd_gamma(cli, group, *n),
        Command::Validate { doc } => cmd_validate(cli, doc),
        Command::Bgroup { doc } => cmd_bgroup(cli, doc),
        Command::Moore { group, n } => cmd_moore(cli, group, *n),
        Command::Witness { doc } => cmd_witness(cli, doc),
        Command::Normalform { group, element } => cmd_normalform(cli, group, element),
        Command::Search { spec, resume } => cmd_search(cli, spec, *resume),
    }
}

fn write_out<T: Serialize>(cli: &Cli, doc: &T) -> Result<()> {
    if let Some(path) = &cli.out {
        let text = serde_json::to_string_pretty(doc).expect("output documents serialize");
        fs::write(path, text + "\n")?;
    }
    Ok(())
}

fn coeffs_to_i64(coeffs: &[Int]) -> Result<Vec<i64>> {
    coeffs
        .iter()
        .map(|c| {
            c.to_i64()
                .ok_or_else(|| Error::BadDocument("coefficient exceeds 64 bits".into()))
        })
        .collect()
}

fn order_label(o: &Int) -> String {
    use num_traits::Zero;
    if o.is_zero() { "inf".into() } else { o.to_string() }
}

#[derive(Serialize)]
struct TagOut {
    tag: String,
    order: String,
}

#[derive(Serialize)]
struct GammaOut {
    group: String,
    n: u32,
    kind: String,
    carrier: String,
    order: Option<String>,
    tags: Vec<TagOut>,
}

fn cmd_gamma(cli: &Cli, group: &str, n: u32) -> Result<u8> {
    let g = FgAbGroup::parse_literal(group)?;
    let gg = gamma_n1(n, &g)?;
    let kind = match gg.kind() {
        GammaKind::Quadratic => "quadratic",
        GammaKind::ModTwo => "mod-2",
    };
    let order = gg.carrier().order();
    println!("base:    {}", g.literal());
    println!("degree:  {n} ({kind})");
    match &order {
        Some(o) => println!("carrier: {}  (order {o})", gg.carrier().literal()),
        None => println!("carrier: {}  (infinite)", gg.carrier().literal()),
    }
    let mut tags = Vec::new();
    if gg.tag_count() > 0 {
        println!("tag      order");
        for (tag, ord) in gg.basis_tags().iter().zip(gg.tag_orders()) {
            println!("{:<8} {}", tag.to_string(), order_label(ord));
            tags.push(TagOut { tag: tag.to_string(), order: order_label(ord) });
        }
    }
    write_out(
        cli,
        &GammaOut {
            group: g.literal(),
            n,
            kind: kind.into(),
            carrier: gg.carrier().literal(),
            order: order.map(|o| o.to_string()),
            tags,
        },
    )?;
    Ok(0)
}

fn read_sequence(path: &PathBuf) -> Result<(SequenceDoc, std::sync::Arc<gammaseq::gseq::GammaSequence>)> {
    let text = fs::read_to_string(path)?;
    let doc = SequenceDoc::parse(&text)?;
    let seq = doc.to_sequence()?;
    Ok((doc, seq))
}

fn summarize(doc: &SequenceDoc) -> String {
    format!(
        "n={}, H_top={}, H_mid={}, H_bot={}, pi={}",
        doc.n, doc.h_top, doc.h_mid, doc.h_bot, doc.pi
    )
}

fn cmd_validate(cli: &Cli, path: &PathBuf) -> Result<u8> {
    let (_, seq) = read_sequence(path)?;
    let normalized = SequenceDoc::from_sequence(&seq)?;
    println!("valid Γ-sequence: {}", summarize(&normalized));
    write_out(cli, &normalized)?;
    Ok(0)
}

#[derive(Serialize)]
struct BGroupOut {
    doc: SequenceDoc,
    order: Option<u64>,
    element_orders: Vec<u64>,
    infinite_kind: Option<String>,
}

fn cmd_bgroup(cli: &Cli, path: &PathBuf) -> Result<u8> {
    let (_, seq) = read_sequence(path)?;
    let normalized = SequenceDoc::from_sequence(&seq)?;
    println!("sequence: {}", summarize(&normalized));
    let out = match compute_b_group(&seq)? {
        BGroupResult::Finite { order, element_orders, .. } => {
            println!("morphism group order {order}; element orders {element_orders:?}");
            BGroupOut { doc: normalized, order: Some(order), element_orders, infinite_kind: None }
        }
        BGroupResult::Infinite { kind, .. } => {
            println!("morphism group is infinite ({kind} witness)");
            BGroupOut {
                doc: normalized,
                order: None,
                element_orders: vec![],
                infinite_kind: Some(kind),
            }
        }
    };
    write_out(cli, &out)?;
    Ok(0)
}

fn cmd_moore(cli: &Cli, group: &str, n: u32) -> Result<u8> {
    let h = FgAbGroup::parse_literal(group)?;
    let seq = moore_sequence(&h, n)?;
    let doc = SequenceDoc::from_sequence(&seq)?;
    println!("Moore sequence: {}", summarize(&doc));
    match compute_b_group(&seq)? {
        BGroupResult::Finite { order, .. } => println!("morphism group order {order}"),
        BGroupResult::Infinite { kind, .. } => {
            println!("morphism group is infinite ({kind} witness)")
        }
    }
    write_out(cli, &doc)?;
    Ok(0)
}

#[derive(Serialize)]
struct WitnessOut {
    outcome: String,
    label: String,
    detail: Option<String>,
    f_top: Option<Vec<Vec<i64>>>,
    f_mid: Option<Vec<Vec<i64>>>,
    f_bot: Option<Vec<Vec<i64>>>,
    omega: Option<Vec<Vec<i64>>>,
}

fn morphism_rows(
    m: &GammaMorphism,
) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>, Vec<Vec<i64>>, Option<Vec<Vec<i64>>>)> {
    Ok((
        matrix_to_rows(m.f_top().matrix())?,
        matrix_to_rows(m.f_mid().matrix())?,
        matrix_to_rows(m.f_bot().matrix())?,
        m.omega().map(|w| matrix_to_rows(w.matrix())).transpose()?,
    ))
}

fn cmd_witness(cli: &Cli, path: &PathBuf) -> Result<u8> {
    let (_, seq) = read_sequence(path)?;
    let normalized = SequenceDoc::from_sequence(&seq)?;
    println!("sequence: {}", summarize(&normalized));
    let out = if let Some((m, kind)) = infinite_witness(&seq)? {
        println!("infinite-order witness found ({kind})");
        let (f_top, f_mid, f_bot, omega) = morphism_rows(&m)?;
        WitnessOut {
            outcome: "infinite".into(),
            label: kind,
            detail: None,
            f_top: Some(f_top),
            f_mid: Some(f_mid),
            f_bot: Some(f_bot),
            omega,
        }
    } else {
        match even_order_witness(&seq)? {
            EvenOrderOutcome::Witness { morphism, step } => {
                let ord = morphism.order(8);
                println!("order-2 witness found (step {step}, order {ord:?})");
                let (f_top, f_mid, f_bot, omega) = morphism_rows(&morphism)?;
                WitnessOut {
                    outcome: "even-order".into(),
                    label: step,
                    detail: None,
                    f_top: Some(f_top),
                    f_mid: Some(f_mid),
                    f_bot: Some(f_bot),
                    omega,
                }
            }
            EvenOrderOutcome::Trivial(cert) => {
                println!("trivial morphism group certified (step {})", cert.step);
                println!("  {}", cert.detail);
                WitnessOut {
                    outcome: "trivial".into(),
                    label: cert.step,
                    detail: Some(cert.detail),
                    f_top: None,
                    f_mid: None,
                    f_bot: None,
                    omega: None,
                }
            }
        }
    };
    write_out(cli, &out)?;
    Ok(0)
}

#[derive(Serialize)]
struct NormalFormOut {
    group: String,
    element: Vec<i64>,
    alphas: Vec<u8>,
    betas: Vec<u8>,
    /// Adapted basis, one row of base-group coordinates per element.
    basis: Vec<Vec<i64>>,
    involution: Option<Vec<Vec<i64>>>,
    involution_note: Option<String>,
}

fn cmd_normalform(cli: &Cli, group: &str, element: &str) -> Result<u8> {
    let g = FgAbGroup::parse_literal(group)?;
    let gg = gamma_object(&g);
    let coeffs: Vec<i64> = element
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::BadLiteral(format!("bad tag coefficient {:?}", t.trim())))
        })
        .collect::<Result<_>>()?;
    if coeffs.len() != gg.tag_count() {
        return Err(Error::BadLiteral(format!(
            "expected {} tag coefficients for Γ({}), got {}",
            gg.tag_count(),
            g.literal(),
            coeffs.len()
        )));
    }
    let chi = gg.element_i64(coeffs);
    let nf = order_four_normal_form(&chi)?;
    assert_eq!(nf.expand().coeffs(), chi.coeffs(), "normal form must re-expand to the input");
    println!("order-4 normal form over {}", g.literal());
    println!("alphas: {:?}", nf.alphas);
    println!("betas:  {:?}", nf.betas);
    let basis: Vec<Vec<i64>> =
        nf.basis.iter().map(|e| coeffs_to_i64(e.coeffs())).collect::<Result<_>>()?;
    for (k, row) in basis.iter().enumerate() {
        println!("b_{} = {row:?}", k + 1);
    }
    let (involution, note) = match involution_from_normal_form(&nf) {
        Ok(h) => {
            let rows = matrix_to_rows(h.matrix())?;
            println!("involution rows: {rows:?}");
            (Some(rows), None)
        }
        Err(Error::NoInvolution(msg)) => {
            println!("no table involution: {msg}");
            (None, Some(msg))
        }
        Err(e) => return Err(e),
    };
    write_out(
        cli,
        &NormalFormOut {
            group: g.literal(),
            element: coeffs_to_i64(chi.coeffs())?,
            alphas: nf.alphas.clone(),
            betas: nf.betas.clone(),
            basis,
            involution,
            involution_note: note,
        },
    )?;
    Ok(0)
}

fn cmd_search(cli: &Cli, spec_path: &PathBuf, resume: bool) -> Result<u8> {
    let text = fs::read_to_string(spec_path)?;
    let spec = CampaignSpec::parse(&text)?;
    let out = cli.out.clone().ok_or_else(|| {
        Error::BadDocument("search needs --out to receive the report".into())
    })?;
    let summary = if spec.n == 2 {
        run_odd_order_campaign(&spec, &out, resume)?
    } else {
        run_even_order_sweep(&spec, &out, resume)?
    };
    println!(
        "campaign complete: {} rows ({} sequences, {} skips)",
        summary.rows, summary.sequences, summary.skips
    );
    println!(
        "infinite {}, trivial {}, even {}, odd hits {}, violations {}",
        summary.infinite, summary.trivial, summary.even, summary.odd_hits, summary.violations
    );
    println!("estimated raw candidates: {}", summary.candidates_estimated);
    println!("report: {}", out.display());
    Ok(if summary.violations > 0 { 2 } else { 0 })
}
