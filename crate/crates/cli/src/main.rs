//! `nsbox`: command-line front end for nsbox-core.
//!
//! Exit codes: 0 on success or an affirmative verdict, 1 on a negative
//! verdict, 2 on usage, format or resource errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nsbox_core::bell;
use nsbox_core::classify::{classify_boxes, classify_vertices, OrbitClass};
use nsbox_core::comm;
use nsbox_core::dd::{DdConfig, InsertionOrder};
use nsbox_core::extension;
use nsbox_core::families::Family;
use nsbox_core::io::{self, CertificateDoc, ModelDoc, WiringDoc};
use nsbox_core::locality::{self, Membership};
use nsbox_core::polytope;
use nsbox_core::presets::{self, Preset};
use nsbox_core::rational::format as fmt_q;
use nsbox_core::vertices;
use nsbox_core::wiring::{self, evaluate_comm_protocol};
use nsbox_core::{BoxShape, CorrBox, Error};

#[derive(Parser)]
#[command(name = "nsbox", version, about = "Exact analysis of no-signalling correlation boxes")]
struct Cli {
    /// Worker threads for per-class locality checks.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check positivity, normalization and no-signalling of a box file.
    Validate { file: PathBuf },
    /// Build a named box: local a b c d | pr a b c | dbox k | pr-third | xy+z | svetlichny | xyz [n].
    Make {
        family: String,
        params: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Dimension of the no-signalling polytope of a shape such as 2,2/2,2 or 2:3,3/2:3,3.
    Dim { shape: String },
    /// Enumerate and classify the vertices of the no-signalling polytope.
    Vertices {
        shape: String,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        dd: DdArgs,
    },
    /// Classify the boxes of a vertex directory up to relabelling.
    Classify {
        dir: PathBuf,
        /// Also label each class local / two-way local / non-local.
        #[arg(long)]
        locality: bool,
    },
    /// Evaluate a Bell functional.
    Bell {
        file: PathBuf,
        #[command(flatten)]
        which: BellChoice,
    },
    /// Membership in the local polytope.
    Local {
        file: PathBuf,
        #[command(flatten)]
        opts: LocalOpts,
    },
    /// Membership in the two-way local polytope of a tripartite box.
    Local2 {
        file: PathBuf,
        #[command(flatten)]
        opts: LocalOpts,
    },
    /// Evaluate a wiring file.
    Wire {
        file: PathBuf,
        /// Exit 1 unless the result equals this box entrywise.
        #[arg(long)]
        expect: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a built-in protocol as a wiring file: P1(d,d') P2(d,d') P3(d,d',n) P4(d) P5 P6 P7.
    Preset {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the box the protocol targets.
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Total variation error of the d'-box built from n d-boxes.
    #[command(name = "protocol3-error")]
    Protocol3Error { d: usize, d2: usize, n: usize },
    /// Fewest one-way bits simulating a bipartite box with shared randomness.
    Mincomm {
        file: PathBuf,
        #[arg(long)]
        max_bits: u32,
    },
    /// Check whether every no-signalling extension to an environment factorizes.
    Extend {
        file: PathBuf,
        #[arg(long)]
        env_inputs: usize,
        #[arg(long)]
        env_outputs: usize,
        /// Where to write a non-factorizing witness.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DdArgs {
    #[arg(long, value_enum, default_value_t = Order::MaxBalance)]
    order: Order,
    #[arg(long)]
    max_rays: Option<usize>,
    /// Give up after this many seconds.
    #[arg(long)]
    time_budget: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    MaxBalance,
    MinPairs,
    Index,
}

impl DdArgs {
    fn config(&self) -> DdConfig {
        let mut cfg = DdConfig::default();
        cfg.order = match self.order {
            Order::MaxBalance => InsertionOrder::MaxBalance,
            Order::MinPairs => InsertionOrder::MinPairs,
            Order::Index => InsertionOrder::Given(Vec::new()),
        };
        if let Some(m) = self.max_rays {
            cfg.max_rays = m;
        }
        cfg.time_budget = self.time_budget.map(Duration::from_secs);
        cfg
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct BellChoice {
    /// CHSH functional B_{αβγ}.
    #[arg(long, num_args = 3, value_names = ["ALPHA", "BETA", "GAMMA"])]
    chsh: Option<Vec<u8>>,
    /// Svetlichny value, maximized over local relabellings.
    #[arg(long)]
    svetlichny: bool,
    /// A functional document.
    #[arg(long)]
    functional: Option<PathBuf>,
}

#[derive(Args)]
struct LocalOpts {
    /// Exit 1 when the box is not in the polytope.
    #[arg(long)]
    assert_local: bool,
    /// Write the model or certificate document here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// A finished command: text for stdout and whether the verdict was affirmative.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

type Res<T> = Result<T, Error>;

fn load_box(path: &Path) -> Res<CorrBox> {
    let b = io::read_box(path)?;
    b.ensure_valid()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(b)
}

fn emit(output: Option<&Path>, doc: String, text: &mut String) -> Res<()> {
    match output {
        Some(p) => {
            std::fs::write(p, doc).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            writeln!(text, "wrote {}", p.display()).unwrap();
        }
        None => text.push_str(&doc),
    }
    Ok(())
}

fn run(cli: Cli) -> Res<Outcome> {
    match cli.cmd {
        Cmd::Validate { file } => {
            let b = io::read_box(&file)?;
            let report = b.validate();
            if report.is_ok() {
                return Ok(Outcome::ok("VALID\n".into()));
            }
            let mut text = format!("INVALID: {} violation(s)\n", report.violations.len());
            for v in &report.violations {
                writeln!(text, "  {v}").unwrap();
            }
            Ok(Outcome { text, ok: false })
        }
        Cmd::Make { family, params, output } => {
            let b = Family::parse(&family, &params)?.build()?;
            let mut text = String::new();
            emit(output.as_deref(), io::to_json(&io::BoxDoc::from(&b)), &mut text)?;
            Ok(Outcome::ok(text))
        }
        Cmd::Dim { shape } => {
            let shape: BoxShape = shape.parse()?;
            Ok(Outcome::ok(format!("{}\n", polytope::dimension(&shape))))
        }
        Cmd::Vertices { shape, output, dd } => {
            let shape: BoxShape = shape.parse()?;
            let vrep = vertices::ns_vertices(&shape, &dd.config())?;
            let classes = classify_vertices(&vrep)?;
            let summary = io::write_vertex_dir(&output, &vrep, &classes)?;
            let mut text = format!("{} vertices in {} classes\n", summary.vertices, summary.classes.len());
            text.push_str(&class_table(&summary.classes, &classes, None));
            Ok(Outcome::ok(text))
        }
        Cmd::Classify { dir, locality } => {
            let vrep = io::read_vertex_dir(&dir)?;
            let classes = if vrep.complete {
                classify_vertices(&vrep)?
            } else {
                classify_boxes(&vrep.vertices, true)?
            };
            let summary = io::summarize(&vrep, &classes);
            let labels = if locality {
                Some(locality_labels(&classes, cli.threads)?)
            } else {
                None
            };
            let mut text = format!(
                "{} {} in {} classes\n",
                vrep.len(),
                if vrep.complete { "vertices" } else { "boxes" },
                classes.len()
            );
            text.push_str(&class_table(&summary.classes, &classes, labels.as_deref()));
            Ok(Outcome::ok(text))
        }
        Cmd::Bell { file, which } => {
            let b = load_box(&file)?;
            let value = if let Some(v) = which.chsh {
                bell::chsh(&b, v[0], v[1], v[2])?
            } else if which.svetlichny {
                bell::svetlichny(&b)?
            } else {
                let path = which.functional.expect("clap enforces one choice");
                bell::evaluate_functional(&b, &io::read_functional(&path)?)?
            };
            Ok(Outcome::ok(format!("{}\n", fmt_q(&value))))
        }
        Cmd::Local { file, opts } => {
            let b = load_box(&file)?;
            let m = locality::is_local(&b)?;
            membership_outcome(&b, &m, &opts, "LOCAL", "NONLOCAL")
        }
        Cmd::Local2 { file, opts } => {
            let b = load_box(&file)?;
            let m = locality::is_two_way_local(&b)?;
            membership_outcome(&b, &m, &opts, "TWO-WAY LOCAL", "THREE-WAY NONLOCAL")
        }
        Cmd::Wire { file, expect, output } => {
            let (w, boxes) = io::read_wiring(&file)?;
            for (i, b) in boxes.iter().enumerate() {
                b.ensure_valid()
                    .map_err(|e| Error::Parse(format!("components[{i}].box: {e}")))?;
            }
            let (result, bits) = evaluate_comm_protocol(&w, &boxes)?;
            let mut text = String::new();
            if bits > 0 {
                writeln!(text, "bits: {bits}").unwrap();
            }
            emit(output.as_deref(), io::to_json(&io::BoxDoc::from(&result)), &mut text)?;
            let mut ok = true;
            if let Some(p) = expect {
                let want = load_box(&p)?;
                if want == result {
                    text.push_str("MATCH\n");
                } else {
                    ok = false;
                    match wiring::max_tv_distance(&result, &want) {
                        Ok(d) => writeln!(text, "MISMATCH: max total variation {}", fmt_q(&d)).unwrap(),
                        Err(e) => writeln!(text, "MISMATCH: {e}").unwrap(),
                    }
                }
            }
            Ok(Outcome { text, ok })
        }
        Cmd::Preset { name, output, target } => {
            let p: Preset = name.parse()?;
            let doc = WiringDoc::new(&p.wiring()?, &p.resources()?);
            let mut text = String::new();
            emit(output.as_deref(), io::to_json(&doc), &mut text)?;
            if let Some(t) = target {
                io::write_box(&t, &p.target()?)?;
                writeln!(text, "wrote {}", t.display()).unwrap();
            }
            Ok(Outcome::ok(text))
        }
        Cmd::Protocol3Error { d, d2, n } => {
            let e = presets::protocol3_error(d, d2, n)?;
            Ok(Outcome::ok(format!("{}\n", fmt_q(&e))))
        }
        Cmd::Mincomm { file, max_bits } => {
            let b = load_box(&file)?;
            match comm::min_oneway_comm_with_sr(&b, max_bits)? {
                Some((c, _)) => Ok(Outcome::ok(format!("{c}\n"))),
                None => Ok(Outcome {
                    text: format!("NONE up to {max_bits} bits\n"),
                    ok: false,
                }),
            }
        }
        Cmd::Extend { file, env_inputs, env_outputs, output } => {
            let b = load_box(&file)?;
            let env = vec![env_outputs; env_inputs];
            let rep = extension::all_extensions_factorize(&b, &env, &DdConfig::default())?;
            match rep.witness {
                None => Ok(Outcome::ok(format!("FACTORIZES ({} extension vertices)\n", rep.vertices))),
                Some(w) => {
                    let path = output.unwrap_or_else(|| file.with_extension("witness.box"));
                    io::write_box(&path, &w)?;
                    Ok(Outcome {
                        text: format!("NOT FACTORIZING: witness {}\n", path.display()),
                        ok: false,
                    })
                }
            }
        }
    }
}

fn membership_outcome(
    b: &CorrBox,
    m: &Membership,
    opts: &LocalOpts,
    inside: &str,
    outside: &str,
) -> Res<Outcome> {
    let mut text = String::new();
    match m {
        Membership::Inside(model) => {
            writeln!(text, "{inside} ({} strategies)", model.weights.len()).unwrap();
            emit(opts.output.as_deref(), io::to_json(&ModelDoc::new(b.shape(), model)), &mut text)?;
        }
        Membership::Outside(cert) => {
            writeln!(
                text,
                "{outside}: value {} > threshold {}",
                fmt_q(&cert.value),
                fmt_q(&cert.threshold)
            )
            .unwrap();
            emit(opts.output.as_deref(), io::to_json(&CertificateDoc::from(cert)), &mut text)?;
        }
    }
    Ok(Outcome {
        text,
        ok: m.is_inside() || !opts.assert_local,
    })
}

fn class_table(entries: &[io::ClassEntry], classes: &[OrbitClass], labels: Option<&[&str]>) -> String {
    let mut text = String::from("id  orbit  listed  representative");
    if labels.is_some() {
        text.push_str("  locality");
    }
    text.push('\n');
    for (i, (e, c)) in entries.iter().zip(classes).enumerate() {
        write!(text, "{:<3} {:<6} {:<7} {}", e.id, c.orbit_size, c.size, e.representative).unwrap();
        if let Some(l) = labels {
            write!(text, "  {}", l[i]).unwrap();
        }
        text.push('\n');
    }
    text
}

/// Labels each class representative, spreading the LPs over `threads`.
fn locality_labels(classes: &[OrbitClass], threads: usize) -> Res<Vec<&'static str>> {
    let label = |b: &CorrBox| -> Res<&'static str> {
        if b.is_deterministic() {
            return Ok("deterministic");
        }
        if locality::is_local(b)?.is_inside() {
            return Ok("local");
        }
        if b.shape().parties() == 3 && locality::is_two_way_local(b)?.is_inside() {
            return Ok("two-way local");
        }
        Ok("nonlocal")
    };
    let threads = threads.max(1).min(classes.len().max(1));
    let chunk = classes.len().div_ceil(threads).max(1);
    let results: Vec<Res<Vec<&'static str>>> = std::thread::scope(|s| {
        let handles: Vec<_> = classes
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|c| label(&c.representative)).collect()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(classes.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
