//! The `coalg` command line. [`run`] is the whole program with its streams
//! passed in, so tests can drive it without spawning processes.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use coalg::coalgebra::{reachable_part, simple_quotient, wp, PointedCoalgebra};
use coalg::dot::{coalgebra_to_dot, tree_to_dot};
use coalg::instances::{
    canonical_picture, minimize_moore, moore_to_coalgebra, mostowski_collapse, parse_moore, stream_normalize,
    tree_expansion, HfSet, MooreMachine, StreamSpec,
};
use coalg::rational::{a_plus, canonical_form, enumerate_wp, isomorphism, render_rho_term, rho_structure, RhoElement};
use coalg::wellfounded::{
    fold, well_founded_part, Algebra, DepthAlgebra, DetectorAlgebra, ExpansionAlgebra, SizeAlgebra,
};
use coalg::{parse_functor, CoalgebraFile, FunctorExpr};

#[derive(Parser, Debug)]
#[command(name = "coalg", version, about = "Finite coalgebras: well-pointed forms, folds, canonical forms")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Write the result to this file instead of standard output.
    #[arg(short = 'o', long, global = true)]
    output: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgebraKind {
    Expansion,
    Size,
    Depth,
    Detector,
}

/// Input files are coalgebra files in text or JSON form; `-` reads standard input.
#[derive(Subcommand, Debug)]
enum Command {
    /// Well-pointed modification of the pointed coalgebra.
    Wp { file: String },
    /// Simple quotient: merge behaviorally equivalent states.
    Minimize { file: String },
    /// Part reachable from the point.
    Reach { file: String },
    /// Well-founded part and ranks.
    Wf { file: String },
    /// Fold a well-founded coalgebra into a built-in algebra.
    Fold {
        file: String,
        #[arg(long, value_enum)]
        algebra: AlgebraKind,
    },
    /// Canonical form and digest of a well-pointed coalgebra.
    Canon { file: String },
    /// Decide isomorphism of two well-pointed coalgebras.
    Iso {
        first: String,
        second: String,
        /// Compare the well-pointed modifications, i.e. behavior of the points.
        #[arg(long)]
        behavioral: bool,
    },
    /// Well-pointed modification of every state, as digests.
    Aplus { file: String },
    /// One step of the rational fixed point structure at the point.
    RhoStep { file: String },
    /// All well-pointed coalgebras up to a size, up to isomorphism.
    Enum {
        #[arg(long)]
        functor: String,
        #[arg(long)]
        max_states: usize,
        /// Only the well-founded ones.
        #[arg(long)]
        mu: bool,
    },
    /// Minimize a Moore machine given as a transition table.
    MooreMin { file: String },
    /// Shortest representation of a stream such as `ab(ab)^w`.
    StreamNorm { spec: String },
    /// Tree expansion from the point.
    Expand {
        file: String,
        /// Depth bound; omit or give a negative number for the full expansion.
        #[arg(long, allow_negative_numbers = true)]
        depth: Option<i64>,
    },
    /// Canonical picture of a hereditarily finite set, or of a numeral.
    HfPicture { set: String },
    /// Mostowski collapse of a well-founded graph.
    HfCollapse {
        #[arg(default_value = "-")]
        file: String,
    },
    /// Canonical graph in Graphviz form.
    ExportDot { file: String },
}

enum Failure {
    Usage(String),
    Lib(coalg::Error),
}

impl From<coalg::Error> for Failure {
    fn from(e: coalg::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Lib(e) if e.is_domain() => 1,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

/// A result in every format it supports.
struct Rendered {
    text: String,
    json: Value,
    dot: Option<String>,
}

impl Rendered {
    fn coalgebra(file: &CoalgebraFile, comment: Option<String>) -> Self {
        let mut text = comment.map(|c| format!("# {c}\n")).unwrap_or_default();
        text.push_str(&file.to_text());
        Rendered { text, json: file.to_json(), dot: Some(coalgebra_to_dot(&file.coalgebra, file.point)) }
    }

    fn plain(text: String, json: Value) -> Self {
        Rendered { text, json, dot: None }
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
}

impl Io<'_> {
    fn read(&mut self, path: &str) -> Result<String, Failure> {
        if path == "-" {
            let mut s = String::new();
            self.stdin.read_to_string(&mut s).map_err(|e| Failure::Usage(format!("reading standard input: {e}")))?;
            Ok(s)
        } else {
            fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))
        }
    }

    fn coalgebra(&mut self, path: &str) -> Result<CoalgebraFile, Failure> {
        Ok(CoalgebraFile::parse(&self.read(path)?)?)
    }

    fn pointed(&mut self, path: &str) -> Result<PointedCoalgebra, Failure> {
        Ok(self.coalgebra(path)?.pointed()?)
    }
}

/// Runs the program on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return if code == 0 { 0 } else { 2 };
        }
    };
    let mut io = Io { stdin };
    let result = execute(&cli.command, &mut io).and_then(|r| {
        let mut body = match cli.format {
            Format::Text => r.text,
            Format::Json => serde_json::to_string_pretty(&r.json).expect("values serialize"),
            Format::Dot => r.dot.ok_or_else(|| Failure::Usage("this command has no dot output".into()))?,
        };
        if !body.ends_with('\n') {
            body.push('\n');
        }
        Ok(body)
    });
    match result {
        Ok(body) => {
            let written = match &cli.output {
                Some(path) => fs::write(path, &body).map_err(|e| format!("{path}: {e}")),
                None => stdout.write_all(body.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => 0,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    2
                }
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {f}");
            f.exit_code()
        }
    }
}

fn execute(command: &Command, io: &mut Io) -> Result<Rendered, Failure> {
    Ok(match command {
        Command::Wp { file } => {
            let w = wp(&io.pointed(file)?);
            Rendered::coalgebra(&CoalgebraFile::from(w), None)
        }
        Command::Minimize { file } => {
            let f = io.coalgebra(file)?;
            let q = simple_quotient(&f.coalgebra);
            let blocks = q.partition.as_map().to_vec();
            let point = f.point.map(|p| blocks[p]);
            let out = CoalgebraFile::new(q.coalgebra, point)?;
            let mut r = Rendered::coalgebra(&out, Some(format!("blocks: {}", join(&blocks))));
            r.json["blocks"] = json!(blocks);
            r
        }
        Command::Reach { file } => {
            let r = reachable_part(&io.pointed(file)?);
            let mut out = Rendered::coalgebra(
                &CoalgebraFile::from(r.coalgebra),
                Some(format!("original states: {}", join(&r.embedding))),
            );
            out.json["embedding"] = json!(r.embedding);
            out
        }
        Command::Wf { file } => {
            let c = io.coalgebra(file)?.coalgebra;
            let report = well_founded_part(&c);
            let part: Vec<usize> = report.part.iter().copied().collect();
            let ranks: Vec<String> =
                report.rank.iter().map(|r| r.map_or_else(|| "-".to_string(), |k| k.to_string())).collect();
            Rendered::plain(
                format!(
                    "well-founded: {}\nrounds: {}\npart: {}\nranks: {}\n",
                    report.is_well_founded,
                    report.rounds,
                    join(&part),
                    ranks.join(" ")
                ),
                json!({
                    "well_founded": report.is_well_founded,
                    "rounds": report.rounds,
                    "part": part,
                    "rank": report.rank,
                }),
            )
        }
        Command::Fold { file, algebra } => {
            let c = io.coalgebra(file)?.coalgebra;
            match algebra {
                AlgebraKind::Expansion => folded(&c, &ExpansionAlgebra { functor: c.functor().clone() })?,
                AlgebraKind::Size => folded(&c, &SizeAlgebra)?,
                AlgebraKind::Depth => folded(&c, &DepthAlgebra)?,
                AlgebraKind::Detector => {
                    let graph = FunctorExpr::pow(FunctorExpr::Id);
                    if *c.functor() != graph {
                        return Err(coalg::Error::FunctorMismatch {
                            expected: graph.to_string(),
                            found: c.functor().to_string(),
                        }
                        .into());
                    }
                    let report = well_founded_part(&c);
                    if report.is_well_founded {
                        folded(&c, &DetectorAlgebra)?
                    } else {
                        let h1 = DetectorAlgebra::homomorphism(&report, c.len(), 1);
                        let h2 = DetectorAlgebra::homomorphism(&report, c.len(), 2);
                        Rendered::plain(
                            format!(
                                "# not well-founded: two distinct homomorphisms\nh1: {}\nh2: {}\n",
                                join(&h1),
                                join(&h2)
                            ),
                            json!({ "well_founded": false, "homomorphisms": [h1, h2] }),
                        )
                    }
                }
            }
        }
        Command::Canon { file } => {
            let form = canonical_form(&io.pointed(file)?)?;
            let mut r = Rendered::coalgebra(
                &CoalgebraFile::from(form.coalgebra.clone()),
                Some(format!("digest: {}", form.digest())),
            );
            r.json["digest"] = json!(form.digest());
            r
        }
        Command::Iso { first, second, behavioral } => {
            let (mut a, mut b) = (io.pointed(first)?, io.pointed(second)?);
            if *behavioral {
                a = wp(&a);
                b = wp(&b);
            }
            match isomorphism(&a, &b)? {
                Some(map) => {
                    let pairs: Vec<String> = map.iter().enumerate().map(|(x, y)| format!("{x}->{y}")).collect();
                    Rendered::plain(
                        format!("isomorphic: {}\n", pairs.join(" ")),
                        json!({ "isomorphic": true, "map": map }),
                    )
                }
                None => Rendered::plain("not isomorphic\n".into(), json!({ "isomorphic": false })),
            }
        }
        Command::Aplus { file } => {
            let c = io.coalgebra(file)?.coalgebra;
            let plus = a_plus(&c);
            let text = plus.iter().enumerate().map(|(x, r)| format!("{x}: {r}\n")).collect();
            let digests: Vec<&str> = plus.iter().map(RhoElement::digest).collect();
            Rendered::plain(text, json!(digests))
        }
        Command::RhoStep { file } => {
            let r = RhoElement::new(&wp(&io.pointed(file)?))?;
            let step = render_rho_term(r.functor(), &rho_structure(&r));
            Rendered::plain(
                format!("{step}\n"),
                json!({ "digest": r.digest(), "step": step, "well_founded": r.well_founded }),
            )
        }
        Command::Enum { functor, max_states, mu } => {
            let f = parse_functor(functor)?;
            f.validate()?;
            let elems = enumerate_wp(&f, *max_states, *mu)?;
            let digests: Vec<&str> = elems.iter().map(RhoElement::digest).collect();
            let mut text = format!("# {} elements\n", elems.len());
            for d in &digests {
                text.push_str(d);
                text.push('\n');
            }
            Rendered::plain(text, json!({ "count": elems.len(), "elements": digests }))
        }
        Command::MooreMin { file } => {
            let m = minimize_moore(&parse_moore(&io.read(file)?)?);
            let pc = moore_to_coalgebra(&m);
            Rendered { text: m.to_string(), json: moore_json(&m), dot: Some(coalgebra_to_dot(&pc.base, Some(pc.point))) }
        }
        Command::StreamNorm { spec } => {
            let s: StreamSpec = spec.parse()?;
            let norm = stream_normalize(&s);
            let json = match &norm {
                StreamSpec::Finite(w) => json!({ "word": w }),
                StreamSpec::Lasso { prefix, period } => json!({ "prefix": prefix, "period": period }),
            };
            Rendered::plain(format!("{norm}\n"), json)
        }
        Command::Expand { file, depth } => {
            let bound = depth.and_then(|d| usize::try_from(d).ok());
            let tree = tree_expansion(&io.pointed(file)?, bound)?;
            Rendered { text: tree.to_string(), json: tree.to_json(), dot: Some(tree_to_dot(&tree)) }
        }
        Command::HfPicture { set } => {
            let s = match set.trim().parse::<usize>() {
                Ok(n) => HfSet::von_neumann(n),
                Err(_) => set.parse()?,
            };
            Rendered::coalgebra(&CoalgebraFile::from(canonical_picture(&s)), Some(format!("picture of {s}")))
        }
        Command::HfCollapse { file } => {
            let s = mostowski_collapse(&io.pointed(file)?)?;
            Rendered::plain(format!("{s}\n"), json!(s.to_string()))
        }
        Command::ExportDot { file } => {
            let f = io.coalgebra(file)?;
            let dot = coalgebra_to_dot(&f.coalgebra, f.point);
            Rendered { text: dot.clone(), json: json!(dot), dot: Some(dot) }
        }
    })
}

fn folded<A: Algebra>(c: &coalg::Coalgebra, alg: &A) -> Result<Rendered, Failure>
where
    A::Value: std::fmt::Display,
{
    let values = fold(c, alg)?;
    let strings: Vec<String> = values.iter().map(ToString::to_string).collect();
    let text = strings.iter().enumerate().map(|(x, v)| format!("{x}: {v}\n")).collect();
    Ok(Rendered::plain(text, json!(strings)))
}

fn moore_json(m: &MooreMachine) -> Value {
    json!({
        "inputs": m.inputs,
        "outputs": m.outputs,
        "initial": m.initial,
        "next": m.next,
        "out": m.out.iter().map(|&o| &m.outputs[o]).collect::<Vec<_>>(),
    })
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}
