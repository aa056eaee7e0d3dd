//! The `gbs` command-line tool.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::factors::{self, Outcome};
use crate::graph::{parse_graph, serialize_graph, AllowedFamily, MarkedGraph};
use crate::moves;
use crate::whitehead::{self, CutKind};
use crate::words::{self, BassWord};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum AllowedMode {
    /// `I_v = {1}` at every vertex.
    #[default]
    Default,
    /// The minimal family of the reduced input graph.
    Amin,
    /// The `allowed` lines of the graph file.
    File,
}

#[derive(Debug, Parser)]
#[command(name = "gbs", version, about = "Whitehead algorithm for GBS groups")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Allowed edge groups.
    #[arg(long, value_enum, default_value_t = AllowedMode::Default, global = true)]
    pub allowed: AllowedMode,
    /// Write the main output here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Print progress to stderr; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a graph file and check its invariants.
    Validate { graph: PathBuf },
    /// Collapse collapsible edges until the graph is reduced.
    Reduce { graph: PathBuf },
    /// Replace every loop by two edges.
    Subdivide { graph: PathBuf },
    /// Translation length of every word.
    Tl { graph: PathBuf, words: PathBuf },
    /// Whitehead graph of the words at one vertex.
    Whitehead {
        graph: PathBuf,
        words: PathBuf,
        #[arg(long)]
        vertex: String,
        /// Also write the graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Decide whether the words form a simple collection.
    CheckSimple {
        graph: PathBuf,
        words: PathBuf,
        /// Write the move log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Smallest system of special factors carrying the words.
    MinimalFactors { graph: PathBuf, words: PathBuf },
    /// Complexity triple of the group.
    Complexity { graph: PathBuf },
}

/// Failure classes, mapped to exit codes 2 and 1.
enum Failure {
    Input(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Failure::Input(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path, mode: AllowedMode) -> Result<(MarkedGraph, AllowedFamily), Failure> {
    let (g, a) = parse_graph(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(match mode {
        AllowedMode::File => (g, a),
        _ => {
            let n = g.vertex_count();
            (g, AllowedFamily::all_cyclic(n))
        }
    })
}

fn load_words(g: &MarkedGraph, path: &Path) -> Result<Vec<BassWord>, Failure> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let here = |m: String| Failure::Input(format!("{}: line {}: {m}", path.display(), i + 1));
        let w = words::parse_word_from(g, Some(g.basepoint()), line).map_err(|e| here(e.to_string()))?;
        if !w.is_loop_at(g, g.basepoint()) {
            return Err(here("not a loop at the basepoint".into()));
        }
        out.push(w);
    }
    Ok(out)
}

/// Graph, family and words, reduced first under `--allowed amin`.
fn load_space(
    graph: &Path,
    word_file: Option<&Path>,
    mode: AllowedMode,
) -> Result<(MarkedGraph, AllowedFamily, Vec<BassWord>), Failure> {
    let (mut g, a) = load_graph(graph, mode)?;
    let ws = match word_file {
        Some(p) => load_words(&g, p)?,
        None => Vec::new(),
    };
    if mode != AllowedMode::Amin {
        return Ok((g, a, ws));
    }
    g.set_marking(ws.iter().enumerate().map(|(i, w)| (format!("w{i}"), w.clone())).collect())?;
    let (r, _, _) = moves::reduce_graph(&g, &a)?;
    let amin = r.amin_sets()?;
    let ws = r.marking().iter().map(|(_, w)| w.clone()).collect();
    Ok((r, amin, ws))
}

fn execute(cfg: &CliConfig, diag: &mut dyn Write) -> Result<String, Failure> {
    let mode = cfg.allowed;
    let mut out = String::new();
    match &cfg.command {
        Command::Validate { graph } => {
            let (g, _, _) = load_space(graph, None, mode)?;
            out.push_str(&format!(
                "ok: {} vertices, {} edges, betti number {}, {:?}\n",
                g.vertex_count(),
                g.edge_count(),
                g.betti_number(),
                g.classify_elementary()
            ));
        }
        Command::Reduce { graph } => {
            let (g, a, _) = load_space(graph, None, mode)?;
            let (r, b, _) = moves::reduce_graph(&g, &a)?;
            out.push_str(&serialize_graph(&r, &b));
        }
        Command::Subdivide { graph } => {
            let (g, a, _) = load_space(graph, None, mode)?;
            let (s, b, _) = moves::subdivide_loops(&g, &a)?;
            out.push_str(&serialize_graph(&s, &b));
        }
        Command::Tl { graph, words: wp } => {
            let (g, _, ws) = load_space(graph, Some(wp), mode)?;
            for w in &ws {
                out.push_str(&format!("{}\n", words::translation_length(&g, w)?));
            }
        }
        Command::Whitehead { graph, words: wp, vertex, dot } => {
            let (g, a, ws) = load_space(graph, Some(wp), mode)?;
            let v = g
                .vertex_by_name(vertex)
                .ok_or_else(|| Failure::Input(format!("unknown vertex {vertex}")))?;
            let wg = whitehead::whitehead_graph(&g, &ws, v)?;
            let cut = whitehead::find_admissible_cut(&wg, &a);
            out.push_str(&format!("vertex {vertex}\n"));
            for p in &wg.points {
                out.push_str(&format!("point {}\n", p.display(&g)));
            }
            for &(i, j) in &wg.edges {
                out.push_str(&format!("edge {} {}\n", wg.points[i].display(&g), wg.points[j].display(&g)));
            }
            let show = |s: &std::collections::BTreeSet<crate::cover::LinkPoint>| {
                s.iter().map(|p| p.display(&g)).collect::<Vec<_>>().join(",")
            };
            match cut.as_ref().map(|c| &c.kind) {
                None => out.push_str("cut none\n"),
                Some(CutKind::Component { component, stabilizer_index }) => {
                    out.push_str(&format!("cut component {} index {stabilizer_index}\n", show(component)))
                }
                Some(CutKind::CutPoint { point, side }) => {
                    out.push_str(&format!("cut point {} side {}\n", point.display(&g), show(side)))
                }
            }
            if let Some(path) = dot {
                write_file(path, &whitehead::to_dot(&g, &wg, cut.as_ref()))?;
            }
        }
        Command::CheckSimple { graph, words: wp, log } => {
            let (g, a, ws) = load_space(graph, Some(wp), mode)?;
            let run = factors::check_simple(&g, &a, &ws)?;
            if cfg.verbose > 0 {
                let _ = writeln!(
                    diag,
                    "{} unfold steps, edge counts {:?}, bound {}",
                    run.trace.cases.len(),
                    run.trace.edge_counts,
                    run.trace.edge_bound()
                );
            }
            if let Some(path) = log {
                write_file(path, &moves::write_log(&run.moves))?;
            }
            out.push_str(&factors::write_outcome(&run.outcome));
            if let Outcome::NotSimple(c) = &run.outcome {
                if c.elementary && cfg.verbose > 0 {
                    let _ = writeln!(diag, "the group has no proper special factor");
                }
            }
        }
        Command::MinimalFactors { graph, words: wp } => {
            let (g, a, ws) = load_space(graph, Some(wp), mode)?;
            let run = factors::minimal_factor_system(&g, &a, &ws)?;
            if cfg.verbose > 0 {
                for (p, q) in &run.descents {
                    let _ = writeln!(diag, "complexity {p} -> {q}");
                }
            }
            out.push_str(&factors::write_system(&run.system));
        }
        Command::Complexity { graph } => {
            let (g, _, _) = load_space(graph, None, mode)?;
            out.push_str(&format!("{}\n", factors::complexity(&g)));
        }
    }
    Ok(out)
}

/// Runs one command; returns the exit code.
pub fn run(cfg: &CliConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = execute(cfg, stderr).and_then(|text| match &cfg.output {
        Some(p) => write_file(p, &text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string())),
    });
    match result {
        Ok(()) => 0,
        Err(Failure::Input(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            2
        }
        Err(Failure::Domain(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            1
        }
    }
}

/// Parses `args` (including the program name) and runs.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match CliConfig::try_parse_from(args) {
        Ok(cfg) => run(&cfg, stdout, stderr),
        Err(e) => {
            let _ = write!(stderr, "{e}");
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}
