//! `relevance`: practical-relevance analyses from a TOML config.
//!
//! Exit codes: 0 when the command ran to completion (whatever the verdict),
//! 2 for input or config errors, 3 for numerical or I/O failures.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use relevance::config::{ConfigDocument, DecisionRule};
use relevance::decision::{bayes_two_action_decision, expected_loss_decision_with};
use relevance::hypotheses::check_incorporation;
use relevance::partition::partition;
use relevance::plot::{render_svg, PlotSpec};
use relevance::report::{
    comparison_csv, decision_csv, hypothesis_csv, partition_csv, rate_table_console, rate_table_csv, to_json,
    ComparisonRow, DecisionDocument, HypothesisDocument, OutputFormat, PartitionDocument,
};
use relevance::sim::{procedure_labels, run_operating_characteristics_with_threads, ProcedureContext, ProcedureOutput};
use relevance::{Decision, Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "relevance",
    version,
    about = "Practical relevance as a two-action decision problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Also write the SVG loss plot (partition).
    #[arg(long, global = true)]
    plot: bool,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Points at which plotted curves are sampled.
    #[arg(long, global = true)]
    grid: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Split the parameter space into negligible and relevant effects.
    Partition,
    /// Check whether the configured hypotheses incorporate practical relevance.
    CheckHypotheses,
    /// Choose between the actions from the posterior.
    Decide,
    /// Run the configured comparator procedures on the observed data.
    Compare,
    /// Tabulate operating characteristics of the scenario's procedures.
    Simulate,
    /// Draw both loss curves with the partition shaded.
    Plot,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

struct Run {
    cli: Cli,
    doc: ConfigDocument,
}

impl Run {
    fn format(&self, default: OutputFormat) -> OutputFormat {
        self.cli
            .format
            .map(OutputFormat::from)
            .or(self.doc.output.format)
            .unwrap_or(default)
    }

    fn output_path(&self) -> Option<PathBuf> {
        self.cli.output.clone().or_else(|| self.doc.output.path.clone())
    }

    fn emit(&self, text: &str) -> Result<()> {
        match self.output_path() {
            Some(path) => write_file(&path, text),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }

    fn plot_spec(&self) -> Result<PlotSpec> {
        let grid = match self.cli.grid {
            Some(g) if g < 2 => return Err(Error::Config(format!("--grid must be at least 2, got {g}"))),
            Some(g) => g,
            None => self.doc.plot_grid()?,
        };
        Ok(PlotSpec {
            grid,
            ..PlotSpec::default()
        })
    }

    fn svg(&self) -> Result<String> {
        let spec = self.doc.loss_spec()?;
        let part = partition(&spec, &self.doc.partition_options()?)?;
        render_svg(&spec, &part, &self.doc.action_pair()?, &self.plot_spec()?)
    }

    fn partition(&self) -> Result<()> {
        let spec = self.doc.loss_spec()?;
        let opts = self.doc.partition_options()?;
        let actions = self.doc.action_pair()?;
        let part = partition(&spec, &opts)?;
        let plot_path = if self.cli.plot {
            let path = self
                .doc
                .output
                .plot_path
                .clone()
                .or_else(|| self.output_path().map(|p| p.with_extension("svg")))
                .ok_or_else(|| Error::Config("--plot needs output.plot_path or an output path".into()))?;
            Some(path)
        } else {
            None
        };
        let text = match self.format(OutputFormat::Csv) {
            OutputFormat::Csv => partition_csv(&part)?,
            OutputFormat::Json => to_json(&PartitionDocument::new(
                &part,
                spec.space,
                actions.clone(),
                opts.grid_size,
                opts.root_tol,
            ))?,
        };
        self.emit(&text)?;
        if let Some(path) = plot_path {
            let svg = render_svg(&spec, &part, &actions, &self.plot_spec()?)?;
            write_file(&path, &svg)?;
        }
        Ok(())
    }

    fn check_hypotheses(&self) -> Result<()> {
        self.doc.require_hypotheses()?;
        let spec = self.doc.loss_spec()?;
        let (pair, _) = self.doc.hypothesis_pair(&spec)?;
        let report = check_incorporation(&pair, &spec, &self.doc.partition_options()?)?;
        let doc = HypothesisDocument::new(&pair, &report);
        let text = match self.format(OutputFormat::Json) {
            OutputFormat::Json => to_json(&doc)?,
            OutputFormat::Csv => hypothesis_csv(&doc)?,
        };
        self.emit(&text)
    }

    fn decide(&self) -> Result<()> {
        let decision = self.doc.decision()?;
        let spec = self.doc.loss_spec()?;
        let model = self.doc.sampling_model()?;
        let (pair, restricted) = self.doc.hypothesis_pair(&spec)?;
        let post = model.posterior()?;
        let (rule, outcome) = match decision.rule {
            DecisionRule::HypothesisRatio => (
                "hypothesis_ratio",
                bayes_two_action_decision(&post, &pair, &decision.loss_ratio, restricted)?,
            ),
            DecisionRule::ExpectedLoss => ("expected_loss", expected_loss_decision_with(&post, &spec, &pair)?),
        };
        let actions = self.doc.action_pair()?;
        let chosen = match outcome.decision {
            Decision::A0 => actions.a0_label.clone(),
            Decision::A1 => actions.a1_label.clone(),
            Decision::Indeterminate => "indeterminate".to_string(),
        };
        let doc = DecisionDocument {
            rule,
            actions,
            loss_ratio: decision.loss_ratio,
            h0: pair.h0.clone(),
            h1: pair.h1.clone(),
            restricted_space: restricted,
            posterior: post.summary(),
            outcome,
            chosen,
        };
        let text = match self.format(OutputFormat::Json) {
            OutputFormat::Json => to_json(&doc)?,
            OutputFormat::Csv => decision_csv(&doc)?,
        };
        self.emit(&text)
    }

    fn compare(&self) -> Result<()> {
        let spec = self.doc.loss_spec()?;
        let model = self.doc.sampling_model()?;
        let (pair, restricted) = self.doc.hypothesis_pair(&spec)?;
        if self.doc.comparators.is_empty() && self.doc.decision.is_none() {
            return Err(Error::Config(
                "compare needs `comparators` or a `decision` section".into(),
            ));
        }
        for p in &self.doc.comparators {
            p.check().map_err(|e| Error::Config(format!("comparators: {e}")))?;
        }
        let ctx = ProcedureContext {
            loss: &spec,
            hypotheses: &pair,
        };
        let mut rows: Vec<ComparisonRow> = procedure_labels(&self.doc.comparators)
            .into_iter()
            .zip(&self.doc.comparators)
            .map(|(label, p)| ComparisonRow::new(label, &p.evaluate(&ctx, &model)))
            .collect();
        if let Some(decision) = self.doc.decision {
            let result = model.posterior().and_then(|post| match decision.rule {
                DecisionRule::HypothesisRatio => {
                    bayes_two_action_decision(&post, &pair, &decision.loss_ratio, restricted)
                }
                DecisionRule::ExpectedLoss => expected_loss_decision_with(&post, &spec, &pair),
            });
            let label = match decision.rule {
                DecisionRule::HypothesisRatio => "decision:hypothesis_ratio",
                DecisionRule::ExpectedLoss => "decision:expected_loss",
            };
            rows.push(ComparisonRow::new(label, &result.map(ProcedureOutput::Decision)));
        }
        let text = match self.format(OutputFormat::Csv) {
            OutputFormat::Csv => comparison_csv(&rows)?,
            OutputFormat::Json => to_json(&rows)?,
        };
        self.emit(&text)
    }

    fn simulate(&self) -> Result<()> {
        if self.cli.threads == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        let scenario = self.doc.scenario(self.cli.seed)?;
        let table = run_operating_characteristics_with_threads(&scenario, self.cli.threads)?;
        let format = self.format(OutputFormat::Csv);
        let text = match format {
            OutputFormat::Csv => rate_table_csv(&table)?,
            OutputFormat::Json => to_json(&table)?,
        };
        let console = rate_table_console(&table);
        match self.output_path() {
            Some(path) => {
                write_file(&path, &text)?;
                if format == OutputFormat::Csv {
                    write_file(&path.with_extension("json"), &to_json(&table)?)?;
                }
                print!("{console}");
            }
            None => {
                self.emit(&text)?;
                eprint!("{console}");
            }
        }
        Ok(())
    }

    fn plot(&self) -> Result<()> {
        let svg = self.svg()?;
        match self.cli.output.clone().or_else(|| self.doc.output.plot_path.clone()) {
            Some(path) => write_file(&path, &svg),
            None => {
                print!("{svg}");
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<()> {
    let config = cli
        .config
        .clone()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let doc = ConfigDocument::from_path(&config)?;
    let run = Run { cli, doc };
    match run.cli.command {
        Command::Partition => run.partition(),
        Command::CheckHypotheses => run.check_hypotheses(),
        Command::Decide => run.decide(),
        Command::Compare => run.compare(),
        Command::Simulate => run.simulate(),
        Command::Plot => run.plot(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
