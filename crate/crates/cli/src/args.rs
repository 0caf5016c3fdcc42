use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "shapemap", version, about = "Shape operators and collapse analysis for congruences of PDE solutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check embeddedness and integrability of the congruence on a grid around run.start
    Validate(Common),
    /// Directional and total shape operators and their traces
    Shape(Common),
    /// Curvature components at jet points (base points are lifted through Z)
    Curvature(Common),
    /// Integrate from run.start and look for collapse
    Collapse(Common),
    /// Curvature identities and evolution equations at random points
    Verify(VerifyArgs),
    /// Sample the solution surface swept out by the congruence curves (CSV)
    Surface(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file
    pub config: PathBuf,
    /// Use (dx^a, d/dx^a) for this independent variable instead of the configured direction
    #[arg(long)]
    pub direction: Option<String>,
    /// Comma separated coordinates; may be repeated
    #[arg(long = "point", value_parser = parse_point)]
    pub points: Vec<Point>,
    /// Write CSV instead of a table
    #[arg(long)]
    pub csv: bool,
    /// Print the configuration with all defaults filled in and exit
    #[arg(long)]
    pub dump_config: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Override verify.seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override verify.points
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

fn parse_point(text: &str) -> Result<Point, String> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("not a number: {part:?}"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Point)
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Validate(c) | Command::Shape(c) | Command::Curvature(c) | Command::Collapse(c) | Command::Surface(c) => c,
            Command::Verify(v) => &v.common,
        }
    }
}
