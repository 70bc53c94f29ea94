use admnet_cli::commands;
use admnet_core::duality::DualType;
use admnet_core::region::Mode;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Rate-region computations for acyclic discrete memoryless and Gaussian
/// networks.
#[derive(Parser)]
#[command(name = "admnet", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a document's network and coding parameters
    Validate { spec: PathBuf },
    /// Generate the inequality system and project onto external rates
    Region {
        spec: PathBuf,
        /// generation mode (overrides the document's `options.mode`)
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// keep redundant inequalities in the projected region
        #[arg(long)]
        no_prune: bool,
        /// emit the region as a JSON record
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a compress-and-forward relay instance
    Gdcaf { spec: PathBuf },
    /// Print a dual problem's system and check the swap structure
    Dual {
        spec: PathBuf,
        /// which transform relates the dual to the original
        #[arg(long = "type", value_enum)]
        dual_type: TypeArg,
    },
    /// Print the log-determinant bound system of a Gaussian instance
    Gaussian { spec: PathBuf },
    /// Built-in problem instances with expected results
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
    /// Unfold a block-level network into an acyclic network
    Unfold {
        spec: PathBuf,
        /// number of block transmissions
        #[arg(long)]
        blocks: usize,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// List entry names
    List,
    /// Run one entry and print its verdict
    Run { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Theorem1,
    Corollary1,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Theorem1 => Mode::Theorem1,
            ModeArg::Corollary1 => Mode::Corollary1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TypeArg {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
    #[value(name = "III")]
    III,
}

impl From<TypeArg> for DualType {
    fn from(t: TypeArg) -> DualType {
        match t {
            TypeArg::I => DualType::TypeI,
            TypeArg::II => DualType::TypeII,
            TypeArg::III => DualType::TypeIII,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Validate { spec } => commands::validate_cmd(&spec),
        Cmd::Region {
            spec,
            mode,
            no_prune,
            json,
        } => commands::region_cmd(&spec, mode.map(Mode::from), no_prune, json),
        Cmd::Gdcaf { spec } => commands::gdcaf_cmd(&spec),
        Cmd::Dual { spec, dual_type } => commands::dual_cmd(&spec, dual_type.into()),
        Cmd::Gaussian { spec } => commands::gaussian_cmd(&spec),
        Cmd::Catalog { action } => match action {
            CatalogCmd::List => commands::catalog_list_cmd(),
            CatalogCmd::Run { name } => commands::catalog_run_cmd(&name),
        },
        Cmd::Unfold { spec, blocks } => commands::unfold_cmd(&spec, blocks),
    };
    std::process::exit(code);
}
