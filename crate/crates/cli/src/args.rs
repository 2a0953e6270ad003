use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "defilab",
    about = "Symbolic and procedural subsets of Z^d: quantifier elimination, \
             block complexity, and periodicity certification",
    version
)]
pub struct Cli {
    /// Worker thread cap for parallel scans (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Seed for randomized sampling, where a command uses any.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Cell-count budget for quantifier elimination.
    #[arg(long, global = true)]
    pub budget_cells: Option<usize>,

    /// Coefficient bit budget for quantifier elimination.
    #[arg(long, global = true)]
    pub budget_bits: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

/// Exactly one way of naming the set a command operates on.
#[derive(Args, Debug, Clone)]
#[group(multiple = false)]
pub struct Source {
    /// A formula literal in the crate grammar.
    #[arg(long)]
    pub formula: Option<String>,

    /// File holding one formula ('#' starts a comment line).
    #[arg(long)]
    pub formula_file: Option<String>,

    /// Built-in example name (see `defilab example`).
    #[arg(long)]
    pub example: Option<String>,

    /// Grid JSON file produced by `defilab raster --format json`.
    #[arg(long)]
    pub grid_json: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
    Ascii,
    Pbm,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a formula and print its canonical rendering.
    Parse {
        #[command(flatten)]
        source: Source,
    },
    /// Eliminate quantifiers and print the cell normal form.
    Qe {
        #[command(flatten)]
        source: Source,
        /// Variable order, comma separated; defaults to free-variable order.
        #[arg(long)]
        vars: Option<String>,
    },
    /// Evaluate membership of a point.
    Eval {
        #[command(flatten)]
        source: Source,
        /// Comma-separated integer coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Materialize a window as a grid.
    Raster {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long, value_enum, default_value_t = Format::Ascii)]
        format: Format,
    },
    /// Distinct-block counts over a range of block sizes.
    Complexity {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        /// Block sizes, as `N` or `A..B`.
        #[arg(long)]
        n: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Recurrent-block counts (blocks with an anchor beyond the escape radius).
    Recurrent {
        #[command(flatten)]
        source: Source,
        /// Fixed window (omit with --stabilize for doubling windows).
        #[arg(long)]
        window: Option<String>,
        /// Escape radius L; defaults to half the window radius.
        #[arg(long, allow_negative_numbers = true)]
        escape: Option<i64>,
        /// Double the window until the count stabilizes.
        #[arg(long, default_value_t = false)]
        stabilize: bool,
        #[arg(long)]
        n: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Print the growth-fit JSON instead of the table.
        #[arg(long, default_value_t = false)]
        fit: bool,
    },
    /// Distinct rectangular patterns of the given per-axis sizes.
    Rect {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        /// Per-axis sizes, comma separated, e.g. `3,2`.
        #[arg(long)]
        sizes: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Fix one coordinate of a symbolic set and print the section.
    Section {
        #[command(flatten)]
        source: Source,
        /// Axis to fix, 1-based.
        #[arg(long)]
        axis: usize,
        /// Value the axis is fixed to.
        #[arg(long, allow_negative_numbers = true)]
        at: i64,
    },
    /// Points of a symbolic set whose translate by a vector leaves the set.
    Border {
        #[command(flatten)]
        source: Source,
        /// Direction vector, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
    },
    /// Pigeonhole local-period search around a point of a rasterized window.
    LocalPeriods {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        /// Center point z, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Block size n.
        #[arg(long)]
        n: usize,
        /// Pigeonhole box size m.
        #[arg(long)]
        m: usize,
        /// Escape radius m0; defaults to the set's recurrence radius hint.
        #[arg(long, allow_negative_numbers = true)]
        m0: Option<i64>,
        /// Complexity constant C as a fraction.
        #[arg(long, default_value_t = 3)]
        c_num: i64,
        #[arg(long, default_value_t = 1)]
        c_den: i64,
    },
    /// Verify a local-periodicity certificate over a window.
    VerifyCert {
        #[command(flatten)]
        source: Source,
        /// Certificate JSON: {"V": [[1,1],[1,0]], "K": 3, "L": 4}.
        #[arg(long)]
        cert: String,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
    },
    /// Smallest escape radius for which the sampled Muchnik instance holds.
    Muchnik {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        k: i64,
        /// Period vectors as JSON, e.g. `[[1,1],[1,0]]`.
        #[arg(long)]
        periods: String,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
    },
    /// One-dimensional ultimate-periodicity check on a 0/1 word.
    MhCheck {
        /// Word literal of 0s and 1s.
        #[arg(long)]
        word: Option<String>,
        /// File holding the word (whitespace ignored).
        #[arg(long)]
        word_file: Option<String>,
        #[arg(long)]
        n_max: usize,
    },
    /// All global periods of a rasterized window up to a norm bound.
    GlobalPeriods {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long)]
        max_norm: i64,
    },
    /// Repetitivity radius estimate M(t).
    Repetitive {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        t: i64,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
    },
    /// Empirical definability classification.
    Classify {
        #[command(flatten)]
        source: Source,
        /// Stabilization frame (maximum window) for the top level.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        /// Section recursion depth; defaults to dimension - 1.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// List the built-in example registry.
    Example,
}
