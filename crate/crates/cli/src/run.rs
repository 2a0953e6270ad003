use crate::args::{Cli, Command, Format, Source};
use anyhow::{anyhow, bail, Context, Result};
use defilab_core::complexity::{
    p_count, r_count, rect_count, stabilized_r, ComplexityTable, StabilizeOptions, TableRow,
};
use defilab_core::geom::Window;
use defilab_core::periodicity::{
    classify_definability, find_local_period, global_period_search, mh_classify_1d,
    muchnik_sample, repetitivity_probe, verify_local_periodicity, ClassifyBudget,
    LocalPeriodicityCert, PeriodSearchParams, PeriodVector,
};
use defilab_core::qe::{eliminate, QeConfig};
use defilab_core::raster::rasterize;
use defilab_core::set::{example_by_name, example_names, PointSet};
use defilab_core::{Formula, Grid, Qfnf};
use defilab_core::Ratio;
use std::io::Write as _;

pub fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        defilab_core::set_thread_cap(cli.threads).map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    let mut config = QeConfig::default();
    if let Some(cells) = cli.budget_cells {
        config.max_cells = cells;
    }
    if let Some(bits) = cli.budget_bits {
        config.coeff_bit_budget = bits;
    }
    let ctx = Ctx {
        config,
        seed: cli.seed,
    };
    match cli.command {
        Command::Parse { source } => {
            let f = ctx.formula_of(&source)?;
            println!("{}", f.render());
        }
        Command::Qe { source, vars } => {
            let f = ctx.formula_of(&source)?;
            let q = ctx.eliminate(&f, vars.as_deref())?;
            print!("{}", q.to_text());
        }
        Command::Eval { source, point } => {
            let set = ctx.set_of(&source)?;
            let p = parse_int_list(&point)?;
            if p.len() != set.dim() {
                bail!("point has {} coordinates, set has dimension {}", p.len(), set.dim());
            }
            println!("{}", set.membership(&p));
        }
        Command::Raster {
            source,
            window,
            format,
        } => {
            let set = ctx.set_of(&source)?;
            let w = ctx.window_of(&window, &set)?;
            let grid = rasterize(&set, &w)?;
            match format {
                Format::Ascii => print!("{}", grid.to_ascii()?),
                Format::Pbm => std::io::stdout().write_all(&grid.to_pbm()?)?,
                Format::Json => println!("{}", grid.to_json()),
                other => bail!("raster supports ascii, pbm and json, not {other:?}"),
            }
        }
        Command::Complexity {
            source,
            window,
            n,
            format,
        } => {
            let set = ctx.set_of(&source)?;
            let w = ctx.window_of(&window, &set)?;
            let mut table = ComplexityTable::default();
            for n in parse_range(&n)? {
                let count = p_count(&set, n, &w)?;
                table.push(TableRow {
                    n,
                    count,
                    stabilized: None,
                    window: w.clone(),
                    escape: None,
                });
            }
            print_table(&table, format)?;
        }
        Command::Recurrent {
            source,
            window,
            escape,
            stabilize,
            n,
            format,
            fit,
        } => {
            let set = ctx.set_of(&source)?;
            let mut table = ComplexityTable::default();
            if stabilize {
                let opts = StabilizeOptions {
                    initial: match &window {
                        Some(spec) => Some(ctx.window_of(spec, &set)?),
                        None => None,
                    },
                    grow: None,
                    max_radius: 4096,
                };
                for n in parse_range(&n)? {
                    let s = stabilized_r(&set, n, &opts)?;
                    table.push(TableRow {
                        n,
                        count: s.count,
                        stabilized: Some(s.stabilized),
                        window: s.window,
                        escape: Some(s.escape),
                    });
                }
            } else {
                let spec = window
                    .as_deref()
                    .ok_or_else(|| anyhow!("recurrent needs --window or --stabilize"))?;
                let w = ctx.window_of(spec, &set)?;
                let l = escape.unwrap_or_else(|| w.max_norm() / 2);
                for n in parse_range(&n)? {
                    let count = r_count(&set, n, &w, l)?;
                    table.push(TableRow {
                        n,
                        count,
                        stabilized: None,
                        window: w.clone(),
                        escape: Some(l),
                    });
                }
            }
            if fit {
                println!("{}", defilab_core::complexity::growth_fit_json(&table)?);
            } else {
                print_table(&table, format)?;
            }
        }
        Command::Rect {
            source,
            window,
            sizes,
            format,
        } => {
            let set = ctx.set_of(&source)?;
            let w = ctx.window_of(&window, &set)?;
            let sizes: Vec<usize> = parse_int_list(&sizes)?
                .into_iter()
                .map(|v| usize::try_from(v).context("sizes must be positive"))
                .collect::<Result<_>>()?;
            if sizes.len() != set.dim() {
                bail!("need {} sizes, got {}", set.dim(), sizes.len());
            }
            let count = rect_count(&set, &sizes, &w)?;
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({"sizes": sizes, "count": count})
                ),
                _ => println!("{count}"),
            }
        }
        Command::Section { source, axis, at } => {
            let q = ctx.qfnf_of(&source)?;
            let section = q.section(axis, at, &ctx.config)?;
            print!("{}", section.to_text());
        }
        Command::Border { source, direction } => {
            let q = ctx.qfnf_of(&source)?;
            let v = parse_int_list(&direction)?;
            let border = q.border(&v, &ctx.config)?;
            print!("{}", border.to_text());
        }
        Command::LocalPeriods {
            source,
            window,
            at,
            n,
            m,
            m0,
            c_num,
            c_den,
        } => {
            let set = ctx.set_of(&source)?;
            let w = ctx.window_of(&window, &set)?;
            let z = parse_int_list(&at)?;
            let m0 = m0
                .or_else(|| set.recurrence_radius_hint())
                .ok_or_else(|| anyhow!("--m0 required (set carries no recurrence hint)"))?;
            let grid = rasterize(&set, &w)?;
            let params = PeriodSearchParams {
                c: Ratio::new(c_num, c_den),
                n,
                m,
                m0,
            };
            match find_local_period(&grid, &z, &params)? {
                Some(v) => println!(
                    "{}",
                    serde_json::json!({"found": true, "v": v.as_slice(), "norm": v.norm()})
                ),
                None => println!("{}", serde_json::json!({"found": false})),
            }
        }
        Command::VerifyCert {
            source,
            cert,
            window,
        } => {
            let set = ctx.set_of(&source)?;
            let cert: LocalPeriodicityCert =
                serde_json::from_str(&cert).context("certificate JSON")?;
            let w = ctx.window_of(&window, &set)?;
            let report = verify_local_periodicity(&set, &cert, &w)?;
            println!("{}", serde_json::to_string(&report)?);
        }
        Command::Muchnik {
            source,
            k,
            periods,
            window,
        } => {
            let set = ctx.set_of(&source)?;
            let raw: Vec<Vec<i64>> = serde_json::from_str(&periods).context("periods JSON")?;
            let periods = raw
                .into_iter()
                .map(PeriodVector::new)
                .collect::<Result<Vec<_>, _>>()?;
            let w = ctx.window_of(&window, &set)?;
            match muchnik_sample(&set, k, &periods, &w)? {
                Some(l) => println!("{}", serde_json::json!({"holds": true, "L": l})),
                None => println!("{}", serde_json::json!({"holds": false})),
            }
        }
        Command::MhCheck {
            word,
            word_file,
            n_max,
        } => {
            let text = match (word, word_file) {
                (Some(w), None) => w,
                (None, Some(f)) => std::fs::read_to_string(&f).with_context(|| f.clone())?,
                _ => bail!("exactly one of --word / --word-file"),
            };
            let bits: Vec<bool> = text
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(anyhow!("word may contain only 0 and 1, found '{other}'")),
                })
                .collect::<Result<_>>()?;
            let verdict = mh_classify_1d(&bits, n_max)?;
            println!("{}", serde_json::to_string(&verdict)?);
        }
        Command::GlobalPeriods {
            source,
            window,
            max_norm,
        } => {
            let set = ctx.set_of(&source)?;
            let w = ctx.window_of(&window, &set)?;
            let grid = rasterize(&set, &w)?;
            let periods = global_period_search(&grid, max_norm);
            let raw: Vec<&[i64]> = periods.iter().map(|p| p.as_slice()).collect();
            println!("{}", serde_json::json!({"periods": raw}));
        }
        Command::Repetitive { source, t, window } => {
            let set = ctx.set_of(&source)?;
            let w = ctx.window_of(&window, &set)?;
            match repetitivity_probe(&set, t, &w)? {
                Some(r) => println!("{}", serde_json::json!({"repetitive": true, "M": r})),
                None => println!("{}", serde_json::json!({"repetitive": false})),
            }
        }
        Command::Classify {
            source,
            window,
            depth,
        } => {
            let set = ctx.set_of(&source)?;
            let mut budget = ClassifyBudget {
                seed: ctx.seed,
                ..ClassifyBudget::default()
            };
            if let Some(spec) = &window {
                budget.frame = Some(ctx.window_of(spec, &set)?);
            }
            let depth = depth.unwrap_or(set.dim().saturating_sub(1));
            let report = classify_definability(&set, depth, &budget)?;
            println!("{}", report.to_json());
        }
        Command::Example => {
            for name in example_names() {
                let set = example_by_name(name).expect("registry names resolve");
                println!("{name}\tdim={}", set.dim());
            }
        }
    }
    Ok(())
}

struct Ctx {
    config: QeConfig,
    seed: u64,
}

impl Ctx {
    fn formula_of(&self, source: &Source) -> Result<Formula> {
        let text = if let Some(f) = &source.formula {
            f.clone()
        } else if let Some(path) = &source.formula_file {
            std::fs::read_to_string(path).with_context(|| path.clone())?
        } else {
            bail!("this command needs --formula or --formula-file");
        };
        Ok(Formula::parse(&text)?)
    }

    fn eliminate(&self, f: &Formula, vars: Option<&str>) -> Result<Qfnf> {
        let order: Vec<String> = match vars {
            Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
            None => f.free_vars().iter().map(|v| v.base.clone()).collect(),
        };
        let refs: Vec<&str> = order.iter().map(|s| s.as_str()).collect();
        Ok(eliminate(f, &refs, &self.config)?)
    }

    fn qfnf_of(&self, source: &Source) -> Result<Qfnf> {
        if source.formula.is_some() || source.formula_file.is_some() {
            let f = self.formula_of(source)?;
            return self.eliminate(&f, None);
        }
        if let Some(name) = &source.example {
            let set = example_by_name(name)
                .ok_or_else(|| anyhow!("unknown example '{name}' (see `defilab example`)"))?;
            return set
                .qfnf()
                .cloned()
                .ok_or_else(|| anyhow!("'{name}' is procedural; it has no symbolic form"));
        }
        bail!("this command needs a symbolic source (--formula or a symbolic --example)");
    }

    fn set_of(&self, source: &Source) -> Result<PointSet> {
        if source.formula.is_some() || source.formula_file.is_some() {
            let f = self.formula_of(source)?;
            let q = self.eliminate(&f, None)?;
            if q.dim() == 0 {
                bail!("formula has no free variables; use `eval`");
            }
            return Ok(PointSet::symbolic("formula", q));
        }
        if let Some(name) = &source.example {
            return example_by_name(name)
                .ok_or_else(|| anyhow!("unknown example '{name}' (see `defilab example`)"));
        }
        if let Some(path) = &source.grid_json {
            let text = std::fs::read_to_string(path).with_context(|| path.clone())?;
            let grid = Grid::from_json(&text)?;
            return Ok(PointSet::from_grid("grid", grid, false));
        }
        bail!("this command needs --formula, --formula-file, --example or --grid-json");
    }

    fn window_of(&self, spec: &str, set: &PointSet) -> Result<Window> {
        parse_window(spec, set)
    }
}

/// Accepts `x=-20..20,y=-20..20` (named by the set's variable order) or the
/// positional form `-20..20,-20..20`.
fn parse_window(spec: &str, set: &PointSet) -> Result<Window> {
    let dim = set.dim();
    let axis_names: Vec<Vec<String>> = (0..dim)
        .map(|i| {
            let mut names = Vec::new();
            if let Some(q) = set.qfnf() {
                names.push(q.vars()[i].clone());
            }
            if i < 4 {
                names.push(["x", "y", "z", "w"][i].to_string());
            }
            names.push(format!("x{}", i + 1));
            names
        })
        .collect();
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != dim {
        bail!("window has {} axes, set has dimension {dim}", parts.len());
    }
    let mut bounds: Vec<Option<(i64, i64)>> = vec![None; dim];
    let named = parts.iter().all(|p| p.contains('='));
    for (pos, part) in parts.iter().enumerate() {
        let (axis, range_text) = if named {
            let (name, rest) = part
                .split_once('=')
                .ok_or_else(|| anyhow!("mixed named and positional window axes"))?;
            let name = name.trim();
            let axis = axis_names
                .iter()
                .position(|names| names.iter().any(|n| n == name))
                .ok_or_else(|| anyhow!("unknown axis '{name}'"))?;
            (axis, rest)
        } else {
            if part.contains('=') {
                bail!("mixed named and positional window axes");
            }
            (pos, *part)
        };
        let (lo, hi) = parse_range_pair(range_text)?;
        if bounds[axis].replace((lo, hi)).is_some() {
            bail!("axis given twice in window");
        }
    }
    let bounds: Vec<(i64, i64)> = bounds
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| anyhow!("axis {} missing from window", i + 1)))
        .collect::<Result<_>>()?;
    Ok(Window::new(bounds)?)
}

/// `A..B` with either side possibly negative.
fn parse_range_pair(text: &str) -> Result<(i64, i64)> {
    let idx = text
        .find("..")
        .ok_or_else(|| anyhow!("range '{text}' must look like A..B"))?;
    let lo: i64 = text[..idx].trim().parse().context("range lower bound")?;
    let hi: i64 = text[idx + 2..].trim().parse().context("range upper bound")?;
    Ok((lo, hi))
}

/// Block size range: `N` or `A..B`.
fn parse_range(text: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().context("range lower bound")?;
        let hi: usize = hi.trim().parse().context("range upper bound")?;
        if lo == 0 || hi < lo {
            bail!("invalid block size range {text}");
        }
        Ok((lo..=hi).collect())
    } else {
        let n: usize = text.trim().parse().context("block size")?;
        Ok(vec![n])
    }
}

fn parse_int_list(text: &str) -> Result<Vec<i64>> {
    text.split(',')
        .map(|p| p.trim().parse::<i64>().with_context(|| format!("integer '{p}'")))
        .collect()
}

fn print_table(table: &ComplexityTable, format: Format) -> Result<()> {
    match format {
        Format::Csv => print!("{}", table.to_csv()),
        Format::Text => print!("{}", table.to_text()),
        other => bail!("tables support text and csv, not {other:?}"),
    }
    Ok(())
}
