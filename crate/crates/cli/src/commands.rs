use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use paratorus::besov::{besov_norm, decay_slope, synth_lacunary, synth_octave};
use paratorus::paraproduct::{paraproduct as para, resonant};
use paratorus::spectral::pfld::{read_field, write_field};
use paratorus::spectral::{lp_decompose, DyadicPartition, Field, Grid};
use paratorus::verify::{
    build_context, fit_exponent, run_decay_suite, run_identity_suite, run_remainder, DecayParams, DecayTarget,
    Formula, IdentityId, IdentityParams, RemainderParams, RemainderSample, Report, SamplingPlan,
};

use crate::config::embed;
use crate::Failure;

const DESK_GRID: usize = 1 << 14;

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SynthArgs {
    /// Regularity α (positive, non-integer).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Points per axis, a power of two.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// `lacunary` (one mode per octave) or `octave` (four per octave).
    #[arg(long)]
    pub kind: Option<String>,
    /// Highest octave; defaults to the finest one the grid resolves.
    #[arg(long)]
    pub top: Option<i32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BlocksArgs {
    /// PFLD field file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub j_min: Option<usize>,
    #[arg(long)]
    pub j_max: Option<usize>,
    /// `j,sup_norm` rows; stdout if omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Fitted slope; stdout if omitted.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ParaproductArgs {
    #[arg(long)]
    pub f: Option<PathBuf>,
    #[arg(long)]
    pub g: Option<PathBuf>,
    /// `paraproduct` (f ⩕ g), `resonant` (f ⊙ g) or `product`.
    #[arg(long)]
    pub op: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RemainderArgs {
    /// omega1, omega2, omega3 or omega_word.
    #[arg(long)]
    pub formula: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Letter regularities, comma separated; replaces alpha/beta/gamma.
    #[arg(long, value_delimiter = ',')]
    pub regularities: Vec<f64>,
    /// Number of seeds.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// First seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub base_points: Option<usize>,
    #[arg(long)]
    pub per_bin: Option<usize>,
    /// Coarsest scale bin `r` (|h| below 2^{−r}).
    #[arg(long)]
    pub r_min: Option<u32>,
    /// Finest scale bin.
    #[arg(long)]
    pub r_max: Option<u32>,
    /// Bins dropped at each end before fitting.
    #[arg(long)]
    pub drop: Option<usize>,
    #[arg(long)]
    pub shift: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// RemainderSample rows; stdout if omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Report; stdout if omitted.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CheckArgs {
    /// wdofd, explicit_c, lmm1, lmm2, bony, reorg or leibniz.
    #[arg(long)]
    pub identity: Option<String>,
    /// c_kj, r_seq, d_kj or moment_block.
    #[arg(long)]
    pub decay: Option<String>,
    /// Number of letters for an identity.
    #[arg(long)]
    pub n: Option<usize>,
    /// Word `12⋯n` for a decay suite.
    #[arg(long)]
    pub word: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub regularities: Vec<f64>,
    /// Derivative order |k| of a decay suite.
    #[arg(long)]
    pub order: Option<usize>,
    /// Largest |k| of an identity check.
    #[arg(long)]
    pub max_order: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub shift: Option<usize>,
    /// Seed of an identity check, first seed of a decay suite.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of seeds of a decay suite.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Random (x, y) pairs of an identity check.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub j_min: Option<usize>,
    #[arg(long)]
    pub j_max: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// `j,sup_norm` rows of a decay suite.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Report; stdout if omitted.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct FitArgs {
    /// RemainderSample CSV or `j,sup_norm` CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub drop: Option<usize>,
    #[arg(long)]
    pub j_min: Option<usize>,
    #[arg(long)]
    pub j_max: Option<usize>,
    /// Slope to compare against; with `--tolerance` the exit status reflects it.
    #[arg(long)]
    pub expected: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn required<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, Failure> {
    v.clone().ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    let mut out = sink(path)?;
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

fn read_pfld(path: &Path) -> Result<Field, Failure> {
    let file = File::open(path).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(read_field(&mut BufReader::new(file))?.0)
}

fn seed_list(first: u64, count: u64) -> Result<Vec<u64>, Failure> {
    if count == 0 {
        return Err(Failure::Usage("--seeds must be at least 1".into()));
    }
    Ok((first..first + count).collect())
}

fn verdict(pass: bool, what: String) -> Result<(), Failure> {
    if pass {
        Ok(())
    } else {
        Err(Failure::Tolerance(what))
    }
}

pub fn synth(mut a: SynthArgs) -> Result<(), Failure> {
    let alpha = required(&a.alpha, "alpha")?;
    let out = required(&a.out, "out")?;
    let seed = *a.seed.get_or_insert(0);
    let grid = Grid::new(*a.dim.get_or_insert(1), *a.grid.get_or_insert(DESK_GRID))?;
    let p = DyadicPartition::for_grid(grid)?;
    let kind = a.kind.get_or_insert_with(|| "lacunary".into()).clone();
    let field = match kind.as_str() {
        "lacunary" => synth_lacunary(alpha, seed, *a.top.get_or_insert(p.j_max()), &p)?,
        "octave" => synth_octave(alpha, seed, *a.top.get_or_insert(p.j_max() - 1), &p)?,
        other => return Err(Failure::Usage(format!("unknown synthesis kind `{other}`"))),
    };
    let mut description = embed(&a, &["out"]);
    description["git_describe"] = json!(paratorus::verify::git_describe());
    let description = description.to_string();
    let mut w = BufWriter::new(File::create(&out).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", out.display())))?);
    write_field(&mut w, &field, &description)?;
    w.flush()?;
    println!("besov_norm {}", besov_norm(&field, alpha, &p)?);
    Ok(())
}

pub fn blocks(a: BlocksArgs) -> Result<(), Failure> {
    let field = read_pfld(&required(&a.input, "input")?)?;
    let p = DyadicPartition::for_grid(field.grid())?;
    let norms = lp_decompose(&field, &p)?.sup_norms();
    let j_min = a.j_min.unwrap_or(1);
    let j_max = a.j_max.unwrap_or(norms.len() - 1);
    let mut w = csv::Writer::from_writer(sink(&a.csv)?);
    w.write_record(["j", "sup_norm"])?;
    for (j, v) in norms.iter().enumerate() {
        w.write_record([j.to_string(), v.to_string()])?;
    }
    w.flush()?;
    drop(w);
    let fit = decay_slope(&norms, j_min..=j_max)?;
    write_json(&a.json, &serde_json::to_string_pretty(&fit).expect("fit serializes"))
}

pub fn paraproduct(a: ParaproductArgs) -> Result<(), Failure> {
    let f = read_pfld(&required(&a.f, "f")?)?;
    let g = read_pfld(&required(&a.g, "g")?)?;
    if f.grid() != g.grid() {
        return Err(Failure::Usage("f and g live on different grids".into()));
    }
    let p = DyadicPartition::for_grid(f.grid())?;
    let op = a.op.as_deref().unwrap_or("paraproduct");
    let result = match op {
        "paraproduct" => para(&f, &g, &p)?,
        "resonant" => resonant(&f, &g, &p)?,
        "product" => f.mul(&g),
        other => return Err(Failure::Usage(format!("unknown operation `{other}`"))),
    };
    if let Some(out) = &a.out {
        let mut w = BufWriter::new(File::create(out)?);
        write_field(&mut w, &result, op)?;
        w.flush()?;
    }
    println!("sup_norm {}", result.sup_norm());
    Ok(())
}

pub fn remainder(mut a: RemainderArgs) -> Result<(), Failure> {
    let formula: Formula = required(&a.formula, "formula")?.parse()?;
    if a.regularities.is_empty() {
        a.regularities = [a.alpha, a.beta, a.gamma].into_iter().map_while(|v| v).collect();
    }
    a.alpha = None;
    a.beta = None;
    a.gamma = None;
    let defaults = SamplingPlan::default();
    let plan = SamplingPlan {
        base_points: *a.base_points.get_or_insert(defaults.base_points),
        per_bin: *a.per_bin.get_or_insert(defaults.per_bin),
        r_min: *a.r_min.get_or_insert(defaults.r_min),
        r_max: *a.r_max.get_or_insert(defaults.r_max),
    };
    let base = RemainderParams::new(formula, a.regularities.clone());
    let seeds = seed_list(*a.seed.get_or_insert(1), *a.seeds.get_or_insert(base.seeds.len() as u64))?;
    let params = RemainderParams {
        dim: *a.dim.get_or_insert(base.dim),
        grid: *a.grid.get_or_insert(base.grid),
        seeds: seeds.clone(),
        plan,
        drop: *a.drop.get_or_insert(base.drop),
        shift: *a.shift.get_or_insert(base.shift),
        tolerance: a.tolerance,
        ..base
    };
    let tolerance = *a.tolerance.get_or_insert(params.tolerance());
    let run = run_remainder(&params)?;

    let mut w = csv::Writer::from_writer(sink(&a.csv)?);
    for s in &run.samples {
        w.serialize(s)?;
    }
    w.flush()?;
    drop(w);

    let report = Report::new(
        "remainder",
        embed(&a, &["csv", "json"]),
        json!(run.expected),
        json!({ "median_slope": run.median_slope, "fits": run.fits }),
        tolerance,
        run.pass,
        seeds,
    );
    write_json(&a.json, &report.to_json())?;
    verdict(
        run.pass,
        format!(
            "median slope {:.4} is not within {tolerance} of {}",
            run.median_slope, run.expected
        ),
    )
}

fn word_letters(word: &str) -> Result<usize, Failure> {
    let n = word.chars().count();
    let expected: String = (1..=n).map(|i| i.to_string()).collect();
    if n == 0 || n > 9 || word != expected {
        return Err(Failure::Usage(format!("word must read 12⋯n with n ≤ 9, got `{word}`")));
    }
    Ok(n)
}

pub fn check(a: CheckArgs) -> Result<(), Failure> {
    match (&a.identity, &a.decay) {
        (Some(id), None) => {
            let id: IdentityId = id.parse()?;
            check_identity(a, id)
        }
        (None, Some(t)) => {
            let t: DecayTarget = t.parse()?;
            check_decay(a, t)
        }
        _ => Err(Failure::Usage("exactly one of --identity and --decay is required".into())),
    }
}

fn check_identity(mut a: CheckArgs, id: IdentityId) -> Result<(), Failure> {
    let n = *a.n.get_or_insert(id.default_letters());
    let base = if a.regularities.is_empty() {
        IdentityParams::for_letters(n)?
    } else {
        if a.regularities.len() != n {
            return Err(Failure::Usage(format!(
                "{} regularities given for {n} letters",
                a.regularities.len()
            )));
        }
        IdentityParams {
            regularities: a.regularities.clone(),
            ..IdentityParams::for_letters(1)?
        }
    };
    a.regularities = base.regularities.clone();
    let params = IdentityParams {
        dim: *a.dim.get_or_insert(base.dim),
        grid: *a.grid.get_or_insert(base.grid),
        shift: *a.shift.get_or_insert(base.shift),
        seed: *a.seed.get_or_insert(base.seed),
        pairs: *a.pairs.get_or_insert(base.pairs),
        max_order: *a.max_order.get_or_insert(base.max_order),
        ..base
    };
    let tolerance = *a.tolerance.get_or_insert(paratorus::verify::IDENTITY_TOLERANCE);
    let ctx = build_context(&params)?;
    let rep = run_identity_suite(&ctx, id, &params)?;
    let pass = rep.passes(tolerance);
    let report = Report::new(
        "identity",
        embed(&a, &["csv", "json"]),
        json!(0.0),
        serde_json::to_value(&rep).expect("report serializes"),
        tolerance,
        pass,
        vec![params.seed],
    );
    write_json(&a.json, &report.to_json())?;
    verdict(
        pass,
        format!("{id}: residual {:.3e} exceeds {tolerance:e}", rep.max_residual),
    )
}

fn check_decay(mut a: CheckArgs, target: DecayTarget) -> Result<(), Failure> {
    if a.regularities.is_empty() {
        a.regularities = match target {
            DecayTarget::CKj | DecayTarget::DKj => {
                let n = word_letters(a.word.as_deref().unwrap_or("12"))?;
                [0.6, 0.7, 0.9, 0.4, 0.3, 0.45, 0.35, 0.55, 0.65][..n].to_vec()
            }
            DecayTarget::RSeq => vec![0.6, 0.7],
            DecayTarget::MomentBlock => vec![0.7],
        };
    } else if let Some(w) = &a.word {
        if word_letters(w)? != a.regularities.len() {
            return Err(Failure::Usage(format!("word `{w}` does not match the regularities given")));
        }
    }
    a.word = None;
    let base = DecayParams::new(a.regularities.clone(), *a.order.get_or_insert(0));
    let seeds = seed_list(*a.seed.get_or_insert(1), *a.seeds.get_or_insert(base.seeds.len() as u64))?;
    let params = DecayParams {
        dim: *a.dim.get_or_insert(base.dim),
        grid: *a.grid.get_or_insert(base.grid),
        shift: *a.shift.get_or_insert(base.shift),
        seeds: seeds.clone(),
        j_min: a.j_min,
        j_max: a.j_max,
        ..base
    };
    let rep = run_decay_suite(target, &params)?;
    if a.csv.is_some() {
        let mut w = csv::Writer::from_writer(sink(&a.csv)?);
        w.write_record(["j", "sup_norm"])?;
        for (j, v) in rep.norms.iter().enumerate() {
            w.write_record([j.to_string(), v.to_string()])?;
        }
        w.flush()?;
    }
    a.j_min = Some(rep.fit.j_min);
    a.j_max = Some(rep.fit.j_max);
    let report = Report::new(
        "decay",
        embed(&a, &["csv", "json"]),
        json!(rep.expected),
        serde_json::to_value(&rep).expect("report serializes"),
        rep.tolerance,
        rep.pass,
        seeds,
    );
    write_json(&a.json, &report.to_json())?;
    verdict(
        rep.pass,
        format!("{target}: slope {:.4} against expected {:?}", rep.fit.slope, rep.expected),
    )
}

#[derive(Deserialize)]
struct DecayRow {
    #[allow(dead_code)]
    j: usize,
    sup_norm: f64,
}

pub fn fit(a: FitArgs) -> Result<(), Failure> {
    let path = required(&a.input, "input")?;
    let mut r = csv::Reader::from_path(&path)?;
    let headers = r.headers()?.clone();
    let (slope, body): (f64, Value) = if headers.iter().any(|h| h == "abs_omega") {
        let samples = r.deserialize().collect::<Result<Vec<RemainderSample>, _>>()?;
        let fit = fit_exponent(&samples, a.drop.unwrap_or(2))?;
        (fit.slope, serde_json::to_value(&fit).expect("fit serializes"))
    } else if headers.iter().eq(["j", "sup_norm"]) {
        let norms: Vec<f64> = r
            .deserialize()
            .map(|row| row.map(|d: DecayRow| d.sup_norm))
            .collect::<Result<_, _>>()?;
        let j_min = a.j_min.unwrap_or(1);
        let j_max = a.j_max.unwrap_or(norms.len().saturating_sub(1));
        let fit = decay_slope(&norms, j_min..=j_max)?;
        (fit.slope, serde_json::to_value(fit).expect("fit serializes"))
    } else {
        return Err(Failure::Usage(format!(
            "{} is neither a remainder-sample nor a `j,sup_norm` CSV",
            path.display()
        )));
    };
    write_json(&a.json, &serde_json::to_string_pretty(&body).expect("fit serializes"))?;
    match (a.expected, a.tolerance) {
        (Some(e), Some(t)) => verdict((slope - e).abs() <= t, format!("slope {slope:.4} is not within {t} of {e}")),
        _ => Ok(()),
    }
}
