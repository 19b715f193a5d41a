use std::fmt::Display;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use moran_core::cases::{run_case_capped, CaseName, OverlapSpec};
use moran_core::certify::{certify, CertifyOptions, DEFAULT_SEARCH_RANK};
use moran_core::image::{image_sequence, DomainU, ImageOptions, ModelSpec, OpenBox};
use moran_core::moran::DEFAULT_LEVEL_CAP;
use moran_core::{Interval, IntervalSet, Layout, MoranSpec, Rational, Scalar};

use crate::args::{Backend, BuildArgs, CaseArgs, CertifyArgs, Format, ImageArgs, ModelArgs, SpecArgs};

pub const SCHEMA: u32 = 1;

/// A failure reported on stderr as `error[code]: message`.
#[derive(Debug)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: &str, message: impl Display) -> Self {
        Diagnostic {
            code: code.to_string(),
            message: message.to_string(),
        }
    }
}

impl From<moran_core::Error> for Diagnostic {
    fn from(e: moran_core::Error) -> Self {
        Diagnostic::new(e.code(), e)
    }
}

/// What a command produced: the rendered report, and a diagnostic that
/// still turns the run into a failure (exit code alongside).
pub struct Outcome {
    pub report: String,
    pub failure: Option<(i32, Diagnostic)>,
}

impl Outcome {
    fn ok(report: String) -> Self {
        Outcome { report, failure: None }
    }
}

pub struct Caps {
    pub pair: u64,
    pub level: u64,
}

impl Caps {
    /// Defaults, or `MORAN_CAP` for both caps.
    pub fn from_env() -> Result<Self, Diagnostic> {
        match std::env::var("MORAN_CAP") {
            Ok(v) => {
                let cap: u64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Diagnostic::new("invalid-env", format!("MORAN_CAP `{v}` is not a nonnegative integer")))?;
                Ok(Caps { pair: cap, level: cap })
            }
            Err(_) => Ok(Caps {
                pair: moran_core::image::DEFAULT_PAIR_CAP,
                level: DEFAULT_LEVEL_CAP,
            }),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

fn render_json<T: Serialize>(command: &str, body: T) -> Result<String, Diagnostic> {
    let mut s = serde_json::to_string_pretty(&Envelope {
        schema: SCHEMA,
        command,
        body,
    })
    .map_err(|e| Diagnostic::new("internal", e))?;
    s.push('\n');
    Ok(s)
}

/// `k,count,measure,max_gap` rows.
fn render_csv(rows: impl IntoIterator<Item = [String; 4]>) -> Result<String, Diagnostic> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Diagnostic::new("io", e);
    w.write_record(["k", "count", "measure", "max_gap"]).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Diagnostic::new("io", e))?;
    String::from_utf8(bytes).map_err(|e| Diagnostic::new("internal", e))
}

fn read_spec(path: &Path, seed: Option<u64>) -> Result<MoranSpec, Diagnostic> {
    let text = fs::read_to_string(path).map_err(|e| Diagnostic::new("io", format!("{}: {e}", path.display())))?;
    let spec: MoranSpec = serde_json::from_str(&text)
        .map_err(|e| Diagnostic::new("malformed-spec", format!("{}: {e}", path.display())))?;
    Ok(match (spec.layout(), seed) {
        (Layout::Random { .. }, Some(seed)) => spec.with_layout(Layout::Random { seed }),
        _ => spec,
    })
}

fn read_specs(args: &SpecArgs) -> Result<(MoranSpec, MoranSpec), Diagnostic> {
    let a = read_spec(&args.spec, args.seed)?;
    let b = match &args.spec2 {
        Some(p) => read_spec(p, args.seed)?,
        None => a.clone(),
    };
    Ok((a, b))
}

fn parse_u(boxes: &[String]) -> Result<DomainU<Rational>, Diagnostic> {
    if boxes.is_empty() {
        return Ok(DomainU::plane());
    }
    let parsed = boxes
        .iter()
        .map(|s| s.parse::<OpenBox<Rational>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DomainU::from_boxes(parsed)?)
}

fn image_options<T: Scalar>(model: &ModelArgs, caps: &Caps) -> Result<ImageOptions<T>, Diagnostic> {
    let mut opts = ImageOptions::<T>::default();
    opts.pair_cap = caps.pair;
    opts.level_cap = caps.level;
    if let Some(eps) = model.epsilon {
        if T::EXACT {
            return Err(Diagnostic::new("invalid-params", "--epsilon applies to the floating backend only"));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Diagnostic::new("invalid-params", format!("--epsilon {eps} must be finite and nonnegative")));
        }
        let eps = Rational::from_f64_exact(eps).ok_or_else(|| Diagnostic::new("invalid-params", "bad --epsilon"))?;
        opts.merge_eps = T::from_rational(&eps);
        opts.img_eps = T::from_rational(&eps);
    }
    Ok(opts)
}

fn model_spec(model: &ModelArgs) -> Result<ModelSpec, Diagnostic> {
    let spec = ModelSpec::parse(&model.f)?;
    if model.backend == Backend::Exact && !spec.supports_exact() {
        return Err(Diagnostic::new(
            "backend-unsupported",
            format!("model `{spec}` needs --backend float"),
        ));
    }
    Ok(spec)
}

fn cell<T: Display>(v: T) -> String {
    v.to_string()
}

pub fn build(args: &BuildArgs, format: Format, caps: &Caps) -> Result<Outcome, Diagnostic> {
    let spec = read_spec(&args.spec, args.seed)?;
    let mut rows = Vec::new();
    let mut last = IntervalSet::empty();
    for k in 0..=args.k {
        let extents = spec.level_extents(k, caps.level)?;
        let count = extents.len();
        last = IntervalSet::normalize(extents);
        let max_gap = last.max_gap(&Interval::unit())?;
        rows.push(json!({
            "k": k,
            "count": count,
            "measure": last.measure(),
            "max_gap": max_gap,
            "basic_length": spec.basic_length(k),
        }));
    }
    match format {
        Format::Csv => Ok(Outcome::ok(render_csv(rows.iter().map(|r| {
            let s = |key: &str| match &r[key] {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            [s("k"), s("count"), s("measure"), s("max_gap")]
        }))?)),
        Format::Json => {
            let bounds = spec.theorem_bounds();
            Ok(Outcome::ok(render_json(
                "build",
                json!({
                    "spec": spec,
                    "theorem_bounds": [bounds.lower, bounds.upper],
                    "ranks": rows,
                    "level": { "k": args.k, "set": last },
                }),
            )?))
        }
    }
}

fn image_with<T: Scalar>(
    args: &ImageArgs,
    format: Format,
    caps: &Caps,
    f: &dyn moran_core::image::FunctionModel<T>,
    u: DomainU<T>,
) -> Result<Outcome, Diagnostic> {
    let (s1, s2) = read_specs(&args.specs)?;
    let opts = image_options::<T>(&args.model, caps)?;
    let seq = image_sequence(f, &s1, &s2, &u, args.k, &opts)?;
    let report = match format {
        Format::Csv => render_csv(
            seq.ranks
                .iter()
                .map(|r| [cell(r.k), cell(r.count), cell(&r.measure), cell(&r.max_gap)]),
        )?,
        Format::Json => render_json(
            "image",
            json!({
                "model": f.name(),
                "backend": if T::EXACT { "exact" } else { "float" },
                "u": u.to_strings(),
                "k_max": args.k,
                "ranks": seq.ranks,
                "truncated": seq.truncated.as_ref().map(|e| json!({"code": e.code(), "message": e.to_string()})),
            }),
        )?,
    };
    Ok(Outcome {
        report,
        failure: seq.truncated.map(|e| (1, Diagnostic::from(e))),
    })
}

pub fn image(args: &ImageArgs, format: Format, caps: &Caps) -> Result<Outcome, Diagnostic> {
    let model = model_spec(&args.model)?;
    let u = parse_u(&args.model.u)?;
    match args.model.backend {
        Backend::Exact => image_with(args, format, caps, model.exact()?.as_ref(), u),
        Backend::Float => image_with(args, format, caps, model.float()?.as_ref(), u.map(Rational::to_f64)),
    }
}

fn certify_with<T: Scalar>(
    args: &CertifyArgs,
    caps: &Caps,
    f: &dyn moran_core::image::FunctionModel<T>,
    u: DomainU<T>,
) -> Result<Outcome, Diagnostic> {
    let (s1, s2) = read_specs(&args.specs)?;
    let opts = CertifyOptions {
        search_rank: args.k.unwrap_or(DEFAULT_SEARCH_RANK),
        image: image_options::<T>(&args.model, caps)?,
        ..CertifyOptions::default()
    };
    let cert = certify(&s1, &s2, f, &u, &opts)?;
    let report = render_json(
        "certify",
        json!({
            "backend": if T::EXACT { "exact" } else { "float" },
            "u": u.to_strings(),
            "certificate": cert,
        }),
    )?;
    let failure = (args.require && !cert.is_satisfied()).then(|| {
        (
            2,
            Diagnostic::new(
                "not-satisfied",
                format!(
                    "certificate status is {}{}",
                    cert.status.as_str(),
                    cert.reason.as_ref().map(|r| format!(": {r}")).unwrap_or_default()
                ),
            ),
        )
    });
    Ok(Outcome { report, failure })
}

pub fn certify_cmd(args: &CertifyArgs, format: Format, caps: &Caps) -> Result<Outcome, Diagnostic> {
    if format == Format::Csv {
        return Err(Diagnostic::new("unsupported-format", "certificates are written as JSON only"));
    }
    let model = model_spec(&args.model)?;
    let u = parse_u(&args.model.u)?;
    match args.model.backend {
        Backend::Exact => certify_with(args, caps, model.exact()?.as_ref(), u),
        Backend::Float => certify_with(args, caps, model.float()?.as_ref(), u.map(Rational::to_f64)),
    }
}

pub fn case(args: &CaseArgs, format: Format, caps: &Caps) -> Result<Outcome, Diagnostic> {
    let name: CaseName = args.name.parse()?;
    let rational = |flag: &str, v: &str| -> Result<Rational, Diagnostic> {
        v.parse::<Rational>()
            .map_err(|e| Diagnostic::new("invalid-params", format!("--{flag} `{v}`: {e}")))
    };
    let params = match (&args.lambda, &args.c) {
        (Some(l), Some(c)) => Some(OverlapSpec::new(rational("lambda", l)?, rational("c", c)?)?),
        (None, None) => name.presets().into_iter().next(),
        _ => return Err(Diagnostic::new("invalid-params", "--lambda and --c go together")),
    };
    if !name.uses_overlap() && args.lambda.is_some() {
        return Err(Diagnostic::new("invalid-params", format!("{name} takes no --lambda or --c")));
    }
    let report = run_case_capped(name, params, args.kmax, caps.pair, caps.level)?;
    Ok(Outcome::ok(match format {
        Format::Csv => render_csv(
            report
                .ranks
                .iter()
                .map(|r| [cell(r.k), cell(r.count), cell(&r.measure), cell(&r.max_gap)]),
        )?,
        Format::Json => render_json("case", &report)?,
    }))
}
