//! One function per subcommand. Each merges config overrides, validates,
//! computes, then writes exactly one output document.

use std::path::{Path, PathBuf};

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use ptorus_core::geom::{cyclic_geom_limit_check, power_limit_check, GeomCheckOptions, GeomError, LimitTarget};
use ptorus_core::limit::{classify_sequence, predict_limit, reindex_invariance_check, ConvergenceVerdict};
use ptorus_core::maskit::{
    cusp_by_continuation, cusp_solve, maskit_rep, membership, t2, trace_boundary, CuspPoint, Membership,
    MAX_DENOMINATOR,
};
use ptorus_core::render::{limit_set_points, to_ppm, BoundingBox, RenderError, RenderTarget};
use ptorus_core::slices::{bers_geom_limit_cloud, bump_set, Branch, RegionCloud};
use ptorus_core::{Complex, FareySlope, SyntheticFamily, TwistSequenceSpec};

use crate::config::{apply_overrides, ComplexArg};
use crate::output::{open, write_csv, write_json, Header};
use crate::{numerical, usage, Common, Failure};

fn bail_usage(msg: String) -> Failure {
    usage(anyhow::anyhow!(msg))
}

/// Parameters that enter the config hash: output paths are dropped.
fn hashed(mut params: Value, outputs: &[&str]) -> Value {
    if let Value::Object(m) = &mut params {
        for k in outputs {
            m.remove(*k);
        }
    }
    params
}

fn sha_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct TraceArgs {
    /// Largest denominator q.
    #[arg(long = "qmax")]
    pub q_max: i64,
    /// Optional PPM scatter of the cusps.
    #[arg(long)]
    pub ppm: Option<PathBuf>,
    #[arg(long, default_value_t = 800)]
    pub width: usize,
    #[arg(long, default_value_t = 200)]
    pub height: usize,
}

#[derive(Serialize)]
struct CuspRow {
    p: i64,
    q: i64,
    re_mu: f64,
    im_mu: f64,
    trace_sign: i8,
    residual: f64,
}

impl From<&CuspPoint> for CuspRow {
    fn from(c: &CuspPoint) -> Self {
        CuspRow {
            p: c.slope.p(),
            q: c.slope.q(),
            re_mu: c.mu.re,
            im_mu: c.mu.im,
            trace_sign: c.trace_sign.value() as i8,
            residual: c.residual,
        }
    }
}

pub fn maskit_trace(args: TraceArgs, common: &Common) -> Result<(), Failure> {
    let (args, params) = apply_overrides(args, common.config.as_deref())?;
    if !(1..=MAX_DENOMINATOR).contains(&args.q_max) {
        return Err(bail_usage(format!("--qmax must lie in 1..={MAX_DENOMINATOR} (got {})", args.q_max)));
    }
    if args.width == 0 || args.height == 0 {
        return Err(bail_usage("image size must be positive".into()));
    }
    let trace = trace_boundary(args.q_max).map_err(numerical)?;
    let header = Header::new("maskit-trace", &hashed(params, &["ppm"]), common.seed);
    let rows: Vec<CuspRow> = trace.cusps.iter().map(CuspRow::from).collect();
    let notes = [("min_im", trace.min_im.to_string()), ("cusps", trace.cusps.len().to_string())];
    write_csv(&mut *open(common.out.as_deref())?, &header, &notes, &rows).map_err(usage)?;
    if let Some(path) = &args.ppm {
        let bbox = BoundingBox { re_min: 0.0, re_max: 2.0, im_min: trace.min_im - 0.05, im_max: 2.05 };
        let pts: Vec<Complex> = trace.cusps.iter().map(|c| c.mu).collect();
        std::fs::write(path, to_ppm(&pts, &bbox, args.width, args.height))?;
    }
    eprintln!("min_im={}", trace.min_im);
    Ok(())
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct CuspArgs {
    /// Slope `P/Q`.
    pub slope: String,
    /// Plain Newton from this guess instead of ray continuation.
    #[arg(long, allow_hyphen_values = true)]
    pub guess: Option<ComplexArg>,
}

pub fn maskit_cusp(args: CuspArgs, common: &Common) -> Result<(), Failure> {
    let (args, params) = apply_overrides(args, common.config.as_deref())?;
    let slope: FareySlope = args.slope.parse().map_err(usage)?;
    if slope.is_infinity() {
        return Err(bail_usage("slope 1/0 has no cusp".into()));
    }
    let (cusp, method) = match args.guess {
        Some(g) => (cusp_solve(slope, g.0), "newton"),
        None => (cusp_by_continuation(slope), "continuation"),
    };
    let cusp = cusp.map_err(numerical)?;
    let header = Header::new("maskit-cusp", &params, common.seed);
    let body = json!({ "method": method, "cusp": CuspRow::from(&cusp) });
    write_json(&mut *open(common.out.as_deref())?, &header, body).map_err(usage)
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct ClassifyArgs {
    /// TOML file with one `[[sequence]]` table per spec.
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    sequence: Vec<TwistSequenceSpec>,
}

#[derive(Serialize)]
struct VerdictRecord {
    name: Option<String>,
    verdict: &'static str,
    p: Option<i64>,
    q: Option<i64>,
    xi_re: Option<f64>,
    xi_im: Option<f64>,
    reason: Option<String>,
}

fn record(spec: &TwistSequenceSpec) -> VerdictRecord {
    let v = classify_sequence(spec);
    let mut r = VerdictRecord {
        name: spec.name.clone(),
        verdict: v.tag(),
        p: None,
        q: None,
        xi_re: None,
        xi_im: None,
        reason: None,
    };
    match v {
        ConvergenceVerdict::ConvergesExotic { p, q, xi } => {
            r.p = Some(p);
            r.q = Some(q);
            r.xi_re = xi.map(|z| z.re);
            r.xi_im = xi.map(|z| z.im);
        }
        ConvergenceVerdict::Diverges { reason } => r.reason = Some(format!("{reason:?}")),
        ConvergenceVerdict::Unknown { reason } => r.reason = Some(reason),
        ConvergenceVerdict::ConvergesStandard | ConvergenceVerdict::SplitsBySubsequence => {}
    }
    r
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| bail_usage(format!("{}: {e}", path.display())))
}

pub fn seq_classify(args: ClassifyArgs, common: &Common) -> Result<(), Failure> {
    let (args, _) = apply_overrides(args, common.config.as_deref())?;
    let text = read(&args.spec)?;
    let file: SpecFile =
        toml::from_str(&text).map_err(|e| bail_usage(format!("{}: invalid spec: {e}", args.spec.display())))?;
    let records: Vec<VerdictRecord> = file.sequence.par_iter().map(record).collect();
    let header = Header::new("seq-classify", &json!({ "spec_sha256": sha_hex(text.as_bytes()) }), common.seed);
    write_json(&mut *open(common.out.as_deref())?, &header, json!({ "results": records })).map_err(usage)
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct LimitArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub mu: ComplexArg,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: ComplexArg,
    #[arg(short = 'p', allow_negative_numbers = true)]
    pub p: i64,
    #[arg(short = 'q', allow_negative_numbers = true, default_value_t = 0)]
    pub q: i64,
}

pub fn seq_limit(args: LimitArgs, common: &Common) -> Result<(), Failure> {
    let (args, params) = apply_overrides(args, common.config.as_deref())?;
    let xi = predict_limit(args.mu.0, args.nu.0, args.p, args.q);
    let exotic = args.p != 0 && args.p != -1;
    let stable =
        (-2..=2).all(|u| (-2..=2).all(|v| reindex_invariance_check(args.mu.0, args.nu.0, args.p, args.q, u, v)));
    let header = Header::new("seq-limit", &params, common.seed);
    let body = json!({ "xi_re": xi.re, "xi_im": xi.im, "exotic": exotic, "reindex_invariant": stable });
    write_json(&mut *open(common.out.as_deref())?, &header, body).map_err(usage)
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct GeomArgs {
    /// Target translation `w = μ − ν̄`.
    #[arg(long, allow_hyphen_values = true)]
    pub w: ComplexArg,
    /// Powers `m_n`.
    #[arg(long = "m-list", value_delimiter = ',', required = true)]
    pub m_list: Vec<i64>,
    /// Lattice indices `|a|, |b| ≤ K` probed by the first condition.
    #[arg(long, default_value_t = 2)]
    pub index_bound: i64,
    /// Exponent window around `a·m + b`.
    #[arg(long, default_value_t = 2)]
    pub window: i64,
    /// Compare against `⟨T₂⟩` alone.
    #[arg(long)]
    pub rank_one: bool,
}

#[derive(Serialize)]
struct GeomCsvRow {
    n: u64,
    m_n: i64,
    power_residual: f64,
    closed_form_gap: f64,
    sup_residual: f64,
    spurious_margin: f64,
    widened: bool,
}

fn geom_failure(e: GeomError) -> Failure {
    match e {
        GeomError::DegenerateTarget | GeomError::NonPositivePower(_) => usage(e),
        other => numerical(other),
    }
}

pub fn geom_check(args: GeomArgs, common: &Common) -> Result<(), Failure> {
    let (args, params) = apply_overrides(args, common.config.as_deref())?;
    if args.index_bound < 0 || args.window < 0 {
        return Err(bail_usage("--index-bound and --window must be nonnegative".into()));
    }
    let fam = SyntheticFamily::from_powers(args.w.0, &args.m_list).map_err(geom_failure)?;
    let ns: Vec<u64> = (0..args.m_list.len() as u64).collect();
    let powers = power_limit_check(&fam, &ns).map_err(geom_failure)?;
    let opts = GeomCheckOptions {
        window: args.window,
        target: if args.rank_one { LimitTarget::RankOne } else { LimitTarget::RankTwo },
        ..GeomCheckOptions::covering(args.w.0, args.index_bound)
    };
    let report = cyclic_geom_limit_check(&fam, &ns, &opts).map_err(geom_failure)?;
    let rows: Vec<GeomCsvRow> = powers
        .iter()
        .zip(&report.rows)
        .map(|(p, g)| GeomCsvRow {
            n: p.n,
            m_n: p.m,
            power_residual: p.residual,
            closed_form_gap: p.closed_form_gap,
            sup_residual: g.sup_residual,
            spurious_margin: g.spurious_margin,
            widened: g.widened,
        })
        .collect();
    let header = Header::new("geom-check", &params, common.seed);
    let notes = [("radius", opts.radius.to_string()), ("trend", format!("{:?}", report.trend))];
    write_csv(&mut *open(common.out.as_deref())?, &header, &notes, &rows).map_err(usage)
}

/// Source of `M` samples shared by the cloud commands.
#[derive(Args, Debug, Serialize, Deserialize)]
pub struct SampleArgs {
    /// CSV of samples with columns `re,im`; `#` lines are skipped.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Number of random interior samples when no file is given.
    #[arg(long, default_value_t = 500)]
    pub count: usize,
    /// Imaginary range of random samples.
    #[arg(long, default_value_t = 1.6)]
    pub im_lo: f64,
    #[arg(long, default_value_t = 4.0)]
    pub im_hi: f64,
    /// Discreteness search depth used by membership.
    #[arg(long, default_value_t = 16)]
    pub depth: usize,
}

#[derive(Deserialize)]
struct SampleRow {
    re: f64,
    im: f64,
}

fn read_samples(path: &Path) -> Result<Vec<Complex>, Failure> {
    let text = read(path)?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    rdr.deserialize::<SampleRow>()
        .map(|r| r.map(|s| Complex::new(s.re, s.im)))
        .collect::<Result<_, _>>()
        .map_err(|e| bail_usage(format!("{}: {e}", path.display())))
}

/// Random samples classified `Inside`, drawn in a fixed order from the seed.
fn random_interior(s: &SampleArgs, seed: u64) -> Result<Vec<Complex>, Failure> {
    if !(s.im_lo < s.im_hi) || s.count == 0 {
        return Err(bail_usage("need --count ≥ 1 and --im-lo < --im-hi".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(s.count);
    let batch = s.count.max(64);
    for _ in 0..200 {
        let cand: Vec<Complex> =
            (0..batch).map(|_| Complex::new(rng.gen_range(0.0..2.0), rng.gen_range(s.im_lo..s.im_hi))).collect();
        let keep: Vec<bool> = cand.par_iter().map(|&z| membership(z, s.depth) == Membership::Inside).collect();
        out.extend(cand.into_iter().zip(keep).filter_map(|(z, k)| k.then_some(z)));
        if out.len() >= s.count {
            out.truncate(s.count);
            return Ok(out);
        }
    }
    Err(numerical(anyhow::anyhow!("could not draw {} interior samples", s.count)))
}

fn load_samples(s: &SampleArgs, seed: u64) -> Result<(RegionCloud, Value), Failure> {
    match &s.samples {
        Some(path) => {
            let pts = read_samples(path)?;
            let text = read(path)?;
            let cloud = RegionCloud::from_samples(&pts, s.depth).map_err(usage)?;
            Ok((cloud, json!({ "samples_sha256": sha_hex(text.as_bytes()), "depth": s.depth })))
        }
        None => {
            let pts = random_interior(s, seed)?;
            let desc = json!({ "count": s.count, "im_lo": s.im_lo, "im_hi": s.im_hi, "depth": s.depth });
            Ok((RegionCloud::trusted_samples(&pts), desc))
        }
    }
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct BumpArgs {
    #[arg(short = 'p')]
    pub p: i64,
    #[command(flatten)]
    #[serde(flatten)]
    pub source: SampleArgs,
}

#[derive(Serialize)]
struct CloudRow {
    re: f64,
    im: f64,
    tag: String,
    branch: Option<&'static str>,
    mu_index: Option<usize>,
    nu_index: Option<usize>,
}

fn cloud_rows(cloud: &RegionCloud) -> Vec<CloudRow> {
    let tag = cloud.tag.to_string();
    cloud
        .points
        .iter()
        .map(|pt| CloudRow {
            re: pt.z.re,
            im: pt.z.im,
            tag: tag.clone(),
            branch: pt.branch.map(|b| match b {
                Branch::Slice => "slice",
                Branch::Shifted => "shifted",
            }),
            mu_index: pt.mu_index,
            nu_index: pt.nu_index,
        })
        .collect()
}

pub fn bump_cloud(args: BumpArgs, common: &Common) -> Result<(), Failure> {
    let (args, params) = apply_overrides(args, common.config.as_deref())?;
    if args.p < 0 {
        return Err(bail_usage(format!("-p must be nonnegative (got {})", args.p)));
    }
    let (samples, desc) = load_samples(&args.source, common.seed)?;
    let cloud = bump_set(args.p, &samples).map_err(usage)?;
    let params = json!({ "p": args.p, "samples": desc, "raw": hashed(params, &["samples"]) });
    let header = Header::new("bump-cloud", &params, common.seed);
    let bound = (2 * args.p + 1) as f64 * samples.min_im();
    let notes = [
        ("sample_min_im", samples.min_im().to_string()),
        ("cloud_min_im", cloud.min_im().to_string()),
        ("im_lower_bound", bound.to_string()),
        ("scope", "finite sample; only the Im lower bound is checked".to_string()),
    ];
    write_csv(&mut *open(common.out.as_deref())?, &header, &notes, &cloud_rows(&cloud)).map_err(usage)
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct BersArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub nu: ComplexArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub source: SampleArgs,
}

pub fn bers_cloud(args: BersArgs, common: &Common) -> Result<(), Failure> {
    let (args, params) = apply_overrides(args, common.config.as_deref())?;
    let (samples, desc) = load_samples(&args.source, common.seed)?;
    let cloud = bers_geom_limit_cloud(args.nu.0, &samples).map_err(usage)?;
    let params = json!({ "nu": args.nu, "samples": desc, "raw": hashed(params, &["samples"]) });
    let header = Header::new("bers-cloud", &params, common.seed);
    let notes = [("branches", "slice,shifted".to_string())];
    write_csv(&mut *open(common.out.as_deref())?, &header, &notes, &cloud_rows(&cloud)).map_err(usage)
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct RenderArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub mu: ComplexArg,
    /// Maximum word length.
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    /// `RE_MIN,RE_MAX,IM_MIN,IM_MAX`.
    #[arg(long = "bbox", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-2.0, 4.0, -2.0, 2.0])]
    pub bbox: Vec<f64>,
    #[arg(long, default_value_t = ptorus_core::tolerance::RENDER_CONTRACTION)]
    pub contraction: f64,
    /// Render `⟨T₂⟩` alone.
    #[arg(long)]
    pub alpha_only: bool,
    #[arg(long)]
    pub ppm: Option<PathBuf>,
    #[arg(long, default_value_t = 600)]
    pub width: usize,
    #[arg(long, default_value_t = 400)]
    pub height: usize,
}

#[derive(Serialize)]
struct PointRow {
    re: f64,
    im: f64,
}

pub fn render_limitset(args: RenderArgs, common: &Common) -> Result<(), Failure> {
    let (args, params) = apply_overrides(args, common.config.as_deref())?;
    let [re_min, re_max, im_min, im_max] = args.bbox[..] else {
        return Err(bail_usage("--bbox takes four numbers".into()));
    };
    if !(args.contraction > 0.0) || args.width == 0 || args.height == 0 {
        return Err(bail_usage("contraction and image size must be positive".into()));
    }
    let bbox = BoundingBox { re_min, re_max, im_min, im_max };
    let r = maskit_rep(args.mu.0);
    let generators = if args.alpha_only { vec![t2()] } else { vec![r.a, r.b] };
    let target = RenderTarget {
        generators,
        max_depth: args.depth,
        bbox,
        point_budget: args.budget,
        contraction: args.contraction,
    };
    let pts = limit_set_points(&target).map_err(|e| match e {
        RenderError::EmptyOutput => numerical(e),
        other => usage(other),
    })?;
    let header = Header::new("render-limitset", &hashed(params, &["ppm"]), common.seed);
    let notes = [
        ("degenerate", pts.degenerate.to_string()),
        ("points", pts.points.len().to_string()),
        ("words_visited", pts.words_visited.to_string()),
    ];
    let rows: Vec<PointRow> = pts.points.iter().map(|z| PointRow { re: z.re, im: z.im }).collect();
    write_csv(&mut *open(common.out.as_deref())?, &header, &notes, &rows).map_err(usage)?;
    if let Some(path) = &args.ppm {
        std::fs::write(path, to_ppm(&pts.points, &bbox, args.width, args.height))?;
    }
    if pts.degenerate {
        eprintln!("degenerate group: the limit set is the parabolic fixed point only");
    }
    Ok(())
}
