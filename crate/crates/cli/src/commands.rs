//! One function per subcommand. Each parses its inputs, calls the library
//! and lays the result out as a [`Table`].

use anyhow::Result;
use rand::Rng;
use repcount_core::circle::{classify_arc, exponential_sum_part, weyl_cs_check, ArcClass, ArcParams};
use repcount_core::density::{
    chi_inf_closed_quadratic, chi_p_exact_with, chi_p_sampled, main_term as library_main_term, slab_estimate,
    slab_hits, singular_series_truncated_with, DensityEstimate, LevelSchedule, Tally,
};
use repcount_core::enumerate::{count_boxed_part, count_lattice_part, count_representations_part};
use repcount_core::psi::{check_hypotheses, normalize_psi, profile};
use repcount_core::rng::{stream, StreamTag};
use repcount_core::snf::smith_normal_form;
use repcount_core::{expand_system, Partition};
use serde_json::json;

use crate::cache::{cached, Cache};
use crate::experiment::{prediction_record, DensityArgs};
use crate::input::{
    format_matrix, input_error, parse_box, parse_form, parse_ints, parse_matrix, parse_psi, psi_gram, read_text,
    Instance,
};
use crate::output::{Cell, RowBuilder, Table};
use crate::{Common, FormArgs};

impl FormArgs {
    pub fn text(&self) -> Result<String> {
        match (&self.form, &self.form_file) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(p)) => read_text(p),
            (None, None) => Err(input_error("either --form or --form-file is required")),
        }
    }

    pub fn form(&self) -> Result<repcount_core::Form> {
        parse_form(&self.text()?, self.s)
    }

    pub fn instance(&self, psi: &str) -> Result<Instance> {
        Instance::new(self.form()?, parse_psi(psi, self.m, None)?)
    }
}

/// Runs `f` on `threads` partitions of the outermost loop and collects the
/// parts in order. One thread means a single whole-range call.
pub fn split<T: Send>(
    threads: u64,
    f: impl Fn(Partition) -> repcount_core::Result<T> + Sync,
) -> repcount_core::Result<Vec<T>> {
    if threads <= 1 {
        return Ok(vec![f(Partition::WHOLE)?]);
    }
    let n = threads as usize;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n).map(|i| { let f = &f; scope.spawn(move || f(Partition::new(i, n))) }).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn sum_parts(threads: u64, f: impl Fn(Partition) -> repcount_core::Result<u128> + Sync) -> Result<u128> {
    Ok(split(threads, f)?.into_iter().sum())
}

pub fn expand(form: &FormArgs) -> Result<Table> {
    let f = form.form()?;
    let sys = expand_system(&f, form.m)?;
    let mut t = Table::new("expand");
    let mut text = String::new();
    for (j, p) in sys.indices().iter().zip(sys.polys()) {
        t.push(RowBuilder::new().text("j", j.to_string()).text("phi", p.to_string()));
        text.push_str(&format!("{p}\n"));
    }
    Ok(t.with_text(text))
}

pub fn analyze_psi(psi: &str, m: usize, s: Option<usize>, dim_sing: usize) -> Result<Table> {
    let psi = parse_psi(psi, m, None)?;
    let prof = profile(&psi)?;
    let mut row = RowBuilder::new()
        .text("psi", psi.to_spec_string())
        .int("m", psi.m())
        .int("d", psi.d())
        .int("r", psi.r())
        .int("magnitude", &prof.magnitude)
        .cell("eccentricity", Cell::opt_float(prof.eccentricity))
        .bool("pseudo_diagonal", prof.pseudo_diagonal);
    for (j, v) in psi.indices().iter().zip(&prof.normalized) {
        row = row.float(format!("normalized_{j}"), *v);
    }
    if let Some(s) = s {
        let h = check_hypotheses(s, &psi, dim_sing)?;
        row = row.float("hypothesis_lhs", h.lhs).float("hypothesis_rhs", h.rhs).bool("hypothesis_holds", h.satisfied);
    }
    let mut t = Table::new("analyze-psi");
    t.push(row);
    Ok(t)
}

/// A count served through the cache, printed as the bare integer in text.
fn count_table(command: &str, instance: serde_json::Value, run: impl FnOnce() -> Result<u128>) -> Result<Table> {
    let cache = Cache::from_env()?;
    let rec = cached(cache.as_ref(), instance, |r| {
        r.exact_count = Some(run()?.to_string());
        Ok(())
    })?;
    let count = rec.exact_count.clone().unwrap_or_default();
    let mut t = Table::new(command);
    t.push(RowBuilder::new().int("count", &count).text("digest", rec.digest));
    Ok(t.with_text(format!("{count}\n")))
}

pub fn count(form: &FormArgs, psi: &str, limit: u128, common: &Common) -> Result<Table> {
    let inst = form.instance(psi)?;
    let key = json!({
        "kind": "count", "version": crate::cache::VERSION,
        "form": inst.form.to_string(), "s": inst.form.s(), "psi": inst.psi.to_spec_string(), "m": inst.psi.m(),
    });
    count_table("count", key, || {
        sum_parts(common.threads, |part| count_representations_part(&inst.form, &inst.psi, part, limit))
    })
}

pub fn count_boxed(form: &FormArgs, psi: &str, bx: &str, limit: u128, common: &Common) -> Result<Table> {
    let inst = form.instance(psi)?;
    let bx = parse_box(bx, inst.psi.m())?;
    let key = json!({
        "kind": "count-boxed", "version": crate::cache::VERSION,
        "form": inst.form.to_string(), "s": inst.form.s(), "psi": inst.psi.to_spec_string(), "m": inst.psi.m(),
        "box": bx.bounds(),
    });
    count_table("count-boxed", key, || {
        sum_parts(common.threads, |part| count_boxed_part(&inst.sys, &inst.psi, &bx, part, limit))
    })
}

pub fn count_lattice(form: &FormArgs, lattice: &str, p: f64, limit: u128, common: &Common) -> Result<Table> {
    let f = form.form()?;
    let c = parse_matrix(lattice)?;
    let sys = expand_system(&f, c.rows())?;
    let key = json!({
        "kind": "count-lattice", "version": crate::cache::VERSION,
        "form": f.to_string(), "s": f.s(), "lattice": format_matrix(&c), "box": p,
    });
    count_table("count-lattice", key, || sum_parts(common.threads, |part| count_lattice_part(&sys, &c, p, part, limit)))
}

pub fn snf(matrix: &str) -> Result<Table> {
    let c = parse_matrix(matrix)?;
    let r = smith_normal_form(&c)?;
    let inv: Vec<String> = r.invariants().iter().map(|v| v.to_string()).collect();
    let mut t = Table::new("snf");
    t.push(
        RowBuilder::new()
            .text("invariants", inv.join(","))
            .text("u", format_matrix(&r.u))
            .text("d", format_matrix(&r.d))
            .text("v", format_matrix(&r.v)),
    );
    Ok(t)
}

pub enum Points {
    Grid(u64),
    Random { count: u64, seed: u64 },
}

/// Largest number of α points a sweep may visit.
const MAX_POINTS: u128 = 1_000_000;

fn check_points(n: u128) -> repcount_core::Result<()> {
    if n > MAX_POINTS {
        return Err(repcount_core::Error::Budget { estimate: n, limit: MAX_POINTS });
    }
    Ok(())
}

fn alpha_points(points: &Points, r: usize) -> Result<Vec<Vec<f64>>> {
    match *points {
        Points::Grid(n) => {
            if n == 0 {
                return Err(input_error("--grid must be positive"));
            }
            let total = (n as u128).checked_pow(r as u32).unwrap_or(u128::MAX);
            check_points(total)?;
            let mut out = Vec::with_capacity(total as usize);
            let mut idx = vec![0u64; r];
            loop {
                out.push(idx.iter().map(|&k| k as f64 / n as f64).collect());
                let mut c = 0;
                loop {
                    if c == r {
                        return Ok(out);
                    }
                    idx[c] += 1;
                    if idx[c] < n {
                        break;
                    }
                    idx[c] = 0;
                    c += 1;
                }
            }
        }
        Points::Random { count, seed } => {
            check_points(count as u128)?;
            let mut rng = stream(seed, StreamTag::Instances, 0);
            Ok((0..count).map(|_| (0..r).map(|_| rng.gen::<f64>()).collect()).collect())
        }
    }
}

fn alpha_columns(mut row: RowBuilder, alpha: &[f64]) -> RowBuilder {
    for (k, a) in alpha.iter().enumerate() {
        row = row.float(format!("alpha_{}", k + 1), *a);
    }
    row
}

pub fn arcs(
    form: &FormArgs,
    bx: &str,
    thetas: &str,
    c: f64,
    points: Points,
    limit: u128,
    common: &Common,
) -> Result<Table> {
    let f = form.form()?;
    let sys = expand_system(&f, form.m)?;
    let bx = parse_box(bx, form.m)?;
    let thetas = crate::input::parse_floats(thetas)?;
    let p = bx.bounds().iter().cloned().fold(1.0, f64::max);
    let params: Vec<ArcParams> = thetas.iter().map(|&th| ArcParams::new(th, c, p)).collect::<repcount_core::Result<_>>()?;
    let mut t = Table::new("arcs");
    for alpha in alpha_points(&points, sys.r())? {
        let parts = split(common.threads, |part| exponential_sum_part(&sys, &alpha, &bx, part, limit))?;
        let Some(sum) = parts.into_iter().reduce(|a, b| a + b) else { continue };
        for prm in &params {
            let class = classify_arc(&alpha, prm, sys.d())?;
            let q = match &class {
                ArcClass::Major(pt) => pt.homogenized.as_ref().map_or(Cell::Null, |h| Cell::int(h.q)),
                ArcClass::Minor => Cell::Null,
            };
            let row = alpha_columns(RowBuilder::new().float("theta", prm.theta), &alpha)
                .complex("t", sum.re, sum.im)
                .float("abs_t", sum.norm())
                .text("class", if class.is_major() { "major" } else { "minor" })
                .cell("q", q);
            t.push(row);
        }
    }
    Ok(t)
}

fn estimate_row(row: RowBuilder, e: &DensityEstimate) -> RowBuilder {
    row.float("value", e.value).float("stderr", e.stderr).text("method", e.method.as_str())
}

pub fn chi_p(form: &FormArgs, psi: &str, primes: &str, level: Option<u32>, sampled: Option<(u64, u64)>, limit: u128) -> Result<Table> {
    let inst = form.instance(psi)?;
    let schedule = LevelSchedule::default();
    let mut t = Table::new("chi-p");
    for p in parse_ints::<u64>(primes)? {
        let l = level.unwrap_or_else(|| schedule.level(p));
        let e = match sampled {
            Some((n, seed)) => chi_p_sampled(&inst.sys, &inst.psi, p, l, n, seed)?,
            None => chi_p_exact_with(&inst.sys, &inst.psi, p, l, limit)?,
        };
        t.push(estimate_row(RowBuilder::new().int("p", p).int("level", l), &e));
    }
    Ok(t)
}

pub fn chi_inf(form: &FormArgs, psi: &str, eps: f64, samples: u64, seed: u64, shards: u64, common: &Common) -> Result<Table> {
    let inst = form.instance(psi)?;
    let norm = normalize_psi(&inst.psi)?;
    if samples < repcount_core::density::MIN_SLAB_SAMPLES {
        return Err(input_error("chi-inf needs at least 100000 samples"));
    }
    // Shard k draws `samples/shards` points from stream k; threads only run
    // shards concurrently, so the result depends on the shard count alone.
    let per = samples / shards;
    let all: Vec<u64> = (0..shards).collect();
    let mut tally = Tally::default();
    for chunk in all.chunks(common.threads as usize) {
        let parts: Vec<repcount_core::Result<Tally>> = std::thread::scope(|scope| {
            let hs: Vec<_> = chunk
                .iter()
                .map(|&k| {
                    let (sys, norm) = (&inst.sys, &norm);
                    scope.spawn(move || slab_hits(sys, norm, eps, per, seed, k))
                })
                .collect();
            hs.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for p in parts {
            tally = tally.merge(p?);
        }
    }
    let e = slab_estimate(&inst.sys, eps, tally);
    let closed = match (inst.form.gram()?, psi_gram(&inst.psi)) {
        (Some(a), Some(b)) if a.is_positive_definite() && b.is_positive_definite() && a.rows() > b.rows() => {
            chi_inf_closed_quadratic(&a, &b).ok()
        }
        _ => None,
    };
    let mut t = Table::new("chi-inf");
    let row = RowBuilder::new().float("eps", eps).int("samples", tally.samples).int("hits", tally.hits);
    t.push(estimate_row(row, &e).cell("closed_form", Cell::opt_float(closed)));
    Ok(t)
}

pub fn series(form: &FormArgs, psi: &str, q_max: u64, limit: u128) -> Result<Table> {
    let inst = form.instance(psi)?;
    let e = singular_series_truncated_with(&inst.sys, &inst.psi, q_max, limit)?;
    let mut t = Table::new("series");
    t.push(estimate_row(RowBuilder::new().int("q_max", q_max), &e));
    Ok(t)
}

pub fn main_term(form: &FormArgs, psi: &str, density: &DensityArgs) -> Result<Table> {
    let inst = form.instance(psi)?;
    let cfg = density.config()?;
    let rep = library_main_term(&inst.form, &inst.psi, &cfg)?;
    let rec = prediction_record(&rep);
    let mut row = RowBuilder::new()
        .float("magnitude_factor", rec.magnitude_factor)
        .float("boxed_factor", rep.boxed_factor)
        .float("chi_inf", rec.chi_inf)
        .float("chi_inf_stderr", rec.chi_inf_stderr)
        .cell("chi_inf_half", Cell::opt_float(rec.chi_inf_half))
        .cell("chi_inf_half_stderr", Cell::opt_float(rec.chi_inf_half_stderr))
        .bool("eps_consistent", rec.eps_consistent)
        .float("euler", rec.euler)
        .float("euler_stderr", rec.euler_stderr)
        .bool("local_obstruction", rec.local_obstruction);
    for f in &rec.factors {
        row = row.float(format!("chi_{}", f.p), f.value);
    }
    let mut t = Table::new("main-term");
    t.push(row.float("prediction", rec.prediction).float("prediction_stderr", rec.stderr));
    Ok(t)
}

pub enum Alphas {
    Given(Vec<f64>),
    Random { count: u64, seed: u64 },
}

pub fn weyl_check(form: &FormArgs, bx: &str, alphas: Alphas, j1: usize, _common: &Common) -> Result<Table> {
    let f = form.form()?;
    let sys = expand_system(&f, form.m)?;
    let bx = parse_box(bx, form.m)?;
    if j1 == 0 || j1 > form.m {
        return Err(input_error(format!("--j1 must lie in 1..={}", form.m)));
    }
    let points = match alphas {
        Alphas::Given(a) => vec![a],
        Alphas::Random { count, seed } => alpha_points(&Points::Random { count, seed }, sys.r())?,
    };
    let mut t = Table::new("weyl-check");
    for alpha in points {
        let w = weyl_cs_check(&sys, &alpha, &bx, j1 - 1)?;
        let row = alpha_columns(RowBuilder::new(), &alpha)
            .float("lhs_squared", w.lhs_squared)
            .float("rhs_bound", w.rhs_bound)
            .bool("holds", w.holds);
        t.push(row);
    }
    Ok(t)
}
