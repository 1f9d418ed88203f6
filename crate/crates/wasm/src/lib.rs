//! Browser bindings for the demo page in `www/`.
//!
//! Each export is a thin wrapper over a plain function so the logic can be
//! tested natively.

use std::fmt::Write as _;

use binlab::construction::{generate_construction, lb_formula, verify_construction, GeneratorParams};
use binlab::delays::{check_bound, compute_rho, offline_optimal, simulate, DEFAULT_OFFLINE_LIMIT, DEFAULT_PI_TERMS};
use binlab::format::{parse_instance, Instance};
use binlab::size::{decimal, fmt_q, to_f64, Size};
use binlab::weights::{builtin_cap, make_builtin};
use wasm_bindgen::prelude::*;

/// Largest N the page will verify; bigger constructions take too long in a tab.
pub const MAX_DEMO_N: u64 = 60_000;

/// Samples `name` at `samples + 1` evenly spaced sizes in [0, 1] and
/// returns `[x0, w0, x1, w1, ...]` followed by the bin cap.
pub fn weight_curve_points(name: &str, samples: u32) -> Result<Vec<f64>, String> {
    if samples == 0 || samples > 10_000 {
        return Err("samples must be in 1..=10000".into());
    }
    let f = make_builtin(name).map_err(|e| e.to_string())?;
    let cap = builtin_cap(&f).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * samples as usize + 3);
    for i in 0..=samples {
        let x = Size::ratio(i64::from(i), i64::from(samples));
        out.push(x.to_f64());
        out.push(to_f64(&f.eval(&x)));
    }
    out.push(to_f64(&cap));
    Ok(out)
}

/// Generates and verifies a construction, returning a plain-text summary.
pub fn construction_summary(k: u32, n: u64, m: u32, families: &str) -> Result<String, String> {
    if n > MAX_DEMO_N {
        return Err(format!("N above {MAX_DEMO_N} is left to the command-line tool"));
    }
    let fams = families
        .split(',')
        .map(|s| s.trim().parse::<u32>().map_err(|_| format!("bad family `{s}`")))
        .collect::<Result<Vec<_>, _>>()?;
    let params = GeneratorParams::new(k, n, m, &fams);
    let c = generate_construction(&params).map_err(|e| e.to_string())?;
    let report = verify_construction(&c);
    let mut s = String::new();
    let _ = writeln!(s, "clusters: {}", c.instance.clusters.len());
    let _ = writeln!(s, "global optimum: {}", report.global_opt);
    let _ = writeln!(s, "sum of cluster optima: {}", report.sum_cluster_opt);
    let _ = writeln!(s, "ratio: {} = {}", fmt_q(&report.ratio), decimal(&report.ratio, 10));
    if k >= 4 {
        if let Ok(lb) = lb_formula(k) {
            let _ = writeln!(s, "limit for this k: {}", decimal(&lb, 10));
        }
    }
    let failed = report.failures();
    if failed.is_empty() {
        let _ = writeln!(s, "all {} checks pass", report.checks.len());
    } else {
        for f in failed {
            let _ = writeln!(s, "FAIL {}: {}", f.name, f.detail);
        }
    }
    Ok(s)
}

/// Runs the phase algorithm on a timed instance and compares it with the
/// offline optimum.
pub fn delay_summary(text: &str, rho: Option<f64>) -> Result<String, String> {
    let items = match parse_instance(text).map_err(|e| e.to_string())? {
        Instance::Timed(items) => items,
        _ => return Err("expected `instance timed`".into()),
    };
    let rho = match rho {
        Some(r) => r,
        None => compute_rho(DEFAULT_PI_TERMS).map_err(|e| e.to_string())?.0,
    };
    let trace = simulate(&items, rho, None).map_err(|e| e.to_string())?;
    let mut s = String::new();
    let _ = writeln!(s, "rho = {rho:.10}");
    for (i, p) in trace.phases.iter().enumerate() {
        let _ = writeln!(
            s,
            "phase {i}: items {:?} at t = {:.6}, bins {}",
            p.items, p.trigger_time, p.bins
        );
    }
    let _ = writeln!(s, "online cost: {:.6}", trace.total_cost);
    let off = offline_optimal(&items, DEFAULT_OFFLINE_LIMIT).map_err(|e| e.to_string())?;
    let _ = writeln!(s, "offline cost: {:.6} ({} bins)", off.cost, off.bin_count);
    let check = check_bound(&trace, &off, DEFAULT_PI_TERMS);
    let _ = writeln!(
        s,
        "bound {:.6} {}",
        check.ratio_bound,
        if check.holds() { "holds" } else { "VIOLATED" }
    );
    Ok(s)
}

#[wasm_bindgen]
pub fn weight_curve(name: &str, samples: u32) -> Result<Vec<f64>, JsError> {
    weight_curve_points(name, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn construction(k: u32, n: u64, m: u32, families: &str) -> Result<String, JsError> {
    construction_summary(k, n, m, families).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn delays(text: &str, rho: Option<f64>) -> Result<String, JsError> {
    delay_summary(text, rho).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_ends_with_cap() {
        let pts = weight_curve_points("wk3", 60).unwrap();
        assert_eq!(pts.len(), 2 * 61 + 1);
        assert!((pts.last().unwrap() - 581.0 / 300.0).abs() < 1e-12);
        assert_eq!(pts[0], 0.0);
        assert!(weight_curve_points("nope", 10).is_err());
    }

    #[test]
    fn small_construction() {
        let s = construction_summary(3, 90, 1, "2,3").unwrap();
        assert!(s.contains("ratio: 29/18"), "{s}");
        assert!(s.contains("checks pass"));
        assert!(construction_summary(3, 90, 1, "2,x").is_err());
    }

    #[test]
    fn delay_run() {
        let s = delay_summary("instance timed\nitem 1/2 arrive=0 delay=linear:1\n", None).unwrap();
        assert!(s.contains("bound") && s.contains("holds"), "{s}");
        assert!(delay_summary("instance plain\nitem 1/2\n", None).is_err());
    }
}
