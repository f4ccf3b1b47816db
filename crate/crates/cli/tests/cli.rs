use std::path::PathBuf;
use std::process::Command;

use shnol_cli::config::{builtin_text, parse_config, parse_config_str, ConfigError};
use shnol_cli::report::{csv_text, fmt_f64, fmt_log, parse_csv, run, svg_text, Decimal, RunOptions, CSV_HEADER};
use shnol_core::builtin;
use shnol_core::profile::Profile;
use shnol_core::shnol::Scenario;

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shnol-cli-test-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn shnol() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shnol"))
}

#[test]
fn bessel_fixture_parses() {
    let cfg = parse_config(&scenarios_dir().join("bessel-4d.conf")).unwrap();
    assert_eq!(cfg.weight, Profile::AbsPow(3.0));
    assert!(cfg.echo.iter().any(|(k, v)| k == "operator.weight" && v == "abs_x^3"));
    assert_eq!(cfg.name, "bessel-4d");
}

#[test]
fn n_max_below_three_is_a_range_violation() {
    let text = builtin_text("flat-shnol").unwrap().replace("schedule.n_max = 300", "schedule.n_max = 1");
    let errs = parse_config_str(&text).unwrap_err();
    assert_eq!(errs.len(), 1);
    assert_eq!(errs[0].key, "schedule.n_max");
    assert!(errs[0].message.contains("range violation"), "{}", errs[0]);
}

#[test]
fn unknown_weight_tag_lists_the_valid_ones() {
    let text = builtin_text("bessel-4d").unwrap().replace("abs_x^3", "foo");
    let errs = parse_config_str(&text).unwrap_err();
    let e = errs.iter().find(|e| e.key == "operator.weight").unwrap();
    assert!(e.message.contains("foo"));
    for tag in ["abs_x^k", "exp(c)", "sinh^k"] {
        assert!(e.message.contains(tag), "{}", e.message);
    }
}

#[test]
fn all_errors_are_reported_together() {
    let text = "name = broken\nlambda = 1\noperator.interval = 0, 10\noperator.weight = foo\n\
                schedule.policy = sideways\nschedule.n_max = 2\nbogus.key = 3\nreference = one\n";
    let errs = parse_config_str(text).unwrap_err();
    let keys: Vec<&str> = errs.iter().map(|e| e.key.as_str()).collect();
    for k in ["operator.weight", "schedule.policy", "schedule.n_max", "bogus.key", "eigenfunction"] {
        assert!(keys.contains(&k), "{k} missing from {keys:?}");
    }
    let weight = errs.iter().find(|e| e.key == "operator.weight").unwrap();
    assert_eq!((weight.line, weight.column), (4, 19));
    // A key that never appears has no position.
    assert_eq!(errs.iter().find(|e| e.key == "eigenfunction").unwrap().line, 0);
}

fn assert_same_scenario(a: &Scenario, b: &Scenario) {
    let close = |x: f64, y: f64| x == y || (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0);
    assert_eq!(a.name, b.name);
    assert!(close(a.lambda, b.lambda));
    let (sa, sb) = (&a.spec, &b.spec);
    assert_eq!(sa.grid().len(), sb.grid().len(), "{}", a.name);
    for (x, y) in sa.grid().nodes().iter().zip(sb.grid().nodes()) {
        assert!(close(*x, *y));
    }
    for (f, g) in [(sa.ln_m(), sb.ln_m()), (sa.ln_a(), sb.ln_a()), (sa.v(), sb.v())] {
        assert!(f.iter().zip(g).all(|(x, y)| close(*x, *y)), "{}", a.name);
    }
    assert_eq!(sa.left(), sb.left());
    assert_eq!(sa.mirrored(), sb.mirrored());
    assert_eq!(a.eigenfunction, b.eigenfunction);
    assert!(close(a.evans_scale, b.evans_scale) && close(a.evans_offset, b.evans_offset));
    assert_eq!(a.robin_from_reference, b.robin_from_reference);
    assert_eq!(a.base, b.base);
    assert_eq!(a.policy, b.policy);
    assert_eq!(a.n_max, b.n_max);
    let (oa, ob) = (a.oracle.as_ref().unwrap(), b.oracle.as_ref().unwrap());
    assert_eq!(oa.grid().len(), ob.grid().len());
    assert!(oa.ln_m().iter().zip(ob.ln_m()).all(|(x, y)| close(*x, *y)));
    assert_eq!(oa.left(), ob.left());
}

#[test]
fn shipped_configs_match_programmatic_builtins() {
    for name in builtin::NAMES {
        let cfg = parse_config_str(builtin_text(name).unwrap()).unwrap();
        let from_file = cfg.to_scenario(cfg.lambdas[0]).unwrap();
        let built = builtin::by_name(name).unwrap().unwrap();
        assert_same_scenario(&from_file, &built);
    }
}

#[test]
fn missing_file_exits_with_two() {
    let out = shnol().args(["run", "/nonexistent/scenario.conf"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = parse_config(&PathBuf::from("/nonexistent/scenario.conf")).unwrap_err();
    assert!(matches!(err, ConfigError::Io { .. }));
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = scratch("invalid");
    let path = dir.join("bad.conf");
    std::fs::write(&path, builtin_text("flat-shnol").unwrap().replace("natural", "sideways")).unwrap();
    let out = shnol().args(["check", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sideways"));
}

#[test]
fn shrunken_range_exits_with_one() {
    let dir = scratch("shrunken");
    let path = dir.join("small.conf");
    // No double-exponential pair fits below x = 10.
    std::fs::write(&path, builtin_text("r2-parabolic").unwrap().replace("0, 4.5e5", "0, 10")).unwrap();
    let out = shnol().args(["run", path.to_str().unwrap(), "--out", dir.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("range exhausted"));
}

#[test]
fn examples_lists_the_builtins() {
    let out = shnol().arg("examples").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in builtin::NAMES {
        assert!(text.contains(name));
    }
}

#[test]
fn r2_run_is_deterministic_and_shows_the_dichotomy() {
    let dir = scratch("r2");
    let (a, b) = (dir.join("a"), dir.join("b"));
    for d in [&a, &b] {
        let out = shnol().args(["run", "r2-parabolic", "--out", d.to_str().unwrap()]).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let first = std::fs::read(a.join("r2-parabolic.csv")).unwrap();
    assert_eq!(first, std::fs::read(b.join("r2-parabolic.csv")).unwrap());
    assert_eq!(std::fs::read(a.join("r2-parabolic.svg")).unwrap(), std::fs::read(b.join("r2-parabolic.svg")).unwrap());

    let (header, rows) = parse_csv(&String::from_utf8(first).unwrap()).unwrap();
    assert_eq!(header, CSV_HEADER);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let row3 = rows.iter().find(|r| r[0].to_f64() == 3.0).unwrap();
    // The bound 1 − (e^{e^{2n}}/e^{e^{2n+1}})² is already 0.81 at n = 1.
    assert!(row3[col("cond_ii")].ln() >= 0.9f64.ln());
    assert!(rows.iter().all(|r| r[col("cond_ii")].ln() >= 0.9f64.ln()));
}

#[test]
fn csv_round_trips_to_the_last_digit() {
    let cfg = parse_config_str(builtin_text("hyperbolic").unwrap()).unwrap();
    let bundle = run(&cfg, RunOptions { lambda: None, mesh_halve: false }).unwrap();
    let text = csv_text(&bundle.reports[0], None);
    let (header, rows) = parse_csv(&text).unwrap();
    assert_eq!(header, CSV_HEADER);
    let emitted: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), emitted.len());
    for (parsed, raw) in rows.iter().zip(&emitted) {
        // The index column is a plain integer.
        assert_eq!(parsed[0].to_f64().to_string(), raw[0]);
        for (d, s) in parsed.iter().zip(raw).skip(1) {
            assert_eq!(d.format(), *s);
        }
    }
    // Values in and beyond the f64 range.
    for v in [1.0, -2.5e-300, 123456.789012345, 6.02214076e23] {
        let s = fmt_f64(v);
        let back = Decimal::parse(&s).unwrap().to_f64();
        assert!((back / v - 1.0).abs() < 1e-11, "{s}");
        assert_eq!(fmt_f64(back), s);
    }
    let huge = shnol_core::grid::LogQuantity::new(1, 5000.0);
    let d = Decimal::parse(&fmt_log(huge)).unwrap();
    assert!((d.ln() - 5000.0).abs() < 1e-8);
}

/// y coordinates of the polyline labelled `label`.
fn polyline(svg: &str, label: &str) -> Vec<f64> {
    let tag = format!("data-label=\"{label}\" d=\"");
    let start = svg.find(&tag).unwrap() + tag.len();
    let d = &svg[start..start + svg[start..].find('"').unwrap()];
    d.split(['M', 'L']).filter(|s| !s.trim().is_empty()).map(|p| p.split_whitespace().nth(1).unwrap().parse().unwrap()).collect()
}

#[test]
fn flat_cond_ii_decays_like_inverse_root() {
    let cfg = parse_config_str(builtin_text("flat-shnol").unwrap()).unwrap();
    let bundle = run(&cfg, RunOptions { lambda: None, mesh_halve: false }).unwrap();
    let rep = &bundle.reports[0];
    let ns: Vec<f64> = rep.records.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rep.records.iter().map(|r| r.cond_ii.ln()).collect();
    let power = shnol_core::shnol::log_slope(&ns, &ys);
    assert!((power + 0.5).abs() < 0.02, "power {power}");
    // The phase of cos inside each window ripples the curve, so the polyline
    // is monotone after averaging over blocks of ten windows.
    let y = polyline(&svg_text(rep), "log cond_ii");
    assert_eq!(y.len(), rep.records.len());
    let blocks: Vec<f64> = y.chunks_exact(10).map(|c| c.iter().sum::<f64>() / 10.0).collect();
    // SVG y grows downwards.
    assert!(blocks.windows(2).all(|w| w[1] > w[0]), "{blocks:?}");
}

#[test]
fn mesh_halving_changes_ratios_by_under_one_percent() {
    for name in ["r2-parabolic", "hyperbolic"] {
        let cfg = parse_config_str(builtin_text(name).unwrap()).unwrap();
        let bundle = run(&cfg, RunOptions { lambda: None, mesh_halve: true }).unwrap();
        let refined = bundle.refined.as_ref().unwrap();
        let text = csv_text(&bundle.reports[0], Some(&refined[0]));
        let (header, rows) = parse_csv(&text).unwrap();
        for (j, h) in header.iter().enumerate().filter(|(_, h)| h.starts_with("rel_")) {
            for r in &rows {
                let v = r[j].to_f64();
                assert!(v.is_nan() || v.abs() < 0.01, "{name} {h} {v}");
            }
        }
    }
}
