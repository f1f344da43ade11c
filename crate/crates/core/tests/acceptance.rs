//! The ten acceptance criteria. Each test prints one PASS/FAIL line.

use abplab::suite::{self, SuiteConfig, SuiteOutput};
use abplab::Exec;
use std::time::{Duration, Instant};

const SEED: u64 = 20240611;

fn verdict(id: u32, label: &str, budget: Option<Duration>, f: impl FnOnce() -> Result<(), String>) {
    let start = Instant::now();
    let res = f();
    let took = start.elapsed();
    let res = match (res, budget) {
        (Ok(()), Some(b)) if took > b => Err(format!("runtime {:.1} s over budget {:.0} s", took.as_secs_f64(), b.as_secs_f64())),
        (r, _) => r,
    };
    match &res {
        Ok(()) => println!("criterion {id:>2} {label}: PASS ({:.2} s)", took.as_secs_f64()),
        Err(e) => println!("criterion {id:>2} {label}: FAIL ({:.2} s) {e}", took.as_secs_f64()),
    }
    if let Err(e) = res {
        panic!("criterion {id} failed: {e}");
    }
}

fn all_pass(out: &SuiteOutput) -> Result<(), String> {
    match out.failures().next() {
        None => Ok(()),
        Some(r) => Err(format!("{} failures, first {}: {}", out.failures().count(), r.name, serde_json::to_string(r).unwrap())),
    }
}

fn run(name: &str, cfg: SuiteConfig) -> Result<SuiteOutput, String> {
    suite::run(name, &cfg).map_err(|e| format!("{name}: {e}"))
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

#[test]
fn criterion_01_constants_ledger() {
    verdict(1, "constants ledger", secs(1), || {
        let out = run("constants", SuiteConfig::new(SEED))?;
        if out.reports.iter().filter(|r| r.name.starts_with("constants.")).count() != 36 * 5 {
            return Err("expected five checks on each of the 36 ledgers".into());
        }
        all_pass(&out)
    });
}

#[test]
fn criterion_02_abp_equality_cases() {
    verdict(2, "ABP equality cases", secs(30), || {
        let out = run("abp_equality", SuiteConfig::new(SEED).with_resolution(256))?;
        all_pass(&out)
    });
}

#[test]
fn criterion_03_abp_inequality() {
    verdict(3, "ABP inequality on random fields", secs(300), || {
        let out = run("abp_random", SuiteConfig::new(SEED).with_samples(50))?;
        for r in &out.reports {
            if r.diagnostics["instances"] != 50 {
                return Err(format!("{}: wrong instance count", r.name));
            }
        }
        all_pass(&out)
    });
}

#[test]
fn criterion_04_jacobi_comparison() {
    verdict(4, "Jacobi comparison", None, || {
        let out = run("jacobi", SuiteConfig::new(SEED).with_samples(100))?;
        let closed = out.reports.iter().find(|r| r.name == "jacobi.sphere_closed_form").ok_or("closed form check missing")?;
        if closed.abs_tol != 1e-8 {
            return Err("closed form tolerance".into());
        }
        all_pass(&out)
    });
}

#[test]
fn criterion_05_barrier() {
    verdict(5, "barrier", None, || {
        let out = run("barrier", SuiteConfig::new(SEED))?;
        let ricci: Vec<_> = out.reports.iter().filter(|r| r.name.starts_with("barrier.ricci")).collect();
        let covered = ["euclidean", "sphere", "hyperbolic", "gaussian_plane"]
            .iter()
            .all(|m| ricci.iter().any(|r| r.diagnostics.get("case").is_some_and(|c| c == m)));
        if !covered {
            return Err("Ricci comparison not run on every model".into());
        }
        all_pass(&out)
    });
}

#[test]
fn criterion_06_harnack_functional() {
    verdict(6, "Harnack functional", secs(120), || {
        let out = run("hfun", SuiteConfig::new(SEED).with_resolution(256))?;
        if out.reports.iter().filter(|r| r.name == "hfun.closed_form").count() != 6 {
            return Err("expected six closed form comparisons".into());
        }
        all_pass(&out)
    });
}

#[test]
fn criterion_07_harnack_pipeline() {
    verdict(7, "Harnack inequality pipeline", secs(300), || {
        let out = run("harnack", SuiteConfig::new(SEED))?;
        for r in &out.reports {
            let theorem = r.name.starts_with("harnack.") || r.name.starts_with("growth.");
            if theorem && r.diagnostics.get("sharpness").map_or(true, |s| s != "non-sharp") {
                return Err(format!("{} is not labelled non-sharp", r.name));
            }
        }
        for model in ["euclidean well", "hyperbolic well"] {
            let n = out.reports.iter().filter(|r| r.name.starts_with("growth.") && r.diagnostics["case"] == model).count();
            if n != 7 {
                return Err(format!("growth pipeline on {model} produced {n} reports"));
            }
        }
        if out.reports.iter().filter(|r| r.name == "premise.rejected").count() < 9 {
            return Err("missing rejection cases".into());
        }
        all_pass(&out)
    });
}

#[test]
fn criterion_08_pucci() {
    verdict(8, "Pucci operators", None, || {
        let out = run("pucci", SuiteConfig::new(SEED).with_samples(1000))?;
        let pairs = out.reports.iter().find(|r| r.name == "pucci.contact_bound").ok_or("contact bound missing")?;
        if pairs.diagnostics["instances"] != 1000 {
            return Err("expected 1000 contact pairs".into());
        }
        all_pass(&out)
    });
}

#[test]
fn criterion_09_measure_tools() {
    verdict(9, "measure tools", None, || {
        let out = run("measure", SuiteConfig::new(SEED).with_samples(100))?;
        all_pass(&out)
    });
}

#[test]
fn criterion_10_determinism() {
    verdict(10, "determinism", None, || {
        for name in suite::SUITES {
            let cfg = match name {
                "abp_equality" => SuiteConfig::new(SEED).with_resolution(64),
                "abp_random" | "jacobi" | "measure" | "pucci" => SuiteConfig::new(SEED).with_samples(5),
                "hfun" => SuiteConfig::new(SEED).with_resolution(64),
                "harnack" => SuiteConfig::new(SEED).with_samples(1),
                _ => SuiteConfig::new(SEED),
            };
            let bytes = |exec: Exec| -> Result<Vec<u8>, String> {
                Ok(serde_json::to_vec_pretty(&run(name, cfg.with_exec(exec))?).unwrap())
            };
            let first = bytes(Exec::Parallel)?;
            if first != bytes(Exec::Parallel)? {
                return Err(format!("{name}: rerun differs"));
            }
            if first != bytes(Exec::Sequential)? {
                return Err(format!("{name}: sequential run differs"));
            }
        }
        Ok(())
    });
}
