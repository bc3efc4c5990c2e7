use kef_suites::{SuiteConfig, SuiteKind};

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "identity".into());
    let kind = match which.as_str() {
        "identity" => SuiteKind::Identity,
        "inequality" => SuiteKind::Inequality,
        "mto" => SuiteKind::Mto,
        "continuity" => SuiteKind::Continuity,
        "witness" => SuiteKind::Witness,
        "futaki" => SuiteKind::Futaki,
        other => panic!("unknown suite {other}"),
    };
    let mut config = SuiteConfig::default_for(kind);
    if let Some(arg) = std::env::args().nth(2) {
        if let Some(t) = arg.strip_prefix("toric") {
            let n: usize = t.parse().unwrap();
            config = SuiteConfig::new(
                kind,
                kef_suites::ModelSelector::Toric {
                    n,
                    lbox: 40.0,
                    points_per_axis: 64,
                },
            );
        } else {
            config.samples = arg.parse().unwrap();
        }
    }
    if let Some(arg) = std::env::args().nth(3) {
        config.samples = arg.parse().unwrap();
    }
    let t0 = std::time::Instant::now();
    let report = kind.run(&config).expect("suite run");
    println!(
        "suite={} pass={} cases={} passed={} max_res={:.3e} min_margin={:.3e} wall={:.1}s",
        which,
        report.pass,
        report.summary.cases,
        report.summary.passed,
        report.summary.max_residual,
        report.summary.min_margin,
        t0.elapsed().as_secs_f64()
    );
    for c in &report.cases {
        let worst_res = c
            .residuals
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, v)| format!("{k}={v:.3e}"))
            .unwrap_or_default();
        let worst_m = c
            .margins
            .iter()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, v)| format!("{k}={v:.3e}"))
            .unwrap_or_default();
        println!(
            "  {} pass={} worst_res {} worst_margin {} {}",
            c.name,
            c.pass,
            worst_res,
            worst_m,
            if c.failures.is_empty() {
                String::new()
            } else {
                format!("FAILURES: {:?}", c.failures)
            }
        );
        for (k, v) in &c.values {
            println!("    value {k} = {v:.6e}");
        }
    }
}
