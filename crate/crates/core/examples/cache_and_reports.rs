//! Period matrices through the on-disk cache and a versioned JSON report.

use thomae::io::{input_hash, periods_with_cache, save_report, ConfigFile, PeriodCache, PeriodsSummary, Report};
use thomae::periods::PeriodSettings;
use thomae::thomae::example7_problem;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let cache = PeriodCache::new(dir.path().join("cache"));
    let (config, tree, lambda) = example7_problem();
    let s = PeriodSettings::for_precision::<f64>();
    let (cold, hit0) = periods_with_cache::<f64>(Some(&cache), &config, &tree, &s).unwrap();
    let (warm, hit1) = periods_with_cache::<f64>(Some(&cache), &config, &tree, &s).unwrap();
    println!("first call hit {hit0}, second call hit {hit1}, bit-identical τ {}", cold.tau.to_pairs() == warm.tau.to_pairs());

    let file = ConfigFile::new(&config, &tree, Some(&lambda));
    let hash = input_hash(&file);
    let report = Report::new::<f64>("periods", Some(&hash), serde_json::to_value(s).unwrap(), PeriodsSummary::of(&warm));
    let out = dir.path().join("periods.json");
    save_report(&out, &report).unwrap();
    println!("input hash {hash}");
    println!("report of {} bytes written to {}", std::fs::metadata(&out).unwrap().len(), out.display());
}
