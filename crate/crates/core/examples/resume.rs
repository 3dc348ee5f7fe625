//! Interrupt a search every few quartic scans, resume from the checkpoint,
//! and compare with an uninterrupted run.

use ecdescent::cli::{self, CurveSource, Family, OutputFormat, RunConfig};
use ecdescent::descent::Status;

fn main() -> ecdescent::Result<()> {
    let dir = std::env::temp_dir().join(format!("ecdescent-resume-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("checkpoint.json");

    let base = RunConfig::new(CurveSource::Family(Family::Congruent(157.into())));
    let straight = cli::run(&base)?;

    let mut cfg = base.clone();
    cfg.checkpoint = Some(path.clone());
    cfg.max_units = Some(5);
    let mut out = cli::run(&cfg)?;
    cfg.resume = true;
    let mut legs = 1;
    while out.report.status == Status::Interrupted {
        println!("leg {legs}: stopped at {:?}", out.report.frontier);
        out = cli::run(&cfg)?;
        legs += 1;
    }
    let same = out.report == straight.report;
    println!("{legs} legs, status {:?}, identical to the uninterrupted run: {same}", out.report.status);
    print!("{}", out.render(OutputFormat::Text)?.lines().filter(|l| l.starts_with("point")).map(|l| format!("{l}\n")).collect::<String>());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
