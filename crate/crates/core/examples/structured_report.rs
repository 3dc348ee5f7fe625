//! Produce a structured report, read it back and re-verify it.

use ecdescent::cli::{self, CurveSource, Family, OutputFormat, Report, RunConfig};
use ecdescent::search::SearchBounds;

fn main() -> ecdescent::Result<()> {
    let mut cfg = RunConfig::new(CurveSource::Family(Family::Bremner(11.into())));
    cfg.bounds = SearchBounds::new(2, 50, 30, 30, 60)?;
    cfg.output = OutputFormat::Structured;
    let out = cli::run(&cfg)?;
    let text = out.render(OutputFormat::Structured)?;
    print!("{text}");
    let line = text.lines().next().unwrap_or_default();
    let back: Report = serde_json::from_str(line)?;
    back.verify()?;
    println!("re-verified: status {:?}, point {:?}", back.status, back.point.map(|p| p.to_string()));
    Ok(())
}
