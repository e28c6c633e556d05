use std::path::Path;

use clap::ValueEnum;
use tg_core::evaluation::load_pr_curve;
use tg_core::simplex::load_simplex_points;

use crate::error::CliResult;
use crate::run::write_bytes;
use crate::svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Simplex,
    PrCurve,
}

pub fn plot(kind: PlotKind, data: &Path, out: &Path) -> CliResult<()> {
    let name = data.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let comment = format!("tg plot from {name}");
    let doc = match kind {
        PlotKind::Simplex => svg::simplex(&load_simplex_points(data)?, &name, &comment),
        PlotKind::PrCurve => svg::pr_curve(&load_pr_curve(data)?.points, &name, &comment),
    };
    write_bytes(out, doc.as_bytes())
}
