use tg_core::agreement::{agreement_report, write_tweet_kappas, AgreementOptions};
use tg_core::simplex::{simplex_points, write_simplex_points};

use super::Context;
use crate::error::CliResult;
use crate::svg;

pub fn agree(ctx: &Context) -> CliResult<()> {
    let seed = ctx.require_seed("agree")?;
    let anns = ctx.annotations()?;
    let weights = if ctx.config.compat.weighted_agreement {
        Some(ctx.load_weights()?)
    } else {
        None
    };
    let analysis = agreement_report(
        &anns,
        AgreementOptions {
            n_target: ctx.config.agreement.n_target,
            seed,
            weights: weights.as_ref(),
        },
    )?;

    let mut rec = ctx.recorder("agree");
    rec.json("agreement_report.json", &analysis.report)?;
    for (cohort, detail) in &analysis.contain_abuse {
        if let Some(k) = &detail.kappa {
            rec.with(&format!("kappa_per_tweet_{cohort}.csv"), |w| write_tweet_kappas(w, &k.per_tweet))?;
        }
        let points = simplex_points(&detail.counts, ctx.config.agreement.jitter, seed)?;
        rec.with(&format!("simplex_points_{cohort}.csv"), |w| write_simplex_points(w, &points))?;
        let title = format!("{cohort} annotations, N = {}", ctx.config.agreement.n_target);
        let doc = svg::simplex(&points, &title, &rec.svg_comment());
        rec.bytes(&format!("simplex_{cohort}.svg"), doc.as_bytes())?;
    }
    rec.finish()
}
