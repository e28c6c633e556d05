//! Writes a synthetic campaign to the input paths of the config, so the
//! rest of the pipeline can run on it.

use std::collections::BTreeMap;

use tg_core::annotation::{aggregate_labels, validate_all, Label, LabelMode};
use tg_core::corpus_io::{write_annotations, write_flags, write_scores, write_tweets, write_volumes};
use tg_core::synthetic::{annotate, classifier_scores, generate_world};
use tg_core::Cohort;

use super::sample::{draw_experts, draw_study, plan};
use super::Context;
use crate::error::{CliError, CliResult};
use crate::run::Recorder;

fn put<F>(rec: &mut Recorder, ctx: &Context, key: &str, path: &Option<std::path::PathBuf>, render: F) -> CliResult<()>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let path = ctx.input(key, path)?;
    let mut buf = Vec::new();
    render(&mut buf).map_err(|e| CliError::io(&path, e))?;
    let label = path.strip_prefix(&ctx.base_dir).unwrap_or(&path).display().to_string();
    rec.external(&label, &path, &buf)
}

pub fn fixture(ctx: &Context) -> CliResult<()> {
    let seed = ctx.require_seed("fixture")?;
    let spec = ctx
        .config
        .fixture
        .clone()
        .ok_or_else(|| CliError::Usage("config section `fixture` is required for this command".into()))?;
    let plan = plan(ctx)?;
    let paths = &ctx.config.paths;

    let mut world_cfg = spec.world.clone();
    world_cfg.seed = seed;
    let world = generate_world(&world_cfg)?;
    let study = draw_study(&world.corpus, &world.volumes, plan, seed)?;
    let a = &study.members;
    let a_guids: Vec<String> = a.iter().map(|r| r.guid.clone()).collect();

    let mut crowd_design = spec.crowd.clone();
    crowd_design.cohort = Cohort::Crowd;
    crowd_design.seed = seed;
    let crowd = annotate(&world, &a_guids, &crowd_design)?;

    let mut annotations = crowd.clone();
    let mut flags = None;
    if let Some(expert) = &plan.expert {
        if expert.flag != "k" {
            // stratify experts on the crowd's binary verdict
            let anns = validate_all(&crowd, &ctx.media()?)?;
            let mut f = BTreeMap::new();
            for row in aggregate_labels(&anns, super::aggregate::conflation_order(ctx))? {
                if row.mode == LabelMode::BinaryConflated {
                    f.insert(row.guid.clone(), row.parsed_label()? == Label::Binary(true));
                }
            }
            flags = Some(f);
        }
        let e = draw_experts(a, Some(&crowd), expert, flags.as_ref(), seed)?;
        let e_guids: Vec<String> = e.members.iter().map(|r| r.guid.clone()).collect();
        let mut expert_design = spec.expert.clone();
        expert_design.cohort = Cohort::Expert;
        expert_design.seed = seed;
        annotations.extend(annotate(&world, &e_guids, &expert_design)?);
    }

    let mut rec = ctx.recorder("fixture");
    put(&mut rec, ctx, "corpus", &paths.corpus, |w| write_tweets(w, &world.corpus))?;
    put(&mut rec, ctx, "volumes", &paths.volumes, |w| write_volumes(w, &world.volumes))?;
    put(&mut rec, ctx, "annotations", &paths.annotations, |w| write_annotations(w, &annotations))?;
    if let Some(f) = &flags {
        put(&mut rec, ctx, "expert_flags", &paths.expert_flags, |w| write_flags(w, f))?;
    }
    for mut scorer in spec.scorers {
        scorer.seed = seed;
        let table = classifier_scores(&world, a, &scorer)?;
        let path = paths.scores.get(&scorer.name).cloned();
        if path.is_none() {
            return Err(CliError::Usage(format!("paths.scores has no entry for scorer {:?}", scorer.name)));
        }
        put(&mut rec, ctx, &format!("scores.{}", scorer.name), &path, |w| write_scores(w, &table))?;
    }
    rec.json(
        "truth.json",
        &serde_json::json!({
            "population_prevalence": world.population_prevalence(),
            "study_set_positive_share": a.iter().filter(|r| world.is_positive(&r.guid)).count() as f64 / a.len() as f64,
        }),
    )?;
    rec.finish()
}
