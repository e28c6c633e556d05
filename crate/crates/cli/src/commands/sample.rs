use std::collections::BTreeMap;

use tg_core::corpus_io::{self, write_tweets};
use tg_core::sampling::{
    build_study_set, enrich, expert_subsample, stratified_daily_sample, with_exact_raters, ExpertSample, StudySet,
};
use tg_core::{Cohort, RawAnnotation, SetTag, TweetRecord, VolumeTable};

use super::Context;
use crate::config::{ExpertConfig, SamplingConfig};
use crate::error::{CliError, CliResult};

pub(super) fn plan(ctx: &Context) -> CliResult<&SamplingConfig> {
    ctx.config
        .sampling
        .as_ref()
        .ok_or_else(|| CliError::Usage("config section `sampling` is required for this command".into()))
}

pub(super) fn draw_study(c: &[TweetRecord], volumes: &VolumeTable, plan: &SamplingConfig, seed: u64) -> CliResult<StudySet> {
    let b = stratified_daily_sample(c, volumes, plan.target_size_b, seed)?;
    let f = enrich(c, &b.members, plan.target_size_f, seed)?;
    Ok(build_study_set(&b, &f, seed)?)
}

pub(super) fn draw_experts(
    a: &[TweetRecord],
    crowd: Option<&[RawAnnotation]>,
    expert: &ExpertConfig,
    flags: Option<&BTreeMap<String, bool>>,
    seed: u64,
) -> CliResult<ExpertSample> {
    let pool = match (expert.pool_crowd_raters, crowd) {
        (None, _) => a.to_vec(),
        (Some(n), Some(anns)) => with_exact_raters(a, anns, Cohort::Crowd, n),
        (Some(_), None) => {
            return Err(CliError::Usage(
                "sampling.expert.pool_crowd_raters needs paths.annotations".into(),
            ))
        }
    };
    let sample = if expert.flag == "k" {
        expert_subsample(&pool, "k", |r| r.k, expert.n_pos, expert.n_neg, seed)?
    } else {
        let flags = flags.ok_or_else(|| {
            CliError::Usage(format!("expert flag {:?} needs paths.expert_flags", expert.flag))
        })?;
        if let Some(r) = pool.iter().find(|r| !flags.contains_key(&r.guid)) {
            return Err(CliError::Usage(format!("expert flags file has no entry for {:?}", r.guid)));
        }
        expert_subsample(&pool, &expert.flag, |r| flags[&r.guid], expert.n_pos, expert.n_neg, seed)?
    };
    Ok(sample)
}

pub fn sample(ctx: &Context) -> CliResult<()> {
    let seed = ctx.require_seed("sample")?;
    let plan = plan(ctx)?;
    let (c, volumes, _) = ctx.corpus()?;
    let study = draw_study(&c, &volumes, plan, seed)?;

    let mut rec = ctx.recorder("sample");
    let part = |tag: SetTag| -> Vec<TweetRecord> { study.members.iter().filter(|r| r.has_tag(tag)).cloned().collect() };
    rec.with("B.jsonl", |w| write_tweets(w, &part(SetTag::B)))?;
    rec.with("F.jsonl", |w| write_tweets(w, &part(SetTag::F)))?;
    rec.with("A.jsonl", |w| write_tweets(w, &study.members))?;
    rec.json("study_manifest.json", &study.manifest)?;

    if let Some(expert) = &plan.expert {
        let crowd = match ctx.config.paths.annotations {
            Some(_) if expert.pool_crowd_raters.is_some() => Some(ctx.raw_annotations()?),
            _ => None,
        };
        let flags = match (&ctx.config.paths.expert_flags, expert.flag.as_str()) {
            (_, "k") | (None, _) => None,
            (Some(p), _) => Some(corpus_io::load_flags(&ctx.resolve(p))?),
        };
        let e = draw_experts(&study.members, crowd.as_deref(), expert, flags.as_ref(), seed)?;
        rec.with("E.jsonl", |w| write_tweets(w, &e.members))?;
        rec.json("expert_manifest.json", &e.manifest)?;
    }
    rec.finish()
}
