//! transform, evaluate, reflect and analyze on the bundled ten-problem
//! fixture with the mock provider. Outputs land in a temporary directory.
//! Needs `python3` on PATH.

use std::path::PathBuf;

use mot_harness::pipeline::{
    cmd_analyze, cmd_evaluate, cmd_reflect, cmd_transform, CandidateSource, Context, Overrides,
};

fn main() -> anyhow::Result<()> {
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e");
    let out = tempfile::tempdir()?;
    let overrides = Overrides {
        outdir: Some(out.path().to_path_buf()),
        mock_provider: Some(fixture.join("mock")),
        ..Default::default()
    };
    let mut ctx = Context::load(&fixture.join("config.json"), overrides)?;
    ctx.config.provider.cache_dir = Some(out.path().join("cache"));

    let t = cmd_transform(&ctx)?;
    println!(
        "transform: {} accepted, {} rejected\n",
        t.accepted, t.rejected
    );
    cmd_evaluate(
        &ctx,
        &CandidateSource::File(fixture.join("candidates.json")),
    )?;
    println!();
    let r = cmd_reflect(&ctx)?;
    println!();
    let report = cmd_analyze(&ctx, None)?;
    println!("\nreflection traces: {}", r.traces.len());
    for row in report.mi_profile.iter().filter(|r| r.split == "all") {
        println!("mean MI [{}]: {:?}", row.difficulty, row.mean_mi);
    }
    Ok(())
}
