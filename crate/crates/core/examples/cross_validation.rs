//! Five-fold cross-validation of the CRF baseline with domain-stratified
//! folds, writing the same report files as the command line tool.

use rhetorical_roles::config::{ConfigOverrides, ModelKind, TrainConfig};
use rhetorical_roles::eval::{cross_validate, domain_csv, CvOptions};
use rhetorical_roles::synthetic::{generate, SyntheticConfig};
use rhetorical_roles::Result;

fn main() -> Result<()> {
    let corpus = generate(&SyntheticConfig { documents: 20, mean_sentences: 25, seed: 2, ..Default::default() })?;
    let cfg = TrainConfig::resolve(
        ConfigOverrides { model: Some(ModelKind::CrfBaseline), epochs: Some(30), ..Default::default() },
        Default::default(),
    )?;
    let opts = CvOptions { k: 5, seed: 11, stratify_domain: true, jobs: 2 };
    let cv = cross_validate(&corpus, &cfg, &opts, None)?;

    println!("fold sizes {:?}", cv.plan.fold_sizes());
    for (i, f) in cv.mean.macro_fscore_per_fold.iter().enumerate() {
        println!("fold {i}: macro F {f:.3}");
    }
    println!("mean macro F {:.3}, accuracy {:.3}\n", cv.mean.macro_avg.fscore, cv.mean.accuracy);
    print!("{}", domain_csv(&cv.mean.pooled));

    let dir = std::env::temp_dir().join("rhetorical-roles-cv");
    cv.write_reports(&dir, true)?;
    println!("\nreports written to {}", dir.display());
    Ok(())
}
