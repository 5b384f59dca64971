//! Experiment harness: config files, replicated runs, sweeps, summaries and
//! renderings.

pub mod aggregate;
pub mod config;
pub mod render;
pub mod run;
pub mod sweep;

pub use aggregate::{aggregate, summarize, write_summary, Metric, Summary};
pub use config::{apply_override, DomainConfig, ExperimentConfig, DEFAULT_CONFIG};
pub use render::{render_archive, render_phenotype, ColorMode};
pub use run::{load_archive, run_experiment, run_experiment_with, run_replicates, Manifest, MANIFEST_FILE};
pub use sweep::{run_sweep, SweepReport, SweepSpec};

use crate::qd::ArchiveSnapshot;

/// Flattened elite phenotypes, one CSV line per elite in bin order:
/// `source,encoding_tag,fitness,c0,...`. Cells are row-major.
pub fn export_phenotypes_csv(archives: &[(String, ArchiveSnapshot)]) -> String {
    let cells = archives
        .iter()
        .flat_map(|(_, a)| a.elites.first())
        .map(|e| e.elite.phenotype.levels().len())
        .max()
        .unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["source".to_string(), "encoding_tag".into(), "fitness".into()];
    header.extend((0..cells).map(|i| format!("c{i}")));
    w.write_record(&header).expect("in-memory write");
    for (source, archive) in archives {
        let mut elites: Vec<_> = archive.elites.iter().collect();
        elites.sort_by_key(|e| (e.area_bin, e.count_bin));
        for e in elites {
            let mut rec = vec![source.clone(), e.elite.encoding_tag.to_string(), e.elite.fitness.to_string()];
            rec.extend(e.elite.phenotype.levels().iter().map(u8::to_string));
            w.write_record(&rec).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
