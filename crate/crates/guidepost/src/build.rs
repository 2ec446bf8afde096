//! Multi-threaded bundle construction. Produces exactly the bundle the
//! sequential core builder does.

use guidepost_core::sketch::hyperplane::{assemble, project_word, WordProjection, WORD_BITS};
use guidepost_core::sketch::{finish_bundle, hyperplane_inputs, resolve_config, sketch_column, ColumnSketch};
use guidepost_core::{Dataset, SketchBundle, SketchConfig};
use rayon::prelude::*;

use crate::Error;

/// Pass one runs per column, pass two per 64-hyperplane block.
pub fn build_bundle_parallel(dataset: &Dataset, config: &SketchConfig) -> Result<SketchBundle, Error> {
    let config = resolve_config(dataset, config)?;
    let columns: Vec<ColumnSketch> = dataset.columns().par_iter().map(|c| sketch_column(c, &config, 0)).collect();
    let (indices, inputs) = hyperplane_inputs(dataset, &columns);
    let words: Vec<WordProjection> = (0..config.k / WORD_BITS)
        .into_par_iter()
        .map(|w| project_word(config.seed, w, 0, &inputs))
        .collect();
    let signatures = assemble(config.k, config.seed, &inputs, &words);
    Ok(finish_bundle(dataset, config, columns, &indices, signatures))
}
